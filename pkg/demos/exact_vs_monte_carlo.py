"""
Exact enumeration versus Monte Carlo
====================================

With few observations every rearrangement can be listed. The engine does
this automatically below ``exact_threshold``; above it, it samples.
"""

import numpy as np

from permstat import exact_test, permuttest2, validate_config

x = np.array([4.1, 5.3, 6.0, 5.5])
y = np.array([3.2, 3.9, 4.4, 2.8])

p_exact = permuttest2(x, y, validate_config(n_perm=1000)).p[0]
p_mc = permuttest2(x, y, validate_config(n_perm=50000, exact_threshold=1)).p[0]
p_oracle = exact_test(x, y, family="t2")

print(f"engine exact   {p_exact:.5f}")
print(f"brute force    {p_oracle:.5f}")
print(f"Monte Carlo    {p_mc:.5f}")
