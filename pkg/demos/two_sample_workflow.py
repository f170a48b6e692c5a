"""
Two groups, twenty outcome variables
====================================

Simulate two groups of 30 observations on 20 variables, shift the first
ten variables of the second group down by one standard deviation, then
test every variable with a max-statistic permutation test and attach
bootstrapped Hedges' g intervals.
"""

import numpy as np

from permstat import BootConfig, booteffectsize, permuttest2, validate_config
from permstat.io import emit_plot_data

rng = np.random.default_rng(2024)
x = rng.standard_normal((30, 20))
y = rng.standard_normal((30, 20))
y[:, :10] -= 1.0

# max correction: one null distribution of the largest |t| across variables
cfg = validate_config(n_perm=10000, seed=1, correction="max")
res = permuttest2(x, y, cfg)

eff = booteffectsize(x, y, kind="hedges", cfg=BootConfig(n_boot=10000, seed=2))

print(" var      t     p(max)   p(raw)      g   [95% CI]")
for v in range(20):
    print(
        f"{res.names[v]:>4} {res.statistic[v]:7.3f} {res.p[v]:8.4f} {res.p_uncorrected[v]:8.4f}"
        f" {eff.effect[v]:7.3f}  [{eff.ci[v, 0]:.2f}, {eff.ci[v, 1]:.2f}]"
    )

hits = res.p < 0.05
print(f"\ndetected {hits[:10].sum()} of 10 shifted variables, {hits[10:].sum()} false positives")

# everything a plotting script needs to redraw the figure
emit_plot_data(res, "two_sample_plot.tsv", effect=eff)
