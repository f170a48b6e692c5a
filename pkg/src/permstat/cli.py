"""Command-line interface.

Exit status: 0 on success, 2 on invalid arguments or configuration, 3 on
data errors (unreadable, non-numeric or degenerate input). Results go to
stdout (or ``--out``); warnings go to stderr. No command prints a
significance verdict, only statistics, p-values, intervals and effect sizes.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

from . import __version__
from .core import validate_config
from .effectsize import EffectKind, booteffectsize, validate_boot_config
from .errors import DataError, PermstatError, ValidationError
from .io import (
    SCHEMA,
    TableSpec,
    dumps,
    effect_records,
    emit_plot_data,
    load_table,
    records,
    to_csv,
)
from .permtests import permuanova1, permuanova2, permucorr, permuttest, permuttest2, permuvartest2, permuztest
from .reference import fwer_sim

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_DATA = 3

TEST_COMMANDS = ("ttest", "ttest2", "vartest2", "ztest", "corr", "anova1", "anova2")


def _bool(text: str) -> bool:
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "y", "on"):
        return True
    if t in ("0", "false", "no", "n", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected true or false, got {text!r}")


def _add_common(p: argparse.ArgumentParser, data: str = "wide"):
    p.add_argument("--x", required=True, help="data file (CSV/TSV)")
    if data == "wide":
        p.add_argument("--y", help="second data file")
    p.add_argument("--delimiter", help="field delimiter (default: detect)")
    p.add_argument("--no-header", action="store_true", help="first row is data")
    p.add_argument("--out", help="write results here instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--threads", type=int, help="worker threads (default: PERMSTAT_THREADS or 1)")


def _add_perm(p: argparse.ArgumentParser, tail_default: str = "two"):
    p.add_argument("--nperm", type=int, default=10000, help="permutations (default 10000)")
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    p.add_argument("--correction", default="max", help="max | bonferroni | holm | none (default max)")
    p.add_argument("--tail", default=tail_default, help=f"two | right | left (default {tail_default})")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--exact-threshold", type=int, default=20000, help="enumerate when this many or fewer rearrangements")
    p.add_argument("--include-null", action="store_true", help="include the null distribution in JSON output")
    p.add_argument("--plot-data", help="write per-variable plot data (TSV) here")


def _add_boot(p: argparse.ArgumentParser, required: bool = False):
    p.add_argument("--effect", required=required, help="cohen | glass | cliff | meandiff | mediandiff")
    p.add_argument("--nboot", type=int, default=10000, help="bootstrap resamples (default 10000)")
    p.add_argument("--no-bias-correct", action="store_true", help="report uncorrected standardised effects")
    p.add_argument("--control", choices=("x", "y"), default="y", help="control sample for Glass' delta")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="permstat", description="Permutation tests and bootstrapped effect sizes.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ttest", help="one-sample or paired t-test (sign flipping)")
    _add_common(p)
    _add_perm(p)
    _add_boot(p)
    p.add_argument("--mu", type=float, default=0.0)

    p = sub.add_parser("ttest2", help="two-sample t-test")
    _add_common(p)
    _add_perm(p)
    _add_boot(p)
    p.add_argument("--var", default="equal", help="equal | unequal (default equal)")

    p = sub.add_parser("vartest2", help="two-sample variance-ratio F-test")
    _add_common(p)
    _add_perm(p)

    p = sub.add_parser("ztest", help="one-sample z-test with known sigma")
    _add_common(p)
    _add_perm(p)
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--sigma", type=float, default=1.0)

    p = sub.add_parser("corr", help="correlation test (columnwise x vs y, or all pairs of x)")
    _add_common(p)
    _add_perm(p)
    p.add_argument("--kind", default="pearson", help="pearson | spearman | rankit")

    p = sub.add_parser("anova1", help="one-way ANOVA from a long-format table")
    _add_common(p, data="long")
    _add_perm(p, tail_default="right")
    p.add_argument("--value", required=True, help="value column")
    p.add_argument("--group", required=True, help="group column")

    p = sub.add_parser("anova2", help="balanced two-way ANOVA from a long-format table")
    _add_common(p, data="long")
    _add_perm(p, tail_default="right")
    p.add_argument("--value", required=True, help="value column")
    p.add_argument("--factor-a", required=True, help="first factor column")
    p.add_argument("--factor-b", required=True, help="second factor column")

    p = sub.add_parser("effectsize", help="bootstrapped effect size")
    _add_common(p)
    _add_boot(p)
    p.set_defaults(effect="cohen")
    p.add_argument("--paired", type=_bool, default=False, help="true | false (default false)")
    p.add_argument("--var", default="equal", help="equal | unequal (default equal)")
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--plot-data", help="write per-variable plot data (TSV) here")

    p = sub.add_parser("fwer-sim", help="simulate family-wise error rate and power")
    p.add_argument("--nvars", type=int, required=True)
    p.add_argument("--nobs", type=int, required=True)
    p.add_argument("--nsims", type=int, required=True)
    p.add_argument("--correction", default="max")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--shift", type=float, default=0.0, help="mean shift on the effect variables")
    p.add_argument("--neffect", type=int, help="number of shifted variables (default nvars // 2)")
    p.add_argument("--equicorrelation", type=float, default=0.0)
    p.add_argument("--nperm", type=int, default=1000, help="permutations per simulated dataset (default 1000)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int)
    p.add_argument("--out")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    return parser


def _wide(path, args):
    return load_table(TableSpec(path, "wide", args.delimiter, False if args.no_header else None))


def _long(args, groups):
    return load_table(
        TableSpec(args.x, "long", args.delimiter, False if args.no_header else None, value=args.value, groups=groups)
    )


def _test_config(args, **extra):
    return validate_config(
        n_perm=args.nperm,
        seed=args.seed,
        tail=args.tail,
        alpha=args.alpha,
        correction=args.correction,
        exact_threshold=args.exact_threshold,
        **extra,
    )


def _boot_config(args, paired):
    return validate_boot_config(
        n_boot=args.nboot,
        seed=args.seed,
        alpha=args.alpha,
        paired=paired,
        var_assumption=getattr(args, "var", "equal"),
        bias_correct=not args.no_bias_correct,
        control=args.control,
    )


def _run_test(args):
    cmd = args.command
    threads = args.threads
    x = y = None
    if cmd in ("anova1", "anova2"):
        groups = [args.group] if cmd == "anova1" else [args.factor_a, args.factor_b]
        table = _long(args, groups)
    else:
        x = _wide(args.x, args)
        y = _wide(args.y, args) if args.y else None

    extra = {"var_assumption": args.var} if cmd == "ttest2" else {}
    cfg = _test_config(args, **extra)
    if cmd == "ttest":
        results = [permuttest(x, y, args.mu, cfg, threads)]
    elif cmd == "ttest2":
        results = [permuttest2(x, _need(y, cmd), cfg, threads)]
    elif cmd == "vartest2":
        results = [permuvartest2(x, _need(y, cmd), cfg, threads)]
    elif cmd == "ztest":
        results = [permuztest(x, args.mu, args.sigma, cfg, threads)]
    elif cmd == "corr":
        results = [permucorr(x, y, args.kind, cfg, threads)]
    elif cmd == "anova1":
        results = [permuanova1(table.values, table.labels[0], cfg, threads)]
    else:
        results = list(permuanova2(table.values, table.labels[0], table.labels[1], cfg, threads))

    effect = None
    if getattr(args, "effect", None):
        paired = cmd == "ttest" and y is not None
        effect = booteffectsize(x, y, args.effect, _boot_config(args, paired), threads)
    if args.plot_data:
        if len(results) == 1:
            emit_plot_data(results[0], args.plot_data, effect)
        else:
            for r in results:
                emit_plot_data(r, _suffixed(args.plot_data, r.family.split("-")[-1]))

    echo = {"command": cmd, **cfg.to_dict()}
    if args.format == "csv":
        rows = [dict(r, test=res.family) for res in results for r in records(res)]
        if effect is not None:
            for r, e in zip(rows, effect_records(effect)):
                r.update({"effect": e["effect"], "effect_ci_lower": e["ci_lower"], "effect_ci_upper": e["ci_upper"]})
        return to_csv(rows, echo)
    doc = {
        "schema": SCHEMA,
        "command": cmd,
        "config": cfg.to_dict(),
        "results": [dict(r.to_dict(include_null=args.include_null), records=records(r)) for r in results],
    }
    if effect is not None:
        doc["effect_size"] = dict(effect.to_dict(), records=effect_records(effect))
    return dumps(doc)


def _need(y, cmd):
    if y is None:
        raise ValidationError(f"{cmd} needs --y")
    return y


def _suffixed(path, tag):
    p = Path(path)
    return p.with_name(f"{p.stem}_{tag}{p.suffix}")


def _run_effect(args):
    x = _wide(args.x, args)
    y = _wide(args.y, args) if args.y else None
    cfg = _boot_config(args, args.paired)
    kind = EffectKind(args.effect) if args.effect in EffectKind._value2member_map_ else args.effect
    res = booteffectsize(x, y, kind, cfg, args.threads)
    if args.plot_data:
        emit_plot_data(None, args.plot_data, res)
    echo = {
        "command": "effectsize",
        "effect": res.kind,
        "n_boot": cfg.n_boot,
        "seed": cfg.seed,
        "alpha": cfg.alpha,
        "paired": cfg.paired,
        "var_assumption": cfg.var_assumption.value,
        "bias_correct": cfg.bias_correct,
        "control": cfg.control,
    }
    if args.format == "csv":
        return to_csv(effect_records(res), echo)
    return dumps({"schema": SCHEMA, "command": "effectsize", "config": echo, "effect_size": dict(res.to_dict(), records=effect_records(res))})


def _run_fwer(args):
    rep = fwer_sim(
        args.nvars,
        args.nobs,
        args.nsims,
        args.alpha,
        args.correction,
        args.shift,
        args.seed,
        n_perm=args.nperm,
        n_effect_vars=args.neffect,
        equicorrelation=args.equicorrelation,
        threads=args.threads,
    )
    d = rep.to_dict()
    if args.format == "csv":
        return to_csv([{"field": k, "value": v} for k, v in d.items()], {"command": "fwer-sim"})
    return dumps({"schema": SCHEMA, "command": "fwer-sim", "report": d})


def run(argv=None, stdout=None, stderr=None) -> int:
    """Parse ``argv``, run the command and return its exit status."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_VALIDATION
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            if args.command in TEST_COMMANDS:
                text = _run_test(args)
            elif args.command == "effectsize":
                text = _run_effect(args)
            else:
                text = _run_fwer(args)
            if args.out:
                Path(args.out).write_text(text)
            else:
                stdout.write(text)
            status = EXIT_OK
        except DataError as exc:
            stderr.write(f"permstat: data error: {exc}\n")
            status = EXIT_DATA
        except PermstatError as exc:
            stderr.write(f"permstat: invalid arguments: {exc}\n")
            status = EXIT_VALIDATION
        except OSError as exc:
            stderr.write(f"permstat: i/o error: {exc}\n")
            status = EXIT_DATA
    for w in caught:
        stderr.write(f"permstat: warning: {w.category.__name__}: {w.message}\n")
    return status


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
