"""Command-line front end.

Every subcommand prints a small report, as JSON (default) or CSV, to stdout
or to --output. Rationals are serialized as "p/q" in lowest terms, big
integers as decimal strings. Exit codes: 0 success, 2 usage error,
3 resource cap exceeded, 4 numeric non-convergence, 5 internal consistency
failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass

import mpmath

from . import asymptotics, series, trees
from .errors import ConsistencyError, NonConvergenceError, ResourceCapError, UsageError
from .sampler import DEFAULT_SEED, RngStream, run_experiment, sample_decomposition, sample_tree

EXIT_CODES = {
    UsageError: 2,
    ResourceCapError: 3,
    NonConvergenceError: 4,
    ConsistencyError: 5,
}


@dataclass(frozen=True)
class CommandConfig:
    command: str
    n: int = 0
    max_m: int = 7
    order: int = series.DEFAULT_ORDER
    precision: int = asymptotics.DEFAULT_PRECISION
    seed: int = DEFAULT_SEED
    count: int = 1
    trials: int = 1000
    workers: int = 1
    all_nodes: bool = False
    fmt: str = "json"
    output: str | None = None


@dataclass
class Report:
    meta: dict
    columns: list[str]
    rows: list[list]


def emit_report(report: Report, cfg: CommandConfig) -> None:
    if cfg.fmt == "json":
        body = {"meta": report.meta, "rows": [dict(zip(report.columns, row)) for row in report.rows]}
        text = json.dumps(body, indent=2) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(report.columns)
        for row in report.rows:
            writer.writerow(row)
        text = buf.getvalue()
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _num(x, digits: int = 12) -> str:
    return mpmath.nstr(x, digits)


# ---------------------------------------------------------------------------
# subcommand handlers


def cmd_counts(cfg: CommandConfig) -> Report:
    t = series.polya_counts(cfg.n)
    rows = [[i + 1, str(v)] for i, v in enumerate(t)]
    return Report({"command": "counts", "n": cfg.n}, ["n", "t_n"], rows)


def cmd_weights(cfg: CommandConfig) -> Report:
    d = series.dforest_weights(cfg.n)
    c = series.cayley_weights(cfg.n) if cfg.n >= 1 else []
    rows = []
    for i in range(cfg.n + 1):
        cs = series.fraction_str(c[i - 1]) if i >= 1 else "-"
        rows.append([i, series.fraction_str(d[i]), cs])
    return Report({"command": "weights", "n": cfg.n}, ["n", "d_n", "c_n"], rows)


def cmd_polys(cfg: CommandConfig) -> Report:
    table = series.ctree_polynomials(cfg.n)
    rows = []
    for n in range(1, cfg.n + 1):
        for k, coeff in table.row(n).items():
            rows.append([n, k, series.fraction_str(coeff)])
    return Report({"command": "polys", "n": cfg.n, "variable": "u marks fixed nodes"},
                  ["n", "k", "coeff"], rows)


def cmd_constants(cfg: CommandConfig) -> Report:
    k = asymptotics.compute_constants(cfg.order, cfg.precision)
    rows = [[key, val] for key, val in k.as_strings().items()]
    return Report({"command": "constants"}, ["constant", "value"], rows)


def cmd_table1(cfg: CommandConfig) -> Report:
    k = asymptotics.compute_constants(cfg.order, cfg.precision)
    rows = [[m, _num(p_eq), _num(p_ge)] for m, p_eq, p_ge in asymptotics.table1(cfg.max_m, k)]
    return Report({"command": "table1", "max_m": cfg.max_m}, ["m", "p_eq", "p_geq"], rows)


def cmd_oracle(cfg: CommandConfig) -> Report:
    """Cross-check the series tables against brute-force enumeration."""
    rows = []
    n_tree = min(cfg.n, trees.DEFAULT_TREE_ENUM_CAP)
    n_forest = min(cfg.n, trees.DEFAULT_FOREST_ENUM_CAP)
    t = series.polya_counts(max(n_tree, 1))
    for n in range(1, n_tree + 1):
        if len(trees.enumerate_trees(n)) != t[n - 1]:
            raise ConsistencyError(f"enumeration count mismatch at n={n}")
    rows.append(["tree_counts_vs_enumeration", n_tree, "ok"])
    d = series.dforest_weights(n_forest)
    for n in range(n_forest + 1):
        if trees.dn_oracle(n) != d[n]:
            raise ConsistencyError(f"forest weight mismatch at n={n}")
    rows.append(["forest_weights_vs_enumeration", n_forest, "ok"])
    table = series.ctree_polynomials(max(n_tree, 1))
    for n in range(1, n_tree + 1):
        if trees.tcn_polynomial_oracle(n) != table.row(n):
            raise ConsistencyError(f"marked polynomial mismatch at n={n}")
    rows.append(["marked_polynomials_vs_enumeration", n_tree, "ok"])
    pointed = series.pointed_series(max(n_tree, 1))
    for n in range(1, n_tree + 1):
        total = sum(trees.orbit_count(tr) for tr in trees.enumerate_trees(n))
        if total != pointed[n - 1]:
            raise ConsistencyError(f"orbit sum mismatch at n={n}")
    rows.append(["orbit_sums_vs_pointed_series", n_tree, "ok"])
    for n in range(min(cfg.n, 6) + 1):
        for f in trees.enumerate_forests(n):
            if trees.forest_weight_oracle(f) != trees.forest_weight(f):
                raise ConsistencyError(f"definitional forest weight mismatch at {f!r}")
    rows.append(["forest_weight_definitional", min(cfg.n, 6), "ok"])
    return Report({"command": "oracle", "n": cfg.n}, ["check", "max_n", "status"], rows)


def cmd_sample(cfg: CommandConfig) -> Report:
    rows = []
    for i in range(cfg.count):
        tree = sample_tree(cfg.n, RngStream(cfg.seed, i).rng())
        rows.append([i, tree.parens, tree.to_level_sequence()])
    return Report({"command": "sample", "n": cfg.n, "seed": cfg.seed},
                  ["trial", "tree", "levels"], rows)


def cmd_decompose(cfg: CommandConfig) -> Report:
    rows = []
    for i in range(cfg.count):
        dec = sample_decomposition(cfg.n, RngStream(cfg.seed, i).rng())
        rec = dec.to_record()
        forests = ";".join(f"{a}:{b}" for a, b in rec["forests"])
        rows.append([i, rec["tree"], rec["c_nodes"], rec["c_size"], rec["max_forest"], forests])
    return Report({"command": "decompose", "n": cfg.n, "seed": cfg.seed},
                  ["trial", "tree", "c_mask", "c_size", "max_forest", "forests"], rows)


def cmd_experiment(cfg: CommandConfig) -> Report:
    stats = run_experiment(cfg.n, cfg.trials, seed=cfg.seed, workers=cfg.workers, all_nodes=cfg.all_nodes)
    rec = stats.to_record()
    hist = rec.pop("forest_size_histogram")
    rows = [[k, v] for k, v in rec.items()]
    for m, f in hist.items():
        rows.append([f"hist_{m}", f])
    return Report({"command": "experiment"}, ["key", "value"], rows)


HANDLERS = {
    "counts": cmd_counts,
    "weights": cmd_weights,
    "polys": cmd_polys,
    "constants": cmd_constants,
    "oracle": cmd_oracle,
    "sample": cmd_sample,
    "decompose": cmd_decompose,
    "experiment": cmd_experiment,
    "table1": cmd_table1,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="polyatree",
        description="Exact and Monte Carlo workbench for the fixed-point "
                    "decomposition of random unlabeled rooted trees.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, n_help, n_default=None):
        if n_default is None:
            sp.add_argument("--n", type=int, required=True, help=n_help)
        else:
            sp.add_argument("--n", type=int, default=n_default, help=n_help)
        sp.add_argument("--format", choices=("json", "csv"), default="json", dest="fmt")
        sp.add_argument("--output", default=None, help="write the report to a file instead of stdout")

    sp = sub.add_parser("counts", help="rooted-tree counts t_1..t_N (OEIS A000081)")
    common(sp, "largest size N")
    sp = sub.add_parser("weights", help="repeated-forest weights d_0..d_N and Cayley weights n^(n-1)/n!")
    common(sp, "largest index N")
    sp = sub.add_parser("polys", help="marked polynomials of the fixed-node count, rows 1..N of C(u*z*D(z))")
    common(sp, "largest row N")
    sp = sub.add_parser("oracle", help="brute-force enumeration cross-checks of every exact table")
    common(sp, "largest size to check")

    sp = sub.add_parser("constants", help="singularity constants rho, b, c, c1 of the tree composition")
    sp.add_argument("--order", type=int, default=series.DEFAULT_ORDER)
    sp.add_argument("--precision", type=int, default=asymptotics.DEFAULT_PRECISION)
    sp.add_argument("--format", choices=("json", "csv"), default="json", dest="fmt")
    sp.add_argument("--output", default=None)

    sp = sub.add_parser("table1", help="limiting law of the forest size at a random fixed node, point and tail columns")
    sp.add_argument("--max-m", type=int, default=7, dest="max_m")
    sp.add_argument("--order", type=int, default=series.DEFAULT_ORDER)
    sp.add_argument("--precision", type=int, default=asymptotics.DEFAULT_PRECISION)
    sp.add_argument("--format", choices=("json", "csv"), default="json", dest="fmt")
    sp.add_argument("--output", default=None)

    sp = sub.add_parser("sample", help="uniform random rooted trees of size n")
    common(sp, "tree size n")
    sp.add_argument("--count", type=int, default=1)
    sp.add_argument("--seed", type=lambda s: int(s, 0), default=DEFAULT_SEED)

    sp = sub.add_parser("decompose", help="sample a tree and a uniform automorphism, report the fixed-point decomposition")
    common(sp, "tree size n")
    sp.add_argument("--count", type=int, default=1)
    sp.add_argument("--seed", type=lambda s: int(s, 0), default=DEFAULT_SEED)

    sp = sub.add_parser("experiment", help="aggregate fixed-point counts and forest sizes over many random decompositions")
    common(sp, "tree size n")
    sp.add_argument("--trials", type=int, default=1000)
    sp.add_argument("--seed", type=lambda s: int(s, 0), default=DEFAULT_SEED)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--all-nodes", action="store_true", dest="all_nodes",
                    help="histogram the forest size at every fixed node instead of one per trial")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    fields = {f for f in CommandConfig.__dataclass_fields__}
    cfg = CommandConfig(**{k: v for k, v in vars(args).items() if k in fields})
    try:
        report = HANDLERS[cfg.command](cfg)
        emit_report(report, cfg)
    except tuple(EXIT_CODES) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CODES[type(exc)]
    return 0


if __name__ == "__main__":
    sys.exit(main())
