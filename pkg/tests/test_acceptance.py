"""Acceptance gate: eleven numbered criteria, each reported as one PASS/FAIL
line in the terminal summary (see conftest). Tolerances are pinned here and
asserted as stated; a failing criterion stays red rather than being loosened.
"""

import math
import time
from fractions import Fraction

import mpmath
import pytest
import scipy.stats

import polyatree as pt

RESULTS: list[tuple[int, bool, str]] = []


def record(num: int, ok: bool, detail: str) -> None:
    RESULTS.append((num, ok, detail))
    assert ok, f"criterion {num}: {detail}"


@pytest.fixture(scope="module")
def constants():
    return pt.compute_constants(order=128)


@pytest.fixture(scope="module")
def moment_run():
    # shared by criteria 7 and 8; all-nodes keeps the forest histogram
    # aligned with the node-averaged law the limit theorem describes
    return pt.run_experiment(500, 100_000, seed=pt.DEFAULT_SEED, all_nodes=True)


@pytest.fixture(scope="module")
def growth_runs():
    out = {}
    for n in (500, 1000, 2000, 4000):
        out[n] = pt.run_experiment(n, 10_000, seed=pt.DEFAULT_SEED)
    return out


def test_criterion_01_tree_counts():
    t0 = time.perf_counter()
    got = pt.polya_counts(10)
    want = [1, 1, 2, 4, 9, 20, 48, 115, 286, 719]
    dt = time.perf_counter() - t0
    record(1, got == want and dt < 1.0, f"t_1..t_10 {'match' if got == want else f'differ: {got}'}; {dt:.3f}s")


def test_criterion_02_forest_weights():
    t0 = time.perf_counter()
    got = pt.dforest_weights(7)
    want = [Fraction(1), Fraction(0), Fraction(1, 2), Fraction(1, 3),
            Fraction(7, 8), Fraction(11, 30), Fraction(281, 144), Fraction(449, 840)]
    dt = time.perf_counter() - t0
    record(2, got == want and dt < 1.0, f"d_0..d_7 {'match' if got == want else f'differ: {got}'}; {dt:.3f}s")


def test_criterion_03_oracle_equivalence():
    t0 = time.perf_counter()
    d = pt.dforest_weights(12)
    forests_ok = all(pt.dn_oracle(n) == d[n] for n in range(13))
    table = pt.ctree_polynomials(10)
    polys_ok = all(pt.tcn_polynomial_oracle(n) == table.row(n) for n in range(1, 11))
    dt = time.perf_counter() - t0
    record(3, forests_ok and polys_ok and dt < 120,
           f"forest weights n<=12 {'ok' if forests_ok else 'MISMATCH'}, "
           f"marked polynomials n<=10 {'ok' if polys_ok else 'MISMATCH'}; {dt:.1f}s")


def test_criterion_04_orbit_counts():
    t0 = time.perf_counter()
    deriv_ok = all(
        pt.orbit_count(t) == pt.fixed_point_polynomial(t).derivative()(1)
        for n in range(1, 11) for t in pt.enumerate_trees(n)
    )
    p = pt.pointed_series(10)
    sums = [sum(pt.orbit_count(t) for t in pt.enumerate_trees(n)) for n in range(1, 11)]
    sums_ok = sums == p and sums[:5] == [1, 2, 5, 13, 35]
    dt = time.perf_counter() - t0
    record(4, deriv_ok and sums_ok and dt < 60,
           f"orbit=t'(1) {'ok' if deriv_ok else 'MISMATCH'}, totals {sums[:5]}..; {dt:.1f}s")


def test_criterion_05_constants(constants):
    t0 = time.perf_counter()
    k = constants
    checks = {
        "rho": abs(float(k.rho) - 0.3383219) < 1e-6,
        "b": abs(float(k.b) - 2.68112) < 1e-4,
        "c": abs(float(k.c) - 2.39614) < 1e-4,
        "residual": float(k.residual) < 1e-20,
    }
    dt = time.perf_counter() - t0
    bad = [name for name, ok in checks.items() if not ok]
    record(5, not bad and dt < 5,
           f"rho={mpmath.nstr(k.rho, 9)} b={mpmath.nstr(k.b, 7)} c={mpmath.nstr(k.c, 7)} "
           f"residual={mpmath.nstr(k.residual, 2)}{'; bad: ' + ','.join(bad) if bad else ''}; {dt:.2f}s")


def test_criterion_06_table1(constants):
    t0 = time.perf_counter()
    rows = pt.table1(7, constants)
    eq_print = [0.9197, 0.0000, 0.0526, 0.0119, 0.0105, 0.0015, 0.0027, 0.0003]
    ge_print = [1.0000, 0.0803, 0.0803, 0.0277, 0.0161, 0.0060, 0.0041, 0.0014]
    eq_bad = [m for m in range(8) if abs(float(rows[m][1]) - eq_print[m]) >= 1e-4]
    ge_bad = [m for m in range(8) if abs(float(rows[m][2]) - ge_print[m]) >= 1e-4]
    dt = time.perf_counter() - t0
    detail = f"point column {'all match' if not eq_bad else f'off at m={eq_bad}'}"
    if ge_bad:
        diffs = ", ".join(f"m={m}: computed {float(rows[m][2]):.4f} vs printed {ge_print[m]:.4f}" for m in ge_bad)
        detail += (f"; tail column off at {diffs} — the printed tail values do not telescope "
                   f"against the printed point values, ours do")
    else:
        detail += "; tail column all match"
    record(6, not eq_bad and not ge_bad, detail + f"; {dt:.2f}s")


def test_criterion_07_cn_moments(moment_run, constants):
    s = moment_run
    n, trials = 500, s.trials
    target_mean = float(2 / (constants.b ** 2 * constants.rho))
    target_var = float(11 / (12 * constants.b ** 2 * constants.rho))
    mean = s.mean_c / n
    var = s.var_c / n
    se_mean = math.sqrt(s.var_c / trials) / n
    z_mean = (mean - target_mean) / se_mean
    rse_var = math.sqrt(2 / (trials - 1))
    z_var = (var - target_var) / (target_var * rse_var)
    mean_ok = abs(z_mean) <= 3
    var_ok = abs(z_var) <= 5
    record(7, mean_ok and var_ok,
           f"mean/n={mean:.6f} vs {target_mean:.6f} (z={z_mean:+.1f}, limit 3); "
           f"var/n={var:.5f} vs {target_var:.5f} (z={z_var:+.1f}, limit 5); "
           f"exact finite-n values are 0.821921 and 0.364806 — the finite-n bias "
           f"exceeds the window; trials={trials}")


def test_criterion_08_forest_histogram(moment_run, constants):
    s = moment_run
    hist = s.histogram()
    bad = []
    zs = []
    for m in (0, 2, 3, 4):
        p = float(pt.forest_prob_asymptotic(m, constants))
        se = math.sqrt(p * (1 - p) / s.trials)
        z = (hist.get(m, 0.0) - p) / se
        zs.append(f"m={m}: {hist.get(m, 0.0):.5f} (z={z:+.1f})")
        if abs(z) > 3:
            bad.append(m)
    record(8, not bad, "; ".join(zs) + f" vs limit law at 3 binomial SE, trials={s.trials}")


def test_criterion_09_growth_of_largest_forest(growth_runs, constants):
    xs, ys, sds = [], [], []
    for n, s in sorted(growth_runs.items()):
        xs.append(math.log(n))
        ys.append(s.ln_mean)
        sds.append(math.sqrt(s.ln_var))
    xb, yb = sum(xs) / len(xs), sum(ys) / len(ys)
    slope = sum((x - xb) * (y - yb) for x, y in zip(xs, ys)) / sum((x - xb) ** 2 for x in xs)
    target = float(2 / abs(mpmath.log(constants.rho)))
    slope_ok = abs(slope - target) <= 0.15 * target
    sd_ok = max(sds) < 3.0 and (sds[-1] - sds[0]) < 0.3
    record(9, slope_ok and sd_ok,
           f"slope={slope:.4f} vs {target:.4f} +/-15% [{0.85*target:.3f}, {1.15*target:.3f}] "
           f"{'ok' if slope_ok else 'OUT (the lnln-term drift: local slope ~(2-3/ln n)/|ln rho| ~ 1.46)'}; "
           f"sd per n = {[f'{s:.2f}' for s in sds]} {'bounded' if sd_ok else 'GROWING'}")


def test_criterion_10_sampler_uniformity():
    t_counts = pt.polya_counts(6)
    pvals = {}
    for n, base in ((4, 0), (6, 1_000_000)):
        counts = {}
        for i in range(40_000):
            t = pt.sample_tree(n, pt.RngStream(pt.DEFAULT_SEED, base + i).rng())
            counts[t] = counts.get(t, 0) + 1
        classes = t_counts[n - 1]
        assert len(counts) == classes
        _, p = scipy.stats.chisquare(list(counts.values()), [40_000 / classes] * classes)
        pvals[n] = p
    star = pt.parse_parens("(()()())")
    fixed = {1: 0, 2: 0, 4: 0}
    trials = 40_000
    for i in range(trials):
        fixed[pt.sample_automorphism(star, pt.RngStream(pt.DEFAULT_SEED, 2_000_000 + i).rng()).fixed_count()] += 1
    star_z = {}
    for k, p in ((4, 1 / 6), (2, 1 / 2), (1, 1 / 3)):
        star_z[k] = (fixed[k] / trials - p) / math.sqrt(p * (1 - p) / trials)
    ok = all(v > 1e-3 for v in pvals.values()) and all(abs(z) <= 3 for z in star_z.values())
    record(10, ok,
           f"chi-square p: n=4 {pvals[4]:.3f}, n=6 {pvals[6]:.3f} (>0.001); "
           f"star law z: {', '.join(f'c={k}: {z:+.1f}' for k, z in sorted(star_z.items()))} (|z|<=3)")


def test_criterion_11_finite_size_convergence(constants):
    t0 = time.perf_counter()
    limit = float(pt.forest_prob_asymptotic(2, constants))
    diffs = {n: abs(float(pt.exact_forest_prob(n, 2)) - limit) for n in (40, 80, 160)}
    dt = time.perf_counter() - t0
    mono = diffs[40] > diffs[80] > diffs[160]
    small = diffs[160] < 1e-3
    record(11, mono and small,
           f"|P_n(2) - {limit:.6f}|: " + ", ".join(f"n={n}: {d:.2e}" for n, d in diffs.items())
           + f" ({'monotone' if mono else 'NOT monotone'}, final {'<' if small else '>='} 1e-3); {dt:.1f}s")
