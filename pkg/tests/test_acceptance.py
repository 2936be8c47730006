"""Acceptance criteria, each run at its stated size and tolerance.

Every test records one ``PASS``/``FAIL`` line (also listed in the terminal
summary) before asserting. All runs use the fixed seed ``SEED``.
"""

import math
import sys
import time

import numpy as np
import pytest
from scipy.stats import kstest

from conftest import ACCEPTANCE_LINES
from rgg_lab.cli import main as cli_main
from rgg_lab.geom import Norm, critical_radius, sample_uniform
from rgg_lab.graphs import build_geometric, build_geometric_grid
from rgg_lab.matching import (
    BipartiteInstance,
    brute_force_bottleneck,
    constructive_matching,
    edge_lengths,
    exact_bottleneck,
    halving_transform,
    is_permutation,
    sorted_bottleneck_1d,
)
from rgg_lab.properties import PROPERTIES, assert_monotone, critical_radius_sample
from rgg_lab.rng import Stream, derive_seed
from rgg_lab.thresholds import (
    bernoulli_containment_mc,
    bernoulli_fixed_matching_prob,
    containment_trial,
    estimate_threshold,
    loglog_slope,
    matching_scaling,
    pilot_gamma,
    sample_critical_radii,
)

SEED = 1


def record(number, ok, detail, started):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number:>2}: {detail} [{time.perf_counter() - started:.1f}s]"
    ACCEPTANCE_LINES.append(line)
    print(line, file=sys.__stdout__, flush=True)
    return ok


def inversions(values):
    return sum(b < a for a, b in zip(values, values[1:]))


def test_criterion_01_exact_equals_brute_force():
    t0 = time.perf_counter()
    mismatches = 0
    for d in (1, 2, 3):
        for t in range(200):
            s = Stream(derive_seed(SEED, 1, d), t)
            n = 2 + t % 6
            inst = BipartiteInstance(sample_uniform(n, d, s), sample_uniform(n, d, s))
            brute = brute_force_bottleneck(inst).weight
            mismatches += exact_bottleneck(inst).weight != brute
            if d == 1:
                mismatches += sorted_bottleneck_1d(inst).weight != brute
    elapsed = time.perf_counter() - t0
    ok = mismatches == 0 and elapsed < 60
    assert record(1, ok, f"600 instances, {mismatches} mismatches, runtime {elapsed:.1f}s < 60s", t0)


def test_criterion_02_line_matching_slope():
    t0 = time.perf_counter()
    ns = [2 ** k for k in (6, 8, 10, 12, 14, 16)]
    res = matching_scaling(ns, 1, 200, "exact", SEED)
    elapsed = time.perf_counter() - t0
    ok = -0.57 <= res.slope <= -0.43 and elapsed < 120
    assert record(2, ok, f"d=1 slope {res.slope:.4f} in [-0.57, -0.43], runtime {elapsed:.1f}s < 120s", t0)


def test_criterion_03_constructive_d3():
    t0 = time.perf_counter()
    ns = [2 ** k for k in range(7, 16)]
    con = matching_scaling(ns, 3, 100, "constructive", SEED)
    ratios = [r.median_ratio for r in con.rows]
    spread = max(ratios) / min(ratios)
    exact = matching_scaling(ns[:5], 3, 100, "exact", SEED)
    dominated = all(e.median <= c.median for e, c in zip(exact.rows, con.rows))
    elapsed = time.perf_counter() - t0
    slope_ok = -0.40 <= con.slope <= -0.26
    ok = slope_ok and spread <= 2.0 and dominated and elapsed < 600
    detail = (f"constructive slope {con.slope:.4f} in [-0.40, -0.26]: {slope_ok}; "
              f"ratio spread {spread:.3f} <= 2.0: {spread <= 2.0}; "
              f"exact medians <= constructive: {dominated}; runtime {elapsed:.1f}s < 600s")
    assert record(3, ok, detail, t0)


def test_criterion_04_exact_d2():
    t0 = time.perf_counter()
    ns = [2 ** k for k in range(7, 12)]
    res = matching_scaling(ns, 2, 100, "exact", SEED)
    ratios = [r.median_ratio for r in res.rows]
    slope_ok = -0.57 <= res.slope <= -0.43
    inv = inversions(ratios)
    ok = slope_ok and inv <= 1
    detail = (f"d=2 slope {res.slope:.4f} in [-0.57, -0.43]: {slope_ok}; "
              f"median/r_c {', '.join(f'{r:.3f}' for r in ratios)} has {inv} inversion(s) <= 1: {inv <= 1}")
    assert record(4, ok, detail, t0)


def test_criterion_05_connectivity_location():
    t0 = time.perf_counter()
    n = 2 ** 12
    radii = np.array(sample_critical_radii("connectivity", n, 2, 200, SEED))
    scaled = float(np.median(math.pi * n * radii ** 2 / math.log(n)))
    elapsed = time.perf_counter() - t0
    ok = 0.7 <= scaled <= 1.4 and elapsed < 300
    assert record(5, ok, f"median pi n r*^2 / ln n = {scaled:.4f} in [0.7, 1.4], runtime {elapsed:.1f}s", t0)


def test_criterion_06_min_degree_line():
    t0 = time.perf_counter()
    ns = [2 ** 8, 2 ** 10, 2 ** 12]
    ests = [estimate_threshold("mindeg-quarter", n, 1, 0.05, 2000, derive_seed(SEED, 6, n)) for n in ns]
    gaps = [e.r_median - 0.25 for e in ests]
    loc_ok = all(0 < g <= 3 / math.sqrt(n) for g, n in zip(gaps, ns))
    slope = loglog_slope(ns, [e.width for e in ests])
    slope_ok = -0.60 <= slope <= -0.40
    detail = (f"r(n,1/2) - 1/4 = {', '.join(f'{g:.5f}' for g in gaps)} within (0, 3/sqrt n]: {loc_ok}; "
              f"width slope {slope:.4f} in [-0.60, -0.40]: {slope_ok}")
    assert record(6, loc_ok and slope_ok, detail, t0)


def test_criterion_07_completeness_d2():
    t0 = time.perf_counter()
    ns = [2 ** 6, 2 ** 8, 2 ** 10]
    ests = [estimate_threshold("complete", n, 2, 0.1, 2000, derive_seed(SEED, 7, n)) for n in ns]
    loc_ok = all(math.sqrt(2) - 4 / math.sqrt(n) <= e.r_median <= math.sqrt(2) for e, n in zip(ests, ns))
    slope = loglog_slope(ns, [e.width for e in ests])
    slope_ok = -0.65 <= slope <= -0.35
    detail = (f"r(n,1/2) = {', '.join(f'{e.r_median:.5f}' for e in ests)} in [sqrt2 - 4/sqrt n, sqrt2]: {loc_ok}; "
              f"width slope {slope:.4f} in [-0.65, -0.35]: {slope_ok}")
    assert record(7, loc_ok and slope_ok, detail, t0)


def test_criterion_08_containment_determinism():
    t0 = time.perf_counter()
    total = matched = failures = 0
    for n in (16, 64, 256):
        for d in (1, 2, 3):
            q = 0.9 if (n + d) % 2 else 0.5
            gamma = pilot_gamma(n, d, q, 100, derive_seed(SEED, 8, n, d))
            rc = critical_radius(n, d)
            for k, mult in enumerate((0.0, 1.0, 2.0)):
                rep = containment_trial(n, d, mult * rc, gamma, 38, derive_seed(SEED, 8, n, d, k))
                total += rep.trials
                matched += rep.count_matching_ok
                failures += rep.failures
    ok = total >= 1000 and failures == 0
    assert record(8, ok, f"{total} trials, {matched} with M_n <= gamma, {failures} embedding failures", t0)


def test_criterion_09_bernoulli_formula():
    t0 = time.perf_counter()
    trials = 100_000
    parts, ok = [], True
    for n, p, P in ((8, 0.25, 0.75), (3, 0.5, 0.5)):
        exact = bernoulli_fixed_matching_prob(n, p, P)
        mc = bernoulli_containment_mc(n, p, P, trials, derive_seed(SEED, 9, n))
        tol = 3 * math.sqrt(exact * (1 - exact) / trials)
        ok &= abs(mc - exact) <= tol
        parts.append(f"n={n}: |{mc:.5f} - {exact:.5f}| = {abs(mc - exact):.5f} <= {tol:.5f}")
    assert record(9, ok, "; ".join(parts), t0)


def test_criterion_10_property_suites():
    t0 = time.perf_counter()
    checks = {}

    order = contain = shift = True
    ks = []
    for t in range(500):
        x = np.sort(Stream(derive_seed(SEED, 10, 1), t).uniform(256))
        left, right, dl, dr = halving_transform(x)
        out = np.concatenate([left, right])
        order &= bool(np.all(np.diff(out) >= 0))
        contain &= bool(np.all(left <= 0.5) and np.all(right >= 0.5))
        shift &= bool(np.all(np.abs(out - x) <= max(abs(dl), abs(dr)) + 1e-12))
        ks.append(kstest(2 * left, "uniform").statistic)
    ks_median = float(np.median(ks))
    checks["transform order"] = order
    checks["transform containment"] = contain
    checks["transform shift bound"] = shift
    checks[f"transform KS median {ks_median:.4f} <= 0.06"] = ks_median <= 0.06

    tail_ok = True
    for gamma in (0.02, 0.04):
        hits = sum(max(abs(dl), abs(dr)) > gamma for _, _, dl, dr in
                   (halving_transform(np.sort(Stream(derive_seed(SEED, 10, 2), t).uniform(1024)))
                    for t in range(2000)))
        tail_ok &= hits / 2000 <= 2.5 * math.exp(-1024 * gamma ** 2)
    checks["split shift tail"] = tail_ok

    consistent = True
    for t in range(200):
        s = Stream(derive_seed(SEED, 10, 3), t)
        n, d = 2 + t % 60, 1 + t % 3
        inst = BipartiteInstance(sample_uniform(n, d, s), sample_uniform(n, d, s))
        for m in (exact_bottleneck(inst), constructive_matching(inst).matching):
            consistent &= is_permutation(m.phi, n)
            consistent &= abs(m.weight - edge_lengths(inst, m.phi).max()) <= 1e-12
    checks["matching bijectivity and weight"] = consistent

    for name, prop in PROPERTIES.items():
        checks[f"monotone {name}"] = bool(assert_monotone(prop, 500, derive_seed(SEED, 10, 4)))

    grid_ok = True
    for d in (1, 2, 3):
        for t in range(100):
            s = Stream(derive_seed(SEED, 10, 5, d), t)
            ps = sample_uniform(2 + int(s.uniform(1)[0] * 400), d, s)
            r = float(s.uniform(1)[0]) * 0.3
            grid_ok &= np.array_equal(build_geometric(ps, r).edges, build_geometric_grid(ps, r).edges)
    checks["grid/naive equivalence"] = grid_ok

    coupling = True
    for t in range(100):
        s = Stream(derive_seed(SEED, 10, 6), t)
        ps = sample_uniform(3 + t % 30, 1 + t % 3, s)
        radii = s.uniform(20) * math.sqrt(ps.dim)
        for prop in PROPERTIES.values():
            r_star = critical_radius_sample(prop, ps)
            coupling &= all(prop(build_geometric(ps, r)) == (r >= r_star) for r in radii)
    checks["coupling predicate <=> r >= r*"] = coupling

    failed = [k for k, v in checks.items() if not v]
    detail = f"{len(checks) - len(failed)}/{len(checks)} sub-checks pass"
    if failed:
        detail += "; failing: " + ", ".join(failed)
    assert record(10, not failed, detail, t0)


CLI_COMMANDS = [
    ["bottleneck", "--n", "64", "--d", "2", "--trials", "6", "--method", "exact"],
    ["threshold", "--property", "connectivity", "--n", "256", "--d", "2", "--eps", "0.1", "--trials", "40"],
    ["scaling", "--experiment", "matching", "--d", "3", "--n-list", "64,128", "--trials", "8",
     "--method", "constructive"],
    ["scaling", "--experiment", "width", "--property", "mindeg-quarter", "--d", "1",
     "--n-list", "32,64,128", "--trials", "40"],
    ["containment", "--n", "48", "--d", "2", "--r-over-rc", "1", "--trials", "12", "--pilot-trials", "20"],
    ["bernoulli", "--n", "6", "--p", "0.3", "--P", "0.6", "--trials", "2000"],
    ["dump-graph", "--n", "50", "--d", "2", "--r", "0.2"],
]


def test_criterion_11_cli_determinism(tmp_path, capsys):
    t0 = time.perf_counter()
    differing = []
    for k, argv in enumerate(CLI_COMMANDS):
        outputs = []
        for jobs in (1, 2):
            path = tmp_path / f"{k}-{jobs}.csv"
            flag = "--out" if argv[0] == "dump-graph" else "--csv"
            code = cli_main(argv + ["--seed", "5", "--jobs", str(jobs), flag, str(path)])
            assert code == 0
            outputs.append(path.read_bytes())
        if outputs[0] != outputs[1]:
            differing.append(argv[0])
    capsys.readouterr()
    ok = not differing
    assert record(11, ok, f"{len(CLI_COMMANDS)} commands x jobs 1/2, differing: {differing or 'none'}", t0)
