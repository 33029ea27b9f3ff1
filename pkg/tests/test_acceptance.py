"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``PASS``/``FAIL criterion k: ...`` line before
asserting, so the summary is visible in ``pytest -v`` output.
"""

import math
import time

import numpy as np
import pytest

from depbound import (
    Cauchy,
    DiscreteUniform,
    Pareto,
    center_interval,
    crew_schedule_bound,
    crew_schedule_search,
    dual_bound,
    ks_critical_value,
    ra_interval,
    ra_run,
    upper_quantile_bound,
)
from depbound.convolution import NOT_CERTIFIED
from depbound.rearrangement import MAX_MIN, brute_force_max_min, brute_force_min_max
from depbound.structures import approximation_interval, build_candidate, build_suboptimal_beta, improve_suboptimal

from conftest import CREW, TRIPLES
from test_applications import KS_REFERENCE


@pytest.fixture
def report(capsys):
    def emit(k, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {k}: {detail}")
        assert ok, detail

    return emit


def test_criterion_01_discrete_counterexample(report):
    start = time.perf_counter()
    res = upper_quantile_bound([DiscreteUniform((1, 2, 3))] * 3, 0.0)
    identity = np.array([[1, 1, 1], [2, 2, 2], [3, 3, 3]], dtype=float)
    ra, _ = ra_run(identity, MAX_MIN)
    elapsed = time.perf_counter() - start
    ok = res.value == 6.0 and res.beta == (1.0, 0.0, 0.0, 0.0) and (ra.lower, ra.upper) == (5.0, 5.0) and elapsed < 1
    report(1, ok, f"bound={res.value} beta={res.beta} ra=[{ra.lower}, {ra.upper}] {elapsed:.2f}s")


def test_criterion_02_non_sharpness(report):
    start = time.perf_counter()
    res = upper_quantile_bound([DiscreteUniform((-1, 1))] * 3, 0.0)
    brute = brute_force_max_min([[-1, 1]] * 3)
    elapsed = time.perf_counter() - start
    ok = res.value == 0.0 and brute == -1.0 and elapsed < 1
    report(2, ok, f"bound={res.value} brute_force={brute} {elapsed:.2f}s")


def test_criterion_03_twenty_pareto(report):
    start = time.perf_counter()
    ms = [Pareto(1, 2 + i) for i in range(1, 21)]
    bound = upper_quantile_bound(ms, 0.0).value
    ra = ra_interval(ms, N=10_000)
    elapsed = time.perf_counter() - start
    ok = (
        abs(bound - 22.6911) <= 5e-4
        and ra.lower <= bound
        and bound - ra.lower <= 5e-3
        and elapsed < 60
    )
    report(3, ok, f"bound={bound:.6f} (target 22.6911) ra=[{ra.lower:.6f}, {ra.upper:.6f}] {elapsed:.1f}s")


TRIPLE_REFERENCE = {
    "bound": (4.2857, 8.5936, 3.2545, 7.634),
    "candidate": (4.2855, 8.4995, 3.2545, 7.5415),
    "beta": (4.0739, 7.7835, 3.0587, 7.2889),
    "gamma": (4.1185, 8.055, 3.1254, 7.3653),
    "mean": (5.1487, math.inf, 4.1065, 9.1487),
}


def test_criterion_04_heterogeneous_triples(report):
    start = time.perf_counter()
    got = {k: [] for k in TRIPLE_REFERENCE}
    for ms in TRIPLES:
        res = upper_quantile_bound(ms, 0.0)
        got["bound"].append(res.value)
        got["candidate"].append(build_candidate(ms, res.weights).guaranteed_infimum)
        got["beta"].append(build_suboptimal_beta(ms, res.weights).guaranteed_infimum)
        got["gamma"].append(improve_suboptimal(ms)[1])
        got["mean"].append(sum(m.mean() if m.mean_finite else math.inf for m in ms))
    elapsed = time.perf_counter() - start
    bad = []
    for key, targets in TRIPLE_REFERENCE.items():
        for j, (want, have) in enumerate(zip(targets, got[key])):
            if math.isinf(want):
                if have != want:
                    bad.append(f"{key}[{j}]={have}")
            elif abs(have - want) > max(2e-3, 5e-4 * abs(want)):
                bad.append(f"{key}[{j}]={have:.5f} vs {want}")
    ok = not bad and elapsed < 120
    detail = "; ".join(f"{k}=" + ",".join(f"{v:.4f}" for v in vals) for k, vals in got.items())
    report(4, ok, f"{detail} {elapsed:.1f}s" + (f" mismatches: {bad}" if bad else ""))


def test_criterion_05_dual_equivalence(report):
    start = time.perf_counter()
    battery = [(ms, 0.0) for ms in TRIPLES] + [([Pareto(1, 0.5)] * 3, t) for t in (0.5, 0.9, 0.99)]
    worst = 0.0
    for ms, t in battery:
        conv = upper_quantile_bound(ms, t).value
        dual = dual_bound(ms, t).value
        worst = max(worst, abs(dual - conv) / (1 + abs(conv)))
    elapsed = time.perf_counter() - start
    report(5, worst <= 1e-3 and elapsed < 120, f"max scaled gap {worst:.2e} over {len(battery)} cases {elapsed:.1f}s")


def test_criterion_06_crew_scheduling(report):
    start = time.perf_counter()
    value, weights = crew_schedule_bound(CREW)
    result = crew_schedule_search(CREW, restarts=8)
    dice = np.array([[1, 1, 1], [2, 2, 2], [3, 3, 3]], dtype=float)
    dice_bound, _ = crew_schedule_bound(dice)
    dice_search = crew_schedule_search(dice, restarts=8)
    dice_opt = brute_force_min_max(list(dice.T))
    elapsed = time.perf_counter() - start
    ok = (
        value == pytest.approx(160.0)
        and np.allclose(weights.beta, (0, 0.2, 0.6, 0.2))
        and result.makespan == 160.0
        and result.optimal_certified
        and dice_opt == 6.0
        and dice_search.makespan == 6.0
        and dice_bound == 6.0
        and elapsed < 10
    )
    report(
        6,
        ok,
        f"crew bound={value} beta={tuple(round(b, 4) for b in weights.beta)} makespan={result.makespan} "
        f"certified={result.optimal_certified} exhaustive_crew={brute_force_min_max(list(CREW.T))}; "
        f"dice bound={dice_bound} search={dice_search.makespan} exhaustive={dice_opt} {elapsed:.1f}s",
    )


def test_criterion_07_ks_critical_values(report):
    start = time.perf_counter()
    worst = 0.0
    for (M, gamma), want in KS_REFERENCE.items():
        worst = max(worst, abs(ks_critical_value(5, M, gamma) - want))
    elapsed = time.perf_counter() - start
    report(7, worst <= 5e-3 and elapsed < 30, f"max abs error {worst:.2e} over {len(KS_REFERENCE)} entries {elapsed:.1f}s")


def test_criterion_08_cauchy_centers(report):
    start = time.perf_counter()
    c = center_interval([Cauchy(0, 1)] * 3)
    v = 3 * math.log(2) / math.pi
    elapsed = time.perf_counter() - start
    ok = abs(c.low + v) <= 1e-4 and abs(c.high - v) <= 1e-4 and elapsed < 30
    report(8, ok, f"[{c.low:.7f}, {c.high:.7f}] vs +-{v:.7f} {elapsed:.1f}s")


def test_criterion_09_property_suite(report):
    start = time.perf_counter()
    code = pytest.main(["-q", "-p", "no:cacheprovider", __file__.replace("test_acceptance.py", "test_properties.py")])
    elapsed = time.perf_counter() - start
    report(9, code == 0 and elapsed < 300, f"property suite exit code {int(code)} {elapsed:.1f}s")


def test_criterion_10_brute_force_oracle(report):
    start = time.perf_counter()
    rng = np.random.default_rng(20240101)
    violations, equal_checks = [], 0
    for k in range(25):
        n = int(rng.integers(1, 4))
        m = int(rng.integers(1, 5))
        cols = [tuple(float(v) for v in rng.integers(-6, 7, size=m)) for _ in range(n)]
        res = upper_quantile_bound([DiscreteUniform(c) for c in cols], 0.0)
        brute = brute_force_max_min(cols)
        if brute > res.value + 1e-9:
            violations.append(f"#{k} brute {brute} > bound {res.value}")
        if res.sharpness != NOT_CERTIFIED:
            equal_checks += 1
            if abs(brute - res.value) > 1e-9:
                violations.append(f"#{k} {res.sharpness} but brute {brute} != bound {res.value}")
    elapsed = time.perf_counter() - start
    ok = not violations and elapsed < 60
    report(10, ok, f"25 instances, {equal_checks} certified equalities checked {elapsed:.1f}s {violations}")
