"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``PASS``/``FAIL`` line (visible with ``pytest -s``
and in the terminal summary of ``pytest -v``).
"""

import math
import time

import numpy as np
import pytest

from teq import channels as ch
from teq import cli
from teq import oracle as orc
from teq.bounds import (
    OptimizerConfig,
    cascade_analysis,
    channel_bounds,
    exact_class_c,
    lower_bound,
    representation_bounds,
    upper_bound,
)
from teq.linalg import random_unitary
from teq.measure import MuWeights, TeurParams, mu_norm, teur_min_time
from teq.single_vector import f_max, f_sum_lower, f_sum_upper

ORACLE_BUDGET = orc.OracleBudget(restarts=8, max_evals=2000)
SINGLE_BUDGET = orc.OracleBudget(restarts=4, max_evals=1500)


@pytest.fixture
def report(capsys):
    def emit(number: int, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")

    return emit


def depol_closed_form(n: int, q: float) -> float:
    return math.acos(math.sqrt(q + (1 - q) / n**2))


def test_criterion_1_depolarizing_exact_value(report):
    start = time.perf_counter()
    worst = {"exact": 0.0, "upper": 0.0, "lower": 0.0}
    for n in (2, 3, 4):
        for q in (-0.1, 0.0, 0.25, 0.5, 0.75, 0.9, 0.99):
            q = max(q, -1 / (n**2 - 1))
            c = ch.depolarizing_quantum(n, q)
            target = depol_closed_form(n, q)
            worst["exact"] = max(worst["exact"], abs(exact_class_c(c) - target))
            worst["upper"] = max(worst["upper"], abs(upper_bound(c, "max").value - target))
            worst["lower"] = max(worst["lower"], abs(lower_bound(c, "max").value - target))
    elapsed = time.perf_counter() - start
    ok = worst["exact"] <= 1e-12 and worst["upper"] <= 1e-9 and worst["lower"] <= 1e-5 and elapsed < 60
    report(1, ok, f"max errors exact={worst['exact']:.2e} upper={worst['upper']:.2e} "
                  f"lower={worst['lower']:.2e}, {elapsed:.1f}s")
    assert worst["exact"] <= 1e-12
    assert worst["upper"] <= 1e-9
    assert worst["lower"] <= 1e-5
    assert elapsed < 60


def test_criterion_2_oracle_sandwich(report):
    start = time.perf_counter()
    cases = orc.oracle_suite(seed=2024, trials=20, budget=ORACLE_BUDGET)
    broken = [case.label for case in cases if not case.holds]
    known = [
        ("depolarizing(2, 0.9)", ch.depolarizing_quantum(2, 0.9), 0.9 + 0.1 / 4, 4),
        ("depolarizing(2, 0.5)", ch.depolarizing_quantum(2, 0.5), 0.5 + 0.5 / 4, 4),
        ("bitflip(0.2)", ch.bitflip(0.2), 0.8, 3),
        ("phaseflip(0.35)", ch.phaseflip(0.35), 0.65, 3),
    ]
    known_err = 0.0
    for label, c, p, d_prime in known:
        value = orc.brute_channel(c, "max", d_prime, ORACLE_BUDGET, seed=1).value
        err = abs(value - math.acos(math.sqrt(p)))
        known_err = max(known_err, err)
        if err > 1e-4:
            broken.append(label)
    elapsed = time.perf_counter() - start
    ok = not broken and elapsed < 300
    report(2, ok, f"{len(cases)} random sandwiches, closed-form error {known_err:.2e}, "
                  f"violations {broken or 'none'}, {elapsed:.1f}s")
    assert not broken
    assert elapsed < 300


def test_criterion_3_single_vector_exactness(report):
    rng = np.random.default_rng(3)
    err_max, err_sum = 0.0, 0.0
    for t in range(100):
        dim = 2 + t % 3
        a, b = ch.random_pure_state(dim, rng), ch.random_pure_state(dim, rng)
        w = np.vdot(a, b)
        brute_max = orc.brute_single_vector(a, b, "max", SINGLE_BUDGET, seed=t).value
        brute_sum = orc.brute_single_vector(a, b, "sum", SINGLE_BUDGET, seed=t).value
        err_max = max(err_max, abs(brute_max - f_max(w)))
        outside = max(f_sum_lower(w) - brute_sum, brute_sum - f_sum_upper(w), 0.0)
        err_sum = max(err_sum, outside)
    ok = err_max <= 1e-5 and err_sum <= 1e-6
    report(3, ok, f"100 pairs, max-flavor error {err_max:.2e}, sum-flavor interval excess {err_sum:.2e}")
    assert err_max <= 1e-5
    assert err_sum <= 1e-6


def erasure_ratio(n: int, delta: float) -> float:
    args = cli.build_parser().parse_args(["erasure-compare", "--n", str(n), "--delta", repr(delta)])
    return cli.cmd_erasure_compare(args).results["ratio"]


def test_criterion_4_erasure_ratio(report):
    ratio = erasure_ratio(2, 1e-4)
    worst = max(abs(erasure_ratio(n, 0.0) - math.sqrt((n + 1) / n)) for n in range(2, 9))
    small = max(abs(erasure_ratio(n, 1e-6) - math.sqrt((n + 1) / n)) for n in range(2, 9))
    ok = abs(ratio - math.sqrt(1.5)) <= 1e-3 and worst <= 1e-3 and small <= 1e-3
    report(4, ok, f"n=2 ratio {ratio:.6f} vs {math.sqrt(1.5):.6f}, n=2..8 limit deviation {worst:.2e}, "
                  f"delta=1e-6 deviation {small:.2e}")
    assert abs(ratio - math.sqrt(1.5)) <= 1e-3
    assert worst <= 1e-3
    assert small <= 1e-3


def test_criterion_5_cascade_scaling(report):
    rel = {}
    for k in (4, 9, 16):
        res = cascade_analysis(2, 0.999, k)
        rel[k] = abs(res.ratio - math.sqrt(k)) / math.sqrt(k)
    noisy = cascade_analysis(2, 0.5, 4)
    noisy_dev = abs(noisy.ratio - noisy.sqrt_k) / noisy.sqrt_k
    ok = max(rel.values()) <= 0.02 and noisy_dev > 0.05 and not noisy.small_noise
    report(5, ok, "relative deviation " + ", ".join(f"k={k}: {v:.2e}" for k, v in rel.items())
                  + f"; q=0.5 deviation {noisy_dev:.1%}, small_noise={noisy.small_noise}")
    assert max(rel.values()) <= 0.02
    assert noisy_dev > 0.05
    assert not noisy.small_noise


def test_criterion_6_lemma_suites(report):
    start = time.perf_counter()
    reports = [
        orc.check_polygon_reduction(seed=6, trials=1000),
        orc.check_chord_min_angle(seed=6, trials=1000),
        orc.check_appendix_identity(seed=6, trials=1000),
    ]
    elapsed = time.perf_counter() - start
    ok = all(r.passed and r.trials == 1000 for r in reports) and elapsed < 60
    report(6, ok, ", ".join(f"{r.name}: {r.violations} violations (max residual {r.max_residual:.1e})"
                            for r in reports) + f", {elapsed:.1f}s")
    for r in reports:
        assert r.trials == 1000
        assert r.violations == 0, r.failures
    assert elapsed < 60


def _triangle_excess(rng) -> float:
    worst = -np.inf
    for t in range(1000):
        dim = 2 + t % 4
        u, v = random_unitary(dim, rng), random_unitary(dim, rng)
        for mu in (MuWeights.max(dim), MuWeights.sum(dim), MuWeights(tuple(np.sort(rng.random(dim))[::-1]))):
            worst = max(worst, mu_norm(u @ v, mu) - mu_norm(u, mu) - mu_norm(v, mu))
    return worst


def _conjugation_gap(rng, opt) -> float:
    worst = 0.0
    for _ in range(20):
        c = ch.random_channel(2, 2, rng)
        base_rep = np.array(representation_bounds(c, "max"))
        base = channel_bounds(c, "max", opt)
        for _ in range(5):
            q = random_unitary(2, rng)
            rep = np.array(representation_bounds(ch.conjugate_first(c, q), "max"))
            worst = max(worst, np.max(np.abs(rep - base_rep)))
        q = random_unitary(2, rng)
        moved = channel_bounds(ch.conjugate_all(c, q), "max", opt)
        worst = max(worst, abs(moved.lower - base.lower), abs(moved.upper - base.upper))
    return worst


def _reconstruction_residual(rng, opt) -> float:
    worst = 0.0
    chans = [ch.random_channel(2, 2, rng), ch.random_channel(3, 2, rng), ch.depolarizing_quantum(2, 0.7),
             ch.noisy_classical(3, 0.4)]
    for c in chans:
        ext = channel_bounds(c, "max", opt).extension
        for _ in range(20):
            rho = ch.random_density_matrix(c.n, rng)
            worst = max(worst, np.max(np.abs(ext.apply(rho) - c.apply(rho))))
    return worst


def _padding_gap(rng, opt) -> float:
    worst = 0.0
    for c in (ch.random_channel(2, 2, rng), ch.depolarizing_quantum(2, 0.6), ch.bitflip(0.3)):
        base = channel_bounds(c, "max", opt)
        padded = channel_bounds(c.padded(c.d + 2), "max", opt)
        worst = max(worst, abs(base.lower - padded.lower), abs(base.upper - padded.upper))
    return worst


def test_criterion_7_structural_properties(report):
    rng = np.random.default_rng(7)
    opt = OptimizerConfig(restarts=16, max_evals=2000, seed=7)
    triangle = _triangle_excess(rng)
    conj = _conjugation_gap(rng, opt)
    recon = _reconstruction_residual(rng, opt)
    pad = _padding_gap(rng, opt)
    ok = triangle <= 1e-9 and conj <= 1e-5 and recon < 1e-9 and pad <= 1e-5
    report(7, ok, f"triangle excess {triangle:.1e}, conjugation gap {conj:.1e}, "
                  f"reconstruction residual {recon:.1e}, padding gap {pad:.1e}")
    assert triangle <= 1e-9
    assert conj <= 1e-5
    assert recon < 1e-9
    assert pad <= 1e-5


TEUR_CASES = [
    # epsilon, A, hbar, energies, amplitudes, hand-computed time
    (0.25, 0.725, 1.0, [1.0], [1.0], 0.5 / 0.725),
    (0.0, 1.0, 1.0, [1.0, -3.0], [np.sqrt(0.5), np.sqrt(0.5)], 0.5),
    (0.81, 0.5, 2.0, [2.0, 0.0, 4.0], [0.6, 0.8j, 0.0], 0.4 / 0.72),
    (1.0, 0.725, 1.0, [5.0], [1.0], 0.0),
]


def test_criterion_8_teur_formula(report):
    worst = 0.0
    for eps, a_const, hbar, energies, amps, expected in TEUR_CASES:
        got = teur_min_time(TeurParams(eps, a_const, hbar), energies, amps)
        worst = max(worst, abs(got - expected))
    ok = worst <= 1e-12
    report(8, ok, f"{len(TEUR_CASES)} hand cases, max error {worst:.1e}")
    assert worst <= 1e-12
