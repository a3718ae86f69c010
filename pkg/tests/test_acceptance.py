"""Acceptance criteria, each at its stated tolerance.

Every test records one ``PASS``/``FAIL`` line; the lines are printed as they
happen and again in the terminal summary.
"""
import itertools
import json
import math
import os
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from ppt import cli
from ppt.concentration import TargetSet, br_experiment, convex_distance_cA, convex_distance_dA_direct
from ppt.concentration import edge_kernel, two_set_experiment
from ppt.config import Configuration, PointConfiguration, check_monotone_convex
from ppt.ground import AlphaFamily, CostFunction
from ppt.inequalities import _random_density, gaussian_talagrand_experiment, verify_base_dembo
from ppt.inequalities import verify_marton_process
from ppt.logsob import lemma_Rc_bound, verify_logsob_Rc
from ppt.processes import (ConfigurationSpaceIndex, binomial_law, chain_rule_check, entropy_wrt, law_tv,
                           mixed_binomial_law, poisson_law, thin_law)
from ppt.transport import assignment_cost, marton_cost, weak_transport


def record(n: int, title: str, ok: bool, detail: str):
    line = f"{'PASS' if ok else 'FAIL'} criterion {n:2d}: {title} ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def _brute_assignment(C):
    n = C.shape[0]
    return min(sum(C[i, p[i]] for i in range(n)) for p in itertools.permutations(range(n)))


def _random_metric(rng, k):
    X = rng.uniform(size=(k, 2))
    return np.sqrt(((X[:, None] - X[None]) ** 2).sum(-1))


def test_c01_assignment_vs_brute_force():
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    worst = 0.0
    for i in range(200):
        n = int(rng.integers(0, 8))
        if i % 2 == 0:
            D = _random_metric(rng, 5)
            xi = Configuration.from_points(rng.integers(0, 5, n), 5)
            chi = Configuration.from_points(rng.integers(0, 5, n), 5)
            C = D[np.ix_(xi.expand(), chi.expand())]
            val, _ = assignment_cost(D, xi, chi)
        else:
            omega = CostFunction.squared_distance() if i % 4 == 1 else CostFunction.distance_power(1.0)
            xi = PointConfiguration.from_array(rng.uniform(size=(n, 2)))
            chi = PointConfiguration.from_array(rng.uniform(size=(n, 2)))
            C = omega.between(xi.expand(), chi.expand())
            val, _ = assignment_cost(omega, xi, chi)
        ref = _brute_assignment(C) if n else 0.0
        worst = max(worst, abs(val - ref))
    dt = time.perf_counter() - t0
    record(1, "assignment equals brute force", worst <= 1e-9 and dt < 30,
           f"max |diff| {worst:.2e}, {dt:.1f}s")


def test_c02_marton_closed_form_vs_solver():
    rng = np.random.default_rng(2)
    sq = AlphaFamily.square()
    worst, fails = 0.0, 0
    for _ in range(500):
        k = int(rng.integers(1, 6))
        g = np.full(k, 1.0 / k)
        nu1, nu2 = _random_density(g, rng), _random_density(g, rng)
        w, _ = weak_transport(sq, 1.0 - np.eye(k), nu2, nu1)
        d = abs(marton_cost(nu1, nu2) - w)
        worst = max(worst, d)
        fails += d > 1e-5
    record(2, "Marton closed form equals weak solver", fails == 0, f"{fails} failures, max diff {worst:.2e}")


def test_c03_binomial_vs_poisson_entropy():
    errs = []
    for n in range(4):
        idx = ConfigurationSpaceIndex(2, max(n, 1))
        mu = [0.3, 0.7]
        h = entropy_wrt(binomial_law(mu, n, idx), poisson_law(mu, idx))
        errs.append(abs(h + math.log(math.exp(-1) / math.factorial(n))))
    record(3, "H(B_mu,n | Pi_mu) = 1 + log n!", max(errs) <= 1e-9, f"max error {max(errs):.2e}")


def test_c04_dembo_base_inequality():
    rng = np.random.default_rng(4)
    grid = [round(0.1 * j, 1) for j in range(1, 10)]
    t0 = time.perf_counter()
    viol = 0
    worst = np.inf
    for i in range(1000):
        k = int(rng.integers(1, 6))
        gamma = rng.dirichlet(np.ones(k))
        nu1, nu2 = _random_density(gamma, rng), _random_density(gamma, rng)
        rep = verify_base_dembo(gamma, nu1, nu2, grid[i % 9])
        viol += rep.violated
        worst = min(worst, rep.margin)
    dt = time.perf_counter() - t0
    record(4, "universal base inequality", viol == 0 and dt < 300,
           f"{viol} violations, min margin {worst:.2e}, {dt:.1f}s")


def test_c05_process_inequality():
    rng = np.random.default_rng(5)
    idx = ConfigurationSpaceIndex(2, 3)
    poisson = poisson_law([0.5, 0.5], idx)
    binom = binomial_law([0.4, 0.6], 3, idx)
    t0 = time.perf_counter()
    viol, n, worst = 0, 0, np.inf
    for t in (0.25, 0.5, 0.75):
        for i, j in itertools.product(range(len(idx)), repeat=2):
            P1 = np.zeros(len(idx))
            P2 = np.zeros(len(idx))
            P1[i], P2[j] = 1.0, 1.0
            rep = verify_marton_process(poisson, P1, P2, t)
            viol += rep.violated
            n += 1
            worst = min(worst, rep.margin)
        for r in range(200):
            law = poisson if r % 2 == 0 else binom
            P1 = _random_density(law.probs, rng)
            P2 = _random_density(law.probs, rng)
            rep = verify_marton_process(law, P1, P2, t)
            viol += rep.violated
            n += 1
            worst = min(worst, rep.margin)
    dt = time.perf_counter() - t0
    record(5, "universal process inequality", viol == 0 and dt < 600,
           f"{viol} violations in {n} checks, min margin {worst:.2e}, {dt:.1f}s")


def test_c06_chain_rule():
    rng = np.random.default_rng(6)
    idx = ConfigurationSpaceIndex(2, 3)
    worst = 0.0
    for _ in range(100):
        B = mixed_binomial_law(rng.dirichlet([1, 1]), rng.dirichlet(np.ones(4)), idx)
        Pi = B.with_probs(_random_density(B.probs, rng))
        worst = max(worst, chain_rule_check(Pi, B).error)
    record(6, "entropy chain rule", worst <= 1e-9, f"max error {worst:.2e}")


def test_c07_thinning_convergence():
    mu = [0.3, 0.7]
    tvs = []
    for n in (5, 10, 20, 40):
        idx = ConfigurationSpaceIndex(2, n)
        tvs.append(law_tv(thin_law(binomial_law(mu, n, idx), 1.0 / n), poisson_law(mu, idx)))
    ok = all(a > b for a, b in zip(tvs, tvs[1:])) and tvs[-1] < 0.02
    record(7, "thinning converges to Poisson", ok, "TV " + ", ".join(f"{v:.4f}" for v in tvs))


def test_c08_convex_distance_identity():
    rng = np.random.default_rng(8)
    worst = 0.0
    half = AlphaFamily.half_square()
    for _ in range(100):
        k = int(rng.integers(2, 5))
        xi = Configuration(tuple(rng.integers(0, 4, k)))
        if xi.mass == 0:
            xi = xi.add_point(0)
        size = int(rng.integers(1, 6))
        members = {Configuration(tuple(rng.integers(0, 4, k))) for _ in range(size)}
        A = TargetSet(tuple(sorted(members, key=lambda c: c.counts)))
        c, _ = convex_distance_cA(xi, A, half)
        d = convex_distance_dA_direct(xi, A)
        rel = abs(c - d * d / 2) / max(c, d * d / 2, 1e-12) if max(c, d) > 1e-9 else 0.0
        worst = max(worst, rel)
    record(8, "c_A = d_A^2 / 2 by two solvers", worst <= 1e-3, f"max relative diff {worst:.2e}")


def test_c09_two_set_bounds():
    law = poisson_law([0.5, 0.5], ConfigurationSpaceIndex(2, 4))
    viol, n = 0, 0
    for level in range(4):
        A = TargetSet.mass_sublevel(law.index, level)
        for t in (0.25, 0.5, 0.75):
            rows, _ = two_set_experiment(law, A, t, [0.25, 0.5, 1, 2])
            viol += sum(r.violated for r in rows)
            n += len(rows)
    record(9, "two-set concentration bounds", viol == 0, f"{viol} violations in {n} rows")


def test_c10_u_statistic_deviation():
    t0 = time.perf_counter()
    rep = br_experiment(edge_kernel(0.2), 20.0, [[0, 1], [0, 1]], delta=16.0, beta=1.5, n_samples=10_000, seed=10)
    dt = time.perf_counter() - t0
    ok = rep.hypothesis_holds and not rep.violated and dt < 300
    record(10, "U-statistic deviation bounds", ok,
           f"hypothesis ratio {rep.max_condition_ratio:.3f}, median {rep.median:g}, {dt:.1f}s")


def test_c11_log_sobolev_Rc():
    rng = np.random.default_rng(11)
    law = poisson_law([0.5, 0.5], ConfigurationSpaceIndex(2, 4))
    viol, worst = 0, np.inf
    for _ in range(50):
        f = rng.uniform(-2, 2, len(law.index))
        for lam in (0.25, 0.5, 0.75):
            rep = verify_logsob_Rc(law, f, lam)
            viol += rep.violated
            worst = min(worst, rep.margin)
    record(11, "modified log-Sobolev with R_c", viol == 0, f"{viol} violations, min margin {worst:.3f}")


def test_c12_lemma_bound():
    rng = np.random.default_rng(12)
    idx = ConfigurationSpaceIndex(3, 3)
    worst, shape_ok = np.inf, True
    for _ in range(20):
        F = cli._lemma_function(3, rng)
        rep = check_monotone_convex(F, idx.configs)
        shape_ok &= rep.nondecreasing and rep.convex
        for xi in idx.configs:
            if xi.is_simple() and xi.mass > 0:
                lhs, rhs, _ = lemma_Rc_bound(F, xi, idx)
                worst = min(worst, rhs - lhs)
    record(12, "F - R_c F <= sum alpha_1^*(D^- F)", shape_ok and worst >= -1e-5,
           f"min slack {worst:.2e}, shape verified {shape_ok}")


def test_c13_gaussian_talagrand_lift():
    reps = gaussian_talagrand_experiment(range(-2, 3), range(1, 6), a=2)
    bad = [r for r in reps if r.violated]
    example = bad[0].name if bad else "none"
    record(13, "Gaussian lift n(m1-m2)^2 <= n(m1^2+m2^2)", not bad,
           f"{len(bad)} of {len(reps)} grid points violated, e.g. {example}")


SMALL_CONFIGS = [
    {"kind": "transport", "params": {"k": 4, "n_pairs": 5, "ground": "random_metric", "alpha": "dembo", "t": 0.3}},
    {"kind": "laws", "params": {"k": 2, "N": 3, "law": "poisson", "nu": [0.5, 0.5], "n_checks": 5,
                                "thinning_ns": [5]}},
    {"kind": "verify-dembo", "params": {"k_max": 4, "n_instances": 20}},
    {"kind": "verify-marton", "params": {"k": 2, "N": 2, "t": 0.5, "n_pairs": 5}},
    {"kind": "verify-talagrand", "params": {"mode": "finite", "k": 2, "N": 2, "n_pairs": 5}},
    {"kind": "concentration", "params": {"mode": "u_statistic", "radius": 0.2, "intensity": 20, "delta": 16,
                                         "beta": 1.5, "n_samples": 300}},
    {"kind": "concentration", "params": {"mode": "two_set", "k": 2, "N": 3, "level": 1}},
    {"kind": "logsob", "params": {"mode": "Rc", "k": 1, "N": 3, "n_functions": 3}},
    {"kind": "logsob", "params": {"mode": "monotone", "intensity": 1, "n_samples": 200}},
]


def test_c14_cli_determinism(tmp_path):
    cfg = tmp_path / "batch.json"
    cfg.write_text(json.dumps({"seed": 14, "experiments": SMALL_CONFIGS}))
    outs = []
    for run, jobs in enumerate((1, 1, 2)):
        out = tmp_path / f"run{run}"
        status = cli.main(["run", str(cfg), "--out", str(out), "--jobs", str(jobs)])
        assert status == 0
        outs.append({f: (out / f).read_bytes() for f in sorted(os.listdir(out)) if f.endswith(".csv")})
    ok = outs[0] == outs[1] == outs[2] and len(outs[0]) == len(SMALL_CONFIGS)
    record(14, "CLI reruns are byte-identical", ok, f"{len(outs[0])} CSV files, jobs 1/1/2")
