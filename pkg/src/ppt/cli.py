"""Batch experiment harness: ``ppt run`` and ``ppt validate``.

A config is one experiment object ``{"kind", "params", "name"?, "seed"?}``
or a batch ``{"seed"?, "experiments": [...]}``.  Every instance draws its
randomness from ``numpy.random.default_rng([seed, experiment_index, instance])``
so results do not depend on ``--jobs``.

Exit status: 0 clean, 1 inequality violations, 2 config error (nothing
written), 3 solver failure.
"""
from __future__ import annotations

import argparse
import copy
import csv
import functools
import hashlib
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Optional

import jsonschema
import numpy as np

from ._solver import SolverError

# ---------------------------------------------------------------------------
# Schema

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_int1 = {"type": "integer", "minimum": 1}
_prob = {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 1}
_unit = {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1}
_box = {"type": "array", "items": {"type": "array", "items": _num, "minItems": 2, "maxItems": 2}, "minItems": 1}


def _obj(props: dict, required=()) -> dict:
    return {"type": "object", "properties": props, "required": list(required), "additionalProperties": False}


PARAMS = {
    "transport": _obj({"k": {"type": "integer", "minimum": 2, "maximum": 12}, "n_pairs": _int1,
                       "ground": {"enum": ["hamming", "random_metric"]},
                       "alpha": {"enum": ["square", "half_square", "dembo"]}, "t": _unit,
                       "tolerance": _pos}, ["k", "n_pairs"]),
    "laws": _obj({"k": {"type": "integer", "minimum": 1, "maximum": 6},
                  "N": {"type": "integer", "minimum": 0, "maximum": 8},
                  "law": {"enum": ["poisson", "binomial", "mixed_binomial"]},
                  "nu": _prob, "mu": _prob, "n": {"type": "integer", "minimum": 0}, "kappa": _prob,
                  "n_checks": {"type": "integer", "minimum": 0},
                  "thinning_ns": {"type": "array", "items": _int1}, "tolerance": _pos},
                 ["k", "N", "law"]),
    "verify-dembo": _obj({"k_max": {"type": "integer", "minimum": 2, "maximum": 8}, "n_instances": _int1,
                          "t_grid": {"type": "array", "items": _unit, "minItems": 1}, "tolerance": _pos},
                         ["n_instances"]),
    "verify-marton": _obj({"k": {"type": "integer", "minimum": 1, "maximum": 4},
                           "N": {"type": "integer", "minimum": 0, "maximum": 5},
                           "t": _unit, "n_pairs": _int1,
                           "reference": {"enum": ["poisson", "binomial"]},
                           "nu": _prob, "mu": _prob, "n": {"type": "integer", "minimum": 0},
                           "tolerance": _pos}, ["k", "N", "t", "n_pairs"]),
    "verify-talagrand": {"oneOf": [
        _obj({"mode": {"const": "finite"}, "k": {"type": "integer", "minimum": 1, "maximum": 4},
              "N": {"type": "integer", "minimum": 0, "maximum": 4}, "mu": _prob, "kappa": _prob,
              "n_pairs": _int1, "certificate_samples": _int1, "inflation": {"type": "number", "minimum": 1},
              "metric": {"type": "array", "items": {"type": "array", "items": _num}},
              "tolerance": _pos}, ["mode", "k", "N", "n_pairs"]),
        _obj({"mode": {"const": "gaussian"},
              "m_grid": {"type": "array", "items": {"type": "integer"}, "minItems": 1},
              "n_grid": {"type": "array", "items": _int1, "minItems": 1},
              "a": _pos}, ["mode", "m_grid", "n_grid"]),
    ]},
    "concentration": {"oneOf": [
        _obj({"mode": {"const": "two_set"}, "k": {"type": "integer", "minimum": 1, "maximum": 3},
              "N": {"type": "integer", "minimum": 0, "maximum": 5}, "nu": _prob,
              "level": {"type": "integer", "minimum": 0}, "t": _unit,
              "r_grid": {"type": "array", "items": _pos, "minItems": 1}}, ["mode", "k", "N", "level"]),
        _obj({"mode": {"const": "u_statistic"}, "radius": _pos, "intensity": _pos, "box": _box,
              "delta": _pos, "beta": {"type": "number", "minimum": 0, "exclusiveMaximum": 2},
              "n_samples": _int1, "r_grid": {"type": "array", "items": _pos, "minItems": 1}},
             ["mode", "radius", "intensity", "delta", "beta", "n_samples"]),
    ]},
    "logsob": {"oneOf": [
        _obj({"mode": {"const": "Rc"}, "k": {"type": "integer", "minimum": 1, "maximum": 3},
              "N": {"type": "integer", "minimum": 0, "maximum": 5}, "nu": _prob,
              "lambdas": {"type": "array", "items": _unit, "minItems": 1},
              "n_functions": _int1, "bound": _pos, "tolerance": _pos}, ["mode", "k", "N", "n_functions"]),
        _obj({"mode": {"const": "lemma"}, "k": {"type": "integer", "minimum": 1, "maximum": 4},
              "N": {"type": "integer", "minimum": 1, "maximum": 4},
              "n_functions": _int1, "tolerance": _pos}, ["mode", "k", "N", "n_functions"]),
        _obj({"mode": {"const": "monotone"}, "intensity": _pos, "box": _box,
              "functional": {"enum": ["mass", "edge_count"]}, "radius": _pos,
              "lambdas": {"type": "array", "items": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
                          "minItems": 1},
              "n_samples": {"type": "integer", "minimum": 2}}, ["mode", "intensity", "n_samples"]),
    ]},
}

_seed = {"type": "integer", "minimum": 0, "maximum": 2 ** 64 - 1}
_name = {"type": "string", "pattern": "^[A-Za-z0-9_.-]+$"}

EXPERIMENT = {
    "type": "object",
    "properties": {"kind": {"enum": sorted(PARAMS)}, "name": _name, "seed": _seed, "params": {"type": "object"}},
    "required": ["kind", "params"],
    "additionalProperties": False,
    "allOf": [{"if": {"properties": {"kind": {"const": k}}}, "then": {"properties": {"params": s}}}
              for k, s in PARAMS.items()],
}

SCHEMA = {
    "oneOf": [
        EXPERIMENT,
        {"type": "object", "properties": {"seed": _seed, "experiments": {"type": "array", "items": EXPERIMENT,
                                                                        "minItems": 1}},
         "required": ["experiments"], "additionalProperties": False},
    ]
}


class ConfigError(ValueError):
    pass


def _check_semantics(exp: dict):
    p = exp["params"]
    for key in ("nu", "mu", "kappa"):
        if key in p and sum(p[key]) <= 0:
            raise ConfigError(f"{exp['kind']}: '{key}' has no mass")
    for key in ("mu",):
        if key in p and abs(sum(p[key]) - 1) > 1e-9:
            raise ConfigError(f"{exp['kind']}: 'mu' must be a probability vector")
    if "kappa" in p and abs(sum(p["kappa"]) - 1) > 1e-9:
        raise ConfigError(f"{exp['kind']}: 'kappa' must be a probability vector")
    for key in ("nu", "mu"):
        if key in p and "k" in p and len(p[key]) != p["k"]:
            raise ConfigError(f"{exp['kind']}: '{key}' must have length k={p['k']}")
    if exp["kind"] == "laws":
        need = {"poisson": "nu", "binomial": "mu", "mixed_binomial": "mu"}[p["law"]]
        if need not in p:
            raise ConfigError(f"laws: law '{p['law']}' needs '{need}'")
        if p["law"] == "binomial" and "n" not in p:
            raise ConfigError("laws: binomial law needs 'n'")
        if p["law"] == "mixed_binomial" and "kappa" not in p:
            raise ConfigError("laws: mixed_binomial law needs 'kappa'")
    if exp["kind"] in ("laws", "verify-marton") or p.get("mode") in ("two_set", "Rc"):
        try:
            _law(_params_key({k: v for k, v in p.items() if k in ("k", "N", "nu", "mu", "n", "kappa", "law",
                                                                     "reference")}))
        except ValueError as err:
            raise ConfigError(f"{exp['kind']}: {err}") from err
    if exp["kind"] == "verify-talagrand" and p["mode"] == "finite" and "metric" in p:
        M = np.asarray(p["metric"], dtype=float)
        if M.shape != (p["k"], p["k"]) or np.any(M < 0) or np.any(np.diag(M) != 0) or not np.allclose(M, M.T):
            raise ConfigError("verify-talagrand: metric must be a symmetric kxk matrix with zero diagonal")


def load_config(path: str) -> dict:
    """Parse, schema-validate and normalise a config into batch form."""
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as err:
        raise ConfigError(f"cannot read config: {err}") from err
    try:
        jsonschema.validate(cfg, SCHEMA)
    except jsonschema.ValidationError as err:
        # oneOf hides the useful message; report the deepest sub-error
        best = jsonschema.exceptions.best_match([err] + list(err.context or []))
        raise ConfigError(f"schema error: {best.message} at {list(best.absolute_path)}") from err
    batch = cfg if "experiments" in cfg else {"seed": cfg.get("seed", 0), "experiments": [cfg]}
    names = []
    for j, exp in enumerate(batch["experiments"]):
        exp.setdefault("name", exp["kind"] if len(batch["experiments"]) == 1 else f"{j:02d}_{exp['kind']}")
        names.append(exp["name"])
        _check_semantics(exp)
    if len(set(names)) != len(names):
        raise ConfigError("experiment names must be unique")
    return batch


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()).hexdigest()


# ---------------------------------------------------------------------------
# Experiment kinds: n_instances(params) and instance(params, rng, i) -> list of rows


def _params_key(params: dict) -> str:
    return json.dumps(params, sort_keys=True)


@functools.lru_cache(maxsize=32)
def _law(key: str):
    from .processes import ConfigurationSpaceIndex, binomial_law, mixed_binomial_law, poisson_law
    p = json.loads(key)
    idx = ConfigurationSpaceIndex(p["k"], p["N"])
    law = p.get("law", p.get("reference", "poisson"))
    if law == "poisson":
        return poisson_law(p.get("nu", [1.0 / p["k"]] * p["k"]), idx)
    if law == "binomial":
        return binomial_law(p.get("mu", [1.0 / p["k"]] * p["k"]), p.get("n", p["N"]), idx)
    return mixed_binomial_law(p["mu"], p["kappa"], idx)


def _random_law(law, rng):
    from .inequalities import _random_density
    return law.with_probs(_random_density(law.probs, rng))


def _transport_instance(p, rng, i):
    from .ground import AlphaFamily
    from .inequalities import _random_density
    from .transport import marton_cost, ot_lp, weak_transport
    k = p["k"]
    if p.get("ground", "hamming") == "hamming":
        rho = 1.0 - np.eye(k)
    else:
        X = rng.uniform(size=(k, 2))
        rho = np.sqrt(((X[:, None] - X[None]) ** 2).sum(-1))
    g = np.full(k, 1.0 / k)
    nu1, nu2 = _random_density(g, rng), _random_density(g, rng)
    a = p.get("alpha", "square")
    alpha = {"square": AlphaFamily.square(), "half_square": AlphaFamily.half_square()}.get(a)
    if alpha is None:
        alpha = AlphaFamily.dembo(p.get("t", 0.5))
    ot, _ = ot_lp(rho, nu1, nu2)
    wt, kern = weak_transport(alpha, rho, nu1, nu2)
    row = {"instance": i, "ot": ot, "weak": wt, "gap": kern.gap, "residual": kern.residual}
    violated = False
    if p.get("ground", "hamming") == "hamming" and a == "square":
        m = marton_cost(nu2, nu1)
        row["marton_closed_form"] = m
        violated = abs(m - wt) > p.get("tolerance", 1e-5)
    row["violated"] = violated
    return [row]


def _laws_n(p):
    return p.get("n_checks", 10) + len(p.get("thinning_ns", []))


def _laws_instance(p, rng, i):
    from .processes import ConfigurationSpaceIndex, binomial_law, chain_rule_check, law_tv, poisson_law, thin_law
    law = _law(_params_key(p))
    nc = p.get("n_checks", 10)
    if i < nc:
        rep = chain_rule_check(_random_law(law, rng), law, tol=p.get("tolerance", 1e-9))
        return [{"instance": i, "check": "chain_rule", "value": rep.lhs, "reference": rep.rhs,
                 "error": rep.error, "violated": not rep.ok}]
    # TV(thin(B_{mu,n}, 1/n), Pi_mu) on the enumeration up to mass n
    n = p["thinning_ns"][i - nc]
    mu = p.get("mu", [1.0 / p["k"]] * p["k"])
    idx = ConfigurationSpaceIndex(p["k"], n)
    tv = law_tv(thin_law(binomial_law(mu, n, idx), 1.0 / n), poisson_law(mu, idx))
    return [{"instance": i, "check": f"thinning_tv_n={n}", "value": tv, "reference": "", "error": "",
             "violated": False}]


def _dembo_instance(p, rng, i):
    from .inequalities import _random_density, verify_base_dembo
    k = int(rng.integers(2, p.get("k_max", 5) + 1))
    grid = p.get("t_grid", [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9])
    t = grid[i % len(grid)]
    gamma = rng.dirichlet(np.ones(k))
    nu1, nu2 = _random_density(gamma, rng), _random_density(gamma, rng)
    rep = verify_base_dembo(gamma, nu1, nu2, t, tol=p.get("tolerance", 1e-6))
    return [dict(instance=i, k=k, t=t, **rep.row())]


def _marton_instance(p, rng, i):
    from .inequalities import verify_marton_process
    law = _law(_params_key(p))
    rep = verify_marton_process(law, _random_law(law, rng), _random_law(law, rng), p["t"],
                                tol=p.get("tolerance", 1e-4))
    return [dict(instance=i, **rep.row())]


@functools.lru_cache(maxsize=8)
def _talagrand_setup(key: str):
    from .inequalities import estimated_certificate
    from .processes import ConfigurationSpaceIndex, mixed_binomial_law
    p = json.loads(key)
    k = p["k"]
    mu = p.get("mu", [1.0 / k] * k)
    kappa = p.get("kappa", [1.0 / (p["N"] + 1)] * (p["N"] + 1))
    rho = np.asarray(p["metric"], dtype=float) if "metric" in p else 1.0 - np.eye(k)
    # linear costs admit no universal certificate on a finite space, so the constant is estimated
    cert = estimated_certificate(np.asarray(mu), None, rho, samples=p.get("certificate_samples", 200), seed=0,
                                 inflation=p.get("inflation", 1.1))
    B = mixed_binomial_law(mu, kappa, ConfigurationSpaceIndex(k, p["N"]))
    return mu, kappa, cert, B


def _talagrand_n(p):
    if p["mode"] == "gaussian":
        return 1
    return p["n_pairs"]


def _talagrand_instance(p, rng, i):
    from .inequalities import _random_density, gaussian_talagrand_experiment, verify_talagrand_process
    if p["mode"] == "gaussian":
        reps = gaussian_talagrand_experiment(p["m_grid"], p["n_grid"], a=p.get("a", 2))
        return [dict(instance=j, **r.row(), exact_margin=r.diagnostics["exact_margin"]) for j, r in enumerate(reps)]
    mu, kappa, cert, B = _talagrand_setup(_params_key(p))
    P1 = _random_law(B, rng)
    # second law shares the mass law of the first so the transport is finite
    q = np.zeros_like(B.probs)
    for n in range(B.index.N + 1):
        s = B.index.slice(n)
        w = P1.probs[s].sum()
        if w > 0:
            d = _random_density(B.probs[s] / B.probs[s].sum(), rng)
            q[s] = w * d
    rep = verify_talagrand_process(cert, mu, kappa, P1, B.with_probs(q / q.sum()),
                                   tol=p.get("tolerance", 1e-6))
    row = dict(instance=i, **rep.row(), provenance=cert.provenance, a=cert.a1)
    # exceeding an estimated constant is evidence about the estimate, not a violation of a proved bound
    row["exceeds_estimate"] = row["violated"]
    row["violated"] = bool(row["violated"] and cert.certified)
    return [row]


def _concentration_n(p):
    return 1


def _concentration_instance(p, rng, i):
    from .concentration import TargetSet, br_experiment, edge_kernel, two_set_experiment
    if p["mode"] == "two_set":
        law = _law(_params_key({k: v for k, v in p.items() if k in ("k", "N", "nu")}))
        A = TargetSet.mass_sublevel(law.index, p["level"])
        rows, _ = two_set_experiment(law, A, p.get("t", 0.5), p.get("r_grid", [0.25, 0.5, 1, 2]))
        return [{"r": r.r, "p_A": r.p_A, "p_not_Ar": r.p_not_Ar, "cor_lhs": r.cor_lhs, "cor_bound": r.cor_bound,
                 "p_not_Ard": r.p_not_Ard, "thm_lhs": r.thm_lhs, "thm_bound": r.thm_bound,
                 "violated": r.violated} for r in rows]
    seed = int(rng.integers(2 ** 63))
    rep = br_experiment(edge_kernel(p["radius"]), p["intensity"], p.get("box", [[0, 1], [0, 1]]),
                        p["delta"], p["beta"], p["n_samples"], seed, r_grid=p.get("r_grid", (5, 10, 20)))
    out = []
    for row in rep.rows:
        out.append(dict(row, median=rep.median, median_ci_low=rep.median_ci[0], median_ci_high=rep.median_ci[1],
                        hypothesis_holds=rep.hypothesis_holds, max_condition_ratio=rep.max_condition_ratio))
    return out


def _logsob_n(p):
    return 1 if p["mode"] == "monotone" else p["n_functions"]


def _lemma_function(k: int, rng):
    a = rng.uniform(0, 1, k)
    B = rng.uniform(0, 0.5, (k, k))
    B = (B + B.T) / 2
    c = rng.uniform(0, 0.3)
    return lambda xi: float(a @ xi.counts + xi.counts @ B @ xi.counts + c * xi.mass ** 2)


def _logsob_instance(p, rng, i):
    from .logsob import lemma_Rc_bound, poisson_mass_series, verify_logsob_monotone
    from .logsob import verify_logsob_Rc
    from .processes import ConfigurationSpaceIndex
    if p["mode"] == "Rc":
        law = _law(_params_key({k: v for k, v in p.items() if k in ("k", "N", "nu")}))
        b = p.get("bound", 2.0)
        f = rng.uniform(-b, b, len(law.index))
        rows = []
        for lam in p.get("lambdas", [0.25, 0.5, 0.75]):
            rep = verify_logsob_Rc(law, f, lam, tol=p.get("tolerance", 1e-4))
            rows.append(dict(function=i, **{"lambda": lam}, **rep.row(),
                             ent_mean_product=rep.diagnostics["entropies"]["mean_product"],
                             ent_mean_log=rep.diagnostics["entropies"]["mean_log"]))
        return rows
    if p["mode"] == "lemma":
        idx = ConfigurationSpaceIndex(p["k"], p["N"])
        F = _lemma_function(p["k"], rng)
        worst, worst_xi, n = np.inf, None, 0
        for xi in idx.configs:
            if xi.is_simple and xi.mass > 0:
                lhs, rhs, gap = lemma_Rc_bound(F, xi, idx)
                n += 1
                if rhs - lhs < worst:
                    worst, worst_xi = rhs - lhs, xi
        tol = p.get("tolerance", 1e-5)
        return [{"function": i, "n_configurations": n, "worst_margin": worst,
                 "worst_configuration": " ".join(map(str, worst_xi.counts)), "tolerance": tol,
                 "violated": bool(worst < -tol)}]
    box = p.get("box", [[0, 1]])
    seed = int(rng.integers(2 ** 63))
    if p.get("functional", "mass") == "mass":
        F, D = (lambda X: float(X.shape[0])), (lambda X: np.ones(X.shape[0]))
    else:
        from .concentration import edge_kernel, pair_statistic
        kern = edge_kernel(p.get("radius", 0.2))
        F = lambda X: float(pair_statistic(X, kern)[0])
        D = lambda X: pair_statistic(X, kern)[1]
    vol = float(np.prod([hi - lo for lo, hi in box]))
    rows = []
    # the same sample set serves every lambda
    for lam in p.get("lambdas", [0.0, 0.5]):
        rep = verify_logsob_monotone(p["intensity"], box, F, lam, p["n_samples"], seed, diff=D)
        row = dict(**{"lambda": lam}, **rep.report.row(), lhs_ci_low=rep.lhs_ci[0], lhs_ci_high=rep.lhs_ci[1],
                   rhs_ci_low=rep.rhs_ci[0], rhs_ci_high=rep.rhs_ci[1], rhs_wu=rep.rhs_wu,
                   wu_smaller=rep.wu_smaller)
        if p.get("functional", "mass") == "mass":
            ent, rhs, _ = poisson_mass_series(p["intensity"] * vol, lam)
            row.update(oracle_lhs=ent, oracle_rhs=rhs)
        rows.append(row)
    return rows


KINDS = {
    "transport": (lambda p: p["n_pairs"], _transport_instance),
    "laws": (_laws_n, _laws_instance),
    "verify-dembo": (lambda p: p["n_instances"], _dembo_instance),
    "verify-marton": (lambda p: p["n_pairs"], _marton_instance),
    "verify-talagrand": (_talagrand_n, _talagrand_instance),
    "concentration": (_concentration_n, _concentration_instance),
    "logsob": (_logsob_n, _logsob_instance),
}


def _task(args):
    kind, params, seed, stream, i = args
    rng = np.random.default_rng([seed, stream, i])
    try:
        return {"rows": KINDS[kind][1](params, rng, i)}
    except SolverError as err:
        return {"solver_error": {"instance": i, "message": str(err), "best_value": err.best_value,
                                 "gap": err.gap, "residual": err.residual}}


# ---------------------------------------------------------------------------
# Output


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path: str, rows: list) -> None:
    cols = []
    for r in rows:
        for c in r:
            if c not in cols:
                cols.append(c)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([_fmt(r.get(c, "")) for c in cols])


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    return str(o)


def run(batch: dict, out: str, jobs: int = 1, seed: Optional[int] = None, config_sha: str = "") -> int:
    """Run a validated batch; write ``report.json`` and one CSV per experiment; return the exit status."""
    base = batch.get("seed", 0)
    tasks, owners = [], []
    for j, exp in enumerate(batch["experiments"]):
        s = exp.get("seed", base) if seed is None else seed
        n = KINDS[exp["kind"]][0](exp["params"])
        for i in range(n):
            tasks.append((exp["kind"], exp["params"], int(s), j, i))
            owners.append(j)
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_task, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        results = [_task(t) for t in tasks]
    os.makedirs(out, exist_ok=True)
    summary, status = [], 0
    for j, exp in enumerate(batch["experiments"]):
        mine = [r for r, o in zip(results, owners) if o == j]
        rows = [row for r in mine for row in r.get("rows", [])]
        errors = [r["solver_error"] for r in mine if "solver_error" in r]
        nviol = sum(bool(r.get("violated", False)) for r in rows)
        path = os.path.join(out, f"{exp['name']}.csv")
        write_csv(path, rows)
        summary.append({"name": exp["name"], "kind": exp["kind"], "params": exp["params"], "rows": len(rows),
                        "violations": nviol, "solver_errors": errors, "csv": os.path.basename(path)})
        if errors:
            status = 3
        elif nviol and status == 0:
            status = 1
    report = {"config_hash": config_sha or config_hash(batch), "seed": base if seed is None else seed, "status": status,
              "experiments": summary}
    with open(os.path.join(out, "report.json"), "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    return status


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="ppt", description="Point-process transport inequality experiments.")
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run an experiment config")
    r.add_argument("config")
    r.add_argument("--seed", type=int, default=None, help="override the config seed")
    r.add_argument("--out", default="ppt_out", help="output directory")
    r.add_argument("--jobs", type=int, default=1, help="worker processes")
    v = sub.add_parser("validate", help="validate a config without running it")
    v.add_argument("config")
    args = ap.parse_args(argv)
    try:
        batch = load_config(args.config)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    if args.command == "validate":
        print(f"ok: {len(batch['experiments'])} experiment(s)")
        return 0
    if args.seed is not None and not 0 <= args.seed < 2 ** 64:
        print("error: seed must be an unsigned 64-bit integer", file=sys.stderr)
        return 2
    sha = config_hash(copy.deepcopy(batch))
    status = run(batch, args.out, max(1, args.jobs), args.seed, sha)
    print(f"status {status}: see {os.path.join(args.out, 'report.json')}")
    return status


if __name__ == "__main__":
    sys.exit(main())
