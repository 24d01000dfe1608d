"""JSON scenario, policy and report files, plus a cache for compiled products.

Floats are written with Python's shortest round-trip representation, so
reading a file back reproduces every number exactly.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from . import __version__
from .dfa import to_dfa
from .mdp import LabeledMdp, StateSpace, renormalize, validate
from .product import ProductMdp, build_product
from .scenarios import GridSpec, MovingObstacle, ScenarioError, build
from .solver import PolicyTable, SolveReport, SolverConfig

POLICY_FORMAT = "te-mdp-policy"
SCENARIO_KEYS = {"name", "grid", "mdp", "formula", "horizon", "beta", "target_prob", "solver"}
SOLVER_KEYS = {f.name for f in fields(SolverConfig)} - {"beta", "T"}


class FileFormatError(ValueError):
    """Malformed input file; ``where`` names the offending field or line."""

    def __init__(self, message: str, where: str = ""):
        self.where = where
        super().__init__(f"{where}: {message}" if where else message)


@dataclass
class Scenario:
    formula: str
    horizon: int
    grid: GridSpec | None = None
    mdp: LabeledMdp | None = None
    beta: float | None = None
    target_prob: float | None = None
    solver: dict = field(default_factory=dict)
    name: str = "scenario"

    def __post_init__(self):
        if (self.grid is None) == (self.mdp is None):
            raise FileFormatError("exactly one of 'grid' and 'mdp' is required")
        if (self.beta is None) == (self.target_prob is None):
            raise FileFormatError("exactly one of 'beta' and 'target_prob' is required")

    def labeled_mdp(self) -> LabeledMdp:
        return build(self.grid) if self.grid is not None else self.mdp

    def product(self) -> ProductMdp:
        mdp = self.labeled_mdp()
        return build_product(mdp, to_dfa(self.formula, mdp.atomic_props))

    def config(self, **overrides) -> SolverConfig:
        kw = dict(self.solver)
        kw.setdefault("beta", self.beta if self.beta is not None else 1.0)
        kw.update({k: v for k, v in overrides.items() if v is not None})
        return SolverConfig(T=self.horizon, **kw)


# --------------------------------------------------------------------------
# low-level helpers


def _dump(obj) -> str:
    return json.dumps(obj, indent=1, allow_nan=False) + "\n"


def _load_json(path) -> dict:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise FileFormatError(e.msg, f"{path}: line {e.lineno}, column {e.colno}") from None
    if not isinstance(data, dict):
        raise FileFormatError("top level must be an object", str(path))
    return data


def _get(d: dict, key: str, where: str, kind=None, default=...):
    if key not in d:
        if default is ...:
            raise FileFormatError("missing field", f"{where}.{key}" if where else key)
        return default
    val = d[key]
    if val is None and default is not ...:
        return default
    if kind is not None and not isinstance(val, kind) or isinstance(val, bool) and kind in (int, float, (int, float)):
        raise FileFormatError(f"expected {_kind_name(kind)}, got {type(val).__name__}", f"{where}.{key}" if where else key)
    return val


def _kind_name(kind):
    if isinstance(kind, tuple):
        return " or ".join(k.__name__ for k in kind)
    return kind.__name__


# --------------------------------------------------------------------------
# scenarios


def _grid_from_dict(g: dict) -> GridSpec:
    w = "grid"
    mo = None
    if g.get("moving_obstacle") is not None:
        m = g["moving_obstacle"]
        mo = MovingObstacle(
            tuple(_get(m, "cells", f"{w}.moving_obstacle", list)),
            _get(m, "start", f"{w}.moving_obstacle", int),
            float(_get(m, "stay", f"{w}.moving_obstacle", (int, float), 0.5)),
            _get(m, "law", f"{w}.moving_obstacle", list, None),
        )
    try:
        return GridSpec(
            width=_get(g, "width", w, int),
            height=_get(g, "height", w, int),
            static_obstacles=frozenset(_get(g, "static_obstacles", w, list, [])),
            goal_cells=frozenset(_get(g, "goal_cells", w, list)),
            agent_start=_get(g, "agent_start", w, int),
            slip=float(_get(g, "slip", w, (int, float), 0.1)),
            moving_obstacle=mo,
            uncertain_cells=tuple(tuple(x) for x in _get(g, "uncertain_cells", w, list, [])),
            scout_range=_get(g, "scout_range", w, int, 2),
            absorbing_goal=_get(g, "absorbing_goal", w, bool, True),
            absorbing_obstacles=_get(g, "absorbing_obstacles", w, bool, True),
            max_uncertain=_get(g, "max_uncertain", w, int, 4),
        )
    except ScenarioError as e:
        raise FileFormatError(str(e), w) from None


def _grid_to_dict(g: GridSpec) -> dict:
    d = {
        "width": g.width,
        "height": g.height,
        "static_obstacles": sorted(g.static_obstacles),
        "goal_cells": sorted(g.goal_cells),
        "agent_start": g.agent_start,
        "slip": g.slip,
        "uncertain_cells": [[c, o] for c, o in g.uncertain_cells],
        "scout_range": g.scout_range,
        "absorbing_goal": g.absorbing_goal,
        "absorbing_obstacles": g.absorbing_obstacles,
        "max_uncertain": g.max_uncertain,
    }
    if g.moving_obstacle is not None:
        mo = g.moving_obstacle
        d["moving_obstacle"] = {
            "cells": list(mo.cells),
            "start": mo.start,
            "stay": mo.stay,
            "law": None if mo.law is None else [list(r) for r in mo.law],
        }
    return d


def _mdp_from_dict(m: dict, renorm: bool) -> LabeledMdp:
    w = "mdp"
    states = StateSpace(tuple(_get(m, "expensive_states", w, list)), tuple(_get(m, "free_states", w, list)))
    actions = tuple(_get(m, "actions", w, list))
    p = np.array(_get(m, "transition", w, list), dtype=float)
    names = states.names()
    labels_raw = _get(m, "labels", w, dict, {})
    unknown = set(labels_raw) - set(names)
    if unknown:
        raise FileFormatError(f"unknown states {sorted(unknown)}", f"{w}.labels")
    labeling = tuple(frozenset(labels_raw.get(n, [])) for n in names)
    init = _get(m, "initial", w, str)
    if init not in names:
        raise FileFormatError(f"unknown state {init!r}", f"{w}.initial")
    try:
        mdp = LabeledMdp(states, actions, p, tuple(_get(m, "atomic_props", w, list)), labeling, names.index(init))
    except ValueError as e:
        raise FileFormatError(str(e), f"{w}.transition") from None
    if renorm:
        mdp = renormalize(mdp)
    problems = validate(mdp)
    if problems:
        raise FileFormatError("; ".join(problems), f"{w}.transition")
    return mdp


def _mdp_to_dict(mdp: LabeledMdp) -> dict:
    names = mdp.states.names()
    return {
        "expensive_states": list(mdp.states.expensive_states),
        "free_states": list(mdp.states.free_states),
        "actions": list(mdp.actions),
        "transition": mdp.transition.tolist(),
        "atomic_props": list(mdp.atomic_props),
        "labels": {n: sorted(l) for n, l in zip(names, mdp.labeling) if l},
        "initial": names[mdp.initial],
    }


def scenario_from_dict(d: dict, renorm: bool = False) -> Scenario:
    extra = set(d) - SCENARIO_KEYS
    if extra:
        raise FileFormatError(f"unknown fields {sorted(extra)}")
    solver = _get(d, "solver", "", dict, {})
    bad = set(solver) - SOLVER_KEYS
    if bad:
        raise FileFormatError(f"unknown solver settings {sorted(bad)}", "solver")
    grid = mdp = None
    if "grid" in d:
        grid = _grid_from_dict(_get(d, "grid", "", dict))
    if "mdp" in d:
        mdp = _mdp_from_dict(_get(d, "mdp", "", dict), renorm)
    beta = _get(d, "beta", "", (int, float), None)
    target = _get(d, "target_prob", "", (int, float), None)
    horizon = _get(d, "horizon", "", int)
    try:
        sc = Scenario(
            formula=_get(d, "formula", "", str),
            horizon=horizon,
            grid=grid,
            mdp=mdp,
            beta=None if beta is None else float(beta),
            target_prob=None if target is None else float(target),
            solver=dict(solver),
            name=_get(d, "name", "", str, "scenario"),
        )
        sc.config()
    except (TypeError, ValueError) as e:
        if isinstance(e, FileFormatError):
            raise
        raise FileFormatError(str(e), "solver") from None
    return sc


def scenario_to_dict(sc: Scenario) -> dict:
    d = {"name": sc.name, "formula": sc.formula, "horizon": sc.horizon}
    if sc.grid is not None:
        d["grid"] = _grid_to_dict(sc.grid)
    else:
        d["mdp"] = _mdp_to_dict(sc.mdp)
    if sc.beta is not None:
        d["beta"] = sc.beta
    else:
        d["target_prob"] = sc.target_prob
    d["solver"] = dict(sc.solver)
    return d


def read_scenario(path, renorm: bool = False) -> Scenario:
    return scenario_from_dict(_load_json(path), renorm)


def write_scenario(sc: Scenario, path):
    Path(path).write_text(_dump(scenario_to_dict(sc)))


# --------------------------------------------------------------------------
# policies and reports


def policy_to_dict(pm: ProductMdp, q: PolicyTable, report: SolveReport | None = None, meta: dict | None = None) -> dict:
    d = {
        "format": POLICY_FORMAT,
        "version": __version__,
        "states": list(pm.names),
        "actions": list(pm.actions),
        "memory": q.memory,
        "T": q.T,
        "tables": [t.tolist() for t in q.tables],
        "meta": dict(meta or {}),
    }
    if report is not None:
        d["meta"].update(
            {
                "beta": report.beta,
                "objective": report.objective,
                "transfer_entropy_nats": report.transfer_entropy,
                "transfer_entropy_bits": report.transfer_entropy_bits,
                "failure_probability": report.failure_probability,
                "iterations": report.iterations,
                "converged": report.converged,
            }
        )
    return d


def policy_from_dict(d: dict) -> tuple[PolicyTable, dict]:
    if d.get("format") != POLICY_FORMAT:
        raise FileFormatError(f"not a policy file (format {d.get('format')!r})", "format")
    tables = [np.array(t, dtype=float) for t in _get(d, "tables", "", list)]
    memory = _get(d, "memory", "", int)
    if len(tables) != _get(d, "T", "", int):
        raise FileFormatError("number of tables differs from T", "tables")
    for t, tab in enumerate(tables):
        if tab.ndim != 3 or tab.shape[0] != len(d["states"]) or tab.shape[2] != len(d["actions"]):
            raise FileFormatError(f"table has shape {tab.shape}", f"tables[{t}]")
        err = np.abs(tab.sum(axis=2) - 1.0).max()
        if err > 1e-8 or (tab < 0).any():
            raise FileFormatError(f"rows are not distributions (sum error {err:.3g})", f"tables[{t}]")
    return PolicyTable(tables, memory), d


def write_policy(path, pm, q, report=None, meta=None):
    Path(path).write_text(_dump(policy_to_dict(pm, q, report, meta)))


def read_policy(path) -> tuple[PolicyTable, dict]:
    return policy_from_dict(_load_json(path))


def check_policy_matches(pm: ProductMdp, q: PolicyTable, d: dict, T: int | None = None):
    if list(d["states"]) != list(pm.names) or list(d["actions"]) != list(pm.actions):
        raise FileFormatError("policy states/actions do not match the scenario's product MDP", "states")
    if T is not None and q.T != T:
        raise FileFormatError(f"policy horizon {q.T} differs from scenario horizon {T}", "T")


def report_to_dict(report: SolveReport) -> dict:
    return {
        "beta": report.beta,
        "objective_trace": list(report.objective_trace),
        "transfer_entropy_nats": report.transfer_entropy,
        "transfer_entropy_bits": report.transfer_entropy_bits,
        "expected_cost": report.expected_cost,
        "failure_probability": report.failure_probability,
        "iterations": report.iterations,
        "converged": report.converged,
    }


def write_report(path, report: SolveReport, extra: dict | None = None):
    d = report_to_dict(report)
    d.update(extra or {})
    Path(path).write_text(_dump(d))


# --------------------------------------------------------------------------
# product cache


def scenario_key(sc: Scenario) -> str:
    d = scenario_to_dict(sc)
    core = {k: d[k] for k in ("formula", "grid", "mdp") if k in d}
    return hashlib.sha256(json.dumps(core, sort_keys=True).encode()).hexdigest()


def save_product(pm: ProductMdp, path, key: str = ""):
    arrays = {
        "accepting": pm.accepting,
        "expensive": pm.expensive,
        "free": pm.free,
        "mdp_state": pm.mdp_state if pm.mdp_state is not None else np.zeros(0, np.int64),
        "dfa_state": pm.dfa_state if pm.dfa_state is not None else np.zeros(0, np.int64),
        "meta": np.array(json.dumps({
            "key": key,
            "initial": pm.initial,
            "actions": list(pm.actions),
            "names": list(pm.names),
            "n_expensive": pm.n_expensive,
            "n_free": pm.n_free,
        })),
    }
    for u, k in enumerate(pm.kernel):
        k = k.tocsr()
        arrays[f"k{u}_data"], arrays[f"k{u}_indices"], arrays[f"k{u}_indptr"] = k.data, k.indices, k.indptr
    with open(path, "wb") as fh:
        np.savez_compressed(fh, **arrays)


def load_product(path, key: str | None = None) -> ProductMdp | None:
    """Cached product, or None when the file is missing or was built from another scenario."""
    try:
        z = np.load(path)
    except (OSError, ValueError):
        return None
    meta = json.loads(str(z["meta"]))
    if key is not None and meta["key"] != key:
        return None
    n = len(z["accepting"])
    kernel = tuple(
        sp.csr_matrix((z[f"k{u}_data"], z[f"k{u}_indices"], z[f"k{u}_indptr"]), shape=(n, n))
        for u in range(len(meta["actions"]))
    )
    opt = {k: (z[k] if len(z[k]) else None) for k in ("mdp_state", "dfa_state")}
    return ProductMdp(
        kernel=kernel,
        accepting=z["accepting"],
        expensive=z["expensive"],
        free=z["free"],
        initial=meta["initial"],
        actions=tuple(meta["actions"]),
        names=tuple(meta["names"]),
        n_expensive=meta["n_expensive"],
        n_free=meta["n_free"],
        **opt,
    )
