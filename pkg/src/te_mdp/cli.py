"""Command-line front end: ``te-mdp compile|solve|sweep|export-marginals|eval``.

Exit codes: 0 success, 2 input error, 3 solver did not converge,
4 satisfaction threshold infeasible.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .analysis import agent_marginals
from .dfa import DfaError
from .io import (
    FileFormatError,
    check_policy_matches,
    load_product,
    read_policy,
    read_scenario,
    report_to_dict,
    save_product,
    scenario_key,
    write_policy,
    write_report,
)
from .ltl import LtlSyntaxError
from .mdp import MdpError
from .product import ProductError, value_iteration_reach
from .scenarios import ScenarioError
from .solver import InfeasibleError, LN2, expected_cost, forward_pass, solve, solve_constrained, sweep, transfer_entropy

EXIT_OK, EXIT_INPUT, EXIT_NOT_CONVERGED, EXIT_INFEASIBLE = 0, 2, 3, 4

log = logging.getLogger("te_mdp")


def _product(sc, cache: str | None):
    """Product MDP for a scenario, reusing a compiled cache when it matches."""
    if cache:
        pm = load_product(cache, scenario_key(sc))
        if pm is not None:
            mdp = sc.labeled_mdp()
            return replace(pm, mdp=mdp)
    return sc.product()


def _scenario(args):
    sc = read_scenario(args.scenario, renorm=getattr(args, "renormalize", False))
    beta = getattr(args, "beta", None)
    target = getattr(args, "target_prob", None)
    if beta is not None:
        sc.beta, sc.target_prob = beta, None
    elif target is not None:
        sc.beta, sc.target_prob = None, target
    return sc


def _overrides(args):
    return {"memory": getattr(args, "memory", None), "seed": getattr(args, "seed", None),
            "max_iters": getattr(args, "max_iters", None)}


def cmd_compile(args) -> int:
    sc = _scenario(args)
    mdp = sc.labeled_mdp()
    pm = sc.product()
    print(f"scenario: {sc.name}")
    print(f"formula: {sc.formula}")
    print(f"|X| = {mdp.n_states} (expensive {mdp.states.n_expensive} x free {mdp.states.n_free})")
    print(f"|U| = {mdp.n_actions}")
    print(f"|S| = {pm.dfa.n_states} (accepting {sorted(pm.dfa.accepting)})")
    print(f"|V| = {pm.n_states} after pruning (|Acc_M| = {int(pm.accepting.sum())})")
    out = args.out or str(Path(args.scenario).with_suffix(".product.npz"))
    save_product(pm, out, scenario_key(sc))
    print(f"product cached in {out}")
    return EXIT_OK


def cmd_solve(args) -> int:
    sc = _scenario(args)
    pm = _product(sc, args.product_cache)
    meta = {"scenario": sc.name, "formula": sc.formula, "memory": None, "seed": None}
    if sc.target_prob is not None:
        cfg = sc.config(**_overrides(args))
        q, beta, rep = solve_constrained(pm, sc.target_prob, cfg)
        meta["target_prob"] = sc.target_prob
    else:
        cfg = sc.config(**_overrides(args))
        q, rep = solve(pm, cfg)
    meta.update({"memory": cfg.memory, "seed": cfg.seed, "horizon": cfg.T})
    write_policy(args.out, pm, q, rep, meta)
    report_path = args.report or str(Path(args.out).with_suffix(".report.json"))
    write_report(report_path, rep)
    print(json.dumps({k: v for k, v in report_to_dict(rep).items() if k != "objective_trace"}, indent=1))
    return EXIT_OK if rep.converged else EXIT_NOT_CONVERGED


def _beta_grid(args):
    if args.betas:
        return [float(b) for b in args.betas.split(",")]
    return list(np.logspace(np.log10(args.beta_min), np.log10(args.beta_max), args.points))


def cmd_sweep(args) -> int:
    sc = _scenario(args)
    pm = _product(sc, args.product_cache)
    betas = _beta_grid(args)
    reports = sweep(pm, betas, sc.config(**_overrides(args)), warm_start=not args.cold)
    ok = all(rep.converged for rep in reports)
    rows = [[b, rep.transfer_entropy_bits, rep.transfer_entropy, rep.failure_probability, rep.objective,
             rep.iterations, int(rep.converged)] for b, rep in zip(betas, reports)]
    header = ["beta", "te_bits", "te_nats", "failure_probability", "objective", "iterations", "converged"]
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([repr(x) if isinstance(x, float) else x for x in r])
    finally:
        if args.out:
            fh.close()
    return EXIT_OK if ok else EXIT_NOT_CONVERGED


def cmd_export_marginals(args) -> int:
    sc = _scenario(args)
    pm = _product(sc, args.product_cache)
    q, d = read_policy(args.policy)
    check_policy_matches(pm, q, d, sc.horizon)
    times = [int(t) for t in args.times.split(",")] if args.times else list(range(q.T + 1))
    bad = [t for t in times if not 0 <= t <= q.T]
    if bad:
        raise FileFormatError(f"times {bad} outside 0..{q.T}", "--times")
    P = agent_marginals(pm, q)
    grid = sc.grid
    free_names = pm.mdp.states.free_states
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(fh)
        w.writerow(["t", "cell", "cell_x", "cell_y", "probability"])
        for t in times:
            for f, name in enumerate(free_names):
                if grid is not None:
                    row, col = grid.rc(f)
                    w.writerow([t, name, col, row, repr(float(P[t, f]))])
                else:
                    w.writerow([t, name, "", "", repr(float(P[t, f]))])
    finally:
        if args.out:
            fh.close()
    return EXIT_OK


def cmd_eval(args) -> int:
    sc = _scenario(args)
    pm = _product(sc, args.product_cache)
    q, d = read_policy(args.policy)
    check_policy_matches(pm, q, d, sc.horizon)
    beta = sc.beta if sc.beta is not None else d["meta"].get("beta", 0.0)
    mu, nu = forward_pass(pm, q)
    J = expected_cost(pm, mu, q)
    te = transfer_entropy(pm, mu, nu, q)
    h, _ = value_iteration_reach(pm, q.T)
    out = {
        "beta": beta,
        "objective": J + beta * te,
        "expected_cost": J,
        "failure_probability": 1.0 - (-J + (1.0 if pm.accepting[pm.initial] else 0.0)),
        "optimal_failure_probability": 1.0 - float(h[q.T, pm.initial]),
        "transfer_entropy_nats": te,
        "transfer_entropy_bits": te / LN2,
    }
    print(json.dumps(out, indent=1))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="te-mdp", description="Transfer-entropy-regularized policy synthesis for co-safe LTL missions.")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, solver=True):
        sp.add_argument("--scenario", required=True, help="scenario JSON file")
        sp.add_argument("--renormalize", action="store_true", help="rescale kernel rows off by at most 1e-9")
        sp.add_argument("--product-cache", help="compiled product from 'te-mdp compile'")
        if solver:
            g = sp.add_mutually_exclusive_group()
            g.add_argument("--beta", type=float, help="information weight (overrides the scenario)")
            g.add_argument("--target-prob", type=float, help="satisfaction threshold D (overrides the scenario)")
            sp.add_argument("--memory", type=int, help="action-history length n")
            sp.add_argument("--seed", type=int)
            sp.add_argument("--max-iters", type=int)

    c = sub.add_parser("compile", help="build the product MDP and print its size")
    c.add_argument("--scenario", required=True)
    c.add_argument("--renormalize", action="store_true")
    c.add_argument("--out", help="cache file (default: <scenario>.product.npz)")
    c.set_defaults(func=cmd_compile)

    s = sub.add_parser("solve", help="synthesize a policy")
    common(s)
    s.add_argument("--out", required=True, help="policy JSON file")
    s.add_argument("--report", help="report JSON file (default: <out>.report.json)")
    s.set_defaults(func=cmd_solve)

    w = sub.add_parser("sweep", help="trade-off table over a grid of beta values")
    common(w)
    w.add_argument("--betas", help="comma-separated beta values")
    w.add_argument("--beta-min", type=float, default=0.1)
    w.add_argument("--beta-max", type=float, default=100.0)
    w.add_argument("--points", type=int, default=10)
    w.add_argument("--cold", action="store_true", help="solve every beta from the initial guess instead of warm-starting")
    w.add_argument("--out", help="CSV file (default: stdout)")
    w.set_defaults(func=cmd_sweep)

    e = sub.add_parser("export-marginals", help="agent-cell distributions of a policy")
    common(e, solver=False)
    e.add_argument("--policy", required=True)
    e.add_argument("--times", help="comma-separated time steps (default: all)")
    e.add_argument("--out", help="CSV file (default: stdout)")
    e.set_defaults(func=cmd_export_marginals)

    v = sub.add_parser("eval", help="evaluate a stored policy")
    common(v)
    v.add_argument("--policy", required=True)
    v.set_defaults(func=cmd_eval)
    return p


INPUT_ERRORS = (FileFormatError, LtlSyntaxError, DfaError, MdpError, ProductError, ScenarioError, OSError)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * args.verbose, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InfeasibleError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except INPUT_ERRORS as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
