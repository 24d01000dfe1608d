"""Transfer-entropy-regularized policy synthesis on product MDPs.

The decision variable is a time-varying randomized policy
``q_t(u | v, w)`` over product states ``v`` and action windows ``w``
(the last ``n`` actions).  The objective is

    J(q) + beta * TE(q),      J = E[sum_t c_t] = -P(reach Acc_M within T),

where TE is the transfer entropy from the expensive state factor to the
actions, causally conditioned on the free factor.  :func:`solve` runs the
forward-backward (Arimoto-Blahut type) iteration: a forward pass computes
the state-window distributions ``mu_t`` and the marginal policies
``nu_t``; a backward pass computes the soft cost-to-go ``rho_t``, the
partition functions ``phi_t`` and the Gibbs policy ``q_t``.

Array conventions (per time step ``t``, ``W_t = |U| ** min(n, t)``):

    mu[t]      (n_states, W_t)          for t = 0..T
    nu[t]      (n_free, W_t, n_actions)
    q[t]       (n_states, W_t, n_actions)
    rho[t]     (n_states, W_t, n_actions)
    log_phi[t] (n_states, W_t)          for t = 0..T, log_phi[T] = 0

Windows are encoded base ``|U|`` with the most recent action in the least
significant digit.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp
from scipy.special import logsumexp

from .product import ProductMdp, value_iteration_reach

log = logging.getLogger(__name__)

LN2 = math.log(2.0)
_TINY = 1e-290
_LOG_FLOOR = -700.0
_MAX_STEP = 1e3
_MAX_DROP = 10.0


class InfeasibleError(ValueError):
    def __init__(self, target: float, h_max: float):
        self.target = target
        self.h_max = h_max
        super().__init__(
            f"satisfaction threshold {target:.6g} exceeds the maximal reachability probability {h_max:.12g}"
        )


@dataclass(frozen=True)
class SolverConfig:
    beta: float = 1.0
    T: int = 10
    memory: int = 0
    max_iters: int = 500
    tol_objective: float = 1e-8
    tol_policy: float = 1e-6
    seed: int | None = None
    init: str = "uniform"  # or "dirichlet", "reach"
    # state-window pairs lighter than this are ignored by the policy-change test
    mass_floor: float = 1e-10
    accelerate: bool = True

    def __post_init__(self):
        if not self.beta >= 0 or not math.isfinite(self.beta):
            raise ValueError(f"beta must be finite and non-negative, got {self.beta}")
        if self.T < 1:
            raise ValueError(f"horizon T must be >= 1, got {self.T}")
        if self.memory < 0:
            raise ValueError(f"memory n must be >= 0, got {self.memory}")
        if self.init not in ("uniform", "dirichlet", "reach"):
            raise ValueError(f"unknown init {self.init!r}")


@dataclass
class PolicyTable:
    """Time-indexed randomized policy ``tables[t][v, w, u]``."""

    tables: list
    memory: int

    @property
    def T(self) -> int:
        return len(self.tables)

    @property
    def n_actions(self) -> int:
        return self.tables[0].shape[2]

    def __getitem__(self, t):
        return self.tables[t]

    def sup_diff(self, other: "PolicyTable") -> float:
        return max(float(np.max(np.abs(a - b))) for a, b in zip(self.tables, other.tables))

    def row_sum_error(self) -> float:
        return max(float(np.max(np.abs(q.sum(axis=2) - 1.0))) for q in self.tables)


@dataclass
class SolverState:
    mu: list
    nu: list
    rho: list
    log_phi: list
    q: PolicyTable


@dataclass
class SolveReport:
    beta: float
    objective_trace: list
    transfer_entropy: float  # nats
    expected_cost: float
    failure_probability: float
    iterations: int
    converged: bool
    state: SolverState | None = field(default=None, repr=False)

    @property
    def transfer_entropy_bits(self) -> float:
        return self.transfer_entropy / LN2

    @property
    def objective(self) -> float:
        return self.objective_trace[-1]


# --------------------------------------------------------------------------
# windows


def n_windows(n_actions: int, memory: int, t: int) -> int:
    return n_actions ** min(memory, t)


def shift_index(n_actions: int, memory: int, t: int) -> np.ndarray:
    """``shift[w, u]``: index at time t+1 of the window ``w`` extended by ``u``."""
    W = n_windows(n_actions, memory, t)
    w = np.arange(W)[:, None] * n_actions + np.arange(n_actions)[None, :]
    if t >= memory:
        w = w % n_windows(n_actions, memory, t + 1)
    return w


def window_actions(w: int, n_actions: int, memory: int, t: int) -> tuple[int, ...]:
    """Decode a window index into its actions, oldest first."""
    k = min(memory, t)
    out = []
    for _ in range(k):
        w, u = divmod(w, n_actions)
        out.append(u)
    return tuple(reversed(out))


# --------------------------------------------------------------------------
# policies


def uniform_policy(pm: ProductMdp, T: int, memory: int = 0) -> PolicyTable:
    m = pm.n_actions
    return PolicyTable(
        [np.full((pm.n_states, n_windows(m, memory, t), m), 1.0 / m) for t in range(T)], memory
    )


def random_policy(pm: ProductMdp, T: int, memory: int, rng: np.random.Generator, mix: float = 0.5) -> PolicyTable:
    """Uniform policy mixed with a Dirichlet(1) draw; ``mix`` is the Dirichlet weight."""
    m = pm.n_actions
    tables = []
    for t in range(T):
        shape = (pm.n_states, n_windows(m, memory, t))
        d = rng.dirichlet(np.ones(m), size=shape)
        tables.append((1 - mix) / m + mix * d)
    return PolicyTable(tables, memory)


def deterministic_policy(pm: ProductMdp, actions: np.ndarray, memory: int = 0) -> PolicyTable:
    """Expand ``actions[t, v]`` into a window-independent policy table."""
    T = actions.shape[0]
    m = pm.n_actions
    tables = []
    for t in range(T):
        q = np.zeros((pm.n_states, n_windows(m, memory, t), m))
        q[np.arange(pm.n_states), :, actions[t]] = 1.0
        tables.append(q)
    return PolicyTable(tables, memory)


def _context_matrix(pm: ProductMdp) -> sp.csr_matrix:
    n = pm.n_states
    return sp.csr_matrix((np.ones(n), (np.arange(n), pm.free)), shape=(n, pm.n_free))


# --------------------------------------------------------------------------
# forward pass and evaluators


def forward_pass(pm: ProductMdp, q: PolicyTable, cfg: SolverConfig | None = None):
    """State-window distributions ``mu`` and marginal policies ``nu``.

    ``mu[0]`` is the point mass at the initial product state with the empty
    window.  On free contexts of zero mass ``nu`` is uniform.
    """
    m = pm.n_actions
    n = q.memory
    G = _context_matrix(pm)
    GT = G.T.tocsr()
    mu0 = np.zeros((pm.n_states, 1))
    mu0[pm.initial, 0] = 1.0
    mu = [mu0]
    nu = []
    for t in range(q.T):
        qt = q[t]
        cur = mu[t]
        W = cur.shape[1]
        joint = cur[:, :, None] * qt  # (V, W, U)
        num = (GT @ joint.reshape(pm.n_states, W * m)).reshape(pm.n_free, W, m)
        mass = num.sum(axis=2, keepdims=True)
        # contexts carrying only subnormal mass count as unreached
        with np.errstate(invalid="ignore", divide="ignore", over="ignore", under="ignore"):
            nut = np.where(mass > _TINY, num / mass, 1.0 / m)
        nu.append(nut)

        shift = shift_index(m, n, t)
        nxt = np.zeros((pm.n_states, n_windows(m, n, t + 1)))
        for u in range(m):
            moved = pm.kernel[u].T @ joint[:, :, u]  # (V, W)
            np.add.at(nxt.T, shift[:, u], moved.T)
        mu.append(nxt)
    return mu, nu


def transfer_entropy(pm: ProductMdp, mu, nu, q: PolicyTable) -> float:
    """Truncated-history transfer entropy in nats (0 log 0 = 0).

    Exactly zero when the expensive factor is a singleton.
    """
    if pm.n_expensive == 1:
        return 0.0
    total = 0.0
    for t in range(q.T):
        qt = q[t]
        w = mu[t][:, :, None] * qt
        nut = nu[t][pm.free]
        pos = w > 0
        total += float(np.sum(w[pos] * (np.log(qt[pos]) - np.log(nut[pos]))))
    # rounding can leave a tiny negative sum for policies blind to x_bar
    return total if total > 0 else 0.0


def expected_cost(pm: ProductMdp, mu, q: PolicyTable) -> float:
    """E[sum_t c_t]: minus the probability of entering Acc_M within the horizon."""
    r = pm.expected_stage_cost()
    return float(sum(np.sum(mu[t][:, :, None] * q[t] * r[:, None, :]) for t in range(q.T)))


def failure_probability(pm: ProductMdp, mu, q: PolicyTable) -> float:
    reach = -expected_cost(pm, mu, q) + (1.0 if pm.accepting[pm.initial] else 0.0)
    return 1.0 - reach


def objective(pm: ProductMdp, q: PolicyTable, beta: float) -> tuple[float, float, float]:
    """(J + beta * TE, J, TE) for policy ``q``."""
    mu, nu = forward_pass(pm, q)
    J = expected_cost(pm, mu, q)
    te = transfer_entropy(pm, mu, nu, q)
    return J + beta * te, J, te


def state_marginals(mu) -> list[np.ndarray]:
    """Distribution over product states at each time (windows summed out)."""
    return [m.sum(axis=1) for m in mu]


# --------------------------------------------------------------------------
# backward pass


def backward_pass(pm: ProductMdp, nu, cfg: SolverConfig):
    """Soft cost-to-go, log partition functions and Gibbs policies for fixed ``nu``.

    Stage costs enter as ``c / beta``.  Returns ``(rho, log_phi, q)``.
    """
    if cfg.beta <= 0:
        raise ValueError("backward pass needs beta > 0; use value iteration for beta = 0")
    T = len(nu)
    m = pm.n_actions
    n = cfg.memory
    r = pm.expected_stage_cost() / cfg.beta
    log_phi = [None] * (T + 1)
    log_phi[T] = np.zeros((pm.n_states, n_windows(m, n, T)))
    rho = [None] * T
    tables = [None] * T
    for t in range(T - 1, -1, -1):
        shift = shift_index(m, n, t)
        nxt = log_phi[t + 1]
        W = shift.shape[0]
        rt = np.empty((pm.n_states, W, m))
        for u in range(m):
            rt[:, :, u] = r[:, u, None] - pm.kernel[u] @ nxt[:, shift[:, u]]
        with np.errstate(divide="ignore"):
            a = np.log(nu[t][pm.free]) - rt
        lp = logsumexp(a, axis=2)
        rho[t] = rt
        log_phi[t] = lp
        tables[t] = np.exp(a - lp[:, :, None])
    return rho, log_phi, PolicyTable(tables, n)


def static_gibbs(nu: np.ndarray, cost: np.ndarray, mu: np.ndarray | None = None) -> np.ndarray:
    """Minimizer of sum_x mu(x) sum_u q(u|x) (log q(u|x)/nu(u|x) + c(x, u)).

    ``nu`` is either a single prior over actions or one prior per context
    (``nu[x, u]``); ``cost[x, u]``.  The solution does not depend on
    ``mu`` (on its support), which is accepted only for shape checking.
    """
    cost = np.asarray(cost, dtype=float)
    nu = np.broadcast_to(np.asarray(nu, dtype=float), cost.shape)
    if mu is not None and np.shape(mu)[0] != cost.shape[0]:
        raise ValueError("mu and cost disagree on the number of contexts")
    with np.errstate(divide="ignore"):
        a = np.log(nu) - cost
    return np.exp(a - logsumexp(a, axis=-1, keepdims=True))


# --------------------------------------------------------------------------
# solvers


_REACH_MIX = 0.1


def _initial_policy(pm, cfg):
    if cfg.init == "dirichlet":
        return random_policy(pm, cfg.T, cfg.memory, np.random.default_rng(cfg.seed))
    if cfg.init == "reach":
        # value-iteration policy with every action kept alive
        _, actions = value_iteration_reach(pm, cfg.T)
        q = deterministic_policy(pm, actions, cfg.memory)
        m = pm.n_actions
        return PolicyTable([(1 - _REACH_MIX) * x + _REACH_MIX / m for x in q.tables], cfg.memory)
    return uniform_policy(pm, cfg.T, cfg.memory)


def _evaluate(pm, q, beta):
    mu, nu = forward_pass(pm, q)
    J = expected_cost(pm, mu, q)
    te = transfer_entropy(pm, mu, nu, q)
    return mu, nu, J, te


def _reach_policy(pm: ProductMdp, cfg: SolverConfig):
    h, actions = value_iteration_reach(pm, cfg.T)
    q = deterministic_policy(pm, actions, cfg.memory)
    mu, nu, J, te = _evaluate(pm, q, 0.0)
    state = SolverState(mu, nu, [], [], q)
    fail = 1.0 - (-J + (1.0 if pm.accepting[pm.initial] else 0.0))
    return q, SolveReport(0.0, [J], te, J, fail, 0, True, state)


@dataclass
class _Iterate:
    q: PolicyTable
    mu: list
    nu: list
    J: float
    te: float
    obj: float
    parent: tuple | None = None  # (rho, log_phi) of the backward pass that produced q


def _iterate(pm, q, beta) -> _Iterate:
    mu, nu, J, te = _evaluate(pm, q, beta)
    return _Iterate(q, mu, nu, J, te, J + beta * te)


def _log_nu(nu):
    with np.errstate(divide="ignore"):
        return [np.maximum(np.log(n), _LOG_FLOOR) for n in nu]


def _extrapolate(x0, x1, x2):
    """SQUAREM step on log-marginals; returns normalized marginals or None.

    No entry may drop more than ``_MAX_DROP`` nats below its value in
    ``x2``, so an extrapolation cannot switch an action off outright.
    """
    r = [b - a for a, b in zip(x0, x1)]
    v = [c - 2 * b + a for a, b, c in zip(x0, x1, x2)]
    rn = math.sqrt(sum(float(np.sum(z * z)) for z in r))
    vn = math.sqrt(sum(float(np.sum(z * z)) for z in v))
    if rn == 0:
        return None
    alpha = -_MAX_STEP if vn == 0 else max(min(-1.0, -rn / vn), -_MAX_STEP)
    out = []
    for a, dr, dv, c in zip(x0, r, v, x2):
        x = np.maximum(a - 2 * alpha * dr + alpha * alpha * dv, c - _MAX_DROP)
        out.append(np.exp(x - logsumexp(x, axis=2, keepdims=True)))
    return out


def solve(pm: ProductMdp, cfg: SolverConfig, init: PolicyTable | None = None) -> tuple[PolicyTable, SolveReport]:
    """Forward-backward iteration for min_q J + beta * TE.

    Each sweep maps the marginal policies ``nu`` to the Gibbs policy of
    the backward pass and back to new marginals via the forward pass.
    With ``cfg.accelerate`` two consecutive sweeps are extrapolated in
    log-``nu`` space (SQUAREM); an extrapolated point is kept only if it
    does not raise the objective, so the recorded trace stays monotone.

    Stops when a plain sweep changes the objective by less than
    ``tol_objective`` and the policy (on state-window pairs heavier than
    ``mass_floor``) by less than ``tol_policy`` in sup-norm, or after
    ``max_iters`` backward passes (``converged=False``).  Before accepting
    a stopping point, actions whose marginal has (numerically) died out
    are checked for growth under the next sweep; if one would grow it is
    re-seeded and the iteration continues.  ``beta = 0`` is solved by
    value iteration.
    """
    if cfg.beta == 0:
        return _reach_policy(pm, cfg)

    def sweep(nu):
        rho, log_phi, q_new = backward_pass(pm, nu, cfg)
        it = _iterate(pm, q_new, cfg.beta)
        it.parent = (rho, log_phi)
        return it

    cur = _iterate(pm, init if init is not None else _initial_policy(pm, cfg), cfg.beta)
    trace = [cur.obj]
    converged = False
    passes = 0
    while passes < cfg.max_iters:
        nxt = sweep(cur.nu)
        passes += 1
        trace.append(nxt.obj)
        dq = _live_sup_diff(nxt.q, cur.q, nxt.mu, cfg.mass_floor)
        done = abs(nxt.obj - cur.obj) < cfg.tol_objective and dq < cfg.tol_policy
        log.debug("pass %d: objective %.12g, change %.3g, policy change %.3g", passes, nxt.obj, nxt.obj - cur.obj, dq)
        prev, cur = cur, nxt
        if done:
            revived = _revive(pm, prev, nxt.parent, cfg)
            cand = None
            for nu_r in revived:
                if passes >= cfg.max_iters:
                    break
                c = sweep(nu_r)
                passes += 1
                if c.obj < cur.obj - cfg.tol_objective:
                    cand = c
                    break
            if cand is None:
                converged = True
                break
            trace.append(cand.obj)
            cur = cand
            continue
        if passes >= _PRUNE_AFTER and passes % _PRUNE_EVERY == 0 and passes < cfg.max_iters:
            nu_p = _prune(prev, cur, cfg)
            if nu_p is not None:
                cand = sweep(nu_p)
                passes += 1
                if cand.obj <= cur.obj:
                    trace.append(cand.obj)
                    prev, cur = cur, cand
                    continue
        if not cfg.accelerate or passes + 2 > cfg.max_iters:
            continue
        nxt = sweep(cur.nu)
        passes += 1
        trace.append(nxt.obj)
        nu_x = _extrapolate(_log_nu(prev.nu), _log_nu(cur.nu), _log_nu(nxt.nu))
        cur = nxt
        if nu_x is None:
            continue
        cand = sweep(nu_x)
        passes += 1
        if cand.obj <= cur.obj:
            trace.append(cand.obj)
            cur = cand
    if not converged:
        log.warning("no convergence after %d iterations (beta=%g)", passes, cfg.beta)

    rho, log_phi, _ = backward_pass(pm, cur.nu, cfg)
    state = SolverState(cur.mu, cur.nu, rho, log_phi, cur.q)
    fail = 1.0 - (-cur.J + (1.0 if pm.accepting[pm.initial] else 0.0))
    report = SolveReport(cfg.beta, trace, cur.te, cur.J, fail, passes, converged, state)
    return cur.q, report


_DEAD = 1e-9
_GROWTH_TOL = 1e-7
_PRUNE_BELOW = 5e-2
_PRUNE_EVERY = 10
_PRUNE_AFTER = 50


def _prune(prev: _Iterate, cur: _Iterate, cfg):
    """Marginals with small, still shrinking entries set to zero (None if none).

    The plain iteration approaches a face of the simplex only like 1/k;
    after a burn-in, jumping onto the face is tried directly.  A wrong guess is undone by
    the revival check at the next stopping point.
    """
    out = []
    hit = False
    for a, b in zip(prev.nu, cur.nu):
        # slow decay only; fast transients are left to the plain iteration
        kill = (b < _PRUNE_BELOW) & (b > 0.5 * a) & (b < a)
        x = np.where(kill, 0.0, b)
        s = x.sum(axis=2, keepdims=True)
        kill &= s > 0
        if kill.any():
            hit = True
        out.append(np.where(kill, 0.0, b) / np.where(s > 0, s, 1.0) if kill.any() else b)
    return out if hit else None


def _revive(pm, it: _Iterate, parent, cfg):
    """Candidate marginals re-seeding dead actions that the next sweep would grow.

    One sweep multiplies ``nu_t(u | c, w)`` by
    ``g = E[exp(-rho_t - log phi_t) | c, w]``; at a fixed point ``g = 1`` on
    the support, and an action with negligible mass but ``g > 1`` marks a
    stopping point the plain iteration would leave only very slowly.
    Yields progressively gentler re-seedings (empty if there is nothing
    to revive).
    """
    rho, log_phi = parent
    G = _context_matrix(pm).T.tocsr()
    m = pm.n_actions
    masks = []
    for t in range(len(it.nu)):
        W = it.mu[t].shape[1]
        mass = G @ it.mu[t]
        g = np.exp(-rho[t] - log_phi[t][:, :, None]) * it.mu[t][:, :, None]
        g = (G @ g.reshape(pm.n_states, W * m)).reshape(pm.n_free, W, m)
        with np.errstate(invalid="ignore", divide="ignore"):
            g = g / mass[:, :, None]
        bad = (mass[:, :, None] > cfg.mass_floor) & (it.nu[t] < _DEAD) & (g > 1.0 + _GROWTH_TOL)
        masks.append(bad)
    if not any(b.any() for b in masks):
        return []
    out = []
    for eps in (1e-2, 1e-4, 1e-6):
        nu = []
        for n_t, bad in zip(it.nu, masks):
            x = np.where(bad, np.maximum(n_t, eps), n_t)
            nu.append(x / x.sum(axis=2, keepdims=True))
        out.append(nu)
    return out


def _live_sup_diff(a: PolicyTable, b: PolicyTable, mu, floor: float) -> float:
    out = 0.0
    for t in range(a.T):
        live = mu[t] > floor
        if live.any():
            out = max(out, float(np.max(np.abs(a[t] - b[t])[live])))
    return out


def optimality_residuals(pm: ProductMdp, state: SolverState, beta: float, mass_floor: float = 0.0) -> dict[str, float]:
    """Sup-norm residuals of the five coupled optimality equations.

    The equations hold mu-almost everywhere, so the policy residual is
    measured on state-window pairs with mass above ``mass_floor`` and the
    marginal-policy residual on free contexts with mass above it.
    """
    q = state.q
    m = pm.n_actions
    mu_ref, nu_ref = forward_pass(pm, q)
    res = {"mu": 0.0, "nu": 0.0, "rho": 0.0, "phi": 0.0, "q": 0.0}
    for t in range(q.T + 1):
        res["mu"] = max(res["mu"], float(np.max(np.abs(state.mu[t] - mu_ref[t]))))
    G = _context_matrix(pm).T.tocsr()
    r = pm.expected_stage_cost() / beta
    for t in range(q.T):
        mass = G @ state.mu[t]
        pos = mass > mass_floor
        res["nu"] = max(res["nu"], float(np.max(np.abs(state.nu[t] - nu_ref[t])[pos], initial=0.0)))
        shift = shift_index(m, q.memory, t)
        rho_ref = np.empty_like(state.rho[t])
        for u in range(m):
            rho_ref[:, :, u] = r[:, u, None] - pm.kernel[u] @ state.log_phi[t + 1][:, shift[:, u]]
        res["rho"] = max(res["rho"], float(np.max(np.abs(rho_ref - state.rho[t]))))
        with np.errstate(divide="ignore"):
            a = np.log(state.nu[t][pm.free]) - state.rho[t]
        lp = logsumexp(a, axis=2)
        res["phi"] = max(res["phi"], float(np.max(np.abs(np.exp(lp) - np.exp(state.log_phi[t])))))
        gibbs = np.exp(a - state.log_phi[t][:, :, None])
        live = state.mu[t] > mass_floor
        res["q"] = max(res["q"], float(np.max(np.abs(gibbs - q[t])[live], initial=0.0)))
    res["phi_terminal"] = float(np.max(np.abs(state.log_phi[q.T])))
    return res


def solve_constrained(
    pm: ProductMdp,
    target: float,
    cfg_base: SolverConfig,
    beta_lo: float = 1e-3,
    beta_hi: float = 1e3,
    iters: int = 25,
    slack: float = 1e-6,
) -> tuple[PolicyTable, float, SolveReport]:
    """Fewest-bits policy whose satisfaction probability is at least ``target``.

    Bisection on log(beta): smaller beta buys reachability with
    information.  Returns the largest beta in ``[beta_lo, beta_hi]`` whose
    solution meets ``failure <= 1 - target + slack``, falling back to the
    pure reachability policy (beta = 0) when even ``beta_lo`` misses.
    """
    if not 0.0 <= target <= 1.0:
        raise ValueError(f"target probability must lie in [0, 1], got {target}")
    h, _ = value_iteration_reach(pm, cfg_base.T)
    h_max = float(h[cfg_base.T, pm.initial])
    if target > h_max + slack:
        raise InfeasibleError(target, h_max)

    def run(beta):
        return solve(pm, replace(cfg_base, beta=beta))

    def ok(rep):
        return rep.failure_probability <= 1.0 - target + slack

    q, rep = run(beta_hi)
    if ok(rep):
        return q, beta_hi, rep
    best = None
    q_lo, rep_lo = run(beta_lo)
    if ok(rep_lo):
        best = (q_lo, beta_lo, rep_lo)
    else:
        q0, rep0 = run(0.0)
        return q0, 0.0, rep0
    lo, hi = math.log(beta_lo), math.log(beta_hi)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        qm, rm = run(math.exp(mid))
        if ok(rm):
            lo = mid
            best = (qm, math.exp(mid), rm)
        else:
            hi = mid
    return best


def sweep(pm: ProductMdp, betas, cfg_base: SolverConfig, warm_start: bool = True) -> list[SolveReport]:
    """Solves over a grid of beta values, reports in the order of ``betas``.

    With ``warm_start`` the grid is visited in increasing order and each
    solve starts from the previous policy (continuation), which keeps
    neighbouring points on the same branch of stationary points.
    Otherwise every point is solved independently from ``cfg_base.init``.
    """
    betas = [float(b) for b in betas]
    out: list = [None] * len(betas)
    q = None
    for i in sorted(range(len(betas)), key=lambda i: betas[i]):
        cfg = replace(cfg_base, beta=betas[i])
        q_i, out[i] = solve(pm, cfg, init=q if warm_start and cfg.beta > 0 else None)
        if cfg.beta > 0 or q is None:
            q = q_i
    return out
