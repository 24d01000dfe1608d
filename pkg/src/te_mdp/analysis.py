"""Post-processing of solved policies: agent marginals, region visits, simulation."""

from __future__ import annotations

import numpy as np

from .product import ProductMdp
from .solver import PolicyTable, forward_pass, n_windows, shift_index, state_marginals


def _agent_index(pm: ProductMdp) -> tuple[np.ndarray, int]:
    if pm.mdp is None:
        raise ValueError("agent marginals need a product built from a labeled MDP")
    nf = pm.mdp.states.n_free
    return pm.mdp_state % nf, nf


def agent_marginals(pm: ProductMdp, q: PolicyTable, mu=None) -> np.ndarray:
    """``P[t, f]``: probability that the free MDP component (the agent cell) is ``f`` at time ``t``."""
    if mu is None:
        mu, _ = forward_pass(pm, q)
    idx, nf = _agent_index(pm)
    out = np.zeros((len(mu), nf))
    for t, m in enumerate(state_marginals(mu)):
        np.add.at(out[t], idx, m)
    return out


def visit_probability(pm: ProductMdp, q: PolicyTable, cells) -> np.ndarray:
    """``P[t]``: probability that the agent has entered ``cells`` at some time ``<= t``.

    Computed exactly by propagating only the mass that has not yet
    visited the region.
    """
    idx, _ = _agent_index(pm)
    inside = np.isin(idx, list(cells))
    m = pm.n_actions
    cur = np.zeros((pm.n_states, 1))
    cur[pm.initial, 0] = 1.0
    out = np.zeros(q.T + 1)
    out[0] = cur[inside].sum()
    cur[inside] = 0.0
    for t in range(q.T):
        shift = shift_index(m, q.memory, t)
        nxt = np.zeros((pm.n_states, n_windows(m, q.memory, t + 1)))
        joint = cur[:, :, None] * q[t]
        for u in range(m):
            moved = pm.kernel[u].T @ joint[:, :, u]
            np.add.at(nxt.T, shift[:, u], moved.T)
        out[t + 1] = out[t] + nxt[inside].sum()
        nxt[inside] = 0.0
        cur = nxt
    return out


def simulate(pm: ProductMdp, q: PolicyTable, n_runs: int, rng: np.random.Generator) -> np.ndarray:
    """Sample ``n_runs`` product-state trajectories of length ``q.T + 1``."""
    m = pm.n_actions
    dense = [k.toarray() for k in pm.kernel]
    cdf = np.stack([np.cumsum(d, axis=1) for d in dense], axis=1)  # (V, U, V)
    v = np.full(n_runs, pm.initial)
    w = np.zeros(n_runs, dtype=np.int64)
    traj = np.empty((n_runs, q.T + 1), dtype=np.int64)
    traj[:, 0] = v
    for t in range(q.T):
        probs = q[t][v, w]
        u = (rng.random(n_runs)[:, None] > np.cumsum(probs, axis=1)).sum(axis=1)
        u = np.minimum(u, m - 1)
        nxt = (rng.random(n_runs)[:, None] > cdf[v, u]).sum(axis=1)
        v = np.minimum(nxt, pm.n_states - 1)
        w = shift_index(m, q.memory, t)[w, u]
        traj[:, t + 1] = v
    return traj
