"""Product of a labeled MDP with a specification DFA, plus reachability baseline."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .dfa import Dfa
from .mdp import LabeledMdp, MdpError

ACC_PROP = "acc_phi"


class ProductError(ValueError):
    pass


@dataclass(frozen=True)
class ProductMdp:
    """Product MDP with states V = X x S, kept in sparse per-action form.

    ``kernel[u]`` is a CSR matrix with ``kernel[u][v, v'] = Delta(v' | v, u)``.
    The expensive factor of ``v`` is ``expensive[v]``; the free factor
    (free MDP component together with the automaton state) is the context
    index ``free[v]``.  ``accepting[v]`` marks Acc_M.
    """

    kernel: tuple
    accepting: np.ndarray
    expensive: np.ndarray
    free: np.ndarray
    initial: int
    actions: tuple[str, ...]
    names: tuple[str, ...]
    n_expensive: int
    n_free: int
    mdp_state: np.ndarray | None = None
    dfa_state: np.ndarray | None = None
    dfa: Dfa | None = field(default=None, compare=False)
    mdp: LabeledMdp | None = field(default=None, compare=False)

    def __post_init__(self):
        for name in ("accepting", "expensive", "free", "mdp_state", "dfa_state"):
            arr = getattr(self, name)
            if arr is not None:
                arr = np.array(arr, dtype=bool if name == "accepting" else np.int64)
                arr.setflags(write=False)
                object.__setattr__(self, name, arr)
        object.__setattr__(self, "kernel", tuple(sp.csr_matrix(k) for k in self.kernel))
        object.__setattr__(self, "actions", tuple(self.actions))
        object.__setattr__(self, "names", tuple(self.names))

    @classmethod
    def from_dense(cls, kernel, accepting, expensive=None, free=None, initial=0, actions=None, names=None):
        """Build directly from a dense ``kernel[v, u, v']`` (mostly for tests)."""
        kernel = np.asarray(kernel, dtype=float)
        n, m, _ = kernel.shape
        expensive = np.zeros(n, dtype=np.int64) if expensive is None else np.asarray(expensive)
        free = np.arange(n) if free is None else np.asarray(free)
        pm = cls(
            kernel=tuple(kernel[:, u, :] for u in range(m)),
            accepting=np.asarray(accepting, dtype=bool),
            expensive=expensive,
            free=free,
            initial=int(initial),
            actions=tuple(actions or (f"u{u}" for u in range(m))),
            names=tuple(names or (f"v{v}" for v in range(n))),
            n_expensive=int(expensive.max()) + 1,
            n_free=int(free.max()) + 1,
        )
        pm.check()
        return pm

    @property
    def n_states(self) -> int:
        return len(self.accepting)

    @property
    def n_actions(self) -> int:
        return len(self.kernel)

    def dense_kernel(self) -> np.ndarray:
        return np.stack([k.toarray() for k in self.kernel], axis=1)

    def expected_stage_cost(self) -> np.ndarray:
        """r[v, u] = E[c(v, u, V')]: minus the probability of entering Acc_M."""
        acc = self.accepting.astype(float)
        r = np.stack([-(k @ acc) for k in self.kernel], axis=1)
        r[self.accepting] = 0.0
        return r

    def stage_cost(self, v: int, v_next: int) -> float:
        """Reach-once cost: -1 exactly on entry into Acc_M."""
        return -1.0 if (not self.accepting[v] and self.accepting[v_next]) else 0.0

    def check(self, tol: float = 1e-12):
        n = self.n_states
        for u, k in enumerate(self.kernel):
            if k.shape != (n, n):
                raise ProductError(f"kernel[{u}] has shape {k.shape}, expected {(n, n)}")
            if k.nnz and k.data.min() < 0:
                raise ProductError(f"kernel[{u}] has negative entries")
            sums = np.asarray(k.sum(axis=1)).ravel()
            bad = np.nonzero(np.abs(sums - 1) > tol)[0]
            if len(bad):
                raise ProductError(f"kernel[{u}] row {self.names[bad[0]]} sums to {sums[bad[0]]!r}")
        if len(self.expensive) != n or len(self.free) != n:
            raise ProductError("factor maps do not cover all states")
        pairs = set(zip(self.expensive.tolist(), self.free.tolist()))
        if len(pairs) != n:
            raise ProductError("(expensive, free) factor pairs are not unique")
        if not 0 <= self.initial < n:
            raise ProductError("initial state out of range")
        return self

    def labels(self) -> list[frozenset]:
        """L_phi: MDP labels plus ``acc_phi`` on Acc_M (requires an MDP-backed product)."""
        if self.mdp is None:
            return [frozenset([ACC_PROP]) if a else frozenset() for a in self.accepting]
        return [
            self.mdp.labeling[x] | ({ACC_PROP} if a else set())
            for x, a in zip(self.mdp_state, self.accepting)
        ]


def build_product(mdp: LabeledMdp, dfa: Dfa, x0: int | str | None = None) -> ProductMdp:
    """Synchronous product, restricted to states reachable from (x0, s_I).

    The automaton reads only successor labels: a transition x -> x' moves
    the automaton from s to delta(s, L(x')).  The label of x0 itself is not
    consumed.
    """
    missing = set(dfa.ap) - set(mdp.atomic_props)
    if missing:
        raise ProductError(f"AP mismatch: automaton propositions {sorted(missing)} are not MDP propositions")
    if x0 is None:
        x0 = mdp.initial
    if x0 is None:
        raise ProductError("no initial MDP state given")
    if isinstance(x0, str):
        try:
            x0 = mdp.states.index(x0)
        except MdpError:
            raise ProductError(f"x0 {x0!r} is not a state of the MDP") from None
    if not 0 <= int(x0) < mdp.n_states:
        raise ProductError(f"x0 {x0} is not a state of the MDP")
    x0 = int(x0)

    letters = mdp.label_mask(dfa.ap)
    # automaton successor when entering MDP state x' from automaton state s
    succ = dfa.delta[:, letters]  # (S, X)
    p = mdp.transition
    support = [[np.nonzero(p[x, u])[0] for u in range(mdp.n_actions)] for x in range(mdp.n_states)]

    index = {(x0, dfa.initial): 0}
    order = [(x0, dfa.initial)]
    queue = deque(order)
    rows = [[] for _ in range(mdp.n_actions)]
    cols = [[] for _ in range(mdp.n_actions)]
    vals = [[] for _ in range(mdp.n_actions)]
    while queue:
        x, s = queue.popleft()
        v = index[(x, s)]
        for u in range(mdp.n_actions):
            for y in support[x][u]:
                key = (int(y), int(succ[s, y]))
                w = index.get(key)
                if w is None:
                    w = index[key] = len(order)
                    order.append(key)
                    queue.append(key)
                rows[u].append(v)
                cols[u].append(w)
                vals[u].append(p[x, u, y])

    n = len(order)
    kernel = [sp.csr_matrix((vals[u], (rows[u], cols[u])), shape=(n, n)) for u in range(mdp.n_actions)]
    xs = np.array([x for x, _ in order], dtype=np.int64)
    ss = np.array([s for _, s in order], dtype=np.int64)
    e_idx, f_idx = np.divmod(xs, mdp.states.n_free)
    ctx_keys = sorted(set(zip(f_idx.tolist(), ss.tolist())))
    ctx_of = {k: i for i, k in enumerate(ctx_keys)}
    free = np.array([ctx_of[k] for k in zip(f_idx.tolist(), ss.tolist())], dtype=np.int64)
    names = tuple(f"{mdp.states.name(x)}|s{s}" for x, s in order)
    return ProductMdp(
        kernel=tuple(kernel),
        accepting=np.array([s in dfa.accepting for s in ss]),
        expensive=e_idx,
        free=free,
        initial=0,
        actions=mdp.actions,
        names=names,
        n_expensive=mdp.states.n_expensive,
        n_free=len(ctx_keys),
        mdp_state=xs,
        dfa_state=ss,
        dfa=dfa,
        mdp=mdp,
    )


def value_iteration_reach(pm: ProductMdp, T: int) -> tuple[np.ndarray, np.ndarray]:
    """Finite-horizon maximal reachability of Acc_M.

    Returns ``(h, policy)`` where ``h[k, v]`` is the optimal probability of
    reaching Acc_M from ``v`` within ``k`` steps (k = 0..T) and
    ``policy[t, v]`` is a greedy action at time ``t`` (remaining horizon
    ``T - t``), ties broken towards the lowest action index.
    """
    if T < 0:
        raise ValueError("horizon must be non-negative")
    acc = pm.accepting
    h = np.zeros((T + 1, pm.n_states))
    h[0] = acc
    policy = np.zeros((T, pm.n_states), dtype=np.int64)
    for k in range(T):
        q = np.stack([K @ h[k] for K in pm.kernel], axis=1)
        best = np.argmax(q, axis=1)
        h[k + 1] = np.where(acc, 1.0, q[np.arange(pm.n_states), best])
        policy[T - 1 - k] = np.where(acc, 0, best)
    return h, policy
