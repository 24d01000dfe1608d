"""Finite labeled MDPs with a factored (expensive x free) state space."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

STOCHASTIC_TOL = 1e-12


class MdpError(ValueError):
    pass


@dataclass(frozen=True)
class StateSpace:
    """Cartesian state space X = X_bar x X_tilde.

    Full states are indexed ``e * n_free + f`` where ``e`` indexes the
    expensive component and ``f`` the free component.
    """

    expensive_states: tuple[str, ...]
    free_states: tuple[str, ...]

    def __post_init__(self):
        for label, names in (("expensive", self.expensive_states), ("free", self.free_states)):
            if len(names) == 0:
                raise MdpError(f"{label} state set is empty")
            if len(set(names)) != len(names):
                raise MdpError(f"{label} state set contains duplicates")
        object.__setattr__(self, "expensive_states", tuple(self.expensive_states))
        object.__setattr__(self, "free_states", tuple(self.free_states))

    @property
    def n_expensive(self) -> int:
        return len(self.expensive_states)

    @property
    def n_free(self) -> int:
        return len(self.free_states)

    @property
    def size(self) -> int:
        return self.n_expensive * self.n_free

    def compose(self, expensive: int, free: int) -> int:
        if not (0 <= expensive < self.n_expensive and 0 <= free < self.n_free):
            raise IndexError((expensive, free))
        return expensive * self.n_free + free

    def decompose(self, x: int) -> tuple[int, int]:
        if not 0 <= x < self.size:
            raise IndexError(x)
        return divmod(x, self.n_free)

    def name(self, x: int) -> str:
        e, f = self.decompose(x)
        return f"{self.free_states[f]}|{self.expensive_states[e]}"

    def names(self) -> list[str]:
        return [self.name(x) for x in range(self.size)]

    def index(self, name: str) -> int:
        try:
            free, expensive = name.split("|")
            return self.compose(self.expensive_states.index(expensive), self.free_states.index(free))
        except ValueError:
            raise MdpError(f"unknown state {name!r}") from None


@dataclass(frozen=True)
class LabeledMdp:
    """Labeled MDP with a dense kernel ``transition[x, u, x']``.

    ``labeling[x]`` is the set of atomic propositions true in state ``x``.
    Construction does not validate; call :func:`validate` (or
    :meth:`check`) for diagnostics.
    """

    states: StateSpace
    actions: tuple[str, ...]
    transition: np.ndarray
    atomic_props: tuple[str, ...]
    labeling: tuple[frozenset, ...]
    initial: int | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        p = np.array(self.transition, dtype=float)
        p.setflags(write=False)
        object.__setattr__(self, "transition", p)
        object.__setattr__(self, "actions", tuple(self.actions))
        object.__setattr__(self, "atomic_props", tuple(self.atomic_props))
        object.__setattr__(self, "labeling", tuple(frozenset(l) for l in self.labeling))
        n, m = self.states.size, len(self.actions)
        if p.shape != (n, m, n):
            raise MdpError(f"transition has shape {p.shape}, expected {(n, m, n)}")

    @property
    def n_states(self) -> int:
        return self.states.size

    @property
    def n_actions(self) -> int:
        return len(self.actions)

    def label_mask(self, props: Sequence[str]) -> np.ndarray:
        """Bitmask of ``L(x)`` over the ordered proposition list ``props``."""
        bits = {a: 1 << i for i, a in enumerate(props)}
        return np.array([sum(bits[a] for a in lab if a in bits) for lab in self.labeling], dtype=np.int64)

    def check(self):
        problems = validate(self)
        if problems:
            raise MdpError("; ".join(problems))
        return self


def validate(mdp: LabeledMdp, tol: float = STOCHASTIC_TOL) -> list[str]:
    """Return a list of human-readable invariant violations (empty if valid)."""
    out = []
    p = mdp.transition
    names = mdp.states.names()
    for x, u in zip(*np.nonzero((p < 0).any(axis=2))):
        out.append(f"row ({names[x]}, {mdp.actions[u]}): negative entry {p[x, u].min():.3g} (non-negativity)")
    sums = p.sum(axis=2)
    for x, u in zip(*np.nonzero(np.abs(sums - 1.0) > tol)):
        out.append(f"row ({names[x]}, {mdp.actions[u]}): sums to {sums[x, u]:.15g}, not 1")
    if len(mdp.labeling) != mdp.n_states:
        out.append(f"labeling covers {len(mdp.labeling)} of {mdp.n_states} states")
    aps = set(mdp.atomic_props)
    for x, lab in enumerate(mdp.labeling[: mdp.n_states]):
        extra = set(lab) - aps
        if extra:
            out.append(f"state {names[x]}: labels {sorted(extra)} not in AP")
    if mdp.initial is not None and not 0 <= mdp.initial < mdp.n_states:
        out.append(f"initial state {mdp.initial} out of range")
    return out


def renormalize(mdp: LabeledMdp, max_defect: float = 1e-9) -> LabeledMdp:
    """Rescale rows whose mass is off by at most ``max_defect``.

    Rows further off, or with negative entries, are left for
    :func:`validate` to report.
    """
    p = np.array(mdp.transition)
    sums = p.sum(axis=2, keepdims=True)
    fix = (np.abs(sums - 1.0) <= max_defect) & (p >= 0).all(axis=2, keepdims=True)
    p = np.where(fix, p / np.where(sums > 0, sums, 1.0), p)
    return LabeledMdp(mdp.states, mdp.actions, p, mdp.atomic_props, mdp.labeling, mdp.initial, dict(mdp.meta))


def step_distribution(mdp: LabeledMdp, d: np.ndarray, policy_slice: np.ndarray) -> np.ndarray:
    """One step of the induced Markov chain.

    ``d`` is a distribution over states and ``policy_slice[x, u]`` the
    action distribution in state ``x``.
    """
    d = np.asarray(d, dtype=float)
    pi = np.asarray(policy_slice, dtype=float)
    if d.shape != (mdp.n_states,) or pi.shape != (mdp.n_states, mdp.n_actions):
        raise MdpError(
            f"shape mismatch: d {d.shape}, policy {pi.shape}, mdp has "
            f"{mdp.n_states} states and {mdp.n_actions} actions"
        )
    return np.einsum("x,xu,xuy->y", d, pi, mdp.transition)


def point_mass(n: int, i: int) -> np.ndarray:
    d = np.zeros(n)
    d[i] = 1.0
    return d
