"""Gridworld generators: a patrolling obstacle and static uncertain rocks.

Cells are numbered row-major from the top-left corner: ``cell = row *
width + col``.  Agent actions are ``N, S, E, W, stay``.  A move sends
``1 - 2 * slip`` to the intended cell and ``slip`` to each of the two
diagonal cells in the direction of motion (north-east and north-west for
``N``, and so on).  Off-grid targets are dropped and the remaining mass
renormalized; a move whose intended cell is off-grid leaves the agent in
place.

Both generators put the agent cell in the free factor.  The moving
obstacle generator makes the obstacle cell the expensive factor; the
static-uncertainty generator makes the vector of obstacle levels the
expensive factor.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product as cartesian

import numpy as np

from .mdp import LabeledMdp, StateSpace

ACTIONS = ("N", "S", "E", "W", "stay")
_MOVES = {"N": (-1, 0), "S": (1, 0), "E": (0, 1), "W": (0, -1)}
LEVELS = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)
MAX_UNCERTAIN = 4


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class MovingObstacle:
    """Obstacle roaming over ``cells``.

    ``law`` is an optional row-stochastic matrix over ``cells``; by default
    the obstacle does a lazy random walk: it stays with probability
    ``stay`` and otherwise moves to a uniformly chosen grid-adjacent cell
    of the roaming set.
    """

    cells: tuple[int, ...]
    start: int
    stay: float = 0.5
    law: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "cells", tuple(int(c) for c in self.cells))
        if self.law is not None:
            object.__setattr__(self, "law", tuple(tuple(float(p) for p in row) for row in self.law))


@dataclass(frozen=True)
class GridSpec:
    width: int
    height: int
    static_obstacles: frozenset = frozenset()
    goal_cells: frozenset = frozenset()
    agent_start: int = 0
    slip: float = 0.1
    moving_obstacle: MovingObstacle | None = None
    uncertain_cells: tuple = ()  # ((cell, level), ...)
    scout_range: int = 2
    # freeze the agent once it stands on a goal cell or a static obstacle
    absorbing_goal: bool = True
    absorbing_obstacles: bool = True
    max_uncertain: int = MAX_UNCERTAIN
    name: str = field(default="grid", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "static_obstacles", frozenset(int(c) for c in self.static_obstacles))
        object.__setattr__(self, "goal_cells", frozenset(int(c) for c in self.goal_cells))
        object.__setattr__(self, "uncertain_cells", tuple((int(c), float(o)) for c, o in self.uncertain_cells))
        self.check()

    @property
    def n_cells(self) -> int:
        return self.width * self.height

    def rc(self, cell: int) -> tuple[int, int]:
        return divmod(cell, self.width)

    def cell(self, row: int, col: int) -> int | None:
        if 0 <= row < self.height and 0 <= col < self.width:
            return row * self.width + col
        return None

    def check(self):
        if self.width < 1 or self.height < 1:
            raise ScenarioError("grid must have positive width and height")
        n = self.n_cells
        cells = set(self.static_obstacles) | set(self.goal_cells) | {self.agent_start}
        if self.moving_obstacle is not None:
            cells |= set(self.moving_obstacle.cells) | {self.moving_obstacle.start}
        cells |= {c for c, _ in self.uncertain_cells}
        bad = sorted(c for c in cells if not 0 <= c < n)
        if bad:
            raise ScenarioError(f"cells {bad} outside the {self.width}x{self.height} grid")
        if not 0 <= self.slip < 0.5:
            raise ScenarioError(f"slip must lie in [0, 0.5), got {self.slip}")
        if self.scout_range < 0:
            raise ScenarioError("scout range must be non-negative")
        if self.agent_start in self.static_obstacles:
            raise ScenarioError(f"agent starts on static obstacle {self.agent_start}")
        mo = self.moving_obstacle
        if mo is not None:
            if mo.start not in mo.cells:
                raise ScenarioError("moving obstacle starts outside its roaming set")
            if mo.start == self.agent_start:
                raise ScenarioError(f"agent starts on the moving obstacle at {self.agent_start}")
            if mo.law is not None:
                law = np.asarray(mo.law)
                k = len(mo.cells)
                if law.shape != (k, k) or (law < 0).any() or np.abs(law.sum(axis=1) - 1).max() > 1e-12:
                    raise ScenarioError("moving obstacle law must be a row-stochastic matrix over its cells")
        for c, o in self.uncertain_cells:
            if not any(abs(o - lv) < 1e-12 for lv in LEVELS):
                raise ScenarioError(f"level {o} of cell {c} not in {LEVELS}")
        if len(self.uncertain_cells) > self.max_uncertain:
            raise ScenarioError(
                f"{len(self.uncertain_cells)} uncertain cells exceed the cap of {self.max_uncertain} "
                f"(6^k level vectors grow too fast for dense kernels)"
            )
        if len({c for c, _ in self.uncertain_cells}) != len(self.uncertain_cells):
            raise ScenarioError("uncertain cells listed twice")
        return self


def agent_kernel(spec: GridSpec) -> np.ndarray:
    """``P[c, u, c']`` for the agent alone (obstacles ignored)."""
    n = spec.n_cells
    P = np.zeros((n, len(ACTIONS), n))
    s = spec.slip
    for c in range(n):
        r, k = spec.rc(c)
        frozen = (spec.absorbing_goal and c in spec.goal_cells) or (
            spec.absorbing_obstacles and c in spec.static_obstacles
        )
        for u, a in enumerate(ACTIONS):
            if frozen or a == "stay":
                P[c, u, c] = 1.0
                continue
            dr, dk = _MOVES[a]
            target = spec.cell(r + dr, k + dk)
            if target is None:
                P[c, u, c] = 1.0
                continue
            # the two diagonal-forward cells
            diag = [(r + dr, k + 1), (r + dr, k - 1)] if dr else [(r + 1, k + dk), (r - 1, k + dk)]
            outcomes = [(target, 1.0 - 2.0 * s)]
            for rr, kk in diag:
                side = spec.cell(rr, kk)
                if side is not None and s > 0:
                    outcomes.append((side, s))
            total = sum(p for _, p in outcomes)
            for t, p in outcomes:
                P[c, u, t] += p / total
    return P


def obstacle_law(spec: GridSpec) -> np.ndarray:
    mo = spec.moving_obstacle
    k = len(mo.cells)
    if mo.law is not None:
        return np.asarray(mo.law, dtype=float)
    law = np.zeros((k, k))
    pos = [spec.rc(c) for c in mo.cells]
    for i, (r, c) in enumerate(pos):
        nbrs = [j for j, (r2, c2) in enumerate(pos) if abs(r - r2) + abs(c - c2) == 1]
        if not nbrs:
            law[i, i] = 1.0
            continue
        law[i, i] = mo.stay
        for j in nbrs:
            law[i, j] += (1.0 - mo.stay) / len(nbrs)
    return law


def _cell_names(spec):
    return tuple(f"c{c}" for c in range(spec.n_cells))


def build_moving_obstacle(spec: GridSpec) -> LabeledMdp:
    """Agent cell is free, obstacle cell is expensive; crash on collision or static obstacle."""
    mo = spec.moving_obstacle
    if mo is None:
        raise ScenarioError("scenario has no moving obstacle")
    A = agent_kernel(spec)
    B = obstacle_law(spec)
    n, k = spec.n_cells, len(mo.cells)
    states = StateSpace(tuple(f"o{c}" for c in mo.cells), _cell_names(spec))
    # x = e * n + f  ->  P[(e, f), u, (e', f')] = B[e, e'] * A[f, u, f']
    P = np.einsum("ab,fug->afubg", B, A).reshape(k * n, len(ACTIONS), k * n)
    labels = []
    for e, oc in enumerate(mo.cells):
        for f in range(n):
            lab = set()
            if f in spec.static_obstacles or f == oc:
                lab.add("crash")
            if f in spec.goal_cells:
                lab.add("goal")
            labels.append(frozenset(lab))
    x0 = states.compose(mo.cells.index(mo.start), spec.agent_start)
    return LabeledMdp(states, ACTIONS, P, ("crash", "goal"), tuple(labels), x0, {"spec": spec, "kind": "moving"})


def level_vectors(spec: GridSpec) -> list[tuple[float, ...]]:
    """Reachable level vectors: each level stays at its prior or resolves to 0 or 1."""
    doms = [sorted({0.0, o, 1.0}) for _, o in spec.uncertain_cells]
    return list(cartesian(*doms))


def build_static_uncertain(spec: GridSpec) -> LabeledMdp:
    """Agent cell is free, obstacle-level vector is expensive.

    While the agent stands within Chebyshev distance ``scout_range`` of an
    unresolved uncertain cell with level ``o``, that level resolves to 1
    with probability ``o`` and to 0 otherwise on the next step,
    independently across cells.  Resolved levels never change.
    """
    if not spec.uncertain_cells:
        raise ScenarioError("scenario has no uncertain cells")
    A = agent_kernel(spec)
    n = spec.n_cells
    vecs = level_vectors(spec)
    index = {v: i for i, v in enumerate(vecs)}
    ne = len(vecs)
    pos = [spec.rc(c) for c, _ in spec.uncertain_cells]
    d = spec.scout_range

    # env[e, f, e']: level transition given the agent's current cell
    env = np.zeros((ne, n, ne))
    for f in range(n):
        r, c = spec.rc(f)
        near = [max(abs(r - pr), abs(c - pc)) <= d for pr, pc in pos]
        for e, vec in enumerate(vecs):
            branches = [[(o, 1.0)] if (o in (0.0, 1.0) or not nr) else [(1.0, o), (0.0, 1.0 - o)]
                        for o, nr in zip(vec, near)]
            for combo in cartesian(*branches):
                p = float(np.prod([w for _, w in combo]))
                if p > 0:
                    env[e, f, index[tuple(o for o, _ in combo)]] += p

    P = np.einsum("afb,fug->afubg", env, A).reshape(ne * n, len(ACTIONS), ne * n)
    cells = [c for c, _ in spec.uncertain_cells]
    labels = []
    for vec in vecs:
        rocks = {c for c, o in zip(cells, vec) if o == 1.0}
        for f in range(n):
            lab = set()
            if f in spec.static_obstacles or f in rocks:
                lab.add("crash")
            if f in spec.goal_cells:
                lab.add("goal")
            labels.append(frozenset(lab))
    names = tuple("o=(" + ",".join(f"{o:g}" for o in v) + ")" for v in vecs)
    states = StateSpace(names, _cell_names(spec))
    prior = tuple(o for _, o in spec.uncertain_cells)
    x0 = states.compose(index[prior], spec.agent_start)
    return LabeledMdp(states, ACTIONS, P, ("crash", "goal"), tuple(labels), x0, {"spec": spec, "kind": "static"})


def build(spec: GridSpec) -> LabeledMdp:
    if spec.moving_obstacle is not None and spec.uncertain_cells:
        raise ScenarioError("a scenario has either a moving obstacle or uncertain cells, not both")
    if spec.moving_obstacle is not None:
        return build_moving_obstacle(spec)
    return build_static_uncertain(spec)


# --------------------------------------------------------------------------
# the case-study maps


def moving_obstacle_grid(slip: float = 0.1) -> GridSpec:
    """5 x 7 grid: wall in the middle column, obstacle patrolling below it."""
    return GridSpec(
        width=5,
        height=7,
        static_obstacles=frozenset({7, 12, 17}),
        goal_cells=frozenset({30}),
        agent_start=34,
        slip=slip,
        moving_obstacle=MovingObstacle((22, 27, 32), start=27),
        name="moving-obstacle",
    )


ROAMING_REGION = frozenset({22, 27, 32})
# detour over the wall: everything above the obstacle's patrol rows
LONG_ROUTE = frozenset(range(20))


def mars_grid(slip: float = 0.05, scout_range: int = 2) -> GridSpec:
    """Scaled-down rover map with a dense and a sparse rock region.

    7 x 5 grid.  A known boulder (rows 2-3, columns 2-4) sits between
    the start on the west edge and the goal on the east edge.  The
    northern corridor (rows 0-1) is short and has two lanes, each cut by
    an uncertain cell of moderate prior.  The southern corridor is a
    single lane along the bottom edge, next to the boulder, with one
    low-prior cell: longer and exposed to slipping into the boulder, but
    there is little to learn on the way.
    """
    w = 7
    boulder = {r * w + c for r in (2, 3) for c in (2, 3, 4)}
    return GridSpec(
        width=w,
        height=5,
        static_obstacles=frozenset(boulder),
        goal_cells=frozenset({2 * w + 6}),
        agent_start=2 * w + 0,
        slip=slip,
        uncertain_cells=((0 * w + 3, 0.4), (1 * w + 3, 0.6), (4 * w + 3, 0.2)),
        scout_range=scout_range,
        name="mars",
    )


MARS_DENSE = frozenset(r * 7 + c for r in (0, 1) for c in (2, 3, 4))
MARS_SPARSE = frozenset(4 * 7 + c for c in (2, 3, 4))
