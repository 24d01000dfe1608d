"""Translation of co-safe LTL formulas to completed, minimal DFAs.

The formula is unfolded into an NFA whose states are conjunctive
obligation sets (clauses).  Reading a letter progresses every obligation
of a clause and puts the result back into disjunctive normal form; the
subset construction over clauses then yields a DFA.  Accepting states are
made absorbing, unreachable states dropped and the result minimized.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from itertools import product as cartesian
from typing import Iterable, Sequence

import numpy as np

from .ltl import And, Atom, Const, Eventually, Formula, NegAtom, Next, Or, Until, atoms, parse

MAX_AP = 16

Clause = frozenset  # conjunction of basic formulas
Dnf = frozenset  # disjunction of clauses

_TRUE: Dnf = frozenset([frozenset()])
_FALSE: Dnf = frozenset()


class DfaError(ValueError):
    pass


@dataclass(frozen=True)
class Dfa:
    """Completed DFA over the alphabet 2^AP.

    Letters are bitmasks: bit ``i`` set iff ``ap[i]`` holds.
    ``delta[s, letter]`` is the successor state.
    """

    ap: tuple[str, ...]
    delta: np.ndarray
    initial: int
    accepting: frozenset

    def __post_init__(self):
        d = np.array(self.delta, dtype=np.int64)
        d.setflags(write=False)
        object.__setattr__(self, "delta", d)
        object.__setattr__(self, "ap", tuple(self.ap))
        object.__setattr__(self, "accepting", frozenset(int(s) for s in self.accepting))
        if d.shape[1] != 1 << len(self.ap):
            raise DfaError(f"delta has {d.shape[1]} letters, expected {1 << len(self.ap)}")

    @property
    def n_states(self) -> int:
        return self.delta.shape[0]

    @property
    def n_letters(self) -> int:
        return self.delta.shape[1]

    def letter(self, props: Iterable[str]) -> int:
        """Bitmask of a set of propositions; propositions outside AP are ignored."""
        props = set(props)
        return sum(1 << i for i, a in enumerate(self.ap) if a in props)

    def letter_props(self, letter: int) -> frozenset[str]:
        return frozenset(a for i, a in enumerate(self.ap) if letter >> i & 1)

    def run(self, word: Sequence, start: int | None = None) -> list[int]:
        s = self.initial if start is None else start
        trace = [s]
        for letter in word:
            s = int(self.delta[s, letter if isinstance(letter, (int, np.integer)) else self.letter(letter)])
            trace.append(s)
        return trace


def accepts_prefix(d: Dfa, word: Sequence) -> bool:
    """True iff running ``word`` from the initial state visits an accepting state.

    Letters may be bitmasks or iterables of proposition names.
    """
    return any(s in d.accepting for s in d.run(word))


# --------------------------------------------------------------------------
# obligation algebra


def _or(a: Dnf, b: Dnf) -> Dnf:
    return _simplify(a | b)


def _and(a: Dnf, b: Dnf) -> Dnf:
    return _simplify(frozenset(x | y for x in a for y in b))


def _simplify(d: Dnf) -> Dnf:
    # drop clauses subsumed by a smaller one (C ⊂ D means D implies C)
    clauses = sorted(d, key=len)
    kept: list[frozenset] = []
    for c in clauses:
        if not any(k <= c for k in kept):
            kept.append(c)
    return frozenset(kept)


def _dnf(f: Formula) -> Dnf:
    if isinstance(f, Const):
        return _TRUE if f.value else _FALSE
    if isinstance(f, And):
        return _and(_dnf(f.left), _dnf(f.right))
    if isinstance(f, Or):
        return _or(_dnf(f.left), _dnf(f.right))
    return frozenset([frozenset([f])])


def _nullable(f: Formula) -> bool:
    """Whether ``f`` holds on the empty word."""
    if isinstance(f, Const):
        return f.value
    if isinstance(f, And):
        return _nullable(f.left) and _nullable(f.right)
    if isinstance(f, Or):
        return _nullable(f.left) or _nullable(f.right)
    if isinstance(f, Eventually):
        return _nullable(f.arg)
    if isinstance(f, Until):
        return _nullable(f.right)
    return False


def _progress(f: Formula, letter: frozenset) -> Dnf:
    """Obligations remaining after reading ``letter``."""
    if isinstance(f, Const):
        return _TRUE if f.value else _FALSE
    if isinstance(f, Atom):
        return _TRUE if f.name in letter else _FALSE
    if isinstance(f, NegAtom):
        return _FALSE if f.name in letter else _TRUE
    if isinstance(f, And):
        return _and(_progress(f.left, letter), _progress(f.right, letter))
    if isinstance(f, Or):
        return _or(_progress(f.left, letter), _progress(f.right, letter))
    if isinstance(f, Next):
        return _dnf(f.arg)
    if isinstance(f, Eventually):
        return _or(_progress(f.arg, letter), _dnf(f))
    if isinstance(f, Until):
        return _or(_progress(f.right, letter), _and(_progress(f.left, letter), _dnf(f)))
    raise TypeError(f)


def _clause_step(clause: Clause, letter: frozenset) -> Dnf:
    out = _TRUE
    for g in clause:
        out = _and(out, _progress(g, letter))
        if not out:
            break
    return out


# --------------------------------------------------------------------------
# construction


def to_dfa(f: Formula | str, ap: Iterable[str] | None = None) -> Dfa:
    """Translate a co-safe formula into a completed, minimal DFA over 2^ap.

    ``ap`` defaults to the atoms of ``f`` (sorted).  Its order fixes the
    bit layout of letters.
    """
    if isinstance(f, str):
        f = parse(f)
    used = atoms(f)
    ap = tuple(sorted(used)) if ap is None else tuple(dict.fromkeys(ap))
    missing = used - set(ap)
    if missing:
        raise DfaError(f"atoms {sorted(missing)} not in AP {list(ap)}")
    if len(ap) > MAX_AP:
        raise DfaError(f"|AP| = {len(ap)} exceeds the supported maximum of {MAX_AP}")

    letters = [frozenset(a for i, a in enumerate(ap) if m >> i & 1) for m in range(1 << len(ap))]
    # only atoms of f influence progression; collapse letters accordingly
    rel_of = [frozenset(l & used) for l in letters]

    start = _dnf(f)
    index = {start: 0}
    subsets = [start]
    rows: list[list[int]] = []
    cache: dict = {}
    queue = deque([start])
    while queue:
        cur = queue.popleft()
        row = []
        for lt in rel_of:
            key = (cur, lt)
            nxt = cache.get(key)
            if nxt is None:
                nxt = _FALSE
                for clause in cur:
                    nxt = _or(nxt, _clause_step(clause, lt))
                cache[key] = nxt
            if nxt not in index:
                index[nxt] = len(subsets)
                subsets.append(nxt)
                queue.append(nxt)
            row.append(index[nxt])
        rows.append(row)

    accepting = {i for i, d in enumerate(subsets) if any(all(_nullable(g) for g in c) for c in d)}
    delta = np.array(rows, dtype=np.int64)
    for s in accepting:
        delta[s, :] = s
    return minimize(Dfa(ap, delta, 0, frozenset(accepting)))


def _reachable(d: Dfa) -> list[int]:
    seen = {d.initial}
    order = [d.initial]
    queue = deque([d.initial])
    while queue:
        s = queue.popleft()
        for t in d.delta[s]:
            t = int(t)
            if t not in seen:
                seen.add(t)
                order.append(t)
                queue.append(t)
    return order


def minimize(d: Dfa) -> Dfa:
    """Drop unreachable states and merge equivalent ones (Moore refinement).

    Numbering of the result: the initial state is 0, then accepting
    states, then the rest, each group in breadth-first discovery order
    (letters in increasing bitmask order).
    """
    keep = sorted(_reachable(d))
    remap = {s: i for i, s in enumerate(keep)}
    delta = np.array([[remap[int(t)] for t in d.delta[s]] for s in keep], dtype=np.int64)
    acc = np.array([s in d.accepting for s in keep])

    block = acc.astype(np.int64)
    while True:
        sig = np.concatenate([block[:, None], block[delta]], axis=1)
        _, new = np.unique(sig, axis=0, return_inverse=True)
        new = new.ravel()
        if len(np.unique(new)) == len(np.unique(block)):
            block = new
            break
        block = new

    nb = int(block.max()) + 1
    qdelta = np.zeros((nb, delta.shape[1]), dtype=np.int64)
    qacc = set()
    for s in range(len(keep)):
        qdelta[block[s]] = block[delta[s]]
        if acc[s]:
            qacc.add(int(block[s]))
    q = Dfa(d.ap, qdelta, int(block[remap[d.initial]]), frozenset(qacc))

    # canonical numbering
    bfs = _reachable(q)
    order = [q.initial] + [s for s in bfs[1:] if s in q.accepting] + [s for s in bfs[1:] if s not in q.accepting]
    canon = {s: i for i, s in enumerate(order)}
    cdelta = np.array([[canon[int(t)] for t in q.delta[s]] for s in order], dtype=np.int64)
    return Dfa(q.ap, cdelta, 0, frozenset(canon[s] for s in q.accepting))


def is_complete(d: Dfa) -> bool:
    """Accepting states absorb and every transition lands inside the state set."""
    ok = ((d.delta >= 0) & (d.delta < d.n_states)).all()
    return bool(ok) and all((d.delta[s] == s).all() for s in d.accepting)


def letters_of(ap: Sequence[str]) -> list[frozenset]:
    return [frozenset(a for i, a in enumerate(ap) if m >> i & 1) for m in range(1 << len(ap))]


def all_words(n_letters: int, max_len: int):
    for k in range(max_len + 1):
        yield from cartesian(range(n_letters), repeat=k)
