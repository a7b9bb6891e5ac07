"""Combinatorics of finite self-maps viewed as functional graphs.

Every total map sigma of a finite set E decomposes into a union of cycles
(the recurrent set, equal to the eventual image of every point) together with
in-trees hanging off the cycles.  The degree of recurrence is
|recurrent set| / |E|, and the rate of injectivity at time t is
|sigma^t(E)| / |E|, which decreases to the degree as t grows.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ValidationError
from .grid import FiniteMap

# Below this frontier size the peel switches from vectorized rounds to a
# plain queue, which is faster once per-round numpy overhead dominates.
_SMALL_FRONTIER = 2048


def _peel(succ: np.ndarray):
    """Remove nodes of in-degree zero until none remain.

    Returns (alive, round_sizes): alive marks the recurrent set (union of
    cycles); round_sizes[r] is the number of nodes removed in round r+1.
    A node removed in round r+1 has longest incoming chain of length r, so
    len(round_sizes) is the first t with sigma^t(E) equal to the recurrent set.
    """
    size = succ.size
    indeg = np.bincount(succ, minlength=size)
    alive = np.ones(size, dtype=bool)
    frontier = np.flatnonzero(indeg == 0)
    round_sizes = []
    while frontier.size >= _SMALL_FRONTIER:
        round_sizes.append(int(frontier.size))
        alive[frontier] = False
        targets = succ[frontier]
        indeg -= np.bincount(targets, minlength=size)
        cand = np.unique(targets)
        frontier = cand[indeg[cand] == 0]
    if frontier.size:
        # queue tail: rounds tracked by sentinel so round accounting survives
        queue = deque(frontier.tolist())
        queue.append(-1)
        current = 0
        while queue:
            node = queue.popleft()
            if node == -1:
                if current:
                    round_sizes.append(current)
                    current = 0
                if queue:
                    queue.append(-1)
                continue
            alive[node] = False
            current += 1
            nxt = succ[node]
            indeg[nxt] -= 1
            if indeg[nxt] == 0:
                queue.append(int(nxt))
    return alive, round_sizes


def recurrent_set(fm: FiniteMap) -> np.ndarray:
    """Indices of the union of periodic orbits (the eventual image)."""
    alive, _ = _peel(fm.succ)
    return np.flatnonzero(alive)


def degree_of_recurrence(fm: FiniteMap) -> float:
    alive, _ = _peel(fm.succ)
    return int(alive.sum()) / fm.succ.size


def rate_of_injectivity_t(fm: FiniteMap, t: int) -> float:
    """|sigma^t(E)| / |E| by repeated image passes over a boolean membership array."""
    if t < 0:
        raise ValidationError("t must be >= 0")
    size = fm.succ.size
    current = np.ones(size, dtype=bool)
    for _ in range(t):
        nxt = np.zeros(size, dtype=bool)
        nxt[fm.succ[current]] = True
        current = nxt
    return int(current.sum()) / size


@dataclass
class RecurrenceReport:
    """Full recurrence summary of one finite map."""

    card: int
    card_recurrent: int
    degree: float
    degree_fraction: Fraction
    stabilization_t: int
    tau_by_t: np.ndarray  # tau^1 .. tau^t_max


def analyze(fm: FiniteMap, t_max: int = 64) -> RecurrenceReport:
    """Peel once; derive degree, stabilization time, and the tau sequence.

    |sigma^t(E)| equals |recurrent| plus the number of nodes peeled in rounds
    after t, so the whole tau sequence comes out of the peel round sizes.
    `rate_of_injectivity_t` recomputes any entry independently.
    """
    if t_max < 1:
        raise ValidationError("t_max must be >= 1")
    alive, round_sizes = _peel(fm.succ)
    size = fm.succ.size
    card_rec = int(alive.sum())
    suffix = np.zeros(t_max + 1, dtype=np.int64)
    for r, count in enumerate(round_sizes):
        # nodes peeled in round r+1 still belong to sigma^t(E) for t <= r
        if r >= 1:
            suffix[1 : min(r, t_max) + 1] += count
    taus = (card_rec + suffix[1:]) / size
    return RecurrenceReport(
        card=size,
        card_recurrent=card_rec,
        degree=card_rec / size,
        degree_fraction=Fraction(card_rec, size),
        stabilization_t=len(round_sizes),
        tau_by_t=taus,
    )
