"""Expanding circle maps, preimage trees, percolation densities, transfer operator.

A degree-d expanding map of the circle has a strictly increasing lift F with
F(x+1) = F(x) + d and F' >= 1.  Every point has exactly d preimages, found by
bisection on the lift.  The depth-k preimage tree, with each edge to a child x
carrying probability 1/F'(x), drives the mean density: the probability that a
random subgraph (each edge kept independently with its probability) connects
the root to some depth-k leaf.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalGuardError, ValidationError

_NODE_CAP = 2 ** 21
_BISECT_ITERS = 60
_VALIDATE_SAMPLES = 4096


@dataclass
class ExpandingCircleMap:
    """Degree-d expanding map of the circle given by its monotone lift."""

    lift: object  # vectorized callable R -> R
    deriv: object  # vectorized derivative of the lift
    degree: int
    name: str = "expanding"
    smoothness: str = "C^inf"

    def __post_init__(self):
        if self.degree < 2:
            raise ValidationError("expanding map must have degree >= 2")
        xs = np.linspace(0.0, 1.0, _VALIDATE_SAMPLES, endpoint=False)
        ds = np.asarray(self.deriv(xs), dtype=np.float64)
        if ds.min() < 1.0 - 1e-12:
            raise ValidationError("lift derivative drops below 1 on sample grid")
        gap = np.asarray(self.lift(xs + 1.0)) - np.asarray(self.lift(xs))
        if np.abs(gap - self.degree).max() > 1e-9:
            raise ValidationError("lift does not satisfy F(x+1) = F(x) + degree")

    def torus_map(self):
        """Callable on (m, 1) coordinate arrays, for grid discretization."""

        def call(points):
            x = np.asarray(points, dtype=np.float64)[:, 0]
            return (np.asarray(self.lift(x), dtype=np.float64) % 1.0)[:, None]

        return call


def doubling_map() -> ExpandingCircleMap:
    return ExpandingCircleMap(lambda x: 2.0 * np.asarray(x, dtype=np.float64),
                              lambda x: np.full_like(np.asarray(x, dtype=np.float64), 2.0),
                              degree=2, name="doubling")


_EPS1 = 0.12794356372
_EPS2 = 0.00824735961


def trig_expanding_map() -> ExpandingCircleMap:
    """Builtin degree-2 map 2x + eps1*cos(2*pi*x) + eps2*sin(6*pi*x).

    The derivative is bounded below by 2 - 2*pi*(eps1 + 3*eps2) > 1, so the
    map is expanding despite the large first harmonic.
    """

    def lift(x):
        x = np.asarray(x, dtype=np.float64)
        return 2.0 * x + _EPS1 * np.cos(2.0 * np.pi * x) + _EPS2 * np.sin(6.0 * np.pi * x)

    def deriv(x):
        x = np.asarray(x, dtype=np.float64)
        return (2.0 - 2.0 * np.pi * _EPS1 * np.sin(2.0 * np.pi * x)
                + 6.0 * np.pi * _EPS2 * np.cos(6.0 * np.pi * x))

    return ExpandingCircleMap(lift, deriv, degree=2, name="expanding-trig")


def _invert_lift(emap: ExpandingCircleMap, targets: np.ndarray) -> np.ndarray:
    """Solve F(x) = t for each target, x in [0, 1), by 60 bisection steps.

    Requires F(0) <= t < F(0) + degree for every target.
    """
    lo = np.zeros_like(targets)
    hi = np.ones_like(targets)
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        below = np.asarray(emap.lift(mid)) <= targets
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return lo


def _tree_sizes(arity: int, depth: int) -> int:
    total = 0
    width = 1
    for _ in range(depth):
        width *= arity
        total += width
        if total > _NODE_CAP:
            raise NumericalGuardError("preimage tree exceeds the node cap (2^21)")
    return total


@dataclass
class DecoratedTree:
    """Complete arity-d tree of given depth with one probability per edge.

    probs[m] has d^(m+1) entries: the edges from depth m to depth m+1, children
    of node i occupying the slots i*d .. i*d + d - 1.
    """

    arity: int
    depth: int
    probs: list

    def __post_init__(self):
        if self.arity < 2:
            raise ValidationError("tree arity must be >= 2")
        if self.depth < 1:
            raise ValidationError("tree depth must be >= 1")
        _tree_sizes(self.arity, self.depth)
        if len(self.probs) != self.depth:
            raise ValidationError("need one probability level per depth")
        probs = []
        for m, level in enumerate(self.probs):
            level = np.asarray(level, dtype=np.float64)
            if level.shape != (self.arity ** (m + 1),):
                raise ValidationError("probability level has wrong width")
            if (level <= 0).any() or (level > 1).any():
                raise ValidationError("edge probabilities must lie in (0, 1]")
            probs.append(level)
        self.probs = probs


@dataclass
class PreimageTree:
    """Preimage tree of a point: node values plus the decorated-tree weights."""

    root: float
    xs: list  # xs[m]: d^(m+1) preimage points at depth m+1
    tree: DecoratedTree


def preimages(emap: ExpandingCircleMap, y: float, depth: int) -> PreimageTree:
    """Depth-m preimage tree of y, edges weighted by 1/F'(child)."""
    if depth < 1:
        raise ValidationError("preimage depth must be >= 1")
    _tree_sizes(emap.degree, depth)
    d = emap.degree
    f0 = float(np.asarray(emap.lift(0.0)))
    xs_levels = []
    prob_levels = []
    parents = np.array([float(y) % 1.0])
    for _ in range(depth):
        base = np.ceil(f0 - parents)
        targets = (parents[:, None] + base[:, None] + np.arange(d)[None, :]).reshape(-1)
        children = _invert_lift(emap, targets)
        residual = np.abs(np.asarray(emap.lift(children)) - targets)
        if residual.max() > 1e-9:
            raise NumericalGuardError("preimage bisection failed to converge")
        xs_levels.append(children)
        prob_levels.append(1.0 / np.asarray(emap.deriv(children), dtype=np.float64))
        parents = children
    return PreimageTree(float(y) % 1.0, xs_levels, DecoratedTree(d, depth, prob_levels))


def tree_density(tree: DecoratedTree) -> float:
    """P(root connects to a deepest leaf) in the independent-edge random subgraph.

    Bottom-up: a leaf is reached with probability 1 given its edge is open, and
    an internal node reaches depth iff at least one child edge is open and the
    child reaches depth.
    """
    value = np.ones(tree.arity ** tree.depth)
    for m in range(tree.depth - 1, -1, -1):
        open_and_reach = tree.probs[m] * value
        value = 1.0 - (1.0 - open_and_reach).reshape(-1, tree.arity).prod(axis=1)
    return float(value[0])


@dataclass
class TreeSurvivalMC:
    prob: float
    prob_se: float
    mean_leaves: float
    mean_leaves_se: float
    trials: int


def tree_survival_mc(tree: DecoratedTree, trials: int, seed: int,
                     chunk: int = 20_000) -> TreeSurvivalMC:
    """Simulate the random subgraph; estimate P(survival) and E(#reached leaves)."""
    if trials < 1:
        raise ValidationError("need at least one trial")
    rng = np.random.default_rng(seed)
    pos = 0
    leaf_sum = 0.0
    leaf_sq = 0.0
    done = 0
    while done < trials:
        c = min(chunk, trials - done)
        reach = np.ones((c, 1), dtype=bool)
        for m in range(tree.depth):
            edges = rng.random((c, tree.probs[m].size)) < tree.probs[m][None, :]
            reach = np.repeat(reach, tree.arity, axis=1) & edges
        counts = reach.sum(axis=1)
        pos += int((counts > 0).sum())
        leaf_sum += float(counts.sum())
        leaf_sq += float((counts.astype(np.float64) ** 2).sum())
        done += c
    p = pos / trials
    mean = leaf_sum / trials
    var = max(leaf_sq / trials - mean ** 2, 0.0)
    return TreeSurvivalMC(
        prob=p,
        prob_se=float(np.sqrt(p * (1 - p) / trials)),
        mean_leaves=mean,
        mean_leaves_se=float(np.sqrt(var / trials)),
        trials=trials,
    )


def tree_density_mc(tree: DecoratedTree, trials: int, seed: int) -> tuple[float, float]:
    mc = tree_survival_mc(tree, trials, seed)
    return mc.prob, mc.prob_se


def mean_density_at(emap: ExpandingCircleMap, y: float, depth: int) -> float:
    """Mean density integrand: survival probability of the preimage tree of y."""
    return tree_density(preimages(emap, y, depth).tree)


def expected_children(emap: ExpandingCircleMap, y: float, depth: int,
                      trials: int, seed: int) -> tuple[float, float]:
    """MC estimate of E(number of depth-m nodes connected to the root)."""
    mc = tree_survival_mc(preimages(emap, y, depth).tree, trials, seed)
    return mc.mean_leaves, mc.mean_leaves_se


class TransferOperator:
    """The weighted transfer operator on densities sampled over a uniform grid.

    (L phi)(y) = sum over preimages x of y of phi(x) / F'(x); phi is stored at
    the M grid points j/M and evaluated by periodic linear interpolation.
    """

    def __init__(self, emap: ExpandingCircleMap, M: int):
        if M < 16:
            raise ValidationError("transfer grid needs M >= 16")
        self.emap = emap
        self.M = M
        ys = np.arange(M, dtype=np.float64) / M
        f0 = float(np.asarray(emap.lift(0.0)))
        base = np.ceil(f0 - ys)
        targets = (ys[:, None] + base[:, None] + np.arange(emap.degree)[None, :])
        self.xs = _invert_lift(emap, targets)
        self.weights = 1.0 / np.asarray(emap.deriv(self.xs), dtype=np.float64)

    def interp(self, phi: np.ndarray, x: np.ndarray) -> np.ndarray:
        pos = np.asarray(x, dtype=np.float64) % 1.0 * self.M
        i0 = np.floor(pos).astype(np.int64)
        frac = pos - i0
        return phi[i0 % self.M] * (1.0 - frac) + phi[(i0 + 1) % self.M] * frac

    def apply(self, phi: np.ndarray) -> np.ndarray:
        phi = np.asarray(phi, dtype=np.float64)
        if phi.shape != (self.M,):
            raise ValidationError("density has wrong grid size")
        if (phi < 0).any():
            raise ValidationError("density must be nonnegative")
        return (self.interp(phi, self.xs) * self.weights).sum(axis=1)

    def iterates_of_one(self, m: int) -> list:
        out = []
        phi = np.ones(self.M)
        for _ in range(m):
            phi = self.apply(phi)
            out.append(phi)
        return out


def transfer_operator_apply(emap: ExpandingCircleMap, phi) -> np.ndarray:
    """One application of the transfer operator to a grid-sampled density."""
    phi = np.asarray(phi, dtype=np.float64)
    return TransferOperator(emap, phi.size).apply(phi)


def local_global_tau_expanding(emap: ExpandingCircleMap, k: int,
                               quad_points: int = 256) -> float:
    """Midpoint-rule integral over y of the depth-k preimage-tree density."""
    if quad_points < 64:
        raise ValidationError("need at least 64 quadrature points")
    ys = (np.arange(quad_points) + 0.5) / quad_points
    vals = [mean_density_at(emap, y, k) for y in ys]
    return float(np.mean(vals))
