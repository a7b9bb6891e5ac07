"""Builtin torus diffeomorphisms, derivative cocycles, and the rate integral.

The smooth side of the story: a handful of maps with hand-written Jacobians
(so the cocycle is exact, not differenced), and the Monte Carlo average of
the lattice mean rate over random orbits, which ties the smooth dynamics to
the linear theory.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ValidationError
from .expanding import ExpandingCircleMap, doubling_map, trig_expanding_map
from .lindisc import MatrixSeq
from .modelset import MeanRateResult, mean_rate

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class TrigSum:
    """Finite trigonometric sum  sum_i c_i cos(2 pi a_i x) + sum_j s_j sin(2 pi b_j x)."""

    cos_coeffs: tuple = ()
    cos_freqs: tuple = ()
    sin_coeffs: tuple = ()
    sin_freqs: tuple = ()

    def __post_init__(self):
        if len(self.cos_coeffs) != len(self.cos_freqs):
            raise ValidationError("cosine coefficient/frequency lengths differ")
        if len(self.sin_coeffs) != len(self.sin_freqs):
            raise ValidationError("sine coefficient/frequency lengths differ")

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        out = np.zeros_like(x)
        for c, a in zip(self.cos_coeffs, self.cos_freqs):
            out += c * np.cos(TWO_PI * a * x)
        for s, b in zip(self.sin_coeffs, self.sin_freqs):
            out += s * np.sin(TWO_PI * b * x)
        return out

    def deriv(self, x):
        x = np.asarray(x, dtype=np.float64)
        out = np.zeros_like(x)
        for c, a in zip(self.cos_coeffs, self.cos_freqs):
            out -= c * TWO_PI * a * np.sin(TWO_PI * a * x)
        for s, b in zip(self.sin_coeffs, self.sin_freqs):
            out += s * TWO_PI * b * np.cos(TWO_PI * b * x)
        return out


@dataclass(frozen=True)
class SmoothMap:
    """A torus map with an analytic Jacobian.

    `map_fn` takes an (m, n) array of points and returns their images reduced
    mod 1; `jac_fn` returns the (m, n, n) stack of derivatives.  Conservative
    maps promise |det Df - 1| tiny everywhere, which downstream code checks by
    sampling rather than trusting.
    """

    name: str
    dim: int
    map_fn: Callable[[np.ndarray], np.ndarray]
    jac_fn: Callable[[np.ndarray], np.ndarray]
    conservative: bool
    inverse_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __call__(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=np.float64))
        if points.shape[1] != self.dim:
            raise ValidationError("points have wrong dimension for this map")
        return np.mod(self.map_fn(points), 1.0)

    def jacobian(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=np.float64))
        if points.shape[1] != self.dim:
            raise ValidationError("points have wrong dimension for this map")
        return self.jac_fn(points)

    def inverse(self, points: np.ndarray) -> np.ndarray:
        if self.inverse_fn is None:
            raise ValidationError(f"map {self.name!r} has no builtin inverse")
        points = np.atleast_2d(np.asarray(points, dtype=np.float64))
        return np.mod(self.inverse_fn(points), 1.0)

    def max_det_deviation(self, n_samples: int = 10_000, seed: int = 0) -> float:
        """Largest |det Df - 1| over uniform random sample points."""
        rng = np.random.default_rng(seed)
        pts = rng.random((n_samples, self.dim))
        dets = np.linalg.det(self.jacobian(pts))
        return float(np.max(np.abs(dets - 1.0)))


def identity_map(dim: int = 2) -> SmoothMap:
    eye = np.eye(dim)

    def _map(p):
        return p

    def _jac(p):
        return np.broadcast_to(eye, (p.shape[0], dim, dim)).copy()

    return SmoothMap("identity", dim, _map, _jac, conservative=True,
                     inverse_fn=lambda p: p)


# The standard C^1-small conservative example: a vertical shear followed by a
# horizontal one, each driven by a short trigonometric sum.  With the default
# coefficients below the map is close to the identity yet has rich enough
# derivatives for the mean rates to decay visibly.
_P_SUM = TrigSum(cos_coeffs=(1 / 209, -1 / 703), cos_freqs=(17, 35),
                 sin_coeffs=(1 / 271,), sin_freqs=(27,))
_Q_SUM = TrigSum(cos_coeffs=(1 / 287,), cos_freqs=(15,),
                 sin_coeffs=(1 / 203, -1 / 841), sin_freqs=(27, 38))


def shear_pair_map(p: TrigSum = _P_SUM, q: TrigSum = _Q_SUM,
                   name: str = "shear-pair") -> SmoothMap:
    """Composition of the vertical shear (x, y+p(x)) and horizontal (x+q(y), y).

    Both factors are volume preserving, and the Jacobian is the product of two
    unipotent triangular matrices, so det = 1 identically.
    """

    def _map(pts):
        x, y = pts[:, 0], pts[:, 1]
        ymid = y + p(x)
        return np.stack([x + q(ymid), ymid], axis=1)

    def _jac(pts):
        x, y = pts[:, 0], pts[:, 1]
        dp = p.deriv(x)
        dq = q.deriv(y + p(x))  # evaluated at the sheared second coordinate
        m = pts.shape[0]
        out = np.empty((m, 2, 2))
        out[:, 0, 0] = 1.0 + dq * dp
        out[:, 0, 1] = dq
        out[:, 1, 0] = dp
        out[:, 1, 1] = 1.0
        return out

    def _inv(pts):
        u, v = pts[:, 0], pts[:, 1]
        x = u - q(v)
        return np.stack([x, v - p(x)], axis=1)

    return SmoothMap(name, 2, _map, _jac, conservative=True, inverse_fn=_inv)


def linear_toral_map(matrix, name: str = "linear") -> SmoothMap:
    """Toral endomorphism induced by an integer matrix."""
    mat = np.asarray(matrix, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValidationError("linear toral map needs a square matrix")
    if not np.allclose(mat, np.round(mat)):
        raise ValidationError("linear toral map needs integer entries")
    mat = np.round(mat)
    dim = mat.shape[0]
    det = round(float(np.linalg.det(mat)))
    if det == 0:
        raise ValidationError("matrix is singular over the integers")
    inv = None
    if abs(det) == 1:
        inv_mat = np.round(np.linalg.inv(mat))

        def inv(p, _m=inv_mat):
            return p @ _m.T

    def _map(p):
        return p @ mat.T

    def _jac(p):
        return np.broadcast_to(mat, (p.shape[0], dim, dim)).copy()

    return SmoothMap(name, dim, _map, _jac, conservative=(abs(det) == 1),
                     inverse_fn=inv)


def contracting_perturbation(base: SmoothMap | None = None,
                             strength: float = 0.15) -> SmoothMap:
    """Dissipative variant: follow `base` with a coordinatewise contraction.

    The post-map x -> x - (strength / 2 pi) sin(2 pi x) fixes the integer
    points and pulls everything toward them; det Df drifts below 1 on most of
    the torus, so recurrent mass should collapse much faster than in the
    conservative case.
    """
    if not 0.0 < strength < 1.0:
        raise ValidationError("contraction strength must lie in (0, 1)")
    if base is None:
        base = shear_pair_map()
    amp = strength / TWO_PI

    def _contract(p):
        return p - amp * np.sin(TWO_PI * p)

    def _contract_deriv(p):
        return 1.0 - strength * np.cos(TWO_PI * p)

    def _map(pts):
        return _contract(np.mod(base.map_fn(pts), 1.0))

    def _jac(pts):
        mid = np.mod(base.map_fn(pts), 1.0)
        jb = base.jac_fn(pts)
        scale = _contract_deriv(mid)  # diagonal factor, one entry per coordinate
        return scale[:, :, None] * jb

    return SmoothMap(f"dissipative({base.name})", base.dim, _map, _jac,
                     conservative=False)


def circle_as_torus_map(emap: ExpandingCircleMap) -> SmoothMap:
    """Wrap a circle map so grid discretization can treat every builtin alike."""

    def _map(pts):
        return np.mod(emap.lift(pts[:, 0]), 1.0)[:, None]

    def _jac(pts):
        return emap.deriv(pts[:, 0])[:, None, None]

    return SmoothMap(emap.name, 1, _map, _jac, conservative=False)


_BUILTINS: dict[str, Callable[[], SmoothMap]] = {
    "identity": identity_map,
    "shear-pair": shear_pair_map,
    "dissipative": contracting_perturbation,
    "expanding-trig": lambda: circle_as_torus_map(trig_expanding_map()),
    "doubling": lambda: circle_as_torus_map(doubling_map()),
}

# Compatibility spellings kept for scripts written against older names.
_ALIASES = {
    "paper-diffeo": "shear-pair",
    "paper-expanding": "expanding-trig",
}


def builtin_names() -> list[str]:
    return sorted(_BUILTINS)


def get_builtin(name: str) -> SmoothMap:
    key = _ALIASES.get(name, name)
    try:
        factory = _BUILTINS[key]
    except KeyError:
        known = ", ".join(builtin_names())
        raise ValidationError(f"unknown builtin map {name!r} (known: {known})")
    return factory()


@dataclass(frozen=True)
class Cocycle:
    """Derivative matrices along a finite orbit segment.

    matrices[i] is the Jacobian at the i-th orbit point, so matrices[0] acts
    first; the product over a prefix is the derivative of the iterated map.
    """

    base: np.ndarray
    matrices: np.ndarray  # (k, n, n)

    @property
    def length(self) -> int:
        return self.matrices.shape[0]

    def prefix_product(self, j: int | None = None) -> np.ndarray:
        """Jacobian of the j-th iterate at the base point."""
        if j is None:
            j = self.length
        if not 1 <= j <= self.length:
            raise ValidationError("prefix length out of range")
        out = self.matrices[0].copy()
        for i in range(1, j):
            out = self.matrices[i] @ out
        return out

    def matrix_seq(self, conservative: bool = False) -> MatrixSeq:
        return MatrixSeq(self.matrices.shape[1], tuple(self.matrices),
                         conservative=conservative)


def cocycle(f: SmoothMap, x, k: int) -> Cocycle:
    """Jacobians of f along x, f(x), ..., f^{k-1}(x)."""
    if k < 1:
        raise ValidationError("cocycle length must be at least 1")
    pts = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if pts.shape != (1, f.dim):
        raise ValidationError("base point has wrong dimension")
    mats = np.empty((k, f.dim, f.dim))
    cur = np.mod(pts, 1.0)
    for i in range(k):
        mats[i] = f.jacobian(cur)[0]
        if i + 1 < k:
            cur = f(cur)
    return Cocycle(base=np.mod(pts[0], 1.0), matrices=mats)


def _orbit_jacobians(f: SmoothMap, points: np.ndarray, k: int) -> np.ndarray:
    """Jacobian stacks for many base points at once, shape (m, k, n, n)."""
    m = points.shape[0]
    mats = np.empty((m, k, f.dim, f.dim))
    cur = np.mod(points, 1.0)
    for i in range(k):
        mats[:, i] = f.jacobian(cur)
        if i + 1 < k:
            cur = f(cur)
    return mats


@dataclass
class TauIntegralResult:
    estimate: float
    std_error: float
    k: int
    samples: int
    mc_per_point: int
    seed: int
    point_estimates: np.ndarray = field(repr=False)


def tau_k_integral(f: SmoothMap, k: int, samples: int, mc_per_point: int,
                   seed: int) -> TauIntegralResult:
    """Average the cocycle mean rate over uniform random base points.

    Two error layers: scatter of the true per-point rates across the torus,
    and the Monte Carlo noise inside each per-point estimate.  The empirical
    variance of the point estimates already contains both, but with a few
    hundred base points it is itself noisy, so the inner layer is added once
    more; the reported std_error is deliberately an upper bound.
    """
    if samples < 32:
        raise ValidationError("need at least 32 base points")
    if k < 1:
        raise ValidationError("k must be at least 1")
    root = np.random.SeedSequence(seed)
    base_bits, mc_bits = root.spawn(2)
    rng = np.random.default_rng(base_bits)
    points = rng.random((samples, f.dim))
    jac_stacks = _orbit_jacobians(f, points, k)
    child_seeds = mc_bits.generate_state(samples)

    estimates = np.empty(samples)
    inner_var = np.empty(samples)
    for i in range(samples):
        seq = MatrixSeq(f.dim, tuple(jac_stacks[i]),
                        conservative=f.conservative)
        res = mean_rate(seq, mc_per_point, int(child_seeds[i]))
        estimates[i] = res.estimate
        inner_var[i] = res.std_error ** 2

    est = float(estimates.mean())
    var_between = float(estimates.var(ddof=1)) if samples > 1 else 0.0
    se = float(np.sqrt(var_between / samples + inner_var.mean() / samples))
    return TauIntegralResult(est, se, k, samples, mc_per_point, seed,
                             point_estimates=estimates)
