import numpy as np
import pytest

from recdyn.errors import ValidationError
from recdyn.expanding import trig_expanding_map
from recdyn.funcgraph import degree_of_recurrence
from recdyn.grid import GridSpec, discretize
from recdyn.localglobal import (
    Cocycle,
    TrigSum,
    builtin_names,
    circle_as_torus_map,
    cocycle,
    contracting_perturbation,
    get_builtin,
    identity_map,
    linear_toral_map,
    shear_pair_map,
    tau_k_integral,
)


def fd_jacobian(smap, pts, h=1e-6):
    """Central differences through map_fn; inputs stay away from wrap issues."""
    m = pts.shape[0]
    out = np.empty((m, smap.dim, smap.dim))
    for j in range(smap.dim):
        dp = np.zeros(smap.dim)
        dp[j] = h
        out[:, :, j] = (smap.map_fn(pts + dp) - smap.map_fn(pts - dp)) / (2 * h)
    return out


def test_trig_sum_deriv_matches_finite_difference():
    ts = TrigSum(
        cos_coeffs=(0.3, -0.1), cos_freqs=(2, 5), sin_coeffs=(0.2,), sin_freqs=(3,)
    )
    xs = np.linspace(0.0, 1.0, 101)
    h = 1e-6
    fd = (ts(xs + h) - ts(xs - h)) / (2 * h)
    assert np.abs(ts.deriv(xs) - fd).max() <= 1e-6


def test_shear_pair_is_volume_preserving():
    f = shear_pair_map()
    assert f.conservative
    assert f.max_det_deviation(n_samples=10_000, seed=0) <= 1e-9


def test_builtin_jacobians_match_finite_difference():
    rng = np.random.default_rng(0)
    for name in builtin_names():
        smap = get_builtin(name)
        pts = rng.uniform(0.1, 0.9, size=(64, smap.dim))
        exact = smap.jacobian(pts)
        fd = fd_jacobian(smap, pts)
        assert np.abs(exact - fd).max() <= 1e-5, name


def test_shear_pair_inverse_round_trip():
    f = shear_pair_map()
    rng = np.random.default_rng(1)
    pts = rng.random((200, 2))
    back = f.inverse(f(pts))
    dist = np.abs(back - pts)
    assert np.minimum(dist, 1.0 - dist).max() <= 1e-12


def test_identity_map_and_cocycle():
    ident = identity_map(2)
    c = cocycle(ident, np.array([0.3, 0.4]), k=4)
    assert c.length == 4
    assert np.abs(c.matrices - np.eye(2)).max() == 0.0
    assert np.array_equal(c.prefix_product(2), np.eye(2))


def test_cocycle_chain_rule_matches_finite_difference():
    f = shear_pair_map()
    x = np.array([0.312, 0.477])
    k = 3
    c = cocycle(f, x, k)
    assert isinstance(c, Cocycle)

    def iterate(p):
        q = np.atleast_2d(p)
        for _ in range(k):
            q = f.map_fn(q)
        return q[0]

    h = 1e-6
    fd = np.empty((2, 2))
    for j in range(2):
        dp = np.zeros(2)
        dp[j] = h
        fd[:, j] = (iterate(x + dp) - iterate(x - dp)) / (2 * h)
    assert np.abs(c.prefix_product() - fd).max() <= 1e-4


def test_cocycle_matrix_seq_round_trip():
    f = shear_pair_map()
    c = cocycle(f, np.array([0.1, 0.9]), k=5)
    seq = c.matrix_seq(conservative=True)
    assert seq.k == 5
    for i in range(5):
        assert np.array_equal(seq.mats[i], c.matrices[i])


def test_registry_names_and_aliases():
    names = builtin_names()
    for expected in ("identity", "shear-pair", "dissipative", "expanding-trig", "doubling"):
        assert expected in names
    assert get_builtin("paper-diffeo").name == "shear-pair"
    assert get_builtin("paper-expanding").name == "expanding-trig"
    with pytest.raises(ValidationError):
        get_builtin("no-such-map")


def test_linear_toral_map():
    cat = linear_toral_map([[2, 1], [1, 1]])
    assert cat.conservative
    rng = np.random.default_rng(2)
    pts = rng.random((100, 2))
    back = cat.inverse(cat(pts))
    dist = np.abs(back - pts)
    assert np.minimum(dist, 1.0 - dist).max() <= 1e-9
    with pytest.raises(ValidationError):
        linear_toral_map([[1.5, 0], [0, 1]])
    with pytest.raises(ValidationError):
        linear_toral_map([[1, 1], [1, 1]])


def test_contracting_perturbation_loses_volume():
    g = contracting_perturbation(strength=0.2)
    assert not g.conservative
    assert g.max_det_deviation(n_samples=2000, seed=3) > 0.01
    with pytest.raises(ValidationError):
        contracting_perturbation(strength=0.0)
    with pytest.raises(ValidationError):
        contracting_perturbation(strength=1.0)


def test_dissipative_map_recurs_less_than_conservative():
    spec = GridSpec(2, 512)
    d_cons = degree_of_recurrence(discretize(get_builtin("shear-pair"), spec))
    d_diss = degree_of_recurrence(discretize(get_builtin("dissipative"), spec))
    assert d_diss < d_cons


def test_circle_map_wrapper_matches_lift():
    g = trig_expanding_map()
    smap = circle_as_torus_map(g)
    assert smap.dim == 1
    xs = np.linspace(0.0, 1.0, 200, endpoint=False)[:, None]
    assert np.abs(smap(xs)[:, 0] - np.asarray(g.lift(xs[:, 0])) % 1.0).max() <= 1e-12
    assert np.abs(smap.jacobian(xs)[:, 0, 0] - np.asarray(g.deriv(xs[:, 0]))).max() == 0.0


def test_smooth_map_rejects_wrong_dimension():
    f = shear_pair_map()
    with pytest.raises(ValidationError):
        f(np.zeros((3, 3)))
    with pytest.raises(ValidationError):
        f.jacobian(np.zeros((3, 1)))
    with pytest.raises(ValidationError):
        contracting_perturbation().inverse(np.zeros((1, 2)))


def test_tau_integral_identity_is_exact():
    res = tau_k_integral(identity_map(2), k=2, samples=32, mc_per_point=500, seed=0)
    assert res.estimate == 1.0
    assert res.std_error == 0.0
    assert res.point_estimates.shape == (32,)


def test_tau_integral_decreases_with_k():
    f = shear_pair_map()
    r1 = tau_k_integral(f, k=1, samples=32, mc_per_point=20_000, seed=1)
    r8 = tau_k_integral(f, k=8, samples=32, mc_per_point=20_000, seed=1)
    assert r8.estimate < r1.estimate


def test_tau_integral_reproducible():
    f = shear_pair_map()
    a = tau_k_integral(f, k=2, samples=32, mc_per_point=2000, seed=7)
    b = tau_k_integral(f, k=2, samples=32, mc_per_point=2000, seed=7)
    assert a.estimate == b.estimate
    assert a.std_error == b.std_error


def test_tau_integral_validation():
    f = shear_pair_map()
    with pytest.raises(ValidationError):
        tau_k_integral(f, k=0, samples=32, mc_per_point=100, seed=0)
    with pytest.raises(ValidationError):
        tau_k_integral(f, k=1, samples=31, mc_per_point=100, seed=0)
