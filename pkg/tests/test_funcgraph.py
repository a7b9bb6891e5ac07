import numpy as np
import pytest
from fractions import Fraction
from hypothesis import given, settings
from hypothesis import strategies as st

from recdyn.errors import ValidationError
from recdyn.funcgraph import (
    analyze,
    degree_of_recurrence,
    rate_of_injectivity_t,
    recurrent_set,
)
from recdyn.grid import FiniteMap, GridSpec


def make_map(succ):
    succ = np.asarray(succ, dtype=np.int64)
    return FiniteMap(GridSpec(1, succ.size), succ)


def brute_eventual_image(succ):
    cur = np.arange(succ.size)
    while True:
        nxt = np.unique(succ[cur])
        if nxt.size == cur.size and np.array_equal(nxt, cur):
            return cur
        cur = nxt


def brute_image_size(succ, t):
    cur = np.arange(succ.size)
    for _ in range(t):
        cur = np.unique(succ[cur])
    return cur.size


def test_worked_eight_point_example():
    fm = make_map([1, 2, 0, 0, 3, 4, 4, 5])
    assert sorted(recurrent_set(fm).tolist()) == [0, 1, 2]
    assert degree_of_recurrence(fm) == 3 / 8
    assert rate_of_injectivity_t(fm, 3) == 4 / 8
    rep = analyze(fm, t_max=8)
    assert rep.card_recurrent == 3
    assert rep.degree_fraction == Fraction(3, 8)
    assert rep.stabilization_t == 4
    assert rep.tau_by_t[:4].tolist() == [6 / 8, 5 / 8, 4 / 8, 3 / 8]
    assert (rep.tau_by_t[4:] == 3 / 8).all()


def test_identity_and_constant_maps():
    ident = make_map(np.arange(100))
    assert recurrent_set(ident).size == 100
    assert degree_of_recurrence(ident) == 1.0

    const = make_map(np.zeros(1024, dtype=np.int64))
    assert recurrent_set(const).tolist() == [0]
    assert degree_of_recurrence(const) == 1 / 1024
    assert rate_of_injectivity_t(const, 1) == 1 / 1024


def test_permutation_has_full_recurrence():
    rng = np.random.default_rng(3)
    perm = rng.permutation(500)
    fm = make_map(perm)
    assert degree_of_recurrence(fm) == 1.0
    for t in (1, 5, 20):
        assert rate_of_injectivity_t(fm, t) == 1.0


@given(st.integers(0, 2 ** 31 - 1), st.integers(2, 4096))
@settings(max_examples=120, deadline=None)
def test_peel_matches_brute_force(seed, size):
    succ = np.random.default_rng(seed).integers(0, size, size=size)
    fm = make_map(succ)
    omega = recurrent_set(fm)
    assert np.array_equal(omega, brute_eventual_image(succ))
    # sigma restricted to omega is a bijection onto omega
    restricted = succ[omega]
    assert np.array_equal(np.unique(restricted), omega)


def test_peel_matches_brute_force_large_batch():
    # the vectorized peel path needs frontiers past the queue cutoff
    rng = np.random.default_rng(99)
    for size in (6000, 10000):
        succ = rng.integers(0, size, size=size)
        fm = make_map(succ)
        assert recurrent_set(fm).size == brute_eventual_image(succ).size


@given(st.integers(0, 2 ** 31 - 1), st.integers(2, 600), st.integers(1, 12))
@settings(max_examples=80, deadline=None)
def test_rate_matches_composition_oracle(seed, size, t):
    succ = np.random.default_rng(seed).integers(0, size, size=size)
    fm = make_map(succ)
    assert rate_of_injectivity_t(fm, t) == brute_image_size(succ, t) / size


@given(st.integers(0, 2 ** 31 - 1), st.integers(2, 1500))
@settings(max_examples=60, deadline=None)
def test_degree_bounds_every_rate(seed, size):
    succ = np.random.default_rng(seed).integers(0, size, size=size)
    fm = make_map(succ)
    rep = analyze(fm, t_max=16)
    assert (np.diff(rep.tau_by_t) <= 1e-15).all()
    assert (rep.tau_by_t >= rep.degree - 1e-15).all()


@given(st.integers(0, 2 ** 31 - 1), st.integers(2, 800))
@settings(max_examples=60, deadline=None)
def test_analyze_taus_match_direct_passes(seed, size):
    succ = np.random.default_rng(seed).integers(0, size, size=size)
    fm = make_map(succ)
    rep = analyze(fm, t_max=10)
    for t in (1, 2, 3, 7, 10):
        assert rep.tau_by_t[t - 1] == rate_of_injectivity_t(fm, t)


def test_stabilization_time_is_first_stable_t():
    rng = np.random.default_rng(17)
    for _ in range(20):
        size = int(rng.integers(5, 400))
        succ = rng.integers(0, size, size=size)
        fm = make_map(succ)
        rep = analyze(fm, t_max=size + 1)
        s = rep.stabilization_t
        omega = recurrent_set(fm).size
        assert brute_image_size(succ, s) == omega
        if s > 0:
            assert brute_image_size(succ, s - 1) > omega


def test_analyze_validates_t_max():
    fm = make_map([0, 0])
    with pytest.raises(ValidationError):
        analyze(fm, t_max=0)
