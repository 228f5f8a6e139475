import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from su2synth.errors import BranchSingularityWarning
from su2synth.su2 import (
    I_X,
    I_Y,
    I_Z,
    IDENTITY,
    TWO_PI,
    compose,
    dagger,
    exp_map,
    group_distance,
    hat,
    is_special_unitary,
    log_map,
)

coords = st.floats(-4.0, 4.0, allow_nan=False)
points = st.tuples(coords, coords, coords).map(np.array)


def expm_oracle(x):
    # scipy's expm is Pade scaling-and-squaring, independent of the closed form
    return expm(-1j * hat(x))


def in_ball(x, r_max):
    r = np.linalg.norm(x)
    return x if r <= r_max else x * (r_max / r)


def test_commutators():
    def comm(A, B):
        return A @ B - B @ A

    np.testing.assert_array_equal(comm(I_X, I_Z), -1j * I_Y)
    np.testing.assert_array_equal(comm(I_Z, I_Y), -1j * I_X)
    np.testing.assert_array_equal(comm(I_Y, I_X), -1j * I_Z)
    for G in (I_X, I_Y, I_Z):
        assert np.trace(G) == 0
        np.testing.assert_allclose(np.linalg.eigvalsh(G), [-0.5, 0.5])


@pytest.mark.parametrize("x, expected", [
    ((0, 0, 0), IDENTITY),
    ((TWO_PI, 0, 0), -IDENTITY),
    ((math.pi, 0, 0), np.array([[0, -1j], [-1j, 0]])),
])
def test_exp_map_examples(x, expected):
    U = exp_map(np.array(x, dtype=float))
    np.testing.assert_allclose(U, expected, atol=1e-15)
    np.testing.assert_allclose(U, expm_oracle(x), atol=1e-14)


@settings(max_examples=200, deadline=None)
@given(points)
def test_exp_map_matches_expm_and_is_special_unitary(x):
    U = exp_map(x)
    assert is_special_unitary(U)
    np.testing.assert_allclose(U, expm_oracle(x), atol=1e-13)


def test_exp_map_continuous_at_origin():
    for eps in (1e-4, 1e-7, 1e-9, 1e-12):
        x = np.array([eps, -2 * eps, eps])
        np.testing.assert_allclose(exp_map(x), expm_oracle(x), atol=1e-15)


def test_log_map_examples():
    np.testing.assert_array_equal(log_map(IDENTITY), [0, 0, 0])
    np.testing.assert_allclose(log_map(np.array([[0, -1j], [-1j, 0]])), [math.pi, 0, 0], atol=1e-15)
    np.testing.assert_allclose(log_map(exp_map(np.array([0.3, 0.4, 0.5]))), [0.3, 0.4, 0.5], atol=1e-14)


def test_log_map_minus_identity_flags():
    with pytest.warns(BranchSingularityWarning):
        x = log_map(-IDENTITY)
    np.testing.assert_array_equal(x, [TWO_PI, 0, 0])


@settings(max_examples=200, deadline=None)
@given(points)
def test_log_exp_round_trip(x):
    x = in_ball(x, TWO_PI - 1e-3)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        y = log_map(exp_map(x))
    assert np.linalg.norm(y) <= TWO_PI + 1e-12
    assert np.linalg.norm(exp_map(y) - exp_map(x)) <= 1e-9
    np.testing.assert_allclose(y, x, atol=1e-8)


def test_exp_map_injective_inside_branch_sphere(rng):
    xs = rng.normal(size=(300, 3))
    xs *= (rng.uniform(0, TWO_PI - 0.05, 300) / np.linalg.norm(xs, axis=1))[:, None]
    Us = np.array([exp_map(x) for x in xs])
    for i in range(len(xs)):
        d = np.linalg.norm(Us - Us[i], axis=(1, 2))
        close = np.flatnonzero(d < 1e-9)
        assert list(close) == [i]
    # the whole radius-2pi sphere collapses onto -I
    for x in xs[:10]:
        y = x / np.linalg.norm(x) * TWO_PI
        np.testing.assert_allclose(exp_map(y), -IDENTITY, atol=1e-14)


@settings(max_examples=100, deadline=None)
@given(points, st.floats(0.0, 1.0))
def test_one_parameter_subgroup(x, s):
    np.testing.assert_allclose(compose(exp_map(s * x), exp_map((1 - s) * x)), exp_map(x), atol=1e-9)


def test_compose_examples():
    U = exp_map(np.array([0.2, -0.7, 1.1]))
    np.testing.assert_allclose(compose(IDENTITY, U), U)
    np.testing.assert_allclose(compose(U, dagger(U)), IDENTITY, atol=1e-15)
    P = exp_map(np.array([math.pi, 0, 0]))
    np.testing.assert_allclose(compose(P, P), -IDENTITY, atol=1e-15)
    np.testing.assert_allclose(compose(P, P), P @ P)


def test_group_distance_examples():
    U = exp_map(np.array([0.1, 0.2, 0.3]))
    assert group_distance(U, U) == 0.0
    assert group_distance(IDENTITY, -IDENTITY) == pytest.approx(2 * math.sqrt(2), abs=1e-15)
    theta = 1.0
    direct = np.linalg.norm(IDENTITY - expm_oracle((theta, 0, 0)))
    assert group_distance(IDENTITY, exp_map(np.array([theta, 0, 0]))) == pytest.approx(direct, abs=1e-15)
    assert direct == pytest.approx(2 * math.sqrt(2) * abs(math.sin(theta / 4)), abs=1e-15)


def test_group_distance_monotone_along_axis():
    thetas = np.linspace(0, TWO_PI, 200)
    d = [group_distance(IDENTITY, exp_map(np.array([t, 0, 0]))) for t in thetas]
    assert np.all(np.diff(d) > 0)


@settings(max_examples=100, deadline=None)
@given(points, points, points, points)
def test_group_distance_metric_properties(x, y, g, k):
    U, W, G, K = map(exp_map, (x, y, g, k))
    d = group_distance(U, W)
    assert d >= 0
    assert d == pytest.approx(group_distance(W, U), abs=1e-14)
    assert group_distance(G @ U @ K, G @ W @ K) == pytest.approx(d, abs=1e-12)
