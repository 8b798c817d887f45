import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qrdyn.errors import DomainError
from qrdyn.geometry import (BallMobius, Isometry, chordal_distance, infinity, is_infinite, mobius_add,
                            rotation_about, safe_norm)

coords = st.floats(-1e6, 1e6, allow_nan=False)
points3 = arrays(np.float64, 3, elements=coords)


def stereographic(x):
    """Inverse stereographic projection onto the unit sphere in R^{n+1}."""
    x = np.atleast_2d(x)
    s = np.sum(x * x, axis=1)
    return np.column_stack([2 * x, s - 1]) / (s + 1)[:, None]


@given(points3, points3)
def test_chordal_matches_stereographic_chord(p, q):
    expected = np.linalg.norm(stereographic(p) - stereographic(q), axis=1)[0]
    assert chordal_distance(p, q) == pytest.approx(expected, abs=1e-12)


@given(points3, points3, points3)
def test_chordal_metric_axioms(p, q, r):
    dpq = chordal_distance(p, q)
    assert dpq == pytest.approx(chordal_distance(q, p), rel=1e-14, abs=1e-300)
    assert 0.0 <= dpq <= 2.0
    assert dpq <= chordal_distance(p, r) + chordal_distance(r, q) + 1e-12


def test_chordal_infinity():
    x = np.array([3.0, 4.0])
    assert chordal_distance(x, infinity(2)) == pytest.approx(2 / np.sqrt(26))
    assert chordal_distance(infinity(2), infinity(2)) == 0.0
    assert chordal_distance(np.zeros(2), infinity(2)) == pytest.approx(2.0)
    assert is_infinite(np.array([[1.0, np.inf], [1.0, 2.0]])).tolist() == [True, False]


def test_chordal_huge_coordinates_stay_finite():
    big = np.array([1e300, -1e300, 1e300])
    with np.errstate(all="raise"):
        d = chordal_distance(big, 2 * big)
        assert np.isfinite(d) and d < 1e-299
        assert chordal_distance(big, infinity(3)) == pytest.approx(0.0, abs=1e-299)
    assert safe_norm(big) == pytest.approx(np.sqrt(3) * 1e300)


@given(arrays(np.float64, 3, elements=st.floats(-10, 10)), st.floats(-np.pi, np.pi))
def test_isometry_compose_and_inverse(t, angle):
    c, s = np.cos(angle), np.sin(angle)
    g = Isometry(np.array([[c, -s, 0], [s, c, 0], [0, 0, 1.0]]), t)
    h = rotation_about([1.0, 0.5, 0.0])
    x = np.array([0.2, -0.7, 1.1])
    assert np.allclose((g @ h)(x), g(h(x)))
    assert np.allclose(g.inverse()(g(x)), x)
    assert (g @ g.inverse()).close_to(Isometry.identity(3))


def test_isometry_transverse_action_and_rejections():
    g = rotation_about([1.0, 0.0])
    assert np.allclose(g(np.array([0.0, 0.0])), [2.0, 0.0])
    with pytest.raises(DomainError):
        Isometry(np.diag([1.0, 1.0, -1.0]), np.zeros(3))
    with pytest.raises(DomainError):
        Isometry(np.eye(3) * 2, np.zeros(3))


@given(arrays(np.float64, 3, elements=st.floats(-0.5, 0.5)), arrays(np.float64, 3, elements=st.floats(-0.5, 0.5)))
def test_ball_mobius_preserves_ball_and_inverts(a, x):
    T = BallMobius(a, np.eye(3))
    y = T(x)
    assert np.linalg.norm(y) < 1.0
    assert np.allclose(T.inverse_eval(y), x, atol=1e-12)
    assert np.allclose(T(a), 0.0, atol=1e-12)


def test_mobius_add_zero_and_elliptic_rotation():
    x = np.array([0.3, 0.1, -0.2])
    assert np.allclose(mobius_add(np.zeros(3), x), x)
    E = BallMobius.elliptic(3, 2 * np.pi / 5)
    y = x
    for _ in range(5):
        y = E(y)
        assert np.linalg.norm(y) == pytest.approx(np.linalg.norm(x))
    assert np.allclose(y, x)
