import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qrdyn.crystal import (GROUPS, check_admissible, get_group, orbit_points, reduce, reduce_array,
                           stabilizer)
from qrdyn.errors import ConfigError

transverse = {
    "zorich2": arrays(np.float64, 1, elements=st.floats(-50, 50)),
    "sine2": arrays(np.float64, 1, elements=st.floats(-50, 50)),
    "p2": arrays(np.float64, 2, elements=st.floats(-20, 20)),
    "p2-sine": arrays(np.float64, 2, elements=st.floats(-20, 20)),
}


@pytest.mark.parametrize("name", sorted(GROUPS))
def test_reduce_lands_in_box_with_witness(name):
    g = get_group(name)

    @given(transverse[name])
    def check(x):
        xhat, w = reduce(g, x)
        lo, hi = g.box
        assert np.all(xhat >= lo - 1e-12) and np.all(xhat <= hi + 1e-12)
        assert np.allclose(w(xhat), x, atol=1e-9)

    check()


@pytest.mark.parametrize("name", sorted(GROUPS))
def test_reduce_is_a_class_function(name):
    # every element near x sends it to a point with the same representative
    g = get_group(name)

    @given(transverse[name])
    def check(x):
        xhat = reduce_array(g, x)
        for e in g.elements_near(x, 6.0)[:12]:
            # points on identified edges may round to either copy
            red = reduce_array(g, e(x))
            orbit = orbit_points(g, red, 4.0)
            assert np.min(np.linalg.norm(orbit - xhat, axis=1)) < 1e-9
        assert np.allclose(reduce_array(g, xhat), xhat)

    check()


def test_reduce_examples():
    assert reduce_array(get_group("sine2"), np.array([7 * np.pi]))[0] == pytest.approx(np.pi)
    assert np.allclose(reduce_array(get_group("p2"), np.array([-0.5, -0.25])), [0.5, 0.25])
    xs = np.array([[0.1, 0.2], [3.3, -4.1]])
    assert reduce_array(get_group("p2"), xs).shape == (2, 2)


@pytest.mark.parametrize("name,point,order", [
    ("zorich2", [0.0], 1), ("sine2", [0.0], 2), ("sine2", [np.pi], 2), ("sine2", [0.3], 1),
    ("p2", [0.0, 0.0], 2), ("p2", [1.0, 1.0], 2), ("p2", [0.3, 0.3], 1), ("p2", [2.0 / 3, 0.0], 1),
    ("p2-sine", [0.0, 0.0], 4), ("p2-sine", [0.5, 0.0], 2), ("p2-sine", [0.3, 0.7], 1),
])
def test_stabilizer_orders(name, point, order):
    g = get_group(name)
    stab = stabilizer(g, point)
    assert len(stab) == order
    for s in stab:
        assert np.allclose(s(np.array(point)), point)


def test_orbit_points_brute_force():
    g = get_group("sine2")
    pts = orbit_points(g, [0.5], 7.0)
    ks = np.arange(-3, 4)
    brute = np.concatenate([0.5 + 2 * np.pi * ks, -0.5 + 2 * np.pi * ks])
    brute = np.sort(brute[np.abs(brute - 0.5) <= 7.0])
    assert np.allclose(pts[:, 0], brute)
    with pytest.raises(ValueError):
        orbit_points(g, [0.5], 0.0)


def _rot(angle):
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0], [s, c, 0], [0, 0, 1.0]])


@pytest.mark.parametrize("name,scale,ortho,expected", [
    ("p2", 2, None, True), ("p2", 3, None, True), ("p2", 1.5, None, False),
    ("p2", 2, _rot(np.pi / 2), True), ("p2", np.sqrt(2), _rot(np.pi / 4), True),
    ("p2", np.sqrt(2), _rot(np.pi / 2), False), ("p2-sine", 4, None, True),
    ("zorich2", 5, None, True), ("sine2", 2.5, None, False),
])
def test_admissibility(name, scale, ortho, expected):
    cert = check_admissible(get_group(name), scale, ortho)
    assert cert.ok is expected
    assert bool(cert) is expected
    assert len(cert.checks) == len(get_group(name).generators())


def test_admissibility_rejects_non_conformal():
    with pytest.raises(ConfigError):
        check_admissible(get_group("p2"), 2, np.diag([1.0, 2.0, 1.0]))
    with pytest.raises(ConfigError):
        check_admissible(get_group("p2"), -1)
