import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qrdyn.automorphic import sine_map, zorich_map
from qrdyn.errors import BranchPointError, ConfigError, DegenerateTargetError, NotFixedPointError
from qrdyn.geometry import chordal_distance, infinity, is_infinite
from qrdyn.schroeder import (ConformalAutomorphism, HdMap, LiftedMap, QcDeformation, SchroederMap,
                             cheb_map, conjugate, h_d_eval, involution_eval, joukowsky, joukowsky_eval,
                             linearize, power_map, preimages)

finite3 = arrays(np.float64, 3, elements=st.floats(-4.0, 4.0)).filter(lambda y: np.linalg.norm(y) > 1e-2)


def to_c(y):
    return y[..., 0] - 1j * y[..., 1]


def from_c(z):
    return np.stack([z.real, -z.imag], axis=-1)


@given(finite3, st.integers(2, 4))
def test_power_map_raises_modulus_to_degree(y, d):
    # the Zorich carrier has |h(x)| = exp(height), so |f(y)| = |y|^d
    f = power_map("p2", d)
    assert np.linalg.norm(f(y)) == pytest.approx(np.linalg.norm(y) ** d, rel=1e-12)


@given(arrays(np.float64, 3, elements=st.floats(-2.0, 2.0)))
def test_schroeder_equation_pointwise(x):
    for f in (power_map("p2", 2), cheb_map("p2-sine", 3)):
        assert chordal_distance(f(f.h(x)), f.h(f.A(x))) < 1e-12


def test_fixed_omitted_values():
    f = power_map("p2", 2)
    assert np.all(f(np.zeros(3)) == 0)
    assert is_infinite(f(infinity(3)))
    c = cheb_map("p2-sine", 2)
    assert is_infinite(c(infinity(3)))
    assert f.degree == 4 and power_map("p2", 3).degree == 9 and power_map("zorich2", 5).degree == 5


def test_iterate_matches_composition(rng):
    f = cheb_map("p2-sine", 2)
    y = rng.uniform(-1.5, 1.5, (50, 3))
    assert np.max(chordal_distance(f.iterate(y, 3), f(f(f(y))))) < 1e-13


def test_construction_errors():
    with pytest.raises(ConfigError):
        power_map("p2", 1)
    with pytest.raises(ConfigError):
        power_map("p2-sine", 2)
    with pytest.raises(ConfigError):
        cheb_map("p2", 2)
    with pytest.raises(ConfigError):
        SchroederMap(zorich_map("p2"), ConformalAutomorphism.dilation(3, 1.5))
    # non-strict construction keeps the map and records the failed certificate
    f = SchroederMap(zorich_map("p2"), ConformalAutomorphism.dilation(3, 1.5), strict=False)
    assert not f.certificate.ok


def test_conformal_automorphism_powers():
    A = ConformalAutomorphism.dilation(3, 2)
    assert A.power(3).scale == 8.0
    assert np.allclose(A.matrix, 2 * np.eye(3))
    assert A.is_dilation


def test_planar_joukowsky_family_matches_rational_maps(rng):
    y = rng.uniform(-3, 3, (400, 2))
    z = to_c(y)
    assert np.max(chordal_distance(joukowsky_eval(y), from_c((z + 1 / z) / 2))) < 1e-13
    assert np.max(chordal_distance(involution_eval(y), from_c(1 / z))) < 1e-13
    assert np.max(chordal_distance(h_d_eval(3, y), from_c((z ** 3 + z ** -3) / 2))) < 1e-13


def test_involution_closed_form_in_dimension_three(rng):
    # derived: I is inversion in the unit sphere composed with the reflection y3 -> -y3
    y = rng.normal(size=(500, 3)) * 2
    expected = y * np.array([1.0, 1.0, -1.0]) / np.sum(y * y, axis=1)[:, None]
    assert np.max(chordal_distance(joukowsky(3).involution(y), expected)) < 1e-14
    assert np.all(joukowsky(3).involution(np.zeros(3)) == np.inf)


def test_h1_flattens_the_unit_sphere(rng):
    u = rng.normal(size=(300, 3))
    u /= np.linalg.norm(u, axis=1)[:, None]
    w = joukowsky(3).h1(u)
    assert np.max(np.abs(w[:, 2])) < 1e-12
    assert np.all(np.max(np.abs(w[:, :2]), axis=1) <= 1.0 + 1e-12)


@pytest.mark.parametrize("f,count", [
    (power_map("p2", 2), 4), (power_map("p2", 3), 9), (cheb_map("p2-sine", 2), 4),
    (HdMap(3, 2), 8), (HdMap(3, 3), 18), (power_map("zorich2", 3), 3), (HdMap(2, 2), 4),
])
def test_preimage_counts_and_residuals(f, count, rng):
    for y in rng.normal(size=(5, f.dim)):
        w = preimages(f, y)
        assert len(w) == count
        assert np.max(chordal_distance(f(w), y)) < 1e-10


def test_planar_preimages_against_polynomial_roots():
    y = np.array([0.5, 0.2])
    w = preimages(cheb_map("sine2", 3), y)
    roots = np.polynomial.chebyshev.Chebyshev.basis(3) - to_c(y)
    expected = from_c(roots.roots())
    for r in expected:
        assert np.min(np.linalg.norm(w - r, axis=1)) < 1e-12


def test_degenerate_targets():
    with pytest.raises(DegenerateTargetError):
        preimages(cheb_map("sine2", 2), np.array([-1.0, 0.0]))
    with pytest.raises(DegenerateTargetError):
        preimages(power_map("p2", 2), np.zeros(3))
    with pytest.raises(DegenerateTargetError):
        preimages(power_map("p2", 2), infinity(3))


def test_linearizer_planar_and_errors(rng):
    f = power_map("zorich2", 2)
    L = linearize(f, [0.0])
    assert np.allclose(L.fixed_point, [1.0, 0.0])
    v = rng.uniform(-3, 3, (200, 2))
    assert L.residual(v) < 1e-13
    with pytest.raises(BranchPointError):
        linearize(power_map("p2", 2), [0.0, 0.0])
    with pytest.raises(NotFixedPointError):
        linearize(power_map("p2", 2), [0.25, 0.25])


def test_linearizer_multiplier_in_dimension_three():
    f = power_map("p2", 2)
    L = linearize(f, [2.0 / 3.0, 0.0])
    assert np.allclose(L.multiplier, np.diag([-2.0, -2.0, 2.0]))
    assert chordal_distance(f(L.fixed_point), L.fixed_point) < 1e-14


def test_lift_planar_is_power(rng):
    # T_2(h1(z)) = h1(z^2), and the lift keeps the side of the unit circle
    P = LiftedMap(cheb_map("sine2", 2))
    y = rng.uniform(-2, 2, (300, 2))
    y = y[np.abs(np.linalg.norm(y, axis=1) - 1) > 1e-3]
    assert np.max(chordal_distance(P(y), from_c(to_c(y) ** 2))) < 1e-12


def test_lift_dimension_three_report(rng):
    P = LiftedMap(cheb_map("p2-sine", 2))
    y = rng.uniform(-2, 2, (300, 3))
    rep = P.report(y)
    assert rep.semiconjugacy_residual < 1e-10
    assert rep.involution_residual < 1e-10
    with pytest.raises(ConfigError):
        LiftedMap(power_map("p2", 2))


@pytest.mark.parametrize("kind", ["identity", "shear", "twist", "radial"])
def test_deformation_inverse(kind):
    g = QcDeformation(kind, 3, beta=0.5, theta_max=0.7, alpha=1.5)

    @given(arrays(np.float64, 3, elements=st.floats(-5, 5)))
    def check(x):
        assert np.allclose(g.inverse(g(x)), x, atol=1e-10)

    check()


def test_conjugation(rng):
    f = power_map("p2", 2)
    assert conjugate(f, QcDeformation("identity", 3)) is f
    g = QcDeformation("twist", 3, theta_max=0.5)
    F = conjugate(f, g)
    y = rng.uniform(-1, 1, (100, 3))
    assert np.max(chordal_distance(F.iterate(y, 3), g(f.iterate(g.inverse(y), 3)))) < 1e-12
    assert np.allclose(QcDeformation("shear", 3, beta=0.5).matrix, [[1, 0, 0.5], [0, 1, 0], [0, 0, 1]])
    assert QcDeformation("twist", 3).matrix is None
