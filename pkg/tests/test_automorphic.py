import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qrdyn.automorphic import (base_embed, base_invert, omitted_values, p2_embed, p2_embed_inverse, sine_eval,
                               sine_invert, sine_map, zorich_eval, zorich_invert, zorich_map)
from qrdyn.errors import BeamRangeError, ConfigError, DomainError, OmittedValueError
from qrdyn.geometry import chordal_distance, is_infinite

MAPS = {
    "exp2": lambda: zorich_map("zorich2"),
    "cos2": lambda: sine_map("sine2"),
    "zorich": lambda: zorich_map("p2"),
    "sine": lambda: sine_map("p2-sine"),
    "sine-averaged": lambda: sine_map("p2-sine", "averaged"),
}


def beam_point(dim):
    return arrays(np.float64, dim, elements=st.floats(-6.0, 6.0))


def test_planar_modes_match_complex_functions(rng):
    x = rng.uniform(-5, 5, (500, 2))
    w = x[:, 0] + 1j * x[:, 1]
    for h, z in ((zorich_map("zorich2"), np.exp(-1j * w)), (sine_map("sine2"), np.cos(w))):
        y = h(x)
        assert np.allclose(y[:, 0] - 1j * y[:, 1], z, rtol=1e-14, atol=1e-14)


@pytest.mark.parametrize("name", sorted(MAPS))
def test_automorphy_on_generators(name):
    h = MAPS[name]()

    @given(beam_point(h.dim))
    def check(x):
        hx = h(x)
        for g in h.group.generators():
            assert chordal_distance(h(g(x)), hx) < 1e-12

    check()


@pytest.mark.parametrize("name", sorted(MAPS))
def test_inverse_round_trip(name):
    h = MAPS[name]()
    tol = 1e-11 if name == "sine-averaged" else 1e-13

    @given(beam_point(h.dim))
    def check(x):
        y = h(x)
        xc = h.invert(y)
        assert chordal_distance(h(xc), y) < tol
        # the canonical preimage lies in the same fibre as x
        assert np.allclose(h.canonical(x), xc, atol=1e-7) or chordal_distance(h(x), h(xc)) < tol

    check()


def test_zorich_modulus_is_exponential_of_height(rng):
    h = zorich_map("p2")
    x = np.column_stack([rng.uniform(-3, 3, (200, 2)), rng.uniform(-5, 5, 200)])
    assert np.allclose(np.linalg.norm(h(x), axis=1), np.exp(x[:, 2]), rtol=1e-14)
    base = np.column_stack([x[:, :2], np.zeros(200)])
    assert np.allclose(np.linalg.norm(h(base), axis=1), 1.0)


def test_sine_beam_rotation_symmetry(rng):
    for h in (sine_map("sine2"), sine_map("p2-sine"), sine_map("p2-sine", "averaged")):
        x = rng.uniform(-3, 3, (300, h.dim))
        assert np.max(chordal_distance(h(h.beam_rotation(x)), h(x))) < 1e-13


@pytest.mark.parametrize("name", ["zorich", "sine", "sine-averaged", "exp2", "cos2"])
def test_orientation_sign_is_constant(name, rng):
    h = MAPS[name]()
    x = rng.uniform(-1.7, 1.7, (400, h.dim))
    eps = 1e-6
    J = np.stack([(h(x + eps * e) - h(x - eps * e)) / (2 * eps) for e in np.eye(h.dim)], axis=-1)
    det = np.linalg.det(J)
    # discard samples near the branch set where the determinant degenerates
    det = det[np.abs(det) > 1e-6]
    assert len(det) > 300
    assert np.all(det > 0) or np.all(det < 0)


def test_omitted_values():
    z = zorich_map("p2")
    vals = omitted_values(z)
    assert any(np.all(v == 0) for v in vals) and any(np.all(np.isinf(v)) for v in vals)
    with pytest.raises(OmittedValueError):
        z.invert(np.zeros(3))
    s = sine_map("p2-sine")
    assert len(omitted_values(s)) == 1 and is_infinite(omitted_values(s)[0])
    with pytest.raises(OmittedValueError):
        s.invert(np.full(3, np.inf))


def test_height_range_and_saturation():
    h = zorich_map("p2")
    with pytest.raises(BeamRangeError):
        h(np.array([0.1, 0.2, 800.0]))
    assert is_infinite(h.evaluate(np.array([0.1, 0.2, 800.0]), saturate=True))
    assert np.all(h.evaluate(np.array([0.1, 0.2, -800.0]), saturate=True) == 0)


def test_typed_wrappers_check_kind():
    with pytest.raises(ConfigError):
        zorich_eval(sine_map("p2-sine"), np.zeros(3))
    with pytest.raises(ConfigError):
        sine_invert(zorich_map("p2"), np.ones(3))
    x = np.array([0.3, 0.2, 0.1])
    assert np.allclose(zorich_invert(zorich_map("p2"), zorich_eval(zorich_map("p2"), x)), x)
    s = sine_map("p2-sine")
    assert chordal_distance(sine_eval(s, sine_invert(s, np.array([0.2, -0.4, 1.5]))), [0.2, -0.4, 1.5]) < 1e-13


@given(arrays(np.float64, 2, elements=st.floats(-1.0, 1.0)), st.floats(0.0, 1.0))
def test_base_embedding_round_trip(u, v):
    xp = np.array([u[0], v])
    s = p2_embed(xp)
    assert np.linalg.norm(s) == pytest.approx(1.0, abs=1e-14)
    back = p2_embed_inverse(s)
    assert np.allclose(p2_embed(back), s, atol=1e-12)


def test_base_embed_planar_and_validation():
    h = zorich_map("zorich2")
    s = base_embed(h, np.array([[0.5], [2.0]]))
    assert np.allclose(base_invert(h, s), [[0.5], [2.0]])
    with pytest.raises(DomainError):
        base_invert(h, np.array([[2.0, 0.0]]))
