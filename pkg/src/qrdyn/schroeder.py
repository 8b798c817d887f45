"""Uniformly quasiregular maps solving f o h = h o A for a strongly automorphic
carrier h, together with the Joukowsky analogue h_1 = S o Z^{-1}, the maps
h_d = S o d o Z^{-1}, the involution I = Z o R' o Z^{-1}, preimage
enumeration, the lift through h_1, linearizers and quasiconformal
conjugation.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import crystal
from .automorphic import AutomorphicMap, sine_map, zorich_map
from .crystal import check_admissible, reduce, stabilizer
from .errors import (BranchPointError, ConfigError, DegenerateTargetError,
                     DomainError, NotFixedPointError)
from .geometry import as_points, chordal_distance, infinity, is_infinite, safe_norm

DUPLICATE_TOL = 1e-6
SPHERE_SNAP = 4.0 * np.finfo(float).eps
RESIDUAL_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class ConformalAutomorphism:
    """x -> scale * orthogonal @ x on R^n."""

    scale: float
    orthogonal: np.ndarray

    def __post_init__(self):
        o = np.array(self.orthogonal, dtype=float)
        if self.scale <= 0:
            raise ConfigError("scale must be positive")
        if o.ndim != 2 or o.shape[0] != o.shape[1] or np.max(np.abs(o.T @ o - np.eye(len(o)))) > 1e-12:
            raise ConfigError("orthogonal part must be an orthogonal matrix")
        o.setflags(write=False)
        object.__setattr__(self, "orthogonal", o)

    @classmethod
    def dilation(cls, n: int, scale: float) -> "ConformalAutomorphism":
        return cls(float(scale), np.eye(n))

    @property
    def dim(self) -> int:
        return len(self.orthogonal)

    @property
    def matrix(self) -> np.ndarray:
        return self.scale * self.orthogonal

    @property
    def is_dilation(self) -> bool:
        return bool(np.array_equal(self.orthogonal, np.eye(self.dim)))

    @property
    def repelling(self) -> bool:
        return self.scale > 1

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.is_dilation:
            return self.scale * x
        return self.scale * (x @ self.orthogonal.T)

    def power(self, m: int) -> "ConformalAutomorphism":
        return ConformalAutomorphism(self.scale ** m, np.linalg.matrix_power(self.orthogonal, m))


def _rows(y, n):
    y = as_points(y, n)
    return y, np.atleast_2d(y)


def _out(y, res):
    return res if y.ndim > 1 else res[0]


class SchroederMap:
    """f = h o A o h^{-1}, evaluated by canonical inversion then mapping forward.

    Power-type when h is Zorich-type (fixes 0 and infinity), Chebyshev-type
    when h is sine-type (fixes infinity).  With ``strict`` unset an
    inadmissible A is accepted and only recorded in ``certificate``.
    """

    def __init__(self, h: AutomorphicMap, A: ConformalAutomorphism, strict: bool = True):
        if A.dim != h.dim:
            raise ConfigError("A and h live in different dimensions")
        self.h = h
        self.A = A
        self.dim = h.dim
        self.kind = "power" if h.is_zorich else "chebyshev"
        self.certificate = check_admissible(h.group, A.scale, A.orthogonal)
        if strict and not self.certificate.ok:
            raise ConfigError(f"A = {A.scale} * O is not admissible for group {h.group.name}")

    @property
    def degree(self) -> int | None:
        """d^{n-1} when A = d * identity with integer d, else None."""
        d = self.A.scale
        if self.A.is_dilation and float(d).is_integer():
            return int(d) ** (self.dim - 1)
        return None

    def __repr__(self):
        return f"SchroederMap({self.kind}, d={self.A.scale:g}, group={self.h.group.name!r})"

    def fixed_omitted(self) -> list:
        return self.h.omitted_values()

    def __call__(self, y) -> np.ndarray:
        y, ys = _rows(y, self.dim)
        res = np.empty_like(ys)
        inf = is_infinite(ys)
        zero = ~inf & np.all(ys == 0.0, axis=1) if self.kind == "power" else np.zeros(len(ys), bool)
        res[inf] = np.inf
        res[zero] = 0.0
        ok = ~inf & ~zero
        if np.any(ok):
            x = self.h.invert(ys[ok])
            if self.kind == "power":
                # keep the unit sphere invariant: rounding in |y| would otherwise
                # double every step and push sphere orbits off it
                x[np.abs(safe_norm(ys[ok]) - 1.0) <= SPHERE_SNAP, -1] = 0.0
            res[ok] = self.h.evaluate(self.A(x), saturate=True)
        return _out(y, res)

    def iterate(self, y, m: int) -> np.ndarray:
        for _ in range(m):
            y = self(y)
        return y


def power_map(group, d: int, strict: bool = True) -> SchroederMap:
    g = crystal.get_group(group) if isinstance(group, str) else group
    if g.has_beam_rotation:
        raise ConfigError("power maps need a Zorich group (zorich2 or p2)")
    if int(d) != d or d < 2:
        raise ConfigError("degree must be an integer >= 2")
    return SchroederMap(zorich_map(g), ConformalAutomorphism.dilation(g.dim, d), strict)


def cheb_map(group, d: int, variant: str = "cell", strict: bool = True) -> SchroederMap:
    g = crystal.get_group(group) if isinstance(group, str) else group
    if not g.has_beam_rotation:
        raise ConfigError("Chebyshev maps need a sine group (sine2 or p2-sine)")
    if int(d) != d or d < 2:
        raise ConfigError("degree must be an integer >= 2")
    return SchroederMap(sine_map(g, variant), ConformalAutomorphism.dilation(g.dim, d), strict)


def power_eval(f: SchroederMap, y):
    return f(y)


def cheb_eval(f: SchroederMap, y):
    return f(y)


# ---------------------------------------------------------------------------
# Joukowsky analogue, involution and h_d

class Joukowsky:
    """h_1 = S o Z^{-1}, I = Z o R' o Z^{-1} and h_d = S o d o Z^{-1} for a
    matching pair of Zorich-type and sine-type maps."""

    def __init__(self, dim: int, variant: str = "cell"):
        if dim == 2:
            self.Z, self.S = zorich_map("zorich2"), sine_map("sine2")
        elif dim == 3:
            self.Z, self.S = zorich_map("p2"), sine_map("p2-sine", variant)
        else:
            raise DomainError("dimension must be 2 or 3")
        self.dim = dim
        self.R = self.S.beam_rotation

    def _split(self, y):
        y, ys = _rows(y, self.dim)
        bad = is_infinite(ys) | np.all(ys == 0.0, axis=1)
        return y, ys, bad

    def h1(self, y):
        return self.h_d(1, y)

    def h_d(self, d: int, y):
        y, ys, bad = self._split(y)
        res = np.full_like(ys, np.inf)
        if np.any(~bad):
            x = self.Z.invert(ys[~bad])
            res[~bad] = self.S.evaluate(d * x, saturate=True)
        return _out(y, res)

    def involution(self, y):
        y, ys = _rows(y, self.dim)
        inf = is_infinite(ys)
        zero = ~inf & np.all(ys == 0.0, axis=1)
        res = np.empty_like(ys)
        res[inf] = 0.0
        res[zero] = np.inf
        ok = ~inf & ~zero
        if np.any(ok):
            res[ok] = self.Z.evaluate(self.R(self.Z.invert(ys[ok])), saturate=True)
        return _out(y, res)

    def h1_branches(self, w):
        """Both h_1-preimages of finite w: (outside the unit sphere, inside)."""
        w, ws = _rows(w, self.dim)
        if np.any(is_infinite(ws)):
            raise DomainError("h_1 preimages of infinity are 0 and infinity")
        x = self.S.invert(ws)
        out = self.Z.evaluate(x, saturate=True)
        inside = self.Z.evaluate(self.R(x), saturate=True)
        return _out(w, out), _out(w, inside)


@lru_cache(maxsize=None)
def joukowsky(dim: int, variant: str = "cell") -> Joukowsky:
    return Joukowsky(dim, variant)


def joukowsky_eval(y):
    y = np.asarray(y, dtype=float)
    return joukowsky(y.shape[-1]).h1(y)


def involution_eval(y):
    y = np.asarray(y, dtype=float)
    return joukowsky(y.shape[-1]).involution(y)


def h_d_eval(d: int, y):
    if int(d) != d or d < 1:
        raise ConfigError("h_d needs an integer d >= 1")
    y = np.asarray(y, dtype=float)
    return joukowsky(y.shape[-1]).h_d(int(d), y)


class HdMap:
    """h_d as a map object (for rendering and preimage queries)."""

    kind = "h_d"

    def __init__(self, dim: int, d: int, variant: str = "cell"):
        if int(d) != d or d < 1:
            raise ConfigError("h_d needs an integer d >= 1")
        self.dim = dim
        self.d = int(d)
        self.j = joukowsky(dim, variant)

    @property
    def degree(self) -> int:
        return 2 * self.d ** (self.dim - 1)

    def __repr__(self):
        return f"HdMap(d={self.d}, dim={self.dim})"

    def __call__(self, y):
        return self.j.h_d(self.d, y)

    def iterate(self, y, m):
        for _ in range(m):
            y = self(y)
        return y


# ---------------------------------------------------------------------------
# preimages

def _coset_shifts(group, d: int) -> np.ndarray:
    """Representatives of the lattice modulo d * lattice."""
    basis = group.lattice.basis
    k = np.array(list(itertools.product(range(d), repeat=len(basis))), dtype=float)
    return k @ basis


def _integer_dilation(A: ConformalAutomorphism) -> int:
    if not (A.is_dilation and float(A.scale).is_integer()):
        raise ConfigError("preimage enumeration is implemented for A = d * identity")
    return int(A.scale)


def _finish(f, y, candidates, expected):
    cand = np.asarray(candidates, dtype=float)
    dist = chordal_distance(cand[:, None, :], cand[None, :, :])
    np.fill_diagonal(dist, np.inf)
    if np.min(dist) < DUPLICATE_TOL:
        raise DegenerateTargetError(
            f"target {np.asarray(y).tolist()} is within {DUPLICATE_TOL} of a critical value "
            f"(closest candidate pair {np.min(dist):.3g} apart)")
    resid = chordal_distance(f(cand), np.broadcast_to(y, cand.shape))
    if np.max(resid) > RESIDUAL_TOL:
        raise DegenerateTargetError(f"preimage residual {np.max(resid):.3g} exceeds {RESIDUAL_TOL}")
    assert len(cand) == expected
    return cand


def preimages(f, y) -> np.ndarray:
    """All solutions w of f(w) = y for a generic finite target y.

    For f = h o d o h^{-1} the fibre is h((b + k)/d) where b is the canonical
    h-preimage of y and k runs over lattice representatives modulo d; for
    h_d the coset of R' doubles this.
    """
    y = as_points(y, f.dim).astype(float)
    if y.ndim != 1:
        raise DomainError("preimages takes a single target point")
    if is_infinite(y):
        raise DegenerateTargetError("infinity is an exceptional value")
    if isinstance(f, HdMap):
        j = f.j
        b = j.S.invert(y)
        bases = [b, j.R(b)]
        carrier, d = j.Z, f.d
        group = j.Z.group
    elif isinstance(f, SchroederMap):
        d = _integer_dilation(f.A)
        if f.kind == "power" and np.all(y == 0.0):
            raise DegenerateTargetError("0 is an exceptional value")
        carrier = f.h
        bases = [carrier.invert(y)]
        group = carrier.group
    else:
        raise ConfigError(f"no preimage enumeration for {f!r}")
    shifts = _coset_shifts(group, d)
    xs = []
    for b in bases:
        pts = np.tile(b, (len(shifts), 1))
        pts[:, :-1] += shifts
        xs.append(pts / d)
    cand = carrier.evaluate(np.vstack(xs), saturate=True)
    return _finish(f, y, cand, len(bases) * len(shifts))


# ---------------------------------------------------------------------------
# lift through h_1

@dataclass
class LiftReport:
    semiconjugacy_residual: float
    involution_residual: float
    boundary_ambiguity: float
    sample_count: int
    ambiguous: bool = False
    notes: list = field(default_factory=list)


class LiftedMap:
    """P with f o h_1 = h_1 o P for a Chebyshev-type f: the h_1-preimage of
    f(h_1(y)) on the same side of the unit sphere as y."""

    kind = "lifted"

    def __init__(self, f: SchroederMap, boundary_offset: float = 1e-7, boundary_tol: float = 1e-5):
        if f.kind != "chebyshev":
            raise ConfigError("the lift needs a Chebyshev-type map")
        self.f = f
        self.dim = f.dim
        self.j = joukowsky(f.dim, f.h.variant)
        if self.j.S.group.name != f.h.group.name:
            raise ConfigError("f is not built over the sine group paired with h_1")
        self.delta = boundary_offset
        self.boundary_tol = boundary_tol
        self.last_ambiguity = 0.0

    def __repr__(self):
        return f"LiftedMap({self.f!r})"

    def _one_side(self, y):
        w = self.f(self.j.h1(y))
        out, inside = self.j.h1_branches(w)
        r = np.linalg.norm(y, axis=1)
        return np.where((r > 1.0)[:, None], out, inside)

    def __call__(self, y):
        y, ys = _rows(y, self.dim)
        res = np.empty_like(ys)
        inf = is_infinite(ys)
        zero = ~inf & np.all(ys == 0.0, axis=1)
        res[inf] = np.inf
        res[zero] = 0.0
        r = np.linalg.norm(np.where(inf[:, None], 0.0, ys), axis=1)
        sphere = ~inf & ~zero & (np.abs(r - 1.0) <= 1e-12)
        ok = ~inf & ~zero & ~sphere
        if np.any(ok):
            res[ok] = self._one_side(ys[ok])
        self.last_ambiguity = 0.0
        if np.any(sphere):
            ysp = ys[sphere]
            a = self._one_side(ysp * (1.0 + self.delta))
            b = self._one_side(ysp * (1.0 - self.delta))
            self.last_ambiguity = float(np.max(chordal_distance(a, b)))
            m = 0.5 * (a + b)
            res[sphere] = m / np.linalg.norm(m, axis=1)[:, None]
        return _out(y, res)

    def iterate(self, y, m):
        for _ in range(m):
            y = self(y)
        return y

    def report(self, samples) -> LiftReport:
        ys = np.atleast_2d(np.asarray(samples, dtype=float))
        p = self(ys)
        h1 = self.j.h1
        semi = float(np.max(chordal_distance(self.f(h1(ys)), h1(p))))
        inv = self.j.involution
        rho = float(np.max(chordal_distance(inv(p), self(inv(ys)))))
        on_sphere = ys / np.linalg.norm(ys, axis=1)[:, None]
        self(on_sphere[: min(len(ys), 256)])
        amb = self.last_ambiguity
        rep = LiftReport(semi, rho, amb, len(ys), ambiguous=amb > self.boundary_tol)
        if rep.ambiguous:
            rep.notes.append(f"one-sided limits on the unit sphere differ by {amb:.3g}")
        return rep


def lift_through_h1(f: SchroederMap) -> LiftedMap:
    return LiftedMap(f)


# ---------------------------------------------------------------------------
# linearizers

@dataclass(frozen=True, eq=False)
class Linearizer:
    """L(v) = h(x* + v), with f o L = L o multiplier."""

    f: SchroederMap
    base: np.ndarray
    witness: object
    multiplier: np.ndarray

    @property
    def dim(self) -> int:
        return self.f.dim

    @property
    def fixed_point(self) -> np.ndarray:
        return self(np.zeros(self.dim))

    def __call__(self, v):
        v = as_points(v, self.dim)
        x = v + np.append(self.base, 0.0)
        return self.f.h.evaluate(x, saturate=True)

    def multiply(self, v):
        return np.asarray(v, dtype=float) @ self.multiplier.T

    def residual(self, v) -> float:
        v = np.atleast_2d(v)
        return float(np.max(chordal_distance(self.f(self(v)), self(self.multiply(v)))))


def linearize(f: SchroederMap, base) -> Linearizer:
    """Linearizer of f at h(x*) for a transverse point x* fixed by A modulo G."""
    g = f.h.group
    base = as_points(base, f.dim - 1).astype(float)
    stab = stabilizer(g, base)
    if len(stab) > 1:
        raise BranchPointError(
            f"x* = {base.tolist()} has a stabilizer of order {len(stab)}; "
            "h is branched there and the linearizer is not locally injective")
    image = f.A(np.append(base, 0.0))[:-1]
    xh, g_base = reduce(g, base)
    yh, g_image = reduce(g, image)
    if np.max(np.abs(xh - yh)) > 1e-9:
        raise NotFixedPointError(f"A x* is not in the orbit of x* = {base.tolist()}")
    witness = g_image.compose(g_base.inverse())
    multiplier = witness.rotation.T @ f.A.matrix
    return Linearizer(f, base, witness, multiplier)


def linearizer_eval(L: Linearizer, v):
    return L(v)


# ---------------------------------------------------------------------------
# quasiconformal deformations and conjugation

DEFORMATIONS = ("identity", "shear", "twist", "radial")


@dataclass(frozen=True)
class QcDeformation:
    """Closed-form quasiconformal self-map of R^n fixing infinity.

    shear:  x1 -> x1 + beta * x_n
    twist:  rotate the (x1, x2)-plane by theta_max * clamp(2 - |x|, 0, 1)
    radial: x -> |x|^(alpha - 1) x
    """

    kind: str = "identity"
    dim: int = 3
    beta: float = 0.0
    theta_max: float = 0.0
    alpha: float = 1.0

    def __post_init__(self):
        if self.kind not in DEFORMATIONS:
            raise ConfigError(f"unknown deformation {self.kind!r}")
        if self.kind == "radial" and self.alpha <= 0:
            raise ConfigError("radial power needs alpha > 0")

    @property
    def matrix(self) -> np.ndarray | None:
        """Linear part for affine deformations (identity, shear)."""
        m = np.eye(self.dim)
        if self.kind == "shear":
            m[0, -1] = self.beta
        elif self.kind != "identity":
            return None
        return m

    def _twist(self, x, sign):
        r = np.linalg.norm(x, axis=-1)
        ang = sign * self.theta_max * np.clip(2.0 - r, 0.0, 1.0)
        c, s = np.cos(ang), np.sin(ang)
        out = x.copy()
        out[..., 0] = c * x[..., 0] - s * x[..., 1]
        out[..., 1] = s * x[..., 0] + c * x[..., 1]
        return out

    def _radial(self, x, a):
        r = np.linalg.norm(x, axis=-1, keepdims=True)
        with np.errstate(divide="ignore", invalid="ignore"):
            k = np.where(r > 0, r ** (a - 1.0), 0.0)
        return k * x

    def _apply(self, x, inverse):
        x = as_points(x, self.dim)
        xs = np.atleast_2d(x)
        inf = is_infinite(xs)
        fin = np.where(inf[:, None], 0.0, xs)
        if self.kind == "identity":
            out = fin.copy()
        elif self.kind == "shear":
            out = fin.copy()
            out[:, 0] += (-self.beta if inverse else self.beta) * fin[:, -1]
        elif self.kind == "twist":
            out = self._twist(fin, -1.0 if inverse else 1.0)
        else:
            out = self._radial(fin, 1.0 / self.alpha if inverse else self.alpha)
        out[inf] = np.inf
        return out if x.ndim > 1 else out[0]

    def __call__(self, x):
        return self._apply(x, False)

    def inverse(self, y):
        return self._apply(y, True)


class ConjugatedMap:
    """f_g = g o f o g^{-1}."""

    def __init__(self, f, g: QcDeformation):
        if g.dim != f.dim:
            raise ConfigError("deformation and map dimensions differ")
        self.f = f
        self.g = g
        self.dim = f.dim
        self.kind = getattr(f, "kind", "map")

    def __repr__(self):
        return f"ConjugatedMap({self.f!r}, {self.g})"

    def __call__(self, y):
        return self.g(self.f(self.g.inverse(y)))

    def iterate(self, y, m):
        return self.g(self.f.iterate(self.g.inverse(y), m)) if hasattr(self.f, "iterate") else _iterate(self, y, m)


def _iterate(f, y, m):
    for _ in range(m):
        y = f(y)
    return y


def conjugate(f, g: QcDeformation):
    if g.kind == "identity":
        return f
    return ConjugatedMap(f, g)
