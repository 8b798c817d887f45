"""Strongly automorphic maps: Zorich-type (higher-dimensional exp) and
sine-type (higher-dimensional cos), in an exact planar mode and a concrete
three-dimensional construction over the p2 pillowcase.

Beam points are arrays of shape (..., n): the first n-1 coordinates are
transverse, the last one is the beam height.
"""
from __future__ import annotations

import numpy as np

from . import crystal
from .crystal import CrystGroup, reduce_array
from .errors import BeamRangeError, ConfigError, DomainError, OmittedValueError
from .geometry import as_points, infinity, is_infinite, safe_norm

HEIGHT_LIMIT = 700.0
E = np.e
HALF_PI = 0.5 * np.pi

_P2 = crystal.p2()
_ZORICH2 = crystal.zorich2()


# ---------------------------------------------------------------------------
# pillowcase embedding R^2 / p2 -> S^2

def square_to_hemisphere(p) -> np.ndarray:
    """[-1,1]^2 -> closed upper unit hemisphere.

    The square is first sent to the unit disk by rescaling each ray so that
    the max-norm becomes the Euclidean radius, then the disk is wrapped onto
    the hemisphere with polar angle (pi/2) * radius.
    """
    p = np.asarray(p, dtype=float)
    linf = np.max(np.abs(p), axis=-1)
    l2 = np.hypot(p[..., 0], p[..., 1])
    phi = HALF_PI * linf
    with np.errstate(invalid="ignore", divide="ignore"):
        scale = np.where(l2 > 0, np.sin(phi) / l2, 0.0)
    return np.stack([scale * p[..., 0], scale * p[..., 1], np.cos(phi)], axis=-1)


def hemisphere_to_square(s) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    rho = np.hypot(s[..., 0], s[..., 1])
    linf = np.arctan2(rho, s[..., 2]) / HALF_PI
    m = np.maximum(np.abs(s[..., 0]), np.abs(s[..., 1]))
    with np.errstate(invalid="ignore", divide="ignore"):
        k = np.where(m > 0, linf / m, 0.0)
    return np.clip(s[..., :2] * k[..., None], -1.0, 1.0)


def p2_embed(xp) -> np.ndarray:
    """Base embedding u: R^2 -> S^2, invariant under p2.

    [0,1]x[0,1] goes to the upper hemisphere, [-1,0]x[0,1] to the lower one by
    u(-x1, x2) = mirror(u(x1, x2)); the square boundaries land on the equator
    so every p2 gluing is continuous.
    """
    xh = reduce_array(_P2, np.atleast_2d(xp))
    neg = xh[:, 0] < 0
    q = xh.copy()
    q[:, 0] = np.abs(q[:, 0])
    s = square_to_hemisphere(2.0 * q - 1.0)
    s[:, 2] = np.where(neg, -s[:, 2], s[:, 2])
    return s if np.ndim(xp) > 1 else s[0]


def p2_embed_inverse(sigma) -> np.ndarray:
    s = np.atleast_2d(np.asarray(sigma, dtype=float))
    lower = s[:, 2] < 0
    sm = s.copy()
    sm[:, 2] = np.abs(sm[:, 2])
    q = np.clip(0.5 * (hemisphere_to_square(sm) + 1.0), 0.0, 1.0)
    q[:, 0] = np.where(lower, -q[:, 0], q[:, 0])
    out = reduce_array(_P2, q)
    return out if np.ndim(sigma) > 1 else out[0]


# ---------------------------------------------------------------------------
# sine-type cell map on [0,1]^2 x [0, inf) -> closed upper half space

def cell_forward(q, t) -> np.ndarray:
    """Cell map for the sine-type construction.

    Height 0 goes onto the unit disk, height 1 onto the upper hemisphere of
    radius e, the side faces into the plane x3 = 0 outside the disk; above
    height 1 the map grows like e^(t-1).
    """
    q = np.asarray(q, dtype=float)
    t = np.asarray(t, dtype=float)
    p = 2.0 * q - 1.0
    r = np.max(np.abs(p), axis=-1)
    l2 = np.hypot(p[..., 0], p[..., 1])
    tc = np.minimum(t, 1.0)
    a = HALF_PI * r
    horiz = (1.0 - tc) * r + tc * E * np.sin(a)
    vert = tc * E * np.cos(a)
    # vertical component is exactly 0 on the side faces (r == 1)
    vert = np.where(r >= 1.0, 0.0, vert)
    grow = np.exp(np.maximum(t - 1.0, 0.0))
    with np.errstate(invalid="ignore", divide="ignore"):
        k = np.where(l2 > 0, horiz * grow / l2, 0.0)
    return np.stack([k * p[..., 0], k * p[..., 1], vert * grow], axis=-1)


def _solve_cell_radius(rho, v, tol=1e-15, maxiter=80):
    """Solve H(r) = rho inside the unit-height cell, with s = 1 - r as unknown.

    H(r) = r + v (e sin(pi r/2) - r) / (e cos(pi r/2)), monotone on the
    admissible range; safeguarded Newton with bisection fallback.
    """
    smin = np.arcsin(np.clip(v / E, 0.0, 1.0)) / HALF_PI  # height <= 1
    lo = smin.copy()
    hi = np.ones_like(rho)
    s = np.clip(1.0 - rho, lo, hi)
    s = np.where(s <= lo, 0.5 * (lo + hi), s)

    def F(s):
        a = HALF_PI * s
        sa, ca = np.sin(a), np.cos(a)   # sa = cos(pi r/2), ca = sin(pi r/2)
        r = 1.0 - s
        g = (E * ca - r) / (E * sa)
        dg_dr = (E * HALF_PI - sa - HALF_PI * r * ca) / (E * sa * sa)
        return r + v * g - rho, -(1.0 + v * dg_dr)

    for _ in range(maxiter):
        with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
            f, df = F(s)
        # H increases with r, so decreases with s: f > 0 means s too small
        lo = np.where(f > 0, s, lo)
        hi = np.where(f <= 0, s, hi)
        with np.errstate(invalid="ignore", divide="ignore"):
            sn = s - f / df
        bad = ~np.isfinite(sn) | (sn <= lo) | (sn >= hi)
        sn = np.where(bad, 0.5 * (lo + hi), sn)
        done = (np.abs(f) <= tol * np.maximum(1.0, rho)) | (hi - lo <= 4e-16)
        s = np.where(done, s, sn)
        if np.all(done):
            break
    return s


def cell_inverse(y) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of :func:`cell_forward` for y with y3 >= 0: returns (q, t)."""
    y = np.asarray(y, dtype=float)
    rho = np.hypot(y[:, 0], y[:, 1])
    v = y[:, 2]
    big = np.linalg.norm(y, axis=1)
    outer = big >= E
    side = (v == 0.0) & (rho >= 1.0) & ~outer
    inner = ~outer & ~side

    r = np.zeros(len(y))
    t = np.zeros(len(y))
    if np.any(outer):
        yo = y[outer]
        r[outer] = np.arctan2(rho[outer], yo[:, 2]) / HALF_PI
        t[outer] = 1.0 + np.log(big[outer] / E)
    if np.any(side):
        r[side] = 1.0
        t[side] = (rho[side] - 1.0) / (E - 1.0)
    if np.any(inner):
        s = _solve_cell_radius(rho[inner], v[inner])
        r[inner] = 1.0 - s
        with np.errstate(invalid="ignore", divide="ignore"):
            ti = np.where(v[inner] > 0, v[inner] / (E * np.sin(HALF_PI * s)), 0.0)
        t[inner] = np.clip(ti, 0.0, 1.0)
    m = np.maximum(np.abs(y[:, 0]), np.abs(y[:, 1]))
    with np.errstate(invalid="ignore", divide="ignore"):
        k = np.where(m > 0, r / m, 0.0)
    p = np.clip(y[:, :2] * k[:, None], -1.0, 1.0)
    return 0.5 * (p + 1.0), t


# ---------------------------------------------------------------------------

KINDS = ("zorich", "sine", "exp2", "cos2")


class AutomorphicMap:
    """A strongly automorphic map together with its canonical inverse branch.

    ``kind`` is "exp2"/"cos2" for the exact planar maps e^{iz}, cos z with
    z = x1 - i x2, and "zorich"/"sine" for the three-dimensional
    constructions over p2.  Sine-type maps in dimension three come in two
    variants: "cell" (default, the cell construction) and "averaged",
    (Z + Z o R')/2, which is automorphic by construction but whose
    quasiregularity has not been established.
    """

    def __init__(self, kind: str, group: CrystGroup, variant: str = "cell"):
        if kind not in KINDS:
            raise ConfigError(f"unknown automorphic kind {kind!r}")
        expected = {"exp2": "zorich2", "cos2": "sine2", "zorich": "p2", "sine": "p2-sine"}[kind]
        if group.name != expected:
            raise ConfigError(f"{kind} maps are built over group {expected!r}, not {group.name!r}")
        if variant not in ("cell", "averaged"):
            raise ConfigError(f"unknown sine variant {variant!r}")
        self.kind = kind
        self.group = group
        self.variant = variant if kind == "sine" else "cell"
        self.dim = group.dim
        self.zorich_group = group if self.is_zorich else crystal.get_group(crystal.ZORICH_PARTNER[group.name])

    @property
    def is_zorich(self) -> bool:
        return self.kind in ("zorich", "exp2")

    @property
    def is_sine(self) -> bool:
        return not self.is_zorich

    @property
    def beam_rotation(self):
        return self.group.beam_rotation

    def __repr__(self):
        extra = f", variant={self.variant!r}" if self.kind == "sine" else ""
        return f"AutomorphicMap({self.kind!r}, group={self.group.name!r}{extra})"

    # -- evaluation ---------------------------------------------------------

    def __call__(self, x) -> np.ndarray:
        return self.evaluate(x)

    def evaluate(self, x, saturate: bool = False) -> np.ndarray:
        """Forward evaluation.  Beam heights beyond +-700 raise
        :class:`BeamRangeError` unless ``saturate`` is set, in which case
        they return infinity (or 0 for Zorich maps at large negative height)."""
        x = as_points(x, self.dim)
        xs = np.atleast_2d(x)
        t = xs[:, -1]
        over = np.abs(t) > HEIGHT_LIMIT
        if np.any(over) and not saturate:
            raise BeamRangeError(f"beam height {t[over][0]!r} exceeds {HEIGHT_LIMIT}")
        if np.any(over):
            xs = xs.copy()
            xs[over, -1] = 0.0
        y = self._forward(xs)
        if np.any(over):
            low = over & (t < 0) & self.is_zorich
            y[over & ~low] = np.inf
            y[low] = 0.0
        return y if x.ndim > 1 else y[0]

    def _forward(self, x):
        t = x[:, -1]
        if self.kind == "exp2":
            return np.exp(t)[:, None] * np.stack([np.cos(x[:, 0]), np.sin(x[:, 0])], axis=-1)
        if self.kind == "cos2":
            x1, x2 = x[:, 0], x[:, 1]
            return np.stack([np.cos(x1) * np.cosh(x2), np.sin(x1) * np.sinh(x2)], axis=-1)
        if self.kind == "zorich":
            return np.exp(t)[:, None] * p2_embed(x[:, :2])
        if self.variant == "averaged":
            u = p2_embed(x[:, :2])
            return np.stack([np.cosh(t) * u[:, 0], np.cosh(t) * u[:, 1], np.sinh(t) * u[:, 2]], axis=-1)
        # cell construction: bring the transverse part to [0,1]^2 using p2 and R'
        xh = reduce_array(_P2, x[:, :2])
        neg = xh[:, 0] < 0
        q = np.abs(xh)
        h = np.where(neg, -t, t)
        y = cell_forward(q, np.abs(h))
        y[:, 2] = np.where(h < 0, -y[:, 2], y[:, 2])
        return y

    # -- inversion ----------------------------------------------------------

    def invert(self, y) -> np.ndarray:
        """Canonical inverse branch: the preimage in the fundamental beam
        (Zorich type) or half-beam (sine type)."""
        y = as_points(y, self.dim)
        ys = np.atleast_2d(y)
        inf = is_infinite(ys)
        if np.any(inf):
            raise OmittedValueError("infinity is an omitted value")
        if self.is_zorich:
            r = safe_norm(ys)
            if np.any(r == 0.0):
                raise OmittedValueError("0 is an omitted value of a Zorich-type map")
            x = self._zorich_inverse(ys, r)
        else:
            x = self._sine_inverse(ys)
        return x if y.ndim > 1 else x[0]

    def _zorich_inverse(self, y, r):
        t = np.log(r)
        if self.kind == "exp2":
            a = np.arctan2(y[:, 1], y[:, 0])
            x1 = reduce_array(_ZORICH2, a[:, None])[:, 0]
            return np.stack([x1, t], axis=-1)
        xp = p2_embed_inverse(y / r[:, None])
        return np.column_stack([xp, t])

    def _sine_inverse(self, y):
        if self.kind == "cos2":
            z = np.arccos(y[:, 0] + 1j * y[:, 1])
            z = np.where(z.imag > 0, -z, z)
            x = np.stack([z.real, -z.imag], axis=-1)
            x[:, 1] = np.abs(x[:, 1])
        elif self.variant == "averaged":
            x = self._averaged_inverse(y)
        else:
            below = y[:, 2] < 0
            ym = y.copy()
            ym[:, 2] = np.abs(ym[:, 2])
            q, t = cell_inverse(ym)
            # a preimage of a point below the plane is (q, -t); R' maps it to (-q1, q2, t)
            q[:, 0] = np.where(below, -q[:, 0], q[:, 0])
            x = np.column_stack([q, t])
        return self.canonical(x)

    def _averaged_inverse(self, y):
        big = np.max(np.abs(y), axis=1) > 1e50
        ys = np.where(big[:, None], 0.5, y)
        a = ys[:, 0] ** 2 + ys[:, 1] ** 2
        b = ys[:, 2] ** 2
        # (1 + a + b)^2 - 4a written as a sum of nonnegative terms
        disc = np.sqrt((1.0 - a) ** 2 + 2.0 * b * (1.0 + a) + b * b)
        cplus = 0.5 * ((1.0 + a + b) + disc)
        with np.errstate(invalid="ignore", divide="ignore"):
            sh2 = np.where(a + b >= 1.0, 0.5 * ((a + b - 1.0) + disc),
                           b * cplus / (0.5 * ((1.0 - a + b) + disc)))
        t = np.arcsinh(np.sqrt(np.maximum(sh2, 0.0)))
        ch = np.cosh(t)
        sh = np.sinh(t)
        sxy = ys[:, :2] / ch[:, None]
        rest = np.sqrt(np.maximum(0.0, 1.0 - np.sum(sxy ** 2, axis=1)))
        with np.errstate(invalid="ignore", divide="ignore"):
            s3 = np.where(sh > 0, ys[:, 2] / sh, rest)
        # choose the better conditioned estimate of the vertical component
        s3 = np.where((sh > 0) & (np.abs(s3) > 0.5), np.sign(s3) * rest, s3)
        sig = np.column_stack([sxy, s3])
        if np.any(big):
            # cosh t = sinh t = e^t / 2 to double precision
            r = np.linalg.norm(y[big], axis=1)
            sig[big] = y[big] / r[:, None]
            t[big] = np.log(2.0) + np.log(r)
        sig /= np.linalg.norm(sig, axis=1)[:, None]
        return np.column_stack([p2_embed_inverse(sig), t])

    def canonical(self, x) -> np.ndarray:
        """Representative of x (mod the group) in the canonical fundamental
        beam / half-beam.  For sine groups the base of the half-beam is the
        fundamental set of the restricted group on R^{n-1}."""
        x = np.array(np.atleast_2d(as_points(x, self.dim)), dtype=float)
        zg = self.zorich_group
        x[:, :-1] = reduce_array(zg, x[:, :-1])
        if self.is_zorich:
            return x
        rp = self.beam_rotation
        neg = x[:, -1] < 0
        if np.any(neg):
            x[neg] = rp(x[neg])
            x[neg, :-1] = reduce_array(zg, x[neg, :-1])
        base = x[:, -1] == 0
        if np.any(base):
            x[base, :-1] = reduce_array(self.group, x[base, :-1])
        x[:, -1] = np.abs(x[:, -1])
        return x

    def omitted_values(self) -> list:
        n = self.dim
        if self.is_zorich:
            return [np.zeros(n), infinity(n)]
        return [infinity(n)]


def make_map(kind: str, group: CrystGroup | str, variant: str = "cell") -> AutomorphicMap:
    if isinstance(group, str):
        group = crystal.get_group(group)
    return AutomorphicMap(kind, group, variant)


def zorich_map(group: CrystGroup | str) -> AutomorphicMap:
    """Zorich-type map over ``group`` ("zorich2" gives the exact planar mode)."""
    g = crystal.get_group(group) if isinstance(group, str) else group
    return AutomorphicMap("exp2" if g.dim == 2 else "zorich", g)


def sine_map(group: CrystGroup | str, variant: str = "cell") -> AutomorphicMap:
    g = crystal.get_group(group) if isinstance(group, str) else group
    return AutomorphicMap("cos2" if g.dim == 2 else "sine", g, variant)


def base_embed(h: AutomorphicMap, xp) -> np.ndarray:
    """Restriction of a Zorich-type map to height 0: R^{n-1} -> S^{n-1}."""
    xp = np.asarray(xp, dtype=float)
    if h.dim == 2:
        a = xp[..., 0]
        return np.stack([np.cos(a), np.sin(a)], axis=-1)
    return p2_embed(xp)


def base_invert(h: AutomorphicMap, sigma, tol: float = 1e-9) -> np.ndarray:
    sigma = np.asarray(sigma, dtype=float)
    if np.any(np.abs(np.linalg.norm(sigma, axis=-1) - 1.0) > tol):
        raise DomainError("base_invert needs unit vectors")
    if h.dim == 2:
        a = np.arctan2(sigma[..., 1], sigma[..., 0])
        return reduce_array(_ZORICH2, np.atleast_1d(a)[..., None]).reshape(sigma.shape[:-1] + (1,))
    return p2_embed_inverse(sigma)


def zorich_eval(h: AutomorphicMap, x) -> np.ndarray:
    if not h.is_zorich:
        raise ConfigError("zorich_eval needs a Zorich-type map")
    return h(x)


def zorich_invert(h: AutomorphicMap, y) -> np.ndarray:
    if not h.is_zorich:
        raise ConfigError("zorich_invert needs a Zorich-type map")
    return h.invert(y)


def sine_eval(h: AutomorphicMap, x) -> np.ndarray:
    if not h.is_sine:
        raise ConfigError("sine_eval needs a sine-type map")
    return h(x)


def sine_invert(h: AutomorphicMap, y) -> np.ndarray:
    if not h.is_sine:
        raise ConfigError("sine_invert needs a sine-type map")
    return h.invert(y)


def omitted_values(h: AutomorphicMap) -> list:
    return h.omitted_values()
