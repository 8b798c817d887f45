"""Crystallographic groups acting on R^{n-1} (extended trivially, or by the
end-switching rotation, to R^n), fundamental-domain reduction, stabilizers,
orbits and admissibility of conformal automorphisms.

Group elements are proper isometries of the ambient R^n that preserve the
hyperplane x_n = 0; applied to points of R^{n-1} they act through their
restriction (see :class:`~qrdyn.geometry.Isometry`).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigError
from .geometry import Isometry

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True, eq=False)
class Lattice:
    """Rows of ``basis`` are the translation generators in R^{n-1}."""

    basis: np.ndarray

    def __post_init__(self):
        b = np.array(self.basis, dtype=float)
        if b.ndim != 2 or b.shape[0] != b.shape[1] or abs(np.linalg.det(b)) < 1e-12:
            raise ConfigError("lattice basis must be square and nonsingular")
        object.__setattr__(self, "basis", b)

    @property
    def rank(self) -> int:
        return self.basis.shape[0]

    def coords(self, v) -> np.ndarray:
        """Coordinates of v with respect to the basis."""
        return np.asarray(v, dtype=float) @ np.linalg.inv(self.basis)

    def contains(self, v, tol: float = 1e-9) -> bool:
        c = self.coords(v)
        return bool(np.all(np.abs(c - np.round(c)) <= tol))

    def max_norm(self) -> float:
        return float(np.max(np.linalg.norm(self.basis, axis=1)))

    def points_within(self, center, radius: float) -> np.ndarray:
        """All lattice vectors v with |v - center| <= radius."""
        center = np.asarray(center, dtype=float)
        inv = np.linalg.inv(self.basis)
        # |c_i| <= |v| * ||column i of inv||
        c0 = center @ inv
        span = radius * np.linalg.norm(inv, axis=0)
        ranges = [range(int(np.floor(c0[i] - span[i])), int(np.ceil(c0[i] + span[i])) + 1)
                  for i in range(self.rank)]
        ks = np.array(list(itertools.product(*ranges)), dtype=float).reshape(-1, self.rank)
        vs = ks @ self.basis
        keep = np.linalg.norm(vs - center, axis=1) <= radius + 1e-12
        return vs[keep]


@dataclass(frozen=True, eq=False)
class CrystGroup:
    """A crystallographic group on R^{n-1} with spherical orbifold.

    ``point_reps`` are coset representatives of G/T as ambient isometries;
    ``box`` is the closed fundamental polytope (lower and upper corners) of
    the restricted action on R^{n-1}.  ``beam_rotation`` is set for the
    sine-type extensions and is one of the ``point_reps``.
    """

    name: str
    dim: int
    lattice: Lattice
    point_reps: tuple
    box: tuple
    beam_rotation: Isometry | None = None
    reducer: Callable = field(default=None, repr=False)

    @property
    def has_beam_rotation(self) -> bool:
        return self.beam_rotation is not None

    def translation(self, v) -> Isometry:
        full = np.zeros(self.dim)
        full[:-1] = v
        return Isometry.translate(full)

    def generators(self) -> list:
        gens = [self.translation(b) for b in self.lattice.basis]
        gens += [p for p in self.point_reps if not np.allclose(p.rotation, np.eye(self.dim))]
        return gens

    def elements_near(self, x, radius: float) -> list:
        """Group elements g with |g(x) - x| <= radius (x in R^{n-1})."""
        x = np.asarray(x, dtype=float)
        out = []
        for p in self.point_reps:
            px = p(x)
            for v in self.lattice.points_within(x - px, radius):
                out.append(self.translation(v) @ p)
        return out

    def reduce(self, x):
        return reduce(self, x)


def reduce(group: CrystGroup, x):
    """Fundamental-set representative of x in R^{n-1}.

    Returns ``(xhat, gs)``: for a single point, ``gs`` is an Isometry with
    ``gs(xhat) == x``; for an (N, n-1) array, ``gs`` is a list of them.
    Use :func:`reduce_array` for the fast array form without isometries.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    xs = np.atleast_2d(x)
    xhat, rots, trans = group.reducer(xs)
    gs = [Isometry(r, t) for r, t in zip(rots, trans)]
    if single:
        return xhat[0], gs[0]
    return xhat, gs


def reduce_array(group: CrystGroup, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    xs = np.atleast_2d(x)
    xhat = group.reducer(xs, with_elements=False)
    return xhat[0] if x.ndim == 1 else xhat


def _embed(rot_t, trans_t, n):
    """Ambient (n x n, n) data from transverse blocks; the beam coordinate is
    flipped exactly when the transverse block reverses orientation."""
    m = rot_t.shape[0]
    rot = np.zeros((m, n, n))
    rot[:, :-1, :-1] = rot_t
    rot[:, -1, -1] = np.sign(np.linalg.det(rot_t)) if rot_t.shape[-1] > 1 else np.sign(rot_t[:, 0, 0])
    tr = np.zeros((m, n))
    tr[:, :-1] = trans_t
    return rot, tr


def _reduce_zorich2(x, with_elements=True):
    t = x[:, 0]
    k = np.floor(t / TWO_PI)
    xh = t - k * TWO_PI
    over = xh >= TWO_PI
    k = np.where(over, k + 1, k)
    xh = np.where(over, xh - TWO_PI, xh)
    xh = np.where(xh < 0, 0.0, xh)
    xhat = xh[:, None]
    if not with_elements:
        return xhat
    rot = np.broadcast_to(np.eye(2), (len(t), 2, 2)).copy()
    tr = np.zeros((len(t), 2))
    tr[:, 0] = k * TWO_PI
    return xhat, rot, tr


def _reduce_sine2(x, with_elements=True):
    # G1 restricted to the line: x -> x + 2 pi k and x -> -x; fundamental set [0, pi]
    t = x[:, 0]
    k = np.floor(t / TWO_PI)
    xh = t - k * TWO_PI
    xh = np.clip(xh, 0.0, TWO_PI)
    flip = xh > np.pi
    xh = np.where(flip, TWO_PI - xh, xh)
    xhat = xh[:, None]
    if not with_elements:
        return xhat
    s = np.where(flip, -1.0, 1.0)
    # x = s * xhat + shift
    shift = np.where(flip, (k + 1) * TWO_PI, k * TWO_PI)
    rot = np.zeros((len(t), 2, 2))
    rot[:, 0, 0] = s
    rot[:, 1, 1] = s
    tr = np.zeros((len(t), 2))
    tr[:, 0] = shift
    return xhat, rot, tr


def _p2_fold(x):
    """Reduce to the canonical fundamental set of p2 (lattice 2Z^2, pi-rotations
    about integer points); returns (xhat, sign) with x = sign*xhat + 2k."""
    x1 = np.mod(x[:, 0] + 1.0, 2.0) - 1.0
    x2 = np.mod(x[:, 1], 2.0)
    sign = np.ones(len(x))
    # rotation about (0, 1) brings the upper half of the torus cell down
    up = x2 > 1.0
    x1 = np.where(up, -x1, x1)
    x2 = np.where(up, 2.0 - x2, x2)
    sign = np.where(up, -sign, sign)
    # folded edges x2 in {0, 1} keep the x1 >= 0 representative
    edge = (x2 == 0.0) | (x2 == 1.0)
    fold = edge & (x1 < 0.0)
    x1 = np.where(fold, -x1, x1)
    sign = np.where(fold, -sign, sign)
    # faces glued by translation keep x1 = -1, except on the folded edges
    x1 = np.where((x1 >= 1.0) & ~edge, x1 - 2.0, x1)
    x1 = np.where(x1 < -1.0, x1 + 2.0, x1)
    return np.stack([x1, x2], axis=-1), sign


def _reduce_p2(x, with_elements=True):
    xhat, sign = _p2_fold(x)
    if not with_elements:
        return xhat
    t = x - sign[:, None] * xhat
    t = 2.0 * np.round(t / 2.0)
    rot_t = sign[:, None, None] * np.eye(2)
    rot, tr = _embed(rot_t, t, 3)
    rot[:, -1, -1] = 1.0
    return xhat, rot, tr


def _reduce_pmm(x, with_elements=True):
    # restriction of <p2, R'> to the plane: reflections in x_i in Z; fundamental set [0,1]^2
    y = np.mod(x + 1.0, 2.0) - 1.0
    xhat = np.abs(y)
    xhat = np.minimum(xhat, 1.0)
    if not with_elements:
        return xhat
    s = np.where(y < 0.0, -1.0, 1.0)
    t = 2.0 * np.round((x - s * xhat) / 2.0)
    rot_t = np.zeros((len(x), 2, 2))
    rot_t[:, 0, 0] = s[:, 0]
    rot_t[:, 1, 1] = s[:, 1]
    rot, tr = _embed(rot_t, t, 3)
    return xhat, rot, tr


def _diag(*d):
    return Isometry(np.diag(np.asarray(d, dtype=float)), np.zeros(len(d)))


def zorich2() -> CrystGroup:
    return CrystGroup("zorich2", 2, Lattice([[TWO_PI]]), (Isometry.identity(2),),
                      (np.array([0.0]), np.array([TWO_PI])), None, _reduce_zorich2)


def sine2() -> CrystGroup:
    r = _diag(-1.0, -1.0)
    return CrystGroup("sine2", 2, Lattice([[TWO_PI]]), (Isometry.identity(2), r),
                      (np.array([0.0]), np.array([np.pi])), r, _reduce_sine2)


def p2() -> CrystGroup:
    """p2 on R^2: lattice (2,0),(0,2) and pi-rotations about integer points."""
    return CrystGroup("p2", 3, Lattice([[2.0, 0.0], [0.0, 2.0]]),
                      (Isometry.identity(3), _diag(-1.0, -1.0, 1.0)),
                      (np.array([-1.0, 0.0]), np.array([1.0, 1.0])), None, _reduce_p2)


def p2_sine() -> CrystGroup:
    """p2 together with R'(x1, x2, x3) = (-x1, x2, -x3)."""
    r = _diag(-1.0, 1.0, -1.0)
    reps = (Isometry.identity(3), _diag(-1.0, -1.0, 1.0), r, _diag(1.0, -1.0, -1.0))
    return CrystGroup("p2-sine", 3, Lattice([[2.0, 0.0], [0.0, 2.0]]), reps,
                      (np.array([0.0, 0.0]), np.array([1.0, 1.0])), r, _reduce_pmm)


GROUPS = {"zorich2": zorich2, "sine2": sine2, "p2": p2, "p2-sine": p2_sine}

# Zorich group underlying each sine group, and vice versa
SINE_PARTNER = {"zorich2": "sine2", "p2": "p2-sine"}
ZORICH_PARTNER = {v: k for k, v in SINE_PARTNER.items()}


def get_group(name: str) -> CrystGroup:
    try:
        return GROUPS[name]()
    except KeyError:
        raise ConfigError(f"unknown group {name!r}; choose from {sorted(GROUPS)}") from None


def stabilizer(group: CrystGroup, x, tol: float = 1e-12) -> list:
    """All group elements fixing x in R^{n-1}."""
    x = np.asarray(x, dtype=float)
    xhat, g = reduce(group, x)
    bound = 4.0 * group.lattice.max_norm()
    found = []
    for h in group.elements_near(xhat, bound):
        if np.max(np.abs(h(xhat) - xhat)) <= tol:
            found.append(g @ h @ g.inverse())
    return found


def orbit_points(group: CrystGroup, x, radius: float, tol: float = 1e-9) -> np.ndarray:
    """Orbit points of x within distance ``radius`` of x, each listed once."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    x = np.asarray(x, dtype=float)
    pts = []
    for g in group.elements_near(x, radius):
        y = g(x)
        if all(np.linalg.norm(y - p) > tol for p in pts):
            pts.append(y)
    pts.sort(key=lambda p: tuple(p))
    return np.array(pts).reshape(-1, len(x))


@dataclass
class AdmissibilityCertificate:
    ok: bool
    checks: list

    def __bool__(self):
        return self.ok


def check_admissible(group: CrystGroup, scale: float, orthogonal=None,
                     tol: float = 1e-9) -> AdmissibilityCertificate:
    """Whether A = scale * orthogonal satisfies A g A^{-1} in G for every generator g."""
    n = group.dim
    o = np.eye(n) if orthogonal is None else np.asarray(orthogonal, dtype=float)
    if scale <= 0 or o.shape != (n, n) or np.max(np.abs(o.T @ o - np.eye(n))) > 1e-12:
        raise ConfigError("A must be a positive multiple of an orthogonal n x n matrix")
    checks = []
    ok = True
    for g in group.generators():
        rot = o @ g.rotation @ o.T
        tr = scale * (o @ g.translation)
        passed = False
        for p in group.point_reps:
            if np.max(np.abs(p.rotation - rot)) > tol:
                continue
            diff = tr - p.translation
            if abs(diff[-1]) <= tol and group.lattice.contains(diff[:-1], tol):
                passed = True
                break
        checks.append({"generator": repr(g), "conjugate_in_group": passed})
        ok &= passed
    return AdmissibilityCertificate(ok, checks)
