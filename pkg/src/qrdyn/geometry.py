"""Points of the extended space, the chordal metric, rigid motions and ball
automorphisms.

Points are plain float arrays of shape ``(..., n)`` with ``n`` in {2, 3}.
The point at infinity is encoded as a row whose entries are all ``inf``;
any row with a non-finite entry is treated as infinity.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

ORTHO_TOL = 1e-12


def as_points(x, n: int | None = None) -> np.ndarray:
    a = np.asarray(x, dtype=float)
    if a.ndim == 0:
        raise DomainError("a point needs at least one coordinate")
    if n is not None and a.shape[-1] != n:
        raise DomainError(f"expected points in R^{n}, got shape {a.shape}")
    return a


def infinity(n: int) -> np.ndarray:
    return np.full(n, np.inf)


def is_infinite(x) -> np.ndarray:
    """Boolean mask (over the leading axes) of rows representing infinity."""
    return ~np.all(np.isfinite(np.asarray(x, dtype=float)), axis=-1)


def check_dimension(n: int) -> int:
    if n not in (2, 3):
        raise DomainError(f"dimension must be 2 or 3, got {n}")
    return n


def safe_norm(x) -> np.ndarray:
    """Euclidean norm over the last axis without overflow for huge entries."""
    x = np.asarray(x, dtype=float)
    m = np.max(np.abs(x), axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.where(m > 0, m, 1.0)
        return m * np.sqrt(np.sum((x / s[..., None]) ** 2, axis=-1))


def chordal_distance(p, q) -> np.ndarray:
    """Chordal distance on R^n with infinity adjoined.

    q(x, y) = 2|x - y| / sqrt((1 + |x|^2)(1 + |y|^2)),  q(x, inf) = 2 / sqrt(1 + |x|^2).
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    p, q = np.broadcast_arrays(p, q)
    pinf = is_infinite(p)
    qinf = is_infinite(q)
    pf = np.where(pinf[..., None], 0.0, p)
    qf = np.where(qinf[..., None], 0.0, q)
    hp = np.hypot(1.0, safe_norm(pf))
    hq = np.hypot(1.0, safe_norm(qf))
    with np.errstate(over="ignore", invalid="ignore"):
        # scale before subtracting so huge coordinates cannot overflow
        d = 2.0 * safe_norm(pf / hp[..., None] - qf * (1.0 / hp)[..., None]) / hq
    d = np.where(np.isfinite(d), d, 0.0)
    d = np.where(pinf & ~qinf, 2.0 / hq, d)
    d = np.where(qinf & ~pinf, 2.0 / hp, d)
    d = np.where(pinf & qinf, 0.0, d)
    return np.minimum(d, 2.0)


@dataclass(frozen=True, eq=False)
class Isometry:
    """x -> rotation @ x + translation, an orientation preserving rigid motion of R^n.

    Calling an isometry on points of R^{n-1} applies its restriction to the
    hyperplane x_n = 0 (the transverse action); every isometry used for
    crystallographic groups preserves that hyperplane.
    """

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        rot = np.array(self.rotation, dtype=float)
        tr = np.array(self.translation, dtype=float)
        n = rot.shape[0]
        if rot.shape != (n, n) or tr.shape != (n,):
            raise DomainError("rotation must be n x n and translation length n")
        if np.max(np.abs(rot.T @ rot - np.eye(n))) > ORTHO_TOL:
            raise DomainError("rotation part is not orthogonal")
        if abs(np.linalg.det(rot) - 1.0) > ORTHO_TOL:
            raise DomainError("rotation part must have determinant +1")
        rot.setflags(write=False)
        tr.setflags(write=False)
        object.__setattr__(self, "rotation", rot)
        object.__setattr__(self, "translation", tr)

    @classmethod
    def identity(cls, n: int) -> "Isometry":
        return cls(np.eye(n), np.zeros(n))

    @classmethod
    def translate(cls, v) -> "Isometry":
        v = np.asarray(v, dtype=float)
        return cls(np.eye(len(v)), v)

    @property
    def dim(self) -> int:
        return self.rotation.shape[0]

    def transverse(self) -> tuple[np.ndarray, np.ndarray]:
        """Restriction to x_n = 0 as (orthogonal block, translation)."""
        return self.rotation[:-1, :-1], self.translation[:-1]

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] == self.dim:
            return x @ self.rotation.T + self.translation
        if x.shape[-1] == self.dim - 1:
            rot, tr = self.transverse()
            return x @ rot.T + tr
        raise DomainError(f"isometry of R^{self.dim} applied to shape {x.shape}")

    def compose(self, other: "Isometry") -> "Isometry":
        """self o other."""
        return Isometry(self.rotation @ other.rotation,
                        self.rotation @ other.translation + self.translation)

    def inverse(self) -> "Isometry":
        rt = self.rotation.T
        return Isometry(rt, -rt @ self.translation)

    def __matmul__(self, other: "Isometry") -> "Isometry":
        return self.compose(other)

    def close_to(self, other: "Isometry", tol: float = 1e-12) -> bool:
        return (np.max(np.abs(self.rotation - other.rotation)) <= tol
                and np.max(np.abs(self.translation - other.translation)) <= tol)

    def __repr__(self):
        return f"Isometry(rotation={self.rotation.tolist()}, translation={self.translation.tolist()})"


def isometry_apply(g: Isometry, x) -> np.ndarray:
    return g(x)


def isometry_compose(g: Isometry, h: Isometry) -> Isometry:
    return g.compose(h)


def isometry_invert(g: Isometry) -> Isometry:
    return g.inverse()


def rotation_about(center, angle: float = np.pi) -> Isometry:
    """Planar rotation about ``center`` (2D), or about the vertical line through
    ``center`` when a 3-vector is given."""
    c = np.asarray(center, dtype=float)
    ca, sa = np.cos(angle), np.sin(angle)
    if angle == np.pi:
        ca, sa = -1.0, 0.0
    rot = np.eye(len(c))
    rot[:2, :2] = [[ca, -sa], [sa, ca]]
    return Isometry(rot, c - rot @ c)


def mobius_add(a, x) -> np.ndarray:
    """Moebius addition a (+) x in the unit ball."""
    a = np.asarray(a, dtype=float)
    x = np.asarray(x, dtype=float)
    ax = np.sum(a * x, axis=-1, keepdims=True)
    aa = np.sum(a * a, axis=-1, keepdims=True)
    xx = np.sum(x * x, axis=-1, keepdims=True)
    num = (1.0 + 2.0 * ax + xx) * a + (1.0 - aa) * x
    return num / (1.0 + 2.0 * ax + aa * xx)


@dataclass(frozen=True, eq=False)
class BallMobius:
    """x -> post_rotation @ ((-center) (+) x): a conformal automorphism of the
    unit ball sending ``center`` to the origin."""

    center: np.ndarray
    post_rotation: np.ndarray

    def __post_init__(self):
        c = np.array(self.center, dtype=float)
        o = np.array(self.post_rotation, dtype=float)
        if np.linalg.norm(c) >= 1.0:
            raise DomainError("center must lie in the open unit ball")
        if np.max(np.abs(o.T @ o - np.eye(len(c)))) > ORTHO_TOL:
            raise DomainError("post_rotation must be orthogonal")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "post_rotation", o)

    @classmethod
    def elliptic(cls, n: int, angle: float) -> "BallMobius":
        """Rotation of the ball about the last-but-one coordinate plane."""
        o = np.eye(n)
        o[:2, :2] = [[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]]
        return cls(np.zeros(n), o)

    @property
    def dim(self) -> int:
        return len(self.center)

    def __call__(self, x) -> np.ndarray:
        x = as_points(x, self.dim)
        if np.any(np.linalg.norm(x, axis=-1) >= 1.0):
            raise DomainError("ball Moebius map evaluated outside the open unit ball")
        return mobius_add(-self.center, x) @ self.post_rotation.T

    def inverse_eval(self, y) -> np.ndarray:
        y = as_points(y, self.dim)
        if np.any(np.linalg.norm(y, axis=-1) >= 1.0):
            raise DomainError("ball Moebius map evaluated outside the open unit ball")
        return mobius_add(self.center, y @ self.post_rotation)


def ball_mobius_eval(t: BallMobius, x) -> np.ndarray:
    return t(x)
