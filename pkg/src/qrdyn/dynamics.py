"""Iteration on the extended space: orbit classification, escape-time rasters
on planar slices, Denjoy-Wolff analysis in the unit ball, and linear
distortion estimates.

A "map" here is any callable taking an (N, n) array of points (rows of inf
for infinity) to an (N, n) array.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .errors import ConfigError, DomainError
from .geometry import as_points, chordal_distance, is_infinite

TO_ZERO, TO_INFINITY, BOUNDED, UNDECIDED = 0, 1, 2, 3
CLASS_NAMES = ("ToZero", "ToInfinity", "Bounded", "Undecided")

R_SMALL = 1e-6
R_LARGE = 1e6
MAX_ITER = 200


def _check_thresholds(max_iter, r_small, r_large):
    if max_iter < 1 or not (0 < r_small < 1 < r_large):
        raise ConfigError("need max_iter >= 1 and 0 < r_small < 1 < r_large")


def zero_is_fixed(f, dim: int) -> bool:
    """Whether f(0) = 0 (only then is escape to 0 a classification)."""
    try:
        return bool(np.all(np.atleast_2d(f(np.zeros((1, dim)))) == 0.0))
    except (DomainError, ValueError):
        return False


def _iterate(f, y, m):
    if hasattr(f, "iterate"):
        return f.iterate(y, m)
    for _ in range(m):
        y = f(y)
    return y


# ---------------------------------------------------------------------------
# orbits

@dataclass
class OrbitRecord:
    start: np.ndarray
    samples: np.ndarray
    classification: str
    iterations_used: int


def classify_orbit(f, x, max_iter: int = MAX_ITER, r_small: float = R_SMALL,
                   r_large: float = R_LARGE, zero_attracting: bool | None = None) -> OrbitRecord:
    _check_thresholds(max_iter, r_small, r_large)
    x = np.asarray(x, dtype=float)
    dim = x.shape[-1]
    if zero_attracting is None:
        zero_attracting = zero_is_fixed(f, dim)
    y = x.reshape(1, dim)
    samples = [y[0].copy()]
    verdict = UNDECIDED
    m = 0
    while True:
        r = np.inf if is_infinite(y)[0] else float(np.linalg.norm(y[0]))
        if math.isnan(r):
            break
        if r > r_large:
            verdict = TO_INFINITY
            break
        if r < r_small and zero_attracting:
            verdict = TO_ZERO
            break
        if m == max_iter:
            verdict = BOUNDED
            break
        y = np.atleast_2d(f(y))
        m += 1
        samples.append(y[0].copy())
    return OrbitRecord(x.copy(), np.array(samples), CLASS_NAMES[verdict], m)


def classify_points(f, pts, max_iter: int = MAX_ITER, r_small: float = R_SMALL,
                    r_large: float = R_LARGE, zero_attracting: bool | None = None):
    """Vectorized orbit classification; returns (classes uint8, iterations int32)."""
    _check_thresholds(max_iter, r_small, r_large)
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    n = len(pts)
    if zero_attracting is None:
        zero_attracting = zero_is_fixed(f, pts.shape[1])
    cls = np.full(n, UNDECIDED, dtype=np.uint8)
    its = np.zeros(n, dtype=np.int32)
    idx = np.arange(n)
    y = pts.copy()
    for m in range(max_iter + 1):
        with np.errstate(invalid="ignore", over="ignore"):
            r = np.linalg.norm(np.where(is_infinite(y)[:, None], np.inf, y), axis=1)
        nan = np.isnan(r) | np.any(np.isnan(y), axis=1)
        big = ~nan & (r > r_large)
        # escape to 0 only counts when 0 is a fixed point of f
        small = ~nan & (r < r_small) & zero_attracting
        cls[idx[big]] = TO_INFINITY
        cls[idx[small]] = TO_ZERO
        done = nan | big | small
        its[idx[done]] = m
        keep = ~done
        idx, y = idx[keep], y[keep]
        if len(idx) == 0:
            break
        if m == max_iter:
            cls[idx] = BOUNDED
            its[idx] = m
            break
        y = np.atleast_2d(f(y))
    return cls, its


# ---------------------------------------------------------------------------
# slices and rasters

@dataclass(frozen=True, eq=False)
class Slice:
    """The square origin + a*u + b*v, |a|, |b| <= extent."""

    origin: np.ndarray
    u: np.ndarray
    v: np.ndarray
    extent: float = 2.0

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        v = np.asarray(self.v, dtype=float)
        if self.extent <= 0:
            raise ConfigError("slice extent must be positive")
        if abs(np.linalg.norm(u) - 1) > 1e-12 or abs(np.linalg.norm(v) - 1) > 1e-12 or abs(u @ v) > 1e-12:
            raise ConfigError("slice vectors must be orthonormal")
        object.__setattr__(self, "origin", np.asarray(self.origin, dtype=float))
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    @classmethod
    def plane(cls, dim: int, name: str = "xy", offset: float = 0.0, extent: float = 2.0) -> "Slice":
        axes = {"xy": (0, 1, 2), "xz": (0, 2, 1), "yz": (1, 2, 0)}
        if name not in axes or (dim == 2 and name != "xy"):
            raise ConfigError(f"unknown slice {name!r} in dimension {dim}")
        a, b, c = axes[name]
        e = np.eye(dim)
        origin = np.zeros(dim)
        if dim == 3:
            origin[c] = offset
        return cls(origin, e[a], e[b], extent)

    @property
    def dim(self) -> int:
        return len(self.origin)

    def coordinates(self, resolution: int) -> np.ndarray:
        """Cell centre coordinates along each axis: -extent + i * 2 extent / N.

        This puts the slice axes themselves on the grid."""
        return -self.extent + np.arange(resolution) * (2.0 * self.extent / resolution)

    def cell_size(self, resolution: int) -> float:
        return 2.0 * self.extent / resolution

    def cell_diagonal(self, resolution: int) -> float:
        return math.sqrt(2.0) * self.cell_size(resolution)

    def centers(self, resolution: int) -> np.ndarray:
        """(N, N, n) cell centres, row index along v, column index along u."""
        a = self.coordinates(resolution)
        return self.origin + a[None, :, None] * self.u + a[:, None, None] * self.v


@dataclass(eq=False)
class JuliaRaster:
    slice: Slice
    resolution: int
    classes: np.ndarray
    iterations: np.ndarray
    max_iter: int
    backend: str = "numpy"

    @property
    def cell_diagonal(self) -> float:
        return self.slice.cell_diagonal(self.resolution)

    def centers(self) -> np.ndarray:
        return self.slice.centers(self.resolution)

    def interface_mask(self) -> np.ndarray:
        c = self.classes
        m = np.zeros(c.shape, dtype=bool)
        dv = c[1:, :] != c[:-1, :]
        du = c[:, 1:] != c[:, :-1]
        m[1:, :] |= dv
        m[:-1, :] |= dv
        m[:, 1:] |= du
        m[:, :-1] |= du
        return m

    def counts(self) -> dict:
        return {CLASS_NAMES[k]: int(np.sum(self.classes == k)) for k in range(4)}


def _kernel_spec(f):
    """(group name, degree) when f is a plain power map the compiled kernel covers."""
    from .schroeder import SchroederMap
    if type(f) is not SchroederMap or f.kind != "power":
        return None
    if not f.A.is_dilation or not float(f.A.scale).is_integer():
        return None
    if f.h.group.name not in ("p2", "zorich2"):
        return None
    return f.h.group.name, int(f.A.scale)


def julia_raster(f, slice: Slice, resolution: int = 256, max_iter: int = MAX_ITER,
                 r_small: float = R_SMALL, r_large: float = R_LARGE, threads: int = 1,
                 backend: str | None = "auto") -> JuliaRaster:
    """Escape-time classification of every cell centre of a planar slice.

    ``backend`` is "auto" (compiled kernel when it covers f), "cython",
    "python" (kernel fallback) or None/"numpy" (generic map evaluation)."""
    if not 16 <= resolution <= 4096:
        raise ConfigError("resolution must be between 16 and 4096")
    if slice.dim != f.dim:
        raise ConfigError("slice and map dimensions differ")
    _check_thresholds(max_iter, r_small, r_large)
    pts = slice.centers(resolution).reshape(-1, f.dim)
    spec = _kernel_spec(f) if backend not in (None, "numpy") else None
    if spec is not None:
        from ._backend import BACKEND, get_kernels
        name = None if backend == "auto" else backend
        kern = get_kernels(name)
        used = name or BACKEND
        run = lambda p: kern.classify_power(p, spec[1], spec[0], max_iter, r_small, r_large)
    else:
        used = "numpy"
        z = zero_is_fixed(f, f.dim)
        run = lambda p: classify_points(f, p, max_iter, r_small, r_large, z)
    chunks = np.array_split(pts, max(1, int(threads)))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=int(threads)) as pool:
            parts = list(pool.map(run, chunks))
    else:
        parts = [run(c) for c in chunks]
    cls = np.concatenate([p[0] for p in parts]).reshape(resolution, resolution)
    its = np.concatenate([p[1] for p in parts]).reshape(resolution, resolution)
    return JuliaRaster(slice, resolution, cls, its, max_iter, used)


def julia_points(raster: JuliaRaster) -> dict:
    """Interface cells as a point cloud: centres (M, n), classes, iterations."""
    mask = raster.interface_mask()
    return {
        "points": raster.centers()[mask],
        "classes": raster.classes[mask],
        "iterations": raster.iterations[mask],
    }


def cell_corners(slice: Slice, resolution: int, row: int, col: int) -> np.ndarray:
    a = slice.coordinates(resolution)
    h = 0.5 * slice.cell_size(resolution)
    cu, cv = a[col], a[row]
    return np.array([slice.origin + (cu + su * h) * slice.u + (cv + sv * h) * slice.v
                     for su in (-1, 1) for sv in (-1, 1)])


def blowup_witness(f, points, max_iter: int = 60, threshold: float = 1.0):
    """First iterate at which the images of ``points`` have chordal diameter
    above ``threshold`` (None if that never happens within max_iter)."""
    y = np.atleast_2d(np.asarray(points, dtype=float))
    for m in range(max_iter + 1):
        diam = np.max(chordal_distance(y[:, None, :], y[None, :, :]))
        if diam > threshold:
            return m
        y = f(y)
    return None


# ---------------------------------------------------------------------------
# Denjoy-Wolff

def sphere_directions(dim: int, count: int, phase: float = 0.0) -> np.ndarray:
    """Deterministic near-uniform unit vectors (Fibonacci sphere in R^3)."""
    i = np.arange(count) + 0.5
    if dim == 2:
        a = 2.0 * np.pi * (i + phase) / count
        return np.stack([np.cos(a), np.sin(a)], axis=-1)
    if dim != 3:
        raise DomainError("dimension must be 2 or 3")
    z = 1.0 - 2.0 * i / count
    rho = np.sqrt(1.0 - z * z)
    a = np.pi * (3.0 - math.sqrt(5.0)) * i + 2.0 * np.pi * phase
    return np.stack([rho * np.cos(a), rho * np.sin(a), z], axis=-1)


def sample_net(dim: int, sample_radius: float, count: int = 200, phase: float = 0.0) -> np.ndarray:
    """Shells at radii 0.1, 0.3, 0.5 times sample_radius, ``count`` points total."""
    sizes = [len(s) for s in np.array_split(np.arange(count), 3)]
    shells = [r * sample_radius * sphere_directions(dim, k, phase)
              for r, k in zip((0.1, 0.3, 0.5), sizes)]
    return np.vstack(shells)


@dataclass
class ConvergenceReport:
    verdict: str
    point: list | None
    iterations: int
    trace: list
    net: dict
    unique: bool | None = None
    notes: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "point": self.point,
            "iterations": self.iterations,
            "sup_distance_trace": self.trace,
            "net": self.net,
            "unique": self.unique,
            "notes": self.notes,
        }


def _converge(f, pts, tol, max_iter, window=4):
    x = pts.copy()
    c = pts.mean(axis=0, keepdims=True)
    hist = []
    trace = []
    for m in range(1, max_iter + 1):
        x = np.atleast_2d(f(x))
        c = np.atleast_2d(f(c))
        hist.append(c[0])
        x0 = np.mean(hist[-window:], axis=0)
        sup = float(np.max(chordal_distance(x, x0)))
        trace.append(sup)
        settled = float(chordal_distance(hist[-1], x0)) < tol
        if sup < tol and settled:
            return True, x0, m, trace
    return False, None, max_iter, trace


def _recurrent(f, pts, tol, window):
    """Every point returns within tol of its start, with pairwise distances
    kept within 10% along the way."""
    d0 = np.linalg.norm(pts[:, None] - pts[None, :], axis=-1)
    off = ~np.eye(len(pts), dtype=bool)
    x = pts.copy()
    returned = np.zeros(len(pts), dtype=bool)
    worst = 0.0
    for m in range(1, window + 1):
        x = np.atleast_2d(f(x))
        d = np.linalg.norm(x[:, None] - x[None, :], axis=-1)
        worst = max(worst, float(np.max(np.abs(d[off] / d0[off] - 1.0))))
        if worst > 0.1:
            return False, m, worst
        returned |= np.linalg.norm(x - pts, axis=1) < tol
        if np.all(returned):
            return True, m, worst
    return False, window, worst


def denjoy_wolff(f, dim: int | None = None, sample_radius: float = 0.5, tol: float = 1e-8,
                 max_iter: int = 200, chart=None, recurrence_window: int = 10_000) -> ConvergenceReport:
    """Empirical Denjoy-Wolff classification of a self-map of the unit ball.

    ``chart`` is an optional deformation g: samples are taken in g(ball) and
    f is expected to map g(ball) into itself (as for g o f o g^{-1})."""
    dim = dim or f.dim
    if not 0 < sample_radius < 1:
        raise ConfigError("sample_radius must lie in (0, 1)")
    nets = [sample_net(dim, sample_radius, phase=0.0), sample_net(dim, sample_radius, phase=0.5)]
    pts = [chart(n) if chart is not None else n for n in nets]
    for p in pts:
        img = np.atleast_2d(f(p))
        back = chart.inverse(img) if chart is not None else img
        if np.any(is_infinite(back)) or np.any(np.linalg.norm(back, axis=1) > 1.0 + 1e-12):
            raise DomainError("f does not map the sampled ball into the closed unit ball")
    desc = {"shell_radii": [0.1 * sample_radius, 0.3 * sample_radius, 0.5 * sample_radius],
            "points_per_net": len(nets[0]), "nets": 2,
            "chart": repr(chart) if chart is not None else None}
    ok1, x1, m1, trace = _converge(f, pts[0], tol, max_iter)
    if ok1:
        ok2, x2, _, _ = _converge(f, pts[1], tol, max_iter)
        if ok2 and float(chordal_distance(x1, x2)) < tol:
            return ConvergenceReport("Converged", x1.tolist(), m1, trace, desc, unique=True)
        note = ("second sample net converged to a different point" if ok2
                else "second sample net did not converge")
        return ConvergenceReport("Undecided", None, m1, trace, desc, unique=False, notes=[note])
    rec, m, worst = _recurrent(f, pts[0], tol / 10.0, recurrence_window)
    if rec:
        rec2, _, _ = _recurrent(f, pts[1], tol / 10.0, recurrence_window)
        if rec2:
            return ConvergenceReport("AutomorphismLike", None, m, trace, desc,
                                     notes=[f"orbits return after {m} iterates; pairwise distance drift {worst:.3g}"])
    return ConvergenceReport("Undecided", None, max_iter, trace, desc,
                             notes=[f"no convergence below {tol} and no recurrence within {recurrence_window} iterates"])


# ---------------------------------------------------------------------------
# distortion

EPS = np.finfo(float).eps
STABLE_BOUND = 1e-7


@dataclass
class DistortionReport:
    point: list
    radii: list
    maxima: list
    minima: list
    ratios: list
    estimate: float
    stable_radius: float | None
    notes: list = field(default_factory=list)

    def rows(self) -> list:
        return [{"radius": r, "max_stretch": a, "min_stretch": b, "ratio": q}
                for r, a, b, q in zip(self.radii, self.maxima, self.minima, self.ratios)]


def _angles_to_dir(p):
    th, ph = p
    return np.array([math.sin(th) * math.cos(ph), math.sin(th) * math.sin(ph), math.cos(th)])


def _refine(stretch, dim, v0, spacing, sign):
    """Local optimum of sign*stretch(direction) near v0."""
    if dim == 2:
        a0 = math.atan2(v0[1], v0[0])
        obj = lambda a: sign * stretch(np.array([math.cos(a), math.sin(a)]))
        res = minimize_scalar(obj, bounds=(a0 - spacing, a0 + spacing), method="bounded",
                              options={"xatol": 1e-12})
        return sign * float(res.fun)
    # rotate so that v0 sits on the equator, away from the angle chart's poles
    e = np.eye(3)
    w = e[np.argmin(np.abs(v0))]
    b1 = v0
    b2 = np.cross(v0, w)
    b2 /= np.linalg.norm(b2)
    b3 = np.cross(b1, b2)
    frame = np.column_stack([b3, b2, b1])  # polar axis b3, azimuth 0 along b1
    obj = lambda p: sign * stretch(frame @ _angles_to_dir(p))
    x0 = np.array([0.5 * np.pi, 0.0])
    simplex = np.array([x0, x0 + [spacing, 0.0], x0 + [0.0, spacing]])
    res = minimize(obj, x0, method="Nelder-Mead",
                   options={"initial_simplex": simplex, "xatol": 1e-10, "fatol": 0.0, "maxiter": 2000})
    return sign * float(res.fun)


def distortion_estimate(f, x, radii=None, directions: int | None = None,
                        refine: bool = True) -> DistortionReport:
    """max/min of |f(x + r v) - f(x)| over unit directions v, for each r.

    The estimate is the ratio at the smallest radius whose roundoff bound
    (relative error of the ratio from evaluating f) stays below 1e-7."""
    x = as_points(x).astype(float)
    dim = x.shape[-1]
    radii = [10.0 ** -k for k in range(2, 9)] if radii is None else list(radii)
    if any(b >= a for a, b in zip(radii, radii[1:])) or min(radii) < 1e-8:
        raise ConfigError("radii must be decreasing and at least 1e-8")
    count = directions or (64 if dim == 2 else 512)
    if count < (64 if dim == 2 else 512):
        raise ConfigError("too few sample directions")
    dirs = sphere_directions(dim, count)
    spacing = 2.0 * np.pi / count if dim == 2 else math.sqrt(4.0 * np.pi / count)
    fx = np.atleast_2d(f(x[None, :]))[0]
    if not np.all(np.isfinite(fx)):
        raise DomainError("f(x) is not finite")
    out = DistortionReport(x.tolist(), [], [], [], [], float("nan"), None)
    for r0 in radii:
        r = r0
        for _ in range(6):
            vals = np.linalg.norm(np.atleast_2d(f(x + r * dirs)) - fx, axis=1)
            if np.all(np.isfinite(vals)):
                break
            r *= 0.1
        else:
            out.notes.append(f"radius {r0:g}: images reach infinity even after shrinking")
            continue
        if r != r0:
            out.notes.append(f"radius {r0:g} shrunk to {r:g}")

        def stretch(v, r=r):
            return float(np.linalg.norm(np.atleast_2d(f((x + r * v)[None, :]))[0] - fx)) / r

        big = float(np.max(vals)) / r
        small = float(np.min(vals)) / r
        if refine:
            big = max(big, _refine(stretch, dim, dirs[np.argmax(vals)], spacing, -1.0))
            small = min(small, _refine(stretch, dim, dirs[np.argmin(vals)], spacing, 1.0))
        if small <= 0:
            out.notes.append(f"radius {r:g}: a direction is collapsed")
            continue
        out.radii.append(r)
        out.maxima.append(big)
        out.minima.append(small)
        out.ratios.append(max(1.0, big / small))
        bound = 8.0 * EPS * (max(1.0, float(np.linalg.norm(fx))) / (small * r) + float(np.linalg.norm(x)) / r)
        if bound < STABLE_BOUND:
            out.estimate = out.ratios[-1]
            out.stable_radius = r
    if out.stable_radius is None and out.ratios:
        out.estimate = out.ratios[0]
        out.notes.append("no radius passed the roundoff bound; reporting the largest radius")
    return out


def distortion_series(f, x, m_max: int = 10, radii=None, contraction: float | None = None) -> list:
    """Distortion estimates for the iterates f^m, m = 1..m_max.

    Radii for f^m are divided by contraction**m (default: the scale of f's
    conformal automorphism when it has one) so the image balls keep
    comparable size."""
    if contraction is None:
        contraction = getattr(getattr(f, "A", None), "scale", 1.0)
    radii = [1e-3, 1e-4] if radii is None else list(radii)
    reps = []
    for m in range(1, m_max + 1):
        fm = lambda p, m=m: _iterate(f, p, m)
        rm = [max(r / contraction ** m, 1e-8) for r in radii]
        rm = sorted(set(rm), reverse=True)
        reps.append(distortion_estimate(fm, x, rm))
    return reps


def verify_suite(scene, samples: int = 10_000, seed: int = 0) -> dict:
    """Residuals of every defining identity of ``scene`` (see verification)."""
    from .verification import run_suite
    return run_suite(scene, samples, seed)
