"""Residual checks of the defining identities of a scene, on seeded sample
sets, collected into a JSON-ready report."""
from __future__ import annotations

import numpy as np

from .automorphic import AutomorphicMap
from .config import Scene
from .errors import QrdynError
from .geometry import chordal_distance
from .io import SCHEMA_VERSION
from .schroeder import (ConformalAutomorphism, HdMap, LiftedMap, SchroederMap, cheb_map,
                        joukowsky, linearize, power_map)


def tolerances(dim: int) -> dict:
    if dim == 2:
        # iterates near critical points lose about d^(2m) ulps whatever the method
        return {"default": 1e-11, "iterate": 1e-8, "conjugate": 1e-11}
    return {"default": 1e-9, "iterate": 1e-8, "conjugate": 1e-8}


def beam_samples(rng, h: AutomorphicMap, count: int, height: float = 3.0, spread: float = 3.0):
    n = h.dim
    x = np.empty((count, n))
    width = 2.0 * np.pi if n == 2 else spread
    x[:, :-1] = rng.uniform(-width, width, (count, n - 1))
    x[:, -1] = rng.uniform(-height, height, count)
    return x


def linearizer_base(h: AutomorphicMap, d: int) -> np.ndarray:
    """A transverse point x* with trivial stabilizer and d x* in G x*."""
    name = h.group.name
    if name == "zorich2":
        return np.array([0.0])
    if name == "sine2":
        return np.array([2.0 * np.pi / (d + 1)])
    if name == "p2":
        return np.array([2.0 / (d + 1), 0.0])
    return np.array([2.0 / (d + 1), 2.0 / (d + 1)])


class _Suite:
    def __init__(self, dim):
        self.tol = tolerances(dim)
        self.entries = []

    def add(self, identity, fn, kind="default"):
        tol = self.tol[kind]
        try:
            res = np.asarray(fn(), dtype=float)
            worst = float(np.max(res))
            ok = bool(np.isfinite(worst) and worst < tol)
            entry = {"identity": identity, "sample_count": int(res.size),
                     "max_residual": worst, "tolerance": tol, "pass": ok}
        except (QrdynError, FloatingPointError, ValueError) as exc:
            entry = {"identity": identity, "sample_count": 0, "max_residual": None,
                     "tolerance": tol, "pass": False, "detail": f"{type(exc).__name__}: {exc}"}
        self.entries.append(entry)

    def flag(self, identity, ok, detail=None):
        entry = {"identity": identity, "sample_count": 1, "max_residual": 0.0 if ok else 1.0,
                 "tolerance": 0.5, "pass": bool(ok)}
        if detail:
            entry["detail"] = detail
        self.entries.append(entry)


def _carrier_checks(s: _Suite, h: AutomorphicMap, rng, count, label):
    x = beam_samples(rng, h, count)
    hx = h(x)
    for i, g in enumerate(h.group.generators()):
        s.add(f"automorphy[{label}:generator{i}]", lambda g=g: chordal_distance(h(g(x)), hx))


def _schroeder_checks(s: _Suite, f: SchroederMap, rng, count):
    h, A = f.h, f.A
    x = beam_samples(rng, h, count)
    s.add("schroeder", lambda: chordal_distance(f(h(x)), h(A(x))))

    def iterate():
        # heights shrink so that A^8 x stays below the overflow limit
        d = A.scale
        xs = beam_samples(rng, h, count, height=min(3.0, 600.0 / d ** 8), spread=2.0)
        y = h(xs)
        worst = np.zeros(len(xs))
        for m in range(1, 9):
            y = f(y)
            worst = np.maximum(worst, chordal_distance(y, h(A.power(m)(xs))))
        return worst

    s.add("iterate[m<=8]", iterate, "iterate")

    def fibre():
        # A g A^{-1} in G makes f independent of the chosen fibre point
        elems = h.group.elements_near(np.zeros(h.dim - 1), 8.0)
        pick = rng.integers(0, len(elems), len(x))
        gx = np.array([elems[k](p) for k, p in zip(pick, x)])
        return chordal_distance(h(A(gx)), h(A(x)))

    s.add("fibre_independence", fibre)

    def lin():
        d = int(round(A.scale))
        L = linearize(f, linearizer_base(h, d))
        v = rng.uniform(-1.0, 1.0, (min(count, 2000), h.dim))
        v *= (10.0 * rng.uniform(0.0, 1.0, len(v)) / np.linalg.norm(v, axis=1))[:, None]
        return chordal_distance(f(L(v)), L(L.multiply(v)))

    s.add("linearizer", lin)


def _joukowsky_checks(s: _Suite, dim, d, rng, count, variant):
    j = joukowsky(dim, variant)
    y = j.Z(beam_samples(rng, j.Z, count, height=2.0))
    s.add("involution[I o I = id]", lambda: chordal_distance(j.involution(j.involution(y)), y))
    s.add("involution[h1 o I = h1]", lambda: chordal_distance(j.h1(j.involution(y)), j.h1(y)))
    zg, sg = j.Z.group.name, j.S.group.name
    dd = max(d, 2)
    cheb = cheb_map(sg, dd, variant)
    power = power_map(zg, dd)
    s.add(f"semiconjugacy[d={dd}]", lambda: chordal_distance(cheb(j.h1(y)), j.h1(power(y))))
    return y


def run_suite(scene: Scene, samples: int = 10_000, seed: int = 0) -> dict:
    cfg = scene.config
    rng = np.random.default_rng(seed)
    s = _Suite(cfg.dim)
    f = scene.schroeder
    if f is not None:
        cert = f.certificate
        s.flag("admissibility", cert.ok,
               None if cert.ok else f"A = {f.A.scale:g} * identity does not normalize {f.h.group.name}")
        _carrier_checks(s, f.h, rng, samples, f.h.kind)
        _schroeder_checks(s, f, rng, samples)
    y = _joukowsky_checks(s, cfg.dim, cfg.d, rng, samples, cfg.variant)
    base = scene.base_map
    if isinstance(base, HdMap):
        j = base.j
        _carrier_checks(s, j.Z, rng, samples, j.Z.kind)
        _carrier_checks(s, j.S, rng, samples, j.S.kind)
        power = power_map(j.Z.group, base.d) if base.d >= 2 else None
        if power is not None:
            s.add(f"h_d = h1 o power[d={base.d}]",
                  lambda: chordal_distance(base(y), j.h1(power(y))))
    if isinstance(base, LiftedMap):
        ys = y[np.abs(np.linalg.norm(y, axis=1) - 1.0) > 1e-6]
        rep = base.report(ys)
        s.entries.append({"identity": "lift[f o h1 = h1 o P]", "sample_count": len(ys),
                          "max_residual": rep.semiconjugacy_residual, "tolerance": 1e-8,
                          "pass": rep.semiconjugacy_residual < 1e-8})
        s.entries.append({"identity": "lift[rho o P = P o rho]", "sample_count": len(ys),
                          "max_residual": rep.involution_residual, "tolerance": 1e-8,
                          "pass": rep.involution_residual < 1e-8})
    if scene.deformation.kind != "identity":
        g = scene.deformation
        fg = scene.map
        pts = g(y[: min(samples, 1000)])
        s.add("conjugate_iterate[m=3]",
              lambda: chordal_distance(fg(fg(fg(pts))), g(base(base(base(g.inverse(pts)))))),
              "conjugate")
    if cfg.dim == 2:
        _oracle_checks(s, scene, rng, samples)
    ok = all(e["pass"] for e in s.entries)
    return {"schema_version": SCHEMA_VERSION, "scene": _scene_summary(scene, seed, samples),
            "entries": s.entries, "pass": ok}


def _to_complex(y):
    return y[:, 0] - 1j * y[:, 1]


def _from_complex(z):
    return np.stack([z.real, -z.imag], axis=-1)


def _oracle_checks(s: _Suite, scene: Scene, rng, count):
    """Exact planar scenes against complex arithmetic (z = x1 - i x2)."""
    cfg = scene.config
    f = scene.base_map
    y = rng.uniform(-3.0, 3.0, (count, 2))
    z = _to_complex(y)
    d = cfg.d
    if cfg.map == "power" and f.certificate.ok:
        s.add(f"oracle[power = z^{d}]", lambda: chordal_distance(f(y), _from_complex(z ** d)))
    elif cfg.map == "chebyshev" and f.certificate.ok:
        T = np.polynomial.chebyshev.Chebyshev.basis(d)
        s.add(f"oracle[chebyshev = T_{d}]", lambda: chordal_distance(f(y), _from_complex(T(z))))
    j = joukowsky(2)
    s.add("oracle[h1 = (z + 1/z)/2]", lambda: chordal_distance(j.h1(y), _from_complex((z + 1 / z) / 2)))
    s.add("oracle[I = 1/z]", lambda: chordal_distance(j.involution(y), _from_complex(1 / z)))


def _scene_summary(scene: Scene, seed, samples) -> dict:
    cfg = scene.config
    return {"dim": cfg.dim, "group": cfg.group, "map": cfg.map, "d": cfg.d,
            "scale": cfg.effective_scale(), "variant": cfg.variant, "deform": cfg.deform,
            "seed": seed, "samples": samples}
