"""Command-line interface.

    qrdyn info | verify | render | preimages | denjoy-wolff | distortion

Exit codes: 0 success, 1 computational failure, 2 configuration or usage
error, 3 I/O error.
"""
from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

from . import __version__
from . import io as qio
from ._backend import BACKEND
from .config import MAP_KINDS, build_scene, load_config
from .errors import ConfigError, DegenerateTargetError, QrdynError

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

SCENE_FLAGS = [
    # flag, dest, type, help
    ("--dim", "dim", int, "ambient dimension (2 or 3)"),
    ("--group", "group", str, "zorich2 | sine2 | p2 | p2-sine"),
    ("--map", "map", str, " | ".join(MAP_KINDS)),
    ("--d", "d", int, "degree"),
    ("--scale", "scale", float, "override the dilation factor of A (default d)"),
    ("--variant", "variant", str, "sine map in dimension 3: cell | averaged"),
    ("--deform", "deform", str, "identity | shear | twist | radial"),
    ("--beta", "beta", float, "shear parameter"),
    ("--theta-max", "theta_max", float, "twist angle"),
    ("--alpha", "alpha", float, "radial power exponent"),
    ("--r-small", "r_small", float, "escape-to-zero radius"),
    ("--r-large", "r_large", float, "escape-to-infinity radius"),
    ("--max-iter", "max_iter", int, "iteration budget per orbit"),
    ("--resolution", "resolution", int, "raster cells per axis"),
    ("--slice", "slice", str, "raster plane: xy | xz | yz"),
    ("--slice-offset", "slice_offset", float, "offset of the raster plane along its normal"),
    ("--extent", "extent", float, "raster half-width"),
    ("--sample-radius", "sample_radius", float, "Denjoy-Wolff sample radius"),
    ("--tol", "tol", float, "Denjoy-Wolff tolerance"),
    ("--mobius", "mobius", str, "none | elliptic (Denjoy-Wolff target)"),
    ("--mobius-angle", "mobius_angle", float, "rotation angle of the elliptic ball map"),
    ("--samples", "samples", int, "sample count for verify"),
]
GLOBAL_FLAGS = [
    ("--seed", "seed", int, "random seed (required by sampling commands)"),
    ("--out", "out", str, "output directory"),
    ("--threads", "threads", int, "worker threads for rendering"),
]


def _add_flags(p, flags, suppress):
    for flag, dest, typ, text in flags:
        p.add_argument(flag, dest=dest, type=typ, help=text,
                       default=argparse.SUPPRESS if suppress else None)


def _parse_vector(text: str) -> list:
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qrdyn", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({BACKEND} kernels)")
    parser.add_argument("--config", default=None, help="scene file (INI)")
    _add_flags(parser, GLOBAL_FLAGS, suppress=False)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="scene file (INI)")
    _add_flags(common, GLOBAL_FLAGS, suppress=True)
    _add_flags(common, SCENE_FLAGS, suppress=True)

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("info", parents=[common], help="describe the scene")
    p = sub.add_parser("verify", parents=[common], help="residuals of the defining identities")
    p.add_argument("--report", default=None, help="JSON report path (default OUT/verify.json)")
    p = sub.add_parser("render", parents=[common], help="escape-time raster of a planar slice")
    p.add_argument("--png", default=None, help="PNG path (default OUT/render.png)")
    p.add_argument("--csv", action="store_true", help="also write OUT/interface.csv")
    p.add_argument("--ply", action="store_true", help="also write OUT/interface.ply")
    p.add_argument("--backend", default="auto", choices=["auto", "cython", "python", "numpy"])
    p = sub.add_parser("preimages", parents=[common], help="solutions of f(w) = y")
    p.add_argument("--target", type=_parse_vector, action="append", default=None,
                   help="target point, e.g. 0.3,-0.2,0.5 (repeatable)")
    p.add_argument("--count", type=int, default=10, help="number of random targets when no --target is given")
    sub.add_parser("denjoy-wolff", parents=[common], help="iterate a self-map of the unit ball")
    p = sub.add_parser("distortion", parents=[common], help="linear distortion estimates")
    p.add_argument("--point", type=_parse_vector, default=None, help="base point (default: seeded random)")
    p.add_argument("--iterates", type=int, default=1, help="estimate f^m for m = 1..ITERATES")
    p.add_argument("--radii", type=_parse_vector, default=None, help="decreasing radii")
    return parser


def _overrides(args) -> dict:
    keys = [f[1] for f in SCENE_FLAGS + GLOBAL_FLAGS]
    return {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}


def _out_path(cfg, name):
    return os.path.join(cfg.out, name)


def _fmt(v) -> str:
    v = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(v)):
        return "inf"
    return "(" + ", ".join(f"{x:.10g}" for x in v) + ")"


def cmd_info(scene, args) -> int:
    cfg = scene.config
    f = scene.base_map
    lines = [f"scene: dim={cfg.dim} group={cfg.group} map={cfg.map} d={cfg.d}"]
    from .crystal import get_group
    g = get_group(cfg.group)
    lines.append(f"group {g.name}: lattice basis {g.lattice.basis.tolist()}, "
                 f"{len(g.point_reps)} point-group cosets, fundamental box "
                 f"{g.box[0].tolist()} .. {g.box[1].tolist()}")
    if g.has_beam_rotation:
        lines.append(f"beam rotation R': rotation {g.beam_rotation.rotation.tolist()}")
    s = scene.schroeder
    if s is not None:
        omitted = s.h.omitted_values()
        lines.append(f"carrier: {s.h!r}")
        lines.append("omitted values of the carrier: {" + ", ".join(_fmt(v) for v in omitted) + "}")
        fixed = ", ".join(_fmt(v) for v in omitted)
        lines.append(f"superattracting fixed points at the omitted values: {{{fixed}}}")
        lines.append(f"A = {s.A.scale:g} * identity; admissible: {s.certificate.ok}")
        for c in s.certificate.checks:
            lines.append(f"  {c['generator']}: conjugate in group = {c['conjugate_in_group']}")
        if s.degree is not None:
            lines.append(f"degree: {s.degree}")
    else:
        lines.append(f"map: {f!r}, degree {f.degree}; poles at 0 and inf")
        lines.append("omitted values of the Zorich carrier: {(0, ...), inf}; of the sine carrier: {inf}")
    if cfg.map == "lifted":
        lines.append("lifted map P with f o h1 = h1 o P; Julia set of P is the unit sphere")
    if scene.deformation.kind != "identity":
        lines.append(f"conjugated by {scene.deformation}")
    if cfg.variant == "averaged" and cfg.dim == 3:
        lines.append("note: the averaged sine variant is automorphic but not known to be "
                     "quasiregular; run `distortion` and inspect the report")
    lines.append(f"orbit kernels: {BACKEND}")
    print("\n".join(lines))
    return EXIT_OK


def cmd_verify(scene, args) -> int:
    from .dynamics import verify_suite
    cfg = scene.config
    seed = cfg.require_seed()
    report = verify_suite(scene, cfg.samples, seed)
    if cfg.variant == "averaged" and cfg.dim == 3 and cfg.map in ("chebyshev", "lifted", "h_d", "joukowsky"):
        report["experimental_variant"] = _averaged_distortion(seed)
    path = args.report or _out_path(cfg, "verify.json")
    qio.write_json(path, report)
    for e in report["entries"]:
        r = e["max_residual"]
        rtxt = "n/a" if r is None else f"{r:.3e}"
        print(f"{'PASS' if e['pass'] else 'FAIL'}  {e['identity']:<40} max {rtxt}  tol {e['tolerance']:.0e}")
    print(f"report: {path}")
    return EXIT_OK if report["pass"] else EXIT_FAIL


def _averaged_distortion(seed) -> dict:
    from .automorphic import sine_map
    from .dynamics import distortion_estimate
    h = sine_map("p2-sine", "averaged")
    rng = np.random.default_rng(seed)
    pts = np.column_stack([rng.uniform(-1, 1, (8, 2)), rng.uniform(-2, 2, 8)])
    est = [distortion_estimate(h, p, [1e-3, 1e-4, 1e-5]).estimate for p in pts]
    return {"note": "averaged sine map: quasiregularity not established; measured linear distortion",
            "points": pts.tolist(), "distortion_estimates": est}


def cmd_render(scene, args) -> int:
    from .dynamics import Slice, julia_raster
    cfg = scene.config
    sl = Slice.plane(cfg.dim, cfg.slice, cfg.slice_offset, cfg.extent)
    png = args.png or _out_path(cfg, "render.png")
    os.makedirs(os.path.dirname(os.path.abspath(png)) or ".", exist_ok=True)
    t0 = time.perf_counter()
    backend = None if args.backend == "numpy" else args.backend
    raster = julia_raster(scene.map, sl, cfg.resolution, cfg.max_iter, cfg.r_small, cfg.r_large,
                          cfg.threads, backend)
    elapsed = time.perf_counter() - t0
    qio.write_png(png, raster)
    written = [png]
    if args.csv:
        written.append(qio.write_interface_csv(_out_path(cfg, "interface.csv"), raster))
    if args.ply:
        written.append(qio.write_interface_ply(_out_path(cfg, "interface.ply"), raster))
    counts = ", ".join(f"{k}={v}" for k, v in raster.counts().items())
    print(f"{cfg.resolution}x{cfg.resolution} raster ({raster.backend}) in {elapsed:.2f} s: {counts}")
    for w in written:
        print(f"wrote {w}")
    return EXIT_OK


def cmd_preimages(scene, args) -> int:
    from .schroeder import preimages
    cfg = scene.config
    if cfg.map == "lifted":
        raise ConfigError("preimages are available for power, chebyshev, joukowsky and h_d maps")
    if scene.deformation.kind != "identity":
        raise ConfigError("preimages are computed for undeformed scenes")
    f = scene.base_map
    if args.target:
        targets = [np.array(t) for t in args.target]
        for t in targets:
            if len(t) != cfg.dim:
                raise ConfigError(f"target {t.tolist()} is not a point of R^{cfg.dim}")
    else:
        rng = np.random.default_rng(cfg.require_seed())
        targets = list(rng.normal(size=(args.count, cfg.dim)))
    results = []
    failed = 0
    for t in targets:
        try:
            w = preimages(f, t)
            results.append({"target": t.tolist(), "count": len(w), "preimages": w.tolist()})
            print(f"target {_fmt(t)}: {len(w)} preimages")
            for p in w:
                print(f"    {_fmt(p)}")
        except DegenerateTargetError as exc:
            failed += 1
            results.append({"target": t.tolist(), "count": None, "error": str(exc)})
            print(f"target {_fmt(t)}: degenerate ({exc})")
    path = _out_path(cfg, "preimages.json")
    qio.write_json(path, {"schema_version": qio.SCHEMA_VERSION, "map": cfg.map, "d": cfg.d,
                          "dim": cfg.dim, "results": results})
    print(f"report: {path}")
    return EXIT_FAIL if failed else EXIT_OK


def cmd_denjoy_wolff(scene, args) -> int:
    from .dynamics import denjoy_wolff
    from .geometry import BallMobius
    cfg = scene.config
    chart = None
    if cfg.mobius == "elliptic":
        f = BallMobius.elliptic(cfg.dim, cfg.mobius_angle)
        target = f"elliptic ball map, angle {cfg.mobius_angle:.6g}"
    else:
        f = scene.map
        if scene.deformation.kind != "identity":
            chart = scene.deformation
        target = repr(f)
    rep = denjoy_wolff(f, cfg.dim, cfg.sample_radius, cfg.tol, cfg.max_iter, chart)
    out = {"schema_version": qio.SCHEMA_VERSION, "map": target, **rep.as_dict()}
    path = _out_path(cfg, "denjoy_wolff.json")
    qio.write_json(path, out)
    where = f" at {_fmt(rep.point)}" if rep.point is not None else ""
    print(f"verdict: {rep.verdict}{where} after {rep.iterations} iterates")
    for n in rep.notes:
        print(f"note: {n}")
    print(f"report: {path}")
    return EXIT_OK


def cmd_distortion(scene, args) -> int:
    from .dynamics import distortion_estimate, distortion_series
    cfg = scene.config
    if args.point is not None:
        x = np.array(args.point)
        if len(x) != cfg.dim:
            raise ConfigError(f"point {x.tolist()} is not in R^{cfg.dim}")
    else:
        rng = np.random.default_rng(cfg.require_seed())
        x = rng.uniform(-1.0, 1.0, cfg.dim)
    f = scene.map
    if args.iterates > 1:
        reps = distortion_series(f, x, args.iterates, args.radii)
    else:
        reps = [distortion_estimate(f, x, args.radii)]
    rows = []
    for m, rep in enumerate(reps, start=1):
        for r in rep.rows():
            rows.append({"iterate": m, **r})
        print(f"iterate {m}: estimate {rep.estimate:.6g} (stable radius {rep.stable_radius})")
        for n in rep.notes:
            print(f"    note: {n}")
    if args.iterates > 1:
        print(f"max/first ratio over the series: {max(r.estimate for r in reps) / reps[0].estimate:.4g}")
    path = _out_path(cfg, "distortion.csv")
    qio.write_csv_rows(path, ["iterate", "radius", "max_stretch", "min_stretch", "ratio"], rows)
    print(f"report: {path}")
    return EXIT_OK


COMMANDS = {
    "info": cmd_info,
    "verify": cmd_verify,
    "render": cmd_render,
    "preimages": cmd_preimages,
    "denjoy-wolff": cmd_denjoy_wolff,
    "distortion": cmd_distortion,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = load_config(args.config, _overrides(args))
        scene = build_scene(cfg)
        return COMMANDS[args.command](scene, args)
    except ConfigError as exc:
        print(f"qrdyn: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"qrdyn: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except QrdynError as exc:
        print(f"qrdyn: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
