"""Deterministic file output.  Every writer renders to memory first, then
writes a temporary file next to the target and renames it into place, so a
failed run never leaves a partial file behind."""
from __future__ import annotations

import csv
import io
import json
import os
import tempfile

import numpy as np
from PIL import Image

from .dynamics import BOUNDED, TO_INFINITY, TO_ZERO, UNDECIDED, JuliaRaster, julia_points

SCHEMA_VERSION = 1


def write_atomic(path: str, data: bytes) -> str:
    path = os.fspath(path)
    folder = os.path.dirname(os.path.abspath(path))
    os.makedirs(folder, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=folder)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps_json(obj) -> str:
    return json.dumps(_clean(obj), indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def write_json(path: str, obj) -> str:
    return write_atomic(path, dumps_json(obj).encode("utf-8"))


def raster_rgb(raster: JuliaRaster) -> np.ndarray:
    """8-bit RGB image, one pixel per cell, top row = largest v coordinate.

    ToZero: blue ramp by escape time, ToInfinity: red ramp, Bounded: black,
    Undecided: gray."""
    cls = raster.classes[::-1]
    its = raster.iterations[::-1].astype(float)
    ramp = np.rint(55.0 + 200.0 * np.exp(-its / 12.0)).astype(np.uint8)
    img = np.zeros(cls.shape + (3,), dtype=np.uint8)
    img[cls == TO_ZERO, 2] = ramp[cls == TO_ZERO]
    img[cls == TO_INFINITY, 0] = ramp[cls == TO_INFINITY]
    img[cls == UNDECIDED] = 128
    img[cls == BOUNDED] = 0
    return img


def png_bytes(rgb: np.ndarray) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(np.ascontiguousarray(rgb, dtype=np.uint8)).save(buf, format="PNG")
    return buf.getvalue()


def write_png(path: str, raster: JuliaRaster) -> str:
    return write_atomic(path, png_bytes(raster_rgb(raster)))


def _coords3(points) -> np.ndarray:
    p = np.asarray(points, dtype=float)
    if p.shape[1] == 2:
        p = np.column_stack([p, np.zeros(len(p))])
    return p


def interface_csv(raster: JuliaRaster) -> str:
    cloud = julia_points(raster)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "y", "z", "class", "iters"])
    names = ("ToZero", "ToInfinity", "Bounded", "Undecided")
    for p, c, k in zip(_coords3(cloud["points"]), cloud["classes"], cloud["iterations"]):
        w.writerow([repr(float(p[0])), repr(float(p[1])), repr(float(p[2])), names[int(c)], int(k)])
    return buf.getvalue()


def write_csv_rows(path: str, header: list, rows: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(row[h])) if isinstance(row[h], (float, np.floating)) else row[h]
                    for h in header])
    return write_atomic(path, buf.getvalue().encode("utf-8"))


def interface_ply(raster: JuliaRaster) -> str:
    pts = _coords3(julia_points(raster)["points"])
    head = ["ply", "format ascii 1.0", "comment interface cells of an escape-time raster",
            f"element vertex {len(pts)}", "property double x", "property double y",
            "property double z", "end_header"]
    body = [f"{p[0]!r} {p[1]!r} {p[2]!r}" for p in pts.tolist()]
    return "\n".join(head + body) + "\n"


def write_interface_csv(path: str, raster: JuliaRaster) -> str:
    return write_atomic(path, interface_csv(raster).encode("utf-8"))


def write_interface_ply(path: str, raster: JuliaRaster) -> str:
    return write_atomic(path, interface_ply(raster).encode("ascii"))
