"""Pure numpy fallback for the compiled orbit kernels (same signatures)."""
from __future__ import annotations

import numpy as np


def classify_power(points, d: int, group: str, max_iter: int, r_small: float, r_large: float):
    from .dynamics import classify_points
    from .schroeder import power_map

    pts = np.ascontiguousarray(points, dtype=np.float64)
    dims = {"p2": 3, "zorich2": 2}
    if dims.get(group) != pts.shape[1]:
        raise ValueError(f"no kernel for group {group!r} in dimension {pts.shape[1]}")
    f = power_map(group, d)
    return classify_points(f, pts, max_iter, r_small, r_large)
