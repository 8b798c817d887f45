import os
import subprocess
import sys

import numpy as np
import pytest

from qrdyn import _backend
from qrdyn.dynamics import Slice


def test_env_switch_forces_fallback():
    env = dict(os.environ, QRDYN_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import qrdyn; print(qrdyn.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_get_kernels_names():
    assert _backend.get_kernels() is _backend.kernels
    assert _backend.get_kernels("python").__name__.endswith("_pykernels")
    with pytest.raises(ValueError):
        _backend.get_kernels("fortran")


@pytest.mark.skipif(_backend.BACKEND != "cython", reason="compiled extension not built")
@pytest.mark.parametrize("group,dim,d", [("p2", 3, 2), ("p2", 3, 3), ("zorich2", 2, 2), ("zorich2", 2, 4)])
def test_compiled_kernel_matches_fallback(group, dim, d):
    pts = Slice.plane(dim, extent=1.6).centers(80).reshape(-1, dim)
    c1, i1 = _backend.get_kernels("cython").classify_power(pts, d, group, 200, 1e-6, 1e6)
    c2, i2 = _backend.get_kernels("python").classify_power(pts, d, group, 200, 1e-6, 1e6)
    # on the unit sphere (the Julia set) rounding decides the escape direction
    off = np.abs(np.linalg.norm(pts, axis=1) - 1.0) > 1e-9
    assert np.array_equal(np.asarray(c1)[off], c2[off])
    assert np.mean(np.asarray(i1)[off] == i2[off]) > 0.999
