import json
import os

import numpy as np
import pytest

from qrdyn import cli
from qrdyn.automorphic import zorich_map


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_info(capsys):
    code, out, _ = run(["info", "--dim", "3"], capsys)
    assert code == 0
    assert "group p2" in out and "degree: 4" in out and "admissible: True" in out
    code, out, _ = run(["info", "--map", "chebyshev", "--variant", "averaged"], capsys)
    assert code == 0 and "averaged" in out


@pytest.mark.parametrize("argv", [
    ["info", "--d", "1"], ["verify", "--dim", "3"], ["render", "--resolution", "3"],
    ["frobnicate"], ["info", "--dim", "2", "--slice", "xz"], [],
    ["preimages", "--map", "lifted", "--seed", "1"],
    ["preimages", "--target", "1,2", "--dim", "3"],
])
def test_usage_errors_exit_2(argv, capsys, tmp_path):
    code, _, _ = run(argv + ["--out", str(tmp_path)] if argv else argv, capsys)
    assert code == 2


def test_unwritable_output_exits_3(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("")
    code, _, err = run(["render", "--resolution", "16", "--out", str(blocker / "sub")], capsys)
    assert code == 3 and "I/O error" in err


def test_verify_pass_and_fail(tmp_path, capsys):
    code, out, _ = run(["verify", "--seed", "1", "--samples", "300", "--dim", "2", "--out", str(tmp_path)], capsys)
    assert code == 0
    report = json.loads((tmp_path / "verify.json").read_text())
    assert report["pass"] and report["scene"]["seed"] == 1
    for e in report["entries"]:
        assert {"identity", "sample_count", "max_residual", "tolerance", "pass"} <= set(e)
    bad = tmp_path / "bad.json"
    code, out, _ = run(["verify", "--seed", "1", "--samples", "300", "--scale", "1.5",
                        "--out", str(tmp_path), "--report", str(bad)], capsys)
    assert code == 1 and "FAIL  admissibility" in out
    assert json.loads(bad.read_text())["pass"] is False


def test_verify_averaged_variant_reports_distortion(tmp_path, capsys):
    code, _, _ = run(["verify", "--seed", "2", "--samples", "200", "--map", "chebyshev",
                      "--variant", "averaged", "--out", str(tmp_path)], capsys)
    rep = json.loads((tmp_path / "verify.json").read_text())
    assert code == 0
    assert len(rep["experimental_variant"]["distortion_estimates"]) == 8


def test_render_outputs(tmp_path, capsys):
    code, out, _ = run(["render", "--resolution", "32", "--csv", "--ply", "--backend", "python",
                        "--out", str(tmp_path)], capsys)
    assert code == 0
    assert sorted(os.listdir(tmp_path)) == ["interface.csv", "interface.ply", "render.png"]
    assert "(python)" in out


def test_preimages(tmp_path, capsys):
    code, out, _ = run(["preimages", "--target", "0.3,-0.2,0.5", "--out", str(tmp_path)], capsys)
    assert code == 0 and "4 preimages" in out
    rep = json.loads((tmp_path / "preimages.json").read_text())
    assert rep["results"][0]["count"] == 4
    code, out, _ = run(["preimages", "--map", "h_d", "--seed", "4", "--count", "3", "--out", str(tmp_path)], capsys)
    assert code == 0 and out.count("8 preimages") == 3
    # a critical value of the degree-2 power map
    y = zorich_map("p2")(np.array([1.0, 0.0, 0.3]))
    target = ",".join(repr(float(v)) for v in y)
    code, out, _ = run(["preimages", "--target", target, "--out", str(tmp_path)], capsys)
    assert code == 1 and "degenerate" in out


def test_denjoy_wolff(tmp_path, capsys):
    code, out, _ = run(["denjoy-wolff", "--dim", "2", "--out", str(tmp_path)], capsys)
    assert code == 0 and "Converged" in out
    code, out, _ = run(["denjoy-wolff", "--mobius", "elliptic", "--out", str(tmp_path)], capsys)
    assert code == 0 and "AutomorphismLike" in out
    rep = json.loads((tmp_path / "denjoy_wolff.json").read_text())
    assert rep["verdict"] == "AutomorphismLike" and rep["net"]["nets"] == 2


def test_distortion(tmp_path, capsys):
    code, out, _ = run(["distortion", "--point", "0.3,0.1,0.2", "--iterates", "3", "--out", str(tmp_path)], capsys)
    assert code == 0 and "iterate 3" in out
    rows = (tmp_path / "distortion.csv").read_text().splitlines()
    assert rows[0] == "iterate,radius,max_stretch,min_stretch,ratio" and len(rows) > 3
    code, _, _ = run(["distortion", "--out", str(tmp_path)], capsys)
    assert code == 2  # random point needs a seed


def test_config_file_and_global_flag_position(tmp_path, capsys):
    ini = tmp_path / "scene.ini"
    ini.write_text("[crystal]\ndim = 2\n[cli]\nseed = 9\n")
    code, _, _ = run(["--config", str(ini), "--out", str(tmp_path), "verify", "--samples", "100"], capsys)
    assert code == 0
    assert json.loads((tmp_path / "verify.json").read_text())["scene"]["dim"] == 2


def test_reproducible_outputs(tmp_path, capsys):
    blobs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert cli.main(["verify", "--seed", "5", "--samples", "300", "--out", str(out)]) == 0
        assert cli.main(["render", "--resolution", "48", "--csv", "--out", str(out)]) == 0
        assert cli.main(["preimages", "--seed", "5", "--count", "2", "--out", str(out)]) == 0
        blobs.append({p: (out / p).read_bytes() for p in sorted(os.listdir(out))})
    capsys.readouterr()
    assert blobs[0] == blobs[1]
