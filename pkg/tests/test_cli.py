import json

import numpy as np
import pytest

from levysplit.cli import run

BM_SPEC = {
    "drift": [0.0, 0.0],
    "sigma": [[1.0, -0.8], [-0.8, 1.0]],
    "jumps": None,
    "kill": None,
}


@pytest.fixture()
def spec_file(tmp_path):
    dest = tmp_path / "spec.json"
    dest.write_text(json.dumps(BM_SPEC))
    return str(dest)


def test_simulate_writes_csv(tmp_path, spec_file):
    out = tmp_path / "path.csv"
    code = run(["simulate", "--spec", spec_file, "--horizon", "1", "--step", "0.25", "--seed", "3", "--out", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "t,x1,x2,alive"
    assert len(lines) == 6


def test_simulate_zero_spec_constant(tmp_path):
    spec = tmp_path / "zero.json"
    spec.write_text(json.dumps({"drift": [0.0], "sigma": [[0.0]]}))
    out = tmp_path / "zero.csv"
    assert run(["simulate", "--spec", str(spec), "--horizon", "1", "--step", "0.25", "--out", str(out)]) == 0
    for line in out.read_text().splitlines()[1:]:
        assert line.split(",")[1] == "0"


def test_byte_identical_reruns(tmp_path, spec_file):
    outs = []
    for name in ("a.csv", "b.csv"):
        dest = tmp_path / name
        assert run(["simulate", "--spec", spec_file, "--horizon", "1", "--step", "0.01", "--seed", "11", "--out", str(dest)]) == 0
        outs.append(dest.read_bytes())
    assert outs[0] == outs[1]


def test_unknown_key_named(tmp_path, capsys):
    spec = tmp_path / "bad.json"
    spec.write_text(json.dumps({"drift": [0.0], "sigma": [[1.0]], "spice": 1}))
    code = run(["simulate", "--spec", str(spec), "--horizon", "1", "--step", "0.5"])
    assert code == 1
    assert "spice" in capsys.readouterr().err


def test_invalid_sigma_exit_code(tmp_path, capsys):
    spec = tmp_path / "bad.json"
    spec.write_text(json.dumps({"drift": [0.0], "sigma": [[-2.0]]}))
    assert run(["simulate", "--spec", str(spec), "--horizon", "1", "--step", "0.5"]) == 1


def test_condition_print_matrix(capsys):
    code = run(["condition", "--sigma1", "1", "--sigma2", "1", "--rho", "-0.8", "--eta", "1,2", "--print-matrix"])
    assert code == 0
    out = capsys.readouterr().out.splitlines()
    rows = [[float(x) for x in line.split()] for line in out[1:3]]
    s = np.sqrt(1 + 2 * 2 * (-0.8) + 4)
    expected = np.array([[1 - 1.6, -2 * 0.6], [-0.8 + 2, 1 * 0.6]]) / s
    assert np.allclose(rows, expected, atol=1e-9)


def test_condition_paths_output(tmp_path):
    code = run(
        ["condition", "--sigma1", "1", "--sigma2", "1", "--rho", "-0.8", "--eta", "1,2",
         "--paths", "2", "--horizon", "1", "--step", "0.2", "--seed", "5", "--out", str(tmp_path)]
    )
    assert code == 0
    files = sorted(tmp_path.glob("conditioned_5_*.csv"))
    assert len(files) == 2


def test_check_enum_presets(tmp_path):
    assert run(["check", "enum", "--n", "6", "--increments", "default2d", "--eta", "1,2", "--out", str(tmp_path)]) == 0
    assert run(["check", "enum", "--n", "5", "--increments", "default1d", "--out", str(tmp_path)]) == 0


def test_check_sparre(tmp_path):
    assert run(["check", "sparre", "--n", "6", "--n-mc", "20000", "--seed", "4", "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "sparre_4_report.json").read_text())
    assert report["p_values"]["two_sample"] >= 0.001


def test_split_subcommand(tmp_path, spec_file):
    outdir = tmp_path / "split"
    code = run(
        ["split", "--mode", "infimum", "--spec", spec_file, "--eta", "1,2",
         "--horizon", "1", "--step", "0.01", "--seed", "2", "--out", str(outdir)]
    )
    assert code == 0
    meta = json.loads((outdir / "split.json").read_text())
    assert meta["mode"] == "infimum"
    assert (outdir / "pre.csv").exists() and (outdir / "post.csv").exists()

    code = run(["split", "--mode", "maxnorm", "--spec", spec_file, "--horizon", "1", "--step", "0.01",
                "--seed", "2", "--out", str(outdir)])
    assert code == 0


def test_split_roundtrip_from_file(tmp_path, spec_file):
    path_csv = tmp_path / "p.csv"
    run(["simulate", "--spec", spec_file, "--horizon", "1", "--step", "0.1", "--seed", "6", "--out", str(path_csv)])
    outdir = tmp_path / "s"
    assert run(["split", "--path", str(path_csv), "--eta", "1,0", "--out", str(outdir)]) == 0


def test_experiment_zoom_cli(tmp_path, spec_file):
    code = run(
        ["experiment", "zoom", "--spec", spec_file, "--eta", "1,2", "--n", "50", "--step", "0.002",
         "--n-rep", "100", "--n-perm", "199", "--seed", "8", "--out", str(tmp_path), "--format", "json"]
    )
    assert code == 0
    report = json.loads((tmp_path / "zoom_8_report.json").read_text())
    assert "post" in report["p_values"]


def test_experiment_maxnorm_cli(tmp_path):
    code = run(
        ["experiment", "maxnorm", "--n", "200", "--step", "0.001", "--n-rep", "60", "--n-perm", "199",
         "--seed", "9", "--out", str(tmp_path)]
    )
    assert code == 0
    assert (tmp_path / "maxnorm_9_kde_prelimit.csv").exists()
    cloud = (tmp_path / "maxnorm_9_prelimit_cloud.csv").read_text().splitlines()
    assert cloud[0] == "x1,x2"


def test_experiment_report_files_byte_identical(tmp_path):
    blobs = []
    for sub in ("r1", "r2"):
        out = tmp_path / sub
        assert run(["check", "sparre", "--n", "4", "--n-mc", "5000", "--seed", "13", "--out", str(out)]) == 0
        blobs.append((out / "sparre_13_report.json").read_bytes())
    assert blobs[0] == blobs[1]


def test_experiment_initial_jump_cli(tmp_path):
    spec = tmp_path / "bv.json"
    spec.write_text(
        json.dumps(
            {
                "drift": [-1.0],
                "sigma": [[0.0]],
                "jumps": {"rate": 1.0, "law": {"type": "exponential", "rate": 1.0, "direction": [1.0]}},
            }
        )
    )
    code = run(
        ["experiment", "initial-jump", "--spec", str(spec), "--eta", "1", "--horizon", "30",
         "--step", "0.005", "--n-rep", "150", "--seed", "10", "--out", str(tmp_path)]
    )
    assert code == 0
    report = json.loads((tmp_path / "initial_jump_10_report.json").read_text())
    assert report["counts"]["recorded"] > 0


def test_initial_jump_case_mismatch_is_config_error(tmp_path, spec_file):
    code = run(
        ["experiment", "initial-jump", "--spec", spec_file, "--eta", "1,2", "--n-rep", "10", "--out", str(tmp_path)]
    )
    assert code == 1
