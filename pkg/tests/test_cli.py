import json

import numpy as np
import pytest

from crcvasicek import VasicekParams, yield_curve
from crcvasicek.cli import EXIT_DATA, EXIT_OK, EXIT_USAGE, main
from crcvasicek.numerics import RngStream


@pytest.fixture
def model_files(tmp_path):
    """Small synthetic model, parameter JSON and initial curve CSV."""
    params = VasicekParams(
        b=np.array([2e-4, -1e-4]),
        beta=np.diag([0.97, 0.8]),
        sigma_sqrt=np.array([[1e-3, 0.0], [2e-4, 7e-4]]),
    )
    x = np.array([0.012, 0.003])
    pfile = tmp_path / "params.json"
    pfile.write_text(json.dumps({
        "b": params.b.tolist(),
        "beta": np.diag(params.beta).tolist(),
        "sigma_sqrt": params.sigma_sqrt.tolist(),
        "x": x.tolist(),
    }))
    curve = yield_curve(params, x, 120)
    cfile = tmp_path / "curve.csv"
    with open(cfile, "w") as fh:
        fh.write("lag,yield\n")
        for lag, y in enumerate(curve, start=1):
            fh.write(f"{lag},{float(y)!r}\n")
    return params, x, pfile, cfile


@pytest.fixture
def panel_file(tmp_path):
    """Synthetic yield panel long CSV driven by a 2-factor model."""
    params = VasicekParams(
        b=np.array([2e-4, -1e-4]),
        beta=np.diag([0.97, 0.8]),
        sigma_sqrt=np.array([[1e-3, 0.0], [2e-4, 7e-4]]),
    )
    gen = RngStream(1).generator
    x = np.array([0.012, 0.003])
    tenors = [1, 2, 5, 10, 21, 63, 126]
    path = tmp_path / "panel.csv"
    with open(path, "w") as fh:
        fh.write("# units=decimal\ndate,tau_days,yield\n")
        for t in range(70):
            x = params.b + params.beta @ x + params.sigma_sqrt @ gen.standard_normal(2)
            curve = yield_curve(params, x, max(tenors))
            for tau in tenors:
                fh.write(f"d{t:03d},{tau},{float(curve[tau - 1])!r}\n")
    return path


def test_usage_error_is_64(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["calibrate"])  # missing required arguments
    assert exc.value.code == EXIT_USAGE


def test_unknown_command_is_64():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == EXIT_USAGE


def test_missing_data_file_is_65(tmp_path, model_files):
    _, _, pfile, _ = model_files
    code = main([
        "calibrate", "--data", str(tmp_path / "nope.csv"), "--date", "x",
        "--params", str(pfile), "--out", str(tmp_path / "o.csv"),
    ])
    assert code == EXIT_DATA


def test_undeclared_units_is_65(tmp_path, model_files):
    _, _, pfile, _ = model_files
    bad = tmp_path / "bad.csv"
    bad.write_text("date,tau_days,yield\nd0,1,0.01\nd0,5,0.011\n")
    code = main([
        "calibrate", "--data", str(bad), "--date", "d0",
        "--params", str(pfile), "--out", str(tmp_path / "o.csv"),
    ])
    assert code == EXIT_DATA


def test_calibrate_deterministic_and_small_residual(tmp_path, panel_file, model_files):
    _, _, pfile, _ = model_files
    outs = []
    for name in ("t1.csv", "t2.csv"):
        out = tmp_path / name
        code = main([
            "calibrate", "--data", str(panel_file), "--date", "d010",
            "--params", str(pfile), "--max-lag", "80", "--out", str(out),
        ])
        assert code == EXIT_OK
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    text = outs[0].decode()
    assert "theta" in text
    residual = float(text.splitlines()[1].split("=")[1])
    assert residual < 1e-10


def test_simulate_bitwise_deterministic(tmp_path, model_files):
    _, _, pfile, cfile = model_files
    outs = []
    for name in ("s1.csv", "s2.csv"):
        out = tmp_path / name
        code = main([
            "simulate", "--init-curve", str(cfile), "--params", str(pfile),
            "--horizon", "5", "--paths", "8", "--seed", "7", "--out", str(out),
        ])
        assert code == EXIT_OK
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    assert b"seed=7" in outs[0]


def test_simulate_seed_changes_output(tmp_path, model_files):
    _, _, pfile, cfile = model_files
    blobs = []
    for seed in ("7", "8"):
        out = tmp_path / f"seed{seed}.csv"
        main([
            "simulate", "--init-curve", str(cfile), "--params", str(pfile),
            "--horizon", "3", "--paths", "4", "--seed", seed, "--out", str(out),
        ])
        blobs.append(out.read_bytes())
    assert blobs[0] != blobs[1]
