import json

import numpy as np
import pytest

from vesiflow.bulk import parse_height, snapshot_fields, transmission_residual
from vesiflow.cli import main
from vesiflow.config import load_config, parse_config
from vesiflow.errors import ConfigError
from vesiflow.fields import HeightField, random_smooth, single_mode
from vesiflow.io import SnapshotFormatError, read_csv, read_snapshot, snapshot_name, write_snapshot
from vesiflow.params import MaterialParams

BASE = """
[grid]
n = 16
[params]
kappa = 1.0
[initial]
preset = {preset}
amplitude = {amplitude}
mode = 1, 1
max_mode = 8
decay = 1
[run]
integrator = {integrator}
dt = {dt}
t_end = {t_end}
cadence = {cadence}
output = out
"""


def _config(tmp_path, preset="single-mode", amplitude=0.05, integrator="imex", dt=0.01, t_end=0.095, cadence=3,
            extra=""):
    path = tmp_path / "run.ini"
    path.write_text(BASE.format(preset=preset, amplitude=amplitude, integrator=integrator, dt=dt, t_end=t_end,
                                cadence=cadence) + extra)
    return path


# -- io -------------------------------------------------------------------------


def test_snapshot_round_trip(tmp_path):
    h = random_smooth(16, 3.0, seed=1, amplitude=0.2)
    path = write_snapshot(tmp_path / snapshot_name(0.25), h)
    assert path.name == "height_0.25.bin"
    back = read_snapshot(path)
    assert back.length == 3.0 and np.array_equal(back.values, h.values)


def test_snapshot_rejects_bad_files(tmp_path):
    bad = tmp_path / "bad.bin"
    bad.write_bytes(b"nonsense")
    with pytest.raises(SnapshotFormatError):
        read_snapshot(bad)
    path = write_snapshot(tmp_path / "h.bin", HeightField.zeros(8, 1.0))
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(SnapshotFormatError):
        read_snapshot(path)


# -- config -----------------------------------------------------------------------


def test_config_defaults_and_paths(tmp_path):
    cfg = load_config(_config(tmp_path))
    assert cfg.n == 16 and cfg.integrator == "imex" and cfg.cadence == 3
    assert cfg.output == tmp_path / "out"
    assert cfg.params == MaterialParams()


@pytest.mark.parametrize("text", [
    "[grid]\nn = 12\n",
    "[grid]\nsize = 16\n",
    "[bogus]\n",
    "[run]\nintegrator = euler\n",
    "[run]\ndt = -1\n",
    "[params]\nmu_b = 0\n",
    "[initial]\npreset = file\n",
    "not an ini file",
])
def test_config_errors(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_initial_amplitude_bound(tmp_path):
    cfg = load_config(_config(tmp_path, amplitude=0.5))
    with pytest.raises(ConfigError, match="gamma/2"):
        cfg.initial_height()


# -- bulk fields ------------------------------------------------------------------


def test_parse_height():
    assert parse_height("0+") == 0.0 and not np.signbit(parse_height("0+"))
    assert np.signbit(parse_height("0-"))
    assert parse_height(" 1.5 ") == 1.5
    with pytest.raises(ValueError):
        parse_height("up")


def test_pressure_jump_is_linear_bending_force():
    p = MaterialParams(kappa=1.3)
    eps = 1e-7
    h = single_mode(16, 2 * np.pi, (2, 1), eps)
    up = snapshot_fields(h, 0.0, p)
    lo = snapshot_fields(h, -0.0, p)
    target = -p.kappa * 25.0 * h.values
    assert np.max(np.abs(up[3] - lo[3] - target)) <= 1e-8 * np.max(np.abs(target))


def test_transmission_residual_small():
    res = transmission_residual(random_smooth(16, 2 * np.pi, seed=2, amplitude=0.1), MaterialParams(mu=0.7))
    assert all(v < 1e-8 for v in res.values()), res


# -- command line ---------------------------------------------------------------------


def test_simulate_outputs(tmp_path):
    path = _config(tmp_path)
    assert main(["simulate", str(path)]) == 0
    out = tmp_path / "out"
    rows = read_csv(out / "diagnostics.csv")
    assert len(rows) == int(np.ceil(0.095 / 0.01 / 3)) + 1
    means = {r["mean_h"] for r in rows}
    assert len(means) == 1
    manifest = json.loads((out / "run_manifest.json").read_text())
    assert manifest["status"] == "completed" and manifest["resolved"]["n_steps"] == 10
    assert len(manifest["snapshots"]) == len(rows)
    for name in manifest["snapshots"]:
        assert (out / name).exists()


def test_simulate_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    a.mkdir()
    b.mkdir()
    for d in (a, b):
        assert main(["simulate", str(_config(d, preset="random-smooth", amplitude=0.2, integrator="picard"))]) == 0
    for f in sorted((a / "out").iterdir()):
        assert f.read_bytes() == (b / "out" / f.name).read_bytes(), f.name


def test_simulate_exit_codes(tmp_path, capsys):
    assert main(["simulate", str(_config(tmp_path, amplitude=0.5))]) == 2
    assert "gamma/2" in capsys.readouterr().err
    assert main(["simulate", str(tmp_path / "missing.ini")]) == 2
    path = _config(tmp_path, preset="random-smooth", amplitude=0.49, integrator="picard", dt=1.0, t_end=1.0)
    assert main(["simulate", str(path)]) == 3
    manifest = json.loads((tmp_path / "out" / "run_manifest.json").read_text())
    assert manifest["status"].startswith("aborted")


def test_verify_exit_codes(tmp_path):
    extra = "[oracle]\nn_tuples = 2\n{hook}[verify]\noutput = report\n"
    good = _config(tmp_path, extra=extra.format(hook=""))
    assert main(["verify", "symbols", str(good)]) == 0
    rows = read_csv(tmp_path / "report" / "report.csv")
    assert rows and all(r["passed"] == "pass" for r in rows)
    bad = _config(tmp_path, extra=extra.format(hook="alpha_scale = 1.01\n"))
    assert main(["verify", "symbols", str(bad)]) == 4
    theta = 3 * np.pi / 5
    sector = _config(tmp_path, extra=f"[verify]\ntheta = {theta!r}\nvartheta = {(np.pi - theta) / 9!r}\n")
    assert main(["verify", "sector", str(sector)]) == 2
    assert main(["verify", "nonsense"]) == 2


def test_snapshot_fields_command(tmp_path):
    out = tmp_path / "fields"
    zero = write_snapshot(tmp_path / "zero.bin", HeightField.zeros(16, 2 * np.pi))
    assert main(["snapshot-fields", str(zero), "--y", "0+,0-,1.5", "--output", str(out)]) == 0
    for label in ("0+", "0-", "1.5"):
        rows = read_csv(out / f"fields_{label}.csv")
        assert len(rows) == 256
        assert all(float(r[c]) == 0.0 for r in rows for c in ("v1", "v2", "w", "pi"))

    h = write_snapshot(tmp_path / "h.bin", random_smooth(16, 2 * np.pi, seed=3, amplitude=0.05, max_mode=4))
    assert main(["snapshot-fields", str(h), "--y", "0+,60", "--output", str(out)]) == 0
    near = read_csv(out / "fields_0+.csv")
    far = read_csv(out / "fields_60.csv")
    cols = ("v1", "v2", "w", "pi")
    surface = max(abs(float(r[c])) for r in near for c in cols)
    assert surface > 0
    assert max(abs(float(r[c])) for r in far for c in cols) < 1e-10 * surface


def test_snapshot_fields_errors(tmp_path):
    bad = tmp_path / "bad.bin"
    bad.write_bytes(b"xx")
    assert main(["snapshot-fields", str(bad), "--y", "0+"]) == 2
    good = write_snapshot(tmp_path / "h.bin", HeightField.zeros(8, 1.0))
    assert main(["snapshot-fields", str(good), "--y", "above"]) == 2
    assert main(["snapshot-fields", str(good)]) == 2
