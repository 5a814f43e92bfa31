import csv
import json

import numpy as np
import pytest

from metaline import acceptance
from metaline.cli import main
from metaline.config import RunConfig, load_config, parse_config
from metaline.errors import DomainError, GeometryError, ParseError
from metaline.synthesis import cell_s21, read_designs_csv


def test_parse_types_and_comments():
    text = "# comment\ngrid = 11\nlens = grin  # inline\ntau = 5e-13\nmu_background = none\n"
    got = parse_config(text)
    assert got == {"grid": 11, "lens": "grin", "tau": 5e-13, "mu_background": None}
    assert isinstance(got["grid"], int)


@pytest.mark.parametrize("text, line", [("grid = 5\nbogus = 1\n", 2),
                                        ("grid = 5\n\ntau = fast\n", 3),
                                        ("grid = 2.5\n", 1)])
def test_parse_errors_carry_line(text, line):
    with pytest.raises(ParseError) as info:
        parse_config(text, "run.cfg")
    assert info.value.line == line
    assert f"run.cfg:{line}" in str(info.value)


def test_flags_override_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("grid = 11\noperator = diff2\n")
    cfg = load_config(path, grid=5, operator=None)
    assert (cfg.grid, cfg.operator) == (5, "diff2")


@pytest.mark.parametrize("kwargs, error", [({"mu_min": 0.1}, DomainError),
                                           ({"period": 20e-9}, GeometryError),
                                           ({"tau": 0.0}, DomainError),
                                           ({"samples": 31}, DomainError),
                                           ({"lens": "fresnel"}, DomainError),
                                           ({"spacing": 40e-9}, DomainError)])
def test_config_validation(kwargs, error):
    with pytest.raises(error):
        RunConfig(**kwargs)


def test_usage_errors_exit_2(tmp_path, capsys):
    assert main(["sweep", "--grid", "1", "--out", str(tmp_path)]) == 2
    assert main(["sweep", "--config", str(tmp_path / "missing.cfg")]) == 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("grid = 3\nwavelength = -1\n")
    assert main(["sweep", "--config", str(bad)]) == 2
    with pytest.raises(SystemExit) as info:
        main(["sweep", "--operator", "diff3"])
    assert info.value.code == 2
    capsys.readouterr()


@pytest.fixture(scope="module")
def small_sweep(tmp_path_factory):
    out = tmp_path_factory.mktemp("sweep")
    assert main(["sweep", "--grid", "3", "--out", str(out)]) == 0
    return out


def test_sweep_rows_match_cell_calls(small_sweep):
    with open(small_sweep / "map.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["mu_in_eV", "mu_out_eV", "re_S21", "im_S21"]
    assert len(rows) == 10
    cfg = RunConfig()
    geom, _ = acceptance.geometry_for(cfg)
    for a, b, re, im in rows[1:]:
        # vectorised sweep agrees with the scalar cell solve to rounding
        got = complex(float(re), float(im))
        assert abs(got - cell_s21(float(a), float(b), geom, cfg.omega)) <= 1e-12
    assert "phase_span_deg" in (small_sweep / "coverage.txt").read_text()
    assert (small_sweep / "map.dat").read_text().count("\n\n") == 2


def test_sweep_is_byte_identical(small_sweep, tmp_path):
    assert main(["sweep", "--grid", "3", "--out", str(tmp_path)]) == 0
    for name in ("map.csv", "map.dat", "coverage.txt"):
        assert (tmp_path / name).read_bytes() == (small_sweep / name).read_bytes()


def test_corrupted_map_exit_3_names_line(small_sweep, tmp_path, capsys):
    lines = (small_sweep / "map.csv").read_text().splitlines()
    lines[4] = lines[4].replace(",", ";", 1)
    bad = tmp_path / "map.csv"
    bad.write_text("\n".join(lines) + "\n")
    assert main(["design", "--map", str(bad), "--out", str(tmp_path)]) == 3
    assert f"{bad}:5" in capsys.readouterr().err


def test_design_diff2_succeeds_and_reloads(tmp_path, capsys):
    assert main(["design", "--operator", "diff2", "--out", str(tmp_path)]) == 0
    designs = read_designs_csv(tmp_path / "designs_diff2.csv")
    assert len(designs) == 38
    report = (tmp_path / "deviation_diff2.txt").read_text()
    assert "phase_std_deg" in report and report in capsys.readouterr().out


def test_design_unreachable_cells_exit_3_after_writing(tmp_path, capsys):
    assert main(["design", "--operator", "diff1", "--out", str(tmp_path)]) == 3
    assert (tmp_path / "designs_diff1.csv").exists()
    assert "unreachable" in capsys.readouterr().err


def test_simulate_writes_fields_and_manifest(tmp_path, capsys):
    args = ["simulate", "--operator", "int2", "--samples", "512", "--out", str(tmp_path)]
    assert main(args) == 0
    assert main(args) == 0
    for part in ("input", "spectrum", "output", "reference"):
        assert (tmp_path / f"int2_ideal_ideal_{part}.csv").exists()
    manifest = (tmp_path / "manifest.txt").read_text()
    assert manifest.count("[simulate int2_ideal_ideal]") == 2
    nrms = [float(ln.split("=")[1]) for ln in manifest.splitlines() if ln.startswith("nrms")]
    assert nrms[0] == nrms[1] and nrms[0] <= 0.05
    assert "nrms" in capsys.readouterr().out


def test_extreme_loss_degrades_without_crashing(capsys):
    cfg = RunConfig(tau=1e-16)
    _, fallback = acceptance.geometry_for(cfg)
    assert fallback
    results = acceptance.run_all(cfg, (acceptance.passivity_check, acceptance.criterion_4,
                                       acceptance.criterion_5))
    assert results[0].passed
    assert all("fallback_geometry" in r.metrics for r in results)
    assert all("error" not in r.detail for r in results)


def test_validate_subset_writes_json(tmp_path, monkeypatch, capsys):
    monkeypatch.setattr(acceptance, "CRITERIA", (acceptance.criterion_3, acceptance.criterion_7))
    assert main(["validate", "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "validate.json").read_text())
    assert [s["criterion"] for s in summary] == [0, 3, 7]
    assert capsys.readouterr().out.strip().endswith("3/3 passed")


def test_fixed_spacer_background_meets_deviation_bound():
    # giving up the quarter-wave spacer: 42.5 nm spacer over a 0.70 eV background
    cfg = RunConfig(mu_background=0.7, spacing=42.5e-9)
    result = acceptance.criterion_5(cfg)
    assert result.passed, result.line()
