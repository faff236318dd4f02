import json
import logging

import pytest

from kinsmooth.cli import main
from kinsmooth.config import ScenarioConfig
from kinsmooth.errors import ConfigurationError
from kinsmooth.report import RunReport, emit_plots, format_csv, load_schema, trace_columns, validate


def _report(out):
    return json.loads((out / "report.json").read_text())


def test_lemma_verify_run(tmp_path):
    assert main(["run", "--scenario", "lemma-verify", "--alpha", "2", "--output-dir", str(tmp_path), "-q"]) == 0
    rep = _report(tmp_path)
    validate(rep)
    assert rep["schema_version"] == "1.0"
    lemma = rep["lemma"][0]
    assert abs(lemma["empirical_min"] - 0.0657) < 1e-4
    assert lemma["empirical_min"] >= 1 / 24
    assert (tmp_path / "trace.csv").read_text().splitlines()[0] == "time,l2,weighted_norm,bound,ratio,mass,energy,min_f"


def test_fp_exact_run_with_plots(tmp_path):
    args = ["run", "--scenario", "fp-exact", "--dim", "1", "--grid-n", "64", "--t-end", "1", "--output-dir", str(tmp_path)]
    assert main(args + ["-q"]) == 0
    rep = _report(tmp_path)
    assert all(r["ratio"] <= 1 + 1e-6 for r in rep["ratio_curve"])
    names = sorted(p.name for p in (tmp_path / "plots").iterdir())
    assert names == ["ratio_curve.svg", "spectrum_xi1.svg", "spectrum_xi2.svg"]
    header = (tmp_path / "trace.csv").read_text().splitlines()[0].split(",")
    assert header == trace_columns(1)


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"scenario": "lemma-verify", "phase_params": {"alpha": 1.0}}))
    out = tmp_path / "out"
    assert main(["run", "--config", str(cfg), "--alpha", "3", "--output-dir", str(out), "-q"]) == 0
    assert _report(out)["lemma"][0]["alpha"] == 3.0


@pytest.mark.parametrize(
    "args",
    [
        ["--scenario", "landau-model", "--dim", "1"],
        ["--scenario", "fp-exact", "--grid-n", "48"],
        ["--scenario", "fp-exact", "--delta", "2"],
        ["--scenario", "landau-homogeneous", "--grid-n", "8192"],
        ["--config", "/nonexistent.json"],
        ["--scenario", "fp-exact", "--initial-data", "nonsense"],
    ],
)
def test_usage_errors_exit_2(args, tmp_path, capsys):
    assert main(["run", *args, "--output-dir", str(tmp_path), "-q"]) == 2
    assert "usage error" in capsys.readouterr().err


def test_argparse_usage_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["run", "--scenario", "bogus"])
    assert exc.value.code == 2


def test_numerical_failure_exit_3(tmp_path, capsys):
    args = ["run", "--scenario", "landau-homogeneous", "--grid-n", "16", "--initial-data", "expr:0*v1",
            "--output-dir", str(tmp_path), "-q"]
    assert main(args) == 3
    assert "numerical failure" in capsys.readouterr().err


def test_failed_check_exit_1(tmp_path):
    # a c0 far above the admissible range violates the bound
    args = ["run", "--scenario", "kolmogorov", "--dim", "1", "--c0", "5", "--output-dir", str(tmp_path), "-q"]
    assert main(args) == 1
    rep = _report(tmp_path)
    assert not rep["summary"]["pass"]
    assert "kolmogorov_weighted_norm_bound" in rep["summary"]["failed"]


def test_config_validation():
    with pytest.raises(ConfigurationError):
        ScenarioConfig.from_mapping({"bogus": 1})
    with pytest.raises(ConfigurationError):
        ScenarioConfig.from_mapping({"phase_params": {"c9": 1}})
    with pytest.raises(ConfigurationError):
        ScenarioConfig(scenario="fp-exact", t_end=-1.0).resolved()
    cfg = ScenarioConfig(scenario="landau-homogeneous").resolved()
    assert (cfg.grid_n, cfg.half_width) == (64, 7.0)


def test_csv_formatting_is_fixed_and_repr_exact():
    rows = [{"time": 0.1, "l2": 1 / 3, "mass": 1.0}]
    text = format_csv(rows, 0)
    assert text.splitlines()[1] == "0.1,0.3333333333333333,,,,1.0,,"


def test_schema_copies_agree():
    from pathlib import Path

    doc = Path(__file__).resolve().parents[1] / "docs" / "report.schema.json"
    assert json.loads(doc.read_text()) == load_schema()


def test_empty_trace_writes_no_plots(tmp_path, caplog):
    with caplog.at_level(logging.WARNING):
        assert emit_plots(RunReport(config={}), tmp_path) == []
    assert "empty trace" in caplog.text


def test_plots_are_byte_identical(tmp_path):
    outs = []
    for k in range(2):
        out = tmp_path / str(k)
        main(["run", "--scenario", "fp-exact", "--dim", "1", "--output-dir", str(out), "-q"])
        outs.append(out)
    for name in ("ratio_curve.svg", "spectrum_xi2.svg"):
        assert (outs[0] / "plots" / name).read_bytes() == (outs[1] / "plots" / name).read_bytes()
