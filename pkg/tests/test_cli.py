"""End-to-end runs through the command line entry point."""
import json

import pytest

from nehari4.adapters import CommandAdapter
from nehari4.infrastructure import ErrorHandler, RichDisplayService
from nehari4_main import build_parser, main

pytestmark = pytest.mark.integration


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch, tmp_path):
    for name in ("NEHARI4_LOG_LEVEL", "NEHARI4_DEBUG", "NEHARI4_MAX_NODES", "NEHARI4_SEED"):
        monkeypatch.delenv(name, raising=False)
    monkeypatch.chdir(tmp_path)


def run(config_path, out_dir):
    return main(["--config", str(config_path), "--out", str(out_dir), "--quiet"])


def read(out_dir, name="report.json"):
    return json.loads((out_dir / name).read_text(encoding="utf-8"))


def test_thresholds_run_writes_report_and_meta(write_config, tmp_path):
    out = tmp_path / "out"
    path = write_config({"subcommand": "thresholds", "m": 4, "alpha": 3.0, "beta": 1.25})
    assert run(path, out) == 0
    report = read(out)
    assert report["complete"] is True
    assert report["subcommand"] == "thresholds"
    assert report["config"]["lambda"] == "auto"
    assert report["result"]["thresholds"]["c_star"] > 0.0
    assert report["result"]["lambda_in_window"] is True
    assert report["result"]["maximum_principle"]["applicable"] is True
    assert {"report.json", "meta.json"} <= set(report["files"])
    meta = read(out, "meta.json")
    assert meta["exit_code"] == 0
    assert "environment" in meta and "total_seconds" in meta["timings"]


def test_invalid_config_still_writes_incomplete_report(write_config, tmp_path):
    out = tmp_path / "out"
    path = write_config({"subcommand": "solve", "q": 2.5})
    assert run(path, out) == 2
    report = read(out)
    assert report["complete"] is False
    assert report["error"]["type"] == "config"
    assert "q must lie in (1,2)" in report["error"]["message"]
    assert report["config"] is None


def test_missing_config_file(tmp_path):
    out = tmp_path / "out"
    assert run(tmp_path / "nowhere.json", out) == 2
    assert read(out)["error"]["exit_code"] == 2


def test_unconverged_solve_exits_with_convergence_code(write_config, tmp_path):
    out = tmp_path / "out"
    path = write_config({"subcommand": "solve", "m": 4,
                         "solver": {"max_iters": 1, "tol_residual": 1e-14}})
    assert run(path, out) == 3
    report = read(out)
    assert report["complete"] is False
    assert report["error"]["type"] == "convergence"
    assert report["result"]["solution"]["iters"] <= 1
    assert {"u.field", "u.field.hdr", "energy_trace.csv"} <= set(report["files"])
    assert (out / "u.field").stat().st_size == 8 * 4 ** 5


def test_resource_cap_from_environment(write_config, tmp_path, monkeypatch):
    monkeypatch.setenv("NEHARI4_MAX_NODES", "100")
    path = write_config({"subcommand": "thresholds", "m": 4})
    assert run(path, tmp_path / "out") == 5
    assert read(tmp_path / "out", "meta.json")["overrides"] == {"max_nodes": 100}


def test_reports_are_byte_identical_across_runs(write_config, tmp_path):
    path = write_config({"subcommand": "thresholds", "m": 4, "seed": 3})
    assert run(path, tmp_path / "first") == 0
    assert run(path, tmp_path / "second") == 0
    first = (tmp_path / "first" / "report.json").read_bytes()
    second = (tmp_path / "second" / "report.json").read_bytes()
    assert first == second


def test_parser_requires_config_and_out():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["--config", "run.json"])


def test_command_registry():
    adapter = CommandAdapter(RichDisplayService(quiet=True), ErrorHandler())
    assert adapter.list_available_commands() == sorted(
        ["thresholds", "bubble", "solve", "solve-signed", "mpass", "verify-all"])
    assert adapter.validate_command("mpass")
    assert adapter.get_command_help("plot") is None
    assert "Nehari" in adapter.get_command_help("solve")


def test_adapter_reports_failures_to_the_display(mocker, write_config, tmp_path):
    display = mocker.Mock(spec=RichDisplayService)
    adapter = CommandAdapter(display, ErrorHandler())
    result = adapter.run(write_config({"subcommand": "solve", "q": 2.5}), tmp_path / "out")
    assert not result.success and result.exit_code == 2
    display.display_run_error.assert_called_once_with(result.error)
    display.display_success.assert_not_called()


def test_bubble_run_writes_expansion_and_integrals(write_config, tmp_path):
    out = tmp_path / "out"
    path = write_config({"subcommand": "bubble", "n": 8, "m": 4,
                         "bubble": {"S_g0": 2.0, "delta": 1.0}})
    assert run(path, out) == 0
    result = read(out)["result"]
    assert result["c_star"] > 0.0 and result["lambda"] > 0.0
    assert {"massN", "bilapSq", "bTerm"} <= set(result["expansion"])
    assert result["existence_condition"]["statement"]["holds"] is True
    assert len(result["integrals"]) == 5
    assert "bubble_integrals.csv" in read(out)["files"]


def test_signed_run_exit_code_follows_convergence(write_config, tmp_path):
    out = tmp_path / "out"
    path = write_config({"subcommand": "solve-signed", "m": 4, "L": 3.6,
                         "alpha": 2.0, "beta": 0.5, "solver": {"max_iters": 300}})
    code = run(path, out)
    result = read(out)["result"]
    converged = [result[name]["converged"] for name in ("u_plus", "u_minus")]
    assert code == (0 if all(converged) else 3)
    for name in ("u_plus", "u_minus"):
        assert "local_minimum" in result[name] and "palais_smale" in result[name]
        assert (out / f"{name}.field").exists()
        assert (out / f"energy_trace_{name}.csv").exists()
    assert result["u_plus"]["max_u"] > 0.0 > result["u_minus"]["min_u"]


@pytest.mark.slow
def test_mountain_pass_run_writes_path_outputs(write_config, tmp_path):
    out = tmp_path / "out"
    path = write_config({"subcommand": "mpass", "m": 4, "L": 3.6, "alpha": 2.0, "beta": 0.5,
                         "solver": {"max_iters": 300}, "path": {"nodes": 9}})
    code = run(path, out)
    report = read(out)
    assert code in (0, 3)
    assert report["complete"] is (code == 0)
    result = report["result"]
    assert {"thresholds", "u_plus", "u_minus"} <= set(result)
    if "mountain_pass" in result:
        passage = result["mountain_pass"]
        assert 0 < passage["argmax_index"] < 8
        assert passage["saddle"]["J"] > max(result["u_plus"]["J"], result["u_minus"]["J"])
        assert "margin" in passage["palais_smale"]
        for name in ("saddle.field", "c_trace.csv", "path_energies.csv"):
            assert (out / name).exists()
