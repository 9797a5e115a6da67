import io
import json

import pytest

from models.vmc_models import CSV_COLUMNS
from ui.cli import build_parser, dispatch
from utils.exceptions import AccuracyError, ResourceError, SolverError
from utils.export import canonical_json, read_csv


def invoke(*argv):
    stdout, stderr = io.StringIO(), io.StringIO()
    code = dispatch(list(argv), stdout, stderr)
    return code, stdout.getvalue(), stderr.getvalue()


@pytest.mark.unit
def test_scattering_summary():
    code, out, _ = invoke("scattering", "--potential", "soft:2,1")
    assert code == 0
    assert out.splitlines()[0] == "scattering length a = 0.238406"


@pytest.mark.unit
def test_hard_core_fourier_coefficient_is_a_domain_error():
    code, out, err = invoke("scattering", "--potential", "hard:1", "--fourier", "0")
    assert code == 2
    assert out == ""
    assert "non-integrable potential" in err


@pytest.mark.unit
def test_free_spectrum_as_csv():
    code, out, err = invoke("spectrum", "--a", "0", "--zeta", "40", "--format", "csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "energy,modes"
    assert len(lines) == 8
    assert "7 excitation level(s)" in err


@pytest.mark.unit
def test_json_output_is_canonical():
    code, out, _ = invoke("elambda", "--mmax", "12", "--format", "json")
    assert code == 0
    assert canonical_json(json.loads(out)) + "\n" == out
    assert json.loads(out)["n_partials"] == 12


@pytest.mark.unit
def test_deterministic_output_is_byte_identical(tmp_path):
    paths = [tmp_path / "one.csv", tmp_path / "four.csv"]
    for threads, path in zip(("1", "4"), paths):
        code, out, _ = invoke("elambda", "--mmax", "12", "--deterministic", "--threads", threads,
                              "--format", "csv", "--output", str(path))
        assert code == 0
        assert out.startswith("e_Lambda = ")
    assert paths[0].read_bytes() == paths[1].read_bytes()
    assert len(read_csv(paths[0])) == 12


@pytest.mark.unit
def test_flags_override_the_config_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# e_Lambda run\nmmax = 6\nformat = json\n")
    _, out, _ = invoke("elambda", "--config", str(path))
    assert json.loads(out)["n_partials"] == 6
    _, out, _ = invoke("elambda", "--config", str(path), "--mmax", "12")
    assert json.loads(out)["n_partials"] == 12


@pytest.mark.unit
def test_unknown_config_key(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("mmax = 6\nbogus = 1\n")
    code, _, err = invoke("elambda", "--config", str(path))
    assert code == 2
    assert f"{path}:2" in err


@pytest.mark.unit
def test_golden_records(tmp_path, registry):
    empty = tmp_path / "empty.json"
    empty.write_text("")
    assert invoke("golden", str(empty))[0] == 0

    _, out, _ = invoke("elambda", "--mmax", "12", "--deterministic", "--threads", "1", "--format", "json")
    pinned = json.loads(out)["value"]
    record = {"name": "pin", "subcommand": "elambda", "parameters": {"mmax": 12},
              "expected": {"value": pinned}, "tolerance": 1e-12, "provenance": "regression"}
    records = tmp_path / "golden.json"
    records.write_text(json.dumps([record]))
    code, out, _ = invoke("golden", str(records), "--threads", "1")
    assert code == 0
    assert out.startswith("golden check passed")

    record.update(expected={"value": pinned + 1e-6}, tolerance=0.0)
    records.write_text(json.dumps([record]))
    code, out, _ = invoke("golden", str(records), "--threads", "1")
    assert code == 1
    assert out.startswith("golden check FAILED: 1 of 1")


@pytest.mark.unit
def test_vmc_append_writes_header_once(tmp_path, registry):
    path = tmp_path / "runs.csv"
    argv = ["vmc", "--N", "2", "--core", "0.01", "--ell", "0.2", "--steps", "256", "--burn-in", "64",
            "--threads", "1", "--append", str(path)]
    assert invoke(*argv)[0] == 0
    assert invoke(*argv, "--seed", "1")[0] == 0
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 3
    assert [row["seed"] for row in read_csv(path)] == ["0", "1"]


@pytest.mark.unit
def test_missing_subcommand_prints_help():
    code, out, err = invoke()
    assert code == 2
    assert out == ""
    assert "usage: bosegas" in err


@pytest.mark.unit
def test_every_module_has_a_subcommand():
    choices = build_parser()._subparsers._group_actions[0].choices
    assert set(choices) >= {"scattering", "neumann", "elambda", "bracket", "born", "lhy", "energy",
                            "spectrum", "vmc", "probe", "golden"}


@pytest.mark.unit
@pytest.mark.parametrize("error, code", [
    (SolverError("integrator failed"), 3),
    (AccuracyError("truncation too small", required=80), 3),
    (ResourceError("too many levels", estimate=10 ** 7), 4),
])
def test_error_exit_codes(mocker, error, code):
    mocker.patch("ui.cli.run", side_effect=error)
    status, out, err = invoke("lhy", "--a", "0.1", "--rho", "1e-6")
    assert status == code
    assert out == ""
    assert err.startswith("error: ")
