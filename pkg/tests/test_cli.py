import json
import math
import subprocess
import sys
from importlib import resources

import jsonschema
import pytest

from cavity_teleport.cli import RunConfig, main, run

SCHEMA = json.loads(resources.files("cavity_teleport").joinpath("data/report.schema.json")
                    .read_text())

CASES = [
    ["prepare-epr", "--atoms", "ge"],
    ["discriminate", "--bell", "PsiMinus", "--seed", "3"],
    ["teleport-maximal", "--a", "0.6", "--b-im", "0.8", "--seed", "1"],
    ["teleport-nonmaximal", "--alpha1", str(math.sqrt(0.8)), "--beta1", str(math.sqrt(0.2)),
     "--alpha2", str(math.sqrt(0.7)), "--beta2", str(math.sqrt(0.3)), "--seed", "2"],
    ["teleport-ghz", "--n", "3", "--channels", "maximal-ge"],
    ["teleport-ghz", "--n", "2", "--alpha", "0.8", "--beta", "0.6"],
    ["monte-carlo", "--protocol", "nonmaximal", "--trials", "200", "--seed", "7"],
    ["sweep", "--protocol", "maximal", "--offsets", "0,0.01,0.1"],
    ["analytic"],
]


def _run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("argv", CASES, ids=lambda a: a[0])
def test_reports_validate_against_schema(argv, capsys):
    code, out, _ = _run(argv, capsys)
    assert code == 0
    report = json.loads(out)
    jsonschema.validate(report, SCHEMA)
    assert report["config"]["command"] == argv[0]


@pytest.mark.parametrize("argv", CASES, ids=lambda a: a[0])
def test_repeat_runs_are_byte_identical(argv, capsys):
    texts = [_run(argv + fmt, capsys)[1] for fmt in ([], [], ["--format", "csv"],
                                                    ["--format", "csv"])]
    assert texts[0] == texts[1] and texts[2] == texts[3]


def test_subprocess_determinism():
    argv = [sys.executable, "-m", "cavity_teleport", "monte-carlo", "--trials", "100",
            "--seed", "11"]
    a, b = (subprocess.run(argv, capture_output=True, check=True).stdout for _ in range(2))
    assert a == b


def test_csv_matches_json(capsys):
    base = ["monte-carlo", "--trials", "300", "--seed", "5"]
    js = json.loads(_run(base, capsys)[1])["results"]["trials_summary"]
    lines = _run(base + ["--format", "csv"], capsys)[1].split("\r\n")
    header, values = lines[0].split(","), lines[1].split(",")
    row = dict(zip(header, values))
    for k, v in js.items():
        assert float(f"{float(row[k]):.15g}") == float(f"{float(v):.15g}")


def test_sweep_csv_rows(capsys):
    out = _run(["sweep", "--protocol", "maximal", "--offsets", "0,0.1", "--format", "csv"],
               capsys)[1]
    lines = out.strip().split("\r\n")
    assert lines[0] == "offset,mean_fidelity,success_rate" and len(lines) == 3


def test_monte_carlo_default_trials_echoed(capsys):
    report = json.loads(_run(["monte-carlo", "--protocol", "maximal"], capsys)[1])
    assert report["config"]["trials"] == 1000
    assert report["results"]["trials_summary"]["trials"] == 1000


@pytest.mark.parametrize("argv, field", [
    (["teleport-maximal", "--a", "1", "--b", "1"], "a/b"),
    (["analytic", "--alpha1", "0.5", "--beta1", "0.5"], "alpha1/beta1"),
    (["analytic", "--alpha1", "0.5"], "channels"),
    (["monte-carlo", "--trials", "0"], "trials"),
    (["monte-carlo", "--seed", "-1"], "seed"),
    (["prepare-epr", "--atoms", "gx"], "atoms"),
    (["discriminate", "--bell", "Nope"], "bell"),
    (["sweep", "--offsets", "0,x"], "offsets"),
    (["teleport-ghz", "--n", "3", "--alpha1", "0.6", "--beta1", "0.8", "--alpha2", "0.6",
      "--beta2", "0.8"], "channels"),
])
def test_validation_errors_name_the_field(argv, field, capsys):
    code, out, err = _run(argv, capsys)
    assert code == 2 and out == ""
    assert err.startswith(f"error: {field}")


def test_normalize_flag(capsys):
    code, out, _ = _run(["teleport-maximal", "--a", "1", "--b", "1", "--normalize"], capsys)
    assert code == 0
    assert json.loads(out)["config"]["a"]["re"] == pytest.approx(2**-0.5)


def test_out_file(tmp_path, capsys):
    dest = tmp_path / "r.json"
    assert main(["analytic", "--out", str(dest)]) == 0
    assert capsys.readouterr().out == ""
    assert json.loads(dest.read_text())["results"]["total"] == pytest.approx(0.4)
    assert main(["analytic", "--out", str(tmp_path / "missing" / "r.json")]) == 1


def test_run_api_directly():
    status, text = run(RunConfig("analytic", channels=[(0.8**0.5, 0.2**0.5)]))
    assert status == 0 and json.loads(text)["results"]["p_b"] == pytest.approx(0.16)
    status, text = run(RunConfig("bogus"))
    assert status == 2 and text.startswith("error: command")
