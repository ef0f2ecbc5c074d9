import csv
import hashlib
import io
import json

import pytest

from conftest import DATA
from toricstab.cli import JobSpec, main, run
from toricstab.corpus import fixture_path
from toricstab.errors import InputError


def call(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def report(capsys, *argv):
    code, out, _ = call(capsys, *argv, "--no-timing")
    return code, json.loads(out)


def test_chow_unit_square(capsys):
    code, rep = report(capsys, "chow", "--polytope", fixture_path("unit_square"), "--level", "1")
    assert code == 0 and rep["exit_code"] == 0
    assert rep["result"]["verdict"] == "semistable"


def test_chow_trapezoid_is_unstable(capsys):
    code, rep = report(capsys, "chow", "--polytope", fixture_path("trapezoid"))
    assert code == 1 and rep["result"]["verdict"] == "unstable"


def test_search_inconclusive_exit_code(capsys):
    code, rep = report(capsys, "chow", "--search", "--budget", "200",
                       "--polytope", fixture_path("unit_square"))
    assert code == 2 and rep["result"]["verdict"] == "inconclusive"


def test_verify_nonsmooth(capsys):
    code, rep = report(capsys, "verify", "--polytope", DATA / "nonsmooth.json")
    assert code == 1
    assert rep["result"]["delzant"] is False
    assert [v["condition"] for v in rep["result"]["violations"]] == [3]


def test_ehrhart_simplex(capsys):
    code, out, _ = call(capsys, "ehrhart", "--polytope", fixture_path("unit_simplex"))
    assert code == 0 and "1/2 t^2 + 3/2 t + 1" in out


@pytest.mark.parametrize("path", ["malformed.json", "fractional.json", "flat.json", "missing.json"])
def test_input_errors_exit_3(capsys, path):
    code, out, err = call(capsys, "chow", "--polytope", DATA / path)
    assert code == 3 and "error" in err


def test_usage_error_exit_3(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["chow", "--level", "1"])
    assert exc.value.code == 3
    capsys.readouterr()


def test_cap_exit_4(capsys, monkeypatch):
    code, _, err = call(capsys, "chow", "--polytope", fixture_path("unit_square"), "--level", "3",
                        "--cap", "10")
    assert code == 4 and "resource" in err
    monkeypatch.setenv("TORICSTAB_CAP", "3")
    code, _, _ = call(capsys, "chow", "--polytope", fixture_path("unit_square"))
    assert code == 4
    code, _, _ = call(capsys, "chow", "--polytope", fixture_path("unit_square"), "--cap", "4")
    assert code == 0


def test_input_digest_is_a_rehash(capsys):
    path = fixture_path("hexagon")
    _, rep = report(capsys, "verify", "--polytope", path)
    inner = hashlib.sha256(path.read_bytes()).digest()
    assert rep["input_digest"] == "sha256:" + hashlib.sha256(inner).hexdigest()


def test_rationals_are_strings(capsys):
    _, rep = report(capsys, "kstab", "--polytope", fixture_path("unit_square"),
                    "--g", DATA / "axis_tent.json", "--kmax", "8")

    def walk(x, key=None):
        if isinstance(x, float):
            assert key in ("approx", "wall_time"), key
        elif isinstance(x, dict):
            for k, v in x.items():
                walk(v, k)
        elif isinstance(x, list):
            for v in x:
                walk(v, key)

    walk(rep)
    assert rep["result"]["verdict"]["leading_coefficient"] == "1/4"


def test_scan_csv(capsys, tmp_path):
    for name in ("unit_square", "hexagon", "trapezoid"):
        (tmp_path / f"{name}.json").write_bytes(fixture_path(name).read_bytes())
    (tmp_path / "broken.json").write_text("{")
    code, out, _ = call(capsys, "scan", "--dir", tmp_path, "--format", "csv", "--no-timing")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["file"] for r in rows] == ["broken.json", "hexagon.json", "trapezoid.json",
                                         "unit_square.json"]
    assert rows[0]["error"]
    assert rows[1]["residual"] == "0 0" and rows[1]["verdict"] == "semistable"
    assert rows[2]["verdict"] == "unstable"
    assert code == 0  # per-file outcomes live in the table


def test_scan_empty_directory(capsys, tmp_path):
    code, out, _ = call(capsys, "scan", "--dir", tmp_path, "--format", "csv", "--no-timing")
    assert code == 0
    assert len(out.strip().splitlines()) <= 1


def test_scan_fixture_corpus_all_delzant(capsys):
    code, out, _ = call(capsys, "scan", "--dir", fixture_path("unit_square").parent,
                        "--format", "csv", "--no-timing")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert rows and all(r["delzant"] == "true" for r in rows)
    for r in rows:
        if r["file"] in ("hexagon.json", "square_m1_1.json", "interval_m1_1.json"):
            assert set(r["residual"].split()) == {"0"}


def test_output_file_and_text_format(capsys, tmp_path):
    target = tmp_path / "r.txt"
    code, out, _ = call(capsys, "relative", "--polytope", fixture_path("unit_square"),
                        "--format", "text", "--output", target, "--kmax", "6")
    assert code == 0 and out == ""
    assert "verdict" in target.read_text()


def test_jobspec_validation():
    with pytest.raises(InputError):
        JobSpec(command="nope")
    with pytest.raises(InputError):
        JobSpec(command="chow", levels=(0,))
    assert run(JobSpec(command="verify", polytope=fixture_path("unit_cube"))).exit_code == 0
