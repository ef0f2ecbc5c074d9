import pytest

from conftest import GOLDEN, TESTS
from toricstab.cli import main

ROOT = TESTS.parent
FX = "src/toricstab/fixtures"

CASES = {
    "verify_unit_square.json": ["verify", "--polytope", f"{FX}/unit_square.json"],
    "verify_nonsmooth.json": ["verify", "--polytope", "tests/data/nonsmooth.json"],
    "ehrhart_unit_simplex.txt": ["ehrhart", "--polytope", f"{FX}/unit_simplex.json",
                                 "--format", "text"],
    "chow_unit_square.json": ["chow", "--polytope", f"{FX}/unit_square.json", "--level", "1,2"],
    "chow_trapezoid.json": ["chow", "--polytope", f"{FX}/trapezoid.json", "--level", "1"],
    "kstab_axis_tent.json": ["kstab", "--polytope", f"{FX}/unit_square.json",
                             "--g", "tests/data/axis_tent.json"],
    "relative_unit_simplex.json": ["relative", "--polytope", f"{FX}/unit_simplex.json",
                                   "--level", "1,2", "--kmax", "8"],
    "relative_trapezoid.json": ["relative", "--polytope", f"{FX}/trapezoid.json",
                                "--level", "1", "--kmax", "8"],
    "scan_fixtures.csv": ["scan", "--dir", FX, "--format", "csv"],
}


def render(argv, capsys):
    main(argv + ["--no-timing"])
    return capsys.readouterr().out


@pytest.mark.parametrize("name", sorted(CASES))
def test_report_matches_golden(name, capsys, monkeypatch, regen_golden):
    monkeypatch.chdir(ROOT)
    out = render(CASES[name], capsys)
    path = GOLDEN / name
    if regen_golden:
        GOLDEN.mkdir(exist_ok=True)
        path.write_text(out)
    assert out == path.read_text()
