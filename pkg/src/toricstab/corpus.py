"""The bundled fixture polytopes."""
from __future__ import annotations

import json
from importlib.resources import files

from .geometry import DelzantPolytope, polytope_from_json


def fixture_names():
    return sorted(p.name[:-5] for p in files("toricstab").joinpath("fixtures").iterdir()
                  if p.name.endswith(".json"))


def fixture_path(name: str):
    return files("toricstab").joinpath("fixtures", f"{name}.json")


def fixture_data(name: str):
    return json.loads(fixture_path(name).read_text())


def load_fixture(name: str) -> DelzantPolytope:
    return polytope_from_json(fixture_data(name))
