import json
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import DATA
from oracles import lattice_count, lattice_points as oracle_points, polygon_boundary, polygon_moments
from toricstab._exact import det
from toricstab.corpus import fixture_names, load_fixture
from toricstab.errors import DimensionError, InputError, NotDelzantError
from toricstab.geometry import (DelzantPolytope, boundary_volume, count_lattice_points, ehrhart,
                                lattice_points, moments, polytope_from_json, verify_delzant,
                                volume)

FIXTURES = fixture_names()
POLYGONS = [f for f in FIXTURES if load_fixture(f).dimension == 2]
UNIMODULAR = [((1, 1), (0, 1)), ((0, 1), (1, 0)), ((2, 1), (1, 1)), ((1, 0), (-3, 1)),
              ((-1, 0), (0, -1))]


def test_delzant_examples():
    assert verify_delzant([(0, 0), (1, 0), (0, 1)]).ok
    assert verify_delzant([(0, 0), (2, 0), (0, 2), (2, 2)]).ok
    bad = verify_delzant(json.loads((DATA / "nonsmooth.json").read_text())["vertices"])
    assert not bad.ok
    assert [(v.condition, v.vertex) for v in bad.violations] == [(3, (0, 1))]
    assert "determinant 2" in bad.violations[0].detail or "determinant -2" in bad.violations[0].detail


def test_condition_two_failure():
    octahedron = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)]
    check = verify_delzant(octahedron)
    assert not check.ok
    assert {v.condition for v in check.violations} == {2}


def test_input_errors():
    with pytest.raises(DimensionError):
        verify_delzant([(0, 0), (1, 0), (2, 0)])
    with pytest.raises(InputError):
        verify_delzant([(0, 0), (1, 0), (0, 1), (1, 0)])
    with pytest.raises(InputError):
        verify_delzant([])
    with pytest.raises(InputError):
        polytope_from_json(json.loads((DATA / "fractional.json").read_text()))
    with pytest.raises(NotDelzantError):
        DelzantPolytope.from_vertices([(0, 0), (2, 0), (0, 1)])


def test_lattice_point_examples():
    simplex = load_fixture("unit_simplex")
    assert lattice_points(simplex, 1) == ((0, 0), (0, 1), (1, 0))
    assert count_lattice_points(simplex, 2) == 6
    assert count_lattice_points(load_fixture("unit_square"), 2) == 9


@pytest.mark.parametrize("name", FIXTURES)
def test_lattice_points_match_oracle(name):
    poly = load_fixture(name)
    for i in (1, 2, 3):
        assert list(lattice_points(poly, i)) == oracle_points(poly.vertices, i)


def test_volume_examples():
    assert (volume(load_fixture("unit_square")), boundary_volume(load_fixture("unit_square"))[0]) == (1, 4)
    assert (volume(load_fixture("unit_simplex")), boundary_volume(load_fixture("unit_simplex"))[0]) == (F(1, 2), 3)
    assert (volume(load_fixture("interval_0_2")), boundary_volume(load_fixture("interval_0_2"))[0]) == (2, 2)


def test_ehrhart_examples():
    assert str(ehrhart(load_fixture("unit_square"))) == "t^2 + 2 t + 1"
    assert str(ehrhart(load_fixture("unit_simplex"))) == "1/2 t^2 + 3/2 t + 1"
    assert str(ehrhart(load_fixture("interval_0_2"))) == "2 t + 1"


def test_moment_examples():
    sq = moments(load_fixture("unit_square"))
    assert sq.first[0] == F(1, 2) and sq.second[0][0] == F(1, 3) and sq.second[0][1] == F(1, 4)
    assert moments(load_fixture("square_m1_1")).first == (0, 0)
    assert moments(load_fixture("unit_simplex")).first[0] == F(1, 6)


@pytest.mark.parametrize("name", FIXTURES)
def test_ehrhart_against_counts(name):
    poly = load_fixture(name)
    e = ehrhart(poly)
    n = poly.dimension
    assert e.coefficients[0] == 1
    assert e.coefficients[n] == volume(poly)
    assert e.coefficients[n - 1] == boundary_volume(poly)[0] / 2
    for i in range(1, 6):
        assert e(i) == count_lattice_points(poly, i) == lattice_count(poly.vertices, i)


@pytest.mark.parametrize("name", POLYGONS)
def test_polygon_moments_match_greens_theorem(name):
    poly = load_fixture(name)
    vol, first, second = polygon_moments(poly.vertices)
    bvol, bfirst = polygon_boundary(poly.vertices)
    m = moments(poly)
    assert (m.vol, m.first, m.second) == (vol, first, second)
    assert (m.bvol, m.bfirst) == (bvol, bfirst)


@pytest.mark.parametrize("name", POLYGONS)
def test_edge_measure_is_lattice_length(name):
    poly = load_fixture(name)
    total, table = boundary_volume(poly)
    assert total == sum(m for _, m in table)
    for facet, m in table:
        ends = [poly.vertices[j] for j in facet.vertex_ids]
        on_edge = [a for a in lattice_points(poly, 1) if facet.contains(a)]
        assert len(ends) == 2
        assert m == len(on_edge) - 1


@pytest.mark.parametrize("name", FIXTURES)
def test_gram_matrix_is_positive_definite(name):
    m = moments(load_fixture(name))
    G = m.gram()
    for k in range(1, len(G) + 1):
        assert det([row[:k] for row in G[:k]]) > 0
    assert all(G[a][b] == G[b][a] for a in range(len(G)) for b in range(len(G)))


def _invariants(poly):
    return volume(poly), boundary_volume(poly)[0], ehrhart(poly), verify_delzant(poly.vertices).ok


shift = st.tuples(st.integers(-5, 5), st.integers(-5, 5))


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(POLYGONS), shift, st.sampled_from(UNIMODULAR))
def test_invariance_under_lattice_maps(name, t, M):
    poly = load_fixture(name)
    base = _invariants(poly)
    assert _invariants(poly.translate(t)) == base
    assert _invariants(poly.transform(M)) == base


@settings(max_examples=40, deadline=None)
@given(shift, st.sampled_from(UNIMODULAR))
def test_nonsmooth_stays_nonsmooth(t, M):
    verts = [(0, 0), (2, 0), (0, 1)]
    moved = [tuple(sum(r * x for r, x in zip(row, v)) + s for row, s in zip(M, t)) for v in verts]
    assert not verify_delzant(moved).ok
    assert [v.condition for v in verify_delzant(moved).violations] == [3]
