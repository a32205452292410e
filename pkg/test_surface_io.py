#!/usr/bin/env python3
"""
Tests for the .cmap and .curves text formats
"""

import io

import pytest

from app.modules.combinatorial_map import CrossMetricSurface, Triangulation, dualize, mark_holes
from app.modules.fixtures import k7_torus, octahedron
from app.modules.surface_io import (
    format_curves, format_map, read_curves, read_input, read_map, read_surface, write_map,
)
from app.modules.systole import shortest_noncontractible
from app.utils.errors import CurveFormatError, MapFormatError


def test_map_with_holes_survives_a_round_trip():
    s = mark_holes(dualize(octahedron()), [0, 3])
    back = read_surface(io.StringIO(format_map(s)))
    assert back.hole_faces() == s.hole_faces()
    assert back.summary() == s.summary()


def test_header_lists_sizes():
    text = format_map(k7_torus())
    assert text.splitlines()[0] == 'cmap 1 42 0'


@pytest.mark.parametrize('text', [
    '',
    'cmap 2 4 0\n',
    'cmap 1 4 0\n0 1 0\n',
    'cmap 1 3 0\n0 1 0\n1 0 1\n2 2 2\n',
    'cmap 1 2 0\n0 1 x\n1 0 1\n',
    'cmap 1 2 0\n0 1 0\n0 1 1\n',
])
def test_bad_map_files(text):
    with pytest.raises(MapFormatError):
        read_map(io.StringIO(text))


def test_read_input_picks_the_interpretation(tmp_path):
    primal = str(tmp_path / 'k7.cmap')
    write_map(k7_torus(), primal)
    assert isinstance(read_input(primal), Triangulation)

    dual = str(tmp_path / 'k7-dual.cmap')
    write_map(dualize(k7_torus()), dual)
    assert isinstance(read_input(dual), CrossMetricSurface)


def test_curves_format_uses_edge_ids_and_sides():
    s = dualize(k7_torus())
    _, curve = shortest_noncontractible(s)
    text = format_curves(s, [curve])
    header, line = text.splitlines()
    assert header == 'curves 1 1'
    values = [int(v) for v in line.split()]
    assert values[0] == 3
    assert all(side in (0, 1) for side in values[2::2])
    assert read_curves(io.StringIO(text), s) == [curve]


@pytest.mark.parametrize('text', [
    '',
    'curves 1 2\n1 0 0\n',
    'curves 1 1\n2 0 0\n',
    'curves 1 1\n1 9999 0\n',
    'curves 1 1\n1 0 2\n',
    'curves 1 x\n',
    'curves 1 -1\n',
])
def test_bad_curve_files(text):
    s = dualize(k7_torus())
    with pytest.raises(CurveFormatError):
        read_curves(io.StringIO(text), s)
