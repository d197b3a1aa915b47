import math

import numpy as np
import pytest

from mhd_ensemble.exceptions import InvalidArgumentError
from mhd_ensemble.mesh import BOUNDARY_TAGS, CHANNEL_HEIGHT, CHANNEL_LENGTH, STEP_BOX, refine, step_channel, unit_square


@pytest.mark.parametrize('n, cells, vertices', [(1, 1, 4), (2, 4, 9), (32, 1024, 33 * 33)])
def test_unit_square_counts(n, cells, vertices):
    mesh = unit_square(n)
    assert mesh.n_cells == cells
    assert mesh.n_vertices == vertices


def test_unit_square_h_max():
    assert unit_square(1).h_max == pytest.approx(math.sqrt(2.), rel=1e-14)
    assert unit_square(4).h_max == pytest.approx(math.sqrt(2.) / 4, rel=1e-14)
    assert unit_square(4).h_edge == pytest.approx(0.25, rel=1e-14)


def test_unit_square_boundary_is_wall():
    mesh = unit_square(3)
    assert mesh.tags_present() == ['wall']
    assert len(mesh.boundary_facets('wall')) == 12
    assert np.all(mesh.corner_jacobians() > 0.)


@pytest.mark.parametrize('bad', [0, -1, 1.5])
def test_invalid_sizes(bad):
    with pytest.raises(InvalidArgumentError):
        unit_square(bad)
    with pytest.raises(InvalidArgumentError):
        step_channel(bad)


@pytest.mark.parametrize('c, cells', [(1, 399), (2, 1596)])
def test_step_channel_counts(c, cells):
    mesh = step_channel(c)
    assert mesh.n_cells == cells
    assert len(mesh.boundary_facets('inlet')) == 10 * c
    assert len(mesh.boundary_facets('outlet')) == 10 * c
    assert mesh.cell_areas().sum() == pytest.approx(399., rel=1e-12)


def test_step_channel_tags():
    mesh = step_channel(1)
    assert mesh.tags_present() == sorted(BOUNDARY_TAGS)
    # two sides and the top of the step
    assert len(mesh.boundary_facets('step')) == 3
    midpoints = mesh.vertices[mesh.facets[mesh.boundary_facets('step')]].mean(axis=1)
    assert np.all((midpoints[:, 0] >= 5.) & (midpoints[:, 0] <= 6.) & (midpoints[:, 1] <= 1.))


def test_channel_geometry_constants():
    mesh = step_channel(1)
    np.testing.assert_array_equal(mesh.vertices.min(axis=0), [0., 0.])
    np.testing.assert_array_equal(mesh.vertices.max(axis=0), [CHANNEL_LENGTH, CHANNEL_HEIGHT])
    x0, x1, y0, y1 = STEP_BOX
    assert mesh.cell_areas().sum() == pytest.approx(CHANNEL_LENGTH * CHANNEL_HEIGHT - (x1 - x0) * (y1 - y0), rel=1e-12)


def test_refine_unit_square():
    coarse = unit_square(1)
    fine = refine(coarse)
    assert fine.n_cells == 4
    assert fine.h_max == pytest.approx(coarse.h_max / 2, rel=1e-14)
    assert fine.h_edge == pytest.approx(0.5, rel=1e-14)
    assert fine.cell_areas().sum() == pytest.approx(1., rel=1e-12)


def test_refine_matches_finer_square():
    fine = refine(unit_square(2))
    direct = unit_square(4)
    assert fine.n_cells == direct.n_cells
    assert fine.n_vertices == direct.n_vertices
    assert np.allclose(np.sort(fine.cell_areas()), np.sort(direct.cell_areas()))


def test_refine_inherits_tags():
    coarse = step_channel(1)
    fine = refine(coarse)
    for tag in BOUNDARY_TAGS:
        assert len(fine.boundary_facets(tag)) == 2 * len(coarse.boundary_facets(tag))
    assert fine.cell_areas().sum() == pytest.approx(399., rel=1e-12)
