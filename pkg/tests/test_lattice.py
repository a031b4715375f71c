import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlsym.errors import ConfigurationError, DomainError
from nlsym.lattice import (
    CellField,
    Grid,
    GridField,
    ball_p,
    box,
    components,
    domain_from_spec,
    grid_for_domain,
    half_cells,
    interior_proxy,
    interval,
    mask_from_domain,
    rasterize,
    reflect_field,
    snap_index,
    snap_lambda,
    union,
)


def test_interval_cells():
    m = mask_from_domain(interval(-1, 1), 0.5)
    assert m.n == 4
    np.testing.assert_array_equal(m.centers[:, 0], [-0.75, -0.25, 0.25, 0.75])
    assert m.ell == 1.0
    assert m.volume == 2.0


def test_square_is_steiner_in_both_axes():
    m = mask_from_domain(box([-1, -1], [1, 1]), 0.5)
    assert m.n == 16
    assert m.steiner(0) and m.steiner(1)


def test_two_intervals_fail_steiner():
    m = mask_from_domain(union(interval(-2, -1), interval(1, 2)), 0.5)
    assert m.n == 4
    assert not m.steiner_ok


def test_disk_is_steiner():
    assert mask_from_domain(ball_p([0, 0], 1.0), 1 / 12).steiner_ok


def test_empty_mask_raises():
    with pytest.raises(DomainError):
        mask_from_domain(interval(0.1, 0.2), 1.0)


def test_padding_violation_raises():
    dom = interval(-1, 1)
    grid = Grid(1, 0.5, (-3,), (6,), 2)
    with pytest.raises(ConfigurationError):
        rasterize(dom, grid)


@pytest.mark.parametrize("lam,expected", [(0.3, 0.25), (0.25, 0.25), (-0.1, 0.0), (0.125, 0.25), (-0.125, -0.25)])
def test_snap_lambda(lam, expected):
    g = mask_from_domain(interval(-1, 1), 0.5).grid
    assert snap_lambda(g, lam) == expected


def test_reflect_examples():
    m = mask_from_domain(interval(-1, 1), 0.5)
    u = CellField(m, [0.0, 1.0, 2.0, 3.0])
    r0 = reflect_field(u, 0.0).restrict(m).values
    np.testing.assert_array_equal(r0, [3, 2, 1, 0])
    r = reflect_field(u, 0.25)
    assert u.mask.grid is r.grid
    assert CellField(m, r.restrict(m).values).at([0.75]) == 1.0


def test_symmetric_field_fixed_at_zero():
    m = mask_from_domain(interval(-1, 1), 0.25)
    x = m.centers[:, 0]
    u = CellField(m, 1 - x**2)
    np.testing.assert_array_equal(reflect_field(u, 0.0).restrict(m).values, u.values)


def test_reflection_leaving_box_raises():
    m = mask_from_domain(interval(-1, 1), 0.5, padding=1)
    u = CellField(m, np.ones(m.n))
    with pytest.raises(ConfigurationError):
        reflect_field(u, 5.0)


@settings(max_examples=60, deadline=None)
@given(st.integers(-6, 6), st.lists(st.floats(-10, 10), min_size=8, max_size=8))
def test_reflection_involution_and_isometry(t, vals):
    m = mask_from_domain(interval(-1, 1), 0.25)
    u = CellField(m, vals)
    lam = t * 0.125
    r = reflect_field(u, lam)
    rr = reflect_field(r, lam)
    np.testing.assert_array_equal(rr.values, u.to_grid().values)
    assert math.fsum(r.values.ravel() ** 2) == math.fsum(u.values**2)


@settings(max_examples=30, deadline=None)
@given(st.integers(-5, 5))
def test_reflection_involution_2d(t):
    m = mask_from_domain(box([-1, -0.5], [1, 0.5]), 0.25)
    u = GridField(m.grid, np.random.default_rng(t + 10).normal(size=m.grid.shape) * m.inside)
    lam = t * 0.125
    np.testing.assert_array_equal(reflect_field(reflect_field(u, lam), lam).values, u.values)


def test_half_cells_sides():
    m = mask_from_domain(interval(-1, 1), 0.5)
    h_pos = half_cells(m.grid, 0.25)[m.inside]
    np.testing.assert_array_equal(h_pos, [False, False, False, True])
    h_neg = half_cells(m.grid, -0.25)[m.inside]
    np.testing.assert_array_equal(h_neg, [True, False, False, False])
    h_zero = half_cells(m.grid, 0.0)[m.inside]
    np.testing.assert_array_equal(h_zero, [False, False, True, True])


def test_snap_index_round_half_away():
    assert snap_index(1.0, 0.25) == 1
    assert snap_index(1.0, -0.25) == -1
    assert snap_index(1.0, 0.2) == 0


def test_interior_proxy_and_components():
    sel = np.zeros((7, 7), dtype=bool)
    sel[1:4, 1:6] = True
    sel[5, 5] = True
    core = interior_proxy(sel)
    assert core.sum() == 3
    assert len(components(sel)) == 2


def test_domain_from_spec_union():
    d = domain_from_spec({"shape": "union", "parts": [
        {"shape": "interval", "lower": [-2], "upper": [-1]},
        {"shape": "interval", "lower": [1], "upper": [2]},
    ]})
    assert d(np.array([[1.5], [0.0], [-1.5]])).tolist() == [True, False, True]


def test_ball_p_one_norm():
    d = ball_p([0, 0], 1.0, p=1.0)
    assert d(np.array([[0.4, 0.4], [0.6, 0.6]])).tolist() == [True, False]


def test_grid_has_room_for_reflections():
    g = grid_for_domain(interval(0, 2), 1.0, padding=2)
    assert g.lo[0] <= -4 and g.lo[0] + g.shape[0] >= 6


def test_mask_hash_stable():
    a = mask_from_domain(ball_p([0, 0], 1.0), 0.125)
    b = mask_from_domain(ball_p([0, 0], 1.0), 0.125)
    assert a.hash() == b.hash() and a.same(b)
