import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jbsde import (MeasureError, TimeGrid, ZetaDensity, bmo_statistic,
                   build_mark_measure, onb_expansion_check, simulate_paths,
                   truncate_measure, ut_norm)
from jbsde.measures import step_jump_probs

ZETA = ZetaDensity.constant(1.0)


def test_measure_sorted_and_frozen():
    mm = build_mark_measure([1.0, -0.5, 0.2], [1.0, 2.0, 3.0])
    assert np.all(np.diff(mm.marks) > 0)
    assert mm.m == 3
    assert mm.total_intensity == 6.0
    with pytest.raises(ValueError):
        mm.marks[0] = 99.0


@pytest.mark.parametrize("marks,weights", [
    ([], []),
    ([0.0], [1.0]),
    ([1.0, 1.0], [1.0, 1.0]),
    ([1.0], [0.0]),
    ([1.0], [-1.0]),
    (list(range(1, 66)), [1.0] * 65),
])
def test_measure_rejects_bad_input(marks, weights):
    with pytest.raises(MeasureError):
        build_mark_measure(marks, weights)


def test_truncate_to_empty_is_allowed():
    mm = build_mark_measure([1.0, 2.0], [1.0, 1.0])
    sub = truncate_measure(mm, lambda e: e > 5)
    assert sub.m == 0
    assert sub.total_intensity == 0.0


def test_zeta_bounds_enforced():
    z = ZetaDensity(lambda t, e: np.full_like(e, 2.0), c_nu=1.0)
    with pytest.raises(MeasureError):
        z(0.0, np.array([1.0]))


def test_time_grid():
    g = TimeGrid(2.0, 4)
    assert g.dt == 0.5
    assert np.allclose(g.nodes, [0.0, 0.5, 1.0, 1.5, 2.0])
    with pytest.raises(MeasureError):
        TimeGrid(0.0, 4)


def test_ut_norm_value():
    mm = build_mark_measure([1.0, 2.0], [0.5, 2.0])
    # |u|^2 = 1^2*0.5 + 3^2*2.0 = 18.5
    assert ut_norm(np.array([1.0, 3.0]), ZETA, 0.0, mm) == pytest.approx(
        np.sqrt(18.5))
    with pytest.raises(MeasureError):
        ut_norm(np.array([1.0]), ZETA, 0.0, mm)


@given(c=st.floats(-5, 5), u1=st.floats(-3, 3), u2=st.floats(-3, 3))
@settings(max_examples=50, deadline=None)
def test_ut_norm_homogeneous_and_triangle(c, u1, u2):
    mm = build_mark_measure([0.5, -1.5], [1.0, 0.7])
    a = np.array([u1, u2])
    b = np.array([u2, -u1])
    assert ut_norm(c * a, ZETA, 0.0, mm) == pytest.approx(
        abs(c) * ut_norm(a, ZETA, 0.0, mm), abs=1e-12)
    assert (ut_norm(a + b, ZETA, 0.0, mm)
            <= ut_norm(a, ZETA, 0.0, mm) + ut_norm(b, ZETA, 0.0, mm) + 1e-12)


def test_paths_reproducible_by_seed():
    mm = build_mark_measure([1.0, -1.0], [0.5, 0.5])
    grid = TimeGrid(1.0, 20)
    pb1 = simulate_paths(grid, mm, ZETA, 2, 100, seed=7)
    pb2 = simulate_paths(grid, mm, ZETA, 2, 100, seed=7)
    pb3 = simulate_paths(grid, mm, ZETA, 2, 100, seed=8)
    assert pb1.serialize() == pb2.serialize()
    assert pb1.serialize() != pb3.serialize()


def test_paths_shapes_and_counts():
    mm = build_mark_measure([1.0, -1.0], [0.5, 0.5])
    grid = TimeGrid(1.0, 10)
    pb = simulate_paths(grid, mm, ZETA, 1, 50, seed=0)
    assert pb.dB.shape == (50, 10, 1)
    assert pb.jump_mark.shape == (50, 10)
    counts = pb.jump_counts()
    assert counts.shape == (50, 11, 2)
    assert np.all(np.diff(counts, axis=1) >= 0)
    assert counts[:, -1].sum() == np.count_nonzero(pb.jump_mark >= 0)
    levels = pb.brownian_levels()
    assert np.allclose(levels[:, -1, 0], pb.dB[:, :, 0].sum(axis=1))


def test_paths_refuse_coarse_grid():
    mm = build_mark_measure([1.0], [10.0])
    with pytest.raises(MeasureError):
        simulate_paths(TimeGrid(1.0, 2), mm, ZETA, 0, 10, seed=0)


def test_step_jump_probs():
    mm = build_mark_measure([1.0, 2.0], [0.3, 0.2])
    probs = step_jump_probs(TimeGrid(1.0, 10), mm, ZETA)
    assert probs.shape == (10, 2)
    assert np.allclose(probs, [0.03, 0.02])


def test_onb_expansion_identity_exact():
    mm = build_mark_measure([1.0, -2.0], [0.4, 0.9])
    grid = TimeGrid(1.0, 15)
    pb = simulate_paths(grid, mm, ZETA, 0, 200, seed=3)
    rng = np.random.default_rng(0)
    u_field = rng.normal(size=(200, 15, 2))
    assert onb_expansion_check(mm, ZETA, u_field, pb) < 1e-12


def test_bmo_statistic_paths_backend():
    mm = build_mark_measure([1.0], [0.5])
    grid = TimeGrid(1.0, 10)
    pb = simulate_paths(grid, mm, ZETA, 0, 500, seed=1)
    u_field = np.ones((500, 10, 1))
    stat = bmo_statistic(u_field, mm, ZETA, grid, backend="paths", pb=pb)
    # constant field: remaining bracket from 0 is |u|^2 * 0.5 * T = 0.5
    assert stat == pytest.approx(0.5, rel=1e-10)
