import numpy as np
import pytest

from dpplab.errors import DimensionError
from dpplab.ground import GroundSpace, Window, weighted_inner, weighted_norm


def test_uniform_cells_midpoints_and_weights():
    space = GroundSpace.uniform_cells(0.0, 1.0, 4)
    assert np.allclose(space.points, [0.125, 0.375, 0.625, 0.875])
    assert np.allclose(space.weights, 0.25)
    assert space.n == 4


def test_geometric_cells_cover_the_interval():
    space = GroundSpace.geometric_cells(1e-6, 1.0, 64)
    assert np.all(np.diff(space.points) > 0)
    assert space.weights.sum() == pytest.approx(1.0 - 1e-6)
    assert np.all(space.weights > 0)


def test_points_must_increase():
    with pytest.raises(ValueError):
        GroundSpace(np.array([1.0, 1.0, 2.0]), np.ones(3))
    with pytest.raises(ValueError):
        GroundSpace(np.array([2.0, 1.0]), np.ones(2))


def test_weights_must_be_positive():
    with pytest.raises(ValueError):
        GroundSpace(np.array([0.0, 1.0]), np.array([1.0, 0.0]))


def test_arrays_are_frozen():
    space = GroundSpace.uniform_cells(0.0, 1.0, 3)
    with pytest.raises(ValueError):
        space.points[0] = 7.0


def test_sqrt_weights_cached():
    space = GroundSpace(np.array([1.0, 2.0]), np.array([4.0, 9.0]))
    assert np.allclose(space.sqrt_weights, [2.0, 3.0])


def test_indices_in():
    space = GroundSpace.uniform_cells(0.0, 1.0, 10)
    idx = space.indices_in(0.0, 0.5)
    assert idx == tuple(range(5))


def test_window_from_interval_and_complement():
    space = GroundSpace.uniform_cells(0.0, 1.0, 10)
    w = Window.from_interval(space, 0.0, 0.3, "left")
    assert w.index_set == (0, 1, 2)
    comp = w.complement(space)
    assert set(comp.index_set) == set(range(3, 10))
    full = Window.full(space)
    assert len(full) == 10


def test_empty_window_is_allowed():
    space = GroundSpace.uniform_cells(0.0, 1.0, 5)
    w = Window.from_interval(space, 2.0, 3.0, "empty")
    assert len(w) == 0
    w.validate(space)


def test_window_validate_rejects_out_of_range():
    space = GroundSpace.uniform_cells(0.0, 1.0, 3)
    with pytest.raises(DimensionError):
        Window((0, 5)).validate(space)


def test_weighted_inner_matches_manual_sum():
    rng = np.random.Generator(np.random.Philox(key=np.array([3, 0], dtype=np.uint64)))
    space = GroundSpace(np.sort(rng.uniform(0, 1, 6)), rng.uniform(0.5, 2.0, 6))
    u, v = rng.normal(size=(2, 6))
    assert weighted_inner(u, v, space) == pytest.approx(np.sum(u * v * space.weights))
    assert weighted_norm(u, space) == pytest.approx(np.sqrt(np.sum(u**2 * space.weights)))
