import pytest

import numpy
from hypothesis import given
from hypothesis import strategies as st

from asymconv.sampling import (
    STREAM_DIRECTIONS,
    STREAM_POINTS,
    axis_directions,
    box_points,
    coordinate_polish,
    golden_section_search,
    sobol_points,
    sphere_directions,
)


def test_sobol_is_reproducible() -> "None":
    first = sobol_points(100, 3, seed=42)
    second = sobol_points(100, 3, seed=42)
    assert numpy.array_equal(first, second)
    assert first.shape == (100, 3)
    assert numpy.all((first >= 0.0) & (first < 1.0))


def test_sobol_prefixes_are_nested() -> "None":
    short = sobol_points(50, 2, seed=7)
    long = sobol_points(300, 2, seed=7)
    assert numpy.array_equal(short, long[:50])


def test_streams_are_independent() -> "None":
    points = sobol_points(64, 2, seed=1, stream=STREAM_POINTS)
    directions = sobol_points(64, 2, seed=1, stream=STREAM_DIRECTIONS)
    assert not numpy.array_equal(points, directions)


def test_empty_request() -> "None":
    assert sobol_points(0, 4, seed=1).shape == (0, 4)


def test_box_points_radius() -> "None":
    points = box_points(256, 2, seed=3, radius=2.0)
    assert numpy.abs(points).max() <= 2.0


def test_axis_directions() -> "None":
    axes = axis_directions(2)
    assert axes.tolist() == [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [-0.0, -1.0]]


@pytest.mark.parametrize("p", [1.0, 2.0, 4.0])
def test_sphere_directions_are_unit(p: "float") -> "None":
    dirs = sphere_directions(
        lambda v: numpy.linalg.norm(v, ord=p, axis=-1), 128, 3, seed=5
    )
    assert dirs.shape == (128 + 6, 3)
    assert numpy.linalg.norm(dirs, ord=p, axis=-1) == pytest.approx(1.0, abs=1e-12)
    assert numpy.array_equal(dirs[:6], axis_directions(3))


@given(centre=st.floats(min_value=-0.9, max_value=0.9))
def test_golden_section_finds_parabola_minimum(centre: "float") -> "None":
    x, y = golden_section_search(lambda s: (s - centre) ** 2, -1.0, 1.0, tol=1e-8)
    assert x == pytest.approx(centre, abs=1e-6)
    assert y == pytest.approx(0.0, abs=1e-10)


def test_golden_section_flat_returns_centre() -> "None":
    x, y = golden_section_search(lambda s: 1.0, 2.0, 4.0)
    assert x == 3.0
    assert y == 1.0


def test_coordinate_polish_never_worsens() -> "None":
    def objective(v: "numpy.ndarray") -> "float":
        return float((v[0] - 0.1) ** 2 + 3.0 * (v[1] + 0.05) ** 2)

    start = numpy.array([0.0, 0.0])
    result = coordinate_polish(objective, start, iterations=60)
    assert result.value <= objective(start)
    assert result.point.tolist() == pytest.approx([0.1, -0.05], abs=1e-3)
    assert result.line_searches <= 60
    # the start is not modified
    assert start.tolist() == [0.0, 0.0]
