import pytest

import numpy
from hypothesis import given, settings
from hypothesis import strategies as st

from asymconv.common import BoundDirection
from asymconv.envelope import (
    EnvelopeException,
    EnvelopeInfeasibleException,
    GridFunction1D,
    GridFunction2D,
    biconjugate,
    caratheodory_envelope_at,
    grid_tolerance,
    legendre_conjugate,
    lower_convex_hull_1d,
    one_sided_slopes,
    radial_envelope,
    window_sweep,
)


def double_well(count: "int" = 801) -> "GridFunction1D":
    return GridFunction1D.from_function(lambda x: (x**2 - 1.0) ** 2, -2.0, 2.0, count)


def test_double_well_hull() -> "None":
    f = double_well()
    hull = lower_convex_hull_1d(f)
    inside = numpy.abs(f.knots) <= 1.0
    assert numpy.abs(hull.values[inside]).max() <= 1e-12
    assert hull.values[~inside] == pytest.approx(f.values[~inside])
    assert hull.evaluate(0.0) == pytest.approx(0.0, abs=1e-12)


def test_double_well_methods_agree() -> "None":
    f = double_well()
    hull = lower_convex_hull_1d(f)
    biconj = biconjugate(f)
    assert isinstance(biconj, GridFunction1D)
    assert numpy.abs(hull.values - biconj.values).max() <= grid_tolerance(f)
    cert = caratheodory_envelope_at(f, 0.0)
    assert cert.value == pytest.approx(0.0, abs=1e-9)
    assert len(cert.combination) <= 2
    assert cert.bound_direction == BoundDirection.Upper
    assert cert.feasibility_error() <= 1e-9


def test_convex_function_is_its_own_hull() -> "None":
    f = GridFunction1D.from_function(lambda x: x**2 + 0.5 * x, -1.0, 3.0, 101)
    assert lower_convex_hull_1d(f).values == pytest.approx(f.values)
    assert biconjugate(f).values == pytest.approx(f.values, abs=grid_tolerance(f))


def test_hull_is_idempotent() -> "None":
    hull = lower_convex_hull_1d(double_well(201))
    assert lower_convex_hull_1d(hull).values == pytest.approx(hull.values)


@settings(max_examples=30, deadline=None)
@given(
    values=st.lists(
        st.floats(min_value=-5.0, max_value=5.0), min_size=3, max_size=25
    ),
    position=st.floats(min_value=0.0, max_value=1.0),
)
def test_random_functions(values: "list", position: "float") -> "None":
    knots = numpy.linspace(-1.0, 1.0, len(values))
    f = GridFunction1D(knots, numpy.array(values))
    hull = lower_convex_hull_1d(f)
    tol = max(grid_tolerance(f), 1e-9)

    assert numpy.all(hull.values <= f.values + 1e-12)
    assert numpy.all(numpy.diff(hull.secant_slopes()) >= -1e-9)
    assert numpy.abs(biconjugate(f).values - hull.values).max() <= tol

    point = -1.0 + 2.0 * position
    cert = caratheodory_envelope_at(f, point)
    assert len(cert.combination) <= 2
    assert cert.value == pytest.approx(float(hull.evaluate(point)), abs=1e-7)


def test_outside_the_grid_is_infeasible() -> "None":
    with pytest.raises(EnvelopeInfeasibleException):
        caratheodory_envelope_at(double_well(21), 3.0)


def test_dimension_mismatch() -> "None":
    with pytest.raises(EnvelopeException):
        caratheodory_envelope_at(double_well(21), [0.0, 0.0])


def test_bad_knots_are_rejected() -> "None":
    with pytest.raises(EnvelopeException):
        GridFunction1D(numpy.array([0.0, 0.0, 1.0]), numpy.zeros(3))
    with pytest.raises(EnvelopeException):
        GridFunction1D(numpy.array([0.0, 1.0]), numpy.array([0.0, numpy.inf]))


def test_conjugate_of_square() -> "None":
    # (x^2/2)* = s^2/2 for slopes inside the secant range
    f = GridFunction1D.from_function(lambda x: 0.5 * x**2, -3.0, 3.0, 601)
    slopes = numpy.linspace(-2.0, 2.0, 9)
    conj = legendre_conjugate(f, slopes)
    assert isinstance(conj, GridFunction1D)
    assert conj.evaluate(slopes) == pytest.approx(0.5 * slopes**2, abs=1e-4)


def test_csv_keeps_knots() -> "None":
    f = double_well(11)
    restored = GridFunction1D.from_csv(f.to_csv())
    assert f.to_csv().splitlines()[0] == "x,value"
    assert numpy.array_equal(restored.knots, f.knots)
    assert numpy.array_equal(restored.values, f.values)


def separable_well(x: "numpy.ndarray", y: "numpy.ndarray") -> "numpy.ndarray":
    return (x**2 - 1.0) ** 2 + y**2


def test_two_dimensional_envelope() -> "None":
    g = GridFunction2D.from_function(
        separable_well, numpy.linspace(-2.0, 2.0, 41), numpy.linspace(-1.0, 1.0, 21)
    )
    cert = caratheodory_envelope_at(g, (0.0, 0.0))
    assert cert.value == pytest.approx(0.0, abs=1e-9)
    assert len(cert.combination) <= 3
    assert cert.window == [(-2.0, 2.0), (-1.0, 1.0)]

    env = biconjugate(g)
    assert isinstance(env, GridFunction2D)
    assert env.evaluate((0.0, 0.0)) == pytest.approx(0.0, abs=1e-2)
    assert numpy.all(env.values <= g.values + 1e-12)


def test_grid2d_csv_header() -> "None":
    g = GridFunction2D.from_function(
        separable_well, numpy.linspace(-1.0, 1.0, 3), numpy.linspace(0.0, 1.0, 2)
    )
    content = g.to_csv()
    assert content.splitlines()[0] == "x,y,value"
    restored = GridFunction2D.from_csv(content)
    assert numpy.array_equal(restored.values, g.values)


def test_radial_envelope_flattens() -> "None":
    phi = GridFunction1D.from_function(lambda r: (r**2 - 1.0) ** 2, 0.0, 2.0, 201)
    env = radial_envelope(phi)
    assert numpy.abs(env.values[phi.knots <= 1.0]).max() <= 1e-12
    assert numpy.all(numpy.diff(env.values) >= -1e-12)


def test_one_sided_slopes_of_abs() -> "None":
    g = GridFunction2D.from_function(
        lambda x, y: numpy.abs(x) + 0.0 * y,
        numpy.linspace(-1.0, 1.0, 21),
        numpy.linspace(-1.0, 1.0, 5),
    )
    slopes = one_sided_slopes(g, (0.0, 0.0), axis=0)
    assert slopes.left == pytest.approx(-1.0)
    assert slopes.right == pytest.approx(1.0)
    assert slopes.jump == pytest.approx(2.0)
    with pytest.raises(EnvelopeException):
        one_sided_slopes(g, (-1.0, 0.0), axis=0)


def kinked(x: "numpy.ndarray", y: "numpy.ndarray") -> "numpy.ndarray":
    return numpy.sqrt(x**2 + numpy.exp(-(y**2)))


def test_window_sweep_decreases() -> "None":
    sweep = window_sweep(kinked, (0.0, 0.0), [2.0, 4.0, 8.0], grid=161)
    values = [w.value for w in sweep]
    assert all(b <= a + 1e-12 for a, b in zip(values, values[1:]))
    assert all(w.bound_direction == BoundDirection.Upper for w in sweep)
    assert [w.window for w in sweep] == [2.0, 4.0, 8.0]
