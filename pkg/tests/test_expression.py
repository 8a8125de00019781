import pytest

import numpy
from hypothesis import given
from hypothesis import strategies as st

from asymconv.utils.expression import (
    ExpressionSyntaxException,
    compile_expression,
    tokenize,
)


@pytest.mark.parametrize(
    ["source", "x", "expected"],
    [
        ("(x^2-1)^2", 0.0, 1.0),
        ("(x^2-1)^2", 1.0, 0.0),
        ("-x^2", 3.0, -9.0),
        ("2^3^2", 0.0, 512.0),
        ("2^-1", 0.0, 0.5),
        ("abs(x) + sqrt(4)", -1.5, 3.5),
        ("min(x, 1, 3) + max(x, -2)", 2.0, 3.0),
        ("exp(0) * 1e1 / .5", 0.0, 20.0),
    ],
)
def test_evaluates_1d(source: "str", x: "float", expected: "float") -> "None":
    fn = compile_expression(source)
    assert fn(x) == pytest.approx(expected)


def test_evaluates_2d_broadcast() -> "None":
    fn = compile_expression("abs(x) + min(y^2, 1)", ("x", "y"))
    xs = numpy.array([-1.0, 0.0, 2.0])
    ys = numpy.array([[0.5], [3.0]])
    values = fn(xs, ys)
    assert values.shape == (2, 3)
    assert values[0].tolist() == pytest.approx([1.25, 0.25, 2.25])
    assert values[1].tolist() == pytest.approx([2.0, 1.0, 3.0])


def test_constant_broadcasts_to_grid() -> "None":
    fn = compile_expression("3")
    assert fn(numpy.zeros(5)).tolist() == [3.0] * 5


def test_tokens_carry_positions() -> "None":
    tokens = tokenize("x + 12.5")
    assert [(t.kind, t.text, t.position) for t in tokens] == [
        ("name", "x", 0),
        ("op", "+", 2),
        ("number", "12.5", 4),
        ("end", "", 8),
    ]


@pytest.mark.parametrize(
    ["source", "position"],
    [
        ("x + ", 4),
        ("x $ 2", 2),
        ("(x + 1", 6),
        ("z * 2", 0),
        ("sin(x)", 0),
        ("sqrt(x, 2)", 0),
        ("min(x)", 0),
        ("x 2", 2),
    ],
)
def test_syntax_errors_report_position(source: "str", position: "int") -> "None":
    with pytest.raises(ExpressionSyntaxException) as excinfo:
        compile_expression(source)
    assert excinfo.value.position == position
    assert repr(source) in str(excinfo.value)


def test_argument_count_is_checked() -> "None":
    fn = compile_expression("x + y", ("x", "y"))
    with pytest.raises(TypeError):
        fn(1.0)


@given(
    a=st.floats(min_value=-10, max_value=10),
    b=st.floats(min_value=-10, max_value=10),
    x=st.floats(min_value=-10, max_value=10),
)
def test_affine_matches_python(a: "float", b: "float", x: "float") -> "None":
    fn = compile_expression(f"({a!r}) * x + ({b!r})")
    assert float(fn(x)) == pytest.approx(a * x + b, abs=1e-9)
