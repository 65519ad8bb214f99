import numpy as np
import pytest

from exitbound import ExpressionError, parse_expression


def evaluate(text, x):
    field = parse_expression(text)
    return field(np.array([[float(x)]]))[0]


@pytest.mark.parametrize("text,x,expected", [
    ("0.5*x^2", 2.0, 2.0),
    ("0", 3.7, 0.0),
    ("exp(x)-1", 0.0, 0.0),
    ("1", -5.0, 1.0),
    ("2+3*x^2", 2.0, 14.0),
    ("-x^2", 3.0, -9.0),
    ("x^2^3", 2.0, 256.0),          # right-associative power
    ("sin(x)/cos(x)", 0.3, np.tan(0.3)),
    ("sqrt(x^2)", -4.0, 4.0),
    ("(x+1)*(x-1)", 3.0, 8.0),
    ("2e-2*x", 10.0, 0.2),
    ("exp(-x^2/2)", 1.0, np.exp(-0.5)),
])
def test_evaluation(text, x, expected):
    assert evaluate(text, x) == pytest.approx(expected, abs=1e-12)


def test_vectorized_evaluation():
    field = parse_expression("0.5*x^2")
    pts = np.array([[0.0], [1.0], [2.0]])
    np.testing.assert_allclose(field(pts), [0.0, 0.5, 2.0])


@pytest.mark.parametrize("text", ["0.5*", "(1+2", "sin x", "x+", "*2", ""])
def test_syntax_error_carries_position(text):
    with pytest.raises(ExpressionError) as err:
        parse_expression(text)
    assert err.value.position is not None


def test_unknown_identifier():
    with pytest.raises(ExpressionError) as err:
        parse_expression("y+1")
    assert "y" in str(err.value)
    assert err.value.position == 0


def test_unknown_function():
    with pytest.raises(ExpressionError):
        parse_expression("tanh(x)")
