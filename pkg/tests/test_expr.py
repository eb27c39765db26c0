import math

import numpy as np
import pytest

from sigmaflow import expr as ex


def test_parse_numbers_and_arithmetic():
    e = ex.parse("2 + 3*4 - 10/4")
    assert ex.eval_float(e, []) == pytest.approx(2 + 12 - 2.5)


def test_power_binds_tighter_than_unary_minus():
    assert ex.eval_float(ex.parse("-2^2"), []) == pytest.approx(-4.0)
    assert ex.eval_float(ex.parse("(-2)^2"), []) == pytest.approx(4.0)


def test_power_right_associative():
    assert ex.eval_float(ex.parse("2^3^2"), []) == pytest.approx(512.0)


def test_variables_and_constants():
    e = ex.parse("pi * x1 + e * x2")
    assert ex.eval_float(e, [2.0, -1.0]) == pytest.approx(2 * math.pi - math.e)
    assert ex.max_var(e) == 2


@pytest.mark.parametrize("name,fn", [
    ("exp", math.exp), ("log", math.log), ("sin", math.sin), ("cos", math.cos),
    ("sinh", math.sinh), ("cosh", math.cosh), ("tanh", math.tanh),
    ("sqrt", math.sqrt), ("abs", abs),
])
def test_function_calls(name, fn):
    e = ex.parse(f"{name}(x1)")
    assert ex.eval_float(e, [0.7]) == pytest.approx(fn(0.7), rel=1e-15)


def test_parse_error_carries_offset():
    with pytest.raises(ex.ParseError) as err:
        ex.parse("log(")
    assert err.value.offset == 4
    with pytest.raises(ex.ParseError) as err:
        ex.parse("1 + * 2")
    assert err.value.offset == 4
    with pytest.raises(ex.ParseError):
        ex.parse("frob(x1)")
    with pytest.raises(ex.ParseError):
        ex.parse("x1 x2")


def test_unparse_round_trips_structurally():
    rng = np.random.default_rng(17)
    sources = [
        "x1 + x2*x3 - 4",
        "-(x1 + 2)^2 / (3 - x2)",
        "exp(-x1^2/2) * cos(pi*x2)",
        "sqrt(abs(x1 - x2)) + tanh(x3)",
        "1/(1 + x1^2)^2",
        "2^-x1",
    ]
    for src in sources:
        e = ex.parse(src)
        again = ex.parse(ex.unparse(e))
        assert ex.unparse(again) == ex.unparse(e)
        for _ in range(5):
            x = rng.uniform(0.1, 0.9, size=3).tolist()
            assert ex.eval_float(again, x) == pytest.approx(
                ex.eval_float(e, x), rel=1e-15)


def test_symbolic_derivative_matches_taylor():
    rng = np.random.default_rng(23)
    src = "exp(x1*x2) * sin(x1 + 2*x2) + log(3 + x1^2)"
    e = ex.parse(src)
    for _ in range(10):
        x = rng.uniform(-0.8, 0.8, size=2).tolist()
        t = ex.eval_taylor(e, x)
        for var in (1, 2):
            d = ex.differentiate(e, var)
            alpha = [0, 0]
            alpha[var - 1] = 1
            assert ex.eval_float(d, x) == pytest.approx(
                t.derivative(tuple(alpha)), rel=1e-12, abs=1e-12)


def test_eval_taylor_against_finite_differences():
    e = ex.parse("cos(x1) * exp(x2) + x1^3 * x2")
    x = [0.4, -0.3]
    t = ex.eval_taylor(e, x)

    def f(u, v):
        return math.cos(u) * math.exp(v) + u ** 3 * v

    h = 1e-3
    fd = (f(x[0] + h, x[1]) - f(x[0] - h, x[1])) / (2 * h)
    assert t.derivative((1, 0)) == pytest.approx(fd, rel=1e-5)
    fd2 = (f(x[0], x[1] + h) - 2 * f(*x) + f(x[0], x[1] - h)) / h ** 2
    assert t.derivative((0, 2)) == pytest.approx(fd2, rel=1e-5, abs=1e-6)


def test_eval_taylor_active_subset():
    # inactive variables enter as constants
    e = ex.parse("x1 * x2")
    t = ex.eval_taylor(e, [2.0, 3.0], active=[1])
    assert t.value == pytest.approx(6.0)
    assert t.derivative((1, 0)) == pytest.approx(3.0)
    assert t.derivative((0, 1)) == pytest.approx(0.0)


def test_shift_vars():
    e = ex.parse("x1 + sin(x2)")
    shifted = ex.shift_vars(e, 2)
    assert ex.eval_float(shifted, [9, 9, 1.0, 0.5]) == pytest.approx(
        1.0 + math.sin(0.5))
    assert ex.max_var(shifted) == 4


def test_domain_violation_raises_eval_error():
    with pytest.raises(ex.EvalError):
        ex.eval_float(ex.parse("log(x1)"), [-1.0])
    with pytest.raises(ex.EvalError):
        ex.eval_float(ex.parse("1/x1"), [0.0])


def test_missing_variable_is_an_error():
    with pytest.raises(ex.EvalError):
        ex.eval_float(ex.parse("x3"), [1.0, 2.0])
