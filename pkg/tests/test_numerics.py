import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from trrkit.numerics import (
    SparsePoly,
    binomial,
    double_factorial,
    elementary_symmetric,
    factorial,
    falling_factorial,
    interpolate,
    lagrange_coefficient_weights,
    parse_rational,
    rational_str,
    tensor_grid_coefficient,
)
from oracles import pascal_binomial

rationals = st.fractions(
    min_value=Fraction(-50), max_value=Fraction(50), max_denominator=40
)


def test_factorial_examples():
    assert factorial(0) == 1
    assert factorial(4) == 24
    assert factorial(10) == 3628800
    with pytest.raises(ValueError):
        factorial(-1)


def test_double_factorial_examples():
    assert double_factorial(-1) == 1
    assert double_factorial(0) == 1
    assert double_factorial(5) == 15
    assert double_factorial(9) == 945
    with pytest.raises(ValueError):
        double_factorial(-2)


def test_binomial_examples():
    assert binomial(20, 0) == 1
    assert binomial(18, -1) == 0
    # oracle value via Pascal's rule (the pascal triangle gives 265182525;
    # C(31,15) would be 300540195)
    assert binomial(31, 14) == pascal_binomial(31, 14) == 265182525


def test_binomial_pascal_rule_grid():
    for a in range(-20, 21):
        for b in range(-20, 21):
            assert binomial(a, b) == binomial(a - 1, b - 1) + binomial(a - 1, b)
            assert binomial(a, b) == pascal_binomial(a, b)


def test_chu_vandermonde_identity():
    for a in range(0, 31):
        for b in range(0, 31, 3):
            for c in range(0, 31, 3):
                total = sum(
                    binomial(b + n1, n1) * binomial(a - n1, c) for n1 in range(a + 1)
                )
                assert total == binomial(a + b + 1, a - c)


def test_falling_factorial_examples():
    assert falling_factorial(5, 2) == 20
    assert falling_factorial(3, 5) == 0
    assert falling_factorial(7, 0) == 1
    with pytest.raises(ValueError):
        falling_factorial(-1, 2)


def test_falling_factorial_vs_binomial():
    for a in range(31):
        for b in range(31):
            assert falling_factorial(a, b) == binomial(a, b) * factorial(b)


def test_elementary_symmetric_examples():
    assert elementary_symmetric([Fraction(-3)], 1) == -3
    assert elementary_symmetric([Fraction(1), Fraction(2), Fraction(3)], 2) == 11
    assert elementary_symmetric([Fraction(7), Fraction(-2)], 0) == 1
    with pytest.raises(ValueError):
        elementary_symmetric([Fraction(1)], 2)


@given(st.lists(rationals, min_size=1, max_size=6))
def test_elementary_symmetric_generating_function(values):
    # prod (t + v_i) = sum e_s t^(n-s)
    t = Fraction(7, 3)
    lhs = Fraction(1)
    for v in values:
        lhs *= t + v
    rhs = sum(
        elementary_symmetric(values, s) * t ** (len(values) - s)
        for s in range(len(values) + 1)
    )
    assert lhs == rhs


@given(rationals, rationals, rationals)
def test_field_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    if a != 0:
        assert a * (1 / a) == 1
    assert a + (-a) == 0


def test_rational_serialization():
    assert rational_str(Fraction(-3, 6)) == "-1/2"
    assert rational_str(Fraction(4, 2)) == "2"
    assert parse_rational("-1/2") == Fraction(-1, 2)
    assert parse_rational("7") == 7


def test_interpolate_examples():
    p = interpolate([(0, 1), (1, 1)])
    assert p.terms == {(0,): Fraction(1)}
    q = interpolate([(1, 1), (2, 4), (3, 9)])
    assert q.terms == {(2,): Fraction(1)}
    c0, c1 = Fraction(5, 3), Fraction(-7, 2)
    affine = interpolate([(0, c0), (1, c0 + c1), (2, c0 + 2 * c1)])
    assert affine.terms == {(0,): c0, (1,): c1}
    with pytest.raises(ValueError):
        interpolate([(1, 1), (1, 2)])


@settings(deadline=None, max_examples=40)
@given(
    st.lists(rationals, min_size=1, max_size=5),
    st.integers(min_value=0, max_value=3),
)
def test_interpolate_round_trip_with_extra_nodes(coeffs, extra):
    poly = SparsePoly(("x",), {(i,): c for i, c in enumerate(coeffs)})
    nodes = [(Fraction(t), poly((Fraction(t),))) for t in range(len(coeffs) + extra)]
    assert interpolate(nodes) == poly


def test_lagrange_coefficient_weights():
    # weights reproduce coefficients of x^2 + 3x + 5 on nodes 0..3
    poly = SparsePoly(("x",), {(0,): Fraction(5), (1,): Fraction(3), (2,): Fraction(1)})
    for target, expected in [(0, 5), (1, 3), (2, 1), (3, 0)]:
        w = lagrange_coefficient_weights(3, target)
        assert sum(w[s] * poly((Fraction(s),)) for s in range(4)) == expected


def test_tensor_grid_examples():
    assert tensor_grid_coefficient(
        lambda p: Fraction(p[0] * p[1]), [1, 1], [1, 1]
    ) == 1
    assert tensor_grid_coefficient(lambda p: Fraction(5), [2, 3], [0, 0]) == 5
    assert tensor_grid_coefficient(lambda p: Fraction(p[0] ** 3), [3], [2]) == 0


def test_tensor_grid_random_polynomial():
    rng = random.Random(7)
    # random 2-variable polynomial of per-variable degree <= 2
    coeffs = {
        (i, j): Fraction(rng.randint(-9, 9), rng.randint(1, 5))
        for i in range(3)
        for j in range(3)
    }

    def evaluator(point):
        x, y = point
        return sum(c * x**i * y**j for (i, j), c in coeffs.items())

    for target, want in list(coeffs.items())[:5]:
        got = tensor_grid_coefficient(evaluator, [2, 2], target)
        assert got == want


def test_sparse_poly_degree_cap():
    p = SparsePoly(("x", "y"), {(1, 0): Fraction(1), (0, 1): Fraction(1)}, degree_cap=1)
    q = p * p
    assert q.is_zero()  # all products have degree 2 > cap
    r = SparsePoly(("x",), {(3,): Fraction(2), (1,): Fraction(1)})
    assert r.total_degree() == 3
    assert (r - r).is_zero()
