"""Exact arithmetic kernel.

Rationals, the combinatorial counting functions used by the closed-form
contribution evaluators, sparse multivariate polynomials with optional
total-degree truncation, and exact Lagrange interpolation.  Everything is
exact; no floating point is used anywhere in the package.
"""
from __future__ import annotations

import itertools
from fractions import Fraction
from math import comb, factorial as _math_factorial
from typing import Callable, Sequence

# All coefficients in the package are Fractions (arbitrary-precision,
# auto-normalized with positive denominator).
Rational = Fraction


def rational_str(x: Fraction) -> str:
    """Serialize a rational as "p/q", or "p" when the denominator is 1."""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def parse_rational(s: str) -> Fraction:
    return Fraction(s)


def factorial(m: int) -> int:
    if m < 0:
        raise ValueError(f"factorial undefined for negative input {m}")
    return _math_factorial(m)


def double_factorial(m: int) -> int:
    """m!! with the empty-product convention (-1)!! = 0!! = 1."""
    if m <= -2:
        raise ValueError(f"double factorial undefined for {m} <= -2")
    result = 1
    while m > 1:
        result *= m
        m -= 2
    return result


def binomial(a: int, b: int) -> int:
    """Binomial coefficient on all integer pairs.

    Returns 0 when b < 0 or b > a >= 0; for a < 0 the generalized value
    (-1)^b * C(b-a-1, b) is used, so Pascal's rule holds everywhere.
    """
    if b < 0:
        return 0
    if a >= 0:
        return comb(a, b) if b <= a else 0
    return (-1) ** b * comb(b - a - 1, b)


def falling_factorial(a: int, b: int) -> int:
    """a(a-1)...(a-b+1); zero when b > a since the product crosses zero."""
    if a < 0 or b < 0:
        raise ValueError("falling factorial needs nonnegative arguments")
    result = 1
    for t in range(b):
        result *= a - t
    return result


def elementary_symmetric(values: Sequence[Fraction], s: int) -> Fraction:
    """Elementary symmetric function e_s via the O(n*s) recurrence."""
    n = len(values)
    if s < 0 or s > n:
        raise ValueError(f"e_{s} undefined for {n} values")
    e = [Fraction(0)] * (s + 1)
    e[0] = Fraction(1)
    for i, v in enumerate(values):
        for j in range(min(s, i + 1), 0, -1):
            e[j] += v * e[j - 1]
    return e[s]


class SparsePoly:
    """Sparse multivariate polynomial over the rationals.

    Terms are keyed by exponent tuples.  If ``degree_cap`` is set, terms of
    total degree above the cap are silently dropped on every operation; this
    is the truncated-series arithmetic the graph-sum expansions rely on.
    """

    __slots__ = ("variables", "terms", "degree_cap")

    def __init__(self, variables, terms=None, degree_cap=None):
        self.variables = tuple(variables)
        self.degree_cap = degree_cap
        clean = {}
        for exps, coeff in (terms or {}).items():
            exps = tuple(exps)
            if len(exps) != len(self.variables):
                raise ValueError("exponent arity does not match variables")
            coeff = Fraction(coeff)
            if coeff == 0:
                continue
            if degree_cap is not None and sum(exps) > degree_cap:
                continue
            clean[exps] = coeff
        self.terms = clean

    @classmethod
    def constant(cls, variables, value, degree_cap=None):
        zero = (0,) * len(tuple(variables))
        return cls(variables, {zero: Fraction(value)}, degree_cap)

    @classmethod
    def variable(cls, variables, name, degree_cap=None):
        variables = tuple(variables)
        exps = [0] * len(variables)
        exps[variables.index(name)] = 1
        return cls(variables, {tuple(exps): Fraction(1)}, degree_cap)

    def _cap_with(self, other):
        if self.degree_cap is None:
            return other.degree_cap
        if other.degree_cap is None:
            return self.degree_cap
        return min(self.degree_cap, other.degree_cap)

    def __add__(self, other):
        if not isinstance(other, SparsePoly):
            other = SparsePoly.constant(self.variables, other)
        if self.variables != other.variables:
            raise ValueError("variable mismatch")
        terms = dict(self.terms)
        for e, c in other.terms.items():
            terms[e] = terms.get(e, Fraction(0)) + c
        return SparsePoly(self.variables, terms, self._cap_with(other))

    def __sub__(self, other):
        return self + (-other if isinstance(other, SparsePoly) else -Fraction(other))

    def __neg__(self):
        return SparsePoly(
            self.variables, {e: -c for e, c in self.terms.items()}, self.degree_cap
        )

    def __mul__(self, other):
        if not isinstance(other, SparsePoly):
            return SparsePoly(
                self.variables,
                {e: c * Fraction(other) for e, c in self.terms.items()},
                self.degree_cap,
            )
        if self.variables != other.variables:
            raise ValueError("variable mismatch")
        cap = self._cap_with(other)
        terms = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                if cap is not None and sum(e) > cap:
                    continue
                terms[e] = terms.get(e, Fraction(0)) + c1 * c2
        return SparsePoly(self.variables, terms, cap)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, SparsePoly):
            return NotImplemented
        return self.variables == other.variables and self.terms == other.terms

    def __hash__(self):
        return hash((self.variables, tuple(sorted(self.terms.items()))))

    def coefficient(self, exps) -> Fraction:
        return self.terms.get(tuple(exps), Fraction(0))

    def is_zero(self) -> bool:
        return not self.terms

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def __call__(self, values: Sequence[Fraction]) -> Fraction:
        if len(values) != len(self.variables):
            raise ValueError("wrong number of values")
        out = Fraction(0)
        for exps, coeff in self.terms.items():
            term = coeff
            for v, e in zip(values, exps):
                if e:
                    term *= Fraction(v) ** e
            out += term
        return out

    def items_sorted(self):
        return sorted(self.terms.items())

    def __repr__(self):
        if not self.terms:
            return "SparsePoly(0)"
        bits = []
        for exps, coeff in self.items_sorted():
            mono = "*".join(
                f"{v}^{e}" if e > 1 else v
                for v, e in zip(self.variables, exps)
                if e
            )
            bits.append(f"{rational_str(coeff)}" + (f"*{mono}" if mono else ""))
        return "SparsePoly(" + " + ".join(bits) + ")"


def interpolate(nodes: Sequence[tuple], var: str = "x") -> SparsePoly:
    """Exact univariate interpolation through the given (x, y) nodes.

    Newton's divided differences; the result is the unique polynomial of
    degree < len(nodes) through all nodes.
    """
    xs = [Fraction(x) for x, _ in nodes]
    ys = [Fraction(y) for _, y in nodes]
    if len(set(xs)) != len(xs):
        raise ValueError("duplicate abscissae")
    # divided difference table, computed in place
    dd = list(ys)
    for level in range(1, len(xs)):
        for i in range(len(xs) - 1, level - 1, -1):
            dd[i] = (dd[i] - dd[i - 1]) / (xs[i] - xs[i - level])
    poly = SparsePoly((var,), {})
    basis = SparsePoly.constant((var,), 1)
    xvar = SparsePoly.variable((var,), var)
    for k, coeff in enumerate(dd):
        poly = poly + basis * coeff
        basis = basis * (xvar - SparsePoly.constant((var,), xs[k]))
    return poly


def lagrange_coefficient_weights(degree: int, target: int) -> list[Fraction]:
    """Weight of f(s), s = 0..degree, in the t^target coefficient of the
    interpolant through the nodes (0, f(0)), ..., (degree, f(degree))."""
    if target < 0:
        raise ValueError("negative target exponent")
    weights = []
    for s in range(degree + 1):
        # ell_s(t) = prod_{u != s} (t - u) / (s - u); expand the numerator
        num = [Fraction(1)]
        denom = Fraction(1)
        for u in range(degree + 1):
            if u == s:
                continue
            new = [Fraction(0)] * (len(num) + 1)
            for i, c in enumerate(num):
                new[i + 1] += c
                new[i] -= Fraction(u) * c
            num = new
            denom *= Fraction(s - u)
        weights.append((num[target] if target < len(num) else Fraction(0)) / denom)
    return weights


def tensor_grid_coefficient(
    evaluator: Callable[[tuple], Fraction],
    per_variable_degrees: Sequence[int],
    target_exponents: Sequence[int],
) -> Fraction:
    """Coefficient of the target monomial of the polynomial interpolating the
    evaluator on the tensor grid {0, ..., d_v} per variable.

    Equivalent to iterated univariate interpolation; implemented as a single
    weighted sum over the grid.
    """
    degrees = list(per_variable_degrees)
    targets = list(target_exponents)
    if len(degrees) != len(targets):
        raise ValueError("degree/target arity mismatch")
    if any(t > d for t, d in zip(targets, degrees)):
        return Fraction(0)
    weight_tables = [lagrange_coefficient_weights(d, t) for d, t in zip(degrees, targets)]
    total = Fraction(0)
    for point in itertools.product(*(range(d + 1) for d in degrees)):
        w = Fraction(1)
        for v, coord in enumerate(point):
            w *= weight_tables[v][coord]
            if w == 0:
                break
        if w == 0:
            continue
        total += w * Fraction(evaluator(tuple(point)))
    return total
