import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from freejac.errors import ShapeError
from freejac.matrixeval import eval_poly, jet_eval
from freejac.ncpoly import (BiPoly, FreePoly, FreePolyMap, compose, embed, formal_derivative,
                            poly_add, poly_mul, truncate)
from freejac.parser import parse_poly

from conftest import free_polys, random_tuple, relerr

X = FreePoly.var(1, 0)
X2, Y2 = FreePoly.var(2, 0), FreePoly.var(2, 1)


def test_add_examples():
    assert (X + (-X)).is_zero()
    assert poly_add(X2 * Y2, Y2 * X2).terms == {(0, 1): 1, (1, 0): 1}
    assert 2 * X**2 + 3 * X**2 == FreePoly(1, {(0, 0): 5})


def test_mul_is_noncommutative():
    assert poly_mul(X2, Y2) == FreePoly.monomial(2, (0, 1))
    assert poly_mul(Y2, X2) == FreePoly.monomial(2, (1, 0))
    assert X2 * Y2 != Y2 * X2


def test_mul_distributes_and_unit():
    s = X2 + Y2
    assert s * s == FreePoly(2, {(0, 0): 1, (0, 1): 1, (1, 0): 1, (1, 1): 1})
    p = parse_poly("2*X*Y - i*Y + 3", ["X", "Y"])
    assert FreePoly.one(2) * p == p


def test_variable_count_mismatch():
    with pytest.raises(ShapeError):
        poly_add(X, X2)
    with pytest.raises(ShapeError):
        poly_mul(X2, X)
    with pytest.raises(ShapeError):
        FreePoly(2, {(2,): 1})


def test_prune_and_canonical_order():
    p = FreePoly(2, {(1, 0): 1, (0,): 2, (0, 1): 1e-15, (): 3})
    assert list(p.terms) == [(), (0,), (1, 0)]
    assert p.degree == 2
    assert FreePoly.zero(3).degree == -1


def test_derivative_of_square():
    # N = 1: letter 1 is the H-variable
    d = formal_derivative(X**2)
    assert isinstance(d, BiPoly) and d.h_linear
    assert d == FreePoly(2, {(0, 1): 1, (1, 0): 1})


def test_derivative_of_sum_map_component():
    # X + Y -> H + K with H, K the letters 2, 3
    assert formal_derivative(X2 + Y2) == FreePoly(4, {(2,): 1, (3,): 1})


def test_derivative_of_exotic_component(rng):
    p = parse_poly("X + X^2 + [X,Y]", ["X", "Y"])
    expected = FreePoly(4, {(2,): 1, (2, 0): 1, (0, 2): 1, (2, 1): 1, (1, 2): -1,
                            (0, 3): 1, (3, 0): -1})
    assert formal_derivative(p) == expected
    # independent check: block-jet evaluation at random 3x3 tuples
    P = FreePolyMap([p])
    for _ in range(5):
        Xt, Ht = random_tuple(rng, 2, 3), random_tuple(rng, 2, 3)
        jet = jet_eval(P, Xt, Ht).derivative[0]
        assert relerr(eval_poly(expected, Xt.concat(Ht)), jet) < 1e-12


def test_compose_examples():
    x = FreePoly.var(1, 0)
    assert compose(x**2, [X2 + Y2]) == (X2 + Y2) * (X2 + Y2)
    p = parse_poly("3*X*Y - Y*Y*X + 2", ["X", "Y"])
    assert compose(p, [X2, Y2]) == p
    y = FreePoly.var(1, 0)
    got = compose(x - x**2, [y + y**2])
    assert got == FreePoly(1, {(0,): 1, (0, 0, 0): -2, (0, 0, 0, 0): -1})
    # scalar oracle: t - t^2 at t = s + s^2
    for s in (0.3, -1.7, 2.0):
        t = s + s**2
        assert abs(sum(c * s ** len(w) for w, c in got.items()) - (t - t**2)) < 1e-12


def test_compose_arity_mismatch():
    with pytest.raises(ShapeError):
        compose(X2 * Y2, [X2])


def test_compose_with_max_degree():
    x = FreePoly.var(1, 0)
    assert compose(x**3 + x, [x + x**2], max_degree=3) == \
        truncate(compose(x**3 + x, [x + x**2]), 3)


def test_truncate_examples():
    assert truncate(X + X**3, 2) == X
    p = parse_poly("1 + X*Y - 2*Y*Y*Y", ["X", "Y"])
    assert truncate(p, p.degree) == p
    assert truncate(parse_poly("1 + X + X*Y", ["X", "Y"]), 1) == FreePoly(2, {(): 1, (0,): 1})
    with pytest.raises(ValueError):
        truncate(p, -1)


def test_linear_part_and_identity_map():
    P = FreePolyMap([parse_poly("2*X - Y + X*Y", ["X", "Y"]), Y2])
    np.testing.assert_array_equal(P.linear_part(), [[2, -1], [0, 1]])
    I = FreePolyMap.identity(2)
    assert P.compose(I) == P


def test_isclose_tolerance():
    p = FreePoly(1, {(0,): 1000.0})
    assert p.isclose(FreePoly(1, {(0,): 1000.0 + 1e-7}))
    assert not p.isclose(FreePoly(1, {(0,): 1000.0 + 1e-5}))


def _leibniz_sides(p, q):
    n2 = 2 * p.num_vars
    lhs = formal_derivative(p * q)
    rhs = formal_derivative(p) * embed(q, n2) + embed(p, n2) * formal_derivative(q)
    return lhs, rhs


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 3).flatmap(lambda n: st.tuples(free_polys(n), free_polys(n))))
def test_leibniz_rule(pq):
    lhs, rhs = _leibniz_sides(*pq)
    assert lhs.isclose(rhs)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 3).flatmap(lambda n: st.tuples(free_polys(n), free_polys(n))))
def test_derivative_is_additive_and_h_linear(pq):
    p, q = pq
    d = formal_derivative(p + q)
    assert d.isclose(formal_derivative(p) + formal_derivative(q))
    assert d.h_linear
    assert all(sum(1 for i in w if i >= p.num_vars) == 1 for w in d.words())


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 3).flatmap(
    lambda n: st.tuples(free_polys(n, 3, 4), free_polys(n, 3, 4), free_polys(n, 3, 4))))
def test_mul_associative(pqr):
    p, q, r = pqr
    assert ((p * q) * r).isclose(p * (q * r))


@settings(max_examples=50, deadline=None)
@given(st.data())
def test_compose_compatible(data):
    n = data.draw(st.integers(1, 2))
    p = data.draw(free_polys(n, 3, 4))
    A = [data.draw(free_polys(n, 2, 3)) for _ in range(n)]
    B = [data.draw(free_polys(n, 2, 3)) for _ in range(n)]
    AB = [compose(a, B) for a in A]
    assert compose(compose(p, A), B).isclose(compose(p, AB))
