"""Exact polynomial arithmetic against sympy, parsing, and the simplicial ring Z^Δⁿ."""

from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from kkalg.rings import (
    QQ,
    ZZ,
    PolyParseError,
    Zmod,
    compose_maps,
    degeneracy_map,
    face_map,
    parse_base_ring,
    parse_poly,
    poly_ring,
    simplex_ring,
    simplicial_degeneracy,
    simplicial_face,
    simplicial_operator,
)

GENS = ("x", "y", "z")
R = poly_ring(ZZ, GENS)
SX = sympy.symbols(GENS)

monomials = st.tuples(*(st.integers(0, 3) for _ in GENS))
polys = st.dictionaries(monomials, st.integers(-9, 9), max_size=5)


def build(d, ring=R):
    p = ring.zero
    for exps, c in d.items():
        term = ring.const(c)
        for v, e in zip(GENS, exps):
            term = term * ring.gen(v) ** e
        p = p + term
    return p


def to_sympy(d):
    return sympy.expand(sum(c * sympy.Mul(*(s ** e for s, e in zip(SX, exps))) for exps, c in d.items()))


def from_ours(p):
    return sympy.expand(sympy.sympify(str(p).replace("^", "**"), locals=dict(zip(GENS, SX))))


@settings(max_examples=1000)
@given(polys, polys, polys)
def test_ring_axioms(a, b, c):
    p, q, r = build(a), build(b), build(c)
    assert (p + q) + r == p + (q + r)
    assert p + q == q + p
    assert (p * q) * r == p * (q * r)
    assert p * q == q * p
    assert p * (q + r) == p * q + p * r
    assert p - p == R.zero
    assert p * R.one == p


@settings(max_examples=1000)
@given(polys, polys)
def test_product_matches_sympy(a, b):
    assert from_ours(build(a) * build(b)) == sympy.expand(to_sympy(a) * to_sympy(b))
    assert from_ours(build(a) - build(b)) == sympy.expand(to_sympy(a) - to_sympy(b))


@settings(max_examples=300)
@given(polys, st.integers(0, 4))
def test_power_and_substitution_match_sympy(a, k):
    p = build(a)
    assert from_ours(p ** k) == sympy.expand(to_sympy(a) ** k)
    x, y = R.gen("x"), R.gen("y")
    sub = p.substitute({"x": x + y, "z": R.const(2)})
    ref = to_sympy(a).subs({SX[0]: SX[0] + SX[1], SX[2]: 2}, simultaneous=True)
    assert from_ours(sub) == sympy.expand(ref)


@settings(max_examples=300)
@given(polys)
def test_render_parse_roundtrip(a):
    p = build(a)
    assert parse_poly(str(p)) == p


@given(polys, polys)
def test_exact_divide(a, b):
    p, q = build(a), build(b)
    if q.is_zero():
        return
    assert (p * q).exact_divide(q) == p


def test_canonical_rendering():
    assert str(parse_poly("3*t1^2*t2 - 1")) == "3*t1^2*t2 - 1"
    assert str(parse_poly("-(1 - t)")) == "t - 1"


def test_modular_and_rational_coefficients():
    F5 = poly_ring(Zmod(5), ("x",))
    x = F5.gen("x")
    assert (x + 1) ** 5 == x ** 5 + 1
    assert (x * 5).is_zero()
    Q = poly_ring(QQ, ("x",))
    half = Q.const(Fraction(1, 2))
    assert (half * 2) == Q.one


def test_base_ring_parsing():
    assert parse_base_ring("Z") == ZZ
    assert parse_base_ring("ZZ/6") == Zmod(6)
    with pytest.raises(ValueError):
        parse_base_ring("R")
    assert not Zmod(6).is_field and Zmod(7).is_field
    assert Zmod(6).quotient(4, 2) in (2, 5)
    with pytest.raises(ZeroDivisionError):
        ZZ.inverse(2)


def test_parse_errors_report_position():
    with pytest.raises(PolyParseError):
        parse_poly("3*+")
    with pytest.raises(PolyParseError):
        parse_poly("(t - 1")


# -- simplicial identities in Z^Δⁿ, checked on every generator and on a product


def _probes(n):
    ring = simplex_ring(n)
    gens = [ring.gen(g) for g in ring.gens]
    out = list(gens)
    if n >= 1:
        prod = ring.one
        for g in gens:
            prod = prod * (g + 1)
        out.append(prod * prod - gens[0])
    return out


@pytest.mark.parametrize("n", range(2, 5))
def test_face_face(n):
    for p in _probes(n):
        for j in range(n + 1):
            for i in range(j):
                assert simplicial_face(simplicial_face(p, j, n), i, n - 1) == \
                    simplicial_face(simplicial_face(p, i, n), j - 1, n - 1)


@pytest.mark.parametrize("n", range(0, 4))
def test_degeneracy_degeneracy(n):
    for p in _probes(n):
        for j in range(n + 1):
            for i in range(j + 1):
                assert simplicial_degeneracy(simplicial_degeneracy(p, j, n), i, n + 1) == \
                    simplicial_degeneracy(simplicial_degeneracy(p, i, n), j + 1, n + 1)


@pytest.mark.parametrize("n", range(1, 5))
def test_face_degeneracy(n):
    for p in _probes(n):
        q = p
        for j in range(n):
            for i in range(n + 2):
                lhs = simplicial_face(simplicial_degeneracy(q, j, n), i, n + 1)
                if i in (j, j + 1):
                    assert lhs == q
                elif i < j:
                    assert lhs == simplicial_degeneracy(simplicial_face(q, i, n), j - 1, n - 1)
                else:
                    assert lhs == simplicial_degeneracy(simplicial_face(q, i - 1, n), j, n - 1)


def test_operators_compose_contravariantly():
    p = _probes(3)[-1]
    theta, phi = face_map(1, 3), face_map(0, 2)
    direct = simplicial_operator(p, compose_maps(theta, phi), 1, 3)
    assert direct == simplicial_operator(simplicial_operator(p, theta, 2, 3), phi, 1, 2)


def test_degeneracy_map_shape():
    assert degeneracy_map(0, 1) == (0, 0, 1)
    assert face_map(0, 2) == (1, 2)
