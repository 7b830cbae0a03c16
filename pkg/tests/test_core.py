import pytest
import sympy
from hypothesis import given, settings, strategies as st

from kkalg.completion import AdditiveCompletion, TensorProduct
from kkalg.core import (
    Algebroid,
    EndpointError,
    Homomorphism,
    check_algebroid,
    identity_hom,
    matrix_pattern,
    polynomial_truncation,
    product_algebra,
    ring_algebroid,
)
from kkalg.rings import QQ, ZZ, Zmod


@pytest.mark.parametrize(
    "A",
    [
        ring_algebroid(ZZ),
        ring_algebroid(Zmod(6)),
        product_algebra(3, QQ),
        matrix_pattern(3, ZZ),
        polynomial_truncation(ZZ, 4),
    ],
    ids=lambda A: A.name,
)
def test_standard_algebroids_are_clean(A):
    assert check_algebroid(A) == []
    assert A.is_unital


def test_mutated_structure_constant_gives_witness():
    M = matrix_pattern(2, ZZ)
    structure = dict(M.structure)
    structure[("e12", "e21")] = {"e11": 2}
    bad = Algebroid("bad", ZZ, M.objects, M.basis_ends, structure, M.units)
    fails = check_algebroid(bad)
    assert fails
    assert {f.check for f in fails} & {"associativity", "left unit", "right unit"}
    assert all(f.witness for f in fails)


def test_bad_endpoint_composition():
    M = matrix_pattern(2, ZZ)
    with pytest.raises(EndpointError):
        M.basis("e12") @ M.basis("e12")


def _matrix_of(e, n):
    m = sympy.zeros(n, n)
    for k, c in e.coeffs.items():
        m[int(k[1]) - 1, int(k[2]) - 1] = c.constant_value()
    return m


coeffs = st.integers(-20, 20)


@settings(max_examples=200)
@given(st.lists(coeffs, min_size=9, max_size=9), st.lists(coeffs, min_size=9, max_size=9))
def test_pattern_composition_matches_matrix_product(xs, ys):
    # with all objects summed, the pattern algebra is M3(Z) and y∘x is Y·X
    n = 3
    M = matrix_pattern(n, ZZ)
    keys = [f"e{i}{j}" for i in range(1, n + 1) for j in range(1, n + 1)]
    X = sympy.Matrix(n, n, xs)
    Y = sympy.Matrix(n, n, ys)
    prod = sympy.zeros(n, n)
    for kx, cx in zip(keys, xs):
        for ky, cy in zip(keys, ys):
            if ky[2] == kx[1]:
                prod += _matrix_of(M.basis(ky, cy) @ M.basis(kx, cx), n)
    assert prod == Y * X


@settings(max_examples=200)
@given(st.lists(coeffs, min_size=4, max_size=4), st.lists(coeffs, min_size=4, max_size=4))
def test_truncation_matches_sympy_remainder(p, q):
    k = 4
    P = polynomial_truncation(ZZ, k)
    keys = ["1"] + [f"x{i}" for i in range(1, k)]
    x = P.elem("*", "*", dict(zip(keys, p)))
    y = P.elem("*", "*", dict(zip(keys, q)))
    t = sympy.Symbol("t")
    sp = sum(c * t**i for i, c in enumerate(p))
    sq = sum(c * t**i for i, c in enumerate(q))
    expect = sympy.Poly(sympy.rem(sympy.expand(sp * sq), t**k, t), t)
    got = y @ x
    for i, key in enumerate(keys):
        c = got.coeffs.get(key)
        assert (c.constant_value() if c is not None else 0) == expect.coeff_monomial(t**i)


def test_homomorphism_checks(M2, swap):
    assert swap.check() == []
    assert swap.is_unital()
    assert identity_hom(M2).check() == []
    images = dict(swap.images)
    images["e11"] = M2.basis("e22", 2)
    bad = Homomorphism(M2, M2, {1: 2, 2: 1}, images, "bad")
    fails = bad.check()
    assert fails and fails[0].check == "multiplicativity"


def test_homomorphism_rejects_wrong_endpoints(M2):
    with pytest.raises(EndpointError):
        Homomorphism(M2, M2, {1: 1, 2: 2}, {"e12": M2.basis("e21")})


def test_tensor_of_patterns_is_a_pattern():
    M2 = matrix_pattern(2, ZZ)
    T = TensorProduct(M2, M2)
    assert check_algebroid(T) == []
    assert len(T.objects) == 4 and len(T.all_keys()) == 16
    # every hom-module has rank one, like the 4×4 pattern
    assert all(len(T.hom_keys(a, b)) == 1 for a in T.objects for b in T.objects)
    x = T.tensor(M2.basis("e12"), M2.basis("e21"))
    y = T.tensor(M2.basis("e21"), M2.basis("e12"))
    assert y @ x == T.tensor(M2.basis("e22"), M2.basis("e11"))


def test_additive_completion_matrices(M2):
    C = AdditiveCompletion(M2)
    p = C.matrix((1, 2), (1, 2), [[M2.basis("e11"), 0], [0, M2.basis("e22")]])
    assert p @ p == p
    assert p == C.identity((1, 2))
    q = C.matrix((1,), (2,), [[M2.basis("e21")]])
    r = C.matrix((2,), (1,), [[M2.basis("e12")]])
    assert r @ q == C.identity((1,))
