import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from kkalg.core import Homomorphism, check_algebroid, product_algebra, ring_algebroid
from kkalg.equivariant import (
    Functor,
    GreenJulg,
    GroupoidError,
    codiscrete_groupoid,
    collapse_certificate,
    collapse_tests,
    convolution,
    coset_gset,
    cyclic_group,
    descent_square_failures,
    equivariant_from_homs,
    equivariant_J,
    equivariant_khomology,
    equivariant_path_extension,
    equivariant_pushout,
    equivariant_split_extension,
    function_galgebra,
    gcomplex_from_gset,
    gcomplex_trivial,
    green_julg_roundtrip,
    group_from_table,
    index_naturality_failures,
    index_pipeline,
    kappa_failures,
    regular_gset,
    restriction,
    restriction_inverse_witness,
    restriction_product_failures,
    swap_galgebra,
    swapped_edges,
    symmetric_group,
    transport,
    trivial_descent_failures,
    trivial_galgebra,
    trivial_group,
    unit_rep,
)
from kkalg.kk import _matrix_part
from kkalg.rings import ZZ
from kkalg.simplicial import point
from kkalg.tensor import TensorAlgebroid, basic_J_element

GROUPS = [cyclic_group(2), cyclic_group(3), symmetric_group(3)]


def _swap(A):
    return equivariant_from_homs(A, A, {"*": A.actions[1]}, "s")


def _delta_hom(RX, A):
    CX, C = RX.algebras["*"], A.algebras["*"]
    return Homomorphism(CX, C, {"*": "*"}, {("δ", 0): C.basis("e1"), ("δ", 1): C.basis("e2")})


@pytest.mark.parametrize("G", GROUPS + [trivial_group(), cyclic_group(6)], ids=str)
def test_group_axioms(G):
    assert G.check() == []
    assert G.order == len(G.elements)


def test_group_equality_by_table():
    G = cyclic_group(2)
    H = group_from_table("Z/2", ["e", "a"], [["e", "a"], ["a", "e"]])
    assert H.check() == []
    assert G.order == H.order
    assert not symmetric_group(3).is_abelian()
    assert cyclic_group(3).is_abelian()


def test_gsets():
    S3 = symmetric_group(3)
    X = regular_gset(S3)
    assert X.check() == [] and len(X.orbits()) == 1
    H = [S3.e, S3.generators()[1]]
    Y = coset_gset(S3, H)
    assert len(Y.points) == 3
    assert len(Y.stabilizer(Y.points[0])) == 2
    with pytest.raises(GroupoidError):
        coset_gset(S3, [S3.e, S3.elements[3]])


def _burnside_rank(G, action_trace):
    # rank of the fixed lattice of A⊗M_G is the average character of the action
    total = Fraction(0)
    for g in G.elements:
        # conjugation by a permutation matrix P has trace tr(P)²
        fixed = sum(1 for h in G.elements if G.mul(g, h) == h)
        total += action_trace(g) * fixed * fixed
    return total / len(G.elements)


def _parity(G, g):
    perm = [G.index[G.mul(g, h)] for h in G.elements]
    seen, sign = set(), 1
    for i in range(len(perm)):
        if i in seen:
            continue
        j, length = i, 0
        while j not in seen:
            seen.add(j)
            j = perm[j]
            length += 1
        sign *= (-1) ** (length - 1)
    return sign


@pytest.mark.parametrize("G", GROUPS, ids=str)
def test_green_julg_sigma(G):
    for A, trace in ((trivial_galgebra(G, ring_algebroid(ZZ)), lambda g: 1),
                     (swap_galgebra(G), lambda g: 2 if _parity(G, g) == 1 else 0)):
        assert A.check() == []
        gj = GreenJulg(A)
        assert gj.failures() == []
        assert len(gj.fixed_lattice()) == _burnside_rank(G, trace)


def test_roundtrip_report():
    r = green_julg_roundtrip(trivial_galgebra(cyclic_group(2), ring_algebroid(ZZ)))
    assert r.ok
    names = [i.name.split()[0] for i in r.items]
    assert names[-5:] == ["R1", "R2", "R3", "R4", "R5"]
    assert r.to_dict()["ok"] is True


@pytest.mark.parametrize("n", range(1, 7))
def test_convolution_associative_cyclic(n):
    G = cyclic_group(n)
    for A in (trivial_galgebra(G, ring_algebroid(ZZ)), swap_galgebra(G), trivial_galgebra(G, product_algebra(3, ZZ))):
        assert check_algebroid(convolution(A)) == []


@settings(max_examples=50)
@given(st.lists(st.integers(-3, 3), min_size=36, max_size=36))
def test_convolution_random_triples(cs):
    AG = convolution(swap_galgebra(symmetric_group(3)))
    keys = AG.all_keys()
    x, y, z = (AG.elem("*", "*", dict(zip(keys, cs[i::3]))) for i in range(3))
    assert (z @ y) @ x == z @ (y @ x)


def test_descent_squares():
    G = cyclic_group(2)
    A = swap_galgebra(G)
    al, sw = unit_rep(A), _swap(A)
    assert al.failures() == [] and sw.failures() == []
    assert descent_square_failures(al, sw) == []
    assert descent_square_failures(sw, sw) == []
    assert trivial_descent_failures(unit_rep(swap_galgebra(trivial_group()))) == []


def test_index_pipeline():
    G = cyclic_group(2)
    A = swap_galgebra(G)
    one = ring_algebroid(ZZ).basis("1")
    res = index_pipeline(G, None, A, unit_rep(A))
    # a point gives the class of the unit
    unit = convolution(A).identity("*")
    assert [c for c in _matrix_part(res.value(one)).coeffs.values()] == [1] * len(unit.coeffs)
    X = regular_gset(G)
    bx = equivariant_from_homs(function_galgebra(X), A, {"*": _delta_hom(function_galgebra(X), A)}, "β")
    assert bx.failures() == []
    assert index_naturality_failures(G, X, A, bx) == []


def test_equivariant_extensions_and_towers():
    G = cyclic_group(2)
    A = swap_galgebra(G)
    C = A.algebras["*"]
    assert equivariant_J(A, 2).check(random.Random(0), 4) == []
    for E in (equivariant_path_extension(A), equivariant_split_extension(A)):
        Q = E.ext.quotient
        TQ = TensorAlgebroid(Q)
        qs = [Q.basis(k) for k in Q.all_keys()]
        js = [basic_J_element(TQ, x, y) for x in qs for y in qs][:12]
        assert E.failures(qs, [E.ext.s(x) for x in qs], js) == []
    assert kappa_failures(C, 3) == []
    with pytest.raises(ValueError):
        equivariant_J(A, 3)


def test_pushout_and_collapse():
    _, fails = equivariant_pushout()
    assert fails == []
    cert = collapse_certificate()
    assert cert.verify(collapse_tests(cert, 3)) == []


def test_khomology_carriers():
    G = cyclic_group(2)
    A = swap_galgebra(G)
    K = equivariant_khomology(swapped_edges(), A)
    assert K.action_failures(2) == [] and K.block_failures(2) == []
    assert equivariant_khomology(gcomplex_trivial(point(), G), A).point_failures() == []
    KS = equivariant_khomology(gcomplex_from_gset(regular_gset(G)), A)
    RX = KS.galgebra()
    bx = equivariant_from_homs(RX, A, {"*": _delta_hom(RX, A)}, "β")
    assert KS.orbit_block_failures(bx) == []


def test_restriction_and_reconstruction():
    G = cyclic_group(2)
    A = swap_galgebra(G)
    X = regular_gset(G)
    Xb = transport(X)
    theta = Functor(codiscrete_groupoid(["*"]), Xb, lambda a: G.e, lambda g: (G.e, G.e, G.e), "θ")
    phi = Functor(Xb, theta.source, lambda x: "*", lambda a: ("*", "*"), "φ")
    H = {x: (x, G.inv(x), G.e) for x in X.points}
    ra = restriction(Xb.inclusion, unit_rep(A))
    assert restriction_inverse_witness(ra, theta, phi, H).failures() == []
    assert restriction_product_failures(Xb.inclusion, unit_rep(A), _swap(A)) == []
