import random

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from kkalg.core import identity_hom, matrix_pattern, ring_algebroid, zero_hom
from kkalg.kk import tower_of
from kkalg.rings import ZZ, poly_ring
from kkalg.simplicial import (
    SimplicialError,
    equivariant_pushout_failures,
    evaluation,
    eta,
    family_basis,
    family_compatible,
    from_ordered_complex,
    path_extension,
    point,
    product,
    pushout_extension,
    rehome,
    rho,
    simplex,
    smash,
    smash_iso,
    sphere,
    subdivide,
    top_row_extension,
)
from kkalg.tensor import TensorAlgebroid, basic_J_element, sample_J


@pytest.mark.parametrize("n", range(5))
def test_simplex_identities_and_homology(n):
    X = simplex(n)
    assert X.check() == []
    assert X.cell_counts() == [sympy.binomial(n + 1, k + 1) for k in range(n + 1)]
    assert X.homology()[0] == (1, [])
    assert all(h == (0, []) for h in X.homology()[1:])


def test_spheres_and_smash():
    assert sphere(1).homology() == [(1, []), (1, [])]
    assert sphere(2).homology() == [(1, []), (0, []), (1, [])]
    S1 = sphere(1)
    sm = smash(S1, S1)
    assert sm.check() == []
    assert sm.homology() == sphere(2).homology()
    torus = product(S1, S1)
    assert torus.homology() == [(1, []), (2, []), (1, [])]


def test_subdivision():
    sd = subdivide(simplex(2))
    assert sd.check() == []
    assert sd.cell_counts() == [7, 12, 6]
    assert sd.euler() == 1
    with pytest.raises(SimplicialError):
        subdivide(sphere(1))


def test_ordered_complex_with_torsion_free_homology():
    X = from_ordered_complex([[0, 1], [1, 2], [0, 2]], "triangle")
    assert X.check() == []
    assert X.homology() == [(1, []), (1, [])]


@settings(max_examples=40)
@given(st.lists(st.integers(-4, 4), min_size=1, max_size=6))
def test_family_combinations_stay_compatible(cs):
    X = simplex(2)
    basis = family_basis(X, 2, ZZ)
    fam = {}
    for c, f in zip(cs, basis):
        for x, p in f.items():
            fam[x] = fam[x] + p * c if x in fam else p * c
    assert family_compatible(X, fam) == []


def test_path_extension(Z):
    ext = path_extension(Z)
    one = Z.identity("*")
    x = ext.s(ext.quotient.pair(one, Z.zero("*", "*")))
    t = poly_ring(ZZ, ("t",)).gen("t")
    assert x @ x - x == ext.total.wrap(one).scale(t * t - t)
    assert ext.certify([("*", "*")], 4) == []
    M2 = matrix_pattern(2, ZZ)
    assert path_extension(M2).certify([(1, 2), (2, 2)], 3) == []
    assert top_row_extension(M2).certify([(1, 2)], 3) == []


def test_rho_and_eta(Z):
    T = TensorAlgebroid(Z)
    one = Z.identity("*")
    u = basic_J_element(T, one, one)
    r = rho(Z)
    t = poly_ring(ZZ, ("t",)).gen("t")
    assert r(u) == r.target.wrap(one).scale(t * t - t)
    assert eta(zero_hom(Z, Z, lambda a: a))(u).is_zero()
    assert eta(identity_hom(Z))(u) == rehome(r(u), eta(identity_hom(Z)).target)


def test_rho_vanishes_at_vertices():
    M2 = matrix_pattern(2, ZZ)
    r = rho(M2)
    for s in sample_J(tower_of(M2), 1, random.Random(2), 20):
        v = r(s)
        for value in (0, 1):
            assert evaluation(r.target, "t", value)(v).is_zero()


def test_smash_iso_small():
    Z = ring_algebroid(ZZ)
    assert smash_iso(Z, 1, 1).verify(3) == []
    assert smash_iso(Z, 1, 2).verify(2) == []
    with pytest.raises(ValueError):
        smash_iso(Z, 2, 2)


def test_pushout_interval_over_boundary():
    X = simplex(1)
    B = [(0,), (1,)]
    ext = pushout_extension(ZZ, X, B, point(), {(0,): ("*", (0,)), (1,): ("*", (0,))})
    assert ext.data.P.cell_counts() == [1, 1]
    assert ext.certify([("*", "*")], 3) == []


def test_equivariant_pushout_two_edges():
    X = from_ordered_complex([[0, 1], [2, 3]], "edges")
    B = [(0,), (1,), (2,), (3,)]
    f = {b: ("*", (0,)) for b in B}
    ext = pushout_extension(ZZ, X, B, point(), f)
    flip = {(0,): (2,), (1,): (3,), (2,): (0,), (3,): (1,), (0, 1): (2, 3), (2, 3): (0, 1)}
    ident = {x: x for x in flip}
    actions = {"e": (ident, {"*": "*"}), "a": (flip, {"*": "*"})}
    assert equivariant_pushout_failures(ext, actions, 3) == []
    # a gluing map that is not equivariant is reported
    bad = pushout_extension(ZZ, from_ordered_complex([[0, 1], [2, 3]], "edges"), B,
                            from_ordered_complex([[0], [1]], "two"),
                            {(0,): ((0,), (0,)), (1,): ((0,), (0,)), (2,): ((1,), (0,)), (3,): ((0,), (0,))})
    fails = equivariant_pushout_failures(bad, {"a": (flip, {(0,): (0,), (1,): (1,)})}, 2)
    assert fails and fails[0].check == "equivariance"
