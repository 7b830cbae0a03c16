import random
from math import gcd

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from kkalg.core import Homomorphism, matrix_pattern, product_algebra, ring_algebroid
from kkalg.kk import _matrix_part, eta_step, from_homomorphism, identity_rep, oplus, sharp, tower_of
from kkalg.linalg import smith_normal_form
from kkalg.modules import (
    Bimodule,
    RightModule,
    components,
    free_witness,
    from_idempotent,
    identity_module_hom,
    module_smash,
    path_component,
    pushforward_witness,
    representable,
    tensor_over_A,
    unit_isomorphism,
    verify_isomorphism,
    witness_sum,
)
from kkalg.rings import ZZ, Zmod
from kkalg.tensor import sample_J


def cyclic(Z, n, name=None):
    return RightModule(Z, {"*": ["g"]}, {"*": [[n]]}, {"1": [[1]]}, name or f"Z/{n}")


def test_unit_isomorphism(Z):
    E = RightModule(Z, {"*": ["a", "b"]}, {"*": [[4, 6]]}, {"1": [[1, 0], [0, 1]]}, "E")
    assert E.check() == []
    T, phi, psi = unit_isomorphism(E)
    assert verify_isomorphism(phi, psi) == []
    assert T.module.describe() == E.describe() == {"*": {"free_rank": 1, "torsion": [2]}}


@pytest.mark.parametrize("m,n", [(2, 3), (4, 6), (5, 10), (3, 3)])
def test_cyclic_tensor_is_gcd(Z, m, n):
    F = Bimodule(Z, Z, {"*": cyclic(Z, n)}, {"1": identity_module_hom(cyclic(Z, n))})
    assert F.check() == []
    desc = tensor_over_A(cyclic(Z, m), F).module.describe()["*"]
    g = gcd(m, n)
    assert desc == {"free_rank": 0, "torsion": [g] if g > 1 else []}


@settings(max_examples=100)
@given(st.lists(st.lists(st.integers(-9, 9), min_size=3, max_size=3), min_size=1, max_size=4))
def test_smith_normal_form(rows):
    A = sympy.Matrix(rows)
    U, D, V = (sympy.Matrix(M) for M in smith_normal_form(rows))
    assert U * A * V == D
    assert abs(U.det()) == 1 and abs(V.det()) == 1
    diag = [D[i, i] for i in range(min(D.shape))]
    nz = [d for d in diag if d]
    assert all(d > 0 for d in nz)
    assert all(b % a == 0 for a, b in zip(nz, nz[1:]))
    assert all(D[i, j] == 0 for i in range(D.rows) for j in range(D.cols) if i != j)


def test_witnesses():
    M2 = matrix_pattern(2, ZZ)
    w1 = from_idempotent(M2, [1], M2.basis("e11"))
    assert w1.verify() == []
    assert w1.module.describe() == {"1": {"free_rank": 1, "torsion": []}, "2": {"free_rank": 1, "torsion": []}}
    assert representable(M2, 1).describe() == w1.module.describe()
    P2 = product_algebra(2, ZZ)
    we = from_idempotent(P2, ["*"], P2.basis("e1"))
    wf = from_idempotent(P2, ["*"], P2.basis("e2"))
    ws = witness_sum(we, wf)
    assert ws.verify() == []
    # the class of a sum is the sum of the classes
    al = identity_rep(P2)
    one = ring_algebroid(ZZ).basis("1")
    lhs = module_smash(ws, al)(one)
    rhs = oplus(module_smash(we, al), module_smash(wf, al))(one)
    assert _matrix_part(lhs) == _matrix_part(rhs)


def test_bad_idempotent_rejected():
    P2 = product_algebra(2, ZZ)
    w = from_idempotent(P2, ["*"], P2.basis("e1", 2))
    assert w.verify()
    with pytest.raises(ValueError):
        module_smash(w, identity_rep(P2))


def test_module_smash_naturality_degree_one(Z):
    Z5 = ring_algebroid(Zmod(5))
    f = Homomorphism(Z, Z5, {"*": "*"}, {"1": Z5.basis("1")}, "f")
    w = free_witness(Z, ["*"])
    pw = pushforward_witness(w, f)
    assert pw.verify() == []
    beta = eta_step(identity_rep(Z5))
    lhs = module_smash(w, sharp(from_homomorphism(f), beta))
    rhs = module_smash(pw, beta, ZZ)
    for s in sample_J(tower_of(ring_algebroid(ZZ)), 1, random.Random(0), 10):
        assert lhs(s) == rhs(s)


def test_components():
    M2 = matrix_pattern(2, ZZ)
    assert path_component(M2, 1).objects == (1, 2)
    assert components(product_algebra(2, ZZ)) == [("*",)]
