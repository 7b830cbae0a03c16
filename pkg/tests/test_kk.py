import random

import pytest

from kkalg.core import LazyHomomorphism, identity_hom, ring_algebroid
from kkalg.kk import (
    HomotopyCertificate,
    NaturalIsomorphism,
    compose_degree0,
    epsilon,
    eta_step,
    from_homomorphism,
    hom_space,
    identity_iso,
    identity_rep,
    oplus,
    shift,
    sharp,
    tower_of,
    verify_certificate,
    w_homotopy,
    zero_like,
    _matrix_part,
)
from kkalg.rings import ZZ
from kkalg.tensor import basic_J_element, sample_J


def _basis(A):
    return [A.basis(k) for k in A.all_keys()]


def test_natural_iso_checks(M2, swap, swap_iso):
    assert swap_iso.failures() == []
    bad = NaturalIsomorphism(identity_hom(M2), swap, swap_iso.g, {1: M2.basis("e12", 2), 2: M2.basis("e21")})
    fails = bad.failures()
    assert fails and "invertible" in fails[0].detail
    with pytest.raises(ValueError):
        w_homotopy(identity_hom(M2), swap, bad)


def test_w_homotopy_identities(M2, swap, swap_iso):
    W = w_homotopy(identity_hom(M2), swap, swap_iso)
    assert W.identities() == []
    report = verify_certificate(W.certificate(), _basis(M2))
    assert report == {"ok": True, "failures": []}


def test_w_homotopy_for_identity_iso(M2):
    idh = identity_hom(M2)
    W = w_homotopy(idh, idh, identity_iso(idh))
    assert W.identities() == []
    assert W.certificate().verify(_basis(M2)) == []


def test_corrupted_chain_is_rejected(M2, swap, swap_iso):
    W = w_homotopy(identity_hom(M2), swap, swap_iso)
    cert = W.certificate()
    tests = _basis(M2)
    # the same step twice: the second one does not start where the first ends
    doubled = HomotopyCertificate(cert.start, cert.end, cert.steps * 2, cert.var, "doubled", cert.source)
    fails = doubled.verify(tests)
    assert fails and fails[0].witness["step"] == 1
    # a perturbed step moves the endpoint
    h = cert.steps[0]
    nudged = LazyHomomorphism(h.source, h.target, lambda x: h(x).scale(2), h.obj, "2h")
    fails = HomotopyCertificate(cert.start, cert.end, [nudged], cert.var, "nudged", cert.source).verify(tests)
    assert fails and fails[0].check == "endpoint" and fails[0].witness["x"]
    # the wrong end
    fails = HomotopyCertificate(cert.start, cert.start, cert.steps, cert.var, "wrong", cert.source).verify(tests)
    assert fails and "last homotopy" in fails[0].detail


def test_sharp_degree_zero_is_composition(M2, swap):
    a, b = from_homomorphism(swap), from_homomorphism(identity_hom(M2))
    for f, g in ((a, b), (a, a), (b, a)):
        s, c = sharp(f, g), compose_degree0(f, g)
        assert s.depth == 0 and s.coords == ()
        for x in _basis(M2):
            assert _matrix_part(s(x)) == _matrix_part(c(x))


def test_eta_vanishes_at_vertices(Z):
    e = eta_step(identity_rep(Z))
    assert (e.depth, e.coords) == (1, ("t1",))
    one = Z.identity("*")
    u = basic_J_element(tower_of(Z).T(1), one, one)
    v = e(u)
    assert not v.is_zero()
    for value in (0, 1):
        assert v.substitute({"t1": value}).is_zero()


def test_epsilon_on_J2(Z):
    one = Z.identity("*")
    T = tower_of(Z)
    u = basic_J_element(T.T(1), one, one)
    u2 = basic_J_element(T.T(2), u, u)
    assert T.contains(u2, 2)
    ep = epsilon(identity_rep(Z))
    assert (ep.depth, ep.coords) == (2, ("t1", "t2"))
    v = ep(u2)
    # the value is (t1² − t1)²(t2² − t2) times the unit
    for var in ("t1", "t2"):
        for value in (0, 1):
            assert v.substitute({var: value}).is_zero()
    w = v.substitute({"t1": 2, "t2": 3})
    assert [c.constant_value() for c in w.coeffs.values()] == [4 * 6]


def test_oplus_and_zero(M2, swap):
    a = from_homomorphism(swap)
    z = zero_like(a)
    s = oplus(a, z)
    for x in _basis(M2):
        m = _matrix_part(s(x))
        assert len(m.source) == 2
        assert z(x).is_zero()
    with pytest.raises(ValueError):
        oplus(a, eta_step(identity_rep(M2)))


def test_shift_directions(Z):
    r = identity_rep(Z)
    j = shift(r, "J")
    assert j.depth == 1 and j.n == 1
    with pytest.raises(ValueError):
        shift(r, "loop")
    with pytest.raises(ValueError):
        shift(r, "sideways")


def test_associativity_110_small(M2, swap):
    a, b, c = eta_step(identity_rep(M2)), eta_step(identity_rep(M2)), from_homomorphism(swap)
    left = sharp(sharp(a, b), c)
    right = sharp(a, sharp(b, c))
    assert left.depth == 2
    for s in sample_J(tower_of(M2), 2, random.Random(4), 8):
        assert left(s) == right(s)


def test_hom_space_faces_of_degeneracy(M2, swap):
    H = hom_space(M2, M2, 1)
    v = H.zero_simplex(swap)
    d = H.degeneracy(swap)
    assert H.check_simplex(d, 1, _basis(M2)) == []
    for i in (0, 1):
        face = H.face(d, i)
        for x in _basis(M2):
            assert face(x) == swap(x)
    assert H.check_simplex(v, 0, _basis(M2)) == []
    with pytest.raises(ValueError):
        hom_space(M2, M2, 2)


def test_from_homomorphism_rejects_depth_mismatch():
    Z = ring_algebroid(ZZ)
    r = identity_rep(Z)
    with pytest.raises(TypeError):
        r(basic_J_element(tower_of(Z).T(1), Z.identity("*"), Z.identity("*")))
