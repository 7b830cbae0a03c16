import random

import pytest
from hypothesis import given, settings, strategies as st

from kkalg.completion import DirectSum
from kkalg.core import matrix_pattern, polynomial_truncation, product_algebra
from kkalg.kk import tower_of
from kkalg.rings import ZZ
from kkalg.tensor import (
    FSplitExtension,
    JTower,
    TensorAlgebroid,
    basic_J_element,
    classifying_map,
    pi,
    sample_J,
    sigma,
    tensor_path,
    ufsplit_square,
    universal_extension,
)


@pytest.mark.parametrize("C", [matrix_pattern(2, ZZ), product_algebra(2, ZZ), polynomial_truncation(ZZ, 3)],
                         ids=lambda C: C.name)
def test_pi_sigma_is_identity(C):
    T = TensorAlgebroid(C)
    for k in C.all_keys():
        x = C.basis(k, 3)
        assert pi(sigma(x, T), T) == x


def test_tensor_path_and_pi(M2):
    T = TensorAlgebroid(M2)
    x, y = M2.basis("e21"), M2.basis("e12")
    e = tensor_path(T, [x, y])
    assert pi(e, T) == y @ x
    assert pi(basic_J_element(T, x, y), T).is_zero()


def test_paths_upto_counts(M2):
    T = TensorAlgebroid(M2)
    # each step has two choices of target object, the last step is forced
    assert [len(T.paths_upto(1, 2, D)) for D in (1, 2, 3)] == [1, 3, 7]


@pytest.mark.parametrize("C,D", [(matrix_pattern(2, ZZ), 3), (product_algebra(2, ZZ), 3),
                                 (polynomial_truncation(ZZ, 3), 3)], ids=lambda v: getattr(v, "name", str(v)))
def test_universal_extension_exact(C, D):
    ext = universal_extension(C)
    pairs = [(a, b) for a in C.objects for b in C.objects if C.hom_keys(a, b)]
    assert ext.certify(pairs, D) == []


def test_ufsplit_square_on_samples(M2):
    ext = universal_extension(M2)
    T = ext.total
    js = sample_J(tower_of(M2), 1, random.Random(3), 40)
    ts = [T.basis(p) for p in T.paths_upto(1, 2, 3)]
    assert ufsplit_square(ext, ts, js) == []


def test_universal_gamma_is_inclusion(M2):
    ext = universal_extension(M2)
    gamma = classifying_map(ext)
    for e in sample_J(tower_of(M2), 1, random.Random(5), 10):
        assert gamma(e) == e


def _diagonal_extension(C):
    S = DirectSum(C)
    p2 = S.projection(2)
    return FSplitExtension(
        name="diagonal",
        total=S,
        quotient=C,
        j=p2,
        s=lambda x: S.pair(x, x),
        in_ideal=lambda e: S.component(e, 2).is_zero(),
    )


def test_multiplicative_splitting_gives_zero_gamma(M2):
    ext = _diagonal_extension(M2)
    gamma = classifying_map(ext)
    for e in sample_J(tower_of(M2), 1, random.Random(7), 30):
        assert gamma(e).is_zero()


def test_corrupted_splitting_is_caught(M2):
    ext = _diagonal_extension(M2)
    S = ext.total
    bad = FSplitExtension("bad", S, M2, ext.j, lambda x: S.pair(x, x.scale(2)), ext.in_ideal)
    fails = bad.check_splitting(M2.hom_basis(1, 2))
    assert fails and fails[0].witness["x"]
    # scaling s off the diagonal pushes γ out of the ideal
    T = TensorAlgebroid(M2)
    e = basic_J_element(T, M2.basis("e21"), M2.basis("e12"))
    bad2 = FSplitExtension("bad2", S, M2, ext.j, lambda x: S.pair(x, x if x.source == x.target else x.scale(2)),
                           ext.in_ideal)
    with pytest.raises(ValueError):
        classifying_map(bad2)(e)


def test_tower_projection_is_idempotent(M2):
    tower = JTower(M2, 2)
    rng = random.Random(11)
    for e in sample_J(tower, 2, rng, 6):
        assert tower.contains(e, 2)
        assert tower.project(tower.project(e, 2), 2) == tower.project(e, 2)
    T1 = tower.T(1)
    x = sigma(M2.basis("e11"), T1)
    assert not tower.contains(x, 1)


@settings(max_examples=60)
@given(st.lists(st.tuples(st.sampled_from(["e11", "e12", "e21", "e22"]), st.integers(-5, 5)), min_size=1, max_size=4))
def test_pi_is_multiplicative_on_paths(terms):
    # chain the chosen keys into a composable path by inserting matrix units
    M2 = matrix_pattern(2, ZZ)
    T = TensorAlgebroid(M2)
    elems = []
    end = M2.basis(terms[0][0]).source
    for k, c in terms:
        x = M2.basis(k, c or 1)
        if x.source != end:
            x = M2.basis(f"e{x.target}{end}", c or 1)
        elems.append(x)
        end = x.target
    e = tensor_path(T, elems)
    expect = elems[0]
    for x in elems[1:]:
        expect = x @ expect
    assert pi(e, T) == expect
