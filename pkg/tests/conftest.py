import pytest
from hypothesis import HealthCheck, settings

from kkalg.core import Homomorphism, identity_hom, matrix_pattern, ring_algebroid
from kkalg.kk import NaturalIsomorphism
from kkalg.rings import ZZ

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def Z():
    return ring_algebroid(ZZ)


@pytest.fixture(scope="session")
def M2():
    return matrix_pattern(2, ZZ)


@pytest.fixture(scope="session")
def swap(M2):
    """The automorphism of the 2×2 pattern exchanging the two objects."""
    images = {f"e{i}{j}": M2.basis(f"e{3 - i}{3 - j}") for i in (1, 2) for j in (1, 2)}
    return Homomorphism(M2, M2, {1: 2, 2: 1}, images, "swap")


@pytest.fixture(scope="session")
def swap_iso(M2, swap):
    g = {1: M2.basis("e21"), 2: M2.basis("e12")}
    g_inv = {1: M2.basis("e12"), 2: M2.basis("e21")}
    return NaturalIsomorphism(identity_hom(M2), swap, g, g_inv)
