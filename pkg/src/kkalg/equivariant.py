"""Groupoid-equivariant algebra: G-algebras, convolution algebroids, descent and Green–Julg.

Groups are one-object groupoids and act on the left: the arrow g∘h is the
product gh, and an algebra action satisfies g(h(x)) = (gh)(x).  G-sets and
G-complexes carry right actions, as in the transport groupoid
Hom(x, y) = {g : xg = y}, whose composite (y, h, z)∘(x, g, y) is (x, gh, z).

Everything here is representative-level bookkeeping.  Each construction comes
with a ``failures`` style check that replays its defining identities exactly
on finite bases or on supplied samples.
"""

from __future__ import annotations

import functools
import itertools
import random
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterable, List, Mapping, Optional, Sequence

from .completion import AdditiveCompletion, DirectSum
from .core import (
    Algebroid,
    Elem,
    EndpointError,
    Failure,
    Homomorphism,
    InfiniteBasisError,
    LazyHomomorphism,
    Space,
    format_key,
    identity_hom,
    product_algebra,
    ring_algebroid,
)
from .kk import (
    HomotopyCertificate,
    KKRepresentative,
    _matrix_part,
    compose_degree0,
    conjugation_iso,
    from_homomorphism,
    sharp,
    tower_of,
    value_space,
    w_homotopy,
)
from .linalg import in_span, nullspace, rank as mat_rank
from .modules import FgpWitness, free_witness, module_smash, pushforward_witness
from .rings import ZZ, BaseRing, poly_ring, scalar_ring
from .simplicial import (
    FiniteSimplicialSet,
    PolyPower,
    SimplicialPower,
    act_on_family,
    equivariant_pushout_failures,
    family_basis,
    family_compatible,
    from_ordered_complex,
    path_extension,
    point,
    pull,
    pushout_extension,
    rehome,
    simplex,
)
from .tensor import (
    FSplitExtension,
    ModuloidMap,
    TensorAlgebroid,
    adjunction_H,
    classifying_map,
    functor_T,
    sample_J,
    sigma,
)


class GroupoidError(ValueError):
    pass


# ---------------------------------------------------------------------------
# finite groupoids and groups


class FiniteGroupoid:
    """Objects, arrows with ends, a composition table, identities and inverses."""

    def __init__(self, name: str, objects: Iterable, arrows: Mapping[Any, tuple], compose: Callable,
                 identity: Mapping, inverse: Callable):
        self.name = name
        self.objects = tuple(objects)
        self.ends = dict(arrows)
        for g, (a, b) in self.ends.items():
            if a not in self.objects or b not in self.objects:
                raise GroupoidError(f"arrow {format_key(g)} has an unknown end")
        self._homs: Dict[tuple, list] = {(a, b): [] for a in self.objects for b in self.objects}
        for g, ends in self.ends.items():
            self._homs[ends].append(g)
        self._table = {}
        for h in self.ends:
            for g in self._homs_into(self.ends[h][0]):
                self._table[(h, g)] = compose(h, g)
        self.ids = dict(identity)
        self._inv = {g: inverse(g) for g in self.ends}

    def _signature(self):
        return (self.name, self.objects, tuple(sorted(self._table.items(), key=repr)))

    def __eq__(self, other):
        return self is other or (isinstance(other, FiniteGroupoid) and self._signature() == other._signature())

    def __hash__(self):
        return hash((self.name, self.objects, len(self.ends)))

    def _homs_into(self, b):
        return [g for a in self.objects for g in self._homs[(a, b)]]

    def __repr__(self):
        return self.name

    @property
    def arrows(self) -> list:
        return list(self.ends)

    def src(self, g):
        return self.ends[g][0]

    def tgt(self, g):
        return self.ends[g][1]

    def hom(self, a, b) -> list:
        return list(self._homs[(a, b)])

    def compose(self, h, g):
        """h∘g for g: a → b and h: b → c."""
        try:
            return self._table[(h, g)]
        except KeyError:
            raise EndpointError(f"{format_key(h)}∘{format_key(g)} is not composable in {self.name}") from None

    def identity(self, a):
        return self.ids[a]

    def inverse(self, g):
        return self._inv[g]

    def composable_pairs(self):
        return list(self._table)

    def check(self) -> list:
        """Closure, associativity, identities and inverses, exhaustively."""
        fails = []
        for (h, g), hg in self._table.items():
            if hg not in self.ends or self.ends[hg] != (self.src(g), self.tgt(h)):
                fails.append(Failure("closure", f"{format_key(h)}∘{format_key(g)} has wrong ends",
                                     {"h": format_key(h), "g": format_key(g)}))
        if fails:
            return fails
        for (h, g), hg in self._table.items():
            for k in self._homs_out(self.tgt(h)):
                if self.compose(k, hg) != self.compose(self.compose(k, h), g):
                    fails.append(Failure("associativity", "(k∘h)∘g ≠ k∘(h∘g)",
                                         {"k": format_key(k), "h": format_key(h), "g": format_key(g)}))
                    return fails
        for a in self.objects:
            e = self.ids.get(a)
            if e is None or self.ends.get(e) != (a, a):
                fails.append(Failure("identity", f"no identity at {format_key(a)}", {"object": format_key(a)}))
                continue
            for g in self._homs_out(a):
                if self.compose(g, e) != g:
                    fails.append(Failure("identity", "g∘1 ≠ g", {"g": format_key(g)}))
            for g in self._homs_into(a):
                if self.compose(e, g) != g:
                    fails.append(Failure("identity", "1∘g ≠ g", {"g": format_key(g)}))
        for g in self.ends:
            gi = self._inv[g]
            if (gi not in self.ends or self.ends[gi] != (self.tgt(g), self.src(g))
                    or self.compose(gi, g) != self.ids[self.src(g)] or self.compose(g, gi) != self.ids[self.tgt(g)]):
                fails.append(Failure("inverse", f"{format_key(g)} has no inverse", {"g": format_key(g)}))
        return fails

    def _homs_out(self, a):
        return [g for b in self.objects for g in self._homs[(a, b)]]

    def components(self) -> List[tuple]:
        seen, out = set(), []
        for a in self.objects:
            if a in seen:
                continue
            comp = tuple(b for b in self.objects if self._homs[(a, b)])
            seen.update(comp)
            out.append(comp)
        return out


class FiniteGroup(FiniteGroupoid):
    """A group as the one-object groupoid with g∘h = gh."""

    def __init__(self, name: str, elements: Sequence, mul: Callable, identity=None):
        self.elements = tuple(elements)
        self._mul = {(g, h): mul(g, h) for g in self.elements for h in self.elements}
        if identity is None:
            identity = next((e for e in self.elements if all(self._mul[(e, g)] == g for g in self.elements)), None)
            if identity is None:
                raise GroupoidError(f"{name} has no identity element")
        self.e = identity
        inv = {}
        for g in self.elements:
            gi = next((h for h in self.elements if self._mul[(g, h)] == identity), None)
            if gi is None:
                raise GroupoidError(f"{format_key(g)} has no inverse in {name}")
            inv[g] = gi
        super().__init__(name, ["*"], {g: ("*", "*") for g in self.elements}, lambda h, g: self._mul[(h, g)],
                         {"*": identity}, lambda g: inv[g])
        self.index = {g: i for i, g in enumerate(self.elements)}

    @property
    def order(self) -> int:
        return len(self.elements)

    def mul(self, g, h):
        return self._mul[(g, h)]

    def inv(self, g):
        return self._inv[g]

    def generators(self) -> list:
        """A small generating set, chosen greedily in element order."""
        gens: list = []
        span = {self.e}
        for g in self.elements:
            if g in span:
                continue
            gens.append(g)
            frontier = list(span)
            while frontier:
                x = frontier.pop()
                for s in gens:
                    y = self.mul(x, s)
                    if y not in span:
                        span.add(y)
                        frontier.append(y)
            if len(span) == self.order:
                break
        return gens

    def is_abelian(self) -> bool:
        return all(self.mul(g, h) == self.mul(h, g) for g in self.elements for h in self.elements)


@functools.lru_cache(maxsize=None)
def cyclic_group(n: int) -> FiniteGroup:
    if n < 1:
        raise ValueError("cyclic group needs n >= 1")
    return FiniteGroup(f"Z/{n}", range(n), lambda g, h: (g + h) % n, 0)


@functools.lru_cache(maxsize=None)
def trivial_group() -> FiniteGroup:
    return FiniteGroup("1", [0], lambda g, h: 0, 0)


@functools.lru_cache(maxsize=None)
def symmetric_group(n: int) -> FiniteGroup:
    """Permutations of 0..n-1 as tuples, with (pq)(i) = p(q(i))."""
    elems = sorted(itertools.permutations(range(n)))
    return FiniteGroup(f"S{n}", elems, lambda p, q: tuple(p[q[i]] for i in range(n)), tuple(range(n)))


def group_from_table(name: str, elements: Sequence, table: Sequence[Sequence]) -> FiniteGroup:
    """A group from its Cayley table; ``table[i][j]`` names the product of elements i and j."""
    elements = list(elements)
    idx = {g: i for i, g in enumerate(elements)}
    if len(table) != len(elements) or any(len(row) != len(elements) for row in table):
        raise GroupoidError("Cayley table has the wrong size")
    for row in table:
        for x in row:
            if x not in idx:
                raise GroupoidError(f"Cayley table entry {x!r} is not an element")
    G = FiniteGroup(name, elements, lambda g, h: table[idx[g]][idx[h]])
    fails = G.check()
    if fails:
        raise GroupoidError(f"{name} is not a group: {fails[0].detail}")
    return G


def codiscrete_groupoid(objects: Sequence, name: str = None) -> FiniteGroupoid:
    """Exactly one arrow (a, b) between any two objects."""
    objs = tuple(objects)
    arrows = {(a, b): (a, b) for a in objs for b in objs}
    return FiniteGroupoid(name or f"pair({len(objs)})", objs, arrows, lambda h, g: (g[0], h[1]),
                          {a: (a, a) for a in objs}, lambda g: (g[1], g[0]))


@dataclass
class Functor:
    source: FiniteGroupoid
    target: FiniteGroupoid
    obj_map: Any
    arr_map: Any
    name: str = "θ"

    def obj(self, a):
        return self.obj_map(a) if callable(self.obj_map) else self.obj_map[a]

    def arr(self, g):
        return self.arr_map(g) if callable(self.arr_map) else self.arr_map[g]

    def check(self) -> list:
        fails = []
        S, T = self.source, self.target
        for g in S.arrows:
            tg = self.arr(g)
            if T.ends.get(tg) != (self.obj(S.src(g)), self.obj(S.tgt(g))):
                fails.append(Failure("functor", f"{self.name}({format_key(g)}) has wrong ends", {"g": format_key(g)}))
        if fails:
            return fails
        for h, g in S.composable_pairs():
            if self.arr(S.compose(h, g)) != T.compose(self.arr(h), self.arr(g)):
                fails.append(Failure("functor", f"{self.name} does not preserve {format_key(h)}∘{format_key(g)}",
                                     {"h": format_key(h), "g": format_key(g)}))
                break
        for a in S.objects:
            if self.arr(S.identity(a)) != T.identity(self.obj(a)):
                fails.append(Failure("functor", f"{self.name} does not preserve 1_{format_key(a)}", {"object": format_key(a)}))
        return fails

    def is_faithful(self) -> bool:
        S = self.source
        for a in S.objects:
            for b in S.objects:
                imgs = [self.arr(g) for g in S.hom(a, b)]
                if len(set(imgs)) != len(imgs):
                    return False
        return True


def compose_functors(psi: Functor, theta: Functor, name: str = None) -> Functor:
    """ψ∘θ."""
    return Functor(theta.source, psi.target, lambda a: psi.obj(theta.obj(a)), lambda g: psi.arr(theta.arr(g)),
                   name or f"{psi.name}∘{theta.name}")


def identity_functor(G: FiniteGroupoid) -> Functor:
    return Functor(G, G, lambda a: a, lambda g: g, "id")


# ---------------------------------------------------------------------------
# G-sets and transport groupoids


class GSet:
    """A finite right G-set, x ↦ xg."""

    def __init__(self, group: FiniteGroup, points: Sequence, act, name: str = "X"):
        self.group = group
        self.points = tuple(points)
        self.name = name
        if callable(act):
            self._act = {(x, g): act(x, g) for x in self.points for g in group.elements}
        else:
            self._act = dict(act)
        fails = self.check()
        if fails:
            raise GroupoidError(f"invalid action table for {name}: {fails[0].detail}")

    def act(self, x, g):
        return self._act[(x, g)]

    def check(self) -> list:
        G = self.group
        fails = []
        for x in self.points:
            for g in G.elements:
                if self._act.get((x, g)) not in self.points:
                    fails.append(Failure("G-set", f"x·g undefined for x = {format_key(x)}, g = {format_key(g)}",
                                         {"x": format_key(x), "g": format_key(g)}))
                    return fails
        for x in self.points:
            if self.act(x, G.e) != x:
                fails.append(Failure("G-set", "x·e ≠ x", {"x": format_key(x)}))
            for g in G.elements:
                for h in G.elements:
                    if self.act(self.act(x, g), h) != self.act(x, G.mul(g, h)):
                        fails.append(Failure("G-set", "(xg)h ≠ x(gh)",
                                             {"x": format_key(x), "g": format_key(g), "h": format_key(h)}))
                        return fails
        return fails

    def orbits(self) -> List[tuple]:
        seen, out = set(), []
        for x in self.points:
            if x in seen:
                continue
            orb = tuple(y for y in self.points if any(self.act(x, g) == y for g in self.group.elements))
            seen.update(orb)
            out.append(orb)
        return out

    def representatives(self) -> list:
        return [o[0] for o in self.orbits()]

    def stabilizer(self, x) -> list:
        return [g for g in self.group.elements if self.act(x, g) == x]


def regular_gset(G: FiniteGroup) -> GSet:
    return GSet(G, G.elements, lambda x, g: G.mul(x, g), f"{G.name}")


def point_gset(G: FiniteGroup) -> GSet:
    return GSet(G, ["*"], lambda x, g: "*", "pt")


def trivial_gset(G: FiniteGroup, points: Sequence) -> GSet:
    return GSet(G, points, lambda x, g: x, "fixed")


def coset_gset(G: FiniteGroup, H: Sequence) -> GSet:
    """H\\G with the right action Hx·g = H(xg); cosets are sorted element tuples."""
    H = list(H)
    if G.e not in H or any(G.mul(a, b) not in H for a in H for b in H):
        raise GroupoidError("H is not a subgroup")

    def coset(x):
        return tuple(sorted({G.mul(h, x) for h in H}, key=G.index.get))

    pts = sorted({coset(x) for x in G.elements}, key=lambda c: G.index[c[0]])
    return GSet(G, pts, lambda c, g: coset(G.mul(c[0], g)), f"{G.name}/H")


class TransportGroupoid(FiniteGroupoid):
    """X̄: Hom(x, y) = {g : xg = y}, with the faithful functor i(x, g, y) = g⁻¹ into G."""

    def __init__(self, X: GSet):
        G = X.group
        self.gset = X
        self.group = G
        arrows = {(x, g, X.act(x, g)): (x, X.act(x, g)) for x in X.points for g in G.elements}
        super().__init__(f"{X.name}̄", X.points, arrows, lambda h, g: (g[0], G.mul(g[1], h[1]), h[2]),
                         {x: (x, G.e, x) for x in X.points}, lambda g: (g[2], G.inv(g[1]), g[0]))
        # composites (y,h,z)∘(x,g,y) = (x,gh,z) reverse the order, so i inverts
        self.inclusion = Functor(self, G, lambda x: "*", lambda g: G.inv(g[1]), "i")


def transport(X: GSet) -> TransportGroupoid:
    return TransportGroupoid(X)


def transport_functor(f: Mapping, Xbar: TransportGroupoid, Ybar: TransportGroupoid) -> Functor:
    """f_*: X̄ → Ȳ for an equivariant map f: X → Y."""
    X, Y = Xbar.gset, Ybar.gset
    for x in X.points:
        for g in X.group.elements:
            if f[X.act(x, g)] != Y.act(f[x], g):
                raise GroupoidError(f"map is not equivariant at {format_key(x)}")
    return Functor(Xbar, Ybar, lambda x: f[x], lambda a: (f[a[0]], a[1], f[a[2]]), "f_*")


# ---------------------------------------------------------------------------
# G-algebras


class GAlgebra:
    """A functor from a groupoid to one-object algebras (object ``"*"``)."""

    def __init__(self, groupoid: FiniteGroupoid, algebras: Mapping, actions: Mapping, name: str = "A"):
        self.groupoid = groupoid
        self.algebras = dict(algebras)
        self.actions = dict(actions)
        self.name = name
        for a in groupoid.objects:
            if a not in self.algebras:
                raise GroupoidError(f"{name} has no algebra at {format_key(a)}")
        for g in groupoid.arrows:
            if g not in self.actions:
                raise GroupoidError(f"{name} has no action for {format_key(g)}")
        self.base = next(iter(self.algebras.values())).base
        self._cache: Dict = {}

    def __repr__(self):
        return self.name

    def algebra(self, a) -> Space:
        return self.algebras[a]

    def act(self, g, x: Elem) -> Elem:
        return self.actions[g](x)

    def is_finite(self) -> bool:
        try:
            for A in self.algebras.values():
                A.all_keys()
        except InfiniteBasisError:
            return False
        return True

    def check(self, limit: int = 5) -> list:
        """Each g is an algebra map A(a) → A(b), identities act trivially, (h∘g)(x) = h(g(x))."""
        G = self.groupoid
        fails = []
        for g in G.arrows:
            hom = self.actions[g]
            if getattr(hom, "source", None) != self.algebras[G.src(g)] or getattr(hom, "target", None) != self.algebras[G.tgt(g)]:
                fails.append(Failure("G-algebra", f"action of {format_key(g)} has the wrong algebras", {"g": format_key(g)}))
                continue
            if isinstance(hom, Homomorphism):
                for f in hom.check(limit):
                    fails.append(Failure(f.check, f"action of {format_key(g)}: {f.detail}", dict(f.witness, g=format_key(g))))
                if not hom.is_unital():
                    fails.append(Failure("G-algebra", f"action of {format_key(g)} is not unital", {"g": format_key(g)}))
        if fails:
            return fails[:limit]
        for a in G.objects:
            A = self.algebras[a]
            for k in A.all_keys():
                x = A.basis(k)
                if self.act(G.identity(a), x) != x:
                    fails.append(Failure("G-algebra", f"1_{format_key(a)} moves {x}", {"object": format_key(a), "x": str(x)}))
        for h, g in G.composable_pairs():
            A = self.algebras[G.src(g)]
            hg = G.compose(h, g)
            for k in A.all_keys():
                x = A.basis(k)
                if self.act(hg, x) != self.act(h, self.act(g, x)):
                    fails.append(Failure("G-algebra", "(h∘g)(x) ≠ h(g(x))",
                                         {"h": format_key(h), "g": format_key(g), "x": str(x)}))
                    if len(fails) >= limit:
                        return fails
        return fails[:limit]


def _action_hom(A: Algebroid, B: Algebroid, images: Mapping, name: str) -> Homomorphism:
    return Homomorphism(A, B, {"*": "*"}, images, name)


def trivial_galgebra(G: FiniteGroupoid, A: Algebroid, name: str = None) -> GAlgebra:
    one = identity_hom(A)
    return GAlgebra(G, {a: A for a in G.objects}, {g: one for g in G.arrows}, name or A.name)


def permutation_galgebra(G: FiniteGroup, n: int, perm_of: Callable, base: BaseRing = ZZ, name: str = None) -> GAlgebra:
    """R^n (orthogonal idempotents e1..en) with g(e_i) = e_{p_g(i)}; p must be a left action."""
    A = product_algebra(n, base)
    acts = {}
    for g in G.elements:
        p = perm_of(g)
        acts[g] = _action_hom(A, A, {f"e{i + 1}": A.basis(f"e{p[i] + 1}") for i in range(n)}, f"{format_key(g)}·")
    return GAlgebra(G, {"*": A}, acts, name or f"{A.name}[{G.name}]")


def swap_galgebra(G: FiniteGroup, base: BaseRing = ZZ) -> GAlgebra:
    """R² where an element acts by the swap exactly when it lies outside the kernel of a sign map.

    The sign is the parity of left multiplication on G, a homomorphism to Z/2.
    Z/2 swaps, Z/3 acts trivially and S₃ acts through the usual sign.
    """
    def sign(g):
        perm = [G.index[G.mul(g, x)] for x in G.elements]
        seen, parity = set(), 0
        for i in range(len(perm)):
            if i in seen:
                continue
            j, length = i, 0
            while j not in seen:
                seen.add(j)
                j = perm[j]
                length += 1
            parity ^= (length - 1) & 1
        return parity

    return permutation_galgebra(G, 2, lambda g: (1, 0) if sign(g) else (0, 1), base, f"{base}²[{G.name}]")


def function_galgebra(X: GSet, base: BaseRing = ZZ) -> GAlgebra:
    """R^X with (g·φ)(x) = φ(xg); on the basis g(δ_y) = δ_{yg⁻¹}."""
    G = X.group
    if len(X.points) == 1:
        return trivial_galgebra(G, ring_algebroid(base), str(base))
    keys = [("δ", x) for x in X.points]
    A = Algebroid(f"{base}^{X.name}", base, ["*"], {k: ("*", "*") for k in keys}, {(k, k): {k: 1} for k in keys},
                  {"*": {k: 1 for k in keys}})
    acts = {g: _action_hom(A, A, {("δ", y): A.basis(("δ", X.act(y, G.inv(g)))) for y in X.points}, f"{format_key(g)}·")
            for g in G.elements}
    return GAlgebra(G, {"*": A}, acts, A.name)


def restrict_galgebra(A: GAlgebra, theta: Functor, name: str = None) -> GAlgebra:
    """θ*A: (θ*A)(a) = A(θa) and (θ*A)(g) = A(θg)."""
    if theta.target != A.groupoid:
        raise GroupoidError("functor does not land in the groupoid of the G-algebra")
    return GAlgebra(theta.source, {a: A.algebras[theta.obj(a)] for a in theta.source.objects},
                    {g: A.actions[theta.arr(g)] for g in theta.source.arrows}, name or f"{theta.name}*{A.name}")


# ---------------------------------------------------------------------------
# convolution algebroids


class ConvolutionSpace(Space):
    """A𝒢: keys (x, g) with x a basis key of A(b) and g: a → b; (xg)(yh) = x·g(y) (g∘h)."""

    def __init__(self, A: GAlgebra, name: str = None):
        self.A = A
        self.G = A.groupoid
        self.base = A.base
        self.name = name or f"{A.name}{A.groupoid.name}"
        self.inner_vars = frozenset()
        self._sig = ("conv", id(A))
        self._cache: Dict = {}

    @property
    def objects(self):
        return self.G.objects

    def has_object(self, a):
        return a in self.G.objects

    def key_ends(self, key):
        x, g = key
        a, b = self.G.ends[g]
        self.A.algebras[b].key_ends(x)
        return a, b

    def compose_keys(self, ky, kx):
        x, g = ky
        y, h = kx
        got = self._cache.get((ky, kx))
        if got is None:
            gh = self.G.compose(g, h)
            B = self.A.algebras[self.G.tgt(g)]
            Ay = self.A.algebras[self.G.tgt(h)]
            prod = B.basis(x) @ self.A.act(g, Ay.basis(y))
            got = {(z, gh): c for z, c in prod.coeffs.items()}
            if len(self._cache) < 500000:
                self._cache[(ky, kx)] = got
        return got

    def unit_coeffs(self, a):
        u = self.A.algebras[a].unit_coeffs("*")
        if u is None:
            return None
        e = self.G.identity(a)
        return {(k, e): c for k, c in u.items()}

    def hom_keys(self, a, b):
        keys = self.A.algebras[b].hom_keys("*", "*")
        return [(k, g) for g in self.G.hom(a, b) for k in keys]

    def render_key(self, key):
        return f"{self.A.algebras[self.G.tgt(key[1])].render_key(key[0])}·{format_key(key[1])}"

    def element(self, x: Elem, g) -> Elem:
        """x·g for x ∈ A(tgt g)."""
        a, b = self.G.ends[g]
        return Elem._raw(self, a, b, {(k, g): c for k, c in x.coeffs.items()})


def convolution(A: GAlgebra, name: str = None):
    """A𝒢 as an explicit algebroid when every A(a) has finite rank, else lazily."""
    got = A._cache.get("conv")
    if got is not None:
        return got
    S = ConvolutionSpace(A, name)
    out = Algebroid.materialize(S, S.name) if A.is_finite() else S
    out.galgebra = A
    A._cache["conv"] = out
    return out


def conv_element(AG, x: Elem, g) -> Elem:
    A = AG.galgebra
    a, b = A.groupoid.ends[g]
    return Elem(AG, a, b, {(k, g): c for k, c in x.coeffs.items()})


def convolution_hom(A: GAlgebra, B: GAlgebra, theta: Functor, maps: Mapping = None, name: str = None) -> Homomorphism:
    """(x, g) ↦ (φ_b(x), θ(g)) for a functor θ and equivariant algebra maps φ_a: A(a) → B(θa)."""
    AG, BH = convolution(A), convolution(B)
    images = {}
    for (k, g) in AG.all_keys():
        b = A.groupoid.tgt(g)
        x = A.algebras[b].basis(k)
        y = maps[b](x) if maps is not None else x
        tg = theta.arr(g)
        images[(k, g)] = Elem(BH, theta.obj(A.groupoid.src(g)), theta.obj(b),
                              {(kk, tg): c for kk, c in y.coeffs.items()})
    return Homomorphism(AG, BH, theta.obj, images, name or f"{theta.name}_*")


# ---------------------------------------------------------------------------
# equivariant T and J


def tower_action(A: GAlgebra, g, level: int):
    """T^level(g): T^level A(a) → T^level A(b)."""
    key = ("tower", g, level)
    got = A._cache.get(key)
    if got is not None:
        return got
    if level == 0:
        got = A.actions[g]
    else:
        G = A.groupoid
        prev = tower_action(A, g, level - 1)
        got = functor_T(prev, tower_of(A.algebras[G.src(g)]).T(level), tower_of(A.algebras[G.tgt(g)]).T(level),
                        f"T^{level}({format_key(g)})")
    A._cache[key] = got
    return got


def tower_galgebra(A: GAlgebra, level: int) -> GAlgebra:
    """T^level A with the functorially induced actions (lazy)."""
    key = ("tower-galg", level)
    got = A._cache.get(key)
    if got is None:
        G = A.groupoid
        got = GAlgebra(G, {a: tower_of(A.algebras[a]).T(level) for a in G.objects},
                       {g: tower_action(A, g, level) for g in G.arrows}, f"T^{level}{A.name}")
        A._cache[key] = got
    return got


@dataclass
class EquivariantTower:
    """Objectwise J-towers of a G-algebra with the induced arrow actions."""

    A: GAlgebra
    depth: int = 2

    def level(self, k: int) -> GAlgebra:
        return tower_galgebra(self.A, k)

    def samples(self, a, k: int, rng: random.Random, count: int) -> list:
        return sample_J(tower_of(self.A.algebras[a]), k, rng, count)

    def check(self, rng: random.Random, count: int = 10) -> list:
        """Actions preserve J^k, commute with the projections and compose functorially, on samples."""
        G = self.A.groupoid
        fails = []
        for k in range(1, self.depth + 1):
            L = self.level(k)
            for g in G.arrows:
                a, b = G.ends[g]
                tw_b = tower_of(self.A.algebras[b])
                for x in self.samples(a, k, rng, count):
                    gx = L.act(g, x)
                    if not tw_b.contains(gx, k):
                        fails.append(Failure("equivariant J", f"T^{k}({format_key(g)}) leaves J^{k}", {"g": format_key(g), "x": str(x)}))
                        return fails
                    if L.act(G.inverse(g), gx) != x:
                        fails.append(Failure("equivariant J", "g⁻¹(g(x)) ≠ x", {"g": format_key(g), "x": str(x)}))
                        return fails
                    if tw_b.project(L.act(g, x + x), k) != tw_b.project(gx, k).scale(2):
                        fails.append(Failure("equivariant J", "action is not additive", {"g": format_key(g)}))
                        return fails
        return fails


def equivariant_J(A: GAlgebra, depth: int = 2) -> EquivariantTower:
    if depth > 2:
        raise ValueError("equivariant towers are supported to depth 2")
    return EquivariantTower(A, depth)


@dataclass
class EquivariantExtension:
    """An F-split extension with actions of a group on the total space and the quotient."""

    ext: FSplitExtension
    group: FiniteGroup
    act_total: Callable   # (g, e) -> g·e
    act_quotient: Callable

    def quotient_action_hom(self, g) -> LazyHomomorphism:
        Q = self.ext.quotient
        return LazyHomomorphism(Q, Q, lambda x: self.act_quotient(g, x), lambda a: a, f"{format_key(g)}·")

    def failures(self, quotient_samples: Sequence[Elem], total_samples: Sequence[Elem], j_samples: Sequence[Elem]) -> list:
        """The splitting and j are G-maps, and g∘γ = γ∘T(g) on J samples."""
        fails = []
        ext = self.ext
        gamma = classifying_map(ext, check=False)
        TQ = TensorAlgebroid(ext.quotient)
        for g in self.group.elements:
            for q in quotient_samples:
                if ext.s(self.act_quotient(g, q)) != self.act_total(g, ext.s(q)):
                    fails.append(Failure("equivariant splitting", f"s is not a {format_key(g)}-map", {"g": format_key(g), "x": str(q)}))
                    return fails
            for e in total_samples:
                if ext.j(self.act_total(g, e)) != self.act_quotient(g, ext.j(e)):
                    fails.append(Failure("equivariance", f"j is not a {format_key(g)}-map", {"g": format_key(g), "x": str(e)}))
                    return fails
            Tg = functor_T(self.quotient_action_hom(g), TQ, TQ)
            for x in j_samples:
                lhs = gamma(Tg(x))
                rhs = self.act_total(g, gamma(x))
                if lhs != rhs:
                    fails.append(Failure("equivariant γ", "γ(T(g)x) ≠ g·γ(x)", {"g": format_key(g), "x": str(x)}))
                    return fails
                if not ext.in_ideal(lhs):
                    fails.append(Failure("equivariant γ", "γ leaves the ideal", {"x": str(x)}))
                    return fails
        return fails


def equivariant_path_extension(A: GAlgebra, var: str = "t") -> EquivariantExtension:
    """0 → ΩA → A^{Δ¹} → A⊕A → 0 with G acting on values; s(x, y) = (1−t)x + ty is a G-map."""
    G = A.groupoid
    if not isinstance(G, FiniteGroup):
        raise GroupoidError("equivariant path extensions are built over groups")
    C = A.algebras["*"]
    ext = path_extension(C, var)
    P, Q = ext.total, ext.quotient

    def act_total(g, e):
        return P.wrap(A.act(g, P.underlying(e)))

    def act_quotient(g, q):
        return Q.pair(A.act(g, Q.component(q, 1)), A.act(g, Q.component(q, 2)))

    return EquivariantExtension(ext, G, act_total, act_quotient)


def equivariant_split_extension(A: GAlgebra) -> EquivariantExtension:
    """0 → A → A⊕A → A → 0 split by the first inclusion, a multiplicative G-map."""
    G = A.groupoid
    C = A.algebras["*"]
    S = DirectSum(C)
    inc, proj = S.inclusion(1), S.projection(1)
    ext = FSplitExtension(f"split extension of {C.name}", S, C, proj, inc,
                          lambda e: S.component(e, 1).is_zero(), f"0⊕{C.name}")

    def act_total(g, e):
        return S.pair(A.act(g, S.component(e, 1)), A.act(g, S.component(e, 2)))

    return EquivariantExtension(ext, G, act_total, lambda g, x: A.act(g, x))


# ---------------------------------------------------------------------------
# equivariant representatives


def act_value(B: GAlgebra, g, v: Elem, coords: tuple = ()) -> Elem:
    """g acting entrywise on a value in B(a)⊕ (or its sphere power)."""
    G = B.groupoid
    Bb = B.algebras[G.tgt(g)]
    Ba = B.algebras[G.src(g)]
    m = _matrix_part(v)
    coeffs: Dict = {}
    for (s, t, i, j, k), c in m.coeffs.items():
        for kk, d in B.act(g, Ba.basis(k)).coeffs.items():
            key = (s, t, i, j, kk)
            coeffs[key] = coeffs.get(key, 0) + c * d
    coeffs = {k: c for k, c in coeffs.items() if c}
    return rehome(Elem._raw(AdditiveCompletion(Bb), m.source, m.target, coeffs), value_space(Bb, coords))


@dataclass
class EquivariantRep:
    """Objectwise representatives α_a: J^p A(a) → B(a)⊕^{S^n} intertwining the actions."""

    source: GAlgebra
    target: GAlgebra
    reps: Dict
    name: str = "α"

    def __post_init__(self):
        G = self.source.groupoid
        if self.target.groupoid != G:
            raise GroupoidError("source and target must live over the same groupoid")
        shapes = {(r.depth, r.coords) for r in self.reps.values()}
        if len(shapes) != 1:
            raise ValueError("objectwise representatives must share one shape")
        for a in G.objects:
            r = self.reps[a]
            if r.source != self.source.algebras[a] or r.target != self.target.algebras[a]:
                raise EndpointError(f"representative at {format_key(a)} has the wrong algebras")

    @property
    def groupoid(self):
        return self.source.groupoid

    @property
    def depth(self) -> int:
        return next(iter(self.reps.values())).depth

    @property
    def coords(self) -> tuple:
        return next(iter(self.reps.values())).coords

    def size(self, a) -> int:
        return len(self.reps[a].obj("*"))

    def failures(self, samples: Mapping = None, limit: int = 5) -> list:
        """α_b(g·x) = g·α_a(x), on all basis elements (depth 0) or on the given samples."""
        G = self.groupoid
        fails = []
        for g in G.arrows:
            a, b = G.ends[g]
            if self.size(a) != self.size(b):
                fails.append(Failure("equivariance", "matrix sizes differ along an arrow", {"g": format_key(g)}))
                continue
            if self.depth == 0:
                xs = self.source.algebras[a].hom_basis("*", "*")
            else:
                xs = list((samples or {}).get(a, []))
            Tg = tower_action(self.source, g, self.depth)
            for x in xs:
                lhs = self.reps[b](Tg(x))
                rhs = act_value(self.target, g, self.reps[a](x), self.coords)
                if lhs != rhs:
                    fails.append(Failure("equivariance", f"α(g·x) ≠ g·α(x) for g = {format_key(g)}",
                                         {"g": format_key(g), "x": str(x), "lhs": str(lhs), "rhs": str(rhs)}))
                    if len(fails) >= limit:
                        return fails
        return fails


def equivariant_rep(source: GAlgebra, target: GAlgebra, reps: Mapping, name: str = "α") -> EquivariantRep:
    return EquivariantRep(source, target, dict(reps), name)


def equivariant_from_homs(source: GAlgebra, target: GAlgebra, homs: Mapping, name: str = "α") -> EquivariantRep:
    return EquivariantRep(source, target, {a: from_homomorphism(f, name) for a, f in homs.items()}, name)


def unit_rep(A: GAlgebra, name: str = "1") -> EquivariantRep:
    """R → A, 1 ↦ 1 at every object (R with the trivial action)."""
    G = A.groupoid
    R = trivial_galgebra(G, ring_algebroid(A.base), str(A.base))
    homs = {a: Homomorphism(R.algebras[a], A.algebras[a], {"*": "*"}, {"1": A.algebras[a].identity("*")}, name)
            for a in G.objects}
    return equivariant_from_homs(R, A, homs, name)


def equivariant_sharp(alpha: EquivariantRep, beta: EquivariantRep) -> EquivariantRep:
    """Objectwise α♯β."""
    if alpha.target is not beta.source:
        raise EndpointError("α♯β needs the target of α to be the source of β")
    reps = {a: sharp(alpha.reps[a], beta.reps[a]) for a in alpha.groupoid.objects}
    return EquivariantRep(alpha.source, beta.target, reps, f"{alpha.name}♯{beta.name}")


def restriction(theta: Functor, alpha: EquivariantRep) -> EquivariantRep:
    """θ*α over the source groupoid of θ."""
    src = restrict_galgebra(alpha.source, theta)
    tgt = restrict_galgebra(alpha.target, theta)
    reps = {a: alpha.reps[theta.obj(a)] for a in theta.source.objects}
    return EquivariantRep(src, tgt, reps, f"{theta.name}*{alpha.name}")


def _same_value(u: Elem, v: Elem) -> bool:
    return (u.source, u.target) == (v.source, v.target) and u.coeffs == v.coeffs


def restriction_product_failures(theta: Functor, alpha: EquivariantRep, beta: EquivariantRep) -> list:
    """θ*(α♯β) = θ*α ♯ θ*β elementwise on the basis of every object."""
    left = restriction(theta, equivariant_sharp(alpha, beta))
    ra, rb = restriction(theta, alpha), restriction(theta, beta)
    right = {a: sharp(ra.reps[a], rb.reps[a]) for a in theta.source.objects}
    fails = []
    for a in theta.source.objects:
        for x in _test_elements(left.source.algebras[a], left.depth):
            if not _same_value(left.reps[a](x), right[a](x)):
                fails.append(Failure("restriction product", "θ*(α♯β) ≠ θ*α♯θ*β", {"object": format_key(a), "x": str(x)}))
                return fails
    return fails


def _test_elements(A: Space, depth: int, count: int = 6, seed: int = 0) -> list:
    if depth == 0:
        return A.hom_basis("*", "*")
    return sample_J(tower_of(A), depth, random.Random(seed), count)


@dataclass
class ReconstructionWitness:
    """θ: 𝒢 → 𝓗 and φ: 𝓗 → 𝒢 with H_b: b → θφ(b) natural; α = H⁻¹·(φ*θ*α)(H·x)."""

    alpha: EquivariantRep
    theta: Functor
    phi: Functor
    H: Dict

    def reconstruct(self) -> EquivariantRep:
        alpha = self.alpha
        tp = compose_functors(self.theta, self.phi, "θφ")
        pulled = restriction(tp, alpha)   # over 𝓗: (φ*θ*α)_b = α_{θφ(b)}
        A, B = alpha.source, alpha.target
        reps = {}
        for b in alpha.groupoid.objects:
            h = self.H[b]
            hi = alpha.groupoid.inverse(h)
            inner = pulled.reps[b]
            Th = tower_action(A, h, alpha.depth)
            r = alpha.reps[b]

            def fn(x, inner=inner, Th=Th, hi=hi):
                return act_value(B, hi, inner(Th(x)), alpha.coords)

            reps[b] = KKRepresentative(r.source, r.target, r.depth, r.coords, fn, inner.obj, f"rec({alpha.name})")
        return EquivariantRep(A, B, reps, f"rec({alpha.name})")

    def failures(self) -> list:
        fails = []
        Hg = self.alpha.groupoid
        for f in self.theta.check() + self.phi.check():
            fails.append(f)
        tp = compose_functors(self.theta, self.phi)
        for b in Hg.objects:
            h = self.H.get(b)
            if h is None or Hg.ends.get(h) != (b, tp.obj(b)):
                fails.append(Failure("equivalence", f"H_{format_key(b)} is not an arrow b → θφ(b)", {"object": format_key(b)}))
        if fails:
            return fails
        for g in Hg.arrows:
            a, b = Hg.ends[g]
            if Hg.compose(self.H[b], g) != Hg.compose(tp.arr(g), self.H[a]):
                fails.append(Failure("equivalence", "H is not natural", {"g": format_key(g)}))
                return fails
        rec = self.reconstruct()
        for b in Hg.objects:
            for x in _test_elements(self.alpha.source.algebras[b], self.alpha.depth):
                if not _same_value(rec.reps[b](x), self.alpha.reps[b](x)):
                    fails.append(Failure("reconstruction", "α ≠ H⁻¹(φ*θ*α)(H·)", {"object": format_key(b), "x": str(x)}))
                    return fails
        return fails


def restriction_inverse_witness(alpha: EquivariantRep, theta: Functor, phi: Functor, H: Mapping) -> ReconstructionWitness:
    w = ReconstructionWitness(alpha, theta, phi, dict(H))
    fails = w.failures()
    if fails and fails[0].check == "equivalence":
        raise GroupoidError(f"θ is not an equivalence with the given data: {fails[0].detail}")
    return w


# ---------------------------------------------------------------------------
# descent


def _regroup(m: Elem, g, a, b, comp: AdditiveCompletion, coeffs: Dict) -> None:
    """Accumulate the entries of m ∈ B(b)⊕ tagged with g into matrix keys of (B𝒢)⊕."""
    s = (a,) * len(m.source)
    t = (b,) * len(m.target)
    for (_, _, i, j, k), c in m.coeffs.items():
        key = (s, t, i, j, (k, g))
        coeffs[key] = coeffs.get(key, 0) + c


def _gamma_maps(A: GAlgebra, p: int) -> list:
    """γ_l: T^l(A𝒢) → (T^l A)𝒢 for l ≤ p (γ_0 is the identity on A𝒢)."""
    key = ("gamma", p)
    got = A._cache.get(key)
    if got is not None:
        return got
    AG = convolution(A)
    tw = tower_of(AG)
    G = A.groupoid
    maps = [(lambda e: e, AG)]
    for level in range(1, p + 1):
        prev, _ = maps[-1]
        TA = tower_galgebra(A, level)
        CS = ConvolutionSpace(TA)

        def on_atom(x: Elem, prev=prev, TA=TA, CS=CS) -> Elem:
            y = prev(x)
            coeffs = {}
            for (k, g), c in y.coeffs.items():
                T = TA.algebras[G.tgt(g)]
                for path, d in sigma(Elem._raw(T.C, "*", "*", {k: c}), T).coeffs.items():
                    coeffs[(path, g)] = coeffs.get((path, g), 0) + d
            return Elem._raw(CS, y.source, y.target, {k: c for k, c in coeffs.items() if c})

        beta = ModuloidMap(tw.T(level - 1), CS, on_atom, lambda a: a)
        maps.append((adjunction_H(beta, tw.T(level), CS, f"γ{level}"), CS))
    A._cache[key] = maps
    return maps


def descent(alpha: EquivariantRep) -> KKRepresentative:
    """D(α): J^p(A𝒢) → (B𝒢)⊕^{S^n}, D(α)(Σ x_i g_i) = Σ α(x_i)g_i regrouped, after γ^p."""
    A, B = alpha.source, alpha.target
    G = alpha.groupoid
    p, coords = alpha.depth, alpha.coords
    if p > 2:
        raise ValueError("descent is supported for J-depth at most 2")
    AG, BG = convolution(A), convolution(B)
    comp = AdditiveCompletion(BG)
    cod = value_space(BG, coords)
    for g in G.arrows:
        if alpha.size(G.src(g)) != alpha.size(G.tgt(g)):
            raise EndpointError("α changes matrix size along an arrow; it cannot be equivariant")

    def obj(a):
        return (a,) * alpha.size(a)

    gamma, _ = _gamma_maps(A, p)[p]

    def fn(e: Elem) -> Elem:
        y = gamma(e)
        groups: Dict = {}
        for (k, g), c in y.coeffs.items():
            groups.setdefault(g, {})[k] = c
        coeffs: Dict = {}
        for g, terms in groups.items():
            a, b = G.ends[g]
            T = tower_of(A.algebras[b]).T(p)
            v = alpha.reps[b].map(Elem._raw(T, "*", "*", terms))
            _regroup(_matrix_part(v), g, a, b, comp, coeffs)
        coeffs = {k: c for k, c in coeffs.items() if c}
        return rehome(Elem._raw(comp, obj(e.source), obj(e.target), coeffs), cod)

    name = f"D({alpha.name})"
    if p == 0 and not coords:
        images = {k: fn(AG.basis(k)) for k in AG.all_keys()}
        return from_homomorphism(Homomorphism(AG, comp, obj, images, name))
    return KKRepresentative(AG, BG, p, coords, fn, obj, name)


def descent_square_failures(alpha: EquivariantRep, beta: EquivariantRep, samples: Sequence[Elem] = None) -> list:
    """D(α♯β) = D(α)♯D(β) on the basis of A𝒢 (or on J samples at positive depth)."""
    left = descent(equivariant_sharp(alpha, beta))
    right = sharp(descent(alpha), descent(beta))
    if samples is None:
        if left.depth:
            samples = sample_J(tower_of(left.source), left.depth, random.Random(0), 8)
        else:
            samples = left.source.hom_basis_all() if hasattr(left.source, "hom_basis_all") else \
                [left.source.basis(k) for k in left.source.all_keys()]
    fails = []
    for x in samples:
        if not _same_value(left(x), right(x)):
            fails.append(Failure("descent square", "D(α♯β) ≠ D(α)♯D(β)", {"x": str(x), "lhs": str(left(x)), "rhs": str(right(x))}))
            break
    return fails


def untag(v: Elem, B: Space) -> Elem:
    """Forget the (only) group label of a value in (B{e})⊕, landing in B⊕ (trivial group)."""
    m = _matrix_part(v)
    comp = AdditiveCompletion(B)
    coeffs = {("*",) * 0 + (s_to_star(s), s_to_star(t), i, j, k[0]): c for (s, t, i, j, k), c in m.coeffs.items()}
    return Elem._raw(comp, s_to_star(m.source), s_to_star(m.target), coeffs)


def s_to_star(s: tuple) -> tuple:
    return ("*",) * len(s)


def trivial_descent_failures(alpha: EquivariantRep) -> list:
    """Over the trivial group, D(α)(x·e) = α(x) after forgetting the label."""
    G = alpha.groupoid
    if len(G.arrows) != 1:
        raise GroupoidError("trivial descent needs the trivial group")
    (e,) = G.arrows
    D = descent(alpha)
    AG = D.source
    fails = []
    for k in alpha.source.algebras["*"].all_keys():
        x = alpha.source.algebras["*"].basis(k)
        lhs = untag(D(AG.basis((k, e))), alpha.target.algebras["*"])
        rhs = _matrix_part(alpha.reps["*"](x))
        if not _same_value(lhs, rhs):
            fails.append(Failure("trivial descent", "D(α) ≠ α", {"x": str(x), "lhs": str(lhs), "rhs": str(rhs)}))
    return fails


# ---------------------------------------------------------------------------
# matrix algebras and κ


class MatrixAlgebra(Space):
    """A⊗M_n(R) for a one-object algebra A: keys (k, i, j), (x⊗E_ij)(y⊗E_jl) = xy⊗E_il."""

    def __init__(self, A: Space, n: int, name: str = None):
        self.A = A
        self.n = n
        self.base = A.base
        self.name = name or f"M{n}({A.name})"
        self.inner_vars = A.inner_vars
        self._sig = (A, n)
        self._keys = [(k, i, j) for k in A.hom_keys("*", "*") for i in range(n) for j in range(n)]

    @property
    def objects(self):
        return ("*",)

    def has_object(self, a):
        return a == "*"

    def key_ends(self, key):
        k, i, j = key
        if not (0 <= i < self.n and 0 <= j < self.n):
            raise KeyError(key)
        self.A.key_ends(k)
        return "*", "*"

    def compose_keys(self, ky, kx):
        k1, i, j = ky
        k2, j2, l = kx
        if j != j2:
            return {}
        return {(z, i, l): c for z, c in self.A.compose_keys(k1, k2).items()}

    def unit_coeffs(self, a):
        u = self.A.unit_coeffs("*")
        if u is None:
            return None
        return {(k, i, i): c for k, c in u.items() for i in range(self.n)}

    def hom_keys(self, a, b):
        return list(self._keys)

    def render_key(self, key):
        return f"{self.A.render_key(key[0])}⊗E{key[1]}{key[2]}"

    def place(self, x: Elem, i: int, j: int) -> Elem:
        return Elem._raw(self, "*", "*", {(k, i, j): c for k, c in x.coeffs.items()})

    def entry(self, m: Elem, i: int, j: int) -> Elem:
        return Elem._raw(self.A, "*", "*", {k: c for (k, a, b), c in m.coeffs.items() if (a, b) == (i, j)})

    def tensor_identity(self, x: Elem) -> Elem:
        """x⊗1."""
        out = {}
        for i in range(self.n):
            for k, c in x.coeffs.items():
                out[(k, i, i)] = c
        return Elem._raw(self, "*", "*", out)

    def vector(self, m: Elem) -> list:
        return [_const(m.coeffs.get(k)) for k in self._keys]


def _const(c):
    if c is None:
        return 0
    if not c.is_constant():
        raise ValueError("expected a constant coefficient")
    return c.constant_value()


_matrix_cache: Dict = {}


def matrix_algebra(A: Space, n: int) -> MatrixAlgebra:
    got = _matrix_cache.get((A, n))
    if got is None:
        got = MatrixAlgebra(A, n)
        _matrix_cache[(A, n)] = got
    return got


def kappa(A: Space, N: int) -> Homomorphism:
    """κ(a) = a⊗P with P the corner idempotent E₀₀ of M_N(R)."""
    if N < 1:
        raise ValueError("κ needs N >= 1")
    M = matrix_algebra(A, N)
    return Homomorphism(A, M, {"*": "*"}, {k: M.place(A.basis(k), 0, 0) for k in A.all_keys()}, f"κ{N}")


def pad(m: Elem, N: int) -> Elem:
    """The corner inclusion M_n(A) → M_N(A), n ≤ N."""
    M = m.space
    if N < M.n:
        raise ValueError("cannot pad to a smaller size")
    big = matrix_algebra(M.A, N)
    return Elem._raw(big, "*", "*", dict(m.coeffs))


def corner_projection(base: BaseRing, N: int) -> Elem:
    R = ring_algebroid(base)
    return matrix_algebra(R, N).place(R.basis("1"), 0, 0)


def stabilize_kappa(x, N: int):
    """κ_N on an algebra element, or entrywise on a degree-0 representative's values."""
    if isinstance(x, Elem):
        return kappa(x.space, N)(x)
    if isinstance(x, KKRepresentative):
        if x.depth or x.n:
            raise ValueError("stabilize_kappa handles degree-0 representatives")
        k = kappa(x.target, N)
        M = k.target
        comp = AdditiveCompletion(M)

        def fn(e):
            m = _matrix_part(x.map(e))
            coeffs = {}
            for (s, t, i, j, key), c in m.coeffs.items():
                coeffs[(s, t, i, j, (key, 0, 0))] = c
            return Elem._raw(comp, m.source, m.target, coeffs)

        return KKRepresentative(x.source, M, 0, (), fn, x.obj, f"κ{N}({x.name})")
    raise TypeError("stabilize_kappa expects an element or a representative")


def kappa_failures(A: Space, N: int) -> list:
    """κ multiplicative on basis pairs, κ(1) = E₀₀-corner, P² = P, pad∘κ_N = κ_{N+1}."""
    fails = [Failure(f.check, "κ: " + f.detail, f.witness) for f in kappa(A, N).check()]
    P = corner_projection(A.base, N)
    if P @ P != P:
        fails.append(Failure("κ", "P² ≠ P", {}))
    k, k1 = kappa(A, N), kappa(A, N + 1)
    for key in A.all_keys():
        x = A.basis(key)
        if pad(k(x), N + 1) != k1(x):
            fails.append(Failure("κ", "pad∘κ_N ≠ κ_{N+1}", {"x": str(x)}))
    if A.is_unital:
        one = A.identity("*")
        if k(one) != matrix_algebra(A, N).place(one, 0, 0):
            fails.append(Failure("κ", "κ(1) is not the corner", {}))
    return fails


# ---------------------------------------------------------------------------
# Green–Julg


class GreenJulg:
    """σ: AG → A⊗M_G(R), σ(a·g)[g₁][g₁g] = g₁(a), for a G-algebra over a finite group."""

    def __init__(self, A: GAlgebra):
        G = A.groupoid
        if not isinstance(G, FiniteGroup):
            raise GroupoidError("Green–Julg needs a finite group")
        self.A, self.G = A, G
        self.C = A.algebras["*"]
        self.n = G.order
        self.AG = convolution(A)
        self.M = matrix_algebra(self.C, self.n)
        idx = G.index
        images = {}
        for (k, g) in self.AG.all_keys():
            out = self.M.zero("*", "*")
            for g1 in G.elements:
                out = out + self.M.place(A.act(g1, self.C.basis(k)), idx[g1], idx[G.mul(g1, g)])
            images[(k, g)] = out
        self.sigma = Homomorphism(self.AG, self.M, {"*": "*"}, images, "σ")
        self.actions = {g: Homomorphism(self.M, self.M, {"*": "*"},
                                        {key: self._act_key(g, key) for key in self.M.hom_keys("*", "*")}, f"{format_key(g)}·")
                        for g in G.elements}
        self.matrix_galgebra = GAlgebra(G, {"*": self.M}, self.actions, f"{self.C.name}⊗M{G.name}")

    def _act_key(self, g, key) -> Elem:
        k, i, j = key
        G = self.G
        gi_ = G.index[G.mul(g, G.elements[i])]
        gj_ = G.index[G.mul(g, G.elements[j])]
        return self.M.place(self.A.act(g, self.C.basis(k)), gi_, gj_)

    def act(self, g, m: Elem) -> Elem:
        """(g·M)[g₁][g₂] = g(M[g⁻¹g₁][g⁻¹g₂])."""
        return self.actions[g](m)

    def rho(self, g) -> Elem:
        return self.sigma(conv_element(self.AG, self.C.identity("*"), g))

    def pi(self, a: Elem) -> Elem:
        return self.sigma(conv_element(self.AG, a, self.G.e))

    def fixed_lattice(self) -> list:
        """Saturated lattice basis of {M : g·M = M for all g} (over Z, or a basis over a field)."""
        keys = self.M.hom_keys("*", "*")
        rows = []
        for g in self.G.generators():
            cols = []
            for key in keys:
                v = self.M.vector(self.act(g, self.M.basis(key)))
                v[keys.index(key)] -= 1
                cols.append(v)
            rows += [[cols[c][r] for c in range(len(keys))] for r in range(len(keys))]
        if not rows:
            return [[1 if i == j else 0 for j in range(len(keys))] for i in range(len(keys))]
        return nullspace(rows, self.C.base, ncols=len(keys))

    def image_vectors(self) -> list:
        return [self.M.vector(self.sigma.images[k]) for k in self.AG.all_keys()]

    def failures(self) -> list:
        fails = []
        for f in self.sigma.check():
            fails.append(Failure(f.check, "σ: " + f.detail, f.witness))
        if self.C.is_unital and self.sigma(self.AG.identity("*")) != self.M.identity("*"):
            fails.append(Failure("σ unital", "σ(1·e) ≠ 1", {}))
        imgs = self.image_vectors()
        if mat_rank(imgs, self.C.base, ncols=len(self.M.hom_keys("*", "*"))) != len(imgs):
            fails.append(Failure("σ injective", "σ has a nonzero kernel", {}))
        for k, img in self.sigma.images.items():
            for g in self.G.elements:
                if self.act(g, img) != img:
                    fails.append(Failure("image ⊆ fixed", f"σ({self.AG.render_key(k)}) is moved by {format_key(g)}",
                                         {"x": self.AG.render_key(k), "g": format_key(g)}))
                    break
        for v in self.fixed_lattice():
            if not in_span(imgs, v, self.C.base):
                fails.append(Failure("fixed ⊆ image", "a fixed matrix is not in the image of σ", {"vector": list(map(str, v))}))
                break
        return fails


def green_julg_sigma(A: GAlgebra) -> GreenJulg:
    return GreenJulg(A)


def flip_pattern(n: int, base: BaseRing = ZZ):
    """M_n⊗M_n as the pattern algebroid on pairs, the flip s(i, j) = (j, i), and the iso g_u = e_{s(u), u}."""
    objs = [(i, j) for i in range(n) for j in range(n)]
    basis = {("e", u, v): (v, u) for u in objs for v in objs}
    structure = {(("e", u, v), ("e", v, w)): {("e", u, w): 1} for u in objs for v in objs for w in objs}
    P = Algebroid(f"M{n}⊗M{n}", base, objs, basis, structure, {u: {("e", u, u): 1} for u in objs})
    s = lambda u: (u[1], u[0])  # noqa: E731
    ident = identity_hom(P)
    flip = Homomorphism(P, P, s, {("e", u, v): P.basis(("e", s(u), s(v))) for u in objs for v in objs}, "s")
    g = {u: P.basis(("e", s(u), u)) for u in objs}
    g_inv = {u: P.basis(("e", u, s(u))) for u in objs}
    return P, ident, flip, conjugation_iso(ident, flip, g, g_inv)


@dataclass
class ReportItem:
    name: str
    ok: bool
    detail: str
    witness: dict = field(default_factory=dict)

    def to_dict(self):
        return {"name": self.name, "ok": self.ok, "detail": self.detail, "witness": self.witness}


@dataclass
class RoundtripReport:
    group: str
    algebra: str
    items: List[ReportItem]

    @property
    def ok(self) -> bool:
        return all(i.ok for i in self.items)

    def to_dict(self):
        return {"group": self.group, "algebra": self.algebra, "ok": self.ok, "items": [i.to_dict() for i in self.items]}


def beta_map(alpha: EquivariantRep) -> KKRepresentative:
    """β: KK_G(R, A) → KK(R, AG): descent followed by the unit inclusion R → RG."""
    D = descent(alpha)
    G = alpha.groupoid
    RG = D.source
    R = ring_algebroid(alpha.source.base)
    unit = Homomorphism(R, RG, {"*": "*"}, {"1": conv_element(RG, alpha.source.algebras["*"].identity("*"), G.e)}, "ι")
    return compose_degree0(from_homomorphism(unit), D)


def gamma_map(delta: KKRepresentative, gj: GreenJulg) -> KKRepresentative:
    """γ: KK(R, AG) → KK_G(R, A⊗M_G): compose with σ (AG carries the trivial action)."""
    return compose_degree0(delta, from_homomorphism(gj.sigma))


def _item(name, fails, ok_detail, bad_detail=None):
    if fails:
        f = fails[0]
        return ReportItem(name, False, bad_detail or f.detail, f.witness if hasattr(f, "witness") else {})
    return ReportItem(name, True, ok_detail)


def green_julg_roundtrip(A: GAlgebra, alpha: EquivariantRep = None) -> RoundtripReport:
    """Replay the p = 0 argument that β and γ are inverse, on one representative.

    R1 naturality of σ, R2 β(α), R3 γβ(α) = α⊗1 and its κ-corner, R4 the flip
    certificate, R5 the right square strictly and modulo the flip.
    """
    G = A.groupoid
    gj = green_julg_sigma(A)
    alpha = alpha or unit_rep(A)
    if alpha.depth or alpha.coords:
        raise ValueError("the roundtrip is replayed for degree-0 representatives (p = 0)")
    items = []
    C, M, AG = gj.C, gj.M, gj.AG
    n = G.order
    items.append(_item("σ injective, multiplicative, image = fixed points", gj.failures(), "σ verified"))
    items.append(_item("α equivariant", alpha.failures(), "α(g·x) = g·α(x)"))

    # R1: σ_A∘α_* = (α⊗1)∘σ_R on RG
    R = alpha.source
    gjR = green_julg_sigma(R)
    D = descent(alpha)
    sigA = from_homomorphism(gj.sigma)
    left = compose_degree0(D, sigA)
    a1 = alpha.reps["*"]
    MR = gjR.M
    compM = AdditiveCompletion(M)

    def alpha_tensor(m: Elem) -> Elem:
        # (α⊗1)(r⊗E_ij) = α(r)⊗E_ij, entrywise in the N×N matrix
        out = None
        for (k, i, j), c in m.coeffs.items():
            v = _matrix_part(a1(R.algebras["*"].basis(k)))
            coeffs = {(s, t, p, q, (kk, i, j)): d * c for (s, t, p, q, kk), d in v.coeffs.items()}
            piece = Elem._raw(compM, v.source, v.target, coeffs)
            out = piece if out is None else out + piece
        if out is None:
            N = alpha.size("*")
            out = compM.zero(("*",) * N, ("*",) * N)
        return out

    fails = []
    for key in D.source.all_keys():
        x = D.source.basis(key)
        lhs = _matrix_part(left(x))
        rhs = alpha_tensor(gjR.sigma(x))
        if not _same_value(lhs, rhs):
            fails.append(Failure("R1", "σ_A∘α_* ≠ (α⊗1)∘σ_R", {"x": str(x), "lhs": str(lhs), "rhs": str(rhs)}))
            break
    items.append(_item("R1 naturality of σ", fails, "σ_A∘α_* = (α⊗1)∘σ_R on the basis of RG"))

    # R2: β(α)
    b = beta_map(alpha)
    one = ring_algebroid(A.base).basis("1")
    bval = _matrix_part(b(one))
    expect = {}
    _regroup(_matrix_part(a1(R.algebras["*"].basis("1"))), G.e, "*", "*", AdditiveCompletion(AG), expect)
    ok2 = bval.coeffs == {k: c for k, c in expect.items() if c}
    detail2 = "β(α)(1) = α(1)·e"
    if alpha_is_unit(alpha):
        ok2 = ok2 and bval == AdditiveCompletion(AG).identity(("*",))
        detail2 = "β(α) is the unit of AG"
    items.append(ReportItem("R2 β(α)", ok2, detail2 if ok2 else "β(α) differs", {} if ok2 else {"value": str(bval)}))

    # R3: γβ(α) = α⊗1, G-fixed, with κ-corner α⊗P
    gb = gamma_map(b, gj)
    v = _matrix_part(gb(one))
    target = alpha_tensor(MR.tensor_identity(MR.A.basis("1")))
    fixed = all(_same_value(act_value(gj.matrix_galgebra, g, v), v) for g in G.elements)
    corner = stabilize_kappa(a1, n)
    P = corner_projection(A.base, n)
    cval = _matrix_part(corner(one))
    Pm = rehome(_matrix_part(gb(one)), compM)
    lhs_corner = _corner_of(Pm, M, P)
    ok3 = _same_value(v, target) and fixed and _same_value(lhs_corner, cval)
    items.append(ReportItem("R3 γβ(α) = α⊗1 with κ-corner α⊗P", ok3,
                            "γβ(α) = α⊗1_G, G-fixed, and P(α⊗1)P = κ(α)" if ok3 else "γβ(α) differs",
                            {} if ok3 else {"value": str(v), "expected": str(target)}))

    # R4: the flip s on M_G⊗M_G is naturally isomorphic to the identity
    P2, ident, flip, iso = flip_pattern(n, A.base)
    W = w_homotopy(ident, flip, iso)
    tests = [P2.basis(k) for k in P2.all_keys()]
    fails = W.identities() + W.certificate().verify(tests)
    items.append(_item("R4 flip certificate", fails, f"W-homotopy diag(1,0) ≃ diag(0,s) verified on {len(tests)} basis elements"))

    # R5: the right square, strictly and modulo the flip
    strict, modflip, witness = _right_square(gj)
    items.append(ReportItem("R5 right square", modflip,
                            ("commutes strictly" if strict else "commutes only modulo the flip s") if modflip
                            else "does not commute even modulo the flip", witness))
    return RoundtripReport(G.name, A.name, items)


def alpha_is_unit(alpha: EquivariantRep) -> bool:
    r = alpha.reps["*"]
    if alpha.size("*") != 1 or not alpha.source.algebras["*"].is_unital:
        return False
    B = alpha.target.algebras["*"]
    v = _matrix_part(r(alpha.source.algebras["*"].identity("*")))
    return v == AdditiveCompletion(B).identity(("*",))


def _corner_of(m: Elem, M: MatrixAlgebra, P: Elem) -> Elem:
    """P·m·P entrywise (m an N×N matrix over A⊗M_G), keeping only index (0, 0)."""
    coeffs = {k: c for k, c in m.coeffs.items() if k[4][1:] == (0, 0)}
    return Elem._raw(m.space, m.source, m.target, coeffs)


def _right_square(gj: GreenJulg):
    """Compare σ_{A⊗M_G}∘(σ_A)_* with (σ_A⊗1)∘σ_{AG} on (AG)G, AG with the trivial action."""
    G, A, AG, M = gj.G, gj.A, gj.AG, gj.M
    n = G.order
    AGtriv = trivial_galgebra(G, AG, AG.name)
    AGG = convolution(AGtriv)
    gjM = GreenJulg(gj.matrix_galgebra)
    MM = gjM.M                                   # (A⊗M_G)⊗M_G, keys ((k, i, j), I, J)
    gjAG = GreenJulg(AGtriv)                     # σ_{AG}: (AG)G → AG⊗M_G
    MG = gjM.AG                                  # (A⊗M_G)G
    strict = modflip = True
    witness = {}
    for key in AGG.all_keys():
        (kh, g) = key
        inner = gj.sigma(AG.basis(kh))
        route1 = gjM.sigma(conv_element(MG, inner, g))
        mid = gjAG.sigma(AGG.basis(key))
        route2 = MM.zero("*", "*")
        flipped = MM.zero("*", "*")
        for (k2, I, J), c in mid.coeffs.items():
            for (k, i, j), d in gj.sigma(AG.basis(k2)).coeffs.items():
                route2 = route2 + Elem._raw(MM, "*", "*", {((k, i, j), I, J): c * d})
                # the layout with the new M_G in the centre, then the flip back
                flipped = flipped + Elem._raw(MM, "*", "*", {((k, I, J), i, j): c * d})
        flipped = _flip(flipped, MM)
        if route1 != route2:
            strict = False
            witness.setdefault("strict", {"x": AGG.render_key(key)})
        if route1 != flipped:
            modflip = False
            witness.setdefault("flip", {"x": AGG.render_key(key)})
    del n, A, M
    return strict, modflip, witness


def _flip(m: Elem, MM: MatrixAlgebra) -> Elem:
    return Elem._raw(MM, "*", "*", {((k, I, J), i, j): c for ((k, i, j), I, J), c in m.coeffs.items()})


# ---------------------------------------------------------------------------
# the index map


@dataclass
class IndexResult:
    value: KKRepresentative          # R → (AG)⊕
    transport: TransportGroupoid
    restricted: EquivariantRep
    descended: KKRepresentative
    module: FgpWitness
    smashed: KKRepresentative


def _as_gset(G: FiniteGroup, X) -> GSet:
    if X is None:
        return point_gset(G)
    if isinstance(X, GSet):
        return X
    if isinstance(X, GComplex):
        if X.X.dim > 0:
            raise NotImplementedError("the index pipeline handles 0-dimensional G-complexes (finite G-sets)")
        pts = X.X.simplices(0)
        return GSet(G, pts, lambda x, g: X.perm(g)[x], X.X.name)
    raise TypeError("X must be a GSet, a GComplex or None")


def index_pipeline(G: FiniteGroup, X, A: GAlgebra, alpha: EquivariantRep) -> IndexResult:
    """i*, then descent over X̄, then ℰ∧ with ℰ = ⊕_O Hom(−, x_O), then i_*: AX̄ → AG.

    ``alpha`` is a degree-0 equivariant representative R^X → A over G.
    """
    Xs = _as_gset(G, X)
    if alpha.groupoid != G or A.groupoid != G:
        raise GroupoidError("α and A must live over G")
    Xbar = transport(Xs)
    i = Xbar.inclusion
    ra = restriction(i, alpha)
    D = descent(ra)
    RXbar = D.source
    w = free_witness(RXbar, Xs.representatives(), "ℰ")
    smashed = module_smash(w, D, alpha.source.base)
    AX = convolution(ra.target)
    AG = convolution(A)
    push = convolution_hom(ra.target, A, i)
    value = compose_degree0(smashed, from_homomorphism(push))
    value.name = f"index({alpha.name})"
    del AX, AG
    return IndexResult(value, Xbar, ra, D, w, smashed)


def index_naturality_failures(G: FiniteGroup, X: GSet, A: GAlgebra, beta: EquivariantRep) -> list:
    """For f: X → pt, index_X(β) = index_pt(β∘f*) on R, and the θ-module satisfies f_*θ = ℰ_pt, f*θ = ℰ_X."""
    fails = []
    Y = point_gset(G)
    f = {x: "*" for x in X.points}
    RX = beta.source
    R = trivial_galgebra(G, ring_algebroid(A.base), str(A.base))
    const = Homomorphism(R.algebras["*"], RX.algebras["*"], {"*": "*"},
                         {"1": RX.algebras["*"].identity("*")}, "f*")
    fstar = equivariant_from_homs(R, RX, {"*": const}, "f*")
    pulled = EquivariantRep(R, A, {"*": compose_degree0(fstar.reps["*"], beta.reps["*"])}, f"{beta.name}∘f*")
    left = index_pipeline(G, X, A, beta)
    right = index_pipeline(G, None, A, pulled)
    one = ring_algebroid(A.base).basis("1")
    lv, rv = _matrix_part(left.value(one)), _matrix_part(right.value(one))
    if not _same_value(lv, rv):
        fails.append(Failure("index naturality", "index_X(β) ≠ index_pt(f_*β)", {"lhs": str(lv), "rhs": str(rv)}))
    # the θ-module over R X̄ (R^L with L = pt) and its two pushforwards
    Xbar, Ybar = left.transport, right.transport
    RXbar_gal = restrict_galgebra(R, Xbar.inclusion)
    theta_w = free_witness(convolution(RXbar_gal), X.representatives(), "θ")
    fpush = convolution_hom(RXbar_gal, restrict_galgebra(R, Ybar.inclusion), transport_functor(f, Xbar, Ybar))
    to_E_L = pushforward_witness(theta_w, fpush)
    E_L = right.module
    if to_E_L.verify() or not _same_value(_flatten_idem(to_E_L), _flatten_idem(E_L)):
        fails.append(Failure("θ-module", "f_*θ ≠ ℰ_L", {}))
    RXX = left.restricted.source
    cstar = convolution_hom(RXbar_gal, RXX, identity_functor(Xbar),
                            {x: Homomorphism(RXbar_gal.algebras[x], RXX.algebras[x], {"*": "*"},
                                             {"1": RXX.algebras[x].identity("*")}, "f*") for x in Xbar.objects})
    to_E_K = pushforward_witness(theta_w, cstar)
    if to_E_K.verify() or not _same_value(_flatten_idem(to_E_K), _flatten_idem(left.module)):
        fails.append(Failure("θ-module", "f*θ ≠ ℰ_K", {}))
    return fails


def _flatten_idem(w: FgpWitness) -> Elem:
    return w.idempotent()


# ---------------------------------------------------------------------------
# G-complexes and equivariant K-homology carriers


class GComplex:
    """A finite simplicial set with a right G-action by simplicial automorphisms."""

    def __init__(self, X: FiniteSimplicialSet, group: FiniteGroup, perms: Mapping, name: str = None):
        self.X = X
        self.group = group
        self.name = name or X.name
        self._perm = {g: dict(p) for g, p in perms.items()}
        if set(self._perm) != set(group.elements):
            self._perm = _close_action(group, self._perm, X)
        fails = self.check()
        if fails:
            raise GroupoidError(f"non-simplicial action on {self.name}: {fails[0].detail}")

    def perm(self, g) -> dict:
        return self._perm[g]

    def check(self) -> list:
        G, X = self.group, self.X
        fails = []
        for g, p in self._perm.items():
            if sorted(map(repr, p)) != sorted(map(repr, X.dims)) or sorted(map(repr, p.values())) != sorted(map(repr, X.dims)):
                fails.append(Failure("action", f"{format_key(g)} is not a bijection of simplices", {"g": format_key(g)}))
                continue
            for x, y in p.items():
                if X.dims[x] != X.dims[y]:
                    fails.append(Failure("action", "dimension not preserved", {"g": format_key(g), "x": format_key(x)}))
                    break
                for (fx, nu), (fy, mu) in zip(X.faces.get(x, ()), X.faces.get(y, ())):
                    if (p[fx], nu) != (fy, mu):
                        fails.append(Failure("action", "faces not preserved", {"g": format_key(g), "x": format_key(x)}))
                        break
        if fails:
            return fails
        for x in X.dims:
            if self._perm[G.e][x] != x:
                fails.append(Failure("action", "identity moves a simplex", {"x": format_key(x)}))
                break
            for g in G.elements:
                for h in G.elements:
                    if self._perm[h][self._perm[g][x]] != self._perm[G.mul(g, h)][x]:
                        fails.append(Failure("action", "(xg)h ≠ x(gh)", {"x": format_key(x)}))
                        return fails
        return fails

    def components(self) -> List[tuple]:
        X = self.X
        parent = {x: x for x in X.dims}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for x, fs in X.faces.items():
            for y, _ in fs:
                parent[find(x)] = find(y)
        comps: Dict = {}
        for x in X.dims:
            comps.setdefault(find(x), []).append(x)
        return [tuple(c) for c in comps.values()]


def _close_action(G: FiniteGroup, gens: Mapping, X: FiniteSimplicialSet) -> dict:
    """Extend permutations given on generators to all of G (right action: x(gh) = (xg)h)."""
    out = {G.e: {x: x for x in X.dims}}
    frontier = [G.e]
    while frontier:
        g = frontier.pop()
        for s, ps in gens.items():
            gs = G.mul(g, s)
            if gs not in out:
                out[gs] = {x: ps[out[g][x]] for x in X.dims}
                frontier.append(gs)
    if len(out) != G.order:
        raise GroupoidError("the given permutations do not generate an action of the whole group")
    return out


def gcomplex_trivial(X: FiniteSimplicialSet, G: FiniteGroup) -> GComplex:
    return GComplex(X, G, {g: {x: x for x in X.dims} for g in G.elements})


def gcomplex_from_gset(S: GSet) -> GComplex:
    X = FiniteSimplicialSet(S.name, {x: 0 for x in S.points}, {})
    return GComplex(X, S.group, {g: {x: S.act(x, g) for x in S.points} for g in S.group.elements}, S.name)


@dataclass
class KHomologyCarrier:
    """Data for KK_G(R^X, A): R^X with its G-action, blocks by components and the pushout sequence."""

    X: GComplex
    A: GAlgebra

    def __post_init__(self):
        self.base = self.A.base
        self.R = ring_algebroid(self.base)
        self.power = SimplicialPower(self.R, self.X.X)

    def lattice(self, D: int) -> list:
        return family_basis(self.X.X, D, self.base)

    def act(self, g, fam: Mapping) -> dict:
        return act_on_family(self.X.perm(g), fam)

    def action_failures(self, D: int = 2) -> list:
        """g·φ is again a compatible family of degree ≤ D, and the action is a left action."""
        fails = []
        G = self.X.group
        fams = self.lattice(D)
        for fam in fams:
            for g in G.elements:
                gf = self.act(g, fam)
                if family_compatible(self.X.X, gf):
                    fails.append(Failure("action", "g·φ is not compatible", {"g": format_key(g)}))
                    return fails
                for h in G.elements:
                    if self.act(g, self.act(h, fam)) != self.act(G.mul(g, h), fam):
                        fails.append(Failure("action", "g·(h·φ) ≠ (gh)·φ", {"g": format_key(g), "h": format_key(h)}))
                        return fails
        return fails

    def galgebra(self) -> GAlgebra:
        """R^X as a G-algebra, for 0-dimensional X (finite rank)."""
        if self.X.X.dim > 0:
            raise NotImplementedError("R^X has infinite rank for positive-dimensional X")
        return function_galgebra(_as_gset(self.X.group, self.X), self.base)

    def point_failures(self, D: int = 4) -> list:
        """X = point: R^X ≅ R in every degree, so the carrier is KK_G(R, A)."""
        if len(self.X.X.dims) != 1:
            return [Failure("point", "X is not a point", {})]
        fails = []
        for d in range(D + 1):
            fams = self.lattice(d)
            if len(fams) != 1 or any(not p.is_constant() or p.constant_value() not in (1, -1) for p in fams[0].values()):
                fails.append(Failure("point", f"R^pt is not R in degree {d}", {"degree": d}))
        if self.galgebra().algebras["*"] != ring_algebroid(self.base):
            fails.append(Failure("point", "R^pt is not the ring R", {}))
        return fails

    def block_failures(self, D: int = 2) -> list:
        """Over X = X₁ ⊔ X₂ every lattice family splits by components and ranks add."""
        comps = self.X.components()
        fails = []
        fams = self.lattice(D)
        total = 0
        for comp in comps:
            sub = FiniteSimplicialSet(f"{self.X.name}|", {x: self.X.X.dims[x] for x in comp},
                                      {x: self.X.X.faces[x] for x in comp if x in self.X.X.faces})
            total += len(family_basis(sub, D, self.base))
        if total != len(fams):
            fails.append(Failure("blocks", f"rank {len(fams)} ≠ sum of component ranks {total}", {"degree": D}))
        for fam in fams:
            for comp in comps:
                part = {x: (fam[x] if x in comp else fam[x].ring.zero) for x in fam}
                if family_compatible(self.X.X, part):
                    fails.append(Failure("blocks", "a family does not split along components", {}))
                    return fails
        return fails

    def orbit_decomposition(self, alpha: EquivariantRep) -> dict:
        """α on R^X restricted to each orbit O: δ_x ↦ α(δ_x) for x ∈ O."""
        S = _as_gset(self.X.group, self.X)
        A = alpha.source.algebras["*"]
        out = {}
        for orb in S.orbits():
            out[orb] = {x: alpha.reps["*"](A.basis(("δ", x))) for x in orb} if len(S.points) > 1 else \
                {orb[0]: alpha.reps["*"](A.basis("1"))}
        return out

    def orbit_block_failures(self, alpha: EquivariantRep) -> list:
        """α = Σ_O α_O with α_O(1_O)α_{O'}(1_{O'}) = 0: the hom data splits as a direct sum over orbits."""
        parts = self.orbit_decomposition(alpha)
        fails = []
        units = []
        for orb, vals in parts.items():
            u = None
            for v in vals.values():
                u = v if u is None else u + v
            units.append(u)
        for i, u in enumerate(units):
            if u @ u != u:
                fails.append(Failure("blocks", "α(1_O) is not idempotent", {"orbit": i}))
            for j, w in enumerate(units):
                if i != j and not (u @ w).is_zero():
                    fails.append(Failure("blocks", "orbit blocks are not orthogonal", {"orbits": [i, j]}))
        A = alpha.source.algebras["*"]
        total = units[0]
        for u in units[1:]:
            total = total + u
        if total != alpha.reps["*"](A.identity("*")):
            fails.append(Failure("blocks", "α(1) ≠ Σ_O α(1_O)", {}))
        return fails


def equivariant_khomology(X: GComplex, A: GAlgebra) -> KHomologyCarrier:
    if X.group != A.groupoid:
        raise GroupoidError("X and A must carry actions of the same group")
    return KHomologyCarrier(X, A)


def swapped_edges(G: FiniteGroup = None) -> GComplex:
    """Two disjoint copies of Δ¹ exchanged by the generator of Z/2."""
    G = G or cyclic_group(2)
    X = from_ordered_complex([(0, 1), (2, 3)], "Δ¹⊔Δ¹")
    swap = {(0,): (2,), (1,): (3,), (2,): (0,), (3,): (1,), (0, 1): (2, 3), (2, 3): (0, 1)}
    gen = G.generators()[0]
    return GComplex(X, G, {gen: swap}, X.name)


def equivariant_pushout(R: BaseRing = ZZ, D: int = 3) -> tuple:
    """The pushout of two swapped edges along their endpoints onto a point, with G = Z/2.

    Returns (extension, failures): exactness to degree D plus equivariance of i, j and s.
    """
    gx = swapped_edges()
    X = gx.X
    B = [(0,), (1,), (2,), (3,)]
    C = point()
    f = {b: ("*", (0,)) for b in B}
    ext = pushout_extension(R, X, B, C, f)
    actions = {g: (gx.perm(g), {"*": "*"}) for g in gx.group.elements}
    fails = ext.certify([("*", "*")], D)
    fails += equivariant_pushout_failures(ext, actions, D)
    return ext, fails


def collapse_certificate(base: BaseRing = ZZ, var: str = "s") -> HomotopyCertificate:
    """R^{Δ¹} → (R^{Δ¹})^{Δ¹}: φ ↦ φ((1−s)u + s·v₁), from the identity to the collapse onto v₁."""
    X = simplex(1)
    Rr = ring_algebroid(base)
    Pw = SimplicialPower(Rr, X)
    Ps = PolyPower(Pw, (var,), "simplex")
    s = poly_ring(base, (var,)).gen(var)
    top = (0, 1)
    u = poly_ring(base, ("u1",)).gen("u1")
    coord = {}
    for i, (y, _) in enumerate(X.faces[top]):
        from .rings import face_map
        coord[y] = pull(u, face_map(i, 1), 0, 1)
    target = (1,)
    ctarget = coord[target]

    def top_value(e: Elem):
        return e.coeffs.get((top, "1"), scalar_ring(base).zero)

    def h(e: Elem) -> Elem:
        p = top_value(e)
        moved = {top: p.substitute({"u1": (1 - s) * u + s * ctarget})}
        for v in ((0,), (1,)):
            moved[v] = p.substitute({"u1": (1 - s) * coord[v] + s * ctarget})
        return Elem._raw(Ps, "*", "*", {(x, "1"): q for x, q in moved.items() if q})

    def collapse(e: Elem) -> Elem:
        c = top_value(e).substitute({"u1": ctarget})
        return Elem._raw(Pw, "*", "*", {(x, "1"): c for x in X.dims if c})

    start = LazyHomomorphism(Pw, Pw, lambda e: e, lambda a: a, "id")
    end = LazyHomomorphism(Pw, Pw, collapse, lambda a: a, "c∘f*")
    step = LazyHomomorphism(Pw, Ps, h, lambda a: a, "F*")
    return HomotopyCertificate(start, end, [step], var, "collapse Δ¹ → Δ⁰", Pw)


def collapse_tests(cert: HomotopyCertificate, D: int = 3) -> list:
    """The lattice of compatible families of degree ≤ D, as elements of the certificate's source."""
    Pw = cert.source
    return [Pw.scalar_family(f, "1", "*", "*") for f in family_basis(Pw.X, D, Pw.base)]


__all__ = [
    "GroupoidError", "FiniteGroupoid", "FiniteGroup", "cyclic_group", "trivial_group", "symmetric_group",
    "group_from_table", "codiscrete_groupoid", "Functor", "compose_functors", "identity_functor", "GSet",
    "regular_gset", "point_gset", "trivial_gset", "coset_gset", "TransportGroupoid", "transport",
    "transport_functor", "GAlgebra", "trivial_galgebra", "permutation_galgebra", "swap_galgebra",
    "function_galgebra", "restrict_galgebra", "ConvolutionSpace", "convolution", "conv_element",
    "convolution_hom", "tower_action", "tower_galgebra", "EquivariantTower", "equivariant_J",
    "EquivariantExtension", "equivariant_path_extension", "equivariant_split_extension", "act_value",
    "EquivariantRep", "equivariant_rep", "equivariant_from_homs", "unit_rep", "equivariant_sharp", "restriction",
    "restriction_product_failures", "ReconstructionWitness", "restriction_inverse_witness", "descent",
    "descent_square_failures", "trivial_descent_failures", "untag", "MatrixAlgebra", "matrix_algebra", "kappa",
    "pad", "corner_projection", "stabilize_kappa", "kappa_failures", "GreenJulg", "green_julg_sigma",
    "flip_pattern", "ReportItem", "RoundtripReport", "beta_map", "gamma_map", "green_julg_roundtrip",
    "IndexResult", "index_pipeline", "index_naturality_failures", "GComplex", "gcomplex_trivial",
    "gcomplex_from_gset", "KHomologyCarrier", "equivariant_khomology", "swapped_edges", "equivariant_pushout",
    "collapse_certificate", "collapse_tests",
]
