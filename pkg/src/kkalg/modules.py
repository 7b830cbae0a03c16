"""Finitely presented right modules over finite algebroids, bimodules and ⊗_𝒜.

A right 𝒜-module ℰ stores, for each object a, a presentation of ℰ(a) as
``base^gens / rowspace(relations)`` and, for every basis arrow x: a → b, the
matrix of ξ ↦ ξ·x from ℰ(b) to ℰ(a).  Vectors are plain lists of base-ring
scalars; equality is always taken modulo the relations.

Finitely generated projective modules are never recognised by search.  They
come with an ``FgpWitness``: a section/retraction pair against a finite sum of
representables, which is checked by exact linear algebra.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

from .completion import AdditiveCompletion
from .core import Algebroid, Elem, EndpointError, Failure, Homomorphism, format_key, ring_algebroid
from .linalg import in_span, invariant_factors, rank
from .rings import ZZ, BaseRing

Vector = List


def _scalar(c, base: BaseRing):
    """Constant value of a structure coefficient, pushed into ``base``."""
    if hasattr(c, "constant_value"):
        if not c.is_constant():
            raise ValueError(f"module actions need constant coefficients, got {c}")
        c = c.constant_value()
    return base(c)


def _unit(n: int, i: int, base: BaseRing) -> Vector:
    v = [base(0)] * n
    v[i] = base(1)
    return v


def _axpy(acc: Vector, c, v: Vector) -> None:
    for i, x in enumerate(v):
        if x:
            acc[i] = acc[i] + c * x


class RightModule:
    """ℰ: 𝒜^op → R-modules, given by presentations and action matrices."""

    def __init__(self, algebroid: Algebroid, gens: Dict[Any, Sequence], relations: Dict[Any, Sequence] = None,
                 action: Dict[Any, Sequence] = None, name: str = "ℰ", base: BaseRing = None):
        self.A = algebroid
        self.base = base or algebroid.base
        self.name = name
        self.gens = {a: list(gens.get(a, [])) for a in algebroid.objects}
        self.relations = {a: [[self.base(c) for c in row] for row in (relations or {}).get(a, [])]
                          for a in algebroid.objects}
        self.action: Dict[Any, List[Vector]] = {}
        for k in algebroid.all_keys():
            a, b = algebroid.key_ends(k)
            rows = (action or {}).get(k)
            if rows is None:
                rows = [[self.base(0)] * self.rank(a) for _ in range(self.rank(b))]
            rows = [[self.base(c) for c in row] for row in rows]
            if len(rows) != self.rank(b) or any(len(r) != self.rank(a) for r in rows):
                raise ValueError(f"action matrix of {format_key(k)} has the wrong shape")
            self.action[k] = rows
        for a, rows in self.relations.items():
            if any(len(r) != self.rank(a) for r in rows):
                raise ValueError(f"relation at {a!r} has the wrong length")

    def __repr__(self):
        return f"RightModule({self.name} over {self.A.name})"

    def rank(self, a) -> int:
        """Number of generators of ℰ(a) (not the module rank)."""
        return len(self.gens[a])

    def zero(self, a) -> Vector:
        return [self.base(0)] * self.rank(a)

    def gen(self, a, i: int) -> Vector:
        return _unit(self.rank(a), i, self.base)

    def equal(self, a, u: Vector, v: Vector) -> bool:
        diff = [self.base(x) - self.base(y) for x, y in zip(u, v)]
        if not any(diff):
            return True
        return in_span(self.relations[a], diff, self.base)

    def is_zero(self, a, u: Vector) -> bool:
        return self.equal(a, u, self.zero(a))

    def act_key(self, k, v: Vector) -> Vector:
        """ξ·x for a basis arrow x: a → b and ξ ∈ ℰ(b)."""
        a, _ = self.A.key_ends(k)
        out = self.zero(a)
        for j, c in enumerate(v):
            if c:
                _axpy(out, c, self.action[k][j])
        return out

    def act(self, x: Elem, v: Vector) -> Vector:
        out = self.zero(x.source)
        for k, c in x.coeffs.items():
            _axpy(out, _scalar(c, self.base), self.act_key(k, v))
        return out

    def structure(self, a) -> tuple:
        """(free rank, torsion invariants) of ℰ(a); over a field the torsion list is empty."""
        n = self.rank(a)
        rows = [r for r in self.relations[a] if any(r)]
        if self.base == ZZ:
            return invariant_factors([[int(c) for c in r] for r in rows], n)
        return n - rank(rows, self.base, n) if rows else n, []

    def describe(self) -> dict:
        return {str(a): {"free_rank": self.structure(a)[0], "torsion": self.structure(a)[1]} for a in self.A.objects}

    def check(self, limit: int = 5) -> List[Failure]:
        fails: List[Failure] = []
        A = self.A
        # actions preserve the relations
        for k in A.all_keys():
            a, b = A.key_ends(k)
            for row in self.relations[b]:
                if not self.is_zero(a, self.act_key(k, row)):
                    fails.append(Failure("action-relations", f"·{format_key(k)} does not preserve a relation of {self.name}({b!r})",
                                         {"arrow": format_key(k), "relation": [str(c) for c in row]}))
        # contravariance: (ξ·y)·x = ξ·(y∘x)
        for ky, kx in A.composable_pairs():
            b, c = A.key_ends(ky)
            a = A.key_ends(kx)[0]
            yx = A.basis(ky) @ A.basis(kx)
            for i in range(self.rank(c)):
                g = self.gen(c, i)
                if not self.equal(a, self.act_key(kx, self.act_key(ky, g)), self.act(yx, g)):
                    fails.append(Failure("contravariance", f"(ξ·{format_key(ky)})·{format_key(kx)} ≠ ξ·({format_key(ky)}∘{format_key(kx)})",
                                         {"y": format_key(ky), "x": format_key(kx), "generator": str(self.gens[c][i])}))
                    break
            if len(fails) >= limit:
                return fails
        if A.is_unital:
            for a in A.objects:
                one = A.identity(a)
                for i in range(self.rank(a)):
                    if not self.equal(a, self.act(one, self.gen(a, i)), self.gen(a, i)):
                        fails.append(Failure("unit", f"1_{a} does not act as the identity on {self.name}({a!r})",
                                             {"object": str(a), "generator": str(self.gens[a][i])}))
                        break
        return fails[:limit]


class ModuleHom:
    """T: ℰ → ℱ given per object by the images of the generators of ℰ(a)."""

    def __init__(self, source: RightModule, target: RightModule, maps: Dict[Any, Sequence], name: str = "T"):
        if source.A != target.A:
            raise EndpointError("module homomorphism between modules over different algebroids")
        self.source, self.target, self.name = source, target, name
        base = target.base
        self.maps = {a: [[base(c) for c in v] for v in maps.get(a, [target.zero(a)] * source.rank(a))]
                     for a in source.A.objects}
        for a, imgs in self.maps.items():
            if len(imgs) != source.rank(a) or any(len(v) != target.rank(a) for v in imgs):
                raise ValueError(f"{name}: image list at {a!r} has the wrong shape")

    def apply(self, a, v: Vector) -> Vector:
        out = self.target.zero(a)
        for i, c in enumerate(v):
            if c:
                _axpy(out, self.target.base(c), self.maps[a][i])
        return out

    def check(self, limit: int = 5) -> List[Failure]:
        fails = []
        E, F, A = self.source, self.target, self.source.A
        for a in A.objects:
            for row in E.relations[a]:
                if not F.is_zero(a, self.apply(a, row)):
                    fails.append(Failure("well-defined", f"{self.name} does not kill a relation at {a!r}",
                                         {"object": str(a), "relation": [str(c) for c in row]}))
        for k in A.all_keys():
            a, b = A.key_ends(k)
            for i in range(E.rank(b)):
                g = E.gen(b, i)
                if not F.equal(a, self.apply(a, E.act_key(k, g)), F.act_key(k, self.apply(b, g))):
                    fails.append(Failure("naturality", f"{self.name}(ξ·{format_key(k)}) ≠ {self.name}(ξ)·{format_key(k)}",
                                         {"arrow": format_key(k), "generator": str(E.gens[b][i])}))
                    break
        return fails[:limit]

    def then(self, other: "ModuleHom") -> "ModuleHom":
        """other∘self."""
        maps = {a: [other.apply(a, v) for v in self.maps[a]] for a in self.source.A.objects}
        return ModuleHom(self.source, other.target, maps, f"{other.name}∘{self.name}")

    def is_identity(self) -> bool:
        E = self.source
        return all(E.equal(a, self.maps[a][i], E.gen(a, i)) for a in E.A.objects for i in range(E.rank(a)))

    def agrees_with(self, other: "ModuleHom") -> bool:
        F = self.target
        return all(F.equal(a, u, v) for a in F.A.objects for u, v in zip(self.maps[a], other.maps[a]))


def identity_module_hom(E: RightModule) -> ModuleHom:
    return ModuleHom(E, E, {a: [E.gen(a, i) for i in range(E.rank(a))] for a in E.A.objects}, "1")


# ---------------------------------------------------------------------------
# constructions


def representable(A: Algebroid, c, name: str = None) -> RightModule:
    """Hom(−, c): ℰ(a) = Hom(a, c), acted on by precomposition."""
    gens = {a: A.hom_keys(a, c) for a in A.objects}
    index = {a: {k: i for i, k in enumerate(gens[a])} for a in A.objects}
    action = {}
    for kx in A.all_keys():
        a, b = A.key_ends(kx)
        rows = []
        for ky in gens[b]:
            v = [A.base(0)] * len(gens[a])
            for z, coeff in A.compose_keys(ky, kx).items():
                v[index[a][z]] += _scalar(coeff, A.base)
            rows.append(v)
        action[kx] = rows
    return RightModule(A, gens, {}, action, name or f"Hom(−,{c})")


def direct_sum(*mods: RightModule, name: str = None) -> RightModule:
    A = mods[0].A
    base = mods[0].base
    gens, rels, action = {}, {}, {}
    for a in A.objects:
        gens[a] = [(n, g) for n, M in enumerate(mods) for g in M.gens[a]]
        rels[a] = []
        off = 0
        for M in mods:
            width = len(gens[a])
            for row in M.relations[a]:
                v = [base(0)] * width
                v[off:off + len(row)] = row
                rels[a].append(v)
            off += M.rank(a)
    for k in A.all_keys():
        a, b = A.key_ends(k)
        rows = []
        offa = 0
        for M in mods:
            for row in M.action[k]:
                v = [base(0)] * len(gens[a])
                v[offa:offa + len(row)] = row
                rows.append(v)
            offa += M.rank(a)
        action[k] = rows
    return RightModule(A, gens, rels, action, name or "⊕".join(M.name for M in mods), base)


def free_sum(A: Algebroid, objects: Sequence) -> RightModule:
    """Hom(−, c₁) ⊕ ⋯ ⊕ Hom(−, cₙ)."""
    return direct_sum(*(representable(A, c) for c in objects), name="⊕".join(f"Hom(−,{c})" for c in objects))


def _slot_offsets(P: RightModule, a, n: int) -> list:
    counts = [0] * n
    for slot, _ in P.gens[a]:
        counts[slot] += 1
    return [sum(counts[:i]) for i in range(n)]


def matrix_action(A: Algebroid, objects: Sequence, entries: Dict[tuple, Elem]) -> ModuleHom:
    """Postcomposition by a matrix (e_ij ∈ Hom(c_j, c_i)) as an endomorphism of ⊕Hom(−, c_i)."""
    objects = tuple(objects)
    P = free_sum(A, objects)
    n = len(objects)
    maps = {}
    for a in A.objects:
        offs = _slot_offsets(P, a, n)
        imgs = []
        for j, k in P.gens[a]:
            v = P.zero(a)
            xi = A.basis(k)
            for i in range(n):
                e = entries.get((i, j))
                if e is None or e.is_zero():
                    continue
                prod = e @ xi
                for z, c in prod.coeffs.items():
                    v[offs[i] + A.hom_keys(a, objects[i]).index(z)] += _scalar(c, P.base)
            imgs.append(v)
        maps[a] = imgs
    return ModuleHom(P, P, maps, "e∘")


def _entries_of(A: Algebroid, objects: tuple, e) -> Dict[tuple, Elem]:
    if isinstance(e, Elem):
        comp = e.space
        if not isinstance(comp, AdditiveCompletion):
            if len(objects) != 1:
                raise ValueError("a plain morphism can only be an idempotent on one object")
            return {(0, 0): e}
        if tuple(e.source) != objects or tuple(e.target) != objects:
            raise EndpointError("idempotent does not live on the given objects")
        return {(i, j): comp.entry(e, i, j) for i in range(len(objects)) for j in range(len(objects))}
    return dict(e)


@dataclass
class FgpWitness:
    """ℰ is a summand of P = ⊕Hom(−, c_i): section s: ℰ → P and retraction r: P → ℰ with r∘s = 1."""

    module: RightModule
    objects: tuple
    section: ModuleHom
    retraction: ModuleHom
    entries: Dict[tuple, Elem] = field(default_factory=dict)

    @property
    def ambient(self) -> RightModule:
        return self.section.target

    def idempotent(self) -> Elem:
        """e = s∘r as a matrix in 𝒜⊕ (read off on the identities, so 𝒜 must be unital)."""
        A = self.module.A
        comp = AdditiveCompletion(A)
        P = self.ambient
        n = len(self.objects)
        rows = [[0] * n for _ in range(n)]
        for j, c in enumerate(self.objects):
            offs = _slot_offsets(P, c, n)
            v = P.zero(c)
            for k, u in A.unit_coeffs(c).items():
                v[offs[j] + A.hom_keys(c, c).index(k)] += _scalar(u, P.base)
            img = self.section.apply(c, self.retraction.apply(c, v))
            for i, ci in enumerate(self.objects):
                keys = A.hom_keys(c, ci)
                coeffs = {k: img[offs[i] + t] for t, k in enumerate(keys) if img[offs[i] + t]}
                if coeffs:
                    rows[i][j] = A.elem(c, ci, coeffs)
        return comp.matrix(self.objects, self.objects, rows)

    def complement(self) -> RightModule:
        """𝓕 = P / image(s∘r), the complementary summand."""
        P = self.ambient
        e = self.retraction.then(self.section)
        rels = {a: list(P.relations[a]) + [list(v) for v in e.maps[a]] for a in P.A.objects}
        return RightModule(P.A, P.gens, rels, P.action, f"{self.module.name}^⊥", P.base)

    def verify(self) -> List[Failure]:
        fails = self.section.check() + self.retraction.check()
        if not self.section.then(self.retraction).is_identity():
            fails.append(Failure("retraction", "r∘s is not the identity of ℰ", {"module": self.module.name}))
        # ℰ ⊕ 𝓕 ≅ P via (ξ, ζ) ↦ s(ξ) + (1 − sr)ζ and p ↦ (r(p), [p])
        P, E = self.ambient, self.module
        F = self.complement()
        S = direct_sum(E, F)
        e = self.retraction.then(self.section)
        to_P, from_P = {}, {}
        for a in P.A.objects:
            imgs = [self.section.maps[a][i] for i in range(E.rank(a))]
            for i in range(F.rank(a)):
                g = P.gen(a, i)
                imgs.append([x - y for x, y in zip(g, e.maps[a][i])])
            to_P[a] = imgs
            from_P[a] = [self.retraction.maps[a][i] + P.gen(a, i) for i in range(P.rank(a))]
        fwd = ModuleHom(S, P, to_P, "ℰ⊕𝓕→P")
        bwd = ModuleHom(P, S, from_P, "P→ℰ⊕𝓕")
        for h in (fwd, bwd):
            fails += h.check()
        if not fwd.then(bwd).is_identity() or not bwd.then(fwd).is_identity():
            fails.append(Failure("summand-iso", "ℰ⊕𝓕 → P is not an isomorphism", {"module": E.name}))
        return fails


def from_idempotent(A: Algebroid, objects: Sequence, e, name: str = "ℰ") -> FgpWitness:
    """The image of an idempotent matrix e on ⊕Hom(−, c_i), presented as P/(1−e)P."""
    objects = tuple(objects)
    entries = _entries_of(A, objects, e)
    E_op = matrix_action(A, objects, entries)
    P = E_op.source
    rels = {a: [[x - y for x, y in zip(P.gen(a, i), E_op.maps[a][i])] for i in range(P.rank(a))] for a in A.objects}
    M = RightModule(A, P.gens, rels, P.action, name, P.base)
    section = ModuleHom(M, P, E_op.maps, "s")
    retraction = ModuleHom(P, M, {a: [P.gen(a, i) for i in range(P.rank(a))] for a in A.objects}, "r")
    return FgpWitness(M, objects, section, retraction, entries)


def free_witness(A: Algebroid, objects: Sequence, name: str = None) -> FgpWitness:
    """⊕Hom(−, c_i) itself, with the identity witness."""
    P = free_sum(A, tuple(objects))
    if name:
        P.name = name
    one = identity_module_hom(P)
    return FgpWitness(P, tuple(objects), one, one)


def witness_sum(*ws: FgpWitness) -> FgpWitness:
    """ℰ₁⊕ℰ₂ with the block-diagonal witness.

    ⊕Hom(−, c_i) over the concatenated objects lists its generators in the same
    order as the direct sum of the separate ambients, so the blocks line up.
    """
    E = direct_sum(*(w.module for w in ws))
    objects = sum((w.objects for w in ws), ())
    P = free_sum(E.A, objects)

    def block(maps_of, width_of):
        out = {}
        for a in E.A.objects:
            widths = [width_of(w, a) for w in ws]
            imgs = []
            for t, w in enumerate(ws):
                off = sum(widths[:t])
                for v in maps_of(w)[a]:
                    full = [E.base(0)] * sum(widths)
                    full[off:off + len(v)] = v
                    imgs.append(full)
            out[a] = imgs
        return out

    s = ModuleHom(E, P, block(lambda w: w.section.maps, lambda w, a: w.ambient.rank(a)), "s")
    r = ModuleHom(P, E, block(lambda w: w.retraction.maps, lambda w, a: w.module.rank(a)), "r")
    entries, off = {}, 0
    for w in ws:
        for (i, j), e in w.entries.items():
            entries[(i + off, j + off)] = e
        off += len(w.objects)
    return FgpWitness(E, objects, s, r, entries)


# ---------------------------------------------------------------------------
# bimodules and ⊗_𝒜


class Bimodule:
    """𝓕: 𝒜 → 𝓛(ℬ): right ℬ-modules 𝓕(−, a) and, for x: a → a', maps 𝓕(−, a) → 𝓕(−, a')."""

    def __init__(self, A: Algebroid, B: Algebroid, modules: Dict[Any, RightModule], maps: Dict[Any, ModuleHom],
                 name: str = "𝓕"):
        self.A, self.B, self.name = A, B, name
        self.modules = dict(modules)
        self.maps = dict(maps)
        for a in A.objects:
            if self.modules[a].A != B:
                raise EndpointError(f"𝓕(−,{a!r}) is not a module over {B.name}")
        for k in A.all_keys():
            a, a2 = A.key_ends(k)
            if k not in self.maps:
                M, N = self.modules[a], self.modules[a2]
                self.maps[k] = ModuleHom(M, N, {}, format_key(k))

    def apply(self, x: Elem, b, v: Vector) -> Vector:
        """x·η for x: a → a' and η ∈ 𝓕(b, a)."""
        N = self.modules[x.target]
        out = N.zero(b)
        for k, c in x.coeffs.items():
            _axpy(out, _scalar(c, N.base), self.maps[k].apply(b, v))
        return out

    def check(self, limit: int = 5) -> List[Failure]:
        fails = []
        for a, M in self.modules.items():
            fails += M.check(limit)
        for k, T in self.maps.items():
            fails += T.check(limit)
        A = self.A
        for ky, kx in A.composable_pairs():
            a = A.key_ends(kx)[0]
            c = A.key_ends(ky)[1]
            yx = A.basis(ky) @ A.basis(kx)
            M, N = self.modules[a], self.modules[c]
            for b in self.B.objects:
                for i in range(M.rank(b)):
                    g = M.gen(b, i)
                    lhs = self.maps[ky].apply(b, self.maps[kx].apply(b, g))
                    if not N.equal(b, lhs, self.apply(yx, b, g)):
                        fails.append(Failure("functoriality", f"𝓕({format_key(ky)})𝓕({format_key(kx)}) ≠ 𝓕({format_key(ky)}∘{format_key(kx)})",
                                             {"y": format_key(ky), "x": format_key(kx), "object": str(b)}))
                        break
            if len(fails) >= limit:
                break
        return fails[:limit]


def unit_bimodule(A: Algebroid) -> Bimodule:
    """𝒜 as an (𝒜, 𝒜)-bimodule: 𝓕(−, a) = Hom(−, a), x acting by postcomposition."""
    return pushforward_bimodule(_identity(A))


def _identity(A: Algebroid) -> Homomorphism:
    return Homomorphism(A, A, {a: a for a in A.objects}, {k: A.basis(k) for k in A.all_keys()}, "id")


def pushforward_bimodule(f: Homomorphism) -> Bimodule:
    """ℬ as an (𝒜, ℬ)-bimodule through f: 𝓕(−, a) = Hom(−, f(a)), x acting by f(x)∘."""
    A, B = f.source, f.target
    mods = {a: representable(B, f.obj(a)) for a in A.objects}
    maps = {}
    for k in A.all_keys():
        a, a2 = A.key_ends(k)
        M, N = mods[a], mods[a2]
        fx = f(A.basis(k))
        imgs = {}
        for b in B.objects:
            rows = []
            for kb in M.gens[b]:
                v = N.zero(b)
                prod = fx @ B.basis(kb)
                for z, c in prod.coeffs.items():
                    v[N.gens[b].index(z)] += _scalar(c, N.base)
                rows.append(v)
            imgs[b] = rows
        maps[k] = ModuleHom(M, N, imgs, f"{f.name}({format_key(k)})∘")
    return Bimodule(A, B, mods, maps, f"{B.name}_{f.name}")


@dataclass
class TensorModule:
    """ℰ ⊗_𝒜 𝓕 with the generator bookkeeping needed to name elements η⊗ξ."""

    module: RightModule
    E: RightModule
    F: Bimodule
    index: Dict[Any, Dict[tuple, int]]

    def pure(self, b, a, eta: Vector, xi: Vector) -> Vector:
        """The class of η ⊗ ξ with η ∈ ℰ(a), ξ ∈ 𝓕(b, a)."""
        out = self.module.zero(b)
        base = self.module.base
        for i, ci in enumerate(eta):
            if not ci:
                continue
            for j, cj in enumerate(xi):
                if cj:
                    out[self.index[b][(a, i, j)]] += base(ci) * base(cj)
        return out


def tensor_over_A(E: RightModule, F: Bimodule, name: str = None) -> TensorModule:
    """ℰ ⊗_𝒜 𝓕 presented by generator pairs modulo ℰ-relations, 𝓕-relations and (η, xξ) ∼ (ηx, ξ).

    The result is computed over the base ring of ℬ; ℰ's data are pushed along the
    canonical map (Z → Z/m or Z → Q), which is harmless since every 𝓕(b, a) is
    already a module over that ring.
    """
    A, B = F.A, F.B
    if E.A != A:
        raise EndpointError(f"ℰ is a module over {E.A.name}, the bimodule starts at {A.name}")
    base = B.base
    gens, index = {}, {}
    for b in B.objects:
        gens[b] = [(a, E.gens[a][i], F.modules[a].gens[b][j])
                   for a in A.objects for i in range(E.rank(a)) for j in range(F.modules[a].rank(b))]
        index[b] = {}
        t = 0
        for a in A.objects:
            for i in range(E.rank(a)):
                for j in range(F.modules[a].rank(b)):
                    index[b][(a, i, j)] = t
                    t += 1
    rels = {}
    for b in B.objects:
        n = len(gens[b])
        rows = []
        for a in A.objects:
            Fa = F.modules[a]
            for row in E.relations[a]:
                for j in range(Fa.rank(b)):
                    v = [base(0)] * n
                    for i, c in enumerate(row):
                        if c:
                            v[index[b][(a, i, j)]] += base(c)
                    rows.append(v)
            for row in Fa.relations[b]:
                for i in range(E.rank(a)):
                    v = [base(0)] * n
                    for j, c in enumerate(row):
                        if c:
                            v[index[b][(a, i, j)]] += base(c)
                    rows.append(v)
        for k in A.all_keys():
            a, a2 = A.key_ends(k)
            Fa = F.modules[a]
            for i in range(E.rank(a2)):
                eta_x = E.act_key(k, E.gen(a2, i))
                for j in range(Fa.rank(b)):
                    v = [base(0)] * n
                    for i2, c in enumerate(eta_x):
                        if c:
                            v[index[b][(a, i2, j)]] += base(c)
                    x_xi = F.maps[k].apply(b, Fa.gen(b, j))
                    for j2, c in enumerate(x_xi):
                        if c:
                            v[index[b][(a2, i, j2)]] -= base(c)
                    if any(v):
                        rows.append(v)
        rels[b] = rows
    action = {}
    for ky in B.all_keys():
        b, b2 = B.key_ends(ky)
        mat = []
        for (a, gi, gj) in gens[b2]:
            Fa = F.modules[a]
            i = E.gens[a].index(gi)
            j = Fa.gens[b2].index(gj)
            v = [base(0)] * len(gens[b])
            for j2, c in enumerate(Fa.act_key(ky, Fa.gen(b2, j))):
                if c:
                    v[index[b][(a, i, j2)]] += base(c)
            mat.append(v)
        action[ky] = mat
    M = RightModule(B, gens, rels, action, name or f"{E.name}⊗_{A.name}{F.name}", base)
    return TensorModule(M, E, F, index)


def unit_isomorphism(E: RightModule):
    """ℰ ⊗_𝒜 𝒜 ≅ ℰ: returns (ℰ⊗𝒜, φ: η⊗x ↦ ηx, ψ: η ↦ η⊗1) for unital 𝒜."""
    A = E.A
    if not A.is_unital:
        raise ValueError("the unit isomorphism needs a unital algebroid")
    T = tensor_over_A(E, unit_bimodule(A))
    M = T.module
    phi = {}
    for b in A.objects:
        imgs = []
        for (a, gi, key) in M.gens[b]:
            i = E.gens[a].index(gi)
            imgs.append(E.act_key(key, E.gen(a, i)))
        phi[b] = imgs
    psi = {}
    for b in A.objects:
        Rb = T.F.modules[b]
        one = Rb.zero(b)
        for k, c in A.unit_coeffs(b).items():
            one[Rb.gens[b].index(k)] += _scalar(c, M.base)
        psi[b] = [T.pure(b, b, E.gen(b, i), one) for i in range(E.rank(b))]
    return T, ModuleHom(M, E, phi, "φ"), ModuleHom(E, M, psi, "ψ")


def verify_isomorphism(phi: ModuleHom, psi: ModuleHom) -> List[Failure]:
    fails = phi.check() + psi.check()
    if not phi.then(psi).is_identity():
        fails.append(Failure("iso", f"{psi.name}∘{phi.name} is not the identity", {}))
    if not psi.then(phi).is_identity():
        fails.append(Failure("iso", f"{phi.name}∘{psi.name} is not the identity", {}))
    return fails


def pushforward(E: RightModule, f: Homomorphism) -> TensorModule:
    """f_*ℰ = ℰ ⊗_𝒜 ℬ."""
    return tensor_over_A(E, pushforward_bimodule(f), f"{f.name}_*{E.name}")


def pushforward_witness(w: FgpWitness, f: Homomorphism) -> FgpWitness:
    """The summand witness of f_*ℰ inside ⊕Hom(−, f(c_i)), with s'(η⊗k) = f(s(η))∘k."""
    A, B = f.source, f.target
    T = pushforward(w.module, f)
    M = T.module
    objs = tuple(f.obj(c) for c in w.objects)
    P2 = free_sum(B, objs)
    n = len(objs)
    Pa = w.ambient
    sec = {}
    for b in B.objects:
        offs2 = _slot_offsets(P2, b, n)
        imgs = []
        for (a, gi, kb) in M.gens[b]:
            i = w.module.gens[a].index(gi)
            sv = w.section.apply(a, w.module.gen(a, i))
            v = P2.zero(b)
            for t, (slot, key) in enumerate(Pa.gens[a]):
                if not sv[t]:
                    continue
                prod = f(A.basis(key)) @ B.basis(kb)
                for z, c in prod.coeffs.items():
                    v[offs2[slot] + B.hom_keys(b, objs[slot]).index(z)] += M.base(sv[t]) * _scalar(c, M.base)
            imgs.append(v)
        sec[b] = imgs
    ret = {}
    for b in B.objects:
        imgs = []
        for slot, kb in P2.gens[b]:
            c0 = w.objects[slot]
            offs = _slot_offsets(Pa, c0, n)
            u = Pa.zero(c0)
            for k, cu in A.unit_coeffs(c0).items():
                u[offs[slot] + A.hom_keys(c0, c0).index(k)] += _scalar(cu, Pa.base)
            eta = w.retraction.apply(c0, u)
            Fc = T.F.modules[c0]
            xi = Fc.zero(b)
            xi[Fc.gens[b].index(kb)] = M.base(1)
            imgs.append(T.pure(b, c0, eta, xi))
        ret[b] = imgs
    s = ModuleHom(M, P2, sec, "s'")
    r = ModuleHom(P2, M, ret, "r'")
    entries = {}
    for (i, j), e in w.entries.items():
        entries[(i, j)] = f(e)
    return FgpWitness(M, objs, s, r, entries)


# ---------------------------------------------------------------------------
# module smash and path components


def module_class(w: FgpWitness, ground: BaseRing = None):
    """The degree-0 representative R → 𝒜⊕, 1 ↦ e (the corner embedding of End(ℰ)).

    ``ground`` is the ring R the algebroids are algebras over; it defaults to the
    base ring of 𝒜 and differs from it only after a base change such as Z → Z/5.
    """
    from .kk import from_homomorphism
    A = w.module.A
    R = ring_algebroid(ground or A.base)
    e = w.idempotent()
    hom = Homomorphism(R, e.space, {"*": w.objects}, {"1": e}, f"[{w.module.name}]")
    return from_homomorphism(hom)


def module_smash(w: FgpWitness, alpha, ground: BaseRing = None):
    """ℰ∧α = [ℰ] ♯ α: J^p R → ℬ⊕^{S^n}."""
    from .kk import sharp
    fails = w.verify()
    if fails:
        raise ValueError(f"f.g.p. witness fails: {fails[0].detail}")
    if alpha.source != w.module.A:
        raise EndpointError(f"ℰ is a module over {w.module.A.name}, α starts at {alpha.source.name}")
    out = sharp(module_class(w, ground), alpha)
    out.name = f"{w.module.name}∧{alpha.name}"
    return out


def path_component(A: Algebroid, a, symmetric: bool = True) -> Algebroid:
    """𝒜|_Or(a): objects reachable through nonzero hom-modules.

    With ``symmetric`` (the default) Hom(x, y) ≠ 0 or Hom(y, x) ≠ 0 links x and y and
    the closure is taken; otherwise only the raw condition Hom(a, b) ≠ 0 is used.
    """
    if symmetric:
        seen, todo = {a}, [a]
        while todo:
            x = todo.pop()
            for y in A.objects:
                if y not in seen and (A.hom_keys(x, y) or A.hom_keys(y, x)):
                    seen.add(y)
                    todo.append(y)
        objs = [b for b in A.objects if b in seen]
    else:
        objs = [b for b in A.objects if A.hom_keys(a, b)]
    return full_subalgebroid(A, objs, f"{A.name}|Or({a})")


def full_subalgebroid(A: Algebroid, objects: Sequence, name: str = None) -> Algebroid:
    keep = set(objects)
    basis = {k: ends for k, ends in A.basis_ends.items() if ends[0] in keep and ends[1] in keep}
    structure = {pair: r for pair, r in A.structure.items() if pair[0] in basis and pair[1] in basis}
    units = None if A.units is None else {x: A.units[x] for x in objects}
    return Algebroid(name or A.name, A.base, [x for x in A.objects if x in keep], basis, structure, units)


def components(A: Algebroid) -> List[tuple]:
    out, seen = [], set()
    for a in A.objects:
        if a in seen:
            continue
        comp = path_component(A, a).objects
        seen.update(comp)
        out.append(tuple(comp))
    return out


__all__ = [
    "RightModule", "ModuleHom", "identity_module_hom", "representable", "direct_sum", "free_sum",
    "matrix_action", "FgpWitness", "from_idempotent", "free_witness", "witness_sum", "Bimodule",
    "unit_bimodule", "pushforward_bimodule", "TensorModule", "tensor_over_A", "unit_isomorphism",
    "verify_isomorphism", "pushforward", "pushforward_witness", "module_class", "module_smash",
    "path_component", "full_subalgebroid", "components",
]
