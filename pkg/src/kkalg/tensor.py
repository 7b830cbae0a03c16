"""The tensor algebroid T𝒜, its ideal J𝒜, the T ⊣ F adjunction and classifying maps.

T𝒜 is never materialised.  A basis key of T(C) is a *path*: a nonempty tuple
of atoms ``(key of C, monomial in the inner variables of C)`` read from the
source to the target, so ``x1⊗x2`` with x1: a → b and x2: b → c has key
``(x1, x2)`` and π sends it to ``x2∘x1``.  Inner variables let T act on
polynomial extensions like 𝒜^{S¹}, whose R-basis is (key, monomial).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, List, Optional

from .core import (
    Elem,
    EndpointError,
    Failure,
    Homomorphism,
    InfiniteBasisError,
    LazyHomomorphism,
    Space,
    as_object_map,
    format_key,
)
from .completion import TensorProduct
from .linalg import nullspace, in_span, rank as mat_rank
from .rings import Poly, mono_split, poly_ring, scalar_ring, natural_key


class TensorAlgebroid(Space):
    def __init__(self, C: Space, inner=None):
        self.C = C
        self.inner = frozenset(C.inner_vars if inner is None else inner)
        self.base = C.base
        self.name = f"T({C.name})"
        self.inner_vars = frozenset()
        self._one = scalar_ring(C.base).one
        self._sig = (C, self.inner)
        self._pi_cache: dict = {}

    @property
    def objects(self):
        return self.C.objects

    def has_object(self, a):
        return self.C.has_object(a)

    def key_ends(self, path):
        if not isinstance(path, tuple) or not path:
            raise KeyError(f"{path!r} is not a path")
        return self.C.key_ends(path[0][0])[0], self.C.key_ends(path[-1][0])[1]

    def compose_keys(self, ky, kx):
        if self.key_ends(kx)[1] != self.key_ends(ky)[0]:
            raise EndpointError("paths are not composable")
        return {kx + ky: self._one}

    def hom_keys(self, a, b):
        raise InfiniteBasisError("T𝒜 has infinite rank; use paths_upto")

    def render_key(self, path) -> str:
        pieces = []
        for k, mono in path:
            ks = self.C.render_key(k)
            if len(path) > 1 and ("⊗" in ks or " " in ks):
                ks = f"[{ks}]"
            if mono:
                ks += "·" + "*".join(v if e == 1 else f"{v}^{e}" for v, e in mono)
            pieces.append(ks)
        return "⊗".join(pieces)

    # -- atoms
    def atom_elem(self, atom) -> Elem:
        k, mono = atom
        a, b = self.C.key_ends(k)
        if mono:
            c = Poly(poly_ring(self.base, [v for v, _ in mono]), {mono: 1})
        else:
            c = self._one
        return Elem._raw(self.C, a, b, {k: c})

    def path_product(self, path) -> Elem:
        """π of a single path: x_k ∘ ⋯ ∘ x_1."""
        got = self._pi_cache.get(path)
        if got is None:
            if len(path) == 1:
                got = self.atom_elem(path[0])
            else:
                got = self.atom_elem(path[-1]) @ self.path_product(path[:-1])
            if len(self._pi_cache) < 200000:
                self._pi_cache[path] = got
        return got

    def paths_upto(self, a, b, D: int) -> list:
        """All paths a → b of basis keys (no inner monomials) of length 1..D."""
        objs = self.C.objects
        out = []
        frontier = [((), a)]
        for length in range(1, D + 1):
            nxt = []
            for path, end in frontier:
                for c in objs:
                    for k in self.C.hom_keys(end, c):
                        p = path + ((k, ()),)
                        nxt.append((p, c))
                        if c == b:
                            out.append(p)
            frontier = nxt
        return out


def sigma(x: Elem, T: TensorAlgebroid) -> Elem:
    """σ: 𝒜 → T𝒜, the inclusion as paths of length one."""
    if x.space != T.C:
        raise TypeError(f"σ expects elements of {T.C.name}")
    coeffs = {}
    for k, p in x.coeffs.items():
        if T.inner:
            for inner, q in p.split(T.inner).items():
                coeffs[((k, inner),)] = q
        else:
            coeffs[((k, ()),)] = p
    return Elem._raw(T, x.source, x.target, coeffs)


def pi(e: Elem, T: TensorAlgebroid = None) -> Elem:
    """π: T𝒜 → 𝒜, x1⊗⋯⊗xk ↦ xk⋯x1."""
    T = T or e.space
    out = T.C.zero(e.source, e.target)
    for path, c in e.coeffs.items():
        out = out + T.path_product(path).scale(c)
    return out


def tensor_compose(e1: Elem, e2: Elem) -> Elem:
    """Concatenate e1 then e2 (the composite e2∘e1 in T𝒜)."""
    if e1.target != e2.source:
        raise EndpointError("tensor_compose needs target(e1) = source(e2)")
    return e2 @ e1


def tensor_path(T: TensorAlgebroid, elems: Iterable[Elem]) -> Elem:
    """x1⊗⋯⊗xk (multilinear), with x1 starting at the source."""
    elems = list(elems)
    out = sigma(elems[0], T)
    for x in elems[1:]:
        out = tensor_compose(out, sigma(x, T))
    return out


def in_J(e: Elem) -> bool:
    return pi(e).is_zero()


def j_element(e: Elem) -> Elem:
    """Return e after checking π(e) = 0."""
    if not in_J(e):
        raise ValueError(f"{e} is not in J (π = {pi(e)})")
    return e


# ---------------------------------------------------------------------------
# the adjunction


class ModuloidMap(LazyHomomorphism):
    """R-linear map compatible with objects but not with composition."""

    moduloid = True


def adjunction_H(beta, T: TensorAlgebroid, target: Space = None, name: str = None) -> LazyHomomorphism:
    """H(β): T𝒜 → ℬ, x1⊗⋯⊗xk ↦ β(xk)∘⋯∘β(x1)."""
    target = target or beta.target
    cache: dict = {}

    def atom_image(atom):
        img = cache.get(atom)
        if img is None:
            img = beta(T.atom_elem(atom))
            cache[atom] = img
        return img

    def fn(e: Elem) -> Elem:
        out = target.zero(beta.obj(e.source), beta.obj(e.target))
        for path, c in e.coeffs.items():
            acc = atom_image(path[0])
            for atom in path[1:]:
                if acc.is_zero():
                    acc = None
                    break
                acc = atom_image(atom) @ acc
            if acc is not None:
                out = out + acc.scale(c)
        return out

    return LazyHomomorphism(T, target, fn, beta.obj, name or f"H({getattr(beta, 'name', 'β')})")


def adjunction_G(alpha, T: TensorAlgebroid, name: str = None) -> ModuloidMap:
    """G(α) = α∘σ as a moduloid map 𝒜 → Fℬ."""
    return ModuloidMap(T.C, alpha.target, lambda x: alpha(sigma(x, T)), alpha.obj, name or f"G({alpha.name})")


def functor_T(f, T_src: TensorAlgebroid, T_tgt: TensorAlgebroid, name: str = None) -> LazyHomomorphism:
    """T(f) = H(σ∘f): x1⊗⋯⊗xk ↦ f(x1)⊗⋯⊗f(xk)."""
    beta = ModuloidMap(T_src.C, T_tgt, lambda x: sigma(f(x), T_tgt), f.obj, f"σ∘{f.name}")
    return adjunction_H(beta, T_src, T_tgt, name or f"T({f.name})")


def sigma_map(T: TensorAlgebroid) -> ModuloidMap:
    return ModuloidMap(T.C, T, lambda x: sigma(x, T), lambda a: a, "σ")


def pi_map(T: TensorAlgebroid) -> LazyHomomorphism:
    return LazyHomomorphism(T, T.C, lambda e: pi(e, T), lambda a: a, "π")


# ---------------------------------------------------------------------------
# iterated J


class JTower:
    """T⁰ = C, T^{k+1} = T(T^k), with projections p_k onto J^k ⊂ T^k."""

    def __init__(self, C: Space, depth: int = 3, inner=None):
        if depth > 4:
            raise ValueError("J-tower depth limit is 4")
        self.C = C
        self.depth = depth
        self.levels: List[Space] = [C]
        for k in range(depth):
            prev = self.levels[-1]
            self.levels.append(TensorAlgebroid(prev, inner if k == 0 else None))
        self._proj_cache = [dict() for _ in range(depth + 1)]

    def T(self, k: int) -> Space:
        if k > self.depth:
            raise ValueError(f"depth {k} exceeds the tower depth {self.depth}")
        return self.levels[k]

    def sigma(self, x: Elem, k: int) -> Elem:
        """σ: T^{k-1} → T^k."""
        return sigma(x, self.T(k))

    def pi(self, e: Elem, k: int) -> Elem:
        """π: T^k → T^{k-1}."""
        return pi(e, self.T(k))

    def _project_atom(self, atom, k: int) -> Elem:
        """p_{k}(atom) for an atom of T^{k+1}, i.e. a key of T^k."""
        cache = self._proj_cache[k]
        got = cache.get(atom)
        if got is None:
            got = self.project(self.T(k + 1).atom_elem(atom), k)
            cache[atom] = got
        return got

    def project(self, e: Elem, k: int) -> Elem:
        """p_k: T^k → T^k, an idempotent with image J^k."""
        if k == 0:
            return e
        T = self.T(k)
        if k == 1:
            return e - sigma(pi(e, T), T)
        # T(p_{k-1}) then (id - σπ)
        lifted = T.zero(e.source, e.target)
        for path, c in e.coeffs.items():
            acc = None
            for atom in path:
                piece = sigma(self._project_atom(atom, k - 1), T)
                acc = piece if acc is None else piece @ acc
                if acc.is_zero():
                    break
            if not acc.is_zero():
                lifted = lifted + acc.scale(c)
        return lifted - sigma(pi(lifted, T), T)

    def contains(self, e: Elem, k: int) -> bool:
        if k == 0:
            return True
        if e.space != self.T(k):
            return False
        return self.project(e, k) == e

    def lift(self, f, k: int, tower_tgt: "JTower", name: str = None):
        """J^k(f): J^k C → J^k D for f: C → D, evaluated through the projections."""
        if k == 0:
            return f
        prev = self.lift(f, k - 1, tower_tgt)
        Tsrc, Ttgt = self.T(k), tower_tgt.T(k)

        def on_atom(x: Elem) -> Elem:
            return sigma(prev(self.project(x, k - 1)), Ttgt)

        beta = ModuloidMap(Tsrc.C, Ttgt, on_atom, f.obj)
        return adjunction_H(beta, Tsrc, Ttgt, name or f"J^{k}({f.name})")


def iterate_J(C: Space, k: int, inner=None) -> JTower:
    if k > 3:
        raise ValueError("iterate_J supports depth at most 3")
    return JTower(C, max(k, 1), inner)


def basic_J_element(T: TensorAlgebroid, x: Elem, y: Elem) -> Elem:
    """x⊗y − σ(y∘x) for composable x: a → b, y: b → c."""
    return tensor_path(T, [x, y]) - sigma(y @ x, T)


def sample_J(tower: JTower, k: int, rng: random.Random, count: int, max_terms: int = 2) -> list:
    """Random elements of J^k, built from x⊗y − σ(yx) with x, y in J^{k-1}."""
    C = tower.C
    out = []
    if k == 1:
        keys = [(ky, kx) for ky, kx in C.composable_pairs()]
        for _ in range(count):
            total = None
            for _ in range(rng.randint(1, max_terms)):
                ky, kx = rng.choice(keys)
                x, y = C.basis(kx), C.basis(ky)
                a = rng.choice([1, -1, 2, 3])
                e = basic_J_element(tower.T(1), x, y).scale(a)
                if rng.random() < 0.3:
                    # longer paths through a third factor when possible
                    for kz in C.hom_keys(y.target, y.target) or []:
                        z = C.basis(kz)
                        e = e + tensor_path(tower.T(1), [x, y, z]) - sigma(z @ y @ x, tower.T(1))
                        break
                if total is None or (total.source, total.target) == (e.source, e.target):
                    total = e if total is None else total + e
            out.append(total)
        return out
    lower = sample_J(tower, k - 1, rng, max(4, count // 4), 1)
    T = tower.T(k)
    pairs = [(u, v) for u in lower for v in lower if u.target == v.source]
    if not pairs:
        raise ValueError("no composable samples")
    for _ in range(count):
        u, v = rng.choice(pairs)
        out.append(basic_J_element(T, u, v).scale(rng.choice([1, -1, 2])))
    return out


# ---------------------------------------------------------------------------
# F-split extensions


@dataclass
class FSplitExtension:
    """0 → 𝓘 → 𝓔 → 𝒜 → 0 with a moduloid splitting s.

    The ideal is realised inside the total space: ``in_ideal`` decides
    membership and ``i`` is the inclusion.  ``graded(a, b, D)`` returns finite
    R-spanning sets (E_D, A_D, I_D) used to certify exactness up to D.
    """

    name: str
    total: Space
    quotient: Space
    j: Callable
    s: Callable
    in_ideal: Callable[[Elem], bool]
    ideal_name: str = "I"
    graded: Optional[Callable] = None
    i: Callable = field(default=lambda e: e)

    def check_splitting(self, elements: Iterable[Elem]) -> list:
        fails = []
        for x in elements:
            if self.j(self.s(x)) != x:
                fails.append(Failure("j∘s = id", f"j(s({x})) = {self.j(self.s(x))}", {"x": str(x)}))
        return fails

    def certify(self, pairs, D: int) -> list:
        if self.graded is None:
            raise ValueError(f"{self.name} has no graded description for certification")
        fails = []
        for a, b in pairs:
            E, A, I = self.graded(a, b, D)
            fails += certify_exact(self, E, A, I, (a, b), D)
        return fails


def _coords(elems: List[Elem]):
    index = {}
    for e in elems:
        for atom in e.atoms():
            if atom not in index:
                index[atom] = len(index)
    vecs = []
    for e in elems:
        v = [0] * len(index)
        for atom, c in e.atoms().items():
            v[index[atom]] = c
        vecs.append(v)
    return index, vecs


def _vector(e: Elem, index: dict):
    v = [0] * len(index)
    for atom, c in e.atoms().items():
        if atom not in index:
            return None
        v[index[atom]] = c
    return v


def certify_exact(ext: FSplitExtension, E: List[Elem], A: List[Elem], I: List[Elem], pair, D: int) -> list:
    """Exactness of 0 → I → E → A → 0 on the truncated spans, by exact linear algebra."""
    base = ext.total.base
    fails = []
    tag = {"pair": [format_key(pair[0]), format_key(pair[1])], "degree": D}
    # I ⊆ ker j, and I really is the ideal
    for g in I:
        if not ext.in_ideal(ext.i(g)):
            fails.append(Failure("ideal membership", f"generator {g} fails the ideal predicate", dict(tag, element=str(g))))
        if not ext.j(ext.i(g)).is_zero():
            fails.append(Failure("j∘i = 0", f"j(i({g})) ≠ 0", dict(tag, element=str(g))))
    # j∘s = id on the quotient basis (surjectivity of j)
    fails += [Failure(f.check, f.detail, dict(tag, **f.witness)) for f in ext.check_splitting(A)]
    # ker j ∩ span(E) ⊆ span(I)
    images = [ext.j(e) for e in E]
    aindex, _ = _coords(images + A)
    jmat_cols = [_vector(img, aindex) for img in images]
    if E:
        jmat = [[col[r] for col in jmat_cols] for r in range(len(aindex))] if aindex else []
        kernel = nullspace(jmat, base, ncols=len(E)) if jmat else [[1 if i == j else 0 for j in range(len(E))] for i in range(len(E))]
    else:
        kernel = []
    Ii = [ext.i(g) for g in I]
    eindex, ivecs = _coords(Ii + E)
    ivecs = [_vector(g, eindex) for g in Ii]
    for vec in kernel:
        el = ext.total.zero(E[0].source, E[0].target)
        for c, e in zip(vec, E):
            if c:
                el = el + e.scale(c)
        v = _vector(el, eindex)
        if not in_span(ivecs, v, base):
            fails.append(Failure("exactness at E", f"{el} is in ker j but not in {ext.ideal_name}", dict(tag, element=str(el))))
            break
    return fails


def universal_extension(C: Space) -> FSplitExtension:
    T = TensorAlgebroid(C)

    def graded(a, b, D):
        paths = T.paths_upto(a, b, D)
        E = [T.basis(p) for p in paths]
        A = C.hom_basis(a, b)
        I = [T.basis(p) - sigma(T.path_product(p), T) for p in paths if len(p) >= 2]
        return E, A, I

    return FSplitExtension(
        name=f"universal extension of {C.name}",
        total=T,
        quotient=C,
        j=lambda e: pi(e, T),
        s=lambda x: sigma(x, T),
        in_ideal=lambda e: pi(e, T).is_zero(),
        ideal_name=f"J({C.name})",
        graded=graded,
    )


def classifying_map(ext: FSplitExtension, check: bool = True, name: str = None) -> LazyHomomorphism:
    """γ = H(s) restricted to J(quotient); optionally checks each value is in the ideal."""
    T = TensorAlgebroid(ext.quotient)
    s_obj = getattr(ext.s, "obj", lambda a: a)
    beta = ModuloidMap(ext.quotient, ext.total, ext.s, s_obj, "s")
    H = adjunction_H(beta, T, ext.total)

    def fn(e: Elem) -> Elem:
        v = H(e)
        if check and not ext.in_ideal(v):
            raise ValueError(f"classifying map value {v} is not in {ext.ideal_name}: corrupted extension")
        return v

    return LazyHomomorphism(T, ext.total, fn, s_obj, name or f"γ[{ext.name}]")


def ufsplit_square(ext: FSplitExtension, t_samples: Iterable[Elem], j_samples: Iterable[Elem]) -> list:
    """Both squares of the classifying-map diagram, plus H(s)∘σ = s, on samples."""
    T = TensorAlgebroid(ext.quotient)
    s_obj = getattr(ext.s, "obj", lambda a: a)
    H = adjunction_H(ModuloidMap(ext.quotient, ext.total, ext.s, s_obj, "s"), T, ext.total)
    fails = []
    for e in t_samples:
        if ext.j(H(e)) != pi(e, T):
            fails.append(Failure("right square", f"j(H(s)(e)) ≠ π(e) for e = {e}", {"element": str(e)}))
    for e in j_samples:
        v = H(e)
        if not ext.in_ideal(v):
            fails.append(Failure("left square", f"γ(e) = {v} is not in {ext.ideal_name}", {"element": str(e)}))
        elif ext.i(v) != H(e):
            fails.append(Failure("left square", "i∘γ ≠ H(s) on J", {"element": str(e)}))
    return fails


def j_tensor_extension(A: Space, Cc: Space) -> FSplitExtension:
    """0 → J𝒜⊗𝒞 → T𝒜⊗𝒞 → 𝒜⊗𝒞 → 0 with splitting σ⊗1."""
    T = TensorAlgebroid(A)
    E = TensorProduct(T, Cc)
    Q = TensorProduct(A, Cc)

    def j(e: Elem) -> Elem:
        out = Q.zero(e.source, e.target)
        for (path, ck), c in e.coeffs.items():
            x = T.path_product(path)
            for k, d in x.coeffs.items():
                out = out + Q.basis((k, ck)).scale(c * d)
        return out

    def s(x: Elem) -> Elem:
        coeffs = {}
        for (k, ck), c in x.coeffs.items():
            for key, d in sigma(A.basis(k), T).coeffs.items():
                coeffs[(key, ck)] = c * d
        return Elem._raw(E, x.source, x.target, coeffs)

    def in_ideal(e: Elem) -> bool:
        groups = {}
        for (path, ck), c in e.coeffs.items():
            groups.setdefault(ck, {})[path] = c
        for ck, terms in groups.items():
            if not pi(Elem._raw(T, e.source[0], e.target[0], terms), T).is_zero():
                return False
        return True

    def graded(ab, ab2, D):
        (a, c), (b, d) = ab, ab2
        paths = T.paths_upto(a, b, D)
        cks = Cc.hom_keys(c, d)
        Es = [E.basis((p, ck)) for p in paths for ck in cks]
        As = Q.hom_basis(ab, ab2)
        Is = []
        for p in paths:
            if len(p) < 2:
                continue
            jp = T.basis(p) - sigma(T.path_product(p), T)
            for ck in cks:
                Is.append(Elem._raw(E, ab, ab2, {(path, ck): c for path, c in jp.coeffs.items()}))
        return Es, As, Is

    return FSplitExtension(
        name=f"J-tensor extension of {A.name} by {Cc.name}",
        total=E,
        quotient=Q,
        j=j,
        s=s,
        in_ideal=in_ideal,
        ideal_name=f"J({A.name})⊗{Cc.name}",
        graded=graded,
    )


def split_coefficients(p: Poly, inner) -> dict:
    return {m: q for m, q in p.split(inner).items()}


__all__ = [
    "TensorAlgebroid", "sigma", "pi", "tensor_compose", "tensor_path", "in_J", "j_element",
    "ModuloidMap", "adjunction_H", "adjunction_G", "functor_T", "JTower", "iterate_J",
    "basic_J_element", "sample_J", "FSplitExtension", "certify_exact", "universal_extension",
    "classifying_map", "ufsplit_square", "j_tensor_extension", "mono_split",
]
