"""KK representatives, ⊕, η and ε, the ♯-product, Δ, shifts, the W-homotopy and HOM simplices.

A representative α: J^p𝒜 → ℬ⊕^{S^n} is stored with its J-depth p and its
sphere coordinates ("t1", ..., "tn") separately; the KK-spectrum shapes are
p = 2n, but intermediate constructions (η once, ε(β) as a J² → S² map) are
useful and allowed.  Values live in ``PolyPower(ℬ⊕, coords, "sphere")``, or
in ℬ⊕ itself when there are no coordinates.

Nothing here decides equality of KK classes.  Certificates record explicit
homotopies and ``verify_certificate`` replays them on test elements.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

from .completion import AdditiveCompletion, TensorProduct
from .core import (
    Elem,
    EndpointError,
    Failure,
    Homomorphism,
    InfiniteBasisError,
    LazyHomomorphism,
    Space,
    format_key,
)
from .rings import poly_ring
from .simplicial import (
    PolyPower,
    SimplicialPower,
    SubdivisionTower,
    eta as eta_map,
    interchange,
    rehome,
    simplex,
)
from .tensor import JTower, ModuloidMap, adjunction_H, classifying_map, j_tensor_extension, pi, sigma

MAX_DEPTH = 4

_towers: Dict = {}


def tower_of(C: Space) -> JTower:
    """A shared depth-4 J-tower over C (projections are cached per tower)."""
    t = _towers.get(C)
    if t is None:
        t = JTower(C, MAX_DEPTH)
        _towers[C] = t
    return t


def coord_names(n: int, prefix: str = "t") -> tuple:
    return tuple(f"{prefix}{i}" for i in range(1, n + 1))


def value_space(B: Space, coords: Sequence[str]) -> Space:
    comp = B if isinstance(B, AdditiveCompletion) else AdditiveCompletion(B)
    return PolyPower(comp, tuple(coords), "sphere") if coords else comp


def _matrix_part(e: Elem) -> Elem:
    """The ℬ⊕-element underlying a value (coordinates stay in the coefficients)."""
    if isinstance(e.space, PolyPower):
        return e.space.underlying(e)
    return e


# ---------------------------------------------------------------------------
# representatives


@dataclass
class KKRepresentative:
    """α: J^depth 𝒜 → ℬ⊕^{S^n} with n = len(coords)."""

    source: Space
    target: Space
    depth: int
    coords: tuple
    map: Callable[[Elem], Elem]
    obj: Callable
    name: str = "α"
    k: int = 0  # subdivision level of the simplex coordinates (always 0 for maps built here)

    def __post_init__(self):
        if self.depth > MAX_DEPTH:
            raise ValueError(f"J-depth {self.depth} exceeds the limit {MAX_DEPTH}")
        self.coords = tuple(self.coords)
        if self.coords != coord_names(len(self.coords)):
            raise ValueError("sphere coordinates must be t1..tn")

    @property
    def n(self) -> int:
        return len(self.coords)

    @property
    def tower(self) -> JTower:
        return tower_of(self.source)

    @property
    def domain(self) -> Space:
        return self.tower.T(self.depth)

    @property
    def codomain(self) -> Space:
        return value_space(self.target, self.coords)

    @property
    def shape(self) -> str:
        return f"J^{self.depth}{self.source.name} → {self.target.name}⊕^S{self.n}"

    def __call__(self, e: Elem) -> Elem:
        if e.space != self.domain:
            raise TypeError(f"{self.name} expects elements of {self.domain.name}, got {e.space.name}")
        return self.map(e)

    def project(self, e: Elem) -> Elem:
        return self.tower.project(e, self.depth)

    def as_hom(self) -> LazyHomomorphism:
        return LazyHomomorphism(self.domain, self.codomain, self.map, self.obj, self.name)

    def check_on(self, samples: Sequence[Elem], limit: int = 5) -> list:
        """Linearity, multiplicativity and values in the sphere power, on samples."""
        fails = self.as_hom().spot_check(samples, limit)
        cod = self.codomain
        if isinstance(cod, PolyPower):
            for e in samples:
                v = self(e)
                for f in cod.membership_failures(v):
                    fails.append(Failure(f.check, f.detail, dict(f.witness, element=str(e))))
                    break
        return fails


def from_homomorphism(f, name: str = None) -> KKRepresentative:
    """A degree-0 representative from f: 𝒜 → ℬ or f: 𝒜 → ℬ⊕."""
    tgt = f.target
    if isinstance(tgt, AdditiveCompletion):
        return KKRepresentative(f.source, tgt.C, 0, (), f, f.obj, name or f.name)
    comp = AdditiveCompletion(tgt)

    def fn(x: Elem) -> Elem:
        return comp.from_C(f(x))

    obj = lambda a: (f.obj(a),)  # noqa: E731
    try:
        keys = f.source.all_keys()
        mapped = Homomorphism(f.source, comp, obj, {k: fn(f.source.basis(k)) for k in keys}, name or f.name,
                              moduloid=getattr(f, "moduloid", False))
    except InfiniteBasisError:
        mapped = LazyHomomorphism(f.source, comp, fn, obj, name or f.name)
    return KKRepresentative(f.source, tgt, 0, (), mapped, obj, name or f.name)


def identity_rep(A: Space) -> KKRepresentative:
    from .core import identity_hom
    return from_homomorphism(identity_hom(A), f"1_{A.name}")


def zero_rep(A: Space, B: Space, obj, depth: int = 0, coords: tuple = (), name: str = "0") -> KKRepresentative:
    space = value_space(B, coords)
    return KKRepresentative(A, B, depth, coords, lambda e: space.zero(obj(e.source), obj(e.target)), obj, name)


def zero_like(alpha: KKRepresentative) -> KKRepresentative:
    return zero_rep(alpha.source, alpha.target, alpha.obj, alpha.depth, alpha.coords, "0")


def oplus(alpha: KKRepresentative, beta: KKRepresentative) -> KKRepresentative:
    """Block-diagonal sum; object map a ↦ α(a)⊕β(a)."""
    if (alpha.depth, alpha.coords) != (beta.depth, beta.coords):
        raise ValueError(f"⊕ needs equal shapes, got {alpha.shape} and {beta.shape}")
    if alpha.source != beta.source or alpha.target != beta.target:
        raise EndpointError("⊕ needs the same source and target algebroids")
    cod = alpha.codomain
    comp = AdditiveCompletion(alpha.target)

    def fn(e: Elem) -> Elem:
        m = comp.block_diag(_matrix_part(alpha.map(e)), _matrix_part(beta.map(e)))
        return rehome(m, cod)

    obj = lambda a: alpha.obj(a) + beta.obj(a)  # noqa: E731
    return KKRepresentative(alpha.source, alpha.target, alpha.depth, alpha.coords, fn, obj,
                            f"({alpha.name}⊕{beta.name})")


# ---------------------------------------------------------------------------
# η and ε


def eta_step(alpha: KKRepresentative) -> KKRepresentative:
    """η(α): J^{p+1}𝒜 → ℬ⊕^{S^{n+1}}, the classifying map of the path algebroid of α."""
    if alpha.depth + 1 > MAX_DEPTH:
        raise ValueError("eta_step would exceed the J-depth limit")
    var = f"t{alpha.n + 1}"
    tw = alpha.tower
    p = alpha.depth
    e = eta_map(alpha.as_hom(), var, pre=lambda x: tw.project(x, p), name=f"η({alpha.name})")
    cod = value_space(alpha.target, alpha.coords + (var,))

    def fn(x: Elem) -> Elem:
        return rehome(e(x), cod)

    return KKRepresentative(alpha.source, alpha.target, p + 1, alpha.coords + (var,), fn, alpha.obj,
                            f"η({alpha.name})")


def epsilon(alpha: KKRepresentative) -> KKRepresentative:
    """The structure map ε(α) = η(η(α))."""
    out = eta_step(eta_step(alpha))
    out.name = f"ε({alpha.name})"
    return out


def precompose_pi(alpha: KKRepresentative) -> KKRepresentative:
    """α∘π: J^{p+1}𝒜 → J^p𝒜 → ℬ⊕^{S^n} (π restricts to J^{p+1} → J^p)."""
    tw = alpha.tower
    T = tw.T(alpha.depth + 1)
    return KKRepresentative(alpha.source, alpha.target, alpha.depth + 1, alpha.coords,
                            lambda e: alpha.map(pi(e, T)), alpha.obj, f"{alpha.name}∘π")


def permute_sphere(alpha: KKRepresentative, perm: Sequence[int]) -> KKRepresentative:
    """Σ_n acting by permuting the smash factors of S^n = S¹∧⋯∧S¹."""
    if sorted(perm) != list(range(alpha.n)):
        raise ValueError("not a permutation of the sphere coordinates")
    ren = {f"t{i + 1}": f"t{perm[i] + 1}" for i in range(alpha.n)}
    cod = alpha.codomain
    return KKRepresentative(alpha.source, alpha.target, alpha.depth, alpha.coords,
                            lambda e: rehome(alpha.map(e).rename(ren), cod), alpha.obj, f"{list(perm)}·{alpha.name}")


# ---------------------------------------------------------------------------
# the ♯-product


def lift_rep(alpha: KKRepresentative, q: int):
    """J^q(α): J^{p+q}𝒜 → T^q(ℬ⊕^{S^m}), evaluated through the tower projections."""
    src = alpha.tower
    p = alpha.depth
    if p + q > MAX_DEPTH:
        raise ValueError("J-depth limit exceeded")
    tgt = tower_of(alpha.codomain)
    maps = [alpha.map]
    for k in range(1, q + 1):
        prev = maps[-1]
        Tsrc, Ttgt = src.T(p + k), tgt.T(k)

        def on_atom(x: Elem, prev=prev, level=p + k - 1, Ttgt=Ttgt) -> Elem:
            return sigma(prev(src.project(x, level)), Ttgt)

        beta = ModuloidMap(Tsrc.C, Ttgt, on_atom, alpha.obj)
        maps.append(adjunction_H(beta, Tsrc, Ttgt, f"J^{k}({alpha.name})"))
    return maps[q], tgt


def matrix_interchange(B: Space, q: int):
    """T^q(ℬ⊕) → (T^qℬ)⊕: a path of matrices goes to the product of the matrices of σ(entries)."""
    comp = AdditiveCompletion(B)
    src, tgt = tower_of(comp), tower_of(B)
    maps = [LazyHomomorphism(comp, comp, lambda e: e, lambda a: a, "id")]
    for level in range(1, q + 1):
        prev = maps[-1]
        Tt = tgt.T(level)
        out = AdditiveCompletion(Tt)

        def on_atom(x: Elem, prev=prev, Tt=Tt, out=out) -> Elem:
            m = prev(x)
            coeffs = {}
            for (s, t, i, j, k), c in m.coeffs.items():
                for path, d in sigma(Elem._raw(Tt.C, s[j], t[i], {k: c}), Tt).coeffs.items():
                    coeffs[(s, t, i, j, path)] = d
            return Elem._raw(out, m.source, m.target, coeffs)

        beta = ModuloidMap(src.T(level - 1), out, on_atom, lambda a: a)
        maps.append(adjunction_H(beta, src.T(level), out, f"m{level}"))
    return maps[q]


_fresh = itertools.count()


def sharp(alpha: KKRepresentative, beta: KKRepresentative) -> KKRepresentative:
    """α♯β: J^{p+q}𝒜 → J^q(ℬ⊕^{S^m}) → (J^qℬ⊕)^{S^m} → 𝒞⊕^{S^{m+n}}."""
    if alpha.target != beta.source:
        raise EndpointError(f"cannot form {alpha.name}♯{beta.name}: {alpha.target.name} ≠ {beta.source.name}")
    p, q, m, n = alpha.depth, beta.depth, alpha.n, beta.n
    B = alpha.target
    lifted, _ = lift_rep(alpha, q)
    inter = None
    if m and q:
        _, _, inter = interchange(AdditiveCompletion(B), q, alpha.coords)
    mq = matrix_interchange(B, q) if q else None
    bcomp = AdditiveCompletion(B)
    ccomp = AdditiveCompletion(beta.target)
    # nested products carry the outer temporaries as scalars, so names must be fresh
    tag = f"a{next(_fresh)}_"
    temp = {f"t{i}": f"{tag}{i}" for i in range(1, m + 1)}
    final = {f"t{i}": f"t{m + i}" for i in range(1, n + 1)}
    final.update({f"{tag}{i}": f"t{i}" for i in range(1, m + 1)})
    coords = coord_names(m + n)
    cod = value_space(beta.target, coords)
    Bq = beta.domain

    def obj(a):
        return sum((beta.obj(b) for b in alpha.obj(a)), ())

    def fn(e: Elem) -> Elem:
        x = lifted(e)                                  # T^q(ℬ⊕^{S^m})
        if inter is not None:
            x = inter(x)                               # (T^qℬ⊕)^{S^m}
            x = x.space.underlying(x)
        else:
            x = _matrix_part(x) if not q else x
        x = x.rename(temp)
        mat = mq(x) if q else x                        # (T^qℬ)⊕
        S = sum((beta.obj(b) for b in mat.source), ())
        T = sum((beta.obj(b) for b in mat.target), ())
        roff = [sum(len(beta.obj(b)) for b in mat.target[:i]) for i in range(len(mat.target))]
        coff = [sum(len(beta.obj(b)) for b in mat.source[:j]) for j in range(len(mat.source))]
        out = ccomp.zero(S, T)
        grid: Dict = {}
        for (s, t, i, j, k), c in mat.coeffs.items():
            grid.setdefault((i, j), {})[k] = c
        for (i, j), coeffs in sorted(grid.items()):
            entry = Elem._raw(Bq, mat.source[j], mat.target[i], coeffs)
            block = _matrix_part(beta.map(entry))
            out = out + ccomp.place(block, S, T, roff[i], coff[j])
        return rehome(out.rename(final), cod)

    return KKRepresentative(alpha.source, beta.target, p + q, coords, fn, obj, f"{alpha.name}♯{beta.name}")


def compose_degree0(alpha: KKRepresentative, beta: KKRepresentative) -> KKRepresentative:
    """β⊕∘α for degree-0 α and β, evaluated directly (the oracle for α♯β)."""
    if alpha.depth or alpha.n or beta.depth or beta.n:
        raise ValueError("compose_degree0 needs degree-0 representatives")
    ccomp = AdditiveCompletion(beta.target)
    bcomp = AdditiveCompletion(alpha.target)
    flat = LazyHomomorphism(bcomp, ccomp, lambda e: _flatten_apply(beta, e), lambda s: sum((beta.obj(b) for b in s), ()))

    def fn(x):
        return flat(alpha.map(x))

    return KKRepresentative(alpha.source, beta.target, 0, (), fn, lambda a: flat.obj(alpha.obj(a)),
                            f"{beta.name}∘{alpha.name}")


def _flatten_apply(beta: KKRepresentative, mat: Elem) -> Elem:
    ccomp = AdditiveCompletion(beta.target)
    S = sum((beta.obj(b) for b in mat.source), ())
    T = sum((beta.obj(b) for b in mat.target), ())
    comp = mat.space
    out = ccomp.zero(S, T)
    for i, row in enumerate(comp.rows(mat)):
        for j, ent in enumerate(row):
            if ent.is_zero():
                continue
            ro = sum(len(beta.obj(b)) for b in mat.target[:i])
            co = sum(len(beta.obj(b)) for b in mat.source[:j])
            out = out + ccomp.place(_matrix_part(beta.map(ent)), S, T, ro, co)
    return out


# ---------------------------------------------------------------------------
# Δ: KK(𝒜, ℬ) → KK(𝒜⊗𝒞, ℬ⊗𝒞)


def gamma_power(A: Space, Cc: Space, p: int):
    """γ^p: J^p(𝒜⊗𝒞) → (J^p𝒜)⊗𝒞, iterating the J-tensor classifying map."""
    AC = TensorProduct(A, Cc)
    src = tower_of(AC)
    tA = tower_of(A)
    maps = [LazyHomomorphism(AC, AC, lambda e: e, lambda a: a, "id")]
    for level in range(1, p + 1):
        prev = maps[-1]
        ext = j_tensor_extension(tA.T(level - 1), Cc)
        gam = classifying_map(ext, check=False)
        Tmid = gam.source  # T((J^{level-1}𝒜)⊗𝒞)
        mid = TensorProduct(tA.T(level - 1), Cc)
        out = TensorProduct(tA.T(level), Cc)

        def on_atom(x: Elem, prev=prev, lvl=level - 1, Tmid=Tmid, mid=mid) -> Elem:
            y = prev(src.project(x, lvl))
            return sigma(Elem._raw(mid, y.source, y.target, y.coeffs), Tmid)

        lift = adjunction_H(ModuloidMap(src.T(level - 1), Tmid, on_atom, lambda a: a), src.T(level), Tmid)

        def step(e: Elem, lift=lift, gam=gam, out=out) -> Elem:
            v = gam(lift(e))
            return Elem._raw(out, v.source, v.target, v.coeffs)

        maps.append(LazyHomomorphism(src.T(level), out, step, lambda a: a, f"γ^{level}"))
    return maps[p]


def delta_map(alpha: KKRepresentative, Cc: Space) -> KKRepresentative:
    """Δ(α) = β∘(α⊗1)∘γ^p: J^p(𝒜⊗𝒞) → (ℬ⊗𝒞)⊕^{S^n}."""
    if alpha.depth > 2:
        raise ValueError("delta_map is limited to J-depth 2")
    A, B = alpha.source, alpha.target
    AC, BC = TensorProduct(A, Cc), TensorProduct(B, Cc)
    g = gamma_power(A, Cc, alpha.depth)
    comp = AdditiveCompletion(BC)
    cod = value_space(BC, alpha.coords)
    Tp = alpha.domain

    def obj(ac):
        a, c = ac
        return tuple((b, c) for b in alpha.obj(a))

    def fn(e: Elem) -> Elem:
        v = g(e)  # (J^p𝒜)⊗𝒞
        groups: Dict = {}
        for (pk, ck), c in v.coeffs.items():
            groups.setdefault(ck, {})[pk] = c
        S, T = obj(e.source), obj(e.target)
        out = comp.zero(S, T)
        for ck, terms in groups.items():
            x = Elem._raw(Tp, e.source[0], e.target[0], terms)
            mat = _matrix_part(alpha.map(x))
            coeffs = {}
            for (s, t, i, j, k), c in mat.coeffs.items():
                coeffs[(S, T, i, j, (k, ck))] = c
            out = out + Elem._raw(comp, S, T, coeffs)
        return rehome(out, cod)

    return KKRepresentative(AC, BC, alpha.depth, alpha.coords, fn, obj, f"Δ({alpha.name})")


# ---------------------------------------------------------------------------
# shifts


def shift(alpha: KKRepresentative, direction: str) -> KKRepresentative:
    """``J``: η(α) read as a loop-valued map J𝒜 → Ωℬ (KK_{-1} side).
    ``loop``: the last sphere coordinate of a loop-valued α is absorbed into Ωℬ (KK_{+1} side)."""
    if direction == "J":
        e = eta_step(alpha)
        e.name = f"J-shift({alpha.name})"
        return e
    if direction != "loop":
        raise ValueError("direction must be 'loop' or 'J'")
    if not alpha.n:
        raise ValueError("loop shift needs a sphere coordinate")
    var = alpha.coords[-1]
    loopB = PolyPower(alpha.target, (var,), "loop")
    coords = alpha.coords[:-1]
    cod = value_space(loopB, coords)
    inner_cod = PolyPower(AdditiveCompletion(alpha.target), (var,), "loop")

    def fn(e: Elem) -> Elem:
        v = alpha.map(e)
        fails = inner_cod.membership_failures(rehome(v, inner_cod))
        if fails:
            raise ValueError(f"{alpha.name} is not loop-valued in {var}: {fails[0].detail}")
        return rehome(v, cod)

    return KKRepresentative(alpha.source, loopB, alpha.depth, coords, fn, alpha.obj, f"Ω-shift({alpha.name})")


# ---------------------------------------------------------------------------
# natural isomorphisms and the W-homotopy


@dataclass
class NaturalIsomorphism:
    """g_a ∈ Hom(α(a), β(a)) invertible with g_b·α(x) = β(x)·g_a for x: a → b."""

    alpha: object
    beta: object
    g: dict
    g_inv: dict

    def failures(self) -> list:
        fails = []
        A = self.alpha.source
        for a in A.objects:
            g, gi = self.g[a], self.g_inv[a]
            if (g.source, g.target) != (self.alpha.obj(a), self.beta.obj(a)):
                fails.append(Failure("natural iso", f"g_{a} has wrong endpoints", {"object": format_key(a)}))
                continue
            if g @ gi != g.space.identity(g.target) or gi @ g != g.space.identity(g.source):
                fails.append(Failure("natural iso", f"g_{a} is not invertible", {"object": format_key(a)}))
        if fails:
            return fails
        for a in A.objects:
            for b in A.objects:
                for k in A.hom_keys(a, b):
                    x = A.basis(k)
                    if self.g[b] @ self.alpha(x) != self.beta(x) @ self.g[a]:
                        fails.append(Failure("naturality", f"g_b·α(x) ≠ β(x)·g_a for x = {x}", {"x": str(x)}))
        return fails


@dataclass
class HomotopyCertificate:
    """A chain of elementary homotopies h_i: 𝒜 → D^{Δ¹} (coordinate ``var``)."""

    start: Callable
    end: Callable
    steps: list
    var: str = "t"
    name: str = "H"
    source: Space = None

    def verify(self, test_elements: Sequence[Elem]) -> list:
        fails = []
        prev = self.start
        for idx, h in enumerate(self.steps):
            for x in test_elements:
                v = h(x)
                e0 = v.substitute({self.var: 0})
                p0 = prev(x)
                if not _same_value(e0, p0):
                    fails.append(Failure("endpoint", f"e0∘h{idx} ≠ previous endpoint", {"step": idx, "x": str(x),
                                         "got": str(e0), "expected": str(p0)}))
                    return fails
            hom = getattr(h, "spot_check", None)
            if hom is not None:
                for f in h.spot_check(test_elements):
                    fails.append(Failure(f.check, f"h{idx}: {f.detail}", dict(f.witness, step=idx)))
                    return fails
            prev = _endpoint(h, self.var)
        for x in test_elements:
            if not _same_value(prev(x), self.end(x)):
                fails.append(Failure("endpoint", "e1 of the last homotopy ≠ end", {"x": str(x), "got": str(prev(x)),
                                     "expected": str(self.end(x))}))
                break
        return fails


def _endpoint(h, var):
    return lambda x: h(x).substitute({var: 1})


def _same_value(u: Elem, v: Elem) -> bool:
    return (u.source, u.target) == (v.source, v.target) and u.coeffs == v.coeffs


def constant_certificate(f, var: str = "t") -> HomotopyCertificate:
    D = f.target
    P = PolyPower(D, (var,), "simplex") if not isinstance(D, PolyPower) else D
    h = LazyHomomorphism(f.source, P, lambda x: rehome(f(x), P), f.obj, f"const({f.name})")
    return HomotopyCertificate(f, f, [h], var, f"const({f.name})", f.source)


@dataclass
class WHomotopy:
    """The rotation homotopy from α′ = diag(α, 0) to β′ = diag(0, β) built from a natural iso g."""

    alpha: object
    beta: object
    iso: NaturalIsomorphism
    var: str = "t"

    def __post_init__(self):
        self.B = self.alpha.target
        self.comp = AdditiveCompletion(self.B)
        self.P = PolyPower(self.comp, (self.var,), "simplex")
        self.t = poly_ring(self.B.base, (self.var,)).gen(self.var)

    def obj(self, a):
        return (self.alpha.obj(a), self.beta.obj(a))

    def W(self, a) -> Elem:
        t, B = self.t, self.B
        g, gi = self.iso.g[a], self.iso.g_inv[a]
        ia, ib = B.identity(self.alpha.obj(a)), B.identity(self.beta.obj(a))
        o = self.obj(a)
        m = self.comp.matrix(o, o, [[ia.scale(1 - t * t), gi.scale(t ** 3 - 2 * t)], [g.scale(t), ib.scale(1 - t * t)]])
        return rehome(m, self.P)

    def W_inv(self, a) -> Elem:
        t, B = self.t, self.B
        g, gi = self.iso.g[a], self.iso.g_inv[a]
        ia, ib = B.identity(self.alpha.obj(a)), B.identity(self.beta.obj(a))
        o = self.obj(a)
        m = self.comp.matrix(o, o, [[ia.scale(1 - t * t), gi.scale(2 * t - t ** 3)], [g.scale(-t), ib.scale(1 - t * t)]])
        return rehome(m, self.P)

    def alpha_prime(self, x: Elem) -> Elem:
        B = self.B
        s, t = self.obj(x.source), self.obj(x.target)
        return self.comp.matrix(s, t, [[self.alpha(x), 0], [0, 0]])

    def beta_prime(self, x: Elem) -> Elem:
        s, t = self.obj(x.source), self.obj(x.target)
        return self.comp.matrix(s, t, [[0, 0], [0, self.beta(x)]])

    def h(self, x: Elem) -> Elem:
        mid = rehome(self.alpha_prime(x), self.P)
        return self.W(x.target) @ mid @ self.W_inv(x.source)

    def as_hom(self) -> LazyHomomorphism:
        return LazyHomomorphism(self.alpha.source, self.P, self.h, self.obj, "h_W")

    def certificate(self) -> HomotopyCertificate:
        a_p = LazyHomomorphism(self.alpha.source, self.comp, self.alpha_prime, self.obj, "α′")
        b_p = LazyHomomorphism(self.alpha.source, self.comp, self.beta_prime, self.obj, "β′")
        return HomotopyCertificate(a_p, b_p, [self.as_hom()], self.var, "W-homotopy", self.alpha.source)

    def identities(self) -> list:
        """W·W⁻¹ = I, W⁻¹·W = I, e₀(W) = I and e₁(W) = [[0, −g⁻¹], [g, 0]] at every object."""
        fails = []
        for a in self.alpha.source.objects:
            W, Wi = self.W(a), self.W_inv(a)
            I = self.P.identity(self.obj(a))
            if W @ Wi != I or Wi @ W != I:
                fails.append(Failure("W·W⁻¹ = I", f"fails at {format_key(a)}", {"object": format_key(a)}))
            e0 = self.P.evaluate_at(W, self.var, 0)
            if e0 != self.comp.identity(self.obj(a)):
                fails.append(Failure("e0(W) = I", f"fails at {format_key(a)}", {"object": format_key(a)}))
            o = self.obj(a)
            anti = self.comp.matrix(o, o, [[0, -self.iso.g_inv[a]], [self.iso.g[a], 0]])
            if self.P.evaluate_at(W, self.var, 1) != anti:
                fails.append(Failure("e1(W)", f"e1(W) is not antidiagonal(-g⁻¹, g) at {format_key(a)}",
                                     {"object": format_key(a)}))
        return fails


def w_homotopy(alpha, beta, iso: NaturalIsomorphism, var: str = "t") -> WHomotopy:
    fails = iso.failures()
    if fails:
        raise ValueError(f"not a natural isomorphism: {fails[0].detail}")
    if not (alpha.source.is_unital and alpha.target.is_unital):
        raise ValueError("the W-homotopy needs unital algebroids")
    return WHomotopy(alpha, beta, iso, var)


def identity_iso(alpha) -> NaturalIsomorphism:
    B = alpha.target
    g = {a: B.identity(alpha.obj(a)) for a in alpha.source.objects}
    return NaturalIsomorphism(alpha, alpha, g, dict(g))


def conjugation_iso(alpha, beta, g: dict, g_inv: dict) -> NaturalIsomorphism:
    return NaturalIsomorphism(alpha, beta, g, g_inv)


# ---------------------------------------------------------------------------
# KK-equivalence certificates


@dataclass
class KKEquivalenceCertificate:
    """Forward/backward degree-0 maps with homotopies backward∘forward ≃ id and forward∘backward ≃ id.

    The identity endpoints may be padded (⊕0); the certificates carry the
    padded identity maps explicitly as their ``end``.
    """

    forward: KKRepresentative
    backward: KKRepresentative
    left: HomotopyCertificate   # from backward∘forward (on the source)
    right: HomotopyCertificate  # from forward∘backward (on the target)

    def verify(self, source_tests: Sequence[Elem], target_tests: Sequence[Elem]) -> list:
        fails = []
        bf = compose_degree0(self.forward, self.backward)
        fb = compose_degree0(self.backward, self.forward)
        for x in source_tests:
            if not _same_value(bf.map(x), self.left.start(x)):
                fails.append(Failure("equivalence", "left certificate does not start at backward∘forward", {"x": str(x)}))
                break
        for x in target_tests:
            if not _same_value(fb.map(x), self.right.start(x)):
                fails.append(Failure("equivalence", "right certificate does not start at forward∘backward", {"x": str(x)}))
                break
        fails += [Failure(f.check, "left: " + f.detail, f.witness) for f in self.left.verify(source_tests)]
        fails += [Failure(f.check, "right: " + f.detail, f.witness) for f in self.right.verify(target_tests)]
        return fails


def verify_certificate(cert, test_elements, target_tests=None) -> dict:
    """Replay a certificate; reports ok plus the first failures with witnesses.

    This certifies asserted relations only; it never decides KK equality.
    """
    if isinstance(cert, KKEquivalenceCertificate):
        fails = cert.verify(test_elements, target_tests or [])
    elif isinstance(cert, HomotopyCertificate):
        fails = cert.verify(test_elements)
    else:
        raise TypeError("expected a HomotopyCertificate or KKEquivalenceCertificate")
    return {"ok": not fails, "failures": [f.to_dict() for f in fails[:5]]}


# ---------------------------------------------------------------------------
# HOM(𝒜, ℬ) in dimensions 0 and 1


class HomSpace:
    """Explicit simplices of HOM(𝒜, ℬ) at subdivision level k (n ≤ 1).

    An n-simplex is a homomorphism 𝒜 → ℬ^{sd^k Δⁿ} (compatible families).
    The space is not enumerable; simplices are supplied by the user.
    """

    def __init__(self, A: Space, B: Space, k: int = 0):
        self.A, self.B, self.k = A, B, k
        self.complexes = {n: SubdivisionTower(simplex(n), k).levels[-1] for n in (0, 1)}
        self.powers = {n: SimplicialPower(B, X) for n, X in self.complexes.items()}

    def vertex_label(self, v: int):
        label = (v,)
        for _ in range(self.k):
            label = (label,)
        return label

    def zero_simplex(self, f) -> LazyHomomorphism:
        P = self.powers[0]
        X = self.complexes[0]
        v = X.simplices(0)[0]
        fn = lambda x: Elem._raw(P, f.obj(x.source), f.obj(x.target), {(v, k): c for k, c in f(x).coeffs.items()})  # noqa: E731
        return LazyHomomorphism(self.A, P, fn, f.obj, f.name)

    def from_elementary(self, h, var: str = "t") -> LazyHomomorphism:
        """An elementary homotopy 𝒜 → ℬ[t] as a 1-simplex (k = 0 only)."""
        if self.k:
            raise ValueError("elementary homotopies are 1-simplices at subdivision level 0")
        P = self.powers[1]

        def fn(x: Elem) -> Elem:
            v = h(x)
            base = v.space.underlying(v) if isinstance(v.space, PolyPower) else v
            coeffs = {}
            for key, c in base.coeffs.items():
                for simplex_name, val in (((0,), c.substitute({var: 0}) if var in c.variables else c),
                                          ((1,), c.substitute({var: 1}) if var in c.variables else c),
                                          ((0, 1), c.rename({var: "u1"}) if var in c.variables else c)):
                    if val:
                        coeffs[(simplex_name, key)] = val
            return Elem._raw(P, base.source, base.target, coeffs)

        return LazyHomomorphism(self.A, P, fn, h.obj, f"[{h.name}]")

    def face(self, simplex_map, i: int) -> LazyHomomorphism:
        """d_i of a 1-simplex: evaluation at vertex 1 - i of Δ¹."""
        v = self.vertex_label(1 - i)
        P1 = self.powers[1]

        def fn(x: Elem) -> Elem:
            return P1.value(simplex_map(x), v)

        return LazyHomomorphism(self.A, self.B, fn, simplex_map.obj, f"d{i}")

    def degeneracy(self, f) -> LazyHomomorphism:
        """s_0 of a 0-simplex: the constant family on sd^k Δ¹."""
        P1 = self.powers[1]
        X = self.complexes[1]

        def fn(x: Elem) -> Elem:
            v = f(x)
            return Elem._raw(P1, v.source, v.target, {(s, k): c for s in X.simplices() for k, c in v.coeffs.items()})

        return LazyHomomorphism(self.A, P1, fn, f.obj, f"s0({f.name})")

    def check_simplex(self, simplex_map, n: int, samples: Sequence[Elem]) -> list:
        P = self.powers[n]
        fails = simplex_map.spot_check(samples)
        for x in samples:
            for f in P.compatibility_failures(simplex_map(x)):
                fails.append(Failure(f.check, f.detail, dict(f.witness, x=str(x))))
                break
        return fails


def hom_space(A: Space, B: Space, n: int = 0, k: int = 0) -> HomSpace:
    if n > 1:
        raise ValueError("hom_space supports n ≤ 1")
    return HomSpace(A, B, k)


__all__ = [
    "KKRepresentative", "from_homomorphism", "identity_rep", "zero_rep", "zero_like", "oplus", "eta_step",
    "epsilon", "precompose_pi", "permute_sphere", "lift_rep", "matrix_interchange", "sharp", "compose_degree0",
    "gamma_power", "delta_map", "shift", "NaturalIsomorphism", "HomotopyCertificate", "constant_certificate",
    "WHomotopy", "w_homotopy", "identity_iso", "conjugation_iso", "KKEquivalenceCertificate",
    "verify_certificate", "HomSpace", "hom_space", "tower_of", "value_space", "coord_names",
]
