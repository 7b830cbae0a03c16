"""Finite simplicial sets, polynomial powers 𝒜^X, path/loop extensions, ρ, η and friends.

A finite simplicial set stores its nondegenerate simplices and, for each of
them, its faces as pairs ``(y, ν)`` meaning ``y∘ν`` with ν: [n-1] → [dim y] a
monotone surjection (degenerate faces are allowed).  Every simplicial operator
then has a normal form ``(nondegenerate simplex, surjection)``.

Polynomial powers come in two flavours.  ``SimplicialPower`` is the honest
limit over the simplices of X: compatible families of polynomials in the local
barycentric coordinates u1..un.  ``PolyPower`` is the cube model used by the KK
machinery: the coefficients carry named coordinates t1, t2, ... and membership
in Ω or the sphere power is decided by evaluating faces of the cube.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Callable, Dict, Hashable, Iterable, List, Mapping, Optional, Sequence, Tuple

from .completion import AdditiveCompletion, DirectSum, ProductSpace
from .core import (
    Elem,
    EndpointError,
    Failure,
    InfiniteBasisError,
    LazyHomomorphism,
    Space,
    format_key,
    ring_algebroid,
)
from .linalg import in_span, nullspace, rank as mat_rank, smith_normal_form
from .rings import (
    BaseRing,
    Poly,
    ZZ,
    barycentric,
    coordinate_images,
    degeneracy_map,
    face_map,
    mono_degree,
    natural_key,
    poly_ring,
    scalar_ring,
    simplex_gens,
    simplex_ring,
)
from .tensor import (
    FSplitExtension,
    JTower,
    ModuloidMap,
    TensorAlgebroid,
    adjunction_H,
    classifying_map,
    sigma,
)

LOCAL = "u"  # prefix of the local simplex coordinates in SimplicialPower


class SimplicialError(ValueError):
    pass


def _sort_key(x):
    return natural_key(format_key(x))


def _is_surjection(mu, m: int) -> bool:
    return all(mu[i] <= mu[i + 1] for i in range(len(mu) - 1)) and set(mu) == set(range(m + 1))


# ---------------------------------------------------------------------------
# finite simplicial sets


class FiniteSimplicialSet:
    """Nondegenerate simplices with face incidence; optional basepoint."""

    def __init__(self, name: str, dims: Mapping, faces: Mapping, basepoint=None, vertices_of: Mapping = None):
        self.name = name
        self.dims = dict(dims)
        self.faces = {x: tuple((y, tuple(nu)) for y, nu in fs) for x, fs in faces.items()}
        self.basepoint = basepoint
        self.vertices_of = dict(vertices_of) if vertices_of else None
        for x, n in self.dims.items():
            if n > 0 and len(self.faces.get(x, ())) != n + 1:
                raise SimplicialError(f"simplex {format_key(x)} of dimension {n} needs {n + 1} faces")
            for y, nu in self.faces.get(x, ()):
                if y not in self.dims:
                    raise SimplicialError(f"face {format_key(y)} of {format_key(x)} is not a simplex")
                if len(nu) != n or not _is_surjection(nu, self.dims[y]):
                    raise SimplicialError(f"bad degeneracy data {nu} on face {format_key(y)} of {format_key(x)}")
                if self.dims[y] >= n:
                    raise SimplicialError(f"face {format_key(y)} of {format_key(x)} has too high dimension")
        if basepoint is not None and self.dims.get(basepoint) != 0:
            raise SimplicialError("basepoint must be a vertex")

    def __repr__(self):
        return f"<{self.name}: cells {self.cell_counts()}>"

    @property
    def dim(self) -> int:
        return max(self.dims.values(), default=-1)

    def simplices(self, n: int = None) -> list:
        xs = [x for x, d in self.dims.items() if n is None or d == n]
        return sorted(xs, key=lambda x: (self.dims[x], _sort_key(x)))

    def cell_counts(self) -> list:
        return [len(self.simplices(n)) for n in range(self.dim + 1)]

    def euler(self) -> int:
        return sum((-1) ** n * c for n, c in enumerate(self.cell_counts()))

    # -- simplicial operators
    def apply(self, x, theta) -> tuple:
        """Normal form of x∘θ for θ: [k] → [dim x] monotone."""
        theta = tuple(theta)
        n = self.dims[x]
        if any(theta[i] > theta[i + 1] for i in range(len(theta) - 1)) or (theta and not 0 <= theta[-1] <= n):
            raise SimplicialError(f"{theta} is not monotone into [{n}]")
        im = sorted(set(theta))
        pos = {v: i for i, v in enumerate(im)}
        y, nu = self._restrict(x, tuple(im))
        return y, tuple(nu[pos[v]] for v in theta)

    def _restrict(self, x, delta) -> tuple:
        n = self.dims[x]
        if len(delta) == n + 1:
            return x, tuple(range(n + 1))
        i = next(j for j in range(n + 1) if j not in delta)
        y, nu = self.faces[x][i]
        rest = tuple(j if j < i else j - 1 for j in delta)
        return self.apply(y, tuple(nu[j] for j in rest))

    def face(self, x, i: int) -> tuple:
        return self.faces[x][i]

    def vertices(self, x) -> list:
        """The vertices of x in order, as simplex names."""
        return [self.apply(x, (v,))[0] for v in range(self.dims[x] + 1)]

    def is_subcomplex(self, names: Iterable) -> bool:
        names = set(names)
        return all(y in names for x in names for y, _ in self.faces.get(x, ()))

    def check(self) -> list:
        fails = []
        for x in self.simplices():
            n = self.dims[x]
            if n < 2:
                continue
            for j in range(n + 1):
                for i in range(j):
                    yj, nuj = self.faces[x][j]
                    yi, nui = self.faces[x][i]
                    lhs = self.apply(yj, tuple(nuj[v] for v in face_map(i, n - 1)))
                    rhs = self.apply(yi, tuple(nui[v] for v in face_map(j - 1, n - 1)))
                    if lhs != rhs:
                        fails.append(Failure("simplicial identity", f"d{i}d{j} ≠ d{j - 1}d{i} on {format_key(x)}",
                                             {"simplex": format_key(x), "lhs": format_key(lhs), "rhs": format_key(rhs)}))
        return fails

    # -- homology
    def boundary_matrix(self, n: int) -> list:
        """Normalised boundary C_n → C_{n-1}; rows index (n-1)-simplices."""
        rows = {y: i for i, y in enumerate(self.simplices(n - 1))}
        cols = self.simplices(n)
        M = [[0] * len(cols) for _ in rows]
        for c, x in enumerate(cols):
            for i, (y, nu) in enumerate(self.faces[x]):
                if self.dims[y] == n - 1:
                    M[rows[y]][c] += (-1) ** i
        return M

    def homology(self) -> list:
        """[(rank, torsion)] for H_0..H_dim over Z."""
        out = []
        ranks, torsions = {}, {}
        for n in range(1, self.dim + 2):
            M = self.boundary_matrix(n) if n <= self.dim else []
            if M and M[0]:
                diag = [d for d in _diag(M) if d]
                ranks[n] = len(diag)
                torsions[n] = [d for d in diag if d != 1]
            else:
                ranks[n], torsions[n] = 0, []
        for n in range(self.dim + 1):
            cn = len(self.simplices(n))
            out.append((cn - ranks.get(n, 0) - ranks[n + 1], torsions[n + 1]))
        return out


def _diag(M):
    _, D, _ = smith_normal_form(M)
    return [D[i][i] for i in range(min(len(D), len(D[0])))]


@dataclass
class SimplicialMap:
    """Simplicial map given on nondegenerate simplices by normal forms (z, μ)."""

    source: FiniteSimplicialSet
    target: FiniteSimplicialSet
    images: dict
    name: str = "f"

    def __call__(self, x, nu=None) -> tuple:
        z, mu = self.images[x]
        if nu is None:
            return z, mu
        return z, tuple(mu[v] for v in nu)

    def apply_op(self, x, theta) -> tuple:
        """f(x∘θ)."""
        y, nu = self.source.apply(x, theta)
        return self(y, nu)

    def check(self) -> list:
        fails = []
        S, T = self.source, self.target
        for x in S.simplices():
            z, mu = self.images.get(x, (None, None))
            if z is None or z not in T.dims or not _is_surjection(mu, T.dims[z]) or len(mu) != S.dims[x] + 1:
                fails.append(Failure("simplicial map", f"bad image of {format_key(x)}", {"simplex": format_key(x)}))
                continue
            n = S.dims[x]
            for i in range(n + 1 if n else 0):
                y, nu = S.faces[x][i]
                lhs = self(y, nu)
                rhs = T.apply(z, tuple(mu[v] for v in face_map(i, n)))
                if lhs != rhs:
                    fails.append(Failure("simplicial map", f"{self.name} does not commute with d{i} on {format_key(x)}",
                                         {"simplex": format_key(x), "lhs": format_key(lhs), "rhs": format_key(rhs)}))
        return fails


# ---------------------------------------------------------------------------
# builders


def from_ordered_complex(facets: Iterable[Sequence], name: str = "K", basepoint=None, order=None) -> FiniteSimplicialSet:
    """Ordered simplicial complex; simplices are sorted vertex tuples."""
    key = order or (lambda v: v)
    simplices = set()
    for f in facets:
        f = tuple(sorted(set(f), key=key))
        for r in range(1, len(f) + 1):
            for sub in itertools.combinations(f, r):
                simplices.add(sub)
    dims = {s: len(s) - 1 for s in simplices}
    faces = {s: [(s[:i] + s[i + 1:], tuple(range(len(s) - 1))) for i in range(len(s))] for s in simplices if len(s) > 1}
    bp = (basepoint,) if basepoint is not None else None
    return FiniteSimplicialSet(name, dims, faces, bp, {s: s for s in simplices})


def simplex(n: int) -> FiniteSimplicialSet:
    return from_ordered_complex([tuple(range(n + 1))], f"Δ{n}", basepoint=0)


def boundary(n: int) -> FiniteSimplicialSet:
    """∂Δⁿ (n ≥ 1)."""
    if n < 1:
        raise ValueError("∂Δⁿ needs n >= 1")
    full = tuple(range(n + 1))
    facets = [full[:i] + full[i + 1:] for i in range(n + 1)]
    return from_ordered_complex(facets, f"∂Δ{n}", basepoint=0)


def point(name: str = "pt") -> FiniteSimplicialSet:
    return FiniteSimplicialSet(name, {"*": 0}, {}, "*")


def sphere(n: int) -> FiniteSimplicialSet:
    """Sⁿ = Δⁿ/∂Δⁿ: one vertex * and one nondegenerate n-simplex σ."""
    if n == 0:
        return FiniteSimplicialSet("S0", {"*": 0, "x": 0}, {}, "*")
    return FiniteSimplicialSet(f"S{n}", {"*": 0, "σ": n}, {"σ": [("*", (0,) * n)] * (n + 1)}, "*")


_WORD = re.compile(r"^\s*((?:s\d+\s*)*)(\S+)\s*$")


def from_cells(name: str, cells: Sequence[Mapping], basepoint=None) -> FiniteSimplicialSet:
    """User-defined complex: cells ``{name, dim, faces}`` with face words like ``"s0 v"``.

    ``"s_i s_j y"`` denotes s_i s_j y = y∘σ_j∘σ_i (applied right to left).
    """
    dims = {c["name"]: int(c["dim"]) for c in cells}
    faces = {}
    for c in cells:
        n = int(c["dim"])
        words = c.get("faces", [])
        if n == 0 and words:
            raise SimplicialError(f"vertex {c['name']} cannot have faces")
        out = []
        for w in words:
            m = _WORD.match(str(w))
            if not m or m.group(2) not in dims:
                raise SimplicialError(f"cannot read face word {w!r} of {c['name']}")
            y = m.group(2)
            degs = [int(s[1:]) for s in m.group(1).split()]
            mu = tuple(range(dims[y] + 1))
            for i in reversed(degs):
                m_dim = len(mu) - 1
                if i > m_dim:
                    raise SimplicialError(f"degeneracy s{i} out of range in {w!r}")
                mu = tuple(mu[v] for v in degeneracy_map(i, m_dim))
            out.append((y, mu))
        if n > 0:
            faces[c["name"]] = out
    X = FiniteSimplicialSet(name, dims, faces, basepoint)
    fails = X.check()
    if fails:
        raise SimplicialError(f"non-simplicial gluing: {fails[0].detail}")
    return X


def _lattice_paths(p: int, q: int):
    """Jointly injective pairs of surjections (μ: [n] → [p], ν: [n] → [q])."""
    def rec(i, j, mu, nu):
        if (i, j) == (p, q):
            yield tuple(mu), tuple(nu)
            return
        for di, dj in ((1, 0), (0, 1), (1, 1)):
            if i + di <= p and j + dj <= q:
                yield from rec(i + di, j + dj, mu + [i + di], nu + [j + dj])
    yield from rec(0, 0, [0], [0])


def _collapse(mu, nu):
    """Collapse repeated consecutive pairs: returns (μ', ν', ρ) with (μ,ν) = (μ',ν')∘ρ."""
    pts, rho = [], []
    for pair in zip(mu, nu):
        if not pts or pts[-1] != pair:
            pts.append(pair)
        rho.append(len(pts) - 1)
    return tuple(a for a, _ in pts), tuple(b for _, b in pts), tuple(rho)


def product(X: FiniteSimplicialSet, Y: FiniteSimplicialSet, name: str = None) -> FiniteSimplicialSet:
    """X × Y; simplices are (x, μ, y, ν) with (μ, ν) jointly injective."""
    dims, faces = {}, {}
    for x in X.simplices():
        for y in Y.simplices():
            for mu, nu in _lattice_paths(X.dims[x], Y.dims[y]):
                dims[(x, mu, y, nu)] = len(mu) - 1
    for s, n in dims.items():
        if n == 0:
            continue
        x, mu, y, nu = s
        fs = []
        for i in range(n + 1):
            d = face_map(i, n)
            x2, mu2 = X.apply(x, tuple(mu[v] for v in d))
            y2, nu2 = Y.apply(y, tuple(nu[v] for v in d))
            a, b, rho = _collapse(mu2, nu2)
            fs.append(((x2, a, y2, b), rho))
        faces[s] = fs
    bp = None
    if X.basepoint is not None and Y.basepoint is not None:
        bp = (X.basepoint, (0,), Y.basepoint, (0,))
    return FiniteSimplicialSet(name or f"{X.name}×{Y.name}", dims, faces, bp)


def pushout(X: FiniteSimplicialSet, B: Iterable, C: FiniteSimplicialSet, f: Mapping, name: str = None,
            basepoint=None) -> Tuple[FiniteSimplicialSet, SimplicialMap, SimplicialMap]:
    """X ∪_B C for a subcomplex B ⊂ X and f: B → C given by normal forms.

    Returns the pushout with the two structure maps X → P and C → P.
    Simplices are tagged ("C", c) or ("X", x).
    """
    B = set(B)
    if not X.is_subcomplex(B):
        raise SimplicialError("B is not a subcomplex of X")
    Bset = FiniteSimplicialSet("B", {b: X.dims[b] for b in B}, {b: X.faces[b] for b in B if X.dims[b] > 0})
    fmap = SimplicialMap(Bset, C, dict(f), "f")
    fails = fmap.check()
    if fails:
        raise SimplicialError(f"gluing map is not simplicial: {fails[0].detail}")
    dims = {("C", c): d for c, d in C.dims.items()}
    faces = {("C", c): [(("C", y), nu) for y, nu in fs] for c, fs in C.faces.items()}

    def to_p(y, nu):
        if y in B:
            z, mu = fmap(y, nu)
            return ("C", z), mu
        return ("X", y), nu

    for x, d in X.dims.items():
        if x in B:
            continue
        dims[("X", x)] = d
        if d > 0:
            faces[("X", x)] = [to_p(y, nu) for y, nu in X.faces[x]]
    if basepoint is None:
        if C.basepoint is not None:
            basepoint = ("C", C.basepoint)
        elif X.basepoint is not None:
            basepoint = to_p(X.basepoint, (0,))[0]
    P = FiniteSimplicialSet(name or f"{X.name}∪{C.name}", dims, faces, basepoint)
    qx = SimplicialMap(X, P, {x: to_p(x, tuple(range(X.dims[x] + 1))) for x in X.dims}, "q_X")
    qc = SimplicialMap(C, P, {c: (("C", c), tuple(range(C.dims[c] + 1))) for c in C.dims}, "q_C")
    return P, qx, qc


def quotient(X: FiniteSimplicialSet, B: Iterable, name: str = None) -> FiniteSimplicialSet:
    """X/B, with the collapsed point as basepoint."""
    pt = point()
    B = list(B)
    f = {b: ("*", (0,) * (X.dims[b] + 1)) for b in B}
    return pushout(X, B, pt, f, name or f"{X.name}/B")[0]


def wedge_simplices(P: FiniteSimplicialSet, X: FiniteSimplicialSet, Y: FiniteSimplicialSet) -> list:
    return [s for s in P.dims if s[0] == X.basepoint or s[2] == Y.basepoint]


def smash(X: FiniteSimplicialSet, Y: FiniteSimplicialSet, name: str = None) -> FiniteSimplicialSet:
    if X.basepoint is None or Y.basepoint is None:
        raise SimplicialError("smash product needs pointed simplicial sets")
    P = product(X, Y)
    return quotient(P, wedge_simplices(P, X, Y), name or f"{X.name}∧{Y.name}")


def subdivide(X: FiniteSimplicialSet, name: str = None) -> FiniteSimplicialSet:
    """Barycentric subdivision of an ordered simplicial complex."""
    if X.vertices_of is None:
        raise SimplicialError("subdivision needs an ordered simplicial complex")
    simplices = list(X.vertices_of.values())
    order = lambda s: (len(s), tuple(natural_key(format_key(v)) for v in s))  # noqa: E731

    chains = []

    def extend(chain):
        top = chain[-1]
        bigger = [s for s in simplices if len(s) > len(top) and set(top) < set(s)]
        if not bigger:
            chains.append(tuple(chain))
        for s in bigger:
            extend(chain + [s])

    for s in simplices:
        if len(s) == 1:
            extend([s])
    bp = None
    if X.basepoint is not None:
        bp = X.vertices_of[X.basepoint]
    return from_ordered_complex(chains, name or f"sd({X.name})", basepoint=bp, order=order)


def last_vertex_map(X: FiniteSimplicialSet, sdX: FiniteSimplicialSet) -> SimplicialMap:
    """h: sd X → X, a chain σ0 ⊂ ⋯ ⊂ σk goes to the face spanned by the last vertices."""
    inv = {v: x for x, v in X.vertices_of.items()}
    images = {}
    for chain in sdX.dims:
        lasts = [s[-1] for s in chain]
        verts = tuple(sorted(set(lasts), key=lambda v: lasts.index(v)))
        images[chain] = (inv[verts], tuple(verts.index(v) for v in lasts))
    return SimplicialMap(sdX, X, images, "h")


@dataclass
class SubdivisionTower:
    """X, sd X, sd² X, … with the last-vertex maps."""

    X: FiniteSimplicialSet
    depth: int
    levels: list = field(default_factory=list)
    maps: list = field(default_factory=list)

    def __post_init__(self):
        self.levels = [self.X]
        for _ in range(self.depth):
            nxt = subdivide(self.levels[-1])
            self.maps.append(last_vertex_map(self.levels[-1], nxt))
            self.levels.append(nxt)

    def check(self) -> list:
        return [f for h in self.maps for f in h.check()]


def build_complex(kind: str, *args, **kwargs) -> FiniteSimplicialSet:
    kinds = {
        "simplex": simplex, "boundary": boundary, "sphere": sphere, "point": point,
        "smash": smash, "product": product, "cells": from_cells, "complex": from_ordered_complex,
        "quotient": quotient,
    }
    if kind == "pushout":
        return pushout(*args, **kwargs)[0]
    if kind == "subdivision":
        X, k = args
        return SubdivisionTower(X, k).levels[-1]
    if kind not in kinds:
        raise ValueError(f"unknown complex kind {kind!r}")
    return kinds[kind](*args, **kwargs)


# ---------------------------------------------------------------------------
# polynomial pullbacks along simplicial operators (local coordinates u)


def pull(p: Poly, theta, k: int, n: int) -> Poly:
    """θ*p for θ: [k] → [n]; only the local coordinates u1..un are substituted."""
    if n == 0:
        return p
    extra = {v for v in p.variables if v.startswith(LOCAL) and v not in simplex_gens(n, LOCAL)}
    if extra:
        raise SimplicialError(f"{sorted(extra)} are not coordinates of Δ^{n}")
    imgs = coordinate_images(theta, k, n, p.ring.base, LOCAL)
    return p.substitute({v: q for v, q in imgs.items() if v in p.variables}) if p.variables & set(imgs) else p


def fill_simplex(gs: Sequence[Poly], n: int, base: BaseRing) -> Poly:
    """A polynomial P on Δⁿ with ∂_i P = gs[i], for compatible boundary data."""
    ring = simplex_ring(n, base, LOCAL)
    low = simplex_ring(n - 1, base, LOCAL)
    P = ring.zero
    for i in range(n + 1):
        h = gs[i] - pull(P, face_map(i, n), n - 1, n)
        if h.is_zero():
            continue
        d = low.one
        up = ring.one
        for j in range(i):
            d = d * barycentric(low, n - 1, j, LOCAL)
            up = up * barycentric(ring, n, j, LOCAL)
        try:
            q = h.exact_divide(d) if i else h
        except ValueError:
            raise SimplicialError(f"boundary data is not compatible at face {i}") from None
        E = pull(q, degeneracy_map(i - 1 if i else 0, n - 1), n, n - 1) if n > 1 else q
        P = P + up * E
    return P


# ---------------------------------------------------------------------------
# compatible families: 𝒜^X


def _monomials(nvars: int, D: int, prefix: str = LOCAL) -> list:
    names = simplex_gens(nvars, prefix)
    out = [()]
    for total in range(1, D + 1):
        for combo in itertools.combinations_with_replacement(names, total):
            counts = {}
            for v in combo:
                counts[v] = counts.get(v, 0) + 1
            out.append(tuple(sorted(counts.items(), key=lambda ve: natural_key(ve[0]))))
    return out


def family_basis(X: FiniteSimplicialSet, D: int, base: BaseRing = ZZ, reduced: bool = False,
                 vanish_on: Iterable = ()) -> list:
    """Lattice basis of compatible scalar families {x: poly of degree ≤ D}.

    With ``reduced`` the value at the basepoint is 0; ``vanish_on`` lists further
    simplices that must carry 0.
    """
    columns = []  # (simplex, monomial)
    for x in X.simplices():
        for m in _monomials(X.dims[x], D):
            columns.append((x, m))
    col = {c: i for i, c in enumerate(columns)}
    rows = []

    def mono_poly(m, n):
        return Poly(poly_ring(base, simplex_gens(n, LOCAL)), {m: 1})

    for x in X.simplices():
        n = X.dims[x]
        for i in range(n + 1 if n else 0):
            y, nu = X.faces[x][i]
            eqs: Dict = {}
            for m in _monomials(n, D):
                img = pull(mono_poly(m, n), face_map(i, n), n - 1, n)
                for mm, c in img.terms.items():
                    eqs.setdefault(mm, {})
                    eqs[mm][col[(x, m)]] = eqs[mm].get(col[(x, m)], 0) + c
            for m in _monomials(X.dims[y], D):
                img = pull(mono_poly(m, X.dims[y]), nu, n - 1, X.dims[y])
                for mm, c in img.terms.items():
                    eqs.setdefault(mm, {})
                    eqs[mm][col[(y, m)]] = eqs[mm].get(col[(y, m)], 0) - c
            for mm, row in eqs.items():
                if any(row.values()):
                    v = [0] * len(columns)
                    for j, c in row.items():
                        v[j] = c
                    rows.append(v)
    zero_on = set(vanish_on)
    if reduced:
        if X.basepoint is None:
            raise SimplicialError("reduced power needs a basepoint")
        zero_on.add(X.basepoint)
    for x in zero_on:
        for m in _monomials(X.dims[x], D):
            v = [0] * len(columns)
            v[col[(x, m)]] = 1
            rows.append(v)
    kernel = nullspace(rows, base, ncols=len(columns)) if rows else nullspace([], base, ncols=len(columns))
    out = []
    for vec in kernel:
        fam = {x: poly_ring(base, simplex_gens(X.dims[x], LOCAL)).zero for x in X.simplices()}
        for c, (x, m) in zip(vec, columns):
            if c:
                fam[x] = fam[x] + mono_poly(m, X.dims[x]) * base(c)
        out.append(fam)
    return out


def family_compatible(X: FiniteSimplicialSet, fam: Mapping) -> list:
    fails = []
    for x in X.simplices():
        n = X.dims[x]
        for i in range(n + 1 if n else 0):
            y, nu = X.faces[x][i]
            lhs = pull(fam[x], face_map(i, n), n - 1, n)
            rhs = pull(fam[y], nu, n - 1, X.dims[y])
            if lhs != rhs:
                fails.append(Failure("face compatibility", f"d{i} of the value on {format_key(x)} is {lhs}, expected {rhs}",
                                     {"simplex": format_key(x), "face": i}))
    return fails


def pullback_family(f: SimplicialMap, fam: Mapping) -> dict:
    """f*φ: (f*φ)(x) = μ*φ(z) where f(x) = z∘μ."""
    out = {}
    for x in f.source.simplices():
        z, mu = f(x)
        out[x] = pull(fam[z], mu, f.source.dims[x], f.target.dims[z])
    return out


def extend_family(X: FiniteSimplicialSet, B: Iterable, values: Mapping, base: BaseRing = ZZ) -> dict:
    """i_*: a family on the subcomplex B extended to all of X (R-linear, not multiplicative)."""
    B = set(B)
    fam = {b: values[b] for b in B}
    for x in X.simplices():
        if x in fam:
            continue
        n = X.dims[x]
        if n == 0:
            fam[x] = scalar_ring(base).zero
            continue
        gs = [pull(fam[y], nu, n - 1, X.dims[y]) for y, nu in X.faces[x]]
        fam[x] = fill_simplex(gs, n, base)
    return fam


class SimplicialPower(Space):
    """𝒜^X: keys (simplex, key of 𝒜); coefficients use the local coordinates u1..u_dim."""

    def __init__(self, C: Space, X: FiniteSimplicialSet, reduced: bool = False):
        self.C, self.X, self.reduced = C, X, reduced
        self.base = C.base
        self.name = f"{C.name}^{{{X.name}{',+' if reduced else ''}}}"
        self.inner_vars = C.inner_vars | frozenset(simplex_gens(max(X.dim, 0), LOCAL))
        self._sig = (C, id(X), reduced)

    @property
    def objects(self):
        return self.C.objects

    def has_object(self, a):
        return self.C.has_object(a)

    def key_ends(self, key):
        x, k = key
        if x not in self.X.dims:
            raise KeyError(key)
        return self.C.key_ends(k)

    def compose_keys(self, ky, kx):
        if ky[0] != kx[0]:
            return {}
        return {(ky[0], k): c for k, c in self.C.compose_keys(ky[1], kx[1]).items()}

    def unit_coeffs(self, a):
        if self.reduced:
            return None
        u = self.C.unit_coeffs(a)
        if u is None:
            return None
        return {(x, k): c for x in self.X.dims for k, c in u.items()}

    def render_key(self, key):
        return f"{self.C.render_key(key[1])}|{format_key(key[0])}"

    def value(self, e: Elem, x) -> Elem:
        return Elem._raw(self.C, e.source, e.target, {k: c for (y, k), c in e.coeffs.items() if y == x})

    def family(self, a, b, values: Mapping) -> Elem:
        coeffs = {}
        for x, v in values.items():
            for k, c in v.coeffs.items():
                coeffs[(x, k)] = c
        return Elem(self, a, b, coeffs)

    def scalar_family(self, fam: Mapping, key, a=None, b=None) -> Elem:
        a, b = self.C.key_ends(key) if a is None else (a, b)
        return Elem(self, a, b, {(x, key): p for x, p in fam.items() if p})

    def compatibility_failures(self, e: Elem) -> list:
        fails = []
        X = self.X
        for x in X.simplices():
            vx = self.value(e, x)
            n = X.dims[x]
            for i in range(n + 1 if n else 0):
                y, nu = X.faces[x][i]
                vy = self.value(e, y)
                lhs = vx.map_coeffs(lambda p: pull(p, face_map(i, n), n - 1, n))
                rhs = vy.map_coeffs(lambda p: pull(p, nu, n - 1, X.dims[y]))
                if lhs != rhs:
                    fails.append(Failure("face compatibility", f"d{i} mismatch on {format_key(x)}",
                                         {"simplex": format_key(x), "face": i, "lhs": str(lhs), "rhs": str(rhs)}))
        if self.reduced and not self.value(e, X.basepoint).is_zero():
            fails.append(Failure("basepoint", "value at the basepoint is not 0", {}))
        return fails

    def contains(self, e: Elem) -> bool:
        return not self.compatibility_failures(e)

    def hom_basis_upto(self, a, b, D: int) -> list:
        fams = family_basis(self.X, D, self.base, self.reduced)
        return [self.scalar_family(f, k, a, b) for f in fams for k in self.C.hom_keys(a, b)]


def power(C: Space, X: FiniteSimplicialSet) -> SimplicialPower:
    return SimplicialPower(C, X)


def basepoint_kernel(C: Space, X: FiniteSimplicialSet) -> SimplicialPower:
    return SimplicialPower(C, X, reduced=True)


# ---------------------------------------------------------------------------
# cube model: 𝒜 with named polynomial coordinates


class PolyPower(Space):
    """𝒜 ⊗ Z[coords] with a membership predicate.

    kind: ``simplex`` (all of 𝒜[t]), ``path`` (p(0) = 0, one coordinate),
    ``sphere`` (constant on the boundary of the cube) or ``loop`` (zero on
    the boundary of the cube, i.e. Ωⁿ𝒜 = 𝒜^{Sⁿ,+}).
    """

    KINDS = ("simplex", "path", "sphere", "loop")

    def __init__(self, C: Space, coords: Sequence[str], kind: str = "sphere"):
        if kind not in self.KINDS:
            raise ValueError(f"unknown power kind {kind!r}")
        if isinstance(C, PolyPower):
            raise TypeError("flatten nested powers with sphere_power")
        self.C = C
        self.coords = tuple(coords)
        self.kind = kind
        self.base = C.base
        labels = {"simplex": "Δ", "path": "P", "sphere": "S", "loop": "Ω"}
        self.name = f"{C.name}^{labels[kind]}[{','.join(self.coords)}]"
        self.inner_vars = C.inner_vars | frozenset(self.coords)
        self._sig = (C, self.coords, kind)

    @property
    def objects(self):
        return self.C.objects

    def has_object(self, a):
        return self.C.has_object(a)

    def key_ends(self, key):
        return self.C.key_ends(key)

    def compose_keys(self, ky, kx):
        return self.C.compose_keys(ky, kx)

    def unit_coeffs(self, a):
        if self.kind in ("path", "loop"):
            return None
        return self.C.unit_coeffs(a)

    def hom_keys(self, a, b):
        raise InfiniteBasisError(f"{self.name} has infinite rank; use graded bases")

    def render_key(self, key):
        return self.C.render_key(key)

    # -- moving between spaces with the same keys
    def wrap(self, x: Elem) -> Elem:
        return Elem._raw(self, x.source, x.target, x.coeffs)

    def underlying(self, e: Elem) -> Elem:
        return Elem._raw(self.C, e.source, e.target, e.coeffs)

    def with_kind(self, kind: str) -> "PolyPower":
        return PolyPower(self.C, self.coords, kind)

    def rewrap(self, e: Elem, kind: str) -> Elem:
        return Elem._raw(self.with_kind(kind), e.source, e.target, e.coeffs)

    def evaluate_at(self, e: Elem, coord: str, value) -> Elem:
        """Restriction to a face of the cube, as an element of 𝒜 with the remaining coordinates."""
        return self.underlying(e).substitute({coord: value})

    def faces(self, e: Elem) -> list:
        return [(c, v, self.evaluate_at(e, c, v)) for c in self.coords for v in (0, 1)]

    def membership_failures(self, e: Elem) -> list:
        fails = []
        if self.kind == "simplex":
            return fails
        if self.kind == "path":
            for c in self.coords:
                if not self.evaluate_at(e, c, 0).is_zero():
                    fails.append(Failure("path", f"value at {c}=0 is not 0", {"coord": c}))
            return fails
        faces = self.faces(e)
        if self.kind == "loop":
            for c, v, f in faces:
                if not f.is_zero():
                    fails.append(Failure("loop", f"value at {c}={v} is {f}, not 0", {"coord": c, "value": v}))
            return fails
        ref = faces[0][2] if faces else None
        if ref is not None and set(self.coords) & ref.variables:
            fails.append(Failure("sphere", "boundary value is not constant", {"value": str(ref)}))
        for c, v, f in faces[1:]:
            if f != ref:
                fails.append(Failure("sphere", f"boundary value at {c}={v} differs", {"coord": c, "value": v}))
        return fails

    def contains(self, e: Elem) -> bool:
        return not self.membership_failures(e)

    def graded_basis(self, a, b, D: int) -> list:
        """R-basis of the degree ≤ D part (per coordinate degree ≤ D) of Hom(a, b)."""
        lattice = cube_lattice(self.coords, D, self.base, self.kind)
        ring = poly_ring(self.base, self.coords)
        out = []
        for vec, monos in lattice:
            p = ring.zero
            for c, m in zip(vec, monos):
                if c:
                    p = p + Poly(ring, {m: c})
            for k in self.C.hom_keys(a, b):
                out.append(Elem(self, a, b, {k: p}))
        return out


def sphere_power(D: Space, coord: str, kind: str = "sphere") -> PolyPower:
    """D^{S¹} in the cube model, merging coordinates when D is already a power."""
    if isinstance(D, PolyPower):
        return PolyPower(D.C, D.coords + (coord,), kind)
    return PolyPower(D, (coord,), kind)


def rehome(e: Elem, space: Space) -> Elem:
    """Same coefficients, different space with the same keys."""
    return Elem._raw(space, e.source, e.target, e.coeffs)


def cube_monomials(coords: Sequence[str], D: int) -> list:
    out = []
    for exps in itertools.product(range(D + 1), repeat=len(coords)):
        out.append(tuple((c, e) for c, e in sorted(zip(coords, exps), key=lambda ce: natural_key(ce[0])) if e))
    return out


def cube_lattice(coords: Sequence[str], D: int, base: BaseRing = ZZ, kind: str = "loop") -> list:
    """Basis of the scalar polynomials (per-variable degree ≤ D) allowed by ``kind``.

    Solved from the face constraints by exact linear algebra; returns
    [(coefficient vector, monomial list)].
    """
    coords = tuple(coords)
    monos = cube_monomials(coords, D)
    if kind == "simplex":
        return [([1 if i == j else 0 for j in range(len(monos))], monos) for i in range(len(monos))]
    ring = poly_ring(base, coords)
    mono_polys = [Poly(ring, {m: 1}) for m in monos]
    faces = [(c, v) for c in coords for v in (0, 1)]
    if kind == "path":
        faces = [(c, 0) for c in coords]
    rows = []
    if kind in ("loop", "path"):
        for c, v in faces:
            evals = [p.substitute({c: v}) for p in mono_polys]
            support = sorted({m for q in evals for m in q.terms}, key=lambda m: format_key(m))
            for mm in support:
                rows.append([q.coefficient(mm) for q in evals])
    else:
        # sphere: every face equals the face at coords[0] = 0, and that face is constant
        ref = [p.substitute({coords[0]: 0}) for p in mono_polys]
        for c, v in faces:
            evals = [p.substitute({c: v}) - r for p, r in zip(mono_polys, ref)]
            support = sorted({m for q in evals for m in q.terms}, key=lambda m: format_key(m))
            for mm in support:
                rows.append([q.coefficient(mm) for q in evals])
        support = sorted({m for q in ref for m in q.terms if m}, key=lambda m: format_key(m))
        for mm in support:
            rows.append([q.coefficient(mm) for q in ref])
    kernel = nullspace(rows, base, ncols=len(monos))
    return [(vec, monos) for vec in kernel]


# ---------------------------------------------------------------------------
# path and loop extensions, ρ, path algebroids and η


def evaluation(P: PolyPower, coord: str, value) -> LazyHomomorphism:
    """e_v: 𝒜^{Δ¹} → 𝒜 (an algebroid homomorphism)."""
    return LazyHomomorphism(P, P.C, lambda e: P.evaluate_at(e, coord, value), lambda a: a, f"e{value}")


def path_extension(C: Space, var: str = "t") -> FSplitExtension:
    """0 → Ω𝒜 → 𝒜^{Δ¹} → 𝒜⊕𝒜 → 0 with s(x, y) = (1−t)x + ty."""
    E = PolyPower(C, (var,), "simplex")
    Q = DirectSum(C)
    t = poly_ring(C.base, (var,)).gen(var)

    def j(e: Elem) -> Elem:
        return Q.pair(E.evaluate_at(e, var, 0), E.evaluate_at(e, var, 1))

    def s(p: Elem) -> Elem:
        x, y = Q.component(p, 1), Q.component(p, 2)
        return E.wrap(x).scale(1 - t) + E.wrap(y).scale(t)

    def in_ideal(e: Elem) -> bool:
        return E.evaluate_at(e, var, 0).is_zero() and E.evaluate_at(e, var, 1).is_zero()

    def graded(a, b, D):
        keys = C.hom_keys(a, b)
        Es = [E.basis(k).scale(t ** i) for i in range(D + 1) for k in keys]
        As = Q.hom_basis(a, b)
        Is = [E.basis(k).scale((t * t - t) * t ** i) for i in range(D - 1) for k in keys]
        return Es, As, Is

    return FSplitExtension(f"path extension of {C.name}", E, Q, j, s, in_ideal, f"Ω{C.name}", graded)


def top_row_extension(C: Space, var: str = "t") -> FSplitExtension:
    """0 → Ω𝒜 → P𝒜 → 𝒜 → 0 (P𝒜 = {p : p(0) = 0}, j = e₁) with s(x) = t·x."""
    P = PolyPower(C, (var,), "path")
    t = poly_ring(C.base, (var,)).gen(var)

    def in_ideal(e: Elem) -> bool:
        return P.evaluate_at(e, var, 0).is_zero() and P.evaluate_at(e, var, 1).is_zero()

    def graded(a, b, D):
        keys = C.hom_keys(a, b)
        Es = [P.basis(k).scale(t ** i) for i in range(1, D + 1) for k in keys]
        As = C.hom_basis(a, b)
        Is = [P.basis(k).scale((t * t - t) * t ** i) for i in range(D - 1) for k in keys]
        return Es, As, Is

    return FSplitExtension(
        f"top row of {C.name}", P, C,
        j=lambda e: P.evaluate_at(e, var, 1),
        s=lambda x: P.wrap(x).scale(t),
        in_ideal=in_ideal, ideal_name=f"Ω{C.name}", graded=graded,
    )


def rho(C: Space, var: str = "t") -> LazyHomomorphism:
    """ρ: J𝒜 → Ω𝒜, the classifying map of the top row with splitting x ↦ t·x."""
    ext = top_row_extension(C, var)
    gamma = classifying_map(ext)
    loop = PolyPower(C, (var,), "loop")
    return LazyHomomorphism(gamma.source, loop, lambda e: rehome(gamma(e), loop), lambda a: a, "ρ")


class PathAlgebroid(Space):
    """Pℬ ⊕_ℬ 𝒜 for f: 𝒜 → ℬ: pairs (p, x) with p(0) = 0 and p(1) = f(x).

    Keys are ``("P", a, b, k)`` (k a key of ℬ in Hom(f(a), f(b)), coefficient in
    t) and ``("A", k)`` for keys of 𝒜.  The pairing condition is a predicate.
    """

    def __init__(self, f, var: str = "t", pre: Callable = None):
        self.f = f
        self.var = var
        self.pre = pre or (lambda x: x)
        self.A, self.B = f.source, f.target
        self.base = self.A.base
        self.name = f"P({f.name})"
        self.inner_vars = self.B.inner_vars | self.A.inner_vars | {var}
        self._sig = (id(f), var)

    def has_object(self, a):
        return self.A.has_object(a)

    @property
    def objects(self):
        return self.A.objects

    def key_ends(self, key):
        if key[0] == "P":
            _, a, b, k = key
            if self.B.key_ends(k) != (self.f.obj(a), self.f.obj(b)):
                raise EndpointError(f"{k!r} is not in Hom(f({a!r}), f({b!r}))")
            return a, b
        return self.A.key_ends(key[1])

    def compose_keys(self, ky, kx):
        if ky[0] != kx[0]:
            return {}
        if ky[0] == "A":
            return {("A", k): c for k, c in self.A.compose_keys(ky[1], kx[1]).items()}
        _, _, tgt, k1 = ky
        _, src, _, k2 = kx
        return {("P", src, tgt, k): v for k, v in self.B.compose_keys(k1, k2).items()}

    def render_key(self, key):
        if key[0] == "P":
            return f"({self.B.render_key(key[3])},0)"
        return f"(0,{self.A.render_key(key[1])})"

    def pair(self, p: Elem, x: Elem) -> Elem:
        coeffs = {("P", x.source, x.target, k): c for k, c in p.coeffs.items()}
        coeffs.update({("A", k): c for k, c in x.coeffs.items()})
        return Elem(self, x.source, x.target, coeffs)

    def path_part(self, e: Elem) -> Elem:
        return Elem._raw(self.B, self.f.obj(e.source), self.f.obj(e.target),
                         {k[3]: c for k, c in e.coeffs.items() if k[0] == "P"})

    def algebra_part(self, e: Elem) -> Elem:
        return Elem._raw(self.A, e.source, e.target, {k[1]: c for k, c in e.coeffs.items() if k[0] == "A"})

    def membership_failures(self, e: Elem) -> list:
        p = self.path_part(e)
        fails = []
        if not p.substitute({self.var: 0}).is_zero():
            fails.append(Failure("path algebroid", "p(0) ≠ 0", {"p": str(p)}))
        fx = self.f(self.pre(self.algebra_part(e)))
        if p.substitute({self.var: 1}) != fx:
            fails.append(Failure("path algebroid", "p(1) ≠ f(x)", {"p": str(p), "f(x)": str(fx)}))
        return fails


def path_algebroid(f, var: str = "t", pre: Callable = None) -> Tuple[PathAlgebroid, FSplitExtension]:
    """The pullback of the path extension along f, with its F-split top row.

    ``pre`` is applied before f (a projection onto the domain of f when f is
    only meaningful on a subspace, e.g. J^k inside T^k).
    """
    P = PathAlgebroid(f, var, pre)
    t = poly_ring(P.base, (var,)).gen(var)
    prj = P.pre

    def s(x: Elem) -> Elem:
        y = prj(x)
        return P.pair(f(y).scale(t), y)

    def in_ideal(e: Elem) -> bool:
        p = P.path_part(e)
        return P.algebra_part(e).is_zero() and p.substitute({var: 0}).is_zero() and p.substitute({var: 1}).is_zero()

    s.obj = lambda a: a
    ext = FSplitExtension(f"path algebroid of {f.name}", P, f.source, j=P.algebra_part, s=s,
                          in_ideal=in_ideal, ideal_name=f"Ω{P.B.name}")
    return P, ext


def eta(f, var: str = "t", pre: Callable = None, name: str = None) -> LazyHomomorphism:
    """η(f): J𝒜 → ℬ^{S¹}, the classifying map of the path algebroid of f."""
    P, ext = path_algebroid(f, var, pre)
    gamma = classifying_map(ext)
    target = sphere_power(f.target, var)

    def fn(e: Elem) -> Elem:
        v = gamma(e)
        return Elem._raw(target, f.obj(e.source), f.obj(e.target), P.path_part(v).coeffs)

    return LazyHomomorphism(gamma.source, target, fn, f.obj, name or f"η({f.name})")


# ---------------------------------------------------------------------------
# smash isomorphisms (cube model)


@dataclass
class SmashIso:
    """(𝒜^{S^m,+})^{S^n,+} ⇄ 𝒜^{S^{m+n},+}: outer coordinates s_j become t_{m+j}."""

    C: Space
    m: int
    n: int

    def __post_init__(self):
        self.inner = tuple(f"t{i}" for i in range(1, self.m + 1))
        self.outer = tuple(f"s{j}" for j in range(1, self.n + 1))
        self.flat_coords = tuple(f"t{i}" for i in range(1, self.m + self.n + 1))
        self.nested = PolyPower(self.C, self.inner + self.outer, "loop")
        self.flat = PolyPower(self.C, self.flat_coords, "loop")
        self.to_flat = {s: f"t{self.m + j}" for j, s in enumerate(self.outer, 1)}
        self.to_nested = {v: k for k, v in self.to_flat.items()}

    def forward(self, e: Elem) -> Elem:
        return rehome(e.rename(self.to_flat), self.flat)

    def backward(self, e: Elem) -> Elem:
        return rehome(e.rename(self.to_nested), self.nested)

    def nested_lattice(self, D: int, base: BaseRing) -> list:
        """Scalar basis of the nested power, solved level by level."""
        ring = poly_ring(base, self.inner + self.outer)
        monos = cube_monomials(self.inner + self.outer, D)
        polys = [Poly(ring, {m: 1}) for m in monos]
        rows = []
        # inner level: coefficients of each outer monomial lie in Ω^m; outer level: faces in s vanish
        for c in self.inner + self.outer:
            for v in (0, 1):
                evals = [p.substitute({c: v}) for p in polys]
                support = sorted({mm for q in evals for mm in q.terms}, key=format_key)
                for mm in support:
                    rows.append([q.coefficient(mm) for q in evals])
        return [_poly_from(vec, monos, ring) for vec in nullspace(rows, base, ncols=len(monos))]

    def flat_lattice(self, D: int, base: BaseRing) -> list:
        ring = poly_ring(base, self.flat_coords)
        return [_poly_from(vec, monos, ring) for vec, monos in cube_lattice(self.flat_coords, D, base, "loop")]

    def verify(self, D: int = 4) -> list:
        fails = []
        base = self.C.base
        nested = self.nested_lattice(D, base)
        flat = self.flat_lattice(D, base)
        if len(nested) != len(flat):
            fails.append(Failure("smash iso", f"ranks differ: {len(nested)} vs {len(flat)}", {"degree": D}))
        monos = cube_monomials(self.flat_coords, D)
        fvecs = [[p.coefficient(m) for m in monos] for p in flat]
        for p in nested:
            q = p.rename(self.to_flat)
            if not in_span(fvecs, [q.coefficient(m) for m in monos], base):
                fails.append(Failure("smash iso", "forward image leaves the flat lattice", {"poly": str(p)}))
                break
        nmonos = cube_monomials(self.inner + self.outer, D)
        nvecs = [[p.coefficient(m) for m in nmonos] for p in nested]
        for p in flat:
            q = p.rename(self.to_nested)
            if not in_span(nvecs, [q.coefficient(m) for m in nmonos], base):
                fails.append(Failure("smash iso", "backward image leaves the nested lattice", {"poly": str(p)}))
                break
            if q.rename(self.to_flat) != p:
                fails.append(Failure("smash iso", "round trip is not the identity", {"poly": str(p)}))
                break
        return fails


def _poly_from(vec, monos, ring) -> Poly:
    p = ring.zero
    for c, m in zip(vec, monos):
        if c:
            p = p + Poly(ring, {m: c})
    return p


def smash_iso(C: Space, m: int, n: int) -> SmashIso:
    if m + n > 3:
        raise ValueError("smash_iso is limited to m + n ≤ 3")
    return SmashIso(C, m, n)


# ---------------------------------------------------------------------------
# interchange J^k(ℬ^{S^l}) → (J^kℬ)^{S^l}


def interchange(B: Space, k: int, coords: Sequence[str]):
    """Iterated classifying maps moving the sphere coordinates out of the tensor atoms.

    Returns (source tower over ℬ^{S^l}, target tower over ℬ, map T^k(ℬ^{S^l}) → (T^kℬ)^{S^l}).
    The map restricts to J^k(ℬ^{S^l}) → (J^kℬ)^{S^l}.
    """
    coords = tuple(coords)
    if k > 2 or len(coords) > 2:
        raise ValueError("interchange is limited to k, l ≤ 2")
    Bl = PolyPower(B, coords, "sphere")
    src = JTower(Bl, max(k, 1))
    tgt = JTower(B, max(k, 1))
    if k == 0 or not coords:
        if not coords:
            ident = LazyHomomorphism(src.T(k), tgt.T(k), lambda e: rehome(e, tgt.T(k)), lambda a: a, "id")
        else:
            ident = LazyHomomorphism(Bl, Bl, lambda e: e, lambda a: a, "id")
        return src, tgt, ident
    maps = [LazyHomomorphism(Bl, Bl, lambda e: e, lambda a: a, "id")]
    for level in range(1, k + 1):
        prev = maps[-1]
        Tt = tgt.T(level)
        out_space = PolyPower(Tt, coords, "sphere")

        def on_atom(x: Elem, prev=prev, Tt=Tt, out_space=out_space) -> Elem:
            y = prev(x)
            under = Elem._raw(Tt.C, y.source, y.target, y.coeffs)
            return rehome(sigma(under, Tt), out_space)

        beta = ModuloidMap(src.T(level - 1), out_space, on_atom, lambda a: a)
        maps.append(adjunction_H(beta, src.T(level), out_space, f"s{level}"))
    return src, tgt, maps[k]


# ---------------------------------------------------------------------------
# the pushout sequence 0 → R^{X∪_B C} → R^X ⊕ R^C → R^B → 0


@dataclass
class PushoutData:
    X: FiniteSimplicialSet
    B: list
    C: FiniteSimplicialSet
    f: dict
    P: FiniteSimplicialSet
    qx: SimplicialMap
    qc: SimplicialMap
    Bset: FiniteSimplicialSet
    fmap: SimplicialMap
    incl: SimplicialMap


def pushout_data(X, B, C, f) -> PushoutData:
    P, qx, qc = pushout(X, B, C, f)
    B = sorted(set(B), key=lambda b: (X.dims[b], _sort_key(b)))
    Bset = FiniteSimplicialSet("B", {b: X.dims[b] for b in B}, {b: X.faces[b] for b in B if X.dims[b] > 0})
    fmap = SimplicialMap(Bset, C, dict(f), "f")
    incl = SimplicialMap(Bset, X, {b: (b, tuple(range(X.dims[b] + 1))) for b in B}, "i")
    return PushoutData(X, B, C, dict(f), P, qx, qc, Bset, fmap, incl)


def pushout_extension(R: BaseRing, X: FiniteSimplicialSet, B: Iterable, C: FiniteSimplicialSet, f: Mapping):
    """The F-split sequence 0 → R^{X∪_B C} → R^X ⊕ R^C → R^B → 0 with splitting (i_*, 0)."""
    data = pushout_data(X, B, C, f)
    Rr = ring_algebroid(R)
    PX, PC, PB, PP = (SimplicialPower(Rr, Y) for Y in (X, C, data.Bset, data.P))
    total = ProductSpace(PX, PC, f"R^{X.name}⊕R^{C.name}")
    one = "1"

    def fam_of(space: SimplicialPower, e: Elem) -> dict:
        zero = scalar_ring(R).zero
        vals = {x: zero for x in space.X.dims}
        for (x, _), c in e.coeffs.items():
            vals[x] = c
        return vals

    def elem_of(space: SimplicialPower, fam: Mapping) -> Elem:
        return Elem._raw(space, "*", "*", {(x, one): p for x, p in fam.items() if p})

    def j(e: Elem) -> Elem:
        phi = fam_of(PX, total.component(e, 1))
        psi = fam_of(PC, total.component(e, 2))
        left = pullback_family(data.incl, phi)
        right = pullback_family(data.fmap, psi)
        return elem_of(PB, {b: left[b] - right[b] for b in data.B})

    def s(beta: Elem) -> Elem:
        ext = extend_family(X, data.B, fam_of(PB, beta), R)
        return total.pair(elem_of(PX, ext), PC.zero("*", "*"))

    def i(e: Elem) -> Elem:
        fam = fam_of(PP, e)
        return total.pair(elem_of(PX, pullback_family(data.qx, fam)), elem_of(PC, pullback_family(data.qc, fam)))

    def in_ideal(e: Elem) -> bool:
        return j(e).is_zero()

    def graded(a, b, D):
        Es = [total.pair(elem_of(PX, fam), PC.zero("*", "*")) for fam in family_basis(X, D, R)]
        Es += [total.pair(PX.zero("*", "*"), elem_of(PC, fam)) for fam in family_basis(C, D, R)]
        As = [elem_of(PB, fam) for fam in family_basis(data.Bset, D, R)]
        Is = [elem_of(PP, fam) for fam in family_basis(data.P, D, R)]
        return Es, As, Is

    ext = FSplitExtension(f"pushout sequence for {data.P.name}", total, PB, j, s, in_ideal,
                          f"R^{data.P.name}", graded, i)
    ext.data = data
    ext.powers = (PX, PC, PB, PP)
    return ext


def act_on_family(perm: Mapping, fam: Mapping) -> dict:
    """(g·φ)(x) = φ(x·g) for a simplicial automorphism given as a permutation of simplices."""
    return {x: fam[perm[x]] for x in fam}


def equivariant_pushout_failures(ext: FSplitExtension, actions: Mapping, D: int) -> list:
    """Check that i, j and the splitting commute with a group acting on X, B, C (and so on P).

    ``actions[g] = (perm_X, perm_C)`` with perm_X preserving B and the gluing map.
    """
    data = ext.data
    PX, PC, PB, PP = ext.powers
    total = ext.total
    fails = []

    def act_total(g, e):
        px, pc = actions[g]
        phi = {x: c for (x, _), c in total.component(e, 1).coeffs.items()}
        psi = {x: c for (x, _), c in total.component(e, 2).coeffs.items()}
        zero = scalar_ring(PX.base).zero
        phi = act_on_family(px, {x: phi.get(x, zero) for x in data.X.dims})
        psi = act_on_family(pc, {x: psi.get(x, zero) for x in data.C.dims})
        return total.pair(Elem._raw(PX, "*", "*", {(x, "1"): p for x, p in phi.items() if p}),
                          Elem._raw(PC, "*", "*", {(x, "1"): p for x, p in psi.items() if p}))

    def act_B(g, e):
        px, _ = actions[g]
        zero = scalar_ring(PB.base).zero
        vals = {b: zero for b in data.B}
        for (b, _), c in e.coeffs.items():
            vals[b] = c
        out = act_on_family(px, vals)
        return Elem._raw(PB, "*", "*", {(b, "1"): p for b, p in out.items() if p})

    for g, (px, pc) in actions.items():
        if set(px[b] for b in data.B) != set(data.B):
            fails.append(Failure("equivariance", f"{g} does not preserve B", {"g": str(g)}))
            continue
        for b in data.B:
            z, mu = data.f[b]
            z2, mu2 = data.f[px[b]]
            if (pc[z], mu) != (z2, mu2):
                fails.append(Failure("equivariance", f"gluing map is not {g}-equivariant at {format_key(b)}", {"g": str(g)}))
        E, A, _ = ext.graded("*", "*", D)
        for e in E:
            if ext.j(act_total(g, e)) != act_B(g, ext.j(e)):
                fails.append(Failure("equivariance", f"j is not {g}-equivariant", {"g": str(g), "element": str(e)}))
                break
        for a in A:
            if ext.s(act_B(g, a)) != act_total(g, ext.s(a)):
                fails.append(Failure("equivariance", f"the splitting is not {g}-equivariant", {"g": str(g), "element": str(a)}))
                break
    return fails


__all__ = [
    "FiniteSimplicialSet", "SimplicialMap", "SimplicialError", "from_ordered_complex", "simplex", "boundary",
    "point", "sphere", "from_cells", "product", "pushout", "quotient", "smash", "subdivide", "last_vertex_map",
    "SubdivisionTower", "build_complex", "pull", "fill_simplex", "family_basis", "family_compatible",
    "pullback_family", "extend_family", "SimplicialPower", "power", "basepoint_kernel", "PolyPower",
    "sphere_power", "rehome", "cube_lattice", "cube_monomials", "evaluation", "path_extension",
    "top_row_extension", "rho", "PathAlgebroid", "path_algebroid", "eta", "SmashIso", "smash_iso",
    "interchange", "pushout_extension", "pushout_data", "act_on_family", "equivariant_pushout_failures",
]
