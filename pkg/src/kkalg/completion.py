"""Additive completion 𝒜⊕, the stabilised algebra 𝒜_H, ⊗ and ⊕ of algebroids."""

from __future__ import annotations

from typing import Mapping, Sequence

from .core import (
    Algebroid,
    Elem,
    EndpointError,
    Homomorphism,
    InfiniteBasisError,
    LazyHomomorphism,
    Space,
    format_key,
)
from .rings import RingMismatchError


# ---------------------------------------------------------------------------
# additive completion


class AdditiveCompletion(Space):
    """Objects are tuples of objects of C; Hom(s, t) are |t|×|s| matrices.

    Keys are ``(s, t, i, j, k)``: entry in row i, column j equal to the basis
    key k of C, which must lie in Hom(s[j], t[i]).
    """

    def __init__(self, C: Space):
        self.C = C
        self.base = C.base
        self.name = f"{C.name}⊕"
        self.inner_vars = C.inner_vars
        self._sig = (C,)

    def has_object(self, s) -> bool:
        return isinstance(s, tuple) and all(self.C.has_object(a) for a in s)

    def key_ends(self, key):
        s, t, i, j, k = key
        if self.C.key_ends(k) != (s[j], t[i]):
            raise EndpointError(f"entry {k!r} does not fit at ({i},{j})")
        return s, t

    def compose_keys(self, ky, kx):
        s2, t, i, j, k1 = ky
        r, s, j2, l, k2 = kx
        if s2 != s:
            raise EndpointError("matrix shapes do not match")
        if j != j2:
            return {}
        return {(r, t, i, l, k): c for k, c in self.C.compose_keys(k1, k2).items()}

    def unit_coeffs(self, s):
        out = {}
        for i, a in enumerate(s):
            u = self.C.unit_coeffs(a)
            if u is None:
                return None
            for k, c in u.items():
                out[(s, s, i, i, k)] = c
        return out

    def hom_keys(self, s, t):
        return [(s, t, i, j, k) for i in range(len(t)) for j in range(len(s)) for k in self.C.hom_keys(s[j], t[i])]

    # -- matrices
    def matrix(self, s: Sequence, t: Sequence, entries) -> Elem:
        """Build an element from a |t|×|s| grid of C-elements (or 0)."""
        s, t = tuple(s), tuple(t)
        coeffs = {}
        for i, row in enumerate(entries):
            if len(row) != len(s):
                raise ValueError("row length does not match source")
            for j, e in enumerate(row):
                if isinstance(e, int) and e == 0:
                    continue
                if (e.source, e.target) != (s[j], t[i]):
                    raise EndpointError(f"entry ({i},{j}) is not in Hom({s[j]!r},{t[i]!r})")
                for k, c in e.coeffs.items():
                    coeffs[(s, t, i, j, k)] = c
        if len(entries) != len(t):
            raise ValueError("number of rows does not match target")
        return Elem(self, s, t, coeffs)

    def entry(self, e: Elem, i: int, j: int) -> Elem:
        s, t = e.source, e.target
        coeffs = {key[4]: c for key, c in e.coeffs.items() if key[2] == i and key[3] == j}
        return Elem._raw(self.C, s[j], t[i], coeffs)

    def rows(self, e: Elem) -> list:
        s, t = e.source, e.target
        grid = [[{} for _ in s] for _ in t]
        for (_, _, i, j, k), c in e.coeffs.items():
            grid[i][j][k] = c
        return [[Elem._raw(self.C, s[j], t[i], grid[i][j]) for j in range(len(s))] for i in range(len(t))]

    def from_C(self, x: Elem) -> Elem:
        """1×1 matrix."""
        return self.matrix((x.source,), (x.target,), [[x]])

    def block_diag(self, *blocks: Elem) -> Elem:
        s = sum((b.source for b in blocks), ())
        t = sum((b.target for b in blocks), ())
        coeffs = {}
        ro = co = 0
        for b in blocks:
            for (_, _, i, j, k), c in b.coeffs.items():
                coeffs[(s, t, i + ro, j + co, k)] = c
            ro += len(b.target)
            co += len(b.source)
        return Elem._raw(self, s, t, coeffs)

    def place(self, e: Elem, s: tuple, t: tuple, row_offset: int, col_offset: int) -> Elem:
        """Embed ``e`` as a block of a bigger matrix in Hom(s, t)."""
        coeffs = {}
        for (_, _, i, j, k), c in e.coeffs.items():
            if s[j + col_offset] != e.source[j] or t[i + row_offset] != e.target[i]:
                raise EndpointError("block does not fit")
            coeffs[(s, t, i + row_offset, j + col_offset, k)] = c
        return Elem._raw(self, s, t, coeffs)

    def flatten(self, e: Elem, outer: "AdditiveCompletion") -> Elem:
        """(C⊕)⊕ → C⊕: a matrix of matrices becomes a block matrix."""
        s = sum(e.source, ())
        t = sum(e.target, ())
        roff = [sum(len(x) for x in e.target[:i]) for i in range(len(e.target))]
        coff = [sum(len(x) for x in e.source[:j]) for j in range(len(e.source))]
        coeffs = {}
        for (_, _, i, j, inner), c in e.coeffs.items():
            _, _, ii, jj, k = inner
            key = (s, t, roff[i] + ii, coff[j] + jj, k)
            v = coeffs.get(key)
            coeffs[key] = c if v is None else v + c
        return Elem(self, s, t, coeffs)


def additive_completion(A: Space) -> AdditiveCompletion:
    return AdditiveCompletion(A)


def matrix_oplus(alpha, name: str = None) -> LazyHomomorphism:
    """α⊕ for α: C → D (or α: C → D⊕, in which case blocks are flattened)."""
    src = AdditiveCompletion(alpha.source)
    tgt_space = alpha.target
    flat = isinstance(tgt_space, AdditiveCompletion)
    tgt = tgt_space if flat else AdditiveCompletion(tgt_space)

    def obj(s):
        if flat:
            return sum((alpha.obj(a) for a in s), ())
        return tuple(alpha.obj(a) for a in s)

    def fn(e: Elem) -> Elem:
        s, t = e.source, e.target
        S, T = obj(s), obj(t)
        if flat:
            roff = [sum(len(alpha.obj(a)) for a in t[:i]) for i in range(len(t))]
            coff = [sum(len(alpha.obj(a)) for a in s[:j]) for j in range(len(s))]
        out = tgt.zero(S, T)
        for (_, _, i, j, k), c in e.coeffs.items():
            img = alpha(alpha.source.basis(k)).scale(c)
            if flat:
                out = out + tgt.place(img, S, T, roff[i], coff[j])
            else:
                out = out + Elem._raw(tgt, S, T, {(S, T, i, j, kk): cc for kk, cc in img.coeffs.items()})
        return out

    return LazyHomomorphism(src, tgt, fn, obj, name or f"{alpha.name}⊕")


# ---------------------------------------------------------------------------
# the one-object algebra 𝒜_H


class HAlgebra(Space):
    """Finitely supported ℕ×ℕ matrices over the total algebra of C.

    Keys are ``(i, j, k)`` with k a basis key of C.  Products of entries whose
    C-endpoints do not match are zero.  The colimit of End(s) along corner
    inclusions is the subset of elements whose index labels are consistent
    (see :meth:`labels`); for one-object C this is all of M_∞(C).
    """

    def __init__(self, C: Space):
        self.C = C
        self.base = C.base
        self.name = f"{C.name}_H"
        self.inner_vars = C.inner_vars
        self._sig = (C,)

    @property
    def objects(self):
        return ("*",)

    def key_ends(self, key):
        self.C.key_ends(key[2])
        return "*", "*"

    def compose_keys(self, ky, kx):
        i, j, k1 = ky
        j2, l, k2 = kx
        if j != j2 or self.C.key_ends(k1)[0] != self.C.key_ends(k2)[1]:
            return {}
        return {(i, l, k): c for k, c in self.C.compose_keys(k1, k2).items()}

    def labels(self, e: Elem, strict: bool = True):
        """Row/column labels of the nonzero entries: {index: object}."""
        rows, cols = {}, {}
        for (i, j, k) in e.coeffs:
            a, b = self.C.key_ends(k)
            for d, idx, obj in ((cols, j, a), (rows, i, b)):
                if d.setdefault(idx, obj) != obj:
                    raise ValueError(f"index {idx} carries two labels {d[idx]!r}, {obj!r}")
        if strict:
            for idx in set(rows) & set(cols):
                if rows[idx] != cols[idx]:
                    raise ValueError(f"index {idx} is labelled {rows[idx]!r} as a row and {cols[idx]!r} as a column")
            merged = dict(cols)
            merged.update(rows)
            return merged
        return rows, cols

    def in_colimit(self, e: Elem) -> bool:
        try:
            self.labels(e)
            return True
        except ValueError:
            return False

    def normal_form(self, e: Elem, filler=None):
        """(ObjectSequence, matrix) with trailing zero rows/columns stripped."""
        lab = self.labels(e)
        if not lab:
            return (), None
        n = max(lab) + 1
        fill = filler if filler is not None else next(iter(lab.values()))
        seq = tuple(lab.get(i, fill) for i in range(n))
        comp = AdditiveCompletion(self.C)
        m = Elem(comp, seq, seq, {(seq, seq, i, j, k): c for (i, j, k), c in e.coeffs.items()})
        return seq, m


def colimit_algebra(A: Space):
    """Return (𝒜_H, embed_H, factor)."""
    H = HAlgebra(A)
    comp = AdditiveCompletion(A)

    def embed(m: Elem) -> Elem:
        if m.space != comp:
            raise TypeError("embed_H expects an element of the additive completion")
        return Elem._raw(H, "*", "*", {(i, j, k): c for (_, _, i, j, k), c in m.coeffs.items()})

    def factor(alpha) -> Homomorphism:
        return factor_through_completion(alpha, H)

    return H, embed, factor


def factor_through_completion(alpha: Homomorphism, H: HAlgebra, filler=None) -> Homomorphism:
    """Given α: 𝒜 → ℬ_H (explicit), return α′: 𝒜 → ℬ⊕ with embed_H∘α′ = α."""
    src = alpha.source
    comp = AdditiveCompletion(H.C)
    labels = {a: {} for a in src.objects}
    top = -1
    for k in src.all_keys():
        a, b = src.key_ends(k)
        img = alpha.image_of_key(k)
        rows, cols = H.labels(img, strict=False)
        for lab, obj in ((labels[a], cols), (labels[b], rows)):
            for idx, o in obj.items():
                if lab.setdefault(idx, o) != o:
                    raise ValueError(f"images disagree on the label of index {idx}")
                top = max(top, idx)
    n = top + 1
    if filler is None:
        filler = H.C.objects[0]
    seqs = {a: tuple(labels[a].get(i, filler) for i in range(n)) for a in src.objects}
    images = {}
    for k in src.all_keys():
        a, b = src.key_ends(k)
        img = alpha.image_of_key(k)
        s, t = seqs[a], seqs[b]
        images[k] = Elem(comp, s, t, {(s, t, i, j, kk): c for (i, j, kk), c in img.coeffs.items()})
    return Homomorphism(src, comp, seqs, images, f"{alpha.name}′")


# ---------------------------------------------------------------------------
# tensor product and direct sum


class TensorProduct(Space):
    """Objects are pairs; keys are pairs of keys; composition componentwise."""

    def __init__(self, A: Space, B: Space):
        if A.base != B.base:
            raise RingMismatchError(f"{A.base} vs {B.base}")
        self.A, self.B = A, B
        self.base = A.base
        self.name = f"{A.name}⊗{B.name}"
        self.inner_vars = A.inner_vars | B.inner_vars
        self._sig = (A, B)

    def has_object(self, ab):
        return isinstance(ab, tuple) and len(ab) == 2 and self.A.has_object(ab[0]) and self.B.has_object(ab[1])

    @property
    def objects(self):
        return tuple((a, b) for a in self.A.objects for b in self.B.objects)

    def key_ends(self, key):
        (a, a2), (b, b2) = self.A.key_ends(key[0]), self.B.key_ends(key[1])
        return (a, b), (a2, b2)

    def compose_keys(self, ky, kx):
        ra = self.A.compose_keys(ky[0], kx[0])
        if not ra:
            return {}
        rb = self.B.compose_keys(ky[1], kx[1])
        return {(p, q): c * d for p, c in ra.items() for q, d in rb.items()}

    def unit_coeffs(self, ab):
        ua, ub = self.A.unit_coeffs(ab[0]), self.B.unit_coeffs(ab[1])
        if ua is None or ub is None:
            return None
        return {(p, q): c * d for p, c in ua.items() for q, d in ub.items()}

    def hom_keys(self, s, t):
        return [(p, q) for p in self.A.hom_keys(s[0], t[0]) for q in self.B.hom_keys(s[1], t[1])]

    def tensor(self, x: Elem, y: Elem) -> Elem:
        coeffs = {}
        for p, c in x.coeffs.items():
            for q, d in y.coeffs.items():
                coeffs[(p, q)] = c * d
        return Elem(self, (x.source, y.source), (x.target, y.target), coeffs)


def tensor_product(A: Space, B: Space, materialize: bool = True):
    """𝒜 ⊗ ℬ; an explicit Algebroid when both factors are finite."""
    T = TensorProduct(A, B)
    if materialize:
        try:
            return Algebroid.materialize(T, T.name)
        except InfiniteBasisError:
            pass
    return T


class DirectSum(Space):
    """Same objects as C, Hom = Hom_C ⊕ Hom_C; keys ``(1, k)`` and ``(2, k)``."""

    def __init__(self, C: Space):
        self.C = C
        self.base = C.base
        self.name = f"({C.name}⊕{C.name})"
        self.inner_vars = C.inner_vars
        self._sig = (C,)

    def has_object(self, a):
        return self.C.has_object(a)

    @property
    def objects(self):
        return self.C.objects

    def key_ends(self, key):
        if key[0] not in (1, 2):
            raise KeyError(key)
        return self.C.key_ends(key[1])

    def compose_keys(self, ky, kx):
        if ky[0] != kx[0]:
            return {}
        return {(ky[0], k): c for k, c in self.C.compose_keys(ky[1], kx[1]).items()}

    def unit_coeffs(self, a):
        u = self.C.unit_coeffs(a)
        if u is None:
            return None
        return {(i, k): c for i in (1, 2) for k, c in u.items()}

    def hom_keys(self, a, b):
        ks = self.C.hom_keys(a, b)
        return [(1, k) for k in ks] + [(2, k) for k in ks]

    def pair(self, x: Elem, y: Elem) -> Elem:
        if (x.source, x.target) != (y.source, y.target):
            raise EndpointError("components must share endpoints")
        coeffs = {(1, k): c for k, c in x.coeffs.items()}
        coeffs.update({(2, k): c for k, c in y.coeffs.items()})
        return Elem._raw(self, x.source, x.target, coeffs)

    def component(self, e: Elem, i: int) -> Elem:
        return Elem._raw(self.C, e.source, e.target, {k: c for (j, k), c in e.coeffs.items() if j == i})

    def inclusion(self, i: int):
        fn = lambda x: Elem._raw(self, x.source, x.target, {(i, k): c for k, c in x.coeffs.items()})  # noqa: E731
        try:
            keys = self.C.all_keys()
            return Homomorphism(self.C, self, lambda a: a, {k: fn(self.C.basis(k)) for k in keys}, f"ι{i}")
        except InfiniteBasisError:
            return LazyHomomorphism(self.C, self, fn, lambda a: a, f"ι{i}")

    def projection(self, i: int):
        fn = lambda e: self.component(e, i)  # noqa: E731
        try:
            keys = self.all_keys()
            return Homomorphism(self, self.C, lambda a: a, {k: fn(self.basis(k)) for k in keys}, f"p{i}")
        except InfiniteBasisError:
            return LazyHomomorphism(self, self.C, fn, lambda a: a, f"p{i}")


def direct_sum_algebroid(A: Space) -> DirectSum:
    return DirectSum(A)


def describe_matrix(e: Elem) -> list:
    """Rows of entry strings, for reports."""
    comp = e.space
    return [[str(x) for x in row] for row in comp.rows(e)]


def object_label(a) -> str:
    return format_key(a)


def constant_matrix(comp: AdditiveCompletion, s, t, values: Mapping) -> Elem:
    """Matrix whose (i, j) entry is values[(i, j)] times the given C key (helper for tests)."""
    coeffs = {}
    for (i, j), (k, c) in values.items():
        coeffs[(tuple(s), tuple(t), i, j, k)] = c
    return Elem(comp, tuple(s), tuple(t), coeffs)


class ProductSpace(Space):
    """Hom = Hom_A ⊕ Hom_B for two spaces with the same objects; keys (1, k) and (2, k)."""

    def __init__(self, A: Space, B: Space, name: str = None):
        if A.base != B.base:
            raise RingMismatchError(f"{A.base} vs {B.base}")
        self.A, self.B = A, B
        self.base = A.base
        self.name = name or f"({A.name}×{B.name})"
        self.inner_vars = A.inner_vars | B.inner_vars
        self._sig = (A, B)

    def part(self, i):
        return self.A if i == 1 else self.B

    @property
    def objects(self):
        return self.A.objects

    def has_object(self, a):
        return self.A.has_object(a)

    def key_ends(self, key):
        if key[0] not in (1, 2):
            raise KeyError(key)
        return self.part(key[0]).key_ends(key[1])

    def compose_keys(self, ky, kx):
        if ky[0] != kx[0]:
            return {}
        return {(ky[0], k): c for k, c in self.part(ky[0]).compose_keys(ky[1], kx[1]).items()}

    def unit_coeffs(self, a):
        ua, ub = self.A.unit_coeffs(a), self.B.unit_coeffs(a)
        if ua is None or ub is None:
            return None
        out = {(1, k): c for k, c in ua.items()}
        out.update({(2, k): c for k, c in ub.items()})
        return out

    def hom_keys(self, a, b):
        return [(1, k) for k in self.A.hom_keys(a, b)] + [(2, k) for k in self.B.hom_keys(a, b)]

    def pair(self, x: Elem, y: Elem) -> Elem:
        if (x.source, x.target) != (y.source, y.target):
            raise EndpointError("components must share endpoints")
        coeffs = {(1, k): c for k, c in x.coeffs.items()}
        coeffs.update({(2, k): c for k, c in y.coeffs.items()})
        return Elem._raw(self, x.source, x.target, coeffs)

    def component(self, e: Elem, i: int) -> Elem:
        return Elem._raw(self.part(i), e.source, e.target, {k: c for (j, k), c in e.coeffs.items() if j == i})

    def render_key(self, key):
        return f"{self.part(key[0]).render_key(key[1])}@{key[0]}"
