"""Exact scalars: base rings, sparse multivariate polynomials, and Z^Δ.

Everything downstream stores its coefficients as :class:`Poly` values.  A
polynomial remembers the :class:`PolyRing` it was built in, but equality only
looks at the base ring and the sparse term map, so two polynomials that differ
only by unused generators compare equal.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Union

Scalar = Union[int, Fraction]
Monomial = tuple  # tuple[tuple[str, int], ...] sorted by natural variable order


class RingMismatchError(ValueError):
    pass


class UnknownGeneratorError(KeyError):
    pass


def natural_key(name: str):
    parts = re.split(r"(\d+)", name)
    return tuple((0, int(p)) if p.isdigit() else (1, p) for p in parts if p != "")


# ---------------------------------------------------------------------------
# base rings


@dataclass(frozen=True)
class BaseRing:
    """Z, Q or Z/m.  ``kind`` is one of ``"ZZ"``, ``"QQ"``, ``"ZZ/m"``."""

    kind: str
    modulus: int = 0

    def __post_init__(self):
        if self.kind not in ("ZZ", "QQ", "ZZmod"):
            raise ValueError(f"unknown base ring kind {self.kind!r}")
        if self.kind == "ZZmod" and self.modulus < 2:
            raise ValueError("modulus must be at least 2")

    def __str__(self):
        return f"ZZ/{self.modulus}" if self.kind == "ZZmod" else self.kind

    __repr__ = __str__

    @property
    def is_field(self) -> bool:
        return self.kind == "QQ" or (self.kind == "ZZmod" and _is_prime(self.modulus))

    def __call__(self, value) -> Scalar:
        """Normalise a Python number into this ring."""
        if self.kind == "QQ":
            return Fraction(value)
        if isinstance(value, Fraction):
            if self.kind == "ZZ":
                if value.denominator != 1:
                    raise ValueError(f"{value} is not an integer")
                return int(value.numerator)
            den = pow(value.denominator, -1, self.modulus)
            return value.numerator * den % self.modulus
        if isinstance(value, bool) or not isinstance(value, int):
            raise TypeError(f"cannot coerce {value!r} into {self}")
        if self.kind == "ZZ":
            return value
        return value % self.modulus

    def is_unit(self, value) -> bool:
        value = self(value)
        if self.kind == "QQ":
            return value != 0
        if self.kind == "ZZ":
            return value in (1, -1)
        from math import gcd

        return gcd(value, self.modulus) == 1

    def inverse(self, value) -> Scalar:
        value = self(value)
        if not self.is_unit(value):
            raise ZeroDivisionError(f"{value} is not invertible in {self}")
        if self.kind == "QQ":
            return 1 / value
        if self.kind == "ZZ":
            return value
        return pow(value, -1, self.modulus)

    def quotient(self, a, b):
        """Exact quotient a/b, or None when b does not divide a."""
        a, b = self(a), self(b)
        if b == 0:
            return 0 if a == 0 else None
        if self.kind == "QQ":
            return a / b
        if self.kind == "ZZ":
            return a // b if a % b == 0 else None
        if self.is_unit(b):
            return a * pow(b, -1, self.modulus) % self.modulus
        # search is fine for desk-scale moduli
        for q in range(self.modulus):
            if q * b % self.modulus == a:
                return q
        return None

    def parse(self, text: str) -> Scalar:
        text = text.strip()
        if "/" in text:
            return self(Fraction(text))
        return self(int(text))

    def accepts(self, other: "BaseRing") -> bool:
        """True when elements of ``other`` map canonically into this ring."""
        if other == self or other == ZZ:
            return True
        return self.kind == "ZZmod" and other.kind == "ZZmod" and other.modulus % self.modulus == 0


def _is_prime(m: int) -> bool:
    if m < 2:
        return False
    i = 2
    while i * i <= m:
        if m % i == 0:
            return False
        i += 1
    return True


ZZ = BaseRing("ZZ")
QQ = BaseRing("QQ")


def Zmod(m: int) -> BaseRing:
    return BaseRing("ZZmod", m)


def parse_base_ring(text: str) -> BaseRing:
    text = text.strip().replace(" ", "")
    if text in ("ZZ", "Z"):
        return ZZ
    if text in ("QQ", "Q"):
        return QQ
    m = re.fullmatch(r"(?:ZZ|Z)/(\d+)", text)
    if m:
        return Zmod(int(m.group(1)))
    raise ValueError(f"unknown base ring {text!r}")


# ---------------------------------------------------------------------------
# monomials


def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for v, e in b:
        d[v] = d.get(v, 0) + e
    return tuple(sorted(d.items(), key=lambda ve: natural_key(ve[0])))


def mono_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


def mono_split(m: Monomial, names) -> tuple[Monomial, Monomial]:
    """Split a monomial into (part in ``names``, rest)."""
    inside = tuple(ve for ve in m if ve[0] in names)
    outside = tuple(ve for ve in m if ve[0] not in names)
    return inside, outside


def mono_str(m: Monomial) -> str:
    return "*".join(v if e == 1 else f"{v}^{e}" for v, e in m)


# ---------------------------------------------------------------------------
# polynomial rings


@dataclass(frozen=True)
class PolyRing:
    base: BaseRing
    gens: tuple = ()

    def __post_init__(self):
        gens = tuple(self.gens)
        if len(set(gens)) != len(gens):
            raise ValueError("generator names must be unique")
        for g in gens:
            if not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", g):
                raise ValueError(f"bad generator name {g!r}")
        object.__setattr__(self, "gens", gens)

    def __str__(self):
        return f"{self.base}[{', '.join(self.gens)}]" if self.gens else str(self.base)

    def gen(self, name: str) -> "Poly":
        if name not in self.gens:
            raise UnknownGeneratorError(name)
        return Poly(self, {((name, 1),): self.base(1)})

    def const(self, c) -> "Poly":
        return Poly(self, {(): self.base(c)})

    @property
    def zero(self) -> "Poly":
        return Poly(self, {})

    @property
    def one(self) -> "Poly":
        return self.const(1)

    def extend(self, *names: str) -> "PolyRing":
        extra = [n for n in names if n not in self.gens]
        return PolyRing(self.base, self.gens + tuple(extra))

    def join(self, other: "PolyRing") -> "PolyRing":
        if other.base != self.base:
            raise RingMismatchError(f"{self.base} vs {other.base}")
        if other is self or other.gens == self.gens:
            return self
        return self.extend(*other.gens)

    def __call__(self, value) -> "Poly":
        if isinstance(value, Poly):
            return value.in_ring(self)
        if isinstance(value, str):
            return self.parse(value)
        return self.const(value)

    def parse(self, text: str) -> "Poly":
        return _PolyParser(self, text).parse()


@lru_cache(maxsize=None)
def scalar_ring(base: BaseRing) -> PolyRing:
    return PolyRing(base, ())


def poly_ring(base: BaseRing, gens: Iterable[str]) -> PolyRing:
    return _poly_ring(base, tuple(gens))


@lru_cache(maxsize=4096)
def _poly_ring(base, gens):
    return PolyRing(base, gens)


class Poly:
    """Sparse polynomial.  ``terms`` maps monomials to nonzero base scalars."""

    __slots__ = ("ring", "terms", "_hash")

    def __init__(self, ring: PolyRing, terms: Mapping, *, _trusted: bool = False):
        self.ring = ring
        if _trusted:
            self.terms = terms
        else:
            base = ring.base
            clean = {}
            for m, c in terms.items():
                c = base(c)
                if c != 0:
                    clean[m] = c
            self.terms = clean
        self._hash = None

    # -- construction helpers
    @staticmethod
    def _make(ring, terms):
        return Poly(ring, terms, _trusted=True)

    def in_ring(self, ring: PolyRing) -> "Poly":
        if ring.base != self.ring.base:
            if ring.base.accepts(self.ring.base):
                return Poly(ring, self.terms)
            raise RingMismatchError(f"{self.ring.base} vs {ring.base}")
        missing = self.variables - set(ring.gens)
        if missing:
            ring = ring.extend(*sorted(missing, key=natural_key))
        return Poly._make(ring, self.terms)

    def change_base(self, base: BaseRing) -> "Poly":
        """Push coefficients along the canonical map into ``base``."""
        if not base.accepts(self.ring.base):
            raise RingMismatchError(f"no canonical map {self.ring.base} -> {base}")
        return Poly(poly_ring(base, self.ring.gens), self.terms)

    # -- coercion of the other operand
    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.ring.base != self.ring.base:
                raise RingMismatchError(f"{self.ring.base} vs {other.ring.base}")
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return Poly(self.ring, {(): other})
        return NotImplemented

    def _joined(self, other: "Poly") -> PolyRing:
        if other.ring is self.ring:
            return self.ring
        if other.ring.gens == self.ring.gens:
            return self.ring
        if not other.ring.gens:
            return self.ring
        if not self.ring.gens:
            return other.ring
        return self.ring.join(other.ring)

    # -- arithmetic
    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        ring = self._joined(other)
        base = ring.base
        terms = dict(self.terms)
        for m, c in other.terms.items():
            v = base(terms.get(m, 0) + c)
            if v:
                terms[m] = v
            else:
                terms.pop(m, None)
        return Poly._make(ring, terms)

    __radd__ = __add__

    def __neg__(self):
        base = self.ring.base
        return Poly._make(self.ring, {m: base(-c) for m, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        ring = self._joined(other)
        base = ring.base
        terms: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = mono_mul(m1, m2)
                terms[m] = terms.get(m, 0) + c1 * c2
        return Poly(ring, {m: base(c) for m, c in terms.items()})

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("exponent must be a non-negative integer")
        result = self.ring.one
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    # -- comparison
    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.ring.base == other.ring.base and self.terms == other.terms
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            try:
                c = self.ring.base(other)
            except (TypeError, ValueError):
                return False
            return self.terms == ({(): c} if c else {})
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.ring.base, frozenset(self.terms.items())))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    # -- inspection
    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(m == () for m in self.terms)

    def constant_value(self) -> Scalar:
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return self.terms.get((), self.ring.base(0))

    def coefficient(self, mono: Monomial) -> Scalar:
        return self.terms.get(mono, self.ring.base(0))

    @property
    def variables(self) -> set:
        return {v for m in self.terms for v, _ in m}

    def degree(self) -> int:
        return max((mono_degree(m) for m in self.terms), default=-1)

    def degree_in(self, var: str) -> int:
        return max((dict(m).get(var, 0) for m in self.terms), default=-1)

    def sorted_terms(self):
        return sorted(
            self.terms.items(),
            key=lambda mc: (-mono_degree(mc[0]), [(natural_key(v), -e) for v, e in mc[0]]),
        )

    # -- substitution
    def substitute(self, images: Mapping[str, object]) -> "Poly":
        """Ring homomorphism sending each named generator to the given value."""
        ring = self.ring
        imgs = {}
        for name, val in images.items():
            if isinstance(val, Poly):
                if val.ring.base != ring.base:
                    raise RingMismatchError(f"{ring.base} vs {val.ring.base}")
                imgs[name] = val
            else:
                imgs[name] = scalar_ring(ring.base).const(val)
        kept = tuple(g for g in ring.gens if g not in imgs)
        out_ring = poly_ring(ring.base, kept)
        for v in imgs.values():
            out_ring = out_ring.join(v.ring) if v.ring.gens else out_ring
        result = out_ring.zero
        power_cache: dict = {}
        for m, c in self.terms.items():
            term = Poly._make(out_ring, {(): c})
            rest = []
            for v, e in m:
                if v in imgs:
                    key = (v, e)
                    if key not in power_cache:
                        power_cache[key] = imgs[v] ** e
                    term = term * power_cache[key]
                else:
                    rest.append((v, e))
            if rest:
                term = term * Poly._make(out_ring, {tuple(rest): ring.base(1)})
            result = result + term
        return result.in_ring(out_ring) if result.ring.gens != out_ring.gens else result

    def evaluate(self, assignment: Mapping[str, object]) -> "Poly":
        for name in assignment:
            if name not in self.ring.gens:
                raise UnknownGeneratorError(name)
        if not assignment:
            return self
        return self.substitute(assignment)

    def rename(self, mapping: Mapping[str, str]) -> "Poly":
        """Rename variables (a bijective substitution, so no arithmetic needed)."""
        terms = {}
        for m, c in self.terms.items():
            nm = tuple(sorted(((mapping.get(v, v), e) for v, e in m), key=lambda ve: natural_key(ve[0])))
            terms[nm] = c
        gens = tuple(mapping.get(g, g) for g in self.ring.gens)
        if len(set(gens)) != len(gens):
            raise ValueError("renaming is not injective on generators")
        return Poly._make(poly_ring(self.ring.base, gens), terms)

    def split(self, names) -> dict:
        """Group terms by the monomial in ``names``: {inner mono: poly in the rest}."""
        out: dict = {}
        for m, c in self.terms.items():
            inner, outer = mono_split(m, names)
            out.setdefault(inner, {})[outer] = c
        return {k: Poly._make(self.ring, v) for k, v in out.items()}

    def exact_divide(self, other: "Poly") -> "Poly":
        """Exact multivariate division; raises ValueError when it does not divide."""
        other = self._coerce(other)
        if other.is_zero():
            raise ZeroDivisionError("division by zero polynomial")
        names = sorted(self.variables | other.variables, key=natural_key)

        def key(m):
            d = dict(m)
            return (mono_degree(m), tuple(d.get(v, 0) for v in names))

        lm, lc = max(other.terms.items(), key=lambda mc: key(mc[0]))
        base = self.ring.base
        rem, quo = self, self.ring.zero
        while not rem.is_zero():
            m, c = max(rem.terms.items(), key=lambda mc: key(mc[0]))
            qm = _mono_div(m, lm)
            qc = base.quotient(c, lc) if qm is not None else None
            if qc is None:
                raise ValueError(f"{other} does not divide {self}")
            q = Poly._make(rem.ring, {qm: qc})
            quo = quo + q
            rem = rem - q * other
        return quo

    # -- rendering
    def __str__(self):
        if not self.terms:
            return "0"
        pieces = []
        for m, c in self.sorted_terms():
            neg = isinstance(c, (int, Fraction)) and c < 0
            a = -c if neg else c
            if m == ():
                body = str(a)
            elif a == 1:
                body = mono_str(m)
            else:
                body = f"{a}*{mono_str(m)}"
            pieces.append(("-" if neg else "+", body))
        first_sign, first = pieces[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in pieces[1:]:
            out += f" {sign} {body}"
        return out

    def __repr__(self):
        return f"Poly({str(self)!r} in {self.ring})"


def _mono_div(m: Monomial, d: Monomial):
    md = dict(m)
    for v, e in d:
        if md.get(v, 0) < e:
            return None
        md[v] -= e
    return tuple(sorted(((v, e) for v, e in md.items() if e), key=lambda ve: natural_key(ve[0])))


def poly_arith(a: Poly, b: Poly, op: str) -> Poly:
    if a.ring.base != b.ring.base:
        raise RingMismatchError(f"{a.ring.base} vs {b.ring.base}")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown op {op!r}")


def as_poly(value, base: BaseRing) -> Poly:
    if isinstance(value, Poly):
        if value.ring.base != base:
            if base.accepts(value.ring.base):
                return value.change_base(base)
            raise RingMismatchError(f"{value.ring.base} vs {base}")
        return value
    if isinstance(value, str):
        return parse_poly(value, base)
    return scalar_ring(base).const(value)


def parse_poly(text: str, base: BaseRing = ZZ) -> Poly:
    names = sorted(set(re.findall(r"[A-Za-z_][A-Za-z_0-9]*", text)), key=natural_key)
    return poly_ring(base, names).parse(text)


# ---------------------------------------------------------------------------
# parsing


class PolyParseError(ValueError):
    def __init__(self, msg, pos):
        super().__init__(f"{msg} at column {pos + 1}")
        self.pos = pos


class _PolyParser:
    """Recursive descent over + - * ^ and parentheses."""

    _tok = re.compile(r"\s*(?:(\d+(?:/\d+)?)|([A-Za-z_][A-Za-z_0-9]*)|(.))")

    def __init__(self, ring: PolyRing, text: str):
        self.ring = ring
        self.text = text
        self.toks = []
        for m in self._tok.finditer(text):
            if m.group(0).strip() == "":
                continue
            kind = "num" if m.group(1) else "name" if m.group(2) else "op"
            self.toks.append((kind, m.group(m.lastindex), m.start(m.lastindex)))
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else ("end", "", len(self.text))

    def take(self):
        t = self.peek()
        self.i += 1
        return t

    def parse(self) -> Poly:
        if not self.toks:
            raise PolyParseError("empty polynomial", 0)
        p = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise PolyParseError(f"unexpected {val!r}", pos)
        return p

    def expr(self):
        kind, val, _ = self.peek()
        neg = False
        if val in "+-" and kind == "op":
            self.take()
            neg = val == "-"
        p = self.term()
        if neg:
            p = -p
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                q = self.term()
                p = p + q if val == "+" else p - q
            else:
                return p

    def term(self):
        p = self.power()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val == "*":
                self.take()
                p = p * self.power()
            elif kind in ("num", "name") or (kind == "op" and val == "("):
                p = p * self.power()
            else:
                return p

    def power(self):
        p = self.atom()
        kind, val, pos = self.peek()
        if kind == "op" and val == "^":
            self.take()
            k2, v2, p2 = self.take()
            if k2 != "num" or "/" in v2:
                raise PolyParseError("exponent must be a non-negative integer", p2)
            p = p ** int(v2)
        return p

    def atom(self):
        kind, val, pos = self.take()
        if kind == "num":
            return self.ring.const(self.ring.base.parse(val))
        if kind == "name":
            if val not in self.ring.gens:
                raise PolyParseError(f"unknown generator {val!r}", pos)
            return self.ring.gen(val)
        if kind == "op" and val == "(":
            p = self.expr()
            k2, v2, p2 = self.take()
            if v2 != ")":
                raise PolyParseError("expected ')'", p2)
            return p
        if kind == "op" and val == "-":
            return -self.atom()
        raise PolyParseError(f"unexpected {val!r}" if val else "unexpected end", pos)


# ---------------------------------------------------------------------------
# the simplicial ring Z^Δ with t0 eliminated


def simplex_gens(n: int, prefix: str = "t") -> tuple:
    return tuple(f"{prefix}{i}" for i in range(1, n + 1))


def simplex_ring(n: int, base: BaseRing = ZZ, prefix: str = "t") -> PolyRing:
    """Z^{Δⁿ} as the free polynomial ring on t1..tn (t0 = 1 - Σ ti)."""
    return poly_ring(base, simplex_gens(n, prefix))


def barycentric(ring: PolyRing, n: int, j: int, prefix: str = "t") -> Poly:
    """The coordinate t_j of Δⁿ as an element of ``ring`` (t0 rewritten)."""
    if j == 0:
        p = ring.one
        for i in range(1, n + 1):
            p = p - ring.gen(f"{prefix}{i}")
        return p
    return ring.gen(f"{prefix}{j}")


def is_monotone(theta, k: int, n: int) -> bool:
    return (
        len(theta) == k + 1
        and all(0 <= x <= n for x in theta)
        and all(theta[i] <= theta[i + 1] for i in range(k))
    )


def coordinate_images(theta, k: int, n: int, base: BaseRing = ZZ, prefix: str = "t", target_prefix=None):
    """Images of t1..tn under θ*: Z^{Δⁿ} → Z^{Δᵏ} for monotone θ: [k] → [n].

    t_j ↦ Σ_{i ∈ θ⁻¹(j)} t_i, with the eliminated coordinate t0 of Δᵏ
    rewritten as 1 - Σ t_i.
    """
    theta = tuple(theta)
    if not is_monotone(theta, k, n):
        raise ValueError(f"{theta} is not a monotone map [{k}] -> [{n}]")
    tp = prefix if target_prefix is None else target_prefix
    ring = simplex_ring(k, base, tp)
    images = {}
    for j in range(1, n + 1):
        p = ring.zero
        for i, tj in enumerate(theta):
            if tj == j:
                p = p + barycentric(ring, k, i, tp)
        images[f"{prefix}{j}"] = p
    return images


def simplicial_operator(p: Poly, theta, k: int, n: int = None, prefix: str = "t") -> Poly:
    """Apply θ* to p ∈ Z^{Δⁿ}; θ: [k] → [n] monotone."""
    if n is None:
        n = len(p.ring.gens)
    extra = p.variables - set(simplex_gens(n, prefix))
    if extra:
        raise UnknownGeneratorError(f"{sorted(extra)} not coordinates of Δ^{n}")
    imgs = coordinate_images(theta, k, n, p.ring.base, prefix)
    return p.substitute(imgs).in_ring(simplex_ring(k, p.ring.base, prefix))


def face_map(i: int, n: int) -> tuple:
    """δ_i: [n-1] → [n], skipping i."""
    if not 0 <= i <= n:
        raise IndexError(f"face index {i} out of range for n={n}")
    return tuple(j if j < i else j + 1 for j in range(n))


def degeneracy_map(i: int, n: int) -> tuple:
    """s_i: [n+1] → [n], hitting i twice."""
    if not 0 <= i <= n:
        raise IndexError(f"degeneracy index {i} out of range for n={n}")
    return tuple(j if j <= i else j - 1 for j in range(n + 2))


def simplicial_face(p: Poly, i: int, n: int = None, prefix: str = "t") -> Poly:
    """∂_i: Z^{Δⁿ} → Z^{Δ^{n-1}}."""
    if n is None:
        n = len(p.ring.gens)
    if n < 1:
        raise IndexError("face maps need n >= 1")
    return simplicial_operator(p, face_map(i, n), n - 1, n, prefix)


def simplicial_degeneracy(p: Poly, i: int, n: int = None, prefix: str = "t") -> Poly:
    """σ_i: Z^{Δⁿ} → Z^{Δ^{n+1}}."""
    if n is None:
        n = len(p.ring.gens)
    return simplicial_operator(p, degeneracy_map(i, n), n + 1, n, prefix)


def compose_maps(theta, phi) -> tuple:
    """θ∘φ for maps of finite ordinals given as tuples."""
    return tuple(theta[x] for x in phi)
