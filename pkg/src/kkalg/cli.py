"""Command-line front end: load a YAML spec, run pipelines and check suites, emit reports.

    kkalg validate SPEC
    kkalg run SPEC PIPELINE
    kkalg check SPEC SUITE

Exit codes: 0 when every check passes, 1 on a check failure, 2 on a usage,
parse or reference error.  Reports are JSON (``--report json``) or text.
The spec and report formats are documented in the README.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import yaml

from . import equivariant as eq
from .core import (
    Algebroid,
    Elem,
    Failure,
    Homomorphism,
    check_algebroid,
    format_key,
    matrix_pattern,
    product_algebra,
    ring_algebroid,
)
from .kk import compose_degree0, conjugation_iso, from_homomorphism, sharp, tower_of, w_homotopy, _matrix_part
from .modules import (
    Bimodule,
    RightModule,
    free_witness,
    identity_module_hom,
    module_class,
    module_smash,
    pushforward_witness,
    tensor_over_A,
    unit_isomorphism,
    verify_isomorphism,
)
from .rings import parse_base_ring, parse_poly
from .simplicial import (
    SimplicialError,
    boundary,
    family_basis,
    from_ordered_complex,
    point,
    pushout_extension,
    rho,
    simplex,
    sphere,
    subdivide,
)
from .tensor import TensorAlgebroid, basic_J_element, pi, sample_J, sigma, ufsplit_square, universal_extension

SPEC_SCHEMA = "kkalg-spec/1"
REPORT_SCHEMA = "kkalg-report/1"
TIMING_FIELDS = ("wall_time",)


class SpecError(Exception):
    """A parse or reference error; ``where`` locates it in the file."""

    def __init__(self, message: str, where: str = ""):
        super().__init__(f"{where}: {message}" if where else message)
        self.where = where


@dataclass
class Params:
    max_degree: int = 4
    stab_size: int = 4
    max_subdiv: int = 2
    seed: int = 0
    jobs: int = 1


@dataclass
class CheckResult:
    name: str
    check: str
    status: str                      # pass, fail or skipped
    detail: str = ""
    witness: Any = None
    wall_time: float = 0.0

    def to_dict(self, timing: bool = True) -> dict:
        d = {"name": self.name, "check": self.check, "status": self.status, "detail": self.detail}
        if self.witness is not None:
            d["witness"] = self.witness
        if timing:
            d["wall_time"] = round(self.wall_time, 4)
        return d


@dataclass
class Report:
    spec: str
    command: str
    target: str
    params: Params
    results: List[CheckResult] = field(default_factory=list)
    output: Any = None

    @property
    def ok(self) -> bool:
        return all(r.status != "fail" for r in self.results)

    def summary(self) -> dict:
        out = {"pass": 0, "fail": 0, "skipped": 0}
        for r in self.results:
            out[r.status] += 1
        return out

    def to_dict(self, timing: bool = True) -> dict:
        params = asdict(self.params)
        params.pop("jobs")
        d = {
            "schema": REPORT_SCHEMA,
            "spec": self.spec,
            "command": self.command,
            "target": self.target,
            "parameters": params,
            "ok": self.ok,
            "summary": self.summary(),
            "checks": [r.to_dict(timing) for r in self.results],
        }
        if self.output is not None:
            d["output"] = self.output
        return d

    def render(self, fmt: str = "json", timing: bool = True) -> str:
        if fmt == "json":
            return json.dumps(self.to_dict(timing), indent=2, sort_keys=False, ensure_ascii=False, default=str) + "\n"
        lines = [f"{self.command} {self.target} [{self.spec}]"]
        p = self.params
        lines.append(f"  max_degree={p.max_degree} stab_size={p.stab_size} max_subdiv={p.max_subdiv} seed={p.seed}")
        for r in self.results:
            t = f" ({r.wall_time:.3f}s)" if timing else ""
            lines.append(f"  {r.status.upper():7} {r.name}: {r.detail}{t}")
            if r.status == "fail" and r.witness is not None:
                lines.append(f"          witness: {json.dumps(r.witness, ensure_ascii=False, default=str, sort_keys=True)}")
        s = self.summary()
        lines.append(f"  {s['pass']} passed, {s['fail']} failed, {s['skipped']} skipped")
        if self.output is not None:
            lines.append(json.dumps(self.output, indent=2, ensure_ascii=False, default=str))
        return "\n".join(lines) + "\n"


def strip_timing(payload):
    """Drop timing fields from a report dict (for determinism comparisons)."""
    if isinstance(payload, dict):
        return {k: strip_timing(v) for k, v in payload.items() if k not in TIMING_FIELDS}
    if isinstance(payload, list):
        return [strip_timing(v) for v in payload]
    return payload


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (bool, int, str)) or x is None:
        return x
    return str(x)


# ---------------------------------------------------------------------------
# loading


def _s(x) -> str:
    return str(x)


class Spec:
    """Resolved declarations of one spec file."""

    KINDS = ("rings", "algebroids", "homomorphisms", "groups", "gsets", "galgebras", "complexes", "homotopies", "modules")

    def __init__(self, data: dict, name: str = "spec"):
        if not isinstance(data, dict):
            raise SpecError("a spec must be a mapping", "top level")
        schema = data.get("schema", SPEC_SCHEMA)
        if schema != SPEC_SCHEMA:
            raise SpecError(f"unsupported schema {schema!r} (expected {SPEC_SCHEMA})", "schema")
        self.name = _s(data.get("name", name))
        self.data = data
        decls = data.get("declarations") or {}
        unknown = set(decls) - set(self.KINDS)
        if unknown:
            raise SpecError(f"unknown declaration kind {sorted(unknown)[0]!r}", "declarations")
        self.objects: Dict[str, Dict[str, Any]] = {k: {} for k in self.KINDS}
        self.problems: List[CheckResult] = []
        loaders = {
            "rings": self._ring, "algebroids": self._algebroid, "homomorphisms": self._homomorphism,
            "groups": self._group, "gsets": self._gset, "galgebras": self._galgebra, "complexes": self._complex,
            "homotopies": self._homotopy, "modules": self._module,
        }
        for kind in self.KINDS:
            for nm, body in (decls.get(kind) or {}).items():
                where = f"declarations.{kind}.{nm}"
                if not isinstance(body, (dict, str)):
                    raise SpecError("declaration must be a mapping", where)
                self.objects[kind][_s(nm)] = loaders[kind](body, where)
        self.pipelines = data.get("pipelines") or {}
        self.suites = data.get("suites") or {}

    # references

    def ref(self, kind: str, name, where: str):
        try:
            return self.objects[kind][_s(name)]
        except KeyError:
            raise SpecError(f"unresolved reference to {kind[:-1]} {name!r}", where) from None

    def _base(self, text, where):
        try:
            return parse_base_ring(_s(text))
        except ValueError as e:
            raise SpecError(str(e), where) from None

    def _scalar(self, c, base, where):
        try:
            return parse_poly(_s(c), base)
        except ValueError as e:
            raise SpecError(f"bad coefficient {c!r}: {e}", where) from None

    def elem(self, A, coeffs: dict, where: str, a=None, b=None) -> Elem:
        """An element from {basis key: coefficient}; ends come from the keys unless given."""
        if not isinstance(coeffs, dict):
            raise SpecError("an element is a mapping {basis key: coefficient}", where)
        out = {}
        for k, c in coeffs.items():
            k = _s(k)
            if k not in A.basis_ends:
                raise SpecError(f"unknown basis element {k!r} of {A.name}", where)
            ends = A.basis_ends[k]
            if a is None:
                a, b = ends
            if ends != (a, b):
                raise SpecError(f"basis element {k!r} does not live in Hom({a}, {b})", where)
            out[k] = self._scalar(c, A.base, where)
        if a is None:
            raise SpecError("cannot infer the ends of an empty element", where)
        return A.elem(a, b, out)

    # declarations

    def _ring(self, body, where):
        return self._base(body if isinstance(body, str) else body.get("base", "ZZ"), where)

    def _algebroid(self, body, where):
        base = self._base(body.get("base", "ZZ"), where)
        kind = body.get("kind", "explicit")
        if kind == "ring":
            return ring_algebroid(base)
        if kind == "product":
            return product_algebra(int(body["n"]), base)
        if kind == "pattern":
            return matrix_pattern(int(body["n"]), base)
        if kind != "explicit":
            raise SpecError(f"unknown algebroid kind {kind!r}", where)
        objects = [_s(o) for o in body.get("objects", [])]
        basis = {}
        for k, ends in (body.get("basis") or {}).items():
            if not isinstance(ends, list) or len(ends) != 2:
                raise SpecError(f"basis element {k!r} needs [source, target]", f"{where}.basis")
            basis[_s(k)] = (_s(ends[0]), _s(ends[1]))
        structure = {}
        for i, row in enumerate(body.get("structure") or []):
            w = f"{where}.structure[{i}]"
            if not isinstance(row, list) or len(row) != 3 or not isinstance(row[2], dict):
                raise SpecError("structure rows are [y, x, {z: c}] meaning y∘x = Σ c z", w)
            ky, kx = _s(row[0]), _s(row[1])
            for k in (ky, kx):
                if k not in basis:
                    raise SpecError(f"unknown basis element {k!r}", w)
            structure[(ky, kx)] = {_s(z): self._scalar(c, base, w) for z, c in row[2].items()}
        units = None
        if body.get("units") is not None:
            units = {_s(a): {_s(k): self._scalar(c, base, f"{where}.units") for k, c in (u or {}).items()}
                     for a, u in body["units"].items()}
        try:
            return Algebroid(_s(body.get("name", where.split(".")[-1])), base, objects, basis, structure, units)
        except ValueError as e:
            raise SpecError(str(e), where) from None

    def _homomorphism(self, body, where):
        A = self.ref("algebroids", body.get("source"), where)
        B = self.ref("algebroids", body.get("target"), where)
        omap = {_s(a): _s(b) for a, b in (body.get("objects") or {}).items()}
        for a in A.objects:
            if a not in omap:
                if len(B.objects) == 1:
                    omap[a] = B.objects[0]
                else:
                    raise SpecError(f"object {a!r} has no image", where)
        images = {}
        for k, v in (body.get("images") or {}).items():
            k = _s(k)
            if k not in A.basis_ends:
                raise SpecError(f"unknown basis element {k!r} of {A.name}", f"{where}.images")
            a, b = A.basis_ends[k]
            images[k] = self.elem(B, v or {}, f"{where}.images.{k}", omap[a], omap[b])
        for k in A.all_keys():
            if k not in images:
                a, b = A.basis_ends[k]
                images[k] = B.zero(omap[a], omap[b])
        return Homomorphism(A, B, omap, images, where.split(".")[-1])

    def _group(self, body, where):
        kind = body.get("kind", "table")
        if kind == "cyclic":
            return eq.cyclic_group(int(body["n"]))
        if kind == "symmetric":
            return eq.symmetric_group(int(body["n"]))
        if kind == "trivial":
            return eq.trivial_group()
        try:
            return eq.group_from_table(where.split(".")[-1], [_s(e) for e in body["elements"]],
                                       [[_s(x) for x in row] for row in body["table"]])
        except (KeyError, eq.GroupoidError) as e:
            raise SpecError(f"bad Cayley table: {e}", where) from None

    def element(self, G, name, where):
        for g in G.elements:
            if _s(g) == _s(name) or format_key(g) == _s(name):
                return g
        raise SpecError(f"{name!r} is not an element of {G.name}", where)

    def _gset(self, body, where):
        G = self.ref("groups", body.get("group"), where)
        kind = body.get("kind", "table")
        if kind == "regular":
            return eq.regular_gset(G)
        if kind == "point":
            return eq.point_gset(G)
        pts = [_s(p) for p in body.get("points", [])]
        table = {}
        for x, row in (body.get("action") or {}).items():
            if len(row) != G.order:
                raise SpecError(f"action row of {x!r} needs one entry per group element", f"{where}.action")
            for g, y in zip(G.elements, row):
                table[(_s(x), g)] = _s(y)
        try:
            return eq.GSet(G, pts, table, where.split(".")[-1])
        except eq.GroupoidError as e:
            raise SpecError(str(e), where) from None

    def _galgebra(self, body, where):
        G = self.ref("groups", body.get("group"), where)
        kind = body.get("kind", "trivial")
        base = self._base(body.get("base", "ZZ"), where)
        if kind == "trivial":
            A = self.ref("algebroids", body.get("algebra"), where) if body.get("algebra") else ring_algebroid(base)
            return eq.trivial_galgebra(G, A)
        if kind == "swap":
            return eq.swap_galgebra(G, base)
        if kind == "functions":
            return eq.function_galgebra(self.ref("gsets", body.get("gset"), where), base)
        if kind == "permutation":
            n = int(body["n"])
            perms = {self.element(G, g, where): tuple(int(i) for i in p) for g, p in (body.get("perms") or {}).items()}
            for g in G.elements:
                perms.setdefault(g, tuple(range(n)))
            A = eq.permutation_galgebra(G, n, lambda g: perms[g], base)
            fails = A.check()
            if fails:
                raise SpecError(f"not a G-algebra: {fails[0].detail}", where)
            return A
        raise SpecError(f"unknown G-algebra kind {kind!r}", where)

    def _complex(self, body, where):
        kind = body.get("kind", "facets")
        nm = where.split(".")[-1]
        if kind == "simplex":
            X = simplex(int(body["n"]))
        elif kind == "boundary":
            X = boundary(int(body["n"]))
        elif kind == "sphere":
            X = sphere(int(body["n"]))
        elif kind == "point":
            X = point()
        elif kind == "facets":
            X = from_ordered_complex([tuple(int(v) for v in f) for f in body.get("facets", [])], nm)
        else:
            raise SpecError(f"unknown complex kind {kind!r}", where)
        if body.get("group") is None:
            return X
        G = self.ref("groups", body["group"], where)
        gens = {}
        for g, vmap in (body.get("action") or {}).items():
            vm = {int(a): int(b) for a, b in vmap.items()}
            perm = {}
            for s in X.dims:
                img = tuple(vm.get(v, v) for v in s) if isinstance(s, tuple) else s
                if isinstance(s, tuple) and list(img) != sorted(img):
                    raise SpecError(f"vertex map does not preserve the order of {s}", f"{where}.action")
                perm[s] = img
            gens[self.element(G, g, where)] = perm
        try:
            return eq.GComplex(X, G, gens, nm)
        except (eq.GroupoidError, KeyError) as e:
            raise SpecError(f"bad action: {e}", where) from None

    def _homotopy(self, body, where):
        if body.get("kind", "conjugation") != "conjugation":
            raise SpecError("only conjugation homotopies are declarable", where)
        f = self.ref("homomorphisms", body.get("alpha"), where)
        g = self.ref("homomorphisms", body.get("beta"), where)
        B = f.target
        u = {_s(a): self.elem(B, v, f"{where}.g.{a}") for a, v in (body.get("g") or {}).items()}
        ui = {_s(a): self.elem(B, v, f"{where}.g_inv.{a}") for a, v in (body.get("g_inv") or {}).items()}
        for a in f.source.objects:
            if a not in u or a not in ui:
                raise SpecError(f"missing g or g_inv at object {a!r}", where)
        return conjugation_iso(f, g, u, ui)

    def _module(self, body, where):
        kind = body.get("kind", "free")
        if kind == "free":
            A = self.ref("algebroids", body.get("algebroid"), where)
            return free_witness(A, [_s(o) for o in body.get("objects", A.objects)], where.split(".")[-1])
        if kind == "cyclic":
            base = self._base(body.get("base", "ZZ"), where)
            R = ring_algebroid(base)
            n = int(body["order"])
            return RightModule(R, {"*": ["g"]}, {"*": [[n]]}, {"1": [[1]]}, f"{base}/{n}", base)
        raise SpecError(f"unknown module kind {kind!r}", where)


def load_spec_text(text: str, name: str = "spec") -> Spec:
    try:
        data = yaml.safe_load(text)
    except yaml.MarkedYAMLError as e:
        m = e.problem_mark
        where = f"line {m.line + 1}, column {m.column + 1}" if m else ""
        raise SpecError(f"YAML parse error: {e.problem}", where) from None
    except yaml.YAMLError as e:
        raise SpecError(f"YAML parse error: {e}") from None
    try:
        return Spec(data, name)
    except SpecError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise SpecError(f"malformed declaration: {e}") from None


def load_spec(path) -> Spec:
    p = Path(path)
    if not p.exists():
        bundled = bundled_spec_path(str(path))
        if bundled is None:
            raise SpecError(f"no such spec file {path!r}")
        p = bundled
    return load_spec_text(p.read_text(encoding="utf-8"), p.stem)


def bundled_specs() -> List[str]:
    root = resources.files("kkalg") / "specs"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".yaml"))


def bundled_spec_path(name: str) -> Optional[Path]:
    p = resources.files("kkalg") / "specs" / f"{name}.yaml"
    return Path(str(p)) if p.is_file() else None


# ---------------------------------------------------------------------------
# checks


Outcome = tuple  # (failures, detail)


def _fails(fails, detail: str):
    return list(fails), detail


def _basis(A):
    return [A.basis(k) for k in A.all_keys()]


def chk_algebroid(spec, args, P):
    A = spec.ref("algebroids", args.get("target"), "args")
    return _fails(check_algebroid(A), f"{A.name}: {len(A.all_keys())} basis elements, exhaustive triples")


def chk_homomorphism(spec, args, P):
    f = spec.ref("homomorphisms", args.get("target"), "args")
    return _fails(f.check(), f"{f.name}: {f.source.name} → {f.target.name}")


def chk_group(spec, args, P):
    G = spec.ref("groups", args.get("target"), "args")
    return _fails(G.check(), f"{G.name} of order {G.order}")


def chk_gset(spec, args, P):
    X = spec.ref("gsets", args.get("target"), "args")
    return _fails(X.check(), f"{len(X.points)} points, {len(X.orbits())} orbits")


def chk_galgebra(spec, args, P):
    A = spec.ref("galgebras", args.get("target"), "args")
    return _fails(A.check(), f"{A.name} over {A.groupoid.name}")


def chk_ring_identity(spec, args, P):
    base = spec._base(args.get("ring", "ZZ"), "args")
    lhs = spec._scalar(args["lhs"], base, "args.lhs")
    rhs = spec._scalar(args["rhs"], base, "args.rhs")
    fails = [] if lhs == rhs else [Failure("identity", "lhs ≠ rhs", {"lhs": str(lhs), "rhs": str(rhs), "difference": str(lhs - rhs)})]
    return fails, f"{lhs} = {rhs} over {base}"


def chk_universal_extension(spec, args, P):
    A = spec.ref("algebroids", args.get("algebroid"), "args")
    ext = universal_extension(A)
    T = ext.total
    fails = ext.check_splitting(_basis(A))
    D = int(args.get("degree", P.max_degree))
    pairs = [(a, b) for a in A.objects for b in A.objects if A.hom_keys(a, b)]
    fails += ext.certify(pairs, D)
    rng = random.Random(P.seed)
    count = int(args.get("samples", 100))
    js = sample_J(tower_of(A), 1, rng, count)
    paths = [T.basis(p) for a, b in pairs for p in T.paths_upto(a, b, 2)]
    fails += ufsplit_square(ext, paths, js)
    return fails, f"π∘σ = id, exact to degree {D} on {len(pairs)} hom-pairs, square on {len(js)} samples"


def chk_rho(spec, args, P):
    base = spec._base(args.get("ring", "ZZ"), "args")
    R = ring_algebroid(base)
    r = rho(R)
    T = TensorAlgebroid(R)
    one = R.basis("1")
    x = basic_J_element(T, one, one)
    v = r(x)
    t = parse_poly("t^2 - t", base)
    got = v.coeffs.get("1")
    fails = []
    if got != t or len(v.coeffs) != 1:
        fails.append(Failure("ρ", "ρ(1⊗1 − 1) ≠ t² − t", {"value": str(v)}))
    for val in (0, 1):
        if got is not None and got.substitute({"t": val}) != parse_poly("0", base):
            fails.append(Failure("ρ", f"ρ value does not vanish at t = {val}", {"value": str(v)}))
    return fails, f"ρ(1⊗1 − 1) = {v}"


def chk_simplicial(spec, args, P):
    X = spec.ref("complexes", args.get("complex"), "args")
    if isinstance(X, eq.GComplex):
        fails = X.check()
        X = X.X
    else:
        fails = []
    D = int(args.get("degree", min(P.max_degree, 3)))
    ranks = [len(family_basis(X, d, ZZ_)) for d in range(D + 1)]
    Y, done = X, 0
    fails += X.check()
    for k in range(1, int(args.get("subdivisions", P.max_subdiv)) + 1):
        try:
            Y = subdivide(Y)
        except SimplicialError:
            break  # only ordered complexes subdivide
        fails += [Failure("simplicial", f"sd^{k}: {f.detail}", {"subdivision": k}) for f in Y.check()]
        done = k
    return fails, f"{X.name}: identities hold through sd^{done}; family ranks {ranks}"


def chk_pushout(spec, args, P):
    X = spec.ref("complexes", args.get("complex"), "args")
    gx = X if isinstance(X, eq.GComplex) else None
    X = gx.X if gx else X
    B = [tuple(int(v) for v in b) for b in args.get("boundary", [])]
    for b in B:
        if b not in X.dims:
            raise SpecError(f"{b} is not a simplex of {X.name}", "args.boundary")
    C = point()
    f = {b: ("*", tuple(0 for _ in range(X.dims[b] + 1)) if X.dims[b] else (0,)) for b in B}
    ext = pushout_extension(parse_base_ring(_s(args.get("ring", "ZZ"))), X, B, C, f)
    D = int(args.get("degree", min(P.max_degree, 3)))
    fails = ext.certify([("*", "*")], D)
    if gx is not None:
        from .simplicial import equivariant_pushout_failures
        fails += equivariant_pushout_failures(ext, {g: (gx.perm(g), {"*": "*"}) for g in gx.group.elements}, D)
    return fails, f"0 → R^(X∪_B pt) → R^X⊕R → R^B → 0 exact to degree {D}" + (" and equivariant" if gx else "")


def chk_sharp(spec, args, P):
    f = spec.ref("homomorphisms", args.get("first"), "args")
    g = spec.ref("homomorphisms", args.get("second"), "args")
    a, b = from_homomorphism(f), from_homomorphism(g)
    s, c = sharp(a, b), compose_degree0(a, b)
    fails = []
    for x in _basis(f.source):
        if _matrix_part(s(x)) != _matrix_part(c(x)):
            fails.append(Failure("♯", "α♯β ≠ β∘α", {"x": str(x), "sharp": str(s(x)), "composite": str(c(x))}))
            break
    return fails, f"{f.name}♯{g.name} = {g.name}∘{f.name} on {len(f.source.all_keys())} basis elements"


def chk_w_homotopy(spec, args, P):
    iso = spec.ref("homotopies", args.get("homotopy"), "args")
    W = w_homotopy(iso.alpha, iso.beta, iso)
    tests = _basis(iso.alpha.source)
    fails = iso.failures() + W.identities() + W.certificate().verify(tests)
    return fails, f"W·W⁻¹ = I, endpoints and chain verified on {len(tests)} basis elements"


def chk_collapse(spec, args, P):
    base = spec._base(args.get("ring", "ZZ"), "args")
    D = int(args.get("degree", min(P.max_degree, 3)))
    cert = eq.collapse_certificate(base)
    tests = eq.collapse_tests(cert, D)
    return cert.verify(tests), f"R^Δ¹ ≃ R^Δ⁰ on {len(tests)} families of degree ≤ {D}"


def chk_module_unit(spec, args, P):
    w = spec.ref("modules", args.get("module"), "args")
    E = w.module if hasattr(w, "module") else w
    fails = list(w.verify()) if hasattr(w, "verify") else []
    T, phi, psi = unit_isomorphism(E)
    fails += verify_isomorphism(phi, psi)
    return fails, f"{E.name}⊗{E.A.name} ≅ {E.name}"


def _as_bimodule(N: RightModule) -> Bimodule:
    return Bimodule(N.A, N.A, {"*": N}, {"1": identity_module_hom(N)}, N.name)


def chk_module_tensor(spec, args, P):
    E = spec.ref("modules", args.get("left"), "args")
    N = spec.ref("modules", args.get("right"), "args")
    E = getattr(E, "module", E)
    N = getattr(N, "module", N)
    M = tensor_over_A(E, _as_bimodule(N)).module
    free, torsion = M.structure("*")
    exp = args.get("expect") or {}
    fails = []
    if "free_rank" in exp and int(exp["free_rank"]) != free:
        fails.append(Failure("module structure", "free rank differs", {"free_rank": free, "expected": exp["free_rank"]}))
    if "torsion" in exp and [int(t) for t in exp["torsion"]] != list(torsion):
        fails.append(Failure("module structure", "torsion differs", {"torsion": list(torsion), "expected": exp["torsion"]}))
    return fails, f"{M.name}: free rank {free}, torsion {list(torsion)}"


def chk_module_smash(spec, args, P):
    w = spec.ref("modules", args.get("module"), "args")
    f = spec.ref("homomorphisms", args.get("hom"), "args")
    ground = w.module.base
    left = module_smash(w, from_homomorphism(f), ground)
    right = module_class(pushforward_witness(w, f), ground)
    one = left.source.basis("1")
    lv, rv = _matrix_part(left(one)), _matrix_part(right(one))
    fails = [] if lv == rv else [Failure("module smash", "ℰ∧f ≠ [f_*ℰ]", {"lhs": str(lv), "rhs": str(rv)})]
    return fails, f"[{w.module.name}]♯{f.name} = [{f.name}_*{w.module.name}] = {lv}"


def chk_convolution(spec, args, P):
    A = spec.ref("galgebras", args.get("galgebra"), "args")
    AG = eq.convolution(A)
    return check_algebroid(AG), f"{AG.name}: rank {len(AG.all_keys())}, exhaustive triples"


def chk_green_julg(spec, args, P):
    A = spec.ref("galgebras", args.get("galgebra"), "args")
    gj = eq.green_julg_sigma(A)
    return gj.failures(), f"σ: {gj.AG.name} → {gj.M.name} injective, multiplicative, image = fixed points (rank {len(gj.fixed_lattice())})"


def chk_roundtrip(spec, args, P):
    A = spec.ref("galgebras", args.get("galgebra"), "args")
    rep = eq.green_julg_roundtrip(A)
    fails = [Failure(i.name, i.detail, i.witness) for i in rep.items if not i.ok]
    return fails, "; ".join(f"{i.name.split(' ')[0]} ok" for i in rep.items if i.ok)


def _self_map(spec, A, args):
    C = A.algebras["*"]
    if args.get("hom"):
        f = spec.ref("homomorphisms", args["hom"], "args")
        if f.source != C or f.target != C:
            raise SpecError("the descent map must be an endomorphism of the G-algebra's algebra", "args.hom")
    else:
        f = Homomorphism(C, C, {"*": "*"}, {k: C.basis(k) for k in C.all_keys()}, "id")
    return eq.equivariant_from_homs(A, A, {"*": f}, f.name)


def chk_descent(spec, args, P):
    A = spec.ref("galgebras", args.get("galgebra"), "args")
    beta = _self_map(spec, A, args)
    alpha = eq.unit_rep(A)
    fails = alpha.failures() + beta.failures()
    if not fails:
        fails = eq.descent_square_failures(alpha, beta)
    return fails, f"D(α♯{beta.name}) = D(α)♯D({beta.name}) on the basis of {eq.convolution(alpha.source).name}"


def chk_kappa(spec, args, P):
    A = spec.ref("algebroids", args.get("algebroid"), "args")
    N = int(args.get("size", P.stab_size))
    return eq.kappa_failures(A, N), f"κ: {A.name} → M{N}({A.name}) with P² = P"


def chk_index(spec, args, P):
    A = spec.ref("galgebras", args.get("galgebra"), "args")
    G = A.groupoid
    res = eq.index_pipeline(G, None, A, eq.unit_rep(A))
    one = ring_algebroid(A.base).basis("1")
    v = _matrix_part(res.value(one))
    AG = eq.convolution(A)
    from .completion import AdditiveCompletion
    fails = []
    if args.get("expect_unit", True) and v != AdditiveCompletion(AG).identity(("*",)):
        fails.append(Failure("index", "index of the unit is not the unit of AG", {"value": str(v)}))
    return fails, f"index(1) = {v}"


def chk_khomology(spec, args, P):
    X = spec.ref("complexes", args.get("complex"), "args")
    A = spec.ref("galgebras", args.get("galgebra"), "args")
    if not isinstance(X, eq.GComplex):
        X = eq.gcomplex_trivial(X, A.groupoid)
    K = eq.equivariant_khomology(X, A)
    D = int(args.get("degree", 2))
    return K.action_failures(D) + K.block_failures(D), f"G acts on R^{X.name}; blocks split by components to degree {D}"


CHECKS: Dict[str, Callable] = {
    "algebroid": chk_algebroid,
    "homomorphism": chk_homomorphism,
    "group": chk_group,
    "gset": chk_gset,
    "galgebra": chk_galgebra,
    "ring_identity": chk_ring_identity,
    "universal_extension": chk_universal_extension,
    "rho": chk_rho,
    "simplicial": chk_simplicial,
    "pushout": chk_pushout,
    "sharp": chk_sharp,
    "w_homotopy": chk_w_homotopy,
    "collapse": chk_collapse,
    "module_unit": chk_module_unit,
    "module_tensor": chk_module_tensor,
    "module_smash": chk_module_smash,
    "convolution": chk_convolution,
    "green_julg": chk_green_julg,
    "roundtrip": chk_roundtrip,
    "descent": chk_descent,
    "kappa": chk_kappa,
    "index": chk_index,
    "khomology": chk_khomology,
}

ZZ_ = parse_base_ring("ZZ")


def _witness(fails: List[Failure]):
    f = fails[0]
    return _jsonable({"check": f.check, "detail": f.detail, **dict(f.witness or {})})


def run_check(spec: Spec, entry: dict, index: int, P: Params) -> CheckResult:
    where = f"suite entry {index}"
    if not isinstance(entry, dict) or "check" not in entry:
        raise SpecError("each suite entry needs a 'check' field", where)
    kind = _s(entry["check"])
    name = _s(entry.get("name", kind))
    if kind not in CHECKS:
        raise SpecError(f"unknown check {kind!r}", where)
    if entry.get("skip"):
        return CheckResult(name, kind, "skipped", _s(entry.get("skip")))
    args = {k: v for k, v in entry.items() if k not in ("check", "name")}
    t0 = time.perf_counter()
    try:
        fails, detail = CHECKS[kind](spec, args, P)
    except SpecError as e:
        raise SpecError(str(e), where) from None
    except (ValueError, ArithmeticError) as e:
        # a corrupted structure can make a construction itself fail; that is a check failure
        fails, detail = [Failure(kind, f"construction failed: {e}", {})], "construction failed"
    dt = time.perf_counter() - t0
    if fails:
        return CheckResult(name, kind, "fail", fails[0].detail, _witness(fails), dt)
    return CheckResult(name, kind, "pass", detail, None, dt)


def _declaration_checks(spec: Spec) -> List[CheckResult]:
    """Validity of every declaration, in file order."""
    out = []
    table = {
        "algebroids": lambda A: check_algebroid(A),
        "homomorphisms": lambda f: f.check(),
        "groups": lambda G: G.check(),
        "gsets": lambda X: X.check(),
        "galgebras": lambda A: A.check(),
        "complexes": lambda X: X.check(),
        "homotopies": lambda iso: iso.failures(),
        "modules": lambda m: m.verify() if hasattr(m, "verify") else m.check(),
    }
    for kind, fn in table.items():
        for nm, obj in spec.objects[kind].items():
            t0 = time.perf_counter()
            fails = fn(obj)
            dt = time.perf_counter() - t0
            label = f"{kind}.{nm}"
            if fails:
                out.append(CheckResult(label, "declaration", "fail", fails[0].detail, _witness(fails), dt))
            else:
                out.append(CheckResult(label, "declaration", "pass", "valid", None, dt))
    return out


def cmd_validate(spec: Spec, P: Params) -> Report:
    return Report(spec.name, "validate", spec.name, P, _declaration_checks(spec))


def cmd_check(spec: Spec, suite: str, P: Params, overrides: tuple = ()) -> Report:
    """Run a suite; its truncation fields replace P's unless named in ``overrides``."""
    if suite not in spec.suites:
        raise SpecError(f"no suite named {suite!r} (have {sorted(spec.suites)})")
    body = spec.suites[suite] or {}
    if isinstance(body, list):
        body = {"checks": body}
    P2 = Params(**asdict(P))
    for f in ("max_degree", "stab_size", "max_subdiv"):
        if f in body and f not in overrides:
            setattr(P2, f, int(body[f]))
    decl = _declaration_checks(spec)
    report = Report(spec.name, "check", suite, P2, [r for r in decl if r.status == "fail"])
    entries = list(body.get("checks") or [])
    if report.results:
        report.results += [CheckResult(_s(e.get("name", e.get("check"))), _s(e.get("check")), "skipped",
                                       "declarations failed validation") for e in entries]
        return report
    if P.jobs > 1:
        with ThreadPoolExecutor(P.jobs) as ex:
            results = list(ex.map(lambda ie: run_check(spec, ie[1], ie[0], P2), enumerate(entries)))
    else:
        results = [run_check(spec, e, i, P2) for i, e in enumerate(entries)]
    report.results += results
    return report


# ---------------------------------------------------------------------------
# pipelines


def _elem_table(images: dict) -> dict:
    return {format_key(k): str(v) for k, v in images.items()}


def op_green_julg_sigma(spec, args, P, env):
    A = spec.ref("galgebras", args.get("galgebra"), "args")
    gj = eq.green_julg_sigma(A)
    return {"source": gj.AG.name, "target": gj.M.name, "images": _elem_table(gj.sigma.images),
            "fixed_rank": len(gj.fixed_lattice())}


def op_roundtrip(spec, args, P, env):
    A = spec.ref("galgebras", args.get("galgebra"), "args")
    return _jsonable(eq.green_julg_roundtrip(A).to_dict())


def op_convolution(spec, args, P, env):
    A = spec.ref("galgebras", args.get("galgebra"), "args")
    AG = eq.convolution(A)
    if args.get("as"):
        spec.objects["algebroids"][_s(args["as"])] = AG
    return {"name": AG.name, "rank": len(AG.all_keys()),
            "structure": {f"{format_key(y)}*{format_key(x)}": {format_key(z): str(c) for z, c in r.items()}
                          for (y, x), r in AG.structure.items()}}


def op_descent(spec, args, P, env):
    A = spec.ref("galgebras", args.get("galgebra"), "args")
    beta = _self_map(spec, A, args)
    D = eq.descent(beta)
    return {"name": D.name, "images": {format_key(k): str(_matrix_part(D(D.source.basis(k)))) for k in D.source.all_keys()}}


def op_index(spec, args, P, env):
    A = spec.ref("galgebras", args.get("galgebra"), "args")
    res = eq.index_pipeline(A.groupoid, None, A, eq.unit_rep(A))
    one = ring_algebroid(A.base).basis("1")
    return {"index": str(_matrix_part(res.value(one)))}


def op_module_structure(spec, args, P, env):
    m = spec.ref("modules", args.get("module"), "args")
    return _jsonable(getattr(m, "module", m).describe())


def op_module_tensor(spec, args, P, env):
    E = getattr(spec.ref("modules", args.get("left"), "args"), "module", None) or spec.ref("modules", args.get("left"), "args")
    N = getattr(spec.ref("modules", args.get("right"), "args"), "module", None) or spec.ref("modules", args.get("right"), "args")
    return _jsonable(tensor_over_A(E, _as_bimodule(N)).module.describe())


def op_family_ranks(spec, args, P, env):
    X = spec.ref("complexes", args.get("complex"), "args")
    X = getattr(X, "X", X)
    D = int(args.get("degree", P.max_degree))
    return {"complex": X.name, "ranks": [len(family_basis(X, d, ZZ_)) for d in range(D + 1)]}


def op_sharp(spec, args, P, env):
    f = spec.ref("homomorphisms", args.get("first"), "args")
    g = spec.ref("homomorphisms", args.get("second"), "args")
    s = sharp(from_homomorphism(f), from_homomorphism(g))
    return {format_key(k): str(_matrix_part(s(f.source.basis(k)))) for k in f.source.all_keys()}


def op_universal_extension(spec, args, P, env):
    A = spec.ref("algebroids", args.get("algebroid"), "args")
    ext = universal_extension(A)
    T = ext.total
    D = int(args.get("degree", P.max_degree))
    out = {}
    for a in A.objects:
        for b in A.objects:
            if A.hom_keys(a, b):
                E, Q, I = ext.graded(a, b, D)
                out[f"{a}->{b}"] = {"total": len(E), "quotient": len(Q), "ideal_spanners": len(I)}
    rng = random.Random(P.seed)
    js = sample_J(tower_of(A), 1, rng, int(args.get("samples", 3)))
    return {"ranks": out, "samples": [str(x) for x in js], "sigma_pi": [str(pi(sigma(x, T), T)) for x in _basis(A)]}


def op_kappa(spec, args, P, env):
    A = spec.ref("algebroids", args.get("algebroid"), "args")
    k = eq.kappa(A, int(args.get("size", P.stab_size)))
    return _elem_table(k.images)


OPS: Dict[str, Callable] = {
    "green_julg_sigma": op_green_julg_sigma,
    "roundtrip": op_roundtrip,
    "convolution": op_convolution,
    "descent": op_descent,
    "index": op_index,
    "module_structure": op_module_structure,
    "module_tensor": op_module_tensor,
    "family_ranks": op_family_ranks,
    "sharp": op_sharp,
    "universal_extension": op_universal_extension,
    "kappa": op_kappa,
}


def cmd_run(spec: Spec, pipeline: str, P: Params) -> Report:
    if pipeline not in spec.pipelines:
        raise SpecError(f"no pipeline named {pipeline!r} (have {sorted(spec.pipelines)})")
    steps = spec.pipelines[pipeline] or []
    report = Report(spec.name, "run", pipeline, P)
    outputs = {}
    env: Dict[str, Any] = {}
    for i, step in enumerate(steps):
        where = f"pipelines.{pipeline}[{i}]"
        if not isinstance(step, dict) or "op" not in step:
            raise SpecError("each pipeline step needs an 'op' field", where)
        op = _s(step["op"])
        if op not in OPS:
            raise SpecError(f"unknown operation {op!r}", where)
        label = _s(step.get("name", f"{i}:{op}"))
        args = {k: v for k, v in step.items() if k not in ("op", "name")}
        t0 = time.perf_counter()
        try:
            out = OPS[op](spec, args, P, env)
            status, detail = "pass", "ok"
        except SpecError as e:
            raise SpecError(str(e), where) from None
        except (ValueError, ArithmeticError) as e:
            out, status, detail = None, "fail", f"operation failed: {e}"
        report.results.append(CheckResult(label, op, status, detail, None, time.perf_counter() - t0))
        outputs[label] = out
    report.output = outputs
    return report


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--max-degree", type=int, default=argparse.SUPPRESS,
                        help="truncation degree D for exactness certificates (default 4)")
    common.add_argument("--stab-size", type=int, default=argparse.SUPPRESS, help="stabilization size N for κ (default 4)")
    common.add_argument("--max-subdiv", type=int, default=argparse.SUPPRESS,
                        help="subdivision depth for simplicial checks (default 2)")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="sample seed (default 0)")
    common.add_argument("--report", choices=["text", "json"], default=argparse.SUPPRESS, help="report format (default text)")
    common.add_argument("--no-timing", action="store_true", default=argparse.SUPPRESS,
                        help="omit wall times, for byte-identical reports")
    common.add_argument("--jobs", type=int, default=argparse.SUPPRESS, help="run suite checks on this many threads")
    common.add_argument("-o", "--output", default=argparse.SUPPRESS, help="write the report to this file instead of stdout")
    p = argparse.ArgumentParser(prog="kkalg", parents=[common],
                                description="Verify algebraic KK constructions declared in a YAML spec.")
    sub = p.add_subparsers(dest="command", required=True)
    v = sub.add_parser("validate", parents=[common], help="load a spec and check every declaration")
    v.add_argument("spec")
    r = sub.add_parser("run", parents=[common], help="run a named pipeline")
    r.add_argument("spec")
    r.add_argument("pipeline")
    c = sub.add_parser("check", parents=[common], help="run a named check suite")
    c.add_argument("spec")
    c.add_argument("suite")
    sub.add_parser("list", help="list bundled specs")
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if not e.code else 2
    for f, d in (("max_degree", None), ("stab_size", None), ("max_subdiv", None), ("seed", 0), ("report", "text"),
                 ("no_timing", False), ("jobs", 1), ("output", None)):
        if not hasattr(ns, f):
            setattr(ns, f, d)
    if ns.command == "list":
        print("\n".join(bundled_specs()))
        return 0
    P = Params(seed=ns.seed, jobs=max(1, ns.jobs))
    overrides = []
    for f in ("max_degree", "stab_size", "max_subdiv"):
        if getattr(ns, f) is not None:
            setattr(P, f, getattr(ns, f))
            overrides.append(f)
    try:
        spec = load_spec(ns.spec)
        if ns.command == "validate":
            report = cmd_validate(spec, P)
        elif ns.command == "run":
            report = cmd_run(spec, ns.pipeline, P)
        else:
            report = cmd_check(spec, ns.suite, P, tuple(overrides))
    except SpecError as e:
        print(f"kkalg: error: {e}", file=sys.stderr)
        return 2
    text = report.render(ns.report, timing=not ns.no_timing)
    if ns.output:
        Path(ns.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0 if report.ok else 1


if __name__ == "__main__":
    sys.exit(main())
