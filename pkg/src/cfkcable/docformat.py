"""Line-oriented text format for complexes (``cfk/v1``) and maps (``cfkmap/v1``).

A complex document looks like::

    format cfk/v1
    name fig8
    ring F2[U,V]
    gen x 0 0
    gen a 0 0
    gen b 1 -1
    diff a: (b,1,0) (c,0,1)
    iota b: (c,0,0)
    shift 0

Over ``F2[U]`` a generator line carries one Maslov grading (``gen x 0``) and
triples keep a zero V-power.  ``#`` starts a comment.  Generators without a
``diff``/``iota``/``tau`` line map to zero; a section is present as soon as one
of its lines appears.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .algebra import ONE_VAR, TWO_VAR
from .complexes import Complex, GradedMap, StructuralError, validate_complex
from .equivariant import IotaComplex, IotaTauComplex

FORMAT = "cfk/v1"
MAP_FORMAT = "cfkmap/v1"
RINGS = {"F2[U,V]": TWO_VAR, "F2[U]": ONE_VAR}
RING_NAMES = {v: k for k, v in RINGS.items()}

_ID = r"[^\s,():#]+"
_ID_RE = re.compile(_ID + r"\Z")
_TRIPLE = re.compile(r"\(\s*(" + _ID + r")\s*,\s*(\d+)\s*,\s*(\d+)\s*\)")

Triple = tuple[str, int, int]


class DocumentSyntaxError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class DocumentSemanticError(ValueError):
    pass


@dataclass
class ComplexDocument:
    name: str
    ring: str
    generators: list[tuple]                      # (id, gr_U, gr_V) or (id, maslov)
    differential: dict[str, tuple[Triple, ...]] = field(default_factory=dict)
    iota: dict[str, tuple[Triple, ...]] | None = None
    tau: dict[str, tuple[Triple, ...]] | None = None
    shift: Fraction | None = None

    @property
    def mode(self) -> str:
        return RINGS[self.ring]

    @property
    def ids(self) -> list[str]:
        return [g[0] for g in self.generators]


@dataclass
class MapDocument:
    source: str
    target: str
    images: dict[str, tuple[Triple, ...]]
    skew: bool = False


# ---------------------------------------------------------------------------
# parsing


def _lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].rstrip()
        if body.strip():
            yield lineno, body


def _col(body: str, token: str, start: int = 0) -> int:
    return body.find(token, start) + 1


def _parse_triples(body: str, offset: int, lineno: int) -> tuple[Triple, ...]:
    out = []
    pos = offset
    rest = body[offset:]
    k = 0
    while k < len(rest):
        if rest[k].isspace():
            k += 1
            continue
        m = _TRIPLE.match(rest, k)
        if not m:
            raise DocumentSyntaxError("expected a triple (target,i,j)", lineno, pos + k + 1)
        out.append((m.group(1), int(m.group(2)), int(m.group(3))))
        k = m.end()
    return tuple(out)


def _parse_entry(body: str, key: str, lineno: int) -> tuple[str, tuple[Triple, ...]]:
    after = body[len(key):]
    colon = after.find(":")
    if colon < 0:
        raise DocumentSyntaxError(f"expected '{key} ID:'", lineno, len(body) + 1)
    gid = after[:colon].strip()
    if not _ID_RE.match(gid):
        raise DocumentSyntaxError(f"bad generator id {gid!r}", lineno, len(key) + 2)
    return gid, _parse_triples(body, len(key) + colon + 1, lineno)


def _parse_int(tok: str, body: str, lineno: int, start: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise DocumentSyntaxError(f"expected an integer, got {tok!r}", lineno, _col(body, tok, start)) from None


def parse_document(data: bytes | str) -> ComplexDocument:
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    seen: dict[str, int] = {}
    header = {}
    gens: list[tuple] = []
    sections: dict[str, dict[str, tuple[Triple, ...]]] = {}
    ring = None
    for lineno, body in _lines(text):
        key = body.split(None, 1)[0]
        args = body[len(key):].strip()
        if key == "format":
            if "format" in header:
                raise DocumentSyntaxError("duplicate 'format' line", lineno, 1)
            if args != FORMAT:
                raise DocumentSyntaxError(f"unsupported format {args!r}", lineno, len(key) + 2)
            header["format"] = args
        elif "format" not in header:
            raise DocumentSyntaxError(f"document must start with 'format {FORMAT}'", lineno, 1)
        elif key in ("name", "ring", "shift"):
            if key in header:
                raise DocumentSyntaxError(f"duplicate '{key}' line", lineno, 1)
            if not args:
                raise DocumentSyntaxError(f"'{key}' needs a value", lineno, len(key) + 1)
            if key == "ring":
                if args not in RINGS:
                    raise DocumentSyntaxError(f"ring must be one of {', '.join(RINGS)}", lineno, len(key) + 2)
                if gens:
                    raise DocumentSyntaxError("'ring' must precede generators", lineno, 1)
                ring = args
            elif key == "shift":
                try:
                    header["shift_value"] = Fraction(args)
                except (ValueError, ZeroDivisionError):
                    raise DocumentSyntaxError(f"shift must be an exact p/q, got {args!r}", lineno,
                                              len(key) + 2) from None
            header[key] = args
        elif key == "gen":
            if ring is None:
                raise DocumentSyntaxError("'ring' must precede generators", lineno, 1)
            toks = args.split()
            want = 3 if ring == "F2[U,V]" else 2
            if len(toks) != want:
                raise DocumentSyntaxError(f"'gen' over {ring} takes {want} fields", lineno, 1)
            gid = toks[0]
            if not _ID_RE.match(gid):
                raise DocumentSyntaxError(f"bad generator id {gid!r}", lineno, _col(body, gid, 3))
            if gid in seen:
                raise DocumentSyntaxError(f"duplicate generator id {gid!r} (first on line {seen[gid]})",
                                          lineno, _col(body, gid, 3))
            seen[gid] = lineno
            gens.append((gid,) + tuple(_parse_int(t, body, lineno, 4) for t in toks[1:]))
        elif key in ("diff", "iota", "tau"):
            gid, triples = _parse_entry(body, key, lineno)
            sec = sections.setdefault(key, {})
            if gid in sec:
                raise DocumentSyntaxError(f"duplicate '{key}' line for {gid!r}", lineno, 1)
            sec[gid] = triples
        else:
            raise DocumentSyntaxError(f"unknown field {key!r}", lineno, 1)
    if "format" not in header:
        raise DocumentSyntaxError(f"document must start with 'format {FORMAT}'", 1, 1)
    if ring is None:
        raise DocumentSemanticError("missing 'ring' line")
    doc = ComplexDocument(header.get("name", ""), ring, gens, sections.get("diff", {}),
                          sections.get("iota"), sections.get("tau"), header.get("shift_value"))
    check_document(doc)
    return doc


def check_document(doc: ComplexDocument) -> None:
    """Referenced ids exist and the complex passes validation."""
    ids = set(doc.ids)
    for sec_name, sec in (("diff", doc.differential), ("iota", doc.iota), ("tau", doc.tau)):
        for gid, triples in (sec or {}).items():
            if gid not in ids:
                raise DocumentSemanticError(f"{sec_name} line for unknown generator {gid!r}")
            for t, _, j in triples:
                if t not in ids:
                    raise DocumentSemanticError(f"{sec_name} of {gid!r} refers to missing generator {t!r}")
                if doc.mode == ONE_VAR and j:
                    raise DocumentSemanticError(f"{sec_name} of {gid!r} has a V-power over F2[U]")
    rep = validate_complex(to_complex(doc))
    if not rep.ok:
        raise DocumentSemanticError("complex fails validation: " + "; ".join(rep.lines()))


# ---------------------------------------------------------------------------
# serialization


def _triples_str(triples) -> str:
    return " ".join(f"({t},{i},{j})" for t, i, j in triples)


def serialize_document(doc: ComplexDocument) -> str:
    out = [f"format {FORMAT}"]
    if doc.name:
        out.append(f"name {doc.name}")
    out.append(f"ring {doc.ring}")
    for g in doc.generators:
        out.append("gen " + " ".join(str(x) for x in g))
    for key, sec in (("diff", doc.differential), ("iota", doc.iota), ("tau", doc.tau)):
        for gid, triples in (sec or {}).items():
            out.append(f"{key} {gid}: {_triples_str(triples)}".rstrip())
    if doc.shift is not None:
        out.append(f"shift {doc.shift}")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# conversion


def _chain(triples) -> frozenset:
    acc: set = set()
    for t in triples:
        acc ^= {tuple(t)}
    return frozenset(acc)


def to_complex(doc: ComplexDocument) -> Complex:
    mode = doc.mode
    gradings = {}
    for g in doc.generators:
        gradings[g[0]] = (g[1], g[1]) if mode == ONE_VAR else (g[1], g[2])
    diff = {g: _chain(doc.differential.get(g, ())) for g in doc.ids}
    try:
        return Complex(mode, tuple(doc.ids), gradings, diff, doc.shift or Fraction(0), doc.name)
    except StructuralError as exc:
        raise DocumentSemanticError(str(exc)) from None


def _map(C: Complex, sec, skew: bool) -> GradedMap:
    return GradedMap(C, C, {g: _chain(sec.get(g, ())) for g in C.names}, skew, (0, 0))


def to_objects(doc: ComplexDocument):
    """Complex, IotaComplex, IotaTauComplex or SurgeryComplex, whichever the document holds."""
    from .surgery import SurgeryComplex

    C = to_complex(doc)
    skew = doc.mode == TWO_VAR
    if doc.mode == ONE_VAR:
        ident = GradedMap.identity(C)
        if doc.iota is None and doc.tau is None:
            return C
        return SurgeryComplex(C, _map(C, doc.iota, False) if doc.iota is not None else ident,
                              _map(C, doc.tau, False) if doc.tau is not None else ident)
    if doc.iota is None:
        if doc.tau is not None:
            raise DocumentSemanticError("a tau section needs an iota section")
        return C
    if doc.tau is None:
        return IotaComplex(C, _map(C, doc.iota, skew))
    return IotaTauComplex(C, _map(C, doc.iota, skew), _map(C, doc.tau, skew))


def _sorted_triples(C: Complex, c) -> tuple[Triple, ...]:
    return tuple(sorted(c, key=lambda t: (C.index(t[0]), t[1], t[2])))


def from_objects(obj, name: str | None = None) -> ComplexDocument:
    """Inverse of ``to_objects``; zero entries are omitted."""
    C = obj if isinstance(obj, Complex) else obj.complex
    if C.mode == ONE_VAR:
        gens = [(n, C.gradings[n][0]) for n in C.names]
    else:
        gens = [(n, C.gradings[n][0], C.gradings[n][1]) for n in C.names]

    def section(f) -> dict:
        return {g: _sorted_triples(C, f.image(g)) for g in C.names if f.image(g)}

    diff = {g: _sorted_triples(C, C.diff[g]) for g in C.names if C.diff[g]}
    iota = section(obj.iota) if hasattr(obj, "iota") else None
    tau = section(obj.tau) if hasattr(obj, "tau") else None
    return ComplexDocument(name if name is not None else C.label, RING_NAMES[C.mode], gens, diff,
                           iota, tau, C.shift)


def load(path: str | Path) -> ComplexDocument:
    return parse_document(Path(path).read_bytes())


# ---------------------------------------------------------------------------
# map documents


def parse_map_document(data: bytes | str) -> MapDocument:
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    header: dict[str, str] = {}
    images: dict[str, tuple[Triple, ...]] = {}
    for lineno, body in _lines(text):
        key = body.split(None, 1)[0]
        args = body[len(key):].strip()
        if key == "format":
            if header or images or args != MAP_FORMAT:
                raise DocumentSyntaxError(f"expected 'format {MAP_FORMAT}' as the first line", lineno, 1)
            header["format"] = args
        elif "format" not in header:
            raise DocumentSyntaxError(f"document must start with 'format {MAP_FORMAT}'", lineno, 1)
        elif key in ("source", "target", "skew"):
            if key in header:
                raise DocumentSyntaxError(f"duplicate '{key}' line", lineno, 1)
            header[key] = args
        elif key == "map":
            gid, triples = _parse_entry(body, key, lineno)
            if gid in images:
                raise DocumentSyntaxError(f"duplicate 'map' line for {gid!r}", lineno, 1)
            images[gid] = triples
        else:
            raise DocumentSyntaxError(f"unknown field {key!r}", lineno, 1)
    if "format" not in header:
        raise DocumentSyntaxError(f"document must start with 'format {MAP_FORMAT}'", 1, 1)
    skew = header.get("skew", "no")
    if skew not in ("yes", "no"):
        raise DocumentSemanticError("skew must be 'yes' or 'no'")
    return MapDocument(header.get("source", ""), header.get("target", ""), images, skew == "yes")


def serialize_map_document(doc: MapDocument) -> str:
    out = [f"format {MAP_FORMAT}", f"source {doc.source}", f"target {doc.target}"]
    if doc.skew:
        out.append("skew yes")
    for gid, triples in doc.images.items():
        out.append(f"map {gid}: {_triples_str(triples)}".rstrip())
    return "\n".join(out) + "\n"


def to_map(doc: MapDocument, source: Complex, target: Complex) -> GradedMap:
    for gid, triples in doc.images.items():
        if gid not in source:
            raise DocumentSemanticError(f"map line for unknown source generator {gid!r}")
        for t, _, _ in triples:
            if t not in target:
                raise DocumentSemanticError(f"image of {gid!r} refers to missing target generator {t!r}")
    return GradedMap(source, target, {g: _chain(v) for g, v in doc.images.items()}, doc.skew, (0, 0))


def from_map(f: GradedMap) -> MapDocument:
    return MapDocument(f.source.label, f.target.label,
                       {g: _sorted_triples(f.target, f.image(g)) for g in f.source.names if f.image(g)},
                       f.skew)


__all__ = [
    "FORMAT", "MAP_FORMAT", "ComplexDocument", "MapDocument", "DocumentSyntaxError",
    "DocumentSemanticError", "parse_document", "serialize_document", "check_document", "to_complex",
    "to_objects", "from_objects", "load", "parse_map_document", "serialize_map_document", "to_map",
    "from_map",
]
