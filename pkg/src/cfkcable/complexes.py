"""Free graded complexes over F2[U,V] (knot mode) and F2[U] (surgery mode).

Elements of a free module are stored as frozensets of ``(generator, i, j)``
terms meaning U^i V^j * generator (``j`` is always 0 in surgery mode).

Gradings are stored as pairs (gr_U, gr_V).  In surgery mode both entries hold
the Maslov grading and U = 𝒰𝒱 lowers it by 2, so a monomial U^k shifts the
pair by (-2k, -2k).  With this convention every homogeneous map has a
bidegree pair in both modes and the differential has bidegree (-1, -1).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .algebra import ONE_VAR, TWO_VAR, F2Solver, ModeMismatch, monomial_str

Term = tuple[str, int, int]
Chain = frozenset
EMPTY: Chain = frozenset()
DIFF_DEGREE = (-1, -1)


class StructuralError(ValueError):
    """Malformed complex or map (unknown generators, wrong ring, ...)."""


def toggle(acc: set, term: Term) -> None:
    if term in acc:
        acc.remove(term)
    else:
        acc.add(term)


def chain(*terms: Term | str) -> Chain:
    """Build a chain from terms; a bare name means the generator itself."""
    acc: set = set()
    for t in terms:
        toggle(acc, (t, 0, 0) if isinstance(t, str) else t)
    return frozenset(acc)


def shift_chain(c: Chain, i: int, j: int) -> Chain:
    if i == 0 and j == 0:
        return c
    return frozenset((g, a + i, b + j) for g, a, b in c)


def chain_str(c: Chain, mode: str = TWO_VAR) -> str:
    if not c:
        return "0"
    out = []
    for g, i, j in sorted(c, key=lambda t: (t[1], t[2], t[0])):
        m = monomial_str(i, j)
        out.append(g if m == "1" else f"{m}·{g}")
    return " + ".join(out)


def effect(mode: str, i: int, j: int) -> tuple[int, int]:
    """Grading drop caused by the monomial U^i V^j."""
    if mode == TWO_VAR:
        return (2 * i, 2 * j)
    return (2 * i, 2 * i)


def admissible(mode: str, image_grading: tuple[int, int], target_grading: tuple[int, int]):
    """The unique monomial placing a target generator at ``image_grading``.

    Returns (i, j) or None when no monomial with non-negative exponents fits.
    """
    du = target_grading[0] - image_grading[0]
    dv = target_grading[1] - image_grading[1]
    if du < 0 or dv < 0 or du % 2 or dv % 2:
        return None
    if mode == TWO_VAR:
        return (du // 2, dv // 2)
    if du != dv:
        return None
    return (du // 2, 0)


def swap(g: tuple[int, int]) -> tuple[int, int]:
    return (g[1], g[0])


def add_pair(a: tuple[int, int], b: tuple[int, int]) -> tuple[int, int]:
    return (a[0] + b[0], a[1] + b[1])


@dataclass(frozen=True, eq=False)
class Complex:
    mode: str
    names: tuple[str, ...]
    gradings: Mapping[str, tuple[int, int]]
    diff: Mapping[str, Chain]
    shift: Fraction = Fraction(0)
    label: str = ""
    _index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.mode not in (TWO_VAR, ONE_VAR):
            raise StructuralError(f"unknown ring mode {self.mode!r}")
        if len(set(self.names)) != len(self.names):
            raise StructuralError("duplicate generator names")
        self._index.update({n: k for k, n in enumerate(self.names)})
        for g, img in self.diff.items():
            if g not in self._index:
                raise StructuralError(f"differential given for unknown generator {g!r}")
            for t, i, j in img:
                if t not in self._index:
                    raise StructuralError(f"differential of {g!r} refers to unknown generator {t!r}")
                if i < 0 or j < 0 or (self.mode == ONE_VAR and j):
                    raise StructuralError(f"bad monomial exponents in differential of {g!r}")

    @classmethod
    def build(cls, mode: str, generators: Sequence[tuple], differential: Mapping[str, Iterable] | None = None,
              shift: Fraction | int | str = 0, label: str = "") -> "Complex":
        """Build from ``(name, gr_U, gr_V)`` (knot mode) or ``(name, maslov)`` rows."""
        names = []
        gradings = {}
        for row in generators:
            if mode == ONE_VAR:
                name, m = row[0], row[1]
                gradings[name] = (int(m), int(m))
            else:
                name, gu, gv = row
                gradings[name] = (int(gu), int(gv))
            names.append(name)
        diff = {n: EMPTY for n in names}
        for g, terms in (differential or {}).items():
            diff[g] = chain(*[(t, 0, 0) if isinstance(t, str) else tuple(t) for t in terms])
        return cls(mode, tuple(names), gradings, diff, Fraction(shift), label)

    def index(self, name: str) -> int:
        return self._index[name]

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def __len__(self) -> int:
        return len(self.names)

    def d(self, c: Chain) -> Chain:
        acc: set = set()
        for g, i, j in c:
            for t, a, b in self.diff[g]:
                toggle(acc, (t, a + i, b + j))
        return frozenset(acc)

    def grading_of(self, term: Term) -> tuple[int, int]:
        g, i, j = term
        e = effect(self.mode, i, j)
        gr = self.gradings[g]
        return (gr[0] - e[0], gr[1] - e[1])

    def alexander(self, name: str) -> Fraction:
        gu, gv = self.gradings[name]
        return Fraction(gu - gv, 2)

    def maslov(self, name: str) -> int:
        return self.gradings[name][0]

    def renamed(self, mapping: Mapping[str, str], label: str | None = None) -> "Complex":
        names = tuple(mapping[n] for n in self.names)
        return Complex(self.mode, names, {mapping[n]: self.gradings[n] for n in self.names},
                       {mapping[n]: rename_chain(self.diff[n], mapping) for n in self.names},
                       self.shift, self.label if label is None else label)

    def with_shift(self, shift) -> "Complex":
        return Complex(self.mode, self.names, self.gradings, self.diff, Fraction(shift), self.label)

    def same_as(self, other: "Complex") -> bool:
        return (self.mode == other.mode and self.names == other.names
                and dict(self.gradings) == dict(other.gradings)
                and all(self.diff[n] == other.diff[n] for n in self.names)
                and self.shift == other.shift)


def rename_chain(c: Chain, mapping: Mapping[str, str]) -> Chain:
    return frozenset((mapping[g], i, j) for g, i, j in c)


def trivial_complex(mode: str = TWO_VAR, name: str = "1") -> Complex:
    if mode == ONE_VAR:
        return Complex.build(ONE_VAR, [(name, 0)], label="trivial")
    return Complex.build(TWO_VAR, [(name, 0, 0)], label="trivial")


# ---------------------------------------------------------------------------
# maps


@dataclass(frozen=True, eq=False)
class GradedMap:
    """F2[U,V]-linear (``skew=False``) or skew-linear map between complexes.

    A skew map satisfies f(U^i V^j x) = V^i U^j f(x) and sends a generator of
    grading g to grading swap(g) + degree.
    """

    source: Complex
    target: Complex
    images: Mapping[str, Chain]
    skew: bool = False
    degree: tuple[int, int] | None = (0, 0)

    def __post_init__(self):
        if self.source.mode != self.target.mode:
            raise ModeMismatch("map between complexes over different rings")
        if self.skew and self.source.mode == ONE_VAR:
            raise StructuralError("skew maps only exist over F2[U,V]")
        for g, img in self.images.items():
            if g not in self.source:
                raise StructuralError(f"map image given for unknown generator {g!r}")
            for t, _, _ in img:
                if t not in self.target:
                    raise StructuralError(f"image of {g!r} refers to unknown generator {t!r}")

    @classmethod
    def build(cls, source: Complex, target: Complex, images: Mapping[str, Iterable],
              skew: bool = False, degree=(0, 0)) -> "GradedMap":
        imgs = {g: chain(*[(t, 0, 0) if isinstance(t, str) else tuple(t) for t in terms])
                for g, terms in images.items()}
        return cls(source, target, imgs, skew, degree)

    @classmethod
    def identity(cls, C: Complex) -> "GradedMap":
        return cls(C, C, {n: frozenset([(n, 0, 0)]) for n in C.names})

    @classmethod
    def zero(cls, source: Complex, target: Complex, skew: bool = False, degree=(0, 0)) -> "GradedMap":
        return cls(source, target, {}, skew, degree)

    def image(self, name: str) -> Chain:
        return self.images.get(name, EMPTY)

    def __call__(self, c: Chain) -> Chain:
        acc: set = set()
        for g, i, j in c:
            if self.skew:
                i, j = j, i
            for t, a, b in self.images.get(g, ()):
                toggle(acc, (t, a + i, b + j))
        return frozenset(acc)

    def __matmul__(self, other: "GradedMap") -> "GradedMap":
        """Composition ``self ∘ other``."""
        if other.target is not self.source and not other.target.same_as(self.source):
            raise StructuralError("composition of incompatible maps")
        if self.degree is None or other.degree is None:
            deg = None
        else:
            inner = swap(other.degree) if self.skew else other.degree
            deg = add_pair(self.degree, inner)
        imgs = {g: self(other.image(g)) for g in other.source.names}
        return GradedMap(other.source, self.target, imgs, self.skew != other.skew, deg)

    def __add__(self, other: "GradedMap") -> "GradedMap":
        if self.skew != other.skew:
            raise StructuralError("cannot add linear and skew maps")
        deg = self.degree if self.degree == other.degree else None
        imgs = {g: self.image(g) ^ other.image(g) for g in self.source.names}
        return GradedMap(self.source, self.target, imgs, self.skew, deg)

    def equals(self, other: "GradedMap") -> bool:
        return (self.skew == other.skew
                and all(self.image(g) == other.image(g) for g in self.source.names))

    def is_zero(self) -> bool:
        return not any(self.images.values())

    def entries(self) -> list[tuple[str, str, int, int]]:
        return sorted((g, t, i, j) for g in self.source.names for t, i, j in self.image(g))

    def with_degree(self, degree) -> "GradedMap":
        return GradedMap(self.source, self.target, self.images, self.skew, degree)

    def homogeneity_violations(self) -> list[tuple[str, str]]:
        if self.degree is None:
            return []
        bad = []
        for g in self.source.names:
            gr = self.source.gradings[g]
            want = add_pair(swap(gr) if self.skew else gr, self.degree)
            for t, i, j in self.image(g):
                if self.target.grading_of((t, i, j)) != want:
                    bad.append((g, t))
        return bad

    def is_homogeneous(self) -> bool:
        return not self.homogeneity_violations()

    def describe(self) -> dict[str, str]:
        mode = self.source.mode
        return {g: chain_str(self.image(g), mode) for g in self.source.names if self.image(g)}


def differential_map(C: Complex) -> GradedMap:
    return GradedMap(C, C, dict(C.diff), False, DIFF_DEGREE)


# ---------------------------------------------------------------------------
# validation


@dataclass
class ValidationReport:
    d_squared: list[tuple[str, str]] = field(default_factory=list)
    inhomogeneous: list[tuple[str, str]] = field(default_factory=list)
    bad_alexander: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.d_squared or self.inhomogeneous or self.bad_alexander)

    def lines(self) -> list[str]:
        out = []
        out += [f"d^2 != 0: d(d({g})) contains {t}" for g, t in self.d_squared]
        out += [f"inhomogeneous differential entry ({g},{t})" for g, t in self.inhomogeneous]
        out += [f"non-integral Alexander grading at {g}" for g in self.bad_alexander]
        return out

    def as_dict(self) -> dict:
        return {"valid": self.ok,
                "d_squared": [list(p) for p in self.d_squared],
                "inhomogeneous": [list(p) for p in self.inhomogeneous],
                "bad_alexander": list(self.bad_alexander)}


def validate_complex(C: Complex) -> ValidationReport:
    rep = ValidationReport()
    for g in C.names:
        for t, _, _ in sorted(C.d(C.diff[g])):
            rep.d_squared.append((g, t))
    rep.inhomogeneous = differential_map(C).homogeneity_violations()
    for g in C.names:
        gu, gv = C.gradings[g]
        if C.mode == TWO_VAR and (gu - gv) % 2:
            rep.bad_alexander.append(g)
        if C.mode == ONE_VAR and gu != gv:
            rep.bad_alexander.append(g)
    return rep


def is_chain_map(f: GradedMap) -> bool:
    S, T = f.source, f.target
    return all(f(S.diff[g]) == T.d(f.image(g)) for g in S.names)


# ---------------------------------------------------------------------------
# tensor products and duals


def pair_name(p: str, q: str) -> str:
    return f"{p}|{q}"


def tensor_complex(C1: Complex, C2: Complex, label: str = "") -> Complex:
    if C1.mode != C2.mode:
        raise ModeMismatch("tensor product of complexes over different rings")
    names = []
    gradings = {}
    diff = {}
    for p in C1.names:
        for q in C2.names:
            n = pair_name(p, q)
            names.append(n)
            gradings[n] = add_pair(C1.gradings[p], C2.gradings[q])
            acc: set = set()
            for p2, i, j in C1.diff[p]:
                toggle(acc, (pair_name(p2, q), i, j))
            for q2, i, j in C2.diff[q]:
                toggle(acc, (pair_name(p, q2), i, j))
            diff[n] = frozenset(acc)
    return Complex(C1.mode, tuple(names), gradings, diff, C1.shift + C2.shift,
                   label or f"({C1.label})⊗({C2.label})")


def tensor_maps(f: GradedMap, g: GradedMap, source: Complex | None = None,
                target: Complex | None = None) -> GradedMap:
    if f.skew != g.skew:
        raise StructuralError("tensor product of a linear and a skew map is not defined")
    source = source or tensor_complex(f.source, g.source)
    target = target or tensor_complex(f.target, g.target)
    imgs = {}
    for p in f.source.names:
        fp = f.image(p)
        for q in g.source.names:
            acc: set = set()
            for p2, i, j in fp:
                for q2, a, b in g.image(q):
                    toggle(acc, (pair_name(p2, q2), i + a, j + b))
            imgs[pair_name(p, q)] = frozenset(acc)
    deg = None if f.degree is None or g.degree is None else add_pair(f.degree, g.degree)
    return GradedMap(source, target, imgs, f.skew, deg)


def dual_name(name: str) -> str:
    return name[:-1] if name.endswith("*") else name + "*"


def dualize(C: Complex, maps: Sequence[GradedMap] = ()) -> tuple[Complex, list[GradedMap]]:
    """Dual complex Hom(C, ring) with each endomorphism transposed."""
    names = tuple(dual_name(n) for n in C.names)
    gradings = {dual_name(n): (-C.gradings[n][0], -C.gradings[n][1]) for n in C.names}
    acc: dict[str, set] = {n: set() for n in names}
    for s in C.names:
        for t, i, j in C.diff[s]:
            toggle(acc[dual_name(t)], (dual_name(s), i, j))
    D = Complex(C.mode, names, gradings, {n: frozenset(v) for n, v in acc.items()},
                -C.shift, f"({C.label})^v")
    return D, [dualize_map(f, D, D) for f in maps]


def dualize_map(f: GradedMap, new_source: Complex | None = None,
                new_target: Complex | None = None) -> GradedMap:
    """f: C1 -> C2 becomes f^v: C2^v -> C1^v."""
    if new_source is None:
        new_source = dualize(f.target)[0]
    if new_target is None:
        new_target = dualize(f.source)[0]
    acc: dict[str, set] = {n: set() for n in new_source.names}
    for s in f.source.names:
        for t, i, j in f.image(s):
            # skew maps stay skew: the functional t* o f is conjugated back to linear
            term = (dual_name(s), j, i) if f.skew else (dual_name(s), i, j)
            toggle(acc[dual_name(t)], term)
    return GradedMap(new_source, new_target, {n: frozenset(v) for n, v in acc.items()},
                     f.skew, f.degree)


# ---------------------------------------------------------------------------
# reduction to a minimal model


@dataclass(frozen=True, eq=False)
class ReductionCertificate:
    original: Complex
    minimal: Complex
    include: GradedMap   # minimal -> original
    project: GradedMap   # original -> minimal
    homotopy: GradedMap  # original -> original, id + include∘project = ∂h + h∂

    def transfer(self, f: GradedMap) -> GradedMap:
        """Conjugate an endomorphism of the original complex to the minimal model."""
        return self.project @ f @ self.include


def _unit_arrow(names: Sequence[str], diff: Mapping[str, set], alive: set) -> tuple[str, str] | None:
    for s in names:
        if s not in alive:
            continue
        hits = sorted(t for t, i, j in diff[s] if i == 0 and j == 0)
        if hits:
            order = {n: k for k, n in enumerate(names)}
            return s, min(hits, key=order.__getitem__)
    return None


def reduce(C: Complex, maps: Sequence[GradedMap] = ()) -> tuple[ReductionCertificate, list[GradedMap]]:
    """Cancel unit differential entries until none remain.

    Cancellation order is deterministic: the first generator (in the
    complex's order) with a unit arrow, paired with its first unit target.
    """
    alive = set(C.names)
    diff = {n: set(C.diff[n]) for n in C.names}
    inc = {n: {(n, 0, 0)} for n in C.names}           # current gen -> chain in C
    proj = {n: {(n, 0, 0)} for n in C.names}          # C gen -> chain in current
    hom: dict[str, set] = {n: set() for n in C.names}  # C gen -> chain in C
    # reverse adjacency: t -> set of sources whose differential contains t
    into: dict[str, set] = {n: set() for n in C.names}
    for s in C.names:
        for t, _, _ in diff[s]:
            into[t].add(s)

    def coeffs(c: set, name: str) -> list[tuple[int, int]]:
        return [(i, j) for g, i, j in c if g == name]

    while True:
        arrow = _unit_arrow(C.names, diff, alive)
        if arrow is None:
            break
        s, t = arrow
        ds_rest = [(g, i, j) for g, i, j in diff[s] if g not in (s, t)]
        inc_s = set(inc[s])
        # ∂'y = ∂y + c_y ∂s on the remaining generators, c_y = coefficient of t in ∂y
        for y in sorted((into[t] | into[s]) - {s, t}):
            if y not in alive:
                continue
            for ci, cj in coeffs(diff[y], t):
                for g, i, j in ds_rest:
                    toggle(diff[y], (g, i + ci, j + cj))
                    into[g].add(y)
                for g, i, j in inc_s:
                    toggle(inc[y], (g, i + ci, j + cj))
            diff[y] = {term for term in diff[y] if term[0] not in (s, t)}
        # p' = p_step ∘ p: replace t by ∂_{X,s}, drop s
        for g in C.names:
            pg = proj[g]
            if not any(term[0] in (s, t) for term in pg):
                continue
            new: set = set()
            for term in pg:
                if term[0] == s:
                    continue
                if term[0] == t:
                    ci, cj = term[1], term[2]
                    for h, i, j in ds_rest:
                        toggle(new, (h, i + ci, j + cj))
                    for h, i, j in inc_s:
                        toggle(hom[g], (h, i + ci, j + cj))
                    continue
                toggle(new, term)
            proj[g] = new
        alive.discard(s)
        alive.discard(t)
        for g in (s, t):
            del diff[g], inc[g]
        for g in alive:
            into[g].discard(s)
            into[g].discard(t)

    names = tuple(n for n in C.names if n in alive)
    M = Complex(C.mode, names, {n: C.gradings[n] for n in names},
                {n: frozenset(diff[n]) for n in names}, C.shift, C.label)
    include = GradedMap(M, C, {n: frozenset(inc[n]) for n in names})
    project = GradedMap(C, M, {n: frozenset(proj[n]) for n in C.names})
    homotopy = GradedMap(C, C, {n: frozenset(hom[n]) for n in C.names}, False, (1, 1))
    cert = ReductionCertificate(C, M, include, project, homotopy)
    return cert, [cert.transfer(f) for f in maps]


# ---------------------------------------------------------------------------
# homotopies


def homotopic(f: GradedMap, g: GradedMap) -> GradedMap | None:
    """Find H with f + g = ∂H + H∂, or None if no such homogeneous H exists.

    Only homogeneous H of degree deg(f) + (1, 1) are searched.  This loses
    nothing: the equation f + g = ∂H + H∂ is graded, ∂ is homogeneous, and
    f + g is homogeneous, so projecting any solution H onto its component of
    degree deg(f) + (1, 1) (keeping only the terms in that degree) is again
    a solution.  Each unknown is one F2 bit because the monomial on a given
    (source, target) pair is forced by the grading gap.
    """
    if f.source is not g.source and not f.source.same_as(g.source):
        raise StructuralError("maps have different sources")
    if f.target is not g.target and not f.target.same_as(g.target):
        raise StructuralError("maps have different targets")
    if f.skew != g.skew:
        raise StructuralError("maps have different equivariance modes")
    degree = f.degree if f.degree is not None else g.degree
    if degree is None or (g.degree is not None and g.degree != degree):
        raise StructuralError("homotopic needs homogeneous maps of a common degree")
    S, T = f.source, f.target
    skew = f.skew
    mode = S.mode
    hdeg = add_pair(degree, (1, 1))
    diff_f = f + g
    if diff_f.is_zero():
        return GradedMap.zero(S, T, skew, hdeg)
    if diff_f.homogeneity_violations():
        return None

    into: dict[str, list] = {n: [] for n in S.names}
    for s2 in S.names:
        for s, a, b in S.diff[s2]:
            into[s].append((s2, a, b))

    eq_index: dict[Term | tuple, int] = {}

    def bit(key) -> int:
        k = eq_index.get(key)
        if k is None:
            k = eq_index[key] = len(eq_index)
        return 1 << k

    unknowns: list[tuple[str, str, int, int]] = []
    solver = F2Solver()
    for s in S.names:
        want = add_pair(swap(S.gradings[s]) if skew else S.gradings[s], hdeg)
        for t in T.names:
            mono = admissible(mode, want, T.gradings[t])
            if mono is None:
                continue
            i, j = mono
            col = 0
            # ∂_T(U^i V^j t), as the image of s
            for t2, a, b in T.diff[t]:
                col ^= bit((s, t2, a + i, b + j))
            # E(∂ s2) for every s2 whose differential hits s
            for s2, a, b in into[s]:
                a2, b2 = (b, a) if skew else (a, b)
                col ^= bit((s2, t, a2 + i, b2 + j))
            unknowns.append((s, t, i, j))
            solver.add_column(col)
    rhs = 0
    for s in S.names:
        for t, a, b in diff_f.image(s):
            key = (s, t, a, b)
            if key not in eq_index:
                return None
            rhs ^= 1 << eq_index[key]
    x = solver.solve(rhs)
    if x is None:
        return None
    acc: dict[str, set] = {n: set() for n in S.names}
    for k, (s, t, i, j) in enumerate(unknowns):
        if (x >> k) & 1:
            toggle(acc[s], (t, i, j))
    H = GradedMap(S, T, {n: frozenset(v) for n, v in acc.items()}, skew, hdeg)
    return H


def homotopy_residual(f: GradedMap, g: GradedMap, H: GradedMap) -> GradedMap:
    """f + g + ∂H + H∂; zero exactly when H certifies f ≃ g."""
    dT = differential_map(f.target)
    dS = differential_map(f.source)
    return f + g + (dT @ H).with_degree(f.degree) + (H @ dS).with_degree(f.degree)


def is_isomorphic_by_names(C: Complex, D: Complex, mapping: Mapping[str, str]) -> bool:
    """Whether renaming C's generators by ``mapping`` reproduces D exactly."""
    if set(mapping) != set(C.names) or set(mapping.values()) != set(D.names):
        return False
    for n in C.names:
        m = mapping[n]
        if C.gradings[n] != D.gradings[m]:
            return False
        if rename_chain(C.diff[n], mapping) != D.diff[m]:
            return False
    return C.mode == D.mode


def rename_map(f: GradedMap, source: Complex, target: Complex, smap: Mapping[str, str],
               tmap: Mapping[str, str]) -> GradedMap:
    imgs = {smap[g]: rename_chain(f.image(g), tmap) for g in f.source.names}
    return GradedMap(source, target, imgs, f.skew, f.degree)


__all__ = [
    "Chain", "EMPTY", "StructuralError", "Complex", "GradedMap", "ValidationReport",
    "ReductionCertificate", "chain", "chain_str", "shift_chain", "admissible", "effect",
    "trivial_complex", "differential_map", "validate_complex", "is_chain_map",
    "tensor_complex", "tensor_maps", "dualize", "dualize_map", "dual_name", "reduce",
    "homotopic", "homotopy_residual", "is_isomorphic_by_names", "rename_map", "pair_name",
]
