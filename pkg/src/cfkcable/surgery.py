"""Large-surgery complexes A₀, their F[U]-homology, and locality checks."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import warnings

from .algebra import ONE_VAR, TWO_VAR, F2Solver, integer_leading_minors, MonomialMatrix, Poly, SmithForm, snf_over_FU
from .complexes import (
    Chain,
    Complex,
    GradedMap,
    ReductionCertificate,
    StructuralError,
    admissible,
    dualize,
    dualize_map,
    homotopic,
    is_chain_map,
    reduce,
    tensor_complex,
    tensor_maps,
    toggle,
    trivial_complex,
)
from .equivariant import IotaTauComplex


class NormalizationError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SurgeryComplex:
    complex: Complex
    iota: GradedMap
    tau: GradedMap

    @property
    def shift(self) -> Fraction:
        return self.complex.shift


def trivial_surgery() -> SurgeryComplex:
    T = trivial_complex(ONE_VAR)
    ident = GradedMap.identity(T)
    return SurgeryComplex(T, ident, ident)


# ---------------------------------------------------------------------------
# A₀


def _a0_basis_term(C: Complex, name: str) -> tuple[str, int, int]:
    a = C.alexander(name)
    if a.denominator != 1:
        raise StructuralError(f"non-integral Alexander grading at {name}")
    a = int(a)
    return (name, max(a, 0), max(-a, 0))


def _to_a0(C: Complex, c: Chain, what: str) -> Chain:
    acc: set = set()
    for g, i, j in c:
        if C.alexander(g) - i + j != 0:
            raise StructuralError(f"{what} leaves Alexander grading zero at {g}")
        toggle(acc, (g, min(i, j), 0))
    return frozenset(acc)


def extract_A0(C: IotaTauComplex) -> SurgeryComplex:
    """The Alexander-grading-zero subcomplex as a complex over F[U], U = 𝒰𝒱.

    Generator g stands for 𝒰^A(g) g when A(g) >= 0 and 𝒱^-A(g) g otherwise;
    its Maslov grading is min(gr_U, gr_V).
    """
    K = C.complex
    if K.mode != TWO_VAR:
        raise StructuralError("A₀ is extracted from a complex over F2[U,V]")
    base = {n: frozenset([_a0_basis_term(K, n)]) for n in K.names}
    gens = [(n, min(K.gradings[n])) for n in K.names]
    diff = {n: _to_a0(K, K.d(base[n]), "∂") for n in K.names}
    A = Complex.build(ONE_VAR, gens, {}, shift=0, label=f"A0({K.label})")
    A = Complex(ONE_VAR, A.names, A.gradings, diff, Fraction(0), A.label)

    def restrict(f: GradedMap, what: str) -> GradedMap:
        if not f.skew and f.degree is not None and f.degree[0] != f.degree[1]:
            raise StructuralError(f"{what} does not preserve A₀")
        return GradedMap(A, A, {n: _to_a0(K, f(base[n]), what) for n in K.names}, False, (0, 0))

    return SurgeryComplex(A, restrict(C.iota, "ι"), restrict(C.tau, "τ"))


def v_one(f: GradedMap) -> GradedMap:
    """Set 𝒱 = 1: a knot-level linear map becomes a map of F[U]-complexes graded by gr_U."""
    def spec(K: Complex) -> Complex:
        return Complex(ONE_VAR, K.names, {n: (g[0], g[0]) for n, g in K.gradings.items()},
                       {n: _drop_v(K.diff[n]) for n in K.names}, K.shift, K.label)

    if f.skew:
        raise StructuralError("setting 𝒱 = 1 needs a linear map")
    S, T = spec(f.source), spec(f.target)
    deg = None if f.degree is None else (f.degree[0], f.degree[0])
    return GradedMap(S, T, {g: _drop_v(f.image(g)) for g in f.source.names}, False, deg)


def _drop_v(c: Chain) -> Chain:
    acc: set = set()
    for g, i, _ in c:
        toggle(acc, (g, i, 0))
    return frozenset(acc)


# ---------------------------------------------------------------------------
# splitting a minimal F[U]-complex


def _padd(p: frozenset, q: frozenset) -> frozenset:
    return p ^ q


def _pshift(p: frozenset, e: int) -> frozenset:
    return frozenset(k + e for k in p)


@dataclass
class Splitting:
    """Basis of a minimal complex in which ∂ is a sum of pieces s -> U^k t."""

    basis: dict[str, Chain]                 # new basis vector (keyed by name) in M's generators
    inverse: dict[str, dict[str, frozenset]]  # row j: coefficient of old gen g in new coordinate j
    pairs: list[tuple[str, str, int]]       # (source, target, k)
    towers: list[str]

    def coordinates(self, c: Chain) -> dict[str, frozenset]:
        out: dict[str, frozenset] = {}
        for j, row in self.inverse.items():
            acc: frozenset = frozenset()
            for g, i, _ in c:
                p = row.get(g)
                if p:
                    acc = _padd(acc, _pshift(p, i))
            if acc:
                out[j] = acc
        return out


def split_minimal(M: Complex) -> Splitting:
    if M.mode != ONE_VAR:
        raise StructuralError("splitting is done over F[U]")
    names = list(M.names)
    order = {n: k for k, n in enumerate(names)}
    ent: dict[tuple[str, str], frozenset] = {}
    for s in names:
        for t, i, _ in M.diff[s]:
            key = (t, s)
            ent[key] = _padd(ent.get(key, frozenset()), frozenset([i]))
            if not ent[key]:
                del ent[key]
    basis = {n: {(n, 0)} for n in names}          # name -> set of (old gen, power)
    inv = {n: {n: frozenset([0])} for n in names}  # row name -> {old gen: poly}

    def set_entry(key, p):
        if p:
            ent[key] = p
        else:
            ent.pop(key, None)

    def change(j: str, i: str, e: int) -> None:
        """b_j <- b_j + U^e b_i, conjugating ∂."""
        # column j += U^e column i
        for (r, c), p in list(ent.items()):
            if c == i:
                set_entry((r, j), _padd(ent.get((r, j), frozenset()), _pshift(p, e)))
        # row i += U^e row j
        for (r, c), p in list(ent.items()):
            if r == j:
                set_entry((i, c), _padd(ent.get((i, c), frozenset()), _pshift(p, e)))
        for g, k in list(basis[i]):
            term = (g, k + e)
            if term in basis[j]:
                basis[j].remove(term)
            else:
                basis[j].add(term)
        for g, p in inv[j].items():
            inv[i][g] = _padd(inv[i].get(g, frozenset()), _pshift(p, e))
            if not inv[i][g]:
                del inv[i][g]

    used: set[str] = set()
    pairs = []
    while True:
        best = None
        for (t, s), p in ent.items():
            if t in used or s in used:
                continue
            if len(p) != 1:
                raise StructuralError("minimal complex has a non-monomial differential entry")
            k = next(iter(p))
            key = (k, order[t], order[s])
            if best is None or key < best:
                best = key
        if best is None:
            break
        k, ti, si = best
        t, s = names[ti], names[si]
        if k == 0:
            raise StructuralError("complex is not minimal (unit differential entry)")
        for s2 in names:
            if s2 == s or s2 in used:
                continue
            p = ent.get((t, s2))
            if p:
                change(s2, s, next(iter(p)) - k)
        for t2 in names:
            if t2 == t or t2 in used:
                continue
            p = ent.get((t2, s))
            if p:
                change(t, t2, next(iter(p)) - k)
        used.update((s, t))
        pairs.append((s, t, k))
    towers = [n for n in names if n not in used]
    out_basis = {n: frozenset((g, k, 0) for g, k in basis[n]) for n in names}
    return Splitting(out_basis, inv, pairs, towers)


# ---------------------------------------------------------------------------
# homology


@dataclass(frozen=True)
class HomologyGenerator:
    label: str
    grading: int
    order: int | None   # None: tower (U-nontorsion)
    rep: Chain          # cycle in the original complex

    @property
    def free(self) -> bool:
        return self.order is None


def chain_label(c: Chain) -> str:
    """'[a|d+d|a]'-style label of a cycle."""
    parts = []
    for g, i, _ in sorted(c, key=lambda t: (t[1], t[0])):
        parts.append(g if i == 0 else (f"U{g}" if i == 1 else f"U^{i}{g}"))
    return "[" + "+".join(parts) + "]"


class HomologyDecomposition:
    """H_*(S) as an F[U]-module with a chosen generating set of classes."""

    def __init__(self, S: SurgeryComplex, cert: ReductionCertificate, split: Splitting,
                 snf: SmithForm, named: Sequence[tuple[str, Chain]] | None = None):
        self.surgery = S
        self.complex = S.complex
        self.cert = cert
        self.split = split
        self.snf = snf
        M = cert.minimal
        self._orders = {t: k for _, t, k in split.pairs}
        self._orders.update({t: None for t in split.towers})
        self._snf_gens = list(split.towers) + [t for _, t, _ in split.pairs]
        self._snf_grading = {}
        for g in self._snf_gens:
            gr = {M.grading_of(term)[0] for term in split.basis[g]}
            if len(gr) != 1:
                raise StructuralError("split basis vector is not homogeneous")
            self._snf_grading[g] = gr.pop()
        if named is None:
            self.generators = [
                HomologyGenerator(chain_label(cert.include(split.basis[g])), self._snf_grading[g],
                                  self._orders[g], cert.include(split.basis[g]))
                for g in self._snf_gens]
        else:
            self.generators = self._adopt(named)
        self._by_label = {h.label: h for h in self.generators}

    # -- coordinates relative to the splitting ---------------------------------

    @property
    def tower_rank(self) -> int:
        return len(self.split.towers)

    @property
    def torsion(self) -> list[tuple[int, int]]:
        return sorted((h.order, h.grading) for h in self.generators if h.order is not None)

    @property
    def max_torsion_order(self) -> int:
        return max((k for k, _ in self.torsion), default=0)

    def snf_coordinates(self, cycle: Chain) -> dict[str, frozenset]:
        """Class of a cycle of the original complex in the split basis."""
        zM = self.cert.project(cycle)
        coords = self.split.coordinates(zM)
        out = {}
        for g, p in coords.items():
            k = self._orders.get(g, "source")
            if k == "source":
                raise StructuralError("not a cycle")
            if k is not None:
                p = frozenset(e for e in p if e < k)
            if p:
                out[g] = p
        return out

    def is_cycle(self, c: Chain) -> bool:
        return not self.complex.d(c)

    def is_boundary(self, c: Chain) -> bool:
        return self.is_cycle(c) and not self.snf_coordinates(c)

    def is_nontorsion(self, cycle: Chain) -> bool:
        """U^{k_max} c != 0 in homology."""
        k = self.max_torsion_order
        shifted = frozenset((g, i + k, j) for g, i, j in cycle)
        return bool(self.snf_coordinates(shifted))

    def free_coordinate(self, cycle: Chain) -> frozenset:
        coords = self.snf_coordinates(cycle)
        acc: frozenset = frozenset()
        for g in self.split.towers:
            acc = acc ^ coords.get(g, frozenset())
        return acc

    # -- graded slices over F2 ------------------------------------------------

    def _snf_slice(self, m: int) -> list[tuple[str, int]]:
        out = []
        for g in self._snf_gens:
            d = self._snf_grading[g] - m
            if d >= 0 and d % 2 == 0:
                e = d // 2
                k = self._orders[g]
                if k is None or e < k:
                    out.append((g, e))
        return out

    def _vector(self, coords: Mapping[str, frozenset], m: int) -> int:
        idx = {ge: k for k, ge in enumerate(self._snf_slice(m))}
        v = 0
        for g, p in coords.items():
            for e in p:
                key = (g, e)
                if key not in idx:
                    raise StructuralError("class is not homogeneous in the requested grading")
                v ^= 1 << idx[key]
        return v

    def slice_basis(self, m: int) -> list[tuple[str, int]]:
        """F2 basis U^e·h of H_m in terms of the chosen generators."""
        out = []
        for h in self.generators:
            d = h.grading - m
            if d >= 0 and d % 2 == 0:
                e = d // 2
                if h.order is None or e < h.order:
                    out.append((h.label, e))
        return out

    def _slice_solver(self, m: int) -> tuple[F2Solver, list[tuple[str, int]]]:
        basis = self.slice_basis(m)
        solver = F2Solver()
        for label, e in basis:
            rep = self._by_label[label].rep
            shifted = frozenset((g, i + e, j) for g, i, j in rep)
            solver.add_column(self._vector(self.snf_coordinates(shifted), m))
        return solver, basis

    def express(self, cycle: Chain, m: int) -> list[tuple[str, int]]:
        """Write a homogeneous cycle of grading m in the chosen generators."""
        solver, basis = self._slice_solver(m)
        x = solver.solve(self._vector(self.snf_coordinates(cycle), m))
        if x is None:
            raise StructuralError("chosen generators do not span the homology")
        return [basis[k] for k in range(len(basis)) if (x >> k) & 1]

    def induced_matrix(self, f: GradedMap, m: int) -> list[list[int]]:
        """Matrix of f_* on H_m; column k is the image of slice basis element k."""
        basis = self.slice_basis(m)
        cols = []
        for label, e in basis:
            rep = self._by_label[label].rep
            img = f(frozenset((g, i + e, j) for g, i, j in rep))
            terms = set(self.express(img, m))
            cols.append([1 if b in terms else 0 for b in basis])
        return [list(row) for row in zip(*cols)] if cols else []

    # -- choosing generators ----------------------------------------------------

    def _adopt(self, named: Sequence[tuple[str, Chain]]) -> list[HomologyGenerator]:
        gens = []
        for label, rep in named:
            if not self.is_cycle(rep):
                raise StructuralError(f"{label} is not a cycle")
            gr = {self.complex.grading_of(t)[0] for t in rep}
            if len(gr) != 1:
                raise StructuralError(f"{label} is not homogeneous")
            coords = self.snf_coordinates(rep)
            if not coords:
                raise StructuralError(f"{label} is zero in homology")
            order = None
            if not any(g in self.split.towers for g in coords):
                order = max(self._orders[g] - min(p) for g, p in coords.items())
            gens.append(HomologyGenerator(label, gr.pop(), order, rep))
        expected = sorted((self._orders[g] or 0, self._orders[g] is None) for g in self._snf_gens)
        got = sorted((h.order or 0, h.order is None) for h in gens)
        if got != expected:
            raise StructuralError("named classes do not match the torsion orders of the homology")
        # generation: their images in H / U H must be a basis
        solver = F2Solver()
        idx = {g: k for k, g in enumerate(self._snf_gens)}
        for h in gens:
            col = 0
            for g, p in self.snf_coordinates(h.rep).items():
                if 0 in p and self._snf_grading[g] == h.grading:
                    col ^= 1 << idx[g]
            solver.add_column(col)
        if solver.rank != len(self._snf_gens):
            raise StructuralError("named classes do not generate the homology")
        return gens

    def iota_matrix(self, m: int = 0) -> list[list[int]]:
        return self.induced_matrix(self.surgery.iota, m)

    def tau_matrix(self, m: int = 0) -> list[list[int]]:
        return self.induced_matrix(self.surgery.tau, m)

    def class_expression(self, terms: Iterable[tuple[str, int]], lead: str | None = None) -> str:
        """'[x|d]+[d|d]'; ``lead`` (usually the class being mapped) is written first."""
        order = {h.label: k for k, h in enumerate(self.generators)}
        parts = []
        for label, e in sorted(terms, key=lambda t: (t[1], t[0] != lead, order[t[0]])):
            parts.append(label if e == 0 else (f"U{label}" if e == 1 else f"U^{e}{label}"))
        return "+".join(parts) if parts else "0"


def homology_FU(S: SurgeryComplex, named: Sequence[tuple[str, Chain]] | None = None) -> HomologyDecomposition:
    cert, _ = reduce(S.complex)
    M = cert.minimal
    split = split_minimal(M)
    idx = {n: k for k, n in enumerate(M.names)}
    ent = {}
    for s in M.names:
        for t, i, _ in M.diff[s]:
            ent[(idx[t], idx[s])] = Poly.monomial(i, 0, ONE_VAR)
    gr = [M.gradings[n][0] for n in M.names]
    snf = snf_over_FU(MonomialMatrix(len(M), len(M), ent), gr, gr)
    if sorted(snf.diagonal) != sorted(k for _, _, k in split.pairs):
        raise AssertionError("Smith form and splitting disagree")
    return HomologyDecomposition(S, cert, split, snf, named)


@dataclass
class ActionRow:
    label: str
    kind: str          # "free" or "U-torsion"
    order: int | None
    grading: int
    iota_image: str
    tau_image: str


def induced_action_table(H: HomologyDecomposition) -> list[ActionRow]:
    S = H.surgery
    rows = []
    for h in H.generators:
        kind = "free" if h.order is None else "U-torsion"
        rows.append(ActionRow(h.label, kind, h.order, h.grading,
                              H.class_expression(H.express(S.iota(h.rep), h.grading), h.label),
                              H.class_expression(H.express(S.tau(h.rep), h.grading), h.label)))
    return rows


@dataclass
class InvariantClass:
    terms: list[str]
    nontorsion: bool

    @property
    def expression(self) -> str:
        return "+".join(self.terms)


def _rref(vectors: list[int], n: int) -> list[int]:
    """Reduced echelon form; the pivot of a row is its lowest set bit."""
    rows = [v for v in vectors if v]
    out: list[int] = []
    for col in range(n):
        piv = next((r for r in rows if (r >> col) & 1), None)
        if piv is None:
            continue
        rows.remove(piv)
        rows = [r ^ piv if (r >> col) & 1 else r for r in rows]
        out = [o ^ piv if (o >> col) & 1 else o for o in out]
        out.append(piv)
    return out


def invariant_subspace(H: HomologyDecomposition, grading: int = 0,
                       maps: Sequence[GradedMap] | None = None) -> list[InvariantClass]:
    """Basis of the subspace of H_grading fixed by every map (default ι and τ)."""
    S = H.surgery
    if maps is None:
        maps = [S.iota, S.tau]
    basis = H.slice_basis(grading)
    n = len(basis)
    rows: list[list[int]] = []
    for f in maps:
        mat = H.induced_matrix(f, grading)
        for r in range(n):
            rows.append([mat[r][c] ^ (1 if r == c else 0) for c in range(n)])
    if rows:
        from .algebra import f2_solve
        kernel = f2_solve(rows, [0] * len(rows), ncols=n).kernel
        vecs = [sum(b << k for k, b in enumerate(v)) for v in kernel]
    else:
        vecs = [1 << k for k in range(n)]
    out = []
    for v in _rref(vecs, n):
        terms = [basis[k] for k in range(n) if (v >> k) & 1]
        rep: set = set()
        for label, e in terms:
            for g, i, j in H._by_label[label].rep:
                toggle(rep, (g, i + e, j))
        out.append(InvariantClass([H.class_expression([t]) for t in terms],
                                  H.is_nontorsion(frozenset(rep))))
    return out


OBSTRUCTED = "OBSTRUCTED"
INCONCLUSIVE = "INCONCLUSIVE"


@dataclass
class ObstructionVerdict:
    status: str
    witness: list[InvariantClass]
    narrative: str
    symmetries: tuple[str, ...] = ("iota", "tau")


def obstruct_equivariant_ball(S: SurgeryComplex, H: HomologyDecomposition | None = None,
                              symmetries: Sequence[str] = ("iota", "tau")) -> ObstructionVerdict:
    """Look for a U-nontorsion grading-zero class fixed by the chosen symmetries.

    ``symmetries`` picks from "iota", "tau", "tau_iota" (the composite τ∘ι).
    """
    if S.shift != 0:
        raise NormalizationError(
            f"complex carries absolute shift {S.shift}; normalize to the A₀ frame (shift 0) first")
    H = H or homology_FU(S)
    table = {"iota": S.iota, "tau": S.tau, "tau_iota": S.tau @ S.iota}
    maps = [table[s] for s in symmetries]
    witness = invariant_subspace(H, 0, maps)
    names = {"iota": "ι", "tau": "τ", "tau_iota": "τ∘ι"}
    sym = ", ".join(names[s] for s in symmetries) or "no symmetry"
    if any(w.nontorsion for w in witness):
        status = INCONCLUSIVE
        text = (f"a U-nontorsion grading-0 class invariant under {sym} exists; "
                "no obstruction to an equivariant homology ball")
    else:
        status = OBSTRUCTED
        text = (f"every grading-0 class invariant under {sym} is U-torsion; "
                "the manifold bounds no equivariant Z/2-homology ball")
    return ObstructionVerdict(status, witness, text, tuple(symmetries))


# ---------------------------------------------------------------------------
# local maps


@dataclass
class LocalityReport:
    grading_shift: bool
    localized_iso: bool
    iota_commutes: bool
    tau_commutes: bool
    shift: Fraction | None
    certificates: dict[str, GradedMap | None] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.grading_shift and self.localized_iso and self.iota_commutes and self.tau_commutes

    def as_dict(self) -> dict:
        return {"grading_shift": self.grading_shift, "localized_iso": self.localized_iso,
                "iota_commutes": self.iota_commutes, "tau_commutes": self.tau_commutes,
                "shift": None if self.shift is None else str(self.shift)}


def absolute_shift(f: GradedMap) -> Fraction | None:
    if f.degree is None or f.degree[0] != f.degree[1]:
        return None
    return f.degree[0] + f.target.shift - f.source.shift


def tower_map_nonzero(f: GradedMap, H1: HomologyDecomposition | None = None,
                     H2: HomologyDecomposition | None = None) -> bool:
    """Free-coordinate test for the localized-homology isomorphism.

    With tower rank 1 this asks that the tower generator maps to a class with
    nonzero free coordinate.  For rank r the free coordinates form an r x r
    matrix of monomials in U (the map is homogeneous); its determinant is a
    monomial or zero, so invertibility after inverting U is an F2 rank check.
    """
    S1 = SurgeryComplex(f.source, GradedMap.identity(f.source), GradedMap.identity(f.source))
    S2 = SurgeryComplex(f.target, GradedMap.identity(f.target), GradedMap.identity(f.target))
    H1 = H1 or homology_FU(S1)
    H2 = H2 or homology_FU(S2)
    if H1.tower_rank != H2.tower_rank:
        return False
    if H1.tower_rank == 1:
        tower = next(h for h in H1.generators if h.free)
        return bool(H2.free_coordinate(f(tower.rep)))
    targets = list(H2.split.towers)
    solver = F2Solver()
    for h in H1.generators:
        if h.free:
            coords = H2.snf_coordinates(f(h.rep))
            solver.add_column(sum(1 << k for k, t in enumerate(targets) if coords.get(t)))
    return solver.rank == len(targets)


def verify_local(f: GradedMap, source: SurgeryComplex, target: SurgeryComplex,
                 expected_shift: Fraction | int = 0) -> LocalityReport:
    if not is_chain_map(f):
        raise StructuralError("verify_local needs a chain map")
    if not f.is_homogeneous():
        raise StructuralError("verify_local needs a homogeneous map")
    shift = absolute_shift(f)
    H_iota = homotopic(f @ source.iota, target.iota @ f)
    H_tau = homotopic(f @ source.tau, target.tau @ f)
    return LocalityReport(
        grading_shift=shift is not None and shift == Fraction(expected_shift),
        localized_iso=tower_map_nonzero(f),
        iota_commutes=H_iota is not None,
        tau_commutes=H_tau is not None,
        shift=shift,
        certificates={"iota": H_iota, "tau": H_tau},
    )


def find_local_map_to_trivial(S: SurgeryComplex, H: HomologyDecomposition | None = None) -> GradedMap | None:
    """A map S -> F[U] of absolute shift 0 satisfying all four locality conditions.

    The unknowns (the map and two homotopies) are F2 bits; the chain-map and
    homotopy-commutation conditions are linear, and the tower condition is
    added as the single inhomogeneous equation "free coordinate = 1".
    """
    C = S.complex
    T = trivial_surgery().complex
    H = H or homology_FU(S)
    if H.tower_rank != 1:
        return None
    degree = S.shift
    if degree.denominator != 1:
        return None
    degree = int(degree)
    # F: degree `degree`; homotopies: degree + 1.  Target is F[U]·1 in grading 0.
    unknowns: list[tuple[str, str, int]] = []   # (kind, gen, U-power)
    for kind, deg in (("F", degree), ("Hi", degree + 1), ("Ht", degree + 1)):
        for g in C.names:
            mono = admissible(ONE_VAR, (C.gradings[g][0] + deg,) * 2, (0, 0))
            if mono is not None:
                unknowns.append((kind, g, mono[0]))
    eqs: dict[tuple, int] = {}

    def bit(key) -> int:
        if key not in eqs:
            eqs[key] = len(eqs)
        return 1 << eqs[key]

    pos = {(kind, g): (k, p) for k, (kind, g, p) in enumerate(unknowns)}
    columns = [0] * len(unknowns)

    def add_term(kind: str, g: str, shift: int, key_prefix: tuple) -> None:
        hit = pos.get((kind, g))
        if hit is not None:
            k, p = hit
            columns[k] ^= bit(key_prefix + (p + shift,))

    for s in C.names:
        # F∘∂ = 0
        for t, i, _ in C.diff[s]:
            add_term("F", t, i, ("d", s))
        # F∘ι + F + Hi∘∂ = 0, and the same for τ
        for tag, f, hk in (("i", S.iota, "Hi"), ("t", S.tau, "Ht")):
            for t, i, _ in f.image(s):
                add_term("F", t, i, (tag, s))
            add_term("F", s, 0, (tag, s))
            for t, i, _ in C.diff[s]:
                add_term(hk, t, i, (tag, s))
    tower = next(h for h in H.generators if h.free)
    for g, i, _ in tower.rep:
        hit = pos.get(("F", g))
        if hit is not None:
            k, p = hit
            columns[k] ^= bit(("free", p + i))
    # the free coordinate of F(tower) lives in the U-power placing it in grading tower.grading + degree
    target_power = -(tower.grading + degree)
    if target_power < 0 or target_power % 2:
        return None
    rhs = bit(("free", target_power // 2))
    solver = F2Solver()
    for col in columns:
        solver.add_column(col)
    x = solver.solve(rhs)
    if x is None:
        return None
    imgs = {g: frozenset() for g in C.names}
    for k, (kind, g, p) in enumerate(unknowns):
        if kind == "F" and (x >> k) & 1:
            imgs[g] = frozenset([("1", p, 0)])
    F = GradedMap(C, T, imgs, False, (degree, degree))
    return F


# ---------------------------------------------------------------------------
# connected sums and duals


def connected_sum_surgery(S1: SurgeryComplex, S2: SurgeryComplex) -> SurgeryComplex:
    """Tensor over F[U] with ι₁⊗ι₂ and τ₁⊗τ₂ (the cited connected-sum formulas)."""
    C = tensor_complex(S1.complex, S2.complex)
    return SurgeryComplex(C, tensor_maps(S1.iota, S2.iota, C, C), tensor_maps(S1.tau, S2.tau, C, C))


def dual_surgery(S: SurgeryComplex) -> SurgeryComplex:
    D, (i, t) = dualize(S.complex, [S.iota, S.tau])
    return SurgeryComplex(D, i, t)


def dual_local_map(f: GradedMap, source: SurgeryComplex, target: SurgeryComplex) -> tuple[GradedMap, SurgeryComplex, SurgeryComplex]:
    """f: S1 -> S2 gives f^v: S2^v -> S1^v."""
    D2 = dual_surgery(target)
    D1 = dual_surgery(source)
    return dualize_map(f, D2.complex, D1.complex), D2, D1


def coevaluation(S: SurgeryComplex, C: Complex | None = None) -> Chain:
    """Σ g* | g in S^v ⊗ S."""
    from .complexes import dual_name, pair_name

    return frozenset((pair_name(dual_name(g), g), 0, 0) for g in S.complex.names)


# ---------------------------------------------------------------------------
# standard model


@dataclass
class StandardModel:
    complex: Complex
    include: GradedMap   # standard -> original surgery complex
    iota: GradedMap
    tau: GradedMap
    names: dict[str, str]


def _solve_in(M: Complex, target: Chain, grading: int, basis: Sequence[tuple[str, Chain]]) -> list[tuple[str, int]] | None:
    """Write ``target`` as Σ U^e·b over basis chains b, in one grading."""
    cols: list[tuple[str, int]] = []
    idx: dict = {}

    def vec(c: Chain) -> int:
        v = 0
        for term in c:
            if term not in idx:
                idx[term] = len(idx)
            v ^= 1 << idx[term]
        return v

    solver = F2Solver()
    for name, b in basis:
        gr = {M.grading_of(t)[0] for t in b}
        if len(gr) != 1:
            continue
        d = gr.pop() - grading
        if d < 0 or d % 2:
            continue
        e = d // 2
        cols.append((name, e))
        solver.add_column(vec(frozenset((g, i + e, j) for g, i, j in b)))
    x = solver.solve(vec(target))
    if x is None:
        return None
    return [cols[k] for k in range(len(cols)) if (x >> k) & 1]


def standard_model(H: HomologyDecomposition, class_names: Mapping[str, str],
                   source_names: Mapping[str, str], order: Sequence[str] | None = None) -> StandardModel:
    """The minimal model rewritten in a basis adapted to the chosen classes.

    Each chosen class h becomes a generator named ``class_names[h.label]``; a
    torsion class of order k gets a partner named ``source_names[h.label]``
    with ∂(partner) = U^k·h.  The ι and τ actions are transferred.
    """
    cert = H.cert
    M = cert.minimal
    gens: list[tuple[str, int]] = []
    basis: list[tuple[str, Chain]] = []
    diff: dict[str, list] = {}
    for h in H.generators:
        z = cert.project(h.rep)
        n = class_names[h.label]
        gens.append((n, h.grading))
        basis.append((n, z))
        if h.order is not None:
            uz = frozenset((g, i + h.order, j) for g, i, j in z)
            sol = _solve_in(M, uz, h.grading - 2 * h.order,
                            [(g, M.d(frozenset([(g, 0, 0)]))) for g in M.names])
            if sol is None:
                raise StructuralError(f"U^{h.order}{h.label} is not a boundary")
            w: set = set()
            for g, e in sol:
                toggle(w, (g, e, 0))
            sn = source_names[h.label]
            gens.append((sn, h.grading - 2 * h.order + 1))
            basis.append((sn, frozenset(w)))
            diff[sn] = [(n, h.order, 0)]
    if len(basis) != len(M):
        raise StructuralError("standard model has the wrong rank")
    if order is not None:
        rank = {n: k for k, n in enumerate(order)}
        gens.sort(key=lambda g: rank[g[0]])
    std = Complex.build(ONE_VAR, gens, diff, shift=H.complex.shift, label=f"std({H.complex.label})")
    to_M = GradedMap(std, M, dict(basis))
    # inverse of to_M on generators of M
    inv = {}
    for g in M.names:
        sol = _solve_in(M, frozenset([(g, 0, 0)]), M.gradings[g][0], basis)
        if sol is None:
            raise StructuralError("standard basis does not span the minimal model")
        inv[g] = frozenset((n, e, 0) for n, e in sol)
    from_M = GradedMap(M, std, inv)
    include = cert.include @ to_M
    project = from_M @ cert.project
    S = H.surgery
    names = dict(class_names)
    names.update({f"source of {k}": v for k, v in source_names.items()})
    return StandardModel(std, include, project @ S.iota @ include, project @ S.tau @ include, names)


# ---------------------------------------------------------------------------
# the cobordism W_{1,n}


@dataclass(frozen=True)
class CobordismData:
    n: int
    intersection_matrix: tuple[tuple[int, ...], ...]
    shift: Fraction
    spin_even: bool
    definite: bool
    leading_minors: tuple[int, ...] = ()

    @property
    def signature(self) -> int:
        return -(self.n - 1) if self.definite else 0

    @property
    def euler_characteristic(self) -> int:
        return self.n - 1


def cobordism_shift(n: int) -> Fraction:
    """(2σ + 3χ)/4 with σ = -(n-1), χ = n-1."""
    if n < 1:
        raise ValueError("n must be positive")
    if n % 2 == 0:
        warnings.warn(f"n = {n} is even; the spin structure argument needs n odd", stacklevel=2)
    sigma, chi = -(n - 1), n - 1
    return Fraction(2 * sigma + 3 * chi, 4)


def intersection_form_W1n(n: int) -> CobordismData:
    if n < 2:
        raise ValueError("W_{1,n} has a nonempty intersection form only for n >= 2")
    k = n - 1
    Q = tuple(tuple(-2 if r == c else -1 for c in range(k)) for r in range(k))
    minors = integer_leading_minors(Q)
    definite = all((-1) ** (r + 1) * m > 0 for r, m in enumerate(minors))
    even = all(Q[r][r] % 2 == 0 for r in range(k))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        shift = cobordism_shift(n)
    return CobordismData(n, Q, shift, even, definite, tuple(minors))


__all__ = [
    "CobordismData", "cobordism_shift", "intersection_form_W1n",
    "SurgeryComplex", "trivial_surgery", "extract_A0", "v_one", "split_minimal", "Splitting",
    "HomologyGenerator", "HomologyDecomposition", "homology_FU", "ActionRow", "induced_action_table",
    "InvariantClass", "invariant_subspace", "ObstructionVerdict", "obstruct_equivariant_ball",
    "OBSTRUCTED", "INCONCLUSIVE", "LocalityReport", "verify_local", "find_local_map_to_trivial",
    "connected_sum_surgery", "dual_surgery", "dual_local_map", "coevaluation", "StandardModel",
    "standard_model", "absolute_shift", "tower_map_nonzero", "NormalizationError", "chain_label",
    "boundary_witness", "minimal_surgery",
]


def boundary_witness(C: Complex, target: Chain, grading: int) -> Chain | None:
    """A chain w with ∂w = target (target homogeneous of Maslov grading ``grading``)."""
    sol = _solve_in(C, target, grading, [(g, C.d(frozenset([(g, 0, 0)]))) for g in C.names])
    if sol is None:
        return None
    w: set = set()
    for g, e in sol:
        toggle(w, (g, e, 0))
    return frozenset(w)


def minimal_surgery(H: HomologyDecomposition) -> tuple[SurgeryComplex, GradedMap, GradedMap]:
    """The reduced complex with transferred ι, τ, plus include/project maps."""
    cert = H.cert
    S = H.surgery
    M = SurgeryComplex(cert.minimal, cert.transfer(S.iota), cert.transfer(S.tau))
    return M, cert.include, cert.project
