"""Exact arithmetic over F2, F2[U,V] and F2[U].

Coefficients are implicit: a polynomial is the set of monomials that occur
with coefficient 1, so addition is symmetric difference.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

TWO_VAR = "UV"
ONE_VAR = "U"


class ModeMismatch(ValueError):
    pass


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Monomial:
    u_power: int = 0
    v_power: int = 0

    def __post_init__(self):
        if self.u_power < 0 or self.v_power < 0:
            raise ValueError(f"negative exponent in {self!r}")

    def __mul__(self, other: "Monomial") -> "Monomial":
        return Monomial(self.u_power + other.u_power, self.v_power + other.v_power)

    def bidegree(self) -> tuple[int, int]:
        return (-2 * self.u_power, -2 * self.v_power)

    def is_unit(self) -> bool:
        return self.u_power == 0 and self.v_power == 0

    def __str__(self) -> str:
        return monomial_str(self.u_power, self.v_power)


def monomial_str(i: int, j: int) -> str:
    parts = []
    for sym, p in (("U", i), ("V", j)):
        if p == 1:
            parts.append(sym)
        elif p > 1:
            parts.append(f"{sym}^{p}")
    return "".join(parts) or "1"


@dataclass(frozen=True)
class Poly:
    """Element of F2[U,V] (mode ``"UV"``) or F2[U] (mode ``"U"``)."""

    terms: frozenset = field(default_factory=frozenset)
    mode: str = TWO_VAR

    def __post_init__(self):
        if self.mode not in (TWO_VAR, ONE_VAR):
            raise ValueError(f"unknown ring mode {self.mode!r}")
        if self.mode == ONE_VAR and any(m.v_power for m in self.terms):
            raise ValueError("V appears in a one-variable polynomial")

    @classmethod
    def monomial(cls, i: int = 0, j: int = 0, mode: str = TWO_VAR) -> "Poly":
        return cls(frozenset([Monomial(i, j)]), mode)

    @classmethod
    def zero(cls, mode: str = TWO_VAR) -> "Poly":
        return cls(frozenset(), mode)

    def _check(self, other: "Poly") -> None:
        if self.mode != other.mode:
            raise ModeMismatch(f"cannot combine F2[{self.mode}] with F2[{other.mode}]")

    def __add__(self, other: "Poly") -> "Poly":
        self._check(other)
        return Poly(self.terms ^ other.terms, self.mode)

    __sub__ = __add__

    def __mul__(self, other: "Poly") -> "Poly":
        self._check(other)
        out: set = set()
        for a in self.terms:
            for b in other.terms:
                out ^= {a * b}
        return Poly(frozenset(out), self.mode)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def single(self) -> Monomial:
        if len(self.terms) != 1:
            raise PreconditionError(f"{self} is not a single monomial")
        return next(iter(self.terms))

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return "+".join(str(m) for m in sorted(self.terms))


def poly_arith(op: str, p: Poly, q: Poly) -> Poly:
    if op == "add":
        return p + q
    if op == "mul":
        return p * q
    raise ValueError(f"unknown operation {op!r}")


# ---------------------------------------------------------------------------
# F2 linear algebra on Python int bitsets


class F2Solver:
    """Incremental column elimination for A x = b over F2.

    Columns are added one at a time as int bitsets (bit r = row r).  Each
    column that reduces to zero contributes a kernel vector.  Unknown k is
    bit k of the returned solution ints.
    """

    def __init__(self) -> None:
        self._pivots: dict[int, tuple[int, int]] = {}
        self.kernel: list[int] = []
        self.ncols = 0

    def _reduce(self, v: int, comb: int) -> tuple[int, int]:
        pivots = self._pivots
        while v:
            top = v.bit_length() - 1
            p = pivots.get(top)
            if p is None:
                break
            v ^= p[0]
            comb ^= p[1]
        return v, comb

    def add_column(self, col: int) -> None:
        k = self.ncols
        self.ncols += 1
        v, comb = self._reduce(col, 1 << k)
        if v:
            self._pivots[v.bit_length() - 1] = (v, comb)
        else:
            self.kernel.append(comb)

    def solve(self, rhs: int) -> int | None:
        v, comb = self._reduce(rhs, 0)
        return None if v else comb

    @property
    def rank(self) -> int:
        return len(self._pivots)


@dataclass(frozen=True)
class F2Solution:
    x: tuple[int, ...] | None
    kernel: tuple[tuple[int, ...], ...]


def _bits_to_vec(bits: int, n: int) -> tuple[int, ...]:
    return tuple((bits >> k) & 1 for k in range(n))


def f2_solve(A: Sequence[Sequence[int]], b: Sequence[int], ncols: int | None = None) -> F2Solution:
    """Solve ``A x = b`` over F2; ``x`` is None when the system is inconsistent.

    The kernel basis is always returned.  Deterministic for a fixed input
    ordering.
    """
    nrows = len(A)
    if ncols is None:
        ncols = len(A[0]) if nrows else 0
    if len(b) != nrows:
        raise ValueError("right-hand side length does not match the row count")
    solver = F2Solver()
    for c in range(ncols):
        col = 0
        for r in range(nrows):
            if A[r][c] & 1:
                col |= 1 << r
        solver.add_column(col)
    rhs = 0
    for r, bit in enumerate(b):
        if bit & 1:
            rhs |= 1 << r
    x = solver.solve(rhs)
    return F2Solution(
        None if x is None else _bits_to_vec(x, ncols),
        tuple(_bits_to_vec(k, ncols) for k in solver.kernel),
    )


def f2_matvec(A: Sequence[Sequence[int]], x: Sequence[int]) -> tuple[int, ...]:
    return tuple(sum(a & xi for a, xi in zip(row, x)) % 2 for row in A)


# ---------------------------------------------------------------------------
# Matrices over F2[U]


class MonomialMatrix:
    """Sparse matrix with polynomial entries; absent entries are zero."""

    def __init__(self, nrows: int, ncols: int, entries: Mapping[tuple[int, int], Poly] | None = None,
                 mode: str = ONE_VAR):
        self.nrows = nrows
        self.ncols = ncols
        self.mode = mode
        self._e: dict[tuple[int, int], Poly] = {}
        for (r, c), p in (entries or {}).items():
            if not (0 <= r < nrows and 0 <= c < ncols):
                raise IndexError((r, c))
            if p.mode != mode:
                raise ModeMismatch("entry ring does not match matrix ring")
            if p:
                self._e[(r, c)] = p

    @classmethod
    def identity(cls, n: int, mode: str = ONE_VAR) -> "MonomialMatrix":
        one = Poly.monomial(0, 0, mode)
        return cls(n, n, {(i, i): one for i in range(n)}, mode)

    @classmethod
    def from_powers(cls, rows: Sequence[Sequence[int | None]]) -> "MonomialMatrix":
        """Build from a dense table of U-exponents (None for zero)."""
        nrows = len(rows)
        ncols = len(rows[0]) if nrows else 0
        ent = {(r, c): Poly.monomial(k, 0, ONE_VAR)
               for r, row in enumerate(rows) for c, k in enumerate(row) if k is not None}
        return cls(nrows, ncols, ent)

    def __getitem__(self, rc: tuple[int, int]) -> Poly:
        return self._e.get(rc, Poly.zero(self.mode))

    def entries(self) -> dict[tuple[int, int], Poly]:
        return dict(self._e)

    def __matmul__(self, other: "MonomialMatrix") -> "MonomialMatrix":
        if self.ncols != other.nrows:
            raise ValueError("shape mismatch")
        rows: dict[int, list] = {}
        for (r, k), p in self._e.items():
            rows.setdefault(k, []).append((r, p))
        out: dict[tuple[int, int], Poly] = {}
        for (k, c), q in other._e.items():
            for r, p in rows.get(k, ()):
                out[(r, c)] = out.get((r, c), Poly.zero(self.mode)) + p * q
        return MonomialMatrix(self.nrows, other.ncols, out, self.mode)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MonomialMatrix):
            return NotImplemented
        return (self.nrows, self.ncols, self._e) == (other.nrows, other.ncols, other._e)

    def __repr__(self) -> str:
        cells = ", ".join(f"{rc}: {p}" for rc, p in sorted(self._e.items()))
        return f"MonomialMatrix({self.nrows}x{self.ncols}, {{{cells}}})"


@dataclass
class SmithForm:
    diagonal: list[int]              # U-exponents k_1 <= k_2 <= ...
    row_transform: MonomialMatrix    # R, with R A Q = D
    col_transform: MonomialMatrix    # Q
    row_inverse: MonomialMatrix
    col_inverse: MonomialMatrix
    D: MonomialMatrix


def snf_over_FU(A: MonomialMatrix, row_gradings: Sequence[int] | None = None,
                col_gradings: Sequence[int] | None = None, degree: int = -1) -> SmithForm:
    """Smith normal form of a reduced matrix over F2[U].

    Every entry must be 0 or U^k with k >= 1.  When gradings are supplied,
    entry (r, c) = U^k must satisfy ``row_gr[r] - 2k == col_gr[c] + degree``.
    Pivot rule: lowest U-power first, ties by smallest (row, col).
    """
    if A.mode != ONE_VAR:
        raise ModeMismatch("snf_over_FU needs an F2[U] matrix")
    for (r, c), p in A.entries().items():
        if not p.is_monomial():
            raise PreconditionError(f"entry {(r, c)} = {p} is not a monomial")
        k = p.single().u_power
        if k == 0:
            raise PreconditionError(f"entry {(r, c)} is a unit; reduce the complex first")
        if row_gradings is not None and col_gradings is not None:
            if row_gradings[r] - 2 * k != col_gradings[c] + degree:
                raise PreconditionError(f"entry {(r, c)} is not homogeneous")

    m, n = A.nrows, A.ncols
    zero = Poly.zero(ONE_VAR)

    def eye(size: int) -> list[list[Poly]]:
        return [[Poly.monomial(0, 0, ONE_VAR) if i == j else zero for j in range(size)]
                for i in range(size)]

    W = [[A[r, c] for c in range(n)] for r in range(m)]
    R, Rinv, Q, Qinv = eye(m), eye(m), eye(n), eye(n)
    used_r: set[int] = set()
    used_c: set[int] = set()
    pivots: list[tuple[int, int, int]] = []
    while True:
        best = None
        for r in range(m):
            if r in used_r:
                continue
            for c in range(n):
                if c not in used_c and W[r][c]:
                    key = (W[r][c].single().u_power, r, c)
                    if best is None or key < best:
                        best = key
        if best is None:
            break
        k, pr, pc = best
        for r in range(m):
            if r == pr or not W[r][pc]:
                continue
            coeff = Poly.monomial(W[r][pc].single().u_power - k, 0, ONE_VAR)
            # row r += coeff * row pr
            W[r] = [a + coeff * b for a, b in zip(W[r], W[pr])]
            R[r] = [a + coeff * b for a, b in zip(R[r], R[pr])]
            for i in range(m):
                Rinv[i][pr] = Rinv[i][pr] + coeff * Rinv[i][r]
        for c in range(n):
            if c == pc or not W[pr][c]:
                continue
            coeff = Poly.monomial(W[pr][c].single().u_power - k, 0, ONE_VAR)
            # column c += coeff * column pc
            for i in range(m):
                W[i][c] = W[i][c] + coeff * W[i][pc]
            for i in range(n):
                Q[i][c] = Q[i][c] + coeff * Q[i][pc]
            Qinv[pc] = [a + coeff * b for a, b in zip(Qinv[pc], Qinv[c])]
        used_r.add(pr)
        used_c.add(pc)
        pivots.append((k, pr, pc))

    # permute so the pivots sit on the diagonal in pivot order
    row_order = [pr for _, pr, _ in pivots] + [r for r in range(m) if r not in used_r]
    col_order = [pc for _, _, pc in pivots] + [c for c in range(n) if c not in used_c]

    def sparse(rows: list[list[Poly]], nr: int, nc: int) -> MonomialMatrix:
        return MonomialMatrix(nr, nc, {(i, j): p for i, row in enumerate(rows)
                                       for j, p in enumerate(row) if p})

    R_out = sparse([R[r] for r in row_order], m, m)
    Rinv_out = sparse([[row[r] for r in row_order] for row in Rinv], m, m)
    Q_out = sparse([[row[c] for c in col_order] for row in Q], n, n)
    Qinv_out = sparse([Qinv[c] for c in col_order], n, n)
    diag = [k for k, _, _ in pivots]
    D = MonomialMatrix(m, n, {(i, i): Poly.monomial(k, 0, ONE_VAR) for i, k in enumerate(diag)})
    return SmithForm(diag, R_out, Q_out, Rinv_out, Qinv_out, D)


def integer_leading_minors(M: Sequence[Sequence[int]]) -> list[int]:
    """Leading principal minors by fraction-free (Bareiss) elimination."""
    n = len(M)
    a = [list(row) for row in M]
    minors = []
    prev = 1
    for k in range(n):
        if a[k][k] == 0:
            # leading minor is zero; fall back to a direct determinant for the rest
            minors.extend(_det([row[: i + 1] for row in M[: i + 1]]) for i in range(k, n))
            return minors
        minors.append(a[k][k])
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return minors


def _det(M: Sequence[Sequence[int]]) -> int:
    from fractions import Fraction

    n = len(M)
    a = [[Fraction(x) for x in row] for row in M]
    det = Fraction(1)
    for k in range(n):
        piv = next((i for i in range(k, n) if a[i][k] != 0), None)
        if piv is None:
            return 0
        if piv != k:
            a[k], a[piv] = a[piv], a[k]
            det = -det
        det *= a[k][k]
        for i in range(k + 1, n):
            f = a[i][k] / a[k][k]
            for j in range(k, n):
                a[i][j] -= f * a[k][j]
    return int(det)


__all__ = [
    "TWO_VAR", "ONE_VAR", "ModeMismatch", "PreconditionError", "Monomial", "Poly",
    "poly_arith", "F2Solver", "F2Solution", "f2_solve", "f2_matvec", "MonomialMatrix",
    "SmithForm", "snf_over_FU", "integer_leading_minors", "monomial_str",
]
