from __future__ import annotations

import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cfkcable.algebra import (
    ONE_VAR,
    TWO_VAR,
    ModeMismatch,
    Monomial,
    MonomialMatrix,
    Poly,
    PreconditionError,
    f2_matvec,
    f2_solve,
    integer_leading_minors,
    poly_arith,
    snf_over_FU,
)


def P(*monos, mode=TWO_VAR):
    return Poly(frozenset(Monomial(i, j) for i, j in monos), mode)


ONE = (0, 0)
U = (1, 0)
V = (0, 1)
UV = (1, 1)


def test_add_U_U_is_zero():
    assert poly_arith("add", P(U), P(U)) == P()


def test_mul_U_V_is_UV():
    assert poly_arith("mul", P(U), P(V)) == P(UV)


def test_add_one_plus_UV_and_UV():
    assert poly_arith("add", P(ONE, UV), P(UV)) == P(ONE)


def test_mixed_modes_rejected():
    with pytest.raises(ModeMismatch):
        poly_arith("add", P(U), P(U, mode=ONE_VAR))


def test_monomial_bidegree():
    assert Monomial(2, 1).bidegree() == (-4, -2)
    with pytest.raises(ValueError):
        Monomial(-1, 0)


# naive term-count oracle on all polynomials of total degree <= 3 supported on a few monomials
SMALL = [(i, j) for i in range(3) for j in range(3) if i + j <= 3]


def _naive_mul(p, q):
    counts = {}
    for a in p:
        for b in q:
            m = (a[0] + b[0], a[1] + b[1])
            counts[m] = counts.get(m, 0) + 1
    return {m for m, c in counts.items() if c % 2}


polys = st.sets(st.sampled_from(SMALL), max_size=4)


@given(polys, polys)
def test_mul_matches_naive_oracle(p, q):
    got = P(*p) * P(*q)
    assert {(m.u_power, m.v_power) for m in got.terms} == _naive_mul(p, q)


@given(polys)
def test_p_plus_p_is_zero(p):
    assert P(*p) + P(*p) == P()


@given(polys, polys, polys)
def test_mul_commutative_associative(p, q, r):
    a, b, c = P(*p), P(*q), P(*r)
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)


def test_exhaustive_degree_small_addition():
    # every pair of subsets of {1, U, V} behaves as symmetric difference
    base = [ONE, U, V]
    subsets = [s for k in range(4) for s in itertools.combinations(base, k)]
    for s1 in subsets:
        for s2 in subsets:
            got = P(*s1) + P(*s2)
            assert {(m.u_power, m.v_power) for m in got.terms} == set(s1) ^ set(s2)


# f2_solve


def test_identity_system():
    I3 = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    assert f2_solve(I3, [1, 0, 1]).x == (1, 0, 1)


def test_parity_kernel():
    assert f2_solve([[1, 1]], [0]).kernel == ((1, 1),)


def test_id_plus_iota_kernel_dimension():
    # id + ι on the grading-0 homology of the doubled figure-eight
    M = [[0, 0, 0, 0, 0], [1, 0, 0, 1, 0], [1, 0, 0, 1, 0], [0, 0, 0, 0, 0], [1, 1, 1, 0, 0]]
    assert len(f2_solve(M, [0] * 5).kernel) == 3


def test_inconsistent_is_none():
    assert f2_solve([[1, 1], [1, 1]], [1, 0]).x is None


matrices = st.integers(1, 5).flatmap(
    lambda r: st.integers(1, 5).flatmap(
        lambda c: st.tuples(st.lists(st.lists(st.integers(0, 1), min_size=c, max_size=c), min_size=r, max_size=r),
                            st.lists(st.integers(0, 1), min_size=r, max_size=r))))


@given(matrices)
def test_f2_solutions_recompute(data):
    A, b = data
    sol = f2_solve(A, b)
    if sol.x is not None:
        assert list(f2_matvec(A, sol.x)) == b
    for v in sol.kernel:
        assert not any(f2_matvec(A, v))
    # rank-nullity
    rank = len(A[0]) - len(sol.kernel)
    assert 0 <= rank <= min(len(A), len(A[0]))


# Smith normal form


def _check_snf(A):
    S = snf_over_FU(A)
    assert S.row_transform @ A @ S.col_transform == S.D
    I_r = MonomialMatrix.identity(A.nrows)
    I_c = MonomialMatrix.identity(A.ncols)
    assert S.row_transform @ S.row_inverse == I_r
    assert S.row_inverse @ S.row_transform == I_r
    assert S.col_transform @ S.col_inverse == I_c
    assert S.col_inverse @ S.col_transform == I_c
    assert S.diagonal == sorted(S.diagonal)
    return S


def test_snf_already_diagonal():
    A = MonomialMatrix.from_powers([[1]])
    S = _check_snf(A)
    assert S.diagonal == [1]
    assert S.row_transform == MonomialMatrix.identity(1)
    assert S.col_transform == MonomialMatrix.identity(1)


def test_snf_row_U_U():
    A = MonomialMatrix.from_powers([[1, 1]])
    S = _check_snf(A)
    assert S.diagonal == [1]
    assert S.col_transform == MonomialMatrix.from_powers([[0, 0], [None, 0]])


def test_snf_mixed_powers():
    A = MonomialMatrix.from_powers([[1, 2, None], [None, 1, 3], [None, None, None]])
    S = _check_snf(A)
    assert S.diagonal == [1, 1]


def test_snf_rejects_units_and_sums():
    with pytest.raises(PreconditionError):
        snf_over_FU(MonomialMatrix.from_powers([[0]]))
    two = Poly(frozenset([Monomial(1, 0), Monomial(2, 0)]), ONE_VAR)
    with pytest.raises(PreconditionError):
        snf_over_FU(MonomialMatrix(1, 1, {(0, 0): two}))


def test_snf_inhomogeneous_rejected():
    A = MonomialMatrix.from_powers([[1, 2]])
    with pytest.raises(PreconditionError):
        snf_over_FU(A, row_gradings=[0], col_gradings=[1, 1])


homogeneous = st.tuples(
    st.lists(st.integers(2, 4), min_size=1, max_size=4),   # row gradings / 2
    st.lists(st.integers(0, 1), min_size=1, max_size=4),   # column gradings (2b + 1)
).flatmap(lambda g: st.tuples(st.just(g), st.lists(st.booleans(), min_size=len(g[0]) * len(g[1]),
                                                   max_size=len(g[0]) * len(g[1]))))


@given(homogeneous)
def test_snf_transforms_multiply_back(data):
    (rows, cols), mask = data
    table = [[(a - b) if mask[r * len(cols) + c] else None for c, b in enumerate(cols)]
             for r, a in enumerate(rows)]
    A = MonomialMatrix.from_powers(table)
    S = _check_snf(A)
    snf_over_FU(A, [2 * a for a in rows], [2 * b + 1 for b in cols])
    # the number of nonzero invariant factors is the rank over F2(U)
    assert len(S.diagonal) <= min(len(rows), len(cols))


def test_leading_minors_negative_definite():
    Q = [[-2, -1, -1], [-1, -2, -1], [-1, -1, -2]]
    assert integer_leading_minors(Q) == [-2, 3, -4]
    assert integer_leading_minors([[0, 1], [1, 0]]) == [0, -1]
