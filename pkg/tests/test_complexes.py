from __future__ import annotations

import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cfkcable.algebra import ONE_VAR, TWO_VAR, ModeMismatch
from cfkcable.complexes import (
    Complex,
    GradedMap,
    StructuralError,
    chain,
    differential_map,
    dual_name,
    dualize,
    homotopic,
    homotopy_residual,
    is_chain_map,
    is_isomorphic_by_names,
    reduce,
    tensor_complex,
    trivial_complex,
    validate_complex,
)
from cfkcable.equivariant import fig8, reflect_complex
from cfkcable.samples import random_iota_complex


def two_step(mode=ONE_VAR):
    if mode == ONE_VAR:
        return Complex.build(ONE_VAR, [("a", 1), ("b", 2)], {"a": [("b", 1, 0)]})
    return Complex.build(TWO_VAR, [("a", 0, 0), ("b", 1, -1)], {"a": [("b", 1, 0)]})


# validate_complex


def test_trivial_is_valid():
    assert validate_complex(trivial_complex()).ok


def test_fig8_is_valid():
    assert validate_complex(fig8().complex).ok


def test_fig8_with_bad_entry_reports_pair():
    K = fig8().complex
    diff = dict(K.diff)
    diff["a"] = diff["a"] | {("d", 0, 0)}
    bad = Complex(K.mode, K.names, K.gradings, diff)
    rep = validate_complex(bad)
    assert not rep.ok
    assert ("a", "d") in rep.inhomogeneous


def test_d_squared_reported():
    C = Complex.build(ONE_VAR, [("a", 2), ("b", 1), ("c", 0)], {"a": ["b"], "b": ["c"]})
    rep = validate_complex(C)
    assert rep.d_squared == [("a", "c")]


def test_half_integral_alexander_reported():
    C = Complex.build(TWO_VAR, [("a", 1, 0)])
    assert validate_complex(C).bad_alexander == ["a"]


def test_unknown_reference_is_structural():
    with pytest.raises(StructuralError):
        Complex.build(ONE_VAR, [("a", 0)], {"a": [("q", 1, 0)]})


# tensor_complex


def test_trivial_is_tensor_unit():
    K = fig8().complex
    T = tensor_complex(trivial_complex(), K)
    mapping = {f"1|{g}": g for g in K.names}
    assert is_isomorphic_by_names(T, K, mapping)


def test_fig8_tensor_reflection_has_25_generators():
    K = fig8().complex
    T = tensor_complex(K, reflect_complex(K))
    assert len(T) == 25
    assert validate_complex(T).ok
    assert T.gradings["b|b"] == (0, 0)
    assert T.gradings["b|c"] == (2, -2)


def test_leibniz_rule_by_hand():
    C = two_step(TWO_VAR)
    T = tensor_complex(C, C)
    assert len(T) == 4
    assert T.diff["a|a"] == chain(("b|a", 1, 0), ("a|b", 1, 0))


def test_tensor_mode_mismatch():
    with pytest.raises(ModeMismatch):
        tensor_complex(trivial_complex(ONE_VAR), trivial_complex(TWO_VAR))


def test_tensor_preserves_validity_randomized():
    rng = random.Random(7)
    for _ in range(1000):
        A = random_iota_complex(rng, 6).complex.complex
        B = random_iota_complex(rng, 3).complex.complex
        assert validate_complex(tensor_complex(A, B)).ok


# dualize


def test_dual_of_trivial():
    D, _ = dualize(trivial_complex(ONE_VAR))
    assert D.names == ("1*",)
    assert D.gradings["1*"] == (0, 0) and not D.diff["1*"]


def test_dual_of_two_step():
    D, _ = dualize(two_step())
    assert D.diff["b*"] == chain(("a*", 1, 0))
    assert D.gradings["a*"] == (-1, -1) and D.gradings["b*"] == (-2, -2)
    assert validate_complex(D).ok


def test_double_dual_is_canonical():
    K = fig8().complex
    DD, _ = dualize(dualize(K)[0])
    assert DD.names == K.names
    assert is_isomorphic_by_names(DD, K, {g: g for g in K.names})
    assert dual_name(dual_name("x")) == "x"


def test_dual_shift_is_negated():
    C = trivial_complex(ONE_VAR).with_shift("1/4")
    assert dualize(C)[0].shift == -C.shift


# reduce


def _check_certificate(cert):
    C, M = cert.original, cert.minimal
    assert is_chain_map(cert.include) and is_chain_map(cert.project)
    assert (cert.project @ cert.include).equals(GradedMap.identity(M))
    d = differential_map(C)
    lhs = GradedMap.identity(C) + cert.include @ cert.project
    rhs = (d @ cert.homotopy) + (cert.homotopy @ d)
    assert lhs.equals(rhs)
    assert all(i or j for g in M.names for _, i, j in M.diff[g])


def test_reduce_minimal_is_identity():
    C = two_step()
    cert, _ = reduce(C)
    assert cert.minimal.names == C.names
    assert cert.include.equals(GradedMap.identity(C))
    _check_certificate(cert)


def test_reduce_acyclic_pair():
    C = Complex.build(ONE_VAR, [("a", 1), ("b", 0)], {"a": ["b"]})
    cert, _ = reduce(C)
    assert len(cert.minimal) == 0
    _check_certificate(cert)


def test_reduce_double_fig8_A0():
    from cfkcable.equivariant import double
    from cfkcable.surgery import extract_A0

    S = extract_A0(double(fig8()))
    cert, (i, t) = reduce(S.complex, [S.iota, S.tau])
    assert len(cert.minimal) == 9
    powers = sorted(i for g in cert.minimal.names for _, i, _ in cert.minimal.diff[g])
    assert powers == [1, 1, 1, 1]
    _check_certificate(cert)
    assert is_chain_map(i) and is_chain_map(t)


def test_reduce_random_certificates():
    rng = random.Random(3)
    for _ in range(60):
        A = random_iota_complex(rng).complex
        cert, (iota_m,) = reduce(A.complex, [A.iota])
        _check_certificate(cert)
        assert is_chain_map(iota_m)
        back = cert.include @ iota_m @ cert.project
        assert homotopic(back, A.iota) is not None


# chain maps and homotopies


def test_identity_and_iota_are_chain_maps():
    C = fig8()
    assert is_chain_map(GradedMap.identity(C.complex))
    assert is_chain_map(C.iota)


def test_a_to_x_is_a_chain_map():
    # f(∂a) = f(Ub + Vc) = 0 = ∂x, so this one does commute with ∂
    K = fig8().complex
    assert is_chain_map(GradedMap.build(K, K, {"a": ["x"]}))


def test_d_to_x_is_not_a_chain_map():
    K = fig8().complex
    assert not is_chain_map(GradedMap.build(K, K, {"d": ["x"]}))


def test_homotopic_equal_maps_gives_zero():
    K = fig8().complex
    I = GradedMap.identity(K)
    H = homotopic(I, I)
    assert H is not None and H.is_zero()


def test_iota_squared_vs_sarkar_certified():
    from cfkcable.equivariant import sarkar

    C = fig8()
    f, g = C.iota @ C.iota, sarkar(C.complex)
    H = homotopic(f, g)
    assert H is not None
    assert homotopy_residual(f, g, H).is_zero()


def test_trivial_identity_not_homotopic_to_zero():
    T = trivial_complex(ONE_VAR)
    assert homotopic(GradedMap.identity(T), GradedMap.zero(T, T)) is None


def test_skew_composition_modes():
    C = fig8()
    assert (C.iota @ C.iota).skew is False
    assert (C.iota @ GradedMap.identity(C.complex)).skew is True


@given(st.integers(0, 10_000))
def test_homotopic_symmetric_and_certified(seed):
    rng = random.Random(seed)
    from cfkcable.samples import perturb_iota

    A = random_iota_complex(rng).complex
    B = perturb_iota(A, rng)
    H1 = homotopic(A.iota, B.iota)
    H2 = homotopic(B.iota, A.iota)
    assert H1 is not None and H2 is not None
    assert homotopy_residual(A.iota, B.iota, H1).is_zero()
    assert homotopic(A.iota, A.iota).is_zero()
