from __future__ import annotations

import random

import pytest

from cfkcable.complexes import (
    GradedMap,
    chain,
    homotopic,
    is_chain_map,
    is_isomorphic_by_names,
    validate_complex,
)
from cfkcable.equivariant import (
    REMARK32,
    IotaComplex,
    builtin,
    check_iota_relations,
    double,
    double_map,
    fig8,
    is_iota_local,
    phi,
    psi,
    reflect,
    sarkar,
    tau_exch,
    unknot,
)
from cfkcable.samples import BLOCKS, random_iota_complex, random_local_map
from cfkcable.surgery import extract_A0, homology_FU
from cfkcable.pipeline import fig8_named_classes


def gen(name):
    return chain(name)


# reflect


def test_reflect_unknot_is_unknot():
    R, sw = reflect(unknot())
    assert R.complex.gradings == {"x": (0, 0)}
    assert R.iota.image("x") == gen("x")


def test_reflect_fig8_swaps_gradings():
    R, _ = reflect(fig8())
    assert R.complex.gradings["b"] == (-1, 1)
    assert R.complex.gradings["c"] == (1, -1)
    assert validate_complex(R.complex).ok


def test_reflect_twice_is_fig8():
    C = fig8()
    RR, _ = reflect(reflect(C)[0])
    assert is_isomorphic_by_names(C.complex, RR.complex, {n: n for n in C.complex.names})


def test_reflected_iota_is_pushforward_of_sarkar_iota():
    C = fig8()
    R, _ = reflect(C)
    # (ς∘ι)(a) = ς(a + x) = a + d + x
    assert R.iota.image("a") == chain("a", "d", "x")
    assert check_iota_relations(R).ok


# Φ, Ψ, ς


def test_psi_fig8():
    P = psi(fig8().complex)
    assert P.image("a") == gen("c")
    assert P.image("b") == gen("d")
    assert not P.image("c") and not P.image("x") and not P.image("d")
    assert P.degree == (-1, 1) and P.is_homogeneous()


def test_phi_fig8():
    F = phi(fig8().complex)
    assert F.image("a") == gen("b")
    assert F.image("c") == gen("d")
    assert not F.image("b") and not F.image("x") and not F.image("d")
    assert F.degree == (1, -1) and F.is_homogeneous()


def test_phi_psi_are_chain_maps_on_fig8():
    K = fig8().complex
    assert is_chain_map(phi(K)) and is_chain_map(psi(K))


def test_sarkar_unknot_is_identity():
    K = unknot().complex
    assert sarkar(K).equals(GradedMap.identity(K))


def test_sarkar_fig8():
    K = fig8().complex
    S = sarkar(K)
    assert S.image("a") == chain("a", "d")
    for g in "xbcd":
        assert S.image(g) == gen(g)


def test_sarkar_is_homotopy_involution_on_fig8():
    K = fig8().complex
    S = sarkar(K)
    assert homotopic(S @ S, GradedMap.identity(K)) is not None


def test_psi_tensor_phi_on_double():
    D = double(fig8())
    K = fig8().complex
    R, _ = reflect(fig8())
    from cfkcable.complexes import tensor_maps

    M = tensor_maps(psi(K), phi(R.complex), D.complex, D.complex)
    assert M(chain("b|b")) == chain("d|d")
    for c in ["x|x", "x|d", "d|x", "d|d", "a|d", "d|a", "c|c"]:
        assert not M(chain(c)), c


def test_phi_leibniz_on_tensor():
    from cfkcable.complexes import tensor_complex, tensor_maps

    K = fig8().complex
    T = tensor_complex(K, K)
    rhs = (tensor_maps(phi(K), GradedMap.identity(K), T, T)
           + tensor_maps(GradedMap.identity(K), phi(K), T, T))
    assert phi(T).equals(rhs)
    rhs = (tensor_maps(psi(K), GradedMap.identity(K), T, T)
           + tensor_maps(GradedMap.identity(K), psi(K), T, T))
    assert psi(T).equals(rhs)


# τ_exch


def test_tau_exch_fig8():
    D = double(fig8())
    E = tau_exch(fig8().complex, D.complex)
    assert E.image("x|d") == gen("d|x")
    assert (E @ E).equals(GradedMap.identity(D.complex))
    assert is_chain_map(E)


# doubling


def test_double_unknot_is_trivial():
    D = double(unknot())
    assert D.complex.names == ("x|x",)
    assert D.iota.image("x|x") == gen("x|x")
    assert D.tau.image("x|x") == gen("x|x")


@pytest.fixture(scope="module")
def fig8_double_homology():
    D = double(fig8())
    S = extract_A0(D)
    return D, S, homology_FU(S, fig8_named_classes())


def _class_of(H, c):
    return H.class_expression(H.express(c, 0))


def test_double_fig8_iota_of_xx(fig8_double_homology):
    D, S, H = fig8_double_homology
    img = S.iota(chain("x|x"))
    assert _class_of(H, img) == _class_of(H, chain("x|x", "x|d", "d|x", "d|d"))
    assert H.class_expression(H.express(img, 0), lead="[x|x]") == "[x|x]+[x|d]+[d|x]+[d|d]"


def test_double_fig8_tau_of_fourth_class(fig8_double_homology):
    D, S, H = fig8_double_homology
    c = chain("a|d", "d|a", "b|b", "c|c")
    img = S.tau(c)
    assert (H.class_expression(H.express(img, 0), lead="[a|d+d|a+b|b+c|c]")
            == "[a|d+d|a+b|b+c|c]+[d|d]")


def test_double_maps_are_chain_maps():
    for conv in ("thm31", REMARK32):
        D = double(fig8(), conv)
        assert is_chain_map(D.iota) and is_chain_map(D.tau)
        assert validate_complex(D.complex).ok


def test_double_rejects_unknown_convention():
    with pytest.raises(ValueError):
        double(fig8(), "other")


def test_double_reports_unchecked_relation():
    rep = check_iota_relations(double(fig8()))
    assert rep.ok
    assert rep.unchecked and "not checked" in rep.unchecked[0]


# check_iota_relations, builtin


def test_relations_fig8_and_unknot():
    assert check_iota_relations(fig8()).ok
    assert check_iota_relations(unknot()).ok


def test_iota_squared_is_sarkar_on_a():
    C = fig8()
    assert (C.iota @ C.iota).image("a") == chain("a", "d")


def test_corrupted_iota_fails():
    C = fig8()
    imgs = dict(C.iota.images)
    imgs["x"] = gen("x")
    bad = IotaComplex(C.complex, GradedMap(C.complex, C.complex, imgs, True, (0, 0)))
    rep = check_iota_relations(bad)
    assert not rep.checks["iota_squared_homotopic_sarkar"]


def test_builtin():
    assert builtin("fig8").iota.image("a") == chain("a", "x")
    assert builtin("unknot").complex.names == ("x",)
    with pytest.raises(KeyError):
        builtin("trefoil")


def test_fig8_differential_oracle():
    """The three properties that pin down the built-in differential."""
    C = fig8()
    assert validate_complex(C.complex).ok
    assert is_chain_map(C.iota)
    assert homotopic(C.iota @ C.iota, sarkar(C.complex)) is not None
    D = double(C)
    for _, c in fig8_named_classes():
        assert not D.complex.d(c)


def test_samples_blocks_are_valid():
    for name, f in BLOCKS.items():
        C = f()
        assert validate_complex(C.complex).ok, name
        assert check_iota_relations(C).ok, name


# properties over random ι-complexes


def test_random_doubles_valid():
    rng = random.Random(7)
    for _ in range(200):
        s = random_iota_complex(rng, 6)
        assert validate_complex(s.complex.complex).ok
        assert check_iota_relations(s.complex).ok
        D = double(s.complex)
        assert validate_complex(D.complex).ok
        assert is_chain_map(D.iota) and is_chain_map(D.tau)
        rep = check_iota_relations(D)
        assert rep.ok, (s.blocks, rep.checks)
        assert rep.certificates["iota_squared_homotopic_sarkar"] is not None


def test_doubling_functorial_on_local_maps():
    rng = random.Random(11)
    for k in range(200):
        src, tgt, f = random_local_map(rng)
        assert is_chain_map(f)
        D1, D2 = double(src), double(tgt)
        F = double_map(f, src, tgt, D1, D2)
        assert is_chain_map(F)
        E1 = tau_exch(src.complex, D1.complex)
        E2 = tau_exch(tgt.complex, D2.complex)
        assert (E2 @ F).equals(F @ E1)
        if k < 25:
            loc = is_iota_local(f, src, tgt)
            assert all(loc.values()), loc
            assert homotopic(F @ D1.tau, D2.tau @ F) is not None
            assert homotopic(F @ D1.iota, D2.iota @ F) is not None
