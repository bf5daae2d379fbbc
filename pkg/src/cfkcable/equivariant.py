"""Knot-level symmetries: reflection, formal derivatives, Sarkar map, doubling."""

from __future__ import annotations

from dataclasses import dataclass, field

from .algebra import ONE_VAR, TWO_VAR
from .complexes import (
    Complex,
    GradedMap,
    StructuralError,
    differential_map,
    homotopic,
    is_chain_map,
    pair_name,
    tensor_complex,
    tensor_maps,
    validate_complex,
)

THM31 = "thm31"
REMARK32 = "remark32"
CONVENTIONS = (THM31, REMARK32)


@dataclass(frozen=True, eq=False)
class IotaComplex:
    complex: Complex
    iota: GradedMap


@dataclass(frozen=True, eq=False)
class IotaTauComplex:
    complex: Complex
    iota: GradedMap
    tau: GradedMap
    notes: tuple[str, ...] = field(default=())


def _swap_powers(c):
    return frozenset((g, j, i) for g, i, j in c)


def reflect(C: IotaComplex) -> tuple[IotaComplex, GradedMap]:
    """Reflect across the diagonal: swap gr_U/gr_V and 𝒰/𝒱.

    Returns the reflected ι-complex, whose involution is the pushforward of
    ς∘ι, together with the skew switch isomorphism C -> C^r.
    """
    K = C.complex
    if K.mode != TWO_VAR:
        raise StructuralError("reflection needs a complex over F2[U,V]")
    R = Complex(K.mode, K.names, {n: (gv, gu) for n, (gu, gv) in K.gradings.items()},
                {n: _swap_powers(K.diff[n]) for n in K.names}, K.shift, f"({K.label})^r")
    ident = {n: frozenset([(n, 0, 0)]) for n in K.names}
    sw = GradedMap(K, R, ident, skew=True, degree=(0, 0))
    sw_inv = GradedMap(R, K, ident, skew=True, degree=(0, 0))
    iota_r = sw @ (sarkar(K) @ C.iota) @ sw_inv
    return IotaComplex(R, iota_r), sw


def _derivative(K: Complex, var: int) -> GradedMap:
    imgs = {}
    for s in K.names:
        acc = set()
        for t, i, j in K.diff[s]:
            p = (i, j)[var]
            if p % 2:
                acc ^= {(t, i - 1, j) if var == 0 else (t, i, j - 1)}
        imgs[s] = frozenset(acc)
    degree = (1, -1) if var == 0 else (-1, 1)
    return GradedMap(K, K, imgs, False, degree)


def phi(K: Complex) -> GradedMap:
    """Formal derivative of ∂ with respect to 𝒰; bidegree (1, -1)."""
    if K.mode != TWO_VAR:
        raise StructuralError("Φ is defined over F2[U,V]")
    return _derivative(K, 0)


def psi(K: Complex) -> GradedMap:
    """Formal derivative of ∂ with respect to 𝒱; bidegree (-1, 1)."""
    if K.mode != TWO_VAR:
        raise StructuralError("Ψ is defined over F2[U,V]")
    return _derivative(K, 1)


def sarkar(K: Complex) -> GradedMap:
    """The chain-level Sarkar map, taken to be id + Φ∘Ψ."""
    return (GradedMap.identity(K) + phi(K) @ psi(K)).with_degree((0, 0))


def tau_exch(K: Complex, T: Complex | None = None) -> GradedMap:
    """p|q -> q|p on K ⊗ K^r, skew."""
    T = T or tensor_complex(K, reflect_complex(K))
    imgs = {pair_name(p, q): frozenset([(pair_name(q, p), 0, 0)]) for p in K.names for q in K.names}
    return GradedMap(T, T, imgs, skew=True, degree=(0, 0))


def reflect_complex(K: Complex) -> Complex:
    return Complex(K.mode, K.names, {n: (gv, gu) for n, (gu, gv) in K.gradings.items()},
                   {n: _swap_powers(K.diff[n]) for n in K.names}, K.shift, f"({K.label})^r")


def double(C: IotaComplex, convention: str = THM31) -> IotaTauComplex:
    """The doubling (C ⊗ C^r, τ_⊗, ι_⊗).

    ``thm31``:   τ = (id + Ψ⊗Φ) τ_exch,      ι = ς_⊗ (id + Ψ⊗Φ)(ι ⊗ ι^r)
    ``remark32``: τ = ς_⊗ (id + Ψ⊗Φ) τ_exch,  ι = (id + Ψ⊗Φ)(ι ⊗ ι^r)
    with Ψ on the left factor, Φ on the right, and ι^r the pushforward of ς∘ι.
    """
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown convention {convention!r}")
    rep = validate_complex(C.complex)
    if not rep.ok:
        raise StructuralError("cannot double an invalid complex: " + "; ".join(rep.lines()))
    K = C.complex
    Cr, _ = reflect(C)
    T = tensor_complex(K, Cr.complex, label=f"D({K.label})")
    mix = (GradedMap.identity(T) + tensor_maps(psi(K), phi(Cr.complex), T, T)).with_degree((0, 0))
    exch = tau_exch(K, T)
    iota_pair = tensor_maps(C.iota, Cr.iota, T, T)
    sar = sarkar(T)
    if convention == THM31:
        tau = mix @ exch
        iota = sar @ mix @ iota_pair
    else:
        tau = sar @ mix @ exch
        iota = mix @ iota_pair
    note = ("commutation relation between τ_⊗ and ι_⊗ required for (τ, ι)-complexes "
            "is not stated explicitly and is not checked")
    return IotaTauComplex(T, iota, tau, (note,))


@dataclass
class RelationReport:
    checks: dict[str, bool]
    certificates: dict[str, GradedMap | None] = field(default_factory=dict)
    unchecked: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return all(self.checks.values())


def _skew_ok(f: GradedMap, skew: bool) -> bool:
    return f.skew == skew and f.degree == (0, 0) and f.is_homogeneous()


def check_iota_relations(C) -> RelationReport:
    """Chain-map, homogeneity and involution checks.

    Accepts an IotaComplex, IotaTauComplex or SurgeryComplex.
    Knot level: ι skew, ι² ≃ ς.  Surgery level (one variable): ι and τ linear
    and grading preserving, ι² ≃ id and τ² ≃ id.
    """
    K = C.complex
    checks: dict[str, bool] = {}
    certs: dict[str, GradedMap | None] = {}
    two = K.mode == TWO_VAR
    ident = GradedMap.identity(K)
    maps = [("iota", C.iota)]
    if getattr(C, "tau", None) is not None:
        maps.append(("tau", C.tau))
    for name, f in maps:
        checks[f"{name}_chain_map"] = is_chain_map(f)
        checks[f"{name}_homogeneous"] = _skew_ok(f, two)
    if two:
        H = homotopic(C.iota @ C.iota, sarkar(K))
        checks["iota_squared_homotopic_sarkar"] = H is not None
        certs["iota_squared_homotopic_sarkar"] = H
    else:
        for name, f in maps:
            H = homotopic(f @ f, ident)
            checks[f"{name}_squared_homotopic_id"] = H is not None
            certs[f"{name}_squared_homotopic_id"] = H
    unchecked = tuple(getattr(C, "notes", ()))
    return RelationReport(checks, certs, unchecked)


# ---------------------------------------------------------------------------
# built-in complexes

BUILTIN_NAMES = ("unknot", "fig8")


def unknot() -> IotaComplex:
    K = Complex.build(TWO_VAR, [("x", 0, 0)], label="unknot")
    return IotaComplex(K, GradedMap.build(K, K, {"x": ["x"]}, skew=True))


def fig8() -> IotaComplex:
    K = Complex.build(
        TWO_VAR,
        [("x", 0, 0), ("a", 0, 0), ("b", 1, -1), ("c", -1, 1), ("d", 0, 0)],
        {"a": [("b", 1, 0), ("c", 0, 1)], "b": [("d", 0, 1)], "c": [("d", 1, 0)]},
        label="fig8",
    )
    iota = GradedMap.build(K, K, {"x": ["x", "d"], "a": ["a", "x"], "b": ["c"], "c": ["b"], "d": ["d"]},
                           skew=True)
    return IotaComplex(K, iota)


def builtin(name: str) -> IotaComplex:
    if name == "unknot":
        C = unknot()
    elif name == "fig8":
        C = fig8()
    else:
        raise KeyError(f"unknown built-in complex {name!r}; choose from {', '.join(BUILTIN_NAMES)}")
    rep = check_iota_relations(C)
    if not (validate_complex(C.complex).ok and rep.ok):
        raise AssertionError(f"built-in {name} failed its load-time checks: {rep.checks}")
    return C


def lift_map(f: GradedMap, source: IotaComplex, target: IotaComplex) -> GradedMap:
    """The induced map f^r: C1^r -> C2^r (same entries, powers swapped)."""
    S = reflect_complex(source.complex)
    T = reflect_complex(target.complex)
    imgs = {g: _swap_powers(f.image(g)) for g in f.source.names}
    deg = None if f.degree is None else (f.degree[1], f.degree[0])
    return GradedMap(S, T, imgs, f.skew, deg)


def double_map(f: GradedMap, source: IotaComplex, target: IotaComplex,
               D1: IotaTauComplex | None = None, D2: IotaTauComplex | None = None) -> GradedMap:
    """f ⊗ f^r between the doubled complexes."""
    D1 = D1 or double(source)
    D2 = D2 or double(target)
    return tensor_maps(f, lift_map(f, source, target), D1.complex, D2.complex)


def is_iota_local(f: GradedMap, source: IotaComplex, target: IotaComplex) -> dict[str, bool]:
    """Chain map, grading preserving and ι-commuting up to homotopy.

    The localized-homology condition is tested after setting 𝒱 = 1, where
    the complex becomes a graded F2[U]-complex; see ``surgery.v_one``.
    """
    from .surgery import tower_map_nonzero, v_one

    out = {
        "chain_map": is_chain_map(f),
        "grading_preserving": f.degree == (0, 0) and not f.skew and f.is_homogeneous(),
    }
    out["iota_commutes"] = homotopic(f @ source.iota, target.iota @ f) is not None
    out["localized_iso"] = tower_map_nonzero(v_one(f))
    return out


__all__ = [
    "IotaComplex", "IotaTauComplex", "RelationReport", "reflect", "reflect_complex", "phi", "psi",
    "sarkar", "tau_exch", "double", "check_iota_relations", "builtin", "unknot", "fig8",
    "BUILTIN_NAMES", "THM31", "REMARK32", "CONVENTIONS", "lift_map", "double_map", "is_iota_local",
]
