"""Involutive knot Floer complexes over F2[U,V]: doubling, large surgery and local maps."""

from __future__ import annotations

from .algebra import ONE_VAR, TWO_VAR, Monomial, Poly, f2_solve, poly_arith, snf_over_FU
from .complexes import (
    Complex,
    GradedMap,
    StructuralError,
    dualize,
    homotopic,
    reduce,
    tensor_complex,
    validate_complex,
)
from .equivariant import IotaComplex, IotaTauComplex, builtin, check_iota_relations, double, fig8, unknot
from .surgery import (
    SurgeryComplex,
    cobordism_shift,
    extract_A0,
    find_local_map_to_trivial,
    homology_FU,
    induced_action_table,
    intersection_form_W1n,
    invariant_subspace,
    obstruct_equivariant_ball,
    verify_local,
)

__version__ = "0.1.0"

__all__ = [
    "ONE_VAR", "TWO_VAR", "Monomial", "Poly", "f2_solve", "poly_arith", "snf_over_FU", "Complex",
    "GradedMap", "StructuralError", "dualize", "homotopic", "reduce", "tensor_complex",
    "validate_complex", "IotaComplex", "IotaTauComplex", "builtin", "check_iota_relations", "double",
    "fig8", "unknot",
    "SurgeryComplex", "cobordism_shift", "extract_A0", "find_local_map_to_trivial", "homology_FU",
    "induced_action_table", "intersection_form_W1n", "invariant_subspace", "obstruct_equivariant_ball",
    "verify_local",
]
