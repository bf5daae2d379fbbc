"""Acceptance criteria 1-10.

Each test prints one PASS/FAIL line.  The last test checks that the whole
suite ran within its 10 second budget.
"""

from __future__ import annotations

import json
import random
import time
import warnings
from fractions import Fraction

from cfkcable.cli import main
from cfkcable.complexes import (
    GradedMap,
    homotopic,
    is_chain_map,
    tensor_maps,
    validate_complex,
)
from cfkcable.equivariant import check_iota_relations, double, double_map, fig8, tau_exch
from cfkcable.pipeline import (
    FIG8_CYCLE_NAMES,
    FIG8_MODEL_ORDER,
    FIG8_PARTNER_NAMES,
    emit_report,
    fig8_named_classes,
    map_text,
    run_pipeline,
)
from cfkcable.samples import random_iota_complex, random_local_map
from cfkcable.surgery import (
    INCONCLUSIVE,
    OBSTRUCTED,
    SurgeryComplex,
    cobordism_shift,
    connected_sum_surgery,
    dual_local_map,
    extract_A0,
    find_local_map_to_trivial,
    homology_FU,
    intersection_form_W1n,
    obstruct_equivariant_ball,
    standard_model,
    trivial_surgery,
    verify_local,
)

BUDGET_SECONDS = 10.0
ELAPSED: dict[int, float] = {}

ACTION_TABLE = [
    ("[x|x]", "free", "[x|x]+[x|d]+[d|x]+[d|d]", "[x|x]"),
    ("[x|d]", "U-torsion", "[x|d]+[d|d]", "[d|x]"),
    ("[d|x]", "U-torsion", "[d|x]+[d|d]", "[x|d]"),
    ("[a|d+d|a+b|b+c|c]", "U-torsion", "[a|d+d|a+b|b+c|c]+[x|d]+[d|x]", "[a|d+d|a+b|b+c|c]+[d|d]"),
    ("[d|d]", "U-torsion", "[d|d]", "[d|d]"),
]

MODEL_IOTA = {"x": "x + b + d + h", "b": "b + h", "d": "d + h", "f": "f + b + d", "h": "h",
              "a": "a + g", "c": "c + g", "e": "e + a + c", "g": "g"}
MODEL_TAU = {"x": "x", "b": "d", "d": "b", "f": "f + h", "h": "h",
             "a": "c", "c": "a", "e": "e + g", "g": "g"}

_cache: dict = {}


def fig8_report():
    if "report" not in _cache:
        _cache["report"] = run_pipeline("theorem-1.1")
    return _cache["report"]


def fig8_surgery():
    if "A0" not in _cache:
        S = extract_A0(double(fig8()))
        _cache["A0"] = (S, homology_FU(S, fig8_named_classes()))
    return _cache["A0"]


def _report(capsys, number: int, title: str, ok: bool, t0: float, detail: str = "") -> None:
    ELAPSED[number] = time.perf_counter() - t0
    line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}  ({ELAPSED[number]:.2f}s)"
    if detail and not ok:
        line += f"  [{detail}]"
    with capsys.disabled():
        print("\n" + line)
    assert ok, detail


def test_criterion_01_table(capsys):
    t0 = time.perf_counter()
    rows = fig8_report().step("table").outputs["rows"]
    got = [(r["class"], r["type"], r["iota"], r["tau"]) for r in rows]
    _report(capsys, 1, "action table reproduction", got == ACTION_TABLE, t0, f"got {got}")


def test_criterion_02_invariant_subspace(capsys):
    t0 = time.perf_counter()
    v = fig8_report().verdict
    S, H = fig8_surgery()
    orders = {h.label: h.order for h in H.generators}
    ok = (v["status"] == OBSTRUCTED
          and sorted(w["class"] for w in v["witness"]) == ["[d|d]", "[x|d]+[d|x]"]
          and not any(w["nontorsion"] for w in v["witness"])
          and orders["[x|d]"] == orders["[d|x]"] == orders["[d|d]"] == 1)
    _report(capsys, 2, "invariant subspace and OBSTRUCTED verdict", ok, t0, str(v))


def test_criterion_03_homology_shape(capsys):
    t0 = time.perf_counter()
    S, H = fig8_surgery()
    out = fig8_report().step("homology").outputs
    ok = (H.tower_rank == 1 and H.torsion == [(1, 0)] * 4
          and [h.grading for h in H.generators] == [0] * 5
          and out["module"] == "F[U] ⊕ (F[U]/U)_{0}^4")
    _report(capsys, 3, "H(A0) = F[U] + (F[U]/U)^4 in grading 0", ok, t0, str(H.torsion))


def test_criterion_04_local_map(capsys):
    t0 = time.perf_counter()
    S, H = fig8_surgery()
    T = trivial_surgery()
    F = find_local_map_to_trivial(S, H)
    sm = standard_model(H, FIG8_CYCLE_NAMES, FIG8_PARTNER_NAMES, FIG8_MODEL_ORDER)
    M = SurgeryComplex(sm.complex, sm.iota, sm.tau)
    ok = F is not None
    detail = "no local map found"
    if ok:
        Fm = F @ sm.include
        rep = verify_local(Fm, M, T)
        transported = map_text(Fm, all_generators=True)
        want = {g: ("1" if g == "x" else "0") for g in FIG8_MODEL_ORDER}
        ok = (verify_local(F, S, T).ok and rep.ok and transported == want
              and map_text(sm.iota, all_generators=True) == MODEL_IOTA
              and map_text(sm.tau, all_generators=True) == MODEL_TAU)
        detail = f"map {transported}, checks {rep.as_dict()}"
    _report(capsys, 4, "local map to the trivial complex on the minimal model", ok, t0, detail)


def test_criterion_05_unknot_control(capsys):
    t0 = time.perf_counter()
    r = run_pipeline("custom", ["double(unknot)", "obstruct"])
    ok = r.verdict["status"] == INCONCLUSIVE and r.verdict["witness"] == [
        {"class": "[x|x]", "nontorsion": True}]
    _report(capsys, 5, "unknot control is INCONCLUSIVE", ok, t0, str(r.verdict))


def test_criterion_06_single_symmetries(capsys):
    t0 = time.perf_counter()
    S, H = fig8_surgery()
    got = {s: obstruct_equivariant_ball(S, H, (s,)).status for s in ("iota", "tau", "tau_iota")}
    _report(capsys, 6, "each symmetry alone is inconclusive", set(got.values()) == {INCONCLUSIVE},
            t0, str(got))


def test_criterion_07_cobordism(capsys):
    t0 = time.perf_counter()
    ok = True
    bad = []
    for n in range(2, 10):
        d = intersection_form_W1n(n)
        k = n - 1
        minors_ok = d.leading_minors == tuple((-1) ** (r + 1) * (r + 2) for r in range(k))
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            shift = cobordism_shift(n)
        warned = bool(caught)
        good = (d.definite and d.spin_even and minors_ok and shift == Fraction(n - 1, 4)
                and warned == (n % 2 == 0))
        if not good:
            ok = False
            bad.append(n)
    _report(capsys, 7, "W_{1,n} definite, even, shift (n-1)/4", ok, t0, f"failed n={bad}")


def test_criterion_08_structural(capsys):
    t0 = time.perf_counter()
    rng = random.Random(2024)
    failures = []
    for k in range(200):
        s = random_iota_complex(rng, 6)
        D = double(s.complex)
        rep = check_iota_relations(D)
        if not (validate_complex(D.complex).ok and rep.ok
                and rep.certificates["iota_squared_homotopic_sarkar"] is not None):
            failures.append(("double", k, s.blocks))
    for k in range(200):
        src, tgt, f = random_local_map(rng)
        D1, D2 = double(src), double(tgt)
        F = double_map(f, src, tgt, D1, D2)
        E1, E2 = tau_exch(src.complex, D1.complex), tau_exch(tgt.complex, D2.complex)
        if not (is_chain_map(f) and is_chain_map(F) and (E2 @ F).equals(F @ E1)):
            failures.append(("tau_exch", k))
        if k < 20 and homotopic(f @ src.iota, tgt.iota @ f) is None:
            failures.append(("iota_local", k))
    _report(capsys, 8, "structural properties on 200 random ι-complexes", not failures, t0,
            str(failures[:5]))


def test_criterion_09_scaffolding(capsys):
    t0 = time.perf_counter()
    S, H = fig8_surgery()
    sm = standard_model(H, FIG8_CYCLE_NAMES, FIG8_PARTNER_NAMES, FIG8_MODEL_ORDER)
    M = SurgeryComplex(sm.complex, sm.iota, sm.tau)
    T = trivial_surgery()
    F = GradedMap.build(M.complex, T.complex, {"x": ["1"]})
    G, DT, DM = dual_local_map(F, M, T)
    checks = {"dual_local": verify_local(G, DT, DM).ok}
    # unit: M # trivial -> M by g|1 -> g
    MT = connected_sum_surgery(M, T)
    unit = GradedMap(MT.complex, M.complex, {f"{g}|1": frozenset([(g, 0, 0)]) for g in M.complex.names})
    back = GradedMap(M.complex, MT.complex, {g: frozenset([(f"{g}|1", 0, 0)]) for g in M.complex.names})
    checks["unit"] = verify_local(unit, MT, M).ok and verify_local(back, M, MT).ok
    # associativity: (T # M) # T and T # (M # T) with the identity on generator names
    L = connected_sum_surgery(connected_sum_surgery(T, M), T)
    R = connected_sum_surgery(T, connected_sum_surgery(M, T))
    ident = GradedMap(L.complex, R.complex, {g: frozenset([(g, 0, 0)]) for g in L.complex.names})
    checks["associativity"] = (set(L.complex.names) == set(R.complex.names)
                               and verify_local(ident, L, R).ok)
    # G ⊗ G stays local
    TT, MM = connected_sum_surgery(DT, DT), connected_sum_surgery(DM, DM)
    checks["tensor_square"] = verify_local(tensor_maps(G, G, TT.complex, MM.complex), TT, MM).ok
    st = fig8_report().step("dual_tensor_chain")
    checks["report_chain"] = (all(st.outputs["dual_verify_local"][k] for k in
                                  ("grading_shift", "localized_iso", "iota_commutes", "tau_commutes"))
                              and all(v is not None for v in st.certificates.values())
                              and st.outputs["coevaluation_nontorsion"]
                              and st.outputs["unit_isomorphism_local"])
    _report(capsys, 9, "dual and connected-sum scaffolding", all(checks.values()), t0, str(checks))


def test_criterion_10_determinism(capsysbinary):
    t0 = time.perf_counter()
    a = emit_report(run_pipeline("theorem-1.1"), "machine")
    b = emit_report(run_pipeline("theorem-1.1"), "machine")
    outs = []
    for _ in range(2):
        main(["pipeline", "custom", "double(fig8)", "obstruct", "--format", "machine"])
        outs.append(capsysbinary.readouterr().out)
    ok = a == b and outs[0] == outs[1] and json.loads(outs[0])["verdict"]["status"] == OBSTRUCTED
    _report(capsysbinary, 10, "byte-identical machine reports", ok, t0)


def test_total_time_budget(capsys):
    total = sum(ELAPSED.values())
    ok = len(ELAPSED) == 10 and total < BUDGET_SECONDS
    with capsys.disabled():
        print(f"\nacceptance total {total:.2f}s over {len(ELAPSED)} criteria "
              f"(budget {BUDGET_SECONDS:.0f}s): {'PASS' if ok else 'FAIL'}")
    assert ok
