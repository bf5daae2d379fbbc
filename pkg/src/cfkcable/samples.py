"""Random valid ι-complexes for property testing.

Samples are direct sums of small knot-like blocks, shifted diagonally,
conjugated by random homogeneous basis changes, with ι perturbed by
∂H + H∂ for a random skew H.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .algebra import TWO_VAR
from .complexes import Complex, GradedMap, admissible, differential_map, toggle
from .equivariant import IotaComplex, fig8, unknot


def trefoil() -> IotaComplex:
    K = Complex.build(TWO_VAR, [("x0", 0, -2), ("x1", -1, -1), ("x2", -2, 0)],
                      {"x1": [("x0", 1, 0), ("x2", 0, 1)]}, label="T23")
    iota = GradedMap.build(K, K, {"x0": ["x2"], "x1": ["x1"], "x2": ["x0"]}, skew=True)
    return IotaComplex(K, iota)


def mirror_trefoil() -> IotaComplex:
    K = Complex.build(TWO_VAR, [("y0", 2, 0), ("y1", 1, 1), ("y2", 0, 2)],
                      {"y0": [("y1", 0, 1)], "y2": [("y1", 1, 0)]}, label="T23*")
    iota = GradedMap.build(K, K, {"y0": ["y2"], "y1": ["y1"], "y2": ["y0"]}, skew=True)
    return IotaComplex(K, iota)


BLOCKS = {"unknot": unknot, "T23": trefoil, "T23*": mirror_trefoil, "fig8": fig8}


def direct_sum(parts: list[tuple[IotaComplex, str, int]]) -> IotaComplex:
    """Sum of blocks; each is renamed with a prefix and shifted by (2s, 2s)."""
    names, gradings, diff, imgs = [], {}, {}, {}

    def ren(c, p):
        return frozenset((p + g, i, j) for g, i, j in c)

    for C, prefix, s in parts:
        K = C.complex
        for g in K.names:
            n = prefix + g
            names.append(n)
            gu, gv = K.gradings[g]
            gradings[n] = (gu + 2 * s, gv + 2 * s)
            diff[n] = ren(K.diff[g], prefix)
            imgs[n] = ren(C.iota.image(g), prefix)
    K = Complex(TWO_VAR, tuple(names), gradings, diff, label="+".join(p[0].complex.label for p in parts))
    return IotaComplex(K, GradedMap(K, K, imgs, True, (0, 0)))


def basis_change(C: IotaComplex, g: str, h: str, mono: tuple[int, int]) -> tuple[IotaComplex, GradedMap]:
    """New basis g' = g + U^iV^j h.  Returns the new complex and P: new -> old."""
    K = C.complex
    i, j = mono

    def P(c):
        acc = set(c)
        for t, a, b in c:
            if t == g:
                toggle(acc, (h, a + i, b + j))
        return frozenset(acc)

    Pinv = P  # (id + E)^2 = id since g != h
    diff = {n: Pinv(K.d(P(frozenset([(n, 0, 0)])))) for n in K.names}
    K2 = Complex(TWO_VAR, K.names, dict(K.gradings), diff, K.shift, K.label + "'")
    imgs = {n: Pinv(C.iota(P(frozenset([(n, 0, 0)])))) for n in K.names}
    iota2 = GradedMap(K2, K2, imgs, True, (0, 0))
    Pmap = GradedMap(K2, K, {n: P(frozenset([(n, 0, 0)])) for n in K.names})
    return IotaComplex(K2, iota2), Pmap


def _random_skew_homotopy(K: Complex, rng: random.Random, density: float) -> GradedMap:
    imgs = {}
    for s in K.names:
        gu, gv = K.gradings[s]
        want = (gv + 1, gu + 1)
        acc: set = set()
        for t in K.names:
            mono = admissible(TWO_VAR, want, K.gradings[t])
            if mono is not None and rng.random() < density:
                acc.add((t,) + mono)
        imgs[s] = frozenset(acc)
    return GradedMap(K, K, imgs, True, (1, 1))


def perturb_iota(C: IotaComplex, rng: random.Random, density: float = 0.3) -> IotaComplex:
    K = C.complex
    H = _random_skew_homotopy(K, rng, density)
    d = differential_map(K)
    new = C.iota + (d @ H).with_degree((0, 0)) + (H @ d).with_degree((0, 0))
    return IotaComplex(K, new.with_degree((0, 0)))


@dataclass
class Sample:
    complex: IotaComplex
    blocks: tuple[str, ...]
    change: GradedMap | None   # ι-equivariant isomorphism sample -> unchanged sum, if any


def random_iota_complex(rng: random.Random, max_generators: int = 6) -> Sample:
    sizes = {k: len(f().complex) for k, f in BLOCKS.items()}
    chosen: list[str] = []
    total = 0
    while True:
        options = [k for k in BLOCKS if total + sizes[k] <= max_generators]
        if not options or (chosen and rng.random() < 0.4):
            break
        k = rng.choice(options)
        chosen.append(k)
        total += sizes[k]
    parts = [(BLOCKS[k](), f"{chr(ord('p') + n)}", rng.randint(-1, 1)) for n, k in enumerate(chosen)]
    C = direct_sum(parts)
    change = None
    K = C.complex
    pairs = []
    for g in K.names:
        for h in K.names:
            if g != h:
                mono = admissible(TWO_VAR, K.gradings[g], K.gradings[h])
                if mono is not None:
                    pairs.append((g, h, mono))
    if pairs and rng.random() < 0.7:
        g, h, mono = rng.choice(pairs)
        C, change = basis_change(C, g, h, mono)
    if rng.random() < 0.7:
        C = perturb_iota(C, rng)
    return Sample(C, tuple(chosen), change)


def random_local_map(rng: random.Random, max_generators: int = 6) -> tuple[IotaComplex, IotaComplex, GradedMap]:
    """An ι-local isomorphism f: C' -> C, where C is a random sum of blocks and
    C' a rebased copy whose ι is perturbed by a homotopy."""
    while True:
        chosen = [rng.choice(list(BLOCKS)) for _ in range(rng.randint(1, 2))]
        parts = [(BLOCKS[k](), chr(ord("p") + n), rng.randint(-1, 1)) for n, k in enumerate(chosen)]
        C = direct_sum(parts)
        if len(C.complex) <= max_generators:
            break
    K = C.complex
    pairs = [(g, h, admissible(TWO_VAR, K.gradings[g], K.gradings[h]))
             for g in K.names for h in K.names if g != h]
    pairs = [p for p in pairs if p[2] is not None]
    if pairs:
        C2, P = basis_change(C, *rng.choice(pairs))
    else:
        C2, P = C, GradedMap.identity(K)
    C2 = perturb_iota(C2, rng)
    return C2, C, GradedMap(C2.complex, K, P.images, False, (0, 0))


__all__ = ["random_local_map", "trefoil", "mirror_trefoil", "BLOCKS", "direct_sum", "basis_change", "perturb_iota",
           "random_iota_complex", "Sample"]
