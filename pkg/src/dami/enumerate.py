"""Exhaustive enumeration of canonical kernels up to degree and order bounds."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .core import (
    CHANNEL,
    COUNTING,
    MAX_DEGREE,
    SPACE,
    KernelSpec,
    Primitive,
    ValidationError,
    canonicalize_kernel,
)
from .symbolic import build_invariant, expand_kernel, stability_classify, vanishes_when_centered

# (id, group, combination, (P, Q, O_S, O_C)) for the 3-D, 3-channel complete set
REFERENCE_33: tuple[tuple[int, int, str, tuple[int, int, int, int]], ...] = (
    (1, 1, "D_S(1,2,3) D_C(1,2,3)", (3, 3, 1, 1)),
    (2, 1, "D_S(1,2,3)^2 D_C(1,2,3)", (3, 3, 2, 1)),
    (3, 1, "D_S(1,2,3) D_C(1,2,3)^2", (3, 3, 1, 2)),
    (4, 1, "D_S(1,2,3)^3 D_C(1,2,3)", (3, 3, 3, 1)),
    (5, 1, "D_S(1,2,3) D_C(1,2,3)^3", (3, 3, 1, 3)),
    (6, 1, "D_S(1,2,3)^2 D_C(1,2,3)^2", (3, 3, 2, 2)),
    (7, 2, "D_S(1,2,3) D_C(1,2,4)", (3, 3, 1, 1)),
    (8, 2, "D_S(1,2,3)^2 D_C(1,2,4)", (3, 3, 2, 1)),
    (9, 2, "D_S(1,2,3) D_C(1,2,4)^2", (3, 3, 1, 2)),
    (10, 2, "D_S(1,2,3)^3 D_C(1,2,4)", (3, 3, 3, 1)),
    (11, 2, "D_S(1,2,3) D_C(1,2,4)^3", (3, 3, 1, 3)),
    (12, 2, "D_S(1,2,3)^2 D_C(1,2,4)^2", (3, 3, 2, 2)),
    (13, 3, "D_S(1,2,3) D_S(1,2,4) D_C(1,2,3)", (4, 3, 2, 1)),
    (14, 3, "D_S(1,2,3)^2 D_S(1,2,4) D_C(1,2,3)", (4, 3, 3, 1)),
    (15, 3, "D_S(1,2,3) D_S(1,2,4)^2 D_C(1,2,3)", (4, 3, 3, 1)),
    (16, 3, "D_S(1,2,3) D_S(1,2,4) D_C(1,2,3)^2", (4, 3, 2, 2)),
    (17, 3, "D_S(1,2,3) D_C(1,2,3) D_C(1,2,4)", (3, 4, 1, 2)),
    (18, 3, "D_S(1,2,3) D_C(1,2,3)^2 D_C(1,2,4)", (3, 4, 1, 3)),
    (19, 3, "D_S(1,2,3) D_C(1,2,3) D_C(1,2,4)^2", (3, 4, 1, 3)),
    (20, 3, "D_S(1,2,3)^2 D_C(1,2,3) D_C(1,2,4)", (3, 4, 2, 2)),
    (21, 4, "D_S(1,2,3) D_S(1,3,4) D_C(1,2,4)", (4, 3, 2, 1)),
    (22, 4, "D_S(1,2,3)^2 D_S(1,3,4) D_C(1,2,4)", (4, 3, 3, 1)),
    (23, 4, "D_S(1,2,3) D_S(1,3,4) D_C(1,2,4)^2", (4, 3, 2, 2)),
    (24, 4, "D_S(1,2,3) D_C(1,3,4) D_C(1,2,4)", (3, 4, 1, 2)),
    (25, 4, "D_S(1,2,3) D_C(1,3,4)^2 D_C(1,2,4)", (3, 4, 1, 3)),
    (26, 4, "D_S(1,2,3)^2 D_C(1,3,4) D_C(1,2,4)", (3, 4, 2, 2)),
    (27, 5, "D_S(1,2,3) D_S(1,2,4) D_C(1,3,4) D_C(2,3,4)", (4, 4, 2, 2)),
    (28, 5, "D_S(1,2,3) D_S(1,2,4) D_S(1,3,4) D_C(2,3,4)", (4, 4, 3, 1)),
    (29, 5, "D_S(1,2,3) D_C(1,2,4) D_C(1,3,4) D_C(2,3,4)", (4, 4, 1, 3)),
)

ZERO_IDS = (2, 3, 8, 9, 13, 17, 21, 24)
STABLE_IDS = (6, 12, 16, 23, 26, 27)


def reference_kernel(table_id: int) -> KernelSpec:
    """Table row exactly as printed (not relabeled)."""
    for tid, _, text, _ in REFERENCE_33:
        if tid == table_id:
            return KernelSpec.parse(text, 3, 3)
    raise KeyError(table_id)


def reference_kernels() -> dict[int, KernelSpec]:
    return {tid: KernelSpec.parse(text, 3, 3) for tid, _, text, _ in REFERENCE_33}


def _candidates(space_dim: int, channel_dim: int, n_points: int, max_order: int, require_dual: bool):
    pts = range(1, n_points + 1)
    types = ([(SPACE, c) for c in itertools.combinations(pts, space_dim)]
             + [(CHANNEL, c) for c in itertools.combinations(pts, channel_dim)])
    full = set(pts)

    def rec(i, remaining, chosen):
        if i == len(types):
            if not chosen:
                return
            kinds = {k for (k, _), _ in chosen}
            if require_dual and kinds != {SPACE, CHANNEL}:
                return
            used = {p for (_, c), _ in chosen for p in c}
            if used != full:
                return
            yield tuple(chosen)
            return
        yield from rec(i + 1, remaining, chosen)
        for e in range(1, remaining + 1):
            chosen.append((types[i], e))
            yield from rec(i + 1, remaining - e, chosen)
            chosen.pop()

    yield from rec(0, max_order, [])


def enumerate_kernels(space_dim: int, channel_dim: int, max_degree: int, max_order: int,
                      require_dual: bool = True) -> list[KernelSpec]:
    """All canonical kernels with degree <= ``max_degree`` and order <= ``max_order``.

    Candidates are primitive multisets over ``{1..L}`` using every point, for each
    ``L`` up to ``max_degree``; they are canonicalized and deduplicated. Output is
    sorted by ``(L, K, canonical form)``.
    """
    if max_degree > MAX_DEGREE:
        raise ValidationError(f"max_degree is limited to {MAX_DEGREE}")
    if max_degree < 1 or max_order < 1:
        return []
    seen: dict[tuple, KernelSpec] = {}
    for n in range(min(space_dim, channel_dim), max_degree + 1):
        for chosen in _candidates(space_dim, channel_dim, n, max_order, require_dual):
            spec = KernelSpec(space_dim, channel_dim,
                              tuple(Primitive(k, c, e) for (k, c), e in chosen))
            canon = canonicalize_kernel(spec)
            seen.setdefault(canon.sort_key(), canon)
    return sorted(seen.values(), key=lambda s: (s.degree, s.order, s.sort_key()))


@dataclass(frozen=True)
class ManifestRow:
    kernel: KernelSpec
    table_id: int | None
    zero: bool
    centered_zero: bool
    stability: str
    extra: bool

    def as_dict(self) -> dict:
        k = self.kernel
        return {
            "kernel": str(k),
            "reference_id": "" if self.table_id is None else self.table_id,
            "P": k.P, "Q": k.Q, "O_S": k.O_S, "O_C": k.O_C, "L": k.degree, "K": k.order,
            "zero": int(self.zero),
            "centered_zero": int(self.centered_zero),
            "stability": self.stability,
            "extra": int(self.extra),
        }


def match_reference(specs: list[KernelSpec]) -> dict[int, KernelSpec]:
    """Table ID -> emitted kernel with the same canonical form (only rows that are found)."""
    if not specs or (specs[0].space_dim, specs[0].channel_dim) != (3, 3):
        return {}
    by_form = {s.sort_key(): s for s in specs}
    out = {}
    for tid, spec in reference_kernels().items():
        hit = by_form.get(canonicalize_kernel(spec).sort_key())
        if hit is not None:
            out[tid] = hit
    return out


def build_manifest(specs: list[KernelSpec], mode: str = COUNTING) -> list[ManifestRow]:
    table = {s.sort_key(): tid for tid, s in match_reference(specs).items()}
    rows = []
    for spec in specs:
        num = expand_kernel(spec)
        tid = table.get(spec.sort_key())
        if num:
            expr = build_invariant(spec, mode)
            stability = stability_classify(expr).label
        else:
            stability = ""
        rows.append(ManifestRow(spec, tid, not num, bool(num) and vanishes_when_centered(num),
                                stability, bool(table) and tid is None))
    return rows


def reference_invariants(ids=None, mode: str = COUNTING) -> list:
    """Invariant expressions for table rows (zero rows skipped), labeled ``ID <n>``."""
    kernels = reference_kernels()
    ids = [i for i in (ids or kernels) if i not in ZERO_IDS]
    return [build_invariant(kernels[i], mode, label=f"ID {i}") for i in ids]


def find_proportional(target, specs: list[KernelSpec]) -> list[tuple[KernelSpec, object]]:
    """Kernels whose expansion is a nonzero scalar multiple of ``target``, with the ratio."""
    sizes = {len(f) for _, f in target.terms}
    hits = []
    for spec in specs:
        if spec.degree not in sizes:
            continue
        ratio = expand_kernel(spec).scalar_ratio(target)
        if ratio is not None:
            hits.append((spec, ratio))
    return hits
