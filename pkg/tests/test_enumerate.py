import itertools

import pytest

from dami.core import KernelSpec, ValidationError, canonicalize_kernel
from dami.enumerate import (
    STABLE_IDS,
    REFERENCE_33,
    ZERO_IDS,
    build_manifest,
    enumerate_kernels,
    find_proportional,
    match_reference,
    reference_invariants,
    reference_kernel,
)
from dami.symbolic import expand_kernel

from oracles import isomorphic


@pytest.fixture(scope="module")
def specs33():
    return enumerate_kernels(3, 3, 4, 4, True)


def test_enumeration_is_canonical_and_unique(specs33):
    assert all(s.is_canonical_labeling for s in specs33)
    assert all(canonicalize_kernel(s) == s for s in specs33)
    for a, b in itertools.combinations(specs33, 2):
        assert not isomorphic(a, b), (str(a), str(b))


def test_enumeration_bounds(specs33):
    for s in specs33:
        assert s.degree <= 4 and s.order <= 4
        assert s.O_S >= 1 and s.O_C >= 1


def test_enumeration_is_complete_small():
    # every kernel over 3 points with order <= 3 built directly must be represented
    specs = enumerate_kernels(2, 2, 3, 3, False)
    forms = {s.sort_key() for s in specs}
    pairs = [(k, p) for k in "SC" for p in itertools.combinations((1, 2, 3), 2)]
    for r in range(1, 4):
        for combo in itertools.combinations_with_replacement(pairs, r):
            text = "*".join(f"{k}({p[0]},{p[1]})" for k, p in combo)
            spec = KernelSpec.parse(text, 2, 2)
            assert canonicalize_kernel(spec).sort_key() in forms, text


def test_match_table(specs33):
    hits = match_reference(specs33)
    assert sorted(hits) == list(range(1, 30))
    for tid, _, _, sig in REFERENCE_33:
        assert hits[tid].signature == reference_kernel(tid).signature
        assert hits[tid].signature[2:] == sig[2:]
    assert match_reference(enumerate_kernels(2, 2, 2, 2)) == {}


def test_manifest_flags(specs33):
    rows = build_manifest(specs33)
    assert {r.table_id for r in rows if r.zero} == set(ZERO_IDS)
    assert {r.table_id for r in rows if r.stability == "Stable"} == set(STABLE_IDS)
    extras = [r for r in rows if r.extra]
    assert len(extras) == len(rows) - 29
    assert all(r.table_id is None for r in extras)


def test_degree_limit():
    with pytest.raises(ValidationError):
        enumerate_kernels(2, 2, 9, 4)
    assert enumerate_kernels(2, 2, 0, 4) == []


def test_table_invariants_skip_zero():
    exprs = reference_invariants()
    assert len(exprs) == 21
    assert [e.label for e in reference_invariants(STABLE_IDS)] == [f"ID {i}" for i in STABLE_IDS]


def test_find_proportional_self():
    specs = enumerate_kernels(2, 2, 3, 3)
    target = expand_kernel(specs[-1]) * 5
    hits = find_proportional(target, specs)
    assert any(s == specs[-1] for s, _ in hits)
    for s, ratio in hits:
        assert expand_kernel(s) * (1 / ratio) == target * 1 or expand_kernel(s) == target * ratio
