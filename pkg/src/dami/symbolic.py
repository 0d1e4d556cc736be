"""Leibniz expansion of kernels into central-moment polynomials, normalizers and stability rules."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .core import (
    CHANNEL,
    COUNTING,
    PAPER,
    SPACE,
    InvariantExpr,
    KernelSpec,
    MomentKey,
    MomentPolynomial,
    Normalization,
    NormFactor,
    Primitive,
    ValidationError,
    ZeroInvariant,
)


@dataclass(frozen=True)
class PerPointMonomial:
    """One Leibniz product before integration: per-point exponent tuples and a coefficient."""

    exponents: tuple[tuple[int, tuple[int, ...]], ...]
    coefficient: Fraction = Fraction(1)

    def as_dict(self) -> dict[int, tuple[int, ...]]:
        return dict(self.exponents)


def _parity(perm: tuple[int, ...]) -> int:
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


@lru_cache(maxsize=None)
def _signed_permutations(n: int) -> tuple[tuple[int, tuple[int, ...]], ...]:
    return tuple((_parity(p), p) for p in itertools.permutations(range(n)))


def expand_primitive(p: Primitive, space_dim: int, channel_dim: int) -> list[PerPointMonomial]:
    """Leibniz expansion of one determinant primitive (exponent ignored).

    Column ``k`` of the matrix holds the coordinates of ``p.points[k]``; each
    permutation ``σ`` contributes ``sgn(σ) * prod_k v[points[k], axis σ(k)]``.
    """
    arity = space_dim if p.kind == SPACE else channel_dim
    if len(p.points) != arity:
        raise ValidationError(f"{p} needs exactly {arity} point ids")
    width = space_dim + channel_dim
    shift = 0 if p.kind == SPACE else space_dim
    out = []
    for sign, perm in _signed_permutations(arity):
        exps = []
        for k, pid in enumerate(p.points):
            e = [0] * width
            e[shift + perm[k]] = 1
            exps.append((pid, tuple(e)))
        out.append(PerPointMonomial(tuple(sorted(exps)), Fraction(sign)))
    return out


def _primitive_table(p: Primitive, index: dict[int, int], space_dim: int, channel_dim: int):
    """Primitive terms as (sign, flat exponent-increment positions) over the kernel's point slots."""
    width = space_dim + channel_dim
    rows = []
    for mono in expand_primitive(p, space_dim, channel_dim):
        positions = []
        for pid, e in mono.exponents:
            axis = e.index(1)
            positions.append(index[pid] * width + axis)
        rows.append((int(mono.coefficient), tuple(positions)))
    return rows


def _multiply(poly: dict[tuple, int], rows, size: int) -> dict[tuple, int]:
    out: dict[tuple, int] = {}
    for mono, c in poly.items():
        for sign, positions in rows:
            e = list(mono)
            for pos in positions:
                e[pos] += 1
            key = tuple(e)
            out[key] = out.get(key, 0) + c * sign
    return {k: v for k, v in out.items() if v}


def per_point_expansion(spec: KernelSpec) -> list[PerPointMonomial]:
    """Product of all primitive expansions (exponents by repeated multiplication), before integration."""
    M, N = spec.space_dim, spec.channel_dim
    ids = spec.point_ids
    index = {pid: i for i, pid in enumerate(ids)}
    width = M + N
    size = len(ids) * width
    poly: dict[tuple, int] = {tuple([0] * size): 1}
    for p in spec.primitives:
        rows = _primitive_table(p, index, M, N)
        for _ in range(p.exponent):
            poly = _multiply(poly, rows, size)
    out = []
    for flat, c in sorted(poly.items()):
        exps = tuple((pid, flat[i * width:(i + 1) * width]) for i, pid in enumerate(ids))
        out.append(PerPointMonomial(exps, Fraction(c)))
    return out


@lru_cache(maxsize=4096)
def expand_kernel(spec: KernelSpec) -> MomentPolynomial:
    """Covariant of a kernel as a polynomial in central moments.

    Every point is an independent summation variable, so each per-point monomial
    integrates to the product over points of the central moment carrying that
    point's exponent tuple.
    """
    M = spec.space_dim
    terms = []
    for mono in per_point_expansion(spec):
        factors = [MomentKey.from_flat(e, M) for _, e in mono.exponents]
        terms.append((mono.coefficient, factors))
    return MomentPolynomial.from_terms(terms)


def mass_poly(space_dim: int, channel_dim: int) -> MomentPolynomial:
    return MomentPolynomial.moment(MomentKey((0,) * space_dim, (0,) * channel_dim))


def channel_norm_poly(space_dim: int, channel_dim: int) -> MomentPolynomial:
    """Covariant of ``D_C(1..N)^2``: ``N!`` times the channel second-moment determinant."""
    pts = tuple(range(1, channel_dim + 1))
    return expand_kernel(KernelSpec(space_dim, channel_dim, (Primitive(CHANNEL, pts, 2),)))


def spatial_norm_poly(space_dim: int, channel_dim: int) -> MomentPolynomial:
    """Covariant of ``D_S(1..M)^2``: ``M!`` times the spatial second-moment determinant."""
    pts = tuple(range(1, space_dim + 1))
    return expand_kernel(KernelSpec(space_dim, channel_dim, (Primitive(SPACE, pts, 2),)))


def normalization_for(spec: KernelSpec, mode: str = COUNTING) -> Normalization:
    M, N = spec.space_dim, spec.channel_dim
    L, O_S, O_C = spec.degree, spec.O_S, spec.O_C
    mass = mass_poly(M, N)
    cnorm = channel_norm_poly(M, N)
    if mode == PAPER:
        return Normalization(PAPER, (
            NormFactor("mass", mass, Fraction(O_S + L) - Fraction(N * O_C, 2)),
            NormFactor("channel_norm", cnorm, Fraction(O_C, 2)),
        ))
    if mode == COUNTING:
        return Normalization(COUNTING, (
            NormFactor("spatial_norm", spatial_norm_poly(M, N), Fraction(O_S, 2)),
            NormFactor("channel_norm", cnorm, Fraction(O_C, 2)),
            NormFactor("mass", mass, Fraction(L) - Fraction(M * O_S, 2) - Fraction(N * O_C, 2)),
        ))
    raise ValidationError(f"unknown normalization mode {mode!r}")


def build_invariant(spec: KernelSpec, mode: str = COUNTING, label: str = "",
                    allow_zero: bool = False) -> InvariantExpr:
    """Numerator expansion over the normalization of ``mode``.

    Raises :class:`ZeroInvariant` when the numerator is the empty polynomial,
    unless ``allow_zero`` is set.
    """
    numerator = expand_kernel(spec)
    if not numerator and not allow_zero:
        raise ZeroInvariant(spec)
    return InvariantExpr(spec, numerator, normalization_for(spec, mode), label=label)


def with_mode(expr: InvariantExpr, mode: str) -> InvariantExpr:
    if expr.mode == mode:
        return expr
    return InvariantExpr(expr.kernel, expr.numerator, normalization_for(expr.kernel, mode), expr.label)


def is_first_order(key: MomentKey) -> bool:
    return key.order == 1


def vanishes_when_centered(poly: MomentPolynomial) -> bool:
    """True if every term holds a first-order moment, which is exactly zero for central moments."""
    return all(any(is_first_order(k) for k in factors) for _, factors in poly.terms)


# ---------------------------------------------------------------------------
# stability

STABLE = "Stable"
CONDITIONAL = "ConditionallyStable"


@dataclass(frozen=True)
class StabilityReport:
    label: str
    even_kernel_orders: bool
    channel_violation: bool
    spatial_violation: bool
    all_even_term: bool
    even_participation: bool
    centered_zero: bool
    reasons: tuple[str, ...] = field(default=())

    @property
    def stable(self) -> bool:
        return self.label == STABLE


def _coincident_odd(spec: KernelSpec, kind: str) -> list[Primitive]:
    """Primitives of ``kind`` with odd exponent sharing their point set with a primitive of the other kind."""
    other = {p.points for p in spec.primitives if p.kind != kind}
    hits = []
    for p in spec.primitives:
        if p.kind != kind or p.exponent % 2 == 0:
            continue
        if any(set(p.points) <= set(o) or set(o) <= set(p.points) for o in other):
            hits.append(p)
    return hits


def stability_classify(expr: InvariantExpr) -> StabilityReport:
    """Classify an invariant's robustness to objects with symmetry planes.

    Stable requires even space and channel kernel orders and no odd-order
    channel primitive over the same points as a space primitive. The addend
    parity rule (some term with all-even exponents) and the even-participation
    condition are reported as separate flags.
    """
    spec = expr.kernel
    even_orders = spec.O_S % 2 == 0 and spec.O_C % 2 == 0
    channel_hits = _coincident_odd(spec, CHANNEL)
    spatial_hits = _coincident_odd(spec, SPACE)
    all_even = any(all(e % 2 == 0 for k in factors for e in k.flat) for _, factors in expr.numerator.terms)
    parts = spec.participations()
    even_part = all((s + c) % 2 == 0 for s, c in parts.values())
    centered_zero = vanishes_when_centered(expr.numerator)

    reasons = []
    if not even_orders:
        reasons.append(f"odd kernel order (O_S={spec.O_S}, O_C={spec.O_C})")
    for p in channel_hits:
        reasons.append(f"channel-side parity: {p} shares its points with a space primitive at odd order")
    for p in spatial_hits:
        reasons.append(f"space-side parity: {p} shares its points with a channel primitive at odd order")
    if not all_even:
        reasons.append("no addend with all-even moment exponents")
    if not even_part:
        odd = [i for i, (s, c) in parts.items() if (s + c) % 2]
        reasons.append(f"odd participation count at points {odd}")
    if centered_zero:
        reasons.append("every addend holds a first-order central moment (identically zero when centered)")

    label = STABLE if even_orders and not channel_hits else CONDITIONAL
    return StabilityReport(label, even_orders, bool(channel_hits), bool(spatial_hits), all_even,
                           even_part, centered_zero, tuple(reasons))
