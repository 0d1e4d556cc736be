"""Brute-force covariants: the kernel summed directly over ordered point tuples.

This never touches moment polynomials, so it is an independent check on the
symbolic expansion.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import SPACE, DamiError, KernelSpec, ObjectMN, ValidationError
from .moments import centered

DEFAULT_BUDGET = 10_000_000


class BudgetExceeded(DamiError):
    pass


@dataclass(frozen=True)
class OracleResult:
    value: float
    magnitude: float  # sum of |summand|, the scale for error bounds
    n_tuples: int
    exact: bool


def _prepare(spec: KernelSpec):
    index = {pid: i for i, pid in enumerate(spec.point_ids)}
    width = max(spec.space_dim, spec.channel_dim)
    kinds = np.array([0 if p.kind == SPACE else 1 for p in spec.primitives], dtype=np.int64)
    pts = np.zeros((len(spec.primitives), width), dtype=np.int64)
    for q, p in enumerate(spec.primitives):
        pts[q, :len(p.points)] = [index[i] for i in p.points]
    exps = np.array([p.exponent for p in spec.primitives], dtype=np.int64)
    return kinds, pts, exps


def brute_covariant(obj: ObjectMN, spec: KernelSpec, budget: int = DEFAULT_BUDGET,
                    sample: bool = False, seed: int = 0) -> OracleResult:
    """Sum of ``prod w * prod det^t`` over all ordered ``L``-tuples of points (with repetition).

    The object is centered first. When ``n ** L`` exceeds ``budget`` a seeded
    uniform sample of ``budget`` tuples is used if ``sample`` is set (the
    estimate is scaled up and flagged inexact); otherwise :class:`BudgetExceeded`.
    """
    if (obj.space_dim, obj.channel_dim) != (spec.space_dim, spec.channel_dim):
        raise ValidationError("object and kernel dimensions differ")
    obj = centered(obj)
    L = spec.degree
    kinds, pts, exps = _prepare(spec)
    total = obj.n_points ** L
    if total <= budget:
        value, mag = _kernels.tuple_sum(obj.coords, obj.channels, obj.weights, kinds, pts, exps, L)
        return OracleResult(float(value), float(mag), total, True)
    if not sample:
        raise BudgetExceeded(f"{total} tuples exceed the budget of {budget}; enable sampling")
    rng = np.random.default_rng(seed)
    tuples = rng.integers(0, obj.n_points, size=(budget, L))
    value, mag = _kernels.tuple_sum(obj.coords, obj.channels, obj.weights, kinds, pts, exps, L, tuples)
    factor = total / budget
    return OracleResult(float(value) * factor, float(mag) * factor, budget, False)
