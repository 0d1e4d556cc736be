"""Numeric evaluation of invariant expressions on objects."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .core import (
    DamiError,
    InvariantExpr,
    MomentKey,
    MomentPolynomial,
    NegativeBaseError,
    NullSpaceError,
    ObjectMN,
    ValidationError,
)
from .moments import MomentTable, central_moments

log = logging.getLogger(__name__)

NULL_TOL = 1e-12


@dataclass(frozen=True)
class _Compiled:
    keys: tuple[MomentKey, ...]
    index: np.ndarray  # (terms, max_factors) into [keys..., 1.0]
    coeffs: np.ndarray


@lru_cache(maxsize=1024)
def _compile(poly: MomentPolynomial) -> _Compiled:
    keys = tuple(sorted(poly.keys()))
    pos = {k: i for i, k in enumerate(keys)}
    width = max((len(f) for _, f in poly.terms), default=0)
    index = np.full((len(poly), max(width, 1)), len(keys), dtype=np.int64)
    for t, (_, factors) in enumerate(poly.terms):
        index[t, :len(factors)] = [pos[k] for k in factors]
    coeffs = np.array([float(c) for c, _ in poly.terms])
    return _Compiled(keys, index, coeffs)


def eval_poly(poly: MomentPolynomial, table: MomentTable) -> float:
    if not poly:
        return 0.0
    comp = _compile(poly)
    vals = np.array([table[k] for k in comp.keys] + [1.0])
    return math.fsum(comp.coeffs * np.prod(vals[comp.index], axis=1))


def _power(base: float, exponent, name: str) -> float:
    if exponent == 0:
        return 1.0
    if base < 0:
        if exponent.denominator != 1:
            raise NegativeBaseError(name, base)
        sign = -1.0 if exponent.numerator % 2 else 1.0
    else:
        sign = 1.0
    return sign * math.exp(float(exponent) * math.log(abs(base)))


def evaluate_on_table(expr: InvariantExpr, table: MomentTable, tol: float = NULL_TOL) -> float:
    numerator = eval_poly(expr.numerator, table)
    denom = 1.0
    for f in expr.normalization.factors:
        base = eval_poly(f.base, table)
        if abs(base) <= tol * table.magnitude(f.base):
            raise NullSpaceError(f.name)
        denom *= _power(base, f.exponent, f.name)
    return numerator / denom


def evaluate(expr: InvariantExpr, obj: ObjectMN, tol: float = NULL_TOL, prescale: bool = False) -> float:
    """Invariant value: numerator over the product of normalizer powers.

    Raises :class:`NullSpaceError` naming the first normalizer whose value is
    within ``tol`` of zero relative to its magnitude on this object, and
    :class:`NegativeBaseError` for a fractional power of a negative normalizer.
    """
    if (obj.space_dim, obj.channel_dim) != (expr.space_dim, expr.channel_dim):
        raise ValidationError(
            f"expression is for M={expr.space_dim}, N={expr.channel_dim}; "
            f"object has M={obj.space_dim}, N={obj.channel_dim}")
    table = central_moments(obj, expr.keys(), prescale=prescale)
    return evaluate_on_table(expr, table, tol)


@dataclass
class BatchResult:
    values: np.ndarray  # (objects, exprs), NaN where evaluation failed
    errors: dict[tuple[int, int], str]
    labels: list[str]

    @property
    def n_missing(self) -> int:
        return int(np.isnan(self.values).sum())


def evaluate_batch(exprs: Sequence[InvariantExpr], objects: Sequence[ObjectMN],
                   include_zero: bool = False, tol: float = NULL_TOL,
                   prescale: bool = False) -> BatchResult:
    """Feature matrix with one row per object and one column per expression.

    One moment table per object covers every expression. Expressions with an
    empty numerator are dropped unless ``include_zero``; per-cell failures are
    recorded as NaN with the error message kept in ``errors``.
    """
    exprs = [e for e in exprs if include_zero or e.numerator]
    keys = set()
    for e in exprs:
        keys |= e.keys()
    out = np.full((len(objects), len(exprs)), np.nan)
    errors: dict[tuple[int, int], str] = {}
    for i, obj in enumerate(objects):
        try:
            table = central_moments(obj, keys, prescale=prescale)
        except DamiError as exc:
            for j in range(len(exprs)):
                errors[(i, j)] = str(exc)
            continue
        for j, e in enumerate(exprs):
            try:
                out[i, j] = evaluate_on_table(e, table, tol)
            except DamiError as exc:
                errors[(i, j)] = str(exc)
    if errors:
        log.info("%d of %d cells failed", len(errors), out.size)
    return BatchResult(out, errors, [e.label or str(e.kernel) for e in exprs])
