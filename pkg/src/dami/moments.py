"""Centroids and central moments of weighted point objects."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

import numpy as np

from . import _kernels
from .core import MomentKey, MomentPolynomial, ObjectMN, ValidationError


def centroid(obj: ObjectMN) -> tuple[np.ndarray, np.ndarray]:
    """Weighted means of the spatial coordinates and of the channel values."""
    total = math.fsum(obj.weights)
    if not total > 0:
        raise ValidationError("object has zero total weight")
    data = np.hstack([obj.coords, obj.channels])
    means = _kernels.weighted_sums(data, obj.weights) / total
    return means[:obj.space_dim], means[obj.space_dim:]


def centered(obj: ObjectMN) -> ObjectMN:
    xbar, cbar = centroid(obj)
    return ObjectMN(obj.coords - xbar, obj.channels - cbar, obj.weights)


@dataclass(frozen=True)
class MomentTable(Mapping[MomentKey, float]):
    """Central moment values for a set of keys, plus per-side magnitude scales.

    ``spatial_scale`` and ``channel_scale`` are RMS centered magnitudes, used to
    judge when a normalizer is numerically zero.
    """

    data: Mapping[MomentKey, float]
    space_dim: int
    channel_dim: int
    mass: float
    spatial_scale: float
    channel_scale: float

    def __getitem__(self, key: MomentKey) -> float:
        return self.data[key]

    def __iter__(self) -> Iterator[MomentKey]:
        return iter(self.data)

    def __len__(self) -> int:
        return len(self.data)

    def term_scale(self, key: MomentKey) -> float:
        return self.mass * self.spatial_scale ** sum(key.spatial) * self.channel_scale ** sum(key.channel)

    def magnitude(self, poly: MomentPolynomial) -> float:
        """Typical size of ``poly`` on this object: each moment replaced by its scale proxy."""
        return math.fsum(abs(float(c)) * math.prod(self.term_scale(k) for k in factors)
                         for c, factors in poly.terms)


def _second_order_keys(M: int, N: int) -> list[MomentKey]:
    keys = []
    for a in range(M):
        e = [0] * M
        e[a] = 2
        keys.append(MomentKey(tuple(e), (0,) * N))
    for b in range(N):
        e = [0] * N
        e[b] = 2
        keys.append(MomentKey((0,) * M, tuple(e)))
    return keys


def central_moments(obj: ObjectMN, keys: Iterable[MomentKey], prescale: bool = False) -> MomentTable:
    """Central moments ``sum_i w_i prod (x_i - xbar)^p prod (c_i - cbar)^u`` for ``keys``.

    First-order single-axis moments are zero by definition of the centroid and
    are stored as exact zeros; the mass key is the exact total weight.
    ``prescale`` divides each centered axis by its max-abs value first.
    """
    M, N = obj.space_dim, obj.channel_dim
    keys = set(keys)
    for k in keys:
        if len(k.spatial) != M or len(k.channel) != N:
            raise ValidationError(f"moment key {k} does not match object dimensions ({M}, {N})")
        if any(e < 0 for e in k.flat):
            raise ValidationError(f"negative exponent in {k}")
    xbar, cbar = centroid(obj)
    data = np.hstack([obj.coords - xbar, obj.channels - cbar])
    if prescale:
        span = np.max(np.abs(data), axis=0)
        span[span == 0] = 1.0
        data = data / span
    todo = sorted(set(keys) | set(_second_order_keys(M, N)))
    exps = np.array([k.flat for k in todo], dtype=np.int64).reshape(len(todo), M + N)
    sums = _kernels.moment_sums(data, obj.weights, exps)
    mass = math.fsum(obj.weights)
    values = {}
    for k, v in zip(todo, sums):
        order = k.order
        if order == 0:
            v = mass
        elif order == 1:
            v = 0.0
        values[k] = float(v)
    spatial_var = sum(values[k] for k in todo if k.order == 2 and sum(k.spatial) == 2 and max(k.spatial) == 2)
    channel_var = sum(values[k] for k in todo if k.order == 2 and sum(k.channel) == 2 and max(k.channel) == 2)
    return MomentTable(
        data={k: values[k] for k in keys},
        space_dim=M,
        channel_dim=N,
        mass=mass,
        spatial_scale=math.sqrt(max(spatial_var, 0.0) / (M * mass)),
        channel_scale=math.sqrt(max(channel_var, 0.0) / (N * mass)),
    )


def second_moment_matrices(obj: ObjectMN) -> tuple[np.ndarray, np.ndarray]:
    """Weighted spatial and channel scatter matrices (covariance times mass)."""
    xbar, cbar = centroid(obj)
    xs = obj.coords - xbar
    cs = obj.channels - cbar
    w = obj.weights[:, None]
    return (xs * w).T @ xs, (cs * w).T @ cs
