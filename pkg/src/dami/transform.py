"""Dual-affine transforms: application, seeded sampling, and rank reduction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import AffineMap, NullSpaceError, ObjectMN, ValidationError
from .moments import centroid, second_moment_matrices

TRANSLATION = "translation"
ROTATION = "rotation"
SCALING = "scaling"
GENERAL = "affine"
FAMILIES = (TRANSLATION, ROTATION, SCALING, GENERAL)


def apply_dual(obj: ObjectMN, spatial: AffineMap | None = None, channel: AffineMap | None = None) -> ObjectMN:
    """Map coordinates through ``spatial`` and channel vectors through ``channel``, independently."""
    if spatial is not None and spatial.dim != obj.space_dim:
        raise ValidationError(f"spatial map has dim {spatial.dim}, object has M={obj.space_dim}")
    if channel is not None and channel.dim != obj.channel_dim:
        raise ValidationError(f"channel map has dim {channel.dim}, object has N={obj.channel_dim}")
    coords = obj.coords if spatial is None else spatial.apply(obj.coords)
    channels = obj.channels if channel is None else channel.apply(obj.channels)
    return ObjectMN(coords, channels, obj.weights)


@dataclass(frozen=True)
class AffineConstraints:
    min_abs_det: float = 0.2
    max_abs_det: float = 5.0
    max_cond: float = 10.0
    positive_det: bool = True
    offset_scale: float = 10.0
    max_tries: int = 10_000


def _admissible(linear: np.ndarray, c: AffineConstraints) -> bool:
    det = np.linalg.det(linear)
    if c.positive_det and det <= 0:
        return False
    return c.min_abs_det <= abs(det) <= c.max_abs_det and np.linalg.cond(linear) <= c.max_cond


def _random_rotation(dim: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def sample_affine(dim: int, rng: np.random.Generator | int | None, family: str = GENERAL,
                  constraints: AffineConstraints | None = None) -> AffineMap:
    """Draw an admissible affine map of the given family by rejection sampling.

    Rotation: orthogonal, det +1. Scaling: positive diagonal. Translation:
    identity linear part. General: dense entries uniform in [-1, 1]. Every
    family except rotation and scaling gets a random offset.
    """
    c = constraints or AffineConstraints()
    rng = np.random.default_rng(rng)
    if family == ROTATION:
        return AffineMap(_random_rotation(dim, rng))
    if family == TRANSLATION:
        offset = rng.uniform(-c.offset_scale, c.offset_scale, dim)
        while not np.any(offset):
            offset = rng.uniform(-c.offset_scale, c.offset_scale, dim)
        return AffineMap(np.eye(dim), offset)
    for _ in range(c.max_tries):
        if family == SCALING:
            linear = np.diag(rng.uniform(0.3, 3.0, dim))
            offset = None
        elif family == GENERAL:
            linear = rng.uniform(-1.0, 1.0, (dim, dim))
            if not c.positive_det and rng.random() < 0.5:
                linear[0] = -linear[0]
            offset = rng.uniform(-c.offset_scale, c.offset_scale, dim)
        else:
            raise ValidationError(f"unknown transform family {family!r}")
        if _admissible(linear, c):
            return AffineMap(linear, offset)
    raise ValidationError(f"rejection budget of {c.max_tries} exhausted for family {family!r}")


@dataclass(frozen=True)
class RankReport:
    space_rank: int
    channel_rank: int
    space_reduced: bool
    channel_reduced: bool
    space_basis: np.ndarray
    channel_basis: np.ndarray
    space_eigenvalues: np.ndarray
    channel_eigenvalues: np.ndarray


def _principal(scatter: np.ndarray, tol: float, side: str):
    evals, evecs = np.linalg.eigh(scatter)
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]
    top = evals[0] if evals.size else 0.0
    if not top > 0:
        raise NullSpaceError(f"{side}_norm", f"null space: {side} data has rank 0")
    keep = evals > tol * top
    return int(keep.sum()), evecs[:, keep], evals


def rank_reduce(obj: ObjectMN, tolerance: float = 1e-9) -> tuple[ObjectMN, RankReport]:
    """Project onto the principal directions whose scatter eigenvalue exceeds ``tolerance * max``."""
    s_scatter, c_scatter = second_moment_matrices(obj)
    m, s_basis, s_evals = _principal(s_scatter, tolerance, "spatial")
    n, c_basis, c_evals = _principal(c_scatter, tolerance, "channel")
    xbar, cbar = centroid(obj)
    report = RankReport(m, n, m < obj.space_dim, n < obj.channel_dim, s_basis, c_basis, s_evals, c_evals)
    if not report.space_reduced and not report.channel_reduced:
        return obj, report
    coords = obj.coords if not report.space_reduced else (obj.coords - xbar) @ s_basis
    channels = obj.channels if not report.channel_reduced else (obj.channels - cbar) @ c_basis
    return ObjectMN(coords, channels, obj.weights), report
