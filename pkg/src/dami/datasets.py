"""Synthetic colored point clouds for tests, benchmarks and the classification harness."""

from __future__ import annotations

import numpy as np

from .core import ObjectMN
from .transform import AffineConstraints, GENERAL, apply_dual, sample_affine


def random_cloud(rng: np.random.Generator | int | None, n_points: int = 100,
                 space_dim: int = 3, channel_dim: int = 3) -> ObjectMN:
    """Gaussian cloud with random anisotropy and independent random channels (full rank a.s.)."""
    rng = np.random.default_rng(rng)
    mix = rng.uniform(-1, 1, (space_dim, space_dim)) + np.eye(space_dim)
    coords = rng.standard_normal((n_points, space_dim)) @ mix.T + rng.uniform(-2, 2, space_dim)
    cmix = rng.uniform(-1, 1, (channel_dim, channel_dim)) + np.eye(channel_dim)
    channels = rng.uniform(0, 1, (n_points, channel_dim)) @ cmix.T
    return ObjectMN(coords, channels)


def _palette(y: np.ndarray, rng: np.random.Generator, channel_dim: int) -> np.ndarray:
    freq = rng.uniform(0.5, 2.0, channel_dim)
    phase = rng.uniform(0, 2 * np.pi, channel_dim)
    bend = rng.uniform(-0.5, 0.5, channel_dim)
    return 0.5 + 0.4 * np.sin(freq * y[:, None] + phase) + bend * y[:, None] ** 2 / (1 + y[:, None] ** 2)


def base_cloud(rng: np.random.Generator | int | None, n_points: int = 500,
               space_dim: int = 3, channel_dim: int = 3) -> ObjectMN:
    """Irregular multi-blob shape whose colors are nonlinear functions of the second coordinate."""
    rng = np.random.default_rng(rng)
    n_blobs = int(rng.integers(2, 6))
    sizes = rng.multinomial(n_points - n_blobs, rng.dirichlet(np.ones(n_blobs))) + 1
    parts = []
    for size in sizes:
        center = rng.uniform(-3, 3, space_dim)
        shape = rng.uniform(-1, 1, (space_dim, space_dim)) * rng.uniform(0.2, 1.5, space_dim)
        parts.append(rng.standard_normal((size, space_dim)) @ shape + center)
    coords = np.vstack(parts)
    y = coords[:, 1 % space_dim]
    channels = _palette(y, rng, channel_dim) + 0.02 * rng.standard_normal((n_points, channel_dim))
    return ObjectMN(coords, channels)


def mirrored_cloud(rng: np.random.Generator | int | None, n_half: int = 50, axis: int = 2,
                   space_dim: int = 3, channel_dim: int = 3) -> ObjectMN:
    """Cloud symmetric about the coordinate plane ``x[axis] = 0``; mirrored points share colors."""
    half = random_cloud(rng, n_half, space_dim, channel_dim)
    coords = half.coords - half.coords.mean(axis=0)
    flipped = coords.copy()
    flipped[:, axis] = -flipped[:, axis]
    return ObjectMN(np.vstack([coords, flipped]), np.vstack([half.channels, half.channels]))


def classification_dataset(classes: int = 10, variants: int = 13, n_points: int = 500, seed: int = 0,
                           constraints: AffineConstraints | None = None) -> list[tuple[str, ObjectMN]]:
    """``classes`` base clouds, each with ``variants`` dual-affine copies; returns ``(label, object)`` pairs."""
    ss = np.random.SeedSequence(seed)
    base_seeds, map_seeds = ss.spawn(2)
    bases = [base_cloud(np.random.default_rng(s), n_points) for s in base_seeds.spawn(classes)]
    rng = np.random.default_rng(map_seeds)
    out = []
    for label, obj in enumerate(bases):
        out.append((str(label), obj))
        for _ in range(variants):
            spatial = sample_affine(obj.space_dim, rng, GENERAL, constraints)
            channel = sample_affine(obj.channel_dim, rng, GENERAL, constraints)
            out.append((str(label), apply_dual(obj, spatial, channel)))
    return out
