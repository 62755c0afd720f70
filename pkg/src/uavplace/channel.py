"""mmWave air-to-ground channel vectors for a uniform linear array.

Angles are in radians throughout.  The angle of departure of a link is the
elevation from the UAV toward the user, ``arcsin(dz / d)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateLink, EmptyPathSet, ValidationError
from .geometry import distance


@dataclass(frozen=True)
class ArrayConfig:
    """Uniform linear array: ``n_antennas`` elements, spacing over wavelength ``spacing_ratio``."""

    n_antennas: int = 6
    spacing_ratio: float = 0.5

    def __post_init__(self):
        if self.n_antennas < 1:
            raise ValidationError("num_antennas", "must be >= 1")
        if not self.spacing_ratio > 0:
            raise ValidationError("spacing_ratio", "must be > 0")


@dataclass(frozen=True)
class LinkParams:
    gamma: float = 2.0  # path-loss exponent

    def __post_init__(self):
        if not self.gamma >= 0:
            raise ValidationError("path_loss_exponent", "must be >= 0")


@dataclass(frozen=True)
class PathComponent:
    gain: complex
    aod: float


def steering_vector(theta, cfg: ArrayConfig) -> np.ndarray:
    """Unit-norm array response toward ``theta``.

    Entry ``n`` is ``exp(-2j*pi*spacing_ratio*sin(theta)*n) / sqrt(N)``.
    ``theta`` may be an array, in which case the antenna axis is appended last.
    """
    theta = np.asarray(theta, dtype=float)
    n = np.arange(cfg.n_antennas)
    phase = -2.0 * np.pi * cfg.spacing_ratio * np.sin(theta)[..., None] * n
    return np.exp(1j * phase) / np.sqrt(cfg.n_antennas)


def aod(uav: Sequence[float], user: Sequence[float]) -> float:
    d = distance(uav, user)
    if d == 0:
        raise DegenerateLink(f"UAV at {tuple(uav)} coincides with user")
    return float(np.arcsin(np.clip((uav[2] - user[2]) / d, -1.0, 1.0)))


def _path_loss_amplitude(d, gamma: float):
    return 1.0 / np.sqrt(1.0 + np.power(d, gamma))


def los_channel(uav, user, alpha: complex, params: LinkParams, cfg: ArrayConfig) -> np.ndarray:
    """LoS channel ``sqrt(N) * alpha * a(theta) / sqrt(1 + d**gamma)``."""
    theta = aod(uav, user)
    d = distance(uav, user)
    # same evaluation order as multipath_channel so a single path matches bitwise
    return np.sqrt(cfg.n_antennas) * (alpha * steering_vector(theta, cfg)) * _path_loss_amplitude(d, params.gamma)


def multipath_channel(paths: Sequence[PathComponent], d: float, params: LinkParams, cfg: ArrayConfig) -> np.ndarray:
    if len(paths) == 0:
        raise EmptyPathSet("at least one propagation path is required")
    if not d > 0:
        raise DegenerateLink("link distance must be > 0")
    acc = paths[0].gain * steering_vector(paths[0].aod, cfg)
    for p in paths[1:]:
        acc = acc + p.gain * steering_vector(p.aod, cfg)
    return np.sqrt(cfg.n_antennas) * acc * _path_loss_amplitude(d, params.gamma)


def sample_complex_gain(rng: np.random.Generator, size=None):
    """Draw circularly symmetric complex Gaussian gains with unit variance."""
    scale = np.sqrt(0.5)
    g = rng.normal(0.0, scale, size=size) + 1j * rng.normal(0.0, scale, size=size)
    return complex(g) if size is None else g


def los_channels(uavs: np.ndarray, users: np.ndarray, alphas: np.ndarray,
                 params: LinkParams, cfg: ArrayConfig) -> np.ndarray:
    """Vectorized :func:`los_channel` for every (UAV, user) pair.

    Returns an array of shape ``(len(uavs), len(users), N)``.
    """
    uavs = np.asarray(uavs, dtype=float).reshape(-1, 3)
    users = np.asarray(users, dtype=float).reshape(-1, 3)
    diff = uavs[:, None, :] - users[None, :, :]
    d = np.sqrt(np.sum(diff * diff, axis=-1))
    if np.any(d == 0):
        raise DegenerateLink("a candidate UAV position coincides with a user")
    theta = np.arcsin(np.clip(diff[..., 2] / d, -1.0, 1.0))
    amp = np.sqrt(cfg.n_antennas) * np.asarray(alphas)[None, :] * _path_loss_amplitude(d, params.gamma)
    return amp[..., None] * steering_vector(theta, cfg)
