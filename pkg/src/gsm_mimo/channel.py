"""Rayleigh channel with distance-dependent attenuation, and seeded RNG substreams.

Random streams
--------------
Every random draw comes from ``substream(seed, *key)``, a PCG64 generator
seeded by ``numpy.random.SeedSequence(seed, spawn_key=key)``. The simulator
keys trials by ``(point, mode, trial, attempt, purpose)`` so a trial's
numbers do not depend on which worker runs it or in which order.
"""

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "D_BAR",
    "ALPHA",
    "D_MIN",
    "D_MAX",
    "Purpose",
    "ChannelModel",
    "ChannelRealization",
    "substream",
    "path_loss",
    "draw_distances",
    "draw_channel",
    "thermal_noise_power",
]

D_BAR = 10 ** -3.53
ALPHA = 3.76
D_MIN = 35.0  # m
D_MAX = 250.0  # m


class Purpose:
    """Stream purposes; the last element of every substream key."""

    DISTANCES = 0
    CHANNEL = 1
    MUTUAL_INFO = 2


def substream(seed, *key):
    """Independent generator for ``(seed, key)``; ``key`` is a tuple of non-negative ints."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class ChannelModel:
    d_bar: float = D_BAR
    alpha: float = ALPHA
    d_min: float = D_MIN
    d_max: float = D_MAX

    def __post_init__(self):
        if not self.d_bar > 0:
            raise ValueError(f"d_bar must be > 0, got {self.d_bar}")
        if not self.alpha > 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        if not 0 < self.d_min <= self.d_max:
            raise ValueError(
                f"need 0 < d_min <= d_max, got d_min={self.d_min}, d_max={self.d_max}"
            )


@dataclass(frozen=True)
class ChannelRealization:
    distances: np.ndarray  # (K,) metres
    h_matrix: np.ndarray  # (N_T, K), column k is h_k

    @property
    def n_t(self):
        return self.h_matrix.shape[0]

    @property
    def k(self):
        return self.h_matrix.shape[1]


def path_loss(d, model):
    """Attenuation ``d_bar * d**-alpha``; accepts scalars or arrays."""
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ValueError("distance must be > 0")
    out = model.d_bar * d ** (-model.alpha)
    return float(out) if out.ndim == 0 else out


def draw_distances(k, model, rng):
    """``k`` user distances, i.i.d. uniform on ``[d_min, d_max]``."""
    if k < 1:
        raise ValueError(f"need at least one user, got k={k}")
    return rng.uniform(model.d_min, model.d_max, size=k)


def draw_channel(n_t, distances, model, rng):
    """Rayleigh channel ``h_k ~ CN(0, l(d_k) I)``.

    Real parts of the whole ``(n_t, K)`` matrix are drawn first, then the
    imaginary parts, each scaled by ``sqrt(l(d_k)/2)``.
    """
    if n_t < 1:
        raise ValueError(f"n_t must be >= 1, got {n_t}")
    distances = np.asarray(distances, dtype=float)
    k = distances.size
    scale = np.sqrt(path_loss(distances, model) / 2.0)
    re = rng.standard_normal((n_t, k))
    im = rng.standard_normal((n_t, k))
    h = (re + 1j * im) * scale
    return ChannelRealization(distances=distances, h_matrix=h)


def thermal_noise_power(bandwidth, noise_figure_db=9.0, density_dbm_hz=-174.0):
    """Receiver noise power in Watt for the given bandwidth."""
    dbm = density_dbm_hz + 10.0 * math.log10(bandwidth) + noise_figure_db
    return 10.0 ** ((dbm - 30.0) / 10.0)
