"""Spectral efficiency of GSM and conventional ZF downlinks.

With a GSM transmitter, user ``k`` sees a zero-mean complex Gaussian whose
variance ``Sigma_m`` depends on the active combination ``m``. Its spectral
efficiency is the APM part (information in the symbols given ``m``) plus
the spatial part (information about ``m`` carried by the variance).
"""

import math
from dataclasses import dataclass

import numba
import numpy as np
from scipy.special import logsumexp

__all__ = [
    "CovarianceSet",
    "SeResult",
    "covariance",
    "apm_mutual_info",
    "spatial_mutual_info_raw",
    "spatial_mutual_info_approx",
    "spatial_mutual_info_mc",
    "gsm_se_terms",
    "gsm_user_se",
    "conventional_se",
    "conventional_user_se",
    "total_rate",
]


@dataclass(frozen=True)
class CovarianceSet:
    """Received-signal variances of one user, one per combination."""

    sigmas: np.ndarray
    noise_var: float

    def __post_init__(self):
        sigmas = np.asarray(self.sigmas, dtype=float).reshape(-1)
        if sigmas.size < 1:
            raise ValueError("need at least one covariance")
        if not self.noise_var > 0:
            raise ValueError(f"noise_var must be > 0, got {self.noise_var}")
        # rounding in sigma = noise + |s|^2 can never take it below noise
        if np.any(sigmas < self.noise_var):
            raise ValueError("every covariance must be >= noise_var")
        object.__setattr__(self, "sigmas", sigmas)

    @property
    def m_count(self):
        return self.sigmas.size


@dataclass(frozen=True)
class SeResult:
    per_user_se: np.ndarray  # bit/s/Hz
    apm_component: np.ndarray  # bit/s/Hz
    spatial_component: np.ndarray  # bit/s/Hz
    total_rate: float  # bit/s


def covariance(h_k, c_m, b_k, noise_var):
    """``noise_var + |h_k^H C_m b_k|^2``."""
    h_k = np.asarray(h_k).reshape(-1)
    b_k = np.asarray(b_k).reshape(-1)
    c_m = np.asarray(c_m)
    if c_m.shape != (h_k.size, b_k.size):
        raise ValueError(
            f"selection matrix shape {c_m.shape} does not match "
            f"h_k ({h_k.size}) and b_k ({b_k.size})"
        )
    s = np.vdot(h_k, c_m @ b_k)
    return float(noise_var + abs(s) ** 2)


def apm_mutual_info(cov):
    return float(np.mean(np.log2(cov.sigmas / cov.noise_var)))


@numba.njit(cache=True, fastmath=True)
def _pairwise_sums(sigmas):
    # every term lies in (0, 1), so plain accumulation stays accurate to ~M*eps
    m = sigmas.size
    out = np.empty(m)
    for n in range(m):
        s_n = sigmas[n]
        acc = 0.0
        for t in range(m):
            acc += s_n / (s_n + sigmas[t])
        out[n] = acc
    return out


def spatial_mutual_info_raw(sigmas):
    """Closed-form spatial information before clamping; may leave ``[0, log2 M]``."""
    sigmas = np.asarray(sigmas, dtype=float).reshape(-1)
    m = sigmas.size
    return math.log2(m / 2) - float(np.mean(np.log2(_pairwise_sums(sigmas))))


def spatial_mutual_info_approx(cov):
    """Spatial information in bit/s/Hz, clamped to ``[0, log2 M]``."""
    raw = spatial_mutual_info_raw(cov.sigmas)
    return min(max(raw, 0.0), math.log2(cov.m_count))


def spatial_mutual_info_mc(cov, samples, rng):
    """Monte-Carlo estimate of the exact spatial mutual information.

    For each hypothesis ``n`` draws ``samples`` outputs ``y ~ CN(0, Sigma_n)``
    and averages ``log2 p(y|n) - log2 mean_t p(y|t)``.

    Returns
    -------
    estimate : float
        Bits per channel use.
    stderr : float
        Standard error of the estimate (hypotheses are equally sized strata).
    """
    if samples < 1000:
        raise ValueError(f"need at least 1000 samples, got {samples}")
    sig = cov.sigmas
    m = sig.size
    log_m = math.log(m)
    means = np.empty(m)
    variances = np.empty(m)
    for n in range(m):
        y = math.sqrt(sig[n] / 2) * (
            rng.standard_normal(samples) + 1j * rng.standard_normal(samples)
        )
        power = np.abs(y) ** 2
        # natural-log densities of y under every hypothesis, (M, samples)
        log_p = -np.log(np.pi * sig)[:, None] - power[None, :] / sig[:, None]
        val = (log_p[n] - (logsumexp(log_p, axis=0) - log_m)) / math.log(2)
        means[n] = val.mean()
        variances[n] = val.var(ddof=1)
    estimate = float(means.mean())
    stderr = float(math.sqrt(variances.sum() / samples) / m)
    return estimate, stderr


def gsm_se_terms(sigmas, noise_var):
    """APM and clamped spatial terms for a batch of users.

    Parameters
    ----------
    sigmas : array, shape (K, M)
        Row ``k`` holds the covariances of user ``k``.

    Returns
    -------
    apm, spatial, spatial_raw : arrays of shape (K,)
    """
    sigmas = np.atleast_2d(np.asarray(sigmas, dtype=float))
    m = sigmas.shape[1]
    apm = np.mean(np.log2(sigmas / noise_var), axis=1)
    raw = np.array([spatial_mutual_info_raw(row) for row in sigmas])
    spatial = np.clip(raw, 0.0, math.log2(m))
    return apm, spatial, raw


def gsm_user_se(h_k, codebook, precoders, noise_var):
    """Per-user GSM spectral efficiency in bit/s/Hz.

    ``precoders`` holds the user's precoding column ``b_k`` for every
    combination, in codebook order (a sequence of vectors or an
    ``(M, N_RF)`` array).
    """
    precoders = list(precoders)
    if len(precoders) != codebook.m_count:
        raise ValueError(
            f"need one precoder per combination ({codebook.m_count}), got {len(precoders)}"
        )
    sigmas = [
        covariance(h_k, codebook.matrix(m), b_k, noise_var)
        for m, b_k in enumerate(precoders)
    ]
    cov = CovarianceSet(np.array(sigmas), noise_var)
    return apm_mutual_info(cov) + spatial_mutual_info_approx(cov)


def conventional_se(h, b, noise_var):
    """SINR capacity of every user for channel ``h`` (N_T x K) and precoder ``b`` (N_T x K)."""
    gains = np.abs(np.conj(np.asarray(h)).T @ np.asarray(b)) ** 2  # (K users, K streams)
    signal = np.diag(gains)
    interference = gains.sum(axis=1) - signal
    return np.log2(1.0 + signal / (interference + noise_var))


def conventional_user_se(h_k, precoder_columns, k, noise_var):
    """SINR capacity of user ``k`` given all users' precoding columns."""
    h_k = np.asarray(h_k).reshape(-1)
    gains = np.array([abs(np.vdot(h_k, np.asarray(b).reshape(-1))) ** 2 for b in precoder_columns])
    interference = math.fsum(np.delete(gains, k))
    return float(np.log2(1.0 + gains[k] / (interference + noise_var)))


def total_rate(per_user_se, w):
    return w * math.fsum(np.asarray(per_user_se, dtype=float).reshape(-1))
