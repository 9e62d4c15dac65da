"""Zero-forcing digital precoder with total transmit-power normalization."""

from dataclasses import dataclass

import numpy as np

from .linalg import DimensionError, SingularMatrixError, hermitian, inverse, matmul, trace

__all__ = [
    "RankDeficiencyError",
    "Precoder",
    "effective_channel",
    "zf_precoder",
    "zf_precoders",
]


class RankDeficiencyError(ValueError):
    """The effective channel does not have full row rank."""


@dataclass(frozen=True)
class Precoder:
    b_matrix: np.ndarray  # (N_RF, K)
    beta: float
    p_max: float

    def column(self, k):
        return self.b_matrix[:, k]


def effective_channel(h, c_m):
    """``H^H C_m`` as a ``K x N_RF`` matrix.

    ``h`` is either a :class:`~gsm_mimo.channel.ChannelRealization` or the
    raw ``N_T x K`` channel matrix.
    """
    h = np.asarray(getattr(h, "h_matrix", h))
    c_m = np.asarray(c_m)
    if h.shape[0] != c_m.shape[0]:
        raise DimensionError(
            f"channel has {h.shape[0]} antennas but selection matrix has {c_m.shape[0]} rows"
        )
    return matmul(hermitian(h), c_m)


def zf_precoders(h_eff, p_max):
    """Vectorized ZF over a stack of effective channels.

    Parameters
    ----------
    h_eff : array, shape (..., K, N_RF)
    p_max : float
        Total transmit power budget in Watt.

    Returns
    -------
    b : array, shape (..., N_RF, K)
    beta : array, shape (...)
    """
    h_eff = np.asarray(h_eff)
    k, n_rf = h_eff.shape[-2:]
    if k > n_rf:
        raise RankDeficiencyError(f"zero-forcing needs K <= N_RF, got K={k}, N_RF={n_rf}")
    h_eff_h = hermitian(h_eff)
    gram = matmul(h_eff, h_eff_h)
    try:
        gram_inv = inverse(gram)
    except SingularMatrixError as exc:
        raise RankDeficiencyError(str(exc)) from exc
    tr = trace(gram_inv).real
    beta = np.sqrt(p_max / tr)
    b = beta[..., None, None] * matmul(h_eff_h, gram_inv)
    return b, beta


def zf_precoder(h_eff, p_max):
    """ZF precoder ``B = beta * H_eff^H (H_eff H_eff^H)^-1`` with ``tr(B B^H) = p_max``."""
    h_eff = np.asarray(h_eff)
    if h_eff.ndim != 2:
        raise DimensionError(f"expected a K x N_RF matrix, got shape {h_eff.shape}")
    b, beta = zf_precoders(h_eff, p_max)
    return Precoder(b_matrix=b, beta=float(beta), p_max=float(p_max))
