"""GSM codebook: which antenna groups are active for each spatial symbol."""

import itertools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = [
    "MAX_GROUPS",
    "GsmCodebook",
    "valid_combination_count",
    "enumerate_combinations",
    "build_gsm_matrix",
]

MAX_GROUPS = 64
# largest codebook whose index table is held in memory
MAX_CODEBOOK_SIZE = 1 << 24


def valid_combination_count(n_m, n_rf):
    """Number of usable group combinations, the largest power of two <= C(n_m, n_rf)."""
    if not 1 <= n_rf:
        raise ValueError(f"n_rf must be >= 1, got {n_rf}")
    if n_rf > n_m:
        raise ValueError(f"N_m >= N_RF violated: n_m={n_m}, n_rf={n_rf}")
    if n_m > MAX_GROUPS:
        raise ValueError(f"n_m must be <= {MAX_GROUPS}, got {n_m}")
    total = math.comb(n_m, n_rf)
    if total >= 1 << 63:
        raise OverflowError(f"C({n_m}, {n_rf}) does not fit in 64 bits")
    return 1 << (total.bit_length() - 1)


def enumerate_combinations(n_m, n_rf, m_count):
    """First ``m_count`` ``n_rf``-subsets of ``{1..n_m}`` in lexicographic order."""
    if m_count > math.comb(n_m, n_rf):
        raise ValueError(
            f"m_count={m_count} exceeds C({n_m}, {n_rf})={math.comb(n_m, n_rf)}"
        )
    subsets = itertools.combinations(range(1, n_m + 1), n_rf)
    return [list(u) for u in itertools.islice(subsets, m_count)]


def build_gsm_matrix(u, n_m, n_k):
    """Selection matrix for one combination of active groups.

    Column ``i`` is ``1/sqrt(n_k)`` on the ``n_k`` antennas of group ``u[i]``
    (1-based) and zero elsewhere, so every column has unit norm.
    """
    u = [int(g) for g in u]
    if len(set(u)) != len(u):
        raise ValueError(f"duplicate group indices in {u}")
    if any(g < 1 or g > n_m for g in u):
        raise ValueError(f"group indices must lie in 1..{n_m}, got {u}")
    c = np.zeros((n_m * n_k, len(u)), dtype=np.complex128)
    for col, g in enumerate(u):
        c[(g - 1) * n_k : g * n_k, col] = 1.0 / math.sqrt(n_k)
    return c


@dataclass(frozen=True)
class GsmCodebook:
    """The ``M`` valid group combinations for an ``(n_m, n_k, n_rf)`` array.

    ``groups`` holds the combinations as a 0-based ``(M, n_rf)`` integer
    array, which is the form the simulator uses. Full ``N_T x N_RF`` matrices
    are built on first access to :attr:`matrices`, or one at a time through
    :meth:`matrix`.
    """

    n_m: int
    n_k: int
    n_rf: int

    def __post_init__(self):
        if self.n_k < 1:
            raise ValueError(f"n_k must be >= 1, got {self.n_k}")
        if self.m_count > MAX_CODEBOOK_SIZE:
            raise ValueError(
                f"codebook with M={self.m_count} combinations is too large to enumerate"
            )

    @property
    def n_t(self):
        return self.n_m * self.n_k

    @cached_property
    def m_count(self):
        return valid_combination_count(self.n_m, self.n_rf)

    @cached_property
    def groups(self):
        subsets = itertools.combinations(range(self.n_m), self.n_rf)
        flat = itertools.chain.from_iterable(itertools.islice(subsets, self.m_count))
        g = np.fromiter(flat, dtype=np.intp, count=self.m_count * self.n_rf)
        g = g.reshape(self.m_count, self.n_rf)
        g.setflags(write=False)
        return g

    @property
    def combinations(self):
        """1-based index vectors, one per combination."""
        return (self.groups + 1).tolist()

    def matrix(self, m):
        return build_gsm_matrix(self.groups[m] + 1, self.n_m, self.n_k)

    @cached_property
    def matrices(self):
        c = np.zeros((self.m_count, self.n_t, self.n_rf), dtype=np.complex128)
        rows = self.groups[:, :, None] * self.n_k + np.arange(self.n_k)
        cols = np.broadcast_to(np.arange(self.n_rf)[None, :, None], rows.shape)
        ms = np.broadcast_to(np.arange(self.m_count)[:, None, None], rows.shape)
        c[ms, rows, cols] = 1.0 / math.sqrt(self.n_k)
        c.setflags(write=False)
        return c

    def group_channel(self, h):
        """Per-group channel gains, shape ``(K, n_m)``.

        Entry ``(k, g)`` is ``h_k^H`` applied to the normalized indicator of
        group ``g``. Indexing its columns with ``groups[m]`` gives the
        effective channel ``H^H C_m`` without forming ``C_m``.
        """
        h = np.asarray(h)
        if h.shape[0] != self.n_t:
            raise ValueError(f"channel has {h.shape[0]} rows, codebook expects {self.n_t}")
        k = h.shape[1]
        return np.conj(h.T).reshape(k, self.n_m, self.n_k).sum(axis=-1) / math.sqrt(self.n_k)

    def effective_channels(self, h):
        """Stack of effective channels ``H^H C_m`` for every m, shape ``(M, K, n_rf)``."""
        g = self.group_channel(h)
        return np.transpose(g[:, self.groups], (1, 0, 2))
