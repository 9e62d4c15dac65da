"""Base-station power model: transmission + computation + fixed.

All values are in Watt. Computation terms convert floating-point operation
rates to power through the baseband efficiency ``l_bs`` (flops per Watt);
pilot and precoder work happens once per coherence block, i.e. ``w / u``
times per second.
"""

from dataclasses import asdict, dataclass, fields

__all__ = [
    "PowerParams",
    "PowerBreakdown",
    "transmission_power",
    "channel_estimation_power",
    "coding_power",
    "linear_processing_power",
    "total_power",
]


@dataclass(frozen=True)
class PowerParams:
    p_max: float = 1.0  # W, transmit budget
    gamma: float = 0.39  # PA efficiency
    p_rf: float = 0.048  # W per RF chain
    p_each_switch: float = 0.005  # W per switch
    w: float = 20e6  # Hz
    u: float = 1800  # symbols per coherence block
    tau: float = 1.0  # pilot length relative to K
    p_cod: float = 1e-10  # W per bit/s
    l_bs: float = 12.8e9  # flops per W
    p_fix: float = 1.0  # W

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not value > 0:
                raise ValueError(f"{f.name} must be > 0, got {value}")
        if self.gamma > 1:
            raise ValueError(f"gamma must lie in (0, 1], got {self.gamma}")


@dataclass(frozen=True)
class PowerBreakdown:
    p_pa: float
    p_rf_chains: float
    p_switch: float
    p_ce: float
    p_cd: float
    p_lp: float
    p_fix: float

    @property
    def p_t(self):
        return self.p_pa + self.p_rf_chains + self.p_switch

    @property
    def p_c(self):
        return self.p_ce + self.p_cd + self.p_lp

    @property
    def p_total(self):
        return self.p_t + self.p_c + self.p_fix

    @property
    def computation_share(self):
        return self.p_c / self.p_total

    def as_dict(self):
        d = asdict(self)
        d.update(p_t=self.p_t, p_c=self.p_c, p_total=self.p_total)
        return d


def transmission_power(params, n_rf, with_switches=True):
    """``(p_pa, p_rf_chains, p_switch)``; switches only exist in the GSM architecture."""
    if n_rf < 1:
        raise ValueError(f"n_rf must be >= 1, got {n_rf}")
    p_pa = params.p_max / params.gamma
    p_rf_chains = n_rf * params.p_rf
    p_switch = n_rf * params.p_each_switch if with_switches else 0.0
    return p_pa, p_rf_chains, p_switch


def channel_estimation_power(params, n_t, k):
    return params.w / params.u * 2 * params.tau * n_t * k**2 / params.l_bs


def coding_power(params, r_total):
    if r_total < 0:
        raise ValueError(f"r_total must be >= 0, got {r_total}")
    return params.p_cod * r_total


def linear_processing_power(params, n_rf, k):
    """ZF precoder computation once per block plus one matrix-vector product per symbol."""
    per_block = 16 * k**2 * n_rf + 12 * k**3 + 8 * n_rf * k
    per_symbol = 8 * n_rf * k
    return params.w / params.u * per_block / params.l_bs + params.w * per_symbol / params.l_bs


def total_power(params, n_t, n_rf, k, r_total, with_switches=True):
    p_pa, p_rf_chains, p_switch = transmission_power(params, n_rf, with_switches)
    return PowerBreakdown(
        p_pa=p_pa,
        p_rf_chains=p_rf_chains,
        p_switch=p_switch,
        p_ce=channel_estimation_power(params, n_t, k),
        p_cd=coding_power(params, r_total),
        p_lp=linear_processing_power(params, n_rf, k),
        p_fix=params.p_fix,
    )
