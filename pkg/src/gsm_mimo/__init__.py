"""Energy efficiency of GSM-aided massive MIMO downlinks.

Monte-Carlo link-level simulator comparing a generalized-spatial-modulation
(GSM) massive MIMO base station, which drives N_RF < N_T RF chains through
switchable antenna groups, with a conventional one-RF-chain-per-antenna
array. Both use zero-forcing precoding; the comparison covers spectral
efficiency, a transmission + computation + fixed power model, and their
ratio, the energy efficiency.
"""

__version__ = "0.1.0"

from .channel import ChannelModel, ChannelRealization  # noqa: E402
from .gsm import GsmCodebook  # noqa: E402
from .power import PowerBreakdown, PowerParams, total_power  # noqa: E402
from .sim import ConfigError, EeReport, SystemConfig, run_trial, sweep  # noqa: E402

__all__ = [
    "ChannelModel",
    "ChannelRealization",
    "ConfigError",
    "EeReport",
    "GsmCodebook",
    "PowerBreakdown",
    "PowerParams",
    "SystemConfig",
    "run_trial",
    "sweep",
    "total_power",
]
