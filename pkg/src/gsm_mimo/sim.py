"""Monte-Carlo trial engine and parameter sweeps."""

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .channel import ChannelModel, Purpose, draw_channel, draw_distances, substream, thermal_noise_power
from .gsm import GsmCodebook
from .power import PowerBreakdown, PowerParams, total_power
from .precoding import RankDeficiencyError, zf_precoders
from .se import conventional_se, gsm_se_terms

__all__ = [
    "MODES",
    "ConfigError",
    "SystemConfig",
    "TrialResult",
    "Stat",
    "PointResult",
    "EeReport",
    "run_trial",
    "sweep",
    "resolve_workers",
]

MODES = ("gsm", "baseline")
SWEEP_VARIABLES = ("users", "rf_chains")
MAX_REJECTIONS = 100
THREADS_ENV = "GSM_MIMO_THREADS"

# per-point metrics aggregated across trials, in report order
METRICS = (
    "se",
    "se_per_user",
    "apm",
    "spatial",
    "r_total",
    "ee",
    "p_pa",
    "p_rf_chains",
    "p_switch",
    "p_ce",
    "p_cd",
    "p_lp",
    "p_fix",
    "p_t",
    "p_c",
    "p_total",
)


class ConfigError(ValueError):
    """Invalid or unusable system configuration."""


@dataclass(frozen=True)
class SystemConfig:
    """One simulated scenario. Defaults reproduce the reference setup.

    ``noise_var=None`` resolves to thermal noise over the configured
    bandwidth (-174 dBm/Hz, 9 dB noise figure). In baseline mode every
    antenna has its own RF chain and ``n_rf`` is ignored.
    """

    n_t: int = 128
    n_m: int = 64
    n_k: int = 2
    n_rf: int = 63
    k: int = 10
    channel: ChannelModel = field(default_factory=ChannelModel)
    power: PowerParams = field(default_factory=PowerParams)
    noise_var: float = None
    trials: int = 500
    seed: int = 0
    mode: str = "gsm"

    def __post_init__(self):
        if self.noise_var is None:
            object.__setattr__(self, "noise_var", thermal_noise_power(self.power.w))
        self.validate()

    def validate(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        for name in ("n_t", "n_m", "n_k", "n_rf", "k", "trials"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        if self.n_t != self.n_m * self.n_k:
            raise ConfigError(
                f"N_T = N_m × N_k violated: n_t={self.n_t}, n_m*n_k={self.n_m * self.n_k}"
            )
        if not 0 <= self.seed < 1 << 64:
            raise ConfigError(f"seed must fit in 64 unsigned bits, got {self.seed}")
        if not self.noise_var > 0:
            raise ConfigError(f"noise_var must be > 0, got {self.noise_var}")
        if self.mode == "gsm":
            if self.n_rf > self.n_m:
                raise ConfigError(f"N_m ≥ N_RF violated: n_m={self.n_m}, n_rf={self.n_rf}")
            if self.k > self.n_rf:
                raise ConfigError(f"K ≤ N_RF violated: k={self.k}, n_rf={self.n_rf}")
        elif self.k > self.n_t:
            raise ConfigError(f"K ≤ N_T violated: k={self.k}, n_t={self.n_t}")

    @property
    def active_rf_chains(self):
        return self.n_rf if self.mode == "gsm" else self.n_t


@lru_cache(maxsize=32)
def _codebook(n_m, n_k, n_rf):
    return GsmCodebook(n_m, n_k, n_rf)


@dataclass(frozen=True)
class TrialResult:
    per_user_se: np.ndarray
    apm: np.ndarray
    spatial: np.ndarray
    spatial_raw: np.ndarray
    r_total: float
    power: PowerBreakdown
    ee: float
    rejections: int

    def metrics(self):
        p = self.power
        return {
            "se": math.fsum(self.per_user_se),
            "se_per_user": float(np.mean(self.per_user_se)),
            "apm": float(np.mean(self.apm)),
            "spatial": float(np.mean(self.spatial)),
            "r_total": self.r_total,
            "ee": self.ee,
            "p_pa": p.p_pa,
            "p_rf_chains": p.p_rf_chains,
            "p_switch": p.p_switch,
            "p_ce": p.p_ce,
            "p_cd": p.p_cd,
            "p_lp": p.p_lp,
            "p_fix": p.p_fix,
            "p_t": p.p_t,
            "p_c": p.p_c,
            "p_total": p.p_total,
        }


def _draw(config, point, trial, attempt):
    mode = MODES.index(config.mode)
    key = (point, mode, trial, attempt)
    d = draw_distances(config.k, config.channel, substream(config.seed, *key, Purpose.DISTANCES))
    return draw_channel(config.n_t, d, config.channel, substream(config.seed, *key, Purpose.CHANNEL))


def _gsm_se(config, h):
    codebook = _codebook(config.n_m, config.n_k, config.n_rf)
    h_eff = codebook.effective_channels(h)  # (M, K, N_RF)
    b, _ = zf_precoders(h_eff, config.power.p_max)  # (M, N_RF, K)
    # (h_k^H C_m) b_k(m) for every user k and combination m
    signal = np.abs(np.einsum("mkj,mjk->km", h_eff, b)) ** 2
    sigmas = config.noise_var + signal
    apm, spatial, raw = gsm_se_terms(sigmas, config.noise_var)
    return apm + spatial, apm, spatial, raw


def _baseline_se(config, h):
    b, _ = zf_precoders(np.conj(h.T), config.power.p_max)
    se = conventional_se(h, b, config.noise_var)
    zeros = np.zeros_like(se)
    return se, se, zeros, zeros


def run_trial(config, trial_index, point=0):
    """Simulate one channel realization.

    The trial is fully determined by ``(config.seed, point, config.mode,
    trial_index)``. Channels whose ZF Gram matrix is numerically singular
    are redrawn from the next attempt substream.
    """
    for attempt in range(MAX_REJECTIONS):
        h = _draw(config, point, trial_index, attempt).h_matrix
        try:
            if config.mode == "gsm":
                se, apm, spatial, raw = _gsm_se(config, h)
            else:
                se, apm, spatial, raw = _baseline_se(config, h)
        except RankDeficiencyError:
            continue
        break
    else:
        raise ConfigError(
            f"{MAX_REJECTIONS} consecutive rank-deficient channels in trial {trial_index}"
        )

    r_total = config.power.w * math.fsum(se)
    power = total_power(
        config.power,
        n_t=config.n_t,
        n_rf=config.active_rf_chains,
        k=config.k,
        r_total=r_total,
        with_switches=config.mode == "gsm",
    )
    return TrialResult(
        per_user_se=se,
        apm=apm,
        spatial=spatial,
        spatial_raw=raw,
        r_total=r_total,
        power=power,
        ee=r_total / power.p_total,
        rejections=attempt,
    )


@dataclass(frozen=True)
class Stat:
    mean: float
    stderr: float

    @classmethod
    def of(cls, values):
        values = [float(v) for v in values]
        n = len(values)
        mean = math.fsum(values) / n
        if n < 2:
            return cls(mean, math.nan)
        var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
        return cls(mean, math.sqrt(var / n))


@dataclass(frozen=True)
class PointResult:
    value: int
    mode: str
    trials: int = 0
    rejected: int = 0
    stats: dict = field(default_factory=dict)
    ee_ratio_of_means: float = math.nan
    skipped: str = None

    def __getitem__(self, metric):
        return self.stats[metric]


@dataclass(frozen=True)
class EeReport:
    variable: str
    values: tuple
    points: tuple

    def point(self, value, mode):
        for p in self.points:
            if p.value == value and p.mode == mode:
                return p
        raise KeyError((value, mode))

    def series(self, mode, metric):
        """``(values, means, stderrs)`` over the non-skipped points of one mode."""
        pts = [p for p in self.points if p.mode == mode and p.skipped is None]
        return (
            [p.value for p in pts],
            [p[metric].mean for p in pts],
            [p[metric].stderr for p in pts],
        )


def resolve_workers(workers=None):
    """Worker count from the argument, else ``GSM_MIMO_THREADS``; 0 means one per CPU."""
    if workers is None:
        workers = int(os.environ.get(THREADS_ENV, "0") or 0)
    if workers < 0:
        raise ConfigError(f"worker count must be >= 0, got {workers}")
    return workers or os.cpu_count() or 1


def _run_chunk(config, point, trials):
    out = []
    for t in trials:
        r = run_trial(config, t, point)
        out.append((r.metrics(), r.rejections))
    return out


def _point_config(template, variable, value, mode):
    if variable == "users":
        return replace(template, k=value, mode=mode)
    return replace(template, n_rf=value, mode=mode)


def sweep(template, variable, values, modes=MODES, workers=None):
    """Run ``template.trials`` trials at every sweep point for every mode.

    Points whose configuration is invalid (e.g. more users than RF chains)
    appear in the report with ``skipped`` set to the reason. Trials of point
    ``i`` draw from substreams keyed by ``(i, mode, trial)``, so the report
    is identical for any worker count.
    """
    if variable not in SWEEP_VARIABLES:
        raise ConfigError(f"sweep variable must be one of {SWEEP_VARIABLES}, got {variable!r}")
    values = tuple(int(v) for v in values)
    if not values:
        raise ConfigError("sweep needs at least one value")
    modes = tuple(modes)
    for mode in modes:
        if mode not in MODES:
            raise ConfigError(f"unknown mode {mode!r}")

    jobs = []  # (point index, value, mode, config or skip reason)
    for i, value in enumerate(values):
        for mode in modes:
            try:
                jobs.append((i, value, mode, _point_config(template, variable, value, mode)))
            except ConfigError as exc:
                jobs.append((i, value, mode, str(exc)))

    n_workers = resolve_workers(workers)
    tasks = []
    for i, _, _, cfg in jobs:
        if isinstance(cfg, str):
            continue
        trials = range(cfg.trials)
        n_chunks = max(1, min(len(trials), 4 * n_workers))
        for c in range(n_chunks):
            tasks.append((cfg, i, list(trials[c::n_chunks])))

    if n_workers == 1:
        chunks = [_run_chunk(*t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            chunks = list(pool.map(_run_chunk, *zip(*tasks))) if tasks else []

    results = {}
    for (cfg, i, trials), chunk in zip(tasks, chunks):
        per_trial = results.setdefault((i, cfg.mode), {})
        per_trial.update(zip(trials, chunk))

    points = []
    for i, value, mode, cfg in jobs:
        if isinstance(cfg, str):
            points.append(PointResult(value=value, mode=mode, skipped=cfg))
            continue
        ordered = [results[(i, mode)][t] for t in range(cfg.trials)]
        metrics = [m for m, _ in ordered]
        stats = {name: Stat.of(m[name] for m in metrics) for name in METRICS}
        points.append(
            PointResult(
                value=value,
                mode=mode,
                trials=cfg.trials,
                rejected=sum(r for _, r in ordered),
                stats=stats,
                ee_ratio_of_means=stats["r_total"].mean / stats["p_total"].mean,
            )
        )
    return EeReport(variable=variable, values=values, points=tuple(points))
