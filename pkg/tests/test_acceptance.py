"""End-to-end acceptance criteria.

Each test records one ``PASS``/``FAIL`` line, printed in the pytest terminal
summary, and then asserts. Tolerances are the stated ones; nothing is
loosened to make a criterion pass.
"""

import itertools
import math
import time
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import ACCEPTANCE_LINES
from gsm_mimo import cli
from gsm_mimo.channel import substream
from gsm_mimo.gsm import GsmCodebook
from gsm_mimo.power import PowerParams, channel_estimation_power, linear_processing_power, total_power
from gsm_mimo.precoding import zf_precoders
from gsm_mimo.se import (
    CovarianceSet,
    gsm_se_terms,
    spatial_mutual_info_approx,
    spatial_mutual_info_mc,
)
from gsm_mimo.sim import SystemConfig, run_trial, sweep

from reference import reference_trial

pytestmark = pytest.mark.slow

USERS = tuple(range(2, 21, 2))
TRIALS = 500
FIG6_TRIALS = 100  # M reaches 4096 at N_RF = 10, 11; one trial costs ~0.3 s per CPU


def record(number, ok, detail):
    ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
    assert ok, detail


@pytest.fixture(scope="module")
def users_sweep():
    """Reference setup, users sweep, 500 trials per point and mode."""
    template = SystemConfig(trials=TRIALS)
    start = time.perf_counter()
    gsm = sweep(template, "users", USERS, modes=("gsm",))
    gsm_seconds = time.perf_counter() - start
    start = time.perf_counter()
    base = sweep(template, "users", USERS, modes=("baseline",))
    total_seconds = gsm_seconds + time.perf_counter() - start
    points = {(p.value, p.mode): p for p in gsm.points + base.points}
    return points, gsm_seconds, total_seconds


def test_criterion_1_power_arithmetic():
    p = PowerParams()
    gsm = total_power(p, n_t=128, n_rf=63, k=10, r_total=0.0)
    base = total_power(p, n_t=128, n_rf=128, k=10, r_total=0.0, with_switches=False)
    checks = {
        "P_T": (gsm.p_t, 5.903103),
        "P_CE": (channel_estimation_power(p, 128, 10), 0.0222222),
        "P_LP": (linear_processing_power(p, 63, 10), 7.977292),
        "P_total gsm": (gsm.p_total, 14.902617),
        "P_total baseline": (base.p_total, 25.927426),
    }
    errs = {k: abs(v - ref) / ref for k, (v, ref) in checks.items()}
    worst = max(errs, key=errs.get)
    record(1, errs[worst] <= 1e-6, f"power arithmetic, worst rel err {errs[worst]:.2e} ({worst}) <= 1e-6")


def test_criterion_2_computation_share(users_sweep):
    points, gsm_seconds, _ = users_sweep
    shares = {k: points[(k, "gsm")]["p_c"].mean / points[(k, "gsm")]["p_total"].mean for k in USERS if k >= 10}
    ok = min(shares.values()) > 0.5 and gsm_seconds < 120
    record(
        2, ok,
        f"P_C/P_total min {min(shares.values()):.3f} > 0.5 for K=10..20; "
        f"gsm sweep {gsm_seconds:.1f} s < 120 s",
    )


def test_criterion_3_power_ordering(users_sweep):
    points, _, _ = users_sweep
    worst = math.inf
    for k in USERS:
        g, b = points[(k, "gsm")], points[(k, "baseline")]
        for metric in ("p_total", "p_c"):
            sep = b[metric].mean - g[metric].mean
            se = math.hypot(b[metric].stderr, g[metric].stderr)
            worst = min(worst, sep / se if se > 0 else math.inf * (1 if sep > 0 else -1))
    record(3, worst >= 3, f"baseline minus gsm P_total and P_C, min separation {worst:.3g} SE >= 3")


def test_criterion_4_se_ordering(users_sweep):
    points, _, _ = users_sweep
    ok, ratios = True, []
    for k in USERS:
        g, b = points[(k, "gsm")]["se"], points[(k, "baseline")]["se"]
        ok &= g.mean <= b.mean + b.stderr
        ratios.append(g.mean / b.mean)
    ok &= min(ratios) > 0.5
    record(4, ok, f"SE gsm <= baseline + 1 SE at every K, ratio range [{min(ratios):.3f}, {max(ratios):.3f}] > 0.5")


def test_criterion_5_ee_improvement(users_sweep):
    points, _, total_seconds = users_sweep
    gains = [points[(k, "gsm")]["ee"].mean / points[(k, "baseline")]["ee"].mean - 1 for k in USERS]
    ratio = points[(10, "baseline")]["p_total"].mean / points[(10, "gsm")]["p_total"].mean
    ok = 0.25 <= max(gains) <= 0.85 and min(gains) > 0 and 1.5 <= ratio <= 2.0 and total_seconds < 300
    record(
        5, ok,
        f"max EE gain {max(gains):.3f} in [0.25, 0.85], min gain {min(gains):.3f} > 0, "
        f"P_total ratio at K=10 {ratio:.3f} in [1.5, 2.0], {total_seconds:.1f} s",
    )


def test_criterion_6_rf_chain_trend():
    template = SystemConfig(n_t=128, n_m=16, n_k=8, n_rf=16, k=10, trials=FIG6_TRIALS)
    report = sweep(template, "rf_chains", range(10, 17))
    _, gsm, _ = report.series("gsm", "ee")
    _, base, _ = report.series("baseline", "ee")
    decreasing = all(a > b for a, b in zip(gsm, gsm[1:]))
    spread = (max(base) - min(base)) / min(base)
    above = all(g > b for g, b in zip(gsm, base))
    record(
        6, decreasing and spread < 0.02 and above,
        f"gsm EE strictly decreasing {decreasing} ({', '.join(f'{v:.3g}' for v in gsm)}); "
        f"baseline spread {spread:.3%} < 2%; gsm > baseline everywhere {above}",
    )


def oracle_suite():
    """20 covariance sets: noise 1, signal SNRs log-uniform on [-10, 30] dB, M cycling 2, 4, 8."""
    rng = substream(2024)
    sizes = itertools.cycle((2, 4, 8))
    return [
        CovarianceSet(1.0 + 10 ** (rng.uniform(-10, 30, size=m) / 10), 1.0)
        for m in itertools.islice(sizes, 20)
    ]


def test_criterion_7_spatial_mi_oracle():
    start = time.perf_counter()
    worst_gap, worst_excess, in_range = 0.0, -math.inf, True
    for i, cov in enumerate(oracle_suite()):
        est, se = spatial_mutual_info_mc(cov, 200_000, substream(99, i))
        approx = spatial_mutual_info_approx(cov)
        gap = abs(approx - est)
        worst_gap = max(worst_gap, gap)
        worst_excess = max(worst_excess, gap - max(0.5, 5 * se))
        in_range &= -3 * se <= est <= math.log2(cov.m_count) + 3 * se
    seconds = time.perf_counter() - start
    record(
        7, worst_excess <= 0 and in_range and seconds < 60,
        f"max |approx - MC| {worst_gap:.3f} bit vs tolerance max(0.5, 5 SE); "
        f"MC within bounds {in_range}; {seconds:.1f} s",
    )


@settings(max_examples=40, deadline=None, derandomize=True)
@given(st.integers(1, 6), st.integers(1, 3), st.data())
def check_codebook(n_m, n_k, data):
    n_rf = data.draw(st.integers(1, n_m))
    c = GsmCodebook(n_m, n_k, n_rf).matrices
    gram = np.conj(np.swapaxes(c, 1, 2)) @ c
    np.testing.assert_allclose(gram, np.broadcast_to(np.eye(n_rf), gram.shape), atol=1e-12)


@settings(max_examples=60, deadline=None, derandomize=True)
@given(st.integers(1, 6), st.integers(0, 4), st.integers(0, 2**32 - 1), st.floats(0.1, 10))
def check_zf(k, extra, seed, p_max):
    rng = substream(seed)
    h = rng.standard_normal((k, k + extra)) + 1j * rng.standard_normal((k, k + extra))
    b, beta = zf_precoders(h, p_max)
    assert abs(np.trace(b @ np.conj(b.T)).real - p_max) <= 1e-9 * p_max
    hb = h @ b
    off = hb - np.diag(np.diag(hb))
    assert np.max(np.abs(off), initial=0.0) < 1e-9 * beta
    np.testing.assert_allclose(np.diag(hb), beta, rtol=1e-9)


@settings(max_examples=60, deadline=None, derandomize=True)
@given(
    st.lists(st.floats(0, 1e6), min_size=1, max_size=16),
    st.floats(1e-3, 10),
    st.randoms(use_true_random=False),
)
def check_se_terms(signal, noise, rnd):
    sig = noise + np.array(signal)
    cov = CovarianceSet(sig, noise)
    assert np.all(cov.sigmas >= noise)
    apm, spatial, _ = gsm_se_terms(sig[None, :], noise)
    assert 0 <= spatial[0] <= math.log2(len(sig)) + 1e-12
    perm = list(sig)
    rnd.shuffle(perm)
    apm_p, spatial_p, _ = gsm_se_terms(np.array(perm)[None, :], noise)
    assert apm_p[0] == pytest.approx(apm[0], rel=1e-12, abs=1e-15)
    assert spatial_p[0] == pytest.approx(spatial[0], rel=1e-12, abs=1e-12)


def test_criterion_8_invariants(tmp_path):
    start = time.perf_counter()
    failures = []
    for name, check in (("codebook", check_codebook), ("zf", check_zf), ("se terms", check_se_terms)):
        try:
            check()
        except Exception as exc:  # collect every failing suite before reporting
            failures.append(f"{name}: {exc!r:.200}")
    cfg = tmp_path / "c.txt"
    cfg.write_text("n_m = 16\nn_k = 2\nn_rf = 12\n")
    csvs = []
    for workers in ("1", "3"):
        out = tmp_path / f"w{workers}"
        cli.main(["fig5", "--config", str(cfg), "--trials", "12", "--seed", "7", "--out", str(out),
                  "--workers", workers])
        csvs.append((out / "fig5.csv").read_bytes())
    if csvs[0] != csvs[1]:
        failures.append("1-vs-3 worker CSVs differ")
    seconds = time.perf_counter() - start
    ok = not failures and seconds < 60
    record(8, ok, f"invariant suites {'; '.join(failures) or 'all hold'}, 1-vs-N workers bit-identical; {seconds:.1f} s")


GOLDEN = {
    "gsm": dict(se=0.35701777720412065, p_total=3.721808412989158, ee=3837035.5223887837),
    "baseline": dict(se=4.611947630281988, p_total=4.167244799068136, ee=44268554.91007674),
}


def test_criterion_9_golden_record():
    worst = 0.0
    for mode, golden in GOLDEN.items():
        r = run_trial(SystemConfig(n_t=8, n_m=4, n_k=2, n_rf=2, k=2, trials=1, seed=12345, mode=mode), 0)
        ref = reference_trial(4, 2, 2, 2, 12345, mode=mode)
        got = dict(se=r.per_user_se[0], p_total=r.power.p_total, ee=r.ee)
        for key, value in golden.items():
            worst = max(worst, abs(got[key] - value) / value)
        worst = max(worst, abs(r.ee - ref["ee"]) / ref["ee"])
    record(9, worst <= 1e-12, f"small-instance golden record, worst rel err {worst:.2e} <= 1e-12")
