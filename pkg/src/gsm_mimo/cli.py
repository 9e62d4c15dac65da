"""Command-line front end.

Subcommands ``fig2`` .. ``fig6`` run one sweep each and write
``<fig>.csv`` plus ``<fig>_manifest.txt`` (and ``<fig>.svg`` with
``--plot``) into ``--out``. The manifest is itself a valid config file, so
``--config out/fig2_manifest.txt`` reruns the experiment bit-identically.

Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure.
"""

import argparse
import csv
import datetime
import io
import math
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .config import config_to_dict, format_value, load_config
from .plot import line_chart
from .power import total_power
from .precoding import RankDeficiencyError
from .sim import MODES, ConfigError, SystemConfig, sweep

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2

USERS = tuple(range(2, 21, 2))
POWER_COLUMNS = ("p_pa", "p_rf_chains", "p_switch", "p_ce", "p_cd", "p_lp", "p_fix", "p_t", "p_c")

FIGURES = {
    "fig2": dict(
        variable="users", values=USERS, metric="p_total", extra=POWER_COLUMNS,
        title="Total BS power vs users", ylabel="P_total [W]",
    ),
    "fig3": dict(
        variable="users", values=USERS, metric="p_c", extra=("p_ce", "p_cd", "p_lp"),
        title="Computation power vs users", ylabel="P_C [W]",
    ),
    "fig4": dict(
        variable="users", values=USERS, metric="se", extra=("se_per_user", "apm", "spatial"),
        title="Spectral efficiency vs users", ylabel="SE [bit/s/Hz]",
    ),
    "fig5": dict(
        variable="users", values=USERS, metric="ee", extra=("r_total", "p_total"),
        title="Energy efficiency vs users", ylabel="EE [bit/J]",
    ),
    "fig6": dict(
        variable="rf_chains", values=tuple(range(10, 17)), metric="ee", extra=("r_total", "p_total"),
        overrides=dict(n_t=128, n_m=16, n_k=8, n_rf=16, k=10),
        title="Energy efficiency vs RF chains", ylabel="EE [bit/J]",
    ),
}

SWEEP_COLUMN = {"users": "k", "rf_chains": "n_rf"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def fmt(value):
    """9 significant digits; round-trips through float()."""
    if isinstance(value, float):
        return "nan" if math.isnan(value) else f"{value:.9g}"
    return str(value)


def csv_header(figure):
    layout = FIGURES[figure]
    cols = [SWEEP_COLUMN[layout["variable"]], "mode", "trials", "rejected", "mean", "stderr"]
    for name in layout["extra"]:
        cols += [name, f"{name}_stderr"]
    if layout["metric"] == "ee":
        cols.append("ee_ratio_of_means")
    cols.append("note")
    return cols


def report_rows(figure, report):
    layout = FIGURES[figure]
    width = len(csv_header(figure))
    for p in report.points:
        if p.skipped is not None:
            row = [p.value, p.mode, 0, 0] + [""] * (width - 5) + [f"skipped: {p.skipped}"]
            yield row
            continue
        stat = p[layout["metric"]]
        row = [p.value, p.mode, p.trials, p.rejected, fmt(stat.mean), fmt(stat.stderr)]
        for name in layout["extra"]:
            row += [fmt(p[name].mean), fmt(p[name].stderr)]
        if layout["metric"] == "ee":
            row.append(fmt(p.ee_ratio_of_means))
        row.append("")
        yield row


def render_csv(figure, report):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(csv_header(figure))
    writer.writerows(report_rows(figure, report))
    return buf.getvalue()


def render_manifest(figure, config, modes, outputs, command):
    layout = FIGURES[figure]
    now = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
    lines = [
        f"# gsm_mimo {figure} run manifest; loadable with --config",
        f"# artifact_version = {__version__}",
        f"# timestamp = {now}",
        f"# command = {command}",
        f"# sweep_variable = {layout['variable']}",
        f"# sweep_values = {' '.join(str(v) for v in layout['values'])}",
        f"# modes = {' '.join(modes)}",
        f"# distance_distribution = uniform on [d_min, d_max]",
        f"# outputs = {' '.join(outputs)}",
    ]
    for key, value in config_to_dict(config).items():
        if key == "mode":
            continue
        lines.append(f"{key} = {format_value(value)}")
    return "\n".join(lines) + "\n"


def render_svg(figure, report, modes):
    layout = FIGURES[figure]
    series = {}
    for mode in modes:
        xs, means, _ = report.series(mode, layout["metric"])
        series["with GSM" if mode == "gsm" else "without GSM"] = (xs, means)
    xlabel = "number of users K" if layout["variable"] == "users" else "number of RF chains N_RF"
    return line_chart(series, layout["title"], xlabel, layout["ylabel"])


def _resolve_config(args):
    config = load_config(args.config) if args.config else SystemConfig()
    updates = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.trials is not None:
        updates["trials"] = args.trials
    return replace(config, **updates) if updates else config


def run_figure(figure, config, out_dir, modes=MODES, plot=False, workers=None, command=""):
    """Run one figure's sweep and write its outputs; returns the written paths."""
    layout = FIGURES[figure]
    overrides = layout.get("overrides")
    if overrides:
        config = replace(config, **overrides)
    report = sweep(config, layout["variable"], layout["values"], modes=modes, workers=workers)

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = {f"{figure}.csv": render_csv(figure, report)}
    if plot:
        outputs[f"{figure}.svg"] = render_svg(figure, report, modes)
    manifest = f"{figure}_manifest.txt"
    outputs[manifest] = render_manifest(figure, config, modes, [n for n in outputs], command)
    paths = []
    for name, text in outputs.items():
        path = out_dir / name
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        paths.append(path)
    return report, paths


def power_breakdown_text(config, k, r_total, baseline):
    if k < 1:
        raise UsageError(f"--users must be >= 1, got {k}")
    n_rf = config.n_t if baseline else config.n_rf
    b = total_power(config.power, config.n_t, n_rf, k, r_total, with_switches=not baseline)
    label = "baseline (no GSM)" if baseline else "GSM"
    lines = [f"# {label}: n_t={config.n_t} n_rf={n_rf} k={k} r_total={r_total:g} bit/s"]
    for name, value in b.as_dict().items():
        lines.append(f"{name:<12} {value:.6g} W")
    lines.append(f"{'comp_share':<12} {100 * b.computation_share:.1f} %")
    return "\n".join(lines) + "\n"


def build_parser():
    parser = _Parser(prog="gsm-mimo", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--config", metavar="PATH", help="key = value config file")
        p.add_argument("--seed", type=int, help="64-bit base seed (overrides config)")
        p.add_argument("--trials", type=int, help="trials per sweep point (overrides config)")

    for figure, layout in FIGURES.items():
        p = sub.add_parser(figure, help=layout["title"])
        common(p)
        p.add_argument("--out", metavar="DIR", default=".", help="output directory")
        p.add_argument("--plot", action="store_true", help="also write an SVG chart")
        p.add_argument("--mode", choices=("gsm", "baseline", "both"), default="both")
        p.add_argument("--workers", type=int, help="worker processes (default: $GSM_MIMO_THREADS or CPU count)")

    p = sub.add_parser("power-breakdown", help="print the power model components")
    common(p)
    p.add_argument("--users", type=int, help="number of users K (default: config k)")
    p.add_argument("--r-total", type=float, default=0.0, help="sum rate feeding the coding power [bit/s]")
    p.add_argument("--baseline", action="store_true", help="conventional system, one RF chain per antenna")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _resolve_config(args)
        if args.command == "power-breakdown":
            k = config.k if args.users is None else args.users
            sys.stdout.write(power_breakdown_text(config, k, args.r_total, args.baseline))
            return EXIT_OK
        modes = MODES if args.mode == "both" else (args.mode,)
        command = " ".join(["gsm-mimo"] + list(sys.argv[1:] if argv is None else argv))
        report, paths = run_figure(
            args.command, config, args.out, modes=modes, plot=args.plot,
            workers=args.workers, command=command,
        )
    except (UsageError, ConfigError, OSError) as exc:
        print(f"gsm-mimo: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (RankDeficiencyError, ArithmeticError, ValueError) as exc:
        print(f"gsm-mimo: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    skipped = sum(p.skipped is not None for p in report.points)
    print(
        f"{args.command}: {len(report.points) - skipped} points, {skipped} skipped -> "
        + ", ".join(str(p) for p in paths),
        file=sys.stderr,
    )
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
