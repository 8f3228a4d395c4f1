"""
Command-line front end: sweeps, validation and self-test.

Commands
--------
``outage``
    Outage probability versus average SNR; one CSV row per SNR point with
    every analytic form plus a Monte Carlo estimate.
``ber``
    DPSK bit-error rate versus average SNR (quadrature, closed form and
    Monte Carlo).
``validate``
    Runs the acceptance suite and writes a JSON report.
``selftest``
    Fast sanity checks of the numerical core.

Average SNRs are given in dB on the command line and converted here; the
library works in linear units throughout.  Exit codes: 0 success,
1 validation or evaluation failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from dataclasses import dataclass
from pathlib import Path

from .channels import GammaGammaPointingParams, NegExpParams, RayleighParams
from .relay import LinkConfig
from .specfun import SpecialFunctionError

__all__ = [
    "REGIMES",
    "RunSpec",
    "UsageError",
    "db_to_linear",
    "linear_to_db",
    "parse_snr_range",
    "link_params",
    "run_sweep",
    "format_number",
    "main",
]

# Frozen turbulence presets.
REGIMES = {
    "moderate": {"law": "gamma-gamma", "alpha": 4.0, "beta": 1.9, "xi": 10.45},
    "strong": {"law": "gamma-gamma", "alpha": 4.2, "beta": 1.4, "xi": 2.45},
    # Unit-variance Negative Exponential irradiance: 1 / lam^2 = 1.
    "saturate": {"law": "negative-exponential", "lam": 1.0},
}

OUTAGE_COLUMNS = {
    "gamma-gamma": ["outage_expanded", "outage_factored", "outage_series"],
    "negative-exponential": ["outage_expanded", "outage_factored", "outage_asymptotic"],
}
BER_COLUMNS = ["ber_quadrature", "ber_closed_form", "closed_form_kind", "closed_form_fallback"]
MC_COLUMNS = ["mc_estimate", "mc_ci95", "trials"]

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(ValueError):
    """Invalid run specification (maps to exit status 2)."""


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


def format_number(x) -> str:
    """12 significant digits, locale independent; empty for missing values."""
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        return format(x, ".12g")
    return str(x)


def parse_snr_range(text: str) -> tuple[float, float, float]:
    """Parse ``start:stop:step`` (dB, stop inclusive)."""
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError("--snr must be start:stop:step in dB")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise UsageError(f"--snr {text!r}: not numbers") from None
    if not step > 0:
        raise UsageError("--snr step must be positive")
    if start > stop:
        raise UsageError("--snr start must not exceed stop")
    return start, stop, step


def snr_grid(start: float, stop: float, step: float) -> list[float]:
    n = int(math.floor((stop - start) / step + 1e-9))
    return [round(start + i * step, 10) for i in range(n + 1)]


@dataclass(frozen=True)
class RunSpec:
    """Everything a sweep needs; dB quantities as typed by the user."""

    command: str = "outage"
    regime: str = "moderate"
    n_antennas: int = 2
    n_relays: int = 2
    fixed_gain_c: float = 1.0
    eta: float = 1.0
    gamma_th_db: float = 10.0
    snr_start_db: float = 10.0
    snr_stop_db: float = 40.0
    snr_step_db: float = 2.0
    trials: int = 100_000
    seed: int = 2024
    mode: str = "independent_gamma1"
    workers: int | None = None
    output: str | None = None
    plot_script: str | None = None

    def __post_init__(self) -> None:
        if self.regime not in REGIMES:
            raise UsageError(f"unknown regime {self.regime!r}; choose from {sorted(REGIMES)}")
        if self.snr_start_db > self.snr_stop_db:
            raise UsageError("snr start must not exceed stop")
        if not self.snr_step_db > 0:
            raise UsageError("snr step must be positive")
        if self.trials < 0:
            raise UsageError("trials must be >= 0")
        try:
            self.link_config()
        except ValueError as exc:
            raise UsageError(str(exc)) from None

    def link_config(self) -> LinkConfig:
        return LinkConfig(self.n_antennas, self.n_relays, self.fixed_gain_c, self.eta,
                          db_to_linear(self.gamma_th_db))

    @property
    def snr_points_db(self) -> list[float]:
        return snr_grid(self.snr_start_db, self.snr_stop_db, self.snr_step_db)


def link_params(regime: str, snr_db: float, eta: float = 1.0):
    """FSO and RF parameters at average SNR `snr_db`.

    Both links share the average SNR; the FSO electrical SNR additionally
    carries the conversion efficiency as ``eta**2``.
    """
    preset = REGIMES[regime]
    g = db_to_linear(snr_db)
    g_fso = eta * eta * g
    if preset["law"] == "gamma-gamma":
        fso = GammaGammaPointingParams(preset["alpha"], preset["beta"], preset["xi"], g_fso)
    else:
        fso = NegExpParams(preset["lam"], g_fso)
    return fso, RayleighParams(g)


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

def _mc(spec: RunSpec, cfg: LinkConfig, fso, rf, point: int):
    from .montecarlo import SimConfig, simulate_link

    if spec.trials == 0:
        return None
    # Each SNR point gets its own seed so points are independent.
    sim = SimConfig(spec.trials, (spec.seed * 1_000_003 + point) % 2 ** 64, spec.mode, spec.workers)
    return simulate_link(cfg, fso, rf, sim)


def _outage_row(spec, cfg, law, fso, rf):
    from .outage import outage_probability

    forms = ["expanded", "factored", "series" if law == "gamma-gamma" else "asymptotic"]
    out = []
    for form in forms:
        try:
            out.append(outage_probability(cfg, fso, rf, form=form))
        except SpecialFunctionError as exc:
            raise RuntimeError(f"outage probability ({form} form) failed: {exc}") from exc
    return out


def _ber_row(spec, cfg, law, fso, rf):
    from . import ber

    if law == "gamma-gamma":
        quad = ber.dpsk_ber_gg_quadrature(cfg, fso, rf)
        res = ber.dpsk_ber_gg_exact(cfg, fso, rf)
        kind = "exact"
    else:
        quad = ber.dpsk_ber_ne_quadrature(cfg, fso, rf)
        res = ber.dpsk_ber_ne_asymptotic(cfg, fso, rf)
        kind = "asymptotic"
    return [quad, res.value, kind, res.fallback]


def run_sweep(spec: RunSpec) -> tuple[list[str], list[list]]:
    """Evaluate the sweep and return ``(header, rows)``.

    Raises
    ------
    RuntimeError
        If an analytic evaluator fails; the message names the expression.
    """
    law = REGIMES[spec.regime]["law"]
    cfg = spec.link_config()
    if spec.command == "outage":
        header = ["gamma_avg_db", *OUTAGE_COLUMNS[law], *MC_COLUMNS]
        row_fn = _outage_row
    elif spec.command == "ber":
        header = ["gamma_avg_db", *BER_COLUMNS, *MC_COLUMNS]
        row_fn = _ber_row
    else:
        raise UsageError(f"run_sweep does not handle {spec.command!r}")
    rows = []
    for i, db in enumerate(spec.snr_points_db):
        fso, rf = link_params(spec.regime, db, spec.eta)
        values = row_fn(spec, cfg, law, fso, rf)
        mc = _mc(spec, cfg, fso, rf, i)
        if mc is None:
            tail = [None, None, 0]
        elif spec.command == "outage":
            tail = [mc.outage_rate, mc.outage_ci95, mc.trials_used]
        else:
            tail = [mc.ber_estimate, mc.ber_ci95, mc.trials_used]
        rows.append([db, *values, *tail])
    return header, rows


def write_csv(header, rows, path: str | None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([format_number(x) for x in r])
    text = buf.getvalue()
    if path:
        Path(path).write_text(text)
    return text


PLOT_TEMPLATE = '''"""Plot {csv_name}: log-scale y against average SNR in dB."""
import csv

import matplotlib.pyplot as plt

with open({csv_path!r}) as fh:
    rows = list(csv.DictReader(fh))
x = [float(r["gamma_avg_db"]) for r in rows]
fig, ax = plt.subplots()
for col in {columns!r}:
    y = [float(r[col]) if r[col] else float("nan") for r in rows]
    ax.semilogy(x, y, marker="o" if col == "mc_estimate" else None,
                linestyle="none" if col == "mc_estimate" else "-", label=col)
ax.set_xlabel("average SNR (dB)")
ax.set_ylabel({ylabel!r})
ax.grid(True, which="both", alpha=0.3)
ax.legend()
fig.savefig({png!r}, dpi=150)
'''


def write_plot_script(spec: RunSpec, header: list[str], path: str) -> None:
    csv_path = spec.output or "sweep.csv"
    numeric = [c for c in header[1:] if c not in ("mc_ci95", "trials", "closed_form_kind",
                                                  "closed_form_fallback")]
    text = PLOT_TEMPLATE.format(csv_name=Path(csv_path).name, csv_path=csv_path, columns=numeric,
                                ylabel="outage probability" if spec.command == "outage" else "BER",
                                png=str(Path(csv_path).with_suffix(".png")))
    Path(path).write_text(text)


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def _common(p: argparse.ArgumentParser, snr_default: str) -> None:
    p.add_argument("--regime", choices=sorted(REGIMES), default="moderate")
    p.add_argument("--N", dest="n_antennas", type=int, default=2, help="receive antennas")
    p.add_argument("--M", dest="n_relays", type=int, default=2, help="number of relays")
    p.add_argument("--C", dest="fixed_gain_c", type=float, default=1.0, help="AF gain constant")
    p.add_argument("--eta", type=float, default=1.0, help="optical-to-electrical efficiency")
    p.add_argument("--gamma-th-db", type=float, default=10.0)
    p.add_argument("--snr", default=snr_default, help="start:stop:step in dB (inclusive)")
    p.add_argument("--trials", type=int, default=100_000, help="Monte Carlo trials per point (0: none)")
    p.add_argument("--seed", type=int, default=2024)
    p.add_argument("--mode", choices=["independent_gamma1", "shared_gamma1"],
                   default="independent_gamma1")
    p.add_argument("--workers", type=int, default=None,
                   help="worker threads (default: FSORELAY_WORKERS or 1)")
    p.add_argument("--output", "-o", default=None, help="CSV path (default: stdout)")
    p.add_argument("--plot-script", default=None, help="also write a matplotlib script here")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fsorelay", description=__doc__.split("\n\n")[0].strip())
    sub = parser.add_subparsers(dest="command", required=True)
    _common(sub.add_parser("outage", help="outage probability sweep"), "10:40:2")
    _common(sub.add_parser("ber", help="DPSK BER sweep"), "10:30:2")
    v = sub.add_parser("validate", help="run the acceptance suite")
    v.add_argument("--trials", type=int, default=10_000_000, help="Monte Carlo budget per leg")
    v.add_argument("--seed", type=int, default=20240917)
    v.add_argument("--workers", type=int, default=None)
    v.add_argument("--only", default=None, help="comma-separated criterion numbers")
    v.add_argument("--output", "-o", default=None, help="JSON report path (default: stdout)")
    s = sub.add_parser("selftest", help="fast checks of the numerical core")
    s.add_argument("--seed", type=int, default=1)
    return parser


def _spec_from_args(args) -> RunSpec:
    start, stop, step = parse_snr_range(args.snr)
    return RunSpec(command=args.command, regime=args.regime, n_antennas=args.n_antennas,
                   n_relays=args.n_relays, fixed_gain_c=args.fixed_gain_c, eta=args.eta,
                   gamma_th_db=args.gamma_th_db, snr_start_db=start, snr_stop_db=stop,
                   snr_step_db=step, trials=args.trials, seed=args.seed, mode=args.mode,
                   workers=args.workers, output=args.output, plot_script=args.plot_script)


def _check_writable(path: str | None) -> None:
    if path is None:
        return
    parent = Path(path).resolve().parent
    if not parent.is_dir():
        raise UsageError(f"cannot write {path}: directory does not exist")
    try:
        with open(path, "a"):
            pass
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from None


def _cmd_sweep(args) -> int:
    spec = _spec_from_args(args)
    _check_writable(spec.output)
    _check_writable(spec.plot_script)
    header, rows = run_sweep(spec)
    text = write_csv(header, rows, spec.output)
    if spec.output is None:
        sys.stdout.write(text)
    if spec.plot_script:
        write_plot_script(spec, header, spec.plot_script)
    return EXIT_OK


def _cmd_validate(args) -> int:
    from .validation import ValidationSettings, report_json, run_validation

    only = None
    if args.only:
        try:
            only = sorted({int(x) for x in args.only.split(",")})
        except ValueError:
            raise UsageError("--only takes comma-separated integers") from None
    _check_writable(args.output)
    settings = ValidationSettings(trials=args.trials, seed=args.seed, workers=args.workers)
    results = run_validation(settings, only=only, log=sys.stderr)
    text = report_json(results, settings)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


def _cmd_selftest(args) -> int:
    from .validation import selftest

    ok = True
    for name, passed, detail in selftest(args.seed):
        print(f"{'PASS' if passed else 'FAIL'} {name}: {detail}")
        ok &= passed
    return EXIT_OK if ok else EXIT_FAIL


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command in ("outage", "ber"):
            return _cmd_sweep(args)
        if args.command == "validate":
            return _cmd_validate(args)
        return _cmd_selftest(args)
    except UsageError as exc:
        print(f"fsorelay: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (RuntimeError, SpecialFunctionError) as exc:
        print(f"fsorelay: evaluation failed: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
