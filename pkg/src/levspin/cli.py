"""Command-line front end: derive | evolve | validate | sweep.

Every output file starts with a ``#``-prefixed manifest echo (tool
version, resolved-config hash, seed, command line) so a run can be
reproduced exactly; the ``generated_at`` line is excluded from the hash
and is the only thing allowed to differ between reruns. Numeric fields
are printed with 17 significant digits so doubles round-trip.

All randomness flows from ``--seed``; omitting it uses the fixed default
12345 rather than entropy, so default runs are reproducible too.

Exit codes: 0 success, 1 failed validation claim, 2 bad config/usage,
3 propagation failure, 4 unverifiable validation claim.
"""

from __future__ import annotations

import argparse
import hashlib
import logging
import math
import os
import sys
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (PhaseUndefinedError, TruncationError,
                     UnsupportedStateError, ValidationError)
from .experiments import (InitialSpec, ProtocolConfig, TimeSeries, coherent,
                          default_config, fock, run_protocol, sweep, thermal,
                          vacuum, verify_comment)
from .params import (DimensionlessParams, derive_scales,
                     dimensionless_from_config, load_config, nondimensionalize,
                     phase_formulas, physical_from_config)

DEFAULT_SEED = 12345

EVOLVE_HEADER = "t,coh_mag,coh_phase,purity,entropy,z_plus,z_minus,z_zero,fid_analytic_oracle"
SWEEP_HEADER = "axis,value,phi_measured,phi_formula,phi_residual,purity_min"


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _config_hash(resolved: dict) -> str:
    lines = "".join(f"{k}={resolved[k]!r}\n" for k in sorted(resolved))
    return hashlib.sha256(lines.encode("utf-8")).hexdigest()


def manifest_lines(resolved: dict, seed: int, command: str,
                   out_path: str | None) -> list[str]:
    """The reproducibility block written at the top of every output."""
    lines = [
        f"# levspin {__version__}",
        f"# command = {command}",
        f"# config_sha256 = {_config_hash(resolved)}",
        f"# seed = {seed}",
    ]
    for key in sorted(resolved):
        lines.append(f"# config {key} = {resolved[key]!r}")
    if out_path is not None:
        lines.append(f"# output = {out_path}")
    lines.append(f"# generated_at = {datetime.now(timezone.utc).isoformat()} (excluded from hash)")
    return lines


def _resolved_protocol(cfg: ProtocolConfig, seed: int) -> dict:
    resolved = {
        "kappa": cfg.params.kappa,
        "u0": cfg.params.u0,
        "dD": cfg.params.dD,
        "n_cutoff": cfg.params.n_cutoff,
        "u_offset": cfg.params.u_offset,
        "periods": cfg.n_periods,
        "samples_per_period": cfg.samples_per_period,
        "method": cfg.method,
        "offset": cfg.offset,
        "initial": cfg.initial.kind,
        "seed": seed,
    }
    if cfg.initial.kind == "coherent":
        resolved["initial_alpha"] = complex(cfg.initial.alpha)
    if cfg.initial.kind == "fock":
        resolved["initial_n"] = cfg.initial.n
    if cfg.initial.kind == "thermal":
        resolved["n_bar"] = cfg.initial.n_bar
        resolved["thermal_count"] = cfg.initial.count
    return resolved


def parse_initial(text: str, n_bar: float, count: int, seed: int) -> InitialSpec:
    """Parse --initial: vacuum | coherent:RE[,IM] | fock:N | thermal."""
    kind, _, arg = text.partition(":")
    if kind == "vacuum":
        return vacuum()
    if kind == "coherent":
        parts = arg.split(",") if arg else ["0"]
        re_part = float(parts[0])
        im_part = float(parts[1]) if len(parts) > 1 else 0.0
        return coherent(complex(re_part, im_part))
    if kind == "fock":
        return fock(int(arg or "0"))
    if kind == "thermal":
        return thermal(n_bar, count, seed)
    raise ValidationError("initial", f"unknown initial spec {text!r}")


def _protocol_from_args(args, cfg_values: dict) -> tuple[ProtocolConfig, int]:
    seed = args.seed if args.seed is not None else DEFAULT_SEED
    params = dimensionless_from_config(cfg_values)
    n_bar = cfg_values.get("n_bar", 0.0)
    if getattr(args, "n_bar", None) is not None:
        n_bar = args.n_bar
    count = int(cfg_values.get("thermal_count", 256))
    if getattr(args, "thermal_count", None) is not None:
        count = args.thermal_count
    initial = parse_initial(args.initial, n_bar, count, seed)
    periods = args.periods if args.periods is not None else int(cfg_values.get("periods", 1))
    samples = args.samples if args.samples is not None else int(
        cfg_values.get("samples_per_period", 32))
    cfg = ProtocolConfig(
        params=params,
        n_periods=periods,
        samples_per_period=samples,
        initial=initial,
        method=args.method,
        offset="cancel" if args.cancel else "none",
    )
    return cfg, seed


def _write_output(path: str | None, lines: list[str]) -> None:
    text = "\n".join(lines) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_derive(args) -> int:
    try:
        cfg_values = load_config(args.config) if args.config else {}
        p = physical_from_config(cfg_values)
    except ValidationError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    scales = derive_scales(p)
    d = nondimensionalize(p, n_cutoff=int(cfg_values.get("n_cutoff", 64)),
                          n_bar=cfg_values.get("n_bar", 0.0))
    formulas = phase_formulas(d)

    def order(x: float) -> str:
        # nearest power of ten, the scale the magnitude claims speak of
        return f"1e{round(math.log10(abs(x)))}" if x != 0.0 else "0"

    print("Derived scales (SI)")
    print(f"  z_zpf             = {_fmt(scales.z_zpf)} m")
    print(f"  z0_shift          = {_fmt(scales.z0_shift)} m   (order {order(scales.z0_shift)} m)")
    print(f"  lambda_coupling   = {_fmt(scales.lambda_coupling)} J")
    print(f"  e_shift           = {_fmt(scales.e_shift)} J")
    print(f"  sector_separation = {_fmt(scales.sector_separation)} m   "
          f"(order {order(scales.sector_separation)} m)")
    print(f"  b_cancel          = {_fmt(scales.b_cancel)} T")
    print("Dimensionless model")
    print(f"  kappa = {_fmt(d.kappa)}   u0 = {_fmt(d.u0)}   dD = {_fmt(d.dD)}")
    print("Per-period phases")
    print(f"  eta = {_fmt(formulas.eta)} rad   phi = {_fmt(formulas.phi)} rad   "
          f"delta_phi_grav = {_fmt(formulas.delta_phi_grav)} rad")
    print("machine-readable:")
    for key, value in (
        ("z_zpf", scales.z_zpf), ("z0_shift", scales.z0_shift),
        ("lambda_coupling", scales.lambda_coupling), ("e_shift", scales.e_shift),
        ("sector_separation", scales.sector_separation), ("b_cancel", scales.b_cancel),
        ("kappa", d.kappa), ("u0", d.u0), ("dD", d.dD),
        ("eta", formulas.eta), ("phi", formulas.phi),
        ("delta_phi_grav", formulas.delta_phi_grav),
    ):
        print(f"{key}={_fmt(value)}")
    return 0


def _series_csv(series: TimeSeries, resolved: dict, seed: int, command: str,
                out_path: str | None) -> list[str]:
    lines = manifest_lines(resolved, seed, command, out_path)
    lines.append(EVOLVE_HEADER)
    nan = float("nan")
    for j, t in enumerate(series.times):
        fid = series.fidelity[j] if series.fidelity is not None else nan
        cells = [t, series.coherence_mag[j], series.coherence_phase[j],
                 series.purity[j], series.entropy[j],
                 series.z_sector[1][j], series.z_sector[-1][j],
                 series.z_sector[0][j], fid]
        lines.append(",".join(_fmt(c) for c in cells))
    s = series.summary
    lines.append(f"# summary_coherence_delta = {_fmt(s.coherence_delta)}")
    lines.append(f"# summary_phi_formula = {_fmt(s.phi_formula)}")
    lines.append(f"# summary_phi_residual = {_fmt(s.phi_residual)}")
    lines.append(f"# summary_eta_formula = {_fmt(s.eta_formula)}")
    lines.append(f"# summary_eta_residual = {_fmt(s.eta_residual)}")
    lines.append(f"# summary_winding = {s.winding}")
    lines.append(f"# summary_leakage_max = {_fmt(series.leakage_max)}")
    if series.fidelity is not None:
        lines.append(f"# summary_min_fidelity = {_fmt(float(np.min(series.fidelity)))}")
    return lines


def cmd_evolve(args) -> int:
    try:
        cfg_values = load_config(args.config) if args.config else {}
        cfg, seed = _protocol_from_args(args, cfg_values)
    except ValidationError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    command = "evolve " + " ".join(args.raw_argv)
    resolved = _resolved_protocol(cfg, seed)
    try:
        series = run_protocol(cfg)
    except (TruncationError, UnsupportedStateError, PhaseUndefinedError) as e:
        print(f"propagation failed: {e}", file=sys.stderr)
        return 3
    _write_output(args.out, _series_csv(series, resolved, seed, command, args.out))
    return 0


def cmd_validate(args) -> int:
    seed = args.seed if args.seed is not None else DEFAULT_SEED
    params = DimensionlessParams(kappa=0.1, u0=1.0, dD=0.3,
                                 n_cutoff=args.n_cutoff)
    if args.n_bar > 0:
        initial = thermal(args.n_bar, args.thermal_count, seed)
    else:
        initial = vacuum()
    cfg = default_config(params=params, initial=initial)
    record = verify_comment(cfg, negative_control=args.negative_control)
    print(f"{'claim':30s} {'status':14s} {'value':>12s} {'tolerance':>10s}")
    for claim in record.claims:
        status = "PASS" if claim.passed else ("UNVERIFIABLE" if claim.passed is None else "FAIL")
        value = "-" if claim.value is None else f"{claim.value:.3e}"
        tol = "== 0" if claim.tolerance == 0.0 else f"{claim.tolerance:.0e}"
        print(f"{claim.name:30s} {status:14s} {value:>12s} {tol:>10s}")
        if claim.detail and (claim.passed is not True or args.verbose):
            print(f"    {claim.detail}")
    if record.any_unverifiable:
        return 4
    return 0 if record.all_passed else 1


def cmd_sweep(args) -> int:
    try:
        cfg_values = load_config(args.config) if args.config else {}
        cfg, seed = _protocol_from_args(args, cfg_values)
        values = [float(v) for v in args.values.split(",") if v.strip()]
        if not values:
            raise ValidationError("values", "need at least one value")
        if args.axis == "n_bar" and cfg.initial.kind != "thermal":
            cfg = replace(cfg, initial=thermal(0.0, int(cfg_values.get("thermal_count", 256))
                                               if args.thermal_count is None else args.thermal_count,
                                               seed))
        table = sweep(cfg, args.axis, values)
    except ValidationError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except (TruncationError, UnsupportedStateError, PhaseUndefinedError) as e:
        print(f"propagation failed: {e}", file=sys.stderr)
        return 3
    command = "sweep " + " ".join(args.raw_argv)
    resolved = _resolved_protocol(cfg, seed)
    resolved["sweep_axis"] = args.axis
    resolved["sweep_values"] = args.values
    lines = manifest_lines(resolved, seed, command, args.out)
    lines.append(SWEEP_HEADER)
    for row in table.rows:
        lines.append(",".join([row.axis, _fmt(row.value), _fmt(row.phi_measured),
                               _fmt(row.phi_formula), _fmt(row.phi_residual),
                               _fmt(row.purity_min)]))
    _write_output(args.out, lines)
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="levspin",
        description="Spin-1 NV center coupled to a levitated nanodiamond COM mode: "
                    "exact propagation, phase extraction, claim validation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_derive = sub.add_parser("derive", help="print derived SI scales and phase formulas")
    p_derive.add_argument("config", nargs="?", help="flat key=value config file")
    p_derive.set_defaults(func=cmd_derive)

    def add_protocol_flags(p):
        p.add_argument("config", nargs="?", help="flat key=value config file")
        p.add_argument("--periods", type=int, default=None, help="number of trap periods")
        p.add_argument("--samples", type=int, default=None, help="samples per period (>= 8)")
        p.add_argument("--method", choices=("analytic", "oracle", "both"), default="oracle")
        p.add_argument("--initial", default="vacuum",
                       help="vacuum | coherent:RE[,IM] | fock:N | thermal")
        p.add_argument("--n-bar", type=float, default=None, dest="n_bar",
                       help="thermal mean occupation (initial=thermal)")
        p.add_argument("--thermal-count", type=int, default=None, dest="thermal_count",
                       help="thermal ensemble size (initial=thermal)")
        p.add_argument("--seed", type=int, default=None,
                       help=f"sampling seed (default {DEFAULT_SEED}, never entropy)")
        p.add_argument("--cancel", action="store_true",
                       help="apply the uniform-field cancellation offset")
        p.add_argument("--out", default=None, help="CSV output path (default stdout)")

    p_evolve = sub.add_parser("evolve", help="run a protocol and write the time series CSV")
    add_protocol_flags(p_evolve)
    p_evolve.set_defaults(func=cmd_evolve)

    p_validate = sub.add_parser("validate", help="run the claim battery (built-in desk config)")
    p_validate.add_argument("--n-cutoff", type=int, default=64, dest="n_cutoff")
    p_validate.add_argument("--n-bar", type=float, default=0.0, dest="n_bar",
                            help="run the battery on a thermal ensemble")
    p_validate.add_argument("--thermal-count", type=int, default=128, dest="thermal_count")
    p_validate.add_argument("--seed", type=int, default=None)
    p_validate.add_argument("--negative-control", action="store_true",
                            help="self-test fixture: mis-sign the phi prediction")
    p_validate.add_argument("--verbose", action="store_true")
    p_validate.set_defaults(func=cmd_validate)

    p_sweep = sub.add_parser("sweep", help="sweep one parameter axis, one CSV row per value")
    add_protocol_flags(p_sweep)
    p_sweep.add_argument("--axis", required=True,
                         help="kappa | u0 | dD | n_bar | N_periods | theta-via-u0")
    p_sweep.add_argument("--values", required=True, help="comma-separated values")
    p_sweep.set_defaults(func=cmd_sweep)

    return parser


def _configure_logging() -> None:
    # LEVSPIN_LOG is the only environment knob the CLI reads for behavior:
    # it sets log verbosity (debug | info | warning), nothing else.
    level = os.environ.get("LEVSPIN_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(name)s: %(message)s")


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    args.raw_argv = argv[1:]
    try:
        return args.func(args)
    except ValidationError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
