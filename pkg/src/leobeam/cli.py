"""Command-line entry point: ``leobeam --config cfg.yaml --sweep power_dbm=40,45,50``."""

from __future__ import annotations

import argparse
import logging
import sys

from .config import ConfigError, SystemConfig, load_config
from .experiment import SCHEMES, ExperimentSpec, emit_outputs, run_experiment

log = logging.getLogger("leobeam")


def parse_sweep(text: str | None):
    """``"var=v1,v2"`` -> ``(var, values)``; power values are floats, the rest integers."""
    if not text:
        return "none", ()
    var, sep, vals = text.partition("=")
    if not sep or not vals:
        raise ConfigError(f"sweep: expected var=v1,v2,... got {text!r}")
    var = var.strip()
    conv = float if var == "power_dbm" else int
    try:
        values = tuple(conv(v) for v in vals.split(","))
    except ValueError:
        raise ConfigError(f"sweep: cannot parse values {vals!r}") from None
    return var, values


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="leobeam", description="Networked-LEO distributed beamforming experiments.")
    p.add_argument("--config", help="YAML system configuration (defaults to the built-in reference setup)")
    p.add_argument("--sweep", help="sweep variable and values, e.g. power_dbm=40,45,50 "
                                   "(power_dbm | antennas | rfc | sats | uts)")
    p.add_argument("--schemes", default=",".join(SCHEMES), help="comma-separated schemes (default: all)")
    p.add_argument("--seeds", type=int, default=10, help="number of random scenarios per point")
    p.add_argument("--k-eval", type=int, default=None, help="number of evaluated subcarriers")
    p.add_argument("--out", default="results", help="output directory")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--no-timing", action="store_true", help="write wall_ms=0 so repeated runs are byte-identical")
    p.add_argument("--no-plots", action="store_true", help="skip SVG plots")
    p.add_argument("--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        base = load_config(args.config) if args.config else SystemConfig()
        var, values = parse_sweep(args.sweep)
        schemes = tuple(s.strip() for s in args.schemes.split(",") if s.strip())
        spec = ExperimentSpec(base=base, sweep_var=var, sweep_values=values, schemes=schemes,
                              num_seeds=args.seeds, k_eval=args.k_eval, out_dir=args.out, jobs=args.jobs,
                              timing=not args.no_timing)
        for value in spec.points():     # surface invalid sweep values before any work
            spec.config_at(value)
    except ConfigError as exc:
        print(f"leobeam: error: {exc}", file=sys.stderr)
        return 2
    results = run_experiment(spec)
    try:
        emit_outputs(results, spec.out_dir, plots=not args.no_plots)
    except OSError as exc:
        print(f"leobeam: error: cannot write outputs: {exc}", file=sys.stderr)
        return 2
    failed = sum(c.row["status"] != "ok" for c in results)
    log.info("%d cells, %d failed, outputs in %s", len(results), failed, spec.out_dir)
    return 0 if failed == 0 else 1


if __name__ == "__main__":
    sys.exit(main())
