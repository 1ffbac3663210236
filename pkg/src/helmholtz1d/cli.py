"""Command-line front end.

Subcommands::

    synth      profile JSON -> measured-data trace (optionally a noisy copy)
    invert     trace -> reconstruction report JSON and staircase CSV
    roundtrip  profile -> synth -> invert -> relative error
    field      profile -> u(x, omega) on an x grid
    bench      built-in scenarios -> results table

Exit codes: 0 success, 2 invalid input, 3 inversion failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import scenarios
from .errors import InversionError, ValidationError
from .fileio import (
    RunManifest,
    atomic_write_text,
    fmt,
    geometry_from_meta,
    load_profile,
    profile_csv,
    read_trace,
    write_json,
    write_trace,
)
from .forward import add_noise, field_at, synth_trace
from .inversion import InversionConfig, invert
from .medium import AcquisitionGeometry, FrequencyBand, relative_l2_error

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_INVERSION = 3


class _Out:
    def __init__(self, quiet: bool):
        self.quiet = quiet

    def __call__(self, *args):
        if not self.quiet:
            print(*args)


def _band(args) -> FrequencyBand:
    if args.band is not None:
        return FrequencyBand(args.band[0], args.band[1], args.samples)
    if args.width is None:
        raise ValidationError("give the band as --band OMEGA_MIN OMEGA_MAX or --width W [--center C]")
    return FrequencyBand.centered(args.width, args.samples, args.center)


def _geometry(spec, x_star: float | None) -> AcquisitionGeometry:
    if x_star is None:
        geometry = AcquisitionGeometry.midpoint(spec.profile, spec.x0)
    else:
        geometry = AcquisitionGeometry(spec.x0, x_star)
    geometry.validate_for(spec.profile)
    return geometry


def _default_n(spec, geometry: AcquisitionGeometry, period: float) -> int:
    """Enough equal-travel-time layers to reach the deepest jump."""
    if spec.profile.n == 0:
        return 1
    t = spec.profile.travel_time(geometry.x0, float(spec.profile.positions[-1]))
    return max(1, int(np.ceil(t / (np.pi / period) - 1e-9)))


def _write_report(out: Path, report, stem: str = "report") -> list[str]:
    x0 = float(report.diagnostics.get("x0", 0.0))
    paths = [
        write_json(out / f"{stem}.json", report.to_dict()),
        atomic_write_text(out / f"{stem}_profile.csv", profile_csv(report.profile, x0)),
    ]
    return [str(p) for p in paths]


def cmd_synth(args, say) -> RunManifest:
    spec = load_profile(args.profile)
    geometry = _geometry(spec, args.x_star)
    band = _band(args)
    d = synth_trace(spec.profile, geometry, band, method=args.method)
    out = Path(args.out)
    outputs = list(map(str, write_trace(out / "d.csv", d, geometry, spec.profile.c0)))
    if args.noise > 0:
        noisy = add_noise(d, args.noise, args.seed)
        extra = {"noise_level": args.noise, "seed": args.seed}
        outputs += list(map(str, write_trace(out / "d_noisy.csv", noisy, geometry, spec.profile.c0, extra)))
    say(f"wrote {band.N} samples on ({fmt(band.omega_min)}, {fmt(band.omega_max)}) to {out}")
    params = {"profile": str(args.profile), "x0": geometry.x0, "x_star": geometry.x_star,
              "omega_min": band.omega_min, "omega_max": band.omega_max, "N": band.N,
              "noise": args.noise, "method": args.method}
    return RunManifest("synth", params, [str(args.profile)], outputs, args.seed)


def cmd_invert(args, say) -> RunManifest:
    trace, meta = read_trace(args.trace)
    geometry = geometry_from_meta(meta)
    if args.x0 is not None or args.x_star is not None:
        g0 = geometry or AcquisitionGeometry(0.0, 0.0)
        geometry = AcquisitionGeometry(g0.x0 if args.x0 is None else args.x0, g0.x_star if args.x_star is None else args.x_star)
    if geometry is None:
        raise ValidationError("trace sidecar has no geometry; pass --x0 and --x-star")
    c0 = args.c0 if args.c0 is not None else meta.get("c0")
    if c0 is None:
        raise ValidationError("trace sidecar has no c0; pass --c0")
    cfg = InversionConfig(args.n, period=args.period, band_shift=args.shift)
    report = invert(trace, geometry, float(c0), cfg)
    out = Path(args.out)
    outputs = _write_report(out, report)
    inputs = [str(args.trace)]
    params = {"trace": str(args.trace), "n": args.n, "period": report.period, "band_shift": args.shift, "c0": float(c0)}
    say(f"recovered {args.n} layers, period {fmt(report.period)} ({report.diagnostics['period_source']})")
    if args.truth:
        truth = load_profile(args.truth)
        err = relative_l2_error(report.profile, truth.reference, geometry.x0, report.depth)
        params["rel_error"] = err
        inputs.append(str(args.truth))
        say(f"relative error {fmt(err)}")
    return RunManifest("invert", params, inputs, outputs, None)


def cmd_roundtrip(args, say) -> RunManifest:
    spec = load_profile(args.profile)
    geometry = _geometry(spec, args.x_star)
    band = _band(args)
    d = synth_trace(spec.profile, geometry, band)
    if args.noise > 0:
        d = add_noise(d, args.noise, args.seed)
    period = args.period or band.width - args.shift
    n = args.n or _default_n(spec, geometry, period)
    report = invert(d, geometry, spec.profile.c0, InversionConfig(n, period=period, band_shift=args.shift))
    err = relative_l2_error(report.profile, spec.reference, geometry.x0, report.depth)
    out = Path(args.out)
    outputs = [str(p) for p in write_trace(out / "d.csv", d, geometry, spec.profile.c0, {"noise_level": args.noise, "seed": args.seed})]
    outputs += _write_report(out, report)
    say(f"n = {n}, period = {fmt(period)}, relative error {fmt(err)}")
    params = {"profile": str(args.profile), "omega_min": band.omega_min, "omega_max": band.omega_max, "N": band.N,
              "noise": args.noise, "n": n, "period": period, "band_shift": args.shift, "rel_error": err}
    return RunManifest("roundtrip", params, [str(args.profile)], outputs, args.seed)


def cmd_field(args, say) -> RunManifest:
    spec = load_profile(args.profile)
    start, stop, count = args.xgrid
    count = int(count)
    if count < 1 or not stop >= start:
        raise ValidationError("--xgrid needs START <= STOP and COUNT >= 1")
    xs = np.linspace(start, stop, count)
    u = np.atleast_1d(field_at(spec.profile, spec.x0, args.omega, xs))
    buf = io.StringIO()
    buf.write("x,re,im\n")
    for x, v in zip(xs, u):
        buf.write(f"{fmt(x)},{fmt(v.real)},{fmt(v.imag)}\n")
    path = atomic_write_text(Path(args.out) / "field.csv", buf.getvalue())
    say(f"wrote u(x, {fmt(args.omega)}) at {count} points to {path}")
    params = {"profile": str(args.profile), "omega": args.omega, "xgrid": [start, stop, count]}
    return RunManifest("field", params, [str(args.profile)], [str(path)], None)


BENCH_FIELDS = ("scenario", "noise", "seed", "omega_min", "omega_max", "n", "rel_error", "wall_time")


def cmd_bench(args, say) -> RunManifest:
    names = scenarios.SCENARIOS if args.scenario == "all" else (args.scenario,)
    base_seed = 0 if args.seed is None else args.seed
    rows = []
    for name in names:
        sc = scenarios.get_scenario(name)
        rows.append(scenarios.run_scenario(sc)[0])
        if args.noise > 0:
            for k in range(args.seeds):
                rows.append(scenarios.run_scenario(sc, args.noise, base_seed + k)[0])
        if args.ladder:
            rows.extend(scenarios.bandwidth_ladder(name)[:-1])
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=BENCH_FIELDS, lineterminator="\n")
    writer.writeheader()
    for res in rows:
        row = res.row()
        writer.writerow({k: fmt(v) if isinstance(v, float) else v for k, v in row.items()})
        say(f"{res.scenario:<11} noise={res.noise:<4g} n={res.n:<5d} band=({res.omega_min:.4f}, {res.omega_max:.4f}) "
            f"rel_error={res.rel_error:.4e} time={res.wall_time:.2f}s")
    path = atomic_write_text(Path(args.out) / "bench.csv", buf.getvalue())
    params = {"scenario": args.scenario, "noise": args.noise, "seeds": args.seeds, "ladder": args.ladder}
    return RunManifest("bench", params, [], [str(path)], base_seed)


def _add_band_flags(p):
    p.add_argument("--band", nargs=2, type=float, metavar=("OMEGA_MIN", "OMEGA_MAX"), help="explicit frequency band")
    p.add_argument("--width", type=float, help="band width (alternative to --band)")
    p.add_argument("--center", type=float, default=0.0, help="band center with --width (default 0)")
    p.add_argument("--samples", "-N", type=int, default=5000, help="number of frequency samples (default 5000)")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=".", help="output directory (default: current)")
    common.add_argument("--seed", type=int, default=None, help="RNG seed for noise")
    common.add_argument("--quiet", action="store_true", help="suppress console output")

    parser = argparse.ArgumentParser(prog="helmholtz1d", description="1-D layered Helmholtz forward model and inversion.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[common], help="synthesize measured data from a profile")
    p.add_argument("profile", type=Path)
    p.add_argument("--x-star", type=float, default=None, help="receiver position (default: midpoint of x0 and x1)")
    p.add_argument("--noise", type=float, default=0.0, help="relative noise level for a noisy copy")
    p.add_argument("--method", choices=("response", "field"), default="response", help="automorphism fold or full field (default response)")
    _add_band_flags(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("invert", parents=[common], help="reconstruct a profile from a trace")
    p.add_argument("trace", type=Path)
    p.add_argument("--n", type=int, required=True, help="number of layers to recover")
    p.add_argument("--period", type=float, default=None, help="override period detection")
    p.add_argument("--shift", type=float, default=0.0, help="start the integration window this far above omega_min")
    p.add_argument("--c0", type=float, default=None, help="speed at the source (default: from the sidecar)")
    p.add_argument("--x0", type=float, default=None, help="source position (default: from the sidecar)")
    p.add_argument("--x-star", type=float, default=None, help="receiver position (default: from the sidecar)")
    p.add_argument("--truth", type=Path, default=None, help="ground-truth profile JSON; prints the relative error")
    p.set_defaults(func=cmd_invert)

    p = sub.add_parser("roundtrip", parents=[common], help="synthesize, invert and score in one go")
    p.add_argument("profile", type=Path)
    p.add_argument("--x-star", type=float, default=None, help="receiver position (default: midpoint of x0 and x1)")
    p.add_argument("--noise", type=float, default=0.0, help="relative noise level added before inverting")
    p.add_argument("--n", type=int, default=None, help="layers to recover (default: reach the deepest jump)")
    p.add_argument("--period", type=float, default=None, help="default: band width minus shift")
    p.add_argument("--shift", type=float, default=0.0, help="start the integration window this far above omega_min")
    _add_band_flags(p)
    p.set_defaults(func=cmd_roundtrip)

    p = sub.add_parser("field", parents=[common], help="sample u(x, omega) on a grid")
    p.add_argument("profile", type=Path)
    p.add_argument("--omega", type=float, required=True, help="angular frequency (nonzero)")
    p.add_argument("--xgrid", nargs=3, type=float, required=True, metavar=("START", "STOP", "COUNT"), help="uniform sample grid")
    p.set_defaults(func=cmd_field)

    p = sub.add_parser("bench", parents=[common], help="run built-in benchmark scenarios")
    p.add_argument("scenario", choices=scenarios.SCENARIOS + ("all",))
    p.add_argument("--noise", type=float, default=scenarios.NOISE_LEVEL, help="noise level for noisy runs (0 disables)")
    p.add_argument("--seeds", type=int, default=1, help="number of noisy seeds per scenario")
    p.add_argument("--ladder", action="store_true", help="add the bandwidth ladder (coarser periods)")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    say = _Out(args.quiet)
    t0 = time.perf_counter()
    try:
        with warnings.catch_warnings():
            if args.quiet:
                warnings.simplefilter("ignore")
            manifest = args.func(args, say)
        code = EXIT_OK
    except InversionError as exc:
        print(f"error: inversion failed at {exc.step or 'unknown step'}: {exc}", file=sys.stderr)
        manifest, code = _failed(args, f"inversion failed at {exc.step}: {exc}"), EXIT_INVERSION
    except (ValidationError, FileNotFoundError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        manifest, code = _failed(args, str(exc)), EXIT_INVALID
    manifest.duration = time.perf_counter() - t0
    try:
        manifest.write(args.out)
    except OSError as exc:
        print(f"error: cannot write manifest: {exc}", file=sys.stderr)
        return code or EXIT_INVALID
    return code


def _failed(args, message: str) -> RunManifest:
    params = {k: (str(v) if isinstance(v, Path) else v) for k, v in vars(args).items() if k not in ("func", "out", "quiet", "seed")}
    return RunManifest(args.command, params, seed=args.seed, status=f"error: {message}")


if __name__ == "__main__":
    sys.exit(main())
