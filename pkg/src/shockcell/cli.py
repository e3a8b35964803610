"""Command-line entry point.

Subcommands: ``run`` (2D transwell scenario), ``verify1d`` (1D
air|water|air verification against exact Riemann solutions),
``converge`` (resolution study), ``validate`` (config check).

Exit codes: 0 success, 1 verification threshold failed, 2 configuration
error, 3 numerical failure (last stable frame flushed).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from . import __version__

EXIT_OK = 0
EXIT_THRESHOLD = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _resolve_threads(args) -> int:
    if getattr(args, "threads", None):
        return max(1, int(args.threads))
    env = os.environ.get("SHOCKCELL_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            from .domain import ConfigError
            raise ConfigError(f"SHOCKCELL_THREADS must be an integer, got {env!r}")
    return 1


def _configure_threads(n: int) -> int:
    """Pin the numba worker count; must run before the kernels import numba."""
    if "numba" not in sys.modules:
        os.environ.setdefault("NUMBA_NUM_THREADS", str(max(n, os.cpu_count() or 1)))
    import numba

    n_eff = min(n, numba.config.NUMBA_NUM_THREADS)
    numba.set_num_threads(n_eff)
    return n_eff


def _write_manifest(outdir: str, command: str, config_dict, threads: int,
                    argv: list[str], extra: dict) -> None:
    manifest = {
        "package": "shockcell",
        "version": __version__,
        "command": command,
        "argv": argv,
        "threads": threads,
        "config": config_dict,
    }
    manifest.update(extra)
    with open(os.path.join(outdir, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=1)


def _write_profile_csv(path: str, z, rho, uz, p) -> None:
    from .eos import P_ATM, PA_PER_PSI

    with open(path, "w", encoding="utf-8") as fh:
        fh.write("z_m,rho,u_z,p_abs_pa,p_gauge_psi\n")
        for zi, ri, ui, pi in zip(z, rho, uz, p):
            fh.write(f"{zi:.17g},{ri:.17g},{ui:.17g},{pi:.17g},"
                     f"{(pi - P_ATM) / PA_PER_PSI:.17g}\n")


def cmd_run(args, argv) -> int:
    from .domain import SimulationConfig, build_scenario
    from .observables import GaugeSpec, RunRecorder, write_frame
    from .stepper import SolverOptions, quiescent_state, run

    threads = _configure_threads(_resolve_threads(args))
    if args.config:
        cfg = SimulationConfig.from_json_file(args.config)
    else:
        cfg = SimulationConfig.default()
    if args.with_hydrophone:
        cfg.raw["geometry"]["hydrophone"]["enabled"] = True
    if args.resolution:
        try:
            n_r, n_z = (int(v) for v in args.resolution.lower().split("x"))
        except ValueError:
            print(f"error: --resolution expects NRxNZ, got {args.resolution!r}",
                  file=sys.stderr)
            return EXIT_CONFIG
        cfg.raw["grid"]["n_r"] = n_r
        cfg.raw["grid"]["n_z"] = n_z
    if args.peak_psi is not None:
        cfg.raw["shock"]["peak_psi"] = args.peak_psi
    if args.t_end_us is not None:
        cfg.raw["t_end_us"] = args.t_end_us

    outdir = args.output_dir
    os.makedirs(outdir, exist_ok=True)
    grid, materials, geometry = build_scenario(cfg)
    options = SolverOptions(
        cfl=cfg.raw["numerics"]["cfl"],
        limiter=cfg.raw["numerics"]["limiter"],
        second_order=cfg.raw["numerics"]["second_order"],
        transverse=cfg.raw["numerics"]["transverse"],
        source=cfg.raw["numerics"]["source"],
        strang=cfg.raw["numerics"]["strang"],
    )
    profile = cfg.shock_profile()
    state = quiescent_state(grid, materials, profile.ambient.p, options)
    gauges = [GaugeSpec(g["id"], float(g["r"]), float(g["z"]))
              for g in cfg.gauge_positions()]
    recorder = RunRecorder(outdir, grid, materials, gauges, cfg.p_vapor())

    frame_times = sorted(t for t in cfg.frame_times() if t <= cfg.t_end() * (1 + 1e-12))
    t_wall = time.time()

    def flush_failure(st):
        write_frame(outdir, 9999, st)
        recorder.finalize()

    from .stepper import SolverError
    try:
        run(state, cfg.t_end(), frame_times=frame_times, profile=profile,
            recorder=recorder, on_failure=flush_failure)
    except SolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        _write_manifest(outdir, "run", cfg.to_dict(), threads, argv,
                        {"status": "numerical-failure", "detail": str(exc)})
        return EXIT_NUMERICAL

    summary = recorder.finalize()
    _write_manifest(outdir, "run", cfg.to_dict(), threads, argv, {
        "status": "ok",
        "wall_time_s": time.time() - t_wall,
        "steps": state.step_count,
        "positivity_fallbacks": state.positivity_fallbacks,
        "t_final_s": state.t,
        "frame_times_s": frame_times,
        "geometry": {
            "transwell_z": list(geometry.transwell_z),
            "transwell_radius": geometry.transwell_radius,
            "hydrophone_enabled": geometry.hydrophone_enabled,
            "hydrophone_radius": geometry.hydrophone_radius,
            "hydrophone_z": list(geometry.hydrophone_z),
            "snapping": geometry.snapping,
        },
        **summary,
    })
    print(f"run complete: {state.step_count} steps to t = {state.t * 1e6:.2f} us, "
          f"outputs in {outdir}")
    return EXIT_OK


def cmd_verify1d(args, argv) -> int:
    from .verification import run_verify1d, exact_profile

    threads = _configure_threads(_resolve_threads(args))
    if args.cells < 100:
        print("error: verify1d needs --cells >= 100", file=sys.stderr)
        return EXIT_CONFIG
    outdir = args.output_dir
    os.makedirs(outdir, exist_ok=True)

    from .stepper import SolverError
    try:
        res = run_verify1d(args.cells, args.peak_psi)
    except SolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    for idx, (t, num) in enumerate(zip(res.times, res.numerical), start=1):
        _write_profile_csv(os.path.join(outdir, f"verify_t{idx}_num.csv"),
                           res.z, num[0], num[1], num[2])
        ex = res.exact[idx - 1]
        _write_profile_csv(os.path.join(outdir, f"verify_t{idx}_exact.csv"),
                           res.z, ex[0], ex[1], ex[2])
    summary = res.summary_dict()
    with open(os.path.join(outdir, "verify_summary.json"), "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=1)
    _write_manifest(outdir, "verify1d", None, threads, argv, {
        "cells": args.cells, "peak_psi": args.peak_psi, "summary": summary})

    print(f"verify1d N={args.cells}: "
          f"L1(rho)/jump A+6us = {summary['metrics_a_plus_6us']['rho']['normalized']:.3e}, "
          f"B+6us = {summary['metrics_b_plus_6us']['rho']['normalized']:.3e}; "
          f"transmitted {summary['transmitted_overpressure_psi']:.5f} psi "
          f"(band {summary['transmitted_band_psi'][0]:.4f}..{summary['transmitted_band_psi'][1]:.4f})")
    return EXIT_OK if res.l1_pass else EXIT_THRESHOLD


def cmd_converge(args, argv) -> int:
    from .verification import run_converge

    threads = _configure_threads(_resolve_threads(args))
    try:
        cells = sorted({int(v) for v in args.cells.split(",")})
    except ValueError:
        print(f"error: --cells expects a comma list, got {args.cells!r}", file=sys.stderr)
        return EXIT_CONFIG
    if len(cells) < 2:
        print("error: converge needs at least 2 resolutions", file=sys.stderr)
        return EXIT_CONFIG
    outdir = args.output_dir
    os.makedirs(outdir, exist_ok=True)

    from .stepper import SolverError
    try:
        res = run_converge(cells, args.peak_psi)
    except SolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    for n, z, prof in zip(res.cells, res.z_grids, res.profiles):
        _write_profile_csv(os.path.join(outdir, f"profile_N{n}.csv"),
                           z, prof[0], prof[1], prof[2])
    z_fine = res.z_grids[-1]
    ex = res.exact_profiles[-1]
    _write_profile_csv(os.path.join(outdir, "profile_exact.csv"),
                       z_fine, ex[0], ex[1], ex[2])
    summary = res.summary_dict()
    with open(os.path.join(outdir, "convergence_summary.json"), "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=1)
    _write_manifest(outdir, "converge", None, threads, argv, {"summary": summary})

    print(f"converge {res.cells}: L1(rho) vs exact = "
          + ", ".join(f"{e:.3e}" for e in res.l1_exact_rho)
          + f"; smooth-region order {res.order_rho:.2f}")
    return EXIT_OK if res.pairwise_decrease else EXIT_THRESHOLD


def cmd_validate(args, argv) -> int:
    from .domain import SimulationConfig, build_scenario

    cfg = SimulationConfig.from_json_file(args.config)
    grid, materials, geometry = build_scenario(cfg)
    counts = {m.label: materials.count(i) for i, m in enumerate(materials.table)}
    print(json.dumps({
        "grid": [grid.n_r, grid.n_z],
        "cell_size": [grid.d_r, grid.d_z],
        "material_cells": counts,
        "snapping": geometry.snapping,
    }, indent=1))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shockcell",
        description="Axisymmetric shock/transwell finite-volume simulator")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the 2D transwell scenario")
    p_run.add_argument("config", nargs="?", help="JSON config file (defaults used if omitted)")
    p_run.add_argument("--output-dir", default="shockcell-run")
    p_run.add_argument("--with-hydrophone", action="store_true")
    p_run.add_argument("--resolution", help="NRxNZ, e.g. 200x400")
    p_run.add_argument("--peak-psi", type=float)
    p_run.add_argument("--t-end-us", type=float)
    p_run.add_argument("--threads", type=int)

    p_ver = sub.add_parser("verify1d", help="1D air|water|air verification vs exact fans")
    p_ver.add_argument("--cells", type=int, default=800)
    p_ver.add_argument("--peak-psi", type=float, default=None)
    p_ver.add_argument("--output-dir", default="shockcell-verify1d")
    p_ver.add_argument("--threads", type=int)

    p_con = sub.add_parser("converge", help="resolution convergence study")
    p_con.add_argument("--cells", default="200,400,800")
    p_con.add_argument("--peak-psi", type=float, default=None)
    p_con.add_argument("--output-dir", default="shockcell-converge")
    p_con.add_argument("--threads", type=int)

    p_val = sub.add_parser("validate", help="validate a config file")
    p_val.add_argument("config")
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "peak_psi", None) is None and args.command in ("verify1d", "converge"):
        from .verification import DEFAULT_VERIFY_PEAK_PSI
        args.peak_psi = DEFAULT_VERIFY_PEAK_PSI

    from .domain import ConfigError
    try:
        if args.command == "run":
            return cmd_run(args, argv)
        if args.command == "verify1d":
            return cmd_verify1d(args, argv)
        if args.command == "converge":
            return cmd_converge(args, argv)
        if args.command == "validate":
            return cmd_validate(args, argv)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
