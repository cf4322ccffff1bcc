"""Command line entry point ``fracto``.

Exit codes: 0 success, 2 configuration error, 3 numerical blow-up,
4 comparison outside tolerance.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import io
from .analysis import NoCrossoverError, crossover_locate, dispersion_probe, run_duality, tail_slope
from .config import ConfigError, RunConfig, parse_config, render_config
from .fsg import CFLError, FieldParams, default_dt, simulate_fsg
from .kernel import continuum_symbol, coupling_spectrum_direct, coupling_spectrum_series, transform_symbol
from .lattice import BlowUpError, ChainParams, ModelParams, simulate_chain
from .render import render_duality, render_tails
from .riesz import gl_weights

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BLOWUP = 3
EXIT_COMPARE = 4


def _load_config(path: str, overrides: Sequence[str]) -> RunConfig:
    text = sys.stdin.read() if path == "-" else Path(path).read_text()
    return parse_config(text, overrides)


def _field_params(cfg: RunConfig, scen) -> FieldParams:
    s = cfg.solver
    return FieldParams(
        scen.model,
        scen.chain.n_oscillators,
        scen.chain.half_length,
        h_ratio=s.h_ratio,
        scheme=s.scheme,
        edge_policy=s.edge,
        zero_mode=s.zero_mode,
    )


def _echo(cfg: RunConfig, alpha: float, arm: str, params: FieldParams | None = None) -> dict:
    """Config plus every per-run value derived from defaults."""
    out = {"config": cfg.to_dict(), "config_text": render_config(cfg), "alpha": alpha, "arm": arm}
    s, o = cfg.solver, cfg.output
    if arm == "chain":
        out["dt"] = s.lattice_dt
        out["snapshot_every_steps"] = max(1, int(round(o.snapshot_every / s.lattice_dt)))
        out["integrator"] = "rk4"
    else:
        dt = s.dt if s.dt is not None else default_dt(params, s.time_stepper)
        out["dt"] = dt
        out["snapshot_every_steps"] = max(1, int(round(o.snapshot_every / dt)))
        out["integrator"] = s.time_stepper
        out["operator_h"] = params.h
        out["jbar0"] = params.jbar0
        out["coupling"] = params.coupling
        out["onsite_linear"] = params.onsite_linear
    return out


def _write_arm(directory: Path, stem: str, traj, echo: dict) -> None:
    if traj is None:
        return
    io.write_snapshots(directory, traj, stem)
    io.write_trace(directory, traj, stem)
    io.write_sidecar(directory, stem, echo, traj.energy)


def _dump_weights(path: str | None, cfg: RunConfig) -> None:
    if not path:
        return
    for alpha in cfg.alpha:
        count = cfg.n_sites * cfg.solver.h_ratio + 1
        target = Path(path)
        if len(cfg.alpha) > 1:
            target = target.with_name(f"{target.stem}_{io.alpha_tag(alpha)}{target.suffix}")
        io.write_gl_weights(target, gl_weights(alpha, count).w)


def cmd_simulate(args) -> int:
    cfg = _load_config(args.config, args.set)
    _dump_weights(args.dump_weights, cfg)
    root = io.output_root(cfg.output.dir)
    s, o = cfg.solver, cfg.output
    code = EXIT_OK
    for alpha in cfg.alpha:
        scen = cfg.scenario_for(alpha)
        d = io.run_dir(root, cfg.scenario, alpha)
        init = scen.initial_state()
        lat = fld = None
        if cfg.wants_lattice:
            every = max(1, int(round(o.snapshot_every / s.lattice_dt)))
            try:
                lat = simulate_chain(scen.chain, scen.model, init, cfg.t_end, s.lattice_dt, every)
            except BlowUpError as exc:
                print(f"alpha={alpha:g} chain: {exc}", file=sys.stderr)
                lat, code = exc.partial, EXIT_BLOWUP
            _write_arm(d, "chain", lat, _echo(cfg, alpha, "chain"))
        if cfg.wants_fsg:
            params = _field_params(cfg, scen)
            echo = _echo(cfg, alpha, "fsg", params)
            every = echo["snapshot_every_steps"]
            try:
                fld = simulate_fsg(params, init.u, cfg.t_end, echo["dt"], s.time_stepper, every, force=s.force)
            except BlowUpError as exc:
                print(f"alpha={alpha:g} fsg: {exc}", file=sys.stderr)
                fld, code = exc.partial, EXIT_BLOWUP
            _write_arm(d, "fsg", fld, echo)
        if o.render:
            render_duality(d / f"fig_duality_{io.alpha_tag(alpha)}.svg", alpha, lat, fld)
        print(d)
    return code


def cmd_compare(args) -> int:
    cfg = _load_config(args.config, args.set)
    _dump_weights(args.dump_weights, cfg)
    root = io.output_root(cfg.output.dir)
    s, o, a = cfg.solver, cfg.output, cfg.analysis
    code = EXIT_OK
    tails = []
    for alpha in cfg.alpha:
        scen = cfg.scenario_for(alpha)
        params = _field_params(cfg, scen)
        res = run_duality(
            scen,
            t_end=cfg.t_end,
            lattice_dt=s.lattice_dt,
            fsg_dt=s.dt,
            stepper=s.time_stepper,
            scheme=s.scheme,
            h_ratio=s.h_ratio,
            edge_policy=s.edge,
            zero_mode=s.zero_mode,
            snapshot_every=o.snapshot_every,
            tail_window=a.tail_window,
            core_fraction=a.core_fraction,
            force=s.force,
        )
        d = io.run_dir(root, cfg.scenario, alpha)
        _write_arm(d, "chain", res.lattice, _echo(cfg, alpha, "chain"))
        _write_arm(d, "fsg", res.field, _echo(cfg, alpha, "fsg", params))
        rep = res.report
        report = rep.to_dict()
        report["tolerance"] = a.tolerance
        report["passed"] = (not rep.failed) and rep.rmse_relative <= a.tolerance
        io.write_report(d, report)
        if res.lattice is not None and res.field is not None and not rep.failed:
            io.write_trace_compare(d, res.lattice, res.field)
        if o.render:
            render_duality(d / f"fig_duality_{io.alpha_tag(alpha)}.svg", alpha, res.lattice, res.field)
        if res.lattice is not None and res.lattice.u:
            tails.append((alpha, res.lattice.x, res.lattice.u[-1], rep.tail_slope))
        print(
            f"alpha={alpha:g} rmse/amplitude={rep.rmse_relative:.4g} linf={rep.center_trace_linf:.4g} "
            f"tail_slope={rep.tail_slope} crossover_x={rep.crossover_x} {'ok' if report['passed'] else 'FAIL'}"
        )
        if rep.failed:
            code = max(code, EXIT_BLOWUP)
        elif not report["passed"]:
            code = max(code, EXIT_COMPARE)
    if o.render:
        L = cfg.half_length
        window = (a.tail_window[0] * L, a.tail_window[1] * L)
        render_tails(
            io.run_dir(root, cfg.scenario, cfg.alpha[0]).parent / "fig_tails.svg",
            [(al, x, u) for al, x, u, _ in tails],
            window,
            [sl for *_, sl in tails],
        )
    return code


def cmd_render(args) -> int:
    cfg = _load_config(args.config, args.set)
    root = io.output_root(cfg.output.dir)
    L = cfg.half_length
    tails, slopes = [], []
    window = (cfg.analysis.tail_window[0] * L, cfg.analysis.tail_window[1] * L)
    for alpha in cfg.alpha:
        d = io.run_dir(root, cfg.scenario, alpha)
        lat = io.load_trajectory(d, "chain")
        fld = io.load_trajectory(d, "fsg")
        render_duality(d / f"fig_duality_{io.alpha_tag(alpha)}.svg", alpha, lat, fld)
        if lat is not None:
            tails.append((alpha, lat.x, lat.u[-1]))
            try:
                slopes.append(tail_slope((lat.x, lat.u[-1]), window)[0])
            except ValueError:
                slopes.append(None)
    render_tails(io.run_dir(root, cfg.scenario, cfg.alpha[0]).parent / "fig_tails.svg", tails, window, slopes)
    return EXIT_OK


def cmd_kernel_dump(args) -> int:
    if args.samples < 1:
        raise ConfigError("--samples must be positive")
    ks = np.linspace(args.k_min, args.k_max, args.samples)
    rows = []
    for k in ks:
        direct = coupling_spectrum_direct(args.alpha, k, args.dx, n_max=args.n_max).value
        series = coupling_spectrum_series(args.alpha, k, args.dx) if abs(k * args.dx) < 2 * math.pi else math.nan
        rows.append((k, direct, series, transform_symbol(args.alpha, k, args.dx), continuum_symbol(args.alpha, k)))
    out = Path(args.out)
    io.write_rows(out, ("k", "direct", "series", "transform_symbol", "continuum_symbol"), rows)
    print(out)
    return EXIT_OK


def cmd_tail_fit(args) -> int:
    x, u, _ = io.read_snapshot(Path(args.input))
    xmax = float(x.max())
    x1 = args.x1 if args.x1 is not None else 0.2 * xmax
    x2 = args.x2 if args.x2 is not None else 0.8 * xmax
    slope, r2 = tail_slope((x, u), (x1, x2))
    try:
        cross = crossover_locate((x, u), x_max=x2, core_fraction=args.core_fraction)
    except NoCrossoverError:
        cross = None
    print(json.dumps({"window": [x1, x2], "slope": slope, "r2": r2, "crossover_x": cross}))
    return EXIT_OK


def cmd_dispersion(args) -> int:
    model = ModelParams(args.alpha, args.j0, args.j1, args.j2)
    chain = ChainParams(args.n_sites, args.half_length)
    modes = [int(m) for m in args.modes.split(",")]
    lines = ["j,k,omega,omega_theory,rel_err_omega2"]
    for j in modes:
        k = 2.0 * math.pi * j / (chain.n_oscillators * chain.dx)
        w = dispersion_probe(model, chain, k)
        w2 = model.j1 + model.j2 + model.j0 * coupling_spectrum_direct(args.alpha, k, chain.dx).value
        lines.append(f"{j},{k!r},{w!r},{math.sqrt(w2)!r},{w * w / w2 - 1.0!r}")
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fracto", description="Long-range chain vs fractional sine-Gordon field.")
    sub = p.add_subparsers(dest="command", required=True)

    def with_config(sp, weights: bool = True):
        sp.add_argument("config", help="config file, or - for stdin")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config key")
        if weights:
            sp.add_argument("--dump-weights", metavar="FILE", help="write the GL weight table as q,w CSV")
        return sp

    with_config(sub.add_parser("simulate", help="integrate the chain and/or the field")).set_defaults(func=cmd_simulate)
    with_config(sub.add_parser("compare", help="run both systems and compare them")).set_defaults(func=cmd_compare)
    with_config(sub.add_parser("render", help="redraw figures from written CSVs"), False).set_defaults(func=cmd_render)

    kd = sub.add_parser("kernel-dump", help="tabulate the coupling spectrum")
    kd.add_argument("--alpha", type=float, required=True)
    kd.add_argument("--dx", type=float, default=1.0)
    kd.add_argument("--k-min", type=float, default=0.0)
    kd.add_argument("--k-max", type=float, default=math.pi)
    kd.add_argument("--samples", type=int, default=64)
    kd.add_argument("--n-max", type=int, default=100_000)
    kd.add_argument("--out", required=True)
    kd.set_defaults(func=cmd_kernel_dump)

    tf = sub.add_parser("tail-fit", help="power-law slope and crossover of a snapshot CSV")
    tf.add_argument("--input", required=True)
    tf.add_argument("--x1", type=float)
    tf.add_argument("--x2", type=float)
    tf.add_argument("--core-fraction", type=float, default=0.1)
    tf.set_defaults(func=cmd_tail_fit)

    dp = sub.add_parser("dispersion", help="measure small-amplitude mode frequencies")
    dp.add_argument("--alpha", type=float, default=1.21)
    dp.add_argument("--j0", type=float, default=0.01)
    dp.add_argument("--j1", type=float, default=0.1)
    dp.add_argument("--j2", type=float, default=0.1)
    dp.add_argument("--n-sites", type=int, default=401)
    dp.add_argument("--half-length", type=float, default=200.0)
    dp.add_argument("--modes", default="0,1,5,40,150")
    dp.add_argument("--out")
    dp.set_defaults(func=cmd_dispersion)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, CFLError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
