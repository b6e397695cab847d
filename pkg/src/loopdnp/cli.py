"""Command-line entry point: ``loopdnp <subcommand> ...`` (or ``python -m loopdnp``).

Exit status: 0 success, 1 domain error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from pathlib import Path

import numpy as np

from . import effective as eff
from .constants import MHZ, NS
from .ensemble import paper_ensemble, make_powder_grid, nominal_ensemble
from .fitting import MODELS, FitError, fit_model, read_xy_csv
from .optimizer import OptimizationConfig, optimize_multistart
from .propagation import sequence_propagator, transfer_trace
from .scans import DEFAULT_N_MAX, optimal_contact, parse_range, scan_2d, trace_1d
from .spin import SpinSystem, crystallite_couplings
from .waveform_io import (corpus_names, corpus_text, format_waveform, load_waveform,
                          validate_waveform)


class DomainError(Exception):
    pass


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _couplings(args):
    if args.beta is not None:
        return crystallite_couplings(args.T * MHZ, math.radians(args.beta))
    return args.A * MHZ, args.B * MHZ


def _add_physics(p, hyperfine=False):
    p.add_argument("--waveform", required=True, help="corpus:NAME or waveform file path")
    p.add_argument("--T", type=float, default=0.8676, help="hyperfine anisotropy T/2pi (MHz)")
    p.add_argument("--larmor", type=float, default=-14.8, help="nuclear Larmor frequency (MHz)")
    p.add_argument("--threads", type=int, default=None)
    if hyperfine:
        p.add_argument("--A", type=float, default=-0.40, help="secular coupling (MHz)")
        p.add_argument("--B", type=float, default=1.00, help="pseudo-secular coupling (MHz)")
        p.add_argument("--beta", type=float, default=None,
                       help="orientation (deg); overrides --A/--B using --T")
    else:
        p.add_argument("--grid", type=int, default=64, help="powder grid size")
        p.add_argument("--ensemble", action="store_true", help="average over the B1 ensemble")


def _contact_args(p):
    p.add_argument("--band", default="-30:30", help="integration band start:stop (MHz)")
    p.add_argument("--nmax", type=int, default=DEFAULT_N_MAX)


def _nrep(args, w, grid, ens):
    if args.nrep != "auto":
        n = int(args.nrep)
        if n < 1:
            raise DomainError("--nrep must be >= 1")
        return n
    lo, hi = (float(x) for x in args.band.split(":")[:2])
    choice = optimal_contact(w, args.T * MHZ, grid, (lo * MHZ, hi * MHZ), args.nmax,
                             ensemble=ens, larmor_n=args.larmor * MHZ, threads=args.threads)
    return choice.n_rep


def cmd_simulate(args):
    w = load_waveform(args.waveform)
    a, b = _couplings(args)
    system = SpinSystem(args.offset * MHZ, args.larmor * MHZ, a, b)
    trace = transfer_trace(w.scaled(args.scale), system, args.nmax)
    lines = [f"# waveform={w.name}", f"# offset_MHz={args.offset:g}", f"# scale={args.scale:g}",
             f"# A_MHz={a / MHZ:.6g}", f"# B_MHz={b / MHZ:.6g}", "n,t_ns,iz"]
    lines += [f"{k},{t / NS:.3f},{v:.10f}"
              for k, (t, v) in enumerate(zip(trace.times, trace.values), start=1)]
    _emit("\n".join(lines) + "\n", args.out)


def cmd_trace(args):
    w = load_waveform(args.waveform)
    grid = make_powder_grid(args.grid)
    ens = paper_ensemble() if args.ensemble else None
    n_rep = _nrep(args, w, grid, ens)
    prof = trace_1d(w, parse_range(args.offsets) * MHZ, args.T * MHZ, grid, n_rep, ens,
                    args.larmor * MHZ, args.threads)
    _emit(prof.to_csv(), args.out)


def cmd_scan(args):
    w = load_waveform(args.waveform)
    grid = make_powder_grid(args.grid)
    ens = paper_ensemble() if args.ensemble else None
    n_rep = _nrep(args, w, grid, ens)
    prof = scan_2d(w, parse_range(args.offsets) * MHZ, parse_range(args.scales), args.T * MHZ,
                   grid, ens, n_rep, args.larmor * MHZ, args.threads)
    _emit(prof.to_csv(), args.out)


def cmd_contact(args):
    w = load_waveform(args.waveform)
    args.nrep = "auto"
    n_rep = _nrep(args, w, make_powder_grid(args.grid),
                  paper_ensemble() if args.ensemble else None)
    _emit(f"waveform   {w.name}\nn_rep      {n_rep}\nt_contact  {n_rep * w.period / NS:.1f} ns\n",
          None)


def cmd_effective(args):
    w = load_waveform(args.waveform)
    a, b = _couplings(args)
    system = SpinSystem(args.offset * MHZ, args.larmor * MHZ, a, b)
    u = sequence_propagator(w.scaled(args.scale), system)
    h = eff.effective_hamiltonian(u, w.period)
    field = eff.electron_effective_field(w, args.offset * MHZ, args.scale)
    report = eff.resonance_match(args.larmor * MHZ, w.omega_m, field.magnitude, signed=False)
    zq, dq = eff.zq_dq_projection(h)
    data = {
        "waveform": w.name,
        "tau_m_ns": w.period / NS,
        "modulation_MHz": w.modulation_frequency / 1e6,
        "coefficients_MHz": {k: v / MHZ for k, v in h.coefficients.items()},
        "branch_ambiguous": h.branch_ambiguous,
        "electron_field_MHz": field.magnitude / MHZ,
        "electron_axis": [float(x) for x in field.axis],
        "k_I": report.k_I,
        "required_field_MHz": report.omega_eff_required / MHZ,
        "mismatch_MHz": report.mismatch / MHZ,
        "zq_MHz": zq / MHZ,
        "dq_MHz": dq / MHZ,
    }
    lines = [f"waveform          {w.name}",
             f"tau_m             {data['tau_m_ns']:.3f} ns",
             f"modulation        {data['modulation_MHz']:.4f} MHz",
             "effective Hamiltonian coefficients (MHz):"]
    lines += [f"  {k:<8}{v:>12.6f}" for k, v in data["coefficients_MHz"].items()]
    ax = data["electron_axis"]
    lines += [f"electron field    {data['electron_field_MHz']:.6f} MHz",
              f"electron axis     ({ax[0]:.4f}, {ax[1]:.4f}, {ax[2]:.4f})",
              f"resonance k_I     {data['k_I']}",
              f"required |field|  {abs(data['required_field_MHz']):.6f} MHz",
              f"mismatch          {data['mismatch_MHz']:.6f} MHz",
              f"ZQ amplitude      {data['zq_MHz']:.6f} MHz",
              f"DQ amplitude      {data['dq_MHz']:.6f} MHz"]
    _emit("\n".join(lines) + "\n", None)
    if args.json:
        Path(args.json).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def cmd_optimize(args):
    cfg = OptimizationConfig(
        n_pulses=args.pulses, dt=args.dt_ns * NS, max_amp=args.max_amp * MHZ,
        offsets=tuple(parse_range(args.offsets) * MHZ),
        hyperfine=(args.A * MHZ, args.B * MHZ), larmor_n=args.larmor * MHZ,
        ensemble=nominal_ensemble() if args.no_ensemble else paper_ensemble(),
        n_rep=args.nrep, max_iters=args.max_iters, grad_tol=args.grad_tol, seed=args.seed)
    best, results = optimize_multistart(cfg, args.seeds, workers=args.workers)
    field = eff.electron_effective_field(best.waveform)
    report = {
        "best": best.report(),
        "electron_field_MHz": field.magnitude / MHZ,
        "electron_axis": [float(x) for x in field.axis],
        "runs": [r.report() for r in results],
    }
    text = format_waveform(best.waveform, wrap=True)
    if args.out:
        Path(args.out).write_text(text)
    if args.json:
        Path(args.json).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    for r in results:
        print(f"seed {r.seed:<4d} objective {r.objective:.6f}  iterations {r.iterations:<5d} "
              f"{'converged' if r.converged else 'not converged'}")
    print(f"best seed {best.seed}: objective {best.objective:.6f}, "
          f"electron field {field.magnitude / MHZ:.4f} MHz, axis z {field.axis[2]:.4f}")


def cmd_fit(args):
    t, y = read_xy_csv(Path(args.infile).read_text())
    fit = fit_model(args.model, t, y)
    names = {"buildup": ("eps_max", "T_B"), "invrec": ("I_inf", "T1"), "decay": ("eps_max", "T1")}
    amp_name, tau_name = names[args.model]
    print(f"model         {args.model}")
    print(f"{amp_name:<13} {fit.amplitude:.6g}")
    print(f"{tau_name:<13} {fit.time_constant:.6g} s")
    print(f"residual_rms  {fit.residual_rms:.6g}")


def cmd_validate(args):
    w = load_waveform(args.waveform)
    report = validate_waveform(w, args.max_amp * MHZ)
    sys.stdout.write(report.to_text())
    if not report.ok:
        raise DomainError(f"{len(report.violations)} violation(s)")


def cmd_corpus(args):
    if args.action == "list":
        for name in corpus_names():
            w = load_waveform(f"corpus:{name}")
            print(f"{name}  pulses={len(w)}  period_ns={w.period / NS:.0f}  "
                  f"modulation_MHz={w.modulation_frequency / 1e6:.3f}")
        return
    if not args.name:
        raise DomainError("corpus export needs a waveform name")
    _emit(corpus_text(args.name), args.out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="loopdnp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="single-crystallite <Iz> versus repetitions")
    _add_physics(p, hyperfine=True)
    p.add_argument("--offset", type=float, default=0.0, help="electron offset (MHz)")
    p.add_argument("--scale", type=float, default=1.0, help="B1 amplitude scale")
    p.add_argument("--nmax", type=int, default=20)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("trace", help="powder-averaged offset profile at nominal amplitude")
    _add_physics(p)
    p.add_argument("--offsets", default="-60:60:1", help="start:stop:step (MHz)")
    p.add_argument("--nrep", default="auto", help="repetitions or 'auto'")
    _contact_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("scan", help="powder-averaged offset x amplitude map")
    _add_physics(p)
    p.add_argument("--offsets", default="-60:60:1", help="start:stop:step (MHz)")
    p.add_argument("--scales", default="0.5:1.2:0.01", help="start:stop:step")
    p.add_argument("--nrep", default="auto")
    _contact_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("contact", help="contact time maximising the band-integrated transfer")
    _add_physics(p)
    _contact_args(p)
    p.set_defaults(func=cmd_contact)

    p = sub.add_parser("effective", help="effective Hamiltonian and resonance report")
    _add_physics(p, hyperfine=True)
    p.add_argument("--offset", type=float, default=0.0)
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--json", help="also write the report as JSON to this path")
    p.set_defaults(func=cmd_effective)

    p = sub.add_parser("optimize", help="synthesise a periodic waveform")
    p.add_argument("--pulses", type=int, default=24)
    p.add_argument("--dt-ns", type=float, default=5.0)
    p.add_argument("--max-amp", type=float, default=32.0, help="MHz")
    p.add_argument("--offsets", default="-50:50:5", help="target offsets start:stop:step (MHz)")
    p.add_argument("--A", type=float, default=-0.40)
    p.add_argument("--B", type=float, default=1.00)
    p.add_argument("--larmor", type=float, default=-14.8)
    p.add_argument("--no-ensemble", action="store_true", help="nominal amplitude only")
    p.add_argument("--nrep", type=int, default=7)
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--grad-tol", type=float, default=1e-9)
    p.add_argument("--seed", type=int, default=0, help="first seed")
    p.add_argument("--seeds", type=int, default=1, help="number of consecutive seeds")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="write best waveform here")
    p.add_argument("--json", help="write JSON report here")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("fit", help="exponential fit of t_s,value CSV data")
    p.add_argument("--model", choices=sorted(MODELS), required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("validate", help="check a waveform against the amplitude cap")
    p.add_argument("waveform")
    p.add_argument("--max-amp", type=float, default=32.0, help="MHz")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("corpus", help="list or export the bundled LOOP waveforms")
    p.add_argument("action", choices=["list", "export"])
    p.add_argument("name", nargs="?")
    p.add_argument("--out")
    p.set_defaults(func=cmd_corpus)
    return parser


_RANGE_VALUE = re.compile(r"^-\d[\d.]*:")


def _join_negative_ranges(argv):
    # argparse takes "-60:60:1" for an option; glue it to its flag instead
    out = []
    for tok in argv:
        if out and out[-1].startswith("--") and "=" not in out[-1] and _RANGE_VALUE.match(tok):
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = _join_negative_ranges(sys.argv[1:] if argv is None else list(argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.func(args)
    except (DomainError, FitError, ValueError, KeyError, FileNotFoundError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
