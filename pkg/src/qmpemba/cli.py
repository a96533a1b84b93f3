"""Command-line runner: fit / quench / ground / scan / mpemba subcommands.

Exit codes: 0 on success, 1 on configuration errors, 2 when a scan finished
with per-point failures.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import apply_overrides, load_config
from .dmrg import dmrg_ground_state
from .experiments import (
    longrange_mpo_for,
    run_quench_pair,
    run_scan,
    ssb_diagnostics,
    write_manifest,
    write_pair_outputs,
    write_scan_outputs,
)
from .longrange import fit_power_law, mpo_fidelity_report
from .model import ModelSpec
from .mps import entanglement_entropy


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (ValueError, KeyError, FileNotFoundError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qmpemba",
        description="Quantum Mpemba effect in long-range spin-1/2 chains")
    sub = parser.add_subparsers(required=True)

    p_fit = sub.add_parser("fit", help="exponential-sum fit of the power-law profile")
    p_fit.add_argument("--alpha", type=float, required=True)
    p_fit.add_argument("--n", type=int, required=True)
    p_fit.add_argument("--terms", "-k", type=int, default=8)
    p_fit.add_argument("--out", type=Path, default=None)
    p_fit.set_defaults(handler=cmd_fit)

    for name, help_text in [("quench", "evolve a state pair and record observables"),
                            ("mpemba", "quench a pair and report the crossing verdict"),
                            ("scan", "grid scan with Mpemba and SSB diagnostics"),
                            ("ground", "DMRG ground state (optionally a size pair)")]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", type=Path, required=True)
        p.add_argument("--out", type=Path, default=None,
                       help="output directory (overrides config)")
        if name in ("quench", "mpemba", "scan"):
            p.add_argument("--chi", type=int, default=None)
            p.add_argument("--dt", type=float, default=None)
            p.add_argument("--tmax", type=float, default=None)
            p.add_argument("--cutoff", type=float, default=None)
        if name in ("ground", "scan"):
            p.add_argument("--sweeps", type=int, default=None)
        if name == "scan":
            p.add_argument("--workers", type=int, default=None)
        p.set_defaults(handler={"quench": cmd_quench, "mpemba": cmd_mpemba,
                                "scan": cmd_scan, "ground": cmd_ground}[name])
    return parser


def _load(args):
    config = load_config(args.config)
    config = apply_overrides(
        config,
        chi=getattr(args, "chi", None),
        dt=getattr(args, "dt", None),
        t_max=getattr(args, "tmax", None),
        cutoff=getattr(args, "cutoff", None),
        sweeps=getattr(args, "sweeps", None),
    )
    out_dir = args.out or config.output_dir
    return config, out_dir


def cmd_fit(args) -> int:
    fit = fit_power_law(args.alpha, args.n, args.terms)
    table = fit.to_table()
    spec = ModelSpec(j_x=-1.0, j_y=-1.0, j_z=-1.0, alpha=args.alpha, n=args.n)
    report = mpo_fidelity_report(fit, spec)
    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(table)
        print(f"wrote {args.out}")
    else:
        print(table, end="")
    print(f"sup residual {fit.sup_residual:.3e}, rms {fit.rms_residual:.3e}, "
          f"max per-distance error {report.max_error:.3e}"
          + (" [warning: above 1e-3]" if fit.warning else ""))
    return 0


def cmd_quench(args) -> int:
    config, out_dir = _load(args)
    result = run_quench_pair(config)
    if out_dir:
        paths = write_pair_outputs(result, out_dir)
        print(f"wrote {len(paths)} files to {out_dir}")
    _print_report(result.report, label=result.asym_name)
    if result.trace_report:
        _print_report(result.trace_report, label="trace_dist")
    return 0


def cmd_mpemba(args) -> int:
    return cmd_quench(args)


def cmd_scan(args) -> int:
    config, out_dir = _load(args)
    results, contour = run_scan(config, workers=args.workers)
    failed = sum(1 for p in results if p.error)
    if out_dir:
        paths = write_scan_outputs(results, contour, config, out_dir)
        print(f"wrote scan outputs to {out_dir}")
    for p in results:
        if p.report:
            tau = "-" if p.report.tau_m is None else f"{p.report.tau_m:.4g}"
            extra = f" c_eff={p.ssb['c_eff']:.3f} ssb={p.ssb['ssb_flag']}" if p.ssb else ""
            print(f"  {p.coords}: {p.report.verdict} tau_M={tau}{extra}")
        else:
            print(f"  {p.coords}: FAILED ({p.error})")
    print(f"{len(results) - failed}/{len(results)} points completed")
    return 2 if failed else 0


def cmd_ground(args) -> int:
    config, out_dir = _load(args)
    eng = config.engine
    if config.analysis.ssb_sizes:
        diag = ssb_diagnostics(config.model, config.analysis.ssb_sizes,
                               chi=config.analysis.ssb_chi, sweeps=eng.sweeps,
                               cutoff=eng.dmrg_cutoff, fit_terms=eng.fit_terms)
        print(f"sizes {diag['sizes']}: energies {diag['energies'][0]:.10g}, "
              f"{diag['energies'][1]:.10g}")
        deviation = diag["c_eff_deviation"]
        print(f"c_eff = {diag['c_eff']:.4f} (deviation from 1: {deviation:.1%}), "
              f"entanglement-spectrum SSB flag: {diag['ssb_flag']}")
        if out_dir:
            out = Path(out_dir)
            out.mkdir(parents=True, exist_ok=True)
            (out / "ssb_report.json").write_text(json.dumps(diag, indent=2,
                                                            default=float) + "\n")
            write_manifest(config, out / "manifest.json")
            print(f"wrote {out / 'ssb_report.json'}")
        return 0

    mpo, fit = longrange_mpo_for(config.model, eng.fit_terms)
    result = dmrg_ground_state(mpo, chi_max=eng.dmrg_chi, sweeps=eng.sweeps,
                               cutoff=eng.dmrg_cutoff)
    data = entanglement_entropy(result.state)
    print(f"ground energy {result.energy:.12g} "
          f"(converged: {result.converged}, sweeps run: {len(result.sweep_energies)})")
    print(f"half-chain entropy {data.entropy:.6g} at bond {data.bond}")
    if out_dir:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        payload = {"energy": result.energy, "converged": result.converged,
                   "sweep_energies": result.sweep_energies,
                   "half_chain_entropy": data.entropy,
                   "fit_sup_residual": fit.sup_residual}
        (out / "ground_report.json").write_text(json.dumps(payload, indent=2) + "\n")
        result.state.save(out / "ground_state.npz")
        write_manifest(config, out / "manifest.json")
        print(f"wrote ground-state report to {out}")
    return 0


def _print_report(report, label) -> None:
    tau = "-" if report.tau_m is None else f"{report.tau_m:.6g}"
    print(f"[{label}] verdict: {report.verdict}  r(0)={report.r0:.4g}  "
          f"tau_M={tau}  horizon={report.horizon:g}")


if __name__ == "__main__":
    sys.exit(main())
