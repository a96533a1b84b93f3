"""Experiment pipelines shared by the CLI and the acceptance suite: quench a
state pair on either engine, attach symmetry diagnostics, detect the Mpemba
crossing, and run grid scans with SSB diagnostics."""

from __future__ import annotations

import functools
import itertools
import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import __version__
from .asymmetry import (
    asymmetry_series,
    build_su2_projectors,
    build_u1_projectors,
    trace_distance_series,
)
from .config import ENGINE_ED, ExperimentConfig
from .dmrg import dmrg_ground_state
from .ed import (
    build_dense_hamiltonian,
    build_sparse_hamiltonian,
    d_operator,
    evolve_exact,
    solve_effective_temperature,
)
from .longrange import assemble_longrange_mpo, fit_power_law, mpo_fidelity_report
from .model import D_EFFECTIVE, ModelSpec
from .mpemba import (
    MpembaReport,
    alpha_m_contour,
    detect_mpemba,
    phase_scan,
    prethermal_diagnostic,
    ratio_curve,
)
from .mps import (
    central_charge_estimate,
    entanglement_spectrum_ssb_flag,
    half_chain_entropy_pair,
)
from .states import InitialStateSpec
from .tdvp import tdvp_evolve
from .trajectory import FLOAT_FMT, TrajectoryRecord


def central_window(n: int, size: int) -> tuple:
    return ((n - size) // 2, size)


def longrange_mpo_for(spec: ModelSpec, k: int):
    fit = fit_power_law(spec.alpha, max(spec.n, 20), k)
    return assemble_longrange_mpo(fit, spec), fit


def ed_quench_context(config: ExperimentConfig):
    """Shared pieces of an ED quench: sparse H, its eigendecomposition when
    spectral evolution applies, and the prethermal generator."""
    spec = config.model
    h = build_sparse_hamiltonian(spec)
    eig = None
    if h.shape[0] <= 4096:
        eig = np.linalg.eigh(h.toarray())
    d_op = d_operator(spec) if spec.variant != D_EFFECTIVE else None
    return h, eig, d_op


def run_single_quench(config: ExperimentConfig, state_spec: InitialStateSpec,
                      ed_context=None) -> TrajectoryRecord:
    """Evolve one initial state under the configured engine; records RDMs of
    the central analysis window plus D(t) when it differs from H."""
    spec = config.model
    eng = config.engine
    window = central_window(spec.n, config.analysis.window)
    wants_d = spec.variant != D_EFFECTIVE  # for the pure XXZ generator D = H

    if eng.kind == ENGINE_ED:
        h, eig, d_op = ed_context if ed_context is not None \
            else ed_quench_context(config)
        psi0 = state_spec.build().to_vector()
        t_grid = np.arange(0, int(round(eng.t_max / eng.dt)) + 1) * eng.dt
        record = evolve_exact(psi0, h, t_grid, window=window, d_op=d_op,
                              krylov_tol=eng.krylov_tol, eig=eig)
    else:
        mpo, fit = longrange_mpo_for(spec, eng.fit_terms)
        d_mpo = None
        if wants_d:
            d_mpo = assemble_longrange_mpo(fit, spec.effective_d())
        state = state_spec.build().to_mps()
        record = tdvp_evolve(state, mpo, eng.dt, eng.t_max, chi_max=eng.chi,
                             cutoff=eng.cutoff, krylov_m=eng.krylov_dim,
                             krylov_tol=eng.krylov_tol, window=window,
                             d_mpo=d_mpo)
        record.meta["fit_sup_residual"] = fit.sup_residual
    if not wants_d:
        record.add_series("d_expect", np.asarray(record.series["energy"]).copy())
    record.meta["state"] = state_spec.to_config()
    record.meta["model"] = spec.to_config()
    return record


def thermal_window_rdm(config: ExperimentConfig, state_spec: InitialStateSpec,
                       ref_eig: tuple | None = None) -> np.ndarray:
    """Thermal reference RDM for one state: solve the effective temperature on
    a small ED chain at the same couplings and trace to the central window."""
    n_ref = config.analysis.thermal_reference_n or min(config.model.n, 12)
    ref_model = replace(config.model, n=n_ref)
    ref_state = replace(state_spec, n=n_ref)
    if ref_eig is None:
        h = build_dense_hamiltonian(ref_model, cap=config.engine.ed_cap)
        ref_eig = np.linalg.eigh(h)
    evals, evecs = ref_eig
    psi = ref_state.build().to_vector()
    overlaps = evecs.conj().T @ psi
    energy = float(np.real(np.abs(overlaps) ** 2 @ evals))
    thermal = solve_effective_temperature(None, energy, eig=ref_eig)
    start, size = central_window(n_ref, config.analysis.window)
    return thermal.reduced(n_ref, start, size)


def _thermal_reference_eig(config: ExperimentConfig, ed_context=None):
    """Eigendecomposition of the thermal-reference chain, reusing the quench
    Hamiltonian's when the sizes coincide."""
    n_ref = config.analysis.thermal_reference_n or min(config.model.n, 12)
    if (ed_context is not None and ed_context[1] is not None
            and n_ref == config.model.n):
        return ed_context[1]
    ref_model = replace(config.model, n=n_ref)
    h = build_dense_hamiltonian(ref_model, cap=config.engine.ed_cap)
    return np.linalg.eigh(h)


@dataclass
class QuenchPairResult:
    config: ExperimentConfig
    records: tuple
    asym_name: str
    asym: tuple          # the two detection series
    report: MpembaReport
    trace_report: MpembaReport | None
    prethermal: object


def run_quench_pair(config: ExperimentConfig) -> QuenchPairResult:
    analysis = config.analysis
    ed_context = (ed_quench_context(config)
                  if config.engine.kind == ENGINE_ED else None)
    records = tuple(run_single_quench(config, s, ed_context)
                    for s in config.state_pair)

    n_a = analysis.window
    decomp = (build_u1_projectors(n_a) if analysis.symmetry == "u1"
              else build_su2_projectors(n_a))
    name = f"{analysis.symmetry}_asym"
    series = []
    for rec in records:
        vals = asymmetry_series(rec.rdms, decomp)
        rec.add_series(name, vals)
        series.append(vals)

    times = records[0].times
    report = detect_mpemba(times, series[0], series[1],
                           eps_floor=analysis.eps_floor,
                           consecutive=analysis.consecutive,
                           horizon=config.horizon,
                           coords=_model_coords(config.model))

    trace_report = None
    if analysis.trace_distance:
        ref_eig = _thermal_reference_eig(config, ed_context)
        trace_series = []
        for rec, state_spec in zip(records, config.state_pair):
            rho_th = thermal_window_rdm(config, state_spec, ref_eig=ref_eig)
            vals = trace_distance_series(rec.rdms, rho_th)
            rec.add_series("trace_dist", vals)
            trace_series.append(vals)
        trace_report = detect_mpemba(times, trace_series[0], trace_series[1],
                                     eps_floor=analysis.eps_floor,
                                     consecutive=analysis.consecutive,
                                     horizon=config.horizon,
                                     coords=_model_coords(config.model))

    diag = prethermal_diagnostic(times, records[0].series["d_expect"],
                                 band=analysis.prethermal_band)
    return QuenchPairResult(config=config, records=records, asym_name=name,
                            asym=tuple(series), report=report,
                            trace_report=trace_report, prethermal=diag)


def ssb_diagnostics(model_spec: ModelSpec, sizes, chi: int = 64,
                    sweeps: int = 10, cutoff: float = 1e-12,
                    fit_terms: int = 8) -> dict:
    """Ground-state SSB probes at two sizes: effective central charge from the
    half-chain entropy difference (bond-shift corrected) and the
    entanglement-spectrum degeneracy flag of the smaller system."""
    n1, n2 = sorted(sizes)
    schedule = [c for c in (16, 32, 64, chi) if c <= chi]
    results = []
    for n in (n1, n2):
        spec = replace(model_spec, n=n, h_z=0.0, variant=D_EFFECTIVE)
        mpo, _ = longrange_mpo_for(spec, fit_terms)
        results.append(dmrg_ground_state(mpo, chi_max=chi, sweeps=sweeps,
                                         cutoff=cutoff, chi_schedule=schedule))
    e1, e2 = half_chain_entropy_pair(results[0].state, results[1].state)
    c_eff = central_charge_estimate(e1.entropy, e2.entropy, n1, n2)
    flag, info = entanglement_spectrum_ssb_flag(results[0].state)
    return {
        "sizes": (n1, n2),
        "entropies": (e1.entropy, e2.entropy),
        "shift_applied": e1.shift_applied,
        "c_eff": float(c_eff),
        "c_eff_deviation": float(abs(c_eff - 1.0)),
        "ssb_flag": bool(flag),
        "es_gap": info["gap"],
        "energies": (results[0].energy, results[1].energy),
        "converged": (results[0].converged, results[1].converged),
    }


# -- scans -------------------------------------------------------------------

_COORD_FIELDS = {"alpha": "alpha", "jz": "j_z", "hz": "h_z", "n": "n"}


def grid_points(grid: dict) -> list:
    keys = [k for k in ("jz", "alpha", "hz", "n") if k in grid]
    values = [np.atleast_1d(grid[k]).tolist() for k in keys]
    return [dict(zip(keys, combo)) for combo in itertools.product(*values)]


def evaluate_scan_point(config: ExperimentConfig, coords: dict):
    """One grid point: quench pair + detection, plus optional SSB probes.

    Module-level and picklable, so scan workers can fan out across processes.
    """
    updates = {_COORD_FIELDS[k]: v for k, v in coords.items()}
    point_config = config.with_model(**updates)
    result = run_quench_pair(point_config)
    report = result.report
    report.coords.update(coords)
    ssb = None
    if config.analysis.ssb_sizes:
        ssb = ssb_diagnostics(point_config.model, config.analysis.ssb_sizes,
                              chi=config.analysis.ssb_chi,
                              fit_terms=config.engine.fit_terms)
    return report, ssb


def run_scan(config: ExperimentConfig, workers: int | None = None):
    if not config.grid:
        raise ValueError("scan requires a grid block in the config")
    points = grid_points(config.grid)
    evaluate = functools.partial(evaluate_scan_point, config)
    results = phase_scan(points, evaluate, workers=workers)
    contour = alpha_m_contour(results)
    return results, contour


# -- serialization -----------------------------------------------------------

def write_pair_outputs(result: QuenchPairResult, out_dir) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {}
    for rec, state_spec in zip(result.records, result.config.state_pair):
        tag = f"{state_spec.family}_{state_spec.angle:.6g}"
        csv_path = out / f"trajectory_{tag}.csv"
        rec.to_csv(csv_path)
        paths[f"trajectory_{tag}"] = str(csv_path)

    times = result.records[0].times
    curve = ratio_curve(times, result.asym[0], result.asym[1],
                        result.config.analysis.eps_floor)
    ratio_path = out / "asymmetry_ratio.csv"
    with open(ratio_path, "w") as fh:
        fh.write("t,ratio\n")
        for t, r in zip(curve.times, curve.ratio):
            fh.write(f"{FLOAT_FMT.format(t)},{FLOAT_FMT.format(r)}\n")
    paths["ratio"] = str(ratio_path)

    report_path = out / "mpemba_report.json"
    report_path.write_text(json.dumps(_report_dict(result.report), indent=2) + "\n")
    paths["report"] = str(report_path)
    if result.trace_report is not None:
        trace_path = out / "trace_distance_report.json"
        trace_path.write_text(json.dumps(_report_dict(result.trace_report),
                                         indent=2) + "\n")
        paths["trace_report"] = str(trace_path)

    write_manifest(result.config, out / "manifest.json",
                   extra={"outputs": sorted(paths)})
    paths["manifest"] = str(out / "manifest.json")
    return paths


def write_scan_outputs(results, contour, config: ExperimentConfig, out_dir) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "scan.csv"
    with open(csv_path, "w") as fh:
        fh.write("jz,alpha,hz,n,verdict,tau_m,r0,c_eff,ssb_flag,error\n")
        for p in results:
            coords = p.coords
            jz = coords.get("jz", config.model.j_z)
            alpha = coords.get("alpha", config.model.alpha)
            hz = coords.get("hz", config.model.h_z)
            n = coords.get("n", config.model.n)
            if p.report is not None:
                verdict = p.report.verdict
                tau = "" if p.report.tau_m is None else FLOAT_FMT.format(p.report.tau_m)
                r0 = FLOAT_FMT.format(p.report.r0)
            else:
                verdict, tau, r0 = "error", "", ""
            c_eff = FLOAT_FMT.format(p.ssb["c_eff"]) if p.ssb else ""
            flag = str(p.ssb["ssb_flag"]).lower() if p.ssb else ""
            err = p.error or ""
            fh.write(f"{FLOAT_FMT.format(jz)},{FLOAT_FMT.format(alpha)},"
                     f"{FLOAT_FMT.format(hz)},{n},{verdict},{tau},{r0},"
                     f"{c_eff},{flag},{err}\n")

    contour_path = out / "alpha_m_contour.json"
    contour_payload = [{"coords": dict(key), "alpha_m": val}
                       for key, val in sorted(contour.items())]
    contour_path.write_text(json.dumps(contour_payload, indent=2) + "\n")
    write_manifest(config, out / "manifest.json",
                   extra={"points": len(results),
                          "failed": sum(1 for p in results if p.error)})
    return {"scan": str(csv_path), "contour": str(contour_path),
            "manifest": str(out / "manifest.json")}


def write_manifest(config: ExperimentConfig, path, extra: dict | None = None) -> None:
    payload = {"tool": "qmpemba", "version": __version__,
               "config": config.to_manifest()}
    if extra:
        payload.update(extra)
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _model_coords(spec: ModelSpec) -> dict:
    return {"jz": spec.j_z, "alpha": spec.alpha, "hz": spec.h_z, "n": spec.n}


def _report_dict(report: MpembaReport) -> dict:
    return {"verdict": report.verdict, "r0": report.r0, "tau_m": report.tau_m,
            "horizon": report.horizon, "swapped": report.swapped,
            "coords": report.coords, "diagnostics": report.diagnostics}
