"""Quantum-Mpemba-effect detection and scan analytics.

The diagnostic is the ratio of two entanglement-asymmetry (or trace-distance)
time series: the effect is present when the initially-more-asymmetric state's
curve crosses below the other's, and the first crossing time is the Mpemba
time. Scan helpers aggregate verdicts over interaction-range/coupling grids
and pair them with ground-state symmetry-breaking diagnostics.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

EPS_FLOOR_DEFAULT = 1e-6
CONSECUTIVE_BELOW = 3  # reject single-sample dips from oscillatory ratios

CROSSED = "crossed"
NOT_CROSSED = "not_crossed_within_horizon"
RESTORED = "symmetry_restored_second_state"

WORKERS_ENV = "QMPEMBA_WORKERS"


@dataclass
class RatioCurve:
    times: np.ndarray
    ratio: np.ndarray          # nan where either curve is floored
    valid: np.ndarray          # both series above the floor
    r0: float
    eps_floor: float


@dataclass
class MpembaReport:
    verdict: str
    r0: float
    tau_m: float | None
    horizon: float
    swapped: bool              # inputs arrived in reverse Mpemba order
    coords: dict = field(default_factory=dict)  # grid coordinates (j_z, alpha, h_z, n)
    diagnostics: dict = field(default_factory=dict)

    @property
    def crossed(self) -> bool:
        return self.verdict == CROSSED


def ratio_curve(times, asym1, asym2, eps_floor: float = EPS_FLOOR_DEFAULT) -> RatioCurve:
    times = np.asarray(times, dtype=float)
    a1 = np.asarray(asym1, dtype=float)
    a2 = np.asarray(asym2, dtype=float)
    if not (len(times) == len(a1) == len(a2)):
        raise ValueError("ratio curve needs series on a common time grid")
    valid = (a1 > eps_floor) & (a2 > eps_floor)
    ratio = np.full(len(times), np.nan)
    ratio[valid] = a1[valid] / a2[valid]
    r0 = float(ratio[0]) if valid[0] else float("nan")
    return RatioCurve(times=times, ratio=ratio, valid=valid, r0=r0,
                      eps_floor=eps_floor)


def detect_mpemba(times, asym1, asym2, *, eps_floor: float = EPS_FLOOR_DEFAULT,
                  consecutive: int = CONSECUTIVE_BELOW,
                  horizon: float | None = None,
                  coords: dict | None = None) -> MpembaReport:
    """Locate the first sustained drop of asym1/asym2 below unity.

    The curves must start ordered (asym1(0) > asym2(0)); reversed inputs are
    swapped and noted. The crossing time is linearly interpolated and must be
    followed by `consecutive` samples below 1 to discount oscillatory dips.
    A denominator collapsing below eps_floor before any crossing yields the
    symmetry-restored verdict.
    """
    times = np.asarray(times, dtype=float)
    a1 = np.asarray(asym1, dtype=float)
    a2 = np.asarray(asym2, dtype=float)
    if not (len(times) == len(a1) == len(a2)):
        raise ValueError("series must share one time grid")
    if horizon is None:
        horizon = float(times[-1])
    cut = np.searchsorted(times, horizon + 1e-12)
    times, a1, a2 = times[:cut], a1[:cut], a2[:cut]

    swapped = False
    if a1[0] < a2[0]:
        a1, a2 = a2, a1
        swapped = True
    if a2[0] <= eps_floor or a1[0] <= a2[0]:
        raise ValueError(
            f"states not in Mpemba order at t=0: asymmetries "
            f"({a1[0]:.3e}, {a2[0]:.3e}) do not satisfy r(0) > 1")

    curve = ratio_curve(times, a1, a2, eps_floor)
    coords = dict(coords or {})
    below = curve.valid & (curve.ratio < 1.0)

    crossing_idx = None
    run = 0
    for k in range(len(times)):
        if below[k]:
            run += 1
            if run >= consecutive:
                crossing_idx = k - run + 1
                break
        elif curve.valid[k]:
            run = 0
        else:
            break  # floored before a sustained crossing

    if crossing_idx is not None and crossing_idx > 0:
        k = crossing_idx
        r_prev, r_here = curve.ratio[k - 1], curve.ratio[k]
        tau = times[k - 1] + (times[k] - times[k - 1]) * (r_prev - 1.0) / (r_prev - r_here)
        return MpembaReport(verdict=CROSSED, r0=curve.r0, tau_m=float(tau),
                            horizon=horizon, swapped=swapped, coords=coords,
                            diagnostics={"crossing_index": int(k)})

    floored = ~curve.valid
    if floored.any():
        first_floor = int(np.argmax(floored))
        last_valid = first_floor - 1
        which = ("both" if a1[first_floor] <= eps_floor and a2[first_floor] <= eps_floor
                 else "numerator" if a1[first_floor] <= eps_floor else "denominator")
        return MpembaReport(
            verdict=RESTORED, r0=curve.r0, tau_m=None, horizon=horizon,
            swapped=swapped, coords=coords,
            diagnostics={"floor_time": float(times[first_floor]),
                         "last_valid_ratio": float(curve.ratio[last_valid]),
                         "floored_series": which, "eps_floor": eps_floor})

    return MpembaReport(verdict=NOT_CROSSED, r0=curve.r0, tau_m=None,
                        horizon=horizon, swapped=swapped, coords=coords,
                        diagnostics={"min_ratio": float(np.nanmin(curve.ratio))})


def mpemba_time_vs_alpha(alphas, run_pair, *, eps_floor: float = EPS_FLOOR_DEFAULT,
                         consecutive: int = CONSECUTIVE_BELOW,
                         horizon: float | None = None):
    """tau_M(alpha) table for a fixed state pair.

    run_pair(alpha) must return (times, asym1, asym2). Returns the per-alpha
    reports plus the empirical halting exponent alpha_M: the largest alpha
    whose verdict is not `crossed` (None when every point crosses). The
    horizon bounds the accuracy of alpha_M; it is recorded on every report.
    """
    reports = []
    for alpha in sorted(alphas):
        times, a1, a2 = run_pair(alpha)
        report = detect_mpemba(times, a1, a2, eps_floor=eps_floor,
                               consecutive=consecutive, horizon=horizon,
                               coords={"alpha": float(alpha)})
        reports.append(report)
    halted = [r.coords["alpha"] for r in reports if not r.crossed]
    alpha_m = max(halted) if halted else None
    return reports, alpha_m


@dataclass
class ScanPoint:
    coords: dict
    report: MpembaReport | None
    ssb: dict | None
    error: str | None


def phase_scan(grid, evaluate_point, workers: int | None = None) -> list:
    """Evaluate a Mpemba/SSB grid point-by-point; failures are recorded, not
    raised.

    evaluate_point(coords) -> (MpembaReport, ssb_dict | None) and must be
    picklable for multi-process execution. Worker count comes from the
    QMPEMBA_WORKERS environment variable when not given.
    """
    grid = list(grid)
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV, "1"))

    results = [None] * len(grid)
    if workers <= 1 or len(grid) <= 1:
        for k, coords in enumerate(grid):
            results[k] = _run_point(evaluate_point, coords)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_point, evaluate_point, coords)
                       for coords in grid]
            for k, fut in enumerate(futures):
                results[k] = fut.result()
    return results


def _run_point(evaluate_point, coords):
    try:
        report, ssb = evaluate_point(coords)
        return ScanPoint(coords=dict(coords), report=report, ssb=ssb, error=None)
    except Exception as exc:  # per-point failures must not kill the scan
        return ScanPoint(coords=dict(coords), report=None, ssb=None,
                         error=f"{type(exc).__name__}: {exc}")


def alpha_m_contour(points: list) -> dict:
    """Boundary between crossed / not-crossed verdicts per non-alpha coordinate.

    Returns {other-coords tuple: largest halted alpha}. Points with errors are
    skipped.
    """
    contour = {}
    for p in points:
        if p.report is None:
            continue
        key = tuple(sorted((k, v) for k, v in p.coords.items() if k != "alpha"))
        if not p.report.crossed:
            alpha = p.coords.get("alpha")
            if alpha is not None:
                contour[key] = max(contour.get(key, -np.inf), alpha)
    return contour


@dataclass
class PrethermalDiagnostic:
    times: np.ndarray
    ratio: np.ndarray          # D(t)/D(0)
    band: float
    departed: bool
    departure_time: float | None


def prethermal_diagnostic(times, d_series, band: float = 0.1) -> PrethermalDiagnostic:
    """Normalized D(t)/D(0) with a flag for leaving the prethermal plateau."""
    times = np.asarray(times, dtype=float)
    d = np.asarray(d_series, dtype=float)
    scale = abs(d[0])
    if scale < 1e-12:
        raise ValueError("D(0) is (numerically) zero; cannot normalize")
    ratio = d / d[0]
    outside = np.abs(ratio - 1.0) > band
    departed = bool(outside.any())
    departure = float(times[np.argmax(outside)]) if departed else None
    return PrethermalDiagnostic(times=times, ratio=ratio, band=band,
                                departed=departed, departure_time=departure)
