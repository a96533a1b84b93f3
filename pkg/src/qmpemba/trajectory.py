"""Time-series container for quench runs and its CSV/manifest serialization."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

FLOAT_FMT = "{:.12g}"  # 12 significant digits everywhere for cross-engine diffing


@dataclass
class TrajectoryRecord:
    """Observables sampled along one quench trajectory.

    series holds scalar observables (energy, norm, d_expect, asymmetries...),
    site_series per-site complex/real arrays of shape (T, N), and rdms an
    optional stack (T, dim, dim) of subsystem reduced density matrices for the
    recorded window.
    """

    times: np.ndarray
    series: dict = field(default_factory=dict)
    site_series: dict = field(default_factory=dict)
    rdms: np.ndarray | None = None
    window: tuple | None = None  # (start, size) of the RDM window
    meta: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    def add_series(self, name: str, values) -> None:
        values = np.asarray(values)
        if values.shape[0] != len(self.times):
            raise ValueError(f"series {name!r} length {values.shape[0]} != "
                             f"{len(self.times)} time samples")
        self.series[name] = values

    def energy_drift(self) -> float:
        """max |E(t) - E(0)| / |E(0)| over the run."""
        e = np.asarray(self.series["energy"], dtype=float)
        scale = abs(e[0]) if abs(e[0]) > 1e-30 else 1.0
        return float(np.max(np.abs(e - e[0])) / scale)

    def norm_drift(self) -> float:
        nrm = np.asarray(self.series["norm"], dtype=float)
        return float(np.max(np.abs(nrm - 1.0)))

    def to_csv(self, path) -> None:
        """Long-format CSV: one row per (t, observable, value)."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as fh:
            fh.write("t,observable,value\n")
            for name in sorted(self.series):
                col = self.series[name]
                for t, v in zip(self.times, col):
                    fh.write(f"{FLOAT_FMT.format(t)},{name},{FLOAT_FMT.format(float(np.real(v)))}\n")

    def write_manifest(self, path, extra: dict | None = None) -> None:
        payload = {
            "meta": _jsonable(self.meta),
            "window": list(self.window) if self.window else None,
            "series": sorted(self.series),
            "n_samples": int(len(self.times)),
            "t_final": float(self.times[-1]) if len(self.times) else None,
            "warnings": list(self.warnings),
        }
        if extra:
            payload.update(_jsonable(extra))
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")

    def save_npz(self, path) -> None:
        """Full-fidelity dump (site series and RDM stack included)."""
        arrays = {"times": self.times}
        for k, v in self.series.items():
            arrays[f"series/{k}"] = np.asarray(v)
        for k, v in self.site_series.items():
            arrays[f"site/{k}"] = np.asarray(v)
        if self.rdms is not None:
            arrays["rdms"] = self.rdms
            arrays["window"] = np.asarray(self.window)
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        np.savez_compressed(path, **arrays)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj
