"""Experiment configuration: YAML blocks with explicit keys, no positional
magic. CLI flags override individual values after parsing."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

import yaml

from .ed import ED_CAP_DEFAULT
from .model import ModelSpec
from .states import InitialStateSpec

ENGINE_ED = "ed"
ENGINE_MPS = "mps"


@dataclass(frozen=True)
class EngineConfig:
    kind: str = ENGINE_MPS
    chi: int = 100
    dt: float = 0.05
    t_max: float = 20.0
    cutoff: float = 1e-12
    sweeps: int = 10
    fit_terms: int = 8
    dmrg_chi: int = 200
    dmrg_cutoff: float = 1e-14
    krylov_dim: int = 10
    krylov_tol: float = 1e-10
    ed_cap: int = ED_CAP_DEFAULT

    def __post_init__(self):
        if self.kind not in (ENGINE_ED, ENGINE_MPS):
            raise ValueError(f"unknown engine kind {self.kind!r}")


@dataclass(frozen=True)
class AnalysisConfig:
    window: int = 4
    symmetry: str = "u1"          # u1 | su2
    eps_floor: float = 1e-6
    horizon: float | None = None  # default: engine t_max
    consecutive: int = 3
    trace_distance: bool = False
    thermal_reference_n: int | None = None  # ED chain size for the thermal RDM
    ssb_sizes: tuple | None = None          # DMRG size pair for c_eff / ES flag
    ssb_chi: int = 64
    prethermal_band: float = 0.1

    def __post_init__(self):
        if self.window > 6:
            raise ValueError("subsystem window is capped at 6 sites")
        if self.symmetry not in ("u1", "su2"):
            raise ValueError(f"unknown symmetry tag {self.symmetry!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    model: ModelSpec
    state_pair: tuple  # two InitialStateSpec entries
    engine: EngineConfig = field(default_factory=EngineConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)
    output_dir: str | None = None
    grid: dict | None = None  # e.g. {"alpha": [...], "jz": [...], "hz": [...], "n": [...]}

    def __post_init__(self):
        if len(self.state_pair) != 2:
            raise ValueError("exactly two initial states form a Mpemba pair")
        for st in self.state_pair:
            if st.n != self.model.n:
                raise ValueError("initial states and model disagree on n")
        if self.engine.kind == ENGINE_ED and self.model.n > self.engine.ed_cap:
            raise ValueError(
                f"ed engine requires n <= {self.engine.ed_cap}, got {self.model.n}")
        if self.analysis.window > self.model.n:
            raise ValueError("analysis window larger than the chain")

    @property
    def horizon(self) -> float:
        return self.analysis.horizon if self.analysis.horizon is not None \
            else self.engine.t_max

    def with_model(self, **updates) -> "ExperimentConfig":
        """A copy with model fields replaced and states re-sized to match."""
        new_model = replace(self.model, **updates)
        new_states = tuple(replace(s, n=new_model.n) for s in self.state_pair)
        return replace(self, model=new_model, state_pair=new_states)

    def to_manifest(self) -> dict:
        return {
            "model": self.model.to_config(),
            "states": [s.to_config() for s in self.state_pair],
            "engine": vars(self.engine).copy(),
            "analysis": {k: (list(v) if isinstance(v, tuple) else v)
                         for k, v in vars(self.analysis).items()},
            "grid": self.grid,
        }


def load_config(path) -> ExperimentConfig:
    raw = yaml.safe_load(Path(path).read_text())
    return config_from_dict(raw)


def config_from_dict(raw: dict) -> ExperimentConfig:
    try:
        model = ModelSpec.from_config(raw["model"])
        states_block = raw["states"]
        family = states_block["family"]
        angles = states_block["angles"]
        if len(angles) != 2:
            raise ValueError("states.angles must list exactly two angles")
        pair = tuple(InitialStateSpec(family=family, angle=float(a), n=model.n)
                     for a in angles)
        engine = EngineConfig(**raw.get("engine", {}))
        analysis_raw = dict(raw.get("analysis", {}))
        if "ssb_sizes" in analysis_raw and analysis_raw["ssb_sizes"] is not None:
            analysis_raw["ssb_sizes"] = tuple(analysis_raw["ssb_sizes"])
        analysis = AnalysisConfig(**analysis_raw)
        output_dir = raw.get("output", {}).get("directory") if "output" in raw else None
        grid = raw.get("grid")
        return ExperimentConfig(model=model, state_pair=pair, engine=engine,
                                analysis=analysis, output_dir=output_dir,
                                grid=grid)
    except KeyError as missing:
        raise ValueError(f"config is missing required block/key: {missing}") from None


def apply_overrides(config: ExperimentConfig, **overrides) -> ExperimentConfig:
    """CLI-flag overrides onto engine parameters (chi, dt, t_max, cutoff, sweeps)."""
    updates = {k: v for k, v in overrides.items() if v is not None}
    if not updates:
        return config
    return replace(config, engine=replace(config.engine, **updates))
