"""Hamiltonian families for the long-range XYZ chain.

Defines the model parametrization (couplings, field, power-law exponent),
the Kac normalization that keeps energy density intensive, per-distance
coupling tables, and the closed-form energy densities of the tilted
initial-state families.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConsistencyError

XYZ_FULL = "xyz_full"
D_EFFECTIVE = "d_effective"
D_PLUS_FIELD = "d_plus_field"
VARIANTS = (XYZ_FULL, D_EFFECTIVE, D_PLUS_FIELD)


def kac_norm(alpha: float, n: int, nn_limit: bool = False) -> float:
    """Kac normalization: (1/(N-1)) sum_{i != j} |i-j|^(-alpha) over ordered pairs.

    Equals N at alpha = 0 and tends to 2 as alpha -> infinity (N >= 2).
    `nn_limit` selects the nearest-neighbor limit exactly instead of
    evaluating a huge exponent.
    """
    if n < 2:
        raise ValueError(f"Kac norm undefined for n={n} (need n >= 2)")
    if nn_limit:
        return 2.0
    d = np.arange(1, n, dtype=float)
    return float(2.0 / (n - 1) * np.sum((n - d) * d ** (-float(alpha))))


@dataclass(frozen=True)
class ModelSpec:
    """Couplings and geometry of one long-range spin-1/2 chain Hamiltonian.

    variant selects the full XYZ model, the U(1)-symmetric prethermal
    generator D (transverse couplings averaged, no field), or D plus the
    longitudinal field.
    """

    j_x: float
    j_y: float
    j_z: float
    h_z: float = 0.0
    alpha: float = 1.0
    n: int = 2
    variant: str = XYZ_FULL
    boundary: str = "open"
    nn_limit: bool = False  # alpha -> infinity limit, kept exact via a flag

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.alpha < 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.boundary != "open":
            raise ValueError("only open boundaries are supported")

    @property
    def kac(self) -> float:
        return kac_norm(self.alpha, self.n, self.nn_limit)

    def axis_scales(self) -> np.ndarray:
        """Per-axis coupling scales (x, y, z) for this variant."""
        if self.variant == XYZ_FULL:
            return np.array([self.j_x, self.j_y, self.j_z])
        j_t = 0.5 * (self.j_x + self.j_y)
        return np.array([j_t, j_t, self.j_z])

    @property
    def field(self) -> float:
        """Longitudinal field actually entering the Hamiltonian."""
        return 0.0 if self.variant == D_EFFECTIVE else self.h_z

    def effective_d(self) -> "ModelSpec":
        """The prethermal generator D for these couplings (no field)."""
        return replace(self, variant=D_EFFECTIVE)

    def to_config(self) -> dict:
        return {
            "jx": self.j_x,
            "jy": self.j_y,
            "jz": self.j_z,
            "hz": self.h_z,
            "alpha": self.alpha,
            "n": self.n,
            "variant": self.variant,
            "boundary": self.boundary,
            "nn_limit": self.nn_limit,
        }

    @classmethod
    def from_config(cls, block: dict) -> "ModelSpec":
        known = {
            "jx": "j_x",
            "jy": "j_y",
            "jz": "j_z",
            "hz": "h_z",
            "alpha": "alpha",
            "n": "n",
            "variant": "variant",
            "boundary": "boundary",
            "nn_limit": "nn_limit",
        }
        unknown = set(block) - set(known)
        if unknown:
            raise ValueError(f"unknown model config keys: {sorted(unknown)}")
        missing = {"jx", "jy", "jz"} - set(block)
        if missing:
            raise ValueError(f"model config lacks required keys: {sorted(missing)}")
        kwargs = {known[k]: v for k, v in block.items()}
        return cls(**kwargs)


@dataclass(frozen=True)
class CouplingTable:
    """Distance-resolved weights w(d) = 1/(kac * d^alpha) plus per-axis scales.

    Stored per distance, not per pair: open boundaries only change how many
    pairs realize each distance.
    """

    weights: np.ndarray  # w(d) for d = 1 .. N-1, index 0 <-> d = 1
    axis_scales: np.ndarray  # (3,) coupling scales for x, y, z
    field: float
    kac: float

    def weight(self, distance: int) -> float:
        return float(self.weights[distance - 1])


def build_coupling_table(spec: ModelSpec) -> CouplingTable:
    norm = spec.kac
    d = np.arange(1, max(spec.n, 2), dtype=float)
    if spec.nn_limit:
        w = np.zeros_like(d)
        w[0] = 1.0 / norm
    else:
        w = d ** (-float(spec.alpha)) / norm
    return CouplingTable(weights=w, axis_scales=spec.axis_scales(),
                         field=spec.field, kac=norm)


def energy_density_tilted_product(theta: float, j_x: float, j_z: float) -> float:
    """Thermodynamic-limit energy per site of the uniformly tilted product state.

    Independent of alpha: the Kac norm cancels the distance sum for a
    translationally invariant product state.
    """
    s, c = math.sin(2 * theta), math.cos(2 * theta)
    return 0.5 * (j_x * s * s + j_z * c * c)


def energy_density_tilted_neel(phi: float, alpha: float, j_x: float, j_z: float) -> float:
    """Thermodynamic-limit energy per site of the two-site-periodic tilted Neel state."""
    if alpha <= 0:
        raise ValueError("tilted-Neel energy density requires alpha > 0")
    s, c = math.sin(2 * phi), math.cos(2 * phi)
    return 2.0 ** (-(2 + alpha)) * (j_x * s * s + j_z * (1 + c * (c - 2 + 2.0 ** (1 + alpha))))


def normalized_energy_density(energy: float, e_min: float, e_max: float,
                              tol: float = 1e-9) -> float:
    """epsilon = (E - E_min)/(E_max - E_min); out-of-range energies raise, never clamp."""
    if not e_min < e_max:
        raise ValueError(f"need e_min < e_max, got ({e_min}, {e_max})")
    width = e_max - e_min
    if energy < e_min - tol * width or energy > e_max + tol * width:
        raise ConsistencyError(
            f"energy {energy} outside spectral interval [{e_min}, {e_max}]")
    return (energy - e_min) / width
