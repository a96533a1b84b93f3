"""Quantum Mpemba effect in long-range spin-1/2 chains.

Library + CLI for quench simulations (exact diagonalization and finite-chain
MPS engines), entanglement-asymmetry and trace-distance diagnostics, Mpemba
time extraction, and symmetry-breaking scans.
"""

__version__ = "0.1.0"

from .model import (
    D_EFFECTIVE,
    D_PLUS_FIELD,
    XYZ_FULL,
    CouplingTable,
    ModelSpec,
    build_coupling_table,
    energy_density_tilted_neel,
    energy_density_tilted_product,
    kac_norm,
    normalized_energy_density,
)
from .states import (
    InitialStateSpec,
    ProductState,
    build_tilted_neel,
    build_tilted_product,
    initial_asymmetry_monotonicity_check,
)
from .longrange import (
    ExponentialFit,
    FidelityReport,
    assemble_longrange_mpo,
    fit_power_law,
    mpo_fidelity_report,
)
from .asymmetry import (
    ChargeDecomposition,
    build_su2_projectors,
    build_u1_projectors,
    entanglement_asymmetry,
    trace_distance,
    trace_distance_to_thermal,
    von_neumann_entropy,
)
from .mps import (
    EntanglementData,
    MatrixProductState,
    central_charge_estimate,
    entanglement_entropy,
    entanglement_spectrum_ssb_flag,
    half_chain_entropy_pair,
    mps_reduced_density_matrix,
)
from .mpo import MatrixProductOperator
from .trajectory import TrajectoryRecord

__all__ = [name for name in dir() if not name.startswith("_")]
