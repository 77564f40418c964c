"""Exact conformations of a twisted Kirchhoff tube and the quantum states they induce."""

from conformon.elliptic import complete_K, jacobi_dn, jacobi_sn_cn, jacobi_sn_cn_dn
from conformon.exceptions import (
    ConsistencyError,
    DegenerateMaterialError,
    DivergenceError,
    DomainError,
    InfinitePeriodError,
    IntegrationError,
    NoSolutionError,
)
from conformon.rod import (
    CaseId,
    CircularRing,
    ConformonLattice,
    ForceField,
    RodMaterial,
    SolutionCase,
    Solitary,
    check_sigma_inequality,
    curvature_eval,
    curvature_ode_residual,
    force_field,
    frame_curvatures,
    static_residuals,
    torsion_from_twist,
    twisting_rigidity,
    zero_twist_sigma,
)
from conformon.geometry import (
    Conformation,
    CurvatureTorsion,
    FrameState,
    closed_tube_kappa,
    export_geometry,
    integrate_frame,
    minimum_closed_length,
    quantization_residual,
    recover_curvature_torsion,
)
from conformon.quantum import (
    QuantumUnits,
    SpectralResult,
    delocalization_ratio,
    effective_potential_raw,
    exact_energy,
    exact_wavefunction,
    ground_state_l2_error,
    lattice_potential,
    potential_minimum,
    schrodinger_residual,
    solve_band_ground_state,
    solve_conformon_bound_state,
    solve_schrodinger,
)

__version__ = "0.1.0"
