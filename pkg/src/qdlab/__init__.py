"""Exact numerics for quantum double models with face or vertex matter."""

from .groups import (
    Character,
    CyclicGroup,
    GroupElement,
    Homomorphism,
    classify,
    cokernel_order,
    enumerate_homomorphisms,
    fourier_transform,
    gsd_formula,
    image_order,
    inverse_fourier_transform,
    kernel_order,
)
from .hilbert import LinearOp, OpSum, SiteLayout, StateVector, character_basis, clock_shift, commutator_norm, embed
from .lattice import TorusLattice, build_torus, straight_dual_path, straight_path
from .models import Family, Model, ModelSpec, ThetaAction, build_hamiltonian, solvability_check
from .spectra import (
    confinement_profile,
    diagonalize_edge_op,
    fake_holonomy,
    first_levels,
    ground_space_dimension,
    ground_state,
    solve_w_operators,
    string_x,
    string_z,
)

__version__ = "0.1.0"

__all__ = [
    "Character",
    "CyclicGroup",
    "GroupElement",
    "Homomorphism",
    "classify",
    "cokernel_order",
    "enumerate_homomorphisms",
    "fourier_transform",
    "gsd_formula",
    "image_order",
    "inverse_fourier_transform",
    "kernel_order",
    "LinearOp",
    "OpSum",
    "SiteLayout",
    "StateVector",
    "character_basis",
    "clock_shift",
    "commutator_norm",
    "embed",
    "TorusLattice",
    "build_torus",
    "straight_dual_path",
    "straight_path",
    "Family",
    "Model",
    "ModelSpec",
    "ThetaAction",
    "build_hamiltonian",
    "solvability_check",
    "confinement_profile",
    "diagonalize_edge_op",
    "fake_holonomy",
    "first_levels",
    "ground_space_dimension",
    "ground_state",
    "solve_w_operators",
    "string_x",
    "string_z",
]
