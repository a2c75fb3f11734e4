"""Shortcuts to adiabaticity for two and three interacting spins.

Pulses are inverse-engineered from Lewis-Riesenfeld invariants, scored with
perturbative error sensitivities, and checked by direct integration of the
Schroedinger equation.
"""

from ._kernels import BACKEND
from .dynamics import SimulationResult, fidelity, integrate, propagator
from .errors import (
    AlphaSearchError,
    BasisMismatch,
    ConfigurationError,
    DecouplingViolation,
    DesignError,
    DomainError,
    QuadratureError,
    SpinstaError,
    StepSizeError,
)
from .invariant import AngleTrajectory, angles_from_fields, fields_from_angles, invariant_matrix, lr_phase
from .pulse import ControlPulse
from .pulsedesign import AnsatzSpec, design_angles, find_alpha, synthesize
from .scenarios import Scenario, registry, run
from .sensitivity import SensitivityReport, q_detuning, q_dm, q_rabi, q_systematic
from .spinmodel import Kind, OperatorMatrix, SpinSystemModel, build_hamiltonian

__version__ = "0.1.0"
