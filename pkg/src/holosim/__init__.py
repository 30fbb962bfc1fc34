"""Pulse-level simulation and gate synthesis for nonadiabatic holonomic
gates on capacitively coupled three-level transmons."""

from holosim.device import ConfigError, LatticeModel, TransmonSpec, load_lattice, subsystem
from holosim.engine import (
    InvariantError,
    NoiseSpec,
    backend_name,
    collapse_operators,
    process_matrix,
    propagate,
    run_schedule,
)
from holosim.metrics import (
    CurvePoint,
    FidelityCurve,
    average_unitary_fidelity,
    gate_fidelity_1q,
    gate_fidelity_2q,
    leakage,
    state_fidelity,
)
from holosim.operators import kron, ladder, matrix_exp, svd_F, svd_K
from holosim.scenarios import (
    ScenarioSpec,
    holonomy_check,
    named_recipes,
    run_scenario,
    scenario_model,
)
from holosim.synthesis import (
    GateRecipe,
    UnsolvableDurationError,
    load_recipe,
    make_rot_y,
    make_rot_z,
    make_two_qubit,
    serialize_recipe,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "ConfigError",
    "CurvePoint",
    "FidelityCurve",
    "GateRecipe",
    "InvariantError",
    "LatticeModel",
    "NoiseSpec",
    "ScenarioSpec",
    "TransmonSpec",
    "UnsolvableDurationError",
    "average_unitary_fidelity",
    "backend_name",
    "collapse_operators",
    "gate_fidelity_1q",
    "gate_fidelity_2q",
    "holonomy_check",
    "kron",
    "ladder",
    "leakage",
    "load_lattice",
    "load_recipe",
    "make_rot_y",
    "make_rot_z",
    "make_two_qubit",
    "matrix_exp",
    "named_recipes",
    "process_matrix",
    "propagate",
    "run_scenario",
    "run_schedule",
    "scenario_model",
    "serialize_recipe",
    "state_fidelity",
    "subsystem",
    "svd_F",
    "svd_K",
]
