"""Named fidelity sweeps over the decoherence rate.

Chains the lattice model, gate synthesis, the Lindblad engine and the
fidelity metrics into reproducible runs: the reference phase-gate sweep
(``fig2_up``), the mediated two-target exchange sweep (``fig3_swaplike``),
the three-gate state-transfer sequence (``fig4_sequence``), and
user-assembled recipe lists (``custom``).  Every runner returns a
FidelityCurve whose CSV text is byte-stable across runs.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .device import (
    ROLE_AUXILIARY,
    ROLE_TARGET,
    ConfigError,
    LatticeModel,
    computational_indices,
    hilbert_dim,
    load_lattice,
    subsystem,
)
from .engine import (
    DEFAULT_POINTS_PER_PERIOD,
    NoiseSpec,
    collapse_operators,
    process_matrix,
    propagate_unitary,
)
from .hamiltonians import (
    TimeDependentHamiltonian,
    build_h_interaction,
    effective_terms_1q,
    effective_terms_2q,
)
from .metrics import (
    CurvePoint,
    FidelityCurve,
    gate_fidelity_1q,
    gate_fidelity_2q,
    leakage,
    state_fidelity,
)
from .operators import matrix_exp
from .synthesis import (
    GateRecipe,
    check_cyclic,
    check_parallel_transport,
    make_rot_z,
    make_two_qubit,
)

TWO_PI = 2.0 * math.pi

SCENARIO_NAMES = ("fig2_up", "fig3_swaplike", "fig4_sequence", "custom")
MODE_FULL = "full"
MODE_EFFECTIVE = "effective"
MODES = (MODE_FULL, MODE_EFFECTIVE)

# 11 rates spanning the experimentally relevant decoherence window
DEFAULT_KAPPA_GRID = tuple(TWO_PI * 1.0e3 * k for k in range(11))

# the composed sequence leaves an undriven edge coupled to the transiently
# excited auxiliary during each phase gate; its static dispersive pull is
# uncompensated in the full model, so that scenario defaults to the
# effective model the reference values were stated for
SCENARIO_DEFAULT_MODE = {
    "fig2_up": MODE_FULL,
    "fig3_swaplike": MODE_FULL,
    "fig4_sequence": MODE_EFFECTIVE,
    "custom": MODE_EFFECTIVE,
}

PHASE_GATE_GAMMA = math.pi / 8.0
TRANSFER_MIX = math.pi / 2.0
TRANSFER_PHASE = math.pi

# Reference operating point; the named scenarios refuse to run on a lattice
# that drifts from these numbers, since their quoted fidelities assume them.
PIN_ALPHA_MHZ = {"A": 375.0, "B": 350.0, "C": 310.0, "D": 340.0, "E": 325.0}
PIN_DELTA_MHZ = {"A": 245.0, "C": 230.0, "D": 240.0, "E": 235.0}
PIN_COUPLING_MHZ = 11.41

_SCENARIO_LABELS = {
    "fig2_up": ("A", "B"),
    "fig3_swaplike": ("A", "B", "C"),
    "fig4_sequence": ("A", "B", "E"),
}

DEFAULT_CONFIG = """\
[qubit.A]
role = "target"
anharmonicity_MHz = 375.0
detuning_MHz = 245.0

[qubit.B]
role = "auxiliary"
anharmonicity_MHz = 350.0

[qubit.C]
role = "target"
anharmonicity_MHz = 310.0
detuning_MHz = 230.0

[qubit.D]
role = "target"
anharmonicity_MHz = 340.0
detuning_MHz = 240.0

[qubit.E]
role = "target"
anharmonicity_MHz = 325.0
detuning_MHz = 235.0

[[coupling]]
a = "A"
b = "B"
g_MHz = 11.41

[[coupling]]
a = "B"
b = "C"
g_MHz = 11.41

[[coupling]]
a = "B"
b = "D"
g_MHz = 11.41

[[coupling]]
a = "B"
b = "E"
g_MHz = 11.41
"""


@dataclass(frozen=True)
class ScenarioSpec:
    """Settings shared by every sweep runner.

    Parameters
    ----------
    name : str
        One of SCENARIO_NAMES.  Each runner insists on its own name so a
        spec cannot silently drive the wrong scenario.
    config_text : str, optional
        TOML lattice description; None selects the built-in reference
        lattice.  Named scenarios verify the pinned operating point of
        every transmon they use and reject any drift.
    kappa_grid : tuple of float
        Decoherence sweep values, nonnegative and strictly ascending,
        quoted frequency-style as 2*pi times the kHz tick.  Every
        relaxation and dephasing channel runs at the cyclic rate
        kappa/(2*pi) in 1/s, the reading that reproduces the pinned
        reference curves; the CSV axis reports kappa/(2*pi) in kHz.
    mode : str, optional
        "full" integrates the complete exchange Hamiltonian including all
        counter-rotating terms and every coupled edge, driven or not;
        "effective" integrates the resonant first-harmonic model.  None
        picks the scenario's pinned default: full dynamics for the
        single-gate and two-gate reference sweeps, the effective model
        for the composed sequence and for custom schedules.  The
        composed sequence is the one scenario where undriven edges stay
        live next to an excited auxiliary, and their static dispersive
        pull is left uncompensated in full mode, so its full-model curve
        sits far below the effective-model reference.
    grid_1q : int
        Input-family size for single-target gate fidelities, endpoints
        included.
    grid_2q : int
        Per-axis size of the half-open product grid for two-target gate
        fidelities.
    points_per_period : int
        Integrator resolution per fastest oscillation period.
    max_windings : int
        Search bound for the path-closure solver.
    sqrt2_relaxation : bool
        Use the bosonic sqrt(2) weight on the upper relaxation rung
        instead of the default integer weight.
    recipes : tuple of GateRecipe
        Gate list for the custom scenario, applied in order.
    out_path : str, optional
        Destination hint recorded by the CLI; the runners ignore it.
    """

    name: str = "fig2_up"
    config_text: str | None = None
    kappa_grid: tuple[float, ...] = DEFAULT_KAPPA_GRID
    mode: str | None = None
    grid_1q: int = 1001
    grid_2q: int = 100
    points_per_period: int = DEFAULT_POINTS_PER_PERIOD
    max_windings: int = 10
    sqrt2_relaxation: bool = False
    recipes: tuple[GateRecipe, ...] = ()
    out_path: str | None = None

    def __post_init__(self):
        if self.name not in SCENARIO_NAMES:
            raise ConfigError(f"unknown scenario {self.name!r}; expected one of {SCENARIO_NAMES}")
        if self.mode is not None and self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        kappas = tuple(float(k) for k in self.kappa_grid)
        if not kappas:
            raise ConfigError("kappa grid must hold at least one rate")
        if kappas[0] < 0.0 or any(b <= a for a, b in zip(kappas, kappas[1:])):
            raise ConfigError("kappa grid must be nonnegative and strictly ascending")
        object.__setattr__(self, "kappa_grid", kappas)
        object.__setattr__(self, "recipes", tuple(self.recipes))
        if self.grid_1q < 2:
            raise ConfigError("grid_1q needs at least 2 points")
        if self.grid_2q < 1:
            raise ConfigError("grid_2q needs at least 1 point per axis")
        if self.points_per_period < 1:
            raise ConfigError("points_per_period must be positive")
        if self.max_windings < 0:
            raise ConfigError("max_windings must be nonnegative")

    @property
    def resolved_mode(self) -> str:
        if self.mode is not None:
            return self.mode
        return SCENARIO_DEFAULT_MODE[self.name]

    def lattice(self) -> LatticeModel:
        text = DEFAULT_CONFIG if self.config_text is None else self.config_text
        return load_lattice(text)


def _coerce_spec(spec: ScenarioSpec | None, name: str) -> ScenarioSpec:
    if spec is None:
        return ScenarioSpec(name=name)
    if spec.name != name:
        raise ConfigError(f"spec names scenario {spec.name!r}, but this runner is {name!r}")
    return spec


def _mhz(rate: float) -> float:
    return rate / (TWO_PI * 1.0e6)


def _require_pinned(model: LatticeModel, edges: tuple[tuple[str, str], ...]) -> None:
    """Reject lattices whose used transmons drift from the pinned point."""
    for q in model.qubits:
        pinned_role = ROLE_AUXILIARY if q.label == "B" else ROLE_TARGET
        if q.role != pinned_role:
            raise ConfigError(f"scenario pins {q.label!r} as a {pinned_role} transmon")
        _check_pin(q.anharmonicity, PIN_ALPHA_MHZ.get(q.label), f"anharmonicity of {q.label!r}")
        if q.role == ROLE_TARGET:
            _check_pin(q.detuning, PIN_DELTA_MHZ.get(q.label), f"detuning of {q.label!r}")
    for a, b in edges:
        _check_pin(model.coupling(a, b), PIN_COUPLING_MHZ, f"coupling {a!r}-{b!r}")


def _check_pin(value: float, pinned_mhz: float | None, what: str) -> None:
    if pinned_mhz is None:
        raise ConfigError(f"{what} has no pinned reference value")
    if not math.isclose(value, TWO_PI * pinned_mhz * 1.0e6, rel_tol=1e-9, abs_tol=1e-3):
        raise ConfigError(
            f"{what} is {_mhz(value):.6g} MHz, but the scenario pins {pinned_mhz:.6g} MHz"
        )


def _scenario_model(name: str, spec: ScenarioSpec) -> LatticeModel:
    model = subsystem(spec.lattice(), _SCENARIO_LABELS[name])
    _require_pinned(model, tuple((a, "B") for a in _SCENARIO_LABELS[name] if a != "B"))
    return model


def scenario_model(name: str, config_text: str | None = None) -> LatticeModel:
    """Pinned-subsystem model of a named scenario, operating point verified."""
    if name not in _SCENARIO_LABELS:
        raise ConfigError(f"scenario {name!r} has no pinned subsystem")
    return _scenario_model(name, ScenarioSpec(name=name, config_text=config_text))


def recipes_subsystem(lattice: LatticeModel, recipes) -> LatticeModel:
    """Subsystem spanning every transmon a recipe list touches, lattice order."""
    used = []
    for recipe in recipes:
        used.extend(label for label in recipe.labels if label not in used)
    labels = tuple(label for label in lattice.labels() if label in used)
    if len(labels) != len(used):
        missing = sorted(set(used) - set(labels))
        raise ConfigError(f"recipes reference unknown transmons {missing}")
    return subsystem(lattice, labels)


def named_recipes(
    name: str, model: LatticeModel | None = None, max_windings: int = 10
) -> tuple[GateRecipe, ...]:
    """Pinned gate list of a named scenario, on its reference subsystem."""
    if name not in _SCENARIO_LABELS:
        raise ConfigError(f"scenario {name!r} has no pinned recipe list")
    if model is None:
        model = subsystem(load_lattice(DEFAULT_CONFIG), _SCENARIO_LABELS[name])
    if name == "fig2_up":
        return (make_rot_z(PHASE_GATE_GAMMA, model, target="A", auxiliary="B",
                           max_windings=max_windings),)
    if name == "fig3_swaplike":
        return (make_two_qubit(TRANSFER_MIX, TRANSFER_PHASE, model,
                               targets=("A", "C"), auxiliary="B"),)
    return (
        make_rot_z(PHASE_GATE_GAMMA, model, target="A", auxiliary="B", max_windings=max_windings),
        make_two_qubit(TRANSFER_MIX, TRANSFER_PHASE, model, targets=("A", "E"), auxiliary="B"),
        make_rot_z(PHASE_GATE_GAMMA, model, target="E", auxiliary="B", max_windings=max_windings),
    )


def _flat_index(model: LatticeModel, occupations: dict[str, int]) -> int:
    dims = model.dims()
    strides = [1] * len(dims)
    for i in range(len(dims) - 2, -1, -1):
        strides[i] = strides[i + 1] * dims[i + 1]
    return sum(occ * strides[model.index(label)] for label, occ in occupations.items())


def _one_hot_rows(dim: int, indices: list[int]) -> np.ndarray:
    rows = np.zeros((len(indices), dim), dtype=complex)
    rows[np.arange(len(indices)), indices] = 1.0
    return rows


def computational_basis(model: LatticeModel) -> np.ndarray:
    """One-hot rows spanning the computational subspace (targets in {0, 1},
    auxiliaries in ground), ordered with the first target's bit slowest."""
    return _one_hot_rows(hilbert_dim(model), computational_indices(model))


def _computational_projector(model: LatticeModel) -> np.ndarray:
    proj = np.zeros((hilbert_dim(model),) * 2, dtype=complex)
    idx = computational_indices(model)
    proj[idx, idx] = 1.0
    return proj


def segment_hamiltonian(
    recipe: GateRecipe, segment, model: LatticeModel, mode: str
) -> TimeDependentHamiltonian:
    """One control segment's Hamiltonian in the given mode, embedded in the
    model's product space."""
    if mode == MODE_FULL:
        return build_h_interaction(model, segment.modulations, segment.drive)
    if mode != MODE_EFFECTIVE:
        raise ConfigError(f"unknown mode {mode!r}; expected one of {MODES}")
    dims = model.dims()
    half = 0.5 * recipe.mixing_angle
    if recipe.kind == "two_qubit":
        t1, t2 = recipe.targets
        sites = (model.index(t1), model.index(recipe.auxiliary), model.index(t2))
        terms = effective_terms_2q(
            recipe.rabi_rate * math.cos(half),
            recipe.rabi_rate * math.sin(half),
            recipe.angles[1],
            dims,
            sites,
        )
    else:
        (target,) = recipe.targets
        sites = (model.index(target), model.index(recipe.auxiliary))
        terms = effective_terms_1q(
            recipe.rabi_rate * math.cos(half),
            recipe.rabi_rate * math.sin(half),
            segment.drive.phase,
            dims,
            sites,
        )
    return TimeDependentHamiltonian.from_terms(terms)


def schedule_segments(
    recipes: tuple[GateRecipe, ...] | list[GateRecipe],
    model: LatticeModel,
    mode: str,
    t_start: float = 0.0,
) -> tuple[list[tuple[TimeDependentHamiltonian, float, float]], float]:
    """(hamiltonian, t0, t1) rows of the chained gate schedules.

    Absolute time carries across gate boundaries, so every oscillating term
    keeps a continuous phase, as with free-running sources on hardware.
    """
    rows = []
    t = float(t_start)
    for recipe in recipes:
        for label in recipe.labels:
            model.qubit(label)  # unknown labels fail before any propagation
        for seg in recipe.segments:
            rows.append((segment_hamiltonian(recipe, seg, model, mode), t, t + seg.duration))
            t += seg.duration
    return rows, t


def _is_static(ham: TimeDependentHamiltonian) -> bool:
    t = ham.terms
    if t is None:
        return False
    return t.n_terms == 0 or (not np.any(t.omega) and not np.any(t.beta))


def evolve_states(
    segments: list[tuple[TimeDependentHamiltonian, float, float]],
    psis: np.ndarray,
    points_per_period: int = DEFAULT_POINTS_PER_PERIOD,
) -> np.ndarray:
    """Noise-free evolution of pure states (rows) through a segment
    schedule.  Static segments use the exact exponential; oscillating ones
    integrate at fixed step."""
    psis = np.array(psis, dtype=complex, copy=True)
    for ham, t0, t1 in segments:
        if _is_static(ham):
            psis = psis @ matrix_exp(ham(t0), t1 - t0).T
        else:
            psis = propagate_unitary(ham, psis, t0, t1, points_per_period)
    return psis


def schedule_propagator(
    segments: list[tuple[TimeDependentHamiltonian, float, float]],
    dim: int,
    points_per_period: int = DEFAULT_POINTS_PER_PERIOD,
) -> np.ndarray:
    """Noise-free propagator of a segment schedule; columns are the evolved
    basis vectors."""
    return evolve_states(segments, np.eye(dim, dtype=complex), points_per_period).T


def _sweep_curve(
    spec: ScenarioSpec,
    model: LatticeModel,
    segments: list[tuple[TimeDependentHamiltonian, float, float]],
    in_basis: np.ndarray,
    ideal_unitary: np.ndarray,
    out_basis: np.ndarray | None,
    state_coeff: np.ndarray,
    params: dict,
) -> FidelityCurve:
    """Shared sweep core: one linear channel per rate, scored on the input
    family, the single named state, and the computational-subspace leakage."""
    out_b = in_basis if out_basis is None else out_basis
    two_target = in_basis.shape[0] == 4
    gate_fn = gate_fidelity_2q if two_target else gate_fidelity_1q
    n_grid = spec.grid_2q if two_target else spec.grid_1q
    proj = _computational_projector(model)
    psi_ideal = (state_coeff @ ideal_unitary.T) @ out_b

    points = []
    for kappa in spec.kappa_grid:
        # sweep values are frequency-style (2*pi x kHz); dissipators take
        # the cyclic rate, which is what the reference curves were run at
        noise = NoiseSpec(
            relaxation_rate=kappa / TWO_PI,
            dephasing_rate=kappa / TWO_PI,
            relaxation_weight_sqrt2=spec.sqrt2_relaxation,
        )
        channel = process_matrix(
            segments,
            collapse_operators(model, noise),
            in_basis,
            points_per_period=spec.points_per_period,
        )
        f_gate = gate_fn(channel.apply, in_basis, ideal_unitary, out_basis=out_b, n=n_grid)
        rho_out = channel.apply_state(state_coeff @ in_basis)
        points.append(
            CurvePoint(
                kappa=float(kappa),
                state_fidelity=state_fidelity(rho_out, psi_ideal),
                gate_fidelity=float(f_gate),
                leakage=leakage(rho_out, proj),
            )
        )
    return FidelityCurve(points=tuple(points), params=params)


def _base_params(spec: ScenarioSpec, name: str) -> dict:
    return {
        "scenario": name,
        "mode": spec.resolved_mode,
        "kappa_points": len(spec.kappa_grid),
        "dissipator_rate": "kappa_over_2pi",
        "points_per_period": spec.points_per_period,
        "sqrt2_relaxation": spec.sqrt2_relaxation,
    }


def run_fig2(spec: ScenarioSpec | None = None) -> FidelityCurve:
    """Decoherence sweep of the pinned conditional phase gate.

    The target carries an equatorial input family; the curve reports the
    named-state fidelity at the equal superposition, the family-averaged
    gate fidelity, and the computational-subspace leakage.
    """
    spec = _coerce_spec(spec, "fig2_up")
    model = _scenario_model("fig2_up", spec)
    (recipe,) = named_recipes("fig2_up", model, spec.max_windings)
    segments, t_end = schedule_segments((recipe,), model, spec.resolved_mode)
    in_basis = computational_basis(model)

    params = _base_params(spec, "fig2_up")
    params.update(
        gate="rot_z",
        gamma_rad=recipe.angles[0],
        target="A",
        auxiliary="B",
        beta=recipe.segments[0].modulations[0].beta,
        Delta_MHz=_mhz(model.qubit("A").detuning),
        g_MHz=_mhz(model.coupling("A", "B")),
        Omega_MHz=_mhz(recipe.rabi_rate),
        epsilon_MHz=_mhz(recipe.segments[0].drive.amplitude),
        total_ns=t_end * 1e9,
        grid=spec.grid_1q,
    )
    coeff = np.array([1.0, 1.0]) / math.sqrt(2.0)
    return _sweep_curve(spec, model, segments, in_basis, recipe.ideal_unitary, None, coeff, params)


def run_fig3(spec: ScenarioSpec | None = None) -> FidelityCurve:
    """Decoherence sweep of the pinned state-transfer two-target gate.

    Scores the product input family on the two targets and the named state
    that transfers the second target's excitation onto the first.
    """
    spec = _coerce_spec(spec, "fig3_swaplike")
    model = _scenario_model("fig3_swaplike", spec)
    (recipe,) = named_recipes("fig3_swaplike", model, spec.max_windings)
    segments, t_end = schedule_segments((recipe,), model, spec.resolved_mode)
    in_basis = computational_basis(model)

    mods = recipe.segments[0].modulations
    params = _base_params(spec, "fig3_swaplike")
    params.update(
        gate="two_qubit",
        vartheta_rad=recipe.angles[0],
        varphi_rad=recipe.angles[1],
        targets="A-C",
        auxiliary="B",
        beta_A=mods[0].beta,
        beta_C=mods[1].beta,
        Delta_A_MHz=_mhz(model.qubit("A").detuning),
        Delta_C_MHz=_mhz(model.qubit("C").detuning),
        g_MHz=_mhz(model.coupling("A", "B")),
        g_total_MHz=_mhz(recipe.rabi_rate),
        total_ns=t_end * 1e9,
        grid=spec.grid_2q,
    )
    coeff = np.array([1.0, 1.0, 0.0, 0.0]) / math.sqrt(2.0)
    return _sweep_curve(spec, model, segments, in_basis, recipe.ideal_unitary, None, coeff, params)


def run_fig4(spec: ScenarioSpec | None = None) -> FidelityCurve:
    """Decoherence sweep of the three-gate state-transfer sequence.

    A phase gate on the first target, a full transfer to the far target,
    and the phase gate again on the far target compose to a single phase
    gate that ends on the far target; the input family starts on the first
    target and the ideal outputs are scored on the far one.  Both phase
    gates share the reference Rabi rate; the far pair realizes it by
    retuning its drive amplitude to the same mixing angle.
    """
    spec = _coerce_spec(spec, "fig4_sequence")
    model = _scenario_model("fig4_sequence", spec)
    recipes = named_recipes("fig4_sequence", model, spec.max_windings)
    segments, t_end = schedule_segments(recipes, model, spec.resolved_mode)

    dim = hilbert_dim(model)
    in_basis = _one_hot_rows(dim, [0, _flat_index(model, {"A": 1})])
    out_basis = _one_hot_rows(dim, [0, _flat_index(model, {"E": 1})])
    # two quarter-turn conditional phases compose to a half turn on the far target
    ideal = np.diag([1.0, np.exp(0.5j * math.pi)])

    params = _base_params(spec, "fig4_sequence")
    params.update(
        gates="rot_z:A+two_qubit:A-E+rot_z:E",
        gamma_rad=recipes[0].angles[0],
        Omega_MHz=_mhz(recipes[0].rabi_rate),
        drive_policy="shared_rabi_reference_retuned_epsilon",
        Delta_A_MHz=_mhz(model.qubit("A").detuning),
        Delta_E_MHz=_mhz(model.qubit("E").detuning),
        g_MHz=_mhz(model.coupling("A", "B")),
        total_ns=t_end * 1e9,
        grid=spec.grid_1q,
    )
    coeff = np.array([1.0, 1.0]) / math.sqrt(2.0)
    return _sweep_curve(spec, model, segments, in_basis, ideal, out_basis, coeff, params)


def _embed_logical(
    u_small: np.ndarray, gate_targets: tuple[str, ...], all_targets: tuple[str, ...]
) -> np.ndarray:
    """Embed a gate's logical unitary into the joint target register.

    Bit order follows ``all_targets`` with the first label most significant,
    matching the computational-basis row order.
    """
    k = len(all_targets)
    pos = [all_targets.index(t) for t in gate_targets]
    rest = [i for i in range(k) if i not in pos]
    m = len(gate_targets)
    full = np.zeros((2**k, 2**k), dtype=complex)
    for spectator in itertools.product((0, 1), repeat=len(rest)):
        base = sum(bit << (k - 1 - i) for bit, i in zip(spectator, rest))
        for a in range(2**m):
            row = base + sum(((a >> (m - 1 - j)) & 1) << (k - 1 - pos[j]) for j in range(m))
            for b in range(2**m):
                col = base + sum(((b >> (m - 1 - j)) & 1) << (k - 1 - pos[j]) for j in range(m))
                full[row, col] = u_small[a, b]
    return full


def run_custom(spec: ScenarioSpec | None = None) -> FidelityCurve:
    """Decoherence sweep of a user-assembled recipe list.

    The participating transmons form the simulated subsystem; the ideal
    gate is the composition of the recipes' logical unitaries on the
    target register (one or two targets).  An empty recipe list runs a
    zero-duration schedule on the lattice's first target-auxiliary pair
    and scores the identity.  The named state is the equal superposition
    on the first target.
    """
    spec = _coerce_spec(spec, "custom")
    lattice = spec.lattice()
    if spec.recipes:
        model = recipes_subsystem(lattice, spec.recipes)
    else:
        targets = [q.label for q in lattice.qubits if q.role == ROLE_TARGET]
        auxes = [q.label for q in lattice.qubits if q.role == ROLE_AUXILIARY]
        if not targets or not auxes:
            raise ConfigError("lattice needs at least one target and one auxiliary transmon")
        model = subsystem(lattice, (targets[0], auxes[0]))

    target_labels = tuple(q.label for q in model.qubits if q.role == ROLE_TARGET)
    recipe_targets = {t for r in spec.recipes for t in r.targets}
    scored = tuple(t for t in target_labels if t in recipe_targets) or target_labels[:1]
    if len(scored) > 2:
        raise ConfigError("fidelity scoring supports one or two target transmons")

    segments, t_end = schedule_segments(spec.recipes, model, spec.resolved_mode)
    ideal = np.eye(2 ** len(scored), dtype=complex)
    for recipe in spec.recipes:
        ideal = _embed_logical(recipe.ideal_unitary, recipe.targets, scored) @ ideal

    dim = hilbert_dim(model)
    indices = [
        sum(bit and _flat_index(model, {scored[i]: 1}) for i, bit in enumerate(bits))
        for bits in itertools.product((0, 1), repeat=len(scored))
    ]
    in_basis = _one_hot_rows(dim, indices)

    params = _base_params(spec, "custom")
    params.update(
        gates="+".join(f"{r.kind}:{'-'.join(r.targets)}" for r in spec.recipes) or "identity",
        subsystem="-".join(model.labels()),
        total_ns=t_end * 1e9,
        grid=spec.grid_2q if len(scored) == 2 else spec.grid_1q,
    )
    coeff = np.zeros(2 ** len(scored))
    coeff[0] = coeff[2 ** len(scored) // 2] = 1.0 / math.sqrt(2.0)
    return _sweep_curve(spec, model, segments, in_basis, ideal, None, coeff, params)


def run_scenario(spec: ScenarioSpec) -> FidelityCurve:
    """Dispatch a spec to its runner by name."""
    runner = {
        "fig2_up": run_fig2,
        "fig3_swaplike": run_fig3,
        "fig4_sequence": run_fig4,
        "custom": run_custom,
    }[spec.name]
    return runner(spec)


def holonomy_check(
    recipes: tuple[GateRecipe, ...] | list[GateRecipe],
    model: LatticeModel,
    mode: str = MODE_FULL,
    points_per_period: int = DEFAULT_POINTS_PER_PERIOD,
) -> dict:
    """Geometric-evolution diagnostics of each recipe, noise-free.

    For every recipe, evaluates the in-subspace Hamiltonian residual (the
    no-dynamical-phase condition), the cyclicity overlap of the evolved
    computational subspace, and the auxiliary's ground population at the
    final time.  Only the computational basis states are propagated.
    Returns per-recipe reports plus aggregate extrema.
    """
    reports = []
    dims = model.dims()
    dim = hilbert_dim(model)
    for recipe in recipes:
        segments, _ = schedule_segments((recipe,), model, mode)
        indices = [
            sum(bit and _flat_index(model, {t: 1}) for t, bit in zip(recipe.targets, bits))
            for bits in itertools.product((0, 1), repeat=len(recipe.targets))
        ]
        basis = _one_hot_rows(dim, indices)
        proj = basis.T @ basis.conj()

        residual = 0.0
        for ham, t0, t1 in segments:
            samples = np.linspace(t0, t1, 7)
            residual = max(residual, check_parallel_transport(ham, proj, samples))

        outs = evolve_states(segments, basis, points_per_period)
        # rank-k restriction of the propagator; acts as U on the span
        u_final = outs.T @ basis.conj()
        overlap = check_cyclic(u_final, basis)
        site = model.index(recipe.auxiliary)
        stride = int(np.prod(dims[site + 1 :], dtype=int))
        digits = (np.arange(dim) // stride) % dims[site]
        ground = float(np.min(np.sum(np.abs(outs[:, digits == 0]) ** 2, axis=1)))

        reports.append(
            {
                "kind": recipe.kind,
                "targets": recipe.targets,
                "auxiliary": recipe.auxiliary,
                "php_max_rad_s": residual,
                "cyclic_overlap": overlap,
                "aux_ground_population": ground,
            }
        )
    return {
        "mode": mode,
        "recipes": reports,
        "php_max_rad_s": max(r["php_max_rad_s"] for r in reports),
        "cyclic_min": min(r["cyclic_overlap"] for r in reports),
        "aux_ground_min": min(r["aux_ground_population"] for r in reports),
    }
