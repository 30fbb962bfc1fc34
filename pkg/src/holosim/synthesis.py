"""Holonomic gate synthesis.

Turns rotation requests into timed two-segment drive schedules (single-qubit
gates) or single-segment double-modulation schedules (two-qubit gates),
computes the ideal conditional unitaries in closed form, and provides the
parallel-transport and cyclicity checks that certify the holonomic character
of a schedule.

Segment durations come from a pair of winding congruences: the dressed
two-subspace propagator factors through diag singular values (q1, q2) =
(cos^2(theta/4), sin^2(theta/4)), and a half-path of dimensionless length
``a`` maps one subspace onto the other exactly when cos(a*q1) = cos(a*q2) = 0
with prescribed signs of the sines.  Exact solutions exist only for mixing
angles whose half-angle cosine is a particular rational; everything else
raises with the nearest achievable angle so the caller can retune the
drive-to-coupling ratio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from holosim.device import ROLE_AUXILIARY, ROLE_TARGET, LatticeModel
from holosim.hamiltonians import DriveSpec, ModulationSpec, bessel_j
from holosim.operators import is_unitary, svd_F, svd_K

TWO_PI = 2.0 * math.pi

# Default modulation index: near the first-harmonic optimum but on the
# rising flank, so both retuning directions stay invertible.
REFERENCE_BETA = 1.6
# First maximum of the first-harmonic weight; inversion domain is [0, peak].
J1_PEAK = 1.8411837813406593
# Default drive-to-coupling ratio sqrt(3) fixes the mixing angle at 2*pi/3.
DRIVE_TO_COUPLING = math.sqrt(3.0)
# Below this half-angle cosine the drive amplitude would have to outgrow the
# dressed coupling by >4x; retune the modulation index down instead.
MIXING_SWITCH = 0.25
CONGRUENCE_TOL = 1e-12

GATE_KINDS = ("rot_y", "rot_z", "two_qubit")
_ANGLE_FIELDS = {
    "rot_y": ("theta_rad",),
    "rot_z": ("gamma_rad",),
    "two_qubit": ("vartheta_rad", "varphi_rad"),
}


class UnsolvableDurationError(ValueError):
    """No exact segment duration within the winding bound.

    Carries the nearest exactly solvable mixing angle ``nearest_theta`` and
    its dimensionless duration ``nearest_a`` so the caller can retune.
    """

    def __init__(self, theta: float, branch: str, max_windings: int,
                 nearest_theta: float, nearest_a: float):
        self.theta = theta
        self.branch = branch
        self.max_windings = max_windings
        self.nearest_theta = nearest_theta
        self.nearest_a = nearest_a
        super().__init__(
            f"mixing angle {theta!r} rad has no exact {branch} segment duration "
            f"within {max_windings} windings; nearest solvable angle is "
            f"{nearest_theta!r} rad with a = {nearest_a!r}"
        )


def solve_segment_duration(theta: float, branch: str, max_windings: int = 10) -> float:
    """Smallest dimensionless half-path length ``a`` closing the orange slice.

    Parameters
    ----------
    theta : float
        Mixing angle in radians, 2*atan2(drive, dressed coupling).  Any value
        except multiples of 2*pi is accepted.
    branch : str
        "G_I" for equal sine signs (+1, +1), "G_z" for opposite (+1, -1).
    max_windings : int
        Both winding integers are searched over 0..max_windings.

    Returns
    -------
    float
        a = (dressed Rabi rate) * (segment duration); satisfies
        a*cos^2(theta/4) = pi/2 (mod 2*pi) and a*sin^2(theta/4) = pi/2
        ("G_I") or 3*pi/2 ("G_z") (mod 2*pi), each to 1e-12.

    Raises
    ------
    ValueError
        For an unknown branch, negative winding bound, or theta at a
        multiple of 2*pi (where the subspaces never mix).
    UnsolvableDurationError
        When no winding pair solves the congruences exactly.
    """
    if branch not in ("G_I", "G_z"):
        raise ValueError(f"branch must be 'G_I' or 'G_z', got {branch!r}")
    if max_windings < 0:
        raise ValueError("max_windings must be >= 0")
    if abs(math.sin(0.5 * theta)) < 1e-9:
        raise ValueError("theta at a multiple of 2*pi never closes the path")

    cos_q = math.cos(0.25 * theta) ** 2
    sin_q = 1.0 - cos_q
    second = 0.5 * math.pi if branch == "G_I" else 1.5 * math.pi
    for s in range(2 * max_windings + 1):
        a = math.pi * (2 * s + 1) if branch == "G_I" else TWO_PI * (s + 1)
        r1 = math.remainder(a * cos_q - 0.5 * math.pi, TWO_PI)
        r2 = math.remainder(a * sin_q - second, TWO_PI)
        if max(abs(r1), abs(r2)) > CONGRUENCE_TOL:
            continue
        m = round((a * cos_q - 0.5 * math.pi) / TWO_PI)
        n = round((a * sin_q - second) / TWO_PI)
        if 0 <= m <= max_windings and 0 <= n <= max_windings:
            return a

    # Exhausted: report the nearest reachable half-angle cosine.
    c_req = math.cos(0.5 * theta)
    best = None
    for m in range(max_windings + 1):
        for n in range(max_windings + 1):
            if branch == "G_I":
                c = 2.0 * (m - n) / (2 * (m + n) + 1)
                a = math.pi * (2 * (m + n) + 1)
            else:
                c = (2.0 * (m - n) - 1.0) / (2 * (m + n) + 2)
                a = TWO_PI * (m + n + 1)
            gap = abs(c - c_req)
            if best is None or gap < best[0] - 1e-15 or (abs(gap - best[0]) <= 1e-15 and a < best[1]):
                best = (gap, a, c)
    raise UnsolvableDurationError(theta, branch, max_windings,
                                  2.0 * math.acos(best[2]), best[1])


@dataclass(frozen=True)
class SegmentSchedule:
    """Constant control settings held over one time segment."""

    duration: float
    modulations: tuple[ModulationSpec, ...]
    drive: DriveSpec | None = None

    def __post_init__(self):
        if not (self.duration > 0.0 and math.isfinite(self.duration)):
            raise ValueError("segment duration must be positive and finite")
        object.__setattr__(self, "modulations", tuple(self.modulations))


@dataclass(frozen=True, eq=False)
class GateRecipe:
    """Immutable gate schedule plus its ideal computational-subspace unitary.

    Parameters
    ----------
    kind : str
        One of "rot_y", "rot_z", "two_qubit".
    angles : tuple of float
        Gate angles: (theta,), (gamma,) or (vartheta, varphi).
    labels : tuple of str
        Participating transmons in tensor-factor order; single-qubit gates
        list (target, auxiliary), two-qubit gates (target, auxiliary, target).
    auxiliary : str
        Label of the mediating transmon, always prepared in its ground state.
    mixing_angle : float
        2*atan2(drive, dressed coupling) for rotations; the block mixing
        angle set by the two dressed couplings for the two-qubit gate.
    rabi_rate : float
        Dressed Rabi rate in rad/s; segment durations are a/rabi_rate.
    segments : tuple of SegmentSchedule
        Two equal-length segments (rotations) or one segment (two-qubit).
    ideal_unitary : numpy.ndarray
        Target unitary on the computational subspace of the target qubits.
    """

    kind: str
    angles: tuple[float, ...]
    labels: tuple[str, ...]
    auxiliary: str
    mixing_angle: float
    rabi_rate: float
    segments: tuple[SegmentSchedule, ...]
    ideal_unitary: np.ndarray

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "angles", tuple(float(x) for x in self.angles))
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "segments", tuple(self.segments))
        if len(self.angles) != len(_ANGLE_FIELDS[self.kind]):
            raise ValueError(f"{self.kind} takes {len(_ANGLE_FIELDS[self.kind])} angle(s)")
        if self.auxiliary not in self.labels:
            raise ValueError("auxiliary label must appear in labels")
        if self.kind == "two_qubit":
            if len(self.segments) != 1:
                raise ValueError("two_qubit recipes hold exactly one segment")
        else:
            if len(self.segments) != 2:
                raise ValueError("rotation recipes hold exactly two segments")
            d0, d1 = (s.duration for s in self.segments)
            if abs(d0 - d1) > 1e-12 * max(d0, d1):
                raise ValueError("rotation segments must have equal duration")
        u = np.array(self.ideal_unitary, dtype=complex)
        if not is_unitary(u):
            raise ValueError("ideal_unitary must be unitary")
        u.flags.writeable = False
        object.__setattr__(self, "ideal_unitary", u)

    @property
    def targets(self) -> tuple[str, ...]:
        return tuple(x for x in self.labels if x != self.auxiliary)

    @property
    def total_duration(self) -> float:
        return float(sum(s.duration for s in self.segments))


def _invert_first_harmonic(value: float) -> float:
    """Smallest modulation index whose first-harmonic weight equals ``value``."""
    if value < 0.0:
        raise ValueError("first-harmonic weight must be >= 0")
    peak = bessel_j(1, J1_PEAK)
    if value > peak + 1e-12:
        raise ValueError(f"dressed coupling ratio {value} exceeds the peak {peak}")
    if value >= peak:
        return J1_PEAK
    if value == 0.0:
        return 0.0
    return float(brentq(lambda b: bessel_j(1, b) - value, 0.0, J1_PEAK, xtol=1e-15))


def _ideal_matrix(kind: str, angles: tuple[float, ...]) -> np.ndarray:
    if kind == "rot_y":
        (theta,) = angles
        c, s = math.cos(theta), math.sin(theta)
        return np.array([[c, -s], [s, c]], dtype=complex)
    if kind == "rot_z":
        (gamma,) = angles
        return np.diag([np.exp(-1j * gamma), np.exp(1j * gamma)])
    vartheta, varphi = angles
    c, s = math.cos(vartheta), math.sin(vartheta)
    ph = np.exp(1j * varphi)
    return np.array(
        [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, c, -s * ph, 0.0],
            [0.0, -s / ph, -c, 0.0],
            [0.0, 0.0, 0.0, -1.0],
        ],
        dtype=complex,
    )


def _pair_parameters(model: LatticeModel, target: str, auxiliary: str):
    spec = model.qubit(target)
    if spec.role != ROLE_TARGET:
        raise ValueError(f"{target!r} is not a target transmon")
    if model.qubit(auxiliary).role != ROLE_AUXILIARY:
        raise ValueError(f"{auxiliary!r} is not an auxiliary transmon")
    return model.coupling(target, auxiliary), spec.detuning


def _make_rotation(kind: str, gate_angle: float, model: LatticeModel, target: str,
                   auxiliary: str, theta: float, branch: str, beta: float,
                   max_windings: int, phi_second: float) -> GateRecipe:
    if not 0.0 < theta <= math.pi:
        raise ValueError("mixing angle must lie in (0, pi]")
    a = solve_segment_duration(theta, branch, max_windings)
    g, delta = _pair_parameters(model, target, auxiliary)
    g_ref = bessel_j(1, beta) * g
    half = 0.5 * theta
    if math.cos(half) >= MIXING_SWITCH:
        beta_used, g_eff = beta, g_ref
        eps = g_eff * math.tan(half)
    else:
        # Near-pi mixing: cap the drive at the reference ratio and shrink
        # the dressed coupling by lowering the modulation index.
        eps = DRIVE_TO_COUPLING * g_ref
        g_eff = eps * math.cos(half) / math.sin(half)
        beta_used = _invert_first_harmonic(g_eff / g)
    omega = math.hypot(eps, g_eff)
    duration = a / omega
    mod = ModulationSpec(target, beta_used * delta, delta)
    segments = (
        SegmentSchedule(duration, (mod,), DriveSpec(auxiliary, eps, 0.0, 0.0)),
        SegmentSchedule(duration, (mod,), DriveSpec(auxiliary, eps, 0.0, phi_second)),
    )
    return GateRecipe(
        kind=kind,
        angles=(gate_angle,),
        labels=(target, auxiliary),
        auxiliary=auxiliary,
        mixing_angle=theta,
        rabi_rate=omega,
        segments=segments,
        ideal_unitary=_ideal_matrix(kind, (gate_angle,)),
    )


def make_rot_z(gamma: float, model: LatticeModel, target: str = "A",
               auxiliary: str = "B", *, theta: float = 2.0 * math.pi / 3.0,
               beta: float = REFERENCE_BETA, max_windings: int = 10) -> GateRecipe:
    """Z rotation by ``gamma`` on ``target``, mediated by ``auxiliary``.

    Two equal segments with the drive phase stepping from 0 to ``gamma`` at
    the midpoint.  The mixing angle ``theta`` only sets the path geometry
    and must solve the opposite-sign congruence branch; the default 2*pi/3
    (drive at sqrt(3) times the dressed coupling) closes after a = 6*pi.
    """
    return _make_rotation("rot_z", gamma, model, target, auxiliary,
                          theta, "G_z", beta, max_windings, gamma)


def make_rot_y(theta: float, model: LatticeModel, target: str = "A",
               auxiliary: str = "B", *, beta: float = REFERENCE_BETA,
               max_windings: int = 10) -> GateRecipe:
    """Y rotation by ``theta`` on ``target``, mediated by ``auxiliary``.

    The rotation angle doubles as the mixing angle, so only a discrete set
    of angles is exactly reachable; unsolvable requests raise with the
    nearest achievable angle.  The drive phase steps from 0 to pi.
    """
    return _make_rotation("rot_y", theta, model, target, auxiliary,
                          theta, "G_I", beta, max_windings, math.pi)


def make_two_qubit(vartheta: float, varphi: float, model: LatticeModel,
                   targets: tuple[str, str] = ("A", "C"), auxiliary: str = "B",
                   *, beta: float = REFERENCE_BETA) -> GateRecipe:
    """Conditional two-target gate from simultaneous modulation of both targets.

    Single segment of duration pi over the combined dressed coupling.  The
    block mixing angle ``vartheta`` is set by the ratio of the two dressed
    couplings: the larger edge keeps the reference modulation index and the
    other index is solved from the first-harmonic weight.  ``varphi`` enters
    as an extra phase offset on the second target's modulation.
    """
    if not 0.0 <= vartheta <= math.pi:
        raise ValueError("vartheta must lie in [0, pi]")
    label_a, label_c = targets
    g_ab, delta_a = _pair_parameters(model, label_a, auxiliary)
    g_bc, delta_c = _pair_parameters(model, label_c, auxiliary)
    half = 0.5 * vartheta
    if math.cos(half) >= math.sin(half):
        beta_a = beta
        gp_ab = bessel_j(1, beta) * g_ab
        gp_bc = gp_ab * math.tan(half)
        beta_c = _invert_first_harmonic(gp_bc / g_bc)
    else:
        beta_c = beta
        gp_bc = bessel_j(1, beta) * g_bc
        gp_ab = gp_bc * math.cos(half) / math.sin(half)
        beta_a = _invert_first_harmonic(gp_ab / g_ab)
    g_tot = math.hypot(gp_ab, gp_bc)
    segment = SegmentSchedule(
        math.pi / g_tot,
        (
            ModulationSpec(label_a, beta_a * delta_a, delta_a),
            ModulationSpec(label_c, beta_c * delta_c, delta_c, 0.5 * math.pi + varphi),
        ),
    )
    return GateRecipe(
        kind="two_qubit",
        angles=(vartheta, varphi),
        labels=(label_a, auxiliary, label_c),
        auxiliary=auxiliary,
        mixing_angle=vartheta,
        rabi_rate=g_tot,
        segments=(segment,),
        ideal_unitary=_ideal_matrix("two_qubit", (vartheta, varphi)),
    )


def ideal_conditional_decomposition(recipe: GateRecipe, branch: int) -> np.ndarray:
    """Closed-form conditional unitary for the auxiliary in |0> or |1>.

    Composes the per-segment closed forms of the block propagator, so the
    result carries the exact global phase of the dynamics (the stored
    ``ideal_unitary`` may differ from branch 0 by a global phase).

    Parameters
    ----------
    recipe : GateRecipe
    branch : int
        0 for the auxiliary-ground block, 1 for auxiliary-excited.

    Returns
    -------
    numpy.ndarray
        2x2 (rotations) or 4x4 (two-qubit) unitary.
    """
    if branch not in (0, 1):
        raise ValueError("branch must be 0 or 1")
    if recipe.kind == "two_qubit":
        x, _, zdag = svd_K(*recipe.angles)
        j = np.diag([1.0, 1.0, -1.0, -1.0]).astype(complex)
        if branch == 0:
            return x @ j @ x.conj().T
        z = zdag.conj().T
        return z @ j @ z.conj().T
    theta = recipe.mixing_angle
    phi1 = recipe.segments[0].drive.phase
    phi2 = recipe.segments[1].drive.phase
    sign = 1.0 if recipe.kind == "rot_y" else -1.0
    gi = np.diag([1.0, sign]).astype(complex)
    w1, _, r1dag = svd_F(theta, phi1)
    w2, _, r2dag = svd_F(theta, phi2)
    if branch == 0:
        return -w2 @ gi @ r2dag @ r1dag.conj().T @ gi @ w1.conj().T
    return -r2dag.conj().T @ gi @ w2.conj().T @ w1 @ gi @ r1dag


def check_parallel_transport(ham, projector: np.ndarray, samples) -> float:
    """Largest spectral norm of P(t) H(t) P(t) over the samples, rad/s.

    Zero certifies that the Hamiltonian never acts inside the evolving
    computational subspace (no dynamical phase).  ``samples`` is an iterable
    of either bare times (the subspace projector is used as given, which is
    exact whenever the Hamiltonian commutes with its own propagator) or
    ``(t, U_t)`` pairs, in which case the projector is conjugated to
    U_t P U_t^dagger before sandwiching; the latter reports the genuine
    residual of a non-commuting, e.g. counter-rotating, model.
    """
    p = np.asarray(projector, dtype=complex)
    worst = 0.0
    for item in samples:
        if isinstance(item, tuple):
            t, u_t = item
            u_t = np.asarray(u_t, dtype=complex)
            p_t = u_t @ p @ u_t.conj().T
        else:
            t, p_t = item, p
        h = ham(t) if callable(ham) else np.asarray(ham, dtype=complex)
        worst = max(worst, float(np.linalg.norm(p_t @ h @ p_t, 2)))
    return worst


def check_cyclic(u_final: np.ndarray, basis: np.ndarray) -> float:
    """Minimal squared overlap of the evolved basis with its original span.

    ``basis`` holds orthonormal subspace vectors as rows; 1.0 means the
    subspace returns to itself exactly.
    """
    b = np.asarray(basis, dtype=complex)
    gram = b.conj() @ b.T
    if np.max(np.abs(gram - np.eye(b.shape[0]))) > 1e-9:
        raise ValueError("basis rows must be orthonormal")
    cross = b.conj() @ np.asarray(u_final, dtype=complex) @ b.T
    return float(np.min(np.sum(np.abs(cross) ** 2, axis=0)))


def _fmt(value) -> str:
    if isinstance(value, str):
        return f'"{value}"'
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_fmt(v) for v in value) + "]"
    return repr(float(value)) if isinstance(value, float) else repr(value)


def serialize_recipe(recipe: GateRecipe) -> str:
    """Emit recipe text that ``load_recipe`` round-trips exactly.

    Frequencies and rates are plain MHz, durations ns, phases rad, matching
    the device configuration conventions.
    """
    scale = TWO_PI * 1e6
    lines = ["[gate]", f'kind = "{recipe.kind}"']
    for name, value in zip(_ANGLE_FIELDS[recipe.kind], recipe.angles):
        lines.append(f"{name} = {value!r}")
    lines.append(f"labels = {_fmt(list(recipe.labels))}")
    lines.append(f'auxiliary = "{recipe.auxiliary}"')
    lines.append(f"mixing_angle_rad = {recipe.mixing_angle!r}")
    lines.append(f"rabi_MHz = {recipe.rabi_rate / scale!r}")
    lines.append(f"total_duration_ns = {recipe.total_duration * 1e9!r}")
    for seg in recipe.segments:
        lines.append("")
        lines.append("[[gate.segment]]")
        lines.append(f"duration_ns = {seg.duration * 1e9!r}")
        if seg.drive is not None:
            lines.append("[gate.segment.drive]")
            lines.append(f'label = "{seg.drive.label}"')
            lines.append(f"amplitude_MHz = {seg.drive.amplitude / scale!r}")
            lines.append(f"detuning_MHz = {seg.drive.detuning / scale!r}")
            lines.append(f"phase_rad = {seg.drive.phase!r}")
        for mod in seg.modulations:
            lines.append("[[gate.segment.modulation]]")
            lines.append(f'target = "{mod.label}"')
            lines.append(f"amplitude_MHz = {mod.amplitude / scale!r}")
            lines.append(f"frequency_MHz = {mod.frequency / scale!r}")
            lines.append(f"phase_offset_rad = {mod.phase_offset!r}")
    lines.append("")
    return "\n".join(lines)


def load_recipe(text: str) -> GateRecipe:
    """Rebuild a recipe from ``serialize_recipe`` output."""
    scale = TWO_PI * 1e6
    gate = tomllib.loads(text)["gate"]
    kind = gate["kind"]
    if kind not in GATE_KINDS:
        raise ValueError(f"unknown gate kind {kind!r}")
    angles = tuple(float(gate[name]) for name in _ANGLE_FIELDS[kind])
    segments = []
    for seg in gate["segment"]:
        drive = None
        if "drive" in seg:
            d = seg["drive"]
            drive = DriveSpec(d["label"], d["amplitude_MHz"] * scale,
                              d["detuning_MHz"] * scale, d["phase_rad"])
        mods = tuple(
            ModulationSpec(m["target"], m["amplitude_MHz"] * scale,
                           m["frequency_MHz"] * scale, m["phase_offset_rad"])
            for m in seg.get("modulation", [])
        )
        segments.append(SegmentSchedule(seg["duration_ns"] * 1e-9, mods, drive))
    return GateRecipe(
        kind=kind,
        angles=angles,
        labels=tuple(gate["labels"]),
        auxiliary=gate["auxiliary"],
        mixing_angle=float(gate["mixing_angle_rad"]),
        rabi_rate=float(gate["rabi_MHz"]) * scale,
        segments=tuple(segments),
        ideal_unitary=_ideal_matrix(kind, angles),
    )
