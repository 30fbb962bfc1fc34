"""Rotating-frame Hamiltonians of the modulated, driven transmon lattice.

Two families are built here.  The full interaction-picture Hamiltonian keeps
every excitation-exchange term of each capacitive coupling (including the
double-occupation rung that a two-level treatment drops) and both rungs of
the auxiliary drive, with the exact modulation phase factors; no
rotating-wave approximation is made.  The effective resonant Hamiltonians
keep only the Bessel-weighted resonant terms and are time independent.

Every time-dependent matrix entry has the shape

    z(t) = amp * exp(-i * (omega * t + beta * cos(nu * t + phase)))

so a Hamiltonian is stored as a table of such terms (``TermSet``) plus the
implied Hermitian conjugates.  The integrator consumes the table directly;
``TimeDependentHamiltonian`` also evaluates dense snapshots for checks and
for generic (callable) Hamiltonians that do not fit the table form.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special

from holosim.device import ROLE_AUXILIARY, ROLE_TARGET, LatticeModel, hilbert_dim

__all__ = [
    "ModulationSpec",
    "DriveSpec",
    "TermSet",
    "TimeDependentHamiltonian",
    "bessel_j",
    "build_h_interaction",
    "build_h_interaction_2t",
    "build_h_interaction_3t",
    "build_h_effective_1q",
    "build_h_effective_2q",
    "effective_terms_1q",
    "effective_terms_2q",
]

BESSEL_RANGE = 20.0


def bessel_j(m: int, beta: float) -> float:
    """Bessel function of the first kind J_m(beta).

    Parameters
    ----------
    m : int
        Nonnegative integer order.
    beta : float
        Argument, |beta| <= 20.

    Returns
    -------
    float
        J_m(beta), absolute error below 1e-12 over the supported range.
    """
    if m < 0 or m != int(m):
        raise ValueError(f"order must be a nonnegative integer, got {m}")
    if abs(beta) > BESSEL_RANGE:
        raise ValueError(f"modulation index {beta} outside supported range |beta| <= {BESSEL_RANGE}")
    return float(special.jv(m, beta))


@dataclass(frozen=True)
class ModulationSpec:
    """Sinusoidal transition-frequency modulation of one transmon.

    The modulated frequency is
    omega(t) = omega_0 + amplitude * sin(frequency * t + phase_offset),
    with ``phase_offset`` holding the full offset (baseline pi/2, plus any
    relative phase for multi-tone gates).  ``beta`` = amplitude/frequency is
    the modulation index that sets the Bessel-weighted effective coupling.
    """

    label: str
    amplitude: float  # rad/s
    frequency: float  # rad/s
    phase_offset: float = np.pi / 2

    def __post_init__(self) -> None:
        if self.frequency <= 0:
            raise ValueError("modulation frequency must be positive")
        if not np.isfinite(self.amplitude / self.frequency):
            raise ValueError("modulation index must be finite")

    @property
    def beta(self) -> float:
        return self.amplitude / self.frequency


@dataclass(frozen=True)
class DriveSpec:
    """Classical drive on an auxiliary transmon: amplitude, detuning from the
    0-1 transition (0 = resonant, the default operating point), and phase."""

    label: str
    amplitude: float  # rad/s
    detuning: float = 0.0  # rad/s
    phase: float = 0.0


@dataclass(frozen=True)
class TermSet:
    """Table of upper-triangular time-dependent matrix entries."""

    dim: int
    i_idx: np.ndarray  # int32, row (raised-state) index
    j_idx: np.ndarray  # int32, column index
    amp: np.ndarray  # complex128
    omega: np.ndarray  # float64, rad/s linear phase rate
    beta: np.ndarray  # float64, modulation index
    nu: np.ndarray  # float64, rad/s modulation frequency
    phase: np.ndarray  # float64, modulation phase offset

    def __post_init__(self) -> None:
        if np.any(self.i_idx == self.j_idx):
            raise ValueError("diagonal terms are not representable in this table")

    @property
    def n_terms(self) -> int:
        return len(self.amp)

    def values(self, t: float) -> np.ndarray:
        return self.amp * np.exp(-1j * (self.omega * t + self.beta * np.cos(self.nu * t + self.phase)))

    def dense(self, t: float) -> np.ndarray:
        h = np.zeros((self.dim, self.dim), dtype=complex)
        z = self.values(t)
        np.add.at(h, (self.i_idx, self.j_idx), z)
        return h + h.conj().T

    def rate_bound(self) -> float:
        """Upper bound on the fastest angular rate present: the largest
        instantaneous phase rate of any entry, or the Hamiltonian norm scale,
        whichever is larger.  Used for integrator step selection."""
        if self.n_terms == 0:
            return 0.0
        phase_rate = float(np.max(np.abs(self.omega) + np.abs(self.beta) * self.nu))
        norm_bound = 2.0 * float(np.sum(np.abs(self.amp)))
        return max(phase_rate, norm_bound)

    @staticmethod
    def from_entries(dim: int, entries: list[tuple[int, int, complex, float, float, float, float]]) -> TermSet:
        if entries:
            i, j, amp, omega, beta, nu, phase = (np.array(col) for col in zip(*entries))
        else:
            i = j = np.zeros(0)
            amp = omega = beta = nu = phase = np.zeros(0)
        return TermSet(
            dim=dim,
            i_idx=i.astype(np.int32),
            j_idx=j.astype(np.int32),
            amp=amp.astype(np.complex128),
            omega=omega.astype(np.float64),
            beta=beta.astype(np.float64),
            nu=nu.astype(np.float64),
            phase=phase.astype(np.float64),
        )

    @staticmethod
    def from_static(h: np.ndarray) -> TermSet:
        """Table form of a constant Hamiltonian with zero diagonal."""
        h = np.asarray(h, dtype=complex)
        if np.max(np.abs(np.diag(h))) > 0:
            raise ValueError("static table form requires a zero diagonal")
        entries = []
        for i in range(h.shape[0]):
            for j in range(i + 1, h.shape[1]):
                if h[i, j] != 0:
                    entries.append((i, j, h[i, j], 0.0, 0.0, 1.0, 0.0))
        return TermSet.from_entries(h.shape[0], entries)


@dataclass(frozen=True)
class TimeDependentHamiltonian:
    """Hermitian-valued evaluator t -> H(t), in rad/s units.

    Carries either a ``TermSet`` (fast integrator lane) or an arbitrary
    callable (generic lane); both evaluate dense Hermitian snapshots.
    """

    dim: int
    terms: TermSet | None = None
    func: Callable[[float], np.ndarray] | None = None

    def __call__(self, t: float) -> np.ndarray:
        if self.terms is not None:
            return self.terms.dense(t)
        if self.func is not None:
            return np.asarray(self.func(t), dtype=complex)
        return np.zeros((self.dim, self.dim), dtype=complex)

    @staticmethod
    def from_terms(terms: TermSet) -> TimeDependentHamiltonian:
        return TimeDependentHamiltonian(dim=terms.dim, terms=terms)

    @staticmethod
    def from_func(dim: int, func: Callable[[float], np.ndarray]) -> TimeDependentHamiltonian:
        return TimeDependentHamiltonian(dim=dim, func=func)


def _strides(dims: tuple[int, ...]) -> list[int]:
    strides = [1] * len(dims)
    for i in range(len(dims) - 2, -1, -1):
        strides[i] = strides[i + 1] * dims[i + 1]
    return strides


def _spectator_offsets(dims: tuple[int, ...], strides: list[int], active: tuple[int, ...]) -> list[int]:
    """Flat-index offsets enumerating all level combinations of the
    non-active tensor factors."""
    offsets = [0]
    for site, dim in enumerate(dims):
        if site in active:
            continue
        offsets = [off + lvl * strides[site] for off in offsets for lvl in range(dim)]
    return offsets


def build_h_interaction(
    model: LatticeModel,
    modulations: tuple[ModulationSpec, ...] | list[ModulationSpec] = (),
    drive: DriveSpec | None = None,
) -> TimeDependentHamiltonian:
    """Full interaction-picture Hamiltonian of the selected subsystem.

    Every coupling edge contributes all (levels-1)^2 exchange rungs
    |m+1, n><m, n+1| with amplitude g*sqrt((m+1)(n+1)) and linear phase rate
    Delta + m*alpha_target - n*alpha_aux.  If the edge's target is modulated,
    each of its rungs also carries the exact phase factor
    exp(-i beta cos(nu t + phase)).  Idle edges (neither endpoint modulated)
    keep their plain off-resonant phases; they are part of the hardware and
    are not dropped.  A drive contributes every rung of the driven
    transmon's charge ladder with phase rate j*alpha - delta.
    """
    dims = model.dims()
    dim = hilbert_dim(model)
    strides = _strides(dims)
    mod_by_label = {}
    for mod in modulations:
        if mod.label in mod_by_label:
            raise ValueError(f"duplicate modulation on qubit {mod.label!r}")
        if model.qubit(mod.label).role != ROLE_TARGET:
            raise ValueError(f"modulation must address a target qubit, got {mod.label!r}")
        mod_by_label[mod.label] = mod

    entries: list[tuple[int, int, complex, float, float, float, float]] = []
    for a, b, g in model.couplings:
        qa, qb = model.qubit(a), model.qubit(b)
        target, aux = (qa, qb) if qa.role == ROLE_TARGET else (qb, qa)
        st, sa = model.index(target.label), model.index(aux.label)
        mod = mod_by_label.get(target.label)
        beta = mod.beta if mod is not None else 0.0
        nu = mod.frequency if mod is not None else 1.0
        mphase = mod.phase_offset if mod is not None else 0.0
        for m in range(dims[st] - 1):
            for n in range(dims[sa] - 1):
                amp = g * np.sqrt((m + 1.0) * (n + 1.0))
                omega = target.detuning + m * target.anharmonicity - n * aux.anharmonicity
                base_i = (m + 1) * strides[st] + n * strides[sa]
                base_j = m * strides[st] + (n + 1) * strides[sa]
                for off in _spectator_offsets(dims, strides, (st, sa)):
                    entries.append((base_i + off, base_j + off, amp, omega, beta, nu, mphase))

    if drive is not None:
        driven = model.qubit(drive.label)
        if driven.role != ROLE_AUXILIARY:
            raise ValueError(f"drive must address an auxiliary qubit, got {drive.label!r}")
        sd = model.index(drive.label)
        for j in range(dims[sd] - 1):
            amp = 0.5 * drive.amplitude * np.sqrt(j + 1.0) * np.exp(1j * drive.phase)
            omega = j * driven.anharmonicity - drive.detuning
            base_i = (j + 1) * strides[sd]
            base_j = j * strides[sd]
            for off in _spectator_offsets(dims, strides, (sd,)):
                entries.append((base_i + off, base_j + off, amp, omega, 0.0, 1.0, 0.0))

    return TimeDependentHamiltonian.from_terms(TermSet.from_entries(dim, entries))


def build_h_interaction_2t(
    model: LatticeModel, modulation: ModulationSpec, drive: DriveSpec
) -> TimeDependentHamiltonian:
    """Full Hamiltonian of one modulated target coupled to one driven auxiliary."""
    if len(model.qubits) != 2:
        raise ValueError(f"expected a two-qubit subsystem, got {len(model.qubits)} qubits")
    return build_h_interaction(model, (modulation,), drive)


def build_h_interaction_3t(
    model: LatticeModel, modulations: tuple[ModulationSpec, ModulationSpec]
) -> TimeDependentHamiltonian:
    """Full Hamiltonian of a target-auxiliary-target chain with both targets modulated."""
    if len(model.qubits) != 3:
        raise ValueError(f"expected a three-qubit subsystem, got {len(model.qubits)} qubits")
    if len(modulations) != 2:
        raise ValueError("exactly two modulations required")
    return build_h_interaction(model, tuple(modulations), None)


def effective_terms_1q(
    gp_ab: float, eps: float, phi: float, dims: tuple[int, int] = (3, 3), sites: tuple[int, int] = (0, 1)
) -> TermSet:
    """Term table of the resonant effective single-target Hamiltonian,
    embedded in the product space ``dims`` with (target, auxiliary) tensor
    positions ``sites``."""
    strides = _strides(dims)
    st, sa = sites
    entries = [
        # exchange |1>_t<0| (x) |0>_a<1|
        (strides[st], strides[sa], complex(gp_ab), 0.0, 0.0, 1.0, 0.0),
    ]
    # drive ladder rung |1>_a<0| on every level of the remaining factors
    for off in _spectator_offsets(dims, strides, (sa,)):
        entries.append((strides[sa] + off, off, 0.5 * eps * np.exp(1j * phi), 0.0, 0.0, 1.0, 0.0))
    dim = int(np.prod(dims))
    return TermSet.from_entries(dim, entries)


def build_h_effective_1q(gp_ab: float, eps: float, phi: float) -> np.ndarray:
    """Resonant effective Hamiltonian of one target plus its driven auxiliary,
    embedded in the 9-dimensional two-transmon space.

    g' |10><01| + (eps/2) e^{i phi} |1>_aux<0| + h.c., with the drive acting
    on the auxiliary for every target level.

    Parameters
    ----------
    gp_ab : float
        Bessel-weighted exchange coupling, rad/s.
    eps : float
        Drive amplitude, rad/s.
    phi : float
        Drive phase, rad.
    """
    return effective_terms_1q(gp_ab, eps, phi).dense(0.0)


def effective_terms_2q(
    gp_ab: float,
    gp_bc: float,
    varphi: float,
    dims: tuple[int, int, int] = (3, 3, 3),
    sites: tuple[int, int, int] = (0, 1, 2),
) -> TermSet:
    """Term table of the resonant effective two-target Hamiltonian, embedded
    in the product space ``dims`` with (target1, auxiliary, target2) tensor
    positions ``sites``."""
    strides = _strides(dims)
    s1, sa, s2 = sites
    entries = []
    for off in _spectator_offsets(dims, strides, (s1, sa)):
        # |0>_t1<1| (x) |1>_a<0|: row index has the auxiliary excited
        entries.append((strides[sa] + off, strides[s1] + off, complex(gp_ab), 0.0, 0.0, 1.0, 0.0))
    for off in _spectator_offsets(dims, strides, (sa, s2)):
        entries.append((strides[s2] + off, strides[sa] + off, gp_bc * np.exp(1j * varphi), 0.0, 0.0, 1.0, 0.0))
    dim = int(np.prod(dims))
    return TermSet.from_entries(dim, entries)


def build_h_effective_2q(gp_ab: float, gp_bc: float, varphi: float) -> np.ndarray:
    """Resonant effective Hamiltonian of two targets sharing one auxiliary,
    embedded in the 27-dimensional three-transmon space (target, auxiliary,
    target tensor order).

    g'_ab |01><10| on the (t1, aux) pair + g'_bc e^{i varphi} |01><10| on the
    (aux, t2) pair + h.c.
    """
    return effective_terms_2q(gp_ab, gp_bc, varphi).dense(0.0)
