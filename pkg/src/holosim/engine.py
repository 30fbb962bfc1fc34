"""Lindblad propagation engine.

Fixed-step RK4 on the vectorized master equation

    drho/dt = -i[H(t), rho] + sum_c rate_c (2 A_c rho A_c+ - {A_c+A_c, rho})

with the Hamiltonian given as a sparse term table (see ``hamiltonians``) and
the collapse operators decomposed once into an elementwise damping matrix
plus sparse gain channels.  Propagation is batched: a stack of density
matrices with per-entry dissipation rates integrates in one pass, which is
how the rate sweeps and the process-matrix constructions stay cheap.

The hot loop lives in a compiled extension (``holosim._core``) when the
build produced one, with a pure-numpy fallback (``holosim._core_py``) of
identical semantics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Sequence

import numpy as np

from holosim.device import LatticeModel
from holosim.hamiltonians import TimeDependentHamiltonian

try:  # compiled lane, optional
    from holosim import _core as _kernels

    _BACKEND = "compiled"
except ImportError:  # pragma: no cover - depends on build environment
    from holosim import _core_py as _kernels

    _BACKEND = "python"

__all__ = [
    "InvariantError",
    "DensityMatrix",
    "NoiseSpec",
    "LinearChannel",
    "backend_name",
    "collapse_operators",
    "hermitian_op_basis",
    "propagate",
    "propagate_batch",
    "propagate_unitary",
    "process_matrix",
    "run_schedule",
    "select_step",
]

TRACE_TOL = 1e-8
HERM_TOL = 1e-10
EIG_TOL = -1e-7
NORM_TOL = 1e-8
DEFAULT_POINTS_PER_PERIOD = 200
MAX_TOTAL_STEPS = 200_000_000


class InvariantError(RuntimeError):
    """A propagation invariant (trace, Hermiticity, positivity, norm) broke."""


def backend_name() -> str:
    """Which kernel lane is active: 'compiled' or 'python'."""
    return _BACKEND


@dataclass
class DensityMatrix:
    """Density matrix with its time tag (seconds)."""

    data: np.ndarray
    time: float = 0.0

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @staticmethod
    def from_state(psi: np.ndarray, time: float = 0.0) -> DensityMatrix:
        psi = np.asarray(psi, dtype=complex)
        return DensityMatrix(np.outer(psi, psi.conj()), time)

    def validate(self) -> None:
        rho = self.data
        herm = float(np.max(np.abs(rho - rho.conj().T)))
        if herm > HERM_TOL:
            raise InvariantError(f"density matrix not Hermitian: max deviation {herm:.3e}")
        tr = float(np.trace(rho).real)
        if abs(tr - 1.0) > TRACE_TOL:
            raise InvariantError(f"density matrix trace {tr!r} deviates from 1 beyond {TRACE_TOL}")
        lo = float(np.linalg.eigvalsh(rho)[0])
        if lo < EIG_TOL:
            raise InvariantError(f"density matrix has eigenvalue {lo:.3e} below {EIG_TOL}")


@dataclass(frozen=True)
class NoiseSpec:
    """Uniform per-transmon noise rates (rad/s).

    ``relaxation_weight_sqrt2`` selects the bosonic sqrt(2) weight for the
    upper relaxation rung instead of the default integer weight 2.
    """

    relaxation_rate: float
    dephasing_rate: float
    relaxation_weight_sqrt2: bool = False

    def __post_init__(self) -> None:
        if self.relaxation_rate < 0 or self.dephasing_rate < 0:
            raise ValueError("noise rates must be nonnegative")


def _embed(op: np.ndarray, site: int, dims: Sequence[int]) -> np.ndarray:
    factors = [np.eye(d, dtype=complex) for d in dims]
    factors[site] = op
    return reduce(np.kron, factors)


def relaxation_op(levels: int, sqrt2_weight: bool = False) -> np.ndarray:
    """Single-transmon relaxation operator sum_m w_m |m><m+1| with weights
    1, 2 (or 1, sqrt(2)) on the first two rungs."""
    a = np.zeros((levels, levels), dtype=complex)
    for m in range(levels - 1):
        w = math.sqrt(m + 1.0) if sqrt2_weight else (m + 1.0)
        a[m, m + 1] = w
    return a


def dephasing_op(levels: int) -> np.ndarray:
    """Single-transmon dephasing operator sum_m m |m><m|."""
    return np.diag(np.arange(levels, dtype=float)).astype(complex)


def collapse_operators(model: LatticeModel, noise: NoiseSpec) -> list[tuple[float, np.ndarray]]:
    """Per-transmon relaxation and dephasing operators with their L(A)
    prefactors, embedded in the full product space.

    Returns (rate, A) pairs entering rate*(2 A rho A+ - {A+A, rho}); the
    prefactor is half the sweep rate kappa, so each channel carries the
    standard dissipator kappa*(A rho A+ - {A+A, rho}/2).  Zero-rate channels
    are dropped; kappa = 0 gives an empty list (unitary propagation).
    """
    dims = model.dims()
    out: list[tuple[float, np.ndarray]] = []
    for site, q in enumerate(model.qubits):
        if noise.relaxation_rate > 0:
            a = relaxation_op(q.levels, noise.relaxation_weight_sqrt2)
            out.append((0.5 * noise.relaxation_rate, _embed(a, site, dims)))
        if noise.dephasing_rate > 0:
            a = dephasing_op(q.levels)
            out.append((0.5 * noise.dephasing_rate, _embed(a, site, dims)))
    return out


@dataclass(frozen=True)
class _CompiledDissipators:
    gamma: np.ndarray  # (B, d, d) float64
    src_off: np.ndarray  # (C+1,) int32
    src: np.ndarray  # (S,) int32
    dst: np.ndarray  # (S,) int32
    w: np.ndarray  # (S,) complex128
    gaincoef: np.ndarray  # (B, C) float64


def _compile_dissipators(ops: Sequence[np.ndarray], rates: np.ndarray, dim: int) -> _CompiledDissipators:
    """Decompose collapse operators into the kernel's damping + gain form.

    rates has shape (B, C): the L(A) prefactor of channel c for batch entry b.
    Requires every A+A diagonal (true for ladder-type and diagonal operators)
    and injective nonzero row/column patterns per operator, so the kernel's
    scatter updates never collide.
    """
    rates = np.atleast_2d(np.asarray(rates, dtype=float))
    n_b = rates.shape[0]
    if rates.shape[1] != len(ops):
        raise ValueError(f"rate matrix has {rates.shape[1]} channels for {len(ops)} operators")

    gamma = np.zeros((n_b, dim, dim), dtype=float)
    src_parts, dst_parts, w_parts, offs, coefs = [], [], [], [0], []
    for c, a in enumerate(ops):
        a = np.asarray(a, dtype=complex)
        if a.shape != (dim, dim):
            raise ValueError("collapse operator dimension mismatch")
        ada = a.conj().T @ a
        v = np.diag(ada).real
        off_diag = float(np.max(np.abs(ada - np.diag(np.diag(ada)))))
        if off_diag > 1e-12 * max(1.0, float(np.max(v))):
            raise ValueError("collapse operator with non-diagonal A+A is not supported")
        # anticommutator part is elementwise: -rate * (v_i + v_j) * rho_ij
        gamma += rates[:, c][:, None, None] * (v[:, None] + v[None, :])[None, :, :]
        dst_c, src_c = np.nonzero(a)
        if len(np.unique(src_c)) != len(src_c) or len(np.unique(dst_c)) != len(dst_c):
            raise ValueError("collapse operator with colliding entries is not supported")
        src_parts.append(src_c.astype(np.int32))
        dst_parts.append(dst_c.astype(np.int32))
        w_parts.append(a[dst_c, src_c].astype(np.complex128))
        offs.append(offs[-1] + len(src_c))
        coefs.append(2.0 * rates[:, c])

    return _CompiledDissipators(
        gamma=gamma,
        src_off=np.asarray(offs, dtype=np.int32),
        src=np.concatenate(src_parts) if src_parts else np.zeros(0, dtype=np.int32),
        dst=np.concatenate(dst_parts) if dst_parts else np.zeros(0, dtype=np.int32),
        w=np.concatenate(w_parts) if w_parts else np.zeros(0, dtype=np.complex128),
        gaincoef=np.stack(coefs, axis=1) if coefs else np.zeros((n_b, 0)),
    )


def _dissipator_rate_scale(ops: Sequence[np.ndarray], rates: np.ndarray) -> float:
    rates = np.atleast_2d(np.asarray(rates, dtype=float))
    scale = 0.0
    for c, a in enumerate(ops):
        v_max = float(np.max(np.abs(np.asarray(a)))) ** 2 * a.shape[0]
        scale += float(np.max(rates[:, c])) * 4.0 * v_max
    return scale


def select_step(
    ham: TimeDependentHamiltonian,
    t0: float,
    t1: float,
    points_per_period: int = DEFAULT_POINTS_PER_PERIOD,
    max_step: float | None = None,
    extra_rate: float = 0.0,
) -> tuple[float, int]:
    """Fixed step resolving the fastest angular rate with the requested
    number of points per period.  Returns (step, n_steps) tiling [t0, t1]."""
    if t1 <= t0:
        raise ValueError("t1 must exceed t0")
    if ham.terms is not None:
        rate = max(ham.terms.rate_bound(), extra_rate)
    elif max_step is not None:
        rate = 0.0
    else:
        raise ValueError("generic Hamiltonians need an explicit max_step")
    span = t1 - t0
    h = span
    if rate > 0:
        h = (2.0 * np.pi / rate) / points_per_period
    if max_step is not None:
        h = min(h, max_step)
    n = max(1, math.ceil(span / h))
    if n > MAX_TOTAL_STEPS:
        raise InvariantError(f"step-size underflow: {n} steps requested for one segment")
    return span / n, n


def _term_arrays(ham: TimeDependentHamiltonian):
    t = ham.terms
    return (t.i_idx, t.j_idx, t.amp, t.omega, t.beta, t.nu, t.phase)


def _rk4_density_generic(ham, gamma, channels, rho, t0, h, n_steps):
    """Python RK4 for callable Hamiltonians; mirrors the kernel semantics."""

    def deriv(hmat, rho_s):
        drho = -1j * (hmat @ rho_s - rho_s @ hmat)
        drho -= gamma * rho_s
        for s, d_, wpair, coef in channels:
            sub = rho_s[:, s[:, None], s[None, :]]
            drho[:, d_[:, None], d_[None, :]] += coef * (wpair * sub)
        return drho

    tr0 = np.einsum("bii->b", rho).real.copy()
    drift = 0.0
    h_t = ham(t0)
    for k in range(n_steps):
        t = t0 + k * h
        h_mid = ham(t + 0.5 * h)
        h_end = ham(t + h)
        k1 = deriv(h_t, rho)
        k2 = deriv(h_mid, rho + (0.5 * h) * k1)
        k3 = deriv(h_mid, rho + (0.5 * h) * k2)
        k4 = deriv(h_end, rho + h * k3)
        rho += (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
        symm = rho + rho.conj().transpose(0, 2, 1)
        symm *= 0.5
        np.copyto(rho, symm)
        h_t = h_end
        drift = max(drift, float(np.max(np.abs(np.einsum("bii->b", rho).real - tr0))))
    return drift


def propagate_batch(
    ham: TimeDependentHamiltonian,
    ops: Sequence[np.ndarray],
    rates: np.ndarray,
    rhos: np.ndarray,
    t0: float,
    t1: float,
    points_per_period: int = DEFAULT_POINTS_PER_PERIOD,
    max_step: float | None = None,
) -> tuple[np.ndarray, dict]:
    """Propagate a stack of density matrices over [t0, t1].

    Parameters
    ----------
    ham : TimeDependentHamiltonian
    ops : collapse operator matrices (shared across the batch)
    rates : (B, C) or (C,) L(A) prefactors per batch entry
    rhos : (B, d, d) initial operators (need not be states; trace drift is
        measured against each entry's own initial trace)
    t0, t1 : seconds
    points_per_period, max_step : step control

    Returns
    -------
    (final stack, info dict with 'step', 'n_steps', 'trace_drift')
    """
    rhos = np.array(rhos, dtype=np.complex128, copy=True)
    if rhos.ndim == 2:
        rhos = rhos[None, :, :]
    n_b, dim = rhos.shape[0], rhos.shape[-1]
    rates = np.atleast_2d(np.asarray(rates, dtype=float))
    if rates.shape[0] == 1 and n_b > 1:
        rates = np.repeat(rates, n_b, axis=0)
    diss = _compile_dissipators(ops, rates, dim)

    if rates.shape[0] != n_b:
        raise ValueError(f"rate matrix rows {rates.shape[0]} do not match batch size {n_b}")
    h, n = select_step(
        ham, t0, t1, points_per_period, max_step, extra_rate=_dissipator_rate_scale(ops, rates)
    )
    if ham.terms is not None:
        drift = _kernels.rk4_density(
            *_term_arrays(ham),
            diss.gamma,
            diss.src_off,
            diss.src,
            diss.dst,
            diss.w,
            diss.gaincoef,
            rhos,
            float(t0),
            float(h),
            int(n),
        )
    else:
        channels = [
            (
                diss.src[diss.src_off[c] : diss.src_off[c + 1]],
                diss.dst[diss.src_off[c] : diss.src_off[c + 1]],
                np.outer(
                    diss.w[diss.src_off[c] : diss.src_off[c + 1]],
                    diss.w[diss.src_off[c] : diss.src_off[c + 1]].conj(),
                ),
                diss.gaincoef[:, c][:, None, None],
            )
            for c in range(len(ops))
        ]
        drift = _rk4_density_generic(ham, diss.gamma, channels, rhos, t0, h, n)

    if drift > TRACE_TOL:
        raise InvariantError(
            f"trace drift {drift:.3e} beyond {TRACE_TOL} over [{t0:.3e}, {t1:.3e}] at step {h:.3e}"
        )
    return rhos, {"step": h, "n_steps": n, "trace_drift": drift}


def run_schedule(
    segments: Sequence[tuple[TimeDependentHamiltonian, float, float]],
    ops: Sequence[np.ndarray],
    rates: np.ndarray,
    rhos: np.ndarray,
    points_per_period: int = DEFAULT_POINTS_PER_PERIOD,
    max_step: float | None = None,
) -> tuple[np.ndarray, dict]:
    """Propagate a stack through consecutive (ham, t0, t1) segments."""
    info = {"step": 0.0, "n_steps": 0, "trace_drift": 0.0}
    for ham, t0, t1 in segments:
        rhos, seg = propagate_batch(ham, ops, rates, rhos, t0, t1, points_per_period, max_step)
        info["step"] = max(info["step"], seg["step"])
        info["n_steps"] += seg["n_steps"]
        info["trace_drift"] = max(info["trace_drift"], seg["trace_drift"])
    return rhos, info


def propagate(
    ham: TimeDependentHamiltonian,
    collapses: Sequence[tuple[float, np.ndarray]],
    rho0: DensityMatrix,
    t0: float,
    t1: float,
    points_per_period: int = DEFAULT_POINTS_PER_PERIOD,
    max_step: float | None = None,
) -> DensityMatrix:
    """Propagate one density matrix; validates the result's invariants."""
    ops = [a for _, a in collapses]
    rates = np.array([[r for r, _ in collapses]], dtype=float)
    stack, _ = propagate_batch(ham, ops, rates, rho0.data, t0, t1, points_per_period, max_step)
    out = DensityMatrix(stack[0], t1)
    out.validate()
    return out


def propagate_unitary(
    ham: TimeDependentHamiltonian,
    psi0: np.ndarray,
    t0: float,
    t1: float,
    points_per_period: int = DEFAULT_POINTS_PER_PERIOD,
    max_step: float | None = None,
) -> np.ndarray:
    """Schrodinger propagation of one or more pure states (rows)."""
    psi = np.array(psi0, dtype=np.complex128, copy=True)
    single = psi.ndim == 1
    if single:
        psi = psi[None, :]
    h, n = select_step(ham, t0, t1, points_per_period, max_step)
    if ham.terms is not None:
        drift = _kernels.rk4_state(*_term_arrays(ham), psi, float(t0), float(h), int(n))
    else:
        drift = _rk4_state_generic(ham, psi, t0, h, n)
    if drift > NORM_TOL:
        raise InvariantError(f"state norm drifted by {drift:.3e} beyond {NORM_TOL}")
    return psi[0] if single else psi


def _rk4_state_generic(ham, psi, t0, h, n_steps):
    nrm0 = np.sqrt(np.einsum("bi,bi->b", psi.conj(), psi).real)
    drift = 0.0
    h_t = ham(t0)
    for k in range(n_steps):
        t = t0 + k * h
        h_mid = ham(t + 0.5 * h)
        h_end = ham(t + h)
        k1 = -1j * (psi @ h_t.T)
        k2 = -1j * ((psi + (0.5 * h) * k1) @ h_mid.T)
        k3 = -1j * ((psi + (0.5 * h) * k2) @ h_mid.T)
        k4 = -1j * ((psi + h * k3) @ h_end.T)
        psi += (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
        h_t = h_end
        nrm = np.sqrt(np.einsum("bi,bi->b", psi.conj(), psi).real)
        drift = max(drift, float(np.max(np.abs(nrm - nrm0))))
    return drift


def hermitian_op_basis(basis: np.ndarray) -> np.ndarray:
    """Orthonormal Hermitian operator basis of the span of the given states.

    basis: (k, d) array of orthonormal state vectors.  Returns (k*k, d, d):
    first the k projectors |v_i><v_i|, then for each pair i<j the symmetric
    and antisymmetric combinations (|v_i><v_j| +/- h.c.)/sqrt(2), ordered by
    (i, j).  Orthonormal under the Hilbert-Schmidt inner product.
    """
    basis = np.asarray(basis, dtype=complex)
    k, d = basis.shape
    overlaps = basis.conj() @ basis.T
    if np.max(np.abs(overlaps - np.eye(k))) > 1e-12:
        raise ValueError("subspace basis is not orthonormal")
    ops = []
    for i in range(k):
        ops.append(np.outer(basis[i], basis[i].conj()))
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    for i in range(k):
        for j in range(i + 1, k):
            cross = np.outer(basis[i], basis[j].conj())
            ops.append((cross + cross.conj().T) * inv_sqrt2)
            ops.append(1j * (cross - cross.conj().T) * inv_sqrt2)
    return np.stack(ops)


@dataclass
class LinearChannel:
    """Linear map on operators supported in a subspace, stored by the images
    of an orthonormal Hermitian operator basis."""

    in_ops: np.ndarray  # (n, d, d) Hermitian, HS-orthonormal
    out_ops: np.ndarray  # (n, d, d) propagated images
    coeff_tol: float = 1e-9

    def coefficients(self, rho: np.ndarray) -> np.ndarray:
        """Hilbert-Schmidt components of a Hermitian operator in the input
        basis; rejects operators with support outside the subspace."""
        rho = np.asarray(rho, dtype=complex)
        coeffs = np.einsum("nij,ji->n", self.in_ops, rho).real
        recon = np.tensordot(coeffs, self.in_ops, axes=(0, 0))
        err = float(np.max(np.abs(recon - rho)))
        if err > self.coeff_tol * max(1.0, float(np.max(np.abs(rho)))):
            raise ValueError(f"operator lies outside the channel subspace (residual {err:.3e})")
        return coeffs

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return np.tensordot(self.coefficients(rho), self.out_ops, axes=(0, 0))

    def apply_state(self, psi: np.ndarray) -> np.ndarray:
        psi = np.asarray(psi, dtype=complex)
        return self.apply(np.outer(psi, psi.conj()))


def process_matrix(
    ham: TimeDependentHamiltonian | Sequence[tuple[TimeDependentHamiltonian, float, float]],
    collapses: Sequence[tuple[float, np.ndarray]],
    basis: np.ndarray,
    t0: float | None = None,
    t1: float | None = None,
    points_per_period: int = DEFAULT_POINTS_PER_PERIOD,
    max_step: float | None = None,
) -> LinearChannel:
    """Channel of the evolution restricted to initial operators supported on
    the span of ``basis`` (k orthonormal states), obtained by propagating the
    k^2 Hermitian basis operators in one batch.

    ``ham`` may be a single Hamiltonian with (t0, t1), or a full
    (ham, t0, t1) segment schedule.
    """
    if isinstance(ham, TimeDependentHamiltonian):
        if t0 is None or t1 is None:
            raise ValueError("t0 and t1 required with a single Hamiltonian")
        segments = [(ham, t0, t1)]
    else:
        segments = list(ham)
    in_ops = hermitian_op_basis(basis)
    ops = [a for _, a in collapses]
    rates = np.array([[r for r, _ in collapses]], dtype=float)
    out_ops, _ = run_schedule(segments, ops, rates, in_ops, points_per_period, max_step)
    return LinearChannel(in_ops=in_ops, out_ops=out_ops)
