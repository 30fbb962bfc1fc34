"""State and gate fidelity measures, leakage, and sweep-curve containers.

Gate fidelities average the pure-state fidelity <psi_f| rho |psi_f> over the
standard input-state families: a one-parameter rotation family
cos(t)|b0> + sin(t)|b1> on a 1001-point grid including both endpoints of
[0, 2*pi], and the two-target product family on a 100x100 grid of
2*pi*k/100, k = 0..99.  Fidelities are taken against the full density
matrix without subspace renormalization, so leakage depresses them
directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

FIDELITY_SLACK = 1e-9
DEFAULT_GRID_1Q = 1001
DEFAULT_GRID_2Q = 100


def _as_matrix(rho) -> np.ndarray:
    data = getattr(rho, "data", rho)
    return np.asarray(data, dtype=complex)


def state_fidelity(rho, psi: np.ndarray) -> float:
    """<psi| rho |psi> for a normalized pure target state."""
    mat = _as_matrix(rho)
    vec = np.asarray(psi, dtype=complex)
    if vec.ndim != 1 or mat.shape != (vec.size, vec.size):
        raise ValueError(f"dimension mismatch: rho {mat.shape}, psi {vec.shape}")
    norm = np.linalg.norm(vec)
    if abs(norm - 1.0) > 1e-8:
        raise ValueError(f"target state norm {norm} is not 1")
    return float(np.vdot(vec, mat @ vec).real)


def leakage(rho, projector: np.ndarray) -> float:
    """Population outside the computational projector, 1 - Tr(P rho)."""
    mat = _as_matrix(rho)
    p = np.asarray(projector, dtype=complex)
    if p.shape != mat.shape:
        raise ValueError("projector and state dimensions differ")
    if np.max(np.abs(p - p.conj().T)) > 1e-10 or np.max(np.abs(p @ p - p)) > 1e-10:
        raise ValueError("projector must be Hermitian and idempotent")
    return float(1.0 - np.einsum("ij,ji->", mat, p).real)


def _check_basis(basis: np.ndarray, rows: int) -> np.ndarray:
    b = np.asarray(basis, dtype=complex)
    if b.ndim != 2 or b.shape[0] != rows:
        raise ValueError(f"basis must hold {rows} row vectors")
    gram = b.conj() @ b.T
    if np.max(np.abs(gram - np.eye(rows))) > 1e-9:
        raise ValueError("basis rows must be orthonormal")
    return b


def _family_fidelities(apply_or_results, psis_in, psis_out) -> np.ndarray:
    fids = np.empty(psis_in.shape[0])
    if callable(apply_or_results):
        for i in range(psis_in.shape[0]):
            rho = apply_or_results(np.outer(psis_in[i], psis_in[i].conj()))
            fids[i] = np.vdot(psis_out[i], rho @ psis_out[i]).real
    else:
        results = list(apply_or_results)
        if len(results) != psis_in.shape[0]:
            raise ValueError(f"expected {psis_in.shape[0]} per-state results, got {len(results)}")
        for i, rho in enumerate(results):
            fids[i] = np.vdot(psis_out[i], _as_matrix(rho) @ psis_out[i]).real
    return fids


def rotation_grid(n: int = DEFAULT_GRID_1Q) -> np.ndarray:
    """Angles 2*pi*k/(n-1), k = 0..n-1: both endpoints included."""
    if n < 2:
        raise ValueError("grid needs at least 2 points")
    return np.linspace(0.0, 2.0 * np.pi, n)


def gate_fidelity_1q(apply_or_results, in_basis, ideal_unitary, out_basis=None,
                     n: int = DEFAULT_GRID_1Q) -> float:
    """Mean fidelity of a channel over the rotation input family.

    Parameters
    ----------
    apply_or_results : callable or sequence
        Either a map rho_in -> rho_out (e.g. a compiled linear channel's
        ``apply`` or a direct propagation closure), or the precomputed
        output states in grid order.
    in_basis : array (2, d)
        Orthonormal embeddings of the logical |0> and |1> input states;
        inputs are cos(t) in_basis[0] + sin(t) in_basis[1].
    ideal_unitary : array (2, 2)
        Target gate in the logical basis.
    out_basis : array (2, d), optional
        Embeddings the ideal outputs are expanded in; defaults to
        ``in_basis``.  Lets a gate sequence end on a different qubit.
    n : int
        Grid size, endpoints included.

    Returns
    -------
    float
        Mean of <psi_f| rho |psi_f> over the grid.
    """
    in_b = _check_basis(in_basis, 2)
    out_b = in_b if out_basis is None else _check_basis(out_basis, 2)
    u = np.asarray(ideal_unitary, dtype=complex)
    if u.shape != (2, 2):
        raise ValueError("ideal_unitary must be 2x2")
    t = rotation_grid(n)
    coeff = np.stack([np.cos(t), np.sin(t)], axis=1)
    psis_in = coeff @ in_b
    psis_out = (coeff @ u.T) @ out_b
    return float(np.mean(_family_fidelities(apply_or_results, psis_in, psis_out)))


def product_grid(n: int = DEFAULT_GRID_2Q) -> np.ndarray:
    """Angles 2*pi*k/n, k = 0..n-1: half-open, no endpoint duplication."""
    if n < 1:
        raise ValueError("grid needs at least 1 point")
    return 2.0 * np.pi * np.arange(n) / n


def gate_fidelity_2q(apply_or_results, in_basis, ideal_unitary, out_basis=None,
                     n: int = DEFAULT_GRID_2Q) -> float:
    """Mean fidelity of a channel over the two-target product family.

    Inputs are (cos t1 |0> + sin t1 |1>) x (cos t2 |0> + sin t2 |1>) on the
    n x n product grid; ``in_basis`` holds the four logical embeddings in
    the order |00>, |01>, |10>, |11>.  Other arguments as gate_fidelity_1q.
    """
    in_b = _check_basis(in_basis, 4)
    out_b = in_b if out_basis is None else _check_basis(out_basis, 4)
    u = np.asarray(ideal_unitary, dtype=complex)
    if u.shape != (4, 4):
        raise ValueError("ideal_unitary must be 4x4")
    t = product_grid(n)
    c1 = np.stack([np.cos(t), np.sin(t)], axis=1)
    # product coefficients on the n*n grid, first angle varying slowest
    coeff = np.einsum("ia,jb->ijab", c1, c1).reshape(n * n, 4)
    psis_in = coeff @ in_b
    psis_out = (coeff @ u.T) @ out_b
    return float(np.mean(_family_fidelities(apply_or_results, psis_in, psis_out)))


def average_unitary_fidelity(u_actual: np.ndarray, u_ideal: np.ndarray) -> float:
    """Average gate fidelity of a (possibly leaky) subspace propagator.

    For M = u_ideal^dagger u_actual on a d-dimensional subspace the
    Haar-averaged state fidelity is (Tr(M M^dagger) + |Tr M|^2) / (d(d+1));
    global phases drop out and leakage out of the subspace shows up as
    Tr(M M^dagger) < d.
    """
    a = np.asarray(u_actual, dtype=complex)
    b = np.asarray(u_ideal, dtype=complex)
    if a.shape != b.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("operators must be square and of equal dimension")
    m = b.conj().T @ a
    d = m.shape[0]
    return float((np.einsum("ij,ij->", m, m.conj()).real + abs(np.trace(m)) ** 2)
                 / (d * (d + 1)))


class CurvePoint(NamedTuple):
    kappa: float
    state_fidelity: float
    gate_fidelity: float
    leakage: float


@dataclass(frozen=True, eq=False)
class FidelityCurve:
    """Fidelity and leakage versus decoherence rate.

    Parameters
    ----------
    points : tuple of CurvePoint
        kappa in rad/s, strictly ascending and nonnegative; fidelities in
        [0, 1] up to 1e-9 slack.
    params : dict
        Pinned scenario parameters, emitted into the CSV header so every
        curve file is self-describing.
    sweep : str
        Name of the sweep variable.
    """

    points: tuple[CurvePoint, ...]
    params: dict
    sweep: str = "kappa"

    def __post_init__(self):
        pts = tuple(CurvePoint(*p) for p in self.points)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "params", dict(self.params))
        last = -1.0
        for p in pts:
            if p.kappa < 0.0 or p.kappa <= last:
                raise ValueError("kappa values must be nonnegative and ascending")
            last = p.kappa
            for value in (p.state_fidelity, p.gate_fidelity):
                if not -FIDELITY_SLACK <= value <= 1.0 + FIDELITY_SLACK:
                    raise ValueError(f"fidelity {value} outside [0, 1]")
            if not -FIDELITY_SLACK <= p.leakage <= 1.0 + FIDELITY_SLACK:
                raise ValueError(f"leakage {p.leakage} outside [0, 1]")

    def to_csv(self) -> str:
        """Deterministic CSV text with a `# params:` header line."""
        pairs = " ".join(f"{k}={v!r}" if isinstance(v, float) else f"{k}={v}"
                         for k, v in self.params.items())
        lines = [f"# params: {pairs}",
                 "kappa_over_2pi_kHz,state_fidelity,gate_fidelity,leakage"]
        for p in self.points:
            khz = p.kappa / (2.0 * np.pi * 1e3)
            lines.append(f"{khz!r},{p.state_fidelity!r},{p.gate_fidelity!r},{p.leakage!r}")
        return "\n".join(lines) + "\n"
