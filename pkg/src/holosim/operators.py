"""Complex matrix and tensor algebra for truncated-oscillator systems.

Dense numpy arrays throughout: the largest system handled anywhere in the
package is 27x27, so sparse storage would cost more than it saves.  Basis
ordering is fixed row-major over the tensor factors, i.e. the product state
|m>|n> of two three-level transmons sits at flat index 3*m + n and |i>|j>|k>
of three transmons at 9*i + 3*j + k.

Besides the generic helpers, this module carries the two closed-form
singular value decompositions used by the holonomic gate constructions:
``svd_F`` for the 2x2 single-target coupling block and ``svd_K`` for the
4x4 two-target coupling block.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "ladder",
    "kron",
    "flat_index",
    "is_hermitian",
    "is_unitary",
    "matrix_exp",
    "coupling_matrix_f",
    "svd_F",
    "coupling_matrix_k",
    "svd_K",
]

ALGEBRA_TOL = 1e-12
EXP_TOL = 1e-10


def ladder(d: int) -> np.ndarray:
    """Lowering operator of a d-level truncated oscillator.

    Matrix elements <j|a|j+1> = sqrt(j+1), so for d=3 this is
    |0><1| + sqrt(2)|1><2| and a^dag a = diag{0, 1, 2}.

    Parameters
    ----------
    d : int
        Number of retained levels, at least 2.

    Returns
    -------
    numpy.ndarray
        Complex (d, d) matrix with exactly d-1 nonzero entries.
    """
    if d < 2:
        raise ValueError(f"ladder operator needs at least 2 levels, got {d}")
    a = np.zeros((d, d), dtype=complex)
    for j in range(d - 1):
        a[j, j + 1] = np.sqrt(j + 1.0)
    return a


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tensor product with the package-wide row-major index convention."""
    return np.kron(np.asarray(a), np.asarray(b))


def flat_index(occupations: tuple[int, ...] | list[int], dims: tuple[int, ...] | list[int]) -> int:
    """Flat index of a product basis state |occ_0>|occ_1>... in row-major order."""
    if len(occupations) != len(dims):
        raise ValueError("occupations and dims must have the same length")
    idx = 0
    for occ, dim in zip(occupations, dims):
        if not 0 <= occ < dim:
            raise ValueError(f"occupation {occ} out of range for a {dim}-level factor")
        idx = idx * dim + occ
    return idx


def is_hermitian(m: np.ndarray, tol: float = ALGEBRA_TOL) -> bool:
    m = np.asarray(m)
    return m.shape[0] == m.shape[1] and np.max(np.abs(m - m.conj().T)) <= tol


def is_unitary(m: np.ndarray, tol: float = ALGEBRA_TOL) -> bool:
    m = np.asarray(m)
    if m.shape[0] != m.shape[1]:
        return False
    return np.max(np.abs(m @ m.conj().T - np.eye(m.shape[0]))) <= tol


def matrix_exp(h: np.ndarray, t: float) -> np.ndarray:
    """exp(-i h t) for Hermitian h, via eigendecomposition.

    Serves as the exact-propagator oracle for the piecewise-constant block
    Hamiltonians; rejects non-Hermitian input instead of silently returning
    a non-unitary result.

    Parameters
    ----------
    h : numpy.ndarray
        Hermitian matrix, angular-frequency units.
    t : float
        Evolution time in seconds (h*t dimensionless).

    Returns
    -------
    numpy.ndarray
        Unitary matrix exp(-i h t).
    """
    h = np.asarray(h, dtype=complex)
    scale = max(1.0, float(np.max(np.abs(h))) if h.size else 1.0)
    if not is_hermitian(h, tol=ALGEBRA_TOL * scale):
        raise ValueError("matrix_exp requires a Hermitian generator")
    vals, vecs = np.linalg.eigh(h)
    return (vecs * np.exp(-1j * vals * t)) @ vecs.conj().T


def coupling_matrix_f(theta: float, phi: float) -> np.ndarray:
    """Normalized 2x2 block coupling the auxiliary-ground and auxiliary-excited
    single-target subspaces, for mixing angle theta and drive phase phi."""
    s = 0.5 * np.sin(theta / 2) * np.exp(-1j * phi)
    return np.array([[s, 0.0], [np.cos(theta / 2), s]], dtype=complex)


def svd_F(theta: float, phi: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Closed-form singular value decomposition of ``coupling_matrix_f``.

    Returns (W, Q, Rdag) with W and R unitary, Q = diag{cos^2(theta/4),
    sin^2(theta/4)}, and W @ Q @ Rdag equal to the coupling block to 1e-12.
    Rdag carries an extra factor exp(-i phi) relative to the symmetric
    Hermitian form; without it the product reconstructs exp(i phi) times
    the block rather than the block itself.

    Parameters
    ----------
    theta, phi : float
        Mixing angle and drive phase in radians.

    Returns
    -------
    (W, Q, Rdag) : tuple of numpy.ndarray
        2x2 complex factors.
    """
    s, c = np.sin(theta / 4), np.cos(theta / 4)
    ph = np.exp(1j * phi)
    w = np.array([[s, c / ph], [c * ph, -s]], dtype=complex)
    q = np.array([[c * c, 0.0], [0.0, s * s]], dtype=complex)
    rdag = np.array([[c, s / ph], [s * ph, -c]], dtype=complex) / ph
    return w, q, rdag


def coupling_matrix_k(vartheta: float, varphi: float) -> np.ndarray:
    """Normalized 4x4 block coupling the auxiliary-ground and auxiliary-excited
    two-target subspaces, for mixing angle vartheta and modulation phase varphi."""
    s = np.sin(vartheta / 2) * np.exp(1j * varphi)
    c = np.cos(vartheta / 2)
    k = np.zeros((4, 4), dtype=complex)
    k[1, 0] = s
    k[2, 0] = c
    k[3, 1] = c
    k[3, 2] = s
    return k


def svd_K(vartheta: float, varphi: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Closed-form singular value decomposition of ``coupling_matrix_k``.

    Returns (X, Y, Zdag) with X and Z unitary, Y = diag{0, 0, 1, 1}, and
    X @ Y @ Zdag reconstructing the coupling block exactly.

    Parameters
    ----------
    vartheta, varphi : float
        Mixing angle and relative modulation phase in radians.

    Returns
    -------
    (X, Y, Zdag) : tuple of numpy.ndarray
        4x4 complex factors.
    """
    s = np.sin(vartheta / 2)
    c = np.cos(vartheta / 2)
    ph = np.exp(1j * varphi)
    x = np.array(
        [
            [1, 0, 0, 0],
            [0, c, 0, s * ph],
            [0, -s / ph, 0, c],
            [0, 0, 1, 0],
        ],
        dtype=complex,
    )
    y = np.diag([0.0, 0.0, 1.0, 1.0]).astype(complex)
    zdag = np.array(
        [
            [0, 0, 0, 1],
            [0, s / ph, -c, 0],
            [0, c, s * ph, 0],
            [1, 0, 0, 0],
        ],
        dtype=complex,
    )
    return x, y, zdag
