"""Pure-numpy integration kernels.

Fallback lane with the same call signatures as the compiled extension, used
when the extension is unavailable.  Both lanes implement classical
fixed-step RK4 on the vectorized master equation

    drho/dt = -i [H(t), rho] - gamma o rho + sum_c gaincoef_c * W_c rho W_c+

where H(t) is assembled from a sparse term table whose entries are
amp * exp(-i(omega t + beta cos(nu t + phase))) plus Hermitian conjugates,
``o`` is the elementwise (anticommutator) damping, and the gain channels
W_c are given by their nonzero entries.  The density stack is symmetrized
every step; the worst trace drift over the whole run is returned.
"""

import numpy as np

__all__ = ["rk4_density", "rk4_state"]


def _dense_h(dim, ii, jj, amp, omega, beta, nu, phase, t):
    z = amp * np.exp(-1j * (omega * t + beta * np.cos(nu * t + phase)))
    h = np.zeros((dim, dim), dtype=np.complex128)
    np.add.at(h, (ii, jj), z)
    h += h.conj().T
    return h


def rk4_density(
    ii,
    jj,
    amp,
    omega,
    beta,
    nu,
    phase,
    gamma,
    src_off,
    src,
    dst,
    w,
    gaincoef,
    rho,
    t0,
    h,
    n_steps,
):
    """Integrate the master equation in place over n_steps of size h.

    Parameters
    ----------
    ii, jj, amp, omega, beta, nu, phase : ndarray
        Hamiltonian term table (entries above or below the diagonal;
        conjugates are implied).
    gamma : (B, d, d) float64
        Precompiled elementwise damping: sum_c rate[b,c] * (v_c[i] + v_c[j])
        with v_c = diag(A_c^+ A_c).
    src_off : (C+1,) int32
        Channel boundaries into the flat hop arrays.
    src, dst : (S,) int32
        Nonzero entries of each gain operator A_c: A_c[dst, src] = w.
    w : (S,) complex128
    gaincoef : (B, C) float64
        Gain prefactor per batch entry and channel (2 * rate[b, c]).
    rho : (B, d, d) complex128
        Density stack, updated in place.
    t0, h : float
        Start time and step (seconds).
    n_steps : int

    Returns
    -------
    float
        max over steps and batch entries of |tr rho - tr rho(t0)|.
    """
    dim = rho.shape[-1]
    n_ch = len(src_off) - 1
    channels = []
    for c in range(n_ch):
        lo, hi = src_off[c], src_off[c + 1]
        s, d_, wc = src[lo:hi], dst[lo:hi], w[lo:hi]
        wpair = wc[:, None] * wc.conj()[None, :]
        channels.append((s, d_, wpair, gaincoef[:, c][:, None, None]))

    def deriv(hmat, rho_s):
        drho = -1j * (hmat @ rho_s - rho_s @ hmat)
        drho -= gamma * rho_s
        for s, d_, wpair, coef in channels:
            sub = rho_s[:, s[:, None], s[None, :]]
            drho[:, d_[:, None], d_[None, :]] += coef * (wpair * sub)
        return drho

    tr0 = np.einsum("bii->b", rho).real.copy()
    drift = 0.0
    h_t = _dense_h(dim, ii, jj, amp, omega, beta, nu, phase, t0)
    for k in range(n_steps):
        t = t0 + k * h
        h_mid = _dense_h(dim, ii, jj, amp, omega, beta, nu, phase, t + 0.5 * h)
        h_end = _dense_h(dim, ii, jj, amp, omega, beta, nu, phase, t + h)
        k1 = deriv(h_t, rho)
        k2 = deriv(h_mid, rho + (0.5 * h) * k1)
        k3 = deriv(h_mid, rho + (0.5 * h) * k2)
        k4 = deriv(h_end, rho + h * k3)
        rho += (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
        symm = rho + rho.conj().transpose(0, 2, 1)
        symm *= 0.5
        np.copyto(rho, symm)
        h_t = h_end
        step_drift = float(np.max(np.abs(np.einsum("bii->b", rho).real - tr0)))
        if step_drift > drift:
            drift = step_drift
    return drift


def rk4_state(ii, jj, amp, omega, beta, nu, phase, psi, t0, h, n_steps):
    """Schrodinger RK4 on a stack of state vectors, in place.

    psi : (B, d) complex128.  Returns max norm drift over the run.
    """
    dim = psi.shape[-1]

    nrm0 = np.sqrt(np.einsum("bi,bi->b", psi.conj(), psi).real)
    drift = 0.0
    h_t = _dense_h(dim, ii, jj, amp, omega, beta, nu, phase, t0)
    for k in range(n_steps):
        t = t0 + k * h
        h_mid = _dense_h(dim, ii, jj, amp, omega, beta, nu, phase, t + 0.5 * h)
        h_end = _dense_h(dim, ii, jj, amp, omega, beta, nu, phase, t + h)
        k1 = -1j * (psi @ h_t.T)
        k2 = -1j * ((psi + (0.5 * h) * k1) @ h_mid.T)
        k3 = -1j * ((psi + (0.5 * h) * k2) @ h_mid.T)
        k4 = -1j * ((psi + h * k3) @ h_end.T)
        psi += (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
        h_t = h_end
        nrm = np.sqrt(np.einsum("bi,bi->b", psi.conj(), psi).real)
        step_drift = float(np.max(np.abs(nrm - nrm0)))
        if step_drift > drift:
            drift = step_drift
    return drift
