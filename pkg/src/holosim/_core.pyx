# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled integration kernels.

Same contract as holosim._core_py: fixed-step RK4 on the vectorized master
equation with a sparse Hamiltonian term table, elementwise damping, and
sparse gain channels.  The commutator uses one BLAS zgemm per stage: with
Hermitian H and Hermitian stage input, H rho - rho H = M+ - M for
M = rho H, so a single stacked product (B*d, d) x (d, d) suffices.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, sin
from scipy.linalg.cython_blas cimport zgemm

ctypedef double complex dc


cdef void _fill_h(dc[:, ::1] hbuf,
                  int[::1] ii, int[::1] jj, dc[::1] amp,
                  double[::1] omega, double[::1] beta, double[::1] nu,
                  double[::1] phase, double t) noexcept:
    cdef Py_ssize_t d = hbuf.shape[0]
    cdef Py_ssize_t k, n_t = ii.shape[0]
    cdef Py_ssize_t r, c
    cdef double ph
    cdef dc z
    for r in range(d):
        for c in range(d):
            hbuf[r, c] = 0
    for k in range(n_t):
        ph = omega[k] * t + beta[k] * cos(nu[k] * t + phase[k])
        z = amp[k] * (cos(ph) - 1j * sin(ph))
        hbuf[ii[k], jj[k]] = hbuf[ii[k], jj[k]] + z
        hbuf[jj[k], ii[k]] = hbuf[jj[k], ii[k]] + z.conjugate()


cdef void _stacked_right_mul(dc[:, :, ::1] rho_s, dc[:, ::1] hbuf,
                             dc[:, :, ::1] m_out) noexcept:
    # m_out[b] = rho_s[b] @ H, one zgemm over the stacked rows.
    # Row-major data read column-major is the transpose, so computing the
    # column-major product H^T (d, d) x rho^T (d, B*d) yields (rho H)^T
    # column-major, i.e. rho H row-major.
    cdef int d = <int> hbuf.shape[0]
    cdef int rows = <int> (rho_s.shape[0] * rho_s.shape[1])
    cdef dc one = 1.0, zero = 0.0
    cdef char no_trans = b'N'
    zgemm(&no_trans, &no_trans, &d, &rows, &d,
          &one, &hbuf[0, 0], &d,
          &rho_s[0, 0, 0], &d,
          &zero, &m_out[0, 0, 0], &d)


cdef void _deriv(dc[:, :, ::1] rho_s, dc[:, ::1] hbuf,
                 double[:, :, ::1] gamma,
                 int[::1] src_off, int[::1] src, int[::1] dst, dc[::1] w,
                 double[:, ::1] gaincoef,
                 dc[:, :, ::1] m_buf, dc[:, :, ::1] out) noexcept:
    cdef Py_ssize_t n_b = rho_s.shape[0]
    cdef Py_ssize_t d = rho_s.shape[1]
    cdef Py_ssize_t b, i, j, c, e, f, lo, hi
    cdef Py_ssize_t n_ch = src_off.shape[0] - 1
    cdef dc m_ij, m_ji, acc
    cdef double g_bc

    _stacked_right_mul(rho_s, hbuf, m_buf)

    for b in range(n_b):
        for i in range(d):
            for j in range(d):
                m_ij = m_buf[b, i, j]
                m_ji = m_buf[b, j, i]
                # -i (M+ - M)[i,j] - gamma o rho
                out[b, i, j] = -1j * (m_ji.conjugate() - m_ij) \
                    - gamma[b, i, j] * rho_s[b, i, j]
        for c in range(n_ch):
            g_bc = gaincoef[b, c]
            if g_bc == 0.0:
                continue
            lo = src_off[c]
            hi = src_off[c + 1]
            for e in range(lo, hi):
                for f in range(lo, hi):
                    acc = g_bc * w[e] * w[f].conjugate() * rho_s[b, src[e], src[f]]
                    out[b, dst[e], dst[f]] = out[b, dst[e], dst[f]] + acc


def rk4_density(int[::1] ii, int[::1] jj, dc[::1] amp,
                double[::1] omega, double[::1] beta, double[::1] nu,
                double[::1] phase,
                double[:, :, ::1] gamma,
                int[::1] src_off, int[::1] src, int[::1] dst, dc[::1] w,
                double[:, ::1] gaincoef,
                dc[:, :, ::1] rho,
                double t0, double h, long n_steps):
    """Integrate the master equation in place; returns max trace drift."""
    cdef Py_ssize_t n_b = rho.shape[0]
    cdef Py_ssize_t d = rho.shape[1]
    cdef Py_ssize_t b, i, j, k
    cdef double t, tr, dev, drift = 0.0
    cdef dc s

    hb = np.empty((d, d), dtype=np.complex128)
    hm = np.empty((d, d), dtype=np.complex128)
    he = np.empty((d, d), dtype=np.complex128)
    cdef dc[:, ::1] h_t = hb, h_mid = hm, h_end = he
    buf = np.empty((6, n_b, d, d), dtype=np.complex128)
    cdef dc[:, :, ::1] m_buf = buf[0]
    cdef dc[:, :, ::1] stage = buf[1]
    cdef dc[:, :, ::1] k1 = buf[2]
    cdef dc[:, :, ::1] k2 = buf[3]
    cdef dc[:, :, ::1] k3 = buf[4]
    cdef dc[:, :, ::1] k4 = buf[5]

    tr0 = np.empty(n_b, dtype=float)
    cdef double[::1] tr0_v = tr0
    for b in range(n_b):
        tr = 0.0
        for i in range(d):
            tr += rho[b, i, i].real
        tr0_v[b] = tr

    _fill_h(h_t, ii, jj, amp, omega, beta, nu, phase, t0)
    for k in range(n_steps):
        t = t0 + k * h
        _fill_h(h_mid, ii, jj, amp, omega, beta, nu, phase, t + 0.5 * h)
        _fill_h(h_end, ii, jj, amp, omega, beta, nu, phase, t + h)

        _deriv(rho, h_t, gamma, src_off, src, dst, w, gaincoef, m_buf, k1)
        for b in range(n_b):
            for i in range(d):
                for j in range(d):
                    stage[b, i, j] = rho[b, i, j] + (0.5 * h) * k1[b, i, j]
        _deriv(stage, h_mid, gamma, src_off, src, dst, w, gaincoef, m_buf, k2)
        for b in range(n_b):
            for i in range(d):
                for j in range(d):
                    stage[b, i, j] = rho[b, i, j] + (0.5 * h) * k2[b, i, j]
        _deriv(stage, h_mid, gamma, src_off, src, dst, w, gaincoef, m_buf, k3)
        for b in range(n_b):
            for i in range(d):
                for j in range(d):
                    stage[b, i, j] = rho[b, i, j] + h * k3[b, i, j]
        _deriv(stage, h_end, gamma, src_off, src, dst, w, gaincoef, m_buf, k4)

        for b in range(n_b):
            for i in range(d):
                for j in range(d):
                    rho[b, i, j] = rho[b, i, j] + (h / 6.0) * (
                        k1[b, i, j] + 2.0 * (k2[b, i, j] + k3[b, i, j]) + k4[b, i, j]
                    )
            # symmetrize and track the trace
            tr = 0.0
            for i in range(d):
                rho[b, i, i] = rho[b, i, i].real + 0j
                tr += rho[b, i, i].real
                for j in range(i + 1, d):
                    s = 0.5 * (rho[b, i, j] + rho[b, j, i].conjugate())
                    rho[b, i, j] = s
                    rho[b, j, i] = s.conjugate()
            dev = tr - tr0_v[b]
            if dev < 0.0:
                dev = -dev
            if dev > drift:
                drift = dev

        h_t[:, :] = h_end
    return drift


def rk4_state(int[::1] ii, int[::1] jj, dc[::1] amp,
              double[::1] omega, double[::1] beta, double[::1] nu,
              double[::1] phase,
              dc[:, ::1] psi,
              double t0, double h, long n_steps):
    """Schrodinger RK4 on stacked states, in place; returns max norm drift."""
    cdef Py_ssize_t n_b = psi.shape[0]
    cdef Py_ssize_t d = psi.shape[1]
    cdef Py_ssize_t b, i, j, k
    cdef double t, nrm, dev, drift = 0.0

    hb = np.empty((d, d), dtype=np.complex128)
    hm = np.empty((d, d), dtype=np.complex128)
    he = np.empty((d, d), dtype=np.complex128)
    cdef dc[:, ::1] h_t = hb, h_mid = hm, h_end = he
    buf = np.empty((5, n_b, d), dtype=np.complex128)
    cdef dc[:, ::1] stage = buf[0]
    cdef dc[:, ::1] k1 = buf[1]
    cdef dc[:, ::1] k2 = buf[2]
    cdef dc[:, ::1] k3 = buf[3]
    cdef dc[:, ::1] k4 = buf[4]

    nrm0 = np.empty(n_b, dtype=float)
    cdef double[::1] nrm0_v = nrm0
    for b in range(n_b):
        nrm = 0.0
        for i in range(d):
            nrm += psi[b, i].real ** 2 + psi[b, i].imag ** 2
        nrm0_v[b] = nrm ** 0.5

    _fill_h(h_t, ii, jj, amp, omega, beta, nu, phase, t0)
    for k in range(n_steps):
        t = t0 + k * h
        _fill_h(h_mid, ii, jj, amp, omega, beta, nu, phase, t + 0.5 * h)
        _fill_h(h_end, ii, jj, amp, omega, beta, nu, phase, t + h)

        _state_deriv(psi, h_t, k1, 0.0, psi)
        _state_deriv(psi, h_mid, k2, 0.5 * h, k1)
        _state_deriv(psi, h_mid, k3, 0.5 * h, k2)
        _state_deriv(psi, h_end, k4, h, k3)

        for b in range(n_b):
            nrm = 0.0
            for i in range(d):
                psi[b, i] = psi[b, i] + (h / 6.0) * (
                    k1[b, i] + 2.0 * (k2[b, i] + k3[b, i]) + k4[b, i]
                )
                nrm += psi[b, i].real ** 2 + psi[b, i].imag ** 2
            dev = nrm ** 0.5 - nrm0_v[b]
            if dev < 0.0:
                dev = -dev
            if dev > drift:
                drift = dev
        h_t[:, :] = h_end
    return drift


cdef void _state_deriv(dc[:, ::1] psi, dc[:, ::1] hbuf, dc[:, ::1] out,
                       double shift, dc[:, ::1] kprev) noexcept:
    # out = -i H (psi + shift * kprev); call with shift = 0 for plain psi
    cdef Py_ssize_t n_b = psi.shape[0]
    cdef Py_ssize_t d = psi.shape[1]
    cdef Py_ssize_t b, i, j
    cdef dc acc
    for b in range(n_b):
        for i in range(d):
            acc = 0.0
            for j in range(d):
                acc = acc + hbuf[i, j] * (psi[b, j] + shift * kprev[b, j])
            out[b, i] = -1j * acc
