# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: grid evaluation of the rate chain and RK4 on the phonon ladder.

Same contract and operation order as ``_core_py``. Both loops run without
the GIL so grid chunks can be evaluated from a thread pool.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport NAN

cnp.import_array()

DEF N_COLS = 14


cdef inline double _denominator(double delta_cav, double delta_atom, double g2,
                                double kappa, double gamma, double upsilon) noexcept nogil:
    cdef double d = delta_atom + upsilon
    cdef double D = delta_cav + upsilon
    cdef double re = d * D - g2 - 0.5 * gamma * kappa
    cdef double im = kappa * d + 0.5 * gamma * D
    return re * re + im * im


def rate_grid(double g, double kappa, double gamma, double chi, double omega,
              bint atom_pump, delta_cav, delta_atom):
    cdef const double[::1] dc = np.ascontiguousarray(delta_cav, dtype=np.float64)
    cdef const double[::1] da = np.ascontiguousarray(delta_atom, dtype=np.float64)
    cdef Py_ssize_t n = dc.shape[0]
    out_arr = np.zeros((n, N_COLS), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double g2 = g * g
    cdef double q_gamma = 0.25 * gamma * gamma
    cdef double quarter_drive = 0.25 * omega * omega
    cdef double chi2 = chi * chi
    cdef double two_kappa = 2.0 * kappa
    cdef Py_ssize_t i, j
    cdef int k
    cdef bint bad, cooling
    cdef double num0, d0, s2, upsilon, d_u, num_k, den
    cdef double amp_k[2]
    cdef double amp_g[2]
    cdef double x_plus, x_minus, a_kp, a_gp, a_km, a_gm, gamma_cool, m_inf, up

    with nogil:
        for i in range(n):
            bad = False
            if atom_pump:
                num0 = g2
            else:
                num0 = da[i] * da[i] + q_gamma
            s2 = 0.0
            if num0 != 0.0 and quarter_drive != 0.0:
                d0 = _denominator(dc[i], da[i], g2, kappa, gamma, 0.0)
                if d0 == 0.0:
                    bad = True
                else:
                    s2 = quarter_drive * num0 / d0
            for k in range(2):
                amp_k[k] = 0.0
                amp_g[k] = 0.0
                if chi2 == 0.0:
                    continue
                upsilon = -1.0 if k == 0 else 1.0
                d_u = da[i] + upsilon
                num_k = d_u * d_u + q_gamma
                if num_k == 0.0 and g2 == 0.0:
                    continue
                den = _denominator(dc[i], da[i], g2, kappa, gamma, upsilon)
                if den == 0.0:
                    bad = True
                else:
                    amp_k[k] = chi2 * num_k / den
                    amp_g[k] = chi2 * g2 / den
            if bad:
                for j in range(N_COLS - 1):
                    out[i, j] = NAN
                out[i, N_COLS - 1] = 1.0
                continue

            x_plus = two_kappa * amp_k[0] + gamma * amp_g[0]
            x_minus = two_kappa * amp_k[1] + gamma * amp_g[1]
            a_kp = s2 * two_kappa * amp_k[0]
            a_gp = s2 * gamma * amp_g[0]
            a_km = s2 * two_kappa * amp_k[1]
            a_gm = s2 * gamma * amp_g[1]
            gamma_cool = s2 * (x_minus - x_plus)
            cooling = gamma_cool > 0
            if cooling:
                m_inf = x_plus / (x_minus - x_plus)
            else:
                m_inf = NAN
            up = m_inf + 1.0
            out[i, 0] = s2
            out[i, 1] = a_kp
            out[i, 2] = a_km
            out[i, 3] = a_gp
            out[i, 4] = a_gm
            out[i, 5] = s2 * x_plus
            out[i, 6] = s2 * x_minus
            out[i, 7] = gamma_cool
            out[i, 8] = m_inf
            out[i, 9] = up * a_kp
            out[i, 10] = m_inf * a_km
            out[i, 11] = up * a_gp
            out[i, 12] = m_inf * a_gm
            out[i, 13] = 0.0
    return out_arr


cdef void _ladder_rhs(const double* p, Py_ssize_t M, double a_plus, double a_minus,
                      double* out) noexcept nogil:
    cdef Py_ssize_t m
    cdef double fm, up
    for m in range(M + 1):
        fm = <double>m
        up = (fm + 1.0) * a_plus if m < M else 0.0
        out[m] = -(fm * a_minus + up) * p[m]
        if m < M:
            out[m] += (fm + 1.0) * a_minus * p[m + 1]
        if m > 0:
            out[m] += fm * a_plus * p[m - 1]


def birth_death_rk4(double a_plus, double a_minus, p0, double dt,
                    Py_ssize_t n_steps, Py_ssize_t sample_every):
    p_arr = np.array(p0, dtype=np.float64)
    cdef double[::1] p = p_arr
    cdef Py_ssize_t size = p.shape[0]
    cdef Py_ssize_t M = size - 1
    cdef Py_ssize_t n_samples = n_steps // sample_every + 1 + (1 if n_steps % sample_every else 0)
    samples_arr = np.empty((n_samples, size), dtype=np.float64)
    cdef double[:, ::1] samples = samples_arr
    work_arr = np.empty((5, size), dtype=np.float64)
    cdef double[:, ::1] w = work_arr
    cdef double half = 0.5 * dt
    cdef double sixth = dt / 6.0
    cdef Py_ssize_t step, m, row = 1
    samples[0, :] = p
    with nogil:
        for step in range(1, n_steps + 1):
            _ladder_rhs(&p[0], M, a_plus, a_minus, &w[0, 0])
            for m in range(size):
                w[4, m] = p[m] + half * w[0, m]
            _ladder_rhs(&w[4, 0], M, a_plus, a_minus, &w[1, 0])
            for m in range(size):
                w[4, m] = p[m] + half * w[1, m]
            _ladder_rhs(&w[4, 0], M, a_plus, a_minus, &w[2, 0])
            for m in range(size):
                w[4, m] = p[m] + dt * w[2, m]
            _ladder_rhs(&w[4, 0], M, a_plus, a_minus, &w[3, 0])
            for m in range(size):
                p[m] += sixth * (w[0, m] + 2.0 * w[1, m] + 2.0 * w[2, m] + w[3, m])
            if step % sample_every == 0 or step == n_steps:
                samples[row, :] = p
                row += 1
    return samples_arr
