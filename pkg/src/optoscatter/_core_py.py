"""Pure-Python (numpy) kernels; reference twin of the ``_core`` extension.

Operation order mirrors ``_core.pyx`` term by term so that both backends
round identically.
"""
import numpy as np

N_COLS = 14
COLUMNS = (
    "s2",
    "a_kappa_plus",
    "a_kappa_minus",
    "a_gamma_plus",
    "a_gamma_minus",
    "a_plus",
    "a_minus",
    "gamma_cool",
    "m_inf",
    "r_kappa_plus",
    "r_kappa_minus",
    "r_gamma_plus",
    "r_gamma_minus",
    "flag",
)


def _denominator(delta_cav, delta_atom, g2, kappa, gamma, upsilon):
    d = delta_atom + upsilon
    D = delta_cav + upsilon
    re = d * D - g2 - 0.5 * gamma * kappa
    im = kappa * d + 0.5 * gamma * D
    return re * re + im * im


def rate_grid(g, kappa, gamma, chi, omega, atom_pump, delta_cav, delta_atom):
    """Evaluate the full rate chain at each ``(delta_cav[i], delta_atom[i])``.

    Returns an ``(n, 14)`` array with columns :data:`COLUMNS`. ``m_inf`` and
    the sideband rates are NaN where the point heats; ``flag`` is 1 (and all
    other columns NaN) where a needed denominator is exactly zero.
    """
    delta_cav = np.ascontiguousarray(delta_cav, dtype=np.float64)
    delta_atom = np.ascontiguousarray(delta_atom, dtype=np.float64)
    n = delta_cav.shape[0]
    out = np.zeros((n, N_COLS))
    bad = np.zeros(n, dtype=bool)
    g2 = g * g
    q_gamma = 0.25 * gamma * gamma
    quarter_drive = 0.25 * omega * omega
    chi2 = chi * chi
    two_kappa = 2.0 * kappa

    with np.errstate(divide="ignore", invalid="ignore"):
        if atom_pump:
            num0 = np.full(n, g2)
        else:
            num0 = delta_atom * delta_atom + q_gamma
        d0 = _denominator(delta_cav, delta_atom, g2, kappa, gamma, 0.0)
        live = (num0 != 0.0) & (quarter_drive != 0.0)
        bad |= live & (d0 == 0.0)
        s2 = np.where(live, quarter_drive * num0 / d0, 0.0)

        amps = []
        for upsilon in (-1.0, 1.0):
            if chi2 == 0.0:
                amps.append((np.zeros(n), np.zeros(n)))
                continue
            d_u = delta_atom + upsilon
            num_k = d_u * d_u + q_gamma
            den = _denominator(delta_cav, delta_atom, g2, kappa, gamma, upsilon)
            live_u = ~((num_k == 0.0) & (g2 == 0.0))
            bad |= live_u & (den == 0.0)
            amps.append((np.where(live_u, chi2 * num_k / den, 0.0),
                         np.where(live_u, chi2 * g2 / den, 0.0)))
        (kp, gp), (km, gm) = amps

        x_plus = two_kappa * kp + gamma * gp
        x_minus = two_kappa * km + gamma * gm
        a_kp = s2 * two_kappa * kp
        a_gp = s2 * gamma * gp
        a_km = s2 * two_kappa * km
        a_gm = s2 * gamma * gm
        gamma_cool = s2 * (x_minus - x_plus)
        cooling = gamma_cool > 0
        m_inf = np.where(cooling, x_plus / (x_minus - x_plus), np.nan)
        up = m_inf + 1.0

        out[:, 0] = s2
        out[:, 1] = a_kp
        out[:, 2] = a_km
        out[:, 3] = a_gp
        out[:, 4] = a_gm
        out[:, 5] = s2 * x_plus
        out[:, 6] = s2 * x_minus
        out[:, 7] = gamma_cool
        out[:, 8] = m_inf
        out[:, 9] = up * a_kp
        out[:, 10] = m_inf * a_km
        out[:, 11] = up * a_gp
        out[:, 12] = m_inf * a_gm
    out[bad, :] = np.nan
    out[:, 13] = bad
    return out


def _ladder_rhs(p, m, a_plus, a_minus, out):
    M = p.shape[0] - 1
    up = (m + 1.0) * a_plus
    up[M] = 0.0
    np.multiply(-(m * a_minus + up), p, out=out)
    out[:M] += (m[:M] + 1.0) * a_minus * p[1:]
    out[1:] += m[1:] * a_plus * p[:M]
    return out


def birth_death_rk4(a_plus, a_minus, p0, dt, n_steps, sample_every):
    """Fixed-step RK4 for the phonon-ladder populations.

    The ladder is reflecting at its top level. Returns the populations
    every ``sample_every`` steps, first row the initial state, last row the
    final state.
    """
    p = np.array(p0, dtype=np.float64)
    m = np.arange(p.shape[0], dtype=np.float64)
    n_samples = n_steps // sample_every + 1 + (1 if n_steps % sample_every else 0)
    samples = np.empty((n_samples, p.shape[0]))
    samples[0] = p
    k1, k2, k3, k4 = (np.empty_like(p) for _ in range(4))
    half, sixth = 0.5 * dt, dt / 6.0
    row = 1
    for step in range(1, n_steps + 1):
        _ladder_rhs(p, m, a_plus, a_minus, k1)
        _ladder_rhs(p + half * k1, m, a_plus, a_minus, k2)
        _ladder_rhs(p + half * k2, m, a_plus, a_minus, k3)
        _ladder_rhs(p + dt * k3, m, a_plus, a_minus, k4)
        p += sixth * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if step % sample_every == 0 or step == n_steps:
            samples[row] = p
            row += 1
    return samples
