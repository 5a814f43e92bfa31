"""Independent reference computations used to check the production paths.

Nothing here is called by the simulator itself. Each oracle reaches its answer
by a different route (arithmetic, algorithm, or formulation) from the code it
checks, so agreement is evidence rather than tautology.
"""
from __future__ import annotations

import mpmath as mp
import numpy as np

from .graphene import CONSTANTS


def kubo_mp(omega, mu_ev, temperature, scattering_rate, dps=50):
    """Kubo conductivity in arbitrary precision (mpmath), returned as a Python complex.

    Written directly from the formula with mpmath elementary functions, with no
    overflow guards: the working precision carries the full dynamic range.
    """
    with mp.workdps(dps):
        e = mp.mpf(CONSTANTS.e)
        hbar = mp.mpf(CONSTANTS.hbar)
        kB = mp.mpf(CONSTANTS.k_B)
        T = mp.mpf(temperature)
        mu = mp.mpf(mu_ev) * e
        w = mp.mpf(omega) + 2j * mp.mpf(scattering_rate)
        intra = 1j * e**2 * kB * T / (mp.pi * hbar**2 * w) * (
            mu / (kB * T) + 2 * mp.log(mp.exp(-mu / (kB * T)) + 1))
        # mu = 0 puts the ratio on the log cut; take the mu -> 0 limit
        inter = 1j * e**2 / (4 * mp.pi * hbar) * (
            mp.log(2 * abs(mu) - w * hbar) - mp.log(2 * abs(mu) + w * hbar))
        return complex(intra + inter)


def wavenumber_mp(omega, mu_ev, temperature, scattering_rate, permittivity=CONSTANTS.eps0, dps=50):
    with mp.workdps(dps):
        sigma = mp.mpc(kubo_mp(omega, mu_ev, temperature, scattering_rate, dps))
        return complex(2j * mp.mpf(omega) * mp.mpf(permittivity) / sigma)


def theta_simpson(k_left, k_right, n=1_000_000):
    """Reflection phase by composite Simpson on the tan-mapped interval.

    The integrand arctan(rho tan t) is bounded and smooth on [0, pi/2], with
    limit +-pi/2 at the right end for Re(rho) > 0.
    """
    if n % 2:
        n += 1
    rho = complex(k_left) / complex(k_right)
    t = np.linspace(0.0, np.pi / 2, n + 1)
    with np.errstate(over="ignore"):
        vals = np.arctan(rho * np.tan(t[:-1]))
    end = np.pi / 2 if rho.real > 0 else -np.pi / 2
    vals = np.append(vals, end)
    h = (np.pi / 2) / n
    integral = h / 3 * (vals[0] + vals[-1] + 4 * vals[1:-1:2].sum() + 2 * vals[2:-1:2].sum())
    theta = np.pi / 4 - 2 / np.pi * integral
    return complex(theta) if rho.imag else float(theta.real)


def theta_mp(k_left, k_right, dps=30):
    """Reflection phase via mpmath tanh-sinh quadrature on the original u-axis."""
    with mp.workdps(dps):
        rho = mp.mpc(complex(k_left)) / mp.mpc(complex(k_right))
        integral = mp.quad(lambda u: mp.atan(rho * u) / (u**2 + 1), [0, 1, mp.inf])
        return complex(mp.pi / 4 - 2 / mp.pi * integral)


def interface_coefficients_mp(k_left, k_right, dps=30):
    """(r_LR, t_LR, r_RL, t_RL) evaluated entirely in mpmath."""
    with mp.workdps(dps):
        kl, kr = mp.mpc(complex(k_left)), mp.mpc(complex(k_right))
        th_lr = mp.mpc(theta_mp(k_left, k_right, dps))
        th_rl = mp.mpc(theta_mp(k_right, k_left, dps))
        t = 2 * mp.sqrt(kl * kr) / (kl + kr)
        r_lr = mp.exp(1j * th_lr) * (kl - kr) / (kl + kr)
        r_rl = mp.exp(1j * th_rl) * (kr - kl) / (kl + kr)
        return complex(r_lr), complex(t), complex(r_rl), complex(t)


def boundary_matching_s21(wavenumbers, lengths, coefficients):
    """S21 of a layered stack from the scattering equations at every interface.

    Regions 0..N each carry a forward and backward amplitude referenced at
    their own left edge (region 0 at interface 0). With unit incidence from
    the left and nothing incident from the right, each interface m imposes

        b_m   = r_LR a_m(z_m) + t_RL b_{m+1}(z_m)
        a_{m+1}(z_m) = t_LR a_m(z_m) + r_RL b_{m+1}(z_m),

    one dense (2N x 2N) linear solve. ``coefficients(kL, kR)`` must return
    (r_LR, t_LR, r_RL, t_RL). Returns (s11, s21).
    """
    k = [complex(v) for v in wavenumbers]
    n_if = len(k) - 1
    if len(lengths) != n_if - 1:
        raise ValueError("need one length per interior region")
    # unknowns: b_0, (a_m, b_m) for m=1..N-1, a_N
    idx = {("b", 0): 0}
    for m in range(1, n_if):
        idx[("a", m)] = len(idx)
        idx[("b", m)] = len(idx)
    idx[("a", n_if)] = len(idx)
    size = len(idx)
    A = np.zeros((size, size), dtype=complex)
    rhs = np.zeros(size, dtype=complex)
    row = 0
    for m in range(n_if):
        r_lr, t_lr, r_rl, t_rl = coefficients(k[m], k[m + 1])
        # forward/backward amplitudes of region m evaluated at interface m
        # (region m spans [z_{m-1}, z_m], referenced at its left edge)
        fwd_left = np.exp(1j * k[m] * lengths[m - 1]) if m > 0 else 1.0
        bwd_left_phase = np.exp(-1j * k[m] * lengths[m - 1]) if m > 0 else 1.0
        # b_m(z_m) = r_LR a_m(z_m) + t_RL b_{m+1}(z_m); region m+1 starts at z_m
        A[row, idx[("b", m)]] += bwd_left_phase
        if m == 0:
            rhs[row] += r_lr * 1.0
        else:
            A[row, idx[("a", m)]] -= r_lr * fwd_left
        if m + 1 < n_if:
            A[row, idx[("b", m + 1)]] -= t_rl
        row += 1
        # a_{m+1}(z_m) = t_LR a_m(z_m) + r_RL b_{m+1}(z_m)
        A[row, idx[("a", m + 1)]] += 1.0
        if m == 0:
            rhs[row] += t_lr * 1.0
        else:
            A[row, idx[("a", m)]] -= t_lr * fwd_left
        if m + 1 < n_if:
            A[row, idx[("b", m + 1)]] -= r_rl
        row += 1
    sol = np.linalg.solve(A, rhs)
    return complex(sol[idx[("b", 0)]]), complex(sol[idx[("a", n_if)]])


def airy_etalon_s21(first, second, k, length, tol=1e-16, max_terms=1_000_000):
    """Multiple-reflection series for two interfaces separated by ``length``.

    ``first`` and ``second`` are (r_LR, t_LR, r_RL, t_RL) tuples. Sums
    t1 t2 sum_n (r2 r1')^n exp(i (2n+1) k l) until terms fall below ``tol``.
    """
    r1, t1, r1p, _ = first
    r2, t2, _, _ = second
    q = r2 * r1p * np.exp(2j * k * length)
    term = t1 * t2 * np.exp(1j * k * length)
    total = 0j
    for _ in range(max_terms):
        total += term
        if abs(term) < tol * max(abs(total), 1e-300):
            return complex(total)
        term *= q
    raise ArithmeticError("Airy series did not converge")


def fft_derivative(samples, spacing, order=1):
    """Periodic spectral derivative with numpy's standard FFT frequency grid."""
    samples = np.asarray(samples, dtype=complex)
    k = 2 * np.pi * np.fft.fftfreq(samples.size, d=spacing)
    return np.fft.ifft((1j * k) ** order * np.fft.fft(samples))


def sinc_derivatives(order, band=16 * np.pi):
    """Symbolic derivative of sin(a x)/(a x) with a = band / W, lambdified.

    Returns ``f(x, W)``. For |a x| < 0.5 the closed form cancels badly, so the
    Taylor series in u = a x (truncation below 1e-17) is used instead.
    """
    import sympy as sp

    u = sp.symbols("u", real=True)
    expr = sp.diff(sp.sin(u) / u, u, order)
    closed = sp.lambdify(u, expr, "numpy")
    series = sp.lambdify(u, sp.series(sp.sin(u) / u, u, 0, 24).removeO().diff(u, order),
                         "numpy")

    def evaluate(xv, Wv):
        a = band / Wv
        uv = a * np.asarray(xv, dtype=float)
        small = np.abs(uv) < 0.5
        out = np.empty_like(uv)
        with np.errstate(divide="ignore", invalid="ignore"):
            out[~small] = closed(uv[~small])
        out[small] = series(uv[small])
        return out * a**order

    return evaluate
