"""Compute reference values with the independent oracles and print them.

The numbers printed here are the frozen constants in tests/; rerun after any
change to the oracles and compare rather than silently re-pasting.
"""
import math

import mpmath as mp
import numpy as np

from metaline.graphene import (CONSTANTS, DEFAULT_SCATTERING_RATE, DEFAULT_SHEET,
                               angular_frequency)
from metaline.oracles import (boundary_matching_s21, interface_coefficients_mp, kubo_mp,
                              theta_mp, wavenumber_mp)

OMEGA = angular_frequency(6e-6)
T, GAMMA = 300.0, DEFAULT_SCATTERING_RATE


def k_of(mu):
    return wavenumber_mp(OMEGA, mu, T, GAMMA)


def main():
    print("sigma(6 um, 0.15 eV) =", repr(kubo_mp(OMEGA, 0.15, T, GAMMA)))
    for mu in (0.15, 0.4, 1.0):
        k = k_of(mu)
        print(f"lambda_GP({mu} eV) =", repr(2 * math.pi / k.real), " k =", repr(k))
    print("theta(2, 1) =", repr(theta_mp(2.0, 1.0)))
    print("coefficients(k(0.3), k(0.6)) =", interface_coefficients_mp(k_of(0.3), k_of(0.6)))

    # background doping whose guided wavelength is 2 (D - 3d) = 170 nm
    with mp.workdps(30):
        target = 2 * mp.pi / mp.mpf("170e-9")
        mu_bg = mp.findroot(lambda m: mp.mpf(k_of(float(m)).real) - target, 0.4, tol=1e-12)
    mu_bg = float(mu_bg)
    print("mu_bg(170 nm) =", repr(mu_bg))

    # unit-cell S21 by the boundary-matching solve with mpmath interface coefficients
    k_bg = k_of(mu_bg)
    spacing = 0.25 * 2 * math.pi / k_bg.real
    d = 5e-9
    for mu_in, mu_out in ((0.3, 0.7), (0.2, 0.9), (0.5, 0.5), (0.4, 0.4)):
        ks = [k_bg, k_of(mu_out), k_bg, k_of(mu_in), k_bg, k_of(mu_out), k_bg]
        lengths = [d, spacing, d, spacing, d]
        _, s21 = boundary_matching_s21(ks, lengths, interface_coefficients_mp)
        print(f"cell_s21({mu_in}, {mu_out}) =", repr(s21))
    # dense-grid inversion of Re k(mu) for a mid-range target, 10^5 points
    grid = np.linspace(0.13, 1.0, 100_001)
    re_k = DEFAULT_SHEET.wavenumber(OMEGA, grid).real
    target = 2 * math.pi / 100e-9
    i = int(np.argmin(np.abs(re_k - target)))
    print("dense scan mu(lambda_GP = 100 nm) =", repr(float(grid[i])), "+-",
          float(grid[1] - grid[0]))
    print("eps0 =", CONSTANTS.eps0)


if __name__ == "__main__":
    main()
