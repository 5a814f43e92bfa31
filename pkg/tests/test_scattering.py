import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from metaline.errors import DegenerateNetworkError, DomainError, OpaqueInterfaceError
from metaline.graphene import DEFAULT_SHEET, angular_frequency
from metaline.oracles import (airy_etalon_s21, boundary_matching_s21, interface_coefficients_mp,
                              theta_mp, theta_simpson)
from metaline.scattering import (InterfaceScattering, TwoPortMatrix, cascade,
                                 discontinuity_coefficients, matching_matrix, propagation_matrix,
                                 s_params, stack_s_params, stack_transfer, theta_phase)

OMEGA = angular_frequency(6e-6)
THETA_2_1 = -0.21493759087235273  # mpmath tanh-sinh, 30 digits
# (r_LR, t_LR, r_RL, t_RL) between mu = 0.3 and 0.6 eV at 6 um, mpmath throughout
LOSSY_03_06 = ((0.36662147545568896 - 0.09113118250557357j),
               (0.9259290724406737 - 0.000129388473858545j),
               (-0.3663122104256727 - 0.09170786833941057j),
               (0.9259290724406737 - 0.000129388473858545j))

ratios = st.floats(1e-4, 1e4)
wavenumbers = st.builds(lambda re, loss: complex(re, re * loss),
                        st.floats(1e6, 1e9), st.floats(0.0, 0.3))


def _coef(kl, kr):
    c = discontinuity_coefficients(kl, kr)
    return c.r_lr, c.t_lr, c.r_rl, c.t_rl


def test_theta_vanishes_for_equal_wavenumbers():
    assert abs(theta_phase(1.0, 1.0)) <= 1e-12
    assert abs(theta_phase(3e7 + 2e5j, 3e7 + 2e5j)) <= 1e-12


def test_theta_extreme_contrast_limit():
    assert abs(theta_phase(1e6, 1.0) + math.pi / 4) <= 1e-5


def test_theta_against_simpson_and_mpmath():
    th = theta_phase(2.0, 1.0)
    assert th.imag == 0
    assert abs(th.real - theta_simpson(2.0, 1.0)) <= 1e-10
    assert abs(th.real - THETA_2_1) <= 1e-12


@given(wavenumbers, wavenumbers)
def test_theta_complex_matches_mpmath(kl, kr):
    assert abs(theta_phase(kl, kr) - theta_mp(kl, kr)) <= 1e-10


@given(ratios)
def test_theta_antisymmetric(r):
    assert theta_phase(r, 1.0) == pytest.approx(-theta_phase(1.0, r), abs=1e-12)


def test_theta_requires_forward_waves():
    with pytest.raises(DomainError):
        theta_phase(-1.0, 1.0)


def test_equal_wavenumbers_are_transparent():
    c = discontinuity_coefficients(4e7 + 1e5j, 4e7 + 1e5j)
    assert c.r_lr == 0 and c.r_rl == 0 and c.t_lr == 1 and c.t_rl == 1


def test_real_contrast_two_to_one():
    c = discontinuity_coefficients(2.0, 1.0)
    assert abs(c.r_lr) == pytest.approx(1 / 3, abs=1e-15)
    assert abs(c.t_lr) == pytest.approx(2 * math.sqrt(2) / 3, abs=1e-15)


def test_lossy_coefficients_pinned():
    k3, k6 = (complex(DEFAULT_SHEET.wavenumber(OMEGA, m)) for m in (0.3, 0.6))
    c = discontinuity_coefficients(k3, k6)
    for got, ref in zip((c.r_lr, c.t_lr, c.r_rl, c.t_rl), LOSSY_03_06):
        assert abs(got - ref) <= 1e-12
    for got, ref in zip((c.r_lr, c.t_lr, c.r_rl, c.t_rl), interface_coefficients_mp(k3, k6)):
        assert abs(got - ref) <= 1e-12


@given(ratios)
def test_unitarity_for_real_wavenumbers(r):
    c = discontinuity_coefficients(r * 1e7, 1e7)
    assert abs(c.r_lr) ** 2 + abs(c.t_lr) ** 2 == pytest.approx(1.0, abs=1e-12)
    assert abs(c.r_rl) ** 2 + abs(c.t_rl) ** 2 == pytest.approx(1.0, abs=1e-12)


@given(wavenumbers, wavenumbers)
def test_exchange_swaps_directions(kl, kr):
    a, b = discontinuity_coefficients(kl, kr), discontinuity_coefficients(kr, kl)
    assert a.r_lr == b.r_rl and a.t_lr == b.t_rl and a.theta_lr == -a.theta_rl


def test_identity_interface_gives_identity_matrix():
    m = matching_matrix(InterfaceScattering(0, 1, 0, 1, 0, 0))
    np.testing.assert_array_equal(m.matrix, np.eye(2))


@given(wavenumbers, wavenumbers)
def test_matching_round_trip(kl, kr):
    c = discontinuity_coefficients(kl, kr)
    s = s_params(matching_matrix(c))
    for got, ref in ((s.s11, c.r_lr), (s.s21, c.t_lr), (s.s22, c.r_rl), (s.s12, c.t_rl)):
        assert abs(got - ref) <= 1e-14


def test_opaque_interface_rejected():
    with pytest.raises(OpaqueInterfaceError):
        matching_matrix(InterfaceScattering(1, 0, -1, 0, 0, 0))


@given(wavenumbers, wavenumbers, st.floats(1e-9, 200e-9))
def test_etalon_matches_airy_series(k1, k2, length):
    first, second = _coef(k1, k2), _coef(k2, k1)
    T = cascade([matching_matrix(discontinuity_coefficients(k1, k2)), propagation_matrix(k2, length),
                 matching_matrix(discontinuity_coefficients(k2, k1))])
    ref = airy_etalon_s21(first, second, k2, length)
    assert abs(s_params(T).s21 - ref) <= 1e-9 * abs(ref)


def test_zero_length_propagation_is_identity():
    np.testing.assert_array_equal(propagation_matrix(3e7 + 1e5j, 0.0).matrix, np.eye(2))


def test_quarter_wave_propagation():
    k = 2 * math.pi / 170e-9
    p = propagation_matrix(k, 170e-9 / 4).matrix
    assert abs(p[0, 0] + 1j) <= 1e-15 and abs(p[1, 1] - 1j) <= 1e-15


def test_lossy_propagation_magnitude():
    k, l = 3e7 + 2e5j, 80e-9
    p = propagation_matrix(k, l).matrix
    assert abs(p[0, 0]) == pytest.approx(math.exp(k.imag * l), rel=1e-15)
    assert abs(p[1, 1]) == pytest.approx(math.exp(-k.imag * l), rel=1e-15)


def test_negative_length_rejected():
    with pytest.raises(DomainError):
        propagation_matrix(1e7, -1e-9)


def test_cascade_single_element_and_inverse_pair():
    p = propagation_matrix(3e7 + 1e5j, 50e-9)
    assert cascade([p]) is p
    inverse = TwoPortMatrix(np.linalg.inv(p.matrix))
    np.testing.assert_allclose(cascade([p, inverse]).matrix, np.eye(2), atol=1e-13)
    with pytest.raises(DomainError):
        cascade([])


def test_s_params_identity_and_uniform_segment():
    s = s_params(TwoPortMatrix(np.eye(2)))
    assert s.s21 == 1 and s.s11 == 0
    k, l = 3e7 + 1e5j, 40e-9
    s = s_params(propagation_matrix(k, l))
    assert abs(s.s21 - cmath.exp(1j * k * l)) <= 1e-15 and s.s11 == 0


def test_degenerate_network_rejected():
    with pytest.raises(DegenerateNetworkError):
        s_params(TwoPortMatrix([[0, 1], [1, 0]]))


def test_three_metaline_cell_vs_linear_solve():
    ks = [complex(DEFAULT_SHEET.wavenumber(OMEGA, m)) for m in (0.43, 0.7, 0.43, 0.3, 0.43, 0.7, 0.43)]
    lengths = [5e-9, 42.5e-9, 5e-9, 42.5e-9, 5e-9]
    _, ref = boundary_matching_s21(ks, lengths, _coef)
    assert abs(stack_s_params(ks, lengths).s21 - ref) <= 1e-9 * abs(ref)


@given(st.integers(2, 6), st.randoms(use_true_random=False))
def test_random_stacks_vs_linear_solve(n_if, rnd):
    ks = [complex(10 ** rnd.uniform(7, 8.5), 0) * (1 + 1j * rnd.uniform(0, 0.2))
          for _ in range(n_if + 1)]
    lengths = [rnd.uniform(1e-9, 150e-9) for _ in range(n_if - 1)]
    s11, s21 = boundary_matching_s21(ks, lengths, _coef)
    s = stack_s_params(ks, lengths)
    assert abs(s.s21 - s21) <= 1e-9 * abs(s21)
    assert abs(s.s11 - s11) <= 1e-9 * max(abs(s11), 1e-3)


@given(st.lists(wavenumbers, min_size=3, max_size=6), st.floats(1e-9, 100e-9))
def test_stack_is_reciprocal(ks, length):
    # S12 - S21 = (det T - 1) / T11 and det T = 1 up to cancellation of order |T|^2
    T = stack_transfer(ks, [length] * (len(ks) - 2)).matrix
    assert abs(np.linalg.det(T) - 1) <= 1e-13 * max(1.0, np.linalg.norm(T) ** 2)
    s = s_params(TwoPortMatrix(T))
    assert abs(s.s21 - s.s12) <= 1e-13 * max(1.0, np.linalg.norm(T) ** 2) / abs(T[0, 0])


def test_stack_transfer_length_check():
    with pytest.raises(DomainError):
        stack_transfer([1e7, 2e7, 1e7], [])
