import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from metaline.errors import DomainError, NotFoundError, SingularMediumError
from metaline.graphene import (CONSTANTS, DEFAULT_SHEET, GrapheneState, Sheet,
                               SurfaceConductivity, angular_frequency,
                               chemical_potential_for_wavenumber, drude_conductivity,
                               gp_wavenumber, interband_edge, kubo_conductivity, plasmon_mode,
                               surface_conductivity)
from metaline.oracles import kubo_mp, wavenumber_mp

OMEGA = angular_frequency(6e-6)
GAMMA = 5e11

# frozen from scripts/freeze_oracles.py (mpmath, 50 digits)
SIGMA_015 = 3.410649293662817e-07 + 2.3540003772512923e-05j
LAMBDA_GP_015 = 2.6610283948499294e-08
K_04 = 39782767.07842284 + 145727.5296929708j
MU_DENSE_100NM = 0.2765428  # 10^5-point scan, spacing 8.7e-6 eV


def test_default_state_matches_room_temperature_picosecond_sheet():
    s = GrapheneState(0.15)
    assert s.temperature == 300.0
    assert s.relaxation_time == pytest.approx(1e-12, rel=1e-15)
    assert s.scattering_rate == GAMMA


def test_conductivity_pinned_against_arbitrary_precision():
    got = kubo_conductivity(OMEGA, GrapheneState(0.15)).value
    assert abs(got - SIGMA_015) / abs(SIGMA_015) <= 1e-10
    assert abs(got - kubo_mp(OMEGA, 0.15, 300.0, GAMMA)) / abs(got) <= 1e-10


def test_guided_wavelength_anchor():
    mode = plasmon_mode(OMEGA, GrapheneState(0.15))
    assert mode.guided_wavelength == pytest.approx(LAMBDA_GP_015, rel=1e-10)
    assert mode.propagation_length > 0


@pytest.mark.parametrize("mu", [0.3, 0.05, 1.2])
def test_conductivity_even_in_chemical_potential(mu):
    a = surface_conductivity(OMEGA, mu)
    b = surface_conductivity(OMEGA, -mu)
    assert abs(a - b) / abs(a) <= 1e-12


@pytest.mark.parametrize("temperature", [1.0, 300.0])
def test_drude_limit_far_infrared(temperature):
    omega = angular_frequency(60e-6)
    full = surface_conductivity(omega, 0.5, temperature, GAMMA)
    drude = drude_conductivity(omega, 0.5, GAMMA)
    assert abs(full - drude) / abs(full) <= 0.02


def test_no_overflow_for_large_negative_potential_at_low_temperature():
    val = surface_conductivity(OMEGA, -1.0, 1.0, GAMMA)
    assert np.isfinite(val)
    assert abs(val - kubo_mp(OMEGA, -1.0, 1.0, GAMMA)) / abs(val) <= 1e-10


@given(st.floats(2e-6, 200e-6), st.floats(-1.0, 1.0), st.floats(4.0, 600.0),
       st.floats(1e10, 3e13))
def test_kubo_matches_mpmath(wavelength, mu, temperature, gamma):
    omega = angular_frequency(wavelength)
    got = surface_conductivity(omega, mu, temperature, gamma)
    ref = kubo_mp(omega, mu, temperature, gamma)
    assert abs(got - ref) / abs(ref) <= 1e-10


@given(st.floats(0.13, 1.0))
def test_passive_sheet_has_forward_plasmon(mu):
    sigma = surface_conductivity(OMEGA, mu)
    k = DEFAULT_SHEET.wavenumber(OMEGA, mu)
    assert sigma.real >= 0
    assert k.real > 0 and k.imag >= 0


def test_vectorised_matches_scalar():
    mus = np.linspace(0.13, 1.0, 7)
    vec = DEFAULT_SHEET.conductivity(OMEGA, mus)
    for m, v in zip(mus, vec):
        assert v == kubo_conductivity(OMEGA, GrapheneState(float(m))).value


@pytest.mark.parametrize("bad", [dict(omega=0.0), dict(omega=-1.0), dict(temperature=0.0)])
def test_conductivity_domain_errors(bad):
    args = dict(omega=OMEGA, mu=0.2, temperature=300.0)
    args.update(bad)
    with pytest.raises(DomainError):
        surface_conductivity(args["omega"], args["mu"], args["temperature"])


@pytest.mark.parametrize("kwargs", [dict(temperature=-1.0), dict(scattering_rate=-1.0),
                                    dict(permittivity=0.0)])
def test_invalid_state_rejected(kwargs):
    with pytest.raises(DomainError):
        GrapheneState(0.2, **kwargs)


def test_lossless_inductive_sheet_gives_real_wavenumber():
    s = 3e-5
    mode = gp_wavenumber(SurfaceConductivity(1j * s, OMEGA))
    assert mode.wavenumber.imag == 0
    assert mode.wavenumber.real == pytest.approx(2 * OMEGA * CONSTANTS.eps0 / s, rel=1e-15)
    assert mode.propagation_length == math.inf


@given(st.complex_numbers(min_magnitude=1e-7, max_magnitude=1e-3, allow_nan=False,
                          allow_infinity=False))
def test_doubling_conductivity_halves_wavenumber(sigma):
    k1 = gp_wavenumber(SurfaceConductivity(sigma, OMEGA)).wavenumber
    k2 = gp_wavenumber(SurfaceConductivity(2 * sigma, OMEGA)).wavenumber
    assert k2 == k1 / 2


def test_zero_conductivity_is_singular():
    with pytest.raises(SingularMediumError):
        gp_wavenumber(SurfaceConductivity(0j, OMEGA))


def test_wavenumber_matches_oracle():
    k = plasmon_mode(OMEGA, GrapheneState(0.4)).wavenumber
    assert abs(k - K_04) / abs(K_04) <= 1e-10
    assert abs(k - wavenumber_mp(OMEGA, 0.4, 300.0, GAMMA)) / abs(k) <= 1e-10


def test_inverse_round_trip():
    k = DEFAULT_SHEET.wavenumber(OMEGA, 0.4).real
    assert chemical_potential_for_wavenumber(k, OMEGA) == pytest.approx(0.4, abs=1e-9)


@given(st.floats(0.14, 0.99))
def test_inverse_round_trip_property(mu):
    k = DEFAULT_SHEET.wavenumber(OMEGA, mu).real
    assert chemical_potential_for_wavenumber(k, OMEGA) == pytest.approx(mu, abs=1e-9)


def test_inverse_agrees_with_dense_scan():
    mu = chemical_potential_for_wavenumber(2 * math.pi / 100e-9, OMEGA)
    assert abs(mu - MU_DENSE_100NM) <= 8.7e-6


def test_target_out_of_range_reports_attainable_range():
    k_hi = DEFAULT_SHEET.wavenumber(OMEGA, 0.13).real
    with pytest.raises(NotFoundError) as info:
        chemical_potential_for_wavenumber(2 * k_hi, OMEGA)
    lo, hi = info.value.attainable
    assert lo < hi == pytest.approx(k_hi)


def test_bounds_below_interband_edge_rejected():
    assert interband_edge(OMEGA) == pytest.approx(0.1033, abs=1e-4)
    with pytest.raises(DomainError):
        chemical_potential_for_wavenumber(4e7, OMEGA, bounds=(0.1, 1.0))


def test_sheet_from_relaxation_time():
    sheet = Sheet.from_relaxation_time(1e-13, 77.0)
    assert sheet.scattering_rate == pytest.approx(5e12)
    assert sheet.at(0.2).temperature == 77.0
    assert GrapheneState(0.2).with_potential(0.3).chemical_potential == 0.3


def test_conductivity_continuous_through_zero_potential():
    omega = angular_frequency(90e-6)
    at_zero = surface_conductivity(omega, 0.0, 4.0, 1.6e13)
    nearby = surface_conductivity(omega, 1e-9, 4.0, 1.6e13)
    assert at_zero.real > 0
    assert abs(at_zero - nearby) / abs(at_zero) < 1e-6
