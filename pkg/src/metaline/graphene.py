"""Graphene sheet model: Kubo surface conductivity and quasi-static plasmons.

Chemical potentials are in eV everywhere in the public API; everything else is
SI. Time dependence is exp(-i omega t), so a passive sheet has Re(sigma) >= 0
and a forward plasmon exp(i k z) has Re(k) > 0, Im(k) >= 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import constants as const
from scipy import optimize

from .errors import DomainError, NotFoundError, SingularMediumError


@dataclass(frozen=True)
class PhysicalConstants:
    """CODATA values used by the conductivity model (SI units)."""

    e: float = const.e
    hbar: float = const.hbar
    k_B: float = const.k
    eps0: float = const.epsilon_0
    c: float = const.c


CONSTANTS = PhysicalConstants()

DEFAULT_TEMPERATURE = 300.0
DEFAULT_RELAXATION_TIME = 1e-12
# relaxation time tau = 1 / (2 Gamma)
DEFAULT_SCATTERING_RATE = 1.0 / (2.0 * DEFAULT_RELAXATION_TIME)


def angular_frequency(wavelength: float) -> float:
    """Angular frequency (rad/s) of a free-space wavelength in metres."""
    if wavelength <= 0:
        raise DomainError(f"wavelength must be positive, got {wavelength!r}")
    return 2.0 * math.pi * CONSTANTS.c / wavelength


def scattering_rate_from_tau(tau: float) -> float:
    if tau <= 0:
        raise DomainError(f"relaxation time must be positive, got {tau!r}")
    return 1.0 / (2.0 * tau)


@dataclass(frozen=True)
class Sheet:
    """Material parameters of a graphene sheet, excluding its doping.

    A ``Sheet`` is the part of :class:`GrapheneState` shared by every segment
    of a device; segments differ only by chemical potential.
    """

    temperature: float = DEFAULT_TEMPERATURE
    scattering_rate: float = DEFAULT_SCATTERING_RATE
    permittivity: float = CONSTANTS.eps0

    def __post_init__(self):
        if not self.temperature > 0:
            raise DomainError(f"temperature must be > 0 K, got {self.temperature!r}")
        if not self.scattering_rate >= 0:
            raise DomainError(f"scattering rate must be >= 0, got {self.scattering_rate!r}")
        if not self.permittivity > 0:
            raise DomainError(f"permittivity must be > 0, got {self.permittivity!r}")

    @classmethod
    def from_relaxation_time(cls, tau=DEFAULT_RELAXATION_TIME, temperature=DEFAULT_TEMPERATURE,
                             permittivity=CONSTANTS.eps0) -> "Sheet":
        return cls(temperature, scattering_rate_from_tau(tau), permittivity)

    def at(self, chemical_potential: float) -> "GrapheneState":
        return GrapheneState(chemical_potential, self.temperature, self.scattering_rate,
                             self.permittivity)

    def conductivity(self, omega, mu):
        """Vectorised Kubo conductivity (S) for chemical potential(s) ``mu`` in eV."""
        return surface_conductivity(omega, mu, self.temperature, self.scattering_rate)

    def wavenumber(self, omega, mu):
        """Vectorised complex plasmon wavenumber (rad/m)."""
        sigma = self.conductivity(omega, mu)
        if np.any(sigma == 0):
            raise SingularMediumError("zero surface conductivity")
        return 2j * omega * self.permittivity / sigma


DEFAULT_SHEET = Sheet()


@dataclass(frozen=True)
class GrapheneState:
    """Doping, temperature and loss of one uniform graphene region.

    Attributes
    ----------
    chemical_potential : float
        mu_c in eV; may be negative.
    temperature : float
        Kelvin, strictly positive.
    scattering_rate : float
        Gamma in rad/s; relaxation time is 1/(2 Gamma).
    permittivity : float
        Average permittivity of the media above and below the sheet (F/m).
    """

    chemical_potential: float
    temperature: float = DEFAULT_TEMPERATURE
    scattering_rate: float = DEFAULT_SCATTERING_RATE
    permittivity: float = CONSTANTS.eps0

    def __post_init__(self):
        Sheet(self.temperature, self.scattering_rate, self.permittivity)

    @property
    def relaxation_time(self) -> float:
        return math.inf if self.scattering_rate == 0 else 1.0 / (2.0 * self.scattering_rate)

    @property
    def sheet(self) -> Sheet:
        return Sheet(self.temperature, self.scattering_rate, self.permittivity)

    def with_potential(self, chemical_potential: float) -> "GrapheneState":
        return replace(self, chemical_potential=chemical_potential)


@dataclass(frozen=True)
class SurfaceConductivity:
    value: complex
    omega: float


@dataclass(frozen=True)
class PlasmonMode:
    wavenumber: complex
    omega: float

    @property
    def guided_wavelength(self) -> float:
        return 2.0 * math.pi / self.wavenumber.real

    @property
    def propagation_length(self) -> float:
        """Intensity decay length 1/(2 Im k); infinite for a lossless mode."""
        im = self.wavenumber.imag
        return math.inf if im == 0 else 1.0 / (2.0 * im)


def surface_conductivity(omega, mu, temperature=DEFAULT_TEMPERATURE,
                         scattering_rate=DEFAULT_SCATTERING_RATE):
    """Kubo conductivity (intraband + interband) in siemens, broadcasting over inputs.

    The interband logarithm uses |mu| and is continuous through mu = 0.
    """
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0):
        raise DomainError("angular frequency must be positive")
    if np.any(np.asarray(temperature) <= 0):
        raise DomainError("temperature must be positive")
    c = CONSTANTS
    mu_j = np.asarray(mu, dtype=float) * c.e
    kT = c.k_B * np.asarray(temperature, dtype=float)
    w = omega + 2j * np.asarray(scattering_rate, dtype=float)
    x = mu_j / kT
    # x + 2 ln(exp(-x) + 1) without overflow for large negative x
    occupation = x + 2.0 * np.logaddexp(0.0, -x)
    intra = 1j * c.e**2 * kT / (math.pi * c.hbar**2 * w) * occupation
    two_mu = 2.0 * np.abs(mu_j)
    # ln(a) - ln(b) equals the principal ln(a/b) except at mu = 0, where a/b = -1 sits
    # on the cut; the difference form is the limit mu -> 0 and keeps Re(sigma) >= 0
    inter = 1j * c.e**2 / (4.0 * math.pi * c.hbar) * (
        np.log(two_mu - w * c.hbar) - np.log(two_mu + w * c.hbar))
    out = intra + inter
    return out if out.ndim else complex(out)


def kubo_conductivity(omega: float, state: GrapheneState) -> SurfaceConductivity:
    """Complex surface conductivity of ``state`` at angular frequency ``omega``."""
    value = surface_conductivity(omega, state.chemical_potential, state.temperature,
                                 state.scattering_rate)
    return SurfaceConductivity(complex(value), float(omega))


def drude_conductivity(omega, mu, scattering_rate=DEFAULT_SCATTERING_RATE):
    """Zero-temperature intraband (Drude) limit, i e^2 mu / (pi hbar^2 (omega + 2i Gamma))."""
    c = CONSTANTS
    return 1j * c.e**2 * (np.asarray(mu) * c.e) / (
        math.pi * c.hbar**2 * (omega + 2j * scattering_rate))


def gp_wavenumber(sigma: SurfaceConductivity, permittivity: float = CONSTANTS.eps0) -> PlasmonMode:
    """Quasi-static plasmon wavenumber k = 2 i omega eps / sigma."""
    if sigma.value == 0:
        raise SingularMediumError("zero surface conductivity supports no plasmon")
    if permittivity <= 0:
        raise DomainError("permittivity must be positive")
    k = 2j * sigma.omega * permittivity / sigma.value
    return PlasmonMode(complex(k), sigma.omega)


def plasmon_mode(omega: float, state: GrapheneState) -> PlasmonMode:
    return gp_wavenumber(kubo_conductivity(omega, state), state.permittivity)


def interband_edge(omega: float) -> float:
    """hbar omega / 2 in eV: the Pauli-blocking threshold of interband absorption."""
    return CONSTANTS.hbar * omega / (2.0 * CONSTANTS.e)


def chemical_potential_for_wavenumber(k_target: float, omega: float, bounds=(0.13, 1.0),
                                      sheet: Sheet = DEFAULT_SHEET, tol: float = 1e-12) -> float:
    """Invert Re k(mu) = k_target on the monotone plasmonic branch.

    Brent's method to an absolute tolerance ``tol`` (eV).

    Raises
    ------
    NotFoundError
        ``k_target`` is not bracketed by Re k at the bounds; ``attainable``
        carries the reachable (min, max) of Re k.
    """
    lo, hi = map(float, bounds)
    if not lo < hi:
        raise DomainError(f"empty bounds {bounds!r}")
    if lo <= interband_edge(omega):
        raise DomainError(f"lower bound {lo} eV is not above the interband edge "
                          f"{interband_edge(omega):.4f} eV")

    def f(mu):
        return float(np.real(sheet.wavenumber(omega, mu))) - k_target

    f_lo, f_hi = f(lo), f(hi)
    if f_lo == 0:
        return lo
    if f_hi == 0:
        return hi
    if np.sign(f_lo) == np.sign(f_hi):
        attainable = tuple(sorted((f_lo + k_target, f_hi + k_target)))
        raise NotFoundError(f"Re k = {k_target:.6g} rad/m not reachable in [{lo}, {hi}] eV; "
                            f"attainable range {attainable[0]:.6g}..{attainable[1]:.6g} rad/m",
                            attainable)
    return optimize.brentq(f, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps)
