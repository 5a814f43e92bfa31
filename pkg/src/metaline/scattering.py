"""Plasmon scattering at conductivity steps and transfer-matrix cascading.

Matrix convention (used by every function here): amplitudes of the forward
(+) and backward (-) waves on the *left* of an element are obtained from those
on its *right*,

    [a_L+, a_L-]^T = T [a_R+, a_R-]^T,

so a stack is the ordered product of its elements from left to right and

    S21 = 1/T11,  S11 = T21/T11,  S22 = -T12/T11,  S12 = det(T)/T11.
"""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache, reduce
from typing import Sequence

import numpy as np
from scipy import integrate

from .errors import (DegenerateNetworkError, DomainError, OpaqueInterfaceError,
                     QuadratureError, SingularityError)

THETA_ABS_TOL = 1e-12


@lru_cache(maxsize=65536)
def _theta_of_ratio(rho: complex) -> complex:
    # u = tan(t) maps du/(1+u^2) on [0, inf) to dt on [0, pi/2)
    if rho.imag == 0.0:
        r = rho.real
        func, kwargs = (lambda t: math.atan(r * math.tan(t))), {}
    else:
        func, kwargs = (lambda t: cmath.atan(rho * math.tan(t))), {"complex_func": True}
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, err = integrate.quad(func, 0.0, math.pi / 2, epsabs=THETA_ABS_TOL, epsrel=0.0,
                                        limit=500, **kwargs)
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(f"phase integral failed for kL/kR = {rho!r}: {exc}") from exc
    if kwargs:
        err = max(abs(err[0]), abs(err[1])) if isinstance(err, tuple) else abs(err)
    if not err <= 10 * THETA_ABS_TOL:
        raise QuadratureError(f"phase integral for kL/kR = {rho!r} has error estimate {err:.3g}")
    return complex(math.pi / 4 - 2.0 / math.pi * value)


def theta_phase(k_left: complex, k_right: complex) -> complex:
    """Reflection phase theta_LR of a plasmon incident from the left.

    theta = pi/4 - (2/pi) * integral_0^inf arctan(kL u / kR) / (u^2 + 1) du,
    principal branch of the complex arctangent. Real for real wavenumbers.
    """
    k_left, k_right = complex(k_left), complex(k_right)
    if not (k_left.real > 0 and k_right.real > 0):
        raise DomainError(f"wavenumbers must have positive real part: {k_left!r}, {k_right!r}")
    return _theta_of_ratio(k_left / k_right)


@dataclass(frozen=True)
class InterfaceScattering:
    r_lr: complex
    t_lr: complex
    r_rl: complex
    t_rl: complex
    theta_lr: complex
    theta_rl: complex


def discontinuity_coefficients(k_left: complex, k_right: complex) -> InterfaceScattering:
    """Reflection/transmission of plasmons at a single conductivity step."""
    k_left, k_right = complex(k_left), complex(k_right)
    total = k_left + k_right
    if total == 0:
        raise SingularityError("kL + kR = 0")
    # exchanging kL and kR flips the sign of the phase; one quadrature serves
    # both orientations so (kL, kR) and (kR, kL) are exact mirror images
    if (k_left.real, k_left.imag) >= (k_right.real, k_right.imag):
        theta_lr = theta_phase(k_left, k_right)
    else:
        theta_lr = -theta_phase(k_right, k_left)
    theta_rl = -theta_lr
    t = 2.0 * cmath.sqrt(k_left * k_right) / total
    r_lr = cmath.exp(1j * theta_lr) * (k_left - k_right) / total
    r_rl = cmath.exp(1j * theta_rl) * (k_right - k_left) / total
    return InterfaceScattering(r_lr, t, r_rl, t, theta_lr, theta_rl)


def matching_array(r_lr, t_lr, r_rl, t_rl):
    """Matching matrices for (arrays of) interface coefficients, shape (..., 2, 2)."""
    r_lr, t_lr, r_rl, t_rl = np.broadcast_arrays(*(np.asarray(v, dtype=complex)
                                                   for v in (r_lr, t_lr, r_rl, t_rl)))
    if np.any(t_lr == 0):
        raise OpaqueInterfaceError("interface with zero transmission")
    out = np.empty(r_lr.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = 1.0
    out[..., 0, 1] = -r_rl
    out[..., 1, 0] = r_lr
    out[..., 1, 1] = t_lr * t_rl - r_lr * r_rl
    return out / t_lr[..., None, None]


def propagation_array(k, length):
    """diag(exp(-i k l), exp(+i k l)) broadcast over ``k``; shape (..., 2, 2)."""
    if np.any(np.asarray(length) < 0):
        raise DomainError("segment length must be non-negative")
    phase = np.asarray(k, dtype=complex) * length
    out = np.zeros(phase.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = np.exp(-1j * phase)
    out[..., 1, 1] = np.exp(1j * phase)
    return out


@dataclass(frozen=True, eq=False)
class TwoPortMatrix:
    """A 2x2 wave-transfer matrix tagged with what produced it."""

    matrix: np.ndarray
    kind: str = "composite"

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise DomainError(f"transfer matrix must be 2x2, got shape {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def __matmul__(self, other: "TwoPortMatrix") -> "TwoPortMatrix":
        return TwoPortMatrix(self.matrix @ other.matrix, "composite")

    def __getitem__(self, idx):
        return self.matrix[idx]


def matching_matrix(iface: InterfaceScattering) -> TwoPortMatrix:
    """Transfer matrix of one interface whose implied S-parameters are ``iface``."""
    if iface.t_lr == 0:
        raise OpaqueInterfaceError("interface with zero transmission is opaque")
    return TwoPortMatrix(matching_array(iface.r_lr, iface.t_lr, iface.r_rl, iface.t_rl), "matching")


def propagation_matrix(k: complex, length: float) -> TwoPortMatrix:
    if length < 0:
        raise DomainError(f"segment length must be non-negative, got {length!r}")
    return TwoPortMatrix(propagation_array(k, length), "propagation")


def cascade(elements: Sequence[TwoPortMatrix]) -> TwoPortMatrix:
    """Ordered product of transfer matrices, leftmost element first."""
    if not elements:
        raise DomainError("cannot cascade an empty list")
    if len(elements) == 1:
        return elements[0]
    return TwoPortMatrix(reduce(np.matmul, (e.matrix for e in elements)), "composite")


@dataclass(frozen=True)
class SParams:
    s11: complex
    s21: complex
    s12: complex
    s22: complex


def s_params_array(t):
    """S-parameters (s11, s21, s12, s22) of transfer matrices with shape (..., 2, 2)."""
    t11 = t[..., 0, 0]
    if np.any(t11 == 0) or not np.all(np.isfinite(t11)):
        raise DegenerateNetworkError("T11 = 0: no transmission through the network")
    det = t[..., 0, 0] * t[..., 1, 1] - t[..., 0, 1] * t[..., 1, 0]
    return t[..., 1, 0] / t11, 1.0 / t11, det / t11, -t[..., 0, 1] / t11


def s_params(T: TwoPortMatrix) -> SParams:
    return SParams(*(complex(v) for v in s_params_array(T.matrix)))


def stack_transfer(wavenumbers: Sequence[complex], lengths: Sequence[float]) -> TwoPortMatrix:
    """Transfer matrix of regions ``wavenumbers`` (outer two semi-infinite).

    ``lengths`` gives the interior segment lengths, so
    ``len(lengths) == len(wavenumbers) - 2``. Reference planes sit on the first
    and last interfaces.
    """
    if len(lengths) != len(wavenumbers) - 2:
        raise DomainError("need one length per interior segment")
    elements = [matching_matrix(discontinuity_coefficients(wavenumbers[0], wavenumbers[1]))]
    for m, length in enumerate(lengths, start=1):
        elements.append(propagation_matrix(wavenumbers[m], length))
        elements.append(matching_matrix(discontinuity_coefficients(wavenumbers[m],
                                                                   wavenumbers[m + 1])))
    return cascade(elements)


def stack_s_params(wavenumbers, lengths) -> SParams:
    return s_params(stack_transfer(wavenumbers, lengths))
