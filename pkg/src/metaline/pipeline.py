"""Spatial-Fourier operator pipeline: lens, transfer mask, lens.

A lens maps transverse spatial frequency k_x to position x' = k_x / beta in
its back focal plane, beta being the lens's Fourier scale (rad/m^2). The
ideal lens is the unitary centred DFT on a zero-padded window whose size M
is picked so the DFT's own frequency-to-position map equals beta,

    beta = 2 pi / (M p^2),  p = sample pitch,

and spatial frequency k_m = 2 pi (m - c) / (M p) sits at x_m = (m - c) p on
the same grid. Two passes reverse the coordinate exactly, so the pipeline
output is compared with the mirrored analytic reference.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import DomainError, GeometryError, ParseError
from .synthesis import (NOMINAL_APERTURE, NOMINAL_LENS_LENGTH, NOMINAL_WAVELENGTH, CellDesign,
                        TransferFunctionSpec)

SINC_BAND = 16 * math.pi
DEFAULT_FILL = 0.8
DEFAULT_BPM_STEPS = 10_000
DEFAULT_ABSORBER = 0.1
DEFAULT_GUARD = 1.8  # graded-index window width in apertures
ABSORBER_DEPTH = 20.0  # field attenuation exp(-20) across a full lens at the edge
PHASE_AMPLITUDE_FLOOR = 0.02


@dataclass(frozen=True, eq=False)
class FieldProfile:
    """Complex transverse field sampled at x_j = -W/2 + (j + 1/2) W / N.

    ``exact``, when present, is the analytic field: ``exact(x, order)``
    returns its ``order``-th derivative at positions ``x``.
    """

    samples: np.ndarray
    aperture: float
    exact: Callable | None = field(default=None, repr=False)

    def __post_init__(self):
        s = np.array(self.samples, dtype=complex)
        if s.ndim != 1 or s.size < 2 or s.size % 2:
            raise DomainError(f"field needs an even number (>= 2) of samples, got {s.size}")
        if not np.all(np.isfinite(s)):
            raise DomainError("field samples must be finite")
        if not self.aperture > 0:
            raise DomainError("aperture must be positive")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def n(self) -> int:
        return self.samples.size

    @property
    def pitch(self) -> float:
        return self.aperture / self.n

    @property
    def positions(self) -> np.ndarray:
        # (j - (n-1)/2) is an exact half-integer, so x_{n-1-j} = -x_j bit for bit
        return (np.arange(self.n) - (self.n - 1) / 2) * self.pitch

    def energy(self) -> float:
        return float(np.sum(np.abs(self.samples) ** 2) * self.pitch)

    def mirrored(self) -> "FieldProfile":
        return FieldProfile(self.samples[::-1], self.aperture)

    def padded(self, m: int) -> "FieldProfile":
        """Zero-pad symmetrically to ``m`` samples at the same pitch."""
        if m < self.n or (m - self.n) % 2:
            raise DomainError(f"cannot pad {self.n} samples to {m}")
        pad = (m - self.n) // 2
        return FieldProfile(np.pad(self.samples, pad), m * self.pitch)

    def cropped(self, n: int) -> "FieldProfile":
        """The central ``n`` samples."""
        if n > self.n or (self.n - n) % 2:
            raise DomainError(f"cannot crop {self.n} samples to {n}")
        start = (self.n - n) // 2
        return FieldProfile(self.samples[start:start + n], n * self.pitch)


def sinc_profile(x, aperture, band=SINC_BAND):
    """sin(band x / W) / (band x / W), equal to 1 at x = 0."""
    return np.sinc(band / math.pi * np.asarray(x, dtype=float) / aperture)


class _SincExact:
    def __init__(self, aperture, band=SINC_BAND):
        self.aperture, self.band = aperture, band
        self._derivs = {}

    def __call__(self, x, order=0):
        if order == 0:
            return sinc_profile(x, self.aperture, self.band)
        if order not in self._derivs:
            from .oracles import sinc_derivatives
            self._derivs[order] = sinc_derivatives(order, self.band)
        return self._derivs[order](x, self.aperture)


def make_input_sinc(n: int = 256, aperture: float = NOMINAL_APERTURE,
                    band: float = SINC_BAND) -> FieldProfile:
    """Sampled sinc(16 pi x / W) input with its analytic derivatives attached."""
    if n < 2 or n % 2:
        raise DomainError("sample count must be even and >= 2")
    x = (np.arange(n) - (n - 1) / 2) * (aperture / n)
    return FieldProfile(sinc_profile(x, aperture, band), aperture, _SincExact(aperture, band))


@dataclass(frozen=True)
class LensModel:
    """Fourier-transforming lens.

    ``mode`` is ``"ideal_ft"`` (centred unitary DFT) or ``"grin_bpm"``
    (split-step propagation through n(x) = n0 sqrt(1 - g^2 x^2) over one
    quarter pitch). The Fourier scale is beta = k0 n0 g; with ``index=None``
    the ideal lens falls back to the unpadded same-grid DFT.

    The graded-index lens is ``guard`` apertures wide; the field is zero
    outside the aperture on entry and is cropped back to it on exit. The
    absorbing layer occupies the outer ``absorber`` fraction of the lens.
    """

    mode: str = "ideal_ft"
    index: float | None = None
    length: float = NOMINAL_LENS_LENGTH
    gradient: float | None = None
    wavelength: float = NOMINAL_WAVELENGTH
    steps: int = DEFAULT_BPM_STEPS
    absorber: float = DEFAULT_ABSORBER
    guard: float = DEFAULT_GUARD

    def __post_init__(self):
        if self.mode not in ("ideal_ft", "grin_bpm"):
            raise DomainError(f"unknown lens mode {self.mode!r}")
        if not self.length > 0 or not self.wavelength > 0:
            raise GeometryError("lens length and wavelength must be positive")
        if self.gradient is None:
            object.__setattr__(self, "gradient", math.pi / (2 * self.length))
        if abs(self.gradient * self.length - math.pi / 2) > 1e-12:
            raise GeometryError(f"g L = {self.gradient * self.length!r} is not a quarter pitch")
        if self.index is not None and not self.index > 0:
            raise GeometryError("centre index must be positive")
        if self.mode == "grin_bpm" and self.index is None:
            raise GeometryError("a graded-index lens needs its centre index")
        if self.steps < 1 or not 0 <= self.absorber < 1 or not self.guard >= 1:
            raise DomainError("need steps >= 1, 0 <= absorber < 1 and guard >= 1")

    @classmethod
    def matched(cls, band_edge: float = SINC_BAND / NOMINAL_APERTURE,
                aperture: float = NOMINAL_APERTURE, fill: float = DEFAULT_FILL,
                mode: str = "ideal_ft", **kwargs) -> "LensModel":
        """Lens whose Fourier plane puts ``band_edge`` (rad/m) at ``fill`` * W/2."""
        length = kwargs.pop("length", NOMINAL_LENS_LENGTH)
        wavelength = kwargs.pop("wavelength", NOMINAL_WAVELENGTH)
        beta = band_edge / (fill * aperture / 2)
        k0 = 2 * math.pi / wavelength
        g = math.pi / (2 * length)
        return cls(mode, beta / (k0 * g), length, g, wavelength, **kwargs)

    @property
    def k(self) -> float:
        return 2 * math.pi / self.wavelength * self.index

    @property
    def fourier_scale(self) -> float | None:
        return None if self.index is None else self.k * self.gradient

    def refractive_index(self, x):
        return self.index * np.sqrt(np.maximum(0.0, 1.0 - (self.gradient * np.asarray(x)) ** 2))


def centered_dft(samples) -> np.ndarray:
    """F_m = M^-1/2 sum_j f_j exp(-2 pi i (j - c)(m - c) / M), c = (M - 1)/2."""
    a = np.asarray(samples, dtype=complex)
    m = a.size
    j = np.arange(m)
    # exp(2 pi i c j / M) = (-1)^j exp(-i pi j / M)
    twiddle = np.where(j % 2, -1.0, 1.0) * np.exp(-1j * np.pi * j / m)
    # exp(-2 pi i c^2 / M) with c^2/M reduced exactly: (M-1)^2 / (4M) mod 1
    frac = ((m - 1) ** 2 % (4 * m)) / (4 * m)
    const = np.exp(-2j * np.pi * frac)
    return const * twiddle * np.fft.fft(a * twiddle) / math.sqrt(m)


def fourier_window(n: int, pitch: float, beta: float | None) -> int:
    """Even window size whose DFT frequency-to-position map matches ``beta``."""
    if beta is None:
        return n
    m = 2 * int(round(math.pi / (beta * pitch**2)))
    if m < n:
        raise GeometryError(f"Fourier scale {beta:.4g} rad/m^2 needs a window of {m} samples, "
                            f"smaller than the {n}-sample aperture; refine the sampling")
    return m


def grin_propagate(f: FieldProfile, lens: LensModel) -> FieldProfile:
    """Split-step propagation over the full lens window (no cropping)."""
    m = f.n + 2 * int(round((lens.guard - 1) * f.n / 2))
    f = f.padded(m)
    x = f.positions
    half = f.aperture / 2
    if lens.gradient * half >= 1.0:
        raise GeometryError(f"graded index reaches zero inside the lens (g w/2 = "
                            f"{lens.gradient * half:.3f})")
    k = lens.k
    k0 = 2 * math.pi / lens.wavelength
    dz = lens.length / lens.steps
    potential = (k0**2 * lens.refractive_index(x) ** 2 - k**2) / (2 * k)
    alpha = np.zeros_like(x)
    if lens.absorber > 0:
        start = (1 - lens.absorber) * half
        u = np.clip((np.abs(x) - start) / (half - start), 0.0, 1.0)
        alpha = ABSORBER_DEPTH / lens.length * 0.5 * (1 - np.cos(np.pi * u))
    half_step = np.exp((1j * potential - alpha) * dz / 2)
    full_step = half_step**2
    kx = 2 * math.pi * np.fft.fftfreq(f.n, d=f.pitch)
    kinetic = np.exp(-1j * kx**2 * dz / (2 * k))
    a = f.samples * half_step
    for _ in range(lens.steps - 1):
        a = np.fft.ifft(kinetic * np.fft.fft(a)) * full_step
    a = np.fft.ifft(kinetic * np.fft.fft(a)) * half_step
    return FieldProfile(a, f.aperture)


def lens_transform(f: FieldProfile, lens: LensModel) -> FieldProfile:
    """Field in the back focal plane of ``lens``.

    The ideal lens returns the field on its (possibly padded) Fourier window,
    centred on the input grid; the graded-index lens stays on the input grid.
    """
    if lens.mode == "grin_bpm":
        return grin_propagate(f, lens).cropped(f.n)
    m = fourier_window(f.n, f.pitch, lens.fourier_scale)
    g = f.padded(m) if m > f.n else f
    return FieldProfile(centered_dft(g.samples), g.aperture)


def apply_transfer(F: FieldProfile, transfer) -> FieldProfile:
    transfer = np.asarray(transfer, dtype=complex)
    if transfer.shape != F.samples.shape:
        raise DomainError(f"transfer has {transfer.size} samples, field has {F.n}")
    return FieldProfile(F.samples * transfer, F.aperture)


def ideal_transfer(spec: TransferFunctionSpec, positions) -> np.ndarray:
    """Target H at Fourier-plane positions; zero outside the MTA aperture."""
    x = np.asarray(positions, dtype=float)
    inside = np.abs(x) <= spec.aperture / 2
    return np.where(inside, spec(np.where(inside, x, 0.0) + (~inside) * spec.aperture / 4), 0)


def synthesized_transfer(designs: Sequence[CellDesign], aperture: float, positions) -> np.ndarray:
    """Piecewise-constant transfer from per-cell designs, normalised by their reference."""
    designs = sorted(designs, key=lambda d: d.index)
    values = np.array([d.normalized_s21 for d in designs])
    pitch = aperture / len(values)
    x = np.asarray(positions, dtype=float)
    idx = np.floor((x + aperture / 2) / pitch).astype(int)
    inside = (idx >= 0) & (idx < len(values))
    out = np.zeros(x.shape, dtype=complex)
    out[inside] = values[idx[inside]]
    return out


@dataclass(frozen=True, eq=False)
class OperatorResult:
    output: FieldProfile
    reference: FieldProfile
    nrms: float
    correlation: float
    scale: complex
    spectrum: FieldProfile = field(repr=False, default=None)
    transfer: np.ndarray = field(repr=False, default=None)


def compare(output, reference):
    """Best complex scale c, normalised RMS |g - c r| / |c r| and |correlation|."""
    g = np.asarray(output, dtype=complex)
    r = np.asarray(reference, dtype=complex)
    rr = np.vdot(r, r).real
    if rr == 0 or not np.any(g):
        return 0j, math.inf, 0.0
    c = np.vdot(r, g) / rr
    nrms = float(np.linalg.norm(g - c * r) / np.linalg.norm(c * r))
    corr = float(abs(np.vdot(r, g)) / (np.linalg.norm(r) * np.linalg.norm(g)))
    return complex(c), nrms, corr


def _lens_scale(f: FieldProfile, lens: LensModel) -> float:
    if lens.mode == "ideal_ft":
        m = fourier_window(f.n, f.pitch, lens.fourier_scale)
        return 2 * math.pi / (m * f.pitch**2)
    return lens.fourier_scale


def analytic_reference(spec: TransferFunctionSpec, f: FieldProfile, lens: LensModel) -> FieldProfile:
    """Expected output before mirroring.

    diff1/diff2 use the input's analytic derivatives when available (else a
    periodic FFT derivative); int2 filters the input spectrum by H(k / beta)
    with numpy's FFT on a zero-padded window, with no aperture stop.
    """
    from .oracles import fft_derivative

    if spec.kind in ("diff1", "diff2"):
        order = 1 if spec.kind == "diff1" else 2
        if f.exact is not None:
            return FieldProfile(f.exact(f.positions, order), f.aperture)
        return FieldProfile(fft_derivative(f.samples, f.pitch, order), f.aperture)
    beta = _lens_scale(f, lens)
    m = 1 << int(math.ceil(math.log2(max(fourier_window(f.n, f.pitch, beta), f.n) * 2)))
    padded = f.padded(m)
    k = 2 * math.pi * np.fft.fftfreq(m, d=f.pitch)
    filtered = np.fft.ifft(spec(k / beta) * np.fft.fft(padded.samples))
    return FieldProfile(filtered, padded.aperture).cropped(f.n)


def run_operator(spec: TransferFunctionSpec, f: FieldProfile, lens: LensModel,
                 designs: Sequence[CellDesign] | None = None) -> OperatorResult:
    """lens -> transfer -> lens, compared with the mirrored analytic reference.

    ``designs=None`` uses the ideal transfer function; otherwise the
    synthesised cells act as a piecewise-constant mask over each period.
    """
    F = lens_transform(f, lens)
    if designs is None:
        H = ideal_transfer(spec, F.positions)
    else:
        H = synthesized_transfer(designs, spec.aperture, F.positions)
    G = lens_transform(apply_transfer(F, H), lens)
    out = G.cropped(f.n) if G.n > f.n else G
    reference = analytic_reference(spec, f, lens)
    mirrored = reference.mirrored()
    scale, nrms, corr = compare(out.samples, mirrored.samples)
    return OperatorResult(out, mirrored, nrms, corr, scale, F, H)


@dataclass(frozen=True)
class DeviationStats:
    amplitude_std: float
    phase_std_deg: float
    max_residual: float
    n_cells: int
    n_phase_cells: int


def deviation_report(designs: Sequence[CellDesign],
                     amplitude_floor: float = PHASE_AMPLITUDE_FLOOR) -> DeviationStats:
    """Spread of achieved versus desired amplitude and phase over the cells.

    Values are normalised by each design's reference factor; cells with
    |H| < ``amplitude_floor`` are left out of the phase statistics.
    """
    if not designs:
        raise DomainError("no designs to report on")
    designs = sorted(designs, key=lambda d: d.index)
    s = np.array([d.normalized_s21 for d in designs])
    h = np.array([d.normalized_target for d in designs])
    amp = np.abs(s) - np.abs(h)
    keep = np.abs(h) >= amplitude_floor
    if keep.any():
        dphi = np.unwrap(np.angle(s[keep] / h[keep]))
        phase_std = float(np.degrees(np.std(dphi)))
    else:
        phase_std = 0.0
    return DeviationStats(float(np.std(amp)), phase_std,
                          float(max(d.residual for d in designs)), len(designs), int(keep.sum()))


FIELD_HEADER = ["x_m", "re_f", "im_f"]


def write_field_csv(path, f: FieldProfile) -> Path:
    path = Path(path)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FIELD_HEADER)
    for x, v in zip(f.positions, f.samples):
        w.writerow([repr(float(x)), repr(float(v.real)), repr(float(v.imag))])
    try:
        path.write_text(buf.getvalue())
    except OSError as exc:
        raise OSError(f"cannot write field to {path}: {exc}") from exc
    return path


def read_field_csv(path) -> FieldProfile:
    """Inverse of :func:`write_field_csv`; the aperture is n times the pitch."""
    path = Path(path)
    try:
        rows = list(csv.reader(io.StringIO(path.read_text())))
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc}") from exc
    if not rows or [h.strip() for h in rows[0]] != FIELD_HEADER:
        raise ParseError(f"{path}:1: expected header {','.join(FIELD_HEADER)}", path, 1)
    xs, vals = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        try:
            x, re, im = (float(v) for v in row)
        except ValueError:
            raise ParseError(f"{path}:{lineno}: expected three numeric fields", path, lineno) from None
        xs.append(x)
        vals.append(complex(re, im))
    if len(xs) < 2:
        raise ParseError(f"{path}: need at least two samples", path, None)
    pitch = (xs[-1] - xs[0]) / (len(xs) - 1)
    return FieldProfile(np.array(vals), pitch * len(xs))


def append_manifest(path, section: str, entries: Mapping[str, object],
                    timestamp: datetime | None = None) -> Path:
    """Append a ``[section]`` block of ``key = value`` lines to a run manifest.

    The timestamp is the only wall-clock content and sits on its own line.
    """
    path = Path(path)
    stamp = (timestamp or datetime.now(timezone.utc)).isoformat(timespec="seconds")
    lines = [f"[{section}]", f"timestamp = {stamp}"]
    lines += [f"{k} = {v}" for k, v in entries.items()]
    try:
        with path.open("a") as fh:
            fh.write("\n".join(lines) + "\n\n")
    except OSError as exc:
        raise OSError(f"cannot append to manifest {path}: {exc}") from exc
    return path
