"""Three-metaline unit cell, transmission maps and transfer-function synthesis.

The unit cell is the 1-D stack

    background | outer | spacer | inner | spacer | outer | background

with metaline width ``d`` and spacer length ``s`` (spacers carry the
background doping). Each transverse cell of the array is treated as an
independent stack, so a spatially varying transfer function H(x) is realised
by choosing (mu_in, mu_out) cell by cell from a precomputed S21 map.
"""
from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import optimize
from scipy.spatial import cKDTree

from .errors import CoverageError, DomainError, GeometryError, ParseError
from .graphene import DEFAULT_SHEET, Sheet, chemical_potential_for_wavenumber
from .scattering import (InterfaceScattering, cascade, discontinuity_coefficients,
                         matching_array, matching_matrix, propagation_array,
                         propagation_matrix, s_params, s_params_array)

NOMINAL_LINE_WIDTH = 5e-9
NOMINAL_DEPTH = 100e-9
NOMINAL_PERIOD = 18e-9
NOMINAL_APERTURE = 684e-9
NOMINAL_LENS_LENGTH = 1028e-9
NOMINAL_WAVELENGTH = 6e-6

# The plasmon branch of the Kubo model at 6 um starts near 0.124 eV (Im sigma
# changes sign there); the lower bound keeps every segment strictly plasmonic.
DEFAULT_MU_BOUNDS = (0.13, 1.0)
DEFAULT_GRID = 201
COVERAGE_THRESHOLD = 0.1
REFINE_ITERATIONS = 20
EXACT_RESIDUAL = 1e-14  # below this a match is exact up to rounding; refinement stops


class GeometryWarning(UserWarning):
    """The resolved cell does not reproduce the nominal MTA depth."""


@dataclass(frozen=True)
class UnitCellGeometry:
    line_width: float
    spacing: float
    mu_background: float
    depth: float = NOMINAL_DEPTH
    period: float = NOMINAL_PERIOD
    aperture: float = NOMINAL_APERTURE

    def __post_init__(self):
        for name in ("line_width", "spacing", "depth", "period", "aperture"):
            if not getattr(self, name) > 0:
                raise GeometryError(f"{name} must be positive")
        ratio = self.aperture / self.period
        if abs(ratio - round(ratio)) > 1e-9 * ratio:
            raise GeometryError(f"aperture/period = {ratio:.6g} is not an integer")

    @property
    def implied_depth(self) -> float:
        return 3 * self.line_width + 2 * self.spacing

    @property
    def depth_consistent(self) -> bool:
        return abs(self.implied_depth - self.depth) <= 1e-12

    @property
    def n_cells(self) -> int:
        return int(round(self.aperture / self.period))

    @property
    def segment_lengths(self) -> tuple:
        d, s = self.line_width, self.spacing
        return (d, s, d, s, d)

    def cell_centers(self) -> np.ndarray:
        return (np.arange(self.n_cells) - (self.n_cells - 1) / 2) * self.period


def resolve_geometry(omega: float, mu_background: float | None = None, *,
                     line_width: float = NOMINAL_LINE_WIDTH, spacing: float | None = None,
                     depth: float = NOMINAL_DEPTH, period: float = NOMINAL_PERIOD,
                     aperture: float = NOMINAL_APERTURE, sheet: Sheet = DEFAULT_SHEET,
                     bounds=DEFAULT_MU_BOUNDS) -> UnitCellGeometry:
    """Fill in the unit cell from the quarter-wave spacing rule.

    With ``mu_background=None`` the background doping is solved so that
    3d + 2 * lambda_GP/4 equals ``depth``. Otherwise the spacer is a quarter
    of the background guided wavelength (unless ``spacing`` is given) and a
    :class:`GeometryWarning` is issued when 3d + 2s differs from ``depth``.
    """
    if mu_background is None:
        if spacing is not None:
            raise DomainError("give mu_background when overriding the spacing")
        guided = 2.0 * (depth - 3 * line_width)
        if guided <= 0:
            raise GeometryError("depth too small for three metalines")
        mu_background = chemical_potential_for_wavenumber(2 * math.pi / guided, omega, bounds,
                                                          sheet)
    if spacing is None:
        k_bg = sheet.wavenumber(omega, mu_background)
        spacing = 0.25 * 2 * math.pi / float(np.real(k_bg))
    geom = UnitCellGeometry(line_width, spacing, float(mu_background), depth, period, aperture)
    if not geom.depth_consistent:
        warnings.warn(f"3d + 2s = {geom.implied_depth * 1e9:.3f} nm differs from the nominal "
                      f"depth {depth * 1e9:.3f} nm", GeometryWarning, stacklevel=2)
    return geom


def cell_wavenumbers(mu_in, mu_out, geom: UnitCellGeometry, omega, sheet=DEFAULT_SHEET):
    k_bg, k_in, k_out = (complex(sheet.wavenumber(omega, mu))
                         for mu in (geom.mu_background, mu_in, mu_out))
    return [k_bg, k_out, k_bg, k_in, k_bg, k_out, k_bg]


def cell_transfer(mu_in, mu_out, geom: UnitCellGeometry, omega, sheet=DEFAULT_SHEET):
    """T = M0 P1 M1 ... P5 M5 for one unit cell."""
    ks = cell_wavenumbers(mu_in, mu_out, geom, omega, sheet)
    elements = [matching_matrix(discontinuity_coefficients(ks[0], ks[1]))]
    for m, length in enumerate(geom.segment_lengths, start=1):
        elements.append(propagation_matrix(ks[m], length))
        elements.append(matching_matrix(discontinuity_coefficients(ks[m], ks[m + 1])))
    return cascade(elements)


def cell_sparams(mu_in, mu_out, geom, omega, sheet=DEFAULT_SHEET):
    return s_params(cell_transfer(mu_in, mu_out, geom, omega, sheet))


def cell_s21(mu_in: float, mu_out: float, geom: UnitCellGeometry, omega: float,
             sheet: Sheet = DEFAULT_SHEET) -> complex:
    return cell_sparams(mu_in, mu_out, geom, omega, sheet).s21


def _interface_arrays(ifaces: Sequence[InterfaceScattering]):
    return matching_array([i.r_lr for i in ifaces], [i.t_lr for i in ifaces],
                          [i.r_rl for i in ifaces], [i.t_rl for i in ifaces])


def _line_blocks(k_line, k_bg, width, spacing, trailing_spacer):
    """M(bg->line) P(line) M(line->bg) [P(spacer)] for an array of line wavenumbers."""
    into = _interface_arrays([discontinuity_coefficients(k_bg, k) for k in k_line])
    out_of = _interface_arrays([discontinuity_coefficients(k, k_bg) for k in k_line])
    block = into @ propagation_array(k_line, width) @ out_of
    if trailing_spacer:
        block = block @ propagation_array(k_bg, spacing)
    return block


def cell_transfer_grid(mu_in, mu_out, geom, omega, sheet=DEFAULT_SHEET):
    """Transfer matrices of all (mu_in[i], mu_out[j]) cells, shape (n_in, n_out, 2, 2)."""
    mu_in = np.atleast_1d(np.asarray(mu_in, dtype=float))
    mu_out = np.atleast_1d(np.asarray(mu_out, dtype=float))
    k_bg = complex(sheet.wavenumber(omega, geom.mu_background))
    k_in = np.asarray(sheet.wavenumber(omega, mu_in), dtype=complex)
    k_out = np.asarray(sheet.wavenumber(omega, mu_out), dtype=complex)
    d, s = geom.line_width, geom.spacing
    first = _line_blocks(k_out, k_bg, d, s, True)
    middle = _line_blocks(k_in, k_bg, d, s, True)
    last = _line_blocks(k_out, k_bg, d, s, False)
    return first[None, :] @ middle[:, None] @ last[None, :]


@dataclass(frozen=True, eq=False)
class TransmissionMap:
    """S21 over a rectangular (mu_in, mu_out) grid; ``s21[i, j]`` at (mu_in[i], mu_out[j])."""

    mu_in: np.ndarray
    mu_out: np.ndarray
    s21: np.ndarray

    def __post_init__(self):
        mu_in = np.asarray(self.mu_in, dtype=float)
        mu_out = np.asarray(self.mu_out, dtype=float)
        s21 = np.asarray(self.s21, dtype=complex)
        for name, g in (("mu_in", mu_in), ("mu_out", mu_out)):
            if g.ndim != 1 or g.size < 1 or np.any(np.diff(g) <= 0):
                raise DomainError(f"{name} grid must be one-dimensional and strictly increasing")
        if s21.shape != (mu_in.size, mu_out.size):
            raise DomainError(f"S21 shape {s21.shape} does not match grid "
                              f"({mu_in.size}, {mu_out.size})")
        for name, v in (("mu_in", mu_in), ("mu_out", mu_out), ("s21", s21)):
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    @property
    def bounds(self):
        return ((self.mu_in[0], self.mu_in[-1]), (self.mu_out[0], self.mu_out[-1]))

    def unwrapped_phase(self) -> np.ndarray:
        """Phase unwrapped down the first column, then along every row from it."""
        ph = np.angle(self.s21)
        rows = np.unwrap(ph, axis=1)
        anchor = np.unwrap(ph[:, 0])
        return rows + (anchor - rows[:, 0])[:, None]

    def coverage(self) -> dict:
        amp = np.abs(self.s21)
        u = self.unwrapped_phase()
        return {"phase_span_rad": float(u.max() - u.min()),
                "phase_span_deg": float(np.degrees(u.max() - u.min())),
                "amplitude_min": float(amp.min()),
                "amplitude_max": float(amp.max())}


def mu_grid(lo=DEFAULT_MU_BOUNDS[0], hi=DEFAULT_MU_BOUNDS[1], n=DEFAULT_GRID) -> np.ndarray:
    if n < 1:
        raise DomainError("grid needs at least one point")
    if n == 1:
        return np.array([float(lo)])
    return np.linspace(lo, hi, n)


def sweep_map(mu_in, mu_out, geom: UnitCellGeometry, omega: float,
              sheet: Sheet = DEFAULT_SHEET) -> TransmissionMap:
    """Evaluate S21 of every cell on the (mu_in, mu_out) grid."""
    T = cell_transfer_grid(mu_in, mu_out, geom, omega, sheet)
    _, s21, _, _ = s_params_array(T)
    return TransmissionMap(np.asarray(mu_in, dtype=float), np.asarray(mu_out, dtype=float), s21)


MAP_HEADER = ["mu_in_eV", "mu_out_eV", "re_S21", "im_S21"]


def _fmt(v: float) -> str:
    return repr(float(v))


def write_map_csv(path, tmap: TransmissionMap) -> Path:
    path = Path(path)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(MAP_HEADER)
    for i, a in enumerate(tmap.mu_in):
        for j, b in enumerate(tmap.mu_out):
            s = tmap.s21[i, j]
            w.writerow([_fmt(a), _fmt(b), _fmt(s.real), _fmt(s.imag)])
    try:
        path.write_text(buf.getvalue())
    except OSError as exc:
        raise OSError(f"cannot write transmission map to {path}: {exc}") from exc
    return path


def _read_rows(path, header):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc}") from exc
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or [h.strip() for h in rows[0]] != header:
        raise ParseError(f"{path}:1: expected header {','.join(header)}", path, 1)
    out = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise ParseError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}",
                             path, lineno)
        try:
            out.append((lineno, [float(v) for v in row]))
        except ValueError:
            raise ParseError(f"{path}:{lineno}: non-numeric field in {row!r}", path, lineno) from None
    return out


def read_map_csv(path) -> TransmissionMap:
    rows = _read_rows(path, MAP_HEADER)
    if not rows:
        raise ParseError(f"{path}: no data rows", path, 2)
    mu_in = sorted({r[0] for _, r in rows})
    mu_out = sorted({r[1] for _, r in rows})
    pos_in = {v: i for i, v in enumerate(mu_in)}
    pos_out = {v: j for j, v in enumerate(mu_out)}
    s21 = np.full((len(mu_in), len(mu_out)), np.nan + 0j)
    for lineno, (a, b, re, im) in rows:
        i, j = pos_in[a], pos_out[b]
        if not np.isnan(s21[i, j].real):
            raise ParseError(f"{path}:{lineno}: duplicate grid point ({a}, {b})", path, lineno)
        s21[i, j] = complex(re, im)
    if np.isnan(s21.real).any():
        raise ParseError(f"{path}: grid is incomplete ({len(rows)} rows for "
                         f"{len(mu_in)}x{len(mu_out)} points)", path, None)
    return TransmissionMap(np.array(mu_in), np.array(mu_out), s21)


OPERATOR_KINDS = ("diff1", "diff2", "int2")


@dataclass(frozen=True)
class TransferFunctionSpec:
    """Normalised target transfer function H(x) across the aperture.

    diff1: i x / (W/2); diff2: -(x / (W/2))^2; int2: 1 inside the plateau
    |x| < h and (i x / h)^-2 = -(h/x)^2 outside, so |H| is continuous at h.
    """

    kind: str
    aperture: float = NOMINAL_APERTURE
    plateau: float | None = None

    def __post_init__(self):
        if self.kind not in OPERATOR_KINDS:
            raise DomainError(f"unknown operator kind {self.kind!r}; expected one of {OPERATOR_KINDS}")
        if self.kind == "int2" and self.plateau is None:
            object.__setattr__(self, "plateau", self.aperture / 12)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        u = x / (self.aperture / 2)
        if self.kind == "diff1":
            return 1j * u
        if self.kind == "diff2":
            return -(u**2) + 0j
        h = self.plateau
        with np.errstate(divide="ignore"):
            outer = -(h / x) ** 2 + 0j
        return np.where(np.abs(x) < h, 1.0 + 0j, outer)


def sample_target(spec: TransferFunctionSpec, n_cells: int):
    """Cell-centre positions and target values for ``n_cells`` equal cells."""
    if n_cells < 1:
        raise DomainError("need at least one cell")
    pitch = spec.aperture / n_cells
    x = (np.arange(n_cells) - (n_cells - 1) / 2) * pitch  # exactly antisymmetric
    return x, spec(x)


@dataclass(frozen=True)
class CellDesign:
    index: int
    x: float
    mu_in: float
    mu_out: float
    target: complex
    s21: complex
    residual: float
    reference: complex = 1.0 + 0j
    seed_residual: float = field(default=math.nan, compare=False)

    @property
    def normalized_s21(self) -> complex:
        return self.s21 / self.reference

    @property
    def normalized_target(self) -> complex:
        return self.target / self.reference


def _map_tree(tmap: TransmissionMap):
    flat = tmap.s21.ravel()
    return cKDTree(np.column_stack([flat.real, flat.imag])), flat


def fit_reference(targets, tmap: TransmissionMap, amplitudes=None, phases_deg=None) -> complex:
    """Global complex factor c (|c| <= 1) under which c*H is best covered by the map.

    Targets are only specified up to proportionality, so the synthesis may aim
    at c*H. The score is the mean squared nearest-neighbour distance divided
    by |c|^2, i.e. the error measured in units of the normalised H.
    """
    targets = np.asarray(targets, dtype=complex)
    if amplitudes is None:
        amplitudes = np.round(np.arange(1.0, 0.295, -0.02), 10)
    if phases_deg is None:
        phases_deg = np.arange(0.0, 360.0, 1.0)
    tree, _ = _map_tree(tmap)
    refs = (np.asarray(amplitudes)[:, None] * np.exp(1j * np.radians(phases_deg))[None, :]).ravel()
    pts = refs[:, None] * targets[None, :]
    dist, _ = tree.query(np.column_stack([pts.real.ravel(), pts.imag.ravel()]))
    score = (dist.reshape(pts.shape) ** 2).mean(axis=1) / np.abs(refs) ** 2
    return complex(refs[int(np.argmin(score))])


def _pattern_search(target, mu_in, mu_out, step_in, step_out, bounds, evaluate, iterations):
    s = evaluate(mu_in, mu_out)
    best = abs(s - target)
    (lo_in, hi_in), (lo_out, hi_out) = bounds
    for _ in range(iterations):
        if best <= EXACT_RESIDUAL:
            break
        moved = False
        candidates = [(mu_in + step_in, mu_out), (mu_in - step_in, mu_out),
                      (mu_in, mu_out + step_out), (mu_in, mu_out - step_out)]
        for a, b in candidates:
            a = min(max(a, lo_in), hi_in)
            b = min(max(b, lo_out), hi_out)
            if (a, b) == (mu_in, mu_out):
                continue
            sc = evaluate(a, b)
            r = abs(sc - target)
            if r < best:
                best, s, mu_in, mu_out, moved = r, sc, a, b, True
        if not moved:
            step_in *= 0.5
            step_out *= 0.5
    return mu_in, mu_out, s, best


def _least_squares_polish(target, mu_in, mu_out, s, best, bounds, evaluate):
    """Trust-region least squares on (Re, Im) of S21 - target within the map bounds.

    The result is kept only if it lowers the residual, so the polish cannot
    undo the pattern search. Trust-region steps cope with the rank-deficient
    Jacobian at fold points such as the uniform sheet.
    """
    if best <= EXACT_RESIDUAL:
        return mu_in, mu_out, s, best
    (lo_in, hi_in), (lo_out, hi_out) = bounds

    def fun(p):
        r = evaluate(p[0], p[1]) - target
        return [r.real, r.imag]

    x0 = [min(max(mu_in, lo_in), hi_in), min(max(mu_out, lo_out), hi_out)]
    sol = optimize.least_squares(fun, x0, bounds=([lo_in, lo_out], [hi_in, hi_out]),
                                 method="trf", xtol=1e-15, ftol=1e-15, gtol=1e-15,
                                 x_scale=[0.01, 0.01], max_nfev=200)
    a, b = (float(v) for v in sol.x)
    sc = evaluate(a, b)
    r = abs(sc - target)
    if r < best:
        return a, b, sc, r
    return mu_in, mu_out, s, best


def synthesize(targets, tmap: TransmissionMap, geom: UnitCellGeometry, omega: float, *,
               x=None, reference: complex = 1.0, max_residual: float = COVERAGE_THRESHOLD,
               iterations: int = REFINE_ITERATIONS, strict: bool = True,
               sheet: Sheet = DEFAULT_SHEET) -> list[CellDesign]:
    """Choose (mu_in, mu_out) per cell so that S21 approaches ``reference * targets``.

    Each cell starts from the map entry nearest in the complex plane and is
    refined by a compass pattern search on direct cell evaluations (step
    halves when no neighbour improves), then by a guarded least-squares polish.
    Refinement never increases the residual |S21 - reference * H|.

    Raises
    ------
    CoverageError
        If ``strict`` and some cell's final residual exceeds ``max_residual``.
    """
    targets = np.atleast_1d(np.asarray(targets, dtype=complex))
    reference = complex(reference)
    if reference == 0:
        raise DomainError("reference factor must be nonzero")
    if x is None:
        x = np.full(targets.size, np.nan)
    tree, flat = _map_tree(tmap)
    n_out = tmap.mu_out.size
    step_in = float(np.diff(tmap.mu_in).mean()) if tmap.mu_in.size > 1 else 0.0
    step_out = float(np.diff(tmap.mu_out).mean()) if tmap.mu_out.size > 1 else 0.0
    aims = reference * targets
    _, seeds = tree.query(np.column_stack([aims.real, aims.imag]))

    def evaluate(a, b):
        return cell_s21(a, b, geom, omega, sheet)

    designs = []
    for j, (aim, seed) in enumerate(zip(aims, seeds)):
        i_in, i_out = divmod(int(seed), n_out)
        mu_in, mu_out = float(tmap.mu_in[i_in]), float(tmap.mu_out[i_out])
        seed_residual = abs(flat[seed] - aim)
        mu_in, mu_out, s, res = _pattern_search(aim, mu_in, mu_out, step_in, step_out,
                                                tmap.bounds, evaluate, iterations)
        mu_in, mu_out, s, res = _least_squares_polish(aim, mu_in, mu_out, s, res, tmap.bounds,
                                                      evaluate)
        design = CellDesign(j, float(x[j]), mu_in, mu_out, complex(aim), complex(s), float(res),
                            reference, float(seed_residual))
        if strict and res > max_residual:
            raise CoverageError(f"cell {j} (x = {x[j]:.4g} m): target {aim:.4f} unreachable, "
                                f"best residual {res:.4f} > {max_residual}", j, res)
        designs.append(design)
    return designs


def design_operator(spec: TransferFunctionSpec, tmap: TransmissionMap, geom: UnitCellGeometry,
                    omega: float, *, reference: complex | None = None, strict: bool = True,
                    max_residual: float = COVERAGE_THRESHOLD, sheet: Sheet = DEFAULT_SHEET):
    """Sample ``spec`` on the cell centres, pick a reference factor and synthesise."""
    x, H = sample_target(spec, geom.n_cells)
    if reference is None:
        reference = fit_reference(H, tmap)
    return synthesize(H, tmap, geom, omega, x=x, reference=reference, strict=strict,
                      max_residual=max_residual, sheet=sheet)


DESIGN_HEADER = ["cell_index", "x_m", "mu_in_eV", "mu_out_eV", "re_H", "im_H",
                 "re_S21", "im_S21", "residual", "re_ref", "im_ref"]


def write_designs_csv(path, designs: Sequence[CellDesign]) -> Path:
    """Write designs; H columns hold the aimed value reference * H, ref columns the factor."""
    path = Path(path)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(DESIGN_HEADER)
    for d in designs:
        w.writerow([d.index, _fmt(d.x), _fmt(d.mu_in), _fmt(d.mu_out), _fmt(d.target.real),
                    _fmt(d.target.imag), _fmt(d.s21.real), _fmt(d.s21.imag), _fmt(d.residual),
                    _fmt(d.reference.real), _fmt(d.reference.imag)])
    try:
        path.write_text(buf.getvalue())
    except OSError as exc:
        raise OSError(f"cannot write designs to {path}: {exc}") from exc
    return path


def read_designs_csv(path) -> list[CellDesign]:
    designs = []
    for lineno, r in _read_rows(path, DESIGN_HEADER):
        if r[0] != int(r[0]):
            raise ParseError(f"{path}:{lineno}: cell_index must be an integer", path, lineno)
        designs.append(CellDesign(int(r[0]), r[1], r[2], r[3], complex(r[4], r[5]),
                                  complex(r[6], r[7]), r[8], complex(r[9], r[10])))
    return designs
