"""Acceptance criteria as plain functions shared by ``metaline validate`` and pytest.

Each criterion returns a :class:`CriterionResult`; numeric failures inside a
criterion are caught and reported as a failed result rather than raised.
"""
from __future__ import annotations

import math
import tempfile
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import LENS_MODES, RunConfig
from .errors import MetalineError, NotFoundError
from .graphene import angular_frequency, drude_conductivity, surface_conductivity
from .oracles import boundary_matching_s21, kubo_mp
from .pipeline import (LensModel, centered_dft, compare, deviation_report, grin_propagate,
                       lens_transform, make_input_sinc, run_operator, write_field_csv)
from .scattering import discontinuity_coefficients, s_params_array, stack_s_params
from .synthesis import (GeometryWarning, TransferFunctionSpec, cell_transfer_grid,
                        design_operator, mu_grid, read_map_csv, resolve_geometry, sweep_map,
                        write_designs_csv, write_map_csv)

SEED = 20240611


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    metrics: dict = field(default_factory=dict)
    elapsed: float = 0.0
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        shown = ", ".join(f"{k}={_short(v)}" for k, v in self.metrics.items())
        extra = f" ({self.detail})" if self.detail else ""
        return f"[{status}] {self.number}. {self.name}: {shown}; {self.elapsed:.2f} s{extra}"


def _short(v):
    if isinstance(v, bool):
        return str(v)
    if isinstance(v, float):
        return f"{v:.4g}"
    return str(v)


def _timed(number, name, limit=None):
    def wrap(fn):
        def run(*args, **kwargs):
            t0 = time.perf_counter()
            try:
                passed, metrics = fn(*args, **kwargs)
                detail = ""
            except MetalineError as exc:
                passed, metrics, detail = False, {}, f"{type(exc).__name__}: {exc}"
            elapsed = time.perf_counter() - t0
            if limit is not None:
                metrics["limit_s"] = float(limit)
                if elapsed > limit:
                    passed = False
                    detail = (detail + "; " if detail else "") + f"exceeded {limit} s"
            return CriterionResult(number, name, bool(passed), metrics, elapsed, detail)
        run.__name__ = fn.__name__
        run.__doc__ = fn.__doc__
        return run
    return wrap


@_timed(1, "discontinuity identities", limit=5)
def criterion_1(config: RunConfig | None = None, n_ratios: int = 10_000):
    """Equal wavenumbers, extreme contrast, and unitarity for real wavenumbers."""
    same = discontinuity_coefficients(3.7e7, 3.7e7)
    equal_err = max(abs(same.r_lr), abs(same.t_lr - 1), abs(same.theta_lr))
    theta_err = abs(discontinuity_coefficients(1e6, 1.0).theta_lr + math.pi / 4)
    rng = np.random.default_rng(SEED + 1)
    ratios = 10 ** rng.uniform(-4, 4, n_ratios)
    unit_err = 0.0
    for r in ratios:
        c = discontinuity_coefficients(float(r) * 1e7, 1e7)
        unit_err = max(unit_err, abs(abs(c.r_lr) ** 2 + abs(c.t_lr) ** 2 - 1),
                       abs(abs(c.r_rl) ** 2 + abs(c.t_rl) ** 2 - 1))
    ok = equal_err <= 1e-12 and theta_err <= 1e-5 and unit_err <= 1e-12
    return ok, {"equal_err": equal_err, "contrast_theta_err": theta_err, "unitarity_err": unit_err}


def _coefficients(kl, kr):
    c = discontinuity_coefficients(kl, kr)
    return c.r_lr, c.t_lr, c.r_rl, c.t_rl


@_timed(2, "cascade vs boundary-matching solve", limit=30)
def criterion_2(config: RunConfig | None = None, n_cases: int = 1000):
    """Random 2-6 interface stacks: transfer-matrix S21 vs a direct linear solve."""
    rng = np.random.default_rng(SEED + 2)
    worst = 0.0
    for _ in range(n_cases):
        n_if = int(rng.integers(2, 7))
        k = 10 ** rng.uniform(7, 8.5, n_if + 1) * (1 + 1j * rng.uniform(0, 0.2, n_if + 1))
        lengths = rng.uniform(1e-9, 150e-9, n_if - 1)
        s21 = stack_s_params(k, lengths).s21
        _, ref = boundary_matching_s21(k, lengths, _coefficients)
        worst = max(worst, abs(s21 - ref) / abs(ref))
    return worst <= 1e-9, {"max_rel_err": worst, "cases": n_cases}


@_timed(3, "Kubo conductivity vs arbitrary precision")
def criterion_3(config: RunConfig | None = None, n_points: int = 100):
    """Double-precision Kubo formula vs mpmath; Drude limit in the far infrared."""
    rng = np.random.default_rng(SEED + 3)
    worst = 0.0
    for _ in range(n_points):
        omega = angular_frequency(10 ** rng.uniform(math.log10(2e-6), math.log10(200e-6)))
        mu = rng.uniform(-1.0, 1.0)
        T = rng.uniform(4.0, 600.0)
        gamma = 10 ** rng.uniform(10, 13.5)
        got = surface_conductivity(omega, mu, T, gamma)
        ref = kubo_mp(omega, mu, T, gamma)
        worst = max(worst, abs(got - ref) / abs(ref))
    omega = angular_frequency(60e-6)
    full = surface_conductivity(omega, 0.5, 300.0, 5e11)
    drude = complex(drude_conductivity(omega, 0.5, 5e11))
    drude_err = abs(full - drude) / abs(full)
    ok = worst <= 1e-10 and drude_err <= 0.02
    return ok, {"max_rel_err": worst, "drude_rel_err": drude_err}


def geometry_for(config: RunConfig):
    """Unit cell for ``config`` and whether the fallback was needed.

    If no background doping in the bounds gives a quarter-wave spacer for the
    nominal depth (very lossy sheets), fall back to mu_max with the spacer
    fixed at (depth - 3d)/2 so the cell keeps its physical size.
    """
    kwargs = dict(line_width=config.line_width, depth=config.depth, period=config.period,
                  aperture=config.aperture, sheet=config.sheet)
    try:
        return resolve_geometry(config.omega, config.mu_background, spacing=config.spacing,
                                bounds=config.mu_bounds, **kwargs), False
    except NotFoundError:
        spacing = (config.depth - 3 * config.line_width) / 2
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", GeometryWarning)
            return resolve_geometry(config.omega, config.mu_max, spacing=spacing,
                                    **kwargs), True


def _map(config: RunConfig):
    geom, fallback = geometry_for(config)
    grid = mu_grid(config.mu_min, config.mu_max, config.grid)
    return sweep_map(grid, grid, geom, config.omega, config.sheet), geom, fallback


@_timed(4, "transmission map coverage", limit=300)
def criterion_4(config: RunConfig | None = None):
    """Default sweep spans a full phase turn and amplitudes <= 0.1 and >= 0.9."""
    config = config or RunConfig()
    tmap, _, fallback = _map(config)
    cov = tmap.coverage()
    passive = float(np.abs(tmap.s21).max())
    ok = (cov["phase_span_rad"] >= 2 * math.pi and cov["amplitude_min"] <= 0.1
          and cov["amplitude_max"] >= 0.9)
    return ok, {"phase_span_deg": cov["phase_span_deg"], "amp_min": cov["amplitude_min"],
                "amp_max": cov["amplitude_max"], "max_abs_s21": passive,
                "fallback_geometry": fallback}


@_timed(5, "diff1 synthesis deviation")
def criterion_5(config: RunConfig | None = None):
    """Std of amplitude and phase deviation over the cells: <= 0.04 and <= 6 deg."""
    config = config or RunConfig()
    tmap, geom, fallback = _map(config)
    designs = design_operator(TransferFunctionSpec("diff1", config.aperture), tmap, geom,
                              config.omega, strict=False, max_residual=config.max_residual,
                              sheet=config.sheet)
    stats = deviation_report(designs)
    ok = stats.amplitude_std <= 0.04 and stats.phase_std_deg <= 6.0
    return ok, {"amp_std": stats.amplitude_std, "phase_std_deg": stats.phase_std_deg,
                "max_residual": stats.max_residual, "cells": stats.n_cells,
                "fallback_geometry": fallback}


def _operator_run(kind, config: RunConfig):
    f = make_input_sinc(config.samples, config.aperture)
    lens = LensModel.matched(aperture=config.aperture, fill=config.fill,
                             length=config.lens_length, wavelength=config.wavelength)
    return run_operator(TransferFunctionSpec(kind, config.aperture), f, lens)


def _criterion_6_kind(kind):
    @_timed(6, f"{kind} ideal operator accuracy", limit=10)
    def run(config: RunConfig | None = None):
        config = (config or RunConfig()).with_overrides(samples=2048)
        r = _operator_run(kind, config)
        return r.nrms <= 0.05, {"nrms": r.nrms, "correlation": r.correlation}
    return run


criterion_6_diff1 = _criterion_6_kind("diff1")
criterion_6_diff2 = _criterion_6_kind("diff2")
criterion_6_int2 = _criterion_6_kind("int2")


@_timed(7, "mirror and Parseval", limit=5)
def criterion_7(config: RunConfig | None = None, n_cases: int = 1000):
    """FT twice reverses the samples; one FT preserves the energy."""
    rng = np.random.default_rng(SEED + 7)
    mirror_err = energy_err = 0.0
    for _ in range(n_cases):
        n = 2 * int(rng.integers(1, 513))
        f = rng.normal(size=n) + 1j * rng.normal(size=n)
        F = centered_dft(f)
        mirror_err = max(mirror_err, np.abs(centered_dft(F) - f[::-1]).max() / np.abs(f).max())
        e = np.vdot(f, f).real
        energy_err = max(energy_err, abs(np.vdot(F, F).real - e) / e)
    ok = mirror_err <= 1e-10 and energy_err <= 1e-12
    return ok, {"mirror_err": mirror_err, "energy_err": energy_err}


@_timed(8, "graded-index lens vs ideal Fourier transform")
def criterion_8(config: RunConfig | None = None):
    """Quarter-pitch propagation reproduces the ideal FT; lossless energy balance."""
    config = (config or RunConfig()).with_overrides(samples=2048)
    f = make_input_sinc(config.samples, config.aperture)
    kwargs = dict(aperture=config.aperture, fill=config.fill, length=config.lens_length,
                  wavelength=config.wavelength, steps=config.bpm_steps)
    ideal = lens_transform(f, LensModel.matched(**kwargs)).cropped(f.n)
    grin = lens_transform(f, LensModel.matched(mode="grin_bpm", **kwargs))
    _, _, corr = compare(grin.samples, ideal.samples)
    lossless = grin_propagate(f, LensModel.matched(mode="grin_bpm", absorber=0.0, **kwargs))
    energy_err = abs(lossless.energy() / f.energy() - 1)
    ok = corr >= 0.98 and energy_err <= 1e-6
    return ok, {"correlation": corr, "energy_err": energy_err}


def synthesized_run(config: RunConfig, out_dir):
    """diff1 through synthesised cells; writes map, design and output CSVs."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    tmap, geom, _ = _map(config)
    spec = TransferFunctionSpec("diff1", config.aperture)
    designs = design_operator(spec, tmap, geom, config.omega, strict=False,
                              max_residual=config.max_residual, sheet=config.sheet)
    f = make_input_sinc(config.samples, config.aperture)
    lens = LensModel.matched(mode=LENS_MODES[config.lens], aperture=config.aperture,
                             fill=config.fill, length=config.lens_length,
                             wavelength=config.wavelength, steps=config.bpm_steps)
    result = run_operator(spec, f, lens, designs=designs)
    paths = [write_map_csv(out_dir / "map.csv", tmap),
             write_designs_csv(out_dir / "designs.csv", designs),
             write_field_csv(out_dir / "output.csv", result.output)]
    return result, paths


@_timed(9, "end-to-end synthesized diff1")
def criterion_9(config: RunConfig | None = None):
    """Synthesised diff1 within 0.12 normalised RMS, byte-identical on rerun."""
    config = config or RunConfig()
    with tempfile.TemporaryDirectory() as tmp:
        r1, p1 = synthesized_run(config, Path(tmp) / "a")
        _, p2 = synthesized_run(config, Path(tmp) / "b")
        identical = all(a.read_bytes() == b.read_bytes() for a, b in zip(p1, p2))
    return r1.nrms <= 0.12 and identical, {"nrms": r1.nrms, "correlation": r1.correlation,
                                           "byte_identical": identical}


@_timed(0, "passivity of sheet and unit cells")
def passivity_check(config: RunConfig | None = None, n: int = 61):
    """Re sigma >= 0 and |S11|^2 + |S21|^2 <= 1 (both ports) over the doping grid.

    Supplementary to the numbered criteria; it must hold for any loss level.
    """
    config = config or RunConfig()
    geom, fallback = geometry_for(config)
    grid = mu_grid(config.mu_min, config.mu_max, n)
    re_sigma = float(np.real(config.sheet.conductivity(config.omega, grid)).min())
    s11, s21, s12, s22 = s_params_array(cell_transfer_grid(grid, grid, geom, config.omega,
                                                           config.sheet))
    power = float(max((abs(s11) ** 2 + abs(s21) ** 2).max(), (abs(s22) ** 2 + abs(s12) ** 2).max()))
    ok = re_sigma >= 0 and power <= 1 + 1e-9
    return ok, {"min_re_sigma": re_sigma, "max_port_power": power, "fallback_geometry": fallback}


@_timed(0, "stored map matches a fresh sweep")
def stored_map_check(config: RunConfig | None, path):
    """A map CSV parses cleanly and agrees with recomputed S21 on its own grid."""
    config = config or RunConfig()
    tmap = read_map_csv(path)
    geom, _ = geometry_for(config)
    fresh = sweep_map(tmap.mu_in, tmap.mu_out, geom, config.omega, config.sheet)
    err = float(np.abs(fresh.s21 - tmap.s21).max())
    return err <= 1e-12, {"max_abs_err": err, "points": int(tmap.s21.size)}


CRITERIA = (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6_diff1, criterion_6_diff2, criterion_6_int2, criterion_7,
            criterion_8, criterion_9)


def run_all(config: RunConfig | None = None, criteria=CRITERIA):
    return [c(config) for c in criteria]
