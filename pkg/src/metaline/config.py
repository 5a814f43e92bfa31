"""Run configuration: plain ``key = value`` files plus flag overrides."""
from __future__ import annotations

import configparser
import math
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

import numpy as np

from .errors import DomainError, GeometryError, ParseError
from .graphene import (DEFAULT_RELAXATION_TIME, DEFAULT_TEMPERATURE, Sheet,
                       angular_frequency, interband_edge)
from .synthesis import (COVERAGE_THRESHOLD, DEFAULT_GRID, DEFAULT_MU_BOUNDS, OPERATOR_KINDS,
                        NOMINAL_APERTURE, NOMINAL_DEPTH, NOMINAL_LENS_LENGTH, NOMINAL_LINE_WIDTH,
                        NOMINAL_PERIOD, NOMINAL_WAVELENGTH)
from .pipeline import DEFAULT_BPM_STEPS, DEFAULT_FILL

LENS_MODES = {"ideal": "ideal_ft", "grin": "grin_bpm"}
SOURCES = ("ideal", "synthesized")


@dataclass(frozen=True)
class RunConfig:
    """Every parameter of a run; lengths in metres, potentials in eV.

    ``mu_background=None`` solves the background doping from the
    quarter-wave spacer rule and ``depth``. ``spacing`` overrides the
    quarter-wave spacer and needs an explicit ``mu_background``.
    """

    wavelength: float = NOMINAL_WAVELENGTH
    aperture: float = NOMINAL_APERTURE
    period: float = NOMINAL_PERIOD
    line_width: float = NOMINAL_LINE_WIDTH
    depth: float = NOMINAL_DEPTH
    lens_length: float = NOMINAL_LENS_LENGTH
    temperature: float = DEFAULT_TEMPERATURE
    tau: float = DEFAULT_RELAXATION_TIME
    mu_min: float = DEFAULT_MU_BOUNDS[0]
    mu_max: float = DEFAULT_MU_BOUNDS[1]
    mu_background: float | None = None
    spacing: float | None = None
    grid: int = DEFAULT_GRID
    samples: int = 2048
    lens: str = "ideal"
    operator: str = "diff1"
    source: str = "ideal"
    fill: float = DEFAULT_FILL
    bpm_steps: int = DEFAULT_BPM_STEPS
    max_residual: float = COVERAGE_THRESHOLD
    out: str = "out"

    def __post_init__(self):
        for name in ("wavelength", "aperture", "period", "line_width", "depth", "lens_length",
                     "temperature", "tau"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive, got {getattr(self, name)!r}")
        if self.spacing is not None:
            if self.mu_background is None:
                raise DomainError("spacing override needs an explicit mu_background")
            if not self.spacing > 0:
                raise DomainError(f"spacing must be positive, got {self.spacing!r}")
        cells = self.aperture / self.period
        if abs(cells - round(cells)) > 1e-9 * cells:
            raise GeometryError(f"aperture / period = {cells:.6g} is not an integer")
        if not self.mu_min < self.mu_max:
            raise DomainError("need mu_min < mu_max")
        edge = interband_edge(angular_frequency(self.wavelength))
        if self.mu_min <= edge:
            raise DomainError(f"mu_min = {self.mu_min} eV is below the plasmon branch at this "
                              f"wavelength (needs > hbar omega / 2 = {edge:.4f} eV)")
        k = self.sheet.wavenumber(self.omega, self.mu_min)
        if not (np.real(k) > 0 and np.imag(k) >= 0):
            raise DomainError(f"no forward plasmon at mu_min = {self.mu_min} eV")
        if self.grid < 2 or self.samples < 2 or self.samples % 2 or self.bpm_steps < 1:
            raise DomainError("grid >= 2, samples even and >= 2, bpm_steps >= 1 required")
        if self.lens not in LENS_MODES:
            raise DomainError(f"lens must be one of {tuple(LENS_MODES)}")
        if self.operator not in OPERATOR_KINDS:
            raise DomainError(f"operator must be one of {OPERATOR_KINDS}")
        if self.source not in SOURCES:
            raise DomainError(f"source must be one of {SOURCES}")
        if not 0 < self.fill <= 1:
            raise DomainError("fill must lie in (0, 1]")

    @property
    def omega(self) -> float:
        return angular_frequency(self.wavelength)

    @property
    def sheet(self) -> Sheet:
        return Sheet.from_relaxation_time(self.tau, self.temperature)

    @property
    def mu_bounds(self) -> tuple:
        return (self.mu_min, self.mu_max)

    def with_overrides(self, **kwargs) -> "RunConfig":
        return replace(self, **{k: v for k, v in kwargs.items() if v is not None})

    def as_dict(self) -> dict:
        return asdict(self)


def _coerce(name: str, text: str, kind):
    text = text.strip()
    if kind is str:
        return text
    if text.lower() in ("none", ""):
        return None
    if kind is int:
        value = float(text)
        if value != int(value):
            raise ValueError(f"{name} must be an integer")
        return int(value)
    value = float(text)
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite")
    return value


_KINDS = {f.name: (int if f.type in ("int", int) else str if f.type in ("str", str) else float)
          for f in fields(RunConfig)}


def parse_config(text: str, source: str = "<config>") -> dict:
    """Parse ``key = value`` lines (``#`` comments) into typed overrides."""
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"),
                                       inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read_string("[run]\n" + text, source=source)
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        line = None if line is None else line - 1
        raise ParseError(f"{source}:{line}: {exc.message if hasattr(exc, 'message') else exc}",
                         source, line) from None
    out = {}
    lines = text.splitlines()
    for key, value in parser.items("run"):
        lineno = next((i + 1 for i, ln in enumerate(lines)
                       if ln.split("=")[0].strip() == key), None)
        if key not in _KINDS:
            raise ParseError(f"{source}:{lineno}: unknown key {key!r}", source, lineno)
        try:
            out[key] = _coerce(key, value, _KINDS[key])
        except ValueError as exc:
            raise ParseError(f"{source}:{lineno}: bad value for {key}: {exc}", source,
                             lineno) from None
    return out


def load_config(path=None, **overrides) -> RunConfig:
    """Defaults, then the file at ``path``, then non-None ``overrides``."""
    values = {}
    if path is not None:
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise OSError(f"cannot read config {path}: {exc}") from exc
        values = parse_config(text, str(path))
    values.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig(**values)
