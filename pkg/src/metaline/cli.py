"""Command-line front end: ``metaline {sweep,design,simulate,validate}``.

Exit codes: 0 success, 1 validation failure, 2 usage or configuration
error, 3 numeric, coverage or I/O error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import acceptance
from .config import LENS_MODES, SOURCES, RunConfig, load_config
from .errors import CoverageError, DomainError, GeometryError, MetalineError, ParseError
from .pipeline import (LensModel, FieldProfile, append_manifest, deviation_report,
                       make_input_sinc, run_operator, write_field_csv)
from .synthesis import (OPERATOR_KINDS, TransferFunctionSpec, design_operator, read_designs_csv,
                        read_map_csv, write_designs_csv, write_map_csv)

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="key = value file; flags override it")
    common.add_argument("--operator", choices=OPERATOR_KINDS)
    common.add_argument("--lens", choices=tuple(LENS_MODES))
    common.add_argument("--source", choices=SOURCES)
    common.add_argument("--grid", type=int, help="points per chemical-potential axis")
    common.add_argument("--samples", type=int, help="field samples across the aperture")
    common.add_argument("--out", type=Path, help="output directory")
    common.add_argument("--map", type=Path, dest="map_path",
                        help="read this transmission map instead of sweeping")
    p = argparse.ArgumentParser(prog="metaline", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("sweep", parents=[common], help="build the (mu_in, mu_out) S21 map")
    sub.add_parser("design", parents=[common], help="synthesise a per-cell doping profile")
    sub.add_parser("simulate", parents=[common], help="run lens / transfer / lens")
    sub.add_parser("validate", parents=[common], help="run the acceptance criteria")
    return p


def _config(args) -> RunConfig:
    overrides = {k: getattr(args, k) for k in ("operator", "lens", "source", "grid", "samples")}
    overrides["out"] = None if args.out is None else str(args.out)
    return load_config(args.config, **overrides)


def _out_dir(config: RunConfig) -> Path:
    out = Path(config.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    return out


def _write_text(path: Path, text: str) -> Path:
    try:
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def _load_map(config: RunConfig, map_path):
    geom, fallback = acceptance.geometry_for(config)
    if fallback:
        print(f"warning: no background doping gives a quarter-wave spacer for depth "
              f"{config.depth:g} m; using mu_background = {geom.mu_background} eV",
              file=sys.stderr)
    if map_path is not None:
        return read_map_csv(map_path), geom
    tmap, geom, _ = acceptance._map(config)
    return tmap, geom


def _coverage_text(tmap, geom) -> str:
    cov = tmap.coverage()
    lines = [f"grid = {tmap.mu_in.size} x {tmap.mu_out.size}",
             f"mu_in_range_eV = {float(tmap.mu_in[0])!r} {float(tmap.mu_in[-1])!r}",
             f"mu_out_range_eV = {float(tmap.mu_out[0])!r} {float(tmap.mu_out[-1])!r}",
             f"mu_background_eV = {geom.mu_background!r}",
             f"spacing_m = {geom.spacing!r}",
             f"phase_span_deg = {cov['phase_span_deg']:.6f}",
             f"amplitude_min = {cov['amplitude_min']:.6f}",
             f"amplitude_max = {cov['amplitude_max']:.6f}"]
    return "\n".join(lines) + "\n"


def _map_dat(tmap) -> str:
    """gnuplot ``splot`` blocks: mu_in mu_out |S21| unwrapped_phase_deg."""
    phase = np.degrees(tmap.unwrapped_phase())
    blocks = []
    for i, a in enumerate(tmap.mu_in):
        rows = [f"{float(a)!r} {float(b)!r} {float(abs(tmap.s21[i, j]))!r} {float(phase[i, j])!r}"
                for j, b in enumerate(tmap.mu_out)]
        blocks.append("\n".join(rows))
    return "# mu_in_eV mu_out_eV abs_S21 phase_deg\n" + "\n\n".join(blocks) + "\n"


def cmd_sweep(config: RunConfig, map_path=None) -> int:
    out = _out_dir(config)
    tmap, geom = _load_map(config, map_path)
    write_map_csv(out / "map.csv", tmap)
    _write_text(out / "map.dat", _map_dat(tmap))
    summary = _coverage_text(tmap, geom)
    _write_text(out / "coverage.txt", summary)
    print(summary, end="")
    return EXIT_OK


def _deviation_text(spec, designs, max_residual) -> str:
    stats = deviation_report(designs)
    ref = designs[0].reference
    lines = [f"operator = {spec.kind}",
             f"cells = {stats.n_cells}",
             f"reference = {ref.real!r} {ref.imag!r}",
             f"amplitude_std = {stats.amplitude_std:.6f}",
             f"phase_std_deg = {stats.phase_std_deg:.6f}",
             f"phase_cells = {stats.n_phase_cells}",
             f"max_residual = {stats.max_residual:.6f}",
             f"residual_threshold = {max_residual}"]
    return "\n".join(lines) + "\n"


def _profile_dat(designs) -> str:
    rows = ["# x_m mu_in_eV mu_out_eV abs_S21n phase_S21n_deg abs_Hn phase_Hn_deg"]
    for d in designs:
        s, h = d.normalized_s21, d.normalized_target
        rows.append(f"{d.x!r} {d.mu_in!r} {d.mu_out!r} {abs(s)!r} {float(np.degrees(np.angle(s)))!r} "
                    f"{abs(h)!r} {float(np.degrees(np.angle(h)))!r}")
    return "\n".join(rows) + "\n"


def _design(config: RunConfig, map_path=None):
    tmap, geom = _load_map(config, map_path)
    spec = TransferFunctionSpec(config.operator, config.aperture)
    designs = design_operator(spec, tmap, geom, config.omega, strict=False,
                              max_residual=config.max_residual, sheet=config.sheet)
    return spec, designs


def cmd_design(config: RunConfig, map_path=None) -> int:
    out = _out_dir(config)
    spec, designs = _design(config, map_path)
    write_designs_csv(out / f"designs_{spec.kind}.csv", designs)
    _write_text(out / f"profile_{spec.kind}.dat", _profile_dat(designs))
    report = _deviation_text(spec, designs, config.max_residual)
    _write_text(out / f"deviation_{spec.kind}.txt", report)
    print(report, end="")
    worst = max(designs, key=lambda d: d.residual)
    if worst.residual > config.max_residual:
        raise CoverageError(f"cell {worst.index} (x = {worst.x:.4g} m) unreachable: residual "
                            f"{worst.residual:.4f} > {config.max_residual}; profile written "
                            f"anyway", worst.index, worst.residual)
    return EXIT_OK


def cmd_simulate(config: RunConfig, map_path=None) -> int:
    out = _out_dir(config)
    spec = TransferFunctionSpec(config.operator, config.aperture)
    designs = None
    if config.source == "synthesized":
        stored = out / f"designs_{spec.kind}.csv"
        if stored.exists():
            designs = read_designs_csv(stored)
        else:
            _, designs = _design(config, map_path)
            write_designs_csv(stored, designs)
    f = make_input_sinc(config.samples, config.aperture)
    lens = LensModel.matched(mode=LENS_MODES[config.lens], aperture=config.aperture,
                             fill=config.fill, length=config.lens_length,
                             wavelength=config.wavelength, steps=config.bpm_steps)
    result = run_operator(spec, f, lens, designs=designs)
    stem = f"{spec.kind}_{config.source}_{config.lens}"
    spectrum = result.spectrum
    if spectrum.n > f.n:
        spectrum = spectrum.cropped(f.n)
    write_field_csv(out / f"{stem}_input.csv", f)
    write_field_csv(out / f"{stem}_spectrum.csv", spectrum)
    write_field_csv(out / f"{stem}_output.csv", result.output)
    scaled = FieldProfile(result.scale * result.reference.samples, result.reference.aperture)
    write_field_csv(out / f"{stem}_reference.csv", scaled)
    rows = ["# x_m re_out re_ref abs_out abs_ref"]
    for x, g, r in zip(f.positions, result.output.samples, scaled.samples):
        rows.append(f"{x!r} {g.real!r} {r.real!r} {abs(g)!r} {abs(r)!r}")
    _write_text(out / f"{stem}_fields.dat", "\n".join(rows) + "\n")
    entries = {**config.as_dict(), "lens_index": lens.index, "fourier_scale": lens.fourier_scale,
               "nrms": result.nrms, "correlation": result.correlation,
               "scale": f"{result.scale.real!r} {result.scale.imag!r}"}
    append_manifest(out / "manifest.txt", f"simulate {stem}", entries)
    print(f"{stem}: nrms = {result.nrms:.6f}, correlation = {result.correlation:.6f}")
    return EXIT_OK


def cmd_validate(config: RunConfig, map_path=None) -> int:
    out = _out_dir(config)
    results = acceptance.run_all(config, (acceptance.passivity_check,) + acceptance.CRITERIA)
    if map_path is not None:
        results.append(acceptance.stored_map_check(config, map_path))
    for r in results:
        print(r.line())
    summary = [{"criterion": r.number, "name": r.name, "passed": r.passed,
                "elapsed_s": round(r.elapsed, 3), "detail": r.detail,
                "metrics": {k: (v if isinstance(v, (bool, int, str)) else float(v))
                            for k, v in r.metrics.items()}} for r in results]
    _write_text(out / "validate.json", json.dumps(summary, indent=2) + "\n")
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} passed")
    return EXIT_FAILED if failed else EXIT_OK


COMMANDS = {"sweep": cmd_sweep, "design": cmd_design, "simulate": cmd_simulate,
            "validate": cmd_validate}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        config = _config(args)
    except (DomainError, GeometryError, ParseError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](config, args.map_path)
    except (MetalineError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
