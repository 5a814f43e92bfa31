"""Sweep the default (mu_in, mu_out) transmission map and report its coverage.

Usage: python3 scripts/sweep_map.py [OUT_DIR] [GRID]
"""
import sys
import time
from pathlib import Path

from metaline.graphene import DEFAULT_SHEET, angular_frequency
from metaline.synthesis import (NOMINAL_WAVELENGTH, mu_grid, resolve_geometry, sweep_map,
                                write_map_csv)


def main(out="out/map", n=201):
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    omega = angular_frequency(NOMINAL_WAVELENGTH)
    geom = resolve_geometry(omega)
    grid = mu_grid(n=n)
    t0 = time.perf_counter()
    tmap = sweep_map(grid, grid, geom, omega, DEFAULT_SHEET)
    elapsed = time.perf_counter() - t0
    write_map_csv(out / "map.csv", tmap)
    print(f"background {geom.mu_background:.6f} eV, spacer {geom.spacing * 1e9:.3f} nm")
    print(f"{n} x {n} sweep in {elapsed:.3f} s")
    for key, value in tmap.coverage().items():
        print(f"{key} = {value:.6g}")


if __name__ == "__main__":
    main(*(sys.argv[1:2] or ["out/map"]), *map(int, sys.argv[2:3]))
