"""diff1 deviation statistics versus background doping, for two cell families.

``quarter``: spacer = lambda_GP(mu_bg)/4, any remaining depth treated as
background lead-in (valid for mu_bg up to the 0.4267 eV default).
``fixed``: spacer held at the nominal (D - 3d)/2 = 42.5 nm, giving up the
quarter-wave condition.

Usage: python3 scripts/background_scan.py [quarter|fixed|both]
"""
import sys
import warnings

import numpy as np

from metaline.acceptance import criterion_5
from metaline.config import RunConfig
from metaline.synthesis import GeometryWarning


def scan(family):
    base = RunConfig()
    spacing = (base.depth - 3 * base.line_width) / 2 if family == "fixed" else None
    top = 1.0 if family == "fixed" else 0.42
    print(f"[{family}]  mu_bg  amp_std  phase_std  max_res  pass")
    for mu_bg in np.round(np.arange(0.15, top + 1e-9, 0.05 if family == "fixed" else 0.01), 3):
        config = RunConfig(mu_background=float(mu_bg), spacing=spacing)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", GeometryWarning)
            r = criterion_5(config)
        m = r.metrics
        print(f"{'':9}{mu_bg:6.3f} {m['amp_std']:8.4f} {m['phase_std_deg']:10.2f} "
              f"{m['max_residual']:8.4f}  {r.passed}")


if __name__ == "__main__":
    choice = sys.argv[1] if len(sys.argv) > 1 else "both"
    for family in (("quarter", "fixed") if choice == "both" else (choice,)):
        scan(family)
