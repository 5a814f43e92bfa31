"""Design all three operators and run them through both lens models.

Prints per-operator cell deviation statistics and the normalised RMS of the
ideal and synthesised transfer functions behind the ideal and graded-index
lenses.
"""
from metaline.acceptance import _map
from metaline.config import RunConfig
from metaline.pipeline import LensModel, deviation_report, make_input_sinc, run_operator
from metaline.synthesis import OPERATOR_KINDS, TransferFunctionSpec, design_operator


def main():
    config = RunConfig()
    tmap, geom, _ = _map(config)
    f = make_input_sinc(config.samples, config.aperture)
    lenses = {mode: LensModel.matched(mode=mode) for mode in ("ideal_ft", "grin_bpm")}
    print(f"{'op':6} {'amp_std':>8} {'phase_std':>9} {'max_res':>8}"
          + "".join(f" {src + '/' + mode:>14}" for src in ("ideal", "synth") for mode in ("ft", "grin")))
    for kind in OPERATOR_KINDS:
        spec = TransferFunctionSpec(kind)
        designs = design_operator(spec, tmap, geom, config.omega, strict=False)
        stats = deviation_report(designs)
        row = f"{kind:6} {stats.amplitude_std:8.4f} {stats.phase_std_deg:9.2f} {stats.max_residual:8.4f}"
        for source in (None, designs):
            for lens in lenses.values():
                row += f" {run_operator(spec, f, lens, designs=source).nrms:14.4f}"
        print(row)


if __name__ == "__main__":
    main()
