"""Graphene metaline spatial-operator simulator.

Modules
-------
graphene   Kubo conductivity and plasmon wavenumbers.
scattering Interface coefficients, transfer matrices, S-parameters.
synthesis  Unit cells, transmission maps and per-cell operator design.
pipeline   Lens / transfer / lens runs and their error metrics.
oracles    Independent reference computations for the test-suite.
config     Run configuration files and flag overrides.
acceptance Acceptance criteria with pass/fail summaries.
cli        ``metaline`` command-line front end.
"""
__version__ = "0.1.0"
