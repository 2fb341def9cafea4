"""Boundary-aware upwind schemes for hyperbolic relaxation systems.

The heavy lifting is in the C++ core; this package re-exports it and adds a
dict-based config helper.
"""

import json as _json

from ._core import (
    CharacteristicBoundary,
    ConvergenceFailure,
    DegenerateSign,
    ExperimentConfig,
    InvalidArgument,
    NumericalFailure,
    RelaxblError,
    SingularMatrix,
    compare,
    config_from_json,
    convergence,
    effective_eta,
    error_norms,
    example_config,
    fit_slope,
    list_examples,
    load_config,
    m_eta_decompose,
    reference,
    run,
    run_cli,
)

__version__ = "0.1.0"


def config_from_dict(data):
    """Build an ExperimentConfig from a dict with the JSON config schema."""
    return config_from_json(_json.dumps(data))


__all__ = [name for name in dir() if not name.startswith("_")]
