"""paranls: paradifferential calculus, normal-form reductions and
pseudospectral integration for fully nonlinear Schrodinger equations on the
circle, at truncated-Fourier scale."""

__version__ = "0.1.0"

from . import (  # noqa: F401
    calculus,
    evolve,
    harness,
    model,
    paralin,
    quantize,
    reduce,
    resonance,
    spectral,
    symbols,
)
from ._accel import numba_enabled, set_numba_enabled  # noqa: F401
