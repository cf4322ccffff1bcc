"""Long-range coupled oscillator chains and their fractional sine-Gordon continuum limit."""

from .kernel import FractionalOrder, a_alpha, continuum_symbol, coupling_spectrum_direct, coupling_spectrum_series
from .lattice import Boundary, ChainParams, ChainState, ModelParams, simulate_chain
from .fsg import FieldParams, simulate_fsg
from .riesz import EdgePolicy, RieszOperatorConfig, Scheme, riesz_apply

__version__ = "0.1.0"

__all__ = [
    "Boundary",
    "ChainParams",
    "ChainState",
    "EdgePolicy",
    "FieldParams",
    "FractionalOrder",
    "ModelParams",
    "RieszOperatorConfig",
    "Scheme",
    "a_alpha",
    "continuum_symbol",
    "coupling_spectrum_direct",
    "coupling_spectrum_series",
    "riesz_apply",
    "simulate_chain",
    "simulate_fsg",
]
