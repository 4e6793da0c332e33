"""
splitstep - iterative operator splitting for linear evolution equations.

This package provides the alternating A/B sweeps of the iterative splitting
scheme with Newton-Cotes quadrature, the test problems it is studied on
(the 2x2 relaxation system and the radial Schroedinger oscillator),
convergence studies with order estimates, and closed-form property checks.
"""

__version__ = "0.1.0"
__author__ = "splitstep developers"
__description__ = "Iterative operator splitting with convergence tables and property checks"

from .cli import main
from .exponential import block_generator, block_iterates, block_semigroup_propagator, laplace_c2, laplace_c3, phi_k
from .harness import StudyConfig, estimate_order, run_study
from .linalg import expm, inverse
from .problems import OscillatorSpec, SplitProblem, dahlquist_2x2, radial_oscillator
from .splitting import IterateGrid, QuadRule, iterative_split_solve, sweep

__all__ = [
    "main",
    "block_generator",
    "block_iterates",
    "block_semigroup_propagator",
    "laplace_c2",
    "laplace_c3",
    "phi_k",
    "StudyConfig",
    "estimate_order",
    "run_study",
    "expm",
    "inverse",
    "OscillatorSpec",
    "SplitProblem",
    "dahlquist_2x2",
    "radial_oscillator",
    "IterateGrid",
    "QuadRule",
    "iterative_split_solve",
    "sweep",
]
