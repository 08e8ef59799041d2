"""Simulation of heavy-tailed elliptic random matrices: sampling, spectra,
truncated Poisson weighted infinite trees and population dynamics for the
limiting resolvent."""
from .ensemble import (
    EllipticEnsembleConfig,
    EmpiricalMeasure,
    HalfPlanePoint,
    ResolventBlock,
    bipartize,
    build_elliptic_matrix,
    eigenvalues,
    log_potential,
    resolvent_diag_blocks,
    scale_and_shift,
    singular_values,
    stieltjes_symmetrized,
)
from .heavy_sampler import (
    ArcUniform,
    DiscreteAtoms,
    FullCircle,
    IndependentAxes,
    RadialLaw,
    SpectralMeasureSpec,
    preset,
)
from .kernels import BACKEND
from .pwit import TruncatedPWIT, pwit_stieltjes_estimate, recursive_resolvent, sample_truncated_pwit
from .rde import RdeConfig, mu_from_hermitization, rde_solve, validate_c2_support
from .rng import RngStream

__version__ = "0.1.0"
