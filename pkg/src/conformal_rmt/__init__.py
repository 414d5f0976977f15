"""Polynomial curves, harmonic moments and the normal-to-Hermitian deformation of random matrix ensembles."""

from .balayage import (
    TestFunction,
    area_integral,
    balayage_integral,
    deformation_convergence,
    equilibrium_certificate,
    equilibrium_energy,
    semicircle_integral,
)
from .coulomb import EnsembleSample, PotentialSpec, empirical_moments, metropolis_run, total_energy
from .curve import (
    ContourGrid,
    PolynomialCurve,
    area_t0,
    contains_point,
    derivative,
    evaluate,
    injectivity_check,
    simplicity_margin,
    slit_limit_distance,
)
from .errors import (
    BreakdownError,
    ConformalRMTError,
    NoSolutionError,
    PrecisionError,
    ValidationError,
)
from .inversion import (
    BlockSystem,
    DeformationSchedule,
    admissible_radius,
    deform,
    invert_near_slit,
    invert_regular,
    schedule_moments,
    solve_block_system,
)
from .moments import HarmonicMoments, forward_moments, forward_moments_quadrature, leading_order_moments
from .schwarz import branch_point_check, near_slit_decomposition, riemann_inverse, schwarz_function

__version__ = "0.1.0"
