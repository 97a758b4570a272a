"""Weighted means, refined Young and Heinz inequalities, and their matrix-norm forms."""

from .errors import ConvergenceError, DimensionError, DomainError, EvaluationError, HeinzlabError
from .results import SandwichResult
from .scalar import (
    ExponentP,
    PositivePair,
    PowerIndex,
    WeightSplit,
    heinz_mean,
    heinz_power_sandwich,
    heinz_sandwich,
    power_m_refinement_term,
    power_p_sandwich,
    squared_young_sandwich,
    theorem22_chain,
    weighted_arithmetic,
    weighted_geometric,
    young_sandwich,
)
from .convex import (
    ConvexFunctionSpec,
    PointQuadruple,
    certify_convexity,
    difference_dominance,
    exponential,
    phi_heinz_sandwich,
    phi_young_sandwich,
    power,
    scaled_power,
    slope_chain,
)
from .linalg import (
    PsdMatrix,
    hermitian_eigendecomposition,
    hilbert_schmidt_norm,
    psd_fractional_power,
    schatten_norm,
    singular_values,
    spectral_norm,
)
from .matrix_ineq import (
    MatrixTriple,
    NormSelector,
    diagonal_reduction,
    heinz_convexity_scan,
    heinz_norm_bounds,
    heinz_norm_sandwich,
    hs_identity_residual,
    hs_young_sandwich,
    phi_heinz_norm_sandwich,
    phi_hs_sandwich,
)
from .certifier import CertificationReport, TrialConfig, certify, shrink

__version__ = "0.1.0"
