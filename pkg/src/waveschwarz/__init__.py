"""waveschwarz: block-Toeplitz spectra and scalability analysis of one-level
Schwarz methods for absorptive Helmholtz and transverse-electric Maxwell
wave-guide problems."""

__version__ = "0.1.0"

from .numerics import (
    PowerRadiusEstimate,
    RootFindingError,
    SolveReport,
    gmres,
    lu_det,
    lu_solve,
    poly_roots,
    power_radius,
)
from .toeplitz import (
    LimitSpectrum,
    SpectrumReport,
    ToeplitzBlocks,
    assemble_dense,
    charpoly,
    generating_check,
    limiting_spectrum,
    q_poly,
    spectrum,
)
from .schwarz1d import (
    CriterionValues,
    ScaledVars,
    SchwarzParams,
    SingularConfigurationError,
    coefficients_1d,
    criteria,
    k_scaled_params,
    scaled_vars,
    zeta_1d,
    zeta_mode,
)
from .schwarz2d import (
    MaxwellReductionSample,
    ModeContext,
    ModeSweepReport,
    ModeTruncationPolicy,
    g_tilde,
    k_scaled_sweep,
    make_mode,
    maxwell_reduction_residual,
    mode_coefficients,
    sup_convergence_factor,
)
from .iteration import (
    IterationHistory,
    build_iteration_matrix,
    iterate,
    nilpotency_check,
    spectral_radius_curve,
)
from .discrete import (
    CountTable,
    DiscreteProblem,
    OrasPreconditioner,
    assemble,
    build_oras,
    scan_counts,
)

__all__ = [name for name in dir() if not name.startswith("_")]
