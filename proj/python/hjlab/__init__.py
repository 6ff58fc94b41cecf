"""Spectral lab for the periodic viscous Hamilton-Jacobi equation."""

from ._hjlab import (
    AdmissibilityError,
    ConfigurationError,
    DomainError,
    Error,
    IoError,
    alternative_roots,
    ball_norms,
    c_constant,
    critical_q,
    derive_exponents,
    divergence_fit,
    f_alternative,
    generate_source,
    gradient,
    k_star,
    laplacian,
    lq_norm,
    manufactured,
    read_field,
    solve,
    superlevel_curve,
    superlevel_measure,
    write_field,
)

__version__ = "0.1.0"
