"""Green functions of Markov-additive processes on Z^d x {1..p}."""

from ._madd import (
    Spec,
    GreenEstimate,
    validate,
    stationary_distribution,
    moments,
    fourier,
    laplace,
    perron_triple,
    spectral_scan,
    appropriate_section,
    energy_matrix,
    rho_eval,
    boundary_point,
    doob_transform,
    green_series,
    green_resolvent,
    green_mc,
    asymptotic_coefficient,
    asymptotic_green,
    compare,
    run_checks,
    SpecError,
    PreconditionError,
    NumericError,
    ResourceError,
)

__all__ = [name for name in dir() if not name.startswith("_")]
