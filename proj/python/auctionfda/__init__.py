"""Smoothed auction price curves and pointwise functional regression."""

from ._auctionfda import (  # noqa: F401
    __version__,
    CoefficientCurve,
    EstimabilityError,
    Error,
    MonotoneFitError,
    ParseError,
    RegressionResult,
    RunConfig,
    SingularSystemError,
    SplineConfig,
    SplineFit,
    ValidationError,
    basis_matrix,
    covariate_names,
    coverage,
    default_truth_spec,
    evaluate,
    fit,
    grid,
    penalty_gram,
    penss,
    read_bids,
    read_lots,
    regress,
    run_cli,
    simulate,
    smooth,
    t_critical,
)


def run(subcommand, **flags):
    """Run a CLI subcommand in-process; returns (exit_code, log_text)."""
    cfg = RunConfig()
    cfg.subcommand = subcommand
    for key, value in flags.items():
        setattr(cfg, key, value)
    return run_cli(cfg)
