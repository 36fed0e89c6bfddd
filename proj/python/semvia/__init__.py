from ._semvia import (
    ChannelParams,
    DivergentSeries,
    NoConvergence,
    NotIrreducible,
    Policy,
    SourceParams,
    TruncationTooSmall,
    aoii_average,
    aoii_pmf,
    aoiv_average,
    evaluate,
    oracle_aoii_mean,
    oracle_sync,
    oracle_via_mean,
    q_star_equal,
    reconstruction_error,
    run_cli,
    sampling_cost_rate,
    simulate,
    solve_mrsc,
    solve_rsc,
    trace,
    via_average,
)

__all__ = [name for name in dir() if not name.startswith("_")]
