"""Contrastive-loss geometry toolkit (C++ core)."""

from ._core import (
    DegenerateError,
    DomainError,
    Error,
    FormatError,
    IoError,
    baseline_bound,
    batch_gap_bound,
    batch_gap_estimate,
    cka,
    class_dispersion,
    contrastive_loss,
    cor1_bound,
    etf_report,
    general_bound,
    load_bundle,
    loss_and_gradient,
    loss_gap,
    mshot_error,
    prop1_bound,
    rsa,
    save_bundle,
    simplex_etf,
    solve_stationary_cubic,
    thm1_gap_bound,
    ufm_target_loss,
    ufm_train,
)

__all__ = [name for name in dir() if not name.startswith("_")]
