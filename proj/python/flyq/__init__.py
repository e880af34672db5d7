"""Intrinsic decoherence of flying quantum systems.

Thin wrapper over the compiled core: state diagnostics, second-order
perturbative formulas, gate metrics, moving-trap bounds and config-driven
experiment runs.
"""

from flyq._core import (  # noqa: F401
    __version__,
    ConfigError,
    FlyqError,
    approx_state,
    ballistic_regime_estimate,
    calibrate_not_gate,
    cnot_metrics,
    correction_term_scattering,
    entropy_perturbative,
    fidelity_mixed_perturbative,
    fidelity_pure_perturbative,
    grid_free_flight,
    magnitude_table,
    matrix_exponential,
    not_gate_metrics,
    partial_projectors,
    phase_gate_metrics,
    run_config_file,
    run_config_text,
    state_fidelity,
    u1_u2_scattering,
    validate_config_text,
    von_neumann_entropy,
    worst_case_bound,
)
