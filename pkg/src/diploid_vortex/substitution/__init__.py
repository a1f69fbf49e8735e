"""
Substitution rate tau, mean fixation time T = 1/tau and the vortex curve.
"""

from diploid_vortex.substitution.rates import (
    n_weighted_w,
    pivot_decomposition,
    require_no_overdominance,
    substitution_rate,
    tau_exact,
    tau_linear,
    vortex_curve,
    w_monotonicity_in_d,
    w_value,
    write_curve_csv,
)

__all__ = [
    "n_weighted_w",
    "pivot_decomposition",
    "require_no_overdominance",
    "substitution_rate",
    "tau_exact",
    "tau_linear",
    "vortex_curve",
    "w_monotonicity_in_d",
    "w_value",
    "write_curve_csv",
]
