"""
Deterministic solvers: exact Dirichlet problems on the truncated lattice and
the first-order expansion built from the block recurrences.
"""

from diploid_vortex.solvers.exact import (
    DirichletSystem,
    fd_gradient,
    fd_gradient_table,
    solve_derivatives,
    solve_fixation,
    solve_fixation_general,
    solve_mean_steps,
    write_fixation_csv,
)
from diploid_vortex.solvers.perturbation import (
    diagnostics,
    fit_tail_asymptotics,
    fixation_first_order,
    mutant_entry_first_order,
    reconstruct_v,
    recurrence_residuals,
    solve_tables,
    solve_z,
    solve_z_prime,
    split_invariance,
    tables_from_oracle,
    v_prime_value,
    v_value,
    w_function,
    write_diagnostics_csv,
    write_tables_csv,
)

__all__ = [
    "DirichletSystem",
    "fd_gradient",
    "fd_gradient_table",
    "solve_derivatives",
    "solve_fixation",
    "solve_fixation_general",
    "solve_mean_steps",
    "write_fixation_csv",
    "diagnostics",
    "fit_tail_asymptotics",
    "fixation_first_order",
    "mutant_entry_first_order",
    "reconstruct_v",
    "recurrence_residuals",
    "solve_tables",
    "solve_z",
    "solve_z_prime",
    "split_invariance",
    "tables_from_oracle",
    "v_prime_value",
    "v_value",
    "w_function",
    "write_diagnostics_csv",
    "write_tables_csv",
]
