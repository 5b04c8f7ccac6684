"""Power analysis of single-phase RLC networks under multi-tone excitation.

The pipeline: describe a periodic voltage as an exact line spectrum,
solve an RLC netlist per frequency line, then derive instantaneous,
classical, and time-scale energy/power quantities and verify their
balance laws numerically.  A brute-force oracle layer (time stepping,
FFT, direct quadrature) cross-checks the exact machinery.
"""

from .spectrum import (
    AMPERE,
    COMMENSURATE_RTOL,
    JOULE,
    VAR,
    VOLT,
    WATT,
    ComplexTimePoint,
    IncommensurateError,
    LineSpectrum,
    SampledSignal,
    SpectralLine,
)
from .network import (
    Branch,
    BranchPhasors,
    Netlist,
    NetworkSolution,
    SingularNetworkError,
    driving_point_admittance,
    solve,
    solve_frequency,
)
from .power import (
    BalanceReport,
    ClassicalSummary,
    ConsistencyError,
    InstantaneousSet,
    LinePower,
    ScaledQuantities,
    active_balance,
    budeanu,
    classical_summary,
    d_ds_fd_gap,
    d_dt_fd_gap,
    default_s_grid,
    default_t_grid,
    instantaneous,
    instantaneous_balance,
    q_from_stored_energy,
    reactive_balance,
    real_imaginary_power,
    scaled,
    scaled_time_means,
    verify_balances,
)
from .oracle import (
    OdeState,
    QuadratureConfig,
    TransientWarning,
    fft_hilbert,
    numeric_mean,
    ode_steady_state,
    ode_transient,
    quadrature_analytic,
    quadrature_tail_bound,
)

__version__ = "0.1.0"

__all__ = [
    "AMPERE",
    "COMMENSURATE_RTOL",
    "JOULE",
    "VAR",
    "VOLT",
    "WATT",
    "Branch",
    "BranchPhasors",
    "BalanceReport",
    "ClassicalSummary",
    "ComplexTimePoint",
    "ConsistencyError",
    "IncommensurateError",
    "InstantaneousSet",
    "LinePower",
    "LineSpectrum",
    "Netlist",
    "NetworkSolution",
    "OdeState",
    "QuadratureConfig",
    "SampledSignal",
    "ScaledQuantities",
    "SingularNetworkError",
    "SpectralLine",
    "TransientWarning",
    "active_balance",
    "budeanu",
    "classical_summary",
    "d_ds_fd_gap",
    "d_dt_fd_gap",
    "default_s_grid",
    "default_t_grid",
    "driving_point_admittance",
    "fft_hilbert",
    "instantaneous",
    "instantaneous_balance",
    "numeric_mean",
    "ode_steady_state",
    "ode_transient",
    "q_from_stored_energy",
    "quadrature_analytic",
    "quadrature_tail_bound",
    "reactive_balance",
    "real_imaginary_power",
    "scaled",
    "scaled_time_means",
    "solve",
    "solve_frequency",
    "verify_balances",
]
