"""Quantum and classical arrival-time distributions for a Gaussian wave packet
evolving in a one-dimensional linear potential.

The library evaluates both mechanics from closed forms, turns the detector
current into arrival-time statistics by adaptive quadrature over an explicit
finite window, verifies the classical side with a trajectory Monte Carlo
oracle, and sweeps mass / width-phase parameters to map out where the two
mechanics agree.
"""

__version__ = "0.1.0"

from .model import (            # noqa: E402
    HBAR, AMU,
    ArrivalLabError, ParameterError, NonPositiveError, NonFiniteError,
    PacketSpec, DetectorSpec, WindowPolicy, Tolerances, DEFAULT_TOLERANCES,
    DerivedQuantities, validate_packet, derived_quantities,
    amu_to_g, g_to_amu, ms_to_s, s_to_ms,
)
from .quadrature import QuadResult, MaxSubdivisionsError, integrate_adaptive  # noqa: E402
from .quantum import sigma_q, psi, rho_q, j_q, continuity_residual  # noqa: E402
from .classical import (        # noqa: E402
    PhaseSpacePoint, d0, hamilton_flow, inverse_flow, d_t, d_t_from_flow,
    sigma_c, rho_c, j_c, rho_c_from_density, j_c_from_density,
)
from .arrival import (          # noqa: E402
    ArrivalStats, CurrentSeries, Window, NoArrivalError,
    quantum_current, classical_current,
    choose_window, arrival_stats, sample_series, pulse_grid,
)
from .mc import McConfig, McEstimate, NoCrossingsError, sample_initial, crossing_times, estimate  # noqa: E402
from .sweep import (            # noqa: E402
    SweepPlan, SweepRow, ConvergenceReport, NotConvergedError,
    run_sweep, convergence_threshold, figure_data,
    rows_to_csv, rows_from_csv, sweep_to_json, series_to_json, report_to_json,
    serialize,
)
