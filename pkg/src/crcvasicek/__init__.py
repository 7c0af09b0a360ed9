"""Consistent re-calibration of discrete-time multifactor Vasicek models:
curve construction, drift extension, two equivalent curve-evolution
routes, state-space estimation, stochastic volatility and portfolio
back-testing."""

from .vasicek import (
    VasicekParams,
    FactorState,
    compute_A,
    compute_A_all,
    compute_B,
    compute_B_all,
    conditional_moments,
    simulate_factors,
    yield_curve,
)
from .hullwhite import (
    HullWhiteExtension,
    ThetaRangeError,
    build_calibration_system,
    calibrate_theta,
    extended_A,
    extended_A_profile,
    extended_yield_curve,
    theta_first,
)
from .crc import (
    CrcState,
    ParameterUpdate,
    crc_init,
    crc_step_explicit,
    crc_step_hjm,
    crc_step_real_world,
    density_process,
    flat_extend,
    verify_recalibration,
)
from .estimation import (
    StateSpaceSpec,
    build_state_space,
    fit_beta_sigma_rcov,
    fit_drift_mle,
    infer_market_price,
    kalman_filter,
    kalman_loglik,
    realized_cov_matrix,
    rescale_grid,
    rolling_estimate,
)
from .stochvol import (
    StochVolParams,
    assemble_sigma,
    draw_joint_innovations,
    fit_stochvol,
    stochvol_step,
)
from .backtest import (
    PortfolioSpec,
    ReturnSample,
    binomial_tail,
    coverage_test,
    portfolio_log_return,
    simulate_return_distribution,
)
from .dataio import (
    RunConfig,
    YieldPanel,
    handle_missing,
    interpolate_to_grid,
    load_panel,
    save_panel,
)
from .numerics import RngStream, NaturalCubicSpline, nelder_mead, spd_sqrt

__version__ = "0.1.0"
