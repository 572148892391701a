"""Pseudospectral simulator for the semilinear damped wave equation

    u_tt - Lap u + u_t = |u|^(1 + 2/n) mu(|u|)

on a periodic box, with diagnostics for decay rates, convergence to the
Gauss-kernel profile and blow-up lifespans.
"""
from .blowup import (CutoffSpec, FunctionalValues, LifespanResult, LifespanRow,
                     LifespanTable, crossing_time, detect_lifespan, lifespan_sweep,
                     psi_signed, richardson, test_functional)
from .config import ExperimentConfig, load_mapping, parse_config
from .diagnostics import (CSV_COLUMNS, DecayFit, MassResult, NormSample, NormSeries,
                          alpha, fill_deviations, fit_decay_rate, fit_series,
                          h2dot_norm, lq_norm, mass_functional, profile_deviation,
                          profile_deviation_h2, sample_state, x_norm_proxy)
from .errors import (BadValue, ConfigError, DampedWaveError, DivergentIntegral,
                     IncompleteSweep, InsufficientData, InvalidArg, MissingKey,
                     NoBlowupWithinHorizon, NoBracket, NonFiniteState, NotConverged,
                     SizeMismatch, TrajectoryTooShort, UnknownFamily)
from .evolve import (DataSpec, PicardReport, RunResult, SolverConfig, Stepper,
                     data_mass, initial_state, picard_solve, run, step)
from .moduli import (ModulusSpec, derivative_ratio, dini_integral, eval_mu, is_dini,
                     nonlinear_term, psi, psi_inverse)
from .spectral import (Grid, State, apply_nonlinearity, forward_transform, gauss_field,
                       gauss_hat, gauss_symbol, inverse_transform, kernel_dt_symbol,
                       kernel_pair, kernel_symbol, linear_propagate, load_field,
                       propagator_matrix, save_field, state_from_physical)

test_functional.__test__ = False

__version__ = "0.1.0"
