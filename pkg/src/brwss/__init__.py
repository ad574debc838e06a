"""Branching random walk on the b-ary hypercube: FPT predictions and simulation."""

from .model import Genotype, ModelParams
from .errors import (BrwssError, DimensionError, DomainError, NoRootError,
                     QuadratureError, RegimeError)
from .hypercube import (count_at_distance_pair, count_triples, expected_occupation_time,
                        expected_particles_log, hamming_distance, log_sphere_size,
                        mutate, projected_rates, sphere_size, transition_log_prob)
from .numerics import (DEFAULT_CONFIG, FptPrediction, Regime, RegimeConstants,
                       SolverConfig, bar_t, first_moment_residual, lambert_w0,
                       mutation_delay_coefficient, predict_fast, predict_slow,
                       predict_ultraslow, regime_constants, solve_first_moment)
from .simulate import (CensoringReason, EnsembleStats, FptSample, SimConfig, SimMode,
                       censored_median, count_particles_at_target, derive_replica_state,
                       run_ensemble, run_measure_ensemble, simulate_cover_time,
                       simulate_fpt_full, simulate_fpt_projected, survived_barrier)
from .ballot import (BallotQuery, SmirnovCell, ballot_exact, ballot_mc,
                     smirnov_scaling_report)

__version__ = "0.1.0"
