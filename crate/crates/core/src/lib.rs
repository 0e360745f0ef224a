//! Total-variation denoising on 2D grids.
//!
//! [`tv`] is the raw sum of absolute differences over horizontal and vertical
//! neighbour pairs; the estimators in [`solver`] and [`tuning_free`] are
//! stated in terms of it. [`partition`] and [`geometry`] hold the partition
//! schemes and tangent-cone tools, and [`experiments`] runs reproducible
//! Monte Carlo risk curves.

pub mod error;
pub mod experiments;
pub mod geometry;
pub mod grid;
pub mod matrix;
pub mod partition;
pub mod rng;
pub mod signal;
pub mod solver;
pub mod tuning_free;

pub use solver::{denoise_penalized, project_tv_ball, DenoiseResult, PenalizedSolver, SolverConfig};

pub use error::{Result, TvError};
pub use experiments::{fit_loglog_slope, run_experiment, Estimator, ExperimentReport, ExperimentSpec, LogLogFit, MseRecord};
pub use geometry::{
    cone_membership, gaussian_width_cone, lower_bound_witness, project_onto_cone, sign_pattern, witness_estimate, Membership, SignPattern, WidthEstimate, WitnessEstimate,
};
pub use grid::{edge_gradient, tv, tv_cols, tv_norm, tv_rows, EdgeIndex, Orientation};
pub use matrix::ImageMatrix;
pub use partition::{
    block_average, epsilon_net_representative, gns_bound, greedy_1d_partition, greedy_tv_partition, Rect, RectPartition,
    Segment, SequenceFunctional,
};
pub use signal::{make_signal, GridSignal, SignalKind};
pub use tuning_free::{denoise_notuning, sigma_hat, TuningFreeResult};
