//! Synthetic-Gaussian experiments and query-count sizing.

mod fit;
mod moments;
mod sweep;
mod synth;

pub use fit::{fit_variance_model, q_star, FitWeighting, QStar, VarianceModelFit};
pub use moments::{
    estimate_moments, ncc_line_accuracies, predict_task_variance, predict_task_variance_standard_error,
    sample_variance_standard_error, MomentEstimates, DEFAULT_INNER_SAMPLES, MIN_MC_SAMPLES,
};
pub use sweep::{
    depletion_accuracies, empirical_argmin, feasible_q_grid, repetition_seed, sampling_seed, sweep_variance,
    SweepPoint, DEFAULT_Q_GRID,
};
pub use synth::{gen_gaussian_pool, GaussianClassSpec, SynthConfig};
