//! Decision-theoretic size-constrained clustering.
//!
//! A Bayesian categorical mixture model is fitted to survey responses; the
//! cluster assignment is then chosen as the Bayes action under a loss that
//! adds an Aitchison-distance size penalty to the Variation of Information
//! between the action and posterior assignment draws.
//!
//! - [`composition`]: closure, pseudo-count closure, Aitchison distance.
//! - [`information`]: entropies and Variation of Information.
//! - [`loss`]: label-sensitive and label-invariant size-constrained losses.
//! - [`model`]: the mixture model, its Gibbs sampler and split R-hat.
//! - [`optimize`]: genetic search, local descent and an exhaustive oracle.
//! - [`relabel`]: label identification of an action against `theta`.
//! - [`simulate`]: planted-cluster datasets and accuracy scores.

pub mod assignment;
pub mod composition;
pub mod error;
pub mod information;
pub mod loss;
pub mod model;
pub mod optimize;
pub mod relabel;
pub mod simulate;

pub use assignment::Assignment;
pub use composition::{aitchison_distance, closure, closure_pseudo, min_perm_aitchison, Composition, LabelPermutation};
pub use error::{Error, Result};
pub use information::{contingency, entropy, joint_entropy, vi_loss, ContingencyTable};
pub use loss::{expected_loss, loss, loss_invariant, loss_sensitive, ExpectedLoss, LossMode, LossSpec};
pub use model::{
    fit_posterior, log_likelihood, sample_z, split_rhat, Diagnostics, PosteriorSamples, PriorSpec, SamplerConfig,
    SurveyData,
};
pub use optimize::{brute_force_assignment, local_search, optimize_assignment, OptimizerConfig};
pub use relabel::{build_score_matrix, identify_labels, ScoreMatrix};
pub use simulate::{accuracy, simulate_dataset, vi_from_truth, SimConfig, SimTruth};
