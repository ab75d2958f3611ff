//! Random-network ensembles, community-detecting spin Hamiltonians, ground
//! state optimizers and concentration-of-measure bounds.
//!
//! ```
//! use netconc::{evaluate, Functional, Graph, SpinConfig};
//!
//! let k3 = Graph::complete(3);
//! let s = SpinConfig::from_spins(&[1, 1, 1]).unwrap();
//! assert_eq!(evaluate(&Functional::Bipartition, &k3, &s).unwrap(), -2.0);
//! ```
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cli;
pub mod ensembles;
pub mod error;
pub mod experiments;
pub mod functionals;
pub mod graph;
pub mod optimizers;
pub mod seeding;

pub use bounds::{best_mu, bound_eval, gamma_star, BoundParams, BoundSpec, BoundValue, Theorem, ThresholdSpec};
pub use ensembles::{
    perturbation_p1, sample, sample_perturbed, ClSummary, Ensemble, EnsembleFamily, EnsembleSpec, EnsembleVariant,
    WeightGenerator,
};
pub use error::{Error, Result};
pub use experiments::{
    empirical_tail, fit_scaling, gamma_sweep, run_concentration, ConcentrationReport, ExperimentConfig, Normalization,
    ScalingFit,
};
pub use functionals::{
    bounded_diff_constant, evaluate, move_delta, DifferenceBound, EnergyState, Functional, MoveDelta, OccupationPenalty,
};
pub use graph::{ConstraintSpec, Graph, SpinConfig};
pub use optimizers::{
    optimize_exhaustive, optimize_local, optimize_sa, optimize_sa_observed, AnnealSchedule, MoveKind, OptimizeResult,
    OptimizerPolicy,
};
