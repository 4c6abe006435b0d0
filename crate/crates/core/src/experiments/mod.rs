//! The experiment suites. Each one is a pure function of its configuration
//! and a [`ReplicationPlan`](crate::engine::ReplicationPlan), returning the
//! empirical law of the randomized quantity together with its target.

pub mod allocations;
pub mod na_field;
pub mod random_sum;
pub mod semistable;

use thiserror::Error;

use crate::distributions::DistError;
use crate::engine::EngineError;
use crate::index::ControlError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error(transparent)]
    Distribution(#[from] DistError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

pub(crate) fn config_error(message: impl Into<String>) -> ExperimentError {
    ExperimentError::Config(message.into())
}

/// Largest coordinate of the mixing law's support, per axis.
pub(crate) fn mixing_upper(mixing: &crate::distributions::MixingLaw) -> Vec<f64> {
    use crate::distributions::MixingLaw;
    match mixing {
        MixingLaw::Discrete(atoms) => {
            let dim = atoms[0].0.len();
            (0..dim).map(|i| atoms.iter().map(|(t, _)| t[i]).fold(f64::NEG_INFINITY, f64::max)).collect()
        }
        MixingLaw::Continuous(law) => law.bounds().1,
    }
}

/// Smallest coordinate of the mixing law's support, per axis.
pub(crate) fn mixing_lower(mixing: &crate::distributions::MixingLaw) -> Vec<f64> {
    use crate::distributions::MixingLaw;
    match mixing {
        MixingLaw::Discrete(atoms) => {
            let dim = atoms[0].0.len();
            (0..dim).map(|i| atoms.iter().map(|(t, _)| t[i]).fold(f64::INFINITY, f64::min)).collect()
        }
        MixingLaw::Continuous(law) => law.bounds().0,
    }
}
