//! Command-line harness around `sctl-core`: scenario files, `ħ` sweeps,
//! distance pipelines, certificate campaigns and report emission.

pub mod campaign;
pub mod desk;
pub mod error;
pub mod formats;
pub mod report;
pub mod runner;
pub mod scenario;

pub use error::{LabError, LabResult};

use serde::{Deserialize, Serialize};
use sctl_core::certify::Status;
use sctl_core::transport::W2Options;

/// Numerical tolerances shared by every subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ToleranceProfile {
    Strict,
    #[default]
    Default,
}

impl ToleranceProfile {
    /// Slack of `lower ≤ exact ≤ upper` and of the `√(dħ)` floor.
    pub fn sandwich(self) -> f64 {
        match self {
            Self::Strict => 1e-10,
            Self::Default => 1e-8,
        }
    }

    /// Relative slack of the main stability bound.
    pub fn bound(self) -> f64 {
        match self {
            Self::Strict => 0.0,
            Self::Default => 1e-9,
        }
    }

    pub fn audit(self) -> f64 {
        match self {
            Self::Strict => 1e-9,
            Self::Default => 1e-6,
        }
    }

    pub fn sdp_gap(self) -> f64 {
        match self {
            Self::Strict => 1e-7,
            Self::Default => 1e-6,
        }
    }

    /// Negative Vlasov mass tolerated before estimates are marked inconclusive.
    pub fn clip_limit(self) -> f64 {
        match self {
            Self::Strict => 1e-8,
            Self::Default => 1e-3,
        }
    }

    pub fn w2_options(self) -> W2Options {
        match self {
            Self::Strict => W2Options { tolerance: 1e-4, max_iters: 5000, ..W2Options::default() },
            Self::Default => W2Options::default(),
        }
    }
}

/// Process exit code: 0 all pass, 2 some inconclusive, 1 some failure.
pub fn exit_code(status: Status) -> i32 {
    match status {
        Status::Pass => 0,
        Status::Inconclusive => 2,
        Status::Fail => 1,
    }
}
