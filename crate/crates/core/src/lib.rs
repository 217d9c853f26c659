//! Representation drift under Euclidean, cosine and Fubini–Study geometry.
//!
//! A data matrix is cut into sliding windows, each window is reduced to its
//! first principal direction (sign left exactly as the extractor returns it),
//! and consecutive directions are compared. Cosine drift counts every sign
//! flip as a jump of nearly pi; Fubini–Study drift identifies `v` with `-v`
//! and does not. Their difference isolates gauge-induced churn.
//!
//! ```
//! use projdrift::synth::{generate, SynthSpec};
//! use projdrift::trajectory::{compute_steps, drift_report};
//!
//! let spec = SynthSpec {
//!     dimension: 8,
//!     length: 6,
//!     step_angle: 0.2,
//!     flip_indices: [3].into(),
//!     seed: 7,
//! };
//! let traj = generate(&spec).unwrap();
//! let report = drift_report(&compute_steps(&traj).unwrap(), 1e-12).unwrap();
//! assert_eq!(report.flip_count, 2);
//! assert!(report.total_c() > report.total_fs());
//! ```

pub mod error;
pub mod ingest;
pub mod linalg;
pub mod metrics;
pub mod pipeline;
pub mod report;
pub mod selftest;
pub mod stats;
pub mod synth;
pub mod trajectory;

pub use error::{DriftError, Result};
pub use linalg::{FeatureMatrix, Pc1Extractor, PowerIteration};
pub use metrics::{Metric, MetricRegistry};
pub use trajectory::{DriftReport, RepresentationTrajectory, StepRecord, WindowSpec};
