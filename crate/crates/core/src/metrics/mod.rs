//! Pairwise distances between representations and their cumulative drift.
//!
//! Cosine and Fubini–Study distances are computed from one shared clipped
//! inner product of the normalized inputs, so on non-negative dots they agree
//! bit for bit and flipping the sign of either input leaves the Fubini–Study
//! value untouched.

mod registry;

pub use registry::{
    CosineMetric, EuclideanMetric, FubiniStudyMetric, Invariance, Metric, MetricRegistry,
};

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{DriftError, Result};
use crate::linalg::{dot, normalize, require_same_dims};

/// Distances for one pair of consecutive representations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepDistances {
    pub d_e: f64,
    pub d_c: f64,
    pub d_fs: f64,
    /// Clipped inner product of the normalized pair.
    pub dot: f64,
}

impl StepDistances {
    /// `d_c - d_fs`; zero off flips, `2 acos(dot) - pi` on flips.
    pub fn gauge_excess(&self) -> f64 {
        self.d_c - self.d_fs
    }
}

pub fn euclidean_distance(u: &[f64], v: &[f64]) -> Result<f64> {
    require_same_dims(u, v)?;
    let diff: Vec<f64> = v.iter().zip(u).map(|(a, b)| a - b).collect();
    Ok(crate::linalg::norm(&diff))
}

/// `<û, v̂>` clamped to [-1, 1].
pub fn clipped_dot(u: &[f64], v: &[f64]) -> Result<f64> {
    require_same_dims(u, v)?;
    let u = normalize(u)?;
    let v = normalize(v)?;
    // Identical or exactly opposite inputs are pinned to ±1.
    if u == v {
        return Ok(1.0);
    }
    if u.iter().zip(&v).all(|(a, b)| *a == -*b) {
        return Ok(-1.0);
    }
    Ok(dot(&u, &v).clamp(-1.0, 1.0))
}

fn angle_from_dot(c: f64) -> f64 {
    c.clamp(-1.0, 1.0).acos()
}

fn projective_angle_from_dot(c: f64) -> f64 {
    c.abs().clamp(0.0, 1.0).acos()
}

pub fn cosine_distance(u: &[f64], v: &[f64]) -> Result<f64> {
    Ok(angle_from_dot(clipped_dot(u, v)?))
}

pub fn fubini_study_distance(u: &[f64], v: &[f64]) -> Result<f64> {
    Ok(projective_angle_from_dot(clipped_dot(u, v)?))
}

/// All three distances plus the shared clipped dot.
pub fn step_distances(u: &[f64], v: &[f64]) -> Result<StepDistances> {
    let c = clipped_dot(u, v)?;
    Ok(StepDistances {
        d_e: euclidean_distance(u, v)?,
        d_c: angle_from_dot(c),
        d_fs: projective_angle_from_dot(c),
        dot: c,
    })
}

/// Closed-form cosine excess of a flipped step with dot `c < 0`.
pub fn flip_excess(c: f64) -> f64 {
    2.0 * c.acos() - PI
}

/// Left-to-right prefix sums of non-negative increments.
pub fn cumulative_drift(increments: &[f64]) -> Result<Vec<f64>> {
    let mut acc = 0.0;
    increments
        .iter()
        .enumerate()
        .map(|(index, &value)| {
            if !value.is_finite() || value < 0.0 {
                return Err(DriftError::NegativeIncrement { index, value });
            }
            acc += value;
            Ok(acc)
        })
        .collect()
}
