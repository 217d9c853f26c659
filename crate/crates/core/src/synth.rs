//! Seeded synthetic trajectories with a known step angle and injected sign
//! flips. Used as ground truth for every drift identity.

use std::collections::BTreeSet;
use std::f64::consts::{FRAC_PI_2, TAU};

use serde::Serialize;

use crate::error::{DriftError, Result};
use crate::linalg::{dot, normalize};
use crate::trajectory::RepresentationTrajectory;

pub const RNG_NAME: &str = "splitmix64 (Steele, Lea, Flood 2014) + Box-Muller";

/// SplitMix64: 64-bit state, golden-ratio increment, two xor-shift-multiply
/// rounds. Same stream on every platform.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1) from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal via Box–Muller (cosine branch only).
    pub fn next_gaussian(&mut self) -> f64 {
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
    }

    pub fn gaussian_vec(&mut self, d: usize) -> Vec<f64> {
        (0..d).map(|_| self.next_gaussian()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthSpec {
    pub dimension: usize,
    pub length: usize,
    /// Radians per step, in [0, pi/2).
    pub step_angle: f64,
    /// 1-based positions to negate.
    pub flip_indices: BTreeSet<usize>,
    pub seed: u64,
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..FRAC_PI_2).contains(&self.step_angle) {
            return Err(DriftError::InvalidAngle(self.step_angle));
        }
        if self.dimension < 2 {
            return Err(DriftError::InvalidSpec(format!(
                "dimension {} < 2 leaves no rotation plane",
                self.dimension
            )));
        }
        if self.length < 2 {
            return Err(DriftError::InvalidSpec(format!(
                "length {} < 2",
                self.length
            )));
        }
        check_positions(&self.flip_indices, self.length)
    }
}

fn check_positions(positions: &BTreeSet<usize>, len: usize) -> Result<()> {
    match positions.iter().find(|&&p| p == 0 || p > len) {
        Some(&index) => Err(DriftError::IndexOutOfRange { index, len }),
        None => Ok(()),
    }
}

/// Unit vector orthogonal to `r`, drawn from the generator.
fn random_orthogonal(rng: &mut SplitMix64, r: &[f64]) -> Vec<f64> {
    loop {
        let mut g = rng.gaussian_vec(r.len());
        // Two Gram–Schmidt passes.
        for _ in 0..2 {
            let p = dot(&g, r);
            g.iter_mut().zip(r).for_each(|(x, y)| *x -= p * y);
        }
        if let Ok(u) = normalize(&g) {
            if dot(&u, r).abs() < 1e-14 {
                return u;
            }
        }
    }
}

/// Trajectory whose consecutive directions are exactly `step_angle` apart.
/// `flip_indices` is ignored here; see [`generate`].
pub fn generate_smooth_trajectory(spec: &SynthSpec) -> Result<RepresentationTrajectory> {
    spec.validate()?;
    let mut rng = SplitMix64::new(spec.seed);
    let first = loop {
        if let Ok(v) = normalize(&rng.gaussian_vec(spec.dimension)) {
            break v;
        }
    };
    let (sin, cos) = spec.step_angle.sin_cos();
    let mut directions = vec![first];
    let mut velocity: Option<Vec<f64>> = None;
    for _ in 1..spec.length {
        let r = directions.last().expect("non-empty");
        if spec.step_angle == 0.0 {
            directions.push(r.clone());
            continue;
        }
        let mut u = random_orthogonal(&mut rng, r);
        // Keep a consistent turning direction: follow the transported
        // velocity, and turn counter-clockwise in the first coordinate plane
        // on the first step.
        let flip = match &velocity {
            Some(v) => dot(&u, v) < 0.0,
            None => r[0] * u[1] - r[1] * u[0] < 0.0,
        };
        if flip {
            u.iter_mut().for_each(|x| *x = -*x);
        }
        let next: Vec<f64> = r.iter().zip(&u).map(|(a, b)| cos * a + sin * b).collect();
        velocity = Some(r.iter().zip(&u).map(|(a, b)| -sin * a + cos * b).collect());
        directions.push(normalize(&next)?);
    }
    let starts = (0..spec.length).collect();
    RepresentationTrajectory::from_unit_directions(directions, starts, None)
}

/// Negate the directions at the given 1-based positions.
pub fn inject_flips(
    traj: &RepresentationTrajectory,
    positions: &BTreeSet<usize>,
) -> Result<RepresentationTrajectory> {
    check_positions(positions, traj.len())?;
    let signs: Vec<bool> = (1..=traj.len()).map(|k| positions.contains(&k)).collect();
    Ok(traj.with_signs(&signs))
}

/// Smooth trajectory with `spec.flip_indices` applied.
pub fn generate(spec: &SynthSpec) -> Result<RepresentationTrajectory> {
    inject_flips(&generate_smooth_trajectory(spec)?, &spec.flip_indices)
}
