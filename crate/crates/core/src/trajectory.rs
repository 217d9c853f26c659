//! Sliding windows, PC1 trajectories, per-step records and drift series.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{DriftError, Result};
use crate::linalg::{
    center_window, norm, normalize, FeatureMatrix, Pc1Extractor, PowerIteration, WindowView,
};
use crate::metrics::{cumulative_drift, step_distances, StepDistances};

pub const DEFAULT_WINDOW: usize = 64;
pub const DEFAULT_STEP: usize = 55;
pub const DEFAULT_EPSILON: f64 = 1e-12;
const UNIT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WindowSpec {
    pub window_length: usize,
    pub step: usize,
}

impl Default for WindowSpec {
    fn default() -> Self {
        WindowSpec {
            window_length: DEFAULT_WINDOW,
            step: DEFAULT_STEP,
        }
    }
}

impl WindowSpec {
    pub fn new(window_length: usize, step: usize) -> Self {
        WindowSpec {
            window_length,
            step,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let w = self.window_length;
        if w < 2 {
            return Err(DriftError::InvalidSpec(format!("window length {w} < 2")));
        }
        if self.step < 1 {
            return Err(DriftError::InvalidSpec("step must be >= 1".into()));
        }
        if w > n {
            return Err(DriftError::InvalidSpec(format!(
                "window length {w} exceeds the {n} available rows"
            )));
        }
        Ok(())
    }

    /// `⌊(N − W)/s⌋ + 1`
    pub fn window_count(&self, n: usize) -> Result<usize> {
        self.validate(n)?;
        Ok((n - self.window_length) / self.step + 1)
    }
}

pub fn build_windows<'a>(x: &'a FeatureMatrix, spec: &WindowSpec) -> Result<Vec<WindowView<'a>>> {
    let count = spec.window_count(x.nrows())?;
    Ok((0..count)
        .map(|k| x.window(k * spec.step, spec.window_length))
        .collect())
}

/// Ordered unit directions, one per window, with raw window-local signs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepresentationTrajectory {
    pub directions: Vec<Vec<f64>>,
    /// 0-based source row of each direction (window start, or CSV row).
    pub window_starts: Vec<usize>,
    pub spec: Option<WindowSpec>,
}

impl RepresentationTrajectory {
    /// Wrap directions that are already unit length.
    pub fn from_unit_directions(
        directions: Vec<Vec<f64>>,
        window_starts: Vec<usize>,
        spec: Option<WindowSpec>,
    ) -> Result<Self> {
        assert_eq!(directions.len(), window_starts.len());
        if let Some(first) = directions.first() {
            for (index, d) in directions.iter().enumerate() {
                if d.len() != first.len() {
                    return Err(DriftError::DimensionMismatch {
                        left: first.len(),
                        right: d.len(),
                    });
                }
                let n = norm(d);
                if (n - 1.0).abs() > UNIT_TOL {
                    return Err(DriftError::NotUnit { index, norm: n });
                }
            }
        }
        Ok(RepresentationTrajectory {
            directions,
            window_starts,
            spec,
        })
    }

    /// Normalize each row of `x` and use it as a direction.
    pub fn from_rows(x: &FeatureMatrix) -> Result<Self> {
        let directions = x
            .rows()
            .enumerate()
            .map(|(i, r)| {
                normalize(r).map_err(|e| DriftError::Window {
                    index: i + 1,
                    start: i,
                    source: Box::new(e),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let starts = (0..directions.len()).collect();
        RepresentationTrajectory::from_unit_directions(directions, starts, None)
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.directions.first().map_or(0, Vec::len)
    }

    /// Multiply direction `k` by `signs[k]` (each ±1).
    pub fn with_signs(&self, signs: &[bool]) -> RepresentationTrajectory {
        assert_eq!(signs.len(), self.len());
        let directions = self
            .directions
            .iter()
            .zip(signs)
            .map(|(d, &neg)| {
                if neg {
                    d.iter().map(|x| -x).collect()
                } else {
                    d.clone()
                }
            })
            .collect();
        RepresentationTrajectory {
            directions,
            ..self.clone()
        }
    }
}

pub fn build_trajectory(x: &FeatureMatrix, spec: &WindowSpec) -> Result<RepresentationTrajectory> {
    build_trajectory_with(x, spec, &PowerIteration::default())
}

/// Extract PC1 for every window. Windows run in parallel; output keeps
/// window order.
pub fn build_trajectory_with(
    x: &FeatureMatrix,
    spec: &WindowSpec,
    extractor: &dyn Pc1Extractor,
) -> Result<RepresentationTrajectory> {
    let windows = build_windows(x, spec)?;
    let directions = windows
        .par_iter()
        .enumerate()
        .map(|(k, w)| {
            center_window(w)
                .and_then(|cw| extractor.extract(&cw))
                .map(|f| f.top_right_singular_vector)
                .map_err(|e| DriftError::Window {
                    index: k + 1,
                    start: w.start,
                    source: Box::new(e),
                })
        })
        .collect::<Result<Vec<_>>>()?;
    let starts = windows.iter().map(|w| w.start).collect();
    RepresentationTrajectory::from_unit_directions(directions, starts, Some(*spec))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepRecord {
    /// 1-based step k, between directions k and k+1.
    pub index: usize,
    /// 0-based source row of direction k.
    pub window_start: usize,
    pub dot: f64,
    pub distances: StepDistances,
    pub flip: bool,
}

pub fn compute_steps(traj: &RepresentationTrajectory) -> Result<Vec<StepRecord>> {
    if traj.len() < 2 {
        return Err(DriftError::TrajectoryTooShort { len: traj.len() });
    }
    traj.directions
        .windows(2)
        .enumerate()
        .map(|(k, pair)| {
            let distances = step_distances(&pair[0], &pair[1])?;
            Ok(StepRecord {
                index: k + 1,
                window_start: traj.window_starts[k],
                dot: distances.dot,
                distances,
                flip: distances.dot < 0.0,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftReport {
    pub steps: Vec<StepRecord>,
    pub cum_e: Vec<f64>,
    pub cum_c: Vec<f64>,
    pub cum_fs: Vec<f64>,
    pub gauge_diff: Vec<f64>,
    pub log_ratio: Vec<f64>,
    pub epsilon: f64,
    pub flip_count: usize,
}

impl DriftReport {
    /// Stepwise `d_c - d_fs`, the paired differences for the sign test.
    pub fn paired_differences(&self) -> Vec<f64> {
        self.steps
            .iter()
            .map(|s| s.distances.gauge_excess())
            .collect()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn total_e(&self) -> f64 {
        self.cum_e.last().copied().unwrap_or(0.0)
    }

    pub fn total_c(&self) -> f64 {
        self.cum_c.last().copied().unwrap_or(0.0)
    }

    pub fn total_fs(&self) -> f64 {
        self.cum_fs.last().copied().unwrap_or(0.0)
    }

    pub fn total_gauge_diff(&self) -> f64 {
        self.gauge_diff.last().copied().unwrap_or(0.0)
    }
}

pub fn drift_report(steps: &[StepRecord], epsilon: f64) -> Result<DriftReport> {
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(DriftError::InvalidEpsilon(epsilon));
    }
    let pick =
        |f: fn(&StepDistances) -> f64| steps.iter().map(|s| f(&s.distances)).collect::<Vec<_>>();
    let cum_e = cumulative_drift(&pick(|d| d.d_e))?;
    let cum_c = cumulative_drift(&pick(|d| d.d_c))?;
    let cum_fs = cumulative_drift(&pick(|d| d.d_fs))?;
    // Summing the per-step excess keeps the series monotone in floating point.
    let gauge_diff = cumulative_drift(&pick(|d| d.gauge_excess().max(0.0)))?;
    let log_ratio = cum_e
        .iter()
        .zip(&cum_fs)
        .map(|(e, fs)| ((e + epsilon) / (fs + epsilon)).log10())
        .collect();
    Ok(DriftReport {
        steps: steps.to_vec(),
        cum_e,
        cum_c,
        cum_fs,
        gauge_diff,
        log_ratio,
        epsilon,
        flip_count: steps.iter().filter(|s| s.flip).count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::flip_excess;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn matrix(n: usize, d: usize) -> FeatureMatrix {
        let data = (0..n * d).map(|i| ((i * 7919) % 101) as f64).collect();
        FeatureMatrix::new(n, d, data).unwrap()
    }

    fn two_step(dot: f64) -> RepresentationTrajectory {
        let s = (1.0 - dot * dot).sqrt();
        RepresentationTrajectory::from_unit_directions(
            vec![vec![1.0, 0.0], vec![dot, s]],
            vec![0, 1],
            None,
        )
        .unwrap()
    }

    #[test]
    fn window_starts_follow_step() {
        let x = matrix(10, 3);
        let w = build_windows(&x, &WindowSpec::new(4, 3)).unwrap();
        assert_eq!(w.iter().map(|w| w.start).collect::<Vec<_>>(), vec![0, 3, 6]);
        assert!(w.iter().all(|w| w.rows == 4));
    }

    #[test]
    fn full_length_window() {
        let x = matrix(10, 3);
        for s in [1, 5, 100] {
            assert_eq!(build_windows(&x, &WindowSpec::new(10, s)).unwrap().len(), 1);
        }
    }

    #[test]
    fn digits_shaped_window_count() {
        assert_eq!(WindowSpec::new(64, 55).window_count(1797).unwrap(), 32);
    }

    #[test]
    fn invalid_specs() {
        let x = matrix(10, 3);
        for spec in [
            WindowSpec::new(11, 1),
            WindowSpec::new(1, 1),
            WindowSpec::new(4, 0),
        ] {
            assert!(matches!(
                build_windows(&x, &spec),
                Err(DriftError::InvalidSpec(_))
            ));
        }
    }

    #[test]
    fn collinear_rows_give_parallel_directions() {
        // Rows a_i·u + b: every window lies on the same line.
        let u = [0.2, -0.7, 0.4, 1.1];
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|i| {
                let a = ((i * 37) % 11) as f64 - 5.0;
                u.iter()
                    .enumerate()
                    .map(|(j, x)| a * x + j as f64)
                    .collect()
            })
            .collect();
        let x = FeatureMatrix::from_rows(&rows).unwrap();
        let traj = build_trajectory(&x, &WindowSpec::new(8, 3)).unwrap();
        let steps = compute_steps(&traj).unwrap();
        assert!(steps.iter().all(|s| (s.dot.abs() - 1.0).abs() < 1e-8));
    }

    #[test]
    fn single_window_has_no_steps() {
        let x = matrix(12, 3);
        let traj = build_trajectory(&x, &WindowSpec::new(12, 4)).unwrap();
        assert_eq!(traj.len(), 1);
        assert!(matches!(
            compute_steps(&traj),
            Err(DriftError::TrajectoryTooShort { len: 1 })
        ));
    }

    #[test]
    fn zero_variance_window_is_located() {
        let mut rows = vec![vec![1.0, 2.0]; 6];
        rows.extend((0..6).map(|i| vec![i as f64, (i * i) as f64]));
        let x = FeatureMatrix::from_rows(&rows).unwrap();
        match build_trajectory(&x, &WindowSpec::new(4, 4)) {
            Err(DriftError::Window {
                index: 1,
                start: 0,
                source,
            }) => {
                assert!(matches!(*source, DriftError::ZeroVarianceWindow { .. }))
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn step_examples() {
        let s = compute_steps(&two_step(-0.2)).unwrap()[0];
        assert!(s.flip);
        assert!((s.distances.d_c - (-0.2f64).acos()).abs() < 1e-12);
        assert!((s.distances.d_c - 1.7721542476).abs() < 1e-9);
        assert!((s.distances.d_fs - 1.3694384060).abs() < 1e-9);

        let s = compute_steps(&two_step(0.9)).unwrap()[0];
        assert!(!s.flip);
        assert_eq!(s.distances.d_c, s.distances.d_fs);
        assert!((s.distances.d_c - 0.4510268118).abs() < 1e-9);

        let s = compute_steps(&two_step(1.0)).unwrap()[0];
        assert_eq!(
            (
                s.dot,
                s.distances.d_e,
                s.distances.d_c,
                s.distances.d_fs,
                s.flip
            ),
            (1.0, 0.0, 0.0, 0.0, false)
        );
    }

    #[test]
    fn orthogonal_step_is_not_a_flip() {
        let s = compute_steps(&two_step(0.0)).unwrap()[0];
        assert!(!s.flip);
        assert_eq!(s.distances.gauge_excess(), 0.0);
    }

    #[test]
    fn report_examples() {
        let traj = RepresentationTrajectory::from_unit_directions(
            vec![vec![1.0, 0.0], vec![0.8, 0.6], vec![0.6, 0.8]],
            vec![0, 1, 2],
            None,
        )
        .unwrap();
        let r = drift_report(&compute_steps(&traj).unwrap(), DEFAULT_EPSILON).unwrap();
        assert_eq!(r.cum_c, r.cum_fs);
        assert!(r.gauge_diff.iter().all(|&g| g == 0.0));
        assert_eq!(r.flip_count, 0);

        let r = drift_report(&compute_steps(&two_step(-1.0)).unwrap(), DEFAULT_EPSILON).unwrap();
        assert_eq!(r.steps[0].distances.d_c, PI);
        assert_eq!(r.steps[0].distances.d_fs, 0.0);
        assert_eq!(r.gauge_diff[0], PI);
        assert_eq!(r.flip_count, 1);
    }

    #[test]
    fn log_ratio_scalar() {
        let step = |d_e, d_fs| StepRecord {
            index: 1,
            window_start: 0,
            dot: 0.5,
            distances: StepDistances {
                d_e,
                d_c: d_fs,
                d_fs,
                dot: 0.5,
            },
            flip: false,
        };
        let r = drift_report(&[step(10.0, 1.0)], 1e-12).unwrap();
        assert!((r.log_ratio[0] - 1.0).abs() < 1e-9);
        assert!(matches!(
            drift_report(&[], 0.0),
            Err(DriftError::InvalidEpsilon(_))
        ));
    }

    fn random_trajectory() -> impl Strategy<Value = RepresentationTrajectory> {
        (2usize..6, 2usize..20).prop_flat_map(|(d, t)| {
            prop::collection::vec(prop::collection::vec(-1.0f64..1.0, d), t).prop_filter_map(
                "zero",
                |rows| {
                    let dirs: Option<Vec<_>> = rows.iter().map(|r| normalize(r).ok()).collect();
                    let dirs = dirs?;
                    let n = dirs.len();
                    RepresentationTrajectory::from_unit_directions(dirs, (0..n).collect(), None)
                        .ok()
                },
            )
        })
    }

    proptest! {
        #[test]
        fn sign_assignment_leaves_fs_unchanged(traj in random_trajectory(), seed in any::<u64>()) {
            let signs: Vec<bool> = (0..traj.len()).map(|k| (seed >> (k % 64)) & 1 == 1).collect();
            let base = drift_report(&compute_steps(&traj).unwrap(), DEFAULT_EPSILON).unwrap();
            let flipped = drift_report(&compute_steps(&traj.with_signs(&signs)).unwrap(), DEFAULT_EPSILON).unwrap();
            prop_assert_eq!(&base.cum_fs, &flipped.cum_fs);
        }

        #[test]
        fn gauge_diff_decomposes(traj in random_trajectory()) {
            let r = drift_report(&compute_steps(&traj).unwrap(), DEFAULT_EPSILON).unwrap();
            prop_assert!(r.gauge_diff.windows(2).all(|w| w[1] >= w[0]));
            prop_assert!(r.gauge_diff.iter().all(|&g| g >= 0.0));
            for n in 0..r.len() {
                prop_assert!((r.gauge_diff[n] - (r.cum_c[n] - r.cum_fs[n])).abs() < 1e-12);
            }
            let predicted: f64 = r.steps.iter().filter(|s| s.flip).map(|s| flip_excess(s.dot)).sum();
            prop_assert!((r.total_gauge_diff() - predicted).abs() < 1e-10);
            prop_assert_eq!(r.flip_count, r.steps.iter().filter(|s| s.flip).count());
        }

        #[test]
        fn aligned_signs_remove_gauge_drift(traj in random_trajectory()) {
            // Propagate signs so every consecutive dot is >= 0.
            let mut signs = vec![false; traj.len()];
            for k in 1..traj.len() {
                let raw = crate::linalg::dot(&traj.directions[k - 1], &traj.directions[k]);
                signs[k] = signs[k - 1] ^ (raw < 0.0);
            }
            let aligned = traj.with_signs(&signs);
            let a = drift_report(&compute_steps(&aligned).unwrap(), DEFAULT_EPSILON).unwrap();
            let raw = drift_report(&compute_steps(&traj).unwrap(), DEFAULT_EPSILON).unwrap();
            for n in 0..a.len() {
                prop_assert!((a.cum_c[n] - a.cum_fs[n]).abs() < 1e-12);
            }
            prop_assert_eq!(a.cum_fs, raw.cum_fs);
        }
    }
}
