//! Dense vector helpers, window centering and leading principal direction.
//!
//! Everything here is small (D <= a few hundred) and runs in plain `f64`
//! loops with a fixed summation order so results are bit-reproducible.

use crate::error::{DriftError, Result};
use crate::ingest::{validate_matrix, ValidationSummary};

/// Norms below this are treated as a degenerate (zero) representation.
pub const ZERO_NORM: f64 = 1e-300;
/// Entries of a centered window below this magnitude count as zero.
pub const ZERO_VARIANCE: f64 = 1e-12;
/// Defaults for power iteration.
pub const DEFAULT_PC1_TOL: f64 = 1e-12;
pub const DEFAULT_PC1_MAX_ITERS: usize = 10_000;
/// Relative spectral gap under which the leading eigenvalue counts as tied.
pub const DEGENERATE_GAP: f64 = 1e-10;

/// N x D matrix of observations, row-major, all entries finite.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        validate_matrix(rows, cols, &data)?;
        Ok(FeatureMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(DriftError::RaggedRows {
                    row: i + 1,
                    expected: cols,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        FeatureMatrix::new(rows.len(), cols, data)
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.cols)
    }

    /// Borrow `len` consecutive rows starting at `start`.
    pub fn window(&self, start: usize, len: usize) -> WindowView<'_> {
        assert!(start + len <= self.rows, "window exceeds matrix");
        WindowView {
            start,
            rows: len,
            cols: self.cols,
            data: &self.data[start * self.cols..(start + len) * self.cols],
        }
    }

    pub fn summary(&self) -> ValidationSummary {
        validate_matrix(self.rows, self.cols, &self.data)
            .expect("invariant: validated at construction")
    }
}

/// A borrowed block of contiguous rows.
#[derive(Debug, Clone, Copy)]
pub struct WindowView<'a> {
    pub start: usize,
    pub rows: usize,
    pub cols: usize,
    pub data: &'a [f64],
}

impl<'a> WindowView<'a> {
    pub fn row(&self, i: usize) -> &'a [f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CenteredWindow {
    /// W x D row-major, column means zero.
    pub rows: Vec<f64>,
    pub mean: Vec<f64>,
    pub origin_index: usize,
    pub nrows: usize,
    pub ncols: usize,
}

impl CenteredWindow {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.ncols..(i + 1) * self.ncols]
    }

    /// Negate every centered entry. The mean is kept.
    pub fn negated(&self) -> CenteredWindow {
        CenteredWindow {
            rows: self.rows.iter().map(|x| -x).collect(),
            ..self.clone()
        }
    }

    /// Population covariance `rowsᵀ rows / W`, row-major D x D.
    pub fn covariance(&self) -> Vec<f64> {
        let d = self.ncols;
        let mut cov = vec![0.0; d * d];
        for i in 0..self.nrows {
            let r = self.row(i);
            for a in 0..d {
                let ra = r[a];
                if ra == 0.0 {
                    continue;
                }
                for b in a..d {
                    cov[a * d + b] += ra * r[b];
                }
            }
        }
        let w = self.nrows as f64;
        for a in 0..d {
            for b in a..d {
                let v = cov[a * d + b] / w;
                cov[a * d + b] = v;
                cov[b * d + a] = v;
            }
        }
        cov
    }
}

/// Leading right singular vector of a centered window.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdFactors {
    pub top_right_singular_vector: Vec<f64>,
    pub top_singular_value: f64,
    pub iterations: usize,
}

pub fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

fn check_dims(u: &[f64], v: &[f64]) -> Result<()> {
    if u.len() != v.len() {
        return Err(DriftError::DimensionMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    Ok(())
}

/// Euclidean norm, rescaled by the max entry so it neither overflows nor
/// underflows for any finite input.
pub fn norm(v: &[f64]) -> f64 {
    let scale = max_abs(v);
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    scale
        * v.iter()
            .map(|x| (x / scale) * (x / scale))
            .sum::<f64>()
            .sqrt()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

pub fn normalize(v: &[f64]) -> Result<Vec<f64>> {
    let scale = max_abs(v);
    let n = norm(v);
    if !n.is_finite() || n < ZERO_NORM {
        return Err(DriftError::ZeroVector { norm: n });
    }
    let s = n / scale;
    Ok(v.iter().map(|x| (x / scale) / s).collect())
}

pub fn sub(u: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    check_dims(u, v)?;
    Ok(u.iter().zip(v).map(|(a, b)| a - b).collect())
}

pub(crate) fn require_same_dims(u: &[f64], v: &[f64]) -> Result<()> {
    check_dims(u, v)
}

pub fn center_window(w: &WindowView<'_>) -> Result<CenteredWindow> {
    if w.rows < 2 {
        return Err(DriftError::WindowTooSmall { rows: w.rows });
    }
    let d = w.cols;
    let mut mean = vec![0.0; d];
    for i in 0..w.rows {
        for (m, x) in mean.iter_mut().zip(w.row(i)) {
            *m += x;
        }
    }
    let n = w.rows as f64;
    for m in &mut mean {
        *m /= n;
    }
    let mut rows = Vec::with_capacity(w.rows * d);
    for i in 0..w.rows {
        rows.extend(w.row(i).iter().zip(&mean).map(|(x, m)| x - m));
    }
    Ok(CenteredWindow {
        rows,
        mean,
        origin_index: w.start,
        nrows: w.rows,
        ncols: d,
    })
}

fn mat_vec(m: &[f64], d: usize, v: &[f64], out: &mut [f64]) {
    for (a, o) in out.iter_mut().enumerate() {
        *o = dot(&m[a * d..(a + 1) * d], v);
    }
}

fn rayleigh(m: &[f64], d: usize, v: &[f64]) -> f64 {
    let mut mv = vec![0.0; d];
    mat_vec(m, d, v, &mut mv);
    dot(v, &mv)
}

/// Strategy for extracting the first principal direction of a window.
pub trait Pc1Extractor: Send + Sync {
    fn name(&self) -> &'static str;
    /// Stable identifier of the sign convention, echoed into reports.
    fn sign_convention(&self) -> &'static str;
    fn extract(&self, window: &CenteredWindow) -> Result<SvdFactors>;
}

/// Power iteration on the window covariance from the normalized all-ones
/// start vector. The converged sign is `sign(<v1, 1>)`, i.e. window-local.
#[derive(Debug, Clone, Copy)]
pub struct PowerIteration {
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for PowerIteration {
    fn default() -> Self {
        PowerIteration {
            tol: DEFAULT_PC1_TOL,
            max_iters: DEFAULT_PC1_MAX_ITERS,
        }
    }
}

impl Pc1Extractor for PowerIteration {
    fn name(&self) -> &'static str {
        "power-iteration"
    }

    fn sign_convention(&self) -> &'static str {
        "power-iteration/ones-start/e1-fallback: sign follows <v1, start>, no cross-window alignment"
    }

    fn extract(&self, window: &CenteredWindow) -> Result<SvdFactors> {
        extract_pc1(window, self.tol, self.max_iters)
    }
}

pub fn extract_pc1(cw: &CenteredWindow, tol: f64, max_iters: usize) -> Result<SvdFactors> {
    let peak = max_abs(&cw.rows);
    if peak < ZERO_VARIANCE {
        return Err(DriftError::ZeroVarianceWindow { max_abs: peak });
    }
    let d = cw.ncols;
    let cov = cw.covariance();
    let cov_scale = norm(&cov);
    let collapse = 1e-12 * cov_scale;

    let mut v = vec![1.0 / (d as f64).sqrt(); d];
    let mut w = vec![0.0; d];
    mat_vec(&cov, d, &v, &mut w);
    if norm(&w) < collapse {
        v.iter_mut().for_each(|x| *x = 0.0);
        v[0] = 1.0;
    }

    let mut last_delta = f64::INFINITY;
    let mut converged_at = None;
    for iter in 1..=max_iters {
        mat_vec(&cov, d, &v, &mut w);
        let n = norm(&w);
        if n < collapse {
            return Err(DriftError::NoConvergence {
                iterations: iter,
                last_delta,
                lambda1: rayleigh(&cov, d, &v),
                lambda2: f64::NAN,
                reason: "iterate collapsed into the null space",
            });
        }
        let mut delta_sq = 0.0;
        for (vi, wi) in v.iter_mut().zip(&w) {
            let next = wi / n;
            delta_sq += (next - *vi) * (next - *vi);
            *vi = next;
        }
        last_delta = delta_sq.sqrt();
        if last_delta < tol {
            converged_at = Some(iter);
            break;
        }
    }

    // Renormalize once more so the unit-norm invariant holds to the last ulp.
    let v = normalize(&v)?;
    let lambda1 = rayleigh(&cov, d, &v);
    let lambda2 = second_eigenvalue_estimate(&cov, d, &v, lambda1);
    let iterations = match converged_at {
        Some(it) => it,
        None => {
            return Err(DriftError::NoConvergence {
                iterations: max_iters,
                last_delta,
                lambda1,
                lambda2,
                reason: "iteration budget exhausted",
            })
        }
    };
    if lambda1 - lambda2 <= DEGENERATE_GAP * lambda1 {
        return Err(DriftError::NoConvergence {
            iterations,
            last_delta,
            lambda1,
            lambda2,
            reason: "leading eigenvalue is degenerate",
        });
    }
    Ok(SvdFactors {
        top_right_singular_vector: v,
        top_singular_value: (lambda1.max(0.0) * cw.nrows as f64).sqrt(),
        iterations,
    })
}

/// Lower bound on the second eigenvalue via a short deflated power run.
fn second_eigenvalue_estimate(cov: &[f64], d: usize, v1: &[f64], lambda1: f64) -> f64 {
    if d < 2 {
        return 0.0;
    }
    let mut deflated = cov.to_vec();
    for a in 0..d {
        for b in 0..d {
            deflated[a * d + b] -= lambda1 * v1[a] * v1[b];
        }
    }
    // Start from the coordinate axis least aligned with v1.
    let axis = (0..d)
        .min_by(|&a, &b| v1[a].abs().total_cmp(&v1[b].abs()))
        .unwrap_or(0);
    let mut u = vec![0.0; d];
    u[axis] = 1.0;
    let mut best = 0.0_f64;
    let mut w = vec![0.0; d];
    for _ in 0..500 {
        let proj = dot(&u, v1);
        u.iter_mut().zip(v1).for_each(|(x, y)| *x -= proj * y);
        let Ok(unit) = normalize(&u) else { break };
        u = unit;
        best = best.max(rayleigh(&deflated, d, &u));
        mat_vec(&deflated, d, &u, &mut w);
        std::mem::swap(&mut u, &mut w);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, SymmetricEigen};
    use proptest::prelude::*;

    fn centered(rows: &[Vec<f64>]) -> CenteredWindow {
        let m = FeatureMatrix::from_rows(rows).unwrap();
        center_window(&m.window(0, m.nrows())).unwrap()
    }

    /// Dense eigensolver oracle on the covariance.
    fn oracle_pc1(cw: &CenteredWindow) -> Vec<f64> {
        let d = cw.ncols;
        let x = DMatrix::from_row_slice(cw.nrows, d, &cw.rows);
        let cov = x.transpose() * &x / cw.nrows as f64;
        let eig = SymmetricEigen::new(cov);
        let (imax, _) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        eig.eigenvectors.column(imax).iter().copied().collect()
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize(&[3.0, 4.0]).unwrap(), vec![0.6, 0.8]);
        assert!(matches!(
            normalize(&[0.0, 0.0]),
            Err(DriftError::ZeroVector { .. })
        ));
        assert_eq!(normalize(&[1.0, 0.0, 0.0]).unwrap(), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn normalize_extreme_magnitudes() {
        let big = normalize(&[1e300, 1e300]).unwrap();
        assert!((norm(&big) - 1.0).abs() < 1e-12);
        let tiny = normalize(&[3e-200, 4e-200]).unwrap();
        assert!((tiny[0] - 0.6).abs() < 1e-12);
    }

    #[test]
    fn center_symmetric_pair() {
        let cw = centered(&[vec![1.0, 1.0], vec![3.0, 3.0]]);
        assert_eq!(cw.mean, vec![2.0, 2.0]);
        assert_eq!(cw.rows, vec![-1.0, -1.0, 1.0, 1.0]);
    }

    #[test]
    fn center_identical_rows_is_zero() {
        let cw = centered(&[vec![5.0, -2.0], vec![5.0, -2.0], vec![5.0, -2.0]]);
        assert!(cw.rows.iter().all(|&x| x == 0.0));
        assert!(matches!(
            extract_pc1(&cw, DEFAULT_PC1_TOL, DEFAULT_PC1_MAX_ITERS),
            Err(DriftError::ZeroVarianceWindow { .. })
        ));
    }

    #[test]
    fn center_rejects_single_row() {
        let m = FeatureMatrix::from_rows(&[vec![1.0, 2.0]]).unwrap();
        assert!(matches!(
            center_window(&m.window(0, 1)),
            Err(DriftError::WindowTooSmall { rows: 1 })
        ));
    }

    #[test]
    fn center_random_window_column_sums() {
        let cw = centered(&[vec![0.3, -1.7], vec![2.9, 0.11], vec![-4.25, 8.0]]);
        for c in 0..2 {
            let s: f64 = (0..3).map(|r| cw.row(r)[c]).sum();
            assert!(s.abs() < 1e-10);
        }
    }

    #[test]
    fn pc1_on_diagonal_line() {
        // Covariance [[a, a], [a, a]]: eigenvectors [1,1]/√2 (λ=2a) and [1,-1]/√2 (λ=0).
        let cw = centered(&[
            vec![-2.0, -2.0],
            vec![-1.0, -1.0],
            vec![1.0, 1.0],
            vec![2.0, 2.0],
        ]);
        let f = extract_pc1(&cw, DEFAULT_PC1_TOL, DEFAULT_PC1_MAX_ITERS).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for (x, e) in f.top_right_singular_vector.iter().zip([h, h]) {
            assert!((x - e).abs() < 1e-12);
        }
        // σ1² = Σ‖row‖² = 2·(8 + 2)
        assert!((f.top_singular_value - 20f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn pc1_dominant_axis_matches_eigensolver() {
        let cw = centered(&[
            vec![10.0, 0.3, -0.2],
            vec![-7.5, 0.1, 0.4],
            vec![3.2, -0.5, 0.0],
            vec![-9.1, 0.2, -0.3],
            vec![4.4, 0.6, 0.1],
        ]);
        let f = extract_pc1(&cw, DEFAULT_PC1_TOL, DEFAULT_PC1_MAX_ITERS).unwrap();
        let o = oracle_pc1(&cw);
        assert!((dot(&f.top_right_singular_vector, &o).abs() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn pc1_degenerate_leading_eigenvalue() {
        // Isotropic in the plane: covariance is a multiple of the identity.
        let cw = centered(&[
            vec![1.0, 0.0],
            vec![-1.0, 0.0],
            vec![0.0, 1.0],
            vec![0.0, -1.0],
        ]);
        let err = extract_pc1(&cw, DEFAULT_PC1_TOL, DEFAULT_PC1_MAX_ITERS).unwrap_err();
        assert!(matches!(err, DriftError::NoConvergence { .. }), "{err}");
    }

    #[test]
    fn pc1_iteration_budget() {
        let cw = centered(&[
            vec![3.0, 0.1],
            vec![-3.0, 0.4],
            vec![0.5, -2.9],
            vec![-0.5, 2.4],
        ]);
        assert!(matches!(
            extract_pc1(&cw, DEFAULT_PC1_TOL, 2),
            Err(DriftError::NoConvergence { iterations: 2, .. })
        ));
    }

    #[test]
    fn pc1_falls_back_to_e1() {
        // Data along [1,-1]: the ones start vector lies in the null space.
        let cw = centered(&[vec![1.0, -1.0], vec![-1.0, 1.0], vec![2.0, -2.0]]);
        let f = extract_pc1(&cw, DEFAULT_PC1_TOL, DEFAULT_PC1_MAX_ITERS).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((f.top_right_singular_vector[0] - h).abs() < 1e-12);
        assert!((f.top_right_singular_vector[1] + h).abs() < 1e-12);
    }

    fn window_strategy() -> impl Strategy<Value = Vec<Vec<f64>>> {
        (3usize..12, 2usize..6).prop_flat_map(|(w, d)| {
            // One stretched axis keeps the spectrum well separated.
            prop::collection::vec(prop::collection::vec(-1.0f64..1.0, d), w).prop_map(
                move |mut rows| {
                    for r in &mut rows {
                        r[0] *= 6.0;
                    }
                    rows
                },
            )
        })
    }

    proptest! {
        #[test]
        fn pc1_maximizes_variance(rows in window_strategy(), dirs in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 6), 100)) {
            let cw = centered(&rows);
            let f = match extract_pc1(&cw, DEFAULT_PC1_TOL, DEFAULT_PC1_MAX_ITERS) {
                Ok(f) => f,
                Err(DriftError::NoConvergence { .. }) => return Ok(()),
                Err(e) => return Err(TestCaseError::fail(e.to_string())),
            };
            let v = &f.top_right_singular_vector;
            prop_assert!((norm(v) - 1.0).abs() < 1e-10);
            let cov = cw.covariance();
            let best = rayleigh(&cov, cw.ncols, v);
            for u in dirs {
                let Ok(u) = normalize(&u[..cw.ncols]) else { continue };
                prop_assert!(rayleigh(&cov, cw.ncols, &u) <= best + 1e-9);
            }
        }

        #[test]
        fn pc1_span_invariant_under_negation(rows in window_strategy()) {
            let cw = centered(&rows);
            if let Ok(a) = extract_pc1(&cw, DEFAULT_PC1_TOL, DEFAULT_PC1_MAX_ITERS) {
                let b = extract_pc1(&cw.negated(), DEFAULT_PC1_TOL, DEFAULT_PC1_MAX_ITERS).unwrap();
                prop_assert!((dot(&a.top_right_singular_vector, &b.top_right_singular_vector).abs() - 1.0).abs() < 1e-8);
                let again = extract_pc1(&cw, DEFAULT_PC1_TOL, DEFAULT_PC1_MAX_ITERS).unwrap();
                prop_assert_eq!(a, again);
            }
        }
    }
}
