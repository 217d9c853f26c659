//! Embedded invariant checks run by `projdrift selftest`.
//!
//! Distance checks go through a [`MetricRegistry`], so a replaced or broken
//! metric implementation is caught here.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use crate::error::Result;
use crate::linalg::{
    center_window, extract_pc1, FeatureMatrix, DEFAULT_PC1_MAX_ITERS, DEFAULT_PC1_TOL,
};
use crate::metrics::{flip_excess, Invariance, MetricRegistry};
use crate::stats::sign_test_p_value;
use crate::synth::{generate_smooth_trajectory, inject_flips, SplitMix64, SynthSpec};
use crate::trajectory::{
    compute_steps, drift_report, DriftReport, RepresentationTrajectory, DEFAULT_EPSILON,
};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelftestReport {
    pub checks: Vec<CheckOutcome>,
}

impl SelftestReport {
    pub fn passed(&self) -> usize {
        self.checks.iter().filter(|c| c.passed).count()
    }

    pub fn failed(&self) -> usize {
        self.checks.len() - self.passed()
    }

    pub fn all_passed(&self) -> bool {
        self.failed() == 0
    }

    pub fn check(&self, name: &str) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn outcome(
    name: &'static str,
    result: Result<std::result::Result<String, String>>,
) -> CheckOutcome {
    match result {
        Ok(Ok(detail)) => CheckOutcome {
            name,
            passed: true,
            detail,
        },
        Ok(Err(detail)) => CheckOutcome {
            name,
            passed: false,
            detail,
        },
        Err(e) => CheckOutcome {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn random_pair(rng: &mut SplitMix64, d: usize) -> (Vec<f64>, Vec<f64>) {
    (rng.gaussian_vec(d), rng.gaussian_vec(d))
}

fn report_for(traj: &RepresentationTrajectory) -> Result<DriftReport> {
    drift_report(&compute_steps(traj)?, DEFAULT_EPSILON)
}

type Check = Result<std::result::Result<String, String>>;

fn gauge_identity(registry: &MetricRegistry, rng: &mut SplitMix64) -> Check {
    let cos = registry.get("cosine")?;
    let fs = registry.get("fubini-study")?;
    let mut worst = 0.0f64;
    for d in [2, 8, 64] {
        for _ in 0..5000 {
            let (u, v) = random_pair(rng, d);
            let c = cos.distance(&u, &v)?;
            worst = worst.max((fs.distance(&u, &v)? - c.min(PI - c)).abs());
        }
    }
    Ok(if worst <= 1e-12 {
        Ok(format!("max |d_fs - min(d_c, pi - d_c)| = {worst:.3e}"))
    } else {
        Err(format!("gauge identity violated by {worst:.3e}"))
    })
}

fn sign_invariance(registry: &MetricRegistry, rng: &mut SplitMix64) -> Check {
    let fs = registry.get("fubini-study")?;
    for _ in 0..5000 {
        let (u, v) = random_pair(rng, 8);
        let neg: Vec<f64> = u.iter().map(|x| -x).collect();
        let base = fs.distance(&u, &v)?;
        if fs.distance(&neg, &v)? != base || fs.distance(&v, &neg)? != base {
            return Ok(Err("fubini-study changed under a sign flip".into()));
        }
    }
    Ok(Ok("5000 pairs, exact".into()))
}

fn scale_invariance(registry: &MetricRegistry, rng: &mut SplitMix64) -> Check {
    let mut checked = Vec::new();
    for metric in registry.iter() {
        let allow_negative = match metric.invariance() {
            Invariance::None => continue,
            Invariance::PositiveScale => false,
            Invariance::NonZeroScale => true,
        };
        for _ in 0..2000 {
            let (u, v) = random_pair(rng, 8);
            let mut lambda = (rng.next_f64() * 2.0 - 1.0) * 1e6;
            if !allow_negative {
                lambda = lambda.abs();
            }
            if lambda.abs() < 1e-3 {
                continue;
            }
            let scaled: Vec<f64> = u.iter().map(|x| lambda * x).collect();
            let err = (metric.distance(&scaled, &v)? - metric.distance(&u, &v)?).abs();
            if err > 1e-10 {
                return Ok(Err(format!(
                    "{} moved by {err:.3e} under scaling by {lambda}",
                    metric.name()
                )));
            }
        }
        checked.push(metric.name());
    }
    Ok(Ok(format!("checked {}", checked.join(", "))))
}

fn triangle(registry: &MetricRegistry, rng: &mut SplitMix64) -> Check {
    let fs = registry.get("fubini-study")?;
    for _ in 0..10_000 {
        let a = rng.gaussian_vec(4);
        let b = rng.gaussian_vec(4);
        let c = rng.gaussian_vec(4);
        let (ab, bc, ac) = (
            fs.distance(&a, &b)?,
            fs.distance(&b, &c)?,
            fs.distance(&a, &c)?,
        );
        if ac > ab + bc + 1e-12 || ab != fs.distance(&b, &a)? {
            return Ok(Err(format!("metric axiom violated: {ac} > {ab} + {bc}")));
        }
    }
    Ok(Ok("10000 triples".into()))
}

fn synth_spec(rng: &mut SplitMix64) -> SynthSpec {
    SynthSpec {
        dimension: 2 + (rng.next_u64() % 30) as usize,
        length: 2 + (rng.next_u64() % 30) as usize,
        step_angle: rng.next_f64() * 1.5,
        flip_indices: BTreeSet::new(),
        seed: rng.next_u64(),
    }
}

fn trajectory_gauge(rng: &mut SplitMix64) -> Check {
    for _ in 0..200 {
        let spec = synth_spec(rng);
        let clean = generate_smooth_trajectory(&spec)?;
        let signs: Vec<bool> = (0..clean.len()).map(|_| rng.next_u64() & 1 == 1).collect();
        let flipped = clean.with_signs(&signs);
        let (a, b) = (report_for(&clean)?, report_for(&flipped)?);
        if a.cum_fs != b.cum_fs {
            return Ok(Err(
                "cumulative Fubini–Study drift changed under sign assignment".into(),
            ));
        }
        if a.cum_c != a.cum_fs {
            return Ok(Err(
                "cosine and Fubini–Study drift differ on a flip-free trajectory".into(),
            ));
        }
    }
    Ok(Ok("200 trajectories".into()))
}

fn flip_decomposition(rng: &mut SplitMix64) -> Check {
    for _ in 0..200 {
        let spec = synth_spec(rng);
        let t = spec.length;
        let flips: BTreeSet<usize> = (1..=t)
            .filter(|_| rng.next_u64().is_multiple_of(3))
            .collect();
        let traj = inject_flips(&generate_smooth_trajectory(&spec)?, &flips)?;
        let r = report_for(&traj)?;
        let predicted: f64 = r
            .steps
            .iter()
            .filter(|s| s.flip)
            .map(|s| flip_excess(s.dot))
            .sum();
        let err = (r.total_gauge_diff() - predicted).abs();
        if err > 1e-10 {
            return Ok(Err(format!("gauge difference off by {err:.3e}")));
        }
        if r.gauge_diff.windows(2).any(|w| w[1] < w[0]) || r.gauge_diff.iter().any(|&g| g < 0.0) {
            return Ok(Err("gauge difference not monotone".into()));
        }
    }
    Ok(Ok("200 trajectories".into()))
}

fn sign_test_exactness() -> Check {
    for n in 1..=16u64 {
        let total = 1u64 << n;
        let mut counts = vec![0u64; n as usize + 1];
        for p in 0..total {
            counts[p.count_ones() as usize] += 1;
        }
        for k in 0..=n {
            let lo: u64 = counts[..=k as usize].iter().sum();
            let hi: u64 = counts[k as usize..].iter().sum();
            let expected = (2.0 * lo.min(hi) as f64 / total as f64).min(1.0);
            if (sign_test_p_value(k, n) - expected).abs() > 1e-12 {
                return Ok(Err(format!("p({k} of {n}) disagrees with enumeration")));
            }
        }
    }
    let p = sign_test_p_value(17, 17);
    if p != 0.5f64.powi(16) {
        return Ok(Err(format!("p(17 of 17) = {p}")));
    }
    Ok(Ok(format!("enumeration n <= 16; p(17 of 17) = {p:.6e}")))
}

fn pc1_line() -> Check {
    let x = FeatureMatrix::from_rows(&[
        vec![-2.0, -2.0],
        vec![-1.0, -1.0],
        vec![1.0, 1.0],
        vec![2.0, 2.0],
    ])?;
    let f = extract_pc1(
        &center_window(&x.window(0, 4))?,
        DEFAULT_PC1_TOL,
        DEFAULT_PC1_MAX_ITERS,
    )?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let v = &f.top_right_singular_vector;
    Ok(if (v[0] - h).abs() < 1e-12 && (v[1] - h).abs() < 1e-12 {
        Ok("line y = x gives [1,1]/sqrt 2".into())
    } else {
        Err(format!("unexpected direction {v:?}"))
    })
}

pub fn run_selftest(registry: &MetricRegistry) -> SelftestReport {
    let mut rng = SplitMix64::new(0x5EED_2024);
    let checks = vec![
        outcome("gauge-identity", gauge_identity(registry, &mut rng)),
        outcome("sign-invariance", sign_invariance(registry, &mut rng)),
        outcome("scale-invariance", scale_invariance(registry, &mut rng)),
        outcome("fs-metric-axioms", triangle(registry, &mut rng)),
        outcome("trajectory-gauge-invariance", trajectory_gauge(&mut rng)),
        outcome("flip-excess-decomposition", flip_decomposition(&mut rng)),
        outcome("sign-test-exactness", sign_test_exactness()),
        outcome("pc1-known-line", pc1_line()),
    ];
    SelftestReport { checks }
}
