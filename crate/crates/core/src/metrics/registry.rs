use std::fmt;

use crate::error::{DriftError, Result};

use super::{cosine_distance, euclidean_distance, fubini_study_distance};

/// Rescalings under which a metric's value is unchanged.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Invariance {
    None,
    /// `d(λu, v) = d(u, v)` for `λ > 0`.
    PositiveScale,
    /// `d(λu, v) = d(u, v)` for any `λ != 0`, sign flips included.
    NonZeroScale,
}

pub trait Metric: Send + Sync {
    fn name(&self) -> &'static str;
    /// Unit of the returned value, `"rad"` for angles.
    fn unit(&self) -> &'static str;
    fn invariance(&self) -> Invariance;
    fn distance(&self, u: &[f64], v: &[f64]) -> Result<f64>;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct EuclideanMetric;

impl Metric for EuclideanMetric {
    fn name(&self) -> &'static str {
        "euclidean"
    }
    fn unit(&self) -> &'static str {
        "raw"
    }
    fn invariance(&self) -> Invariance {
        Invariance::None
    }
    fn distance(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        euclidean_distance(u, v)
    }
}

#[derive(Debug, Default, Clone, Copy)]
pub struct CosineMetric;

impl Metric for CosineMetric {
    fn name(&self) -> &'static str {
        "cosine"
    }
    fn unit(&self) -> &'static str {
        "rad"
    }
    fn invariance(&self) -> Invariance {
        Invariance::PositiveScale
    }
    fn distance(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        cosine_distance(u, v)
    }
}

#[derive(Debug, Default, Clone, Copy)]
pub struct FubiniStudyMetric;

impl Metric for FubiniStudyMetric {
    fn name(&self) -> &'static str {
        "fubini-study"
    }
    fn unit(&self) -> &'static str {
        "rad"
    }
    fn invariance(&self) -> Invariance {
        Invariance::NonZeroScale
    }
    fn distance(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        fubini_study_distance(u, v)
    }
}

/// Metrics keyed by name, in registration order.
pub struct MetricRegistry {
    entries: Vec<Box<dyn Metric>>,
}

impl MetricRegistry {
    pub fn empty() -> Self {
        MetricRegistry {
            entries: Vec::new(),
        }
    }

    /// Euclidean, cosine and Fubini–Study.
    pub fn builtin() -> Self {
        let mut r = MetricRegistry::empty();
        r.register(Box::new(EuclideanMetric));
        r.register(Box::new(CosineMetric));
        r.register(Box::new(FubiniStudyMetric));
        r
    }

    /// Adds a metric, replacing any existing entry with the same name.
    pub fn register(&mut self, metric: Box<dyn Metric>) {
        match self.entries.iter_mut().find(|m| m.name() == metric.name()) {
            Some(slot) => *slot = metric,
            None => self.entries.push(metric),
        }
    }

    pub fn get(&self, name: &str) -> Result<&dyn Metric> {
        self.entries
            .iter()
            .find(|m| m.name() == name)
            .map(|m| m.as_ref())
            .ok_or_else(|| DriftError::UnknownMetric(name.to_string()))
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|m| m.name()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn Metric> {
        self.entries.iter().map(|m| m.as_ref())
    }
}

impl Default for MetricRegistry {
    fn default() -> Self {
        MetricRegistry::builtin()
    }
}

impl fmt::Debug for MetricRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.names()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Constant;

    impl Metric for Constant {
        fn name(&self) -> &'static str {
            "cosine"
        }
        fn unit(&self) -> &'static str {
            "rad"
        }
        fn invariance(&self) -> Invariance {
            Invariance::None
        }
        fn distance(&self, _: &[f64], _: &[f64]) -> Result<f64> {
            Ok(1.0)
        }
    }

    #[test]
    fn builtin_lookup() {
        let r = MetricRegistry::builtin();
        assert_eq!(r.names(), vec!["euclidean", "cosine", "fubini-study"]);
        let fs = r.get("fubini-study").unwrap();
        assert_eq!(fs.invariance(), Invariance::NonZeroScale);
        assert_eq!(fs.distance(&[1.0, 0.0], &[-2.0, 0.0]).unwrap(), 0.0);
        assert!(matches!(
            r.get("manhattan"),
            Err(DriftError::UnknownMetric(_))
        ));
    }

    #[test]
    fn register_replaces_by_name() {
        let mut r = MetricRegistry::builtin();
        r.register(Box::new(Constant));
        assert_eq!(r.names().len(), 3);
        assert_eq!(
            r.get("cosine").unwrap().distance(&[1.0], &[2.0]).unwrap(),
            1.0
        );
    }
}
