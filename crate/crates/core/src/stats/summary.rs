use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Arithmetic mean and population standard deviation of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Descriptive<T> {
    pub n: usize,
    pub mean: T,
    pub sd: T,
    pub min: T,
    pub max: T,
}

/// `None` for an empty sample; a single observation has `sd == 0`.
pub fn describe<T: Scalar>(values: &[T]) -> Option<Descriptive<T>> {
    if values.is_empty() {
        return None;
    }
    let n = T::from_count(values.len());
    let mean = values.iter().copied().sum::<T>() / n;
    let var = values.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / n;
    let (min, max) = values
        .iter()
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    // clamp away rounding that can push the mean a hair outside the range
    let mean = mean.max(min).min(max);
    Some(Descriptive { n: values.len(), mean, sd: var.sqrt(), min, max })
}

/// Unweighted mean of per-cluster dominant-theme prevalences.
pub fn average_consistency<I: IntoIterator<Item = f64>>(prevalences: I) -> Option<f64> {
    let (sum, n) = prevalences.into_iter().fold((0.0, 0usize), |(s, n), p| (s + p, n + 1));
    (n > 0).then(|| sum / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_sample() {
        let d = describe(&[10.0f64, 10.0, 10.0]).unwrap();
        assert_eq!(d.mean, 10.0);
        assert_eq!(d.sd, 0.0);
    }

    #[test]
    fn population_sd() {
        let d = describe(&[0.0f64, 10.0]).unwrap();
        assert_eq!(d.mean, 5.0);
        assert_eq!(d.sd, 5.0);
        let one = describe(&[7.0f32]).unwrap();
        assert_eq!(one.sd, 0.0);
        assert!(describe::<f64>(&[]).is_none());
    }

    #[test]
    fn consistency_mean() {
        let v = average_consistency([0.8, 0.6, 1.0]).unwrap();
        assert!((v - 0.8).abs() < 1e-15);
        assert_eq!(average_consistency([1.0]), Some(1.0));
        assert_eq!(average_consistency(std::iter::empty()), None);
    }
}
