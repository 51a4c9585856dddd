//! One-way analysis of variance.

use serde::{Deserialize, Serialize};

use super::special::f_sf;
use super::StatsError;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaResult<T> {
    pub f: T,
    pub df_between: usize,
    pub df_within: usize,
    pub p_value: T,
    pub ss_between: T,
    pub ss_within: T,
    /// Set when the within-group sum of squares is zero but the group means
    /// differ: F is reported as +∞ and p as 0 by convention.
    pub degenerate: bool,
}

/// One-way ANOVA over `groups`, each a sample of observations.
pub fn one_way_anova<T, G>(groups: &[G]) -> Result<AnovaResult<T>, StatsError>
where
    T: Scalar,
    G: AsRef<[T]>,
{
    let g = groups.len();
    if g < 2 {
        return Err(StatsError::Degenerate(format!("ANOVA needs at least 2 groups, got {g}")));
    }
    if groups.iter().any(|grp| grp.as_ref().is_empty()) {
        return Err(StatsError::Empty("an ANOVA group is empty"));
    }
    let total_n: usize = groups.iter().map(|grp| grp.as_ref().len()).sum();
    if total_n <= g {
        return Err(StatsError::Degenerate(format!(
            "ANOVA needs N - g >= 1, got N = {total_n}, g = {g}"
        )));
    }
    if groups.iter().flat_map(|grp| grp.as_ref()).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }

    let grand_mean = groups.iter().flat_map(|grp| grp.as_ref().iter().copied()).sum::<T>()
        / T::from_count(total_n);
    let mut ss_between = T::zero();
    let mut ss_within = T::zero();
    for grp in groups {
        let values = grp.as_ref();
        let n = T::from_count(values.len());
        let mean = values.iter().copied().sum::<T>() / n;
        let d = mean - grand_mean;
        ss_between = ss_between + n * d * d;
        ss_within = ss_within + values.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>();
    }

    let df_between = g - 1;
    let df_within = total_n - g;
    // Relative to the data scale so that rounding residue is not mistaken
    // for signal on the degenerate paths.
    let scale = groups
        .iter()
        .flat_map(|grp| grp.as_ref().iter().map(|&v| (v - grand_mean).abs()))
        .fold(T::zero(), T::max);
    let noise = scale * scale * T::from_count(total_n) * T::EPS * T::lit(16.0);
    if ss_between <= noise {
        ss_between = T::zero();
    }
    if ss_within <= noise {
        if ss_between == T::zero() {
            return Ok(AnovaResult {
                f: T::zero(),
                df_between,
                df_within,
                p_value: T::one(),
                ss_between,
                ss_within: T::zero(),
                degenerate: false,
            });
        }
        log::warn!("ANOVA: zero within-group variance with distinct group means");
        return Ok(AnovaResult {
            f: T::infinity(),
            df_between,
            df_within,
            p_value: T::zero(),
            ss_between,
            ss_within: T::zero(),
            degenerate: true,
        });
    }
    let ms_between = ss_between / T::from_count(df_between);
    let ms_within = ss_within / T::from_count(df_within);
    let f = ms_between / ms_within;
    let p_value = f_sf(f, T::from_count(df_between), T::from_count(df_within));
    Ok(AnovaResult { f, df_between, df_within, p_value, ss_between, ss_within, degenerate: false })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_computed_two_groups() {
        let res: AnovaResult<f64> = one_way_anova(&[vec![1.0, 2.0], vec![5.0, 6.0]]).unwrap();
        assert!((res.ss_between - 16.0).abs() < 1e-12);
        assert!((res.ss_within - 1.0).abs() < 1e-12);
        assert!((res.f - 32.0).abs() < 1e-9);
        assert_eq!((res.df_between, res.df_within), (1, 2));
        // F(1, 2) tail: 1 - sqrt(32/34)
        assert!((res.p_value - (1.0 - (32.0f64 / 34.0).sqrt())).abs() < 1e-12);
        assert!((res.p_value - 0.0299).abs() < 1e-4);
    }

    #[test]
    fn equal_means() {
        let g = vec![1.0, 2.0, 3.0];
        let res: AnovaResult<f64> = one_way_anova(&[g.clone(), g.clone(), g]).unwrap();
        assert_eq!(res.f, 0.0);
        assert_eq!(res.p_value, 1.0);
    }

    #[test]
    fn all_identical_values() {
        let res: AnovaResult<f64> = one_way_anova(&[vec![4.0, 4.0], vec![4.0, 4.0, 4.0]]).unwrap();
        assert_eq!(res.f, 0.0);
        assert_eq!(res.p_value, 1.0);
        assert!(!res.degenerate);
    }

    #[test]
    fn zero_within_variance_distinct_means() {
        let res: AnovaResult<f64> = one_way_anova(&[vec![1.0, 1.0], vec![3.0, 3.0]]).unwrap();
        assert!(res.degenerate);
        assert_eq!(res.p_value, 0.0);
        assert!(res.f.is_infinite());
    }

    #[test]
    fn precondition_errors() {
        assert!(one_way_anova::<f64, _>(&[vec![1.0, 2.0]]).is_err());
        assert!(one_way_anova::<f64, _>(&[vec![1.0], vec![]]).is_err());
        assert!(one_way_anova::<f64, _>(&[vec![1.0], vec![2.0]]).is_err());
        assert!(one_way_anova::<f64, _>(&[vec![1.0, f64::NAN], vec![2.0]]).is_err());
    }

    #[test]
    fn f32_groups() {
        let res: AnovaResult<f32> = one_way_anova(&[vec![1.0f32, 2.0], vec![5.0, 6.0]]).unwrap();
        assert!((res.f - 32.0).abs() < 1e-4);
    }
}
