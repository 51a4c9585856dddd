//! Cohen's kappa for two coders.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::StatsError;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaResult<T> {
    pub kappa: T,
    pub observed: T,
    pub expected: T,
    pub n: usize,
}

/// Kappa over two position-aligned label sequences.
pub fn cohens_kappa<T, L>(a: &[L], b: &[L]) -> Result<KappaResult<T>, StatsError>
where
    T: Scalar,
    L: Ord,
{
    if a.len() != b.len() {
        return Err(StatsError::Misaligned(format!(
            "coder label counts differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    if n == 0 {
        return Err(StatsError::Empty("no items to compare"));
    }
    let mut agree = 0usize;
    let mut marg_a: BTreeMap<&L, usize> = BTreeMap::new();
    let mut marg_b: BTreeMap<&L, usize> = BTreeMap::new();
    for (x, y) in a.iter().zip(b) {
        if x == y {
            agree += 1;
        }
        *marg_a.entry(x).or_default() += 1;
        *marg_b.entry(y).or_default() += 1;
    }
    let nf = T::from_count(n);
    let observed = T::from_count(agree) / nf;
    let expected = marg_a
        .iter()
        .map(|(label, &ca)| {
            let cb = marg_b.get(label).copied().unwrap_or(0);
            T::from_count(ca) * T::from_count(cb) / (nf * nf)
        })
        .sum::<T>();
    let kappa = if agree == n {
        T::one()
    } else if expected >= T::one() {
        return Err(StatsError::Degenerate(
            "kappa undefined: chance agreement is 1 but observed agreement is not".into(),
        ));
    } else {
        (observed - expected) / (T::one() - expected)
    };
    Ok(KappaResult { kappa, observed, expected, n })
}

/// Kappa over two keyed labelings; both must cover exactly the same items.
pub fn cohens_kappa_keyed<T, K, L>(
    a: &BTreeMap<K, L>,
    b: &BTreeMap<K, L>,
) -> Result<KappaResult<T>, StatsError>
where
    T: Scalar,
    K: Ord + std::fmt::Debug,
    L: Ord,
{
    let ka: BTreeSet<&K> = a.keys().collect();
    let kb: BTreeSet<&K> = b.keys().collect();
    if ka != kb {
        let missing = ka.symmetric_difference(&kb).next();
        return Err(StatsError::Misaligned(format!("item {missing:?} labeled by only one coder")));
    }
    let la: Vec<&L> = a.values().collect();
    let lb: Vec<&L> = b.values().collect();
    cohens_kappa(&la, &lb)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_computed_fixture() {
        let a: Vec<char> = "AAAAABBBBB".chars().collect();
        let b: Vec<char> = "AAAABBBBBA".chars().collect();
        let k: KappaResult<f64> = cohens_kappa(&a, &b).unwrap();
        assert!((k.observed - 0.8).abs() < 1e-15);
        assert!((k.expected - 0.5).abs() < 1e-15);
        assert!((k.kappa - 0.6).abs() < 1e-12);
    }

    #[test]
    fn identical_and_single_class() {
        let a = ["x", "y", "x"];
        let k: KappaResult<f64> = cohens_kappa(&a, &a).unwrap();
        assert_eq!(k.kappa, 1.0);
        // p_e = 1 and p_o = 1
        let same = ["x", "x"];
        let k: KappaResult<f64> = cohens_kappa(&same, &same).unwrap();
        assert_eq!(k.kappa, 1.0);
    }

    #[test]
    fn errors() {
        assert!(cohens_kappa::<f64, _>(&["a"], &["a", "b"]).is_err());
        assert!(cohens_kappa::<f64, &str>(&[], &[]).is_err());
        let mut a = BTreeMap::new();
        a.insert("i1", "x");
        let mut b = BTreeMap::new();
        b.insert("i2", "x");
        assert!(matches!(cohens_kappa_keyed::<f64, _, _>(&a, &b), Err(StatsError::Misaligned(_))));
    }

    #[test]
    fn symmetric_in_coders() {
        let a = ["p", "q", "q", "r", "p", "p"];
        let b = ["p", "q", "r", "r", "q", "p"];
        let ab: KappaResult<f64> = cohens_kappa(&a, &b).unwrap();
        let ba: KappaResult<f64> = cohens_kappa(&b, &a).unwrap();
        assert!((ab.kappa - ba.kappa).abs() < 1e-15);
    }
}
