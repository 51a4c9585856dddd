use proptest::prelude::*;
use vistheme_core::stats::{chi_square, cohens_kappa, one_way_anova, ChiSquareOptions, ContingencyTable};
use vistheme_core::textmodel::{evaluate, Task};
use vistheme_core::{Anova, ChiSquare, Kappa};

fn table() -> impl Strategy<Value = Vec<Vec<u64>>> {
    (2usize..5, 2usize..5).prop_flat_map(|(r, c)| proptest::collection::vec(proptest::collection::vec(1u64..60, c), r))
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #[test]
    fn chi_square_transpose_invariant(counts in table()) {
        let t = ContingencyTable::from_counts(counts).unwrap();
        let a: ChiSquare = chi_square(&t, ChiSquareOptions::default()).unwrap();
        let b: ChiSquare = chi_square(&t.transpose(), ChiSquareOptions::default()).unwrap();
        prop_assert!(close(a.statistic, b.statistic, 1e-12));
        prop_assert!(close(a.p_value, b.p_value, 1e-10));
        prop_assert_eq!(a.df, b.df);
    }

    #[test]
    fn chi_square_scales_with_counts(counts in table(), c in 2u64..6) {
        let t = ContingencyTable::from_counts(counts.clone()).unwrap();
        let scaled = ContingencyTable::from_counts(
            counts.iter().map(|r| r.iter().map(|x| x * c).collect()).collect(),
        ).unwrap();
        let a: ChiSquare = chi_square(&t, ChiSquareOptions::default()).unwrap();
        let b: ChiSquare = chi_square(&scaled, ChiSquareOptions::default()).unwrap();
        prop_assert!(close(b.statistic, a.statistic * c as f64, 1e-10));
        prop_assert!(b.p_value <= a.p_value + 1e-12);
    }

    #[test]
    fn chi_square_matches_direct_sum(counts in table()) {
        let t = ContingencyTable::from_counts(counts.clone()).unwrap();
        let r: Vec<f64> = counts.iter().map(|row| row.iter().sum::<u64>() as f64).collect();
        let n: f64 = r.iter().sum();
        let c: Vec<f64> = (0..counts[0].len()).map(|j| counts.iter().map(|row| row[j]).sum::<u64>() as f64).collect();
        let mut direct = 0.0;
        for (i, row) in counts.iter().enumerate() {
            for (j, &o) in row.iter().enumerate() {
                let e = r[i] * c[j] / n;
                direct += (o as f64 - e).powi(2) / e;
            }
        }
        let got: ChiSquare = chi_square(&t, ChiSquareOptions::default()).unwrap();
        prop_assert!(close(got.statistic, direct, 1e-12));
    }

    #[test]
    fn anova_affine_invariant(
        groups in proptest::collection::vec(proptest::collection::vec(-100.0f64..100.0, 2..12), 2..5),
        a in prop_oneof![0.01f64..50.0, -50.0f64..-0.01],
        b in -1e3f64..1e3,
    ) {
        let base: Anova = one_way_anova(&groups).unwrap();
        let moved: Vec<Vec<f64>> = groups.iter().map(|g| g.iter().map(|x| a * x + b).collect()).collect();
        let m: Anova = one_way_anova(&moved).unwrap();
        prop_assert!(close(base.f, m.f, 1e-7), "{} vs {}", base.f, m.f);
        prop_assert!(close(base.p_value, m.p_value, 1e-7));
    }

    #[test]
    fn kappa_self_and_symmetry(
        a in proptest::collection::vec(0u8..4, 1..80),
        b_seed in proptest::collection::vec(0u8..4, 80),
    ) {
        let b: Vec<u8> = b_seed[..a.len()].to_vec();
        let me: Kappa = cohens_kappa(&a, &a).unwrap();
        prop_assert_eq!(me.kappa, 1.0);
        if let (Ok(ab), Ok(ba)) = (cohens_kappa::<f64, u8>(&a, &b), cohens_kappa::<f64, u8>(&b, &a)) {
            prop_assert!(close(ab.kappa, ba.kappa, 1e-14));
            prop_assert!(ab.kappa <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn micro_f1_is_accuracy(pairs in proptest::collection::vec((0usize..5, 0usize..5), 1..200)) {
        let names = Task::Emotion.labels();
        let r = evaluate(Task::Emotion, pairs.iter().map(|&(g, p)| (names[g], names[p]))).unwrap();
        let acc = pairs.iter().filter(|(g, p)| g == p).count() as f64 / pairs.len() as f64;
        prop_assert_eq!(r.micro_f1, acc);
        prop_assert_eq!(r.confusion.iter().flatten().sum::<u64>(), pairs.len() as u64);
    }
}
