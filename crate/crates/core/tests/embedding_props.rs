use proptest::prelude::*;
use vistheme_core::cluster::{kmeans, silhouette, silhouette_labels, ClusterModel, KMeansParams};
use vistheme_core::embedding::{decode_cemb, decode_csv, encode_cemb, encode_csv, load_embeddings, save_embeddings};
use vistheme_core::{Embeddings, Embeddings64};

fn matrix() -> impl Strategy<Value = Embeddings> {
    (1usize..20, 1usize..9).prop_flat_map(|(n, d)| {
        proptest::collection::vec(proptest::collection::vec(-1e6f32..1e6, d), n).prop_map(move |rows| {
            let rows = rows.into_iter().enumerate().map(|(i, r)| (format!("img_{i}_é"), r)).collect();
            Embeddings::from_rows(rows, d, "t").unwrap()
        })
    })
}

/// Direct silhouette: mean over points of (b - a) / max(a, b), singletons 0.
fn silhouette_oracle(rows: &[Vec<f64>], labels: &[usize], k: usize) -> f64 {
    let dist = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let size = |c: usize| labels.iter().filter(|&&l| l == c).count();
    let mut total = 0.0;
    for i in 0..rows.len() {
        let own = labels[i];
        if size(own) == 1 {
            continue;
        }
        let mean_to = |c: usize| {
            let (s, n) = (0..rows.len())
                .filter(|&j| labels[j] == c && j != i)
                .fold((0.0, 0), |(s, n), j| (s + dist(&rows[i], &rows[j]), n + 1));
            s / n as f64
        };
        let a = mean_to(own);
        let b = (0..k).filter(|&c| c != own && size(c) > 0).map(mean_to).fold(f64::INFINITY, f64::min);
        let m = a.max(b);
        total += if m > 0.0 { (b - a) / m } else { 0.0 };
    }
    total / rows.len() as f64
}

proptest! {
    #[test]
    fn cemb_round_trip(m in matrix()) {
        let back = decode_cemb(&encode_cemb(&m).unwrap()).unwrap();
        prop_assert_eq!(back.ids(), m.ids());
        prop_assert_eq!(back.values(), m.values());
        let csv = decode_csv(&encode_csv(&m).unwrap()).unwrap();
        prop_assert_eq!(csv.values(), m.values());
    }

    #[test]
    fn silhouette_matches_oracle(
        rows in proptest::collection::vec(proptest::collection::vec(-10.0f64..10.0, 3), 3..40),
        k in 2usize..5,
        salt in any::<u64>(),
    ) {
        let n = rows.len();
        let mut labels: Vec<usize> = (0..n).map(|i| ((i as u64).wrapping_mul(salt | 1) >> 7) as usize % k).collect();
        labels[0] = 0;
        labels[1] = 1;
        let m = Embeddings64::from_rows(
            rows.iter().enumerate().map(|(i, r)| (format!("p{i}"), r.clone())).collect(), 3, "t",
        ).unwrap();
        let got = silhouette_labels(&m, &labels, k).unwrap();
        let want = silhouette_oracle(&rows, &labels, k);
        prop_assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }

    #[test]
    fn kmeans_is_a_lloyd_fixed_point(
        rows in proptest::collection::vec(proptest::collection::vec(-10.0f64..10.0, 2), 4..60),
        k in 1usize..4,
        seed in any::<u64>(),
    ) {
        let m = Embeddings64::from_rows(
            rows.iter().enumerate().map(|(i, r)| (format!("p{i}"), r.clone())).collect(), 2, "t",
        ).unwrap();
        let model = kmeans(&m, &KMeansParams::new(k, seed)).unwrap();
        prop_assert!(model.sizes().iter().all(|&s| s > 0));
        let rebuilt = ClusterModel::from_labels(&m, model.labels().to_vec(), k, seed).unwrap();
        prop_assert!((rebuilt.inertia - model.inertia).abs() <= 1e-9 * (1.0 + model.inertia));
        let again = kmeans(&m, &KMeansParams::new(k, seed)).unwrap();
        prop_assert_eq!(again.labels(), model.labels());
        if k >= 2 && m.n() >= 3 {
            prop_assert!(silhouette(&m, &model).unwrap().abs() <= 1.0);
        }
    }
}

#[test]
fn file_round_trip_detects_format() {
    let dir = tempfile::tempdir().unwrap();
    let m = Embeddings::from_rows(vec![("a".into(), vec![1.0, 2.0]), ("b".into(), vec![3.0, -4.5])], 2, "t").unwrap();
    let p = dir.path().join("e.cemb");
    save_embeddings(&m, &p).unwrap();
    assert_eq!(load_embeddings(&p).unwrap().values(), m.values());
    let c = dir.path().join("e.csv");
    std::fs::write(&c, "id,f0,f1\na,1,2\nb,3,-4.5\n").unwrap();
    assert_eq!(load_embeddings(&c).unwrap().values(), m.values());
}
