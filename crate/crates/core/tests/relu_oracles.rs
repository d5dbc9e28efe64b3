//! Expectation oracle for the Gram entries, the Iris complexity pipeline,
//! and the random-label direction check.

use rand_distr::{Distribution, StandardNormal};
use rashomon_core::dataset::{load_and_normalize, LabeledDataset};
use rashomon_core::gaussian::sample_unit_vector;
use rashomon_core::linalg::min_eigenvalue;
use rashomon_core::relu::{complexity_term, gram_matrix, GramStats};
use rashomon_core::rng::substream;
use rayon::prelude::*;

fn iris() -> LabeledDataset {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/iris.csv"))
        .expect("iris data present in repo");
    load_and_normalize(&text, "Iris-setosa", "Iris-versicolor", false).unwrap()
}

/// E_w[ x.y 1{w.x >= 0, w.y >= 0} ] over standard normal w.
fn gram_entry_mc(x: &[f64], y: &[f64], n_draws: usize, seed: u64) -> f64 {
    let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    const CHUNK: usize = 100_000;
    let chunks = n_draws / CHUNK;
    let hits: usize = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = substream(seed, c as u64);
            let mut k = 0usize;
            for _ in 0..CHUNK {
                let mut wx = 0.0;
                let mut wy = 0.0;
                for (xi, yi) in x.iter().zip(y) {
                    let w: f64 = StandardNormal.sample(&mut rng);
                    wx += w * xi;
                    wy += w * yi;
                }
                if wx >= 0.0 && wy >= 0.0 {
                    k += 1;
                }
            }
            k
        })
        .sum();
    dot * hits as f64 / (chunks * CHUNK) as f64
}

#[test]
fn gram_entries_match_expectation_oracle() {
    let mut rng = substream(71, 0);
    let rows: Vec<Vec<f64>> = (0..6).map(|_| sample_unit_vector(&mut rng, 5)).collect();
    let labels = vec![1.0, -1.0, 1.0, -1.0, 1.0, -1.0];
    let ds = LabeledDataset::from_rows(rows.clone(), labels)
        .unwrap()
        .normalize_rows()
        .unwrap();
    let h = gram_matrix(&ds).unwrap();
    for (pair, (i, j)) in [(0usize, (0usize, 1usize)), (1, (2, 3)), (2, (4, 5))].into_iter() {
        let mc = gram_entry_mc(&rows[i], &rows[j], 1_000_000, 7100 + pair as u64);
        assert!(
            (h[(i, j)] - mc).abs() <= 2e-3,
            "pair ({i},{j}): H {} vs MC {mc}",
            h[(i, j)]
        );
    }
}

#[test]
fn iris_pipeline_reproduces_complexity() {
    let ds = iris();
    assert_eq!(ds.n(), 100);
    assert_eq!(ds.dim(), 4);
    for row in ds.features() {
        let norm: f64 = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() <= 1e-10);
    }
    let stats = GramStats::compute(&ds).unwrap();
    assert!(stats.lambda0 > 0.0);
    assert!(stats.lambda0 > rashomon_core::relu::PD_THRESHOLD);
    assert!(
        (stats.epsilon_dominant - 7.13).abs() <= 0.15,
        "epsilon = {}",
        stats.epsilon_dominant
    );
    // solver self-check on the real system
    let z = rashomon_core::linalg::cholesky_solve(&stats.h, ds.labels()).unwrap();
    let hz = stats.h.mul_vec(&z);
    let resid: f64 = hz
        .iter()
        .zip(ds.labels())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    assert!(resid <= 1e-10 * 10.0); // |y| = 10
}

#[test]
fn iris_gram_is_positive_semidefinite() {
    let ds = iris();
    let h = gram_matrix(&ds).unwrap();
    for i in 0..ds.n() {
        assert_eq!(h[(i, i)], 0.5);
    }
    assert!(min_eigenvalue(&h).unwrap() >= -1e-10);
}

#[test]
fn random_labels_raise_the_complexity_term() {
    // permuted labels are at least as complex in >= 95 of 100 permutations
    let ds = iris();
    let h = gram_matrix(&ds).unwrap();
    let (true_yhy, _) = complexity_term(&h, ds.labels()).unwrap();
    let mut rng = substream(72, 0);
    let mut labels: Vec<f64> = ds.labels().to_vec();
    let mut at_least = 0;
    for _ in 0..100 {
        use rand::seq::SliceRandom;
        labels.shuffle(&mut rng);
        let (yhy, _) = complexity_term(&h, &labels).unwrap();
        if yhy >= true_yhy {
            at_least += 1;
        }
    }
    assert!(
        at_least >= 95,
        "only {at_least}/100 permutations were harder"
    );
}
