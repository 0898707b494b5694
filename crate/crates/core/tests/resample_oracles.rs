use propensity_core::data::{Dataset, FeatureKind, FeatureSchema, Matrix};
use propensity_core::resample::{adasyn, hybrid_balance, nearmiss, AdasynConfig, HybridConfig, NearmissConfig, NearmissVariant};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Mean and sample standard deviation; binary columns keep their raw values.
fn column_stats(ds: &Dataset<f64>, j: usize) -> (f64, f64) {
    if ds.schema().kind(j) == FeatureKind::Binary {
        return (0.0, 1.0);
    }
    let n = ds.n_rows() as f64;
    let col = ds.column(j);
    let mean = col.iter().sum::<f64>() / n;
    let sd = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    (mean, sd)
}

fn standardized(ds: &Dataset<f64>) -> Vec<Vec<f64>> {
    let mut z: Vec<Vec<f64>> = (0..ds.n_rows()).map(|i| ds.row(i).to_vec()).collect();
    for j in 0..ds.n_features() {
        let (mean, sd) = column_stats(ds, j);
        for row in &mut z {
            row[j] = (row[j] - mean) / sd;
        }
    }
    z
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// All other rows of `pool` sorted by distance to `i` (index breaks ties).
fn ranked(z: &[Vec<f64>], i: usize, pool: &[usize]) -> Vec<usize> {
    let mut others: Vec<(f64, usize)> = pool.iter().filter(|&&j| j != i).map(|&j| (dist(&z[i], &z[j]), j)).collect();
    others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    others.into_iter().map(|(_, j)| j).collect()
}

/// Majority-neighbor counts and the integer largest-remainder allocation.
fn adasyn_oracle(ds: &Dataset<f64>, k: usize, beta: f64) -> (Vec<usize>, Vec<usize>) {
    let z = standardized(ds);
    let labels = ds.labels();
    let all: Vec<usize> = (0..ds.n_rows()).collect();
    let minority: Vec<usize> = all.iter().copied().filter(|&i| labels[i] == 1).collect();
    let counts: Vec<usize> = minority
        .iter()
        .map(|&i| ranked(&z, i, &all).into_iter().take(k).filter(|&j| labels[j] == 0).count())
        .collect();
    let majority = ds.n_rows() - minority.len();
    let g = ((majority - minority.len()) as f64 * beta).round() as usize;
    let total: usize = counts.iter().sum();
    let weights: Vec<usize> = if total == 0 { vec![1; counts.len()] } else { counts.clone() };
    let wsum: usize = weights.iter().sum();
    let mut alloc: Vec<usize> = weights.iter().map(|w| w * g / wsum).collect();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| (weights[b] * g % wsum).cmp(&(weights[a] * g % wsum)).then(a.cmp(&b)));
    let short = g - alloc.iter().sum::<usize>();
    for &i in order.iter().take(short) {
        alloc[i] += 1;
    }
    (counts, alloc)
}

fn planar(points: &[(f64, f64, u8)]) -> Dataset<f64> {
    let rows: Vec<Vec<f64>> = points.iter().map(|p| vec![p.0, p.1]).collect();
    Dataset::new(FeatureSchema::continuous(2), Matrix::from_rows(&rows, 2), points.iter().map(|p| p.2).collect()).unwrap()
}

fn mixed_dataset(seed: u64, n: usize, positives: usize) -> Dataset<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kinds = vec![FeatureKind::Continuous, FeatureKind::Binary, FeatureKind::Count, FeatureKind::Continuous];
    let names = (0..4).map(|j| format!("f{j}")).collect();
    let schema = FeatureSchema::new(names, kinds).unwrap();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let shift = if i < positives { 1.0 } else { 0.0 };
            vec![
                rng.random_range(-1.0..1.0) + shift,
                f64::from(u8::from(rng.random_bool(0.3 + 0.4 * shift))),
                f64::from(rng.random_range(0..6u8)),
                rng.random_range(0.0..100.0),
            ]
        })
        .collect();
    let labels = (0..n).map(|i| u8::from(i < positives)).collect();
    Dataset::new(schema, Matrix::from_rows(&rows, 4), labels).unwrap()
}

#[test]
fn eight_point_example_matches_brute_force_knn() {
    let ds = planar(&[
        (0.0, 0.0, 0),
        (1.1, 0.3, 0),
        (2.2, 1.9, 0),
        (3.4, 0.2, 0),
        (0.4, 2.6, 0),
        (0.9, 1.2, 1),
        (2.9, 1.1, 1),
        (4.3, 3.7, 1),
    ]);
    let cfg = AdasynConfig { k_neighbors: 3, target_ratio: 1.0, seed: 11 };
    let out = adasyn(&ds, &cfg).unwrap();
    let (counts, alloc) = adasyn_oracle(&ds, 3, 1.0);
    let expected: Vec<f64> = counts.iter().map(|&c| c as f64 / 3.0).collect();
    assert_eq!(out.difficulty, expected);
    assert_eq!(out.allocation, alloc);
    assert_eq!(out.allocation.iter().sum::<usize>(), 2);
    assert_eq!(out.dataset.class_counts().positives, 5);
}

#[test]
fn single_neighbor_segment_is_diagonal() {
    let ds = planar(&[(0.0, 0.0, 1), (1.0, 1.0, 1), (5.0, 0.0, 0), (0.0, 5.0, 0), (6.0, 6.0, 0), (7.0, 1.0, 0)]);
    let out = adasyn(&ds, &AdasynConfig { k_neighbors: 1, target_ratio: 1.0, seed: 2 }).unwrap();
    for (row, draw) in (6..out.dataset.n_rows()).zip(&out.draws) {
        let r = out.dataset.row(row);
        let t = if draw.seed_row == 0 { draw.lambda } else { 1.0 - draw.lambda };
        assert!((r[0] - t).abs() < 1e-15 && (r[1] - t).abs() < 1e-15);
        assert_eq!(r[0], r[1]);
    }
}

#[test]
fn balanced_input_is_untouched() {
    let ds = planar(&[(0.0, 0.0, 1), (1.0, 1.0, 1), (5.0, 0.0, 0), (0.0, 5.0, 0)]);
    let out = adasyn(&ds, &AdasynConfig::default()).unwrap();
    assert_eq!(out.dataset, ds);
    assert!(out.draws.is_empty());
}

#[test]
fn nearmiss_keeps_the_closest_majority_point() {
    let ds = planar(&[(0.0, 0.0, 0), (5.0, 5.0, 0), (10.0, 10.0, 0), (0.0, 1.0, 1)]);
    let out = nearmiss(&ds, &NearmissConfig { k_neighbors: 1, ..NearmissConfig::new(1) }).unwrap();
    assert_eq!(out.retained, vec![0]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn allocation_matches_oracle(seed in any::<u64>(), n in 12usize..60, k in 1usize..6, beta in 0.1f64..=1.0) {
        let ds = mixed_dataset(seed, n, n / 4);
        let cont = Dataset::new(FeatureSchema::continuous(4), ds.features().clone(), ds.labels().to_vec()).unwrap();
        let out = adasyn(&cont, &AdasynConfig { k_neighbors: k, target_ratio: beta, seed }).unwrap();
        let (counts, alloc) = adasyn_oracle(&cont, k, beta);
        if out.draws.is_empty() {
            prop_assert_eq!(alloc.iter().sum::<usize>(), 0);
        } else {
            let expected: Vec<f64> = counts.iter().map(|&c| c as f64 / k as f64).collect();
            prop_assert_eq!(&out.difficulty, &expected);
            prop_assert_eq!(&out.allocation, &alloc);
        }
    }

    #[test]
    fn synthetic_rows_lie_on_minority_segments(seed in any::<u64>(), n in 20usize..80, k in 1usize..6) {
        let ds = mixed_dataset(seed, n, n / 5);
        let out = adasyn(&ds, &AdasynConfig { k_neighbors: k, target_ratio: 0.8, seed }).unwrap();
        let n0 = ds.n_rows();
        prop_assert_eq!(out.dataset.features().select_rows(&(0..n0).collect::<Vec<_>>()), ds.features().clone());
        prop_assert_eq!(&out.dataset.labels()[..n0], ds.labels());
        prop_assert!(out.dataset.labels()[n0..].iter().all(|&y| y == 1));
        prop_assert_eq!(out.draws.len(), out.dataset.n_rows() - n0);

        let z = standardized(&ds);
        let minority: Vec<usize> = (0..n0).filter(|&i| ds.labels()[i] == 1).collect();
        let k_min = k.min(minority.len() - 1);
        for (r, draw) in out.draws.iter().enumerate() {
            prop_assert!(ranked(&z, draw.seed_row, &minority)[..k_min].contains(&draw.neighbor_row));
            prop_assert!((0.0..1.0).contains(&draw.lambda));
            let (a, b) = (ds.row(draw.seed_row), ds.row(draw.neighbor_row));
            let raw: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + draw.lambda * (y - x)).collect();
            let got = out.dataset.row(n0 + r);
            for j in 0..4 {
                let want = if ds.schema().kind(j) == FeatureKind::Continuous { raw[j] } else { raw[j].round() };
                prop_assert_eq!(got[j], want);
            }
            // distance from the pre-rounding point to the segment, standardized space
            let scale: Vec<f64> = (0..4).map(|j| 1.0 / column_stats(&ds, j).1).collect();
            let p: Vec<f64> = (0..4).map(|j| (raw[j] - a[j]) * scale[j]).collect();
            let e: Vec<f64> = (0..4).map(|j| (b[j] - a[j]) * scale[j]).collect();
            let ee: f64 = e.iter().map(|v| v * v).sum();
            let t = if ee > 0.0 { (p.iter().zip(&e).map(|(x, y)| x * y).sum::<f64>() / ee).clamp(0.0, 1.0) } else { 0.0 };
            let residual = p.iter().zip(&e).map(|(x, y)| (x - t * y).powi(2)).sum::<f64>().sqrt();
            prop_assert!(residual <= 1e-9, "residual {residual}");
        }
    }

    #[test]
    fn adasyn_is_deterministic(seed in any::<u64>()) {
        let ds = mixed_dataset(seed, 40, 8);
        let cfg = AdasynConfig { seed, ..Default::default() };
        let a = adasyn(&ds, &cfg).unwrap();
        let b = adasyn(&ds, &cfg).unwrap();
        prop_assert_eq!(a.dataset, b.dataset);
        prop_assert_eq!(a.draws, b.draws);
    }

    #[test]
    fn nearmiss_output_is_a_verbatim_subset(seed in any::<u64>(), target in 1usize..40, variant in 0usize..3, k in 1usize..5) {
        let ds = mixed_dataset(seed, 50, 10);
        let variant = [NearmissVariant::NearMiss1, NearmissVariant::NearMiss2, NearmissVariant::NearMiss3][variant];
        let out = nearmiss(&ds, &NearmissConfig { variant, k_neighbors: k, target_count: target }).unwrap();
        prop_assert_eq!(out.dataset.class_counts().negatives, target);
        prop_assert_eq!(out.dataset.class_counts().positives, 10);
        let kept: Vec<usize> = (0..ds.n_rows()).filter(|&i| ds.labels()[i] == 1 || out.retained.contains(&i)).collect();
        prop_assert_eq!(out.dataset, ds.subset(&kept));
    }

    #[test]
    fn nearmiss1_matches_brute_force(seed in any::<u64>(), target in 1usize..40, k in 1usize..5) {
        let ds = mixed_dataset(seed, 50, 10);
        let cont = Dataset::new(FeatureSchema::continuous(4), ds.features().clone(), ds.labels().to_vec()).unwrap();
        let z = standardized(&cont);
        let minority: Vec<usize> = (0..10).collect();
        let mut scores: Vec<(f64, usize)> = (10..50)
            .map(|i| {
                let mut d: Vec<f64> = minority.iter().map(|&m| dist(&z[i], &z[m])).collect();
                d.sort_by(f64::total_cmp);
                (d[..k].iter().sum::<f64>() / k as f64, i)
            })
            .collect();
        scores.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut expected: Vec<usize> = scores[..target].iter().map(|s| s.1).collect();
        expected.sort_unstable();
        let out = nearmiss(&cont, &NearmissConfig { k_neighbors: k, ..NearmissConfig::new(target) }).unwrap();
        prop_assert_eq!(out.retained, expected);
    }

    #[test]
    fn hybrid_ends_balanced(seed in any::<u64>(), n in 30usize..120, beta in 0.05f64..=1.0) {
        let ds = mixed_dataset(seed, n, n / 6);
        let mut cfg = HybridConfig::default();
        cfg.adasyn.target_ratio = beta;
        cfg.adasyn.seed = seed;
        let (out, audit) = hybrid_balance(&ds, &cfg).unwrap();
        let c = out.class_counts();
        prop_assert!(c.positives.abs_diff(c.negatives) <= 1);
        prop_assert_eq!(c, audit.counts_final);
        prop_assert_eq!(audit.entries.len(), 2 * ds.n_features());
        let before = ds.class_counts();
        let expected_minority = before.positives + ((before.negatives - before.positives) as f64 * beta).round() as usize;
        prop_assert_eq!(c.positives, expected_minority);
    }
}
