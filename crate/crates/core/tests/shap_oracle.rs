use propensity_core::data::FeatureSchema;
use propensity_core::explain::{exact_shapley_oracle, shap_matrix, tree_shap};
use propensity_core::gbt::{BoostParams, GradientBoostedEnsemble, TreeNode};
use propensity_core::scalar::sigmoid;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_tree(rng: &mut ChaCha8Rng, d: usize, depth: usize, used: &mut Vec<usize>) -> TreeNode<f64> {
    if depth == 0 || rng.random_bool(0.25) {
        return TreeNode::Leaf {
            leaf: rng.random_range(-1.0..1.0),
            cover: rng.random_range(0.5..20.0),
        };
    }
    let feature = rng.random_range(0..d);
    used.push(feature);
    let left = random_tree(rng, d, depth - 1, used);
    let right = random_tree(rng, d, depth - 1, used);
    TreeNode::Split {
        feature,
        threshold: rng.random_range(-1.0..1.0),
        cover: left.cover() + right.cover(),
        left: Box::new(left),
        right: Box::new(right),
    }
}

fn random_ensemble(seed: u64, d: usize, n_trees: usize, depth: usize) -> (GradientBoostedEnsemble<f64>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut used = Vec::new();
    let trees = (0..n_trees).map(|_| random_tree(&mut rng, d, depth, &mut used)).collect();
    let model = GradientBoostedEnsemble {
        base_margin: rng.random_range(-2.0..2.0),
        params: BoostParams::default(),
        schema: FeatureSchema::continuous(d),
        seed,
        trees,
    };
    (model, used)
}

fn random_row(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(-1.2..1.2)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn treeshap_equals_exact_enumeration(seed in any::<u64>(), d in 1usize..=10, n_trees in 1usize..=20, depth in 1usize..=3) {
        let (model, _) = random_ensemble(seed, d, n_trees, depth);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        for _ in 0..5 {
            let x = random_row(&mut rng, d);
            let fast = tree_shap(&model, &x).unwrap();
            let slow = exact_shapley_oracle(&model, &x).unwrap();
            for (a, b) in fast.phi.iter().zip(&slow.phi) {
                prop_assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
            }
            prop_assert!((fast.base_value - slow.base_value).abs() <= 1e-9);
            prop_assert!(fast.additivity_residual() <= 1e-9);
        }
    }

    #[test]
    fn unused_features_get_zero(seed in any::<u64>(), d in 2usize..=10) {
        let (model, used) = random_ensemble(seed, d, 8, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
        let x = random_row(&mut rng, d);
        let r = tree_shap(&model, &x).unwrap();
        for j in (0..d).filter(|j| !used.contains(j)) {
            prop_assert_eq!(r.phi[j], 0.0);
        }
    }

    #[test]
    fn ensemble_shap_is_sum_over_trees(seed in any::<u64>(), d in 1usize..=8) {
        let (model, _) = random_ensemble(seed, d, 6, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(2));
        let x = random_row(&mut rng, d);
        let whole = tree_shap(&model, &x).unwrap();
        let mut sum = vec![0.0; d];
        for t in &model.trees {
            let single = GradientBoostedEnsemble { trees: vec![t.clone()], base_margin: 0.0, ..model.clone() };
            for (s, p) in sum.iter_mut().zip(tree_shap(&single, &x).unwrap().phi) {
                *s += p;
            }
        }
        for (a, b) in whole.phi.iter().zip(&sum) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn permuting_features_permutes_phi(seed in any::<u64>(), d in 2usize..=8) {
        let (model, _) = random_ensemble(seed, d, 5, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(3));
        let x = random_row(&mut rng, d);
        // new column j holds old column perm[j]
        let mut perm: Vec<usize> = (0..d).collect();
        perm.rotate_left(1);
        let mut inverse = vec![0; d];
        for (j, &p) in perm.iter().enumerate() {
            inverse[p] = j;
        }
        fn remap(t: &TreeNode<f64>, inv: &[usize]) -> TreeNode<f64> {
            match t {
                TreeNode::Leaf { .. } => t.clone(),
                TreeNode::Split { feature, threshold, cover, left, right } => TreeNode::Split {
                    feature: inv[*feature],
                    threshold: *threshold,
                    cover: *cover,
                    left: Box::new(remap(left, inv)),
                    right: Box::new(remap(right, inv)),
                },
            }
        }
        let permuted = GradientBoostedEnsemble {
            trees: model.trees.iter().map(|t| remap(t, &inverse)).collect(),
            ..model.clone()
        };
        let xp: Vec<f64> = perm.iter().map(|&p| x[p]).collect();
        let a = tree_shap(&model, &x).unwrap();
        let b = tree_shap(&permuted, &xp).unwrap();
        for j in 0..d {
            prop_assert!((b.phi[j] - a.phi[perm[j]]).abs() <= 1e-12);
        }
    }
}

#[test]
fn single_leaf_oracle_is_zero() {
    let model = GradientBoostedEnsemble {
        base_margin: 0.2f64,
        params: BoostParams::default(),
        schema: FeatureSchema::continuous(4),
        seed: 0,
        trees: vec![TreeNode::Leaf { leaf: -0.5, cover: 2.0 }],
    };
    let r = exact_shapley_oracle(&model, &[0.0; 4]).unwrap();
    assert_eq!(r.phi, vec![0.0; 4]);
    assert!((r.base_value + 0.3).abs() < 1e-15);
}

#[test]
fn oracle_rejects_wide_models() {
    let (model, _) = random_ensemble(1, 13, 1, 1);
    assert!(exact_shapley_oracle(&model, &[0.0; 13]).is_err());
}

#[test]
fn matrix_rows_are_consistent_with_probabilities() {
    use propensity_core::data::{generate_synthetic, GeneratorConfig};
    use propensity_core::gbt::train;
    let mut g = GeneratorConfig::outflow(2000, 4);
    g.prevalence = 0.05;
    let ds = generate_synthetic::<f64>(&g).unwrap();
    let params = BoostParams { n_trees: 40, max_depth: 4, ..Default::default() };
    let model = train(&ds, &params, 0).unwrap();
    let sm = shap_matrix(&model, &ds).unwrap();
    assert_eq!(sm.n_rows(), ds.n_rows());
    assert!(sm.max_additivity_residual() <= 1e-6);
    let proba = model.predict_proba(ds.features()).unwrap();
    let margins = model.predict_margin(ds.features()).unwrap();
    for ((r, p), m) in sm.rows.iter().zip(&proba).zip(&margins) {
        assert_eq!(r.margin, *m);
        assert_eq!(sigmoid(r.margin), *p);
        assert!((sigmoid(r.reconstructed_margin()) - p).abs() <= 1e-12);
    }
    let n = ds.n_rows() as f64;
    let mean_margin = margins.iter().sum::<f64>() / n;
    let mean_phi_sum = sm.rows.iter().map(|r| r.phi.iter().sum::<f64>()).sum::<f64>() / n;
    assert!((mean_margin - (sm.base_value + mean_phi_sum)).abs() <= 1e-9);
}
