mod common;

use gaze_core::features::{FeatureVector, LabeledSet};
use gaze_core::harness::Config;
use gaze_core::learners::{
    build_training_set, central_reference, mlp_train, prepare, svm_train, train_binary_svm, BinaryMlp, SvmConfig,
    SvmModel, SymmetricSigmoid, TrainConfig, TrainingSet,
};
use gaze_core::region::Region;
use gaze_core::simulator::{synthesize_calibration, CalibrationProtocol};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{svm_oracle, two_clusters};

fn tight() -> SvmConfig {
    SvmConfig { epsilon: 1e-10, ..SvmConfig::default() }
}

fn learned_set(sensor: &str, seed: u64) -> TrainingSet {
    let cfg = Config::default();
    let trace = synthesize_calibration(
        cfg.persona("average").unwrap(),
        cfg.sensor(sensor).unwrap(),
        &cfg.geometry,
        CalibrationProtocol::Learned,
        &cfg.adapted_table,
        seed,
    )
    .unwrap();
    build_training_set(&trace, central_reference(&trace).unwrap()).unwrap()
}

#[test]
fn svm_matches_exact_optimum_on_small_problems() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for seed in 0..25u64 {
        let (xs, ys) = two_clusters(seed, 8 + (seed % 5) as usize);
        let oracle = svm_oracle(&xs, &ys, 1.0).expect("oracle finds a KKT point");
        let svm = train_binary_svm(&xs, &ys, &tight()).unwrap();
        assert!(svm.converged);
        let obj = common::primal(&svm.w, svm.b, &xs, &ys, 1.0);
        assert!((obj - oracle.objective).abs() < 1e-7, "seed {seed}: {obj} vs {}", oracle.objective);
        for k in 0..2 {
            assert!((svm.w[k] - oracle.w[k]).abs() < 1e-4, "seed {seed}: w {:?} vs {:?}", svm.w, oracle.w);
        }
        if oracle.bias_slack < 1e-9 {
            assert!((svm.b - oracle.b).abs() < 1e-4, "seed {seed}: b {} vs {}", svm.b, oracle.b);
        }
        for _ in 0..2000 {
            let p = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
            let ours = svm.decision(&p);
            let theirs = oracle.w[0] * p[0] + oracle.w[1] * p[1] + oracle.b;
            if theirs.abs() > 1e-3 + oracle.bias_slack {
                assert_eq!(ours > 0.0, theirs > 0.0, "seed {seed} at {p:?}");
            }
        }
    }
}

#[test]
fn pairwise_models_satisfy_kkt_on_real_patterns() {
    let set = learned_set("depthcam", 4);
    let cfg = TrainConfig::default();
    let (model, norm) = svm_train(&set, &[0, 1, 2, 3, 4], true, &cfg).unwrap();
    assert_eq!(model.pairs.len(), 21);
    assert!(model.converged());
    let (xs, ys): (Vec<Vec<f64>>, Vec<Region>) =
        set.patterns.patterns.iter().map(|(v, r)| (prepare(v, &[0, 1, 2, 3, 4], &norm), *r)).unzip();
    for pair in &model.pairs {
        let (px, py) = SvmModel::pair_subset(&xs, &ys, pair.pos, pair.neg);
        let svm = &pair.svm;
        assert!(svm.alpha.iter().all(|&a| (0.0..=cfg.svm.c).contains(&a)));
        let eq: f64 = svm.alpha.iter().zip(&py).map(|(a, y)| a * y).sum();
        assert!(eq.abs() < 1e-9, "sum alpha*y = {eq}");
        for k in 0..5 {
            let wk: f64 = svm.alpha.iter().zip(&py).zip(&px).map(|((a, y), x)| a * y * x[k]).sum();
            assert!((wk - svm.w[k]).abs() < 1e-9, "{}/{} w[{k}]", pair.pos, pair.neg);
        }
        // maximal KKT violation between the up and low index sets
        let c = cfg.svm.c;
        let (mut up, mut low) = (f64::NEG_INFINITY, f64::INFINITY);
        for ((x, &y), &a) in px.iter().zip(&py).zip(&svm.alpha) {
            let grad = y * (svm.decision(x) - svm.b) - 1.0;
            let v = -y * grad;
            if (y > 0.0 && a < c) || (y < 0.0 && a > 0.0) {
                up = up.max(v);
            }
            if (y > 0.0 && a > 0.0) || (y < 0.0 && a < c) {
                low = low.min(v);
            }
        }
        assert!(up - low < cfg.svm.epsilon + 1e-9, "{}/{}: violation {}", pair.pos, pair.neg, up - low);
    }
}

fn rescaled(set: &TrainingSet, scale: &[f64; 5], shift: &[f64; 5]) -> TrainingSet {
    let moved = set
        .patterns
        .patterns
        .iter()
        .map(|(v, r)| (FeatureVector(std::array::from_fn(|i| scale[i] * v.0[i] + shift[i])), *r))
        .collect();
    TrainingSet::new(LabeledSet::new(moved), set.central)
}

#[test]
fn standardized_predictions_ignore_affine_rescaling() {
    let set = learned_set("depthcam", 6);
    let test = learned_set("depthcam", 106);
    let scale = [3.0, 0.02, 250.0, 1e-3, 7.5];
    let shift = [-40.0, 5.0, 1e4, 0.3, -2.0];
    let moved = rescaled(&set, &scale, &shift);
    let moved_test = rescaled(&test, &scale, &shift);
    let all = [0, 1, 2, 3, 4];
    let cfg = TrainConfig::default();

    let (svm_a, na) = svm_train(&set, &all, true, &cfg).unwrap();
    let (svm_b, nb) = svm_train(&moved, &all, true, &cfg).unwrap();
    let (mlp_a, ma) = mlp_train(&set, &all, true, &cfg).unwrap();
    let (mlp_b, mb) = mlp_train(&moved, &all, true, &cfg).unwrap();
    let mut svm_diff = 0;
    let mut mlp_diff = 0;
    for ((va, _), (vb, _)) in test.patterns.patterns.iter().zip(&moved_test.patterns.patterns) {
        if svm_a.predict(&prepare(va, &all, &na)) != svm_b.predict(&prepare(vb, &all, &nb)) {
            svm_diff += 1;
        }
        if mlp_a.predict(&prepare(va, &all, &ma)) != mlp_b.predict(&prepare(vb, &all, &mb)) {
            mlp_diff += 1;
        }
    }
    assert_eq!((svm_diff, mlp_diff), (0, 0));
}

#[test]
fn training_is_reproducible() {
    let set = learned_set("hmd", 2);
    let cfg = TrainConfig { rng_seed: 11, ..TrainConfig::default() };
    let all = [0, 1, 2, 3, 4];
    assert_eq!(mlp_train(&set, &all, true, &cfg).unwrap(), mlp_train(&set, &all, true, &cfg).unwrap());
    assert_eq!(svm_train(&set, &all, true, &cfg).unwrap(), svm_train(&set, &all, true, &cfg).unwrap());
}

#[test]
fn two_feature_subset_trains_narrow_models() {
    let set = learned_set("depthcam", 3);
    let (mlp, norm) = mlp_train(&set, &[0, 1], true, &TrainConfig::default()).unwrap();
    assert_eq!(mlp.input_dim, 2);
    assert_eq!(norm.dim(), 2);
    let (svm, _) = svm_train(&set, &[0, 1], true, &TrainConfig::default()).unwrap();
    assert!(svm.pairs.iter().all(|p| p.svm.w.len() == 2));
}

proptest! {
    #[test]
    fn mlp_output_stays_inside_beta(
        seed in 0u64..1000,
        x in prop::collection::vec(-1e6f64..1e6, 5),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = BinaryMlp::init(5, 14, &mut rng);
        let act = SymmetricSigmoid { alpha: 2.0 / 3.0, beta: 1.7159 };
        let y = net.output(&x, act);
        prop_assert!(y.abs() <= act.beta);
        prop_assert!(y.is_finite());
    }
}
