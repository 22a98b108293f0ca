use std::path::PathBuf;

use gaze_core::harness::Config;

fn shipped() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../config/default.toml")
}

#[test]
fn shipped_config_matches_built_in_defaults() {
    let loaded = Config::load(&shipped()).unwrap();
    assert_eq!(loaded, Config::default());
}

#[test]
fn shipped_config_is_the_canonical_rendering() {
    let text = std::fs::read_to_string(shipped()).unwrap();
    assert_eq!(text, Config::default().to_toml().unwrap());
}

#[test]
fn training_defaults_follow_the_stated_parameters() {
    let t = Config::default().train;
    assert_eq!((t.mlp.max_iters, t.mlp.epsilon, t.mlp.gradient_strength, t.mlp.weight_momentum), (1000, 0.001, 0.1, 0.1));
    assert_eq!(t.mlp.hidden, 14);
    assert_eq!((t.svm.max_iters, t.svm.epsilon, t.svm.c), (100_000, 0.001, 1.0));
}
