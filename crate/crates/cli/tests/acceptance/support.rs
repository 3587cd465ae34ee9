use dronecine_core::geometry::CameraIntrinsics;
use proptest::strategy::Strategy;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseResult, TestRng, TestRunner};

/// Runs `cases` generated cases from a fixed seed; panics with the shrunk
/// counterexample on failure.
pub fn check<S: Strategy>(cases: u32, strategy: S, test: impl Fn(S::Value) -> TestCaseResult) {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    if let Err(e) = runner.run(&strategy, test) {
        panic!("{e}");
    }
}

/// Landscape cameras with sensor widths in `width` mm and focal lengths in
/// `focal` mm.
pub fn camera(width: std::ops::Range<f64>, focal: std::ops::Range<f64>) -> impl Strategy<Value = CameraIntrinsics> {
    (width, 0.4..1.0f64, focal).prop_map(|(w, aspect, f)| CameraIntrinsics::new(w, w * aspect, f).unwrap())
}

pub fn rel_err(actual: f64, expected: f64) -> f64 {
    if expected == 0.0 {
        actual.abs()
    } else {
        ((actual - expected) / expected).abs()
    }
}
