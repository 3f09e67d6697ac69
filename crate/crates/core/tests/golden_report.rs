//! The default report is compared field by field against a committed run.

use lcdiff::report::{verify_theorem, VerificationReport, VerifyConfig};

const GOLDEN: &str = include_str!("golden/report_default.json");

/// Error-like metrics are only required to stay tiny; everything else must
/// agree to a relative 1e-8.
fn close(key: &str, got: f64, want: f64) -> bool {
    if key.contains("error") {
        return got <= want.max(1e-13);
    }
    (got - want).abs() <= 1e-8 * want.abs().max(1e-300)
}

#[test]
fn default_report_matches_golden() {
    let golden: VerificationReport = serde_json::from_str(GOLDEN).unwrap();
    let report = verify_theorem(&VerifyConfig::default());
    assert_eq!(report.parameters, golden.parameters);
    assert_eq!(report.overall, golden.overall);
    assert_eq!(report.steps.len(), golden.steps.len());
    for (got, want) in report.steps.iter().zip(&golden.steps) {
        assert_eq!(got.step_name, want.step_name);
        assert_eq!(got.status, want.status, "{}", got.step_name);
        let got_keys: Vec<_> = got.metrics.keys().collect();
        let want_keys: Vec<_> = want.metrics.keys().collect();
        assert_eq!(got_keys, want_keys, "{}", got.step_name);
        for (key, &w) in &want.metrics {
            let g = got.metrics[key];
            assert!(close(key, g, w), "{}.{key}: {g:e} vs golden {w:e}", got.step_name);
        }
    }
}

#[test]
fn golden_file_uses_seventeen_digits() {
    assert!(GOLDEN.contains("\"sup_distance\": 8.4287923795300923e-4"));
}
