//! Full check suite at the default horizon.

use modavg::theorem_suite::{all_pass, failing_ids, run_all, summary_table, SuiteConfig, Verdict};

#[test]
fn default_suite_passes() {
    let reports = run_all(&SuiteConfig::default()).unwrap();
    println!("{}", summary_table(&reports));
    assert!(all_pass(&reports), "failing: {:?}", failing_ids(&reports));
    assert!(reports.iter().any(|r| r.control));
    assert!(reports.iter().all(|r| r.verdict == Verdict::Pass));
    assert_eq!(reports.len(), 28);
}
