use gradedvb::exec::Exec;
use gradedvb::suite::{render, run_criterion, SuiteConfig};

fn report(exec: Exec, ids: &[usize], max_n: Option<usize>) -> String {
    let cfg = SuiteConfig { seed: 11, max_n, exec };
    let results: Vec<_> = ids.iter().map(|&id| run_criterion(id, &cfg).unwrap()).collect();
    render(&cfg, &results)
}

#[test]
fn sequential_and_parallel_reports_are_identical() {
    let ids = [1, 2, 3, 4, 9, 10, 11];
    let seq = report(Exec::Sequential, &ids, None);
    assert_eq!(seq, report(Exec::Parallel, &ids, None));
    assert!(seq.lines().skip(1).all(|l| l.starts_with("PASS")), "{seq}");
}

#[test]
fn capped_suite_passes_at_small_n() {
    for n in 1..=3 {
        let text = report(Exec::default(), &[1, 2, 5, 6, 7, 8, 9, 10, 11], Some(n));
        assert!(text.lines().skip(1).all(|l| l.starts_with("PASS")), "{text}");
    }
}

#[test]
fn unknown_criterion_is_none() {
    assert!(run_criterion(12, &SuiteConfig::new(0)).is_none());
}
