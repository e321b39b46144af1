//! Acceptance suite: runs `marker-crowds verify --seeds 10` through the built
//! binary and reports one line per criterion.

use std::io::Write;
use std::process::Command;
use std::time::{Duration, Instant};

const VERIFY_BUDGET: Duration = Duration::from_secs(120);

const CRITERIA: [(&str, &str); 9] = [
    ("extraversion ordering", "E=1.0 nearer the goal and tighter than E=0.8, 9 of 10 seeds, within 60 s"),
    ("dispersal ordering", "comfort-seeking hull area above goal-seeking, 9 of 10 seeds"),
    ("homogeneous extraversion", "all-0.8 nearest-neighbour distance above all-1.0, 9 of 10 seeds"),
    ("mode collapse", "1000 configurations, componentwise within 1e-9"),
    ("equation units", "weight sums 1 +- 1e-9, comfort(70,70)=1, comfort_bias(1/3)=0.5, spot values"),
    ("auction oracle", "100 random instances equal brute force exactly"),
    ("determinism", "equal hashes for every preset over 1500 ticks, verify within 120 s"),
    ("blocking", "starved agent moves 0 m over 100 ticks"),
    ("replay equivalence", "served trace-driven session hashes like the headless run"),
];

/// Written past the test harness's output capture so the report shows up in
/// a plain `cargo test` run.
fn report(line: &str) {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{line}").expect("write report");
}

#[test]
fn acceptance() {
    let started = Instant::now();
    let output = Command::new(env!("CARGO_BIN_EXE_marker-crowds"))
        .args(["verify", "--seeds", "10"])
        .output()
        .expect("run marker-crowds verify");
    let elapsed = started.elapsed();
    let stdout = String::from_utf8_lossy(&output.stdout);

    // libtest has already printed "test acceptance ... " on this line
    report("");
    let mut all_passed = true;
    for (name, criterion) in CRITERIA {
        let line = stdout
            .lines()
            .find(|l| l.strip_prefix("PASS ").or_else(|| l.strip_prefix("FAIL ")).is_some_and(|rest| rest.starts_with(name)));
        let mut passed = line.is_some_and(|l| l.starts_with("PASS "));
        let mut detail = line.map(|l| l[5..].to_string()).unwrap_or_else(|| format!("{name}: no result"));
        if name == "determinism" {
            let in_budget = elapsed <= VERIFY_BUDGET;
            passed &= in_budget;
            detail.push_str(&format!("; verify took {:.1}s (budget {}s)", elapsed.as_secs_f64(), VERIFY_BUDGET.as_secs()));
        }
        all_passed &= passed;
        report(&format!("[{}] {criterion} | {detail}", if passed { "PASS" } else { "FAIL" }));
    }

    let exit_ok = output.status.code() == Some(0);
    report(&format!("[{}] verify exit code {:?}", if exit_ok { "PASS" } else { "FAIL" }, output.status.code()));
    assert!(all_passed && exit_ok, "acceptance failed:\n{stdout}\n{}", String::from_utf8_lossy(&output.stderr));
}
