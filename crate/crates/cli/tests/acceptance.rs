//! Runs the full suite with four workers and with one, then prints one
//! line per acceptance criterion.

use equilift_cli::suite::{run_suite, Group, SuiteOutput};
use equilift_cli::tolerances::{DBAR_TABLE_SECONDS, GREEN_SECONDS, LIFT_SECONDS};

const SEED: u64 = 0;

// Written through the raw handle so the lines show up without --nocapture.
macro_rules! say {
    ($($t:tt)*) => {{
        use std::io::Write;
        let mut out = std::io::stdout().lock();
        let _ = writeln!(out, $($t)*);
        let _ = out.flush();
    }};
}

fn run_with(threads: usize) -> SuiteOutput {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("thread pool");
    let cmd = ["suite", "all", "--seed", "0"].map(String::from).to_vec();
    pool.install(|| run_suite(SEED, cmd))
}

fn budget(g: &Group) -> Option<f64> {
    match g.id {
        1 => Some(DBAR_TABLE_SECONDS),
        2 => Some(LIFT_SECONDS),
        7 => Some(GREEN_SECONDS),
        _ => None,
    }
}

#[test]
fn acceptance_criteria() {
    let a = run_with(4);
    let b = run_with(1);
    let mut all = true;
    for g in a.groups.iter().filter(|g| g.id > 0) {
        let in_time = budget(g).is_none_or(|s| g.seconds < s);
        let ok = g.passed() && in_time;
        all &= ok;
        let limit = budget(g).map_or(String::new(), |s| format!(", budget {s:.0} s"));
        say!(
            "criterion {}: {} {} ({}; {:.1} s{limit})",
            g.id,
            if ok { "PASS" } else { "FAIL" },
            g.title,
            g.summary(),
            g.seconds
        );
    }
    let differing: Vec<&String> =
        a.files.keys().chain(b.files.keys()).filter(|k| a.files.get(*k) != b.files.get(*k)).collect();
    let same = differing.is_empty() && a.report.passed() == b.report.passed();
    all &= same;
    say!(
        "criterion 9: {} determinism ({} files compared across 4 and 1 workers{})",
        if same { "PASS" } else { "FAIL" },
        a.files.len(),
        if same { String::new() } else { format!("; differing: {differing:?}") }
    );
    if let Some(s) = a.groups.iter().find(|g| g.id == 0) {
        say!("supplementary: {} {} ({})", if s.passed() { "PASS" } else { "FAIL" }, s.title, s.summary());
        all &= s.passed();
    }
    for c in a.report.failures() {
        say!("  failed {}: {}", c.name, serde_json::to_string(&c.witness).unwrap_or_default());
    }
    assert!(all, "acceptance criteria failed");
}
