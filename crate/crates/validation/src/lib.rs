//! Reporting helpers for the acceptance run in `tests/acceptance.rs`.
//!
//! Each criterion collects gated lines (which decide pass or fail) and
//! informational notes. [`report`] prints them and returns the red ids.

use smoothk::analysis::Verification;
use smoothk::{verify_lemma, AlphaSequence, LemmaId, VerifyOptions};
use std::time::Instant;

pub struct Criterion {
    pub id: u32,
    pub title: &'static str,
    pub lines: Vec<String>,
    pub passed: bool,
}

impl Criterion {
    pub fn new(id: u32, title: &'static str) -> Self {
        Self { id, title, lines: Vec::new(), passed: true }
    }

    pub fn gate(&mut self, ok: bool, line: String) {
        self.passed &= ok;
        self.lines.push(format!("{} {line}", if ok { "ok  " } else { "FAIL" }));
    }

    pub fn note(&mut self, line: String) {
        self.lines.push(format!("info {line}"));
    }

    /// Gate on a verifier report and list its side checks underneath.
    pub fn gate_report(&mut self, name: &str, v: &Verification) {
        let r = &v.report;
        self.gate(
            r.passed,
            format!(
                "{name}: n={}..{} final deviation {:.3e} (tol {:.2e}), max {:.3e}",
                r.range[0], r.range[1], r.final_deviation, r.tolerance, r.max_deviation
            ),
        );
        for s in &r.checks {
            self.lines.push(format!(
                "       {:<26} {:.3e} (tol {:.2e}) {}",
                s.name,
                s.value,
                s.tolerance,
                if s.passed { "ok" } else { "failed" }
            ));
        }
    }
}

/// The three reference sequences with display names.
pub fn cases() -> [(&'static str, AlphaSequence); 3] {
    [
        ("A q=1", AlphaSequence::case_a(1.0).expect("valid q")),
        ("B lambda=1/2", AlphaSequence::case_b(0.5).expect("valid lambda")),
        ("C lambda=0.4", AlphaSequence::case_c(0.4).expect("valid lambda")),
    ]
}

/// Run a verifier with default depth and tolerance.
pub fn run(lemma: LemmaId, seq: &AlphaSequence, range: Option<[usize; 2]>) -> Verification {
    verify_lemma(lemma, seq, VerifyOptions { range, ..Default::default() }).expect("verifier runs")
}

/// Evaluate and print every criterion in order; returns the ids that failed.
pub fn report(criteria: &[fn() -> Criterion]) -> Vec<u32> {
    let mut red = Vec::new();
    for f in criteria {
        let start = Instant::now();
        let c = f();
        println!(
            "[{}] criterion {:>2}: {} ({:.2}s)",
            if c.passed { "PASS" } else { "FAIL" },
            c.id,
            c.title,
            start.elapsed().as_secs_f64()
        );
        for line in &c.lines {
            println!("        {line}");
        }
        if !c.passed {
            red.push(c.id);
        }
    }
    red
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gate_tracks_failure() {
        let mut c = Criterion::new(1, "t");
        c.gate(true, "a".into());
        c.note("b".into());
        assert!(c.passed);
        c.gate(false, "c".into());
        assert!(!c.passed);
        assert_eq!(c.lines, ["ok   a", "info b", "FAIL c"]);
    }
}
