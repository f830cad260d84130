//! Acceptance gate. Runs every criterion in order, prints one pass/fail
//! line each, and exits nonzero if any failed. Same code as `ramlab
//! selftest`; this target makes the gate part of `cargo test`.

use ramlab_cli::selftest::{render_line, run_all};

fn main() {
    let outcomes = run_all(0);
    let mut failed = 0usize;
    for o in &outcomes {
        println!("{}", render_line(o));
        if !o.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        eprintln!("{} of {} criteria failed", failed, outcomes.len());
        std::process::exit(1);
    }
}
