//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! `cargo test -p cvsheet --test acceptance` runs all of them; a criterion
//! number or key substring as the first argument selects a subset.

use cvsheet::selftest::{run, Settings};

fn main() {
    let filter = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let settings = Settings { filter, ..Default::default() };
    let outcomes = run(&settings, |o| println!("{}", o.line()));
    let failed = outcomes.iter().filter(|o| !o.pass).count();
    println!("acceptance: {} passed, {} failed", outcomes.len() - failed, failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
