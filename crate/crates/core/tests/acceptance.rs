//! Full acceptance scoreboard. Prints one PASS/FAIL line per criterion and
//! fails the run only on criteria that are not documented as structurally
//! unattainable (see `acceptance::KNOWN_UNATTAINABLE` and the module docs).

use paravolt_core::acceptance;

#[test]
fn acceptance_scoreboard() {
    let results = acceptance::run_all();
    let mut regressions = Vec::new();
    for c in &results {
        let verdict = if c.passed { "PASS" } else { "FAIL" };
        println!("{verdict} {} ({:.1} s): {}", c.name, c.seconds, c.detail);
        if !c.passed && !acceptance::KNOWN_UNATTAINABLE.contains(&c.name) {
            regressions.push(c.name);
        }
    }
    assert!(regressions.is_empty(), "criteria failed: {regressions:?}");
}
