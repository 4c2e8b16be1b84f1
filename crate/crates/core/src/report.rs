//! Greppable check reports: one `PASS name: witness` or `FAIL name: witness`
//! line per check, then a summary line.

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub witness: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, witness: impl Into<String>) -> Self {
        Check { name: name.into(), passed, witness: witness.into() }
    }

    pub fn line(&self) -> String {
        format!("{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.witness)
    }
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.passed)
}

pub fn report(checks: &[Check]) -> String {
    let mut out: String = checks.iter().map(|c| c.line() + "\n").collect();
    let failed = checks.iter().filter(|c| !c.passed).count();
    if failed == 0 {
        out.push_str(&format!("ALL PASS ({} checks)\n", checks.len()));
    } else {
        out.push_str(&format!("FAILED ({failed} of {} checks)\n", checks.len()));
    }
    out
}
