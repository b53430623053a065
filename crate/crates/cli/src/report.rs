use serde::Serialize;
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
}

/// One verified property with its measurement.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub measured: Option<f64>,
    pub bound: Option<f64>,
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
}

impl Check {
    fn new(name: impl Into<String>, ok: bool, measured: Option<f64>, bound: Option<f64>, tolerance: Option<f64>) -> Self {
        let status = if ok { Status::Pass } else { Status::Fail };
        let witness = (!ok).then(|| serde_json::json!({ "measured": measured, "bound": bound }));
        Check { name: name.into(), status, measured, bound, tolerance, witness }
    }

    /// measured <= bound.
    pub fn at_most(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Check::new(name, measured <= bound, Some(measured), Some(bound), None)
    }

    /// measured < bound.
    pub fn below(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Check::new(name, measured < bound, Some(measured), Some(bound), None)
    }

    /// measured >= bound.
    pub fn at_least(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Check::new(name, measured >= bound, Some(measured), Some(bound), None)
    }

    /// |measured - target| <= tol * |target|.
    pub fn relative(name: impl Into<String>, measured: f64, target: f64, tol: f64) -> Self {
        Check::new(name, (measured - target).abs() <= tol * target.abs(), Some(measured), Some(target), Some(tol))
    }

    pub fn flag(name: impl Into<String>, ok: bool, witness: Value) -> Self {
        let status = if ok { Status::Pass } else { Status::Fail };
        Check {
            name: name.into(),
            status,
            measured: None,
            bound: None,
            tolerance: None,
            witness: (!ok).then_some(witness),
        }
    }

    pub fn with_witness(mut self, w: Value) -> Self {
        if self.status == Status::Fail {
            self.witness = Some(w);
        }
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

/// Build facts that determine numerical output; nothing run-dependent.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Environment {
    pub version: &'static str,
    pub arch: &'static str,
    pub os: &'static str,
    pub float: &'static str,
}

impl Default for Environment {
    fn default() -> Self {
        Environment {
            version: env!("CARGO_PKG_VERSION"),
            arch: std::env::consts::ARCH,
            os: std::env::consts::OS,
            float: "ieee754-binary64",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub command: Vec<String>,
    pub checks: Vec<Check>,
    pub environment: Environment,
}

impl Report {
    pub fn new(command: Vec<String>) -> Self {
        Report { command, checks: Vec::new(), environment: Environment::default() }
    }

    pub fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn extend(&mut self, cs: impl IntoIterator<Item = Check>) {
        self.checks.extend(cs);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Serializes rows as CSV with a header line.
pub fn csv_bytes<T: Serialize>(rows: &[T]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("row serializes");
    }
    w.into_inner().expect("in-memory writer")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failures_carry_witnesses() {
        let c = Check::below("x", 2.0, 1.0);
        assert!(!c.passed() && c.witness.is_some());
        let c = Check::below("x", 0.5, 1.0);
        assert!(c.passed() && c.witness.is_none());
        let c = Check::flag("y", false, serde_json::json!({"why": 1}));
        assert_eq!(c.witness, Some(serde_json::json!({"why": 1})));
    }

    #[test]
    fn csv_has_header() {
        #[derive(Serialize)]
        struct Row {
            a: u32,
            b: f64,
        }
        let out = String::from_utf8(csv_bytes(&[Row { a: 1, b: 0.5 }])).unwrap();
        assert_eq!(out, "a,b\n1,0.5\n");
    }
}
