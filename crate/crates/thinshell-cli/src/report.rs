//! Check reports and their CSV form.

use std::fmt;
use std::path::Path;

use crate::io::num;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Relation {
    AtMost(f64),
    AtLeast(f64),
    Within { center: f64, band: f64 },
    Equals(f64),
    Info,
}

impl Relation {
    fn holds(&self, x: f64) -> bool {
        match *self {
            Relation::AtMost(t) => x <= t,
            Relation::AtLeast(t) => x >= t,
            Relation::Within { center, band } => (x - center).abs() <= band,
            Relation::Equals(t) => x == t,
            Relation::Info => true,
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Relation::AtMost(_) => "<=",
            Relation::AtLeast(_) => ">=",
            Relation::Within { .. } => "within",
            Relation::Equals(_) => "==",
            Relation::Info => "info",
        }
    }

    fn threshold(&self) -> String {
        match *self {
            Relation::AtMost(t) | Relation::AtLeast(t) | Relation::Equals(t) => num(t),
            Relation::Within { center, band } => format!("{}+-{}", num(center), num(band)),
            Relation::Info => String::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skipped,
    Info,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
            Status::Info => "info",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub id: String,
    pub measured: Option<f64>,
    pub relation: Relation,
    pub status: Status,
}

#[derive(Clone, Debug, Default)]
pub struct CheckReport {
    pub checks: Vec<Check>,
    pub environment: Vec<(String, String)>,
}

impl CheckReport {
    pub fn check(&mut self, id: impl Into<String>, measured: f64, relation: Relation) -> bool {
        let status = match relation {
            Relation::Info => Status::Info,
            r if r.holds(measured) => Status::Pass,
            _ => Status::Fail,
        };
        self.checks.push(Check { id: id.into(), measured: Some(measured), relation, status });
        status != Status::Fail
    }

    pub fn at_most(&mut self, id: impl Into<String>, measured: f64, tol: f64) -> bool {
        self.check(id, measured, Relation::AtMost(tol))
    }

    pub fn at_least(&mut self, id: impl Into<String>, measured: f64, bound: f64) -> bool {
        self.check(id, measured, Relation::AtLeast(bound))
    }

    pub fn info(&mut self, id: impl Into<String>, measured: f64) {
        self.check(id, measured, Relation::Info);
    }

    pub fn skip(&mut self, id: impl Into<String>, relation: Relation) {
        self.checks.push(Check { id: id.into(), measured: None, relation, status: Status::Skipped });
    }

    /// A check that could not be evaluated.
    pub fn fail(&mut self, id: impl Into<String>, relation: Relation) {
        self.checks.push(Check { id: id.into(), measured: None, relation, status: Status::Fail });
    }

    pub fn env(&mut self, key: impl Into<String>, value: impl fmt::Display) {
        self.environment.push((key.into(), value.to_string()));
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    /// Writes report.csv and environment.csv into `dir`.
    pub fn write(&self, dir: &Path) -> csv::Result<()> {
        let mut w = csv::Writer::from_path(dir.join("report.csv"))?;
        w.write_record(["check", "measured", "relation", "threshold", "status"])?;
        for c in &self.checks {
            let measured = c.measured.map(num).unwrap_or_default();
            w.write_record([
                c.id.as_str(),
                &measured,
                c.relation.symbol(),
                &c.relation.threshold(),
                &c.status.to_string(),
            ])?;
        }
        w.flush()?;
        let mut w = csv::Writer::from_path(dir.join("environment.csv"))?;
        w.write_record(["key", "value"])?;
        for (k, v) in &self.environment {
            w.write_record([k, v])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let m = c.measured.map(|m| format!("{m:.3e}")).unwrap_or_else(|| "-".into());
            out += &format!(
                "{:<7} {:<48} {:>11} {} {}\n",
                c.status,
                c.id,
                m,
                c.relation.symbol(),
                c.relation.threshold()
            );
        }
        let failed = self.checks.iter().filter(|c| c.status == Status::Fail).count();
        out += &format!("{} checks, {} failed\n", self.checks.len(), failed);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_iff_all_pass() {
        let mut r = CheckReport::default();
        assert!(r.at_most("a", 1e-13, 1e-12));
        r.info("b", 4.0);
        r.skip("c", Relation::AtLeast(3.0));
        assert!(r.passed());
        assert!(!r.check("d", 2.5, Relation::Within { center: 2.0, band: 0.2 }));
        assert!(!r.passed());
    }

    #[test]
    fn csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let mut r = CheckReport::default();
        r.at_least("order", 5.5, 3.0);
        r.env("seed", 7);
        r.write(dir.path()).unwrap();
        let text = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
        assert_eq!(text, "check,measured,relation,threshold,status\norder,5.5,>=,3,pass\n");
        let env = std::fs::read_to_string(dir.path().join("environment.csv")).unwrap();
        assert_eq!(env, "key,value\nseed,7\n");
    }
}
