//! Residual records and the structured suite report.

use serde::{Deserialize, Serialize};

/// A named residual produced by a module-level check, before a tolerance is attached.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub name: String,
    /// The identity being tested, written out.
    pub relation: String,
    pub residual: f64,
}

impl Residual {
    pub fn new(name: impl Into<String>, relation: impl Into<String>, residual: f64) -> Self {
        Residual { name: name.into(), relation: relation.into(), residual }
    }
}

/// Largest residual in a list, 0 for an empty list.
pub fn max_residual(rs: &[Residual]) -> f64 {
    rs.iter().map(|r| r.residual).fold(0.0, f64::max)
}

/// One line of a [`CheckReport`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub context: String,
    pub relation: String,
}

impl Check {
    /// Passes iff `residual < tolerance`; NaN never passes.
    pub fn new(name: impl Into<String>, residual: f64, tolerance: f64, context: impl Into<String>, relation: impl Into<String>) -> Self {
        Check { name: name.into(), residual, tolerance, pass: residual < tolerance, context: context.into(), relation: relation.into() }
    }

    /// A check that `value` exceeds `threshold`, used for negative controls and nondegeneracy.
    ///
    /// Stored as the ratio `threshold / value` against tolerance 1, so that the pass rule
    /// stays `residual < tolerance`.
    pub fn above(name: impl Into<String>, value: f64, threshold: f64, context: impl Into<String>, relation: impl Into<String>) -> Self {
        let ratio = if value > 0.0 { (threshold / value).min(f64::MAX) } else { f64::MAX };
        Self::new(name, ratio, 1.0, context, relation)
    }

    pub fn from_residual(r: &Residual, tolerance: f64, context: impl Into<String>) -> Self {
        Self::new(r.name.clone(), r.residual, tolerance, context, r.relation.clone())
    }

    /// A boolean fact, recorded with residual 0 when true and 1 when false.
    pub fn holds(name: impl Into<String>, ok: bool, context: impl Into<String>, relation: impl Into<String>) -> Self {
        Self::new(name, if ok { 0.0 } else { 1.0 }, 0.5, context, relation)
    }
}

/// Outcome of a verification suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub suite: String,
    pub checks: Vec<Check>,
    pub params_fingerprint: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_time_ms: Option<u64>,
}

impl CheckReport {
    /// Builds a report with checks sorted by name, then context.
    pub fn new(suite: impl Into<String>, mut checks: Vec<Check>, params_fingerprint: String, seed: u64) -> Self {
        checks.sort_by(|a, b| a.name.cmp(&b.name).then_with(|| a.context.cmp(&b.context)));
        CheckReport { suite: suite.into(), checks, params_fingerprint, seed, wall_time_ms: None }
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    /// Worst residual among checks whose name starts with `prefix`.
    pub fn worst(&self, prefix: &str) -> f64 {
        self.checks.iter().filter(|c| c.name.starts_with(prefix)).map(|c| c.residual).fold(0.0, f64::max)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_iff_below_tolerance() {
        assert!(Check::new("a", 1e-10, 1e-9, "", "").pass);
        assert!(!Check::new("a", 1e-9, 1e-9, "", "").pass);
        assert!(!Check::new("a", f64::NAN, 1e-9, "", "").pass);
        assert!(Check::above("b", 1e-2, 1e-3, "", "").pass);
    }

    #[test]
    fn checks_sorted_and_aggregated() {
        let r = CheckReport::new(
            "s",
            vec![Check::new("z", 0.0, 1.0, "", ""), Check::new("a", 2.0, 1.0, "n=3", ""), Check::new("a", 0.0, 1.0, "n=2", "")],
            String::new(),
            1,
        );
        let names: Vec<_> = r.checks.iter().map(|c| (c.name.as_str(), c.context.as_str())).collect();
        assert_eq!(names, [("a", "n=2"), ("a", "n=3"), ("z", "")]);
        assert!(!r.pass());
        assert_eq!(r.failures().count(), 1);
        assert!(!r.to_json_string().contains("wall_time_ms"));
    }
}
