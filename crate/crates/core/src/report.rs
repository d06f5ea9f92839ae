//! Machine-readable outcome of a verification sweep.

use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// Finite precision could not decide the inequality.
    Undecided,
    /// Not enough levels or samples to run the check.
    InsufficientData,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Undecided => "undecided",
            Status::InsufficientData => "insufficient-data",
        }
    }
}

/// Result of one criterion check.
///
/// `margin` is the worst observed ratio or difference against the threshold,
/// normalized so that the check passes iff `margin >= tolerance`.
#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub id: String,
    pub params: Vec<(String, String)>,
    pub margin: f64,
    pub tolerance: f64,
    pub status: Status,
    pub witness: Option<String>,
    pub samples: u64,
    pub notes: Vec<String>,
}

impl CriterionReport {
    pub fn new(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            params: Vec::new(),
            margin: f64::INFINITY,
            tolerance: 1.0,
            status: Status::Pass,
            witness: None,
            samples: 0,
            notes: Vec::new(),
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.push((key.to_string(), value.to_string()));
        self
    }

    pub fn add_param(&mut self, key: &str, value: impl ToString) {
        self.params.push((key.to_string(), value.to_string()));
    }

    /// First value recorded under `key`.
    pub fn get(&self, key: &str) -> Option<&str> {
        self.params.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    /// Sets status from `margin >= tolerance`.
    pub fn decide(&mut self) {
        self.status = if self.margin >= self.tolerance { Status::Pass } else { Status::Fail };
    }

    /// Folds `other` into `self`: worst margin wins, the first failing witness is kept.
    pub fn absorb(&mut self, other: &CriterionReport) {
        self.samples += other.samples;
        if other.margin < self.margin {
            self.margin = other.margin;
            if other.witness.is_some() {
                self.witness = other.witness.clone();
            }
        }
        let rank = |s: Status| match s {
            Status::Pass => 0,
            Status::InsufficientData => 1,
            Status::Undecided => 2,
            Status::Fail => 3,
        };
        if rank(other.status) > rank(self.status) {
            self.status = other.status;
            if other.witness.is_some() {
                self.witness = other.witness.clone();
            }
        }
        for n in &other.notes {
            self.notes.push(format!("{}: {}", other.id, n));
        }
    }

    /// Deterministic `key=value` rendering (floats with 17 significant digits).
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "[report {}]", self.id);
        let _ = writeln!(s, "status={}", self.status.as_str());
        let _ = writeln!(s, "margin={}", fmt_f64(self.margin));
        let _ = writeln!(s, "tolerance={}", fmt_f64(self.tolerance));
        let _ = writeln!(s, "samples={}", self.samples);
        if let Some(w) = &self.witness {
            let _ = writeln!(s, "witness={w}");
        }
        for (k, v) in &self.params {
            let _ = writeln!(s, "param.{k}={v}");
        }
        for (i, n) in self.notes.iter().enumerate() {
            let _ = writeln!(s, "note.{i}={n}");
        }
        s
    }
}

/// Scientific notation with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn absorb_keeps_worst() {
        let mut a = CriterionReport::new("a");
        a.margin = 3.0;
        let mut b = CriterionReport::new("b");
        b.margin = 0.5;
        b.witness = Some("x=0.1".into());
        b.decide();
        a.absorb(&b);
        assert_eq!(a.margin, 0.5);
        assert_eq!(a.status, Status::Fail);
        assert_eq!(a.witness.as_deref(), Some("x=0.1"));
    }

    #[test]
    fn text_is_stable() {
        let r = CriterionReport::new("t").param("n", 2);
        assert_eq!(r.to_text(), r.clone().to_text());
        assert!(r.to_text().contains("param.n=2"));
    }
}
