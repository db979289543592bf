//! Numerical certification of the entropy inequalities.
//!
//! Every check produces a [`VerificationReport`]: `pass` is `slack ≥ −tol`
//! with `slack = rhs − lhs`, and `status` separates genuine failures from
//! vacuous instances and non-certified solver output.

pub mod dc;
pub mod hwi;
pub mod pl;
pub mod random;
pub mod suite;
pub mod te;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::measure::{Coupling, Measure};

/// Tolerance for closed-form evaluations.
pub const TOL_CLOSED_FORM: f64 = 1e-9;
/// Tolerance when a Frank–Wolfe value enters either side.
pub const TOL_SOLVER: f64 = 1e-7;
/// Tolerance of the W₁ geodesy check.
pub const TOL_GEODESY: f64 = 1e-8;
/// Lower-bound slack accepted when testing the Prekopa–Leindler hypothesis.
pub const TOL_ADMISSIBLE: f64 = 1e-8;
/// Relative tolerance of the Prekopa–Leindler conclusion.
pub const TOL_CONCLUSION: f64 = 1e-9;

/// {0.1, 0.2, …, 0.9}.
pub fn default_t_grid() -> Vec<f64> {
    (1..=9).map(|i| i as f64 / 10.0).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Vacuous,
    NonCertified,
    Informational,
}

/// Data identifying a verified instance.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Instance {
    pub index: usize,
    pub graph: String,
    pub family: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub measures: BTreeMap<String, Vec<f64>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub functions: BTreeMap<String, Vec<f64>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
}

impl Instance {
    pub fn new(graph: &str, family: &str) -> Instance {
        Instance { graph: graph.to_string(), family: family.to_string(), ..Instance::default() }
    }

    pub fn measure(mut self, name: &str, m: &Measure) -> Instance {
        self.measures.insert(name.to_string(), m.weights().to_vec());
        self
    }

    pub fn function(mut self, name: &str, f: &[f64]) -> Instance {
        self.functions.insert(name.to_string(), f.to_vec());
        self
    }

    pub fn param(mut self, name: &str, v: f64) -> Instance {
        self.params.insert(name.to_string(), v);
        self
    }
}

/// Objects certifying a report: the coupling used, the grid scanned and the
/// grid point where the slack was smallest.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Witness {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub grid: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub at: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<Vec<f64>>,
}

impl Witness {
    pub fn new(kind: &str) -> Witness {
        Witness { kind: kind.to_string(), ..Witness::default() }
    }

    pub fn coupling(mut self, pi: &Coupling) -> Witness {
        self.coupling = Some(pi.to_rows());
        self
    }

    pub fn grid(mut self, grid: &[f64], at: f64) -> Witness {
        self.grid = grid.to_vec();
        self.at = Some(at);
        self
    }

    pub fn digest(&self) -> String {
        let text = serde_json::to_string(self).expect("witness serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

mod ext_real {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                _ => Err(serde::de::Error::custom(format!("bad extended real `{t}`"))),
            },
        }
    }
}

/// Outcome of checking one inequality on one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub id: String,
    pub instance: Instance,
    #[serde(with = "ext_real")]
    pub lhs: f64,
    #[serde(with = "ext_real")]
    pub rhs: f64,
    #[serde(with = "ext_real")]
    pub slack: f64,
    pub tol: f64,
    pub pass: bool,
    pub status: Status,
    pub witness_digest: String,
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl VerificationReport {
    /// Checks `lhs ≤ rhs` up to `tol`.
    pub fn check(id: &str, instance: Instance, lhs: f64, rhs: f64, tol: f64) -> VerificationReport {
        let slack = if lhs == rhs { 0.0 } else { rhs - lhs };
        let pass = slack >= -tol;
        VerificationReport {
            id: id.to_string(),
            instance,
            lhs,
            rhs,
            slack,
            tol,
            pass,
            status: if pass { Status::Pass } else { Status::Fail },
            witness_digest: Witness::default().digest(),
            seed: None,
            note: None,
            witness: None,
        }
    }

    /// An instance outside the hypotheses of the statement.
    pub fn vacuous(id: &str, instance: Instance, reason: impl Into<String>) -> VerificationReport {
        let mut r = VerificationReport::check(id, instance, 0.0, 0.0, 0.0);
        r.status = Status::Vacuous;
        r.note = Some(reason.into());
        r
    }

    pub fn with_witness(mut self, w: Witness) -> VerificationReport {
        self.witness_digest = w.digest();
        self.witness = Some(w);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> VerificationReport {
        self.note = Some(note.into());
        self
    }

    /// Marks a failing check as uncertified when a solver did not reach its tolerance.
    pub fn certified(mut self, certified: bool) -> VerificationReport {
        if !certified && !self.pass && self.status != Status::Vacuous {
            self.status = Status::NonCertified;
        }
        self
    }

    /// Reports a quantity that is recorded but is not a claim of the statement.
    pub fn informational(mut self) -> VerificationReport {
        self.status = Status::Informational;
        self
    }

    pub fn with_index(mut self, index: usize, seed: Option<u64>) -> VerificationReport {
        self.instance.index = index;
        self.seed = seed;
        self
    }
}

/// Counts by status; merging is associative and commutative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub pass: usize,
    pub fail: usize,
    pub vacuous: usize,
    pub non_certified: usize,
    pub informational: usize,
    #[serde(with = "ext_real")]
    pub min_slack: f64,
}

impl Default for Summary {
    fn default() -> Self {
        Summary { total: 0, pass: 0, fail: 0, vacuous: 0, non_certified: 0, informational: 0, min_slack: f64::INFINITY }
    }
}

impl Summary {
    pub fn of(reports: &[VerificationReport]) -> Summary {
        reports.iter().map(Summary::single).fold(Summary::default(), Summary::merge)
    }

    pub fn single(r: &VerificationReport) -> Summary {
        let mut s = Summary { total: 1, ..Summary::default() };
        match r.status {
            Status::Pass => s.pass = 1,
            Status::Fail => s.fail = 1,
            Status::Vacuous => s.vacuous = 1,
            Status::NonCertified => s.non_certified = 1,
            Status::Informational => s.informational = 1,
        }
        if matches!(r.status, Status::Pass | Status::Fail) {
            s.min_slack = r.slack;
        }
        s
    }

    pub fn merge(self, other: Summary) -> Summary {
        Summary {
            total: self.total + other.total,
            pass: self.pass + other.pass,
            fail: self.fail + other.fail,
            vacuous: self.vacuous + other.vacuous,
            non_certified: self.non_certified + other.non_certified,
            informational: self.informational + other.informational,
            min_slack: self.min_slack.min(other.min_slack),
        }
    }
}

/// Smallest slack of `rhs(t) − lhs(t)` over a grid.
#[derive(Debug, Clone, Copy)]
pub(crate) struct GridWorst {
    pub at: f64,
    pub lhs: f64,
    pub rhs: f64,
}

pub(crate) fn worst_over(grid: &[f64], mut eval: impl FnMut(f64) -> (f64, f64)) -> GridWorst {
    let mut worst = GridWorst { at: f64::NAN, lhs: 0.0, rhs: 0.0 };
    let mut best = f64::INFINITY;
    for &t in grid {
        let (lhs, rhs) = eval(t);
        let slack = rhs - lhs;
        if slack < best || worst.at.is_nan() {
            best = slack;
            worst = GridWorst { at: t, lhs, rhs };
        }
    }
    worst
}
