//! Discrete Prekopa–Leindler inequality: hypothesis check, conclusion check
//! and triples generated from the inf-convolution.

use serde::{Deserialize, Serialize};

use super::te::Q_TOL;
use super::{Instance, VerificationReport, Witness, TOL_ADMISSIBLE, TOL_CONCLUSION};
use crate::error::{Error, Result};
use crate::graph::MetricGraph;
use crate::interpolation::{interpolate_pair, Time};
use crate::measure::Measure;
use crate::transport::{inf_convolution_q_with, CostStructure, FwOptions, SimplexQuadratic};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Triple {
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub h: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlInstance {
    pub mu: Measure,
    pub triple: Triple,
    pub t: f64,
    pub c: f64,
}

impl PlInstance {
    pub fn describe(&self, label: &str, family: &str) -> Instance {
        Instance::new(label, family)
            .measure("mu", &self.mu)
            .function("f", &self.triple.f)
            .function("g", &self.triple.g)
            .function("h", &self.triple.h)
            .param("t", self.t)
            .param("c", self.c)
    }
}

/// Outcome of the pointwise hypothesis check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Admissibility {
    pub admissible: bool,
    /// Vertex where the certified lower bound on the slack is smallest.
    pub worst_x: usize,
    /// Certified lower bound (value minus duality gap) of the minimal slack at `worst_x`.
    pub min_slack: f64,
    /// Minimizing measure at `worst_x`.
    pub witness: Vec<f64>,
    pub certified: bool,
}

const HYPOTHESIS_FW: FwOptions = FwOptions { tol: 1e-12, max_iter: 100_000 };

/// For each x, minimizes over m the slack
/// Σ_y m(y) [ν_t^{x,y}(h) − t g(y)] − (1−t) f(x) + c t(1−t) Σ_i (Σ_y d_i(x_i,y_i) m(y))².
pub fn check_admissible(g: &MetricGraph, inst: &PlInstance) -> Result<Admissibility> {
    let n = g.vertex_count();
    inst.mu.check_len(n)?;
    for v in [&inst.triple.f, &inst.triple.g, &inst.triple.h] {
        if v.len() != n {
            return Err(Error::Dimension { expected: n, got: v.len() });
        }
    }
    if !(inst.t > 0.0 && inst.t < 1.0) {
        return Err(Error::TimeOutOfRange(inst.t));
    }
    if !(inst.c > 0.0) {
        return Err(Error::InvalidParameter(format!("c must be positive, got {}", inst.c)));
    }
    let time = Time::new(inst.t)?;
    let t = inst.t;
    let cost = CostStructure::per_coordinate(g.graph());
    let Triple { f, g: gg, h } = &inst.triple;
    let mut best: Option<Admissibility> = None;
    for x in 0..n {
        let linear: Vec<f64> = (0..n)
            .map(|y| interpolate_pair(g, x, y, time).map(|nu| nu.integrate(h) - t * gg[y]))
            .collect::<Result<_>>()?;
        let features: Vec<Vec<f64>> = cost.coordinates().iter().map(|d| d.row(x).to_vec()).collect();
        let problem = SimplexQuadratic { linear: &linear, features: &features, weight: inst.c * t * (1.0 - t) };
        let res = problem.solve(x, HYPOTHESIS_FW);
        let lower = res.value - res.gap - (1.0 - t) * f[x];
        let better = best.as_ref().map_or(true, |b| lower < b.min_slack);
        if better {
            let certified = best.as_ref().map_or(true, |b| b.certified) && res.certified;
            best = Some(Admissibility { admissible: true, worst_x: x, min_slack: lower, witness: res.point, certified });
        } else if let Some(b) = best.as_mut() {
            b.certified &= res.certified;
        }
    }
    let mut adm = best.expect("graph has a vertex");
    adm.admissible = adm.min_slack >= -TOL_ADMISSIBLE;
    Ok(adm)
}

/// ∫e^h dμ ≥ (∫e^f dμ)^{1−t} (∫e^g dμ)^t for admissible triples; inadmissible
/// triples give a vacuous report naming the failing vertex.
pub fn verify_prekopa_leindler(g: &MetricGraph, inst: &PlInstance, family: &str) -> Result<VerificationReport> {
    let adm = check_admissible(g, inst)?;
    let instance = inst.describe(g.label(), family);
    let mut witness = Witness::new("hypothesis_minimizer");
    witness.at = Some(adm.worst_x as f64);
    witness.measure = Some(adm.witness.clone());
    if !adm.admissible {
        let note = format!("hypothesis fails at x={}, witness m={:?}", adm.worst_x, adm.witness);
        return Ok(VerificationReport::vacuous("pl.conclusion", instance, note).with_witness(witness));
    }
    let mu = &inst.mu;
    let t = inst.t;
    let exp_int = |v: &[f64]| mu.weights().iter().zip(v).map(|(w, x)| w * x.exp()).sum::<f64>();
    let lhs = exp_int(&inst.triple.f).powf(1.0 - t) * exp_int(&inst.triple.g).powf(t);
    let rhs = exp_int(&inst.triple.h);
    Ok(VerificationReport::check("pl.conclusion", instance, lhs, rhs, TOL_CONCLUSION * lhs)
        .with_witness(witness)
        .certified(adm.certified))
}

/// h = 0, g = −(1−t)k, f = t·Qk.
pub fn generator_triple(g: &MetricGraph, k: &[f64], t: f64, c: f64) -> Result<Triple> {
    let q = inf_convolution_q_with(g.graph(), k, c, FwOptions { tol: Q_TOL, ..FwOptions::default() })?;
    Ok(Triple {
        f: q.values.iter().map(|v| t * v).collect(),
        g: k.iter().map(|v| -(1.0 - t) * v).collect(),
        h: vec![0.0; k.len()],
    })
}

/// Every triple with values in `values` at every vertex, for every t in `times`.
pub fn exhaustive_triples(g: &MetricGraph, mu: &Measure, values: &[f64], times: &[f64], c: f64) -> Result<Vec<VerificationReport>> {
    let n = g.vertex_count();
    let slots = 3 * n;
    let total = values.len().checked_pow(slots as u32).filter(|t| *t <= 1 << 20).ok_or_else(|| {
        Error::InvalidParameter(format!("{} values on {} slots is too many triples", values.len(), slots))
    })?;
    let mut out = Vec::with_capacity(total * times.len());
    for &t in times {
        for code in 0..total {
            let mut rest = code;
            let mut pick = |len: usize| -> Vec<f64> {
                (0..len)
                    .map(|_| {
                        let v = values[rest % values.len()];
                        rest /= values.len();
                        v
                    })
                    .collect()
            };
            let triple = Triple { f: pick(n), g: pick(n), h: pick(n) };
            let inst = PlInstance { mu: mu.clone(), triple, t, c };
            out.push(verify_prekopa_leindler(g, &inst, "exhaustive")?);
        }
    }
    Ok(out)
}
