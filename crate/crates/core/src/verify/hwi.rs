//! HWI, reinforced and modified log-Sobolev, and reinforced Pinsker inequalities.

use serde::{Deserialize, Serialize};

use super::{worst_over, Instance, VerificationReport, Witness, TOL_CLOSED_FORM, TOL_SOLVER};
use crate::error::{Error, Result};
use crate::graph::{Graph, MetricGraph};
use crate::interpolation::{entropy_derivative_at_zero, interpolate_coupling, Time};
use crate::measure::{entropy_functional, relative_entropy, total_variation_l1, Coupling, Measure};
use crate::tensorize::{knothe_rosenblatt, product_costs, KrSpec};
use crate::transport::{hamming_optimal_coupling, hamming_t2_closed_form, weak_t2_tensorized, TransportResult};

/// Displacement convexity constant of the hypercube for I₂⁽ⁿ⁾ + Ī₂⁽ⁿ⁾.
pub const HYPERCUBE_C: f64 = 0.5;

/// ε ∈ {0.1, 0.2, …, 1.0}, i.e. a grid of (0, 2c] for c = 1/2.
pub fn default_epsilon_grid() -> Vec<f64> {
    (1..=10).map(|i| i as f64 / 10.0).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HwiFamily {
    Product,
    Complete,
    TwoPoint,
}

impl HwiFamily {
    pub fn name(self) -> &'static str {
        match self {
            HwiFamily::Product => "product",
            HwiFamily::Complete => "complete",
            HwiFamily::TwoPoint => "two_point",
        }
    }

    pub fn parse(s: &str) -> Result<HwiFamily> {
        Ok(match s {
            "product" | "hypercube" => HwiFamily::Product,
            "complete" => HwiFamily::Complete,
            "two_point" => HwiFamily::TwoPoint,
            _ => return Err(Error::InvalidParameter(format!("unknown HWI family `{s}`"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LsiFamily {
    Reinforced,
    HypercubeModified,
    Pinsker,
}

impl LsiFamily {
    pub fn name(self) -> &'static str {
        match self {
            LsiFamily::Reinforced => "reinforced",
            LsiFamily::HypercubeModified => "hypercube_modified",
            LsiFamily::Pinsker => "pinsker",
        }
    }

    pub fn parse(s: &str) -> Result<LsiFamily> {
        Ok(match s {
            "reinforced" => LsiFamily::Reinforced,
            "hypercube_modified" | "modified" => LsiFamily::HypercubeModified,
            "pinsker" => LsiFamily::Pinsker,
            _ => return Err(Error::InvalidParameter(format!("unknown log-Sobolev family `{s}`"))),
        })
    }
}

/// μ, ν₀ and ν₁. The complete and two-point statements take ν₁ = μ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HwiInstance {
    pub mu: Measure,
    pub nu0: Measure,
    pub nu1: Measure,
}

/// Reference μ and a positive density f; `target` is the second measure of
/// the Pinsker checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LsiInstance {
    pub mu: Measure,
    pub f: Vec<f64>,
    #[serde(default)]
    pub target: Option<Measure>,
}

fn density(nu: &Measure, mu: &Measure) -> Option<Vec<f64>> {
    let f: Vec<f64> = nu.weights().iter().zip(mu.weights()).map(|(a, b)| if *b > 0.0 { a / b } else { f64::NAN }).collect();
    f.iter().all(|v| *v > 0.0 && v.is_finite()).then_some(f)
}

fn all_two_point(g: &Graph) -> bool {
    g.layout().factors().iter().all(|f| f.vertex_count() == 2)
}

/// Σ_x w(x) Σ_i [Σ_{z∈N_i(x)} (F(x) − F(z))]₊², N_i(x) the neighbors differing from x in coordinate i.
pub fn coordinate_dirichlet(g: &Graph, log_f: &[f64], weight: &[f64]) -> f64 {
    let layout = g.layout();
    let dims = layout.len();
    let mut total = 0.0;
    let mut sums = vec![0.0; dims];
    for x in 0..g.vertex_count() {
        if weight[x] == 0.0 {
            continue;
        }
        sums.iter_mut().for_each(|s| *s = 0.0);
        for &z in g.neighbors(x) {
            let i = (0..dims).find(|&i| layout.coordinate(x, i) != layout.coordinate(z, i)).expect("neighbors differ");
            sums[i] += log_f[x] - log_f[z];
        }
        total += weight[x] * sums.iter().map(|s| s.max(0.0).powi(2)).sum::<f64>();
    }
    total
}

/// ℰ_μ(f, log f) for the uniform jump chain on the complete graph.
pub fn complete_dirichlet_form(mu: &Measure, f: &[f64]) -> f64 {
    let n = f.len();
    let mut acc = 0.0;
    for x in 0..n {
        for y in 0..n {
            acc += (f[y] - f[x]) * (f[y].ln() - f[x].ln()) * mu.get(x) * mu.get(y);
        }
    }
    acc / 2.0
}

/// p(1−p)(f(1) − f(0))(log f(1) − log f(0)) for μ = Bernoulli(p), p = μ(1).
pub fn two_point_dirichlet_form(mu: &Measure, f: &[f64]) -> f64 {
    let p = mu.get(1);
    p * (1.0 - p) * (f[1] - f[0]) * (f[1].ln() - f[0].ln())
}

pub fn verify_hwi(g: &MetricGraph, family: HwiFamily, inst: &HwiInstance) -> Result<Vec<VerificationReport>> {
    let graph = g.graph();
    let n = graph.vertex_count();
    for m in [&inst.mu, &inst.nu0, &inst.nu1] {
        m.check_len(n)?;
    }
    let mu = &inst.mu;
    let base = Instance::new(graph.label(), family.name());
    match family {
        HwiFamily::Complete | HwiFamily::TwoPoint => {
            let ok = if family == HwiFamily::Complete { graph.is_complete() } else { n == 2 };
            if !ok {
                return Err(Error::InvalidParameter(format!("graph `{}` is not in the {} family", graph.label(), family.name())));
            }
            let nu0 = &inst.nu0;
            let id = format!("hwi.{}", family.name());
            let instance = base.measure("mu", mu).measure("nu0", nu0);
            let Some(f) = density(nu0, mu) else {
                return Ok(vec![VerificationReport::vacuous(&id, instance, "density must be strictly positive")]);
            };
            let instance = instance.function("f", &f);
            if family == HwiFamily::Complete && mu.weights().iter().any(|w| (w - 1.0 / n as f64).abs() > 1e-12) {
                return Ok(vec![VerificationReport::vacuous(&id, instance, "reference measure must be uniform")]);
            }
            let energy = if family == HwiFamily::Complete { complete_dirichlet_form(mu, &f) } else { two_point_dirichlet_form(mu, &f) };
            let ent = entropy_functional(mu, &f);
            let cost = hamming_t2_closed_form(nu0, mu) + hamming_t2_closed_form(mu, nu0);
            let witness = Witness::new("hamming_optimal").coupling(&hamming_optimal_coupling(nu0, mu));
            let mut out = vec![VerificationReport::check(&id, instance.clone(), ent, energy - 0.5 * cost, TOL_CLOSED_FORM)
                .with_witness(witness.clone())];
            if family == HwiFamily::TwoPoint {
                let c = nu0.get(0) - mu.get(0);
                let id = "hwi.two_point.reinforced_tv";
                out.push(VerificationReport::check(id, instance, ent, energy - 2.0 * c * c, TOL_CLOSED_FORM).with_witness(witness));
            }
            Ok(out)
        }
        HwiFamily::Product => product_hwi(g, inst, base),
    }
}

fn product_hwi(g: &MetricGraph, inst: &HwiInstance, base: Instance) -> Result<Vec<VerificationReport>> {
    let graph = g.graph();
    if !graph.layout().factors().iter().all(Graph::is_complete) {
        return Err(Error::InvalidParameter(format!("graph `{}` is not a product of complete graphs", graph.label())));
    }
    let (mu, nu0, nu1) = (&inst.mu, &inst.nu0, &inst.nu1);
    let instance = base.measure("mu", mu).measure("nu0", nu0).measure("nu1", nu1);
    let Some(f0) = density(nu0, mu) else {
        let r = VerificationReport::vacuous("hwi.product", instance.clone(), "nu0 density must be strictly positive");
        return Ok(vec![r.clone(), VerificationReport { id: "hwi.product.derivative".into(), ..r }]);
    };
    let h1 = relative_entropy(nu1, mu);
    if !h1.is_finite() {
        let r = VerificationReport::vacuous("hwi.product", instance.clone(), "nu1 not absolutely continuous with respect to mu");
        return Ok(vec![r.clone(), VerificationReport { id: "hwi.product.derivative".into(), ..r }]);
    }
    let h0 = relative_entropy(nu0, mu);
    let c = HYPERCUBE_C;
    let spec = KrSpec::new(graph);
    let log_f: Vec<f64> = f0.iter().map(|v| v.ln()).collect();
    let a = coordinate_dirichlet(graph, &log_f, nu0.weights());
    let two_point = all_two_point(graph);
    let evaluate = |pi: &Coupling, tol: f64, kind: &str| -> Result<(VerificationReport, VerificationReport)> {
        let costs = product_costs(&spec, pi);
        let penalty = c * (costs.i2 + costs.i2_bar);
        let witness = Witness::new(kind).coupling(pi);
        let sqrt_form = if two_point {
            let rhs = h1 + a.sqrt() * costs.i2.sqrt() - penalty;
            VerificationReport::check("hwi.product", instance.clone(), h0, rhs, tol).with_witness(witness.clone())
        } else {
            VerificationReport::vacuous("hwi.product", instance.clone(), "coordinate gradient bound needs two-vertex factors")
        };
        let slope = entropy_derivative_at_zero(g, pi, mu)?;
        let rhs = h1 - slope - penalty;
        let derivative = VerificationReport::check("hwi.product.derivative", instance.clone(), h0, rhs, tol).with_witness(witness);
        Ok((sqrt_form, derivative))
    };
    let kr = knothe_rosenblatt(&spec, nu0, nu1)?;
    let (r1, r2) = evaluate(&kr, TOL_CLOSED_FORM, "knothe_rosenblatt")?;
    if r1.pass && r2.pass {
        return Ok(vec![r1, r2]);
    }
    let weak = weak_t2_tensorized(graph, nu0, nu1)?;
    let (w1, w2) = evaluate(&weak.witness, TOL_SOLVER, "weak_t2_optimal")?;
    let pick = |kr_r: VerificationReport, weak_r: VerificationReport| {
        if kr_r.pass {
            kr_r
        } else if weak_r.pass {
            weak_r.with_note("knothe_rosenblatt failed; weak_t2_optimal passed").certified(weak.certified)
        } else {
            weak_r.with_note("knothe_rosenblatt and weak_t2_optimal failed").certified(weak.certified)
        }
    };
    Ok(vec![pick(r1, w1), pick(r2, w2)])
}

fn solver_note(results: &[&TransportResult]) -> bool {
    results.iter().all(|r| r.certified)
}

pub fn verify_log_sobolev(
    g: &MetricGraph,
    family: LsiFamily,
    inst: &LsiInstance,
    eps_grid: &[f64],
) -> Result<Vec<VerificationReport>> {
    let graph = g.graph();
    let mu = &inst.mu;
    mu.check_len(graph.vertex_count())?;
    if inst.f.len() != graph.vertex_count() {
        return Err(Error::Dimension { expected: graph.vertex_count(), got: inst.f.len() });
    }
    let id = format!("lsi.{}", family.name());
    let base = Instance::new(graph.label(), family.name()).measure("mu", mu);
    if inst.f.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Ok(vec![VerificationReport::vacuous(&id, base.function("f", &inst.f), "density must be strictly positive")]);
    }
    let z = mu.integrate(&inst.f);
    let f: Vec<f64> = inst.f.iter().map(|v| v / z).collect();
    let nu = Measure::with_density(mu, &f);
    let instance = base.function("f", &f);
    match family {
        LsiFamily::Reinforced | LsiFamily::HypercubeModified => {
            if !all_two_point(graph) {
                return Err(Error::InvalidParameter(format!("graph `{}` is not a hypercube", graph.label())));
            }
            let c = HYPERCUBE_C;
            let ent = entropy_functional(mu, &f);
            let log_f: Vec<f64> = f.iter().map(|v| v.ln()).collect();
            let fmu = nu.weights();
            let d = coordinate_dirichlet(graph, &log_f, fmu);
            let to_mu = weak_t2_tensorized(graph, &nu, mu)?;
            let from_mu = weak_t2_tensorized(graph, mu, &nu)?;
            let certified = solver_note(&[&to_mu, &from_mu]);
            if family == LsiFamily::HypercubeModified {
                let rhs = 0.5 * d - 0.5 * from_mu.value;
                let w = Witness::new("weak_t2_optimal").coupling(&from_mu.witness);
                return Ok(vec![VerificationReport::check(&id, instance, ent, rhs, TOL_SOLVER).with_witness(w).certified(certified)]);
            }
            let grid: Vec<f64> = eps_grid.iter().copied().filter(|e| *e > 0.0 && *e <= 2.0 * c).collect();
            if grid.is_empty() {
                return Err(Error::InvalidParameter("epsilon grid must meet (0, 2c]".into()));
            }
            let worst = worst_over(&grid, |e| (ent, d / (2.0 * e) - (c - e / 2.0) * to_mu.value - c * from_mu.value));
            let w = Witness::new("weak_t2_optimal").coupling(&to_mu.witness).grid(&grid, worst.at);
            Ok(vec![VerificationReport::check(&id, instance, worst.lhs, worst.rhs, TOL_SOLVER).with_witness(w).certified(certified)])
        }
        LsiFamily::Pinsker => {
            if !graph.is_complete() {
                return Err(Error::InvalidParameter(format!("graph `{}` is not complete", graph.label())));
            }
            let target = inst.target.clone().unwrap_or_else(|| mu.clone());
            target.check_len(graph.vertex_count())?;
            let instance = instance.measure("target", &target);
            pinsker(g, mu, &nu, &target, instance)
        }
    }
}

fn pinsker(g: &MetricGraph, mu: &Measure, nu0: &Measure, nu1: &Measure, instance: Instance) -> Result<Vec<VerificationReport>> {
    let tv = total_variation_l1(nu0, nu1);
    let pi = hamming_optimal_coupling(nu0, nu1);
    let witness = Witness::new("hamming_optimal").coupling(&pi);
    let grid = super::default_t_grid();
    let (h0, h1) = (relative_entropy(nu0, mu), relative_entropy(nu1, mu));
    let mut out = Vec::new();
    if h0.is_finite() && h1.is_finite() {
        let mut err = None;
        let worst = worst_over(&grid, |t| {
            let lhs = match Time::new(t).and_then(|time| interpolate_coupling(g, &pi, time)) {
                Ok(m) => relative_entropy(&m, mu),
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            };
            (lhs, (1.0 - t) * h0 + t * h1 - 0.5 * t * (1.0 - t) * tv * tv)
        });
        if let Some(e) = err {
            return Err(e);
        }
        let w = witness.clone().grid(&grid, worst.at);
        out.push(VerificationReport::check("lsi.pinsker.dc", instance.clone(), worst.lhs, worst.rhs, TOL_CLOSED_FORM).with_witness(w));
    } else {
        out.push(VerificationReport::vacuous("lsi.pinsker.dc", instance.clone(), "endpoint not absolutely continuous with respect to mu"));
    }
    let weak_sum = hamming_t2_closed_form(nu0, nu1) + hamming_t2_closed_form(nu1, nu0);
    let near = tv * tv / (1.0 + tv / 2.0);
    out.push(VerificationReport::check("lsi.pinsker.near_tightness", instance.clone(), near, weak_sum, TOL_CLOSED_FORM).with_witness(witness.clone()));
    out.push(VerificationReport::check("lsi.pinsker.half", instance.clone(), tv * tv / 2.0, near, TOL_CLOSED_FORM).with_witness(witness.clone()));
    out.push(VerificationReport::check("lsi.pinsker.ckp", instance, tv * tv, 2.0 * relative_entropy(nu1, nu0), TOL_CLOSED_FORM).with_witness(witness));
    Ok(out)
}
