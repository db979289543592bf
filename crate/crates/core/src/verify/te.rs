//! Transport-entropy inequalities in primal and dual form.

use super::{Instance, VerificationReport, Witness, TOL_CLOSED_FORM, TOL_SOLVER};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::measure::{relative_entropy, Measure};
use crate::tensorize::{knothe_rosenblatt, product_costs, KrSpec};
use crate::transport::{inf_convolution_q_with, weak_t2_tensorized, FwOptions};

/// Largest number of factors for which the weak costs are also solved directly.
pub const DIRECT_SOLVE_MAX_FACTORS: usize = 3;

/// Frank–Wolfe tolerance used for Qk inside the verifiers.
pub const Q_TOL: f64 = 1e-12;

fn check_product(g: &Graph) -> Result<()> {
    if g.layout().factors().iter().all(Graph::is_complete) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("graph `{}` is not a product of complete graphs", g.label())))
    }
}

/// Checks I₂⁽ⁿ⁾(π̂) + Ī₂⁽ⁿ⁾(π̂) ≤ H(ν|μ)/c for the Knothe–Rosenblatt coupling of μ and ν and,
/// on small products, T̃₂⁽ⁿ⁾(ν|μ) + T̃₂⁽ⁿ⁾(μ|ν) ≤ H(ν|μ)/c with directly solved weak costs.
pub fn verify_transport_entropy(g: &Graph, mu: &Measure, nu: &Measure, c: f64) -> Result<Vec<VerificationReport>> {
    check_product(g)?;
    mu.check_len(g.vertex_count())?;
    nu.check_len(g.vertex_count())?;
    let instance = Instance::new(g.label(), "primal").measure("mu", mu).measure("nu", nu).param("c", c);
    let h = relative_entropy(nu, mu);
    if !h.is_finite() {
        let r = VerificationReport::vacuous("te.primal.kr", instance, "nu not absolutely continuous with respect to mu");
        return Ok(vec![r]);
    }
    let spec = KrSpec::new(g);
    let kr = knothe_rosenblatt(&spec, mu, nu)?;
    let costs = product_costs(&spec, &kr);
    let mut out = vec![VerificationReport::check("te.primal.kr", instance.clone(), costs.i2 + costs.i2_bar, h / c, TOL_CLOSED_FORM)
        .with_witness(Witness::new("knothe_rosenblatt").coupling(&kr))];
    if g.layout().len() <= DIRECT_SOLVE_MAX_FACTORS {
        let forward = weak_t2_tensorized(g, mu, nu)?;
        let backward = weak_t2_tensorized(g, nu, mu)?;
        let r = VerificationReport::check("te.primal.direct", instance, forward.value + backward.value, h / c, TOL_SOLVER)
            .with_witness(Witness::new("weak_t2_optimal").coupling(&forward.witness))
            .certified(forward.certified && backward.certified);
        out.push(r);
    }
    Ok(out)
}

/// Checks ∫ e^{Qk} dμ ≤ e^{μ(k)}.
pub fn verify_transport_entropy_dual(g: &Graph, mu: &Measure, k: &[f64], c: f64) -> Result<VerificationReport> {
    check_product(g)?;
    mu.check_len(g.vertex_count())?;
    let q = inf_convolution_q_with(g, k, c, FwOptions { tol: Q_TOL, ..FwOptions::default() })?;
    let lhs: f64 = q.values.iter().zip(mu.weights()).map(|(v, w)| v.exp() * w).sum();
    let rhs = mu.integrate(k).exp();
    let instance = Instance::new(g.label(), "dual").measure("mu", mu).function("k", k).param("c", c);
    let mut witness = Witness::new("inf_convolution");
    witness.measure = Some(q.values.clone());
    Ok(VerificationReport::check("te.dual", instance, lhs, rhs, TOL_SOLVER).with_witness(witness).certified(q.certified))
}
