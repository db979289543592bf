//! Binomial interpolation between Dirac masses and its mixtures over couplings.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::graph::MetricGraph;
use crate::measure::{Coupling, Measure};

/// Largest `d` for which binomial coefficients are computed exactly.
pub const EXACT_BINOMIAL_MAX: usize = 20;

/// A time in [0, 1] stored together with its complement, so that
/// `reversed()` swaps the pair without rounding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Time {
    t: f64,
    rest: f64,
}

impl Time {
    pub fn new(t: f64) -> Result<Time> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::TimeOutOfRange(t));
        }
        Ok(Time { t, rest: 1.0 - t })
    }

    pub const ZERO: Time = Time { t: 0.0, rest: 1.0 };
    pub const ONE: Time = Time { t: 1.0, rest: 0.0 };

    pub fn value(self) -> f64 {
        self.t
    }

    pub fn complement(self) -> f64 {
        self.rest
    }

    pub fn reversed(self) -> Time {
        Time { t: self.rest, rest: self.t }
    }
}

/// C(d, k) as a float: exact for `d ≤ 20`, through log-gamma above.
pub fn binomial(d: usize, k: usize) -> f64 {
    if k > d {
        return 0.0;
    }
    if d <= EXACT_BINOMIAL_MAX {
        exact_binomial(d, k) as f64
    } else {
        ln_binomial(d, k).exp()
    }
}

fn exact_binomial(d: usize, k: usize) -> u64 {
    let k = k.min(d - k);
    let mut acc = 1u64;
    for i in 0..k {
        acc = acc * (d - i) as u64 / (i + 1) as u64;
    }
    acc
}

pub fn ln_binomial(d: usize, k: usize) -> f64 {
    ln_gamma(d as f64 + 1.0) - (ln_gamma(k as f64 + 1.0) + ln_gamma((d - k) as f64 + 1.0))
}

/// C(d,k) t^k (1−t)^(d−k), with 0⁰ = 1.
fn binomial_mass(d: usize, k: usize, time: Time) -> f64 {
    let (t, s) = (time.t, time.rest);
    if d <= EXACT_BINOMIAL_MAX {
        return exact_binomial(d, k) as f64 * (t.powi(k as i32) * s.powi((d - k) as i32));
    }
    let lt = if k == 0 {
        0.0
    } else if t == 0.0 {
        return 0.0;
    } else {
        k as f64 * t.ln()
    };
    let ls = if d == k {
        0.0
    } else if s == 0.0 {
        return 0.0;
    } else {
        (d - k) as f64 * s.ln()
    };
    (ln_binomial(d, k) + (lt + ls)).exp()
}

/// ν_t^{x,y}(z), zero off the interval ⟦x,y⟧.
pub fn pair_weight(g: &MetricGraph, x: usize, y: usize, z: usize, time: Time) -> f64 {
    let table = g.table();
    if !table.is_between(x, z, y) {
        return 0.0;
    }
    let d = table.dist(x, y);
    let k = table.dist(x, z);
    binomial_mass(d, k, time) * table.through_fraction(x, z, y)
}

fn check_vertices(g: &MetricGraph, vs: &[usize]) -> Result<()> {
    vs.iter().try_for_each(|&v| g.graph().check_vertex(v))
}

/// ν_t^{x,y}: position after Binomial(d(x,y), t) steps along a uniformly chosen geodesic.
pub fn interpolate_pair(g: &MetricGraph, x: usize, y: usize, time: Time) -> Result<Measure> {
    check_vertices(g, &[x, y])?;
    let weights = (0..g.vertex_count()).map(|z| pair_weight(g, x, y, z, time)).collect();
    Ok(Measure::from_raw(weights))
}

/// ν_t^π = Σ π(x,y) ν_t^{x,y}.
pub fn interpolate_coupling(g: &MetricGraph, pi: &Coupling, time: Time) -> Result<Measure> {
    let n = g.vertex_count();
    if pi.size() != n || pi.joint().ncols() != n {
        return Err(Error::Dimension { expected: n, got: pi.size() });
    }
    let mut weights = vec![0.0; n];
    for (x, y, w) in pi.support() {
        for (z, acc) in weights.iter_mut().enumerate() {
            let p = pair_weight(g, x, y, z, time);
            if p > 0.0 {
                *acc += w * p;
            }
        }
    }
    Ok(Measure::from_raw(weights))
}

/// Evaluable path t ↦ ν_t^{x,y}.
#[derive(Debug, Clone, Copy)]
pub struct PairPath<'a> {
    graph: &'a MetricGraph,
    x: usize,
    y: usize,
}

impl<'a> PairPath<'a> {
    pub fn new(graph: &'a MetricGraph, x: usize, y: usize) -> Result<PairPath<'a>> {
        check_vertices(graph, &[x, y])?;
        Ok(PairPath { graph, x, y })
    }

    pub fn at(&self, time: Time) -> Measure {
        interpolate_pair(self.graph, self.x, self.y, time).expect("validated endpoints")
    }

    pub fn reversed(&self) -> PairPath<'a> {
        PairPath { graph: self.graph, x: self.y, y: self.x }
    }
}

/// Evaluable path t ↦ ν_t^π.
#[derive(Debug, Clone)]
pub struct CouplingPath<'a> {
    graph: &'a MetricGraph,
    coupling: Coupling,
}

impl<'a> CouplingPath<'a> {
    pub fn new(graph: &'a MetricGraph, coupling: Coupling) -> Result<CouplingPath<'a>> {
        let n = graph.vertex_count();
        if coupling.size() != n || coupling.joint().ncols() != n {
            return Err(Error::Dimension { expected: n, got: coupling.size() });
        }
        Ok(CouplingPath { graph, coupling })
    }

    pub fn coupling(&self) -> &Coupling {
        &self.coupling
    }

    pub fn at(&self, time: Time) -> Measure {
        interpolate_coupling(self.graph, &self.coupling, time).expect("validated coupling")
    }
}

/// ∇_{x,y}f: the geodesic-averaged mixed gradient, zero off ⟦x,y⟧.
pub fn averaged_gradient(g: &MetricGraph, f: &[f64], x: usize, y: usize) -> Result<Vec<f64>> {
    let n = g.vertex_count();
    if f.len() != n {
        return Err(Error::Dimension { expected: n, got: f.len() });
    }
    check_vertices(g, &[x, y])?;
    let table = g.table();
    let d = table.dist(x, y);
    let mut out = vec![0.0; n];
    if d == 0 {
        return Ok(out);
    }
    for z in 0..n {
        if !table.is_between(x, z, y) {
            continue;
        }
        let (dxz, dzy) = (table.dist(x, z), table.dist(z, y));
        let mut forward = 0.0;
        let mut backward = 0.0;
        for &w in g.graph().neighbors(z) {
            if dzy > 0 && table.dist(w, y) + 1 == dzy {
                forward += table.count_ratio((w, y), (z, y)) * (f[w] - f[z]);
            }
            if dxz > 0 && table.dist(x, w) + 1 == dxz {
                backward += table.count_ratio((x, w), (x, z)) * (f[z] - f[w]);
            }
        }
        out[z] = (dzy as f64 / d as f64) * forward + (dxz as f64 / d as f64) * backward;
    }
    Ok(out)
}

/// ∂_t ν_t^{x,y}(f) = d(x,y) ν_t^{x,y}(∇_{x,y} f).
pub fn pair_derivative(g: &MetricGraph, f: &[f64], x: usize, y: usize, time: Time) -> Result<f64> {
    let grad = averaged_gradient(g, f, x, y)?;
    let nu = interpolate_pair(g, x, y, time)?;
    Ok(g.dist(x, y) as f64 * nu.integrate(&grad))
}

/// Right derivative of t ↦ H(ν_t^π|μ) at t = 0.
pub fn entropy_derivative_at_zero(g: &MetricGraph, pi: &Coupling, mu: &Measure) -> Result<f64> {
    let n = g.vertex_count();
    mu.check_len(n)?;
    if pi.size() != n {
        return Err(Error::Dimension { expected: n, got: pi.size() });
    }
    let nu0 = pi.first();
    if !nu0.is_absolutely_continuous(mu) || !pi.second().is_absolutely_continuous(mu) {
        return Err(Error::Hypothesis("marginals of the coupling must be absolutely continuous".into()));
    }
    let table = g.table();
    let log_density = |v: usize| (nu0.get(v) / mu.get(v)).ln();
    let mut total = 0.0;
    for x in nu0.support() {
        for &z in g.graph().neighbors(x) {
            let mut weight = 0.0;
            for y in 0..n {
                let p = pi.get(x, y);
                if p > 0.0 && y != x {
                    weight += table.dist(x, y) as f64 * table.through_fraction(x, z, y) * p;
                }
            }
            if weight == 0.0 {
                continue;
            }
            if nu0.get(z) == 0.0 {
                return Err(Error::DerivativeUndefined { from: x, to: z });
            }
            total += (log_density(z) - log_density(x)) * weight;
        }
    }
    Ok(total)
}
