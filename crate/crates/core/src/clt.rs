//! Gaussian limit of the modified log-Sobolev inequality on the hypercube.
//!
//! For G_n(x) = g((Σx_i − np)/√(np(1−p))) under Bernoulli(p)^⊗n, both the
//! entropy of e^{G_n} and the one-sided Dirichlet form depend on x only
//! through Σx_i, so they reduce to sums over Binomial(n, p).

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interpolation::ln_binomial;

/// Builtin test functions of the standardized sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum TestFunction {
    Zero,
    Identity,
    /// u ↦ tanh(s·u)
    Tanh(f64),
    /// u ↦ 1/(1 + e^{−s·u})
    Logistic(f64),
}

impl TestFunction {
    pub fn value(self, u: f64) -> f64 {
        match self {
            TestFunction::Zero => 0.0,
            TestFunction::Identity => u,
            TestFunction::Tanh(s) => (s * u).tanh(),
            TestFunction::Logistic(s) => 1.0 / (1.0 + (-s * u).exp()),
        }
    }

    pub fn derivative(self, u: f64) -> f64 {
        match self {
            TestFunction::Zero => 0.0,
            TestFunction::Identity => 1.0,
            TestFunction::Tanh(s) => {
                let c = (s * u).cosh();
                s / (c * c)
            }
            TestFunction::Logistic(s) => {
                let v = self.value(u);
                s * v * (1.0 - v)
            }
        }
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestFunction::Zero => f.write_str("zero"),
            TestFunction::Identity => f.write_str("identity"),
            TestFunction::Tanh(s) if *s == 1.0 => f.write_str("tanh"),
            TestFunction::Tanh(s) => write!(f, "tanh:{s}"),
            TestFunction::Logistic(s) if *s == 1.0 => f.write_str("logistic"),
            TestFunction::Logistic(s) => write!(f, "logistic:{s}"),
        }
    }
}

impl FromStr for TestFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<TestFunction> {
        let (name, scale) = match s.split_once(':') {
            Some((n, v)) => {
                let v: f64 = v.parse().map_err(|_| Error::InvalidParameter(format!("bad scale in `{s}`")))?;
                if !(v > 0.0) || !v.is_finite() {
                    return Err(Error::InvalidParameter(format!("scale must be positive in `{s}`")));
                }
                (n, Some(v))
            }
            None => (s, None),
        };
        match (name, scale) {
            ("zero", None) => Ok(TestFunction::Zero),
            ("identity", None) => Ok(TestFunction::Identity),
            ("tanh", s) => Ok(TestFunction::Tanh(s.unwrap_or(1.0))),
            ("logistic", s) => Ok(TestFunction::Logistic(s.unwrap_or(1.0))),
            _ => Err(Error::InvalidParameter(format!("unknown test function `{s}`"))),
        }
    }
}

impl From<TestFunction> for String {
    fn from(g: TestFunction) -> String {
        g.to_string()
    }
}

impl TryFrom<String> for TestFunction {
    type Error = Error;

    fn try_from(s: String) -> Result<TestFunction> {
        s.parse()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CltInstance {
    pub n: usize,
    pub p: f64,
    pub g: TestFunction,
}

impl CltInstance {
    pub fn new(n: usize, p: f64, g: TestFunction) -> Result<CltInstance> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidParameter(format!("p must lie in (0,1), got {p}")));
        }
        Ok(CltInstance { n, p, g })
    }

    /// u_s = (s − np)/√(np(1−p)).
    pub fn standardized(&self, s: usize) -> f64 {
        let n = self.n as f64;
        (s as f64 - n * self.p) / (n * self.p * (1.0 - self.p)).sqrt()
    }

    /// Binomial(n, p) probabilities, computed in log space and normalized.
    pub fn binomial_weights(&self) -> Vec<f64> {
        let (lp, lq) = (self.p.ln(), (1.0 - self.p).ln());
        let logs: Vec<f64> =
            (0..=self.n).map(|k| ln_binomial(self.n, k) + k as f64 * lp + (self.n - k) as f64 * lq).collect();
        let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
        let total: f64 = w.iter().sum();
        w.into_iter().map(|v| v / total).collect()
    }

    fn values(&self) -> Vec<f64> {
        (0..=self.n).map(|s| self.g.value(self.standardized(s))).collect()
    }
}

/// Ent(e^G) = E[e^G G] − E[e^G] log E[e^G] for a law given by `weights` over `values`.
fn entropy_of_exp(weights: &[f64], values: &[f64]) -> f64 {
    let total: f64 = weights.iter().sum();
    let z: f64 = weights.iter().zip(values).map(|(w, g)| w * g.exp()).sum::<f64>() / total;
    let e: f64 = weights.iter().zip(values).map(|(w, g)| w * g.exp() * g).sum::<f64>() / total;
    (e - z * z.ln()).max(0.0)
}

pub fn binomial_reduced_entropy(inst: &CltInstance) -> f64 {
    entropy_of_exp(&inst.binomial_weights(), &inst.values())
}

/// Σ_s B(s) e^{g(u_s)} [(n−s)[g(u_s) − g(u_{s+1})]₊² + s[g(u_s) − g(u_{s−1})]₊²].
pub fn binomial_reduced_dirichlet(inst: &CltInstance) -> f64 {
    let w = inst.binomial_weights();
    let g = inst.values();
    let n = inst.n;
    (0..=n)
        .map(|s| {
            let up = if s < n { (n - s) as f64 * (g[s] - g[s + 1]).max(0.0).powi(2) } else { 0.0 };
            let down = if s > 0 { s as f64 * (g[s] - g[s - 1]).max(0.0).powi(2) } else { 0.0 };
            w[s] * g[s].exp() * (up + down)
        })
        .sum()
}

/// Orthonormal Hermite recurrence at z: (p_order(z), p_order′(z)).
fn hermite_eval(order: usize, z: f64) -> (f64, f64) {
    let mut p1 = PI.powf(-0.25);
    let mut p2 = 0.0;
    for j in 0..order {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
    }
    (p1, (2.0 * order as f64).sqrt() * p2)
}

/// Nodes and weights of the Gauss–Hermite rule for the weight e^{−x²}.
/// Roots are bracketed on a fine grid, bisected, then polished by Newton.
pub fn gauss_hermite(order: usize) -> (Vec<f64>, Vec<f64>) {
    let reach = (2.0 * order as f64 + 1.0).sqrt() + 1.0;
    let steps = 40 * order.max(1) + 100;
    let h = reach / steps as f64;
    let mut roots = Vec::with_capacity(order);
    if order % 2 == 1 {
        roots.push(0.0);
    }
    let mut lo = if order % 2 == 1 { h / 2.0 } else { 0.0 };
    let mut f_lo = hermite_eval(order, lo).0;
    while lo < reach && roots.len() < order {
        let hi = lo + h;
        let f_hi = hermite_eval(order, hi).0;
        if f_lo.signum() != f_hi.signum() {
            let (mut a, mut b, fa) = (lo, hi, f_lo);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                if hermite_eval(order, m).0.signum() == fa.signum() {
                    a = m;
                } else {
                    b = m;
                }
            }
            let mut z = 0.5 * (a + b);
            let (p, dp) = hermite_eval(order, z);
            if dp != 0.0 && (p / dp).abs() < (b - a) {
                z -= p / dp;
            }
            roots.push(z);
        }
        lo = hi;
        f_lo = f_hi;
    }
    let positive: Vec<f64> = roots.iter().copied().filter(|z| *z > 0.0).collect();
    let mut x: Vec<f64> = positive.iter().rev().map(|z| -z).collect();
    if order % 2 == 1 {
        x.push(0.0);
    }
    x.extend(positive.iter().copied());
    let w = x.iter().map(|&z| 2.0 / hermite_eval(order, z).1.powi(2)).collect();
    (x, w)
}

/// Number of Gauss–Hermite nodes used for the Gaussian references.
pub const HERMITE_NODES: usize = 200;

/// E[h(Y)] for Y standard normal, by Gauss–Hermite quadrature.
pub fn gaussian_expectation_hermite(h: impl Fn(f64) -> f64) -> f64 {
    let (x, w) = gauss_hermite(HERMITE_NODES);
    let s: f64 = x.iter().zip(&w).map(|(x, w)| w * h(std::f64::consts::SQRT_2 * x)).sum();
    s / PI.sqrt()
}

/// E[h(Y)] for Y standard normal, by trapezoid rules on [−12, 12] with step
/// halving until two successive estimates agree.
pub fn gaussian_expectation_trapezoid(h: impl Fn(f64) -> f64) -> f64 {
    let (a, b) = (-12.0f64, 12.0f64);
    let density = |y: f64| (-y * y / 2.0).exp() / (2.0 * PI).sqrt();
    let f = |y: f64| h(y) * density(y);
    let mut panels = 64usize;
    let mut step = (b - a) / panels as f64;
    let mut sum = (f(a) + f(b)) / 2.0 + (1..panels).map(|i| f(a + i as f64 * step)).sum::<f64>();
    let mut estimate = sum * step;
    for _ in 0..20 {
        let mids: f64 = (0..panels).map(|i| f(a + (i as f64 + 0.5) * step)).sum();
        sum += mids;
        panels *= 2;
        step /= 2.0;
        let next = sum * step;
        let done = (next - estimate).abs() <= 1e-14 * next.abs().max(1e-300);
        estimate = next;
        if done {
            break;
        }
    }
    estimate
}

/// Ent_γ(e^g) under the standard Gaussian, with the two quadratures.
pub fn gaussian_entropy(g: TestFunction) -> (f64, f64) {
    let ent = |quad: &dyn Fn(&dyn Fn(f64) -> f64) -> f64| {
        let z = quad(&|y| g.value(y).exp());
        let e = quad(&|y| g.value(y).exp() * g.value(y));
        (e - z * z.ln()).max(0.0)
    };
    (ent(&|h| gaussian_expectation_hermite(h)), ent(&|h| gaussian_expectation_trapezoid(h)))
}

/// (1/(1−p)) E_γ[g′(Y)² e^{g(Y)}], the limit of the reduced Dirichlet form
/// for nondecreasing g, with the two quadratures.
pub fn gaussian_dirichlet_limit(g: TestFunction, p: f64) -> (f64, f64) {
    let h = |y: f64| g.derivative(y).powi(2) * g.value(y).exp();
    let k = 1.0 / (1.0 - p);
    (k * gaussian_expectation_hermite(h), k * gaussian_expectation_trapezoid(h))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltRow {
    pub n: usize,
    pub p: f64,
    pub g: TestFunction,
    pub ent_discrete: f64,
    pub dirichlet_discrete: f64,
    pub ent_gauss: f64,
    pub dirichlet_gauss_limit: f64,
    /// 2·Ent_n / Dirichlet_n, zero when the Dirichlet form vanishes.
    pub ratio: f64,
}

impl CltRow {
    pub fn lsi_holds(&self) -> bool {
        self.ent_discrete <= 0.5 * self.dirichlet_discrete + 1e-12 * (1.0 + self.dirichlet_discrete)
    }

    pub fn ent_deviation(&self) -> f64 {
        (self.ent_discrete - self.ent_gauss).abs()
    }

    pub fn dirichlet_deviation(&self) -> f64 {
        (self.dirichlet_discrete - self.dirichlet_gauss_limit).abs()
    }
}

/// Shortest round-trip form, in exponent notation outside [1e-4, 1e15).
pub fn csv_float(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn csv_row(r: &CltRow) -> String {
    let f = csv_float;
    format!(
        "{},{},{},{},{},{},{},{}\n",
        r.n,
        f(r.p),
        r.g,
        f(r.ent_discrete),
        f(r.dirichlet_discrete),
        f(r.ent_gauss),
        f(r.dirichlet_gauss_limit),
        f(r.ratio)
    )
}

pub const CSV_HEADER: &str = "n,p,g,ent_discrete,dirichlet_discrete,ent_gauss,dirichlet_gauss_limit,ratio";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltTable {
    pub rows: Vec<CltRow>,
    /// Least-squares slope of log|Ent_n − Ent_γ| against log n.
    pub ent_rate: Option<f64>,
    /// Least-squares slope of log|Dirichlet_n − limit| against log n.
    pub dirichlet_rate: Option<f64>,
    /// Largest disagreement between the two quadratures.
    pub quadrature_disagreement: f64,
    pub lsi_holds: bool,
}

impl CltTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        self.rows.iter().for_each(|r| out.push_str(&csv_row(r)));
        out
    }
}

fn log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points.iter().filter(|(_, d)| *d > 0.0).map(|(n, d)| (n.ln(), d.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// 2⁶, 2⁷, …, 2¹².
pub fn default_n_list() -> Vec<usize> {
    (6..=12).map(|e| 1usize << e).collect()
}

/// {0.1, …, 0.9}.
pub fn default_p_grid() -> Vec<f64> {
    (1..=9).map(|i| i as f64 / 10.0).collect()
}

pub fn clt_convergence_table(g: TestFunction, p: f64, n_list: &[usize]) -> Result<CltTable> {
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("n list must be strictly ascending".into()));
    }
    let instances: Vec<CltInstance> = n_list.iter().map(|&n| CltInstance::new(n, p, g)).collect::<Result<_>>()?;
    let (eh, et) = gaussian_entropy(g);
    let (dh, dt) = gaussian_dirichlet_limit(g, p);
    let disagreement = (eh - et).abs().max((dh - dt).abs());
    let rows: Vec<CltRow> = instances
        .par_iter()
        .map(|inst| {
            let ent = binomial_reduced_entropy(inst);
            let dir = binomial_reduced_dirichlet(inst);
            CltRow {
                n: inst.n,
                p,
                g,
                ent_discrete: ent,
                dirichlet_discrete: dir,
                ent_gauss: eh,
                dirichlet_gauss_limit: dh,
                ratio: if dir > 0.0 { 2.0 * ent / dir } else { 0.0 },
            }
        })
        .collect();
    let ent_rate = log_slope(&rows.iter().map(|r| (r.n as f64, r.ent_deviation())).collect::<Vec<_>>());
    let dirichlet_rate = log_slope(&rows.iter().map(|r| (r.n as f64, r.dirichlet_deviation())).collect::<Vec<_>>());
    let lsi_holds = rows.iter().all(CltRow::lsi_holds);
    Ok(CltTable { rows, ent_rate, dirichlet_rate, quadrature_disagreement: disagreement, lsi_holds })
}

/// One row per p at fixed n.
pub fn p_sweep(g: TestFunction, n: usize, ps: &[f64]) -> Result<Vec<CltRow>> {
    ps.iter()
        .map(|&p| clt_convergence_table(g, p, &[n]).map(|t| t.rows.into_iter().next().expect("one row")))
        .collect()
}
