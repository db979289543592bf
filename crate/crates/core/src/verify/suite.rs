//! Seeded randomized suites. Instances run in parallel; reports come back
//! ordered by instance index.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::dc::{verify_displacement_convexity, verify_w1_geodesic, DcFamily, DcForm, DcInstance};
use super::hwi::{default_epsilon_grid, verify_hwi, verify_log_sobolev, HwiFamily, HwiInstance, LsiFamily, LsiInstance, HYPERCUBE_C};
use super::pl::{generator_triple, verify_prekopa_leindler, PlInstance};
use super::random::{density, dirichlet, instance_rng, product_measure, uniform_values};
use super::te::{verify_transport_entropy, verify_transport_entropy_dual};
use super::{default_t_grid, VerificationReport};
use crate::error::Result;
use crate::graph::MetricGraph;
use crate::measure::Measure;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub trials: usize,
    pub seed: u64,
    pub t_grid: Vec<f64>,
}

impl SuiteConfig {
    pub fn new(trials: usize, seed: u64) -> SuiteConfig {
        SuiteConfig { trials, seed, t_grid: default_t_grid() }
    }
}

/// p ∈ {0.1, …, 0.9}, cycled over two-point HWI trials.
pub const TWO_POINT_P_GRID: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

/// {0, 1/4, 1/2, 3/4, 1}.
pub fn default_geodesy_grid() -> Vec<f64> {
    vec![0.0, 0.25, 0.5, 0.75, 1.0]
}

fn run_trials<F>(cfg: &SuiteConfig, trial: F) -> Result<Vec<VerificationReport>>
where
    F: Fn(usize, &mut ChaCha8Rng) -> Result<Vec<VerificationReport>> + Sync,
{
    let batches: Vec<Vec<VerificationReport>> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = instance_rng(cfg.seed, i);
            trial(i, &mut rng).map(|rs| rs.into_iter().map(|r| r.with_index(i, Some(cfg.seed))).collect())
        })
        .collect::<Result<_>>()?;
    Ok(batches.into_iter().flatten().collect())
}

fn reference<R: Rng>(rng: &mut R, g: &MetricGraph, product: bool) -> Measure {
    if product {
        product_measure(rng, g.graph())
    } else {
        dirichlet(rng, g.vertex_count())
    }
}

pub fn dc_suite(g: &MetricGraph, family: DcFamily, forms: Option<&[DcForm]>, cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    family.check_graph(g.graph())?;
    let product = matches!(family, DcFamily::Hypercube | DcFamily::Product);
    let keep: Vec<String> = forms.unwrap_or(family.forms()).iter().map(|f| format!("dc.{}.{}", family.name(), f.name())).collect();
    run_trials(cfg, |_, rng| {
        let n = g.vertex_count();
        let mu = reference(rng, g, product);
        let inst = DcInstance { mu, nu0: dirichlet(rng, n), nu1: dirichlet(rng, n) };
        let reports = verify_displacement_convexity(g, family, &inst, &cfg.t_grid)?;
        Ok(reports.into_iter().filter(|r| keep.contains(&r.id)).collect())
    })
}

pub fn w1geo_suite(g: &MetricGraph, grid: &[f64], cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    run_trials(cfg, |_, rng| {
        let n = g.vertex_count();
        let (nu0, nu1) = (dirichlet(rng, n), dirichlet(rng, n));
        Ok(vec![verify_w1_geodesic(g, &nu0, &nu1, grid)?])
    })
}

pub fn hwi_suite(g: &MetricGraph, family: HwiFamily, cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    run_trials(cfg, |i, rng| {
        let n = g.vertex_count();
        let mu = match family {
            HwiFamily::Complete => Measure::uniform(n),
            HwiFamily::TwoPoint => Measure::bernoulli(TWO_POINT_P_GRID[i % TWO_POINT_P_GRID.len()]),
            HwiFamily::Product => product_measure(rng, g.graph()),
        };
        let f = density(rng, &mu);
        let nu0 = Measure::with_density(&mu, &f);
        let nu1 = if family == HwiFamily::Product { dirichlet(rng, n) } else { mu.clone() };
        let mut reports = verify_hwi(g, family, &HwiInstance { mu, nu0, nu1 })?;
        if family == HwiFamily::TwoPoint {
            let p = TWO_POINT_P_GRID[i % TWO_POINT_P_GRID.len()];
            reports.iter_mut().for_each(|r| {
                r.instance.params.insert("p".into(), p);
            });
        }
        Ok(reports)
    })
}

pub fn lsi_suite(g: &MetricGraph, family: LsiFamily, cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    let eps = default_epsilon_grid();
    run_trials(cfg, |_, rng| {
        let product = family != LsiFamily::Pinsker;
        let mu = reference(rng, g, product);
        let f = density(rng, &mu);
        let target = (family == LsiFamily::Pinsker).then(|| {
            let f1 = density(rng, &mu);
            Measure::with_density(&mu, &f1)
        });
        verify_log_sobolev(g, family, &LsiInstance { mu, f, target }, &eps)
    })
}

pub fn te_primal_suite(g: &MetricGraph, cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    run_trials(cfg, |_, rng| {
        let mu = product_measure(rng, g.graph());
        let nu = dirichlet(rng, g.vertex_count());
        verify_transport_entropy(g.graph(), &mu, &nu, HYPERCUBE_C)
    })
}

pub fn te_dual_suite(g: &MetricGraph, cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    run_trials(cfg, |_, rng| {
        let mu = product_measure(rng, g.graph());
        let k = uniform_values(rng, g.vertex_count(), -1.0, 1.0);
        Ok(vec![verify_transport_entropy_dual(g.graph(), &mu, &k, HYPERCUBE_C)?])
    })
}

pub fn pl_generator_suite(g: &MetricGraph, t: f64, cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    run_trials(cfg, |_, rng| {
        let mu = product_measure(rng, g.graph());
        let k = uniform_values(rng, g.vertex_count(), -1.0, 1.0);
        let triple = generator_triple(g, &k, t, HYPERCUBE_C)?;
        let inst = PlInstance { mu, triple, t, c: HYPERCUBE_C };
        let mut r = verify_prekopa_leindler(g, &inst, "generator")?;
        r.instance.functions.insert("k".into(), k);
        Ok(vec![r])
    })
}

/// Every suite on its default graph.
pub fn all(trials: usize, seed: u64) -> Result<Vec<VerificationReport>> {
    let cfg = SuiteConfig::new(trials, seed);
    let graph = |s: &str| MetricGraph::from_spec(s);
    let mut out = Vec::new();
    out.extend(dc_suite(&graph("two_point")?, DcFamily::TwoPoint, None, &cfg)?);
    out.extend(dc_suite(&graph("complete:4")?, DcFamily::Complete, None, &cfg)?);
    out.extend(dc_suite(&graph("hypercube:3")?, DcFamily::Hypercube, None, &cfg)?);
    out.extend(dc_suite(&graph("product:complete:3,complete:2")?, DcFamily::Product, None, &cfg)?);
    out.extend(w1geo_suite(&graph("hypercube:3")?, &default_geodesy_grid(), &cfg)?);
    out.extend(w1geo_suite(&graph("cycle:6")?, &default_geodesy_grid(), &cfg)?);
    out.extend(hwi_suite(&graph("two_point")?, HwiFamily::TwoPoint, &cfg)?);
    out.extend(hwi_suite(&graph("complete:4")?, HwiFamily::Complete, &cfg)?);
    out.extend(hwi_suite(&graph("hypercube:2")?, HwiFamily::Product, &cfg)?);
    out.extend(lsi_suite(&graph("hypercube:3")?, LsiFamily::Reinforced, &cfg)?);
    out.extend(lsi_suite(&graph("hypercube:3")?, LsiFamily::HypercubeModified, &cfg)?);
    out.extend(lsi_suite(&graph("complete:4")?, LsiFamily::Pinsker, &cfg)?);
    out.extend(te_primal_suite(&graph("hypercube:3")?, &cfg)?);
    out.extend(te_dual_suite(&graph("hypercube:2")?, &cfg)?);
    out.extend(pl_generator_suite(&graph("hypercube:2")?, 0.5, &cfg)?);
    Ok(out)
}
