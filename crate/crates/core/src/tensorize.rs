//! Knothe–Rosenblatt couplings on product graphs and tensorized cost functionals.

use std::fmt;
use std::sync::Arc;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, ProductLayout};
use crate::measure::{Coupling, Disintegration, Measure, ProductIndexer};
use crate::transport::{costs_with, hamming_optimal_coupling, optimal_transport, CostFunctionals, CostStructure};

type FiberFn = dyn Fn(usize, &Measure, &Measure) -> Coupling + Send + Sync;

/// How each conditional pair of one-coordinate laws is coupled.
#[derive(Clone)]
pub enum FiberRule {
    HammingOptimal,
    W1Optimal,
    /// Called with the coordinate index and the two conditional laws.
    Custom(Arc<FiberFn>),
}

impl FiberRule {
    pub fn custom(f: impl Fn(usize, &Measure, &Measure) -> Coupling + Send + Sync + 'static) -> FiberRule {
        FiberRule::Custom(Arc::new(f))
    }

    pub fn name(&self) -> &'static str {
        match self {
            FiberRule::HammingOptimal => "hamming_optimal",
            FiberRule::W1Optimal => "w1_optimal",
            FiberRule::Custom(_) => "custom",
        }
    }
}

impl fmt::Debug for FiberRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Product structure, fiber rule and conditioning order of a KR construction.
#[derive(Debug, Clone)]
pub struct KrSpec {
    graph: Graph,
    rule: FiberRule,
    order: Vec<usize>,
    factor_costs: Vec<CostStructure>,
}

impl KrSpec {
    /// Uses Hamming-optimal fibers when every factor is complete, W₁-optimal otherwise.
    pub fn new(graph: &Graph) -> KrSpec {
        let layout = graph.layout();
        let rule = if layout.factors().iter().all(Graph::is_complete) {
            FiberRule::HammingOptimal
        } else {
            FiberRule::W1Optimal
        };
        let factor_costs = layout
            .factors()
            .iter()
            .map(|f| {
                let k = f.vertex_count();
                let dist: Vec<Vec<usize>> = (0..k).map(|s| f.bfs(s)).collect();
                CostStructure::new(vec![Array2::from_shape_fn((k, k), |(a, b)| dist[a][b] as f64)]).expect("square")
            })
            .collect();
        KrSpec { graph: graph.clone(), rule, order: (0..layout.len()).collect(), factor_costs }
    }

    pub fn with_rule(mut self, rule: FiberRule) -> KrSpec {
        self.rule = rule;
        self
    }

    /// Conditioning order: position `k` of the construction handles
    /// coordinate `order[k]`, the last position being outermost.
    pub fn with_order(mut self, order: Vec<usize>) -> Result<KrSpec> {
        let mut sorted = order.clone();
        sorted.sort_unstable();
        if sorted != (0..self.order.len()).collect::<Vec<_>>() {
            return Err(Error::InvalidParameter(format!("{order:?} is not a permutation of the coordinates")));
        }
        self.order = order;
        Ok(self)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn rule(&self) -> &FiberRule {
        &self.rule
    }

    pub fn cost(&self) -> CostStructure {
        CostStructure::per_coordinate(&self.graph)
    }

    fn fiber(&self, coordinate: usize, a: &Measure, b: &Measure, factor: &Graph) -> Result<Coupling> {
        Ok(match &self.rule {
            FiberRule::HammingOptimal => hamming_optimal_coupling(a, b),
            FiberRule::W1Optimal => {
                let k = factor.vertex_count();
                optimal_transport(&self.factor_costs[coordinate].total(), a, b)
                    .map(|r| r.witness)
                    .map_err(|_| Error::Dimension { expected: k, got: a.len() })?
            }
            FiberRule::Custom(f) => f(coordinate, a, b),
        })
    }
}

/// A KR coupling together with the tensorization bound accumulated over its fibers.
#[derive(Debug, Clone)]
pub struct KrCoupling {
    pub coupling: Coupling,
    pub bound: CostFunctionals,
    pub fibers: usize,
}

struct Builder<'a> {
    spec: &'a KrSpec,
    layout: ProductLayout,
    indexer: ProductIndexer,
    coords: Vec<usize>,
    d0: Disintegration,
    d1: Disintegration,
    joint: Array2<f64>,
    bound: CostFunctionals,
    fibers: usize,
}

impl Builder<'_> {
    fn walk(&mut self, k: usize, s0: usize, s1: usize, w: f64, vx: usize, vy: usize) -> Result<()> {
        let (Some(c0), Some(c1)) = (self.d0.conditional(k, s0), self.d1.conditional(k, s1)) else {
            return Ok(());
        };
        let coordinate = self.coords[k];
        let fiber = self.spec.fiber(coordinate, &c0, &c1, self.layout.factor(coordinate))?;
        self.fibers += 1;
        let local = costs_with(&self.spec.factor_costs[coordinate], &fiber);
        self.bound.i2 += w * local.i2;
        self.bound.i2_bar += w * local.i2_bar;
        self.bound.j2 += w * local.j2;
        let size = self.indexer.sizes()[k];
        let stride = self.indexer.strides()[k];
        let support: Vec<(usize, usize, f64)> = fiber.support().collect();
        for (a, b, q) in support {
            let mass = w * q;
            if mass <= 0.0 {
                continue;
            }
            let (x, y) = (vx + a * stride, vy + b * stride);
            if k == 0 {
                self.joint[[x, y]] += mass;
            } else {
                self.walk(k - 1, a + size * s0, b + size * s1, mass, x, y)?;
            }
        }
        Ok(())
    }
}

/// KR coupling of `nu0` and `nu1` with the tensorization bound
/// I₂(πⁿ) + Σ_k Σ π̂ I₂(πᵏ(·|…)) and its Ī₂, J₂ analogues.
pub fn knothe_rosenblatt_with_bound(spec: &KrSpec, nu0: &Measure, nu1: &Measure) -> Result<KrCoupling> {
    let n = spec.graph.vertex_count();
    nu0.check_len(n)?;
    nu1.check_len(n)?;
    let layout = spec.graph.layout();
    let indexer = ProductIndexer::from_layout(&layout).permuted(&spec.order);
    let mut builder = Builder {
        spec,
        layout: layout.clone(),
        d0: Disintegration::new(nu0, &indexer)?,
        d1: Disintegration::new(nu1, &indexer)?,
        coords: spec.order.clone(),
        indexer,
        joint: Array2::zeros((n, n)),
        bound: CostFunctionals::default(),
        fibers: 0,
    };
    let last = spec.order.len() - 1;
    builder.walk(last, 0, 0, 1.0, 0, 0)?;
    Ok(KrCoupling { coupling: Coupling::from_joint_unchecked(builder.joint), bound: builder.bound, fibers: builder.fibers })
}

pub fn knothe_rosenblatt(spec: &KrSpec, nu0: &Measure, nu1: &Measure) -> Result<Coupling> {
    knothe_rosenblatt_with_bound(spec, nu0, nu1).map(|kr| kr.coupling)
}

/// I₂⁽ⁿ⁾, Ī₂⁽ⁿ⁾ and J₂⁽ⁿ⁾ of a coupling on the product.
pub fn product_costs(spec: &KrSpec, pi: &Coupling) -> CostFunctionals {
    costs_with(&spec.cost(), pi)
}

/// Both sides of the tensorization inequality for the KR coupling.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TensorizationReport {
    pub lhs: CostFunctionals,
    pub rhs: CostFunctionals,
    pub gap: f64,
    pub holds: bool,
}

pub const TENSORIZATION_TOL: f64 = 1e-10;

pub fn tensorization_gap(spec: &KrSpec, nu0: &Measure, nu1: &Measure) -> Result<TensorizationReport> {
    let kr = knothe_rosenblatt_with_bound(spec, nu0, nu1)?;
    let lhs = product_costs(spec, &kr.coupling);
    let rhs = kr.bound;
    let gap = (rhs.i2 - lhs.i2).min(rhs.i2_bar - lhs.i2_bar).min(rhs.j2 - lhs.j2);
    Ok(TensorizationReport { lhs, rhs, gap, holds: gap >= -TENSORIZATION_TOL })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_products_give_diagonal() {
        let g = Graph::hypercube(2).unwrap();
        let nu = Measure::product(&[Measure::bernoulli(0.3), Measure::bernoulli(0.6)]);
        let pi = knothe_rosenblatt(&KrSpec::new(&g), &nu, &nu).unwrap();
        let diag = Coupling::diagonal(&nu);
        assert!(pi.joint().iter().zip(diag.joint()).all(|(a, b)| (a - b).abs() < 1e-15));
    }

    #[test]
    fn dirac_target_forces_coupling() {
        let g = Graph::hypercube(2).unwrap();
        let nu0 = Measure::uniform(4);
        let nu1 = Measure::dirac(4, 3);
        let pi = knothe_rosenblatt(&KrSpec::new(&g), &nu0, &nu1).unwrap();
        for x in 0..4 {
            for y in 0..4 {
                assert_eq!(pi.get(x, y), if y == 3 { 0.25 } else { 0.0 });
            }
        }
    }

    #[test]
    fn rejects_non_permutation() {
        let g = Graph::hypercube(3).unwrap();
        assert!(KrSpec::new(&g).with_order(vec![0, 0, 1]).is_err());
        assert!(KrSpec::new(&g).with_order(vec![2, 0, 1]).is_ok());
    }
}
