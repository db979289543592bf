//! Weak transport costs, W₁, coupling functionals and the inf-convolution Q.

pub mod frank_wolfe;
pub mod simplex;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, MetricGraph};
use crate::measure::{Coupling, Kernel, Measure};

pub use frank_wolfe::{FwOptions, FwOutcome, SimplexQuadratic, WeakCostProblem};
pub use simplex::{solve_transportation, LpSolution};

/// One distance matrix per coordinate; the single-factor case has one entry.
#[derive(Debug, Clone)]
pub struct CostStructure {
    coords: Vec<Array2<f64>>,
}

impl CostStructure {
    pub fn new(coords: Vec<Array2<f64>>) -> Result<CostStructure> {
        let first = coords.first().ok_or_else(|| Error::InvalidParameter("no cost matrices".into()))?;
        let dim = first.dim();
        if dim.0 != dim.1 || coords.iter().any(|c| c.dim() != dim) {
            return Err(Error::InvalidParameter("cost matrices must be square and equally sized".into()));
        }
        Ok(CostStructure { coords })
    }

    /// The graph distance as a single cost.
    pub fn graph_distance(g: &MetricGraph) -> CostStructure {
        let n = g.vertex_count();
        CostStructure { coords: vec![Array2::from_shape_fn((n, n), |(x, y)| g.dist(x, y) as f64)] }
    }

    /// Per-coordinate factor distances d_i(x_i, y_i) of a product graph.
    pub fn per_coordinate(g: &Graph) -> CostStructure {
        let layout = g.layout();
        let n = g.vertex_count();
        let coords = layout
            .factors()
            .iter()
            .enumerate()
            .map(|(i, factor)| {
                let k = factor.vertex_count();
                let dist: Vec<Vec<usize>> = (0..k).map(|s| factor.bfs(s)).collect();
                Array2::from_shape_fn((n, n), |(x, y)| dist[layout.coordinate(x, i)][layout.coordinate(y, i)] as f64)
            })
            .collect();
        CostStructure { coords }
    }

    pub fn coordinates(&self) -> &[Array2<f64>] {
        &self.coords
    }

    pub fn size(&self) -> usize {
        self.coords[0].nrows()
    }

    pub fn total(&self) -> Array2<f64> {
        let mut acc = Array2::zeros(self.coords[0].dim());
        for c in &self.coords {
            acc += c;
        }
        acc
    }

    fn restricted(&self, rows: &[usize], cols: &[usize]) -> Vec<Array2<f64>> {
        self.coords.iter().map(|c| Array2::from_shape_fn((rows.len(), cols.len()), |(r, s)| c[[rows[r], cols[s]]])).collect()
    }
}

/// I₂, Ī₂ and J₂ of a coupling for a given cost structure.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CostFunctionals {
    pub i2: f64,
    pub i2_bar: f64,
    pub j2: f64,
}

impl CostFunctionals {
    pub fn sum(self) -> f64 {
        self.i2 + self.i2_bar
    }
}

/// Per-coordinate squared conditional mean distances under both marginals.
pub fn costs_with(cost: &CostStructure, pi: &Coupling) -> CostFunctionals {
    let joint = pi.joint();
    let (nu0, nu1) = (pi.first(), pi.second());
    let mut out = CostFunctionals::default();
    for d in cost.coordinates() {
        let weighted = d * joint;
        for (x, row) in weighted.rows().into_iter().enumerate() {
            if nu0.get(x) > 0.0 {
                out.i2 += row.sum().powi(2) / nu0.get(x);
            }
        }
        for (y, col) in weighted.columns().into_iter().enumerate() {
            if nu1.get(y) > 0.0 {
                out.i2_bar += col.sum().powi(2) / nu1.get(y);
            }
        }
        out.j2 += weighted.sum().powi(2);
    }
    out
}

/// I₂(π), Ī₂(π), J₂(π) for the graph distance.
pub fn coupling_costs(g: &MetricGraph, pi: &Coupling) -> CostFunctionals {
    costs_with(&CostStructure::graph_distance(g), pi)
}

/// Optimal value of a transport-type problem with witness coupling.
#[derive(Debug, Clone)]
pub struct TransportResult {
    pub value: f64,
    pub witness: Coupling,
    pub gap: f64,
    pub iterations: usize,
    pub certified: bool,
}

impl TransportResult {
    pub fn kernel(&self) -> Kernel {
        self.witness.to_kernel()
    }
}

fn check_pair(n: usize, nu0: &Measure, nu1: &Measure) -> Result<()> {
    nu0.check_len(n)?;
    nu1.check_len(n)
}

fn embed(n: usize, rows: &[usize], cols: &[usize], sub: &Array2<f64>) -> Coupling {
    let mut joint = Array2::zeros((n, n));
    for (r, &x) in rows.iter().enumerate() {
        for (c, &y) in cols.iter().enumerate() {
            joint[[x, y]] = sub[[r, c]];
        }
    }
    Coupling::from_joint_unchecked(joint)
}

/// T̃(ν₁|ν₀) = inf over Π(ν₀,ν₁) of Σ_x Σ_i (Σ_y d_i(x,y) p(x,y))² ν₀(x).
pub fn weak_cost(cost: &CostStructure, nu0: &Measure, nu1: &Measure, opts: FwOptions) -> Result<TransportResult> {
    let n = cost.size();
    check_pair(n, nu0, nu1)?;
    if nu0 == nu1 {
        return Ok(TransportResult { value: 0.0, witness: Coupling::diagonal(nu0), gap: 0.0, iterations: 0, certified: true });
    }
    let rows: Vec<usize> = nu0.support().collect();
    let cols: Vec<usize> = nu1.support().collect();
    let supply: Vec<f64> = rows.iter().map(|&x| nu0.get(x)).collect();
    let demand: Vec<f64> = cols.iter().map(|&y| nu1.get(y)).collect();
    let costs = cost.restricted(&rows, &cols);
    let problem = WeakCostProblem { supply: &supply, demand: &demand, costs: &costs };
    let out = problem.solve(opts);
    Ok(TransportResult {
        value: out.value,
        witness: embed(n, &rows, &cols, &out.point),
        gap: out.gap,
        iterations: out.iterations,
        certified: out.certified,
    })
}

/// Weak cost T̃₂(ν₁|ν₀) for the graph distance.
pub fn weak_t2(g: &MetricGraph, nu0: &Measure, nu1: &Measure) -> Result<TransportResult> {
    weak_cost(&CostStructure::graph_distance(g), nu0, nu1, FwOptions::default())
}

/// Tensorized weak cost T̃₂⁽ⁿ⁾(ν₁|ν₀) with per-coordinate factor distances.
pub fn weak_t2_tensorized(g: &Graph, nu0: &Measure, nu1: &Measure) -> Result<TransportResult> {
    weak_cost(&CostStructure::per_coordinate(g), nu0, nu1, FwOptions::default())
}

/// Σ_x [1 − ν₁(x)/ν₀(x)]₊² ν₀(x), the weak cost for the Hamming distance.
pub fn hamming_t2_closed_form(nu0: &Measure, nu1: &Measure) -> f64 {
    nu0.weights()
        .iter()
        .zip(nu1.weights())
        .filter(|(a, _)| **a > 0.0)
        .map(|(a, b)| {
            let excess = (a - b).max(0.0);
            excess * excess / a
        })
        .sum()
}

/// Coupling keeping min(ν₀,ν₁) in place and moving the excess of ν₀
/// proportionally onto the deficit; optimal for both weak costs under the
/// Hamming distance.
pub fn hamming_optimal_coupling(nu0: &Measure, nu1: &Measure) -> Coupling {
    let n = nu0.len();
    let surplus: Vec<f64> = nu0.weights().iter().zip(nu1.weights()).map(|(a, b)| (a - b).max(0.0)).collect();
    let deficit: Vec<f64> = nu0.weights().iter().zip(nu1.weights()).map(|(a, b)| (b - a).max(0.0)).collect();
    let moved: f64 = deficit.iter().sum();
    let joint = Array2::from_shape_fn((n, n), |(x, y)| {
        if x == y {
            nu0.get(x).min(nu1.get(x))
        } else if moved > 0.0 {
            surplus[x] * deficit[y] / moved
        } else {
            0.0
        }
    });
    Coupling::from_joint_unchecked(joint)
}

/// Exact optimal transport for an arbitrary cost matrix.
pub fn optimal_transport(cost: &Array2<f64>, nu0: &Measure, nu1: &Measure) -> Result<TransportResult> {
    let n = cost.nrows();
    check_pair(n, nu0, nu1)?;
    let rows: Vec<usize> = nu0.support().collect();
    let cols: Vec<usize> = nu1.support().collect();
    let supply: Vec<f64> = rows.iter().map(|&x| nu0.get(x)).collect();
    let demand: Vec<f64> = cols.iter().map(|&y| nu1.get(y)).collect();
    let sub = Array2::from_shape_fn((rows.len(), cols.len()), |(r, c)| cost[[rows[r], cols[c]]]);
    let lp = solve_transportation(&supply, &demand, &sub);
    let certified = lp.gap <= 1e-10 * (1.0 + lp.value.abs());
    Ok(TransportResult {
        value: lp.value.max(0.0),
        witness: embed(n, &rows, &cols, &lp.flow),
        gap: lp.gap,
        iterations: lp.iterations,
        certified,
    })
}

/// W₁(ν₀, ν₁) for the graph distance, by network simplex.
pub fn w1(g: &MetricGraph, nu0: &Measure, nu1: &Measure) -> Result<TransportResult> {
    let cost = CostStructure::graph_distance(g).coords.remove(0);
    optimal_transport(&cost, nu0, nu1)
}

/// Pointwise values of Qk with the Frank–Wolfe gap and minimizer at each vertex.
#[derive(Debug, Clone)]
pub struct InfConvolution {
    pub values: Vec<f64>,
    pub gaps: Vec<f64>,
    pub minimizers: Vec<Vec<f64>>,
    pub certified: bool,
}

/// Qk(x) = inf_m { ∫k dm + c Σ_i (∫ d_i(x_i, y_i) m(dy))² } on a product graph.
pub fn inf_convolution_q(g: &Graph, k: &[f64], c: f64) -> Result<InfConvolution> {
    inf_convolution_q_with(g, k, c, FwOptions::default())
}

pub fn inf_convolution_q_with(g: &Graph, k: &[f64], c: f64, opts: FwOptions) -> Result<InfConvolution> {
    let n = g.vertex_count();
    if k.len() != n {
        return Err(Error::Dimension { expected: n, got: k.len() });
    }
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::InvalidParameter(format!("c must be positive, got {c}")));
    }
    let cost = CostStructure::per_coordinate(g);
    let mut out = InfConvolution { values: vec![0.0; n], gaps: vec![0.0; n], minimizers: Vec::with_capacity(n), certified: true };
    for x in 0..n {
        let features: Vec<Vec<f64>> = cost.coordinates().iter().map(|d| d.row(x).to_vec()).collect();
        let problem = SimplexQuadratic { linear: k, features: &features, weight: c };
        let res = problem.solve(x, opts);
        out.values[x] = res.value;
        out.gaps[x] = res.gap;
        out.certified &= res.certified;
        out.minimizers.push(res.point);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair() -> (Measure, Measure) {
        (Measure::new(vec![0.75, 0.25]).unwrap(), Measure::new(vec![0.25, 0.75]).unwrap())
    }

    #[test]
    fn two_point_values() {
        let g = MetricGraph::from_spec("two_point").unwrap();
        let (a, b) = pair();
        assert!((hamming_t2_closed_form(&a, &b) - 1.0 / 3.0).abs() < 1e-15);
        let r = weak_t2(&g, &a, &b).unwrap();
        assert!(r.certified);
        assert!((r.value - 1.0 / 3.0).abs() < 1e-9, "{}", r.value);
        assert!((w1(&g, &a, &b).unwrap().value - 0.5).abs() < 1e-15);
    }

    #[test]
    fn pi_star_two_point() {
        let (a, b) = pair();
        let pi = hamming_optimal_coupling(&a, &b);
        assert_eq!(pi.to_rows(), vec![vec![0.25, 0.5], vec![0.0, 0.25]]);
        let g = MetricGraph::from_spec("two_point").unwrap();
        let c = coupling_costs(&g, &pi);
        assert!((c.i2 - 1.0 / 3.0).abs() < 1e-15 && (c.i2_bar - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn independent_j2() {
        let g = MetricGraph::from_spec("two_point").unwrap();
        let (a, b) = pair();
        let c = coupling_costs(&g, &Coupling::independent(&a, &b));
        assert!((c.j2 - 25.0 / 64.0).abs() < 1e-15);
    }

    #[test]
    fn q_constant_and_bound() {
        let g = Graph::from_spec("hypercube:2").unwrap();
        let q = inf_convolution_q(&g, &[3.0; 4], 0.5).unwrap();
        assert!(q.values.iter().all(|v| (v - 3.0).abs() < 1e-15));
        let k = [0.3, -1.0, 2.0, 0.5];
        let q = inf_convolution_q(&g, &k, 0.5).unwrap();
        assert!(q.values.iter().zip(&k).all(|(a, b)| a <= b));
        assert!(q.certified);
    }
}
