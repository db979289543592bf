//! Frank–Wolfe for the two convex quadratic programs used here: weak
//! transport costs over a transportation polytope (fully corrective) and
//! the inf-convolution objective over a probability simplex (away steps).

use ndarray::{Array2, Zip};

use super::simplex::solve_transportation;

#[derive(Debug, Clone, Copy)]
pub struct FwOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for FwOptions {
    fn default() -> Self {
        FwOptions { tol: 1e-8, max_iter: 100_000 }
    }
}

#[derive(Debug, Clone)]
pub struct FwOutcome<T> {
    pub point: T,
    pub value: f64,
    pub gap: f64,
    pub iterations: usize,
    pub certified: bool,
}

/// Objective Σ_r Σ_i (⟨D_i[r,·], π[r,·]⟩)² / a_r over the polytope of
/// nonnegative matrices with row sums `a` and column sums `b`.
pub struct WeakCostProblem<'a> {
    pub supply: &'a [f64],
    pub demand: &'a [f64],
    pub costs: &'a [Array2<f64>],
}

impl WeakCostProblem<'_> {
    fn row_means(&self, pi: &Array2<f64>) -> Vec<Vec<f64>> {
        self.costs
            .iter()
            .map(|d| (0..pi.nrows()).map(|r| d.row(r).dot(&pi.row(r))).collect())
            .collect()
    }

    pub fn value(&self, pi: &Array2<f64>) -> f64 {
        self.quadratic(&self.row_means(pi))
    }

    fn quadratic(&self, means: &[Vec<f64>]) -> f64 {
        means.iter().map(|m| m.iter().zip(self.supply).map(|(v, a)| v * v / a).sum::<f64>()).sum()
    }

    fn gradient(&self, means: &[Vec<f64>]) -> Array2<f64> {
        let mut g = Array2::zeros((self.supply.len(), self.demand.len()));
        for (d, m) in self.costs.iter().zip(means) {
            for (r, mut row) in g.rows_mut().into_iter().enumerate() {
                let coef = 2.0 * m[r] / self.supply[r];
                if coef != 0.0 {
                    row.scaled_add(coef, &d.row(r));
                }
            }
        }
        g
    }

    /// Fully corrective Frank–Wolfe: each LP vertex joins the active set and
    /// the weights are re-optimized over the convex hull of the active set.
    pub fn solve(&self, opts: FwOptions) -> FwOutcome<Array2<f64>> {
        let (m, n) = (self.supply.len(), self.demand.len());
        let start = Array2::from_shape_fn((m, n), |(r, c)| self.supply[r] * self.demand[c]);
        let scale: Vec<f64> = self.supply.iter().map(|a| a.sqrt().recip()).collect();
        let features_of = |pi: &Array2<f64>| -> Vec<f64> {
            self.row_means(pi).into_iter().flat_map(|v| v.into_iter().zip(&scale).map(|(x, s)| x * s).collect::<Vec<_>>()).collect()
        };
        let mut atom_features = vec![features_of(&start)];
        let mut atoms = vec![start];
        let mut alpha = vec![1.0];
        let mut pi = atoms[0].clone();
        let mut gap = f64::INFINITY;
        let mut iterations = 0;
        let mut certified = false;
        while iterations < opts.max_iter {
            let means = self.row_means(&pi);
            let grad = self.gradient(&means);
            let s = solve_transportation(self.supply, self.demand, &grad).flow;
            let inner = |a: &Array2<f64>| (&grad * a).sum();
            gap = (inner(&pi) - inner(&s)).max(0.0);
            if gap <= opts.tol {
                certified = true;
                break;
            }
            iterations += 1;
            if !atoms.iter().any(|a| same_atom(a, &s)) {
                atom_features.push(features_of(&s));
                atoms.push(s);
                alpha.push(0.0);
            }
            let k = atoms.len();
            let dims = atom_features[0].len();
            let features: Vec<Vec<f64>> = (0..dims).map(|j| atom_features.iter().map(|f| f[j]).collect()).collect();
            let linear = vec![0.0; k];
            let corrective = SimplexQuadratic { linear: &linear, features: &features, weight: 1.0 };
            let inner_opts = FwOptions { tol: (gap * 1e-3).min(opts.tol * 1e-2), max_iter: 10_000 };
            let res = corrective.solve_from(alpha.clone(), inner_opts);
            let mut kept = (Vec::new(), Vec::new(), Vec::new());
            for ((a, f), w) in atoms.into_iter().zip(atom_features).zip(res.point) {
                if w > 0.0 {
                    kept.0.push(a);
                    kept.1.push(f);
                    kept.2.push(w);
                }
            }
            (atoms, atom_features, alpha) = kept;
            pi.fill(0.0);
            for (a, w) in atoms.iter().zip(&alpha) {
                pi.scaled_add(*w, a);
            }
        }
        let value = self.value(&pi);
        FwOutcome { point: pi, value, gap, iterations, certified }
    }
}

fn same_atom(a: &Array2<f64>, b: &Array2<f64>) -> bool {
    let mut same = true;
    Zip::from(a).and(b).for_each(|x, y| same &= (x - y).abs() <= 1e-15);
    same
}

/// Objective ⟨a, m⟩ + w Σ_i ⟨B_i, m⟩² over probability vectors `m`.
pub struct SimplexQuadratic<'a> {
    pub linear: &'a [f64],
    pub features: &'a [Vec<f64>],
    pub weight: f64,
}

impl SimplexQuadratic<'_> {
    pub fn value(&self, m: &[f64]) -> f64 {
        let lin: f64 = self.linear.iter().zip(m).map(|(a, b)| a * b).sum();
        lin + self.weight * self.features.iter().map(|b| dot(b, m).powi(2)).sum::<f64>()
    }

    /// Minimizes from the vertex `start`.
    pub fn solve(&self, start: usize, opts: FwOptions) -> FwOutcome<Vec<f64>> {
        let mut m = vec![0.0; self.linear.len()];
        m[start] = 1.0;
        self.solve_from(m, opts)
    }

    /// Minimizes from the probability vector `m`.
    pub fn solve_from(&self, mut m: Vec<f64>, opts: FwOptions) -> FwOutcome<Vec<f64>> {
        let n = self.linear.len();
        let mut means: Vec<f64> = self.features.iter().map(|b| dot(b, &m)).collect();
        let mut gap = f64::INFINITY;
        let mut iterations = 0;
        let mut certified = false;
        while iterations < opts.max_iter {
            let grad: Vec<f64> = (0..n)
                .map(|y| {
                    self.linear[y]
                        + 2.0 * self.weight * self.features.iter().zip(&means).map(|(b, v)| b[y] * v).sum::<f64>()
                })
                .collect();
            let g_m = dot(&grad, &m);
            let (s, g_s) = argmin(&grad);
            gap = (g_m - g_s).max(0.0);
            if gap <= opts.tol {
                certified = true;
                break;
            }
            iterations += 1;
            let (a, g_a) = (0..n)
                .filter(|&y| m[y] > 0.0)
                .map(|y| (y, grad[y]))
                .fold((usize::MAX, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
            let support = m.iter().filter(|w| **w > 0.0).count();
            let fw_step = support == 1 || gap >= g_a - g_m;
            // direction is e_s − m (forward) or m − e_a (away)
            let (slope, dmeans, gamma_max) = if fw_step {
                let dm: Vec<f64> = self.features.iter().zip(&means).map(|(b, v)| b[s] - v).collect();
                (g_s - g_m, dm, 1.0)
            } else {
                let dm: Vec<f64> = self.features.iter().zip(&means).map(|(b, v)| v - b[a]).collect();
                (g_m - g_a, dm, m[a] / (1.0 - m[a]))
            };
            let curv = self.weight * dmeans.iter().map(|v| v * v).sum::<f64>();
            let gamma = if curv > 0.0 { (-slope / (2.0 * curv)).clamp(0.0, gamma_max) } else { gamma_max };
            if gamma == 0.0 {
                break;
            }
            if fw_step {
                m.iter_mut().for_each(|w| *w *= 1.0 - gamma);
                m[s] += gamma;
            } else {
                m.iter_mut().for_each(|w| *w *= 1.0 + gamma);
                m[a] -= gamma;
                if gamma >= gamma_max || m[a] < 1e-17 {
                    m[a] = 0.0;
                }
            }
            let total: f64 = m.iter().sum();
            m.iter_mut().for_each(|w| *w /= total);
            means = self.features.iter().map(|b| dot(b, &m)).collect();
        }
        let value = self.value(&m);
        FwOutcome { point: m, value, gap, iterations, certified }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn argmin(v: &[f64]) -> (usize, f64) {
    v.iter().copied().enumerate().fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
}
