//! Transportation simplex (network simplex on the complete bipartite graph).

use ndarray::Array2;

/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
const DEGENERATE_LIMIT: usize = 50;

/// Optimal basic solution of a balanced transportation problem together with
/// its dual potentials.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub flow: Array2<f64>,
    pub value: f64,
    pub row_potential: Vec<f64>,
    pub col_potential: Vec<f64>,
    /// Primal-dual gap plus dual infeasibility weighted by total mass.
    pub gap: f64,
    pub iterations: usize,
}

struct Basis {
    m: usize,
    n: usize,
    cells: Vec<(usize, usize)>,
    basic: Array2<bool>,
}

impl Basis {
    fn tree(&self) -> Vec<Vec<(usize, usize)>> {
        // node i < m is row i, node m + j is column j; edges carry the cell index
        let mut adj = vec![Vec::new(); self.m + self.n];
        for (k, &(i, j)) in self.cells.iter().enumerate() {
            adj[i].push((self.m + j, k));
            adj[self.m + j].push((i, k));
        }
        adj
    }
}

fn potentials(basis: &Basis, cost: &Array2<f64>, adj: &[Vec<(usize, usize)>]) -> (Vec<f64>, Vec<f64>) {
    let (m, n) = (basis.m, basis.n);
    let mut pot = vec![f64::NAN; m + n];
    let mut stack = vec![0usize];
    pot[0] = 0.0;
    while let Some(u) = stack.pop() {
        for &(w, k) in &adj[u] {
            if pot[w].is_nan() {
                let (i, j) = basis.cells[k];
                pot[w] = cost[[i, j]] - pot[u];
                stack.push(w);
            }
        }
    }
    (pot[..m].to_vec(), pot[m..].to_vec())
}

/// Cells on the tree path from column node `j` back to row node `i`.
fn tree_path(basis: &Basis, adj: &[Vec<(usize, usize)>], i: usize, j: usize) -> Vec<usize> {
    let total = basis.m + basis.n;
    let mut parent = vec![usize::MAX; total];
    let mut via = vec![usize::MAX; total];
    let mut stack = vec![i];
    parent[i] = i;
    while let Some(u) = stack.pop() {
        if u == basis.m + j {
            break;
        }
        for &(w, k) in &adj[u] {
            if parent[w] == usize::MAX {
                parent[w] = u;
                via[w] = k;
                stack.push(w);
            }
        }
    }
    let mut path = Vec::new();
    let mut u = basis.m + j;
    while u != i {
        path.push(via[u]);
        u = parent[u];
    }
    path
}

fn northwest_corner(supply: &[f64], demand: &[f64]) -> (Basis, Array2<f64>) {
    let (m, n) = (supply.len(), demand.len());
    let mut flow = Array2::zeros((m, n));
    let mut basic = Array2::from_elem((m, n), false);
    let mut cells = Vec::with_capacity(m + n - 1);
    let mut ra = supply.to_vec();
    let mut rb = demand.to_vec();
    let (mut i, mut j) = (0, 0);
    loop {
        let q = ra[i].min(rb[j]).max(0.0);
        flow[[i, j]] = q;
        basic[[i, j]] = true;
        cells.push((i, j));
        ra[i] -= q;
        rb[j] -= q;
        if i == m - 1 && j == n - 1 {
            break;
        }
        if i == m - 1 {
            j += 1;
        } else if j == n - 1 || ra[i] <= rb[j] {
            i += 1;
        } else {
            j += 1;
        }
    }
    (Basis { m, n, cells, basic }, flow)
}

/// Solves min Σ c·x over x ≥ 0 with row sums `supply` and column sums
/// `demand`. Both must be positive and have equal totals up to rounding.
pub fn solve_transportation(supply: &[f64], demand: &[f64], cost: &Array2<f64>) -> LpSolution {
    let (m, n) = (supply.len(), demand.len());
    assert!(m > 0 && n > 0 && cost.dim() == (m, n), "transportation problem shape");
    let (mut basis, mut flow) = northwest_corner(supply, demand);
    let scale = cost.iter().fold(1.0f64, |a, c| a.max(c.abs()));
    let eps = 1e-12 * scale;
    let max_iter = 1000 + 50 * m * n;
    let mut degenerate = 0usize;
    let mut iterations = 0usize;
    let (mut u, mut v);
    loop {
        let adj = basis.tree();
        (u, v) = potentials(&basis, cost, &adj);
        let bland = degenerate >= DEGENERATE_LIMIT;
        let mut entering: Option<(usize, usize)> = None;
        let mut best = -eps;
        'scan: for i in 0..m {
            for j in 0..n {
                if basis.basic[[i, j]] {
                    continue;
                }
                let r = cost[[i, j]] - u[i] - v[j];
                if r < best {
                    entering = Some((i, j));
                    if bland {
                        break 'scan;
                    }
                    best = r;
                }
            }
        }
        let Some((ei, ej)) = entering else { break };
        if iterations >= max_iter {
            break;
        }
        iterations += 1;
        let path = tree_path(&basis, &adj, ei, ej);
        // odd positions along the path (from the entering column) lose flow
        let mut theta = f64::INFINITY;
        let mut leave = usize::MAX;
        for (pos, &k) in path.iter().enumerate() {
            if pos % 2 == 0 {
                let cell = basis.cells[k];
                let x = flow[[cell.0, cell.1]];
                if x < theta || (x == theta && cell < basis.cells[leave]) {
                    theta = x;
                    leave = k;
                }
            }
        }
        degenerate = if theta <= 0.0 { degenerate + 1 } else { 0 };
        flow[[ei, ej]] = theta;
        for (pos, &k) in path.iter().enumerate() {
            let (i, j) = basis.cells[k];
            if pos % 2 == 0 {
                flow[[i, j]] = (flow[[i, j]] - theta).max(0.0);
            } else {
                flow[[i, j]] += theta;
            }
        }
        let (li, lj) = basis.cells[leave];
        flow[[li, lj]] = 0.0;
        basis.basic[[li, lj]] = false;
        basis.basic[[ei, ej]] = true;
        basis.cells[leave] = (ei, ej);
    }
    let value: f64 = flow.indexed_iter().map(|((i, j), x)| x * cost[[i, j]]).sum();
    let dual: f64 = u.iter().zip(supply).map(|(a, b)| a * b).sum::<f64>()
        + v.iter().zip(demand).map(|(a, b)| a * b).sum::<f64>();
    let mut min_reduced = 0.0f64;
    for i in 0..m {
        for j in 0..n {
            min_reduced = min_reduced.min(cost[[i, j]] - u[i] - v[j]);
        }
    }
    let mass: f64 = supply.iter().sum();
    let gap = (value - dual).abs() + (-min_reduced) * mass;
    LpSolution { flow, value, row_potential: u, col_potential: v, gap, iterations }
}
