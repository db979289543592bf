#![allow(dead_code)]

use dcg::{Graph, Measure};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Normalised uniform weights, every vertex charged.
pub fn positive_measure<R: Rng>(rng: &mut R, n: usize) -> Measure {
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    Measure::normalized(w)
}

/// Like [`positive_measure`] but with some vertices zeroed out.
pub fn sparse_measure<R: Rng>(rng: &mut R, n: usize) -> Measure {
    loop {
        let w: Vec<f64> = (0..n).map(|_| if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.05..1.0) }).collect();
        if w.iter().any(|v| *v > 0.0) {
            return Measure::normalized(w);
        }
    }
}

/// Random spanning tree plus extra edges with probability `extra`.
pub fn random_connected_graph<R: Rng>(rng: &mut R, n: usize, extra: f64) -> Graph {
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.gen_range(0..v), v));
    }
    for u in 0..n {
        for v in u + 1..n {
            if !edges.contains(&(u, v)) && rng.gen_bool(extra) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, &edges, format!("random:{n}")).expect("connected by construction")
}

pub fn adjacency(g: &Graph) -> Vec<Vec<bool>> {
    let n = g.vertex_count();
    let mut a = vec![vec![false; n]; n];
    for (u, v) in g.edges() {
        a[u][v] = true;
        a[v][u] = true;
    }
    a
}

/// All-pairs distances by Floyd–Warshall.
pub fn floyd(g: &Graph) -> Vec<Vec<usize>> {
    let n = g.vertex_count();
    let a = adjacency(g);
    let inf = usize::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                d[i][j] = 0;
            } else if a[i][j] {
                d[i][j] = 1;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

/// Number of walks of length `len` from x to y, via powers of the adjacency matrix.
pub fn walk_count(g: &Graph, x: usize, y: usize, len: usize) -> u128 {
    let n = g.vertex_count();
    let a = adjacency(g);
    let mut v = vec![0u128; n];
    v[x] = 1;
    for _ in 0..len {
        let mut next = vec![0u128; n];
        for u in 0..n {
            if v[u] == 0 {
                continue;
            }
            for w in 0..n {
                if a[u][w] {
                    next[w] += v[u];
                }
            }
        }
        v = next;
    }
    v[y]
}

/// Every geodesic from x to y, by extending paths one step closer to y.
pub fn geodesics(g: &Graph, x: usize, y: usize) -> Vec<Vec<usize>> {
    let d = floyd(g);
    let a = adjacency(g);
    let mut paths = vec![vec![x]];
    for _ in 0..d[x][y] {
        let mut next = Vec::new();
        for p in &paths {
            let last = *p.last().unwrap();
            for w in 0..g.vertex_count() {
                if a[last][w] && d[w][y] + 1 == d[last][y] {
                    let mut q = p.clone();
                    q.push(w);
                    next.push(q);
                }
            }
        }
        paths = next;
    }
    paths
}

pub fn choose(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// ν_t^{x,y} as the average over geodesics of the Binomial(d, t) position.
pub fn interpolation_by_enumeration(g: &Graph, x: usize, y: usize, t: f64) -> Vec<f64> {
    let paths = geodesics(g, x, y);
    let mut out = vec![0.0; g.vertex_count()];
    for p in &paths {
        let d = p.len() - 1;
        for (k, &z) in p.iter().enumerate() {
            out[z] += choose(d, k) * t.powi(k as i32) * (1.0 - t).powi((d - k) as i32) / paths.len() as f64;
        }
    }
    out
}

/// Σ_x Σ_y π(x,y) ν_t^{x,y}(z) by the naive double sum.
pub fn coupling_interpolation_naive(g: &Graph, pi: &[Vec<f64>], t: f64) -> Vec<f64> {
    let n = g.vertex_count();
    let mut out = vec![0.0; n];
    for x in 0..n {
        for y in 0..n {
            if pi[x][y] == 0.0 {
                continue;
            }
            let nu = interpolation_by_enumeration(g, x, y, t);
            for z in 0..n {
                out[z] += pi[x][y] * nu[z];
            }
        }
    }
    out
}

/// ∇_{x,y}f(z) as the average over geodesics through z of the weighted
/// forward and backward differences at z.
pub fn gradient_by_enumeration(g: &Graph, f: &[f64], x: usize, y: usize) -> Vec<f64> {
    let paths = geodesics(g, x, y);
    let n = g.vertex_count();
    let d = paths[0].len() - 1;
    let mut sum = vec![0.0; n];
    let mut hits = vec![0usize; n];
    if d == 0 {
        return sum;
    }
    for p in &paths {
        for (k, &z) in p.iter().enumerate() {
            let mut v = 0.0;
            if k < d {
                v += (d - k) as f64 / d as f64 * (f[p[k + 1]] - f[z]);
            }
            if k > 0 {
                v += k as f64 / d as f64 * (f[z] - f[p[k - 1]]);
            }
            sum[z] += v;
            hits[z] += 1;
        }
    }
    sum.iter().zip(&hits).map(|(s, h)| if *h > 0 { s / *h as f64 } else { 0.0 }).collect()
}

pub fn relative_entropy_naive(nu: &[f64], mu: &[f64]) -> f64 {
    nu.iter().zip(mu).filter(|(a, _)| **a > 0.0).map(|(a, b)| a * (a / b).ln()).sum()
}

/// Σ_x ν₀(x)[1 − ν₁(x)/ν₀(x)]₊², written out independently.
pub fn hamming_weak_cost(nu0: &[f64], nu1: &[f64]) -> f64 {
    let mut total = 0.0;
    for (a, b) in nu0.iter().zip(nu1) {
        if *a > 0.0 {
            let r = 1.0 - b / a;
            if r > 0.0 {
                total += a * r * r;
            }
        }
    }
    total
}

/// Σ_x ν₀(x) (Σ_y d(x,y) π(x,y)/ν₀(x))².
pub fn weak_objective(dist: &[Vec<usize>], pi: &[Vec<f64>]) -> f64 {
    let mut total = 0.0;
    for (x, row) in pi.iter().enumerate() {
        let mass: f64 = row.iter().sum();
        if mass > 0.0 {
            let m: f64 = row.iter().enumerate().map(|(y, p)| dist[x][y] as f64 * p).sum();
            total += m * m / mass;
        }
    }
    total
}

/// Minimum of the weak cost on two_point over a grid of π(0,0).
pub fn weak_cost_grid_two_point(nu0: &[f64], nu1: &[f64], step: f64) -> f64 {
    let dist = vec![vec![0, 1], vec![1, 0]];
    let lo = (nu0[0] - nu1[1]).max(0.0);
    let hi = nu0[0].min(nu1[0]);
    let steps = ((hi - lo) / step).ceil() as usize;
    (0..=steps)
        .map(|i| {
            let a = (lo + i as f64 * step).min(hi);
            let pi = vec![vec![a, nu0[0] - a], vec![nu1[0] - a, nu0[1] - nu1[0] + a]];
            weak_objective(&dist, &pi)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Weak cost on a 3-vertex graph: coarse grid over the four free entries of the
/// coupling, then repeated finer grids around the incumbent.
pub fn weak_cost_grid_three(dist: &[Vec<usize>], nu0: &[f64], nu1: &[f64], final_step: f64) -> f64 {
    let eval = |p: [f64; 4]| -> Option<f64> {
        let (r20, r21) = (nu1[0] - p[0] - p[2], nu1[1] - p[1] - p[3]);
        let pi = vec![
            vec![p[0], p[1], nu0[0] - p[0] - p[1]],
            vec![p[2], p[3], nu0[1] - p[2] - p[3]],
            vec![r20, r21, nu0[2] - r20 - r21],
        ];
        if pi.iter().flatten().any(|v| *v < -1e-15) {
            return None;
        }
        Some(weak_objective(dist, &pi))
    };
    let mut best = (f64::INFINITY, [0.0; 4]);
    let mut centre = [0.5; 4];
    let mut radius = 0.5f64;
    let mut step = 0.02f64;
    loop {
        let k = (radius / step).round() as i64;
        for a in -k..=k {
            for b in -k..=k {
                for c in -k..=k {
                    for d in -k..=k {
                        let p = [
                            centre[0] + a as f64 * step,
                            centre[1] + b as f64 * step,
                            centre[2] + c as f64 * step,
                            centre[3] + d as f64 * step,
                        ];
                        if p.iter().any(|v| *v < 0.0) {
                            continue;
                        }
                        if let Some(v) = eval(p) {
                            if v < best.0 {
                                best = (v, p);
                            }
                        }
                    }
                }
            }
        }
        if step <= final_step {
            return best.0;
        }
        centre = best.1;
        radius = 4.0 * step;
        step = (step / 4.0).max(final_step);
    }
}

/// Ent and one-sided Dirichlet form of e^{G} with G(x) = g(u(Σx)) by summing over {0,1}^n.
pub fn clt_brute_force(n: usize, p: f64, g: impl Fn(f64) -> f64) -> (f64, f64) {
    let sd = (n as f64 * p * (1.0 - p)).sqrt();
    let big_g = |x: usize| g((x.count_ones() as f64 - n as f64 * p) / sd);
    let mut z = 0.0;
    let mut e = 0.0;
    let mut dir = 0.0;
    for x in 0..1usize << n {
        let k = x.count_ones() as i32;
        let mu = p.powi(k) * (1.0 - p).powi(n as i32 - k);
        let gx = big_g(x);
        z += mu * gx.exp();
        e += mu * gx.exp() * gx;
        for i in 0..n {
            let diff = (gx - big_g(x ^ (1 << i))).max(0.0);
            dir += mu * gx.exp() * diff * diff;
        }
    }
    (e - z * z.ln(), dir)
}

/// Central difference with step h.
pub fn central_difference(f: impl Fn(f64) -> f64, t: f64, h: f64) -> f64 {
    (f(t + h) - f(t - h)) / (2.0 * h)
}

/// Canonical form of a graph under a vertex relabelling: sorted edge list.
pub fn relabelled_edges(g: &Graph, perm: &[usize]) -> Vec<(usize, usize)> {
    let mut e: Vec<(usize, usize)> = g
        .edges()
        .map(|(u, v)| {
            let (a, b) = (perm[u], perm[v]);
            (a.min(b), a.max(b))
        })
        .collect();
    e.sort_unstable();
    e
}

pub fn sorted_edges(g: &Graph) -> Vec<(usize, usize)> {
    relabelled_edges(g, &(0..g.vertex_count()).collect::<Vec<_>>())
}

/// Searches all permutations for an isomorphism (small graphs only).
pub fn isomorphic(a: &Graph, b: &Graph) -> bool {
    let n = a.vertex_count();
    if n != b.vertex_count() || a.edge_count() != b.edge_count() {
        return false;
    }
    let target = sorted_edges(b);
    let mut perm: Vec<usize> = (0..n).collect();
    fn heap(k: usize, perm: &mut Vec<usize>, a: &Graph, target: &[(usize, usize)]) -> bool {
        if k == 1 {
            return relabelled_edges(a, perm) == target;
        }
        for i in 0..k {
            if heap(k - 1, perm, a, target) {
                return true;
            }
            let j = if k % 2 == 0 { i } else { 0 };
            perm.swap(j, k - 1);
        }
        false
    }
    heap(n, &mut perm, a, &target)
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// Minimum of Σ cost·π over couplings of `a` and `b`, by enumerating every
/// basis of m+n−1 cells of the transportation polytope.
pub fn transport_by_bases(cost: &[Vec<f64>], a: &[f64], b: &[f64]) -> f64 {
    let (m, n) = (a.len(), b.len());
    let k = m + n - 1;
    let mut best = f64::INFINITY;
    for cells in subsets(m * n, k) {
        let mut rows = Vec::with_capacity(k);
        let mut rhs = Vec::with_capacity(k);
        for i in 0..m {
            rows.push(cells.iter().map(|&c| if c / n == i { 1.0 } else { 0.0 }).collect());
            rhs.push(a[i]);
        }
        for j in 0..n - 1 {
            rows.push(cells.iter().map(|&c| if c % n == j { 1.0 } else { 0.0 }).collect());
            rhs.push(b[j]);
        }
        let Some(x) = solve_square(rows, rhs) else { continue };
        if x.iter().any(|v| *v < -1e-12) {
            continue;
        }
        let last: f64 = cells.iter().zip(&x).filter(|(c, _)| *c % n == n - 1).map(|(_, v)| v).sum();
        if (last - b[n - 1]).abs() > 1e-9 {
            continue;
        }
        let value: f64 = cells.iter().zip(&x).map(|(&c, v)| cost[c / n][c % n] * v).sum();
        best = best.min(value);
    }
    best
}
