//! Seeded random instances: every instance draws from its own ChaCha stream,
//! so results do not depend on scheduling.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Uniform};

use crate::graph::Graph;
use crate::measure::Measure;

pub fn instance_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Symmetric Dirichlet(1) sample, i.e. normalized standard exponentials.
pub fn dirichlet<R: Rng>(rng: &mut R, n: usize) -> Measure {
    let w: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).map(|x: f64| x.max(f64::MIN_POSITIVE)).collect();
    Measure::normalized(w)
}

/// Values i.i.d. uniform on (lo, hi).
pub fn uniform_values<R: Rng>(rng: &mut R, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let dist = Uniform::new(lo, hi);
    (0..n).map(|_| dist.sample(rng)).collect()
}

/// Density f = exp(u), u i.i.d. uniform(−1,1), normalized so that μ(f) = 1.
pub fn density<R: Rng>(rng: &mut R, mu: &Measure) -> Vec<f64> {
    let f: Vec<f64> = uniform_values(rng, mu.len(), -1.0, 1.0).into_iter().map(f64::exp).collect();
    let z = mu.integrate(&f);
    f.into_iter().map(|v| v / z).collect()
}

/// Product of independent Dirichlet(1) factor laws over the graph's layout,
/// indexed like the graph.
pub fn product_measure<R: Rng>(rng: &mut R, g: &Graph) -> Measure {
    let layout = g.layout();
    let factors: Vec<Measure> = layout.factors().iter().map(|f| dirichlet(rng, f.vertex_count())).collect();
    let weights = (0..g.vertex_count())
        .map(|v| factors.iter().enumerate().map(|(i, m)| m.get(layout.coordinate(v, i))).product())
        .collect();
    Measure::normalized(weights)
}

/// Product measure with the given factor laws, indexed like the graph.
pub fn product_of(g: &Graph, factors: &[Measure]) -> Measure {
    let layout = g.layout();
    let weights = (0..g.vertex_count())
        .map(|v| factors.iter().enumerate().map(|(i, m)| m.get(layout.coordinate(v, i))).product())
        .collect();
    Measure::normalized(weights)
}
