//! Probability vectors, couplings, kernels and entropy functionals.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Accepted deviation of the total mass from 1 before input is rejected.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Totals this close to 1 are left alone, so normalised vectors survive a round trip.
fn is_unit_up_to_rounding(total: f64, len: usize) -> bool {
    (total - 1.0).abs() <= len as f64 * f64::EPSILON
}

/// Probability measure on `0..len`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<f64>", try_from = "Vec<f64>")]
pub struct Measure {
    weights: Vec<f64>,
    renormalized: bool,
}

impl Measure {
    /// Validates nonnegativity and total mass; masses off by at most
    /// [`MASS_TOLERANCE`] are rescaled and flagged.
    pub fn new(weights: Vec<f64>) -> Result<Measure> {
        if weights.is_empty() {
            return Err(Error::InvalidMeasure("empty weight vector".into()));
        }
        if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidMeasure(format!("weight {i} is {w}")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidMeasure(format!("total mass {total} differs from 1")));
        }
        let rounding = is_unit_up_to_rounding(total, weights.len());
        let mut m = Measure::normalized(weights);
        m.renormalized = !rounding;
        Ok(m)
    }

    /// Rescales arbitrary nonnegative weights to unit mass.
    pub fn normalized(mut weights: Vec<f64>) -> Measure {
        let total: f64 = weights.iter().sum();
        assert!(total > 0.0 && total.is_finite(), "cannot normalise weights with total {total}");
        if !is_unit_up_to_rounding(total, weights.len()) {
            weights.iter_mut().for_each(|w| *w /= total);
        }
        Measure { weights, renormalized: false }
    }

    /// Wraps weights known to be a probability vector up to rounding.
    pub(crate) fn from_raw(weights: Vec<f64>) -> Measure {
        Measure { weights, renormalized: false }
    }

    pub fn uniform(n: usize) -> Measure {
        Measure { weights: vec![1.0 / n as f64; n], renormalized: false }
    }

    pub fn dirac(n: usize, x: usize) -> Measure {
        let mut weights = vec![0.0; n];
        weights[x] = 1.0;
        Measure { weights, renormalized: false }
    }

    /// Bernoulli law on {0,1} with `P(1) = p`.
    pub fn bernoulli(p: f64) -> Measure {
        Measure { weights: vec![1.0 - p, p], renormalized: false }
    }

    /// Measure with density `f` with respect to `mu`, normalized.
    pub fn with_density(mu: &Measure, f: &[f64]) -> Measure {
        Measure::normalized(mu.weights.iter().zip(f).map(|(m, f)| m * f).collect())
    }

    /// Product measure indexed row-major (first factor most significant).
    pub fn product(factors: &[Measure]) -> Measure {
        let mut weights = vec![1.0];
        for f in factors {
            weights = weights.iter().flat_map(|a| f.weights.iter().map(move |b| a * b)).collect();
        }
        Measure { weights, renormalized: false }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn get(&self, x: usize) -> f64 {
        self.weights[x]
    }

    pub fn was_renormalized(&self) -> bool {
        self.renormalized
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.weights.iter().enumerate().filter(|(_, w)| **w > 0.0).map(|(i, _)| i)
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// ∫ f dν.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.weights.iter().zip(f).map(|(w, f)| if *w == 0.0 { 0.0 } else { w * f }).sum()
    }

    /// (1−t)·self + t·other.
    pub fn mix(&self, other: &Measure, t: f64) -> Measure {
        let weights = self.weights.iter().zip(&other.weights).map(|(a, b)| (1.0 - t) * a + t * b).collect();
        Measure::normalized(weights)
    }

    /// Whether `other(x) = 0` forces `self(x) = 0`.
    pub fn is_absolutely_continuous(&self, other: &Measure) -> bool {
        self.weights.iter().zip(&other.weights).all(|(a, b)| *a == 0.0 || *b > 0.0)
    }

    pub fn check_len(&self, n: usize) -> Result<()> {
        if self.len() == n {
            Ok(())
        } else {
            Err(Error::Dimension { expected: n, got: self.len() })
        }
    }
}

impl From<Measure> for Vec<f64> {
    fn from(m: Measure) -> Vec<f64> {
        m.weights
    }
}

impl TryFrom<Vec<f64>> for Measure {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Measure> {
        Measure::new(v)
    }
}

/// H(ν|μ) in nats; `f64::INFINITY` when ν charges a μ-null vertex.
pub fn relative_entropy(nu: &Measure, mu: &Measure) -> f64 {
    let mut h = 0.0;
    for (a, b) in nu.weights.iter().zip(&mu.weights) {
        if *a == 0.0 {
            continue;
        }
        if *b == 0.0 {
            return f64::INFINITY;
        }
        h += a * (a / b).ln();
    }
    h.max(0.0)
}

/// Σ_x |ν₀(x) − ν₁(x)|.
pub fn total_variation_l1(nu0: &Measure, nu1: &Measure) -> f64 {
    nu0.weights.iter().zip(&nu1.weights).map(|(a, b)| (a - b).abs()).sum()
}

/// Ent_μ(f) = ∫ f log f dμ − μ(f) log μ(f) for a nonnegative function.
pub fn entropy_functional(mu: &Measure, f: &[f64]) -> f64 {
    let z = mu.integrate(f);
    let mut acc = 0.0;
    for (m, v) in mu.weights.iter().zip(f) {
        if *m > 0.0 && *v > 0.0 {
            acc += m * v * v.ln();
        }
    }
    acc - if z > 0.0 { z * z.ln() } else { 0.0 }
}

/// Joint law on `V × V` with cached marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    joint: Array2<f64>,
    first: Measure,
    second: Measure,
}

impl Coupling {
    /// Validates a joint matrix; the marginals are its row and column sums.
    pub fn new(joint: Array2<f64>) -> Result<Coupling> {
        if joint.nrows() == 0 || joint.ncols() == 0 {
            return Err(Error::InvalidCoupling("empty matrix".into()));
        }
        if let Some(w) = joint.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidCoupling(format!("entry {w} is not a nonnegative real")));
        }
        let total = joint.sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidCoupling(format!("total mass {total} differs from 1")));
        }
        Ok(Coupling::from_joint_unchecked(joint))
    }

    /// Builds a coupling from a joint matrix already known to be a probability,
    /// rescaling rounding drift.
    pub(crate) fn from_joint_unchecked(mut joint: Array2<f64>) -> Coupling {
        joint.mapv_inplace(|w| w.max(0.0));
        let total = joint.sum();
        if !is_unit_up_to_rounding(total, joint.len()) {
            joint.mapv_inplace(|w| w / total);
        }
        let first = Measure { weights: joint.rows().into_iter().map(|r| r.sum()).collect(), renormalized: false };
        let second = Measure { weights: joint.columns().into_iter().map(|c| c.sum()).collect(), renormalized: false };
        Coupling { joint, first, second }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Coupling> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::InvalidCoupling("ragged rows".into()));
        }
        let flat: Vec<f64> = rows.into_iter().flatten().collect();
        Coupling::new(Array2::from_shape_vec((n, m), flat).expect("shape"))
    }

    pub fn independent(nu0: &Measure, nu1: &Measure) -> Coupling {
        let joint = Array2::from_shape_fn((nu0.len(), nu1.len()), |(x, y)| nu0.get(x) * nu1.get(y));
        Coupling { joint, first: nu0.clone(), second: nu1.clone() }
    }

    pub fn diagonal(nu: &Measure) -> Coupling {
        let n = nu.len();
        let joint = Array2::from_shape_fn((n, n), |(x, y)| if x == y { nu.get(x) } else { 0.0 });
        Coupling { joint, first: nu.clone(), second: nu.clone() }
    }

    /// Kronecker product of couplings on the factors of a row-major product.
    pub fn product(factors: &[Coupling]) -> Coupling {
        let mut joint = Array2::from_elem((1, 1), 1.0);
        for f in factors {
            let (a, b) = (joint.nrows(), joint.ncols());
            let (c, d) = (f.joint.nrows(), f.joint.ncols());
            joint = Array2::from_shape_fn((a * c, b * d), |(x, y)| joint[[x / c, y / d]] * f.joint[[x % c, y % d]]);
        }
        Coupling::from_joint_unchecked(joint)
    }

    pub fn joint(&self) -> &Array2<f64> {
        &self.joint
    }

    pub fn first(&self) -> &Measure {
        &self.first
    }

    pub fn second(&self) -> &Measure {
        &self.second
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.joint[[x, y]]
    }

    pub fn size(&self) -> usize {
        self.joint.nrows()
    }

    /// Entries with positive mass, in row-major order.
    pub fn support(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.joint.indexed_iter().filter(|(_, w)| **w > 0.0).map(|((x, y), w)| (x, y, *w))
    }

    /// The same coupling seen from the second marginal.
    pub fn transposed(&self) -> Coupling {
        Coupling { joint: self.joint.t().to_owned(), first: self.second.clone(), second: self.first.clone() }
    }

    /// Row-normalized kernel p(x,·) = π(x,·)/ν₀(x), zero rows off the support.
    pub fn to_kernel(&self) -> Kernel {
        let mut rows = self.joint.clone();
        for (x, mut row) in rows.rows_mut().into_iter().enumerate() {
            let m = self.first.get(x);
            if m > 0.0 {
                row.mapv_inplace(|w| w / m);
            } else {
                row.fill(0.0);
            }
        }
        Kernel { base: self.first.clone(), rows }
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.joint.rows().into_iter().map(|r| r.to_vec()).collect()
    }

    /// Largest deviation of the marginals from `nu0`, `nu1`.
    pub fn marginal_error(&self, nu0: &Measure, nu1: &Measure) -> f64 {
        let a = self.first.weights.iter().zip(nu0.weights()).map(|(a, b)| (a - b).abs());
        let b = self.second.weights.iter().zip(nu1.weights()).map(|(a, b)| (a - b).abs());
        a.chain(b).fold(0.0, f64::max)
    }
}

/// A base measure together with a row-stochastic transition matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    base: Measure,
    rows: Array2<f64>,
}

impl Kernel {
    pub fn new(base: Measure, rows: Array2<f64>) -> Result<Kernel> {
        if rows.nrows() != base.len() {
            return Err(Error::Dimension { expected: base.len(), got: rows.nrows() });
        }
        for (x, row) in rows.rows().into_iter().enumerate() {
            if row.iter().any(|w| !w.is_finite() || *w < 0.0) {
                return Err(Error::InvalidCoupling(format!("kernel row {x} has a negative entry")));
            }
            if base.get(x) > 0.0 && (row.sum() - 1.0).abs() > 1e-10 {
                return Err(Error::InvalidCoupling(format!("kernel row {x} sums to {}", row.sum())));
            }
        }
        Ok(Kernel { base, rows })
    }

    pub fn base(&self) -> &Measure {
        &self.base
    }

    pub fn rows(&self) -> &Array2<f64> {
        &self.rows
    }

    pub fn to_coupling(&self) -> Coupling {
        let mut joint = self.rows.clone();
        for (x, mut row) in joint.rows_mut().into_iter().enumerate() {
            let m = self.base.get(x);
            row.mapv_inplace(|w| w * m);
        }
        Coupling::from_joint_unchecked(joint)
    }

    /// Σ_x base(x) p(x, ·).
    pub fn push_forward(&self) -> Measure {
        self.to_coupling().second
    }
}

/// Mixed-radix indexing of a product of finite sets in which coordinate `i`
/// of index `v` is `(v / strides[i]) % sizes[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductIndexer {
    sizes: Vec<usize>,
    strides: Vec<usize>,
}

impl ProductIndexer {
    pub fn new(sizes: Vec<usize>, strides: Vec<usize>) -> Result<ProductIndexer> {
        if sizes.len() != strides.len() || sizes.is_empty() {
            return Err(Error::InvalidParameter("sizes and strides must be nonempty and of equal length".into()));
        }
        Ok(ProductIndexer { sizes, strides })
    }

    /// Row-major indexing (first coordinate most significant).
    pub fn row_major(sizes: Vec<usize>) -> ProductIndexer {
        let mut strides = vec![1; sizes.len()];
        for i in (0..sizes.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * sizes[i + 1];
        }
        ProductIndexer { sizes, strides }
    }

    pub fn from_layout(layout: &crate::graph::ProductLayout) -> ProductIndexer {
        ProductIndexer { sizes: layout.sizes(), strides: layout.strides().to_vec() }
    }

    /// Same product with coordinates reordered: new coordinate `k` is old `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> ProductIndexer {
        ProductIndexer {
            sizes: order.iter().map(|&i| self.sizes[i]).collect(),
            strides: order.iter().map(|&i| self.strides[i]).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn total(&self) -> usize {
        self.sizes.iter().product()
    }

    pub fn coordinate(&self, v: usize, i: usize) -> usize {
        (v / self.strides[i]) % self.sizes[i]
    }

    /// Index of the suffix `(x_k, …, x_{n−1})` with `x_k` least significant.
    pub fn suffix_index(&self, v: usize, k: usize) -> usize {
        let mut idx = 0;
        for i in (k..self.len()).rev() {
            idx = idx * self.sizes[i] + self.coordinate(v, i);
        }
        idx
    }

    pub fn suffix_count(&self, k: usize) -> usize {
        self.sizes[k..].iter().product()
    }
}

/// Last-coordinate-first disintegration of a measure on a product:
/// `suffix[k][s]` is the mass of the coordinates `k..n` taking suffix value `s`.
#[derive(Debug, Clone)]
pub struct Disintegration {
    indexer: ProductIndexer,
    suffix: Vec<Vec<f64>>,
}

impl Disintegration {
    pub fn new(mu: &Measure, indexer: &ProductIndexer) -> Result<Disintegration> {
        mu.check_len(indexer.total())?;
        let n = indexer.len();
        let mut suffix = vec![Vec::new(); n + 1];
        let mut base = vec![0.0; indexer.suffix_count(0)];
        for (v, w) in mu.weights().iter().enumerate() {
            base[indexer.suffix_index(v, 0)] += w;
        }
        suffix[0] = base;
        for k in 0..n {
            let size = indexer.sizes[k];
            let next: Vec<f64> =
                (0..indexer.suffix_count(k + 1)).map(|s| (0..size).map(|x| suffix[k][x + size * s]).sum()).collect();
            suffix[k + 1] = next;
        }
        Ok(Disintegration { indexer: indexer.clone(), suffix })
    }

    pub fn indexer(&self) -> &ProductIndexer {
        &self.indexer
    }

    /// Marginal of the last coordinate.
    pub fn last_marginal(&self) -> Measure {
        let k = self.indexer.len() - 1;
        Measure::normalized(self.suffix[k].clone())
    }

    /// Mass of suffix `s` over coordinates `k..n`.
    pub fn suffix_mass(&self, k: usize, s: usize) -> f64 {
        self.suffix[k][s]
    }

    /// Law of coordinate `k` given that coordinates `k+1..n` have suffix index
    /// `s`; `None` when the conditioning event is null.
    pub fn conditional(&self, k: usize, s: usize) -> Option<Measure> {
        let mass = self.suffix[k + 1][s];
        if mass <= 0.0 {
            return None;
        }
        let size = self.indexer.sizes[k];
        Some(Measure::normalized((0..size).map(|x| self.suffix[k][x + size * s]).collect()))
    }

    /// Rebuilds the measure as the product of the last marginal and all conditionals.
    pub fn reassemble(&self) -> Vec<f64> {
        let n = self.indexer.len();
        (0..self.indexer.total())
            .map(|v| {
                let mut w = 1.0;
                for k in 0..n {
                    let s = self.indexer.suffix_index(v, k + 1);
                    let x = self.indexer.coordinate(v, k);
                    match self.conditional(k, s) {
                        Some(c) => w *= c.get(x),
                        None => return 0.0,
                    }
                }
                w
            })
            .collect()
    }
}

/// Right-hand side of the chain rule
/// H(γ|μ) = H(γⁿ|μⁿ) + Σ_k Σ_z H(γᵏ(·|z_{k+1:n})|μᵏ) γ(z)
/// for a product reference `μ = ⊗ μᵏ`.
pub fn chain_rule_entropy(gamma: &Measure, factors: &[Measure], indexer: &ProductIndexer) -> Result<f64> {
    if factors.len() != indexer.len() {
        return Err(Error::Dimension { expected: indexer.len(), got: factors.len() });
    }
    let dis = Disintegration::new(gamma, indexer)?;
    let n = indexer.len();
    let mut total = relative_entropy(&dis.last_marginal(), &factors[n - 1]);
    for k in 0..n - 1 {
        for s in 0..indexer.suffix_count(k + 1) {
            if let Some(cond) = dis.conditional(k, s) {
                total += dis.suffix_mass(k + 1, s) * relative_entropy(&cond, &factors[k]);
            }
        }
    }
    Ok(total)
}
