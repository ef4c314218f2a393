//! Linear differential operators `Σ_k c_k(x) ∂^k` with expression
//! coefficients: composition, formal adjoint, commutators, and their
//! discretization on grids.

use std::collections::BTreeMap;
use std::collections::HashMap;

use crate::band::BandMatrix;
use crate::error::{Error, Result};
use crate::expr::{sum_of_terms, Evaluator, Expr};
use crate::grid::{Grid, GridFunction};
use crate::stencil;

/// Relative threshold below which a coefficient counts as vanishing on probes.
pub const PRUNE_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct DiffOperator {
    coeffs: BTreeMap<usize, Expr>,
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Memoized higher derivatives of one coefficient.
struct DerivCache(HashMap<usize, Vec<Expr>>);

impl DerivCache {
    fn new() -> Self {
        Self(HashMap::new())
    }

    fn get(&mut self, e: &Expr, k: usize) -> Expr {
        let list = self.0.entry(e.ptr_id()).or_insert_with(|| vec![e.clone()]);
        while list.len() <= k {
            let next = list.last().unwrap().diff();
            list.push(next);
        }
        list[k].clone()
    }
}

impl DiffOperator {
    pub fn zero() -> Self {
        Self { coeffs: BTreeMap::new() }
    }

    pub fn identity() -> Self {
        Self::multiplication(Expr::one())
    }

    /// Multiplication by `c(x)`.
    pub fn multiplication(c: Expr) -> Self {
        Self::from_coeffs([(0, c)])
    }

    /// `∂^k`.
    pub fn partial(k: usize) -> Self {
        Self::from_coeffs([(k, Expr::one())])
    }

    pub fn from_coeffs(coeffs: impl IntoIterator<Item = (usize, Expr)>) -> Self {
        let mut map: BTreeMap<usize, Vec<(f64, Expr)>> = BTreeMap::new();
        for (k, c) in coeffs {
            map.entry(k).or_default().push((1.0, c));
        }
        Self::collect(map)
    }

    fn collect(map: BTreeMap<usize, Vec<(f64, Expr)>>) -> Self {
        let coeffs = map
            .into_iter()
            .map(|(k, parts)| (k, sum_of_terms(parts)))
            .filter(|(_, c)| !c.is_zero())
            .collect();
        Self { coeffs }
    }

    /// `scale · (sign·∂ + w)`: the first-order building block of every factorization.
    pub fn first_order(sign: f64, w: &Expr, scale: f64) -> Self {
        Self::from_coeffs([(1, Expr::constant(sign * scale)), (0, w.scale(scale))])
    }

    /// `-½∂² + v`.
    pub fn hamiltonian(v: &Expr) -> Self {
        Self::from_coeffs([(2, Expr::constant(-0.5)), (0, v.clone())])
    }

    pub fn coeff(&self, k: usize) -> Expr {
        self.coeffs.get(&k).cloned().unwrap_or_else(Expr::zero)
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (usize, &Expr)> {
        self.coeffs.iter().map(|(k, c)| (*k, c))
    }

    /// Highest k with a coefficient that is not structurally zero.
    pub fn order(&self) -> usize {
        self.coeffs.keys().next_back().copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|(k, c)| (*k, c.scale(s))))
    }

    pub fn add(&self, other: &Self) -> Self {
        self.add_scaled(1.0, other)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add_scaled(-1.0, other)
    }

    pub fn add_scaled(&self, s: f64, other: &Self) -> Self {
        let mut map: BTreeMap<usize, Vec<(f64, Expr)>> = BTreeMap::new();
        for (k, c) in &self.coeffs {
            map.entry(*k).or_default().push((1.0, c.clone()));
        }
        for (k, c) in &other.coeffs {
            map.entry(*k).or_default().push((s, c.clone()));
        }
        Self::collect(map)
    }

    /// `self ∘ other` via the Leibniz rule
    /// `∂^k ∘ q = Σ_i C(k,i) q^{(i)} ∂^{k-i}`.
    pub fn compose(&self, other: &Self) -> Self {
        let mut cache = DerivCache::new();
        let mut map: BTreeMap<usize, Vec<(f64, Expr)>> = BTreeMap::new();
        for (&k, p) in &self.coeffs {
            for (&j, q) in &other.coeffs {
                for i in 0..=k {
                    let dq = cache.get(q, i);
                    if dq.is_zero() {
                        continue;
                    }
                    map.entry(k - i + j).or_default().push((binomial(k, i), p * &dq));
                }
            }
        }
        Self::collect(map)
    }

    /// Formal adjoint `Σ_k (-1)^k ∂^k ∘ c_k`.
    pub fn adjoint(&self) -> Self {
        let mut cache = DerivCache::new();
        let mut map: BTreeMap<usize, Vec<(f64, Expr)>> = BTreeMap::new();
        for (&k, c) in &self.coeffs {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            for i in 0..=k {
                let dc = cache.get(c, i);
                if dc.is_zero() {
                    continue;
                }
                map.entry(k - i).or_default().push((sign * binomial(k, i), dc));
            }
        }
        Self::collect(map)
    }

    /// `[self, other] = self∘other - other∘self`.
    pub fn commutator(&self, other: &Self) -> Self {
        self.compose(other).sub(&other.compose(self))
    }

    /// Drops coefficients that vanish numerically on `probes` relative to
    /// the largest coefficient magnitude.
    pub fn prune(&self, probes: &[f64]) -> Result<Self> {
        let mut ev = Evaluator::new(probes);
        let mut samples = Vec::new();
        let mut scale: f64 = 0.0;
        for (k, c) in &self.coeffs {
            let v = ev.eval(c)?;
            scale = scale.max(v.iter().fold(0.0f64, |m, x| m.max(x.abs())));
            samples.push((*k, c.clone(), v));
        }
        let keep = samples.into_iter().filter(|(_, _, v)| {
            v.iter().fold(0.0f64, |m, x| m.max(x.abs())) > PRUNE_TOL * scale.max(1.0)
        });
        Ok(Self { coeffs: keep.map(|(k, c, _)| (k, c)).collect() })
    }

    /// Order after dropping coefficients that vanish on the probes.
    pub fn measured_order(&self, probes: &[f64]) -> Result<usize> {
        Ok(self.prune(probes)?.order())
    }

    /// Largest `|a_k - b_k|` over orders and probes, relative to `1 + |a_k|`.
    pub fn distance_on(&self, other: &Self, probes: &[f64]) -> Result<f64> {
        let mut ev = Evaluator::new(probes);
        let orders: std::collections::BTreeSet<usize> =
            self.coeffs.keys().chain(other.coeffs.keys()).copied().collect();
        let mut worst: f64 = 0.0;
        for k in orders {
            let a = ev.eval(&self.coeff(k))?;
            let b = ev.eval(&other.coeff(k))?;
            for (x, y) in a.iter().zip(b.iter()) {
                worst = worst.max((x - y).abs() / (1.0 + x.abs().max(y.abs())));
            }
        }
        Ok(worst)
    }

    pub fn approx_eq_on(&self, other: &Self, probes: &[f64], tol: f64) -> Result<bool> {
        Ok(self.distance_on(other, probes)? <= tol)
    }

    /// Samples coefficients and stencils once for repeated application.
    pub fn discretize(&self, grid: &Grid) -> Result<DiscreteOperator> {
        let order = self.order();
        if order > stencil::MAX_ORDER_SMALL_GRID && grid.len() < stencil::LARGE_GRID {
            return Err(Error::StencilGuard {
                order,
                n: grid.len(),
                required: stencil::LARGE_GRID,
            });
        }
        let xs = grid.points();
        let mut ev = Evaluator::new(&xs);
        let mut parts = Vec::new();
        for (k, c) in &self.coeffs {
            let samples = ev.eval(c)?.as_ref().clone();
            parts.push((stencil::centered(*k, grid.spacing()), samples));
        }
        Ok(DiscreteOperator { grid: *grid, parts })
    }

    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        self.discretize(&f.grid)?.apply(f)
    }

    pub fn to_matrix(&self, grid: &Grid) -> Result<BandMatrix> {
        self.discretize(grid)?.to_matrix()
    }
}

impl Expr {
    pub(crate) fn ptr_id(&self) -> usize {
        self.ptr()
    }
}

/// A differential operator sampled on a grid.
#[derive(Clone, Debug)]
pub struct DiscreteOperator {
    grid: Grid,
    /// (stencil weights from -p..=p, coefficient samples)
    parts: Vec<(Vec<f64>, Vec<f64>)>,
}

impl DiscreteOperator {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Applies the operator with zero Dirichlet padding outside the box.
    pub fn apply_slice(&self, f: &[f64]) -> Vec<f64> {
        let n = f.len();
        let mut out = vec![0.0; n];
        for (w, c) in &self.parts {
            let p = (w.len() / 2) as isize;
            for i in 0..n {
                let mut s = 0.0;
                for (t, wt) in w.iter().enumerate() {
                    let j = i as isize + t as isize - p;
                    if j >= 0 && (j as usize) < n {
                        s += wt * f[j as usize];
                    }
                }
                out[i] += c[i] * s;
            }
        }
        out
    }

    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        if f.grid != self.grid {
            return Err(Error::GridMismatch);
        }
        Ok(GridFunction { grid: self.grid, values: self.apply_slice(&f.values) })
    }

    pub fn to_matrix(&self) -> Result<BandMatrix> {
        let n = self.grid.len();
        let b = self.parts.iter().map(|(w, _)| w.len() / 2).max().unwrap_or(0);
        let mut m = BandMatrix::zeros(n, b, b);
        for (w, c) in &self.parts {
            let p = w.len() / 2;
            for i in 0..n {
                for (t, wt) in w.iter().enumerate() {
                    let j = i as isize + t as isize - p as isize;
                    if j >= 0 && (j as usize) < n {
                        m.add(i, j as usize, c[i] * wt);
                    }
                }
            }
        }
        Ok(m)
    }
}

/// A product of operators applied right to left, factor by factor. Keeps
/// round-off at the level of the individual factors instead of the expanded
/// high-order operator.
#[derive(Clone, Debug, Default)]
pub struct OperatorChain {
    /// Leftmost factor first.
    pub factors: Vec<DiffOperator>,
}

impl OperatorChain {
    pub fn new(factors: Vec<DiffOperator>) -> Self {
        Self { factors }
    }

    pub fn identity() -> Self {
        Self { factors: Vec::new() }
    }

    pub fn single(op: DiffOperator) -> Self {
        Self { factors: vec![op] }
    }

    /// `self ∘ other`.
    pub fn then(&self, other: &OperatorChain) -> Self {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        Self { factors }
    }

    pub fn power(&self, m: usize) -> Self {
        let mut factors = Vec::with_capacity(self.factors.len() * m);
        for _ in 0..m {
            factors.extend(self.factors.iter().cloned());
        }
        Self { factors }
    }

    /// Adjoint: reversed order of adjoint factors.
    pub fn adjoint(&self) -> Self {
        Self { factors: self.factors.iter().rev().map(|f| f.adjoint()).collect() }
    }

    pub fn expand(&self) -> DiffOperator {
        self.factors
            .iter()
            .fold(DiffOperator::identity(), |acc, f| acc.compose(f))
    }

    pub fn discretize(&self, grid: &Grid) -> Result<DiscreteChain> {
        let factors = self.factors.iter().map(|f| f.discretize(grid)).collect::<Result<_>>()?;
        Ok(DiscreteChain { factors })
    }
}

#[derive(Clone, Debug)]
pub struct DiscreteChain {
    factors: Vec<DiscreteOperator>,
}

impl DiscreteChain {
    pub fn apply_slice(&self, f: &[f64]) -> Vec<f64> {
        let mut v = f.to_vec();
        for op in self.factors.iter().rev() {
            v = op.apply_slice(&v);
        }
        v
    }

    pub fn is_identity(&self) -> bool {
        self.factors.is_empty()
    }
}
