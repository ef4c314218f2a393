//! Planar Hamiltonians `H = H_x + H_y` and the integrals
//! `K = H_x - H_y`, `I₁ = A_x†^m A_y^n - A_x^m A_y†^n`,
//! `I₂ = A_x†^m A_y^n + A_x^m A_y†^n`, acting on product states axis by axis.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::operator::{DiffOperator, DiscreteChain, OperatorChain};
use crate::schrodinger::{default_degeneracy_tol, separable_2d, SpectrumResult};
use crate::susy::{project, LadderPair, KERNEL_TOL};

/// `m·λx = n·λy` up to `1e-10·max(λx, λy)`.
pub fn resonance(m: usize, n: usize, lx: f64, ly: f64) -> Result<bool> {
    if m < 1 || n < 1 {
        return Err(Error::InvalidParameter(format!("m and n must be >= 1, got ({m}, {n})")));
    }
    if !(lx > 0.0 && ly > 0.0) {
        return Err(Error::InvalidParameter(format!("ladder spacings must be > 0, got ({lx}, {ly})")));
    }
    Ok((m as f64 * lx - n as f64 * ly).abs() < 1e-10 * lx.max(ly))
}

/// Smallest `(m, n)` with `m, n ≤ max` satisfying [`resonance`].
pub fn find_resonance(lx: f64, ly: f64, max: usize) -> Result<Option<(usize, usize)>> {
    for total in 2..=2 * max {
        for m in 1..total {
            let n = total - m;
            if m <= max && n <= max && resonance(m, n, lx, ly)? {
                return Ok(Some((m, n)));
            }
        }
    }
    Ok(None)
}

/// `Σ c · X ⊗ Y` with `X` acting on `x` and `Y` on `y`.
#[derive(Clone, Debug, Default)]
pub struct SeparableOperator {
    pub terms: Vec<(f64, OperatorChain, OperatorChain)>,
}

impl SeparableOperator {
    pub fn term(c: f64, x: OperatorChain, y: OperatorChain) -> Self {
        Self { terms: vec![(c, x, y)] }
    }

    pub fn plus(mut self, other: &Self) -> Self {
        self.terms.extend(other.terms.iter().cloned());
        self
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { terms: self.terms.iter().map(|(c, x, y)| (c * s, x.clone(), y.clone())).collect() }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (c1, x1, y1) in &self.terms {
            for (c2, x2, y2) in &other.terms {
                terms.push((c1 * c2, x1.then(x2), y1.then(y2)));
            }
        }
        Self { terms }
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.compose(other).plus(&other.compose(self).scaled(-1.0))
    }

    pub fn adjoint(&self) -> Self {
        Self {
            terms: self.terms.iter().map(|(c, x, y)| (*c, x.adjoint(), y.adjoint())).collect(),
        }
    }

    /// Total order after expanding and pruning each axis factor.
    pub fn measured_order(&self, px: &[f64], py: &[f64]) -> Result<usize> {
        let mut order = 0;
        for (c, x, y) in &self.terms {
            if *c == 0.0 {
                continue;
            }
            let ox = x.expand().prune(px)?;
            let oy = y.expand().prune(py)?;
            if ox.is_zero() || oy.is_zero() {
                continue;
            }
            order = order.max(ox.order() + oy.order());
        }
        Ok(order)
    }

    /// Coefficient-level distance: the coefficient of `∂x^p ∂y^q` at
    /// `(x, y)` is `Σ c X_p(x) Y_q(y)`; compared on all probe pairs,
    /// relative to `1 + max`.
    pub fn distance_on(&self, other: &Self, px: &[f64], py: &[f64]) -> Result<f64> {
        let table = |op: &Self| -> Result<Vec<(f64, Vec<Vec<f64>>, Vec<Vec<f64>>)>> {
            op.terms
                .iter()
                .map(|(c, x, y)| {
                    let sample = |chain: &OperatorChain, p: &[f64]| -> Result<Vec<Vec<f64>>> {
                        let e = chain.expand();
                        (0..=e.order()).map(|k| e.coeff(k).eval_many(p)).collect()
                    };
                    Ok((*c, sample(x, px)?, sample(y, py)?))
                })
                .collect()
        };
        let a = table(self)?;
        let b = table(other)?;
        let max_p = a.iter().chain(&b).map(|t| t.1.len()).max().unwrap_or(0);
        let max_q = a.iter().chain(&b).map(|t| t.2.len()).max().unwrap_or(0);
        let coeff = |t: &[(f64, Vec<Vec<f64>>, Vec<Vec<f64>>)], p: usize, q: usize, i: usize, j: usize| {
            t.iter()
                .filter(|(_, x, y)| p < x.len() && q < y.len())
                .map(|(c, x, y)| c * x[p][i] * y[q][j])
                .sum::<f64>()
        };
        let mut worst: f64 = 0.0;
        for p in 0..max_p {
            for q in 0..max_q {
                for i in 0..px.len() {
                    for j in 0..py.len() {
                        let u = coeff(&a, p, q, i, j);
                        let v = coeff(&b, p, q, i, j);
                        worst = worst.max((u - v).abs() / (1.0 + u.abs().max(v.abs())));
                    }
                }
            }
        }
        Ok(worst)
    }

    pub fn discretize(&self, gx: &Grid, gy: &Grid) -> Result<DiscreteSeparable> {
        let terms = self
            .terms
            .iter()
            .map(|(c, x, y)| Ok((*c, x.discretize(gx)?, y.discretize(gy)?)))
            .collect::<Result<_>>()?;
        Ok(DiscreteSeparable { terms })
    }
}

pub struct DiscreteSeparable {
    terms: Vec<(f64, DiscreteChain, DiscreteChain)>,
}

impl DiscreteSeparable {
    pub fn apply(&self, s: &SeparableState) -> SeparableState {
        let mut terms = Vec::with_capacity(self.terms.len() * s.terms.len());
        for (c, dx, dy) in &self.terms {
            for (d, x, y) in &s.terms {
                terms.push((c * d, dx.apply_slice(x), dy.apply_slice(y)));
            }
        }
        SeparableState { gx: s.gx, gy: s.gy, terms }
    }
}

/// A planar grid function `Σ c · x ⊗ y`.
#[derive(Clone, Debug)]
pub struct SeparableState {
    pub gx: Grid,
    pub gy: Grid,
    pub terms: Vec<(f64, Vec<f64>, Vec<f64>)>,
}

/// Interior rows of the axis vectors, weighted by `√h`.
fn weighted_columns(g: &Grid, cols: &[&Vec<f64>]) -> DMatrix<f64> {
    let r = g.interior();
    let w = g.spacing().sqrt();
    DMatrix::from_fn(r.len(), cols.len(), |i, k| cols[k][r.start + i] * w)
}

fn interior_dot(g: &Grid, a: &[f64], b: &[f64]) -> f64 {
    let r = g.interior();
    a[r.clone()].iter().zip(&b[r]).map(|(u, v)| u * v).sum::<f64>() * g.spacing()
}

impl SeparableState {
    pub fn product(gx: Grid, gy: Grid, x: Vec<f64>, y: Vec<f64>) -> Self {
        Self { gx, gy, terms: vec![(1.0, x, y)] }
    }

    pub fn plus(mut self, other: SeparableState) -> Self {
        self.terms.extend(other.terms);
        self
    }

    pub fn scaled(mut self, s: f64) -> Self {
        self.terms.iter_mut().for_each(|t| t.0 *= s);
        self
    }

    /// Interior norm. Both axes are reduced by QR so that cancellation
    /// between terms is resolved at the level of the axis vectors rather
    /// than of squared norms.
    pub fn norm(&self) -> f64 {
        if self.terms.is_empty() {
            return 0.0;
        }
        let xs: Vec<&Vec<f64>> = self.terms.iter().map(|t| &t.1).collect();
        let ys: Vec<&Vec<f64>> = self.terms.iter().map(|t| &t.2).collect();
        let rx = weighted_columns(&self.gx, &xs).qr().r();
        let ry = weighted_columns(&self.gy, &ys).qr().r();
        let c = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            self.terms.len(),
            self.terms.iter().map(|t| t.0),
        ));
        (rx * c * ry.transpose()).norm()
    }

    /// Interior inner product.
    pub fn dot(&self, other: &SeparableState) -> f64 {
        let mut acc = 0.0;
        for (c, x, y) in &self.terms {
            for (d, u, v) in &other.terms {
                acc += c * d * interior_dot(&self.gx, x, u) * interior_dot(&self.gy, y, v);
            }
        }
        acc
    }

    /// `⟨a ⊗ b, self⟩`.
    pub fn overlap(&self, a: &[f64], b: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, x, y)| c * interior_dot(&self.gx, a, x) * interior_dot(&self.gy, b, y))
            .sum()
    }
}

/// `K`, `I₁`, `I₂` for a resonant pair of ladders.
#[derive(Clone, Debug)]
pub struct IntegralTriple {
    pub hx: DiffOperator,
    pub hy: DiffOperator,
    pub k: SeparableOperator,
    pub i1: SeparableOperator,
    pub i2: SeparableOperator,
    /// `m·λx = n·λy`.
    pub lambda: f64,
    pub m: usize,
    pub n: usize,
    /// Measured `(order K, order I₁, order I₂)`.
    pub orders: (usize, usize, usize),
}

impl IntegralTriple {
    pub fn hamiltonian(&self) -> SeparableOperator {
        SeparableOperator::term(1.0, OperatorChain::single(self.hx.clone()), OperatorChain::identity())
            .plus(&SeparableOperator::term(
                1.0,
                OperatorChain::identity(),
                OperatorChain::single(self.hy.clone()),
            ))
    }

    /// `I₁† = -I₁` and `I₂† = I₂` at coefficient level.
    pub fn adjointness_defect(&self, px: &[f64], py: &[f64]) -> Result<(f64, f64)> {
        let d1 = self.i1.adjoint().distance_on(&self.i1.scaled(-1.0), px, py)?;
        let d2 = self.i2.adjoint().distance_on(&self.i2, px, py)?;
        Ok((d1, d2))
    }
}

pub fn build_triple(
    lx: &LadderPair,
    ly: &LadderPair,
    m: usize,
    n: usize,
    px: &[f64],
    py: &[f64],
) -> Result<IntegralTriple> {
    if !resonance(m, n, lx.lambda, ly.lambda)? {
        return Err(Error::Resonance(format!(
            "{m}·{} != {n}·{}",
            lx.lambda, ly.lambda
        )));
    }
    let up_x = lx.raise.power(m);
    let down_x = lx.lower.power(m);
    let up_y = ly.raise.power(n);
    let down_y = ly.lower.power(n);
    let a = SeparableOperator::term(1.0, up_x, down_y);
    let b = SeparableOperator::term(1.0, down_x, up_y);
    let i1 = a.clone().plus(&b.scaled(-1.0));
    let i2 = a.plus(&b);
    let k = SeparableOperator::term(1.0, OperatorChain::single(lx.hamiltonian.clone()), OperatorChain::identity())
        .plus(&SeparableOperator::term(
            -1.0,
            OperatorChain::identity(),
            OperatorChain::single(ly.hamiltonian.clone()),
        ));
    let orders = (
        k.measured_order(px, py)?,
        i1.measured_order(px, py)?,
        i2.measured_order(px, py)?,
    );
    Ok(IntegralTriple {
        hx: lx.hamiltonian.clone(),
        hy: ly.hamiltonian.clone(),
        k,
        i1,
        i2,
        lambda: m as f64 * lx.lambda,
        m,
        n,
        orders,
    })
}

/// Where `I₁` sends one product state, as overlaps with the members of its
/// multiplet.
#[derive(Clone, Debug, Serialize)]
pub struct MappingEntry {
    pub target: (usize, usize),
    /// `|⟨target, I₁ψ⟩| / ‖I₁ψ‖`.
    pub weight: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct StateCheck {
    pub index: (usize, usize),
    pub energy: f64,
    /// For `K`, `I₁`, `I₂`: the larger of the projected residual
    /// `√Σ (E_a + E_b - E)²|c_ab|² / ‖Iψ‖` over the computed product basis
    /// and the fraction of `‖Iψ‖` outside it; `None` if `Iψ` vanishes.
    pub residuals: [Option<f64>; 3],
    /// Direct `‖(H - E)Iψ‖/‖Iψ‖` with the discrete Hamiltonian.
    pub direct: [Option<f64>; 3],
    pub mapping: Vec<MappingEntry>,
    /// Fraction of `‖I₁ψ‖²` inside the multiplet.
    pub captured: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CommutationReport {
    pub states: Vec<StateCheck>,
    /// Worst residual for `K`, `I₁`, `I₂`.
    pub worst: [f64; 3],
    /// Worst direct residual for `K`, `I₁`, `I₂`.
    pub worst_direct: [f64; 3],
    pub annihilated: usize,
    /// Largest `‖Iψ‖/‖ψ‖` among products counted as annihilated.
    pub kernel_noise: f64,
}

impl CommutationReport {
    pub fn worst_overall(&self) -> f64 {
        self.worst.iter().cloned().fold(0.0, f64::max)
    }

    pub fn worst_direct_overall(&self) -> f64 {
        self.worst_direct.iter().cloned().fold(0.0, f64::max)
    }
}

/// Product states of the lowest multiplets, at most `count`, in energy order.
fn probe_states(
    sx: &SpectrumResult,
    sy: &SpectrumResult,
    count: usize,
    tol: Option<f64>,
) -> Result<Vec<(usize, usize, usize)>> {
    let multiplets = separable_2d(sx, sy, tol)?;
    for w in multiplets.windows(2) {
        let t = tol.unwrap_or_else(|| default_degeneracy_tol(w[1].energy));
        if t > 0.0 && (w[1].energy - w[0].energy).abs() < 10.0 * t {
            return Err(Error::UnresolvedMultiplet(w[1].energy));
        }
    }
    let mut out = Vec::new();
    for (level, m) in multiplets.iter().enumerate() {
        for &(i, j) in &m.members {
            if out.len() == count {
                return Ok(out);
            }
            out.push((level, i, j));
        }
    }
    Ok(out)
}

fn residual_state(
    hx: &DiscreteChain,
    hy: &DiscreteChain,
    phi: &SeparableState,
    e: f64,
) -> SeparableState {
    let mut terms = Vec::with_capacity(3 * phi.terms.len());
    for (c, x, y) in &phi.terms {
        terms.push((*c, hx.apply_slice(x), y.clone()));
        terms.push((*c, x.clone(), hy.apply_slice(y)));
        terms.push((-e * c, x.clone(), y.clone()));
    }
    SeparableState { gx: phi.gx, gy: phi.gy, terms }
}

/// Unnormalized projected residual, remainder norm and resolved norm of
/// `phi` against the product basis; the remainder is
/// `(1 - Px)⊗1 + Px⊗(1 - Py)` applied term by term.
fn projected_2d(sx: &SpectrumResult, sy: &SpectrumResult, phi: &SeparableState, e: f64) -> (f64, f64, f64) {
    let xs: Vec<(Vec<f64>, Vec<f64>)> = phi.terms.iter().map(|t| project(sx, &t.1)).collect();
    let ys: Vec<(Vec<f64>, Vec<f64>)> = phi.terms.iter().map(|t| project(sy, &t.2)).collect();
    let (mut acc, mut resolved) = (0.0, 0.0);
    for (a, ea) in sx.energies.iter().enumerate() {
        for (b, eb) in sy.energies.iter().enumerate() {
            let c: f64 = phi.terms.iter().enumerate().map(|(k, t)| t.0 * xs[k].0[a] * ys[k].0[b]).sum::<f64>();
            acc += ((ea + eb - e) * c).powi(2);
            resolved += c * c;
        }
    }
    let mut rest = SeparableState { gx: phi.gx, gy: phi.gy, terms: Vec::new() };
    for (k, t) in phi.terms.iter().enumerate() {
        let px: Vec<f64> = t.1.iter().zip(&xs[k].1).map(|(v, r)| v - r).collect();
        rest.terms.push((t.0, xs[k].1.clone(), t.2.clone()));
        rest.terms.push((t.0, px, ys[k].1.clone()));
    }
    (acc.sqrt(), rest.norm(), resolved.sqrt())
}

/// Checks `[H, I] = 0` for `I ∈ {K, I₁, I₂}` on the lowest `count` product
/// eigenstates.
pub fn verify_commutation(
    t: &IntegralTriple,
    sx: &SpectrumResult,
    sy: &SpectrumResult,
    count: usize,
    tol: Option<f64>,
) -> Result<CommutationReport> {
    let (gx, gy) = (sx.grid, sy.grid);
    let hx = OperatorChain::single(t.hx.clone()).discretize(&gx)?;
    let hy = OperatorChain::single(t.hy.clone()).discretize(&gy)?;
    let ops = [t.k.discretize(&gx, &gy)?, t.i1.discretize(&gx, &gy)?, t.i2.discretize(&gx, &gy)?];
    let multiplets = separable_2d(sx, sy, tol)?;
    let probes = probe_states(sx, sy, count, tol)?;
    let mut report =
        CommutationReport { states: Vec::new(), worst: [0.0; 3], worst_direct: [0.0; 3], annihilated: 0, kernel_noise: 0.0 };
    for (level, i, j) in probes {
        let psi = SeparableState::product(gx, gy, sx.states[i].values.clone(), sy.states[j].values.clone());
        let pn = psi.norm();
        let e = sx.energies[i] + sy.energies[j];
        let mut check = StateCheck {
            index: (i, j),
            energy: e,
            residuals: [None; 3],
            direct: [None; 3],
            mapping: Vec::new(),
            captured: None,
        };
        for (slot, op) in ops.iter().enumerate() {
            let phi = op.apply(&psi);
            let nphi = phi.norm();
            let (proj, rest, resolved) = projected_2d(sx, sy, &phi, e);
            if resolved / pn < KERNEL_TOL {
                report.annihilated += 1;
                report.kernel_noise = report.kernel_noise.max(nphi / pn);
                continue;
            }
            let direct = residual_state(&hx, &hy, &phi, e).norm() / nphi;
            let r = (proj / nphi).max(rest / nphi);
            check.residuals[slot] = Some(r);
            check.direct[slot] = Some(direct);
            report.worst[slot] = report.worst[slot].max(r);
            report.worst_direct[slot] = report.worst_direct[slot].max(direct);
            if slot == 1 {
                let mut captured = 0.0;
                for &(a, b) in &multiplets[level].members {
                    let w = phi.overlap(&sx.states[a].values, &sy.states[b].values).abs() / nphi;
                    captured += w * w;
                    if w > 1e-3 {
                        check.mapping.push(MappingEntry { target: (a, b), weight: w });
                    }
                }
                check.captured = Some(captured);
            }
        }
        report.states.push(check);
    }
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct BracketReport {
    /// Least-squares `c` in `[K, I₁]ψ ≈ c·I₂ψ` over the probe states.
    pub constant: f64,
    pub expected: f64,
    /// Worst `‖[K, I₁]ψ - c·I₂ψ‖ / ‖I₂ψ‖` with the expected `c`.
    pub worst_defect: f64,
}

/// Measures the constant in `[K, I₁] = c·I₂` on the lowest `count`
/// product eigenstates; `c = 2λ` for `m = n = 1`.
pub fn verify_i2_bracket(
    t: &IntegralTriple,
    sx: &SpectrumResult,
    sy: &SpectrumResult,
    count: usize,
) -> Result<BracketReport> {
    if t.m != 1 || t.n != 1 {
        return Err(Error::InvalidParameter(format!(
            "bracket check needs m = n = 1, got ({}, {})",
            t.m, t.n
        )));
    }
    let (gx, gy) = (sx.grid, sy.grid);
    let bracket = t.k.commutator(&t.i1).discretize(&gx, &gy)?;
    let i2 = t.i2.discretize(&gx, &gy)?;
    let expected = 2.0 * t.lambda;
    let (mut num, mut den, mut worst) = (0.0, 0.0, 0.0f64);
    for (_, i, j) in probe_states(sx, sy, count, None)? {
        let psi = SeparableState::product(gx, gy, sx.states[i].values.clone(), sy.states[j].values.clone());
        let b = bracket.apply(&psi);
        let v = i2.apply(&psi);
        let nv = v.norm();
        if nv / psi.norm() < KERNEL_TOL {
            continue;
        }
        num += b.dot(&v);
        den += v.dot(&v);
        let diff = b.plus(v.scaled(-expected));
        worst = worst.max(diff.norm() / nv);
    }
    if den == 0.0 {
        return Err(Error::Convergence("I₂ annihilates every probe state".into()));
    }
    Ok(BracketReport { constant: num / den, expected, worst_defect: worst })
}

/// Gram-matrix proxy for functional independence of `{H, K, I₁}`: the
/// operators' matrix elements between probe states, normalized, have a
/// 3×3 Gram matrix whose smallest singular value is returned.
pub fn independence_proxy(
    t: &IntegralTriple,
    sx: &SpectrumResult,
    sy: &SpectrumResult,
    count: usize,
) -> Result<f64> {
    let (gx, gy) = (sx.grid, sy.grid);
    let states: Vec<(usize, usize)> =
        probe_states(sx, sy, count, None)?.into_iter().map(|(_, i, j)| (i, j)).collect();
    let ops = [t.hamiltonian().discretize(&gx, &gy)?, t.k.discretize(&gx, &gy)?, t.i1.discretize(&gx, &gy)?];
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for op in &ops {
        let mut v = Vec::with_capacity(states.len() * states.len());
        for &(i, j) in &states {
            let psi = SeparableState::product(gx, gy, sx.states[i].values.clone(), sy.states[j].values.clone());
            let phi = op.apply(&psi);
            for &(a, b) in &states {
                v.push(phi.overlap(&sx.states[a].values, &sy.states[b].values));
            }
        }
        let nrm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if nrm > 0.0 {
            v.iter_mut().for_each(|a| *a /= nrm);
        }
        rows.push(v);
    }
    let gram: DMatrix<f64> = DMatrix::from_fn(3, 3, |a, b| rows[a].iter().zip(&rows[b]).map(|(u, v)| u * v).sum::<f64>());
    let sv = gram.singular_values();
    Ok(sv.iter().cloned().fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;
    use crate::schrodinger::{eigensolve, hamiltonian};
    use crate::susy::{oscillator_ladder, probe_points, FRAC_1_SQRT_2};

    fn osc(omega: f64) -> (Grid, LadderPair, SpectrumResult) {
        let g = Grid::symmetric(10.0, 801).unwrap();
        let x = Expr::x();
        let h = hamiltonian(&(&x * &x * (0.5 * omega * omega)));
        let s = eigensolve(&h, &g, 10).unwrap();
        (g, oscillator_ladder(omega, FRAC_1_SQRT_2, h), s)
    }

    #[test]
    fn resonance_examples() {
        assert!(resonance(1, 1, 1.0, 1.0).unwrap());
        assert!(resonance(2, 1, 1.0, 2.0).unwrap());
        assert!(!resonance(1, 2, 1.0, 1.0).unwrap());
        assert!(resonance(0, 1, 1.0, 1.0).is_err());
        assert!(resonance(1, 1, -1.0, 1.0).is_err());
        assert_eq!(find_resonance(1.0, 2.0, 4).unwrap(), Some((2, 1)));
    }

    #[test]
    fn oscillator_triple() {
        let (g, l, s) = osc(1.0);
        let p = probe_points(&g, 7);
        let t = build_triple(&l, &l, 1, 1, &p, &p).unwrap();
        assert_eq!(t.orders, (2, 2, 2));
        let (d1, d2) = t.adjointness_defect(&p, &p).unwrap();
        assert!(d1 < 1e-12 && d2 < 1e-12);
        let r = verify_commutation(&t, &s, &s, 20, None).unwrap();
        assert!(r.worst_overall() < 1e-8, "{:?}", r.worst);
        for st in &r.states {
            if let Some(c) = st.captured {
                assert!(c > 1.0 - 1e-6);
            }
        }
        let b = verify_i2_bracket(&t, &s, &s, 20).unwrap();
        assert!((b.constant - 2.0).abs() < 1e-8, "{}", b.constant);
        assert!(independence_proxy(&t, &s, &s, 10).unwrap() > 1e-8);
    }

    #[test]
    fn bracket_scales_with_lambda() {
        let (g, l, s) = osc(0.5);
        let p = probe_points(&g, 7);
        let t = build_triple(&l, &l, 1, 1, &p, &p).unwrap();
        let b = verify_i2_bracket(&t, &s, &s, 10).unwrap();
        assert!((b.constant - 1.0).abs() < 1e-7, "{}", b.constant);
    }

    #[test]
    fn non_resonant_pair_rejected() {
        let (g, l, _) = osc(1.0);
        let p = probe_points(&g, 7);
        assert!(matches!(build_triple(&l, &l, 1, 2, &p, &p), Err(Error::Resonance(_))));
    }

    #[test]
    fn unresolved_product_norm_cancels_exactly() {
        let g = Grid::symmetric(5.0, 64).unwrap();
        let v: Vec<f64> = g.points().iter().map(|x| (-x * x).exp()).collect();
        let s = SeparableState::product(g, g, v.clone(), v.clone())
            .plus(SeparableState::product(g, g, v.clone(), v).scaled(-1.0));
        assert!(s.norm() < 1e-14);
    }
}
