//! First-order factorizations, one-parameter Riccati families, and ladder
//! operators dressed by intertwiners.

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::grid::{cumulative_integral, Grid, GridFunction};
use crate::operator::{DiffOperator, DiscreteOperator, OperatorChain};
use crate::schrodinger::SpectrumResult;

pub const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Tolerance for coefficient-level identities checked on probe points.
pub const IDENTITY_TOL: f64 = 1e-8;
/// Energies below this are candidates for a supersymmetric zero mode.
pub const ZERO_ENERGY_TOL: f64 = 1e-6;
/// `‖Aψ‖/‖ψ‖` below this counts as annihilated.
pub const KERNEL_TOL: f64 = 1e-5;

/// Interior sample points used for coefficient-level checks.
pub fn probe_points(grid: &Grid, count: usize) -> Vec<f64> {
    let r = grid.interior();
    let (a, b) = (grid.x(r.start), grid.x(r.end - 1));
    // Irrational offsets keep probes off symmetry points and grid nodes.
    (0..count)
        .map(|i| a + (b - a) * ((i as f64 + 0.5) / count as f64 + 0.013_7 * (i as f64).sin()))
        .map(|x| x.clamp(a, b))
        .collect()
}

/// `A = (∂ + W)/√2`, `A† = (-∂ + W)/√2`, `H₁ = A†A`, `H₂ = AA†`.
#[derive(Clone, Debug)]
pub struct FactorizationPair {
    pub w: Expr,
    pub a: DiffOperator,
    pub a_dag: DiffOperator,
    pub h1: DiffOperator,
    pub h2: DiffOperator,
    /// `(W² - W')/2`.
    pub v1: Expr,
    /// `(W² + W')/2`.
    pub v2: Expr,
    /// Neither `e^{-∫W}` nor `e^{+∫W}` is normalizable on the box.
    pub broken: bool,
}

/// Which of the factors annihilates a normalizable state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroModeSide {
    /// `Aψ = 0`, a zero mode of `H₁`.
    H1,
    /// `A†ψ = 0`, a zero mode of `H₂`.
    H2,
}

fn normalizable(log_psi: &GridFunction) -> bool {
    let v = &log_psi.values;
    let peak = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let n = v.len();
    // Both ends at least e^{-20} below the peak and still decreasing outwards.
    v[0] < peak - 20.0 && v[n - 1] < peak - 20.0 && v[0] < v[1] && v[n - 1] < v[n - 2]
}

fn zero_mode_log(w: &Expr, grid: &Grid, side: ZeroModeSide) -> Result<GridFunction> {
    let anchor = 0.0f64.clamp(grid.x_min(), grid.x_max());
    let mut f = cumulative_integral(w, anchor, grid)?;
    if side == ZeroModeSide::H1 {
        f.scale(-1.0);
    }
    Ok(f)
}

impl FactorizationPair {
    pub fn first_order(sign: f64, w: &Expr) -> DiffOperator {
        DiffOperator::first_order(sign, w, FRAC_1_SQRT_2)
    }

    /// Side of the normalizable zero mode, if one exists on `grid`.
    pub fn zero_mode_side(&self, grid: &Grid) -> Result<Option<ZeroModeSide>> {
        for side in [ZeroModeSide::H1, ZeroModeSide::H2] {
            if normalizable(&zero_mode_log(&self.w, grid, side)?) {
                return Ok(Some(side));
            }
        }
        Ok(None)
    }

    /// Normalized zero mode `e^{∓∫W}` on the given side, if normalizable.
    pub fn zero_mode(&self, grid: &Grid, side: ZeroModeSide) -> Result<Option<GridFunction>> {
        let log = zero_mode_log(&self.w, grid, side)?;
        if !normalizable(&log) {
            return Ok(None);
        }
        let peak = log.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut psi = GridFunction {
            grid: *grid,
            values: log.values.iter().map(|l| (l - peak).exp()).collect(),
        };
        let n = psi.norm();
        psi.scale(1.0 / n);
        Ok(Some(psi))
    }
}

/// Builds the factorization pair of a superpotential finite on `grid`.
pub fn factorize(w: &Expr, grid: &Grid) -> Result<FactorizationPair> {
    w.sample(grid)?;
    let a = FactorizationPair::first_order(1.0, w);
    let a_dag = FactorizationPair::first_order(-1.0, w);
    let h1 = a_dag.compose(&a);
    let h2 = a.compose(&a_dag);
    let dw = w.diff();
    let w2 = w * w;
    let v1 = (&w2 - &dw) * 0.5;
    let v2 = (&w2 + &dw) * 0.5;
    let mut fp = FactorizationPair { w: w.clone(), a, a_dag, h1, h2, v1, v2, broken: false };
    fp.broken = fp.zero_mode_side(grid)?.is_none();
    Ok(fp)
}

/// Supercharge algebra on `H₁ ⊕ H₂`: `Q = [[0,0],[A,0]]`, `Q† = [[0,A†],[0,0]]`.
/// Returns the worst coefficient defect of `{Q,Q†} = diag(H₁, H₂)` and
/// `H₂A = AH₁`, `H₁A† = A†H₂`.
pub fn supercharge_defect(fp: &FactorizationPair, probes: &[f64]) -> Result<f64> {
    let h1 = DiffOperator::hamiltonian(&fp.v1);
    let h2 = DiffOperator::hamiltonian(&fp.v2);
    // {Q, Q†} is block diagonal with blocks A†A and AA†; Q² = 0 by shape.
    let d1 = fp.a_dag.compose(&fp.a).distance_on(&h1, probes)?;
    let d2 = fp.a.compose(&fp.a_dag).distance_on(&h2, probes)?;
    let i1 = h2.compose(&fp.a).distance_on(&fp.a.compose(&h1), probes)?;
    let i2 = h1.compose(&fp.a_dag).distance_on(&fp.a_dag.compose(&h2), probes)?;
    Ok(d1.max(d2).max(i1).max(i2))
}

/// `|E| < 1e-6` and `‖Aψ‖/‖ψ‖ < 1e-5`.
pub fn is_zero_mode(energy: f64, psi: &GridFunction, a: &DiffOperator) -> Result<bool> {
    if energy.abs() >= ZERO_ENERGY_TOL {
        return Ok(false);
    }
    let apsi = a.apply(psi)?;
    Ok(apsi.interior_norm() / psi.interior_norm() < KERNEL_TOL)
}

/// Largest mismatch between two spectra after removing the zero mode of
/// the first: `E^{(with)}_{n+1}` vs `E^{(without)}_n`.
pub fn isospectral_defect(with_zero: &SpectrumResult, without: &SpectrumResult) -> f64 {
    with_zero
        .energies
        .iter()
        .skip(1)
        .zip(&without.energies)
        .map(|(a, b)| (a - b).abs() / (1.0 + b.abs()))
        .fold(0.0, f64::max)
}

/// General solution `β = β₀ + 1/z` of `β' + β² = U` built from a
/// particular solution `β₀`, with
/// `z = e^{∫₀ˣ2β₀} (γ + ∫₀ˣ e^{-∫₀ᵗ2β₀})`, so that `-z' + 2β₀z + 1 = 0`.
#[derive(Clone, Debug)]
pub struct RiccatiSolution {
    pub u: Expr,
    pub beta0: Expr,
    pub gamma: f64,
    /// `∫₀ˣ 2β₀`.
    pub exponent: Expr,
    pub z: Expr,
    pub phi: Expr,
    pub beta: Expr,
}

impl RiccatiSolution {
    /// Sup over the interior of `|β' + β² - U| / (1 + |U|)`.
    pub fn residual(&self, grid: &Grid) -> Result<f64> {
        let r = self.beta.diff() + &self.beta * &self.beta - &self.u;
        sup_relative(&r, &self.u, grid)
    }

    /// Sup over the interior of `|-z' + 2β₀z + 1|` relative to the terms.
    pub fn z_residual(&self, grid: &Grid) -> Result<f64> {
        let pts: Vec<f64> = grid.interior().map(|i| grid.x(i)).collect();
        let dz = self.z.diff().eval_many(&pts)?;
        let bz = (&self.beta0 * &self.z * 2.0).eval_many(&pts)?;
        Ok(dz
            .iter()
            .zip(&bz)
            .map(|(d, b)| (-d + b + 1.0).abs() / (1.0 + d.abs() + b.abs()))
            .fold(0.0, f64::max))
    }
}

fn sup_relative(r: &Expr, scale: &Expr, grid: &Grid) -> Result<f64> {
    let pts: Vec<f64> = grid.interior().map(|i| grid.x(i)).collect();
    let rv = r.eval_many(&pts)?;
    let sv = scale.eval_many(&pts)?;
    Ok(rv.iter().zip(&sv).map(|(r, s)| r.abs() / (1.0 + s.abs())).fold(0.0, f64::max))
}

/// Table range used for antiderivatives supporting checks on `grid`.
pub fn table_domain(grid: &Grid) -> (f64, f64) {
    ((grid.x_min() - 1.0).min(-1.0), (grid.x_max() + 1.0).max(1.0))
}

/// Builds the one-parameter family and rejects values of `γ` for which `z`
/// vanishes on the verification box or at its edges.
pub fn riccati_family(u: &Expr, beta0: &Expr, gamma: f64, grid: &Grid) -> Result<RiccatiSolution> {
    if !gamma.is_finite() {
        return Err(Error::InvalidParameter(format!("gamma must be finite, got {gamma}")));
    }
    let particular = beta0.diff() + beta0 * beta0 - u;
    let r = sup_relative(&particular, u, grid)?;
    if r > IDENTITY_TOL {
        return Err(Error::ParticularSolution(r));
    }
    let (lo, hi) = table_domain(grid);
    let exponent = Expr::integral(&beta0.scale(2.0), 0.0, lo, hi)?;
    let c = Expr::integral(&(-&exponent).exp(), 0.0, lo, hi)?;
    let shifted = &c + gamma;
    check_sign(&shifted, gamma, &c, grid)?;
    let z = exponent.exp() * &shifted;
    let phi = z.recip();
    let beta = beta0 + &phi;
    Ok(RiccatiSolution { u: u.clone(), beta0: beta0.clone(), gamma, exponent, z, phi, beta })
}

/// Sign-scan of `γ + C(x)` over the grid; a change of sign or a value
/// indistinguishable from zero at the edges makes the family singular.
fn check_sign(shifted: &Expr, gamma: f64, c: &Expr, grid: &Grid) -> Result<()> {
    let xs = grid.points();
    let v = shifted.eval_many(&xs)?;
    let cv = c.eval_many(&xs)?;
    let scale = gamma.abs() + cv.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    for i in 0..v.len() {
        if v[i] == 0.0 {
            return Err(Error::SingularFamily { x: xs[i] });
        }
        if i + 1 < v.len() && v[i].signum() != v[i + 1].signum() {
            let (mut a, mut b) = (xs[i], xs[i + 1]);
            let fa = v[i];
            for _ in 0..60 {
                let m = 0.5 * (a + b);
                let fm = shifted.eval(m)?;
                if fm.signum() == fa.signum() {
                    a = m;
                } else {
                    b = m;
                }
            }
            return Err(Error::SingularFamily { x: 0.5 * (a + b) });
        }
    }
    for &i in &[0, v.len() - 1] {
        if v[i].abs() <= 1e-10 * scale {
            return Err(Error::SingularFamily { x: xs[i] });
        }
    }
    Ok(())
}

/// The partner obtained by refactorizing `H₂ = bb†` with `b = (∂ + β)/√2`:
/// `H' = b†b = H₂ - β'`.
#[derive(Clone, Debug)]
pub struct MielnikPartner {
    pub riccati: RiccatiSolution,
    pub b: DiffOperator,
    pub b_dag: DiffOperator,
    pub hamiltonian: DiffOperator,
    /// `(β² - β')/2`.
    pub potential: Expr,
}

pub fn mielnik_partner(
    fp: &FactorizationPair,
    rs: &RiccatiSolution,
    grid: &Grid,
) -> Result<MielnikPartner> {
    let two_v2 = fp.v2.scale(2.0);
    let probes = probe_points(grid, 23);
    let d = sup_abs_relative(&rs.u, &two_v2, &probes)?;
    if d > IDENTITY_TOL {
        return Err(Error::Inconsistent(format!(
            "Riccati right-hand side differs from 2·V₂ (defect {d:e})"
        )));
    }
    let b = FactorizationPair::first_order(1.0, &rs.beta);
    let b_dag = FactorizationPair::first_order(-1.0, &rs.beta);
    let potential = (&rs.beta * &rs.beta - rs.beta.diff()) * 0.5;
    let hamiltonian = DiffOperator::hamiltonian(&potential);
    Ok(MielnikPartner { riccati: rs.clone(), b, b_dag, hamiltonian, potential })
}

fn sup_abs_relative(a: &Expr, b: &Expr, probes: &[f64]) -> Result<f64> {
    let av = a.eval_many(probes)?;
    let bv = b.eval_many(probes)?;
    Ok(av
        .iter()
        .zip(&bv)
        .map(|(a, b)| (a - b).abs() / (1.0 + a.abs().max(b.abs())))
        .fold(0.0, f64::max))
}

/// Raising and lowering operators with `[H, raise] = λ·raise`,
/// `[H, lower] = -λ·lower`, kept as factor chains.
#[derive(Clone, Debug)]
pub struct LadderPair {
    pub raise: OperatorChain,
    pub lower: OperatorChain,
    pub lambda: f64,
    pub hamiltonian: DiffOperator,
}

/// Result of testing a ladder on computed eigenstates.
///
/// Two measures are kept. The direct residual `‖(H - E ∓ λ)φ‖/‖φ‖` with
/// `φ = a†ψ` (or `aψ`) applies the discrete operators to `φ`; for
/// high-order chains on fine grids it is dominated by round-off in `ψ`
/// amplified by the stencils. The projected residual expands `φ` in the
/// computed eigenbasis, `√Σ (E_j - E ∓ λ)²c_j² / ‖φ‖`, and `leak` is the
/// fraction of `‖φ‖` outside that basis; both vanish exactly for a true
/// ladder and neither sees noise above the resolved window.
#[derive(Debug, Clone, Default)]
pub struct LadderResidual {
    /// `max(projected, leak)` over the tested states.
    pub worst: f64,
    pub projected: f64,
    pub leak: f64,
    /// Worst direct residual.
    pub direct: f64,
    /// Largest `‖φ‖/‖ψ‖` among states counted as annihilated.
    pub kernel_noise: f64,
    /// Indices of states annihilated by the lowering operator.
    pub lowered_to_zero: Vec<usize>,
    /// Indices of states annihilated by the raising operator.
    pub raised_to_zero: Vec<usize>,
}

/// Unnormalized `(√Σ (E_j - e)²c_j², ‖remainder‖, √Σ c_j²)` of `phi`.
pub(crate) fn projected_parts(spec: &SpectrumResult, phi: &[f64], e: f64) -> (f64, f64, f64) {
    let (coeffs, rest) = project(spec, phi);
    let acc: f64 = coeffs.iter().zip(&spec.energies).map(|(c, ej)| ((ej - e) * c).powi(2)).sum();
    let resolved: f64 = coeffs.iter().map(|c| c * c).sum();
    (acc.sqrt(), interior(&spec.grid, &rest), resolved.sqrt())
}

/// Coefficients `⟨ψ_j, v⟩` and the remainder `v - Σ c_j ψ_j`.
pub(crate) fn project(spec: &SpectrumResult, v: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut rest = v.to_vec();
    let coeffs = spec
        .states
        .iter()
        .map(|psi| {
            let c = interior_dot(&spec.grid, &psi.values, v);
            rest.iter_mut().zip(&psi.values).for_each(|(r, p)| *r -= c * p);
            c
        })
        .collect();
    (coeffs, rest)
}

impl LadderPair {
    pub fn new(raise: OperatorChain, lower: OperatorChain, lambda: f64, h: DiffOperator) -> Self {
        Self { raise, lower, lambda, hamiltonian: h }
    }

    /// Order of the expanded raising operator after pruning on probes.
    pub fn order(&self, probes: &[f64]) -> Result<usize> {
        self.raise.expand().measured_order(probes)
    }

    /// Coefficient-level defect of `[H, a†] = λa†` on probe points,
    /// relative to the size of `λa†`.
    pub fn commutator_defect(&self, probes: &[f64]) -> Result<f64> {
        let up = self.raise.expand();
        let lhs = self.hamiltonian.commutator(&up);
        let rhs = up.scale(self.lambda);
        lhs.distance_on(&rhs, probes)
    }

    /// Tests the ladder relations on the first `count` eigenstates. States
    /// whose raised energy lies above the computed spectrum are skipped.
    pub fn spectral_residual(&self, spec: &SpectrumResult, count: usize) -> Result<LadderResidual> {
        let grid = spec.grid;
        let h = self.hamiltonian.discretize(&grid)?;
        let up = self.raise.discretize(&grid)?;
        let down = self.lower.discretize(&grid)?;
        let top = spec.energies.last().copied().unwrap_or(f64::NEG_INFINITY);
        let mut out = LadderResidual::default();
        for n in 0..count.min(spec.len()) {
            let psi = &spec.states[n];
            let e = spec.energies[n];
            let pn = psi.interior_norm();
            for (chain, shift, raising) in [(&up, self.lambda, true), (&down, -self.lambda, false)] {
                if raising && e + shift > top + 1e-6 * (1.0 + top.abs()) {
                    continue;
                }
                let phi = chain.apply_slice(&psi.values);
                let norm = interior(&grid, &phi);
                let (proj, rest, resolved) = projected_parts(spec, &phi, e + shift);
                // Annihilation is judged on the resolved part; what remains
                // is amplified round-off.
                if resolved / pn < KERNEL_TOL {
                    if raising {
                        out.raised_to_zero.push(n);
                    } else {
                        out.lowered_to_zero.push(n);
                    }
                    out.kernel_noise = out.kernel_noise.max(norm / pn);
                    continue;
                }
                let direct = residual_of(&h, &grid, &phi, e + shift) / norm;
                out.direct = out.direct.max(direct);
                out.projected = out.projected.max(proj / norm);
                out.leak = out.leak.max(rest / norm);
            }
        }
        out.worst = out.projected.max(out.leak);
        Ok(out)
    }
}

fn interior_dot(grid: &Grid, a: &[f64], b: &[f64]) -> f64 {
    let r = grid.interior();
    a[r.clone()].iter().zip(&b[r]).map(|(u, v)| u * v).sum::<f64>() * grid.spacing()
}

fn interior(grid: &Grid, v: &[f64]) -> f64 {
    let h = grid.spacing();
    (v[grid.interior()].iter().map(|a| a * a).sum::<f64>() * h).sqrt()
}

/// `‖(H - e)φ‖` on the interior.
pub(crate) fn residual_of(h: &DiscreteOperator, grid: &Grid, phi: &[f64], e: f64) -> f64 {
    let hphi = h.apply_slice(phi);
    let r: Vec<f64> = hphi.iter().zip(phi).map(|(a, b)| a - e * b).collect();
    interior(grid, &r)
}

/// Harmonic ladder `a† = s(-∂ + ωx)`, `a = s(∂ + ωx)` for `h` with `λ = ω`.
pub fn oscillator_ladder(omega: f64, scale: f64, h: DiffOperator) -> LadderPair {
    let w = Expr::x().scale(omega);
    LadderPair::new(
        OperatorChain::single(DiffOperator::first_order(-1.0, &w, scale)),
        OperatorChain::single(DiffOperator::first_order(1.0, &w, scale)),
        omega,
        h,
    )
}

/// `O† a† O` and `O† a O` for an intertwiner with `O O† = H_inner`; the
/// result ladders `O†O` with the same `λ`.
pub fn dressed_ladder(
    o: &DiffOperator,
    o_dag: &DiffOperator,
    inner: &LadderPair,
    probes: &[f64],
) -> Result<LadderPair> {
    let d = o.compose(o_dag).distance_on(&inner.hamiltonian, probes)?;
    if d > IDENTITY_TOL {
        return Err(Error::Inconsistent(format!(
            "inner ladder acts on a different Hamiltonian than O·O† (defect {d:e})"
        )));
    }
    let c = inner.commutator_defect(probes)?;
    if c > 1e-6 {
        return Err(Error::LadderCheck(c));
    }
    Ok(conjugate(o_dag, inner, o, o_dag.compose(o)))
}

/// `left · inner · right` without any consistency checks; used to study
/// orientations that are not guaranteed to work.
pub fn conjugate(
    left: &DiffOperator,
    inner: &LadderPair,
    right: &DiffOperator,
    h: DiffOperator,
) -> LadderPair {
    let l = OperatorChain::single(left.clone());
    let r = OperatorChain::single(right.clone());
    LadderPair::new(
        l.then(&inner.raise).then(&r),
        l.then(&inner.lower).then(&r),
        inner.lambda,
        h,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schrodinger::eigensolve;

    fn grid() -> Grid {
        Grid::symmetric(10.0, 801).unwrap()
    }

    #[test]
    fn oscillator_superpotential_partners() {
        let fp = factorize(&Expr::x(), &grid()).unwrap();
        let p = probe_points(&grid(), 9);
        let v1 = (Expr::x() * Expr::x() - 1.0) * 0.5;
        assert!(fp.v1.approx_eq_on(&v1, &p, 1e-14).unwrap());
        assert!(!fp.broken);
        assert_eq!(fp.zero_mode_side(&grid()).unwrap(), Some(ZeroModeSide::H1));
        assert!(supercharge_defect(&fp, &p).unwrap() < 1e-12);
    }

    #[test]
    fn constant_superpotential_breaks_susy() {
        let fp = factorize(&Expr::constant(1.0), &grid()).unwrap();
        assert!(fp.broken);
    }

    #[test]
    fn ground_state_is_zero_mode() {
        let g = grid();
        let fp = factorize(&Expr::x(), &g).unwrap();
        let s = eigensolve(&fp.h1, &g, 3).unwrap();
        assert!(s.energies[0].abs() < 1e-9);
        assert!(is_zero_mode(s.energies[0], &s.states[0], &fp.a).unwrap());
        assert!(!is_zero_mode(s.energies[1], &s.states[1], &fp.a).unwrap());
        let psi0 = fp.zero_mode(&g, ZeroModeSide::H1).unwrap().unwrap();
        let ov = crate::grid::inner_product(&psi0, &s.states[0]).unwrap();
        assert!((ov.abs() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn singular_gamma_rejected() {
        let g = grid();
        let x = Expr::x();
        let u = &x * &x + 1.0;
        let err = riccati_family(&u, &x, 0.5, &g).unwrap_err();
        match err {
            Error::SingularFamily { x } => {
                // γ + (√π/2) erf(x) = 0.
                let want = -0.5 / (std::f64::consts::PI.sqrt() / 2.0);
                assert!((libm::erf(x) - want).abs() < 1e-8, "{x}");
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn wrong_particular_solution_rejected() {
        let x = Expr::x();
        let u = &x * &x;
        assert!(matches!(
            riccati_family(&u, &x, 2.0, &grid()),
            Err(Error::ParticularSolution(_))
        ));
    }
}
