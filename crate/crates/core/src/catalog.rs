//! Closed-form potentials: the oscillator and its Mielnik family, the
//! erf family built on the oscillator of frequency 1/(2a₀²), and the
//! potentials parametrized by Painlevé IV transcendents.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::grid::Grid;
use crate::painleve::P4Solution;
use crate::susy::{factorize, mielnik_partner, riccati_family, MielnikPartner};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Harmonic,
    Mielnik,
    ErfS1,
    ErfS2,
    ErfGamma,
    P4G1,
    P4Susy,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::Harmonic,
        Family::Mielnik,
        Family::ErfS1,
        Family::ErfS2,
        Family::ErfGamma,
        Family::P4G1,
        Family::P4Susy,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Family::Harmonic => "harmonic",
            Family::Mielnik => "mielnik",
            Family::ErfS1 => "erf_s1",
            Family::ErfS2 => "erf_s2",
            Family::ErfGamma => "erf_gamma",
            Family::P4G1 => "p4_g1",
            Family::P4Susy => "p4_susy",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == s)
    }
}

/// Parameters of a catalog potential. Unused fields are ignored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub family: Family,
    pub omega: f64,
    /// Family parameter; `f64::INFINITY` selects the `φ → 0` limit where
    /// that exists. For the erf family this is the coefficient of the
    /// closed-form `z`, i.e. `z(0) = a₀⁴γ`.
    pub gamma: f64,
    pub a0: f64,
    pub alpha_p4: f64,
    pub beta_p4: f64,
    pub eps: i8,
}

impl PotentialSpec {
    pub fn new(family: Family) -> Self {
        Self { family, omega: 1.0, gamma: 1.5, a0: 1.0, alpha_p4: 0.0, beta_p4: -2.0, eps: 1 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(Error::InvalidParameter(format!("omega must be > 0, got {}", self.omega)));
        }
        if matches!(self.family, Family::ErfS1 | Family::ErfS2 | Family::ErfGamma)
            && !(self.a0 > 0.0 && self.a0.is_finite())
        {
            return Err(Error::InvalidParameter(format!("a0 must be > 0, got {}", self.a0)));
        }
        if self.eps != 1 && self.eps != -1 {
            return Err(Error::InvalidParameter(format!("eps must be ±1, got {}", self.eps)));
        }
        if self.gamma.is_nan() || !(self.alpha_p4.is_finite() && self.beta_p4.is_finite()) {
            return Err(Error::InvalidParameter("parameters must be finite".into()));
        }
        Ok(())
    }
}

/// Potential of a catalog family, checked on `grid` (singular γ, domains).
pub fn build(spec: &PotentialSpec, grid: &Grid) -> Result<Expr> {
    spec.validate()?;
    let x = Expr::x();
    let w = spec.omega;
    match spec.family {
        Family::Harmonic => Ok(&x * &x * (0.5 * w * w)),
        Family::Mielnik => {
            if spec.gamma.is_infinite() {
                let fp = factorize(&x.scale(w), grid)?;
                return Ok(fp.v1);
            }
            Ok(mielnik(w, spec.gamma, grid)?.potential)
        }
        Family::ErfS1 => Ok(erf_vs1(spec.a0)),
        Family::ErfS2 => Ok(erf_vs2(spec.a0)),
        Family::ErfGamma => {
            if spec.gamma.is_infinite() {
                return Ok(erf_vs1(spec.a0));
            }
            Ok(erf_gamma(spec.a0, spec.gamma, grid)?.potential)
        }
        Family::P4G1 => {
            let sol = p4_solution_for(spec.alpha_p4, spec.beta_p4)?;
            p4_g1(w, spec.eps, spec.alpha_p4, &sol, grid)
        }
        Family::P4Susy => {
            let sol = p4_solution_for(spec.alpha_p4, spec.beta_p4)?;
            Ok(p4_susy(w, &sol, spec.gamma, grid)?.potential)
        }
    }
}

fn p4_solution_for(alpha: f64, beta: f64) -> Result<P4Solution> {
    crate::painleve::p4_rational(alpha, beta).ok_or_else(|| {
        Error::InvalidParameter(format!(
            "no closed-form Painleve IV solution for (alpha, beta) = ({alpha}, {beta}); \
             supply a numerical solution instead"
        ))
    })
}

/// Mielnik family of the oscillator of frequency `ω` with `W = ωx`:
/// `β = ωx + 1/z`, `z = e^{ωx²}(γ + ∫₀ˣ e^{-ωt²})`.
pub fn mielnik(omega: f64, gamma: f64, grid: &Grid) -> Result<MielnikPartner> {
    let w = Expr::x().scale(omega);
    let fp = factorize(&w, grid)?;
    let rs = riccati_family(&fp.v2.scale(2.0), &w, gamma, grid)?;
    mielnik_partner(&fp, &rs, grid)
}

/// Singular terms `1/(x-ia)² + 1/(x+ia)² = 2(x²-a²)/(x²+a²)²`.
fn erf_pair(a0: f64) -> Expr {
    let x = Expr::x();
    let a2 = a0 * a0;
    let q = &x * &x + a2;
    (&x * &x - a2) * q.powi(-2) * 2.0
}

/// Particular superpotential `β₀ = x/(2a₀²) + 1/(x-ia₀) + 1/(x+ia₀)`.
pub fn erf_beta0(a0: f64) -> Expr {
    let x = Expr::x();
    let a2 = a0 * a0;
    x.scale(1.0 / (2.0 * a2)) + &x * (&x * &x + a2).recip() * 2.0
}

/// `V_s1 = x²/(8a₀⁴) + 2(x²-a₀²)/(x²+a₀²)² + 3/(4a₀²)`.
pub fn erf_vs1(a0: f64) -> Expr {
    let x = Expr::x();
    let a2 = a0 * a0;
    &x * &x * (1.0 / (8.0 * a2 * a2)) + erf_pair(a0) + 3.0 / (4.0 * a2)
}

/// `V_s2 = x²/(8a₀⁴) + 5/(4a₀²)`, an oscillator of frequency `1/(2a₀²)`.
pub fn erf_vs2(a0: f64) -> Expr {
    let x = Expr::x();
    let a2 = a0 * a0;
    &x * &x * (1.0 / (8.0 * a2 * a2)) + 5.0 / (4.0 * a2)
}

/// Frequency of the oscillator hidden in the erf family.
pub fn erf_frequency(a0: f64) -> f64 {
    1.0 / (2.0 * a0 * a0)
}

/// Converts the closed-form coefficient γ into the value of `z(0)` used by
/// the quadrature construction.
pub fn erf_gamma_to_z0(a0: f64, gamma: f64) -> f64 {
    a0.powi(4) * gamma
}

/// `|γ|` must exceed this for the erf family to be regular on ℝ.
pub fn erf_gamma_threshold(a0: f64) -> f64 {
    (2.0 * std::f64::consts::PI).sqrt() / (4.0 * a0.powi(3))
}

/// Closed form of `z` for the erf family,
/// `z = e^{s}(a²+x²)²γ + (a²+x²)(2ax + c·e^{s}√(2π)(a²+x²) erf(x/(√2a)))/(4a³)`
/// with `s = x²/(2a²)` and `c` the erf convention constant (1 for the
/// standard normalization).
pub fn erf_z_closed_form(a0: f64, gamma: f64, convention: f64) -> Expr {
    let x = Expr::x();
    let a2 = a0 * a0;
    let q = &x * &x + a2;
    let es = (&x * &x * (1.0 / (2.0 * a2))).exp();
    let erf = (x.scale(1.0 / (std::f64::consts::SQRT_2 * a0))).erf();
    let inner = x.scale(2.0 * a0)
        + &es * &q * &erf * ((2.0 * std::f64::consts::PI).sqrt() * convention);
    &es * q.powi(2) * gamma + &q * inner * (1.0 / (4.0 * a0.powi(3)))
}

/// Least-squares value of the erf convention constant that makes the closed
/// form satisfy `-z' + 2β₀z + 1 = 0` at the probe points (the ODE is linear
/// in the constant).
pub fn calibrate_erf_convention(a0: f64, gamma: f64, probes: &[f64]) -> Result<f64> {
    let b0 = erf_beta0(a0);
    // Rows are scaled by the size of the cancelling terms so large-|x|
    // probes, where z grows like a Gaussian, do not dominate.
    let parts = |c: f64| -> Result<(Vec<f64>, Vec<f64>)> {
        let z = erf_z_closed_form(a0, gamma, c);
        let r = -z.diff() + &b0 * &z * 2.0 + 1.0;
        let size = (z.diff() + &b0 * &z * 2.0).eval_many(probes)?;
        Ok((r.eval_many(probes)?, size))
    };
    let (r0, _) = parts(0.0)?;
    let (r1, size) = parts(1.0)?;
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..probes.len() {
        let w = 1.0 / (1.0 + size[i].abs());
        let slope = (r1[i] - r0[i]) * w;
        num += r0[i] * w * slope;
        den += slope * slope;
    }
    Ok(-num / den)
}

/// The erf Mielnik family `H_γ = H_s1 - φ'` with `dd† = H_s2`.
pub fn erf_gamma(a0: f64, gamma: f64, grid: &Grid) -> Result<MielnikPartner> {
    let b0 = erf_beta0(a0);
    let fp = factorize(&b0, grid)?;
    let rs = riccati_family(&fp.v2.scale(2.0), &b0, erf_gamma_to_z0(a0, gamma), grid)?;
    mielnik_partner(&fp, &rs, grid)
}

fn check_p4_domain(omega: f64, sol: &P4Solution, grid: &Grid) -> Result<()> {
    let (lo, hi) = sol.domain();
    let s = omega.sqrt();
    let (a, b) = (s * grid.x_min(), s * grid.x_max());
    if a < lo || b > hi {
        return Err(Error::Domain {
            x: if a < lo { grid.x_min() } else { grid.x_max() },
            reason: format!("Painleve solution known on [{lo}, {hi}], box needs [{a}, {b}]"),
        });
    }
    Ok(())
}

/// `(f(√ω x), f'(√ω x))` as expressions in `x`.
fn p4_at(omega: f64, sol: &P4Solution) -> (Expr, Expr) {
    let z = Expr::x().scale(omega.sqrt());
    (sol.f_of(&z), sol.fp_of(&z))
}

/// `g₁(x) = ω²x²/2 + ε(ω/2)f' + (ω/2)f² + ω^{3/2}x f + (ω/3)(ε - α)`, `f = f(√ω x)`.
pub fn p4_g1(omega: f64, eps: i8, alpha: f64, sol: &P4Solution, grid: &Grid) -> Result<Expr> {
    check_p4_domain(omega, sol, grid)?;
    let (f, fp) = p4_at(omega, sol);
    let x = Expr::x();
    let e = eps as f64;
    Ok(&x * &x * (0.5 * omega * omega)
        + fp.scale(0.5 * e * omega)
        + (&f * &f).scale(0.5 * omega)
        + &x * &f * omega.powf(1.5)
        + omega * (e - alpha) / 3.0)
}

/// `W = -√ω (f(√ω x) + √ω x)`.
pub fn p4_superpotential(omega: f64, sol: &P4Solution, grid: &Grid) -> Result<Expr> {
    check_p4_domain(omega, sol, grid)?;
    let (f, _) = p4_at(omega, sol);
    let s = omega.sqrt();
    Ok(-(f + Expr::x().scale(s)).scale(s))
}

/// Measured constants `V₂ - g₁(ε=-1)` and `V₁ - g₁(ε=+1)` for the partner
/// potentials of [`p4_superpotential`]: `ω(α/3 + 1/3 - 1/2)` and
/// `ω(α/3 - 1/3 + 1/2)`.
pub fn p4_partner_offsets(omega: f64, alpha: f64) -> (f64, f64) {
    (omega * (alpha / 3.0 + 1.0 / 3.0 - 0.5), omega * (alpha / 3.0 - 1.0 / 3.0 + 0.5))
}

/// Factors of `M† = (∂ + W₁)(∂ + W₂)` such that `q†M†` raises
/// `H₁ = q q†`-type Hamiltonian `-½∂² + (W² + W')/2` by `ω`:
/// `W₁,₂ = √ω [f/2 ± (f' + √(-2β))/(2f)]`.
pub fn p4_w12(omega: f64, beta: f64, sol: &P4Solution, grid: &Grid) -> Result<(Expr, Expr)> {
    if beta > 0.0 {
        return Err(Error::InvalidParameter(format!(
            "beta_p4 must be <= 0 for a real square root, got {beta}"
        )));
    }
    check_p4_domain(omega, sol, grid)?;
    let (f, fp) = p4_at(omega, sol);
    let s = omega.sqrt();
    let half = f.scale(0.5 * s);
    let frac = (fp + (-2.0 * beta).sqrt()) * f.recip() * (0.5 * s);
    Ok((&half + &frac, &half - &frac))
}

/// The factor pair as printed in the source formula,
/// `W₁,₂ = -½√ω f ± (½√ω f' - √(-β) ω/√2)/(½√ω f)`, kept to document that
/// it does not produce a ladder.
pub fn p4_w12_printed(omega: f64, beta: f64, sol: &P4Solution, grid: &Grid) -> Result<(Expr, Expr)> {
    if beta > 0.0 {
        return Err(Error::InvalidParameter(format!(
            "beta_p4 must be <= 0 for a real square root, got {beta}"
        )));
    }
    check_p4_domain(omega, sol, grid)?;
    let (f, fp) = p4_at(omega, sol);
    let s = omega.sqrt();
    let half = f.scale(-0.5 * s);
    let num = fp.scale(0.5 * s) - (-beta).sqrt() * omega / std::f64::consts::SQRT_2;
    let frac = num * f.scale(0.5 * s).recip();
    Ok((&half + &frac, &half - &frac))
}

/// `H_susy = k†k` where `kk† = -½∂² + (W² + W')/2` and `β = W + 1/z`.
pub fn p4_susy(omega: f64, sol: &P4Solution, gamma: f64, grid: &Grid) -> Result<MielnikPartner> {
    let w = p4_superpotential(omega, sol, grid)?;
    let fp = factorize(&w, grid)?;
    let rs = riccati_family(&fp.v2.scale(2.0), &w, gamma, grid)?;
    mielnik_partner(&fp, &rs, grid)
}
