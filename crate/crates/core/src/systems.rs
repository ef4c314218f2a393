//! Named one- and two-dimensional systems: each axis carries its
//! Hamiltonian, a ladder pair, and its closed-form spectrum where known.

use serde::{Deserialize, Serialize};

use crate::catalog::{self, Family, PotentialSpec};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::grid::Grid;
use crate::operator::{DiffOperator, OperatorChain};
use crate::painleve::{p4_rational, P4Solution};
use crate::superint::find_resonance;
use crate::susy::{
    conjugate, dressed_ladder, factorize, oscillator_ladder, probe_points, LadderPair,
    MielnikPartner, RiccatiSolution, FRAC_1_SQRT_2,
};

/// Levels `{isolated} ∪ {base + n·spacing}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelPattern {
    pub isolated: Option<f64>,
    pub base: f64,
    pub spacing: f64,
}

impl LevelPattern {
    pub fn levels(&self, k: usize) -> Vec<f64> {
        let mut out: Vec<f64> = self.isolated.into_iter().collect();
        let mut n = 0.0;
        while out.len() < k {
            out.push(self.base + n * self.spacing);
            n += 1.0;
        }
        out.truncate(k);
        out
    }
}

#[derive(Clone, Debug)]
pub struct Axis {
    pub label: String,
    pub potential: Expr,
    pub hamiltonian: DiffOperator,
    pub ladder: LadderPair,
    pub expected: Option<LevelPattern>,
}

impl Axis {
    fn new(label: impl Into<String>, potential: Expr, ladder: LadderPair, expected: Option<LevelPattern>) -> Self {
        let hamiltonian = DiffOperator::hamiltonian(&potential);
        let ladder = LadderPair { hamiltonian: hamiltonian.clone(), ..ladder };
        Self { label: label.into(), potential, hamiltonian, ladder, expected }
    }
}

/// Two Hamiltonians expected to share their spectrum apart from the
/// zero mode of the first.
#[derive(Clone, Debug)]
pub struct PartnerPair {
    pub label: String,
    pub with_zero: DiffOperator,
    pub without: DiffOperator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    Mielnik2d,
    ErfHe,
    ErfHf,
    #[serde(rename = "erf_hgamma_1d")]
    ErfHgamma1d,
    PainleveHss,
    Custom,
}

impl SystemKind {
    pub const ALL: [SystemKind; 6] = [
        SystemKind::Mielnik2d,
        SystemKind::ErfHe,
        SystemKind::ErfHf,
        SystemKind::ErfHgamma1d,
        SystemKind::PainleveHss,
        SystemKind::Custom,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SystemKind::Mielnik2d => "mielnik2d",
            SystemKind::ErfHe => "erf_he",
            SystemKind::ErfHf => "erf_hf",
            SystemKind::ErfHgamma1d => "erf_hgamma_1d",
            SystemKind::PainleveHss => "painleve_hss",
            SystemKind::Custom => "custom",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    pub fn description(&self) -> &'static str {
        match self {
            SystemKind::Mielnik2d => "oscillator (+1/2) along x, Mielnik partner H' along y; ladders a†, s†",
            SystemKind::ErfHe => "H_s1 along x, erf family H_gamma along y; ladders m†, r†",
            SystemKind::ErfHf => "H_s2 along x, erf family H_gamma along y; ladders a†, r†",
            SystemKind::ErfHgamma1d => "one-dimensional erf family H_gamma",
            SystemKind::PainleveHss => "Painleve IV partner H_1 along x, H_susy along y; ladders q†M†, v†",
            SystemKind::Custom => "any two catalog families, one per axis",
        }
    }
}

#[derive(Clone, Debug)]
pub struct System {
    pub kind: SystemKind,
    /// One axis for 1-D systems, `[x, y]` otherwise.
    pub axes: Vec<Axis>,
    /// `(m, n)` with `m·λx = n·λy`, for planar systems.
    pub resonance: Option<(usize, usize)>,
    pub riccati: Vec<(String, RiccatiSolution)>,
    pub partners: Vec<PartnerPair>,
    pub p4: Option<P4Solution>,
    /// Additional ladders reported but not used to build integrals.
    pub extra_ladders: Vec<(String, LadderPair)>,
}

impl System {
    pub fn is_planar(&self) -> bool {
        self.axes.len() == 2
    }

    fn planar(kind: SystemKind, x: Axis, y: Axis) -> Result<Self> {
        let res = find_resonance(x.ladder.lambda, y.ladder.lambda, 6)?.ok_or_else(|| {
            Error::Resonance(format!(
                "no m, n <= 6 with m·{} = n·{}",
                x.ladder.lambda, y.ladder.lambda
            ))
        })?;
        Ok(Self {
            kind,
            axes: vec![x, y],
            resonance: Some(res),
            riccati: Vec::new(),
            partners: Vec::new(),
            p4: None,
            extra_ladders: Vec::new(),
        })
    }
}

/// `H = ω²x²/2`, `a† = (-∂ + ωx)/√2`.
pub fn oscillator_axis(omega: f64) -> Axis {
    let x = Expr::x();
    let v = &x * &x * (0.5 * omega * omega);
    let ladder = oscillator_ladder(omega, FRAC_1_SQRT_2, DiffOperator::hamiltonian(&v));
    Axis::new("H_osc", v, ladder, Some(LevelPattern { isolated: None, base: 0.5 * omega, spacing: omega }))
}

/// `H₂ = AA† = H_osc + ω/2` for `W = ωx`.
pub fn shifted_oscillator_axis(omega: f64, grid: &Grid) -> Result<Axis> {
    let fp = factorize(&Expr::x().scale(omega), grid)?;
    let ladder = oscillator_ladder(omega, FRAC_1_SQRT_2, DiffOperator::hamiltonian(&fp.v2));
    Ok(Axis::new("H2", fp.v2, ladder, Some(LevelPattern { isolated: None, base: omega, spacing: omega })))
}

/// Mielnik partner `H' = b†b` with `s† = b†a†b`.
pub fn mielnik_axis(omega: f64, gamma: f64, grid: &Grid) -> Result<(Axis, MielnikPartner)> {
    let fam = catalog::mielnik(omega, gamma, grid)?;
    let inner = shifted_oscillator_axis(omega, grid)?.ladder;
    let probes = probe_points(grid, 17);
    let ladder = dressed_ladder(&fam.b, &fam.b_dag, &inner, &probes)?;
    let pattern = LevelPattern { isolated: Some(0.0), base: omega, spacing: omega };
    Ok((Axis::new("H'", fam.potential.clone(), ladder, Some(pattern)), fam))
}

/// The erf family at one `(a₀, γ)`.
#[derive(Clone, Debug)]
pub struct ErfAxes {
    pub s1: Axis,
    pub s2: Axis,
    /// `H_γ` with the order-3 ladder `d†a†d`.
    pub gamma: Axis,
    /// `d†m†d`, the order-5 composition with the inner ladder of `H_s1`.
    pub r_printed: LadderPair,
    pub family: MielnikPartner,
}

pub fn erf_axes(a0: f64, gamma: f64, grid: &Grid) -> Result<ErfAxes> {
    let w = catalog::erf_frequency(a0);
    let fp = factorize(&catalog::erf_beta0(a0), grid)?;
    let probes = probe_points(grid, 17);
    let vs2 = catalog::erf_vs2(a0);
    // a† = -∂ + x/(2a₀²) on H_s2.
    let a = oscillator_ladder(w, 1.0, DiffOperator::hamiltonian(&vs2));
    let m = dressed_ladder(&fp.a, &fp.a_dag, &a, &probes)?;
    let fam = catalog::erf_gamma(a0, gamma, grid)?;
    let r = dressed_ladder(&fam.b, &fam.b_dag, &a, &probes)?;
    let r_printed = conjugate(&fam.b_dag, &m, &fam.b, fam.hamiltonian.clone());
    let tower = LevelPattern { isolated: Some(0.0), base: 3.0 * w, spacing: w };
    Ok(ErfAxes {
        s1: Axis::new("H_s1", catalog::erf_vs1(a0), m, Some(tower)),
        s2: Axis::new("H_s2", vs2, a, Some(LevelPattern { isolated: None, base: 3.0 * w, spacing: w })),
        gamma: Axis::new("H_gamma", fam.potential.clone(), r, Some(tower)),
        r_printed,
        family: fam,
    })
}

/// Painlevé IV construction at one `(ω, α, β, γ)` for a given solution.
#[derive(Clone, Debug)]
pub struct P4Axes {
    /// `H₁ = q†q = -½∂² + (W² + W')/2` with `a† = q†M†`.
    pub h1: Axis,
    /// `H_susy = k†k` with `v† = k†a†k`.
    pub susy: Axis,
    pub w: Expr,
    pub family: MielnikPartner,
}

/// `a† = q†(∂ + W₁)(∂ + W₂)` and its adjoint `(-∂ + W₂)(-∂ + W₁)q` for
/// `H₁`, with `λ = ω`.
pub fn p4_ladder(omega: f64, beta: f64, sol: &P4Solution, grid: &Grid) -> Result<LadderPair> {
    let w = catalog::p4_superpotential(omega, sol, grid)?;
    let fp = factorize(&w, grid)?;
    let (w1, w2) = catalog::p4_w12(omega, beta, sol, grid)?;
    let raise = OperatorChain::new(vec![
        fp.a.clone(),
        DiffOperator::first_order(1.0, &w1, 1.0),
        DiffOperator::first_order(1.0, &w2, 1.0),
    ]);
    let lower = raise.adjoint();
    Ok(LadderPair::new(raise, lower, omega, DiffOperator::hamiltonian(&fp.v2)))
}

pub fn p4_axes(omega: f64, sol: &P4Solution, gamma: f64, grid: &Grid) -> Result<P4Axes> {
    let w = catalog::p4_superpotential(omega, sol, grid)?;
    let fp = factorize(&w, grid)?;
    let inner = p4_ladder(omega, sol.beta, sol, grid)?;
    let fam = catalog::p4_susy(omega, sol, gamma, grid)?;
    let probes = probe_points(grid, 17);
    let v = dressed_ladder(&fam.b, &fam.b_dag, &inner, &probes)?;
    let oscillator_class = sol.linear_slope() == Some(-2.0);
    let h1_levels = oscillator_class.then_some(LevelPattern { isolated: None, base: omega, spacing: omega });
    let susy_levels = oscillator_class.then_some(LevelPattern { isolated: Some(0.0), base: omega, spacing: omega });
    Ok(P4Axes {
        h1: Axis::new("H_1", fp.v2, inner, h1_levels),
        susy: Axis::new("H_susy", fam.potential.clone(), v, susy_levels),
        w,
        family: fam,
    })
}

fn rational(spec: &PotentialSpec) -> Result<P4Solution> {
    p4_rational(spec.alpha_p4, spec.beta_p4).ok_or_else(|| {
        Error::InvalidParameter(format!(
            "only the rational Painleve IV cases (0, -2) and (0, -2/9) are built from \
             parameters, got ({}, {})",
            spec.alpha_p4, spec.beta_p4
        ))
    })
}

/// One axis for any catalog family.
pub fn axis_for(spec: &PotentialSpec, grid: &Grid) -> Result<(Axis, Vec<(String, RiccatiSolution)>)> {
    spec.validate()?;
    let w = spec.omega;
    Ok(match spec.family {
        Family::Harmonic => (oscillator_axis(w), Vec::new()),
        Family::Mielnik if spec.gamma.is_infinite() => {
            let fp = factorize(&Expr::x().scale(w), grid)?;
            let ladder = oscillator_ladder(w, FRAC_1_SQRT_2, DiffOperator::hamiltonian(&fp.v1));
            let pattern = LevelPattern { isolated: None, base: 0.0, spacing: w };
            (Axis::new("H1", fp.v1, ladder, Some(pattern)), Vec::new())
        }
        Family::Mielnik => {
            let (axis, fam) = mielnik_axis(w, spec.gamma, grid)?;
            (axis, vec![("mielnik".into(), fam.riccati)])
        }
        Family::ErfS1 | Family::ErfS2 | Family::ErfGamma => {
            let gamma = if spec.gamma.is_finite() { spec.gamma } else { 1.0 };
            let e = erf_axes(spec.a0, gamma, grid)?;
            match spec.family {
                Family::ErfS1 => (e.s1, Vec::new()),
                Family::ErfS2 => (e.s2, Vec::new()),
                _ => (e.gamma, vec![("erf_gamma".into(), e.family.riccati)]),
            }
        }
        Family::P4G1 => {
            let sol = rational(spec)?;
            let g1 = catalog::p4_g1(w, spec.eps, spec.alpha_p4, &sol, grid)?;
            let inner = p4_ladder(w, spec.beta_p4, &sol, grid)?;
            let ladder = if spec.eps == -1 {
                inner
            } else {
                let fp = factorize(&catalog::p4_superpotential(w, &sol, grid)?, grid)?;
                dressed_ladder(&fp.a, &fp.a_dag, &inner, &probe_points(grid, 17))?
            };
            (Axis::new(format!("g1(eps={})", spec.eps), g1, ladder, None), Vec::new())
        }
        Family::P4Susy => {
            let sol = rational(spec)?;
            let p = p4_axes(w, &sol, spec.gamma, grid)?;
            (p.susy, vec![("p4_susy".into(), p.family.riccati)])
        }
    })
}

/// `H₂ ⊗ H'`: oscillator and its Mielnik partner.
pub fn mielnik2d(omega: f64, gamma: f64, grid: &Grid) -> Result<System> {
    let x = shifted_oscillator_axis(omega, grid)?;
    let (y, fam) = mielnik_axis(omega, gamma, grid)?;
    let partner = PartnerPair {
        label: "H' vs H2".into(),
        with_zero: y.hamiltonian.clone(),
        without: x.hamiltonian.clone(),
    };
    let mut s = System::planar(SystemKind::Mielnik2d, x, y)?;
    s.riccati.push(("mielnik".into(), fam.riccati));
    s.partners.push(partner);
    Ok(s)
}

fn erf_partners(e: &ErfAxes) -> Vec<PartnerPair> {
    vec![
        PartnerPair {
            label: "H_s1 vs H_s2".into(),
            with_zero: e.s1.hamiltonian.clone(),
            without: e.s2.hamiltonian.clone(),
        },
        PartnerPair {
            label: "H_gamma vs H_s2".into(),
            with_zero: e.gamma.hamiltonian.clone(),
            without: e.s2.hamiltonian.clone(),
        },
    ]
}

fn erf_planar(kind: SystemKind, a0: f64, gamma: f64, grid: &Grid) -> Result<System> {
    let e = erf_axes(a0, gamma, grid)?;
    let partners = erf_partners(&e);
    let x = if kind == SystemKind::ErfHe { e.s1 } else { e.s2 };
    let mut s = System::planar(kind, x, e.gamma)?;
    s.riccati.push(("erf_gamma".into(), e.family.riccati));
    s.partners = partners;
    s.extra_ladders.push(("r_printed".into(), e.r_printed));
    Ok(s)
}

/// `H_s1 ⊗ H_γ`.
pub fn erf_he(a0: f64, gamma: f64, grid: &Grid) -> Result<System> {
    erf_planar(SystemKind::ErfHe, a0, gamma, grid)
}

/// `H_s2 ⊗ H_γ`.
pub fn erf_hf(a0: f64, gamma: f64, grid: &Grid) -> Result<System> {
    erf_planar(SystemKind::ErfHf, a0, gamma, grid)
}

pub fn erf_hgamma_1d(a0: f64, gamma: f64, grid: &Grid) -> Result<System> {
    let e = erf_axes(a0, gamma, grid)?;
    let partners = erf_partners(&e);
    Ok(System {
        kind: SystemKind::ErfHgamma1d,
        axes: vec![e.gamma],
        resonance: None,
        riccati: vec![("erf_gamma".into(), e.family.riccati)],
        partners,
        p4: None,
        extra_ladders: vec![("r_printed".into(), e.r_printed)],
    })
}

/// `H₁ ⊗ H_susy` for a rational Painlevé IV solution.
pub fn painleve_hss(omega: f64, alpha: f64, beta: f64, gamma: f64, grid: &Grid) -> Result<System> {
    let sol = p4_rational(alpha, beta).ok_or_else(|| {
        Error::InvalidParameter(format!(
            "painleve_hss needs a rational Painleve IV case, got ({alpha}, {beta})"
        ))
    })?;
    let p = p4_axes(omega, &sol, gamma, grid)?;
    let partner = PartnerPair {
        label: "H_susy vs H_1".into(),
        with_zero: p.susy.hamiltonian.clone(),
        without: p.h1.hamiltonian.clone(),
    };
    let mut s = System::planar(SystemKind::PainleveHss, p.h1, p.susy)?;
    s.riccati.push(("p4_susy".into(), p.family.riccati));
    s.partners.push(partner);
    s.p4 = Some(sol);
    Ok(s)
}

pub fn oscillator2d(omega: f64) -> Result<System> {
    System::planar(SystemKind::Custom, oscillator_axis(omega), oscillator_axis(omega))
}

/// Independent catalog families along `x` and `y`.
pub fn custom(sx: &PotentialSpec, sy: &PotentialSpec, grid: &Grid) -> Result<System> {
    let (x, rx) = axis_for(sx, grid)?;
    let (y, ry) = axis_for(sy, grid)?;
    let mut s = System::planar(SystemKind::Custom, x, y)?;
    s.riccati = rx.into_iter().chain(ry).collect();
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_patterns() {
        let p = LevelPattern { isolated: Some(0.0), base: 1.5, spacing: 0.5 };
        assert_eq!(p.levels(4), vec![0.0, 1.5, 2.0, 2.5]);
        let p = LevelPattern { isolated: None, base: 0.5, spacing: 1.0 };
        assert_eq!(p.levels(2), vec![0.5, 1.5]);
    }

    #[test]
    fn names_round_trip() {
        for k in SystemKind::ALL {
            assert_eq!(SystemKind::parse(k.name()), Some(k));
        }
    }

    #[test]
    fn erf_ladders_at_coefficient_level() {
        let g = Grid::symmetric(8.0, 401).unwrap();
        let p = probe_points(&g, 13);
        let e = erf_axes(1.0, 2.0, &g).unwrap();
        assert!(e.s1.ladder.commutator_defect(&p).unwrap() < 1e-8);
        assert!(e.gamma.ladder.commutator_defect(&p).unwrap() < 1e-8);
        assert_eq!(e.gamma.ladder.order(&p).unwrap(), 3);
        assert_eq!(e.r_printed.order(&p).unwrap(), 5);
        assert!(e.r_printed.commutator_defect(&p).unwrap() > 1e-3);
    }

    #[test]
    fn painleve_ladders_at_coefficient_level() {
        let g = Grid::symmetric(8.0, 401).unwrap();
        let p = probe_points(&g, 13);
        let sol = p4_rational(0.0, -2.0).unwrap();
        for omega in [1.0, 0.7] {
            let a = p4_axes(omega, &sol, 1.5, &g).unwrap();
            assert_eq!(a.h1.ladder.order(&p).unwrap(), 3);
            assert!(a.h1.ladder.commutator_defect(&p).unwrap() < 1e-8);
            assert_eq!(a.susy.ladder.order(&p).unwrap(), 5);
            let d = a.susy.ladder.commutator_defect(&p).unwrap();
            assert!(d < 1e-6, "omega {omega}: {d:e}");
        }
        let sol = p4_rational(0.0, -2.0 / 9.0).unwrap();
        let l = p4_ladder(1.0, sol.beta, &sol, &g).unwrap();
        assert!(l.commutator_defect(&p).unwrap() < 1e-8);
    }

    #[test]
    fn painleve_third_case_has_no_regular_family() {
        let g = Grid::symmetric(8.0, 401).unwrap();
        assert!(matches!(
            painleve_hss(1.0, 0.0, -2.0 / 9.0, 1.5, &g),
            Err(Error::SingularFamily { .. })
        ));
    }
}
