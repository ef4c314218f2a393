//! Named systems end to end on a moderate grid.

use susy_core::catalog::{self, Family, PotentialSpec};
use susy_core::painleve::{p4_integrate_span, p4_rational};
use susy_core::schrodinger::{eigensolve, separable_2d};
use susy_core::susy::probe_points;
use susy_core::systems::{self, System};
use susy_core::{Error, Expr, Grid};

fn grid() -> Grid {
    Grid::symmetric(12.0, 1024).unwrap()
}

fn assert_patterns(sys: &System, k: usize, tol: f64) {
    let g = grid();
    for axis in &sys.axes {
        let s = eigensolve(&axis.hamiltonian, &g, k).unwrap();
        let want = axis.expected.expect("closed form").levels(k);
        for (e, w) in s.energies.iter().zip(&want) {
            assert!((e - w).abs() < tol, "{}: {e} vs {w}", axis.label);
        }
    }
}

#[test]
fn named_systems_match_their_level_patterns() {
    let g = grid();
    for sys in [
        systems::mielnik2d(1.0, 1.5, &g).unwrap(),
        systems::erf_he(1.0, 2.0, &g).unwrap(),
        systems::erf_hf(1.0, 2.0, &g).unwrap(),
        systems::erf_hgamma_1d(1.0, 2.0, &g).unwrap(),
        systems::painleve_hss(1.0, 0.0, -2.0, 1.5, &g).unwrap(),
    ] {
        assert_patterns(&sys, 8, 1e-7);
        if sys.is_planar() {
            assert_eq!(sys.resonance, Some((1, 1)), "{}", sys.kind.name());
        }
    }
}

#[test]
fn mielnik_product_levels_are_degenerate() {
    let g = grid();
    let sys = systems::mielnik2d(1.0, 1.5, &g).unwrap();
    let sx = eigensolve(&sys.axes[0].hamiltonian, &g, 8).unwrap();
    let sy = eigensolve(&sys.axes[1].hamiltonian, &g, 8).unwrap();
    let m = separable_2d(&sx, &sy, None).unwrap();
    for (k, lvl) in m.iter().enumerate() {
        assert_eq!(lvl.members.len(), k + 1);
        assert!((lvl.energy - (k as f64 + 1.0)).abs() < 1e-7);
    }
}

#[test]
fn numeric_painleve_solution_feeds_the_catalog() {
    // Integrating from rational initial data reproduces f = -2z, and the
    // superpotentials built from either agree.
    let g = Grid::symmetric(2.5, 512).unwrap();
    let num = p4_integrate_span(0.0, -2.0, 0.5, -1.0, -2.0, -3.0, 3.0).unwrap();
    let rat = p4_rational(0.0, -2.0).unwrap();
    let wn = catalog::p4_superpotential(1.0, &num, &g).unwrap();
    let wr = catalog::p4_superpotential(1.0, &rat, &g).unwrap();
    assert!(wn.approx_eq_on(&wr, &probe_points(&g, 21), 1e-8).unwrap());
    let gn = catalog::p4_g1(1.0, 1, 0.0, &num, &g).unwrap();
    let x = Expr::x();
    let want = &x * &x * 0.5 - 2.0 / 3.0;
    assert!(gn.approx_eq_on(&want, &probe_points(&g, 21), 1e-7).unwrap());
}

#[test]
fn painleve_domain_must_cover_the_grid() {
    let num = p4_integrate_span(0.0, -2.0, 0.5, -1.0, -2.0, -1.0, 1.0).unwrap();
    let g = Grid::symmetric(3.0, 256).unwrap();
    assert!(matches!(catalog::p4_superpotential(1.0, &num, &g), Err(Error::Domain { .. })));
}

#[test]
fn bad_parameters_are_reported() {
    let g = grid();
    assert!(matches!(systems::mielnik2d(1.0, 0.5, &g), Err(Error::SingularFamily { .. })));
    assert!(matches!(systems::painleve_hss(1.0, 1.0, -2.0, 1.5, &g), Err(Error::InvalidParameter(_))));
    let bad = PotentialSpec { omega: -1.0, ..PotentialSpec::new(Family::Harmonic) };
    assert!(matches!(catalog::build(&bad, &g), Err(Error::InvalidParameter(_))));
    // Below the erf threshold the family is singular.
    let t = catalog::erf_gamma_threshold(1.0);
    assert!(systems::erf_hgamma_1d(1.0, 0.9 * t, &g).is_err());
    assert!(systems::erf_hgamma_1d(1.0, 1.1 * t, &g).is_ok());
}

#[test]
fn custom_pairs_resonate_when_spacings_are_commensurate() {
    let g = grid();
    let x = PotentialSpec { omega: 2.0, ..PotentialSpec::new(Family::Harmonic) };
    let y = PotentialSpec::new(Family::Mielnik);
    assert_eq!(systems::custom(&x, &y, &g).unwrap().resonance, Some((1, 2)));
    let irr = PotentialSpec { omega: std::f64::consts::SQRT_2, ..x };
    assert!(matches!(systems::custom(&irr, &y, &g), Err(Error::Resonance(_))));
}
