//! Acceptance criteria 1–8. Each criterion prints one PASS/FAIL line with
//! the measured quantities; informational lines start with `info`.
//!
//! Run with `cargo test -p susy-core --test acceptance`.

use std::io::Write;
use std::time::Instant;

use susy_core::catalog::{self, erf_beta0, erf_z_closed_form};
use susy_core::grid::inner_product;
use susy_core::painleve::{p4_integrate, p4_rational};
use susy_core::schrodinger::{eigensolve, hamiltonian, SpectrumResult};
use susy_core::superint::{build_triple, verify_commutation, verify_i2_bracket};
use susy_core::susy::{factorize, probe_points, ZeroModeSide};
use susy_core::systems::{self, System};
use susy_core::{DiffOperator, Error, Expr, Grid};

const N: usize = 2048;
const L: f64 = 12.0;

fn grid() -> Grid {
    Grid::symmetric(L, N).unwrap()
}

struct Outcome {
    pass: bool,
    detail: String,
}

/// Writes past the test harness's output capture, so the criterion lines
/// show up in a plain `cargo test` run.
macro_rules! out {
    ($($t:tt)*) => {{
        let mut o = std::io::stdout().lock();
        let _ = writeln!(o, $($t)*);
        let _ = o.flush();
    }};
}

fn report(id: usize, title: &str, o: &Outcome, t: Instant) {
    out!(
        "criterion {id} {title}: {} — {} [{:.1} s]",
        if o.pass { "PASS" } else { "FAIL" },
        o.detail,
        t.elapsed().as_secs_f64()
    );
}

fn info(msg: impl AsRef<str>) {
    out!("info: {}", msg.as_ref());
}

fn max_level_error(s: &SpectrumResult, want: &[f64], relative: bool) -> f64 {
    s.energies
        .iter()
        .zip(want)
        .map(|(e, w)| if relative { (e - w).abs() / w.abs() } else { (e - w).abs() })
        .fold(0.0, f64::max)
}

fn solve(h: &DiffOperator, k: usize) -> SpectrumResult {
    eigensolve(h, &grid(), k).unwrap()
}

fn criterion1() -> Outcome {
    let x = Expr::x();
    let s = solve(&hamiltonian(&(&x * &x * 0.5)), 10);
    let want: Vec<f64> = (0..10).map(|n| n as f64 + 0.5).collect();
    let rel = max_level_error(&s, &want, true);
    let g = grid();
    let fp = factorize(&x, &g).unwrap();
    let side = fp.zero_mode_side(&g).unwrap();
    let psi = fp.zero_mode(&g, ZeroModeSide::H1).unwrap().unwrap();
    let h1psi = fp.h1.apply(&psi).unwrap();
    let e0 = inner_product(&psi, &h1psi).unwrap();
    let kernel = fp.a.apply(&psi).unwrap().interior_norm() / psi.interior_norm();
    Outcome {
        pass: rel < 1e-6 && side == Some(ZeroModeSide::H1) && e0.abs() < 1e-6 && kernel < 1e-6,
        detail: format!("max rel level error {rel:.2e}; zero mode E = {e0:.2e}, ‖Aψ₀‖/‖ψ₀‖ = {kernel:.2e}"),
    }
}

/// Worst `|E₂ₙ - E₁ₙ₊₁|` and worst `1 - |⟨ψ₂ₙ, Aψ₁ₙ₊₁⟩|/‖Aψ₁ₙ₊₁‖`.
fn pairing(w: &Expr, k: usize) -> (f64, f64) {
    let g = grid();
    let fp = factorize(w, &g).unwrap();
    let s1 = solve(&DiffOperator::hamiltonian(&fp.v1), k + 1);
    let s2 = solve(&DiffOperator::hamiltonian(&fp.v2), k);
    let mut de: f64 = 0.0;
    let mut dov: f64 = 0.0;
    for n in 0..k {
        de = de.max((s2.energies[n] - s1.energies[n + 1]).abs());
        let mapped = fp.a.apply(&s1.states[n + 1]).unwrap();
        let ov = inner_product(&s2.states[n], &mapped).unwrap().abs() / mapped.norm();
        dov = dov.max(1.0 - ov);
    }
    (de, dov)
}

fn criterion2() -> Outcome {
    let (de_o, dov_o) = pairing(&Expr::x(), 10);
    let (de_e, dov_e) = pairing(&erf_beta0(1.0), 10);
    Outcome {
        pass: de_o.max(de_e) < 2e-5 && dov_o.max(dov_e) < 1e-6,
        detail: format!(
            "W=x: ΔE {de_o:.2e}, 1-overlap {dov_o:.2e}; erf a₀=1: ΔE {de_e:.2e}, 1-overlap {dov_e:.2e}"
        ),
    }
}

/// Solves `erf(x) = y` by bisection.
fn erf_inverse(y: f64) -> f64 {
    let erf = Expr::x().erf();
    let (mut lo, mut hi) = (-6.0, 6.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if erf.eval(mid).unwrap() < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn criterion3() -> Outcome {
    let g = grid();
    let mut pass = true;
    let mut parts = Vec::new();
    for gamma in [1.0, 1.5, 5.0] {
        let fam = catalog::mielnik(1.0, gamma, &g).unwrap();
        let res = fam.riccati.residual(&g).unwrap();
        let s = solve(&fam.hamiltonian, 10);
        let want: Vec<f64> = (0..10).map(|n| n as f64).collect();
        let err = max_level_error(&s, &want, false);
        pass &= res < 1e-8 && err < 2e-5;
        parts.push(format!("γ={gamma}: riccati {res:.1e}, levels {err:.1e}"));
    }
    let zero = erf_inverse(-0.5 / (std::f64::consts::PI.sqrt() / 2.0));
    match catalog::mielnik(1.0, 0.5, &g) {
        Err(Error::SingularFamily { x }) => {
            let ok = (x - zero).abs() < 1e-8;
            pass &= ok;
            parts.push(format!("γ=0.5 rejected, zero of z at {x:.10} (oracle {zero:.10})"));
        }
        other => {
            pass = false;
            parts.push(format!("γ=0.5 not rejected: {:?}", other.err()));
        }
    }
    Outcome { pass, detail: parts.join("; ") }
}

fn criterion4() -> Outcome {
    let g = grid();
    let p = probe_points(&g, 41);
    let fp = factorize(&erf_beta0(1.0), &g).unwrap();
    let coeff = fp.a_dag.compose(&fp.a).distance_on(&hamiltonian(&catalog::erf_vs1(1.0)), &p).unwrap();
    let fam = catalog::erf_gamma(1.0, 2.0, &g).unwrap();
    let s = solve(&fam.hamiltonian, 10);
    let mut want = vec![0.0];
    want.extend((0..9).map(|n| (n as f64 + 3.0) / 2.0));
    let err = max_level_error(&s, &want, false);
    // Relative to the size of the cancelling terms: z grows like e^{x²/2}.
    let z = erf_z_closed_form(1.0, 2.0, 1.0);
    let b0 = erf_beta0(1.0);
    let r = (-z.diff() + &b0 * &z * 2.0 + 1.0).eval_many(&p).unwrap();
    let size = (z.diff().eval_many(&p).unwrap())
        .iter()
        .zip((&b0 * &z * 2.0).eval_many(&p).unwrap())
        .map(|(a, b)| 1.0 + a.abs() + b.abs())
        .collect::<Vec<_>>();
    let zres = r.iter().zip(&size).map(|(a, b)| a.abs() / b).fold(0.0, f64::max);
    let zq = fam.riccati.z.eval_many(&p).unwrap();
    let zc = z.eval_many(&p).unwrap();
    let zdiff = zq.iter().zip(&zc).map(|(a, b)| (a - b).abs() / b.abs()).fold(0.0, f64::max);
    info(format!("erf closed-form z vs quadrature z: max relative difference {zdiff:.2e}"));
    Outcome {
        pass: coeff < 1e-10 && err < 2e-5 && zres < 1e-7,
        detail: format!(
            "‖c†c − H_s1‖ {coeff:.1e}; H_γ levels {err:.1e}; closed-form z residual {zres:.1e} (relative)"
        ),
    }
}

fn criterion5() -> Outcome {
    let g = grid();
    let p = probe_points(&g, 17);
    let (m, _) = systems::mielnik_axis(1.0, 1.5, &g).unwrap();
    let sm = solve(&m.hamiltonian, 8);
    let rm = m.ladder.spectral_residual(&sm, 6).unwrap();
    let om = m.ladder.order(&p).unwrap();
    let e = systems::erf_axes(1.0, 2.0, &g).unwrap();
    let se = solve(&e.gamma.hamiltonian, 8);
    let rp = e.r_printed.spectral_residual(&se, 6).unwrap();
    let op = e.r_printed.order(&p).unwrap();
    let rv = e.gamma.ladder.spectral_residual(&se, 6).unwrap();
    let ov = e.gamma.ladder.order(&p).unwrap();
    info(format!(
        "erf: r† = d†a†d (order {ov}, λ = ½) on the 6 lowest states of H_γ: residual {:.2e} (direct {:.2e})",
        rv.worst, rv.direct
    ));
    Outcome {
        pass: om == 3 && rm.worst < 1e-5 && op == 5 && rp.worst < 1e-5,
        detail: format!(
            "Mielnik s† order {om}, residual {:.2e} (direct {:.2e}); erf r† = d†m†d order {op}, \
             residual {:.2e} (direct {:.2e})",
            rm.worst, rm.direct, rp.worst, rp.direct
        ),
    }
}

fn planar_suite(sys: &System, levels: usize) -> (bool, String) {
    let g = grid();
    let p = probe_points(&g, 11);
    let (lx, ly) = (&sys.axes[0].ladder, &sys.axes[1].ladder);
    let (m, n) = sys.resonance.unwrap();
    let t = build_triple(lx, ly, m, n, &p, &p).unwrap();
    let sx = solve(&sys.axes[0].hamiltonian, levels);
    let sy = solve(&sys.axes[1].hamiltonian, levels);
    let c = verify_commutation(&t, &sx, &sy, 20, None).unwrap();
    let rx = lx.spectral_residual(&sx, levels).unwrap().worst;
    let ry = ly.spectral_residual(&sy, levels).unwrap().worst;
    // Coupling between the 1-D and 2-D levels of agreement.
    let coupled = c.worst_overall() <= 10.0 * rx.max(ry).max(1e-9);
    let b = verify_i2_bracket(&t, &sx, &sy, 20).unwrap();
    let brel = (b.constant - b.expected).abs() / b.expected;
    let pass = c.worst_overall() < 1e-5 && brel < 1e-6;
    (
        pass,
        format!(
            "{}: orders {:?}, residuals K/I1/I2 {:.1e}/{:.1e}/{:.1e} (direct {:.1e}; 1-D ladders \
             {:.1e}, {:.1e}; within 10× of 1-D: {}; {} annihilated, noise {:.1e}), [K,I1] = {:.8}·I2 (2λ = {})",
            sys.kind.name(),
            t.orders,
            c.worst[0],
            c.worst[1],
            c.worst[2],
            c.worst_direct_overall(),
            rx,
            ry,
            coupled,
            c.annihilated,
            c.kernel_noise,
            b.constant,
            b.expected
        ),
    )
}

fn criterion6() -> Outcome {
    let g = grid();
    let mut pass = true;
    let mut parts = Vec::new();
    for sys in [
        systems::mielnik2d(1.0, 1.5, &g).unwrap(),
        systems::erf_he(1.0, 2.0, &g).unwrap(),
        systems::erf_hf(1.0, 2.0, &g).unwrap(),
    ] {
        let (ok, d) = planar_suite(&sys, 12);
        pass &= ok;
        parts.push(d);
    }
    Outcome { pass, detail: parts.join("; ") }
}

fn p4_track(beta: f64, z0: f64, f0: f64, fp0: f64, slope: f64) -> f64 {
    let sol = p4_integrate(0.0, beta, z0, f0, fp0, 3.0).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..=200 {
        let z = z0 + (3.0 - z0) * i as f64 / 200.0;
        let (f, _) = sol.eval(z).unwrap();
        worst = worst.max((f - slope * z).abs());
    }
    worst
}

fn criterion7() -> Outcome {
    let g = grid();
    let e1 = p4_track(-2.0, 0.1, -0.2, -2.0, -2.0);
    let e2 = p4_track(-2.0 / 9.0, 0.3, -0.2, -2.0 / 3.0, -2.0 / 3.0);
    let p = probe_points(&g, 41);
    let rat = p4_rational(0.0, -2.0).unwrap();
    let mut g1_err: f64 = 0.0;
    for omega in [1.0, 0.5] {
        let g1 = catalog::p4_g1(omega, 1, 0.0, &rat, &g).unwrap();
        let x = Expr::x();
        let want = &x * &x * (0.5 * omega * omega) - 2.0 * omega / 3.0;
        g1_err = g1_err.max(g1.distance_on(&want, &p));
    }
    let sys = systems::painleve_hss(1.0, 0.0, -2.0, 1.5, &g).unwrap();
    let susy = &sys.axes[1];
    let sy = solve(&susy.hamiltonian, 8);
    let rv_full = susy.ladder.spectral_residual(&sy, 6).unwrap();
    let rv = rv_full.worst;
    // The direct residual of an order-5 chain is limited by round-off at
    // this resolution; on a coarser grid it resolves the relation too.
    let coarse = Grid::symmetric(L, 768).unwrap();
    let cs = systems::painleve_hss(1.0, 0.0, -2.0, 1.5, &coarse).unwrap();
    let cspec = eigensolve(&cs.axes[1].hamiltonian, &coarse, 8).unwrap();
    let cres = cs.axes[1].ladder.spectral_residual(&cspec, 6).unwrap();
    info(format!(
        "P4 v†: direct residual {:.2e} at n = {N}, {:.2e} at n = 768 (projected {:.2e})",
        rv_full.direct, cres.direct, cres.worst
    ));
    let ov = susy.ladder.order(&probe_points(&g, 17)).unwrap();
    let (ok2d, d2d) = planar_suite(&sys, 12);
    match systems::painleve_hss(1.0, 0.0, -2.0 / 9.0, 1.5, &g) {
        Err(Error::SingularFamily { x }) => info(format!(
            "P4 (0, -2/9): W = -x/3 makes z vanish for every γ (found at x = {x:.4}); H_susy not built"
        )),
        other => info(format!("P4 (0, -2/9): unexpected {:?}", other.err())),
    }
    Outcome {
        pass: e1 < 1e-8 && e2 < 1e-8 && g1_err < 1e-10 && ov == 5 && rv < 1e-5 && ok2d,
        detail: format!(
            "f=-2z err {e1:.1e}, f=-2z/3 err {e2:.1e}; g1 err {g1_err:.1e}; v† order {ov}, residual {rv:.1e}; {d2d}"
        ),
    }
}

trait Distance {
    fn distance_on(&self, other: &Expr, p: &[f64]) -> f64;
}

impl Distance for Expr {
    fn distance_on(&self, other: &Expr, p: &[f64]) -> f64 {
        let a = self.eval_many(p).unwrap();
        let b = other.eval_many(p).unwrap();
        a.iter().zip(&b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max)
    }
}

/// Largest `|f'(x) − (f(x+h) − f(x−h))/2h|` relative to `1 + |f'|`, with the
/// fourth-order five-point difference.
fn fd_defect(e: &Expr, xs: &[f64]) -> f64 {
    let d = e.diff();
    let mut worst: f64 = 0.0;
    for &x in xs {
        let h = 1e-3 * (1.0 + x.abs());
        let f = |t: f64| e.eval(t).unwrap();
        let fd = (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h);
        let a = d.eval(x).unwrap();
        worst = worst.max((a - fd).abs() / (1.0 + a.abs()));
    }
    worst
}

fn criterion8() -> Outcome {
    let g = grid();
    let xs: Vec<f64> = (0..25).map(|i| -3.0 + 0.25 * i as f64 + 0.0123).collect();
    let x = Expr::x();
    let fam = catalog::mielnik(1.0, 1.5, &g).unwrap();
    let erf_fam = catalog::erf_gamma(1.0, 2.0, &g).unwrap();
    let exprs = [
        (&x * &x).exp().recip() * x.erf(),
        erf_beta0(0.8),
        catalog::erf_vs1(1.3),
        fam.riccati.z.clone(),
        fam.riccati.phi.clone(),
        fam.potential.clone(),
        erf_fam.potential.clone(),
        erf_z_closed_form(1.0, 2.0, 1.0).recip(),
    ];
    let fd = exprs.iter().map(|e| fd_defect(e, &xs)).fold(0.0, f64::max);
    // Refinement: the spectra reported above, at n and 2n.
    let hs = [
        hamiltonian(&(&x * &x * 0.5)),
        fam.hamiltonian.clone(),
        erf_fam.hamiltonian.clone(),
        systems::painleve_hss(1.0, 0.0, -2.0, 1.5, &g).unwrap().axes[1].hamiltonian.clone(),
    ];
    let fine = Grid::symmetric(L, 2 * N).unwrap();
    let mut refine: f64 = 0.0;
    for h in &hs {
        let a = eigensolve(h, &g, 10).unwrap();
        let b = eigensolve(h, &fine, 10).unwrap();
        for (u, v) in a.energies.iter().zip(&b.energies) {
            refine = refine.max((u - v).abs());
        }
    }
    Outcome {
        pass: fd < 1e-6 && refine < 1e-7,
        detail: format!("diff vs finite difference {fd:.1e}; n→2n eigenvalue change {refine:.1e}"),
    }
}

#[test]
fn acceptance_criteria() {
    // Keep the first line off the test harness prefix.
    out!();
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("oscillator baseline", criterion1),
        ("SUSY pairing", criterion2),
        ("Mielnik family", criterion3),
        ("erf family", criterion4),
        ("ladder relations", criterion5),
        ("2-D integrals", criterion6),
        ("Painleve IV", criterion7),
        ("numerical hygiene", criterion8),
    ];
    let mut summary = Vec::new();
    for (i, (title, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = f();
        report(i + 1, title, &o, t);
        summary.push(o.pass);
    }
    let passed = summary.iter().filter(|p| **p).count();
    out!("acceptance: {passed}/{} criteria pass", summary.len());
}
