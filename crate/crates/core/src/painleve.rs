//! Painlevé IV transcendents: adaptive integration into interpolation
//! tables, and the two rational special solutions used by the catalog.
//!
//! The equation is
//! `f'' = f'^2/(2f) + 3/2 f^3 + 4 z f^2 + 2 (z^2 - α) f + β/f`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::table::quintic_hermite;
use crate::expr::{fresh_id, Expr};

/// Integration stops once |f| leaves [F_MIN, F_MAX].
pub const F_MIN: f64 = 1e-8;
pub const F_MAX: f64 = 1e8;
const RTOL: f64 = 1e-10;
const ATOL: f64 = 1e-12;
const H_MAX: f64 = 1.0 / 64.0;
const H_MIN: f64 = 1e-12;

fn rhs(alpha: f64, beta: f64, z: f64, f: f64, fp: f64) -> f64 {
    fp * fp / (2.0 * f) + 1.5 * f * f * f + 4.0 * z * f * f + 2.0 * (z * z - alpha) * f + beta / f
}

fn third(alpha: f64, beta: f64, z: f64, f: f64, fp: f64) -> f64 {
    let fpp = rhs(alpha, beta, z, f, fp);
    fp * fpp / f - fp * fp * fp / (2.0 * f * f)
        + 4.5 * f * f * fp
        + 4.0 * f * f
        + 8.0 * z * f * fp
        + 4.0 * z * f
        + 2.0 * (z * z - alpha) * fp
        - beta * fp / (f * f)
}

/// Residual of the Painlevé IV equation for given `(z, f, f', f'')`.
pub fn p4_residual(alpha: f64, beta: f64, z: f64, f: f64, fp: f64, fpp: f64) -> f64 {
    fpp - rhs(alpha, beta, z, f, fp)
}

/// Dense table of a numerical solution on a pole- and zero-free interval.
pub struct P4Table {
    id: u64,
    alpha: f64,
    beta: f64,
    /// Sorted abscissae with `[f, f', f'', f''']` at each.
    z: Vec<f64>,
    data: Vec<[f64; 4]>,
}

impl P4Table {
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn span(&self) -> (f64, f64) {
        (self.z[0], *self.z.last().unwrap())
    }

    /// Tabulated `(z, f, f')` samples.
    pub fn samples(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.z.iter().zip(&self.data).map(|(z, d)| (*z, d[0], d[1]))
    }

    fn locate(&self, z: f64) -> Result<(usize, f64, f64)> {
        let (lo, hi) = self.span();
        if !(lo..=hi).contains(&z) || self.z.len() < 2 {
            return Err(Error::Domain { x: z, reason: format!("outside [{lo}, {hi}]") });
        }
        let j = match self.z.binary_search_by(|p| p.partial_cmp(&z).unwrap()) {
            Ok(j) => j.min(self.z.len() - 2),
            Err(j) => j - 1,
        };
        let h = self.z[j + 1] - self.z[j];
        Ok((j, (z - self.z[j]) / h, h))
    }

    pub fn eval_f(&self, z: f64) -> Result<f64> {
        let (j, t, h) = self.locate(z)?;
        let (a, b) = (self.data[j], self.data[j + 1]);
        Ok(quintic_hermite(t, h, [a[0], a[1], a[2]], [b[0], b[1], b[2]]))
    }

    pub fn eval_fp(&self, z: f64) -> Result<f64> {
        let (j, t, h) = self.locate(z)?;
        let (a, b) = (self.data[j], self.data[j + 1]);
        Ok(quintic_hermite(t, h, [a[1], a[2], a[3]], [b[1], b[2], b[3]]))
    }
}

/// Where a solution came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum P4Source {
    Numeric,
    Rational,
}

/// A Painlevé IV solution usable inside expressions.
#[derive(Clone)]
pub struct P4Solution {
    pub alpha: f64,
    pub beta: f64,
    pub source: P4Source,
    kind: SolutionKind,
    /// Why integration stopped early, if it did.
    pub stopped: Option<String>,
}

#[derive(Clone)]
enum SolutionKind {
    Table(Arc<P4Table>),
    /// `f(z) = slope · z`.
    Linear(f64),
}

impl std::fmt::Debug for P4Solution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("P4Solution")
            .field("alpha", &self.alpha)
            .field("beta", &self.beta)
            .field("source", &self.source)
            .field("domain", &self.domain())
            .field("stopped", &self.stopped)
            .finish()
    }
}

impl P4Solution {
    /// Interval on which the solution is known.
    pub fn domain(&self) -> (f64, f64) {
        match &self.kind {
            SolutionKind::Table(t) => t.span(),
            SolutionKind::Linear(_) => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// `k` for the exact solutions `f = k·z`.
    pub fn linear_slope(&self) -> Option<f64> {
        match &self.kind {
            SolutionKind::Table(_) => None,
            SolutionKind::Linear(k) => Some(*k),
        }
    }

    pub fn table(&self) -> Option<&Arc<P4Table>> {
        match &self.kind {
            SolutionKind::Table(t) => Some(t),
            SolutionKind::Linear(_) => None,
        }
    }

    /// `f(arg)` as an expression.
    pub fn f_of(&self, arg: &Expr) -> Expr {
        match &self.kind {
            SolutionKind::Table(t) => Expr::painleve(t.clone(), arg.clone(), false),
            SolutionKind::Linear(k) => arg.scale(*k),
        }
    }

    /// `f'(arg)`, the derivative with respect to the P4 variable.
    pub fn fp_of(&self, arg: &Expr) -> Expr {
        match &self.kind {
            SolutionKind::Table(t) => Expr::painleve(t.clone(), arg.clone(), true),
            SolutionKind::Linear(k) => Expr::constant(*k),
        }
    }

    pub fn eval(&self, z: f64) -> Result<(f64, f64)> {
        match &self.kind {
            SolutionKind::Table(t) => Ok((t.eval_f(z)?, t.eval_fp(z)?)),
            SolutionKind::Linear(k) => Ok((k * z, *k)),
        }
    }

    /// Supremum of the equation residual over sample points in the domain,
    /// with `f''` taken by central differences of the interpolated `f'`.
    pub fn residual_on(&self, zs: &[f64]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for &z in zs {
            let (f, fp) = self.eval(z)?;
            let fpp = match &self.kind {
                SolutionKind::Linear(_) => 0.0,
                SolutionKind::Table(t) => {
                    let h = 1e-4;
                    let (lo, hi) = t.span();
                    let (a, b) = ((z - h).max(lo), (z + h).min(hi));
                    (t.eval_fp(b)? - t.eval_fp(a)?) / (b - a)
                }
            };
            let r = p4_residual(self.alpha, self.beta, z, f, fp, fpp);
            worst = worst.max(r.abs() / (1.0 + fpp.abs()));
        }
        Ok(worst)
    }
}

/// Exact rational solutions `f = -2z` for (0, -2) and `f = -2z/3` for (0, -2/9).
pub fn p4_rational(alpha: f64, beta: f64) -> Option<P4Solution> {
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * (1.0 + b.abs());
    let slope = if close(alpha, 0.0) && close(beta, -2.0) {
        -2.0
    } else if close(alpha, 0.0) && close(beta, -2.0 / 9.0) {
        -2.0 / 3.0
    } else {
        return None;
    };
    Some(P4Solution {
        alpha,
        beta,
        source: P4Source::Rational,
        kind: SolutionKind::Linear(slope),
        stopped: None,
    })
}

struct Node {
    z: f64,
    f: f64,
    fp: f64,
}

/// Dormand–Prince 5(4) from `z0` towards `z_end`. Returns the accepted
/// nodes (starting with the initial point) and an optional stop reason.
fn integrate_dir(
    alpha: f64,
    beta: f64,
    z0: f64,
    f0: f64,
    fp0: f64,
    z_end: f64,
) -> (Vec<Node>, Option<String>) {
    const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const B5: [f64; 7] =
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];
    let dir = if z_end >= z0 { 1.0 } else { -1.0 };
    let mut nodes = vec![Node { z: z0, f: f0, fp: fp0 }];
    let (mut z, mut y) = (z0, [f0, fp0]);
    let mut h = H_MAX * 0.25;
    let deriv = |z: f64, y: [f64; 2]| [y[1], rhs(alpha, beta, z, y[0], y[1])];
    while dir * (z_end - z) > 1e-14 {
        h = h.min(H_MAX).min((z_end - z).abs());
        if h < H_MIN {
            return (nodes, Some(format!("step size underflow at z = {z}")));
        }
        let mut k = [[0.0; 2]; 7];
        for s in 0..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                ys[0] += dir * h * A[s][j] * kj[0];
                ys[1] += dir * h * A[s][j] * kj[1];
            }
            k[s] = deriv(z + dir * h * C[s], ys);
        }
        let mut y5 = y;
        let mut err: f64 = 0.0;
        for c in 0..2 {
            let mut e = 0.0;
            for s in 0..7 {
                y5[c] += dir * h * B5[s] * k[s][c];
                e += dir * h * (B5[s] - B4[s]) * k[s][c];
            }
            let sc = ATOL + RTOL * y[c].abs().max(y5[c].abs());
            err = err.max((e / sc).abs());
        }
        if !err.is_finite() {
            h *= 0.25;
            continue;
        }
        if err <= 1.0 {
            z += dir * h;
            y = y5;
            if !(F_MIN..=F_MAX).contains(&y[0].abs()) || !y[1].is_finite() {
                return (nodes, Some(format!("|f| left [{F_MIN:e}, {F_MAX:e}] near z = {z}")));
            }
            nodes.push(Node { z, f: y[0], fp: y[1] });
        }
        let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= fac;
    }
    (nodes, None)
}

fn make_table(alpha: f64, beta: f64, mut nodes: Vec<Node>) -> P4Table {
    nodes.sort_by(|a, b| a.z.partial_cmp(&b.z).unwrap());
    nodes.dedup_by(|a, b| (a.z - b.z).abs() < 1e-15);
    let z = nodes.iter().map(|n| n.z).collect();
    let data = nodes
        .iter()
        .map(|n| {
            [n.f, n.fp, rhs(alpha, beta, n.z, n.f, n.fp), third(alpha, beta, n.z, n.f, n.fp)]
        })
        .collect();
    P4Table { id: fresh_id(), alpha, beta, z, data }
}

fn check_start(z0: f64, f0: f64, fp0: f64, z_end: f64) -> Result<()> {
    if !(z0.is_finite() && f0.is_finite() && fp0.is_finite() && z_end.is_finite()) {
        return Err(Error::InvalidParameter("Painleve data must be finite".into()));
    }
    if f0 == 0.0 {
        return Err(Error::InvalidParameter("Painleve initial value f0 must be nonzero".into()));
    }
    Ok(())
}

/// Integrates from `(z0, f0, f0')` to `z_end`. If the solution approaches a
/// pole or a zero the table ends there and `stopped` says why.
pub fn p4_integrate(
    alpha: f64,
    beta: f64,
    z0: f64,
    f0: f64,
    fp0: f64,
    z_end: f64,
) -> Result<P4Solution> {
    check_start(z0, f0, fp0, z_end)?;
    let (nodes, stopped) = integrate_dir(alpha, beta, z0, f0, fp0, z_end);
    if nodes.len() < 2 {
        return Err(Error::Painleve(stopped.unwrap_or_else(|| "empty interval".into())));
    }
    Ok(P4Solution {
        alpha,
        beta,
        source: P4Source::Numeric,
        kind: SolutionKind::Table(Arc::new(make_table(alpha, beta, nodes))),
        stopped,
    })
}

/// Integrates in both directions from `z0`, covering `[z_lo, z_hi]`.
pub fn p4_integrate_span(
    alpha: f64,
    beta: f64,
    z0: f64,
    f0: f64,
    fp0: f64,
    z_lo: f64,
    z_hi: f64,
) -> Result<P4Solution> {
    check_start(z0, f0, fp0, z_hi)?;
    if !(z_lo <= z0 && z0 <= z_hi) {
        return Err(Error::InvalidParameter("z0 must lie in [z_lo, z_hi]".into()));
    }
    let (mut up, s1) = integrate_dir(alpha, beta, z0, f0, fp0, z_hi);
    let (down, s2) = integrate_dir(alpha, beta, z0, f0, fp0, z_lo);
    up.extend(down.into_iter().skip(1));
    if up.len() < 2 {
        return Err(Error::Painleve("empty interval".into()));
    }
    let stopped = match (s1, s2) {
        (None, None) => None,
        (a, b) => Some([a, b].into_iter().flatten().collect::<Vec<_>>().join("; ")),
    };
    Ok(P4Solution {
        alpha,
        beta,
        source: P4Source::Numeric,
        kind: SolutionKind::Table(Arc::new(make_table(alpha, beta, up))),
        stopped,
    })
}
