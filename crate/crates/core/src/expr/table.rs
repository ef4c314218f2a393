//! Tabulated antiderivatives with quintic Hermite interpolation.

use super::{fresh_id, Expr};
use crate::error::{Error, Result};
use crate::quadrature::{GL8_NODES, GL8_WEIGHTS};

/// Default node spacing of antiderivative tables.
pub const DEFAULT_STEP: f64 = 1.0 / 128.0;

/// Quintic Hermite interpolant on one cell from values and first two
/// derivatives at both ends; `t ∈ [0, 1]`, `h` the cell width.
pub fn quintic_hermite(t: f64, h: f64, left: [f64; 3], right: [f64; 3]) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t3 * t;
    let t5 = t4 * t;
    let h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
    let h1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
    let h2 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
    let h3 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
    let h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
    let h5 = 0.5 * (t3 - 2.0 * t4 + t5);
    left[0] * h0
        + h * left[1] * h1
        + h * h * left[2] * h2
        + right[0] * h3
        + h * right[1] * h4
        + h * h * right[2] * h5
}

/// `F(x) = ∫_{anchor}^{x} g(t) dt` on a uniform table anchored at a node.
pub struct IntegralTable {
    id: u64,
    integrand: Expr,
    anchor: f64,
    step: f64,
    first: f64,
    values: Vec<[f64; 3]>,
}

impl IntegralTable {
    pub fn build(integrand: Expr, anchor: f64, lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(lo < hi) || !(lo..=hi).contains(&anchor) || !(step > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "integral table needs lo <= anchor <= hi and step > 0 (lo={lo}, anchor={anchor}, hi={hi})"
            )));
        }
        let below = ((anchor - lo) / step).ceil() as usize;
        let above = ((hi - anchor) / step).ceil() as usize;
        let n = below + above + 1;
        let first = anchor - below as f64 * step;
        let nodes: Vec<f64> = (0..n).map(|j| first + j as f64 * step).collect();
        let g = integrand.eval_many(&nodes)?;
        let dg = integrand.diff().eval_many(&nodes)?;
        let mut quad_pts = Vec::with_capacity(8 * (n - 1));
        for j in 0..n - 1 {
            let mid = nodes[j] + 0.5 * step;
            for t in GL8_NODES {
                quad_pts.push(mid + 0.5 * step * t);
            }
        }
        let gq = integrand.eval_many(&quad_pts)?;
        let cells: Vec<f64> = gq
            .chunks(8)
            .map(|c| 0.5 * step * c.iter().zip(GL8_WEIGHTS).map(|(v, w)| v * w).sum::<f64>())
            .collect();
        let mut f = vec![0.0; n];
        for j in (0..below).rev() {
            f[j] = f[j + 1] - cells[j];
        }
        for j in below + 1..n {
            f[j] = f[j - 1] + cells[j - 1];
        }
        let values = (0..n).map(|j| [f[j], g[j], dg[j]]).collect();
        Ok(Self { id: fresh_id(), integrand, anchor, step, first, values })
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn integrand(&self) -> &Expr {
        &self.integrand
    }

    pub fn anchor(&self) -> f64 {
        self.anchor
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.first, self.first + (self.values.len() - 1) as f64 * self.step)
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.domain();
        if !(lo..=hi).contains(&x) {
            return Err(Error::Domain {
                x,
                reason: format!("outside tabulated range [{lo}, {hi}]"),
            });
        }
        let s = (x - self.first) / self.step;
        let j = (s.floor() as usize).min(self.values.len() - 2);
        let t = s - j as f64;
        Ok(quintic_hermite(t, self.step, self.values[j], self.values[j + 1]))
    }
}
