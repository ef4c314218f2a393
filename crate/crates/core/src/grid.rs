//! Uniform 1-D grids, sampled functions and quadrature on them.

use crate::error::{Error, Result};
use crate::quadrature::gl8;

/// Smallest number of points accepted for a grid.
pub const MIN_POINTS: usize = 16;

/// Uniform grid on a closed interval. Node `i` sits at `x_min + i * spacing`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    x_min: f64,
    x_max: f64,
    n: usize,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::InvalidGrid("bounds must be finite".into()));
        }
        if x_max <= x_min {
            return Err(Error::InvalidGrid(format!(
                "need x_min < x_max, got [{x_min}, {x_max}]"
            )));
        }
        if n < MIN_POINTS {
            return Err(Error::InvalidGrid(format!(
                "need at least {MIN_POINTS} points, got {n}"
            )));
        }
        Ok(Self { x_min, x_max, n })
    }

    /// Symmetric box [-half_width, half_width].
    pub fn symmetric(half_width: f64, n: usize) -> Result<Self> {
        Self::new(-half_width, half_width, n)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.x_max
        } else {
            self.x_min + i as f64 * self.spacing()
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Indices of the central 90% of the box, where stencil truncation
    /// from the Dirichlet padding does not reach.
    pub fn interior(&self) -> std::ops::Range<usize> {
        let skip = ((self.n as f64) * 0.05).ceil() as usize;
        skip..self.n - skip
    }

    /// Composite Simpson weights; when the number of intervals is odd the
    /// last cell falls back to the trapezoid rule.
    pub fn simpson_weights(&self) -> Vec<f64> {
        let h = self.spacing();
        let n = self.n;
        let mut w = vec![0.0; n];
        let intervals = n - 1;
        let simpson_end = intervals - intervals % 2;
        for i in (0..simpson_end).step_by(2) {
            w[i] += h / 3.0;
            w[i + 1] += 4.0 * h / 3.0;
            w[i + 2] += h / 3.0;
        }
        if simpson_end < intervals {
            w[n - 2] += 0.5 * h;
            w[n - 1] += 0.5 * h;
        }
        w
    }

    /// Index of the cell [x_i, x_{i+1}] containing `x` (clamped to the box).
    pub fn cell_of(&self, x: f64) -> usize {
        let t = ((x - self.x_min) / self.spacing()).floor();
        (t.max(0.0) as usize).min(self.n - 2)
    }
}

/// Real samples on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self { grid, values: vec![0.0; grid.len()] }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.x(i))).collect();
        Self { grid, values }
    }

    pub fn norm(&self) -> f64 {
        inner_product(self, self).map(|v| v.max(0.0).sqrt()).unwrap_or(f64::NAN)
    }

    /// Norm restricted to the interior window of the grid (trapezoid weights).
    pub fn interior_norm(&self) -> f64 {
        let h = self.grid.spacing();
        let ss: f64 = self.values[self.grid.interior()].iter().map(|v| v * v).sum();
        (ss * h).sqrt()
    }

    pub fn scale(&mut self, c: f64) {
        self.values.iter_mut().for_each(|v| *v *= c);
    }

    pub fn axpy(&mut self, a: f64, other: &GridFunction) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        for (v, o) in self.values.iter_mut().zip(&other.values) {
            *v += a * o;
        }
        Ok(())
    }
}

/// Simpson inner product of two real grid functions.
pub fn inner_product(f: &GridFunction, g: &GridFunction) -> Result<f64> {
    if f.grid != g.grid {
        return Err(Error::GridMismatch);
    }
    let w = f.grid.simpson_weights();
    Ok(w.iter()
        .zip(f.values.iter().zip(&g.values))
        .map(|(w, (a, b))| w * a * b)
        .sum())
}

/// Cumulative integral F(x_i) = ∫_{x0}^{x_i} f, built from eight-point
/// Gauss-Legendre panels on each cell so that F(x0) = 0 exactly.
pub fn cumulative_integral_fn(
    grid: &Grid,
    x0: f64,
    f: impl Fn(f64) -> Result<f64>,
) -> Result<GridFunction> {
    if !(grid.x_min()..=grid.x_max()).contains(&x0) {
        return Err(Error::Domain { x: x0, reason: "anchor outside the grid".into() });
    }
    let n = grid.len();
    let mut cell = vec![0.0; n - 1];
    for (i, c) in cell.iter_mut().enumerate() {
        *c = gl8(grid.x(i), grid.x(i + 1), &f)?;
    }
    let k = grid.cell_of(x0);
    let (a, b) = (grid.x(k), grid.x(k + 1));
    // F(x_k) and F(x_{k+1}) relative to the anchor inside cell k.
    let left = -gl8(a, x0, &f)?;
    let right = gl8(x0, b, &f)?;
    let mut values = vec![0.0; n];
    values[k] = left;
    values[k + 1] = right;
    for i in (0..k).rev() {
        values[i] = values[i + 1] - cell[i];
    }
    for i in k + 2..n {
        values[i] = values[i - 1] + cell[i - 1];
    }
    Ok(GridFunction { grid: *grid, values })
}

/// Cumulative integral of an expression on the grid.
pub fn cumulative_integral(
    f: &crate::expr::Expr,
    x0: f64,
    grid: &Grid,
) -> Result<GridFunction> {
    cumulative_integral_fn(grid, x0, |x| f.eval(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_exact() {
        let g = Grid::new(0.0, 1.0, 16).unwrap();
        assert_eq!(g.x(0), 0.0);
        assert_eq!(g.x(15), 1.0);
        assert!((g.spacing() - 1.0 / 15.0).abs() < 1e-16);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::new(1.0, 1.0, 32).is_err());
        assert!(Grid::new(2.0, 1.0, 32).is_err());
        assert!(Grid::new(0.0, 1.0, 15).is_err());
        assert!(Grid::new(f64::NAN, 1.0, 32).is_err());
    }

    #[test]
    fn simpson_exact_for_cubics_odd_points() {
        for n in [17usize, 65] {
            let g = Grid::new(-1.0, 2.0, n).unwrap();
            let f = GridFunction::from_fn(g, |x| x * x * x - 2.0 * x + 1.0);
            let one = GridFunction::from_fn(g, |_| 1.0);
            let v = inner_product(&f, &one).unwrap();
            let exact = (16.0 - 1.0) / 4.0 - (4.0 - 1.0) + 3.0;
            assert!((v - exact).abs() < 1e-12, "n={n}: {v} vs {exact}");
        }
    }

    #[test]
    fn even_point_count_uses_trapezoid_tail() {
        let g = Grid::new(0.0, 1.0, 18).unwrap();
        let w = g.simpson_weights();
        let h = g.spacing();
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!((w[17] - 0.5 * h).abs() < 1e-16);
        // Exact for linear functions.
        let f = GridFunction::from_fn(g, |x| 3.0 * x - 1.0);
        let one = GridFunction::from_fn(g, |_| 1.0);
        assert!((inner_product(&f, &one).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn mismatched_grids_rejected() {
        let a = GridFunction::zeros(Grid::new(0.0, 1.0, 16).unwrap());
        let b = GridFunction::zeros(Grid::new(0.0, 1.0, 17).unwrap());
        assert_eq!(inner_product(&a, &b), Err(Error::GridMismatch));
    }

    #[test]
    fn cumulative_integral_of_cosine() {
        let g = Grid::new(-3.0, 4.0, 71).unwrap();
        let f = cumulative_integral_fn(&g, 0.3, |x| Ok(x.cos())).unwrap();
        for i in 0..g.len() {
            let exact = g.x(i).sin() - 0.3f64.sin();
            assert!((f.values[i] - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn gaussian_norm() {
        let g = Grid::symmetric(10.0, 513).unwrap();
        let f = GridFunction::from_fn(g, |x| (-x * x / 2.0).exp());
        let exact = std::f64::consts::PI.sqrt();
        assert!((f.norm().powi(2) - exact).abs() < 1e-10);
    }
}
