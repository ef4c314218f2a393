//! One-dimensional Schrödinger operators on a box and their low spectrum;
//! separable planar spectra assembled from two axes.

use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::band::{tridiagonal_lowest, tridiagonalize, BandMatrix};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::grid::{inner_product, Grid, GridFunction};
use crate::operator::DiffOperator;

/// Largest number of levels requested from one solve.
pub const MAX_LEVELS: usize = 40;
const SEED: u64 = 0x5eed_cafe;

/// `H = -½∂² + V`.
pub fn hamiltonian(v: &Expr) -> DiffOperator {
    DiffOperator::hamiltonian(v)
}

/// Lowest eigenpairs of a discretized Hamiltonian.
#[derive(Debug, Clone)]
pub struct SpectrumResult {
    pub grid: Grid,
    pub energies: Vec<f64>,
    pub states: Vec<GridFunction>,
    /// `‖(H - E)ψ‖ / ‖ψ‖` for each pair (discrete operator, full box).
    pub residuals: Vec<f64>,
}

impl SpectrumResult {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// Estimated absolute accuracy of the computed eigenvalues.
    pub fn accuracy(&self) -> f64 {
        self.residuals.iter().fold(0.0f64, |m, r| m.max(*r)).max(1e-12)
    }
}

fn normalize_sign(v: &mut [f64]) {
    let peak = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-3 * peak) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// The `k` lowest eigenpairs of `h` on `grid` with zero Dirichlet data.
///
/// The band matrix is reduced to tridiagonal form, eigenvalues found by
/// Sturm bisection, and eigenvectors by inverse iteration on the band
/// matrix; energies are the final Rayleigh quotients.
pub fn eigensolve(h: &DiffOperator, grid: &Grid, k: usize) -> Result<SpectrumResult> {
    let limit = MAX_LEVELS.min(grid.interior().len());
    if k == 0 || k > limit {
        return Err(Error::InvalidParameter(format!(
            "number of levels must be in 1..={limit} on a grid of {} points, got {k}",
            grid.len()
        )));
    }
    let m = h.to_matrix(grid)?;
    eigensolve_matrix(&m, grid, k)
}

pub fn eigensolve_matrix(m: &BandMatrix, grid: &Grid, k: usize) -> Result<SpectrumResult> {
    let (d, e) = tridiagonalize(m)?;
    let approx = tridiagonal_lowest(&d, &e, k);
    let scale = m.max_abs().max(1.0);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(SEED);
    let n = m.dim();
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut energies = Vec::with_capacity(k);
    let mut residuals = Vec::with_capacity(k);
    for (idx, &lam) in approx.iter().enumerate() {
        let lu = m.lu_shifted(lam);
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let close: Vec<usize> = (0..idx)
            .filter(|&j| (approx[j] - lam).abs() < 1e-7 * scale.sqrt())
            .collect();
        for _ in 0..3 {
            for &j in &close {
                let c = dot(&v, &vectors[j]);
                v.iter_mut().zip(&vectors[j]).for_each(|(a, b)| *a -= c * b);
            }
            let nv = dot(&v, &v).sqrt();
            if !(nv.is_finite() && nv > 0.0) {
                return Err(Error::Convergence(format!("inverse iteration broke down at level {idx}")));
            }
            v.iter_mut().for_each(|a| *a /= nv);
            v = lu.solve(&v);
        }
        for &j in &close {
            let c = dot(&v, &vectors[j]);
            v.iter_mut().zip(&vectors[j]).for_each(|(a, b)| *a -= c * b);
        }
        let nv = dot(&v, &v).sqrt();
        v.iter_mut().for_each(|a| *a /= nv);
        let hv = m.matvec(&v);
        let rq = dot(&v, &hv);
        let res = hv.iter().zip(&v).map(|(a, b)| (a - rq * b).powi(2)).sum::<f64>().sqrt();
        if !rq.is_finite() || (rq - lam).abs() > 1e-6 * (1.0 + lam.abs()) {
            return Err(Error::Convergence(format!(
                "level {idx}: Rayleigh quotient {rq} disagrees with bisection value {lam}"
            )));
        }
        energies.push(rq);
        residuals.push(res);
        vectors.push(v);
    }
    let states = vectors
        .into_iter()
        .map(|mut v| {
            normalize_sign(&mut v);
            let mut f = GridFunction { grid: *grid, values: v };
            let nrm = f.norm();
            f.scale(1.0 / nrm);
            f
        })
        .collect();
    Ok(SpectrumResult { grid: *grid, energies, states, residuals })
}

/// Overlap matrix `⟨ψ_i, ψ_j⟩` deviation from the identity.
pub fn orthonormality_defect(s: &SpectrumResult) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for i in 0..s.len() {
        for j in 0..=i {
            let v = inner_product(&s.states[i], &s.states[j])?;
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((v - target).abs());
        }
    }
    Ok(worst)
}

/// A level of a separable planar Hamiltonian `H_x + H_y` with its product
/// states `(i, j)`.
#[derive(Debug, Clone, Serialize)]
pub struct Multiplet {
    pub energy: f64,
    pub members: Vec<(usize, usize)>,
}

/// Default energy tolerance for merging levels into one multiplet.
pub fn default_degeneracy_tol(e: f64) -> f64 {
    1e-6 * e.abs().max(1.0)
}

/// Groups `E_i + E_j` into multiplets. Only levels that are complete
/// (no missing partners beyond the computed axis spectra) are returned.
/// `tol = None` uses [`default_degeneracy_tol`]; `Some(0.0)` keeps every
/// product state separate.
pub fn separable_2d(
    sx: &SpectrumResult,
    sy: &SpectrumResult,
    tol: Option<f64>,
) -> Result<Vec<Multiplet>> {
    let accuracy = sx.accuracy().max(sy.accuracy());
    if let Some(t) = tol {
        if t > 0.0 && t < accuracy {
            return Err(Error::DegeneracyTolerance { tol: t, accuracy });
        }
    }
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, ex) in sx.energies.iter().enumerate() {
        for (j, ey) in sy.energies.iter().enumerate() {
            pairs.push((ex + ey, i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    // Energies above this may have partners that were not computed.
    let ceiling = (sx.energies.last().unwrap() + sy.energies[0])
        .min(sx.energies[0] + sy.energies.last().unwrap());
    let tol_of = |e: f64| match tol {
        None => default_degeneracy_tol(e),
        Some(t) => t,
    };
    let mut out: Vec<Multiplet> = Vec::new();
    for (e, i, j) in pairs {
        let merge = match out.last() {
            Some(m) => tol_of(e) > 0.0 && (e - m.energy).abs() <= tol_of(e),
            None => false,
        };
        if merge {
            let m = out.last_mut().unwrap();
            m.members.push((i, j));
            let count = m.members.len() as f64;
            m.energy += (e - m.energy) / count;
        } else {
            out.push(Multiplet { energy: e, members: vec![(i, j)] });
        }
    }
    out.retain(|m| m.energy <= ceiling + tol_of(m.energy));
    Ok(out)
}
