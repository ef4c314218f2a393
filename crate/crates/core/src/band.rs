//! Banded matrices: storage, products, LU with partial pivoting, and
//! reduction of symmetric band matrices to tridiagonal form.

use crate::error::{Error, Result};

/// General band matrix with `kl` sub- and `ku` super-diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        Self { n, kl, ku, data: vec![0.0; n * (kl + ku + 1)] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn lower_bandwidth(&self) -> usize {
        self.kl
    }

    pub fn upper_bandwidth(&self) -> usize {
        self.ku
    }

    fn in_band(&self, i: usize, j: usize) -> bool {
        j + self.kl >= i && j <= i + self.ku
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        i * (self.kl + self.ku + 1) + (j + self.kl - i)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i < self.n && j < self.n && self.in_band(i, j) {
            self.data[self.idx(i, j)]
        } else {
            0.0
        }
    }

    /// Adds `v` at `(i, j)`; panics outside the band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j) && i < self.n && j < self.n, "({i},{j}) outside band");
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for (i, yi) in y.iter_mut().enumerate() {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            let mut s = 0.0;
            for (j, xj) in x.iter().enumerate().take(hi + 1).skip(lo) {
                s += self.data[self.idx(i, j)] * xj;
            }
            *yi = s;
        }
        y
    }

    /// Largest `|A_ij - A_ji|`.
    pub fn max_asymmetry(&self) -> f64 {
        let b = self.kl.max(self.ku);
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in i + 1..(i + b + 1).min(self.n) {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// LU factorization of `A - shift·I`.
    pub fn lu_shifted(&self, shift: f64) -> BandLu {
        BandLu::factor(self, shift)
    }
}

/// Banded LU with partial pivoting (upper bandwidth grows to `kl + ku`).
pub struct BandLu {
    n: usize,
    kl: usize,
    width: usize,
    /// Row `k` holds columns `k .. k + width` of U.
    u: Vec<f64>,
    l: Vec<f64>,
    piv: Vec<usize>,
}

impl BandLu {
    fn factor(a: &BandMatrix, shift: f64) -> Self {
        let n = a.n;
        let kl = a.kl;
        let width = kl + a.ku + 1;
        // Position i stores the absolute columns [i - kl, i + kl + ku].
        let w = 2 * kl + a.ku + 1;
        let mut rows: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let mut r = vec![0.0; w];
                for j in i.saturating_sub(kl)..(i + a.ku + 1).min(n) {
                    r[j + kl - i] = a.get(i, j) - if i == j { shift } else { 0.0 };
                }
                r
            })
            .collect();
        let slot = |pos: usize, col: usize| -> Option<usize> {
            let k = col + kl;
            if k < pos || k - pos >= w {
                None
            } else {
                Some(k - pos)
            }
        };
        let tiny = f64::EPSILON * a.max_abs().max(shift.abs()).max(1.0);
        let mut l = vec![0.0; n * kl.max(1)];
        let mut piv = vec![0; n];
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = rows[k][kl].abs();
            for r in k + 1..=last {
                let v = slot(r, k).map_or(0.0, |s| rows[r][s].abs());
                if v > best {
                    best = v;
                    p = r;
                }
            }
            piv[k] = p;
            if p != k {
                // Swap rows k and p, re-indexing each to its new window.
                let (rk, rp) = (rows[k].clone(), rows[p].clone());
                let mut nk = vec![0.0; w];
                let mut np = vec![0.0; w];
                for col in k.saturating_sub(0)..(k + w).min(n + kl) {
                    if let (Some(src), Some(dst)) = (slot(p, col), slot(k, col)) {
                        nk[dst] = rp[src];
                    }
                    if let (Some(src), Some(dst)) = (slot(k, col), slot(p, col)) {
                        np[dst] = rk[src];
                    }
                }
                rows[k] = nk;
                rows[p] = np;
            }
            if rows[k][kl].abs() < tiny {
                rows[k][kl] = if rows[k][kl] < 0.0 { -tiny } else { tiny };
            }
            let pivot = rows[k][kl];
            for r in k + 1..=last {
                let Some(rk) = slot(r, k) else { continue };
                let m = rows[r][rk] / pivot;
                l[k * kl.max(1) + (r - k - 1)] = m;
                rows[r][rk] = 0.0;
                if m == 0.0 {
                    continue;
                }
                for c in k + 1..(k + width).min(n) {
                    let v = rows[k][c + kl - k];
                    if v != 0.0 {
                        let dst = slot(r, c).expect("fill stays inside the pivoted band");
                        rows[r][dst] -= m * v;
                    }
                }
            }
        }
        let mut u = vec![0.0; n * width];
        for k in 0..n {
            for c in k..(k + width).min(n) {
                u[k * width + (c - k)] = rows[k][c + kl - k];
            }
        }
        Self { n, kl, width, u, l, piv }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let kl = self.kl;
        let mut y = b.to_vec();
        for k in 0..n {
            y.swap(k, self.piv[k]);
            for r in k + 1..(k + kl + 1).min(n) {
                y[r] -= self.l[k * kl.max(1) + (r - k - 1)] * y[k];
            }
        }
        for k in (0..n).rev() {
            let mut s = y[k];
            for c in k + 1..(k + self.width).min(n) {
                s -= self.u[k * self.width + (c - k)] * y[c];
            }
            y[k] = s / self.u[k * self.width];
        }
        y
    }
}

/// Symmetric lower-band storage with one extra diagonal for bulges.
struct SymBand {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl SymBand {
    fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if i - j > self.bw {
            0.0
        } else {
            self.data[j * (self.bw + 1) + (i - j)]
        }
    }

    fn set(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if i - j > self.bw {
            debug_assert!(v.abs() < 1e-8, "fill outside band at ({i},{j}): {v}");
            return;
        }
        self.data[j * (self.bw + 1) + (i - j)] = v;
    }

    /// Applies the plane rotation in rows/cols (p, p+1) that zeros
    /// entry (p+1, c) against (p, c).
    fn rotate(&mut self, p: usize, c: usize) {
        let q = p + 1;
        let a = self.get(p, c);
        let b = self.get(q, c);
        if b == 0.0 {
            return;
        }
        let r = a.hypot(b);
        let (cs, sn) = (a / r, b / r);
        let lo = p.saturating_sub(self.bw + 1);
        let hi = (q + self.bw + 1).min(self.n - 1);
        for k in lo..=hi {
            if k == p || k == q {
                continue;
            }
            let (x, y) = (self.get(p, k), self.get(q, k));
            self.set(p, k, cs * x + sn * y);
            self.set(q, k, -sn * x + cs * y);
        }
        let (app, aqq, apq) = (self.get(p, p), self.get(q, q), self.get(p, q));
        self.set(p, p, cs * cs * app + 2.0 * cs * sn * apq + sn * sn * aqq);
        self.set(q, q, sn * sn * app - 2.0 * cs * sn * apq + cs * cs * aqq);
        self.set(p, q, (cs * cs - sn * sn) * apq + cs * sn * (aqq - app));
        self.set(q, c, 0.0);
    }
}

/// Orthogonally reduces a symmetric band matrix to tridiagonal form by
/// Givens rotations with bulge chasing. Returns (diagonal, off-diagonal).
pub fn tridiagonalize(a: &BandMatrix) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = a.n;
    let b = a.kl.max(a.ku);
    let asym = a.max_asymmetry();
    if asym > 1e-10 * a.max_abs().max(1.0) {
        return Err(Error::NotSymmetric(asym));
    }
    let mut s = SymBand { n, bw: b + 1, data: vec![0.0; n * (b + 2)] };
    for j in 0..n {
        for i in j..(j + b + 1).min(n) {
            s.set(i, j, 0.5 * (a.get(i, j) + a.get(j, i)));
        }
    }
    if b > 1 {
        for j in 0..n.saturating_sub(2) {
            for r in (2..=b).rev() {
                let i = j + r;
                if i >= n {
                    continue;
                }
                s.rotate(i - 1, j);
                // Chase the bulge created at (i - 1 + b + 1, i - 1).
                let mut row = i - 1 + b + 1;
                let mut col = i - 1;
                while row < n {
                    s.rotate(row - 1, col);
                    col = row - 1;
                    row = col + b + 1;
                }
            }
        }
    }
    let d = (0..n).map(|i| s.get(i, i)).collect();
    let e = (0..n - 1).map(|i| s.get(i + 1, i)).collect();
    Ok((d, e))
}

/// Number of eigenvalues of the tridiagonal matrix below `sigma`.
pub fn sturm_count(d: &[f64], e: &[f64], sigma: f64) -> usize {
    let tiny = f64::MIN_POSITIVE.sqrt();
    let mut count = 0;
    let mut q = d[0] - sigma;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..d.len() {
        let qq = if q.abs() < tiny { tiny.copysign(q) } else { q };
        q = d[i] - sigma - e[i - 1] * e[i - 1] / qq;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// The `k` smallest eigenvalues of a symmetric tridiagonal matrix by bisection.
pub fn tridiagonal_lowest(d: &[f64], e: &[f64], k: usize) -> Vec<f64> {
    let n = d.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { e[i - 1].abs() } else { 0.0 } + if i + 1 < n { e[i].abs() } else { 0.0 };
        lo = lo.min(d[i] - r);
        hi = hi.max(d[i] + r);
    }
    let span = (hi - lo).max(1.0);
    (0..k.min(n))
        .map(|idx| {
            let (mut a, mut b) = (lo - 1e-3 * span, hi + 1e-3 * span);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if sturm_count(d, e, mid) > idx {
                    b = mid;
                } else {
                    a = mid;
                }
                if b - a <= 2.0 * f64::EPSILON * a.abs().max(b.abs()) + f64::MIN_POSITIVE {
                    break;
                }
            }
            0.5 * (a + b)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn random_band(n: usize, b: usize, seed: u64) -> BandMatrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut m = BandMatrix::zeros(n, b, b);
        for i in 0..n {
            for j in i..(i + b + 1).min(n) {
                let v: f64 = rng.gen_range(-1.0..1.0);
                m.add(i, j, v);
                if i != j {
                    m.add(j, i, v);
                }
            }
        }
        m
    }

    fn dense(m: &BandMatrix) -> DMatrix<f64> {
        DMatrix::from_fn(m.dim(), m.dim(), |i, j| m.get(i, j))
    }

    #[test]
    fn lu_solves_indefinite_system() {
        let m = random_band(40, 3, 7);
        let x: Vec<f64> = (0..40).map(|i| (i as f64 * 0.37).sin()).collect();
        let b = m.matvec(&x);
        let lu = m.lu_shifted(0.0);
        let y = lu.solve(&b);
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn tridiagonal_reduction_preserves_spectrum() {
        for (n, b) in [(30, 4), (25, 1), (41, 7)] {
            let m = random_band(n, b, n as u64);
            let (d, e) = tridiagonalize(&m).unwrap();
            let got = tridiagonal_lowest(&d, &e, n);
            let mut want: Vec<f64> = dense(&m).symmetric_eigen().eigenvalues.iter().copied().collect();
            want.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() < 1e-11, "n={n} b={b}: {g} vs {w}");
            }
        }
    }

    #[test]
    fn asymmetric_rejected() {
        let mut m = BandMatrix::zeros(20, 1, 1);
        m.add(0, 1, 1.0);
        assert!(matches!(tridiagonalize(&m), Err(Error::NotSymmetric(_))));
    }
}
