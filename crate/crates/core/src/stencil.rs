//! Centered finite-difference weights (Fornberg's algorithm).

/// Formal accuracy order of every stencil.
pub const ACCURACY: usize = 8;
/// Highest derivative order available on small grids.
pub const MAX_ORDER_SMALL_GRID: usize = 8;
/// Grid size from which higher derivative orders are allowed.
pub const LARGE_GRID: usize = 1024;

/// Half-width `p` of the centered stencil for the k-th derivative; the
/// stencil has `2p + 1` points.
pub fn half_width(k: usize) -> usize {
    if k == 0 {
        0
    } else {
        (k + 1) / 2 + ACCURACY / 2 - 1
    }
}

/// Weights for `d^k/dx^k` at 0 from the nodes `offsets` (in units of h).
pub fn fornberg(k: usize, offsets: &[f64]) -> Vec<f64> {
    let n = offsets.len();
    let mut c = vec![vec![0.0; k + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = offsets[0];
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(k);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = offsets[i];
        for j in 0..i {
            let c3 = offsets[i] - offsets[j];
            c2 *= c3;
            if j == i - 1 {
                for m in (1..=mn).rev() {
                    c[i][m] = c1 * (m as f64 * c[i - 1][m - 1] - c5 * c[i - 1][m]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for m in (1..=mn).rev() {
                c[j][m] = (c4 * c[j][m] - m as f64 * c[j][m - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|row| row[k]).collect()
}

/// Centered weights for the k-th derivative with grid spacing `h`,
/// indexed from offset `-p` to `+p`.
pub fn centered(k: usize, h: f64) -> Vec<f64> {
    let p = half_width(k) as i64;
    let offsets: Vec<f64> = (-p..=p).map(|j| j as f64).collect();
    let scale = h.powi(k as i32);
    fornberg(k, &offsets).into_iter().map(|w| w / scale).collect()
}
