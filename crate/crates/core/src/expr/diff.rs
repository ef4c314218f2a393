//! Symbolic differentiation with respect to `x`.

use super::{product_of, sum_of, Expr, Kind};

impl Expr {
    /// Exact derivative `d/dx`, memoized on the node.
    pub fn diff(&self) -> Expr {
        self.0.derivative.get_or_init(|| self.diff_uncached()).clone()
    }

    /// `k`-th derivative.
    pub fn diff_n(&self, k: usize) -> Expr {
        let mut e = self.clone();
        for _ in 0..k {
            e = e.diff();
        }
        e
    }

    fn diff_uncached(&self) -> Expr {
        match self.kind() {
            Kind::Const(_) => Expr::zero(),
            Kind::Var => Expr::one(),
            Kind::Sum { terms, .. } => {
                sum_of(0.0, terms.iter().map(|(c, t)| (*c, t.diff())).collect())
            }
            Kind::Product { coef, factors } => {
                let mut parts = Vec::with_capacity(factors.len());
                for (i, (b, p)) in factors.iter().enumerate() {
                    let db = b.diff();
                    if db.is_zero() {
                        continue;
                    }
                    let mut f: Vec<(Expr, i32)> = factors
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != i)
                        .map(|(_, bp)| bp.clone())
                        .collect();
                    f.push((b.clone(), p - 1));
                    f.push((db, 1));
                    parts.push((1.0, product_of(coef * *p as f64, f)));
                }
                sum_of(0.0, parts)
            }
            Kind::Exp(a) => self * a.diff(),
            Kind::Erf(a) => {
                let g = (-(a * a)).exp();
                g * a.diff() * (2.0 / std::f64::consts::PI.sqrt())
            }
            Kind::Integral(t) => t.integrand().clone(),
            Kind::Painleve { table, arg, derivative: false } => {
                Expr::painleve(table.clone(), arg.clone(), true) * arg.diff()
            }
            Kind::Painleve { table, arg, derivative: true } => {
                // f'' from the Painlevé IV equation itself.
                let f = Expr::painleve(table.clone(), arg.clone(), false);
                let fp = self.clone();
                let (alpha, beta) = (table.alpha(), table.beta());
                let rhs = (&fp * &fp) / (&f * 2.0)
                    + f.powi(3) * 1.5
                    + arg * f.powi(2) * 4.0
                    + (arg * arg - alpha) * &f * 2.0
                    + beta * f.recip();
                rhs * arg.diff()
            }
            Kind::Derivative { inner, order, .. } => inner.derivative(order + 1),
        }
    }
}
