//! Numerical evaluation, memoized per node across a batch of points.

use std::collections::HashMap;
use std::rc::Rc;

use super::{Expr, Kind};
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};

/// Evaluates expressions on a fixed set of points, sharing results for
/// nodes that appear several times in the expression graph.
pub struct Evaluator<'a> {
    xs: &'a [f64],
    memo: HashMap<usize, (Expr, Rc<Vec<f64>>)>,
}

impl<'a> Evaluator<'a> {
    pub fn new(xs: &'a [f64]) -> Self {
        Self { xs, memo: HashMap::new() }
    }

    pub fn eval(&mut self, e: &Expr) -> Result<Rc<Vec<f64>>> {
        if let Some((_, v)) = self.memo.get(&e.ptr()) {
            return Ok(v.clone());
        }
        let v = Rc::new(self.compute(e)?);
        self.memo.insert(e.ptr(), (e.clone(), v.clone()));
        Ok(v)
    }

    fn compute(&mut self, e: &Expr) -> Result<Vec<f64>> {
        let n = self.xs.len();
        let out = match e.kind() {
            Kind::Const(c) => vec![*c; n],
            Kind::Var => self.xs.to_vec(),
            Kind::Sum { constant, terms } => {
                let mut acc = vec![*constant; n];
                for (c, t) in terms {
                    let v = self.eval(t)?;
                    for (a, b) in acc.iter_mut().zip(v.iter()) {
                        *a += c * b;
                    }
                }
                acc
            }
            Kind::Product { coef, factors } => {
                let mut acc = vec![*coef; n];
                for (b, p) in factors {
                    let v = self.eval(b)?;
                    for (i, (a, bv)) in acc.iter_mut().zip(v.iter()).enumerate() {
                        if *p < 0 && *bv == 0.0 {
                            return Err(Error::Domain {
                                x: self.xs[i],
                                reason: "division by zero".into(),
                            });
                        }
                        *a *= bv.powi(*p);
                    }
                }
                acc
            }
            Kind::Exp(a) => self.eval(a)?.iter().map(|v| v.exp()).collect(),
            Kind::Erf(a) => {
                self.eval(a)?.iter().map(|v| libm::erf(*v)).collect()
            }
            Kind::Integral(t) => {
                let mut out = Vec::with_capacity(n);
                for &x in self.xs {
                    out.push(t.eval(x)?);
                }
                out
            }
            Kind::Painleve { table, arg, derivative } => {
                let z = self.eval(arg)?;
                let mut out = Vec::with_capacity(n);
                for (i, &zi) in z.iter().enumerate() {
                    let v = if *derivative { table.eval_fp(zi) } else { table.eval_f(zi) };
                    out.push(v.map_err(|_| Error::Domain {
                        x: self.xs[i],
                        reason: format!("Painleve table does not cover z = {zi}"),
                    })?);
                }
                out
            }
            Kind::Derivative { .. } => {
                let m = e.materialize();
                self.eval(&m)?.as_ref().clone()
            }
        };
        for (i, v) in out.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite { x: self.xs[i], value: *v });
            }
        }
        Ok(out)
    }
}

impl Expr {
    pub fn eval(&self, x: f64) -> Result<f64> {
        let xs = [x];
        Ok(Evaluator::new(&xs).eval(self)?[0])
    }

    pub fn eval_many(&self, xs: &[f64]) -> Result<Vec<f64>> {
        Ok(Evaluator::new(xs).eval(self)?.as_ref().clone())
    }

    pub fn sample(&self, grid: &Grid) -> Result<GridFunction> {
        let xs = grid.points();
        Ok(GridFunction { grid: *grid, values: self.eval_many(&xs)? })
    }
}
