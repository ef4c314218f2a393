//! Immutable scalar expressions in one real variable `x`.
//!
//! Expressions are kept in a light canonical form: sums and products are
//! flattened, constants folded, like terms and like factors merged, and
//! products of exponentials combined into a single exponential. That is
//! enough for most cancellations that occur when composing first-order
//! factors; anything beyond is left to numerical comparison.

mod diff;
mod eval;
mod fmt;
pub mod table;

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, OnceLock};

use crate::error::Result;
use crate::painleve::P4Table;
pub use eval::Evaluator;
pub use table::IntegralTable;

/// Relative size below which a merged coefficient counts as cancelled.
const CANCEL_TOL: f64 = 1e-14;
/// Largest sum that is distributed over a product.
const MAX_EXPAND_TERMS: usize = 8;

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

pub(crate) fn fresh_id() -> u64 {
    NEXT_ID.fetch_add(1, Ordering::Relaxed)
}

/// Shared handle to an immutable expression node.
#[derive(Clone)]
pub struct Expr(Arc<Node>);

pub(crate) struct Node {
    kind: Kind,
    hash: u64,
    derivative: OnceLock<Expr>,
}

pub(crate) enum Kind {
    Const(f64),
    Var,
    /// `constant + Σ coef·term`; terms are never constants, sums, or
    /// products carrying a coefficient.
    Sum { constant: f64, terms: Vec<(f64, Expr)> },
    /// `coef · Π base^power`; bases are never constants or products.
    Product { coef: f64, factors: Vec<(Expr, i32)> },
    Exp(Expr),
    Erf(Expr),
    /// Tabulated antiderivative `∫_{anchor}^{x} g`.
    Integral(Arc<IntegralTable>),
    /// Numerical Painlevé IV transcendent (or its derivative) at `arg`.
    Painleve { table: Arc<P4Table>, arg: Expr, derivative: bool },
    /// Lazy `order`-fold derivative of `inner`.
    Derivative { inner: Expr, order: u32, materialized: OnceLock<Expr> },
}

fn hash_f64(h: &mut DefaultHasher, v: f64) {
    let v = if v == 0.0 { 0.0 } else { v };
    v.to_bits().hash(h);
}

impl Kind {
    fn structural_hash(&self) -> u64 {
        let mut h = DefaultHasher::new();
        match self {
            Kind::Const(v) => {
                0u8.hash(&mut h);
                hash_f64(&mut h, *v);
            }
            Kind::Var => 1u8.hash(&mut h),
            Kind::Sum { constant, terms } => {
                2u8.hash(&mut h);
                hash_f64(&mut h, *constant);
                for (c, t) in terms {
                    hash_f64(&mut h, *c);
                    t.0.hash.hash(&mut h);
                }
            }
            Kind::Product { coef, factors } => {
                3u8.hash(&mut h);
                hash_f64(&mut h, *coef);
                for (b, p) in factors {
                    b.0.hash.hash(&mut h);
                    p.hash(&mut h);
                }
            }
            Kind::Exp(a) => {
                4u8.hash(&mut h);
                a.0.hash.hash(&mut h);
            }
            Kind::Erf(a) => {
                5u8.hash(&mut h);
                a.0.hash.hash(&mut h);
            }
            Kind::Integral(t) => {
                6u8.hash(&mut h);
                t.id().hash(&mut h);
            }
            Kind::Painleve { table, arg, derivative } => {
                7u8.hash(&mut h);
                table.id().hash(&mut h);
                arg.0.hash.hash(&mut h);
                derivative.hash(&mut h);
            }
            Kind::Derivative { inner, order, .. } => {
                8u8.hash(&mut h);
                inner.0.hash.hash(&mut h);
                order.hash(&mut h);
            }
        }
        h.finish()
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        if Arc::ptr_eq(&self.0, &other.0) {
            return true;
        }
        if self.0.hash != other.0.hash {
            return false;
        }
        match (&self.0.kind, &other.0.kind) {
            (Kind::Const(a), Kind::Const(b)) => a == b,
            (Kind::Var, Kind::Var) => true,
            (Kind::Sum { constant: a, terms: ta }, Kind::Sum { constant: b, terms: tb }) => {
                a == b && ta == tb
            }
            (Kind::Product { coef: a, factors: fa }, Kind::Product { coef: b, factors: fb }) => {
                a == b && fa == fb
            }
            (Kind::Exp(a), Kind::Exp(b)) | (Kind::Erf(a), Kind::Erf(b)) => a == b,
            (Kind::Integral(a), Kind::Integral(b)) => a.id() == b.id(),
            (
                Kind::Painleve { table: ta, arg: aa, derivative: da },
                Kind::Painleve { table: tb, arg: ab, derivative: db },
            ) => ta.id() == tb.id() && da == db && aa == ab,
            (
                Kind::Derivative { inner: a, order: oa, .. },
                Kind::Derivative { inner: b, order: ob, .. },
            ) => oa == ob && a == b,
            _ => false,
        }
    }
}

impl Eq for Expr {}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.hash.hash(state);
    }
}

impl Expr {
    fn from_kind(kind: Kind) -> Self {
        let hash = kind.structural_hash();
        Expr(Arc::new(Node { kind, hash, derivative: OnceLock::new() }))
    }

    pub(crate) fn kind(&self) -> &Kind {
        &self.0.kind
    }

    pub(crate) fn ptr(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn structural_hash(&self) -> u64 {
        self.0.hash
    }

    pub fn constant(c: f64) -> Self {
        Self::from_kind(Kind::Const(if c == 0.0 { 0.0 } else { c }))
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    /// The independent variable.
    pub fn x() -> Self {
        Self::from_kind(Kind::Var)
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self.kind() {
            Kind::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_constant() == Some(0.0)
    }

    pub fn exp(&self) -> Self {
        if let Some(c) = self.as_constant() {
            return Self::constant(c.exp());
        }
        Self::from_kind(Kind::Exp(self.clone()))
    }

    pub fn erf(&self) -> Self {
        if let Some(c) = self.as_constant() {
            return Self::constant(libm::erf(c));
        }
        Self::from_kind(Kind::Erf(self.clone()))
    }

    pub fn powi(&self, p: i32) -> Self {
        product_of(1.0, vec![(self.clone(), p)])
    }

    pub fn recip(&self) -> Self {
        self.powi(-1)
    }

    pub fn scale(&self, c: f64) -> Self {
        sum_of(0.0, vec![(c, self.clone())])
    }

    /// Antiderivative `∫_{anchor}^{x} integrand`, tabulated on [lo, hi].
    pub fn integral(integrand: &Expr, anchor: f64, lo: f64, hi: f64) -> Result<Self> {
        let table = IntegralTable::build(integrand.clone(), anchor, lo, hi, table::DEFAULT_STEP)?;
        Ok(Self::from_kind(Kind::Integral(Arc::new(table))))
    }

    pub(crate) fn painleve(table: Arc<P4Table>, arg: Expr, derivative: bool) -> Self {
        Self::from_kind(Kind::Painleve { table, arg, derivative })
    }

    /// Lazy derivative wrapper, expanded on demand.
    pub fn derivative(&self, order: u32) -> Self {
        if order == 0 {
            return self.clone();
        }
        if let Kind::Derivative { inner, order: o, .. } = self.kind() {
            return inner.derivative(o + order);
        }
        Self::from_kind(Kind::Derivative {
            inner: self.clone(),
            order,
            materialized: OnceLock::new(),
        })
    }

    /// Replaces lazy derivative wrappers by their expanded form.
    pub fn simplify(&self) -> Self {
        match self.kind() {
            Kind::Const(_) | Kind::Var | Kind::Integral(_) => self.clone(),
            Kind::Sum { constant, terms } => {
                sum_of(*constant, terms.iter().map(|(c, t)| (*c, t.simplify())).collect())
            }
            Kind::Product { coef, factors } => {
                product_of(*coef, factors.iter().map(|(b, p)| (b.simplify(), *p)).collect())
            }
            Kind::Exp(a) => a.simplify().exp(),
            Kind::Erf(a) => a.simplify().erf(),
            Kind::Painleve { table, arg, derivative } => {
                Self::painleve(table.clone(), arg.simplify(), *derivative)
            }
            Kind::Derivative { .. } => self.materialize().simplify(),
        }
    }

    pub(crate) fn materialize(&self) -> Expr {
        match self.kind() {
            Kind::Derivative { inner, order, materialized } => materialized
                .get_or_init(|| {
                    let mut e = inner.clone();
                    for _ in 0..*order {
                        e = e.diff();
                    }
                    e
                })
                .clone(),
            _ => self.clone(),
        }
    }

    /// Number of distinct nodes reachable from this expression.
    pub fn node_count(&self) -> usize {
        let mut seen = std::collections::HashSet::new();
        fn walk(e: &Expr, seen: &mut std::collections::HashSet<usize>) {
            if !seen.insert(e.ptr()) {
                return;
            }
            match e.kind() {
                Kind::Sum { terms, .. } => terms.iter().for_each(|(_, t)| walk(t, seen)),
                Kind::Product { factors, .. } => factors.iter().for_each(|(b, _)| walk(b, seen)),
                Kind::Exp(a) | Kind::Erf(a) => walk(a, seen),
                Kind::Painleve { arg, .. } => walk(arg, seen),
                Kind::Derivative { inner, .. } => walk(inner, seen),
                Kind::Integral(t) => walk(t.integrand(), seen),
                Kind::Const(_) | Kind::Var => {}
            }
        }
        walk(self, &mut seen);
        seen.len()
    }

    /// Numerical equality on a set of probe points:
    /// `|a - b| <= tol * (1 + max(|a|, |b|))` everywhere.
    pub fn approx_eq_on(&self, other: &Expr, probes: &[f64], tol: f64) -> Result<bool> {
        let a = self.eval_many(probes)?;
        let b = other.eval_many(probes)?;
        Ok(a.iter().zip(&b).all(|(a, b)| (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))))
    }
}

/// Splits `e` into `(coef, monomial)` with the monomial carrying unit coefficient.
fn split_coef(e: &Expr) -> (f64, Expr) {
    match e.kind() {
        Kind::Product { coef, factors } if *coef != 1.0 => {
            (*coef, product_of(1.0, factors.clone()))
        }
        _ => (1.0, e.clone()),
    }
}

/// Canonical sum `constant + Σ c_i e_i`.
pub(crate) fn sum_of(constant: f64, parts: Vec<(f64, Expr)>) -> Expr {
    let mut k = constant;
    let mut k_scale = constant.abs();
    let mut flat: Vec<(f64, f64, Expr)> = Vec::with_capacity(parts.len());
    let push = |flat: &mut Vec<(f64, f64, Expr)>, c: f64, e: Expr| {
        let (c2, m) = split_coef(&e);
        flat.push((c * c2, (c * c2).abs(), m));
    };
    for (c, e) in parts {
        if c == 0.0 {
            continue;
        }
        match e.kind() {
            Kind::Const(v) => {
                k += c * v;
                k_scale += (c * v).abs();
            }
            Kind::Sum { constant, terms } => {
                k += c * constant;
                k_scale += (c * constant).abs();
                for (ci, ti) in terms {
                    push(&mut flat, c * ci, ti.clone());
                }
            }
            _ => push(&mut flat, c, e.clone()),
        }
    }
    flat.sort_by_key(|(_, _, e)| e.0.hash);
    let mut terms: Vec<(f64, Expr)> = Vec::with_capacity(flat.len());
    let mut i = 0;
    while i < flat.len() {
        let (mut c, mut scale, e) = flat[i].clone();
        let mut j = i + 1;
        while j < flat.len() && flat[j].2.0.hash == e.0.hash {
            if flat[j].2 == e {
                c += flat[j].0;
                scale += flat[j].1;
                flat.remove(j);
            } else {
                j += 1;
            }
        }
        if c != 0.0 && c.abs() > CANCEL_TOL * scale {
            terms.push((c, e));
        }
        i += 1;
    }
    if k.abs() <= CANCEL_TOL * k_scale {
        k = 0.0;
    }
    match terms.len() {
        0 => Expr::constant(k),
        1 if k == 0.0 => {
            let (c, t) = terms.pop().unwrap();
            if c == 1.0 {
                t
            } else {
                let factors = match t.kind() {
                    Kind::Product { factors, .. } => factors.clone(),
                    _ => vec![(t.clone(), 1)],
                };
                Expr::from_kind(Kind::Product { coef: c, factors })
            }
        }
        _ => Expr::from_kind(Kind::Sum { constant: k, terms }),
    }
}

/// Canonical sum of weighted terms.
pub(crate) fn sum_of_terms(parts: Vec<(f64, Expr)>) -> Expr {
    sum_of(0.0, parts)
}

/// Canonical product `coef · Π b_i^{p_i}`.
pub(crate) fn product_of(coef: f64, parts: Vec<(Expr, i32)>) -> Expr {
    let mut c = coef;
    let mut flat: Vec<(Expr, i32)> = Vec::with_capacity(parts.len());
    let mut exp_args: Vec<(f64, Expr)> = Vec::new();
    fn absorb(
        e: &Expr,
        p: i32,
        c: &mut f64,
        flat: &mut Vec<(Expr, i32)>,
        exp_args: &mut Vec<(f64, Expr)>,
    ) {
        if p == 0 {
            return;
        }
        match e.kind() {
            Kind::Const(v) => *c *= v.powi(p),
            Kind::Product { coef, factors } => {
                *c *= coef.powi(p);
                for (b, q) in factors {
                    absorb(b, q * p, c, flat, exp_args);
                }
            }
            Kind::Exp(a) => exp_args.push((p as f64, a.clone())),
            _ => flat.push((e.clone(), p)),
        }
    }
    for (e, p) in &parts {
        absorb(e, *p, &mut c, &mut flat, &mut exp_args);
    }
    if c == 0.0 {
        return Expr::zero();
    }
    if !exp_args.is_empty() {
        let arg = sum_of(0.0, exp_args);
        match arg.as_constant() {
            Some(v) => c *= v.exp(),
            None => flat.push((Expr::from_kind(Kind::Exp(arg)), 1)),
        }
    }
    flat.sort_by_key(|(e, _)| e.0.hash);
    let mut factors: Vec<(Expr, i32)> = Vec::with_capacity(flat.len());
    for (e, p) in flat {
        match factors.iter_mut().find(|(b, _)| *b == e) {
            Some(slot) => slot.1 += p,
            None => factors.push((e, p)),
        }
    }
    factors.retain(|(_, p)| *p != 0);
    if factors.is_empty() {
        return Expr::constant(c);
    }
    // Distribute over a (small) sum factor so that like terms can meet.
    if let Some(pos) = factors.iter().position(|(b, p)| {
        *p == 1 && matches!(b.kind(), Kind::Sum { terms, .. } if terms.len() <= MAX_EXPAND_TERMS)
    }) {
        let (s, _) = factors.remove(pos);
        if let Kind::Sum { constant, terms } = s.kind() {
            let rest = factors;
            let mut parts = Vec::with_capacity(terms.len() + 1);
            let mono = |t: Option<&Expr>| {
                let mut f = rest.clone();
                if let Some(t) = t {
                    f.push((t.clone(), 1));
                }
                product_of(1.0, f)
            };
            if *constant != 0.0 {
                parts.push((c * constant, mono(None)));
            }
            for (ci, ti) in terms {
                parts.push((c * ci, mono(Some(ti))));
            }
            return sum_of(0.0, parts);
        }
        unreachable!()
    }
    if c == 1.0 && factors.len() == 1 && factors[0].1 == 1 {
        return factors.pop().unwrap().0;
    }
    Expr::from_kind(Kind::Product { coef: c, factors })
}

macro_rules! impl_binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl std::ops::$tr<&Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                let f: fn(&Expr, &Expr) -> Expr = $body;
                f(self, rhs)
            }
        }
        impl std::ops::$tr<Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                std::ops::$tr::$m(&self, &rhs)
            }
        }
        impl std::ops::$tr<&Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                std::ops::$tr::$m(&self, rhs)
            }
        }
        impl std::ops::$tr<Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                std::ops::$tr::$m(self, &rhs)
            }
        }
        impl std::ops::$tr<f64> for Expr {
            type Output = Expr;
            fn $m(self, rhs: f64) -> Expr {
                std::ops::$tr::$m(&self, &Expr::constant(rhs))
            }
        }
        impl std::ops::$tr<f64> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: f64) -> Expr {
                std::ops::$tr::$m(self, &Expr::constant(rhs))
            }
        }
        impl std::ops::$tr<Expr> for f64 {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                std::ops::$tr::$m(&Expr::constant(self), &rhs)
            }
        }
        impl std::ops::$tr<&Expr> for f64 {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                std::ops::$tr::$m(&Expr::constant(self), rhs)
            }
        }
    };
}

impl_binop!(Add, add, |a, b| sum_of(0.0, vec![(1.0, a.clone()), (1.0, b.clone())]));
impl_binop!(Sub, sub, |a, b| sum_of(0.0, vec![(1.0, a.clone()), (-1.0, b.clone())]));
impl_binop!(Mul, mul, |a, b| product_of(1.0, vec![(a.clone(), 1), (b.clone(), 1)]));
impl_binop!(Div, div, |a, b| product_of(1.0, vec![(a.clone(), 1), (b.clone(), -1)]));

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        self.scale(-1.0)
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        self.scale(-1.0)
    }
}

impl std::iter::Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        sum_of(0.0, iter.map(|e| (1.0, e)).collect())
    }
}
