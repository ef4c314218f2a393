use std::fmt;

use super::{Expr, Kind};

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind() {
            Kind::Const(c) => write!(f, "{c}"),
            Kind::Var => write!(f, "x"),
            Kind::Sum { constant, terms } => {
                write!(f, "(")?;
                let mut first = true;
                for (c, t) in terms {
                    if first {
                        if *c == -1.0 {
                            write!(f, "-")?;
                        } else if *c != 1.0 {
                            write!(f, "{c}*")?;
                        }
                    } else if *c < 0.0 {
                        if *c == -1.0 {
                            write!(f, " - ")?;
                        } else {
                            write!(f, " - {}*", -c)?;
                        }
                    } else if *c == 1.0 {
                        write!(f, " + ")?;
                    } else {
                        write!(f, " + {c}*")?;
                    }
                    write!(f, "{t}")?;
                    first = false;
                }
                if *constant > 0.0 {
                    write!(f, " + {constant}")?;
                } else if *constant < 0.0 {
                    write!(f, " - {}", -constant)?;
                }
                write!(f, ")")
            }
            Kind::Product { coef, factors } => {
                if *coef != 1.0 {
                    write!(f, "{coef}")?;
                }
                for (i, (b, p)) in factors.iter().enumerate() {
                    if i > 0 || *coef != 1.0 {
                        write!(f, "*")?;
                    }
                    if *p == 1 {
                        write!(f, "{b}")?;
                    } else {
                        write!(f, "{b}^{p}")?;
                    }
                }
                Ok(())
            }
            Kind::Exp(a) => write!(f, "exp({a})"),
            Kind::Erf(a) => write!(f, "erf({a})"),
            Kind::Integral(t) => write!(f, "int[{}..x]({})", t.anchor(), t.integrand()),
            Kind::Painleve { arg, derivative, .. } => {
                write!(f, "{}({arg})", if *derivative { "P4'" } else { "P4" })
            }
            Kind::Derivative { inner, order, .. } => write!(f, "D^{order}[{inner}]"),
        }
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}
