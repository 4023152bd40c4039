//! Exact symbolic scalar expressions over a coordinate chart.
//!
//! Expressions are trees of exact rational constants, coordinate
//! variables, named real parameters, flattened n-ary sums and products,
//! integer powers, the elementary functions `sin cos exp ln atan sqrt`,
//! and opaque function symbols `f` carrying a derivative order (rendered
//! `f`, `f'`, `f''`, ...). Division only ever appears as an integer
//! power of -1.
//!
//! The variant constructors are public, but the smart constructors
//! ([`Expr::sum`], [`Expr::product`], [`Expr::pow`], ...) are the
//! supported way to build values: they keep sums and products flattened,
//! fold rational constants, and absorb 0/1, so that structural equality
//! is meaningful. [`simplify_basic`] rebuilds an arbitrary tree through
//! the smart constructors.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::chart::Chart;

/// Elementary function heads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Elementary {
    Sin,
    Cos,
    Exp,
    Ln,
    Atan,
    Sqrt,
}

impl Elementary {
    pub fn name(self) -> &'static str {
        match self {
            Elementary::Sin => "sin",
            Elementary::Cos => "cos",
            Elementary::Exp => "exp",
            Elementary::Ln => "ln",
            Elementary::Atan => "atan",
            Elementary::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Elementary::Sin,
            "cos" => Elementary::Cos,
            "exp" => Elementary::Exp,
            "ln" => Elementary::Ln,
            "atan" => Elementary::Atan,
            "sqrt" => Elementary::Sqrt,
            _ => return None,
        })
    }
}

/// A symbolic scalar expression.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    /// Exact rational constant, always in lowest terms.
    Const(BigRational),
    /// Coordinate variable, indexed into the owning chart.
    Var(usize),
    /// Named real parameter (a constant under differentiation).
    Param(String),
    /// Flattened n-ary sum.
    Sum(Vec<Expr>),
    /// Flattened n-ary product; a rational coefficient, when present,
    /// is the first factor.
    Product(Vec<Expr>),
    /// Integer power.
    Pow(Box<Expr>, i32),
    /// Elementary function applied to one argument.
    Func(Elementary, Box<Expr>),
    /// Opaque function symbol of one argument with a derivative order.
    Opaque {
        name: String,
        order: u32,
        arg: Box<Expr>,
    },
}

impl Expr {
    pub fn int(n: i64) -> Expr {
        Expr::Const(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(p: i64, q: i64) -> Expr {
        Expr::Const(BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    pub fn rational(r: BigRational) -> Expr {
        Expr::Const(r)
    }

    pub fn var(i: usize) -> Expr {
        Expr::Var(i)
    }

    pub fn param(name: impl Into<String>) -> Expr {
        Expr::Param(name.into())
    }

    pub fn opaque(name: impl Into<String>, order: u32, arg: Expr) -> Expr {
        Expr::Opaque {
            name: name.into(),
            order,
            arg: Box::new(arg),
        }
    }

    pub fn func(head: Elementary, arg: Expr) -> Expr {
        Expr::Func(head, Box::new(arg))
    }

    /// Flattens nested sums, folds rational constants together (the
    /// folded constant goes last), and drops zeros.
    pub fn sum(terms: Vec<Expr>) -> Expr {
        let mut acc = BigRational::zero();
        let mut out: Vec<Expr> = Vec::new();
        let mut stack: Vec<Expr> = terms.into_iter().rev().collect();
        while let Some(t) = stack.pop() {
            match t {
                Expr::Sum(inner) => stack.extend(inner.into_iter().rev()),
                Expr::Const(c) => acc += c,
                other => out.push(other),
            }
        }
        if !acc.is_zero() {
            out.push(Expr::Const(acc));
        }
        match out.len() {
            0 => Expr::int(0),
            1 => out.pop().unwrap(),
            _ => Expr::Sum(out),
        }
    }

    /// Flattens nested products, folds rational constants into a single
    /// leading coefficient, and absorbs 0 and 1.
    pub fn product(factors: Vec<Expr>) -> Expr {
        let mut coeff = BigRational::one();
        let mut out: Vec<Expr> = Vec::new();
        let mut stack: Vec<Expr> = factors.into_iter().rev().collect();
        while let Some(f) = stack.pop() {
            match f {
                Expr::Product(inner) => stack.extend(inner.into_iter().rev()),
                Expr::Const(c) => coeff *= c,
                other => out.push(other),
            }
        }
        if coeff.is_zero() {
            return Expr::int(0);
        }
        if out.is_empty() {
            return Expr::Const(coeff);
        }
        if coeff.is_one() {
            if out.len() == 1 {
                return out.pop().unwrap();
            }
            return Expr::Product(out);
        }
        let mut all = Vec::with_capacity(out.len() + 1);
        all.push(Expr::Const(coeff));
        all.extend(out);
        Expr::Product(all)
    }

    /// Integer power with folding: `e^0 = 1`, `e^1 = e`, rational bases
    /// fold exactly, and nested integer powers compose.
    pub fn pow(base: Expr, k: i32) -> Expr {
        if k == 0 {
            return Expr::int(1);
        }
        if k == 1 {
            return base;
        }
        match base {
            Expr::Const(c) => {
                if c.is_zero() && k < 0 {
                    // Left unfolded; evaluation reports the division by zero.
                    Expr::Pow(Box::new(Expr::Const(c)), k)
                } else {
                    Expr::Const(rational_pow(&c, k))
                }
            }
            Expr::Pow(inner, m) => match m.checked_mul(k) {
                Some(mk) => Expr::pow(*inner, mk),
                None => Expr::Pow(Box::new(Expr::Pow(inner, m)), k),
            },
            other => Expr::Pow(Box::new(other), k),
        }
    }

    pub fn neg(e: Expr) -> Expr {
        Expr::product(vec![Expr::int(-1), e])
    }

    pub fn is_zero_const(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_zero())
    }

    pub fn is_one_const(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_one())
    }

    pub fn as_const(&self) -> Option<&BigRational> {
        match self {
            Expr::Const(c) => Some(c),
            _ => None,
        }
    }

    /// The additive terms of this expression: the summands of a sum,
    /// or the expression itself.
    pub fn additive_terms(&self) -> &[Expr] {
        match self {
            Expr::Sum(ts) => ts,
            _ => std::slice::from_ref(self),
        }
    }

    /// True if the coordinate with index `var` occurs anywhere in the tree.
    pub fn depends_on(&self, var: usize) -> bool {
        match self {
            Expr::Const(_) | Expr::Param(_) => false,
            Expr::Var(i) => *i == var,
            Expr::Sum(ts) | Expr::Product(ts) => ts.iter().any(|t| t.depends_on(var)),
            Expr::Pow(b, _) => b.depends_on(var),
            Expr::Func(_, a) => a.depends_on(var),
            Expr::Opaque { arg, .. } => arg.depends_on(var),
        }
    }

    /// Collects the names of all opaque symbols occurring in the tree.
    pub fn opaque_symbols(&self, out: &mut std::collections::BTreeSet<String>) {
        match self {
            Expr::Const(_) | Expr::Var(_) | Expr::Param(_) => {}
            Expr::Sum(ts) | Expr::Product(ts) => {
                for t in ts {
                    t.opaque_symbols(out);
                }
            }
            Expr::Pow(b, _) => b.opaque_symbols(out),
            Expr::Func(_, a) => a.opaque_symbols(out),
            Expr::Opaque { name, arg, .. } => {
                out.insert(name.clone());
                arg.opaque_symbols(out);
            }
        }
    }

    /// Replaces parameters by expressions wherever the map has an entry.
    pub fn substitute_params(&self, map: &std::collections::BTreeMap<String, Expr>) -> Expr {
        match self {
            Expr::Param(name) => match map.get(name) {
                Some(e) => e.clone(),
                None => self.clone(),
            },
            Expr::Const(_) | Expr::Var(_) => self.clone(),
            Expr::Sum(ts) => Expr::sum(ts.iter().map(|t| t.substitute_params(map)).collect()),
            Expr::Product(fs) => {
                Expr::product(fs.iter().map(|f| f.substitute_params(map)).collect())
            }
            Expr::Pow(b, k) => Expr::pow(b.substitute_params(map), *k),
            Expr::Func(h, a) => Expr::func(*h, a.substitute_params(map)),
            Expr::Opaque { name, order, arg } => {
                Expr::opaque(name.clone(), *order, arg.substitute_params(map))
            }
        }
    }

    /// Renders the expression with the chart's coordinate names; the
    /// output parses back (see `parse_expr`) to `simplify_basic` of self.
    pub fn display<'a>(&'a self, chart: &'a Chart) -> ExprDisplay<'a> {
        ExprDisplay { expr: self, chart }
    }
}

fn rational_pow(c: &BigRational, k: i32) -> BigRational {
    if k >= 0 {
        num_traits::pow::pow(c.clone(), k as usize)
    } else {
        num_traits::pow::pow(c.recip(), (-(k as i64)) as usize)
    }
}

/// Rebuilds the tree bottom-up through the smart constructors:
/// constant folding, 0/1 absorption, flattening. Semantics-preserving.
pub fn simplify_basic(e: &Expr) -> Expr {
    match e {
        Expr::Const(_) | Expr::Var(_) | Expr::Param(_) => e.clone(),
        Expr::Sum(ts) => Expr::sum(ts.iter().map(simplify_basic).collect()),
        Expr::Product(fs) => Expr::product(fs.iter().map(simplify_basic).collect()),
        Expr::Pow(b, k) => Expr::pow(simplify_basic(b), *k),
        Expr::Func(h, a) => Expr::func(*h, simplify_basic(a)),
        Expr::Opaque { name, order, arg } => Expr::opaque(name.clone(), *order, simplify_basic(arg)),
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::sum(vec![self, rhs])
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::sum(vec![self, Expr::neg(rhs)])
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::product(vec![self, rhs])
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

// ---------------------------------------------------------------------
// Rendering. The printer emits text in the same grammar the parser
// accepts, and on canonical trees parse(render(e)) == e.

pub struct ExprDisplay<'a> {
    expr: &'a Expr,
    chart: &'a Chart,
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_sum(f, self.expr, self.chart)
    }
}

fn write_sum(f: &mut fmt::Formatter<'_>, e: &Expr, chart: &Chart) -> fmt::Result {
    match e {
        Expr::Sum(ts) => {
            for (i, t) in ts.iter().enumerate() {
                if i == 0 {
                    write_term(f, t, chart)?;
                } else if let Some(pos) = strip_minus(t) {
                    write!(f, " - ")?;
                    write_term(f, &pos, chart)?;
                } else {
                    write!(f, " + ")?;
                    write_term(f, t, chart)?;
                }
            }
            Ok(())
        }
        _ => write_term(f, e, chart),
    }
}

/// For a term with a negative rational coefficient, returns the term
/// with the coefficient negated.
fn strip_minus(e: &Expr) -> Option<Expr> {
    match e {
        Expr::Const(c) if c.is_negative() => Some(Expr::Const(-c.clone())),
        Expr::Product(fs) => match fs.first() {
            Some(Expr::Const(c)) if c.is_negative() => {
                let mut out = fs.clone();
                out[0] = Expr::Const(-c.clone());
                Some(Expr::product(out))
            }
            _ => None,
        },
        _ => None,
    }
}

fn write_term(f: &mut fmt::Formatter<'_>, e: &Expr, chart: &Chart) -> fmt::Result {
    match e {
        // Ratios and negative constants are valid at term level without
        // parentheses ("7/3", "-5").
        Expr::Const(c) => write_rational(f, c),
        Expr::Product(fs) => {
            let mut numer: Vec<&Expr> = Vec::new();
            let mut denom: Vec<(&Expr, i32)> = Vec::new();
            let mut coeff: Option<&BigRational> = None;
            for (i, fac) in fs.iter().enumerate() {
                match fac {
                    Expr::Const(c) if i == 0 => coeff = Some(c),
                    Expr::Pow(b, k) if *k < 0 => denom.push((b, -*k)),
                    other => numer.push(other),
                }
            }
            let mut wrote = false;
            if let Some(c) = coeff {
                if *c == -BigRational::one() && !(numer.is_empty() && denom.is_empty()) {
                    write!(f, "-")?;
                } else {
                    write_rational(f, c)?;
                    wrote = true;
                }
            }
            if numer.is_empty() && !denom.is_empty() && !wrote {
                write!(f, "1")?;
                wrote = true;
            }
            for n in numer {
                if wrote {
                    write!(f, "*")?;
                }
                write_pow(f, n, chart)?;
                wrote = true;
            }
            for (b, k) in denom {
                write!(f, "/")?;
                write_pow_parts(f, b, k, chart)?;
            }
            Ok(())
        }
        Expr::Pow(b, k) if *k < 0 => {
            write!(f, "1/")?;
            write_pow_parts(f, b, -*k, chart)
        }
        _ => write_pow(f, e, chart),
    }
}

fn write_pow(f: &mut fmt::Formatter<'_>, e: &Expr, chart: &Chart) -> fmt::Result {
    match e {
        Expr::Pow(b, k) if *k >= 0 => write_pow_parts(f, b, *k, chart),
        _ => write_base(f, e, chart),
    }
}

fn write_pow_parts(f: &mut fmt::Formatter<'_>, base: &Expr, k: i32, chart: &Chart) -> fmt::Result {
    if k == 1 {
        return write_base(f, base, chart);
    }
    write_base(f, base, chart)?;
    write!(f, "^{k}")
}

fn write_base(f: &mut fmt::Formatter<'_>, e: &Expr, chart: &Chart) -> fmt::Result {
    match e {
        Expr::Sum(_) | Expr::Product(_) | Expr::Pow(..) => {
            write!(f, "(")?;
            write_sum(f, e, chart)?;
            write!(f, ")")
        }
        Expr::Const(c) => {
            // In base position a ratio or a negative constant must be
            // shielded from an adjacent '^'.
            if c.is_negative() || !c.is_integer() {
                write!(f, "(")?;
                write_rational(f, c)?;
                write!(f, ")")
            } else {
                write_rational(f, c)
            }
        }
        Expr::Var(i) => write!(f, "{}", chart.coord_name(*i)),
        Expr::Param(name) => write!(f, "{name}"),
        Expr::Func(h, a) => {
            write!(f, "{}(", h.name())?;
            write_sum(f, a, chart)?;
            write!(f, ")")
        }
        Expr::Opaque { name, order, arg } => {
            write!(f, "{name}")?;
            for _ in 0..*order {
                write!(f, "'")?;
            }
            write!(f, "(")?;
            write_sum(f, arg, chart)?;
            write!(f, ")")
        }
    }
}

fn write_rational(f: &mut fmt::Formatter<'_>, c: &BigRational) -> fmt::Result {
    if c.is_integer() {
        write!(f, "{}", c.numer())
    } else {
        write!(f, "{}/{}", c.numer(), c.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart3() -> std::sync::Arc<Chart> {
        Chart::boxed(&["x1", "x2", "x3"], -2.0, 2.0).unwrap()
    }

    #[test]
    fn sum_folds_constants() {
        // 2 + 3 -> 5
        assert_eq!(Expr::int(2) + Expr::int(3), Expr::int(5));
    }

    #[test]
    fn product_absorbs_zero_and_one() {
        // 0*x1 + x2 -> x2
        let e = Expr::int(0) * Expr::var(0) + Expr::var(1);
        assert_eq!(e, Expr::var(1));
        assert_eq!(Expr::int(1) * Expr::var(0), Expr::var(0));
    }

    #[test]
    fn pow_one_collapses() {
        assert_eq!(Expr::pow(Expr::var(0), 1), Expr::var(0));
        assert_eq!(Expr::pow(Expr::var(0), 0), Expr::int(1));
        assert_eq!(Expr::pow(Expr::int(2), -1), Expr::ratio(1, 2));
    }

    #[test]
    fn nested_pow_composes() {
        let e = Expr::pow(Expr::pow(Expr::var(0), 2), 3);
        assert_eq!(e, Expr::pow(Expr::var(0), 6));
    }

    #[test]
    fn sums_and_products_stay_flat() {
        let e = Expr::sum(vec![
            Expr::Sum(vec![Expr::var(0), Expr::var(1)]),
            Expr::var(2),
        ]);
        assert_eq!(
            e,
            Expr::Sum(vec![Expr::var(0), Expr::var(1), Expr::var(2)])
        );
        let p = Expr::product(vec![
            Expr::Product(vec![Expr::var(0), Expr::var(1)]),
            Expr::var(2),
        ]);
        assert_eq!(
            p,
            Expr::Product(vec![Expr::var(0), Expr::var(1), Expr::var(2)])
        );
    }

    #[test]
    fn simplify_rebuilds_raw_trees() {
        let raw = Expr::Sum(vec![
            Expr::Product(vec![Expr::int(0), Expr::var(0)]),
            Expr::Pow(Box::new(Expr::var(0)), 1),
        ]);
        assert_eq!(simplify_basic(&raw), Expr::var(0));
    }

    #[test]
    fn rendering_reads_naturally() {
        let chart = chart3();
        let e = Expr::pow(Expr::var(0), 2) + Expr::var(1);
        assert_eq!(chart.render(&e), "x1^2 + x2");
        let r2 = Expr::pow(Expr::var(0), 2) + Expr::pow(Expr::var(1), 2);
        let d = Expr::neg(Expr::var(1) * Expr::pow(r2, -1));
        assert_eq!(chart.render(&d), "-x2/(x1^2 + x2^2)");
        let q = Expr::func(Elementary::Atan, Expr::var(1) * Expr::pow(Expr::var(0), -1));
        assert_eq!(chart.render(&q), "atan(x2/x1)");
        let o = Expr::opaque("f", 2, Expr::var(0));
        assert_eq!(chart.render(&o), "f''(x1)");
    }
}
