//! Expanded multivariate polynomials with exact rational coefficients,
//! in a canonical monomial order. These are the exact certificates
//! behind `ExactZero` verdicts.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::expr::Expr;

/// Monomials are exponent vectors of fixed length `nvars`; terms are kept
/// sorted by the exponent vector (lexicographic), which fixes a canonical
/// order. Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Vec<u16>, BigRational>,
}

const MAX_EXPONENT: u32 = 4096;

impl Poly {
    pub fn zero(nvars: usize) -> Poly {
        Poly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: BigRational) -> Poly {
        let mut p = Poly::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    pub fn variable(nvars: usize, i: usize) -> Poly {
        let mut exps = vec![0u16; nvars];
        exps[i] = 1;
        let mut p = Poly::zero(nvars);
        p.terms.insert(exps, BigRational::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u16>, &BigRational)> {
        self.terms.iter()
    }

    /// Largest exponent of variable `i` across all terms.
    pub fn degree_in(&self, i: usize) -> u16 {
        self.terms.keys().map(|m| m[i]).max().unwrap_or(0)
    }

    fn insert_term(&mut self, mono: Vec<u16>, coeff: BigRational) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(mono) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().clone() + coeff;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert_term(m.clone(), c.clone());
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Option<Poly> {
        let mut out = Poly::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let mut m = vec![0u16; self.nvars];
                for i in 0..self.nvars {
                    let e = ma[i] as u32 + mb[i] as u32;
                    if e > MAX_EXPONENT {
                        return None;
                    }
                    m[i] = e as u16;
                }
                out.insert_term(m, ca.clone() * cb.clone());
            }
        }
        Some(out)
    }

    pub fn pow(&self, k: u32) -> Option<Poly> {
        let mut acc = Poly::constant(self.nvars, BigRational::one());
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base)?;
            }
        }
        Some(acc)
    }

    /// Expanded polynomial normal form of an expression, when one
    /// exists: the expression must contain only rational constants,
    /// variables, sums, products, and nonnegative integer powers.
    pub fn from_expr(e: &Expr, nvars: usize) -> Option<Poly> {
        match e {
            Expr::Const(c) => Some(Poly::constant(nvars, c.clone())),
            Expr::Var(i) => {
                if *i < nvars {
                    Some(Poly::variable(nvars, *i))
                } else {
                    None
                }
            }
            Expr::Param(_) | Expr::Func(..) | Expr::Opaque { .. } => None,
            Expr::Sum(ts) => {
                let mut acc = Poly::zero(nvars);
                for t in ts {
                    acc = acc.add(&Poly::from_expr(t, nvars)?);
                }
                Some(acc)
            }
            Expr::Product(fs) => {
                let mut acc = Poly::constant(nvars, BigRational::one());
                for f in fs {
                    acc = acc.mul(&Poly::from_expr(f, nvars)?)?;
                }
                Some(acc)
            }
            Expr::Pow(b, k) => {
                if *k < 0 {
                    return None;
                }
                Poly::from_expr(b, nvars)?.pow(*k as u32)
            }
        }
    }
}

/// Convenience wrapper: `Some(poly)` iff the expression is in the
/// polynomial fragment of the grammar.
pub fn polynomial_normal_form(e: &Expr, nvars: usize) -> Option<Poly> {
    Poly::from_expr(e, nvars)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::Chart;
    use crate::parse::parse_expr;

    fn chart2() -> std::sync::Arc<Chart> {
        Chart::boxed(&["x1", "x2"], -2.0, 2.0).unwrap()
    }

    #[test]
    fn difference_of_equal_products_is_zero() {
        let chart = chart2();
        let e = parse_expr("x1*(x1+x2) - x1^2 - x1*x2", &chart).unwrap();
        let p = Poly::from_expr(&e, 2).unwrap();
        assert!(p.is_zero());
    }

    #[test]
    fn transcendental_has_no_normal_form() {
        let chart = chart2();
        let e = parse_expr("sin(x1)", &chart).unwrap();
        assert!(Poly::from_expr(&e, 2).is_none());
        let inv = parse_expr("1/x1", &chart).unwrap();
        assert!(Poly::from_expr(&inv, 2).is_none());
    }

    #[test]
    fn binomial_square_expands() {
        let chart = chart2();
        let e = parse_expr("(x1+x2)^2", &chart).unwrap();
        let p = Poly::from_expr(&e, 2).unwrap();
        let q = Poly::from_expr(
            &parse_expr("x1^2 + 2*x1*x2 + x2^2", &chart).unwrap(),
            2,
        )
        .unwrap();
        assert_eq!(p, q);
        assert_eq!(p.terms().count(), 3);
        assert_eq!(p.degree_in(0), 2);
    }
}
