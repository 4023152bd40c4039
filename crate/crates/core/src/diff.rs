//! Exact symbolic partial differentiation.

use crate::expr::{Elementary, Expr};

/// Partial derivative of `e` with respect to the coordinate with index
/// `var`. Chain rule is applied through elementary functions; an opaque
/// symbol `f(u)` differentiates to `f'(u) * du`.
pub fn differentiate(e: &Expr, var: usize) -> Expr {
    match e {
        Expr::Const(_) | Expr::Param(_) => Expr::int(0),
        Expr::Var(i) => {
            if *i == var {
                Expr::int(1)
            } else {
                Expr::int(0)
            }
        }
        Expr::Sum(ts) => Expr::sum(ts.iter().map(|t| differentiate(t, var)).collect()),
        Expr::Product(fs) => {
            let mut terms = Vec::new();
            for (i, fi) in fs.iter().enumerate() {
                let dfi = differentiate(fi, var);
                if dfi.is_zero_const() {
                    continue;
                }
                let mut factors: Vec<Expr> = Vec::with_capacity(fs.len());
                for (j, fj) in fs.iter().enumerate() {
                    factors.push(if i == j { dfi.clone() } else { fj.clone() });
                }
                terms.push(Expr::product(factors));
            }
            Expr::sum(terms)
        }
        Expr::Pow(b, k) => {
            let db = differentiate(b, var);
            if db.is_zero_const() {
                return Expr::int(0);
            }
            Expr::product(vec![
                Expr::int(*k as i64),
                Expr::pow((**b).clone(), k - 1),
                db,
            ])
        }
        Expr::Func(head, u) => {
            let du = differentiate(u, var);
            if du.is_zero_const() {
                return Expr::int(0);
            }
            let u = (**u).clone();
            let outer = match head {
                Elementary::Sin => Expr::func(Elementary::Cos, u),
                Elementary::Cos => Expr::neg(Expr::func(Elementary::Sin, u)),
                Elementary::Exp => Expr::func(Elementary::Exp, u),
                Elementary::Ln => Expr::pow(u, -1),
                Elementary::Atan => {
                    Expr::pow(Expr::sum(vec![Expr::int(1), Expr::pow(u, 2)]), -1)
                }
                Elementary::Sqrt => Expr::product(vec![
                    Expr::ratio(1, 2),
                    Expr::pow(Expr::func(Elementary::Sqrt, u), -1),
                ]),
            };
            Expr::product(vec![outer, du])
        }
        Expr::Opaque { name, order, arg } => {
            let du = differentiate(arg, var);
            if du.is_zero_const() {
                return Expr::int(0);
            }
            Expr::product(vec![
                Expr::opaque(name.clone(), order + 1, (**arg).clone()),
                du,
            ])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::Chart;
    use crate::eval::Bindings;
    use crate::parse::{parse_expr, parse_expr_with, Declarations};

    #[test]
    fn power_rule_with_product() {
        let chart = Chart::boxed(&["x1", "x2"], -2.0, 2.0).unwrap();
        // d/dx1 (x1^2 * x2) = 2*x1*x2
        let e = parse_expr("x1^2*x2", &chart).unwrap();
        let d = differentiate(&e, 0);
        let expected = parse_expr("2*x1*x2", &chart).unwrap();
        assert_eq!(d, expected);
    }

    #[test]
    fn chain_rule_through_opaque() {
        let chart = Chart::boxed(&["u", "v"], -2.0, 2.0).unwrap();
        let decls = Declarations::with_opaques(["f"]);
        // d/du f(u^2) = f'(u^2) * 2u
        let e = parse_expr_with("f(u^2)", &chart, &decls).unwrap();
        let d = differentiate(&e, 0);
        let expected = parse_expr_with("f'(u^2)*2*u", &chart, &decls).unwrap();
        assert_eq!(d, expected);
    }

    #[test]
    fn atan_derivative_matches_central_differences() {
        let chart = Chart::new(
            vec!["x1".into(), "x2".into()],
            vec![(0.6, 2.0), (-1.5, 1.5)],
            vec![],
        )
        .unwrap();
        let e = parse_expr("atan(x2/x1)", &chart).unwrap();
        let d = differentiate(&e, 0);
        let b = Bindings::empty();
        let h = 1e-5;
        for (x1, x2) in [(1.0, 1.0), (0.7, -1.2), (1.9, 0.3), (1.3, 1.4)] {
            let sym = d.eval(&[x1, x2], &b).unwrap();
            let fd = (e.eval(&[x1 + h, x2], &b).unwrap() - e.eval(&[x1 - h, x2], &b).unwrap())
                / (2.0 * h);
            assert!((sym - fd).abs() < 1e-6, "at ({x1},{x2}): {sym} vs {fd}");
            // known closed form: -x2/(x1^2+x2^2)
            let closed = -x2 / (x1 * x1 + x2 * x2);
            assert!((sym - closed).abs() < 1e-12);
        }
    }

    #[test]
    fn derivative_of_independent_coordinate_is_structural_zero() {
        let chart = Chart::boxed(&["x1", "x2", "x3"], -2.0, 2.0).unwrap();
        let e = parse_expr("atan(x2/x1) + x1^3", &chart).unwrap();
        assert_eq!(differentiate(&e, 2), Expr::int(0));
    }
}
