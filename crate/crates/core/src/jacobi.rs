//! Jacobi structures: the defining pair of identities and the
//! sufficient three-field commutation algebra.
//!
//! A Jacobi structure is a pair `(Lambda, E)` with `Lambda` a bivector
//! and `E` a vector field such that `[Lambda, Lambda] = 2 E ^ Lambda`
//! and `[E, Lambda] = 0`. A Poisson tensor is the degenerate case
//! `E = 0`. The vector is called `E` here: it is an arbitrary field,
//! not a Hamiltonian one.

use std::sync::Arc;

use crate::chart::Chart;
use crate::error::{Error, Result};
use crate::eval::Bindings;
use crate::expr::Expr;
use crate::multivec::{
    lie_bracket, lie_derivative, multivector_is_zero, schouten, wedge, Multivector, VectorField,
};
use crate::report::{CheckEntry, CheckReport};
use crate::zero::{Policy, ZeroVerdict};

/// A candidate Jacobi pair together with its audit.
#[derive(Debug, Clone)]
pub struct JacobiStructure {
    pub chart: Arc<Chart>,
    pub lambda: Multivector,
    pub e: VectorField,
    pub audit: CheckReport,
}

/// Checks the two defining identities:
/// `[Lambda, Lambda] - 2 E ^ Lambda = 0` and `[E, Lambda] = 0`.
pub fn check_jacobi_structure(
    lambda: &Multivector,
    e: &VectorField,
    policy: &Policy,
    bindings: &Bindings,
) -> Result<CheckReport> {
    if lambda.chart() != e.chart() {
        return Err(Error::ChartMismatch);
    }
    if lambda.degree() != 2 {
        return Err(Error::Degree {
            expected: 2,
            got: lambda.degree(),
        });
    }
    let mut report = CheckReport::new();

    let ll = schouten(lambda, lambda)?;
    let two_el = wedge(&e.to_multivector(), lambda)?.scaled(&Expr::int(2));
    let pair = ll.add(&two_el.scaled(&Expr::int(-1)))?;
    report.push(CheckEntry::zero(
        "pair",
        "[Lambda, Lambda] = 2 E ^ Lambda",
        multivector_is_zero(&pair, policy, bindings)?,
    ));

    let el = lie_derivative(e, lambda)?;
    report.push(CheckEntry::zero(
        "invariance",
        "[E, Lambda] = 0",
        multivector_is_zero(&el, policy, bindings)?,
    ));
    Ok(report)
}

/// Builds the pair `(X1 ^ X2, E)` with its audit attached.
pub fn jacobi_structure(
    x1: &VectorField,
    x2: &VectorField,
    e: &VectorField,
    policy: &Policy,
    bindings: &Bindings,
) -> Result<JacobiStructure> {
    let lambda = wedge(&x1.to_multivector(), &x2.to_multivector())?;
    let audit = check_jacobi_structure(&lambda, e, policy, bindings)?;
    Ok(JacobiStructure {
        chart: x1.chart().clone(),
        lambda,
        e: e.clone(),
        audit,
    })
}

/// Checks the three commutation rules that make `(X1 ^ X2, XH)` a
/// Jacobi pair, in the form the construction's own worked algebra uses:
///
/// ```text
/// rel1  [X1, X2] = -XH
/// rel2  [XH, X1] = -A X1 + B X2
/// rel3  [X2, XH] =  C X1 + A X2
/// ```
///
/// plus the consequence audit that `(X1 ^ X2, XH)` then satisfies the
/// defining identities.
pub fn check_theorem3(
    x1: &VectorField,
    x2: &VectorField,
    xh: &VectorField,
    a: &Expr,
    b: &Expr,
    c: &Expr,
    policy: &Policy,
    bindings: &Bindings,
) -> Result<CheckReport> {
    if x1.chart() != x2.chart() || x1.chart() != xh.chart() {
        return Err(Error::ChartMismatch);
    }
    let mut report = CheckReport::new();

    let rel1 = lie_bracket(x1, x2)?
        .sub(&xh.scaled(&Expr::int(-1)))?
        .is_zero(policy, bindings)?;
    report.push(CheckEntry::zero("rel1", "[X1, X2] = -XH", rel1));

    let rhs2 = VectorField::linear_combination(&[
        (Expr::neg(a.clone()), x1),
        (b.clone(), x2),
    ])?;
    let rel2 = lie_bracket(xh, x1)?.sub(&rhs2)?.is_zero(policy, bindings)?;
    report.push(CheckEntry::zero("rel2", "[XH, X1] = -A X1 + B X2", rel2));

    let rhs3 = VectorField::linear_combination(&[(c.clone(), x1), (a.clone(), x2)])?;
    let rel3 = lie_bracket(x2, xh)?.sub(&rhs3)?.is_zero(policy, bindings)?;
    report.push(CheckEntry::zero("rel3", "[X2, XH] = C X1 + A X2", rel3));

    let consequence = jacobi_structure(x1, x2, xh, policy, bindings)?;
    report.extend_prefixed("consequence-", consequence.audit);

    Ok(report)
}

/// Convenience for property tests: both defining verdicts, aggregated.
pub fn jacobi_pair_verdict(
    lambda: &Multivector,
    e: &VectorField,
    policy: &Policy,
    bindings: &Bindings,
) -> Result<ZeroVerdict> {
    let report = check_jacobi_structure(lambda, e, policy, bindings)?;
    let verdicts = report
        .entries
        .into_iter()
        .filter_map(|en| en.outcome.verdict().cloned())
        .collect();
    Ok(crate::zero::aggregate_verdicts(verdicts))
}
