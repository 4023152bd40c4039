//! Quasi-bi-Hamiltonian machinery: span-closure checks, the
//! four-vector commutation algebra and its coefficient formulas, the
//! three-relation reduced algebra, the second-order Hamiltonian
//! condition, assembly and audit of complete systems, the
//! one-symmetry/one-conserved-quantity special case, and the extra
//! two-dimensional bi-Hamiltonian condition.
//!
//! The audit philosophy: every consequence is checked independently and
//! reported; nothing downstream trusts an upstream derivation. A failed
//! audit is a result, not an error.

use std::sync::Arc;

use crate::chart::Chart;
use crate::error::{Error, Result};
use crate::eval::Bindings;
use crate::expr::Expr;
use crate::multivec::{lie_bracket, Multivector, VectorField};
use crate::poisson::{
    check_casimir, check_compatibility, check_first_integral, check_infinitesimal_automorphism,
    check_jacobi_identity, poisson_bracket, PoissonCandidate,
};
use crate::report::{CheckEntry, CheckOutcome, CheckReport};
use crate::zero::{decide_zero, decide_zero_all, aggregate_verdicts, Policy, Sampler, ZeroVerdict};

/// The structure functions of the commutation algebra. All optional:
/// each operation names the ones it needs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StructureCoefficients {
    pub n1: Option<Expr>,
    pub n2: Option<Expr>,
    pub a1: Option<Expr>,
    pub a2: Option<Expr>,
    pub b1: Option<Expr>,
    pub b2: Option<Expr>,
    pub c1: Option<Expr>,
    pub c2: Option<Expr>,
    pub d1: Option<Expr>,
    pub d2: Option<Expr>,
    pub e1: Option<Expr>,
    pub e2: Option<Expr>,
}

macro_rules! coeff {
    ($c:expr, $field:ident) => {
        $c.$field
            .clone()
            .ok_or(Error::MissingCoefficient(stringify!($field)))
    };
}

/// One relation of the algebra: the computed bracket, the claimed
/// right-hand side, and the verdict for their difference.
#[derive(Debug, Clone)]
pub struct RelationCheck {
    pub id: &'static str,
    pub label: String,
    pub bracket: VectorField,
    pub claimed_rhs: VectorField,
    pub verdict: ZeroVerdict,
}

impl RelationCheck {
    pub fn passed(&self) -> bool {
        self.verdict.is_zero()
    }
}

/// Per-relation record for the six commutation relations.
#[derive(Debug, Clone)]
pub struct AlgebraWitness {
    pub relations: Vec<RelationCheck>,
}

impl AlgebraWitness {
    pub fn all_passed(&self) -> bool {
        self.relations.iter().all(RelationCheck::passed)
    }

    pub fn relation(&self, id: &str) -> Option<&RelationCheck> {
        self.relations.iter().find(|r| r.id == id)
    }

    pub fn to_report(&self) -> CheckReport {
        let mut report = CheckReport::new();
        for r in &self.relations {
            report.push(CheckEntry::zero(r.id, r.label.clone(), r.verdict.clone()));
        }
        report
    }
}

fn relation_check(
    id: &'static str,
    label: impl Into<String>,
    bracket: VectorField,
    claimed_rhs: VectorField,
    policy: &Policy,
    bindings: &Bindings,
) -> Result<RelationCheck> {
    let diff = bracket.sub(&claimed_rhs)?;
    let verdict = diff.is_zero(policy, bindings)?;
    Ok(RelationCheck {
        id,
        label: label.into(),
        bracket,
        claimed_rhs,
        verdict,
    })
}

// ---------------------------------------------------------------------
// Small dense linear algebra over sampled field values.

/// Orthonormalizes `basis` (modified Gram-Schmidt), dropping vectors
/// whose remaining norm falls below `rel_tol` times their original
/// norm. Returns the surviving orthonormal vectors and the smallest
/// retention ratio observed among survivors.
fn orthonormalize(basis: &[Vec<f64>], rel_tol: f64) -> (Vec<Vec<f64>>, usize, f64) {
    let mut ortho: Vec<Vec<f64>> = Vec::new();
    let mut dropped = 0usize;
    let mut min_ratio = f64::INFINITY;
    for b in basis {
        let orig = norm(b);
        if orig == 0.0 {
            dropped += 1;
            continue;
        }
        let mut v = b.clone();
        for u in &ortho {
            let d = dot(&v, u);
            for (vi, ui) in v.iter_mut().zip(u) {
                *vi -= d * ui;
            }
        }
        let rem = norm(&v);
        let ratio = rem / orig;
        if ratio <= rel_tol {
            dropped += 1;
            continue;
        }
        min_ratio = min_ratio.min(ratio);
        for vi in v.iter_mut() {
            *vi /= rem;
        }
        ortho.push(v);
    }
    if !min_ratio.is_finite() {
        min_ratio = 0.0;
    }
    (ortho, dropped, min_ratio)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Distance from `v` to the span of the orthonormal family.
fn projection_residual(v: &[f64], ortho: &[Vec<f64>]) -> f64 {
    let mut r = v.to_vec();
    for u in ortho {
        let d = dot(&r, u);
        for (ri, ui) in r.iter_mut().zip(u) {
            *ri -= d * ui;
        }
    }
    norm(&r)
}

const RANK_REL_TOL: f64 = 1e-9;

/// Result of a numeric span-membership check.
#[derive(Debug, Clone)]
pub struct SpanCheck {
    pub verdict: ZeroVerdict,
    /// Sample points at which the basis was rank-deficient; a
    /// diagnostic, not a failure.
    pub rank_deficient_samples: usize,
}

/// Checks `[X, Y] = sum_i c_i B_i`.
///
/// With coefficients supplied the difference is a symbolic zero check
/// (exact certificates possible). Without them, the bracket is tested
/// for pointwise membership in the span of the basis values by
/// least-squares projection; the worst normalized projection residual
/// becomes the verdict.
pub fn verify_span_closure(
    x: &VectorField,
    y: &VectorField,
    basis: &[VectorField],
    coeffs: Option<&[Expr]>,
    policy: &Policy,
    bindings: &Bindings,
) -> Result<SpanCheck> {
    for b in basis {
        if b.chart() != x.chart() {
            return Err(Error::ChartMismatch);
        }
    }
    let bracket = lie_bracket(x, y)?;
    if let Some(coeffs) = coeffs {
        if coeffs.len() != basis.len() {
            return Err(Error::CoefficientCount {
                expected: basis.len(),
                got: coeffs.len(),
            });
        }
        let terms: Vec<(Expr, &VectorField)> = coeffs
            .iter()
            .cloned()
            .zip(basis.iter())
            .collect();
        let rhs = VectorField::linear_combination(&terms)?;
        let verdict = bracket.sub(&rhs)?.is_zero(policy, bindings)?;
        return Ok(SpanCheck {
            verdict,
            rank_deficient_samples: 0,
        });
    }

    let chart = x.chart();
    let sampler = Sampler::new(chart, policy.seed);
    let mut worst = 0.0f64;
    let mut worst_point: Option<Vec<f64>> = None;
    let mut deficient = 0usize;
    for i in 0..policy.samples {
        let point = sampler.point(i, |p| {
            bracket.eval(p, bindings).is_ok()
                && basis.iter().all(|b| b.eval(p, bindings).is_ok())
        })?;
        let v = bracket.eval(&point, bindings)?;
        let vals: Vec<Vec<f64>> = basis
            .iter()
            .map(|b| b.eval(&point, bindings))
            .collect::<Result<_>>()?;
        let (ortho, dropped, _) = orthonormalize(&vals, RANK_REL_TOL);
        if dropped > 0 {
            deficient += 1;
        }
        let residual = projection_residual(&v, &ortho) / (1.0 + norm(&v));
        if residual > worst || worst_point.is_none() {
            worst = residual;
            worst_point = Some(point);
        }
    }
    let verdict = if worst <= policy.tolerance {
        ZeroVerdict::NumericallyZero {
            max_residual: worst,
            samples: policy.samples,
        }
    } else {
        ZeroVerdict::NonZero {
            witness: worst_point.expect("at least one sample"),
            residual: worst,
        }
    };
    Ok(SpanCheck {
        verdict,
        rank_deficient_samples: deficient,
    })
}

/// Pointwise linear-independence diagnostic for a family of fields.
fn independence_entry(
    fields: &[&VectorField],
    policy: &Policy,
    bindings: &Bindings,
) -> Result<CheckEntry> {
    let chart = fields[0].chart();
    let sampler = Sampler::new(chart, policy.seed);
    let mut full = true;
    let mut min_ratio = f64::INFINITY;
    let mut worst_point = vec![f64::NAN; chart.dim()];
    for i in 0..policy.samples {
        let point = sampler.point(i, |p| fields.iter().all(|f| f.eval(p, bindings).is_ok()))?;
        let vals: Vec<Vec<f64>> = fields
            .iter()
            .map(|f| f.eval(&point, bindings))
            .collect::<Result<_>>()?;
        let (_, dropped, ratio) = orthonormalize(&vals, RANK_REL_TOL);
        let deficient = dropped > 0;
        if deficient || ratio < min_ratio {
            min_ratio = if deficient { 0.0 } else { ratio };
            worst_point = point;
        }
        if deficient {
            full = false;
        }
    }
    if !min_ratio.is_finite() {
        min_ratio = 0.0;
    }
    Ok(CheckEntry::new(
        "independence",
        format!("the {} fields are pointwise linearly independent", fields.len()),
        CheckOutcome::Rank {
            expected: fields.len(),
            full_rank_everywhere: full,
            min_relative_pivot: min_ratio,
            worst_point,
        },
    ))
}

// ---------------------------------------------------------------------
// The six-relation algebra and its coefficient formulas.

/// Checks the six commutation relations of the four-field algebra
/// literally as displayed, using the supplied coefficients:
///
/// ```text
/// 6a  [X1, X2] = N1 X1 + N2 X2
/// 6b  [XH, X3] = A1 XH + A2 X3
/// 6c  [XH, X1] = -C2 X1 + B2 X2
/// 6d  [XH, X2] = C1 X1 + C2 X2
/// 6e  [X3, X1] = D1 XH + D2 X2
/// 6f  [X3, X2] = E1 XH + E2 X1
/// ```
pub fn verify_theorem1(
    x1: &VectorField,
    x2: &VectorField,
    x3: &VectorField,
    xh: &VectorField,
    c: &StructureCoefficients,
    policy: &Policy,
    bindings: &Bindings,
) -> Result<AlgebraWitness> {
    let lc = |terms: &[(Expr, &VectorField)]| VectorField::linear_combination(terms);
    let n1 = coeff!(c, n1)?;
    let n2 = coeff!(c, n2)?;
    let a1 = coeff!(c, a1)?;
    let a2 = coeff!(c, a2)?;
    let b2 = coeff!(c, b2)?;
    let c1 = coeff!(c, c1)?;
    let c2 = coeff!(c, c2)?;
    let d1 = coeff!(c, d1)?;
    let d2 = coeff!(c, d2)?;
    let e1 = coeff!(c, e1)?;
    let e2 = coeff!(c, e2)?;

    let relations = vec![
        relation_check(
            "6a",
            "[X1, X2] = N1 X1 + N2 X2",
            lie_bracket(x1, x2)?,
            lc(&[(n1, x1), (n2, x2)])?,
            policy,
            bindings,
        )?,
        relation_check(
            "6b",
            "[XH, X3] = A1 XH + A2 X3",
            lie_bracket(xh, x3)?,
            lc(&[(a1, xh), (a2, x3)])?,
            policy,
            bindings,
        )?,
        relation_check(
            "6c",
            "[XH, X1] = -C2 X1 + B2 X2",
            lie_bracket(xh, x1)?,
            lc(&[(Expr::neg(c2.clone()), x1), (b2, x2)])?,
            policy,
            bindings,
        )?,
        relation_check(
            "6d",
            "[XH, X2] = C1 X1 + C2 X2",
            lie_bracket(xh, x2)?,
            lc(&[(c1, x1), (c2, x2)])?,
            policy,
            bindings,
        )?,
        relation_check(
            "6e",
            "[X3, X1] = D1 XH + D2 X2",
            lie_bracket(x3, x1)?,
            lc(&[(d1, xh), (d2, x2)])?,
            policy,
            bindings,
        )?,
        relation_check(
            "6f",
            "[X3, X2] = E1 XH + E2 X1",
            lie_bracket(x3, x2)?,
            lc(&[(e1, xh), (e2, x1)])?,
            policy,
            bindings,
        )?,
    ];
    Ok(AlgebraWitness { relations })
}

/// The five freely choosable structure functions of the reduction.
#[derive(Debug, Clone)]
pub struct Lemma4Free {
    pub n1: Expr,
    pub d1: Expr,
    pub d2: Expr,
    pub e1: Expr,
    pub e2: Expr,
}

/// Computes the seven dependent structure functions from the five free
/// ones, verbatim from the closed formulas, with
/// `XH = X1(dH) X2 - X2(dH) X1`:
///
/// ```text
/// C1 = X2(dH) N1 - X2^2(dH)
/// C2 = X1X2(dH) - X1(dH) N1
/// B1 = -C2
/// B2 = (X1(dH)/X2(dH)) (X1X2(dH) - X1(dH) N1) + X2X1(dH)/X2(dH) - X1^2(dH)
/// N2 = X1X2(dH)/X2(dH) - (X1(dH)/X2(dH)) N1 + X2X1(dH)/X2(dH)
/// A1 = (X1(dH)/X2(dH)) E2 - X2(dH) D1 - X1(dH) E1 + X3X2(dH)/X2(dH)
/// A2 = -(X2(dH) D2 + X1(dH)^2/X2(dH) E2 + X3X1(dH) + X3X2(dH) X1(dH)/X2(dH))
/// ```
///
/// The denominator `X2(dH)` must not vanish on the sampled domain.
pub fn compute_lemma4_coefficients(
    x1: &VectorField,
    x2: &VectorField,
    x3: &VectorField,
    h: &Expr,
    free: &Lemma4Free,
    policy: &Policy,
    bindings: &Bindings,
) -> Result<StructureCoefficients> {
    let x1h = x1.apply(h);
    let x2h = x2.apply(h);

    // Division-domain audit for the recurring denominator.
    let sampler = Sampler::new(x1.chart(), policy.seed);
    let mut min_abs = f64::INFINITY;
    let mut min_point = Vec::new();
    for i in 0..policy.samples {
        let p = sampler.point(i, |pt| x2h.eval(pt, bindings).is_ok())?;
        let v = x2h.eval(&p, bindings)?.abs();
        if v < min_abs {
            min_abs = v;
            min_point = p;
        }
    }
    if min_abs <= policy.tolerance {
        return Err(Error::DivisionDomain {
            min_abs,
            point: min_point,
        });
    }

    let inv = Expr::pow(x2h.clone(), -1);
    let x1x2h = x1.apply(&x2h);
    let x2x1h = x2.apply(&x1h);
    let x2x2h = x2.apply(&x2h);
    let x3x1h = x3.apply(&x1h);
    let x3x2h = x3.apply(&x2h);

    let n1 = free.n1.clone();
    let c1 = Expr::product(vec![x2h.clone(), n1.clone()]) - x2x2h;
    let c2 = x1x2h.clone() - Expr::product(vec![x1h.clone(), n1.clone()]);
    let b1 = Expr::neg(c2.clone());
    let b2 = Expr::product(vec![x1h.clone(), inv.clone(), c2.clone()])
        + Expr::product(vec![x2x1h.clone(), inv.clone()])
        - x1.apply(&x1h);
    let n2 = Expr::product(vec![x1x2h, inv.clone()])
        - Expr::product(vec![x1h.clone(), inv.clone(), n1.clone()])
        + Expr::product(vec![x2x1h, inv.clone()]);
    let a1 = Expr::product(vec![x1h.clone(), inv.clone(), free.e2.clone()])
        - Expr::product(vec![x2h.clone(), free.d1.clone()])
        - Expr::product(vec![x1h.clone(), free.e1.clone()])
        + Expr::product(vec![x3x2h.clone(), inv.clone()]);
    let a2 = Expr::neg(
        Expr::product(vec![x2h, free.d2.clone()])
            + Expr::product(vec![x1h.clone(), x1h.clone(), inv.clone(), free.e2.clone()])
            + x3x1h
            + Expr::product(vec![x3x2h, x1h, inv]),
    );

    Ok(StructureCoefficients {
        n1: Some(n1),
        n2: Some(n2),
        a1: Some(a1),
        a2: Some(a2),
        b1: Some(b1),
        b2: Some(b2),
        c1: Some(c1),
        c2: Some(c2),
        d1: Some(free.d1.clone()),
        d2: Some(free.d2.clone()),
        e1: Some(free.e1.clone()),
        e2: Some(free.e2.clone()),
    })
}

/// Eq. 11a combination: `XH = X1(H) X2 - X2(H) X1`.
pub fn hamiltonian_combination(
    x1: &VectorField,
    x2: &VectorField,
    h: &Expr,
) -> Result<VectorField> {
    VectorField::linear_combination(&[
        (x1.apply(h), x2),
        (Expr::neg(x2.apply(h)), x1),
    ])
}

/// Checks the three reduced relations together with relations 6b-6d,
/// each independently; the reduction derivation is never assumed sound.
///
/// Relation 6b is checked by span projection (is `[XH, X3]` in the
/// pointwise span of `{XH, X3}`?), because the closed formulas for
/// `A1, A2` do not make it an identity; the span test localizes exactly
/// this failure on systems where the second tensor is not Poisson.
pub fn verify_lemma4_reduction(
    x1: &VectorField,
    x2: &VectorField,
    x3: &VectorField,
    h: &Expr,
    c: &StructureCoefficients,
    policy: &Policy,
    bindings: &Bindings,
) -> Result<CheckReport> {
    let xh = hamiltonian_combination(x1, x2, h)?;
    let x1h = x1.apply(h);
    let x2h = x2.apply(h);
    let n1 = coeff!(c, n1)?;
    let n2 = coeff!(c, n2)?;
    let b2 = coeff!(c, b2)?;
    let c1 = coeff!(c, c1)?;
    let c2 = coeff!(c, c2)?;
    let d1 = coeff!(c, d1)?;
    let d2 = coeff!(c, d2)?;
    let e1 = coeff!(c, e1)?;
    let e2 = coeff!(c, e2)?;

    let mut report = CheckReport::new();

    let r1 = relation_check(
        "reduced-12",
        "[X1, X2] = N1 X1 + N2 X2",
        lie_bracket(x1, x2)?,
        VectorField::linear_combination(&[(n1, x1), (n2, x2)])?,
        policy,
        bindings,
    )?;
    report.push(CheckEntry::zero(r1.id, r1.label.clone(), r1.verdict.clone()));

    let rhs31 = VectorField::linear_combination(&[
        (
            Expr::product(vec![d1.clone(), x1h.clone()]) + d2.clone(),
            x2,
        ),
        (Expr::neg(Expr::product(vec![d1.clone(), x2h.clone()])), x1),
    ])?;
    let r2 = relation_check(
        "reduced-31",
        "[X3, X1] = (D1 X1(dH) + D2) X2 - D1 X2(dH) X1",
        lie_bracket(x3, x1)?,
        rhs31,
        policy,
        bindings,
    )?;
    report.push(CheckEntry::zero(r2.id, r2.label.clone(), r2.verdict.clone()));

    let rhs32 = VectorField::linear_combination(&[
        (
            e2.clone() - Expr::product(vec![e1.clone(), x2h.clone()]),
            x1,
        ),
        (Expr::neg(Expr::product(vec![e1.clone(), x1h.clone()])), x2),
    ])?;
    let r3 = relation_check(
        "reduced-32",
        "[X3, X2] = (E2 - E1 X2(dH)) X1 - E1 X1(dH) X2",
        lie_bracket(x3, x2)?,
        rhs32,
        policy,
        bindings,
    )?;
    report.push(CheckEntry::zero(r3.id, r3.label.clone(), r3.verdict.clone()));

    let span = verify_span_closure(
        &xh,
        x3,
        &[xh.clone(), x3.clone()],
        None,
        policy,
        bindings,
    )?;
    report.push(CheckEntry::zero(
        "6b-span",
        "[XH, X3] lies in span{XH, X3}",
        span.verdict,
    ));

    let r6c = relation_check(
        "6c",
        "[XH, X1] = -C2 X1 + B2 X2",
        lie_bracket(&xh, x1)?,
        VectorField::linear_combination(&[(Expr::neg(c2.clone()), x1), (b2, x2)])?,
        policy,
        bindings,
    )?;
    report.push(CheckEntry::zero(r6c.id, r6c.label.clone(), r6c.verdict.clone()));

    let r6d = relation_check(
        "6d",
        "[XH, X2] = C1 X1 + C2 X2",
        lie_bracket(&xh, x2)?,
        VectorField::linear_combination(&[(c1, x1), (c2, x2)])?,
        policy,
        bindings,
    )?;
    report.push(CheckEntry::zero(r6d.id, r6d.label.clone(), r6d.verdict.clone()));

    Ok(report)
}

/// Checks the three-relation algebra
/// `[X1,X2] = 0`, `[X3,X1] = X1 - X2`, `[X3,X2] = 0`
/// literally, plus the pointwise linear-independence diagnostic.
pub fn check_delta_algebra(
    x1: &VectorField,
    x2: &VectorField,
    x3: &VectorField,
    policy: &Policy,
    bindings: &Bindings,
) -> Result<CheckReport> {
    let mut report = CheckReport::new();
    let zero = VectorField::zero(x1.chart().clone());

    let r1 = relation_check(
        "delta-12",
        "[X1, X2] = 0",
        lie_bracket(x1, x2)?,
        zero.clone(),
        policy,
        bindings,
    )?;
    report.push(CheckEntry::zero(r1.id, r1.label.clone(), r1.verdict.clone()));

    let r2 = relation_check(
        "delta-31",
        "[X3, X1] = X1 - X2",
        lie_bracket(x3, x1)?,
        x1.sub(x2)?,
        policy,
        bindings,
    )?;
    report.push(CheckEntry::zero(r2.id, r2.label.clone(), r2.verdict.clone()));

    let r3 = relation_check(
        "delta-32",
        "[X3, X2] = 0",
        lie_bracket(x3, x2)?,
        zero,
        policy,
        bindings,
    )?;
    report.push(CheckEntry::zero(r3.id, r3.label.clone(), r3.verdict.clone()));

    report.push(independence_entry(&[x1, x2, x3], policy, bindings)?);
    Ok(report)
}

/// The second-order Hamiltonian condition `X1 X2 (dH) = 0`, plus the
/// symmetrized variant `(X1 X2 + X2 X1)(dH) = 0`; both are reported.
pub fn check_hamiltonian_condition(
    x1: &VectorField,
    x2: &VectorField,
    h: &Expr,
    policy: &Policy,
    bindings: &Bindings,
) -> Result<CheckReport> {
    if x1.chart() != x2.chart() {
        return Err(Error::ChartMismatch);
    }
    let chart = x1.chart();
    let pde = x1.apply(&x2.apply(h));
    let symmetric = pde.clone() + x2.apply(&x1.apply(h));
    let mut report = CheckReport::new();
    report.push(CheckEntry::zero(
        "pde",
        "X1 X2 (dH) = 0",
        decide_zero(&pde, chart, policy, bindings)?,
    ));
    report.push(CheckEntry::zero(
        "pde-symmetrized",
        "(X1 X2 + X2 X1)(dH) = 0",
        decide_zero(&symmetric, chart, policy, bindings)?,
    ));
    Ok(report)
}

/// Builds the separable Hamiltonian `I1(xi1) + I2(xi2)` from invariants
/// of the two fields, first verifying the invariance preconditions
/// `X1(xi1) = 0` and `X2(xi2) = 0`.
pub fn build_separable_hamiltonian(
    xi1: &Expr,
    xi2: &Expr,
    i1: &str,
    i2: &str,
    x1: &VectorField,
    x2: &VectorField,
    policy: &Policy,
    bindings: &Bindings,
) -> Result<Expr> {
    let chart = x1.chart();
    for (which, field, xi) in [("X1(xi1)", x1, xi1), ("X2(xi2)", x2, xi2)] {
        let v = decide_zero(&field.apply(xi), chart, policy, bindings)?;
        if let ZeroVerdict::NonZero { witness, residual } = v {
            return Err(Error::Invariance {
                what: which.to_string(),
                residual,
                witness,
            });
        }
    }
    Ok(Expr::opaque(i1, 0, xi1.clone()) + Expr::opaque(i2, 0, xi2.clone()))
}

/// The assembled quintuple with its full audit.
#[derive(Debug, Clone)]
pub struct QbhSystem {
    pub chart: Arc<Chart>,
    pub x1: VectorField,
    pub x2: VectorField,
    pub x3: VectorField,
    pub xh: VectorField,
    pub h: Expr,
    pub f: Expr,
    pub rho: Expr,
    pub j1: PoissonCandidate,
    pub j2: PoissonCandidate,
    pub p: Multivector,
    pub audit: CheckReport,
}

impl QbhSystem {
    pub fn overall_pass(&self) -> bool {
        self.audit.overall_pass()
    }

    /// Entries belonging to one of the ten numbered audits.
    pub fn audit_entries(&self, n: usize) -> Vec<&CheckEntry> {
        let prefix = format!("{n}.");
        self.audit
            .entries
            .iter()
            .filter(|e| e.id.starts_with(&prefix))
            .collect()
    }

    /// True when every entry of the numbered audit passed.
    pub fn audit_passed(&self, n: usize) -> bool {
        let entries = self.audit_entries(n);
        !entries.is_empty() && entries.iter().all(|e| e.passed)
    }
}

/// Assembles the quintuple `(M, X1 ^ X2, H, XH ^ X3, F)` and audits
/// every consequence independently: the system is returned regardless
/// of verdicts, and the overall status reflects them. Failed audits are
/// results, not errors.
pub fn assemble_qbh(
    x1: &VectorField,
    x2: &VectorField,
    x3: &VectorField,
    h: &Expr,
    f: &Expr,
    policy: &Policy,
    bindings: &Bindings,
) -> Result<QbhSystem> {
    if x1.chart() != x2.chart() || x1.chart() != x3.chart() {
        return Err(Error::ChartMismatch);
    }
    let chart = x1.chart().clone();
    let mut audit = CheckReport::new();

    // (1) the three-relation algebra plus independence
    audit.extend_prefixed("1.", check_delta_algebra(x1, x2, x3, policy, bindings)?);

    // (2) the Hamiltonian condition
    audit.extend_prefixed("2.", check_hamiltonian_condition(x1, x2, h, policy, bindings)?);

    let xh = hamiltonian_combination(x1, x2, h)?;
    let j1 = PoissonCandidate::decomposable(x1, x2)?;
    let j2 = PoissonCandidate::decomposable(&xh, x3)?;
    let p = j1.bivector().add(j2.bivector())?;

    // (3)-(4) Jacobi identities of both tensors
    audit.push(CheckEntry::zero(
        "3.j1-jacobi",
        "[J1, J1] = 0 (first tensor is Poisson)",
        check_jacobi_identity(&j1, policy, bindings)?,
    ));
    audit.push(CheckEntry::zero(
        "4.j2-jacobi",
        "[J2, J2] = 0 (second tensor is Poisson)",
        check_jacobi_identity(&j2, policy, bindings)?,
    ));

    // (5) compatibility
    audit.push(CheckEntry::zero(
        "5.compatibility",
        "[J1, J2] = 0",
        check_compatibility(&j1, &j2, policy, bindings)?,
    ));

    // (6) XH is an infinitesimal automorphism of J1
    audit.push(CheckEntry::zero(
        "6.automorphism",
        "L_XH J1 = 0",
        check_infinitesimal_automorphism(&xh, &j1, policy, bindings)?,
    ));

    // (7) F as first integral, and separately as Casimir
    audit.push(CheckEntry::zero(
        "7.first-integral",
        "{H, F} = 0",
        check_first_integral(&j1, h, f, policy, bindings)?,
    ));
    audit.push(CheckEntry::zero(
        "7.casimir",
        "dF | J1 = 0 (F is a Casimir of J1)",
        check_casimir(&j1, f, policy, bindings)?,
    ));

    // (8) the scaling identity X_F = rho XH, with X_F expanded as
    // XH(dF) X3 - X3(dF) XH
    let rho = Expr::neg(x3.apply(f));
    let xf = VectorField::linear_combination(&[
        (xh.apply(f), x3),
        (Expr::neg(x3.apply(f)), &xh),
    ])?;
    let residual = xf.sub(&xh.scaled(&rho))?;
    audit.push(CheckEntry::zero(
        "8.scaling-identity",
        "X_F = rho XH",
        residual.is_zero(policy, bindings)?,
    ));

    // (9) rho non-vanishing over the sampled domain
    let sampler = Sampler::new(&chart, policy.seed);
    let mut min_abs = f64::INFINITY;
    let mut min_point = vec![f64::NAN; chart.dim()];
    for i in 0..policy.samples {
        let pt = sampler.point(i, |p| rho.eval(p, bindings).is_ok())?;
        let v = rho.eval(&pt, bindings)?.abs();
        if v < min_abs {
            min_abs = v;
            min_point = pt;
        }
    }
    audit.push(CheckEntry::new(
        "9.rho-nonvanishing",
        "min |rho| over the sampled domain",
        CheckOutcome::MinAbs {
            min: min_abs,
            threshold: policy.tolerance,
            at: min_point,
        },
    ));

    // (10) the combined tensor is Poisson
    let p_candidate = PoissonCandidate::new(p.clone())?;
    audit.push(CheckEntry::zero(
        "10.p-jacobi",
        "[P, P] = 0 for P = J1 + J2",
        check_jacobi_identity(&p_candidate, policy, bindings)?,
    ));

    Ok(QbhSystem {
        chart,
        x1: x1.clone(),
        x2: x2.clone(),
        x3: x3.clone(),
        xh,
        h: h.clone(),
        f: f.clone(),
        rho,
        j1,
        j2,
        p,
        audit,
    })
}

/// The one-symmetry construction: a conserved `H` (`X1(dH) = 0`) and a
/// symmetry `X3` with `[X3, X1] = X1` yield the tensor `X1 ^ X3` with
/// scaling `rho = X3(dH)` conserved along `X1`. The orientation of
/// `dH | (X1 ^ X3) = +/-rho X1` is reported, not enforced.
pub fn check_hojman_case(
    x1: &VectorField,
    x3: &VectorField,
    h: &Expr,
    policy: &Policy,
    bindings: &Bindings,
) -> Result<CheckReport> {
    if x1.chart() != x3.chart() {
        return Err(Error::ChartMismatch);
    }
    let chart = x1.chart();
    let mut report = CheckReport::new();

    report.push(CheckEntry::zero(
        "conserved",
        "X1(dH) = 0",
        decide_zero(&x1.apply(h), chart, policy, bindings)?,
    ));

    let sym = relation_check(
        "symmetry",
        "[X3, X1] = X1",
        lie_bracket(x3, x1)?,
        x1.clone(),
        policy,
        bindings,
    )?;
    report.push(CheckEntry::zero(sym.id, sym.label.clone(), sym.verdict.clone()));

    let rho = x3.apply(h);
    report.push(CheckEntry::zero(
        "rho-conserved",
        "X1(rho) = 0 for rho = X3(dH)",
        decide_zero(&x1.apply(&rho), chart, policy, bindings)?,
    ));

    let j = PoissonCandidate::decomposable(x1, x3)?;
    let contraction = crate::poisson::hamiltonian_vector_field(&j, h)?;
    let plus = contraction.sub(&x1.scaled(&rho))?.is_zero(policy, bindings)?;
    let minus = contraction.add(&x1.scaled(&rho))?.is_zero(policy, bindings)?;
    let (sign, verdict) = if plus.is_zero() {
        (1i8, plus)
    } else if minus.is_zero() {
        (-1i8, minus)
    } else {
        (0i8, if plus.max_residual() <= minus.max_residual() { plus } else { minus })
    };
    report.push(CheckEntry::new(
        "contraction-sign",
        "dH | (X1 ^ X3) = +/-rho X1 (sign reported)",
        CheckOutcome::SignedZero { sign, verdict },
    ));

    Ok(report)
}

/// The extra conditions for a two-dimensional bi-Hamiltonian system:
/// `X3(dF) = -1` and `{H, F} = 0`.
pub fn check_bihamiltonian_2d(
    x3: &VectorField,
    h: &Expr,
    f: &Expr,
    j: &PoissonCandidate,
    policy: &Policy,
    bindings: &Bindings,
) -> Result<CheckReport> {
    if x3.chart() != j.chart() {
        return Err(Error::ChartMismatch);
    }
    let chart = x3.chart();
    let mut report = CheckReport::new();
    report.push(CheckEntry::zero(
        "normalization",
        "X3(dF) = -1",
        decide_zero(&(x3.apply(f) + Expr::int(1)), chart, policy, bindings)?,
    ));
    report.push(CheckEntry::zero(
        "commutes",
        "{H, F} = 0",
        decide_zero(&poisson_bracket(j, h, f)?, chart, policy, bindings)?,
    ));
    Ok(report)
}

/// Aggregated verdict over a slice of vector fields used by tests.
pub fn fields_zero(
    fields: &[VectorField],
    policy: &Policy,
    bindings: &Bindings,
) -> Result<ZeroVerdict> {
    let mut verdicts = Vec::new();
    for f in fields {
        let comps = f.components().to_vec();
        verdicts.extend(decide_zero_all(&comps, f.chart(), policy, bindings)?);
    }
    Ok(aggregate_verdicts(verdicts))
}
