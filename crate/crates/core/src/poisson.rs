//! Poisson-tensor semantics: Jacobi identity, brackets, Hamiltonian
//! vector fields, compatibility, infinitesimal automorphisms, first
//! integrals, and Casimirs.
//!
//! Degeneracy is deliberately never checked: singular (non-invertible)
//! tensors are first-class citizens, and there is no rank computation
//! anywhere in this API. Candidates that fail the Jacobi identity are
//! results to report, not construction errors.

use std::sync::Arc;

use crate::chart::Chart;
use crate::error::{Error, Result};
use crate::eval::Bindings;
use crate::expr::Expr;
use crate::multivec::{
    differential, interior_product, lie_derivative, multivector_is_zero, schouten, Multivector,
    VectorField,
};
use crate::zero::{decide_zero, Policy, ZeroVerdict};

/// A bivector proposed as a Poisson tensor, together with the verdict
/// of its latest Jacobi-identity audit (if any).
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonCandidate {
    bivector: Multivector,
    pub verified: Option<ZeroVerdict>,
}

impl PoissonCandidate {
    pub fn new(bivector: Multivector) -> Result<PoissonCandidate> {
        if bivector.degree() != 2 {
            return Err(Error::Degree {
                expected: 2,
                got: bivector.degree(),
            });
        }
        Ok(PoissonCandidate {
            bivector,
            verified: None,
        })
    }

    /// Candidate from a decomposable pair `X1 ^ X2`.
    pub fn decomposable(x1: &VectorField, x2: &VectorField) -> Result<PoissonCandidate> {
        PoissonCandidate::new(crate::multivec::wedge(
            &x1.to_multivector(),
            &x2.to_multivector(),
        )?)
    }

    pub fn bivector(&self) -> &Multivector {
        &self.bivector
    }

    pub fn chart(&self) -> &Arc<Chart> {
        self.bivector.chart()
    }

    /// Returns the candidate with the Jacobi verdict recorded.
    pub fn verify(mut self, policy: &Policy, bindings: &Bindings) -> Result<PoissonCandidate> {
        self.verified = Some(check_jacobi_identity(&self, policy, bindings)?);
        Ok(self)
    }

    /// Component `J^{ij}` for arbitrary index order.
    fn entry(&self, i: usize, j: usize) -> Expr {
        use std::cmp::Ordering;
        match i.cmp(&j) {
            Ordering::Less => self.bivector.component(&[i, j]),
            Ordering::Greater => Expr::neg(self.bivector.component(&[j, i])),
            Ordering::Equal => Expr::int(0),
        }
    }
}

/// A Hamiltonian structure: a Poisson candidate plus its scalar generator.
#[derive(Debug, Clone)]
pub struct HamiltonianSystem {
    pub chart: Arc<Chart>,
    pub tensor: PoissonCandidate,
    pub hamiltonian: Expr,
}

impl HamiltonianSystem {
    pub fn new(tensor: PoissonCandidate, hamiltonian: Expr) -> HamiltonianSystem {
        HamiltonianSystem {
            chart: tensor.chart().clone(),
            tensor,
            hamiltonian,
        }
    }
}

/// Jacobi identity as the vanishing of the Schouten self-bracket
/// `[J, J] = 0`. Singular tensors are allowed; no rank is computed.
pub fn check_jacobi_identity(
    j: &PoissonCandidate,
    policy: &Policy,
    bindings: &Bindings,
) -> Result<ZeroVerdict> {
    let s = schouten(&j.bivector, &j.bivector)?;
    multivector_is_zero(&s, policy, bindings)
}

/// The bracket `{F, G} = J^{ij} dF/dx^i dG/dx^j`, built antisymmetrically
/// over the stored components.
pub fn poisson_bracket(j: &PoissonCandidate, f: &Expr, g: &Expr) -> Result<Expr> {
    let chart = j.chart();
    let mut terms = Vec::new();
    for (key, coeff) in j.bivector.components() {
        let (i, k) = (key[0], key[1]);
        let dif = crate::diff::differentiate(f, i);
        let dkf = crate::diff::differentiate(f, k);
        let dig = crate::diff::differentiate(g, i);
        let dkg = crate::diff::differentiate(g, k);
        terms.push(Expr::product(vec![coeff.clone(), dif, dkg]));
        terms.push(Expr::neg(Expr::product(vec![coeff.clone(), dkf, dig])));
    }
    let _ = chart;
    Ok(Expr::sum(terms))
}

/// Hamiltonian vector field `X_H = dH | J`. For a decomposable tensor
/// `J = X1 ^ X2` this equals `X1(H) X2 - X2(H) X1` exactly.
pub fn hamiltonian_vector_field(j: &PoissonCandidate, h: &Expr) -> Result<VectorField> {
    let dh = differential(j.chart(), h);
    interior_product(&dh, &j.bivector)?.to_vector_field()
}

/// Compatibility of two Poisson candidates: `[J1, J2] = 0` under the
/// Schouten bracket.
pub fn check_compatibility(
    j1: &PoissonCandidate,
    j2: &PoissonCandidate,
    policy: &Policy,
    bindings: &Bindings,
) -> Result<ZeroVerdict> {
    let s = schouten(&j1.bivector, &j2.bivector)?;
    multivector_is_zero(&s, policy, bindings)
}

/// Infinitesimal automorphism: `L_X J = 0`.
pub fn check_infinitesimal_automorphism(
    x: &VectorField,
    j: &PoissonCandidate,
    policy: &Policy,
    bindings: &Bindings,
) -> Result<ZeroVerdict> {
    let l = lie_derivative(x, &j.bivector)?;
    multivector_is_zero(&l, policy, bindings)
}

/// First integral: `{H, F} = 0`.
pub fn check_first_integral(
    j: &PoissonCandidate,
    h: &Expr,
    f: &Expr,
    policy: &Policy,
    bindings: &Bindings,
) -> Result<ZeroVerdict> {
    let bracket = poisson_bracket(j, h, f)?;
    decide_zero(&bracket, j.chart(), policy, bindings)
}

/// Casimir: `dF | J = 0` as a vector field, so `F` commutes with
/// everything.
pub fn check_casimir(
    j: &PoissonCandidate,
    f: &Expr,
    policy: &Policy,
    bindings: &Bindings,
) -> Result<ZeroVerdict> {
    hamiltonian_vector_field(j, f)?.is_zero(policy, bindings)
}

/// `J^{ij}` as a full antisymmetric component matrix; used by callers
/// that need arbitrary index order.
pub fn tensor_entry(j: &PoissonCandidate, i: usize, k: usize) -> Expr {
    j.entry(i, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multivec::wedge;
    use crate::parse::parse_expr;

    fn chart3() -> Arc<Chart> {
        Chart::new(
            vec!["x1".into(), "x2".into(), "x3".into()],
            vec![(0.6, 2.0), (-1.5, 1.5), (-2.0, 2.0)],
            vec![],
        )
        .unwrap()
    }

    fn rotation_tensor(chart: &Arc<Chart>) -> PoissonCandidate {
        let x1 = VectorField::parse(chart, &["-x2", "x1", "0"]).unwrap();
        let x2 = VectorField::parse(chart, &["0", "0", "1"]).unwrap();
        PoissonCandidate::decomposable(&x1, &x2).unwrap()
    }

    #[test]
    fn canonical_pair_brackets_to_one() {
        let chart = chart3();
        let d1 = VectorField::parse(&chart, &["1", "0", "0"]).unwrap();
        let d2 = VectorField::parse(&chart, &["0", "1", "0"]).unwrap();
        let j = PoissonCandidate::decomposable(&d1, &d2).unwrap();
        let b = poisson_bracket(&j, &Expr::var(0), &Expr::var(1)).unwrap();
        assert_eq!(crate::expr::simplify_basic(&b), Expr::int(1));
    }

    #[test]
    fn jacobi_identity_verdicts() {
        let chart = chart3();
        let policy = Policy::default();
        let bindings = Bindings::empty();
        let d1 = VectorField::parse(&chart, &["1", "0", "0"]).unwrap();
        let d2 = VectorField::parse(&chart, &["0", "1", "0"]).unwrap();
        let j = PoissonCandidate::decomposable(&d1, &d2).unwrap();
        assert_eq!(
            check_jacobi_identity(&j, &policy, &bindings).unwrap(),
            ZeroVerdict::ExactZero
        );
        assert_eq!(
            check_jacobi_identity(&rotation_tensor(&chart), &policy, &bindings).unwrap(),
            ZeroVerdict::ExactZero
        );
    }

    #[test]
    fn bracket_antisymmetry_via_normal_form() {
        let chart = chart3();
        let j = rotation_tensor(&chart);
        let f = parse_expr("x1^2*x3 + x2", &chart).unwrap();
        let g = parse_expr("x1*x2 - x3", &chart).unwrap();
        let sum = poisson_bracket(&j, &f, &g).unwrap() + poisson_bracket(&j, &g, &f).unwrap();
        assert!(crate::poly::Poly::from_expr(&sum, 3).unwrap().is_zero());
    }

    #[test]
    fn casimir_of_rotation_tensor() {
        let chart = chart3();
        let policy = Policy::default();
        let bindings = Bindings::empty();
        let j = rotation_tensor(&chart);
        let r2 = parse_expr("x1^2 + x2^2", &chart).unwrap();
        assert_eq!(
            check_casimir(&j, &r2, &policy, &bindings).unwrap(),
            ZeroVerdict::ExactZero
        );
        // x3 is not a Casimir: dx3 | J = -X1
        assert!(matches!(
            check_casimir(&j, &Expr::var(2), &policy, &bindings).unwrap(),
            ZeroVerdict::NonZero { .. }
        ));
        // constants always are
        assert_eq!(
            check_casimir(&j, &Expr::int(5), &policy, &bindings).unwrap(),
            ZeroVerdict::ExactZero
        );
    }

    #[test]
    fn hamiltonian_field_of_height_is_minus_rotation() {
        let chart = chart3();
        let j = rotation_tensor(&chart);
        let xh = hamiltonian_vector_field(&j, &Expr::var(2)).unwrap();
        let expected = VectorField::parse(&chart, &["x2", "-x1", "0"]).unwrap();
        let diff = xh.sub(&expected).unwrap();
        assert_eq!(
            diff.is_zero(&Policy::default(), &Bindings::empty()).unwrap(),
            ZeroVerdict::ExactZero
        );
    }

    #[test]
    fn hamiltonian_field_of_angular_hamiltonian() {
        // H = atan(x2/x1) + x3 gives X_H = X2 - X1 up to sampling accuracy
        let chart = chart3();
        let j = rotation_tensor(&chart);
        let h = parse_expr("atan(x2/x1) + x3", &chart).unwrap();
        let xh = hamiltonian_vector_field(&j, &h).unwrap();
        let expected = VectorField::parse(&chart, &["x2", "-x1", "1"]).unwrap();
        let diff = xh.sub(&expected).unwrap();
        let v = diff.is_zero(&Policy::default(), &Bindings::empty()).unwrap();
        assert!(v.is_zero(), "{v:?}");
    }

    #[test]
    fn first_integral_and_casimir_of_angular_hamiltonian() {
        let chart = chart3();
        let policy = Policy::default();
        let bindings = Bindings::empty();
        let j = rotation_tensor(&chart);
        let h = parse_expr("atan(x2/x1) + x3", &chart).unwrap();
        let f = parse_expr("x1^2 + x2^2", &chart).unwrap();
        let v = check_first_integral(&j, &h, &f, &policy, &bindings).unwrap();
        assert!(v.is_zero(), "{v:?}");
        // trivially, F = H
        assert!(check_first_integral(&j, &h, &h, &policy, &bindings)
            .unwrap()
            .is_zero());
        // and a genuine failure: J = d1^d2, H = x1, F = x2
        let d1 = VectorField::parse(&chart, &["1", "0", "0"]).unwrap();
        let d2 = VectorField::parse(&chart, &["0", "1", "0"]).unwrap();
        let jc = PoissonCandidate::decomposable(&d1, &d2).unwrap();
        assert!(matches!(
            check_first_integral(&jc, &Expr::var(0), &Expr::var(1), &policy, &bindings).unwrap(),
            ZeroVerdict::NonZero { .. }
        ));
    }

    #[test]
    fn automorphism_checks() {
        let chart = chart3();
        let policy = Policy::default();
        let bindings = Bindings::empty();
        let j = rotation_tensor(&chart);
        let d3 = VectorField::parse(&chart, &["0", "0", "1"]).unwrap();
        assert_eq!(
            check_infinitesimal_automorphism(&d3, &j, &policy, &bindings).unwrap(),
            ZeroVerdict::ExactZero
        );
        let xh = VectorField::parse(&chart, &["x2", "-x1", "1"]).unwrap();
        assert_eq!(
            check_infinitesimal_automorphism(&xh, &j, &policy, &bindings).unwrap(),
            ZeroVerdict::ExactZero
        );
        // x1 d1 scales d1^d2: L yields -d1^d2
        let d1 = VectorField::parse(&chart, &["1", "0", "0"]).unwrap();
        let d2 = VectorField::parse(&chart, &["0", "1", "0"]).unwrap();
        let jc = PoissonCandidate::decomposable(&d1, &d2).unwrap();
        let scale = VectorField::parse(&chart, &["x1", "0", "0"]).unwrap();
        assert!(matches!(
            check_infinitesimal_automorphism(&scale, &jc, &policy, &bindings).unwrap(),
            ZeroVerdict::NonZero { .. }
        ));
    }

    #[test]
    fn compatibility_verdicts() {
        let chart = chart3();
        let policy = Policy::default();
        let bindings = Bindings::empty();
        let j = rotation_tensor(&chart);
        assert_eq!(
            check_compatibility(&j, &j, &policy, &bindings).unwrap(),
            ZeroVerdict::ExactZero
        );
        // x3 * d1^d2 commutes with J ([J, x3 d1^d2] expands to 0 term by term)
        let s1 = VectorField::parse(&chart, &["x3", "0", "0"]).unwrap();
        let d2 = VectorField::parse(&chart, &["0", "1", "0"]).unwrap();
        let j2 = PoissonCandidate::new(
            wedge(&s1.to_multivector(), &d2.to_multivector()).unwrap(),
        )
        .unwrap();
        assert!(check_compatibility(&j, &j2, &policy, &bindings)
            .unwrap()
            .is_zero());
        // x1 * d1^d2 does not: the bracket is x2 d1^d2^d3
        let s2 = VectorField::parse(&chart, &["x1", "0", "0"]).unwrap();
        let j3 = PoissonCandidate::new(
            wedge(&s2.to_multivector(), &d2.to_multivector()).unwrap(),
        )
        .unwrap();
        match check_compatibility(&j, &j3, &policy, &bindings).unwrap() {
            ZeroVerdict::NonZero { residual, .. } => assert!(residual > 0.05),
            other => panic!("expected incompatibility, got {other:?}"),
        }
    }
}
