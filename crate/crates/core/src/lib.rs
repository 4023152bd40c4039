//! Symbolic verification toolkit for Poisson geometry: exact expression
//! calculus over coordinate charts, multivector fields with the
//! Schouten-Nijenhuis bracket, Poisson-tensor checks, quasi-bi-Hamiltonian
//! assembly and audit, and Jacobi structures, plus the shipped demo
//! systems and the structure-definition file runner behind the CLI.

pub mod chart;
pub mod diff;
pub mod error;
pub mod eval;
pub mod expr;
pub mod fixtures;
pub mod multivec;
pub mod jacobi;
pub mod poisson;
pub mod qbh;
pub mod report;
pub mod sdef;
pub mod parse;
pub mod poly;
pub mod zero;

pub use chart::Chart;
pub use diff::differentiate;
pub use error::{ChartError, Error, EvalError, ParseError, Result};
pub use eval::{Bindings, OpaqueFn};
pub use expr::{simplify_basic, Elementary, Expr};
pub use multivec::{
    differential, interior_product, lie_bracket, lie_derivative, multivector_is_zero, schouten,
    wedge, wedge_fields, Multivector, OneForm, VectorField,
};
pub use parse::{parse_expr, parse_expr_with, Declarations};
pub use poisson::{
    check_casimir, check_compatibility, check_first_integral, check_infinitesimal_automorphism,
    check_jacobi_identity, hamiltonian_vector_field, poisson_bracket, HamiltonianSystem,
    PoissonCandidate,
};
pub use report::{CheckEntry, CheckOutcome, CheckReport};
pub use jacobi::{check_jacobi_structure, check_theorem3, jacobi_structure, JacobiStructure};
pub use qbh::{
    assemble_qbh, build_separable_hamiltonian, check_bihamiltonian_2d, check_delta_algebra,
    check_hamiltonian_condition, check_hojman_case, compute_lemma4_coefficients,
    hamiltonian_combination, verify_lemma4_reduction, verify_span_closure, verify_theorem1,
    AlgebraWitness, Lemma4Free, QbhSystem, RelationCheck, SpanCheck, StructureCoefficients,
};
pub use poly::{polynomial_normal_form, Poly};
pub use zero::{aggregate_verdicts, decide_zero, decide_zero_all, Policy, Sampler, ZeroVerdict};
