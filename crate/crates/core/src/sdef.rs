//! Structure-definition files: a sectioned key-value format (TOML)
//! declaring a chart, named vector fields and scalars, opaque-symbol
//! bindings, and an ordered list of checks with optional expected-verdict
//! annotations. The CLI's `run` and `demo` commands and the shipped demo
//! systems all go through this one loader and runner.
//!
//! Layout:
//!
//! ```toml
//! title = "..."
//! description = "..."
//!
//! [chart]
//! coords = ["x1", "x2", "x3"]
//! intervals = { x1 = [0.6, 2.0], x2 = [-1.5, 1.5], x3 = [-2.0, 2.0] }
//! guards = ["4 - x1^2 - x2^2"]        # each must stay > 0
//!
//! [param.alpha]
//! value = 1.5
//!
//! [opaque.I1]
//! binding = "square"                   # identity | square | sin | const(c)
//!
//! [field.X1]
//! components = ["-x2", "x1", "0"]
//!
//! [scalar.H]
//! expr = "atan(x2/x1) + x3"
//!
//! [[check]]
//! id = "audit"
//! kind = "qbh"                         # see CheckKind
//! x1 = "X1"
//! ...
//! expect-fail = ["4.j2-jacobi"]        # entries that must fail
//! expect-exact = ["3.j1-jacobi"]       # entries that must be exact-zero
//! ```
//!
//! Scalar arguments of checks accept either the name of a declared
//! scalar or an inline expression; inline expressions may reference
//! declared scalars by name.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chart::Chart;
use crate::error::Error as CoreError;
use crate::eval::{Bindings, OpaqueFn};
use crate::expr::Expr;
use crate::jacobi::{check_jacobi_structure, check_theorem3};
use crate::multivec::{wedge, Multivector, VectorField};
use crate::parse::{parse_expr_with, Declarations};
use crate::poisson::{
    check_compatibility, check_infinitesimal_automorphism, check_jacobi_identity,
    PoissonCandidate,
};
use crate::qbh::{
    assemble_qbh, check_bihamiltonian_2d, check_delta_algebra, check_hamiltonian_condition,
    check_hojman_case, compute_lemma4_coefficients, verify_lemma4_reduction, verify_span_closure,
    verify_theorem1, Lemma4Free,
};
use crate::report::{CheckEntry, CheckOutcome, CheckReport};
use crate::zero::{decide_zero, Policy};

#[derive(Debug, Error)]
pub enum SdefError {
    #[error("invalid structure definition: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("chart: {0}")]
    Chart(#[from] crate::error::ChartError),
    #[error("{context}: {source}")]
    Parse {
        context: String,
        source: crate::error::ParseError,
    },
    #[error("check '{check}': unknown {what} '{name}'")]
    UnknownReference {
        check: String,
        what: &'static str,
        name: String,
    },
    #[error("check '{check}': kind '{kind}' is not one of the supported check kinds")]
    UnknownKind { check: String, kind: String },
    #[error("check '{check}' (kind '{kind}'): missing argument '{arg}'")]
    MissingArg {
        check: String,
        kind: String,
        arg: &'static str,
    },
    #[error("'{name}' is declared more than once (or collides across sections)")]
    DuplicateName { name: String },
    #[error("[opaque.{name}]: unknown binding selector '{selector}'")]
    BadBinding { name: String, selector: String },
    #[error("chart interval missing for coordinate '{0}'")]
    MissingInterval(String),
    #[error("check '{check}' failed to run: {source}")]
    Check {
        check: String,
        source: CoreError,
    },
    #[error(transparent)]
    Core(#[from] CoreError),
}

// ---------------------------------------------------------------------
// Raw deserialization model.

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDef {
    title: Option<String>,
    description: Option<String>,
    chart: RawChart,
    #[serde(default)]
    param: BTreeMap<String, RawParam>,
    #[serde(default)]
    opaque: BTreeMap<String, RawOpaque>,
    #[serde(default)]
    field: BTreeMap<String, RawField>,
    #[serde(default)]
    scalar: BTreeMap<String, RawScalar>,
    #[serde(default, rename = "check")]
    checks: Vec<RawCheck>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChart {
    coords: Vec<String>,
    intervals: BTreeMap<String, [f64; 2]>,
    #[serde(default)]
    guards: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParam {
    value: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOpaque {
    binding: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawField {
    components: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScalar {
    expr: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct RawCheck {
    id: Option<String>,
    kind: String,
    x: Option<String>,
    y: Option<String>,
    x1: Option<String>,
    x2: Option<String>,
    x3: Option<String>,
    xh: Option<String>,
    e: Option<String>,
    h: Option<String>,
    f: Option<String>,
    j: Option<[String; 2]>,
    j1: Option<[String; 2]>,
    j2: Option<[String; 2]>,
    lambda: Option<[String; 2]>,
    basis: Option<Vec<String>>,
    coeffs: Option<Vec<String>>,
    n1: Option<String>,
    n2: Option<String>,
    a1: Option<String>,
    a2: Option<String>,
    b1: Option<String>,
    b2: Option<String>,
    c1: Option<String>,
    c2: Option<String>,
    d1: Option<String>,
    d2: Option<String>,
    e1: Option<String>,
    e2: Option<String>,
    a: Option<String>,
    b: Option<String>,
    c: Option<String>,
    expr: Option<String>,
    apply: Option<Vec<String>>,
    plus: Option<String>,
    rho_expected: Option<String>,
    expect: Option<String>,
    #[serde(default)]
    expect_fail: Vec<String>,
    #[serde(default)]
    expect_exact: Vec<String>,
}

// ---------------------------------------------------------------------
// Resolved model.

/// A fully resolved check with expectations.
#[derive(Debug, Clone)]
pub struct CheckSpec {
    pub id: String,
    pub kind: CheckKind,
    pub expectation: Expectation,
}

#[derive(Debug, Clone)]
pub enum CheckKind {
    Jacobi {
        j: PoissonCandidate,
    },
    Compat {
        j1: PoissonCandidate,
        j2: PoissonCandidate,
    },
    Automorphism {
        x: VectorField,
        j: PoissonCandidate,
    },
    BracketSpan {
        x: VectorField,
        y: VectorField,
        basis: Vec<VectorField>,
        coeffs: Option<Vec<Expr>>,
    },
    Delta {
        x1: VectorField,
        x2: VectorField,
        x3: VectorField,
    },
    HamiltonianPde {
        x1: VectorField,
        x2: VectorField,
        h: Expr,
    },
    Lemma4 {
        x1: VectorField,
        x2: VectorField,
        x3: VectorField,
        h: Expr,
        free: Lemma4Free,
    },
    Theorem1 {
        x1: VectorField,
        x2: VectorField,
        x3: VectorField,
        xh: VectorField,
        coeffs: crate::qbh::StructureCoefficients,
    },
    Qbh {
        x1: VectorField,
        x2: VectorField,
        x3: VectorField,
        h: Expr,
        f: Expr,
        rho_expected: Option<Expr>,
    },
    Hojman {
        x1: VectorField,
        x3: VectorField,
        h: Expr,
    },
    Bih2d {
        x3: VectorField,
        h: Expr,
        f: Expr,
        j: PoissonCandidate,
    },
    JacobiStructure {
        lambda: Multivector,
        e: VectorField,
    },
    Theorem3 {
        x1: VectorField,
        x2: VectorField,
        xh: VectorField,
        a: Expr,
        b: Expr,
        c: Expr,
    },
    Zero {
        expr: Expr,
    },
    DerivZero {
        expr: Expr,
        apply: Vec<VectorField>,
        plus: Option<Expr>,
    },
}

impl CheckKind {
    pub fn name(&self) -> &'static str {
        match self {
            CheckKind::Jacobi { .. } => "jacobi",
            CheckKind::Compat { .. } => "compat",
            CheckKind::Automorphism { .. } => "automorphism",
            CheckKind::BracketSpan { .. } => "bracket-span",
            CheckKind::Delta { .. } => "delta",
            CheckKind::HamiltonianPde { .. } => "hamiltonian-pde",
            CheckKind::Lemma4 { .. } => "lemma4",
            CheckKind::Theorem1 { .. } => "theorem1",
            CheckKind::Qbh { .. } => "qbh",
            CheckKind::Hojman { .. } => "hojman",
            CheckKind::Bih2d { .. } => "bih2d",
            CheckKind::JacobiStructure { .. } => "jacobi-structure",
            CheckKind::Theorem3 { .. } => "theorem3",
            CheckKind::Zero { .. } => "zero",
            CheckKind::DerivZero { .. } => "deriv-zero",
        }
    }
}

/// Expected-verdict annotations: entries listed in `fail` must fail
/// (that is how counterexample systems ship as first-class demos);
/// everything else must pass; entries in `exact` must carry an
/// exact-zero certificate.
#[derive(Debug, Clone, Default)]
pub struct Expectation {
    pub all_fail: bool,
    pub fail: BTreeSet<String>,
    pub exact: BTreeSet<String>,
}

impl Expectation {
    pub fn expects_fail(&self, entry_id: &str) -> bool {
        self.all_fail || self.fail.contains(entry_id)
    }
}

/// A resolved structure definition.
#[derive(Debug, Clone)]
pub struct StructureDefinition {
    pub title: String,
    pub description: String,
    pub chart: Arc<Chart>,
    pub fields: BTreeMap<String, VectorField>,
    pub scalars: BTreeMap<String, Expr>,
    pub bindings: Bindings,
    pub checks: Vec<CheckSpec>,
}

impl StructureDefinition {
    pub fn parse(text: &str) -> Result<StructureDefinition, SdefError> {
        let raw: RawDef = toml::from_str(text)?;
        resolve(raw)
    }
}

fn resolve(raw: RawDef) -> Result<StructureDefinition, SdefError> {
    let dim = raw.chart.coords.len();
    let mut intervals = Vec::with_capacity(dim);
    for name in &raw.chart.coords {
        let iv = raw
            .chart
            .intervals
            .get(name)
            .ok_or_else(|| SdefError::MissingInterval(name.clone()))?;
        intervals.push((iv[0], iv[1]));
    }
    // Guards parse against the bare chart (coordinates only).
    let bare = Chart::new(raw.chart.coords.clone(), intervals.clone(), Vec::new())?;
    let mut guards = Vec::new();
    for (i, g) in raw.chart.guards.iter().enumerate() {
        let e = parse_expr_with(g, &bare, &Declarations::default()).map_err(|source| {
            SdefError::Parse {
                context: format!("[chart] guards[{i}]"),
                source,
            }
        })?;
        guards.push(e);
    }
    let chart = Chart::new(raw.chart.coords.clone(), intervals, guards)?;

    // Name hygiene across sections.
    let mut seen: BTreeSet<&String> = BTreeSet::new();
    for name in raw
        .param
        .keys()
        .chain(raw.opaque.keys())
        .chain(raw.scalar.keys())
    {
        if chart.coord_index(name).is_some() || !seen.insert(name) {
            return Err(SdefError::DuplicateName { name: name.clone() });
        }
    }

    let mut decls = Declarations::default();
    decls.params.extend(raw.param.keys().cloned());
    decls.opaques.extend(raw.opaque.keys().cloned());

    let mut bindings = Bindings::empty();
    for (name, p) in &raw.param {
        bindings = bindings.with_param(name.clone(), p.value);
    }
    for (name, o) in &raw.opaque {
        if let Some(selector) = &o.binding {
            let f = OpaqueFn::from_selector(selector).ok_or_else(|| SdefError::BadBinding {
                name: name.clone(),
                selector: selector.clone(),
            })?;
            bindings = bindings.with_fn(name.clone(), f);
        }
    }

    // Scalars parse with parameters and opaques only (no scalar-in-scalar
    // references; checks get substitution instead).
    let mut scalars = BTreeMap::new();
    for (name, s) in &raw.scalar {
        let e = parse_expr_with(&s.expr, &chart, &decls).map_err(|source| SdefError::Parse {
            context: format!("[scalar.{name}]"),
            source,
        })?;
        scalars.insert(name.clone(), e);
    }

    let mut fields = BTreeMap::new();
    for (name, f) in &raw.field {
        let mut comps = Vec::with_capacity(dim);
        for (i, c) in f.components.iter().enumerate() {
            let e = parse_expr_with(c, &chart, &decls).map_err(|source| SdefError::Parse {
                context: format!("[field.{name}] components[{i}]"),
                source,
            })?;
            comps.push(e);
        }
        fields.insert(name.clone(), VectorField::new(chart.clone(), comps)?);
    }

    let ctx = ResolveCtx {
        chart: &chart,
        decls: &decls,
        fields: &fields,
        scalars: &scalars,
    };
    let mut checks = Vec::with_capacity(raw.checks.len());
    for (i, rc) in raw.checks.iter().enumerate() {
        checks.push(resolve_check(&ctx, rc, i)?);
    }

    Ok(StructureDefinition {
        title: raw.title.unwrap_or_default(),
        description: raw.description.unwrap_or_default(),
        chart,
        fields,
        scalars,
        bindings,
        checks,
    })
}

struct ResolveCtx<'a> {
    chart: &'a Arc<Chart>,
    decls: &'a Declarations,
    fields: &'a BTreeMap<String, VectorField>,
    scalars: &'a BTreeMap<String, Expr>,
}

impl ResolveCtx<'_> {
    fn field(&self, check: &str, name: &str) -> Result<VectorField, SdefError> {
        self.fields
            .get(name)
            .cloned()
            .ok_or_else(|| SdefError::UnknownReference {
                check: check.to_string(),
                what: "field",
                name: name.to_string(),
            })
    }

    fn bivector(&self, check: &str, pair: &[String; 2]) -> Result<PoissonCandidate, SdefError> {
        let a = self.field(check, &pair[0])?;
        let b = self.field(check, &pair[1])?;
        Ok(PoissonCandidate::new(wedge(
            &a.to_multivector(),
            &b.to_multivector(),
        )?)?)
    }

    /// A scalar argument: a declared scalar name, or an inline
    /// expression (which may itself reference declared scalars).
    fn scalar(&self, check: &str, text: &str) -> Result<Expr, SdefError> {
        if let Some(e) = self.scalars.get(text) {
            return Ok(e.clone());
        }
        let mut decls = self.decls.clone();
        decls.params.extend(self.scalars.keys().cloned());
        let parsed =
            parse_expr_with(text, self.chart, &decls).map_err(|source| SdefError::Parse {
                context: format!("check '{check}': expression '{text}'"),
                source,
            })?;
        Ok(parsed.substitute_params(self.scalars))
    }
}

macro_rules! arg {
    ($raw:expr, $field:ident, $id:expr) => {
        $raw.$field
            .as_ref()
            .ok_or_else(|| SdefError::MissingArg {
                check: $id.to_string(),
                kind: $raw.kind.clone(),
                arg: stringify!($field),
            })
    };
}

fn resolve_check(ctx: &ResolveCtx, raw: &RawCheck, index: usize) -> Result<CheckSpec, SdefError> {
    let id = raw
        .id
        .clone()
        .unwrap_or_else(|| format!("check-{}", index + 1));
    let kind = match raw.kind.as_str() {
        "jacobi" => CheckKind::Jacobi {
            j: ctx.bivector(&id, arg!(raw, j, id)?)?,
        },
        "compat" => CheckKind::Compat {
            j1: ctx.bivector(&id, arg!(raw, j1, id)?)?,
            j2: ctx.bivector(&id, arg!(raw, j2, id)?)?,
        },
        "automorphism" => CheckKind::Automorphism {
            x: ctx.field(&id, arg!(raw, x, id)?)?,
            j: ctx.bivector(&id, arg!(raw, j, id)?)?,
        },
        "bracket-span" => {
            let basis = arg!(raw, basis, id)?
                .iter()
                .map(|n| ctx.field(&id, n))
                .collect::<Result<Vec<_>, _>>()?;
            let coeffs = match &raw.coeffs {
                Some(cs) => Some(
                    cs.iter()
                        .map(|c| ctx.scalar(&id, c))
                        .collect::<Result<Vec<_>, _>>()?,
                ),
                None => None,
            };
            CheckKind::BracketSpan {
                x: ctx.field(&id, arg!(raw, x, id)?)?,
                y: ctx.field(&id, arg!(raw, y, id)?)?,
                basis,
                coeffs,
            }
        }
        "delta" => CheckKind::Delta {
            x1: ctx.field(&id, arg!(raw, x1, id)?)?,
            x2: ctx.field(&id, arg!(raw, x2, id)?)?,
            x3: ctx.field(&id, arg!(raw, x3, id)?)?,
        },
        "hamiltonian-pde" => CheckKind::HamiltonianPde {
            x1: ctx.field(&id, arg!(raw, x1, id)?)?,
            x2: ctx.field(&id, arg!(raw, x2, id)?)?,
            h: ctx.scalar(&id, arg!(raw, h, id)?)?,
        },
        "lemma4" => CheckKind::Lemma4 {
            x1: ctx.field(&id, arg!(raw, x1, id)?)?,
            x2: ctx.field(&id, arg!(raw, x2, id)?)?,
            x3: ctx.field(&id, arg!(raw, x3, id)?)?,
            h: ctx.scalar(&id, arg!(raw, h, id)?)?,
            free: Lemma4Free {
                n1: ctx.scalar(&id, arg!(raw, n1, id)?)?,
                d1: ctx.scalar(&id, arg!(raw, d1, id)?)?,
                d2: ctx.scalar(&id, arg!(raw, d2, id)?)?,
                e1: ctx.scalar(&id, arg!(raw, e1, id)?)?,
                e2: ctx.scalar(&id, arg!(raw, e2, id)?)?,
            },
        },
        "theorem1" => {
            let c = crate::qbh::StructureCoefficients {
                n1: Some(ctx.scalar(&id, arg!(raw, n1, id)?)?),
                n2: Some(ctx.scalar(&id, arg!(raw, n2, id)?)?),
                a1: Some(ctx.scalar(&id, arg!(raw, a1, id)?)?),
                a2: Some(ctx.scalar(&id, arg!(raw, a2, id)?)?),
                b1: raw.b1.as_ref().map(|s| ctx.scalar(&id, s)).transpose()?,
                b2: Some(ctx.scalar(&id, arg!(raw, b2, id)?)?),
                c1: Some(ctx.scalar(&id, arg!(raw, c1, id)?)?),
                c2: Some(ctx.scalar(&id, arg!(raw, c2, id)?)?),
                d1: Some(ctx.scalar(&id, arg!(raw, d1, id)?)?),
                d2: Some(ctx.scalar(&id, arg!(raw, d2, id)?)?),
                e1: Some(ctx.scalar(&id, arg!(raw, e1, id)?)?),
                e2: Some(ctx.scalar(&id, arg!(raw, e2, id)?)?),
            };
            CheckKind::Theorem1 {
                x1: ctx.field(&id, arg!(raw, x1, id)?)?,
                x2: ctx.field(&id, arg!(raw, x2, id)?)?,
                x3: ctx.field(&id, arg!(raw, x3, id)?)?,
                xh: ctx.field(&id, arg!(raw, xh, id)?)?,
                coeffs: c,
            }
        }
        "qbh" => CheckKind::Qbh {
            x1: ctx.field(&id, arg!(raw, x1, id)?)?,
            x2: ctx.field(&id, arg!(raw, x2, id)?)?,
            x3: ctx.field(&id, arg!(raw, x3, id)?)?,
            h: ctx.scalar(&id, arg!(raw, h, id)?)?,
            f: ctx.scalar(&id, arg!(raw, f, id)?)?,
            rho_expected: raw
                .rho_expected
                .as_ref()
                .map(|s| ctx.scalar(&id, s))
                .transpose()?,
        },
        "hojman" => CheckKind::Hojman {
            x1: ctx.field(&id, arg!(raw, x1, id)?)?,
            x3: ctx.field(&id, arg!(raw, x3, id)?)?,
            h: ctx.scalar(&id, arg!(raw, h, id)?)?,
        },
        "bih2d" => CheckKind::Bih2d {
            x3: ctx.field(&id, arg!(raw, x3, id)?)?,
            h: ctx.scalar(&id, arg!(raw, h, id)?)?,
            f: ctx.scalar(&id, arg!(raw, f, id)?)?,
            j: ctx.bivector(&id, arg!(raw, j, id)?)?,
        },
        "jacobi-structure" => CheckKind::JacobiStructure {
            lambda: {
                let pair = arg!(raw, lambda, id)?;
                let a = ctx.field(&id, &pair[0])?;
                let b = ctx.field(&id, &pair[1])?;
                wedge(&a.to_multivector(), &b.to_multivector())?
            },
            e: ctx.field(&id, arg!(raw, e, id)?)?,
        },
        "theorem3" => CheckKind::Theorem3 {
            x1: ctx.field(&id, arg!(raw, x1, id)?)?,
            x2: ctx.field(&id, arg!(raw, x2, id)?)?,
            xh: ctx.field(&id, arg!(raw, xh, id)?)?,
            a: ctx.scalar(&id, arg!(raw, a, id)?)?,
            b: ctx.scalar(&id, arg!(raw, b, id)?)?,
            c: ctx.scalar(&id, arg!(raw, c, id)?)?,
        },
        "zero" => CheckKind::Zero {
            expr: ctx.scalar(&id, arg!(raw, expr, id)?)?,
        },
        "deriv-zero" => CheckKind::DerivZero {
            expr: ctx.scalar(&id, arg!(raw, expr, id)?)?,
            apply: arg!(raw, apply, id)?
                .iter()
                .map(|n| ctx.field(&id, n))
                .collect::<Result<Vec<_>, _>>()?,
            plus: raw.plus.as_ref().map(|s| ctx.scalar(&id, s)).transpose()?,
        },
        other => {
            return Err(SdefError::UnknownKind {
                check: id,
                kind: other.to_string(),
            })
        }
    };

    let expectation = Expectation {
        all_fail: raw.expect.as_deref() == Some("fail"),
        fail: raw.expect_fail.iter().cloned().collect(),
        exact: raw.expect_exact.iter().cloned().collect(),
    };
    Ok(CheckSpec {
        id,
        kind,
        expectation,
    })
}

// ---------------------------------------------------------------------
// Execution.

/// Per-entry result with its expectation and match status.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EntryResult {
    pub id: String,
    pub label: String,
    pub outcome: CheckOutcome,
    pub passed: bool,
    pub expected: String,
    pub require_exact: bool,
    pub matched: bool,
}

/// Per-check result.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CheckResult {
    pub id: String,
    pub kind: String,
    pub entries: Vec<EntryResult>,
    pub passed: bool,
    pub matched: bool,
    pub wall_ms: f64,
}

/// Machine-readable run report; `overall` is `"pass"` exactly when
/// every check matched its expectations.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunReport {
    pub version: String,
    pub policy: Policy,
    pub checks: Vec<CheckResult>,
    pub overall: String,
}

impl RunReport {
    pub fn overall_pass(&self) -> bool {
        self.overall == "pass"
    }
}

fn execute_check(
    spec: &CheckSpec,
    def: &StructureDefinition,
    policy: &Policy,
) -> Result<CheckReport, CoreError> {
    let bindings = &def.bindings;
    let chart = &def.chart;
    let single = |verdict| {
        let mut report = CheckReport::new();
        report.push(CheckEntry::zero("result", spec.kind.name(), verdict));
        Ok(report)
    };
    match &spec.kind {
        CheckKind::Jacobi { j } => single(check_jacobi_identity(j, policy, bindings)?),
        CheckKind::Compat { j1, j2 } => single(check_compatibility(j1, j2, policy, bindings)?),
        CheckKind::Automorphism { x, j } => {
            single(check_infinitesimal_automorphism(x, j, policy, bindings)?)
        }
        CheckKind::BracketSpan {
            x,
            y,
            basis,
            coeffs,
        } => {
            let span = verify_span_closure(x, y, basis, coeffs.as_deref(), policy, bindings)?;
            let mut report = CheckReport::new();
            report.push(CheckEntry::zero("result", "bracket span membership", span.verdict));
            Ok(report)
        }
        CheckKind::Delta { x1, x2, x3 } => check_delta_algebra(x1, x2, x3, policy, bindings),
        CheckKind::HamiltonianPde { x1, x2, h } => {
            check_hamiltonian_condition(x1, x2, h, policy, bindings)
        }
        CheckKind::Lemma4 {
            x1,
            x2,
            x3,
            h,
            free,
        } => {
            let c = compute_lemma4_coefficients(x1, x2, x3, h, free, policy, bindings)?;
            verify_lemma4_reduction(x1, x2, x3, h, &c, policy, bindings)
        }
        CheckKind::Theorem1 {
            x1,
            x2,
            x3,
            xh,
            coeffs,
        } => Ok(verify_theorem1(x1, x2, x3, xh, coeffs, policy, bindings)?.to_report()),
        CheckKind::Qbh {
            x1,
            x2,
            x3,
            h,
            f,
            rho_expected,
        } => {
            let sys = assemble_qbh(x1, x2, x3, h, f, policy, bindings)?;
            let mut report = sys.audit.clone();
            if let Some(expected) = rho_expected {
                // The closed form must match tightly, not merely at the
                // working tolerance.
                let tight = Policy {
                    tolerance: 1e-12,
                    ..*policy
                };
                let v = decide_zero(
                    &(sys.rho.clone() - expected.clone()),
                    chart,
                    &tight,
                    bindings,
                )?;
                report.push(CheckEntry::zero(
                    "rho-matches-expected",
                    "rho equals its closed form (tolerance 1e-12)",
                    v,
                ));
            }
            Ok(report)
        }
        CheckKind::Hojman { x1, x3, h } => check_hojman_case(x1, x3, h, policy, bindings),
        CheckKind::Bih2d { x3, h, f, j } => check_bihamiltonian_2d(x3, h, f, j, policy, bindings),
        CheckKind::JacobiStructure { lambda, e } => {
            check_jacobi_structure(lambda, e, policy, bindings)
        }
        CheckKind::Theorem3 {
            x1,
            x2,
            xh,
            a,
            b,
            c,
        } => check_theorem3(x1, x2, xh, a, b, c, policy, bindings),
        CheckKind::Zero { expr } => single(decide_zero(expr, chart, policy, bindings)?),
        CheckKind::DerivZero { expr, apply, plus } => {
            let mut e = expr.clone();
            for fld in apply.iter().rev() {
                e = fld.apply(&e);
            }
            if let Some(p) = plus {
                e = e + p.clone();
            }
            single(decide_zero(&e, chart, policy, bindings)?)
        }
    }
}

/// Runs the definition's checks in order against the policy. With
/// `fail_fast`, stops after the first check that misses its
/// expectations.
pub fn run_definition(
    def: &StructureDefinition,
    policy: &Policy,
    fail_fast: bool,
) -> Result<RunReport, SdefError> {
    let mut checks = Vec::with_capacity(def.checks.len());
    let mut overall = true;
    for spec in &def.checks {
        let start = Instant::now();
        let report = execute_check(spec, def, policy).map_err(|source| SdefError::Check {
            check: spec.id.clone(),
            source,
        })?;
        let wall_ms = start.elapsed().as_secs_f64() * 1e3;
        let mut entries = Vec::with_capacity(report.entries.len());
        let mut passed = true;
        let mut matched = true;
        for entry in report.entries {
            let expected_fail = spec.expectation.expects_fail(&entry.id);
            let require_exact = spec.expectation.exact.contains(&entry.id);
            let mut entry_matched = entry.passed != expected_fail;
            if require_exact {
                let exact = entry
                    .outcome
                    .verdict()
                    .map(|v| v.is_exact())
                    .unwrap_or(false);
                entry_matched = entry_matched && exact;
            }
            passed &= entry.passed;
            matched &= entry_matched;
            entries.push(EntryResult {
                id: entry.id,
                label: entry.label,
                outcome: entry.outcome,
                passed: entry.passed,
                expected: if expected_fail { "fail" } else { "pass" }.into(),
                require_exact,
                matched: entry_matched,
            });
        }
        overall &= matched;
        checks.push(CheckResult {
            id: spec.id.clone(),
            kind: spec.kind.name().to_string(),
            entries,
            passed,
            matched,
            wall_ms,
        });
        if fail_fast && !overall {
            break;
        }
    }
    Ok(RunReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        policy: *policy,
        checks,
        overall: if overall { "pass" } else { "fail" }.into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
title = "minimal"
description = "canonical pair"

[chart]
coords = ["x1", "x2"]
intervals = { x1 = [-2.0, 2.0], x2 = [-2.0, 2.0] }

[field.D1]
components = ["1", "0"]

[field.D2]
components = ["0", "1"]

[scalar.H]
expr = "x1*x2"

[[check]]
id = "jacobi"
kind = "jacobi"
j = ["D1", "D2"]
expect-exact = ["result"]

[[check]]
id = "pde"
kind = "hamiltonian-pde"
x1 = "D1"
x2 = "D2"
h = "H"
expect-fail = ["pde", "pde-symmetrized"]

[[check]]
id = "inline"
kind = "zero"
expr = "H - x1*x2"
"#;

    #[test]
    fn parses_and_runs_minimal_definition() {
        let def = StructureDefinition::parse(MINIMAL).unwrap();
        assert_eq!(def.checks.len(), 3);
        let report = run_definition(&def, &Policy::default(), false).unwrap();
        assert_eq!(report.overall, "pass");
        assert!(report.checks[0].matched);
        // the mixed second derivative of x1*x2 is 1, failing as annotated
        assert!(!report.checks[1].passed);
        assert!(report.checks[1].matched);
        // inline scalar substitution gives an exact zero
        assert!(report.checks[2].passed);
    }

    #[test]
    fn unknown_reference_is_reported_with_names() {
        let bad = MINIMAL.replace("j = [\"D1\", \"D2\"]", "j = [\"D1\", \"Dx\"]");
        let err = StructureDefinition::parse(&bad).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("Dx"), "{msg}");
        assert!(msg.contains("jacobi"), "{msg}");
    }

    #[test]
    fn unknown_kind_is_rejected() {
        let bad = MINIMAL.replace("kind = \"jacobi\"", "kind = \"jacobian\"");
        assert!(matches!(
            StructureDefinition::parse(&bad),
            Err(SdefError::UnknownKind { .. })
        ));
    }

    #[test]
    fn fail_fast_stops_after_first_mismatch() {
        let bad = MINIMAL.replace("expect-fail = [\"pde\", \"pde-symmetrized\"]", "");
        let def = StructureDefinition::parse(&bad).unwrap();
        let report = run_definition(&def, &Policy::default(), true).unwrap();
        assert_eq!(report.overall, "fail");
        assert_eq!(report.checks.len(), 2);
    }

    #[test]
    fn expect_exact_downgrades_numeric_passes() {
        let def = StructureDefinition::parse(
            r#"
[chart]
coords = ["x1", "x2"]
intervals = { x1 = [0.25, 2.0], x2 = [0.25, 2.0] }

[[check]]
kind = "zero"
expr = "sin(x1)^2 + cos(x1)^2 - 1"
expect-exact = ["result"]
"#,
        )
        .unwrap();
        let report = run_definition(&def, &Policy::default(), false).unwrap();
        // numerically zero passes, but the exact-certificate demand is unmet
        assert!(report.checks[0].passed);
        assert!(!report.checks[0].matched);
    }
}
