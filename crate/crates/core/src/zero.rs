//! Two-tier zero decision: an exact polynomial certificate when the
//! expression lies in the polynomial fragment, otherwise a seeded
//! Monte-Carlo residual scan over the chart's guarded sampling box.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chart::Chart;
use crate::error::{Error, Result};
use crate::eval::Bindings;
use crate::expr::{simplify_basic, Expr};
use crate::poly::Poly;

/// Knobs for probabilistic zero testing. These are exactly the CLI's
/// `--tol`, `--samples`, `--seed`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Policy {
    pub tolerance: f64,
    pub samples: usize,
    pub seed: u64,
}

impl Default for Policy {
    fn default() -> Self {
        Policy {
            tolerance: 1e-9,
            samples: 200,
            seed: 42,
        }
    }
}

impl Policy {
    pub fn with_seed(mut self, seed: u64) -> Policy {
        self.seed = seed;
        self
    }
}

/// Outcome of a zero decision.
///
/// `ExactZero` is a certificate (the polynomial normal form exists and
/// is the zero polynomial); `NumericallyZero` and `NonZero` are sampled
/// verdicts with normalized residuals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "kebab-case")]
pub enum ZeroVerdict {
    ExactZero,
    NumericallyZero {
        max_residual: f64,
        samples: usize,
    },
    NonZero {
        witness: Vec<f64>,
        residual: f64,
    },
}

impl ZeroVerdict {
    /// A verdict "passes" when it does not exhibit a nonzero witness.
    pub fn is_zero(&self) -> bool {
        !matches!(self, ZeroVerdict::NonZero { .. })
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, ZeroVerdict::ExactZero)
    }

    pub fn max_residual(&self) -> f64 {
        match self {
            ZeroVerdict::ExactZero => 0.0,
            ZeroVerdict::NumericallyZero { max_residual, .. } => *max_residual,
            ZeroVerdict::NonZero { residual, .. } => *residual,
        }
    }

    pub fn witness(&self) -> Option<&[f64]> {
        match self {
            ZeroVerdict::NonZero { witness, .. } => Some(witness),
            _ => None,
        }
    }

    pub fn class_name(&self) -> &'static str {
        match self {
            ZeroVerdict::ExactZero => "exact-zero",
            ZeroVerdict::NumericallyZero { .. } => "numerically-zero",
            ZeroVerdict::NonZero { .. } => "non-zero",
        }
    }
}

/// Deterministic point sampler: point `i` is derived from `(seed, i)`
/// alone, so serial and parallel scans see identical points.
pub struct Sampler<'a> {
    chart: &'a Chart,
    seed: u64,
}

const TRIES_PER_POINT: usize = 128;

impl<'a> Sampler<'a> {
    pub fn new(chart: &'a Chart, seed: u64) -> Self {
        Sampler { chart, seed }
    }

    /// Draws the `index`-th point: rejection-samples the box until the
    /// guards hold and `accept` (extra caller-side validity, e.g. "all
    /// expressions evaluate") returns true.
    pub fn point<F: FnMut(&[f64]) -> bool>(
        &self,
        index: usize,
        mut accept: F,
    ) -> Result<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64 + 1);
        let mut p = vec![0.0; self.chart.dim()];
        for _ in 0..TRIES_PER_POINT {
            for (x, &(lo, hi)) in p.iter_mut().zip(self.chart.intervals()) {
                *x = rng.random_range(lo..=hi);
            }
            if self.chart.admits(&p) && accept(&p) {
                return Ok(p);
            }
        }
        Err(Error::Sampling {
            tries: TRIES_PER_POINT,
        })
    }
}

/// Normalized residual of `e` at `p`: `|e(p)| / (1 + scale(p))` where
/// `scale(p)` is the largest absolute value among the additive terms of
/// `e` at `p`. Returns `None` when evaluation fails at `p`.
fn residual_at(e: &Expr, p: &[f64], bindings: &Bindings) -> Option<f64> {
    let mut total = 0.0;
    let mut scale = 0.0f64;
    for t in e.additive_terms() {
        let v = t.eval(p, bindings).ok()?;
        total += v;
        scale = scale.max(v.abs());
    }
    if !total.is_finite() {
        return None;
    }
    Some(total.abs() / (1.0 + scale))
}

/// Decides whether `e` vanishes identically on the chart's domain.
pub fn decide_zero(
    e: &Expr,
    chart: &Chart,
    policy: &Policy,
    bindings: &Bindings,
) -> Result<ZeroVerdict> {
    decide_zero_all(std::slice::from_ref(e), chart, policy, bindings)
        .map(|mut v| v.pop().expect("one verdict per expression"))
        .map(|v| v)
}

/// Component-wise zero decision sharing one deterministic point stream.
/// Components in the polynomial fragment get exact verdicts; the rest
/// are sampled. Returns one verdict per input expression.
pub fn decide_zero_all(
    exprs: &[Expr],
    chart: &Chart,
    policy: &Policy,
    bindings: &Bindings,
) -> Result<Vec<ZeroVerdict>> {
    let simplified: Vec<Expr> = exprs.iter().map(simplify_basic).collect();
    let polys: Vec<Option<Poly>> = simplified
        .iter()
        .map(|e| Poly::from_expr(e, chart.dim()))
        .collect();

    // Expressions that still need numeric attention: polynomial nonzero
    // certificates need a sampled witness, non-polynomial expressions
    // need the full residual scan.
    let needs_scan: Vec<usize> = polys
        .iter()
        .enumerate()
        .filter(|(_, p)| !matches!(p, Some(p) if p.is_zero()))
        .map(|(i, _)| i)
        .collect();

    let mut worst: Vec<(f64, Option<Vec<f64>>)> = vec![(0.0, None); simplified.len()];
    if !needs_scan.is_empty() {
        let sampler = Sampler::new(chart, policy.seed);
        for i in 0..policy.samples {
            let p = sampler.point(i, |pt| {
                needs_scan
                    .iter()
                    .all(|&k| residual_at(&simplified[k], pt, bindings).is_some())
            })?;
            for &k in &needs_scan {
                let r = residual_at(&simplified[k], &p, bindings)
                    .expect("accepted point evaluates");
                if r >= worst[k].0 && (r > worst[k].0 || worst[k].1.is_none()) {
                    worst[k] = (r, Some(p.clone()));
                }
            }
        }
    }

    let mut out = Vec::with_capacity(simplified.len());
    for (k, poly) in polys.iter().enumerate() {
        let verdict = match poly {
            Some(p) if p.is_zero() => ZeroVerdict::ExactZero,
            Some(_) => {
                // Exact nonzero certificate; attach the sampled witness
                // where the residual was largest.
                let (residual, witness) = worst[k].clone();
                ZeroVerdict::NonZero {
                    witness: witness.expect("scan ran for nonzero polynomial"),
                    residual,
                }
            }
            None => {
                let (residual, witness) = worst[k].clone();
                if residual <= policy.tolerance {
                    ZeroVerdict::NumericallyZero {
                        max_residual: residual,
                        samples: policy.samples,
                    }
                } else {
                    ZeroVerdict::NonZero {
                        witness: witness.expect("scan ran"),
                        residual,
                    }
                }
            }
        };
        out.push(verdict);
    }
    Ok(out)
}

/// Combines component verdicts: exact only if every component is exact,
/// zero only if every component is zero, otherwise the worst witness.
pub fn aggregate_verdicts(verdicts: Vec<ZeroVerdict>) -> ZeroVerdict {
    let mut all_exact = true;
    let mut max_residual = 0.0f64;
    let mut samples = 0usize;
    let mut worst_nonzero: Option<(f64, Vec<f64>)> = None;
    for v in verdicts {
        match v {
            ZeroVerdict::ExactZero => {}
            ZeroVerdict::NumericallyZero {
                max_residual: r,
                samples: s,
            } => {
                all_exact = false;
                max_residual = max_residual.max(r);
                samples = samples.max(s);
            }
            ZeroVerdict::NonZero { witness, residual } => {
                all_exact = false;
                if worst_nonzero.as_ref().map_or(true, |(r, _)| residual > *r) {
                    worst_nonzero = Some((residual, witness));
                }
            }
        }
    }
    if let Some((residual, witness)) = worst_nonzero {
        ZeroVerdict::NonZero { witness, residual }
    } else if all_exact {
        ZeroVerdict::ExactZero
    } else {
        ZeroVerdict::NumericallyZero {
            max_residual,
            samples,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_expr;

    fn chart2() -> std::sync::Arc<Chart> {
        Chart::boxed(&["x1", "x2"], -2.0, 2.0).unwrap()
    }

    #[test]
    fn exact_zero_for_cancelling_polynomial() {
        let chart = chart2();
        let e = parse_expr("x1^2 - x1*x1", &chart).unwrap();
        let v = decide_zero(&e, &chart, &Policy::default(), &Bindings::empty()).unwrap();
        assert_eq!(v, ZeroVerdict::ExactZero);
    }

    #[test]
    fn pythagorean_identity_is_numerically_zero() {
        let chart = chart2();
        let e = parse_expr("sin(x1)^2 + cos(x1)^2 - 1", &chart).unwrap();
        let v = decide_zero(&e, &chart, &Policy::default(), &Bindings::empty()).unwrap();
        match v {
            ZeroVerdict::NumericallyZero { max_residual, samples } => {
                assert!(max_residual < 1e-12, "residual {max_residual}");
                assert_eq!(samples, 200);
            }
            other => panic!("expected numerically zero, got {other:?}"),
        }
    }

    #[test]
    fn nonzero_polynomial_gets_witness() {
        let chart = chart2();
        let e = parse_expr("x1 - x2", &chart).unwrap();
        let v = decide_zero(&e, &chart, &Policy::default(), &Bindings::empty()).unwrap();
        match v {
            ZeroVerdict::NonZero { witness, residual } => {
                assert_eq!(witness.len(), 2);
                assert!(residual > 1e-3);
            }
            other => panic!("expected nonzero, got {other:?}"),
        }
    }

    #[test]
    fn never_exact_zero_for_nonzero_normal_form() {
        // x1*(x1+x2) - x1^2 has normal form x1*x2, which is not zero.
        let chart = chart2();
        let e = parse_expr("x1*(x1+x2) - x1^2", &chart).unwrap();
        let v = decide_zero(&e, &chart, &Policy::default(), &Bindings::empty()).unwrap();
        assert!(matches!(v, ZeroVerdict::NonZero { .. }));
    }

    #[test]
    fn guards_too_restrictive_is_an_error() {
        let chart = Chart::new(
            vec!["x1".into(), "x2".into()],
            vec![(0.0, 1.0), (0.0, 1.0)],
            vec![parse_expr("x1 - 5", &Chart::boxed(&["x1", "x2"], 0.0, 1.0).unwrap()).unwrap()],
        )
        .unwrap();
        let e = Expr::var(0);
        let r = decide_zero(&e, &chart, &Policy::default(), &Bindings::empty());
        assert!(matches!(r, Err(Error::Sampling { .. })));
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let chart = chart2();
        let e = parse_expr("sin(x1) - x2", &chart).unwrap();
        let policy = Policy::default();
        let a = decide_zero(&e, &chart, &policy, &Bindings::empty()).unwrap();
        let b = decide_zero(&e, &chart, &policy, &Bindings::empty()).unwrap();
        assert_eq!(a, b);
        let c = decide_zero(&e, &chart, &policy.with_seed(7), &Bindings::empty()).unwrap();
        // Same verdict class, possibly different witness.
        assert_eq!(a.is_zero(), c.is_zero());
    }
}
