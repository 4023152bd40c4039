//! Coordinate charts: named coordinates, a sampling box, and guard
//! inequalities that carve out the valid domain.

use std::sync::Arc;

use crate::error::{ChartError, EvalError};
use crate::eval::Bindings;
use crate::expr::Expr;

/// A local coordinate chart.
///
/// Every coordinate carries a closed sampling interval; `guards` are
/// expressions required to be strictly positive at every sample point,
/// used to keep sampling away from singular loci (zero denominators,
/// branch cuts of `ln`/`sqrt`/`atan`).
#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    coord_names: Vec<String>,
    intervals: Vec<(f64, f64)>,
    guards: Vec<Expr>,
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Chart {
    pub fn new(
        coord_names: Vec<String>,
        intervals: Vec<(f64, f64)>,
        guards: Vec<Expr>,
    ) -> Result<Arc<Chart>, ChartError> {
        if coord_names.len() < 2 {
            return Err(ChartError::TooFewCoords(coord_names.len()));
        }
        for (i, name) in coord_names.iter().enumerate() {
            if !is_identifier(name) {
                return Err(ChartError::BadCoordName(name.clone()));
            }
            if coord_names[..i].contains(name) {
                return Err(ChartError::DuplicateCoord(name.clone()));
            }
        }
        if intervals.len() != coord_names.len() {
            return Err(ChartError::BadInterval {
                name: "<count mismatch>".into(),
            });
        }
        for (name, &(lo, hi)) in coord_names.iter().zip(&intervals) {
            if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                return Err(ChartError::BadInterval { name: name.clone() });
            }
        }
        let dim = coord_names.len();
        for g in &guards {
            if let Some(bad) = guard_offender(g, dim) {
                return Err(ChartError::GuardNotCoordinate(bad));
            }
        }
        Ok(Arc::new(Chart {
            coord_names,
            intervals,
            guards,
        }))
    }

    /// Chart with the same interval for every coordinate and no guards.
    pub fn boxed(names: &[&str], lo: f64, hi: f64) -> Result<Arc<Chart>, ChartError> {
        Chart::new(
            names.iter().map(|s| s.to_string()).collect(),
            vec![(lo, hi); names.len()],
            Vec::new(),
        )
    }

    pub fn dim(&self) -> usize {
        self.coord_names.len()
    }

    pub fn coord_names(&self) -> &[String] {
        &self.coord_names
    }

    pub fn coord_name(&self, i: usize) -> &str {
        &self.coord_names[i]
    }

    pub fn coord_index(&self, name: &str) -> Option<usize> {
        self.coord_names.iter().position(|n| n == name)
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn guards(&self) -> &[Expr] {
        &self.guards
    }

    /// True when the point lies in the sampling box and satisfies every
    /// guard strictly.
    pub fn admits(&self, point: &[f64]) -> bool {
        if point.len() != self.dim() {
            return false;
        }
        for (x, &(lo, hi)) in point.iter().zip(&self.intervals) {
            if !(*x >= lo && *x <= hi) {
                return false;
            }
        }
        let empty = Bindings::empty();
        self.guards.iter().all(|g| {
            matches!(g.eval(point, &empty), Ok(v) if v > 0.0)
        })
    }

    /// Guard-checking evaluation, for callers that take points from
    /// outside the sampler.
    pub fn evaluate(
        &self,
        e: &Expr,
        point: &[f64],
        bindings: &Bindings,
    ) -> Result<f64, EvalError> {
        if point.len() != self.dim() {
            return Err(EvalError::PointDim {
                expected: self.dim(),
                got: point.len(),
            });
        }
        if !self.admits(point) {
            return Err(EvalError::Domain("point violates a chart guard"));
        }
        e.eval(point, bindings)
    }

    /// Renders an expression with this chart's coordinate names.
    pub fn render(&self, e: &Expr) -> String {
        e.display(self).to_string()
    }
}

/// Returns a description of the first non-coordinate leaf in a guard.
fn guard_offender(e: &Expr, dim: usize) -> Option<String> {
    match e {
        Expr::Const(_) => None,
        Expr::Var(i) => {
            if *i < dim {
                None
            } else {
                Some(format!("coordinate index {i}"))
            }
        }
        Expr::Param(name) => Some(format!("parameter '{name}'")),
        Expr::Sum(ts) | Expr::Product(ts) => ts.iter().find_map(|t| guard_offender(t, dim)),
        Expr::Pow(b, _) => guard_offender(b, dim),
        Expr::Func(_, a) => guard_offender(a, dim),
        Expr::Opaque { name, .. } => Some(format!("opaque symbol '{name}'")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;

    #[test]
    fn rejects_one_coordinate() {
        assert!(matches!(
            Chart::boxed(&["x1"], 0.0, 1.0),
            Err(ChartError::TooFewCoords(1))
        ));
    }

    #[test]
    fn rejects_duplicates() {
        assert!(matches!(
            Chart::boxed(&["a", "a"], 0.0, 1.0),
            Err(ChartError::DuplicateCoord(_))
        ));
    }

    #[test]
    fn guard_must_reference_coordinates_only() {
        let err = Chart::new(
            vec!["x1".into(), "x2".into()],
            vec![(0.0, 1.0), (0.0, 1.0)],
            vec![Expr::param("alpha")],
        );
        assert!(matches!(err, Err(ChartError::GuardNotCoordinate(_))));
    }

    #[test]
    fn admits_checks_box_and_guards() {
        let chart = Chart::new(
            vec!["x1".into(), "x2".into()],
            vec![(0.0, 2.0), (0.0, 2.0)],
            vec![Expr::var(0) - Expr::var(1)], // x1 - x2 > 0
        )
        .unwrap();
        assert!(chart.admits(&[1.5, 0.5]));
        assert!(!chart.admits(&[0.5, 1.5]));
        assert!(!chart.admits(&[3.0, 0.5]));
        assert!(!chart.admits(&[1.0]));
    }
}
