//! Coordinate multivector fields and one-forms with symbolic
//! coefficients: wedge product, interior product, directional
//! application, Lie bracket, Lie derivative, and the Schouten-Nijenhuis
//! bracket.
//!
//! Components of a degree-p multivector are stored sparsely over
//! strictly increasing index tuples, so antisymmetry is structural.
//! Conventions, fixed once here and inherited everywhere else:
//!
//! * `lie_bracket`: `[X,Y]^i = X^k dk Y^i - Y^k dk X^i`;
//! * `interior_product`: contraction on the first slot, so that
//!   `dH | (X ^ Y) = X(H) Y - Y(H) X` for decomposable bivectors;
//! * `schouten`: the graded extension of the Lie bracket determined by
//!   `[X, A] = L_X A`, graded antisymmetry
//!   `[A,B] = -(-1)^{(p-1)(q-1)} [B,A]`, and the graded Leibniz rule
//!   `[A, B ^ C] = [A,B] ^ C + (-1)^{(p-1) deg B} B ^ [A,C]`.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::chart::Chart;
use crate::diff::differentiate;
use crate::error::{Error, Result};
use crate::eval::Bindings;
use crate::expr::Expr;
use crate::zero::{aggregate_verdicts, decide_zero_all, Policy, ZeroVerdict};

/// Contravariant vector field: `components[i]` multiplies `d/dx^i`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    chart: Arc<Chart>,
    components: Vec<Expr>,
}

/// Covariant one-form: `components[i]` multiplies `dx^i`.
#[derive(Debug, Clone, PartialEq)]
pub struct OneForm {
    chart: Arc<Chart>,
    components: Vec<Expr>,
}

/// Antisymmetric contravariant tensor of degree `p`, stored sparsely on
/// strictly increasing index tuples. Degree 0 is a single scalar keyed
/// by the empty tuple. Exact-zero components are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct Multivector {
    chart: Arc<Chart>,
    degree: usize,
    components: BTreeMap<Vec<usize>, Expr>,
}

fn same_chart(a: &Arc<Chart>, b: &Arc<Chart>) -> Result<()> {
    if Arc::ptr_eq(a, b) || a == b {
        Ok(())
    } else {
        Err(Error::ChartMismatch)
    }
}

impl VectorField {
    pub fn new(chart: Arc<Chart>, components: Vec<Expr>) -> Result<VectorField> {
        if components.len() != chart.dim() {
            return Err(Error::ComponentCount {
                expected: chart.dim(),
                got: components.len(),
            });
        }
        Ok(VectorField { chart, components })
    }

    /// Parses one component expression per coordinate.
    pub fn parse(chart: &Arc<Chart>, components: &[&str]) -> Result<VectorField> {
        let comps = components
            .iter()
            .map(|s| crate::parse::parse_expr(s, chart))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        VectorField::new(chart.clone(), comps)
    }

    pub fn zero(chart: Arc<Chart>) -> VectorField {
        let dim = chart.dim();
        VectorField {
            chart,
            components: vec![Expr::int(0); dim],
        }
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    /// Directional application `X(h) = sum_i X^i dh/dx^i`. Composes:
    /// `x.apply(&y.apply(&h))` realizes `X(Y(h))`.
    pub fn apply(&self, h: &Expr) -> Expr {
        Expr::sum(
            self.components
                .iter()
                .enumerate()
                .map(|(i, xi)| Expr::product(vec![xi.clone(), differentiate(h, i)]))
                .collect(),
        )
    }

    /// Componentwise linear combination `a*self + b*other`.
    pub fn linear_combination(terms: &[(Expr, &VectorField)]) -> Result<VectorField> {
        let chart = terms
            .first()
            .map(|(_, v)| v.chart.clone())
            .ok_or(Error::ComponentCount {
                expected: 1,
                got: 0,
            })?;
        for (_, v) in terms {
            same_chart(&chart, &v.chart)?;
        }
        let dim = chart.dim();
        let mut comps = Vec::with_capacity(dim);
        for i in 0..dim {
            comps.push(Expr::sum(
                terms
                    .iter()
                    .map(|(c, v)| Expr::product(vec![c.clone(), v.components[i].clone()]))
                    .collect(),
            ));
        }
        VectorField::new(chart, comps)
    }

    pub fn scaled(&self, c: &Expr) -> VectorField {
        VectorField {
            chart: self.chart.clone(),
            components: self
                .components
                .iter()
                .map(|x| Expr::product(vec![c.clone(), x.clone()]))
                .collect(),
        }
    }

    pub fn sub(&self, other: &VectorField) -> Result<VectorField> {
        same_chart(&self.chart, &other.chart)?;
        let comps = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.clone() - b.clone())
            .collect();
        VectorField::new(self.chart.clone(), comps)
    }

    pub fn add(&self, other: &VectorField) -> Result<VectorField> {
        same_chart(&self.chart, &other.chart)?;
        let comps = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.clone() + b.clone())
            .collect();
        VectorField::new(self.chart.clone(), comps)
    }

    pub fn to_multivector(&self) -> Multivector {
        let mut mv = Multivector::zero(self.chart.clone(), 1);
        for (i, c) in self.components.iter().enumerate() {
            mv.add_component(vec![i], c.clone());
        }
        mv
    }

    /// Numeric component values at a point.
    pub fn eval(&self, point: &[f64], bindings: &Bindings) -> Result<Vec<f64>> {
        self.components
            .iter()
            .map(|c| c.eval(point, bindings).map_err(Error::from))
            .collect()
    }

    pub fn is_zero(&self, policy: &Policy, bindings: &Bindings) -> Result<ZeroVerdict> {
        decide_zero_all(&self.components, &self.chart, policy, bindings)
            .map(aggregate_verdicts)
    }
}

impl OneForm {
    pub fn new(chart: Arc<Chart>, components: Vec<Expr>) -> Result<OneForm> {
        if components.len() != chart.dim() {
            return Err(Error::ComponentCount {
                expected: chart.dim(),
                got: components.len(),
            });
        }
        Ok(OneForm { chart, components })
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }
}

/// Exterior differential of a scalar: `(dh)_i = dh/dx^i`.
pub fn differential(chart: &Arc<Chart>, h: &Expr) -> OneForm {
    let comps = (0..chart.dim()).map(|i| differentiate(h, i)).collect();
    OneForm {
        chart: chart.clone(),
        components: comps,
    }
}

/// Sorts an index tuple, returning the permutation sign, or `None` when
/// an index repeats (the component vanishes).
fn sort_with_sign(mut idx: Vec<usize>) -> Option<(Vec<usize>, i8)> {
    let mut sign = 1i8;
    // Insertion sort; the tuples have at most `dim` entries.
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if idx.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some((idx, sign))
    }
}

impl Multivector {
    pub fn zero(chart: Arc<Chart>, degree: usize) -> Multivector {
        Multivector {
            chart,
            degree,
            components: BTreeMap::new(),
        }
    }

    pub fn scalar(chart: Arc<Chart>, value: Expr) -> Multivector {
        let mut mv = Multivector::zero(chart, 0);
        mv.add_component(Vec::new(), value);
        mv
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn components(&self) -> &BTreeMap<Vec<usize>, Expr> {
        &self.components
    }

    /// Component at an increasing index tuple (zero if absent).
    pub fn component(&self, key: &[usize]) -> Expr {
        self.components.get(key).cloned().unwrap_or_else(|| Expr::int(0))
    }

    /// True when no components are stored; a structural zero.
    pub fn is_structurally_zero(&self) -> bool {
        self.components.is_empty()
    }

    /// Adds `coeff` at an arbitrary-order index tuple, folding in the
    /// permutation sign, dropping exact zeros.
    pub fn add_component(&mut self, idx: Vec<usize>, coeff: Expr) {
        debug_assert_eq!(idx.len(), self.degree);
        if coeff.is_zero_const() {
            return;
        }
        let Some((key, sign)) = sort_with_sign(idx) else {
            return;
        };
        let signed = if sign < 0 { Expr::neg(coeff) } else { coeff };
        let entry = self.components.remove(&key);
        let combined = match entry {
            Some(existing) => existing + signed,
            None => signed,
        };
        if !combined.is_zero_const() {
            self.components.insert(key, combined);
        }
    }

    pub fn add(&self, other: &Multivector) -> Result<Multivector> {
        same_chart(&self.chart, &other.chart)?;
        if self.degree != other.degree {
            return Err(Error::Degree {
                expected: self.degree,
                got: other.degree,
            });
        }
        let mut out = self.clone();
        for (k, c) in &other.components {
            out.add_component(k.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn scaled(&self, c: &Expr) -> Multivector {
        let mut out = Multivector::zero(self.chart.clone(), self.degree);
        for (k, v) in &self.components {
            out.add_component(k.clone(), Expr::product(vec![c.clone(), v.clone()]));
        }
        out
    }

    /// Degree-1 multivector as a vector field.
    pub fn to_vector_field(&self) -> Result<VectorField> {
        if self.degree != 1 {
            return Err(Error::Degree {
                expected: 1,
                got: self.degree,
            });
        }
        let mut comps = vec![Expr::int(0); self.chart.dim()];
        for (k, c) in &self.components {
            comps[k[0]] = c.clone();
        }
        VectorField::new(self.chart.clone(), comps)
    }

    pub fn component_exprs(&self) -> Vec<Expr> {
        self.components.values().cloned().collect()
    }

    pub fn is_zero(&self, policy: &Policy, bindings: &Bindings) -> Result<ZeroVerdict> {
        multivector_is_zero(self, policy, bindings)
    }
}

/// Wedge product with standard shuffle signs. Bilinear and graded
/// commutative: `A ^ B = (-1)^{pq} B ^ A`. When `p + q` exceeds the
/// chart dimension the result is the canonical zero multivector of that
/// degree.
pub fn wedge(a: &Multivector, b: &Multivector) -> Result<Multivector> {
    same_chart(&a.chart, &b.chart)?;
    let degree = a.degree + b.degree;
    let mut out = Multivector::zero(a.chart.clone(), degree);
    if degree > a.chart.dim() {
        return Ok(out);
    }
    for (ka, ca) in &a.components {
        for (kb, cb) in &b.components {
            let mut idx = Vec::with_capacity(degree);
            idx.extend_from_slice(ka);
            idx.extend_from_slice(kb);
            out.add_component(idx, Expr::product(vec![ca.clone(), cb.clone()]));
        }
    }
    Ok(out)
}

/// Wedge of a list of vector fields.
pub fn wedge_fields(fields: &[&VectorField]) -> Result<Multivector> {
    let mut iter = fields.iter();
    let first = iter.next().ok_or(Error::ComponentCount {
        expected: 1,
        got: 0,
    })?;
    let mut acc = first.to_multivector();
    for f in iter {
        acc = wedge(&acc, &f.to_multivector())?;
    }
    Ok(acc)
}

/// Interior product (contraction on the first slot):
/// `(alpha | A)^{i_2..i_p} = sum_{i_1} alpha_{i_1} A^{i_1 i_2 .. i_p}`.
/// With this sign, `dH | (X ^ Y) = X(H) Y - Y(H) X`.
pub fn interior_product(alpha: &OneForm, a: &Multivector) -> Result<Multivector> {
    same_chart(&alpha.chart, &a.chart)?;
    if a.degree == 0 {
        return Err(Error::InteriorDegreeZero);
    }
    let mut out = Multivector::zero(a.chart.clone(), a.degree - 1);
    for (key, coeff) in &a.components {
        for (t, &i) in key.iter().enumerate() {
            let mut rest: Vec<usize> = Vec::with_capacity(key.len() - 1);
            rest.extend(key.iter().enumerate().filter(|(s, _)| *s != t).map(|(_, &v)| v));
            let mut term = Expr::product(vec![alpha.components[i].clone(), coeff.clone()]);
            if t % 2 == 1 {
                term = Expr::neg(term);
            }
            out.add_component(rest, term);
        }
    }
    Ok(out)
}

/// Lie bracket of vector fields.
pub fn lie_bracket(x: &VectorField, y: &VectorField) -> Result<VectorField> {
    same_chart(&x.chart, &y.chart)?;
    let dim = x.chart.dim();
    let mut comps = Vec::with_capacity(dim);
    for i in 0..dim {
        let mut terms = Vec::new();
        for k in 0..dim {
            terms.push(Expr::product(vec![
                x.components[k].clone(),
                differentiate(&y.components[i], k),
            ]));
            terms.push(Expr::neg(Expr::product(vec![
                y.components[k].clone(),
                differentiate(&x.components[i], k),
            ])));
        }
        comps.push(Expr::sum(terms));
    }
    VectorField::new(x.chart.clone(), comps)
}

/// Schouten-Nijenhuis bracket.
///
/// Computed on decomposable generators: with `A = X_1 ^ .. ^ X_p` and
/// `B = Y_1 ^ .. ^ Y_q`,
/// `[A,B] = sum_{i,j} (-1)^{i+j} [X_i,Y_j] ^ X_(not i) ^ Y_(not j)`;
/// degree-0 arguments reduce to interior products of the differential:
/// `[f, B] = -(df | B)` and `[A, f] = (-1)^{p-1} (df | A)`.
pub fn schouten(a: &Multivector, b: &Multivector) -> Result<Multivector> {
    same_chart(&a.chart, &b.chart)?;
    let chart = &a.chart;
    let (p, q) = (a.degree, b.degree);
    if p == 0 && q == 0 {
        return Ok(Multivector::zero(chart.clone(), 0));
    }
    if p == 0 {
        let f = a.component(&[]);
        let db = interior_product(&differential(chart, &f), b)?;
        return Ok(db.scaled(&Expr::int(-1)));
    }
    if q == 0 {
        let f = b.component(&[]);
        let da = interior_product(&differential(chart, &f), a)?;
        return Ok(if p % 2 == 0 { da.scaled(&Expr::int(-1)) } else { da });
    }

    let degree = p + q - 1;
    let mut out = Multivector::zero(chart.clone(), degree);
    if degree > chart.dim() {
        return Ok(out);
    }

    // Factor lists for one monomial component: the coefficient rides on
    // the first factor.
    let factors = |key: &[usize], coeff: &Expr| -> Vec<VectorField> {
        key.iter()
            .enumerate()
            .map(|(s, &i)| {
                let mut comps = vec![Expr::int(0); chart.dim()];
                comps[i] = if s == 0 { coeff.clone() } else { Expr::int(1) };
                VectorField {
                    chart: chart.clone(),
                    components: comps,
                }
            })
            .collect()
    };

    for (ka, ca) in &a.components {
        let xs = factors(ka, ca);
        for (kb, cb) in &b.components {
            let ys = factors(kb, cb);
            for i in 0..p {
                for j in 0..q {
                    let bracket = lie_bracket(&xs[i], &ys[j])?;
                    let mut term = bracket.to_multivector();
                    for (s, x) in xs.iter().enumerate() {
                        if s != i {
                            term = wedge(&term, &x.to_multivector())?;
                        }
                    }
                    for (s, y) in ys.iter().enumerate() {
                        if s != j {
                            term = wedge(&term, &y.to_multivector())?;
                        }
                    }
                    // (-1)^{i+j}; unchanged by the 1-based convention
                    // since (i+1)+(j+1) = i+j+2.
                    let sign_neg = (i + j) % 2 == 1;
                    for (key, coeff) in term.components {
                        let c = if sign_neg { Expr::neg(coeff) } else { coeff };
                        out.add_component(key, c);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Lie derivative of a multivector along a vector field, as the
/// Schouten bracket `[X, A]`. For decomposable `A = Y ^ Z` this equals
/// `[X,Y] ^ Z + Y ^ [X,Z]`.
pub fn lie_derivative(x: &VectorField, a: &Multivector) -> Result<Multivector> {
    schouten(&x.to_multivector(), a)
}

/// Componentwise zero verdict: exact only when every component carries
/// an exact certificate, nonzero with the worst witness otherwise.
pub fn multivector_is_zero(
    a: &Multivector,
    policy: &Policy,
    bindings: &Bindings,
) -> Result<ZeroVerdict> {
    let comps = a.component_exprs();
    if comps.is_empty() {
        return Ok(ZeroVerdict::ExactZero);
    }
    decide_zero_all(&comps, &a.chart, policy, bindings).map(aggregate_verdicts)
}
