//! Numeric evaluation of expressions, with bindings for opaque function
//! symbols and named parameters.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::ToPrimitive;

use crate::error::EvalError;
use crate::expr::{Elementary, Expr};

/// A real-valued interpretation of an opaque symbol, able to evaluate
/// derivative orders. The builtin selectors cover the fixture needs;
/// `Custom` takes `(order, x)` and returns `None` for unsupported orders.
#[derive(Clone)]
pub enum OpaqueFn {
    Identity,
    Square,
    SinFn,
    Const(f64),
    Custom(Arc<dyn Fn(u32, f64) -> Option<f64> + Send + Sync>),
}

impl fmt::Debug for OpaqueFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OpaqueFn::Identity => write!(f, "identity"),
            OpaqueFn::Square => write!(f, "square"),
            OpaqueFn::SinFn => write!(f, "sin"),
            OpaqueFn::Const(c) => write!(f, "const({c})"),
            OpaqueFn::Custom(_) => write!(f, "custom"),
        }
    }
}

impl OpaqueFn {
    /// Parses a binding selector: `identity`, `square`, `sin`, `const(c)`.
    pub fn from_selector(s: &str) -> Option<OpaqueFn> {
        match s {
            "identity" => Some(OpaqueFn::Identity),
            "square" => Some(OpaqueFn::Square),
            "sin" => Some(OpaqueFn::SinFn),
            _ => {
                let inner = s.strip_prefix("const(")?.strip_suffix(')')?;
                inner.trim().parse::<f64>().ok().map(OpaqueFn::Const)
            }
        }
    }

    pub fn eval(&self, name: &str, order: u32, x: f64) -> Result<f64, EvalError> {
        let v = match self {
            OpaqueFn::Identity => match order {
                0 => x,
                1 => 1.0,
                _ => 0.0,
            },
            OpaqueFn::Square => match order {
                0 => x * x,
                1 => 2.0 * x,
                2 => 2.0,
                _ => 0.0,
            },
            OpaqueFn::SinFn => match order % 4 {
                0 => x.sin(),
                1 => x.cos(),
                2 => -x.sin(),
                _ => -x.cos(),
            },
            OpaqueFn::Const(c) => {
                if order == 0 {
                    *c
                } else {
                    0.0
                }
            }
            OpaqueFn::Custom(f) => f(order, x).ok_or(EvalError::UnsupportedOrder {
                name: name.to_string(),
                order,
            })?,
        };
        Ok(v)
    }
}

/// Bindings for opaque symbols and parameters used during evaluation.
#[derive(Debug, Clone, Default)]
pub struct Bindings {
    fns: BTreeMap<String, OpaqueFn>,
    params: BTreeMap<String, f64>,
}

impl Bindings {
    pub fn empty() -> Bindings {
        Bindings::default()
    }

    pub fn with_fn(mut self, name: impl Into<String>, f: OpaqueFn) -> Bindings {
        self.fns.insert(name.into(), f);
        self
    }

    pub fn with_param(mut self, name: impl Into<String>, value: f64) -> Bindings {
        self.params.insert(name.into(), value);
        self
    }

    pub fn function(&self, name: &str) -> Option<&OpaqueFn> {
        self.fns.get(name)
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.get(name).copied()
    }
}

impl Expr {
    /// Standard real evaluation at a point. Deterministic; reports
    /// domain violations (ln of a non-positive value, sqrt of a negative
    /// value, division by zero) and missing bindings as errors.
    pub fn eval(&self, point: &[f64], bindings: &Bindings) -> Result<f64, EvalError> {
        let v = self.eval_inner(point, bindings)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite)
        }
    }

    fn eval_inner(&self, point: &[f64], bindings: &Bindings) -> Result<f64, EvalError> {
        match self {
            Expr::Const(c) => c
                .to_f64()
                .ok_or(EvalError::NonFinite),
            Expr::Var(i) => point.get(*i).copied().ok_or(EvalError::PointDim {
                expected: *i + 1,
                got: point.len(),
            }),
            Expr::Param(name) => bindings
                .param(name)
                .ok_or_else(|| EvalError::MissingParam(name.clone())),
            Expr::Sum(ts) => {
                let mut acc = 0.0;
                for t in ts {
                    acc += t.eval_inner(point, bindings)?;
                }
                Ok(acc)
            }
            Expr::Product(fs) => {
                let mut acc = 1.0;
                for f in fs {
                    acc *= f.eval_inner(point, bindings)?;
                }
                Ok(acc)
            }
            Expr::Pow(b, k) => {
                let base = b.eval_inner(point, bindings)?;
                if base == 0.0 && *k < 0 {
                    return Err(EvalError::Domain("division by zero"));
                }
                Ok(base.powi(*k))
            }
            Expr::Func(head, a) => {
                let x = a.eval_inner(point, bindings)?;
                match head {
                    Elementary::Sin => Ok(x.sin()),
                    Elementary::Cos => Ok(x.cos()),
                    Elementary::Exp => Ok(x.exp()),
                    Elementary::Ln => {
                        if x <= 0.0 {
                            Err(EvalError::Domain("ln of a non-positive value"))
                        } else {
                            Ok(x.ln())
                        }
                    }
                    Elementary::Atan => Ok(x.atan()),
                    Elementary::Sqrt => {
                        if x < 0.0 {
                            Err(EvalError::Domain("sqrt of a negative value"))
                        } else {
                            Ok(x.sqrt())
                        }
                    }
                }
            }
            Expr::Opaque { name, order, arg } => {
                let x = arg.eval_inner(point, bindings)?;
                let f = bindings
                    .function(name)
                    .ok_or_else(|| EvalError::MissingBinding(name.clone()))?;
                f.eval(name, *order, x)
            }
        }
    }
}
