//! Inline data expressions in the variables `t`, `x`, `mu` and `n` (the
//! outward normal, −1 at the left wall and +1 at the right one).
//!
//! Arithmetic follows `evalexpr`; integer literals divide as integers, so
//! write `0.5` rather than `1/2`. Besides the `math::` builtins the short
//! names `sin cos tan exp ln sqrt abs sign tanh` and the constant `pi` exist.

use evalexpr::{build_operator_tree, Context, DefaultNumericTypes, EvalexprError, EvalexprResult, Node, Value};

use crate::{HarnessError, Result};

type V = Value<DefaultNumericTypes>;

struct Vars {
    t: V,
    x: V,
    mu: V,
    n: V,
    pi: V,
}

impl Context for Vars {
    type NumericTypes = DefaultNumericTypes;

    fn get_value(&self, identifier: &str) -> Option<&V> {
        match identifier {
            "t" => Some(&self.t),
            "x" => Some(&self.x),
            "mu" => Some(&self.mu),
            "n" => Some(&self.n),
            "pi" => Some(&self.pi),
            _ => None,
        }
    }

    fn call_function(&self, identifier: &str, argument: &V) -> EvalexprResult<V, DefaultNumericTypes> {
        let f: fn(f64) -> f64 = match identifier {
            "sin" => f64::sin,
            "cos" => f64::cos,
            "tan" => f64::tan,
            "exp" => f64::exp,
            "ln" => f64::ln,
            "sqrt" => f64::sqrt,
            "abs" => f64::abs,
            "tanh" => f64::tanh,
            "sign" => |v| if v > 0.0 { 1.0 } else if v < 0.0 { -1.0 } else { 0.0 },
            _ => return Err(EvalexprError::FunctionIdentifierNotFound(identifier.to_string())),
        };
        Ok(Value::Float(f(argument.as_number()?)))
    }

    fn are_builtin_functions_disabled(&self) -> bool {
        false
    }

    fn set_builtin_functions_disabled(&mut self, _disabled: bool) -> EvalexprResult<(), DefaultNumericTypes> {
        Err(EvalexprError::ContextNotMutable)
    }
}

/// A parsed expression.
#[derive(Debug, Clone)]
pub struct Expr {
    source: String,
    node: Node<DefaultNumericTypes>,
}

impl Expr {
    /// Parses `source` and evaluates it on a few sample points so that
    /// unknown names and non-numeric results surface early.
    pub fn parse(source: &str) -> Result<Self> {
        let node = build_operator_tree::<DefaultNumericTypes>(source)
            .map_err(|e| HarnessError::Expression(format!("`{source}`: {e}")))?;
        let e = Self { source: source.to_string(), node };
        for &(t, x, mu, n) in &[(0.0, 0.0, 0.5, -1.0), (0.3, 0.7, -0.25, 1.0)] {
            e.try_eval(t, x, mu, n).map_err(|m| HarnessError::Expression(format!("`{source}`: {m}")))?;
        }
        Ok(e)
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    fn try_eval(&self, t: f64, x: f64, mu: f64, n: f64) -> std::result::Result<f64, String> {
        let vars = Vars { t: V::Float(t), x: V::Float(x), mu: V::Float(mu), n: V::Float(n), pi: V::Float(std::f64::consts::PI) };
        self.node.eval_number_with_context(&vars).map_err(|e| e.to_string())
    }

    /// Value at `(t, x, μ)` on the wall with normal `n`; NaN if evaluation fails.
    pub fn eval(&self, t: f64, x: f64, mu: f64, n: f64) -> f64 {
        self.try_eval(t, x, mu, n).unwrap_or(f64::NAN)
    }
}
