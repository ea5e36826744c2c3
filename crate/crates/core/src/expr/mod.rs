//! Component expressions over chart coordinates.
//!
//! Metric components, vector-field components and fluid scalars are given as
//! small calculator expressions (`exp(2*t)`, `t/(1+t^2/2)`, ...). [`Expr`]
//! parses them once and evaluates either to a plain value or to a [`Jet2`]
//! carrying exact first and second derivatives.

mod jet;
mod parse;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

pub use jet::Jet2;
pub use parse::ParseError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
            BinOp::Pow => 4,
        }
    }
}

const NEG_PRECEDENCE: u8 = 3;
const ATOM_PRECEDENCE: u8 = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl Func {
    pub const ALL: [Func; 10] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Sinh,
        Func::Cosh,
        Func::Tanh,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Abs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }

    /// Value and first two derivatives at `u`, or a domain complaint.
    /// `varying` is false when the argument is constant, in which case
    /// points of non-differentiability are harmless.
    fn taylor(self, u: f64, varying: bool) -> Result<(f64, f64, f64), &'static str> {
        Ok(match self {
            Func::Sin => (u.sin(), u.cos(), -u.sin()),
            Func::Cos => (u.cos(), -u.sin(), -u.cos()),
            Func::Tan => {
                if u.cos() == 0.0 {
                    return Err("tan of an odd multiple of pi/2");
                }
                let t = u.tan();
                let s = 1.0 + t * t;
                (t, s, 2.0 * t * s)
            }
            Func::Sinh => (u.sinh(), u.cosh(), u.sinh()),
            Func::Cosh => (u.cosh(), u.sinh(), u.cosh()),
            Func::Tanh => {
                let t = u.tanh();
                let s = 1.0 - t * t;
                (t, s, -2.0 * t * s)
            }
            Func::Exp => {
                let e = u.exp();
                (e, e, e)
            }
            Func::Log => {
                if u <= 0.0 {
                    return Err("log of a non-positive value");
                }
                (u.ln(), 1.0 / u, -1.0 / (u * u))
            }
            Func::Sqrt => {
                if u < 0.0 {
                    return Err("sqrt of a negative value");
                }
                if u == 0.0 {
                    if varying {
                        return Err("sqrt is not differentiable at 0");
                    }
                    (0.0, 0.0, 0.0)
                } else {
                    let s = u.sqrt();
                    (s, 0.5 / s, -0.25 / (s * u))
                }
            }
            Func::Abs => {
                if u == 0.0 && varying {
                    return Err("abs is not differentiable at 0");
                }
                (u.abs(), u.signum() * f64::from(u != 0.0), 0.0)
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Num(f64),
    /// Index into the declared coordinate list.
    Var(usize),
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

impl Node {
    fn precedence(&self) -> u8 {
        match self {
            Node::Num(v) if v.is_sign_negative() => NEG_PRECEDENCE,
            Node::Num(_) | Node::Var(_) | Node::Call(..) => ATOM_PRECEDENCE,
            Node::Neg(_) => NEG_PRECEDENCE,
            Node::Bin(op, ..) => op.precedence(),
        }
    }

    /// True when no coordinate appears in the subtree.
    pub fn is_constant(&self) -> bool {
        match self {
            Node::Num(_) => true,
            Node::Var(_) => false,
            Node::Neg(a) | Node::Call(_, a) => a.is_constant(),
            Node::Bin(_, a, b) => a.is_constant() && b.is_constant(),
        }
    }

    fn write(&self, coords: &[String], out: &mut String) {
        match self {
            Node::Num(v) => out.push_str(&format!("{v:?}")),
            Node::Var(i) => out.push_str(&coords[*i]),
            Node::Neg(a) => {
                out.push('-');
                a.write_child(coords, out, a.precedence() < NEG_PRECEDENCE);
            }
            Node::Call(f, a) => {
                out.push_str(f.name());
                out.push('(');
                a.write(coords, out);
                out.push(')');
            }
            Node::Bin(op, a, b) => {
                let p = op.precedence();
                let (left_parens, right_parens) = if *op == BinOp::Pow {
                    (a.precedence() <= p, b.precedence() < p)
                } else {
                    (a.precedence() < p, b.precedence() <= p)
                };
                a.write_child(coords, out, left_parens);
                out.push_str(op.symbol());
                b.write_child(coords, out, right_parens);
            }
        }
    }

    fn write_child(&self, coords: &[String], out: &mut String, parens: bool) {
        if parens {
            out.push('(');
            self.write(coords, out);
            out.push(')');
        } else {
            self.write(coords, out);
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("expected a point with {expected} coordinates, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("domain error in `{subexpr}`: {reason}")]
    Domain { subexpr: String, reason: &'static str },
}

/// A parsed component expression bound to its chart coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    root: Node,
    coords: Arc<[String]>,
}

impl Expr {
    pub fn parse<S: AsRef<str>>(text: &str, coords: &[S]) -> Result<Expr, ParseError> {
        let coords: Arc<[String]> = coords.iter().map(|c| c.as_ref().to_string()).collect();
        let root = parse::parse(text, &coords)?;
        Ok(Expr { root, coords })
    }

    pub fn from_node(root: Node, coords: Arc<[String]>) -> Expr {
        Expr { root, coords }
    }

    pub fn constant<S: AsRef<str>>(value: f64, coords: &[S]) -> Expr {
        Expr {
            root: Node::Num(value),
            coords: coords.iter().map(|c| c.as_ref().to_string()).collect(),
        }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn is_constant(&self) -> bool {
        self.root.is_constant()
    }

    fn check_point(&self, point: &[f64]) -> Result<(), EvalError> {
        if point.len() != self.dim() {
            return Err(EvalError::Dimension {
                expected: self.dim(),
                got: point.len(),
            });
        }
        Ok(())
    }

    fn domain(&self, node: &Node, reason: &'static str) -> EvalError {
        let mut s = String::new();
        node.write(&self.coords, &mut s);
        EvalError::Domain { subexpr: s, reason }
    }

    /// Plain value, no derivatives.
    pub fn eval(&self, point: &[f64]) -> Result<f64, EvalError> {
        self.check_point(point)?;
        self.eval_node(&self.root, point)
    }

    fn eval_node(&self, node: &Node, x: &[f64]) -> Result<f64, EvalError> {
        Ok(match node {
            Node::Num(v) => *v,
            Node::Var(i) => x[*i],
            Node::Neg(a) => -self.eval_node(a, x)?,
            Node::Call(f, a) => {
                let u = self.eval_node(a, x)?;
                f.taylor(u, !a.is_constant())
                    .map_err(|r| self.domain(node, r))?
                    .0
            }
            Node::Bin(op, a, b) => {
                let u = self.eval_node(a, x)?;
                let v = self.eval_node(b, x)?;
                match op {
                    BinOp::Add => u + v,
                    BinOp::Sub => u - v,
                    BinOp::Mul => u * v,
                    BinOp::Div => {
                        if v == 0.0 {
                            return Err(self.domain(node, "division by zero"));
                        }
                        u / v
                    }
                    BinOp::Pow => self.pow_value(node, u, v, b.is_constant())?,
                }
            }
        })
    }

    fn pow_value(&self, node: &Node, u: f64, c: f64, const_exp: bool) -> Result<f64, EvalError> {
        if const_exp && c.fract() == 0.0 && c.abs() < 1e9 {
            if u == 0.0 && c < 0.0 {
                return Err(self.domain(node, "zero raised to a negative power"));
            }
            return Ok(u.powi(c as i32));
        }
        if u <= 0.0 {
            return Err(self.domain(node, "non-integer power of a non-positive base"));
        }
        Ok((c * u.ln()).exp())
    }

    /// Value, gradient and Hessian with respect to the chart coordinates.
    pub fn eval_jet2(&self, point: &[f64]) -> Result<Jet2, EvalError> {
        self.check_point(point)?;
        self.jet_node(&self.root, point)
    }

    fn jet_node(&self, node: &Node, x: &[f64]) -> Result<Jet2, EvalError> {
        let n = x.len();
        Ok(match node {
            Node::Num(v) => Jet2::constant(n, *v),
            Node::Var(i) => Jet2::variable(n, *i, x[*i]),
            Node::Neg(a) => -&self.jet_node(a, x)?,
            Node::Call(f, a) => {
                let u = self.jet_node(a, x)?;
                let (f0, f1, f2) = f
                    .taylor(u.value(), !a.is_constant())
                    .map_err(|r| self.domain(node, r))?;
                u.chain(f0, f1, f2)
            }
            Node::Bin(op, a, b) => {
                let u = self.jet_node(a, x)?;
                let v = self.jet_node(b, x)?;
                match op {
                    BinOp::Add => &u + &v,
                    BinOp::Sub => &u - &v,
                    BinOp::Mul => &u * &v,
                    BinOp::Div => u
                        .checked_div(&v)
                        .ok_or_else(|| self.domain(node, "division by zero"))?,
                    BinOp::Pow => self.pow_jet(node, &u, &v, b.is_constant())?,
                }
            }
        })
    }

    fn pow_jet(&self, node: &Node, u: &Jet2, v: &Jet2, const_exp: bool) -> Result<Jet2, EvalError> {
        let a = u.value();
        if const_exp {
            let c = v.value();
            if c.fract() == 0.0 && c.abs() < 1e9 {
                if a == 0.0 && c < 0.0 {
                    return Err(self.domain(node, "zero raised to a negative power"));
                }
                let k = c as i32;
                let f0 = a.powi(k);
                let f1 = if k == 0 { 0.0 } else { c * a.powi(k - 1) };
                let f2 = if k == 0 || k == 1 {
                    0.0
                } else {
                    c * (c - 1.0) * a.powi(k - 2)
                };
                return Ok(u.chain(f0, f1, f2));
            }
            if a <= 0.0 {
                return Err(self.domain(node, "non-integer power of a non-positive base"));
            }
            let f0 = (c * a.ln()).exp();
            return Ok(u.chain(f0, c * f0 / a, c * (c - 1.0) * f0 / (a * a)));
        }
        // exp(v * log(u))
        if a <= 0.0 {
            return Err(self.domain(node, "non-integer power of a non-positive base"));
        }
        let log_u = u.chain(a.ln(), 1.0 / a, -1.0 / (a * a));
        let w = v * &log_u;
        let e = w.value().exp();
        Ok(w.chain(e, e, e))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.root.write(&self.coords, &mut s);
        f.write_str(&s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(text: &str, coords: &[&str]) -> Expr {
        Expr::parse(text, coords).unwrap()
    }

    #[test]
    fn bilinear_jet() {
        let j = p("t*x", &["t", "x"]).eval_jet2(&[2.0, 3.0]).unwrap();
        assert_eq!(j.value(), 6.0);
        assert_eq!(j.grad(), &[3.0, 2.0]);
        assert_eq!(j.hess_matrix(), vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
    }

    #[test]
    fn exp_and_sin_at_origin() {
        let e = p("exp(t)", &["t"]).eval_jet2(&[0.0]).unwrap();
        assert_eq!((e.value(), e.grad()[0], e.hess(0, 0)), (1.0, 1.0, 1.0));
        let s = p("sin(x)", &["x"]).eval_jet2(&[0.0]).unwrap();
        assert_eq!((s.value(), s.grad()[0], s.hess(0, 0)), (0.0, 1.0, 0.0));
    }

    #[test]
    fn domain_errors_name_the_subexpression() {
        let e = p("1 + log(x - 2)", &["x"]);
        match e.eval_jet2(&[1.0]) {
            Err(EvalError::Domain { subexpr, .. }) => assert_eq!(subexpr, "log(x-2.0)"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            p("1/x", &["x"]).eval(&[0.0]),
            Err(EvalError::Domain { .. })
        ));
        assert!(matches!(
            p("sqrt(x)", &["x"]).eval_jet2(&[-1.0]),
            Err(EvalError::Domain { .. })
        ));
        assert!(matches!(
            p("x^0.5", &["x"]).eval_jet2(&[-1.0]),
            Err(EvalError::Domain { .. })
        ));
    }

    #[test]
    fn integer_powers_accept_negative_bases() {
        let j = p("x^3", &["x"]).eval_jet2(&[-2.0]).unwrap();
        assert_eq!((j.value(), j.grad()[0], j.hess(0, 0)), (-8.0, 12.0, -12.0));
        let j = p("x^-2", &["x"]).eval_jet2(&[-2.0]).unwrap();
        assert_eq!(j.value(), 0.25);
        assert_eq!(j.grad()[0], 0.25);
    }

    #[test]
    fn variable_exponent_goes_through_log() {
        // x^x at 2: value 4, d = x^x (ln x + 1), d2 = x^x((ln x+1)^2 + 1/x)
        let j = p("x^x", &["x"]).eval_jet2(&[2.0]).unwrap();
        let l = 2f64.ln() + 1.0;
        assert!((j.value() - 4.0).abs() < 1e-14);
        assert!((j.grad()[0] - 4.0 * l).abs() < 1e-13);
        assert!((j.hess(0, 0) - 4.0 * (l * l + 0.5)).abs() < 1e-12);
    }

    #[test]
    fn point_dimension_is_checked() {
        assert_eq!(
            p("t", &["t", "x"]).eval(&[1.0]),
            Err(EvalError::Dimension {
                expected: 2,
                got: 1
            })
        );
    }

    #[test]
    fn printing_respects_precedence() {
        let cases = [
            ("-x^2", "-x^2.0"),
            ("(-x)^2", "(-x)^2.0"),
            ("2^3^2", "2.0^3.0^2.0"),
            ("(2^3)^2", "(2.0^3.0)^2.0"),
            ("a-(b-c)", "a-(b-c)"),
            ("a-b-c", "a-b-c"),
            ("a/(b*c)", "a/(b*c)"),
            ("2^-a", "2.0^(-a)"),
            ("exp(2*t)", "exp(2.0*t)"),
        ];
        for (src, want) in cases {
            assert_eq!(p(src, &["a", "b", "c", "t", "x"]).to_string(), want, "{src}");
        }
    }
}
