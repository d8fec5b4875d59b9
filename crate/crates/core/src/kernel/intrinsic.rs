//! Intrinsic constants and operations, their arities, and the delta rule.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::Distribution;
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

/// Failure of a saturated intrinsic application. The interpreter attaches
/// the offending label before surfacing it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DeltaError {
    #[error("cannot apply `{0}`: it takes no arguments")]
    NotAFunction(String),
    #[error("`{op}` expects {expected}, got `{found}`")]
    Type {
        op: &'static str,
        expected: &'static str,
        found: String,
    },
    #[error("`{op}`: {message}")]
    Domain { op: &'static str, message: String },
}

/// Primitive operations. Each has a fixed declared arity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Eq,
    Lt,
    Exp,
    Log,
    Cons,
    Head,
    Tail,
    Null,
    Beta,
    Bernoulli,
    Normal,
    Uniform,
    Exponential,
    Pdf,
    PdfBernoulli,
    PdfNormal,
    PdfBeta,
    PdfUniform,
    PdfExponential,
}

impl Op {
    pub const ALL: [Op; 23] = [
        Op::Add,
        Op::Sub,
        Op::Mul,
        Op::Div,
        Op::Eq,
        Op::Lt,
        Op::Exp,
        Op::Log,
        Op::Cons,
        Op::Head,
        Op::Tail,
        Op::Null,
        Op::Beta,
        Op::Bernoulli,
        Op::Normal,
        Op::Uniform,
        Op::Exponential,
        Op::Pdf,
        Op::PdfBernoulli,
        Op::PdfNormal,
        Op::PdfBeta,
        Op::PdfUniform,
        Op::PdfExponential,
    ];

    pub fn arity(self) -> usize {
        match self {
            Op::Exp | Op::Log | Op::Head | Op::Tail | Op::Null => 1,
            Op::Bernoulli | Op::Exponential => 1,
            Op::Add | Op::Sub | Op::Mul | Op::Div | Op::Eq | Op::Lt | Op::Cons => 2,
            Op::Beta | Op::Normal | Op::Uniform => 2,
            Op::Pdf | Op::PdfBernoulli | Op::PdfExponential => 2,
            Op::PdfNormal | Op::PdfBeta | Op::PdfUniform => 3,
        }
    }

    /// Name in the concrete syntax.
    pub fn name(self) -> &'static str {
        match self {
            Op::Add => "add",
            Op::Sub => "sub",
            Op::Mul => "mul",
            Op::Div => "div",
            Op::Eq => "eq",
            Op::Lt => "lt",
            Op::Exp => "exp",
            Op::Log => "log",
            Op::Cons => "cons",
            Op::Head => "head",
            Op::Tail => "tail",
            Op::Null => "null",
            Op::Beta => "Beta",
            Op::Bernoulli => "Bernoulli",
            Op::Normal => "Normal",
            Op::Uniform => "Uniform",
            Op::Exponential => "Exponential",
            Op::Pdf => "pdf",
            Op::PdfBernoulli => "pdfBernoulli",
            Op::PdfNormal => "pdfNormal",
            Op::PdfBeta => "pdfBeta",
            Op::PdfUniform => "pdfUniform",
            Op::PdfExponential => "pdfExponential",
        }
    }

    pub fn from_name(name: &str) -> Option<Op> {
        Op::ALL.iter().copied().find(|op| op.name() == name)
    }
}

/// Fully applied distributions (the set D).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dist {
    Beta {
        alpha: f64,
        beta: f64,
    },
    Bernoulli {
        p: f64,
    },
    /// `sigma` is the standard deviation.
    Normal {
        mu: f64,
        sigma: f64,
    },
    Uniform {
        low: f64,
        high: f64,
    },
    Exponential {
        rate: f64,
    },
}

fn xlogy(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * y.ln()
    }
}

impl Dist {
    /// Natural log of the density (or mass) of `value`.
    pub fn ln_density(&self, value: &Intrinsic) -> Result<f64, DeltaError> {
        match *self {
            Dist::Bernoulli { p } => {
                let b = value.as_bool().ok_or_else(|| DeltaError::Type {
                    op: "Bernoulli",
                    expected: "a boolean outcome",
                    found: value.to_string(),
                })?;
                Ok(if b { p.ln() } else { (1.0 - p).ln() })
            }
            _ => {
                let x = value.as_real().ok_or_else(|| DeltaError::Type {
                    op: self.op_name(),
                    expected: "a real outcome",
                    found: value.to_string(),
                })?;
                Ok(self.ln_density_real(x))
            }
        }
    }

    fn ln_density_real(&self, x: f64) -> f64 {
        match *self {
            Dist::Beta { alpha, beta } => {
                if !(0.0..=1.0).contains(&x) {
                    return f64::NEG_INFINITY;
                }
                let ln_b = ln_gamma(alpha) + ln_gamma(beta) - ln_gamma(alpha + beta);
                xlogy(alpha - 1.0, x) + xlogy(beta - 1.0, 1.0 - x) - ln_b
            }
            Dist::Normal { mu, sigma } => {
                let z = (x - mu) / sigma;
                -0.5 * z * z - sigma.ln() - 0.5 * (2.0 * PI).ln()
            }
            Dist::Uniform { low, high } => {
                if x < low || x > high {
                    f64::NEG_INFINITY
                } else {
                    -(high - low).ln()
                }
            }
            Dist::Exponential { rate } => {
                if x < 0.0 {
                    f64::NEG_INFINITY
                } else {
                    rate.ln() - rate * x
                }
            }
            Dist::Bernoulli { .. } => unreachable!("bernoulli has a boolean support"),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Intrinsic {
        match *self {
            Dist::Bernoulli { p } => Intrinsic::Bool(rng.random::<f64>() < p),
            Dist::Beta { alpha, beta } => Intrinsic::Real(
                rand_distr::Beta::new(alpha, beta)
                    .expect("parameters validated at construction")
                    .sample(rng),
            ),
            Dist::Normal { mu, sigma } => Intrinsic::Real(
                rand_distr::Normal::new(mu, sigma)
                    .expect("parameters validated at construction")
                    .sample(rng),
            ),
            Dist::Uniform { low, high } => Intrinsic::Real(low + (high - low) * rng.random::<f64>()),
            Dist::Exponential { rate } => Intrinsic::Real(
                rand_distr::Exp::new(rate)
                    .expect("parameters validated at construction")
                    .sample(rng),
            ),
        }
    }

    fn op_name(&self) -> &'static str {
        match self {
            Dist::Beta { .. } => "Beta",
            Dist::Bernoulli { .. } => "Bernoulli",
            Dist::Normal { .. } => "Normal",
            Dist::Uniform { .. } => "Uniform",
            Dist::Exponential { .. } => "Exponential",
        }
    }

    fn build(op: Op, params: &[f64]) -> Result<Dist, DeltaError> {
        let domain = |message: &str| DeltaError::Domain {
            op: op.name(),
            message: message.to_string(),
        };
        let positive = |v: f64| v > 0.0 && v.is_finite();
        match (op, params) {
            (Op::Beta, &[alpha, beta]) => {
                if positive(alpha) && positive(beta) {
                    Ok(Dist::Beta { alpha, beta })
                } else {
                    Err(domain("shape parameters must be positive"))
                }
            }
            (Op::Bernoulli, &[p]) => {
                if (0.0..=1.0).contains(&p) {
                    Ok(Dist::Bernoulli { p })
                } else {
                    Err(domain("probability must lie in [0, 1]"))
                }
            }
            (Op::Normal, &[mu, sigma]) => {
                if positive(sigma) && mu.is_finite() {
                    Ok(Dist::Normal { mu, sigma })
                } else {
                    Err(domain("standard deviation must be positive"))
                }
            }
            (Op::Uniform, &[low, high]) => {
                if low < high && low.is_finite() && high.is_finite() {
                    Ok(Dist::Uniform { low, high })
                } else {
                    Err(domain("bounds must satisfy low < high"))
                }
            }
            (Op::Exponential, &[rate]) => {
                if positive(rate) {
                    Ok(Dist::Exponential { rate })
                } else {
                    Err(domain("rate must be positive"))
                }
            }
            _ => unreachable!("distribution constructor arity mismatch"),
        }
    }
}

impl fmt::Display for Dist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dist::Beta { alpha, beta } => write!(f, "Beta({alpha:?}, {beta:?})"),
            Dist::Bernoulli { p } => write!(f, "Bernoulli({p:?})"),
            Dist::Normal { mu, sigma } => write!(f, "Normal({mu:?}, {sigma:?})"),
            Dist::Uniform { low, high } => write!(f, "Uniform({low:?}, {high:?})"),
            Dist::Exponential { rate } => write!(f, "Exponential({rate:?})"),
        }
    }
}

/// Persistent cons list of intrinsic values.
#[derive(Clone, Default)]
pub struct List(Option<Arc<Cell>>);

struct Cell {
    head: Intrinsic,
    tail: List,
}

impl List {
    pub fn nil() -> Self {
        List(None)
    }

    pub fn cons(head: Intrinsic, tail: List) -> Self {
        List(Some(Arc::new(Cell { head, tail })))
    }

    pub fn from_vec(items: Vec<Intrinsic>) -> Self {
        items
            .into_iter()
            .rev()
            .fold(List::nil(), |tail, head| List::cons(head, tail))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_none()
    }

    pub fn head(&self) -> Option<&Intrinsic> {
        self.0.as_ref().map(|c| &c.head)
    }

    pub fn tail(&self) -> Option<&List> {
        self.0.as_ref().map(|c| &c.tail)
    }

    pub fn iter(&self) -> ListIter<'_> {
        ListIter(self)
    }

    pub fn len(&self) -> usize {
        self.iter().count()
    }
}

pub struct ListIter<'a>(&'a List);

impl<'a> Iterator for ListIter<'a> {
    type Item = &'a Intrinsic;

    fn next(&mut self) -> Option<&'a Intrinsic> {
        let cell = self.0 .0.as_ref()?;
        self.0 = &cell.tail;
        Some(&cell.head)
    }
}

impl PartialEq for List {
    fn eq(&self, other: &Self) -> bool {
        self.iter().eq(other.iter())
    }
}

impl fmt::Debug for List {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.iter()).finish()
    }
}

// Long lists would otherwise drop recursively.
impl Drop for List {
    fn drop(&mut self) {
        let mut next = self.0.take();
        while let Some(cell) = next {
            match Arc::try_unwrap(cell) {
                Ok(mut cell) => next = cell.tail.0.take(),
                Err(_) => break,
            }
        }
    }
}

/// Elements of the intrinsic set C.
#[derive(Debug, Clone, PartialEq)]
pub enum Intrinsic {
    Unit,
    Bool(bool),
    Int(i64),
    Real(f64),
    List(List),
    Dist(Dist),
    /// An operation together with the arguments it has received so far.
    Fn {
        op: Op,
        pending: Vec<Intrinsic>,
    },
}

impl Intrinsic {
    pub fn op(op: Op) -> Self {
        Intrinsic::Fn {
            op,
            pending: Vec::new(),
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Intrinsic::Bool(b) => Some(*b),
            _ => None,
        }
    }

    /// Reals and integers both read as `f64`.
    pub fn as_real(&self) -> Option<f64> {
        match self {
            Intrinsic::Real(r) => Some(*r),
            Intrinsic::Int(i) => Some(*i as f64),
            _ => None,
        }
    }

    pub fn as_dist(&self) -> Option<&Dist> {
        match self {
            Intrinsic::Dist(d) => Some(d),
            _ => None,
        }
    }
}

/// Remaining argument count; 0 for saturated values.
pub fn arity(c: &Intrinsic) -> usize {
    match c {
        Intrinsic::Fn { op, pending } => op.arity() - pending.len(),
        _ => 0,
    }
}

/// The delta function: apply intrinsic `c1` to the arity-0 intrinsic `c2`.
pub fn delta_apply(c1: &Intrinsic, c2: &Intrinsic) -> Result<Intrinsic, DeltaError> {
    let (op, pending) = match c1 {
        Intrinsic::Fn { op, pending } => (*op, pending),
        other => return Err(DeltaError::NotAFunction(other.to_string())),
    };
    if arity(c2) != 0 {
        return Err(DeltaError::Type {
            op: op.name(),
            expected: "a saturated value",
            found: c2.to_string(),
        });
    }
    if pending.len() + 1 < op.arity() {
        let mut pending = pending.clone();
        pending.push(c2.clone());
        return Ok(Intrinsic::Fn { op, pending });
    }
    let mut args: Vec<&Intrinsic> = pending.iter().collect();
    args.push(c2);
    saturate(op, &args)
}

fn real_arg(op: Op, v: &Intrinsic) -> Result<f64, DeltaError> {
    v.as_real().ok_or_else(|| DeltaError::Type {
        op: op.name(),
        expected: "a number",
        found: v.to_string(),
    })
}

fn list_arg(op: Op, v: &Intrinsic) -> Result<&List, DeltaError> {
    match v {
        Intrinsic::List(l) => Ok(l),
        other => Err(DeltaError::Type {
            op: op.name(),
            expected: "a list",
            found: other.to_string(),
        }),
    }
}

fn arith(op: Op, a: &Intrinsic, b: &Intrinsic) -> Result<Intrinsic, DeltaError> {
    if let (Intrinsic::Int(x), Intrinsic::Int(y)) = (a, b) {
        let r = match op {
            Op::Add => x.checked_add(*y),
            Op::Sub => x.checked_sub(*y),
            Op::Mul => x.checked_mul(*y),
            Op::Div => {
                if *y == 0 {
                    return Err(DeltaError::Domain {
                        op: op.name(),
                        message: "integer division by zero".into(),
                    });
                }
                x.checked_div(*y)
            }
            _ => unreachable!(),
        };
        return r.map(Intrinsic::Int).ok_or_else(|| DeltaError::Domain {
            op: op.name(),
            message: "integer overflow".into(),
        });
    }
    let (x, y) = (real_arg(op, a)?, real_arg(op, b)?);
    Ok(Intrinsic::Real(match op {
        Op::Add => x + y,
        Op::Sub => x - y,
        Op::Mul => x * y,
        Op::Div => x / y,
        _ => unreachable!(),
    }))
}

fn equal(a: &Intrinsic, b: &Intrinsic) -> Result<bool, DeltaError> {
    match (a, b) {
        (Intrinsic::Int(x), Intrinsic::Int(y)) => Ok(x == y),
        (Intrinsic::Bool(x), Intrinsic::Bool(y)) => Ok(x == y),
        (Intrinsic::Unit, Intrinsic::Unit) => Ok(true),
        (Intrinsic::List(x), Intrinsic::List(y)) => Ok(x == y),
        _ => match (a.as_real(), b.as_real()) {
            (Some(x), Some(y)) => Ok(x == y),
            _ => Err(DeltaError::Type {
                op: "eq",
                expected: "two comparable values",
                found: format!("{a}, {b}"),
            }),
        },
    }
}

fn saturate(op: Op, args: &[&Intrinsic]) -> Result<Intrinsic, DeltaError> {
    match op {
        Op::Add | Op::Sub | Op::Mul | Op::Div => arith(op, args[0], args[1]),
        Op::Eq => equal(args[0], args[1]).map(Intrinsic::Bool),
        Op::Lt => {
            if let (Intrinsic::Int(x), Intrinsic::Int(y)) = (args[0], args[1]) {
                return Ok(Intrinsic::Bool(x < y));
            }
            Ok(Intrinsic::Bool(real_arg(op, args[0])? < real_arg(op, args[1])?))
        }
        Op::Exp => Ok(Intrinsic::Real(real_arg(op, args[0])?.exp())),
        Op::Log => Ok(Intrinsic::Real(real_arg(op, args[0])?.ln())),
        Op::Cons => {
            let tail = list_arg(op, args[1])?;
            Ok(Intrinsic::List(List::cons(args[0].clone(), tail.clone())))
        }
        Op::Head => list_arg(op, args[0])?
            .head()
            .cloned()
            .ok_or_else(|| DeltaError::Domain {
                op: op.name(),
                message: "empty list".into(),
            }),
        Op::Tail => list_arg(op, args[0])?
            .tail()
            .map(|t| Intrinsic::List(t.clone()))
            .ok_or_else(|| DeltaError::Domain {
                op: op.name(),
                message: "empty list".into(),
            }),
        Op::Null => Ok(Intrinsic::Bool(list_arg(op, args[0])?.is_empty())),
        Op::Beta | Op::Bernoulli | Op::Normal | Op::Uniform | Op::Exponential => {
            let params = args.iter().map(|a| real_arg(op, a)).collect::<Result<Vec<_>, _>>()?;
            Dist::build(op, &params).map(Intrinsic::Dist)
        }
        Op::Pdf => {
            let d = args[0].as_dist().ok_or_else(|| DeltaError::Type {
                op: op.name(),
                expected: "a distribution",
                found: args[0].to_string(),
            })?;
            Ok(Intrinsic::Real(d.ln_density(args[1])?.exp()))
        }
        Op::PdfBernoulli | Op::PdfNormal | Op::PdfBeta | Op::PdfUniform | Op::PdfExponential => {
            let ctor = match op {
                Op::PdfBernoulli => Op::Bernoulli,
                Op::PdfNormal => Op::Normal,
                Op::PdfBeta => Op::Beta,
                Op::PdfUniform => Op::Uniform,
                _ => Op::Exponential,
            };
            let (outcome, params) = args.split_last().expect("arity >= 2");
            let params = params.iter().map(|a| real_arg(op, a)).collect::<Result<Vec<_>, _>>()?;
            let d = Dist::build(ctor, &params)?;
            Ok(Intrinsic::Real(d.ln_density(outcome)?.exp()))
        }
    }
}

impl fmt::Display for Intrinsic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Intrinsic::Unit => f.write_str("()"),
            Intrinsic::Bool(b) => write!(f, "{b}"),
            Intrinsic::Int(i) => write!(f, "{i}"),
            Intrinsic::Real(r) => write!(f, "{r:?}"),
            Intrinsic::List(l) => {
                f.write_str("[")?;
                for (i, item) in l.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str("]")
            }
            Intrinsic::Dist(d) => write!(f, "{d}"),
            Intrinsic::Fn { op, pending } => {
                if pending.is_empty() {
                    f.write_str(op.name())
                } else {
                    write!(f, "({}", op.name())?;
                    for a in pending {
                        write!(f, " {a}")?;
                    }
                    f.write_str(")")
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn apply_all(op: Op, args: &[Intrinsic]) -> Result<Intrinsic, DeltaError> {
        args.iter().try_fold(Intrinsic::op(op), |acc, a| delta_apply(&acc, a))
    }

    #[test]
    fn arity_examples() {
        assert_eq!(arity(&Intrinsic::op(Op::Add)), 2);
        let beta2 = delta_apply(&Intrinsic::op(Op::Beta), &Intrinsic::Int(2)).unwrap();
        assert_eq!(arity(&beta2), 1);
        assert_eq!(arity(&Intrinsic::Bool(true)), 0);
    }

    #[test]
    fn delta_examples() {
        let plus1 = delta_apply(&Intrinsic::op(Op::Add), &Intrinsic::Int(1)).unwrap();
        assert_eq!(delta_apply(&plus1, &Intrinsic::Int(2)).unwrap(), Intrinsic::Int(3));

        let beta = apply_all(Op::Beta, &[Intrinsic::Int(2), Intrinsic::Int(2)]).unwrap();
        assert_eq!(beta, Intrinsic::Dist(Dist::Beta { alpha: 2.0, beta: 2.0 }));

        let mass = apply_all(Op::PdfBernoulli, &[Intrinsic::Real(0.4), Intrinsic::Bool(true)]).unwrap();
        assert!((mass.as_real().unwrap() - 0.4).abs() < 1e-15);
        let mass = apply_all(Op::PdfBernoulli, &[Intrinsic::Real(0.4), Intrinsic::Bool(false)]).unwrap();
        assert!((mass.as_real().unwrap() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn delta_errors() {
        assert!(matches!(
            delta_apply(&Intrinsic::Bool(true), &Intrinsic::Int(1)),
            Err(DeltaError::NotAFunction(_))
        ));
        assert!(matches!(
            delta_apply(&Intrinsic::op(Op::Head), &Intrinsic::Int(1)),
            Err(DeltaError::Type { .. })
        ));
        assert!(matches!(
            delta_apply(&Intrinsic::op(Op::Head), &Intrinsic::List(List::nil())),
            Err(DeltaError::Domain { .. })
        ));
        assert!(apply_all(Op::Beta, &[Intrinsic::Real(-1.0), Intrinsic::Real(1.0)]).is_err());
        // an unsaturated intrinsic is not a valid argument
        assert!(delta_apply(&Intrinsic::op(Op::Null), &Intrinsic::op(Op::Add)).is_err());
    }

    #[test]
    fn mixed_arithmetic_promotes_to_real() {
        let r = apply_all(Op::Add, &[Intrinsic::Int(1), Intrinsic::Real(0.5)]).unwrap();
        assert_eq!(r, Intrinsic::Real(1.5));
        let r = apply_all(Op::Div, &[Intrinsic::Int(7), Intrinsic::Int(2)]).unwrap();
        assert_eq!(r, Intrinsic::Int(3));
    }

    #[test]
    fn list_ops() {
        let l = Intrinsic::List(List::from_vec(vec![Intrinsic::Int(1), Intrinsic::Int(2)]));
        assert_eq!(
            apply_all(Op::Head, std::slice::from_ref(&l)).unwrap(),
            Intrinsic::Int(1)
        );
        let t = apply_all(Op::Tail, std::slice::from_ref(&l)).unwrap();
        assert_eq!(t.to_string(), "[2]");
        assert_eq!(apply_all(Op::Null, &[t]).unwrap(), Intrinsic::Bool(false));
        let c = apply_all(Op::Cons, &[Intrinsic::Int(0), l]).unwrap();
        assert_eq!(c.to_string(), "[0, 1, 2]");
    }

    #[test]
    fn densities_match_closed_forms() {
        let beta = Dist::Beta { alpha: 2.0, beta: 2.0 };
        // 6 x (1 - x)
        let d = beta.ln_density(&Intrinsic::Real(0.4)).unwrap().exp();
        assert!((d - 6.0 * 0.4 * 0.6).abs() < 1e-12);
        let normal = Dist::Normal { mu: 0.0, sigma: 1.0 };
        let d = normal.ln_density(&Intrinsic::Real(0.0)).unwrap().exp();
        assert!((d - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-15);
        let expo = Dist::Exponential { rate: 2.0 };
        let d = expo.ln_density(&Intrinsic::Real(1.0)).unwrap().exp();
        assert!((d - 2.0 * (-2.0f64).exp()).abs() < 1e-15);
        assert_eq!(expo.ln_density(&Intrinsic::Real(-1.0)).unwrap(), f64::NEG_INFINITY);
        let unif = Dist::Uniform { low: 0.0, high: 4.0 };
        assert!((unif.ln_density(&Intrinsic::Real(1.0)).unwrap().exp() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn long_list_drops_without_overflow() {
        let l = List::from_vec((0..200_000).map(Intrinsic::Int).collect());
        assert_eq!(l.len(), 200_000);
    }
}
