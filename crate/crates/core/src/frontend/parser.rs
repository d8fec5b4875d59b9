use crate::kernel::{Ident, Intrinsic, List, Op, SourceTerm};

use super::lexer::{tokenize, Pos, Tok, Token};
use super::ParseError;

/// Parses a whole program. Unbound variables are rejected.
pub fn parse(src: &str) -> Result<SourceTerm, ParseError> {
    let toks = tokenize(src)?;
    let mut p = Parser {
        toks,
        at: 0,
        scope: Vec::new(),
    };
    let t = p.expr()?;
    p.expect(Tok::Eof, "end of input")?;
    Ok(t)
}

struct Parser {
    toks: Vec<Token>,
    at: usize,
    scope: Vec<Ident>,
}

fn op_const(op: Op) -> SourceTerm {
    SourceTerm::Const(Intrinsic::op(op))
}

fn binary(op: Op, a: SourceTerm, b: SourceTerm) -> SourceTerm {
    SourceTerm::app(SourceTerm::app(op_const(op), a), b)
}

fn reserved(name: &str) -> bool {
    Op::from_name(name).is_some() || name == "nil"
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].pos
    }

    fn advance(&mut self) -> Tok {
        let t = self.toks[self.at].tok.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let p = self.pos();
        Err(ParseError::new(p.line, p.col, msg))
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.advance();
            Ok(())
        } else {
            self.error(format!("expected {what}, found {}", describe(self.peek())))
        }
    }

    fn binder(&mut self) -> Result<Ident, ParseError> {
        match self.peek().clone() {
            Tok::Ident(name, id) => {
                if reserved(&name) {
                    return self.error(format!("`{name}` is an intrinsic and cannot be rebound"));
                }
                self.advance();
                Ok(Ident::new(name, id.unwrap_or(0)))
            }
            other => self.error(format!("expected a variable name, found {}", describe(&other))),
        }
    }

    fn with_bound<T>(
        &mut self,
        xs: &[Ident],
        f: impl FnOnce(&mut Self) -> Result<T, ParseError>,
    ) -> Result<T, ParseError> {
        let mark = self.scope.len();
        self.scope.extend(xs.iter().cloned());
        let r = f(self);
        self.scope.truncate(mark);
        r
    }

    fn expr(&mut self) -> Result<SourceTerm, ParseError> {
        match self.peek() {
            Tok::Let => self.let_expr(),
            Tok::If => {
                self.advance();
                let c = self.expr()?;
                self.expect(Tok::Then, "`then`")?;
                let t = self.expr()?;
                self.expect(Tok::Else, "`else`")?;
                let e = self.expr()?;
                Ok(SourceTerm::if_(c, t, e))
            }
            Tok::Lam => self.lambda(),
            _ => {
                let first = self.cmp()?;
                if *self.peek() == Tok::Semi {
                    self.advance();
                    let rest = self.expr()?;
                    Ok(SourceTerm::seq(first, rest))
                } else {
                    Ok(first)
                }
            }
        }
    }

    fn lambda(&mut self) -> Result<SourceTerm, ParseError> {
        self.expect(Tok::Lam, "`lam`")?;
        let mut params = vec![self.binder()?];
        while matches!(self.peek(), Tok::Ident(..)) {
            params.push(self.binder()?);
        }
        self.expect(Tok::Dot, "`.` after lambda parameters")?;
        let body = self.with_bound(&params, |p| p.expr())?;
        Ok(params.into_iter().rev().fold(body, |acc, x| SourceTerm::lam(x, acc)))
    }

    fn let_expr(&mut self) -> Result<SourceTerm, ParseError> {
        self.expect(Tok::Let, "`let`")?;
        if *self.peek() == Tok::Rec {
            self.advance();
            let name = self.binder()?;
            self.expect(Tok::Eq, "`=`")?;
            if *self.peek() != Tok::Lam {
                return self.error("`let rec` must bind a lambda");
            }
            self.advance();
            let param = self.binder()?;
            let mut more = Vec::new();
            while matches!(self.peek(), Tok::Ident(..)) {
                more.push(self.binder()?);
            }
            self.expect(Tok::Dot, "`.` after lambda parameters")?;
            let mut bound = vec![name.clone(), param.clone()];
            bound.extend(more.iter().cloned());
            let body = self.with_bound(&bound, |p| p.expr())?;
            let body = more.into_iter().rev().fold(body, |acc, x| SourceTerm::lam(x, acc));
            self.expect(Tok::In, "`in`")?;
            let rest = self.with_bound(std::slice::from_ref(&name), |p| p.expr())?;
            return Ok(SourceTerm::LetRec {
                name,
                param,
                body: Box::new(body),
                rest: Box::new(rest),
            });
        }
        let x = self.binder()?;
        self.expect(Tok::Eq, "`=`")?;
        let e1 = self.expr()?;
        self.expect(Tok::In, "`in`")?;
        let e2 = self.with_bound(std::slice::from_ref(&x), |p| p.expr())?;
        Ok(SourceTerm::let_(x, e1, e2))
    }

    fn cmp(&mut self) -> Result<SourceTerm, ParseError> {
        let lhs = self.additive()?;
        let op = match self.peek() {
            Tok::Eq => Op::Eq,
            Tok::Lt => Op::Lt,
            _ => return Ok(lhs),
        };
        self.advance();
        let rhs = self.additive()?;
        Ok(binary(op, lhs, rhs))
    }

    fn additive(&mut self) -> Result<SourceTerm, ParseError> {
        let mut acc = self.multiplicative()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => Op::Add,
                Tok::Minus => Op::Sub,
                _ => return Ok(acc),
            };
            self.advance();
            let rhs = self.multiplicative()?;
            acc = binary(op, acc, rhs);
        }
    }

    fn multiplicative(&mut self) -> Result<SourceTerm, ParseError> {
        let mut acc = self.application()?;
        loop {
            let op = match self.peek() {
                Tok::Star => Op::Mul,
                Tok::Slash => Op::Div,
                _ => return Ok(acc),
            };
            self.advance();
            let rhs = self.application()?;
            acc = binary(op, acc, rhs);
        }
    }

    fn application(&mut self) -> Result<SourceTerm, ParseError> {
        match self.peek() {
            Tok::Assume => {
                self.advance();
                let arg = self.application()?;
                return Ok(SourceTerm::Assume(Box::new(arg)));
            }
            Tok::Weight => {
                self.advance();
                let arg = self.application()?;
                return Ok(SourceTerm::Weight(Box::new(arg)));
            }
            Tok::Observe => {
                self.advance();
                let d = self.atom()?;
                let v = self.atom()?;
                return Ok(SourceTerm::Weight(Box::new(binary(Op::Pdf, d, v))));
            }
            Tok::Minus => {
                self.advance();
                let lit = match self.advance() {
                    Tok::Int(n) => Intrinsic::Int(-n),
                    Tok::Real(r) => Intrinsic::Real(-r),
                    other => {
                        self.at -= 1;
                        return self.error(format!("expected a number after unary `-`, found {}", describe(&other)));
                    }
                };
                let head = SourceTerm::Const(lit);
                return self.arguments(head);
            }
            _ => {}
        }
        let head = self.atom()?;
        self.arguments(head)
    }

    fn arguments(&mut self, mut acc: SourceTerm) -> Result<SourceTerm, ParseError> {
        while self.starts_atom() {
            let arg = self.atom()?;
            acc = SourceTerm::app(acc, arg);
        }
        Ok(acc)
    }

    fn starts_atom(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Ident(..) | Tok::Int(_) | Tok::Real(_) | Tok::True | Tok::False | Tok::LParen | Tok::LBracket
        )
    }

    fn atom(&mut self) -> Result<SourceTerm, ParseError> {
        let pos = self.pos();
        match self.advance() {
            Tok::Int(n) => Ok(SourceTerm::Const(Intrinsic::Int(n))),
            Tok::Real(r) => Ok(SourceTerm::Const(Intrinsic::Real(r))),
            Tok::True => Ok(SourceTerm::Const(Intrinsic::Bool(true))),
            Tok::False => Ok(SourceTerm::Const(Intrinsic::Bool(false))),
            Tok::Ident(name, id) => {
                if id.is_none() {
                    if name == "nil" {
                        return Ok(SourceTerm::Const(Intrinsic::List(List::nil())));
                    }
                    if let Some(op) = Op::from_name(&name) {
                        return Ok(op_const(op));
                    }
                }
                self.variable(name, id, pos)
            }
            Tok::LParen => {
                if *self.peek() == Tok::RParen {
                    self.advance();
                    return Ok(SourceTerm::Const(Intrinsic::Unit));
                }
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::LBracket => self.list(),
            other => {
                self.at -= 1;
                self.error(format!("expected an expression, found {}", describe(&other)))
            }
        }
    }

    fn variable(&mut self, name: String, id: Option<u32>, pos: Pos) -> Result<SourceTerm, ParseError> {
        let x = Ident::new(name.as_str(), id.unwrap_or(0));
        if name == "_" && id.is_none() {
            return Err(ParseError::new(pos.line, pos.col, "`_` cannot be used as a value"));
        }
        if !self.scope.iter().rev().any(|b| *b == x) {
            return Err(ParseError::new(
                pos.line,
                pos.col,
                format!("unbound variable `{}`", display_ident(&name, id)),
            ));
        }
        Ok(SourceTerm::Var(x))
    }

    fn list(&mut self) -> Result<SourceTerm, ParseError> {
        let mut items = Vec::new();
        if *self.peek() != Tok::RBracket {
            loop {
                items.push(self.expr()?);
                if *self.peek() == Tok::Comma {
                    self.advance();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RBracket, "`]` or `,`")?;
        let literal: Option<Vec<Intrinsic>> = items
            .iter()
            .map(|t| match t {
                SourceTerm::Const(c) if crate::kernel::arity(c) == 0 => Some(c.clone()),
                _ => None,
            })
            .collect();
        if let Some(values) = literal {
            return Ok(SourceTerm::Const(Intrinsic::List(List::from_vec(values))));
        }
        Ok(items
            .into_iter()
            .rev()
            .fold(SourceTerm::Const(Intrinsic::List(List::nil())), |tail, head| {
                binary(Op::Cons, head, tail)
            }))
    }
}

fn display_ident(name: &str, id: Option<u32>) -> String {
    match id {
        Some(id) => format!("{name}#{id}"),
        None => name.to_string(),
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(n, id) => format!("`{}`", display_ident(n, *id)),
        Tok::Int(n) => format!("`{n}`"),
        Tok::Real(r) => format!("`{r:?}`"),
        Tok::Eof => "end of input".into(),
        other => {
            let s = match other {
                Tok::Let => "let",
                Tok::Rec => "rec",
                Tok::In => "in",
                Tok::If => "if",
                Tok::Then => "then",
                Tok::Else => "else",
                Tok::Lam => "lam",
                Tok::Assume => "assume",
                Tok::Weight => "weight",
                Tok::Observe => "observe",
                Tok::True => "true",
                Tok::False => "false",
                Tok::Dot => ".",
                Tok::Comma => ",",
                Tok::Semi => ";",
                Tok::LParen => "(",
                Tok::RParen => ")",
                Tok::LBracket => "[",
                Tok::RBracket => "]",
                Tok::Eq => "=",
                Tok::Lt => "<",
                Tok::Plus => "+",
                Tok::Minus => "-",
                Tok::Star => "*",
                Tok::Slash => "/",
                _ => "?",
            };
            format!("`{s}`")
        }
    }
}
