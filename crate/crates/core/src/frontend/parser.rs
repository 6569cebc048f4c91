//! Recursive-descent parser for domain text.

use crate::solver::{validate, Action, Bounded, CmpOp, Cond, Cpf, CpfKind, DiagKind, Diagnostic, Expr, HmdpModel, Pos};

use super::lexer::{lex, Tok};

const KEYWORDS: [&str; 15] = [
    "domain",
    "cvariables",
    "bvariables",
    "action",
    "reward",
    "discount",
    "horizon",
    "in",
    "if",
    "then",
    "else",
    "bernoulli",
    "abs",
    "true",
    "false",
];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

/// Parse and validate domain text.
pub fn parse(text: &str) -> Result<HmdpModel, Vec<Diagnostic>> {
    let toks = lex(text).map_err(|d| vec![d])?;
    let mut p = Parser {
        toks,
        at: 0,
        soft: Vec::new(),
        far: None,
    };
    let model = p.domain().map_err(|d| vec![d])?;
    if !p.soft.is_empty() {
        return Err(p.soft);
    }
    let diags = validate(&model);
    if diags.is_empty() {
        Ok(model)
    } else {
        Err(diags)
    }
}

type PResult<T> = Result<T, Diagnostic>;

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    /// Recoverable problems; parsing continues past them.
    soft: Vec<Diagnostic>,
    /// Furthest failure seen while backtracking.
    far: Option<Diagnostic>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at.min(self.toks.len() - 1)].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.at + k).min(self.toks.len() - 1)].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at.min(self.toks.len() - 1)].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.peek().clone();
        if self.at < self.toks.len() - 1 {
            self.at += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        Err(Diagnostic::new(DiagKind::Syntax, self.pos(), msg))
    }

    fn expected<T>(&self, what: &str) -> PResult<T> {
        self.err(format!("expected {}, found {}", what, self.peek().describe()))
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(t) if *t == s)
    }

    fn is_kw(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Ident(t) if t == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, s: &str) -> bool {
        if self.is_kw(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.expected(&format!("`{}`", s))
        }
    }

    fn expect_kw(&mut self, s: &str) -> PResult<()> {
        if self.eat_kw(s) {
            Ok(())
        } else {
            self.expected(&format!("`{}`", s))
        }
    }

    fn ident(&mut self) -> PResult<(String, Pos)> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                Ok((s, pos))
            }
            _ => self.expected("identifier"),
        }
    }

    fn number(&mut self) -> PResult<f64> {
        let neg = self.eat_sym("-");
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(if neg { -v } else { v })
            }
            _ => self.expected("number"),
        }
    }

    fn domain(&mut self) -> PResult<HmdpModel> {
        self.expect_kw("domain")?;
        let (name, _) = self.ident()?;
        let mut m = HmdpModel::new(&name);
        let mut seen_reward = false;
        loop {
            let pos = self.pos();
            match self.peek().clone() {
                Tok::Eof => break,
                Tok::Ident(k) if k == "cvariables" => {
                    self.bump();
                    self.expect_sym("{")?;
                    while !self.eat_sym("}") {
                        let b = self.bounded()?;
                        m.cvars.push(b);
                        self.eat_sym(",");
                        self.eat_sym(";");
                    }
                }
                Tok::Ident(k) if k == "bvariables" => {
                    self.bump();
                    self.expect_sym("{")?;
                    while !self.eat_sym("}") {
                        let b = self.ident()?;
                        m.bvars.push(b);
                        self.eat_sym(",");
                        self.eat_sym(";");
                    }
                }
                Tok::Ident(k) if k == "action" => {
                    self.bump();
                    let a = self.action(pos)?;
                    m.actions.push(a);
                }
                Tok::Ident(k) if k == "reward" => {
                    self.bump();
                    if seen_reward {
                        self.soft
                            .push(Diagnostic::new(DiagKind::Duplicate, pos, "reward defined twice"));
                    }
                    seen_reward = true;
                    self.expect_sym("=")?;
                    m.reward = Some(self.expr()?);
                    m.reward_pos = pos;
                    self.expect_sym(";")?;
                }
                Tok::Ident(k) if k == "discount" => {
                    self.bump();
                    self.eat_sym("=");
                    let at = self.pos();
                    m.discount = self.number()?;
                    if !(0.0..=1.0).contains(&m.discount) {
                        self.soft.push(Diagnostic::new(
                            DiagKind::Discount,
                            at,
                            format!("discount {} outside [0, 1]", m.discount),
                        ));
                    }
                    self.expect_sym(";")?;
                }
                Tok::Ident(k) if k == "horizon" => {
                    self.bump();
                    self.eat_sym("=");
                    match self.peek().clone() {
                        Tok::Num(v) if v >= 0.0 && v.fract() == 0.0 && v <= 1e9 => {
                            self.bump();
                            m.horizon = Some(v as usize);
                        }
                        _ => return self.expected("non-negative integer horizon"),
                    }
                    self.expect_sym(";")?;
                }
                _ => return self.expected("declaration"),
            }
        }
        Ok(m)
    }

    /// `name in [lo, hi]`; a missing range is reported and parsing goes on.
    fn bounded(&mut self) -> PResult<Bounded> {
        let (name, pos) = self.ident()?;
        if !self.eat_kw("in") {
            self.soft.push(Diagnostic::new(
                DiagKind::UnboundedVariable,
                pos,
                format!("`{}` has no bounds; write `{} in [lo, hi]`", name, name),
            ));
            return Ok(Bounded {
                name,
                lo: f64::NEG_INFINITY,
                hi: f64::INFINITY,
                pos,
            });
        }
        self.expect_sym("[")?;
        let lo = self.number()?;
        self.expect_sym(",")?;
        let hi = self.number()?;
        self.expect_sym("]")?;
        Ok(Bounded { name, lo, hi, pos })
    }

    fn action(&mut self, pos: Pos) -> PResult<Action> {
        let (name, _) = self.ident()?;
        let mut params = Vec::new();
        if self.eat_sym("(") && !self.eat_sym(")") {
            loop {
                params.push(self.bounded()?);
                if self.eat_sym(")") {
                    break;
                }
                self.expect_sym(",")?;
            }
        }
        self.expect_sym("{")?;
        let mut a = Action {
            name,
            params,
            cpfs: Vec::new(),
            reward: None,
            pos,
        };
        while !self.eat_sym("}") {
            let spos = self.pos();
            match self.peek().clone() {
                Tok::Primed(v) => {
                    self.bump();
                    self.expect_sym("=")?;
                    let kind = if self.is_kw("bernoulli") {
                        self.bump();
                        self.expect_sym("(")?;
                        let p = self.expr()?;
                        self.expect_sym(")")?;
                        CpfKind::Bernoulli(p)
                    } else {
                        CpfKind::Ple(self.expr()?)
                    };
                    self.expect_sym(";")?;
                    a.cpfs.push(Cpf {
                        var: v,
                        kind,
                        pos: spos,
                    });
                }
                Tok::Ident(k) if k == "reward" => {
                    self.bump();
                    if a.reward.is_some() {
                        self.soft.push(Diagnostic::new(
                            DiagKind::Duplicate,
                            spos,
                            "action reward defined twice",
                        ));
                    }
                    self.expect_sym("=")?;
                    a.reward = Some(self.expr()?);
                    self.expect_sym(";")?;
                }
                _ => return self.expected("next-state assignment `v' = ...;` or `reward = ...;`"),
            }
        }
        Ok(a)
    }

    // ---- expressions ----

    fn expr(&mut self) -> PResult<Expr> {
        if self.eat_kw("if") {
            let c = self.cond()?;
            self.expect_kw("then")?;
            let a = self.expr()?;
            self.expect_kw("else")?;
            let b = self.expr()?;
            return Ok(Expr::ite(c, a, b));
        }
        let mut e = self.term()?;
        loop {
            if self.eat_sym("+") {
                e = e.add(self.term()?);
            } else if self.eat_sym("-") {
                e = e.sub(self.term()?);
            } else {
                return Ok(e);
            }
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut e = self.unary()?;
        while self.eat_sym("*") {
            e = e.mul(self.unary()?);
        }
        Ok(e)
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.eat_sym("-") {
            // a minus glued to a literal is part of the literal
            if let Tok::Num(v) = self.peek().clone() {
                self.bump();
                return Ok(Expr::Num(-v));
            }
            return Ok(self.unary()?.neg());
        }
        self.atom()
    }

    fn atom(&mut self) -> PResult<Expr> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Num(v))
            }
            Tok::Primed(v) => {
                self.bump();
                Ok(Expr::Var(format!("{}'", v), pos))
            }
            Tok::Ident(k) if k == "abs" => {
                self.bump();
                self.expect_sym("(")?;
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e.abs())
            }
            Tok::Ident(k) if k == "if" => self.expr(),
            Tok::Ident(k) if !is_keyword(&k) => {
                self.bump();
                Ok(Expr::Var(k, pos))
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            _ => self.expected("expression"),
        }
    }

    fn cond(&mut self) -> PResult<Cond> {
        let mut c = self.cond_and()?;
        while self.eat_sym("|") {
            c = c.or(self.cond_and()?);
        }
        Ok(c)
    }

    fn cond_and(&mut self) -> PResult<Cond> {
        let mut c = self.cond_not()?;
        while self.eat_sym("&") {
            c = c.and(self.cond_not()?);
        }
        Ok(c)
    }

    fn cond_not(&mut self) -> PResult<Cond> {
        if self.eat_sym("!") {
            return Ok(self.cond_not()?.not());
        }
        self.cond_atom()
    }

    fn cmp_op(&self) -> Option<CmpOp> {
        match self.peek() {
            Tok::Sym("<") => Some(CmpOp::Lt),
            Tok::Sym("<=") => Some(CmpOp::Le),
            Tok::Sym(">") => Some(CmpOp::Gt),
            Tok::Sym(">=") => Some(CmpOp::Ge),
            _ => None,
        }
    }

    fn note(&mut self, d: Diagnostic) {
        let further = match &self.far {
            Some(f) => (d.pos.line, d.pos.col) > (f.pos.line, f.pos.col),
            None => true,
        };
        if further {
            self.far = Some(d);
        }
    }

    /// A comparison, a boolean variable, a constant or a parenthesized
    /// condition. Comparisons are tried first.
    fn cond_atom(&mut self) -> PResult<Cond> {
        let start = self.at;
        match self.try_cmp() {
            Ok(c) => return Ok(c),
            Err(d) => self.note(d),
        }
        self.at = start;
        let pos = self.pos();
        let r = match self.peek().clone() {
            Tok::Ident(k) if k == "true" => {
                self.bump();
                Ok(Cond::Const(true))
            }
            Tok::Ident(k) if k == "false" => {
                self.bump();
                Ok(Cond::Const(false))
            }
            Tok::Ident(k) if !is_keyword(&k) && self.cmp_op_after_atom() => {
                self.bump();
                Ok(Cond::Bool(k, pos))
            }
            Tok::Primed(k) if self.cmp_op_after_atom() => {
                self.bump();
                Ok(Cond::Bool(format!("{}'", k), pos))
            }
            Tok::Sym("(") => {
                self.bump();
                let c = self.cond();
                match c {
                    Ok(c) => match self.expect_sym(")") {
                        Ok(()) => Ok(c),
                        Err(d) => Err(d),
                    },
                    Err(d) => Err(d),
                }
            }
            _ => self.expected("condition"),
        };
        match r {
            Ok(c) => {
                self.far = None;
                Ok(c)
            }
            Err(d) => {
                self.note(d);
                Err(self.far.take().expect("noted"))
            }
        }
    }

    /// Whether the token after the current one ends a boolean atom.
    fn cmp_op_after_atom(&self) -> bool {
        !matches!(self.peek_at(1), Tok::Sym("<" | "<=" | ">" | ">=" | "+" | "-" | "*"))
    }

    fn try_cmp(&mut self) -> PResult<Cond> {
        let a = self.expr()?;
        let op = match self.cmp_op() {
            Some(op) => op,
            None => return self.expected("comparison operator"),
        };
        self.bump();
        let b = self.expr()?;
        Ok(Cond::cmp(a, op, b))
    }
}
