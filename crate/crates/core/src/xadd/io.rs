//! Diagram text format, DOT export and case printing.
//!
//! Text format:
//!
//! ```text
//! cvar x -10 10
//! bvar b
//! (x - 3 > 0
//!   (b
//!     [2*x]
//!     [1])
//!   [0])
//! ```
//!
//! A node is `( decision child child )` with the true branch first, or a
//! leaf `[ affine ]`. Shared subdiagrams are written out in full.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use crate::lp::{fmt_num, LinExpr, VarId};
use crate::scalar::Scalar;

use super::store::{Decision, DiagramStore, Node, NodeId};
use super::XaddError;

impl<T: Scalar> DiagramStore<T> {
    fn decision_text(&self, d: &Decision<T>, value: bool) -> String {
        match d {
            Decision::Bool(b) => {
                if value {
                    self.bool_name(*b).to_string()
                } else {
                    format!("!{}", self.bool_name(*b))
                }
            }
            Decision::Ineq(e) => format!("{} {} 0", self.display_expr(e), if value { ">" } else { "<=" }),
        }
    }

    /// Serialize `f` with a header declaring the variables it mentions.
    pub fn write_text(&self, f: NodeId) -> String {
        let mut out = String::new();
        for v in self.cont_support(f) {
            let (lo, hi) = self.bounds(v);
            let _ = writeln!(out, "cvar {} {} {}", self.var_name(v), fmt_num(lo), fmt_num(hi));
        }
        for b in self.bool_support(f) {
            let _ = writeln!(out, "bvar {}", self.bool_name(b));
        }
        self.write_node(f, 0, &mut out);
        out.push('\n');
        out
    }

    fn write_node(&self, n: NodeId, indent: usize, out: &mut String) {
        for _ in 0..indent {
            out.push(' ');
        }
        match self.node(n) {
            Node::Terminal(e) => {
                let _ = write!(out, "[{}]", self.display_expr(e));
            }
            Node::Internal { dec, hi, lo } => {
                out.push('(');
                out.push_str(&self.decision_text(self.decision(*dec), true));
                out.push('\n');
                self.write_node(*hi, indent + 2, out);
                out.push('\n');
                self.write_node(*lo, indent + 2, out);
                out.push(')');
            }
        }
    }

    /// Parse diagram text into this store, declaring header variables (or
    /// matching existing ones by name).
    pub fn read_text(&mut self, text: &str) -> Result<NodeId, XaddError> {
        let toks = tokenize(text)?;
        let mut p = Parser { toks, pos: 0 };
        while p.peek_ident("cvar") || p.peek_ident("bvar") {
            let line = p.line();
            let kw = p.ident()?;
            let name = p.ident()?;
            if kw == "cvar" {
                let lo = p.signed_number()?;
                let hi = p.signed_number()?;
                self.declare_cont(&name, T::lit(lo), T::lit(hi))
                    .map_err(|e| XaddError::Syntax {
                        line,
                        msg: e.to_string(),
                    })?;
            } else {
                self.declare_bool(&name);
            }
        }
        let tree = p.node(self)?;
        if p.pos < p.toks.len() {
            return Err(p.error("trailing input after diagram"));
        }
        // register decisions so that every parent precedes its children
        let mut order = DecisionOrder::default();
        order.collect(&tree, None);
        for d in order.topological() {
            self.register_decision(d);
        }
        Ok(self.build(&tree))
    }

    fn build(&mut self, t: &Tree<T>) -> NodeId {
        match t {
            Tree::Leaf(e) => self.mk_terminal(e.clone()),
            Tree::Branch(d, hi, lo) => {
                let h = self.build(hi);
                let l = self.build(lo);
                match d {
                    Decision::Bool(b) => self.ite_bool(*b, h, l),
                    Decision::Ineq(e) => self.ite_expr(e, h, l),
                }
            }
        }
    }

    /// Graphviz rendering; true edges solid, false edges dotted.
    pub fn export_dot(&self, f: NodeId) -> String {
        let mut ids: HashMap<NodeId, usize> = HashMap::new();
        let mut order = Vec::new();
        let mut stack = vec![f];
        while let Some(n) = stack.pop() {
            if ids.contains_key(&n) {
                continue;
            }
            ids.insert(n, order.len());
            order.push(n);
            if let Node::Internal { hi, lo, .. } = *self.node(n) {
                stack.push(lo);
                stack.push(hi);
            }
        }
        let mut out = String::from("digraph xadd {\n");
        for &n in &order {
            let i = ids[&n];
            match self.node(n) {
                Node::Terminal(e) => {
                    let _ = writeln!(out, "  n{} [shape=box, label=\"{}\"];", i, self.display_expr(e));
                }
                Node::Internal { dec, .. } => {
                    let label = self.decision_text(self.decision(*dec), true);
                    let _ = writeln!(out, "  n{} [shape=ellipse, label=\"{}\"];", i, label);
                }
            }
        }
        for &n in &order {
            if let Node::Internal { hi, lo, .. } = *self.node(n) {
                let _ = writeln!(out, "  n{} -> n{} [style=solid];", ids[&n], ids[&hi]);
                let _ = writeln!(out, "  n{} -> n{} [style=dotted];", ids[&n], ids[&lo]);
            }
        }
        out.push_str("}\n");
        out
    }

    /// One line per root-to-leaf path: `cond ^ cond : leaf`.
    pub fn print_case(&self, f: NodeId) -> String {
        let mut out = String::new();
        let mut conds = Vec::new();
        self.case_rec(f, &mut conds, &mut out);
        out
    }

    fn case_rec(&self, n: NodeId, conds: &mut Vec<String>, out: &mut String) {
        match self.node(n) {
            Node::Terminal(e) => {
                let lhs = if conds.is_empty() {
                    "true".to_string()
                } else {
                    conds.join(" ^ ")
                };
                let _ = writeln!(out, "{} : {}", lhs, self.display_expr(e));
            }
            Node::Internal { dec, hi, lo } => {
                let d = self.decision(*dec);
                conds.push(self.decision_text(d, true));
                self.case_rec(*hi, conds, out);
                conds.pop();
                conds.push(self.decision_text(d, false));
                self.case_rec(*lo, conds, out);
                conds.pop();
            }
        }
    }
}

enum Tree<T> {
    Leaf(LinExpr<T>),
    Branch(Decision<T>, Box<Tree<T>>, Box<Tree<T>>),
}

/// Decisions in first-appearance order with parent → child edges.
struct DecisionOrder<T> {
    decs: Vec<Decision<T>>,
    index: HashMap<(Option<u32>, Option<crate::lp::ExprKey>), usize>,
    edges: Vec<Vec<usize>>,
}

impl<T> Default for DecisionOrder<T> {
    fn default() -> Self {
        DecisionOrder {
            decs: Vec::new(),
            index: HashMap::new(),
            edges: Vec::new(),
        }
    }
}

impl<T: Scalar> DecisionOrder<T> {
    fn index_of(&mut self, d: &Decision<T>) -> usize {
        let key = |d: &Decision<T>| match d {
            Decision::Bool(b) => (Some(b.0), None),
            Decision::Ineq(e) => (None, Some(canonical_key(e))),
        };
        let k = key(d);
        if let Some(&i) = self.index.get(&k) {
            return i;
        }
        self.index.insert(k, self.decs.len());
        self.decs.push(d.clone());
        self.edges.push(Vec::new());
        self.decs.len() - 1
    }

    fn collect(&mut self, t: &Tree<T>, parent: Option<usize>) {
        if let Tree::Branch(d, hi, lo) = t {
            let i = self.index_of(d);
            if let Some(p) = parent {
                if p != i && !self.edges[p].contains(&i) {
                    self.edges[p].push(i);
                }
            }
            self.collect(hi, Some(i));
            self.collect(lo, Some(i));
        }
    }

    /// Kahn's algorithm, smallest first-appearance index first. Cycles (from
    /// hand-written files) fall back to appearance order.
    fn topological(self) -> Vec<Decision<T>> {
        let n = self.decs.len();
        let mut indeg = vec![0usize; n];
        for es in &self.edges {
            for &j in es {
                indeg[j] += 1;
            }
        }
        let mut ready: std::collections::BTreeSet<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut done = vec![false; n];
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let i = match ready.iter().next().copied() {
                Some(i) => i,
                None => (0..n).find(|&i| !done[i]).expect("pending decision"),
            };
            ready.remove(&i);
            if done[i] {
                continue;
            }
            done[i] = true;
            out.push(i);
            for &j in &self.edges[i] {
                indeg[j] = indeg[j].saturating_sub(1);
                if indeg[j] == 0 && !done[j] {
                    ready.insert(j);
                }
            }
        }
        let mut decs: Vec<Option<Decision<T>>> = self.decs.into_iter().map(Some).collect();
        out.into_iter().filter_map(|i| decs[i].take()).collect()
    }
}

fn canonical_key<T: Scalar>(e: &LinExpr<T>) -> crate::lp::ExprKey {
    match DiagramStore::<T>::canonicalize(e) {
        Some((c, _)) => c.key(),
        None => e.key(),
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    Sym(char),
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, XaddError> {
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line_no = ln + 1;
        let line = line.split('#').next().unwrap_or("");
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            if c.is_whitespace() {
                i += 1;
            } else if c.is_ascii_digit() || c == '.' {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_ascii_digit()
                        || chars[i] == '.'
                        || chars[i] == 'e'
                        || chars[i] == 'E'
                        || ((chars[i] == '-' || chars[i] == '+') && matches!(chars[i - 1], 'e' | 'E')))
                {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                let v = s.parse::<f64>().map_err(|_| XaddError::Syntax {
                    line: line_no,
                    msg: format!("bad number `{}`", s),
                })?;
                out.push((Tok::Num(v), line_no));
            } else if c.is_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                    i += 1;
                }
                out.push((Tok::Ident(chars[start..i].iter().collect()), line_no));
            } else if "()[]+-*>=<!".contains(c) {
                out.push((Tok::Sym(c), line_no));
                i += 1;
            } else {
                return Err(XaddError::Syntax {
                    line: line_no,
                    msg: format!("unexpected character `{}`", c),
                });
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn line(&self) -> usize {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map(|t| t.1)
            .unwrap_or(1)
    }

    fn error(&self, msg: &str) -> XaddError {
        XaddError::Syntax {
            line: self.line(),
            msg: msg.to_string(),
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn peek_ident(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(x)) if x == s)
    }

    fn eat_sym(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, c: char) -> Result<(), XaddError> {
        if self.eat_sym(c) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{}`", c)))
        }
    }

    fn ident(&mut self) -> Result<String, XaddError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.error("expected identifier")),
        }
    }

    fn signed_number(&mut self) -> Result<f64, XaddError> {
        let neg = self.eat_sym('-');
        match self.peek() {
            Some(Tok::Num(v)) => {
                let v = *v;
                self.pos += 1;
                Ok(if neg { -v } else { v })
            }
            Some(Tok::Ident(s)) if s == "inf" => {
                self.pos += 1;
                Ok(if neg { f64::NEG_INFINITY } else { f64::INFINITY })
            }
            _ => Err(self.error("expected number")),
        }
    }

    fn node<T: Scalar>(&mut self, store: &DiagramStore<T>) -> Result<Tree<T>, XaddError> {
        if self.eat_sym('[') {
            let e = self.affine(store)?;
            self.expect_sym(']')?;
            return Ok(Tree::Leaf(e));
        }
        self.expect_sym('(')?;
        let dec = self.decision(store)?;
        let hi = self.node(store)?;
        let lo = self.node(store)?;
        self.expect_sym(')')?;
        Ok(Tree::Branch(dec, Box::new(hi), Box::new(lo)))
    }

    fn decision<T: Scalar>(&mut self, store: &DiagramStore<T>) -> Result<Decision<T>, XaddError> {
        if let (Some(Tok::Ident(name)), Some(next)) = (self.peek(), self.toks.get(self.pos + 1)) {
            if matches!(next.0, Tok::Sym('(') | Tok::Sym('[')) {
                if let Some(b) = store.bool_var(name) {
                    self.pos += 1;
                    return Ok(Decision::Bool(b));
                }
                if store.cont_var(name).is_none() {
                    return Err(self.error(&format!("undeclared variable `{}`", name)));
                }
            }
        }
        let e = self.affine(store)?;
        self.expect_sym('>')?;
        match self.peek() {
            Some(Tok::Num(v)) if *v == 0.0 => self.pos += 1,
            _ => return Err(self.error("expected `0` after `>`")),
        }
        Ok(Decision::Ineq(e))
    }

    fn affine<T: Scalar>(&mut self, store: &DiagramStore<T>) -> Result<LinExpr<T>, XaddError> {
        let mut terms: Vec<(VarId, T)> = Vec::new();
        let mut constant = 0.0f64;
        let mut first = true;
        loop {
            let neg = if self.eat_sym('-') {
                true
            } else if first || self.eat_sym('+') {
                false
            } else {
                break;
            };
            first = false;
            let sign = if neg { -1.0 } else { 1.0 };
            match self.peek().cloned() {
                Some(Tok::Num(v)) => {
                    self.pos += 1;
                    if self.eat_sym('*') {
                        let v_id = self.var(store)?;
                        terms.push((v_id, T::lit(sign * v)));
                    } else {
                        constant += sign * v;
                    }
                }
                Some(Tok::Ident(s)) if s == "inf" => {
                    self.pos += 1;
                    constant += sign * f64::INFINITY;
                }
                Some(Tok::Ident(_)) => {
                    let v_id = self.var(store)?;
                    terms.push((v_id, T::lit(sign)));
                }
                _ => return Err(self.error("expected term")),
            }
        }
        Ok(LinExpr::from_terms(terms, T::lit(constant)))
    }

    fn var<T: Scalar>(&mut self, store: &DiagramStore<T>) -> Result<VarId, XaddError> {
        let name = self.ident()?;
        store.cont_var(&name).ok_or_else(|| XaddError::Syntax {
            line: self.line(),
            msg: format!("undeclared variable `{}`", name),
        })
    }
}

/// Variable values keyed by name, as read from user input.
pub fn named_values<T: Scalar>(
    store: &DiagramStore<T>,
    values: &BTreeMap<String, f64>,
) -> Result<super::Assignment<T>, XaddError> {
    let mut a = super::Assignment::new();
    for (k, &v) in values {
        if let Some(x) = store.cont_var(k) {
            a.set_cont(x, T::lit(v));
        } else if let Some(b) = store.bool_var(k) {
            a.set_bool(b, v != 0.0);
        } else {
            return Err(XaddError::UnknownVariable(k.clone()));
        }
    }
    Ok(a)
}
