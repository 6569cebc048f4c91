//! Substitution, boolean restriction and the two marginalization steps of
//! regression.

use std::collections::HashMap;

use crate::lp::{LinExpr, VarId};
use crate::scalar::Scalar;

use super::apply::BinOp;
use super::store::{BoolId, Decision, DiagramStore, Node, NodeId};
use super::XaddError;

/// Simultaneous substitution of several variables in one expression.
pub(crate) fn substitute_expr<T: Scalar>(e: &LinExpr<T>, map: &HashMap<VarId, LinExpr<T>>) -> LinExpr<T> {
    if !e.vars().any(|v| map.contains_key(&v)) {
        return e.clone();
    }
    let mut out = LinExpr::constant(e.constant_term());
    for &(v, c) in e.terms() {
        let t = match map.get(&v) {
            Some(w) => w.scale(c),
            None => LinExpr::term(v, c),
        };
        out = &out + &t;
    }
    out
}

impl<T: Scalar> DiagramStore<T> {
    /// Replace `var` by `e` in every decision and leaf.
    pub fn substitute_cont(&mut self, f: NodeId, var: VarId, e: &LinExpr<T>) -> NodeId {
        let mut map = HashMap::new();
        map.insert(var, e.clone());
        self.substitute_many(f, &map)
    }

    /// Simultaneous substitution; the result is reduced.
    pub fn substitute_many(&mut self, f: NodeId, map: &HashMap<VarId, LinExpr<T>>) -> NodeId {
        let r = self.substitute_raw(f, map);
        if r == f {
            return f;
        }
        self.reduce_lp(r)
    }

    pub(crate) fn substitute_raw(&mut self, f: NodeId, map: &HashMap<VarId, LinExpr<T>>) -> NodeId {
        let support = self.cont_support(f);
        if !map.keys().any(|v| support.contains(v)) {
            return f;
        }
        let mut memo: HashMap<NodeId, NodeId> = HashMap::new();
        for n in self.reachable(f) {
            let r = match self.node(n).clone() {
                Node::Terminal(e) => {
                    let s = substitute_expr(&e, map);
                    self.mk_terminal(s)
                }
                Node::Internal { dec, hi, lo } => {
                    let (h, l) = (memo[&hi], memo[&lo]);
                    match self.decision(dec).clone() {
                        Decision::Ineq(e) if e.vars().any(|v| map.contains_key(&v)) => {
                            let s = substitute_expr(&e, map);
                            self.ite_expr(&s, h, l)
                        }
                        _ => self.ite(dec, h, l),
                    }
                }
            };
            memo.insert(n, r);
        }
        memo[&f]
    }

    /// Replace boolean `from` by `to` throughout.
    pub fn rename_bool(&mut self, f: NodeId, from: BoolId, to: BoolId) -> NodeId {
        if from == to || !self.bool_support(f).contains(&from) {
            return f;
        }
        let target = self.bool_decision(to);
        let mut memo: HashMap<NodeId, NodeId> = HashMap::new();
        for n in self.reachable(f) {
            let r = match *self.node(n) {
                Node::Terminal(_) => n,
                Node::Internal { dec, hi, lo } => {
                    let (h, l) = (memo[&hi], memo[&lo]);
                    match *self.decision(dec) {
                        Decision::Bool(b) if b == from => self.ite(target, h, l),
                        _ => self.ite(dec, h, l),
                    }
                }
            };
            memo.insert(n, r);
        }
        memo[&f]
    }

    /// Fix boolean `b` to `value`.
    pub fn restrict_bool(&mut self, f: NodeId, b: BoolId, value: bool) -> NodeId {
        if !self.bool_support(f).contains(&b) {
            return f;
        }
        let mut memo: HashMap<NodeId, NodeId> = HashMap::new();
        for n in self.reachable(f) {
            let r = match *self.node(n) {
                Node::Terminal(_) => n,
                Node::Internal { dec, hi, lo } => {
                    let (h, l) = (memo[&hi], memo[&lo]);
                    match *self.decision(dec) {
                        Decision::Bool(c) if c == b => {
                            if value {
                                h
                            } else {
                                l
                            }
                        }
                        _ => self.ite(dec, h, l),
                    }
                }
            };
            memo.insert(n, r);
        }
        memo[&f]
    }

    /// `∫ q · δ[next − ple] d next`: each case of `ple` substitutes its leaf
    /// for `next` in `q`, guarded by the case's conditions.
    pub fn integrate_dirac(&mut self, q: NodeId, next: VarId, ple: NodeId) -> NodeId {
        if !self.cont_support(q).contains(&next) {
            return q;
        }
        let mut memo: HashMap<NodeId, NodeId> = HashMap::new();
        for n in self.reachable(ple) {
            let r = match self.node(n).clone() {
                Node::Terminal(e) => {
                    let mut map = HashMap::new();
                    map.insert(next, e);
                    self.substitute_raw(q, &map)
                }
                Node::Internal { dec, hi, lo } => {
                    let (h, l) = (memo[&hi], memo[&lo]);
                    self.ite(dec, h, l)
                }
            };
            memo.insert(n, r);
        }
        let r = memo[&ple];
        self.reduce_lp(r)
    }

    /// `q|b=1 · P + q|b=0 · (1 − P)` for a piecewise-constant probability.
    pub fn marginalize_bool(&mut self, q: NodeId, b: BoolId, prob: NodeId) -> Result<NodeId, XaddError> {
        let tol = T::lit(1e-9);
        for t in self.terminals(prob) {
            let e = self.terminal_expr(t).expect("terminal");
            match e.as_constant() {
                Some(p) if p >= -tol && p <= T::one() + tol => {}
                Some(p) => {
                    return Err(XaddError::InvalidProbability(format!(
                        "P({}) = {} is outside [0, 1]",
                        self.bool_name(b),
                        p
                    )))
                }
                None => {
                    return Err(XaddError::InvalidProbability(format!(
                        "P({}) = {} is not constant",
                        self.bool_name(b),
                        self.display_expr(e)
                    )))
                }
            }
        }
        if !self.bool_support(q).contains(&b) {
            return Ok(q);
        }
        let q1 = self.restrict_bool(q, b, true);
        let q0 = self.restrict_bool(q, b, false);
        if let Some(p) = self.terminal_expr(prob).and_then(|e| e.as_constant()) {
            if p >= T::one() {
                return Ok(q1);
            }
            if p <= T::zero() {
                return Ok(q0);
            }
        }
        let one = self.one();
        let not_p = self.apply_raw(one, prob, BinOp::Sub)?;
        let a = self.apply_raw(q1, prob, BinOp::Mul)?;
        let c = self.apply_raw(q0, not_p, BinOp::Mul)?;
        let r = self.apply_raw(a, c, BinOp::Add)?;
        Ok(self.reduce_lp(r))
    }
}
