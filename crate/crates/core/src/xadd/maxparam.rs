//! Exact maximization of a diagram over one bounded continuous parameter.

use std::collections::HashMap;

use crate::lp::{LinExpr, VarId};
use crate::scalar::Scalar;

use super::apply::BinOp;
use super::store::{DiagramStore, NodeId};
use super::XaddError;

/// Per-path data after splitting constraints on the parameter.
struct Section<T> {
    lower: Vec<LinExpr<T>>,
    upper: Vec<LinExpr<T>>,
}

impl<T: Scalar> DiagramStore<T> {
    /// `max_{y ∈ [lo, hi]} q`, with `y` eliminated.
    ///
    /// On every path the leaf is linear in `y`, so the maximum sits at the
    /// tightest bound on the side its slope points to. Each candidate bound is
    /// substituted and guarded by the conditions that make it binding; all
    /// candidates are folded with max.
    pub fn max_param(&mut self, q: NodeId, y: VarId, lo: T, hi: T) -> Result<NodeId, XaddError> {
        if !self.cont_support(q).contains(&y) {
            return Ok(q);
        }
        let ninf = self.neg_infinity();
        let mut candidates: Vec<NodeId> = Vec::new();
        for path in self.paths(q) {
            let leaf = self.terminal_expr(path.leaf).cloned().unwrap_or_default();
            if leaf.is_infinite() && leaf.constant_term() < T::zero() {
                continue;
            }
            let mut sec = Section {
                lower: vec![LinExpr::constant(lo)],
                upper: vec![LinExpr::constant(hi)],
            };
            let mut free_decs = Vec::new();
            for &(d, v) in &path.ineqs {
                let c = self.branch_constraint(d, v);
                let a = c.expr.coeff(y);
                if a == T::zero() {
                    free_decs.push((d, v));
                    continue;
                }
                // a*y + rest >= 0
                let rest = c.expr.substitute(y, &LinExpr::zero());
                let bound = rest.scale(-T::one() / a);
                if a > T::zero() {
                    sec.lower.push(bound);
                } else {
                    sec.upper.push(bound);
                }
            }
            let slope = leaf.coeff(y);
            let mut values: Vec<(LinExpr<T>, Vec<LinExpr<T>>)> = Vec::new();
            if slope == T::zero() {
                let mut guards = Vec::new();
                for l in &sec.lower {
                    for u in &sec.upper {
                        guards.push(u - l);
                    }
                }
                values.push((leaf.clone(), guards));
            } else {
                let (binding, others, opposite) = if slope > T::zero() {
                    (&sec.upper, &sec.upper, &sec.lower)
                } else {
                    (&sec.lower, &sec.lower, &sec.upper)
                };
                for (k, b) in binding.iter().enumerate() {
                    let mut guards = Vec::new();
                    for (j, o) in others.iter().enumerate() {
                        if j != k {
                            // b is the tightest bound on this side
                            guards.push(if slope > T::zero() { o - b } else { b - o });
                        }
                    }
                    for o in opposite {
                        guards.push(if slope > T::zero() { b - o } else { o - b });
                    }
                    values.push((leaf.substitute(y, b), guards));
                }
            }
            for (value, guards) in values {
                let mut node = self.mk_terminal(value);
                for g in &guards {
                    node = self.ite_expr_ge(g, node, ninf);
                }
                for &(d, v) in &free_decs {
                    node = if v {
                        self.ite(d, node, ninf)
                    } else {
                        self.ite(d, ninf, node)
                    };
                }
                for &(b, v) in &path.bools {
                    node = if v {
                        self.ite_bool(b, node, ninf)
                    } else {
                        self.ite_bool(b, ninf, node)
                    };
                }
                let node = self.reduce_lp(node);
                if node != ninf {
                    candidates.push(node);
                }
            }
        }
        let r = self.fold_max(candidates)?;
        Ok(self.fill_neg_infinity(r))
    }

    /// Balanced pairwise max.
    fn fold_max(&mut self, mut nodes: Vec<NodeId>) -> Result<NodeId, XaddError> {
        if nodes.is_empty() {
            return Ok(self.neg_infinity());
        }
        nodes.sort_unstable();
        nodes.dedup();
        while nodes.len() > 1 {
            let mut next = Vec::with_capacity(nodes.len() / 2 + 1);
            for pair in nodes.chunks(2) {
                next.push(match pair {
                    [a, b] => self.apply(*a, *b, BinOp::Max)?,
                    [a] => *a,
                    _ => unreachable!(),
                });
            }
            nodes = next;
        }
        Ok(nodes[0])
    }

    /// Remove `-inf` leaves that survive only on measure-zero slivers by
    /// collapsing their parent onto the sibling.
    fn fill_neg_infinity(&mut self, f: NodeId) -> NodeId {
        if !self.has_infinite_leaf(f) {
            return f;
        }
        let ninf = self.neg_infinity();
        let mut memo: HashMap<NodeId, NodeId> = HashMap::new();
        for n in self.reachable(f) {
            let r = match *self.node(n) {
                super::Node::Terminal(_) => n,
                super::Node::Internal { dec, hi, lo } => {
                    let (h, l) = (memo[&hi], memo[&lo]);
                    if h == ninf {
                        l
                    } else if l == ninf {
                        h
                    } else {
                        self.ite(dec, h, l)
                    }
                }
            };
            memo.insert(n, r);
        }
        memo[&f]
    }
}
