//! Binary apply over two diagrams with memoization.

use crate::lp::LinExpr;
use crate::scalar::Scalar;

use super::store::{ApplyOp, DiagramStore, Node, NodeId, Test};
use super::XaddError;

/// Pointwise binary operation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    /// Product; at least one side must be constant wherever leaves meet.
    Mul,
    Max,
    Min,
}

impl From<BinOp> for ApplyOp {
    fn from(op: BinOp) -> Self {
        match op {
            BinOp::Add => ApplyOp::Add,
            BinOp::Sub => ApplyOp::Sub,
            BinOp::Mul => ApplyOp::Mul,
            BinOp::Max => ApplyOp::Max,
            BinOp::Min => ApplyOp::Min,
        }
    }
}

impl BinOp {
    fn commutative(self) -> bool {
        !matches!(self, BinOp::Sub)
    }

    pub fn eval<T: Scalar>(self, a: T, b: T) -> T {
        match self {
            BinOp::Add => a + b,
            BinOp::Sub => a - b,
            BinOp::Mul => a * b,
            BinOp::Max => a.max(b),
            BinOp::Min => a.min(b),
        }
    }
}

impl<T: Scalar> DiagramStore<T> {
    /// `op(f, g)` followed by LP-based path pruning.
    pub fn apply(&mut self, f: NodeId, g: NodeId, op: BinOp) -> Result<NodeId, XaddError> {
        let r = self.apply_raw(f, g, op)?;
        Ok(self.reduce_lp(r))
    }

    /// `op(f, g)` without the pruning pass.
    pub fn apply_raw(&mut self, f: NodeId, g: NodeId, op: BinOp) -> Result<NodeId, XaddError> {
        let (f, g) = if op.commutative() && g < f { (g, f) } else { (f, g) };
        let key = (ApplyOp::from(op), f, g);
        if let Some(&r) = self.apply_cache.get(&key) {
            return Ok(r);
        }
        let r = match (self.node(f).clone(), self.node(g).clone()) {
            (Node::Terminal(a), Node::Terminal(b)) => self.terminal_op(f, &a, g, &b, op)?,
            _ => {
                let top = super::store::DecId(self.order(f).min(self.order(g)));
                let (fh, fl) = (self.cofactor(f, top, true), self.cofactor(f, top, false));
                let (gh, gl) = (self.cofactor(g, top, true), self.cofactor(g, top, false));
                let h = self.apply_raw(fh, gh, op)?;
                let l = self.apply_raw(fl, gl, op)?;
                self.ite(top, h, l)
            }
        };
        self.apply_cache.insert(key, r);
        Ok(r)
    }

    fn terminal_op(
        &mut self,
        fid: NodeId,
        a: &LinExpr<T>,
        gid: NodeId,
        b: &LinExpr<T>,
        op: BinOp,
    ) -> Result<NodeId, XaddError> {
        let ninf = |e: &LinExpr<T>| e.as_constant() == Some(T::neg_infinity());
        Ok(match op {
            BinOp::Add => self.mk_terminal(a + b),
            BinOp::Sub => self.mk_terminal(a - b),
            BinOp::Mul => match (a.as_constant(), b.as_constant()) {
                (Some(k), _) => self.mk_terminal(b.scale(k)),
                (_, Some(k)) => self.mk_terminal(a.scale(k)),
                _ => return Err(XaddError::NonLinearResult),
            },
            BinOp::Max | BinOp::Min => {
                let is_max = op == BinOp::Max;
                if ninf(a) {
                    return Ok(if is_max { gid } else { fid });
                }
                if ninf(b) {
                    return Ok(if is_max { fid } else { gid });
                }
                let diff = a - b;
                // a - b > 0 picks a for max, b for min
                let (when_pos, when_not) = if is_max { (fid, gid) } else { (gid, fid) };
                match self.ineq_decision(&diff) {
                    Test::Const(true) => when_pos,
                    Test::Const(false) => when_not,
                    Test::Dec { id, negated: false } => self.ite(id, when_pos, when_not),
                    Test::Dec { id, negated: true } => self.ite(id, when_not, when_pos),
                }
            }
        })
    }

    /// `k * f`.
    pub fn scale(&mut self, f: NodeId, k: T) -> NodeId {
        let c = self.constant(k);
        self.apply_raw(f, c, BinOp::Mul)
            .expect("scaling by a constant is linear")
    }

    pub fn negate(&mut self, f: NodeId) -> NodeId {
        self.scale(f, -T::one())
    }

    /// Rebuild `f` with every leaf mapped through `map`.
    pub fn map_leaves(&mut self, f: NodeId, map: &mut dyn FnMut(&LinExpr<T>) -> LinExpr<T>) -> NodeId {
        let mut memo = std::collections::HashMap::new();
        for n in self.reachable(f) {
            let r = match self.node(n).clone() {
                Node::Terminal(e) => {
                    let m = map(&e);
                    self.mk_terminal(m)
                }
                Node::Internal { dec, hi, lo } => {
                    let (h, l) = (memo[&hi], memo[&lo]);
                    self.intern_internal(dec, h, l)
                }
            };
            memo.insert(n, r);
        }
        memo[&f]
    }
}
