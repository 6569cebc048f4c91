//! Path feasibility, LP-based pruning and partition enumeration.

use std::collections::{BTreeSet, HashMap};

use crate::lp::{self, Constraint, LinExpr, Polytope, VarId};
use crate::scalar::Scalar;

use super::store::{BoolId, DecId, Decision, DiagramStore, Node, NodeId};
use super::XaddError;

/// One root-to-leaf path.
#[derive(Clone, Debug)]
pub struct Path {
    pub bools: Vec<(BoolId, bool)>,
    pub ineqs: Vec<(DecId, bool)>,
    pub leaf: NodeId,
}

/// A feasible path region: boolean assignment plus polytope.
#[derive(Clone, Debug)]
pub struct Region<T> {
    pub bools: Vec<(BoolId, bool)>,
    pub polytope: Polytope<T>,
}

/// All feasible regions on which one leaf is valid.
#[derive(Clone, Debug)]
pub struct CasePartition<T> {
    pub leaf_node: NodeId,
    pub leaf: LinExpr<T>,
    pub regions: Vec<Region<T>>,
}

type ReduceMemo = HashMap<(NodeId, Vec<(DecId, bool)>), NodeId>;

impl<T: Scalar> DiagramStore<T> {
    /// Constraint for taking branch `value` of decision `d`.
    pub(crate) fn branch_constraint(&self, d: DecId, value: bool) -> Constraint<T> {
        match self.decision(d) {
            Decision::Ineq(e) => {
                if value {
                    Constraint::gt(e.clone())
                } else {
                    Constraint::ge(-e)
                }
            }
            Decision::Bool(_) => panic!("boolean decision has no linear constraint"),
        }
    }

    /// Polytope of a set of branch choices, boxed over their variables plus
    /// `extra`.
    pub fn path_polytope<I>(&self, ineqs: &[(DecId, bool)], extra: I) -> Polytope<T>
    where
        I: IntoIterator<Item = VarId>,
    {
        let mut vars: BTreeSet<VarId> = extra.into_iter().collect();
        let mut p = Polytope::new(Default::default());
        for &(d, v) in ineqs {
            let c = self.branch_constraint(d, v);
            vars.extend(c.expr.vars());
            p.push(c);
        }
        p.bounds = self.box_of(vars);
        p
    }

    /// Range of `e` over the declared box.
    fn box_range(&self, e: &LinExpr<T>) -> (T, T) {
        let mut lo = e.constant_term();
        let mut hi = lo;
        for &(v, c) in e.terms() {
            let (a, b) = self.bounds(v);
            if c > T::zero() {
                lo = lo + c * a;
                hi = hi + c * b;
            } else {
                lo = lo + c * b;
                hi = hi + c * a;
            }
        }
        (lo, hi)
    }

    /// Whether `path` (assumed to have interior) extended by `step` still has
    /// interior.
    pub(crate) fn extend_feasible(&mut self, path: &[(DecId, bool)], step: (DecId, bool)) -> bool {
        let e = match self.decision(step.0) {
            Decision::Ineq(e) => e.clone(),
            Decision::Bool(_) => return true,
        };
        let (lo, hi) = self.box_range(&e);
        let tol = T::feas_tol();
        let side_possible = if step.1 { hi > tol } else { lo < -tol };
        if !side_possible {
            return false;
        }
        let side_implied = if step.1 { lo > tol } else { hi < -tol };
        if side_implied || path.is_empty() {
            return true;
        }
        let mut key: Vec<(DecId, bool)> = path.to_vec();
        key.push(step);
        key.sort_unstable();
        key.dedup();
        if let Some(&r) = self.feas_cache.get(&key) {
            return r;
        }
        let poly = self.path_polytope(&key, std::iter::empty());
        self.lp_calls += 1;
        let r = lp::has_interior(&poly);
        self.feas_cache.insert(key, r);
        r
    }

    /// Prune paths whose region has empty interior and collapse implied
    /// decisions. Semantics on the box are unchanged up to measure zero.
    pub fn reduce_lp(&mut self, f: NodeId) -> NodeId {
        if let Some(&r) = self.reduce_cache.get(&f) {
            return r;
        }
        let mut memo = ReduceMemo::new();
        let mut path = Vec::new();
        let r = self.reduce_rec(f, &mut path, &mut memo);
        self.reduce_cache.insert(f, r);
        self.reduce_cache.insert(r, r);
        r
    }

    fn reduce_rec(&mut self, n: NodeId, path: &mut Vec<(DecId, bool)>, memo: &mut ReduceMemo) -> NodeId {
        let (dec, hi, lo) = match *self.node(n) {
            Node::Terminal(_) => return n,
            Node::Internal { dec, hi, lo } => (dec, hi, lo),
        };
        let key = (n, path.clone());
        if let Some(&r) = memo.get(&key) {
            return r;
        }
        let r = match self.decision(dec) {
            Decision::Bool(_) => {
                let h = self.reduce_rec(hi, path, memo);
                let l = self.reduce_rec(lo, path, memo);
                self.intern_internal(dec, h, l)
            }
            Decision::Ineq(_) => {
                let t_ok = self.extend_feasible(path, (dec, true));
                let f_ok = self.extend_feasible(path, (dec, false));
                match (t_ok, f_ok) {
                    (true, false) => self.reduce_rec(hi, path, memo),
                    (false, true) => self.reduce_rec(lo, path, memo),
                    _ => {
                        path.push((dec, true));
                        let h = self.reduce_rec(hi, path, memo);
                        path.pop();
                        path.push((dec, false));
                        let l = self.reduce_rec(lo, path, memo);
                        path.pop();
                        self.intern_internal(dec, h, l)
                    }
                }
            }
        };
        memo.insert(key, r);
        r
    }

    /// All root-to-leaf paths with interior, without grouping.
    pub fn paths(&mut self, f: NodeId) -> Vec<Path> {
        let mut out = Vec::new();
        let mut bools = Vec::new();
        let mut ineqs = Vec::new();
        self.paths_rec(f, &mut bools, &mut ineqs, &mut out);
        out
    }

    fn paths_rec(
        &mut self,
        n: NodeId,
        bools: &mut Vec<(BoolId, bool)>,
        ineqs: &mut Vec<(DecId, bool)>,
        out: &mut Vec<Path>,
    ) {
        let (dec, hi, lo) = match *self.node(n) {
            Node::Terminal(_) => {
                out.push(Path {
                    bools: bools.clone(),
                    ineqs: ineqs.clone(),
                    leaf: n,
                });
                return;
            }
            Node::Internal { dec, hi, lo } => (dec, hi, lo),
        };
        match *self.decision(dec) {
            Decision::Bool(b) => {
                for (v, child) in [(true, hi), (false, lo)] {
                    bools.push((b, v));
                    self.paths_rec(child, bools, ineqs, out);
                    bools.pop();
                }
            }
            Decision::Ineq(_) => {
                for (v, child) in [(true, hi), (false, lo)] {
                    if self.extend_feasible(ineqs, (dec, v)) {
                        ineqs.push((dec, v));
                        self.paths_rec(child, bools, ineqs, out);
                        ineqs.pop();
                    }
                }
            }
        }
    }

    /// Feasible regions grouped by leaf, each boxed over the support of `f`.
    pub fn enumerate_partitions(&mut self, f: NodeId) -> Vec<CasePartition<T>> {
        let support = self.cont_support(f);
        self.enumerate_partitions_over(f, &support)
    }

    pub fn enumerate_partitions_over(&mut self, f: NodeId, vars: &BTreeSet<VarId>) -> Vec<CasePartition<T>> {
        let mut out: Vec<CasePartition<T>> = Vec::new();
        let mut index: HashMap<NodeId, usize> = HashMap::new();
        for p in self.paths(f) {
            let poly = self.path_polytope(&p.ineqs, vars.iter().copied());
            let region = Region {
                bools: p.bools,
                polytope: poly,
            };
            match index.get(&p.leaf) {
                Some(&i) => out[i].regions.push(region),
                None => {
                    index.insert(p.leaf, out.len());
                    out.push(CasePartition {
                        leaf_node: p.leaf,
                        leaf: self.terminal_expr(p.leaf).cloned().unwrap_or_default(),
                        regions: vec![region],
                    });
                }
            }
        }
        out
    }

    /// Max over the box and all boolean assignments of `|f - g|`.
    pub fn max_abs_diff(&mut self, f: NodeId, g: NodeId) -> Result<T, XaddError> {
        if f == g {
            return Ok(T::zero());
        }
        let d = self.apply(f, g, super::BinOp::Sub)?;
        self.max_abs(d)
    }

    /// Max of `|f|` over the box and all boolean assignments.
    pub fn max_abs(&mut self, f: NodeId) -> Result<T, XaddError> {
        let mut best = T::zero();
        for p in self.paths(f) {
            let leaf = self.terminal_expr(p.leaf).cloned().unwrap_or_default();
            if let Some(c) = leaf.as_constant() {
                best = best.max(c.abs());
                continue;
            }
            let poly = self.path_polytope(&p.ineqs, leaf.vars());
            for e in [leaf.clone(), -&leaf] {
                match lp::maximize_over(&e, &poly) {
                    Ok((_, v)) => best = best.max(v),
                    // measure-zero leftovers
                    Err(lp::LpError::InfeasibleRegion) => {}
                    Err(e) => return Err(XaddError::Lp(e)),
                }
            }
        }
        Ok(best)
    }
}
