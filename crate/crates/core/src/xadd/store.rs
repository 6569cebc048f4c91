use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::lp::{ExprKey, LinExpr, VarId};
use crate::scalar::Scalar;

use super::XaddError;

/// Handle to a node inside one [`DiagramStore`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub(crate) u32);

/// Identifier of a declared boolean variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BoolId(pub u32);

/// Decision identifier; doubles as the decision's position in the order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DecId(pub(crate) u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl DecId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A decision test. `Ineq(e)` reads `e > 0` with `e` in canonical form.
#[derive(Clone, Debug, PartialEq)]
pub enum Decision<T> {
    Bool(BoolId),
    Ineq(LinExpr<T>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Node<T> {
    Terminal(LinExpr<T>),
    Internal { dec: DecId, hi: NodeId, lo: NodeId },
}

/// Result of turning an arbitrary `expr > 0` into a stored decision.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Test {
    /// The expression is constant; the test is decided.
    Const(bool),
    /// `expr > 0` holds iff decision `id` is true (`negated == false`) or
    /// false (`negated == true`), boundaries aside.
    Dec { id: DecId, negated: bool },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum DecKey {
    Bool(u32),
    Ineq(ExprKey),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum NodeKey {
    Terminal(ExprKey),
    Internal(DecId, NodeId, NodeId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub(crate) enum ApplyOp {
    Add,
    Sub,
    Mul,
    Max,
    Min,
}

#[derive(Clone, Debug)]
pub struct ContVar<T> {
    pub name: String,
    pub lo: T,
    pub hi: T,
}

/// Hash-consed store of linear XADD nodes over declared variables.
///
/// Node ids stay valid for the store's lifetime; nothing is ever collected.
/// Decisions are ordered by creation: a decision created later sits lower
/// in every diagram.
#[derive(Clone, Debug)]
pub struct DiagramStore<T: Scalar = f64> {
    pub(crate) cvars: Vec<ContVar<T>>,
    cvar_index: HashMap<String, VarId>,
    pub(crate) bvars: Vec<String>,
    bvar_index: HashMap<String, BoolId>,
    pub(crate) decisions: Vec<Decision<T>>,
    dec_index: HashMap<DecKey, DecId>,
    pub(crate) nodes: Vec<Node<T>>,
    unique: HashMap<NodeKey, NodeId>,
    pub(crate) apply_cache: HashMap<(ApplyOp, NodeId, NodeId), NodeId>,
    ite_cache: HashMap<(DecId, NodeId, NodeId), NodeId>,
    pub(crate) reduce_cache: HashMap<NodeId, NodeId>,
    pub(crate) feas_cache: HashMap<Vec<(DecId, bool)>, bool>,
    pub(crate) lp_calls: u64,
}

impl<T: Scalar> Default for DiagramStore<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> DiagramStore<T> {
    pub fn new() -> Self {
        DiagramStore {
            cvars: Vec::new(),
            cvar_index: HashMap::new(),
            bvars: Vec::new(),
            bvar_index: HashMap::new(),
            decisions: Vec::new(),
            dec_index: HashMap::new(),
            nodes: Vec::new(),
            unique: HashMap::new(),
            apply_cache: HashMap::new(),
            ite_cache: HashMap::new(),
            reduce_cache: HashMap::new(),
            feas_cache: HashMap::new(),
            lp_calls: 0,
        }
    }

    // ---- variables ----

    /// Declare a continuous variable with a finite box, or return the
    /// existing id if the name is known with identical bounds.
    pub fn declare_cont(&mut self, name: &str, lo: T, hi: T) -> Result<VarId, XaddError> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(XaddError::UnboundedVariable(name.to_string()));
        }
        if let Some(&v) = self.cvar_index.get(name) {
            let cv = &self.cvars[v.index()];
            if cv.lo != lo || cv.hi != hi {
                return Err(XaddError::ConflictingBounds(name.to_string()));
            }
            return Ok(v);
        }
        let id = VarId(self.cvars.len() as u32);
        self.cvars.push(ContVar {
            name: name.to_string(),
            lo,
            hi,
        });
        self.cvar_index.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn declare_bool(&mut self, name: &str) -> BoolId {
        if let Some(&b) = self.bvar_index.get(name) {
            return b;
        }
        let id = BoolId(self.bvars.len() as u32);
        self.bvars.push(name.to_string());
        self.bvar_index.insert(name.to_string(), id);
        id
    }

    pub fn cont_var(&self, name: &str) -> Option<VarId> {
        self.cvar_index.get(name).copied()
    }

    pub fn bool_var(&self, name: &str) -> Option<BoolId> {
        self.bvar_index.get(name).copied()
    }

    pub fn cont_vars(&self) -> &[ContVar<T>] {
        &self.cvars
    }

    pub fn bool_vars(&self) -> &[String] {
        &self.bvars
    }

    pub fn var_name(&self, v: VarId) -> &str {
        &self.cvars[v.index()].name
    }

    pub fn bool_name(&self, b: BoolId) -> &str {
        &self.bvars[b.0 as usize]
    }

    pub fn bounds(&self, v: VarId) -> (T, T) {
        let c = &self.cvars[v.index()];
        (c.lo, c.hi)
    }

    pub fn box_of<I: IntoIterator<Item = VarId>>(&self, vars: I) -> BTreeMap<VarId, (T, T)> {
        vars.into_iter().map(|v| (v, self.bounds(v))).collect()
    }

    pub fn display_expr(&self, e: &LinExpr<T>) -> String {
        e.display_with(|v| self.var_name(v).to_string()).to_string()
    }

    // ---- decisions ----

    pub fn decision(&self, d: DecId) -> &Decision<T> {
        &self.decisions[d.index()]
    }

    pub fn num_decisions(&self) -> usize {
        self.decisions.len()
    }

    fn intern_decision(&mut self, key: DecKey, d: Decision<T>) -> DecId {
        if let Some(&id) = self.dec_index.get(&key) {
            return id;
        }
        let id = DecId(self.decisions.len() as u32);
        self.decisions.push(d);
        self.dec_index.insert(key, id);
        id
    }

    pub fn bool_decision(&mut self, b: BoolId) -> DecId {
        self.intern_decision(DecKey::Bool(b.0), Decision::Bool(b))
    }

    /// Canonical form of `expr > 0`: variable coefficients scaled so the
    /// largest magnitude is 1 and the first is positive.
    pub fn canonicalize(expr: &LinExpr<T>) -> Option<(LinExpr<T>, bool)> {
        let m = expr.max_abs_coeff();
        if expr.is_constant() || m <= T::zero() {
            return None;
        }
        let lead = expr.terms()[0].1;
        let negated = lead < T::zero();
        let k = if negated { -m } else { m };
        // c / |c| is exact, so the pivot lands on +-1
        Some((expr.divide(k), negated))
    }

    /// Intern the decision for `expr > 0`.
    pub fn ineq_decision(&mut self, expr: &LinExpr<T>) -> Test {
        match Self::canonicalize(expr) {
            None => Test::Const(expr.constant_term() > T::zero()),
            Some((canon, negated)) => {
                let id = self.intern_decision(DecKey::Ineq(canon.key()), Decision::Ineq(canon));
                Test::Dec { id, negated }
            }
        }
    }

    /// Pre-register a canonical decision so it receives the next order slot.
    pub(crate) fn register_decision(&mut self, d: Decision<T>) -> DecId {
        match d {
            Decision::Bool(b) => self.bool_decision(b),
            Decision::Ineq(e) => match self.ineq_decision(&e) {
                Test::Dec { id, .. } => id,
                Test::Const(_) => unreachable!("registered constant decision"),
            },
        }
    }

    // ---- nodes ----

    pub fn node(&self, n: NodeId) -> &Node<T> {
        &self.nodes[n.index()]
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Position of the node's root decision; terminals sort last.
    pub(crate) fn order(&self, n: NodeId) -> u32 {
        match self.nodes[n.index()] {
            Node::Terminal(_) => u32::MAX,
            Node::Internal { dec, .. } => dec.0,
        }
    }

    pub fn is_terminal(&self, n: NodeId) -> bool {
        matches!(self.nodes[n.index()], Node::Terminal(_))
    }

    pub fn terminal_expr(&self, n: NodeId) -> Option<&LinExpr<T>> {
        match &self.nodes[n.index()] {
            Node::Terminal(e) => Some(e),
            Node::Internal { .. } => None,
        }
    }

    pub fn mk_terminal(&mut self, expr: LinExpr<T>) -> NodeId {
        let key = NodeKey::Terminal(expr.key());
        if let Some(&id) = self.unique.get(&key) {
            return id;
        }
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(Node::Terminal(expr));
        self.unique.insert(key, id);
        id
    }

    pub fn constant(&mut self, c: T) -> NodeId {
        self.mk_terminal(LinExpr::constant(c))
    }

    pub fn zero(&mut self) -> NodeId {
        self.constant(T::zero())
    }

    pub fn one(&mut self) -> NodeId {
        self.constant(T::one())
    }

    pub fn neg_infinity(&mut self) -> NodeId {
        self.constant(T::neg_infinity())
    }

    pub fn var_node(&mut self, v: VarId) -> NodeId {
        self.mk_terminal(LinExpr::var(v))
    }

    /// Interned internal node; `hi == lo` collapses to the child.
    pub fn mk_internal(&mut self, dec: DecId, hi: NodeId, lo: NodeId) -> Result<NodeId, XaddError> {
        if hi == lo {
            return Ok(hi);
        }
        if dec.0 >= self.order(hi) || dec.0 >= self.order(lo) {
            return Err(XaddError::OrderingViolation);
        }
        Ok(self.intern_internal(dec, hi, lo))
    }

    pub(crate) fn intern_internal(&mut self, dec: DecId, hi: NodeId, lo: NodeId) -> NodeId {
        if hi == lo {
            return hi;
        }
        debug_assert!(dec.0 < self.order(hi) && dec.0 < self.order(lo));
        let key = NodeKey::Internal(dec, hi, lo);
        if let Some(&id) = self.unique.get(&key) {
            return id;
        }
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(Node::Internal { dec, hi, lo });
        self.unique.insert(key, id);
        id
    }

    /// Cofactor of `n` on decision `d`, valid when `d <= order(n)`.
    pub(crate) fn cofactor(&self, n: NodeId, d: DecId, value: bool) -> NodeId {
        match self.nodes[n.index()] {
            Node::Internal { dec, hi, lo } if dec == d => {
                if value {
                    hi
                } else {
                    lo
                }
            }
            _ => n,
        }
    }

    /// `if d then hi else lo` for arbitrary children, restoring the order.
    pub fn ite(&mut self, d: DecId, hi: NodeId, lo: NodeId) -> NodeId {
        if hi == lo {
            return hi;
        }
        let (oh, ol) = (self.order(hi), self.order(lo));
        if d.0 < oh && d.0 < ol {
            return self.intern_internal(d, hi, lo);
        }
        if let Some(&r) = self.ite_cache.get(&(d, hi, lo)) {
            return r;
        }
        let top = DecId(oh.min(ol));
        let r = if top == d {
            let h = self.cofactor(hi, d, true);
            let l = self.cofactor(lo, d, false);
            self.ite(d, h, l)
        } else {
            let (hh, hl) = (self.cofactor(hi, top, true), self.cofactor(hi, top, false));
            let (lh, ll) = (self.cofactor(lo, top, true), self.cofactor(lo, top, false));
            let t = self.ite(d, hh, lh);
            let f = self.ite(d, hl, ll);
            self.ite(top, t, f)
        };
        self.ite_cache.insert((d, hi, lo), r);
        r
    }

    /// `if expr > 0 then hi else lo`.
    pub fn ite_expr(&mut self, expr: &LinExpr<T>, hi: NodeId, lo: NodeId) -> NodeId {
        match self.ineq_decision(expr) {
            Test::Const(true) => hi,
            Test::Const(false) => lo,
            Test::Dec { id, negated: false } => self.ite(id, hi, lo),
            Test::Dec { id, negated: true } => self.ite(id, lo, hi),
        }
    }

    /// `if expr >= 0 then hi else lo` (differs from [`Self::ite_expr`] only on
    /// the boundary `expr = 0`).
    pub fn ite_expr_ge(&mut self, expr: &LinExpr<T>, hi: NodeId, lo: NodeId) -> NodeId {
        let neg = -expr;
        self.ite_expr(&neg, lo, hi)
    }

    pub fn ite_bool(&mut self, b: BoolId, hi: NodeId, lo: NodeId) -> NodeId {
        let d = self.bool_decision(b);
        self.ite(d, hi, lo)
    }

    // ---- traversal ----

    /// Nodes reachable from `f`, each listed once, children before parents.
    pub fn reachable(&self, f: NodeId) -> Vec<NodeId> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        let mut stack = vec![(f, false)];
        while let Some((n, expanded)) = stack.pop() {
            if expanded {
                out.push(n);
                continue;
            }
            if !seen.insert(n) {
                continue;
            }
            stack.push((n, true));
            if let Node::Internal { hi, lo, .. } = self.nodes[n.index()] {
                stack.push((lo, false));
                stack.push((hi, false));
            }
        }
        out
    }

    pub fn node_count(&self, f: NodeId) -> usize {
        self.reachable(f).len()
    }

    pub fn terminals(&self, f: NodeId) -> Vec<NodeId> {
        self.reachable(f).into_iter().filter(|&n| self.is_terminal(n)).collect()
    }

    /// Continuous variables mentioned anywhere in `f`.
    pub fn cont_support(&self, f: NodeId) -> BTreeSet<VarId> {
        let mut out = BTreeSet::new();
        for n in self.reachable(f) {
            match &self.nodes[n.index()] {
                Node::Terminal(e) => out.extend(e.vars()),
                Node::Internal { dec, .. } => {
                    if let Decision::Ineq(e) = &self.decisions[dec.index()] {
                        out.extend(e.vars());
                    }
                }
            }
        }
        out
    }

    pub fn bool_support(&self, f: NodeId) -> BTreeSet<BoolId> {
        let mut out = BTreeSet::new();
        for n in self.reachable(f) {
            if let Node::Internal { dec, .. } = self.nodes[n.index()] {
                if let Decision::Bool(b) = self.decisions[dec.index()] {
                    out.insert(b);
                }
            }
        }
        out
    }

    /// Evaluate by walking from the root. `x > 0` decisions are strict.
    pub fn evaluate(&self, f: NodeId, assign: &Assignment<T>) -> Result<T, XaddError> {
        let mut n = f;
        loop {
            match &self.nodes[n.index()] {
                Node::Terminal(e) => {
                    let mut err = None;
                    let v = e.eval(|v| match assign.cont(v) {
                        Some(x) => x,
                        None => {
                            err = Some(v);
                            T::zero()
                        }
                    });
                    if let Some(v) = err {
                        return Err(XaddError::UnassignedVariable(self.var_name(v).to_string()));
                    }
                    return Ok(v);
                }
                Node::Internal { dec, hi, lo } => {
                    let taken = match &self.decisions[dec.index()] {
                        Decision::Bool(b) => assign
                            .boolean(*b)
                            .ok_or_else(|| XaddError::UnassignedVariable(self.bool_name(*b).to_string()))?,
                        Decision::Ineq(e) => {
                            let mut err = None;
                            let v = e.eval(|v| match assign.cont(v) {
                                Some(x) => x,
                                None => {
                                    err = Some(v);
                                    T::zero()
                                }
                            });
                            if let Some(v) = err {
                                return Err(XaddError::UnassignedVariable(self.var_name(v).to_string()));
                            }
                            v > T::zero()
                        }
                    };
                    n = if taken { *hi } else { *lo };
                }
            }
        }
    }

    /// Whether `f` holds any infinite leaf.
    pub fn has_infinite_leaf(&self, f: NodeId) -> bool {
        self.terminals(f)
            .into_iter()
            .any(|n| self.terminal_expr(n).map(|e| e.is_infinite()).unwrap_or(false))
    }

    pub fn lp_calls(&self) -> u64 {
        self.lp_calls
    }
}

/// Values for a subset of the store's variables.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Assignment<T> {
    bools: Vec<Option<bool>>,
    conts: Vec<Option<T>>,
}

impl<T: Scalar> Assignment<T> {
    pub fn new() -> Self {
        Assignment {
            bools: Vec::new(),
            conts: Vec::new(),
        }
    }

    pub fn set_bool(&mut self, b: BoolId, v: bool) -> &mut Self {
        let i = b.0 as usize;
        if self.bools.len() <= i {
            self.bools.resize(i + 1, None);
        }
        self.bools[i] = Some(v);
        self
    }

    pub fn set_cont(&mut self, x: VarId, v: T) -> &mut Self {
        let i = x.index();
        if self.conts.len() <= i {
            self.conts.resize(i + 1, None);
        }
        self.conts[i] = Some(v);
        self
    }

    pub fn with_bool(mut self, b: BoolId, v: bool) -> Self {
        self.set_bool(b, v);
        self
    }

    pub fn with_cont(mut self, x: VarId, v: T) -> Self {
        self.set_cont(x, v);
        self
    }

    pub fn boolean(&self, b: BoolId) -> Option<bool> {
        self.bools.get(b.0 as usize).copied().flatten()
    }

    pub fn cont(&self, x: VarId) -> Option<T> {
        self.conts.get(x.index()).copied().flatten()
    }

    pub fn cont_entries(&self) -> impl Iterator<Item = (VarId, T)> + '_ {
        self.conts
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|v| (VarId(i as u32), v)))
    }

    pub fn bool_entries(&self) -> impl Iterator<Item = (BoolId, bool)> + '_ {
        self.bools
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|v| (BoolId(i as u32), v)))
    }
}
