//! HMDP regression and bounded approximate value iteration.

mod model;
mod validate;


use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::time::Instant;

use crate::lp::{maximize_over, LinExpr, VarId};
use crate::scalar::Scalar;
use crate::xadd::{Assignment, BinOp, BoolId, DiagramStore, Node, NodeId, XaddError};

pub use model::{primed, unprimed, Action, Bounded, CmpOp, Cond, Cpf, CpfKind, Expr, HmdpModel, Pos};
pub use validate::{validate, DiagKind, Diagnostic};

#[derive(Clone, Debug, PartialEq)]
pub enum SolveError {
    /// The model failed validation.
    Invalid(Vec<Diagnostic>),
    Xadd(XaddError),
    /// A queried state or horizon is outside what was solved.
    OutOfDomain(String),
}

impl fmt::Display for SolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveError::Invalid(d) => match d.first() {
                Some(first) if d.len() == 1 => write!(f, "{}", first),
                Some(first) => write!(f, "{} (and {} more)", first, d.len() - 1),
                None => write!(f, "invalid model"),
            },
            SolveError::Xadd(e) => write!(f, "{}", e),
            SolveError::OutOfDomain(m) => write!(f, "out of domain: {}", m),
        }
    }
}

impl std::error::Error for SolveError {}

impl From<XaddError> for SolveError {
    fn from(e: XaddError) -> Self {
        SolveError::Xadd(e)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EpsMode<T> {
    /// The same error budget at every horizon.
    Absolute(T),
    /// A fraction of the largest absolute value of each uncompressed V^h.
    Relative(T),
}

#[derive(Clone, Debug)]
pub struct SolveOptions<T> {
    pub horizon: usize,
    pub eps: EpsMode<T>,
    /// Keep pre-max Q diagrams of every horizon, not just the last.
    pub retain_all_q: bool,
}

impl<T: Scalar> SolveOptions<T> {
    pub fn exact(horizon: usize) -> Self {
        SolveOptions {
            horizon,
            eps: EpsMode::Absolute(T::zero()),
            retain_all_q: false,
        }
    }

    pub fn absolute(horizon: usize, eps: T) -> Self {
        SolveOptions {
            horizon,
            eps: EpsMode::Absolute(eps),
            retain_all_q: false,
        }
    }

    pub fn relative(horizon: usize, fraction: T) -> Self {
        SolveOptions {
            horizon,
            eps: EpsMode::Relative(fraction),
            retain_all_q: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HorizonStats<T> {
    pub h: usize,
    /// Node count of V^h after compression.
    pub nodes: usize,
    /// Node count before compression.
    pub exact_nodes: usize,
    pub partitions: usize,
    /// Budget handed to compression at this horizon.
    pub eps_requested: T,
    pub eps_used: T,
    pub millis: f64,
}

/// Result of a solve. Node ids refer to the solver's store.
#[derive(Clone, Debug)]
pub struct SolveRecord<T> {
    /// `values[h]` is V^h; `values[0]` is the zero function.
    pub values: Vec<NodeId>,
    pub stats: Vec<HorizonStats<T>>,
    pub converged_at: Option<usize>,
    pub horizon: usize,
    /// Pre-max Q diagrams per horizon, one per action, in model order.
    pub q: BTreeMap<usize, Vec<NodeId>>,
}

impl<T: Scalar> SolveRecord<T> {
    /// V^h, following early convergence past the last computed horizon.
    pub fn value(&self, h: usize) -> Option<NodeId> {
        if h < self.values.len() {
            Some(self.values[h])
        } else if h <= self.horizon && self.converged_at.is_some() {
            self.values.last().copied()
        } else {
            None
        }
    }

    pub fn final_value(&self) -> NodeId {
        *self.values.last().expect("V^0 always present")
    }

    pub fn eps_used(&self) -> Vec<T> {
        self.stats.iter().map(|s| s.eps_used).collect()
    }

    /// Sum of the per-horizon errors actually introduced.
    pub fn cumulative_bound(&self) -> T {
        self.stats.iter().fold(T::zero(), |a, s| a + s.eps_used)
    }
}

/// Concrete state, by variable name.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct State {
    pub cont: BTreeMap<String, f64>,
    pub bools: BTreeMap<String, bool>,
}

impl State {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_cont(mut self, name: &str, v: f64) -> Self {
        self.cont.insert(name.to_string(), v);
        self
    }

    pub fn with_bool(mut self, name: &str, v: bool) -> Self {
        self.bools.insert(name.to_string(), v);
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Policy<T> {
    pub action: String,
    pub params: Vec<(String, T)>,
    pub value: T,
}

#[derive(Clone, Debug)]
struct StateVar<T> {
    name: String,
    cur: VarId,
    next: VarId,
    lo: T,
    hi: T,
}

#[derive(Clone, Debug)]
enum Step {
    Cont { next: VarId, ple: NodeId },
    Bool { next: BoolId, prob: NodeId },
}

#[derive(Clone, Debug)]
struct CompiledAction<T> {
    name: String,
    params: Vec<(String, VarId, T, T)>,
    /// Parent-first; eliminated in reverse.
    steps: Vec<Step>,
    reward: NodeId,
}

/// A compiled model together with the store holding all its diagrams.
#[derive(Clone, Debug)]
pub struct Solver<T: Scalar = f64> {
    pub store: DiagramStore<T>,
    model: HmdpModel,
    state: Vec<StateVar<T>>,
    bools: Vec<(String, BoolId, BoolId)>,
    actions: Vec<CompiledAction<T>>,
    discount: T,
}

struct Env {
    cont: HashMap<String, VarId>,
    bools: HashMap<String, BoolId>,
}

impl<T: Scalar> Solver<T> {
    /// Validate and compile `model` into a fresh store.
    pub fn new(model: &HmdpModel) -> Result<Self, SolveError> {
        let diags = validate(model);
        if !diags.is_empty() {
            return Err(SolveError::Invalid(diags));
        }
        let mut store = DiagramStore::new();
        let mut state = Vec::new();
        for v in &model.cvars {
            let (lo, hi) = (T::lit(v.lo), T::lit(v.hi));
            let cur = store.declare_cont(&v.name, lo, hi)?;
            state.push(StateVar {
                name: v.name.clone(),
                cur,
                next: cur,
                lo,
                hi,
            });
        }
        for s in &mut state {
            s.next = store.declare_cont(&primed(&s.name), s.lo, s.hi)?;
        }
        let mut bools: Vec<(String, BoolId, BoolId)> = Vec::new();
        for (b, _) in &model.bvars {
            let cur = store.declare_bool(b);
            bools.push((b.clone(), cur, cur));
        }
        for b in &mut bools {
            b.2 = store.declare_bool(&primed(&b.0));
        }
        let mut solver = Solver {
            store,
            model: model.clone(),
            state,
            bools,
            actions: Vec::new(),
            discount: T::lit(model.discount),
        };
        for a in &model.actions {
            let ca = solver.compile_action(a)?;
            solver.actions.push(ca);
        }
        Ok(solver)
    }

    pub fn model(&self) -> &HmdpModel {
        &self.model
    }

    pub fn action_names(&self) -> Vec<&str> {
        self.actions.iter().map(|a| a.name.as_str()).collect()
    }

    fn compile_action(&mut self, a: &Action) -> Result<CompiledAction<T>, SolveError> {
        let mut env = Env {
            cont: HashMap::new(),
            bools: HashMap::new(),
        };
        for s in &self.state {
            env.cont.insert(s.name.clone(), s.cur);
            env.cont.insert(primed(&s.name), s.next);
        }
        for (name, cur, next) in &self.bools {
            env.bools.insert(name.clone(), *cur);
            env.bools.insert(primed(name), *next);
        }
        let mut params = Vec::new();
        for p in &a.params {
            let (lo, hi) = (T::lit(p.lo), T::lit(p.hi));
            let id = match self.store.declare_cont(&p.name, lo, hi) {
                Ok(id) => id,
                // same name, different box in another action
                Err(XaddError::ConflictingBounds(_)) => {
                    self.store.declare_cont(&format!("{}.{}", a.name, p.name), lo, hi)?
                }
                Err(e) => return Err(e.into()),
            };
            env.cont.insert(p.name.clone(), id);
            params.push((p.name.clone(), id, lo, hi));
        }

        // Unassigned variables persist; they depend on nothing primed, so
        // they go first.
        let mut steps = Vec::new();
        for s in self.state.clone() {
            if !a.cpfs.iter().any(|c| c.var == s.name) {
                let ple = self.store.var_node(s.cur);
                steps.push(Step::Cont { next: s.next, ple });
            }
        }
        for (name, cur, next) in self.bools.clone() {
            if !a.cpfs.iter().any(|c| c.var == name) {
                let (one, zero) = (self.store.one(), self.store.zero());
                let prob = self.store.ite_bool(cur, one, zero);
                steps.push(Step::Bool { next, prob });
            }
        }
        for c in &a.cpfs {
            match &c.kind {
                CpfKind::Ple(e) => {
                    let s = self.state.iter().find(|s| s.name == c.var).expect("validated").clone();
                    let raw = self.expr_node(e, &env)?;
                    let ple = self.clamp(raw, s.lo, s.hi)?;
                    steps.push(Step::Cont { next: s.next, ple });
                }
                CpfKind::Bernoulli(p) => {
                    let next = env.bools[&primed(&c.var)];
                    let prob = self.expr_node(p, &env)?;
                    let prob = self.store.reduce_lp(prob);
                    steps.push(Step::Bool { next, prob });
                }
            }
        }
        let reward = match self.model.reward_for(a).cloned() {
            Some(r) => {
                let n = self.expr_node(&r, &env)?;
                self.store.reduce_lp(n)
            }
            None => self.store.zero(),
        };
        Ok(CompiledAction {
            name: a.name.clone(),
            params,
            steps,
            reward,
        })
    }

    /// Keep a next-state assignment inside the variable's box.
    fn clamp(&mut self, f: NodeId, lo: T, hi: T) -> Result<NodeId, XaddError> {
        let l = self.store.constant(lo);
        let h = self.store.constant(hi);
        let r = self.store.apply(f, l, BinOp::Max)?;
        self.store.apply(r, h, BinOp::Min)
    }

    fn expr_node(&mut self, e: &Expr, env: &Env) -> Result<NodeId, XaddError> {
        let st = &mut self.store;
        Ok(match e {
            Expr::Num(v) => st.constant(T::lit(*v)),
            Expr::Var(n, _) => match env.cont.get(n) {
                Some(&v) => st.var_node(v),
                None => return Err(XaddError::UnknownVariable(n.clone())),
            },
            Expr::Neg(a) => {
                let a = self.expr_node(a, env)?;
                self.store.negate(a)
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                let op = match e {
                    Expr::Add(..) => BinOp::Add,
                    Expr::Sub(..) => BinOp::Sub,
                    _ => BinOp::Mul,
                };
                let a = self.expr_node(a, env)?;
                let b = self.expr_node(b, env)?;
                self.store.apply_raw(a, b, op)?
            }
            Expr::Abs(a) => {
                let a = self.expr_node(a, env)?;
                let n = self.store.negate(a);
                self.store.apply_raw(a, n, BinOp::Max)?
            }
            Expr::Ite(c, a, b) => {
                let a = self.expr_node(a, env)?;
                let b = self.expr_node(b, env)?;
                self.cond_node(c, a, b, env)?
            }
        })
    }

    /// `if c then hi else lo`.
    fn cond_node(&mut self, c: &Cond, hi: NodeId, lo: NodeId, env: &Env) -> Result<NodeId, XaddError> {
        Ok(match c {
            Cond::Const(true) => hi,
            Cond::Const(false) => lo,
            Cond::Bool(n, _) => match env.bools.get(n) {
                Some(&b) => self.store.ite_bool(b, hi, lo),
                None => return Err(XaddError::UnknownVariable(n.clone())),
            },
            Cond::Not(a) => self.cond_node(a, lo, hi, env)?,
            Cond::And(a, b) => {
                let inner = self.cond_node(b, hi, lo, env)?;
                self.cond_node(a, inner, lo, env)?
            }
            Cond::Or(a, b) => {
                let inner = self.cond_node(b, hi, lo, env)?;
                self.cond_node(a, hi, inner, env)?
            }
            Cond::Cmp(a, op, b) => {
                let a = self.expr_node(a, env)?;
                let b = self.expr_node(b, env)?;
                let d = self.store.apply_raw(a, b, BinOp::Sub)?;
                self.cmp_node(d, *op, hi, lo)
            }
        })
    }

    /// `if d op 0 then hi else lo` for a piecewise-linear `d`.
    fn cmp_node(&mut self, d: NodeId, op: CmpOp, hi: NodeId, lo: NodeId) -> NodeId {
        let mut memo: HashMap<NodeId, NodeId> = HashMap::new();
        for n in self.store.reachable(d) {
            let r = match self.store.node(n).clone() {
                Node::Terminal(e) => match op {
                    CmpOp::Gt => self.store.ite_expr(&e, hi, lo),
                    CmpOp::Ge => self.store.ite_expr_ge(&e, hi, lo),
                    CmpOp::Lt => self.store.ite_expr(&-&e, hi, lo),
                    CmpOp::Le => self.store.ite_expr_ge(&-&e, hi, lo),
                },
                Node::Internal { dec, hi: h, lo: l } => {
                    let (h, l) = (memo[&h], memo[&l]);
                    self.store.ite(dec, h, l)
                }
            };
            memo.insert(n, r);
        }
        memo[&d]
    }

    /// Rename every state variable to its next-state copy.
    fn prime(&mut self, v: NodeId) -> NodeId {
        let map: HashMap<VarId, LinExpr<T>> = self.state.iter().map(|s| (s.cur, LinExpr::var(s.next))).collect();
        let mut r = self.store.substitute_many(v, &map);
        for &(_, cur, next) in &self.bools {
            r = self.store.rename_bool(r, cur, next);
        }
        r
    }

    fn action_index(&self, name: &str) -> Result<usize, SolveError> {
        self.actions
            .iter()
            .position(|a| a.name == name)
            .ok_or_else(|| SolveError::OutOfDomain(format!("unknown action `{}`", name)))
    }

    /// Q_a over current state and action parameters, before maximizing out
    /// the parameters.
    pub fn regress(&mut self, v: NodeId, action: &str) -> Result<NodeId, SolveError> {
        let a = self.action_index(action)?;
        self.regress_index(v, a)
    }

    fn regress_index(&mut self, v: NodeId, a: usize) -> Result<NodeId, SolveError> {
        let mut q = self.prime(v);
        if self.discount != T::one() {
            q = self.store.scale(q, self.discount);
        }
        let reward = self.actions[a].reward;
        q = self.store.apply(reward, q, BinOp::Add)?;
        let steps = self.actions[a].steps.clone();
        for step in steps.iter().rev() {
            q = match *step {
                Step::Cont { next, ple } => self.store.integrate_dirac(q, next, ple),
                Step::Bool { next, prob } => self.store.marginalize_bool(q, next, prob)?,
            };
        }
        Ok(q)
    }

    /// Maximize the parameters of action `a` out of `q`.
    fn max_params(&mut self, mut q: NodeId, a: usize) -> Result<NodeId, SolveError> {
        let params = self.actions[a].params.clone();
        for (_, y, lo, hi) in params {
            q = self.store.max_param(q, y, lo, hi)?;
        }
        Ok(q)
    }

    /// Run bounded approximate value iteration.
    pub fn solve(&mut self, opts: &SolveOptions<T>) -> Result<SolveRecord<T>, SolveError> {
        let zero = self.store.zero();
        let mut rec = SolveRecord {
            values: vec![zero],
            stats: Vec::new(),
            converged_at: None,
            horizon: opts.horizon,
            q: BTreeMap::new(),
        };
        for h in 1..=opts.horizon {
            let start = Instant::now();
            let prev = rec.values[h - 1];
            let mut qs = Vec::with_capacity(self.actions.len());
            let mut v: Option<NodeId> = None;
            for a in 0..self.actions.len() {
                let q = self.regress_index(prev, a)?;
                qs.push(q);
                let qa = self.max_params(q, a)?;
                v = Some(match v {
                    None => qa,
                    Some(acc) => self.store.apply(acc, qa, BinOp::Max)?,
                });
            }
            let exact = v.unwrap_or(zero);
            let eps = match opts.eps {
                EpsMode::Absolute(e) => e,
                EpsMode::Relative(f) => self.store.relative_epsilon(exact, f)?,
            };
            let (vh, used) = self.store.xadd_compress(exact, eps)?;
            let partitions = self.store.paths(vh).len();
            rec.stats.push(HorizonStats {
                h,
                nodes: self.store.node_count(vh),
                exact_nodes: self.store.node_count(exact),
                partitions,
                eps_requested: eps,
                eps_used: used,
                millis: start.elapsed().as_secs_f64() * 1e3,
            });
            // the last computed horizon always keeps its Q
            let last = h == opts.horizon || vh == prev;
            if opts.retain_all_q || last {
                rec.q.insert(h, qs);
            }
            rec.values.push(vh);
            if vh == prev {
                rec.converged_at = Some(h);
                break;
            }
        }
        Ok(rec)
    }

    fn assignment(&self, state: &State) -> Result<Assignment<T>, SolveError> {
        let mut a = Assignment::new();
        for s in &self.state {
            let v = *state
                .cont
                .get(&s.name)
                .ok_or_else(|| SolveError::OutOfDomain(format!("no value for `{}`", s.name)))?;
            let t = T::lit(v);
            if !(t >= s.lo && t <= s.hi) {
                return Err(SolveError::OutOfDomain(format!(
                    "`{}` = {} outside [{}, {}]",
                    s.name,
                    v,
                    s.lo.as_f64(),
                    s.hi.as_f64()
                )));
            }
            a.set_cont(s.cur, t);
        }
        for (name, cur, _) in &self.bools {
            let v = *state
                .bools
                .get(name)
                .ok_or_else(|| SolveError::OutOfDomain(format!("no value for `{}`", name)))?;
            a.set_bool(*cur, v);
        }
        for k in state.cont.keys() {
            if !self.state.iter().any(|s| &s.name == k) {
                return Err(SolveError::OutOfDomain(format!(
                    "`{}` is not a continuous state variable",
                    k
                )));
            }
        }
        for k in state.bools.keys() {
            if !self.bools.iter().any(|b| &b.0 == k) {
                return Err(SolveError::OutOfDomain(format!(
                    "`{}` is not a boolean state variable",
                    k
                )));
            }
        }
        Ok(a)
    }

    fn value_node(&self, rec: &SolveRecord<T>, h: usize) -> Result<NodeId, SolveError> {
        rec.value(h)
            .ok_or_else(|| SolveError::OutOfDomain(format!("horizon {} not solved (max {})", h, rec.values.len() - 1)))
    }

    /// V^h at a concrete state.
    pub fn value_at(&self, rec: &SolveRecord<T>, h: usize, state: &State) -> Result<T, SolveError> {
        let v = self.value_node(rec, h)?;
        let a = self.assignment(state)?;
        Ok(self.store.evaluate(v, &a)?)
    }

    /// Best action and parameters at a concrete state for horizon `h >= 1`.
    pub fn policy_at(&mut self, rec: &SolveRecord<T>, h: usize, state: &State) -> Result<Policy<T>, SolveError> {
        if h == 0 {
            return Err(SolveError::OutOfDomain("no decision at horizon 0".into()));
        }
        self.value_node(rec, h)?;
        let assign = self.assignment(state)?;
        // past convergence every horizon shares the last Q
        let h = h.min(rec.values.len() - 1);
        let qs = match rec.q.get(&h) {
            Some(q) if q.len() == self.actions.len() => q.clone(),
            _ => {
                let prev = rec.values[h - 1];
                let mut qs = Vec::new();
                for a in 0..self.actions.len() {
                    qs.push(self.regress_index(prev, a)?);
                }
                qs
            }
        };
        let map: HashMap<VarId, LinExpr<T>> = assign.cont_entries().map(|(v, t)| (v, LinExpr::constant(t))).collect();
        let mut best: Option<Policy<T>> = None;
        for (a, q) in qs.into_iter().enumerate() {
            let mut r = self.store.substitute_many(q, &map);
            for (b, v) in assign.bool_entries().collect::<Vec<_>>() {
                r = self.store.restrict_bool(r, b, v);
            }
            let params = self.actions[a].params.clone();
            let (point, value) = self.maximize_params(r, &params)?;
            let better = best.as_ref().is_none_or(|b| value > b.value);
            if better {
                best = Some(Policy {
                    action: self.actions[a].name.clone(),
                    params: params
                        .iter()
                        .map(|(n, id, lo, _)| (n.clone(), point.get(id).copied().unwrap_or(*lo)))
                        .collect(),
                    value,
                });
            }
        }
        best.ok_or_else(|| SolveError::OutOfDomain("model has no actions".into()))
    }

    /// Max of a diagram over the parameter box, with a maximizing point.
    fn maximize_params(
        &mut self,
        r: NodeId,
        params: &[(String, VarId, T, T)],
    ) -> Result<(BTreeMap<VarId, T>, T), SolveError> {
        let mut best: Option<(BTreeMap<VarId, T>, T)> = None;
        for p in self.store.paths(r) {
            let leaf = self.store.terminal_expr(p.leaf).cloned().unwrap_or_default();
            if leaf.is_infinite() {
                continue;
            }
            let poly = self.store.path_polytope(&p.ineqs, params.iter().map(|q| q.1));
            let (point, value) = match maximize_over(&leaf, &poly) {
                Ok(r) => r,
                Err(crate::lp::LpError::InfeasibleRegion) => continue,
                Err(e) => return Err(XaddError::from(e).into()),
            };
            if best.as_ref().is_none_or(|b| value > b.1) {
                best = Some((point, value));
            }
        }
        best.ok_or(SolveError::Xadd(XaddError::InfeasibleRegion))
    }
}

pub type SweepResult<T> = Result<(Solver<T>, SolveRecord<T>), SolveError>;

/// Solve several budgets of the same model in parallel, one store each.
pub fn solve_sweep<T: Scalar + Send>(model: &HmdpModel, runs: &[SolveOptions<T>]) -> Vec<SweepResult<T>> {
    std::thread::scope(|s| {
        let handles: Vec<_> = runs
            .iter()
            .map(|opts| {
                s.spawn(move || {
                    let mut solver = Solver::<T>::new(model)?;
                    let rec = solver.solve(opts)?;
                    Ok((solver, rec))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("solver thread panicked"))
            .collect()
    })
}
