//! Static checks of the HMDP restrictions.

use std::collections::{HashMap, HashSet};
use std::fmt;

use super::model::{primed, unprimed, Action, CpfKind, Expr, HmdpModel, Pos};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagKind {
    Syntax,
    UnknownIdentifier,
    UnboundedVariable,
    Duplicate,
    TypeMismatch,
    CyclicDependency,
    OrderViolation,
    ProbabilityRange,
    NonConstantProbability,
    Nonlinearity,
    Discount,
    UnknownBuiltin,
}

impl DiagKind {
    pub fn name(self) -> &'static str {
        match self {
            DiagKind::Syntax => "syntax error",
            DiagKind::UnknownIdentifier => "unknown identifier",
            DiagKind::UnboundedVariable => "unbounded variable",
            DiagKind::Duplicate => "duplicate definition",
            DiagKind::TypeMismatch => "type mismatch",
            DiagKind::CyclicDependency => "cyclic dependency",
            DiagKind::OrderViolation => "order violation",
            DiagKind::ProbabilityRange => "probability range",
            DiagKind::NonConstantProbability => "non-constant probability",
            DiagKind::Nonlinearity => "nonlinearity",
            DiagKind::Discount => "discount range",
            DiagKind::UnknownBuiltin => "unknown builtin",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostic {
    pub kind: DiagKind,
    pub pos: Pos,
    pub msg: String,
}

impl Diagnostic {
    pub fn new(kind: DiagKind, pos: Pos, msg: impl Into<String>) -> Self {
        Diagnostic {
            kind,
            pos,
            msg: msg.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: {}: {}",
            self.pos.line,
            self.pos.col,
            self.kind.name(),
            self.msg
        )
    }
}

/// Check every model restriction. Empty iff the model is valid.
pub fn validate(model: &HmdpModel) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut names: HashMap<&str, Pos> = HashMap::new();
    for v in &model.cvars {
        check_bounds(&mut out, &v.name, v.lo, v.hi, v.pos);
        if names.insert(&v.name, v.pos).is_some() {
            out.push(Diagnostic::new(
                DiagKind::Duplicate,
                v.pos,
                format!("variable `{}` declared twice", v.name),
            ));
        }
    }
    for (b, pos) in &model.bvars {
        if names.insert(b, *pos).is_some() {
            out.push(Diagnostic::new(
                DiagKind::Duplicate,
                *pos,
                format!("variable `{}` declared twice", b),
            ));
        }
    }
    if !(0.0..=1.0).contains(&model.discount) {
        out.push(Diagnostic::new(
            DiagKind::Discount,
            Pos::default(),
            format!("discount {} outside [0, 1]", model.discount),
        ));
    }
    let mut seen_actions = HashSet::new();
    for a in &model.actions {
        if !seen_actions.insert(a.name.as_str()) {
            out.push(Diagnostic::new(
                DiagKind::Duplicate,
                a.pos,
                format!("action `{}` defined twice", a.name),
            ));
        }
        check_action(model, a, &names, &mut out);
    }
    if let Some(r) = &model.reward {
        // The shared reward may read a parameter only if every action has it.
        let shared: HashSet<&str> = match model.actions.split_first() {
            Some((first, rest)) => first
                .params
                .iter()
                .map(|p| p.name.as_str())
                .filter(|n| rest.iter().all(|a| a.params.iter().any(|p| p.name == *n)))
                .collect(),
            None => HashSet::new(),
        };
        let scope = Scope { model, params: &shared };
        check_expr(&scope, r, model.reward_pos, "reward", &mut out);
    }
    out
}

fn check_bounds(out: &mut Vec<Diagnostic>, name: &str, lo: f64, hi: f64, pos: Pos) {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        out.push(Diagnostic::new(
            DiagKind::UnboundedVariable,
            pos,
            format!("`{}` needs finite bounds lo < hi, got [{}, {}]", name, lo, hi),
        ));
    }
}

struct Scope<'a> {
    model: &'a HmdpModel,
    params: &'a HashSet<&'a str>,
}

fn check_action(model: &HmdpModel, a: &Action, names: &HashMap<&str, Pos>, out: &mut Vec<Diagnostic>) {
    let mut params = HashSet::new();
    for p in &a.params {
        check_bounds(out, &p.name, p.lo, p.hi, p.pos);
        if names.contains_key(p.name.as_str()) || !params.insert(p.name.as_str()) {
            out.push(Diagnostic::new(
                DiagKind::Duplicate,
                p.pos,
                format!("parameter `{}` clashes", p.name),
            ));
        }
    }
    let mut index: HashMap<&str, usize> = HashMap::new();
    for (k, c) in a.cpfs.iter().enumerate() {
        if index.insert(c.var.as_str(), k).is_some() {
            out.push(Diagnostic::new(
                DiagKind::Duplicate,
                c.pos,
                format!("`{}` assigned twice in action `{}`", primed(&c.var), a.name),
            ));
        }
    }
    let scope = Scope { model, params: &params };
    let mut deps: Vec<Vec<usize>> = vec![Vec::new(); a.cpfs.len()];
    for (k, c) in a.cpfs.iter().enumerate() {
        let what = format!("`{}`", primed(&c.var));
        let e = match &c.kind {
            CpfKind::Ple(e) => {
                if model.is_bvar(&c.var) {
                    out.push(Diagnostic::new(
                        DiagKind::TypeMismatch,
                        c.pos,
                        format!("boolean {} needs a bernoulli distribution", what),
                    ));
                } else if model.cvar(&c.var).is_none() {
                    out.push(Diagnostic::new(
                        DiagKind::UnknownIdentifier,
                        c.pos,
                        format!("unknown variable {}", what),
                    ));
                }
                e
            }
            CpfKind::Bernoulli(p) => {
                if model.cvar(&c.var).is_some() {
                    out.push(Diagnostic::new(
                        DiagKind::TypeMismatch,
                        c.pos,
                        format!("continuous {} needs a deterministic assignment", what),
                    ));
                } else if !model.is_bvar(&c.var) {
                    out.push(Diagnostic::new(
                        DiagKind::UnknownIdentifier,
                        c.pos,
                        format!("unknown variable {}", what),
                    ));
                }
                if !p.leaves_constant() {
                    out.push(Diagnostic::new(
                        DiagKind::NonConstantProbability,
                        c.pos,
                        format!("probability of {} must be piecewise constant", what),
                    ));
                } else if let Some(vals) = p.leaf_values(1 << 16) {
                    if let Some(v) = vals.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                        out.push(Diagnostic::new(
                            DiagKind::ProbabilityRange,
                            c.pos,
                            format!("probability {} of {} outside [0, 1]", v, what),
                        ));
                    }
                }
                p
            }
        };
        check_expr(&scope, e, c.pos, &what, out);
        e.for_each_var(&mut |name, _, _| {
            if let Some(j) = unprimed(name).and_then(|u| index.get(u)) {
                if !deps[k].contains(j) {
                    deps[k].push(*j);
                }
            }
        });
    }
    // Cycles first; a forward reference outside any cycle is an order problem.
    let cyclic = cyclic_nodes(&deps);
    for (k, c) in a.cpfs.iter().enumerate() {
        if cyclic[k] {
            out.push(Diagnostic::new(
                DiagKind::CyclicDependency,
                c.pos,
                format!("`{}` depends on itself through next-state variables", primed(&c.var)),
            ));
            continue;
        }
        for &j in &deps[k] {
            if j >= k && !cyclic[j] {
                out.push(Diagnostic::new(
                    DiagKind::OrderViolation,
                    c.pos,
                    format!(
                        "`{}` reads `{}` which is assigned later",
                        primed(&c.var),
                        primed(&a.cpfs[j].var)
                    ),
                ));
            }
        }
    }
    if let Some(r) = &a.reward {
        let scope = Scope { model, params: &params };
        check_expr(&scope, r, a.pos, "reward", out);
    }
}

/// Nodes lying on a directed cycle (self-loops included).
fn cyclic_nodes(deps: &[Vec<usize>]) -> Vec<bool> {
    let n = deps.len();
    let reaches = |from: usize, target: usize| -> bool {
        let mut stack = deps[from].clone();
        let mut seen = vec![false; n];
        while let Some(v) = stack.pop() {
            if v == target {
                return true;
            }
            if !std::mem::replace(&mut seen[v], true) {
                stack.extend(deps[v].iter().copied());
            }
        }
        false
    };
    (0..n).map(|k| reaches(k, k)).collect()
}

fn check_expr(scope: &Scope<'_>, e: &Expr, at: Pos, what: &str, out: &mut Vec<Diagnostic>) {
    let model = scope.model;
    e.for_each_var(&mut |name, pos, boolean| {
        let pos = if pos.line == 0 { at } else { pos };
        let base = unprimed(name).unwrap_or(name);
        let is_primed = base.len() != name.len();
        let kind_ok = if model.cvar(base).is_some() {
            !boolean
        } else if model.is_bvar(base) {
            boolean
        } else if !is_primed && scope.params.contains(name) {
            !boolean
        } else {
            out.push(Diagnostic::new(
                DiagKind::UnknownIdentifier,
                pos,
                format!("unknown identifier `{}` in {}", name, what),
            ));
            return;
        };
        if !kind_ok {
            let want = if boolean { "boolean" } else { "numeric" };
            out.push(Diagnostic::new(
                DiagKind::TypeMismatch,
                pos,
                format!("`{}` used in a {} position in {}", name, want, what),
            ));
        }
    });
    check_linear(e, at, what, out);
}

fn check_linear(e: &Expr, at: Pos, what: &str, out: &mut Vec<Diagnostic>) {
    match e {
        Expr::Num(_) | Expr::Var(..) => {}
        Expr::Neg(a) | Expr::Abs(a) => check_linear(a, at, what, out),
        Expr::Add(a, b) | Expr::Sub(a, b) => {
            check_linear(a, at, what, out);
            check_linear(b, at, what, out);
        }
        Expr::Mul(a, b) => {
            if !a.leaves_constant() && !b.leaves_constant() {
                out.push(Diagnostic::new(
                    DiagKind::Nonlinearity,
                    at,
                    format!("product of two non-constant terms in {}", what),
                ));
            }
            check_linear(a, at, what, out);
            check_linear(b, at, what, out);
        }
        Expr::Ite(c, a, b) => {
            check_cond_linear(c, at, what, out);
            check_linear(a, at, what, out);
            check_linear(b, at, what, out);
        }
    }
}

fn check_cond_linear(c: &super::model::Cond, at: Pos, what: &str, out: &mut Vec<Diagnostic>) {
    use super::model::Cond;
    match c {
        Cond::Const(_) | Cond::Bool(..) => {}
        Cond::Cmp(a, _, b) => {
            check_linear(a, at, what, out);
            check_linear(b, at, what, out);
        }
        Cond::Not(a) => check_cond_linear(a, at, what, out),
        Cond::And(a, b) | Cond::Or(a, b) => {
            check_cond_linear(a, at, what, out);
            check_cond_linear(b, at, what, out);
        }
    }
}
