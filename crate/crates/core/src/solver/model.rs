//! HMDP model description, independent of any diagram store.

use std::fmt;

/// Source position. Positions never take part in model equality, so a
/// parsed model equals its reprinted-and-reparsed self.
#[derive(Clone, Copy, Debug, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl PartialEq for Pos {
    fn eq(&self, _: &Pos) -> bool {
        true
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// Numeric expression. Variable names may carry a trailing `'` for the
/// next-state copy.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(String, Pos),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Abs(Box<Expr>),
    Ite(Box<Cond>, Box<Expr>, Box<Expr>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

/// Boolean condition.
#[derive(Clone, Debug, PartialEq)]
pub enum Cond {
    Const(bool),
    Bool(String, Pos),
    Cmp(Box<Expr>, CmpOp, Box<Expr>),
    Not(Box<Cond>),
    And(Box<Cond>, Box<Cond>),
    Or(Box<Cond>, Box<Cond>),
}

/// Conditional distribution of one next-state variable.
#[derive(Clone, Debug, PartialEq)]
pub enum CpfKind {
    /// Deterministic piecewise-linear assignment `x' = expr`.
    Ple(Expr),
    /// `b' ~ bernoulli(expr)` with piecewise-constant probability.
    Bernoulli(Expr),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cpf {
    /// Unprimed variable name.
    pub var: String,
    pub kind: CpfKind,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Bounded {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Action {
    pub name: String,
    pub params: Vec<Bounded>,
    /// In dependency order: a CPF may read next-state variables assigned
    /// before it.
    pub cpfs: Vec<Cpf>,
    /// Overrides the model reward for this action.
    pub reward: Option<Expr>,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HmdpModel {
    pub name: String,
    pub cvars: Vec<Bounded>,
    pub bvars: Vec<(String, Pos)>,
    pub actions: Vec<Action>,
    pub reward: Option<Expr>,
    pub reward_pos: Pos,
    pub discount: f64,
    pub horizon: Option<usize>,
}

impl HmdpModel {
    pub fn new(name: &str) -> Self {
        HmdpModel {
            name: name.to_string(),
            cvars: Vec::new(),
            bvars: Vec::new(),
            actions: Vec::new(),
            reward: None,
            reward_pos: Pos::default(),
            discount: 1.0,
            horizon: None,
        }
    }

    pub fn cvar(&self, name: &str) -> Option<&Bounded> {
        self.cvars.iter().find(|v| v.name == name)
    }

    pub fn is_bvar(&self, name: &str) -> bool {
        self.bvars.iter().any(|b| b.0 == name)
    }

    pub fn action(&self, name: &str) -> Option<&Action> {
        self.actions.iter().find(|a| a.name == name)
    }

    /// Reward in effect for `action`.
    pub fn reward_for<'a>(&'a self, action: &'a Action) -> Option<&'a Expr> {
        action.reward.as_ref().or(self.reward.as_ref())
    }
}

// ---- construction helpers ----

#[allow(clippy::should_implement_trait)]
impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string(), Pos::default())
    }

    pub fn add(self, o: Expr) -> Expr {
        Expr::Add(Box::new(self), Box::new(o))
    }

    pub fn sub(self, o: Expr) -> Expr {
        Expr::Sub(Box::new(self), Box::new(o))
    }

    pub fn mul(self, o: Expr) -> Expr {
        Expr::Mul(Box::new(self), Box::new(o))
    }

    pub fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }

    pub fn abs(self) -> Expr {
        Expr::Abs(Box::new(self))
    }

    pub fn ite(c: Cond, a: Expr, b: Expr) -> Expr {
        Expr::Ite(Box::new(c), Box::new(a), Box::new(b))
    }

    /// Visit every variable reference.
    pub fn for_each_var(&self, f: &mut dyn FnMut(&str, Pos, bool)) {
        match self {
            Expr::Num(_) => {}
            Expr::Var(n, p) => f(n, *p, false),
            Expr::Neg(a) | Expr::Abs(a) => a.for_each_var(f),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                a.for_each_var(f);
                b.for_each_var(f);
            }
            Expr::Ite(c, a, b) => {
                c.for_each_var(f);
                a.for_each_var(f);
                b.for_each_var(f);
            }
        }
    }

    /// Whether every leaf of the expression is a number (conditions may
    /// still mention variables).
    pub fn leaves_constant(&self) -> bool {
        match self {
            Expr::Num(_) => true,
            Expr::Var(..) => false,
            Expr::Neg(a) | Expr::Abs(a) => a.leaves_constant(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => a.leaves_constant() && b.leaves_constant(),
            Expr::Ite(_, a, b) => a.leaves_constant() && b.leaves_constant(),
        }
    }

    /// All leaf values of a leaf-constant expression, or `None` if some leaf
    /// is not constant or the case count exceeds `cap`.
    pub fn leaf_values(&self, cap: usize) -> Option<Vec<f64>> {
        let cross = |a: Vec<f64>, b: Vec<f64>, op: fn(f64, f64) -> f64| -> Option<Vec<f64>> {
            if a.len() * b.len() > cap {
                return None;
            }
            let mut out = Vec::with_capacity(a.len() * b.len());
            for &x in &a {
                for &y in &b {
                    out.push(op(x, y));
                }
            }
            Some(out)
        };
        match self {
            Expr::Num(v) => Some(vec![*v]),
            Expr::Var(..) => None,
            Expr::Neg(a) => Some(a.leaf_values(cap)?.into_iter().map(|v| -v).collect()),
            Expr::Abs(a) => Some(a.leaf_values(cap)?.into_iter().map(f64::abs).collect()),
            Expr::Add(a, b) => cross(a.leaf_values(cap)?, b.leaf_values(cap)?, |x, y| x + y),
            Expr::Sub(a, b) => cross(a.leaf_values(cap)?, b.leaf_values(cap)?, |x, y| x - y),
            Expr::Mul(a, b) => cross(a.leaf_values(cap)?, b.leaf_values(cap)?, |x, y| x * y),
            Expr::Ite(_, a, b) => {
                let mut v = a.leaf_values(cap)?;
                v.extend(b.leaf_values(cap)?);
                (v.len() <= cap).then_some(v)
            }
        }
    }
}

#[allow(clippy::should_implement_trait)]
impl Cond {
    pub fn bool(name: &str) -> Cond {
        Cond::Bool(name.to_string(), Pos::default())
    }

    pub fn cmp(a: Expr, op: CmpOp, b: Expr) -> Cond {
        Cond::Cmp(Box::new(a), op, Box::new(b))
    }

    pub fn and(self, o: Cond) -> Cond {
        Cond::And(Box::new(self), Box::new(o))
    }

    pub fn or(self, o: Cond) -> Cond {
        Cond::Or(Box::new(self), Box::new(o))
    }

    pub fn not(self) -> Cond {
        Cond::Not(Box::new(self))
    }

    /// Visit variable references; the flag is true for boolean positions.
    pub fn for_each_var(&self, f: &mut dyn FnMut(&str, Pos, bool)) {
        match self {
            Cond::Const(_) => {}
            Cond::Bool(n, p) => f(n, *p, true),
            Cond::Cmp(a, _, b) => {
                a.for_each_var(f);
                b.for_each_var(f);
            }
            Cond::Not(a) => a.for_each_var(f),
            Cond::And(a, b) | Cond::Or(a, b) => {
                a.for_each_var(f);
                b.for_each_var(f);
            }
        }
    }
}

/// `name'` for a state variable.
pub fn primed(name: &str) -> String {
    format!("{}'", name)
}

/// Strip one trailing `'`, if present.
pub fn unprimed(name: &str) -> Option<&str> {
    name.strip_suffix('\'')
}
