//! Linear expressions, bounded polytopes and a small exact-pivoting LP solver.
//!
//! Everything here is pure: no shared state, safe to call from any thread.

mod linexpr;
pub mod simplex;

use std::collections::BTreeMap;
use std::fmt;

pub(crate) use linexpr::fmt_num;
pub use linexpr::{ExprKey, LinExpr, VarId};
pub use simplex::{Direction, LinearProgram, RowCmp, SimplexOutcome};

use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpError {
    /// Pivot cap exceeded; the problem is numerically unstable.
    IterationLimit,
    /// A variable has lower bound above its upper bound.
    InvalidBounds,
    /// A constraint or objective mentions a variable without box bounds.
    MissingBound(VarId),
    /// Maximization requested over an empty region.
    InfeasibleRegion,
}

impl fmt::Display for LpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LpError::IterationLimit => write!(f, "simplex iteration limit exceeded (numerical instability)"),
            LpError::InvalidBounds => write!(f, "variable bounds are inverted"),
            LpError::MissingBound(v) => write!(f, "variable #{} has no box bounds", v.0),
            LpError::InfeasibleRegion => write!(f, "region is infeasible"),
        }
    }
}

impl std::error::Error for LpError {}

/// `expr >= 0` or `expr > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sense {
    Ge,
    Gt,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint<T> {
    pub expr: LinExpr<T>,
    pub sense: Sense,
}

impl<T: Scalar> Constraint<T> {
    pub fn ge(expr: LinExpr<T>) -> Self {
        Constraint { expr, sense: Sense::Ge }
    }

    pub fn gt(expr: LinExpr<T>) -> Self {
        Constraint { expr, sense: Sense::Gt }
    }

    pub fn holds(&self, value: impl Fn(VarId) -> T, tol: T) -> bool {
        let v = self.expr.eval(value);
        match self.sense {
            Sense::Ge => v >= -tol,
            Sense::Gt => v > -tol,
        }
    }
}

/// Conjunction of linear constraints intersected with a finite box.
#[derive(Clone, Debug, PartialEq)]
pub struct Polytope<T> {
    pub constraints: Vec<Constraint<T>>,
    pub bounds: BTreeMap<VarId, (T, T)>,
}

impl<T: Scalar> Polytope<T> {
    pub fn new(bounds: BTreeMap<VarId, (T, T)>) -> Self {
        Polytope {
            constraints: Vec::new(),
            bounds,
        }
    }

    pub fn with_box<I: IntoIterator<Item = (VarId, T, T)>>(bounds: I) -> Self {
        Self::new(bounds.into_iter().map(|(v, lo, hi)| (v, (lo, hi))).collect())
    }

    pub fn push(&mut self, c: Constraint<T>) {
        self.constraints.push(c);
    }

    pub fn with(mut self, c: Constraint<T>) -> Self {
        self.push(c);
        self
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.bounds.keys().copied()
    }

    pub fn contains(&self, value: impl Fn(VarId) -> T + Copy, tol: T) -> bool {
        self.bounds.iter().all(|(&v, &(lo, hi))| {
            let x = value(v);
            x >= lo - tol && x <= hi + tol
        }) && self.constraints.iter().all(|c| c.holds(value, tol))
    }

    pub fn center(&self) -> BTreeMap<VarId, T> {
        let two = T::one() + T::one();
        self.bounds.iter().map(|(&v, &(lo, hi))| (v, (lo + hi) / two)).collect()
    }

    fn column_of(&self, v: VarId) -> Result<usize, LpError> {
        self.bounds.keys().position(|&k| k == v).ok_or(LpError::MissingBound(v))
    }

    /// Translate into an LP over one column per bounded variable.
    fn to_program(&self, direction: Direction, extra_cols: usize) -> Result<LinearProgram<T>, LpError> {
        let n = self.bounds.len();
        let mut lp = LinearProgram::new(n + extra_cols, direction);
        for (j, &(lo, hi)) in self.bounds.values().enumerate() {
            lp.set_bounds(j, Some(lo), Some(hi));
        }
        for c in &self.constraints {
            let coeffs = c
                .expr
                .terms()
                .iter()
                .map(|&(v, a)| Ok((self.column_of(v)?, a)))
                .collect::<Result<Vec<_>, LpError>>()?;
            lp.add_row(coeffs, RowCmp::Ge, -c.expr.constant_term());
        }
        Ok(lp)
    }

    fn point_from(&self, x: &[T]) -> BTreeMap<VarId, T> {
        self.bounds.keys().copied().zip(x.iter().copied()).collect()
    }

    fn constant_check(&self, strict_all: bool) -> Option<bool> {
        for c in &self.constraints {
            if let Some(k) = c.expr.as_constant() {
                let strict = strict_all || c.sense == Sense::Gt;
                let ok = if strict { k > T::feas_tol() } else { k >= -T::feas_tol() };
                if !ok {
                    return Some(false);
                }
            }
        }
        for &(lo, hi) in self.bounds.values() {
            if hi < lo {
                return Some(false);
            }
        }
        None
    }
}

#[derive(Clone, Debug)]
pub struct LpProblem<T> {
    pub objective: LinExpr<T>,
    pub direction: Direction,
    pub region: Polytope<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpResult<T> {
    Optimal { point: BTreeMap<VarId, T>, value: T },
    Infeasible,
    Unbounded,
}

/// Solve an LP over a box-bounded polytope; strict constraints are relaxed.
pub fn lp_solve<T: Scalar>(problem: &LpProblem<T>) -> Result<LpResult<T>, LpError> {
    let region = &problem.region;
    if region.constant_check(false) == Some(false) {
        return Ok(LpResult::Infeasible);
    }
    let mut lp = region.to_program(problem.direction, 0)?;
    for &(v, c) in problem.objective.terms() {
        let j = region.column_of(v)?;
        lp.objective[j] = c;
    }
    Ok(match lp.solve()? {
        SimplexOutcome::Optimal { x, value } => LpResult::Optimal {
            point: region.point_from(&x),
            value: value + problem.objective.constant_term(),
        },
        SimplexOutcome::Infeasible => LpResult::Infeasible,
        SimplexOutcome::Unbounded => LpResult::Unbounded,
    })
}

/// Largest uniform slack `s` such that every selected constraint holds with
/// `expr >= s`, capped at 1. `None` if even the closed region is empty.
fn max_slack<T: Scalar>(p: &Polytope<T>, strict_all: bool) -> Result<Option<T>, LpError> {
    let n = p.bounds.len();
    let mut lp = p.to_program(Direction::Maximize, 1)?;
    lp.set_bounds(n, Some(-T::one()), Some(T::one()));
    lp.objective[n] = T::one();
    for (row, c) in lp.rows.iter_mut().zip(&p.constraints) {
        if strict_all || c.sense == Sense::Gt {
            row.coeffs.push((n, -T::one()));
        }
    }
    let strict_rows = p.constraints.iter().any(|c| strict_all || c.sense == Sense::Gt);
    if !strict_rows {
        return Ok(match lp.solve()? {
            SimplexOutcome::Optimal { .. } => Some(T::one()),
            _ => None,
        });
    }
    Ok(match lp.solve()? {
        SimplexOutcome::Optimal { value, .. } if value >= -T::feas_tol() => Some(value),
        SimplexOutcome::Optimal { .. } => None,
        SimplexOutcome::Infeasible => None,
        SimplexOutcome::Unbounded => Some(T::one()),
    })
}

/// Nonemptiness test; strict constraints require positive slack.
pub fn polytope_feasible<T: Scalar>(p: &Polytope<T>) -> bool {
    if let Some(r) = p.constant_check(false) {
        if !r {
            return false;
        }
    }
    let p = without_constants(p);
    let has_strict = p.constraints.iter().any(|c| c.sense == Sense::Gt);
    match max_slack(&p, false) {
        Ok(Some(s)) => !has_strict || s > T::feas_tol(),
        Ok(None) => false,
        // an unstable LP keeps the region
        Err(_) => true,
    }
}

/// Nonempty interior: every constraint, strict or not, must admit slack.
pub fn has_interior<T: Scalar>(p: &Polytope<T>) -> bool {
    if p.constant_check(true) == Some(false) {
        return false;
    }
    let p = without_constants(p);
    if p.constraints.is_empty() {
        return p.bounds.values().all(|&(lo, hi)| hi > lo);
    }
    match max_slack(&p, true) {
        Ok(Some(s)) => s > T::feas_tol(),
        Ok(None) => false,
        Err(_) => true,
    }
}

fn without_constants<T: Scalar>(p: &Polytope<T>) -> Polytope<T> {
    Polytope {
        constraints: p
            .constraints
            .iter()
            .filter(|c| !c.expr.is_constant())
            .cloned()
            .collect(),
        bounds: p.bounds.clone(),
    }
}

/// Maximizing vertex of `e` over the closure of `p`.
pub fn maximize_over<T: Scalar>(e: &LinExpr<T>, p: &Polytope<T>) -> Result<(BTreeMap<VarId, T>, T), LpError> {
    let problem = LpProblem {
        objective: e.clone(),
        direction: Direction::Maximize,
        region: p.clone(),
    };
    match lp_solve(&problem)? {
        LpResult::Optimal { point, value } => Ok((point, value)),
        LpResult::Infeasible => Err(LpError::InfeasibleRegion),
        // cannot happen with a finite box
        LpResult::Unbounded => Err(LpError::IterationLimit),
    }
}
