//! Random valid domains built directly as models.

use basdp::solver::{Action, Bounded, CmpOp, Cond, Cpf, CpfKind, Expr, HmdpModel, Pos};
use rand::Rng;

use super::Rng8;

fn num(r: &mut Rng8) -> f64 {
    match r.gen_range(0..4) {
        0 => r.gen_range(-20i32..20) as f64,
        1 => r.gen_range(-20i32..20) as f64 / 4.0,
        2 => r.gen_range(-100.0..100.0),
        _ => r.gen_range(0.0..1.0),
    }
}

/// A piecewise-constant expression with leaves in [0, 1].
fn prob(r: &mut Rng8, scope: &Scope, depth: usize) -> Expr {
    if depth == 0 || r.gen_bool(0.5) {
        return Expr::num((r.gen_range(0..=20) as f64) / 20.0);
    }
    Expr::ite(
        cond(r, scope, depth - 1),
        prob(r, scope, depth - 1),
        prob(r, scope, depth - 1),
    )
}

pub struct Scope {
    pub cont: Vec<String>,
    pub bools: Vec<String>,
}

fn atom(r: &mut Rng8, scope: &Scope) -> Expr {
    if scope.cont.is_empty() || r.gen_bool(0.3) {
        Expr::num(num(r))
    } else {
        Expr::var(&scope.cont[r.gen_range(0..scope.cont.len())])
    }
}

pub fn expr(r: &mut Rng8, scope: &Scope, depth: usize) -> Expr {
    if depth == 0 {
        return atom(r, scope);
    }
    let d = depth - 1;
    match r.gen_range(0..9) {
        0 | 1 => expr(r, scope, d).add(expr(r, scope, d)),
        2 => expr(r, scope, d).sub(expr(r, scope, d)),
        3 => Expr::num(num(r)).mul(expr(r, scope, d)),
        4 => expr(r, scope, d).mul(Expr::num(num(r))),
        5 => expr(r, scope, d).neg(),
        6 => expr(r, scope, d).abs(),
        7 => Expr::ite(cond(r, scope, d), expr(r, scope, d), expr(r, scope, d)),
        _ => atom(r, scope),
    }
}

pub fn cond(r: &mut Rng8, scope: &Scope, depth: usize) -> Cond {
    let op = [CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge][r.gen_range(0..4)];
    if depth == 0 {
        return if !scope.bools.is_empty() && r.gen_bool(0.4) {
            Cond::bool(&scope.bools[r.gen_range(0..scope.bools.len())])
        } else {
            Cond::cmp(atom(r, scope), op, atom(r, scope))
        };
    }
    let d = depth - 1;
    match r.gen_range(0..6) {
        0 => cond(r, scope, d).and(cond(r, scope, d)),
        1 => cond(r, scope, d).or(cond(r, scope, d)),
        2 => cond(r, scope, d).not(),
        3 => Cond::Const(r.gen_bool(0.5)),
        _ => Cond::cmp(expr(r, scope, d), op, expr(r, scope, d)),
    }
}

fn bounded(r: &mut Rng8, name: String) -> Bounded {
    let lo = r.gen_range(-50i32..50) as f64;
    Bounded {
        name,
        lo,
        hi: lo + r.gen_range(1i32..100) as f64,
        pos: Pos::default(),
    }
}

pub fn model(r: &mut Rng8) -> HmdpModel {
    let mut m = HmdpModel::new(&format!("fz{}", r.gen_range(0..1000)));
    for i in 0..r.gen_range(1..=3) {
        m.cvars.push(bounded(r, format!("x{}", i)));
    }
    for i in 0..r.gen_range(0..=2) {
        m.bvars.push((format!("b{}", i), Pos::default()));
    }
    m.discount = [1.0, 0.9, 0.5, 0.95][r.gen_range(0..4)];
    m.horizon = if r.gen_bool(0.5) { Some(r.gen_range(1..6)) } else { None };
    let state = Scope {
        cont: m.cvars.iter().map(|b| b.name.clone()).collect(),
        bools: m.bvars.iter().map(|b| b.0.clone()).collect(),
    };
    for a in 0..r.gen_range(1..=3) {
        let params: Vec<Bounded> = (0..r.gen_range(0..=2))
            .map(|i| bounded(r, format!("p{}_{}", a, i)))
            .collect();
        let mut scope = Scope {
            cont: state.cont.clone(),
            bools: state.bools.clone(),
        };
        scope.cont.extend(params.iter().map(|p| p.name.clone()));
        let mut cpfs = Vec::new();
        for v in &state.cont {
            if r.gen_bool(0.7) {
                cpfs.push(Cpf {
                    var: v.clone(),
                    kind: CpfKind::Ple(expr(r, &scope, 3)),
                    pos: Pos::default(),
                });
            }
        }
        for b in &state.bools {
            if r.gen_bool(0.7) {
                cpfs.push(Cpf {
                    var: b.clone(),
                    kind: CpfKind::Bernoulli(prob(r, &scope, 2)),
                    pos: Pos::default(),
                });
            }
        }
        let reward = if r.gen_bool(0.5) {
            Some(expr(r, &scope, 3))
        } else {
            None
        };
        m.actions.push(Action {
            name: format!("act{}", a),
            params,
            cpfs,
            reward,
            pos: Pos::default(),
        });
    }
    if r.gen_bool(0.7) {
        m.reward = Some(expr(r, &state, 3));
    }
    m
}
