#![allow(dead_code)]

use basdp::lp::{Constraint, Direction, LinExpr, LinearProgram, Polytope, RowCmp, SimplexOutcome, VarId};
use basdp::xadd::{Assignment, BoolId, DiagramStore, NodeId};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type Rng8 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng8 {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

/// Solve the square system `a x = b`; `None` if singular.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-10 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in 0..n {
            if r != c {
                let f = a[r][c] / a[c][c];
                if f != 0.0 {
                    let pivot = a[c].clone();
                    for (x, p) in a[r][c..].iter_mut().zip(&pivot[c..]) {
                        *x -= f * p;
                    }
                    b[r] -= f * b[c];
                }
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn combinations(n: usize, k: usize, out: &mut Vec<Vec<usize>>, cur: &mut Vec<usize>, start: usize) {
    if cur.len() == k {
        out.push(cur.clone());
        return;
    }
    for i in start..n {
        cur.push(i);
        combinations(n, k, out, cur, i + 1);
        cur.pop();
    }
}

/// Vertices of the closure of `p` by brute force over active sets. Points
/// are listed in the order of `p.bounds`.
pub fn vertices(p: &Polytope<f64>) -> Vec<Vec<f64>> {
    let vars: Vec<VarId> = p.bounds.keys().copied().collect();
    let d = vars.len();
    // every halfspace as (a, c) meaning a.x + c >= 0
    let mut hs: Vec<(Vec<f64>, f64)> = Vec::new();
    for (i, (_, &(lo, hi))) in p.bounds.iter().enumerate() {
        let mut a = vec![0.0; d];
        a[i] = 1.0;
        hs.push((a.clone(), -lo));
        a[i] = -1.0;
        hs.push((a, hi));
    }
    for c in &p.constraints {
        let a = vars.iter().map(|&v| c.expr.coeff(v)).collect();
        hs.push((a, c.expr.constant_term()));
    }
    let mut sets = Vec::new();
    combinations(hs.len(), d, &mut sets, &mut Vec::new(), 0);
    let mut out: Vec<Vec<f64>> = Vec::new();
    for s in sets {
        let a = s.iter().map(|&i| hs[i].0.clone()).collect();
        let b = s.iter().map(|&i| -hs[i].1).collect();
        let Some(x) = solve_dense(a, b) else { continue };
        let feasible = hs
            .iter()
            .all(|(a, c)| a.iter().zip(&x).map(|(ai, xi)| ai * xi).sum::<f64>() + c >= -1e-9);
        if feasible && !out.iter().any(|y| y.iter().zip(&x).all(|(u, v)| (u - v).abs() < 1e-7)) {
            out.push(x);
        }
    }
    out
}

pub fn eval_at(e: &LinExpr<f64>, vars: &[VarId], x: &[f64]) -> f64 {
    e.eval(|v| vars.iter().position(|&w| w == v).map(|i| x[i]).unwrap_or(0.0))
}

/// Max of a linear objective over a bounded polytope by checking vertices.
pub fn max_by_vertices(obj: &LinExpr<f64>, p: &Polytope<f64>) -> Option<f64> {
    let vars: Vec<VarId> = p.bounds.keys().copied().collect();
    vertices(p)
        .iter()
        .map(|x| eval_at(obj, &vars, x))
        .max_by(f64::total_cmp)
}

pub fn random_lin(rng: &mut Rng8, vars: &[VarId], scale: f64) -> LinExpr<f64> {
    let terms: Vec<(VarId, f64)> = vars.iter().map(|&v| (v, rng.gen_range(-scale..scale))).collect();
    LinExpr::from_terms(terms, rng.gen_range(-scale..scale) * 5.0)
}

/// A box in `vars` cut by up to `max_cuts` random halfspaces through points
/// of the box, retried until it has a full-dimensional vertex set.
pub fn random_region(rng: &mut Rng8, vars: &[VarId], max_cuts: usize) -> Polytope<f64> {
    loop {
        let mut p = Polytope::with_box(vars.iter().map(|&v| (v, -10.0, 10.0)));
        for _ in 0..rng.gen_range(0..=max_cuts) {
            let a: Vec<f64> = vars.iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
            let at: Vec<f64> = vars.iter().map(|_| rng.gen_range(-6.0..6.0)).collect();
            let c = -a.iter().zip(&at).map(|(u, v)| u * v).sum::<f64>();
            p.push(Constraint::ge(LinExpr::from_terms(vars.iter().copied().zip(a), c)));
        }
        if vertices(&p).len() > vars.len() {
            return p;
        }
    }
}

/// Minimax hyperplane over all vertices at once: min t subject to
/// |f_i(v) - c(v)| <= t for every vertex v of every region of leaf i.
pub fn chebyshev_by_vertices(
    leaves: [&LinExpr<f64>; 2],
    regions: [&[Polytope<f64>]; 2],
    vars: &[VarId],
) -> (f64, usize) {
    let d = vars.len();
    let mut lp = LinearProgram::new(d + 2, Direction::Minimize);
    for j in 0..=d {
        lp.set_bounds(j, None, None);
    }
    lp.set_bounds(d + 1, Some(0.0), None);
    lp.objective[d + 1] = 1.0;
    let mut count = 0;
    for side in 0..2 {
        for r in regions[side] {
            let rv: Vec<VarId> = r.bounds.keys().copied().collect();
            for x in vertices(r) {
                count += 1;
                let point: Vec<f64> = vars
                    .iter()
                    .map(|v| rv.iter().position(|w| w == v).map(|i| x[i]).unwrap_or(0.0))
                    .collect();
                let f = eval_at(leaves[side], vars, &point);
                let mut row: Vec<(usize, f64)> = point.iter().copied().enumerate().collect();
                row.push((d, 1.0));
                // c(v) - f <= t  and  f - c(v) <= t
                let mut up = row.clone();
                up.push((d + 1, -1.0));
                lp.add_row(up, RowCmp::Le, f);
                let mut down = row;
                down.push((d + 1, 1.0));
                lp.add_row(down, RowCmp::Ge, f);
            }
        }
    }
    match lp.solve().expect("master LP solves") {
        SimplexOutcome::Optimal { value, .. } => (value, count),
        other => panic!("master LP: {:?}", other),
    }
}

/// Store with continuous `x`, `y` on [-10, 10] and booleans `b0`, `b1`.
pub fn store_xy() -> (DiagramStore<f64>, Vec<VarId>, Vec<BoolId>) {
    let mut s = DiagramStore::new();
    let x = s.declare_cont("x", -10.0, 10.0).unwrap();
    let y = s.declare_cont("y", -10.0, 10.0).unwrap();
    let b0 = s.declare_bool("b0");
    let b1 = s.declare_bool("b1");
    (s, vec![x, y], vec![b0, b1])
}

/// Random diagram of bounded depth over the given variables.
pub fn random_diagram(
    s: &mut DiagramStore<f64>,
    rng: &mut Rng8,
    vars: &[VarId],
    bools: &[BoolId],
    depth: usize,
) -> NodeId {
    if depth == 0 || rng.gen_bool(0.25) {
        let e = random_lin(rng, vars, 3.0);
        return s.mk_terminal(e);
    }
    let hi = random_diagram(s, rng, vars, bools, depth - 1);
    let lo = random_diagram(s, rng, vars, bools, depth - 1);
    if !bools.is_empty() && rng.gen_bool(0.3) {
        let b = bools[rng.gen_range(0..bools.len())];
        s.ite_bool(b, hi, lo)
    } else {
        let e = random_lin(rng, vars, 1.0);
        s.ite_expr(&e, hi, lo)
    }
}

pub fn random_point(rng: &mut Rng8, vars: &[VarId], bools: &[BoolId]) -> Assignment<f64> {
    let mut a = Assignment::new();
    for &v in vars {
        a.set_cont(v, rng.gen_range(-10.0..10.0));
    }
    for &b in bools {
        a.set_bool(b, rng.gen_bool(0.5));
    }
    a
}

pub mod fuzz;
pub mod oracle;
