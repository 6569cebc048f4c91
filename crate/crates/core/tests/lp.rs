mod common;

use basdp::lp::{
    has_interior, lp_solve, maximize_over, polytope_feasible, Direction, LinExpr, LinearProgram, LpProblem, LpResult,
    Polytope, RowCmp, SimplexOutcome, VarId,
};
use common::*;
use rand::Rng;

#[test]
fn simplex_matches_vertex_enumeration() {
    let mut r = rng(11);
    for case in 0..300 {
        let d = r.gen_range(1..=3);
        let vars: Vec<VarId> = (0..d as u32).map(VarId).collect();
        let mut p = Polytope::with_box(vars.iter().map(|&v| (v, -10.0, 10.0)));
        for _ in 0..r.gen_range(0..=6) {
            // arbitrary cuts, so some regions come out empty
            p.push(basdp::lp::Constraint::ge(random_lin(&mut r, &vars, 1.0)));
        }
        let obj = random_lin(&mut r, &vars, 2.0);
        let want = max_by_vertices(&obj, &p);
        let got = lp_solve(&LpProblem {
            objective: obj.clone(),
            direction: Direction::Maximize,
            region: p.clone(),
        })
        .unwrap();
        match (want, got) {
            (Some(w), LpResult::Optimal { value, point }) => {
                assert!((w - value).abs() < 1e-6, "case {}: {} vs {}", case, w, value);
                assert!(p.contains(|v| point[&v], 1e-7), "case {}: optimum outside region", case);
            }
            (None, LpResult::Infeasible) => assert!(!polytope_feasible(&p)),
            (w, g) => panic!("case {}: oracle {:?}, simplex {:?}", case, w, g),
        }
    }
}

#[test]
fn minimize_equals_negated_maximize() {
    let mut r = rng(12);
    let vars = [VarId(0), VarId(1)];
    for _ in 0..100 {
        let p = random_region(&mut r, &vars, 4);
        let obj = random_lin(&mut r, &vars, 2.0);
        let min = match lp_solve(&LpProblem {
            objective: obj.clone(),
            direction: Direction::Minimize,
            region: p.clone(),
        })
        .unwrap()
        {
            LpResult::Optimal { value, .. } => value,
            other => panic!("{:?}", other),
        };
        let (_, max_neg) = maximize_over(&-&obj, &p).unwrap();
        assert!((min + max_neg).abs() < 1e-7);
    }
}

#[test]
fn interior_versus_feasibility() {
    let x = VarId(0);
    let b = Polytope::with_box([(x, 0.0, 1.0)]);
    // x >= 1 touches the box only at a point
    let pt = b
        .clone()
        .with(basdp::lp::Constraint::ge(LinExpr::from_terms([(x, 1.0)], -1.0)));
    assert!(polytope_feasible(&pt));
    assert!(!has_interior(&pt));
    // x > 1 is empty
    let empty = b
        .clone()
        .with(basdp::lp::Constraint::gt(LinExpr::from_terms([(x, 1.0)], -1.0)));
    assert!(!polytope_feasible(&empty));
    assert!(has_interior(&b));
}

fn read_master(text: &str) -> LinearProgram<f64> {
    let mut lp = LinearProgram::new(4, Direction::Minimize);
    for j in 0..3 {
        lp.set_bounds(j, None, None);
    }
    lp.set_bounds(3, Some(0.0), None);
    lp.objective[3] = 1.0;
    for line in text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()) {
        let v: Vec<f64> = line.split_whitespace().map(|t| t.parse().unwrap()).collect();
        lp.add_row(vec![(0, v[0]), (1, v[1]), (2, v[2]), (3, v[3])], RowCmp::Ge, v[4]);
    }
    lp
}

#[test]
fn wide_degenerate_master_is_solved() {
    // a master LP from a 2-D merge that once cycled into a false infeasible
    let lp = read_master(include_str!("data/wide_master.lp"));
    match lp.solve().unwrap() {
        SimplexOutcome::Optimal { value, x } => {
            assert!((value - 5.835197893748888).abs() < 1e-6, "{}", value);
            for row in &lp.rows {
                let lhs: f64 = row.coeffs.iter().map(|&(j, c)| c * x[j]).sum();
                assert!(lhs >= row.rhs - 1e-6);
            }
        }
        other => panic!("{:?}", other),
    }
}
