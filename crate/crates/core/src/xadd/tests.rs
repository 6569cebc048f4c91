use super::*;
use crate::lp::{LinExpr, VarId};

fn store1(lo: f64, hi: f64) -> (DiagramStore<f64>, VarId) {
    let mut s = DiagramStore::new();
    let x = s.declare_cont("x", lo, hi).unwrap();
    (s, x)
}

fn at(s: &DiagramStore<f64>, f: NodeId, pts: &[(VarId, f64)]) -> f64 {
    let mut a = Assignment::new();
    for &(v, x) in pts {
        a.set_cont(v, x);
    }
    s.evaluate(f, &a).unwrap()
}

fn lin(terms: &[(VarId, f64)], c: f64) -> LinExpr<f64> {
    LinExpr::from_terms(terms.iter().copied(), c)
}

/// `{x > t: a; else: b}` for constants.
fn step(s: &mut DiagramStore<f64>, x: VarId, t: f64, a: f64, b: f64) -> NodeId {
    let (na, nb) = (s.constant(a), s.constant(b));
    s.ite_expr(&lin(&[(x, 1.0)], -t), na, nb)
}

#[test]
fn node_construction_rules() {
    let (mut s, x) = store1(-5.0, 5.0);
    let n = s.mk_terminal(lin(&[(x, 1.0)], 1.0));
    assert_eq!(s.mk_terminal(lin(&[(x, 1.0)], 1.0)), n);
    assert_eq!(s.mk_terminal(lin(&[(x, 0.0)], 0.0)), s.zero());
    let d = match s.ineq_decision(&lin(&[(x, 1.0)], 0.0)) {
        Test::Dec { id, .. } => id,
        t => panic!("{:?}", t),
    };
    assert_eq!(s.mk_internal(d, n, n), Ok(n));

    // a later decision cannot sit above an earlier one
    let d2 = match s.ineq_decision(&lin(&[(x, 1.0)], -1.0)) {
        Test::Dec { id, .. } => id,
        t => panic!("{:?}", t),
    };
    let one = s.one();
    let inner = s.mk_internal(d, n, one).unwrap();
    assert_eq!(s.mk_internal(d2, inner, one), Err(XaddError::OrderingViolation));
}

#[test]
fn canonical_decisions_are_shared() {
    let (mut s, x) = store1(-5.0, 5.0);
    let y = s.declare_cont("y", -5.0, 5.0).unwrap();
    let a = s.ineq_decision(&lin(&[(x, 2.0), (y, -4.0)], 2.0));
    let b = s.ineq_decision(&lin(&[(x, -0.5), (y, 1.0)], -0.5));
    match (a, b) {
        (Test::Dec { id: i, negated: false }, Test::Dec { id: j, negated: true }) => assert_eq!(i, j),
        other => panic!("{:?}", other),
    }
    assert_eq!(s.ineq_decision(&LinExpr::constant(3.0)), Test::Const(true));
}

#[test]
fn leafwise_add() {
    let (mut s, x) = store1(-5.0, 5.0);
    // {x < 1: 0; else 2}
    let f = step(&mut s, x, 1.0, 2.0, 0.0);
    let five = s.constant(5.0);
    let g = s.apply(f, five, BinOp::Add).unwrap();
    assert_eq!(at(&s, g, &[(x, 0.0)]), 5.0);
    assert_eq!(at(&s, g, &[(x, 3.0)]), 7.0);
    assert_eq!(s.node_count(g), 3);
}

#[test]
fn max_creates_new_decision() {
    let (mut s, x) = store1(-2.0, 2.0);
    let xv = s.var_node(x);
    let z = s.zero();
    let f = s.ite_expr(&lin(&[(x, 1.0)], 0.0), xv, z);
    let half = s.constant(0.5);
    let m = s.apply(f, half, BinOp::Max).unwrap();
    for i in 0..1000 {
        let p = -2.0 + 4.0 * (i as f64 + 0.5) / 1000.0;
        let expected = if p > 0.0 { p } else { 0.0 };
        assert!((at(&s, m, &[(x, p)]) - expected.max(0.5)).abs() < 1e-12);
    }
    // {x > 0.5: x; else 0.5}
    let want = s.ite_expr(&lin(&[(x, 1.0)], -0.5), xv, half);
    assert_eq!(s.max_abs_diff(m, want).unwrap(), 0.0);
}

#[test]
fn quadratic_product_rejected() {
    let (mut s, x) = store1(-2.0, 2.0);
    let xv = s.var_node(x);
    assert_eq!(s.apply(xv, xv, BinOp::Mul), Err(XaddError::NonLinearResult));
    let three = s.constant(3.0);
    let p = s.apply(xv, three, BinOp::Mul).unwrap();
    assert_eq!(s.terminal_expr(p), Some(&lin(&[(x, 3.0)], 0.0)));
}

#[test]
fn evaluation_examples() {
    let (mut s, x) = store1(0.0, 100.0);
    // {x < 3: a; else b}
    let f = step(&mut s, x, 3.0, 20.0, 10.0);
    assert_eq!(at(&s, f, &[(x, 1.0)]), 10.0);
    let t = s.mk_terminal(lin(&[(x, 2.0)], 1.0));
    assert_eq!(at(&s, t, &[(x, 3.0)]), 7.0);

    let band = band_40_60(&mut s, x);
    assert_eq!(at(&s, band, &[(x, 55.0)]), 40.0);
    assert_eq!(at(&s, band, &[(x, 65.0)]), -2.0);
    let err = s.evaluate(band, &Assignment::new()).unwrap_err();
    assert_eq!(err, XaddError::UnassignedVariable("x".into()));
}

/// `{x > 40 ∧ x < 60: 40; else: -2}`
fn band_40_60(s: &mut DiagramStore<f64>, x: VarId) -> NodeId {
    let forty = s.constant(40.0);
    let low = s.constant(-2.0);
    let inner = s.ite_expr(&lin(&[(x, -1.0)], 60.0), forty, low);
    s.ite_expr(&lin(&[(x, 1.0)], -40.0), inner, low)
}

#[test]
fn substitution_examples() {
    let mut s = DiagramStore::new();
    let x = s.declare_cont("x", 0.0, 100.0).unwrap();
    let a = s.declare_cont("a", -20.0, 20.0).unwrap();
    let shift = lin(&[(x, 1.0), (a, 1.0)], 0.0);

    let f = s.mk_terminal(lin(&[(x, 1.0)], 1.0));
    let g = s.substitute_cont(f, x, &shift);
    assert_eq!(s.terminal_expr(g), Some(&lin(&[(x, 1.0), (a, 1.0)], 1.0)));

    let band = band_40_60(&mut s, x);
    let moved = s.substitute_cont(band, x, &shift);
    assert_eq!(at(&s, moved, &[(x, 35.0), (a, 10.0)]), 40.0);
    assert_eq!(at(&s, moved, &[(x, 35.0), (a, 0.0)]), -2.0);

    assert_eq!(s.substitute_cont(band, a, &lin(&[(x, 2.0)], 0.0)), band);
}

#[test]
fn restriction_examples() {
    let (mut s, x) = store1(-1.0, 1.0);
    let b = s.declare_bool("b");
    let (one, zero) = (s.one(), s.zero());
    let f = s.ite_bool(b, one, zero);
    assert_eq!(s.restrict_bool(f, b, true), one);
    let xv = s.var_node(x);
    assert_eq!(s.restrict_bool(xv, b, false), xv);
    let nx = s.mk_terminal(lin(&[(x, -1.0)], 0.0));
    let g = s.ite_bool(b, xv, nx);
    assert_eq!(s.restrict_bool(g, b, false), nx);
}

#[test]
fn reduce_collapses_implied_and_empty_branches() {
    let (mut s, x) = store1(0.0, 5.0);
    let (a, b, c) = (s.constant(1.0), s.constant(2.0), s.constant(3.0));
    let outer = match s.ineq_decision(&lin(&[(x, 1.0)], 0.0)) {
        Test::Dec { id, .. } => id,
        t => panic!("{:?}", t),
    };
    let inner = match s.ineq_decision(&lin(&[(x, 1.0)], 1.0)) {
        Test::Dec { id, .. } => id,
        t => panic!("{:?}", t),
    };
    let n_inner = s.mk_internal(inner, a, b).unwrap();
    let f = s.mk_internal(outer, n_inner, c).unwrap();
    let r = s.reduce_lp(f);
    assert_eq!(r, a);
    assert_eq!(s.reduce_lp(r), r);

    // lo branch x <= -1 is empty under the box
    assert_eq!(s.reduce_lp(n_inner), a);

    // a genuinely two-sided diagram is left alone
    let g = step(&mut s, x, 2.0, 1.0, 2.0);
    assert_eq!(s.reduce_lp(g), g);
}

#[test]
fn partition_examples() {
    let mut s = DiagramStore::new();
    let x = s.declare_cont("x", -1.0, 1.0).unwrap();
    let y = s.declare_cont("y", -1.0, 1.0).unwrap();
    let f = step(&mut s, x, 0.0, 1.0, 2.0);
    let parts = s.enumerate_partitions(f);
    assert_eq!(parts.len(), 2);
    assert!(parts.iter().all(|p| p.regions.len() == 1));

    let t = s.constant(4.0);
    let parts = s.enumerate_partitions(t);
    assert_eq!(parts.len(), 1);
    assert_eq!(parts[0].regions.len(), 1);
    assert!(parts[0].regions[0].polytope.constraints.is_empty());

    // {x > 0: {y > 0: A; else B}; else A}
    let (a, b) = (s.constant(1.0), s.constant(2.0));
    let inner = s.ite_expr(&lin(&[(y, 1.0)], 0.0), a, b);
    let g = s.ite_expr(&lin(&[(x, 1.0)], 0.0), inner, a);
    let parts = s.enumerate_partitions(g);
    let pa = parts.iter().find(|p| p.leaf_node == a).unwrap();
    assert_eq!(pa.regions.len(), 2);
    assert_eq!(pa.regions[0].polytope.dim(), 2);
}

#[test]
fn dirac_integration_examples() {
    let mut s = DiagramStore::new();
    let x = s.declare_cont("x", 0.0, 400.0).unwrap();
    let a = s.declare_cont("a", -20.0, 20.0).unwrap();
    let xp = s.declare_cont("x'", 0.0, 400.0).unwrap();

    let q = s.mk_terminal(lin(&[(xp, 2.0)], 3.0));
    let ple = s.mk_terminal(lin(&[(x, 1.0), (a, 1.0)], 0.0));
    let r = s.integrate_dirac(q, xp, ple);
    assert_eq!(s.terminal_expr(r), Some(&lin(&[(x, 2.0), (a, 2.0)], 3.0)));

    let q = s.var_node(xp);
    let hi = s.mk_terminal(lin(&[(x, 1.0)], 50.0));
    let lo = s.constant(200.0);
    let ple = s.ite_expr(&lin(&[(x, 1.0)], -150.0), hi, lo);
    let r = s.integrate_dirac(q, xp, ple);
    assert_eq!(r, ple);

    let q = s.var_node(x);
    assert_eq!(s.integrate_dirac(q, xp, ple), q);
}

#[test]
fn boolean_marginal_examples() {
    let mut s: DiagramStore<f64> = DiagramStore::new();
    let d = s.declare_bool("d'");
    let (ten, zero) = (s.constant(10.0), s.zero());
    let q = s.ite_bool(d, ten, zero);
    let p = s.constant(0.6);
    let r = s.marginalize_bool(q, d, p).unwrap();
    assert_eq!(s.terminal_expr(r).and_then(|e| e.as_constant()), Some(6.0));

    assert_eq!(s.marginalize_bool(ten, d, p).unwrap(), ten);
    let one = s.one();
    assert_eq!(s.marginalize_bool(q, d, one).unwrap(), ten);

    let bad = s.constant(1.3);
    assert!(matches!(
        s.marginalize_bool(q, d, bad),
        Err(XaddError::InvalidProbability(_))
    ));
    let x = s.declare_cont("x", 0.0, 1.0).unwrap();
    let xv = s.var_node(x);
    assert!(matches!(
        s.marginalize_bool(q, d, xv),
        Err(XaddError::InvalidProbability(_))
    ));
}

#[test]
fn max_param_examples() {
    let mut s = DiagramStore::new();
    let x = s.declare_cont("x", 0.0, 5.0).unwrap();
    let y = s.declare_cont("y", -10.0, 10.0).unwrap();

    let q = s.mk_terminal(lin(&[(x, 1.0), (y, 1.0)], 0.0));
    let r = s.max_param(q, y, -1.0, 1.0).unwrap();
    assert_eq!(s.terminal_expr(r), Some(&lin(&[(x, 1.0)], 1.0)));

    let neg = s.mk_terminal(lin(&[(y, -0.1)], 0.0));
    let pos = s.mk_terminal(lin(&[(y, 0.1)], 0.0));
    let q = s.ite_expr(&lin(&[(y, 1.0)], 0.0), neg, pos);
    let r = s.max_param(q, y, -10.0, 10.0).unwrap();
    assert_eq!(r, s.zero());

    // {y < x: y; else x} with y in [0, 10]
    let yv = s.var_node(y);
    let xv = s.var_node(x);
    let q = s.ite_expr(&lin(&[(x, 1.0), (y, -1.0)], 0.0), yv, xv);
    let r = s.max_param(q, y, 0.0, 10.0).unwrap();
    for i in 0..=50 {
        let p = i as f64 * 0.1;
        assert!((at(&s, r, &[(x, p)]) - p).abs() < 1e-9, "x = {}", p);
    }
    assert!(!s.cont_support(r).contains(&y));
}

#[test]
fn max_abs_diff_examples() {
    let (mut s, x) = store1(0.0, 2.0);
    let f = step(&mut s, x, 1.0, 1.0, 0.0);
    assert_eq!(s.max_abs_diff(f, f).unwrap(), 0.0);
    let g = s.mk_terminal(lin(&[(x, 1.0)], -0.5));
    assert!((s.max_abs_diff(f, g).unwrap() - 0.5).abs() < 1e-12);
    let (a, b) = (s.constant(3.0), s.constant(1.0));
    assert_eq!(s.max_abs_diff(a, b).unwrap(), 2.0);
}

#[test]
fn rendering() {
    let (mut s, x) = store1(-5.0, 5.0);
    let t = s.constant(1.0);
    assert_eq!(s.node_count(t), 1);
    // {x < 3: 1; else 2}
    let f = step(&mut s, x, 3.0, 2.0, 1.0);
    assert_eq!(s.node_count(f), 3);
    let case = s.print_case(f);
    assert_eq!(case, "x - 3 > 0 : 2\nx - 3 <= 0 : 1\n");
    assert_eq!(s.print_case(t), "true : 1\n");
    let dot = s.export_dot(f);
    assert!(dot.contains("n0 -> n1 [style=solid]"));
    assert!(dot.contains("n0 -> n2 [style=dotted]"));
    assert_eq!(dot, s.export_dot(f));
}

#[test]
fn text_round_trip() {
    let mut s = DiagramStore::new();
    let x = s.declare_cont("x", -10.0, 10.0).unwrap();
    let y = s.declare_cont("y", 0.0, 4.5).unwrap();
    let b = s.declare_bool("b");
    let xv = s.mk_terminal(lin(&[(x, 2.0), (y, -0.25)], 1.5));
    let c = s.constant(-3.0);
    let inner = s.ite_bool(b, xv, c);
    let f0 = s.ite_expr(&lin(&[(x, 1.0), (y, 0.5)], -1.0), inner, c);
    let ninf = s.neg_infinity();
    let f = s.ite_expr(&lin(&[(y, 1.0)], -4.0), ninf, f0);
    let text = s.write_text(f);

    let mut t: DiagramStore<f64> = DiagramStore::new();
    let g = t.read_text(&text).unwrap();
    assert_eq!(t.write_text(g), text);
    assert_eq!(t.node_count(g), s.node_count(f));

    // reading into the original store gives back the same node
    assert_eq!(s.read_text(&text).unwrap(), f);
}

#[test]
fn text_errors_carry_lines() {
    let mut s: DiagramStore<f64> = DiagramStore::new();
    let e = s.read_text("cvar x 0 1\n(x > 0\n  [1]\n  [z])").unwrap_err();
    assert!(matches!(e, XaddError::Syntax { line: 4, .. }), "{:?}", e);
    let e = s.read_text("cvar y 1 0\n[1]").unwrap_err();
    assert!(matches!(e, XaddError::Syntax { line: 1, .. }), "{:?}", e);
}
