mod common;

use basdp::compress::{pair_leaf_approx, LeafRecord};
use basdp::lp::VarId;
use common::*;
use rand::Rng;

#[test]
fn compression_stays_within_budget() {
    let mut r = rng(41);
    for case in 0..30 {
        let (mut s, vars, _) = store_xy();
        let dims = r.gen_range(1..=2);
        let f = random_diagram(&mut s, &mut r, &vars[..dims], &[], 4);
        let f = s.reduce_lp(f);
        let spread = s.max_abs(f).unwrap();
        let eps = r.gen_range(0.01..0.5) * spread.max(1.0);
        let (g, used) = s.xadd_compress(f, eps).unwrap();
        assert!(used < eps || used == 0.0, "case {}", case);
        let diff = s.max_abs_diff(f, g).unwrap();
        assert!(diff <= used + 1e-6, "case {}: diff {} > used {}", case, diff, used);
        assert!(s.node_count(g) <= s.node_count(f), "case {}", case);
    }
}

#[test]
fn zero_budget_is_identity() {
    let mut r = rng(42);
    let (mut s, vars, bools) = store_xy();
    let f = random_diagram(&mut s, &mut r, &vars, &bools, 4);
    assert_eq!(s.xadd_compress(f, 0.0).unwrap(), (f, 0.0));
}

#[test]
fn growing_budgets_end_in_one_leaf() {
    let mut r = rng(43);
    let (mut s, vars, _) = store_xy();
    let f = random_diagram(&mut s, &mut r, &vars, &[], 4);
    let mut last = usize::MAX;
    for eps in [1.0, 5.0, 25.0, 1e3] {
        let (g, used) = s.xadd_compress(f, eps).unwrap();
        assert!(used < eps);
        let n = s.node_count(g);
        assert!(n <= s.node_count(f));
        last = last.min(n);
    }
    // a budget above the whole range merges everything into one leaf
    assert_eq!(last, 1);
}

#[test]
fn pair_merge_is_the_vertex_minimax() {
    let mut r = rng(44);
    for case in 0..60 {
        let d = r.gen_range(1..=3);
        let vars: Vec<VarId> = (0..d as u32).map(VarId).collect();
        let mk = |r: &mut Rng8| LeafRecord {
            leaf: random_lin(r, &vars, 2.0),
            regions: (0..r.gen_range(1..=2)).map(|_| random_region(r, &vars, 6)).collect(),
            error: 0.0,
        };
        let (a, b) = (mk(&mut r), mk(&mut r));
        let m = pair_leaf_approx(&a, &b).unwrap();
        let (want, nverts) = chebyshev_by_vertices([&a.leaf, &b.leaf], [&a.regions, &b.regions], &vars);
        assert!((m.eps - want).abs() < 1e-6, "case {}: {} vs {}", case, m.eps, want);
        assert!(m.generated <= nverts, "case {}: {} > {}", case, m.generated, nverts);
        // the hyperplane really achieves its error at every vertex
        for (rec, leaf) in [(&a, &a.leaf), (&b, &b.leaf)] {
            for reg in &rec.regions {
                let rv: Vec<VarId> = reg.bounds.keys().copied().collect();
                for x in vertices(reg) {
                    let dev = eval_at(leaf, &rv, &x) - eval_at(&m.coeffs, &rv, &x);
                    assert!(dev.abs() <= m.eps + 1e-6);
                }
            }
        }
    }
}
