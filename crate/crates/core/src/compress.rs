//! Bounded-error compression by successive pairwise leaf merging.
//!
//! Two leaves are merged into the single hyperplane minimizing the maximum
//! deviation from both over their regions. That minimax problem is solved by
//! constraint generation: a master LP over the hyperplane coefficients sees
//! only the polytope vertices found so far, and each round adds the vertices
//! where the current hyperplane is worst.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use crate::lp::{self, Direction, LinExpr, LinearProgram, LpError, Polytope, RowCmp, SimplexOutcome, VarId};
use crate::scalar::{quantize, Scalar};
use crate::xadd::{DiagramStore, Node, NodeId, XaddError};

/// Rounds of constraint generation before giving up on exact optimality.
const MAX_ROUNDS: usize = 1000;

/// A leaf with the regions where it is valid and the error it already
/// carries from earlier merges.
#[derive(Clone, Debug)]
pub struct LeafRecord<T> {
    pub leaf: LinExpr<T>,
    pub regions: Vec<Polytope<T>>,
    pub error: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MergeResult<T> {
    /// The merged hyperplane.
    pub coeffs: LinExpr<T>,
    /// Its maximum deviation from either leaf over their regions.
    pub eps: T,
    /// Distinct (leaf, vertex) constraints handed to the master LP.
    pub generated: usize,
}

/// Optimal single hyperplane replacing both leaves.
pub fn pair_leaf_approx<T: Scalar>(l1: &LeafRecord<T>, l2: &LeafRecord<T>) -> Result<MergeResult<T>, LpError> {
    Ok(pair_within(l1, l2, None)?.expect("no budget, no early exit"))
}

struct Vertex<T> {
    side: usize,
    region: usize,
    point: Vec<T>,
}

/// Like [`pair_leaf_approx`], but returns `None` as soon as the master LP
/// proves the optimum is at least `budget`.
fn pair_within<T: Scalar>(
    l1: &LeafRecord<T>,
    l2: &LeafRecord<T>,
    budget: Option<T>,
) -> Result<Option<MergeResult<T>>, LpError> {
    let leaves = [&l1.leaf, &l2.leaf];
    let mut var_set: BTreeSet<VarId> = BTreeSet::new();
    for r in l1.regions.iter().chain(&l2.regions) {
        var_set.extend(r.vars());
    }
    var_set.extend(l1.leaf.vars());
    var_set.extend(l2.leaf.vars());
    let vars: Vec<VarId> = var_set.into_iter().collect();
    let col: HashMap<VarId, usize> = vars.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let d = vars.len();

    let mut seen: HashSet<(usize, Vec<i64>)> = HashSet::new();
    let mut verts: Vec<Vertex<T>> = Vec::new();
    let mut c = LinExpr::zero();
    let mut master_eps: Option<T> = None;
    let tol = T::lit(1e-7);

    for _ in 0..MAX_ROUNDS {
        // subproblems: worst vertices of +-(f - c) over every region
        let mut worst = T::zero();
        let mut added = 0;
        for (side, rec) in [l1, l2].into_iter().enumerate() {
            let diff = leaves[side] - &c;
            let neg = -&diff;
            for (ri, region) in rec.regions.iter().enumerate() {
                for obj in [&diff, &neg] {
                    let (pt, val) = lp::maximize_over(obj, region)?;
                    worst = worst.max(val);
                    let mut point = vec![T::zero(); d];
                    for (v, x) in pt {
                        point[col[&v]] = x;
                    }
                    let key = (side, point.iter().map(|&x| quantize(x)).collect());
                    if seen.insert(key) {
                        verts.push(Vertex {
                            side,
                            region: ri,
                            point,
                        });
                        added += 1;
                    }
                }
            }
        }
        if let Some(m) = master_eps {
            if worst <= m + tol || added == 0 {
                return Ok(Some(MergeResult {
                    coeffs: c,
                    eps: worst,
                    generated: verts.len(),
                }));
            }
        }
        let (nc, m) = solve_master(&verts, leaves, &vars, &col, None)?;
        if let Some(b) = budget {
            if m >= b {
                return Ok(None);
            }
        }
        let slack = T::zero_tol() * (T::one() + m);
        c = match solve_master(&verts, leaves, &vars, &col, Some(m + slack)) {
            Ok((tied, _)) => tied,
            Err(_) => nc,
        };
        master_eps = Some(m);
    }
    // out of rounds: report the verified error of the last hyperplane
    let mut worst = T::zero();
    for (side, rec) in [l1, l2].into_iter().enumerate() {
        let diff = leaves[side] - &c;
        for region in &rec.regions {
            for obj in [diff.clone(), -&diff] {
                worst = worst.max(lp::maximize_over(&obj, region)?.1);
            }
        }
    }
    Ok(Some(MergeResult {
        coeffs: c,
        eps: worst,
        generated: verts.len(),
    }))
}

/// `min eps` s.t. `|f(v) - c·(v,1)| <= eps` at every generated vertex.
///
/// With `cap`, eps is held at most `cap` and the optimal hyperplanes are
/// tie-broken by the total deviation at each region's vertex centroid.
fn solve_master<T: Scalar>(
    verts: &[Vertex<T>],
    leaves: [&LinExpr<T>; 2],
    vars: &[VarId],
    col: &HashMap<VarId, usize>,
    cap: Option<T>,
) -> Result<(LinExpr<T>, T), LpError> {
    let d = vars.len();
    let mut centroids: BTreeMap<(usize, usize), (Vec<T>, usize)> = BTreeMap::new();
    if cap.is_some() {
        for v in verts {
            let e = centroids
                .entry((v.side, v.region))
                .or_insert_with(|| (vec![T::zero(); d], 0));
            for (acc, &x) in e.0.iter_mut().zip(&v.point) {
                *acc = *acc + x;
            }
            e.1 += 1;
        }
    }
    // columns: c_0..c_{d-1}, c_const, eps, then one deviation per centroid
    let mut prog = LinearProgram::new(d + 2 + centroids.len(), Direction::Minimize);
    prog.set_bounds(d + 1, Some(T::zero()), cap);
    match cap {
        None => prog.objective[d + 1] = T::one(),
        Some(_) => {
            for (k, (&(side, _), (sum, n))) in centroids.iter().enumerate() {
                let t = d + 2 + k;
                let p: Vec<T> = sum.iter().map(|&x| x / T::lit(*n as f64)).collect();
                let fp = leaves[side].eval(|x| p[col[&x]]);
                prog.set_bounds(t, Some(T::zero()), None);
                prog.objective[t] = T::one();
                let mut row: Vec<(usize, T)> = (0..d).map(|j| (j, p[j])).collect();
                row.push((d, T::one()));
                let mut up = row.clone();
                up.push((t, T::one()));
                prog.add_row(up, RowCmp::Ge, fp);
                let mut down: Vec<(usize, T)> = row.into_iter().map(|(j, a)| (j, -a)).collect();
                down.push((t, T::one()));
                prog.add_row(down, RowCmp::Ge, -fp);
            }
        }
    }
    for v in verts {
        let fv = leaves[v.side].eval(|x| v.point[col[&x]]);
        let mut row: Vec<(usize, T)> = (0..d).map(|j| (j, v.point[j])).collect();
        row.push((d, T::one()));
        // eps + c(v) >= f(v)
        let mut up = row.clone();
        up.push((d + 1, T::one()));
        prog.add_row(up, RowCmp::Ge, fv);
        // eps - c(v) >= -f(v)
        let mut down: Vec<(usize, T)> = row.into_iter().map(|(j, a)| (j, -a)).collect();
        down.push((d + 1, T::one()));
        prog.add_row(down, RowCmp::Ge, -fv);
    }
    match prog.solve()? {
        SimplexOutcome::Optimal { x, .. } => {
            let c = LinExpr::from_terms(vars.iter().enumerate().map(|(j, &v)| (v, x[j])), x[d]);
            Ok((c, x[d + 1].max(T::zero())))
        }
        // eps >= 0 keeps the master bounded below and it is always feasible
        _ => Err(LpError::IterationLimit),
    }
}

/// A leaf record plus the terminal nodes it stands for.
struct Group<T> {
    rec: LeafRecord<T>,
    members: Vec<NodeId>,
}

impl<T: Scalar> DiagramStore<T> {
    /// Merge leaves of `x` while the accumulated error stays below `eps`.
    /// Returns the compressed diagram and the largest error actually used.
    pub fn xadd_compress(&mut self, x: NodeId, eps: T) -> Result<(NodeId, T), XaddError> {
        if eps.is_nan() || eps <= T::zero() || self.has_infinite_leaf(x) {
            return Ok((x, T::zero()));
        }
        let support = self.cont_support(x);
        let parts = self.enumerate_partitions_over(x, &support);
        if parts.len() < 2 {
            return Ok((x, T::zero()));
        }
        // cases in the order the diagram lists them
        let mut open: std::collections::VecDeque<Group<T>> = parts
            .into_iter()
            .map(|p| Group {
                rec: LeafRecord {
                    leaf: p.leaf,
                    regions: p.regions.into_iter().map(|r| r.polytope).collect(),
                    error: T::zero(),
                },
                members: vec![p.leaf_node],
            })
            .collect();

        let mut closed: Vec<Group<T>> = Vec::new();
        while let Some(mut l1) = open.pop_front() {
            let mut i = 0;
            while i < open.len() {
                let l2 = &open[i];
                let carried = l1.rec.error.max(l2.rec.error);
                let budget = eps - carried;
                // an LP that fails numerically just means no merge
                let merged = match pair_within(&l1.rec, &l2.rec, Some(budget)) {
                    Ok(Some(m)) if m.eps + carried < eps => Some(m),
                    _ => None,
                };
                match merged {
                    Some(m) => {
                        let l2 = open.remove(i).expect("index in range");
                        let mut regions = l1.rec.regions;
                        regions.extend(l2.rec.regions);
                        let mut members = l1.members;
                        members.extend(l2.members);
                        l1 = Group {
                            rec: LeafRecord {
                                leaf: m.coeffs,
                                regions,
                                error: m.eps + carried,
                            },
                            members,
                        };
                    }
                    None => i += 1,
                }
            }
            closed.push(l1);
        }

        let mut replace: HashMap<NodeId, NodeId> = HashMap::new();
        let mut used = T::zero();
        for g in closed {
            if g.members.len() < 2 {
                continue;
            }
            used = used.max(g.rec.error);
            let t = self.mk_terminal(g.rec.leaf);
            for m in g.members {
                replace.insert(m, t);
            }
        }
        if replace.is_empty() {
            return Ok((x, T::zero()));
        }
        let r = self.replace_terminals(x, &replace);
        Ok((self.reduce_lp(r), used))
    }

    fn replace_terminals(&mut self, f: NodeId, map: &HashMap<NodeId, NodeId>) -> NodeId {
        let mut memo: HashMap<NodeId, NodeId> = HashMap::new();
        for n in self.reachable(f) {
            let r = match *self.node(n) {
                Node::Terminal(_) => map.get(&n).copied().unwrap_or(n),
                Node::Internal { dec, hi, lo } => {
                    let (h, l) = (memo[&hi], memo[&lo]);
                    self.intern_internal(dec, h, l)
                }
            };
            memo.insert(n, r);
        }
        memo[&f]
    }

    /// `fraction` of the largest absolute value of `x`.
    pub fn relative_epsilon(&mut self, x: NodeId, fraction: T) -> Result<T, XaddError> {
        Ok(fraction * self.max_abs(x)?)
    }
}
