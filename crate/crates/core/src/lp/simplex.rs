//! Dense two-phase tableau simplex; Dantzig pricing with a Bland fallback.

use crate::scalar::Scalar;

use super::LpError;

/// Iteration cap shared by both phases.
pub const MAX_PIVOTS: usize = 100_000;

/// Consecutive degenerate pivots before switching to Bland's rule.
const DEGENERATE_RUN: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Maximize,
    Minimize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowCmp {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Row<T> {
    pub coeffs: Vec<(usize, T)>,
    pub cmp: RowCmp,
    pub rhs: T,
}

/// A linear program over `num_vars` columns with optional simple bounds.
#[derive(Clone, Debug)]
pub struct LinearProgram<T> {
    pub lower: Vec<Option<T>>,
    pub upper: Vec<Option<T>>,
    pub rows: Vec<Row<T>>,
    pub objective: Vec<T>,
    pub direction: Direction,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SimplexOutcome<T> {
    Optimal { x: Vec<T>, value: T },
    Infeasible,
    Unbounded,
}

impl<T: Scalar> LinearProgram<T> {
    pub fn new(num_vars: usize, direction: Direction) -> Self {
        LinearProgram {
            lower: vec![None; num_vars],
            upper: vec![None; num_vars],
            rows: Vec::new(),
            objective: vec![T::zero(); num_vars],
            direction,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn set_bounds(&mut self, var: usize, lo: Option<T>, hi: Option<T>) {
        self.lower[var] = lo;
        self.upper[var] = hi;
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, T)>, cmp: RowCmp, rhs: T) {
        self.rows.push(Row { coeffs, cmp, rhs });
    }

    pub fn solve(&self) -> Result<SimplexOutcome<T>, LpError> {
        Tableau::build(self)?.solve(self)
    }
}

/// `x_j = offset + sum(sign * z_k)` for the structural columns `z_k >= 0`.
struct ColumnMap<T> {
    offset: T,
    parts: Vec<(usize, T)>,
}

struct Tableau<T> {
    /// rows x (cols + 1); last column is the right-hand side
    a: Vec<Vec<T>>,
    basis: Vec<usize>,
    cols: usize,
    first_art: usize,
    maps: Vec<ColumnMap<T>>,
    n_struct: usize,
}

impl<T: Scalar> Tableau<T> {
    fn build(lp: &LinearProgram<T>) -> Result<Self, LpError> {
        let n = lp.num_vars();
        let mut maps = Vec::with_capacity(n);
        let mut n_struct = 0usize;
        // extra rows z <= hi - lo for doubly bounded variables
        let mut bound_rows: Vec<(usize, T)> = Vec::new();
        for j in 0..n {
            match (lp.lower[j], lp.upper[j]) {
                (Some(lo), hi) => {
                    if let Some(hi) = hi {
                        if hi < lo - T::feas_tol() {
                            return Err(LpError::InvalidBounds);
                        }
                        bound_rows.push((n_struct, (hi - lo).max(T::zero())));
                    }
                    maps.push(ColumnMap {
                        offset: lo,
                        parts: vec![(n_struct, T::one())],
                    });
                    n_struct += 1;
                }
                (None, Some(hi)) => {
                    maps.push(ColumnMap {
                        offset: hi,
                        parts: vec![(n_struct, -T::one())],
                    });
                    n_struct += 1;
                }
                (None, None) => {
                    maps.push(ColumnMap {
                        offset: T::zero(),
                        parts: vec![(n_struct, T::one()), (n_struct + 1, -T::one())],
                    });
                    n_struct += 2;
                }
            }
        }

        // rows in z-space, rhs >= 0
        let mut zrows: Vec<(Vec<T>, RowCmp, T)> = Vec::new();
        for row in &lp.rows {
            let mut dense = vec![T::zero(); n_struct];
            let mut rhs = row.rhs;
            for &(j, c) in &row.coeffs {
                rhs = rhs - c * maps[j].offset;
                for &(k, s) in &maps[j].parts {
                    dense[k] = dense[k] + c * s;
                }
            }
            zrows.push((dense, row.cmp, rhs));
        }
        for (k, cap) in bound_rows {
            let mut dense = vec![T::zero(); n_struct];
            dense[k] = T::one();
            zrows.push((dense, RowCmp::Le, cap));
        }
        for r in zrows.iter_mut() {
            if r.2 < T::zero() {
                for v in r.0.iter_mut() {
                    *v = -*v;
                }
                r.2 = -r.2;
                r.1 = match r.1 {
                    RowCmp::Le => RowCmp::Ge,
                    RowCmp::Ge => RowCmp::Le,
                    RowCmp::Eq => RowCmp::Eq,
                };
            }
        }

        let n_slack = zrows.iter().filter(|r| r.1 != RowCmp::Eq).count();
        let n_art = zrows.iter().filter(|r| r.1 != RowCmp::Le).count();
        let first_slack = n_struct;
        let first_art = n_struct + n_slack;
        let cols = first_art + n_art;
        let m = zrows.len();
        let mut a = vec![vec![T::zero(); cols + 1]; m];
        let mut basis = vec![0usize; m];
        let (mut s, mut art) = (first_slack, first_art);
        for (i, (dense, cmp, rhs)) in zrows.into_iter().enumerate() {
            a[i][..n_struct].copy_from_slice(&dense);
            a[i][cols] = rhs;
            match cmp {
                RowCmp::Le => {
                    a[i][s] = T::one();
                    basis[i] = s;
                    s += 1;
                }
                RowCmp::Ge => {
                    a[i][s] = -T::one();
                    s += 1;
                    a[i][art] = T::one();
                    basis[i] = art;
                    art += 1;
                }
                RowCmp::Eq => {
                    a[i][art] = T::one();
                    basis[i] = art;
                    art += 1;
                }
            }
        }
        Ok(Tableau {
            a,
            basis,
            cols,
            first_art,
            maps,
            n_struct,
        })
    }

    fn pivot(&mut self, obj: &mut [T], r: usize, c: usize) {
        let width = self.cols + 1;
        let p = self.a[r][c];
        for j in 0..width {
            self.a[r][j] = self.a[r][j] / p;
        }
        self.a[r][c] = T::one();
        let prow = self.a[r].clone();
        for (i, row) in self.a.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != T::zero() {
                for j in 0..width {
                    row[j] = row[j] - f * prow[j];
                }
                row[c] = T::zero();
            }
        }
        let f = obj[c];
        if f != T::zero() {
            for j in 0..width {
                obj[j] = obj[j] - f * prow[j];
            }
            obj[c] = T::zero();
        }
        self.basis[r] = c;
    }

    /// Maximize with reduced-cost row `obj` (entries `-c_j`); `limit` bounds
    /// the usable columns. Returns `false` when unbounded.
    ///
    /// Prices by the most negative reduced cost and falls back to Bland's
    /// rule after a run of degenerate pivots.
    fn run(&mut self, obj: &mut [T], limit: usize, pivots: &mut usize) -> Result<bool, LpError> {
        let tol = T::opt_tol();
        let rhs = self.cols;
        let mut degenerate = 0usize;
        loop {
            let bland = degenerate > DEGENERATE_RUN;
            let enter = if bland {
                (0..limit).find(|&j| obj[j] < -tol)
            } else {
                (0..limit)
                    .filter(|&j| obj[j] < -tol)
                    .min_by(|&a, &b| obj[a].partial_cmp(&obj[b]).unwrap_or(std::cmp::Ordering::Equal))
            };
            let Some(enter) = enter else {
                return Ok(true);
            };
            let mut leave: Option<(usize, T)> = None;
            for i in 0..self.a.len() {
                let v = self.a[i][enter];
                if v > tol {
                    // drift can leave a basic value a hair below zero
                    let ratio = self.a[i][rhs].max(T::zero()) / v;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            let better = if ratio < lr - tol {
                                true
                            } else if ratio <= lr + tol {
                                if bland {
                                    self.basis[i] < self.basis[li]
                                } else {
                                    v > self.a[li][enter]
                                }
                            } else {
                                false
                            };
                            if better {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            let Some((r, ratio)) = leave else {
                return Ok(false);
            };
            if ratio <= tol {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(obj, r, enter);
            for row in self.a.iter_mut() {
                if row[rhs].abs() < T::zero_tol() {
                    row[rhs] = T::zero();
                }
            }
            *pivots += 1;
            if *pivots > MAX_PIVOTS {
                return Err(LpError::IterationLimit);
            }
        }
    }

    fn solve(mut self, lp: &LinearProgram<T>) -> Result<SimplexOutcome<T>, LpError> {
        let width = self.cols + 1;
        let mut pivots = 0usize;

        // phase 1: maximize -sum(artificials)
        if self.first_art < self.cols {
            let mut obj = vec![T::zero(); width];
            for v in obj.iter_mut().take(self.cols).skip(self.first_art) {
                *v = T::one();
            }
            for i in 0..self.a.len() {
                if self.basis[i] >= self.first_art {
                    for (o, a) in obj.iter_mut().zip(&self.a[i]) {
                        *o = *o - *a;
                    }
                }
            }
            self.run(&mut obj, self.cols, &mut pivots)?;
            // obj[rhs] holds the optimum of -sum(art)
            if obj[self.cols] < -T::feas_tol() {
                return Ok(SimplexOutcome::Infeasible);
            }
            // drive remaining artificials out of the basis
            let mut i = 0;
            while i < self.a.len() {
                if self.basis[i] >= self.first_art {
                    let col = (0..self.first_art).find(|&j| self.a[i][j].abs() > T::opt_tol());
                    match col {
                        Some(c) => {
                            self.pivot(&mut obj, i, c);
                            i += 1;
                        }
                        None => {
                            self.a.remove(i);
                            self.basis.remove(i);
                        }
                    }
                } else {
                    i += 1;
                }
            }
        }

        // phase 2
        let sign = match lp.direction {
            Direction::Maximize => T::one(),
            Direction::Minimize => -T::one(),
        };
        let mut obj = vec![T::zero(); width];
        for (j, map) in self.maps.iter().enumerate() {
            let c = lp.objective[j] * sign;
            for &(k, s) in &map.parts {
                obj[k] = obj[k] - c * s;
            }
        }
        for i in 0..self.a.len() {
            let b = self.basis[i];
            let f = obj[b];
            if f != T::zero() {
                for (o, a) in obj.iter_mut().zip(&self.a[i]) {
                    *o = *o - f * *a;
                }
            }
        }
        let bounded = self.run(&mut obj, self.first_art, &mut pivots)?;
        if !bounded {
            return Ok(SimplexOutcome::Unbounded);
        }

        let mut z = vec![T::zero(); self.n_struct];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.n_struct {
                z[b] = self.a[i][self.cols];
            }
        }
        let x: Vec<T> = self
            .maps
            .iter()
            .map(|m| m.parts.iter().fold(m.offset, |acc, &(k, s)| acc + s * z[k]))
            .collect();
        let value = x
            .iter()
            .zip(&lp.objective)
            .fold(T::zero(), |acc, (&xv, &c)| acc + xv * c);
        Ok(SimplexOutcome::Optimal { x, value })
    }
}
