use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::scalar::{quantize, Scalar};

/// Identifier of a declared continuous variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub u32);

impl VarId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Affine expression `sum_i c_i x_i + c_0`.
///
/// Terms are kept sorted by variable with no zero coefficient. An infinite
/// constant absorbs all terms, which is how unbounded sentinels are carried.
#[derive(Clone, Debug, PartialEq)]
pub struct LinExpr<T> {
    terms: Vec<(VarId, T)>,
    constant: T,
}

/// Hashable, tolerance-quantized form of a [`LinExpr`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExprKey {
    terms: Vec<(u32, i64)>,
    constant: i64,
}

impl<T: Scalar> Default for LinExpr<T> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<T: Scalar> LinExpr<T> {
    pub fn zero() -> Self {
        Self::constant(T::zero())
    }

    pub fn constant(c: T) -> Self {
        LinExpr {
            terms: Vec::new(),
            constant: c,
        }
    }

    pub fn var(v: VarId) -> Self {
        Self::term(v, T::one())
    }

    pub fn term(v: VarId, coeff: T) -> Self {
        Self::from_terms([(v, coeff)], T::zero())
    }

    /// Build from arbitrary terms; duplicates are summed and zeros dropped.
    pub fn from_terms<I: IntoIterator<Item = (VarId, T)>>(terms: I, constant: T) -> Self {
        let mut terms: Vec<(VarId, T)> = terms.into_iter().collect();
        terms.sort_by_key(|t| t.0);
        let mut merged: Vec<(VarId, T)> = Vec::with_capacity(terms.len());
        for (v, c) in terms {
            match merged.last_mut() {
                Some(last) if last.0 == v => last.1 = last.1 + c,
                _ => merged.push((v, c)),
            }
        }
        let mut e = LinExpr {
            terms: merged,
            constant,
        };
        e.normalize();
        e
    }

    fn normalize(&mut self) {
        if self.constant.is_infinite() || self.constant.is_nan() {
            self.terms.clear();
            return;
        }
        let tol = T::zero_tol();
        self.terms.retain(|&(_, c)| c.abs() > tol);
        if self.constant.abs() <= tol {
            self.constant = T::zero();
        }
    }

    pub fn terms(&self) -> &[(VarId, T)] {
        &self.terms
    }

    pub fn constant_term(&self) -> T {
        self.constant
    }

    pub fn coeff(&self, v: VarId) -> T {
        match self.terms.binary_search_by_key(&v, |t| t.0) {
            Ok(i) => self.terms[i].1,
            Err(_) => T::zero(),
        }
    }

    pub fn mentions(&self, v: VarId) -> bool {
        self.terms.binary_search_by_key(&v, |t| t.0).is_ok()
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.terms.iter().map(|t| t.0)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    /// The constant value if the expression has no variable terms.
    pub fn as_constant(&self) -> Option<T> {
        self.is_constant().then_some(self.constant)
    }

    pub fn is_infinite(&self) -> bool {
        self.constant.is_infinite()
    }

    pub fn scale(&self, k: T) -> Self {
        if k == T::zero() && !self.is_infinite() {
            return Self::zero();
        }
        if self.is_infinite() {
            if k == T::zero() {
                return Self::zero();
            }
            return Self::constant(self.constant * k);
        }
        Self::from_terms(self.terms.iter().map(|&(v, c)| (v, c * k)), self.constant * k)
    }

    /// Divide every coefficient by `k` (exact for `c / |c|`).
    pub fn divide(&self, k: T) -> Self {
        Self::from_terms(self.terms.iter().map(|&(v, c)| (v, c / k)), self.constant / k)
    }

    pub fn add_constant(&self, k: T) -> Self {
        let mut e = self.clone();
        e.constant = e.constant + k;
        e.normalize();
        e
    }

    /// Replace `v` by the expression `with`.
    pub fn substitute(&self, v: VarId, with: &LinExpr<T>) -> Self {
        let c = self.coeff(v);
        if c == T::zero() {
            return self.clone();
        }
        let rest = LinExpr::from_terms(self.terms.iter().copied().filter(|t| t.0 != v), self.constant);
        &rest + &with.scale(c)
    }

    pub fn eval(&self, mut value: impl FnMut(VarId) -> T) -> T {
        self.terms.iter().fold(self.constant, |acc, &(v, c)| acc + c * value(v))
    }

    /// Evaluate against a dense point indexed by `VarId`.
    pub fn eval_dense(&self, point: &[T]) -> T {
        self.eval(|v| point[v.index()])
    }

    pub fn max_abs_coeff(&self) -> T {
        self.terms
            .iter()
            .fold(T::zero(), |m, &(_, c)| if c.abs() > m { c.abs() } else { m })
    }

    pub fn key(&self) -> ExprKey {
        ExprKey {
            terms: self.terms.iter().map(|&(v, c)| (v.0, quantize(c))).collect(),
            constant: quantize(self.constant),
        }
    }

    /// Display with a name lookup, e.g. `2*x - y + 3`.
    pub fn display_with<'a, F>(&'a self, name: F) -> DisplayExpr<'a, T, F>
    where
        F: Fn(VarId) -> String,
    {
        DisplayExpr { expr: self, name }
    }
}

impl<T: Scalar> Add for &LinExpr<T> {
    type Output = LinExpr<T>;
    fn add(self, rhs: &LinExpr<T>) -> LinExpr<T> {
        let constant = self.constant + rhs.constant;
        if constant.is_infinite() || constant.is_nan() {
            return LinExpr::constant(constant);
        }
        LinExpr::from_terms(self.terms.iter().chain(rhs.terms.iter()).copied(), constant)
    }
}

impl<T: Scalar> Sub for &LinExpr<T> {
    type Output = LinExpr<T>;
    fn sub(self, rhs: &LinExpr<T>) -> LinExpr<T> {
        self + &(-rhs)
    }
}

impl<T: Scalar> Neg for &LinExpr<T> {
    type Output = LinExpr<T>;
    fn neg(self) -> LinExpr<T> {
        self.scale(-T::one())
    }
}

impl<T: Scalar> Mul<T> for &LinExpr<T> {
    type Output = LinExpr<T>;
    fn mul(self, k: T) -> LinExpr<T> {
        self.scale(k)
    }
}

pub struct DisplayExpr<'a, T, F> {
    expr: &'a LinExpr<T>,
    name: F,
}

/// Shortest round-trip formatting for a scalar.
pub(crate) fn fmt_num<T: Scalar>(v: T) -> String {
    let f = v.as_f64();
    if f == 0.0 {
        // normalizes -0
        return "0".to_string();
    }
    format!("{}", v)
}

impl<T: Scalar, F: Fn(VarId) -> String> fmt::Display for DisplayExpr<'_, T, F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = self.expr;
        if e.is_infinite() {
            return write!(f, "{}", if e.constant > T::zero() { "inf" } else { "-inf" });
        }
        let mut first = true;
        for &(v, c) in &e.terms {
            let name = (self.name)(v);
            let (neg, mag) = if c < T::zero() { (true, -c) } else { (false, c) };
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            if mag == T::one() {
                write!(f, "{}", name)?;
            } else {
                write!(f, "{}*{}", fmt_num(mag), name)?;
            }
            first = false;
        }
        let c = e.constant;
        if first {
            write!(f, "{}", fmt_num(c))?;
        } else if c != T::zero() {
            let (neg, mag) = if c < T::zero() { (true, -c) } else { (false, c) };
            write!(f, " {} {}", if neg { "-" } else { "+" }, fmt_num(mag))?;
        }
        Ok(())
    }
}
