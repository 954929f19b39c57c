//! Dense tableau simplex over an ordered field, using Bland's rule.
//!
//! Only the one LP shape needed by matrix games is supported:
//! maximize `sum(y)` subject to `A y <= 1`, `y >= 0`, where every entry of `A`
//! is strictly positive. The slack basis is feasible from the start, so no
//! phase one is required, and the problem is always bounded.

use num::{BigRational, Signed, ToPrimitive, Zero};

pub(crate) trait Field: Clone {
    const EXACT: bool;
    fn f_zero() -> Self;
    fn f_one() -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn is_pos(&self) -> bool;
    fn is_neg(&self) -> bool;
    fn lt(&self, o: &Self) -> bool;
    fn is_zero(&self) -> bool {
        !self.is_pos() && !self.is_neg()
    }
}

impl Field for BigRational {
    const EXACT: bool = true;
    fn f_zero() -> Self {
        Zero::zero()
    }
    fn f_one() -> Self {
        num::One::one()
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn is_pos(&self) -> bool {
        self.is_positive()
    }
    fn is_neg(&self) -> bool {
        self.is_negative()
    }
    fn lt(&self, o: &Self) -> bool {
        self < o
    }
}

pub(crate) const F64_TOL: f64 = 1e-9;

impl Field for f64 {
    const EXACT: bool = false;
    fn f_zero() -> Self {
        0.0
    }
    fn f_one() -> Self {
        1.0
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn is_pos(&self) -> bool {
        *self > F64_TOL
    }
    fn is_neg(&self) -> bool {
        *self < -F64_TOL
    }
    fn lt(&self, o: &Self) -> bool {
        *self < *o - F64_TOL
    }
}

pub(crate) struct LpSolution<F> {
    /// Primal optimum `y` (one entry per column of `A`).
    pub primal: Vec<F>,
    /// Dual optimum (one entry per row of `A`).
    pub dual: Vec<F>,
    /// Objective value `sum(y)`.
    pub objective: F,
}

/// Solves `max 1.y  s.t.  A y <= 1, y >= 0` for a strictly positive `A`.
pub(crate) fn solve_packing<F: Field>(a: &[Vec<F>]) -> LpSolution<F> {
    let m = a.len();
    let n = a[0].len();
    let width = n + m + 1;
    let rhs = n + m;
    let mut t: Vec<Vec<F>> = Vec::with_capacity(m + 1);
    for (i, row) in a.iter().enumerate() {
        let mut r = vec![F::f_zero(); width];
        r[..n].clone_from_slice(row);
        r[n + i] = F::f_one();
        r[rhs] = F::f_one();
        t.push(r);
    }
    let mut obj = vec![F::f_zero(); width];
    for v in obj.iter_mut().take(n) {
        *v = F::f_zero().sub(&F::f_one());
    }
    t.push(obj);
    let mut basis: Vec<usize> = (n..n + m).collect();

    loop {
        let Some(enter) = (0..rhs).find(|&j| t[m][j].is_neg()) else {
            break;
        };
        let mut leave: Option<usize> = None;
        for i in 0..m {
            if !t[i][enter].is_pos() {
                continue;
            }
            leave = match leave {
                None => Some(i),
                Some(k) => {
                    let ri = t[i][rhs].div(&t[i][enter]);
                    let rk = t[k][rhs].div(&t[k][enter]);
                    if ri.lt(&rk) || (!rk.lt(&ri) && basis[i] < basis[k]) {
                        Some(i)
                    } else {
                        Some(k)
                    }
                }
            };
        }
        // A is positive, so every column has a positive entry in some row.
        let leave = leave.expect("packing LP is bounded");
        pivot(&mut t, leave, enter);
        basis[leave] = enter;
    }

    let mut primal = vec![F::f_zero(); n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            primal[b] = t[i][rhs].clone();
        }
    }
    let dual = (0..m).map(|i| t[m][n + i].clone()).collect();
    LpSolution {
        primal,
        dual,
        objective: t[m][rhs].clone(),
    }
}

fn pivot<F: Field>(t: &mut [Vec<F>], row: usize, col: usize) {
    let p = t[row][col].clone();
    for v in t[row].iter_mut() {
        *v = v.div(&p);
    }
    let pivot_row = t[row].clone();
    for (i, r) in t.iter_mut().enumerate() {
        if i == row || r[col].is_zero() {
            continue;
        }
        let f = r[col].clone();
        for (v, pv) in r.iter_mut().zip(pivot_row.iter()) {
            if !pv.is_zero() {
                *v = v.sub(&f.mul(pv));
            }
        }
    }
}

pub(crate) fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
