//! Support-enumeration oracle for zero-sum matrix games.
//!
//! Every finite zero-sum game has an optimal pair supported on a square
//! submatrix whose bordered system is nonsingular, so trying every square
//! submatrix and keeping the first certified candidate finds the value.

use num::{BigRational, One, Signed, Zero};

/// Solves `M z = rhs` exactly; `None` when `M` is singular.
fn solve(mut m: Vec<Vec<BigRational>>, mut rhs: Vec<BigRational>) -> Option<Vec<BigRational>> {
    let n = rhs.len();
    for col in 0..n {
        let p = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, p);
        rhs.swap(col, p);
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = &m[r][col] / &m[col][col];
                for c in col..n {
                    let d = &f * &m[col][c];
                    m[r][c] -= d;
                }
                let d = &f * &rhs[col];
                rhs[r] -= d;
            }
        }
    }
    Some((0..n).map(|i| &rhs[i] / &m[i][i]).collect())
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Mixed strategy of one side: weights on `support` making every opposing
/// line in `opp` yield the same payoff.
fn equalizer(a: &[Vec<BigRational>], support: &[usize], opp: &[usize], rows: bool) -> Option<(Vec<BigRational>, BigRational)> {
    let k = support.len();
    let mut m = vec![vec![BigRational::zero(); k + 1]; k + 1];
    let mut rhs = vec![BigRational::zero(); k + 1];
    for (e, &o) in opp.iter().enumerate() {
        for (i, &s) in support.iter().enumerate() {
            m[e][i] = if rows { a[s][o].clone() } else { a[o][s].clone() };
        }
        m[e][k] = -BigRational::one();
    }
    for i in 0..k {
        m[k][i] = BigRational::one();
    }
    rhs[k] = BigRational::one();
    let z = solve(m, rhs)?;
    let v = z[k].clone();
    Some((z[..k].to_vec(), v))
}

/// Returns the value of the matrix game `a` (row player maximizes).
pub fn support_enumeration_value(a: &[Vec<BigRational>]) -> BigRational {
    let (m, n) = (a.len(), a[0].len());
    for k in 1..=m.min(n) {
        for rs in subsets(m, k) {
            for cs in subsets(n, k) {
                let Some((x, v)) = equalizer(a, &rs, &cs, true) else { continue };
                let Some((y, w)) = equalizer(a, &cs, &rs, false) else { continue };
                if v != w || x.iter().chain(y.iter()).any(|p| p.is_negative()) {
                    continue;
                }
                let row_ok = (0..n).all(|c| {
                    let s: BigRational = rs.iter().zip(&x).map(|(&r, p)| p * &a[r][c]).sum();
                    s >= v
                });
                let col_ok = (0..m).all(|r| {
                    let s: BigRational = cs.iter().zip(&y).map(|(&c, q)| q * &a[r][c]).sum();
                    s <= v
                });
                if row_ok && col_ok {
                    return v;
                }
            }
        }
    }
    panic!("no certified support found");
}
