//! Zero-sum matrix games. The row player maximizes, the column player minimizes.

use num::{BigRational, FromPrimitive, One, Signed, Zero};

use crate::simplex::{self, Field};
use crate::GameError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatrixGame {
    rows: usize,
    cols: usize,
    entries: Vec<BigRational>,
}

impl MatrixGame {
    pub fn new(rows: Vec<Vec<BigRational>>) -> Result<Self, GameError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if r == 0 || c == 0 {
            return Err(GameError::EmptyMatrix);
        }
        if rows.iter().any(|row| row.len() != c) {
            return Err(GameError::RaggedMatrix);
        }
        Ok(Self {
            rows: r,
            cols: c,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_ints(rows: &[&[i64]]) -> Result<Self, GameError> {
        Self::new(
            rows.iter()
                .map(|r| r.iter().map(|&v| BigRational::from_integer(v.into())).collect())
                .collect(),
        )
    }

    /// Builds an `rows x cols` matrix from a flat row-major vector.
    pub fn from_flat(rows: usize, cols: usize, entries: Vec<BigRational>) -> Result<Self, GameError> {
        if rows == 0 || cols == 0 {
            return Err(GameError::EmptyMatrix);
        }
        if entries.len() != rows * cols {
            return Err(GameError::RaggedMatrix);
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &BigRational {
        &self.entries[r * self.cols + c]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameValue {
    pub value: BigRational,
    pub row_strategy: Vec<BigRational>,
    pub col_strategy: Vec<BigRational>,
    /// False when the floating-point fallback produced the value.
    pub exact: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct SolverOptions {
    /// Largest (rows, cols) solved in exact arithmetic after dominance reduction.
    pub exact_limit: (usize, usize),
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { exact_limit: (16, 16) }
    }
}

pub fn matrix_value(m: &MatrixGame) -> GameValue {
    matrix_value_with(m, SolverOptions::default())
}

pub fn matrix_value_with(m: &MatrixGame, opts: SolverOptions) -> GameValue {
    if m.rows == 1 || m.cols == 1 {
        return pure_value(m);
    }
    let (rows, cols) = reduce_dominated(m);
    if rows.len() == 1 || cols.len() == 1 {
        let sub = submatrix(m, &rows, &cols);
        let v = pure_value(&sub);
        return lift(m, &rows, &cols, v);
    }
    let sub = submatrix(m, &rows, &cols);
    let v = if rows.len() <= opts.exact_limit.0 && cols.len() <= opts.exact_limit.1 {
        solve_lp::<BigRational>(&sub, |x| x.clone(), |x| x)
    } else {
        solve_lp::<f64>(&sub, simplex::to_f64, |x| {
            BigRational::from_f64(x).unwrap_or_else(BigRational::zero)
        })
    };
    lift(m, &rows, &cols, v)
}

fn pure_value(m: &MatrixGame) -> GameValue {
    let mut row_strategy = vec![BigRational::zero(); m.rows];
    let mut col_strategy = vec![BigRational::zero(); m.cols];
    if m.rows == 1 {
        let c = (0..m.cols).min_by(|&a, &b| m.get(0, a).cmp(m.get(0, b))).unwrap();
        row_strategy[0] = BigRational::one();
        col_strategy[c] = BigRational::one();
        GameValue { value: m.get(0, c).clone(), row_strategy, col_strategy, exact: true }
    } else {
        // Single column: ties resolved towards the first maximal row.
        let mut r = 0;
        for i in 1..m.rows {
            if m.get(i, 0) > m.get(r, 0) {
                r = i;
            }
        }
        row_strategy[r] = BigRational::one();
        col_strategy[0] = BigRational::one();
        GameValue { value: m.get(r, 0).clone(), row_strategy, col_strategy, exact: true }
    }
}

/// Iterated removal of weakly dominated rows and columns. Keeps the value.
///
/// "Dominates" is a strict partial order (equal lines are ordered by index),
/// so every removed line is dominated by a surviving one.
fn reduce_dominated(m: &MatrixGame) -> (Vec<usize>, Vec<usize>) {
    let mut rows: Vec<usize> = (0..m.rows).collect();
    let mut cols: Vec<usize> = (0..m.cols).collect();
    loop {
        let before = (rows.len(), cols.len());
        let row_beats = |a: usize, b: usize, cols: &[usize]| {
            let mut strict = false;
            for &c in cols {
                match m.get(a, c).cmp(m.get(b, c)) {
                    std::cmp::Ordering::Less => return false,
                    std::cmp::Ordering::Greater => strict = true,
                    std::cmp::Ordering::Equal => {}
                }
            }
            strict || a < b
        };
        rows = rows
            .iter()
            .copied()
            .filter(|&r| !rows.iter().any(|&r2| r2 != r && row_beats(r2, r, &cols)))
            .collect();
        let col_beats = |a: usize, b: usize, rows: &[usize]| {
            let mut strict = false;
            for &r in rows {
                match m.get(r, a).cmp(m.get(r, b)) {
                    std::cmp::Ordering::Greater => return false,
                    std::cmp::Ordering::Less => strict = true,
                    std::cmp::Ordering::Equal => {}
                }
            }
            strict || a < b
        };
        cols = cols
            .iter()
            .copied()
            .filter(|&c| !cols.iter().any(|&c2| c2 != c && col_beats(c2, c, &rows)))
            .collect();
        if (rows.len(), cols.len()) == before {
            return (rows, cols);
        }
    }
}

fn submatrix(m: &MatrixGame, rows: &[usize], cols: &[usize]) -> MatrixGame {
    let entries = rows
        .iter()
        .flat_map(|&r| cols.iter().map(move |&c| m.get(r, c).clone()))
        .collect();
    MatrixGame { rows: rows.len(), cols: cols.len(), entries }
}

fn lift(m: &MatrixGame, rows: &[usize], cols: &[usize], v: GameValue) -> GameValue {
    let mut row_strategy = vec![BigRational::zero(); m.rows];
    let mut col_strategy = vec![BigRational::zero(); m.cols];
    for (i, &r) in rows.iter().enumerate() {
        row_strategy[r] = v.row_strategy[i].clone();
    }
    for (j, &c) in cols.iter().enumerate() {
        col_strategy[c] = v.col_strategy[j].clone();
    }
    GameValue { value: v.value, row_strategy, col_strategy, exact: v.exact }
}

fn solve_lp<F: Field>(
    m: &MatrixGame,
    conv: impl Fn(&BigRational) -> F,
    back: impl Fn(F) -> BigRational,
) -> GameValue {
    let min = m.entries.iter().min().unwrap().clone();
    let shift = BigRational::one() - min;
    let a: Vec<Vec<F>> = (0..m.rows)
        .map(|r| (0..m.cols).map(|c| conv(&(m.get(r, c) + &shift))).collect())
        .collect();
    let sol = simplex::solve_packing(&a);
    // Shifted value is 1 / objective; strategies are the optima scaled by it.
    let inv = F::f_one().div(&sol.objective);
    let exact = F::EXACT;
    let row_strategy: Vec<BigRational> = sol.dual.iter().map(|x| back(x.mul(&inv))).collect();
    let col_strategy: Vec<BigRational> = sol.primal.iter().map(|x| back(x.mul(&inv))).collect();
    let value = back(inv) - shift;
    GameValue {
        value,
        row_strategy: normalize(row_strategy, exact),
        col_strategy: normalize(col_strategy, exact),
        exact,
    }
}

fn normalize(mut p: Vec<BigRational>, exact: bool) -> Vec<BigRational> {
    if exact {
        return p;
    }
    for x in p.iter_mut() {
        if x.is_negative() {
            *x = BigRational::zero();
        }
    }
    let total: BigRational = p.iter().sum();
    if total.is_positive() {
        for x in p.iter_mut() {
            *x = &*x / &total;
        }
    }
    p
}
