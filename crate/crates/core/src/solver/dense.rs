//! Reference solution of `pi Q = 0, sum(pi) = 1` by Gaussian elimination
//! on the full generator. Used only to validate the recursion.

use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::state::{StateSpace, StationaryDistribution};

pub const DENSE_STATE_LIMIT: usize = 20_000;

pub fn dense_oracle(params: &SystemParams) -> Result<StationaryDistribution> {
    let space = StateSpace::new(*params);
    let n = space.total_states();
    if n > DENSE_STATE_LIMIT {
        return Err(Error::OracleTooLarge {
            states: n,
            limit: DENSE_STATE_LIMIT,
        });
    }

    // Row r of `m` is the balance equation of state r: column c holds Q[c][r].
    let mut m = vec![0.0f64; n * n];
    for (from, (i, j)) in space.states().enumerate() {
        for t in space.transitions(i, j)? {
            let to = space.index(t.to.0, t.to.1)?;
            m[to * n + from] += t.rate;
            m[from * n + from] -= t.rate;
        }
    }
    // One balance equation is redundant; normalization replaces it.
    m[(n - 1) * n..].iter_mut().for_each(|x| *x = 1.0);
    let mut rhs = vec![0.0; n];
    rhs[n - 1] = 1.0;

    let x = gaussian_solve(&mut m, &mut rhs, n)?;
    // Exact zeros can come out a few ulps negative.
    let x = x.into_iter().map(|v| v.max(0.0)).collect();
    StationaryDistribution::from_unnormalized(space, x)
}

/// Partial-pivot elimination on a row-major `n x n` system. Zero entries of
/// the pivot column and pivot row are skipped, which keeps the cost close
/// to the band structure of the generator without changing the pivot order.
fn gaussian_solve(m: &mut [f64], rhs: &mut [f64], n: usize) -> Result<Vec<f64>> {
    let mut pivot_cols = Vec::with_capacity(n);
    for col in 0..n {
        let (pivot_row, pivot_abs) = (col..n)
            .map(|r| (r, m[r * n + col].abs()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pivot_abs <= 0.0 {
            return Err(Error::Singular(col));
        }
        if pivot_row != col {
            for c in 0..n {
                m.swap(pivot_row * n + c, col * n + c);
            }
            rhs.swap(pivot_row, col);
        }

        pivot_cols.clear();
        pivot_cols.extend((col + 1..n).filter(|&c| m[col * n + c] != 0.0));
        let pivot = m[col * n + col];
        for r in col + 1..n {
            let factor = m[r * n + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            m[r * n + col] = 0.0;
            for &c in &pivot_cols {
                m[r * n + c] -= factor * m[col * n + c];
            }
            rhs[r] -= factor * rhs[col];
        }
    }

    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let mut acc = rhs[r];
        for c in r + 1..n {
            acc -= m[r * n + c] * x[c];
        }
        x[r] = acc / m[r * n + r];
    }
    Ok(x)
}
