use num::Zero;

use super::{AlgebraError, Rational};

/// Particular solution of an exact linear system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactSolution {
    pub values: Vec<Rational>,
    pub rank: usize,
    /// Columns without a pivot; their unknowns are set to zero.
    pub free_columns: Vec<usize>,
}

/// Solve `A x = b` over the rationals by reduced row echelon form.
///
/// Columns are eliminated left to right, so the free variables are the
/// rightmost dependent columns in the given ordering. Free variables are
/// set to zero.
pub fn solve_exact(a: &[Vec<Rational>], b: &[Rational]) -> Result<ExactSolution, AlgebraError> {
    let rows = a.len();
    if rows != b.len() {
        return Err(AlgebraError::Precondition(format!(
            "matrix has {rows} rows but rhs has {}",
            b.len()
        )));
    }
    let cols = a.first().map_or(0, Vec::len);
    if a.iter().any(|r| r.len() != cols) {
        return Err(AlgebraError::Precondition("ragged matrix".into()));
    }

    let mut m: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();

    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        if row == rows {
            break;
        }
        let Some(p) = (row..rows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        let inv = m[row][col].recip();
        for v in m[row].iter_mut() {
            *v *= &inv;
        }
        for r in 0..rows {
            if r != row && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in col..=cols {
                    let delta = &f * &m[row][c];
                    m[r][c] -= delta;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }

    let rank = pivots.len();
    if (rank..rows).any(|r| !m[r][cols].is_zero()) {
        return Err(AlgebraError::Inconsistent { rank, augmented_rank: rank + 1 });
    }

    let mut values = vec![Rational::zero(); cols];
    for (r, &c) in pivots.iter().enumerate() {
        values[c] = m[r][cols].clone();
    }
    let free_columns = (0..cols).filter(|c| !pivots.contains(c)).collect();
    Ok(ExactSolution { values, rank, free_columns })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat;

    fn row(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&k| rat(k, 1)).collect()
    }

    #[test]
    fn unique_solution() {
        let a = vec![row(&[2, 1]), row(&[1, 3])];
        let b = row(&[3, 5]);
        let s = solve_exact(&a, &b).unwrap();
        assert_eq!(s.values, vec![rat(4, 5), rat(7, 5)]);
        assert_eq!(s.rank, 2);
        assert!(s.free_columns.is_empty());
    }

    #[test]
    fn free_variable_set_to_zero() {
        // x + y = 2 twice: y is free
        let a = vec![row(&[1, 1]), row(&[2, 2])];
        let b = row(&[2, 4]);
        let s = solve_exact(&a, &b).unwrap();
        assert_eq!(s.values, vec![rat(2, 1), rat(0, 1)]);
        assert_eq!(s.free_columns, vec![1]);
    }

    #[test]
    fn inconsistent_system() {
        let a = vec![row(&[1, 1]), row(&[1, 1])];
        let b = row(&[1, 2]);
        assert!(matches!(
            solve_exact(&a, &b),
            Err(AlgebraError::Inconsistent { rank: 1, .. })
        ));
    }

    #[test]
    fn overdetermined_consistent() {
        let a = vec![row(&[1, 0]), row(&[0, 1]), row(&[1, 1])];
        let b = row(&[1, 2, 3]);
        assert_eq!(solve_exact(&a, &b).unwrap().values, row(&[1, 2]));
    }
}
