//! Dense Gaussian elimination with partial pivoting.
//!
//! Every linear system in this crate is small (S is at most a few hundred
//! states), so a direct textbook solve is both fast and accurate enough;
//! residuals stay near machine precision for the well-conditioned systems
//! produced by discounted Bellman equations and hitting-time equations.

/// The pivot search found no usable pivot: the matrix is singular (or close
/// enough to it that elimination would be meaningless).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Singular;

/// Solve `A x = b` for a single right-hand side.
pub(crate) fn solve(a: Vec<Vec<f64>>, b: Vec<f64>) -> Result<Vec<f64>, Singular> {
    let mut cols = solve_columns(a, vec![b])?;
    Ok(cols.pop().expect("one rhs in, one solution out"))
}

/// Solve `A x = b` for several right-hand sides sharing one factorization.
///
/// `cols` holds the right-hand sides as column vectors; the returned vector
/// holds the solutions in the same order.
#[allow(clippy::needless_range_loop)] // in-place elimination reads and writes disjoint rows
pub(crate) fn solve_columns(
    mut a: Vec<Vec<f64>>,
    mut cols: Vec<Vec<f64>>,
) -> Result<Vec<Vec<f64>>, Singular> {
    let n = a.len();
    debug_assert!(a.iter().all(|row| row.len() == n));
    debug_assert!(cols.iter().all(|c| c.len() == n));

    let scale = a
        .iter()
        .flat_map(|row| row.iter())
        .fold(0.0f64, |m, &x| m.max(x.abs()));
    let pivot_floor = if scale > 0.0 {
        scale * 1e-14
    } else {
        f64::MIN_POSITIVE
    };

    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_val = a[col][col].abs();
        for row in col + 1..n {
            let v = a[row][col].abs();
            if v > pivot_val {
                pivot_row = row;
                pivot_val = v;
            }
        }
        // NaN entries surface here too: a NaN pivot is no pivot.
        if pivot_val.is_nan() || pivot_val <= pivot_floor {
            return Err(Singular);
        }
        if pivot_row != col {
            a.swap(col, pivot_row);
            for c in cols.iter_mut() {
                c.swap(col, pivot_row);
            }
        }
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            a[row][col] = 0.0;
            for k in col + 1..n {
                a[row][k] -= factor * a[col][k];
            }
            for c in cols.iter_mut() {
                c[row] -= factor * c[col];
            }
        }
    }

    for c in cols.iter_mut() {
        for row in (0..n).rev() {
            let mut x = c[row];
            for k in row + 1..n {
                x -= a[row][k] * c[k];
            }
            c[row] = x / a[row][row];
        }
    }
    Ok(cols)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_system() {
        let a = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let x = solve(a, vec![3.0, -4.0]).unwrap();
        assert_eq!(x, vec![3.0, -4.0]);
    }

    #[test]
    fn known_2x2() {
        // 5x + 2y = 1, -x + 3y = 2  =>  x = -1/17, y = 11/17
        let a = vec![vec![5.0, 2.0], vec![-1.0, 3.0]];
        let x = solve(a, vec![1.0, 2.0]).unwrap();
        assert!((x[0] - (-1.0 / 17.0)).abs() < 1e-14);
        assert!((x[1] - (11.0 / 17.0)).abs() < 1e-14);
    }

    #[test]
    fn known_3x3() {
        let a = vec![
            vec![5.0, 2.0, 1.0],
            vec![-1.0, 3.0, -1.0],
            vec![0.0, 2.0, -1.0],
        ];
        let x = solve(a, vec![1.0, 2.0, 1.0]).unwrap();
        assert!((x[0] - (-2.0 / 9.0)).abs() < 1e-14);
        assert!((x[1] - (7.0 / 9.0)).abs() < 1e-14);
        assert!((x[2] - (5.0 / 9.0)).abs() < 1e-14);
    }

    #[test]
    fn pivoting_handles_zero_diagonal() {
        let a = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        let x = solve(a, vec![2.0, 5.0]).unwrap();
        assert_eq!(x, vec![5.0, 2.0]);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert_eq!(solve(a, vec![1.0, 2.0]), Err(Singular));
    }

    #[test]
    fn shared_factorization_matches_individual_solves() {
        let a = vec![
            vec![4.0, 1.0, 0.5],
            vec![1.0, 3.0, -1.0],
            vec![0.25, -1.0, 5.0],
        ];
        let b1 = vec![1.0, 0.0, 2.0];
        let b2 = vec![-3.0, 4.0, 0.5];
        let joint = solve_columns(a.clone(), vec![b1.clone(), b2.clone()]).unwrap();
        let x1 = solve(a.clone(), b1).unwrap();
        let x2 = solve(a, b2).unwrap();
        for i in 0..3 {
            assert!((joint[0][i] - x1[i]).abs() < 1e-14);
            assert!((joint[1][i] - x2[i]).abs() < 1e-14);
        }
    }
}
