//! Symmetric eigen-decompositions for the small frame matrices.
//!
//! 2x2 matrices use a closed form; larger sizes go through nalgebra's
//! symmetric QR iteration. Eigenvalues are always sorted ascending.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Relative gap below which two eigenvalues count as coincident.
pub const DEGENERACY_REL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct SymEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `i` pairs with `values[i]`; Euclidean-orthonormal.
    pub vectors: DMatrix<f64>,
    /// Some pair of eigenvalues is coincident within [`DEGENERACY_REL`].
    pub degenerate: bool,
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    (m - m.transpose()).abs().max()
}

fn degenerate(values: &[f64]) -> bool {
    let scale = values.iter().fold(1e-300f64, |a, v| a.max(v.abs()));
    values
        .windows(2)
        .any(|w| (w[1] - w[0]).abs() <= DEGENERACY_REL * scale)
}

fn eigen_2x2(m: &DMatrix<f64>) -> SymEigen {
    let (a, b, d) = (m[(0, 0)], 0.5 * (m[(0, 1)] + m[(1, 0)]), m[(1, 1)]);
    let mean = 0.5 * (a + d);
    let half_diff = 0.5 * (a - d);
    let r = half_diff.hypot(b);
    let (lo, hi) = (mean - r, mean + r);
    // angle of the eigenvector for `hi`
    let theta = 0.5 * b.atan2(half_diff);
    let (s, c) = theta.sin_cos();
    let vectors = DMatrix::from_row_slice(2, 2, &[-s, c, c, s]);
    let values = vec![lo, hi];
    SymEigen {
        degenerate: degenerate(&values),
        values,
        vectors,
    }
}

/// Eigen-decomposition of a symmetric matrix (the strict lower triangle is
/// averaged with the upper one first).
pub fn sym_eigen(m: &DMatrix<f64>) -> SymEigen {
    assert!(m.is_square());
    let n = m.nrows();
    if n == 2 {
        return eigen_2x2(m);
    }
    let se = SymmetricEigen::new(symmetrize(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].total_cmp(&se.eigenvalues[j]));
    let values: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &se.eigenvectors.column(i));
    }
    SymEigen {
        degenerate: degenerate(&values),
        values,
        vectors,
    }
}

/// Eigenvalues only.
pub fn sym_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    sym_eigen(m).values
}

/// Solves `B v = lambda A v` for symmetric `B` and positive definite `A`.
/// Returns `None` when `A` is not positive definite. Eigenvectors are
/// `A`-orthonormal.
pub fn generalized_sym_eigen(b: &DMatrix<f64>, a: &DMatrix<f64>) -> Option<SymEigen> {
    let chol = a.clone().cholesky()?;
    let l = chol.l();
    let l_inv = l.clone().try_inverse()?;
    let reduced = &l_inv * b * l_inv.transpose();
    let mut eig = sym_eigen(&reduced);
    eig.vectors = l_inv.transpose() * eig.vectors;
    Some(eig)
}

/// Greatest-absolute-cosine matching between the columns of two bases.
/// Returns the smallest matched `|cos|`.
pub fn min_matched_cosine(u: &DMatrix<f64>, v: &DMatrix<f64>) -> f64 {
    let n = u.ncols();
    let unit = |c: DVector<f64>| {
        let nrm = c.norm();
        c / nrm
    };
    let us: Vec<DVector<f64>> = (0..n).map(|i| unit(u.column(i).into_owned())).collect();
    let vs: Vec<DVector<f64>> = (0..n).map(|i| unit(v.column(i).into_owned())).collect();
    let mut used = vec![false; n];
    let mut worst = 1.0f64;
    for ui in &us {
        let mut best = (usize::MAX, -1.0);
        for (j, vj) in vs.iter().enumerate() {
            if used[j] {
                continue;
            }
            let c = ui.dot(vj).abs();
            if c > best.1 {
                best = (j, c);
            }
        }
        used[best.0] = true;
        worst = worst.min(best.1);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_decomposition(m: &DMatrix<f64>, e: &SymEigen) {
        for (i, &lam) in e.values.iter().enumerate() {
            let v = e.vectors.column(i);
            let r = m * v - v * lam;
            assert!(
                r.norm() < 1e-12 * (1.0 + lam.abs()),
                "residual {}",
                r.norm()
            );
        }
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn two_by_two_closed_form() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let e = sym_eigen(&m);
        assert!((e.values[0] - 1.0).abs() < 1e-15 && (e.values[1] - 3.0).abs() < 1e-15);
        check_decomposition(&m, &e);
        let m = DMatrix::from_row_slice(2, 2, &[-3.0, 0.5, 0.5, 7.0]);
        check_decomposition(&m, &sym_eigen(&m));
    }

    #[test]
    fn flags_umbilic() {
        let m = DMatrix::identity(2, 2) * 1.5;
        assert!(sym_eigen(&m).degenerate);
        let m = DMatrix::identity(3, 3) * 1.5;
        assert!(sym_eigen(&m).degenerate);
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 3.0]));
        assert!(!sym_eigen(&m).degenerate);
    }

    #[test]
    fn three_by_three() {
        let m = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, -2.0, 1.0, 2.0, 0.0, -2.0, 0.0, 3.0]);
        check_decomposition(&m, &sym_eigen(&m));
    }

    #[test]
    fn generalized() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let b = DMatrix::from_row_slice(2, 2, &[1.0, -0.2, -0.2, 4.0]);
        let e = generalized_sym_eigen(&b, &a).unwrap();
        for (i, &lam) in e.values.iter().enumerate() {
            let v = e.vectors.column(i);
            assert!((&b * v - &a * v * lam).norm() < 1e-12);
            assert!(((v.transpose() * &a * v)[(0, 0)] - 1.0).abs() < 1e-12);
        }
        let not_pd = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(generalized_sym_eigen(&b, &not_pd).is_none());
    }
}
