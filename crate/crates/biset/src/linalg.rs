//! Dense helpers sized for this crate: determinants by partial-pivot LU and
//! a one-sided Jacobi SVD.
//!
//! The SVD is hand-rolled because the matrices this crate cares about are
//! rank-deficient by construction, and the bidiagonalization SVD shipped by
//! the linear-algebra backend mis-factors some exactly rank-deficient
//! inputs (singular values exceeding the Frobenius norm). One-sided Jacobi
//! orthogonalizes column pairs by plane rotations until convergence; it is
//! deterministic, accurate for small matrices, and immune to that failure
//! mode. Every factorization satisfies A = U diag(s) V^T with orthonormal
//! U, V and descending s.

use nalgebra::DMatrix;

/// Determinant by LU with partial pivoting.
pub fn det(m: &DMatrix<f64>) -> f64 {
    assert_eq!(m.nrows(), m.ncols(), "determinant needs a square matrix");
    if m.nrows() == 0 {
        return 1.0;
    }
    m.clone().lu().determinant()
}

/// Thin singular value decomposition: `u` is rows x k, `v` is cols x k with
/// k = min(rows, cols), singular values descending.
#[derive(Debug, Clone, PartialEq)]
pub struct Svd {
    pub singular_values: Vec<f64>,
    pub u: DMatrix<f64>,
    pub v: DMatrix<f64>,
}

impl Svd {
    pub fn recompose(&self) -> DMatrix<f64> {
        let k = self.singular_values.len();
        let mut scaled = self.u.clone();
        for c in 0..k {
            let s = self.singular_values[c];
            for r in 0..scaled.nrows() {
                scaled[(r, c)] *= s;
            }
        }
        scaled * self.v.transpose()
    }
}

const JACOBI_MAX_SWEEPS: usize = 60;
const JACOBI_TOL: f64 = 1e-15;

/// One-sided Jacobi SVD. Works on the transpose when the matrix is wide so
/// the rotation loop always runs over the smaller dimension.
pub fn svd(m: &DMatrix<f64>) -> Svd {
    if m.nrows() >= m.ncols() {
        svd_tall(m)
    } else {
        let t = svd_tall(&m.transpose());
        Svd {
            singular_values: t.singular_values,
            u: t.v,
            v: t.u,
        }
    }
}

fn svd_tall(m: &DMatrix<f64>) -> Svd {
    let (rows, cols) = (m.nrows(), m.ncols());
    let mut b = m.clone();
    let mut v = DMatrix::<f64>::identity(cols, cols);

    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..cols {
            for j in i + 1..cols {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = 0.0;
                for r in 0..rows {
                    let bi = b[(r, i)];
                    let bj = b[(r, j)];
                    alpha += bi * bi;
                    beta += bj * bj;
                    gamma += bi * bj;
                }
                if gamma.abs() <= JACOBI_TOL * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for r in 0..rows {
                    let bi = b[(r, i)];
                    let bj = b[(r, j)];
                    b[(r, i)] = c * bi - s * bj;
                    b[(r, j)] = s * bi + c * bj;
                }
                for r in 0..cols {
                    let vi = v[(r, i)];
                    let vj = v[(r, j)];
                    v[(r, i)] = c * vi - s * vj;
                    v[(r, j)] = s * vi + c * vj;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..cols).collect();
    let norms: Vec<f64> = (0..cols).map(|c| b.column(c).norm()).collect();
    order.sort_by(|&a, &bix| norms[bix].total_cmp(&norms[a]));

    let mut singular_values = Vec::with_capacity(cols);
    let mut u = DMatrix::<f64>::zeros(rows, cols);
    let mut v_sorted = DMatrix::<f64>::zeros(cols, cols);
    for (dst, &src) in order.iter().enumerate() {
        let s = norms[src];
        singular_values.push(s);
        if s > 0.0 {
            for r in 0..rows {
                u[(r, dst)] = b[(r, src)] / s;
            }
        }
        for r in 0..cols {
            v_sorted[(r, dst)] = v[(r, src)];
        }
    }
    Svd {
        singular_values,
        u,
        v: v_sorted,
    }
}

/// Singular values in descending order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    svd(m).singular_values
}

pub fn from_rows(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let nrows = rows.len();
    let ncols = rows.first().map(Vec::len).unwrap_or(0);
    DMatrix::from_fn(nrows, ncols, |r, c| rows[r][c])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn det_matches_closed_form_2x2() {
        let m = from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        assert!((det(&m) - (-2.0)).abs() < 1e-14);
    }

    #[test]
    fn det_of_singular_matrix_is_zero() {
        let m = from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert_eq!(det(&m), 0.0);
    }

    #[test]
    fn singular_values_of_a_diagonal_pattern() {
        let m = from_rows(&[
            vec![3.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 2.0],
            vec![0.0, 0.0, 0.0],
        ]);
        let sv = singular_values(&m);
        assert_eq!(sv.len(), 3);
        assert!((sv[0] - 3.0).abs() < 1e-12);
        assert!((sv[1] - 2.0).abs() < 1e-12);
        assert!((sv[2] - 1.0).abs() < 1e-12);
    }

    fn check_factorization(m: &DMatrix<f64>) {
        let f = svd(m);
        // descending values
        for w in f.singular_values.windows(2) {
            assert!(w[0] >= w[1], "values not sorted: {:?}", f.singular_values);
        }
        // recomposition
        let err = (m - f.recompose()).norm();
        assert!(
            err <= 1e-11 * (1.0 + m.norm()),
            "recomposition error {err} for {}x{}",
            m.nrows(),
            m.ncols()
        );
        // orthonormal factors
        let ut_u = f.u.transpose() * &f.u;
        let vt_v = f.v.transpose() * &f.v;
        for g in [ut_u, vt_v] {
            for r in 0..g.nrows() {
                for c in 0..g.ncols() {
                    let want = if r == c { 1.0 } else { 0.0 };
                    let v = g[(r, c)];
                    // zero singular values leave zero columns in u
                    if want == 1.0 && v == 0.0 {
                        continue;
                    }
                    assert!((v - want).abs() <= 1e-12, "gram ({r},{c}) = {v}");
                }
            }
        }
        // largest value never exceeds the Frobenius norm
        if let Some(&top) = f.singular_values.first() {
            assert!(top <= m.norm() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn factorization_properties_hold_on_random_and_degenerate_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        for trial in 0..60 {
            let rows = rng.random_range(1..=40);
            let cols = rng.random_range(1..=40);
            let m = match trial % 3 {
                // dense random
                0 => DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-2.0..2.0)),
                // exact rank one (the recovery workload)
                1 => {
                    let x: Vec<f64> = (0..rows).map(|_| rng.random_range(-2.0..2.0)).collect();
                    let y: Vec<f64> = (0..cols).map(|_| rng.random_range(-2.0..2.0)).collect();
                    DMatrix::from_fn(rows, cols, |i, j| x[i] * y[j])
                }
                // rank two with a zero block pattern
                _ => {
                    let x: Vec<f64> = (0..rows).map(|_| rng.random_range(-2.0..2.0)).collect();
                    let y: Vec<f64> = (0..cols).map(|_| rng.random_range(-2.0..2.0)).collect();
                    DMatrix::from_fn(rows, cols, |i, j| {
                        x[i] * y[j] + if (i + j) % 2 == 0 { x[i] } else { 0.0 }
                    })
                }
            };
            check_factorization(&m);
        }
        check_factorization(&DMatrix::<f64>::zeros(5, 3));
    }
}
