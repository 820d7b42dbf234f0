//! Independent oracles shared by the integration suites. Everything here
//! recomputes determinants by Laplace cofactor expansion, deliberately
//! avoiding the library's pivoted-elimination path.
#![allow(dead_code)] // each test binary uses a different subset

/// Cofactor (Laplace) expansion along the first row. Exponential in n,
/// fine for the n <= 7 matrices exercised here.
pub fn cofactor_det(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    assert!(m.iter().all(|row| row.len() == n));
    if n == 1 {
        return m[0][0];
    }
    let mut sum = 0.0;
    for c in 0..n {
        if m[0][c] == 0.0 {
            continue;
        }
        let minor: Vec<Vec<f64>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(j, _)| *j != c)
                    .map(|(_, v)| *v)
                    .collect()
            })
            .collect();
        let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * m[0][c] * cofactor_det(&minor);
    }
    sum
}

/// Exact integer determinant for matrices with integer entries.
pub fn cofactor_det_i128(m: &[Vec<i128>]) -> i128 {
    let n = m.len();
    assert!(m.iter().all(|row| row.len() == n));
    if n == 1 {
        return m[0][0];
    }
    let mut sum = 0i128;
    for c in 0..n {
        if m[0][c] == 0 {
            continue;
        }
        let minor: Vec<Vec<i128>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(j, _)| *j != c)
                    .map(|(_, v)| *v)
                    .collect()
            })
            .collect();
        let sign = if c % 2 == 0 { 1 } else { -1 };
        sum += sign * m[0][c] * cofactor_det_i128(&minor);
    }
    sum
}

/// Rows of a functional matrix as plain vectors, for feeding the oracle.
pub fn matrix_rows(m: &biset::FunctionalMatrix, rows: &[usize], cols: &[usize]) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|&r| cols.iter().map(|&c| m.entry(r, c)).collect())
        .collect()
}

#[allow(dead_code)]
pub fn assert_close(got: f64, want: f64, tol: f64, what: &str) {
    assert!(
        (got - want).abs() <= tol * (1.0 + want.abs()),
        "{what}: got {got}, want {want}"
    );
}
