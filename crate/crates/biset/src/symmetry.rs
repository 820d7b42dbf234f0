//! The 7x6 functional matrix of a metric on a cortege, numerical rank, the
//! six-value determinant law, and the minor relations that drive the
//! classification proof.
//!
//! Column order is (i,alpha) (i,beta) (j,alpha) (j,beta) (k,alpha) (k,beta).
//! Rows 1-3 hold f_x at the three M-points, rows 4-5 hold f_xi and f_eta at
//! the alpha point, rows 6-7 the same at the beta point. The zero pattern is
//! structural: it holds for every metric and every cortege.

use nalgebra::DMatrix;

use crate::diff::{evaluate_with_partials, Jet};
use crate::geometry::{Cortege32, MetricFunction};
use crate::linalg;
use crate::scalar::DomainError;

/// The 7x6 matrix of first partials on a cortege.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalMatrix {
    entries: [[f64; 6]; 7],
}

impl FunctionalMatrix {
    pub fn entries(&self) -> &[[f64; 6]; 7] {
        &self.entries
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.entries[row][col]
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(7, 6, |r, c| self.entries[r][c])
    }

    /// Square submatrix keeping the given rows and columns, in order.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(rows.len(), cols.len(), |r, c| {
            self.entries[rows[r]][cols[c]]
        })
    }

    pub fn rank(&self, rel_tol: f64) -> usize {
        numeric_rank(&self.to_dmatrix(), rel_tol)
    }
}

/// Derivatives of the metric at the six (M-point, N-point) pairs.
#[derive(Debug, Clone, Copy)]
pub struct CortegeJets {
    pub ia: Jet,
    pub ib: Jet,
    pub ja: Jet,
    pub jb: Jet,
    pub ka: Jet,
    pub kb: Jet,
}

pub fn cortege_jets(f: &MetricFunction, c: &Cortege32) -> Result<CortegeJets, DomainError> {
    let [pia, pib, pja, pjb, pka, pkb] = c.pairs();
    Ok(CortegeJets {
        ia: evaluate_with_partials(f, pia.0, pia.1, pia.2)?,
        ib: evaluate_with_partials(f, pib.0, pib.1, pib.2)?,
        ja: evaluate_with_partials(f, pja.0, pja.1, pja.2)?,
        jb: evaluate_with_partials(f, pjb.0, pjb.1, pjb.2)?,
        ka: evaluate_with_partials(f, pka.0, pka.1, pka.2)?,
        kb: evaluate_with_partials(f, pkb.0, pkb.1, pkb.2)?,
    })
}

/// Fills the functional matrix from dual-number partials at the six pairs.
pub fn build_functional_matrix(
    f: &MetricFunction,
    c: &Cortege32,
) -> Result<FunctionalMatrix, DomainError> {
    let j = cortege_jets(f, c)?;
    Ok(functional_matrix_from_jets(&j))
}

pub fn functional_matrix_from_jets(j: &CortegeJets) -> FunctionalMatrix {
    let z = 0.0;
    FunctionalMatrix {
        entries: [
            [j.ia.d_x, j.ib.d_x, z, z, z, z],
            [z, z, j.ja.d_x, j.jb.d_x, z, z],
            [z, z, z, z, j.ka.d_x, j.kb.d_x],
            [j.ia.d_xi, z, j.ja.d_xi, z, j.ka.d_xi, z],
            [j.ia.d_eta, z, j.ja.d_eta, z, j.ka.d_eta, z],
            [z, j.ib.d_xi, z, j.jb.d_xi, z, j.kb.d_xi],
            [z, j.ib.d_eta, z, j.jb.d_eta, z, j.kb.d_eta],
        ],
    }
}

/// The functional matrix of the canonical metric written down directly:
/// xi rows on top, coordinate/ones rows below.
pub fn canonical_matrix16(c: &Cortege32) -> FunctionalMatrix {
    let z = 0.0;
    let (xa, xb) = (c.xi_alpha, c.xi_beta);
    FunctionalMatrix {
        entries: [
            [xa, xb, z, z, z, z],
            [z, z, xa, xb, z, z],
            [z, z, z, z, xa, xb],
            [c.x_i, z, c.x_j, z, c.x_k, z],
            [1.0, z, 1.0, z, 1.0, z],
            [z, c.x_i, z, c.x_j, z, c.x_k],
            [z, 1.0, z, 1.0, z, 1.0],
        ],
    }
}

/// Number of singular values above `rel_tol` times the largest one.
/// The zero matrix has rank 0.
pub fn numeric_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    assert!(
        rel_tol > 0.0 && rel_tol < 1.0,
        "relative rank tolerance must lie in (0, 1), got {rel_tol}"
    );
    let sv = linalg::singular_values(m);
    let largest = sv.first().copied().unwrap_or(0.0);
    if largest == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * largest).count()
}

/// The six metric values of a cortege in column order.
pub fn metric_ps_values(f: &MetricFunction, c: &Cortege32) -> Result<[f64; 6], DomainError> {
    let [pia, pib, pja, pjb, pka, pkb] = c.pairs();
    Ok([
        f.eval(pia.0, pia.1, pia.2)?,
        f.eval(pib.0, pib.1, pib.2)?,
        f.eval(pja.0, pja.1, pja.2)?,
        f.eval(pjb.0, pjb.1, pjb.2)?,
        f.eval(pka.0, pka.1, pka.2)?,
        f.eval(pkb.0, pkb.1, pkb.2)?,
    ])
}

/// The rank-(3,2) determinant law: det [[f(ia), f(ib), 1], [f(ja), f(jb), 1],
/// [f(ka), f(kb), 1]]. Rows are put in a canonical order internally and the
/// permutation sign is reattached, so swapping two rows negates the result
/// exactly, and a repeated row yields exactly zero.
pub fn ps_residual(
    f_ia: f64,
    f_ib: f64,
    f_ja: f64,
    f_jb: f64,
    f_ka: f64,
    f_kb: f64,
) -> f64 {
    let (rows, sign) = sort_rows([[f_ia, f_ib], [f_ja, f_jb], [f_ka, f_kb]]);
    sign * det_ones_column(&rows)
}

/// Same determinant divided by the largest absolute 2x2 minor of the value
/// matrix (ones column included), which makes the result scale-free.
/// Returns 0 when every minor vanishes (then the determinant does too).
pub fn ps_residual_normalized(
    f_ia: f64,
    f_ib: f64,
    f_ja: f64,
    f_jb: f64,
    f_ka: f64,
    f_kb: f64,
) -> f64 {
    let (rows, sign) = sort_rows([[f_ia, f_ib], [f_ja, f_jb], [f_ka, f_kb]]);
    let det = det_ones_column(&rows);
    let mut largest = 0.0f64;
    for (p, q) in [(0, 1), (0, 2), (1, 2)] {
        let m_ab = rows[p][0] * rows[q][1] - rows[q][0] * rows[p][1];
        let m_a1 = rows[p][0] - rows[q][0];
        let m_b1 = rows[p][1] - rows[q][1];
        largest = largest.max(m_ab.abs()).max(m_a1.abs()).max(m_b1.abs());
    }
    if largest == 0.0 {
        0.0
    } else {
        sign * det / largest
    }
}

fn sort_rows(mut rows: [[f64; 2]; 3]) -> ([[f64; 2]; 3], f64) {
    let mut sign = 1.0;
    // three-element bubble sort, counting swaps
    for pass in 0..2 {
        for idx in 0..2 - pass {
            let a = rows[idx];
            let b = rows[idx + 1];
            if (a[0], a[1]) > (b[0], b[1]) {
                rows.swap(idx, idx + 1);
                sign = -sign;
            }
        }
    }
    (rows, sign)
}

fn det_ones_column(rows: &[[f64; 2]; 3]) -> f64 {
    let m12 = rows[0][0] * rows[1][1] - rows[1][0] * rows[0][1];
    let m13 = rows[0][0] * rows[2][1] - rows[2][0] * rows[0][1];
    let m23 = rows[1][0] * rows[2][1] - rows[2][0] * rows[1][1];
    (m12 - m13) + m23
}

fn det4(rows: [[f64; 4]; 4]) -> f64 {
    let m = DMatrix::from_fn(4, 4, |r, c| rows[r][c]);
    linalg::det(&m)
}

fn minor_a_from(ja: &Jet, ka: &Jet) -> f64 {
    ja.d_xi * ka.d_eta - ka.d_xi * ja.d_eta
}

fn minor_b1_from(j: &CortegeJets) -> f64 {
    det4([
        [j.ja.d_x, j.jb.d_x, 0.0, 0.0],
        [0.0, 0.0, j.ka.d_x, j.kb.d_x],
        [j.ja.d_eta, 0.0, j.ka.d_eta, 0.0],
        [0.0, j.jb.d_xi, 0.0, j.kb.d_xi],
    ])
}

fn minor_c1_from(j: &CortegeJets) -> f64 {
    det4([
        [j.ja.d_x, j.jb.d_x, 0.0, 0.0],
        [0.0, 0.0, j.ka.d_x, j.kb.d_x],
        [j.ja.d_xi, 0.0, j.ka.d_xi, 0.0],
        [0.0, j.jb.d_xi, 0.0, j.kb.d_xi],
    ])
}

fn minor_b2_from(j: &CortegeJets) -> f64 {
    det4([
        [j.ja.d_x, j.jb.d_x, 0.0, 0.0],
        [0.0, 0.0, j.ka.d_x, j.kb.d_x],
        [j.ja.d_eta, 0.0, j.ka.d_eta, 0.0],
        [0.0, j.jb.d_eta, 0.0, j.kb.d_eta],
    ])
}

fn minor_c2_from(j: &CortegeJets) -> f64 {
    det4([
        [j.ja.d_x, j.jb.d_x, 0.0, 0.0],
        [0.0, 0.0, j.ka.d_x, j.kb.d_x],
        [j.ja.d_xi, 0.0, j.ka.d_xi, 0.0],
        [0.0, j.jb.d_eta, 0.0, j.kb.d_eta],
    ])
}

/// 2x2 minor of (f_xi, f_eta) at the alpha pairs of points j and k.
pub fn minor_a(f: &MetricFunction, c: &Cortege32) -> Result<f64, DomainError> {
    let j = cortege_jets(f, c)?;
    Ok(minor_a_from(&j.ja, &j.ka))
}

pub fn minor_b1(f: &MetricFunction, c: &Cortege32) -> Result<f64, DomainError> {
    Ok(minor_b1_from(&cortege_jets(f, c)?))
}

pub fn minor_c1(f: &MetricFunction, c: &Cortege32) -> Result<f64, DomainError> {
    Ok(minor_c1_from(&cortege_jets(f, c)?))
}

/// B1 with f_xi at the beta pairs replaced by f_eta.
pub fn minor_b2(f: &MetricFunction, c: &Cortege32) -> Result<f64, DomainError> {
    Ok(minor_b2_from(&cortege_jets(f, c)?))
}

/// C1 with f_xi at the beta pairs replaced by f_eta.
pub fn minor_c2(f: &MetricFunction, c: &Cortege32) -> Result<f64, DomainError> {
    Ok(minor_c2_from(&cortege_jets(f, c)?))
}

fn relation_terms(j: &CortegeJets) -> ([f64; 3], [f64; 3]) {
    let a = minor_a_from(&j.ja, &j.ka);
    let b1 = minor_b1_from(j);
    let c1 = minor_c1_from(j);
    let b2 = minor_b2_from(j);
    let c2 = minor_c2_from(j);
    let first = [
        -j.ia.d_x * j.ib.d_xi * j.jb.d_x * j.kb.d_x * a,
        -j.ia.d_xi * j.ib.d_x * b1,
        j.ia.d_eta * j.ib.d_x * c1,
    ];
    let second = [
        -j.ia.d_x * j.ib.d_eta * j.jb.d_x * j.kb.d_x * a,
        -j.ia.d_xi * j.ib.d_x * b2,
        j.ia.d_eta * j.ib.d_x * c2,
    ];
    (first, second)
}

fn max_abs(terms: &[f64]) -> f64 {
    terms.iter().fold(0.0f64, |m, t| m.max(t.abs()))
}

/// The two differential relations every rank-(3,2) metric satisfies; each
/// equals the sixth-order minor of the functional matrix with the f_eta
/// (respectively f_xi) beta row removed, expanded along the first column.
pub fn relations6_residual(
    f: &MetricFunction,
    c: &Cortege32,
) -> Result<(f64, f64), DomainError> {
    let j = cortege_jets(f, c)?;
    let (first, second) = relation_terms(&j);
    Ok((first.iter().sum(), second.iter().sum()))
}

/// The two relations divided by the largest absolute expansion term, making
/// the zero test scale-free. A relation whose terms all vanish reports 0.
pub fn relations6_normalized(
    f: &MetricFunction,
    c: &Cortege32,
) -> Result<(f64, f64), DomainError> {
    let j = cortege_jets(f, c)?;
    let (first, second) = relation_terms(&j);
    let normalize = |terms: [f64; 3]| {
        let scale = max_abs(&terms);
        if scale == 0.0 {
            0.0
        } else {
            terms.iter().sum::<f64>() / scale
        }
    };
    Ok((normalize(first), normalize(second)))
}

/// (det, product, expansion scale): the determinant side, the product side,
/// and the largest absolute expansion term of either.
fn product_identity_sides(j: &CortegeJets) -> (f64, f64, f64) {
    let b1 = minor_b1_from(j);
    let c1 = minor_c1_from(j);
    let b2 = minor_b2_from(j);
    let c2 = minor_c2_from(j);
    let det = b1 * c2 - c1 * b2;
    let a_alpha = minor_a_from(&j.ja, &j.ka);
    let a_beta = j.jb.d_xi * j.kb.d_eta - j.kb.d_xi * j.jb.d_eta;
    let product = j.ja.d_x * j.jb.d_x * j.ka.d_x * j.kb.d_x * a_alpha * a_beta;
    let scale = (b1 * c2).abs().max((c1 * b2).abs()).max(product.abs());
    (det, product, scale)
}

/// Algebraic identity relating the coefficient determinant of the two
/// relations to a product of first-column factors:
/// det [[B1, C1], [B2, C2]] + f_x(ja) f_x(jb) f_x(ka) f_x(kb) A(alpha) A(beta)
/// vanishes for every smooth metric, not only symmetric ones.
pub fn minor_product_identity_residual(
    f: &MetricFunction,
    c: &Cortege32,
) -> Result<f64, DomainError> {
    let j = cortege_jets(f, c)?;
    let (det, product, _) = product_identity_sides(&j);
    Ok(det + product)
}

/// The identity residual divided by the largest absolute expansion term
/// (B1*C2, C1*B2 or the product side), making the zero test scale-free.
pub fn minor_product_identity_normalized(
    f: &MetricFunction,
    c: &Cortege32,
) -> Result<f64, DomainError> {
    let j = cortege_jets(f, c)?;
    let (det, product, scale) = product_identity_sides(&j);
    if scale == 0.0 {
        Ok(0.0)
    } else {
        Ok((det + product) / scale)
    }
}

/// Fifth-order minor of the canonical matrix: first five rows and columns,
/// equal to -xi_alpha * xi_beta^2 * (x_i - x_j).
pub fn minor5_canonical(c: &Cortege32) -> f64 {
    let m = canonical_matrix16(c).submatrix(&[0, 1, 2, 3, 4], &[0, 1, 2, 3, 4]);
    linalg::det(&m)
}
