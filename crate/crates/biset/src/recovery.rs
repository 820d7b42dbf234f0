//! The data side of the geometry: decide whether a p x q table of measured
//! values is consistent with the rank-(3,2) symmetry, and recover hidden
//! coordinates from it up to the motion-group gauge.
//!
//! The model behind a table is `values[i][a] = x_i * xi_a + eta_a` (rows are
//! points of the first manifold, columns of the second). Subtracting the
//! per-column means eliminates eta exactly, leaving a rank-1 matrix whose
//! best factorization splits x from xi; the gauge convention mean(x) = 0,
//! ||x|| = 1, largest-|x| entry positive then pins the two motion parameters
//! and the factorization sign, so recovery is deterministic. Noise handling
//! (least squares throughout) is a choice of this tool, not of the theory.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::motions::Motion;
use crate::symmetry::ps_residual_normalized;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TableError {
    #[error("table must not be empty")]
    Empty,
    #[error("row {row} has {got} entries, expected {expected}")]
    Ragged {
        row: usize,
        expected: usize,
        got: usize,
    },
    #[error("entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },
    #[error("could not parse `{text}` as a number at row {row}, column {col}")]
    Parse {
        row: usize,
        col: usize,
        text: String,
    },
    #[error("csv error: {0}")]
    Csv(String),
    #[error("json error: {0}")]
    Json(String),
}

/// A p x q matrix of observed metric values.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementTable {
    values: DMatrix<f64>,
}

#[derive(Serialize, Deserialize)]
struct TableJson {
    values: Vec<Vec<f64>>,
}

impl MeasurementTable {
    pub fn from_matrix(values: DMatrix<f64>) -> Result<MeasurementTable, TableError> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(TableError::Empty);
        }
        for r in 0..values.nrows() {
            for c in 0..values.ncols() {
                if !values[(r, c)].is_finite() {
                    return Err(TableError::NonFinite { row: r, col: c });
                }
            }
        }
        Ok(MeasurementTable { values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<MeasurementTable, TableError> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(TableError::Empty);
        }
        let ncols = rows[0].len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != ncols {
                return Err(TableError::Ragged {
                    row: i,
                    expected: ncols,
                    got: row.len(),
                });
            }
        }
        Self::from_matrix(DMatrix::from_fn(rows.len(), ncols, |r, c| rows[r][c]))
    }

    /// Reads a comma-separated table. A single leading header row is
    /// detected by its first cell failing to parse as a number.
    pub fn from_csv_str(text: &str) -> Result<MeasurementTable, TableError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (r, record) in reader.records().enumerate() {
            let record = record.map_err(|e| TableError::Csv(e.to_string()))?;
            if record.iter().all(|f| f.is_empty()) {
                continue;
            }
            let mut row = Vec::with_capacity(record.len());
            let mut failed: Option<(usize, String)> = None;
            for (c, field) in record.iter().enumerate() {
                match field.parse::<f64>() {
                    Ok(v) => row.push(v),
                    Err(_) => {
                        failed = Some((c, field.to_string()));
                        break;
                    }
                }
            }
            match failed {
                None => rows.push(row),
                Some((c, text)) => {
                    // a non-numeric first data row is an optional header
                    if r == 0 && rows.is_empty() {
                        continue;
                    }
                    return Err(TableError::Parse { row: r, col: c, text });
                }
            }
        }
        Self::from_rows(&rows)
    }

    /// Reads the JSON form `{"values": [[...], ...]}`.
    pub fn from_json_str(text: &str) -> Result<MeasurementTable, TableError> {
        let parsed: TableJson =
            serde_json::from_str(text).map_err(|e| TableError::Json(e.to_string()))?;
        Self::from_rows(&parsed.values)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        for r in 0..self.p() {
            for c in 0..self.q() {
                if c > 0 {
                    out.push(',');
                }
                out.push_str(&format!("{}", self.values[(r, c)]));
            }
            out.push('\n');
        }
        out
    }

    /// Number of rows (points of the first manifold).
    pub fn p(&self) -> usize {
        self.values.nrows()
    }

    /// Number of columns (points of the second manifold).
    pub fn q(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn get(&self, i: usize, a: usize) -> f64 {
        self.values[(i, a)]
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RecoveryError {
    #[error("table too small: need at least {need_p} rows and {need_q} columns, got {p} x {q}")]
    TableTooSmall {
        p: usize,
        q: usize,
        need_p: usize,
        need_q: usize,
    },
    #[error(
        "degenerate table: all rows identical / centered matrix is numerically zero, \
         so the row coordinates are unidentifiable"
    )]
    DegenerateTable,
    #[error("noise level must be finite and non-negative, got {0}")]
    InvalidNoise(f64),
    #[error("tolerance must be finite and positive, got {0}")]
    InvalidTolerance(f64),
    #[error("coordinate vectors disagree in length: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("gauge fit is degenerate: the x coordinates carry no spread")]
    GaugeFitDegenerate,
    #[error(transparent)]
    Table(#[from] TableError),
}

/// Record of the gauge convention a recovered coordinate set satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaugeRecord {
    /// Enforced mean of the x vector.
    pub x_mean: f64,
    /// Enforced Euclidean norm of the x vector.
    pub x_norm: f64,
    /// Index of the largest-magnitude x entry, made positive.
    pub anchor_index: usize,
    /// Whether the factorization sign had to be flipped for that.
    pub flipped: bool,
}

/// Row coordinates x and column coordinates (xi, eta), with an optional
/// record of the gauge fixing that produced them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coordinates {
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
    pub eta: Vec<f64>,
    pub gauge: Option<GaugeRecord>,
}

impl Coordinates {
    pub fn new(x: Vec<f64>, xi: Vec<f64>, eta: Vec<f64>) -> Result<Coordinates, RecoveryError> {
        if xi.len() != eta.len() {
            return Err(RecoveryError::DimensionMismatch(xi.len(), eta.len()));
        }
        Ok(Coordinates {
            x,
            xi,
            eta,
            gauge: None,
        })
    }

    pub fn p(&self) -> usize {
        self.x.len()
    }

    pub fn q(&self) -> usize {
        self.xi.len()
    }

    /// The coordinates transformed by a motion. The generated table is
    /// unchanged; any gauge record no longer applies and is dropped.
    pub fn apply_motion(&self, m: &Motion) -> Coordinates {
        let (a, b) = (m.a(), m.b());
        Coordinates {
            x: self.x.iter().map(|&x| a * x + b).collect(),
            xi: self.xi.iter().map(|&xi| xi / a).collect(),
            eta: self
                .eta
                .iter()
                .zip(&self.xi)
                .map(|(&eta, &xi)| eta - b * xi / a)
                .collect(),
            gauge: None,
        }
    }

    /// The exact table this coordinate set generates.
    pub fn table(&self) -> Result<MeasurementTable, RecoveryError> {
        generate_table(&self.x, &self.xi, &self.eta, 0.0, 0)
    }
}

/// Builds the table values[i][a] = x_i*xi_a + eta_a, optionally perturbed by
/// centered Gaussian noise with the given standard deviation. For a fixed
/// seed the result is bit-reproducible; sigma = 0 adds nothing at all.
pub fn generate_table(
    x: &[f64],
    xi: &[f64],
    eta: &[f64],
    noise_sigma: f64,
    seed: u64,
) -> Result<MeasurementTable, RecoveryError> {
    if xi.len() != eta.len() {
        return Err(RecoveryError::DimensionMismatch(xi.len(), eta.len()));
    }
    if !(noise_sigma.is_finite() && noise_sigma >= 0.0) {
        return Err(RecoveryError::InvalidNoise(noise_sigma));
    }
    let p = x.len();
    let q = xi.len();
    let mut values = DMatrix::from_fn(p, q, |i, a| x[i] * xi[a] + eta[a]);
    if noise_sigma > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, noise_sigma).expect("validated sigma");
        for i in 0..p {
            for a in 0..q {
                values[(i, a)] += normal.sample(&mut rng);
            }
        }
    }
    Ok(MeasurementTable::from_matrix(values)?)
}

/// Verdict of the symmetry test on a table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsDetection {
    pub max_residual: f64,
    pub median_residual: f64,
    pub verdict: bool,
    pub corteges_checked: usize,
}

/// Cap on the number of corteges examined; above it a seeded sample of this
/// size is used instead of full enumeration.
pub const CORTEGE_SAMPLE_CAP: usize = 200_000;

/// Tests every cortege of the table (or a seeded sample above the cap)
/// against the determinant law. Residuals are normalized per cortege, the
/// verdict is `max <= tol`.
pub fn detect_ps(t: &MeasurementTable, tol: f64) -> Result<PsDetection, RecoveryError> {
    detect_ps_with_seed(t, tol, 0)
}

pub fn detect_ps_with_seed(
    t: &MeasurementTable,
    tol: f64,
    seed: u64,
) -> Result<PsDetection, RecoveryError> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(RecoveryError::InvalidTolerance(tol));
    }
    let (p, q) = (t.p(), t.q());
    if p < 3 || q < 2 {
        return Err(RecoveryError::TableTooSmall {
            p,
            q,
            need_p: 3,
            need_q: 2,
        });
    }
    let total = choose3(p) * choose2(q);
    let corteges: Vec<[usize; 5]> = if total <= CORTEGE_SAMPLE_CAP as u128 {
        let mut v = Vec::with_capacity(total as usize);
        for i in 0..p {
            for j in i + 1..p {
                for k in j + 1..p {
                    for a in 0..q {
                        for b in a + 1..q {
                            v.push([i, j, k, a, b]);
                        }
                    }
                }
            }
        }
        v
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..CORTEGE_SAMPLE_CAP)
            .map(|_| {
                let triple = sample_ordered3(&mut rng, p);
                let pair = sample_ordered2(&mut rng, q);
                [triple[0], triple[1], triple[2], pair[0], pair[1]]
            })
            .collect()
    };
    let mut residuals: Vec<f64> = corteges
        .par_iter()
        .map(|&[i, j, k, a, b]| {
            ps_residual_normalized(
                t.get(i, a),
                t.get(i, b),
                t.get(j, a),
                t.get(j, b),
                t.get(k, a),
                t.get(k, b),
            )
            .abs()
        })
        .collect();
    residuals.sort_by(f64::total_cmp);
    let n = residuals.len();
    let max_residual = residuals[n - 1];
    let median_residual = if n % 2 == 1 {
        residuals[n / 2]
    } else {
        0.5 * (residuals[n / 2 - 1] + residuals[n / 2])
    };
    Ok(PsDetection {
        max_residual,
        median_residual,
        verdict: max_residual <= tol,
        corteges_checked: n,
    })
}

fn choose2(n: usize) -> u128 {
    let n = n as u128;
    n * (n - 1) / 2
}

fn choose3(n: usize) -> u128 {
    let n = n as u128;
    n * (n - 1) * (n - 2) / 6
}

fn sample_ordered3(rng: &mut ChaCha8Rng, n: usize) -> [usize; 3] {
    use rand::Rng;
    loop {
        let i = rng.random_range(0..n);
        let j = rng.random_range(0..n);
        let k = rng.random_range(0..n);
        if i < j && j < k {
            return [i, j, k];
        }
    }
}

fn sample_ordered2(rng: &mut ChaCha8Rng, n: usize) -> [usize; 2] {
    use rand::Rng;
    loop {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a < b {
            return [a, b];
        }
    }
}

/// Relative threshold below which the centered matrix counts as zero.
fn degenerate_threshold(norm_values: f64) -> f64 {
    1e-12 * (1.0 + norm_values)
}

/// Fits values ~ x*xi' + 1*eta' by column centering, a best rank-1
/// factor of the centered matrix, and the gauge normalization. Returns the
/// coordinates and the relative Frobenius reconstruction residual.
pub fn recover_coordinates(
    t: &MeasurementTable,
) -> Result<(Coordinates, f64), RecoveryError> {
    let (p, q) = (t.p(), t.q());
    if p < 2 || q < 1 {
        return Err(RecoveryError::TableTooSmall {
            p,
            q,
            need_p: 2,
            need_q: 1,
        });
    }
    let values = t.values();
    let norm_values = values.norm();

    // eta sits in the column means once mean(x) = 0 is enforced
    let col_means: Vec<f64> = (0..q).map(|a| values.column(a).mean()).collect();
    let mut centered = values.clone();
    for a in 0..q {
        for i in 0..p {
            centered[(i, a)] -= col_means[a];
        }
    }
    if centered.norm() <= degenerate_threshold(norm_values) {
        return Err(RecoveryError::DegenerateTable);
    }

    let svd = crate::linalg::svd(&centered);

    // leading left singular vector, re-centered exactly and renormalized
    let mut x: Vec<f64> = (0..p).map(|i| svd.u[(i, 0)]).collect();
    let mean = x.iter().sum::<f64>() / p as f64;
    for v in &mut x {
        *v -= mean;
    }
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm <= 1e-300 {
        return Err(RecoveryError::DegenerateTable);
    }
    for v in &mut x {
        *v /= norm;
    }
    let anchor_index = x
        .iter()
        .enumerate()
        .max_by(|(_, a), (_, b)| a.abs().total_cmp(&b.abs()))
        .map(|(idx, _)| idx)
        .expect("nonempty x");
    let flipped = x[anchor_index] < 0.0;
    if flipped {
        for v in &mut x {
            *v = -*v;
        }
    }

    // optimal xi given the unit-norm x: xi_a = <centered column a, x>
    let xi: Vec<f64> = (0..q)
        .map(|a| (0..p).map(|i| centered[(i, a)] * x[i]).sum())
        .collect();
    let eta = col_means;

    let mut residual_sq = 0.0;
    for i in 0..p {
        for a in 0..q {
            let r = values[(i, a)] - (x[i] * xi[a] + eta[a]);
            residual_sq += r * r;
        }
    }
    let residual = if norm_values == 0.0 {
        0.0
    } else {
        residual_sq.sqrt() / norm_values
    };

    let coords = Coordinates {
        x,
        xi,
        eta,
        gauge: Some(GaugeRecord {
            x_mean: 0.0,
            x_norm: 1.0,
            anchor_index,
            flipped,
        }),
    };
    Ok((coords, residual))
}

/// Minimum over motions of the max-norm discrepancy between `m . c1` and
/// `c2`, with the motion obtained in closed form by least squares on the
/// x vectors.
pub fn gauge_distance(c1: &Coordinates, c2: &Coordinates) -> Result<f64, RecoveryError> {
    if c1.p() != c2.p() {
        return Err(RecoveryError::DimensionMismatch(c1.p(), c2.p()));
    }
    if c1.q() != c2.q() {
        return Err(RecoveryError::DimensionMismatch(c1.q(), c2.q()));
    }
    let p = c1.p() as f64;
    let mean1 = c1.x.iter().sum::<f64>() / p;
    let mean2 = c2.x.iter().sum::<f64>() / p;
    let var: f64 = c1.x.iter().map(|&v| (v - mean1) * (v - mean1)).sum();
    if var <= 1e-300 {
        return Err(RecoveryError::GaugeFitDegenerate);
    }
    let cov: f64 = c1
        .x
        .iter()
        .zip(&c2.x)
        .map(|(&u, &v)| (u - mean1) * (v - mean2))
        .sum();
    let a = cov / var;
    if !(a.is_finite() && a.abs() > 1e-300) {
        return Err(RecoveryError::GaugeFitDegenerate);
    }
    let b = mean2 - a * mean1;

    let mut dist = 0.0f64;
    for (&u, &v) in c1.x.iter().zip(&c2.x) {
        dist = dist.max((a * u + b - v).abs());
    }
    for (&u, &v) in c1.xi.iter().zip(&c2.xi) {
        dist = dist.max((u / a - v).abs());
    }
    for ((&eta1, &xi1), &eta2) in c1.eta.iter().zip(&c1.xi).zip(&c2.eta) {
        dist = dist.max((eta1 - b * xi1 / a - eta2).abs());
    }
    Ok(dist)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(rows: &[Vec<f64>]) -> MeasurementTable {
        MeasurementTable::from_rows(rows).unwrap()
    }

    #[test]
    fn generate_reference_tables() {
        let t = generate_table(&[0.0, 1.0], &[1.0], &[0.0], 0.0, 0).unwrap();
        assert_eq!(t.values().as_slice(), &[0.0, 1.0]);

        let t = generate_table(&[0.0, 1.0, 2.0], &[1.0, 2.0], &[0.0, 3.0], 0.0, 0).unwrap();
        assert_eq!(t.get(0, 0), 0.0);
        assert_eq!(t.get(0, 1), 3.0);
        assert_eq!(t.get(1, 0), 1.0);
        assert_eq!(t.get(1, 1), 5.0);
        assert_eq!(t.get(2, 0), 2.0);
        assert_eq!(t.get(2, 1), 7.0);
    }

    #[test]
    fn noisy_generation_is_reproducible() {
        let a = generate_table(&[0.0, 1.0, 2.0], &[1.0, 2.0], &[0.0, 3.0], 0.1, 99).unwrap();
        let b = generate_table(&[0.0, 1.0, 2.0], &[1.0, 2.0], &[0.0, 3.0], 0.1, 99).unwrap();
        assert_eq!(a, b);
        let c = generate_table(&[0.0, 1.0, 2.0], &[1.0, 2.0], &[0.0, 3.0], 0.1, 100).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn detect_accepts_the_reference_table() {
        let t = table(&[vec![0.0, 3.0], vec![1.0, 5.0], vec![2.0, 7.0]]);
        let d = detect_ps(&t, 1e-9).unwrap();
        assert!(d.verdict);
        assert_eq!(d.corteges_checked, 1);
        assert_eq!(d.max_residual, 0.0);
    }

    #[test]
    fn detect_rejects_the_witness_table() {
        let t = table(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]);
        let d = detect_ps(&t, 1e-9).unwrap();
        assert!(!d.verdict);
        assert!((d.max_residual - 1.0).abs() < 1e-15);
    }

    #[test]
    fn detect_needs_enough_points() {
        let t = table(&[vec![0.0, 3.0], vec![1.0, 5.0]]);
        assert!(matches!(
            detect_ps(&t, 1e-9),
            Err(RecoveryError::TableTooSmall { .. })
        ));
    }

    #[test]
    fn recover_reference_table_exactly() {
        let t = table(&[vec![0.0, 3.0], vec![1.0, 5.0], vec![2.0, 7.0]]);
        let (coords, residual) = recover_coordinates(&t).unwrap();
        assert!(residual <= 1e-12, "residual {residual}");
        let gauge = coords.gauge.unwrap();
        assert_eq!(gauge.x_mean, 0.0);
        // reconstruction reproduces the table
        let rebuilt = coords.table().unwrap();
        for i in 0..3 {
            for a in 0..2 {
                assert!((rebuilt.get(i, a) - t.get(i, a)).abs() < 1e-12);
            }
        }
        // and the recovered frame is a motion away from the truth
        let truth = Coordinates::new(vec![0.0, 1.0, 2.0], vec![1.0, 2.0], vec![0.0, 3.0]).unwrap();
        let d = gauge_distance(&coords, &truth).unwrap();
        assert!(d <= 1e-10, "gauge distance {d}");
    }

    #[test]
    fn constant_columns_are_degenerate() {
        let t = table(&[vec![4.0, 7.0], vec![4.0, 7.0], vec![4.0, 7.0]]);
        assert!(matches!(
            recover_coordinates(&t),
            Err(RecoveryError::DegenerateTable)
        ));
    }

    #[test]
    fn gauge_distance_identities() {
        let c = Coordinates::new(vec![0.0, 1.0, 2.0], vec![1.0, 2.0], vec![0.0, 3.0]).unwrap();
        assert_eq!(gauge_distance(&c, &c).unwrap(), 0.0);

        let m = Motion::new(1.7, -0.9).unwrap();
        let moved = c.apply_motion(&m);
        assert!(gauge_distance(&c, &moved).unwrap() <= 1e-10);
        // moving the coordinates leaves the generated table unchanged
        let t0 = c.table().unwrap();
        let t1 = moved.table().unwrap();
        for i in 0..3 {
            for a in 0..2 {
                assert!((t0.get(i, a) - t1.get(i, a)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gauge_distance_sees_perturbations() {
        let c1 = Coordinates::new(vec![0.0, 1.0, 2.0], vec![1.0, 2.0], vec![0.0, 3.0]).unwrap();
        let delta = 0.25;
        let mut c2 = c1.clone();
        c2.eta[1] += delta;
        let d = gauge_distance(&c1, &c2).unwrap();
        assert!(d >= delta / 2.0, "distance {d} vs delta {delta}");
    }

    #[test]
    fn csv_round_trip_with_header_detection() {
        let t = table(&[vec![0.0, 3.0], vec![1.0, 5.0], vec![2.0, 7.0]]);
        let csv_text = t.to_csv_string();
        let back = MeasurementTable::from_csv_str(&csv_text).unwrap();
        assert_eq!(t, back);

        let with_header = format!("col_a,col_b\n{csv_text}");
        let back = MeasurementTable::from_csv_str(&with_header).unwrap();
        assert_eq!(t, back);

        let bad = "1.0,2.0\n3.0,oops\n";
        assert!(matches!(
            MeasurementTable::from_csv_str(bad),
            Err(TableError::Parse { row: 1, col: 1, .. })
        ));
    }

    #[test]
    fn json_table_form() {
        let t = MeasurementTable::from_json_str("{\"values\": [[0, 3], [1, 5], [2, 7]]}").unwrap();
        assert_eq!(t.p(), 3);
        assert_eq!(t.q(), 2);
        assert!(MeasurementTable::from_json_str("{\"values\": []}").is_err());
    }

    #[test]
    fn ragged_and_non_finite_rows_are_rejected() {
        assert!(matches!(
            MeasurementTable::from_rows(&[vec![1.0, 2.0], vec![3.0]]),
            Err(TableError::Ragged { row: 1, .. })
        ));
        assert!(matches!(
            MeasurementTable::from_rows(&[vec![1.0], vec![f64::NAN]]),
            Err(TableError::NonFinite { row: 1, col: 0 })
        ));
    }
}
