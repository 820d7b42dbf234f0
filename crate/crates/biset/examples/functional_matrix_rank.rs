//! The 7x6 functional matrix of first partials on a cortege, its singular
//! values, and the rank criterion: symmetric metrics stay at rank 5,
//! anything else generically reaches 6.
//!
//! Run with: cargo run --example functional_matrix_rank

use biset::geometry::{general_form_metric, Cortege32, MetricFunction, OneVarFn, TwoVarFn};
use biset::linalg::singular_values;
use biset::sampling::{sample_cortege, seeded_rng, CoordRange};
use biset::{build_functional_matrix, canonical_metric, numeric_rank, parse_metric_expr};

fn main() {
    let c = Cortege32::new([0.0, 1.0, 2.0], (1.0, 0.0), (2.0, 3.0));
    let m = build_functional_matrix(&canonical_metric(), &c).unwrap();
    println!("canonical metric on x = (0, 1, 2), alpha = (1, 0), beta = (2, 3):");
    for row in m.entries() {
        println!("  {row:?}");
    }
    let sv = singular_values(&m.to_dmatrix());
    println!("singular values: {sv:.3?}");
    println!("rank at tolerance 1e-9: {}\n", numeric_rank(&m.to_dmatrix(), 1e-9));

    let metrics: Vec<(&str, MetricFunction)> = vec![
        ("canonical", canonical_metric()),
        (
            "cubic(exp(x)*exp(xi+eta) + eta)",
            general_form_metric(
                OneVarFn::Cubic,
                OneVarFn::exp(),
                TwoVarFn::exp_sum(),
                TwoVarFn::eta(),
            )
            .unwrap(),
        ),
        (
            "x*xi + x^2*eta   (not symmetric)",
            parse_metric_expr("x*xi + x^2*eta").unwrap().into(),
        ),
    ];
    let range = CoordRange::default();
    println!("rank distribution over 1000 random corteges:");
    for (name, f) in &metrics {
        let mut rng = seeded_rng(42);
        let mut histogram = std::collections::BTreeMap::new();
        for _ in 0..1000 {
            let cortege = sample_cortege(&mut rng, &range);
            let matrix = build_functional_matrix(f, &cortege).unwrap();
            let rank = numeric_rank(&matrix.to_dmatrix(), 1e-9);
            *histogram.entry(rank).or_insert(0usize) += 1;
        }
        println!("  {name:36} {histogram:?}");
    }
}
