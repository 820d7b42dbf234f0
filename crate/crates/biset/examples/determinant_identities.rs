//! The determinant law tying the six metric values of a cortege, the two
//! minor relations from the functional matrix, and the product-expansion
//! identity that holds for every smooth metric.
//!
//! Run with: cargo run --example determinant_identities

use biset::geometry::MetricFunction;
use biset::sampling::{sample_cortege, seeded_rng, CoordRange};
use biset::symmetry::{
    metric_ps_values, minor_a, minor_b1, minor_c1, minor_product_identity_normalized,
    relations6_normalized,
};
use biset::{canonical_metric, parse_metric_expr, ps_residual, ps_residual_normalized};

fn main() {
    let range = CoordRange::default();
    let mut rng = seeded_rng(1);
    let c = sample_cortege(&mut rng, &range);

    println!("cortege: {c:?}\n");
    let f = canonical_metric();
    let v = metric_ps_values(&f, &c).unwrap();
    println!("canonical values (ia ib ja jb ka kb): {v:.4?}");
    println!("determinant law residual: {:.3e}", ps_residual(v[0], v[1], v[2], v[3], v[4], v[5]));
    println!(
        "minors: A = {:.4}, B1 = {:.4}, C1 = {:.4}",
        minor_a(&f, &c).unwrap(),
        minor_b1(&f, &c).unwrap(),
        minor_c1(&f, &c).unwrap(),
    );

    let metrics: Vec<(&str, MetricFunction)> = vec![
        ("canonical", canonical_metric()),
        ("x*xi + x^2*eta", parse_metric_expr("x*xi + x^2*eta").unwrap().into()),
        ("tanh(x)*xi + eta", parse_metric_expr("tanh(x)*xi + eta").unwrap().into()),
    ];
    println!("\nworst residuals over 1000 random corteges:");
    println!("{:22} {:>14} {:>14} {:>16}", "metric", "det law", "relations", "product ident.");
    for (name, f) in &metrics {
        let mut rng = seeded_rng(2);
        let mut worst_ps = 0.0f64;
        let mut worst_rel = 0.0f64;
        let mut worst_prod = 0.0f64;
        for _ in 0..1000 {
            let c = sample_cortege(&mut rng, &range);
            let v = metric_ps_values(f, &c).unwrap();
            worst_ps = worst_ps
                .max(ps_residual_normalized(v[0], v[1], v[2], v[3], v[4], v[5]).abs());
            let (r1, r2) = relations6_normalized(f, &c).unwrap();
            worst_rel = worst_rel.max(r1.abs()).max(r2.abs());
            worst_prod = worst_prod.max(minor_product_identity_normalized(f, &c).unwrap().abs());
        }
        println!("{name:22} {worst_ps:>14.3e} {worst_rel:>14.3e} {worst_prod:>16.3e}");
    }
    println!("\nthe determinant law and the relations single out symmetric metrics;");
    println!("the product identity is algebraic and holds for all of them");
}
