//! The essentiality inequalities: df/dx must not vanish and the Jacobian of
//! two sections with respect to (xi, eta) must not vanish. Degenerate
//! metrics fail them; the canonical one fails only on the measure-zero set
//! xi = 0.
//!
//! Run with: cargo run --example essentiality

use biset::geometry::{Cortege32, MetricFunction};
use biset::sampling::{sample_cortege, seeded_rng, CoordRange};
use biset::{canonical_metric, essentiality_check, parse_metric_expr};

fn main() {
    let range = CoordRange::default();
    let mut rng = seeded_rng(7);
    let probes: Vec<Cortege32> = (0..500).map(|_| sample_cortege(&mut rng, &range)).collect();

    let metrics: Vec<(&str, MetricFunction)> = vec![
        ("canonical", canonical_metric()),
        ("exp(-x)*xi + eta", parse_metric_expr("exp(-x)*xi + eta").unwrap().into()),
        ("eta            (x never enters)", parse_metric_expr("eta").unwrap().into()),
        ("x + xi         (eta never enters)", parse_metric_expr("x + xi").unwrap().into()),
    ];
    println!("essentiality over {} random probes (coordinates away from zero)\n", probes.len());
    for (name, f) in &metrics {
        let report = essentiality_check(f, &probes).unwrap();
        println!("{name:36} {:4}/{} probes pass", report.passed(), probes.len());
    }

    // one probe in detail, on the boundary xi_alpha = 0
    let boundary = Cortege32::new([0.5, 1.5, -0.7], (0.0, 0.3), (2.0, -0.4));
    let report = essentiality_check(&canonical_metric(), &[boundary]).unwrap();
    let o = &report.outcomes[0];
    println!("\nboundary probe with xi_alpha = 0 on the canonical metric:");
    println!(
        "  at alpha: df/dx = {} (nonzero: {}), Jacobian = {} (nonzero: {})",
        o.at_alpha.derivative_x,
        o.at_alpha.derivative_nonzero,
        o.at_alpha.jacobian,
        o.at_alpha.jacobian_nonzero,
    );
    println!(
        "  at beta:  df/dx = {} (nonzero: {}), Jacobian = {} (nonzero: {})",
        o.at_beta.derivative_x,
        o.at_beta.derivative_nonzero,
        o.at_beta.jacobian,
        o.at_beta.jacobian_nonzero,
    );
}
