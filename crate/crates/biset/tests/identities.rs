//! Cross-checks of every determinant-based quantity against independent
//! cofactor oracles, including the exact-integer rank witness.

mod common;

use biset::geometry::{general_form_metric, Cortege32, MetricFunction, OneVarFn, TwoVarFn};
use biset::sampling::{sample_cortege, seeded_rng, CoordRange};
use biset::symmetry::{
    build_functional_matrix, canonical_matrix16, cortege_jets, metric_ps_values, minor5_canonical,
    minor_a, minor_b1, minor_b2, minor_c1, minor_c2, minor_product_identity_normalized,
    numeric_rank, ps_residual, relations6_residual,
};
use biset::{canonical_metric, parse_metric_expr};
use common::{cofactor_det, cofactor_det_i128, matrix_rows};

fn test_metrics() -> Vec<MetricFunction> {
    vec![
        canonical_metric(),
        general_form_metric(
            OneVarFn::Cubic,
            OneVarFn::exp(),
            TwoVarFn::exp_sum(),
            TwoVarFn::eta(),
        )
        .unwrap(),
        general_form_metric(
            OneVarFn::Identity,
            OneVarFn::exp_neg(),
            TwoVarFn::xi(),
            TwoVarFn::eta(),
        )
        .unwrap(),
        MetricFunction::from(parse_metric_expr("x*xi + x^2*eta").unwrap()),
        MetricFunction::from(parse_metric_expr("tanh(x)*xi + eta/(2 + sin(x))").unwrap()),
    ]
}

#[test]
fn relations_equal_the_deleted_row_minors() {
    let range = CoordRange::default();
    let mut rng = seeded_rng(2101);
    for f in test_metrics() {
        for _ in 0..40 {
            let c = sample_cortege(&mut rng, &range);
            let m = build_functional_matrix(&f, &c).unwrap();
            let (r1, r2) = relations6_residual(&f, &c).unwrap();
            let cols = [0, 1, 2, 3, 4, 5];
            let det_without_last = cofactor_det(&matrix_rows(&m, &[0, 1, 2, 3, 4, 5], &cols));
            let det_without_sixth = cofactor_det(&matrix_rows(&m, &[0, 1, 2, 3, 4, 6], &cols));
            // both sides sit on top of O(entry^6) cancellations, so compare
            // them relative to that scale, not to their own near-zero values
            let entry_scale: f64 = (0..7)
                .map(|r| (0..6).map(|c| m.entry(r, c).abs()).fold(0.0, f64::max))
                .fold(0.0, f64::max);
            let term_scale = 1.0 + entry_scale.powi(6);
            assert!(
                (r1 - det_without_last).abs() / term_scale <= 1e-9,
                "first relation vs minor for {f}: {r1} vs {det_without_last}"
            );
            assert!(
                (r2 - det_without_sixth).abs() / term_scale <= 1e-9,
                "second relation vs minor for {f}: {r2} vs {det_without_sixth}"
            );
        }
    }
}

#[test]
fn minors_match_the_cofactor_oracle() {
    let range = CoordRange::default();
    let mut rng = seeded_rng(2102);
    for f in test_metrics() {
        let c = sample_cortege(&mut rng, &range);
        let jets = cortege_jets(&f, &c).unwrap();
        let b1_oracle = cofactor_det(&vec![
            vec![jets.ja.d_x, jets.jb.d_x, 0.0, 0.0],
            vec![0.0, 0.0, jets.ka.d_x, jets.kb.d_x],
            vec![jets.ja.d_eta, 0.0, jets.ka.d_eta, 0.0],
            vec![0.0, jets.jb.d_xi, 0.0, jets.kb.d_xi],
        ]);
        let c1_oracle = cofactor_det(&vec![
            vec![jets.ja.d_x, jets.jb.d_x, 0.0, 0.0],
            vec![0.0, 0.0, jets.ka.d_x, jets.kb.d_x],
            vec![jets.ja.d_xi, 0.0, jets.ka.d_xi, 0.0],
            vec![0.0, jets.jb.d_xi, 0.0, jets.kb.d_xi],
        ]);
        let b2_oracle = cofactor_det(&vec![
            vec![jets.ja.d_x, jets.jb.d_x, 0.0, 0.0],
            vec![0.0, 0.0, jets.ka.d_x, jets.kb.d_x],
            vec![jets.ja.d_eta, 0.0, jets.ka.d_eta, 0.0],
            vec![0.0, jets.jb.d_eta, 0.0, jets.kb.d_eta],
        ]);
        let c2_oracle = cofactor_det(&vec![
            vec![jets.ja.d_x, jets.jb.d_x, 0.0, 0.0],
            vec![0.0, 0.0, jets.ka.d_x, jets.kb.d_x],
            vec![jets.ja.d_xi, 0.0, jets.ka.d_xi, 0.0],
            vec![0.0, jets.jb.d_eta, 0.0, jets.kb.d_eta],
        ]);
        let scale = 1.0 + b1_oracle.abs().max(c1_oracle.abs());
        assert!((minor_b1(&f, &c).unwrap() - b1_oracle).abs() / scale <= 1e-10);
        assert!((minor_c1(&f, &c).unwrap() - c1_oracle).abs() / scale <= 1e-10);
        assert!((minor_b2(&f, &c).unwrap() - b2_oracle).abs() / scale <= 1e-10);
        assert!((minor_c2(&f, &c).unwrap() - c2_oracle).abs() / scale <= 1e-10);
    }
}

#[test]
fn canonical_c1_matches_the_structured_display() {
    // For the canonical metric, C1 reduces to the determinant of
    // [[xi_a, xi_b, 0, 0], [0, 0, xi_a, xi_b], [x_j, 0, x_k, 0],
    //  [0, x_j, 0, x_k]], which vanishes identically.
    let c = Cortege32::new([0.0, 1.0, 2.0], (1.0, 0.0), (2.0, 3.0));
    let displayed = cofactor_det(&vec![
        vec![c.xi_alpha, c.xi_beta, 0.0, 0.0],
        vec![0.0, 0.0, c.xi_alpha, c.xi_beta],
        vec![c.x_j, 0.0, c.x_k, 0.0],
        vec![0.0, c.x_j, 0.0, c.x_k],
    ]);
    let c1 = minor_c1(&canonical_metric(), &c).unwrap();
    assert_eq!(displayed, 0.0);
    assert!(c1.abs() <= 1e-12);
}

#[test]
fn product_identity_sides_evaluated_independently() {
    let range = CoordRange::default();
    let mut rng = seeded_rng(2103);
    for f in test_metrics() {
        for _ in 0..20 {
            let c = sample_cortege(&mut rng, &range);
            let jets = cortege_jets(&f, &c).unwrap();
            // left side via the cofactor oracle on the 2x2 of 4x4 oracles
            let b1 = minor_b1(&f, &c).unwrap();
            let c1 = minor_c1(&f, &c).unwrap();
            let b2 = minor_b2(&f, &c).unwrap();
            let c2 = minor_c2(&f, &c).unwrap();
            let det = cofactor_det(&vec![vec![b1, c1], vec![b2, c2]]);
            // right side straight from the derivative values
            let a_alpha = jets.ja.d_xi * jets.ka.d_eta - jets.ka.d_xi * jets.ja.d_eta;
            let a_beta = jets.jb.d_xi * jets.kb.d_eta - jets.kb.d_xi * jets.jb.d_eta;
            let product =
                jets.ja.d_x * jets.jb.d_x * jets.ka.d_x * jets.kb.d_x * a_alpha * a_beta;
            let scale = 1.0 + (b1 * c2).abs().max((c1 * b2).abs()).max(product.abs());
            assert!(
                (det + product).abs() / scale <= 1e-9,
                "identity breaks for {f}: det {det}, product {product}"
            );
            let n = minor_product_identity_normalized(&f, &c).unwrap();
            assert!(n.abs() <= 1e-9, "normalized identity residual {n} for {f}");
        }
    }
}

#[test]
fn minor_a_is_the_alpha_block_jacobian() {
    let mut rng = seeded_rng(2104);
    let range = CoordRange::default();
    let c = sample_cortege(&mut rng, &range);
    for f in test_metrics() {
        let jets = cortege_jets(&f, &c).unwrap();
        let oracle = cofactor_det(&vec![
            vec![jets.ja.d_xi, jets.ka.d_xi],
            vec![jets.ja.d_eta, jets.ka.d_eta],
        ]);
        let got = minor_a(&f, &c).unwrap();
        assert!((got - oracle).abs() <= 1e-12 * (1.0 + oracle.abs()));
    }
}

#[test]
fn quadratic_control_has_an_exactly_nonzero_sixth_minor() {
    // x*xi + x^2*eta on the integer cortege x=(1,2,3), alpha=(1,1),
    // beta=(2,-1). All matrix entries are integers, so the sixth-order
    // minor (f_eta beta row deleted) is computed exactly: it must be -144.
    let f = MetricFunction::from(parse_metric_expr("x*xi + x^2*eta").unwrap());
    let c = Cortege32::new([1.0, 2.0, 3.0], (1.0, 1.0), (2.0, -1.0));
    let m = build_functional_matrix(&f, &c).unwrap();
    let int_rows: Vec<Vec<i128>> = [0usize, 1, 2, 3, 4, 5]
        .iter()
        .map(|&r| {
            (0..6)
                .map(|col| {
                    let v = m.entry(r, col);
                    assert_eq!(v.fract(), 0.0, "entry ({r},{col}) must be integral");
                    v as i128
                })
                .collect()
        })
        .collect();
    let exact = cofactor_det_i128(&int_rows);
    assert_eq!(exact, -144);
    assert_eq!(numeric_rank(&m.to_dmatrix(), 1e-9), 6);
}

#[test]
fn minor5_matches_oracle_and_closed_form() {
    let range = CoordRange::default();
    let mut rng = seeded_rng(2105);
    for _ in 0..200 {
        let c = sample_cortege(&mut rng, &range);
        let got = minor5_canonical(&c);
        let m16 = canonical_matrix16(&c);
        let oracle = cofactor_det(&matrix_rows(&m16, &[0, 1, 2, 3, 4], &[0, 1, 2, 3, 4]));
        let closed = -c.xi_alpha * c.xi_beta * c.xi_beta * (c.x_i - c.x_j);
        assert!((got - oracle).abs() <= 1e-12 * (1.0 + oracle.abs()));
        assert!((got - closed).abs() <= 1e-10 * (1.0 + closed.abs()));
    }
}

#[test]
fn ps_residual_agrees_with_a_plain_cofactor_determinant() {
    let mut rng = seeded_rng(2106);
    let range = CoordRange::default();
    for _ in 0..200 {
        let c = sample_cortege(&mut rng, &range);
        let f = MetricFunction::from(parse_metric_expr("x*xi + x^2*eta").unwrap());
        let v = metric_ps_values(&f, &c).unwrap();
        let got = ps_residual(v[0], v[1], v[2], v[3], v[4], v[5]);
        let oracle = cofactor_det(&vec![
            vec![v[0], v[1], 1.0],
            vec![v[2], v[3], 1.0],
            vec![v[4], v[5], 1.0],
        ]);
        assert!(
            (got - oracle).abs() <= 1e-10 * (1.0 + oracle.abs()),
            "{got} vs {oracle}"
        );
    }
}

#[test]
fn canonical_values_satisfy_the_law_on_the_reference_cortege() {
    let c = Cortege32::new([0.0, 1.0, 2.0], (1.0, 0.0), (2.0, 3.0));
    let v = metric_ps_values(&canonical_metric(), &c).unwrap();
    assert_eq!(v, [0.0, 3.0, 1.0, 5.0, 2.0, 7.0]);
    assert_eq!(ps_residual(v[0], v[1], v[2], v[3], v[4], v[5]), 0.0);
}
