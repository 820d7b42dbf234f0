//! The metric expression language: parsing, printing, evaluation, and the
//! error reporting for malformed input and out-of-domain points.
//!
//! Run with: cargo run --example parse_and_eval

use biset::{eval_expr, parse_metric_expr};

fn main() {
    for src in ["x*xi + eta", "exp(x)*xi", "(x - xi)*exp(-eta)", "x^-2 + tanh(eta)"] {
        let expr = parse_metric_expr(src).expect("valid expression");
        let value = eval_expr(&expr, 2.0, 3.0, 4.0).expect("defined at (2, 3, 4)");
        println!("{src:26} -> printed `{expr}`, value at (2,3,4) = {value}");
    }

    // the Greek spellings are synonyms
    let greek = parse_metric_expr("x*ξ + η").unwrap();
    println!("\n`x*ξ + η` parses as `{greek}`");

    // parse errors carry a byte offset
    match parse_metric_expr("x + * xi") {
        Ok(_) => unreachable!(),
        Err(e) => println!("\nmalformed input: {e}"),
    }
    match parse_metric_expr("x + voltage") {
        Ok(_) => unreachable!(),
        Err(e) => println!("unknown name:    {e}"),
    }

    // domain problems are evaluation errors, not parse errors
    let inv = parse_metric_expr("1/x").unwrap();
    match eval_expr(&inv, 0.0, 1.0, 1.0) {
        Ok(_) => unreachable!(),
        Err(e) => println!("at x = 0:        {e}"),
    }
}
