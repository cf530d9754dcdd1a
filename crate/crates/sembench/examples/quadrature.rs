//! Collocation rules and the derivative matrix.
//!
//! Prints the p = 4 rule, shows where exactness ends (degree 2p-1), and
//! checks two identities of the derivative matrix: rows sum to zero and
//! sampled polynomials of degree <= p differentiate exactly.
//!
//! ```bash
//! cargo run --example quadrature
//! ```

use sembench::basis::QuadratureSet;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let quad = QuadratureSet::new(4)?;
    println!("p = 4 rule on [-1, 1]:");
    for (x, w) in quad.nodes().iter().zip(quad.weights()) {
        println!("  node {x:>12.8}   weight {w:.8}");
    }

    // Integrate monomials. Degree 7 = 2p - 1 is the last exact one.
    println!("\nintegral of x^d against the exact value:");
    for d in [2u32, 6, 7, 8] {
        let numeric: f64 = quad
            .nodes()
            .iter()
            .zip(quad.weights())
            .map(|(&x, &w)| w * x.powi(d as i32))
            .sum();
        let exact = if d % 2 == 1 { 0.0 } else { 2.0 / (d as f64 + 1.0) };
        let flag = if (numeric - exact).abs() < 1e-13 { "exact" } else { "inexact" };
        println!("  d = {d}: {numeric:>12.8} vs {exact:>12.8}  ({flag})");
    }

    // A constant field has zero derivative, so each row of D sums to 0.
    let np = quad.num_nodes();
    let worst_row: f64 = (0..np)
        .map(|i| (0..np).map(|j| quad.d(i, j)).sum::<f64>().abs())
        .fold(0.0, f64::max);
    println!("\nlargest row sum of the derivative matrix: {worst_row:.2e}");

    // Differentiate a cubic sampled at the nodes; p = 4 represents it
    // exactly, so the collocated derivative is exact too.
    let f = |x: f64| 0.5 - x + 2.0 * x * x * x;
    let df = |x: f64| -1.0 + 6.0 * x * x;
    let samples: Vec<f64> = quad.nodes().iter().map(|&x| f(x)).collect();
    let mut worst = 0.0f64;
    for i in 0..np {
        let got: f64 = (0..np).map(|j| quad.d(i, j) * samples[j]).sum();
        worst = worst.max((got - df(quad.nodes()[i])).abs());
    }
    println!("worst nodal derivative error for a cubic: {worst:.2e}");
    Ok(())
}
