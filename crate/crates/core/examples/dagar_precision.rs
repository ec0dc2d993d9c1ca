//! Building DAGAR precision matrices and checking their basic properties.
//!
//! ```bash
//! cargo run --example dagar_precision
//! ```

use bdagar::graph::OrderedRegionGraph;
use bdagar::precision::{build_bf, car_precision, dagar_precision};

fn main() -> bdagar::Result<()> {
    // On a path the DAGAR prior is exactly a unit-variance AR(1).
    let path = OrderedRegionGraph::path(6)?;
    let q = dagar_precision(&path, 0.7)?;
    let cov = q.cholesky()?.inverse();
    println!("path of 6, rho = 0.7");
    println!(
        "  diag(Q^-1):      {:?}",
        cov.diagonal().iter().map(|v| format!("{v:.6}")).collect::<Vec<_>>()
    );
    println!("  corr(w0, w1):    {:.6}", cov[(0, 1)]);
    println!("  corr(w0, w2):    {:.6}  (0.7^2 = 0.49)", cov[(0, 2)]);

    // ρ = 0 gives independence.
    let grid = OrderedRegionGraph::grid(3, 3)?;
    let q0 = dagar_precision(&grid, 0.0)?;
    println!(
        "\n3x3 grid, rho = 0: Q == I is {}",
        q0.dense() == nalgebra::DMatrix::identity(9, 9)
    );

    // The log-determinant never needs a factorization.
    let parts = build_bf(&grid, 0.5)?;
    let q = dagar_precision(&grid, 0.5)?;
    let dense = q.dense().determinant().ln();
    println!("\n3x3 grid, rho = 0.5");
    println!("  neighbor counts in DAG order: {:?}", grid.neighbor_sets().counts());
    println!(
        "  F diagonal:   {:?}",
        parts.f().iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>()
    );
    println!("  sum log f:    {:.12}", q.logdet());
    println!("  dense logdet: {:.12}", dense);

    // A different vertex order gives a different (still valid) prior.
    let reordered = grid.reorder(&["r1c1", "r0c0", "r0c1", "r0c2", "r1c0", "r1c2", "r2c0", "r2c1", "r2c2"])?;
    let q_alt = dagar_precision(&reordered, 0.5)?;
    println!("  logdet with the centre first: {:.12}", q_alt.logdet());

    // The proper-CAR comparator for the same graph.
    let car = car_precision(&grid, 0.5)?;
    println!(
        "\nCAR: nonzeros {} (DAGAR {}), logdet {:.6}",
        car.matrix().nnz(),
        q.matrix().nnz(),
        car.logdet()
    );
    Ok(())
}
