//! The joint prior of two latent surfaces and the cross-disease correlation
//! it implies in each region.
//!
//! ```bash
//! cargo run --example bivariate_covariance
//! ```

use bdagar::bivariate::{cross_correlation_map, joint_covariance, joint_precision, BdagarSpec, LinkingParams};
use bdagar::graph::OrderedRegionGraph;
use bdagar::precision::PrecisionKind;
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> bdagar::Result<()> {
    let graph = OrderedRegionGraph::grid(3, 3)?;
    let spec = BdagarSpec {
        graph: graph.clone(),
        kind: PrecisionKind::Dagar,
        rho1: 0.6,
        rho2: 0.3,
        tau1: 2.0,
        tau2: 4.0,
        link: LinkingParams::new(0.8, 0.2),
    };
    let joint = joint_precision(&spec)?;
    let blocks = joint_covariance(&spec)?;
    let identity = joint.dense_precision() * blocks.to_dense();
    let err = (identity - DMatrix::identity(18, 18)).amax();
    println!("max |Q_w C - I| = {err:.2e}");
    println!("log det Q_w = {:.6}", joint.logdet());

    let corr = cross_correlation_map(&spec)?;
    println!("\nregion  degree  corr(w1, w2)");
    for (j, id) in graph.region_ids().iter().enumerate() {
        println!("{id:<6}  {:>6}  {:>12.4}", graph.degree(j), corr[j]);
    }

    // Empirical check with draws from the joint prior.
    let n = 20_000;
    let draws = joint.sample_many(n, &mut ChaCha8Rng::seed_from_u64(1))?;
    let c = 4; // the centre cell
    let (mut s11, mut s22, mut s12) = (0.0, 0.0, 0.0);
    for w in &draws {
        s11 += w[c] * w[c];
        s22 += w[9 + c] * w[9 + c];
        s12 += w[c] * w[9 + c];
    }
    println!(
        "\ncentre cell: theoretical corr {:.4}, empirical {:.4} from {n} draws",
        corr[c],
        s12 / (s11 * s22).sqrt()
    );
    Ok(())
}
