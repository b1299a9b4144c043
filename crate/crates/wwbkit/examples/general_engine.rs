//! The general moment-matrix engine next to the planar closed forms, and
//! what it adds: arbitrary priors (here Gaussian) and multi-source G
//! assembly, which the closed forms do not cover.
//!
//! Run with: cargo run --example general_engine

use wwbkit::closedform::{planar_g_uncond, PlanarBoundInputs};
use wwbkit::geometry::ArrayGeometry;
use wwbkit::gmatrix::g_matrix;
use wwbkit::optimizer::wwb_from_g;
use wwbkit::prior::{Prior, PriorSpec};
use wwbkit::signal::SignalModel;

fn main() -> wwbkit::Result<()> {
    let geometry = ArrayGeometry::uca(8, 0.5)?;
    let model = SignalModel::unconditional(1.0, 1.0, 20)?;
    let (h, s) = ([0.25, -0.4], [0.5, 0.5]);

    // 1. uniform prior on [-1,1]^2: the general engine reproduces the
    //    closed forms entry by entry
    let uniform = PriorSpec::uniform_unit(2);
    let general = g_matrix(&geometry, &model, &uniform, &h, &s, 512)?;
    let closed = planar_g_uncond(&PlanarBoundInputs {
        geometry: &geometry,
        model: &model,
        h_u: h[0],
        h_v: h[1],
        s_u: s[0],
        s_v: s[1],
    })?;
    println!("uniform prior, G entries (general engine | closed form):");
    for i in 0..2 {
        for j in 0..2 {
            println!(
                "  G[{i}][{j}] = {:16.10e} | {:16.10e}",
                general.entries[i][j], closed.entries[i][j]
            );
        }
    }

    // 2. a Gaussian prior concentrated around broadside: only the general
    //    engine handles it; the tighter prior pulls the bound down
    let gaussian = PriorSpec::new(vec![
        Prior::Gaussian { mu: 0.0, sigma2: 0.05 },
        Prior::Gaussian { mu: 0.0, sigma2: 0.05 },
    ])?;
    let g_gauss = g_matrix(&geometry, &model, &gaussian, &h, &s, 512)?;
    let b_uni = wwb_from_g(&h, &general)?;
    let b_gauss = wwb_from_g(&h, &g_gauss)?;
    println!("\nbound diagonal at this (h, s):");
    println!("  uniform prior:  ({:.4e}, {:.4e})", b_uni[0][0], b_uni[1][1]);
    println!("  gaussian prior: ({:.4e}, {:.4e})", b_gauss[0][0], b_gauss[1][1]);

    // 3. two linear-array sources: a 2x2 G over both source directions
    let ula = ArrayGeometry::ula(6, 0.5)?;
    let two_src = SignalModel::unconditional(1.0, 1.0, 10)?;
    let prior2 = PriorSpec::new(vec![
        Prior::Uniform { a: -1.0, b: 0.0 },
        Prior::Uniform { a: 0.0, b: 1.0 },
    ])?;
    let g2 = g_matrix(&ula, &two_src, &prior2, &[0.1, 0.1], &[0.5, 0.5], 128)?;
    println!("\ntwo-source linear G (quadrature prior integration):");
    for row in &g2.entries {
        println!("  {:12.4e} {:12.4e}", row[0], row[1]);
    }
    Ok(())
}
