//! Build the bundled array geometries and inspect their steering behavior:
//! per-sensor phases for a pointing direction and the magnitude of the
//! steering sum (the beam-pattern kernel every closed form is built from).
//!
//! Run with: cargo run --example steering_patterns

use wwbkit::closedform::steering_sum;
use wwbkit::geometry::{steering_vector, ArrayGeometry};

fn main() -> wwbkit::Result<()> {
    let ula = ArrayGeometry::ula(8, 0.5)?;
    let uca = ArrayGeometry::uca(16, 0.5)?;
    let vee = ArrayGeometry::v_shaped(6, 90f64.to_radians(), 0.5)?;

    for g in [&ula, &uca, &vee] {
        println!(
            "{}: M = {}, {}",
            g.name(),
            g.len(),
            if g.is_linear() {
                "linear (estimates sin(elevation))"
            } else {
                "planar (estimates direction cosines u, v)"
            }
        );
    }

    // Steering vector of the linear array toward 30 degrees elevation.
    let theta = [30f64.to_radians().sin()];
    let a = steering_vector(&ula, &theta)?;
    println!("\nula8 steering at 30 deg elevation (sin = {:.3}):", theta[0]);
    for (i, e) in a.iter().enumerate() {
        println!("  sensor {i}: phase {:7.2} deg", e.arg().to_degrees());
    }
    let norm2: f64 = a.iter().map(|e| e.norm_sqr()).sum();
    println!("  ||a||^2 = {norm2} (equals M exactly)");

    // The steering-sum kernel |sum exp(-j 2 pi dx h)| controls how fast a
    // test-point displacement h decorrelates the array response.
    println!("\n|steering sum| over test-point displacement (uca16):");
    for k in 0..=10 {
        let h = 0.2 * k as f64;
        let s = steering_sum(&uca, h, 0.0).norm();
        let bar = "#".repeat((s * 3.0).round() as usize);
        println!("  h = {h:>4.1}: {s:6.3}  {bar}");
    }
    Ok(())
}
