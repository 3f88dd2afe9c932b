//! Tour of the band-4 frame algebra: the canonical frame, rotations through
//! the angular-momentum generators, twists, and normal alignment.

use nalgebra::Vector3;
use octafield::sh::{
    alignment_operator, canonical_frame, exp_rotation, twist_z, AngularMomentum,
};

fn main() {
    let f0 = canonical_frame();
    println!("canonical frame f0 = {:.6}", f0.coeffs.transpose());
    println!("|f0| = {:.12}", f0.norm());

    // rotations act on coefficients through e^{v.L}
    let am = AngularMomentum::canonical();
    println!("\nLz row 1: {:.3}", am.lz.row(0));
    let quarter = exp_rotation(&Vector3::new(0.0, 0.0, std::f64::consts::FRAC_PI_2));
    println!(
        "four-fold symmetry: |e^{{(pi/2)Lz}} f0 - f0| = {:.3e}",
        (quarter * f0.coeffs - f0.coeffs).norm()
    );

    // twisting about z moves only the two outer coefficients
    for theta in [0.0, std::f64::consts::PI / 8.0, std::f64::consts::FRAC_PI_4] {
        let t = twist_z(theta);
        println!(
            "twist {theta:.4}: c1 = {:+.6}, c9 = {:+.6}, f0.t = {:.6}",
            t.coeffs[0],
            t.coeffs[8],
            f0.dot(&t)
        );
    }

    // the alignment operator pins one frame axis to a chosen normal
    let n = Vector3::new(0.3, -0.5, 0.81).normalize();
    let op = alignment_operator(&n);
    let aligned = exp_rotation(&op.axis_angle) * twist_z(1.1).coeffs;
    println!(
        "\nalignment residual of an n-aligned frame: {:.3e}",
        (op.w * aligned - op.u0).norm()
    );
    println!(
        "alignment residual of the canonical frame:  {:.3e}",
        (op.w * f0.coeffs - op.u0).norm()
    );
}
