//! The cost of twisting away from a crease: evaluates the frame-difference
//! energy across a bend and compares it to its closed form
//! `(5/24)(7 + cos 4b) sin^2 2t`.

use octafield::sh::{crease_energy, crease_twist_cost};

fn main() {
    let pi = std::f64::consts::PI;
    println!("bend b \\ twist t   0      pi/8     pi/4     3pi/8");
    let mut worst = 0.0f64;
    for ib in 0..=6 {
        let b = pi * ib as f64 / 6.0;
        let base = crease_energy(0.0, b, 0.0);
        print!("b = {b:5.3}        ");
        for it in 0..4 {
            let t = pi * it as f64 / 8.0;
            let excess = crease_energy(0.0, b, t) - base;
            worst = worst.max((excess - crease_twist_cost(b, t)).abs());
            print!("{excess:7.4} ");
        }
        println!();
    }
    println!("\nmax deviation from the closed form: {worst:.3e}");

    // crease alignment is a minimum over all (a, b, t)
    let mut min_excess = f64::INFINITY;
    let n = 24;
    for ia in 0..n {
        for ib in 0..n {
            for it in 0..n {
                let (a, b, t) = (
                    pi * ia as f64 / n as f64,
                    pi * ib as f64 / n as f64,
                    pi * it as f64 / n as f64,
                );
                min_excess = min_excess.min(crease_energy(a, b, t) - crease_energy(0.0, b, 0.0));
            }
        }
    }
    println!("min over a {n}^3 grid of E(a,b,t) - E(0,b,0): {min_excess:.3e} (never negative)");
}
