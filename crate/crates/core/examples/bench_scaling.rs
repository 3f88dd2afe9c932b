//! Direct-path timing across cube refinements. The KKT factorization keeps
//! the growth near-linear in the number of faces.

use octafield::cli::{run_bench, MeshSource};
use octafield::solver::SolveConfig;

fn main() {
    let sources: Vec<MeshSource> = [1usize, 2, 4, 8, 16, 32]
        .iter()
        .map(|n| MeshSource::Canonical(format!("cube:{n}")))
        .collect();
    let (csv, rows) = run_bench(&sources, &SolveConfig::default()).unwrap();
    print!("{csv}");
    let mut last: Option<f64> = None;
    println!("\nper 4x-face step:");
    for r in &rows {
        if let Some(prev) = last {
            println!(
                "  {:>6} faces: solve time ratio {:.2}",
                r.n_faces,
                r.solve_s / prev
            );
        }
        last = Some(r.solve_s);
    }
}
