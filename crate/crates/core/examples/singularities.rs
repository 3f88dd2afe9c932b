//! Singularities are unavoidable on closed genus-0 surfaces: indices summed
//! over vertices must equal the Euler characteristic. Solves a subdivided
//! icosahedron and a three-cylinder intersection and lists the records.

use octafield::analysis::{extract_field, singularity_indices};
use octafield::mesh::{make_canonical_mesh, CanonicalMesh};
use octafield::solver::{solve_with_degeneracy_loop, SolveConfig};

fn main() {
    for (name, kind) in [
        ("icosphere", CanonicalMesh::Icosphere { n: 2 }),
        ("cylinder3", CanonicalMesh::Cylinder3 { n: 8 }),
    ] {
        let mesh = make_canonical_mesh(&kind).unwrap();
        let outcome = solve_with_degeneracy_loop(&mesh, &SolveConfig::default()).unwrap();
        let extraction = extract_field(&mesh, &outcome.field);
        let report = singularity_indices(&mesh, &extraction.crosses);
        println!(
            "{name}: {} faces, chi = {}, {} singular vertices, total index {}",
            mesh.n_faces(),
            mesh.euler_characteristic,
            report.records.len(),
            report.total_index
        );
        let mut by_index = std::collections::BTreeMap::new();
        for r in &report.records {
            *by_index.entry(r.index_quarters).or_insert(0usize) += 1;
        }
        for (quarters, count) in by_index {
            println!("  {count:3} vertices of index {:+.2}", quarters as f64 / 4.0);
        }
        println!();
    }
}
