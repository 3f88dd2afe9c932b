//! File-format tour: write a canonical mesh as OBJ, reload it, solve, and
//! export every artifact (field JSON, report, singularities, PLY crosses)
//! into a directory.

use octafield::cli::{run_solve, MeshSource, RunManifest, FIELD_SCHEMA_VERSION};
use octafield::mesh::{make_canonical_mesh, CanonicalMesh};
use octafield::solver::SolveConfig;

fn main() {
    let dir = std::env::temp_dir().join("octafield_obj_pipeline");
    std::fs::create_dir_all(&dir).unwrap();
    let obj = dir.join("cylinder3.obj");
    let mesh = make_canonical_mesh(&CanonicalMesh::Cylinder3 { n: 8 }).unwrap();
    mesh.write_obj(&obj).unwrap();
    println!("wrote {} ({} faces)", obj.display(), mesh.n_faces());

    let manifest = RunManifest {
        input: MeshSource::Path(obj),
        config: SolveConfig::default(),
        out_dir: dir.join("out"),
        field_schema_version: FIELD_SCHEMA_VERSION.to_string(),
        wall_time_budget_s: None,
    };
    let artifacts = run_solve(&manifest).unwrap();
    println!("objective {:.6e}, converged {}", artifacts.objective, artifacts.converged);
    for entry in std::fs::read_dir(&artifacts.out_dir).unwrap() {
        let entry = entry.unwrap();
        println!(
            "  {} ({} bytes)",
            entry.file_name().to_string_lossy(),
            entry.metadata().unwrap().len()
        );
    }
}
