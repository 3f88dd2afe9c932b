//! Feature-aligned cross fields on triangle meshes.
//!
//! Crosses are encoded per face as octahedral frames in the band-4 real
//! spherical-harmonic basis (9 coefficients). Smoothness is measured by a
//! weighted `p`-norm of per-edge frame differences, and normal alignment is
//! imposed either exactly (a linear constraint) or softly (a per-face
//! second-order cone of radius `epsilon`). The resulting convex problem is
//! solved by a direct KKT factorization for `p = 2, epsilon = 0` and by an
//! operator-splitting method otherwise. Creases of the surface need no
//! explicit detection: the energy itself favors frames aligned to them.
//!
//! Entry points:
//! - [`sh`]: frame algebra (rotations, twists, alignment operators, lobes)
//! - [`variety`]: projection onto the octahedral variety and cross extraction
//! - [`mesh`]: OBJ ingestion, canonical test meshes, dual-edge weights
//! - [`energy`]: discrete problem assembly and energy evaluation
//! - [`solver`]: direct and conic solves, degeneracy re-solve loop
//! - [`analysis`]: singularities, crease-alignment metrics, exports
//! - [`cli`]: manifest-driven pipeline used by the `octafield` binary

pub mod analysis;
pub mod cli;
pub mod energy;
pub mod identities;
pub mod mesh;
pub mod oracle;
pub mod sh;
pub mod solver;
pub mod variety;

pub use energy::{assemble, evaluate_energy, PNorm, Problem};
pub use mesh::{make_canonical_mesh, CanonicalMesh, SurfaceMesh};
pub use sh::{canonical_frame, exp_rotation, twist_z, ShFrame};
pub use solver::{solve, solve_with_degeneracy_loop, DegeneracyOutcome, SolveConfig, SolveReport};
pub use variety::{degeneracy_distance, extract_cross, project_to_variety, ExtractedCross};
