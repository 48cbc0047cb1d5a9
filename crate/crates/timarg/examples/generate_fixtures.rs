//! Regenerate the embedded fixture files from scratch.
//!
//! Recomputes every vertex library (exact projection of the level-2 strip,
//! symmetry-class labels, generating patterns) and the two projected
//! polytopes, then rewrites `fixtures/`.  Run with `--release`; the
//! three-outcome case solves a few thousand exact linear programs.

use std::fs;
use std::path::Path;

use timarg::exactsets::{generate_library, LibraryCase};
use timarg::hierarchy::DEFAULT_BUDGET;
use timarg::polytope::project_lti_seeded;

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    for case in [LibraryCase::D2Nn, LibraryCase::D2Nnn, LibraryCase::D3Nn] {
        let start = std::time::Instant::now();
        let lib = generate_library(case, 0, DEFAULT_BUDGET).expect("library generation");
        let classes = lib.class_labels.len();
        let path = dir.join(format!("library_{}.json", case.name()));
        fs::write(&path, lib.to_json()).expect("write library fixture");
        println!(
            "{}: {} vertices in {} classes ({:.1?}) -> {}",
            case.name(),
            lib.vertices.len(),
            classes,
            start.elapsed(),
            path.display()
        );
    }
    for case in [LibraryCase::D2Nnn, LibraryCase::D3Nn] {
        let start = std::time::Instant::now();
        let projection = project_lti_seeded(case.d(), (2, 2), &case.targets(), 0, DEFAULT_BUDGET)
            .expect("projection");
        let path = dir.join(format!("projection_{}.json", case.name()));
        fs::write(&path, projection.polytope.to_json()).expect("write projection fixture");
        let facets = projection
            .polytope
            .h_rep
            .as_ref()
            .map_or(0, |h| h.len());
        println!(
            "projection {}: {} vertices, {} linear conditions ({:.1?}) -> {}",
            case.name(),
            projection.polytope.v_rep.as_ref().map_or(0, |v| v.len()),
            facets,
            start.elapsed(),
            path.display()
        );
    }
}
