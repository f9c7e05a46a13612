//! Shared inputs for the benchmarks in `benches/`.

use isowalk::classifier::{build_family_walk, CandidateGraph, Chirality, FamilyParams};
use isowalk::classifier::CandidateOrigin;
use isowalk::point_groups::parse_group;
use isowalk::{IntVector, QuantumWalk};

pub fn weyl_walk() -> QuantumWalk {
    build_family_walk(&FamilyParams::Weyl { chirality: Chirality::Plus }).expect("weyl walk")
}

/// D₂ acting on (1,1,1): the BCC candidate, which survives the exact exclusions.
pub fn bcc_candidate() -> CandidateGraph {
    let group = parse_group("D2").expect("D2");
    CandidateGraph::new(0, group, "bench", IntVector::from_ints(&[1, 1, 1]), false, CandidateOrigin::SeedCatalog)
        .expect("candidate")
}
