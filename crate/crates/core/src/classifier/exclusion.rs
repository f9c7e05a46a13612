//! Exact exclusions of candidate graphs and their replayable certificates.

use serde::{Serialize, Deserialize};

use super::feasibility::{numerical_infeasibility_with, Feasibility, SearchStats};
use super::CandidateGraph;
use crate::cayley_lattice::full_rank;
use crate::isotropy::{DifferenceTable, SpinRep};
use crate::matrix_kernel::{IntVector, RatMatrix};
use crate::point_groups::{orbit, ternary_subgroups, AbstractType, PointGroup};
use crate::Result;

/// Tolerance for the SU(2) lift of a point group.
pub const LIFT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ExclusionMethod {
    /// S₊ does not generate a rank-d subgroup.
    NonSpanning,
    /// A subgroup of order three acts freely on an orbit satisfying the difference condition.
    TernarySubgroup,
    /// A subgroup of order above four, or a cyclic one of order four, acts freely on an orbit
    /// satisfying the difference condition.
    UniqueDifference,
    /// The group has no projectively faithful image in SU(2).
    NoFaithfulSpinRep,
    NumericalInfeasibility,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Evidence {
    Rank {
        rank: usize,
        dim: usize,
    },
    Subgroup {
        generators: Vec<RatMatrix>,
        order: usize,
        abstract_type: AbstractType,
        h1: IntVector,
        subgroup_orbit: Vec<IntVector>,
    },
    NoLift {
        reason: String,
    },
    Search(SearchStats),
}

#[derive(Clone, Debug, Serialize)]
pub struct ExclusionCertificate {
    pub graph: CandidateGraph,
    pub method: ExclusionMethod,
    pub evidence: Evidence,
}

/// A freely acting subgroup whose orbit through some h₁ ∈ S₊ satisfies the difference condition.
fn free_subgroup_witness(graph: &CandidateGraph, table: &DifferenceTable, k: &PointGroup) -> Option<Evidence> {
    for h1 in &graph.orbit.vectors {
        let ko = orbit(k, h1).expect("orbit vectors are nonzero");
        if ko.len() != k.order() {
            continue;
        }
        if table.witness(&ko.vectors).is_none() {
            return Some(Evidence::Subgroup {
                generators: k.generators.clone(),
                order: k.order(),
                abstract_type: k.abstract_type(),
                h1: h1.clone(),
                subgroup_orbit: ko.vectors,
            });
        }
    }
    None
}

pub fn exclude_nonspanning(graph: &CandidateGraph) -> Option<ExclusionCertificate> {
    let gs = graph.generating_set().ok()?;
    (!full_rank(&gs)).then(|| ExclusionCertificate {
        graph: graph.clone(),
        method: ExclusionMethod::NonSpanning,
        evidence: Evidence::Rank {
            rank: gs.rank(),
            dim: gs.dim,
        },
    })
}

pub fn exclude_by_ternary(graph: &CandidateGraph) -> Option<ExclusionCertificate> {
    let table = DifferenceTable::new(&graph.orbit.vectors);
    ternary_subgroups(&graph.group).iter().find_map(|k| {
        free_subgroup_witness(graph, &table, k).map(|evidence| ExclusionCertificate {
            graph: graph.clone(),
            method: ExclusionMethod::TernarySubgroup,
            evidence,
        })
    })
}

fn forbidden(k: &PointGroup) -> bool {
    k.order() > 4 || k.abstract_type() == AbstractType::Z4
}

pub fn exclude_by_difference(graph: &CandidateGraph) -> Option<ExclusionCertificate> {
    let table = DifferenceTable::new(&graph.orbit.vectors);
    graph
        .group
        .subgroups()
        .iter()
        .filter(|k| forbidden(k))
        .find_map(|k| {
            free_subgroup_witness(graph, &table, k).map(|evidence| ExclusionCertificate {
                graph: graph.clone(),
                method: ExclusionMethod::UniqueDifference,
                evidence,
            })
        })
}

pub fn exclude_no_lift(graph: &CandidateGraph) -> std::result::Result<SpinRep, ExclusionCertificate> {
    SpinRep::faithful_lift(&graph.group, LIFT_TOL).map_err(|e| ExclusionCertificate {
        graph: graph.clone(),
        method: ExclusionMethod::NoFaithfulSpinRep,
        evidence: Evidence::NoLift { reason: e.to_string() },
    })
}

/// First exact exclusion that applies, in pipeline order, or the coin representation to search with.
pub fn exact_exclusions(graph: &CandidateGraph) -> std::result::Result<SpinRep, ExclusionCertificate> {
    if let Some(c) = exclude_nonspanning(graph) {
        return Err(c);
    }
    if let Some(c) = exclude_by_ternary(graph) {
        return Err(c);
    }
    if let Some(c) = exclude_by_difference(graph) {
        return Err(c);
    }
    exclude_no_lift(graph)
}

impl ExclusionCertificate {
    /// Re-derives the verdict from the payload alone.
    pub fn replay(&self, threads: usize) -> Result<bool> {
        let g = &self.graph;
        Ok(match (&self.method, &self.evidence) {
            (ExclusionMethod::NonSpanning, Evidence::Rank { rank, dim }) => {
                let gs = g.generating_set()?;
                !full_rank(&gs) && gs.rank() == *rank && gs.dim == *dim
            }
            (ExclusionMethod::TernarySubgroup | ExclusionMethod::UniqueDifference, Evidence::Subgroup { generators, order, h1, subgroup_orbit, .. }) => {
                let k = PointGroup::from_generators(g.group.name, "", g.group.dim, generators.clone(), g.group.metric.clone())?;
                let ko = orbit(&k, h1)?;
                let kind_ok = match self.method {
                    ExclusionMethod::TernarySubgroup => k.order() == 3,
                    _ => forbidden(&k),
                };
                let in_group = generators.iter().all(|m| g.group.contains(m));
                kind_ok
                    && in_group
                    && k.order() == *order
                    && ko.len() == k.order()
                    && ko.vectors == *subgroup_orbit
                    && g.orbit.contains(h1)
                    && DifferenceTable::new(&g.orbit.vectors).witness(&ko.vectors).is_none()
            }
            (ExclusionMethod::NoFaithfulSpinRep, Evidence::NoLift { .. }) => SpinRep::faithful_lift(&g.group, LIFT_TOL).is_err(),
            (ExclusionMethod::NumericalInfeasibility, Evidence::Search(stats)) => {
                let rep = SpinRep::faithful_lift(&g.group, LIFT_TOL)?;
                match numerical_infeasibility_with(g, rep, stats.starts, stats.replay_seed, threads)? {
                    Feasibility::Infeasible(s) => s.best_residual.to_bits() == stats.best_residual.to_bits(),
                    _ => false,
                }
            }
            _ => false,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::CandidateOrigin;
    use crate::point_groups::parse_group;

    fn graph(group: &str, seed: &[i64]) -> CandidateGraph {
        CandidateGraph::new(0, parse_group(group).unwrap(), "test", IntVector::from_ints(seed), false, CandidateOrigin::SeedCatalog).unwrap()
    }

    #[test]
    fn ternary_examples() {
        let sc = exclude_by_ternary(&graph("A4", &[1, 0, 0])).expect("simple cubic excluded");
        assert!(sc.replay(1).unwrap());
        if let Evidence::Subgroup { order, subgroup_orbit, .. } = &sc.evidence {
            assert_eq!(*order, 3);
            assert_eq!(subgroup_orbit.len(), 3);
        } else {
            panic!("wrong evidence");
        }
        assert!(exclude_by_ternary(&graph("A4", &[1, 1, 0])).is_some());
        assert!(exclude_by_ternary(&graph("S4", &[1, 1, 0])).is_some());
        assert!(exclude_by_ternary(&graph("D2", &[1, 1, 1])).is_none());
    }

    #[test]
    fn pipeline_order_and_replay() {
        let flat = graph("Z2", &[1, 0, 0]);
        let c = exact_exclusions(&flat).unwrap_err();
        assert_eq!(c.method, ExclusionMethod::NonSpanning);
        assert!(c.replay(1).unwrap());
        let bcc = graph("D2", &[1, 1, 1]);
        assert!(exact_exclusions(&bcc).is_ok());
        let z2cubed = graph("D2xZ2", &[1, 2, 3]);
        let c = exact_exclusions(&z2cubed).unwrap_err();
        assert_eq!(c.method, ExclusionMethod::NoFaithfulSpinRep);
        assert!(c.replay(1).unwrap());
    }

    #[test]
    fn tampered_certificates_fail_replay() {
        let mut c = exclude_by_ternary(&graph("A4", &[1, 0, 0])).unwrap();
        if let Evidence::Subgroup { subgroup_orbit, .. } = &mut c.evidence {
            subgroup_orbit.pop();
        }
        assert!(!c.replay(1).unwrap());
        let mut c = exclude_nonspanning(&graph("Z2", &[1, 0, 0])).unwrap();
        c.evidence = Evidence::Rank { rank: 2, dim: 3 };
        assert!(!c.replay(1).unwrap());
    }
}
