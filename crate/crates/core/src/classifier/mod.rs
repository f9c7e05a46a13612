//! Candidate Cayley graphs from point-group orbits, their exclusion, and the
//! classification of the isotropic walks that survive.

pub mod exclusion;
pub mod families;
pub mod feasibility;
pub mod recognition;
pub mod report;
pub mod systems;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Serialize, Serializer};

use crate::cayley_lattice::GeneratingSet;
use crate::isotropy::SpinRep;
use crate::matrix_kernel::{IntVector, RatMatrix};
use crate::point_groups::{
    build_group_in_dim, catalog, orbit, orbit_under, representation_variants, BaseGroup, GroupName, Orbit,
    PointGroup,
};
use crate::walk_engine::QuantumWalk;
use crate::{Error, Result, RunConfig};

pub use exclusion::{exclude_by_ternary, ExclusionCertificate, ExclusionMethod, Evidence};
pub use families::{build_family_walk, Branch, Chirality, FamilyParams};
pub use feasibility::{numerical_infeasibility, Feasibility, FeasiblePoint, SearchStats};
pub use recognition::PolyhedronTag;
pub use systems::{solve_systems, SolutionFamily};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CandidateOrigin {
    /// A solution of the A4/S4 linear systems.
    LinearSystem { genuine: bool, from_iteration: bool },
    /// A fixed seed vector run through the group catalogue.
    SeedCatalog,
    /// The diagonal Klein group on the four vectors (±1, ±1, h) with an even number of minus signs
    /// among the first two.
    ResidualHeight,
}

fn group_summary<S: Serializer>(g: &PointGroup, s: S) -> std::result::Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct G<'a> {
        label: String,
        order: usize,
        generators: &'a [RatMatrix],
    }
    G {
        label: g.label(),
        order: g.order(),
        generators: &g.generators,
    }
    .serialize(s)
}

/// S₊ as a single orbit of a point group.
#[derive(Clone, Debug, Serialize)]
pub struct CandidateGraph {
    pub id: usize,
    #[serde(serialize_with = "group_summary")]
    pub group: PointGroup,
    /// Symbolic seed with its free parameters, e.g. "(α, β, α)" or "(1,1,h)".
    pub seed_family: String,
    /// The concrete seed the orbit is built from.
    pub seed: IntVector,
    pub orbit: Orbit,
    pub polyhedron_tag: PolyhedronTag,
    /// Presentation type of Z^d that S₊ gives, independent of the embedding.
    pub abstract_tag: PolyhedronTag,
    pub self_loop: bool,
    pub origin: CandidateOrigin,
}

impl CandidateGraph {
    pub fn new(
        id: usize,
        group: PointGroup,
        seed_family: impl Into<String>,
        seed: IntVector,
        self_loop: bool,
        origin: CandidateOrigin,
    ) -> Result<Self> {
        let orbit = orbit(&group, &seed)?;
        let polyhedron_tag = if group.is_orthogonal() {
            recognition::geometric_tag(&orbit.vectors)
        } else {
            PolyhedronTag::Other
        };
        let mut g = CandidateGraph {
            id,
            group,
            seed_family: seed_family.into(),
            seed,
            orbit,
            polyhedron_tag,
            abstract_tag: PolyhedronTag::Other,
            self_loop,
            origin,
        };
        g.abstract_tag = recognition::abstract_tag(&g.generating_set()?);
        Ok(g)
    }

    /// The orbit with the seed first, then in order of first visit over the group elements.
    pub fn s_plus(&self) -> Vec<IntVector> {
        let all: Vec<usize> = (0..self.group.order()).collect();
        orbit_under(&self.group, &all, &self.seed)
    }

    pub fn generating_set(&self) -> Result<GeneratingSet> {
        GeneratingSet::new(self.group.dim, self.s_plus(), self.self_loop)
    }

    pub fn dim(&self) -> usize {
        self.group.dim
    }
}

fn seed_text(v: &IntVector) -> String {
    v.to_string()
}

/// Every candidate graph examined in dimension `d`, numbered from zero.
pub fn enumerate_candidates(d: usize) -> Result<Vec<CandidateGraph>> {
    let mut raw: Vec<(PointGroup, String, IntVector, bool, CandidateOrigin)> = Vec::new();
    let ints = |v: &[i64]| IntVector::from_ints(v);
    match d {
        1 => {
            for name in catalog(1) {
                for g in representation_variants(name, 1) {
                    raw.push((g, "(1)".into(), ints(&[1]), true, CandidateOrigin::SeedCatalog));
                }
            }
        }
        2 => {
            for name in catalog(2) {
                for g in representation_variants(name, 2) {
                    for s in [[1, 0], [1, 1], [2, 1], [3, 1]] {
                        let v = ints(&s);
                        raw.push((g.clone(), seed_text(&v), v, false, CandidateOrigin::SeedCatalog));
                    }
                }
            }
        }
        3 => {
            let residual = representation_variants(GroupName::new(BaseGroup::D(2)), 3)
                .into_iter()
                .find(|g| {
                    let m = |a: [i64; 3]| RatMatrix::from_i64(&[[a[0], 0, 0], [0, a[1], 0], [0, 0, a[2]]]);
                    g.contains(&m([-1, -1, 1])) && g.contains(&m([-1, 1, 1])) && g.contains(&m([1, -1, 1]))
                })
                .expect("diagonal Klein group in the catalogue");
            for h in 1..=3 {
                raw.push((residual.clone(), "(1,1,h)".into(), ints(&[1, 1, h]), false, CandidateOrigin::ResidualHeight));
            }
            for name in [GroupName::new(BaseGroup::A4), GroupName::new(BaseGroup::S4)] {
                let g = build_group_in_dim(name, 3)?;
                for fam in solve_systems(&g) {
                    let origin = CandidateOrigin::LinearSystem {
                        genuine: fam.genuine,
                        from_iteration: fam.from_iteration,
                    };
                    raw.push((g.clone(), fam.pattern.clone(), fam.representative.clone(), false, origin));
                }
                let v = ints(&[1, 2, 4]);
                raw.push((g, seed_text(&v), v, false, CandidateOrigin::SeedCatalog));
            }
            for name in catalog(3) {
                let axial = match name.base {
                    BaseGroup::Z(n) | BaseGroup::D(n) => n >= 3,
                    _ => false,
                };
                let small = matches!(name.base, BaseGroup::Trivial | BaseGroup::Z(2) | BaseGroup::D(2));
                if !(axial || small) {
                    continue;
                }
                for g in representation_variants(name, 3) {
                    let seeds: Vec<(String, IntVector)> = if axial {
                        let hex = !g.metric.is_identity();
                        let second = if hex { [3, 1] } else { [2, 1] };
                        [1, 2]
                            .iter()
                            .flat_map(|&h| {
                                [
                                    ("(1,0,h)".to_string(), ints(&[1, 0, h])),
                                    (format!("({},{},h)", second[0], second[1]), ints(&[second[0], second[1], h])),
                                ]
                            })
                            .collect()
                    } else {
                        [[1, 0, 0], [1, 1, 0], [1, 1, 1], [1, 1, 2], [1, 2, 3]]
                            .iter()
                            .map(|s| (seed_text(&ints(s)), ints(s)))
                            .collect()
                    };
                    for (text, v) in seeds {
                        raw.push((g.clone(), text, v, false, CandidateOrigin::SeedCatalog));
                    }
                }
            }
        }
        _ => return Err(Error::Invalid(format!("dimension {d} not in 1..=3"))),
    }
    let mut seen: BTreeSet<(Vec<RatMatrix>, Vec<IntVector>, bool)> = BTreeSet::new();
    let mut out = Vec::new();
    for (g, text, seed, self_loop, origin) in raw {
        let o = orbit(&g, &seed)?;
        let mut key = g.matrices();
        key.sort();
        if !seen.insert((key, o.vectors, self_loop)) {
            continue;
        }
        out.push(CandidateGraph::new(out.len(), g, text, seed, self_loop, origin)?);
    }
    Ok(out)
}

/// Groups whose candidates are represented by a reduction rather than enumerated.
pub fn covered_by_reduction(d: usize) -> Vec<String> {
    if d == 3 {
        vec!["A4xZ2".into(), "S4xZ2".into()]
    } else {
        vec![]
    }
}

/// Candidate surviving the exact exclusions, with the outcome of its search.
#[derive(Clone, Debug, Serialize)]
pub struct SearchedCandidate {
    pub graph: CandidateGraph,
    pub outcome: Feasibility,
    /// Family of each homogeneous feasible point, in point order; `None` if unmatched.
    pub matches: Vec<Option<String>>,
}

/// A closed-form isotropic walk family found on at least one candidate.
#[derive(Clone, Debug, Serialize)]
pub struct ClassifiedWalk {
    pub dimension: usize,
    pub graph: PolyhedronTag,
    /// The family with representative parameters.
    pub family: FamilyParams,
    pub isotropy: String,
    /// Candidates on which a matching feasible point was found.
    pub witnesses: Vec<usize>,
    pub matched_points: usize,
}

impl ClassifiedWalk {
    /// The walk for any admissible parameter values of the same family and presentation.
    pub fn walk(&self, params: &FamilyParams) -> Result<QuantumWalk> {
        if params.family_label() != self.family.family_label() {
            return Err(Error::InvalidFamilyParams(format!(
                "{} is not of family {}",
                params.family_label(),
                self.family.family_label()
            )));
        }
        build_family_walk(params)
    }

    pub fn representative(&self) -> Result<QuantumWalk> {
        build_family_walk(&self.family)
    }
}

fn isotropy_label(f: &FamilyParams) -> String {
    match f {
        FamilyParams::Line { inverses: false, .. } => "{I}".into(),
        FamilyParams::Line { inverses: true, .. } => "{I, iσX}".into(),
        FamilyParams::Square { inverses: true, .. } => "{I, iσX, iσY, iσZ}".into(),
        FamilyParams::Square { branch: Branch::SigmaX, .. } => "{I, iσX}".into(),
        FamilyParams::Square { branch: Branch::SigmaZ, .. } => "{I, iσZ}".into(),
        FamilyParams::Weyl { .. } => "{I, iσX, iσY, iσZ}".into(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Classification {
    pub dimension: usize,
    pub config: RunConfig,
    pub candidates: usize,
    pub certificates: Vec<ExclusionCertificate>,
    pub searched: Vec<SearchedCandidate>,
    /// Ids of candidates whose search ended between the thresholds.
    pub inconclusive: Vec<usize>,
    /// Presentation types of the graphs carrying an isotropic walk.
    pub admitted_graphs: Vec<PolyhedronTag>,
    pub walks: Vec<ClassifiedWalk>,
    /// Homogeneous feasible points not matching any closed-form family.
    pub unmatched_points: usize,
    pub covered_by_reduction: Vec<String>,
    pub derived: BTreeMap<String, f64>,
}

impl Classification {
    pub fn certificates_by(&self, method: ExclusionMethod) -> impl Iterator<Item = &ExclusionCertificate> {
        self.certificates.iter().filter(move |c| c.method == method)
    }
}

fn bcc_labelings(s_plus: &[IntVector]) -> Vec<Vec<IntVector>> {
    let mut out = Vec::new();
    let n = s_plus.len();
    if n != 4 {
        return out;
    }
    let mut idx: Vec<usize> = (0..n).collect();
    permute(&mut idx, 0, &mut |p| out.push(p.iter().map(|&i| s_plus[i].clone()).collect()));
    out
}

fn permute(v: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, f);
        v.swap(k, i);
    }
}

fn match_point(graph: &CandidateGraph, walk: &QuantumWalk, closure: &[(Chirality, [crate::Complex2Matrix; 8])]) -> Option<FamilyParams> {
    match graph.dim() {
        1 | 2 => families::match_low_dim(walk),
        _ => {
            if graph.abstract_tag != PolyhedronTag::BCC || walk.gs.include_inverses {
                return None;
            }
            bcc_labelings(&walk.gs.s_plus)
                .iter()
                .find_map(|lab| families::match_weyl(walk, lab, closure))
                .map(|chirality| FamilyParams::Weyl { chirality })
        }
    }
}

/// The full pipeline; inconclusive searches are reported, not raised.
pub fn run_pipeline(d: usize, cfg: &RunConfig) -> Result<Classification> {
    run_pipeline_on(d, enumerate_candidates(d)?, cfg)
}

pub fn run_pipeline_on(d: usize, candidates: Vec<CandidateGraph>, cfg: &RunConfig) -> Result<Classification> {
    cfg.validate()?;
    let closure = families::weyl_closure();
    let mut certificates = Vec::new();
    let mut searched = Vec::new();
    let mut inconclusive = Vec::new();
    let mut walks: BTreeMap<String, ClassifiedWalk> = BTreeMap::new();
    let mut admitted: BTreeSet<PolyhedronTag> = BTreeSet::new();
    let mut unmatched = 0;
    let n = candidates.len();
    for graph in candidates {
        let rep: SpinRep = match exclusion::exact_exclusions(&graph) {
            Ok(rep) => rep,
            Err(cert) => {
                certificates.push(cert);
                continue;
            }
        };
        let outcome = numerical_infeasibility(&graph, rep, cfg)?;
        let mut matches = Vec::new();
        match &outcome {
            Feasibility::Infeasible(stats) => certificates.push(ExclusionCertificate {
                graph: graph.clone(),
                method: ExclusionMethod::NumericalInfeasibility,
                evidence: Evidence::Search(stats.clone()),
            }),
            Feasibility::Inconclusive(_) => inconclusive.push(graph.id),
            Feasibility::Feasible { points, .. } => {
                for p in points.iter().filter(|p| p.homogeneous) {
                    admitted.insert(graph.abstract_tag);
                    let w = p.walk.to_walk()?;
                    match match_point(&graph, &w, &closure) {
                        Some(fam) => {
                            let label = fam.family_label();
                            let e = walks.entry(label.clone()).or_insert_with(|| ClassifiedWalk {
                                dimension: d,
                                graph: graph.abstract_tag,
                                isotropy: isotropy_label(&fam),
                                family: fam.clone(),
                                witnesses: vec![],
                                matched_points: 0,
                            });
                            if !e.witnesses.contains(&graph.id) {
                                e.witnesses.push(graph.id);
                            }
                            e.matched_points += 1;
                            matches.push(Some(label));
                        }
                        None => {
                            unmatched += 1;
                            matches.push(None);
                        }
                    }
                }
            }
        }
        searched.push(SearchedCandidate { graph, outcome, matches });
    }
    let mut derived = BTreeMap::new();
    if d == 3 {
        for ch in [Chirality::Plus, Chirality::Minus] {
            let fit = report::weyl_slope(ch, 24, cfg.rng_seed)?;
            derived.insert(format!("weyl_{:?}_slope", ch).to_lowercase(), fit.mean);
            derived.insert(format!("weyl_{:?}_slope_spread", ch).to_lowercase(), fit.relative_spread);
            derived.insert(format!("weyl_{:?}_straight_line_spread", ch).to_lowercase(), fit.straight_line_spread);
        }
    }
    Ok(Classification {
        dimension: d,
        config: cfg.clone(),
        candidates: n,
        certificates,
        searched,
        inconclusive,
        admitted_graphs: admitted.into_iter().collect(),
        walks: walks.into_values().collect(),
        unmatched_points: unmatched,
        covered_by_reduction: covered_by_reduction(d),
        derived,
    })
}

/// The pipeline, failing when any search is inconclusive.
pub fn classify(d: usize, cfg: &RunConfig) -> Result<Classification> {
    let c = run_pipeline(d, cfg)?;
    if !c.inconclusive.is_empty() {
        return Err(Error::PipelineInconclusive(c.inconclusive.len()));
    }
    Ok(c)
}
