//! Multistart least-squares search for covariant unitary walks on a candidate graph.
//!
//! Coins are rank one, A_{±h₁} = α± V|η±⟩⟨η±| with ⟨η₊|η₋⟩ = 0, and the remaining
//! coins are fixed by covariance, A_{l·h} = U_l A_h U_l†. The residual collects the
//! normalization, the unitarity conditions for one difference in each orbit of the group,
//! and covariance under the generators.

use levenberg_marquardt::{LeastSquaresProblem, LevenbergMarquardt};
use nalgebra::{storage::Owned, DMatrix, DVector, Dyn, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::CandidateGraph;
use crate::cayley_lattice::GeneratingSet;
use crate::isotropy::{check_homogeneity, induced_permutation, PermutationAction, SpinRep};
use crate::matrix_kernel::{c, c2, identity2, su2_from_quaternion, zero2, Complex2Matrix, IntVector};
use crate::walk_engine::{QuantumWalk, WalkFile};
use crate::{Error, Result, RunConfig};

/// Best residual at or above this certifies infeasibility.
pub const INFEASIBLE_FLOOR: f64 = 1e-6;
/// Best residual at or below this is a feasible point.
pub const FEASIBLE_CEILING: f64 = 1e-10;
/// Smallest angle kept between α₊ and α₋ (and of the overall scale with a self-loop).
pub const MIN_SPLIT: f64 = 0.05;
const JACOBIAN_STEP: f64 = 1e-7;
const HOMOGENEITY_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Base {
    Plus,
    Minus,
    Loop,
}

/// Parameterized coins of one candidate with a fixed coin representation.
pub struct CoinModel {
    pub gs: GeneratingSet,
    /// S with e last when present; coins are returned in this order.
    pub s: Vec<IntVector>,
    pub rep: SpinRep,
    pub act: PermutationAction,
    transport: Vec<(usize, Base)>,
    /// Pairs (i, j) with s_i − s_j = k, for one representative k of each ±G-orbit of nonzero differences.
    pairs: Vec<Vec<(usize, usize)>>,
    /// √(number of differences in the class of each representative).
    weights: Vec<f64>,
    /// Generator element indices and, per generator, the image index of each s_i.
    covariance: Vec<(usize, Vec<usize>)>,
}

fn leading_positive(v: &IntVector) -> bool {
    v.coords()
        .iter()
        .find(|x| !num_traits::Zero::is_zero(*x))
        .is_some_and(num_traits::Signed::is_positive)
}

impl CoinModel {
    pub fn new(graph: &CandidateGraph, rep: SpinRep) -> Result<Self> {
        let gs = graph.generating_set()?;
        let act = induced_permutation(&graph.group, &gs)?;
        let s = gs.full();
        let h1 = graph.seed.clone();
        let group = &graph.group;
        let mut transport = Vec::with_capacity(s.len());
        for h in &s {
            if h.is_zero() {
                transport.push((0, Base::Loop));
                continue;
            }
            let found = (0..group.order()).find_map(|l| {
                let img = group.matrix(l).mul_vec(&h1);
                if img == *h {
                    Some((l, Base::Plus))
                } else if !gs.include_inverses && img == -h {
                    Some((l, Base::Minus))
                } else {
                    None
                }
            });
            transport.push(found.ok_or_else(|| Error::NotAnAction(format!("{h} is not in the orbit of {h1}")))?);
        }
        let mut keys: std::collections::BTreeMap<IntVector, Vec<(usize, usize)>> = Default::default();
        for (i, a) in s.iter().enumerate() {
            for (j, b) in s.iter().enumerate() {
                let k = a - b;
                if leading_positive(&k) {
                    keys.entry(k).or_default().push((i, j));
                }
            }
        }
        // one difference per orbit of ±G; covariance carries the sum to the rest of the orbit
        let mut classes: std::collections::BTreeMap<IntVector, usize> = Default::default();
        for k in keys.keys() {
            let rep = (0..group.order())
                .flat_map(|l| {
                    let v = group.matrix(l).mul_vec(k);
                    [-&v, v]
                })
                .filter(leading_positive)
                .min()
                .expect("orbit is nonempty");
            *classes.entry(rep).or_default() += 1;
        }
        let (pairs, weights) = classes
            .into_iter()
            .map(|(rep, count)| (keys.remove(&rep).expect("representative is a difference"), (count as f64).sqrt()))
            .unzip();
        let mut covariance = Vec::new();
        for g in &group.generators {
            let l = group.index_of(g).expect("generator is an element");
            let image: Vec<usize> = s
                .iter()
                .map(|h| {
                    let img = g.mul_vec(h);
                    s.iter().position(|x| *x == img).expect("action on S")
                })
                .collect();
            covariance.push((l, image));
        }
        Ok(CoinModel {
            gs,
            s,
            rep,
            act,
            transport,
            pairs,
            weights,
            covariance,
        })
    }

    pub fn n_params(&self) -> usize {
        let mut n = 8;
        if !self.gs.include_inverses {
            n += 1;
        }
        if self.gs.self_loop {
            n += 9;
        }
        n
    }

    /// Total weight Σ α_h² of the hopping coins when they carry all of the normalization.
    fn full_weight(&self) -> f64 {
        2.0 / self.gs.s_plus.len() as f64
    }

    pub fn coins(&self, p: &[f64]) -> Vec<Complex2Matrix> {
        let eta = Vector2::new(c(p[0], p[1]), c(p[2], p[3]));
        let eta = eta / c(eta.norm().max(1e-300), 0.0);
        let perp = Vector2::new(-eta[1].conj(), eta[0].conj());
        let v = su2_from_quaternion([p[4], p[5], p[6], p[7]]);
        let mut k = 8;
        let (mut a_plus, mut a_minus);
        if self.gs.include_inverses {
            a_plus = self.full_weight().sqrt();
            a_minus = 0.0;
        } else {
            let t = p[k];
            k += 1;
            let theta = MIN_SPLIT + (std::f64::consts::FRAC_PI_2 - 2.0 * MIN_SPLIT) * t.sin().powi(2);
            let radius = self.full_weight().sqrt();
            a_plus = radius * theta.cos();
            a_minus = radius * theta.sin();
        }
        let mut a_loop = zero2();
        if self.gs.self_loop {
            a_loop = c2(c(p[k], p[k + 1]), c(p[k + 2], p[k + 3]), c(p[k + 4], p[k + 5]), c(p[k + 6], p[k + 7]));
            let u = p[k + 8];
            let scale = MIN_SPLIT + (1.0 - MIN_SPLIT) * u.sin().powi(2);
            a_plus *= scale;
            a_minus *= scale;
        }
        let base_plus = v * (eta * eta.adjoint()) * c(a_plus, 0.0);
        let base_minus = v * (perp * perp.adjoint()) * c(a_minus, 0.0);
        self.transport
            .iter()
            .map(|&(l, b)| {
                let u = self.rep.image(l);
                match b {
                    Base::Plus => u * base_plus * u.adjoint(),
                    Base::Minus => u * base_minus * u.adjoint(),
                    Base::Loop => a_loop,
                }
            })
            .collect()
    }

    fn push(out: &mut Vec<f64>, m: &Complex2Matrix) {
        for z in m.iter() {
            out.push(z.re);
            out.push(z.im);
        }
    }

    pub fn residuals(&self, p: &[f64]) -> Vec<f64> {
        let a = self.coins(p);
        let mut out = Vec::with_capacity(16 * (self.pairs.len() + 1) + 8 * self.s.len() * self.covariance.len());
        let mut left = -identity2();
        let mut right = -identity2();
        for m in &a {
            left += m * m.adjoint();
            right += m.adjoint() * m;
        }
        Self::push(&mut out, &left);
        Self::push(&mut out, &right);
        for (pairs, &w) in self.pairs.iter().zip(&self.weights) {
            let mut x = zero2();
            let mut y = zero2();
            for &(i, j) in pairs {
                x += a[i] * a[j].adjoint();
                y += a[j].adjoint() * a[i];
            }
            Self::push(&mut out, &(x * c(w, 0.0)));
            Self::push(&mut out, &(y * c(w, 0.0)));
        }
        for (l, image) in &self.covariance {
            let u = self.rep.image(*l);
            for (i, &j) in image.iter().enumerate() {
                Self::push(&mut out, &(u * a[i] * u.adjoint() - a[j]));
            }
        }
        out
    }

    pub fn objective(&self, p: &[f64]) -> f64 {
        self.residuals(p).iter().map(|x| x * x).sum()
    }

    pub fn walk(&self, p: &[f64]) -> Result<QuantumWalk> {
        QuantumWalk::new(self.gs.clone(), self.s.iter().cloned().zip(self.coins(p)).collect())
    }

    pub fn random_start<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut p: Vec<f64> = (0..8).map(|_| rng.sample(rand_distr::StandardNormal)).collect();
        if !self.gs.include_inverses {
            p.push(rng.random_range(0.0..std::f64::consts::PI));
        }
        if self.gs.self_loop {
            p.extend((0..8).map(|_| 0.5 * rng.sample::<f64, _>(rand_distr::StandardNormal)));
            p.push(rng.random_range(0.0..std::f64::consts::PI));
        }
        p
    }
}

struct Problem<'a> {
    model: &'a CoinModel,
    p: DVector<f64>,
}

impl LeastSquaresProblem<f64, Dyn, Dyn> for Problem<'_> {
    type ResidualStorage = Owned<f64, Dyn>;
    type JacobianStorage = Owned<f64, Dyn, Dyn>;
    type ParameterStorage = Owned<f64, Dyn>;

    fn set_params(&mut self, x: &DVector<f64>) {
        self.p.copy_from(x);
    }

    fn params(&self) -> DVector<f64> {
        self.p.clone()
    }

    fn residuals(&self) -> Option<DVector<f64>> {
        let r = self.model.residuals(self.p.as_slice());
        r.iter().all(|x| x.is_finite()).then(|| DVector::from_vec(r))
    }

    fn jacobian(&self) -> Option<DMatrix<f64>> {
        let n = self.p.len();
        let mut x = self.p.as_slice().to_vec();
        let r0 = self.model.residuals(&x);
        let mut jac = DMatrix::zeros(r0.len(), n);
        for j in 0..n {
            let x0 = x[j];
            x[j] = x0 + JACOBIAN_STEP;
            let rp = self.model.residuals(&x);
            x[j] = x0;
            for (i, (a, b)) in rp.iter().zip(&r0).enumerate() {
                jac[(i, j)] = (a - b) / JACOBIAN_STEP;
            }
        }
        jac.iter().all(|x| x.is_finite()).then_some(jac)
    }
}

fn refine(model: &CoinModel, start: Vec<f64>, polish: bool) -> (Vec<f64>, f64, usize) {
    let lm = if polish {
        LevenbergMarquardt::new().with_ftol(1e-30).with_xtol(1e-30).with_gtol(0.0).with_patience(400)
    } else {
        LevenbergMarquardt::new().with_ftol(1e-10).with_xtol(1e-10).with_gtol(1e-10).with_patience(50)
    };
    let problem = Problem {
        model,
        p: DVector::from_vec(start),
    };
    let (problem, report) = lm.minimize(problem);
    let p = problem.p.as_slice().to_vec();
    let f = model.objective(&p);
    (p, if f.is_finite() { f } else { f64::INFINITY }, report.number_of_evaluations)
}

/// Outcome of one start.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StartResult {
    pub start: usize,
    pub residual: f64,
    pub evaluations: usize,
    pub params: Vec<f64>,
}

/// Seed of start `i` for a search with base seed `seed`.
pub fn start_seed(seed: u64, i: usize) -> u64 {
    let mut z = seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Base seed of the search on one candidate.
pub fn candidate_seed(rng_seed: u64, candidate_id: usize) -> u64 {
    start_seed(rng_seed.wrapping_add(0xA076_1D64_78BD_642F), candidate_id)
}

fn run_start(model: &CoinModel, seed: u64, i: usize) -> StartResult {
    let mut rng = ChaCha8Rng::seed_from_u64(start_seed(seed, i));
    let p0 = model.random_start(&mut rng);
    let (mut p, mut f, mut evals) = refine(model, p0, false);
    if f <= 1e-8 {
        let (p2, f2, e2) = refine(model, p.clone(), true);
        evals += e2;
        if f2 <= f {
            p = p2;
            f = f2;
        }
    }
    StartResult {
        start: i,
        residual: f,
        evaluations: evals,
        params: p,
    }
}

/// All starts, in start order, optionally spread over threads.
pub fn multistart(model: &CoinModel, starts: usize, seed: u64, threads: usize) -> Vec<StartResult> {
    let threads = threads.clamp(1, starts.max(1));
    if threads == 1 {
        return (0..starts).map(|i| run_start(model, seed, i)).collect();
    }
    let mut out: Vec<StartResult> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..threads)
            .map(|t| scope.spawn(move || (t..starts).step_by(threads).map(|i| run_start(model, seed, i)).collect::<Vec<_>>()))
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("search thread")).collect()
    });
    out.sort_by_key(|r| r.start);
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchStats {
    pub starts: usize,
    /// Seed from which every start is derived; replaying with it reproduces the search.
    pub replay_seed: u64,
    pub best_residual: f64,
    pub median_residual: f64,
    pub feasible_starts: usize,
    pub evaluations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeasiblePoint {
    pub start: usize,
    pub residual: f64,
    pub homogeneous: bool,
    pub walk: WalkFile,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Feasibility {
    Infeasible(SearchStats),
    Feasible { stats: SearchStats, points: Vec<FeasiblePoint> },
    Inconclusive(SearchStats),
}

impl Feasibility {
    pub fn stats(&self) -> &SearchStats {
        match self {
            Feasibility::Infeasible(s) | Feasibility::Inconclusive(s) => s,
            Feasibility::Feasible { stats, .. } => stats,
        }
    }
}

pub fn default_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get()).min(16)
}

/// Verdict from a finished search.
pub fn assess(model: &CoinModel, results: &[StartResult], replay_seed: u64) -> Result<Feasibility> {
    let mut res: Vec<f64> = results.iter().map(|r| r.residual).collect();
    res.sort_by(|a, b| a.total_cmp(b));
    let stats = SearchStats {
        starts: results.len(),
        replay_seed,
        best_residual: res.first().copied().unwrap_or(f64::INFINITY),
        median_residual: res.get(res.len() / 2).copied().unwrap_or(f64::INFINITY),
        feasible_starts: res.iter().filter(|&&x| x <= FEASIBLE_CEILING).count(),
        evaluations: results.iter().map(|r| r.evaluations).sum(),
    };
    if stats.best_residual >= INFEASIBLE_FLOOR {
        return Ok(Feasibility::Infeasible(stats));
    }
    if stats.best_residual > FEASIBLE_CEILING {
        return Ok(Feasibility::Inconclusive(stats));
    }
    let mut points = Vec::new();
    for r in results.iter().filter(|r| r.residual <= FEASIBLE_CEILING) {
        let walk = model.walk(&r.params)?;
        let homogeneous = check_homogeneity(&walk, &model.rep, &model.act, HOMOGENEITY_TOL);
        points.push(FeasiblePoint {
            start: r.start,
            residual: r.residual,
            homogeneous,
            walk: walk.to_file(),
        });
    }
    Ok(Feasibility::Feasible { stats, points })
}

/// Multistart search on `graph` with its faithful coin representation.
pub fn numerical_infeasibility(graph: &CandidateGraph, rep: SpinRep, cfg: &RunConfig) -> Result<Feasibility> {
    numerical_infeasibility_with(graph, rep, cfg.multistarts, candidate_seed(cfg.rng_seed, graph.id), default_threads())
}

pub fn numerical_infeasibility_with(
    graph: &CandidateGraph,
    rep: SpinRep,
    starts: usize,
    replay_seed: u64,
    threads: usize,
) -> Result<Feasibility> {
    let model = CoinModel::new(graph, rep)?;
    let results = multistart(&model, starts, replay_seed, threads);
    assess(&model, &results, replay_seed)
}
