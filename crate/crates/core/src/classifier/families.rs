//! Closed-form isotropic walks for d = 1, 2, 3, their isotropy representations, and
//! matching of numerically found walks against them.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cayley_lattice::GeneratingSet;
use crate::isotropy::{heisenberg, induced_permutation, su2_lift, PermutationAction, SpinRep};
use crate::matrix_kernel::{
    c, c2, frobenius, identity2, is_unitary, sigma_x, sigma_y, sigma_z, singular_values, su2_from_quaternion,
    zero2, Complex2Matrix, IntVector, C64,
};
use crate::point_groups::{build_group_in_dim, representation_variants, BaseGroup, GroupName, PointGroup};
use crate::walk_engine::QuantumWalk;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Chirality {
    Plus,
    Minus,
}

impl Chirality {
    /// η = (1 ± i)/4.
    pub fn eta(self) -> C64 {
        match self {
            Chirality::Plus => c(0.25, 0.25),
            Chirality::Minus => c(0.25, -0.25),
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Chirality::Plus => 1.0,
            Chirality::Minus => -1.0,
        }
    }
}

/// Which coin the h₁ ↦ h₂ exchange is implemented by on the square lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Branch {
    /// iσ_Z; A_{±h₂} = ½V(1 0; −1 0), ½V(0 1; 0 1).
    SigmaZ,
    /// iσ_X; A_{±h₂} = ½V(0 1; 0 1), ½V(1 0; −1 0).
    SigmaX,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum FamilyParams {
    Line {
        n: f64,
        m: f64,
        #[serde(with = "pairs")]
        v: Complex2Matrix,
        inverses: bool,
    },
    Square {
        #[serde(with = "pairs")]
        v: Complex2Matrix,
        branch: Branch,
        inverses: bool,
    },
    Weyl {
        chirality: Chirality,
    },
}

mod pairs {
    use super::Complex2Matrix;
    use crate::walk_engine::{matrix_to_pairs, pairs_to_matrix};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &Complex2Matrix, s: S) -> Result<S::Ok, S::Error> {
        matrix_to_pairs(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex2Matrix, D::Error> {
        Ok(pairs_to_matrix(&Deserialize::deserialize(d)?))
    }
}

impl FamilyParams {
    pub fn dim(&self) -> usize {
        match self {
            FamilyParams::Line { .. } => 1,
            FamilyParams::Square { .. } => 2,
            FamilyParams::Weyl { .. } => 3,
        }
    }

    /// Short label of the family and presentation, without the continuous parameters.
    pub fn family_label(&self) -> String {
        match self {
            FamilyParams::Line { inverses, .. } => format!("line{}", if *inverses { " S+=S-" } else { "" }),
            FamilyParams::Square { branch, inverses, .. } => {
                format!("square {:?}{}", branch, if *inverses { " S+=S-" } else { "" })
            }
            FamilyParams::Weyl { chirality } => format!("weyl {chirality:?}"),
        }
    }
}

fn r(x: f64) -> C64 {
    c(x, 0.0)
}

fn mat(a: [[f64; 2]; 2]) -> Complex2Matrix {
    c2(r(a[0][0]), r(a[0][1]), r(a[1][0]), r(a[1][1]))
}

fn commutes(a: &Complex2Matrix, b: &Complex2Matrix, tol: f64) -> bool {
    frobenius(&(a * b - b * a)) <= tol
}

pub const FAMILY_TOL: f64 = 1e-9;

/// Lattice vectors of the four BCC generators h₁ = (1,1,1), h₂ = X₁h₁, h₃ = X₂h₁, h₄ = X₃h₁.
pub fn bcc_generators() -> Vec<IntVector> {
    [[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]]
        .iter()
        .map(|v| IntVector::from_ints(v))
        .collect()
}

/// The eight Weyl transition matrices in the order h₁, −h₁, …, h₄, −h₄.
pub fn weyl_matrices(ch: Chirality) -> [Complex2Matrix; 8] {
    let e = ch.eta();
    let eb = e.conj();
    let z = c(0.0, 0.0);
    [
        c2(e, z, e, z),
        c2(z, -eb, z, eb),
        c2(z, e, z, e),
        c2(eb, z, -eb, z),
        c2(z, -e, z, e),
        c2(eb, z, eb, z),
        c2(e, z, -e, z),
        c2(z, eb, z, eb),
    ]
}

fn signed_pairs(plus: &[IntVector]) -> Vec<IntVector> {
    plus.iter().flat_map(|h| [h.clone(), -h]).collect()
}

/// Transition matrices of the closed-form family, exactly as printed.
pub fn build_family_walk(params: &FamilyParams) -> Result<QuantumWalk> {
    let bad = |s: String| Err(Error::InvalidFamilyParams(s));
    match params {
        FamilyParams::Line { n, m, v, inverses } => {
            if !is_unitary(v, FAMILY_TOL) {
                return bad("V is not unitary".into());
            }
            if (n * n + m * m - 1.0).abs() > FAMILY_TOL {
                return bad(format!("n² + m² = {} ≠ 1", n * n + m * m));
            }
            if n.abs() <= FAMILY_TOL {
                return bad("n = 0 leaves the hopping coins zero".into());
            }
            if *inverses && !commutes(v, &sigma_x(), FAMILY_TOL) {
                return bad("V must commute with σ_X when S+ = {h1, -h1}".into());
            }
            let h = IntVector::from_ints(&[1]);
            let s_plus = if *inverses { vec![h.clone(), -&h] } else { vec![h.clone()] };
            let gs = GeneratingSet::new(1, s_plus, true)?;
            let im = c(0.0, *m);
            let coins = vec![
                (h.clone(), v * mat([[*n, 0.0], [0.0, 0.0]])),
                (-&h, v * mat([[0.0, 0.0], [0.0, *n]])),
                (IntVector::zero(1), v * c2(c(0.0, 0.0), im, im, c(0.0, 0.0))),
            ];
            QuantumWalk::new(gs, coins)
        }
        FamilyParams::Square { v, branch, inverses } => {
            if !is_unitary(v, FAMILY_TOL) {
                return bad("V is not unitary".into());
            }
            if *inverses {
                if frobenius(&(v - identity2())) > FAMILY_TOL {
                    return bad("V must be the identity when S+ = S-".into());
                }
            } else {
                let p = match branch {
                    Branch::SigmaZ => sigma_z(),
                    Branch::SigmaX => sigma_x(),
                };
                if !commutes(v, &p, FAMILY_TOL) {
                    return bad(format!("V must commute with σ_{}", if *branch == Branch::SigmaZ { "Z" } else { "X" }));
                }
            }
            let h1 = IntVector::from_ints(&[1, 0]);
            let h2 = IntVector::from_ints(&[0, 1]);
            let s_plus = if *inverses {
                signed_pairs(&[h1.clone(), h2.clone()])
            } else {
                vec![h1.clone(), h2.clone()]
            };
            let gs = GeneratingSet::new(2, s_plus, false)?;
            let half = |a| v * mat(a) * r(0.5);
            let (p2, m2) = match branch {
                Branch::SigmaX => ([[0.0, 1.0], [0.0, 1.0]], [[1.0, 0.0], [-1.0, 0.0]]),
                Branch::SigmaZ => ([[1.0, 0.0], [-1.0, 0.0]], [[0.0, 1.0], [0.0, 1.0]]),
            };
            let coins = vec![
                (h1.clone(), half([[1.0, 0.0], [1.0, 0.0]])),
                (-&h1, half([[0.0, -1.0], [0.0, 1.0]])),
                (h2.clone(), half(p2)),
                (-&h2, half(m2)),
            ];
            QuantumWalk::new(gs, coins)
        }
        FamilyParams::Weyl { chirality } => {
            let hs = bcc_generators();
            let gs = GeneratingSet::new(3, hs.clone(), false)?;
            let m = weyl_matrices(*chirality);
            let coins = signed_pairs(&hs).into_iter().zip(m).collect();
            QuantumWalk::new(gs, coins)
        }
    }
}

fn group_named(dim: usize, name: GroupName, variant: &str) -> PointGroup {
    representation_variants(name, dim)
        .into_iter()
        .find(|g| g.variant == variant)
        .expect("catalogue variant exists")
}

/// The isotropy group, its coin representation and action on S stated for the family.
pub fn family_isotropy(params: &FamilyParams, tol: f64) -> Result<(SpinRep, PermutationAction)> {
    let walk = build_family_walk(params)?;
    let [id, ix, iy, iz] = heisenberg();
    let (group, images): (PointGroup, Vec<Complex2Matrix>) = match params {
        FamilyParams::Line { inverses: false, .. } => (build_group_in_dim(GroupName::new(BaseGroup::Trivial), 1)?, vec![]),
        FamilyParams::Line { inverses: true, .. } => (build_group_in_dim(GroupName::new(BaseGroup::Z(2)), 1)?, vec![ix]),
        FamilyParams::Square { branch, inverses, .. } => {
            let (swap_img, other) = match branch {
                Branch::SigmaX => (ix, iz),
                Branch::SigmaZ => (iz, ix),
            };
            if *inverses {
                // generators −I and the coordinate swap
                let g = group_named(2, GroupName::new(BaseGroup::D(2)), "S(1)");
                let _ = other;
                (g, vec![iy, swap_img])
            } else {
                (group_named(2, GroupName::new(BaseGroup::D(1)), "S(1)"), vec![swap_img])
            }
        }
        FamilyParams::Weyl { .. } => (build_group_in_dim(GroupName::new(BaseGroup::D(2)), 3)?, vec![ix, iz]),
    };
    let gens: Vec<(usize, Complex2Matrix)> = group
        .generators
        .iter()
        .zip(images)
        .map(|(g, u)| (group.index_of(g).expect("generator is an element"), u))
        .collect();
    let rep = if gens.is_empty() {
        SpinRep::trivial(group.clone())
    } else {
        SpinRep::from_generator_images(group.clone(), &gens, tol)?
    };
    let _ = id;
    let act = induced_permutation(&group, &walk.gs)?;
    Ok((rep, act))
}

/// Random element of U(2).
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R) -> Complex2Matrix {
    let q: [f64; 4] = std::array::from_fn(|_| rng.sample(rand_distr::StandardNormal));
    let phase = rng.random_range(0.0..std::f64::consts::TAU);
    su2_from_quaternion(q) * C64::from_polar(1.0, phase)
}

/// Random unitary commuting with `p` (a Pauli matrix): e^{iφ}(cos θ + i sin θ p).
pub fn random_commutant<R: Rng + ?Sized>(rng: &mut R, p: &Complex2Matrix) -> Complex2Matrix {
    let phi = rng.random_range(0.0..std::f64::consts::TAU);
    let theta = rng.random_range(0.0..std::f64::consts::TAU);
    (identity2() * r(theta.cos()) + p * c(0.0, theta.sin())) * C64::from_polar(1.0, phi)
}

/// Admissible parameters drawn at random for the same family and presentation as `like`.
pub fn random_params<R: Rng + ?Sized>(rng: &mut R, like: &FamilyParams) -> FamilyParams {
    match like {
        FamilyParams::Line { inverses, .. } => {
            let a = rng.random_range(0.05..std::f64::consts::FRAC_PI_2 - 0.05) * if rng.random::<bool>() { 1.0 } else { -1.0 };
            let v = if *inverses { random_commutant(rng, &sigma_x()) } else { random_unitary(rng) };
            FamilyParams::Line {
                n: a.cos(),
                m: a.sin(),
                v,
                inverses: *inverses,
            }
        }
        FamilyParams::Square { branch, inverses, .. } => {
            let p = if *branch == Branch::SigmaZ { sigma_z() } else { sigma_x() };
            let v = if *inverses { identity2() } else { random_commutant(rng, &p) };
            FamilyParams::Square {
                v,
                branch: *branch,
                inverses: *inverses,
            }
        }
        FamilyParams::Weyl { .. } => like.clone(),
    }
}

/// Every family and presentation of dimension `d`, with V = I and (n, m) = (1/√2, 1/√2).
pub fn family_templates(d: usize) -> Vec<FamilyParams> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match d {
        1 => [false, true]
            .iter()
            .map(|&inverses| FamilyParams::Line {
                n: s,
                m: s,
                v: identity2(),
                inverses,
            })
            .collect(),
        2 => [Branch::SigmaZ, Branch::SigmaX]
            .iter()
            .flat_map(|&branch| {
                [false, true].map(|inverses| FamilyParams::Square {
                    v: identity2(),
                    branch,
                    inverses,
                })
            })
            .collect(),
        3 => vec![
            FamilyParams::Weyl { chirality: Chirality::Plus },
            FamilyParams::Weyl { chirality: Chirality::Minus },
        ],
        _ => vec![],
    }
}

/// Coins B_h = A₀†A_h with A₀ = Σ A_h, which removes left multiplication by a unitary.
pub fn gauge_fixed(coins: &[Complex2Matrix]) -> Vec<Complex2Matrix> {
    let a0: Complex2Matrix = coins.iter().fold(zero2(), |acc, m| acc + m);
    coins.iter().map(|m| a0.adjoint() * m).collect()
}

/// Smallest residual ‖W X_i − Y_i W‖ over unit W, with the minimizer. Accepts W only when
/// it is a multiple of a unitary.
pub fn intertwiner(x: &[Complex2Matrix], y: &[Complex2Matrix]) -> (f64, Option<Complex2Matrix>) {
    // unknown W as 8 reals; each matrix equation gives 8 real rows
    let rows = 8 * x.len();
    let mut a = DMatrix::<f64>::zeros(rows, 8);
    for (k, (xi, yi)) in x.iter().zip(y).enumerate() {
        for col in 0..8 {
            let mut w = zero2();
            let (idx, im) = (col / 2, col % 2 == 1);
            w[(idx / 2, idx % 2)] = if im { c(0.0, 1.0) } else { c(1.0, 0.0) };
            let out = w * xi - yi * w;
            for e in 0..4 {
                let z = out[(e / 2, e % 2)];
                a[(8 * k + 2 * e, col)] = z.re;
                a[(8 * k + 2 * e + 1, col)] = z.im;
            }
        }
    }
    let svd = a.clone().svd(false, true);
    let vt = svd.v_t.expect("requested");
    let (imin, smin) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|p, q| p.1.partial_cmp(q.1).expect("finite"))
        .map(|(i, s)| (i, *s))
        .expect("nonempty");
    let v = vt.row(imin);
    let mut w = zero2();
    for idx in 0..4 {
        w[(idx / 2, idx % 2)] = c(v[2 * idx], v[2 * idx + 1]);
    }
    let g = w.adjoint() * w;
    let scale = g.trace().re / 2.0;
    let unitary = scale > 1e-12 && frobenius(&(g - identity2() * r(scale))) <= 1e-6 * scale;
    (smin, unitary.then(|| w / r(scale.sqrt())))
}

/// Labelings of `s` (no e) onto `template`: bijections commuting with negation.
fn labelings(s: &[IntVector], template: &[IntVector]) -> Vec<Vec<usize>> {
    fn rec(i: usize, s: &[IntVector], t: &[IntVector], cur: &mut Vec<Option<usize>>, out: &mut Vec<Vec<usize>>) {
        if i == t.len() {
            out.push(cur.iter().map(|x| x.expect("assigned")).collect());
            return;
        }
        if cur[i].is_some() {
            rec(i + 1, s, t, cur, out);
            return;
        }
        for j in 0..s.len() {
            if cur.contains(&Some(j)) {
                continue;
            }
            let neg_t = t.iter().position(|x| *x == -&t[i]);
            let neg_s = s.iter().position(|x| *x == -&s[j]);
            match (neg_t, neg_s) {
                (Some(nt), Some(ns)) => {
                    if cur[nt].is_some() || cur.contains(&Some(ns)) || (nt == i) != (ns == j) {
                        continue;
                    }
                    cur[i] = Some(j);
                    cur[nt] = Some(ns);
                    rec(i + 1, s, t, cur, out);
                    cur[i] = None;
                    cur[nt] = None;
                }
                (None, None) => {
                    cur[i] = Some(j);
                    rec(i + 1, s, t, cur, out);
                    cur[i] = None;
                }
                _ => {}
            }
        }
    }
    let mut out = Vec::new();
    if s.len() == template.len() {
        rec(0, s, template, &mut vec![None; template.len()], &mut out);
    }
    out
}

pub const MATCH_TOL: f64 = 1e-9;

/// Family of a d = 1 or d = 2 walk: tries every labeling, unitary change of basis and
/// left multiplication. Returns the first family template that fits.
pub fn match_low_dim(walk: &QuantumWalk) -> Option<FamilyParams> {
    let d = walk.dim();
    let s: Vec<IntVector> = walk.gs.full().into_iter().filter(|h| !h.is_zero()).collect();
    let has_loop = walk.gs.self_loop;
    let coins_of = |w: &QuantumWalk, order: &[IntVector]| -> Vec<Complex2Matrix> {
        let mut v: Vec<Complex2Matrix> = order.iter().map(|h| *w.coin(h)).collect();
        if w.gs.self_loop {
            v.push(*w.coin(&IntVector::zero(w.dim())));
        }
        v
    };
    let mut candidates = family_templates(d);
    if d == 1 {
        let (n, _) = singular_values(walk.coin(&s[0]));
        let m = (1.0 - n * n).max(0.0).sqrt();
        candidates = [false, true]
            .iter()
            .flat_map(|&inverses| {
                [m, -m].map(|m| FamilyParams::Line {
                    n,
                    m,
                    v: identity2(),
                    inverses,
                })
            })
            .collect();
    }
    for fam in candidates {
        let Ok(fw) = build_family_walk(&fam) else { continue };
        if fw.gs.self_loop != has_loop || fw.gs.include_inverses != walk.gs.include_inverses {
            continue;
        }
        let t: Vec<IntVector> = fw.gs.full().into_iter().filter(|h| !h.is_zero()).collect();
        let x = gauge_fixed(&coins_of(&fw, &t));
        for lab in labelings(&s, &t) {
            let order: Vec<IntVector> = lab.iter().map(|&j| s[j].clone()).collect();
            let y = gauge_fixed(&coins_of(walk, &order));
            let (res, w) = intertwiner(&x, &y);
            if res <= 1e-7 {
                if let Some(w) = w {
                    let err = x
                        .iter()
                        .zip(&y)
                        .map(|(xi, yi)| frobenius(&(w * xi * w.adjoint() - yi)))
                        .fold(0.0, f64::max);
                    if err <= 1e-7 {
                        return Some(fam);
                    }
                }
            }
        }
    }
    None
}

type Walk8 = [Complex2Matrix; 8];

fn conj8(w: &Walk8, u: &Complex2Matrix) -> Walk8 {
    w.map(|m| u * m * u.adjoint())
}

fn relabel8(w: &Walk8, perm: [usize; 4]) -> Walk8 {
    // new coin at generator perm[i] is the old coin at generator i
    let mut out = *w;
    for i in 0..4 {
        out[2 * perm[i]] = w[2 * i];
        out[2 * perm[i] + 1] = w[2 * i + 1];
    }
    out
}

fn close8(a: &Walk8, b: &Walk8, tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| frobenius(&(x - y)) <= tol)
}

/// Orbit of the printed Weyl walks under the normalizing symmetries: conjugation by σ_X, σ_Y,
/// σ_Z; conjugation by e^{±iπσ_Z/4} with h₁ ↔ h₄; and the lift of the cyclic coordinate
/// permutation with h₂ → h₃ → h₄. Each element is tagged with its chirality.
pub fn weyl_closure() -> Vec<(Chirality, Walk8)> {
    let quarter = |s: f64| identity2() * r(std::f64::consts::FRAC_1_SQRT_2) + sigma_z() * c(0.0, s * std::f64::consts::FRAC_1_SQRT_2);
    let rot = nalgebra::Matrix3::new(0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0);
    let ur = su2_lift(&rot);
    let ops: Vec<Box<dyn Fn(&Walk8) -> Walk8>> = vec![
        Box::new(|w| conj8(w, &sigma_x())),
        Box::new(|w| conj8(w, &sigma_y())),
        Box::new(|w| conj8(w, &sigma_z())),
        Box::new(move |w| relabel8(&conj8(w, &quarter(1.0)), [3, 1, 2, 0])),
        Box::new(move |w| relabel8(&conj8(w, &quarter(-1.0)), [3, 1, 2, 0])),
        Box::new(move |w| relabel8(&conj8(w, &ur), [0, 2, 3, 1])),
        Box::new(move |w| relabel8(&conj8(w, &ur.adjoint()), [0, 3, 1, 2])),
    ];
    let mut out: Vec<(Chirality, Walk8)> = Vec::new();
    for ch in [Chirality::Plus, Chirality::Minus] {
        let mut queue = vec![weyl_matrices(ch)];
        while let Some(w) = queue.pop() {
            if out.iter().any(|(_, x)| close8(x, &w, 1e-12)) {
                continue;
            }
            out.push((ch, w));
            for op in &ops {
                queue.push(op(&w));
            }
        }
    }
    out
}

/// Chirality of a d = 3 walk on the four BCC generators h₁ … h₄ (in this order, with the
/// inverses), found by comparing its gauge-fixed coins with the closure.
pub fn match_weyl(walk: &QuantumWalk, generators: &[IntVector], closure: &[(Chirality, Walk8)]) -> Option<Chirality> {
    if generators.len() != 4 || walk.gs.self_loop {
        return None;
    }
    let coins: Vec<Complex2Matrix> = signed_pairs(generators).iter().map(|h| *walk.coin(h)).collect();
    let b = gauge_fixed(&coins);
    let b: Walk8 = std::array::from_fn(|i| b[i]);
    closure.iter().find(|(_, w)| close8(w, &b, MATCH_TOL)).map(|(ch, _)| *ch)
}

/// Phases (φ, ψ) with A_{h₁} = (α₊/√2)(φ 0; ψ 0), α₊ = 1/2.
pub fn weyl_phases(walk: &QuantumWalk, h1: &IntVector) -> (C64, C64) {
    let a = walk.coin(h1);
    let k = 2.0 * std::f64::consts::SQRT_2;
    (a[(0, 0)] * k, a[(1, 0)] * k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isotropy::{check_covariance, check_homogeneity};
    use crate::walk_engine::check_unitarity;
    use rand::SeedableRng;

    #[test]
    fn printed_matrices_sum_to_identity() {
        for ch in [Chirality::Plus, Chirality::Minus] {
            let s = weyl_matrices(ch).iter().fold(zero2(), |a, m| a + m);
            assert!(frobenius(&(s - identity2())) < 1e-15);
        }
    }

    #[test]
    fn families_are_unitary_covariant_homogeneous() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for d in 1..=3 {
            for t in family_templates(d) {
                for _ in 0..5 {
                    let p = random_params(&mut rng, &t);
                    let w = build_family_walk(&p).unwrap();
                    assert!(check_unitarity(&w).is_valid(1e-12), "{p:?}");
                    let (rep, act) = family_isotropy(&p, 1e-12).unwrap();
                    assert!(check_covariance(&w, &rep, &act, 1e-12), "{p:?}");
                    assert!(check_homogeneity(&w, &rep, &act, 1e-9), "{p:?}");
                }
            }
        }
    }

    #[test]
    fn invalid_parameters_rejected() {
        let bad_nm = FamilyParams::Line { n: 0.9, m: 0.9, v: identity2(), inverses: false };
        assert!(matches!(build_family_walk(&bad_nm), Err(Error::InvalidFamilyParams(_))));
        let bad_v = FamilyParams::Line { n: 1.0, m: 0.0, v: sigma_z(), inverses: true };
        assert!(matches!(build_family_walk(&bad_v), Err(Error::InvalidFamilyParams(_))));
        let shift = FamilyParams::Line { n: 1.0, m: 0.0, v: identity2(), inverses: false };
        let w = build_family_walk(&shift).unwrap();
        assert_eq!(*w.coin(&IntVector::from_ints(&[1])), mat([[1.0, 0.0], [0.0, 0.0]]));
        let sq = FamilyParams::Square { v: sigma_z(), branch: Branch::SigmaX, inverses: false };
        assert!(build_family_walk(&sq).is_err());
    }

    #[test]
    fn closure_separates_chiralities() {
        let cl = weyl_closure();
        for (ch, w) in &cl {
            for (ch2, w2) in &cl {
                if ch != ch2 {
                    assert!(!close8(w, w2, 1e-6));
                }
            }
            let s = w.iter().fold(zero2(), |a, m| a + m);
            assert!(frobenius(&(s - identity2())) < 1e-12);
        }
        let hs = bcc_generators();
        for ch in [Chirality::Plus, Chirality::Minus] {
            let w = build_family_walk(&FamilyParams::Weyl { chirality: ch }).unwrap();
            assert_eq!(match_weyl(&w, &hs, &cl), Some(ch));
            let (phi, psi) = weyl_phases(&w, &hs[0]);
            assert!((phi * phi + (phi * phi).conj()).norm() < 1e-12);
            assert!((psi * psi + (psi * psi).conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn low_dim_matching_recovers_family() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for d in 1..=2 {
            for t in family_templates(d) {
                let p = random_params(&mut rng, &t);
                let w = build_family_walk(&p).unwrap();
                let u = random_unitary(&mut rng);
                let left = random_unitary(&mut rng);
                let moved = w.map_coins(|_, m| left * u * m * u.adjoint()).unwrap();
                let got = match_low_dim(&moved).expect("matched");
                assert_eq!(got.dim(), d);
                if let (FamilyParams::Square { inverses: a, .. }, FamilyParams::Square { inverses: b, .. }) = (&got, &p) {
                    assert_eq!(a, b);
                }
            }
        }
        let not = QuantumWalk::new(
            GeneratingSet::from_ints(2, &[&[1, 0], &[0, 1]], false).unwrap(),
            vec![
                (IntVector::from_ints(&[1, 0]), identity2() * r(0.5)),
                (IntVector::from_ints(&[0, 1]), identity2() * r(0.5)),
                (IntVector::from_ints(&[-1, 0]), identity2() * r(0.5)),
                (IntVector::from_ints(&[0, -1]), identity2() * r(0.5)),
            ],
        )
        .unwrap();
        assert!(match_low_dim(&not).is_none());
    }
}
