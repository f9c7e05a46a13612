//! Covariance of a walk under a point group, homogeneity, and the
//! uniqueness-of-differences condition on orbits.

use std::collections::HashMap;

use nalgebra::{DMatrix, Matrix3};
use serde::{Deserialize, Serialize};

use crate::cayley_lattice::GeneratingSet;
use crate::matrix_kernel::{
    c, frobenius, identity2, is_special_unitary, sigma_x, sigma_y, sigma_z, Complex2Matrix, IntVector,
    RatMatrix,
};
use crate::point_groups::{AbstractType, PointGroup};
use crate::walk_engine::{matrix_to_pairs, pairs_to_matrix, QuantumWalk};
use crate::{Error, Result};

/// Coin representations allowed on a subgroup satisfying the difference condition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RepClass {
    H,
    J1,
    J2,
    J3,
    J4,
    TrivialI,
    Excluded,
}

fn i_times(m: Complex2Matrix) -> Complex2Matrix {
    m * c(0.0, 1.0)
}

/// {I, iσX, iσY, iσZ}.
pub fn heisenberg() -> [Complex2Matrix; 4] {
    [identity2(), i_times(sigma_x()), i_times(sigma_y()), i_times(sigma_z())]
}

/// Images of the named families. J2 and J4 need the walk's V_{h1}.
pub fn rep_family(class: RepClass, v: Option<&Complex2Matrix>) -> Result<Vec<Complex2Matrix>> {
    let ix = i_times(sigma_x());
    let id = identity2();
    let conj = |v: Option<&Complex2Matrix>| -> Result<Complex2Matrix> {
        let v = v.ok_or_else(|| Error::Invalid(format!("{class:?} needs V_h1")))?;
        Ok(v * ix * v.adjoint())
    };
    Ok(match class {
        RepClass::H => heisenberg().to_vec(),
        RepClass::J1 => vec![id, ix],
        RepClass::J2 => vec![id, -conj(v)?],
        RepClass::J3 => vec![id, ix, -id, -ix],
        RepClass::J4 => {
            let w = conj(v)?;
            vec![id, -w, -id, w]
        }
        RepClass::TrivialI => vec![id],
        RepClass::Excluded => vec![],
    })
}

/// Allowed classes on K. Without the difference condition nothing is ruled out.
pub fn admissible_coin_reps(k: &PointGroup, difference_condition_holds: bool) -> Vec<RepClass> {
    use RepClass::*;
    if !difference_condition_holds {
        return vec![H, J1, J2, J3, J4, TrivialI];
    }
    match k.abstract_type() {
        AbstractType::Trivial => vec![TrivialI],
        AbstractType::Z2 => vec![J1, J2],
        AbstractType::Z2xZ2 => vec![H],
        AbstractType::Z4 => vec![J3, J4],
        AbstractType::Z3 | AbstractType::Other { .. } => vec![Excluded],
    }
}

fn equal_up_to_sign(a: &Complex2Matrix, b: &Complex2Matrix, tol: f64) -> Option<f64> {
    if frobenius(&(a - b)) <= tol {
        Some(1.0)
    } else if frobenius(&(a + b)) <= tol {
        Some(-1.0)
    } else {
        None
    }
}

/// A (possibly projective) representation of a point group in SU(2).
#[derive(Clone, Debug, PartialEq)]
pub struct SpinRep {
    pub group: PointGroup,
    pub images: Vec<Complex2Matrix>,
    pub projective: bool,
}

impl SpinRep {
    /// `images[i]` is the image of group element `i`.
    pub fn new(group: PointGroup, images: Vec<Complex2Matrix>, tol: f64) -> Result<Self> {
        if images.len() != group.order() {
            return Err(Error::Invalid(format!(
                "{} images for a group of order {}",
                images.len(),
                group.order()
            )));
        }
        if let Some(i) = images.iter().position(|u| !is_special_unitary(u, tol)) {
            return Err(Error::Invalid(format!("image of element {i} is not in SU(2)")));
        }
        let mut projective = false;
        for i in 0..group.order() {
            for j in 0..group.order() {
                let prod = images[i] * images[j];
                match equal_up_to_sign(&prod, &images[group.mul_index(i, j)], tol) {
                    Some(s) => projective |= s < 0.0,
                    None => return Err(Error::Invalid("images do not multiply like the group".into())),
                }
            }
        }
        Ok(SpinRep {
            group,
            images,
            projective,
        })
    }

    pub fn trivial(group: PointGroup) -> Self {
        let images = vec![identity2(); group.order()];
        SpinRep {
            group,
            images,
            projective: false,
        }
    }

    /// Assigns the images of `generators` (element indices) and extends along the Cayley table.
    pub fn from_generator_images(
        group: PointGroup,
        generators: &[(usize, Complex2Matrix)],
        tol: f64,
    ) -> Result<Self> {
        let n = group.order();
        let mut images: Vec<Option<Complex2Matrix>> = vec![None; n];
        images[0] = Some(identity2());
        let mut queue = vec![0];
        while let Some(i) = queue.pop() {
            for (g, u) in generators {
                let j = group.mul_index(i, *g);
                if images[j].is_none() {
                    images[j] = Some(images[i].unwrap() * u);
                    queue.push(j);
                }
            }
        }
        let images = images
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::Invalid("generators do not generate the group".into()))?;
        SpinRep::new(group, images, tol)
    }

    /// Injective up to sign.
    pub fn is_faithful(&self, tol: f64) -> bool {
        for i in 0..self.images.len() {
            for j in i + 1..self.images.len() {
                if equal_up_to_sign(&self.images[i], &self.images[j], tol).is_some() {
                    return false;
                }
            }
        }
        true
    }

    pub fn image(&self, i: usize) -> &Complex2Matrix {
        &self.images[i]
    }

    /// W U W† for every image.
    pub fn conjugated(&self, w: &Complex2Matrix) -> SpinRep {
        SpinRep {
            group: self.group.clone(),
            images: self.images.iter().map(|u| w * u * w.adjoint()).collect(),
            projective: self.projective,
        }
    }

    /// A projectively faithful representation built from a faithful rotation image.
    pub fn faithful_lift(group: &PointGroup, tol: f64) -> Result<Self> {
        let rot = so3_image(group)?;
        let images = rot.iter().map(su2_lift).collect();
        SpinRep::new(group.clone(), images, tol)
    }
}

fn dm_to_m3(m: &DMatrix<f64>) -> Matrix3<f64> {
    let mut out = Matrix3::identity();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out[(i, j)] = m[(i, j)];
        }
    }
    out
}

fn rotation_axis(r: &Matrix3<f64>) -> Option<nalgebra::Vector3<f64>> {
    let cos = ((r.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
    let angle = cos.acos();
    if angle < 1e-6 {
        return None;
    }
    if (std::f64::consts::PI - angle).abs() < 1e-6 {
        let b = (r + Matrix3::identity()) / 2.0;
        let k = (0..3)
            .max_by(|&a, &b2| b[(a, a)].partial_cmp(&b[(b2, b2)]).unwrap())
            .unwrap();
        return Some(b.column(k).normalize());
    }
    Some(
        nalgebra::Vector3::new(r[(2, 1)] - r[(1, 2)], r[(0, 2)] - r[(2, 0)], r[(1, 0)] - r[(0, 1)]).normalize(),
    )
}

fn half_turn(n: &nalgebra::Vector3<f64>) -> Matrix3<f64> {
    2.0 * n * n.transpose() - Matrix3::identity()
}

fn close3(a: &Matrix3<f64>, b: &Matrix3<f64>) -> bool {
    (a - b).norm() < 1e-8
}

/// Faithful image of the group in SO(3), element by element.
pub fn so3_image(group: &PointGroup) -> Result<Vec<Matrix3<f64>>> {
    let ortho = group.orthogonal_matrices();
    let dets: Vec<f64> = group
        .elements
        .iter()
        .map(|e| if e.matrix.det() > num_traits::Zero::zero() { 1.0 } else { -1.0 })
        .collect();
    let images: Vec<Matrix3<f64>> = match group.dim {
        1 => ortho
            .iter()
            .map(|m| Matrix3::from_diagonal(&nalgebra::Vector3::new(m[(0, 0)], m[(0, 0)], 1.0)))
            .collect(),
        2 => ortho
            .iter()
            .zip(&dets)
            .map(|(m, d)| {
                let mut out = dm_to_m3(m);
                out[(2, 2)] = *d;
                out
            })
            .collect(),
        3 if !group.contains_inversion() => ortho.iter().zip(&dets).map(|(m, d)| dm_to_m3(m) * *d).collect(),
        3 => {
            let minus = group.index_of(&RatMatrix::identity(3).neg()).expect("contains -I");
            let proper: Vec<usize> = (0..group.order()).filter(|&i| dets[i] > 0.0).collect();
            let proper_rot: Vec<Matrix3<f64>> = proper.iter().map(|&i| dm_to_m3(&ortho[i])).collect();
            let p = commuting_half_turn(&proper_rot).ok_or_else(|| {
                Error::Invalid(format!("{} has no faithful spin representation", group.label()))
            })?;
            (0..group.order())
                .map(|i| {
                    if dets[i] > 0.0 {
                        dm_to_m3(&ortho[i])
                    } else {
                        p * dm_to_m3(&ortho[group.mul_index(i, minus)])
                    }
                })
                .collect()
        }
        d => return Err(Error::DimensionMismatch { expected: 3, got: d }),
    };
    for i in 0..images.len() {
        for j in i + 1..images.len() {
            if close3(&images[i], &images[j]) {
                return Err(Error::Invalid(format!("{} has no faithful spin representation", group.label())));
            }
        }
    }
    Ok(images)
}

/// A half-turn commuting with every given rotation and not among them.
fn commuting_half_turn(rots: &[Matrix3<f64>]) -> Option<Matrix3<f64>> {
    let mut axes: Vec<nalgebra::Vector3<f64>> = (0..3)
        .map(|k| nalgebra::Vector3::from_fn(|i, _| if i == k { 1.0 } else { 0.0 }))
        .collect();
    let own: Vec<_> = rots.iter().filter_map(rotation_axis).collect();
    for n in &own {
        axes.push(*n);
        for k in 0..3 {
            let e = nalgebra::Vector3::from_fn(|i, _| if i == k { 1.0 } else { 0.0 });
            let p = n.cross(&e);
            if p.norm() > 1e-6 {
                axes.push(p.normalize());
            }
        }
    }
    axes.into_iter().map(|n| half_turn(&n)).find(|p| {
        rots.iter().all(|r| close3(&(p * r), &(r * p))) && rots.iter().all(|r| !close3(p, r))
    })
}

/// The SU(2) element exp(−iθ n·σ/2) covering a rotation by θ about n, sign fixed so the
/// first nonzero quaternion component is positive.
pub fn su2_lift(r: &Matrix3<f64>) -> Complex2Matrix {
    let rot = nalgebra::Rotation3::from_matrix_unchecked(*r);
    let q = nalgebra::UnitQuaternion::from_rotation_matrix(&rot);
    let mut v = [q.w, q.i, q.j, q.k];
    if let Some(k) = v.iter().position(|x| x.abs() > 1e-9) {
        if v[k] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
    let ns = sigma_x() * c(v[1], 0.0) + sigma_y() * c(v[2], 0.0) + sigma_z() * c(v[3], 0.0);
    identity2() * c(v[0], 0.0) - ns * c(0.0, 1.0)
}

/// Group elements acting on S = S+ ∪ S− (without e), as index permutations of `s`.
#[derive(Clone, Debug, PartialEq)]
pub struct PermutationAction {
    pub group: PointGroup,
    pub s: Vec<IntVector>,
    pub s_plus_len: usize,
    pub perms: Vec<Vec<usize>>,
    /// Every element maps S+ to itself.
    pub preserves_s_plus: bool,
    /// S+ is a single orbit of a group preserving it.
    pub transitive: bool,
}

impl PermutationAction {
    pub fn image(&self, l: usize, h: &IntVector) -> Option<&IntVector> {
        let i = self.s.iter().position(|x| x == h)?;
        Some(&self.s[self.perms[l][i]])
    }

    /// Replaces the permutation of element `l` by an arbitrary one (for testing negative cases).
    pub fn with_permutation(&self, l: usize, perm: Vec<usize>) -> Self {
        let mut out = self.clone();
        out.perms[l] = perm;
        out
    }
}

pub fn induced_permutation(group: &PointGroup, gs: &GeneratingSet) -> Result<PermutationAction> {
    if group.dim != gs.dim {
        return Err(Error::DimensionMismatch {
            expected: gs.dim,
            got: group.dim,
        });
    }
    let s: Vec<IntVector> = gs.full().into_iter().filter(|h| !h.is_zero()).collect();
    let np = gs.s_plus.len();
    let mut perms = Vec::with_capacity(group.order());
    let mut preserves = true;
    for e in &group.elements {
        let mut perm = Vec::with_capacity(s.len());
        for (i, h) in s.iter().enumerate() {
            let img = e.matrix.mul_vec(h);
            let j = s
                .iter()
                .position(|x| *x == img)
                .ok_or_else(|| Error::NotAnAction(format!("{} maps {h} to {img}", e.matrix)))?;
            if i < np && j >= np {
                preserves = false;
            }
            perm.push(j);
        }
        perms.push(perm);
    }
    let transitive = preserves && {
        let mut reached = vec![false; np];
        for p in &perms {
            reached[p[0]] = true;
        }
        reached.iter().all(|&r| r)
    };
    Ok(PermutationAction {
        group: group.clone(),
        s,
        s_plus_len: np,
        perms,
        preserves_s_plus: preserves,
        transitive,
    })
}

/// Largest ‖A_{l(h)} − U_l A_h U_l†‖ over elements l and h ∈ S (e included).
pub fn covariance_residual(w: &QuantumWalk, rep: &SpinRep, act: &PermutationAction) -> f64 {
    let mut worst: f64 = 0.0;
    for (l, perm) in act.perms.iter().enumerate() {
        let u = rep.image(l);
        for (i, h) in act.s.iter().enumerate() {
            let lhs = w.coin(&act.s[perm[i]]);
            worst = worst.max(frobenius(&(lhs - u * w.coin(h) * u.adjoint())));
        }
        if w.gs.self_loop {
            let e = IntVector::zero(w.dim());
            let a = w.coin(&e);
            worst = worst.max(frobenius(&(a - u * a * u.adjoint())));
        }
    }
    worst
}

pub fn check_covariance(w: &QuantumWalk, rep: &SpinRep, act: &PermutationAction, tol: f64) -> bool {
    rep.group == act.group && covariance_residual(w, rep, act) <= tol
}

/// ‖[U_l, A_h]‖ > tol whenever l moves h ∈ S+.
pub fn check_homogeneity(w: &QuantumWalk, rep: &SpinRep, act: &PermutationAction, tol: f64) -> bool {
    act.perms.iter().enumerate().all(|(l, perm)| {
        let u = rep.image(l);
        (0..act.s_plus_len).all(|i| {
            if act.s[perm[i]] == act.s[i] {
                return true;
            }
            let a = w.coin(&act.s[i]);
            frobenius(&(u * a - a * u)) > tol
        })
    })
}

type Key = [i64; 3];

fn key(v: &IntVector) -> Key {
    let ints = v.to_i64().expect("lattice vectors are integral");
    let mut k = [0; 3];
    k[..ints.len()].copy_from_slice(&ints);
    k
}

fn sub(a: &Key, b: &Key) -> Key {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// A decomposition h_i − h_j = h_l − h_m other than the two allowed ones.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DifferenceWitness {
    pub hi: IntVector,
    pub hj: IntVector,
    pub hl: IntVector,
    pub hm: IntVector,
}

/// All differences h_l − h_m with h_l, h_m ∈ {0} ∪ ±O, indexed exactly.
pub struct DifferenceTable {
    terms: Vec<(Key, IntVector)>,
    diffs: HashMap<Key, Vec<(usize, usize)>>,
}

impl DifferenceTable {
    pub fn new(full_orbit: &[IntVector]) -> Self {
        let dim = full_orbit.first().map_or(1, |v| v.dim());
        let mut terms: Vec<IntVector> = vec![IntVector::zero(dim)];
        for v in full_orbit {
            terms.push(v.clone());
            terms.push(-v);
        }
        terms.sort();
        terms.dedup();
        let terms: Vec<(Key, IntVector)> = terms.into_iter().map(|v| (key(&v), v)).collect();
        let mut diffs: HashMap<Key, Vec<(usize, usize)>> = HashMap::new();
        for (l, (kl, _)) in terms.iter().enumerate() {
            for (m, (km, _)) in terms.iter().enumerate() {
                if l != m {
                    diffs.entry(sub(kl, km)).or_default().push((l, m));
                }
            }
        }
        DifferenceTable { terms, diffs }
    }

    /// First violation over ordered pairs of `subgroup_orbit`, if any.
    pub fn witness(&self, subgroup_orbit: &[IntVector]) -> Option<DifferenceWitness> {
        for hi in subgroup_orbit {
            let ki = key(hi);
            let neg_i = [-ki[0], -ki[1], -ki[2]];
            for hj in subgroup_orbit {
                if hi == hj {
                    continue;
                }
                let d = sub(&ki, &key(hj));
                for &(l, m) in self.diffs.get(&d).map(Vec::as_slice).unwrap_or(&[]) {
                    let (kl, km) = (&self.terms[l].0, &self.terms[m].0);
                    if *kl != ki && *km != neg_i {
                        return Some(DifferenceWitness {
                            hi: hi.clone(),
                            hj: hj.clone(),
                            hl: self.terms[l].1.clone(),
                            hm: self.terms[m].1.clone(),
                        });
                    }
                }
            }
        }
        None
    }
}

/// h_i − h_j = h_l − h_m ⟺ h_i = h_l or h_i = −h_m, for distinct h_i, h_j in
/// `subgroup_orbit` and h_l, h_m ∈ {0} ∪ ±`full_orbit`.
pub fn unique_difference_condition(subgroup_orbit: &[IntVector], full_orbit: &[IntVector]) -> bool {
    DifferenceTable::new(full_orbit).witness(subgroup_orbit).is_none()
}

/// Declared isotropy for a walk file: element matrices in lattice coordinates and their coin images.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsotropyDecl {
    pub generators: Vec<RatMatrix>,
    pub generator_images: Vec<[[[f64; 2]; 2]; 2]>,
}

impl IsotropyDecl {
    pub fn from_rep(rep: &SpinRep) -> Self {
        let gens: Vec<usize> = rep
            .group
            .generators
            .iter()
            .map(|g| rep.group.index_of(g).expect("generator is an element"))
            .collect();
        IsotropyDecl {
            generators: rep.group.generators.clone(),
            generator_images: gens.iter().map(|&i| matrix_to_pairs(rep.image(i))).collect(),
        }
    }

    pub fn to_rep(&self, dim: usize, tol: f64) -> Result<SpinRep> {
        if self.generators.len() != self.generator_images.len() {
            return Err(Error::Invalid("one image per generator required".into()));
        }
        let mut metric = RatMatrix::zeros(dim, dim);
        let group0 = PointGroup::from_generators(
            crate::point_groups::GroupName::new(crate::point_groups::BaseGroup::Trivial),
            "",
            dim,
            self.generators.clone(),
            RatMatrix::identity(dim),
        );
        let group = match group0 {
            Ok(g) => g,
            Err(_) => {
                // invariant metric Σ MᵀM for non-orthogonal integer representations
                let probe = closure_plain(&self.generators, dim)?;
                for m in &probe {
                    metric = metric.add(&m.transpose().mul(m));
                }
                PointGroup::from_generators(
                    crate::point_groups::GroupName::new(crate::point_groups::BaseGroup::Trivial),
                    "",
                    dim,
                    self.generators.clone(),
                    metric,
                )?
            }
        };
        let group = rename_by_order(group);
        let gens: Vec<(usize, Complex2Matrix)> = self
            .generators
            .iter()
            .zip(&self.generator_images)
            .map(|(g, u)| (group.index_of(g).expect("generator is an element"), pairs_to_matrix(u)))
            .collect();
        SpinRep::from_generator_images(group, &gens, tol)
    }
}

fn closure_plain(gens: &[RatMatrix], dim: usize) -> Result<Vec<RatMatrix>> {
    let mut out = vec![RatMatrix::identity(dim)];
    let mut k = 0;
    while k < out.len() {
        for g in gens {
            let nx = out[k].mul(g);
            if !out.contains(&nx) {
                if out.len() >= 96 {
                    return Err(Error::NotAGroup);
                }
                out.push(nx);
            }
        }
        k += 1;
    }
    Ok(out)
}

fn rename_by_order(g: PointGroup) -> PointGroup {
    use crate::point_groups::{BaseGroup, GroupName};
    let n = g.order();
    let cyclic = g.elements.iter().any(|e| e.order as usize == n);
    let base = match (n, cyclic) {
        (1, _) => BaseGroup::Trivial,
        (n, true) => BaseGroup::Z(n as u8),
        (12, false) => BaseGroup::A4,
        (24, false) => BaseGroup::S4,
        (n, false) => BaseGroup::D((n / 2) as u8),
    };
    PointGroup::from_generators(GroupName::new(base), &g.variant, g.dim, g.generators.clone(), g.metric.clone())
        .expect("already closed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix_kernel::{c2, is_unitary};
    use crate::point_groups::{build_group, build_group_in_dim, orbit, ternary_subgroups, x1, GroupName};
    use proptest::prelude::*;

    const TOL: f64 = 1e-10;

    fn v(x: &[i64]) -> IntVector {
        IntVector::from_ints(x)
    }

    fn bcc() -> GeneratingSet {
        GeneratingSet::from_ints(3, &[&[1, 1, 1], &[1, -1, -1], &[-1, 1, -1], &[-1, -1, 1]], false).unwrap()
    }

    fn d2() -> PointGroup {
        build_group("D2".parse().unwrap()).unwrap()
    }

    /// H on the rotation Klein group: X_i ↦ iσ_i.
    fn h_rep() -> SpinRep {
        let g = d2();
        let h = heisenberg();
        let mut gens = Vec::new();
        for (k, m) in [
            RatMatrix::from_i64(&[[1, 0, 0], [0, -1, 0], [0, 0, -1]]),
            RatMatrix::from_i64(&[[-1, 0, 0], [0, 1, 0], [0, 0, -1]]),
        ]
        .iter()
        .enumerate()
        {
            gens.push((g.index_of(m).unwrap(), h[k + 1]));
        }
        SpinRep::from_generator_images(g, &gens, TOL).unwrap()
    }

    fn weyl() -> QuantumWalk {
        let eta = c(0.25, 0.25);
        let es = eta.conj();
        let z = c(0., 0.);
        QuantumWalk::new(
            bcc(),
            vec![
                (v(&[1, 1, 1]), c2(eta, z, eta, z)),
                (v(&[-1, -1, -1]), c2(z, -es, z, es)),
                (v(&[1, -1, -1]), c2(z, eta, z, eta)),
                (v(&[-1, 1, 1]), c2(es, z, -es, z)),
                (v(&[-1, 1, -1]), c2(z, -eta, z, eta)),
                (v(&[1, -1, 1]), c2(es, z, es, z)),
                (v(&[-1, -1, 1]), c2(eta, z, -eta, z)),
                (v(&[1, 1, -1]), c2(z, es, z, es)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn heisenberg_relations() {
        let [_, x, y, z] = heisenberg();
        assert!(frobenius(&(x * y + y * x)) < 1e-15);
        for u in [x, y, z] {
            assert!(frobenius(&(u * u + identity2())) < 1e-15);
        }
        for class in [RepClass::J3, RepClass::J4] {
            let vv = crate::matrix_kernel::su2_from_quaternion([0.3, -0.2, 0.9, 0.1]);
            for u in rep_family(class, Some(&vv)).unwrap() {
                let u4 = u * u * u * u;
                assert!(frobenius(&(u4 - identity2())) < 1e-12);
            }
        }
        assert!(rep_family(RepClass::J2, None).is_err());
        assert!(h_rep().projective);
    }

    #[test]
    fn admissible_examples() {
        let klein = d2();
        assert_eq!(admissible_coin_reps(&klein, true), vec![RepClass::H]);
        let z3 = ternary_subgroups(&build_group("A4".parse().unwrap()).unwrap()).remove(0);
        assert_eq!(admissible_coin_reps(&z3, true), vec![RepClass::Excluded]);
        let triv = build_group(GroupName::new(crate::point_groups::BaseGroup::Trivial)).unwrap();
        assert_eq!(admissible_coin_reps(&triv, true), vec![RepClass::TrivialI]);
        let z4 = build_group("Z4".parse().unwrap()).unwrap();
        assert_eq!(admissible_coin_reps(&z4, true), vec![RepClass::J3, RepClass::J4]);
        let a4 = build_group("A4".parse().unwrap()).unwrap();
        assert_eq!(admissible_coin_reps(&a4, true), vec![RepClass::Excluded]);
    }

    #[test]
    fn permutation_examples() {
        let a4 = build_group("A4".parse().unwrap()).unwrap();
        let sc = GeneratingSet::new(3, orbit(&a4, &v(&[1, 0, 0])).unwrap().vectors, false).unwrap();
        let act = induced_permutation(&a4, &sc).unwrap();
        assert!(act.transitive);
        let triv = build_group(GroupName::new(crate::point_groups::BaseGroup::Trivial)).unwrap();
        let act = induced_permutation(&triv, &bcc()).unwrap();
        assert!(!act.transitive);
        let single = GeneratingSet::from_ints(3, &[&[1, 1, 1]], false).unwrap();
        assert!(induced_permutation(&triv, &single).unwrap().transitive);
        assert!(induced_permutation(&d2(), &bcc()).unwrap().transitive);
        let s4 = build_group("S4".parse().unwrap()).unwrap();
        let act = induced_permutation(&s4, &bcc()).unwrap();
        assert!(!act.preserves_s_plus);
        let z4 = build_group("Z4".parse().unwrap()).unwrap();
        assert!(!induced_permutation(&z4, &bcc()).unwrap().preserves_s_plus);
        let diag = GeneratingSet::from_ints(3, &[&[1, 1, 0]], false).unwrap();
        assert!(matches!(induced_permutation(&z4, &diag), Err(Error::NotAnAction(_))));
    }

    #[test]
    fn covariance_examples() {
        let w = weyl();
        let rep = h_rep();
        let act = induced_permutation(&rep.group, &bcc()).unwrap();
        assert!(check_covariance(&w, &rep, &act, TOL));
        assert!(check_homogeneity(&w, &rep, &act, TOL));
        let triv = build_group(GroupName::new(crate::point_groups::BaseGroup::Trivial)).unwrap();
        let tact = induced_permutation(&triv, &bcc()).unwrap();
        assert!(check_covariance(&w, &SpinRep::trivial(triv), &tact, TOL));
        let l = rep.group.index_of(&x1()).unwrap();
        let mut scrambled = act.perms[l].clone();
        scrambled.swap(0, 2);
        assert!(!check_covariance(&w, &rep, &act.with_permutation(l, scrambled), TOL));
        let flat = w.map_coins(|_, _| identity2() * c(0.5f64.sqrt() * 0.5, 0.0)).unwrap();
        assert!(!check_homogeneity(&flat, &rep, &act, TOL));
        assert!(check_homogeneity(&w, &SpinRep::trivial(tact.group.clone()), &tact, TOL));
    }

    #[test]
    fn covariance_transports_singular_values() {
        let w = weyl();
        let rep = h_rep();
        let act = induced_permutation(&rep.group, &bcc()).unwrap();
        assert!(check_covariance(&w, &rep, &act, TOL));
        let sv = |h: &IntVector| crate::matrix_kernel::singular_values(w.coin(h));
        for perm in &act.perms {
            for (i, h) in act.s.iter().enumerate() {
                let (a, b) = sv(h);
                let (x, y) = sv(&act.s[perm[i]]);
                assert!((a - x).abs() < 1e-12 && (b - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn faithful_lifts() {
        for dim in 1..=3 {
            for name in crate::point_groups::catalog(dim) {
                for g in crate::point_groups::representation_variants(name, dim) {
                    match SpinRep::faithful_lift(&g, 1e-9) {
                        Ok(rep) => {
                            assert!(rep.is_faithful(1e-9), "{}", g.label());
                            assert!(rep.images.iter().all(|u| is_unitary(u, 1e-9)));
                        }
                        Err(_) => {
                            assert_eq!(dim, 3, "{}", g.label());
                            assert!(g.contains_inversion(), "{}", g.label());
                        }
                    }
                }
            }
        }
        for name in ["Z3xZ2", "D3xZ2", "D2xZ2", "A4xZ2", "S4xZ2", "Z4xZ2"] {
            let name: GroupName = name.parse().unwrap();
            let ok = crate::point_groups::representation_variants(name, 3)
                .iter()
                .any(|g| SpinRep::faithful_lift(g, 1e-9).is_ok());
            let expected = matches!(name.to_string().as_str(), "Z3xZ2" | "D3xZ2");
            assert_eq!(ok, expected, "{name}");
        }
    }

    #[test]
    fn faithful_lift_of_klein_is_heisenberg_up_to_sign() {
        let rep = SpinRep::faithful_lift(&d2(), TOL).unwrap();
        let h = h_rep();
        for i in 0..4 {
            assert!(equal_up_to_sign(rep.image(i), h.image(i), 1e-12).is_some());
        }
    }

    #[test]
    fn difference_condition_examples() {
        let a4 = build_group("A4".parse().unwrap()).unwrap();
        let full = orbit(&a4, &v(&[1, 0, 0])).unwrap().vectors;
        let r = ternary_subgroups(&a4)
            .into_iter()
            .find(|k| k.contains(&crate::point_groups::r_cyclic()))
            .unwrap();
        let sub = orbit(&r, &v(&[1, 0, 0])).unwrap().vectors;
        assert!(unique_difference_condition(&sub, &full));
        let tt = orbit(&a4, &v(&[3, 1, 1])).unwrap().vectors;
        let violated = ternary_subgroups(&a4)
            .iter()
            .any(|k| !unique_difference_condition(&orbit(k, &v(&[3, 1, 1])).unwrap().vectors, &tt));
        assert!(violated);
        assert!(unique_difference_condition(&[v(&[1])], &[v(&[1])]));
    }

    /// Independent oracle: enumerate every (l, m) pair directly.
    fn difference_oracle(sub: &[IntVector], full: &[IntVector]) -> bool {
        let dim = full[0].dim();
        let mut t = vec![IntVector::zero(dim)];
        for x in full {
            t.push(x.clone());
            t.push(-x);
        }
        for hi in sub {
            for hj in sub {
                if hi == hj {
                    continue;
                }
                let d = hi - hj;
                for hl in &t {
                    for hm in &t {
                        if (hl - hm) == d && hl != hi && *hi != -hm {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    #[test]
    fn difference_condition_matches_oracle_on_catalog() {
        let seeds3 = [[1, 0, 0], [1, 1, 1], [1, 1, 0], [3, 1, 1], [1, 2, 3], [1, 0, 1], [2, 1, 1]];
        for name in crate::point_groups::catalog(3) {
            for g in crate::point_groups::representation_variants(name, 3) {
                for s in &seeds3 {
                    let o = orbit(&g, &v(s)).unwrap();
                    let table = DifferenceTable::new(&o.vectors);
                    for k in g.subgroups() {
                        let so = orbit(&k, &v(s)).unwrap().vectors;
                        assert_eq!(table.witness(&so).is_none(), difference_oracle(&so, &o.vectors));
                    }
                }
            }
        }
        let g = build_group_in_dim("D4".parse().unwrap(), 2).unwrap();
        let o = orbit(&g, &v(&[2, 1])).unwrap().vectors;
        for k in g.subgroups() {
            let so = orbit(&k, &v(&[2, 1])).unwrap().vectors;
            assert_eq!(unique_difference_condition(&so, &o), difference_oracle(&so, &o));
        }
    }

    #[test]
    fn decl_round_trip() {
        let rep = h_rep();
        let decl = IsotropyDecl::from_rep(&rep);
        let s = serde_json::to_string(&decl).unwrap();
        let back: IsotropyDecl = serde_json::from_str(&s).unwrap();
        let rep2 = back.to_rep(3, TOL).unwrap();
        assert_eq!(rep2.group.order(), 4);
        let act = induced_permutation(&rep2.group, &bcc()).unwrap();
        assert!(check_covariance(&weyl(), &rep2, &act, TOL));
    }

    proptest! {
        #[test]
        fn lift_is_homomorphism_up_to_sign(idx in 0usize..24, jdx in 0usize..24) {
            let s4 = build_group("S4".parse().unwrap()).unwrap();
            let rep = SpinRep::faithful_lift(&s4, 1e-9).unwrap();
            let p = rep.image(idx) * rep.image(jdx);
            prop_assert!(equal_up_to_sign(&p, rep.image(s4.mul_index(idx, jdx)), 1e-9).is_some());
        }
    }
}
