//! Linear systems (I − R − s(A + tB)) v = 0 over a tetrahedral or octahedral group,
//! their solution subspaces up to conjugation, and the rays left after iterating on
//! a second orbit element.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::recognition::{geometric_tag, PolyhedronTag};
use crate::matrix_kernel::{q, q_to_string, IntVector, RatMatrix, Q};
use crate::point_groups::{orbit, r_cyclic, PointGroup};

/// Row-reduced basis of a solution subspace.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Subspace(Vec<Vec<Q>>);

impl Subspace {
    pub fn from_vectors(vs: &[IntVector]) -> Option<Subspace> {
        if vs.is_empty() {
            return None;
        }
        let dim = vs[0].dim();
        let rows: Vec<Q> = vs.iter().flat_map(|v| v.coords().to_vec()).collect();
        let m = RatMatrix::new(vs.len(), dim, rows);
        let (r, pivots) = m.rref();
        let basis: Vec<Vec<Q>> = (0..pivots.len()).map(|i| r.row(i).to_vec()).collect();
        if basis.is_empty() {
            None
        } else {
            Some(Subspace(basis))
        }
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn basis(&self) -> Vec<IntVector> {
        self.0.iter().map(|r| IntVector::new(r.clone())).collect()
    }

    pub fn image(&self, m: &RatMatrix) -> Subspace {
        let vs: Vec<IntVector> = self.basis().iter().map(|b| m.mul_vec(b)).collect();
        Subspace::from_vectors(&vs).expect("invertible image of a nonzero subspace")
    }

    fn key(&self) -> Vec<Vec<String>> {
        self.0.iter().map(|r| r.iter().map(q_to_string).collect()).collect()
    }

    /// Smallest image under the group, as a canonical class representative.
    pub fn canonical(&self, group: &PointGroup) -> Subspace {
        group
            .matrices()
            .iter()
            .map(|f| self.image(f))
            .min_by_key(|s| s.key())
            .expect("groups are nonempty")
    }

    /// Intersection with another subspace of the same ambient space.
    pub fn intersect(&self, other: &Subspace) -> Option<Subspace> {
        let a = self.basis();
        let b = other.basis();
        let dim = a[0].dim();
        let cols: Vec<IntVector> = a.iter().cloned().chain(b.iter().map(|v| -v)).collect();
        let m = RatMatrix::from_columns(dim, &cols);
        let null = m.nullspace();
        let vs: Vec<IntVector> = null
            .iter()
            .map(|c| {
                a.iter()
                    .zip(c.coords())
                    .fold(IntVector::zero(dim), |acc, (v, x)| &acc + &v.scale(x))
            })
            .filter(|v| !v.is_zero())
            .collect();
        Subspace::from_vectors(&vs)
    }

    /// Parametric pattern such as (α, β, α/2 + β/2).
    pub fn pattern(&self) -> String {
        let names = ["α", "β", "γ"];
        let dim = self.0[0].len();
        let pivots: Vec<usize> = self
            .0
            .iter()
            .map(|r| r.iter().position(|x| !x.is_zero()).expect("rref rows are nonzero"))
            .collect();
        let mut coords = Vec::with_capacity(dim);
        for j in 0..dim {
            let mut terms = Vec::new();
            for (i, row) in self.0.iter().enumerate() {
                let c = &row[j];
                if c.is_zero() {
                    continue;
                }
                let name = names[i];
                let term = if *c == Q::one() {
                    name.to_string()
                } else if *c == -Q::one() {
                    format!("-{name}")
                } else if c.denom() == &num_bigint::BigInt::one() {
                    format!("{}{name}", c.numer())
                } else {
                    format!("{}{name}/{}", if c.numer() == &num_bigint::BigInt::one() { String::new() } else if c.numer() == &-num_bigint::BigInt::one() { "-".into() } else { c.numer().to_string() }, c.denom())
                };
                terms.push(term);
            }
            let _ = &pivots;
            coords.push(if terms.is_empty() { "0".to_string() } else { terms.join(" + ").replace("+ -", "- ") });
        }
        format!("({})", coords.join(", "))
    }

    /// Primitive normal of a plane, up to signed permutation: absolute values, descending.
    pub fn normal_pattern(&self) -> Option<[i64; 3]> {
        if self.dim() != 2 || self.0[0].len() != 3 {
            return None;
        }
        let m = RatMatrix::new(2, 3, self.0.iter().flatten().cloned().collect());
        let n = m.nullspace().remove(0).primitive();
        let mut a: Vec<i64> = n.to_i64()?.iter().map(|x| x.abs()).collect();
        a.sort_unstable_by(|x, y| y.cmp(x));
        Some([a[0], a[1], a[2]])
    }

    /// Integer point 2·b₁ + 5·b₂ (or b₁ for a ray), made primitive.
    pub fn representative(&self) -> IntVector {
        let b = self.basis();
        let v = if b.len() == 1 { b[0].clone() } else { &b[0].scale(&q(2)) + &b[1].scale(&q(5)) };
        v.primitive()
    }
}

/// One linear system and its solution subspace.
#[derive(Clone, Debug)]
pub struct SystemSolution {
    pub a: Option<usize>,
    pub b: Option<usize>,
    pub s: i8,
    pub t: i8,
    pub subspace: Subspace,
    /// The solutions actually violate the difference condition: neither sA nor stB fixes them.
    pub genuine: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FamilyKind {
    Ray,
    Plane,
}

/// A class of solutions under conjugation by the group.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolutionFamily {
    pub kind: FamilyKind,
    pub pattern: String,
    pub representative: IntVector,
    pub tag: PolyhedronTag,
    pub normal: Option<[i64; 3]>,
    pub genuine: bool,
    /// Found only by imposing a system on a second orbit element.
    pub from_iteration: bool,
}

fn fixes(m: &RatMatrix, sign: i8, space: &Subspace) -> bool {
    let s = q(sign as i64);
    space.basis().iter().all(|b| m.mul_vec(b).scale(&s) == *b)
}

/// All nontrivial proper solution subspaces, deduplicated.
pub fn all_systems(group: &PointGroup) -> Vec<SystemSolution> {
    let d = r_cyclic();
    let n = group.dim;
    let base = RatMatrix::identity(n).sub(&d);
    let mut l0: Vec<Option<usize>> = vec![None];
    l0.extend((0..group.order()).map(Some));
    let mat = |x: Option<usize>| x.map_or(RatMatrix::zeros(n, n), |i| group.matrix(i).clone());
    let mut out = Vec::new();
    let mut seen: BTreeSet<(Subspace, bool)> = BTreeSet::new();
    for &a in &l0 {
        for &b in &l0 {
            for s in [1i8, -1] {
                for t in [1i8, -1] {
                    let (ma, mb) = (mat(a), mat(b));
                    let comb = ma.add(&mb.scale(&q(t as i64))).scale(&q(s as i64));
                    let null = base.sub(&comb).nullspace();
                    if null.is_empty() || null.len() == n {
                        continue;
                    }
                    let space = Subspace::from_vectors(&null).expect("nonempty nullspace");
                    let genuine = !(a.is_some() && fixes(&ma, s, &space)) && !(b.is_some() && fixes(&mb, s * t, &space));
                    if seen.insert((space.clone(), genuine)) {
                        out.push(SystemSolution {
                            a,
                            b,
                            s,
                            t,
                            subspace: space,
                            genuine,
                        });
                    }
                }
            }
        }
    }
    out
}

fn ray_class_key(group: &PointGroup, v: &IntVector) -> Vec<IntVector> {
    let a = orbit(group, v).expect("nonzero ray").vectors;
    let b = orbit(group, &-v).expect("nonzero ray").vectors;
    a.min(b)
}

/// Solution families of the systems for D = R, up to conjugation, with the rays obtained by
/// requiring a second orbit element of each plane to solve some system too.
pub fn solve_systems(group: &PointGroup) -> Vec<SolutionFamily> {
    let systems = all_systems(group);
    let mut planes: BTreeMap<Subspace, bool> = BTreeMap::new();
    let mut rays: BTreeMap<Vec<IntVector>, (IntVector, bool, bool)> = BTreeMap::new();
    let add_ray = |v: IntVector, genuine: bool, iter: bool, rays: &mut BTreeMap<Vec<IntVector>, (IntVector, bool, bool)>| {
        let v = v.primitive();
        let key = ray_class_key(group, &v);
        let e = rays.entry(key).or_insert((v, genuine, iter));
        e.1 |= genuine;
        e.2 &= iter;
    };
    for sys in &systems {
        match sys.subspace.dim() {
            1 => add_ray(sys.subspace.basis()[0].clone(), sys.genuine, false, &mut rays),
            2 => {
                let c = sys.subspace.canonical(group);
                *planes.entry(c).or_insert(false) |= sys.genuine;
            }
            _ => {}
        }
    }
    let spaces: BTreeSet<Subspace> = systems.iter().map(|s| s.subspace.clone()).collect();
    let inverses: Vec<RatMatrix> = (0..group.order()).map(|i| group.matrix(group.inverse_index(i)).clone()).collect();
    for p in planes.keys() {
        for g_inv in &inverses {
            for nsp in &spaces {
                if let Some(x) = p.intersect(&nsp.image(g_inv)) {
                    if x.dim() == 1 {
                        add_ray(x.basis()[0].clone(), false, true, &mut rays);
                    }
                }
            }
        }
    }
    let mut out: Vec<SolutionFamily> = rays
        .into_values()
        .map(|(v, genuine, iter)| SolutionFamily {
            kind: FamilyKind::Ray,
            pattern: format!("α{v}"),
            tag: geometric_tag(&orbit(group, &v).expect("nonzero").vectors),
            representative: v,
            normal: None,
            genuine,
            from_iteration: iter,
        })
        .collect();
    out.extend(planes.into_iter().map(|(p, genuine)| SolutionFamily {
        kind: FamilyKind::Plane,
        pattern: p.pattern(),
        representative: p.representative(),
        tag: PolyhedronTag::ParametricFamily,
        normal: p.normal_pattern(),
        genuine,
        from_iteration: false,
    }));
    out.sort_by(|a, b| (a.kind, a.tag, &a.representative).cmp(&(b.kind, b.tag, &b.representative)));
    out
}

/// One line per family, in the golden-file format.
pub fn golden_lines(families: &[SolutionFamily]) -> Vec<String> {
    let mut lines: Vec<String> = families
        .iter()
        .map(|f| match f.kind {
            FamilyKind::Ray => format!("ray {}", if f.tag == PolyhedronTag::Other { format!("Other{}", abs_sorted(&f.representative)) } else { f.tag.to_string() }),
            FamilyKind::Plane => {
                let n = f.normal.expect("plane normal");
                format!("plane ParametricFamily normal=({},{},{})", n[0], n[1], n[2])
            }
        })
        .collect();
    lines.sort();
    lines.dedup();
    lines
}

fn abs_sorted(v: &IntVector) -> String {
    let mut a: Vec<i64> = v.to_i64().expect("integral").iter().map(|x| x.abs()).collect();
    a.sort_unstable_by(|x, y| y.cmp(x));
    format!("({})", a.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
}
