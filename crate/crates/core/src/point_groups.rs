//! Finite point groups acting on Z^d (d ≤ 3) by exact integer matrices, and their orbits.
//!
//! Groups with hexagonal symmetry are written in the lattice basis a₁ = (1,0),
//! a₂ = (−1/2, √3/2) of the plane; they preserve a rational metric rather than the
//! Euclidean one. [`orthogonalize_rep`] turns any such representation into an
//! orthogonal one.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::matrix_kernel::{qf, sqrt_positive, IntVector, RatMatrix, Q};
use crate::{Error, Result};

const MAX_GROUP_ORDER: usize = 96;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BaseGroup {
    Trivial,
    Z(u8),
    D(u8),
    A4,
    S4,
}

/// Abstract group label; `times_z2` adjoins the central inversion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupName {
    pub base: BaseGroup,
    pub times_z2: bool,
}

impl GroupName {
    pub const fn new(base: BaseGroup) -> Self {
        GroupName {
            base,
            times_z2: false,
        }
    }

    pub const fn times_z2(base: BaseGroup) -> Self {
        GroupName {
            base,
            times_z2: true,
        }
    }

    pub fn order(&self) -> usize {
        let base = match self.base {
            BaseGroup::Trivial => 1,
            BaseGroup::Z(n) => n as usize,
            BaseGroup::D(n) => 2 * n as usize,
            BaseGroup::A4 => 12,
            BaseGroup::S4 => 24,
        };
        if self.times_z2 {
            2 * base
        } else {
            base
        }
    }
}

impl fmt::Display for GroupName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.base {
            BaseGroup::Trivial => write!(f, "Trivial")?,
            BaseGroup::Z(n) => write!(f, "Z{n}")?,
            BaseGroup::D(n) => write!(f, "D{n}")?,
            BaseGroup::A4 => write!(f, "A4")?,
            BaseGroup::S4 => write!(f, "S4")?,
        }
        if self.times_z2 {
            write!(f, "xZ2")?;
        }
        Ok(())
    }
}

impl FromStr for GroupName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let (head, times_z2) = match t
            .strip_suffix("xZ2")
            .or_else(|| t.strip_suffix("×Z2"))
            .or_else(|| t.strip_suffix("*Z2"))
        {
            Some(h) => (h, true),
            None => (t, false),
        };
        let unknown = || Error::UnknownGroup(s.to_string());
        let base = match head {
            "Trivial" | "trivial" | "I" | "1" => BaseGroup::Trivial,
            "A4" => BaseGroup::A4,
            "S4" => BaseGroup::S4,
            _ => {
                let (kind, n) = head.split_at(1);
                let n: u8 = n.parse().map_err(|_| unknown())?;
                match (kind, n) {
                    ("Z", 1) => BaseGroup::Trivial,
                    ("Z", 2 | 3 | 4 | 6) => BaseGroup::Z(n),
                    ("D", 1 | 2 | 3 | 4 | 6) => BaseGroup::D(n),
                    _ => return Err(unknown()),
                }
            }
        };
        Ok(GroupName { base, times_z2 })
    }
}

impl Serialize for GroupName {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for GroupName {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Isomorphism type of a small group, as far as coin representations care.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AbstractType {
    Trivial,
    Z2,
    Z3,
    Z4,
    Z2xZ2,
    Other { order: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupElement {
    pub matrix: RatMatrix,
    pub order: u32,
}

#[derive(Clone, Debug)]
pub struct PointGroup {
    pub name: GroupName,
    /// Which integer representation of `name` this is.
    pub variant: String,
    pub dim: usize,
    pub generators: Vec<RatMatrix>,
    pub elements: Vec<GroupElement>,
    /// Gram matrix G with MᵀGM = G for every element.
    pub metric: RatMatrix,
    table: Vec<Vec<usize>>,
    index: HashMap<RatMatrix, usize>,
}

impl PartialEq for PointGroup {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.variant == other.variant
            && self.dim == other.dim
            && self.generators == other.generators
            && self.metric == other.metric
    }
}

#[derive(Serialize, Deserialize)]
struct PointGroupRepr {
    name: GroupName,
    variant: String,
    dim: usize,
    generators: Vec<RatMatrix>,
    metric: RatMatrix,
    #[serde(default)]
    elements: Vec<GroupElement>,
}

impl Serialize for PointGroup {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PointGroupRepr {
            name: self.name,
            variant: self.variant.clone(),
            dim: self.dim,
            generators: self.generators.clone(),
            metric: self.metric.clone(),
            elements: self.elements.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PointGroup {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = PointGroupRepr::deserialize(d)?;
        PointGroup::from_generators(r.name, &r.variant, r.dim, r.generators, r.metric)
            .map_err(serde::de::Error::custom)
    }
}

impl PointGroup {
    /// Closure of `generators`; every generator must preserve `metric`.
    pub fn from_generators(
        name: GroupName,
        variant: &str,
        dim: usize,
        generators: Vec<RatMatrix>,
        metric: RatMatrix,
    ) -> Result<Self> {
        for g in &generators {
            if g.rows() != dim || g.cols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: g.rows(),
                });
            }
            if g.det() == Q::from_integer(0.into()) || !g.preserves_metric(&metric) {
                return Err(Error::NotAGroup);
            }
        }
        let id = RatMatrix::identity(dim);
        let mut mats = vec![id.clone()];
        let mut index: HashMap<RatMatrix, usize> = HashMap::from([(id, 0)]);
        let mut frontier = 0;
        while frontier < mats.len() {
            let cur = mats[frontier].clone();
            for g in &generators {
                let next = cur.mul(g);
                if !index.contains_key(&next) {
                    if mats.len() >= MAX_GROUP_ORDER {
                        return Err(Error::NotAGroup);
                    }
                    index.insert(next.clone(), mats.len());
                    mats.push(next);
                }
            }
            frontier += 1;
        }
        let n = mats.len();
        let mut table = vec![vec![0; n]; n];
        for i in 0..n {
            for j in 0..n {
                table[i][j] = *index.get(&mats[i].mul(&mats[j])).ok_or(Error::NotAGroup)?;
            }
        }
        let elements = (0..n)
            .map(|i| {
                let mut k = 1;
                let mut p = i;
                while p != 0 {
                    p = table[p][i];
                    k += 1;
                }
                GroupElement {
                    matrix: mats[i].clone(),
                    order: k,
                }
            })
            .collect();
        Ok(PointGroup {
            name,
            variant: variant.to_string(),
            dim,
            generators,
            elements,
            metric,
            table,
            index,
        })
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn matrix(&self, i: usize) -> &RatMatrix {
        &self.elements[i].matrix
    }

    pub fn matrices(&self) -> Vec<RatMatrix> {
        self.elements.iter().map(|e| e.matrix.clone()).collect()
    }

    pub fn index_of(&self, m: &RatMatrix) -> Option<usize> {
        self.index.get(m).copied()
    }

    pub fn contains(&self, m: &RatMatrix) -> bool {
        self.index.contains_key(m)
    }

    /// Index of the product of elements `i` and `j`.
    pub fn mul_index(&self, i: usize, j: usize) -> usize {
        self.table[i][j]
    }

    pub fn inverse_index(&self, i: usize) -> usize {
        (0..self.order())
            .find(|&j| self.table[i][j] == 0)
            .expect("finite group element has an inverse")
    }

    pub fn is_orthogonal(&self) -> bool {
        self.metric.is_identity()
    }

    pub fn contains_inversion(&self) -> bool {
        self.contains(&RatMatrix::identity(self.dim).neg())
    }

    /// Element indices of the subgroup generated by the given element indices.
    pub fn closure_indices(&self, gens: &[usize]) -> Vec<usize> {
        let mut seen = vec![false; self.order()];
        let mut out = vec![0];
        seen[0] = true;
        let mut k = 0;
        while k < out.len() {
            let cur = out[k];
            for &g in gens {
                let nx = self.table[cur][g];
                if !seen[nx] {
                    seen[nx] = true;
                    out.push(nx);
                }
            }
            k += 1;
        }
        out.sort_unstable();
        out
    }

    fn subgroup_from_indices(&self, gens: &[usize], label: &str) -> PointGroup {
        let g: Vec<RatMatrix> = gens.iter().map(|&i| self.matrix(i).clone()).collect();
        let members = self.closure_indices(gens);
        let order = members.len();
        let cyclic = members.iter().any(|&i| self.elements[i].order as usize == order);
        let name = name_for_order(order, cyclic);
        PointGroup::from_generators(name, label, self.dim, g, self.metric.clone())
            .expect("subgroup of a valid group is valid")
    }

    /// Every subgroup, each once, generated by at most two elements.
    /// Sufficient for all groups in the catalogue.
    pub fn subgroups(&self) -> Vec<PointGroup> {
        let n = self.order();
        let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
        let mut out = Vec::new();
        let mut push = |gens: Vec<usize>, this: &PointGroup| {
            let set = this.closure_indices(&gens);
            if seen.insert(set) {
                let label = format!("<{}>", gens.iter().map(|g| this.matrix(*g).to_string()).collect::<Vec<_>>().join(","));
                out.push(this.subgroup_from_indices(&gens, &label));
            }
        };
        push(vec![], self);
        for i in 1..n {
            push(vec![i], self);
        }
        for i in 1..n {
            for j in i + 1..n {
                push(vec![i, j], self);
            }
        }
        out
    }

    pub fn abstract_type(&self) -> AbstractType {
        match self.order() {
            1 => AbstractType::Trivial,
            2 => AbstractType::Z2,
            3 => AbstractType::Z3,
            4 if self.elements.iter().any(|e| e.order == 4) => AbstractType::Z4,
            4 => AbstractType::Z2xZ2,
            order => AbstractType::Other { order },
        }
    }

    /// Squared length of `v` in the group's metric.
    pub fn norm2(&self, v: &IntVector) -> Q {
        v.dot(&self.metric.mul_vec(v))
    }

    /// Orthogonal float matrices conjugate to the elements, in element order.
    pub fn orthogonal_matrices(&self) -> Vec<DMatrix<f64>> {
        if self.is_orthogonal() {
            return self.elements.iter().map(|e| e.matrix.to_f64()).collect();
        }
        orthogonalize_rep(&self.matrices()).expect("a point group is closed")
    }

    pub fn label(&self) -> String {
        if self.variant.is_empty() {
            self.name.to_string()
        } else {
            format!("{} {}", self.name, self.variant)
        }
    }
}

fn name_for_order(order: usize, cyclic: bool) -> GroupName {
    let base = match (order, cyclic) {
        (1, _) => BaseGroup::Trivial,
        (n, true) if [2, 3, 4, 6].contains(&n) => BaseGroup::Z(n as u8),
        (4, false) => BaseGroup::D(2),
        (6, false) => BaseGroup::D(3),
        (8, false) => BaseGroup::D(4),
        (12, false) => BaseGroup::A4,
        (24, false) => BaseGroup::S4,
        _ => BaseGroup::D((order / 2) as u8),
    };
    GroupName::new(base)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Plane {
    Square,
    Hex,
}

fn plane_metric(p: Plane) -> RatMatrix {
    match p {
        Plane::Square => RatMatrix::identity(2),
        Plane::Hex => RatMatrix::new(
            2,
            2,
            vec![qf(1, 1), qf(-1, 2), qf(-1, 2), qf(1, 1)],
        ),
    }
}

/// Rotation by `k` elementary steps (90° square, 60° hexagonal).
fn rot2(p: Plane, k: u32) -> RatMatrix {
    let base = match p {
        Plane::Square => RatMatrix::from_i64(&[[0, -1], [1, 0]]),
        Plane::Hex => RatMatrix::from_i64(&[[1, -1], [1, 0]]),
    };
    (0..k).fold(RatMatrix::identity(2), |acc, _| acc.mul(&base))
}

/// The two conjugacy classes of lattice reflections.
fn refl2(p: Plane, class: u8) -> RatMatrix {
    match (p, class) {
        (Plane::Square, 0) => RatMatrix::from_i64(&[[1, 0], [0, -1]]),
        (Plane::Square, _) => RatMatrix::from_i64(&[[0, 1], [1, 0]]),
        (Plane::Hex, 0) => RatMatrix::from_i64(&[[1, -1], [0, -1]]),
        (Plane::Hex, _) => RatMatrix::from_i64(&[[1, 0], [1, -1]]),
    }
}

fn block3(m2: &RatMatrix, z: i64) -> RatMatrix {
    let mut m = RatMatrix::zeros(3, 3);
    for i in 0..2 {
        for j in 0..2 {
            m.set(i, j, m2.get(i, j).clone());
        }
    }
    m.set(2, 2, Q::from_integer(z.into()));
    m
}

fn metric3(p: Plane) -> RatMatrix {
    block3(&plane_metric(p), 1)
}

fn sign(s: i64) -> &'static str {
    if s > 0 {
        "+"
    } else {
        "-"
    }
}

fn diag(d: &[i64]) -> RatMatrix {
    let mut m = RatMatrix::zeros(d.len(), d.len());
    for (i, &x) in d.iter().enumerate() {
        m.set(i, i, Q::from_integer(x.into()));
    }
    m
}

pub fn x1() -> RatMatrix {
    diag(&[1, -1, -1])
}

/// Cyclic permutation (x, y, z) ↦ (z, x, y).
pub fn r_cyclic() -> RatMatrix {
    RatMatrix::from_i64(&[[0, 0, 1], [1, 0, 0], [0, 1, 0]])
}

/// Exchange of the first and third coordinate.
pub fn c_swap() -> RatMatrix {
    RatMatrix::from_i64(&[[0, 0, 1], [0, 1, 0], [1, 0, 0]])
}

/// Rotation part of an axial group: (plane, elementary steps, z sign, label).
fn axial_rotations(n: u8) -> Vec<(Plane, u32, i64, String)> {
    match n {
        3 => vec![(Plane::Hex, 2, 1, "R(2pi/3,+)".into())],
        4 => vec![
            (Plane::Square, 1, 1, "R(pi/2,+)".into()),
            (Plane::Square, 1, -1, "R(pi/2,-)".into()),
        ],
        6 => vec![
            (Plane::Hex, 1, 1, "R(pi/3,+)".into()),
            (Plane::Hex, 1, -1, "R(pi/3,-)".into()),
            (Plane::Hex, 2, -1, "R(2pi/3,-)".into()),
        ],
        _ => vec![],
    }
}

fn z2_variants3() -> Vec<(RatMatrix, String)> {
    vec![
        (diag(&[-1, -1, 1]), "R(pi,+)".into()),
        (diag(&[1, 1, -1]), "R(0,-)".into()),
        (diag(&[-1, -1, -1]), "R(pi,-)".into()),
    ]
}

/// Order-4 subgroups of the diagonal sign group, each given by two generators.
fn diagonal_klein_groups() -> Vec<(Vec<RatMatrix>, String)> {
    let signs: Vec<[i64; 3]> = (1..8)
        .map(|b| [0, 1, 2].map(|i| if b >> i & 1 == 1 { -1 } else { 1 }))
        .collect();
    let mut seen: BTreeSet<BTreeSet<[i64; 3]>> = BTreeSet::new();
    let mut out = Vec::new();
    for (i, a) in signs.iter().enumerate() {
        for b in &signs[i + 1..] {
            let c = [a[0] * b[0], a[1] * b[1], a[2] * b[2]];
            let set: BTreeSet<[i64; 3]> = [*a, *b, c].into_iter().collect();
            if seen.insert(set.clone()) {
                let label = set
                    .iter()
                    .map(|s| format!("diag({},{},{})", s[0], s[1], s[2]))
                    .collect::<Vec<_>>()
                    .join(" ");
                let mut it = set.iter();
                out.push((vec![diag(it.next().unwrap()), diag(it.next().unwrap())], label));
            }
        }
    }
    out
}

fn make(name: GroupName, variant: &str, dim: usize, gens: Vec<RatMatrix>, metric: RatMatrix) -> PointGroup {
    PointGroup::from_generators(name, variant, dim, gens, metric).expect("catalogue group is valid")
}

fn base_variants3(base: BaseGroup) -> Vec<PointGroup> {
    let name = GroupName::new(base);
    let id3 = RatMatrix::identity(3);
    match base {
        BaseGroup::Trivial => vec![make(name, "", 3, vec![], id3)],
        BaseGroup::Z(2) | BaseGroup::D(1) => z2_variants3()
            .into_iter()
            .map(|(m, l)| make(GroupName::new(BaseGroup::Z(2)), &l, 3, vec![m], id3.clone()))
            .collect(),
        BaseGroup::Z(n) => axial_rotations(n)
            .into_iter()
            .map(|(p, k, s, l)| make(name, &l, 3, vec![block3(&rot2(p, k), s)], metric3(p)))
            .collect(),
        BaseGroup::D(2) => diagonal_klein_groups()
            .into_iter()
            .map(|(g, l)| make(name, &l, 3, g, id3.clone()))
            .collect(),
        BaseGroup::D(n) => {
            let mut out = Vec::new();
            for (p, k, s, l) in axial_rotations(n) {
                for class in 0..2u8 {
                    for r in [1, -1] {
                        let label = format!("{l} S({},{})", if class == 0 { "0" } else { "1" }, sign(r));
                        out.push(make(
                            name,
                            &label,
                            3,
                            vec![block3(&rot2(p, k), s), block3(&refl2(p, class), r)],
                            metric3(p),
                        ));
                    }
                }
            }
            out
        }
        BaseGroup::A4 => vec![make(name, "", 3, vec![x1(), r_cyclic()], id3)],
        BaseGroup::S4 => vec![make(name, "", 3, vec![x1(), r_cyclic(), c_swap().neg()], id3)],
    }
}

fn base_variants2(base: BaseGroup) -> Vec<PointGroup> {
    let name = GroupName::new(base);
    let sq = plane_metric(Plane::Square);
    let hx = plane_metric(Plane::Hex);
    match base {
        BaseGroup::Trivial => vec![make(name, "", 2, vec![], sq)],
        BaseGroup::Z(2) => vec![make(name, "", 2, vec![rot2(Plane::Square, 2)], sq)],
        BaseGroup::Z(3) => vec![make(name, "", 2, vec![rot2(Plane::Hex, 2)], hx)],
        BaseGroup::Z(4) => vec![make(name, "", 2, vec![rot2(Plane::Square, 1)], sq)],
        BaseGroup::Z(6) => vec![make(name, "", 2, vec![rot2(Plane::Hex, 1)], hx)],
        BaseGroup::D(1) => (0..2)
            .map(|c| make(name, &format!("S({c})"), 2, vec![refl2(Plane::Square, c)], sq.clone()))
            .collect(),
        BaseGroup::D(2) => (0..2)
            .map(|c| {
                make(
                    name,
                    &format!("S({c})"),
                    2,
                    vec![rot2(Plane::Square, 2), refl2(Plane::Square, c)],
                    sq.clone(),
                )
            })
            .collect(),
        BaseGroup::D(3) => (0..2)
            .map(|c| {
                make(
                    name,
                    &format!("S({c})"),
                    2,
                    vec![rot2(Plane::Hex, 2), refl2(Plane::Hex, c)],
                    hx.clone(),
                )
            })
            .collect(),
        BaseGroup::D(4) => vec![make(name, "", 2, vec![rot2(Plane::Square, 1), refl2(Plane::Square, 0)], sq)],
        BaseGroup::D(6) => vec![make(name, "", 2, vec![rot2(Plane::Hex, 1), refl2(Plane::Hex, 0)], hx)],
        _ => vec![],
    }
}

fn base_variants1(base: BaseGroup) -> Vec<PointGroup> {
    let id = RatMatrix::identity(1);
    match base {
        BaseGroup::Trivial => vec![make(GroupName::new(base), "", 1, vec![], id)],
        BaseGroup::Z(2) => vec![make(GroupName::new(base), "", 1, vec![id.neg()], id)],
        _ => vec![],
    }
}

/// Every integer representation of `name` in dimension `dim` that the catalogue carries.
pub fn representation_variants(name: GroupName, dim: usize) -> Vec<PointGroup> {
    let base = match dim {
        1 => base_variants1(name.base),
        2 => base_variants2(name.base),
        3 => base_variants3(name.base),
        _ => vec![],
    };
    if !name.times_z2 {
        return base;
    }
    let minus = RatMatrix::identity(dim).neg();
    let mut seen: BTreeSet<Vec<RatMatrix>> = BTreeSet::new();
    let mut out = Vec::new();
    for g in base {
        if g.contains_inversion() {
            continue;
        }
        let mut gens = g.generators.clone();
        gens.push(minus.clone());
        let grp = make(name, &g.variant, dim, gens, g.metric.clone());
        let mut key = grp.matrices();
        key.sort();
        if seen.insert(key) {
            out.push(grp);
        }
    }
    out
}

/// The abstract groups catalogued for dimension `dim`.
pub fn catalog(dim: usize) -> Vec<GroupName> {
    use BaseGroup::*;
    let n = GroupName::new;
    match dim {
        1 => vec![n(Trivial), n(Z(2))],
        2 => vec![
            n(Trivial),
            n(Z(2)),
            n(Z(3)),
            n(Z(4)),
            n(Z(6)),
            n(D(1)),
            n(D(2)),
            n(D(3)),
            n(D(4)),
            n(D(6)),
        ],
        3 => {
            let bases = [Trivial, Z(2), Z(3), Z(4), Z(6), D(2), D(3), D(4), D(6), A4, S4];
            let mut v: Vec<GroupName> = bases.iter().map(|&b| n(b)).collect();
            v.extend(bases.iter().map(|&b| GroupName::times_z2(b)));
            v
        }
        _ => vec![],
    }
}

/// The canonical three-dimensional representation of `name`.
pub fn build_group(name: GroupName) -> Result<PointGroup> {
    build_group_in_dim(name, 3)
}

pub fn build_group_in_dim(name: GroupName, dim: usize) -> Result<PointGroup> {
    let canonical = match (dim, name.base) {
        (3, BaseGroup::D(2)) if !name.times_z2 => {
            // rotations by π about the three axes
            return Ok(make(name, "", 3, vec![x1(), diag(&[-1, -1, 1])], RatMatrix::identity(3)));
        }
        (3, BaseGroup::D(n)) if n != 1 && !name.times_z2 => {
            let (p, k, s, l) = axial_rotations(n).into_iter().next().ok_or_else(|| Error::UnknownGroup(name.to_string()))?;
            return Ok(make(
                name,
                &format!("{l} S(0,-)"),
                3,
                vec![block3(&rot2(p, k), s), block3(&refl2(p, 0), -1)],
                metric3(p),
            ));
        }
        _ => representation_variants(name, dim),
    };
    canonical
        .into_iter()
        .next()
        .ok_or_else(|| Error::UnknownGroup(format!("{name} in dimension {dim}")))
}

pub fn parse_group(s: &str) -> Result<PointGroup> {
    build_group(s.parse()?)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Orbit {
    pub seed: IntVector,
    /// Sorted lexicographically.
    pub vectors: Vec<IntVector>,
    pub stabilizer_size: usize,
}

impl Orbit {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn contains(&self, v: &IntVector) -> bool {
        self.vectors.binary_search(v).is_ok()
    }
}

pub fn orbit(group: &PointGroup, seed: &IntVector) -> Result<Orbit> {
    if seed.dim() != group.dim {
        return Err(Error::DimensionMismatch {
            expected: group.dim,
            got: seed.dim(),
        });
    }
    if seed.is_zero() {
        return Err(Error::ZeroSeed);
    }
    let set: BTreeSet<IntVector> = group
        .elements
        .iter()
        .map(|e| e.matrix.mul_vec(seed))
        .collect();
    let vectors: Vec<IntVector> = set.into_iter().collect();
    let stabilizer_size = group.order() / vectors.len();
    Ok(Orbit {
        seed: seed.clone(),
        vectors,
        stabilizer_size,
    })
}

/// Orbit of `seed` under the elements with the given indices, in first-visit order.
pub fn orbit_under(group: &PointGroup, elements: &[usize], seed: &IntVector) -> Vec<IntVector> {
    let mut out: Vec<IntVector> = Vec::new();
    for &i in elements {
        let v = group.matrix(i).mul_vec(seed);
        if !out.contains(&v) {
            out.push(v);
        }
    }
    out
}

/// Conjugate a finite matrix group into an orthogonal one: M̃ = P^{1/2} M P^{−1/2},
/// P = Σ MᵀM.
pub fn orthogonalize_rep(matrices: &[RatMatrix]) -> Result<Vec<DMatrix<f64>>> {
    let Some(first) = matrices.first() else {
        return Ok(vec![]);
    };
    let dim = first.rows();
    let set: BTreeSet<&RatMatrix> = matrices.iter().collect();
    for a in matrices {
        for b in matrices {
            if !set.contains(&a.mul(b)) {
                return Err(Error::NotAGroup);
            }
        }
    }
    let p = matrices
        .iter()
        .fold(RatMatrix::zeros(dim, dim), |acc, m| acc.add(&m.transpose().mul(m)));
    let half = sqrt_positive(&p)?;
    let half_inv = half.clone().try_inverse().ok_or(Error::NotPositiveDefinite)?;
    Ok(matrices
        .iter()
        .map(|m| &half * m.to_f64() * &half_inv)
        .collect())
}

pub fn ternary_subgroups(group: &PointGroup) -> Vec<PointGroup> {
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut out = Vec::new();
    for (i, e) in group.elements.iter().enumerate() {
        if e.order != 3 {
            continue;
        }
        let set = group.closure_indices(&[i]);
        if seen.insert(set) {
            out.push(group.subgroup_from_indices(&[i], &format!("<{}>", e.matrix)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use num_traits::Signed;

    fn g(s: &str) -> PointGroup {
        parse_group(s).unwrap()
    }

    #[test]
    fn group_orders() {
        for name in catalog(3) {
            for v in representation_variants(name, 3) {
                assert_eq!(v.order(), name.order(), "{}", v.label());
            }
        }
        for d in [1, 2] {
            for name in catalog(d) {
                let vs = representation_variants(name, d);
                assert!(!vs.is_empty(), "{name} d={d}");
                for v in vs {
                    assert_eq!(v.order(), name.order(), "{} d={d}", v.label());
                }
            }
        }
    }

    #[test]
    fn a4_structure() {
        let a4 = g("A4");
        assert_eq!(a4.order(), 12);
        assert!(a4.is_orthogonal());
        let t = ternary_subgroups(&a4);
        assert_eq!(t.len(), 4);
        let r = r_cyclic();
        let expected: Vec<RatMatrix> = (1..=3)
            .map(|i| {
                let xi = (0..i - 1).fold(x1(), |acc, _| r.mul(&acc).mul(&r.inverse().unwrap()));
                xi.mul(&r)
            })
            .chain([r.clone()])
            .collect();
        for e in expected {
            assert!(t.iter().any(|k| k.contains(&e)), "{e}");
        }
    }

    #[test]
    fn s4_is_signed_permutations() {
        let s4 = g("S4");
        assert_eq!(s4.order(), 24);
        for e in &s4.elements {
            let m = &e.matrix;
            assert!(m.is_orthogonal());
            for i in 0..3 {
                let nz = m.row(i).iter().filter(|x| **x != Q::from_integer(0.into())).count();
                assert_eq!(nz, 1);
            }
        }
        assert_eq!(ternary_subgroups(&s4).len(), 4);
        assert!(ternary_subgroups(&g("Z4")).is_empty());
        assert_eq!(g("Trivial").order(), 1);
    }

    #[test]
    fn orbit_examples() {
        let o = orbit(&g("A4"), &IntVector::from_ints(&[1, 0, 0])).unwrap();
        assert_eq!(o.len(), 6);
        assert_eq!(o.stabilizer_size, 2);
        let o = orbit(&g("S4"), &IntVector::from_ints(&[1, -1, -1])).unwrap();
        assert_eq!(o.len(), 8);
        for v in &o.vectors {
            assert!(v.coords().iter().all(|c| c.abs() == Q::from_integer(1.into())));
        }
        let o = orbit(&g("A4"), &IntVector::from_ints(&[3, 1, 1])).unwrap();
        assert_eq!(o.len(), 12);
        for v in &o.vectors {
            let neg = v.coords().iter().filter(|c| **c < Q::from_integer(0.into())).count();
            assert_eq!(neg % 2, 0);
        }
        assert_eq!(orbit(&g("A4"), &IntVector::from_ints(&[0, 0, 0])), Err(Error::ZeroSeed));
    }

    #[test]
    fn orthogonalize_examples() {
        let a4 = g("A4");
        let m = orthogonalize_rep(&a4.matrices()).unwrap();
        for (a, b) in m.iter().zip(a4.matrices()) {
            assert!((a - b.to_f64()).norm() < 1e-12);
        }
        let z3 = vec![
            RatMatrix::identity(2),
            RatMatrix::from_i64(&[[0, -1], [1, -1]]),
            RatMatrix::from_i64(&[[-1, 1], [-1, 0]]),
        ];
        let o = orthogonalize_rep(&z3).unwrap();
        for (k, m) in o.iter().enumerate() {
            assert!((m.transpose() * m - DMatrix::<f64>::identity(2, 2)).norm() < 1e-12);
            let angle = (m[(1, 0)]).atan2(m[(0, 0)]).rem_euclid(std::f64::consts::TAU);
            let expect = [0.0f64, 120.0, 240.0][k].to_radians();
            assert!((angle - expect).abs() < 1e-9, "{k}: {angle}");
        }
        assert_eq!(orthogonalize_rep(&[RatMatrix::identity(3)]).unwrap().len(), 1);
        assert_eq!(
            orthogonalize_rep(&[RatMatrix::identity(2), RatMatrix::from_i64(&[[0, -1], [1, 0]])]),
            Err(Error::NotAGroup)
        );
    }

    #[test]
    fn hexagonal_groups_preserve_metric() {
        let d6 = representation_variants(GroupName::new(BaseGroup::D(6)), 3);
        assert_eq!(d6.len(), 12);
        for grp in d6 {
            for e in &grp.elements {
                assert!(e.matrix.preserves_metric(&grp.metric));
            }
            for m in grp.orthogonal_matrices() {
                assert!((m.transpose() * &m - DMatrix::<f64>::identity(3, 3)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn names_round_trip() {
        for d in 1..=3 {
            for name in catalog(d) {
                assert_eq!(name.to_string().parse::<GroupName>().unwrap(), name);
            }
        }
        assert!("Z5".parse::<GroupName>().is_err());
        assert_eq!("D1".parse::<GroupName>().unwrap().base, BaseGroup::D(1));
        let grp = build_group("D1".parse().unwrap()).unwrap();
        assert_eq!(grp.name.base, BaseGroup::Z(2));
    }

    #[test]
    fn serde_round_trip() {
        let grp = g("D3");
        let s = serde_json::to_string(&grp).unwrap();
        assert!(s.contains("\"-1/2\""));
        let back: PointGroup = serde_json::from_str(&s).unwrap();
        assert_eq!(back, grp);
        assert_eq!(back.order(), 6);
        let o = orbit(&grp, &IntVector::from_ints(&[1, 0, 1])).unwrap();
        let s = serde_json::to_string(&o).unwrap();
        let back: Orbit = serde_json::from_str(&s).unwrap();
        assert_eq!(back, o);
    }

    #[test]
    fn subgroup_counts() {
        assert_eq!(g("S4").subgroups().len(), 30);
        assert_eq!(g("A4").subgroups().len(), 10);
        assert_eq!(g("D4").subgroups().len(), 10);
    }

    fn all_groups() -> Vec<PointGroup> {
        (1..=3)
            .flat_map(|d| catalog(d).into_iter().flat_map(move |n| representation_variants(n, d)))
            .collect()
    }

    proptest! {
        #[test]
        fn orbits_are_invariant(gi in 0usize..1000, seed in proptest::collection::vec(-3i64..4, 3)) {
            let groups = all_groups();
            let grp = &groups[gi % groups.len()];
            let v = IntVector::from_ints(&seed[..grp.dim]);
            prop_assume!(!v.is_zero());
            let o = orbit(grp, &v).unwrap();
            prop_assert_eq!(o.len() * o.stabilizer_size, grp.order());
            let n = grp.norm2(&v);
            for w in &o.vectors {
                prop_assert_eq!(grp.norm2(w), n.clone());
            }
            for e in &grp.elements {
                let image: BTreeSet<IntVector> = o.vectors.iter().map(|w| e.matrix.mul_vec(w)).collect();
                prop_assert_eq!(image.into_iter().collect::<Vec<_>>(), o.vectors.clone());
            }
        }

        #[test]
        fn closure_and_orders(gi in 0usize..1000) {
            let groups = all_groups();
            let grp = &groups[gi % groups.len()];
            for a in &grp.elements {
                let id = RatMatrix::identity(grp.dim);
                let mut p = a.matrix.clone();
                for _ in 1..a.order {
                    prop_assert!(p != id);
                    p = p.mul(&a.matrix);
                }
                prop_assert_eq!(p, id);
                for b in &grp.elements {
                    prop_assert!(grp.contains(&a.matrix.mul(&b.matrix)));
                }
            }
        }
    }
}
