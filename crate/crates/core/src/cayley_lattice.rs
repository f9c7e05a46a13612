//! Generating sets of Z^d, relators, lattice spanning, and the Brillouin zone.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::matrix_kernel::{IntVector, RatMatrix};
use crate::{Error, Result};

/// S₊ together with its inverses and an optional self-loop e.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratingSet {
    pub dim: usize,
    pub s_plus: Vec<IntVector>,
    /// S₊ = S₋.
    pub include_inverses: bool,
    pub self_loop: bool,
    /// Integer combinations of S₊ that vanish.
    pub relators: Vec<Vec<i64>>,
}

impl GeneratingSet {
    pub fn new(dim: usize, s_plus: Vec<IntVector>, self_loop: bool) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::Invalid(format!("dimension {dim} not in 1..=3")));
        }
        let mut seen = BTreeSet::new();
        for h in &s_plus {
            if h.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: h.dim(),
                });
            }
            if h.is_zero() {
                return Err(Error::Invalid("zero vector in S+".into()));
            }
            if !h.is_integral() {
                return Err(Error::Invalid(format!("{h} is not a lattice vector")));
            }
            if !seen.insert(h.clone()) {
                return Err(Error::Invalid(format!("{h} repeated in S+")));
            }
        }
        if s_plus.is_empty() {
            return Err(Error::Invalid("empty S+".into()));
        }
        let include_inverses = s_plus.iter().all(|h| seen.contains(&-h));
        let relators = integer_relators(dim, &s_plus);
        Ok(GeneratingSet {
            dim,
            s_plus,
            include_inverses,
            self_loop,
            relators,
        })
    }

    pub fn from_ints(dim: usize, s_plus: &[&[i64]], self_loop: bool) -> Result<Self> {
        GeneratingSet::new(dim, s_plus.iter().map(|h| IntVector::from_ints(h)).collect(), self_loop)
    }

    pub fn s_minus(&self) -> Vec<IntVector> {
        self.s_plus.iter().map(|h| -h).collect()
    }

    /// S₊, then the inverses not already in S₊, then e when present.
    pub fn full(&self) -> Vec<IntVector> {
        let mut out = self.s_plus.clone();
        for h in self.s_minus() {
            if !out.contains(&h) {
                out.push(h);
            }
        }
        if self.self_loop {
            out.push(IntVector::zero(self.dim));
        }
        out
    }

    /// Largest absolute coordinate over S₊.
    pub fn max_coord(&self) -> i64 {
        self.s_plus
            .iter()
            .map(|h| h.max_abs().to_integer().to_i64().unwrap_or(i64::MAX))
            .max()
            .unwrap_or(0)
    }

    pub fn rank(&self) -> usize {
        RatMatrix::from_columns(self.dim, &self.s_plus).rank()
    }

    pub fn evaluate_relator(&self, rel: &[i64]) -> IntVector {
        self.s_plus
            .iter()
            .zip(rel)
            .fold(IntVector::zero(self.dim), |acc, (h, &c)| {
                &acc + &h.scale(&crate::matrix_kernel::q(c))
            })
    }

    pub fn ints(&self) -> Vec<Vec<i64>> {
        self.s_plus
            .iter()
            .map(|h| h.to_i64().expect("generating set vectors are integral"))
            .collect()
    }
}

fn integer_relators(dim: usize, s_plus: &[IntVector]) -> Vec<Vec<i64>> {
    RatMatrix::from_columns(dim, s_plus)
        .nullspace()
        .into_iter()
        .map(|v| {
            let p = v.primitive();
            let p = match p.coords().iter().find(|c| !c.is_zero()) {
                Some(c) if c.is_negative() => -&p,
                _ => p,
            };
            p.to_i64().expect("small relator coefficients")
        })
        .collect()
}

#[derive(Serialize, Deserialize)]
struct GeneratingSetRepr {
    dim: usize,
    s_plus: Vec<Vec<i64>>,
    #[serde(default)]
    include_inverses: bool,
    #[serde(default)]
    self_loop: bool,
    #[serde(default)]
    relators: Vec<Vec<i64>>,
}

impl Serialize for GeneratingSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GeneratingSetRepr {
            dim: self.dim,
            s_plus: self.ints(),
            include_inverses: self.include_inverses,
            self_loop: self.self_loop,
            relators: self.relators.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GeneratingSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = GeneratingSetRepr::deserialize(d)?;
        let gs = GeneratingSet::new(
            r.dim,
            r.s_plus.iter().map(|h| IntVector::from_ints(h)).collect(),
            r.self_loop,
        )
        .map_err(serde::de::Error::custom)?;
        if r.include_inverses && !gs.include_inverses {
            return Err(serde::de::Error::custom("include_inverses set but S+ is not closed under negation"));
        }
        Ok(gs)
    }
}

/// Echelon form of the integer row lattice spanned by `rows` (Euclidean reduction).
fn integer_echelon(mut rows: Vec<Vec<BigInt>>, dim: usize) -> Vec<Vec<BigInt>> {
    let mut r = 0;
    for col in 0..dim {
        loop {
            let pivot = (r..rows.len())
                .filter(|&i| !rows[i][col].is_zero())
                .min_by(|&a, &b| rows[a][col].abs().cmp(&rows[b][col].abs()));
            let Some(p) = pivot else { break };
            rows.swap(r, p);
            let mut done = true;
            for i in r + 1..rows.len() {
                if rows[i][col].is_zero() {
                    continue;
                }
                let f = rows[i][col].div_floor(&rows[r][col]);
                for j in 0..dim {
                    let v = &rows[i][j] - &f * &rows[r][j];
                    rows[i][j] = v;
                }
                if !rows[i][col].is_zero() {
                    done = false;
                }
            }
            if done {
                r += 1;
                break;
            }
        }
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    rows
}

/// Index of the sublattice generated by S₊ in Z^d, or `None` when it has lower rank.
pub fn lattice_index(gs: &GeneratingSet) -> Option<BigInt> {
    let rows: Vec<Vec<BigInt>> = gs
        .s_plus
        .iter()
        .map(|h| h.coords().iter().map(|c| c.to_integer()).collect())
        .collect();
    let ech = integer_echelon(rows, gs.dim);
    if ech.len() < gs.dim {
        return None;
    }
    // Full rank: the echelon rows form a triangular basis.
    let mut det = BigInt::from(1);
    for (i, row) in ech.iter().enumerate() {
        det *= &row[i];
    }
    Some(det.abs())
}

/// Integer combinations of S₊ ∪ S₋ give all of Z^d.
pub fn spans_lattice(gs: &GeneratingSet) -> bool {
    lattice_index(gs) == Some(BigInt::from(1))
}

/// S₊ generates a full-rank subgroup, which is then isomorphic to Z^d.
pub fn full_rank(gs: &GeneratingSet) -> bool {
    lattice_index(gs).is_some()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Halfspace {
    pub normal: Vec<f64>,
    /// |k·normal| ≤ bound.
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BrillouinZone {
    pub dim: usize,
    pub halfspaces: Vec<Halfspace>,
    /// One dual set per maximal independent subset of S₊.
    pub duals: Vec<Vec<Vec<f64>>>,
    /// Half-widths of a bounding box centred at 0.
    pub bbox: Vec<f64>,
}

impl BrillouinZone {
    pub fn contains(&self, k: &[f64]) -> bool {
        self.halfspaces.iter().all(|h| {
            let dot: f64 = h.normal.iter().zip(k).map(|(a, b)| a * b).sum();
            dot.abs() <= h.bound * (1.0 + 1e-12)
        })
    }

    /// Uniform point of the zone by rejection from the bounding box.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        loop {
            let k: Vec<f64> = self.bbox.iter().map(|&w| rng.random_range(-w..=w)).collect();
            if self.contains(&k) {
                return k;
            }
        }
    }

    /// Monte Carlo volume estimate.
    pub fn volume_estimate<R: Rng + ?Sized>(&self, rng: &mut R, samples: usize) -> f64 {
        let box_vol: f64 = self.bbox.iter().map(|w| 2.0 * w).product();
        let hits = (0..samples)
            .filter(|_| {
                let k: Vec<f64> = self.bbox.iter().map(|&w| rng.random_range(-w..=w)).collect();
                self.contains(&k)
            })
            .count();
        box_vol * hits as f64 / samples as f64
    }
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

pub fn brillouin_zone(gs: &GeneratingSet) -> Result<BrillouinZone> {
    let d = gs.dim;
    let mut normals: BTreeMap<IntVector, ()> = BTreeMap::new();
    let mut duals = Vec::new();
    let mut bbox = vec![f64::INFINITY; d];
    for subset in subsets(gs.s_plus.len(), d) {
        let h: Vec<IntVector> = subset.iter().map(|&i| gs.s_plus[i].clone()).collect();
        // rows h_i; duals are the rows of H^{-T}
        let hm = RatMatrix::from_columns(d, &h).transpose();
        let Some(inv) = hm.inverse() else { continue };
        let dual_m = inv.transpose();
        let dual_vecs: Vec<IntVector> = (0..d)
            .map(|l| IntVector::new(dual_m.row(l).to_vec()))
            .collect();
        let bounds: Vec<f64> = dual_vecs
            .iter()
            .map(|v| PI * crate::matrix_kernel::q_to_f64(&v.norm2()))
            .collect();
        // k = Hᵀ y with |y_l| ≤ bound_l
        for (i, b) in bbox.iter_mut().enumerate() {
            let w: f64 = (0..d)
                .map(|l| crate::matrix_kernel::q_to_f64(hm.get(l, i)).abs() * bounds[l])
                .sum();
            *b = b.min(w);
        }
        for v in &dual_vecs {
            let key = if v.coords().iter().find(|c| !c.is_zero()).is_some_and(|c| c.is_negative()) {
                -v
            } else {
                v.clone()
            };
            normals.insert(key, ());
        }
        duals.push(dual_vecs.iter().map(IntVector::to_f64).collect());
    }
    if duals.is_empty() {
        return Err(Error::DegenerateSet);
    }
    let halfspaces = normals
        .keys()
        .map(|n| Halfspace {
            normal: n.to_f64(),
            bound: PI * crate::matrix_kernel::q_to_f64(&n.norm2()),
        })
        .collect();
    Ok(BrillouinZone {
        dim: d,
        halfspaces,
        duals,
        bbox,
    })
}

/// Ordered pairs (h, h′) of S with h ≠ h′, keyed by h − h′.
pub fn difference_multiset(gs: &GeneratingSet) -> BTreeMap<IntVector, Vec<(IntVector, IntVector)>> {
    let s = gs.full();
    let mut out: BTreeMap<IntVector, Vec<(IntVector, IntVector)>> = BTreeMap::new();
    for a in &s {
        for b in &s {
            if a != b {
                out.entry(a - b).or_default().push((a.clone(), b.clone()));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point_groups::{orbit, parse_group};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::{HashSet, VecDeque};

    pub fn bcc() -> GeneratingSet {
        GeneratingSet::from_ints(3, &[&[1, 1, 1], &[1, -1, -1], &[-1, 1, -1], &[-1, -1, 1]], false).unwrap()
    }

    /// Brute force: are all unit vectors words of length ≤ `len`?
    fn bfs_spans(gs: &GeneratingSet, len: usize) -> bool {
        let steps: Vec<Vec<i64>> = gs.ints().into_iter().chain(gs.s_minus().iter().map(|h| h.to_i64().unwrap())).collect();
        let start = vec![0i64; gs.dim];
        let mut seen: HashSet<Vec<i64>> = HashSet::from([start.clone()]);
        let mut queue = VecDeque::from([(start, 0usize)]);
        while let Some((p, l)) = queue.pop_front() {
            if l == len {
                continue;
            }
            for s in &steps {
                let q: Vec<i64> = p.iter().zip(s).map(|(a, b)| a + b).collect();
                if seen.insert(q.clone()) {
                    queue.push_back((q, l + 1));
                }
            }
        }
        (0..gs.dim).all(|i| {
            let mut e = vec![0i64; gs.dim];
            e[i] = 1;
            seen.contains(&e)
        })
    }

    #[test]
    fn spanning_examples() {
        let b = bcc();
        assert_eq!(b.relators, vec![vec![1, 1, 1, 1]]);
        assert!(b.evaluate_relator(&b.relators[0]).is_zero());
        assert_eq!(lattice_index(&b), Some(BigInt::from(4)));
        assert!(!spans_lattice(&b));
        assert!(full_rank(&b));
        let sq = GeneratingSet::from_ints(2, &[&[2, 0], &[0, 2]], false).unwrap();
        assert!(!spans_lattice(&sq));
        let line = GeneratingSet::from_ints(1, &[&[1]], false).unwrap();
        assert!(spans_lattice(&line));
        let cubic = GeneratingSet::from_ints(3, &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]], false).unwrap();
        assert!(spans_lattice(&cubic));
        let flat = GeneratingSet::from_ints(3, &[&[1, 0, 0], &[0, 1, 0]], false).unwrap();
        assert_eq!(lattice_index(&flat), None);
    }

    #[test]
    fn spanning_matches_bfs_on_catalogue_orbits() {
        let cases = [
            ("A4", vec![1, 0, 0]),
            ("A4", vec![1, 1, 0]),
            ("A4", vec![3, 1, 1]),
            ("S4", vec![1, 2, 0]),
            ("S4", vec![1, 1, 1]),
            ("D4", vec![1, 0, 1]),
            ("Z4", vec![1, 0, 1]),
            ("D3", vec![1, 0, 1]),
            ("D2", vec![1, 1, 1]),
            ("D2", vec![1, 2, 3]),
        ];
        for (name, seed) in cases {
            let o = orbit(&parse_group(name).unwrap(), &IntVector::from_ints(&seed)).unwrap();
            let gs = GeneratingSet::new(3, o.vectors, false).unwrap();
            assert_eq!(spans_lattice(&gs), bfs_spans(&gs, 6), "{name} {seed:?}");
        }
    }

    #[test]
    fn zone_examples() {
        let line = GeneratingSet::from_ints(1, &[&[1]], false).unwrap();
        let z = brillouin_zone(&line).unwrap();
        assert_eq!(z.halfspaces.len(), 1);
        assert!((z.halfspaces[0].bound - PI).abs() < 1e-15);
        assert!(z.contains(&[PI - 1e-9]) && !z.contains(&[PI + 1e-6]));
        let sq = GeneratingSet::from_ints(2, &[&[1, 0], &[0, 1]], false).unwrap();
        let z = brillouin_zone(&sq).unwrap();
        assert!(z.contains(&[3.0, -3.0]) && !z.contains(&[3.2, 0.0]));
        let z = brillouin_zone(&bcc()).unwrap();
        assert_eq!(z.duals.len(), 4);
        assert!(z.contains(&[0.0, 0.0, 0.0]));
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        assert!(z.volume_estimate(&mut rng, 20_000) > 0.0);
        let flat = GeneratingSet::from_ints(2, &[&[1, 1], &[2, 2]], false).unwrap();
        assert_eq!(brillouin_zone(&flat), Err(Error::DegenerateSet));
    }

    #[test]
    fn zone_invariant_under_permuting_group() {
        let z = brillouin_zone(&bcc()).unwrap();
        let d2 = parse_group("D2").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..2000 {
            let k: Vec<f64> = z.bbox.iter().map(|&w| rng.random_range(-w..=w)).collect();
            for g in d2.orthogonal_matrices() {
                let gk: Vec<f64> = (0..3).map(|i| (0..3).map(|j| g[(i, j)] * k[j]).sum()).collect();
                assert_eq!(z.contains(&k), z.contains(&gk));
            }
            let neg: Vec<f64> = k.iter().map(|x| -x).collect();
            assert_eq!(z.contains(&k), z.contains(&neg));
        }
    }

    #[test]
    fn difference_examples() {
        let pm = GeneratingSet::from_ints(1, &[&[1]], false).unwrap();
        let d = difference_multiset(&pm);
        assert_eq!(d[&IntVector::from_ints(&[2])], vec![(IntVector::from_ints(&[1]), IntVector::from_ints(&[-1]))]);
        let lazy = GeneratingSet::from_ints(1, &[&[1]], true).unwrap();
        let d = difference_multiset(&lazy);
        let one = &d[&IntVector::from_ints(&[1])];
        assert_eq!(one.len(), 2);
        assert!(one.contains(&(IntVector::from_ints(&[1]), IntVector::from_ints(&[0]))));
        assert!(one.contains(&(IntVector::from_ints(&[0]), IntVector::from_ints(&[-1]))));
        let d = difference_multiset(&bcc());
        let pairs = &d[&IntVector::from_ints(&[0, 2, 2])];
        // (1,1,1) − (1,−1,−1) and (−1,1,1) − (−1,−1,−1)
        assert_eq!(pairs.len(), 2);
    }

    proptest! {
        #[test]
        fn difference_keys_symmetric(v in proptest::collection::vec(proptest::collection::vec(-2i64..3, 2), 1..5), lazy: bool) {
            let vecs: Vec<IntVector> = v.iter().map(|x| IntVector::from_ints(x)).filter(|x| !x.is_zero()).collect::<BTreeSet<_>>().into_iter().collect();
            prop_assume!(!vecs.is_empty());
            let gs = GeneratingSet::new(2, vecs, lazy).unwrap();
            let d = difference_multiset(&gs);
            for (k, pairs) in &d {
                let back = &d[&-k];
                prop_assert_eq!(back.len(), pairs.len());
                for (a, b) in pairs {
                    prop_assert!(back.contains(&(b.clone(), a.clone())));
                }
            }
        }

        #[test]
        fn index_matches_determinant(e in proptest::collection::vec(-3i64..4, 4)) {
            let a = IntVector::from_ints(&[e[0], e[1]]);
            let b = IntVector::from_ints(&[e[2], e[3]]);
            prop_assume!(!a.is_zero() && !b.is_zero() && a != b);
            let gs = GeneratingSet::new(2, vec![a, b], false).unwrap();
            let det = (e[0] * e[3] - e[1] * e[2]).abs();
            let idx = lattice_index(&gs);
            if det == 0 { prop_assert!(idx.is_none()); } else { prop_assert_eq!(idx, Some(BigInt::from(det))); }
        }
    }
}
