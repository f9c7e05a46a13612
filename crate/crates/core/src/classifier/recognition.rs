//! Recognition of orbit polyhedra up to scale and signed coordinate permutations.

use std::collections::BTreeSet;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::cayley_lattice::GeneratingSet;
use crate::matrix_kernel::{IntVector, RatMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PolyhedronTag {
    SimpleCubic,
    BCC,
    Cuboctahedron,
    TruncatedTetrahedron,
    TruncatedOctahedron,
    IntegerLine,
    Square,
    ParametricFamily,
    Other,
}

impl std::fmt::Display for PolyhedronTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        std::fmt::Debug::fmt(self, f)
    }
}

type V3 = [i64; 3];

fn ints(vs: &[IntVector]) -> Option<Vec<Vec<i64>>> {
    vs.iter().map(|v| v.to_i64()).collect()
}

fn scaled_down(vs: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let g = vs.iter().flatten().fold(0i64, |g, &x| g.gcd(&x));
    if g == 0 {
        return vs.to_vec();
    }
    vs.iter().map(|v| v.iter().map(|x| x / g).collect()).collect()
}

fn signed_permutations() -> Vec<([usize; 3], [i64; 3])> {
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut out = Vec::with_capacity(48);
    for p in perms {
        for b in 0..8 {
            out.push((p, [0, 1, 2].map(|i| if b >> i & 1 == 1 { -1 } else { 1 })));
        }
    }
    out
}

fn all_signed_perms_of(v: V3) -> BTreeSet<V3> {
    signed_permutations()
        .into_iter()
        .map(|(p, s)| [0, 1, 2].map(|i| s[i] * v[p[i]]))
        .collect()
}

fn even_sign_perms_of(v: V3) -> BTreeSet<V3> {
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut out = BTreeSet::new();
    for p in perms {
        for b in 0..8u32 {
            if b.count_ones() % 2 == 0 {
                out.insert([0, 1, 2].map(|i| if b >> i & 1 == 1 { -v[p[i]] } else { v[p[i]] }));
            }
        }
    }
    out
}

fn references3() -> Vec<(PolyhedronTag, BTreeSet<V3>)> {
    let tetra: BTreeSet<V3> = [[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]].into_iter().collect();
    vec![
        (PolyhedronTag::SimpleCubic, all_signed_perms_of([1, 0, 0])),
        (PolyhedronTag::BCC, tetra),
        (PolyhedronTag::BCC, all_signed_perms_of([1, 1, 1])),
        (PolyhedronTag::Cuboctahedron, all_signed_perms_of([1, 1, 0])),
        (PolyhedronTag::TruncatedTetrahedron, even_sign_perms_of([3, 1, 1])),
        (PolyhedronTag::TruncatedTetrahedron, all_signed_perms_of([3, 1, 1])),
        (PolyhedronTag::TruncatedOctahedron, all_signed_perms_of([2, 1, 0])),
    ]
}

/// Shape of a vector set in Euclidean coordinates.
pub fn geometric_tag(vectors: &[IntVector]) -> PolyhedronTag {
    let Some(vs) = ints(vectors) else {
        return PolyhedronTag::Other;
    };
    if vs.is_empty() {
        return PolyhedronTag::Other;
    }
    let vs = scaled_down(&vs);
    match vs[0].len() {
        1 => {
            let set: BTreeSet<i64> = vs.iter().map(|v| v[0]).collect();
            if set.iter().all(|x| x.abs() == 1) {
                PolyhedronTag::IntegerLine
            } else {
                PolyhedronTag::Other
            }
        }
        2 => {
            let set: BTreeSet<Vec<i64>> = vs.into_iter().collect();
            let unit = set.iter().all(|v| v[0].abs() + v[1].abs() == 1);
            let both_axes = set.iter().any(|v| v[0] != 0) && set.iter().any(|v| v[1] != 0);
            if unit && both_axes {
                PolyhedronTag::Square
            } else {
                PolyhedronTag::Other
            }
        }
        3 => {
            let set: Vec<V3> = vs.iter().map(|v| [v[0], v[1], v[2]]).collect();
            for (tag, reference) in references3() {
                if reference.len() != set.len() {
                    continue;
                }
                for (p, s) in signed_permutations() {
                    let img: BTreeSet<V3> = set.iter().map(|v| [0, 1, 2].map(|i| s[i] * v[p[i]])).collect();
                    if img == reference {
                        return tag;
                    }
                }
            }
            PolyhedronTag::Other
        }
        _ => PolyhedronTag::Other,
    }
}

/// One representative of each ±pair, in order of first appearance.
pub fn half_set(gs: &GeneratingSet) -> Vec<IntVector> {
    let mut out: Vec<IntVector> = Vec::new();
    for h in &gs.s_plus {
        if !out.iter().any(|x| *x == -h) {
            out.push(h.clone());
        }
    }
    out
}

/// Abstract presentation type: free generators or the tetrahedral four-generator presentation.
pub fn abstract_tag(gs: &GeneratingSet) -> PolyhedronTag {
    let h = half_set(gs);
    let m = RatMatrix::from_columns(gs.dim, &h);
    let rank = m.rank();
    if rank < gs.dim {
        return PolyhedronTag::Other;
    }
    if h.len() == gs.dim {
        return match gs.dim {
            1 => PolyhedronTag::IntegerLine,
            2 => PolyhedronTag::Square,
            _ => PolyhedronTag::SimpleCubic,
        };
    }
    if gs.dim == 3 && h.len() == 4 {
        let null = m.nullspace();
        if null.len() == 1 {
            let r = &null[0];
            let first = r.coords()[0].clone();
            if !num_traits::Zero::is_zero(&first) {
                let matches = if gs.include_inverses {
                    r.coords().iter().all(|x| num_traits::Signed::abs(x) == num_traits::Signed::abs(&first))
                } else {
                    r.coords().iter().all(|x| *x == first)
                };
                if matches {
                    return PolyhedronTag::BCC;
                }
            }
        }
    }
    PolyhedronTag::Other
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point_groups::{orbit, parse_group};

    fn v(x: &[i64]) -> IntVector {
        IntVector::from_ints(x)
    }

    fn tag_of(group: &str, seed: &[i64]) -> PolyhedronTag {
        geometric_tag(&orbit(&parse_group(group).unwrap(), &v(seed)).unwrap().vectors)
    }

    #[test]
    fn named_polyhedra() {
        assert_eq!(tag_of("A4", &[1, 0, 0]), PolyhedronTag::SimpleCubic);
        assert_eq!(tag_of("A4", &[2, 0, 0]), PolyhedronTag::SimpleCubic);
        assert_eq!(tag_of("S4", &[1, -1, -1]), PolyhedronTag::BCC);
        assert_eq!(tag_of("A4", &[1, 1, 1]), PolyhedronTag::BCC);
        assert_eq!(tag_of("A4", &[1, -1, 0]), PolyhedronTag::Cuboctahedron);
        assert_eq!(tag_of("A4", &[3, 1, 1]), PolyhedronTag::TruncatedTetrahedron);
        assert_eq!(tag_of("S4", &[3, 1, 1]), PolyhedronTag::TruncatedTetrahedron);
        assert_eq!(tag_of("S4", &[1, -2, 0]), PolyhedronTag::TruncatedOctahedron);
        assert_eq!(tag_of("S4", &[5, 3, 1]), PolyhedronTag::Other);
    }

    #[test]
    fn low_dimensions() {
        assert_eq!(geometric_tag(&[v(&[1]), v(&[-1])]), PolyhedronTag::IntegerLine);
        assert_eq!(geometric_tag(&[v(&[1, 0]), v(&[0, -1])]), PolyhedronTag::Square);
        assert_eq!(geometric_tag(&[v(&[1, 1]), v(&[1, -1])]), PolyhedronTag::Other);
    }

    #[test]
    fn abstract_presentations() {
        let bcc = GeneratingSet::from_ints(3, &[&[1, 1, 1], &[1, -1, -1], &[-1, 1, -1], &[-1, -1, 1]], false).unwrap();
        assert_eq!(abstract_tag(&bcc), PolyhedronTag::BCC);
        let stretched = GeneratingSet::from_ints(3, &[&[1, 2, 3], &[1, -2, -3], &[-1, 2, -3], &[-1, -2, 3]], false).unwrap();
        assert_eq!(abstract_tag(&stretched), PolyhedronTag::BCC);
        let cube = orbit(&parse_group("S4").unwrap(), &v(&[1, 1, 1])).unwrap().vectors;
        assert_eq!(abstract_tag(&GeneratingSet::new(3, cube, false).unwrap()), PolyhedronTag::BCC);
        let rect = GeneratingSet::from_ints(3, &[&[1, 1, 2], &[-1, -1, 2], &[-1, 1, 2], &[1, -1, 2]], false).unwrap();
        assert_eq!(abstract_tag(&rect), PolyhedronTag::Other);
        let sq = GeneratingSet::from_ints(2, &[&[1, 1], &[1, -1], &[-1, -1], &[-1, 1]], false).unwrap();
        assert_eq!(abstract_tag(&sq), PolyhedronTag::Square);
        let line = GeneratingSet::from_ints(1, &[&[1]], true).unwrap();
        assert_eq!(abstract_tag(&line), PolyhedronTag::IntegerLine);
    }
}
