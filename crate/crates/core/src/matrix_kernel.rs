//! Exact rational matrices and vectors, plus the 2×2 complex kernel used for coins.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use nalgebra::{DMatrix, Matrix2, Vector2};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

pub type Q = BigRational;
pub type C64 = Complex64;
pub type Complex2Matrix = Matrix2<C64>;
pub type Rational3Matrix = RatMatrix;

pub const DEFAULT_TOL: f64 = 1e-10;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Always `p/q`, also for integers.
pub fn q_to_string(x: &Q) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

pub fn parse_q(s: &str) -> Result<Q> {
    s.trim()
        .parse::<Q>()
        .map_err(|_| Error::Parse(format!("not a rational: `{s}`")))
}

pub fn q_to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum QRepr {
    Int(i64),
    Str(String),
}

impl QRepr {
    fn into_q(self) -> Result<Q> {
        match self {
            QRepr::Int(n) => Ok(q(n)),
            QRepr::Str(s) => parse_q(&s),
        }
    }
}

/// Lattice vector with exact rational coordinates.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct IntVector(Vec<Q>);

impl IntVector {
    pub fn new(coords: Vec<Q>) -> Self {
        IntVector(coords)
    }

    pub fn from_ints(coords: &[i64]) -> Self {
        IntVector(coords.iter().map(|&c| q(c)).collect())
    }

    pub fn zero(dim: usize) -> Self {
        IntVector(vec![Q::zero(); dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Q] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn dot(&self, other: &IntVector) -> Q {
        self.0
            .iter()
            .zip(&other.0)
            .fold(Q::zero(), |acc, (a, b)| acc + a * b)
    }

    pub fn norm2(&self) -> Q {
        self.dot(self)
    }

    pub fn scale(&self, s: &Q) -> IntVector {
        IntVector(self.0.iter().map(|c| c * s).collect())
    }

    pub fn is_integral(&self) -> bool {
        self.0.iter().all(|c| c.is_integer())
    }

    pub fn to_i64(&self) -> Option<Vec<i64>> {
        self.0
            .iter()
            .map(|c| if c.is_integer() { c.numer().to_i64() } else { None })
            .collect()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(q_to_f64).collect()
    }

    pub fn max_abs(&self) -> Q {
        self.0.iter().map(|c| c.abs()).max().unwrap_or_else(Q::zero)
    }

    /// Positive multiple with coprime integer coordinates (zero stays zero).
    pub fn primitive(&self) -> IntVector {
        if self.is_zero() {
            return self.clone();
        }
        let lcm = self
            .0
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<BigInt> = self
            .0
            .iter()
            .map(|c| (c * Q::from_integer(lcm.clone())).to_integer())
            .collect();
        let g = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
        IntVector(ints.into_iter().map(|c| Q::from_integer(c / &g)).collect())
    }
}

impl Add for &IntVector {
    type Output = IntVector;
    fn add(self, rhs: &IntVector) -> IntVector {
        IntVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &IntVector {
    type Output = IntVector;
    fn sub(self, rhs: &IntVector) -> IntVector {
        IntVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &IntVector {
    type Output = IntVector;
    fn neg(self) -> IntVector {
        IntVector(self.0.iter().map(|a| -a).collect())
    }
}

impl fmt::Display for IntVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl Serialize for IntVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let strings: Vec<String> = self.0.iter().map(q_to_string).collect();
        strings.serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw: Vec<QRepr> = Vec::deserialize(d)?;
        raw.into_iter()
            .map(QRepr::into_q)
            .collect::<Result<Vec<Q>>>()
            .map(IntVector)
            .map_err(D::Error::custom)
    }
}

/// Dense exact rational matrix, row-major.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    e: Vec<Q>,
}

impl RatMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Q>) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count must be rows*cols");
        RatMatrix {
            rows,
            cols,
            e: entries,
        }
    }

    pub fn from_i64<R: AsRef<[i64]>>(rows: &[R]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.as_ref().len());
        let e = rows
            .iter()
            .flat_map(|row| {
                assert_eq!(row.as_ref().len(), c, "ragged rows");
                row.as_ref().iter().map(|&x| q(x))
            })
            .collect();
        RatMatrix::new(r, c, e)
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(dim: usize, cols: &[IntVector]) -> Self {
        let mut m = RatMatrix::zeros(dim, cols.len());
        for (j, v) in cols.iter().enumerate() {
            for i in 0..dim {
                m.set(i, j, v.coords()[i].clone());
            }
        }
        m
    }

    pub fn identity(n: usize) -> Self {
        let mut m = RatMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Q::one());
        }
        m
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix::new(rows, cols, vec![Q::zero(); rows * cols])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Q {
        &self.e[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Q) {
        self.e[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Q] {
        &self.e[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul(&self, rhs: &RatMatrix) -> RatMatrix {
        assert_eq!(self.cols, rhs.rows, "shape mismatch in product");
        let mut out = RatMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                let mut acc = Q::zero();
                for k in 0..self.cols {
                    let a = self.get(i, k);
                    if a.is_zero() {
                        continue;
                    }
                    acc += a * rhs.get(k, j);
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &IntVector) -> IntVector {
        assert_eq!(self.cols, v.dim(), "shape mismatch in matrix-vector product");
        IntVector::new(
            (0..self.rows)
                .map(|i| {
                    self.row(i)
                        .iter()
                        .zip(v.coords())
                        .fold(Q::zero(), |acc, (a, b)| acc + a * b)
                })
                .collect(),
        )
    }

    pub fn transpose(&self) -> RatMatrix {
        let mut out = RatMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).clone());
            }
        }
        out
    }

    pub fn scale(&self, s: &Q) -> RatMatrix {
        RatMatrix::new(self.rows, self.cols, self.e.iter().map(|x| x * s).collect())
    }

    pub fn neg(&self) -> RatMatrix {
        self.scale(&-Q::one())
    }

    pub fn add(&self, rhs: &RatMatrix) -> RatMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        RatMatrix::new(
            self.rows,
            self.cols,
            self.e.iter().zip(&rhs.e).map(|(a, b)| a + b).collect(),
        )
    }

    pub fn sub(&self, rhs: &RatMatrix) -> RatMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        RatMatrix::new(
            self.rows,
            self.cols,
            self.e.iter().zip(&rhs.e).map(|(a, b)| a - b).collect(),
        )
    }

    pub fn is_identity(&self) -> bool {
        self.is_square() && *self == RatMatrix::identity(self.rows)
    }

    pub fn is_integral(&self) -> bool {
        self.e.iter().all(|x| x.is_integer())
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && *self == self.transpose()
    }

    pub fn is_orthogonal(&self) -> bool {
        self.is_square() && self.transpose().mul(self).is_identity()
    }

    /// Exact test of MᵀGM = G.
    pub fn preserves_metric(&self, g: &RatMatrix) -> bool {
        self.transpose().mul(g).mul(self) == *g
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (RatMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else {
                continue;
            };
            if p != r {
                for j in 0..m.cols {
                    m.e.swap(p * m.cols + j, r * m.cols + j);
                }
            }
            let inv = Q::one() / m.get(r, c);
            for j in 0..m.cols {
                let v = m.get(r, j) * &inv;
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                if i == r || m.get(i, c).is_zero() {
                    continue;
                }
                let f = m.get(i, c).clone();
                for j in 0..m.cols {
                    let v = m.get(i, j) - &f * m.get(r, j);
                    m.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right nullspace, one vector per free column.
    pub fn nullspace(&self) -> Vec<IntVector> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![Q::zero(); self.cols];
                v[f] = Q::one();
                for (row, &pc) in pivots.iter().enumerate() {
                    v[pc] = -r.get(row, f).clone();
                }
                IntVector::new(v)
            })
            .collect()
    }

    pub fn det(&self) -> Q {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let n = self.rows;
        let mut m = self.clone();
        let mut det = Q::one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| !m.get(i, c).is_zero()) else {
                return Q::zero();
            };
            if p != c {
                for j in 0..n {
                    m.e.swap(p * n + j, c * n + j);
                }
                det = -det;
            }
            let pivot = m.get(c, c).clone();
            det *= &pivot;
            for i in c + 1..n {
                if m.get(i, c).is_zero() {
                    continue;
                }
                let f = m.get(i, c) / &pivot;
                for j in c..n {
                    let v = m.get(i, j) - &f * m.get(c, j);
                    m.set(i, j, v);
                }
            }
        }
        det
    }

    pub fn inverse(&self) -> Option<RatMatrix> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let mut aug = RatMatrix::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, n + i, Q::one());
        }
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        let mut inv = RatMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv.set(i, j, r.get(i, n + j).clone());
            }
        }
        Some(inv)
    }

    /// Smallest k ≥ 1 with Mᵏ = I, searched up to `max`.
    pub fn order(&self, max: u32) -> Option<u32> {
        let id = RatMatrix::identity(self.rows);
        let mut p = self.clone();
        for k in 1..=max {
            if p == id {
                return Some(k);
            }
            p = p.mul(self);
        }
        None
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| q_to_f64(self.get(i, j)))
    }

    pub fn to_string_rows(&self) -> Vec<Vec<String>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(q_to_string).collect())
            .collect()
    }
}

impl fmt::Display for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ";")?;
            }
            for (j, x) in self.row(i).iter().enumerate() {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{x}")?;
            }
        }
        write!(f, "]")
    }
}

impl Serialize for RatMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_string_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for RatMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw: Vec<Vec<QRepr>> = Vec::deserialize(d)?;
        let rows = raw.len();
        let cols = raw.first().map_or(0, Vec::len);
        if raw.iter().any(|r| r.len() != cols) {
            return Err(D::Error::custom("ragged matrix rows"));
        }
        let e = raw
            .into_iter()
            .flatten()
            .map(QRepr::into_q)
            .collect::<Result<Vec<Q>>>()
            .map_err(D::Error::custom)?;
        Ok(RatMatrix::new(rows, cols, e))
    }
}

/// Principal square root of a symmetric positive definite rational matrix.
pub fn sqrt_positive(p: &RatMatrix) -> Result<DMatrix<f64>> {
    if !p.is_symmetric() {
        return Err(Error::NotPositiveDefinite);
    }
    // Sylvester: every leading principal minor positive.
    for k in 1..=p.rows() {
        let mut minor = RatMatrix::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                minor.set(i, j, p.get(i, j).clone());
            }
        }
        if !minor.det().is_positive() {
            return Err(Error::NotPositiveDefinite);
        }
    }
    let eig = p.to_f64().symmetric_eigen();
    let sq = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    Ok(&eig.eigenvectors * sq * eig.eigenvectors.transpose())
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn c2(a: C64, b: C64, cc: C64, d: C64) -> Complex2Matrix {
    Complex2Matrix::new(a, b, cc, d)
}

pub fn identity2() -> Complex2Matrix {
    Complex2Matrix::identity()
}

pub fn zero2() -> Complex2Matrix {
    Complex2Matrix::zeros()
}

pub fn sigma_x() -> Complex2Matrix {
    c2(c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.))
}

pub fn sigma_y() -> Complex2Matrix {
    c2(c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.))
}

pub fn sigma_z() -> Complex2Matrix {
    c2(c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.))
}

pub fn frobenius(m: &Complex2Matrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn is_zero(m: &Complex2Matrix, tol: f64) -> bool {
    frobenius(m) <= tol
}

pub fn is_unitary(m: &Complex2Matrix, tol: f64) -> bool {
    frobenius(&(m.adjoint() * m - identity2())) <= tol
}

pub fn is_special_unitary(m: &Complex2Matrix, tol: f64) -> bool {
    is_unitary(m, tol) && (m.determinant() - c(1., 0.)).norm() <= tol
}

/// Singular values, largest first.
pub fn singular_values(m: &Complex2Matrix) -> (f64, f64) {
    let s = m.singular_values();
    (s[0].max(s[1]), s[0].min(s[1]))
}

pub fn is_rank_one(m: &Complex2Matrix, tol: f64) -> bool {
    let (hi, lo) = singular_values(m);
    hi > tol && lo <= tol
}

/// SU(2) element [[x, -y*], [y, x*]] whose first column is the unit vector `u`.
pub fn su2_with_first_column(u: &Vector2<C64>) -> Complex2Matrix {
    c2(u[0], -u[1].conj(), u[1], u[0].conj())
}

/// Unit quaternion (a, b, c, d) ↦ [[a+ib, c+id], [−c+id, a−ib]].
pub fn su2_from_quaternion(qt: [f64; 4]) -> Complex2Matrix {
    let n = qt.iter().map(|x| x * x).sum::<f64>().sqrt();
    let [a, b, cc, d] = qt.map(|x| x / n);
    c2(c(a, b), c(cc, d), c(-cc, d), c(a, -b))
}

/// Unit vector with its first entry of non-negligible size made real positive.
pub fn canonical_phase(v: &Vector2<C64>) -> Vector2<C64> {
    let n = v.norm();
    let mut u = v / c(n, 0.);
    if let Some(z) = u.iter().find(|z| z.norm() > 1e-12).copied() {
        let ph = z / c(z.norm(), 0.);
        u /= ph;
    }
    u
}

/// Polar decomposition with the default tolerance.
pub fn polar_decompose(m: &Complex2Matrix) -> (Complex2Matrix, Complex2Matrix) {
    polar_decompose_tol(m, DEFAULT_TOL)
}

/// m = U·|m|. For rank-one m the unitary factor is the SU(2) completion of v ↦ u,
/// where v is the phase-normalized support of m.
pub fn polar_decompose_tol(m: &Complex2Matrix, tol: f64) -> (Complex2Matrix, Complex2Matrix) {
    let svd = m.svd(true, true);
    let (u_mat, v_t) = (svd.u.unwrap(), svd.v_t.unwrap());
    let s = svd.singular_values;
    let (i_hi, i_lo) = if s[0] >= s[1] { (0, 1) } else { (1, 0) };
    if s[i_hi] <= tol {
        return (identity2(), zero2());
    }
    let v_hi: Vector2<C64> = v_t.row(i_hi).adjoint();
    if s[i_lo] <= tol {
        let v = canonical_phase(&v_hi);
        let mv = m * v;
        let sigma = mv.norm();
        let u = mv / c(sigma, 0.);
        let w = su2_with_first_column(&u) * su2_with_first_column(&v).adjoint();
        let modulus = v * v.adjoint() * c(sigma, 0.);
        return (w, modulus);
    }
    let v = v_t.adjoint();
    let sig = Complex2Matrix::from_diagonal(&Vector2::new(c(s[0], 0.), c(s[1], 0.)));
    (u_mat * v_t, v * sig * v_t)
}

/// Eigenvalues of a general 2×2 complex matrix.
pub fn eigenvalues2(m: &Complex2Matrix) -> (C64, C64) {
    let half_tr = (m[(0, 0)] + m[(1, 1)]) * 0.5;
    let disc = (half_tr * half_tr - m.determinant()).sqrt();
    (half_tr + disc, half_tr - disc)
}

/// Unit eigenvector for eigenvalue `lambda`.
pub fn eigenvector2(m: &Complex2Matrix, lambda: C64) -> Vector2<C64> {
    let a = Vector2::new(m[(0, 1)], lambda - m[(0, 0)]);
    let b = Vector2::new(lambda - m[(1, 1)], m[(1, 0)]);
    let v = if a.norm() >= b.norm() { a } else { b };
    if v.norm() < 1e-300 {
        return Vector2::new(c(1., 0.), c(0., 0.));
    }
    canonical_phase(&v)
}

fn wrap_phase(w: f64) -> f64 {
    if w <= -std::f64::consts::PI {
        w + 2.0 * std::f64::consts::PI
    } else {
        w
    }
}

/// Eigenphases ω₊ ≥ ω₋ in (−π, π] of a unitary matrix.
pub fn eigenphases(u: &Complex2Matrix, tol: f64) -> Result<(f64, f64)> {
    if !is_unitary(u, tol) {
        return Err(Error::NotUnitary { tol });
    }
    let (a, b) = eigenvalues2(u);
    let (wa, wb) = (wrap_phase(a.arg()), wrap_phase(b.arg()));
    Ok((wa.max(wb), wa.min(wb)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn close(a: &Complex2Matrix, b: &Complex2Matrix, tol: f64) -> bool {
        frobenius(&(a - b)) <= tol
    }

    #[test]
    fn polar_identity_and_zero() {
        let (u, p) = polar_decompose(&identity2());
        assert!(close(&u, &identity2(), 1e-12) && close(&p, &identity2(), 1e-12));
        let (u, p) = polar_decompose(&zero2());
        assert_eq!(u, identity2());
        assert_eq!(p, zero2());
    }

    #[test]
    fn polar_rank_one() {
        let s = FRAC_1_SQRT_2;
        let m = c2(c(s, 0.), c(0., 0.), c(s, 0.), c(0., 0.));
        let (u, p) = polar_decompose(&m);
        assert!(close(&(u * p), &m, 1e-12));
        for z in u.iter() {
            assert!((z.norm() - s).abs() < 1e-12);
        }
        assert!(close(&p, &c2(c(1., 0.), c(0., 0.), c(0., 0.), c(0., 0.)), 1e-12));
        assert!(is_special_unitary(&u, 1e-12));
    }

    #[test]
    fn eigenphase_examples() {
        assert_eq!(eigenphases(&identity2(), 1e-10).unwrap(), (0.0, 0.0));
        let d = c2(c(0., 1.), c(0., 0.), c(0., 0.), c(0., -1.));
        let (a, b) = eigenphases(&d, 1e-10).unwrap();
        assert!((a - PI / 2.).abs() < 1e-12 && (b + PI / 2.).abs() < 1e-12);
        let (a, b) = eigenphases(&(sigma_x() * c(0., 1.)), 1e-10).unwrap();
        assert!((a - PI / 2.).abs() < 1e-12 && (b + PI / 2.).abs() < 1e-12);
        let minus = -identity2();
        assert_eq!(eigenphases(&minus, 1e-10).unwrap(), (PI, PI));
        assert!(eigenphases(&(identity2() * c(2., 0.)), 1e-10).is_err());
    }

    #[test]
    fn sqrt_positive_examples() {
        let id = RatMatrix::identity(3);
        let r = sqrt_positive(&id).unwrap();
        assert!((r - DMatrix::<f64>::identity(3, 3)).norm() < 1e-12);
        let d = RatMatrix::from_i64(&[[4, 0, 0], [0, 1, 0], [0, 0, 1]]);
        let r = sqrt_positive(&d).unwrap();
        assert!((r[(0, 0)] - 2.0).abs() < 1e-12 && (r[(1, 1)] - 1.0).abs() < 1e-12);
        let bad = RatMatrix::from_i64(&[[1, 2], [2, 1]]);
        assert_eq!(sqrt_positive(&bad), Err(Error::NotPositiveDefinite));
        let skew = RatMatrix::from_i64(&[[1, 1], [0, 1]]);
        assert_eq!(sqrt_positive(&skew), Err(Error::NotPositiveDefinite));
    }

    #[test]
    fn rational_linear_algebra() {
        let m = RatMatrix::from_i64(&[[1, 2, 3], [2, 4, 6], [1, 0, 1]]);
        assert_eq!(m.rank(), 2);
        let ns = m.nullspace();
        assert_eq!(ns.len(), 1);
        assert!(m.mul_vec(&ns[0]).is_zero());
        assert_eq!(m.det(), q(0));
        let a = RatMatrix::from_i64(&[[2, 1], [1, 1]]);
        let inv = a.inverse().unwrap();
        assert!(a.mul(&inv).is_identity());
        assert_eq!(a.det(), q(1));
        let rot = RatMatrix::from_i64(&[[0, -1], [1, 0]]);
        assert_eq!(rot.order(12), Some(4));
        assert!(rot.is_orthogonal());
    }

    #[test]
    fn primitive_vectors() {
        let v = IntVector::new(vec![qf(1, 2), qf(-3, 2), q(0)]);
        assert_eq!(v.primitive(), IntVector::from_ints(&[1, -3, 0]));
        let w = IntVector::from_ints(&[-4, 6, 2]);
        assert_eq!(w.primitive(), IntVector::from_ints(&[-2, 3, 1]));
    }

    #[test]
    fn serde_round_trip() {
        let m = RatMatrix::new(2, 2, vec![qf(1, 2), q(-1), q(0), qf(3, 7)]);
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"[["1/2","-1/1"],["0/1","3/7"]]"#);
        let back: RatMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        let v: IntVector = serde_json::from_str(r#"[1, "-2", "1/3"]"#).unwrap();
        assert_eq!(v, IntVector::new(vec![q(1), q(-2), qf(1, 3)]));
    }

    fn arb_matrix() -> impl Strategy<Value = Complex2Matrix> {
        proptest::collection::vec(-2.0f64..2.0, 8).prop_map(|x| {
            c2(c(x[0], x[1]), c(x[2], x[3]), c(x[4], x[5]), c(x[6], x[7]))
        })
    }

    fn arb_unitary() -> impl Strategy<Value = Complex2Matrix> {
        (proptest::collection::vec(-1.0f64..1.0, 4), -PI..PI).prop_filter_map(
            "degenerate quaternion",
            |(qt, ph)| {
                let n: f64 = qt.iter().map(|x| x * x).sum();
                (n > 1e-3).then(|| su2_from_quaternion([qt[0], qt[1], qt[2], qt[3]]) * C64::from_polar(1.0, ph))
            },
        )
    }

    proptest! {
        #[test]
        fn polar_reconstructs(m in arb_matrix()) {
            let (u, p) = polar_decompose(&m);
            prop_assert!(close(&(u * p), &m, 10.0 * DEFAULT_TOL));
            prop_assert!(is_unitary(&u, 1e-9));
            prop_assert!(close(&p, &p.adjoint(), 1e-12));
            prop_assert!(p.symmetric_eigenvalues().iter().all(|&l| l >= -DEFAULT_TOL));
        }

        #[test]
        fn rank_one_polar(a in arb_matrix(), x in -1.0f64..1.0, y in -1.0f64..1.0) {
            let col = Vector2::new(a[(0, 0)], a[(1, 0)]);
            let row = Vector2::new(c(1.0, x), c(y, 0.3));
            prop_assume!(col.norm() > 1e-2);
            let m = col * row.adjoint();
            let (u, p) = polar_decompose(&m);
            prop_assert!(close(&(u * p), &m, 1e-9));
            prop_assert!(is_special_unitary(&u, 1e-9));
        }

        #[test]
        fn eigenphases_match_det(u in arb_unitary()) {
            let (wp, wm) = eigenphases(&u, 1e-9).unwrap();
            prop_assert!(wp >= wm);
            let prod = C64::from_polar(1.0, wp + wm);
            prop_assert!((prod - u.determinant()).norm() < 1e-9);
        }

        #[test]
        fn nullspace_is_annihilated(e in proptest::collection::vec(-3i64..4, 9)) {
            let m = RatMatrix::from_i64(&[[e[0], e[1], e[2]], [e[3], e[4], e[5]], [e[6], e[7], e[8]]]);
            let ns = m.nullspace();
            prop_assert_eq!(ns.len() + m.rank(), 3);
            for v in &ns {
                prop_assert!(m.mul_vec(v).is_zero());
            }
            prop_assert_eq!(m.det().is_zero(), !ns.is_empty());
        }
    }
}
