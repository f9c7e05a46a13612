//! Quantum walks A = Σ T_h ⊗ A_h on Z^d with a two-dimensional coin.
//!
//! T_h moves a walker from x to x + h, so plane waves diagonalise A with symbol
//! A_k = Σ e^{ih·k} A_h.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, Vector2};
use serde::{Deserialize, Serialize};

use crate::cayley_lattice::GeneratingSet;
use crate::isotropy::IsotropyDecl;
use crate::matrix_kernel::{
    c, eigenphases, eigenvalues2, eigenvector2, frobenius, identity2, is_rank_one, polar_decompose_tol,
    zero2, Complex2Matrix, IntVector, C64, DEFAULT_TOL,
};
use crate::{Error, Result};

/// Polar data of a rank-one coin: A = α V |η⟩⟨η|.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarCache {
    pub v: Complex2Matrix,
    pub alpha: f64,
    pub eta: Vector2<C64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoinMatrix {
    pub matrix: Complex2Matrix,
    pub polar: Option<PolarCache>,
}

impl CoinMatrix {
    pub fn new(matrix: Complex2Matrix) -> Self {
        let polar = is_rank_one(&matrix, DEFAULT_TOL).then(|| {
            let (v, modulus) = polar_decompose_tol(&matrix, DEFAULT_TOL);
            let alpha = modulus.trace().re;
            let eta = eigenvector2(&modulus, c(alpha, 0.0));
            PolarCache { v, alpha, eta }
        });
        CoinMatrix { matrix, polar }
    }

    /// |A| = (A†A)^{1/2}.
    pub fn modulus(&self) -> Complex2Matrix {
        polar_decompose_tol(&self.matrix, DEFAULT_TOL).1
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuantumWalk {
    pub gs: GeneratingSet,
    coins: BTreeMap<IntVector, CoinMatrix>,
}

impl QuantumWalk {
    /// Every element of S needs a nonzero coin; the self-loop coin may vanish.
    pub fn new(gs: GeneratingSet, coins: Vec<(IntVector, Complex2Matrix)>) -> Result<Self> {
        let s = gs.full();
        let mut map = BTreeMap::new();
        for (h, m) in coins {
            if !s.contains(&h) {
                return Err(Error::Invalid(format!("coin given for {h}, which is not in S")));
            }
            map.insert(h, CoinMatrix::new(m));
        }
        for h in &s {
            match map.get(h) {
                None if h.is_zero() => {
                    map.insert(h.clone(), CoinMatrix::new(zero2()));
                }
                None => return Err(Error::Invalid(format!("missing coin for {h}"))),
                Some(cm) if !h.is_zero() && frobenius(&cm.matrix) == 0.0 => {
                    return Err(Error::Invalid(format!("coin for {h} vanishes")))
                }
                _ => {}
            }
        }
        Ok(QuantumWalk { gs, coins: map })
    }

    pub fn dim(&self) -> usize {
        self.gs.dim
    }

    pub fn coin(&self, h: &IntVector) -> &Complex2Matrix {
        &self.coins[h].matrix
    }

    pub fn coin_data(&self, h: &IntVector) -> &CoinMatrix {
        &self.coins[h]
    }

    /// Coins in the order of [`GeneratingSet::full`].
    pub fn coins(&self) -> Vec<(IntVector, Complex2Matrix)> {
        self.gs
            .full()
            .into_iter()
            .map(|h| {
                let m = self.coins[&h].matrix;
                (h, m)
            })
            .collect()
    }

    pub fn map_coins<F: Fn(&IntVector, &Complex2Matrix) -> Complex2Matrix>(&self, f: F) -> Result<Self> {
        QuantumWalk::new(
            self.gs.clone(),
            self.coins().iter().map(|(h, m)| (h.clone(), f(h, m))).collect(),
        )
    }

    pub fn to_file(&self) -> WalkFile {
        WalkFile {
            dim: self.gs.dim,
            s_plus: self.gs.ints(),
            include_inverses: self.gs.include_inverses,
            self_loop: self.gs.self_loop,
            coins: self
                .coins()
                .into_iter()
                .map(|(h, m)| CoinEntry {
                    h: h.to_i64().expect("integral"),
                    matrix: matrix_to_pairs(&m),
                })
                .collect(),
            isotropy: None,
        }
    }
}

type Pairs = [[[f64; 2]; 2]; 2];

pub fn matrix_to_pairs(m: &Complex2Matrix) -> Pairs {
    let e = |i, j| {
        let z: C64 = m[(i, j)];
        [z.re, z.im]
    };
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

pub fn pairs_to_matrix(p: &Pairs) -> Complex2Matrix {
    Complex2Matrix::new(
        c(p[0][0][0], p[0][0][1]),
        c(p[0][1][0], p[0][1][1]),
        c(p[1][0][0], p[1][0][1]),
        c(p[1][1][0], p[1][1][1]),
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoinEntry {
    pub h: Vec<i64>,
    pub matrix: Pairs,
}

/// On-disk walk description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkFile {
    pub dim: usize,
    pub s_plus: Vec<Vec<i64>>,
    #[serde(default)]
    pub include_inverses: bool,
    #[serde(default)]
    pub self_loop: bool,
    pub coins: Vec<CoinEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub isotropy: Option<IsotropyDecl>,
}

impl WalkFile {
    pub fn to_walk(&self) -> Result<QuantumWalk> {
        let gs = GeneratingSet::new(
            self.dim,
            self.s_plus.iter().map(|h| IntVector::from_ints(h)).collect(),
            self.self_loop,
        )?;
        if self.include_inverses != gs.include_inverses {
            return Err(Error::Invalid(format!(
                "include_inverses is {} but S+ {} closed under negation",
                self.include_inverses,
                if gs.include_inverses { "is" } else { "is not" }
            )));
        }
        QuantumWalk::new(
            gs,
            self.coins
                .iter()
                .map(|e| (IntVector::from_ints(&e.h), pairs_to_matrix(&e.matrix)))
                .collect(),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitarityReport {
    /// ‖Σ A_h A_h† − I‖.
    pub normalization_left: f64,
    /// ‖Σ A_h† A_h − I‖.
    pub normalization_right: f64,
    /// Larger of ‖Σ A_h A_{h′}†‖ and ‖Σ A_{h′}† A_h‖ over pairs with h − h′ = key.
    pub offdiag_residuals: BTreeMap<IntVector, f64>,
}

impl UnitarityReport {
    pub fn normalization_residual(&self) -> f64 {
        self.normalization_left.max(self.normalization_right)
    }

    pub fn max_residual(&self) -> f64 {
        self.offdiag_residuals
            .values()
            .fold(self.normalization_residual(), |a, &b| a.max(b))
    }

    pub fn is_valid(&self, tol: f64) -> bool {
        self.max_residual() <= tol
    }
}

pub fn check_unitarity(w: &QuantumWalk) -> UnitarityReport {
    let coins = w.coins();
    let mut left = -identity2();
    let mut right = -identity2();
    for (_, a) in &coins {
        left += a * a.adjoint();
        right += a.adjoint() * a;
    }
    let mut sums: BTreeMap<IntVector, (Complex2Matrix, Complex2Matrix)> = BTreeMap::new();
    for (h, a) in &coins {
        for (hp, b) in &coins {
            if h == hp {
                continue;
            }
            let e = sums.entry(h - hp).or_insert((zero2(), zero2()));
            e.0 += a * b.adjoint();
            e.1 += b.adjoint() * a;
        }
    }
    UnitarityReport {
        normalization_left: frobenius(&left),
        normalization_right: frobenius(&right),
        offdiag_residuals: sums
            .into_iter()
            .map(|(k, (x, y))| (k, frobenius(&x).max(frobenius(&y))))
            .collect(),
    }
}

pub fn momentum_symbol(w: &QuantumWalk, k: &[f64]) -> Complex2Matrix {
    let mut out = zero2();
    for (h, a) in w.coins() {
        let phase: f64 = h.to_f64().iter().zip(k).map(|(x, y)| x * y).sum();
        out += a * C64::from_polar(1.0, phase);
    }
    out
}

/// Eigenphases ω₊ ≥ ω₋ of A_k.
pub fn dispersion(w: &QuantumWalk, k: &[f64], tol: f64) -> Result<(f64, f64)> {
    eigenphases(&momentum_symbol(w, k), tol)
}

pub const VELOCITY_STEP: f64 = 1e-5;

fn wrap(x: f64) -> f64 {
    let t = std::f64::consts::TAU;
    x - t * ((x + std::f64::consts::PI) / t).floor()
}

/// Eigenphases of A_k with their eigenvectors, ω₊ branch first.
fn branches(w: &QuantumWalk, k: &[f64]) -> [(f64, Vector2<C64>); 2] {
    let a = momentum_symbol(w, k);
    let (l1, l2) = eigenvalues2(&a);
    let (w1, w2) = (l1.arg(), l2.arg());
    let (hi, lo) = if w1 >= w2 { (l1, l2) } else { (l2, l1) };
    [(hi.arg(), eigenvector2(&a, hi)), (lo.arg(), eigenvector2(&a, lo))]
}

/// ∇ω± by central differences, following each branch by eigenvector overlap.
pub fn group_velocity(w: &QuantumWalk, k: &[f64], tol: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let (wp, wm) = dispersion(w, k, tol)?;
    let h = VELOCITY_STEP;
    if wrap(wp - wm).abs() < 10.0 * h {
        return Err(Error::DegeneratePoint);
    }
    let base = branches(w, k);
    let mut vp = vec![0.0; k.len()];
    let mut vm = vec![0.0; k.len()];
    for i in 0..k.len() {
        let mut shifted = [[0.0; 2]; 2];
        for (s, sign) in [1.0, -1.0].iter().enumerate() {
            let mut kk = k.to_vec();
            kk[i] += sign * h;
            let b = branches(w, &kk);
            let overlap = base[0].1.dotc(&b[0].1).norm();
            let cross = base[0].1.dotc(&b[1].1).norm();
            let (p, m) = if overlap >= cross { (b[0].0, b[1].0) } else { (b[1].0, b[0].0) };
            shifted[0][s] = p;
            shifted[1][s] = m;
        }
        vp[i] = wrap(shifted[0][0] - shifted[0][1]) / (2.0 * h);
        vm[i] = wrap(shifted[1][0] - shifted[1][1]) / (2.0 * h);
    }
    Ok((vp, vm))
}

/// Smallest admissible torus side for a walk whose steps have coordinates in [−r, r].
pub fn min_torus_side(w: &QuantumWalk) -> usize {
    2 * w.gs.max_coord() as usize + 1
}

fn check_torus(w: &QuantumWalk, n: usize) -> Result<()> {
    let required = min_torus_side(w);
    if n < required {
        return Err(Error::TorusTooSmall { n, required });
    }
    Ok(())
}

fn site_index(coords: &[i64], n: usize) -> usize {
    coords
        .iter()
        .fold(0usize, |acc, &x| acc * n + x.rem_euclid(n as i64) as usize)
}

fn site_coords(mut idx: usize, n: usize, dim: usize) -> Vec<i64> {
    let mut out = vec![0i64; dim];
    for i in (0..dim).rev() {
        out[i] = (idx % n) as i64;
        idx /= n;
    }
    out
}

/// Dense matrix of the walk on (Z_N)^d ⊗ C², basis index 2·site + spin.
pub fn torus_operator(w: &QuantumWalk, n: usize) -> Result<DMatrix<C64>> {
    check_torus(w, n)?;
    let d = w.dim();
    let sites = n.pow(d as u32);
    let coins: Vec<(Vec<i64>, Complex2Matrix)> = w
        .coins()
        .into_iter()
        .map(|(h, m)| (h.to_i64().expect("integral"), m))
        .collect();
    let mut op = DMatrix::<C64>::zeros(2 * sites, 2 * sites);
    for x in 0..sites {
        let xc = site_index_coords(x, n, d);
        for (h, a) in &coins {
            let y: Vec<i64> = xc.iter().zip(h).map(|(p, q)| p + q).collect();
            let yi = site_index(&y, n);
            for r in 0..2 {
                for s in 0..2 {
                    op[(2 * yi + r, 2 * x + s)] += a[(r, s)];
                }
            }
        }
    }
    Ok(op)
}

fn site_index_coords(x: usize, n: usize, d: usize) -> Vec<i64> {
    site_coords(x, n, d)
}

/// ‖U†U − I‖ (max entry) of a dense operator.
pub fn dense_unitarity_defect(u: &DMatrix<C64>) -> f64 {
    let p = u.adjoint() * u;
    let mut worst: f64 = 0.0;
    for i in 0..p.nrows() {
        for j in 0..p.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((p[(i, j)] - c(target, 0.0)).norm());
        }
    }
    worst
}

/// Sparse state on (Z_N)^d; sites are row-major flattened coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusState {
    pub n: usize,
    pub dim: usize,
    pub amplitudes: BTreeMap<usize, [C64; 2]>,
}

impl TorusState {
    pub fn single_site(n: usize, dim: usize, site: &[i64], spinor: [C64; 2]) -> Self {
        let norm = (spinor[0].norm_sqr() + spinor[1].norm_sqr()).sqrt();
        let s = [spinor[0] / norm, spinor[1] / norm];
        TorusState {
            n,
            dim,
            amplitudes: BTreeMap::from([(site_index(site, n), s)]),
        }
    }

    /// Normalised Gaussian envelope times a plane wave times a fixed spinor.
    pub fn gaussian(n: usize, dim: usize, center: &[f64], width: f64, momentum: &[f64], spinor: [C64; 2]) -> Self {
        let mut amplitudes = BTreeMap::new();
        for x in 0..n.pow(dim as u32) {
            let xc = site_coords(x, n, dim);
            let mut r2 = 0.0;
            let mut phase = 0.0;
            for i in 0..dim {
                // nearest periodic image of the centre
                let mut dx = xc[i] as f64 - center[i];
                dx -= n as f64 * (dx / n as f64).round();
                r2 += dx * dx;
                phase += momentum[i] * dx;
            }
            let env = (-r2 / (4.0 * width * width)).exp();
            if env < 1e-30 {
                continue;
            }
            let a = C64::from_polar(env, phase);
            amplitudes.insert(x, [spinor[0] * a, spinor[1] * a]);
        }
        let mut st = TorusState { n, dim, amplitudes };
        let norm = st.norm();
        for v in st.amplitudes.values_mut() {
            v[0] /= norm;
            v[1] /= norm;
        }
        st
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .values()
            .map(|v| v[0].norm_sqr() + v[1].norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn support(&self) -> Vec<Vec<i64>> {
        self.amplitudes
            .iter()
            .filter(|(_, v)| v[0].norm_sqr() + v[1].norm_sqr() > 0.0)
            .map(|(&k, _)| site_coords(k, self.n, self.dim))
            .collect()
    }

    pub fn probability(&self, site: &[i64]) -> f64 {
        self.amplitudes
            .get(&site_index(site, self.n))
            .map_or(0.0, |v| v[0].norm_sqr() + v[1].norm_sqr())
    }

    /// Mean position, each coordinate taken in [0, N).
    pub fn mean_position(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        let mut total = 0.0;
        for (&k, v) in &self.amplitudes {
            let p = v[0].norm_sqr() + v[1].norm_sqr();
            total += p;
            for (mi, x) in m.iter_mut().zip(site_coords(k, self.n, self.dim)) {
                *mi += p * x as f64;
            }
        }
        m.iter().map(|x| x / total).collect()
    }
}

/// `steps` applications of the walk, touching only occupied sites.
pub fn evolve(w: &QuantumWalk, state: &TorusState, steps: usize) -> Result<TorusState> {
    check_torus(w, state.n)?;
    if state.dim != w.dim() {
        return Err(Error::DimensionMismatch {
            expected: w.dim(),
            got: state.dim,
        });
    }
    let n = state.n;
    let d = state.dim;
    let sites = n.pow(d as u32);
    let coins: Vec<(Vec<i64>, Complex2Matrix)> = w
        .coins()
        .into_iter()
        .map(|(h, m)| (h.to_i64().expect("integral"), m))
        .collect();
    let mut scratch = vec![[c(0.0, 0.0); 2]; sites];
    let mut touched = vec![false; sites];
    let mut cur = state.amplitudes.clone();
    for _ in 0..steps {
        let mut order: Vec<usize> = Vec::new();
        for (&x, psi) in &cur {
            let xc = site_coords(x, n, d);
            for (h, a) in coins.iter() {
                let y: Vec<i64> = xc.iter().zip(h).map(|(p, q)| p + q).collect();
                let yi = site_index(&y, n);
                let out = a * Vector2::new(psi[0], psi[1]);
                scratch[yi][0] += out[0];
                scratch[yi][1] += out[1];
                if !touched[yi] {
                    touched[yi] = true;
                    order.push(yi);
                }
            }
        }
        order.sort_unstable();
        let mut next = BTreeMap::new();
        for yi in order {
            let v = scratch[yi];
            scratch[yi] = [c(0.0, 0.0); 2];
            touched[yi] = false;
            if v[0].norm_sqr() + v[1].norm_sqr() > 0.0 {
                next.insert(yi, v);
            }
        }
        cur = next;
    }
    Ok(TorusState {
        n,
        dim: d,
        amplitudes: cur,
    })
}
