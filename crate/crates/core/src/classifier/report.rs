//! Classification report: JSON, a summary table, and derived dispersion constants.

use std::fmt::Write;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::families::{build_family_walk, Chirality, FamilyParams};
use super::{Classification, ExclusionMethod, Feasibility};
use crate::walk_engine::{dispersion, QuantumWalk};
use crate::{Error, Result};

/// Momentum range for the linear fit of ω₊ near k = 0.
pub const SLOPE_K_MIN: f64 = 1e-3;
pub const SLOPE_K_MAX: f64 = 1e-2;
const SLOPE_SAMPLES: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlopeFit {
    /// Linear coefficient of ω₊ = a|k| + b|k|² per direction.
    pub slopes: Vec<f64>,
    pub mean: f64,
    /// (max − min) / mean over directions.
    pub relative_spread: f64,
    /// Same spread for a straight line with intercept, which absorbs the |k|² term into the slope.
    pub straight_line_spread: f64,
}

fn spread(v: &[f64]) -> (f64, f64) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    (mean, (hi - lo) / mean.abs())
}

/// Slope of ω₊(|k|u) at k = 0, fitted over |k| ∈ [SLOPE_K_MIN, SLOPE_K_MAX] for each direction u.
pub fn dispersion_slope(walk: &QuantumWalk, directions: &[Vec<f64>]) -> Result<SlopeFit> {
    if directions.is_empty() {
        return Err(Error::Invalid("no directions".into()));
    }
    let mut slopes = Vec::with_capacity(directions.len());
    let mut straight = Vec::with_capacity(directions.len());
    for u in directions {
        let n = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut samples = Vec::with_capacity(SLOPE_SAMPLES);
        for i in 0..SLOPE_SAMPLES {
            let t = SLOPE_K_MIN + (SLOPE_K_MAX - SLOPE_K_MIN) * i as f64 / (SLOPE_SAMPLES - 1) as f64;
            let k: Vec<f64> = u.iter().map(|x| t * x / n).collect();
            samples.push((t, dispersion(walk, &k, 1e-9)?.0));
        }
        let x = DMatrix::from_fn(SLOPE_SAMPLES, 2, |i, j| samples[i].0.powi(j as i32 + 1));
        let y = DVector::from_iterator(SLOPE_SAMPLES, samples.iter().map(|s| s.1));
        let coef = x.clone().svd(true, true).solve(&y, 1e-300).map_err(|e| Error::Invalid(e.into()))?;
        slopes.push(coef[0]);
        let m = SLOPE_SAMPLES as f64;
        let (sx, sy, sxx, sxy) = samples
            .iter()
            .fold((0.0, 0.0, 0.0, 0.0), |a, (t, w)| (a.0 + t, a.1 + w, a.2 + t * t, a.3 + t * w));
        straight.push((m * sxy - sx * sy) / (m * sxx - sx * sx));
    }
    let (mean, relative_spread) = spread(&slopes);
    Ok(SlopeFit {
        relative_spread,
        straight_line_spread: spread(&straight).1,
        mean,
        slopes,
    })
}

/// Gaussian random unit directions in `d` dimensions.
pub fn random_directions(d: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let v: Vec<f64> = (0..d).map(|_| rng.sample(rand_distr::StandardNormal)).collect();
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.into_iter().map(|x| x / n).collect()
        })
        .collect()
}

pub fn weyl_slope(ch: Chirality, directions: usize, seed: u64) -> Result<SlopeFit> {
    let w = build_family_walk(&FamilyParams::Weyl { chirality: ch })?;
    dispersion_slope(&w, &random_directions(3, directions, seed))
}

pub fn to_json(c: &Classification) -> Result<String> {
    serde_json::to_string_pretty(c).map_err(|e| Error::Parse(e.to_string()))
}

fn method_name(m: ExclusionMethod) -> &'static str {
    match m {
        ExclusionMethod::NonSpanning => "non-spanning",
        ExclusionMethod::TernarySubgroup => "ternary subgroup",
        ExclusionMethod::UniqueDifference => "unique difference",
        ExclusionMethod::NoFaithfulSpinRep => "no faithful spin rep",
        ExclusionMethod::NumericalInfeasibility => "numerically infeasible",
    }
}

/// Human-readable table of the classification.
pub fn summary_table(c: &Classification) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "dimension {}: {} candidate graphs", c.dimension, c.candidates);
    let _ = writeln!(s, "{:<28} {:>6}", "exclusion", "count");
    for m in [
        ExclusionMethod::NonSpanning,
        ExclusionMethod::TernarySubgroup,
        ExclusionMethod::UniqueDifference,
        ExclusionMethod::NoFaithfulSpinRep,
        ExclusionMethod::NumericalInfeasibility,
    ] {
        let _ = writeln!(s, "{:<28} {:>6}", method_name(m), c.certificates_by(m).count());
    }
    let feasible = c.searched.iter().filter(|x| matches!(x.outcome, Feasibility::Feasible { .. })).count();
    let _ = writeln!(s, "{:<28} {:>6}", "feasible", feasible);
    let _ = writeln!(s, "{:<28} {:>6}", "inconclusive", c.inconclusive.len());
    let graphs: Vec<String> = c.admitted_graphs.iter().map(|g| g.to_string()).collect();
    let _ = writeln!(s, "admitted graphs: {}", if graphs.is_empty() { "none".into() } else { graphs.join(", ") });
    let _ = writeln!(s, "{:<28} {:<22} {:>9} {:>7}", "walk family", "isotropy", "witnesses", "points");
    for w in &c.walks {
        let _ = writeln!(
            s,
            "{:<28} {:<22} {:>9} {:>7}",
            w.family.family_label(),
            w.isotropy,
            w.witnesses.len(),
            w.matched_points
        );
    }
    let _ = writeln!(s, "unmatched feasible points: {}", c.unmatched_points);
    if !c.covered_by_reduction.is_empty() {
        let _ = writeln!(s, "covered by reduction: {}", c.covered_by_reduction.join(", "));
    }
    for (k, v) in &c.derived {
        let _ = writeln!(s, "{k} = {v:.12}");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shift_walk_has_unit_slope() {
        let w = build_family_walk(&FamilyParams::Line {
            n: 1.0,
            m: 0.0,
            v: crate::matrix_kernel::identity2(),
            inverses: false,
        })
        .unwrap();
        let fit = dispersion_slope(&w, &[vec![1.0]]).unwrap();
        assert!((fit.mean - 1.0).abs() < 1e-9, "{}", fit.mean);
    }

    #[test]
    fn weyl_slope_is_isotropic() {
        for ch in [Chirality::Plus, Chirality::Minus] {
            let fit = weyl_slope(ch, 20, 1).unwrap();
            assert!(fit.relative_spread <= 1e-3, "{fit:?}");
            assert!((fit.mean - 1.0).abs() < 1e-4, "{}", fit.mean);
            assert!(fit.straight_line_spread > fit.relative_spread);
        }
    }
}
