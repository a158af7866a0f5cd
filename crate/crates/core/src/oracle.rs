//! Fourier ground truth for `G = Z^d`.
//!
//! On `l2(Z^d)` right multiplication by `w` is unitarily equivalent to
//! multiplication by its symbol `ŵ(θ) = Σ λ_g e^{i g·θ}` on the torus, so the
//! spectral density function is the normalized measure of
//! `{θ : |ŵ(θ)|² ≤ λ²}` and the moments of `w w*` are `∫ |ŵ|^{2k}`. Both are
//! evaluated by midpoint quadrature on a tensor grid; every value carries the
//! change observed when halving the resolution.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupModel};
use crate::ring::RingElement;

pub const MAX_TORUS_DIM: usize = 3;

/// Default quadrature resolution per axis.
pub fn default_resolution(dim: usize) -> usize {
    match dim {
        0 | 1 => 4096,
        2 => 512,
        _ => 96,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OracleValue {
    pub value: f64,
    /// `|value(N) - value(N/2)|`.
    pub refinement_delta: f64,
}

/// Trigonometric polynomial `ŵ(θ) = Σ λ_g e^{i g·θ}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusSymbol {
    dim: usize,
    terms: Vec<(Vec<f64>, Complex64)>,
}

impl TorusSymbol {
    pub fn new(model: &GroupModel, w: &RingElement<GroupElement>) -> Result<Self> {
        let dim = match model {
            GroupModel::Lattice { dim } => *dim,
            other => {
                return Err(Error::Domain(format!("Fourier oracle needs a lattice model, got {}", other.name())))
            }
        };
        if dim > MAX_TORUS_DIM {
            return Err(Error::Resource { what: "torus dimension", requested: dim, cap: MAX_TORUS_DIM });
        }
        let mut terms = Vec::with_capacity(w.len());
        for (g, c) in w.terms() {
            model.check(g)?;
            let GroupElement::Lattice(v) = g else { unreachable!("checked") };
            let coords = v
                .iter()
                .map(|x| x.to_f64().filter(|f| f.abs() < 1e15))
                .collect::<Option<Vec<f64>>>()
                .ok_or_else(|| Error::Domain("lattice coordinate too large for the Fourier oracle".into()))?;
            terms.push((coords, *c));
        }
        Ok(Self { dim, terms })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, theta: &[f64]) -> Complex64 {
        self.terms.iter().fold(Complex64::zero(), |acc, (g, c)| {
            let phase: f64 = g.iter().zip(theta).map(|(a, b)| a * b).sum();
            acc + c * Complex64::from_polar(1.0, phase)
        })
    }

    /// `|ŵ|²` at every midpoint node of the `n^d` grid.
    fn squared_samples(&self, n: usize) -> Vec<f64> {
        let total = n.pow(self.dim as u32);
        let mut out = Vec::with_capacity(total);
        let mut idx = vec![0usize; self.dim];
        let mut theta = vec![0.0; self.dim];
        for _ in 0..total {
            for (t, &i) in theta.iter_mut().zip(&idx) {
                *t = 2.0 * PI * (i as f64 + 0.5) / n as f64;
            }
            out.push(self.eval(&theta).norm_sqr());
            for i in idx.iter_mut().rev() {
                *i += 1;
                if *i < n {
                    break;
                }
                *i = 0;
            }
        }
        out
    }
}

fn check_resolution(n: usize) -> Result<()> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::Config(format!("quadrature resolution must be even and at least 2, got {n}")));
    }
    Ok(())
}

/// `F(λ)` on a sorted grid, approximated by the fraction of nodes with `|ŵ|² ≤ λ²`.
pub fn torus_sdf(symbol: &TorusSymbol, grid: &[f64], n: usize) -> Result<Vec<OracleValue>> {
    check_resolution(n)?;
    if grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Config("lambda grid must be sorted".into()));
    }
    let cdf = |n: usize| {
        let mut s = symbol.squared_samples(n);
        s.sort_by(f64::total_cmp);
        let total = s.len() as f64;
        grid.iter()
            .map(|&l| if l < 0.0 { 0.0 } else { s.partition_point(|&x| x <= l * l) as f64 / total })
            .collect::<Vec<f64>>()
    };
    let fine = cdf(n);
    let coarse = cdf(n / 2);
    Ok(fine
        .into_iter()
        .zip(coarse)
        .map(|(value, c)| OracleValue { value, refinement_delta: (value - c).abs() })
        .collect())
}

/// `∫ |ŵ(θ)|^{2k} dθ/(2π)^d`, the `k`-th moment of the spectral measure of `w w*`.
pub fn torus_moment(symbol: &TorusSymbol, k: usize, n: usize, moment_cap: usize) -> Result<OracleValue> {
    if k > moment_cap {
        return Err(Error::Resource { what: "moment exponent", requested: k, cap: moment_cap });
    }
    check_resolution(n)?;
    let mean = |n: usize| {
        let s = symbol.squared_samples(n);
        s.iter().map(|x| x.powi(k as i32)).sum::<f64>() / s.len() as f64
    };
    let value = mean(n);
    Ok(OracleValue { value, refinement_delta: (value - mean(n / 2)).abs() })
}

/// Moments `0..=k_max` at one resolution pair, sharing the symbol samples.
pub fn torus_moments(symbol: &TorusSymbol, k_max: usize, n: usize, moment_cap: usize) -> Result<Vec<OracleValue>> {
    if k_max > moment_cap {
        return Err(Error::Resource { what: "moment exponent", requested: k_max, cap: moment_cap });
    }
    check_resolution(n)?;
    let fine = symbol.squared_samples(n);
    let coarse = symbol.squared_samples(n / 2);
    let mean = |s: &[f64], k: usize| s.iter().map(|x| x.powi(k as i32)).sum::<f64>() / s.len() as f64;
    Ok((0..=k_max)
        .map(|k| {
            let value = mean(&fine, k);
            OracleValue { value, refinement_delta: (value - mean(&coarse, k)).abs() }
        })
        .collect())
}

/// Estimated atoms of the limit distribution function on `[lo, hi]`.
///
/// The interval is swept with windows of width `delta/8`; a window is flagged
/// when the oracle mass inside it reaches `jump_threshold` at both `n` and
/// `n/2`, and runs of adjacent flagged windows collapse to their midpoint. A
/// window this narrow keeps square-root edges of the density (mass about
/// `(2/π)·sqrt(delta/8)` < 0.01 for the default `delta`) below the threshold.
pub fn oracle_atoms(
    symbol: &TorusSymbol,
    lo: f64,
    hi: f64,
    delta: f64,
    jump_threshold: f64,
    n: usize,
) -> Result<Vec<f64>> {
    check_resolution(n)?;
    if delta.is_nan() || delta <= 0.0 || lo.is_nan() || hi.is_nan() || lo > hi {
        return Err(Error::Config(format!("bad atom scan window [{lo}, {hi}] with delta {delta}")));
    }
    let sorted = |n: usize| {
        let mut s = symbol.squared_samples(n);
        s.sort_by(f64::total_cmp);
        s
    };
    let fine = sorted(n);
    let coarse = sorted(n / 2);
    let cdf = |s: &[f64], l: f64| if l < 0.0 { 0.0 } else { s.partition_point(|&x| x <= l * l) as f64 / s.len() as f64 };
    let h = delta / 16.0;
    let start = (lo - delta).max(0.0);
    let steps = ((hi + delta - start) / h).ceil() as usize;
    let mut atoms = Vec::new();
    let mut run: Option<(f64, f64)> = None;
    for i in 0..=steps {
        let l = start + i as f64 * h;
        let flagged = [&fine, &coarse].iter().all(|s| cdf(s, l + h) - cdf(s, l - h) >= jump_threshold);
        run = match (run, flagged) {
            (None, true) => Some((l, l)),
            (Some((a, _)), true) => Some((a, l)),
            (Some((a, b)), false) => {
                atoms.push(0.5 * (a + b));
                None
            }
            (None, false) => None,
        };
    }
    if let Some((a, b)) = run {
        atoms.push(0.5 * (a + b));
    }
    Ok(atoms)
}
