//! Markov-type operators, Kesten spectral measures and spectral density functions.
//!
//! For a graph with edge labels `L`, the Markov-type operator acts by
//! `M f(u) = Σ_{(w,u)} L(w,u) f(w)`, so `<M δ_x, δ_y> = L(x,y)`. On a Cayley
//! lcmg of `z` this is right multiplication by `z`, and the spectral measure
//! of `M` at the basepoint has moments `<M^k δ_1, δ_1>`: weighted sums over
//! closed walks of length `k`.

use std::collections::HashMap;

use faer::{Mat, Side};
use num_complex::Complex64;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{Group, GroupElement, GroupModel, QuotientChain, QuotientElement};
use crate::lcmg::{cayley_ball_infinite, Lcmg};
use crate::ring::{RingElement, SymmetrizedSupport};

/// Eigenvalues closer than this multiple of the norm bound form one atom.
pub const ATOM_MERGE_RELATIVE: f64 = 1e-9;
/// Per-dimension multiple of the norm bound below which eigenvalues count as zero.
pub const KERNEL_RELATIVE: f64 = 1e-12;
/// Largest admissible asymmetry `|M_xy - conj(M_yx)|`, relative to the norm bound.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

/// Sparse Markov-type operator on `l2` of a finite vertex set.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkovOperator {
    /// `columns[x]` lists `(y, L(x,y))`, i.e. `M δ_x = Σ L(x,y) δ_y`.
    columns: Vec<Vec<(usize, Complex64)>>,
    basepoint: usize,
}

impl MarkovOperator {
    pub fn from_lcmg(g: &Lcmg) -> Self {
        let columns = (0..g.vertex_count()).map(|x| g.out_edges(x).to_vec()).collect();
        Self { columns, basepoint: g.basepoint() }
    }

    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    pub fn basepoint(&self) -> usize {
        self.basepoint
    }

    /// `<M δ_x, δ_y>`.
    pub fn entry(&self, x: usize, y: usize) -> Complex64 {
        self.columns[x]
            .iter()
            .find(|e| e.0 == y)
            .map_or_else(Complex64::zero, |e| e.1)
    }

    pub fn apply(&self, f: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::zero(); self.dim()];
        for (x, col) in self.columns.iter().enumerate() {
            if f[x].is_zero() {
                continue;
            }
            for &(y, l) in col {
                out[y] += l * f[x];
            }
        }
        out
    }

    pub fn is_real(&self) -> bool {
        self.columns.iter().flatten().all(|e| e.1.im == 0.0)
    }

    /// Max of the largest absolute row sum and column sum; bounds the operator norm.
    pub fn norm_bound(&self) -> f64 {
        let mut rows = vec![0.0f64; self.dim()];
        let mut col_max = 0.0f64;
        for col in &self.columns {
            let mut s = 0.0;
            for &(y, l) in col {
                rows[y] += l.norm();
                s += l.norm();
            }
            col_max = col_max.max(s);
        }
        rows.into_iter().fold(col_max, f64::max)
    }

    /// `max |<Mδ_x, δ_y> - conj(<Mδ_y, δ_x>)|` over all pairs.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for (x, col) in self.columns.iter().enumerate() {
            for &(y, l) in col {
                worst = worst.max((l - self.entry(y, x).conj()).norm());
            }
        }
        worst
    }

    /// Dense matrix with `A[y][x] = <M δ_x, δ_y>`.
    pub fn to_dense(&self) -> Mat<Complex64> {
        let mut a = Mat::<Complex64>::zeros(self.dim(), self.dim());
        for (x, col) in self.columns.iter().enumerate() {
            for &(y, l) in col {
                a[(y, x)] = l;
            }
        }
        a
    }

    /// `<M^k δ_b, δ_b>` for `k = 0..=k_max` at the basepoint `b`.
    pub fn closed_walk_moments(&self, k_max: usize) -> Vec<Complex64> {
        let mut f = vec![Complex64::zero(); self.dim()];
        f[self.basepoint] = Complex64::new(1.0, 0.0);
        let mut out = Vec::with_capacity(k_max + 1);
        out.push(f[self.basepoint]);
        for _ in 0..k_max {
            f = self.apply(&f);
            out.push(f[self.basepoint]);
        }
        out
    }
}

/// Operator of right multiplication by `π_n(z)` on `l2(G/K_n)`, with the
/// identity coset as basepoint. Cosets are indexed in enumeration order.
pub fn quotient_operator(
    chain: &QuotientChain,
    level: usize,
    z: &RingElement<GroupElement>,
    order_cap: usize,
) -> Result<MarkovOperator> {
    let sym = SymmetrizedSupport::from_element(z, chain.model())?;
    quotient_operator_from_support(chain, level, &sym, order_cap)
}

pub fn quotient_operator_from_support(
    chain: &QuotientChain,
    level: usize,
    sym: &SymmetrizedSupport<GroupElement>,
    order_cap: usize,
) -> Result<MarkovOperator> {
    let quotient = chain.quotient(level)?;
    let elements = quotient.enumerate(order_cap)?;
    let projected = sym.project(chain, level)?;
    let index: HashMap<&QuotientElement, usize> = elements.iter().enumerate().map(|(i, e)| (e, i)).collect();
    let mut columns = Vec::with_capacity(elements.len());
    for x in &elements {
        let mut col = Vec::with_capacity(projected.len());
        for (s, l) in projected.generators() {
            col.push((index[&quotient.multiply(x, s)?], *l));
        }
        col.sort_by_key(|e| e.0);
        columns.push(col);
    }
    Ok(MarkovOperator { columns, basepoint: 0 })
}

/// Closed-walk moments `k = 0..=k_max` of `Γ_{z,S}` at the identity, computed
/// on the ball of radius `⌈k_max/2⌉`. Every closed walk of length `k` stays
/// within distance `k/2` of the basepoint because `S` is symmetric.
pub fn walk_moments(
    model: &GroupModel,
    sym: &SymmetrizedSupport<GroupElement>,
    k_max: usize,
    moment_cap: usize,
) -> Result<Vec<Complex64>> {
    if k_max > moment_cap {
        return Err(Error::Resource { what: "moment exponent", requested: k_max, cap: moment_cap });
    }
    let radius = k_max.div_ceil(2);
    let ball = cayley_ball_infinite(model, sym, radius, radius.max(crate::DEFAULT_RADIUS_CAP))?;
    Ok(MarkovOperator::from_lcmg(&ball.graph).closed_walk_moments(k_max))
}

pub fn moment_by_walks(
    model: &GroupModel,
    sym: &SymmetrizedSupport<GroupElement>,
    k: usize,
    moment_cap: usize,
) -> Result<Complex64> {
    Ok(walk_moments(model, sym, k, moment_cap)?[k])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Atom {
    pub location: f64,
    pub mass: f64,
}

/// Atomic spectral measure `<E_B δ_b, δ_b>` of a finite self-adjoint operator.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KestenMeasure {
    /// Sorted by location.
    pub atoms: Vec<Atom>,
    /// Norm bound of the operator; all atoms lie in `[-bound, bound]`.
    pub bound: f64,
    /// Dimension of the operator.
    pub dim: usize,
    /// Raw eigenvalues in nondecreasing order, before merging.
    #[serde(skip)]
    pub eigenvalues: Vec<f64>,
}

/// Eigendecomposition of a finite Hermitian operator; atoms at eigenvalues
/// with mass `|<u_j, δ_b>|²`, near-degenerate eigenvalues merged.
pub fn kesten_measure(op: &MarkovOperator) -> Result<KestenMeasure> {
    let dim = op.dim();
    let bound = op.norm_bound();
    let asym = op.max_asymmetry();
    if asym > HERMITIAN_TOLERANCE * bound.max(1.0) {
        return Err(Error::Domain(format!("operator is not Hermitian: asymmetry {asym:e}")));
    }
    let b = op.basepoint();
    let diagnostics = || format!("dim {dim}, norm bound {bound:e}, asymmetry {asym:e}");
    let (eigenvalues, masses): (Vec<f64>, Vec<f64>) = if op.is_real() {
        let mut a = Mat::<f64>::zeros(dim, dim);
        for x in 0..dim {
            for &(y, l) in &op.columns[x] {
                a[(y, x)] = l.re;
            }
        }
        let evd = a
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Numeric(format!("eigensolver failed ({e:?}): {}", diagnostics())))?;
        let s = evd.S().column_vector();
        let u = evd.U();
        (0..dim).map(|j| (s[j], u[(b, j)] * u[(b, j)])).unzip()
    } else {
        let evd = op
            .to_dense()
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Numeric(format!("eigensolver failed ({e:?}): {}", diagnostics())))?;
        let s = evd.S().column_vector();
        let u = evd.U();
        (0..dim).map(|j| (s[j].re, u[(b, j)].norm_sqr())).unzip()
    };
    if eigenvalues.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numeric(format!("non-finite eigenvalue: {}", diagnostics())));
    }
    let atoms = merge_atoms(&eigenvalues, &masses, ATOM_MERGE_RELATIVE * bound);
    Ok(KestenMeasure { atoms, bound, dim, eigenvalues })
}

/// Groups sorted eigenvalues whose consecutive gaps are at most `tol`.
fn merge_atoms(eigenvalues: &[f64], masses: &[f64], tol: f64) -> Vec<Atom> {
    let mut atoms: Vec<Atom> = Vec::new();
    let mut start = 0;
    for j in 0..eigenvalues.len() {
        let last = j + 1 == eigenvalues.len() || eigenvalues[j + 1] - eigenvalues[j] > tol;
        if last {
            let range = start..j + 1;
            let mass: f64 = masses[range.clone()].iter().sum();
            let location = if mass > 0.0 {
                range.clone().map(|i| eigenvalues[i] * masses[i]).sum::<f64>() / mass
            } else {
                eigenvalues[range.clone()].iter().sum::<f64>() / range.len() as f64
            };
            atoms.push(Atom { location, mass });
            start = j + 1;
        }
    }
    atoms
}

impl KestenMeasure {
    pub fn from_atoms(mut atoms: Vec<Atom>, bound: f64, dim: usize) -> Self {
        atoms.sort_by(|a, b| a.location.total_cmp(&b.location));
        let eigenvalues = atoms.iter().map(|a| a.location).collect();
        Self { atoms, bound, dim, eigenvalues }
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum()
    }

    /// Right-continuous distribution function `μ((-∞, x])`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.atoms.iter().take_while(|a| a.location <= x).map(|a| a.mass).sum()
    }

    pub fn moment(&self, k: usize) -> f64 {
        self.atoms.iter().map(|a| a.mass * a.location.powi(k as i32)).sum()
    }

    pub fn min_location(&self) -> f64 {
        self.atoms.first().map_or(0.0, |a| a.location)
    }

    /// Atoms carrying at least `min_mass`.
    pub fn heavy_atoms(&self, min_mass: f64) -> impl Iterator<Item = &Atom> {
        self.atoms.iter().filter(move |a| a.mass >= min_mass)
    }
}

/// `F(λ) = μ([0, λ²])` for the spectral measure `μ` of `z = w·w*`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralDensityFunction {
    /// Atoms of `μ` on `[0, bound]` after clamping and kernel merging.
    pub atoms: Vec<Atom>,
    /// Eigenvalues at or below this count as zero.
    pub kernel_threshold: f64,
    pub bound: f64,
    pub dim: usize,
    /// Number of eigenvalues at or below the kernel threshold.
    pub kernel_dimension: usize,
}

impl SpectralDensityFunction {
    /// Eigenvalues in `[-1e-9·B, 0)` are clamped to zero; anything more
    /// negative means `z` was not positive semidefinite.
    pub fn from_measure(mu: &KestenMeasure) -> Result<Self> {
        let tol = ATOM_MERGE_RELATIVE * mu.bound;
        let min = mu.eigenvalues.first().copied().unwrap_or(0.0).min(mu.min_location());
        if min < -tol {
            return Err(Error::Numeric(format!(
                "spectral measure has mass at {min:e} < -{tol:e}: operator is not positive semidefinite"
            )));
        }
        let kernel_threshold = mu.dim as f64 * mu.bound * KERNEL_RELATIVE;
        let mut atoms: Vec<Atom> = Vec::with_capacity(mu.atoms.len());
        let mut kernel_mass = 0.0;
        for a in &mu.atoms {
            if a.location <= kernel_threshold {
                kernel_mass += a.mass;
            } else {
                atoms.push(*a);
            }
        }
        atoms.insert(0, Atom { location: 0.0, mass: kernel_mass });
        let kernel_dimension = mu.eigenvalues.iter().filter(|&&x| x <= kernel_threshold).count();
        Ok(Self { atoms, kernel_threshold, bound: mu.bound, dim: mu.dim, kernel_dimension })
    }

    /// `F(λ)`; atoms within the kernel threshold of `λ²` count as `≤ λ²`.
    pub fn eval(&self, lambda: f64) -> f64 {
        if lambda < 0.0 {
            return 0.0;
        }
        let cut = lambda * lambda + self.kernel_threshold;
        self.atoms.iter().take_while(|a| a.location <= cut).map(|a| a.mass).sum()
    }

    pub fn sample(&self, grid: &[f64]) -> Vec<f64> {
        grid.iter().map(|&l| self.eval(l)).collect()
    }

    /// l2-Betti number `F(0)`: the mass of the kernel.
    pub fn betti(&self) -> f64 {
        self.atoms[0].mass
    }

    /// `λ` values of the atoms of `F`, i.e. square roots of the atom locations.
    pub fn jump_points(&self, min_mass: f64) -> Vec<f64> {
        self.atoms.iter().filter(|a| a.mass >= min_mass).map(|a| a.location.sqrt()).collect()
    }

    pub fn to_csv(&self, grid: &[f64]) -> String {
        let mut out = String::from("lambda,F\n");
        for &l in grid {
            out.push_str(&format!("{l},{}\n", self.eval(l)));
        }
        out
    }
}

/// Spectral density function of `w` on the level-`n` quotient: builds
/// `π_n(w w*)`, its operator, measure and distribution function.
pub fn quotient_sdf(
    chain: &QuotientChain,
    level: usize,
    w: &RingElement<GroupElement>,
    order_cap: usize,
) -> Result<(KestenMeasure, SpectralDensityFunction)> {
    let z = w.times_adjoint(chain.model())?;
    let op = quotient_operator(chain, level, &z, order_cap)?;
    let mu = kesten_measure(&op)?;
    let sdf = SpectralDensityFunction::from_measure(&mu)?;
    Ok((mu, sdf))
}

/// The unit `1·e` of the group ring.
pub fn unit<G: Group>(group: &G) -> RingElement<G::Elem> {
    RingElement::monomial(group.identity(), Complex64::new(1.0, 0.0))
}
