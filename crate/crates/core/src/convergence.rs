//! Quotient-chain experiments: spectral density functions and Betti numbers
//! of `w` on `G/K_n`, compared against limit data.
//!
//! Two mechanisms are checked. Moments are exact: once the quotient ball of
//! radius `r` is isomorphic to the ball in `G`, the quotient moments of order
//! `k ≤ r` equal the walk moments of the infinite graph. Distribution
//! functions are numeric: for lattices they are compared with the Fourier
//! oracle at grid points away from atoms of the limit, otherwise successive
//! levels are compared with each other.

use num_complex::Complex64;
use num_integer::Integer;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupModel, QuotientChain};
use crate::lcmg::{cayley_lcmg_finite, metric_d, word_length_radius, InfiniteCayley};
use crate::oracle::{default_resolution, oracle_atoms, torus_sdf, OracleValue, TorusSymbol};
use crate::ring::{RingElement, SymmetrizedSupport};
use crate::spectral::{kesten_measure, walk_moments, MarkovOperator, SpectralDensityFunction};

/// Environment variable capping the worker threads used for levels.
pub const THREADS_ENV: &str = "LCMG_SPECTRA_THREADS";

/// Relative tolerance for a quotient moment to count as equal to the limit.
pub const MOMENT_STABILITY_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct ChainOptions {
    /// Highest moment order `K`.
    pub k_moments: usize,
    /// Largest ball radius compared against the infinite graph.
    pub r_max: usize,
    pub order_cap: usize,
    pub moment_cap: usize,
    /// Grid points this close to an atom of the limit are skipped.
    pub exclusion_delta: f64,
    /// Minimum mass for a jump to count as an atom.
    pub jump_threshold: f64,
    /// Per-axis quadrature resolution; `None` picks the default for the dimension.
    pub oracle_resolution: Option<usize>,
    /// Allowed distance between the last Betti estimate and the limit.
    pub betti_tolerance: f64,
    /// Allowed increase of the SDF deviation over the last three levels.
    pub deviation_jitter: f64,
}

impl Default for ChainOptions {
    fn default() -> Self {
        Self {
            k_moments: 10,
            r_max: 6,
            order_cap: crate::DEFAULT_ORDER_CAP,
            moment_cap: crate::DEFAULT_MOMENT_CAP,
            exclusion_delta: 1e-3,
            jump_threshold: 0.01,
            oracle_resolution: None,
            betti_tolerance: 0.02,
            deviation_jitter: 0.005,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelRecord {
    pub level: usize,
    pub modulus: Option<u64>,
    /// `|G/K_n|`.
    pub order: u64,
    /// Vertices of the Cayley lcmg reachable from the identity.
    pub vertices: usize,
    /// Largest radius with quotient ball isomorphic to the ball in `G`.
    pub certified_radius: Option<usize>,
    /// True when `certified_radius` hit `r_max`.
    pub radius_capped: bool,
    pub metric: f64,
    /// Radius bound from the shortest word in `S` lying in `K_n`.
    pub word_bound: Option<usize>,
    /// `μ_n^{(k)}` for `k = 0..=K`.
    pub moments: Vec<f64>,
    /// `F_n` on the requested grid.
    pub sdf: Vec<f64>,
    pub betti: f64,
    pub kernel_dimension: usize,
    /// `λ` locations of atoms of `F_n` with mass at least the jump threshold.
    pub heavy_atoms: Vec<f64>,
    pub warning: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitData {
    /// Closed-walk moments `k = 0..=K` of the infinite Cayley lcmg.
    pub walk_moments: Option<Vec<f64>>,
    /// Fourier oracle on the requested grid (lattices only).
    pub oracle_sdf: Option<Vec<OracleValue>>,
    pub oracle_betti: Option<f64>,
    /// Atoms of the limit (known or estimated) used to filter the grid.
    pub atoms: Vec<f64>,
    /// Requested grid minus points near `atoms`.
    pub continuity_grid: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelDeviation {
    pub level: usize,
    /// Max of `|F_n - F|` over the continuity grid.
    pub max_deviation: f64,
    /// `"oracle"` or `"previous level"`.
    pub against: &'static str,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostics {
    pub sdf_deviation: Vec<LevelDeviation>,
    pub betti_sequence: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Failure {
    pub stage: String,
    pub level: Option<usize>,
    pub message: String,
    pub resource: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub model: String,
    pub w: Value,
    pub grid: Vec<f64>,
    pub k_moments: usize,
    pub r_max: usize,
    /// `"verified"` against an independent oracle, or `"consistent"` when only
    /// internal comparisons were possible.
    pub status: &'static str,
    pub levels: Vec<LevelRecord>,
    pub limit: LimitData,
    pub diagnostics: Diagnostics,
    pub checks: Vec<Check>,
    pub failures: Vec<Failure>,
}

impl ConvergenceReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn has_resource_failure(&self) -> bool {
        self.failures.iter().any(|f| f.resource)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    /// Per-level SDF table; includes the oracle column when available.
    pub fn level_csv(&self, index: usize) -> String {
        let rec = &self.levels[index];
        let oracle = self.limit.oracle_sdf.as_ref();
        let mut out = String::from(if oracle.is_some() { "lambda,F,F_oracle\n" } else { "lambda,F\n" });
        for (i, (l, f)) in self.grid.iter().zip(&rec.sdf).enumerate() {
            match oracle {
                Some(o) => out.push_str(&format!("{l},{f},{}\n", o[i].value)),
                None => out.push_str(&format!("{l},{f}\n")),
            }
        }
        out
    }

    /// `betti: 1/2, 1/4, ..., 1/1024 → 0 (limit 0: PASS)`.
    pub fn betti_line(&self) -> String {
        let parts: Vec<String> = self.levels.iter().map(betti_fraction).collect();
        let seq = if parts.len() > 4 {
            format!("{}, {}, ..., {}", parts[0], parts[1], parts[parts.len() - 1])
        } else {
            parts.join(", ")
        };
        let check = self.checks.iter().find(|c| c.name == "betti limit");
        let verdict = check.map_or("n/a", |c| if c.passed { "PASS" } else { "FAIL" });
        match self.limit.oracle_betti {
            Some(b) => format!("betti: {seq} → {} (limit {}: {verdict})", format_number(b), format_number(b)),
            None => format!("betti: {seq} (consistent across last two levels: {verdict})"),
        }
    }

    /// Aligned-column summary.
    pub fn to_text(&self) -> String {
        let mut out = format!("model: {}\nstatus: {}\n\n", self.model, self.status);
        let header = ["level", "modulus", "order", "radius", "word", "betti", "kernel", "max|dF|"];
        let mut rows: Vec<Vec<String>> = vec![header.iter().map(|s| s.to_string()).collect()];
        for rec in &self.levels {
            let dev = self.diagnostics.sdf_deviation.iter().find(|d| d.level == rec.level);
            let radius = match rec.certified_radius {
                None => "-".to_string(),
                Some(r) if rec.radius_capped => format!(">={r}"),
                Some(r) => r.to_string(),
            };
            rows.push(vec![
                rec.level.to_string(),
                rec.modulus.map_or("-".into(), |m| m.to_string()),
                rec.order.to_string(),
                radius,
                rec.word_bound.map_or("-".into(), |r| r.to_string()),
                betti_fraction(rec),
                rec.kernel_dimension.to_string(),
                dev.map_or("-".into(), |d| format!("{:.6}", d.max_deviation)),
            ]);
        }
        let widths: Vec<usize> =
            (0..header.len()).map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0)).collect();
        for row in &rows {
            let cells: Vec<String> = row.iter().zip(&widths).map(|(s, w)| format!("{s:>w$}")).collect();
            out.push_str(cells.join("  ").trim_end());
            out.push('\n');
        }
        out.push('\n');
        for c in &self.checks {
            out.push_str(&format!("{}: {} ({})\n", c.name, if c.passed { "PASS" } else { "FAIL" }, c.detail));
        }
        out.push_str(&self.betti_line());
        out.push('\n');
        for f in &self.failures {
            let at = f.level.map_or(String::new(), |l| format!(" at level {l}"));
            out.push_str(&format!("failed{at} ({}): {}\n", f.stage, f.message));
        }
        out
    }
}

fn betti_fraction(rec: &LevelRecord) -> String {
    let n = rec.vertices as u64;
    let k = rec.kernel_dimension as u64;
    if n > 0 && (rec.betti - k as f64 / n as f64).abs() <= 1e-9 {
        if k == 0 {
            return "0".into();
        }
        let g = k.gcd(&n);
        if g == n {
            return (k / n).to_string();
        }
        return format!("{}/{}", k / g, n / g);
    }
    format_number(rec.betti)
}

fn format_number(x: f64) -> String {
    if (x - x.round()).abs() < 1e-12 {
        format!("{}", x.round() as i64)
    } else {
        format!("{x:.6}")
    }
}

/// Drops grid points within `delta` of any atom.
pub fn continuity_grid(atoms: &[f64], grid: &[f64], delta: f64) -> Vec<f64> {
    grid.iter().copied().filter(|l| atoms.iter().all(|a| (l - a).abs() > delta)).collect()
}

/// Runs `f` on a pool sized by `LCMG_SPECTRA_THREADS`, or the global pool.
pub fn with_thread_cap<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .ok()
                .filter(|&n| n >= 1)
                .ok_or_else(|| Error::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
        Err(_) => Ok(f()),
    }
}

fn failure(stage: &str, level: Option<usize>, e: &Error) -> Failure {
    Failure { stage: stage.into(), level, message: e.to_string(), resource: e.is_resource() }
}

fn run_level(
    chain: &QuotientChain,
    level: usize,
    sym: &SymmetrizedSupport<GroupElement>,
    infinite: &InfiniteCayley,
    grid: &[f64],
    opts: &ChainOptions,
) -> Result<LevelRecord> {
    let order = chain.order(level)?;
    if order > opts.order_cap as u128 {
        return Err(Error::Resource {
            what: "quotient order",
            requested: usize::try_from(order).unwrap_or(usize::MAX),
            cap: opts.order_cap,
        });
    }
    let cayley = cayley_lcmg_finite(chain, level, sym, opts.order_cap)?;
    let metric = metric_d(&cayley, infinite, opts.r_max)?;
    let word_bound = word_length_radius(chain, level, sym, opts.r_max)?;
    let mu = kesten_measure(&MarkovOperator::from_lcmg(&cayley.graph))?;
    let sdf = SpectralDensityFunction::from_measure(&mu)?;
    Ok(LevelRecord {
        level,
        modulus: chain.modulus(level)?,
        order: order as u64,
        vertices: cayley.graph.vertex_count(),
        certified_radius: metric.agree_through,
        radius_capped: metric.capped,
        metric: metric.value,
        word_bound,
        moments: (0..=opts.k_moments).map(|k| mu.moment(k)).collect(),
        sdf: sdf.sample(grid),
        betti: sdf.betti(),
        kernel_dimension: sdf.kernel_dimension,
        heavy_atoms: sdf.jump_points(opts.jump_threshold),
        warning: cayley.warning(),
    })
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::Config("lambda grid must be finite and nonnegative".into()));
    }
    if grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Config("lambda grid must be sorted".into()));
    }
    Ok(())
}

/// Runs the chain at the given levels (indices into `chain`, strictly
/// increasing). Failures at individual levels are recorded and the report
/// covers the levels that completed; only invalid arguments are errors.
pub fn run_chain(
    chain: &QuotientChain,
    w: &RingElement<GroupElement>,
    levels: &[usize],
    grid: &[f64],
    opts: &ChainOptions,
) -> Result<ConvergenceReport> {
    validate_grid(grid)?;
    if levels.is_empty() {
        return Err(Error::Config("no levels requested".into()));
    }
    if levels.windows(2).any(|p| p[0] >= p[1]) {
        return Err(Error::Config("levels must be strictly increasing".into()));
    }
    if let Some(&bad) = levels.iter().find(|&&l| l >= chain.len()) {
        return Err(Error::Range { what: "quotient level", index: bad, len: chain.len() });
    }
    if opts.k_moments > opts.moment_cap {
        return Err(Error::Resource { what: "moment exponent", requested: opts.k_moments, cap: opts.moment_cap });
    }
    if opts.r_max > crate::DEFAULT_RADIUS_CAP {
        return Err(Error::Resource { what: "ball radius", requested: opts.r_max, cap: crate::DEFAULT_RADIUS_CAP });
    }
    let model = chain.model();
    let z = w.times_adjoint(model)?;
    let sym = SymmetrizedSupport::from_element(&z, model)?;
    let infinite = InfiniteCayley::new(model.clone(), sym.clone());
    let mut failures = Vec::new();

    let walk = match walk_moments(model, &sym, opts.k_moments, opts.moment_cap) {
        Ok(m) => Some(m.iter().map(|c: &Complex64| c.re).collect::<Vec<f64>>()),
        Err(e) => {
            failures.push(failure("walk moments", None, &e));
            None
        }
    };
    let mut limit = LimitData { walk_moments: walk, oracle_sdf: None, oracle_betti: None, atoms: vec![], continuity_grid: vec![] };
    if let GroupModel::Lattice { dim } = model {
        let oracle = TorusSymbol::new(model, w).and_then(|symbol| {
            let n = opts.oracle_resolution.unwrap_or_else(|| default_resolution(*dim));
            let values = torus_sdf(&symbol, grid, n)?;
            let betti = torus_sdf(&symbol, &[0.0], n)?[0].value;
            let (lo, hi) = (grid.first().copied().unwrap_or(0.0), grid.last().copied().unwrap_or(0.0));
            let atoms = if grid.is_empty() {
                vec![]
            } else {
                oracle_atoms(&symbol, lo, hi, opts.exclusion_delta, opts.jump_threshold, n)?
            };
            Ok((values, betti, atoms))
        });
        match oracle {
            Ok((values, betti, atoms)) => {
                limit.oracle_sdf = Some(values);
                limit.oracle_betti = Some(betti);
                limit.atoms = atoms;
            }
            Err(e) => failures.push(failure("oracle", None, &e)),
        }
    }

    let outcomes: Vec<Result<LevelRecord>> = with_thread_cap(|| {
        levels
            .par_iter()
            .map(|&level| run_level(chain, level, &sym, &infinite, grid, opts))
            .collect()
    })?;
    let mut records = Vec::with_capacity(levels.len());
    for (&level, outcome) in levels.iter().zip(outcomes) {
        match outcome {
            Ok(r) => records.push(r),
            Err(e) => failures.push(failure("level", Some(level), &e)),
        }
    }

    let lattice_oracle = limit.oracle_sdf.is_some();
    if !lattice_oracle {
        limit.atoms = stable_atoms(&records, opts.exclusion_delta);
    }
    limit.continuity_grid = continuity_grid(&limit.atoms, grid, opts.exclusion_delta);
    let keep: Vec<usize> = grid
        .iter()
        .enumerate()
        .filter(|(_, l)| limit.atoms.iter().all(|a| (*l - a).abs() > opts.exclusion_delta))
        .map(|(i, _)| i)
        .collect();

    let mut sdf_deviation = Vec::new();
    for (i, rec) in records.iter().enumerate() {
        let (reference, against): (Option<Vec<f64>>, &'static str) = match &limit.oracle_sdf {
            Some(o) => (Some(o.iter().map(|v| v.value).collect()), "oracle"),
            None => (i.checked_sub(1).map(|p| records[p].sdf.clone()), "previous level"),
        };
        if let Some(reference) = reference {
            let max_deviation = keep.iter().map(|&j| (rec.sdf[j] - reference[j]).abs()).fold(0.0, f64::max);
            sdf_deviation.push(LevelDeviation { level: rec.level, max_deviation, against });
        }
    }
    let diagnostics = Diagnostics { sdf_deviation, betti_sequence: records.iter().map(|r| r.betti).collect() };
    let checks = build_checks(&records, &limit, &diagnostics, opts);

    Ok(ConvergenceReport {
        model: model.name(),
        w: w.to_json(model),
        grid: grid.to_vec(),
        k_moments: opts.k_moments,
        r_max: opts.r_max,
        status: if lattice_oracle { "verified" } else { "consistent" },
        levels: records,
        limit,
        diagnostics,
        checks,
        failures,
    })
}

/// Heavy atoms of the last level that also appear, within `delta`, at the
/// level before it.
fn stable_atoms(records: &[LevelRecord], delta: f64) -> Vec<f64> {
    match records {
        [.., prev, last] => last
            .heavy_atoms
            .iter()
            .copied()
            .filter(|a| prev.heavy_atoms.iter().any(|b| (a - b).abs() <= delta))
            .collect(),
        _ => vec![],
    }
}

fn radius_key(r: Option<usize>) -> i64 {
    r.map_or(-1, |r| r as i64)
}

fn build_checks(records: &[LevelRecord], limit: &LimitData, diag: &Diagnostics, opts: &ChainOptions) -> Vec<Check> {
    let mut checks = Vec::new();
    if let Some(walk) = &limit.walk_moments {
        for (k, &target) in walk.iter().enumerate() {
            let certified: Vec<&LevelRecord> =
                records.iter().filter(|r| radius_key(r.certified_radius) >= k as i64).collect();
            let worst = certified
                .iter()
                .map(|r| (r.moments[k] - target).abs() / target.abs().max(1.0))
                .fold(0.0, f64::max);
            let detail = if certified.is_empty() {
                format!("limit {target}; no level certified through radius {k}")
            } else {
                let levels: Vec<String> = certified.iter().map(|r| r.level.to_string()).collect();
                format!("limit {target}; levels {} agree to {worst:.1e}", levels.join(","))
            };
            checks.push(Check {
                name: format!("moment k={k} stability"),
                passed: worst <= MOMENT_STABILITY_TOLERANCE,
                detail,
            });
        }
    }

    let radii: Vec<i64> = records.iter().map(|r| radius_key(r.certified_radius)).collect();
    checks.push(Check {
        name: "certified radius monotone".into(),
        passed: radii.windows(2).all(|p| p[0] <= p[1]),
        detail: format!("{radii:?}"),
    });
    let mismatched: Vec<String> = records
        .iter()
        .filter(|r| r.certified_radius != r.word_bound)
        .map(|r| format!("level {}: {:?} vs {:?}", r.level, r.certified_radius, r.word_bound))
        .collect();
    checks.push(Check {
        name: "certified radius matches word bound".into(),
        passed: mismatched.is_empty(),
        detail: if mismatched.is_empty() { "all levels".into() } else { mismatched.join("; ") },
    });

    if let (Some(b), Some(last)) = (limit.oracle_betti, records.last()) {
        let gap = (last.betti - b).abs();
        checks.push(Check {
            name: "betti limit".into(),
            passed: gap <= opts.betti_tolerance,
            detail: format!("last {:.6} vs limit {b:.6}, tolerance {}", last.betti, opts.betti_tolerance),
        });
    } else if let [.., prev, last] = records {
        let gap = (last.betti - prev.betti).abs();
        checks.push(Check {
            name: "betti limit".into(),
            passed: gap <= opts.betti_tolerance,
            detail: format!("last two levels {:.6}, {:.6}, tolerance {}", prev.betti, last.betti, opts.betti_tolerance),
        });
    }

    if limit.oracle_sdf.is_some() {
        if let [.., a, _, c] = diag.sdf_deviation.as_slice() {
            checks.push(Check {
                name: "sdf deviation nonincreasing".into(),
                passed: c.max_deviation <= a.max_deviation + opts.deviation_jitter,
                detail: format!(
                    "level {} {:.6} vs level {} {:.6}, jitter {}",
                    c.level, c.max_deviation, a.level, a.max_deviation, opts.deviation_jitter
                ),
            });
        }
    }
    checks
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Group;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn one_minus_t() -> (GroupModel, RingElement<GroupElement>) {
        let g = GroupModel::lattice(1);
        let w = RingElement::from_terms([(g.identity(), c(1.0)), (g.element_i64(&[1]).unwrap(), c(-1.0))]);
        (g, w)
    }

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn continuity_grid_examples() {
        assert!(continuity_grid(&[1.0], &[], 1e-3).is_empty());
        assert_eq!(continuity_grid(&[1.0], &[0.5, 0.9995, 1.0, 1.5], 1e-3), vec![0.5, 1.5]);
        assert_eq!(continuity_grid(&[], &[0.5, 1.0], 1e-3), vec![0.5, 1.0]);
    }

    #[test]
    fn integers_one_minus_t() {
        let (g, w) = one_minus_t();
        let chain = QuotientChain::powers(g, 2, 6).unwrap();
        let lam = grid(0.0, 2.0, 101);
        let opts = ChainOptions { k_moments: 6, ..ChainOptions::default() };
        let report = run_chain(&chain, &w, &[0, 1, 2, 3, 4, 5], &lam, &opts).unwrap();
        assert!(report.failures.is_empty());
        assert_eq!(report.status, "verified");
        assert!(report.limit.atoms.is_empty(), "{:?}", report.limit.atoms);
        for rec in &report.levels {
            let m = rec.modulus.unwrap();
            assert_eq!(rec.kernel_dimension, 1);
            assert!((rec.betti - 1.0 / m as f64).abs() < 1e-12);
            // balls agree exactly while m > 2r + 1
            let expected = (m >= 2).then(|| ((m - 2) / 2).min(6) as usize);
            assert_eq!(rec.certified_radius, expected, "m={m}");
            assert_eq!(rec.word_bound, expected);
        }
        assert!(report.passed(), "{}", report.to_text());
        assert!(report.betti_line().starts_with("betti: 1/2, 1/4, ..., 1/64 → 0 (limit 0: PASS)"));
        let dev = &report.diagnostics.sdf_deviation;
        assert!(dev.last().unwrap().max_deviation < 0.05);
        // walk moments are central binomials
        assert_eq!(report.limit.walk_moments.as_ref().unwrap()[3], 20.0);
    }

    #[test]
    fn moments_stable_beyond_certified_radius() {
        // a closed walk of length k stays within k/2 of the basepoint, so
        // quotient moments agree up to k = 2r + 1
        let (g, w) = one_minus_t();
        let chain = QuotientChain::powers(g, 2, 4).unwrap();
        let opts = ChainOptions { k_moments: 16, r_max: 10, ..ChainOptions::default() };
        let report = run_chain(&chain, &w, &[3], &[1.0], &opts).unwrap();
        let rec = &report.levels[0];
        let r = rec.certified_radius.unwrap();
        let walk = report.limit.walk_moments.as_ref().unwrap();
        for k in 0..=2 * r + 1 {
            assert!((rec.moments[k] - walk[k]).abs() <= 1e-9 * walk[k], "k={k}");
        }
        assert!((rec.moments[2 * r + 2] - walk[2 * r + 2]).abs() > 1.0);
    }

    #[test]
    fn trivial_elements() {
        let g = GroupModel::lattice(1);
        let chain = QuotientChain::powers(g.clone(), 2, 3).unwrap();
        let lam = [0.0, 0.5, 1.0, 1.5];
        let zero = run_chain(&chain, &RingElement::zero(), &[0, 1, 2], &lam, &ChainOptions::default()).unwrap();
        for rec in &zero.levels {
            assert_eq!(rec.betti, 1.0);
            assert!(rec.sdf.iter().all(|&f| f == 1.0));
        }
        let unit = RingElement::monomial(g.identity(), c(1.0));
        let id = run_chain(&chain, &unit, &[0, 1, 2], &lam, &ChainOptions::default()).unwrap();
        assert_eq!(id.limit.continuity_grid, vec![0.0, 0.5, 1.5]);
        for rec in &id.levels {
            assert_eq!(rec.betti, 0.0);
            assert_eq!(rec.sdf, vec![0.0, 0.0, 1.0, 1.0]);
        }
        assert!(id.diagnostics.sdf_deviation.iter().all(|d| d.max_deviation == 0.0));
    }

    #[test]
    fn heisenberg_is_consistent_only() {
        let h = GroupModel::Heisenberg;
        let w = RingElement::from_terms([
            (h.identity(), c(1.0)),
            (h.element_i64(&[1, 0, 0]).unwrap(), c(2.0)),
            (h.element_i64(&[0, 1, 0]).unwrap(), c(3.0)),
        ]);
        let chain = QuotientChain::powers(h, 2, 3).unwrap();
        let opts = ChainOptions { k_moments: 6, r_max: 3, ..ChainOptions::default() };
        let report = run_chain(&chain, &w, &[0, 1, 2], &grid(0.0, 6.0, 31), &opts).unwrap();
        assert_eq!(report.status, "consistent");
        assert!(report.limit.oracle_sdf.is_none());
        let stability: Vec<&Check> = report.checks.iter().filter(|c| c.name.starts_with("moment")).collect();
        assert_eq!(stability.len(), 7);
        assert!(stability.iter().all(|c| c.passed), "{}", report.to_text());
        assert!(report.checks.iter().find(|c| c.name == "certified radius matches word bound").unwrap().passed);
        assert_eq!(report.diagnostics.sdf_deviation.len(), 2);
    }

    #[test]
    fn partial_failure_keeps_completed_levels() {
        let (g, w) = one_minus_t();
        let chain = QuotientChain::powers(g, 2, 5).unwrap();
        let opts = ChainOptions { order_cap: 8, k_moments: 2, ..ChainOptions::default() };
        let report = run_chain(&chain, &w, &[0, 1, 2, 3, 4], &[0.5, 1.0], &opts).unwrap();
        assert_eq!(report.levels.len(), 3);
        assert_eq!(report.failures.len(), 2);
        assert!(report.has_resource_failure());
        assert!(report.to_text().contains("failed at level 3"));
    }

    #[test]
    fn argument_validation() {
        let (g, w) = one_minus_t();
        let chain = QuotientChain::powers(g, 2, 2).unwrap();
        let o = ChainOptions::default();
        assert!(run_chain(&chain, &w, &[0, 2], &[1.0], &o).is_err());
        assert!(run_chain(&chain, &w, &[1, 0], &[1.0], &o).is_err());
        assert!(run_chain(&chain, &w, &[0], &[1.0, 0.5], &o).is_err());
        assert!(run_chain(&chain, &w, &[], &[1.0], &o).is_err());
        let big_k = ChainOptions { k_moments: 21, ..ChainOptions::default() };
        assert!(matches!(run_chain(&chain, &w, &[0], &[1.0], &big_k), Err(Error::Resource { .. })));
    }

    #[test]
    fn renderings_are_deterministic() {
        let (g, w) = one_minus_t();
        let chain = QuotientChain::powers(g, 2, 3).unwrap();
        let lam = grid(0.0, 2.0, 5);
        let a = run_chain(&chain, &w, &[0, 1, 2], &lam, &ChainOptions::default()).unwrap();
        let b = run_chain(&chain, &w, &[0, 1, 2], &lam, &ChainOptions::default()).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(a.to_text(), b.to_text());
        let csv = a.level_csv(2);
        assert!(csv.starts_with("lambda,F,F_oracle\n0,0.12"), "{csv}");
        assert!(a.to_text().contains("betti: 1/2, 1/4, 1/8 → 0 (limit 0: FAIL)"));
    }
}
