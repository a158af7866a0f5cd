//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use lcmg_spectra::convergence::{run_chain, ChainOptions, ConvergenceReport};
use lcmg_spectra::group::Group;
use lcmg_spectra::lcmg::{cayley_lcmg_finite, is_witness, isomorphism, metric_d, InfiniteCayley};
use lcmg_spectra::oracle::{default_resolution, torus_moments, TorusSymbol};
use lcmg_spectra::spectral::{kesten_measure, walk_moments, MarkovOperator, SpectralDensityFunction};
use lcmg_spectra::{
    Complex64, GroupElement, GroupModel, Lcmg, QuotientChain, RingElement, SymmetrizedSupport,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

type Outcome = Result<String, String>;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn one_minus_t() -> (GroupModel, RingElement<GroupElement>) {
    let g = GroupModel::lattice(1);
    let w = RingElement::from_terms([(g.identity(), c(1.0)), (g.element_i64(&[1]).unwrap(), c(-1.0))]);
    (g, w)
}

fn central_binomial(k: u64) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * (k + i) as f64 / i as f64)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn moment_triangle() -> Outcome {
    let (g, w) = one_minus_t();
    let z = w.times_adjoint(&g).map_err(err)?;
    let sym = SymmetrizedSupport::from_element(&z, &g).map_err(err)?;
    let walk = walk_moments(&g, &sym, 10, 20).map_err(err)?;
    let torus = torus_moments(&TorusSymbol::new(&g, &w).map_err(err)?, 10, default_resolution(1), 20).map_err(err)?;
    let mut worst_delta: f64 = 0.0;
    for k in 0..=10u64 {
        let exact = central_binomial(k);
        let trace = z.power_trace(k as usize, &g, 20).map_err(err)?;
        let wk = walk[k as usize];
        for (name, v) in [("walk", wk), ("trace", trace)] {
            ensure((v.re - exact).abs() <= 1e-9 * exact && v.im.abs() <= 1e-9 * exact, || {
                format!("k={k}: {name} moment {v} vs C(2k,k) = {exact}")
            })?;
        }
        let t = torus[k as usize];
        ensure((t.value - wk.re).abs() <= t.refinement_delta.max(1e-12 * exact), || {
            format!("k={k}: torus {} vs walk {} exceeds delta {:e}", t.value, wk.re, t.refinement_delta)
        })?;
        ensure(t.refinement_delta <= 1e-8 * exact, || format!("k={k}: quadrature delta {:e}", t.refinement_delta))?;
        worst_delta = worst_delta.max(t.refinement_delta / exact);
    }
    Ok(format!("k=0..10 equal C(2k,k); max relative quadrature delta {worst_delta:.1e}"))
}

fn check_stability(report: &ConvergenceReport, label: &str) -> Result<Vec<String>, String> {
    ensure(report.failures.is_empty(), || format!("{label}: failures {:?}", report.failures))?;
    let walk = report.limit.walk_moments.as_ref().ok_or("no walk moments")?;
    let mut radii = Vec::new();
    for rec in &report.levels {
        ensure(rec.certified_radius == rec.word_bound, || {
            format!("{label} m={:?}: certified {:?} but word bound {:?}", rec.modulus, rec.certified_radius, rec.word_bound)
        })?;
        let r = rec.certified_radius.map_or(-1, |r| r as i64);
        for k in 0..walk.len() {
            if k as i64 <= r {
                let rel = (rec.moments[k] - walk[k]).abs() / walk[k].abs().max(1.0);
                ensure(rel <= 1e-9, || {
                    format!("{label} m={:?} k={k}: {} vs limit {} ({rel:e})", rec.modulus, rec.moments[k], walk[k])
                })?;
            }
        }
        radii.push(format!("{}{}", r, if rec.radius_capped { "+" } else { "" }));
    }
    Ok(radii)
}

fn moment_stability() -> Outcome {
    let (g, w) = one_minus_t();
    let chain = QuotientChain::powers(g, 2, 4).map_err(err)?;
    let opts = ChainOptions { k_moments: 10, r_max: 6, ..ChainOptions::default() };
    let z_report = run_chain(&chain, &w, &[0, 1, 2, 3], &[1.0], &opts).map_err(err)?;
    let z_radii = check_stability(&z_report, "Z")?;

    let h = GroupModel::Heisenberg;
    let w = RingElement::from_terms([
        (h.identity(), c(1.0)),
        (h.element_i64(&[1, 0, 0]).unwrap(), c(2.0)),
        (h.element_i64(&[0, 1, 0]).unwrap(), c(3.0)),
    ]);
    let chain = QuotientChain::powers(h, 2, 4).map_err(err)?;
    let opts = ChainOptions { k_moments: 10, r_max: 4, ..ChainOptions::default() };
    let h_report = run_chain(&chain, &w, &[0, 1, 2, 3], &[1.0], &opts).map_err(err)?;
    let h_radii = check_stability(&h_report, "Heisenberg")?;
    Ok(format!(
        "certified radii = word bounds: Z m=2..16 [{}], H3 m=2..16 [{}]",
        z_radii.join(","),
        h_radii.join(",")
    ))
}

fn integers_chain() -> Result<ConvergenceReport, String> {
    let (g, w) = one_minus_t();
    let chain = QuotientChain::powers(g, 2, 10).map_err(err)?;
    let grid: Vec<f64> = (0..101).map(|i| 0.05 + 1.95 * i as f64 / 100.0).collect();
    let opts = ChainOptions { k_moments: 4, ..ChainOptions::default() };
    let levels: Vec<usize> = (0..10).collect();
    run_chain(&chain, &w, &levels, &grid, &opts).map_err(err)
}

fn sdf_convergence() -> Outcome {
    let report = integers_chain()?;
    ensure(report.failures.is_empty(), || format!("failures {:?}", report.failures))?;
    let filtered = &report.limit.continuity_grid;
    ensure(filtered.len() == 101, || format!("continuity filter removed points: atoms {:?}", report.limit.atoms))?;
    let arcsin = |l: f64| 2.0 / PI * (l / 2.0).min(1.0).asin();
    let deviation = |m: u64| -> Result<f64, String> {
        let rec = report.levels.iter().find(|r| r.modulus == Some(m)).ok_or(format!("no level m={m}"))?;
        Ok(report
            .grid
            .iter()
            .zip(&rec.sdf)
            .filter(|(l, _)| filtered.contains(l))
            .map(|(l, f)| (f - arcsin(*l)).abs())
            .fold(0.0, f64::max))
    };
    let d256 = deviation(256)?;
    let d1024 = deviation(1024)?;
    ensure(d256 <= 0.05, || format!("max deviation at m=256 is {d256}"))?;
    ensure(d1024 <= 0.02, || format!("max deviation at m=1024 is {d1024}"))?;
    // the quadrature oracle agrees with the closed form
    let oracle = report.limit.oracle_sdf.as_ref().ok_or("no oracle")?;
    let gap = report.grid.iter().zip(oracle).map(|(l, o)| (o.value - arcsin(*l)).abs()).fold(0.0, f64::max);
    ensure(gap <= 1e-3, || format!("torus oracle off the arcsine law by {gap}"))?;
    Ok(format!("max |F_n - (2/π)asin(λ/2)|: {d256:.5} at m=256, {d1024:.5} at m=1024"))
}

fn betti_convergence() -> Outcome {
    let report = integers_chain()?;
    for rec in &report.levels {
        let m = rec.modulus.unwrap() as f64;
        ensure(rec.kernel_dimension == 1 && (rec.betti - 1.0 / m).abs() <= 1e-12, || {
            format!("m={m}: betti {} kernel {}", rec.betti, rec.kernel_dimension)
        })?;
    }
    ensure(report.limit.oracle_betti == Some(0.0), || format!("limit betti {:?}", report.limit.oracle_betti))?;
    ensure(report.betti_line().ends_with("→ 0 (limit 0: PASS)"), || report.betti_line())?;

    let g = GroupModel::lattice(1);
    let chain = QuotientChain::powers(g.clone(), 2, 10).map_err(err)?;
    let levels: Vec<usize> = (0..10).collect();
    let opts = ChainOptions { k_moments: 2, r_max: 2, ..ChainOptions::default() };
    let zero = run_chain(&chain, &RingElement::zero(), &levels, &[0.0, 1.0], &opts).map_err(err)?;
    let unit = RingElement::monomial(g.identity(), c(1.0));
    let id = run_chain(&chain, &unit, &levels, &[0.0, 1.0], &opts).map_err(err)?;
    ensure(zero.levels.len() == 10 && zero.levels.iter().all(|r| r.betti == 1.0), || "w = 0 betti".into())?;
    ensure(id.levels.len() == 10 && id.levels.iter().all(|r| r.betti == 0.0), || "w = 1 betti".into())?;
    Ok(format!("{}; w=0 gives 1, w=1 gives 0 at all 10 levels", report.betti_line()))
}

fn element_strategy(model: GroupModel) -> impl Strategy<Value = RingElement<GroupElement>> {
    let arity = model.arity();
    let coord = -2i64..=2;
    let term = (prop::collection::vec(coord, arity), -3i32..=3, -2i32..=2);
    prop::collection::vec(term, 1..4).prop_map(move |terms| {
        RingElement::from_terms(terms.into_iter().map(|(g, re, im)| {
            (model.element_i64(&g).unwrap(), Complex64::new(re as f64, 0.5 * im as f64))
        }))
    })
}

/// Same graph with vertices permuted by `perm` (old index -> new index).
fn relabel(g: &Lcmg, perm: &[usize]) -> Lcmg {
    let mut vertices = vec![Vec::new(); g.vertex_count()];
    for (old, v) in g.vertices().iter().enumerate() {
        vertices[perm[old]] = v.clone();
    }
    let edges: Vec<_> = g.edges().map(|(u, v, l)| (perm[u], perm[v], l)).collect();
    Lcmg::new(vertices, perm[g.basepoint()], edges).unwrap()
}

fn structural_case(
    model: &GroupModel,
    w: &RingElement<GroupElement>,
    level: usize,
    shuffle: &[usize],
) -> Result<usize, TestCaseError> {
    let mut seen = 0;
    let chain = QuotientChain::powers(model.clone(), 2, level + 1).unwrap();
    // a self-adjoint z that is not of the form w w*
    let plain = w.hermitian_part(model).unwrap();
    for (z, psd) in [(w.times_adjoint(model).unwrap(), true), (plain, false)] {
        let sym = SymmetrizedSupport::from_element(&z, model).unwrap();
        let cayley = cayley_lcmg_finite(&chain, level, &sym, 20_000).unwrap();
        let g = &cayley.graph;
        seen += g.vertex_count();
        prop_assert!(g.is_self_involutive());
        let op = MarkovOperator::from_lcmg(g);
        let bound = op.norm_bound();
        prop_assert!(op.max_asymmetry() <= 1e-12 * bound.max(1.0));
        let mu = kesten_measure(&op).unwrap();
        prop_assert!((mu.total_mass() - 1.0).abs() <= 1e-9);
        if psd {
            let min = mu.eigenvalues[0];
            prop_assert!(min >= -1e-9 * bound, "min eigenvalue {} bound {}", min, bound);
            let sdf = SpectralDensityFunction::from_measure(&mu).unwrap();
            let top = bound.sqrt() + 0.5;
            let grid: Vec<f64> = (0..1000).map(|i| top * i as f64 / 999.0).collect();
            let f = sdf.sample(&grid);
            prop_assert!(f.windows(2).all(|p| p[0] <= p[1]));
            prop_assert!(grid.iter().zip(&f).all(|(l, v)| sdf.eval(l + 1e-13 * l.max(1.0)) == *v));
            prop_assert!((f[999] - 1.0).abs() <= 1e-9);
        }

        // isomorphism is an equivalence relation on relabelled copies
        let n = g.vertex_count();
        let p1: Vec<usize> = (0..n).map(|i| shuffle[i % shuffle.len()] % n).collect::<Vec<_>>();
        let perm_a = permutation_from_keys(&p1);
        let perm_b = permutation_from_keys(&p1.iter().rev().copied().collect::<Vec<_>>());
        let a = relabel(g, &perm_a);
        let b = relabel(&a, &perm_b);
        let fa = isomorphism(g, g).expect("reflexive");
        prop_assert!(is_witness(g, g, &fa));
        let gb = isomorphism(g, &a).expect("relabelled copy");
        let ba = isomorphism(&a, g).expect("symmetric");
        prop_assert!(is_witness(&a, g, &ba));
        let ab = isomorphism(&a, &b).expect("second copy");
        let composed: Vec<usize> = gb.iter().map(|&x| ab[x]).collect();
        prop_assert!(is_witness(g, &b, &composed), "transitive");
    }
    Ok(seen)
}

/// Permutation sorting indices by `(key, index)`.
fn permutation_from_keys(keys: &[usize]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by_key(|&i| (keys[i], i));
    let mut perm = vec![0; keys.len()];
    for (new, &old) in order.iter().enumerate() {
        perm[old] = new;
    }
    perm
}

fn structural_invariants() -> Outcome {
    let models = [GroupModel::lattice(1), GroupModel::lattice(2), GroupModel::Heisenberg];
    let vertices = std::cell::Cell::new(0usize);
    let mut cases = 0;
    for (i, model) in models.iter().enumerate() {
        let config = Config { cases: 32, failure_persistence: None, ..Config::default() };
        let mut runner = TestRunner::new_with_rng(config, proptest::test_runner::TestRng::deterministic_rng(
            proptest::test_runner::RngAlgorithm::ChaCha,
        ));
        let max_level: usize = [5, 3, 3][i];
        let strategy = (element_strategy(model.clone()), 0..max_level, prop::collection::vec(0usize..1000, 1..32));
        runner
            .run(&strategy, |(w, level, shuffle)| {
                vertices.set(vertices.get() + structural_case(model, &w, level, &shuffle)?);
                Ok(())
            })
            .map_err(|e| format!("{}: {e}", model.name()))?;
        cases += 32;
    }
    Ok(format!(
        "{cases} generated elements over Z, Z^2, H3 ({} graph vertices): involutive, Hermitian, PSD, masses, SDF, isomorphism",
        vertices.get()
    ))
}

fn metric_schedule() -> Outcome {
    let (g, w) = one_minus_t();
    let z = w.times_adjoint(&g).map_err(err)?;
    let sym = SymmetrizedSupport::from_element(&z, &g).map_err(err)?;
    let infinite = InfiniteCayley::new(g.clone(), sym.clone());
    let chain = QuotientChain::powers(g, 2, 5).map_err(err)?;
    let mut previous = f64::INFINITY;
    let mut values = Vec::new();
    for level in 0..5 {
        let m = chain.modulus(level).map_err(err)?.unwrap();
        let cayley = cayley_lcmg_finite(&chain, level, &sym, 20_000).map_err(err)?;
        let d = metric_d(&cayley, &infinite, 6).map_err(err)?;
        for r in 0..=6u64 {
            let close = d.value <= 1.0 / (r as f64 + 1.0);
            ensure(close == (m > 2 * r + 1), || format!("m={m} r={r}: D = {} ({:?})", d.value, d.agree_through))?;
        }
        ensure(d.value <= previous, || format!("D increased at m={m}"))?;
        previous = d.value;
        values.push(format!("1/{}", d.denominator()));
    }
    Ok(format!("D for m=2..32: {} (last two capped at r=6)", values.join(", ")))
}

fn main() -> ExitCode {
    let criteria: [(&str, Duration, fn() -> Outcome); 6] = [
        ("moment triangle", Duration::from_secs(5), moment_triangle),
        ("moment stability on quotients", Duration::from_secs(60), moment_stability),
        ("pointwise SDF convergence", Duration::from_secs(60), sdf_convergence),
        ("Betti convergence", Duration::from_secs(60), betti_convergence),
        ("structural invariants", Duration::from_secs(30), structural_invariants),
        ("ball metric schedule", Duration::from_secs(10), metric_schedule),
    ];
    let mut failed = 0;
    for (i, (name, budget, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > *budget => Err(format!("{detail}; took {elapsed:.2?}, budget {budget:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS [{}] {name} ({:.2}s): {detail}", i + 1, elapsed.as_secs_f64()),
            Err(why) => {
                failed += 1;
                println!("FAIL [{}] {name} ({:.2}s): {why}", i + 1, elapsed.as_secs_f64());
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
