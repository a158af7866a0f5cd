//! `lcmg-spectra`: spectral density functions of group-ring elements on
//! finite quotients, from the command line.

mod config;
mod expr;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lcmg_spectra::convergence::{run_chain, ChainOptions};
use lcmg_spectra::lcmg::{cayley_ball_infinite, cayley_lcmg_finite, metric_d, MetricValue};
use lcmg_spectra::oracle::{default_resolution, torus_moments, torus_sdf, TorusSymbol};
use lcmg_spectra::spectral::{kesten_measure, walk_moments, MarkovOperator, SpectralDensityFunction};
use lcmg_spectra::{Error, GroupModel, InfiniteCayley, Result, SymmetrizedSupport, DEFAULT_MOMENT_CAP, DEFAULT_ORDER_CAP};
use serde_json::json;

use config::{ConfigFile, ElementSpec, GridSpec};

#[derive(Parser)]
#[command(name = "lcmg-spectra", version, about = "Spectral density functions and l2-Betti numbers via Cayley graphs of finite quotients")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Moment triangle: closed walks, group-ring traces and (for lattices) the Fourier oracle.
    Moments(Common),
    /// Run a quotient chain and compare against limit data.
    Converge(Common),
    /// Compare a quotient Cayley graph with the infinite one, ball by ball.
    Graph(GraphArgs),
    /// Spectral density function of `w` on one quotient.
    Sdf(Common),
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum Format {
    #[default]
    Text,
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Against {
    Infinite,
    #[value(name = "self")]
    Itself,
}

#[derive(Args)]
struct Common {
    /// JSON experiment config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// lattice:d, heisenberg or finite (with a table in the config).
    #[arg(long)]
    model: Option<String>,
    /// Group-ring element w, e.g. "1 - t"; the operator is z = w w*.
    #[arg(long)]
    w: Option<String>,
    /// Self-adjoint z given directly.
    #[arg(long)]
    z: Option<String>,
    /// Number of levels for a powers schedule.
    #[arg(long)]
    levels: Option<usize>,
    /// Base of a powers schedule.
    #[arg(long)]
    base: Option<u64>,
    /// Single modulus instead of a schedule.
    #[arg(long)]
    modulus: Option<u64>,
    /// Level index into the schedule (sdf).
    #[arg(long)]
    level: Option<usize>,
    /// Lambda grid min:max:count.
    #[arg(long)]
    grid: Option<String>,
    /// Highest moment order.
    #[arg(long)]
    k: Option<usize>,
    /// Largest ball radius compared.
    #[arg(long)]
    radius: Option<usize>,
    #[arg(long)]
    order_cap: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Perturbs the trace column (for exercising the failure exit code).
    #[arg(long, hide = true)]
    inject_fault: bool,
}

#[derive(Args)]
struct GraphArgs {
    #[command(flatten)]
    common: Common,
    /// Compare against the infinite Cayley graph or the quotient itself.
    #[arg(long, value_enum, default_value = "infinite")]
    against: Against,
}

impl Common {
    fn resolve(&self) -> Result<ConfigFile> {
        let file = match &self.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        let flags = ConfigFile {
            model: self.model.clone(),
            w: self.w.clone().map(ElementSpec::Expr),
            z: self.z.clone().map(ElementSpec::Expr),
            levels: self.levels,
            base: self.base,
            modulus: self.modulus,
            level: self.level,
            grid: self.grid.clone().map(GridSpec::Text),
            k: self.k,
            radius: self.radius,
            order_cap: self.order_cap,
            out: self.out.clone(),
            ..ConfigFile::default()
        };
        Ok(flags.or(file))
    }

    fn format(&self, cfg: &ConfigFile) -> Result<Format> {
        if let Some(f) = self.format {
            return Ok(f);
        }
        match cfg.format.as_deref() {
            None | Some("text") => Ok(Format::Text),
            Some("json") => Ok(Format::Json),
            Some("csv") => Ok(Format::Csv),
            Some(other) => Err(Error::Config(format!("unknown format {other:?}"))),
        }
    }
}

/// How a command finished when it did not hit an error outright.
enum Outcome {
    Pass,
    /// A check failed.
    Fail,
    /// Partial results were written, but some level hit a resource cap.
    ResourceCap,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Resource { .. } => 3,
        Error::Numeric(_) => 2,
        _ => 1,
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Config(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))
}

/// Integers print as integers; everything else in shortest round-trip form.
fn fmt_value(x: f64) -> String {
    if x.is_finite() && (x - x.round()).abs() <= 1e-9 * x.abs().max(1.0) && x.abs() < 1e15 {
        format!("{}", x.round() as i64)
    } else {
        format!("{x}")
    }
}

/// `k/n` in lowest terms when `x` is that ratio, otherwise `x` itself.
fn fraction(x: f64, k: usize, n: usize) -> String {
    if n == 0 || (x - k as f64 / n as f64).abs() > 1e-9 {
        return fmt_value(x);
    }
    let (mut a, mut b) = (k, n);
    while b != 0 {
        (a, b) = (b, a % b);
    }
    match (k / a.max(1), n / a.max(1)) {
        (0, _) => "0".into(),
        (p, 1) => p.to_string(),
        (p, q) => format!("{p}/{q}"),
    }
}

fn aligned(rows: &[Vec<String>]) -> String {
    let cols = rows.first().map_or(0, Vec::len);
    let widths: Vec<usize> = (0..cols).map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for row in rows {
        let cells: Vec<String> = row.iter().zip(&widths).map(|(s, w)| format!("{s:>w$}")).collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}

fn cmd_moments(args: &Common) -> Result<Outcome> {
    let cfg = args.resolve()?;
    let format = args.format(&cfg)?;
    let model = cfg.model()?;
    let k_max = cfg.k.unwrap_or(10);
    let z = cfg.z(&model)?;
    let sym = SymmetrizedSupport::from_element(&z, &model)?;
    let walk = walk_moments(&model, &sym, k_max, DEFAULT_MOMENT_CAP)?;
    let mut trace = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        trace.push(z.power_trace(k, &model, DEFAULT_MOMENT_CAP)?.re);
    }
    if args.inject_fault {
        for t in trace.iter_mut().skip(1) {
            *t += 1.0;
        }
    }
    // the Fourier column needs w: it integrates |w^|^(2k)
    let torus = match (&model, cfg.w(&model)?, &cfg.z) {
        (GroupModel::Lattice { dim }, Some(w), None) => {
            Some(torus_moments(&TorusSymbol::new(&model, &w)?, k_max, default_resolution(*dim), DEFAULT_MOMENT_CAP)?)
        }
        _ => None,
    };

    let mut passed = true;
    let mut rows = vec![vec!["k".to_string(), "walk".into(), "trace".into(), "torus".into()]];
    let mut json_rows = Vec::new();
    let mut csv = String::from("k,walk,trace,torus,torus_delta\n");
    for k in 0..=k_max {
        let w = walk[k].re;
        let scale = w.abs().max(1.0);
        let mut ok = (w - trace[k]).abs() <= 1e-9 * scale;
        let (tv, td) = match &torus {
            Some(t) => {
                ok &= (t[k].value - w).abs() <= t[k].refinement_delta + 1e-9 * scale;
                (Some(t[k].value), Some(t[k].refinement_delta))
            }
            None => (None, None),
        };
        passed &= ok;
        rows.push(vec![k.to_string(), fmt_value(w), fmt_value(trace[k]), tv.map_or("-".into(), fmt_value)]);
        json_rows.push(json!({"k": k, "walk": w, "trace": trace[k], "torus": tv, "torus_delta": td, "agree": ok}));
        csv.push_str(&format!(
            "{k},{w},{},{},{}\n",
            trace[k],
            tv.map_or(String::new(), |v| v.to_string()),
            td.map_or(String::new(), |v| v.to_string())
        ));
    }
    let verdict = if passed { "PASS" } else { "FAIL" };
    let text = format!("{}moment triangle: {verdict}\n", aligned(&rows));
    let doc = json!({"model": model.name(), "z": z.to_json(&model), "rows": json_rows, "passed": passed});
    let json_text = serde_json::to_string_pretty(&doc).expect("plain data serializes");
    if let Some(dir) = &cfg.out {
        write_file(dir, "moments.txt", &text)?;
        write_file(dir, "moments.json", &json_text)?;
        write_file(dir, "moments.csv", &csv)?;
    }
    match format {
        Format::Text => print!("{text}"),
        Format::Json => println!("{json_text}"),
        Format::Csv => print!("{csv}"),
    }
    Ok(if passed { Outcome::Pass } else { Outcome::Fail })
}

fn cmd_converge(args: &Common) -> Result<Outcome> {
    let cfg = args.resolve()?;
    let format = args.format(&cfg)?;
    let model = cfg.model()?;
    let chain = cfg.chain(&model)?;
    let w = cfg.w(&model)?.ok_or_else(|| Error::Config("converge needs --w".into()))?;
    let grid = cfg.grid(&w)?;
    let defaults = ChainOptions::default();
    let opts = ChainOptions {
        k_moments: cfg.k.unwrap_or(defaults.k_moments),
        r_max: cfg.radius.unwrap_or(defaults.r_max),
        order_cap: cfg.order_cap.unwrap_or(DEFAULT_ORDER_CAP),
        ..defaults
    };
    let levels: Vec<usize> = (0..chain.len()).collect();
    let report = run_chain(&chain, &w, &levels, &grid, &opts)?;
    let text = report.to_text();
    let json_text = report.to_json();
    if let Some(dir) = &cfg.out {
        write_file(dir, "report.json", &json_text)?;
        write_file(dir, "report.txt", &text)?;
        for (i, rec) in report.levels.iter().enumerate() {
            write_file(dir, &format!("level_{}.csv", rec.level), &report.level_csv(i))?;
        }
    }
    match format {
        Format::Text => print!("{text}"),
        Format::Json => println!("{json_text}"),
        Format::Csv => {
            if !report.levels.is_empty() {
                print!("{}", report.level_csv(report.levels.len() - 1));
            }
        }
    }
    if report.has_resource_failure() {
        for f in report.failures.iter().filter(|f| f.resource) {
            eprintln!("error: {}", f.message);
        }
        return Ok(Outcome::ResourceCap);
    }
    Ok(if report.passed() && report.failures.is_empty() { Outcome::Pass } else { Outcome::Fail })
}

fn radius_line(d: &MetricValue) -> String {
    match d.agree_through {
        None => format!("not isomorphic at r=0, D = {}", fmt_value(d.value)),
        Some(r) if d.capped => format!("isomorphic through r={r}, D ≤ 1/{}", d.denominator()),
        Some(r) => format!("isomorphic through r={r} only, D = 1/{}", d.denominator()),
    }
}

fn cmd_graph(args: &GraphArgs) -> Result<Outcome> {
    let common = &args.common;
    let cfg = common.resolve()?;
    let format = common.format(&cfg)?;
    let model = cfg.model()?;
    let chain = cfg.chain(&model)?;
    let level = cfg.level.unwrap_or(0);
    let r = cfg.radius.unwrap_or(3);
    let z = cfg.z(&model)?;
    let sym = SymmetrizedSupport::from_element(&z, &model)?;
    let cayley = cayley_lcmg_finite(&chain, level, &sym, cfg.order_cap.unwrap_or(DEFAULT_ORDER_CAP))?;
    if let Some(w) = cayley.warning() {
        eprintln!("warning: {w}");
    }
    let d = match args.against {
        Against::Infinite => metric_d(&cayley, &InfiniteCayley::new(model.clone(), sym.clone()), r)?,
        Against::Itself => metric_d(&cayley, &cayley, r)?,
    };
    let line = radius_line(&d);
    if let Some(dir) = &cfg.out {
        let quotient_ball = cayley.graph.extract_ball(r).graph;
        write_file(dir, "quotient.json", &serde_json::to_string(&cayley.graph.to_json()).expect("serializes"))?;
        write_file(dir, &format!("quotient_ball_{r}.json"), &serde_json::to_string(&quotient_ball.to_json()).expect("serializes"))?;
        if let Against::Infinite = args.against {
            let ball = cayley_ball_infinite(&model, &sym, r, r.max(lcmg_spectra::DEFAULT_RADIUS_CAP))?;
            write_file(dir, &format!("infinite_ball_{r}.json"), &serde_json::to_string(&ball.graph.to_json()).expect("serializes"))?;
        }
    }
    let modulus = chain.modulus(level)?;
    match format {
        Format::Text | Format::Csv => println!("{line}"),
        Format::Json => {
            let doc = json!({
                "model": model.name(),
                "modulus": modulus,
                "level": level,
                "vertices": cayley.graph.vertex_count(),
                "radius": r,
                "metric": d,
                "summary": line,
            });
            println!("{}", serde_json::to_string_pretty(&doc).expect("serializes"));
        }
    }
    Ok(Outcome::Pass)
}

fn cmd_sdf(args: &Common) -> Result<Outcome> {
    let cfg = args.resolve()?;
    let format = args.format(&cfg)?;
    let model = cfg.model()?;
    let chain = cfg.chain(&model)?;
    let level = cfg.level.unwrap_or(chain.len() - 1);
    let w = cfg.w(&model)?.ok_or_else(|| Error::Config("sdf needs --w".into()))?;
    let grid = cfg.grid(&w)?;
    let z = w.times_adjoint(&model)?;
    let sym = SymmetrizedSupport::from_element(&z, &model)?;
    let cayley = cayley_lcmg_finite(&chain, level, &sym, cfg.order_cap.unwrap_or(DEFAULT_ORDER_CAP))?;
    if let Some(msg) = cayley.warning() {
        eprintln!("warning: {msg}");
    }
    let mu = kesten_measure(&MarkovOperator::from_lcmg(&cayley.graph))?;
    let sdf = SpectralDensityFunction::from_measure(&mu)?;
    let values = sdf.sample(&grid);
    let oracle = match &model {
        GroupModel::Lattice { dim } => Some(torus_sdf(&TorusSymbol::new(&model, &w)?, &grid, default_resolution(*dim))?),
        _ => None,
    };

    let mut csv = String::from(if oracle.is_some() { "lambda,F,F_oracle\n" } else { "lambda,F\n" });
    let mut rows = vec![vec!["lambda".to_string(), "F".into()]];
    if oracle.is_some() {
        rows[0].push("F_oracle".into());
    }
    for (i, (&l, &f)) in grid.iter().zip(&values).enumerate() {
        let mut row = vec![format!("{l:.6}"), format!("{f:.6}")];
        match &oracle {
            Some(o) => {
                csv.push_str(&format!("{l},{f},{}\n", o[i].value));
                row.push(format!("{:.6}", o[i].value));
            }
            None => csv.push_str(&format!("{l},{f}\n")),
        }
        rows.push(row);
    }
    let betti = format!(
        "betti: {} (kernel dimension {} of {})",
        fraction(sdf.betti(), sdf.kernel_dimension, cayley.graph.vertex_count()),
        sdf.kernel_dimension,
        cayley.graph.vertex_count()
    );
    let text = format!("{}{betti}\n", aligned(&rows));
    let doc = json!({
        "model": model.name(),
        "modulus": chain.modulus(level)?,
        "level": level,
        "betti": sdf.betti(),
        "kernel_dimension": sdf.kernel_dimension,
        "atoms": sdf.atoms,
        "grid": grid,
        "sdf": values,
        "oracle": oracle,
    });
    let json_text = serde_json::to_string_pretty(&doc).expect("serializes");
    if let Some(dir) = &cfg.out {
        write_file(dir, "sdf.csv", &csv)?;
        write_file(dir, "sdf.json", &json_text)?;
        write_file(dir, "sdf.txt", &text)?;
    }
    match format {
        Format::Text => print!("{text}"),
        Format::Json => println!("{json_text}"),
        Format::Csv => print!("{csv}"),
    }
    Ok(Outcome::Pass)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let outcome = match &cli.command {
        Command::Moments(a) => cmd_moments(a),
        Command::Converge(a) => cmd_converge(a),
        Command::Graph(a) => cmd_graph(a),
        Command::Sdf(a) => cmd_sdf(a),
    };
    match outcome {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(2),
        Ok(Outcome::ResourceCap) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
