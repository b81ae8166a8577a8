use clap::{Args, Parser, Subcommand};
use muskat_core::besov::NormParams;
use muskat_core::gamma::{gamma_closed_form, gamma_oracle, gamma_scale, GammaKernel};
use muskat_core::harness::{emit, run_inflation_demo, run_ledger, ExperimentConfig, Format, InflationReport, TimeGrid};
use muskat_core::iterate::{family_component, measure_component_norms, time_window_ok};
use muskat_core::oracle::{compare_with_oracle, sample_points, OracleSpec};
use muskat_core::sequences::{initial_data_norm, norm_upper_bound_check, size_sums, validate_family};
use muskat_core::Error;
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "muskat", version, about = "Norm inflation experiments for the truncated Muskat problem")]
struct Cli {
    /// experiment config (JSON)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// output directory for reports
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// seed for randomized sampling only
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Γ kernel checks
    #[command(subcommand)]
    Gamma(GammaCmd),
    /// sequence families
    #[command(subcommand)]
    Sequence(SequenceCmd),
    /// Besov-type norms
    #[command(subcommand)]
    Norm(NormCmd),
    /// second Picard iterate
    #[command(subcommand)]
    Iterate(IterateCmd),
    /// physical-space cross-check
    #[command(subcommand)]
    Oracle(OracleCmd),
    #[command(subcommand)]
    Ledger(LedgerCmd),
    #[command(subcommand)]
    Inflate(InflateCmd),
}

#[derive(Subcommand)]
enum GammaCmd {
    /// closed form against the quadrature oracle
    Check {
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// explicit tuple, comma separated
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        a: Vec<f64>,
        /// number of random tuples with entries in [-50,50] \ (-0.1,0.1)
        #[arg(long, default_value_t = 0)]
        random: usize,
        #[arg(long, default_value_t = 1e-5)]
        tolerance: f64,
    },
}

#[derive(Args, Clone, Default)]
struct FamilyArgs {
    #[arg(long)]
    ell: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long = "M")]
    m: Option<i64>,
    /// starting index N
    #[arg(long = "N", default_value_t = 4)]
    n: usize,
}

#[derive(Subcommand)]
enum SequenceCmd {
    /// print a family with its validation
    Gen(FamilyArgs),
}

#[derive(Subcommand)]
enum NormCmd {
    /// norm of the family's initial data
    Eval(FamilyArgs),
}

#[derive(Subcommand)]
enum IterateCmd {
    /// assemble f_k for a family at time t and measure its parts
    Assemble {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// absolute time; defaults to the first point of the config's grid
        #[arg(long)]
        t: Option<f64>,
    },
}

#[derive(Subcommand)]
enum OracleCmd {
    /// f_k for γ P_c against the physical-space Duhamel integral
    Compare {
        #[arg(long, default_value_t = 5)]
        center: i64,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 0.1)]
        t: f64,
        #[arg(long, default_value_t = 16)]
        samples: usize,
        #[arg(long, default_value_t = 0.25)]
        spacing: f64,
        #[arg(long, default_value_t = 40.0)]
        half_width: f64,
        #[arg(long, default_value_t = 1e-4)]
        tolerance: f64,
    },
}

#[derive(Subcommand)]
enum LedgerCmd {
    /// run the I_1..I_6 ledger over the sweep
    Run {
        #[arg(long, value_delimiter = ',')]
        sweep: Vec<usize>,
        #[arg(long, default_value = "csv,json", value_delimiter = ',')]
        format: Vec<String>,
    },
}

#[derive(Subcommand)]
enum InflateCmd {
    /// best inflation ratio and its extrapolation to R^2
    Demo {
        #[arg(long, default_value_t = 1e6)]
        r_target: f64,
        #[arg(long, value_delimiter = ',')]
        sweep: Vec<usize>,
        #[arg(long, default_value = "csv,json", value_delimiter = ',')]
        format: Vec<String>,
    },
}

enum Failure {
    Assertion(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type Outcome = Result<(), Failure>;

fn load_config(path: &Option<PathBuf>) -> Result<ExperimentConfig, Failure> {
    let cfg = match path {
        None => ExperimentConfig::default(),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(Error::from)?;
            serde_json::from_str(&text).map_err(|e| Error::Argument(format!("config {}: {e}", p.display())))?
        }
    };
    cfg.validate()?;
    Ok(cfg)
}

fn apply_family(cfg: &mut ExperimentConfig, a: &FamilyArgs) {
    let f = &mut cfg.family;
    f.ell = a.ell.unwrap_or(f.ell);
    f.p = a.p.unwrap_or(f.p);
    f.q = a.q.unwrap_or(f.q);
    f.epsilon = a.epsilon.unwrap_or(f.epsilon);
    f.delta = a.delta.unwrap_or(f.delta);
    f.m = a.m.unwrap_or(f.m);
}

fn print(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json"));
}

fn formats(names: &[String]) -> Result<Vec<Format>, Failure> {
    names
        .iter()
        .map(|s| match s.as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Failure::Core(Error::Argument(format!("unknown format {other}")))),
        })
        .collect()
}

fn random_entry(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let x: f64 = rng.gen_range(-50.0..=50.0);
        if x.abs() >= 0.1 {
            return x;
        }
    }
}

fn gamma_check(k: usize, a: Vec<f64>, random: usize, tol: f64, seed: u64) -> Outcome {
    let kernel = GammaKernel::new(k)?;
    let mut tuples = Vec::new();
    if !a.is_empty() {
        tuples.push(a);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..random {
        tuples.push((0..kernel.arity()).map(|_| random_entry(&mut rng)).collect());
    }
    if tuples.is_empty() {
        return Err(Error::Argument("give --a or --random".into()).into());
    }
    let mut worst = 0.0f64;
    let mut rows = Vec::new();
    for t in &tuples {
        let closed = gamma_closed_form(&kernel, t)?;
        let oracle = gamma_oracle(&kernel, t)?;
        let err = (closed - oracle).abs() / oracle.abs().max(gamma_scale(k, t));
        worst = worst.max(err);
        rows.push(json!({"a": t, "closed_form": closed, "oracle": oracle, "rel_err": err}));
    }
    let pass = worst <= tol;
    if tuples.len() == 1 {
        print(&rows[0]);
    } else {
        print(&json!({"k": k, "tuples": tuples.len(), "seed": seed, "max_rel_err": worst, "pass": pass}));
    }
    if pass {
        Ok(())
    } else {
        Err(Failure::Assertion(format!("max relative error {worst:e} > {tol:e}")))
    }
}

fn sequence_gen(mut cfg: ExperimentConfig, a: &FamilyArgs) -> Outcome {
    apply_family(&mut cfg, a);
    let f = cfg.family(a.n)?;
    let v = validate_family(&f);
    print(&json!({"family": f, "validation": v, "family_hash": muskat_core::harness::family_hash(&f)}));
    if v.all() {
        Ok(())
    } else {
        Err(Failure::Assertion("family violates its growth conditions".into()))
    }
}

fn norm_eval(mut cfg: ExperimentConfig, a: &FamilyArgs) -> Outcome {
    apply_family(&mut cfg, a);
    let f = cfg.family(a.n)?;
    let norm = initial_data_norm(&f)?;
    let (lhs, rhs) = size_sums(&f);
    let params: NormParams = f.norm_params();
    print(&json!({
        "N": f.n,
        "params": params,
        "norm_phi": norm,
        "size_sum": lhs,
        "size_identity": rhs,
        "upper_bound_ratio": norm_upper_bound_check(&f)?,
    }));
    Ok(())
}

fn iterate_assemble(mut cfg: ExperimentConfig, a: &FamilyArgs, k: usize, t: Option<f64>) -> Outcome {
    apply_family(&mut cfg, a);
    let f = cfg.family(a.n)?;
    let t = match t {
        Some(t) => t,
        None => match &cfg.times {
            TimeGrid::PerFamily { multipliers } => multipliers[0] / muskat_core::gamma::big_to_f64(f.k(f.n)),
            TimeGrid::Absolute { values } => values[0],
        },
    };
    let comp = family_component(&f, k, t, &cfg.iterate)?;
    let params = cfg.norms.unwrap_or_else(|| f.norm_params());
    let norms = measure_component_norms(&f, &comp, &params, &cfg.quadrature)?;
    print(&json!({
        "N": f.n,
        "k": k,
        "t": t,
        "window_ok": time_window_ok(&f, t),
        "prefactor": comp.prefactor,
        "pieces": {"J": comp.j.pieces.len(), "HF1": comp.hf1.pieces.len(), "HF": comp.hf.pieces.len()},
        "counts": comp.counts,
        "norms": norms,
    }));
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn oracle_compare(cfg: &ExperimentConfig, center: i64, gamma: f64, k: usize, t: f64, samples: usize, spacing: f64, half_width: f64, tol: f64) -> Outcome {
    let spec = OracleSpec { half_width, ..OracleSpec::default() };
    let xs = sample_points(samples, spacing);
    let c = compare_with_oracle(&[(BigInt::from(center), gamma)], k, t, &xs, &cfg.iterate, &spec)?;
    print(&serde_json::to_value(&c).expect("json"));
    if c.rel_diff <= tol {
        Ok(())
    } else {
        Err(Failure::Assertion(format!("relative difference {:e} > {tol:e}", c.rel_diff)))
    }
}

fn finish(report: &InflationReport, out: &Path, fmts: &[Format]) -> Outcome {
    let paths = emit(report, out, fmts)?;
    for p in &paths {
        eprintln!("wrote {}", p.display());
    }
    let mut summary = json!({
        "rows": report.rows.len(),
        "failed": report.failed,
        "trends": report.trends,
    });
    if let Some(inf) = &report.inflation {
        summary["inflation"] = serde_json::to_value(inf).expect("json");
    }
    print(&summary);
    if report.failed {
        let bad: Vec<String> = report
            .trends
            .iter()
            .filter(|t| t.verdict == muskat_core::sequences::Verdict::Fail)
            .map(|t| format!("{} (N = {:?})", t.name, t.offending))
            .collect();
        return Err(Failure::Assertion(format!("FAILED: {}", bad.join("; "))));
    }
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Argument(format!("thread pool: {e}")))?;
    }
    let mut cfg = load_config(&cli.config)?;
    match cli.cmd {
        Cmd::Gamma(GammaCmd::Check { k, a, random, tolerance }) => gamma_check(k, a, random, tolerance, cli.seed),
        Cmd::Sequence(SequenceCmd::Gen(a)) => sequence_gen(cfg, &a),
        Cmd::Norm(NormCmd::Eval(a)) => norm_eval(cfg, &a),
        Cmd::Iterate(IterateCmd::Assemble { family, k, t }) => iterate_assemble(cfg, &family, k, t),
        Cmd::Oracle(OracleCmd::Compare { center, gamma, k, t, samples, spacing, half_width, tolerance }) => {
            oracle_compare(&cfg, center, gamma, k, t, samples, spacing, half_width, tolerance)
        }
        Cmd::Ledger(LedgerCmd::Run { sweep, format }) => {
            if !sweep.is_empty() {
                cfg.sweep = sweep;
            }
            let report = run_ledger(&cfg)?;
            finish(&report, &cli.out, &formats(&format)?)
        }
        Cmd::Inflate(InflateCmd::Demo { r_target, sweep, format }) => {
            if !sweep.is_empty() {
                cfg.sweep = sweep;
            }
            let report = run_inflation_demo(&cfg, r_target)?;
            finish(&report, &cli.out, &formats(&format)?)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Assertion(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(2)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Capacity(_) => 3,
                _ => 1,
            })
        }
    }
}
