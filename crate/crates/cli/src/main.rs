use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use cellhom::harness::{
    emit_results, read_config_file, reference_tensor, run_once, run_sweep, write_csv, ConfigMap, OutputFormat,
    RunConfig, SweepConfig,
};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "cellhom", version, about = "Effective coefficients of periodic elliptic operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single homogenization run compared against the periodic reference.
    Homogenize(RunArgs),
    /// Convergence study over a list of R values.
    Sweep(SweepArgs),
    /// Compute (or load from cache) the periodic reference tensor.
    Reference(RunArgs),
}

#[derive(Args, Default)]
struct RunArgs {
    /// Key-value config file; flags given on the command line take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// constant:<c>, paper-2d or checkerboard:<a1>:<a2>
    #[arg(long)]
    field: Option<String>,
    #[arg(long)]
    dim: Option<usize>,
    /// periodic, elliptic, parabolic or modified-elliptic
    #[arg(long)]
    method: Option<String>,
    #[arg(long = "R")]
    r: Option<f64>,
    #[arg(long = "k-o")]
    k_o: Option<f64>,
    #[arg(long, visible_alias = "filter-q")]
    q: Option<u32>,
    #[arg(long = "T")]
    t: Option<f64>,
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long = "c-n")]
    c_n: Option<f64>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long = "tol-time")]
    tol_time: Option<f64>,
    /// dirichlet or periodic (elliptic method only)
    #[arg(long)]
    bc: Option<String>,
    #[arg(long = "cg-tol")]
    cg_tol: Option<f64>,
    #[arg(long = "eig-tol")]
    eig_tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    symmetrize: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Comma-separated R values; overrides the preset.
    #[arg(long = "r-values")]
    r_values: Option<String>,
    /// desk (6 points in [2, 8]) or full (60 points in [1.1, 12.7])
    #[arg(long)]
    preset: Option<String>,
    #[arg(long = "error-floor")]
    error_floor: Option<f64>,
    #[arg(long)]
    jobs: Option<usize>,
    /// Serial execution and zeroed wall times.
    #[arg(long)]
    deterministic: bool,
    /// Exit with a failure code if any point fails.
    #[arg(long)]
    strict: bool,
}

impl RunArgs {
    fn config_map(&self) -> Result<ConfigMap> {
        let mut map = match &self.config {
            Some(path) => read_config_file(path)?,
            None => ConfigMap::new(),
        };
        let mut set = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                map.insert(k.to_string(), v);
            }
        };
        set("field", self.field.clone());
        set("dim", self.dim.map(|v| v.to_string()));
        set("method", self.method.clone());
        set("R", self.r.map(|v| v.to_string()));
        set("k-o", self.k_o.map(|v| v.to_string()));
        set("q", self.q.map(|v| v.to_string()));
        set("T", self.t.map(|v| v.to_string()));
        set("N", self.n.map(|v| v.to_string()));
        set("c-n", self.c_n.map(|v| v.to_string()));
        set("h", self.h.map(|v| v.to_string()));
        set("tol-time", self.tol_time.map(|v| v.to_string()));
        set("bc", self.bc.clone());
        set("cg-tol", self.cg_tol.map(|v| v.to_string()));
        set("eig-tol", self.eig_tol.map(|v| v.to_string()));
        set("seed", self.seed.map(|v| v.to_string()));
        set("symmetrize", self.symmetrize.then(|| "true".to_string()));
        set("out", self.out.as_ref().map(|p| p.display().to_string()));
        set("format", self.format.clone());
        Ok(map)
    }
}

fn output_target(map: &ConfigMap) -> Result<(Option<PathBuf>, OutputFormat)> {
    let out = map.get("out").map(PathBuf::from);
    let format = match (map.get("format"), &out) {
        (Some(f), _) => f.parse()?,
        (None, Some(p)) if p.extension().is_some_and(|e| e == "json") => OutputFormat::Json,
        _ => OutputFormat::Csv,
    };
    Ok((out, format))
}

fn homogenize(args: &RunArgs) -> Result<()> {
    let map = args.config_map()?;
    let cfg = RunConfig::from_map(&map)?;
    let record = run_once(&cfg).with_context(|| format!("{} run at R = {}", cfg.method, cfg.r))?;
    let p = &record.result.params;
    println!("method      {}", record.result.method);
    println!("R, L, T, N  {}, {}, {}, {}", p.r, p.l, p.t.map_or("inf".into(), |t| t.to_string()), p.n_modes);
    for (name, m) in [("tensor", &record.result.values), ("reference", &record.reference)] {
        for (i, row) in m.rows().iter().enumerate() {
            let label = if i == 0 { name } else { "" };
            let cells: Vec<String> = row.iter().map(|v| format!("{v:>22.15e}")).collect();
            println!("{label:<11} {}", cells.join(" "));
        }
    }
    println!("error       {:.6e}", record.frobenius_error);
    println!("asymmetry   {:.6e}", record.result.diagnostics.asymmetry);
    let (out, format) = output_target(&map)?;
    if let Some(path) = out {
        emit_results(&[&record], format, &path)?;
    }
    Ok(())
}

fn sweep(args: &SweepArgs) -> Result<bool> {
    let mut map = args.run.config_map()?;
    for (k, v) in [
        ("r-values", args.r_values.clone()),
        ("preset", args.preset.clone()),
        ("error-floor", args.error_floor.map(|v| v.to_string())),
        ("jobs", args.jobs.map(|v| v.to_string())),
        ("deterministic", args.deterministic.then(|| "true".to_string())),
    ] {
        if let Some(v) = v {
            map.insert(k.into(), v);
        }
    }
    let strict = args.strict || map.get("strict").is_some_and(|s| s == "true");
    let cfg = SweepConfig::from_map(&map)?;
    let report = run_sweep(&cfg)?;
    for row in report.rows.iter().filter(|r| r.error.is_some()) {
        eprintln!("R = {}: {}", row.r, row.error.as_deref().unwrap_or_default());
    }
    let records = report.records();
    match output_target(&map)? {
        (Some(path), format) => emit_results(&records, format, &path)?,
        (None, _) => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write_csv(&records, &mut lock)?;
            lock.flush()?;
        }
    }
    match report.fit {
        Some(fit) => eprintln!(
            "slope {:.4} (residual {:.3e}, {} points){}",
            fit.slope,
            fit.residual,
            fit.points,
            report.reference_slope.map_or(String::new(), |s| format!(", reference {s}"))
        ),
        None => eprintln!("slope: not enough points above the error floor"),
    }
    Ok(!(strict && report.failures() > 0))
}

fn reference(args: &RunArgs) -> Result<()> {
    let map = args.config_map()?;
    let cfg = RunConfig::from_map(&map)?;
    let field = cfg.tensor_field()?;
    if field.period().is_none() {
        bail!("field '{}' is not periodic", cfg.field);
    }
    let m = reference_tensor(&field, cfg.h, &cfg.solver)?;
    println!("{}", serde_json_matrix(&m));
    Ok(())
}

fn serde_json_matrix(m: &cellhom::Matrix) -> String {
    let rows: Vec<String> =
        m.rows().iter().map(|r| format!("[{}]", r.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(", "))).collect();
    format!("[{}]", rows.join(", "))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Homogenize(a) => homogenize(a).map(|_| true),
        Command::Sweep(a) => sweep(a),
        Command::Reference(a) => reference(a).map(|_| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            log::error!("sweep finished with failed points");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
