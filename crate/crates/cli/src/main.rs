use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use qmfd_core::atlas::ManifoldSpec;
use qmfd_core::report::VerificationReport;
use qmfd_core::suites::{catalog, checks_in, convergence_sweep, run_suite, SuiteConfig, SUITES};
use qmfd_core::Tolerances;

const DEGREE_ENV: &str = "QM_DEFAULT_DEGREE";

type Overrides = Vec<(String, f64)>;

#[derive(Parser)]
#[command(
    name = "qmfd",
    version,
    about = "Verification suites for truncated Hermite-basis bundle numerics"
)]
#[command(
    after_help = "Tolerances are overridden with --tol.<name>=<value>, e.g. --tol.translation=1e-10.\n\
Known names: nonzero, section, fiber, translation, chart, point, indistinguishable, grid_margin."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite and emit a report.
    Verify(VerifyArgs),
    /// Measure one check's residual across truncation degrees.
    Sweep(SweepArgs),
    /// Print the suite and check catalog.
    Describe(DescribeArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(clap::Args)]
struct VerifyArgs {
    /// One of: model-space, expectation, translation, bundle,
    /// atlas-euclidean, atlas-circle, appendix-b, all.
    #[arg(long)]
    suite: Option<String>,
    /// `euclidean:<n>`, `circle` or `circle:<scale>`.
    #[arg(long)]
    manifold: Option<String>,
    /// Truncation degree K per axis [default: $QM_DEFAULT_DEGREE or 32].
    #[arg(long)]
    degree: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Base configuration (JSON, same schema as the report's `config`).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(clap::Args)]
struct SweepArgs {
    /// Check id; see `describe` for the sweepable ones.
    #[arg(long)]
    check: String,
    /// Comma-separated degrees.
    #[arg(long, value_delimiter = ',', default_value = "8,16,32,48")]
    degrees: Vec<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(clap::Args)]
struct DescribeArgs {
    /// Restrict to one suite.
    #[arg(long)]
    suite: Option<String>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

/// Pulls `--tol.<name>=<value>` and `--tol.<name> <value>` out of argv,
/// since clap cannot declare a flag family.
fn split_tolerance_flags(args: Vec<String>) -> Result<(Vec<String>, Overrides)> {
    let mut rest = Vec::with_capacity(args.len());
    let mut tols = Vec::new();
    let mut it = args.into_iter();
    while let Some(arg) = it.next() {
        let Some(spec) = arg.strip_prefix("--tol.") else {
            rest.push(arg);
            continue;
        };
        let (name, value) = match spec.split_once('=') {
            Some((n, v)) => (n.to_string(), v.to_string()),
            None => {
                let v = it
                    .next()
                    .with_context(|| format!("--tol.{spec} needs a value"))?;
                (spec.to_string(), v)
            }
        };
        let value: f64 = value
            .parse()
            .with_context(|| format!("--tol.{name}: `{value}` is not a number"))?;
        tols.push((name, value));
    }
    Ok((rest, tols))
}

fn apply_tolerances(base: Tolerances, overrides: &[(String, f64)]) -> Result<Tolerances> {
    let mut tol = base;
    for (name, value) in overrides {
        tol.set(name, *value)?;
    }
    Ok(tol)
}

fn env_degree() -> Result<Option<usize>> {
    match std::env::var(DEGREE_ENV) {
        Ok(v) => {
            Ok(Some(v.trim().parse().with_context(|| {
                format!("{DEGREE_ENV}=`{v}` is not a degree")
            })?))
        }
        Err(_) => Ok(None),
    }
}

fn build_config(args: &VerifyArgs, tols: &[(String, f64)]) -> Result<SuiteConfig> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => {
            let mut cfg = SuiteConfig::default();
            if let Some(k) = env_degree()? {
                cfg.degree = k;
            }
            cfg
        }
    };
    if let Some(s) = &args.suite {
        cfg.suite = s.clone();
    }
    if let Some(m) = &args.manifold {
        cfg.manifold = Some(ManifoldSpec::parse(m)?);
    }
    if let Some(k) = args.degree {
        cfg.degree = k;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if args.out.is_some() {
        cfg.out = args.out.clone();
    }
    cfg.tolerances = apply_tolerances(cfg.tolerances, tols)?;
    cfg.validate()?;
    Ok(cfg)
}

fn emit(out: Option<&Path>, body: &str) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, body).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            std::io::stdout().write_all(body.as_bytes())?;
            Ok(())
        }
    }
}

fn report_csv(report: &VerificationReport) -> String {
    let mut s = String::from("id,status,residual,tolerance,criterion,wall_time\n");
    for c in &report.checks {
        let residual = c.residual.map(|r| format!("{r:e}")).unwrap_or_default();
        let status = serde_json::to_value(c.status).expect("status serializes");
        let criterion = serde_json::to_value(c.criterion).expect("criterion serializes");
        s.push_str(&format!(
            "{},{},{},{:e},{},{:.6}\n",
            c.id,
            status.as_str().unwrap_or_default(),
            residual,
            c.tolerance,
            criterion.as_str().unwrap_or_default(),
            c.wall_time_s
        ));
    }
    s
}

/// Fails early on an output path whose directory does not exist, before
/// spending time on the suite.
fn check_writable(out: Option<&Path>) -> Result<()> {
    if let Some(dir) = out
        .and_then(Path::parent)
        .filter(|d| !d.as_os_str().is_empty())
    {
        if !dir.is_dir() {
            bail!("output directory {} does not exist", dir.display());
        }
    }
    Ok(())
}

fn verify(args: VerifyArgs, tols: &[(String, f64)]) -> Result<ExitCode> {
    let cfg = build_config(&args, tols)?;
    check_writable(cfg.out.as_deref())?;
    let report = run_suite(&cfg)?;
    let body = match args.format {
        Format::Json => report.to_json() + "\n",
        Format::Csv => report_csv(&report),
    };
    emit(cfg.out.as_deref(), &body)?;
    let failed: Vec<&str> = report.failures().map(|c| c.id.as_str()).collect();
    eprintln!("{} checks, {} failed", report.checks.len(), failed.len());
    for id in &failed {
        eprintln!("  FAIL {id}");
    }
    Ok(if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn sweep(args: SweepArgs, tols: &[(String, f64)]) -> Result<ExitCode> {
    let tol = apply_tolerances(Tolerances::default(), tols)?;
    check_writable(args.out.as_deref())?;
    let table = convergence_sweep(&args.check, &args.degrees, tol)?;
    let body = match args.format {
        Format::Csv => table.to_csv(),
        Format::Json => serde_json::to_string_pretty(&table)? + "\n",
    };
    emit(args.out.as_deref(), &body)?;
    Ok(ExitCode::SUCCESS)
}

fn describe(args: DescribeArgs) -> Result<ExitCode> {
    let checks = match &args.suite {
        Some(s) => checks_in(s)?,
        None => catalog(),
    };
    let body = match args.format {
        Some(Format::Json) => {
            let rows: Vec<_> = checks
                .iter()
                .map(|c| {
                    serde_json::json!({
                        "id": c.id,
                        "anchor": c.anchor,
                        "suites": c.suites,
                        "sweep": c.supports_sweep(),
                    })
                })
                .collect();
            serde_json::to_string_pretty(&serde_json::json!({ "suites": SUITES, "checks": rows }))?
                + "\n"
        }
        Some(Format::Csv) => bail!("describe supports --format json or the default text listing"),
        None => {
            let mut s = format!("suites: {}\n\n", SUITES.join(", "));
            for c in &checks {
                let sweep = if c.supports_sweep() { " [sweep]" } else { "" };
                s.push_str(&format!(
                    "{}{sweep}\n    {}\n    suites: {}\n",
                    c.id,
                    c.anchor,
                    c.suites.join(", ")
                ));
            }
            s
        }
    };
    emit(None, &body)?;
    Ok(ExitCode::SUCCESS)
}

fn run() -> Result<ExitCode> {
    let (argv, tols) = split_tolerance_flags(std::env::args().collect())?;
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return Ok(ExitCode::from(code));
        }
    };
    match cli.command {
        Command::Verify(a) => verify(a, &tols),
        Command::Sweep(a) => sweep(a, &tols),
        Command::Describe(a) => {
            if !tols.is_empty() {
                bail!("describe takes no tolerance overrides");
            }
            describe(a)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
