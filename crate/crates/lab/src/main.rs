use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use extrapolab::io::{read_function, read_weight, write_function};
use extrapolab::{report, ConfigError, ExperimentConfig, LabError, SuiteName};
use extrapolab_core::lorentz::lorentz_norm;
use extrapolab_core::maximal::maximal;
use extrapolab_core::weights::{
    a1_constant, ainf_constant, apr_constant, apr_r1_constant, apvec_constant, generate, hat_ar_construct,
    hat_arq_construct,
};
use extrapolab_core::{
    ConstantEstimate, ExponentSystem, FamilySpec, GridFunction, LorentzIndex, MaximalConfig, Weight, WeightKind,
};

#[derive(Debug, Parser)]
#[command(name = "extrapolab", version, about = "Weighted restricted weak-type inequalities on dyadic grids")]
struct Cli {
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for CSV reports and summaries.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Replaces the seed of the configuration.
    #[arg(long, global = true)]
    seed_override: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Runs the suite named in --config.
    Run,
    /// Runs a suite from --config, or from its bundled configuration.
    Verify { suite: String },
    /// Lorentz quasi-norm of a function file.
    Norm {
        function: PathBuf,
        #[arg(long)]
        weight: Option<PathBuf>,
        #[arg(long)]
        p: f64,
        /// Secondary index; `inf` gives the weak norm.
        #[arg(long, default_value = "inf")]
        q: f64,
    },
    /// Maximal function of a function file.
    Maximal {
        function: PathBuf,
        /// Density of the measure (Lebesgue when omitted).
        #[arg(long)]
        measure: Option<PathBuf>,
        /// Unshifted dyadic cubes only.
        #[arg(long)]
        dyadic: bool,
        /// Destination file (stdout when omitted).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Characteristic of a weight or weight vector.
    Constant {
        #[arg(long, value_enum)]
        kind: ConstantKind,
        #[arg(long, value_delimiter = ',', required = true)]
        weights: Vec<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        p: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        r: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        alpha: Vec<f64>,
        /// Density of the measure for `a1`.
        #[arg(long)]
        measure: Option<PathBuf>,
        #[arg(long)]
        dyadic: bool,
    },
    /// Builds a weight and writes it as a function file.
    Construct {
        #[arg(long, value_enum)]
        kind: ConstructKind,
        /// Weight family as JSON, for `generate`.
        #[arg(long)]
        spec: Option<String>,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long, default_value_t = 8)]
        level: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        u1: Option<PathBuf>,
        #[arg(long)]
        g: Option<PathBuf>,
        #[arg(long)]
        mu: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        #[arg(long, default_value_t = 1.0)]
        q: f64,
        #[arg(long)]
        dyadic: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Merges report CSVs into per-suite summaries.
    Report {
        #[arg(required = true)]
        csv: Vec<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ConstantKind {
    A1,
    Ainf,
    Apvec,
    Apr,
    AprR1,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ConstructKind {
    Generate,
    HatAr,
    HatArq,
}

/// Outcome of a command that did not fail.
enum Outcome {
    Pass,
    Fail,
}

fn family(dyadic: bool) -> FamilySpec {
    if dyadic {
        FamilySpec::DYADIC
    } else {
        FamilySpec::SHIFTED
    }
}

fn open(path: &Path) -> Result<BufReader<File>, LabError> {
    File::open(path).map(BufReader::new).map_err(|e| LabError::Fs { path: path.display().to_string(), source: e })
}

fn load_function(path: &Path) -> Result<GridFunction, LabError> {
    Ok(read_function(open(path)?)?)
}

fn load_weight(path: &Path) -> Result<Weight, LabError> {
    Ok(read_weight(open(path)?)?)
}

fn missing(what: &str) -> LabError {
    ConfigError::Field { path: what.into(), message: "required for this kind".into() }.into()
}

fn emit_function(f: &GridFunction, output: Option<&Path>) -> Result<(), LabError> {
    match output {
        Some(path) => {
            let file = File::create(path).map_err(|e| LabError::Fs { path: path.display().to_string(), source: e })?;
            write_function(std::io::BufWriter::new(file), f)?;
        }
        None => write_function(std::io::stdout().lock(), f)?,
    }
    Ok(())
}

fn print_estimate(est: &ConstantEstimate) -> Result<(), LabError> {
    println!("{}", serde_json::to_string(est)?);
    Ok(())
}

fn run_suite(cli: &Cli, mut cfg: ExperimentConfig) -> Result<Outcome, LabError> {
    if let Some(seed) = cli.seed_override {
        cfg.seed = seed;
    }
    let out = extrapolab::run(&cfg)?;
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("reports"));
    let (csv_path, _) = extrapolab::write_outputs(&dir, &out)?;
    for note in &out.notes {
        eprintln!("{note}");
    }
    for r in out.records.iter().filter(|r| !r.pass) {
        eprintln!("FAIL {} L{} lhs={:?} rhs={:?} {}", r.case_id, r.resolution, r.lhs, r.rhs, r.witness);
    }
    println!("{}", serde_json::to_string_pretty(&out.summary)?);
    eprintln!("wrote {}", csv_path.display());
    Ok(if out.summary.pass { Outcome::Pass } else { Outcome::Fail })
}

fn execute(cli: &Cli) -> Result<Outcome, LabError> {
    match &cli.command {
        Command::Run => {
            let path = cli.config.as_deref().ok_or_else(|| missing("--config"))?;
            run_suite(cli, ExperimentConfig::load(path)?)
        }
        Command::Verify { suite } => {
            let suite: SuiteName = suite.parse()?;
            let cfg = match &cli.config {
                Some(path) => {
                    let cfg = ExperimentConfig::load(path)?;
                    if cfg.suite != suite {
                        return Err(ConfigError::Field {
                            path: "suite".into(),
                            message: format!("config is for `{}`, not `{suite}`", cfg.suite),
                        }
                        .into());
                    }
                    cfg
                }
                None => ExperimentConfig::bundled(suite)?,
            };
            run_suite(cli, cfg)
        }
        Command::Norm { function, weight, p, q } => {
            let f = load_function(function)?;
            let w = weight.as_deref().map(load_weight).transpose()?;
            let value = lorentz_norm(&f, w.as_ref(), LorentzIndex::new(*p, *q)?)?;
            println!("{}", serde_json::json!({ "p": p, "q": q, "value": value }));
            Ok(Outcome::Pass)
        }
        Command::Maximal { function, measure, dyadic, output } => {
            let f = load_function(function)?;
            let mu = measure.as_deref().map(load_weight).transpose()?;
            let cfg = match &mu {
                Some(mu) => MaximalConfig::with_measure(family(*dyadic), mu),
                None => MaximalConfig::lebesgue(family(*dyadic)),
            };
            emit_function(&maximal(&f, &cfg)?, output.as_deref())?;
            Ok(Outcome::Pass)
        }
        Command::Constant { kind, weights, p, r, alpha, measure, dyadic } => {
            let ws = weights.iter().map(|w| load_weight(w)).collect::<Result<Vec<_>, _>>()?;
            let fam = family(*dyadic);
            let est = match kind {
                ConstantKind::A1 => {
                    let mu = measure.as_deref().map(load_weight).transpose()?;
                    a1_constant(&ws[0], mu.as_ref(), fam)?
                }
                ConstantKind::Ainf => ainf_constant(&ws[0], fam)?,
                ConstantKind::Apvec => apvec_constant(&ws, p, fam)?,
                ConstantKind::AprR1 => apr_r1_constant(&ws, p, fam)?,
                ConstantKind::Apr => {
                    let sys = if r.is_empty() && alpha.is_empty() {
                        ExponentSystem::restricted(p.clone())?
                    } else {
                        let alpha = if alpha.is_empty() { p.clone() } else { alpha.clone() };
                        ExponentSystem::new(p.clone(), r.clone(), alpha)?
                    };
                    apr_constant(&ws, &sys, fam)?
                }
            };
            print_estimate(&est)?;
            Ok(Outcome::Pass)
        }
        Command::Construct { kind, spec, dim, level, seed, u1, g, mu, r, q, dyadic, output } => {
            let w = match kind {
                ConstructKind::Generate => {
                    let spec = spec.as_deref().ok_or_else(|| missing("--spec"))?;
                    let kind: WeightKind = serde_json::from_str(spec)
                        .map_err(|e| ConfigError::Field { path: "--spec".into(), message: e.to_string() })?;
                    generate(&kind, extrapolab_core::Grid::new(*dim, *level)?, *seed)?
                }
                ConstructKind::HatAr | ConstructKind::HatArq => {
                    let u1 = load_weight(u1.as_deref().ok_or_else(|| missing("--u1"))?)?;
                    let g = load_function(g.as_deref().ok_or_else(|| missing("--g"))?)?;
                    let mu = match mu {
                        Some(path) => load_weight(path)?,
                        None => Weight::ones(*u1.grid()),
                    };
                    if matches!(kind, ConstructKind::HatAr) {
                        hat_ar_construct(&u1, &g, *r, &mu, family(*dyadic))?
                    } else {
                        hat_arq_construct(&u1, &g, *r, *q, &mu, family(*dyadic))?
                    }
                }
            };
            emit_function(w.as_function(), output.as_deref())?;
            Ok(Outcome::Pass)
        }
        Command::Report { csv } => {
            let mut records = Vec::new();
            for path in csv {
                records.extend(report::read_csv(open(path)?)?);
            }
            report::sort_records(&mut records);
            let summaries = report::summarize_all(&records);
            let text = serde_json::to_string_pretty(&summaries)?;
            if let Some(dir) = &cli.out {
                std::fs::create_dir_all(dir).map_err(|e| LabError::Fs { path: dir.display().to_string(), source: e })?;
                let path = dir.join("report.json");
                std::fs::write(&path, format!("{text}\n"))
                    .map_err(|e| LabError::Fs { path: path.display().to_string(), source: e })?;
            }
            println!("{text}");
            Ok(if summaries.iter().all(|s| s.pass) { Outcome::Pass } else { Outcome::Fail })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let code = match execute(&cli) {
        Ok(Outcome::Pass) => 0,
        Ok(Outcome::Fail) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    };
    let _ = std::io::stdout().flush();
    ExitCode::from(code)
}
