//! `rpm`: generate progressive-matrix corpora, build rule pools, solve and
//! evaluate, and run the training-size study.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use rpm_core::corpus::{read_corpus, sorted_json, write_corpus, write_rasters, CorpusError};
use rpm_core::domain::{Configuration, Problem};
use rpm_core::generator::{generate_corpus, GenError, GenSpec, Scheme, DEFAULT_NOISE};
use rpm_core::harness::{evaluate, holdout_split, report_records, shrink, train, HarnessError};
use rpm_core::perception::Perceiver;
use rpm_core::render::{PanelRaster, RenderOptions, DEFAULT_SIDE, DEFAULT_SUPERSAMPLE};
use rpm_core::RulePool;

#[derive(Parser)]
#[command(name = "rpm", version, about = "Progressive-matrix generator, rule-pool solver and evaluation harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a corpus (and optionally its panel images).
    Generate(GenerateArgs),
    /// Build a rule pool from a corpus with truth indices.
    Train {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve a corpus and write per-problem reports.
    Solve {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        pool: PathBuf,
        #[arg(long)]
        report: PathBuf,
        #[command(flatten)]
        workers: Workers,
    },
    /// Print the accuracy table of a pool on a corpus.
    Eval {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        pool: PathBuf,
        /// Also write the line-oriented report here.
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        workers: Workers,
    },
    /// Accuracy against training-set size on a fixed held-out split.
    Shrink {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        seeds: Vec<u64>,
        /// Fraction of the corpus (its tail) held out for evaluation.
        #[arg(long, default_value_t = 0.2)]
        holdout: f64,
        /// Also write the curve as JSON lines here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        workers: Workers,
    },
    /// Read attributes back from panel images.
    Perceive {
        #[arg(long)]
        images: PathBuf,
        #[arg(long)]
        layout: Configuration,
        #[arg(long)]
        out: PathBuf,
        /// Supersampling the images were rendered with.
        #[arg(long, default_value_t = DEFAULT_SUPERSAMPLE)]
        supersample: u32,
    },
}

#[derive(Args)]
struct GenerateArgs {
    /// Configuration name, comma-separated list, or `all`.
    #[arg(long, default_value = "all")]
    config: String,
    #[arg(long, default_value = "iraven")]
    scheme: Scheme,
    #[arg(long)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_NOISE)]
    noise: f64,
    /// Also render every panel to `<out>/images`.
    #[arg(long)]
    render: bool,
    #[arg(long, default_value_t = DEFAULT_SIDE)]
    side: u32,
    #[arg(long, default_value_t = DEFAULT_SUPERSAMPLE)]
    supersample: u32,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct Workers {
    /// Worker threads (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
}

enum Failure {
    Usage(anyhow::Error),
    Data(anyhow::Error),
    Internal(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Internal(_) => 3,
        }
    }
}

impl From<CorpusError> for Failure {
    fn from(e: CorpusError) -> Self {
        Failure::Data(e.into())
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Argument(_) => Failure::Usage(e.into()),
            HarnessError::Workers(_) => Failure::Internal(e.into()),
            _ => Failure::Data(e.into()),
        }
    }
}

impl From<GenError> for Failure {
    fn from(e: GenError) -> Self {
        match e {
            GenError::InvalidSpec(_) => Failure::Usage(e.into()),
            _ => Failure::Internal(e.into()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn write_file(path: &Path, text: &str) -> Outcome {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display())).map_err(Failure::Data)?;
    }
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display())).map_err(Failure::Data)
}

fn read_pool(path: &Path) -> Result<RulePool, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read pool {}", path.display()))
        .map_err(Failure::Data)?;
    RulePool::from_text(&text).with_context(|| format!("invalid pool {}", path.display())).map_err(Failure::Data)
}

fn load(corpus: &Path) -> Result<Vec<Problem>, Failure> {
    Ok(read_corpus(corpus)?.0)
}

fn parse_configs(text: &str) -> Result<Vec<Configuration>, Failure> {
    if text.trim() == "all" {
        return Ok(Configuration::ALL.to_vec());
    }
    text.split(',').map(|s| s.parse().map_err(|e: String| Failure::Usage(anyhow!(e)))).collect()
}

fn generate(a: GenerateArgs) -> Outcome {
    let spec = GenSpec::new(parse_configs(&a.config)?, a.scheme, a.noise, a.seed, a.count);
    let problems = generate_corpus(&spec)?;
    let corpus = a.out.join("corpus.jsonl");
    fs::create_dir_all(&a.out).with_context(|| format!("cannot create {}", a.out.display())).map_err(Failure::Data)?;
    let manifest = write_corpus(&problems, &corpus, Some(&spec))?;
    println!("wrote {} problems to {}", manifest.total, corpus.display());
    for (config, n) in &manifest.counts {
        println!("  {config:<14} {n:>7}");
    }
    if a.render {
        let opts = RenderOptions { side: a.side, supersample: a.supersample };
        let images = a.out.join("images");
        let n = write_rasters(&problems, &images, opts)?;
        println!("rendered {n} panels to {}", images.display());
    }
    Ok(())
}

fn run_train(corpus: &Path, out: &Path) -> Outcome {
    let summary = train(&load(corpus)?)?;
    write_file(out, &summary.pool.to_text())?;
    print!("{}", summary.table());
    Ok(())
}

fn run_eval(corpus: &Path, pool: &Path, report: Option<&Path>, workers: Option<usize>) -> Outcome {
    let problems = load(corpus)?;
    let pool = read_pool(pool)?;
    let start = Instant::now();
    let (eval, solves) = evaluate(&problems, &pool, workers)?;
    let elapsed = start.elapsed();
    if let Some(path) = report {
        write_file(path, &report_records(&problems, &solves, &eval))?;
    }
    print!("{}", eval.table());
    eprintln!("solved {} problems in {:.2} s", problems.len(), elapsed.as_secs_f64());
    Ok(())
}

fn run_shrink(
    corpus: &Path,
    sizes: &[usize],
    seeds: &[u64],
    holdout: f64,
    out: Option<&Path>,
    workers: Option<usize>,
) -> Outcome {
    let problems = load(corpus)?;
    let (tr, ev) = holdout_split(&problems, holdout)?;
    let table = shrink(tr, ev, sizes, seeds, workers)?;
    if let Some(path) = out {
        let text: String = table.rows.iter().map(|r| sorted_json(r) + "\n").collect();
        write_file(path, &text)?;
    }
    print!("{}", table.table());
    if !table.is_monotone() {
        println!("note: mean accuracy is not monotone in training size");
    }
    Ok(())
}

fn run_perceive(images: &Path, layout: Configuration, out: &Path, supersample: u32) -> Outcome {
    let mut files: Vec<PathBuf> = fs::read_dir(images)
        .with_context(|| format!("cannot list {}", images.display()))
        .map_err(Failure::Data)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("png")))
        .collect();
    files.sort();
    let mut perceivers: Vec<(u32, Perceiver)> = Vec::new();
    let mut text = String::new();
    for path in &files {
        let raster = PanelRaster::read_png(path)
            .with_context(|| format!("cannot read {}", path.display()))
            .map_err(Failure::Data)?;
        let perceiver = match perceivers.iter().position(|(side, _)| *side == raster.width) {
            Some(i) => &perceivers[i].1,
            None => {
                let opts = RenderOptions { side: raster.width, supersample };
                perceivers.push((raster.width, Perceiver::new(layout.layout(), opts)));
                &perceivers.last().expect("just pushed").1
            }
        };
        let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let panel = perceiver.perceive(&raster).map_err(|e| Failure::Data(e.in_panel(name.clone()).into()))?;
        text.push_str(&sorted_json(&serde_json::json!({ "image": name, "panel": panel })));
        text.push('\n');
    }
    write_file(out, &text)?;
    println!("perceived {} panels into {}", files.len(), out.display());
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Generate(a) => generate(a),
        Command::Train { corpus, out } => run_train(&corpus, &out),
        Command::Solve { corpus, pool, report, workers } => run_eval(&corpus, &pool, Some(&report), workers.workers),
        Command::Eval { corpus, pool, report, workers } => run_eval(&corpus, &pool, report.as_deref(), workers.workers),
        Command::Shrink { corpus, sizes, seeds, holdout, out, workers } => {
            run_shrink(&corpus, &sizes, &seeds, holdout, out.as_deref(), workers.workers)
        }
        Command::Perceive { images, layout, out, supersample } => run_perceive(&images, layout, &out, supersample),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (label, err) = match &f {
                Failure::Usage(e) => ("usage error", e),
                Failure::Data(e) => ("data error", e),
                Failure::Internal(e) => ("internal error", e),
            };
            eprintln!("{label}: {err:#}");
            ExitCode::from(f.code())
        }
    }
}
