//! `phimix`: runs declarative experiments and writes CSV reports.
//!
//! Exit codes: 0 when every threshold is met, 1 when a threshold fails (the
//! CSV is still written and failing rows go to stderr), 2 on a configuration
//! error (no CSV is written).

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use phimix::config::{self, ExperimentConfig, ExperimentKind};
use phimix::runner;
use phimix::PhimixError;

#[derive(Parser, Debug)]
#[command(name = "phimix", version, about = "Sample and verify φ-mixtures of ID and MID laws")]
struct Cli {
    /// List the shipped example configs and exit.
    #[arg(long)]
    list: bool,
    /// Override the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the config sample count.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Worker threads; the report does not depend on this.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    /// CSV output path; stdout when neither this nor the config sets one.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
struct Source {
    /// Path to a TOML experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Name of a shipped example config (see `--list`).
    #[arg(long)]
    example: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run any experiment config.
    Run(Source),
    /// Random sums or maxima along a θ sequence.
    Converge {
        #[arg(value_enum)]
        target: ConvergeTarget,
        #[command(flatten)]
        source: Source,
    },
    /// PGF and pmf checks of the counting family.
    Pgf(Source),
    /// Convergence of the LT of θN_θ.
    ScaledLimit(Source),
    /// MID validity checks or extremal-process sampling.
    Mid {
        #[arg(long, conflicts_with = "sample")]
        check: bool,
        #[arg(long)]
        sample: bool,
        #[command(flatten)]
        source: Source,
    },
    /// φ-mixtures of stable laws against their closed-form CF.
    MixtureId(Source),
    /// Subordinated Lévy paths.
    Subordinate {
        /// Number of simulated paths (alias for `--samples`).
        #[arg(long)]
        paths: Option<usize>,
        #[command(flatten)]
        source: Source,
    },
    /// Self-decomposability checks.
    Classl(ClasslArgs),
    /// The limit condition `(1 - g_θ)/θ → ψ`.
    NsCheck(NsArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ConvergeTarget {
    Sum,
    Max,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ClasslSubjectArg {
    Linnik,
    Gaussian,
    UniformCf,
    BernoulliLt,
}

#[derive(Args, Debug)]
struct ClasslArgs {
    #[arg(long, conflicts_with_all = ["example", "subject"])]
    config: Option<PathBuf>,
    #[arg(long, conflicts_with = "subject")]
    example: Option<String>,
    #[arg(long, value_enum)]
    subject: Option<ClasslSubjectArg>,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    #[arg(long)]
    nu: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum NsFamilyArg {
    ExpAbs,
    ExpSquare,
    Rational,
}

#[derive(Args, Debug)]
struct NsArgs {
    #[arg(long, conflicts_with_all = ["example", "family"])]
    config: Option<PathBuf>,
    #[arg(long, conflicts_with = "family")]
    example: Option<String>,
    #[arg(long, value_enum)]
    family: Option<NsFamilyArg>,
}

fn config_error(msg: impl Into<String>) -> PhimixError {
    PhimixError::Config(msg.into())
}

fn load(source: &Source) -> Result<ExperimentConfig, PhimixError> {
    load_parts(source.config.as_ref(), source.example.as_deref())
}

fn load_parts(path: Option<&PathBuf>, example: Option<&str>) -> Result<ExperimentConfig, PhimixError> {
    match (path, example) {
        (Some(p), _) => {
            let text = fs::read_to_string(p).map_err(|e| config_error(format!("{}: {e}", p.display())))?;
            ExperimentConfig::from_toml(&text)
        }
        (None, Some(name)) => {
            let text = config::example(name).ok_or_else(|| config_error(format!("unknown example `{name}`; see --list")))?;
            ExperimentConfig::from_toml(text)
        }
        (None, None) => Err(config_error("one of --config or --example is required")),
    }
}

fn expect_kind(config: ExperimentConfig, allowed: &[ExperimentKind]) -> Result<ExperimentConfig, PhimixError> {
    if allowed.contains(&config.kind()) {
        Ok(config)
    } else {
        let names: Vec<&str> = allowed.iter().map(|k| k.name()).collect();
        Err(config_error(format!("config is a `{}` experiment; this subcommand runs {}", config.kind(), names.join(" or "))))
    }
}

fn classl_config(args: &ClasslArgs) -> Result<ExperimentConfig, PhimixError> {
    let Some(subject) = args.subject else {
        return expect_kind(load_parts(args.config.as_ref(), args.example.as_deref())?, &[ExperimentKind::Classl]);
    };
    let subject = match subject {
        ClasslSubjectArg::Linnik => {
            let alpha = args.alpha.ok_or_else(|| config_error("--subject linnik needs --alpha"))?;
            let nu = args.nu.ok_or_else(|| config_error("--subject linnik needs --nu"))?;
            format!("{{ kind = \"linnik\", lambda = {:?}, alpha = {alpha:?}, beta = {:?}, nu = {nu:?} }}", args.lambda, args.beta)
        }
        ClasslSubjectArg::Gaussian => format!("{{ kind = \"gaussian\", lambda = {:?} }}", args.lambda),
        ClasslSubjectArg::UniformCf => "{ kind = \"uniform-cf\" }".into(),
        ClasslSubjectArg::BernoulliLt => "{ kind = \"bernoulli-lt\" }".into(),
    };
    ExperimentConfig::from_toml(&format!("experiment = \"classl\"\n[[cases]]\nsubject = {subject}\n"))
}

fn ns_config(args: &NsArgs) -> Result<ExperimentConfig, PhimixError> {
    let Some(family) = args.family else {
        return expect_kind(load_parts(args.config.as_ref(), args.example.as_deref())?, &[ExperimentKind::NsCheck]);
    };
    let kind = match family {
        NsFamilyArg::ExpAbs => "exp-abs",
        NsFamilyArg::ExpSquare => "exp-square",
        NsFamilyArg::Rational => "rational",
    };
    ExperimentConfig::from_toml(&format!("experiment = \"ns-check\"\n[[cases]]\nfamily = {{ kind = \"{kind}\" }}\n"))
}

fn resolve(command: &Command) -> Result<ExperimentConfig, PhimixError> {
    use ExperimentKind as K;
    match command {
        Command::Run(s) => load(s),
        Command::Converge { target: ConvergeTarget::Sum, source } => expect_kind(load(source)?, &[K::ConvergeSum]),
        Command::Converge { target: ConvergeTarget::Max, source } => expect_kind(load(source)?, &[K::ConvergeMax]),
        Command::Pgf(s) => expect_kind(load(s)?, &[K::Pgf]),
        Command::ScaledLimit(s) => expect_kind(load(s)?, &[K::ScaledLimit]),
        Command::Mid { check, sample, source } => {
            let allowed: &[K] = match (check, sample) {
                (true, _) => &[K::MidCheck],
                (_, true) => &[K::MidSample],
                _ => &[K::MidCheck, K::MidSample],
            };
            expect_kind(load(source)?, allowed)
        }
        Command::MixtureId(s) => expect_kind(load(s)?, &[K::MixtureId]),
        Command::Subordinate { paths, source } => {
            let mut c = expect_kind(load(source)?, &[K::Subordinate])?;
            if paths.is_some() {
                c.samples = *paths;
            }
            Ok(c)
        }
        Command::Classl(a) => classl_config(a),
        Command::NsCheck(a) => ns_config(a),
    }
}

fn list() {
    for (name, text) in config::EXAMPLES {
        let kind = ExperimentConfig::from_toml(text).map(|c| c.kind().name()).unwrap_or("invalid");
        println!("{name}\t{kind}");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.list {
        list();
        return ExitCode::SUCCESS;
    }
    let Some(command) = &cli.command else {
        eprintln!("error: a subcommand is required (try --help or --list)");
        return ExitCode::from(2);
    };

    let mut config = match resolve(command) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(samples) = cli.samples {
        config.samples = Some(samples);
    }
    let out = cli.out.clone().or_else(|| config.out.clone());

    let report = match runner::run(&config, cli.workers) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    let bytes = match report.to_csv_bytes(&config) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let written = match &out {
        Some(path) => fs::write(path, &bytes).map_err(|e| format!("{}: {e}", path.display())),
        None => std::io::stdout().write_all(&bytes).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write report: {e}");
        return ExitCode::from(2);
    }
    for line in &report.summary {
        eprintln!("{line}");
    }
    if report.pass() {
        ExitCode::SUCCESS
    } else {
        for f in &report.failures {
            eprintln!("FAIL {f}");
        }
        ExitCode::FAILURE
    }
}
