use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hlorentz_cli::commands::{self, NormForm};
use hlorentz_cli::{run_verify, Check, CliError, CorpusSpec, RunConfig, ValueDistribution, VerifyParams};
use hlorentz_core::interpolation::CoupleKind;
use hlorentz_core::lorentz::Exponent;
use hlorentz_core::Signal;

#[derive(Parser)]
#[command(name = "hlorentz", version, about = "Lorentz and Hardy-Lorentz quasinorms, atomic decompositions and their checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form and level-form Lorentz quasinorms of a signal file.
    Norm {
        signal: PathBuf,
        #[arg(long, value_parser = parse_fraction)]
        p: f64,
        #[arg(long, value_parser = parse_exponent)]
        q: Exponent,
        #[arg(long, value_enum, default_value_t = NormForm::Both)]
        form: NormForm,
    },
    /// Non-increasing rearrangement as a step curve.
    Rearrange {
        signal: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Atomic decomposition, written as JSON and read back.
    Decompose {
        signal: PathBuf,
        #[arg(long, value_parser = parse_fraction)]
        p: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// K-functional sampled at t = 2^i.
    Kfunc {
        signal: PathBuf,
        #[arg(long, value_parser = parse_exponent)]
        q1: Exponent,
        #[arg(long, value_parser = parse_exponent)]
        q2: Exponent,
        #[arg(long, value_enum, default_value_t = Couple::Function)]
        couple: Couple,
        #[arg(long, default_value_t = 12)]
        t_exp: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs a check over a seeded corpus and writes CSV and JSON reports.
    Verify {
        #[arg(value_enum)]
        check: Check,
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long, value_parser = parse_fraction)]
        q1: Option<f64>,
        #[arg(long, value_parser = parse_exponent)]
        q2: Option<Exponent>,
        #[arg(long, value_parser = parse_fraction)]
        eta: Option<f64>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Report path prefix; `.csv` and `.json` are appended.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Writes a seeded corpus as JSON.
    GenCorpus {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct CorpusArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    count: usize,
    #[arg(long, default_value_t = 256)]
    length: usize,
    #[arg(long, default_value = "uniform")]
    dist: ValueDistribution,
    /// Comma-separated, fractions allowed.
    #[arg(long, default_value = "1")]
    p: String,
    /// Comma-separated, `inf` allowed.
    #[arg(long, default_value = "2")]
    q: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum Couple {
    Sequence,
    Function,
}

fn parse_exponent(s: &str) -> Result<Exponent, String> {
    s.parse::<Exponent>().map_err(|e| e.to_string())
}

fn parse_fraction(s: &str) -> Result<f64, String> {
    match parse_exponent(s)? {
        Exponent::Finite(v) => Ok(v),
        Exponent::Infinite => Err("expected a finite number".into()),
    }
}

impl CorpusArgs {
    fn spec(&self) -> Result<CorpusSpec, CliError> {
        let split = |s: &str| s.split(',').map(str::trim).filter(|t| !t.is_empty()).map(String::from).collect::<Vec<_>>();
        let p_list = split(&self.p).iter().map(|t| parse_fraction(t)).collect::<Result<Vec<_>, _>>();
        let q_list = split(&self.q).iter().map(|t| parse_exponent(t)).collect::<Result<Vec<_>, _>>();
        Ok(CorpusSpec {
            seed: self.seed,
            count: self.count,
            signal_length: self.length,
            value_distribution: self.dist,
            p_list: p_list.map_err(CliError::Usage)?,
            q_list: q_list.map_err(CliError::Usage)?,
        })
    }
}

fn load_config(path: Option<&Path>) -> Result<RunConfig, CliError> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => {
            let text =
                std::fs::read_to_string(p).map_err(|e| CliError::Io { path: p.display().to_string(), source: e })?;
            RunConfig::parse(&text)
        }
    }
}

fn emit<T: serde::Serialize>(value: &T, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => commands::write_json(path, value),
        None => {
            println!("{}", serde_json::to_string_pretty(value).expect("serializable output"));
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Norm { signal, p, q, form } => {
            let f: Signal = commands::read_json(&signal)?;
            emit(&commands::cmd_norm(&f, p, q, form)?, None)?;
        }
        Command::Rearrange { signal, out } => {
            let f: Signal = commands::read_json(&signal)?;
            emit(&commands::cmd_rearrange(&f), out.as_deref())?;
        }
        Command::Decompose { signal, p, out, config } => {
            let f: Signal = commands::read_json(&signal)?;
            let cfg = load_config(config.as_deref())?;
            emit(&commands::cmd_decompose(&f, p, &cfg, &out)?, None)?;
        }
        Command::Kfunc { signal, q1, q2, couple, t_exp, out } => {
            let f: Signal = commands::read_json(&signal)?;
            let kind = match couple {
                Couple::Sequence => CoupleKind::Sequence,
                Couple::Function => CoupleKind::Function,
            };
            emit(&commands::cmd_kfunc(&f, kind, q1, q2, t_exp)?, out.as_deref())?;
        }
        Command::Verify { check, corpus, q1, q2, eta, config, out } => {
            let cfg = load_config(config.as_deref())?;
            let report = run_verify(check, &corpus.spec()?, &cfg, &VerifyParams { q1, q2, eta })?;
            match out {
                Some(prefix) => report.save(&prefix)?,
                None => print!("{}", report.csv_string()?),
            }
            for (name, ok) in &report.checks {
                eprintln!("{} {name}", if *ok { "PASS" } else { "FAIL" });
            }
            for b in &report.brackets {
                eprintln!("bracket {} [{}]: {:e} .. {:e} (spread {:e})", b.key, b.group, b.min, b.max, b.spread);
            }
            if !report.passed {
                return Ok(ExitCode::from(1));
            }
        }
        Command::GenCorpus { corpus, out } => {
            commands::write_json(&out, &commands::cmd_gen_corpus(&corpus.spec()?)?)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
