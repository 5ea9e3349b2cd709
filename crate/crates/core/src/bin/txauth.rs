use mimalloc::MiMalloc;

#[global_allocator]
static GLOBAL: MiMalloc = MiMalloc;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use txauth::harness::{self, ExperimentConfig, SummaryTable, SweepKind};
use txauth::sim::{generate_corpus, io, CorpusParams, FrameCountRange, ImpairmentRanges};
use txauth::{Error, Result};

#[derive(Parser)]
#[command(name = "txauth", version, about = "Open-set transmitter authorization experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Spread {
    Default,
    Wide,
}

#[derive(Subcommand)]
enum Cmd {
    /// Synthesize a fingerprinted corpus and write it to disk.
    Generate {
        #[arg(long)]
        out: PathBuf,
        /// JSON corpus parameters; overrides the flags below.
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long, default_value_t = 71)]
        n_tx: usize,
        #[arg(long, default_value_t = 200)]
        min_frames: usize,
        #[arg(long, default_value_t = 1500)]
        max_frames: usize,
        #[arg(long, default_value_t = 20.0)]
        snr_db: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Spread::Default)]
        spread: Spread,
    },
    /// Train and evaluate every configured architecture on one realization.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        realization: usize,
    },
    /// Vary the number of authorized transmitters with no known outliers.
    SweepAuth {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        realizations: Option<usize>,
    },
    /// Vary the number of known outliers at fixed |A| and |O|.
    SweepKnown {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        realizations: Option<usize>,
    },
    /// Rebuild the CSV, summary and plots of a sweep directory.
    Report { dir: PathBuf },
}

fn load(config: &Path, realizations: Option<usize>) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(config)?;
    if let Some(n) = realizations {
        cfg.n_realizations = n;
        cfg.validate()?;
    }
    Ok(cfg)
}

fn print_table(t: &SummaryTable) {
    println!("{:>8} {:>7} {:>3} {:>15} {:>15}", t.parameter, "arch", "n", "auc", "bal_acc");
    for r in &t.rows {
        println!(
            "{:>8} {:>7} {:>3} {:>7.4} ± {:<5.4} {:>7.4} ± {:<5.4}",
            r.sweep_value, r.arch, r.n_realizations, r.auc.mean, r.auc.std, r.balanced_accuracy.mean, r.balanced_accuracy.std
        );
    }
}

fn sweep(config: &Path, realizations: Option<usize>, kind: SweepKind) -> Result<()> {
    let cfg = load(config, realizations)?;
    let corpus = cfg.corpus.load()?;
    let t = harness::run_sweep(&cfg, &corpus, kind)?;
    print_table(&t);
    println!("results in {}", cfg.output_dir.join(kind.dir_name()).display());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Generate {
            out,
            params,
            n_tx,
            min_frames,
            max_frames,
            snr_db,
            seed,
            spread,
        } => {
            let p = match params {
                Some(path) => {
                    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
                    serde_json::from_str::<CorpusParams>(&text)
                        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
                }
                None => {
                    let ranges = match spread {
                        Spread::Default => ImpairmentRanges::default(),
                        Spread::Wide => ImpairmentRanges::wide(),
                    };
                    CorpusParams::new(n_tx, FrameCountRange::new(min_frames, max_frames), snr_db, seed).with_ranges(ranges)
                }
            };
            let corpus = generate_corpus(&p)?;
            io::write_dataset(&out, &corpus)?;
            println!(
                "wrote {} frames from {} transmitters to {}",
                corpus.total_frames(),
                corpus.tx_ids().len(),
                out.display()
            );
        }
        Cmd::Run { config, realization } => {
            let cfg = load(&config, None)?;
            let corpus = cfg.corpus.load()?;
            let r = harness::run_realization(&cfg, &corpus, realization, true)?;
            println!("{}", serde_json::to_string_pretty(&r)?);
        }
        Cmd::SweepAuth { config, realizations } => sweep(&config, realizations, SweepKind::Authorized)?,
        Cmd::SweepKnown { config, realizations } => sweep(&config, realizations, SweepKind::Known)?,
        Cmd::Report { dir } => print_table(&harness::report(&dir)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
