use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};

use ric_core::corpus::{self, SynthConfig};
use ric_core::experiment::{self, SweepConfig};
use ric_core::profile::TauProfile;
use ric_core::reduction::DEFAULT_SIGMA;
use ric_core::{decode, encode, Bundle, Error, QuantizerConfig};

const EXIT_ERROR: u8 = 1;
const EXIT_REJECTED: u8 = 2;

#[derive(Parser)]
#[command(name = "ric", version, about = "Associative memory registers over bit tables")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a labelled corpus and register every glyph into a memory bundle.
    Build {
        corpus: PathBuf,
        #[command(flatten)]
        quant: QuantArgs,
        /// Comma-separated label set; corpus labels outside it are rejected.
        #[arg(long, value_delimiter = ',')]
        labels: Option<Vec<String>>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recognize every glyph of a corpus; per-item CSV plus per-class scores.
    Recognize {
        bundle: PathBuf,
        corpus: PathBuf,
        /// Per-item verdict CSV (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-class precision/recall CSV (default: stderr).
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Retrieve from memory with an image as cue and write the decoded result as PGM.
    Retrieve {
        bundle: PathBuf,
        image: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_SIGMA)]
        sigma: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sweep instances per class; one CSV row per step.
    Sweep {
        corpus: PathBuf,
        #[command(flatten)]
        quant: QuantArgs,
        #[arg(long, value_delimiter = ',', default_values_t = experiment::DEFAULT_STEPS.to_vec())]
        steps: Vec<usize>,
        /// Retrieval seeds averaged into the agreement column.
        #[arg(long, value_delimiter = ',', default_values_t = vec![1u64, 2, 3])]
        seeds: Vec<u64>,
        /// Train/test split seed.
        #[arg(long, default_value_t = experiment::DEFAULT_SPLIT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_SIGMA)]
        sigma: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-register entropy table of a bundle.
    Entropy {
        bundle: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the productivity profile a*exp(-(s-s0)^2/(2c^2)) at each s.
    Tau {
        a: f64,
        s0: f64,
        c: f64,
        #[arg(required = true)]
        s: Vec<f64>,
    },
    /// Generate a synthetic ten-digit GLY1 corpus.
    Synth {
        #[arg(long, default_value_t = 200)]
        per_class: usize,
        #[arg(long, default_value_t = 0.8)]
        noise: f64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Canvas size WxH.
        #[arg(long, default_value = "32x32")]
        size: Pair,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct QuantArgs {
    /// Feature grid as ROWSxCOLS.
    #[arg(long, default_value = "8x8")]
    grid: Pair,
    /// Quantization levels (rows of every register).
    #[arg(long, default_value_t = 4)]
    levels: usize,
}

impl QuantArgs {
    fn config(&self) -> anyhow::Result<QuantizerConfig> {
        Ok(QuantizerConfig::new(self.grid.0, self.grid.1, self.levels)?)
    }
}

#[derive(Clone, Copy, Debug)]
struct Pair(usize, usize);

impl FromStr for Pair {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| format!("expected AxB, got {s:?}"))?;
        let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("{v:?}: {e}"));
        Ok(Pair(parse(a)?, parse(b)?))
    }
}

impl std::fmt::Display for Pair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.0, self.1)
    }
}

fn sink(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

fn load_records(path: &Path) -> anyhow::Result<Vec<corpus::Record>> {
    corpus::load_any(path).with_context(|| format!("reading corpus {}", path.display()))
}

fn load_bundle(path: &Path) -> anyhow::Result<Bundle> {
    Bundle::load(path).with_context(|| format!("reading bundle {}", path.display()))
}

fn bundle_quantizer(bundle: &Bundle) -> anyhow::Result<QuantizerConfig> {
    bundle
        .quantizer
        .ok_or_else(|| anyhow!("bundle does not record its quantizer; rebuild it with `ric build`"))
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Build {
            corpus,
            quant,
            labels,
            out,
        } => {
            let cfg = quant.config()?;
            let records = load_records(&corpus)?;
            let items = experiment::encode_records(&records, &cfg)?;
            let labels = match labels {
                Some(l) => l,
                None => experiment::label_set(items.iter().map(|(l, _)| l.as_str())),
            };
            let memory = experiment::build_memory(&labels, &items, &cfg)?;
            Bundle::new(memory, Some(cfg)).save(&out)?;
        }
        Command::Recognize {
            bundle,
            corpus,
            out,
            summary,
        } => {
            let bundle = load_bundle(&bundle)?;
            let cfg = bundle_quantizer(&bundle)?;
            let items = experiment::encode_records(&load_records(&corpus)?, &cfg)?;
            let (verdicts, scores) = experiment::evaluate(&bundle.memory, &items)?;
            experiment::write_verdicts_csv(sink(out.as_deref())?, &verdicts)?;
            match summary {
                Some(p) => experiment::write_scores_csv(File::create(p)?, &scores)?,
                None => experiment::write_scores_csv(io::stderr().lock(), &scores)?,
            }
        }
        Command::Retrieve {
            bundle,
            image,
            seed,
            sigma,
            out,
        } => {
            let bundle = load_bundle(&bundle)?;
            let cfg = bundle_quantizer(&bundle)?;
            let (_, img) = load_records(&image)?
                .into_iter()
                .next()
                .ok_or_else(|| anyhow!("{} holds no image", image.display()))?;
            let cue = encode(&img, &cfg)?;
            let got = bundle.memory.retrieve(&cue, seed, sigma)?;
            let picture = decode(&got.function, &cfg, img.width(), img.height())?;
            std::fs::write(&out, picture.to_pgm())?;
            println!("{}", got.label);
        }
        Command::Sweep {
            corpus,
            quant,
            steps,
            seeds,
            seed,
            sigma,
            out,
        } => {
            let cfg = SweepConfig {
                quantizer: quant.config()?,
                steps,
                seeds,
                sigma,
                split_seed: seed,
            };
            let result = experiment::sweep(&load_records(&corpus)?, &cfg)?;
            experiment::write_sweep_csv(sink(out.as_deref())?, &result)?;
        }
        Command::Entropy { bundle, out } => {
            let bundle = load_bundle(&bundle)?;
            let (n_cols, n_rows) = bundle.memory.shape();
            let mut w = sink(out.as_deref())?;
            writeln!(w, "label,entropy_bits,n_cols,n_rows")?;
            for (label, e) in bundle.memory.labels().iter().zip(bundle.memory.entropies()) {
                writeln!(w, "{label},{:.6},{n_cols},{n_rows}", e.bits())?;
            }
        }
        Command::Tau { a, s0, c, s } => {
            let profile = TauProfile::new(a, s0, c)?;
            let mut w = io::stdout().lock();
            writeln!(w, "s,tau")?;
            for s in s {
                if s < 0.0 {
                    bail!("entropy {s} must be non-negative");
                }
                writeln!(w, "{s},{}", profile.tau(s))?;
            }
        }
        Command::Synth {
            per_class,
            noise,
            seed,
            size,
            out,
        } => {
            if size.0 == 0 || size.1 == 0 {
                bail!("canvas {size} is empty");
            }
            let records = corpus::synthetic_digits(&SynthConfig {
                per_class,
                noise,
                seed,
                width: size.0,
                height: size.1,
            });
            corpus::save_corpus(&out, &records)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let rejected = matches!(e.downcast_ref::<Error>(), Some(Error::RetrievalUndefined));
            ExitCode::from(if rejected { EXIT_REJECTED } else { EXIT_ERROR })
        }
    }
}
