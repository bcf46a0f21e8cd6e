use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use mdcc::bound::{min_feasible_volume, min_square_side};
use mdcc::codec::{Constraint, ConstraintKind, DecodeOptions, EncodeOptions};
use mdcc::container::{self, decode_file_with, encode_file_with, stats_container, stats_messages, stats_trials};
use mdcc::oracle::{self, PadDropMutant, Population};
use mdcc::{Codec, ConstraintConfig, Shape};

const EXIT_USAGE: u8 = 1;
const EXIT_CORRUPT: u8 = 2;
const EXIT_AUDIT: u8 = 3;

/// Encode files into arrays that satisfy a multidimensional constraint, using one redundancy bit per array.
#[derive(Parser, Debug)]
#[command(name = "mdcc", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Encode a file into a container
    Encode {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        io: IoArgs,
        #[arg(long = "max-iter")]
        max_iter: Option<u64>,
    },
    /// Decode a container back to the original bytes
    Decode {
        #[command(flatten)]
        io: IoArgs,
        #[arg(long = "max-iter")]
        max_iter: Option<u64>,
    },
    /// Check that every block of a container satisfies its constraint
    Check {
        /// Container file, or - for stdin
        #[arg(default_value = "-")]
        input: PathBuf,
    },
    /// Iteration statistics for a container, or for random trial messages
    Stats {
        /// Container file; omit to run trials with the config flags
        input: Option<PathBuf>,
        #[command(flatten)]
        config: OptConfigArgs,
        /// Number of random messages
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Encode the all-zero message once instead of random trials
        #[arg(long)]
        zero: bool,
        #[arg(long = "max-iter")]
        max_iter: Option<u64>,
    },
    /// Smallest feasible square side (or volume threshold for vzrcf)
    Bound {
        #[arg(long)]
        constraint: ConstraintKind,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 2)]
        p: usize,
    },
    /// Run a quick battery of roundtrip and injectivity audits
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args, Debug)]
struct IoArgs {
    /// Input file, or - for stdin
    #[arg(default_value = "-")]
    input: PathBuf,
    /// Output file, or - for stdout
    #[arg(short, long, default_value = "-")]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct ConfigArgs {
    #[arg(long)]
    constraint: ConstraintKind,
    #[arg(long)]
    n: usize,
    /// Defaults to the shape's dimension
    #[arg(long)]
    d: Option<usize>,
    /// Sub-array extents, comma separated
    #[arg(long, value_delimiter = ',')]
    shape: Vec<usize>,
    /// Minimum Hamming distance (hdrf)
    #[arg(long)]
    p: Option<usize>,
    /// Volume threshold (vzrcf)
    #[arg(long = "V")]
    volume: Option<usize>,
}

#[derive(Args, Debug)]
struct OptConfigArgs {
    #[arg(long)]
    constraint: Option<ConstraintKind>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    shape: Vec<usize>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long = "V")]
    volume: Option<usize>,
}

impl ConfigArgs {
    fn build(&self) -> anyhow::Result<ConstraintConfig> {
        let shape = || -> anyhow::Result<Shape> {
            if self.shape.is_empty() {
                bail!("--shape is required for {}", self.constraint);
            }
            if let Some(d) = self.d {
                if d != self.shape.len() {
                    bail!("--d {d} does not match a {}-dimensional --shape", self.shape.len());
                }
            }
            Ok(Shape::new(self.shape.clone())?)
        };
        let (d, constraint) = match self.constraint {
            ConstraintKind::Zrcf => (self.shape.len(), Constraint::Zrcf { shape: shape()? }),
            ConstraintKind::Rf => (self.shape.len(), Constraint::Rf { shape: shape()? }),
            ConstraintKind::Hdrf => {
                let distance = self.p.context("--p is required for hdrf")?;
                (self.shape.len(), Constraint::Hdrf { shape: shape()?, distance })
            }
            ConstraintKind::Vzrcf => {
                let volume = self.volume.context("--V is required for vzrcf")?;
                (self.d.unwrap_or(2), Constraint::Vzrcf { volume })
            }
        };
        Ok(ConstraintConfig::new(self.n, d, constraint)?)
    }
}

impl OptConfigArgs {
    fn build(&self) -> anyhow::Result<ConstraintConfig> {
        ConfigArgs {
            constraint: self.constraint.context("--constraint is required without an input file")?,
            n: self.n.context("--n is required without an input file")?,
            d: self.d,
            shape: self.shape.clone(),
            p: self.p,
            volume: self.volume,
        }
        .build()
    }
}

fn read_input(path: &PathBuf) -> anyhow::Result<Vec<u8>> {
    if path.as_os_str() == "-" {
        let mut buf = Vec::new();
        io::stdin().read_to_end(&mut buf).context("reading stdin")?;
        Ok(buf)
    } else {
        fs::read(path).with_context(|| format!("reading {}", path.display()))
    }
}

fn write_output(path: &PathBuf, bytes: &[u8]) -> anyhow::Result<()> {
    if path.as_os_str() == "-" {
        let mut out = io::stdout().lock();
        out.write_all(bytes)?;
        out.flush()?;
        Ok(())
    } else {
        fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
    }
}

fn decode_opts(max_iter: Option<u64>) -> DecodeOptions {
    DecodeOptions {
        max_iterations: max_iter,
        ..DecodeOptions::default()
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Encode { config, io, max_iter } => {
            let cfg = config.build()?;
            let input = read_input(&io.input)?;
            let opts = EncodeOptions { max_iterations: max_iter };
            write_output(&io.output, &encode_file_with(&input, &cfg, opts)?)?;
        }
        Command::Decode { io, max_iter } => {
            let input = read_input(&io.input)?;
            write_output(&io.output, &decode_file_with(&input, decode_opts(max_iter))?)?;
        }
        Command::Check { input } => {
            let report = container::check(&read_input(&input)?)?;
            println!("{report}");
            if !report.passed() {
                return Ok(EXIT_AUDIT);
            }
        }
        Command::Stats {
            input,
            config,
            trials,
            seed,
            zero,
            max_iter,
        } => {
            let report = match input {
                Some(path) => stats_container(&read_input(&path)?, decode_opts(max_iter))?,
                None => {
                    let cfg = config.build()?;
                    let opts = EncodeOptions { max_iterations: max_iter };
                    if zero {
                        stats_messages(&cfg, [vec![false; cfg.cells()? - 1]], opts)?
                    } else {
                        stats_trials(&cfg, trials, seed, opts)?
                    }
                }
            };
            print!("{report}");
        }
        Command::Bound { constraint, n, d, p } => {
            if n < 2 || d < 1 {
                bail!("bound needs n >= 2 and d >= 1");
            }
            if constraint == ConstraintKind::Vzrcf {
                match min_feasible_volume(n, d)? {
                    Some(v) => println!("{constraint} n={n} d={d}: V = {v}"),
                    None => println!("{constraint} n={n} d={d}: no feasible V"),
                }
            } else {
                let label = match constraint {
                    ConstraintKind::Hdrf => format!("{constraint} n={n} d={d} p={p}"),
                    _ => format!("{constraint} n={n} d={d}"),
                };
                match min_square_side(constraint, n, d, p)? {
                    Some(side) => println!("{label}: side = {side}"),
                    None => println!("{label}: no feasible side <= n"),
                }
            }
        }
        Command::Selftest { seed } => {
            if !selftest(seed)? {
                return Ok(EXIT_AUDIT);
            }
        }
    }
    Ok(0)
}

fn selftest(seed: u64) -> anyhow::Result<bool> {
    let mut ok = true;
    let mut report = |label: &str, passed: bool, detail: String| {
        println!("{} {label}: {detail}", if passed { "PASS" } else { "FAIL" });
        ok &= passed;
    };
    let sampled = Population::Sampled { count: 2000, seed };
    for (cfg, population) in [
        (ConstraintConfig::zrcf(4, &[2, 3])?, Population::Exhaustive),
        (ConstraintConfig::vzrcf(4, 2, 5)?, sampled.clone()),
        (ConstraintConfig::rf(4, &[3, 3])?, sampled.clone()),
        (ConstraintConfig::hdrf(5, &[4, 4], 2)?, sampled.clone()),
    ] {
        let codec = Codec::new(cfg.clone())?;
        let r = oracle::roundtrip_audit(&codec, &population)?;
        report(
            &format!("roundtrip {cfg}"),
            r.passed(),
            format!("{} messages, {} failures", r.checked, r.failures.len()),
        );
    }
    let codec = Codec::new(ConstraintConfig::zrcf(3, &[2, 3])?)?;
    let r = oracle::injectivity_audit(&codec, &Population::Exhaustive)?;
    report("injectivity zrcf n=3", r.passed(), format!("{} invalid arrays", r.exercised));
    let m = oracle::injectivity_audit(&PadDropMutant(codec), &Population::Exhaustive)?;
    report(
        "pad-drop mutant rejected",
        !m.passed(),
        format!("{} failures", m.failures.len()),
    );
    let r = oracle::reconstruction_audit(500, seed)?;
    report("overlap reconstruction", r.passed(), format!("{} instances", r.checked));
    let data: Vec<u8> = (0..256u32).map(|i| (i.wrapping_mul(2_654_435_761) >> 13) as u8).collect();
    let cfg = ConstraintConfig::rf(4, &[3, 3])?;
    let back = container::decode_file(&container::encode_file(&data, &cfg)?)?;
    report("container roundtrip", back == data, format!("{} bytes", data.len()));
    Ok(ok)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<mdcc::Error>() {
        Some(e) if e.is_corrupt_input() => EXIT_CORRUPT,
        _ => EXIT_USAGE,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("mdcc: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
