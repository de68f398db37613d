//! Command-line front end.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | sorted output failed verification |
//! | 2 | usage error, unreadable or unparsable input, invalid spec, I/O failure |
//! | 3 | input contains a non-finite key |

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::bench::{self, BenchConfig, BenchError};
use crate::datagen::{self, Distribution, DistributionSpec, DEFAULT_HI, DEFAULT_LO};
use crate::mapping::{GuessingFunction, MapError, StatisticalMapper};
use crate::record_file::{format_key, RecordFile, RecordFileError};
use crate::sorter::{verify_sorted_permutation, Algorithm};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NON_FINITE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "guesssort", version, about = "Sort, generate and benchmark with guessing-function sorts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sort a record file.
    Sort(SortArgs),
    /// Generate a seeded record file.
    Gen(GenArgs),
    /// Time the algorithms across scales and write a CSV.
    Bench(BenchArgs),
    /// Summary statistics and box occupancy of a record file.
    Stats(StatsArgs),
}

#[derive(Debug, Args)]
struct SortArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// quicksort, gf1, gf1-stat, gf2 or gf2-stat
    #[arg(long, default_value = "gf1")]
    algo: String,
    /// Check the output is a sorted permutation of the input.
    #[arg(long)]
    verify: bool,
}

#[derive(Debug, Args)]
struct DistArgs {
    /// uniform, gaussian, clustered, constant, sorted-ascending, reverse-sorted
    #[arg(long, default_value = "uniform")]
    dist: String,
    #[arg(long, default_value_t = DEFAULT_LO, allow_hyphen_values = true)]
    lo: f64,
    #[arg(long, default_value_t = DEFAULT_HI, allow_hyphen_values = true)]
    hi: f64,
    /// Uniform only: round values down to whole numbers.
    #[arg(long)]
    integer: bool,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    mean: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Clustered: comma-separated centers.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    centers: Vec<f64>,
    /// Clustered: per-cluster standard deviation.
    #[arg(long, default_value_t = 1.0)]
    spread: f64,
    /// Clustered: comma-separated weights summing to 1 (default: equal).
    #[arg(long, value_delimiter = ',')]
    weights: Vec<f64>,
    /// Constant: the repeated value.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    value: f64,
}

impl DistArgs {
    fn distribution(&self) -> Result<Distribution, String> {
        Ok(match self.dist.as_str() {
            "uniform" => Distribution::Uniform {
                lo: self.lo,
                hi: self.hi,
                integer: self.integer,
            },
            "gaussian" | "normal" => Distribution::Gaussian {
                mean: self.mean,
                sigma: self.sigma,
            },
            "clustered" => {
                let weights = if self.weights.is_empty() && !self.centers.is_empty() {
                    vec![1.0 / self.centers.len() as f64; self.centers.len()]
                } else {
                    self.weights.clone()
                };
                Distribution::Clustered {
                    centers: self.centers.clone(),
                    spread: self.spread,
                    weights,
                }
            }
            "constant" => Distribution::Constant { value: self.value },
            "sorted-ascending" | "sorted" => Distribution::SortedAscending {
                lo: self.lo,
                hi: self.hi,
            },
            "reverse-sorted" | "reverse" => Distribution::ReverseSorted {
                lo: self.lo,
                hi: self.hi,
            },
            other => return Err(format!("unknown distribution `{other}`")),
        })
    }
}

#[derive(Debug, Args)]
struct GenArgs {
    #[command(flatten)]
    dist: DistArgs,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Comma-separated algorithm names.
    #[arg(long, default_value = "quicksort,gf1,gf1-stat,gf2,gf2-stat")]
    algos: String,
    /// Comma-separated exponents k; each run sorts 2^k records.
    #[arg(long, default_value = "8,11,14,17,20")]
    scales: String,
    #[command(flatten)]
    dist: DistArgs,
    #[arg(long, default_value_t = 5)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    warmup: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[arg(long)]
    input: PathBuf,
}

/// A failure already mapped to its exit code.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<RecordFileError> for Failure {
    fn from(e: RecordFileError) -> Self {
        let code = match e {
            RecordFileError::NonFinite { .. } => EXIT_NON_FINITE,
            _ => EXIT_INPUT,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<MapError> for Failure {
    fn from(e: MapError) -> Self {
        let code = match e {
            MapError::NonFiniteKey { .. } | MapError::NotFinite(_) => EXIT_NON_FINITE,
            _ => EXIT_INPUT,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<BenchError> for Failure {
    fn from(e: BenchError) -> Self {
        let code = match e {
            BenchError::Verification { .. } | BenchError::Sort { .. } => EXIT_VERIFY,
            _ => EXIT_INPUT,
        };
        Failure::new(code, e.to_string())
    }
}

fn read_input(path: &Path) -> Result<RecordFile, Failure> {
    RecordFile::read(path).map_err(|e| {
        let mut f = Failure::from(e);
        if !f.message.starts_with(&*path.to_string_lossy()) {
            f.message = format!("{}: {}", path.display(), f.message);
        }
        f
    })
}

fn cmd_sort(args: SortArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let algorithm: Algorithm = args
        .algo
        .parse()
        .map_err(|e: crate::sorter::UnknownAlgorithm| Failure::new(EXIT_INPUT, e.to_string()))?;
    let input = read_input(&args.input)?;
    let (sorted, _) = algorithm.run(&input.keys)?;
    if args.verify && !verify_sorted_permutation(&input.keys, &sorted) {
        return Err(Failure::new(
            EXIT_VERIFY,
            format!("{algorithm}: output is not a sorted permutation of the input"),
        ));
    }
    RecordFile::new(sorted).write(&args.output)?;
    if args.verify {
        let _ = writeln!(out, "verified {} records", input.keys.len());
    }
    Ok(())
}

fn cmd_gen(args: GenArgs) -> Result<(), Failure> {
    let kind = args.dist.distribution().map_err(|m| Failure::new(EXIT_INPUT, m))?;
    let spec = DistributionSpec::new(kind, args.n, args.seed);
    let keys = datagen::generate(&spec).map_err(|e| Failure::new(EXIT_INPUT, e.to_string()))?;
    RecordFile {
        comments: spec.provenance(),
        keys,
    }
    .write(&args.out)?;
    Ok(())
}

fn parse_list<T: std::str::FromStr>(raw: &str, what: &str) -> Result<Vec<T>, Failure>
where
    T::Err: std::fmt::Display,
{
    let items: Vec<&str> = raw
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    if items.is_empty() {
        return Err(Failure::new(EXIT_INPUT, format!("empty {what} list")));
    }
    items
        .into_iter()
        .map(|s| {
            s.parse()
                .map_err(|e| Failure::new(EXIT_INPUT, format!("bad {what} `{s}`: {e}")))
        })
        .collect()
}

fn cmd_bench(args: BenchArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let config = BenchConfig {
        algorithms: parse_list(&args.algos, "algorithm")?,
        scales: parse_list(&args.scales, "scale")?,
        distribution: args.dist.distribution().map_err(|m| Failure::new(EXIT_INPUT, m))?,
        trials: args.trials,
        warmup: args.warmup,
        seed: args.seed,
    };
    let rows = bench::run_bench(&config)?;
    bench::write_csv(&rows, &args.out)?;

    let _ = write!(out, "{}", bench::summary_table(&rows));
    for (gf2, gf1) in [
        (Algorithm::Gf2TwoTerminals, Algorithm::Gf1TwoTerminals),
        (Algorithm::Gf2Statistical, Algorithm::Gf1Statistical),
    ] {
        for &k in &config.scales {
            if let Some(r) = bench::cost_ratio(&rows, gf2, gf1, 1 << k) {
                let _ = writeln!(out, "{gf2} / {gf1} at 2^{k}: {r:.2}x");
            }
        }
    }
    let _ = writeln!(out, "wrote {} rows to {}", rows.len(), args.out.display());
    Ok(())
}

fn cmd_stats(args: StatsArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let input = read_input(&args.input)?;
    let keys = &input.keys;
    let stat = StatisticalMapper::build(keys)?;
    let (min, max) = keys
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let (empty_fraction, max_occupancy) = bench::scatter_profile(keys)?;
    let _ = writeln!(out, "n: {}", keys.len());
    let _ = writeln!(out, "min: {}", format_key(min));
    let _ = writeln!(out, "max: {}", format_key(max));
    let _ = writeln!(out, "mean: {}", format_key(stat.mean()));
    let _ = writeln!(out, "sigma: {}", format_key(stat.sigma()));
    let _ = writeln!(out, "statistical_degenerate: {}", stat.is_degenerate());
    let _ = writeln!(out, "two_terminals_degenerate: {}", min == max);
    let _ = writeln!(out, "empty_box_fraction: {empty_fraction:.6}");
    let _ = writeln!(out, "max_occupancy: {max_occupancy}");
    Ok(())
}

/// Runs the CLI with explicit arguments (including the program name) and
/// returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{rendered}");
            } else {
                let _ = write!(out, "{rendered}");
            }
            return code;
        }
    };
    let result = match cli.command {
        Command::Sort(a) => cmd_sort(a, out),
        Command::Gen(a) => cmd_gen(a),
        Command::Bench(a) => cmd_bench(a, out),
        Command::Stats(a) => cmd_stats(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(
            std::iter::once("guesssort").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run_args(&[]).0, EXIT_INPUT);
        assert_eq!(run_args(&["frobnicate"]).0, EXIT_INPUT);
        assert_eq!(run_args(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn bench_rejects_empty_algo_list() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("b.csv");
        let (code, _, err) = run_args(&["bench", "--algos", "", "--scales", "4", "--out", csv.to_str().unwrap()]);
        assert_eq!(code, EXIT_INPUT);
        assert!(err.contains("empty algorithm list"), "{err}");
        let (code, _, _) = run_args(&["bench", "--algos", "bogo", "--scales", "4", "--out", csv.to_str().unwrap()]);
        assert_eq!(code, EXIT_INPUT);
    }

    #[test]
    fn sort_reports_unknown_algo() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("in.txt");
        std::fs::write(&input, "1\n").unwrap();
        let (code, _, _) = run_args(&[
            "sort",
            "--input",
            input.to_str().unwrap(),
            "--output",
            dir.path().join("o.txt").to_str().unwrap(),
            "--algo",
            "bubble",
        ]);
        assert_eq!(code, EXIT_INPUT);
    }
}
