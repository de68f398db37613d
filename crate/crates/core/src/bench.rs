//! Timing harness and empty-box experiments.
//!
//! Each timed measurement covers only the sort call, mapper construction
//! included. Data generation and output verification happen outside the
//! timed region. All runs are sequential on the calling thread.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::hint::black_box;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use thiserror::Error;

use crate::datagen::{generate, Distribution, DistributionSpec, InvalidSpec};
use crate::mapping::{GuessingFunction, MapError, TwoTerminalMapper};
use crate::sorter::{scatter, verify_sorted_permutation, Algorithm};

/// Scale exponents used when none are given: 2⁸, 2¹¹, 2¹⁴, 2¹⁷, 2²⁰.
pub const DEFAULT_SCALES: [u32; 5] = [8, 11, 14, 17, 20];

pub const CSV_HEADER: [&str; 9] = [
    "algorithm",
    "scale",
    "distribution",
    "trial",
    "seed",
    "elapsed_s",
    "empty_box_fraction",
    "max_occupancy",
    "cleanup_moves",
];

/// Largest accepted scale exponent.
pub const MAX_SCALE_EXPONENT: u32 = 32;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid bench config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Spec(#[from] InvalidSpec),
    #[error("{algorithm} failed at scale {scale} (seed {seed}): {source}")]
    Sort {
        algorithm: Algorithm,
        scale: usize,
        seed: u64,
        #[source]
        source: MapError,
    },
    #[error("{algorithm} produced unsorted output at scale {scale} (seed {seed})")]
    Verification {
        algorithm: Algorithm,
        scale: usize,
        seed: u64,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("malformed CSV: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub algorithms: Vec<Algorithm>,
    /// Exponents `k`; each run sorts `2^k` records.
    pub scales: Vec<u32>,
    /// Distribution template; `n` and the seed come from the scale and trial.
    pub distribution: Distribution,
    pub trials: usize,
    /// Untimed runs before the timed trials of each (algorithm, scale).
    pub warmup: usize,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            algorithms: Algorithm::ALL.to_vec(),
            scales: DEFAULT_SCALES.to_vec(),
            distribution: Distribution::uniform(),
            trials: 5,
            warmup: 1,
            seed: 1,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.algorithms.is_empty() {
            return Err(BenchError::InvalidConfig("no algorithms selected".into()));
        }
        if self.scales.is_empty() {
            return Err(BenchError::InvalidConfig("no scales given".into()));
        }
        if let Some(&k) = self.scales.iter().find(|&&k| k > MAX_SCALE_EXPONENT) {
            return Err(BenchError::InvalidConfig(format!(
                "scale exponent {k} exceeds {MAX_SCALE_EXPONENT}"
            )));
        }
        if self.trials == 0 {
            return Err(BenchError::InvalidConfig("trials must be at least 1".into()));
        }
        DistributionSpec::new(self.distribution.clone(), 1, self.seed).validate()?;
        Ok(())
    }
}

/// Seed for one (scale, trial) cell. Every algorithm sorts the same data in
/// the same cell.
pub fn trial_seed(base: u64, exponent: u32, trial: usize) -> u64 {
    base.wrapping_add(((exponent as u64) << 32) | trial as u64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub algorithm: Algorithm,
    pub scale: usize,
    pub distribution: String,
    pub trial: usize,
    pub seed: u64,
    pub elapsed_s: f64,
    /// Mapping observables; `None` for quicksort.
    pub empty_box_fraction: Option<f64>,
    pub max_occupancy: Option<usize>,
    pub cleanup_moves: Option<u64>,
}

/// Times every (algorithm, scale, trial) combination, verifying each output.
pub fn run_bench(config: &BenchConfig) -> Result<Vec<BenchRow>, BenchError> {
    config.validate()?;
    let mut rows = Vec::with_capacity(config.algorithms.len() * config.scales.len() * config.trials);
    for &algorithm in &config.algorithms {
        for &exponent in &config.scales {
            let scale = 1usize << exponent;
            for w in 0..config.warmup {
                let spec = DistributionSpec::new(
                    config.distribution.clone(),
                    scale,
                    trial_seed(config.seed, exponent, w),
                );
                let data = generate(&spec)?;
                let _ = black_box(algorithm.run(black_box(&data)));
            }
            for trial in 0..config.trials {
                let seed = trial_seed(config.seed, exponent, trial);
                let spec = DistributionSpec::new(config.distribution.clone(), scale, seed);
                let data = generate(&spec)?;

                let start = Instant::now();
                let result = algorithm.run(black_box(&data));
                let elapsed = start.elapsed();

                let (sorted, stats) = result.map_err(|source| BenchError::Sort {
                    algorithm,
                    scale,
                    seed,
                    source,
                })?;
                if !verify_sorted_permutation(&data, &sorted) {
                    return Err(BenchError::Verification {
                        algorithm,
                        scale,
                        seed,
                    });
                }
                rows.push(BenchRow {
                    algorithm,
                    scale,
                    distribution: config.distribution.kind_name().to_string(),
                    trial,
                    seed,
                    elapsed_s: elapsed.as_secs_f64(),
                    empty_box_fraction: stats.as_ref().map(|s| s.empty_box_fraction()),
                    max_occupancy: stats.as_ref().map(|s| s.max_occupancy),
                    cleanup_moves: stats.as_ref().map(|s| s.cleanup_moves),
                });
            }
        }
    }
    Ok(rows)
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    })
}

/// Median elapsed seconds over the trials of one (algorithm, scale).
pub fn median_elapsed(rows: &[BenchRow], algorithm: Algorithm, scale: usize) -> Option<f64> {
    median(
        rows.iter()
            .filter(|r| r.algorithm == algorithm && r.scale == scale)
            .map(|r| r.elapsed_s)
            .collect(),
    )
}

/// `median(numerator) / median(denominator)` at one scale.
pub fn cost_ratio(
    rows: &[BenchRow],
    numerator: Algorithm,
    denominator: Algorithm,
    scale: usize,
) -> Option<f64> {
    Some(median_elapsed(rows, numerator, scale)? / median_elapsed(rows, denominator, scale)?)
}

/// Median-per-cell table, algorithms down, scales across.
pub fn summary_table(rows: &[BenchRow]) -> String {
    let mut algorithms: Vec<Algorithm> = rows.iter().map(|r| r.algorithm).collect();
    algorithms.sort();
    algorithms.dedup();
    let mut scales: Vec<usize> = rows.iter().map(|r| r.scale).collect();
    scales.sort();
    scales.dedup();

    let mut out = String::new();
    let _ = write!(out, "{:<20}", "median elapsed (s)");
    for s in &scales {
        let _ = write!(out, " {:>12}", format!("2^{}", s.trailing_zeros()));
    }
    out.push('\n');
    for &a in &algorithms {
        let _ = write!(out, "{:<20}", a.name());
        for &s in &scales {
            match median_elapsed(rows, a, s) {
                Some(t) => {
                    let _ = write!(out, " {t:>12.6}");
                }
                None => {
                    let _ = write!(out, " {:>12}", "-");
                }
            }
        }
        out.push('\n');
    }
    out
}

/// Empty-box fraction and largest box of the two-terminals scatter.
pub fn scatter_profile(records: &[f64]) -> Result<(f64, usize), MapError> {
    let mapper = TwoTerminalMapper::build(records)?;
    let table = scatter(records, &mapper)?;
    Ok((
        table.empty_boxes() as f64 / mapper.n_boxes() as f64,
        table.max_occupancy(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmptyBoxReport {
    pub n: usize,
    pub trials: usize,
    /// Mean over trials of `empty_boxes / N`.
    pub mean_empty_fraction: f64,
    /// Mean over trials of `N / non-empty boxes`.
    pub mean_nonempty_occupancy: f64,
}

/// Scatters `trials` fresh uniform data sets of `n` records with the
/// two-terminals mapper and averages the empty-box fraction.
///
/// # Panics
///
/// Panics if `n < 2` or `trials == 0`.
pub fn empty_box_experiment(n: usize, trials: usize, seed: u64) -> EmptyBoxReport {
    assert!(n >= 2, "the experiment needs at least two records");
    assert!(trials >= 1, "the experiment needs at least one trial");
    let (mut empty_sum, mut occupancy_sum) = (0.0, 0.0);
    for t in 0..trials {
        let spec = DistributionSpec::uniform_default(n, seed.wrapping_add(t as u64));
        let data = generate(&spec).expect("default uniform spec is valid");
        let mapper = TwoTerminalMapper::build(&data).expect("generated data is finite");
        let table = scatter(&data, &mapper).expect("mapper covers its own records");
        let empty = table.empty_boxes();
        empty_sum += empty as f64 / n as f64;
        occupancy_sum += n as f64 / (n - empty) as f64;
    }
    EmptyBoxReport {
        n,
        trials,
        mean_empty_fraction: empty_sum / trials as f64,
        mean_nonempty_occupancy: occupancy_sum / trials as f64,
    }
}

fn csv_record(row: &BenchRow) -> [String; 9] {
    [
        row.algorithm.name().to_string(),
        row.scale.to_string(),
        row.distribution.clone(),
        row.trial.to_string(),
        row.seed.to_string(),
        format!("{:.6}", row.elapsed_s),
        row.empty_box_fraction.map(|f| f.to_string()).unwrap_or_default(),
        row.max_occupancy.map(|m| m.to_string()).unwrap_or_default(),
        row.cleanup_moves.map(|m| m.to_string()).unwrap_or_default(),
    ]
}

/// Writes the header and one line per row. Elapsed seconds are rendered with
/// six fractional digits; every other field is exact.
pub fn write_csv_to<W: io::Write>(rows: &[BenchRow], writer: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.write_record(csv_record(row))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv(rows: &[BenchRow], path: &Path) -> Result<(), BenchError> {
    let file = std::fs::File::create(path).map_err(|source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_csv_to(rows, io::BufWriter::new(file)).map_err(|source| BenchError::Csv {
        path: path.to_path_buf(),
        source,
    })
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize) -> Result<T, BenchError> {
    let raw = rec.get(i).unwrap_or_default();
    raw.parse()
        .map_err(|_| BenchError::Malformed(format!("bad {} value `{raw}`", CSV_HEADER[i])))
}

fn optional<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize) -> Result<Option<T>, BenchError> {
    if rec.get(i).unwrap_or_default().is_empty() {
        Ok(None)
    } else {
        field(rec, i).map(Some)
    }
}

/// Parses CSV produced by [`write_csv_to`].
pub fn read_csv_from<R: io::Read>(reader: R) -> Result<Vec<BenchRow>, BenchError> {
    let mut r = csv::Reader::from_reader(reader);
    let headers = r
        .headers()
        .map_err(|e| BenchError::Malformed(e.to_string()))?;
    if headers.iter().ne(CSV_HEADER) {
        return Err(BenchError::Malformed(format!("unexpected header {headers:?}")));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| BenchError::Malformed(e.to_string()))?;
        let algorithm = rec
            .get(0)
            .unwrap_or_default()
            .parse()
            .map_err(|e: crate::sorter::UnknownAlgorithm| BenchError::Malformed(e.to_string()))?;
        rows.push(BenchRow {
            algorithm,
            scale: field(&rec, 1)?,
            distribution: rec.get(2).unwrap_or_default().to_string(),
            trial: field(&rec, 3)?,
            seed: field(&rec, 4)?,
            elapsed_s: field(&rec, 5)?,
            empty_box_fraction: optional(&rec, 6)?,
            max_occupancy: optional(&rec, 7)?,
            cleanup_moves: optional(&rec, 8)?,
        });
    }
    Ok(rows)
}

/// Groups rows by (algorithm, scale) for reporting.
pub fn cells(rows: &[BenchRow]) -> BTreeMap<(Algorithm, usize), Vec<&BenchRow>> {
    let mut map: BTreeMap<_, Vec<_>> = BTreeMap::new();
    for r in rows {
        map.entry((r.algorithm, r.scale)).or_default().push(r);
    }
    map
}
