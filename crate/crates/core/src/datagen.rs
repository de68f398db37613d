//! Seeded record generation.
//!
//! All randomness comes from [`Prng`], a ChaCha8 stream seeded from a
//! 64-bit integer, so a [`DistributionSpec`] fully determines its output.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Default uniform lower bound for benchmark data.
pub const DEFAULT_LO: f64 = -20_000_000.0;
/// Default uniform upper bound for benchmark data.
pub const DEFAULT_HI: f64 = 20_000_000.0;

/// Name recorded in provenance headers.
pub const GENERATOR_NAME: &str = "chacha8 (rand_chacha 0.9 seed_from_u64), 53-bit floats, polar gaussians";

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid distribution spec: {field}: {reason}")]
pub struct InvalidSpec {
    pub field: &'static str,
    pub reason: String,
}

fn invalid(field: &'static str, reason: impl Into<String>) -> InvalidSpec {
    InvalidSpec {
        field,
        reason: reason.into(),
    }
}

/// The pinned generator.
#[derive(Debug, Clone)]
pub struct Prng {
    rng: ChaCha8Rng,
    spare_normal: Option<f64>,
}

impl Prng {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            spare_normal: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let x = lo + (hi - lo) * self.next_f64();
        if x >= hi {
            hi.next_down()
        } else {
            x
        }
    }

    /// Standard normal variate by the Marsaglia polar method.
    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.next_f64() - 1.0;
            let v = 2.0 * self.next_f64() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let scale = (-2.0 * s.ln() / s).sqrt();
                self.spare_normal = Some(v * scale);
                return u * scale;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Distribution {
    /// Uniform on `[lo, hi)`; with `integer`, values are rounded down to
    /// whole numbers (both bounds must then be integral).
    Uniform { lo: f64, hi: f64, integer: bool },
    Gaussian { mean: f64, sigma: f64 },
    /// Mixture of gaussians with a shared spread.
    Clustered {
        centers: Vec<f64>,
        spread: f64,
        weights: Vec<f64>,
    },
    Constant { value: f64 },
    /// Uniform `[lo, hi)` values, ascending.
    SortedAscending { lo: f64, hi: f64 },
    /// Uniform `[lo, hi)` values, descending.
    ReverseSorted { lo: f64, hi: f64 },
}

impl Distribution {
    pub fn uniform() -> Self {
        Distribution::Uniform {
            lo: DEFAULT_LO,
            hi: DEFAULT_HI,
            integer: false,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Distribution::Uniform { .. } => "uniform",
            Distribution::Gaussian { .. } => "gaussian",
            Distribution::Clustered { .. } => "clustered",
            Distribution::Constant { .. } => "constant",
            Distribution::SortedAscending { .. } => "sorted-ascending",
            Distribution::ReverseSorted { .. } => "reverse-sorted",
        }
    }

    /// Kind-specific parameters as `key=value` pairs.
    pub fn params(&self) -> String {
        let list = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
        match self {
            Distribution::Uniform { lo, hi, integer } => format!("lo={lo} hi={hi} integer={integer}"),
            Distribution::Gaussian { mean, sigma } => format!("mean={mean} sigma={sigma}"),
            Distribution::Clustered {
                centers,
                spread,
                weights,
            } => format!(
                "centers={} spread={spread} weights={}",
                list(centers),
                list(weights)
            ),
            Distribution::Constant { value } => format!("value={value}"),
            Distribution::SortedAscending { lo, hi } | Distribution::ReverseSorted { lo, hi } => {
                format!("lo={lo} hi={hi}")
            }
        }
    }
}

fn check_bounds(lo: f64, hi: f64) -> Result<(), InvalidSpec> {
    if !lo.is_finite() {
        return Err(invalid("lo", "must be finite"));
    }
    if !hi.is_finite() {
        return Err(invalid("hi", "must be finite"));
    }
    if lo >= hi {
        return Err(invalid("hi", format!("must exceed lo ({lo} >= {hi})")));
    }
    if !(hi - lo).is_finite() {
        return Err(invalid("hi", "range hi - lo overflows"));
    }
    Ok(())
}

/// What to generate: a distribution, a record count and a seed.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionSpec {
    pub kind: Distribution,
    pub n: usize,
    pub seed: u64,
}

impl DistributionSpec {
    pub fn new(kind: Distribution, n: usize, seed: u64) -> Self {
        Self { kind, n, seed }
    }

    /// Uniform reals on `[-2·10⁷, 2·10⁷)`.
    pub fn uniform_default(n: usize, seed: u64) -> Self {
        Self::new(Distribution::uniform(), n, seed)
    }

    pub fn validate(&self) -> Result<(), InvalidSpec> {
        match &self.kind {
            Distribution::Uniform { lo, hi, integer } => {
                check_bounds(*lo, *hi)?;
                if *integer && (lo.fract() != 0.0 || hi.fract() != 0.0) {
                    return Err(invalid("integer", "integer mode needs whole-number bounds"));
                }
            }
            Distribution::SortedAscending { lo, hi } | Distribution::ReverseSorted { lo, hi } => {
                check_bounds(*lo, *hi)?
            }
            Distribution::Gaussian { mean, sigma } => {
                if !mean.is_finite() {
                    return Err(invalid("mean", "must be finite"));
                }
                if !(sigma.is_finite() && *sigma > 0.0) {
                    return Err(invalid("sigma", "must be finite and > 0"));
                }
            }
            Distribution::Clustered {
                centers,
                spread,
                weights,
            } => {
                if centers.is_empty() {
                    return Err(invalid("centers", "need at least one cluster"));
                }
                if centers.iter().any(|c| !c.is_finite()) {
                    return Err(invalid("centers", "must be finite"));
                }
                if !(spread.is_finite() && *spread >= 0.0) {
                    return Err(invalid("spread", "must be finite and >= 0"));
                }
                if weights.len() != centers.len() {
                    return Err(invalid(
                        "weights",
                        format!("expected {} weights, got {}", centers.len(), weights.len()),
                    ));
                }
                if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
                    return Err(invalid("weights", "must be finite and >= 0"));
                }
                let total: f64 = weights.iter().sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(invalid("weights", format!("must sum to 1 (sum is {total})")));
                }
            }
            Distribution::Constant { value } => {
                if !value.is_finite() {
                    return Err(invalid("value", "must be finite"));
                }
            }
        }
        Ok(())
    }

    /// Comment lines describing how the data was made.
    pub fn provenance(&self) -> Vec<String> {
        vec![
            format!("generator: {GENERATOR_NAME}"),
            format!("kind: {}", self.kind.kind_name()),
            format!("params: {}", self.kind.params()),
            format!("n: {}", self.n),
            format!("seed: {}", self.seed),
        ]
    }
}

/// Produces exactly `spec.n` finite keys; the same spec always yields the
/// same sequence.
pub fn generate(spec: &DistributionSpec) -> Result<Vec<f64>, InvalidSpec> {
    spec.validate()?;
    let mut rng = Prng::new(spec.seed);
    let n = spec.n;
    let out = match &spec.kind {
        Distribution::Uniform { lo, hi, integer } => {
            let (lo, hi) = (*lo, *hi);
            if *integer {
                (0..n).map(|_| rng.uniform(lo, hi).floor()).collect()
            } else {
                (0..n).map(|_| rng.uniform(lo, hi)).collect()
            }
        }
        Distribution::Gaussian { mean, sigma } => (0..n)
            .map(|_| mean + sigma * rng.standard_normal())
            .collect(),
        Distribution::Clustered {
            centers,
            spread,
            weights,
        } => {
            let mut cumulative = Vec::with_capacity(weights.len());
            let mut acc = 0.0;
            for w in weights {
                acc += w;
                cumulative.push(acc);
            }
            (0..n)
                .map(|_| {
                    let u = rng.next_f64() * acc;
                    let k = cumulative
                        .iter()
                        .position(|&c| u < c)
                        .unwrap_or(centers.len() - 1);
                    centers[k] + spread * rng.standard_normal()
                })
                .collect()
        }
        Distribution::Constant { value } => vec![*value; n],
        Distribution::SortedAscending { lo, hi } => {
            let mut v: Vec<f64> = (0..n).map(|_| rng.uniform(*lo, *hi)).collect();
            v.sort_by(f64::total_cmp);
            v
        }
        Distribution::ReverseSorted { lo, hi } => {
            let mut v: Vec<f64> = (0..n).map(|_| rng.uniform(*lo, *hi)).collect();
            v.sort_by(|a, b| b.total_cmp(a));
            v
        }
    };
    Ok(out)
}
