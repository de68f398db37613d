//! Guessing functions: value → box mappings.
//!
//! Boxes are numbered `1..=N`. A mapper converts a key into a continuous
//! *box coordinate* `c` and assigns it to box `⌊c⌋ + 1`; the fractional part
//! `c − ⌊c⌋` is kept as the key's offset inside its box so the two-pass
//! refinement can reuse it without evaluating the global function again.
//!
//! Two global functions are provided:
//!
//! * [`TwoTerminalMapper`]: the line through `(x_min, 1)` and `(x_max, N)`,
//!   with slope `k_global = (N − 1) / (x_max − x_min)`.
//! * [`StatisticalMapper`]: the window `(M − 3σ, M + 3σ)` stretched over
//!   `N` boxes, `k_global = N / (6σ)`, with out-of-window keys clamped to
//!   the first or last box.
//!
//! [`RefinedMapper`] layers the per-box local tangent on top of either one
//! using a [`DistributionArray`] of prefix occupancies.
//!
//! Keys with magnitude above 2⁴⁸⁰ would overflow the slope arithmetic, so
//! in that case a mapper evaluates on keys multiplied by an exact power of
//! two (see [`TwoTerminalMapper::prescale`]). Scaling by a power of two is
//! monotone, so sortedness guarantees are unaffected.

use std::ops::RangeInclusive;

use thiserror::Error;

/// Magnitude above which mappers evaluate on prescaled keys.
const WIDE_THRESHOLD: f64 = f64::from_bits((1023 + 480) << 52);
/// 2⁻⁵⁴⁴: brings any finite key below 2⁴⁸⁰.
const WIDE_PRESCALE: f64 = f64::from_bits((1023 - 544) << 52);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MapError {
    #[error("no records to map")]
    EmptyInput,
    #[error("record {index} is not a finite number ({value})")]
    NonFiniteKey { index: usize, value: f64 },
    #[error("key {0} is not a finite number")]
    NotFinite(f64),
    #[error("key {x} lies outside the mapper range [{lo}, {hi}]")]
    OutOfRange { x: f64, lo: f64, hi: f64 },
    #[error("mapper is degenerate; every record belongs in box 1")]
    DegenerateMapper,
    #[error("box {index} is outside 1..={n_boxes}")]
    BoxOutOfRange { index: usize, n_boxes: usize },
    #[error("box {0} is empty")]
    EmptyBox(usize),
    #[error("distribution array covers {got} boxes but the mapper has {expected}")]
    BoxCountMismatch { expected: usize, got: usize },
}

/// Returns an error naming the first non-finite key, if any.
pub fn check_finite(records: &[f64]) -> Result<(), MapError> {
    match records.iter().position(|x| !x.is_finite()) {
        Some(index) => Err(MapError::NonFiniteKey {
            index,
            value: records[index],
        }),
        None => Ok(()),
    }
}

fn prescale_for(max_abs: f64) -> f64 {
    if max_abs > WIDE_THRESHOLD {
        WIDE_PRESCALE
    } else {
        1.0
    }
}

/// Where a key lands under a global guessing function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxLocation {
    /// 1-based box index.
    pub index: usize,
    /// Fractional position inside the box, `(x − x_low) · k_global`. Lies in
    /// `[0, 1)` whenever the key falls inside the box's value interval; keys
    /// clamped into an end box fall outside it.
    pub offset: f64,
}

/// A global value → box mapping.
pub trait GuessingFunction {
    /// Number of boxes `N`.
    fn n_boxes(&self) -> usize;

    /// True when the slope is undefined and every record belongs in box 1.
    fn is_degenerate(&self) -> bool;

    /// Slope of the global mapping, `None` when degenerate.
    fn global_tangent(&self) -> Option<f64>;

    /// Locates `x`, returning its box and in-box offset.
    fn locate(&self, x: f64) -> Result<BoxLocation, MapError>;

    fn box_index(&self, x: f64) -> Result<usize, MapError> {
        self.locate(x).map(|loc| loc.index)
    }

    /// Box index of a finite key for a non-degenerate mapper, skipping the
    /// range and error checks of [`box_index`](Self::box_index). Keys outside
    /// the fitted range land in box 1 or box `N`.
    fn fitted_index(&self, x: f64) -> usize {
        self.box_index(x).unwrap_or(1)
    }
}

#[inline]
fn clamp_index(coord: f64, n_boxes: usize) -> usize {
    // the cast saturates, and maps negatives and NaN to 0
    (coord as usize + 1).min(n_boxes)
}

/// Splits a box coordinate into a 1-based box index and an offset, clamping
/// the index into `1..=n_boxes`.
#[inline]
fn split_coordinate(coord: f64, n_boxes: usize) -> BoxLocation {
    if coord < 0.0 {
        return BoxLocation {
            index: 1,
            offset: coord,
        };
    }
    // truncation is floor for non-negative values; the cast saturates
    let whole = coord as usize;
    if whole >= n_boxes {
        BoxLocation {
            index: n_boxes,
            offset: coord - (n_boxes - 1) as f64,
        }
    } else {
        BoxLocation {
            index: whole + 1,
            offset: coord - whole as f64,
        }
    }
}

/// Linear guessing function through `(x_min, 1)` and `(x_max, N)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoTerminalMapper {
    x_min: f64,
    x_max: f64,
    n_boxes: usize,
    k_global: Option<f64>,
    prescale: f64,
}

impl TwoTerminalMapper {
    /// Builds the mapper from the extrema of `records`, with one box per record.
    pub fn build(records: &[f64]) -> Result<Self, MapError> {
        if records.is_empty() {
            return Err(MapError::EmptyInput);
        }
        let (mut x_min, mut x_max) = (f64::INFINITY, f64::NEG_INFINITY);
        let mut all_finite = true;
        for &x in records {
            all_finite &= x.is_finite();
            x_min = x_min.min(x);
            x_max = x_max.max(x);
        }
        if !all_finite {
            check_finite(records)?;
        }
        Ok(Self::from_parts(x_min, x_max, records.len()))
    }

    /// Builds a mapper for an explicit range and box count.
    ///
    /// # Panics
    ///
    /// Panics if `n_boxes` is zero, if either bound is not finite, or if
    /// `x_min > x_max`.
    pub fn from_parts(x_min: f64, x_max: f64, n_boxes: usize) -> Self {
        assert!(n_boxes >= 1, "a mapper needs at least one box");
        assert!(
            x_min.is_finite() && x_max.is_finite() && x_min <= x_max,
            "invalid mapper range [{x_min}, {x_max}]"
        );
        let prescale = prescale_for(x_min.abs().max(x_max.abs()));
        let k_global = if n_boxes == 1 || x_min == x_max {
            None
        } else {
            Some((n_boxes - 1) as f64 / (x_max * prescale - x_min * prescale))
        };
        Self {
            x_min,
            x_max,
            n_boxes,
            k_global,
            prescale,
        }
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    /// Factor applied to keys before evaluation. It is 1 unless the range
    /// reaches beyond ±2⁴⁸⁰, in which case `k_global` is expressed per
    /// prescaled unit.
    pub fn prescale(&self) -> f64 {
        self.prescale
    }

    /// Lower edge of box `n`'s value interval, `(n − 1) / k_global + x_min`.
    pub fn box_floor(&self, n: usize) -> Option<f64> {
        self.k_global
            .map(|k| ((n - 1) as f64 / k + self.x_min * self.prescale) / self.prescale)
    }
}

impl GuessingFunction for TwoTerminalMapper {
    fn n_boxes(&self) -> usize {
        self.n_boxes
    }

    fn is_degenerate(&self) -> bool {
        self.k_global.is_none()
    }

    fn global_tangent(&self) -> Option<f64> {
        self.k_global
    }

    fn locate(&self, x: f64) -> Result<BoxLocation, MapError> {
        if !(self.x_min..=self.x_max).contains(&x) {
            return Err(MapError::OutOfRange {
                x,
                lo: self.x_min,
                hi: self.x_max,
            });
        }
        let k = self.k_global.ok_or(MapError::DegenerateMapper)?;
        // x_max sits exactly on the lower terminal of box N; rounding in k
        // must not push it into box N − 1.
        if x == self.x_max {
            return Ok(BoxLocation {
                index: self.n_boxes,
                offset: 0.0,
            });
        }
        let coord = (x * self.prescale - self.x_min * self.prescale) * k;
        Ok(split_coordinate(coord, self.n_boxes))
    }

    #[inline]
    fn fitted_index(&self, x: f64) -> usize {
        if x >= self.x_max {
            return self.n_boxes;
        }
        let k = self.k_global.unwrap_or(0.0);
        clamp_index((x * self.prescale - self.x_min * self.prescale) * k, self.n_boxes)
    }
}

/// Guessing function fitted to the mean and standard deviation of the
/// records: `(M − 3σ, M + 3σ)` spans the `N` boxes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatisticalMapper {
    mean: f64,
    sigma: f64,
    n_boxes: usize,
    k_global: Option<f64>,
    prescale: f64,
    /// `M − 3σ` in prescaled units.
    origin: f64,
}

impl StatisticalMapper {
    /// Two passes over `records`: the mean, then the centred second moment.
    /// `sigma` is the population standard deviation.
    pub fn build(records: &[f64]) -> Result<Self, MapError> {
        if records.is_empty() {
            return Err(MapError::EmptyInput);
        }
        let n = records.len();
        let (mut sum, mut lo, mut hi) = (0.0f64, f64::INFINITY, f64::NEG_INFINITY);
        let mut all_finite = true;
        for &x in records {
            all_finite &= x.is_finite();
            sum += x;
            lo = lo.min(x);
            hi = hi.max(x);
        }
        if !all_finite {
            check_finite(records)?;
        }
        let prescale = prescale_for(lo.abs().max(hi.abs()));
        // All-equal keys can leave a rounding residue in the mean.
        if lo == hi {
            return Ok(Self::from_scaled(lo * prescale, 0.0, n, prescale));
        }
        let mean_s = if prescale == 1.0 {
            sum / n as f64
        } else {
            records.iter().map(|&x| x * prescale).sum::<f64>() / n as f64
        };

        let m2 = records
            .iter()
            .map(|&x| {
                let d = x * prescale - mean_s;
                d * d
            })
            .sum::<f64>()
            / n as f64;
        Ok(Self::from_scaled(mean_s, m2.sqrt(), n, prescale))
    }

    /// Builds a mapper from known moments.
    ///
    /// # Panics
    ///
    /// Panics if `n_boxes` is zero, `mean` is not finite, or `sigma` is
    /// negative or not finite.
    pub fn from_moments(mean: f64, sigma: f64, n_boxes: usize) -> Self {
        assert!(n_boxes >= 1, "a mapper needs at least one box");
        assert!(mean.is_finite(), "mean must be finite");
        assert!(
            sigma.is_finite() && sigma >= 0.0,
            "sigma must be finite and non-negative"
        );
        let prescale = prescale_for(mean.abs().max(sigma));
        Self::from_scaled(mean * prescale, sigma * prescale, n_boxes, prescale)
    }

    fn from_scaled(mean_s: f64, sigma_s: f64, n_boxes: usize, prescale: f64) -> Self {
        let k = n_boxes as f64 / (6.0 * sigma_s);
        // A spread so small that the slope overflows cannot place anything
        // usefully; treat it like a zero spread.
        let k_global = (n_boxes > 1 && sigma_s > 0.0 && k.is_finite()).then_some(k);
        Self {
            mean: mean_s / prescale,
            sigma: sigma_s / prescale,
            n_boxes,
            k_global,
            prescale,
            origin: mean_s - 3.0 * sigma_s,
        }
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn prescale(&self) -> f64 {
        self.prescale
    }
}

impl GuessingFunction for StatisticalMapper {
    fn n_boxes(&self) -> usize {
        self.n_boxes
    }

    fn is_degenerate(&self) -> bool {
        self.k_global.is_none()
    }

    fn global_tangent(&self) -> Option<f64> {
        self.k_global
    }

    fn locate(&self, x: f64) -> Result<BoxLocation, MapError> {
        if !x.is_finite() {
            return Err(MapError::NotFinite(x));
        }
        let k = self.k_global.ok_or(MapError::DegenerateMapper)?;
        let coord = (x * self.prescale - self.origin) * k;
        Ok(split_coordinate(coord, self.n_boxes))
    }

    #[inline]
    fn fitted_index(&self, x: f64) -> usize {
        let k = self.k_global.unwrap_or(0.0);
        clamp_index((x * self.prescale - self.origin) * k, self.n_boxes)
    }
}

/// Prefix sums of box occupancies: `get(n)` is the number of records in
/// boxes `1..=n`, with `get(0) == 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistributionArray {
    // prefix[0] = 0, prefix[n] = A[n]
    prefix: Vec<usize>,
}

impl DistributionArray {
    pub fn from_occupancies(occupancies: &[usize]) -> Self {
        let mut prefix = Vec::with_capacity(occupancies.len() + 1);
        prefix.push(0);
        let mut acc = 0usize;
        for &c in occupancies {
            acc += c;
            prefix.push(acc);
        }
        Self { prefix }
    }

    /// Takes `[0, A[1], ..., A[N]]` as built by a counting placement.
    pub(crate) fn from_prefix(prefix: Vec<usize>) -> Self {
        debug_assert!(prefix.first() == Some(&0) && prefix.windows(2).all(|w| w[0] <= w[1]));
        Self { prefix }
    }

    /// Counts 1-based box indices into occupancies, then accumulates them.
    pub fn from_box_indices(indices: &[usize], n_boxes: usize) -> Self {
        let mut counts = vec![0usize; n_boxes];
        for &i in indices {
            counts[i - 1] += 1;
        }
        Self::from_occupancies(&counts)
    }

    /// Number of boxes `N`.
    pub fn len(&self) -> usize {
        self.prefix.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `A[n]` for `n` in `0..=N`.
    pub fn get(&self, n: usize) -> usize {
        self.prefix[n]
    }

    pub fn occupancy(&self, n: usize) -> usize {
        self.prefix[n] - self.prefix[n - 1]
    }

    pub fn total(&self) -> usize {
        *self.prefix.last().unwrap()
    }

    /// The 1-based final positions available to box `n`: `A[n−1]+1 ..= A[n]`.
    pub fn position_range(&self, n: usize) -> RangeInclusive<usize> {
        self.prefix[n - 1] + 1..=self.prefix[n]
    }

    /// `A[1..=N]`.
    pub fn as_slice(&self) -> &[usize] {
        &self.prefix[1..]
    }

    /// `A[0..=N]`, i.e. with the leading zero.
    pub fn with_origin(&self) -> &[usize] {
        &self.prefix
    }
}

/// A final position produced by the refined mapping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Placement {
    /// 1-based position in the sorted output.
    pub position: usize,
    /// The raw value fell outside the box's position range and was pulled in.
    pub clamped: bool,
}

/// Two-level mapping: the global function picks the box, then the local
/// tangent spreads the box's records over its slice of final positions.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinedMapper<M = TwoTerminalMapper> {
    base: M,
    dist: DistributionArray,
}

impl<M: GuessingFunction> RefinedMapper<M> {
    /// Scatters `records` with `base` and records the occupancies.
    pub fn build(base: M, records: &[f64]) -> Result<Self, MapError> {
        if base.is_degenerate() {
            return Err(MapError::DegenerateMapper);
        }
        let indices = records
            .iter()
            .map(|&x| base.box_index(x))
            .collect::<Result<Vec<_>, _>>()?;
        let dist = DistributionArray::from_box_indices(&indices, base.n_boxes());
        Ok(Self { base, dist })
    }

    pub fn from_parts(base: M, dist: DistributionArray) -> Result<Self, MapError> {
        if base.is_degenerate() {
            return Err(MapError::DegenerateMapper);
        }
        if dist.len() != base.n_boxes() {
            return Err(MapError::BoxCountMismatch {
                expected: base.n_boxes(),
                got: dist.len(),
            });
        }
        Ok(Self { base, dist })
    }

    pub fn base(&self) -> &M {
        &self.base
    }

    pub fn distribution(&self) -> &DistributionArray {
        &self.dist
    }

    pub fn into_parts(self) -> (M, DistributionArray) {
        (self.base, self.dist)
    }

    fn check_box(&self, n: usize) -> Result<(), MapError> {
        if n == 0 || n > self.dist.len() {
            return Err(MapError::BoxOutOfRange {
                index: n,
                n_boxes: self.dist.len(),
            });
        }
        if self.dist.occupancy(n) == 0 {
            return Err(MapError::EmptyBox(n));
        }
        Ok(())
    }

    /// `k_global · (A[n] − A[n−1] − 1)`.
    pub fn local_tangent(&self, n: usize) -> Result<f64, MapError> {
        self.check_box(n)?;
        let k = self.base.global_tangent().ok_or(MapError::DegenerateMapper)?;
        Ok(k * (self.dist.occupancy(n) - 1) as f64)
    }

    /// Final 1-based position of `x`:
    /// `A[n−1] + ⌊(x − x_low) · k_local⌋ + 1`, clamped into `A[n−1]+1 ..= A[n]`.
    pub fn position(&self, x: f64) -> Result<usize, MapError> {
        let loc = self.base.locate(x)?;
        self.check_box(loc.index)?;
        Ok(self.place(loc).position)
    }

    /// Places an already-located key. The box must be non-empty.
    ///
    /// `(x − x_low) · k_local` is evaluated as `offset · (A[n] − A[n−1] − 1)`,
    /// where `offset = (x − x_low) · k_global` comes straight from the global
    /// evaluation. The two are equal algebraically; this form needs no second
    /// subtraction, so a key inside its box never lands outside the range.
    #[inline]
    pub fn place(&self, loc: BoxLocation) -> Placement {
        let first = self.dist.get(loc.index - 1) + 1;
        let last = self.dist.get(loc.index);
        let spread = last - first;
        let raw = loc.offset * spread as f64;
        if raw < 0.0 {
            return Placement {
                position: first,
                clamped: true,
            };
        }
        let step = raw as usize;
        if step > spread {
            Placement {
                position: last,
                clamped: true,
            }
        } else {
            Placement {
                position: first + step,
                clamped: false,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m05() -> TwoTerminalMapper {
        TwoTerminalMapper::from_parts(0.0, 8.0, 5)
    }

    #[test]
    fn two_terminal_build() {
        let m = TwoTerminalMapper::build(&[4.0, -2.0, 7.0]).unwrap();
        assert_eq!(m.x_min(), -2.0);
        assert_eq!(m.x_max(), 7.0);
        assert_eq!(m.n_boxes(), 3);
        assert_eq!(m.global_tangent(), Some(2.0 / 9.0));
        assert!(!m.is_degenerate());
    }

    #[test]
    fn two_terminal_degenerate() {
        let single = TwoTerminalMapper::build(&[5.0]).unwrap();
        assert!(single.is_degenerate());
        assert_eq!(single.n_boxes(), 1);
        let equal = TwoTerminalMapper::build(&[3.0, 3.0, 3.0]).unwrap();
        assert!(equal.is_degenerate());
        assert_eq!(equal.locate(3.0), Err(MapError::DegenerateMapper));
    }

    #[test]
    fn build_rejects_bad_input() {
        assert_eq!(TwoTerminalMapper::build(&[]), Err(MapError::EmptyInput));
        assert!(matches!(
            TwoTerminalMapper::build(&[1.0, f64::NAN, f64::INFINITY]),
            Err(MapError::NonFiniteKey { index: 1, .. })
        ));
        assert!(matches!(
            StatisticalMapper::build(&[1.0, 2.0, f64::NEG_INFINITY]),
            Err(MapError::NonFiniteKey { index: 2, .. })
        ));
        assert_eq!(StatisticalMapper::build(&[]), Err(MapError::EmptyInput));
    }

    #[test]
    fn g1_examples() {
        let m = m05();
        assert_eq!(m.global_tangent(), Some(0.5));
        assert_eq!(m.box_index(0.0), Ok(1));
        assert_eq!(m.box_index(8.0), Ok(5));
        assert_eq!(m.box_index(3.0), Ok(2));
        assert!(matches!(m.box_index(8.5), Err(MapError::OutOfRange { .. })));
        assert!(matches!(m.box_index(-0.1), Err(MapError::OutOfRange { .. })));
        assert!(matches!(
            m.box_index(f64::NAN),
            Err(MapError::OutOfRange { .. })
        ));
    }

    #[test]
    fn box_floor_matches_box_interval() {
        let m = m05();
        for n in 1..=5 {
            assert_eq!(m.box_floor(n), Some(2.0 * (n - 1) as f64));
        }
        for x in [0.0, 0.5, 1.99, 2.0, 3.7, 6.0, 7.99] {
            let n = m.box_index(x).unwrap();
            assert!(m.box_floor(n).unwrap() <= x && x < m.box_floor(n + 1).unwrap());
        }
    }

    #[test]
    fn statistical_examples() {
        let m = StatisticalMapper::build(&[0.0, 0.0, 0.0]).unwrap();
        assert!(m.is_degenerate());
        assert_eq!(m.sigma(), 0.0);

        let m = StatisticalMapper::build(&[-1.0, 1.0]).unwrap();
        assert_eq!(m.mean(), 0.0);
        assert_eq!(m.sigma(), 1.0);
        assert_eq!(m.global_tangent(), Some(2.0 / 6.0));

        let m = StatisticalMapper::from_moments(0.0, 1.0, 600);
        assert_eq!(m.global_tangent(), Some(100.0));
        assert_eq!(m.box_index(0.0), Ok(301));
        assert_eq!(m.box_index(5.0), Ok(600));
        assert_eq!(m.box_index(-4.0), Ok(1));
        assert!(matches!(m.box_index(f64::NAN), Err(MapError::NotFinite(_))));
    }

    #[test]
    fn statistical_all_equal_awkward_value() {
        // 0.1 * 3 / 3 != 0.1 in floating point; the spread must still be zero.
        let m = StatisticalMapper::build(&[0.1, 0.1, 0.1]).unwrap();
        assert!(m.is_degenerate());
    }

    #[test]
    fn distribution_array_examples() {
        let a = DistributionArray::from_occupancies(&[2, 0, 3]);
        assert_eq!(a.as_slice(), &[2, 2, 5]);
        assert_eq!(a.get(0), 0);
        assert_eq!(a.total(), 5);
        assert_eq!(a.occupancy(3), 3);
        assert_eq!(a.position_range(3), 3..=5);
        assert_eq!(
            DistributionArray::from_occupancies(&[0, 0, 0]).as_slice(),
            &[0, 0, 0]
        );
        assert_eq!(DistributionArray::from_occupancies(&[1]).as_slice(), &[1]);
    }

    #[test]
    fn local_tangent_examples() {
        // occupancy 3 in box 2 (A[1] = 2, A[2] = 5)
        let base = m05();
        let dist = DistributionArray::from_occupancies(&[2, 3, 1, 0, 4]);
        let r = RefinedMapper::from_parts(base, dist).unwrap();
        assert_eq!(r.local_tangent(2), Ok(1.0));
        assert_eq!(r.local_tangent(3), Ok(0.0));
        assert_eq!(r.local_tangent(4), Err(MapError::EmptyBox(4)));
        assert!(matches!(
            r.local_tangent(6),
            Err(MapError::BoxOutOfRange { .. })
        ));

        let base = TwoTerminalMapper::from_parts(0.0, 1.5, 4);
        assert_eq!(base.global_tangent(), Some(2.0));
        let r = RefinedMapper::from_parts(base, DistributionArray::from_occupancies(&[4, 0, 0, 0]))
            .unwrap();
        assert_eq!(r.local_tangent(1), Ok(6.0));
    }

    #[test]
    fn g2_hand_trace() {
        let records = [0.0, 0.5, 1.5, 5.0, 7.9];
        let base = m05();
        let boxes: Vec<_> = records.iter().map(|&x| base.box_index(x).unwrap()).collect();
        assert_eq!(boxes, [1, 1, 1, 3, 4]);
        let r = RefinedMapper::build(base, &records).unwrap();
        assert_eq!(r.distribution().as_slice(), &[3, 3, 4, 5, 5]);
        assert_eq!(r.position(0.0), Ok(1));
        assert_eq!(r.position(0.5), Ok(1));
        assert_eq!(r.position(1.5), Ok(2));
        assert_eq!(r.position(5.0), Ok(4));
        assert_eq!(r.position(7.9), Ok(5));
        // box 2 holds nothing
        assert_eq!(r.position(2.5), Err(MapError::EmptyBox(2)));
    }

    #[test]
    fn g2_single_occupant_ignores_offset() {
        let r = RefinedMapper::from_parts(m05(), DistributionArray::from_occupancies(&[0, 0, 1, 0, 0]))
            .unwrap();
        for x in [4.0, 4.5, 5.99] {
            assert_eq!(r.position(x), Ok(1));
        }
    }

    #[test]
    fn refined_rejects_degenerate() {
        let base = TwoTerminalMapper::build(&[2.0, 2.0]).unwrap();
        assert_eq!(
            RefinedMapper::build(base, &[2.0, 2.0]),
            Err(MapError::DegenerateMapper)
        );
        assert!(matches!(
            RefinedMapper::from_parts(m05(), DistributionArray::from_occupancies(&[1, 1])),
            Err(MapError::BoxCountMismatch { expected: 5, got: 2 })
        ));
    }

    #[test]
    fn statistical_tails_clamp_in_refinement() {
        let base = StatisticalMapper::from_moments(0.0, 1.0, 6);
        // boxes: -10 and -2.9 → 1, -0.5 → 3, 0.5 → 4, 2.95 and 10 → 6
        let records = [-10.0, -2.9, -0.5, 0.5, 2.95, 10.0];
        let r = RefinedMapper::build(base, &records).unwrap();
        let low = r.place(base.locate(-10.0).unwrap());
        assert!(low.clamped);
        assert_eq!(low.position, 1);
        let high = r.place(base.locate(10.0).unwrap());
        assert!(high.clamped);
        assert_eq!(high.position, 6);
        let inside = r.place(base.locate(-2.9).unwrap());
        assert_eq!(inside, Placement { position: 1, clamped: false });
    }

    #[test]
    fn huge_range_stays_finite() {
        let m = TwoTerminalMapper::build(&[-f64::MAX, 0.0, f64::MAX]).unwrap();
        assert!(m.global_tangent().unwrap().is_finite());
        assert_eq!(m.prescale(), WIDE_PRESCALE);
        assert_eq!(m.box_index(-f64::MAX), Ok(1));
        assert_eq!(m.box_index(0.0), Ok(2));
        assert_eq!(m.box_index(f64::MAX), Ok(3));

        let s = StatisticalMapper::build(&[-f64::MAX, 0.0, f64::MAX]).unwrap();
        assert!(s.global_tangent().unwrap().is_finite());
        assert_eq!(s.box_index(0.0), Ok(2));
    }

    #[test]
    fn x_max_lands_in_last_box_despite_rounding() {
        // Ranges where (N-1)/(x_max-x_min) rounds down.
        for n in 2..200usize {
            for &(lo, hi) in &[(0.0, 0.3), (-1.7, 3.1), (1e-3, 9.9e5), (0.1, 0.7)] {
                let m = TwoTerminalMapper::from_parts(lo, hi, n);
                assert_eq!(m.box_index(hi), Ok(n));
                assert_eq!(m.box_index(lo), Ok(1));
            }
        }
    }
}
