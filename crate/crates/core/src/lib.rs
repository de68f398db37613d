//! Distribution-mapping sort.
//!
//! Each key is substituted into a *guessing function* that predicts its box
//! (and, in the two-pass variant, its final position) in the sorted output.
//! A short insertion pass then finishes the job. On uniformly distributed
//! keys the expected work is linear.
//!
//! ```
//! use guesssort::sorter::{sort_one_pass, MapperKind};
//!
//! let (sorted, stats) = sort_one_pass(&[5.0, -1.0, 3.5, 2.0], MapperKind::TwoTerminal).unwrap();
//! assert_eq!(sorted, [-1.0, 2.0, 3.5, 5.0]);
//! assert_eq!(stats.n_boxes, 4);
//! ```

pub mod bench;
pub mod cli;
pub mod datagen;
pub mod mapping;
pub mod record_file;
pub mod sorter;

pub use mapping::{
    DistributionArray, GuessingFunction, MapError, RefinedMapper, StatisticalMapper,
    TwoTerminalMapper,
};
pub use sorter::{sort_one_pass, sort_two_pass, Algorithm, MapperKind, SortStats};
