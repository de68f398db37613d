//! Plain-text record files: optional `#` comment lines, then one decimal key
//! per line.
//!
//! Keys are written in the shortest form that parses back to the same bits,
//! so a write/read cycle is lossless and two files holding the same keys are
//! byte-identical.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RecordFileError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: cannot parse `{text}` as a number")]
    Parse { line: usize, text: String },
    #[error("line {line}: `{text}` is not a finite number")]
    NonFinite { line: usize, text: String },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RecordFile {
    /// Comment lines without the leading `#` and one optional space.
    pub comments: Vec<String>,
    pub keys: Vec<f64>,
}

impl RecordFile {
    pub fn new(keys: Vec<f64>) -> Self {
        Self {
            comments: Vec::new(),
            keys,
        }
    }

    /// Parses file contents. Blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self, RecordFileError> {
        let mut file = RecordFile::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if let Some(comment) = line.strip_prefix('#') {
                file.comments
                    .push(comment.strip_prefix(' ').unwrap_or(comment).to_string());
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let value: f64 = line.parse().map_err(|_| RecordFileError::Parse {
                line: i + 1,
                text: line.to_string(),
            })?;
            if !value.is_finite() {
                return Err(RecordFileError::NonFinite {
                    line: i + 1,
                    text: line.to_string(),
                });
            }
            file.keys.push(value);
        }
        Ok(file)
    }

    pub fn read(path: &Path) -> Result<Self, RecordFileError> {
        let text = fs::read_to_string(path).map_err(|source| RecordFileError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn render(&self) -> String {
        let mut out = String::with_capacity(self.keys.len() * 12);
        for c in &self.comments {
            let _ = writeln!(out, "# {c}");
        }
        for &x in &self.keys {
            out.push_str(&format_key(x));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<(), RecordFileError> {
        fs::write(path, self.render()).map_err(|source| RecordFileError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Shortest round-trip decimal; scientific notation for very large or very
/// small magnitudes.
pub fn format_key(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_with_comments_and_scientific() {
        let f = RecordFile::parse("# kind: uniform\n#seed: 3\n1.5\n-2e3\n\n 7 \n").unwrap();
        assert_eq!(f.comments, ["kind: uniform", "seed: 3"]);
        assert_eq!(f.keys, [1.5, -2000.0, 7.0]);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        match RecordFile::parse("1\n2\nabc\n") {
            Err(RecordFileError::Parse { line, text }) => {
                assert_eq!(line, 3);
                assert_eq!(text, "abc");
            }
            other => panic!("unexpected {other:?}"),
        }
        for bad in ["nan", "inf", "-infinity", "NaN"] {
            assert!(matches!(
                RecordFile::parse(&format!("1\n{bad}\n")),
                Err(RecordFileError::NonFinite { line: 2, .. })
            ));
        }
    }

    #[test]
    fn formatting_is_shortest_and_lossless() {
        assert_eq!(format_key(1.0), "1");
        assert_eq!(format_key(-0.0), "-0");
        assert_eq!(format_key(0.1), "0.1");
        assert_eq!(format_key(1e300), "1e300");
        assert_eq!(format_key(-2.5e-7), "-2.5e-7");
        for x in [f64::MAX, f64::MIN_POSITIVE, 5e-324, -1.0 / 3.0, 12345678.9] {
            assert_eq!(format_key(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }

    #[test]
    fn render_then_parse() {
        let f = RecordFile {
            comments: vec!["seed: 1".into()],
            keys: vec![3.0, -0.0, 1e-310, 2.0f64.powi(60)],
        };
        let back = RecordFile::parse(&f.render()).unwrap();
        assert_eq!(back.comments, f.comments);
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&back.keys), bits(&f.keys));
    }
}
