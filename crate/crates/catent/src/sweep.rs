//! Sweep results, deterministic CSV emission and flat key-value
//! configuration files for the command-line frontend.
//!
//! CSV layout: `#`-prefixed `key = value` metadata lines, one header line of
//! column names, then numeric rows at 12 significant digits with LF line
//! endings. Wall-clock timing is deliberately excluded from the file (it
//! goes to stderr) so repeated runs are byte-identical.

use std::fmt::Write as _;

use crate::{Error, Result};

/// Number of significant digits in emitted values.
const SIG_DIGITS: usize = 12;

/// A tabular sweep result plus the metadata that reproduces it.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
    metadata: Vec<(String, String)>,
}

impl SweepResult {
    pub fn new(
        header: Vec<String>,
        rows: Vec<Vec<f64>>,
        metadata: Vec<(String, String)>,
    ) -> Result<Self> {
        if header.is_empty() {
            return Err(Error::InvalidParameter {
                name: "header",
                value: 0.0,
                constraint: "at least one column required",
            });
        }
        for row in &rows {
            if row.len() != header.len() {
                return Err(Error::InvalidParameter {
                    name: "row",
                    value: row.len() as f64,
                    constraint: "row length must match the header",
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter {
                    name: "row",
                    value: f64::NAN,
                    constraint: "all values must be finite",
                });
            }
        }
        Ok(SweepResult {
            header,
            rows,
            metadata,
        })
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn metadata(&self) -> &[(String, String)] {
        &self.metadata
    }

    /// Column values by name.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// Render the CSV document (metadata, header, rows; LF endings).
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "# {k} = {v}");
        }
        let _ = writeln!(out, "{}", self.header.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format_value(*v)).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    /// Parse a CSV document produced by [`SweepResult::to_csv`].
    pub fn parse_csv(text: &str) -> Result<SweepResult> {
        let mut metadata = Vec::new();
        let mut header: Option<Vec<String>> = None;
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim_end();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some((k, v)) = rest.split_once('=') {
                    metadata.push((k.trim().to_string(), v.trim().to_string()));
                }
                continue;
            }
            match &header {
                None => header = Some(line.split(',').map(|s| s.trim().to_string()).collect()),
                Some(h) => {
                    let row: std::result::Result<Vec<f64>, _> =
                        line.split(',').map(|s| s.trim().parse::<f64>()).collect();
                    let row = row.map_err(|e| Error::Config {
                        path: "<csv>".into(),
                        line: lineno + 1,
                        message: format!("bad numeric cell: {e}"),
                    })?;
                    if row.len() != h.len() {
                        return Err(Error::Config {
                            path: "<csv>".into(),
                            line: lineno + 1,
                            message: format!("expected {} cells, found {}", h.len(), row.len()),
                        });
                    }
                    rows.push(row);
                }
            }
        }
        let header = header.ok_or_else(|| Error::Config {
            path: "<csv>".into(),
            line: 0,
            message: "missing header line".into(),
        })?;
        SweepResult::new(header, rows, metadata)
    }
}

/// Format a value with 12 significant digits, locale-independent.
pub fn format_value(v: f64) -> String {
    if v == 0.0 {
        // normalize -0.0 so equal results are byte-equal
        return "0".into();
    }
    let s = format!("{:.*e}", SIG_DIGITS - 1, v);
    // "1.23000000000e0" -> trim trailing zeros in the mantissa for
    // readability while keeping exact round-tripping
    match s.split_once('e') {
        Some((mant, exp)) => {
            let mant = mant.trim_end_matches('0').trim_end_matches('.');
            format!("{mant}e{exp}")
        }
        None => s,
    }
}

/// Flat `key = value` configuration file with line-level diagnostics.
/// Values are kept raw; typed accessors parse on demand. Lines starting
/// with `#` and blank lines are ignored.
#[derive(Debug, Clone)]
pub struct Config {
    path: String,
    entries: Vec<(String, String, usize)>, // key, raw value, line number
}

impl Config {
    pub fn parse(path: &str, text: &str) -> Result<Config> {
        let mut entries: Vec<(String, String, usize)> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
                path: path.into(),
                line: lineno,
                message: "expected `key = value`".into(),
            })?;
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() {
                return Err(Error::Config {
                    path: path.into(),
                    line: lineno,
                    message: "empty key".into(),
                });
            }
            if entries.iter().any(|(k, _, _)| k == key) {
                return Err(Error::Config {
                    path: path.into(),
                    line: lineno,
                    message: format!("duplicate key `{key}`"),
                });
            }
            entries.push((key.to_string(), value.to_string(), lineno));
        }
        Ok(Config {
            path: path.to_string(),
            entries,
        })
    }

    pub fn load(path: &std::path::Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)?;
        Config::parse(&path.display().to_string(), &text)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(k, _, _)| k.as_str())
    }

    fn find(&self, key: &str) -> Option<(&str, usize)> {
        self.entries
            .iter()
            .find(|(k, _, _)| k == key)
            .map(|(_, v, l)| (v.as_str(), *l))
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.find(key).map(|(v, _)| v)
    }

    pub fn require_str(&self, key: &str) -> Result<&str> {
        self.get_str(key).ok_or_else(|| Error::Config {
            path: self.path.clone(),
            line: 0,
            message: format!("missing required key `{key}`"),
        })
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>> {
        match self.find(key) {
            None => Ok(None),
            Some((v, line)) => v.parse::<f64>().map(Some).map_err(|e| Error::Config {
                path: self.path.clone(),
                line,
                message: format!("key `{key}`: {e}"),
            }),
        }
    }

    pub fn require_f64(&self, key: &str) -> Result<f64> {
        self.get_f64(key)?.ok_or_else(|| Error::Config {
            path: self.path.clone(),
            line: 0,
            message: format!("missing required key `{key}`"),
        })
    }

    /// Comma-separated list of numbers.
    pub fn get_f64_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.find(key) {
            None => Ok(None),
            Some((v, line)) => {
                let parsed: std::result::Result<Vec<f64>, _> =
                    v.split(',').map(|s| s.trim().parse::<f64>()).collect();
                parsed.map(Some).map_err(|e| Error::Config {
                    path: self.path.clone(),
                    line,
                    message: format!("key `{key}`: {e}"),
                })
            }
        }
    }

    pub fn require_f64_list(&self, key: &str) -> Result<Vec<f64>> {
        self.get_f64_list(key)?.ok_or_else(|| Error::Config {
            path: self.path.clone(),
            line: 0,
            message: format!("missing required key `{key}`"),
        })
    }

    /// Error if any present key is outside the allowed set.
    pub fn reject_unknown(&self, allowed: &[&str]) -> Result<()> {
        for (k, _, line) in &self.entries {
            if !allowed.contains(&k.as_str()) {
                return Err(Error::Config {
                    path: self.path.clone(),
                    line: *line,
                    message: format!("unknown key `{k}`"),
                });
            }
        }
        Ok(())
    }
}

/// Inclusive numeric grid from `min` to `max` in steps of `step`, robust to
/// floating-point endpoint error.
pub fn grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !min.is_finite() || !max.is_finite() || max < min {
        return Err(Error::InvalidParameter {
            name: "grid",
            value: step,
            constraint: "finite bounds with max >= min and step > 0 required",
        });
    }
    let n = ((max - min) / step).round() as usize;
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let v = min + step * i as f64;
        if v <= max + 0.5 * step {
            out.push(v.min(max));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let res = SweepResult::new(
            vec!["tau".into(), "negativity".into()],
            vec![
                vec![0.0, 0.0],
                vec![0.05, 0.123456789012345],
                vec![1.0e-13, -2.5],
            ],
            vec![("command".into(), "entpower".into()), ("V".into(), "10".into())],
        )
        .unwrap();
        let text = res.to_csv();
        assert!(text.ends_with('\n'));
        assert!(!text.contains('\r'));
        let back = SweepResult::parse_csv(&text).unwrap();
        assert_eq!(back.header(), res.header());
        assert_eq!(back.metadata(), res.metadata());
        for (a, b) in res.rows().iter().flatten().zip(back.rows().iter().flatten()) {
            let scale = a.abs().max(1e-300);
            assert!(
                ((a - b) / scale).abs() < 1e-11,
                "round trip {a} -> {b}"
            );
        }
    }

    #[test]
    fn formatting_is_stable() {
        assert_eq!(format_value(0.0), "0");
        assert_eq!(format_value(-0.0), "0");
        assert_eq!(format_value(1.0), "1e0");
        assert_eq!(format_value(0.05), "5e-2");
        // 12 significant digits survive
        let v = 0.123456789012345;
        assert!(format_value(v).starts_with("1.23456789012e-1"));
    }

    #[test]
    fn result_validation() {
        assert!(SweepResult::new(vec![], vec![], vec![]).is_err());
        assert!(SweepResult::new(
            vec!["a".into()],
            vec![vec![1.0, 2.0]],
            vec![]
        )
        .is_err());
        assert!(SweepResult::new(vec!["a".into()], vec![vec![f64::NAN]], vec![]).is_err());
    }

    #[test]
    fn config_parsing() {
        let cfg = Config::parse(
            "test.cfg",
            "# comment\n\ncommand = entpower\nv = 2, 5, 10\nd = 1.5\n",
        )
        .unwrap();
        assert_eq!(cfg.require_str("command").unwrap(), "entpower");
        assert_eq!(cfg.require_f64_list("v").unwrap(), vec![2.0, 5.0, 10.0]);
        assert_eq!(cfg.require_f64("d").unwrap(), 1.5);
        assert!(cfg.get_f64("missing").unwrap().is_none());
        assert!(cfg.reject_unknown(&["command", "v", "d"]).is_ok());
        assert!(cfg.reject_unknown(&["command"]).is_err());
    }

    #[test]
    fn config_diagnostics_carry_lines() {
        match Config::parse("bad.cfg", "key1 = 1\nnonsense line\n") {
            Err(Error::Config { path, line, .. }) => {
                assert_eq!(path, "bad.cfg");
                assert_eq!(line, 2);
            }
            other => panic!("expected config error, got {other:?}"),
        }
        match Config::parse("dup.cfg", "a = 1\na = 2\n") {
            Err(Error::Config { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected duplicate-key error, got {other:?}"),
        }
        let cfg = Config::parse("t.cfg", "x = not_a_number\n").unwrap();
        match cfg.get_f64("x") {
            Err(Error::Config { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn grid_generation() {
        let g = grid(0.0, 1.0, 0.25).unwrap();
        assert_eq!(g, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let g = grid(0.0, 10.0, 0.05).unwrap();
        assert_eq!(g.len(), 201);
        assert_eq!(*g.last().unwrap(), 10.0);
        assert!(grid(1.0, 0.0, 0.1).is_err());
        assert!(grid(0.0, 1.0, 0.0).is_err());
        // single point
        assert_eq!(grid(2.0, 2.0, 1.0).unwrap(), vec![2.0]);
    }
}
