//! Flat `key = value` configuration with dotted keys.
//!
//! `#` starts a comment. Every key must be consumed by the scenario; keys
//! left over are reported with their line numbers.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::str::FromStr;

use lplab_core::C64;
use nalgebra::DMatrix;

use crate::error::CliError;

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
}

#[derive(Debug)]
pub struct Config {
    source: String,
    entries: BTreeMap<String, Entry>,
    used: RefCell<BTreeSet<String>>,
}

fn valid_key(key: &str) -> bool {
    !key.is_empty()
        && key.split('.').all(|part| {
            !part.is_empty() && part.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        })
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config {
            origin: path.display().to_string(),
            line: None,
            message: format!("cannot read: {e}"),
        })?;
        Self::parse(&path.display().to_string(), &text)
    }

    pub fn parse(source: &str, text: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |message: String| CliError::Config {
                origin: source.to_string(),
                line: Some(line),
                message,
            };
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, found `{content}`")))?;
            let key = key.trim();
            let value = value.trim();
            if !valid_key(key) {
                return Err(err(format!("invalid key `{key}`")));
            }
            if value.is_empty() {
                return Err(err(format!("key `{key}` has no value")));
            }
            if let Some(prev) = entries.get(key) {
                let prev: &Entry = prev;
                return Err(err(format!("duplicate key `{key}` (first set on line {})", prev.line)));
            }
            entries.insert(
                key.to_string(),
                Entry {
                    value: value.to_string(),
                    line,
                },
            );
        }
        Ok(Config {
            source: source.to_string(),
            entries,
            used: RefCell::new(BTreeSet::new()),
        })
    }

    fn error(&self, line: Option<usize>, message: String) -> CliError {
        CliError::Config {
            origin: self.source.clone(),
            line,
            message,
        }
    }

    fn raw(&self, key: &str) -> Result<&Entry, CliError> {
        self.used.borrow_mut().insert(key.to_string());
        self.entries
            .get(key)
            .ok_or_else(|| self.error(None, format!("missing required key `{key}`")))
    }

    pub fn has(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn string(&self, key: &str) -> Result<String, CliError> {
        Ok(self.raw(key)?.value.clone())
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T, CliError> {
        let e = self.raw(key)?;
        e.value
            .parse()
            .map_err(|_| self.error(Some(e.line), format!("cannot parse `{}` for key `{key}`", e.value)))
    }

    /// Error anchored to the line of `key`.
    pub fn invalid(&self, key: &str, message: impl Into<String>) -> CliError {
        let line = self.entries.get(key).map(|e| e.line);
        self.error(line, format!("{key}: {}", message.into()))
    }

    /// Comma-separated numbers, or `start:step:stop` (inclusive).
    pub fn list(&self, key: &str) -> Result<Vec<f64>, CliError> {
        let e = self.raw(key)?;
        let bad = |what: &str| self.error(Some(e.line), format!("{key}: {what}"));
        let parse = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(&format!("cannot parse number `{}`", s.trim())));
        let values = if e.value.contains(':') {
            let parts: Vec<&str> = e.value.split(':').collect();
            if parts.len() != 3 {
                return Err(bad("range must be `start:step:stop`"));
            }
            let (start, step, stop) = (parse(parts[0])?, parse(parts[1])?, parse(parts[2])?);
            if step <= 0.0 || stop < start {
                return Err(bad("range needs a positive step and stop >= start"));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            (0..count).map(|k| start + k as f64 * step).collect()
        } else if e.value == "[]" {
            Vec::new()
        } else {
            e.value.split(',').map(parse).collect::<Result<Vec<_>, _>>()?
        };
        if values.iter().any(|v| !v.is_finite()) {
            return Err(bad("values must be finite"));
        }
        Ok(values)
    }

    /// Real matrix, rows separated by `;`, entries by `,`. Entries may carry
    /// an imaginary part written `a+bi` or `a-bi`.
    pub fn matrix(&self, key: &str) -> Result<DMatrix<C64>, CliError> {
        let e = self.raw(key)?;
        let bad = |what: String| self.error(Some(e.line), format!("{key}: {what}"));
        let rows: Vec<Vec<C64>> = e
            .value
            .split(';')
            .map(|row| row.split(',').map(|s| parse_complex(s.trim()).ok_or_else(|| bad(format!("cannot parse entry `{}`", s.trim())))).collect())
            .collect::<Result<_, _>>()?;
        let n = rows.len();
        if rows.iter().any(|r| r.len() != rows[0].len()) {
            return Err(bad("rows have different lengths".into()));
        }
        let m = rows[0].len();
        Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
    }

    /// Reject keys no scenario step asked for.
    pub fn finish(&self) -> Result<(), CliError> {
        let used = self.used.borrow();
        if let Some((key, e)) = self.entries.iter().find(|(k, _)| !used.contains(*k)) {
            return Err(self.error(Some(e.line), format!("unknown key `{key}`")));
        }
        Ok(())
    }
}

fn parse_complex(s: &str) -> Option<C64> {
    if let Some(body) = s.strip_suffix('i') {
        let split = body
            .char_indices()
            .skip(1)
            .filter(|&(i, c)| (c == '+' || c == '-') && !matches!(body.as_bytes()[i - 1], b'e' | b'E'))
            .map(|(i, _)| i)
            .last();
        return match split {
            Some(i) => {
                let re = body[..i].parse::<f64>().ok()?;
                let im_str = &body[i..];
                let im = match im_str {
                    "+" => 1.0,
                    "-" => -1.0,
                    _ => im_str.parse::<f64>().ok()?,
                };
                Some(C64::new(re, im))
            }
            None => {
                let im = match body {
                    "" | "+" => 1.0,
                    "-" => -1.0,
                    _ => body.parse::<f64>().ok()?,
                };
                Some(C64::new(0.0, im))
            }
        };
    }
    s.parse::<f64>().ok().map(|re| C64::new(re, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_complex_entries() {
        assert_eq!(parse_complex("1.5"), Some(C64::new(1.5, 0.0)));
        assert_eq!(parse_complex("0.3-0.2i"), Some(C64::new(0.3, -0.2)));
        assert_eq!(parse_complex("-i"), Some(C64::new(0.0, -1.0)));
        assert_eq!(parse_complex("1e-3+2e-2i"), Some(C64::new(1e-3, 2e-2)));
        assert_eq!(parse_complex("x"), None);
    }

    #[test]
    fn reports_line_of_bad_entries() {
        let err = Config::parse("c", "a = 1\n\nbroken line\n").unwrap_err();
        assert!(err.to_string().contains("c:3"), "{err}");
        let cfg = Config::parse("c", "a = 1\nb = 2 # note\n").unwrap();
        assert_eq!(cfg.get::<i32>("a").unwrap(), 1);
        let err = cfg.finish().unwrap_err();
        assert!(err.to_string().contains("c:2") && err.to_string().contains("`b`"), "{err}");
    }

    #[test]
    fn ranges_and_lists() {
        let cfg = Config::parse("c", "r = 0:0.5:2\nl = 1, 2.5\ne = []\n").unwrap();
        assert_eq!(cfg.list("r").unwrap(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert_eq!(cfg.list("l").unwrap(), vec![1.0, 2.5]);
        assert!(cfg.list("e").unwrap().is_empty());
    }
}
