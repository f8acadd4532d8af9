use std::collections::BTreeMap;

use super::{LvalueError, Result};

/// Externally computed `c(|d|)` values.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CoefficientFile {
    pub entries: BTreeMap<u64, i64>,
}

impl CoefficientFile {
    pub fn get(&self, abs_d: u64) -> Option<i64> {
        self.entries.get(&abs_d).copied()
    }
}

/// One `|d| c` pair per line, ascending in `|d|`; `#` starts a comment.
pub fn parse_coefficient_file(text: &str) -> Result<CoefficientFile> {
    let mut entries = BTreeMap::new();
    let mut last = 0u64;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |reason: &str| LvalueError::Import { line: i + 1, reason: reason.into() };
        let mut fields = line.split_whitespace();
        let (Some(d), Some(c), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(err("expected two fields"));
        };
        let d: u64 = d.parse().map_err(|_| err("bad |d|"))?;
        let c: i64 = c.parse().map_err(|_| err("bad coefficient"))?;
        if d <= last {
            return Err(err("|d| must be strictly ascending"));
        }
        last = d;
        entries.insert(d, c);
    }
    Ok(CoefficientFile { entries })
}
