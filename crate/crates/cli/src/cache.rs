//! On-disk cache of `a_n` tables, enabled by `RMTWIST_CACHE_DIR`.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rmtwist::curve_arithmetic::{an_table, CoefficientTable, EllipticCurveData};

use crate::error::Result;

pub const CACHE_ENV: &str = "RMTWIST_CACHE_DIR";

fn key(curve: &EllipticCurveData) -> String {
    let a: Vec<String> = curve.ainvs.iter().map(i64::to_string).collect();
    format!("{}_{}", curve.label, a.join("_"))
}

fn load(path: &Path, curve: &EllipticCurveData, limit: usize) -> Option<CoefficientTable> {
    let bytes = fs::read(path).ok()?;
    if bytes.len() != (limit + 1) * 8 {
        return None;
    }
    let an = bytes.chunks_exact(8).map(|c| i64::from_le_bytes(c.try_into().unwrap())).collect();
    Some(CoefficientTable { curve: curve.clone(), an })
}

fn cached(dir: &Path, curve: &EllipticCurveData, needed: usize) -> Option<CoefficientTable> {
    let prefix = format!("{}_", key(curve));
    let mut candidates: Vec<(usize, PathBuf)> = fs::read_dir(dir)
        .ok()?
        .filter_map(|e| e.ok())
        .filter_map(|e| {
            let name = e.file_name().into_string().ok()?;
            let limit = name.strip_prefix(&prefix)?.strip_suffix(".an")?.parse::<usize>().ok()?;
            (limit >= needed).then_some((limit, e.path()))
        })
        .collect();
    candidates.sort();
    candidates.into_iter().find_map(|(limit, path)| load(&path, curve, limit))
}

/// A table of at least `needed` coefficients from the cache directory,
/// computing and storing it on a miss. `None` when caching is disabled.
pub fn coefficient_table(curve: &EllipticCurveData, needed: usize) -> Result<Option<Arc<CoefficientTable>>> {
    let Some(dir) = std::env::var_os(CACHE_ENV).map(PathBuf::from) else {
        return Ok(None);
    };
    if needed == 0 {
        return Ok(None);
    }
    if let Some(table) = cached(&dir, curve, needed) {
        return Ok(Some(Arc::new(table)));
    }
    let table = an_table(curve, needed)?;
    fs::create_dir_all(&dir)?;
    let bytes: Vec<u8> = table.an.iter().flat_map(|a| a.to_le_bytes()).collect();
    let path = dir.join(format!("{}_{}.an", key(curve), needed));
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, &path)?;
    Ok(Some(Arc::new(table)))
}
