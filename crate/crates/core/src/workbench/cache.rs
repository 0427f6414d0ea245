//! On-disk caches: one directory per kind, CSV rows with 17 significant digits
//! and a leading `# ... entries=N` line so that truncation is detected.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use crate::gl2forms::{build_eigenform, HolomorphicForm};
use crate::kloosterman::{KloostermanCache, KloostermanInput, SumKindKey};
use crate::numerics::ComplexValue;
use crate::{Error, Result};

pub const COEFFICIENT_DIR: &str = "coefficients";
pub const KLOOSTERMAN_DIR: &str = "kloosterman";

/// `<dir>/coefficients/k<k>_n<n_max>.csv`
pub fn coefficient_cache_path(dir: &Path, k: u32, n_max: usize) -> PathBuf {
    dir.join(COEFFICIENT_DIR).join(format!("k{k}_n{n_max}.csv"))
}

/// `<dir>/kloosterman/sums.csv`
pub fn kloosterman_cache_path(dir: &Path) -> PathBuf {
    dir.join(KLOOSTERMAN_DIR).join("sums.csv")
}

// write to a sibling file, then rename over the target
fn write_atomic(path: &Path, body: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(body)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn corrupt(line: usize, message: impl Into<String>) -> Error {
    Error::Corruption {
        line,
        message: message.into(),
    }
}

/// Reads every line and checks the `entries=N` count of the first.
fn read_counted(path: &Path, tag: &str) -> Result<Vec<String>> {
    let file = fs::File::open(path)?;
    let mut lines = Vec::new();
    for line in BufReader::new(file).lines() {
        lines.push(line?);
    }
    let header = lines.first().ok_or_else(|| corrupt(1, "empty file"))?;
    let count = header
        .strip_prefix("# ")
        .filter(|h| h.starts_with(tag))
        .and_then(|h| h.split_whitespace().find_map(|w| w.strip_prefix("entries=")))
        .and_then(|n| n.parse::<usize>().ok())
        .ok_or_else(|| corrupt(1, format!("expected header \"# {tag} ... entries=N\"")))?;
    let rows = lines.len() - 1;
    if rows != count {
        return Err(corrupt(lines.len(), format!("header promises {count} rows, found {rows}")));
    }
    Ok(lines)
}

pub fn write_coefficient_cache(path: &Path, form: &HolomorphicForm) -> Result<()> {
    let mut body = format!("# coefficients weight={} entries={}\n", form.weight(), form.n_max()).into_bytes();
    form.write_cache(&mut body)?;
    write_atomic(path, &body)
}

pub fn read_coefficient_cache(path: &Path, k: u32) -> Result<HolomorphicForm> {
    let lines = read_counted(path, "coefficients")?;
    let weight = lines[0]
        .split_whitespace()
        .find_map(|w| w.strip_prefix("weight="))
        .and_then(|w| w.parse::<u32>().ok());
    if weight != Some(k) {
        return Err(corrupt(1, format!("cache is not for weight {k}")));
    }
    let body = lines[1..].join("\n");
    HolomorphicForm::read_cache(k, body.as_bytes()).map_err(|e| match e {
        Error::Corruption { line, message } => corrupt(line + 1, message),
        other => other,
    })
}

/// The eigenform from `<dir>/coefficients`, building and storing it when absent.
pub fn load_or_build_form(dir: &Path, k: u32, n_max: usize) -> Result<HolomorphicForm> {
    let path = coefficient_cache_path(dir, k, n_max);
    if path.exists() {
        return read_coefficient_cache(&path, k);
    }
    let form = build_eigenform(k, n_max)?;
    write_coefficient_cache(&path, &form)?;
    Ok(form)
}

fn kind_name(kind: SumKindKey) -> &'static str {
    match kind {
        SumKindKey::Incomplete => "incomplete",
        SumKindKey::Complete => "complete",
    }
}

/// Rows `kind,n1,n2,m1,m2,d1,d2,re,im` in key order.
pub fn write_kloosterman_cache(path: &Path, cache: &KloostermanCache) -> Result<()> {
    let entries = cache.entries();
    let mut body = format!("# kloosterman entries={}\n", entries.len());
    for (kind, i, z) in entries {
        body.push_str(&format!(
            "{},{},{},{},{},{},{},{:.16e},{:.16e}\n",
            kind_name(kind),
            i.n1,
            i.n2,
            i.m1,
            i.m2,
            i.d1,
            i.d2,
            z.re,
            z.im
        ));
    }
    write_atomic(path, body.as_bytes())
}

/// Reads a whole Kloosterman cache; any bad row rejects the file.
pub fn read_kloosterman_cache(path: &Path) -> Result<KloostermanCache> {
    let lines = read_counted(path, "kloosterman")?;
    let cache = KloostermanCache::new();
    let mut rows = Vec::with_capacity(lines.len() - 1);
    for (i, line) in lines.iter().enumerate().skip(1) {
        let bad = |m: &str| corrupt(i + 1, m);
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 9 {
            return Err(bad("expected 9 fields"));
        }
        let kind = match f[0] {
            "incomplete" => SumKindKey::Incomplete,
            "complete" => SumKindKey::Complete,
            _ => return Err(bad("unknown sum kind")),
        };
        let int = |s: &str| s.parse::<i64>().map_err(|_| bad("bad integer"));
        let uint = |s: &str| s.parse::<u64>().map_err(|_| bad("bad modulus"));
        let real = |s: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| bad("bad value"))
        };
        let input = KloostermanInput::new(int(f[1])?, int(f[2])?, int(f[3])?, int(f[4])?, uint(f[5])?, uint(f[6])?)
            .map_err(|e| bad(&e.to_string()))?;
        rows.push((kind, input, ComplexValue::new(real(f[7])?, real(f[8])?)));
    }
    for (kind, input, z) in rows {
        cache.insert(kind, input, z);
    }
    Ok(cache)
}

/// Writes both caches under `dir`, reads them back and demands bitwise equality.
pub fn cache_roundtrip(dir: &Path, form: &HolomorphicForm, sums: &KloostermanCache) -> Result<()> {
    let cpath = coefficient_cache_path(dir, form.weight(), form.n_max());
    write_coefficient_cache(&cpath, form)?;
    let back = read_coefficient_cache(&cpath, form.weight())?;
    if back.table() != form.table() {
        return Err(Error::Consistency("coefficient cache changed on round trip".into()));
    }
    let kpath = kloosterman_cache_path(dir);
    write_kloosterman_cache(&kpath, sums)?;
    let back = read_kloosterman_cache(&kpath)?;
    if back.entries() != sums.entries() {
        return Err(Error::Consistency("Kloosterman cache changed on round trip".into()));
    }
    Ok(())
}
