//! On-disk cache of renormalized two-body elements, one CSV file per
//! configuration fingerprint.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::lattice::Momentum;

/// Element key `(k₁, k₂, k₃, k₄)`.
pub type ElementKey = [Momentum; 4];

const HEADER: [&str; 13] = [
    "k1x", "k1y", "k1z", "k2x", "k2y", "k2z", "k3x", "k3y", "k3z", "k4x", "k4y", "k4z", "value",
];

/// Hex SHA-256 of the newline-joined configuration fields.
pub fn fingerprint(fields: &[String]) -> String {
    let mut h = Sha256::new();
    for f in fields {
        h.update(f.as_bytes());
        h.update(b"\n");
    }
    hex::encode(h.finalize())
}

pub fn cache_path(dir: &Path, fingerprint: &str) -> PathBuf {
    dir.join(format!("twobody-{fingerprint}.csv"))
}

/// Formats a float with 17 significant digits, enough to round-trip exactly.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_elements<W: Write>(out: W, elements: &BTreeMap<ElementKey, f64>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for (key, &value) in elements {
        let mut rec: Vec<String> = key
            .iter()
            .flat_map(|k| k.0.iter().map(|c| c.to_string()))
            .collect();
        rec.push(fmt_f64(value));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_elements(path: &Path) -> Result<BTreeMap<ElementKey, f64>> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path)?;
    let headers = r.headers()?.clone();
    if headers.iter().ne(HEADER.iter().copied()) {
        return Err(Error::invalid(format!(
            "{}: unexpected cache header {:?}",
            path.display(),
            headers
        )));
    }
    let mut out = BTreeMap::new();
    for rec in r.records() {
        let rec = rec?;
        let bad = || Error::invalid(format!("{}: malformed cache row {:?}", path.display(), rec));
        let mut c = [0i32; 12];
        for (i, slot) in c.iter_mut().enumerate() {
            *slot = rec[i].trim().parse().map_err(|_| bad())?;
        }
        let value: f64 = rec[12].trim().parse().map_err(|_| bad())?;
        let key = [0, 1, 2, 3].map(|j| Momentum::new(c[3 * j], c[3 * j + 1], c[3 * j + 2]));
        out.insert(key, value);
    }
    Ok(out)
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, f: impl FnOnce(&mut fs::File) -> Result<()>) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    f(tmp.as_file_mut())?;
    tmp.as_file_mut().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = cache_path(dir.path(), "abc");
        let mut m = BTreeMap::new();
        m.insert([Momentum::ZERO; 4], 1.0 / 3.0);
        m.insert(
            [
                Momentum::new(-1, 2, 0),
                Momentum::new(1, -2, 0),
                Momentum::ZERO,
                Momentum::ZERO,
            ],
            -2.718281828459045e-7,
        );
        write_atomic(&path, |f| write_elements(f, &m)).unwrap();
        assert_eq!(read_elements(&path).unwrap(), m);
    }

    #[test]
    fn fingerprint_depends_on_every_field() {
        let a = fingerprint(&["x".into(), "y".into()]);
        assert_ne!(a, fingerprint(&["x".into(), "z".into()]));
        assert_ne!(a, fingerprint(&["xy".into()]));
        assert_eq!(a.len(), 64);
    }

    #[test]
    fn rejects_foreign_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        fs::write(&path, "a,b\n1,2\n").unwrap();
        assert!(read_elements(&path).is_err());
    }
}
