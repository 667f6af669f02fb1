use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use crate::{Error, Result};

/// Writes `contents` to a temporary file in the destination directory and
/// renames it over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(contents).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Tab-separated `time, logp, null, model` rows with a header line.
pub fn plot_tsv(rows: &[[f64; 4]]) -> String {
    let mut out = String::from("time\tlogp\tnull\tmodel\n");
    for r in rows {
        let _ = writeln!(out, "{}\t{}\t{}\t{}", r[0], r[1], r[2], r[3]);
    }
    out
}

/// `<dir>/<stem>.<suffix>.tsv` next to `out`.
pub fn sibling_path(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    out.with_file_name(format!("{stem}.{suffix}.tsv"))
}
