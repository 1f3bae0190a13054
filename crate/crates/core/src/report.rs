//! CSV output with `#` comment headers.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::VERSION;

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// CSV text: `# conelab <version>`, then one `# ` line per comment, then
/// the header row and records.
pub fn csv_string<T: Serialize>(comments: &[String], rows: &[T]) -> Result<String> {
    let mut out = format!("# conelab {VERSION}\n");
    for c in comments {
        for line in c.lines() {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    let body = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    out.push_str(&String::from_utf8(body).map_err(|e| Error::Io(e.to_string()))?);
    Ok(out)
}

pub fn write_csv<T: Serialize>(path: &Path, comments: &[String], rows: &[T]) -> Result<()> {
    let text = csv_string(comments, rows)?;
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        }
    }
    let mut f = fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Rows of a file written by [`write_csv`], comments skipped.
pub fn read_csv<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(csv_err)?;
    r.deserialize().map(|row| row.map_err(csv_err)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Serialize, Deserialize, PartialEq, Debug)]
    struct Row {
        a: f64,
        b: String,
    }

    #[test]
    fn roundtrip() {
        let dir = std::env::temp_dir().join(format!("conelab-report-{}", std::process::id()));
        let path = dir.join("x.csv");
        let rows = vec![Row { a: 1.5, b: "p".into() }, Row { a: -2e-300, b: "q".into() }];
        write_csv(&path, &["seed = 3\nmore".into()], &rows).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# conelab "));
        assert!(text.contains("# seed = 3\n# more\na,b\n"));
        let back: Vec<Row> = read_csv(&path).unwrap();
        assert_eq!(back, rows);
        fs::remove_dir_all(dir).unwrap();
    }
}
