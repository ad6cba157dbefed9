use std::fs;
use std::io::Write;
use std::path::Path;

use ptower::{Error, Result};
use serde::Serialize;

use crate::Format;

/// A flat table for CSV output.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: &[&'static str]) -> Self {
        Table { headers: headers.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }
}

/// Shorthand for building a CSV row from displayable cells.
#[macro_export]
macro_rules! row {
    ($($x:expr),* $(,)?) => { vec![$($x.to_string()),*] };
}

fn csv_bytes(t: &Table) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(&t.headers).map_err(io)?;
    for r in &t.rows {
        w.write_record(r).map_err(io)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.to_string()))
}

/// Renders a report as pretty JSON, or as CSV when a table is given.
pub fn render<T: Serialize>(format: Format, value: &T, table: Option<&Table>) -> Result<Vec<u8>> {
    match format {
        Format::Json => {
            let mut s = serde_json::to_vec_pretty(value).map_err(|e| Error::Invalid(e.to_string()))?;
            s.push(b'\n');
            Ok(s)
        }
        Format::Csv => match table {
            Some(t) => csv_bytes(t),
            None => Err(Error::Invalid("this report has no flat form; use --format json".into())),
        },
    }
}

/// Writes atomically to `out`, or to stdout.
pub fn write(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => {
            let mut tmp = path.as_os_str().to_owned();
            tmp.push(".tmp");
            fs::write(&tmp, bytes)?;
            fs::rename(&tmp, path)?;
            Ok(())
        }
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(bytes)?;
            so.flush()?;
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quotes_fields() {
        let mut t = Table::new(&["a", "b"]);
        t.push(row![1, "x, y"]);
        let s = String::from_utf8(render(Format::Csv, &(), Some(&t)).unwrap()).unwrap();
        assert_eq!(s, "a,b\n1,\"x, y\"\n");
        assert!(render(Format::Csv, &(), None).is_err());
    }
}
