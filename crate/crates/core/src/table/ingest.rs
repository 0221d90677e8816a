use std::io::Read;
use std::path::Path;

use thiserror::Error;

use super::markdown::parse_pipe_tables;
use super::{Table, TableError};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}: csv error: {1}")]
    Csv(String, String),
    #[error("{0}: no pipe table found")]
    NoTable(String),
    #[error("{0}: unsupported file extension (expected .csv or .md)")]
    UnsupportedFormat(String),
    #[error(transparent)]
    Shape(#[from] TableError),
}

/// Read a CSV document with a mandatory header row.
pub fn read_csv_table<R: Read>(name: &str, reader: R) -> Result<Table, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| IngestError::Csv(name.to_string(), e.to_string()))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect::<Vec<_>>();
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| IngestError::Csv(name.to_string(), e.to_string()))?;
        rows.push(record.iter().map(|c| c.trim().to_string()).collect());
    }
    Ok(Table::new(name, headers, rows)?)
}

/// Parse the first pipe table in `text`.
pub fn parse_markdown_table(name: &str, text: &str) -> Result<Table, IngestError> {
    let table = parse_pipe_tables(text)
        .into_iter()
        .next()
        .ok_or_else(|| IngestError::NoTable(name.to_string()))?;
    Ok(Table::new(name, table.header, table.rows)?)
}

/// Load one table from a `.csv` or `.md` file; the file stem names it.
pub fn load_table_file(path: &Path) -> Result<Table, IngestError> {
    let display = path.display().to_string();
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| display.clone());
    let ext = path
        .extension()
        .map(|e| e.to_string_lossy().to_ascii_lowercase())
        .unwrap_or_default();
    let io = |source| IngestError::Io {
        path: display.clone(),
        source,
    };
    match ext.as_str() {
        "csv" => {
            let file = std::fs::File::open(path).map_err(io)?;
            read_csv_table(&name, file)
        }
        "md" | "markdown" => {
            let text = std::fs::read_to_string(path).map_err(io)?;
            parse_markdown_table(&name, &text)
        }
        _ => Err(IngestError::UnsupportedFormat(display)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_with_quoting() {
        let data = "Name,Note\n\"Smith, J\",\"said \"\"hi\"\"\"\nLee,\n";
        let t = read_csv_table("people", data.as_bytes()).unwrap();
        assert_eq!(t.headers(), &["Name", "Note"]);
        assert_eq!(t.cell(0, 0), "Smith, J");
        assert_eq!(t.cell(0, 1), "said \"hi\"");
        assert_eq!(t.cell(1, 1), "");
    }

    #[test]
    fn csv_ragged_rows_fail() {
        let data = "a,b\n1,2,3\n";
        assert!(matches!(
            read_csv_table("r", data.as_bytes()),
            Err(IngestError::Csv(..))
        ));
    }

    #[test]
    fn csv_header_only_has_no_rows() {
        assert!(matches!(
            read_csv_table("h", "a,b\n".as_bytes()),
            Err(IngestError::Shape(TableError::NoRows(_)))
        ));
    }

    #[test]
    fn markdown_table() {
        let text = "Table\n| Date | Venue |\n| --- | --- |\n| 2007-04-07 | Råsunda |\n";
        let t = parse_markdown_table("t", text).unwrap();
        assert_eq!(t.n_rows(), 1);
        assert_eq!(t.cell(0, 1), "Råsunda");
    }
}
