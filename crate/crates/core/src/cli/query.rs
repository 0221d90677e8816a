//! `sql`.

use std::io::{Read, Write};

use super::{CliError, ExitStatus, SqlArgs};
use crate::sql::{cross_check, execute, parse, reference_execute, serialize_result, SqlError, Store};
use crate::table::load_table_file;

/// The error with the offending line and a caret under the byte offset.
pub fn describe_error(query: &str, e: &SqlError) -> String {
    let Some(offset) = e.offset() else {
        return e.to_string();
    };
    let offset = offset.min(query.len());
    let line_start = query[..offset].rfind('\n').map_or(0, |i| i + 1);
    let line_end = query[offset..].find('\n').map_or(query.len(), |i| offset + i);
    let column = query[line_start..offset].chars().count();
    format!(
        "{e}\n  {}\n  {}^",
        &query[line_start..line_end],
        " ".repeat(column)
    )
}

pub(super) fn run(args: &SqlArgs, out: &mut dyn Write, _err: &mut dyn Write) -> Result<ExitStatus, CliError> {
    let query = if args.query == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| CliError::io("stdin", e))?;
        s
    } else {
        args.query.clone()
    };
    let q = parse(&query).map_err(|e| CliError::Data(describe_error(&query, &e)))?;
    if args.explain {
        writeln!(out, "{}", serde_json::to_string_pretty(&q).expect("AST serializes"))?;
        return Ok(ExitStatus::Success);
    }
    let mut store = match &args.store {
        Some(dir) => Store::load_dir(dir).map_err(|e| CliError::Data(e.to_string()))?,
        None => Store::new(),
    };
    for p in &args.tables {
        let t = load_table_file(p).map_err(|e| CliError::Data(e.to_string()))?;
        store.ingest(&t).map_err(|e| CliError::Data(e.to_string()))?;
    }
    if store.is_empty() {
        return Err(CliError::Usage("no relations: pass --store or --table".into()));
    }
    let data = |e: SqlError| CliError::Data(describe_error(&query, &e));
    if args.oracle {
        let (result, agree) = cross_check(&q, &store).map_err(data)?;
        writeln!(out, "{}", serialize_result(&result))?;
        if agree {
            writeln!(out, "AGREE")?;
            Ok(ExitStatus::Success)
        } else {
            let reference = reference_execute(&q, &store).map_err(data)?;
            writeln!(out, "DISAGREE\nreference:\n{}", serialize_result(&reference))?;
            Ok(ExitStatus::Data)
        }
    } else {
        let result = execute(&q, &store).map_err(data)?;
        writeln!(out, "{}", serialize_result(&result))?;
        Ok(ExitStatus::Success)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn caret_points_at_offset() {
        let q = "SELECT a\nFROM t WHERE";
        let e = parse(q).unwrap_err();
        let text = describe_error(q, &e);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[1], "  FROM t WHERE");
        assert_eq!(lines[2].find('^').unwrap() - 2, 12);
    }
}
