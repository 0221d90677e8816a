//! Query results and their markdown form.

use std::cmp::Ordering;

use serde::Serialize;

use super::value::{format_value, NumberFormat, Value};
use crate::table::markdown::{format_row, is_separator, separator_row, split_row};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
    /// True iff the query had ORDER BY; otherwise row order is not meaningful.
    pub ordered: bool,
    pub formats: Vec<NumberFormat>,
}

impl ResultTable {
    pub fn new(columns: Vec<String>, rows: Vec<Vec<Value>>, ordered: bool) -> Self {
        let formats = vec![NumberFormat::Minimal; columns.len()];
        Self {
            columns,
            rows,
            ordered,
            formats,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    /// Display strings of every cell, row-major.
    pub fn cell_strings(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                r.iter()
                    .zip(&self.formats)
                    .map(|(v, f)| format_value(v, *f))
                    .collect()
            })
            .collect()
    }

    /// Same columns and same rows: as sequences when ordered, else as multisets.
    pub fn same_as(&self, other: &ResultTable) -> bool {
        if self.columns != other.columns || self.ordered != other.ordered {
            return false;
        }
        if self.ordered {
            return self.rows == other.rows;
        }
        sorted_rows(&self.rows) == sorted_rows(&other.rows)
    }
}

fn row_cmp(a: &[Value], b: &[Value]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or_else(|| a.len().cmp(&b.len()))
}

fn sorted_rows(rows: &[Vec<Value>]) -> Vec<Vec<Value>> {
    let mut v = rows.to_vec();
    v.sort_by(|a, b| row_cmp(a, b));
    v
}

/// Header, `| --- |` separator and one line per row. Nulls print as empty
/// cells.
pub fn serialize_result(r: &ResultTable) -> String {
    let mut lines = vec![format_row(&r.columns), separator_row(r.columns.len())];
    lines.extend(r.cell_strings().iter().map(|row| format_row(row)));
    lines.join("\n")
}

/// A markdown table read back as strings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TextTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// The first pipe table in `text`. Every row must have the header's width.
pub fn parse_markdown_result(text: &str) -> Option<TextTable> {
    let lines: Vec<&str> = text.lines().map(str::trim).collect();
    let start = lines.iter().position(|l| l.starts_with('|'))?;
    let header = split_row(lines[start])?;
    let sep = split_row(lines.get(start + 1)?)?;
    if !is_separator(&sep) || sep.len() != header.len() {
        return None;
    }
    let mut rows = Vec::new();
    for line in &lines[start + 2..] {
        match split_row(line) {
            Some(cells) if cells.len() == header.len() => rows.push(cells),
            Some(_) => return None,
            None => break,
        }
    }
    Some(TextTable { header, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serialization_examples() {
        let r = ResultTable::new(vec!["c".into()], vec![vec![Value::Number(5.0)]], false);
        assert_eq!(serialize_result(&r), "| c |\n| --- |\n| 5 |");
        let empty = ResultTable::new(vec!["a".into(), "b".into()], vec![], false);
        assert_eq!(serialize_result(&empty), "| a | b |\n| --- | --- |");
    }

    #[test]
    fn parse_back() {
        let r = ResultTable::new(
            vec!["a".into(), "b".into()],
            vec![vec![Value::Text("x|y".into()), Value::Null]],
            false,
        );
        let t = parse_markdown_result(&serialize_result(&r)).unwrap();
        assert_eq!(t.header, vec!["a", "b"]);
        assert_eq!(t.rows, vec![vec!["x|y".to_string(), String::new()]]);
        assert!(parse_markdown_result("no table here").is_none());
        assert!(parse_markdown_result("| a |\n| --- |\n| 1 | 2 |").is_none());
    }

    #[test]
    fn unordered_comparison_ignores_row_order() {
        let a = ResultTable::new(vec!["a".into()], vec![vec![Value::Number(1.0)], vec![Value::Number(2.0)]], false);
        let mut b = a.clone();
        b.rows.reverse();
        assert!(a.same_as(&b));
        let (mut a2, mut b2) = (a.clone(), b.clone());
        a2.ordered = true;
        b2.ordered = true;
        assert!(!a2.same_as(&b2));
    }
}
