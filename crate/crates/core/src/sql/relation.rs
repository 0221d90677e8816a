//! Typed relations and the in-memory store.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use super::value::{parse_number, ColumnType, Value};
use super::SqlError;
use crate::table::{load_table_file, Table};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Relation {
    name: String,
    columns: Vec<String>,
    types: Vec<ColumnType>,
    rows: Vec<Vec<Value>>,
}

impl Relation {
    /// Build from typed parts; rows must match the arity and declared types.
    pub fn new(
        name: impl Into<String>,
        columns: Vec<String>,
        types: Vec<ColumnType>,
        rows: Vec<Vec<Value>>,
    ) -> Result<Self, SqlError> {
        let name = name.into();
        if columns.len() != types.len() || columns.is_empty() {
            return Err(SqlError::Schema(format!(
                "relation {name}: {} columns but {} types",
                columns.len(),
                types.len()
            )));
        }
        check_unique(&name, &columns)?;
        for (i, row) in rows.iter().enumerate() {
            if row.len() != columns.len() {
                return Err(SqlError::Schema(format!(
                    "relation {name}: row {i} has {} values, expected {}",
                    row.len(),
                    columns.len()
                )));
            }
            for (v, t) in row.iter().zip(&types) {
                let ok = matches!(
                    (v, t),
                    (Value::Null, _) | (Value::Number(_), ColumnType::Number) | (Value::Text(_), ColumnType::Text)
                );
                if !ok {
                    return Err(SqlError::Schema(format!(
                        "relation {name}: row {i} value {v:?} is not {t}"
                    )));
                }
            }
        }
        Ok(Self {
            name,
            columns,
            types,
            rows,
        })
    }

    /// Type each column: Number iff every non-empty cell parses as a number.
    /// Empty cells become Null.
    pub fn ingest(table: &Table) -> Result<Self, SqlError> {
        let m = table.n_cols();
        let types: Vec<ColumnType> = (0..m)
            .map(|j| {
                let numeric = table
                    .rows()
                    .iter()
                    .map(|r| r[j].trim())
                    .filter(|c| !c.is_empty())
                    .all(|c| parse_number(c).is_some());
                if numeric {
                    ColumnType::Number
                } else {
                    ColumnType::Text
                }
            })
            .collect();
        let rows = table
            .rows()
            .iter()
            .map(|r| {
                r.iter()
                    .zip(&types)
                    .map(|(cell, t)| {
                        let cell = cell.trim();
                        if cell.is_empty() {
                            Value::Null
                        } else if *t == ColumnType::Number {
                            Value::Number(parse_number(cell).expect("column typed as numeric"))
                        } else {
                            Value::Text(cell.to_string())
                        }
                    })
                    .collect()
            })
            .collect();
        Self::new(table.name(), table.headers().to_vec(), types, rows)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn types(&self) -> &[ColumnType] {
        &self.types
    }

    pub fn rows(&self) -> &[Vec<Value>] {
        &self.rows
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    /// Case-insensitive column lookup.
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| eq_fold(c, name))
    }
}

fn check_unique(relation: &str, columns: &[String]) -> Result<(), SqlError> {
    for (i, a) in columns.iter().enumerate() {
        if columns[..i].iter().any(|b| eq_fold(a, b)) {
            return Err(SqlError::DuplicateColumn {
                relation: relation.to_string(),
                column: a.clone(),
            });
        }
    }
    Ok(())
}

pub(crate) fn eq_fold(a: &str, b: &str) -> bool {
    a.to_lowercase() == b.to_lowercase()
}

/// Named relations; names resolve case-insensitively.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Store {
    relations: BTreeMap<String, Relation>,
}

impl Store {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, relation: Relation) -> Result<(), SqlError> {
        let key = relation.name.to_lowercase();
        if self.relations.contains_key(&key) {
            return Err(SqlError::DuplicateRelation(relation.name));
        }
        self.relations.insert(key, relation);
        Ok(())
    }

    pub fn ingest(&mut self, table: &Table) -> Result<(), SqlError> {
        self.insert(Relation::ingest(table)?)
    }

    pub fn from_tables<'a>(tables: impl IntoIterator<Item = &'a Table>) -> Result<Self, SqlError> {
        let mut store = Self::new();
        for t in tables {
            store.ingest(t)?;
        }
        Ok(store)
    }

    /// One relation per `.csv` (or `.md`) file in `dir`, named by file stem.
    pub fn load_dir(dir: &Path) -> Result<Self, SqlError> {
        let mut paths: Vec<_> = std::fs::read_dir(dir)
            .map_err(|e| SqlError::Load(format!("{}: {e}", dir.display())))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                p.extension()
                    .is_some_and(|x| x.eq_ignore_ascii_case("csv") || x.eq_ignore_ascii_case("md"))
            })
            .collect();
        paths.sort();
        let mut store = Self::new();
        for p in paths {
            let table = load_table_file(&p).map_err(|e| SqlError::Load(e.to_string()))?;
            store.ingest(&table)?;
        }
        Ok(store)
    }

    pub fn get(&self, name: &str) -> Option<&Relation> {
        self.relations.get(&name.to_lowercase())
    }

    pub fn relations(&self) -> impl Iterator<Item = &Relation> {
        self.relations.values()
    }

    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn type_inference() {
        let t = Table::new(
            "t",
            s(&["Attendance", "Time", "Note"]),
            vec![s(&["15 092", "1:00pm", ""]), s(&["32 529", "4:00pm", "x"])],
        )
        .unwrap();
        let r = Relation::ingest(&t).unwrap();
        assert_eq!(r.types(), &[ColumnType::Number, ColumnType::Text, ColumnType::Text]);
        assert_eq!(r.rows()[0][0], Value::Number(15092.0));
        assert_eq!(r.rows()[1][0], Value::Number(32529.0));
        assert_eq!(r.rows()[0][2], Value::Null);
    }

    #[test]
    fn duplicate_columns_rejected() {
        let t = Table::new("t", s(&["a", "A"]), vec![s(&["1", "2"])]).unwrap();
        assert!(matches!(Relation::ingest(&t), Err(SqlError::DuplicateColumn { .. })));
    }

    #[test]
    fn store_lookup_is_case_insensitive() {
        let t = Table::new("Table 1", s(&["a"]), vec![s(&["1"])]).unwrap();
        let store = Store::from_tables([&t]).unwrap();
        assert!(store.get("table 1").is_some());
        assert_eq!(store.get("TABLE 1").unwrap().column_index("A"), Some(0));
        let mut again = store.clone();
        assert!(matches!(again.ingest(&t), Err(SqlError::DuplicateRelation(_))));
    }
}
