//! Mini-SQL: SELECT with WHERE, inner JOIN, GROUP BY / HAVING, the five
//! standard aggregates, ORDER BY and LIMIT over in-memory relations.
//!
//! ```
//! use tabula::sql::{execute, parse, serialize_result, Store};
//! use tabula::table::Table;
//!
//! let t = Table::new(
//!     "games",
//!     vec!["Venue".into(), "Attendance".into()],
//!     vec![
//!         vec!["Olympia".into(), "13 385".into()],
//!         vec!["Stadion".into(), "9 700".into()],
//!     ],
//! )
//! .unwrap();
//! let store = Store::from_tables([&t]).unwrap();
//! let q = parse("SELECT Venue FROM games WHERE Attendance > 10000").unwrap();
//! let out = execute(&q, &store).unwrap();
//! assert_eq!(serialize_result(&out), "| Venue |\n| --- |\n| Olympia |");
//! ```

use thiserror::Error;

pub mod ast;
pub mod exec;
pub mod lexer;
pub mod parser;
pub mod plan;
pub mod random;
pub mod reference;
pub mod relation;
pub mod result;
pub mod value;

pub use ast::{
    AggArg, AggFunc, CmpOp, ColumnRef, Expr, Ident, Join, Literal, OrderItem, SelectItem,
    SelectQuery, SortOrder, TableRef,
};
pub use exec::{execute, execute_plan};
pub use parser::parse;
pub use plan::{analyze, Plan};
pub use reference::{involved_cells, reference_execute, reference_execute_traced, CellRef};
pub use relation::{Relation, Store};
pub use result::{parse_markdown_result, serialize_result, ResultTable, TextTable};
pub use value::{format_number, parse_number, ColumnType, NumberFormat, Value};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SqlError {
    #[error("syntax error at byte {offset}: expected {}, found {found}", expected.join(" or "))]
    Syntax {
        offset: usize,
        expected: Vec<String>,
        found: String,
    },
    #[error("unsupported feature at byte {offset}: {feature}")]
    Unsupported { offset: usize, feature: String },
    #[error("unknown relation {0}")]
    UnknownRelation(String),
    #[error("unknown column {0}")]
    UnknownColumn(String),
    #[error("ambiguous column {0}")]
    AmbiguousColumn(String),
    #[error("type mismatch in {expr}: {left} vs {right}")]
    TypeMismatch {
        expr: String,
        left: ColumnType,
        right: ColumnType,
    },
    #[error("aggregate misuse: {0}")]
    AggregateMisuse(String),
    #[error("invalid join: {0}")]
    InvalidJoin(String),
    #[error("invalid query: {0}")]
    Invalid(String),
    #[error("duplicate column {column} in {relation}")]
    DuplicateColumn { relation: String, column: String },
    #[error("duplicate relation {0}")]
    DuplicateRelation(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("load error: {0}")]
    Load(String),
}

impl SqlError {
    /// Byte offset for syntax-level errors.
    pub fn offset(&self) -> Option<usize> {
        match self {
            SqlError::Syntax { offset, .. } | SqlError::Unsupported { offset, .. } => Some(*offset),
            _ => None,
        }
    }
}

/// Run both evaluators and report whether they agree.
pub fn cross_check(q: &SelectQuery, store: &Store) -> Result<(ResultTable, bool), SqlError> {
    let fast = execute(q, store)?;
    let slow = reference_execute(q, store)?;
    let agree = fast.same_as(&slow);
    Ok((fast, agree))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::Table;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    fn store() -> Store {
        let teams = Table::new(
            "teams",
            s(&["Team", "City", "Founded"]),
            vec![
                s(&["Ajax", "Amsterdam", "1900"]),
                s(&["Benfica", "Lisbon", "1904"]),
                s(&["Celtic", "Glasgow", ""]),
            ],
        )
        .unwrap();
        let games = Table::new(
            "games",
            s(&["Team", "Goals", "Venue"]),
            vec![
                s(&["Ajax", "3", "Home"]),
                s(&["Celtic", "1", "Away"]),
                s(&["Ajax", "2", "Away"]),
            ],
        )
        .unwrap();
        Store::from_tables([&teams, &games]).unwrap()
    }

    fn run(sql: &str) -> ResultTable {
        let q = parse(sql).unwrap();
        let (r, agree) = cross_check(&q, &store()).unwrap();
        assert!(agree, "{sql}");
        r
    }

    fn err(sql: &str) -> SqlError {
        execute(&parse(sql).unwrap(), &store()).unwrap_err()
    }

    #[test]
    fn star_is_verbatim() {
        let r = run("SELECT * FROM teams");
        assert_eq!(r.columns, s(&["Team", "City", "Founded"]));
        assert_eq!(r.rows.len(), 3);
        assert_eq!(r.rows[2][2], Value::Null);
    }

    #[test]
    fn count_star() {
        let r = run("SELECT COUNT(*) FROM teams");
        assert_eq!(r.rows, vec![vec![Value::Number(3.0)]]);
        assert_eq!(r.columns, s(&["COUNT(*)"]));
        let r = run("SELECT COUNT(Founded), AVG(Founded) FROM teams WHERE City = 'Glasgow'");
        assert_eq!(r.rows, vec![vec![Value::Number(0.0), Value::Null]]);
    }

    #[test]
    fn empty_where_keeps_headers() {
        let r = run("SELECT Team, City FROM teams WHERE City = 'Paris'");
        assert_eq!(r.columns, s(&["Team", "City"]));
        assert!(r.rows.is_empty());
        assert_eq!(serialize_result(&r), "| Team | City |\n| --- | --- |");
    }

    #[test]
    fn join_matches_nested_loop() {
        let r = run("SELECT teams.Team, City, Goals FROM teams JOIN games ON teams.Team = games.Team");
        assert_eq!(
            r.cell_strings(),
            vec![s(&["Ajax", "Amsterdam", "3"]), s(&["Ajax", "Amsterdam", "2"]), s(&["Celtic", "Glasgow", "1"])]
        );
    }

    #[test]
    fn grouping_and_ordering() {
        let r = run("SELECT Venue, SUM(Goals) AS g FROM games GROUP BY Venue ORDER BY g DESC");
        assert_eq!(r.cell_strings(), vec![s(&["Away", "3"]), s(&["Home", "3"])]);
        let r = run("SELECT Team FROM teams ORDER BY Founded DESC");
        assert_eq!(r.cell_strings(), vec![s(&["Benfica"]), s(&["Ajax"]), s(&["Celtic"])]);
        let r = run("SELECT Team FROM teams ORDER BY Founded LIMIT 2");
        assert_eq!(r.cell_strings(), vec![s(&["Ajax"]), s(&["Benfica"])]);
    }

    #[test]
    fn nulls_never_equal() {
        assert!(run("SELECT Team FROM teams WHERE Founded = NULL").rows.is_empty());
        assert!(run("SELECT Team FROM teams WHERE NOT Founded = NULL").rows.is_empty());
        assert_eq!(run("SELECT Team FROM teams WHERE Founded = NULL OR City = 'Lisbon'").rows.len(), 1);
    }

    #[test]
    fn double_quoted_fallback() {
        let r = run("SELECT Team FROM teams WHERE City = \"Lisbon\"");
        assert_eq!(r.cell_strings(), vec![s(&["Benfica"])]);
    }

    #[test]
    fn semantic_errors() {
        assert!(matches!(err("SELECT x FROM teams"), SqlError::UnknownColumn(_)));
        assert!(matches!(err("SELECT Team FROM nowhere"), SqlError::UnknownRelation(_)));
        assert!(matches!(err("SELECT Team FROM teams WHERE Founded = 'x'"), SqlError::TypeMismatch { .. }));
        assert!(matches!(err("SELECT SUM(City) FROM teams"), SqlError::AggregateMisuse(_)));
        assert!(matches!(err("SELECT MAX(*) FROM teams"), SqlError::AggregateMisuse(_)));
        assert!(matches!(err("SELECT Team, COUNT(*) FROM teams"), SqlError::AggregateMisuse(_)));
        assert!(matches!(err("SELECT Team FROM teams HAVING COUNT(*) > 1"), SqlError::AggregateMisuse(_)));
        assert!(matches!(err("SELECT Team FROM teams WHERE COUNT(*) > 1"), SqlError::AggregateMisuse(_)));
        assert!(matches!(
            err("SELECT Team FROM teams JOIN games ON teams.Team = games.Team"),
            SqlError::AmbiguousColumn(_)
        ));
        assert!(matches!(
            err("SELECT City FROM teams JOIN games ON Founded = Goals AND City = Venue"),
            SqlError::InvalidJoin(_)
        ));
        assert!(matches!(err("SELECT Team FROM teams WHERE Team"), SqlError::Invalid(_)));
    }

    #[test]
    fn involved_cell_counts() {
        let st = store();
        let count = |sql: &str| involved_cells(&parse(sql).unwrap(), &st).unwrap();
        // predicate column (3) + projected cell of the single match (1)
        assert_eq!(count("SELECT Team FROM teams WHERE City = 'Lisbon'"), 4);
        assert_eq!(count("SELECT COUNT(*) FROM teams"), 3);
        assert_eq!(count("SELECT Team FROM teams WHERE City = 'Paris'"), 3);
        // key columns 3 + 3, then City and Goals of the 3 joined rows (2 distinct City cells)
        assert_eq!(
            count("SELECT City, Goals FROM teams JOIN games ON teams.Team = games.Team"),
            6 + 2 + 3
        );
    }
}
