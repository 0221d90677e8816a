//! Query templates per task dimension, with natural-language questions.
//!
//! Every literal a template pins comes from a cell that actually occurs in
//! the target table, so retrieval queries are never empty by construction.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{SynthError, TaskDimension};
use crate::sql::ast::*;
use crate::sql::value::Key;
use crate::sql::{format_number, ColumnType, NumberFormat, Relation, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Template {
    /// `SELECT * ... WHERE c = v`
    LookupRow,
    /// `SELECT a, b ... WHERE c = v`
    LookupCells,
    /// `SELECT a, x ... WHERE x > v ORDER BY x`
    ThresholdSorted,
    /// `SELECT SUM(x)` or `AVG(x)`, optionally filtered.
    Total,
    /// `SELECT COUNT(*) ... WHERE c = v`
    Count,
    /// `SELECT g, AGG(x) ... GROUP BY g`
    GroupAggregate,
    /// `SELECT g, AGG(x) ... GROUP BY g HAVING AGG(x) > t`
    GroupHaving,
    /// Inner join on a shared column, projecting from both sides.
    JoinProject,
    /// Inner join with a filter pinned to a matching row.
    JoinLookup,
}

impl Template {
    pub const ALL: [Template; 9] = [
        Template::LookupRow,
        Template::LookupCells,
        Template::ThresholdSorted,
        Template::Total,
        Template::Count,
        Template::GroupAggregate,
        Template::GroupHaving,
        Template::JoinProject,
        Template::JoinLookup,
    ];

    pub fn dimension(self) -> TaskDimension {
        match self {
            Template::LookupRow | Template::LookupCells | Template::ThresholdSorted => {
                TaskDimension::PreciseRetrieval
            }
            Template::Total | Template::Count | Template::GroupAggregate | Template::GroupHaving => {
                TaskDimension::MultiHop
            }
            Template::JoinProject | Template::JoinLookup => TaskDimension::Grounding,
        }
    }

    pub fn for_dimension(dimension: TaskDimension) -> Vec<Template> {
        Self::ALL.into_iter().filter(|t| t.dimension() == dimension).collect()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Template::LookupRow => "lookup-row",
            Template::LookupCells => "lookup-cells",
            Template::ThresholdSorted => "threshold-sorted",
            Template::Total => "total",
            Template::Count => "count",
            Template::GroupAggregate => "group-aggregate",
            Template::GroupHaving => "group-having",
            Template::JoinProject => "join-project",
            Template::JoinLookup => "join-lookup",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedQuery {
    pub query: SelectQuery,
    pub question: String,
    pub template: Template,
}

/// Try the dimension's templates in random order; the first that fits wins.
pub fn generate_query<R: Rng + ?Sized>(
    dimension: TaskDimension,
    tables: &[&Relation],
    rng: &mut R,
) -> Result<GeneratedQuery, SynthError> {
    let mut order = Template::for_dimension(dimension);
    order.shuffle(rng);
    let mut reasons = Vec::new();
    for t in order {
        match instantiate(t, tables, rng) {
            Ok(g) => return Ok(g),
            Err(SynthError::NoTemplate { reason, .. }) => reasons.push(format!("{}: {reason}", t.as_str())),
            Err(e) => return Err(e),
        }
    }
    Err(SynthError::NoTemplate {
        dimension,
        reason: reasons.join("; "),
    })
}

/// Fill one specific template.
pub fn instantiate<R: Rng + ?Sized>(
    template: Template,
    tables: &[&Relation],
    rng: &mut R,
) -> Result<GeneratedQuery, SynthError> {
    let no = |reason: &str| SynthError::NoTemplate {
        dimension: template.dimension(),
        reason: reason.to_string(),
    };
    let first = *tables.first().ok_or_else(|| no("no target tables"))?;
    let (query, question) = match template {
        Template::LookupRow => lookup_row(first, rng).ok_or_else(|| no("table has no values"))?,
        Template::LookupCells => lookup_cells(first, rng).ok_or_else(|| no("needs two columns"))?,
        Template::ThresholdSorted => {
            threshold_sorted(first, rng).ok_or_else(|| no("needs a numeric column with two distinct values"))?
        }
        Template::Total => total(first, rng).ok_or_else(|| no("needs a numeric column"))?,
        Template::Count => count(first, rng).ok_or_else(|| no("table has no values"))?,
        Template::GroupAggregate => {
            group_aggregate(first, rng).ok_or_else(|| no("needs a column with repeated values"))?
        }
        Template::GroupHaving => {
            group_having(first, rng).ok_or_else(|| no("needs groups with two distinct aggregates"))?
        }
        Template::JoinProject | Template::JoinLookup => {
            let lookup = template == Template::JoinLookup;
            join(tables, lookup, rng).ok_or_else(|| no("needs two tables sharing a join-compatible column"))?
        }
    };
    Ok(GeneratedQuery {
        query,
        question,
        template,
    })
}

struct Profile {
    idx: usize,
    ty: ColumnType,
    values: Vec<Value>,
    distinct: usize,
}

fn profiles(rel: &Relation) -> Vec<Profile> {
    (0..rel.columns().len())
        .map(|idx| {
            let values: Vec<Value> = rel
                .rows()
                .iter()
                .map(|r| r[idx].clone())
                .filter(|v| !v.is_null())
                .collect();
            let distinct = values.iter().map(Value::key).collect::<HashSet<_>>().len();
            Profile {
                idx,
                ty: rel.types()[idx],
                values,
                distinct,
            }
        })
        .collect()
}

fn col(rel: &Relation, idx: usize) -> Expr {
    Expr::column(rel.columns()[idx].as_str())
}

fn lit(v: &Value) -> Expr {
    match v {
        Value::Number(x) => Expr::number(*x),
        Value::Text(s) => Expr::text(s.as_str()),
        Value::Null => Expr::Literal(Literal::Null),
    }
}

fn show(v: &Value) -> String {
    match v {
        Value::Number(x) => format_number(*x, NumberFormat::Minimal),
        Value::Text(s) => format!("\"{s}\""),
        Value::Null => "empty".into(),
    }
}

fn item(expr: Expr, alias: Option<&str>) -> SelectItem {
    SelectItem::Expr {
        expr,
        alias: alias.map(Ident::new),
    }
}

fn query(rel: &Relation, projections: Vec<SelectItem>) -> SelectQuery {
    let mut q = SelectQuery::star(rel.name());
    q.projections = projections;
    q
}

/// Lowercase ASCII words joined by `_`.
pub fn snake_case(s: &str) -> String {
    let mut out = String::new();
    for ch in s.chars().flat_map(char::to_lowercase) {
        if ch.is_ascii_alphanumeric() {
            out.push(ch);
        } else if !out.ends_with('_') {
            out.push('_');
        }
    }
    out.trim_matches('_').to_string()
}

/// `avg_attendance` from `(AVG, "Attendance")`.
pub fn alias_for(func: AggFunc, column: &str) -> String {
    let s = snake_case(column);
    let prefix = func.name().to_ascii_lowercase();
    if s.is_empty() {
        prefix
    } else {
        format!("{prefix}_{s}")
    }
}

fn func_phrase(func: AggFunc) -> &'static str {
    match func {
        AggFunc::Sum => "sum",
        AggFunc::Avg => "average",
        AggFunc::Count => "number",
        AggFunc::Min => "minimum",
        AggFunc::Max => "maximum",
    }
}

fn op_phrase(op: CmpOp) -> &'static str {
    match op {
        CmpOp::Eq => "equal to",
        CmpOp::NotEq => "different from",
        CmpOp::Lt => "less than",
        CmpOp::LtEq => "at most",
        CmpOp::Gt => "greater than",
        CmpOp::GtEq => "at least",
    }
}

const ANSWER_FORMAT: &str = "Answer with a markdown table whose header row uses exactly the output column names listed. \
Only output the table.";

fn question(task: &str, mapping: &[(String, String)]) -> String {
    let mut out = task.to_string();
    if !mapping.is_empty() {
        out.push_str("\n\nColumn mapping:");
        for (name, meaning) in mapping {
            let _ = write!(out, "\n- {name}: {meaning}");
        }
    }
    out.push_str("\n\n");
    out.push_str(ANSWER_FORMAT);
    out
}

fn plain(rel: &Relation, idx: usize) -> (String, String) {
    let c = &rel.columns()[idx];
    (c.clone(), format!("the \"{c}\" column of table \"{}\"", rel.name()))
}

/// A random non-null cell of a column with at least one value.
fn pinned<'a, R: Rng + ?Sized>(ps: &'a [Profile], rng: &mut R) -> Option<(&'a Profile, &'a Value)> {
    let with_values: Vec<&Profile> = ps.iter().filter(|p| !p.values.is_empty()).collect();
    let p = *with_values.choose(rng)?;
    Some((p, p.values.choose(rng)?))
}

fn lookup_row<R: Rng + ?Sized>(rel: &Relation, rng: &mut R) -> Option<(SelectQuery, String)> {
    let ps = profiles(rel);
    let (p, v) = pinned(&ps, rng)?;
    let mut q = SelectQuery::star(rel.name());
    q.selection = Some(Expr::compare(CmpOp::Eq, col(rel, p.idx), lit(v)));
    let task = format!(
        "In table \"{}\", find every row whose \"{}\" is {}. Return those rows with all of the table's columns, \
         using the original column headers as output column names.",
        rel.name(),
        rel.columns()[p.idx],
        show(v)
    );
    Some((q, question(&task, &[])))
}

fn lookup_cells<R: Rng + ?Sized>(rel: &Relation, rng: &mut R) -> Option<(SelectQuery, String)> {
    let m = rel.columns().len();
    if m < 2 {
        return None;
    }
    let ps = profiles(rel);
    let (p, v) = pinned(&ps, rng)?;
    let others: Vec<usize> = (0..m).filter(|&j| j != p.idx).collect();
    let k = rng.random_range(1..=others.len().min(2));
    let mut picked: Vec<usize> = others.choose_multiple(rng, k).copied().collect();
    picked.sort_unstable();
    let mut q = query(rel, picked.iter().map(|&j| item(col(rel, j), None)).collect());
    q.selection = Some(Expr::compare(CmpOp::Eq, col(rel, p.idx), lit(v)));
    let names: Vec<String> = picked.iter().map(|&j| format!("\"{}\"", rel.columns()[j])).collect();
    let task = format!(
        "In table \"{}\", look up the rows whose \"{}\" is {} and report their {}.",
        rel.name(),
        rel.columns()[p.idx],
        show(v),
        names.join(" and ")
    );
    let mapping: Vec<_> = picked.iter().map(|&j| plain(rel, j)).collect();
    Some((q, question(&task, &mapping)))
}

fn threshold_sorted<R: Rng + ?Sized>(rel: &Relation, rng: &mut R) -> Option<(SelectQuery, String)> {
    let ps = profiles(rel);
    let numeric: Vec<&Profile> = ps
        .iter()
        .filter(|p| p.ty == ColumnType::Number && p.distinct >= 2)
        .collect();
    let x = *numeric.choose(rng)?;
    let mut sorted: Vec<f64> = x.values.iter().filter_map(Value::as_number).collect();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    // A pinned value that leaves at least one row on the kept side.
    let (op, v, desc) = if rng.random::<bool>() {
        let v = sorted[rng.random_range(0..sorted.len() - 1)];
        (*[CmpOp::Gt, CmpOp::GtEq].choose(rng)?, v, true)
    } else {
        let v = sorted[rng.random_range(1..sorted.len())];
        (*[CmpOp::Lt, CmpOp::LtEq].choose(rng)?, v, false)
    };
    let others: Vec<usize> = (0..rel.columns().len()).filter(|&j| j != x.idx).collect();
    let mut projections = Vec::new();
    let mut mapping = Vec::new();
    if let Some(&a) = others.choose(rng) {
        projections.push(item(col(rel, a), None));
        mapping.push(plain(rel, a));
    }
    projections.push(item(col(rel, x.idx), None));
    mapping.push(plain(rel, x.idx));
    let mut q = query(rel, projections);
    q.selection = Some(Expr::compare(op, col(rel, x.idx), Expr::number(v)));
    q.order_by.push(OrderItem {
        expr: col(rel, x.idx),
        order: Some(if desc { SortOrder::Desc } else { SortOrder::Asc }),
    });
    let listed: Vec<&str> = mapping.iter().map(|(n, _)| n.as_str()).collect();
    let task = format!(
        "In table \"{}\", list {} for every row whose \"{}\" is {} {}, sorted by \"{}\" in {} order.",
        rel.name(),
        listed.iter().map(|n| format!("\"{n}\"")).collect::<Vec<_>>().join(" and "),
        rel.columns()[x.idx],
        op_phrase(op),
        format_number(v, NumberFormat::Minimal),
        rel.columns()[x.idx],
        if desc { "descending" } else { "ascending" }
    );
    Some((q, question(&task, &mapping)))
}

fn agg_mapping(rel: &Relation, func: AggFunc, x: Option<usize>, alias: &str) -> (String, String) {
    let meaning = match x {
        Some(j) => format!("the {} of the \"{}\" column", func_phrase(func), rel.columns()[j]),
        None => "the number of rows".to_string(),
    };
    (alias.to_string(), meaning)
}

/// Optional `c = v` filter on a column other than `skip`.
fn maybe_filter<R: Rng + ?Sized>(
    rel: &Relation,
    skip: Option<usize>,
    rng: &mut R,
) -> Option<(Expr, String)> {
    if !rng.random::<bool>() {
        return None;
    }
    let candidates: Vec<Profile> = profiles(rel)
        .into_iter()
        .filter(|p| Some(p.idx) != skip && p.distinct >= 2)
        .collect();
    let (p, v) = pinned(&candidates, rng)?;
    Some((
        Expr::compare(CmpOp::Eq, col(rel, p.idx), lit(v)),
        format!(" considering only rows whose \"{}\" is {}", rel.columns()[p.idx], show(v)),
    ))
}

fn total<R: Rng + ?Sized>(rel: &Relation, rng: &mut R) -> Option<(SelectQuery, String)> {
    let ps = profiles(rel);
    let numeric: Vec<&Profile> = ps
        .iter()
        .filter(|p| p.ty == ColumnType::Number && !p.values.is_empty())
        .collect();
    let x = *numeric.choose(rng)?;
    let func = *[AggFunc::Sum, AggFunc::Avg].choose(rng)?;
    let name = &rel.columns()[x.idx];
    let alias = alias_for(func, name);
    let mut q = query(
        rel,
        vec![item(
            Expr::aggregate(func, AggArg::Column(ColumnRef::new(name.as_str()))),
            Some(&alias),
        )],
    );
    let filter = maybe_filter(rel, Some(x.idx), rng);
    let clause = filter.as_ref().map(|f| f.1.clone()).unwrap_or_default();
    q.selection = filter.map(|f| f.0);
    let task = format!(
        "Using table \"{}\", compute the {} of \"{}\"{clause}. Empty cells are ignored.",
        rel.name(),
        func_phrase(func),
        name
    );
    Some((q, question(&task, &[agg_mapping(rel, func, Some(x.idx), &alias)])))
}

fn count<R: Rng + ?Sized>(rel: &Relation, rng: &mut R) -> Option<(SelectQuery, String)> {
    let ps = profiles(rel);
    let (p, v) = pinned(&ps, rng)?;
    let alias = "row_count";
    let mut q = query(rel, vec![item(Expr::aggregate(AggFunc::Count, AggArg::Star), Some(alias))]);
    q.selection = Some(Expr::compare(CmpOp::Eq, col(rel, p.idx), lit(v)));
    let task = format!(
        "How many rows of table \"{}\" have \"{}\" equal to {}?",
        rel.name(),
        rel.columns()[p.idx],
        show(v)
    );
    Some((q, question(&task, &[agg_mapping(rel, AggFunc::Count, None, alias)])))
}

/// Columns worth grouping on: repeated values, at least two groups.
fn group_columns(rel: &Relation, ps: &[Profile]) -> Vec<usize> {
    let n = rel.n_rows();
    ps.iter()
        .filter(|p| p.distinct >= 2 && p.distinct <= (n / 2).max(2) && p.distinct < p.values.len())
        .map(|p| p.idx)
        .collect()
}

/// Aggregate `(func, argument)` over a numeric column, or COUNT(*).
fn pick_aggregate<R: Rng + ?Sized>(
    ps: &[Profile],
    skip: usize,
    rng: &mut R,
) -> (AggFunc, Option<usize>) {
    let numeric: Vec<usize> = ps
        .iter()
        .filter(|p| p.idx != skip && p.ty == ColumnType::Number && !p.values.is_empty())
        .map(|p| p.idx)
        .collect();
    match numeric.choose(rng) {
        Some(&x) if rng.random::<f64>() < 0.8 => (*[AggFunc::Sum, AggFunc::Avg].choose(rng).expect("non-empty"), Some(x)),
        _ => (AggFunc::Count, None),
    }
}

fn agg_expr(rel: &Relation, func: AggFunc, x: Option<usize>) -> Expr {
    match x {
        Some(j) => Expr::aggregate(func, AggArg::Column(ColumnRef::new(rel.columns()[j].as_str()))),
        None => Expr::aggregate(func, AggArg::Star),
    }
}

fn agg_alias(rel: &Relation, func: AggFunc, x: Option<usize>) -> String {
    match x {
        Some(j) => alias_for(func, &rel.columns()[j]),
        None => "row_count".into(),
    }
}

fn group_aggregate<R: Rng + ?Sized>(rel: &Relation, rng: &mut R) -> Option<(SelectQuery, String)> {
    let ps = profiles(rel);
    let g = *group_columns(rel, &ps).choose(rng)?;
    let (func, x) = pick_aggregate(&ps, g, rng);
    let alias = agg_alias(rel, func, x);
    let mut q = query(
        rel,
        vec![item(col(rel, g), None), item(agg_expr(rel, func, x), Some(&alias))],
    );
    q.group_by.push(ColumnRef::new(rel.columns()[g].as_str()));
    let what = match x {
        Some(j) => format!("the {} of \"{}\"", func_phrase(func), rel.columns()[j]),
        None => "the number of rows".into(),
    };
    let task = format!(
        "Group the rows of table \"{}\" by \"{}\" and report {what} for each group. \
         Rows with an empty \"{}\" form their own group.",
        rel.name(),
        rel.columns()[g],
        rel.columns()[g]
    );
    let mapping = [plain(rel, g), agg_mapping(rel, func, x, &alias)];
    Some((q, question(&task, &mapping)))
}

/// The roundest number `t` with `lo <= t < hi`.
pub fn round_between(lo: f64, hi: f64) -> f64 {
    debug_assert!(lo < hi);
    let top = hi.abs().max(lo.abs()).max(1.0).log10().ceil() as i32 + 1;
    for p in (-6..=top).rev() {
        let step = 10f64.powi(p.abs());
        let r = if p >= 0 { lo / step } else { lo * step };
        let c = if (r - r.round()).abs() < 1e-9 { r.round() } else { r.ceil() };
        let t = if p >= 0 { c * step } else { c / step } + 0.0;
        if t >= lo && t < hi {
            return t;
        }
    }
    lo
}

fn group_having<R: Rng + ?Sized>(rel: &Relation, rng: &mut R) -> Option<(SelectQuery, String)> {
    let ps = profiles(rel);
    let g = *group_columns(rel, &ps).choose(rng)?;
    let (func, x) = pick_aggregate(&ps, g, rng);

    // Per-group aggregates, to place the threshold between two of them.
    let mut groups: BTreeMap<Key, (f64, usize, usize)> = BTreeMap::new();
    for row in rel.rows() {
        let e = groups.entry(row[g].key()).or_insert((0.0, 0, 0));
        e.2 += 1;
        if let Some(v) = x.and_then(|j| row[j].as_number()) {
            e.0 += v;
            e.1 += 1;
        }
    }
    let mut values: Vec<f64> = groups
        .values()
        .filter_map(|&(sum, n, rows)| match func {
            AggFunc::Sum if n > 0 => Some(sum),
            AggFunc::Avg if n > 0 => Some(sum / n as f64),
            AggFunc::Count => Some(rows as f64),
            _ => None,
        })
        .collect();
    values.sort_by(f64::total_cmp);
    values.dedup();
    if values.len() < 2 {
        return None;
    }
    let i = rng.random_range(0..values.len() - 1);
    let t = round_between(values[i], values[i + 1]);

    let alias = agg_alias(rel, func, x);
    let mut q = query(
        rel,
        vec![item(col(rel, g), None), item(agg_expr(rel, func, x), Some(&alias))],
    );
    q.group_by.push(ColumnRef::new(rel.columns()[g].as_str()));
    q.having = Some(Expr::compare(CmpOp::Gt, agg_expr(rel, func, x), Expr::number(t)));
    let what = match x {
        Some(j) => format!("{} of \"{}\"", func_phrase(func), rel.columns()[j]),
        None => "number of rows".into(),
    };
    let task = format!(
        "In table \"{}\", which values of \"{}\" have {} {what} greater than {}? \
         Report each such value with its {what}.",
        rel.name(),
        rel.columns()[g],
        if func == AggFunc::Avg { "an" } else { "a" },
        format_number(t, NumberFormat::Minimal)
    );
    let mapping = [plain(rel, g), agg_mapping(rel, func, x, &alias)];
    Some((q, question(&task, &mapping)))
}

struct JoinPair<'a> {
    left: &'a Relation,
    right: &'a Relation,
    lk: usize,
    rk: usize,
}

/// Same column name (case-insensitive), same type, and a shared value.
fn join_pairs<'a>(tables: &[&'a Relation]) -> Vec<JoinPair<'a>> {
    let mut out = Vec::new();
    for (i, a) in tables.iter().enumerate() {
        for b in tables.iter().skip(i + 1) {
            if a.name().eq_ignore_ascii_case(b.name()) {
                continue;
            }
            for (lk, name) in a.columns().iter().enumerate() {
                let Some(rk) = b.column_index(name) else { continue };
                if a.types()[lk] != b.types()[rk] {
                    continue;
                }
                let left: HashSet<Key> = a
                    .rows()
                    .iter()
                    .filter(|r| !r[lk].is_null())
                    .map(|r| r[lk].key())
                    .collect();
                if b.rows().iter().any(|r| !r[rk].is_null() && left.contains(&r[rk].key())) {
                    out.push(JoinPair { left: a, right: b, lk, rk });
                }
            }
        }
    }
    out
}

fn qualified(rel: &Relation, idx: usize) -> Expr {
    Expr::Column(ColumnRef::qualified(rel.name(), rel.columns()[idx].as_str()))
}

fn join<R: Rng + ?Sized>(tables: &[&Relation], lookup: bool, rng: &mut R) -> Option<(SelectQuery, String)> {
    let pairs = join_pairs(tables);
    let pair = pairs.choose(rng)?;
    let (a, b) = (pair.left, pair.right);
    let a_cols: Vec<usize> = (0..a.columns().len()).filter(|&j| j != pair.lk).collect();
    let b_cols: Vec<usize> = (0..b.columns().len()).filter(|&j| j != pair.rk).collect();
    let key_name = &a.columns()[pair.lk];

    let mut projections = vec![item(qualified(a, pair.lk), None)];
    let mut mapping = vec![(key_name.clone(), format!("the shared \"{key_name}\" column"))];
    let mut used: Vec<String> = vec![key_name.to_lowercase()];
    let mut add = |rel: &Relation, j: usize, projections: &mut Vec<SelectItem>, mapping: &mut Vec<(String, String)>| {
        let name = &rel.columns()[j];
        let alias = if used.contains(&name.to_lowercase()) {
            Some(snake_case(&format!("{}_{}", rel.name(), name)))
        } else {
            None
        };
        let out = alias.clone().unwrap_or_else(|| name.clone());
        used.push(out.to_lowercase());
        projections.push(item(qualified(rel, j), alias.as_deref()));
        mapping.push((out, format!("the \"{name}\" column of table \"{}\"", rel.name())));
    };
    if let Some(&j) = a_cols.choose(rng) {
        add(a, j, &mut projections, &mut mapping);
    }
    if let Some(&j) = b_cols.choose(rng) {
        add(b, j, &mut projections, &mut mapping);
    }

    let mut q = SelectQuery::star(a.name());
    q.projections = projections;
    q.joins.push(Join {
        table: TableRef::new(b.name()),
        on: Expr::compare(CmpOp::Eq, qualified(a, pair.lk), qualified(b, pair.rk)),
    });

    let mut clause = String::new();
    if lookup {
        // Pin the filter to a left row that has a partner on the right.
        let right: HashSet<Key> = b.rows().iter().map(|r| r[pair.rk].key()).collect();
        let matching: Vec<&Vec<Value>> = a
            .rows()
            .iter()
            .filter(|r| !r[pair.lk].is_null() && right.contains(&r[pair.lk].key()))
            .collect();
        let row = *matching.choose(rng)?;
        let c = *a_cols.choose(rng).unwrap_or(&pair.lk);
        let v = if row[c].is_null() { &row[pair.lk] } else { &row[c] };
        let c = if row[c].is_null() { pair.lk } else { c };
        q.selection = Some(Expr::compare(CmpOp::Eq, qualified(a, c), lit(v)));
        clause = format!(
            ", keeping only rows where \"{}\" of table \"{}\" is {}",
            a.columns()[c],
            a.name(),
            show(v)
        );
    }
    let task = format!(
        "Tables \"{}\" and \"{}\" both have a \"{key_name}\" column. Match rows of the two tables that agree on it{clause}, \
         and report the columns listed below for every matched pair.",
        a.name(),
        b.name()
    );
    Some((q, question(&task, &mapping)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;
    use crate::sql::{execute, parse, Store};
    use crate::table::Table;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    fn text_only() -> Relation {
        let t = Table::new(
            "words",
            s(&["A", "B"]),
            vec![s(&["x", "p"]), s(&["y", "p"]), s(&["x", "q"]), s(&["z", "q"])],
        )
        .unwrap();
        Relation::ingest(&t).unwrap()
    }

    #[test]
    fn round_thresholds() {
        assert_eq!(round_between(12187.0, 13385.0), 13000.0);
        assert_eq!(round_between(1.0, 3.0), 1.0);
        assert_eq!(round_between(1.5, 1.9), 1.5);
        assert_eq!(round_between(-7.0, 40.0), 0.0);
        assert_eq!(round_between(99.0, 101.0), 100.0);
    }

    #[test]
    fn aliases() {
        assert_eq!(alias_for(AggFunc::Avg, "Attendance"), "avg_attendance");
        assert_eq!(alias_for(AggFunc::Sum, "Time ( ET )"), "sum_time_et");
        assert_eq!(alias_for(AggFunc::Sum, "??"), "sum");
    }

    #[test]
    fn text_only_tables_admit_counts_not_sums() {
        let rel = text_only();
        let mut rng = rng_from_seed(0);
        assert!(matches!(
            instantiate(Template::Total, &[&rel], &mut rng),
            Err(SynthError::NoTemplate { .. })
        ));
        let g = instantiate(Template::Count, &[&rel], &mut rng).unwrap();
        assert!(g.query.has_aggregate());
        for _ in 0..20 {
            let g = generate_query(TaskDimension::MultiHop, &[&rel], &mut rng).unwrap();
            assert!(matches!(
                g.template,
                Template::Count | Template::GroupAggregate | Template::GroupHaving
            ));
        }
    }

    #[test]
    fn gold_sql_parses_and_executes() {
        let a = Table::new(
            "teams",
            s(&["Team", "City", "Wins"]),
            vec![s(&["Owls", "Lund", "3"]), s(&["Elks", "Umeå", "5"]), s(&["Yaks", "Lund", "1"])],
        )
        .unwrap();
        let b = Table::new(
            "Table 2",
            s(&["Player", "Team", "Goals"]),
            vec![s(&["Ann", "Owls", "2"]), s(&["Bo", "Yaks", "4"]), s(&["Cy", "Owls", "1"])],
        )
        .unwrap();
        let store = Store::from_tables(&[a, b]).unwrap();
        let rels: Vec<&Relation> = store.relations().collect();
        let mut rng = rng_from_seed(5);
        for t in Template::ALL {
            for _ in 0..10 {
                let g = instantiate(t, &rels, &mut rng).unwrap();
                let text = g.query.to_string();
                assert_eq!(parse(&text).unwrap(), g.query, "{text}");
                let r = execute(&g.query, &store).unwrap();
                if t.dimension() != TaskDimension::MultiHop {
                    assert!(r.n_rows() > 0, "{text}");
                }
                assert!(g.question.contains("Answer with a markdown table"));
            }
        }
    }

    #[test]
    fn no_join_partner() {
        let rel = text_only();
        let mut rng = rng_from_seed(1);
        assert!(matches!(
            generate_query(TaskDimension::Grounding, &[&rel], &mut rng),
            Err(SynthError::NoTemplate { dimension: TaskDimension::Grounding, .. })
        ));
    }
}
