//! Static analysis: name resolution, typing and aggregate rules.
//!
//! Both evaluators run the same [`Plan`], so a malformed query fails the
//! same way whichever one executes it.

use super::ast::*;
use super::relation::{eq_fold, Store};
use super::value::{ColumnType, NumberFormat, Value};
use super::SqlError;

#[derive(Debug, Clone, PartialEq)]
pub struct Binding {
    /// Name of the relation in the store.
    pub relation: String,
    /// Alias if given, else the relation name.
    pub qualifier: String,
    /// Position of this relation's first column in a combined row.
    pub offset: usize,
    pub width: usize,
}

/// A value-producing expression over combined rows (or groups).
#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    /// Column of the combined row.
    Column(usize),
    Literal(Value),
    /// Index into [`Plan::aggregates`].
    Agg(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cond {
    Compare(CmpOp, Scalar, Scalar),
    And(Box<Cond>, Box<Cond>),
    Or(Box<Cond>, Box<Cond>),
    Not(Box<Cond>),
}

impl Cond {
    /// Combined-row columns read by this condition, in first-use order.
    pub fn columns(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_columns(&mut out);
        out
    }

    fn collect_columns(&self, out: &mut Vec<usize>) {
        match self {
            Cond::Compare(_, a, b) => {
                for s in [a, b] {
                    if let Scalar::Column(c) = s {
                        if !out.contains(c) {
                            out.push(*c);
                        }
                    }
                }
            }
            Cond::And(a, b) | Cond::Or(a, b) => {
                a.collect_columns(out);
                b.collect_columns(out);
            }
            Cond::Not(a) => a.collect_columns(out),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggSpec {
    pub func: AggFunc,
    /// `None` for `COUNT(*)`.
    pub arg: Option<usize>,
}

/// `left = right` where `right` is a column of the newly joined relation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JoinKey {
    pub left: usize,
    pub right: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub bindings: Vec<Binding>,
    /// `joins[i]` attaches `bindings[i + 1]`.
    pub joins: Vec<JoinKey>,
    pub filter: Option<Cond>,
    /// Aggregation applies (GROUP BY present or any aggregate used).
    pub aggregate: bool,
    pub group_keys: Vec<usize>,
    pub aggregates: Vec<AggSpec>,
    pub having: Option<Cond>,
    pub projections: Vec<Scalar>,
    pub columns: Vec<String>,
    pub formats: Vec<NumberFormat>,
    /// `(key, descending)`.
    pub order_by: Vec<(Scalar, bool)>,
    pub limit: Option<u64>,
}

impl Plan {
    pub fn width(&self) -> usize {
        self.bindings.iter().map(|b| b.width).sum()
    }

    /// Binding owning a combined-row column, and the column within it.
    pub fn locate(&self, column: usize) -> (usize, usize) {
        let b = self
            .bindings
            .iter()
            .rposition(|b| b.offset <= column)
            .expect("column inside the combined row");
        (b, column - self.bindings[b].offset)
    }

    pub fn ordered(&self) -> bool {
        !self.order_by.is_empty()
    }
}

enum Resolved {
    Column(usize),
    /// Unresolvable double-quoted name read as a string.
    Text(String),
}

struct Scope<'a> {
    store: &'a Store,
    bindings: Vec<Binding>,
    types: Vec<ColumnType>,
    names: Vec<String>,
}

#[derive(Clone, Copy, PartialEq)]
enum Clause {
    Where,
    Select,
    Having,
    OrderBy,
}

impl Clause {
    fn name(self) -> &'static str {
        match self {
            Clause::Where => "WHERE",
            Clause::Select => "SELECT",
            Clause::Having => "HAVING",
            Clause::OrderBy => "ORDER BY",
        }
    }
}

impl<'a> Scope<'a> {
    fn bind(&mut self, t: &TableRef) -> Result<(), SqlError> {
        let rel = self
            .store
            .get(t.name.value())
            .ok_or_else(|| SqlError::UnknownRelation(t.name.value().to_string()))?;
        let offset = self.types.len();
        self.bindings.push(Binding {
            relation: rel.name().to_string(),
            qualifier: t.alias.as_ref().unwrap_or(&t.name).value().to_string(),
            offset,
            width: rel.columns().len(),
        });
        self.types.extend_from_slice(rel.types());
        self.names.extend(rel.columns().iter().cloned());
        Ok(())
    }

    fn resolve(&self, c: &ColumnRef) -> Result<Resolved, SqlError> {
        let name = c.column.value();
        let candidates: Vec<&Binding> = match &c.table {
            Some(q) => {
                let hits: Vec<&Binding> = self
                    .bindings
                    .iter()
                    .filter(|b| eq_fold(&b.qualifier, q.value()))
                    .collect();
                if hits.is_empty() {
                    return Err(SqlError::UnknownRelation(q.value().to_string()));
                }
                if hits.len() > 1 {
                    return Err(SqlError::AmbiguousColumn(c.to_string()));
                }
                hits
            }
            None => self.bindings.iter().collect(),
        };
        let mut found = None;
        for b in candidates {
            let rel = self.store.get(&b.relation).expect("bound relation exists");
            if let Some(i) = rel.column_index(name) {
                if found.is_some() {
                    return Err(SqlError::AmbiguousColumn(c.to_string()));
                }
                found = Some(b.offset + i);
            }
        }
        match found {
            Some(i) => Ok(Resolved::Column(i)),
            None if c.table.is_none() && c.column.is_quoted() => Ok(Resolved::Text(name.to_string())),
            None => Err(SqlError::UnknownColumn(c.to_string())),
        }
    }

    fn column(&self, c: &ColumnRef) -> Result<usize, SqlError> {
        match self.resolve(c)? {
            Resolved::Column(i) => Ok(i),
            Resolved::Text(_) => Err(SqlError::UnknownColumn(c.to_string())),
        }
    }
}

struct Analyzer<'a> {
    scope: Scope<'a>,
    aggregate: bool,
    group_keys: Vec<usize>,
    aggregates: Vec<AggSpec>,
}

impl Analyzer<'_> {
    /// Returns the scalar and its type (`None` for a NULL literal).
    fn scalar(&mut self, e: &Expr, clause: Clause) -> Result<(Scalar, Option<ColumnType>), SqlError> {
        match e {
            Expr::Literal(Literal::Number(x)) => Ok((Scalar::Literal(Value::Number(*x)), Some(ColumnType::Number))),
            Expr::Literal(Literal::Text(s)) => Ok((Scalar::Literal(Value::Text(s.clone())), Some(ColumnType::Text))),
            Expr::Literal(Literal::Null) => Ok((Scalar::Literal(Value::Null), None)),
            Expr::Column(c) => match self.scope.resolve(c)? {
                Resolved::Text(s) => Ok((Scalar::Literal(Value::Text(s)), Some(ColumnType::Text))),
                Resolved::Column(i) => {
                    if self.aggregate
                        && matches!(clause, Clause::Select | Clause::Having | Clause::OrderBy)
                        && !self.group_keys.contains(&i)
                    {
                        return Err(SqlError::AggregateMisuse(format!(
                            "column {c} must appear in GROUP BY or inside an aggregate"
                        )));
                    }
                    Ok((Scalar::Column(i), Some(self.scope.types[i])))
                }
            },
            Expr::Aggregate { func, arg } => {
                if clause == Clause::Where {
                    return Err(SqlError::AggregateMisuse(format!(
                        "aggregate {e} is not allowed in {}",
                        clause.name()
                    )));
                }
                let (arg, arg_type) = match arg {
                    AggArg::Star if *func == AggFunc::Count => (None, None),
                    AggArg::Star => {
                        return Err(SqlError::AggregateMisuse(format!("{}(*) takes a column", func.name())))
                    }
                    AggArg::Column(c) => {
                        let i = self.scope.column(c)?;
                        (Some(i), Some(self.scope.types[i]))
                    }
                };
                if matches!(func, AggFunc::Sum | AggFunc::Avg) && arg_type == Some(ColumnType::Text) {
                    return Err(SqlError::AggregateMisuse(format!("{e} over a text column")));
                }
                let spec = AggSpec { func: *func, arg };
                let idx = match self.aggregates.iter().position(|a| *a == spec) {
                    Some(i) => i,
                    None => {
                        self.aggregates.push(spec);
                        self.aggregates.len() - 1
                    }
                };
                let ty = match func {
                    AggFunc::Min | AggFunc::Max => arg_type,
                    _ => Some(ColumnType::Number),
                };
                Ok((Scalar::Agg(idx), ty))
            }
            _ => Err(SqlError::Invalid(format!("{e} is a condition, expected a value"))),
        }
    }

    fn cond(&mut self, e: &Expr, clause: Clause) -> Result<Cond, SqlError> {
        match e {
            Expr::And(a, b) => Ok(Cond::And(Box::new(self.cond(a, clause)?), Box::new(self.cond(b, clause)?))),
            Expr::Or(a, b) => Ok(Cond::Or(Box::new(self.cond(a, clause)?), Box::new(self.cond(b, clause)?))),
            Expr::Not(a) => Ok(Cond::Not(Box::new(self.cond(a, clause)?))),
            Expr::Compare { op, left, right } => {
                let (l, lt) = self.scalar(left, clause)?;
                let (r, rt) = self.scalar(right, clause)?;
                if let (Some(lt), Some(rt)) = (lt, rt) {
                    if lt != rt {
                        return Err(SqlError::TypeMismatch {
                            expr: e.to_string(),
                            left: lt,
                            right: rt,
                        });
                    }
                }
                Ok(Cond::Compare(*op, l, r))
            }
            _ => Err(SqlError::Invalid(format!(
                "{} needs a condition, found value {e}",
                clause.name()
            ))),
        }
    }
}

pub fn analyze(q: &SelectQuery, store: &Store) -> Result<Plan, SqlError> {
    let mut scope = Scope {
        store,
        bindings: Vec::new(),
        types: Vec::new(),
        names: Vec::new(),
    };
    scope.bind(&q.from)?;
    let mut a = Analyzer {
        scope,
        aggregate: false,
        group_keys: Vec::new(),
        aggregates: Vec::new(),
    };

    let mut joins = Vec::new();
    for j in &q.joins {
        a.scope.bind(&j.table)?;
        let new = a.scope.bindings.last().expect("just bound").clone();
        let inside = |i: usize| i >= new.offset;
        let key = match &j.on {
            Expr::Compare {
                op: CmpOp::Eq,
                left,
                right,
            } => match (left.as_ref(), right.as_ref()) {
                (Expr::Column(l), Expr::Column(r)) => {
                    let (l, r) = (a.scope.column(l)?, a.scope.column(r)?);
                    match (inside(l), inside(r)) {
                        (false, true) => JoinKey { left: l, right: r },
                        (true, false) => JoinKey { left: r, right: l },
                        _ => {
                            return Err(SqlError::InvalidJoin(format!(
                                "ON {} must compare {} with an earlier relation",
                                j.on, new.qualifier
                            )))
                        }
                    }
                }
                _ => return Err(SqlError::InvalidJoin(format!("ON {} must compare two columns", j.on))),
            },
            _ => {
                return Err(SqlError::InvalidJoin(format!(
                    "ON {} must be a single column equality",
                    j.on
                )))
            }
        };
        if a.scope.types[key.left] != a.scope.types[key.right] {
            return Err(SqlError::TypeMismatch {
                expr: j.on.to_string(),
                left: a.scope.types[key.left],
                right: a.scope.types[key.right],
            });
        }
        joins.push(key);
    }

    let filter = q.selection.as_ref().map(|w| a.cond(w, Clause::Where)).transpose()?;

    if q.having.is_some() && q.group_by.is_empty() {
        return Err(SqlError::AggregateMisuse("HAVING without GROUP BY".into()));
    }
    a.aggregate = !q.group_by.is_empty() || q.has_aggregate();
    for g in &q.group_by {
        let i = a.scope.column(g)?;
        if !a.group_keys.contains(&i) {
            a.group_keys.push(i);
        }
    }

    let mut projections = Vec::new();
    let mut columns = Vec::new();
    let mut formats = Vec::new();
    let mut aliases: Vec<(String, Scalar)> = Vec::new();
    for item in &q.projections {
        match item {
            SelectItem::Wildcard => {
                if a.aggregate {
                    return Err(SqlError::AggregateMisuse("* cannot be selected with aggregation".into()));
                }
                for i in 0..a.scope.types.len() {
                    projections.push(Scalar::Column(i));
                    columns.push(a.scope.names[i].clone());
                    formats.push(NumberFormat::Minimal);
                }
            }
            SelectItem::Expr { expr, alias } => {
                let (s, _) = a.scalar(expr, Clause::Select)?;
                let name = match (alias, &s) {
                    (Some(al), _) => al.value().to_string(),
                    (None, Scalar::Column(i)) => a.scope.names[*i].clone(),
                    (None, _) => expr.to_string(),
                };
                let format = match expr {
                    Expr::Aggregate { func: AggFunc::Avg, .. } => NumberFormat::OneDecimal,
                    _ => NumberFormat::Minimal,
                };
                if let Some(al) = alias {
                    aliases.push((al.value().to_string(), s.clone()));
                }
                projections.push(s);
                columns.push(name);
                formats.push(format);
            }
        }
    }

    let having = q.having.as_ref().map(|h| a.cond(h, Clause::Having)).transpose()?;

    let mut order_by = Vec::new();
    for o in &q.order_by {
        let by_alias = match &o.expr {
            Expr::Column(ColumnRef { table: None, column }) => aliases
                .iter()
                .find(|(name, _)| eq_fold(name, column.value()))
                .map(|(_, s)| s.clone()),
            _ => None,
        };
        let key = match by_alias {
            Some(s) => s,
            None => {
                if matches!(o.expr, Expr::Literal(_)) {
                    return Err(SqlError::Invalid(format!(
                        "ORDER BY {} sorts by a constant",
                        o.expr
                    )));
                }
                a.scalar(&o.expr, Clause::OrderBy)?.0
            }
        };
        order_by.push((key, o.descending()));
    }

    Ok(Plan {
        bindings: a.scope.bindings,
        joins,
        filter,
        aggregate: a.aggregate,
        group_keys: a.group_keys,
        aggregates: a.aggregates,
        having,
        projections,
        columns,
        formats,
        order_by,
        limit: q.limit,
    })
}
