//! Production evaluator: hash joins and hash grouping.

use std::collections::HashMap;

use super::ast::{AggFunc, CmpOp, SelectQuery};
use super::plan::{analyze, AggSpec, Cond, Plan, Scalar};
use super::relation::Store;
use super::result::ResultTable;
use super::value::{Key, Value};
use super::SqlError;

pub fn execute(q: &SelectQuery, store: &Store) -> Result<ResultTable, SqlError> {
    let plan = analyze(q, store)?;
    Ok(execute_plan(&plan, store))
}

pub fn execute_plan(plan: &Plan, store: &Store) -> ResultTable {
    let relation = |i: usize| store.get(&plan.bindings[i].relation).expect("analyzed relation");

    let mut rows: Vec<Vec<Value>> = relation(0).rows().to_vec();
    for (i, key) in plan.joins.iter().enumerate() {
        let right = relation(i + 1);
        let right_col = key.right - plan.bindings[i + 1].offset;
        let mut index: HashMap<Key, Vec<usize>> = HashMap::new();
        for (r, row) in right.rows().iter().enumerate() {
            if !row[right_col].is_null() {
                index.entry(row[right_col].key()).or_default().push(r);
            }
        }
        let mut joined = Vec::new();
        for row in &rows {
            let v = &row[key.left];
            if v.is_null() {
                continue;
            }
            if let Some(matches) = index.get(&v.key()) {
                for &r in matches {
                    let mut out = row.clone();
                    out.extend(right.rows()[r].iter().cloned());
                    joined.push(out);
                }
            }
        }
        rows = joined;
    }

    if let Some(f) = &plan.filter {
        rows.retain(|row| eval_cond(f, &|s| row_scalar(s, row)) == Some(true));
    }

    let mut out: Vec<(Vec<Value>, Vec<Value>)> = if plan.aggregate {
        aggregate(plan, &rows)
    } else {
        rows.iter()
            .map(|row| {
                let proj = plan.projections.iter().map(|s| row_scalar(s, row)).collect();
                let keys = plan.order_by.iter().map(|(s, _)| row_scalar(s, row)).collect();
                (proj, keys)
            })
            .collect()
    };

    if !plan.order_by.is_empty() {
        out.sort_by(|(_, a), (_, b)| {
            for (i, (_, desc)) in plan.order_by.iter().enumerate() {
                let o = sort_cmp(&a[i], &b[i], *desc);
                if o.is_ne() {
                    return o;
                }
            }
            std::cmp::Ordering::Equal
        });
    }
    if let Some(n) = plan.limit {
        out.truncate(n.min(usize::MAX as u64) as usize);
    }
    ResultTable {
        columns: plan.columns.clone(),
        rows: out.into_iter().map(|(p, _)| p).collect(),
        ordered: plan.ordered(),
        formats: plan.formats.clone(),
    }
}

/// ORDER BY comparison: Nulls last in either direction.
pub(crate) fn sort_cmp(a: &Value, b: &Value, desc: bool) -> std::cmp::Ordering {
    use std::cmp::Ordering::*;
    match (a.is_null(), b.is_null()) {
        (true, true) => Equal,
        (true, false) => Greater,
        (false, true) => Less,
        _ if desc => b.total_cmp(a),
        _ => a.total_cmp(b),
    }
}

fn row_scalar(s: &Scalar, row: &[Value]) -> Value {
    match s {
        Scalar::Column(i) => row[*i].clone(),
        Scalar::Literal(v) => v.clone(),
        Scalar::Agg(_) => unreachable!("aggregate outside aggregation"),
    }
}

fn eval_cond(c: &Cond, scalar: &dyn Fn(&Scalar) -> Value) -> Option<bool> {
    match c {
        Cond::Compare(op, a, b) => {
            let o = scalar(a).sql_cmp(&scalar(b))?;
            Some(match op {
                CmpOp::Eq => o.is_eq(),
                CmpOp::NotEq => o.is_ne(),
                CmpOp::Lt => o.is_lt(),
                CmpOp::LtEq => o.is_le(),
                CmpOp::Gt => o.is_gt(),
                CmpOp::GtEq => o.is_ge(),
            })
        }
        Cond::And(a, b) => match (eval_cond(a, scalar), eval_cond(b, scalar)) {
            (Some(false), _) | (_, Some(false)) => Some(false),
            (Some(true), Some(true)) => Some(true),
            _ => None,
        },
        Cond::Or(a, b) => match (eval_cond(a, scalar), eval_cond(b, scalar)) {
            (Some(true), _) | (_, Some(true)) => Some(true),
            (Some(false), Some(false)) => Some(false),
            _ => None,
        },
        Cond::Not(a) => eval_cond(a, scalar).map(|v| !v),
    }
}

#[derive(Clone)]
struct Acc {
    count: u64,
    sum: f64,
    best: Option<Value>,
}

impl Acc {
    fn new() -> Self {
        Self {
            count: 0,
            sum: 0.0,
            best: None,
        }
    }

    fn push(&mut self, spec: &AggSpec, row: &[Value]) {
        let Some(col) = spec.arg else {
            self.count += 1;
            return;
        };
        let v = &row[col];
        if v.is_null() {
            return;
        }
        self.count += 1;
        match spec.func {
            AggFunc::Sum | AggFunc::Avg => self.sum += v.as_number().expect("numeric column"),
            AggFunc::Min | AggFunc::Max => {
                let replace = match &self.best {
                    None => true,
                    Some(b) => {
                        let o = v.total_cmp(b);
                        if spec.func == AggFunc::Min {
                            o.is_lt()
                        } else {
                            o.is_gt()
                        }
                    }
                };
                if replace {
                    self.best = Some(v.clone());
                }
            }
            AggFunc::Count => {}
        }
    }

    fn finish(&self, func: AggFunc) -> Value {
        match func {
            AggFunc::Count => Value::Number(self.count as f64),
            _ if self.count == 0 => Value::Null,
            AggFunc::Sum => Value::Number(self.sum),
            AggFunc::Avg => Value::Number(self.sum / self.count as f64),
            AggFunc::Min | AggFunc::Max => self.best.clone().unwrap_or(Value::Null),
        }
    }
}

fn aggregate(plan: &Plan, rows: &[Vec<Value>]) -> Vec<(Vec<Value>, Vec<Value>)> {
    struct Group {
        key: Vec<Value>,
        first: usize,
        accs: Vec<Acc>,
    }
    let mut groups: Vec<Group> = Vec::new();
    let mut index: HashMap<Vec<Key>, usize> = HashMap::new();
    if plan.group_keys.is_empty() {
        groups.push(Group {
            key: Vec::new(),
            first: usize::MAX,
            accs: vec![Acc::new(); plan.aggregates.len()],
        });
        index.insert(Vec::new(), 0);
    }
    for (r, row) in rows.iter().enumerate() {
        let key: Vec<Value> = plan.group_keys.iter().map(|&c| row[c].clone()).collect();
        let g = *index
            .entry(key.iter().map(Value::key).collect())
            .or_insert_with(|| {
                groups.push(Group {
                    key: key.clone(),
                    first: r,
                    accs: vec![Acc::new(); plan.aggregates.len()],
                });
                groups.len() - 1
            });
        let group = &mut groups[g];
        if group.first == usize::MAX {
            group.first = r;
        }
        for (acc, spec) in group.accs.iter_mut().zip(&plan.aggregates) {
            acc.push(spec, row);
        }
    }
    groups.sort_by(|a, b| {
        a.key
            .iter()
            .zip(&b.key)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let mut out = Vec::new();
    for g in &groups {
        let values: Vec<Value> = g.accs.iter().zip(&plan.aggregates).map(|(a, s)| a.finish(s.func)).collect();
        let scalar = |s: &Scalar| match s {
            Scalar::Column(c) => rows[g.first][*c].clone(),
            Scalar::Literal(v) => v.clone(),
            Scalar::Agg(i) => values[*i].clone(),
        };
        if let Some(h) = &plan.having {
            if eval_cond(h, &scalar) != Some(true) {
                continue;
            }
        }
        let proj = plan.projections.iter().map(&scalar).collect();
        let keys = plan.order_by.iter().map(|(s, _)| scalar(s)).collect();
        out.push((proj, keys));
    }
    out
}
