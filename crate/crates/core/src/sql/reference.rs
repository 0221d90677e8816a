//! Reference evaluator: full cross product, filter, group by sorting.
//!
//! Deliberately naive. It exists to check [`execute`](super::execute) and to
//! count the cells a query reads. The counting rule:
//!
//! - every ON key cell, for every row of the cross product;
//! - every cell the WHERE clause mentions, for every row surviving the joins;
//! - for rows surviving WHERE: group-key, aggregate-argument and ORDER BY
//!   cells, plus the first cell of each bound row for `COUNT(*)`;
//! - in non-aggregate queries, the projected cells of the emitted rows.
//!
//! A cell is `(relation, row, column)`; each is counted once.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::Serialize;

use super::ast::{AggFunc, CmpOp, SelectQuery};
use super::plan::{analyze, Cond, Plan, Scalar};
use super::relation::{Relation, Store};
use super::result::ResultTable;
use super::value::Value;
use super::SqlError;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct CellRef {
    pub relation: String,
    pub row: usize,
    pub column: usize,
}

pub fn reference_execute(q: &SelectQuery, store: &Store) -> Result<ResultTable, SqlError> {
    Ok(reference_execute_traced(q, store)?.0)
}

pub fn reference_execute_traced(
    q: &SelectQuery,
    store: &Store,
) -> Result<(ResultTable, BTreeSet<CellRef>), SqlError> {
    let plan = analyze(q, store)?;
    Ok(Naive::new(&plan, store).run())
}

/// Number of distinct cells the reference evaluator reads for `q`.
pub fn involved_cells(q: &SelectQuery, store: &Store) -> Result<usize, SqlError> {
    Ok(reference_execute_traced(q, store)?.1.len())
}

#[derive(Clone, Copy, PartialEq)]
enum Tri {
    True,
    False,
    Unknown,
}

fn tri_and(a: Tri, b: Tri) -> Tri {
    match (a, b) {
        (Tri::True, Tri::True) => Tri::True,
        (Tri::False, _) | (_, Tri::False) => Tri::False,
        _ => Tri::Unknown,
    }
}

fn tri_or(a: Tri, b: Tri) -> Tri {
    match (a, b) {
        (Tri::False, Tri::False) => Tri::False,
        (Tri::True, _) | (_, Tri::True) => Tri::True,
        _ => Tri::Unknown,
    }
}

fn tri_not(a: Tri) -> Tri {
    match a {
        Tri::True => Tri::False,
        Tri::False => Tri::True,
        Tri::Unknown => Tri::Unknown,
    }
}

fn compare(op: CmpOp, a: &Value, b: &Value) -> Tri {
    let ord = match (a, b) {
        (Value::Number(x), Value::Number(y)) => x.partial_cmp(y),
        (Value::Text(x), Value::Text(y)) => Some(x.cmp(y)),
        _ => None,
    };
    let Some(ord) = ord else { return Tri::Unknown };
    let holds = match op {
        CmpOp::Eq => ord == Ordering::Equal,
        CmpOp::NotEq => ord != Ordering::Equal,
        CmpOp::Lt => ord == Ordering::Less,
        CmpOp::LtEq => ord != Ordering::Greater,
        CmpOp::Gt => ord == Ordering::Greater,
        CmpOp::GtEq => ord != Ordering::Less,
    };
    if holds {
        Tri::True
    } else {
        Tri::False
    }
}

fn eval(c: &Cond, get: &dyn Fn(&Scalar) -> Value) -> Tri {
    match c {
        Cond::Compare(op, a, b) => compare(*op, &get(a), &get(b)),
        Cond::And(a, b) => tri_and(eval(a, get), eval(b, get)),
        Cond::Or(a, b) => tri_or(eval(a, get), eval(b, get)),
        Cond::Not(a) => tri_not(eval(a, get)),
    }
}

/// ORDER BY / grouping order: Nulls after everything, either direction.
fn order(a: &Value, b: &Value, desc: bool) -> Ordering {
    match (a, b) {
        (Value::Null, Value::Null) => Ordering::Equal,
        (Value::Null, _) => Ordering::Greater,
        (_, Value::Null) => Ordering::Less,
        _ => {
            let o = a.total_cmp(b);
            if desc {
                o.reverse()
            } else {
                o
            }
        }
    }
}

struct Naive<'a> {
    plan: &'a Plan,
    relations: Vec<&'a Relation>,
    touched: BTreeSet<CellRef>,
}

type RowIds = Vec<usize>;

impl<'a> Naive<'a> {
    fn new(plan: &'a Plan, store: &'a Store) -> Self {
        let relations = plan
            .bindings
            .iter()
            .map(|b| store.get(&b.relation).expect("analyzed relation"))
            .collect();
        Self {
            plan,
            relations,
            touched: BTreeSet::new(),
        }
    }

    fn value(&self, ids: &RowIds, column: usize) -> Value {
        let (b, c) = self.plan.locate(column);
        self.relations[b].rows()[ids[b]][c].clone()
    }

    fn touch(&mut self, ids: &RowIds, column: usize) {
        let (b, c) = self.plan.locate(column);
        self.touched.insert(CellRef {
            relation: self.relations[b].name().to_string(),
            row: ids[b],
            column: c,
        });
    }

    fn cross_product(&self) -> Vec<RowIds> {
        let mut out: Vec<RowIds> = vec![Vec::new()];
        for rel in &self.relations {
            let mut next = Vec::new();
            for prefix in &out {
                for r in 0..rel.n_rows() {
                    let mut ids = prefix.clone();
                    ids.push(r);
                    next.push(ids);
                }
            }
            out = next;
        }
        out
    }

    fn run(mut self) -> (ResultTable, BTreeSet<CellRef>) {
        let plan = self.plan;
        let mut survivors = Vec::new();
        for ids in self.cross_product() {
            let mut keep = true;
            for key in &plan.joins {
                self.touch(&ids, key.left);
                self.touch(&ids, key.right);
                let (l, r) = (self.value(&ids, key.left), self.value(&ids, key.right));
                if compare(CmpOp::Eq, &l, &r) != Tri::True {
                    keep = false;
                }
            }
            if keep {
                survivors.push(ids);
            }
        }

        if let Some(f) = &plan.filter {
            let cols = f.columns();
            let mut kept = Vec::new();
            for ids in survivors {
                for &c in &cols {
                    self.touch(&ids, c);
                }
                let verdict = eval(f, &|s| match s {
                    Scalar::Column(c) => self.value(&ids, *c),
                    Scalar::Literal(v) => v.clone(),
                    Scalar::Agg(_) => unreachable!(),
                });
                if verdict == Tri::True {
                    kept.push(ids);
                }
            }
            survivors = kept;
        }

        let order_cols: Vec<usize> = plan
            .order_by
            .iter()
            .filter_map(|(s, _)| match s {
                Scalar::Column(c) => Some(*c),
                _ => None,
            })
            .collect();

        let rows: Vec<(Vec<Value>, Vec<Value>)> = if plan.aggregate {
            self.grouped(survivors, &order_cols)
        } else {
            for ids in &survivors {
                for &c in &order_cols {
                    self.touch(ids, c);
                }
            }
            let mut tagged: Vec<(RowIds, Vec<Value>)> = survivors
                .into_iter()
                .map(|ids| {
                    let keys = plan.order_by.iter().map(|(s, _)| self.scalar(&ids, s)).collect();
                    (ids, keys)
                })
                .collect();
            self.sort(&mut tagged);
            if let Some(n) = plan.limit {
                tagged.truncate(n as usize);
            }
            tagged
                .into_iter()
                .map(|(ids, keys)| {
                    let mut proj = Vec::new();
                    for s in &plan.projections {
                        if let Scalar::Column(c) = s {
                            self.touch(&ids, *c);
                        }
                        proj.push(self.scalar(&ids, s));
                    }
                    (proj, keys)
                })
                .collect()
        };

        let result = ResultTable {
            columns: plan.columns.clone(),
            rows: rows.into_iter().map(|(p, _)| p).collect(),
            ordered: plan.ordered(),
            formats: plan.formats.clone(),
        };
        (result, self.touched)
    }

    fn scalar(&self, ids: &RowIds, s: &Scalar) -> Value {
        match s {
            Scalar::Column(c) => self.value(ids, *c),
            Scalar::Literal(v) => v.clone(),
            Scalar::Agg(_) => unreachable!("aggregate outside aggregation"),
        }
    }

    fn sort<T>(&self, rows: &mut [(T, Vec<Value>)]) {
        let dirs: Vec<bool> = self.plan.order_by.iter().map(|(_, d)| *d).collect();
        rows.sort_by(|(_, a), (_, b)| {
            for (i, desc) in dirs.iter().enumerate() {
                let o = order(&a[i], &b[i], *desc);
                if o != Ordering::Equal {
                    return o;
                }
            }
            Ordering::Equal
        });
    }

    fn grouped(&mut self, survivors: Vec<RowIds>, order_cols: &[usize]) -> Vec<(Vec<Value>, Vec<Value>)> {
        let plan = self.plan;
        for ids in &survivors {
            for &c in &plan.group_keys {
                self.touch(ids, c);
            }
            for spec in &plan.aggregates {
                match spec.arg {
                    Some(c) => self.touch(ids, c),
                    None => {
                        for b in 0..plan.bindings.len() {
                            let first = plan.bindings[b].offset;
                            self.touch(ids, first);
                        }
                    }
                }
            }
            for &c in order_cols {
                self.touch(ids, c);
            }
        }

        let mut keyed: Vec<(Vec<Value>, RowIds)> = survivors
            .into_iter()
            .map(|ids| (plan.group_keys.iter().map(|&c| self.value(&ids, c)).collect(), ids))
            .collect();
        keyed.sort_by(|(a, _), (b, _)| {
            a.iter()
                .zip(b)
                .map(|(x, y)| order(x, y, false))
                .find(|o| *o != Ordering::Equal)
                .unwrap_or(Ordering::Equal)
        });
        let mut groups: Vec<Vec<RowIds>> = Vec::new();
        let mut last_key: Option<Vec<Value>> = None;
        for (key, ids) in keyed {
            let same = last_key.as_ref().is_some_and(|k| {
                k.iter().zip(&key).all(|(x, y)| x.total_cmp(y) == Ordering::Equal)
            });
            if same {
                groups.last_mut().expect("open group").push(ids);
            } else {
                groups.push(vec![ids]);
                last_key = Some(key);
            }
        }
        if plan.group_keys.is_empty() && groups.is_empty() {
            groups.push(Vec::new());
        }

        let mut out: Vec<(Vec<Value>, Vec<Value>)> = Vec::new();
        for members in &groups {
            let aggs: Vec<Value> = plan
                .aggregates
                .iter()
                .map(|spec| {
                    let inputs: Vec<Value> = match spec.arg {
                        None => members.iter().map(|_| Value::Number(1.0)).collect(),
                        Some(c) => members
                            .iter()
                            .map(|ids| self.value(ids, c))
                            .filter(|v| !v.is_null())
                            .collect(),
                    };
                    fold_aggregate(spec.func, &inputs)
                })
                .collect();
            let get = |s: &Scalar| match s {
                Scalar::Column(c) => self.value(&members[0], *c),
                Scalar::Literal(v) => v.clone(),
                Scalar::Agg(i) => aggs[*i].clone(),
            };
            if let Some(h) = &plan.having {
                if eval(h, &get) != Tri::True {
                    continue;
                }
            }
            let proj = plan.projections.iter().map(get).collect();
            let keys = plan.order_by.iter().map(|(s, _)| get(s)).collect();
            out.push((proj, keys));
        }
        self.sort(&mut out);
        if let Some(n) = plan.limit {
            out.truncate(n as usize);
        }
        out
    }
}

fn fold_aggregate(func: AggFunc, inputs: &[Value]) -> Value {
    if func == AggFunc::Count {
        return Value::Number(inputs.len() as f64);
    }
    if inputs.is_empty() {
        return Value::Null;
    }
    match func {
        AggFunc::Sum | AggFunc::Avg => {
            let total = inputs
                .iter()
                .fold(0.0, |acc, v| acc + v.as_number().expect("numeric column"));
            if func == AggFunc::Sum {
                Value::Number(total)
            } else {
                Value::Number(total / inputs.len() as f64)
            }
        }
        AggFunc::Min => inputs
            .iter()
            .skip(1)
            .fold(inputs[0].clone(), |m, v| if v.total_cmp(&m).is_lt() { v.clone() } else { m }),
        AggFunc::Max => inputs
            .iter()
            .skip(1)
            .fold(inputs[0].clone(), |m, v| if v.total_cmp(&m).is_gt() { v.clone() } else { m }),
        AggFunc::Count => unreachable!(),
    }
}
