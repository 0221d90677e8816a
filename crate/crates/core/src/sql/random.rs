//! Random relations and well-formed random queries for differential tests.

use rand::seq::IndexedRandom;
use rand::Rng;

use super::ast::*;
use super::relation::{Relation, Store};
use super::value::{ColumnType, Value};

const TEXT_POOL: &[&str] = &["a", "b", "c", "B", "ab", "Ω", "x y"];

#[derive(Debug, Clone, Copy)]
pub struct RandomShape {
    pub relations: usize,
    pub max_rows: usize,
    pub max_cols: usize,
    pub null_rate: f64,
}

impl Default for RandomShape {
    fn default() -> Self {
        Self {
            relations: 3,
            max_rows: 8,
            max_cols: 6,
            null_rate: 0.1,
        }
    }
}

fn random_value<R: Rng + ?Sized>(rng: &mut R, ty: ColumnType, null_rate: f64) -> Value {
    if rng.random::<f64>() < null_rate {
        return Value::Null;
    }
    match ty {
        ColumnType::Number => {
            let x = rng.random_range(-3..8) as f64;
            Value::Number(if rng.random::<f64>() < 0.2 { x + 0.5 } else { x })
        }
        ColumnType::Text => Value::Text(TEXT_POOL.choose(rng).expect("non-empty").to_string()),
    }
}

/// Relations `r0, r1, ...`; column 0 is always a numeric key `k` with a small
/// domain so joins find matches.
pub fn random_store<R: Rng + ?Sized>(rng: &mut R, shape: RandomShape) -> Store {
    let mut store = Store::new();
    for i in 0..shape.relations {
        let m = rng.random_range(1..=shape.max_cols);
        let n = rng.random_range(0..=shape.max_rows);
        let mut columns = vec!["k".to_string()];
        let mut types = vec![ColumnType::Number];
        for j in 1..m {
            columns.push(if j == 1 && rng.random::<f64>() < 0.3 {
                "Two words".to_string()
            } else {
                format!("c{j}")
            });
            types.push(if rng.random::<bool>() {
                ColumnType::Number
            } else {
                ColumnType::Text
            });
        }
        let rows = (0..n)
            .map(|_| {
                types
                    .iter()
                    .enumerate()
                    .map(|(j, t)| {
                        if j == 0 {
                            if rng.random::<f64>() < shape.null_rate {
                                Value::Null
                            } else {
                                Value::Number(rng.random_range(0..4) as f64)
                            }
                        } else {
                            random_value(rng, *t, shape.null_rate)
                        }
                    })
                    .collect()
            })
            .collect();
        let rel = Relation::new(format!("r{i}"), columns, types, rows).expect("well-formed");
        store.insert(rel).expect("distinct names");
    }
    store
}

struct Col {
    reference: ColumnRef,
    ty: ColumnType,
}

fn literal<R: Rng + ?Sized>(rng: &mut R, ty: ColumnType) -> Expr {
    match random_value(rng, ty, 0.05) {
        Value::Null => Expr::Literal(Literal::Null),
        Value::Number(x) => Expr::number(x),
        Value::Text(s) => Expr::text(s),
    }
}

fn comparison<R: Rng + ?Sized>(rng: &mut R, cols: &[Col]) -> Expr {
    let a = cols.choose(rng).expect("columns");
    let op = *CmpOp::ALL.choose(rng).expect("ops");
    let same: Vec<&Col> = cols.iter().filter(|c| c.ty == a.ty).collect();
    let right = if rng.random::<f64>() < 0.25 {
        Expr::Column(same.choose(rng).expect("a itself").reference.clone())
    } else {
        literal(rng, a.ty)
    };
    Expr::compare(op, Expr::Column(a.reference.clone()), right)
}

fn condition<R: Rng + ?Sized>(rng: &mut R, cols: &[Col], depth: u32) -> Expr {
    if depth == 0 || rng.random::<f64>() < 0.5 {
        return comparison(rng, cols);
    }
    match rng.random_range(0..3) {
        0 => condition(rng, cols, depth - 1).and(condition(rng, cols, depth - 1)),
        1 => condition(rng, cols, depth - 1).or(condition(rng, cols, depth - 1)),
        _ => condition(rng, cols, depth - 1).negate(),
    }
}

fn aggregate<R: Rng + ?Sized>(rng: &mut R, cols: &[Col]) -> Expr {
    let func = *AggFunc::ALL.choose(rng).expect("funcs");
    if func == AggFunc::Count && rng.random::<bool>() {
        return Expr::aggregate(AggFunc::Count, AggArg::Star);
    }
    let eligible: Vec<&Col> = match func {
        AggFunc::Sum | AggFunc::Avg => cols.iter().filter(|c| c.ty == ColumnType::Number).collect(),
        _ => cols.iter().collect(),
    };
    let col = eligible.choose(rng).expect("key column is numeric");
    Expr::aggregate(func, AggArg::Column(col.reference.clone()))
}

/// A query that analyzes cleanly against `store` (as built by [`random_store`]).
pub fn random_query<R: Rng + ?Sized>(rng: &mut R, store: &Store) -> SelectQuery {
    let rels: Vec<&Relation> = store.relations().collect();
    let base = *rels.choose(rng).expect("non-empty store");
    let join = rels.len() > 1 && rng.random::<f64>() < 0.35;

    let mut from = TableRef::new(base.name());
    let mut joins = Vec::new();
    let mut cols: Vec<Col> = Vec::new();
    let qualify = |rel: &Relation, q: Option<&str>, cols: &mut Vec<Col>| {
        for (name, ty) in rel.columns().iter().zip(rel.types()) {
            let reference = match q {
                Some(q) => ColumnRef::qualified(q, name.as_str()),
                None => ColumnRef::new(name.as_str()),
            };
            cols.push(Col { reference, ty: *ty });
        }
    };
    if join {
        let other = *rels.choose(rng).expect("non-empty store");
        let (lq, rq) = if other.name() == base.name() || rng.random::<f64>() < 0.3 {
            from.alias = Some(Ident::new("x"));
            ("x".to_string(), "y".to_string())
        } else {
            (base.name().to_string(), other.name().to_string())
        };
        let mut table = TableRef::new(other.name());
        if rq == "y" {
            table.alias = Some(Ident::new("y"));
        }
        qualify(base, Some(&lq), &mut cols);
        let split = cols.len();
        qualify(other, Some(&rq), &mut cols);
        let on = Expr::compare(
            CmpOp::Eq,
            Expr::Column(cols[0].reference.clone()),
            Expr::Column(cols[split].reference.clone()),
        );
        joins.push(Join { table, on });
    } else {
        qualify(base, None, &mut cols);
    }

    let selection = (rng.random::<f64>() < 0.6).then(|| condition(rng, &cols, 2));
    let mut q = SelectQuery {
        projections: Vec::new(),
        from,
        joins,
        selection,
        group_by: Vec::new(),
        having: None,
        order_by: Vec::new(),
        limit: None,
    };

    if rng.random::<f64>() < 0.45 {
        let n_group = rng.random_range(0..=2.min(cols.len()));
        let mut keys: Vec<usize> = Vec::new();
        while keys.len() < n_group {
            let i = rng.random_range(0..cols.len());
            if !keys.contains(&i) {
                keys.push(i);
            }
        }
        q.group_by = keys.iter().map(|&i| cols[i].reference.clone()).collect();
        for &i in &keys {
            q.projections.push(SelectItem::Expr {
                expr: Expr::Column(cols[i].reference.clone()),
                alias: None,
            });
        }
        for i in 0..rng.random_range(1..=2) {
            let alias = rng.random::<bool>().then(|| Ident::new(format!("agg{i}")));
            q.projections.push(SelectItem::Expr {
                expr: aggregate(rng, &cols),
                alias,
            });
        }
        if !keys.is_empty() && rng.random::<f64>() < 0.5 {
            let agg = aggregate(rng, &cols);
            let lit = match &agg {
                Expr::Aggregate {
                    func: AggFunc::Min | AggFunc::Max,
                    arg: AggArg::Column(c),
                } => {
                    let ty = cols.iter().find(|x| &x.reference == c).expect("own column").ty;
                    literal(rng, ty)
                }
                _ => Expr::number(rng.random_range(0..6) as f64),
            };
            q.having = Some(Expr::compare(*CmpOp::ALL.choose(rng).expect("ops"), agg, lit));
        }
        if rng.random::<f64>() < 0.5 {
            let pick = q.projections.choose(rng).expect("projections").clone();
            if let SelectItem::Expr { expr, alias } = pick {
                let expr = match alias {
                    Some(a) => Expr::Column(ColumnRef { table: None, column: a }),
                    None => expr,
                };
                q.order_by.push(OrderItem {
                    expr,
                    order: [None, Some(SortOrder::Asc), Some(SortOrder::Desc)].choose(rng).copied().flatten(),
                });
            }
        }
    } else {
        if rng.random::<f64>() < 0.25 {
            q.projections.push(SelectItem::Wildcard);
        } else {
            for _ in 0..rng.random_range(1..=3) {
                let c = cols.choose(rng).expect("columns");
                q.projections.push(SelectItem::Expr {
                    expr: Expr::Column(c.reference.clone()),
                    alias: None,
                });
            }
            if rng.random::<f64>() < 0.1 {
                q.projections.push(SelectItem::Expr {
                    expr: literal(rng, ColumnType::Number),
                    alias: Some(Ident::new("lit")),
                });
            }
        }
        for _ in 0..rng.random_range(0..=2) {
            let c = cols.choose(rng).expect("columns");
            q.order_by.push(OrderItem {
                expr: Expr::Column(c.reference.clone()),
                order: [None, Some(SortOrder::Asc), Some(SortOrder::Desc)].choose(rng).copied().flatten(),
            });
        }
    }
    if rng.random::<f64>() < 0.3 {
        q.limit = Some(rng.random_range(0..5));
    }
    q
}
