//! Recursive-descent parser for the supported SELECT subset.

use super::ast::*;
use super::lexer::{tokenize, Keyword, Token, TokenKind};
use super::SqlError;

pub fn parse(sql: &str) -> Result<SelectQuery, SqlError> {
    let tokens = tokenize(sql)?;
    let mut p = Parser { tokens, pos: 0 };
    let q = p.query()?;
    if p.eat(&TokenKind::Semicolon) {
        // one trailing semicolon is fine
    }
    match p.peek_kind() {
        TokenKind::Eof => Ok(q),
        TokenKind::Keyword(k @ (Keyword::Union | Keyword::Intersect | Keyword::Except)) => {
            Err(p.unsupported(k.as_str()))
        }
        TokenKind::Keyword(Keyword::Offset) => Err(p.unsupported("OFFSET")),
        _ => Err(p.error(&["end of input"])),
    }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

fn kw(k: Keyword) -> TokenKind {
    TokenKind::Keyword(k)
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_kind(&self) -> &TokenKind {
        &self.peek().kind
    }

    fn peek_at(&self, ahead: usize) -> &TokenKind {
        let i = (self.pos + ahead).min(self.tokens.len() - 1);
        &self.tokens[i].kind
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek_kind() == kind {
            self.advance();
            true
        } else {
            false
        }
    }

    fn error(&self, expected: &[&str]) -> SqlError {
        SqlError::Syntax {
            offset: self.peek().offset,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek_kind().describe(),
        }
    }

    fn unsupported(&self, feature: &str) -> SqlError {
        SqlError::Unsupported {
            offset: self.peek().offset,
            feature: feature.to_string(),
        }
    }

    fn expect(&mut self, kind: TokenKind, name: &str) -> Result<(), SqlError> {
        if self.eat(&kind) {
            Ok(())
        } else {
            Err(self.error(&[name]))
        }
    }

    fn query(&mut self) -> Result<SelectQuery, SqlError> {
        if self.peek_kind() == &kw(Keyword::With) {
            return Err(self.unsupported("WITH"));
        }
        self.expect(kw(Keyword::Select), "SELECT")?;
        if self.peek_kind() == &kw(Keyword::Distinct) {
            return Err(self.unsupported("DISTINCT"));
        }
        let mut projections = vec![self.select_item()?];
        while self.eat(&TokenKind::Comma) {
            projections.push(self.select_item()?);
        }
        self.expect(kw(Keyword::From), "FROM")?;
        let from = self.table_ref()?;
        let mut joins = Vec::new();
        loop {
            match self.peek_kind() {
                TokenKind::Keyword(Keyword::Join) => {
                    self.advance();
                }
                TokenKind::Keyword(Keyword::Inner) => {
                    self.advance();
                    self.expect(kw(Keyword::Join), "JOIN")?;
                }
                TokenKind::Keyword(
                    k @ (Keyword::Left | Keyword::Right | Keyword::Full | Keyword::Outer | Keyword::Cross | Keyword::Natural),
                ) => {
                    let k = *k;
                    return Err(self.unsupported(&format!("{} JOIN", k.as_str())));
                }
                TokenKind::Comma => return Err(self.unsupported("comma join")),
                _ => break,
            }
            let table = self.table_ref()?;
            self.expect(kw(Keyword::On), "ON")?;
            let on = self.expr()?;
            joins.push(Join { table, on });
        }
        let selection = if self.eat(&kw(Keyword::Where)) {
            Some(self.expr()?)
        } else {
            None
        };
        let mut group_by = Vec::new();
        if self.eat(&kw(Keyword::Group)) {
            self.expect(kw(Keyword::By), "BY")?;
            group_by.push(self.column_ref()?);
            while self.eat(&TokenKind::Comma) {
                group_by.push(self.column_ref()?);
            }
        }
        let having = if self.eat(&kw(Keyword::Having)) {
            Some(self.expr()?)
        } else {
            None
        };
        let mut order_by = Vec::new();
        if self.eat(&kw(Keyword::Order)) {
            self.expect(kw(Keyword::By), "BY")?;
            loop {
                let expr = self.expr()?;
                let order = if self.eat(&kw(Keyword::Asc)) {
                    Some(SortOrder::Asc)
                } else if self.eat(&kw(Keyword::Desc)) {
                    Some(SortOrder::Desc)
                } else {
                    None
                };
                order_by.push(OrderItem { expr, order });
                if !self.eat(&TokenKind::Comma) {
                    break;
                }
            }
        }
        let limit = if self.eat(&kw(Keyword::Limit)) {
            match self.peek_kind().clone() {
                TokenKind::Number(_, raw) if raw.bytes().all(|b| b.is_ascii_digit()) => {
                    let offset = self.peek().offset;
                    self.advance();
                    Some(raw.parse::<u64>().map_err(|_| SqlError::Syntax {
                        offset,
                        expected: vec!["row count".into()],
                        found: format!("number {raw}"),
                    })?)
                }
                _ => return Err(self.error(&["row count"])),
            }
        } else {
            None
        };
        Ok(SelectQuery {
            projections,
            from,
            joins,
            selection,
            group_by,
            having,
            order_by,
            limit,
        })
    }

    fn select_item(&mut self) -> Result<SelectItem, SqlError> {
        if self.eat(&TokenKind::Star) {
            return Ok(SelectItem::Wildcard);
        }
        let expr = self.expr()?;
        let alias = if self.eat(&kw(Keyword::As)) {
            Some(self.ident()?)
        } else if matches!(self.peek_kind(), TokenKind::Ident(_) | TokenKind::QuotedIdent(_)) {
            Some(self.ident()?)
        } else {
            None
        };
        Ok(SelectItem::Expr { expr, alias })
    }

    fn table_ref(&mut self) -> Result<TableRef, SqlError> {
        if self.peek_kind() == &TokenKind::LParen {
            return Err(self.unsupported("subquery"));
        }
        let name = self.ident()?;
        let alias = if self.eat(&kw(Keyword::As)) {
            Some(self.ident()?)
        } else if matches!(self.peek_kind(), TokenKind::Ident(_) | TokenKind::QuotedIdent(_)) {
            Some(self.ident()?)
        } else {
            None
        };
        Ok(TableRef { name, alias })
    }

    fn ident(&mut self) -> Result<Ident, SqlError> {
        match self.peek_kind().clone() {
            TokenKind::Ident(s) => {
                self.advance();
                Ok(Ident::new(s))
            }
            TokenKind::QuotedIdent(s) => {
                self.advance();
                Ok(Ident::quoted(s))
            }
            _ => Err(self.error(&["identifier"])),
        }
    }

    fn column_ref(&mut self) -> Result<ColumnRef, SqlError> {
        let first = self.ident()?;
        if self.eat(&TokenKind::Dot) {
            if self.peek_kind() == &TokenKind::Star {
                return Err(self.unsupported("qualified wildcard"));
            }
            let column = self.ident()?;
            Ok(ColumnRef {
                table: Some(first),
                column,
            })
        } else {
            Ok(ColumnRef {
                table: None,
                column: first,
            })
        }
    }

    fn expr(&mut self) -> Result<Expr, SqlError> {
        let mut left = self.and_expr()?;
        while self.eat(&kw(Keyword::Or)) {
            let right = self.and_expr()?;
            left = Expr::Or(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn and_expr(&mut self) -> Result<Expr, SqlError> {
        let mut left = self.not_expr()?;
        while self.eat(&kw(Keyword::And)) {
            let right = self.not_expr()?;
            left = Expr::And(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn not_expr(&mut self) -> Result<Expr, SqlError> {
        if self.eat(&kw(Keyword::Not)) {
            if self.peek_kind() == &kw(Keyword::Exists) {
                return Err(self.unsupported("EXISTS"));
            }
            return Ok(Expr::Not(Box::new(self.not_expr()?)));
        }
        self.comparison()
    }

    fn comparison(&mut self) -> Result<Expr, SqlError> {
        let left = self.primary()?;
        self.reject_postfix()?;
        let op = match self.peek_kind() {
            TokenKind::Eq => CmpOp::Eq,
            TokenKind::NotEq => CmpOp::NotEq,
            TokenKind::Lt => CmpOp::Lt,
            TokenKind::LtEq => CmpOp::LtEq,
            TokenKind::Gt => CmpOp::Gt,
            TokenKind::GtEq => CmpOp::GtEq,
            _ => return Ok(left),
        };
        self.advance();
        let right = self.primary()?;
        self.reject_postfix()?;
        Ok(Expr::compare(op, left, right))
    }

    /// Operators that may follow an operand but lie outside the subset.
    fn reject_postfix(&self) -> Result<(), SqlError> {
        match self.peek_kind() {
            TokenKind::Arith(_) | TokenKind::Minus => Err(self.unsupported("arithmetic")),
            TokenKind::Star if !matches!(self.peek_at(1), TokenKind::Keyword(Keyword::From)) => {
                Err(self.unsupported("arithmetic"))
            }
            TokenKind::Keyword(k @ (Keyword::Like | Keyword::In | Keyword::Between | Keyword::Is)) => {
                Err(self.unsupported(k.as_str()))
            }
            TokenKind::Keyword(Keyword::Not)
                if matches!(
                    self.peek_at(1),
                    TokenKind::Keyword(Keyword::Like | Keyword::In | Keyword::Between)
                ) =>
            {
                if let TokenKind::Keyword(k) = self.peek_at(1) {
                    Err(self.unsupported(&format!("NOT {}", k.as_str())))
                } else {
                    unreachable!()
                }
            }
            _ => Ok(()),
        }
    }

    fn primary(&mut self) -> Result<Expr, SqlError> {
        match self.peek_kind().clone() {
            TokenKind::LParen => {
                if self.peek_at(1) == &kw(Keyword::Select) {
                    return Err(self.unsupported("subquery"));
                }
                self.advance();
                let e = self.expr()?;
                self.expect(TokenKind::RParen, "')'")?;
                Ok(e)
            }
            TokenKind::Number(x, _) => {
                self.advance();
                Ok(Expr::number(x))
            }
            TokenKind::Minus => {
                self.advance();
                match self.peek_kind().clone() {
                    TokenKind::Number(x, _) => {
                        self.advance();
                        Ok(Expr::number(-x))
                    }
                    _ => Err(self.unsupported("arithmetic")),
                }
            }
            TokenKind::Str(s) => {
                self.advance();
                Ok(Expr::text(s))
            }
            TokenKind::Keyword(Keyword::Null) => {
                self.advance();
                Ok(Expr::Literal(Literal::Null))
            }
            TokenKind::Keyword(k @ (Keyword::Sum | Keyword::Avg | Keyword::Count | Keyword::Min | Keyword::Max)) => {
                self.advance();
                let func = match k {
                    Keyword::Sum => AggFunc::Sum,
                    Keyword::Avg => AggFunc::Avg,
                    Keyword::Count => AggFunc::Count,
                    Keyword::Min => AggFunc::Min,
                    _ => AggFunc::Max,
                };
                self.expect(TokenKind::LParen, "'('")?;
                if self.peek_kind() == &kw(Keyword::Distinct) {
                    return Err(self.unsupported("DISTINCT"));
                }
                let arg = if self.eat(&TokenKind::Star) {
                    AggArg::Star
                } else {
                    AggArg::Column(self.column_ref()?)
                };
                if !matches!(self.peek_kind(), TokenKind::RParen) {
                    self.reject_postfix()?;
                }
                self.expect(TokenKind::RParen, "')'")?;
                Ok(Expr::Aggregate { func, arg })
            }
            TokenKind::Keyword(Keyword::Case) => Err(self.unsupported("CASE")),
            TokenKind::Keyword(Keyword::Exists) => Err(self.unsupported("EXISTS")),
            TokenKind::Ident(name) if self.peek_at(1) == &TokenKind::LParen => {
                Err(self.unsupported(&format!("function {name}")))
            }
            TokenKind::Ident(_) | TokenKind::QuotedIdent(_) => Ok(Expr::Column(self.column_ref()?)),
            _ => Err(self.error(&["column", "literal", "aggregate", "'('"])),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn round_trip(sql: &str) -> SelectQuery {
        let q = parse(sql).unwrap();
        let printed = q.to_string();
        assert_eq!(parse(&printed).unwrap(), q, "{printed}");
        q
    }

    #[test]
    fn having_query() {
        let q = round_trip(
            "SELECT Venue, AVG(Attendance) FROM t GROUP BY Venue HAVING AVG(Attendance) > 13000",
        );
        let aggs = q
            .projections
            .iter()
            .filter(|p| matches!(p, SelectItem::Expr { expr, .. } if expr.contains_aggregate()))
            .count();
        assert_eq!(aggs, 1);
        assert_eq!(q.group_by.len(), 1);
        assert!(q.having.is_some());
    }

    #[test]
    fn ordered_limit_query() {
        let q = round_trip("SELECT a FROM t WHERE b = 'x' ORDER BY a DESC LIMIT 2");
        assert!(q.is_ordered());
        assert!(q.order_by[0].descending());
        assert_eq!(q.limit, Some(2));
    }

    #[test]
    fn incomplete_query_errors_at_end() {
        let sql = "SELECT * FROM";
        match parse(sql) {
            Err(SqlError::Syntax { offset, expected, .. }) => {
                assert_eq!(offset, sql.len());
                assert_eq!(expected, vec!["identifier".to_string()]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unsupported_features_are_named() {
        for (sql, feature) in [
            ("SELECT DISTINCT a FROM t", "DISTINCT"),
            ("SELECT a FROM t WHERE a LIKE 'x%'", "LIKE"),
            ("SELECT a FROM t WHERE a IN (1, 2)", "IN"),
            ("SELECT a FROM t WHERE a NOT IN (1)", "NOT IN"),
            ("SELECT a FROM t WHERE a BETWEEN 1 AND 2", "BETWEEN"),
            ("SELECT a FROM t WHERE a IS NULL", "IS"),
            ("SELECT a FROM (SELECT a FROM t)", "subquery"),
            ("SELECT a FROM t WHERE a = (SELECT 1 FROM t)", "subquery"),
            ("SELECT a FROM t LEFT JOIN u ON t.a = u.a", "LEFT JOIN"),
            ("SELECT a + 1 FROM t", "arithmetic"),
            ("SELECT a FROM t UNION SELECT a FROM u", "UNION"),
            ("SELECT lower(a) FROM t", "function lower"),
            ("SELECT CASE WHEN a THEN 1 END FROM t", "CASE"),
            ("SELECT a FROM t, u", "comma join"),
        ] {
            match parse(sql) {
                Err(SqlError::Unsupported { feature: f, .. }) => assert_eq!(f, feature, "{sql}"),
                other => panic!("{sql}: {other:?}"),
            }
        }
    }

    #[test]
    fn quoting_and_case() {
        let q = round_trip(
            "select \"Time ( ET )\" as \"t\", Week from \"Table 1\" where Opponent = 'Houston Oilers' and not Week < -3",
        );
        assert_eq!(q.from.name.value(), "Table 1");
        round_trip("SELECT COUNT(*) AS n FROM t JOIN u ON t.k = u.k WHERE (a = 1 OR b = 2) AND c <> 'x'");
        round_trip("SELECT a FROM t WHERE a = 1 AND (b = 2 AND c = 3)");
        round_trip("SELECT a FROM t WHERE NOT (a = 1 OR b = 2)");
        round_trip("SELECT \"count\", \"a\"\"b\" FROM t ORDER BY \"count\" ASC, a");
        round_trip("SELECT a FROM t WHERE a = NULL;");
    }

    #[test]
    fn trailing_garbage() {
        assert!(matches!(parse("SELECT a FROM t t2 t3"), Err(SqlError::Syntax { .. })));
        assert!(matches!(parse("SELECT a FROM t LIMIT 1.5"), Err(SqlError::Syntax { .. })));
        assert!(matches!(parse("SELECT a FROM t LIMIT 2 OFFSET 1"), Err(SqlError::Unsupported { .. })));
    }
}
