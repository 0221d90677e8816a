//! Pipe-table primitives shared by table ingestion, result serialization and
//! answer verification.

/// Escape a cell for a pipe row. Pipes are the only cell delimiter, so they
/// are backslash-escaped; line breaks collapse to spaces.
pub fn escape_cell(cell: &str) -> String {
    let mut out = String::with_capacity(cell.len());
    for ch in cell.chars() {
        match ch {
            '|' => out.push_str("\\|"),
            '\n' | '\r' => out.push(' '),
            _ => out.push(ch),
        }
    }
    out
}

/// `| a | b |`
pub fn format_row<S: AsRef<str>>(cells: &[S]) -> String {
    let mut line = String::from("|");
    for cell in cells {
        line.push(' ');
        line.push_str(&escape_cell(cell.as_ref()));
        line.push_str(" |");
    }
    line
}

/// `| --- | --- |`
pub fn separator_row(width: usize) -> String {
    let mut line = String::from("|");
    for _ in 0..width {
        line.push_str(" --- |");
    }
    line
}

/// Split a pipe row into trimmed, unescaped cells. Returns `None` when the
/// line does not start with a pipe.
pub fn split_row(line: &str) -> Option<Vec<String>> {
    let line = line.trim();
    let body = line.strip_prefix('|')?;
    let mut cells = Vec::new();
    let mut current = String::new();
    let mut chars = body.chars().peekable();
    let mut closed = false;
    while let Some(ch) = chars.next() {
        match ch {
            '\\' if chars.peek() == Some(&'|') => {
                current.push('|');
                chars.next();
            }
            '|' => {
                cells.push(current.trim().to_string());
                current.clear();
                closed = true;
            }
            _ => {
                current.push(ch);
                closed = false;
            }
        }
    }
    // A row without a trailing pipe still carries its last cell.
    if !closed || cells.is_empty() {
        let last = current.trim();
        if !last.is_empty() || cells.is_empty() {
            cells.push(last.to_string());
        }
    }
    Some(cells)
}

/// True for `| --- | :-: |` style rows.
pub fn is_separator(cells: &[String]) -> bool {
    !cells.is_empty()
        && cells.iter().all(|c| {
            let inner = c.trim().trim_start_matches(':').trim_end_matches(':');
            !inner.is_empty() && inner.chars().all(|ch| ch == '-')
        })
}

/// A parsed pipe table: header cells followed by body rows. Title lines and
/// other prose before the table are skipped; parsing stops at the first
/// non-pipe line after the table has started.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipeTable {
    pub title: Option<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

pub fn parse_pipe_tables(text: &str) -> Vec<PipeTable> {
    let lines: Vec<&str> = text.lines().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let mut last_prose: Option<String> = None;
    while i < lines.len() {
        let Some(header) = split_row(lines[i]) else {
            let trimmed = lines[i].trim();
            if !trimmed.is_empty() {
                last_prose = Some(trimmed.trim_end_matches(':').trim().to_string());
            }
            i += 1;
            continue;
        };
        let sep = lines.get(i + 1).and_then(|l| split_row(l));
        match sep {
            Some(sep) if is_separator(&sep) => {
                let mut rows = Vec::new();
                let mut j = i + 2;
                while j < lines.len() {
                    match split_row(lines[j]) {
                        Some(cells) => rows.push(cells),
                        None => break,
                    }
                    j += 1;
                }
                out.push(PipeTable {
                    title: last_prose.take(),
                    header,
                    rows,
                });
                i = j;
            }
            _ => i += 1,
        }
    }
    out
}
