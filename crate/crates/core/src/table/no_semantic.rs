//! Semantics-free lookup tables: rows and columns named by unrelated words,
//! cells filled with uniformly drawn words.

use rand::seq::index::sample;
use rand::Rng;
use thiserror::Error;

use super::Table;
use crate::seed::stream_rng;

/// Header of the row-name column.
pub const CORNER_HEADER: &str = "#";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NoSemanticError {
    #[error("need at least 2 rows and 2 columns, got {rows}x{cols}")]
    TooSmall { rows: usize, cols: usize },
    #[error("word pool has {have} distinct words, need at least {need}")]
    InsufficientPool { have: usize, need: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NoSemanticTask {
    pub table: Table,
    pub question: String,
    pub answer: String,
    pub row_name: String,
    pub column_name: String,
}

/// Build an `n`-row, `m`-column lookup table named `Table 1`.
pub fn generate_no_semantic(
    n: usize,
    m: usize,
    word_pool: &[String],
    rng_seed: u64,
) -> Result<NoSemanticTask, NoSemanticError> {
    generate_no_semantic_numbered(n, m, word_pool, rng_seed, 1)
}

/// As [`generate_no_semantic`], naming the table `Table {ordinal}`.
///
/// Column 1 holds the row names; columns `2..=m` are named by distinct
/// words. Row names are distinct too, so every (row, column) question has
/// exactly one answer.
pub fn generate_no_semantic_numbered(
    n: usize,
    m: usize,
    word_pool: &[String],
    rng_seed: u64,
    ordinal: usize,
) -> Result<NoSemanticTask, NoSemanticError> {
    if n < 2 || m < 2 {
        return Err(NoSemanticError::TooSmall { rows: n, cols: m });
    }
    // Distinct ignoring case: the SQL store resolves names case-insensitively.
    let mut words: Vec<&str> = Vec::new();
    for w in word_pool {
        let w = w.trim();
        if !w.is_empty() && w != CORNER_HEADER && !words.iter().any(|x| x.eq_ignore_ascii_case(w)) {
            words.push(w);
        }
    }
    let need = n.max(m - 1);
    if words.len() < need {
        return Err(NoSemanticError::InsufficientPool {
            have: words.len(),
            need,
        });
    }
    let mut rng = stream_rng(rng_seed, "no-semantic", ordinal as u64);
    let col_names: Vec<String> = sample(&mut rng, words.len(), m - 1)
        .into_iter()
        .map(|i| words[i].to_string())
        .collect();
    let row_names: Vec<String> = sample(&mut rng, words.len(), n)
        .into_iter()
        .map(|i| words[i].to_string())
        .collect();
    let mut headers = vec![CORNER_HEADER.to_string()];
    headers.extend(col_names.iter().cloned());
    let rows: Vec<Vec<String>> = row_names
        .iter()
        .map(|name| {
            let mut row = vec![name.clone()];
            row.extend((1..m).map(|_| words[rng.random_range(0..words.len())].to_string()));
            row
        })
        .collect();
    let r = rng.random_range(0..n);
    let c = rng.random_range(1..m);
    let answer = rows[r][c].clone();
    let table = Table::new(format!("Table {ordinal}"), headers, rows)
        .expect("generated grid is rectangular with non-empty headers");
    Ok(NoSemanticTask {
        question: lookup_question(&row_names[r], &col_names[c - 1], ordinal),
        answer,
        row_name: row_names[r].clone(),
        column_name: col_names[c - 1].clone(),
        table,
    })
}

pub(crate) fn lookup_question(row: &str, column: &str, ordinal: usize) -> String {
    format!(
        "What is the element in row \"{row}\" and column \"{column}\" in Table {ordinal}?\n\n\
         Note: The first row contains column names, and the first column contains row names.\n\n\
         Only output the answer, do not output any other irrelevant content."
    )
}

const WORDS: &str = "number top they which Population Tubby for account behalf four igneous \
35th The meant the was many grabbed when Nine September work local that Players recorded \
cites paraboloid Caribbean hardhitting town protein Though produced Kepler school supported \
1972 University complementary dramas tracked drove approved impedance Morrison probably takes \
unbearably city led people are Proudhon declining Beta his were According God large Benson \
1812 very Lafayette Vespers 1970 those Production second Strings nonprofit their next receiver \
Coast Business Moskin Street airports grandfather meets quiet considerably million use 2010 \
born Philadelphia Awards one best Summer close days shared afraid city They hand prohibitions \
from pogrom housing changing later Hockey and two volumes disgust walking case Bank but \
continued introduced Christian games episodes played largely golf Yelena history Engineers \
Central Ignition Clarence Stamp Silverbelles provider proof with record President world \
Winning travel 1997 however State After Local adolescents online North Moses August himself \
whose causing English sales fort there Government Even Diane stages role than Glen assumed \
1300 Bolton 2014 uses data rarely doing productivity leads subdivided into research Day \
opening Marx working Bastam Super transformed who His Chicago had Gaddafi participant live \
after applications greater disqualified designing river lantern copper meadow signal harbor \
orbit velvet crystal thunder pepper marble falcon engine garden winter silver basket ladder \
window candle forest rocket violin island canyon bridge parcel tunnel mirror anchor saddle \
feather journal compass blanket pebble willow orchard glacier";

/// A few hundred unrelated words for semantics-free tables.
pub fn default_word_pool() -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for w in WORDS.split_whitespace() {
        if !out.iter().any(|x| x.eq_ignore_ascii_case(w)) {
            out.push(w.to_string());
        }
    }
    out
}
