//! Table corpora: manifests on disk and a seeded demo generator.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::SynthError;
use crate::seed::stream_rng;
use crate::table::{load_table_file, Table};

/// A named set of tables. Names are unique ignoring ASCII case, matching
/// how the SQL store resolves relations.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    tables: Vec<Table>,
}

impl Corpus {
    pub fn new(tables: Vec<Table>) -> Result<Self, SynthError> {
        if tables.is_empty() {
            return Err(SynthError::EmptyCorpus);
        }
        let mut seen = BTreeSet::new();
        for t in &tables {
            if !seen.insert(t.name().to_ascii_lowercase()) {
                return Err(SynthError::DuplicateTable(t.name().to_string()));
            }
        }
        Ok(Self { tables })
    }

    pub fn tables(&self) -> &[Table] {
        &self.tables
    }

    pub fn get(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name().eq_ignore_ascii_case(name))
    }

    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }

    /// SHA-256 over names, headers and cells, hex encoded.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for t in &self.tables {
            for field in std::iter::once(t.name())
                .chain(t.headers().iter().map(String::as_str))
                .chain(t.rows().iter().flatten().map(String::as_str))
            {
                h.update((field.len() as u64).to_le_bytes());
                h.update(field.as_bytes());
            }
            h.update([0xff]);
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn from_manifest(path: &Path) -> Result<Self, SynthError> {
        let manifest = Manifest::load(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mut tables = Vec::with_capacity(manifest.tables.len());
        for e in &manifest.tables {
            let t = load_table_file(&base.join(&e.path))?;
            tables.push(
                t.with_name(e.name.clone())
                    .map_err(|err| SynthError::Manifest(format!("{}: {err}", e.name)))?,
            );
        }
        Self::new(tables)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    /// Relative to the manifest's directory.
    pub path: PathBuf,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tags: Vec<String>,
}

/// `[[table]]` entries in TOML.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    #[serde(rename = "table", default)]
    pub tables: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn from_toml(text: &str) -> Result<Self, SynthError> {
        toml::from_str(text).map_err(|e| SynthError::Manifest(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest serializes")
    }

    pub fn load(path: &Path) -> Result<Self, SynthError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SynthError::Manifest(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn save(&self, path: &Path) -> Result<(), SynthError> {
        std::fs::write(path, self.to_toml())
            .map_err(|e| SynthError::Manifest(format!("{}: {e}", path.display())))
    }
}

const TEAMS: &[&str] = &[
    "Ashford Owls", "Brindle Rovers", "Calder Town", "Dunmore Athletic", "Eastvale United",
    "Fenwick City", "Garrow Wanderers", "Halden Rangers", "Ivybridge FC", "Jarrow Albion",
    "Kestwick Harriers", "Lowmoor Celtic", "Marwood Dynamo", "Northam Villa", "Oakhurst Saints",
    "Pellow Borough", "Quarry Bank", "Redcliff Rovers", "Stenway Sporting", "Thornby Olympic",
];

const CITIES: &[&str] = &[
    "Ashford", "Brindle", "Calder", "Dunmore", "Eastvale", "Fenwick", "Garrow", "Halden",
    "Ivybridge", "Jarrow", "Kestwick", "Lowmoor", "Marwood", "Northam", "Oakhurst", "Pellow",
];

const COUNTRIES: &[&str] = &["Norland", "Westmark", "Sudria", "Ostvale"];

const FIRST: &[&str] = &[
    "Ada", "Bram", "Cleo", "Dov", "Edda", "Finn", "Greta", "Hugo", "Ines", "Jonas", "Kaia", "Lev",
    "Mira", "Nils", "Orla", "Pim", "Rosa", "Sven", "Tove", "Ugo",
];

const LAST: &[&str] = &[
    "Alder", "Birch", "Crane", "Dale", "Ember", "Frost", "Grove", "Holm", "Ibsen", "Juhl", "Kern",
    "Lund", "Moss", "Nord", "Oak", "Pike", "Quist", "Rook", "Stone", "Thorn",
];

const POSITIONS: &[&str] = &["Goalkeeper", "Defender", "Midfielder", "Forward"];
const COMPETITIONS: &[&str] = &["League", "Cup", "Friendly"];

fn row_count<R: Rng + ?Sized>(rng: &mut R) -> usize {
    match rng.random_range(0..20) {
        0..=7 => rng.random_range(4..=12),
        8..=14 => rng.random_range(15..=45),
        _ => rng.random_range(80..=150),
    }
}

/// An integer in `lo..=hi`, or an empty cell with small probability to
/// exercise NULL handling.
fn maybe_blank<R: Rng + ?Sized>(rng: &mut R, lo: i64, hi: i64) -> String {
    let v = rng.random_range(lo..=hi);
    if rng.random::<f64>() < 0.03 {
        String::new()
    } else {
        v.to_string()
    }
}

fn pick<R: Rng + ?Sized>(rng: &mut R, pool: &[&str]) -> String {
    pool.choose(rng).expect("non-empty pool").to_string()
}

fn h(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

/// A fictional sports league. Table kinds share `Team`, `City` and `Stadium`
/// columns so grounding tasks can join them.
pub fn demo_corpus(seed: u64, count: usize) -> Corpus {
    let mut tables = Vec::with_capacity(count);
    for i in 0..count {
        let mut rng = stream_rng(seed, "demo-table", i as u64);
        let n = row_count(&mut rng);
        let kind = i % 5;
        let (name, headers, rows): (String, Vec<String>, Vec<Vec<String>>) = match kind {
            0 => {
                let rows = (0..n)
                    .map(|_| {
                        vec![
                            format!("{} {}", pick(&mut rng, FIRST), pick(&mut rng, LAST)),
                            pick(&mut rng, TEAMS),
                            pick(&mut rng, POSITIONS),
                            maybe_blank(&mut rng, 0, 30),
                            rng.random_range(17..=38).to_string(),
                        ]
                    })
                    .collect();
                (format!("players_{i}"), h(&["Player", "Team", "Position", "Goals", "Age"]), rows)
            }
            1 => {
                let rows = (0..n)
                    .map(|_| {
                        vec![
                            pick(&mut rng, TEAMS),
                            pick(&mut rng, CITIES),
                            rng.random_range(1880..=2005).to_string(),
                            format!("{} {}", pick(&mut rng, FIRST), pick(&mut rng, LAST)),
                        ]
                    })
                    .collect();
                (format!("teams_{i}"), h(&["Team", "City", "Founded", "Coach"]), rows)
            }
            2 => {
                let rows = (0..n)
                    .map(|_| {
                        vec![
                            format!(
                                "2023-{:02}-{:02}",
                                rng.random_range(1..=12),
                                rng.random_range(1..=28)
                            ),
                            pick(&mut rng, TEAMS),
                            pick(&mut rng, TEAMS),
                            format!("{}–{}", rng.random_range(0..=5), rng.random_range(0..=5)),
                            pick(&mut rng, COMPETITIONS),
                            maybe_blank(&mut rng, 800, 42_000),
                        ]
                    })
                    .collect();
                (
                    format!("matches_{i}"),
                    h(&["Date", "Team", "Opponent", "Score", "Competition", "Attendance"]),
                    rows,
                )
            }
            3 => {
                let rows = (0..n)
                    .map(|_| {
                        vec![
                            pick(&mut rng, CITIES),
                            pick(&mut rng, COUNTRIES),
                            rng.random_range(8_000..=900_000).to_string(),
                            format!("{:.1}", rng.random_range(20.0..400.0)),
                        ]
                    })
                    .collect();
                (format!("cities_{i}"), h(&["City", "Country", "Population", "Area"]), rows)
            }
            _ => {
                let rows = (0..n)
                    .map(|_| {
                        let city = pick(&mut rng, CITIES);
                        vec![
                            format!("{city} {}", pick(&mut rng, &["Park", "Arena", "Ground", "Field"])),
                            city,
                            maybe_blank(&mut rng, 2_000, 60_000),
                            rng.random_range(1900..=2020).to_string(),
                        ]
                    })
                    .collect();
                (format!("stadiums_{i}"), h(&["Stadium", "City", "Capacity", "Opened"]), rows)
            }
        };
        tables.push(Table::new(name, headers, rows).expect("generated tables are rectangular"));
    }
    Corpus::new(tables).expect("demo names are distinct and count > 0")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn demo_is_deterministic() {
        assert_eq!(demo_corpus(1, 12), demo_corpus(1, 12));
        assert_ne!(demo_corpus(1, 12).digest(), demo_corpus(2, 12).digest());
    }

    #[test]
    fn duplicate_names_rejected() {
        let t = demo_corpus(1, 1).tables()[0].clone();
        let u = t.clone().with_name(t.name().to_uppercase()).unwrap();
        assert!(matches!(Corpus::new(vec![t, u]), Err(SynthError::DuplicateTable(_))));
        assert_eq!(Corpus::new(vec![]), Err(SynthError::EmptyCorpus));
    }

    #[test]
    fn manifest_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let corpus = demo_corpus(9, 3);
        let mut manifest = Manifest::default();
        for t in corpus.tables() {
            let file = format!("{}.md", t.name());
            let body = format!("{}\n", crate::table::markdown_block(t));
            std::fs::write(dir.path().join(&file), body).unwrap();
            manifest.tables.push(ManifestEntry {
                name: t.name().to_string(),
                path: file.into(),
                tags: vec!["demo".into()],
            });
        }
        let path = dir.path().join("manifest.toml");
        manifest.save(&path).unwrap();
        assert_eq!(Manifest::load(&path).unwrap(), manifest);
        let loaded = Corpus::from_manifest(&path).unwrap();
        assert_eq!(loaded.digest(), corpus.digest());
    }
}
