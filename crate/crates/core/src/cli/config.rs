//! Pipeline config file.
//!
//! ```toml
//! seed = 7
//! count = 1000
//!
//! [corpus]
//! manifests = ["corpus/manifest.toml"]
//!
//! [mix]
//! precise_retrieval = 1.0
//! multi_hop = 1.0
//! grounding = 1.0
//!
//! [difficulty]
//! cell_bucket = "medium"
//! table_count = { min = 1, max = 30 }
//! target_tokens = 4096
//!
//! [render]
//! variants = ["canonical-markdown", "noise-injected"]
//! noise_rate = 0.1
//!
//! [filter]
//! solver = "coin"
//! attempts = 8
//!
//! [output]
//! export = "out/export.jsonl"
//! retained = "out/retained.jsonl"
//! audit = "out/audit.jsonl"
//! ```
//!
//! Relative paths resolve against the config file's directory. Every
//! section and key is optional.

use std::path::{Component, Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::synth::{DifficultyConfig, DimensionMix, SynthConfig};
use crate::table::RenderVariant;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Root seed for every stage.
    pub seed: u64,
    /// Instances to synthesize.
    pub count: u64,
    pub corpus: CorpusConfig,
    pub mix: DimensionMix,
    pub difficulty: DifficultyConfig,
    pub render: RenderConfig,
    /// Question rewriter command line.
    pub rewriter: Option<String>,
    pub rewriter_timeout_secs: f64,
    pub max_retries: u32,
    pub filter: FilterConfig,
    pub output: OutputConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            count: 100,
            corpus: CorpusConfig::default(),
            mix: DimensionMix::default(),
            difficulty: DifficultyConfig::default(),
            render: RenderConfig::default(),
            rewriter: None,
            rewriter_timeout_secs: 30.0,
            max_retries: SynthConfig::default().max_retries,
            filter: FilterConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusConfig {
    pub manifests: Vec<PathBuf>,
    /// Generated corpus used when no manifest is given.
    pub demo: Option<DemoConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemoConfig {
    pub count: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenderConfig {
    pub variants: Vec<RenderVariant>,
    pub noise_rate: f64,
    pub noise_corpus: Vec<String>,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            variants: vec![RenderVariant::CanonicalMarkdown],
            noise_rate: 0.1,
            noise_corpus: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterConfig {
    /// Built-in stub: oracle, wrong or coin.
    pub solver: Option<String>,
    /// External solver command line.
    pub command: Option<String>,
    pub attempts: u32,
    pub timeout_secs: Option<f64>,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            solver: None,
            command: None,
            attempts: crate::filter::DEFAULT_ATTEMPTS,
            timeout_secs: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub export: Option<PathBuf>,
    pub retained: Option<PathBuf>,
    pub audit: Option<PathBuf>,
}

impl PipelineConfig {
    /// Parse TOML, resolving relative paths against `base`.
    pub fn from_toml(text: &str, base: &Path) -> Result<Self, CliError> {
        let mut c: Self = toml::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))?;
        c.resolve_paths(base);
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn load_or_default(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            Some(p) => Self::load(p),
            None => Ok(Self::default()),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        self.corpus.manifests.iter_mut().for_each(fix);
        for p in [&mut self.output.export, &mut self.output.retained, &mut self.output.audit]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
    }

    /// Check weights, synthesis settings and path distinctness.
    pub fn validate(&self) -> Result<(), CliError> {
        self.mix.validate()?;
        self.synth_config()?.validate()?;
        if self.filter.attempts == 0 {
            return Err(CliError::Usage("filter.attempts must be at least 1".into()));
        }
        if let Some(t) = self.filter.timeout_secs {
            if !(t.is_finite() && t > 0.0) {
                return Err(CliError::Usage(format!("filter.timeout_secs {t} must be positive")));
            }
        }
        let mut paths: Vec<(&str, &Path)> = self.corpus.manifests.iter().map(|p| ("corpus manifest", p.as_path())).collect();
        for (label, p) in [
            ("output.export", &self.output.export),
            ("output.retained", &self.output.retained),
            ("output.audit", &self.output.audit),
        ] {
            if let Some(p) = p {
                paths.push((label, p.as_path()));
            }
        }
        for (i, (la, a)) in paths.iter().enumerate() {
            for (lb, b) in &paths[i + 1..] {
                if normalize(a) == normalize(b) {
                    return Err(CliError::Usage(format!(
                        "{la} and {lb} both point at {}",
                        a.display()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn synth_config(&self) -> Result<SynthConfig, CliError> {
        let rewriter = self
            .rewriter
            .as_deref()
            .map(|line| crate::external::ExternalCommand::from_line(line, self.rewriter_timeout_secs));
        Ok(SynthConfig {
            difficulty: self.difficulty.clone(),
            variants: self.render.variants.clone(),
            noise_rate: self.render.noise_rate,
            noise_corpus: self.render.noise_corpus.clone(),
            max_retries: self.max_retries,
            rewriter,
        })
    }
}

/// Lexical normalization: absolute, with `.` and `..` folded.
fn normalize(p: &Path) -> PathBuf {
    let abs = std::path::absolute(p).unwrap_or_else(|_| p.to_path_buf());
    let mut out = PathBuf::new();
    for c in abs.components() {
        match c {
            Component::CurDir => {}
            Component::ParentDir => {
                out.pop();
            }
            other => out.push(other),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::CellBucket;

    #[test]
    fn empty_config_is_default() {
        let c = PipelineConfig::from_toml("", Path::new("/x")).unwrap();
        assert_eq!(c, PipelineConfig::default());
        assert!(c.validate().is_ok());
    }

    #[test]
    fn documented_example_parses() {
        let text = include_str!("config.rs")
            .lines()
            .skip_while(|l| !l.starts_with("//! ```toml"))
            .skip(1)
            .take_while(|l| !l.starts_with("//! ```"))
            .map(|l| l.trim_start_matches("//!").trim_start())
            .collect::<Vec<_>>()
            .join("\n");
        let c = PipelineConfig::from_toml(&text, Path::new("/base")).unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.difficulty.cell_bucket, CellBucket::Medium);
        assert_eq!(c.corpus.manifests, vec![PathBuf::from("/base/corpus/manifest.toml")]);
        assert_eq!(c.render.variants.len(), 2);
        assert!(c.validate().is_ok());
        let again = PipelineConfig::from_toml(&c.to_toml(), Path::new("/elsewhere")).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn rejects_bad_weights_and_shared_paths() {
        let c = PipelineConfig::from_toml("[mix]\nprecise_retrieval = 0\nmulti_hop = 0\ngrounding = 0", Path::new("/"))
            .unwrap();
        assert!(matches!(c.validate(), Err(CliError::Usage(_))));
        let c = PipelineConfig::from_toml(
            "[output]\nexport = \"a/out.jsonl\"\nretained = \"a/./b/../out.jsonl\"",
            Path::new("/w"),
        )
        .unwrap();
        assert!(matches!(c.validate(), Err(CliError::Usage(_))));
        assert!(PipelineConfig::from_toml("bogus = 1", Path::new("/")).is_err());
    }
}
