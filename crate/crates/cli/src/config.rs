use std::path::PathBuf;

use serde::Serialize;
use thetapair::{Method, Seed, SinhArcsinhParams, DEFAULT_REPLICATES};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Input(PathBuf),
    /// Draw a fresh sample of size `n`.
    Simulate {
        params: SinhArcsinhParams,
        n: usize,
    },
}

/// Everything an `estimate` run depends on.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub source: DataSource,
    pub methods: Vec<Method>,
    pub replicates: usize,
    pub level: f64,
    pub seed: Seed,
    pub format: OutputFormat,
    pub export_dir: Option<PathBuf>,
    pub out: Option<PathBuf>,
    /// Worker threads for resampling; `None` uses every core.
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn new(source: DataSource) -> Self {
        Self {
            source,
            methods: Method::ALL.to_vec(),
            replicates: DEFAULT_REPLICATES,
            level: 0.95,
            seed: Seed(1),
            format: OutputFormat::Text,
            export_dir: None,
            out: None,
            threads: None,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(CliError::Usage(format!(
                "--level must lie in (0, 1), got {}",
                self.level
            )));
        }
        if self.replicates == 0 {
            return Err(CliError::Usage("--B must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(CliError::Usage("select at least one estimator".into()));
        }
        if self.threads == Some(0) {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        if let DataSource::Simulate { params, n } = &self.source {
            params.validate().map_err(|e| CliError::Usage(e.to_string()))?;
            if *n < 2 {
                return Err(CliError::Usage("--n must be at least 2".into()));
            }
        }
        Ok(())
    }
}

/// Parses a comma-separated estimator list such as `ecdf,kernel1d`; `all`
/// selects every method.
pub fn parse_methods(list: &str) -> Result<Vec<Method>, CliError> {
    let mut methods = Vec::new();
    for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if name.eq_ignore_ascii_case("all") {
            methods.extend(Method::ALL);
            continue;
        }
        let m = Method::from_slug(name).ok_or_else(|| {
            let known: Vec<&str> = Method::ALL.iter().map(|m| m.slug()).collect();
            CliError::Usage(format!(
                "unknown estimator {name:?}; expected one of {}",
                known.join(", ")
            ))
        })?;
        methods.push(m);
    }
    let mut seen = Vec::new();
    methods.retain(|m| {
        let fresh = !seen.contains(m);
        seen.push(*m);
        fresh
    });
    Ok(methods)
}
