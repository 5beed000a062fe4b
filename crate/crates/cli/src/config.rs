//! Run configuration: built-in defaults, then `KGTRACE_*` environment
//! variables, then the config file, then flags — later sources win.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use kgtrace_core::extraction::ClientConfig;
use kgtrace_core::normalize::PlaceholderSet;
use kgtrace_core::similarity::{MatchMode, DEFAULT_CLUSTER_THRESHOLDS};
use kgtrace_core::Error;

pub const ENV_ENDPOINT: &str = "KGTRACE_ENDPOINT";
pub const ENV_MODEL: &str = "KGTRACE_MODEL";

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub ontology: Option<PathBuf>,
    pub client: ClientConfig,
    pub match_mode: MatchMode,
    /// Default ranking / removal size.
    pub k: usize,
    pub thresholds: Vec<u32>,
    pub placeholders: PlaceholderSet,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            ontology: None,
            client: ClientConfig::default(),
            match_mode: MatchMode::Qualified,
            k: 40,
            thresholds: DEFAULT_CLUSTER_THRESHOLDS.to_vec(),
            placeholders: PlaceholderSet::default(),
            out_dir: PathBuf::from("."),
        }
    }
}

impl RunConfig {
    /// Resolve the effective configuration for this invocation.
    pub fn resolve(
        config_file: Option<&Path>,
        ontology_flag: Option<&Path>,
        match_mode_flag: Option<&str>,
        out_flag: Option<&Path>,
        placeholders_flag: Option<&str>,
    ) -> Result<RunConfig, Error> {
        let mut config = RunConfig::default();

        if let Ok(endpoint) = std::env::var(ENV_ENDPOINT) {
            config.client.endpoint = endpoint;
        }
        if let Ok(model) = std::env::var(ENV_MODEL) {
            config.client.model = model;
        }

        if let Some(path) = config_file {
            config.apply_file(path)?;
        }

        if let Some(path) = ontology_flag {
            config.ontology = Some(path.to_path_buf());
        }
        if let Some(mode) = match_mode_flag {
            config.match_mode = mode.parse()?;
        }
        if let Some(out) = out_flag {
            config.out_dir = out.to_path_buf();
        }
        if let Some(spec) = placeholders_flag {
            config.placeholders = PlaceholderSet::from_comma_list(spec);
        }

        Ok(config)
    }

    fn apply_file(&mut self, path: &Path) -> Result<(), Error> {
        let content = fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read config file {}: {e}", path.display()))
        })?;
        let mut entries = BTreeMap::new();
        for (lineno, raw) in content.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!(
                    "{}:{}: expected key=value",
                    path.display(),
                    lineno + 1
                )));
            };
            entries.insert(key.trim().to_string(), value.trim().to_string());
        }
        for (key, value) in entries {
            self.apply_entry(&key, &value)
                .map_err(|message| Error::Config(format!("{}: {key}: {message}", path.display())))?;
        }
        Ok(())
    }

    fn apply_entry(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn parse<T: std::str::FromStr>(value: &str) -> Result<T, String>
        where
            T::Err: std::fmt::Display,
        {
            value.parse().map_err(|e| format!("bad value `{value}`: {e}"))
        }
        match key {
            "ontology" => self.ontology = Some(PathBuf::from(value)),
            "endpoint" => self.client.endpoint = value.to_string(),
            "model" => self.client.model = value.to_string(),
            "timeout_secs" => self.client.timeout_secs = parse(value)?,
            "max_retries" => self.client.max_retries = parse(value)?,
            "max_concurrent" => self.client.max_concurrent = parse(value)?,
            "temperature" => self.client.temperature = parse(value)?,
            "seed" => {
                self.client.seed = if value.is_empty() {
                    None
                } else {
                    Some(parse(value)?)
                }
            }
            "images_field" => self.client.images_field = value.to_string(),
            "response_field" => self.client.response_field = value.to_string(),
            "match_mode" => self.match_mode = value.parse().map_err(|e| format!("{e}"))?,
            "k" => {
                self.k = parse(value)?;
                if self.k == 0 {
                    return Err("k must be >= 1".into());
                }
            }
            "thresholds" => self.thresholds = parse_thresholds(value)?,
            "placeholders" => self.placeholders = PlaceholderSet::from_comma_list(value),
            "out_dir" => self.out_dir = PathBuf::from(value),
            other => return Err(format!("unknown key `{other}`")),
        }
        Ok(())
    }
}

pub fn parse_thresholds(spec: &str) -> Result<Vec<u32>, String> {
    let mut thresholds = Vec::new();
    for part in spec.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        thresholds.push(
            part.parse::<u32>()
                .map_err(|e| format!("bad threshold `{part}`: {e}"))?,
        );
    }
    if thresholds.is_empty() {
        return Err("no thresholds given".into());
    }
    Ok(thresholds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn file_overrides_defaults_and_flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        let mut file = fs::File::create(&path).unwrap();
        writeln!(file, "# comment\nk = 10\nmatch_mode = value-only\nthresholds = 3,4").unwrap();
        drop(file);

        let config = RunConfig::resolve(Some(&path), None, Some("qualified"), None, None).unwrap();
        assert_eq!(config.k, 10);
        assert_eq!(config.thresholds, vec![3, 4]);
        assert_eq!(config.match_mode, MatchMode::Qualified); // flag wins
    }

    #[test]
    fn unknown_key_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        fs::write(&path, "no_such_key=1\n").unwrap();
        assert!(RunConfig::resolve(Some(&path), None, None, None, None).is_err());
    }

    #[test]
    fn thresholds_parser() {
        assert_eq!(parse_thresholds("5,7").unwrap(), vec![5, 7]);
        assert_eq!(parse_thresholds(" 5 , 7 ,").unwrap(), vec![5, 7]);
        assert!(parse_thresholds("x").is_err());
        assert!(parse_thresholds("").is_err());
    }
}
