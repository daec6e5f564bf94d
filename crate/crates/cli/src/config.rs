//! Experiment config files: TOML by default, JSON for `.json` paths.

use std::fmt;
use std::path::Path;

use apsim_core::protocols::ExperimentConfig;
use apsim_core::Error as CoreError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Toml,
    Json,
}

impl Format {
    pub fn of(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Toml,
        }
    }
}

/// A config problem located by key path and, when known, source line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub file: Option<String>,
    pub key: String,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(file) = &self.file {
            write!(f, "{file}:")?;
            if let Some(l) = self.line {
                write!(f, "{l}:")?;
            }
            f.write_str(" ")?;
        } else if let Some(l) = self.line {
            write!(f, "line {l}: ")?;
        }
        if self.key.is_empty() {
            f.write_str(&self.message)
        } else {
            write!(f, "`{}`: {}", self.key, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Best-effort source line of a dotted key path such as `source.chi` or
/// `settings[2].theta`.
pub fn locate(text: &str, key: &str) -> Option<usize> {
    let lines: Vec<&str> = text.lines().collect();
    let mut cursor = 0usize;
    let mut found = None;
    for seg in key.split('.').filter(|s| !s.is_empty()) {
        let (name, index) = match seg.split_once('[') {
            Some((n, rest)) => (n, rest.trim_end_matches(']').parse::<usize>().ok()),
            None => (seg, None),
        };
        let matches = |l: &str| {
            let t = l.trim_start();
            let bare = t.strip_prefix(name).is_some_and(|r| r.trim_start().starts_with('='));
            let quoted = t.starts_with(&format!("\"{name}\"")) || t.contains(&format!("\"{name}\":"));
            let header = t.starts_with('[') && {
                let h = t.trim_start_matches('[').split(']').next().unwrap_or("");
                h == name || h.ends_with(&format!(".{name}"))
            };
            bare || quoted || header
        };
        let mut hits = (cursor..lines.len()).filter(|&i| matches(lines[i]));
        let first = hits.next()?;
        let mut at = first;
        if let Some(i) = index {
            let tables: Vec<usize> = std::iter::once(first)
                .chain(hits)
                .filter(|&j| lines[j].trim_start().starts_with("[["))
                .collect();
            if let Some(&j) = tables.get(i) {
                at = j;
            }
        }
        cursor = at + 1;
        found = Some(at + 1);
    }
    found
}

fn from_core(text: &str, e: CoreError) -> ConfigError {
    match e {
        CoreError::Invalid { path, reason } => ConfigError {
            file: None,
            line: locate(text, &path),
            key: path,
            message: reason,
        },
        other => ConfigError {
            file: None,
            key: String::new(),
            line: None,
            message: other.to_string(),
        },
    }
}

/// Deserializes without resolving defaults or validating ranges.
pub fn parse_raw(text: &str, format: Format) -> Result<ExperimentConfig, ConfigError> {
    match format {
        Format::Toml => {
            let de = toml::Deserializer::parse(text).map_err(|e| ConfigError {
                file: None,
                key: String::new(),
                line: e.span().map(|s| line_of(text, s.start)),
                message: e.message().to_string(),
            })?;
            serde_path_to_error::deserialize(de).map_err(|e| {
                let key = e.path().to_string();
                let inner = e.into_inner();
                ConfigError {
                    line: inner.span().map(|s| line_of(text, s.start)).or_else(|| locate(text, &key)),
                    file: None,
                    key: if key == "." { String::new() } else { key },
                    message: inner.message().to_string(),
                }
            })
        }
        Format::Json => {
            let mut de = serde_json::Deserializer::from_str(text);
            serde_path_to_error::deserialize(&mut de).map_err(|e| {
                let key = e.path().to_string();
                let inner = e.into_inner();
                ConfigError {
                    line: Some(inner.line()).filter(|&l| l > 0),
                    file: None,
                    key: if key == "." { String::new() } else { key },
                    message: inner.to_string(),
                }
            })
        }
    }
}

/// Resolves protocol defaults and validates, locating failures in `text`.
pub fn resolve(mut cfg: ExperimentConfig, text: &str) -> Result<ExperimentConfig, ConfigError> {
    cfg.resolve().map_err(|e| from_core(text, e))?;
    Ok(cfg)
}

/// Parses and fully validates `text`.
pub fn parse_str(text: &str, format: Format) -> Result<ExperimentConfig, ConfigError> {
    resolve(parse_raw(text, format)?, text)
}

fn read(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|e| ConfigError {
        file: Some(path.display().to_string()),
        key: String::new(),
        line: None,
        message: e.to_string(),
    })
}

fn with_file(path: &Path) -> impl Fn(ConfigError) -> ConfigError + '_ {
    move |mut e| {
        e.file = Some(path.display().to_string());
        e
    }
}

/// Reads and validates a config file with defaults applied.
pub fn parse_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = read(path)?;
    parse_str(&text, Format::of(path)).map_err(with_file(path))
}

/// Reads a config file without resolving it, returning the text as well
/// so later validation errors can be located.
pub fn load_raw(path: &Path) -> Result<(ExperimentConfig, String), ConfigError> {
    let text = read(path)?;
    let cfg = parse_raw(&text, Format::of(path)).map_err(with_file(path))?;
    Ok((cfg, text))
}

pub fn to_toml(cfg: &ExperimentConfig) -> String {
    toml::to_string(cfg).expect("configs serialize to TOML")
}

pub fn to_json(cfg: &ExperimentConfig) -> String {
    serde_json::to_string_pretty(cfg).expect("configs serialize to JSON")
}

#[cfg(test)]
mod tests {
    use super::*;
    use apsim_core::protocols::Protocol;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_str("protocol = \"pair\"\n", Format::Toml).unwrap();
        assert_eq!(c.source.chi, 0.014);
        assert_eq!(c.source.field_mg, 200.0);
        assert_eq!(c.detectors.efficiency, 0.30);
        assert_eq!(c.source.retrieval_eff.a1, 0.20);
        assert_eq!(c.settings.len(), 8);
    }

    #[test]
    fn negative_chi_names_key_and_line() {
        let text = "protocol = \"pair\"\n\n[source]\nchi = -1.0\n";
        let e = parse_str(text, Format::Toml).unwrap_err();
        assert_eq!(e.key, "source.chi");
        assert_eq!(e.line, Some(4));
    }

    #[test]
    fn unknown_key_rejected_with_line() {
        let text = "protocol = \"pair\"\n[detectors]\nefficiency = 0.3\nquantum = 1\n";
        let e = parse_str(text, Format::Toml).unwrap_err();
        assert!(e.message.contains("quantum"), "{e}");
        assert_eq!(e.line, Some(4));
        assert_eq!(e.key, "detectors.quantum");
    }

    #[test]
    fn json_errors_carry_lines() {
        let text = "{\n  \"protocol\": \"swap\",\n  \"seed\": \"x\"\n}";
        let e = parse_str(text, Format::Json).unwrap_err();
        assert_eq!(e.key, "seed");
        assert_eq!(e.line, Some(3));
    }

    #[test]
    fn table_of_settings_located() {
        let text = "protocol = \"swap\"\n\n[[settings]]\nmode = \"AS1\"\ntheta = 0.0\n\n[[settings]]\nmode = \"AS1\"\ntheta = 400.0\n";
        let e = parse_str(text, Format::Toml).unwrap_err();
        assert_eq!(e.key, "settings[1].theta");
        assert_eq!(e.line, Some(9));
    }

    #[test]
    fn round_trip_toml_and_json() {
        for p in [Protocol::Pair, Protocol::Ghz3, Protocol::Swap] {
            let c = ExperimentConfig::new(p);
            assert_eq!(parse_str(&to_toml(&c), Format::Toml).unwrap(), c);
            assert_eq!(parse_str(&to_json(&c), Format::Json).unwrap(), c);
        }
    }
}
