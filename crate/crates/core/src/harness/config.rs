use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};

/// Keys accepted in a `--config` TOML file. Names match the long command-line
/// options (with `_` for `-`); options given on the command line win.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub grid: Option<usize>,
    pub out: Option<String>,
    pub kind: Option<String>,
    pub a: Option<f64>,
    pub n: Option<usize>,
    pub burnin: Option<usize>,
    pub rho: Option<String>,
    pub rho_diag: Option<Vec<f64>>,
    pub noise_eigenvalues: Option<Vec<f64>>,
    #[serde(rename = "in")]
    pub input: Option<String>,
    pub lags: Option<Vec<usize>>,
    pub center: Option<bool>,
    pub scheme: Option<String>,
    pub candidates: Option<Vec<String>>,
    pub origin: Option<f64>,
    pub reps: Option<usize>,
    pub level: Option<f64>,
    pub batch: Option<usize>,
    pub dirs: Option<usize>,
    pub target: Option<String>,
    pub cutoff: Option<usize>,
    pub schedule_c: Option<f64>,
    pub model: Option<String>,
    pub x: Option<String>,
    pub data: Option<String>,
    pub smoothing: Option<String>,
    pub penalties: Option<Vec<f64>>,
    pub selection_scheme: Option<String>,
    pub test_year: Option<i32>,
}

/// 1-based line and column of byte offset `pos`.
fn line_col(text: &str, pos: usize) -> (usize, usize) {
    let before = &text[..pos.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, col)
}

pub fn parse_config(text: &str, origin: &str) -> Result<FileConfig> {
    toml::from_str(text).map_err(|e| {
        let msg = e.message().trim().to_string();
        match e.span() {
            Some(span) => {
                let (line, col) = line_col(text, span.start);
                Error::Config(format!("{origin}:{line}:{col}: {msg}"))
            }
            None => Error::Config(format!("{origin}: {msg}")),
        }
    })
}

pub fn load_config(path: &Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_known_keys() {
        let c = parse_config("seed = 3\nrho_diag = [0.5, 0.2]\nin = \"x.csv\"\n", "c.toml").unwrap();
        assert_eq!(c.seed, Some(3));
        assert_eq!(c.rho_diag, Some(vec![0.5, 0.2]));
        assert_eq!(c.input.as_deref(), Some("x.csv"));
    }

    #[test]
    fn errors_name_the_line() {
        let err = parse_config("seed = 3\n\nn = \"many\"\n", "c.toml").unwrap_err().to_string();
        assert!(err.contains("c.toml:3:"), "{err}");
        let err = parse_config("seed = 1\nbogus = 2\n", "c.toml").unwrap_err().to_string();
        assert!(err.contains("c.toml:2:") && err.contains("bogus"), "{err}");
        let err = parse_config("seed = = 1\n", "c.toml").unwrap_err().to_string();
        assert!(err.contains("c.toml:1:"), "{err}");
    }
}
