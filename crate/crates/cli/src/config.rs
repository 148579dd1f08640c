//! key=value configuration file support.
//!
//! The file is plain text, one `key = value` pair per line; `#` starts a
//! comment. Recognised keys: `bisect_tol`, `jobs`, `gabriel_n`,
//! `sdp_max_iterations`. Command-line flags override config values.

use std::path::Path;

use cvgme::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct Config {
    pub bisect_tol: Option<f64>,
    pub jobs: Option<usize>,
    pub gabriel_n: Option<usize>,
    pub sdp_max_iterations: Option<usize>,
}

impl Config {
    /// Loads from the explicit path if given, otherwise from the file named
    /// by GME_ACTIVATE_CONFIG, otherwise returns defaults.
    pub fn load(explicit: Option<&Path>) -> Result<Config> {
        let path = match explicit {
            Some(p) => Some(p.to_path_buf()),
            None => std::env::var_os("GME_ACTIVATE_CONFIG").map(Into::into),
        };
        let Some(path) = path else {
            return Ok(Config::default());
        };
        let text = std::fs::read_to_string(&path).map_err(|e| {
            Error::Usage(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Config> {
        let mut config = Config::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Usage(format!("config line {}: expected key = value", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |what: &str| {
                Error::Usage(format!(
                    "config line {}: {key} expects {what}, got '{value}'",
                    lineno + 1
                ))
            };
            match key {
                "bisect_tol" => {
                    let v: f64 = value.parse().map_err(|_| bad("a real number"))?;
                    if !(v > 0.0) {
                        return Err(bad("a positive tolerance"));
                    }
                    config.bisect_tol = Some(v);
                }
                "jobs" => config.jobs = Some(value.parse().map_err(|_| bad("an integer"))?),
                "gabriel_n" => {
                    config.gabriel_n = Some(value.parse().map_err(|_| bad("an integer"))?)
                }
                "sdp_max_iterations" => {
                    config.sdp_max_iterations =
                        Some(value.parse().map_err(|_| bad("an integer"))?)
                }
                _ => return Err(Error::Usage(format!("unknown config key '{key}'"))),
            }
        }
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_ignores_comments() {
        let c = Config::parse("# comment\nbisect_tol = 1e-7\njobs=4 # trailing\n\n").unwrap();
        assert_eq!(c.bisect_tol, Some(1e-7));
        assert_eq!(c.jobs, Some(4));
        assert_eq!(c.gabriel_n, None);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(Config::parse("cutoff = 7").is_err());
        assert!(Config::parse("jobs four").is_err());
        assert!(Config::parse("bisect_tol = -1").is_err());
    }
}
