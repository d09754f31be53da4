//! Scoring/clustering settings, loadable from a `key = value` file.
//!
//! Recognized keys: `cMNS`, `cVAS`, `cCLS`, `cCQS` (reals), `listCap`,
//! `tau` (positive integers). Blank lines and `#` comments are ignored.

use std::path::Path;

use ipweave_core::ScoreCoefficients;

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub coeffs: ScoreCoefficients,
    pub tau: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            coeffs: ScoreCoefficients::default(),
            tau: 3,
        }
    }
}

pub fn parse_settings(text: &str) -> Result<Settings, String> {
    let mut settings = Settings::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected `key = value`", i + 1))?;
        let (key, value) = (key.trim(), value.trim());
        let bad = |what: &str| format!("line {}: {key} needs {what}, got `{value}`", i + 1);
        match key {
            "cMNS" => settings.coeffs.c_mns = value.parse().map_err(|_| bad("a real"))?,
            "cVAS" => settings.coeffs.c_vas = value.parse().map_err(|_| bad("a real"))?,
            "cCLS" => settings.coeffs.c_cls = value.parse().map_err(|_| bad("a real"))?,
            "cCQS" => settings.coeffs.c_cqs = value.parse().map_err(|_| bad("a real"))?,
            "listCap" => {
                settings.coeffs.list_cap = value.parse().map_err(|_| bad("a positive integer"))?
            }
            "tau" => settings.tau = value.parse().map_err(|_| bad("a positive integer"))?,
            _ => return Err(format!("line {}: unknown key `{key}`", i + 1)),
        }
        if key == "listCap" && settings.coeffs.list_cap == 0 {
            return Err(bad("a positive integer"));
        }
        if key == "tau" && settings.tau == 0 {
            return Err(bad("a positive integer"));
        }
    }
    Ok(settings)
}

pub fn load_settings(path: Option<&Path>) -> Result<Settings, String> {
    match path {
        None => Ok(Settings::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| format!("cannot read config {}: {e}", p.display()))?;
            parse_settings(&text).map_err(|e| format!("config {}: {e}", p.display()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_yields_the_defaults() {
        let s = parse_settings("").unwrap();
        assert_eq!(s, Settings::default());
        assert_eq!(s.coeffs.c_cqs, 0.0001);
        assert_eq!(s.coeffs.list_cap, 100);
        assert_eq!(s.tau, 3);
    }

    #[test]
    fn every_key_is_settable_and_comments_ignored() {
        let s = parse_settings(
            "# tuning\n\
             cMNS = 2.0\n\
             cVAS = 0.5\n\
             cCLS = 3\n\
             cCQS = 0.25  # boost cohesion\n\
             listCap = 7\n\
             tau = 1\n",
        )
        .unwrap();
        assert_eq!(s.coeffs.c_mns, 2.0);
        assert_eq!(s.coeffs.c_vas, 0.5);
        assert_eq!(s.coeffs.c_cls, 3.0);
        assert_eq!(s.coeffs.c_cqs, 0.25);
        assert_eq!(s.coeffs.list_cap, 7);
        assert_eq!(s.tau, 1);
    }

    #[test]
    fn unknown_keys_and_bad_values_are_rejected() {
        assert!(parse_settings("cMax = 1\n").is_err());
        assert!(parse_settings("cMNS\n").is_err());
        assert!(parse_settings("cMNS = much\n").is_err());
        assert!(parse_settings("listCap = 0\n").is_err());
        assert!(parse_settings("tau = 0\n").is_err());
        assert!(parse_settings("tau = -1\n").is_err());
    }
}
