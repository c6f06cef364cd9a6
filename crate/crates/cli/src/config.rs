//! Line-based `key = value` run configuration.

use std::collections::BTreeSet;
use std::str::FromStr;

use locdyn::{Error, Result};

/// Keys a subcommand accepts, with their defaults, in echo order.
pub type Schema = &'static [(&'static str, &'static str)];

pub const GAMMA: Schema = &[
    ("name", "default"),
    ("g0", "0.01"),
    ("tau_end", "20"),
    ("dtau", "0.01"),
    ("method", "closed"),
];

pub const STEADY: Schema = &[
    ("name", "default"),
    ("u_max", "30"),
    ("h", "0.01"),
    ("alpha", "0.5"),
    ("tol", "1e-8"),
    ("max_iters", "500"),
    ("deposition", "cell"),
    ("initial", "uexpu"),
];

pub const TRANSIENT: Schema = &[
    ("name", "default"),
    ("u_max", "30"),
    ("h", "0.01"),
    ("g0", "1"),
    ("source", "constant"),
    ("tau_end", "25"),
    ("snapshot_stride", "100"),
    ("deposition", "cell"),
    ("initial", "uexpu"),
    ("tol_mass", "1e-8"),
    ("m_max", "0"),
];

pub const MC_STEADY: Schema = &[
    ("name", "default"),
    ("particles", "200000"),
    ("tau_end", "30"),
    ("seeds", "1"),
    ("snapshot_taus", "30"),
    ("u_max", "30"),
    ("h", "0.05"),
    ("initial", "uexpu"),
    ("ceiling", "1e4"),
    ("checkpoint", "false"),
];

pub const MC_TRANSIENT: Schema = &[
    ("name", "default"),
    ("particles", "200000"),
    ("g0", "0.01"),
    ("tau_end", "10"),
    ("seeds", "1"),
    ("snapshot_taus", "1, 2, 3, 5, 8, 10"),
    ("entrant", "adopt"),
    ("u_max", "30"),
    ("h", "0.05"),
    ("initial", "uexpu"),
    ("ceiling", "1e4"),
    ("checkpoint", "false"),
];

pub const ORACLE: Schema = &[
    ("name", "default"),
    ("xi1_sq", "1"),
    ("xi2_sq", "1"),
    ("boxes", "0.4, 0.2, 0.1, 0.05"),
    ("convention", "diameter"),
    ("quad_points", "256"),
    ("halfwidth", "10"),
    ("tol", "1e-6"),
];

pub const FIG1: Schema = &[
    ("name", "default"),
    ("g0", "0.01, 0.005, 0.0025, 0.0008, 0"),
    ("tau_end", "20"),
    ("dtau", "0.01"),
    ("u_max", "30"),
    ("h", "0.01"),
    ("alpha", "0.5"),
    ("tol", "1e-8"),
    ("max_iters", "500"),
];

/// One `key = value` line of a config file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

/// Splits config text into entries. Blank lines and `#` comments are
/// skipped; a key may appear once.
pub fn parse_text(text: &str) -> Result<Vec<Entry>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split_once('#').map_or(raw, |(b, _)| b).trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body.split_once('=').ok_or_else(|| Error::Parse {
            line,
            msg: format!("expected `key = value`, got `{body}`"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(Error::Parse {
                line,
                msg: format!("invalid key `{key}`"),
            });
        }
        if value.is_empty() {
            return Err(Error::Parse {
                line,
                msg: format!("key `{key}` has no value"),
            });
        }
        if !seen.insert(key.to_string()) {
            return Err(Error::Parse {
                line,
                msg: format!("duplicate key `{key}`"),
            });
        }
        out.push(Entry {
            line,
            key: key.to_string(),
            value: value.to_string(),
        });
    }
    Ok(out)
}

/// Fully resolved settings of one run: schema defaults, then the config
/// file, then `--set` overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub subcommand: String,
    entries: Vec<(String, String)>,
}

impl RunConfig {
    pub fn resolve(
        subcommand: &str,
        schema: Schema,
        file: &[Entry],
        sets: &[String],
    ) -> Result<Self> {
        let mut entries: Vec<(String, String)> = schema
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        let mut assign = |key: &str, value: &str, origin: &str| -> Result<()> {
            match entries.iter_mut().find(|(k, _)| k == key) {
                Some(slot) => {
                    slot.1 = value.to_string();
                    Ok(())
                }
                None => Err(Error::Config(format!(
                    "unknown key `{key}` for `{subcommand}` ({origin})"
                ))),
            }
        };
        for e in file {
            assign(&e.key, &e.value, &format!("config line {}", e.line))?;
        }
        for s in sets {
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set expects key=value, got `{s}`")))?;
            let (k, v) = (k.trim(), v.trim());
            if v.is_empty() {
                return Err(Error::Config(format!("--set {k}= has no value")));
            }
            assign(k, v, "--set")?;
        }
        Ok(RunConfig {
            subcommand: subcommand.to_string(),
            entries,
        })
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn set(&mut self, key: &str, value: String) {
        if let Some(slot) = self.entries.iter_mut().find(|(k, _)| k == key) {
            slot.1 = value;
        }
    }

    pub fn str(&self, key: &str) -> &str {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .unwrap_or_else(|| panic!("key `{key}` missing from the schema"))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T> {
        let raw = self.str(key);
        raw.parse::<T>()
            .map_err(|_| Error::Config(format!("{key} = `{raw}` is not valid")))
    }

    pub fn list<T: FromStr>(&self, key: &str) -> Result<Vec<T>> {
        self.str(key)
            .split(',')
            .map(|s| {
                let s = s.trim();
                s.parse::<T>()
                    .map_err(|_| Error::Config(format!("{key}: `{s}` is not valid")))
            })
            .collect()
    }

    pub fn flag(&self, key: &str) -> Result<bool> {
        match self.str(key) {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            other => Err(Error::Config(format!("{key} = `{other}` is not a boolean"))),
        }
    }

    /// `key = value` lines, one per resolved key.
    pub fn echo(&self) -> String {
        let mut s = format!("subcommand = {}\n", self.subcommand);
        for (k, v) in &self.entries {
            s.push_str(&format!("{k} = {v}\n"));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_blanks() {
        let e = parse_text("# run\n\nu_max = 40  # wider\nh=0.02\n").unwrap();
        assert_eq!(e.len(), 2);
        assert_eq!(
            (e[0].line, e[0].key.as_str(), e[0].value.as_str()),
            (3, "u_max", "40")
        );
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(matches!(
            parse_text("a = 1\na = 2"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_text("just words"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(parse_text("k =").is_err());
        assert!(parse_text("bad key = 1").is_err());
    }

    #[test]
    fn overrides_apply_in_order() {
        let file = parse_text("h = 0.02\n").unwrap();
        let cfg = RunConfig::resolve("steady", STEADY, &file, &["alpha=0.7".into()]).unwrap();
        assert_eq!(cfg.get::<f64>("h").unwrap(), 0.02);
        assert_eq!(cfg.get::<f64>("alpha").unwrap(), 0.7);
        assert_eq!(cfg.get::<f64>("u_max").unwrap(), 30.0);
        assert!(cfg.echo().contains("alpha = 0.7\n"));
        assert!(
            RunConfig::resolve("steady", STEADY, &parse_text("seed = 3").unwrap(), &[]).is_err()
        );
        assert!(RunConfig::resolve("steady", STEADY, &[], &["nokey".into()]).is_err());
    }

    #[test]
    fn typed_access() {
        let cfg = RunConfig::resolve("fig1", FIG1, &[], &[]).unwrap();
        assert_eq!(
            cfg.list::<f64>("g0").unwrap(),
            vec![0.01, 0.005, 0.0025, 0.0008, 0.0]
        );
        let bad = RunConfig::resolve("fig1", FIG1, &[], &["tau_end=soon".into()]).unwrap();
        assert!(bad.get::<f64>("tau_end").is_err());
    }
}
