//! INI-style scenario files.
//!
//! ```text
//! [scenario]
//! c = 100
//! delta = 0.1
//! y_lim = 30
//!
//! [plan]
//! k = 7
//! ```
//!
//! `#` and `;` start comment lines. Sections other than `[scenario]` are
//! optional, and so are their keys.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use hidver::{AttackMode, ScenarioConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub line: usize,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.msg)
        } else {
            write!(f, "line {}: {}", self.line, self.msg)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanSettings {
    pub k: f64,
    pub b_max: f64,
    pub n_versions: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoolSettings {
    pub size: usize,
    pub eps_d: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackSettings {
    pub mode: AttackMode,
    pub samples: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioFile {
    pub scenario: ScenarioConfig,
    pub plan: PlanSettings,
    pub pool: PoolSettings,
    pub attack: AttackSettings,
}

impl Default for ScenarioFile {
    fn default() -> Self {
        Self {
            scenario: ScenarioConfig::default(),
            plan: PlanSettings {
                k: 7.0,
                b_max: 12.0,
                n_versions: 8,
            },
            pool: PoolSettings {
                size: 50,
                eps_d: hidver::versioning::DEFAULT_EPS_D,
                seed: 0,
            },
            attack: AttackSettings {
                mode: AttackMode::Ensemble,
                samples: 0,
                seed: 0,
            },
        }
    }
}

fn value<T: FromStr>(line: usize, key: &str, raw: &str) -> Result<T, ParseError> {
    raw.parse().map_err(|_| ParseError {
        line,
        msg: format!("cannot parse {key} = {raw:?}"),
    })
}

fn real(line: usize, key: &str, raw: &str) -> Result<f64, ParseError> {
    let x: f64 = value(line, key, raw)?;
    if !x.is_finite() {
        return Err(ParseError {
            line,
            msg: format!("{key} must be finite"),
        });
    }
    Ok(x)
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut out = ScenarioFile::default();
        let mut section: Option<String> = None;
        let mut seen_sections = HashSet::new();
        let mut seen_keys = HashSet::new();
        let mut scenario_keys = [None::<f64>; 3];
        let mut scenario_line = 0;

        for (i, raw) in text.lines().enumerate() {
            let ln = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| ParseError {
                    line: ln,
                    msg: "unterminated section header".into(),
                })?;
                let name = name.trim().to_string();
                if !matches!(name.as_str(), "scenario" | "plan" | "pool" | "attack") {
                    return Err(ParseError {
                        line: ln,
                        msg: format!("unknown section [{name}]"),
                    });
                }
                if !seen_sections.insert(name.clone()) {
                    return Err(ParseError {
                        line: ln,
                        msg: format!("duplicate section [{name}]"),
                    });
                }
                if name == "scenario" {
                    scenario_line = ln;
                }
                section = Some(name);
                continue;
            }
            let Some((key, val)) = line.split_once('=') else {
                return Err(ParseError {
                    line: ln,
                    msg: format!("expected key = value, got {line:?}"),
                });
            };
            let (key, val) = (key.trim(), val.trim());
            let Some(sec) = section.as_deref() else {
                return Err(ParseError {
                    line: ln,
                    msg: "key outside of any section".into(),
                });
            };
            if !seen_keys.insert(format!("{sec}.{key}")) {
                return Err(ParseError {
                    line: ln,
                    msg: format!("duplicate key {key} in [{sec}]"),
                });
            }
            match (sec, key) {
                ("scenario", "c") => scenario_keys[0] = Some(real(ln, key, val)?),
                ("scenario", "delta") => scenario_keys[1] = Some(real(ln, key, val)?),
                ("scenario", "y_lim") => scenario_keys[2] = Some(real(ln, key, val)?),
                ("plan", "k") => out.plan.k = real(ln, key, val)?,
                ("plan", "b_max") => out.plan.b_max = real(ln, key, val)?,
                ("plan", "n_versions") => out.plan.n_versions = value(ln, key, val)?,
                ("pool", "size") => out.pool.size = value(ln, key, val)?,
                ("pool", "eps_d") => out.pool.eps_d = real(ln, key, val)?,
                ("pool", "seed") => out.pool.seed = value(ln, key, val)?,
                ("attack", "mode") => {
                    out.attack.mode = val.parse().map_err(|_| ParseError {
                        line: ln,
                        msg: format!("attack mode must be ensemble or cautious, got {val:?}"),
                    })?
                }
                ("attack", "samples") => out.attack.samples = value(ln, key, val)?,
                ("attack", "seed") => out.attack.seed = value(ln, key, val)?,
                _ => {
                    return Err(ParseError {
                        line: ln,
                        msg: format!("unknown key {key} in [{sec}]"),
                    })
                }
            }
        }

        if !seen_sections.contains("scenario") {
            return Err(ParseError {
                line: 0,
                msg: "missing [scenario] section".into(),
            });
        }
        let names = ["c", "delta", "y_lim"];
        let mut vals = [0.0; 3];
        for (slot, (v, name)) in vals.iter_mut().zip(scenario_keys.iter().zip(names)) {
            *slot = v.ok_or_else(|| ParseError {
                line: scenario_line,
                msg: format!("[scenario] is missing key {name}"),
            })?;
        }
        out.scenario = ScenarioConfig {
            c: vals[0],
            delta: vals[1],
            y_lim: vals[2],
        };
        Ok(out)
    }
}
