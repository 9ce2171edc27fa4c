//! `key = value` run configuration.
//!
//! Blank lines and `#` comments are ignored. Every problem is reported with
//! its line and key; parsing does not stop at the first one.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use serde_json::{json, Value};
use subarcs_core::addresses::{AddressError, Alphabet};
use subarcs_core::Address;

/// How the system parameters are given.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// `p3 = p1`, `B3` at `31 tail`, `p2` solved for.
    Lemma1 { p1: f64, tail: Address },
    /// Equal ratios, `B2, B3` by rotating the address of `B1`.
    Cyclic { p: f64, addr_b1: Address },
    Explicit { p: [f64; 3], addrs: [Address; 3] },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Emit {
    pub json: bool,
    pub csv: bool,
    pub svg: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub family: Family,
    pub depth: usize,
    pub eps: f64,
    pub tol: f64,
    pub seed: u64,
    pub out: PathBuf,
    pub emit: Emit,
    /// Depths of the chain covers used by dimension and measure estimates.
    pub dim_depths: Vec<usize>,
    /// Number of random subarcs sampled by `arc-dim`.
    pub samples: usize,
    /// Refinement levels of the measure sets.
    pub measure_depth: usize,
    /// Test fixture: enlarge `S0` about `B2` by this factor.
    pub corrupt_s0: Option<f64>,
}

pub const DEFAULT_DEPTH: usize = 5;
pub const DEFAULT_EPS: f64 = 1e-9;
pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    /// 1-based line, 0 when the key is missing altogether.
    pub line: usize,
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}: {}", self.key, self.message)
        } else {
            write!(f, "line {}: {}: {}", self.line, self.key, self.message)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError(pub Vec<ConfigError>);

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseError {}

const KEYS: &[&str] = &[
    "family",
    "p",
    "p1",
    "p2",
    "p3",
    "tail",
    "addrB1",
    "addrB2",
    "addrB3",
    "depth",
    "eps",
    "tol",
    "seed",
    "out",
    "emit",
    "dim_depths",
    "samples",
    "measure_depth",
    "corrupt_s0",
];

struct Entries {
    values: BTreeMap<String, (usize, String)>,
    errors: Vec<ConfigError>,
}

impl Entries {
    fn error(&mut self, line: usize, key: &str, message: impl Into<String>) {
        self.errors.push(ConfigError {
            line,
            key: key.to_string(),
            message: message.into(),
        });
    }

    fn get(&self, key: &str) -> Option<(usize, &str)> {
        self.values.get(key).map(|(l, v)| (*l, v.as_str()))
    }

    fn parsed<T: std::str::FromStr>(&mut self, key: &str, what: &str) -> Option<(usize, T)> {
        let (line, raw) = self.get(key)?;
        match raw.parse() {
            Ok(v) => Some((line, v)),
            Err(_) => {
                let raw = raw.to_string();
                self.error(line, key, format!("expected {what}, got {raw:?}"));
                None
            }
        }
    }

    fn required<T: std::str::FromStr>(&mut self, key: &str, what: &str, family: &str) -> Option<(usize, T)> {
        if self.get(key).is_none() {
            self.error(0, key, format!("required for family {family}"));
            return None;
        }
        self.parsed(key, what)
    }

    fn ratio(&mut self, key: &str, family: &str) -> Option<f64> {
        let (line, v) = self.required::<f64>(key, "a number", family)?;
        if v > 0.0 && v < 1.0 {
            Some(v)
        } else {
            self.error(line, key, format!("{key} out of (0,1)"));
            None
        }
    }

    fn address(&mut self, key: &str, family: &str) -> Option<(usize, Address)> {
        if self.get(key).is_none() {
            self.error(0, key, format!("required for family {family}"));
            return None;
        }
        let (line, raw) = self.get(key)?;
        let raw = raw.to_string();
        match raw.parse::<Address>() {
            Ok(a) => Some((line, a)),
            Err(AddressError::DigitOutsideAlphabet(d)) => {
                self.error(line, key, format!("digit outside alphabet ({d})"));
                None
            }
            Err(e) => {
                self.error(line, key, format!("{e}"));
                None
            }
        }
    }
}

fn parse_family(e: &mut Entries) -> Option<Family> {
    let (line, name) = match e.get("family") {
        Some((l, v)) => (l, v.to_string()),
        None => {
            e.error(0, "family", "missing; expected lemma1, cyclic or explicit");
            return None;
        }
    };
    match name.as_str() {
        "lemma1" => {
            let p1 = e.ratio("p1", "lemma1");
            if let Some(p) = p1 {
                if p >= 0.5 {
                    let l = e.get("p1").map_or(0, |x| x.0);
                    e.error(l, "p1", "p1 must be below 1/2");
                }
            }
            let tail = e.address("tail", "lemma1");
            if let Some((l, t)) = &tail {
                let (alphabet, _) = t.tail_alphabet(0);
                if !alphabet.is_subset(Alphabet::of(&[1, 2])) {
                    e.error(*l, "tail", "digit outside alphabet {1, 2}");
                }
            }
            Some(Family::Lemma1 {
                p1: p1?,
                tail: tail?.1,
            })
        }
        "cyclic" => {
            let p = e.ratio("p", "cyclic");
            if let Some(v) = p {
                if 3.0 * v >= 1.0 {
                    let l = e.get("p").map_or(0, |x| x.0);
                    e.error(l, "p", "p must be below 1/3");
                }
            }
            let addr = e.address("addrB1", "cyclic");
            Some(Family::Cyclic {
                p: p?,
                addr_b1: addr?.1,
            })
        }
        "explicit" => {
            let p = [e.ratio("p1", "explicit"), e.ratio("p2", "explicit"), e.ratio("p3", "explicit")];
            let a = [
                e.address("addrB1", "explicit"),
                e.address("addrB2", "explicit"),
                e.address("addrB3", "explicit"),
            ];
            let [p1, p2, p3] = p;
            let [a1, a2, a3] = a;
            Some(Family::Explicit {
                p: [p1?, p2?, p3?],
                addrs: [a1?.1, a2?.1, a3?.1],
            })
        }
        other => {
            e.error(line, "family", format!("unknown family {other:?}"));
            None
        }
    }
}

fn parse_depths(e: &mut Entries) -> Vec<usize> {
    let default = vec![5, 6, 7, 8, 9];
    let Some((line, raw)) = e.get("dim_depths") else {
        return default;
    };
    let raw = raw.to_string();
    let parsed: Result<Vec<usize>, _> = raw.split(',').map(|s| s.trim().parse::<usize>()).collect();
    match parsed {
        Ok(v) if v.len() >= 3 && v.iter().all(|&k| k >= 1) => v,
        _ => {
            e.error(line, "dim_depths", "expected at least three positive depths, comma separated");
            default
        }
    }
}

fn parse_emit(e: &mut Entries) -> Emit {
    let Some((line, raw)) = e.get("emit") else {
        return Emit {
            json: true,
            csv: true,
            svg: true,
        };
    };
    let raw = raw.to_string();
    let mut emit = Emit {
        json: false,
        csv: false,
        svg: false,
    };
    for item in raw.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match item {
            "json" => emit.json = true,
            "csv" => emit.csv = true,
            "svg" => emit.svg = true,
            other => e.error(line, "emit", format!("unknown format {other:?}")),
        }
    }
    emit
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, ParseError> {
    let mut e = Entries {
        values: BTreeMap::new(),
        errors: Vec::new(),
    };
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            e.error(line, content, "expected key = value");
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            e.error(line, key, "unknown key");
        } else if e.values.contains_key(key) {
            e.error(line, key, "duplicate key");
        } else {
            e.values.insert(key.to_string(), (line, value.to_string()));
        }
    }

    let family = parse_family(&mut e);
    let depth = e.parsed("depth", "a nonnegative integer").map_or(DEFAULT_DEPTH, |x| x.1);
    let eps = positive(&mut e, "eps", DEFAULT_EPS);
    let tol = positive(&mut e, "tol", DEFAULT_TOL);
    let seed = e.parsed("seed", "an unsigned integer").map_or(DEFAULT_SEED, |x| x.1);
    let out = e.get("out").map_or_else(|| PathBuf::from("out"), |(_, v)| PathBuf::from(v));
    let emit = parse_emit(&mut e);
    let dim_depths = parse_depths(&mut e);
    let samples = e.parsed("samples", "an unsigned integer").map_or(10, |x| x.1);
    let measure_depth = e.parsed("measure_depth", "an unsigned integer").map_or(8, |x| x.1);
    let corrupt_s0 = e.parsed::<f64>("corrupt_s0", "a number").map(|x| x.1);

    match family {
        Some(family) if e.errors.is_empty() => Ok(RunConfig {
            family,
            depth,
            eps,
            tol,
            seed,
            out,
            emit,
            dim_depths,
            samples,
            measure_depth,
            corrupt_s0,
        }),
        _ => {
            e.errors.sort_by_key(|err| err.line);
            Err(ParseError(e.errors))
        }
    }
}

fn positive(e: &mut Entries, key: &str, default: f64) -> f64 {
    match e.parsed::<f64>(key, "a number") {
        Some((_, v)) if v > 0.0 && v.is_finite() => v,
        Some((line, _)) => {
            e.error(line, key, format!("{key} must be positive"));
            default
        }
        None => default,
    }
}

impl RunConfig {
    /// The resolved configuration, embedded in every report.
    pub fn echo(&self) -> Value {
        let family = match &self.family {
            Family::Lemma1 { p1, tail } => json!({"family": "lemma1", "p1": p1, "tail": tail.to_string()}),
            Family::Cyclic { p, addr_b1 } => json!({"family": "cyclic", "p": p, "addrB1": addr_b1.to_string()}),
            Family::Explicit { p, addrs } => json!({
                "family": "explicit",
                "p1": p[0], "p2": p[1], "p3": p[2],
                "addrB1": addrs[0].to_string(), "addrB2": addrs[1].to_string(), "addrB3": addrs[2].to_string(),
            }),
        };
        let mut emit = Vec::new();
        for (on, name) in [(self.emit.json, "json"), (self.emit.csv, "csv"), (self.emit.svg, "svg")] {
            if on {
                emit.push(name);
            }
        }
        json!({
            "params": family,
            "depth": self.depth,
            "eps": self.eps,
            "tol": self.tol,
            "seed": self.seed,
            "out": self.out.display().to_string(),
            "emit": emit,
            "dim_depths": self.dim_depths,
            "samples": self.samples,
            "measure_depth": self.measure_depth,
            "corrupt_s0": self.corrupt_s0,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lemma1_document() {
        let c = parse_config("family=lemma1\np1=0.3\ntail=2(1)\ndepth=5").unwrap();
        assert_eq!(c.depth, 5);
        assert_eq!(c.seed, 42);
        assert_eq!(c.eps, 1e-9);
        assert_eq!(c.tol, 1e-10);
        match c.family {
            Family::Lemma1 { p1, tail } => {
                assert_eq!(p1, 0.3);
                assert_eq!(tail.to_string(), "2(1)");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn comments_and_spacing() {
        let c = parse_config("# cyclic run\nfamily = cyclic   # symmetric\n\np = 0.2\naddrB1 = 12(23)\nseed = 7\n").unwrap();
        assert_eq!(c.seed, 7);
        assert!(matches!(c.family, Family::Cyclic { p, .. } if p == 0.2));
    }

    #[test]
    fn ratio_out_of_range_is_located() {
        let err = parse_config("family=lemma1\np1=1.2\ntail=2(1)").unwrap_err();
        assert_eq!(err.0.len(), 1);
        assert_eq!(err.0[0].line, 2);
        assert_eq!(err.0[0].key, "p1");
        assert_eq!(err.0[0].message, "p1 out of (0,1)");
    }

    #[test]
    fn bad_digit_is_located() {
        let err = parse_config("family=cyclic\np=0.2\naddrB1=14(2)").unwrap_err();
        assert_eq!(err.0[0].line, 3);
        assert_eq!(err.0[0].key, "addrB1");
        assert!(err.0[0].message.starts_with("digit outside alphabet"));
    }

    #[test]
    fn all_errors_reported() {
        let err = parse_config("family=explicit\np1=0.2\nbogus=1\np1=0.3\neps=-1\n").unwrap_err();
        let keys: Vec<_> = err.0.iter().map(|e| e.key.as_str()).collect();
        for k in ["bogus", "p1", "eps", "p2", "p3", "addrB1"] {
            assert!(keys.contains(&k), "{keys:?}");
        }
        assert!(err.to_string().contains("line 3: bogus: unknown key"));
    }

    #[test]
    fn missing_family() {
        let err = parse_config("p=0.2").unwrap_err();
        assert_eq!(err.0[0].key, "family");
    }
}
