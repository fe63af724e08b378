//! Flat `key = value` run configuration.
//!
//! Lines are `key = value` pairs; `#` starts a comment. Command-line
//! `--set key=value` overrides are applied after the file, in order.

use std::collections::BTreeMap;
use std::path::PathBuf;

use fundfdtd::{Component, Formulation, HUpdate, Medium, SchemeId, TimeConfig, YeeGrid};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected 'key = value', got '{text}'")]
    Syntax { line: usize, text: String },
    #[error("unknown key '{0}'")]
    UnknownKey(String),
    #[error("invalid value for '{key}': {reason}")]
    Invalid { key: String, reason: String },
}

fn invalid(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        reason: reason.into(),
    }
}

pub const KEYS: &[&str] = &[
    "nx",
    "ny",
    "nz",
    "dx",
    "dy",
    "dz",
    "epsilon",
    "mu",
    "dt",
    "cfl",
    "scheme",
    "formulation",
    "h_update",
    "steps",
    "seed",
    "init",
    "source",
    "waveform",
    "amplitude",
    "frequency",
    "pulse_center",
    "pulse_width",
    "probes",
    "snapshot_every",
];

/// Raw key-value pairs in application order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct KeyValues(pub BTreeMap<String, String>);

impl KeyValues {
    pub fn parse_text(text: &str) -> Result<Self, ConfigError> {
        let mut out = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            out.set_pair(line).map_err(|e| match e {
                ConfigError::Syntax { text, .. } => ConfigError::Syntax { line: i + 1, text },
                other => other,
            })?;
        }
        Ok(out)
    }

    /// Apply one `key=value` override.
    pub fn set_pair(&mut self, pair: &str) -> Result<(), ConfigError> {
        let (k, v) = pair.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: 0,
            text: pair.to_string(),
        })?;
        let k = k.trim().to_ascii_lowercase();
        if !KEYS.contains(&k.as_str()) {
            return Err(ConfigError::UnknownKey(k));
        }
        self.0.insert(k, v.trim().to_string());
        Ok(())
    }

    fn get(&self, k: &str) -> Option<&str> {
        self.0.get(k).map(String::as_str)
    }

    fn num<T: std::str::FromStr>(&self, k: &str, default: T) -> Result<T, ConfigError> {
        match self.get(k) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| invalid(k, format!("cannot parse '{v}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TimeSpec {
    Dt(f64),
    Cfl(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Waveform {
    Sinusoid { amplitude: f64, frequency: f64 },
    Gaussian { amplitude: f64, center: f64, width: f64 },
}

impl Waveform {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Waveform::Sinusoid { amplitude, frequency } => {
                amplitude * (2.0 * std::f64::consts::PI * frequency * t).sin()
            }
            Waveform::Gaussian { amplitude, center, width } => {
                let s = (t - center) / width;
                amplitude * (-s * s).exp()
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Probe {
    pub component: Component,
    pub index: [usize; 3],
}

impl Probe {
    pub fn label(&self) -> String {
        let [i, j, k] = self.index;
        format!("{}@{i}.{j}.{k}", self.component.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Source {
    pub probe: Probe,
    pub waveform: Waveform,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Init {
    Zero,
    Random,
    Snapshot(PathBuf),
}

/// A validated run description.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub grid: YeeGrid,
    pub medium: Medium,
    pub time: TimeSpec,
    pub scheme: SchemeId,
    pub formulation: Formulation,
    pub h_update: HUpdate,
    pub steps: usize,
    pub seed: u64,
    pub init: Init,
    pub source: Option<Source>,
    pub probes: Vec<Probe>,
    pub snapshot_every: Option<usize>,
}

fn parse_location(key: &str, s: &str, grid: &YeeGrid) -> Result<Probe, ConfigError> {
    let (c, idx) = s
        .split_once('@')
        .ok_or_else(|| invalid(key, format!("expected 'component@i,j,k', got '{s}'")))?;
    let component = Component::parse(c).ok_or_else(|| invalid(key, format!("unknown component '{c}'")))?;
    let parts: Vec<&str> = idx.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(invalid(key, format!("expected three indices in '{idx}'")));
    }
    let mut index = [0usize; 3];
    for (slot, p) in index.iter_mut().zip(&parts) {
        *slot = p.parse().map_err(|_| invalid(key, format!("bad index '{p}'")))?;
    }
    let dims = grid.dims(component);
    if index.iter().zip(&dims).any(|(i, d)| i >= d) {
        return Err(invalid(
            key,
            format!("{} index {index:?} outside stored extent {dims:?}", component.name()),
        ));
    }
    Ok(Probe { component, index })
}

impl RunConfig {
    pub fn from_key_values(kv: &KeyValues) -> Result<Self, ConfigError> {
        let cells = [kv.num("nx", 8usize)?, kv.num("ny", 8usize)?, kv.num("nz", 8usize)?];
        let spacing = [kv.num("dx", 1.0)?, kv.num("dy", 1.0)?, kv.num("dz", 1.0)?];
        let grid = YeeGrid::new(cells, spacing).map_err(|e| invalid("nx/ny/nz/dx/dy/dz", e.to_string()))?;
        let medium = Medium::new(kv.num("epsilon", 1.0)?, kv.num("mu", 1.0)?)
            .map_err(|e| invalid("epsilon/mu", e.to_string()))?;

        let time = match (kv.get("dt"), kv.get("cfl")) {
            (Some(_), Some(_)) => return Err(invalid("dt", "give exactly one of dt and cfl, not both")),
            (None, None) => return Err(invalid("dt", "give exactly one of dt and cfl")),
            (Some(_), None) => {
                let dt = kv.num("dt", 0.0)?;
                TimeConfig::from_dt(&grid, &medium, dt).map_err(|e| invalid("dt", e.to_string()))?;
                TimeSpec::Dt(dt)
            }
            (None, Some(_)) => {
                let c = kv.num("cfl", 0.0)?;
                TimeConfig::from_cfl(&grid, &medium, c).map_err(|e| invalid("cfl", e.to_string()))?;
                TimeSpec::Cfl(c)
            }
        };

        let scheme: SchemeId = kv
            .get("scheme")
            .unwrap_or("adi")
            .parse()
            .map_err(|e: fundfdtd::Error| invalid("scheme", e.to_string()))?;
        let formulation: Formulation = kv
            .get("formulation")
            .unwrap_or("fundamental")
            .parse()
            .map_err(|e: fundfdtd::Error| invalid("formulation", e.to_string()))?;
        let h_update: HUpdate = kv
            .get("h_update")
            .unwrap_or("combined")
            .parse()
            .map_err(|e: fundfdtd::Error| invalid("h_update", e.to_string()))?;

        let init = match kv.get("init").unwrap_or("zero") {
            "zero" => Init::Zero,
            "random" => Init::Random,
            other => match other.strip_prefix("snapshot:") {
                Some(p) if !p.is_empty() => Init::Snapshot(PathBuf::from(p)),
                _ => return Err(invalid("init", format!("expected zero, random or snapshot:PATH, got '{other}'"))),
            },
        };

        let source = match kv.get("source") {
            None | Some("none") | Some("") => None,
            Some(s) => {
                let probe = parse_location("source", s, &grid)?;
                if !probe.component.is_electric() {
                    return Err(invalid("source", "soft sources drive electric components only"));
                }
                let amplitude = kv.num("amplitude", 1.0)?;
                let waveform = match kv.get("waveform").unwrap_or("sinusoid") {
                    "sinusoid" => {
                        let frequency = kv.num("frequency", 0.05)?;
                        Waveform::Sinusoid { amplitude, frequency }
                    }
                    "gaussian" => {
                        let width: f64 = kv.num("pulse_width", 5.0)?;
                        if width.is_nan() || width <= 0.0 {
                            return Err(invalid("pulse_width", "must be positive"));
                        }
                        Waveform::Gaussian {
                            amplitude,
                            center: kv.num("pulse_center", 4.0 * width)?,
                            width,
                        }
                    }
                    w => return Err(invalid("waveform", format!("expected sinusoid or gaussian, got '{w}'"))),
                };
                Some(Source { probe, waveform })
            }
        };

        let probes = match kv.get("probes") {
            None => Vec::new(),
            Some(list) => list
                .split(';')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| parse_location("probes", s, &grid))
                .collect::<Result<_, _>>()?,
        };

        let snapshot_every = match kv.get("snapshot_every") {
            None => None,
            Some(_) => {
                let n: usize = kv.num("snapshot_every", 0)?;
                if n == 0 {
                    return Err(invalid("snapshot_every", "cadence must be at least 1"));
                }
                Some(n)
            }
        };

        Ok(Self {
            grid,
            medium,
            time,
            scheme,
            formulation,
            h_update,
            steps: kv.num("steps", 100usize)?,
            seed: kv.num("seed", 0u64)?,
            init,
            source,
            probes,
            snapshot_every,
        })
    }

    pub fn dt(&self) -> f64 {
        match self.time {
            TimeSpec::Dt(dt) => dt,
            TimeSpec::Cfl(c) => TimeConfig::from_cfl(&self.grid, &self.medium, c)
                .expect("validated at parse time")
                .dt,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        RunConfig::from_key_values(&KeyValues::parse_text(text)?)
    }

    #[test]
    fn minimal_config_uses_defaults() {
        let c = parse("cfl = 5\n").unwrap();
        assert_eq!(c.grid.cells(), [8, 8, 8]);
        assert_eq!(c.scheme, SchemeId::Adi);
        assert_eq!(c.formulation, Formulation::Fundamental);
        assert_eq!(c.steps, 100);
        assert!(c.probes.is_empty());
    }

    #[test]
    fn exactly_one_time_key() {
        assert!(matches!(parse("steps = 3"), Err(ConfigError::Invalid { key, .. }) if key == "dt"));
        assert!(parse("dt = 0.1\ncfl = 2").is_err());
        assert!(parse("dt = -1").is_err());
    }

    #[test]
    fn probes_and_sources_are_checked() {
        let c = parse("cfl = 2\nprobes = ez@4,4,4; hx@0,1,2\nsource = ez@3,3,3\nwaveform = gaussian").unwrap();
        assert_eq!(c.probes.len(), 2);
        assert_eq!(c.probes[0].label(), "ez@4.4.4");
        assert!(matches!(c.source.unwrap().waveform, Waveform::Gaussian { .. }));
        // ex has extent 7 along y on an 8-cell grid
        assert!(parse("cfl = 2\nprobes = ex@0,7,0").is_err());
        assert!(parse("cfl = 2\nsource = hz@1,1,1").is_err());
        assert!(parse("cfl = 2\nsnapshot_every = 0").is_err());
    }

    #[test]
    fn comments_overrides_and_unknown_keys() {
        let mut kv = KeyValues::parse_text("# header\nnx = 6 # trailing\ncfl = 3\n").unwrap();
        kv.set_pair("scheme=ss2").unwrap();
        let c = RunConfig::from_key_values(&kv).unwrap();
        assert_eq!((c.grid.cells()[0], c.scheme), (6, SchemeId::Ss2));
        assert_eq!(kv.set_pair("bogus=1"), Err(ConfigError::UnknownKey("bogus".into())));
        assert!(matches!(KeyValues::parse_text("nx 6"), Err(ConfigError::Syntax { line: 1, .. })));
    }

    #[test]
    fn waveforms() {
        let s = Waveform::Sinusoid { amplitude: 2.0, frequency: 0.25 };
        assert!((s.value(1.0) - 2.0).abs() < 1e-15);
        let g = Waveform::Gaussian { amplitude: 1.0, center: 3.0, width: 1.0 };
        assert_eq!(g.value(3.0), 1.0);
    }
}
