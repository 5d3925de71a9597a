use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::paper::{NoiseCoupling, PaperMode, PaperParameters};

pub const PRESET_PAPER_S4: &str = "paper-s4";

/// Which lifted model a filter or lifted path runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LiftingSelector {
    /// Hard-coded six-state lift with the logarithmic eigenfunction.
    KoopmanPaper,
    /// Generator build on the monomials of degree one and two.
    KoopmanGeneric,
    /// Carleman embedding of the given order.
    Carleman(u32),
}

impl LiftingSelector {
    /// File stem used in `filter_<name>.csv` and `matrices_<name>.csv`.
    pub fn name(self) -> String {
        match self {
            Self::KoopmanPaper => "koopman".into(),
            Self::KoopmanGeneric => "koopman_generic".into(),
            Self::Carleman(n) => format!("carleman{n}"),
        }
    }
}

impl fmt::Display for LiftingSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::KoopmanPaper => f.write_str("koopman-paper"),
            Self::KoopmanGeneric => f.write_str("koopman-generic"),
            Self::Carleman(n) => write!(f, "carleman:{n}"),
        }
    }
}

impl FromStr for LiftingSelector {
    type Err = String;

    /// Accepts `koopman`, `koopman-paper`, `koopman-generic`, `carleman`,
    /// `carleman:N` and `carleman-N`.
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "koopman" | "koopman-paper" => Ok(Self::KoopmanPaper),
            "koopman-generic" => Ok(Self::KoopmanGeneric),
            "carleman" => Ok(Self::Carleman(2)),
            other => {
                let order = other
                    .strip_prefix("carleman:")
                    .or_else(|| other.strip_prefix("carleman-"))
                    .ok_or_else(|| format!("unknown lifting '{other}'"))?;
                match order.parse::<u32>() {
                    Ok(n) if n >= 1 => Ok(Self::Carleman(n)),
                    _ => Err(format!("invalid Carleman order '{order}'")),
                }
            }
        }
    }
}

impl FromStr for PaperMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "verbatim" => Ok(Self::Verbatim),
            "ito" => Ok(Self::Ito),
            other => Err(format!("unknown mode '{other}' (verbatim | ito)")),
        }
    }
}

impl FromStr for NoiseCoupling {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "shared" => Ok(Self::Shared),
            "independent" => Ok(Self::Independent),
            other => Err(format!("unknown noise coupling '{other}' (shared | independent)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub system: String,
    /// Lifting for `simulate` and single-filter runs.
    pub lifting: LiftingSelector,
    /// Filters run by `compare`, in report order.
    pub filters: Vec<LiftingSelector>,
    pub params: PaperParameters,
    pub num_runs: usize,
    pub base_seed: u64,
    pub mode: PaperMode,
    pub coupling: NoiseCoupling,
    pub out_dir: PathBuf,
    /// `P(0) = p0_scale · I`.
    pub p0_scale: f64,
    /// Stride of the full-covariance dump; 0 disables it.
    pub cov_stride: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::preset(PRESET_PAPER_S4).expect("built-in preset")
    }
}

impl ExperimentConfig {
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            PRESET_PAPER_S4 => Ok(Self {
                system: PRESET_PAPER_S4.into(),
                lifting: LiftingSelector::KoopmanPaper,
                filters: vec![LiftingSelector::KoopmanPaper, LiftingSelector::Carleman(2)],
                params: PaperParameters::default(),
                num_runs: 20,
                base_seed: 1,
                mode: PaperMode::Verbatim,
                coupling: NoiseCoupling::Shared,
                out_dir: PathBuf::from("out"),
                p0_scale: 1.0,
                cov_stride: 500,
            }),
            other => Err(Error::Validation(format!(
                "unknown preset '{other}' (available: {PRESET_PAPER_S4})"
            ))),
        }
    }

    /// `base_seed + i` for run `i`.
    pub fn seeds(&self) -> Vec<u64> {
        (0..self.num_runs as u64).map(|i| self.base_seed.wrapping_add(i)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.system != PRESET_PAPER_S4 {
            return Err(Error::Validation(format!("unknown system '{}'", self.system)));
        }
        if self.num_runs < 1 {
            return Err(Error::Validation("num_runs must be at least 1".into()));
        }
        let p = &self.params;
        if !(p.dt > 0.0 && p.dt.is_finite()) {
            return Err(Error::Validation(format!("dt must be positive, got {}", p.dt)));
        }
        if !(p.horizon > 0.0 && p.horizon.is_finite()) {
            return Err(Error::Validation(format!("horizon must be positive, got {}", p.horizon)));
        }
        if p.dt > p.horizon {
            return Err(Error::Validation(format!(
                "dt {} exceeds horizon {}",
                p.dt, p.horizon
            )));
        }
        if !(self.p0_scale > 0.0 && self.p0_scale.is_finite()) {
            return Err(Error::Validation(format!(
                "p0_scale must be positive, got {}",
                self.p0_scale
            )));
        }
        if self.filters.is_empty() {
            return Err(Error::Validation("at least one filter is required".into()));
        }
        p.validate().map_err(|e| match e {
            Error::InvalidArgument(m) => Error::Validation(m),
            other => other,
        })
    }

    /// Flat `key = value` form accepted by [`parse_config`].
    pub fn to_text(&self) -> String {
        let p = &self.params;
        let filters: Vec<String> = self.filters.iter().map(|f| f.to_string()).collect();
        format!(
            "system = {}\nlifting = {}\nfilters = {}\na = {}\nb = {}\nr1 = {}\n\
             x0_1 = {}\nx0_2 = {}\nx01 = {}\nx02 = {}\ndt = {}\nhorizon = {}\n\
             num_runs = {}\nbase_seed = {}\nmode = {}\nnoise_coupling = {}\n\
             out_dir = {}\np0_scale = {}\ncov_stride = {}\n",
            self.system,
            self.lifting,
            filters.join(", "),
            p.a,
            p.b,
            p.r1,
            p.x0[0],
            p.x0[1],
            p.x01,
            p.x02,
            p.dt,
            p.horizon,
            self.num_runs,
            self.base_seed,
            self.mode.name(),
            self.coupling.name(),
            self.out_dir.display(),
            self.p0_scale,
            self.cov_stride,
        )
    }
}

const KEYS: &[&str] = &[
    "system",
    "lifting",
    "filters",
    "a",
    "b",
    "r1",
    "x0_1",
    "x0_2",
    "x01",
    "x02",
    "dt",
    "horizon",
    "num_runs",
    "base_seed",
    "mode",
    "noise_coupling",
    "out_dir",
    "p0_scale",
    "cov_stride",
];

/// Parses a flat `key = value` document; missing keys keep the values of the
/// preset named by `system` (default `paper-s4`).
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut pairs: Vec<(usize, String, String)> = Vec::new();
    let mut unknown = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: line_no,
            message: format!("expected 'key = value', got '{line}'"),
        })?;
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() || value.is_empty() {
            return Err(Error::Parse {
                line: line_no,
                message: format!("empty key or value in '{line}'"),
            });
        }
        if !KEYS.contains(&key) {
            unknown.push(key.to_string());
            continue;
        }
        if pairs.iter().any(|(_, k, _)| k == key) {
            return Err(Error::Parse {
                line: line_no,
                message: format!("duplicate key '{key}'"),
            });
        }
        pairs.push((line_no, key.to_string(), value.to_string()));
    }
    if !unknown.is_empty() {
        return Err(Error::Validation(format!("unknown keys: {}", unknown.join(", "))));
    }

    let system = pairs
        .iter()
        .find(|(_, k, _)| k == "system")
        .map_or(PRESET_PAPER_S4, |(_, _, v)| v.as_str());
    let mut cfg = ExperimentConfig::preset(system)?;
    for (line, key, value) in &pairs {
        apply(&mut cfg, *line, key, value)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn parse_value<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value.parse::<T>().map_err(|e| Error::Parse {
        line,
        message: format!("invalid value '{value}' for {key}: {e}"),
    })
}

fn apply(cfg: &mut ExperimentConfig, line: usize, key: &str, value: &str) -> Result<()> {
    let p = &mut cfg.params;
    match key {
        "system" => cfg.system = value.to_string(),
        "lifting" => cfg.lifting = parse_value(line, key, value)?,
        "filters" => {
            cfg.filters = value
                .split(',')
                .map(|s| parse_value(line, key, s.trim()))
                .collect::<Result<_>>()?
        }
        "a" => p.a = parse_value(line, key, value)?,
        "b" => p.b = parse_value(line, key, value)?,
        "r1" => p.r1 = parse_value(line, key, value)?,
        "x0_1" => p.x0[0] = parse_value(line, key, value)?,
        "x0_2" => p.x0[1] = parse_value(line, key, value)?,
        "x01" => p.x01 = parse_value(line, key, value)?,
        "x02" => p.x02 = parse_value(line, key, value)?,
        "dt" => p.dt = parse_value(line, key, value)?,
        "horizon" => p.horizon = parse_value(line, key, value)?,
        "num_runs" => cfg.num_runs = parse_value(line, key, value)?,
        "base_seed" => cfg.base_seed = parse_value(line, key, value)?,
        "mode" => cfg.mode = parse_value(line, key, value)?,
        "noise_coupling" => cfg.coupling = parse_value(line, key, value)?,
        "out_dir" => cfg.out_dir = PathBuf::from(value),
        "p0_scale" => cfg.p0_scale = parse_value(line, key, value)?,
        "cov_stride" => cfg.cov_stride = parse_value(line, key, value)?,
        _ => unreachable!("keys are checked before application"),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_the_preset() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!(cfg.params.a, 0.5);
        assert_eq!(cfg.params.r1, 0.5);
        assert_eq!(cfg.params.x0, [0.1, 0.1]);
        assert_eq!((cfg.params.x01, cfg.params.x02), (-1.0, 1.0));
        assert_eq!(cfg.p0_scale, 1.0);
    }

    #[test]
    fn seeds_follow_base_seed() {
        let cfg = parse_config("num_runs = 50\nbase_seed = 42").unwrap();
        let seeds = cfg.seeds();
        assert_eq!(seeds.len(), 50);
        assert_eq!(seeds[0], 42);
        assert_eq!(seeds[49], 91);
    }

    #[test]
    fn negative_dt_is_a_validation_error() {
        assert!(matches!(parse_config("dt = -0.1"), Err(Error::Validation(_))));
        assert!(matches!(parse_config("horizon = 0"), Err(Error::Validation(_))));
        assert!(matches!(parse_config("dt = 2\nhorizon = 1"), Err(Error::Validation(_))));
        assert!(matches!(parse_config("num_runs = 0"), Err(Error::Validation(_))));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = parse_config("# header\na = 0.3\nnot a pair\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
        let err = parse_config("a = x").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err:?}");
    }

    #[test]
    fn unknown_keys_are_listed() {
        let err = parse_config("foo = 1\na = 0.2\nbar = 2").unwrap_err();
        match err {
            Error::Validation(m) => assert!(m.contains("foo") && m.contains("bar"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn selectors_and_comments() {
        let cfg = parse_config(
            "lifting = carleman:3 # inline comment\nfilters = koopman, carleman-2\nmode = ito\nnoise_coupling = independent",
        )
        .unwrap();
        assert_eq!(cfg.lifting, LiftingSelector::Carleman(3));
        assert_eq!(cfg.filters, vec![LiftingSelector::KoopmanPaper, LiftingSelector::Carleman(2)]);
        assert_eq!(cfg.mode, PaperMode::Ito);
        assert_eq!(cfg.coupling, NoiseCoupling::Independent);
        assert!("carleman:0".parse::<LiftingSelector>().is_err());
    }

    #[test]
    fn text_round_trip() {
        let mut cfg = ExperimentConfig::default();
        cfg.params.a = 0.125;
        cfg.mode = PaperMode::Ito;
        cfg.filters = vec![LiftingSelector::KoopmanGeneric, LiftingSelector::Carleman(3)];
        assert_eq!(parse_config(&cfg.to_text()).unwrap(), cfg);
    }
}
