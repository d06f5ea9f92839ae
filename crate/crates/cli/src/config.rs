//! Flat `key=value` run configuration.
//!
//! Sources, later ones winning: preset defaults, config file, `SLOWMIX_<KEY>`
//! environment variables, command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use slowmix::arithmetic::{Growth, GrowthPolicy};
use slowmix::ceiling::{AmplitudeLaw, AssembleOptions, Regime, SampleOptions};
use slowmix::spectral::{CorrelationOptions, LagWindow};

pub const ENV_PREFIX: &str = "SLOWMIX_";

/// Every accepted key with a one-line description, in echo order.
pub const KEYS: &[(&str, &str)] = &[
    ("preset", "desk | deep: defaults for every other key"),
    ("growth", "power | exponential"),
    ("growth_coef", "G(q) = coef*q^exp (power growth)"),
    ("growth_exp", "exponent of the power growth"),
    ("first_quotient", "q1, >= 1"),
    ("max_level", "levels of the translation vector, 1..=8"),
    ("law", "relaxed | exponential amplitude law"),
    ("sx", "relaxed eps_n = sx*q_n^-ex"),
    ("ex", "decay exponent of eps_n"),
    ("sy", "relaxed eps'_n = sy*q'_n^-ey"),
    ("ey", "decay exponent of eps'_n"),
    ("w_coef", "relaxed window W(q) = w_coef*q^w_exp"),
    ("w_exp", "exponent of the window scale"),
    ("amp_factor", "bump amplitude A_n = amp_factor*eps_n"),
    ("band_offset", "band index nu_n = n + band_offset"),
    ("n0", "first ceiling level"),
    ("n_max", "last ceiling level"),
    ("precision", "bits of the rounded alpha values, 64..=65536"),
    ("positivity_bits", "positivity grid has 2^bits points per axis, 8..=20"),
    ("grid", "uniform band samples per check"),
    ("random", "random band samples per check"),
    ("seed", "master seed"),
    ("r_max", "highest derivative order in the Fourier bound, 0..=6"),
    ("coboundary_bits", "coboundary grid has 2^bits points, 4..=16"),
    ("coboundary_tol", "sup residual tolerance of the coboundary identity"),
    ("lower_grid", "grid for the lower-level bounds"),
    ("displacement_samples", "sampled points for the displacement check"),
    ("overlap_balls", "boxes for the tower-overlap diagnostic"),
    ("overlap_per_ball", "samples per box"),
    ("coverage_samples", "Monte Carlo samples for coverage"),
    ("gamma", "rigidity decay rate, > tau"),
    ("tau", "singularity growth rate, > 1"),
    ("starts", "start points for the singularity probe"),
    ("draws", "random-phase draws per start"),
    ("floor", "floor on |S_N|/N, in (0, 1)"),
    ("tol_xtilde", "required margin for band and slope checks"),
    ("tol_singularity", "required median ratio against random phases"),
    ("which", "comma list from xtilde,coboundary,lower,stretch,scpa,overlap,coverage,singularity"),
    ("times", "comma list of flow times for simulate"),
    ("points", "random start points for simulate when no points file is given"),
    ("ode_tol", "local error tolerance of the ODE integrator"),
    ("observable", "all | 0..4 | char:k1:k2"),
    ("lags", "autocorrelation lags, >= 64"),
    ("orbit_len", "orbit steps per engine"),
    ("batches", "independent orbit batches"),
    ("grid_lags", "lags cross-checked against the grid estimator"),
    ("window", "parzen | bartlett"),
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

fn preset_defaults(name: &str) -> Option<Vec<(&'static str, String)>> {
    let (coef, exp, levels) = match name {
        "desk" => (30, 2, 2),
        "deep" => (64, 1, 4),
        _ => return None,
    };
    let s = |v: &str| v.to_string();
    Some(vec![
        ("preset", s(name)),
        ("growth", s("power")),
        ("growth_coef", coef.to_string()),
        ("growth_exp", exp.to_string()),
        ("first_quotient", s("2")),
        ("max_level", levels.to_string()),
        ("law", s("relaxed")),
        ("sx", s("0.02")),
        ("ex", s("0.4")),
        ("sy", s("0.00001")),
        ("ey", s("1.5")),
        ("w_coef", s("1")),
        ("w_exp", s("1.5")),
        ("amp_factor", s("3")),
        ("band_offset", s("11")),
        ("n0", s("1")),
        ("n_max", levels.to_string()),
        ("precision", s("256")),
        ("positivity_bits", s("12")),
        ("grid", s("10000")),
        ("random", s("10000")),
        ("seed", s("1")),
        ("r_max", s("3")),
        ("coboundary_bits", s("12")),
        ("coboundary_tol", s("1e-10")),
        ("lower_grid", s("10000")),
        ("displacement_samples", s("1000")),
        ("overlap_balls", s("20")),
        ("overlap_per_ball", s("100")),
        ("coverage_samples", s("200000")),
        ("gamma", s("4")),
        ("tau", s("3")),
        ("starts", s("32")),
        ("draws", s("64")),
        ("floor", s("0.05")),
        ("tol_xtilde", s("1.2")),
        ("tol_singularity", s("2")),
        ("which", s("xtilde,coboundary,lower,stretch,scpa,singularity")),
        ("times", s("1,10,100")),
        ("points", s("10")),
        ("ode_tol", s("1e-10")),
        ("observable", s("all")),
        ("lags", s("1000")),
        ("orbit_len", s("1000000")),
        ("batches", s("100")),
        ("grid_lags", s("8")),
        ("window", s("parzen")),
    ])
}

/// Parses `key=value` lines; `#` starts a comment.
pub fn parse_pairs(text: &str, origin: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| format!("{origin}:{}: expected key=value", i + 1))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn known(key: &str) -> bool {
    KEYS.iter().any(|(k, _)| *k == key)
}

impl RunConfig {
    /// Defaults of `preset`, overridden by `pairs` (checked for unknown keys).
    pub fn from_pairs(pairs: &[(String, String)]) -> Result<Self, String> {
        for (k, _) in pairs {
            if !known(k) {
                return Err(format!("unknown config key '{k}'"));
            }
        }
        let preset = pairs.iter().rev().find(|(k, _)| k == "preset").map_or("desk", |(_, v)| v.as_str());
        let defaults = preset_defaults(preset).ok_or_else(|| format!("unknown preset '{preset}'"))?;
        let mut values: BTreeMap<String, String> = defaults.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        for (k, v) in pairs {
            values.insert(k.clone(), v.clone());
        }
        let cfg = Self { values };
        cfg.validate()?;
        Ok(cfg)
    }

    /// File (optional) then environment then explicit overrides.
    pub fn load(path: Option<&Path>, env: impl IntoIterator<Item = (String, String)>, overrides: &[(String, String)]) -> Result<Self, String> {
        let mut pairs = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| format!("cannot read config {}: {e}", p.display()))?;
                parse_pairs(&text, &p.display().to_string())?
            }
            None => Vec::new(),
        };
        let mut env_pairs: Vec<(String, String)> = env
            .into_iter()
            .filter_map(|(k, v)| k.strip_prefix(ENV_PREFIX).map(|k| (k.to_ascii_lowercase(), v)))
            .collect();
        env_pairs.sort();
        for (k, _) in &env_pairs {
            if !known(k) {
                return Err(format!("unknown environment override {ENV_PREFIX}{}", k.to_ascii_uppercase()));
            }
        }
        pairs.extend(env_pairs);
        pairs.extend(overrides.iter().cloned());
        Self::from_pairs(&pairs)
    }

    pub fn get(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or_else(|| panic!("config key {key} has no default"))
    }

    fn num<T: std::str::FromStr>(&self, key: &str) -> Result<T, String> {
        self.get(key).parse().map_err(|_| format!("config key '{key}': cannot parse '{}'", self.get(key)))
    }

    pub fn u64(&self, key: &str) -> u64 {
        self.num(key).expect("validated")
    }

    pub fn usize(&self, key: &str) -> usize {
        self.num(key).expect("validated")
    }

    pub fn f64(&self, key: &str) -> f64 {
        self.num(key).expect("validated")
    }

    fn validate(&self) -> Result<(), String> {
        let int = |k: &str, lo: u64, hi: u64| -> Result<(), String> {
            let v: u64 = self.num(k)?;
            if v < lo || v > hi {
                return Err(format!("config key '{k}' = {v} outside [{lo}, {hi}]"));
            }
            Ok(())
        };
        let real = |k: &str, lo: f64, hi: f64| -> Result<(), String> {
            let v: f64 = self.num(k)?;
            if !(v.is_finite() && v > lo && v < hi) {
                return Err(format!("config key '{k}' = {v} outside ({lo}, {hi})"));
            }
            Ok(())
        };
        let choice = |k: &str, opts: &[&str]| -> Result<(), String> {
            let v = self.get(k);
            if !opts.contains(&v) {
                return Err(format!("config key '{k}' = '{v}' not one of {}", opts.join(", ")));
            }
            Ok(())
        };
        choice("growth", &["power", "exponential"])?;
        choice("law", &["relaxed", "exponential"])?;
        choice("window", &["parzen", "bartlett"])?;
        int("growth_coef", 1, 1 << 32)?;
        int("growth_exp", 1, 16)?;
        int("first_quotient", 1, 1 << 32)?;
        int("max_level", 1, 8)?;
        int("band_offset", 4, 1000)?;
        int("n0", 1, 8)?;
        int("n_max", 1, 8)?;
        int("precision", 64, 65536)?;
        int("positivity_bits", 8, 20)?;
        int("grid", 1, 10_000_000)?;
        int("random", 0, 10_000_000)?;
        int("seed", 0, u64::MAX)?;
        int("r_max", 0, 6)?;
        int("coboundary_bits", 4, 16)?;
        int("lower_grid", 16, 10_000_000)?;
        int("displacement_samples", 1, 10_000_000)?;
        int("overlap_balls", 1, 100_000)?;
        int("overlap_per_ball", 1, 100_000)?;
        int("coverage_samples", 1, 100_000_000)?;
        int("starts", 1, 100_000)?;
        int("draws", 1, 100_000)?;
        int("points", 1, 1_000_000)?;
        int("lags", 64, 1_000_000)?;
        int("orbit_len", 1, 1_000_000_000)?;
        int("batches", 2, 1_000_000)?;
        int("grid_lags", 0, 10_000)?;
        for k in ["sx", "sy", "w_coef", "amp_factor", "ode_tol", "coboundary_tol", "tol_xtilde", "tol_singularity"] {
            real(k, 0.0, f64::INFINITY)?;
        }
        for k in ["ex", "ey", "w_exp"] {
            real(k, 0.0, 64.0)?;
        }
        real("tau", 1.0, 64.0)?;
        real("gamma", self.f64_checked("tau")?, 64.0)?;
        real("floor", 0.0, 1.0)?;
        if self.usize("n0") > self.usize("n_max") || self.usize("n_max") > self.usize("max_level") {
            return Err("need n0 <= n_max <= max_level".into());
        }
        if self.usize("orbit_len") < self.usize("batches") * (self.usize("lags") + 1) {
            return Err("orbit_len must cover batches*(lags+1) steps".into());
        }
        self.times()?;
        self.which()?;
        self.observable_spec()?;
        Ok(())
    }

    fn f64_checked(&self, key: &str) -> Result<f64, String> {
        self.num(key)
    }

    pub fn times(&self) -> Result<Vec<f64>, String> {
        self.get("times")
            .split(',')
            .map(|t| t.trim().parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| format!("bad time '{t}' in 'times'")))
            .collect()
    }

    pub fn which(&self) -> Result<Vec<String>, String> {
        const CHECKS: [&str; 8] = ["xtilde", "coboundary", "lower", "stretch", "scpa", "overlap", "coverage", "singularity"];
        self.get("which")
            .split(',')
            .map(|w| {
                let w = w.trim();
                if CHECKS.contains(&w) {
                    Ok(w.to_string())
                } else {
                    Err(format!("unknown check '{w}' in 'which'"))
                }
            })
            .collect()
    }

    /// `None` for the whole standard family, else one index or a character.
    pub fn observable_spec(&self) -> Result<ObservableSpec, String> {
        let v = self.get("observable");
        if v == "all" {
            return Ok(ObservableSpec::All);
        }
        if let Some(rest) = v.strip_prefix("char:") {
            let (a, b) = rest.split_once(':').ok_or_else(|| format!("bad observable '{v}'"))?;
            let k1 = a.parse().map_err(|_| format!("bad observable '{v}'"))?;
            let k2 = b.parse().map_err(|_| format!("bad observable '{v}'"))?;
            return Ok(ObservableSpec::Character([k1, k2]));
        }
        match v.parse::<usize>() {
            Ok(i) if i < 5 => Ok(ObservableSpec::Index(i)),
            _ => Err(format!("bad observable '{v}'")),
        }
    }

    pub fn policy(&self) -> GrowthPolicy {
        let max_level = self.usize("max_level");
        let q1 = self.u64("first_quotient");
        match self.get("growth") {
            "exponential" => GrowthPolicy::exponential(max_level, q1),
            _ => {
                let mut p = GrowthPolicy::relaxed(Growth::Power { coef: self.u64("growth_coef"), exp: self.u64("growth_exp") as u32 }, max_level);
                p.first_quotient = q1;
                p
            }
        }
    }

    pub fn regime(&self) -> Regime {
        let law = match self.get("law") {
            "exponential" => AmplitudeLaw::Exponential,
            _ => AmplitudeLaw::Relaxed {
                sx: self.f64("sx"),
                ex: self.f64("ex"),
                sy: self.f64("sy"),
                ey: self.f64("ey"),
                w_coef: self.f64("w_coef"),
                w_exp: self.f64("w_exp"),
            },
        };
        Regime { law, amp_factor: self.f64("amp_factor"), band_offset: self.usize("band_offset") }
    }

    pub fn assemble_options(&self) -> AssembleOptions {
        AssembleOptions { grid_bits: self.u64("positivity_bits") as u32, ..AssembleOptions::default() }
    }

    pub fn sample_options(&self) -> SampleOptions {
        SampleOptions { grid: self.usize("grid"), random: self.usize("random"), seed: self.u64("seed") }
    }

    pub fn correlation_options(&self) -> CorrelationOptions {
        CorrelationOptions { orbit_len: self.usize("orbit_len"), batches: self.usize("batches"), seed: self.u64("seed"), ..CorrelationOptions::default() }
    }

    pub fn window(&self) -> LagWindow {
        match self.get("window") {
            "bartlett" => LagWindow::Bartlett,
            _ => LagWindow::Parzen,
        }
    }

    /// `key=value` lines in key order.
    pub fn echo(&self) -> String {
        self.values.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    pub fn pairs(&self) -> &BTreeMap<String, String> {
        &self.values
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObservableSpec {
    All,
    Index(usize),
    Character([i128; 2]),
}

/// Output directory with a default.
pub fn out_dir(flag: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("slowmix-out"))
}
