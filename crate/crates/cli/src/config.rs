//! Run configuration: plain-text key=value files plus flag overrides,
//! flags win. The solve stage writes the fully resolved configuration to
//! `run.cfg` in the output directory; later stages read it back so every
//! stage sees identical parameters.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use subsol::certify::Tolerances;
use subsol::pump::PumpConfig;

/// Unvalidated key=value pairs from one source.
pub type RawConfig = BTreeMap<String, String>;

/// Fully resolved run parameters.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub n: usize,
    pub dt: f64,
    pub t_end: f64,
    pub eta: f64,
    pub epsilon: f64,
    pub ic: Option<PathBuf>,
    pub out: PathBuf,
    pub stride: usize,
    pub complete_conjugates: bool,
    pub pump_n_osc: u32,
    pub pump_xi: [i64; 2],
    pub pump_t0: f64,
    pub tolerances: Tolerances,
}

/// Flag-level overrides collected from the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub n: Option<usize>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub eta: Option<f64>,
    pub epsilon: Option<f64>,
    pub ic: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub stride: Option<usize>,
    pub complete_conjugates: bool,
    pub pump_n_osc: Option<u32>,
    pub pump_xi: Option<[i64; 2]>,
    pub pump_t0: Option<f64>,
    pub tolerances: Vec<(String, f64)>,
}

pub fn parse_config_file(path: &Path) -> Result<RawConfig, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    parse_config_text(&text).map_err(|e| format!("{}: {e}", path.display()))
}

pub fn parse_config_text(text: &str) -> Result<RawConfig, String> {
    let mut map = RawConfig::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(format!("line {}: expected key=value, got {raw:?}", lineno + 1));
        };
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn get_parsed<T: std::str::FromStr>(map: &RawConfig, key: &str) -> Result<Option<T>, String> {
    match map.get(key) {
        None => Ok(None),
        Some(raw) => raw
            .parse::<T>()
            .map(Some)
            .map_err(|_| format!("config key {key}: cannot parse {raw:?}")),
    }
}

pub fn parse_xi(raw: &str) -> Result<[i64; 2], String> {
    let parts: Vec<&str> = raw.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("pump_xi must be `k1,k2`, got {raw:?}"));
    }
    let k1 = parts[0].trim().parse().map_err(|_| format!("bad xi component {:?}", parts[0]))?;
    let k2 = parts[1].trim().parse().map_err(|_| format!("bad xi component {:?}", parts[1]))?;
    Ok([k1, k2])
}

impl RunConfig {
    /// Layer raw sources (lowest precedence first), apply flag overrides,
    /// then resolve defaults and the eta/epsilon coupling.
    pub fn resolve(sources: &[RawConfig], over: &Overrides) -> Result<Self, String> {
        let mut merged = RawConfig::new();
        for src in sources {
            for (k, v) in src {
                merged.insert(k.clone(), v.clone());
            }
        }

        let n = over.n.or(get_parsed(&merged, "n")?).unwrap_or(64);
        let dt = over.dt.or(get_parsed(&merged, "dt")?).unwrap_or(1e-3);
        let t_end = over.t_end.or(get_parsed(&merged, "t_end")?).unwrap_or(1.0);
        let stride = over.stride.or(get_parsed(&merged, "stride")?).unwrap_or(10);
        let eta_opt = over.eta.or(get_parsed(&merged, "eta")?);
        let epsilon_opt = over.epsilon.or(get_parsed(&merged, "epsilon")?);
        // eta defaults to epsilon^2/2 so the pump realizes the epsilon
        // bound exactly; with neither given, eta = 0.1
        let (eta, epsilon) = match (eta_opt, epsilon_opt) {
            (Some(eta), Some(eps)) => (eta, eps),
            (Some(eta), None) => (eta, (2.0 * eta.max(0.0)).sqrt()),
            (None, Some(eps)) => (0.5 * eps * eps, eps),
            (None, None) => (0.1, 0.2f64.sqrt()),
        };
        if !(eta >= 0.0) || !eta.is_finite() {
            return Err(format!("eta must be a nonnegative number, got {eta}"));
        }
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(format!("epsilon must be positive, got {epsilon}"));
        }
        if n < 8 || n % 2 != 0 {
            return Err(format!("n must be even and >= 8, got {n}"));
        }
        if !(dt > 0.0) {
            return Err(format!("dt must be positive, got {dt}"));
        }
        if t_end < 0.0 {
            return Err(format!("t_end must be nonnegative, got {t_end}"));
        }
        if stride == 0 {
            return Err("stride must be positive".into());
        }

        let ic = over
            .ic
            .clone()
            .or(merged.get("ic").map(PathBuf::from));
        let out = over
            .out
            .clone()
            .or(merged.get("out").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"));
        let complete_conjugates = over.complete_conjugates
            || get_parsed::<bool>(&merged, "complete_conjugates")?.unwrap_or(false);

        let pump_n_osc = over
            .pump_n_osc
            .or(get_parsed(&merged, "pump_n_osc")?)
            .unwrap_or(4);
        let pump_xi = match (&over.pump_xi, merged.get("pump_xi")) {
            (Some(xi), _) => *xi,
            (None, Some(raw)) => parse_xi(raw)?,
            (None, None) => [1, 0],
        };
        let pump_t0 = over
            .pump_t0
            .or(get_parsed(&merged, "pump_t0")?)
            .unwrap_or(0.25);

        let mut tolerances = Tolerances::default();
        for (key, raw) in &merged {
            if let Some(check) = key.strip_prefix("tolerance.") {
                let value: f64 = raw
                    .parse()
                    .map_err(|_| format!("config key {key}: cannot parse {raw:?}"))?;
                tolerances.set(check, value).map_err(|e| e.to_string())?;
            }
        }
        for (check, value) in &over.tolerances {
            tolerances.set(check, *value).map_err(|e| e.to_string())?;
        }

        Ok(Self {
            n,
            dt,
            t_end,
            eta,
            epsilon,
            ic,
            out,
            stride,
            complete_conjugates,
            pump_n_osc,
            pump_xi,
            pump_t0,
            tolerances,
        })
    }

    pub fn pump_config(&self) -> Result<PumpConfig, String> {
        PumpConfig::new(self.pump_n_osc, self.pump_xi, self.eta, self.pump_t0)
            .map_err(|e| e.to_string())
    }

    /// Serialize the resolved configuration, deterministic order.
    pub fn to_key_values(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "n={}", self.n);
        let _ = writeln!(s, "dt={}", self.dt);
        let _ = writeln!(s, "t_end={}", self.t_end);
        let _ = writeln!(s, "eta={}", self.eta);
        let _ = writeln!(s, "epsilon={}", self.epsilon);
        if let Some(ic) = &self.ic {
            let _ = writeln!(s, "ic={}", ic.display());
        }
        // the output directory is where this file lives; recording it
        // would break relocated runs and per-directory comparisons
        let _ = writeln!(s, "stride={}", self.stride);
        let _ = writeln!(s, "complete_conjugates={}", self.complete_conjugates);
        let _ = writeln!(s, "pump_n_osc={}", self.pump_n_osc);
        let _ = writeln!(s, "pump_xi={},{}", self.pump_xi[0], self.pump_xi[1]);
        let _ = writeln!(s, "pump_t0={}", self.pump_t0);
        let t = &self.tolerances;
        let _ = writeln!(s, "tolerance.linear_system_2d={}", t.linear_system_2d);
        let _ = writeln!(s, "tolerance.linear_system_3d={}", t.linear_system_3d);
        let _ = writeln!(s, "tolerance.strict_subsolution={}", t.strict_subsolution);
        let _ = writeln!(s, "tolerance.ei_x3={}", t.ei_x3);
        let _ = writeln!(s, "tolerance.energy_budget={}", t.budget_equality);
        let _ = writeln!(s, "tolerance.energy_conservation={}", t.energy_conservation);
        let _ = writeln!(s, "tolerance.initial_closeness={}", t.initial_closeness_slack);
        s
    }

    pub fn write_resolved(&self) -> Result<PathBuf, String> {
        let path = self.out.join("run.cfg");
        std::fs::write(&path, self.to_key_values())
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
        Ok(path)
    }

    /// Load `run.cfg` from the output directory as a base layer.
    pub fn load_resolved(out: &Path) -> Result<RawConfig, String> {
        let path = out.join("run.cfg");
        if !path.exists() {
            return Err(format!(
                "missing {}; run `subsol solve2d` first",
                path.display()
            ));
        }
        parse_config_file(&path)
    }
}
