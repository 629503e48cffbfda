use crate::error::CliError;
use chain_simulator::StartMode;
use expanding_map::{model_from_expression, CircleMapModel};
use holonomy::WindowObservable;
use sha2::{Digest, Sha256};
use spectral_operator::{observable_preset, parse_observable_file, FourierObservable};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use torus_measure::{key_value_lines, measure_preset, parse_measure_file, TorusMeasure, TorusPoint};

/// A fully resolved experiment: every reference loaded, every number
/// parsed, the effective key set hashed. Runs never read the filesystem
/// again except to write outputs.
pub struct ExperimentConfig {
    pub command: String,
    pub seed: u64,
    pub out: Option<PathBuf>,
    /// Hex SHA-256 of the canonical `key = value` listing (sorted keys,
    /// effective seed, `out` excluded). Stamped on every CSV row.
    pub hash: String,
    pub params: Params,
}

pub enum Params {
    Mixing {
        mu: TorusMeasure,
        phi: FourierObservable,
        k_max: u32,
        tau_grid: Vec<f64>,
        n_list: Vec<u64>,
        grid: usize,
        fit_lo: u64,
        fit_hi: u64,
    },
    DcCheck {
        mu: TorusMeasure,
        k_max: u32,
        tau_grid: Vec<f64>,
    },
    Ldt {
        mu: TorusMeasure,
        phi: FourierObservable,
        epsilons: Vec<f64>,
        n_grid: Vec<u64>,
        trials: u64,
        window_w: usize,
        start: StartMode,
        trace_n_list: Vec<u64>,
        fit_lo: u64,
        fit_hi: u64,
        grid: usize,
    },
    Clt {
        mu: TorusMeasure,
        phi: FourierObservable,
        n: u64,
        trials: u64,
        window_w: usize,
        sigma_scale: f64,
        ks_tol: f64,
        var_lo: f64,
        var_hi: f64,
    },
    Holonomy {
        phi: WindowObservable,
        mu: TorusMeasure,
        n_samples: usize,
        n_pairs: usize,
        mc_states: usize,
        residual_tol: f64,
    },
    Expanding {
        model: CircleMapModel,
        phi_text: String,
        density_tol: f64,
        max_iter: usize,
        n_max: usize,
        clt_n: u64,
        clt_trials: u64,
        ks_tol: f64,
        weight_tol: f64,
        unital_tol: f64,
        weight_points: usize,
    },
}

/// Key-value view of a config file that tracks which keys were consumed, so
/// misspelled or out-of-place keys are reported instead of ignored.
struct Entries {
    values: BTreeMap<String, String>,
    used: std::cell::RefCell<Vec<String>>,
}

impl Entries {
    fn parse(text: &str) -> Result<Self, CliError> {
        let pairs = key_value_lines(text).map_err(|e| {
            let msg = e.to_string();
            CliError(format!(
                "config: {}",
                msg.strip_prefix("measure file: ").unwrap_or(&msg)
            ))
        })?;
        let mut values = BTreeMap::new();
        for (k, v) in pairs {
            if values.insert(k.clone(), v).is_some() {
                return Err(CliError::key(&k, "given twice"));
            }
        }
        Ok(Entries { values, used: std::cell::RefCell::new(Vec::new()) })
    }

    fn get(&self, key: &str) -> Option<&str> {
        let hit = self.values.get(key).map(String::as_str);
        if hit.is_some() {
            self.used.borrow_mut().push(key.to_string());
        }
        hit
    }

    fn require(&self, key: &str) -> Result<&str, CliError> {
        self.get(key).ok_or_else(|| CliError::key(key, "missing"))
    }

    fn parse_as<T: std::str::FromStr>(&self, key: &str, raw: &str) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        raw.parse::<T>().map_err(|e| CliError::key(key, format!("bad value `{raw}`: {e}")))
    }

    fn num<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        match self.get(key) {
            Some(raw) => self.parse_as(key, raw),
            None => Ok(default),
        }
    }

    fn num_required<T: std::str::FromStr>(&self, key: &str) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self.require(key)?;
        self.parse_as(key, raw)
    }

    fn list<T: std::str::FromStr>(&self, key: &str, default: &str) -> Result<Vec<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self.get(key).unwrap_or(default).to_string();
        let items: Result<Vec<T>, CliError> = raw
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| self.parse_as(key, s))
            .collect();
        let items = items?;
        if items.is_empty() {
            return Err(CliError::key(key, "empty list"));
        }
        Ok(items)
    }

    fn finish(&self) -> Result<(), CliError> {
        let used = self.used.borrow();
        for key in self.values.keys() {
            if !used.iter().any(|u| u == key) {
                return Err(CliError::key(key, "unknown key for this command"));
            }
        }
        Ok(())
    }

    /// Canonical text for hashing: sorted `key = value` lines with the
    /// effective seed substituted and the output directory excluded (it is
    /// a destination, not part of the experiment).
    fn canonical(&self, seed: u64) -> String {
        let mut map = self.values.clone();
        map.remove("out");
        map.insert("seed".to_string(), seed.to_string());
        map.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

fn resolve_measure(entries: &Entries, base: &Path) -> Result<TorusMeasure, CliError> {
    let name = entries.require("measure")?;
    if let Some(mu) = measure_preset(name) {
        return Ok(mu);
    }
    let path = base.join(name);
    parse_measure_file(&path).map_err(|e| CliError::key("measure", e))
}

fn resolve_fourier(
    entries: &Entries,
    base: &Path,
    k_max: usize,
) -> Result<FourierObservable, CliError> {
    let name = entries.get("observable").unwrap_or("cos").to_string();
    if let Some(phi) = observable_preset(&name, k_max) {
        return Ok(phi);
    }
    let path = base.join(&name);
    parse_observable_file(&path).map_err(|e| CliError::key("observable", e))
}

fn resolve_start(entries: &Entries) -> Result<StartMode, CliError> {
    let raw = entries.get("start").unwrap_or("stationary").to_string();
    if raw == "stationary" {
        return Ok(StartMode::Stationary);
    }
    match raw.strip_prefix("fixed") {
        Some(rest) if !rest.trim().is_empty() => {
            let coords: Result<Vec<f64>, CliError> = rest
                .split_whitespace()
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|e| CliError::key("start", format!("bad coordinate `{s}`: {e}")))
                })
                .collect();
            Ok(StartMode::Fixed(TorusPoint::new(coords?)))
        }
        _ => Err(CliError::key(
            "start",
            format!("expected `stationary` or `fixed <coords>`, got `{raw}`"),
        )),
    }
}

fn resolve_map(entries: &Entries) -> Result<CircleMapModel, CliError> {
    let name = entries.require("map")?.to_string();
    let grid: usize = entries.num("grid", 2048)?;
    match name.as_str() {
        "doubling" => Ok(CircleMapModel::doubling(grid)),
        "tripling" => Ok(CircleMapModel::tripling(grid)),
        "perturbed2" => {
            let eps: f64 = entries.num_required("eps")?;
            CircleMapModel::perturbed2(eps, grid).map_err(|e| CliError::key("eps", e))
        }
        "expr" => {
            let lift = entries.require("lift")?.to_string();
            let degree: u32 = entries.num_required("degree")?;
            model_from_expression(&lift, degree, grid).map_err(|e| CliError::key("lift", e))
        }
        other => Err(CliError::key(
            "map",
            format!("unknown map `{other}` (doubling, tripling, perturbed2, expr)"),
        )),
    }
}

/// Parse and fully resolve a config. `base` anchors relative references;
/// `seed_override` replaces the file's seed before hashing, so the manifest
/// records what actually ran.
pub fn parse_config(
    text: &str,
    base: &Path,
    seed_override: Option<u64>,
) -> Result<ExperimentConfig, CliError> {
    let entries = Entries::parse(text)?;
    let command = entries.require("command")?.to_string();
    let seed = match seed_override {
        Some(s) => {
            entries.get("seed");
            s
        }
        None => entries.num_required("seed")?,
    };
    let out = entries.get("out").map(|v| base.join(v));

    let params = match command.as_str() {
        "mixing" => {
            let k_max: u32 = entries.num("k_max", 64)?;
            Params::Mixing {
                mu: resolve_measure(&entries, base)?,
                phi: resolve_fourier(&entries, base, k_max as usize)?,
                k_max,
                tau_grid: entries.list("tau_grid", "1, 1.5, 2, 3")?,
                n_list: entries.list("n_list", "1, 2, 5, 10, 20, 50, 100, 200, 500, 1000")?,
                grid: entries.num("grid", 1024)?,
                fit_lo: entries.num("fit_lo", 10)?,
                fit_hi: entries.num("fit_hi", 1000)?,
            }
        }
        "dc-check" => Params::DcCheck {
            mu: resolve_measure(&entries, base)?,
            k_max: entries.num("k_max", 64)?,
            tau_grid: entries.list("tau_grid", "1, 1.5, 2, 3")?,
        },
        "ldt" => {
            let k_max: u32 = entries.num("k_max", 64)?;
            Params::Ldt {
                mu: resolve_measure(&entries, base)?,
                phi: resolve_fourier(&entries, base, k_max as usize)?,
                epsilons: entries.list("epsilons", "0.25")?,
                n_grid: entries.list("n_grid", "50, 100, 200, 400")?,
                trials: entries.num("trials", 10_000)?,
                window_w: entries.num("window_w", 0)?,
                start: resolve_start(&entries)?,
                trace_n_list: entries.list("trace_n_list", "1, 2, 3, 5, 8, 13, 21, 34, 55, 89")?,
                fit_lo: entries.num("fit_lo", 3)?,
                fit_hi: entries.num("fit_hi", 89)?,
                grid: entries.num("grid", 1024)?,
            }
        }
        "clt" => Params::Clt {
            mu: resolve_measure(&entries, base)?,
            phi: resolve_fourier(&entries, base, entries.num("k_max", 64usize)?)?,
            n: entries.num("n", 4096)?,
            trials: entries.num("trials", 20_000)?,
            window_w: entries.num("window_w", 0)?,
            sigma_scale: entries.num("sigma_scale", 1.0)?,
            ks_tol: entries.num("ks_tol", 0.02)?,
            var_lo: entries.num("var_lo", 0.95)?,
            var_hi: entries.num("var_hi", 1.05)?,
        },
        "holonomy" => {
            let name = entries.require("observable")?.to_string();
            let phi = holonomy::parse_window_file(base.join(&name))
                .map_err(|e| CliError::key("observable", e))?;
            Params::Holonomy {
                phi,
                mu: resolve_measure(&entries, base)?,
                n_samples: entries.num("n_samples", 10_000)?,
                n_pairs: entries.num("n_pairs", 1_000)?,
                mc_states: entries.num("mc_states", 100_000)?,
                residual_tol: entries.num("residual_tol", 1e-12)?,
            }
        }
        "expanding" => Params::Expanding {
            model: resolve_map(&entries)?,
            phi_text: entries.get("phi").unwrap_or("cos(2*pi*x)").to_string(),
            density_tol: entries.num("density_tol", 1e-6)?,
            max_iter: entries.num("max_iter", 2000)?,
            n_max: entries.num("n_max", 20)?,
            clt_n: entries.num("clt_n", 512)?,
            clt_trials: entries.num("clt_trials", 2000)?,
            ks_tol: entries.num("ks_tol", 0.03)?,
            weight_tol: entries.num("weight_tol", 1e-6)?,
            unital_tol: entries.num("unital_tol", 1e-10)?,
            weight_points: entries.num("weight_points", 100)?,
        },
        other => {
            return Err(CliError::key(
                "command",
                format!(
                    "unknown command `{other}` \
                     (mixing, ldt, clt, holonomy, expanding, dc-check)"
                ),
            ))
        }
    };

    // The expanding observable must parse even though it is evaluated later.
    if let Params::Expanding { phi_text, .. } = &params {
        expanding_map::parse_expression(phi_text).map_err(|e| CliError::key("phi", e))?;
    }

    entries.finish()?;
    let mut hasher = Sha256::new();
    hasher.update(entries.canonical(seed).as_bytes());
    let hash = format!("{:x}", hasher.finalize());
    Ok(ExperimentConfig { command, seed, out, hash, params })
}

pub fn load_config(path: &Path, seed_override: Option<u64>) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError(format!("config {}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    parse_config(&text, &base, seed_override)
}
