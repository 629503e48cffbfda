//! Observable definition files: flat `key = value` text, `#` comments.
//!
//! Preset form:
//!
//! ```text
//! preset = sum_cos_k2
//! k_max = 64
//! ```
//!
//! Literal form (lattice point coordinates, then real and imaginary part):
//!
//! ```text
//! dim = 1
//! coeff = 1 0.5 0.0
//! coeff = -1 0.5 0.0
//! ```

use num_complex::Complex64;
use torus_measure::key_value_lines;

use crate::error::SpectralError;
use crate::observable::{observable_preset, FourierObservable};

pub fn parse_observable_str(text: &str) -> Result<FourierObservable, SpectralError> {
    let pairs = key_value_lines(text).map_err(|e| SpectralError::Parse(e.to_string()))?;
    let find = |key: &str| pairs.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());

    if let Some(name) = find("preset") {
        let k_max = match find("k_max") {
            Some(v) => v
                .parse::<usize>()
                .map_err(|_| SpectralError::Parse("key `k_max`: not an integer".into()))?,
            None => 1,
        };
        return observable_preset(name, k_max).ok_or_else(|| {
            SpectralError::Parse(format!("key `preset`: unknown observable preset `{name}`"))
        });
    }

    let dim: usize = find("dim")
        .ok_or_else(|| SpectralError::Parse("missing key `dim` (or `preset`)".into()))?
        .parse()
        .map_err(|_| SpectralError::Parse("key `dim`: not an integer".into()))?;
    let mut coeffs: Vec<(Vec<i64>, Complex64)> = Vec::new();
    for (k, v) in &pairs {
        if k != "coeff" {
            continue;
        }
        let toks: Vec<&str> = v.split_whitespace().collect();
        if toks.len() != dim + 2 {
            return Err(SpectralError::Parse(format!(
                "key `coeff`: expected {dim} lattice coordinates plus re and im, got {} fields",
                toks.len()
            )));
        }
        let lattice = toks[..dim]
            .iter()
            .map(|t| {
                t.parse::<i64>().map_err(|_| {
                    SpectralError::Parse(format!("key `coeff`: `{t}` is not an integer"))
                })
            })
            .collect::<Result<Vec<i64>, _>>()?;
        let re = toks[dim].parse::<f64>().map_err(|_| {
            SpectralError::Parse(format!("key `coeff`: `{}` is not a number", toks[dim]))
        })?;
        let im = toks[dim + 1].parse::<f64>().map_err(|_| {
            SpectralError::Parse(format!("key `coeff`: `{}` is not a number", toks[dim + 1]))
        })?;
        coeffs.push((lattice, Complex64::new(re, im)));
    }
    if coeffs.is_empty() {
        return Err(SpectralError::Parse(
            "observable needs `preset` or `coeff` lines".into(),
        ));
    }
    FourierObservable::from_pairs(dim, &coeffs)
}

pub fn parse_observable_file(path: &std::path::Path) -> Result<FourierObservable, SpectralError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| SpectralError::Parse(format!("cannot read {}: {e}", path.display())))?;
    parse_observable_str(&text)
}
