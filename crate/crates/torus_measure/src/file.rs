//! Measure definition files: flat `key = value` text, `#` comments.
//!
//! ```text
//! kind = atomic
//! dim = 1
//! atom = 0.0 0.5                     # coordinates..., then weight
//! atom = 0.6180339887498949 0.5
//! ```
//!
//! ```text
//! kind = density
//! dim = 1
//! grid = 1024
//! preset = lebesgue                  # or: values = v0 v1 v2 ...
//! ```
//!
//! ```text
//! kind = mixture
//! t = 0.25
//! first = two-atom-golden            # preset name or path to another file
//! second = lebesgue
//! ```
//!
//! Atom weights must sum to 1 within 1e-9; accepted weights are then
//! renormalized exactly so the constructed measure meets the stricter 1e-12
//! constructor invariant.

use std::path::Path;

use crate::error::TorusMeasureError;
use crate::measure::TorusMeasure;
use crate::point::TorusPoint;

/// Parser-level slack on the atom weight sum; anything worse is a data error.
pub const FILE_WEIGHT_SUM_TOL: f64 = 1e-9;

/// Resolve a built-in measure preset by name.
pub fn measure_preset(name: &str) -> Option<TorusMeasure> {
    match name {
        "dirac" => Some(TorusMeasure::dirac(TorusPoint::scalar(0.0))),
        "two-atom-golden" => Some(TorusMeasure::two_atom_golden()),
        "lebesgue" => Some(TorusMeasure::lebesgue(1)),
        _ => None,
    }
}

/// Split a file into (key, value) pairs, stripping comments and blanks.
/// Shared by every flat-text format in the workspace.
pub fn key_value_lines(text: &str) -> Result<Vec<(String, String)>, TorusMeasureError> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            TorusMeasureError::Parse(format!("line {}: expected `key = value`", lineno + 1))
        })?;
        out.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(out)
}

fn parse_floats(key: &str, value: &str) -> Result<Vec<f64>, TorusMeasureError> {
    value
        .split_whitespace()
        .map(|tok| {
            tok.parse::<f64>().map_err(|_| {
                TorusMeasureError::Parse(format!("key `{key}`: `{tok}` is not a number"))
            })
        })
        .collect()
}

fn get_one<'a>(
    pairs: &'a [(String, String)],
    key: &str,
) -> Result<&'a str, TorusMeasureError> {
    let mut found = None;
    for (k, v) in pairs {
        if k == key {
            if found.is_some() {
                return Err(TorusMeasureError::Parse(format!("key `{key}` given twice")));
            }
            found = Some(v.as_str());
        }
    }
    found.ok_or_else(|| TorusMeasureError::Parse(format!("missing key `{key}`")))
}

fn get_opt<'a>(pairs: &'a [(String, String)], key: &str) -> Option<&'a str> {
    pairs.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
}

/// Parse a measure from file contents. `base_dir` resolves mixture component
/// paths; preset names are tried first.
pub fn parse_measure_str(
    text: &str,
    base_dir: Option<&Path>,
) -> Result<TorusMeasure, TorusMeasureError> {
    let pairs = key_value_lines(text)?;
    let kind = get_one(&pairs, "kind")?;
    match kind {
        "atomic" => {
            let dim: usize = get_one(&pairs, "dim")?
                .parse()
                .map_err(|_| TorusMeasureError::Parse("key `dim`: not an integer".into()))?;
            let mut atoms = Vec::new();
            for (k, v) in &pairs {
                if k != "atom" {
                    continue;
                }
                let nums = parse_floats("atom", v)?;
                if nums.len() != dim + 1 {
                    return Err(TorusMeasureError::Parse(format!(
                        "key `atom`: expected {dim} coordinates plus a weight, got {} numbers",
                        nums.len()
                    )));
                }
                let (coords, w) = nums.split_at(dim);
                atoms.push((TorusPoint::new(coords.to_vec()), w[0]));
            }
            if atoms.is_empty() {
                return Err(TorusMeasureError::Parse("atomic measure with no `atom` lines".into()));
            }
            let total: f64 = atoms.iter().map(|&(_, w)| w).sum();
            if (total - 1.0).abs() > FILE_WEIGHT_SUM_TOL {
                return Err(TorusMeasureError::Parse(format!(
                    "key `atom`: weights sum to {total}, not 1"
                )));
            }
            // Renormalize exactly so the constructor's 1e-12 invariant holds.
            for (_, w) in &mut atoms {
                *w /= total;
            }
            TorusMeasure::atomic(atoms)
        }
        "density" => {
            let dim: usize = get_one(&pairs, "dim")?
                .parse()
                .map_err(|_| TorusMeasureError::Parse("key `dim`: not an integer".into()))?;
            let grid: usize = get_one(&pairs, "grid")?
                .parse()
                .map_err(|_| TorusMeasureError::Parse("key `grid`: not an integer".into()))?;
            if let Some(name) = get_opt(&pairs, "preset") {
                return match name {
                    "lebesgue" => Ok(TorusMeasure::lebesgue_with_resolution(dim, grid)),
                    other => Err(TorusMeasureError::Parse(format!(
                        "key `preset`: unknown density preset `{other}`"
                    ))),
                };
            }
            let mut values = Vec::new();
            for (k, v) in &pairs {
                if k == "values" {
                    values.extend(parse_floats("values", v)?);
                }
            }
            if values.is_empty() {
                return Err(TorusMeasureError::Parse(
                    "density needs `preset` or `values`".into(),
                ));
            }
            TorusMeasure::density(vec![grid; dim], values)
        }
        "mixture" => {
            let t: f64 = get_one(&pairs, "t")?
                .parse()
                .map_err(|_| TorusMeasureError::Parse("key `t`: not a number".into()))?;
            let first = resolve_component(get_one(&pairs, "first")?, base_dir)?;
            let second = resolve_component(get_one(&pairs, "second")?, base_dir)?;
            TorusMeasure::mixture(t, first, second)
        }
        other => Err(TorusMeasureError::Parse(format!(
            "key `kind`: unknown measure kind `{other}`"
        ))),
    }
}

fn resolve_component(
    spec: &str,
    base_dir: Option<&Path>,
) -> Result<TorusMeasure, TorusMeasureError> {
    if let Some(mu) = measure_preset(spec) {
        return Ok(mu);
    }
    let path = match base_dir {
        Some(dir) => dir.join(spec),
        None => Path::new(spec).to_path_buf(),
    };
    parse_measure_file(&path)
}

pub fn parse_measure_file(path: &Path) -> Result<TorusMeasure, TorusMeasureError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        TorusMeasureError::Parse(format!("cannot read {}: {e}", path.display()))
    })?;
    parse_measure_str(&text, path.parent())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_two_atom_file() {
        let text = "\
# golden two-atom measure
kind = atomic
dim = 1
atom = 0.0 0.5
atom = 0.6180339887498949 0.5
";
        let mu = parse_measure_str(text, None).unwrap();
        let want = TorusMeasure::two_atom_golden();
        for k in 1..8i64 {
            let d = (mu.fourier_coefficient(&[k]) - want.fourier_coefficient(&[k])).norm();
            assert!(d < 1e-15);
        }
    }

    #[test]
    fn renormalizes_weights_inside_the_coarse_gate() {
        let text = "kind = atomic\ndim = 1\natom = 0.1 0.5000000001\natom = 0.7 0.4999999998\n";
        let mu = parse_measure_str(text, None).unwrap();
        match mu {
            TorusMeasure::Atomic { atoms } => {
                let total: f64 = atoms.iter().map(|&(_, w)| w).sum();
                assert!((total - 1.0).abs() <= 1e-12);
            }
            _ => panic!("expected atomic"),
        }
    }

    #[test]
    fn rejects_weights_outside_the_gate() {
        let text = "kind = atomic\ndim = 1\natom = 0.1 0.6\natom = 0.7 0.5\n";
        let err = parse_measure_str(text, None).unwrap_err();
        assert!(err.to_string().contains("weights sum"), "{err}");
    }

    #[test]
    fn parses_density_preset_and_mixture_of_presets() {
        let mu = parse_measure_str("kind = density\ndim = 1\ngrid = 256\npreset = lebesgue\n", None)
            .unwrap();
        assert!(mu.fourier_coefficient(&[2]).norm() < 1e-12);

        let mix = parse_measure_str(
            "kind = mixture\nt = 0.25\nfirst = two-atom-golden\nsecond = lebesgue\n",
            None,
        )
        .unwrap();
        let gold = TorusMeasure::two_atom_golden();
        let want = gold.fourier_coefficient(&[3]) * 0.25;
        assert!((mix.fourier_coefficient(&[3]) - want).norm() < 1e-12);
    }

    #[test]
    fn error_messages_name_the_offending_key() {
        let err = parse_measure_str("kind = atomic\ndim = 1\n", None).unwrap_err();
        assert!(err.to_string().contains("atom"), "{err}");
        let err = parse_measure_str("dim = 1\n", None).unwrap_err();
        assert!(err.to_string().contains("`kind`"), "{err}");
        let err = parse_measure_str("kind = atomic\ndim = one\natom = 0 1\n", None).unwrap_err();
        assert!(err.to_string().contains("`dim`"), "{err}");
    }
}
