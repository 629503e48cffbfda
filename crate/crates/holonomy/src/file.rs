use std::fs;
use std::path::Path;

use torus_measure::{key_value_lines, TorusPoint};

use crate::error::HolonomyError;
use crate::observable::WindowObservable;

fn parse_err(msg: impl Into<String>) -> HolonomyError {
    HolonomyError::Parse(msg.into())
}

/// Parse a tabular window observable from flat `key = value` text.
///
/// Keys: `kind = tabular`, `window`, `harmonics`, optional `alpha`
/// (default 1), one `atom = <coord>` line per alphabet symbol, and one
/// `table = a0 a1 b1 ... aK bK` line per symbol combination, ordered
/// lexicographically in (omega_{-w}, ..., omega_w) with the leftmost
/// position most significant and atoms in declaration order.
pub fn parse_window_str(text: &str) -> Result<WindowObservable, HolonomyError> {
    let pairs = key_value_lines(text).map_err(|e| {
        parse_err(e.to_string().trim_start_matches("measure file: ").to_string())
    })?;
    let mut kind: Option<String> = None;
    let mut window: Option<usize> = None;
    let mut harmonics: Option<usize> = None;
    let mut alpha = 1.0f64;
    let mut atoms: Vec<TorusPoint> = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (key, value) in pairs {
        match key.as_str() {
            "kind" => kind = Some(value),
            "window" => {
                window =
                    Some(value.parse().map_err(|_| parse_err(format!("bad window `{value}`")))?)
            }
            "harmonics" => {
                harmonics =
                    Some(value.parse().map_err(|_| parse_err(format!("bad harmonics `{value}`")))?)
            }
            "alpha" => {
                alpha = value.parse().map_err(|_| parse_err(format!("bad alpha `{value}`")))?
            }
            "atom" => {
                let x: f64 =
                    value.parse().map_err(|_| parse_err(format!("bad atom `{value}`")))?;
                atoms.push(TorusPoint::scalar(x));
            }
            "table" => {
                let row = value
                    .split_whitespace()
                    .map(|tok| {
                        tok.parse::<f64>()
                            .map_err(|_| parse_err(format!("bad table entry `{tok}`")))
                    })
                    .collect::<Result<Vec<f64>, _>>()?;
                rows.push(row);
            }
            other => return Err(parse_err(format!("unknown key `{other}`"))),
        }
    }
    match kind.as_deref() {
        Some("tabular") => {}
        Some(other) => return Err(parse_err(format!("unknown kind `{other}`"))),
        None => return Err(parse_err("missing kind")),
    }
    let window = window.ok_or_else(|| parse_err("missing window"))?;
    let harmonics = harmonics.ok_or_else(|| parse_err("missing harmonics"))?;
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(parse_err(format!("alpha {alpha} outside (0, 1]")));
    }
    WindowObservable::tabular(atoms, window, harmonics, rows, alpha)
}

pub fn parse_window_file(path: impl AsRef<Path>) -> Result<WindowObservable, HolonomyError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|e| parse_err(format!("{}: {e}", path.display())))?;
    parse_window_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::{BiSequence, SkewBiState};
    use approx::assert_abs_diff_eq;

    #[test]
    fn parses_a_memoryless_table() {
        let text = "\
# two atoms, theta-dependent rows
kind = tabular
window = 0
harmonics = 1
alpha = 0.9
atom = 0.0
atom = 0.5
table = 1.0 0.0 0.0
table = 1.0 0.5 -0.25
";
        let phi = parse_window_str(text).unwrap();
        assert_eq!(phi.window(), 0);
        assert_eq!(phi.alpha(), 0.9);
        let state = SkewBiState::new(
            BiSequence::from_slice(vec![TorusPoint::scalar(0.52)]),
            TorusPoint::scalar(0.25),
        );
        // Snaps to the second atom; cos(pi/2) kills a1, sin(pi/2) keeps b1.
        assert_abs_diff_eq!(phi.evaluate_state(&state), 0.75, epsilon = 1e-12);
    }

    #[test]
    fn window_one_needs_eight_rows_for_two_atoms() {
        let mut text = String::from(
            "kind = tabular\nwindow = 1\nharmonics = 0\natom = 0.0\natom = 0.5\n",
        );
        for _ in 0..7 {
            text.push_str("table = 1.0\n");
        }
        let err = parse_window_str(&text).unwrap_err();
        assert!(err.to_string().contains("need 8 table rows"));
        text.push_str("table = 2.0\n");
        let phi = parse_window_str(&text).unwrap();
        // All-second-atom combination selects the last row.
        let state = SkewBiState::new(
            BiSequence::from_slice(vec![TorusPoint::scalar(0.5); 3]),
            TorusPoint::scalar(0.0),
        );
        assert_eq!(phi.evaluate_state(&state), 2.0);
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(parse_window_str("kind = fourier\n").unwrap_err().to_string().contains("unknown kind"));
        assert!(parse_window_str("window = 1\n").unwrap_err().to_string().contains("missing kind"));
        let err = parse_window_str("kind = tabular\nwindow = 0\nharmonics = 0\nalpha = 2.0\natom = 0.0\ntable = 1.0\n")
            .unwrap_err();
        assert!(err.to_string().contains("outside (0, 1]"));
        let err = parse_window_str("spin = up\n").unwrap_err();
        assert_eq!(err.to_string(), "observable file: unknown key `spin`");
    }

    #[test]
    fn reports_missing_files_by_path() {
        let err = parse_window_file("/nonexistent/obs.txt").unwrap_err();
        assert!(err.to_string().contains("/nonexistent/obs.txt"));
    }
}
