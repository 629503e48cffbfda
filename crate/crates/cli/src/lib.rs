//! Batch experiment runner: resolves a flat key = value config into one of
//! the six experiment pipelines, runs it on a fixed-size worker pool, and
//! writes CSV data, a summary, and a checksummed manifest into the run
//! directory. All randomness flows from the config's master seed through
//! counter-based per-trial streams, so reruns reproduce the data files
//! byte for byte at any worker count.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

use std::path::{Path, PathBuf};
use std::time::Instant;

use error::CliError;
use output::RunDir;

/// Execute a config file end to end. Returns the process exit code:
/// 0 all checks passed, 2 some verdict failed. Config and IO problems
/// surface as `Err` and map to exit 1.
pub fn run(
    config_path: &Path,
    out_override: Option<PathBuf>,
    workers: usize,
    seed_override: Option<u64>,
) -> Result<i32, CliError> {
    let cfg = config::load_config(config_path, seed_override)?;
    let out_dir = out_override
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("runs").join(&cfg.command));
    let mut dir = RunDir::create(&out_dir, cfg.seed, &cfg.hash)?;
    println!(
        "{}: seed {}, config {}, writing to {}",
        cfg.command,
        cfg.seed,
        &cfg.hash[..12],
        out_dir.display()
    );

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError(format!("worker pool: {e}")))?;
    let effective_workers = pool.current_num_threads();
    let start = Instant::now();
    let outcome = pool.install(|| experiments::run_experiment(&cfg, &mut dir))?;
    let wall = start.elapsed().as_secs_f64();
    dir.write_manifest(wall, effective_workers)?;

    println!("verdict: {}", outcome.verdict);
    Ok(if outcome.pass { 0 } else { 2 })
}

/// Built-in definitions accepted by config references. The text is stable
/// across runs so scripts can diff it.
pub fn list_presets() -> String {
    concat!(
        "measures (measure = <name>):\n",
        "  dirac            point mass at 0: every Fourier coefficient equals 1, so nothing mixes\n",
        "  two-atom-golden  half mass at 0, half at the golden mean conjugate; badly approximable spectrum\n",
        "  lebesgue         uniform on the circle; every nonzero mode dies in one step\n",
        "observables (observable = <name>):\n",
        "  cos              cos(2 pi theta)\n",
        "  sum_cos_k2       sum over k <= k_max of cos(2 pi k theta) / k^2\n",
        "  triangle         triangle wave through its odd-harmonic Fourier coefficients up to k_max\n",
        "maps (map = <name>):\n",
        "  doubling         x -> 2x mod 1; Lebesgue measure is invariant\n",
        "  tripling         x -> 3x mod 1; Lebesgue measure is invariant\n",
        "  perturbed2       x -> 2x + eps sin(2 pi x)/(2 pi) mod 1; set eps with `eps = ...`\n",
        "  expr             lift given by `lift = <formula in x>` with `degree = ...`;\n",
        "                   grammar: + - * / ( ) numbers x pi sin cos\n",
    )
    .to_string()
}
