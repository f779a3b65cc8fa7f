//! Command-line driver: computes invariant densities, runs parameter
//! sweeps, fits Hölder exponents, evaluates entropies, verifies the
//! closed-form comparison bounds, and runs the operator property suites.
//!
//! Exit codes: 0 on success, 1 on validation errors or failed property
//! checks (diagnostic on stderr), 2 on solver non-convergence.

mod svg;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use ulam2d::analysis::{
    birkhoff_entropy, entropy, holder_fit, l1_distance, parameter_grid, random_parameter_pairs,
    read_pairs_csv, spectral_projection, sweep, verify_bounds, write_pairs_csv, write_sweep_csv,
    BoundReport,
};
use ulam2d::bv::{composition_ratio, ly_check_with_matrix, sobolev_ratio, TestSuite};
use ulam2d::maps::{comparison_map, omega, tau, tent_family, TentParams};
use ulam2d::ulam::{
    duality_check, fmt_f64, l1_norm, transfer_matrix, write_density_csv, UlamPartition,
};

#[derive(Parser)]
#[command(
    name = "ulam2d",
    about = "Invariant densities and entropies of two-dimensional tent maps via exact Ulam discretization",
    after_help = "Thread count can be pinned with the RAYON_NUM_THREADS environment \
                  variable; all outputs are byte-identical for any thread count."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the stationary density at one parameter and write it as CSV.
    Density {
        #[arg(long)]
        t: f64,
        /// Grid resolution (even, >= 2).
        #[arg(long, default_value_t = 128)]
        grid: usize,
        #[arg(long)]
        out: PathBuf,
        /// Optional SVG heatmap path.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Sweep a parameter range: densities, entropies, pairwise distances.
    /// Writes sweep.csv, pairs.csv and per-parameter density CSVs into OUT.
    Sweep {
        /// Lower end of the parameter range (defaults to τ).
        #[arg(long)]
        t_min: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        t_max: f64,
        #[arg(long, default_value_t = 17)]
        steps: usize,
        #[arg(long, default_value_t = 128)]
        grid: usize,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a power law to (gap, distance) pairs from a pairs CSV.
    Holder {
        #[arg(long)]
        pairs: PathBuf,
        /// Distances at or below this floor are excluded from the fit.
        #[arg(long, default_value_t = 1e-3)]
        min_distance: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Entropy at one parameter: Jacobian integrals and a Birkhoff average.
    Entropy {
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 128)]
        grid: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Verify the five comparison bounds over grid pairs plus random pairs.
    VerifyBounds {
        #[arg(long)]
        t_min: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        t_max: f64,
        #[arg(long, default_value_t = 17)]
        steps: usize,
        #[arg(long, default_value_t = 100)]
        random_pairs: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Lasota–Yorke check over a parameter grid; fails if any θ ≥ 1.
    CheckLy {
        #[arg(long)]
        t_min: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        t_max: f64,
        #[arg(long, default_value_t = 17)]
        steps: usize,
        #[arg(long, default_value_t = 128)]
        grid: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Number of operator applications per sample.
        #[arg(long, default_value_t = 6)]
        ell: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the operator, variation and projection property suites.
    CheckOps {
        #[arg(long, default_value_t = 0.95)]
        t: f64,
        #[arg(long, default_value_t = 128)]
        grid: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            eprintln!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                ulam2d::Error::NonConvergence { .. } => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

/// Writes via a temp file in the same directory and renames into place.
fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

fn json_bytes<T: serde::Serialize>(value: &T) -> ulam2d::Result<Vec<u8>> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text.into_bytes())
}

fn grid_range(t_min: Option<f64>, t_max: f64, steps: usize) -> ulam2d::Result<Vec<f64>> {
    let lo = t_min.unwrap_or_else(tau);
    TentParams::new(lo)?;
    TentParams::new(t_max)?;
    if steps < 2 || lo >= t_max {
        return Err(ulam2d::Error::InvalidMap(format!(
            "need steps >= 2 and t_min < t_max, got steps = {steps}, range [{lo}, {t_max}]"
        )));
    }
    Ok(parameter_grid(lo, t_max, steps))
}

fn run(command: Command) -> ulam2d::Result<ExitCode> {
    match command {
        Command::Density { t, grid, out, svg } => {
            let params = TentParams::new(t)?;
            let part = UlamPartition::build(&omega(), grid)?;
            let mut matrix = transfer_matrix(&tent_family(params), &part)?;
            matrix.t_param = Some(t);
            let rho = matrix.stationary_density(&part)?;
            let mut buf = Vec::new();
            write_density_csv(&mut buf, &part, &rho)?;
            write_atomic(&out, &buf)?;
            if let Some(svg_path) = svg {
                write_atomic(&svg_path, svg::render_svg_heatmap(&part, &rho).as_bytes())?;
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Sweep {
            t_min,
            t_max,
            steps,
            grid,
            out,
        } => {
            let t_grid = grid_range(t_min, t_max, steps)?;
            let result = sweep(&t_grid, grid)?;
            let part = UlamPartition::build(&omega(), grid)?;
            fs::create_dir_all(&out)?;
            let mut density_files = Vec::with_capacity(t_grid.len());
            for (k, rho) in result.densities.iter().enumerate() {
                let name = format!("density_{k:03}.csv");
                let mut buf = Vec::new();
                write_density_csv(&mut buf, &part, rho)?;
                write_atomic(&out.join(&name), &buf)?;
                density_files.push(name);
            }
            let mut buf = Vec::new();
            write_sweep_csv(&mut buf, &result, &part, &density_files)?;
            write_atomic(&out.join("sweep.csv"), &buf)?;
            let mut buf = Vec::new();
            write_pairs_csv(&mut buf, &result)?;
            write_atomic(&out.join("pairs.csv"), &buf)?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Holder {
            pairs,
            min_distance,
            out,
        } => {
            let text = fs::read_to_string(&pairs)?;
            let data = read_pairs_csv(&text)?;
            let fit = holder_fit(&data, min_distance)?;
            write_atomic(&out, &json_bytes(&fit)?)?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Entropy { t, grid, seed, out } => {
            let params = TentParams::new(t)?;
            let part = UlamPartition::build(&omega(), grid)?;
            let mut matrix = transfer_matrix(&tent_family(params), &part)?;
            matrix.t_param = Some(t);
            let rho = matrix.stationary_density(&part)?;
            let (h_leb, h_meas) = entropy(params, &rho, &part)?;
            let birkhoff = birkhoff_entropy(params, 64, 1000, seed)?;
            let report = serde_json::json!({
                "t": t,
                "grid_n": grid,
                "seed": seed,
                "entropy_lebesgue": h_leb,
                "entropy_measure": h_meas,
                "birkhoff_estimate": birkhoff,
            });
            write_atomic(&out, &json_bytes(&report)?)?;
            Ok(ExitCode::SUCCESS)
        }

        Command::VerifyBounds {
            t_min,
            t_max,
            steps,
            random_pairs,
            seed,
            out,
        } => {
            let t_grid = grid_range(t_min, t_max, steps)?;
            let mut reports: Vec<BoundReport> = Vec::new();
            for hi in 1..t_grid.len() {
                for lo in 0..hi {
                    reports.push(verify_bounds(
                        TentParams::new(t_grid[hi])?,
                        TentParams::new(t_grid[lo])?,
                    ));
                }
            }
            for (a, b) in random_parameter_pairs(seed, random_pairs) {
                reports.push(verify_bounds(a, b));
            }
            write_atomic(&out, &json_bytes(&reports)?)?;
            let violations = reports.iter().filter(|r| !r.all_satisfied()).count();
            if violations > 0 {
                eprintln!("{violations} pair(s) violate a comparison bound");
                return Ok(ExitCode::from(1));
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::CheckLy {
            t_min,
            t_max,
            steps,
            grid,
            seed,
            ell,
            out,
        } => {
            let t_grid = grid_range(t_min, t_max, steps)?;
            let part = UlamPartition::build(&omega(), grid)?;
            let suite = TestSuite::generate(seed, &part, 20);
            let mut reports = Vec::with_capacity(t_grid.len());
            for &t in &t_grid {
                let params = TentParams::new(t)?;
                let matrix = transfer_matrix(&tent_family(params), &part)?;
                reports.push(ly_check_with_matrix(&matrix, t, &part, &suite, ell)?);
            }
            write_atomic(&out, &json_bytes(&reports)?)?;
            let expanding = reports.iter().filter(|r| r.theta_hat >= 1.0).count();
            if expanding > 0 {
                eprintln!("{expanding} parameter(s) have theta_hat >= 1");
                return Ok(ExitCode::from(1));
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::CheckOps { t, grid, seed } => {
            let ok = run_check_ops(t, grid, seed)?;
            Ok(if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

/// Property suites behind `check-ops`: transfer-operator identities
/// (duality, contraction, positivity, invariance), the composition and
/// Sobolev ratio ceilings, and the spectral-projection identities.
/// Prints one PASS/FAIL line per check.
fn run_check_ops(t: f64, grid: usize, seed: u64) -> ulam2d::Result<bool> {
    let params = TentParams::new(t)?;
    let part = UlamPartition::build(&omega(), grid)?;
    let map = tent_family(params);
    let matrix = transfer_matrix(&map, &part)?;
    let suite = TestSuite::generate(seed, &part, 20);
    let mut all_ok = true;
    let mut check = |name: &str, ok: bool, detail: String| {
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        all_ok &= ok;
    };

    // Row-stochasticity.
    let worst_row = matrix
        .row_sums()
        .iter()
        .map(|s| (s - 1.0).abs())
        .fold(0.0, f64::max);
    check(
        "stochastic-rows",
        worst_row <= 1e-10,
        format!("max |row sum - 1| = {}", fmt_f64(worst_row)),
    );

    // Duality: integral preservation (f constant) and quadrature form.
    let ones = vec![1.0; part.len()];
    let defect_const = duality_check(&map, &part, &matrix, &ones, &suite.functions[0].values);
    check(
        "duality-constant",
        defect_const <= 1e-12,
        format!("defect = {}", fmt_f64(defect_const)),
    );
    let half: Vec<f64> = part
        .centroids()
        .iter()
        .map(|c| if c.x < 1.0 { 1.0 } else { 0.0 })
        .collect();
    let defect_half = duality_check(&map, &part, &matrix, &half, &ones);
    check(
        "duality-quadrature",
        defect_half <= 1e-2,
        format!("defect = {}", fmt_f64(defect_half)),
    );

    // Contraction, mass conservation, positivity on seeded signed inputs.
    let mut rng_state = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
    let mut next_signed = |len: usize| -> Vec<f64> {
        (0..len)
            .map(|_| {
                // xorshift64*, enough for test vectors.
                rng_state ^= rng_state >> 12;
                rng_state ^= rng_state << 25;
                rng_state ^= rng_state >> 27;
                let u =
                    (rng_state.wrapping_mul(0x2545F4914F6CDD1D) >> 11) as f64 / (1u64 << 53) as f64;
                2.0 * u - 1.0
            })
            .collect()
    };
    let mut contraction_ok = true;
    let mut mass_ok = true;
    let mut positivity_ok = true;
    for _ in 0..100 {
        let f = next_signed(part.len());
        let lf = matrix.apply(&part, &f);
        contraction_ok &= l1_norm(&lf, &part) <= l1_norm(&f, &part) + 1e-12;
        let mass_in: f64 = f.iter().zip(part.areas()).map(|(v, a)| v * a).sum();
        let mass_out: f64 = lf.iter().zip(part.areas()).map(|(v, a)| v * a).sum();
        mass_ok &= (mass_in - mass_out).abs() <= 1e-12;
        let abs_f: Vec<f64> = f.iter().map(|v| v.abs()).collect();
        positivity_ok &= matrix.apply(&part, &abs_f).iter().all(|&v| v >= 0.0);
    }
    check(
        "contraction",
        contraction_ok,
        "L1 non-expansive on 100 signed inputs".into(),
    );
    check(
        "mass-conservation",
        mass_ok,
        "signed mass preserved to 1e-12".into(),
    );
    check(
        "positivity",
        positivity_ok,
        "nonnegative inputs stay nonnegative".into(),
    );

    // Invariance of the computed density.
    let rho = matrix.stationary_density(&part)?;
    let lrho = matrix.apply(&part, &rho.values);
    let residual: f64 = lrho
        .iter()
        .zip(&rho.values)
        .zip(part.areas())
        .map(|((a, b), area)| (a - b).abs() * area)
        .sum();
    check(
        "invariance",
        residual <= 1e-10 && (rho.mass(&part) - 1.0).abs() <= 1e-10,
        format!("residual = {}", fmt_f64(residual)),
    );

    // Composition-estimate ratios over the suite and several pairs.
    let tau_v = tau();
    let mut av_max: f64 = 0.0;
    for &(a, b) in &[(1.0, 0.95), (0.97, 0.89), (1.0, tau_v)] {
        let pa = TentParams::new(a)?;
        let pb = TentParams::new(b)?;
        for branch in 0..2 {
            let cm = comparison_map(pa, pb, branch)?;
            for f in &suite.functions {
                av_max = av_max.max(composition_ratio(&f.values, &cm, &part).value());
            }
        }
    }
    check(
        "composition-estimate",
        av_max <= 10.0,
        format!("max ratio = {av_max:.4}"),
    );

    // Sobolev ratios over the suite.
    let mut sob_max: f64 = 0.0;
    for f in &suite.functions {
        sob_max = sob_max.max(sobolev_ratio(&f.values, &part)?);
    }
    check(
        "sobolev",
        sob_max <= 0.3,
        format!("max ratio = {sob_max:.4}"),
    );

    // Projection identities.
    let f = &suite.functions[1].values;
    let once = spectral_projection(&rho, f, &part);
    let twice = spectral_projection(&rho, &once, &part);
    let idem = once
        .iter()
        .zip(&twice)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    check(
        "projection-idempotent",
        idem <= 1e-12,
        format!("max |Π²f - Πf| = {}", fmt_f64(idem)),
    );

    let sineq = TentParams::new((t - 0.05).max(tau_v))?;
    let matrix_s = transfer_matrix(&tent_family(sineq), &part)?;
    let rho_s = matrix_s.stationary_density(&part)?;
    let lhs = l1_distance(&rho_s, &rho, &part)?;
    let pi_s = spectral_projection(&rho_s, &rho_s.values, &part);
    let pi_t = spectral_projection(&rho, &rho_s.values, &part);
    let rhs: f64 = pi_s
        .iter()
        .zip(&pi_t)
        .zip(part.areas())
        .map(|((a, b), area)| (a - b).abs() * area)
        .sum();
    check(
        "projection-bridge",
        (lhs - rhs).abs() <= 1e-12,
        format!("|lhs - rhs| = {}", fmt_f64((lhs - rhs).abs())),
    );

    Ok(all_ok)
}
