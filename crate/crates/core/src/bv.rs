//! Discrete bounded-variation machinery for grid functions, and numerical
//! checks of the variation inequalities the transfer-operator theory runs
//! on: the composition estimate `∫|f∘ψ − f| ≤ C‖ψ−id‖₀ V(f)`, the Sobolev
//! inequality `‖f‖_p ≤ C·V(f)` (p = 2 in the plane), and the Lasota–Yorke
//! inequality `V(L^ℓ f) ≤ θ·V(f) + M·‖f‖₁`.
//!
//! For a piecewise-constant function on partition cells the variation is the
//! edge-difference form
//!
//! ```text
//! V(f) = Σ_{adjacent i,j} |f_i − f_j|·|∂Q_i ∩ ∂Q_j|  +  Σ_i |f_i|·|∂Q_i ∩ ∂Ω|,
//! ```
//!
//! which is exact on this function class: jumps across interior edges plus
//! the boundary trace. Note this is the anisotropic (grid-direction) total
//! variation; an indicator whose boundary runs off the grid axes measures
//! its staircase length, not its Euclidean perimeter.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{Kahan, Point2, Polygon};
use crate::maps::{tent_family, ComparisonMap, TentParams};
use crate::ulam::{l1_norm, transfer_matrix, TransferMatrix, UlamPartition};
use crate::{Error, Result};

/// Discrete variation of grid values: interior jumps weighted by shared edge
/// lengths plus the boundary trace. Nonnegative; zero iff `f ≡ 0`.
pub fn discrete_variation(f: &[f64], part: &UlamPartition) -> f64 {
    let mut acc = Kahan::new();
    for &(i, j, len) in part.adjacency() {
        acc.add((f[i] - f[j]).abs() * len);
    }
    for (v, b) in f.iter().zip(part.boundary_lengths()) {
        acc.add(v.abs() * b);
    }
    acc.sum()
}

/// `‖f‖_BV = ‖f‖₁ + V(f)`.
pub fn bv_norm(f: &[f64], part: &UlamPartition) -> f64 {
    l1_norm(f, part) + discrete_variation(f, part)
}

/// Outcome of the composition-estimate ratio: either a finite ratio, or a
/// degenerate case (identity ψ or zero variation) where the denominator
/// vanishes. The numerator is carried so degenerate cases can confirm it is
/// zero as well; [`RatioOutcome::value`] maps that case to 0 by convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RatioOutcome {
    Ratio(f64),
    Degenerate { numerator: f64 },
}

impl RatioOutcome {
    pub fn value(&self) -> f64 {
        match *self {
            RatioOutcome::Ratio(r) => r,
            RatioOutcome::Degenerate { .. } => 0.0,
        }
    }
}

/// Ratio `∫_K |f∘ψ − f| dm / (‖ψ − id‖₀ · V(f))` for a comparison map.
///
/// The integral runs over cells whose centroid lies in `K`; `f∘ψ` is read
/// from the cell containing the mapped centroid (nearest-cell lookup, an
/// O(h) approximation), with value 0 outside the partition.
pub fn composition_ratio(f: &[f64], psi: &ComparisonMap, part: &UlamPartition) -> RatioOutcome {
    let mut num = Kahan::new();
    for i in 0..part.len() {
        let c = part.centroids()[i];
        if !psi.k_set.contains(c, 0.0) {
            continue;
        }
        let mapped = psi.psi.apply(c);
        let f_mapped = part.locate(mapped).map_or(0.0, |j| f[j]);
        num.add((f_mapped - f[i]).abs() * part.areas()[i]);
    }
    let numerator = num.sum();
    let denominator = psi.sup_deviation * discrete_variation(f, part);
    if denominator <= 0.0 {
        RatioOutcome::Degenerate { numerator }
    } else {
        RatioOutcome::Ratio(numerator / denominator)
    }
}

/// Sobolev-type ratio `‖f‖₂ / V(f)`; invariant under scaling of `f`. Errors
/// when the variation vanishes.
pub fn sobolev_ratio(f: &[f64], part: &UlamPartition) -> Result<f64> {
    let v = discrete_variation(f, part);
    if v <= 0.0 {
        return Err(Error::ZeroVariation);
    }
    let mut acc = Kahan::new();
    for (x, a) in f.iter().zip(part.areas()) {
        acc.add(x * x * a);
    }
    Ok(acc.sum().sqrt() / v)
}

/// A deterministic family of test functions standing in for "all BV
/// functions": indicators of random convex polygons, truncated trigonometric
/// polynomials sampled at centroids, and piecewise-constant noise on coarse
/// sub-grids (bounded variation by construction). Every member has positive
/// discrete variation.
#[derive(Debug, Clone)]
pub struct TestSuite {
    pub seed: u64,
    pub functions: Vec<SuiteFunction>,
}

#[derive(Debug, Clone)]
pub struct SuiteFunction {
    pub descriptor: String,
    pub values: Vec<f64>,
}

impl TestSuite {
    /// Generates `count` functions cycling through the three kinds.
    /// Identical `(seed, partition, count)` inputs produce identical suites.
    pub fn generate(seed: u64, part: &UlamPartition, count: usize) -> TestSuite {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut functions = Vec::with_capacity(count);
        let mut kind = 0usize;
        while functions.len() < count {
            let candidate = match kind % 3 {
                0 => indicator_function(&mut rng, part),
                1 => trig_function(&mut rng, part),
                _ => coarse_noise_function(&mut rng, part),
            };
            kind += 1;
            if discrete_variation(&candidate.values, part) > 0.0 {
                functions.push(candidate);
            }
        }
        TestSuite { seed, functions }
    }
}

fn indicator_function(rng: &mut ChaCha8Rng, part: &UlamPartition) -> SuiteFunction {
    // Convex polygon with vertices on a random ellipse centered in Ω.
    loop {
        let cx = rng.random_range(0.0..2.0);
        let cy = rng.random_range(0.0..1.0);
        if !part.omega().contains(Point2::new(cx, cy), 0.0) {
            continue;
        }
        let rx = rng.random_range(0.1..0.45);
        let ry = rng.random_range(0.1..0.45);
        let k = rng.random_range(3..7usize);
        let mut angles: Vec<f64> = (0..k)
            .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
            .collect();
        angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
        angles.dedup_by(|a, b| (*a - *b).abs() < 1e-2);
        if angles.len() < 3 {
            continue;
        }
        let verts: Vec<Point2> = angles
            .iter()
            .map(|&th| Point2::new(cx + rx * th.cos(), cy + ry * th.sin()))
            .collect();
        let Ok(poly) = Polygon::new(verts) else {
            continue;
        };
        let values: Vec<f64> = part
            .centroids()
            .iter()
            .map(|&c| if poly.contains(c, 0.0) { 1.0 } else { 0.0 })
            .collect();
        if values.iter().any(|&v| v > 0.0) {
            return SuiteFunction {
                descriptor: format!("indicator(center=({cx:.3},{cy:.3}))"),
                values,
            };
        }
    }
}

fn trig_function(rng: &mut ChaCha8Rng, part: &UlamPartition) -> SuiteFunction {
    let terms = rng.random_range(2..5usize);
    let coeffs: Vec<(f64, f64, f64, f64)> = (0..terms)
        .map(|_| {
            (
                rng.random_range(-1.0..1.0),
                rng.random_range(0..4u32) as f64,
                rng.random_range(0..4u32) as f64,
                rng.random_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect();
    let values: Vec<f64> = part
        .centroids()
        .iter()
        .map(|c| {
            coeffs
                .iter()
                .map(|&(a, p, q, phase)| {
                    a * (std::f64::consts::PI * (p * c.x + q * c.y) + phase).cos()
                })
                .sum()
        })
        .collect();
    SuiteFunction {
        descriptor: format!("trig({terms} terms)"),
        values,
    }
}

fn coarse_noise_function(rng: &mut ChaCha8Rng, part: &UlamPartition) -> SuiteFunction {
    let level = [4usize, 8, 16][rng.random_range(0..3usize)];
    let side = 2.0 / level as f64;
    let rows = level.div_ceil(2);
    let field: Vec<f64> = (0..level * rows)
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    let values: Vec<f64> = part
        .centroids()
        .iter()
        .map(|c| {
            let ix = ((c.x / side).floor().max(0.0) as usize).min(level - 1);
            let iy = ((c.y / side).floor().max(0.0) as usize).min(rows - 1);
            field[ix * rows + iy]
        })
        .collect();
    SuiteFunction {
        descriptor: format!("coarse_noise(level={level})"),
        values,
    }
}

/// One measured Lasota–Yorke sample.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LySample {
    pub v_f: f64,
    pub l1_f: f64,
    pub v_lf: f64,
}

/// Fitted Lasota–Yorke surrogate constants: every sample satisfies
/// `v_lf ≤ theta_hat·v_f + m_hat·l1_f`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LYReport {
    pub theta_hat: f64,
    pub m_hat: f64,
    pub ell: usize,
    pub t: f64,
    pub samples: Vec<LySample>,
}

/// Applies the discrete transfer operator `ell` times to every suite
/// function, measures `(V(f), ‖f‖₁, V(L^ℓ f))`, and fits the tightest
/// `(θ, M)` envelope: least squares subject to the per-sample inequality,
/// minimal θ among ties.
pub fn ly_check(
    t: TentParams,
    part: &UlamPartition,
    suite: &TestSuite,
    ell: usize,
) -> Result<LYReport> {
    let matrix = transfer_matrix(&tent_family(t), part)?;
    ly_check_with_matrix(&matrix, t.t(), part, suite, ell)
}

/// Same as [`ly_check`] with a prebuilt transfer matrix.
pub fn ly_check_with_matrix(
    matrix: &TransferMatrix,
    t: f64,
    part: &UlamPartition,
    suite: &TestSuite,
    ell: usize,
) -> Result<LYReport> {
    if ell == 0 || suite.functions.is_empty() {
        return Err(Error::InvalidMap(
            "ly_check needs ell >= 1 and a nonempty suite".into(),
        ));
    }
    let samples: Vec<LySample> = suite
        .functions
        .iter()
        .map(|f| {
            let mut g = f.values.clone();
            for _ in 0..ell {
                g = matrix.apply(part, &g);
            }
            LySample {
                v_f: discrete_variation(&f.values, part),
                l1_f: l1_norm(&f.values, part),
                v_lf: discrete_variation(&g, part),
            }
        })
        .collect();
    let (theta_hat, m_hat) = fit_envelope(&samples);
    Ok(LYReport {
        theta_hat,
        m_hat,
        ell,
        t,
        samples,
    })
}

/// Constrained least squares for `y ≈ θ·v + m·l` subject to
/// `θ·v_k + m·l_k ≥ y_k` and `θ, m ≥ 0`: a two-variable QP solved by
/// active-set enumeration. Among minimizers the smallest θ wins, so a suite
/// of proportional samples (e.g. constants) yields θ = 0 with the M-term
/// doing the work. The returned `m` is nudged up until every inequality
/// holds in plain f64 arithmetic.
fn fit_envelope(samples: &[LySample]) -> (f64, f64) {
    let v: Vec<f64> = samples.iter().map(|s| s.v_f).collect();
    let l: Vec<f64> = samples.iter().map(|s| s.l1_f).collect();
    let y: Vec<f64> = samples.iter().map(|s| s.v_lf).collect();
    let k = samples.len();

    let feasible = |theta: f64, m: f64| -> bool {
        theta >= -1e-12
            && m >= -1e-12
            && (0..k).all(|i| theta * v[i] + m * l[i] >= y[i] - 1e-9 * y[i].abs().max(1.0))
    };
    let objective = |theta: f64, m: f64| -> f64 {
        (0..k)
            .map(|i| {
                let r = theta * v[i] + m * l[i] - y[i];
                r * r
            })
            .sum()
    };

    let mut candidates: Vec<(f64, f64)> = Vec::new();

    // Unconstrained least squares.
    let (svv, svl, sll, svy, sly) = (0..k).fold((0.0, 0.0, 0.0, 0.0, 0.0), |acc, i| {
        (
            acc.0 + v[i] * v[i],
            acc.1 + v[i] * l[i],
            acc.2 + l[i] * l[i],
            acc.3 + v[i] * y[i],
            acc.4 + l[i] * y[i],
        )
    });
    let det = svv * sll - svl * svl;
    if det.abs() > 1e-12 * svv.max(sll).max(1.0) {
        candidates.push(((sll * svy - svl * sly) / det, (svv * sly - svl * svy) / det));
    }

    // One active sample constraint: least squares along θ·v_i + m·l_i = y_i.
    for i in 0..k {
        if l[i] <= 0.0 {
            continue;
        }
        let mut sa2 = 0.0;
        let mut sab = 0.0;
        for j in 0..k {
            let a = v[j] - v[i] * l[j] / l[i];
            let b = y[i] * l[j] / l[i] - y[j];
            sa2 += a * a;
            sab += a * b;
        }
        let theta = if sa2 > 1e-12 {
            (-sab / sa2).max(0.0)
        } else {
            0.0
        };
        candidates.push((theta, (y[i] - theta * v[i]) / l[i]));
    }

    // Two active sample constraints.
    for i in 0..k {
        for j in (i + 1)..k {
            let det = v[i] * l[j] - v[j] * l[i];
            if det.abs() < 1e-12 {
                continue;
            }
            candidates.push((
                (y[i] * l[j] - y[j] * l[i]) / det,
                (v[i] * y[j] - v[j] * y[i]) / det,
            ));
        }
    }

    // θ = 0 edge: least-squares m, raised to the smallest feasible value.
    if sll > 0.0 {
        let m_min = (0..k)
            .filter(|&i| l[i] > 0.0)
            .map(|i| y[i] / l[i])
            .fold(0.0, f64::max);
        candidates.push((0.0, (sly / sll).max(m_min).max(0.0)));
    }
    // m = 0 edge.
    if svv > 0.0 && (0..k).all(|i| v[i] > 0.0 || y[i] <= 0.0) {
        let t_min = (0..k)
            .filter(|&i| v[i] > 0.0)
            .map(|i| y[i] / v[i])
            .fold(0.0, f64::max);
        candidates.push(((svy / svv).max(t_min).max(0.0), 0.0));
    }

    let mut best: Option<(f64, f64, f64)> = None;
    for (theta, m) in candidates {
        if !theta.is_finite() || !m.is_finite() || !feasible(theta, m) {
            continue;
        }
        let obj = objective(theta, m);
        let better = match best {
            None => true,
            Some((bo, bt, _)) => {
                obj < bo - 1e-12 * bo.abs().max(1.0)
                    || ((obj - bo).abs() <= 1e-12 * bo.abs().max(1.0) && theta < bt)
            }
        };
        if better {
            best = Some((obj, theta, m));
        }
    }
    let (_, theta, m) = best.unwrap_or((0.0, 0.0, 0.0));
    let theta = theta.max(0.0);

    // Close any floating-point gap so the reported pair dominates every
    // sample exactly.
    let mut m = m.max(0.0);
    for i in 0..k {
        if l[i] > 0.0 {
            let need = (y[i] - theta * v[i]) / l[i];
            if need.is_finite() && need > m {
                m = need;
            }
            while theta * v[i] + m * l[i] < y[i] {
                m = m.next_up();
            }
        }
    }
    (theta, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{comparison_map, omega};
    use crate::ulam::UlamPartition;

    fn part(n: usize) -> UlamPartition {
        UlamPartition::build(&omega(), n).unwrap()
    }

    #[test]
    fn variation_of_constants() {
        let p = part(32);
        let zeros = vec![0.0; p.len()];
        assert_eq!(discrete_variation(&zeros, &p), 0.0);
        let ones = vec![1.0; p.len()];
        let perim = 2.0 + 2.0 * std::f64::consts::SQRT_2;
        assert!((discrete_variation(&ones, &p) - perim).abs() < 1e-12);
        assert!((bv_norm(&ones, &p) - (1.0 + perim)).abs() < 1e-12);
        assert_eq!(bv_norm(&zeros, &p), 0.0);
    }

    #[test]
    fn variation_of_r1_indicator_is_exact() {
        // Cells are clipped to Ω, so the diagonal boundary enters through
        // the exact boundary trace, not a staircase: V = 1 + 1 + √2.
        for n in [8, 64] {
            let p = part(n);
            let f: Vec<f64> = p
                .centroids()
                .iter()
                .map(|c| if c.x < 1.0 { 1.0 } else { 0.0 })
                .collect();
            let expected = 2.0 + std::f64::consts::SQRT_2;
            assert!(
                (discrete_variation(&f, &p) - expected).abs() < 1e-9,
                "n = {n}"
            );
        }
    }

    #[test]
    fn variation_seminorm_properties() {
        let p = part(48);
        let suite = TestSuite::generate(7, &p, 9);
        for f in &suite.functions {
            let v = discrete_variation(&f.values, &p);
            assert!(v > 0.0);
            let doubled: Vec<f64> = f.values.iter().map(|x| 2.0 * x).collect();
            assert!((discrete_variation(&doubled, &p) - 2.0 * v).abs() < 1e-12 * (1.0 + v));
            assert!((bv_norm(&doubled, &p) - 2.0 * bv_norm(&f.values, &p)).abs() < 1e-10);
        }
        for pair in suite.functions.windows(2) {
            let sum: Vec<f64> = pair[0]
                .values
                .iter()
                .zip(&pair[1].values)
                .map(|(a, b)| a + b)
                .collect();
            let lhs = discrete_variation(&sum, &p);
            let rhs =
                discrete_variation(&pair[0].values, &p) + discrete_variation(&pair[1].values, &p);
            assert!(lhs <= rhs + 1e-12 * rhs.max(1.0), "subadditivity");
        }
    }

    #[test]
    fn sobolev_closed_forms() {
        let p = part(32);
        let ones = vec![1.0; p.len()];
        let perim = 2.0 + 2.0 * std::f64::consts::SQRT_2;
        let r = sobolev_ratio(&ones, &p).unwrap();
        assert!((r - 1.0 / perim).abs() < 1e-12);
        assert!((r - 0.207107).abs() < 1e-6);

        // Degree-0 homogeneity.
        let doubled: Vec<f64> = ones.iter().map(|x| 2.0 * x).collect();
        assert!((sobolev_ratio(&doubled, &p).unwrap() - r).abs() < 1e-14);

        let zeros = vec![0.0; p.len()];
        assert!(sobolev_ratio(&zeros, &p).is_err());
    }

    #[test]
    fn composition_ratio_degenerate_cases() {
        let p = part(16);
        let t = TentParams::new(0.95).unwrap();
        // Identity ψ (s = t): zero denominator and zero numerator.
        let id = comparison_map(t, t, 0).unwrap();
        let f: Vec<f64> = p.centroids().iter().map(|c| c.x).collect();
        match composition_ratio(&f, &id, &p) {
            RatioOutcome::Degenerate { numerator } => {
                assert_eq!(numerator, 0.0);
            }
            RatioOutcome::Ratio(r) => panic!("expected degenerate, got ratio {r}"),
        }
        assert_eq!(composition_ratio(&f, &id, &p).value(), 0.0);

        // Constant f has positive variation (boundary trace) but f∘ψ = f.
        let s = TentParams::new(0.9).unwrap();
        let cm = comparison_map(t, s, 0).unwrap();
        let c = vec![3.0; p.len()];
        match composition_ratio(&c, &cm, &p) {
            RatioOutcome::Ratio(r) => assert_eq!(r, 0.0),
            RatioOutcome::Degenerate { .. } => panic!("constant f has V > 0"),
        }
    }

    #[test]
    fn composition_ratio_affine_oracle() {
        // f(x) = x1, ψ branch 0 with t = 1, s = 0.95: the continuum
        // numerator is (1 − s/t)·∫_{R1} x1 dm = 0.05/3 by exact polynomial
        // integration over the triangle; centroid lookup is O(h)-accurate.
        let p = part(128);
        let t = TentParams::new(1.0).unwrap();
        let s = TentParams::new(0.95).unwrap();
        let cm = comparison_map(t, s, 0).unwrap();
        let f: Vec<f64> = p.centroids().iter().map(|c| c.x).collect();
        let exact = 0.05 / 3.0;
        match composition_ratio(&f, &cm, &p) {
            RatioOutcome::Ratio(r) => {
                assert!(r <= 1.0, "ratio {r}");
                let numerator = r * cm.sup_deviation * discrete_variation(&f, &p);
                assert!(
                    (numerator - exact).abs() < 0.5 * exact,
                    "numerator {numerator} vs exact {exact}"
                );
            }
            RatioOutcome::Degenerate { .. } => panic!("not degenerate"),
        }
    }

    #[test]
    fn suite_is_deterministic_and_nondegenerate() {
        let p = part(32);
        let a = TestSuite::generate(42, &p, 20);
        let b = TestSuite::generate(42, &p, 20);
        assert_eq!(a.functions.len(), 20);
        for (fa, fb) in a.functions.iter().zip(&b.functions) {
            assert_eq!(fa.descriptor, fb.descriptor);
            assert_eq!(fa.values, fb.values);
            assert!(discrete_variation(&fa.values, &p) > 0.0);
        }
        let c = TestSuite::generate(43, &p, 20);
        assert!(a
            .functions
            .iter()
            .zip(&c.functions)
            .any(|(x, y)| x.values != y.values));
    }

    #[test]
    fn ly_constant_suite_gives_zero_theta() {
        let p = part(16);
        let suite = TestSuite {
            seed: 0,
            functions: [1.0, 2.0, 0.5]
                .iter()
                .map(|&c| SuiteFunction {
                    descriptor: format!("const({c})"),
                    values: vec![c; p.len()],
                })
                .collect(),
        };
        let report = ly_check(TentParams::new(1.0).unwrap(), &p, &suite, 6).unwrap();
        assert_eq!(report.theta_hat, 0.0);
        // At t = 1 constants are fixed points: V(L⁶c) = c·perimeter, so the
        // M-term must carry the whole perimeter.
        let perim = 2.0 + 2.0 * std::f64::consts::SQRT_2;
        assert!(report.m_hat >= perim - 1e-9);
        for s in &report.samples {
            assert!(s.v_lf <= report.theta_hat * s.v_f + report.m_hat * s.l1_f);
        }
    }

    #[test]
    fn ly_fixed_point_sample_at_t1() {
        let p = part(24);
        let suite = TestSuite {
            seed: 0,
            functions: vec![SuiteFunction {
                descriptor: "const(1)".into(),
                values: vec![1.0; p.len()],
            }],
        };
        let report = ly_check(TentParams::new(1.0).unwrap(), &p, &suite, 6).unwrap();
        let s = &report.samples[0];
        let perim = 2.0 + 2.0 * std::f64::consts::SQRT_2;
        assert!((s.v_lf - perim).abs() < 1e-9);
        assert!((s.l1_f - 1.0).abs() < 1e-12);
        assert!(s.v_lf <= report.theta_hat * s.v_f + report.m_hat * s.l1_f);
    }

    #[test]
    fn ly_contraction_on_seeded_suite() {
        let p = part(64);
        let suite = TestSuite::generate(42, &p, 20);
        let report = ly_check(TentParams::new(0.95).unwrap(), &p, &suite, 6).unwrap();
        assert!(
            report.theta_hat < 1.0,
            "theta_hat = {} should contract",
            report.theta_hat
        );
        assert!(report.theta_hat >= 0.0 && report.m_hat >= 0.0);
        for s in &report.samples {
            assert!(s.v_lf <= report.theta_hat * s.v_f + report.m_hat * s.l1_f);
        }
    }

    #[test]
    fn ly_rejects_bad_arguments() {
        let p = part(8);
        let empty = TestSuite {
            seed: 0,
            functions: Vec::new(),
        };
        assert!(ly_check(TentParams::new(1.0).unwrap(), &p, &empty, 6).is_err());
        let suite = TestSuite::generate(1, &p, 3);
        assert!(ly_check(TentParams::new(1.0).unwrap(), &p, &suite, 0).is_err());
    }

    #[test]
    fn ly_report_serializes_with_expected_fields() {
        let p = part(8);
        let suite = TestSuite::generate(5, &p, 3);
        let report = ly_check(TentParams::new(0.95).unwrap(), &p, &suite, 2).unwrap();
        let json = serde_json::to_value(&report).unwrap();
        for key in ["theta_hat", "m_hat", "ell", "t", "samples"] {
            assert!(json.get(key).is_some(), "missing {key}");
        }
        assert!(json["samples"][0].get("v_f").is_some());
        assert!(json["samples"][0].get("l1_f").is_some());
        assert!(json["samples"][0].get("v_lf").is_some());
    }
}
