//! Piecewise-affine expanding maps on a polygonal domain, the
//! two-dimensional tent family, and the comparison machinery between two
//! parameters of a family.
//!
//! A map is a finite list of affine branches with convex polygonal domains
//! that partition the domain Ω mod 0 and map into Ω. The tent family is
//!
//! ```text
//! φ_t = t · φ_1,   φ_1(x1, x2) = (x1 + x2, x1 − x2)         on R1,
//!                  φ_1(x1, x2) = (2 − x1 + x2, 2 − x1 − x2) on R2,
//! ```
//!
//! where Ω is the triangle (0,0), (2,0), (1,1) split by the segment
//! `C = {x1 = 1}` into R1 (left) and R2 (right). Both branches have constant
//! Jacobian `2t²` and map their triangle onto `t·Ω`; the family is expanding
//! for `t ∈ [τ, 1]` with `τ = (1/√2)(√2+1)^{1/4}`.

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::geometry::{apply_affine, clip_convex, AffineMap2, Point2, Polygon};
use crate::{Error, Result};

/// Point-in-domain tolerance for branch selection in [`PiecewiseAffineMap::eval`].
pub const POINT_TOL: f64 = 1e-9;

/// Interior-overlap tolerance between branch domains.
const DISJOINT_TOL: f64 = 1e-12;

/// Tolerance for the partition-cover and image-containment checks.
const COVER_TOL: f64 = 1e-10;

/// Lower endpoint τ = (1/√2)(√2+1)^{1/4} of the tent parameter range.
pub fn tau() -> f64 {
    std::f64::consts::FRAC_1_SQRT_2 * (std::f64::consts::SQRT_2 + 1.0).powf(0.25)
}

/// One affine branch: a convex domain, the forward map, its exact inverse,
/// and the (constant) Jacobian.
#[derive(Debug, Clone)]
pub struct Branch {
    pub domain: Polygon,
    pub forward: AffineMap2,
    pub inverse: AffineMap2,
    pub jacobian: f64,
}

impl Branch {
    /// Builds a branch from its domain and forward map; the inverse and the
    /// Jacobian `|det|` are derived. Fails on singular linear parts.
    pub fn new(domain: Polygon, forward: AffineMap2) -> Result<Self> {
        let inverse = forward.inverse()?;
        Ok(Branch {
            domain,
            forward,
            inverse,
            jacobian: forward.det().abs(),
        })
    }

    /// Image polygon of the branch domain.
    pub fn image(&self) -> Polygon {
        apply_affine(&self.forward, &self.domain)
    }
}

/// A piecewise-affine map: branch domains partition `omega` mod 0 and every
/// branch image is contained in `omega`.
#[derive(Debug, Clone)]
pub struct PiecewiseAffineMap {
    omega: Polygon,
    branches: Vec<Branch>,
}

impl PiecewiseAffineMap {
    /// Validating constructor. Checks that the branch domains cover `omega`
    /// (total area within 1e−10), have pairwise interior-disjoint domains
    /// (overlap area ≤ 1e−12), and map into `omega` (image area recovered by
    /// clipping within 1e−10).
    pub fn new(omega: Polygon, branches: Vec<Branch>) -> Result<Self> {
        if branches.is_empty() {
            return Err(Error::EmptyMap);
        }
        let total: f64 = branches.iter().map(|b| b.domain.area()).sum();
        if (total - omega.area()).abs() > COVER_TOL {
            return Err(Error::InvalidMap(format!(
                "branch domains cover area {total}, domain has area {}",
                omega.area()
            )));
        }
        for i in 0..branches.len() {
            for j in (i + 1)..branches.len() {
                let overlap = clip_convex(&branches[i].domain, &branches[j].domain).area();
                if overlap > DISJOINT_TOL {
                    return Err(Error::InvalidMap(format!(
                        "branches {i} and {j} overlap with area {overlap:e}"
                    )));
                }
            }
        }
        for (i, b) in branches.iter().enumerate() {
            let image = b.image();
            let inside = clip_convex(&image, &omega).area();
            if image.area() - inside > COVER_TOL {
                return Err(Error::InvalidMap(format!(
                    "image of branch {i} leaves the domain by area {:e}",
                    image.area() - inside
                )));
            }
        }
        Ok(PiecewiseAffineMap { omega, branches })
    }

    pub fn omega(&self) -> &Polygon {
        &self.omega
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    /// Applies the map at `x`, returning the image point and the 0-based
    /// index of the branch used. On shared branch boundaries the
    /// lowest-index containing branch wins, a deterministic convention for a
    /// choice the underlying theory only fixes mod 0; for the tent family
    /// this places the segment `{x1 = 1}` in the R1 branch.
    pub fn eval(&self, x: Point2) -> Result<(Point2, usize)> {
        for (i, b) in self.branches.iter().enumerate() {
            if b.domain.contains(x, POINT_TOL) {
                return Ok((b.forward.apply(x), i));
            }
        }
        Err(Error::OutsideDomain(x.x, x.y))
    }

    /// Materializes the `n`-th iterate as an explicit piecewise-affine map:
    /// one branch per admissible length-`n` itinerary with a non-degenerate
    /// domain. The affine compositions are exact, so the iterate's expansion
    /// constants can be read off its branches directly.
    pub fn iterate(&self, n: usize) -> Result<PiecewiseAffineMap> {
        if n == 0 {
            return Err(Error::InvalidMap("iterate count must be >= 1".into()));
        }
        let mut acc = self.branches.clone();
        for _ in 1..n {
            let mut next = Vec::with_capacity(acc.len() * self.branches.len());
            for composed in &acc {
                let image = composed.image();
                for b in &self.branches {
                    // Points of the composed domain whose image continues into b.
                    let continue_region = clip_convex(&b.domain, &image);
                    if continue_region.is_empty() {
                        continue;
                    }
                    let pulled = apply_affine(&composed.inverse, &continue_region);
                    let domain = clip_convex(&pulled, &composed.domain);
                    if domain.area() <= DISJOINT_TOL {
                        continue;
                    }
                    next.push(Branch::new(domain, b.forward.compose(&composed.forward))?);
                }
            }
            acc = next;
        }
        PiecewiseAffineMap::new(self.omega.clone(), acc)
    }
}

/// Tent-family parameter, validated to lie in `[τ, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TentParams {
    t: f64,
}

impl TentParams {
    pub fn new(t: f64) -> Result<Self> {
        let lo = tau();
        // Fuzz for grid endpoints assembled by repeated addition.
        if !t.is_finite() || t < lo - 1e-12 || t > 1.0 + 1e-12 {
            return Err(Error::ParamOutOfRange { t, lo, hi: 1.0 });
        }
        Ok(TentParams { t })
    }

    pub fn t(&self) -> f64 {
        self.t
    }
}

/// The triangle Ω with vertices (0,0), (2,0), (1,1).
pub fn omega() -> Polygon {
    Polygon::new(vec![
        Point2::new(0.0, 0.0),
        Point2::new(2.0, 0.0),
        Point2::new(1.0, 1.0),
    ])
    .expect("fixed triangle is valid")
}

/// Left smoothness domain R1 = {0 ≤ x1 ≤ 1, 0 ≤ x2 ≤ x1}.
pub fn r1() -> Polygon {
    Polygon::new(vec![
        Point2::new(0.0, 0.0),
        Point2::new(1.0, 0.0),
        Point2::new(1.0, 1.0),
    ])
    .expect("fixed triangle is valid")
}

/// Right smoothness domain R2 = {1 ≤ x1 ≤ 2, 0 ≤ x2 ≤ 2 − x1}.
pub fn r2() -> Polygon {
    Polygon::new(vec![
        Point2::new(1.0, 0.0),
        Point2::new(2.0, 0.0),
        Point2::new(1.0, 1.0),
    ])
    .expect("fixed triangle is valid")
}

/// Builds the tent map φ_t. Branch 0 acts on R1 by `t·(x1+x2, x1−x2)`;
/// branch 1 acts on R2 by `t·(2−x1+x2, 2−x1−x2)`. Both images equal `t·Ω`
/// and the Jacobian is `2t²` everywhere.
pub fn tent_family(params: TentParams) -> PiecewiseAffineMap {
    let t = params.t();
    let b1 = Branch::new(
        r1(),
        AffineMap2::new(Matrix2::new(t, t, t, -t), Vector2::zeros()),
    )
    .expect("branch 1 linear part is invertible for t > 0");
    let b2 = Branch::new(
        r2(),
        AffineMap2::new(Matrix2::new(-t, t, -t, -t), Vector2::new(2.0 * t, 2.0 * t)),
    )
    .expect("branch 2 linear part is invertible for t > 0");
    PiecewiseAffineMap::new(omega(), vec![b1, b2]).expect("tent branches partition omega")
}

/// Expansion and distortion constants of a map (or of an explicit iterate).
///
/// `sigma` bounds `‖Dφ_i^{-1}‖` over branches; `delta` is the distortion
/// constant, identically 0 for affine branches (the Jacobian is constant on
/// each branch). `ell` is the uniformity iterate of the tent family.
/// The boundary-geometry constants `alpha`/`beta` and the uniform `theta`,
/// `big_m` have no closed form provided for this family and stay unset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionConstants {
    pub sigma: f64,
    pub delta: f64,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub ell: usize,
    pub theta: Option<f64>,
    pub big_m: Option<f64>,
}

/// Uniformity iterate for the tent family.
pub const TENT_UNIFORMITY_ITERATE: usize = 6;

/// Computes the expansion constants of the `iterate`-th power of `map` by
/// materializing the iterate and taking the largest inverse operator norm
/// over its branches.
pub fn condition_constants(map: &PiecewiseAffineMap, iterate: usize) -> Result<ConditionConstants> {
    let iterated;
    let target = if iterate == 1 {
        map
    } else {
        iterated = map.iterate(iterate)?;
        &iterated
    };
    let sigma = target
        .branches()
        .iter()
        .map(|b| b.inverse.operator_norm())
        .fold(0.0, f64::max);
    Ok(ConditionConstants {
        sigma,
        delta: 0.0,
        alpha: None,
        beta: None,
        ell: TENT_UNIFORMITY_ITERATE,
        theta: None,
        big_m: None,
    })
}

/// The comparison map ψ between the same branch of two maps of a family:
/// `ψ = φ_{t,i}^{-1} ∘ φ_{s,i}` on `K = φ_{s,i}^{-1}(φ_t(R_i) ∩ φ_s(R_i))`.
#[derive(Debug, Clone)]
pub struct ComparisonMap {
    pub psi: AffineMap2,
    pub k_set: Polygon,
    pub branch_index: usize,
    /// `sup ‖ψ(x) − x‖` over `k_set`; ψ − id is affine, so the supremum is
    /// attained at a vertex. Zero when the two maps coincide.
    pub sup_deviation: f64,
}

/// Comparison map between branch `branch` (0-based) of two maps sharing a
/// domain partition shape. Errors if the branch images do not intersect.
pub fn comparison_map_between(
    map_t: &PiecewiseAffineMap,
    map_s: &PiecewiseAffineMap,
    branch: usize,
) -> Result<ComparisonMap> {
    let bt = map_t
        .branches()
        .get(branch)
        .ok_or(Error::EmptyComparisonSet(branch))?;
    let bs = map_s
        .branches()
        .get(branch)
        .ok_or(Error::EmptyComparisonSet(branch))?;
    let common = clip_convex(&bt.image(), &bs.image());
    if common.is_empty() {
        return Err(Error::EmptyComparisonSet(branch));
    }
    let k_set = apply_affine(&bs.inverse, &common);
    // Identical branch maps compose to the identity exactly; skipping the
    // numerical composition keeps sup_deviation at 0 for equal parameters.
    let psi = if bt.forward == bs.forward {
        AffineMap2::identity()
    } else {
        bt.inverse.compose(&bs.forward)
    };
    let sup_deviation = k_set
        .vertices()
        .iter()
        .map(|&v| (psi.apply(v) - v).norm())
        .fold(0.0, f64::max);
    Ok(ComparisonMap {
        psi,
        k_set,
        branch_index: branch,
        sup_deviation,
    })
}

/// Tent-family comparison map `ψ_{t,s,i}` for branch `branch` (0-based).
/// In closed form, branch 0 gives `ψ(x) = (s/t)·x` and branch 1 gives
/// `ψ(x) = (s/t)(x − (2,0)) + (2,0)`; this function computes them by exact
/// affine composition instead.
pub fn comparison_map(t: TentParams, s: TentParams, branch: usize) -> Result<ComparisonMap> {
    comparison_map_between(&tent_family(t), &tent_family(s), branch)
}

/// `|J_s / (J_t ∘ ψ_{t,s,i}) − 1| = |s²/t² − 1|` for the tent family, the
/// deviation of the Jacobian ratio from 1 (branch-independent).
pub fn jacobian_ratio_deviation(t: TentParams, s: TentParams) -> f64 {
    let (t, s) = (t.t(), s.t());
    (s * s / (t * t) - 1.0).abs()
}

/// Serializable map definition: domain vertices, branch domains, 2×2 linear
/// parts in row-major order, translations.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MapDefinition {
    pub omega: Vec<[f64; 2]>,
    pub branches: Vec<BranchDefinition>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BranchDefinition {
    pub domain: Vec<[f64; 2]>,
    pub linear: [f64; 4],
    pub translation: [f64; 2],
}

fn points(raw: &[[f64; 2]]) -> Vec<Point2> {
    raw.iter().map(|&[x, y]| Point2::new(x, y)).collect()
}

impl PiecewiseAffineMap {
    /// Builds and validates a map from its serialized definition.
    pub fn from_definition(def: &MapDefinition) -> Result<Self> {
        let omega = Polygon::new(points(&def.omega))?;
        let branches = def
            .branches
            .iter()
            .map(|b| {
                let domain = Polygon::new(points(&b.domain))?;
                let [m11, m12, m21, m22] = b.linear;
                let forward = AffineMap2::new(
                    Matrix2::new(m11, m12, m21, m22),
                    Vector2::new(b.translation[0], b.translation[1]),
                );
                Branch::new(domain, forward)
            })
            .collect::<Result<Vec<_>>>()?;
        PiecewiseAffineMap::new(omega, branches)
    }

    pub fn to_definition(&self) -> MapDefinition {
        MapDefinition {
            omega: self.omega.vertices().iter().map(|v| [v.x, v.y]).collect(),
            branches: self
                .branches
                .iter()
                .map(|b| BranchDefinition {
                    domain: b.domain.vertices().iter().map(|v| [v.x, v.y]).collect(),
                    linear: [
                        b.forward.linear.m11,
                        b.forward.linear.m12,
                        b.forward.linear.m21,
                        b.forward.linear.m22,
                    ],
                    translation: [b.forward.translation.x, b.forward.translation.y],
                })
                .collect(),
        }
    }
}
