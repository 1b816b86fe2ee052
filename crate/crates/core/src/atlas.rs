//! Classical atlases, their trivial quantizations `Uᵢ = Xᵢ × 𝒮₀` with
//! `φᵢ(ξ, g) = T_{χᵢ(ξ)} g`, and the checks that make the result a quantum
//! atlas.
//!
//! Chart images and overlaps are tracked as finite unions of open boxes so
//! that membership questions are decidable.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::ModelSpace;
use crate::error::{Error, Result};
use crate::expectation::{euclid, inf_dist};
use crate::hermite::{nuclear_seminorm, SchwartzFn};
use crate::random::{profile_fn, rng_for, SampleRng};
use crate::report::{timed, CheckRecord, Criterion};
use crate::tangent::{classify, geometric_grid, TangentVerdict, TANGENT_SLOPE};

/// Default chart scaling for the circle.
pub const DEFAULT_CIRCLE_SCALE: f64 = 0.25;

/// A point of the abstract manifold: coordinates in ℝⁿ, or a canonical
/// angle in `[0, 2π)` on the circle.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldPoint(pub Vec<f64>);

/// Built-in test manifolds, as named in atlas description files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ManifoldSpec {
    Euclidean {
        dim: usize,
    },
    Circle {
        #[serde(default = "default_scale")]
        scale: f64,
    },
}

fn default_scale() -> f64 {
    DEFAULT_CIRCLE_SCALE
}

impl ManifoldSpec {
    pub fn dim(&self) -> usize {
        match self {
            ManifoldSpec::Euclidean { dim } => *dim,
            ManifoldSpec::Circle { .. } => 1,
        }
    }

    /// `euclidean:N` or `circle` / `circle:SCALE`.
    pub fn parse(s: &str) -> Result<Self> {
        let (kind, arg) = s.split_once(':').map_or((s, None), |(k, a)| (k, Some(a)));
        let bad = || Error::Format(format!("unknown manifold '{s}'"));
        match (kind, arg) {
            ("euclidean", Some(n)) => {
                let dim: usize = n.parse().map_err(|_| bad())?;
                Ok(ManifoldSpec::Euclidean { dim })
            }
            ("circle", None) => Ok(ManifoldSpec::Circle {
                scale: DEFAULT_CIRCLE_SCALE,
            }),
            ("circle", Some(x)) => Ok(ManifoldSpec::Circle {
                scale: x.parse().map_err(|_| bad())?,
            }),
            _ => Err(bad()),
        }
    }

    pub fn label(&self) -> String {
        match self {
            ManifoldSpec::Euclidean { dim } => format!("euclidean{dim}"),
            ManifoldSpec::Circle { .. } => "circle".into(),
        }
    }
}

/// Open box `∏ (lo_k, hi_k)`; infinite bounds are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl ImageBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        ImageBox { lo, hi }
    }

    pub fn interval(lo: f64, hi: f64) -> Self {
        ImageBox::new(vec![lo], vec![hi])
    }

    pub fn unbounded(dim: usize) -> Self {
        ImageBox::new(vec![f64::NEG_INFINITY; dim], vec![f64::INFINITY; dim])
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.lo.len()
            && x.iter()
                .zip(&self.lo)
                .zip(&self.hi)
                .all(|((v, l), h)| l < v && v < h)
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.iter().chain(&self.hi).all(|v| v.is_finite())
    }

    /// Largest Euclidean norm over the closure.
    pub fn max_norm(&self) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| l.abs().max(h.abs()).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Removes the hyperplane `x₀ = at`.
    fn split(&self, at: f64) -> Vec<ImageBox> {
        if self.lo[0] < at && at < self.hi[0] {
            let mut left = self.clone();
            let mut right = self.clone();
            left.hi[0] = at;
            right.lo[0] = at;
            vec![left, right]
        } else {
            vec![self.clone()]
        }
    }

    /// Infinite bounds replaced by `±r`, then shrunk inward by `margin` of
    /// the width.
    fn clamped(&self, r: f64, margin: f64) -> ImageBox {
        let (lo, hi) = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(&l, &h)| {
                let l = if l.is_finite() { l } else { -r };
                let h = if h.is_finite() { h } else { r };
                let w = h - l;
                (l + margin * w, h - margin * w)
            })
            .unzip();
        ImageBox { lo, hi }
    }
}

fn in_boxes(boxes: &[ImageBox], x: &[f64]) -> bool {
    boxes.iter().any(|b| b.contains(x))
}

type Predicate = Arc<dyn Fn(&ManifoldPoint) -> bool + Send + Sync>;
type ChartMap = Arc<dyn Fn(&ManifoldPoint) -> Vec<f64> + Send + Sync>;
type InverseMap = Arc<dyn Fn(&[f64]) -> ManifoldPoint + Send + Sync>;

/// `(Xᵢ, χᵢ)` with its inverse and image.
#[derive(Clone)]
pub struct ClassicalChart {
    pub name: String,
    domain: Predicate,
    chi: ChartMap,
    chi_inv: InverseMap,
    pub image: Vec<ImageBox>,
    /// Points of the manifold missing from the domain, for manifolds where
    /// the complement is finite.
    pub cuts: Vec<ManifoldPoint>,
}

impl fmt::Debug for ClassicalChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ClassicalChart")
            .field("name", &self.name)
            .field("image", &self.image)
            .field("cuts", &self.cuts)
            .finish()
    }
}

impl ClassicalChart {
    pub fn new(
        name: impl Into<String>,
        domain: impl Fn(&ManifoldPoint) -> bool + Send + Sync + 'static,
        chi: impl Fn(&ManifoldPoint) -> Vec<f64> + Send + Sync + 'static,
        chi_inv: impl Fn(&[f64]) -> ManifoldPoint + Send + Sync + 'static,
        image: Vec<ImageBox>,
        cuts: Vec<ManifoldPoint>,
    ) -> Self {
        ClassicalChart {
            name: name.into(),
            domain: Arc::new(domain),
            chi: Arc::new(chi),
            chi_inv: Arc::new(chi_inv),
            image,
            cuts,
        }
    }

    pub fn contains(&self, p: &ManifoldPoint) -> bool {
        (self.domain)(p)
    }

    pub fn map(&self, p: &ManifoldPoint) -> Vec<f64> {
        (self.chi)(p)
    }

    pub fn inverse(&self, x: &[f64]) -> ManifoldPoint {
        (self.chi_inv)(x)
    }

    pub fn image_contains(&self, x: &[f64]) -> bool {
        in_boxes(&self.image, x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Geometry {
    Euclidean(usize),
    Circle,
}

impl Geometry {
    pub fn dim(&self) -> usize {
        match self {
            Geometry::Euclidean(n) => *n,
            Geometry::Circle => 1,
        }
    }

    pub fn distance(&self, a: &ManifoldPoint, b: &ManifoldPoint) -> f64 {
        match self {
            Geometry::Euclidean(_) => inf_dist(&a.0, &b.0),
            Geometry::Circle => {
                let d = canonical_angle(a.0[0] - b.0[0]);
                d.min(TAU - d)
            }
        }
    }

    /// Uniform in `[−1, 1]ⁿ`, or uniform in angle.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ManifoldPoint {
        match self {
            Geometry::Euclidean(n) => {
                ManifoldPoint((0..*n).map(|_| rng.random_range(-1.0..1.0)).collect())
            }
            Geometry::Circle => ManifoldPoint(vec![rng.random_range(0.0..TAU)]),
        }
    }
}

/// Angle reduced to `[0, 2π)`.
pub fn canonical_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// Angle reduced to `(−π, π]`.
fn wrapped_angle(theta: f64) -> f64 {
    let t = canonical_angle(theta);
    if t > PI {
        t - TAU
    } else {
        t
    }
}

#[derive(Debug, Clone)]
pub struct ClassicalAtlas {
    pub geometry: Geometry,
    pub charts: Vec<ClassicalChart>,
}

const MAX_REJECTIONS: usize = 10_000;

impl ClassicalAtlas {
    pub fn dim(&self) -> usize {
        self.geometry.dim()
    }

    pub fn chart(&self, i: usize) -> Result<&ClassicalChart> {
        self.charts.get(i).ok_or(Error::UnknownChart(i))
    }

    /// `x ∈ χᵢ(Xᵢ ∩ Xⱼ)`.
    pub fn in_overlap(&self, i: usize, j: usize, x: &[f64]) -> Result<bool> {
        let (ci, cj) = (self.chart(i)?, self.chart(j)?);
        Ok(ci.image_contains(x) && cj.contains(&ci.inverse(x)))
    }

    /// `χᵢ(Xᵢ ∩ Xⱼ)` as open boxes: chart `i`'s image with the cuts of chart
    /// `j` removed.
    pub fn overlap_image(&self, i: usize, j: usize) -> Result<Vec<ImageBox>> {
        let (ci, cj) = (self.chart(i)?, self.chart(j)?);
        let mut boxes = ci.image.clone();
        for cut in &cj.cuts {
            if ci.contains(cut) {
                let at = ci.map(cut)[0];
                boxes = boxes.iter().flat_map(|b| b.split(at)).collect();
            }
        }
        Ok(boxes)
    }

    /// Ordered chart pairs with a nonempty overlap, including `(i, i)` only
    /// for single-chart atlases.
    pub fn overlapping_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.charts.len();
        if n == 1 {
            return vec![(0, 0)];
        }
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j
                    && self
                        .overlap_image(i, j)
                        .map(|b| !b.is_empty())
                        .unwrap_or(false)
                {
                    pairs.push((i, j));
                }
            }
        }
        pairs
    }

    /// `χ_ji(x) = χⱼ(χᵢ⁻¹(x))` on `χᵢ(Xᵢ ∩ Xⱼ)`.
    pub fn transition(&self, i: usize, j: usize, x: &[f64]) -> Result<Vec<f64>> {
        if !self.in_overlap(i, j, x)? {
            return Err(Error::OutOfOverlap {
                from: i,
                to: j,
                point: x.to_vec(),
            });
        }
        let p = self.charts[i].inverse(x);
        Ok(self.charts[j].map(&p))
    }

    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> ManifoldPoint {
        self.geometry.sample(rng)
    }

    /// A point of `Xᵢ ∩ Xⱼ` whose chart-`i` coordinate keeps `margin` from
    /// the boundary of the overlap image.
    pub fn sample_in_overlap<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        i: usize,
        j: usize,
        margin: f64,
    ) -> Result<ManifoldPoint> {
        let boxes = self.overlap_image(i, j)?;
        for _ in 0..MAX_REJECTIONS {
            let p = self.sample_point(rng);
            if !self.charts[i].contains(&p) || !self.charts[j].contains(&p) {
                continue;
            }
            let x = self.charts[i].map(&p);
            let deep = boxes.iter().any(|b| {
                x.iter()
                    .zip(&b.lo)
                    .zip(&b.hi)
                    .all(|((v, l), h)| v - l > margin && h - v > margin)
            });
            if deep {
                return Ok(p);
            }
        }
        Err(Error::InvalidAtlas(format!(
            "no sample found in overlap ({i},{j})"
        )))
    }

    /// Charts of both atlases; the geometries must agree.
    pub fn union(&self, other: &ClassicalAtlas) -> Result<ClassicalAtlas> {
        if self.geometry != other.geometry {
            return Err(Error::InvalidAtlas(
                "atlases live on different manifolds".into(),
            ));
        }
        let mut charts = self.charts.clone();
        charts.extend(other.charts.iter().cloned());
        Ok(ClassicalAtlas {
            geometry: self.geometry,
            charts,
        })
    }
}

/// Single identity chart on ℝⁿ.
pub fn euclidean_atlas(dim: usize) -> ClassicalAtlas {
    let chart = ClassicalChart::new(
        "identity",
        |_| true,
        |p| p.0.clone(),
        |x| ManifoldPoint(x.to_vec()),
        vec![ImageBox::unbounded(dim)],
        vec![],
    );
    ClassicalAtlas {
        geometry: Geometry::Euclidean(dim),
        charts: vec![chart],
    }
}

/// The two angle charts of S¹ scaled by `scale` and rotated by `rotation`:
/// `χ₁ = s·θ` on `(−sπ, sπ)` missing `θ = π`, and `χ₂ = s·θ` on `(0, 2πs)`
/// missing `θ = 0` (angles measured from `rotation`).
pub fn circle_atlas(scale: f64, rotation: f64) -> ClassicalAtlas {
    let s = scale;
    let r = rotation;
    let inv = move |x: &[f64]| ManifoldPoint(vec![canonical_angle(x[0] / s + r)]);
    let first = ClassicalChart::new(
        format!("circle/cut@{:.4}", canonical_angle(PI + r)),
        move |p| canonical_angle(p.0[0] - r) != PI,
        move |p| vec![s * wrapped_angle(p.0[0] - r)],
        inv,
        vec![ImageBox::interval(-s * PI, s * PI)],
        vec![ManifoldPoint(vec![canonical_angle(PI + r)])],
    );
    let second = ClassicalChart::new(
        format!("circle/cut@{:.4}", canonical_angle(r)),
        move |p| canonical_angle(p.0[0] - r) != 0.0,
        move |p| vec![s * canonical_angle(p.0[0] - r)],
        inv,
        vec![ImageBox::interval(0.0, TAU * s)],
        vec![ManifoldPoint(vec![canonical_angle(r)])],
    );
    ClassicalAtlas {
        geometry: Geometry::Circle,
        charts: vec![first, second],
    }
}

/// [`circle_atlas`] whose second chart jumps by `jump` at `θ = π/2`, a
/// point inside the overlap. Both charts stay bijective onto their images;
/// the transition is discontinuous there.
pub fn corrupted_circle_atlas(scale: f64, jump: f64) -> ClassicalAtlas {
    let s = scale;
    let mut atlas = circle_atlas(scale, 0.0);
    let corner = s * PI / 2.0;
    atlas.charts[1] = ClassicalChart::new(
        "circle/corrupted",
        |p| p.0[0] != 0.0,
        move |p| {
            let t = p.0[0];
            vec![s * t + if t >= PI / 2.0 { jump } else { 0.0 }]
        },
        move |x| {
            let t = if x[0] >= corner + jump {
                (x[0] - jump) / s
            } else {
                x[0] / s
            };
            ManifoldPoint(vec![canonical_angle(t)])
        },
        vec![
            ImageBox::interval(0.0, corner),
            ImageBox::interval(corner + jump, TAU * s + jump),
        ],
        vec![ManifoldPoint(vec![0.0])],
    );
    atlas
}

pub fn make_classical_atlas(spec: &ManifoldSpec) -> Result<ClassicalAtlas> {
    match *spec {
        ManifoldSpec::Euclidean { dim } if dim >= 1 => Ok(euclidean_atlas(dim)),
        ManifoldSpec::Euclidean { .. } => {
            Err(Error::InvalidAtlas("dimension must be at least 1".into()))
        }
        ManifoldSpec::Circle { scale } if scale > 0.0 && scale.is_finite() => {
            Ok(circle_atlas(scale, 0.0))
        }
        ManifoldSpec::Circle { scale } => Err(Error::InvalidAtlas(format!(
            "circle scale {scale} must be positive"
        ))),
    }
}

/// `(ξ, g) ∈ M × 𝒮₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumPoint {
    pub base: ManifoldPoint,
    pub fiber: SchwartzFn,
}

/// Trivial quantization of a classical atlas at truncation `degree`.
#[derive(Debug, Clone)]
pub struct QuantumAtlas {
    pub classical: ClassicalAtlas,
    pub space: ModelSpace,
    pub degree: usize,
}

/// Rejects atlases whose bounded chart images reach past
/// `space.max_shift`. Unbounded images are checked per call instead.
pub fn trivial_quantization(
    atlas: ClassicalAtlas,
    space: ModelSpace,
    degree: usize,
) -> Result<QuantumAtlas> {
    for chart in &atlas.charts {
        for b in chart.image.iter().filter(|b| b.is_bounded()) {
            if b.max_norm() > space.max_shift {
                let corner =
                    b.lo.iter()
                        .zip(&b.hi)
                        .map(|(l, h)| if l.abs() > h.abs() { *l } else { *h })
                        .collect();
                return Err(Error::ShiftOutOfRange {
                    shift: corner,
                    max: space.max_shift,
                });
            }
        }
    }
    Ok(QuantumAtlas {
        classical: atlas,
        space,
        degree,
    })
}

/// Anchor strings for the atlas checks.
pub mod anchors {
    pub const COVER: &str = "M_Q = ⋃ Uᵢ with Uᵢ = Xᵢ × 𝒮₀";
    pub const BIJECTIVE: &str = "φᵢ⁻¹(φᵢ(ξ, g)) = (ξ, g), φᵢ(ξ, g) = T_{χᵢ(ξ)} g";
    pub const OVERLAP: &str = "Q̄(φᵢ(Uᵢ ∩ Uⱼ)) ⊆ χᵢ(Xᵢ ∩ Xⱼ) open";
    pub const CONTINUITY: &str = "φ_ji continuous in the expectation-value topology";
    pub const DIFFERENTIABLE: &str = "φ_ji differentiable in the natural topology";
}

/// Largest jump of `F` tolerated at the finest bisection scale.
pub const CONTINUITY_JUMP_TOL: f64 = 1e-6;

impl QuantumAtlas {
    fn check_shift(&self, x: &[f64]) -> Result<()> {
        if euclid(x) > self.space.max_shift {
            return Err(Error::ShiftOutOfRange {
                shift: x.to_vec(),
                max: self.space.max_shift,
            });
        }
        Ok(())
    }

    /// Random fiber element: a Gaussian-profile function moved into `𝒮₀`.
    pub fn sample_fiber(&self, rng: &mut SampleRng) -> Result<SchwartzFn> {
        let width = (self.degree as f64 / 6.0).max(1.0);
        let f = profile_fn(rng, self.classical.dim(), self.degree, width);
        self.space.project_to_fiber(&f)
    }

    /// `φᵢ(ξ, g) = T_{χᵢ(ξ)} g`.
    pub fn phi(&self, i: usize, q: &QuantumPoint) -> Result<SchwartzFn> {
        let chart = self.classical.chart(i)?;
        self.space.require_nonzero(&q.fiber)?;
        self.space.check_fiber(&q.fiber)?;
        if !chart.contains(&q.base) {
            return Err(Error::SampleOutsideChart {
                chart: i,
                detail: format!("{:?} is not in the chart domain", q.base.0),
            });
        }
        let x = chart.map(&q.base);
        self.check_shift(&x)?;
        self.space.translate(&q.fiber, &x)
    }

    /// `φᵢ⁻¹(f) = (χᵢ⁻¹(Q̄(f)), T_{−Q̄(f)} f)`.
    pub fn phi_inv(&self, i: usize, f: &SchwartzFn) -> Result<QuantumPoint> {
        let chart = self.classical.chart(i)?;
        let p = self.space.trivialize(f)?;
        if !chart.image_contains(&p.base) {
            return Err(Error::SampleOutsideChart {
                chart: i,
                detail: format!("Q̄(f) = {:?} is outside the chart image", p.base),
            });
        }
        Ok(QuantumPoint {
            base: chart.inverse(&p.base),
            fiber: p.fiber,
        })
    }

    /// `φ_ji(f) = T_{χ_ji(Q̄(f))}(T_{−Q̄(f)} f)`, i.e. `φⱼ ∘ φᵢ⁻¹`.
    pub fn quantum_transition(&self, i: usize, j: usize, f: &SchwartzFn) -> Result<SchwartzFn> {
        let q = self.space.position_expectation(f)?.into_vec();
        let y = self.classical.transition(i, j, &q)?;
        self.check_shift(&y)?;
        let back: Vec<f64> = q.iter().map(|v| -v).collect();
        let g = self.space.translate(f, &back)?;
        self.space.translate(&g, &y)
    }

    /// `Q̄(φ_ji(Ψ(x)))`, which should reproduce `χ_ji(x)`.
    pub fn recover_classical_transition(&self, i: usize, j: usize, x: &[f64]) -> Result<Vec<f64>> {
        let psi = self.space.gaussian_section(x, self.degree)?;
        let moved = self.quantum_transition(i, j, &psi)?;
        Ok(self.space.position_expectation(&moved)?.into_vec())
    }

    /// `𝒬 = χᵢ⁻¹ ∘ Q̄ ∘ φᵢ`.
    pub fn kolmogorov_project(&self, i: usize, q: &QuantumPoint) -> Result<ManifoldPoint> {
        let f = self.phi(i, q)?;
        self.kolmogorov_project_fn(i, &f)
    }

    /// `χᵢ⁻¹(Q̄(f))` for `f` in the image of chart `i`.
    pub fn kolmogorov_project_fn(&self, i: usize, f: &SchwartzFn) -> Result<ManifoldPoint> {
        let chart = self.classical.chart(i)?;
        let q = self.space.position_expectation(f)?.into_vec();
        if !chart.image_contains(&q) {
            return Err(Error::SampleOutsideChart {
                chart: i,
                detail: format!("Q̄(f) = {q:?} is outside the chart image"),
            });
        }
        Ok(chart.inverse(&q))
    }

    fn sample_in_chart(&self, rng: &mut SampleRng, i: usize) -> Result<ManifoldPoint> {
        let chart = self.classical.chart(i)?;
        for _ in 0..MAX_REJECTIONS {
            let p = self.classical.sample_point(rng);
            if chart.contains(&p) {
                return Ok(p);
            }
        }
        Err(Error::InvalidAtlas(format!(
            "chart {i} has an empty domain"
        )))
    }

    /// Sampled manifold points not covered by any chart.
    pub fn covering_failures(&self, rng: &mut SampleRng, samples: usize) -> usize {
        (0..samples)
            .filter(|_| {
                let p = self.classical.sample_point(rng);
                !self
                    .classical
                    .charts
                    .iter()
                    .any(|c| c.contains(&p) && c.image_contains(&c.map(&p)))
            })
            .count()
    }

    /// Worst `max(d(ξ, ξ'), ‖g − g'‖)` over `φᵢ⁻¹(φᵢ(ξ, g)) = (ξ', g')`.
    pub fn round_trip_residual(&self, rng: &mut SampleRng, samples: usize) -> Result<f64> {
        let mut worst = 0.0f64;
        for i in 0..self.classical.charts.len() {
            for _ in 0..samples {
                let q = QuantumPoint {
                    base: self.sample_in_chart(rng, i)?,
                    fiber: self.sample_fiber(rng)?,
                };
                let back = self.phi_inv(i, &self.phi(i, &q)?)?;
                let d = self.classical.geometry.distance(&q.base, &back.base);
                worst = worst.max(d).max(back.fiber.sub(&q.fiber)?.norm());
            }
        }
        Ok(worst)
    }

    /// Checks `Q̄(φᵢ(ξ, g)) ∈ χᵢ(Xᵢ ∩ Xⱼ)` together with a ball of radius
    /// `radius` around it, on sampled overlap points. Returns the number of
    /// membership violations and the worst `|Q̄(φᵢ(ξ, g)) − χᵢ(ξ)|_∞`.
    pub fn overlap_image_residual(
        &self,
        rng: &mut SampleRng,
        samples: usize,
        radius: f64,
    ) -> Result<(usize, f64)> {
        let mut violations = 0;
        let mut worst = 0.0f64;
        for (i, j) in self.classical.overlapping_pairs() {
            let boxes = self.classical.overlap_image(i, j)?;
            for _ in 0..samples {
                let base = self.classical.sample_in_overlap(rng, i, j, 0.0)?;
                let x = self.classical.charts[i].map(&base);
                let f = self.phi(
                    i,
                    &QuantumPoint {
                        base,
                        fiber: self.sample_fiber(rng)?,
                    },
                )?;
                let q = self.space.position_expectation(&f)?.into_vec();
                worst = worst.max(inf_dist(&q, &x));
                let ball_inside = (0..q.len()).all(|k| {
                    [-radius, radius].iter().all(|&d| {
                        let mut y = q.clone();
                        y[k] += d;
                        in_boxes(&boxes, &y) && self.classical.in_overlap(i, j, &y).unwrap_or(false)
                    })
                });
                // Points within `radius` of the overlap boundary cannot carry
                // the ball; only count those that should.
                let deep = boxes.iter().any(|b| {
                    q.iter()
                        .zip(&b.lo)
                        .zip(&b.hi)
                        .all(|((v, l), h)| v - l > radius && h - v > radius)
                });
                if !self.classical.in_overlap(i, j, &q)? || (deep && !ball_inside) {
                    violations += 1;
                }
            }
        }
        Ok((violations, worst))
    }

    /// Jump detector for `x ↦ Q̄(φ_ji(T_x g))` on each overlap box: a grid
    /// pass locates the largest increment, then `bisections` halvings follow
    /// it. A continuous map leaves an increment of order the final width;
    /// a jump survives every halving.
    pub fn transition_jump(
        &self,
        rng: &mut SampleRng,
        grid: usize,
        bisections: usize,
    ) -> Result<f64> {
        let g = self.sample_fiber(rng)?;
        let mut worst = 0.0f64;
        for (i, j) in self.classical.overlapping_pairs() {
            for b in self.classical.overlap_image(i, j)? {
                let b = b.clamped(1.0, 1e-3);
                if b.lo.iter().zip(&b.hi).any(|(l, h)| l >= h) {
                    continue;
                }
                let a: Vec<f64> =
                    b.lo.iter()
                        .zip(&b.hi)
                        .map(|(l, h)| rng.random_range(*l..=l + 0.1 * (h - l)))
                        .collect();
                let z: Vec<f64> =
                    b.lo.iter()
                        .zip(&b.hi)
                        .map(|(l, h)| rng.random_range(h - 0.1 * (h - l)..=*h))
                        .collect();
                let at = |s: f64| -> Vec<f64> {
                    a.iter().zip(&z).map(|(u, v)| u + s * (v - u)).collect()
                };
                let image = |s: f64| -> Result<Vec<f64>> {
                    let f = self.space.translate(&g, &at(s))?;
                    let moved = self.quantum_transition(i, j, &f)?;
                    Ok(self.space.position_expectation(&moved)?.into_vec())
                };
                let values = (0..grid)
                    .map(|k| image(k as f64 / (grid - 1) as f64))
                    .collect::<Result<Vec<_>>>()?;
                let (mut k_best, mut jump) = (0, -1.0);
                for k in 0..grid - 1 {
                    let d = inf_dist(&values[k], &values[k + 1]);
                    if d > jump {
                        (k_best, jump) = (k, d);
                    }
                }
                let step = 1.0 / (grid - 1) as f64;
                let (mut lo, mut hi) = (k_best as f64 * step, (k_best + 1) as f64 * step);
                let (mut flo, mut fhi) = (values[k_best].clone(), values[k_best + 1].clone());
                for _ in 0..bisections {
                    let mid = 0.5 * (lo + hi);
                    let fmid = image(mid)?;
                    if inf_dist(&flo, &fmid) >= inf_dist(&fmid, &fhi) {
                        (hi, fhi) = (mid, fmid);
                    } else {
                        (lo, flo) = (mid, fmid);
                    }
                }
                worst = worst.max(inf_dist(&flo, &fhi));
            }
        }
        Ok(worst)
    }

    /// Smallest tangent slope of `δ(t) = φ_ji(f+th) − φ_ji(f) − t·Dφ_ji(f)h`
    /// over sampled `(f, h)`, with `Dφ_ji(f)h` from a Richardson-extrapolated
    /// central difference. Residuals below `floor·‖φ_ji(f)‖₁` count as zero;
    /// `None` means every sample was vacuous.
    pub fn transition_remainder_slope(
        &self,
        rng: &mut SampleRng,
        samples: usize,
        floor: f64,
    ) -> Result<Option<f64>> {
        let grid = geometric_grid(1e-1, 1e-3, 5);
        let mut slopes: Vec<f64> = Vec::new();
        let dim = self.classical.dim();
        for (i, j) in self.classical.overlapping_pairs() {
            for _ in 0..samples {
                let base = self.classical.sample_in_overlap(rng, i, j, 0.15)?;
                let fiber = self.sample_fiber(rng)?;
                let f = self.phi(i, &QuantumPoint { base, fiber })?;
                let h = profile_fn(rng, dim, 6, 2.0).scale_real(0.5);
                let map = |t: f64| self.quantum_transition(i, j, &f.add(&h.scale_real(t))?);
                let central = |eps: f64| -> Result<SchwartzFn> {
                    Ok(map(eps)?.sub(&map(-eps)?)?.scale_real(0.5 / eps))
                };
                let coarse = central(1e-2)?;
                let fine = central(5e-3)?;
                let deriv = fine
                    .scale_real(4.0 / 3.0)
                    .sub(&coarse.scale_real(1.0 / 3.0))?;
                let f0 = map(0.0)?;
                let scale = nuclear_seminorm(&f0, 1).max(1.0);
                let residuals = grid
                    .iter()
                    .map(|&t| {
                        let r = map(t)?.sub(&f0)?.sub(&deriv.scale_real(t))?;
                        let v = nuclear_seminorm(&r, 1);
                        Ok(if v <= floor * scale { 0.0 } else { v })
                    })
                    .collect::<Result<Vec<f64>>>()?;
                let rep = classify(grid.clone(), residuals, TANGENT_SLOPE);
                if rep.verdict != TangentVerdict::Vacuous {
                    slopes.push(rep.fitted_slope);
                }
            }
        }
        Ok(slopes.into_iter().reduce(f64::min))
    }

    /// Conditions (i)–(iv) as check records with ids `{prefix}.cond*`.
    pub fn verify_quantum_atlas(&self, prefix: &str, seed: u64, budget: usize) -> Vec<CheckRecord> {
        AtlasCondition::ALL
            .iter()
            .map(|&c| self.verify_condition(c, prefix, seed, budget))
            .collect()
    }

    /// One atlas condition as a check record with id `{prefix}.{c.suffix()}`.
    /// The record's random stream depends only on `seed` and that id.
    pub fn verify_condition(
        &self,
        c: AtlasCondition,
        prefix: &str,
        seed: u64,
        budget: usize,
    ) -> CheckRecord {
        let tol = self.space.tol;
        let cid = format!("{prefix}.{}", c.suffix());
        let anchor = c.anchor();
        let mut rng = rng_for(seed, &cid);
        timed(|| match c {
            AtlasCondition::Cover => {
                let n = self.covering_failures(&mut rng, budget);
                CheckRecord::at_most(&cid, anchor, n as f64, 0.0)
            }
            AtlasCondition::Bijective => match self.round_trip_residual(&mut rng, budget) {
                Ok(r) => CheckRecord::at_most(&cid, anchor, r, tol.chart),
                Err(e) => CheckRecord::errored(&cid, anchor, tol.chart, e),
            },
            AtlasCondition::OverlapImage => {
                match self.overlap_image_residual(&mut rng, budget, 1e-6) {
                    Ok((0, r)) => CheckRecord::at_most(&cid, anchor, r, tol.chart),
                    Ok((n, r)) => CheckRecord::at_most(&cid, anchor, r, tol.chart)
                        .with_detail(format!("{n} membership violations"))
                        .failed(),
                    Err(e) => CheckRecord::errored(&cid, anchor, tol.chart, e),
                }
            }
            AtlasCondition::Continuity => match self.transition_jump(&mut rng, 16, 30) {
                Ok(r) => CheckRecord::at_most(&cid, anchor, r, CONTINUITY_JUMP_TOL),
                Err(e) => CheckRecord::errored(&cid, anchor, CONTINUITY_JUMP_TOL, e),
            },
            AtlasCondition::Differentiability => {
                let samples = (budget / 8).max(2);
                match self.transition_remainder_slope(&mut rng, samples, tol.translation) {
                    Ok(Some(s)) => CheckRecord::at_least(&cid, anchor, s, TANGENT_SLOPE),
                    Ok(None) => CheckRecord::vacuous(
                        &cid,
                        anchor,
                        TANGENT_SLOPE,
                        Criterion::AtLeast,
                    )
                    .with_detail(
                        "remainder below the translation noise floor: transitions are affine in f",
                    ),
                    Err(e) => CheckRecord::errored(&cid, anchor, TANGENT_SLOPE, e),
                }
            }
        })
    }
}

/// The four atlas conditions, with (iv) split into its two halves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtlasCondition {
    Cover,
    Bijective,
    OverlapImage,
    Continuity,
    Differentiability,
}

impl AtlasCondition {
    pub const ALL: [AtlasCondition; 5] = [
        AtlasCondition::Cover,
        AtlasCondition::Bijective,
        AtlasCondition::OverlapImage,
        AtlasCondition::Continuity,
        AtlasCondition::Differentiability,
    ];

    pub fn suffix(self) -> &'static str {
        match self {
            AtlasCondition::Cover => "cond1_cover",
            AtlasCondition::Bijective => "cond2_bijective",
            AtlasCondition::OverlapImage => "cond3_overlap_image",
            AtlasCondition::Continuity => "cond4_continuity",
            AtlasCondition::Differentiability => "cond4_differentiability",
        }
    }

    pub fn anchor(self) -> &'static str {
        match self {
            AtlasCondition::Cover => anchors::COVER,
            AtlasCondition::Bijective => anchors::BIJECTIVE,
            AtlasCondition::OverlapImage => anchors::OVERLAP,
            AtlasCondition::Continuity => anchors::CONTINUITY,
            AtlasCondition::Differentiability => anchors::DIFFERENTIABLE,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::Status;

    fn circle() -> QuantumAtlas {
        trivial_quantization(
            circle_atlas(DEFAULT_CIRCLE_SCALE, 0.0),
            ModelSpace::for_degree(32),
            32,
        )
        .unwrap()
    }

    #[test]
    fn circle_transition_branches() {
        let a = circle_atlas(1.0, 0.0);
        let t = a.transition(0, 1, &[PI / 2.0]).unwrap()[0];
        assert!((t - PI / 2.0).abs() < 1e-15);
        let t = a.transition(0, 1, &[-PI / 2.0]).unwrap()[0];
        assert!((t - 3.0 * PI / 2.0).abs() < 1e-15);
        assert!(matches!(
            a.transition(0, 1, &[0.0]),
            Err(Error::OutOfOverlap { .. })
        ));
        assert_eq!(a.overlap_image(0, 1).unwrap().len(), 2);
    }

    #[test]
    fn euclidean_transition_is_identity() {
        let a = euclidean_atlas(2);
        assert_eq!(a.transition(0, 0, &[0.3, -4.0]).unwrap(), vec![0.3, -4.0]);
        assert_eq!(a.overlapping_pairs(), vec![(0, 0)]);
    }

    #[test]
    fn parses_specs() {
        assert_eq!(
            ManifoldSpec::parse("euclidean:2").unwrap(),
            ManifoldSpec::Euclidean { dim: 2 }
        );
        assert_eq!(
            ManifoldSpec::parse("circle").unwrap(),
            ManifoldSpec::Circle { scale: 0.25 }
        );
        assert!(ManifoldSpec::parse("torus").is_err());
        let json: ManifoldSpec = serde_json::from_str(r#"{"kind":"circle"}"#).unwrap();
        assert_eq!(json, ManifoldSpec::Circle { scale: 0.25 });
    }

    #[test]
    fn unscaled_circle_exceeds_shift_range() {
        let r = trivial_quantization(circle_atlas(1.0, 0.0), ModelSpace::for_degree(32), 32);
        assert!(matches!(r, Err(Error::ShiftOutOfRange { .. })));
    }

    #[test]
    fn phi_round_trip_and_expectation() {
        let qa = circle();
        let origin = qa.space.gaussian_section(&[0.0], 32).unwrap();
        let q = QuantumPoint {
            base: ManifoldPoint(vec![5.0]),
            fiber: origin,
        };
        for i in 0..2 {
            let f = qa.phi(i, &q).unwrap();
            let want = qa.classical.charts[i].map(&q.base)[0];
            let got = qa.space.position_expectation(&f).unwrap().as_slice()[0];
            assert!((got - want).abs() < 1e-9);
            let back = qa.phi_inv(i, &f).unwrap();
            assert!(qa.classical.geometry.distance(&back.base, &q.base) < 1e-8);
            assert!(back.fiber.sub(&q.fiber).unwrap().norm() < 1e-8);
        }
        let zero = QuantumPoint {
            base: ManifoldPoint(vec![1.0]),
            fiber: SchwartzFn::zero(1, 32),
        };
        assert!(matches!(
            qa.phi(0, &zero),
            Err(Error::NonzeroRequired { .. })
        ));
    }

    #[test]
    fn transitions_and_recovery() {
        let qa = circle();
        let mut rng = rng_for(3, "atlas-test");
        let g = qa.sample_fiber(&mut rng).unwrap();
        let q = QuantumPoint {
            base: ManifoldPoint(vec![1.0]),
            fiber: g,
        };
        let f = qa.phi(0, &q).unwrap();
        let moved = qa.quantum_transition(0, 1, &f).unwrap();
        assert!(moved.sub(&f).unwrap().norm() < 1e-8);

        let x = -0.5;
        let got = qa.recover_classical_transition(0, 1, &[x]).unwrap()[0];
        assert!(
            (got - (x + TAU * DEFAULT_CIRCLE_SCALE)).abs() < 1e-7,
            "{got}"
        );

        let bad = SchwartzFn::basis(&[0], 32);
        assert!(matches!(
            qa.quantum_transition(0, 1, &bad),
            Err(Error::OutOfOverlap { .. })
        ));
    }

    #[test]
    fn kolmogorov_projection_is_base_point() {
        let qa = circle();
        let mut rng = rng_for(4, "kolmogorov");
        let q = QuantumPoint {
            base: ManifoldPoint(vec![2.0]),
            fiber: qa.sample_fiber(&mut rng).unwrap(),
        };
        let a = qa.kolmogorov_project(0, &q).unwrap();
        let b = qa.kolmogorov_project(1, &q).unwrap();
        assert!(qa.classical.geometry.distance(&a, &q.base) < 1e-9);
        assert!(qa.classical.geometry.distance(&a, &b) < 2e-9);
    }

    #[test]
    fn conditions_hold_for_circle() {
        let qa = circle();
        for rec in qa.verify_quantum_atlas("circle", 1, 8) {
            assert!(rec.passed(), "{rec:?}");
        }
    }

    #[test]
    fn corrupted_transition_fails_continuity() {
        let atlas = corrupted_circle_atlas(DEFAULT_CIRCLE_SCALE, 0.3);
        let qa = trivial_quantization(atlas, ModelSpace::for_degree(32), 32).unwrap();
        let recs = qa.verify_quantum_atlas("corrupt", 1, 8);
        let cont = recs
            .iter()
            .find(|r| r.id.ends_with("cond4_continuity"))
            .unwrap();
        assert_eq!(cont.status, Status::Fail, "{cont:?}");
        assert!(cont.residual.unwrap() > 0.2);
    }
}
