//! Named verification suites: a catalog of checks, each producing one
//! [`CheckRecord`], plus convergence sweeps over the truncation degree.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::atlas::{
    circle_atlas, corrupted_circle_atlas, euclidean_atlas, trivial_quantization, AtlasCondition,
    ClassicalAtlas, ManifoldSpec, QuantumAtlas, QuantumPoint, CONTINUITY_JUMP_TOL,
    DEFAULT_CIRCLE_SCALE,
};
use crate::bundle::{product_norm, FiberPoint};
use crate::config::{ModelSpace, Tolerances};
use crate::error::{Error, Result};
use crate::expectation::{euclid, inf_dist};
use crate::hermite::{
    apply_momentum, apply_position, inner, nuclear_quadratic_form, nuclear_seminorm, sup_seminorm,
    GridSpec, MultiIndex, SchwartzFn,
};
use crate::random::{complex_scalar, profile_fn, rng_for, shift_in_ball, SampleRng};
use crate::report::{timed, CheckRecord, Criterion, VerificationReport};
use crate::tangent::{
    geometric_grid, tangent_slope, NormSelector, Residual, TangentSlopeReport, TangentVerdict,
    TANGENT_SLOPE,
};
use crate::tensor;
use crate::Complex64;

pub const SUITES: [&str; 8] = [
    "model-space",
    "expectation",
    "translation",
    "bundle",
    "atlas-euclidean",
    "atlas-circle",
    "appendix-b",
    "all",
];

/// Default 2D degree; 2D checks run at `min(K, DEGREE_2D)`.
pub const DEGREE_2D: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SampleCounts {
    /// Random inputs for identities checked pointwise.
    pub random: usize,
    pub round_trip: usize,
    pub bound_pairs: usize,
    pub norm_bounds: usize,
    /// Configurations per remainder-slope check.
    pub slope_configs: usize,
    /// Samples per chart or chart pair.
    pub atlas: usize,
}

impl Default for SampleCounts {
    fn default() -> Self {
        SampleCounts {
            random: 100,
            round_trip: 200,
            bound_pairs: 500,
            norm_bounds: 200,
            slope_configs: 20,
            atlas: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SuiteConfig {
    pub suite: String,
    /// Overrides the parameters of the matching atlas suite.
    pub manifold: Option<ManifoldSpec>,
    pub degree: usize,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub samples: SampleCounts,
    pub out: Option<PathBuf>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            suite: "all".into(),
            manifold: None,
            degree: 32,
            seed: 0,
            tolerances: Tolerances::default(),
            samples: SampleCounts::default(),
            out: None,
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        if !SUITES.contains(&self.suite.as_str()) {
            return Err(Error::UnknownSuite(self.suite.clone()));
        }
        if self.degree == 0 {
            return Err(Error::Precondition("degree must be at least 1".into()));
        }
        if let Some(ManifoldSpec::Euclidean { dim: 0 }) = self.manifold {
            return Err(Error::Precondition(
                "euclidean manifold needs dimension >= 1".into(),
            ));
        }
        if let Some(ManifoldSpec::Circle { scale }) = self.manifold {
            if !(scale.is_finite() && scale > 0.0) {
                return Err(Error::Precondition(format!(
                    "circle scale must be positive, got {scale}"
                )));
            }
        }
        self.tolerances.validate()
    }

    fn euclidean_dim(&self) -> usize {
        match self.manifold {
            Some(ManifoldSpec::Euclidean { dim }) => dim,
            _ => 2,
        }
    }

    fn circle_scale(&self) -> f64 {
        match self.manifold {
            Some(ManifoldSpec::Circle { scale }) => scale,
            _ => DEFAULT_CIRCLE_SCALE,
        }
    }
}

/// Shared state for one suite run.
pub struct SuiteContext {
    pub config: SuiteConfig,
    /// 1D context at degree `K`.
    pub space: ModelSpace,
    /// 2D degree `min(K, 16)` and its context.
    pub degree_2d: usize,
    pub space_2d: ModelSpace,
}

impl SuiteContext {
    pub fn new(config: SuiteConfig) -> Result<Self> {
        config.validate()?;
        let k = config.degree;
        let degree_2d = k.min(DEGREE_2D);
        Ok(SuiteContext {
            space: ModelSpace::for_degree(k).with_tolerances(config.tolerances),
            space_2d: ModelSpace::for_degree(degree_2d).with_tolerances(config.tolerances),
            degree_2d,
            config,
        })
    }

    fn k(&self) -> usize {
        self.config.degree
    }

    fn tol(&self) -> Tolerances {
        self.config.tolerances
    }

    fn rng(&self, spec: &CheckSpec) -> SampleRng {
        rng_for(self.config.seed, &spec.id)
    }

    /// Unit-norm random function of degree `K` (1D) or `min(K, 16)` (2D),
    /// with coefficients concentrated on the lowest sixth of the range.
    fn profile(&self, rng: &mut SampleRng, dim: usize) -> SchwartzFn {
        let k = if dim == 1 { self.k() } else { self.degree_2d };
        profile_fn(rng, dim, k, (k as f64 / 6.0).max(1.0))
    }

    fn space_for(&self, dim: usize) -> &ModelSpace {
        if dim == 1 {
            &self.space
        } else {
            &self.space_2d
        }
    }

    /// Mostly 1D draws with every fifth one in 2D.
    fn dim_for(i: usize) -> usize {
        if i % 5 == 4 {
            2
        } else {
            1
        }
    }

    fn fiber_sample(&self, rng: &mut SampleRng, dim: usize) -> Result<SchwartzFn> {
        let f = self.profile(rng, dim);
        self.space_for(dim).project_to_fiber(&f)
    }

    fn euclidean_quantum(&self) -> Result<QuantumAtlas> {
        let dim = self.config.euclidean_dim();
        let degree = match dim {
            1 => self.k(),
            2 => self.degree_2d,
            _ => self.k().min(8),
        };
        let space = ModelSpace::for_degree(degree).with_tolerances(self.tol());
        trivial_quantization(euclidean_atlas(dim), space, degree)
    }

    fn circle_quantum(&self, atlas: ClassicalAtlas) -> Result<QuantumAtlas> {
        trivial_quantization(atlas, self.space, self.k())
    }

    fn quantum(&self, kind: AtlasKind) -> Result<QuantumAtlas> {
        match kind {
            AtlasKind::Euclidean => self.euclidean_quantum(),
            AtlasKind::Circle => self.circle_quantum(circle_atlas(self.config.circle_scale(), 0.0)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtlasKind {
    Euclidean,
    Circle,
}

impl AtlasKind {
    fn label(self) -> &'static str {
        match self {
            AtlasKind::Euclidean => "euclidean",
            AtlasKind::Circle => "circle",
        }
    }

    fn suite(self) -> &'static str {
        match self {
            AtlasKind::Euclidean => "atlas-euclidean",
            AtlasKind::Circle => "atlas-circle",
        }
    }
}

type PlainCheck = fn(&SuiteContext, &CheckSpec) -> CheckRecord;
type AtlasCheck = fn(&SuiteContext, &QuantumAtlas, &CheckSpec) -> CheckRecord;
type SweepProbe = fn(usize, Tolerances) -> Result<f64>;
type SeminormFn<'a> = dyn Fn(&SchwartzFn) -> Result<f64> + 'a;

#[derive(Clone, Copy)]
enum Runner {
    Plain(PlainCheck),
    Atlas(AtlasKind, AtlasCheck),
    Condition(AtlasKind, AtlasCondition),
}

/// One catalog entry.
#[derive(Clone)]
pub struct CheckSpec {
    pub id: String,
    /// The identity or bound exercised, or `"plumbing"`.
    pub anchor: String,
    pub suites: Vec<&'static str>,
    runner: Runner,
    sweep: Option<SweepProbe>,
}

impl CheckSpec {
    fn plain(id: &str, anchor: &str, suites: &[&'static str], run: PlainCheck) -> Self {
        CheckSpec {
            id: id.into(),
            anchor: anchor.into(),
            suites: suites.to_vec(),
            runner: Runner::Plain(run),
            sweep: None,
        }
    }

    fn sweepable(mut self, probe: SweepProbe) -> Self {
        self.sweep = Some(probe);
        self
    }

    pub fn supports_sweep(&self) -> bool {
        self.sweep.is_some()
    }

    fn in_suite(&self, suite: &str) -> bool {
        suite == "all" || self.suites.contains(&suite)
    }

    fn at_most(&self, residual: f64, tol: f64) -> CheckRecord {
        CheckRecord::at_most(&self.id, &self.anchor, residual, tol)
    }

    fn at_least(&self, value: f64, threshold: f64) -> CheckRecord {
        CheckRecord::at_least(&self.id, &self.anchor, value, threshold)
    }

    /// Runs `body`; an error becomes a failing record carrying the message.
    fn attempt(&self, tol: f64, body: impl FnOnce() -> Result<CheckRecord>) -> CheckRecord {
        body().unwrap_or_else(|e| CheckRecord::errored(&self.id, &self.anchor, tol, e))
    }

    fn attempt_at_least(
        &self,
        threshold: f64,
        body: impl FnOnce() -> Result<CheckRecord>,
    ) -> CheckRecord {
        body().unwrap_or_else(|e| {
            let mut rec = CheckRecord::errored(&self.id, &self.anchor, threshold, e);
            rec.criterion = Criterion::AtLeast;
            rec
        })
    }

    fn run(&self, ctx: &SuiteContext) -> CheckRecord {
        timed(|| match self.runner {
            Runner::Plain(f) => f(ctx, self),
            Runner::Atlas(kind, f) => match ctx.quantum(kind) {
                Ok(qa) => f(ctx, &qa, self),
                Err(e) => CheckRecord::errored(&self.id, &self.anchor, 0.0, e),
            },
            Runner::Condition(kind, c) => match ctx.quantum(kind) {
                Ok(qa) => {
                    let prefix = format!("atlas.{}", kind.label());
                    qa.verify_condition(c, &prefix, ctx.config.seed, ctx.config.samples.atlas)
                }
                Err(e) => CheckRecord::errored(&self.id, &self.anchor, 0.0, e),
            },
        })
    }
}

mod anchor {
    pub const NUCLEAR: &str = "‖f‖_p² = ⟨f, (Q² + P² + 𝟙)^p f⟩ = Σ |c_k|² (2|k| + n + 1)^p";
    pub const QF_BOUNDS: &str = "‖f‖ ≤ ‖f‖₁, ‖Qf‖ ≤ ‖f‖₁";
    pub const COMMUTATOR: &str = "[Qⁱ, Pʲ] = iδⁱʲ";
    pub const SEMINORM: &str = "seminorm axioms: ‖λf‖ = |λ|‖f‖, ‖f + g‖ ≤ ‖f‖ + ‖g‖";
    pub const SUP: &str = "‖f‖_{α,β} = sup |x^α D_β f|";
    pub const NONZERO: &str = "Q̄ defined on 𝒮^{≠0}";
    pub const SECTION: &str = "Q̄(Ψ(x)) = x";
    pub const DQ: &str = "DQ̄(f₀)(f) = 2Re⟨(Q − Q̄(f₀))f₀, f⟩ / ‖f₀‖²";
    pub const DQ_REMAINDER: &str = "Q̄(f₀ + tf) − Q̄(f₀) − t·DQ̄(f₀)(f) = o(t)";
    pub const CONTINUITY_BOUND: &str =
        "|Q̄(f₀+f) − Q̄(f₀)| ≤ 4‖f‖₁‖f₀‖⁻³[(‖Qf₀‖ + ‖f₀‖ + ‖f‖₁)‖f₀‖ + ‖Qf₀‖(2‖f₀‖ + ‖f‖₁)] for ‖f‖ < ½‖f₀‖";
    pub const SCALE: &str = "Q̄(λf) = Q̄(f)";
    pub const INDISTINGUISHABLE: &str = "f ~ g iff Q̄(f) = Q̄(g)";
    pub const SHIFT: &str = "Q̄(T_x f) = Q̄(f) + x";
    pub const GROUP: &str = "T_y T_x = T_{x+y}";
    pub const INVERSE: &str = "T_{−x} T_x = 𝟙";
    pub const LINEAR: &str = "T_x(λf + g) = λT_x f + T_x g";
    pub const UNITARY: &str = "‖T_x f‖ = ‖f‖";
    pub const TRANSLATION_CONTINUITY: &str = "‖T_{x₀+x} f − T_{x₀} f‖₁ = O(|x|)";
    pub const INJECTIVE: &str = "x ↦ T_x f and f ↦ T_x f injective";
    pub const JOINT: &str = "T(x₀+x, f₀+f) − T(x₀, f₀) split into function and shift terms";
    pub const TAU_ROUND_TRIP: &str = "τ(f) = (Q̄(f), T_{−Q̄(f)} f), τ⁻¹(x, g) = T_x g";
    pub const FIBER: &str = "Q̄(T_{−Q̄(f)} f) = 0";
    pub const DTAU: &str =
        "Dτ(f₀)(g) = (DQ̄(f₀)(g), Σᵢ DQ̄ᵢ(f₀)(g) ∂ᵢ(T_{−Q̄(f₀)} f₀) + T_{−Q̄(f₀)} g)";
    pub const DTAU_INV: &str =
        "Dτ⁻¹(x₀, g₀)(x, g) = −Σᵢ xᵢ ∂ᵢ(T_{x₀} g₀) + T_{x₀} g on DQ̄(g₀)(g) = 0";
    pub const DTAU_REMAINDER: &str = "τ(f₀+tg) − τ(f₀) − t·Dτ(f₀)(g) = o(t)";
    pub const DTAU_INV_REMAINDER: &str = "T_{x₀+tx}(g₀+tg) − T_{x₀}g₀ − t·Dτ⁻¹(x₀,g₀)(x,g) = o(t)";
    pub const MUTUAL_INVERSE: &str = "Dτ⁻¹ ∘ Dτ = 𝟙, Dτ ∘ Dτ⁻¹ = 𝟙";
    pub const DTAU_LINEAR: &str = "Dτ(f₀) and Dτ⁻¹(x₀, g₀) are linear";
    pub const TRANSITION: &str = "Q̄ ∘ φ_ji ∘ Ψ = χ_ji";
    pub const OMEGA: &str = "ω₁ = 𝒬, ω = (χᵢ⁻¹ × id) ∘ τ ∘ φᵢ";
    pub const CLASSICAL_LIMIT: &str =
        "classical limit of a trivial quantization returns the classical atlas";
    pub const KOLMOGOROV: &str = "f ~ g iff 𝒬(f) = 𝒬(g)";
    pub const KOLMOGOROV_CHARTS: &str = "𝒬 = χᵢ⁻¹ ∘ Q̄ ∘ φᵢ independent of i";
    pub const COCYCLE: &str = "φ_ij ∘ φ_ji = 𝟙 on overlaps";
    pub const COMPATIBLE: &str = "union of compatible atlases is a quantum atlas";
    pub const NEGATIVE_TRANSITION: &str = "corrupted χ₂ breaks continuity of φ_ji";
    pub const NEGATIVE_TANGENT: &str = "o(t) = t² rejects a linear remainder";
}

/// Every check, in catalog order.
pub fn catalog() -> Vec<CheckSpec> {
    use CheckSpec as C;
    const MODEL: &[&str] = &["model-space"];
    const EXP: &[&str] = &["expectation"];
    const EXP_B: &[&str] = &["expectation", "appendix-b"];
    const TR: &[&str] = &["translation"];
    const TR_B: &[&str] = &["translation", "appendix-b"];
    const BUN: &[&str] = &["bundle"];
    const BUN_B: &[&str] = &["bundle", "appendix-b"];
    let mut out = vec![
        C::plain("model.nuclear_exact", anchor::NUCLEAR, MODEL, nuclear_exact),
        C::plain(
            "model.qf_bounds",
            anchor::QF_BOUNDS,
            &["model-space", "appendix-b"],
            qf_bounds,
        ),
        C::plain("model.commutator", anchor::COMMUTATOR, MODEL, commutator),
        C::plain(
            "model.seminorm_axioms",
            anchor::SEMINORM,
            MODEL,
            seminorm_axioms,
        ),
        C::plain(
            "model.sup_grid_convergence",
            anchor::SUP,
            MODEL,
            sup_grid_convergence,
        ),
        C::plain("model.serialization", "plumbing", MODEL, serialization),
        C::plain(
            "model.zero_rejected",
            anchor::NONZERO,
            &["model-space", "expectation"],
            zero_rejected,
        ),
        C::plain("expectation.section", anchor::SECTION, EXP, section).sweepable(section_probe),
        C::plain(
            "expectation.dq_finite_difference",
            anchor::DQ,
            EXP,
            dq_finite_difference,
        ),
        C::plain(
            "expectation.dq_remainder",
            anchor::DQ_REMAINDER,
            EXP_B,
            dq_remainder,
        ),
        C::plain("expectation.dq_linearity", anchor::DQ, EXP, dq_linearity),
        C::plain(
            "expectation.continuity_bound",
            anchor::CONTINUITY_BOUND,
            EXP_B,
            continuity_bound,
        ),
        C::plain(
            "expectation.scale_invariance",
            anchor::SCALE,
            EXP,
            scale_invariance,
        ),
        C::plain(
            "expectation.indistinguishability",
            anchor::INDISTINGUISHABLE,
            EXP,
            indistinguishability,
        ),
        C::plain(
            "translation.expectation_shift",
            anchor::SHIFT,
            TR,
            expectation_shift,
        ),
        C::plain("translation.group_law", anchor::GROUP, TR, group_law),
        C::plain("translation.inverse_law", anchor::INVERSE, TR, inverse_law)
            .sweepable(inverse_probe),
        C::plain(
            "translation.linearity",
            anchor::LINEAR,
            TR,
            translation_linearity,
        ),
        C::plain("translation.unitarity", anchor::UNITARY, TR, unitarity),
        C::plain(
            "translation.continuity_modulus",
            anchor::TRANSLATION_CONTINUITY,
            TR_B,
            continuity_modulus,
        ),
        C::plain(
            "translation.injectivity",
            anchor::INJECTIVE,
            TR_B,
            injectivity,
        ),
        C::plain(
            "translation.joint_continuity",
            anchor::JOINT,
            TR_B,
            joint_continuity,
        ),
        C::plain(
            "bundle.tau_round_trip",
            anchor::TAU_ROUND_TRIP,
            BUN,
            tau_round_trip,
        )
        .sweepable(tau_probe),
        C::plain(
            "bundle.fiber_invariance",
            anchor::FIBER,
            BUN,
            fiber_invariance,
        ),
        C::plain(
            "bundle.dtau_finite_difference",
            anchor::DTAU,
            BUN_B,
            dtau_finite_difference,
        ),
        C::plain(
            "bundle.dtau_inv_finite_difference",
            anchor::DTAU_INV,
            BUN_B,
            dtau_inv_finite_difference,
        ),
        C::plain(
            "bundle.dtau_remainder",
            anchor::DTAU_REMAINDER,
            BUN_B,
            dtau_remainder,
        ),
        C::plain(
            "bundle.dtau_inv_remainder",
            anchor::DTAU_INV_REMAINDER,
            BUN_B,
            dtau_inv_remainder,
        ),
        C::plain(
            "bundle.mutual_inverse",
            anchor::MUTUAL_INVERSE,
            BUN_B,
            mutual_inverse,
        ),
        C::plain(
            "bundle.differential_linearity",
            anchor::DTAU_LINEAR,
            BUN,
            differential_linearity,
        ),
        C::plain(
            "tangent.negative_control",
            anchor::NEGATIVE_TANGENT,
            &["appendix-b"],
            tangent_negative_control,
        ),
    ];
    for kind in [AtlasKind::Euclidean, AtlasKind::Circle] {
        let label = kind.label();
        let suites = vec![kind.suite()];
        for c in AtlasCondition::ALL {
            out.push(CheckSpec {
                id: format!("atlas.{label}.{}", c.suffix()),
                anchor: c.anchor().into(),
                suites: suites.clone(),
                runner: Runner::Condition(kind, c),
                sweep: None,
            });
        }
        let atlas_checks: [(&str, &str, AtlasCheck); 6] = [
            (
                "transition_recovery",
                anchor::TRANSITION,
                transition_recovery,
            ),
            ("local_triviality", anchor::OMEGA, local_triviality),
            ("classical_limit", anchor::CLASSICAL_LIMIT, classical_limit),
            ("kolmogorov_fibers", anchor::KOLMOGOROV, kolmogorov_fibers),
            (
                "kolmogorov_charts",
                anchor::KOLMOGOROV_CHARTS,
                kolmogorov_charts,
            ),
            ("cocycle", anchor::COCYCLE, cocycle),
        ];
        for (name, anchor, f) in atlas_checks {
            out.push(CheckSpec {
                id: format!("atlas.{label}.{name}"),
                anchor: anchor.into(),
                suites: suites.clone(),
                runner: Runner::Atlas(kind, f),
                sweep: None,
            });
        }
    }
    out.push(C::plain(
        "atlas.circle.compatibility",
        anchor::COMPATIBLE,
        &["atlas-circle"],
        compatibility,
    ));
    out.push(C::plain(
        "atlas.circle.negative_control",
        anchor::NEGATIVE_TRANSITION,
        &["atlas-circle"],
        corrupted_transition,
    ));
    out
}

/// Checks of `suite`, or an error for an unknown suite name.
pub fn checks_in(suite: &str) -> Result<Vec<CheckSpec>> {
    if !SUITES.contains(&suite) {
        return Err(Error::UnknownSuite(suite.into()));
    }
    Ok(catalog()
        .into_iter()
        .filter(|c| c.in_suite(suite))
        .collect())
}

/// Runs every check of `config.suite` in parallel. The report is sorted by
/// check id and echoes the full config; nothing is written to disk here.
pub fn run_suite(config: &SuiteConfig) -> Result<VerificationReport> {
    let ctx = SuiteContext::new(config.clone())?;
    let checks = checks_in(&config.suite)?;
    let records: Vec<CheckRecord> = checks.par_iter().map(|c| c.run(&ctx)).collect();
    let echo = serde_json::to_value(config).map_err(|e| Error::Format(e.to_string()))?;
    Ok(VerificationReport::new(echo, records))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub degree: usize,
    pub residual: f64,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub check: String,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("K,residual,wall_time\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{:e},{:.6}\n",
                r.degree, r.residual, r.wall_time_s
            ));
        }
        s
    }

    /// True if no residual exceeds an earlier one by more than `floor`.
    pub fn non_increasing(&self, floor: f64) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].residual <= w[0].residual + floor)
    }
}

/// Measures the truncation error of a sweepable check at each degree.
///
/// Size tolerances (section, translation, fiber) are lifted to 1 so that
/// a low degree reports its error instead of refusing to run.
pub fn convergence_sweep(
    check_id: &str,
    degrees: &[usize],
    tolerances: Tolerances,
) -> Result<SweepTable> {
    let spec = catalog()
        .into_iter()
        .find(|c| c.id == check_id)
        .ok_or_else(|| Error::UnsupportedSweep(check_id.into()))?;
    let probe = spec
        .sweep
        .ok_or_else(|| Error::UnsupportedSweep(check_id.into()))?;
    if degrees.is_empty() || degrees.contains(&0) {
        return Err(Error::Precondition(
            "sweep needs a nonempty list of positive degrees".into(),
        ));
    }
    let mut tol = tolerances;
    tol.section = 1.0;
    tol.translation = 1.0;
    tol.fiber = 1.0;
    let rows = degrees
        .iter()
        .map(|&k| {
            let start = Instant::now();
            let residual = probe(k, tol)?;
            Ok(SweepRow {
                degree: k,
                residual,
                wall_time_s: start.elapsed().as_secs_f64(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable {
        check: check_id.into(),
        rows,
    })
}

fn sweep_space(k: usize, tol: Tolerances) -> ModelSpace {
    ModelSpace::for_degree(k).with_tolerances(tol)
}

fn section_probe(k: usize, tol: Tolerances) -> Result<f64> {
    let s = sweep_space(k, tol);
    let psi = s.gaussian_section(&[2.0], k)?;
    Ok((s.position_expectation(&psi)?.as_slice()[0] - 2.0).abs())
}

fn inverse_probe(k: usize, tol: Tolerances) -> Result<f64> {
    let s = sweep_space(k, tol);
    let f = s.gaussian_section_with_width(&[0.3], k, 1.3)?;
    let back = s.translate(&s.translate(&f, &[1.5])?, &[-1.5])?;
    Ok(back.sub(&f)?.norm() / f.norm())
}

fn tau_probe(k: usize, tol: Tolerances) -> Result<f64> {
    let s = sweep_space(k, tol);
    let f = s.gaussian_section_with_width(&[0.7], k, 1.3)?;
    let p = s.trivialize(&f)?;
    let (forward, back) = s.trivialization_round_trips(&p)?;
    Ok(forward.max(back))
}

// ---------------------------------------------------------------- model space

/// `⟨f, (Σᵢ QᵢQᵢ + PᵢPᵢ + 𝟙)^p f⟩` by repeated ladder applications.
fn operator_form(f: &SchwartzFn, p: u32) -> Result<f64> {
    let mut v = f.clone();
    for _ in 0..p {
        let mut next = v.clone();
        for axis in 0..f.dim() {
            next = next.add(&apply_position(&apply_position(&v, axis)?, axis)?)?;
            next = next.add(&apply_momentum(&apply_momentum(&v, axis)?, axis)?)?;
        }
        v = next;
    }
    Ok(inner(f, &v)?.re)
}

fn nuclear_exact(ctx: &SuiteContext, spec: &CheckSpec) -> CheckRecord {
    spec.attempt(1e-12, || {
        let mut rng = ctx.rng(spec);
        let mut worst = 0.0f64;
        for n in [1usize, 2] {
            let mut inputs = Vec::new();
            tensor::for_each_index(&vec![9; n], |_, idx| inputs.push(SchwartzFn::basis(idx, 8)));
            for _ in 0..10 {
                inputs.push(profile_fn(&mut rng, n, 8, 3.0));
            }
            for f in &inputs {
                for p in 0..=3 {
                    let exact = operator_form(f, p)?;
                    let diagonal = nuclear_quadratic_form(f, p);
                    worst = worst.max((exact - diagonal).abs() / diagonal);
                }
            }
        }
        Ok(spec.at_most(worst, 1e-12))
    })
}

fn qf_bounds(ctx: &SuiteContext, spec: &CheckSpec) -> CheckRecord {
    spec.attempt(1.0, || {
        let mut rng = ctx.rng(spec);
        let mut worst = 0.0f64;
        for i in 0..ctx.config.samples.norm_bounds {
            let dim = SuiteContext::dim_for(i);
            let k = if dim == 1 { ctx.k() } else { ctx.degree_2d };
            let width = rng.random_range(0.5..=(k as f64 / 2.0).max(1.0));
            let f = profile_fn(&mut rng, dim, k, width).scale(complex_scalar(&mut rng));
            let q = crate::expectation::position_norm(&f)?;
            worst = worst.max(f.norm().max(q) / nuclear_seminorm(&f, 1));
        }
        Ok(spec.at_most(worst, 1.0))
    })
}

fn commutator(ctx: &SuiteContext, spec: &CheckSpec) -> CheckRecord {
    spec.attempt(1e-12, || {
        let mut rng = ctx.rng(spec);
        let mut worst = 0.0f64;
        for i in 0..20 {
            let dim = SuiteContext::dim_for(i);
            let f = ctx.profile(&mut rng, dim);
            for a in 0..dim {
                for b in 0..dim {
                    let qp = apply_position(&apply_momentum(&f, b)?, a)?;
                    let pq = apply_momentum(&apply_position(&f, a)?, b)?;
                    let delta = if a == b { 1.0 } else { 0.0 };
                    let expected = f.scale(Complex64::new(0.0, delta)).pad_to(qp.degree());
                    worst = worst.max(qp.sub(&pq)?.sub(&expected)?.norm() / f.norm());
                }
            }
        }
        Ok(spec.at_most(worst, 1e-12))
    })
}

fn seminorm_axioms(ctx: &SuiteContext, spec: &CheckSpec) -> CheckRecord {
    spec.attempt(1e-12, || {
        let mut rng = ctx.rng(spec);
        let k = ctx.k().min(16);
        let grid = GridSpec::for_degree(k + 2, ctx.tol().grid_margin, 2001)?;
        let (alpha, beta) = (MultiIndex::new([1]), MultiIndex::new([1]));
        let mut worst = 0.0f64;
        for _ in 0..20 {
            let f = profile_fn(&mut rng, 1, k, 3.0);
            let g = profile_fn(&mut rng, 1, k, 3.0).scale_real(rng.random_range(0.1..2.0));
            let lambda = complex_scalar(&mut rng);
            let sup = |h: &SchwartzFn| sup_seminorm(h, &alpha, &beta, &grid, ctx.tol().grid_margin);
            let mut norms: Vec<Box<SeminormFn>> = vec![Box::new(sup)];
            for p in 1..=3 {
                norms.push(Box::new(move |h: &SchwartzFn| Ok(nuclear_seminorm(h, p))));
            }
            for norm in &norms {
                let (nf, ng) = (norm(&f)?, norm(&g)?);
                let homog =
                    (norm(&f.scale(lambda))? - lambda.norm() * nf).abs() / (lambda.norm() * nf);
                let triangle = (norm(&f.add(&g)?)? - nf - ng).max(0.0) / (nf + ng);
                worst = worst.max(homog).max(triangle);
            }
        }
        Ok(spec.at_most(worst, 1e-12))
    })
}

fn sup_grid_convergence(ctx: &SuiteContext, spec: &CheckSpec) -> CheckRecord {
    spec.attempt(1e-8, || {
        let mut rng = ctx.rng(spec);
        let k = ctx.k().min(16);
        let f = profile_fn(&mut rng, 1, k, 3.0);
        let pairs = [([0], [0]), ([1], [0]), ([0], [1]), ([2], [1])];
        let mut worst = 0.0f64;
        for (a, b) in pairs {
            let (alpha, beta) = (MultiIndex::new(a), MultiIndex::new(b));
            let margin = ctx.tol().grid_margin;
            let mut grid = GridSpec::for_degree(k + 3, margin, 4097)?;
            let mut prev = sup_seminorm(&f, &alpha, &beta, &grid, margin)?;
            let mut change = f64::INFINITY;
            while grid.points_per_axis < (1 << 20) {
                grid = grid.refined();
                let next = sup_seminorm(&f, &alpha, &beta, &grid, margin)?;
                change = (next - prev) / next;
                prev = next;
                if change < 1e-8 {
                    break;
                }
            }
            worst = worst.max(change);
        }
        Ok(spec.at_most(worst, 1e-8))
    })
}

fn serialization(ctx: &SuiteContext, spec: &CheckSpec) -> CheckRecord {
    spec.attempt(0.0, || {
        let mut rng = ctx.rng(spec);
        let mut mismatches = 0usize;
        for i in 0..20 {
            let f = ctx.profile(&mut rng, SuiteContext::dim_for(i));
            mismatches += usize::from(SchwartzFn::from_json(&f.to_json())? != f);
            mismatches += usize::from(SchwartzFn::from_bytes(&f.to_bytes())? != f);
        }
        Ok(spec.at_most(mismatches as f64, 0.0))
    })
}

fn zero_rejected(ctx: &SuiteContext, spec: &CheckSpec) -> CheckRecord {
    spec.attempt(0.0, || {
        let s = &ctx.space;
        let zero = SchwartzFn::zero(1, ctx.k());
        let f = ctx.profile(&mut ctx.rng(spec), 1);
        let rejected = |r: Result<()>| matches!(r, Err(Error::NonzeroRequired { .. }));
        let outcomes = [
            (
                "expectation",
                rejected(s.position_expectation(&zero).map(drop)),
            ),
            (
                "d_expectation",
                rejected(s.d_expectation(&zero, &f).map(drop)),
            ),
            (
                "continuity_bound_check",
                rejected(s.continuity_bound_check(&zero, &f).map(drop)),
            ),
            (
                "indistinguishable",
                rejected(s.indistinguishable(&zero, &f, 1.0).map(drop)),
            ),
            (
                "project_to_fiber",
                rejected(s.project_to_fiber(&zero).map(drop)),
            ),
            ("trivialize", rejected(s.trivialize(&zero).map(drop))),
            (
                "fiber_point",
                rejected(FiberPoint::new(s, vec![0.0], zero.clone()).map(drop)),
            ),
            (
                "translation_group",
                rejected(s.verify_translation_group(&zero, &[0.5], &[0.5]).map(drop)),
            ),
        ];
        let accepted: Vec<&str> = outcomes
            .iter()
            .filter(|(_, ok)| !ok)
            .map(|(n, _)| *n)
            .collect();
        let rec = spec.at_most(accepted.len() as f64, 0.0);
        Ok(if accepted.is_empty() {
            rec
        } else {
            rec.with_detail(format!(
                "accepted the zero function: {}",
                accepted.join(", ")
            ))
        })
    })
}

// ---------------------------------------------------------------- expectation

fn section(ctx: &SuiteContext, spec: &CheckSpec) -> CheckRecord {
    spec.attempt(1e-9, || {
        let mut rng = ctx.rng(spec);
        let mut xs = vec![-2.0, 0.0, 2.0];
        xs.extend((0..20).map(|_| rng.random_range(-2.0..=2.0)));
        let mut worst = 0.0f64;
        for x in xs {
            let psi = ctx.space.gaussian_section(&[x], ctx.k())?;
            worst = worst.max((ctx.space.position_expectation(&psi)?.as_slice()[0] - x).abs());
        }
        Ok(spec.at_most(worst, 1e-9))
    })
}

fn dq_finite_difference(ctx: &SuiteContext, spec: &CheckSpec) -> CheckRecord {
    spec.attempt(1e-6, || {
        let mut rng = ctx.rng(spec);
        let t = 1e-5;
        let mut worst = 0.0f64;
        for i in 0..ctx.config.samples.random {
            let dim = SuiteContext::dim_for(i);
            let s = ctx.space_for(dim);
            let f0 = ctx.profile(&mut rng, dim);
            let f = ctx.profile(&mut rng, dim);
            let analytic = s.d_expectation(&f0, &f)?;
            let plus = s
                .position_expectation(&f0.add(&f.scale_real(t))?)?
                .into_vec();
            let minus = s
                .position_expectation(&f0.sub(&f.scale_real(t))?)?
                .into_vec();
            let fd: Vec<f64> = plus
                .iter()
                .zip(&minus)
                .map(|(a, b)| (a - b) / (2.0 * t))
                .collect();
            let scale = analytic
                .iter()
                .fold(f.norm() / f0.norm(), |m, v| m.max(v.abs()));
            worst = worst.max(inf_dist(&fd, &analytic) / scale);
        }
        Ok(spec.at_most(worst, 1e-6))
    })
}

fn dq_remainder(ctx: &SuiteContext, spec: &CheckSpec) -> CheckRecord {
    spec.attempt_at_least(TANGENT_SLOPE, || {
        let mut rng = ctx.rng(spec);
        let grid = geometric_grid(1e-3, 1e-5, 5);
        let mut slopes = Vec::new();
        for i in 0..ctx.config.samples.slope_configs {
            let dim = SuiteContext::dim_for(i);
            let s = ctx.space_for(dim);
            let f0 = ctx.profile(&mut rng, dim);
            let f = ctx.profile(&mut rng, dim);
            let q0 = s.position_expectation(&f0)?.into_vec();
            let dq = s.d_expectation(&f0, &f)?;
            let rep = tangent_slope(
                |t, f0| {
                    let q = s
                        .position_expectation(&f0.add(&f.scale_real(t))?)?
                        .into_vec();
                    Ok(Residual::Vector(
                        (0..q.len()).map(|a| q[a] - q0[a] - t * dq[a]).collect(),
                    ))
                },
                &f0,
                NormSelector::L2,
                &grid,
            )?;
            slopes.push(rep);
        }
        Ok(min_slope_record(spec, &slopes))
    })
}

/// Smallest fitted slope among non-vacuous reports; the detail lists the
/// residuals of the worst configuration.
fn min_slope_record(spec: &CheckSpec, reports: &[TangentSlopeReport]) -> CheckRecord {
    let fitted = reports
        .iter()
        .filter(|r| r.verdict != TangentVerdict::Vacuous);
    match fitted.min_by(|a, b| a.fitted_slope.total_cmp(&b.fitted_slope)) {
        Some(worst) => spec
            .at_least(worst.fitted_slope, TANGENT_SLOPE)
            .with_detail(format!(
                "{} configurations; worst residuals {:.3e} at t = {:.0e}",
                reports.len(),
                Fmt(&worst.residual_norms),
                Fmt(&worst.t_values)
            )),
        None => CheckRecord::vacuous(&spec.id, &spec.anchor, TANGENT_SLOPE, Criterion::AtLeast),
    }
}

struct Fmt<'a>(&'a [f64]);

impl std::fmt::LowerExp for Fmt<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            std::fmt::LowerExp::fmt(v, f)?;
        }
        write!(f, "]")
    }
}

fn dq_linearity(ctx: &SuiteContext, spec: &CheckSpec) -> CheckRecord {
    spec.attempt(1e-12, || {
        let mut rng = ctx.rng(spec);
        let mut worst = 0.0f64;
        for i in 0..ctx.config.samples.random {
            let dim = SuiteContext::dim_for(i);
            let s = ctx.space_for(dim);
            let (f0, f, g) = (
                ctx.profile(&mut rng, dim),
                ctx.profile(&mut rng, dim),
                ctx.profile(&mut rng, dim),
            );
            let (a, b) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let lhs = s.d_expectation(&f0, &f.scale_real(a).add(&g.scale_real(b))?)?;
            let (df, dg) = (s.d_expectation(&f0, &f)?, s.d_expectation(&f0, &g)?);
            let rhs: Vec<f64> = df.iter().zip(&dg).map(|(u, v)| a * u + b * v).collect();
            worst = worst.max(inf_dist(&lhs, &rhs) / (a.abs() + b.abs()).max(1.0));
        }
        Ok(spec.at_most(worst, 1e-12))
    })
}

fn continuity_bound(ctx: &SuiteContext, spec: &CheckSpec) -> CheckRecord {
    spec.attempt(1.0, || {
        let mut rng = ctx.rng(spec);
        let pairs = ctx.config.samples.bound_pairs;
        let mut worst = 0.0f64;
        for i in 0..pairs {
            let dim = SuiteContext::dim_for(i);
            let s = ctx.space_for(dim);
            let f0 = ctx
                .profile(&mut rng, dim)
                .scale_real(rng.random_range(0.5..2.0));
            // The last pair probes the edge of the domain, ‖f‖ = 0.49‖f₀‖.
            let frac = if i + 1 == pairs {
                0.49
            } else {
                rng.random_range(0.0..0.49)
            };
            let f = ctx.profile(&mut rng, dim).scale_real(frac * f0.norm());
            let b = s.continuity_bound_check(&f0, &f)?;
            if b.rhs > 0.0 {
                worst = worst.max(b.lhs / b.rhs);
            }
        }
        Ok(spec.at_most(worst, 1.0))
    })
}

fn scale_invariance(ctx: &SuiteContext, spec: &CheckSpec) -> CheckRecord {
    spec.attempt(1e-12, || {
        let mut rng = ctx.rng(spec);
        let mut worst = 0.0f64;
        for i in 0..ctx.config.samples.random {
            let dim = SuiteContext::dim_for(i);
            let s = ctx.space_for(dim);
            let f = ctx.profile(&mut rng, dim);
            let lambda = complex_scalar(&mut rng);
            let a = s.position_expectation(&f)?.into_vec();
            let b = s.position_expectation(&f.scale(lambda))?.into_vec();
            worst = worst.max(inf_dist(&a, &b));
        }
        Ok(spec.at_most(worst, 1e-12))
    })
}

/// Reflexivity, symmetry and transitivity (at twice the tolerance) of
/// indistinguishability on clusters of functions sharing an expectation.
fn indistinguishability(ctx: &SuiteContext, spec: &CheckSpec) -> CheckRecord {
    spec.attempt(0.0, || {
        let mut rng = ctx.rng(spec);
        let s = &ctx.space;
        let tol = ctx.tol().indistinguishable;
        let mut fs = Vec::new();
        for _ in 0..4 {
            let x = [rng.random_range(-1.0..1.0)];
            for _ in 0..3 {
                fs.push(s.translate(&ctx.fiber_sample(&mut rng, 1)?, &x)?);
            }
        }
        let n = fs.len();
        let mut rel = vec![vec![false; n]; n];
        for a in 0..n {
            for b in 0..n {
                rel[a][b] = s.indistinguishable(&fs[a], &fs[b], tol)?;
            }
        }
        let mut violations = 0usize;
        #[allow(clippy::needless_range_loop)]
        for a in 0..n {
            violations += usize::from(!rel[a][a]);
            for b in 0..n {
                violations += usize::from(rel[a][b] != rel[b][a]);
                for c in 0..n {
                    if rel[a][b] && rel[b][c] && !s.indistinguishable(&fs[a], &fs[c], 2.0 * tol)? {
                        violations += 1;
                    }
                }
            }
        }
        let classes = (0..n).filter(|&a| (0..a).all(|b| !rel[a][b])).count();
        let rec = spec
            .at_most(violations as f64, 0.0)
            .with_detail(format!("{classes} classes among {n} functions"));
        Ok(if classes == 4 { rec } else { rec.failed() })
    })
}

// ---------------------------------------------------------------- translation

fn expectation_shift(ctx: &SuiteContext, spec: &CheckSpec) -> CheckRecord {
    let tol = ctx.tol().translation;
    spec.attempt(tol, || {
        let mut rng = ctx.rng(spec);
        let mut worst = 0.0f64;
        for i in 0..ctx.config.samples.random {
            let dim = SuiteContext::dim_for(i);
            let s = ctx.space_for(dim);
            let f = ctx.profile(&mut rng, dim);
            let x = shift_in_ball(&mut rng, dim, 1.0);
            let before = s.position_expectation(&f)?.into_vec();
            let after = s.position_expectation(&s.translate(&f, &x)?)?.into_vec();
            let expected: Vec<f64> = before.iter().zip(&x).map(|(a, b)| a + b).collect();
            worst = worst.max(inf_dist(&after, &expected));
        }
        Ok(spec.at_most(worst, tol))
    })
}

fn group_law(ctx: &SuiteContext, spec: &CheckSpec) -> CheckRecord {
    spec.attempt(1e-8, || {
        let mut rng = ctx.rng(spec);
        let mut worst = 0.0f64;
        for i in 0..(ctx.config.samples.random / 5).max(1) {
            let dim = SuiteContext::dim_for(i);
            let s = ctx.space_for(dim);
            let f = ctx.profile(&mut rng, dim);
            let (x, y) = (
                shift_in_ball(&mut rng, dim, 1.0),
                shift_in_ball(&mut rng, dim, 1.0),
            );
            worst = worst.max(s.verify_translation_group(&f, &x, &y)?);
        }
        Ok(spec.at_most(worst, 1e-8))
    })
}

fn inverse_law(ctx: &SuiteContext, spec: &CheckSpec) -> CheckRecord {
    spec.attempt(1e-8, || {
        let mut rng = ctx.rng(spec);
        let mut worst = 0.0f64;
        for i in 0..(ctx.config.samples.random / 5).max(1) {
            let dim = SuiteContext::dim_for(i);
            let s = ctx.space_for(dim);
            let f = ctx.profile(&mut rng, dim);
            let x = shift_in_ball(&mut rng, dim, 2.0);
            let back: Vec<f64> = x.iter().map(|v| -v).collect();
            worst = worst.max(s.verify_translation_group(&f, &x, &back)?);
        }
        Ok(spec.at_most(worst, 1e-8))
    })
}

fn translation_linearity(ctx: &SuiteContext, spec: &CheckSpec) -> CheckRecord {
    spec.attempt(1e-8, || {
        let mut rng = ctx.rng(spec);
        let mut worst = 0.0f64;
        for i in 0..(ctx.config.samples.random / 5).max(1) {
            let dim = SuiteContext::dim_for(i);
            let s = ctx.space_for(dim);
            let (f, g) = (ctx.profile(&mut rng, dim), ctx.profile(&mut rng, dim));
            let lambda = if i == 0 {
                Complex64::i()
            } else {
                complex_scalar(&mut rng)
            };
            let x = shift_in_ball(&mut rng, dim, 1.0);
            worst = worst.max(s.verify_translation_linearity(&f, &g, lambda, &x)?);
        }
        Ok(spec.at_most(worst, 1e-8))
    })
}

/// Plans for shifts up to `max_shift`, the boundary included. A rejected
/// plan fails the check with the rejection as detail.
fn unitarity(ctx: &SuiteContext, spec: &CheckSpec) -> CheckRecord {
    let tol = ctx.tol().translation;
    spec.attempt(tol, || {
        let mut rng = ctx.rng(spec);
        let mut worst = 0.0f64;
        for i in 0..(ctx.config.samples.random / 5).max(2) {
            let dim = SuiteContext::dim_for(i);
            let s = ctx.space_for(dim);
            let f = ctx.profile(&mut rng, dim);
            let x = match i {
                0 => vec![s.max_shift],
                1 => vec![-s.max_shift],
                _ => shift_in_ball(&mut rng, dim, s.max_shift),
            };
            let plan = s.translation_plan(&x, &f)?;
            let (_, measured) = s.translate_measured(&f, &x)?;
            worst = worst.max(plan.unitarity_defect).max(measured);
        }
        Ok(spec.at_most(worst, tol))
    })
}

fn continuity_modulus(ctx: &SuiteContext, spec: &CheckSpec) -> CheckRecord {
    spec.attempt_at_least(0.95, || {
        let mut rng = ctx.rng(spec);
        let radii = geometric_grid(1e-1, 1e-4, 4);
        let mut worst = f64::INFINITY;
        for i in 0..5 {
            let dim = SuiteContext::dim_for(i + 3);
            let s = ctx.space_for(dim);
            let f = ctx.profile(&mut rng, dim);
            let x0 = shift_in_ball(&mut rng, dim, 1.0);
            let rec = s.translation_continuity_probe(&f, &x0, &radii)?;
            if let Some(slope) = rec.slope {
                worst = worst.min(slope);
            }
        }
        Ok(spec.at_least(worst, 0.95))
    })
}

fn injectivity(ctx: &SuiteContext, spec: &CheckSpec) -> CheckRecord {
    let tol = ctx.tol().nonzero;
    spec.attempt_at_least(tol, || {
        let mut rng = ctx.rng(spec);
        let mut smallest = f64::INFINITY;
        for i in 0..10 {
            let dim = SuiteContext::dim_for(i);
            let s = ctx.space_for(dim);
            let f = ctx.profile(&mut rng, dim);
            let x = shift_in_ball(&mut rng, dim, 1.0);
            let mut y = shift_in_ball(&mut rng, dim, 1.0);
            if inf_dist(&x, &y) < 1e-3 {
                y[0] += 1e-3;
            }
            let apart = s.translate(&f, &x)?.sub(&s.translate(&f, &y)?)?.norm();
            let g = ctx.profile(&mut rng, dim).scale_real(1e-3);
            let image = s.translate(&g, &x)?.norm();
            smallest = smallest.min(apart).min(image);
        }
        Ok(spec.at_least(smallest, tol))
    })
}

fn joint_continuity(ctx: &SuiteContext, spec: &CheckSpec) -> CheckRecord {
    spec.attempt_at_least(0.95, || {
        let mut rng = ctx.rng(spec);
        let scales = geometric_grid(1e-1, 1e-4, 4);
        let mut slope = f64::INFINITY;
        let mut excess = f64::NEG_INFINITY;
        for i in 0..5 {
            let dim = SuiteContext::dim_for(i + 3);
            let s = ctx.space_for(dim);
            let f0 = ctx.profile(&mut rng, dim);
            let df = ctx.profile(&mut rng, dim);
            let x0 = shift_in_ball(&mut rng, dim, 1.0);
            let dx = shift_in_ball(&mut rng, dim, 1.0);
            let rec = s.joint_continuity_probe(&f0, &x0, &df, &dx, &scales)?;
            let total =
                crate::translation::ModulusRecord::new(rec.scales.clone(), rec.total.clone());
            for r in [&total, &rec.function_term, &rec.shift_term] {
                if let Some(v) = r.slope {
                    slope = slope.min(v);
                }
            }
            excess = excess.max(rec.split_excess() / rec.total.iter().copied().fold(1.0, f64::max));
        }
        let rec = spec.at_least(slope, 0.95);
        Ok(if excess > 1e-12 {
            rec.with_detail(format!("split exceeded by {excess:e}"))
                .failed()
        } else {
            rec
        })
    })
}

// ---------------------------------------------------------------- bundle

fn tau_round_trip(ctx: &SuiteContext, spec: &CheckSpec) -> CheckRecord {
    let tol = ctx.tol().chart;
    spec.attempt(tol, || {
        let mut rng = ctx.rng(spec);
        let mut worst = 0.0f64;
        for i in 0..ctx.config.samples.round_trip {
            let dim = SuiteContext::dim_for(i);
            let s = ctx.space_for(dim);
            let p = FiberPoint::new(
                s,
                shift_in_ball(&mut rng, dim, 1.0),
                ctx.fiber_sample(&mut rng, dim)?,
            )?;
            let (forward, back) = s.trivialization_round_trips(&p)?;
            worst = worst.max(forward).max(back);
        }
        Ok(spec.at_most(worst, tol))
    })
}

fn fiber_invariance(ctx: &SuiteContext, spec: &CheckSpec) -> CheckRecord {
    let tol = ctx.tol().fiber;
    spec.attempt(tol, || {
        let mut rng = ctx.rng(spec);
        let mut worst = 0.0f64;
        for i in 0..ctx.config.samples.random {
            let dim = SuiteContext::dim_for(i);
            let s = ctx.space_for(dim);
            let f = s.translate(
                &ctx.profile(&mut rng, dim),
                &shift_in_ball(&mut rng, dim, 1.0),
            )?;
            let g = s.project_to_fiber(&f)?;
            let q = s.position_expectation(&g)?.into_vec();
            worst = worst.max(q.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        }
        Ok(spec.at_most(worst, tol))
    })
}

/// `f₀` with expectation moved into the unit ball.
fn base_function(ctx: &SuiteContext, rng: &mut SampleRng, dim: usize) -> Result<SchwartzFn> {
    let g = ctx.fiber_sample(rng, dim)?;
    ctx.space_for(dim)
        .translate(&g, &shift_in_ball(rng, dim, 1.0))
}

fn product_diff(a: &(Vec<f64>, SchwartzFn), b: &(Vec<f64>, SchwartzFn)) -> Result<f64> {
    let dx: Vec<f64> = a.0.iter().zip(&b.0).map(|(u, v)| u - v).collect();
    Ok(product_norm(&dx, &a.1.sub(&b.1)?))
}

fn dtau_finite_difference(ctx: &SuiteContext, spec: &CheckSpec) -> CheckRecord {
    spec.attempt(1e-5, || {
        let mut rng = ctx.rng(spec);
        let t = 1e-4;
        let mut worst = 0.0f64;
        for i in 0..ctx.config.samples.slope_configs {
            let dim = SuiteContext::dim_for(i);
            let s = ctx.space_for(dim);
            let f0 = base_function(ctx, &mut rng, dim)?;
            let g = ctx.profile(&mut rng, dim).scale_real(0.5);
            let analytic = s.d_trivialize(&f0, &g)?;
            let plus = s.trivialize(&f0.add(&g.scale_real(t))?)?;
            let minus = s.trivialize(&f0.sub(&g.scale_real(t))?)?;
            let fd = (
                plus.base
                    .iter()
                    .zip(&minus.base)
                    .map(|(a, b)| (a - b) / (2.0 * t))
                    .collect(),
                plus.fiber.sub(&minus.fiber)?.scale_real(0.5 / t),
            );
            worst =
                worst.max(product_diff(&fd, &analytic)? / product_norm(&analytic.0, &analytic.1));
        }
        Ok(spec.at_most(worst, 1e-5))
    })
}

/// Admissible direction `(x, g)` at `(x₀, g₀)`.
struct Direction {
    x0: Vec<f64>,
    g0: SchwartzFn,
    x: Vec<f64>,
    g: SchwartzFn,
}

fn admissible(ctx: &SuiteContext, rng: &mut SampleRng, dim: usize) -> Result<Direction> {
    let s = ctx.space_for(dim);
    let g0 = ctx.fiber_sample(rng, dim)?;
    let g = s.admissible_direction(&g0, &ctx.profile(rng, dim).scale_real(0.5))?;
    Ok(Direction {
        x0: shift_in_ball(rng, dim, 1.0),
        g0,
        x: shift_in_ball(rng, dim, 1.0),
        g,
    })
}

fn dtau_inv_finite_difference(ctx: &SuiteContext, spec: &CheckSpec) -> CheckRecord {
    spec.attempt(1e-5, || {
        let mut rng = ctx.rng(spec);
        let t = 1e-4;
        let mut worst = 0.0f64;
        for i in 0..ctx.config.samples.slope_configs {
            let dim = SuiteContext::dim_for(i);
            let s = ctx.space_for(dim);
            let d = admissible(ctx, &mut rng, dim)?;
            let analytic = s.d_untrivialize(&d.x0, &d.g0, &d.x, &d.g)?;
            let at = |t: f64| -> Result<SchwartzFn> {
                let x: Vec<f64> = d.x0.iter().zip(&d.x).map(|(a, b)| a + t * b).collect();
                s.translate(&d.g0.add(&d.g.scale_real(t))?, &x)
            };
            let fd = at(t)?.sub(&at(-t)?)?.scale_real(0.5 / t);
            worst = worst
                .max(nuclear_seminorm(&fd.sub(&analytic)?, 1) / nuclear_seminorm(&analytic, 1));
        }
        Ok(spec.at_most(worst, 1e-5))
    })
}

fn dtau_remainder(ctx: &SuiteContext, spec: &CheckSpec) -> CheckRecord {
    spec.attempt_at_least(TANGENT_SLOPE, || {
        let mut rng = ctx.rng(spec);
        let grid = geometric_grid(1e-1, 1e-3, 5);
        let mut slopes = Vec::new();
        for i in 0..ctx.config.samples.slope_configs {
            let dim = SuiteContext::dim_for(i);
            let s = ctx.space_for(dim);
            let f0 = base_function(ctx, &mut rng, dim)?;
            let g = ctx.profile(&mut rng, dim).scale_real(0.5);
            let rep = s.trivialize_remainder(&f0, &g, &grid)?;
            slopes.push(rep);
        }
        Ok(min_slope_record(spec, &slopes))
    })
}

fn dtau_inv_remainder(ctx: &SuiteContext, spec: &CheckSpec) -> CheckRecord {
    spec.attempt_at_least(TANGENT_SLOPE, || {
        let mut rng = ctx.rng(spec);
        let grid = geometric_grid(1e-1, 1e-3, 5);
        let mut slopes = Vec::new();
        for i in 0..ctx.config.samples.slope_configs {
            let dim = SuiteContext::dim_for(i);
            let d = admissible(ctx, &mut rng, dim)?;
            let rep = ctx
                .space_for(dim)
                .untrivialize_remainder(&d.x0, &d.g0, &d.x, &d.g, &grid)?;
            slopes.push(rep);
        }
        Ok(min_slope_record(spec, &slopes))
    })
}

/// Both compositions of `Dτ` and `Dτ⁻¹`, relative in the product norm.
fn mutual_inverse(ctx: &SuiteContext, spec: &CheckSpec) -> CheckRecord {
    spec.attempt(1e-7, || {
        let mut rng = ctx.rng(spec);
        let mut worst = 0.0f64;
        for i in 0..ctx.config.samples.slope_configs {
            let dim = SuiteContext::dim_for(i);
            let s = ctx.space_for(dim);
            let d = admissible(ctx, &mut rng, dim)?;
            let f0 = s.translate(&d.g0, &d.x0)?;
            let h = s.d_untrivialize(&d.x0, &d.g0, &d.x, &d.g)?;
            let there = s.d_trivialize(&f0, &h)?;
            worst = worst
                .max(product_diff(&there, &(d.x.clone(), d.g.clone()))? / product_norm(&d.x, &d.g));

            let k = ctx.profile(&mut rng, dim).scale_real(0.5);
            let (v, w) = s.d_trivialize(&f0, &k)?;
            let p = s.trivialize(&f0)?;
            let back = s.d_untrivialize(&p.base, &p.fiber, &v, &w)?;
            worst = worst.max(nuclear_seminorm(&back.sub(&k)?, 1) / nuclear_seminorm(&k, 1));
        }
        Ok(spec.at_most(worst, 1e-7))
    })
}

fn differential_linearity(ctx: &SuiteContext, spec: &CheckSpec) -> CheckRecord {
    spec.attempt(1e-12, || {
        let mut rng = ctx.rng(spec);
        let mut worst = 0.0f64;
        for i in 0..ctx.config.samples.slope_configs {
            let dim = SuiteContext::dim_for(i);
            let s = ctx.space_for(dim);
            let (a, b): (f64, f64) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let scale = a.abs().max(b.abs()).max(1.0);

            let f0 = base_function(ctx, &mut rng, dim)?;
            let (g1, g2) = (ctx.profile(&mut rng, dim), ctx.profile(&mut rng, dim));
            let lhs = s.d_trivialize(&f0, &g1.scale_real(a).add(&g2.scale_real(b))?)?;
            let (u, v) = (s.d_trivialize(&f0, &g1)?, s.d_trivialize(&f0, &g2)?);
            let rhs = (
                u.0.iter().zip(&v.0).map(|(p, q)| a * p + b * q).collect(),
                u.1.scale_real(a).add(&v.1.scale_real(b))?,
            );
            worst = worst.max(product_diff(&lhs, &rhs)? / scale);

            let d1 = admissible(ctx, &mut rng, dim)?;
            let h2 = s.admissible_direction(&d1.g0, &ctx.profile(&mut rng, dim))?;
            let x2 = shift_in_ball(&mut rng, dim, 1.0);
            let x: Vec<f64> = d1.x.iter().zip(&x2).map(|(p, q)| a * p + b * q).collect();
            let lhs = s.d_untrivialize(
                &d1.x0,
                &d1.g0,
                &x,
                &d1.g.scale_real(a).add(&h2.scale_real(b))?,
            )?;
            let rhs = s
                .d_untrivialize(&d1.x0, &d1.g0, &d1.x, &d1.g)?
                .scale_real(a)
                .add(&s.d_untrivialize(&d1.x0, &d1.g0, &x2, &h2)?.scale_real(b))?;
            worst = worst.max(nuclear_seminorm(&lhs.sub(&rhs)?, 1) / scale);
        }
        Ok(spec.at_most(worst, 1e-12))
    })
}

fn tangent_negative_control(_: &SuiteContext, spec: &CheckSpec) -> CheckRecord {
    spec.attempt(TANGENT_SLOPE, || {
        let f = SchwartzFn::basis(&[1], 2);
        let grid = geometric_grid(1e-1, 1e-3, 5);
        let rep = tangent_slope(
            |t, f| Ok(Residual::Function(f.scale_real(t))),
            &f,
            NormSelector::L2,
            &grid,
        )?;
        // Passes when the tangent test rejects the map.
        let rec = CheckRecord::at_most(&spec.id, &spec.anchor, rep.fitted_slope, TANGENT_SLOPE)
            .with_detail(format!(
                "slope {:.4} fitted to δ(t) = t·f",
                rep.fitted_slope
            ));
        Ok(if rep.verdict == TangentVerdict::NotTangent {
            rec
        } else {
            rec.failed()
        })
    })
}

// ---------------------------------------------------------------- atlases

/// Independent closed form of `χ_ji` for the unrotated circle atlas.
fn circle_transition(scale: f64, i: usize, j: usize, x: f64) -> f64 {
    let full = 2.0 * PI * scale;
    match (i, j) {
        (0, 1) if x < 0.0 => x + full,
        (1, 0) if x > PI * scale => x - full,
        _ => x,
    }
}

/// Worst `|Q̄(φ_ji(Ψ(x))) − expected(i, j, x)|_∞` over sampled overlap
/// coordinates, with the number of samples used.
///
/// The section's truncation loss is not treated as a precondition here:
/// whatever it does to `Q̄` is part of the measured residual.
fn recovered_transitions(
    ctx: &SuiteContext,
    qa: &QuantumAtlas,
    rng: &mut SampleRng,
    expected: impl Fn(usize, usize, &[f64]) -> Result<Vec<f64>>,
) -> Result<(f64, usize)> {
    let n = ctx.config.samples.atlas;
    let mut lifted = qa.clone();
    lifted.space.tol.section = 1.0;
    let (mut worst, mut used) = (0.0f64, 0usize);
    for (i, j) in qa.classical.overlapping_pairs() {
        let mut tries = 0;
        let mut taken = 0;
        while taken < n && tries < 100 * n {
            tries += 1;
            let p = qa.classical.sample_in_overlap(rng, i, j, 0.0)?;
            let x = qa.classical.charts[i].map(&p);
            let y = expected(i, j, &x)?;
            if euclid(&y) > qa.space.max_shift {
                continue;
            }
            taken += 1;
            worst = worst.max(inf_dist(
                &lifted.recover_classical_transition(i, j, &x)?,
                &y,
            ));
        }
        used += taken;
    }
    Ok((worst, used))
}

fn transition_recovery(ctx: &SuiteContext, qa: &QuantumAtlas, spec: &CheckSpec) -> CheckRecord {
    spec.attempt(1e-7, || {
        let mut rng = ctx.rng(spec);
        let scale = ctx.config.circle_scale();
        let circle = matches!(qa.classical.geometry, crate::atlas::Geometry::Circle);
        let (worst, used) = recovered_transitions(ctx, qa, &mut rng, |i, j, x| {
            Ok(if circle {
                vec![circle_transition(scale, i, j, x[0])]
            } else {
                x.to_vec()
            })
        })?;
        Ok(section_record(spec, worst, 1e-7, used))
    })
}

fn section_record(spec: &CheckSpec, worst: f64, tol: f64, used: usize) -> CheckRecord {
    let detail = format!("{used} section samples");
    if used == 0 {
        CheckRecord::vacuous(&spec.id, &spec.anchor, tol, Criterion::AtMost).with_detail(detail)
    } else {
        spec.at_most(worst, tol).with_detail(detail)
    }
}

/// Quantum points of chart `i` whose chart coordinate stays within the
/// shift range.
fn chart_samples(
    qa: &QuantumAtlas,
    rng: &mut SampleRng,
    i: usize,
    n: usize,
) -> Result<Vec<QuantumPoint>> {
    let chart = qa.classical.chart(i)?;
    let mut out = Vec::with_capacity(n);
    let mut tries = 0;
    while out.len() < n {
        tries += 1;
        if tries > 100 * n {
            return Err(Error::InvalidAtlas(format!(
                "chart {i}: too few samples within the shift range"
            )));
        }
        let base = match qa.classical.geometry {
            crate::atlas::Geometry::Euclidean(dim) => {
                crate::atlas::ManifoldPoint(shift_in_ball(rng, dim, qa.space.max_shift.min(1.0)))
            }
            _ => qa.classical.sample_point(rng),
        };
        if !chart.contains(&base) || euclid(&chart.map(&base)) > qa.space.max_shift {
            continue;
        }
        out.push(QuantumPoint {
            base,
            fiber: qa.sample_fiber(rng)?,
        });
    }
    Ok(out)
}

fn local_triviality(ctx: &SuiteContext, qa: &QuantumAtlas, spec: &CheckSpec) -> CheckRecord {
    let tol = ctx.tol().chart;
    spec.attempt(tol, || {
        let mut rng = ctx.rng(spec);
        let mut worst = 0.0f64;
        for i in 0..qa.classical.charts.len() {
            let samples = chart_samples(qa, &mut rng, i, ctx.config.samples.atlas)?;
            let r = qa.verify_local_triviality(i, &samples)?;
            worst = worst
                .max(r.omega1_vs_projection)
                .max(r.omega1_vs_base)
                .max(r.round_trip);
        }
        Ok(spec.at_most(worst, tol))
    })
}

/// Recovers every chart as `χᵢ(ξ) = Q̄(φᵢ(ξ, g))` and every transition as
/// `Q̄ ∘ φ_ji ∘ Ψ` on samples, comparing with the classical atlas.
fn classical_limit(ctx: &SuiteContext, qa: &QuantumAtlas, spec: &CheckSpec) -> CheckRecord {
    spec.attempt(1e-7, || {
        let mut rng = ctx.rng(spec);
        let mut worst = 0.0f64;
        for i in 0..qa.classical.charts.len() {
            let chart = &qa.classical.charts[i];
            for q in chart_samples(qa, &mut rng, i, ctx.config.samples.atlas)? {
                let recovered = qa.space.position_expectation(&qa.phi(i, &q)?)?.into_vec();
                worst = worst.max(inf_dist(&recovered, &chart.map(&q.base)));
            }
        }
        let (recovered, used) = recovered_transitions(ctx, qa, &mut rng, |i, j, x| {
            qa.classical.transition(i, j, x)
        })?;
        Ok(section_record(spec, worst.max(recovered), 1e-7, used))
    })
}

/// On pairs in one chart, half sharing a base point: indistinguishable
/// exactly when the Kolmogorov projections agree.
fn kolmogorov_fibers(ctx: &SuiteContext, qa: &QuantumAtlas, spec: &CheckSpec) -> CheckRecord {
    spec.attempt(0.0, || {
        let mut rng = ctx.rng(spec);
        let tol = ctx.tol();
        let geo = qa.classical.geometry;
        let mut mismatches = 0usize;
        for i in 0..qa.classical.charts.len() {
            let samples = chart_samples(qa, &mut rng, i, ctx.config.samples.atlas)?;
            for (k, pair) in samples.chunks_exact(2).enumerate() {
                let a = pair[0].clone();
                let b = if k % 2 == 0 {
                    QuantumPoint {
                        base: a.base.clone(),
                        fiber: pair[1].fiber.clone(),
                    }
                } else {
                    pair[1].clone()
                };
                let (fa, fb) = (qa.phi(i, &a)?, qa.phi(i, &b)?);
                let same_class = qa
                    .space
                    .indistinguishable(&fa, &fb, tol.indistinguishable)?;
                let (pa, pb) = (
                    qa.kolmogorov_project_fn(i, &fa)?,
                    qa.kolmogorov_project_fn(i, &fb)?,
                );
                let same_fiber = geo.distance(&pa, &pb) <= tol.point;
                mismatches += usize::from(same_class != same_fiber);
            }
        }
        Ok(spec.at_most(mismatches as f64, 0.0))
    })
}

/// `𝒬(ξ, g) = ξ`, and on overlaps `𝒬` through chart `j` of `φ_ji(f)`
/// agrees with `𝒬` through chart `i` of `f`.
fn kolmogorov_charts(ctx: &SuiteContext, qa: &QuantumAtlas, spec: &CheckSpec) -> CheckRecord {
    let tol = ctx.tol().point;
    spec.attempt(2.0 * tol, || {
        let mut rng = ctx.rng(spec);
        let geo = qa.classical.geometry;
        let mut worst = 0.0f64;
        for (i, j) in qa.classical.overlapping_pairs() {
            for _ in 0..ctx.config.samples.atlas {
                let base = qa.classical.sample_in_overlap(&mut rng, i, j, 0.0)?;
                let x = qa.classical.charts[i].map(&base);
                if euclid(&x) > qa.space.max_shift {
                    continue;
                }
                let q = QuantumPoint {
                    base,
                    fiber: qa.sample_fiber(&mut rng)?,
                };
                let pi = qa.kolmogorov_project(i, &q)?;
                let f = qa.phi(i, &q)?;
                let pj = qa.kolmogorov_project_fn(j, &qa.quantum_transition(i, j, &f)?)?;
                worst = worst
                    .max(geo.distance(&pi, &q.base))
                    .max(geo.distance(&pi, &pj));
            }
        }
        Ok(spec.at_most(worst, 2.0 * tol))
    })
}

fn cocycle(ctx: &SuiteContext, qa: &QuantumAtlas, spec: &CheckSpec) -> CheckRecord {
    let tol = 2.0 * ctx.tol().chart;
    spec.attempt(tol, || {
        let mut rng = ctx.rng(spec);
        let mut worst = 0.0f64;
        for (i, j) in qa.classical.overlapping_pairs() {
            for _ in 0..ctx.config.samples.atlas {
                let base = qa.classical.sample_in_overlap(&mut rng, i, j, 0.0)?;
                if euclid(&qa.classical.charts[i].map(&base)) > qa.space.max_shift {
                    continue;
                }
                let f = qa.phi(
                    i,
                    &QuantumPoint {
                        base,
                        fiber: qa.sample_fiber(&mut rng)?,
                    },
                )?;
                let there = qa.quantum_transition(i, j, &f)?;
                let back = qa.quantum_transition(j, i, &there)?;
                worst = worst.max(back.sub(&f)?.norm() / f.norm());
            }
        }
        Ok(spec.at_most(worst, tol))
    })
}

/// The circle atlas joined with a copy rotated by π/3 must again satisfy
/// conditions (i)–(iv).
fn compatibility(ctx: &SuiteContext, spec: &CheckSpec) -> CheckRecord {
    spec.attempt(0.0, || {
        let scale = ctx.config.circle_scale();
        let joined = circle_atlas(scale, 0.0).union(&circle_atlas(scale, PI / 3.0))?;
        let qa = ctx.circle_quantum(joined)?;
        let records =
            qa.verify_quantum_atlas(&spec.id, ctx.config.seed, ctx.config.samples.atlas / 2);
        let failed: Vec<String> = records
            .iter()
            .filter(|r| !r.passed())
            .map(|r| r.id.clone())
            .collect();
        let rec = spec.at_most(failed.len() as f64, 0.0);
        Ok(if failed.is_empty() {
            rec
        } else {
            rec.with_detail(format!("failed: {}", failed.join(", ")))
        })
    })
}

/// Passes when the jump detector flags the corrupted transition.
fn corrupted_transition(ctx: &SuiteContext, spec: &CheckSpec) -> CheckRecord {
    spec.attempt_at_least(CONTINUITY_JUMP_TOL, || {
        let qa = ctx.circle_quantum(corrupted_circle_atlas(ctx.config.circle_scale(), 0.3))?;
        let jump = qa.transition_jump(&mut ctx.rng(spec), 16, 30)?;
        Ok(spec.at_least(jump, CONTINUITY_JUMP_TOL))
    })
}
