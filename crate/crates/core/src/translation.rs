//! Translations `T_x f = f(· − x)` as truncated displacement operators.
//!
//! Per axis the generator `x(a† − a)/√2` is a real antisymmetric tridiagonal
//! matrix on a padded index range. Its exponential is orthogonal, so the
//! norm of `T_x f` cannot by itself reveal truncation error. Instead the top
//! [`GUARD`] rows of the padded range act as a leakage detector: the mass
//! that reaches them bounds what the finite matrix got wrong, and those rows
//! are dropped from the output.

use nalgebra::DMatrix;

use crate::config::ModelSpace;
use crate::error::{Error, Result};
use crate::expectation::euclid;
use crate::hermite::{nuclear_seminorm, SchwartzFn};
use crate::tangent::loglog_slope;
use crate::tensor;
use crate::Complex64;

/// Width of the leakage band at the top of the padded range.
pub const GUARD: usize = 8;

/// Relative tail mass trimmed from translated coefficients.
pub const TRIM_TOL: f64 = 1e-15;

/// Matrix exponential by scaling and squaring of a Taylor polynomial.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    const TERMS: usize = 18;
    let n = a.nrows();
    let norm1 = (0..a.ncols())
        .map(|j| a.column(j).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if norm1 > 0.5 {
        (norm1 / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a * 2f64.powi(-squarings);
    let id = DMatrix::<f64>::identity(n, n);
    // Horner: I + A(I + A/2(I + A/3(...)))
    let mut e = id.clone();
    for k in (1..=TERMS).rev() {
        e = &id + (&scaled * e) / k as f64;
    }
    for _ in 0..squarings {
        e = &e * &e;
    }
    e
}

/// Full `(P+1) x (P+1)` exponential of `s(a† − a)/√2`.
pub fn displacement_matrix(shift: f64, padded_degree: usize) -> DMatrix<f64> {
    let n = padded_degree + 1;
    let gen = DMatrix::from_fn(n, n, |i, j| {
        if i == j + 1 {
            shift * (i as f64 / 2.0).sqrt()
        } else if j == i + 1 {
            -shift * (j as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    });
    expm(&gen)
}

/// Per-axis factors for one shift, certified on one input.
#[derive(Debug, Clone)]
pub struct TranslationPlan {
    pub shift: Vec<f64>,
    pub source_degree: usize,
    pub padded_degree: usize,
    /// Relative L2 mass the certifying input leaks into the guard band.
    /// Bounds `|‖T_x f‖ − ‖f‖| / ‖f‖` for that input.
    pub unitarity_defect: f64,
    /// Same quantity maximized over all unit inputs of `source_degree`
    /// (Frobenius norm of the guard block).
    pub worst_case_defect: f64,
    factors: Vec<DMatrix<f64>>,
}

impl TranslationPlan {
    /// Degree of the output, the padded range minus the guard band.
    pub fn output_degree(&self) -> usize {
        self.padded_degree - GUARD
    }

    /// Applies the plan without trimming and returns the output with the
    /// mass that reached the guard band. `f` is zero-padded to the source
    /// degree; a higher degree is an error.
    pub fn apply_with_leakage(&self, f: &SchwartzFn) -> Result<(SchwartzFn, f64)> {
        if f.dim() != self.shift.len() {
            return Err(Error::DimensionMismatch {
                expected: self.shift.len(),
                found: f.dim(),
            });
        }
        if f.degree() > self.source_degree {
            return Err(Error::Precondition(format!(
                "plan built for degree {} applied to degree {}",
                self.source_degree,
                f.degree()
            )));
        }
        let f = f.pad_to(self.source_degree);
        let mut data = f.coeffs().to_vec();
        let mut shape = f.shape();
        for (axis, m) in self.factors.iter().enumerate() {
            (data, shape) = tensor::apply_along_axis(&data, &shape, axis, m);
        }
        let full = SchwartzFn::from_tensor(f.dim(), self.padded_degree, data);
        Ok(full.truncate(self.output_degree()))
    }

    pub fn apply(&self, f: &SchwartzFn) -> Result<SchwartzFn> {
        Ok(self.apply_with_leakage(f)?.0)
    }
}

/// Padded degree before capping.
pub fn heuristic_padding(source_degree: usize, shift_norm: f64) -> usize {
    source_degree + (6.0 * shift_norm * ((source_degree + 1) as f64).sqrt()).ceil() as usize + GUARD
}

fn build_plan(shift: &[f64], f: &SchwartzFn, padded: usize) -> Result<TranslationPlan> {
    let source_degree = f.degree();
    let keep = padded - GUARD;
    let mut worst_sq = 0.0;
    let factors: Vec<DMatrix<f64>> = shift
        .iter()
        .map(|&s| {
            if s == 0.0 {
                return DMatrix::from_fn(padded + 1, source_degree + 1, |i, j| {
                    (i == j) as u8 as f64
                });
            }
            let full = displacement_matrix(s, padded);
            worst_sq += full
                .view((keep + 1, 0), (GUARD, source_degree + 1))
                .norm_squared();
            full.columns(0, source_degree + 1).into_owned()
        })
        .collect();
    let mut plan = TranslationPlan {
        shift: shift.to_vec(),
        source_degree,
        padded_degree: padded,
        unitarity_defect: 0.0,
        worst_case_defect: worst_sq.sqrt(),
        factors,
    };
    let n = f.norm();
    if n > 0.0 {
        let (_, leaked) = plan.apply_with_leakage(f)?;
        plan.unitarity_defect = leaked.sqrt() / n;
    }
    Ok(plan)
}

impl ModelSpace {
    /// Builds the factors for shifting `f` by `shift` and certifies them on
    /// `f`. Padding starts at [`heuristic_padding`] and widens up to
    /// `max_degree` while the relative guard-band leakage exceeds the
    /// translation tolerance; past the cap the plan is rejected.
    pub fn translation_plan(&self, shift: &[f64], f: &SchwartzFn) -> Result<TranslationPlan> {
        if shift.len() != f.dim() {
            return Err(Error::DimensionMismatch {
                expected: f.dim(),
                found: shift.len(),
            });
        }
        if let Some(i) = shift.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index: i });
        }
        let cap = self.max_degree.max(f.degree() + GUARD);
        let mut padded = heuristic_padding(f.degree(), euclid(shift)).min(cap);
        loop {
            let plan = build_plan(shift, f, padded)?;
            if plan.unitarity_defect <= self.tol.translation {
                return Ok(plan);
            }
            if padded == cap {
                return Err(Error::PlanRejected {
                    shift: shift.to_vec(),
                    source_degree: plan.source_degree,
                    padded_degree: padded,
                    defect: plan.unitarity_defect,
                    tol: self.tol.translation,
                });
            }
            padded = (padded + (padded - f.degree()).max(GUARD)).min(cap);
        }
    }

    /// `T_x f`. A zero shift returns `f` unchanged; otherwise the result is
    /// trimmed of trailing coefficients below [`TRIM_TOL`] relative mass.
    pub fn translate(&self, f: &SchwartzFn, x: &[f64]) -> Result<SchwartzFn> {
        Ok(self.translate_measured(f, x)?.0)
    }

    /// [`translate`](Self::translate) together with the measured relative
    /// norm defect `|‖T_x f‖ − ‖f‖| / ‖f‖` (zero for `f = 0`).
    pub fn translate_measured(&self, f: &SchwartzFn, x: &[f64]) -> Result<(SchwartzFn, f64)> {
        if x.len() != f.dim() {
            return Err(Error::DimensionMismatch {
                expected: f.dim(),
                found: x.len(),
            });
        }
        if x.iter().all(|&v| v == 0.0) {
            return Ok((f.clone(), 0.0));
        }
        let plan = self.translation_plan(x, f)?;
        let (out, _) = plan.apply(f)?.trim(TRIM_TOL);
        let n = f.norm();
        let defect = if n > 0.0 {
            (out.norm() - n).abs() / n
        } else {
            0.0
        };
        Ok((out, defect))
    }

    /// `‖T_y(T_x f) − T_{x+y} f‖ / ‖f‖`.
    pub fn verify_translation_group(&self, f: &SchwartzFn, x: &[f64], y: &[f64]) -> Result<f64> {
        self.require_nonzero(f)?;
        let xy: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
        let lhs = self.translate(&self.translate(f, x)?, y)?;
        let rhs = self.translate(f, &xy)?;
        Ok(lhs.sub(&rhs)?.norm() / f.norm())
    }

    /// `max(‖T_x(λf) − λT_x f‖, ‖T_x(f+g) − T_x f − T_x g‖)` under a single
    /// plan, so the result measures roundoff only.
    pub fn verify_translation_linearity(
        &self,
        f: &SchwartzFn,
        g: &SchwartzFn,
        lambda: Complex64,
        x: &[f64],
    ) -> Result<f64> {
        if f.dim() != g.dim() {
            return Err(Error::DimensionMismatch {
                expected: f.dim(),
                found: g.dim(),
            });
        }
        let degree = f.degree().max(g.degree());
        let probe = f.pad_to(degree).add(&g.pad_to(degree))?;
        let plan = self.translation_plan(x, &probe)?;
        let tf = plan.apply(f)?;
        let tg = plan.apply(g)?;
        let scaled = plan.apply(&f.scale(lambda))?.sub(&tf.scale(lambda))?.norm();
        let sum = plan.apply(&f.add(g)?)?.sub(&tf.add(&tg)?)?.norm();
        Ok(scaled.max(sum))
    }

    /// For each radius `r`, the largest `‖T_{x₀+x} f − T_{x₀} f‖₁` over
    /// probe directions `x` with `|x| = r`.
    pub fn translation_continuity_probe(
        &self,
        f: &SchwartzFn,
        x0: &[f64],
        radii: &[f64],
    ) -> Result<ModulusRecord> {
        let base = self.translate(f, x0)?;
        let dirs = probe_directions(f.dim());
        let moduli = radii
            .iter()
            .map(|&r| {
                dirs.iter().try_fold(0.0f64, |acc, d| {
                    let x: Vec<f64> = x0.iter().zip(d).map(|(a, b)| a + r * b).collect();
                    let diff = self.translate(f, &x)?.sub(&base)?;
                    Ok(acc.max(nuclear_seminorm(&diff, 1)))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(ModulusRecord::new(radii.to_vec(), moduli))
    }

    /// Two-term split of `T(x₀+x, f₀+f) − T(x₀, f₀)` along the ray
    /// `(s·dx, s·df)` for each scale `s`.
    pub fn joint_continuity_probe(
        &self,
        f0: &SchwartzFn,
        x0: &[f64],
        df: &SchwartzFn,
        dx: &[f64],
        scales: &[f64],
    ) -> Result<JointModulusRecord> {
        let base = self.translate(f0, x0)?;
        let mut total = Vec::with_capacity(scales.len());
        let mut in_function = Vec::with_capacity(scales.len());
        let mut in_shift = Vec::with_capacity(scales.len());
        for &s in scales {
            let x: Vec<f64> = x0.iter().zip(dx).map(|(a, b)| a + s * b).collect();
            let f = f0.add(&df.scale_real(s))?;
            let moved = self.translate(f0, &x)?;
            let both = self.translate(&f, &x)?;
            total.push(nuclear_seminorm(&both.sub(&base)?, 1));
            in_function.push(nuclear_seminorm(&both.sub(&moved)?, 1));
            in_shift.push(nuclear_seminorm(&moved.sub(&base)?, 1));
        }
        Ok(JointModulusRecord {
            scales: scales.to_vec(),
            total,
            function_term: ModulusRecord::new(scales.to_vec(), in_function),
            shift_term: ModulusRecord::new(scales.to_vec(), in_shift),
        })
    }
}

/// Unit directions: ± each axis, plus the normalized diagonal in 2D and up.
fn probe_directions(dim: usize) -> Vec<Vec<f64>> {
    let mut dirs = Vec::new();
    for axis in 0..dim {
        for sign in [1.0, -1.0] {
            let mut d = vec![0.0; dim];
            d[axis] = sign;
            dirs.push(d);
        }
    }
    if dim > 1 {
        dirs.push(vec![1.0 / (dim as f64).sqrt(); dim]);
    }
    dirs
}

/// Moduli sampled at decreasing radii with their log-log slope.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulusRecord {
    pub radii: Vec<f64>,
    pub moduli: Vec<f64>,
    /// `None` when every modulus is zero.
    pub slope: Option<f64>,
}

impl ModulusRecord {
    pub fn new(radii: Vec<f64>, moduli: Vec<f64>) -> Self {
        let (xs, ys): (Vec<f64>, Vec<f64>) = radii
            .iter()
            .zip(&moduli)
            .filter(|(_, &m)| m > 0.0)
            .map(|(&r, &m)| (r, m))
            .unzip();
        let slope = (xs.len() >= 2).then(|| loglog_slope(&xs, &ys));
        ModulusRecord {
            radii,
            moduli,
            slope,
        }
    }

    /// Slope at least `min_slope`, or identically zero.
    pub fn shrinks(&self, min_slope: f64) -> bool {
        match self.slope {
            Some(s) => s >= min_slope,
            None => self.moduli.iter().all(|&m| m == 0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointModulusRecord {
    pub scales: Vec<f64>,
    pub total: Vec<f64>,
    pub function_term: ModulusRecord,
    pub shift_term: ModulusRecord,
}

impl JointModulusRecord {
    /// Largest violation of `total ≤ function_term + shift_term`.
    pub fn split_excess(&self) -> f64 {
        self.total
            .iter()
            .zip(&self.function_term.moduli)
            .zip(&self.shift_term.moduli)
            .map(|((t, a), b)| t - a - b)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}
