//! Schwartz functions as truncated expansions in the orthonormal tensor
//! Hermite basis `h_k = h_{k1} ⊗ … ⊗ h_{kn}`.
//!
//! In this basis the ladder operators act by the sparse rules
//! `a h_k = √k h_{k-1}` and `a† h_k = √(k+1) h_{k+1}` on each axis, so
//! position `Q = (a + a†)/√2`, momentum `P = i(a† − a)/√2` and the partial
//! derivative `∂ = (a − a†)/√2` are tridiagonal. Every operator that raises
//! degree grows the coefficient array instead of truncating it, which makes
//! inner products against the result exact.
//!
//! `Q² + P² + 𝟙` is diagonal with eigenvalue `2|k| + n + 1`, which is what
//! makes the nuclear seminorms exact here.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Multi-index `α = (α₁, …, αₙ)` of non-negative integers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiIndex(pub Vec<usize>);

impl MultiIndex {
    pub fn new(entries: impl Into<Vec<usize>>) -> Self {
        MultiIndex(entries.into())
    }

    pub fn zeros(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    /// Unit index along `axis` scaled by `order`.
    pub fn along(dim: usize, axis: usize, order: usize) -> Self {
        let mut e = vec![0; dim];
        e[axis] = order;
        MultiIndex(e)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `|α| = Σ αᵢ`.
    pub fn order(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }
}

/// Truncated Hermite expansion of a function on ℝⁿ.
///
/// `coeffs` holds `(degree+1)^dim` complex coefficients in row-major
/// multi-index order. Values are immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct SchwartzFn {
    dim: usize,
    degree: usize,
    coeffs: Vec<Complex64>,
    norm_sq: f64,
}

impl SchwartzFn {
    pub fn new(dim: usize, degree: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Precondition("dimension must be positive".into()));
        }
        let expected = (degree + 1).pow(dim as u32);
        if coeffs.len() != expected {
            return Err(Error::CoefficientLength {
                expected,
                found: coeffs.len(),
            });
        }
        if let Some(index) = coeffs
            .iter()
            .position(|c| !(c.re.is_finite() && c.im.is_finite()))
        {
            return Err(Error::NonFinite { index });
        }
        Ok(Self::from_parts(dim, degree, coeffs))
    }

    fn from_parts(dim: usize, degree: usize, coeffs: Vec<Complex64>) -> Self {
        let norm_sq = coeffs.iter().map(|c| c.norm_sqr()).sum();
        SchwartzFn {
            dim,
            degree,
            coeffs,
            norm_sq,
        }
    }

    pub fn zero(dim: usize, degree: usize) -> Self {
        Self::from_parts(dim, degree, vec![ZERO; (degree + 1).pow(dim as u32)])
    }

    /// The basis function `h_k`, stored at the smallest degree holding it
    /// unless `degree` is larger.
    pub fn basis(k: &[usize], degree: usize) -> Self {
        let dim = k.len();
        let degree = degree.max(k.iter().copied().max().unwrap_or(0));
        let mut f = Self::zero(dim, degree);
        let idx = tensor::flat_index(k, &f.shape());
        f.coeffs[idx] = Complex64::new(1.0, 0.0);
        f.norm_sq = 1.0;
        f
    }

    pub fn from_real(dim: usize, degree: usize, coeffs: &[f64]) -> Result<Self> {
        Self::new(
            dim,
            degree,
            coeffs.iter().map(|&r| Complex64::new(r, 0.0)).collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn shape(&self) -> Vec<usize> {
        vec![self.degree + 1; self.dim]
    }

    /// Coefficient of `h_k`; zero beyond the stored degree.
    pub fn coeff(&self, k: &[usize]) -> Complex64 {
        if k.len() != self.dim || k.iter().any(|&ki| ki > self.degree) {
            return ZERO;
        }
        self.coeffs[tensor::flat_index(k, &self.shape())]
    }

    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    /// L2 norm.
    pub fn norm(&self) -> f64 {
        self.norm_sq.sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    fn check_dim(&self, other: &SchwartzFn) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }

    /// Zero-pads to `degree` (no-op if already at least that large).
    pub fn pad_to(&self, degree: usize) -> SchwartzFn {
        if degree <= self.degree {
            return self.clone();
        }
        let new_shape = vec![degree + 1; self.dim];
        let coeffs = tensor::pad(&self.coeffs, &self.shape(), &new_shape);
        SchwartzFn {
            dim: self.dim,
            degree,
            coeffs,
            norm_sq: self.norm_sq,
        }
    }

    /// Drops every coefficient with some index above `degree`; returns the
    /// truncated function and the discarded L2 mass `Σ|c_k|²`.
    pub fn truncate(&self, degree: usize) -> (SchwartzFn, f64) {
        if degree >= self.degree {
            return (self.clone(), 0.0);
        }
        let new_shape = vec![degree + 1; self.dim];
        let mut coeffs = vec![ZERO; tensor::volume(&new_shape)];
        let mut discarded = 0.0;
        tensor::for_each_index(&self.shape(), |flat, idx| {
            if idx.iter().all(|&k| k <= degree) {
                coeffs[tensor::flat_index(idx, &new_shape)] = self.coeffs[flat];
            } else {
                discarded += self.coeffs[flat].norm_sqr();
            }
        });
        (Self::from_parts(self.dim, degree, coeffs), discarded)
    }

    /// Truncates to the smallest degree whose discarded mass stays below
    /// `(rel_tol·‖f‖)²`. Returns the function and the discarded mass.
    pub fn trim(&self, rel_tol: f64) -> (SchwartzFn, f64) {
        let mut shell = vec![0.0; self.degree + 1];
        tensor::for_each_index(&self.shape(), |flat, idx| {
            let top = idx.iter().copied().max().unwrap_or(0);
            shell[top] += self.coeffs[flat].norm_sqr();
        });
        let budget = (rel_tol * self.norm()).powi(2);
        let mut tail = 0.0;
        let mut keep = self.degree;
        while keep > 0 && tail + shell[keep] <= budget {
            tail += shell[keep];
            keep -= 1;
        }
        self.truncate(keep)
    }

    /// `a·self + b·other`, zero-padding the smaller degree.
    pub fn combine(&self, a: Complex64, other: &SchwartzFn, b: Complex64) -> Result<SchwartzFn> {
        self.check_dim(other)?;
        let degree = self.degree.max(other.degree);
        let lhs = self.pad_to(degree);
        let rhs = other.pad_to(degree);
        let coeffs = lhs
            .coeffs
            .iter()
            .zip(&rhs.coeffs)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Ok(Self::from_parts(self.dim, degree, coeffs))
    }

    pub fn add(&self, other: &SchwartzFn) -> Result<SchwartzFn> {
        self.combine(Complex64::new(1.0, 0.0), other, Complex64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &SchwartzFn) -> Result<SchwartzFn> {
        self.combine(Complex64::new(1.0, 0.0), other, Complex64::new(-1.0, 0.0))
    }

    pub fn scale(&self, lambda: Complex64) -> SchwartzFn {
        Self::from_parts(
            self.dim,
            self.degree,
            self.coeffs.iter().map(|c| c * lambda).collect(),
        )
    }

    pub fn scale_real(&self, lambda: f64) -> SchwartzFn {
        self.scale(Complex64::new(lambda, 0.0))
    }

    pub(crate) fn from_tensor(dim: usize, degree: usize, coeffs: Vec<Complex64>) -> SchwartzFn {
        Self::from_parts(dim, degree, coeffs)
    }
}

/// `⟨f, g⟩ = Σ conj(f_k) g_k` (antilinear in the first slot).
pub fn inner(f: &SchwartzFn, g: &SchwartzFn) -> Result<Complex64> {
    f.check_dim(g)?;
    if f.degree == g.degree {
        return Ok(f
            .coeffs
            .iter()
            .zip(&g.coeffs)
            .map(|(a, b)| a.conj() * b)
            .sum());
    }
    let (small, large, small_is_f) = if f.degree < g.degree {
        (f, g, true)
    } else {
        (g, f, false)
    };
    let large_shape = large.shape();
    let mut acc = ZERO;
    tensor::for_each_index(&small.shape(), |flat, idx| {
        let a = small.coeffs[flat];
        let b = large.coeffs[tensor::flat_index(idx, &large_shape)];
        acc += if small_is_f {
            a.conj() * b
        } else {
            b.conj() * a
        };
    });
    Ok(acc)
}

/// Applies a ladder combination `raise(j)·a† + lower(j)·a` along one axis,
/// where `raise(j)` weights the move `j → j+1` and `lower(j)` the move
/// `j → j−1`. Output degree is input degree + 1.
fn ladder_along_axis(
    f: &SchwartzFn,
    axis: usize,
    raise: impl Fn(usize) -> Complex64,
    lower: impl Fn(usize) -> Complex64,
) -> Result<SchwartzFn> {
    if axis >= f.dim {
        return Err(Error::AxisOutOfRange { axis, dim: f.dim });
    }
    let degree = f.degree + 1;
    let out_shape = vec![degree + 1; f.dim];
    let mut out = vec![ZERO; tensor::volume(&out_shape)];
    let mut target = vec![0usize; f.dim];
    tensor::for_each_index(&f.shape(), |flat, idx| {
        let c = f.coeffs[flat];
        if c.re == 0.0 && c.im == 0.0 {
            return;
        }
        target.copy_from_slice(idx);
        let j = idx[axis];
        target[axis] = j + 1;
        out[tensor::flat_index(&target, &out_shape)] += raise(j) * c;
        if j > 0 {
            target[axis] = j - 1;
            out[tensor::flat_index(&target, &out_shape)] += lower(j) * c;
        }
    });
    Ok(SchwartzFn::from_parts(f.dim, degree, out))
}

fn sqrt_half(k: usize) -> f64 {
    (k as f64).sqrt() * FRAC_1_SQRT_2
}

/// `(Qⁱf)(x) = xⁱ f(x)`.
pub fn apply_position(f: &SchwartzFn, axis: usize) -> Result<SchwartzFn> {
    ladder_along_axis(
        f,
        axis,
        |j| Complex64::new(sqrt_half(j + 1), 0.0),
        |j| Complex64::new(sqrt_half(j), 0.0),
    )
}

/// `(Pᵢf)(x) = −i ∂ᵢ f(x)`.
pub fn apply_momentum(f: &SchwartzFn, axis: usize) -> Result<SchwartzFn> {
    ladder_along_axis(
        f,
        axis,
        |j| Complex64::new(0.0, sqrt_half(j + 1)),
        |j| Complex64::new(0.0, -sqrt_half(j)),
    )
}

/// `∂ᵢ f`.
pub fn partial(f: &SchwartzFn, axis: usize) -> Result<SchwartzFn> {
    ladder_along_axis(
        f,
        axis,
        |j| Complex64::new(-sqrt_half(j + 1), 0.0),
        |j| Complex64::new(sqrt_half(j), 0.0),
    )
}

fn repeat_axis_op(
    f: &SchwartzFn,
    index: &MultiIndex,
    op: fn(&SchwartzFn, usize) -> Result<SchwartzFn>,
) -> Result<SchwartzFn> {
    if index.dim() != f.dim {
        return Err(Error::DimensionMismatch {
            expected: f.dim,
            found: index.dim(),
        });
    }
    let mut out = f.clone();
    for (axis, &order) in index.entries().iter().enumerate() {
        for _ in 0..order {
            out = op(&out, axis)?;
        }
    }
    Ok(out)
}

/// `D_β f`; degree grows by `|β|`.
pub fn derivative(f: &SchwartzFn, beta: &MultiIndex) -> Result<SchwartzFn> {
    repeat_axis_op(f, beta, partial)
}

/// `x^α f`; degree grows by `|α|`.
pub fn monomial_multiply(f: &SchwartzFn, alpha: &MultiIndex) -> Result<SchwartzFn> {
    repeat_axis_op(f, alpha, apply_position)
}

/// `h_0(x), …, h_K(x)` by the normalized three-term recurrence.
pub fn hermite_values(x: f64, degree: usize) -> Vec<f64> {
    let mut h = Vec::with_capacity(degree + 1);
    h.push(PI.powf(-0.25) * (-0.5 * x * x).exp());
    if degree >= 1 {
        h.push(2f64.sqrt() * x * h[0]);
    }
    for k in 1..degree {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * x * h[k] - (kf / (kf + 1.0)).sqrt() * h[k - 1];
        h.push(next);
    }
    h
}

/// Polynomial part `h_k(x)·e^{x²/2}` of the Hermite functions, for
/// `k = 0..=degree`; same recurrence without the Gaussian factor.
pub fn hermite_polynomial_values(x: f64, degree: usize) -> Vec<f64> {
    let mut p = Vec::with_capacity(degree + 1);
    p.push(PI.powf(-0.25));
    if degree >= 1 {
        p.push(2f64.sqrt() * x * p[0]);
    }
    for k in 1..degree {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * x * p[k] - (kf / (kf + 1.0)).sqrt() * p[k - 1];
        p.push(next);
    }
    p
}

/// Pointwise value `Σ c_k Π h_{kᵢ}(xᵢ)`.
pub fn evaluate(f: &SchwartzFn, x: &[f64]) -> Result<Complex64> {
    if x.len() != f.dim {
        return Err(Error::DimensionMismatch {
            expected: f.dim,
            found: x.len(),
        });
    }
    let tables: Vec<Vec<f64>> = x.iter().map(|&xi| hermite_values(xi, f.degree)).collect();
    let mut acc = ZERO;
    tensor::for_each_index(&f.shape(), |flat, idx| {
        let w: f64 = idx.iter().enumerate().map(|(a, &k)| tables[a][k]).product();
        acc += f.coeffs[flat] * w;
    });
    Ok(acc)
}

/// Uniform tensor grid `[-R, R]ⁿ` used to approximate suprema over ℝⁿ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub half_width: f64,
    pub points_per_axis: usize,
}

impl GridSpec {
    pub fn new(half_width: f64, points_per_axis: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) || points_per_axis < 2 {
            return Err(Error::InvalidGrid(format!(
                "half_width {half_width} must be positive, points_per_axis {points_per_axis} >= 2"
            )));
        }
        Ok(GridSpec {
            half_width,
            points_per_axis,
        })
    }

    /// Smallest admissible grid for degree `degree` with the given margin.
    pub fn for_degree(degree: usize, margin: f64, points_per_axis: usize) -> Result<Self> {
        Self::new(Self::required_half_width(degree, margin), points_per_axis)
    }

    /// Classical turning point `√(2K+1)` plus margin.
    pub fn required_half_width(degree: usize, margin: f64) -> f64 {
        (2.0 * degree as f64 + 1.0).sqrt() + margin
    }

    /// Nested refinement: every old node stays a node.
    pub fn refined(&self) -> Self {
        GridSpec {
            half_width: self.half_width,
            points_per_axis: 2 * self.points_per_axis - 1,
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        let n = self.points_per_axis;
        let step = 2.0 * self.half_width / (n - 1) as f64;
        (0..n).map(|i| -self.half_width + step * i as f64).collect()
    }
}

/// Values of `f` at every node of `grid`, row-major over the tensor grid.
pub fn evaluate_on_grid(f: &SchwartzFn, grid: &GridSpec) -> Vec<Complex64> {
    let nodes = grid.nodes();
    let len = f.degree + 1;
    let mut table = DMatrix::zeros(nodes.len(), len);
    for (r, &x) in nodes.iter().enumerate() {
        for (c, v) in hermite_values(x, f.degree).into_iter().enumerate() {
            table[(r, c)] = v;
        }
    }
    let mut data = f.coeffs.clone();
    let mut shape = f.shape();
    for axis in 0..f.dim {
        let (d, s) = tensor::apply_along_axis(&data, &shape, axis, &table);
        data = d;
        shape = s;
    }
    data
}

/// `‖f‖_{α,β} = sup_x |x^α D_β f(x)|`, approximated by the maximum over
/// the grid nodes. This is a lower bound on the true supremum; nested
/// refinement never decreases it.
pub fn sup_seminorm(
    f: &SchwartzFn,
    alpha: &MultiIndex,
    beta: &MultiIndex,
    grid: &GridSpec,
    margin: f64,
) -> Result<f64> {
    let g = monomial_multiply(&derivative(f, beta)?, alpha)?;
    let required = GridSpec::required_half_width(g.degree, margin);
    if grid.half_width < required {
        return Err(Error::GridTooNarrow {
            half_width: grid.half_width,
            required,
            degree: g.degree,
        });
    }
    Ok(evaluate_on_grid(&g, grid)
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max))
}

/// Raw quadratic form `⟨f, (Q² + P² + 𝟙)^p f⟩ = Σ |c_k|² (2|k| + n + 1)^p`.
pub fn nuclear_quadratic_form(f: &SchwartzFn, p: u32) -> f64 {
    let n = f.dim as f64;
    let mut acc = 0.0;
    tensor::for_each_index(&f.shape(), |flat, idx| {
        let level = 2.0 * idx.iter().sum::<usize>() as f64 + n + 1.0;
        acc += f.coeffs[flat].norm_sqr() * level.powi(p as i32);
    });
    acc
}

/// `‖f‖_p`, the square root of [`nuclear_quadratic_form`].
pub fn nuclear_seminorm(f: &SchwartzFn, p: u32) -> f64 {
    nuclear_quadratic_form(f, p).sqrt()
}

/// JSON coefficient record: interleaved `re, im` pairs in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRecord {
    pub dim: usize,
    pub degree: usize,
    pub coeffs: Vec<f64>,
}

impl From<&SchwartzFn> for CoefficientRecord {
    fn from(f: &SchwartzFn) -> Self {
        CoefficientRecord {
            dim: f.dim,
            degree: f.degree,
            coeffs: f.coeffs.iter().flat_map(|c| [c.re, c.im]).collect(),
        }
    }
}

impl TryFrom<CoefficientRecord> for SchwartzFn {
    type Error = Error;

    fn try_from(rec: CoefficientRecord) -> Result<Self> {
        if !rec.coeffs.len().is_multiple_of(2) {
            return Err(Error::Format("odd number of interleaved values".into()));
        }
        let coeffs = rec
            .coeffs
            .chunks_exact(2)
            .map(|p| Complex64::new(p[0], p[1]))
            .collect();
        SchwartzFn::new(rec.dim, rec.degree, coeffs)
    }
}

impl SchwartzFn {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&CoefficientRecord::from(self)).expect("record serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let rec: CoefficientRecord =
            serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))?;
        rec.try_into()
    }

    /// Binary layout: `u32 dim`, `u32 degree`, then interleaved `f64`
    /// re/im pairs, all little-endian.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + 16 * self.coeffs.len());
        out.extend_from_slice(&(self.dim as u32).to_le_bytes());
        out.extend_from_slice(&(self.degree as u32).to_le_bytes());
        for c in &self.coeffs {
            out.extend_from_slice(&c.re.to_le_bytes());
            out.extend_from_slice(&c.im.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 8 || !(bytes.len() - 8).is_multiple_of(16) {
            return Err(Error::Format(format!("bad record length {}", bytes.len())));
        }
        let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap()) as usize;
        let (dim, degree) = (word(0), word(4));
        let coeffs = bytes[8..]
            .chunks_exact(16)
            .map(|c| {
                Complex64::new(
                    f64::from_le_bytes(c[..8].try_into().unwrap()),
                    f64::from_le_bytes(c[8..].try_into().unwrap()),
                )
            })
            .collect();
        SchwartzFn::new(dim, degree, coeffs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rejects_bad_construction() {
        assert!(matches!(
            SchwartzFn::new(1, 2, vec![ZERO; 2]),
            Err(Error::CoefficientLength { .. })
        ));
        assert!(matches!(
            SchwartzFn::new(1, 1, vec![ZERO, c(f64::NAN, 0.0)]),
            Err(Error::NonFinite { index: 1 })
        ));
    }

    #[test]
    fn stored_norm_matches_recomputation() {
        let f = SchwartzFn::new(2, 2, (0..9).map(|k| c(k as f64, 0.5)).collect()).unwrap();
        let direct: f64 = f.coeffs().iter().map(|z| z.norm_sqr()).sum();
        assert_abs_diff_eq!(f.norm_sq(), direct, epsilon = 1e-12);
    }

    #[test]
    fn inner_of_basis() {
        let h0 = SchwartzFn::basis(&[0], 3);
        let h1 = SchwartzFn::basis(&[1], 5);
        assert_eq!(inner(&h0, &h0).unwrap(), c(1.0, 0.0));
        assert_eq!(inner(&h0, &h1).unwrap(), ZERO);
    }

    #[test]
    fn inner_dimension_mismatch() {
        let a = SchwartzFn::basis(&[0], 1);
        let b = SchwartzFn::basis(&[0, 0], 1);
        assert!(matches!(
            inner(&a, &b),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn position_on_ground_state() {
        let h0 = SchwartzFn::basis(&[0], 0);
        let q = apply_position(&h0, 0).unwrap();
        assert_eq!(q.degree(), 1);
        assert_abs_diff_eq!(q.coeff(&[1]).re, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(q.coeff(&[0]).norm(), 0.0);
        let h1 = SchwartzFn::basis(&[1], 1);
        let v = inner(&h0, &apply_position(&h1, 0).unwrap()).unwrap();
        assert_abs_diff_eq!(v.re, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert!(apply_position(&SchwartzFn::zero(1, 3), 0)
            .unwrap()
            .is_zero());
        assert!(matches!(
            apply_position(&h0, 1),
            Err(Error::AxisOutOfRange { axis: 1, dim: 1 })
        ));
    }

    #[test]
    fn momentum_on_ground_state() {
        let h0 = SchwartzFn::basis(&[0], 0);
        let p = apply_momentum(&h0, 0).unwrap();
        assert_abs_diff_eq!(p.coeff(&[1]).im, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(p.coeff(&[1]).re, 0.0);
        let f = SchwartzFn::from_real(1, 3, &[0.3, -1.2, 0.7, 2.0]).unwrap();
        let lam = c(0.4, -1.7);
        let lhs = apply_momentum(&f.scale(lam), 0).unwrap();
        let rhs = apply_momentum(&f, 0).unwrap().scale(lam);
        assert!(lhs.sub(&rhs).unwrap().norm() < 1e-14);
        let expect = inner(&f, &apply_momentum(&f, 0).unwrap()).unwrap();
        assert!(expect.im.abs() < 1e-14);
    }

    #[test]
    fn derivative_of_ground_state() {
        let h0 = SchwartzFn::basis(&[0], 0);
        let d = derivative(&h0, &MultiIndex::new([1])).unwrap();
        assert_abs_diff_eq!(d.coeff(&[1]).re, -FRAC_1_SQRT_2, epsilon = 1e-15);
        let f = SchwartzFn::from_real(1, 4, &[1.0, 0.2, -0.3, 0.1, 0.05]).unwrap();
        assert_eq!(derivative(&f, &MultiIndex::zeros(1)).unwrap(), f);
        let twice = derivative(
            &derivative(&f, &MultiIndex::new([1])).unwrap(),
            &MultiIndex::new([1]),
        )
        .unwrap();
        let direct = derivative(&f, &MultiIndex::new([2])).unwrap();
        assert!(twice.sub(&direct).unwrap().norm() < 1e-15);
    }

    #[test]
    fn monomials() {
        let h0 = SchwartzFn::basis(&[0], 0);
        assert_eq!(monomial_multiply(&h0, &MultiIndex::zeros(1)).unwrap(), h0);
        let x2 = monomial_multiply(&h0, &MultiIndex::new([2])).unwrap();
        assert_abs_diff_eq!(inner(&h0, &x2).unwrap().re, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn pointwise_values() {
        let h0 = SchwartzFn::basis(&[0], 0);
        assert_abs_diff_eq!(
            evaluate(&h0, &[0.0]).unwrap().re,
            PI.powf(-0.25),
            epsilon = 1e-15
        );
        let h1 = SchwartzFn::basis(&[1], 1);
        assert_eq!(evaluate(&h1, &[0.0]).unwrap().re, 0.0);
        assert!(evaluate(&h1, &[0.0, 1.0]).is_err());
    }

    #[test]
    fn sup_seminorm_basics() {
        let grid = GridSpec::for_degree(1, 4.0, 401).unwrap();
        let z = SchwartzFn::zero(1, 0);
        assert_eq!(
            sup_seminorm(&z, &MultiIndex::new([1]), &MultiIndex::new([0]), &grid, 4.0).unwrap(),
            0.0
        );
        let h0 = SchwartzFn::basis(&[0], 0);
        let s = sup_seminorm(
            &h0,
            &MultiIndex::zeros(1),
            &MultiIndex::zeros(1),
            &grid,
            4.0,
        )
        .unwrap();
        assert_abs_diff_eq!(s, PI.powf(-0.25), epsilon = 1e-15);
        let narrow = GridSpec::new(1.0, 11).unwrap();
        assert!(matches!(
            sup_seminorm(
                &h0,
                &MultiIndex::zeros(1),
                &MultiIndex::zeros(1),
                &narrow,
                4.0
            ),
            Err(Error::GridTooNarrow { .. })
        ));
    }

    #[test]
    fn nuclear_seminorm_values() {
        let f = SchwartzFn::new(1, 2, vec![c(0.3, 0.1), c(-1.0, 0.0), c(0.0, 2.0)]).unwrap();
        assert_abs_diff_eq!(nuclear_seminorm(&f, 0), f.norm(), epsilon = 1e-14);
        let h0 = SchwartzFn::basis(&[0], 0);
        assert_abs_diff_eq!(nuclear_seminorm(&h0, 1), 2f64.sqrt(), epsilon = 1e-15);
        for k in 0..=8 {
            for p in 0..=3u32 {
                let hk = SchwartzFn::basis(&[k], k);
                let expected = (2.0 * k as f64 + 2.0).powf(p as f64 / 2.0);
                assert_abs_diff_eq!(
                    nuclear_seminorm(&hk, p),
                    expected,
                    epsilon = 1e-12 * expected
                );
            }
        }
    }

    #[test]
    fn truncate_and_trim_report_mass() {
        let f = SchwartzFn::from_real(1, 4, &[1.0, 0.5, 0.0, 1e-12, 1e-13]).unwrap();
        let (t, lost) = f.truncate(1);
        assert_eq!(t.degree(), 1);
        assert_abs_diff_eq!(lost, 1e-24 + 1e-26, epsilon = 1e-30);
        let (t, lost) = f.trim(1e-10);
        assert_eq!(t.degree(), 1);
        assert!(lost < 1e-20);
        let (t, _) = f.trim(1e-16);
        assert_eq!(t.degree(), 4);
    }

    #[test]
    fn serialization_round_trips() {
        let f = SchwartzFn::new(
            2,
            1,
            vec![c(1.0, -2.0), c(0.5, 0.0), c(0.0, 3.0), c(-1.0, 1.0)],
        )
        .unwrap();
        assert_eq!(SchwartzFn::from_json(&f.to_json()).unwrap(), f);
        let bytes = f.to_bytes();
        assert_eq!(&bytes[..4], &2u32.to_le_bytes());
        assert_eq!(SchwartzFn::from_bytes(&bytes).unwrap(), f);
        assert!(SchwartzFn::from_bytes(&bytes[..7]).is_err());
        assert!(SchwartzFn::from_json(r#"{"dim":1,"degree":0,"coeffs":[1.0]}"#).is_err());
    }
}
