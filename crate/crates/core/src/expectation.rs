//! Expectation values, the position-expectation map `Q̄` and its
//! differential, the Gaussian section `Ψ`, and the indistinguishability
//! predicate of the expectation-value topology.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::ModelSpace;
use crate::error::{Error, Result};
use crate::hermite::{self, hermite_polynomial_values, inner, nuclear_seminorm, SchwartzFn};
use crate::quadrature::GaussHermite;
use crate::tensor;

/// Operator whose expectation value is taken.
pub enum Observable<'a> {
    Position(usize),
    Momentum(usize),
    /// Action of a Hermitian operator supplied by the caller.
    Custom(&'a dyn Fn(&SchwartzFn) -> Result<SchwartzFn>),
}

/// `Q̄(f)`, the position expectation vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectationValue {
    pub value: Vec<f64>,
}

impl ExpectationValue {
    pub fn as_slice(&self) -> &[f64] {
        &self.value
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.value
    }
}

/// Both sides of the continuity estimate for `Q̄` on the ball
/// `‖f‖ < ½‖f₀‖`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

pub(crate) fn inf_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub(crate) fn euclid(a: &[f64]) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `‖Qf‖ = (Σᵢ ‖Qⁱf‖²)^{1/2}`, computed exactly after degree growth.
pub fn position_norm(f: &SchwartzFn) -> Result<f64> {
    let mut acc = 0.0;
    for axis in 0..f.dim() {
        acc += hermite::apply_position(f, axis)?.norm_sq();
    }
    Ok(acc.sqrt())
}

impl ModelSpace {
    /// Rejects functions that count as zero (not in `𝒮^{≠0}`).
    pub fn require_nonzero(&self, f: &SchwartzFn) -> Result<()> {
        let norm = f.norm();
        if norm <= self.tol.nonzero {
            return Err(Error::NonzeroRequired {
                norm,
                tol: self.tol.nonzero,
            });
        }
        Ok(())
    }

    /// `Ō(f) = ⟨f, Of⟩ / ⟨f, f⟩`.
    pub fn expectation(&self, f: &SchwartzFn, op: Observable<'_>) -> Result<f64> {
        self.require_nonzero(f)?;
        let of = match op {
            Observable::Position(axis) => hermite::apply_position(f, axis)?,
            Observable::Momentum(axis) => hermite::apply_momentum(f, axis)?,
            Observable::Custom(action) => action(f)?,
        };
        let num = inner(f, &of)?;
        let bound = 1e-10 * f.norm_sq();
        if num.im.abs() > bound {
            return Err(Error::NotHermitian {
                imag: num.im.abs(),
                bound,
            });
        }
        Ok(num.re / f.norm_sq())
    }

    pub fn position_expectation(&self, f: &SchwartzFn) -> Result<ExpectationValue> {
        self.require_nonzero(f)?;
        let value = (0..f.dim())
            .map(|axis| self.expectation(f, Observable::Position(axis)))
            .collect::<Result<Vec<_>>>()?;
        Ok(ExpectationValue { value })
    }

    /// `DQ̄(f₀)(f) = (⟨f₀,Qf⟩ + ⟨f,Qf₀⟩ − Q̄(f₀)(⟨f₀,f⟩ + ⟨f,f₀⟩)) / ⟨f₀,f₀⟩`.
    pub fn d_expectation(&self, f0: &SchwartzFn, f: &SchwartzFn) -> Result<Vec<f64>> {
        let q0 = self.position_expectation(f0)?;
        let overlap = inner(f0, f)? + inner(f, f0)?;
        (0..f0.dim())
            .map(|axis| {
                let qf = hermite::apply_position(f, axis)?;
                let qf0 = hermite::apply_position(f0, axis)?;
                let num = inner(f0, &qf)? + inner(f, &qf0)? - overlap * q0.value[axis];
                Ok(num.re / f0.norm_sq())
            })
            .collect()
    }

    /// `Ψ(x) = (y ↦ e^{−|y−x|²})` at truncation `degree`.
    pub fn gaussian_section(&self, x: &[f64], degree: usize) -> Result<SchwartzFn> {
        self.gaussian_section_with_width(x, degree, 1.0)
    }

    /// `y ↦ e^{−|y−x|²/w²}`; `w = 1` is the section proper.
    ///
    /// Per axis, `∫ h_k(y) e^{−(y−x)²/w²} dy` reduces after completing the
    /// square to a polynomial against `e^{−u²}`, which Gauss–Hermite
    /// integrates exactly.
    pub fn gaussian_section_with_width(
        &self,
        x: &[f64],
        degree: usize,
        width: f64,
    ) -> Result<SchwartzFn> {
        if x.is_empty() {
            return Err(Error::Precondition(
                "section needs a point in ℝⁿ, n >= 1".into(),
            ));
        }
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::Precondition(format!(
                "section width must be positive, got {width}"
            )));
        }
        let rule = GaussHermite::new(degree + 2);
        let w2 = width * width;
        let a = 0.5 + 1.0 / w2;
        let per_axis: Vec<Vec<f64>> = x
            .iter()
            .map(|&xi| {
                let center = xi / (a * w2);
                let constant = xi * xi / (a * w2 * w2) - xi * xi / w2;
                let scale = constant.exp() / a.sqrt();
                let mut acc = vec![0.0; degree + 1];
                for (&u, &w) in rule.nodes.iter().zip(&rule.weights) {
                    let y = u / a.sqrt() + center;
                    for (slot, p) in acc.iter_mut().zip(hermite_polynomial_values(y, degree)) {
                        *slot += w * p;
                    }
                }
                acc.iter().map(|v| v * scale).collect()
            })
            .collect();
        let shape = vec![degree + 1; x.len()];
        let mut coeffs = vec![Complex64::new(0.0, 0.0); tensor::volume(&shape)];
        tensor::for_each_index(&shape, |flat, idx| {
            let v: f64 = idx
                .iter()
                .enumerate()
                .map(|(axis, &k)| per_axis[axis][k])
                .product();
            coeffs[flat] = Complex64::new(v, 0.0);
        });
        let f = SchwartzFn::new(x.len(), degree, coeffs)?;
        let exact = (width * (std::f64::consts::PI / 2.0).sqrt()).powi(x.len() as i32);
        let mass_defect = ((exact - f.norm_sq()) / exact).max(0.0);
        if mass_defect > self.tol.section {
            return Err(Error::SectionTruncation {
                center: x.to_vec(),
                degree,
                mass_defect,
            });
        }
        Ok(f)
    }

    /// True iff `|Q̄(f) − Q̄(g)|_∞ <= tol`.
    pub fn indistinguishable(&self, f: &SchwartzFn, g: &SchwartzFn, tol: f64) -> Result<bool> {
        let qf = self.position_expectation(f)?;
        let qg = self.position_expectation(g)?;
        if qf.value.len() != qg.value.len() {
            return Err(Error::DimensionMismatch {
                expected: qf.value.len(),
                found: qg.value.len(),
            });
        }
        Ok(inf_dist(&qf.value, &qg.value) <= tol)
    }

    /// Evaluates
    /// `|Q̄(f₀+f) − Q̄(f₀)| <= 4‖f‖₁‖f₀‖⁻³[(‖Qf₀‖ + ‖f₀‖ + ‖f‖₁)‖f₀‖ + ‖Qf₀‖(2‖f₀‖ + ‖f‖₁)]`,
    /// which is only claimed for `‖f‖ < ½‖f₀‖`.
    pub fn continuity_bound_check(&self, f0: &SchwartzFn, f: &SchwartzFn) -> Result<BoundCheck> {
        self.require_nonzero(f0)?;
        let n0 = f0.norm();
        if f.norm() >= 0.5 * n0 {
            return Err(Error::Precondition(format!(
                "continuity bound needs ‖f‖ < ½‖f₀‖, got ‖f‖ = {} and ‖f₀‖ = {}",
                f.norm(),
                n0
            )));
        }
        let lhs = if f.is_zero() {
            0.0
        } else {
            let shifted = self.position_expectation(&f0.add(f)?)?;
            let base = self.position_expectation(f0)?;
            let diff: Vec<f64> = shifted
                .value
                .iter()
                .zip(&base.value)
                .map(|(a, b)| a - b)
                .collect();
            euclid(&diff)
        };
        let f1 = nuclear_seminorm(f, 1);
        let qf0 = position_norm(f0)?;
        let rhs = 4.0 * f1 / n0.powi(3) * ((qf0 + n0 + f1) * n0 + qf0 * (2.0 * n0 + f1));
        Ok(BoundCheck {
            lhs,
            rhs,
            holds: lhs <= rhs,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{profile_fn, rng_for};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn space() -> ModelSpace {
        ModelSpace::for_degree(48)
    }

    #[test]
    fn basis_states_have_zero_position() {
        let s = space();
        for k in 0..10 {
            let hk = SchwartzFn::basis(&[k], k);
            assert_abs_diff_eq!(s.expectation(&hk, Observable::Position(0)).unwrap(), 0.0);
        }
        let h00 = SchwartzFn::basis(&[0, 0], 0);
        assert_eq!(s.position_expectation(&h00).unwrap().value, vec![0.0, 0.0]);
    }

    #[test]
    fn superposition_expectation() {
        let f = SchwartzFn::from_real(1, 1, &[FRAC_1_SQRT_2, FRAC_1_SQRT_2]).unwrap();
        let q = space().expectation(&f, Observable::Position(0)).unwrap();
        assert_abs_diff_eq!(q, FRAC_1_SQRT_2, epsilon = 1e-15);
    }

    #[test]
    fn zero_function_rejected() {
        let s = space();
        let z = SchwartzFn::zero(1, 4);
        assert!(matches!(
            s.position_expectation(&z),
            Err(Error::NonzeroRequired { .. })
        ));
        assert!(matches!(
            s.d_expectation(&z, &z),
            Err(Error::NonzeroRequired { .. })
        ));
        assert!(s.indistinguishable(&z, &z, 1e-9).is_err());
    }

    #[test]
    fn custom_observable_must_be_hermitian() {
        let s = space();
        let f = SchwartzFn::from_real(1, 2, &[1.0, 0.5, 0.25]).unwrap();
        let number = |g: &SchwartzFn| -> Result<SchwartzFn> {
            let a = hermite::apply_position(g, 0)?;
            let b = hermite::apply_position(&a, 0)?;
            Ok(b)
        };
        assert!(s.expectation(&f, Observable::Custom(&number)).is_ok());
        let skew = |g: &SchwartzFn| -> Result<SchwartzFn> { Ok(g.scale(Complex64::new(0.0, 1.0))) };
        assert!(matches!(
            s.expectation(&f, Observable::Custom(&skew)),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn scale_invariance() {
        let s = space();
        let f = profile_fn(&mut rng_for(3, "scale"), 1, 20, 5.0);
        let a = s.position_expectation(&f).unwrap();
        let b = s
            .position_expectation(&f.scale(Complex64::new(-2.5, 0.7)))
            .unwrap();
        assert_abs_diff_eq!(a.value[0], b.value[0], epsilon = 1e-12);
    }

    #[test]
    fn differential_examples() {
        let s = space();
        let h0 = SchwartzFn::basis(&[0], 0);
        let h1 = SchwartzFn::basis(&[1], 1);
        // Q̄(h₀ + t h₁) = √2 t / (1 + t²), so the slope at t = 0 is √2.
        assert_abs_diff_eq!(
            s.d_expectation(&h0, &h1).unwrap()[0],
            2f64.sqrt(),
            epsilon = 1e-15
        );
        let t = 1e-5;
        let fd = |t: f64| {
            s.position_expectation(&h0.add(&h1.scale_real(t)).unwrap())
                .unwrap()
                .value[0]
        };
        assert_abs_diff_eq!((fd(t) - fd(-t)) / (2.0 * t), 2f64.sqrt(), epsilon = 1e-9);
        let f0 = profile_fn(&mut rng_for(5, "d"), 1, 12, 4.0);
        assert_abs_diff_eq!(s.d_expectation(&f0, &f0).unwrap()[0], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn section_coefficients() {
        let s = space();
        let psi0 = s.gaussian_section(&[0.0], 48).unwrap();
        for k in (1..=48).step_by(2) {
            assert!(psi0.coeff(&[k]).norm() < 1e-14);
        }
        assert_abs_diff_eq!(
            psi0.coeff(&[0]).re,
            PI.powf(-0.25) * (2.0 * PI / 3.0).sqrt(),
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            inner(&psi0, &psi0).unwrap().re,
            (PI / 2.0).sqrt(),
            epsilon = 1e-13
        );
        let psi2 = s.gaussian_section(&[2.0], 48).unwrap();
        assert_abs_diff_eq!(
            s.position_expectation(&psi2).unwrap().value[0],
            2.0,
            epsilon = 1e-10
        );
        let v = s.gaussian_section(&[1.0, -2.0], 48).unwrap();
        let q = s.position_expectation(&v).unwrap();
        assert_abs_diff_eq!(q.value[0], 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(q.value[1], -2.0, epsilon = 1e-10);
    }

    #[test]
    fn section_truncation_is_reported() {
        let s = space();
        match s.gaussian_section(&[2.0], 4) {
            Err(Error::SectionTruncation { mass_defect, .. }) => assert!(mass_defect > 1e-6),
            other => panic!("expected truncation error, got {other:?}"),
        }
    }

    #[test]
    fn indistinguishability_examples() {
        let s = space();
        let h0 = SchwartzFn::basis(&[0], 0);
        let h1 = SchwartzFn::basis(&[1], 1);
        assert!(s.indistinguishable(&h0, &h1, 1e-9).unwrap());
        let f = profile_fn(&mut rng_for(9, "ind"), 1, 16, 4.0);
        assert!(s
            .indistinguishable(&f, &f.scale(Complex64::new(0.3, 2.0)), 1e-9)
            .unwrap());
        let p0 = s.gaussian_section(&[0.0], 48).unwrap();
        let p1 = s.gaussian_section(&[1.0], 48).unwrap();
        assert!(!s.indistinguishable(&p0, &p1, 1e-9).unwrap());
    }

    #[test]
    fn continuity_bound_edges() {
        let s = space();
        let f0 = profile_fn(&mut rng_for(11, "b"), 1, 16, 4.0);
        let zero = SchwartzFn::zero(1, 16);
        let chk = s.continuity_bound_check(&f0, &zero).unwrap();
        assert_eq!((chk.lhs, chk.rhs, chk.holds), (0.0, 0.0, true));
        let dir = profile_fn(&mut rng_for(11, "c"), 1, 16, 4.0);
        let f = dir.scale_real(0.49 * f0.norm() / dir.norm());
        assert!(s.continuity_bound_check(&f0, &f).unwrap().holds);
        let big = dir.scale_real(0.5 * f0.norm() / dir.norm());
        assert!(matches!(
            s.continuity_bound_check(&f0, &big),
            Err(Error::Precondition(_))
        ));
    }
}
