//! The fiber `𝒮₀ = Q̄⁻¹(0)`, the trivialization
//! `τ(f) = (Q̄(f), T_{−Q̄(f)} f)` with inverse `τ⁻¹(x, g) = T_x g`, and the
//! differentials of both.

use nalgebra::{DMatrix, DVector};

use crate::atlas::{QuantumAtlas, QuantumPoint};
use crate::config::ModelSpace;
use crate::error::{Error, Result};
use crate::expectation::euclid;
use crate::hermite::{apply_position, inner, partial, SchwartzFn};
use crate::tangent::{tangent_slope, NormSelector, Residual, TangentSlopeReport};

/// A point of `ℝⁿ × 𝒮₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberPoint {
    pub base: Vec<f64>,
    pub fiber: SchwartzFn,
}

impl FiberPoint {
    /// Checks that `fiber` is nonzero with `|Q̄(fiber)|_∞ ≤ fiber_tol`.
    pub fn new(space: &ModelSpace, base: Vec<f64>, fiber: SchwartzFn) -> Result<Self> {
        if base.len() != fiber.dim() {
            return Err(Error::DimensionMismatch {
                expected: fiber.dim(),
                found: base.len(),
            });
        }
        space.check_fiber(&fiber)?;
        Ok(FiberPoint { base, fiber })
    }
}

/// `max(|x|, ‖g‖₁)`, the norm used on `ℝⁿ × 𝒮`.
pub fn product_norm(x: &[f64], g: &SchwartzFn) -> f64 {
    Residual::Product(x.to_vec(), g.clone()).measure(NormSelector::Product)
}

fn axpy(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(u, v)| u + s * v).collect()
}

fn negate(x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| -v).collect()
}

impl ModelSpace {
    pub(crate) fn check_fiber(&self, g: &SchwartzFn) -> Result<()> {
        let q = self.position_expectation(g)?;
        let worst = q.as_slice().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if worst > self.tol.fiber {
            return Err(Error::NotInFiber {
                expectation: worst,
                tol: self.tol.fiber,
            });
        }
        Ok(())
    }

    /// `T_{−Q̄(f)} f`.
    pub fn project_to_fiber(&self, f: &SchwartzFn) -> Result<SchwartzFn> {
        let q = self.position_expectation(f)?;
        self.translate(f, &negate(q.as_slice()))
    }

    /// `τ(f) = (Q̄(f), T_{−Q̄(f)} f)`.
    pub fn trivialize(&self, f: &SchwartzFn) -> Result<FiberPoint> {
        let base = self.position_expectation(f)?.into_vec();
        let fiber = self.translate(f, &negate(&base))?;
        FiberPoint::new(self, base, fiber)
    }

    /// `τ⁻¹(x, g) = T_x g`.
    pub fn untrivialize(&self, p: &FiberPoint) -> Result<SchwartzFn> {
        if p.base.len() != p.fiber.dim() {
            return Err(Error::DimensionMismatch {
                expected: p.fiber.dim(),
                found: p.base.len(),
            });
        }
        self.check_fiber(&p.fiber)?;
        self.translate(&p.fiber, &p.base)
    }

    /// `Dτ(f₀)(g) = (DQ̄(f₀)(g), Σᵢ DQ̄ᵢ(f₀)(g) ∂ᵢ(T_{−Q̄(f₀)} f₀) + T_{−Q̄(f₀)} g)`.
    pub fn d_trivialize(&self, f0: &SchwartzFn, g: &SchwartzFn) -> Result<(Vec<f64>, SchwartzFn)> {
        let q0 = self.position_expectation(f0)?.into_vec();
        let v = self.d_expectation(f0, g)?;
        let back = negate(&q0);
        let g0 = self.translate(f0, &back)?;
        let mut h = self.translate(g, &back)?;
        for (axis, &vi) in v.iter().enumerate() {
            h = h.add(&partial(&g0, axis)?.scale_real(vi))?;
        }
        Ok((v, h))
    }

    /// `Dτ⁻¹(x₀, g₀)(x, g) = −Σᵢ xᵢ ∂ᵢ(T_{x₀} g₀) + T_{x₀} g`, defined for
    /// directions with `DQ̄(g₀)(g) = 0` (checked against `fiber_tol`).
    pub fn d_untrivialize(
        &self,
        x0: &[f64],
        g0: &SchwartzFn,
        x: &[f64],
        g: &SchwartzFn,
    ) -> Result<SchwartzFn> {
        if x0.len() != g0.dim() || x.len() != g0.dim() {
            return Err(Error::DimensionMismatch {
                expected: g0.dim(),
                found: x0.len().max(x.len()),
            });
        }
        let slope = self.d_expectation(g0, g)?;
        let worst = slope.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if worst > self.tol.fiber * g.norm().max(1.0) {
            return Err(Error::DirectionNotTangent {
                value: worst,
                tol: self.tol.fiber,
            });
        }
        let moved = self.translate(g0, x0)?;
        let mut out = self.translate(g, x0)?;
        for (axis, &xi) in x.iter().enumerate() {
            out = out.sub(&partial(&moved, axis)?.scale_real(xi))?;
        }
        Ok(out)
    }

    /// Removes from `g` its component along `(Qᵢ − Q̄ᵢ(g₀)) g₀` under the real
    /// inner product `Re⟨·,·⟩`, which makes `DQ̄(g₀)(g) = 0`.
    pub fn admissible_direction(&self, g0: &SchwartzFn, g: &SchwartzFn) -> Result<SchwartzFn> {
        let q0 = self.position_expectation(g0)?;
        let w = (0..g0.dim())
            .map(|axis| apply_position(g0, axis)?.sub(&g0.scale_real(q0.value[axis])))
            .collect::<Result<Vec<_>>>()?;
        let n = w.len();
        let mut gram = DMatrix::zeros(n, n);
        let mut rhs = DVector::zeros(n);
        for i in 0..n {
            for j in 0..n {
                gram[(i, j)] = inner(&w[i], &w[j])?.re;
            }
            rhs[i] = inner(&w[i], g)?.re;
        }
        let coef = gram
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Precondition("degenerate position spread".into()))?;
        w.iter()
            .enumerate()
            .try_fold(g.clone(), |acc, (i, wi)| acc.sub(&wi.scale_real(coef[i])))
    }

    /// Log-log slope of `τ(f₀+tg) − τ(f₀) − t·Dτ(f₀)(g)` in the product norm.
    pub fn trivialize_remainder(
        &self,
        f0: &SchwartzFn,
        g: &SchwartzFn,
        t_grid: &[f64],
    ) -> Result<TangentSlopeReport> {
        let p0 = self.trivialize(f0)?;
        let (dv, dh) = self.d_trivialize(f0, g)?;
        tangent_slope(
            |t, f0| {
                let p = self.trivialize(&f0.add(&g.scale_real(t))?)?;
                let base: Vec<f64> = (0..p.base.len())
                    .map(|i| p.base[i] - p0.base[i] - t * dv[i])
                    .collect();
                let fiber = p.fiber.sub(&p0.fiber)?.sub(&dh.scale_real(t))?;
                Ok(Residual::Product(base, fiber))
            },
            f0,
            NormSelector::Product,
            t_grid,
        )
    }

    /// Log-log slope of `T_{x₀+tx}(g₀+tg) − T_{x₀}g₀ − t·Dτ⁻¹(x₀,g₀)(x,g)`.
    ///
    /// The curve `g₀ + tg` leaves `𝒮₀` at second order, so the remainder is
    /// taken for `T` itself, of which `τ⁻¹` is the restriction.
    pub fn untrivialize_remainder(
        &self,
        x0: &[f64],
        g0: &SchwartzFn,
        x: &[f64],
        g: &SchwartzFn,
        t_grid: &[f64],
    ) -> Result<TangentSlopeReport> {
        let base = self.translate(g0, x0)?;
        let d = self.d_untrivialize(x0, g0, x, g)?;
        tangent_slope(
            |t, g0| {
                let moved = self.translate(&g0.add(&g.scale_real(t))?, &axpy(x0, t, x))?;
                Ok(Residual::Function(moved.sub(&base)?.sub(&d.scale_real(t))?))
            },
            g0,
            NormSelector::Nuclear(1),
            t_grid,
        )
    }

    /// `max(|x − x'|, ‖g − g'‖)` after `τ(τ⁻¹(x, g)) = (x', g')`, and
    /// `‖τ⁻¹(τ(f)) − f‖ / ‖f‖` for `f = τ⁻¹(x, g)`.
    pub fn trivialization_round_trips(&self, p: &FiberPoint) -> Result<(f64, f64)> {
        let f = self.untrivialize(p)?;
        let q = self.trivialize(&f)?;
        let dx: Vec<f64> = q.base.iter().zip(&p.base).map(|(a, b)| a - b).collect();
        let forward = euclid(&dx).max(q.fiber.sub(&p.fiber)?.norm());
        let back = self.untrivialize(&q)?.sub(&f)?.norm() / f.norm();
        Ok((forward, back))
    }
}

/// Worst deviations found by [`QuantumAtlas::verify_local_triviality`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalTriviality {
    /// `d(ω₁(ψ), 𝒬(ψ))`.
    pub omega1_vs_projection: f64,
    /// `d(ω₁(ψ), ξ)` for `ψ = (ξ, g)`.
    pub omega1_vs_base: f64,
    /// `max(d(ξ, ξ'), ‖g − g'‖)` for `ω⁻¹(ω(ψ)) = (ξ', g')`.
    pub round_trip: f64,
}

impl QuantumAtlas {
    /// `ω = (χᵢ⁻¹ × id) ∘ τ ∘ φᵢ` on the given samples of `Uᵢ`: compares
    /// `ω₁` with the Kolmogorov projection and inverts `ω` through
    /// `φᵢ⁻¹ ∘ τ⁻¹ ∘ (χᵢ × id)`.
    pub fn verify_local_triviality(
        &self,
        chart: usize,
        samples: &[QuantumPoint],
    ) -> Result<LocalTriviality> {
        let c = self.classical.chart(chart)?;
        let geo = self.classical.geometry;
        let mut out = LocalTriviality {
            omega1_vs_projection: 0.0,
            omega1_vs_base: 0.0,
            round_trip: 0.0,
        };
        for psi in samples {
            let f = self.phi(chart, psi)?;
            let p = self.space.trivialize(&f)?;
            if !c.image_contains(&p.base) {
                return Err(Error::SampleOutsideChart {
                    chart,
                    detail: format!("Q̄ = {:?} left the chart image", p.base),
                });
            }
            let omega1 = c.inverse(&p.base);
            let projected = self.kolmogorov_project(chart, psi)?;
            out.omega1_vs_projection = out
                .omega1_vs_projection
                .max(geo.distance(&omega1, &projected));
            out.omega1_vs_base = out.omega1_vs_base.max(geo.distance(&omega1, &psi.base));

            let lifted = FiberPoint::new(&self.space, c.map(&omega1), p.fiber)?;
            let back = self.phi_inv(chart, &self.space.untrivialize(&lifted)?)?;
            let d = geo
                .distance(&back.base, &psi.base)
                .max(back.fiber.sub(&psi.fiber)?.norm());
            out.round_trip = out.round_trip.max(d);
        }
        Ok(out)
    }
}
