//! Log-log slope fits used to certify that a remainder map is tangent to
//! zero (`|δ(t)| = O(t²)`) or that a continuity modulus shrinks linearly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermite::{nuclear_seminorm, SchwartzFn};

/// Residuals at or below this level are treated as roundoff.
pub const UNDERFLOW: f64 = 1e-14;

/// Slope a remainder must reach to count as `o(t) = t²`.
pub const TANGENT_SLOPE: f64 = 1.9;

/// Value of a remainder map at one `t`.
#[derive(Debug, Clone)]
pub enum Residual {
    Vector(Vec<f64>),
    Function(SchwartzFn),
    /// Element of `ℝⁿ × 𝒮`.
    Product(Vec<f64>, SchwartzFn),
}

/// How a [`Residual`] is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormSelector {
    L2,
    Nuclear(u32),
    /// `max(|x|, ‖g‖₁)` on `ℝⁿ × 𝒮`.
    Product,
}

impl Residual {
    pub fn measure(&self, norm: NormSelector) -> f64 {
        let vec_norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let fn_norm = |g: &SchwartzFn| match norm {
            NormSelector::L2 => g.norm(),
            NormSelector::Nuclear(p) => nuclear_seminorm(g, p),
            NormSelector::Product => nuclear_seminorm(g, 1),
        };
        match self {
            Residual::Vector(v) => vec_norm(v),
            Residual::Function(g) => fn_norm(g),
            Residual::Product(v, g) => vec_norm(v).max(fn_norm(g)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TangentVerdict {
    Tangent,
    NotTangent,
    /// Every residual sat below the roundoff floor.
    Vacuous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentSlopeReport {
    pub t_values: Vec<f64>,
    pub residual_norms: Vec<f64>,
    pub fitted_slope: f64,
    pub verdict: TangentVerdict,
}

impl TangentSlopeReport {
    /// Tangent or vacuous.
    pub fn passed(&self) -> bool {
        self.verdict != TangentVerdict::NotTangent
    }
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = x.iter().zip(y).map(|(a, b)| (a.ln(), b.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Geometric grid of `count` points from `hi` down to `lo`.
pub fn geometric_grid(hi: f64, lo: f64, count: usize) -> Vec<f64> {
    let ratio = (lo / hi).powf(1.0 / (count - 1) as f64);
    (0..count).map(|i| hi * ratio.powi(i as i32)).collect()
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    let ok = t_grid.len() >= 4
        && t_grid.iter().all(|&t| t > 0.0 && t <= 1.0)
        && t_grid.windows(2).all(|w| w[1] < w[0])
        && t_grid[0] / t_grid[t_grid.len() - 1] >= 100.0 * (1.0 - 1e-12);
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidTGrid)
    }
}

/// Fits the decay of `‖δ(t, f)‖` over `t_grid`. Points under the roundoff
/// floor are left out of the fit; if fewer than two remain the result is
/// vacuous.
pub fn tangent_slope(
    delta: impl Fn(f64, &SchwartzFn) -> Result<Residual>,
    f: &SchwartzFn,
    norm: NormSelector,
    t_grid: &[f64],
) -> Result<TangentSlopeReport> {
    check_grid(t_grid)?;
    let residual_norms = t_grid
        .iter()
        .map(|&t| delta(t, f).map(|r| r.measure(norm)))
        .collect::<Result<Vec<_>>>()?;
    Ok(classify(t_grid.to_vec(), residual_norms, TANGENT_SLOPE))
}

/// Builds a report from precomputed residual norms with a slope threshold.
pub fn classify(
    t_values: Vec<f64>,
    residual_norms: Vec<f64>,
    threshold: f64,
) -> TangentSlopeReport {
    let (xs, ys): (Vec<f64>, Vec<f64>) = t_values
        .iter()
        .zip(&residual_norms)
        .filter(|(_, &r)| r > UNDERFLOW)
        .map(|(&t, &r)| (t, r))
        .unzip();
    let (fitted_slope, verdict) = if xs.len() < 2 {
        (f64::NAN, TangentVerdict::Vacuous)
    } else {
        let s = loglog_slope(&xs, &ys);
        let v = if s >= threshold {
            TangentVerdict::Tangent
        } else {
            TangentVerdict::NotTangent
        };
        (s, v)
    };
    TangentSlopeReport {
        t_values,
        residual_norms,
        fitted_slope,
        verdict,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> SchwartzFn {
        SchwartzFn::basis(&[1], 2)
    }

    #[test]
    fn zero_map_is_vacuous() {
        let grid = geometric_grid(1e-1, 1e-3, 5);
        let r = tangent_slope(
            |_, f| Ok(Residual::Function(f.scale_real(0.0))),
            &unit(),
            NormSelector::L2,
            &grid,
        )
        .unwrap();
        assert_eq!(r.verdict, TangentVerdict::Vacuous);
        assert!(r.passed());
    }

    #[test]
    fn linear_map_is_rejected() {
        let grid = geometric_grid(1e-1, 1e-3, 5);
        let r = tangent_slope(
            |t, f| Ok(Residual::Function(f.scale_real(t))),
            &unit(),
            NormSelector::L2,
            &grid,
        )
        .unwrap();
        assert!((r.fitted_slope - 1.0).abs() < 1e-12);
        assert_eq!(r.verdict, TangentVerdict::NotTangent);
    }

    #[test]
    fn quadratic_map_is_tangent() {
        let grid = geometric_grid(1e-1, 1e-3, 5);
        let r = tangent_slope(
            |t, _| Ok(Residual::Vector(vec![3.0 * t * t, t * t * t])),
            &unit(),
            NormSelector::Nuclear(1),
            &grid,
        )
        .unwrap();
        assert!(r.fitted_slope > 1.95);
        assert_eq!(r.verdict, TangentVerdict::Tangent);
    }

    #[test]
    fn rejects_short_or_unsorted_grids() {
        let f = unit();
        let zero = |_: f64, g: &SchwartzFn| Ok(Residual::Function(g.clone()));
        assert!(tangent_slope(zero, &f, NormSelector::L2, &[0.1, 0.01, 0.001]).is_err());
        assert!(tangent_slope(zero, &f, NormSelector::L2, &[0.1, 0.05, 0.02, 0.01]).is_err());
        assert!(tangent_slope(zero, &f, NormSelector::L2, &[0.001, 0.01, 0.1, 1.0]).is_err());
        assert!(tangent_slope(zero, &f, NormSelector::L2, &[1.0, 0.1, 0.01, 0.001]).is_ok());
    }

    #[test]
    fn product_norm_takes_max() {
        let r = Residual::Product(vec![3.0, 4.0], SchwartzFn::basis(&[0], 0));
        assert_eq!(r.measure(NormSelector::Product), 5.0);
    }
}
