//! Numerical tolerances and the truncation context shared by the
//! expectation, translation, bundle and atlas layers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Named tolerances. Every field is overridable by name from the CLI
/// (`--tol.<name>=<value>`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// L2 norm at or below which a function counts as the zero function.
    pub nonzero: f64,
    /// Largest admissible fraction of L2 mass lost when truncating the
    /// Gaussian section.
    pub section: f64,
    /// Band around zero expectation accepted as membership in the fiber.
    pub fiber: f64,
    /// Largest admissible translation defect for an accepted plan.
    pub translation: f64,
    /// Round-trip tolerance for charts and transitions.
    pub chart: f64,
    /// Tolerance when comparing manifold points.
    pub point: f64,
    /// Default infinity-norm tolerance for indistinguishability.
    pub indistinguishable: f64,
    /// Margin added to the classical turning point when sizing grids.
    pub grid_margin: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            nonzero: 1e-12,
            section: 1e-13,
            fiber: 1e-9,
            translation: 1e-9,
            chart: 1e-8,
            point: 1e-9,
            indistinguishable: 1e-9,
            grid_margin: 4.0,
        }
    }
}

impl Tolerances {
    pub const NAMES: [&'static str; 8] = [
        "nonzero",
        "section",
        "fiber",
        "translation",
        "chart",
        "point",
        "indistinguishable",
        "grid_margin",
    ];

    /// Overrides one tolerance by name. Values must be finite and positive.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::Precondition(format!(
                "tolerance `{name}` must be positive and finite, got {value}"
            )));
        }
        let slot = match name {
            "nonzero" => &mut self.nonzero,
            "section" => &mut self.section,
            "fiber" => &mut self.fiber,
            "translation" => &mut self.translation,
            "chart" => &mut self.chart,
            "point" => &mut self.point,
            "indistinguishable" => &mut self.indistinguishable,
            "grid_margin" => &mut self.grid_margin,
            _ => {
                return Err(Error::Precondition(format!(
                    "unknown tolerance `{name}` (known: {})",
                    Self::NAMES.join(", ")
                )))
            }
        };
        *slot = value;
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        Some(match name {
            "nonzero" => self.nonzero,
            "section" => self.section,
            "fiber" => self.fiber,
            "translation" => self.translation,
            "chart" => self.chart,
            "point" => self.point,
            "indistinguishable" => self.indistinguishable,
            "grid_margin" => self.grid_margin,
            _ => return None,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let mut copy = *self;
        for name in Self::NAMES {
            copy.set(name, self.get(name).unwrap_or(f64::NAN))?;
        }
        Ok(())
    }
}

/// Truncation context: tolerances plus the translation limits.
///
/// Plain data; cloning is cheap and instances are shared freely across
/// threads.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpace {
    pub tol: Tolerances,
    /// Largest padded degree a translation plan may use.
    pub max_degree: usize,
    /// Largest shift |x| accepted by chart maps.
    pub max_shift: f64,
}

impl ModelSpace {
    /// Context for functions of nominal degree `degree`: plans may pad up
    /// to four times that degree and shifts are capped at |x| <= 2.
    pub fn for_degree(degree: usize) -> Self {
        ModelSpace {
            tol: Tolerances::default(),
            max_degree: 4 * degree.max(1),
            max_shift: 2.0,
        }
    }

    pub fn with_tolerances(mut self, tol: Tolerances) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_degree(mut self, max_degree: usize) -> Self {
        self.max_degree = max_degree;
        self
    }
}

impl Default for ModelSpace {
    fn default() -> Self {
        ModelSpace::for_degree(32)
    }
}
