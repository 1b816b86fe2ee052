//! Gauss–Hermite quadrature for the weight `e^{−x²}` (Golub–Welsch).

use nalgebra::{DMatrix, SymmetricEigen};

/// Nodes and weights of an `m`-point rule, exact for polynomials of degree
/// `2m − 1` against `e^{−x²}`.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    pub fn new(points: usize) -> Self {
        assert!(points > 0, "quadrature needs at least one node");
        // Jacobi matrix of the physicists' Hermite recurrence.
        let jacobi = DMatrix::from_fn(points, points, |i, j| {
            if i + 1 == j || j + 1 == i {
                (i.max(j) as f64 / 2.0).sqrt()
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(jacobi);
        let mu0 = std::f64::consts::PI.sqrt();
        let mut pairs: Vec<(f64, f64)> = (0..points)
            .map(|k| {
                let v0 = eig.eigenvectors[(0, k)];
                (eig.eigenvalues[k], mu0 * v0 * v0)
            })
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        // Symmetrize: the rule is exactly symmetric about the origin.
        for i in 0..points / 2 {
            let j = points - 1 - i;
            let x = 0.5 * (pairs[j].0 - pairs[i].0);
            let w = 0.5 * (pairs[i].1 + pairs[j].1);
            pairs[i] = (-x, w);
            pairs[j] = (x, w);
        }
        if points % 2 == 1 {
            pairs[points / 2].0 = 0.0;
        }
        GaussHermite {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1).collect(),
        }
    }

    /// `∫ e^{−x²} g(x) dx`.
    pub fn integrate(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * g(x))
            .sum()
    }
}
