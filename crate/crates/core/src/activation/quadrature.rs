//! Gaussian expectations `E[g(Z)]`, `Z ~ N(0, 1)`.
//!
//! Node sets come from the Golub–Welsch eigen-solve of the Jacobi matrix.
//! The default rule splits the real line at the integrand's kinks and at unit
//! spacing, and applies Gauss–Legendre on every cell against the Gaussian
//! density; a plain Gauss–Hermite rule is also available.

use std::sync::OnceLock;

use nalgebra::{DMatrix, SymmetricEigen};

/// Nodes and weights of a Gauss rule.
#[derive(Clone, Debug)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

fn golub_welsch(off_diag: &[f64], mass: f64) -> GaussRule {
    let n = off_diag.len() + 1;
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for (i, &b) in off_diag.iter().enumerate() {
        jacobi[(i, i + 1)] = b;
        jacobi[(i + 1, i)] = b;
    }
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mass * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // symmetrize: both weight functions are even
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let x = 0.5 * (pairs[j].0 - pairs[i].0);
        let w = 0.5 * (pairs[i].1 + pairs[j].1);
        pairs[i] = (-x, w);
        pairs[j] = (x, w);
    }
    if n % 2 == 1 {
        pairs[n / 2].0 = 0.0;
    }
    GaussRule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

/// Gauss–Legendre on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> GaussRule {
    assert!(n >= 1);
    let off: Vec<f64> = (1..n)
        .map(|k| {
            let k = k as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        })
        .collect();
    golub_welsch(&off, 2.0)
}

/// Probabilists' Gauss–Hermite: weights sum to one against `N(0, 1)`.
pub fn gauss_hermite(n: usize) -> GaussRule {
    assert!(n >= 1);
    let off: Vec<f64> = (1..n).map(|k| (k as f64).sqrt()).collect();
    golub_welsch(&off, 1.0)
}

#[derive(Clone, Debug)]
enum Rule {
    Split {
        cell: GaussRule,
        half_width: f64,
    },
    Hermite(GaussRule),
}

/// Computes Gaussian expectations of piecewise-smooth integrands.
#[derive(Clone, Debug)]
pub struct GaussianIntegrator {
    rule: Rule,
}

const DEFAULT_CELL_NODES: usize = 20;
/// The standard normal density underflows beyond this.
const DEFAULT_HALF_WIDTH: f64 = 38.0;
pub const DEFAULT_HERMITE_NODES: usize = 200;

impl Default for GaussianIntegrator {
    fn default() -> Self {
        static DEFAULT: OnceLock<GaussianIntegrator> = OnceLock::new();
        DEFAULT
            .get_or_init(|| GaussianIntegrator::split(DEFAULT_CELL_NODES))
            .clone()
    }
}

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

impl GaussianIntegrator {
    /// Kink-aware composite rule with `cell_nodes` Gauss–Legendre nodes per cell.
    pub fn split(cell_nodes: usize) -> Self {
        GaussianIntegrator {
            rule: Rule::Split {
                cell: gauss_legendre(cell_nodes),
                half_width: DEFAULT_HALF_WIDTH,
            },
        }
    }

    /// Plain Gauss–Hermite with `nodes` nodes; ignores kinks.
    pub fn hermite(nodes: usize) -> Self {
        GaussianIntegrator {
            rule: Rule::Hermite(gauss_hermite(nodes)),
        }
    }

    /// Visits `(z, weight)` pairs with `Σ weight·g(z) ≈ E[g(Z)]`.
    fn for_each_node(&self, kinks: &[f64], mut visit: impl FnMut(f64, f64)) {
        match &self.rule {
            Rule::Hermite(r) => {
                for (&z, &w) in r.nodes.iter().zip(&r.weights) {
                    visit(z, w);
                }
            }
            Rule::Split { cell, half_width } => {
                let l = *half_width;
                let mut cuts: Vec<f64> = (-(l as i64)..=(l as i64)).map(|i| i as f64).collect();
                cuts.extend(kinks.iter().copied().filter(|k| k.abs() < l));
                cuts.sort_by(f64::total_cmp);
                cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
                for pair in cuts.windows(2) {
                    let (a, b) = (pair[0], pair[1]);
                    let half = 0.5 * (b - a);
                    let mid = 0.5 * (a + b);
                    for (&t, &w) in cell.nodes.iter().zip(&cell.weights) {
                        let z = mid + half * t;
                        let dens = INV_SQRT_2PI * (-0.5 * z * z).exp();
                        visit(z, w * half * dens);
                    }
                }
            }
        }
    }

    /// `E[g(Z)]` where `g` may have kinks or jumps at the points `kinks`.
    pub fn expect(&self, kinks: &[f64], g: impl Fn(f64) -> f64) -> f64 {
        let mut acc = 0.0;
        self.for_each_node(kinks, |z, w| acc += w * g(z));
        acc
    }

    /// Vector-valued `E[g(Z)]`; `g` writes its `len` components into the buffer.
    pub fn expect_vec(&self, kinks: &[f64], len: usize, g: impl Fn(f64, &mut [f64])) -> Vec<f64> {
        let mut acc = vec![0.0; len];
        let mut buf = vec![0.0; len];
        self.for_each_node(kinks, |z, w| {
            g(z, &mut buf);
            for (a, b) in acc.iter_mut().zip(&buf) {
                *a += w * b;
            }
        });
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials() {
        let r = gauss_legendre(10);
        let s: f64 = r.weights.iter().sum();
        assert!((s - 2.0).abs() < 1e-13);
        let x18: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(18)).sum();
        assert!((x18 - 2.0 / 19.0).abs() < 1e-13);
    }

    #[test]
    fn hermite_moments() {
        let r = gauss_hermite(DEFAULT_HERMITE_NODES);
        let m = |p: i32| -> f64 { r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(p)).sum() };
        assert!((m(0) - 1.0).abs() < 1e-12);
        assert!((m(2) - 1.0).abs() < 1e-12);
        assert!((m(4) - 3.0).abs() < 1e-11);
        assert!(m(3).abs() < 1e-12);
    }

    #[test]
    fn split_rule_handles_kinks() {
        let q = GaussianIntegrator::default();
        // E[max(Z, 0)] = 1/sqrt(2π)
        let relu = q.expect(&[0.0], |z| z.max(0.0));
        assert!((relu - INV_SQRT_2PI).abs() < 1e-14);
        // E[1{Z > 0.3}] = 1 - Φ(0.3)
        let tail = q.expect(&[0.3], |z| if z > 0.3 { 1.0 } else { 0.0 });
        assert!((tail - 0.382_088_577_811_047_4).abs() < 1e-13);
    }

    #[test]
    fn plain_hermite_is_inaccurate_at_a_kink() {
        let q = GaussianIntegrator::hermite(DEFAULT_HERMITE_NODES);
        // E[relu(Z) He_2(Z)] = φ(0); plain Gauss–Hermite misses by ~1e-3
        let v = q.expect(&[], |z| z.max(0.0) * (z * z - 1.0));
        assert!((v - INV_SQRT_2PI).abs() > 1e-5);
    }
}
