//! Gauss–Legendre rules and a product rule for averages over the unit sphere.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use crate::{Error, Result};

/// Nodes and weights of an `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Roots of `P_n` by Newton iteration from the Chebyshev-like initial guess.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::input("a quadrature rule needs at least one node"));
        }
        let mut nodes = alloc::vec![0.0; n];
        let mut weights = alloc::vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = libm::cos(PI * (i as f64 + 0.75) / (nf + 0.5));
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Ok(Self { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// One node of a sphere rule: `u = cos θ`, azimuth `phi` and a weight for `dΩ/4π`.
#[derive(Clone, Copy, Debug)]
pub struct SphereNode {
    pub cos_theta: f64,
    pub phi: f64,
    pub weight: f64,
}

/// Gauss–Legendre in `cos θ` crossed with `n_phi` equally spaced azimuths.
/// Weights sum to one, so the rule computes sphere averages.
pub fn sphere_rule(n_theta: usize, n_phi: usize) -> Result<Vec<SphereNode>> {
    if n_phi == 0 {
        return Err(Error::input("need at least one azimuthal node"));
    }
    let gl = GaussLegendre::new(n_theta)?;
    let mut rule = Vec::with_capacity(n_theta * n_phi);
    for (&u, &w) in gl.nodes.iter().zip(&gl.weights) {
        for k in 0..n_phi {
            rule.push(SphereNode {
                cos_theta: u,
                phi: TAU * k as f64 / n_phi as f64,
                weight: w / (2.0 * n_phi as f64),
            });
        }
    }
    Ok(rule)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_polynomials_up_to_degree_2n_minus_1() {
        let gl = GaussLegendre::new(5).unwrap();
        for d in 0..10 {
            let exact = if d % 2 == 1 { 0.0 } else { 2.0 / (d as f64 + 1.0) };
            let got = gl.integrate(|x| libm::pow(x, d as f64));
            assert!((got - exact).abs() < 1e-14, "degree {d}");
        }
    }

    #[test]
    fn known_two_point_rule() {
        let gl = GaussLegendre::new(2).unwrap();
        let x = 1.0 / libm::sqrt(3.0);
        assert!((gl.nodes[0] + x).abs() < 1e-15 && (gl.nodes[1] - x).abs() < 1e-15);
        assert!((gl.weights[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn large_rule_weights_sum_to_two() {
        for n in [1, 32, 64, 97] {
            let gl = GaussLegendre::new(n).unwrap();
            assert!((gl.weights.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            assert!(gl.nodes.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn sphere_average_of_cos_squared() {
        let rule = sphere_rule(8, 8).unwrap();
        let total: f64 = rule.iter().map(|n| n.weight).sum();
        assert!((total - 1.0).abs() < 1e-14);
        let avg: f64 = rule.iter().map(|n| n.weight * n.cos_theta * n.cos_theta).sum();
        assert!((avg - 1.0 / 3.0).abs() < 1e-14);
        let avg: f64 = rule
            .iter()
            .map(|n| n.weight * (1.0 - n.cos_theta * n.cos_theta) * libm::cos(n.phi).powi(2))
            .sum();
        assert!((avg - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn empty_rules_rejected() {
        assert!(GaussLegendre::new(0).is_err());
        assert!(sphere_rule(4, 0).is_err());
    }
}
