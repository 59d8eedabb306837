//! Gauss–Hermite rules for integrals of the form `∫ e^{-x²} f(x) dx`.
//!
//! Nodes come from the Golub–Welsch eigenproblem on the symmetric Jacobi
//! matrix of the Hermite recurrence (zero diagonal, `sqrt(k/2)` off the
//! diagonal). Each node is then polished with a couple of Newton steps on the
//! orthonormal Hermite recurrence, and weights are taken from the Christoffel
//! function `1 / sum_k p_k(x)²`, which stays accurate for the tiny weights in
//! the tails where the eigenvector route loses relative precision.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Nodes, weights and order of a Gauss–Hermite rule.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    order: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    // standard-normal form: E[f(Z)] ≈ Σ probs_k f(std_nodes_k)
    std_nodes: Vec<f64>,
    probs: Vec<f64>,
}

/// Orthonormal Hermite values `(p_{n-1}(x), p_n(x), Σ_{k<n} p_k(x)²)`.
fn orthonormal_hermite(n: usize, x: f64) -> (f64, f64, f64) {
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25);
    let mut christoffel = 0.0;
    for k in 0..n {
        christoffel += cur * cur;
        let next = x * (2.0 / (k as f64 + 1.0)).sqrt() * cur
            - (k as f64 / (k as f64 + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    (prev, cur, christoffel)
}

impl QuadratureRule {
    /// Builds the `order`-point rule. Exact for polynomials of degree `2 order - 1`.
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidConfig("quadrature order must be >= 1".into()));
        }
        let mut jacobi = DMatrix::<f64>::zeros(order, order);
        for k in 1..order {
            let off = (k as f64 / 2.0).sqrt();
            jacobi[(k - 1, k)] = off;
            jacobi[(k, k - 1)] = off;
        }
        let eigen = jacobi.symmetric_eigen();
        let mut nodes: Vec<f64> = eigen.eigenvalues.iter().copied().collect();
        nodes.sort_by(|a, b| a.total_cmp(b));

        let n = order;
        let mut weights = Vec::with_capacity(n);
        for x in nodes.iter_mut() {
            for _ in 0..2 {
                let (pm1, pn, _) = orthonormal_hermite(n, *x);
                let deriv = (2.0 * n as f64).sqrt() * pm1;
                if deriv != 0.0 {
                    *x -= pn / deriv;
                }
            }
            let (_, _, christoffel) = orthonormal_hermite(n, *x);
            weights.push(1.0 / christoffel);
        }
        // the rule is symmetric; enforce it exactly
        for i in 0..n / 2 {
            let j = n - 1 - i;
            let x = 0.5 * (nodes[j] - nodes[i]);
            nodes[i] = -x;
            nodes[j] = x;
            let w = 0.5 * (weights[i] + weights[j]);
            weights[i] = w;
            weights[j] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }

        let std_nodes = nodes.iter().map(|x| std::f64::consts::SQRT_2 * x).collect();
        let total: f64 = weights.iter().sum();
        let probs = weights.iter().map(|w| w / total).collect();
        Ok(Self {
            order,
            nodes,
            weights,
            std_nodes,
            probs,
        })
    }

    /// Shared rule of the given order, computed once per process.
    pub fn gauss_hermite(order: usize) -> Result<Arc<Self>> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<QuadratureRule>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(rule) = cache.lock().expect("quadrature cache poisoned").get(&order) {
            return Ok(rule.clone());
        }
        let rule = Arc::new(Self::new(order)?);
        cache
            .lock()
            .expect("quadrature cache poisoned")
            .insert(order, rule.clone());
        Ok(rule)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Nodes for the weight `e^{-x²}`, ascending.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Weights for the weight `e^{-x²}`; they sum to `sqrt(pi)`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes rescaled for a standard normal variable (`sqrt(2) x_k`).
    pub fn standard_nodes(&self) -> &[f64] {
        &self.std_nodes
    }

    /// Weights normalized to sum to one.
    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    /// `∫ e^{-x²} f(x) dx`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(*x))
            .sum()
    }
}
