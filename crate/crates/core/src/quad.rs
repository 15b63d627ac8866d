//! Quadrature rules: Gauss-Hermite and Gauss-Legendre via Golub-Welsch,
//! composite panel rules, and the node/weight bundles used by assembly.
//!
//! Rule weights always incorporate the Riemannian volume density only,
//! never the measure weight e^{+-f}; weighted integrals reintroduce the
//! density explicitly so that truncation behaviour stays visible.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Nodes and weights of an n-point rule for int e^{-x^2} f(x) dx,
/// exact for polynomials of degree 2n-1.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    // Jacobi matrix: alpha_k = 0, beta_k = k/2
    let mut j = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = (k as f64 / 2.0).sqrt();
        j[(k - 1, k)] = b;
        j[(k, k - 1)] = b;
    }
    golub_welsch(j, std::f64::consts::PI.sqrt())
}

/// Nodes and weights of an n-point rule on [-1, 1] with unit weight.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut j = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let kf = k as f64;
        let b = (kf * kf / (4.0 * kf * kf - 1.0)).sqrt();
        j[(k - 1, k)] = b;
        j[(k, k - 1)] = b;
    }
    golub_welsch(j, 2.0)
}

fn golub_welsch(j: DMatrix<f64>, mu0: f64) -> (Vec<f64>, Vec<f64>) {
    let n = j.nrows();
    let eig = j.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    pairs.into_iter().unzip()
}

/// Gauss-Legendre on [a, b].
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    (
        x.iter().map(|t| mid + half * t).collect(),
        w.iter().map(|wi| wi * half).collect(),
    )
}

/// Composite Gauss-Legendre on [a, b]: `panels` panels of `per_panel` nodes.
pub fn composite_legendre(a: f64, b: f64, panels: usize, per_panel: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(panels * per_panel);
    let mut weights = Vec::with_capacity(panels * per_panel);
    let h = (b - a) / panels as f64;
    for p in 0..panels {
        let (x, w) = gauss_legendre_on(per_panel, a + p as f64 * h, a + (p + 1) as f64 * h);
        nodes.extend(x);
        weights.extend(w);
    }
    (nodes, weights)
}

/// Chart the rule's nodes live in.
#[derive(Debug, Clone, PartialEq)]
pub enum Chart {
    /// Cartesian coordinates on (a truncation of) R^n.
    Euclidean { dim: usize },
    /// Latitude-longitude (theta, phi) on the 2-sphere of the given radius.
    Sphere { radius: f64 },
    /// Real coordinates (x_1, y_1, ..., x_n, y_n) identifying C^n with R^{2n}.
    ComplexEuclidean { dim_c: usize },
    /// (theta, phi) chart on CP^1 with an S^1-invariant metric.
    LatitudeLongitude,
}

/// Quadrature nodes with Lebesgue/Riemannian-volume weights.
///
/// `axes` keeps the 1-D sub-rules the full rule was built from (chart
/// order); assembly routines use them to integrate factorized weak forms
/// without re-deriving nodes. Axis weight conventions are chart-specific
/// and documented at the construction sites.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub chart: Chart,
    pub axes: Vec<(Vec<f64>, Vec<f64>)>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integral of a plain function against the volume density.
    pub fn integrate<F: FnMut(&[f64]) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(x))
            .sum()
    }

    /// Tensor product of 1-D rules (deterministic row-major node order).
    pub fn tensor(axes: &[(Vec<f64>, Vec<f64>)], chart: Chart) -> Self {
        let mut nodes: Vec<Vec<f64>> = vec![vec![]];
        let mut weights: Vec<f64> = vec![1.0];
        for (xs, ws) in axes {
            let mut next_nodes = Vec::with_capacity(nodes.len() * xs.len());
            let mut next_weights = Vec::with_capacity(nodes.len() * xs.len());
            for (node, w) in nodes.iter().zip(&weights) {
                for (x, wx) in xs.iter().zip(ws) {
                    let mut n = node.clone();
                    n.push(*x);
                    next_nodes.push(n);
                    next_weights.push(w * wx);
                }
            }
            nodes = next_nodes;
            weights = next_weights;
        }
        let rule = QuadratureRule { nodes, weights, chart, axes: axes.to_vec() };
        debug_assert!(rule.weights.iter().all(|w| *w > 0.0));
        rule
    }

    /// Largest Euclidean node radius; used for truncation-tail estimates.
    pub fn max_radius(&self) -> f64 {
        self.nodes
            .iter()
            .map(|x| x.iter().map(|c| c * c).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    pub fn require_positive_weights(&self) -> Result<()> {
        if self.weights.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::ParameterOutOfRange(
                "quadrature rule has nonpositive weights".into(),
            ));
        }
        Ok(())
    }
}

/// Gauss-Hermite rule for the Gaussian weight e^{-lambda x^2 / 2},
/// returned with Lebesgue weights (the Gaussian factor divided back out).
pub fn hermite_lebesgue(n: usize, lambda: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_hermite(n);
    let scale = (2.0 / lambda).sqrt();
    let nodes: Vec<f64> = x.iter().map(|t| t * scale).collect();
    let weights: Vec<f64> = x
        .iter()
        .zip(&w)
        .map(|(t, wi)| wi * (t * t).exp() * scale)
        .collect();
    (nodes, weights)
}
