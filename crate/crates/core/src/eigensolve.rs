//! Generalized Hermitian eigensolves: dense Cholesky reduction by
//! default, a structured path exploiting Kronecker sums, and a seeded
//! shift-invert Lanczos path, all required to agree.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operators::{self, AssembledOperator, Matrices};
use crate::quad::QuadratureRule;
use crate::spaces::{Convention, ModelSpace, SpaceKind};

pub const DEFAULT_CLUSTER_TOL: f64 = 1e-6;
pub const BOUND_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct Cluster {
    pub value: f64,
    pub multiplicity: usize,
    pub members: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct SpectrumResult {
    /// Ascending generalized eigenvalues.
    pub eigenvalues: Vec<f64>,
    pub clusters: Vec<Cluster>,
    /// Gram-orthonormal coefficient vectors.
    pub eigenvectors: Vec<DVector<f64>>,
    /// Per-pair |A v - lambda M v| / |v|_M.
    pub residuals: Vec<f64>,
    pub cluster_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverPath {
    Auto,
    Dense,
    Structured,
    Iterative,
}

fn cluster_eigenvalues(eigenvalues: &[f64], cluster_tol: f64) -> Vec<Cluster> {
    let mut clusters: Vec<Cluster> = Vec::new();
    for (i, &lam) in eigenvalues.iter().enumerate() {
        match clusters.last_mut() {
            Some(c) if lam - eigenvalues[*c.members.last().unwrap()] <= cluster_tol * lam.max(1.0) => {
                c.members.push(i);
                c.multiplicity += 1;
            }
            _ => clusters.push(Cluster { value: lam, multiplicity: 1, members: vec![i] }),
        }
    }
    clusters
}

/// The `count` smallest generalized eigenpairs of (A, M).
pub fn spectrum(op: &AssembledOperator, count: usize, tol: f64) -> Result<SpectrumResult> {
    spectrum_via(op, count, tol, SolverPath::Auto, 0xC0FFEE)
}

pub fn spectrum_via(
    op: &AssembledOperator,
    count: usize,
    tol: f64,
    path: SolverPath,
    seed: u64,
) -> Result<SpectrumResult> {
    if count == 0 {
        return Ok(SpectrumResult {
            eigenvalues: vec![],
            clusters: vec![],
            eigenvectors: vec![],
            residuals: vec![],
            cluster_tol: DEFAULT_CLUSTER_TOL,
        });
    }
    if count > op.cardinality() {
        return Err(Error::Unsupported(format!(
            "requested {count} eigenpairs from a basis of cardinality {}",
            op.cardinality()
        )));
    }
    let path = match (path, &op.matrices) {
        (SolverPath::Auto, Matrices::KroneckerSum { .. }) => SolverPath::Structured,
        (SolverPath::Auto, Matrices::Dense { .. }) => {
            if op.cardinality() <= 2000 {
                SolverPath::Dense
            } else {
                SolverPath::Iterative
            }
        }
        (p, _) => p,
    };
    let (eigenvalues, eigenvectors) = match path {
        SolverPath::Dense | SolverPath::Auto => {
            let (a, m) = op.dense()?;
            dense_pairs(&a, &m, count)?
        }
        SolverPath::Structured => structured_pairs(op, count)?,
        SolverPath::Iterative => iterative_pairs(op, count, tol, seed)?,
    };
    let scale = op.a_norm_estimate(seed ^ 0x9E37_79B9).max(1.0);
    let mut residuals = Vec::with_capacity(count);
    for (lam, v) in eigenvalues.iter().zip(&eigenvectors) {
        let r = op.matvec_a(v) - op.matvec_m(v) * *lam;
        residuals.push(r.norm() / (scale * v.norm().max(1e-300)));
    }
    if residuals.iter().any(|r| !(*r <= tol)) {
        return Err(Error::ConvergenceFailure(format!(
            "residual {:.3e} exceeds tolerance {tol:.3e}",
            residuals.iter().cloned().fold(0.0, f64::max)
        )));
    }
    let clusters = cluster_eigenvalues(&eigenvalues, DEFAULT_CLUSTER_TOL);
    Ok(SpectrumResult {
        eigenvalues,
        clusters,
        eigenvectors,
        residuals,
        cluster_tol: DEFAULT_CLUSTER_TOL,
    })
}

/// Cholesky reduction to a standard symmetric problem.
fn dense_pairs(
    a: &DMatrix<f64>,
    m: &DMatrix<f64>,
    count: usize,
) -> Result<(Vec<f64>, Vec<DVector<f64>>)> {
    let chol = m.clone().cholesky().ok_or(Error::GramNotPD)?;
    let l = chol.l();
    let x = l
        .solve_lower_triangular(a)
        .ok_or_else(|| Error::ConvergenceFailure("singular Cholesky factor".into()))?;
    let mut b = l
        .solve_lower_triangular(&x.transpose())
        .ok_or_else(|| Error::ConvergenceFailure("singular Cholesky factor".into()))?;
    // symmetrize round-off before the symmetric solver
    let bt = b.transpose();
    b = (b + bt) * 0.5;
    let eig = b.clone().symmetric_eigen();
    // Rayleigh quotients: the eigenvector matrix is reliably orthogonal,
    // but the reported eigenvalues can be paired with the wrong columns
    // when large degenerate clusters are present.
    let values_raw: Vec<f64> = (0..eig.eigenvalues.len())
        .map(|i| {
            let y = eig.eigenvectors.column(i);
            y.dot(&(&b * y))
        })
        .collect();
    let mut order: Vec<usize> = (0..values_raw.len()).collect();
    order.sort_by(|&i, &j| values_raw[i].partial_cmp(&values_raw[j]).unwrap());
    let lt = l.transpose();
    let mut values = Vec::with_capacity(count);
    let mut vectors = Vec::with_capacity(count);
    for &i in order.iter().take(count) {
        values.push(values_raw[i]);
        let y = eig.eigenvectors.column(i).into_owned();
        let v = lt
            .solve_upper_triangular(&y)
            .ok_or_else(|| Error::ConvergenceFailure("singular Cholesky factor".into()))?;
        vectors.push(v);
    }
    Ok((values, vectors))
}

/// Kronecker-sum path: solve each factor problem densely and combine
/// eigenvalue sums / eigenvector tensor products.
fn structured_pairs(op: &AssembledOperator, count: usize) -> Result<(Vec<f64>, Vec<DVector<f64>>)> {
    let factors = match &op.matrices {
        Matrices::KroneckerSum { factors } => factors,
        Matrices::Dense { a, m } => return dense_pairs(a, m, count),
    };
    let mut fac_vals: Vec<Vec<f64>> = Vec::new();
    let mut fac_vecs: Vec<Vec<DVector<f64>>> = Vec::new();
    for (a, m) in factors {
        let (v, w) = dense_pairs(a, m, a.nrows())?;
        fac_vals.push(v);
        fac_vecs.push(w);
    }
    let sizes: Vec<usize> = fac_vals.iter().map(|v| v.len()).collect();
    let total: usize = sizes.iter().product();
    let mut sums: Vec<(f64, usize)> = Vec::with_capacity(total);
    for flat in 0..total {
        let mut rem = flat;
        let mut s = 0.0;
        for i in (0..sizes.len()).rev() {
            s += fac_vals[i][rem % sizes[i]];
            rem /= sizes[i];
        }
        sums.push((s, flat));
    }
    sums.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let mut values = Vec::with_capacity(count);
    let mut vectors = Vec::with_capacity(count);
    for &(s, flat) in sums.iter().take(count) {
        values.push(s);
        // tensor product of the factor eigenvectors, factor 0 slowest
        let mut multi = vec![0usize; sizes.len()];
        let mut rem = flat;
        for i in (0..sizes.len()).rev() {
            multi[i] = rem % sizes[i];
            rem /= sizes[i];
        }
        let mut v = vec![1.0f64];
        for (i, &col) in multi.iter().enumerate() {
            let f = &fac_vecs[i][col];
            let mut next = vec![0.0; v.len() * f.len()];
            for (p, vp) in v.iter().enumerate() {
                for (q, fq) in f.iter().enumerate() {
                    next[p * f.len() + q] = vp * fq;
                }
            }
            v = next;
        }
        vectors.push(DVector::from_vec(v));
    }
    Ok((values, vectors))
}

/// Shift-invert Lanczos in the M-inner product with full
/// reorthogonalization and a seeded start vector.
fn iterative_pairs(
    op: &AssembledOperator,
    count: usize,
    tol: f64,
    seed: u64,
) -> Result<(Vec<f64>, Vec<DVector<f64>>)> {
    let n = op.cardinality();
    let (a, m) = op.dense()?;
    let sigma = -0.5;
    let shifted = &a - &m * sigma;
    let lu = shifted.lu();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let steps = n.min((2 * count + 30).max(40));

    let m_dot = |x: &DVector<f64>, y: &DVector<f64>| x.dot(&(&m * y));
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(steps);
    let mut alphas = Vec::new();
    let mut betas = Vec::new();
    let mut v = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
    let nv = m_dot(&v, &v).sqrt();
    v /= nv;
    for j in 0..steps {
        // w = (A - sigma M)^{-1} M v_j
        let mut w = lu
            .solve(&(&m * &v))
            .ok_or_else(|| Error::ConvergenceFailure("shifted solve failed".into()))?;
        let alpha = m_dot(&w, &v);
        w -= &v * alpha;
        if let Some(prev) = basis.last() {
            w -= prev * *betas.last().unwrap();
        }
        basis.push(v.clone());
        // full reorthogonalization keeps the Ritz values clean
        for b in &basis {
            let c = m_dot(&w, b);
            w -= b * c;
        }
        alphas.push(alpha);
        let beta = m_dot(&w, &w).sqrt();
        if j + 1 < steps {
            if beta < 1e-14 {
                break;
            }
            betas.push(beta);
            v = w / beta;
        }
    }
    let k = alphas.len();
    if k < count {
        return Err(Error::ConvergenceFailure(format!(
            "Lanczos space of dimension {k} cannot deliver {count} pairs"
        )));
    }
    let mut t = DMatrix::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alphas[i];
        if i + 1 < k {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let eig = t.clone().symmetric_eigen();
    let thetas: Vec<f64> = (0..k)
        .map(|i| {
            let y = eig.eigenvectors.column(i);
            y.dot(&(&t * y))
        })
        .collect();
    // largest theta <-> eigenvalue closest to sigma from above
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| thetas[j].partial_cmp(&thetas[i]).unwrap());
    let mut values = Vec::with_capacity(count);
    let mut vectors = Vec::with_capacity(count);
    for &i in order.iter().take(count) {
        let theta = thetas[i];
        if theta.abs() < 1e-300 {
            return Err(Error::ConvergenceFailure("zero Ritz value in shift-invert".into()));
        }
        values.push(sigma + 1.0 / theta);
        let y = eig.eigenvectors.column(i);
        let mut x = DVector::zeros(n);
        for (b, yb) in basis.iter().zip(y.iter()) {
            x += b * *yb;
        }
        let nx = m_dot(&x, &x).sqrt();
        vectors.push(x / nx);
    }
    // ascending
    let mut order: Vec<usize> = (0..count).collect();
    order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap());
    let values_s: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let vectors_s: Vec<DVector<f64>> = order.iter().map(|&i| vectors[i].clone()).collect();
    // sanity check before returning: the caller re-verifies residuals
    let max_res = values_s
        .iter()
        .zip(&vectors_s)
        .map(|(lam, v)| (op.matvec_a(v) - op.matvec_m(v) * *lam).norm())
        .fold(0.0f64, f64::max);
    if !(max_res.is_finite() && max_res < tol.max(1e-6) * 1e3) {
        return Err(Error::ConvergenceFailure(format!(
            "Lanczos residual {max_res:.3e} did not converge"
        )));
    }
    Ok((values_s, vectors_s))
}

/// Representative value and multiplicity of the first cluster above
/// `zero_tol`.
pub fn first_nonzero(result: &SpectrumResult, zero_tol: f64) -> Result<(f64, usize)> {
    result
        .clusters
        .iter()
        .find(|c| c.value > zero_tol)
        .map(|c| (c.value, c.multiplicity))
        .ok_or(Error::AllZero)
}

/// Default zero threshold: 1e-8 times the computed spectral radius.
pub fn default_zero_tol(result: &SpectrumResult) -> f64 {
    let radius = result.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    1e-8 * radius.max(1.0)
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub lambda1: f64,
    pub multiplicity: usize,
    pub bound: f64,
    pub slack: f64,
    pub pass: bool,
}

/// PASS iff lambda_1 >= bound - slack, with the declared Bakry-Emery
/// bound (real convention) or the Fano bound 1 (complex convention).
pub fn check_lower_bound(result: &SpectrumResult, space: &ModelSpace) -> Result<BoundReport> {
    let bound = match (space.ric_f_lower_bound, space.weight_sign_convention) {
        (Some(b), _) => b,
        (None, Convention::Complex) => 1.0,
        (None, Convention::Real) => {
            return Err(Error::Unsupported(
                "no declared lower bound for this real-convention space".into(),
            ))
        }
    };
    let (lambda1, multiplicity) = first_nonzero(result, default_zero_tol(result))?;
    Ok(BoundReport {
        lambda1,
        multiplicity,
        bound,
        slack: BOUND_SLACK,
        pass: lambda1 >= bound - BOUND_SLACK,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SplitReport {
    /// |Hess u|_{L^2(d-mu)} of the normalized eigenfunction.
    pub hessian_norm: f64,
    /// Correlation with the flat coordinates (projection onto their span)
    /// when the space has flat directions.
    pub correlation: Option<f64>,
}

/// Hessian-norm certificate for the splitting behavior of a first-cluster
/// eigenfunction.
pub fn splitting_certificate(
    op: &AssembledOperator,
    result: &SpectrumResult,
    index: usize,
    rule: &QuadratureRule,
) -> Result<SplitReport> {
    let zero_tol = default_zero_tol(result);
    let first = result
        .clusters
        .iter()
        .find(|c| c.value > zero_tol)
        .ok_or(Error::AllZero)?;
    if !first.members.contains(&index) {
        return Err(Error::NotFirstCluster);
    }
    let v = &result.eigenvectors[index];
    match &op.space.kind {
        SpaceKind::GaussianEuclidean { n, lambda } => {
            let u = operators::eigenvector_polynomial(op, v, 1e-10)?;
            let norm_sq = u.mul(&u).gaussian_integral(*lambda);
            let mut hess_sq = 0.0;
            for i in 0..*n {
                for j in 0..*n {
                    let h = u.deriv(i).deriv(j);
                    hess_sq += h.mul(&h).gaussian_integral(*lambda);
                }
            }
            // projection onto span{x_1..x_n}: coordinates are mutually
            // orthogonal with |x_i|^2 = Z / lambda
            let xi_sq = crate::poly::Polynomial::var(*n, 0)
                .mul(&crate::poly::Polynomial::var(*n, 0))
                .gaussian_integral(*lambda);
            let mut proj_sq = 0.0;
            for i in 0..*n {
                let inner = u.mul(&crate::poly::Polynomial::var(*n, i)).gaussian_integral(*lambda);
                proj_sq += inner * inner / xi_sq;
            }
            Ok(SplitReport {
                hessian_norm: (hess_sq / norm_sq).sqrt(),
                correlation: Some((proj_sq / norm_sq).sqrt().min(1.0)),
            })
        }
        SpaceKind::SphereGaussianProduct { .. } => {
            let u = operators::eigenvector_product(op, v, 1e-10)?;
            let mut norm_sq = 0.0;
            let mut hess_sq = 0.0;
            let mut ut = 0.0;
            let mut tt = 0.0;
            for (node, w) in rule.nodes.iter().zip(&rule.weights) {
                let dens = crate::spaces::weight_density(&op.space, node)?;
                let uv = u.eval(node);
                norm_sq += w * dens * uv * uv;
                hess_sq += w * dens * u.hessian_sq(node);
                ut += w * dens * uv * node[2];
                tt += w * dens * node[2] * node[2];
            }
            Ok(SplitReport {
                hessian_norm: (hess_sq / norm_sq).sqrt(),
                correlation: Some((ut * ut / (tt * norm_sq)).sqrt().min(1.0)),
            })
        }
        SpaceKind::RoundSphere { radius, .. } => {
            let u = operators::eigenvector_sphere_series(op, v)?;
            let mut norm_sq = 0.0;
            let mut hess_sq = 0.0;
            for (node, w) in rule.nodes.iter().zip(&rule.weights) {
                let jet = u.jet(node[0], node[1]);
                norm_sq += w * jet.d[0][0] * jet.d[0][0];
                hess_sq += w * jet.hessian_sq(node[0], *radius);
            }
            Ok(SplitReport { hessian_norm: (hess_sq / norm_sq).sqrt(), correlation: None })
        }
        _ => Err(Error::Unsupported("splitting certificate needs a real-convention space".into())),
    }
}

/// Independent 1-D finite-difference cross-check of the Gaussian spectral
/// gap: symmetric Sturm-Liouville discretization of -Delta_f on a
/// truncated interval with Dirichlet ends, returning the first eigenvalue
/// above 1e-4 (the near-zero constant mode decays with the truncation).
pub fn fd_crosscheck_gaussian_1d(lambda: f64, h: f64) -> f64 {
    let radius = (24.0 * std::f64::consts::LN_10 / lambda).sqrt();
    let n = (2.0 * radius / h).ceil() as usize;
    let xs: Vec<f64> = (1..n).map(|i| -radius + h * i as f64).collect();
    let w_mid = |x: f64| (-lambda * x * x / 2.0).exp();
    let nn = xs.len();
    let mut a = DMatrix::zeros(nn, nn);
    let mut d = DVector::zeros(nn);
    for (i, &x) in xs.iter().enumerate() {
        let wl = w_mid(x - h / 2.0);
        let wr = w_mid(x + h / 2.0);
        a[(i, i)] = (wl + wr) / (h * h);
        if i + 1 < nn {
            a[(i, i + 1)] = -wr / (h * h);
            a[(i + 1, i)] = -wr / (h * h);
        }
        d[i] = w_mid(x);
    }
    // reduce the generalized problem by the diagonal mass matrix
    for i in 0..nn {
        for j in 0..nn {
            a[(i, j)] /= (d[i] * d[j]).sqrt();
        }
    }
    let mut ev: Vec<f64> = a.symmetric_eigen().eigenvalues.iter().cloned().collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
    ev.into_iter().find(|l| *l > 1e-4).unwrap_or(f64::NAN)
}
