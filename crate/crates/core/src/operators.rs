//! Discrete bases and weak-form assembly of -Delta_f / -Delta_F.
//!
//! Matrices represent the *negative* weighted Laplacian: the stiffness
//! matrix is the Dirichlet quadratic form and the gram matrix the weighted
//! L^2 inner product, so generalized eigenvalues are nonnegative and
//! self-adjointness holds by construction. Tensor-product spaces keep a
//! Kronecker-sum representation instead of a materialized matrix.
//!
//! All matrices are stored over f64; for complex-convention spaces the
//! bases are chosen (Fourier modes, monomial pairs) so that every entry of
//! the Hermitian form is real.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{sphere_index, Cp1Mode, SphereSeries};
use crate::identities::IdentityReport;
use crate::poly::{factorial, CPoly, Polynomial};
use crate::quad::QuadratureRule;
use crate::spaces::{Convention, ModelSpace, SpaceKind};
use crate::special;

/// Discrete trial space for the weak form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiscreteBasis {
    /// Tensor products of Hermite functions h_k(sqrt(lambda) x), max
    /// degree per axis.
    HermiteTensor { degree: usize },
    /// Real spherical harmonics up to l_max.
    SphericalHarmonics { lmax: usize },
    /// Sphere harmonics times Hermite factors on the flat directions.
    ProductBasis { lmax: usize, degree: usize },
    /// Fourier modes m = -lmax..lmax with associated-Legendre latitude
    /// profiles, the natural basis for S^1-symmetric metrics on CP^1.
    FourierLatitudeGrid { lmax: usize },
    /// Monomials z^alpha zbar^beta with |alpha|+|beta| <= degree.
    MonomialFock { degree: usize },
}

impl DiscreteBasis {
    /// Parses a basis descriptor, e.g. "hermite:deg=30" or
    /// "fourier:lmax=24".
    pub fn parse(desc: &str) -> Result<Self> {
        let (kind, rest) = desc.split_once(':').unwrap_or((desc, ""));
        let mut deg: Option<usize> = None;
        let mut lmax: Option<usize> = None;
        for part in rest.split(',').filter(|p| !p.is_empty()) {
            let (key, val) = part
                .split_once('=')
                .ok_or_else(|| Error::ParameterOutOfRange(format!("malformed `{part}`")))?;
            let v: usize = val
                .parse()
                .map_err(|_| Error::ParameterOutOfRange(format!("bad value `{val}`")))?;
            match key {
                "deg" => deg = Some(v),
                "lmax" => lmax = Some(v),
                _ => return Err(Error::ParameterOutOfRange(format!("unknown key `{key}`"))),
            }
        }
        let need = |o: Option<usize>, k: &str| {
            o.ok_or_else(|| Error::ParameterOutOfRange(format!("missing `{k}`")))
        };
        match kind {
            "hermite" => Ok(DiscreteBasis::HermiteTensor { degree: need(deg, "deg")? }),
            "harmonics" => Ok(DiscreteBasis::SphericalHarmonics { lmax: need(lmax, "lmax")? }),
            "product" => Ok(DiscreteBasis::ProductBasis {
                lmax: need(lmax, "lmax")?,
                degree: need(deg, "deg")?,
            }),
            "fourier" => Ok(DiscreteBasis::FourierLatitudeGrid { lmax: need(lmax, "lmax")? }),
            "fock" => Ok(DiscreteBasis::MonomialFock { degree: need(deg, "deg")? }),
            other => Err(Error::UnknownKind(format!("basis `{other}`"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DiscreteBasis::HermiteTensor { .. } => "hermite",
            DiscreteBasis::SphericalHarmonics { .. } => "harmonics",
            DiscreteBasis::ProductBasis { .. } => "product",
            DiscreteBasis::FourierLatitudeGrid { .. } => "fourier",
            DiscreteBasis::MonomialFock { .. } => "fock",
        }
    }
}

/// Ordering metadata mapping coefficient indices back to basis functions.
#[derive(Debug, Clone)]
pub enum BasisIndex {
    /// Tensor factors, factor 0 slowest; `sizes[i]` entries per factor.
    Tensor { sizes: Vec<usize> },
    /// `sphere_index(lmax)` order.
    Sphere { lmax: usize },
    /// Sphere index (slow) times Hermite tensor over k flat axes (fast).
    Product { lmax: usize, degree: usize, k: usize },
    /// Monomial pairs (alpha, beta) in graded order.
    Fock { pairs: Vec<(Vec<u32>, Vec<u32>)> },
    /// Fourier blocks (m, offset, len), profiles l = |m|..=lmax.
    Fourier { lmax: usize, blocks: Vec<(i32, usize, usize)> },
}

/// Stiffness/gram pair, dense or Kronecker-sum structured.
#[derive(Debug, Clone)]
pub enum Matrices {
    Dense { a: DMatrix<f64>, m: DMatrix<f64> },
    /// A = sum_j M_1 (x) .. A_j .. (x) M_p, M = M_1 (x) .. (x) M_p.
    KroneckerSum { factors: Vec<(DMatrix<f64>, DMatrix<f64>)> },
}

#[derive(Debug, Clone)]
pub struct AssembledOperator {
    pub space: ModelSpace,
    pub basis: DiscreteBasis,
    pub field: Convention,
    pub matrices: Matrices,
    pub index: BasisIndex,
}

impl AssembledOperator {
    pub fn cardinality(&self) -> usize {
        match &self.matrices {
            Matrices::Dense { m, .. } => m.nrows(),
            Matrices::KroneckerSum { factors } => factors.iter().map(|(_, m)| m.nrows()).product(),
        }
    }

    fn factor_sizes(&self) -> Vec<usize> {
        match &self.matrices {
            Matrices::Dense { m, .. } => vec![m.nrows()],
            Matrices::KroneckerSum { factors } => factors.iter().map(|(_, m)| m.nrows()).collect(),
        }
    }

    /// y = A x.
    pub fn matvec_a(&self, x: &DVector<f64>) -> DVector<f64> {
        match &self.matrices {
            Matrices::Dense { a, .. } => a * x,
            Matrices::KroneckerSum { factors } => {
                let sizes = self.factor_sizes();
                let mut out = DVector::zeros(x.len());
                for j in 0..factors.len() {
                    let mut y = x.as_slice().to_vec();
                    for (i, (a, m)) in factors.iter().enumerate() {
                        let mat = if i == j { a } else { m };
                        y = apply_mode(mat, &y, &sizes, i);
                    }
                    out += DVector::from_vec(y);
                }
                out
            }
        }
    }

    /// y = M x.
    pub fn matvec_m(&self, x: &DVector<f64>) -> DVector<f64> {
        match &self.matrices {
            Matrices::Dense { m, .. } => m * x,
            Matrices::KroneckerSum { factors } => {
                let sizes = self.factor_sizes();
                let mut y = x.as_slice().to_vec();
                for (i, (_, m)) in factors.iter().enumerate() {
                    y = apply_mode(m, &y, &sizes, i);
                }
                DVector::from_vec(y)
            }
        }
    }

    /// Dense (A, M), materializing Kronecker sums. Guarded against
    /// accidental huge allocations.
    pub fn dense(&self) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        match &self.matrices {
            Matrices::Dense { a, m } => Ok((a.clone(), m.clone())),
            Matrices::KroneckerSum { factors } => {
                let n = self.cardinality();
                if n > 2500 {
                    return Err(Error::Unsupported(format!(
                        "refusing to materialize a {n}x{n} Kronecker sum"
                    )));
                }
                let mut m_total = DMatrix::identity(1, 1);
                for (_, m) in factors {
                    m_total = m_total.kronecker(m);
                }
                let mut a_total = DMatrix::zeros(n, n);
                for j in 0..factors.len() {
                    let mut term = DMatrix::identity(1, 1);
                    for (i, (a, m)) in factors.iter().enumerate() {
                        term = term.kronecker(if i == j { a } else { m });
                    }
                    a_total += term;
                }
                Ok((a_total, m_total))
            }
        }
    }

    /// Spectral-norm estimate of A by power iteration on A^T A = A^2.
    pub fn a_norm_estimate(&self, seed: u64) -> f64 {
        let n = self.cardinality();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let mut norm = 0.0;
        for _ in 0..30 {
            let w = self.matvec_a(&v);
            norm = w.norm();
            if norm == 0.0 {
                return 0.0;
            }
            v = w / norm;
        }
        norm
    }
}

/// Contract `mat` against tensor mode `mode` of `x` (row-major layout,
/// mode 0 slowest).
fn apply_mode(mat: &DMatrix<f64>, x: &[f64], sizes: &[usize], mode: usize) -> Vec<f64> {
    let n = sizes[mode];
    let stride: usize = sizes[mode + 1..].iter().product();
    let outer: usize = sizes[..mode].iter().product();
    let block = n * stride;
    let mut y = vec![0.0; x.len()];
    for o in 0..outer {
        for s in 0..stride {
            let base = o * block + s;
            for r in 0..n {
                let mut acc = 0.0;
                for c in 0..n {
                    acc += mat[(r, c)] * x[base + c * stride];
                }
                y[base + r * stride] = acc;
            }
        }
    }
    y
}

fn incompatible(basis: &DiscreteBasis, space: &ModelSpace) -> Error {
    Error::IncompatibleBasis {
        basis: basis.name().to_string(),
        space: space.kind.name().to_string(),
    }
}

/// Weak-form assembly of the stiffness and gram matrices.
pub fn assemble(
    space: &ModelSpace,
    basis: &DiscreteBasis,
    rule: &QuadratureRule,
) -> Result<AssembledOperator> {
    rule.require_positive_weights()?;
    match (&space.kind, basis) {
        (SpaceKind::GaussianEuclidean { n, lambda }, DiscreteBasis::HermiteTensor { degree }) => {
            let axis = rule
                .axes
                .first()
                .ok_or_else(|| Error::Unsupported("rule carries no axis data".into()))?;
            let (a1, m1) = hermite_factor(*lambda, *degree, &axis.0, &axis.1);
            check_gram(&m1)?;
            let matrices = if *n == 1 {
                Matrices::Dense { a: a1, m: m1 }
            } else {
                Matrices::KroneckerSum { factors: vec![(a1, m1); *n] }
            };
            Ok(AssembledOperator {
                space: space.clone(),
                basis: basis.clone(),
                field: Convention::Real,
                matrices,
                index: BasisIndex::Tensor { sizes: vec![degree + 1; *n] },
            })
        }
        (
            SpaceKind::RoundSphere { radius, complex_convention, .. },
            DiscreteBasis::SphericalHarmonics { lmax },
        ) => {
            let axis = rule
                .axes
                .first()
                .ok_or_else(|| Error::Unsupported("rule carries no axis data".into()))?;
            let (mut a, m) = sphere_dense(*lmax, *radius, &axis.0, &axis.1);
            if *complex_convention {
                a /= 2.0;
            }
            check_gram(&m)?;
            Ok(AssembledOperator {
                space: space.clone(),
                basis: basis.clone(),
                field: if *complex_convention { Convention::Complex } else { Convention::Real },
                matrices: Matrices::Dense { a, m },
                index: BasisIndex::Sphere { lmax: *lmax },
            })
        }
        (SpaceKind::SphereGaussianProduct { k, .. }, DiscreteBasis::ProductBasis { lmax, degree }) => {
            let radius = space.product_sphere_radius().unwrap();
            if rule.axes.len() < 2 + k {
                return Err(Error::Unsupported("rule carries too few axes".into()));
            }
            let (a_s, m_s) = sphere_dense(*lmax, radius, &rule.axes[0].0, &rule.axes[0].1);
            check_gram(&m_s)?;
            let mut factors = vec![(a_s, m_s)];
            for j in 0..*k {
                let axis = &rule.axes[2 + j];
                let (a1, m1) = hermite_factor(0.5, *degree, &axis.0, &axis.1);
                check_gram(&m1)?;
                factors.push((a1, m1));
            }
            Ok(AssembledOperator {
                space: space.clone(),
                basis: basis.clone(),
                field: Convention::Real,
                matrices: Matrices::KroneckerSum { factors },
                index: BasisIndex::Product { lmax: *lmax, degree: *degree, k: *k },
            })
        }
        (SpaceKind::ComplexGaussian { n }, DiscreteBasis::MonomialFock { degree }) => {
            let pairs = fock_pairs(*n, *degree as u32);
            let (a, m) = fock_dense(*n, &pairs);
            check_gram(&m)?;
            Ok(AssembledOperator {
                space: space.clone(),
                basis: basis.clone(),
                field: Convention::Complex,
                matrices: Matrices::Dense { a, m },
                index: BasisIndex::Fock { pairs },
            })
        }
        (SpaceKind::FanoCp1 { .. }, DiscreteBasis::FourierLatitudeGrid { lmax }) => {
            let geo = space.cp1.as_ref().ok_or(Error::PotentialUnavailable)?;
            let axis = rule
                .axes
                .first()
                .ok_or_else(|| Error::Unsupported("rule carries no axis data".into()))?;
            let (a, m, blocks) = fano_dense(geo, *lmax, &axis.0, &axis.1)?;
            check_gram(&m)?;
            Ok(AssembledOperator {
                space: space.clone(),
                basis: basis.clone(),
                field: Convention::Complex,
                matrices: Matrices::Dense { a, m },
                index: BasisIndex::Fourier { lmax: *lmax, blocks },
            })
        }
        _ => Err(incompatible(basis, space)),
    }
}

/// 1-D Gaussian factor: basis h_j(sqrt(lambda) x) against e^{-lambda
/// x^2/2} dx.
fn hermite_factor(lambda: f64, degree: usize, nodes: &[f64], weights: &[f64]) -> (DMatrix<f64>, DMatrix<f64>) {
    let d = degree + 1;
    let sl = lambda.sqrt();
    let mut a = DMatrix::zeros(d, d);
    let mut m = DMatrix::zeros(d, d);
    for (x, w) in nodes.iter().zip(weights) {
        let wf = w * (-lambda * x * x / 2.0).exp();
        let (vals, d1, _) = special::hermite_orthonormal(degree, sl * x);
        for j in 0..d {
            for k in j..d {
                a[(j, k)] += wf * lambda * d1[j] * d1[k];
                m[(j, k)] += wf * vals[j] * vals[k];
            }
        }
    }
    symmetrize(&mut a);
    symmetrize(&mut m);
    (a, m)
}

/// Dense assembly on the round 2-sphere in real-harmonic order; the
/// longitude integral is exact by orthonormality of the trig factors, so
/// only the latitude rule (Gauss-Legendre in cos(theta)) enters.
fn sphere_dense(lmax: usize, radius: f64, thetas: &[f64], wx: &[f64]) -> (DMatrix<f64>, DMatrix<f64>) {
    let idx = sphere_index(lmax);
    let d = idx.len();
    let mut a = DMatrix::zeros(d, d);
    let mut m = DMatrix::zeros(d, d);
    let r2 = radius * radius;
    // position of (l, m) in sphere_index order
    let pos = |l: usize, mm: i32| -> usize { l * l + (mm + l as i32) as usize };
    for (theta, w) in thetas.iter().zip(wx) {
        let s2 = theta.sin().powi(2);
        for ma in 0..=lmax {
            let t = special::assoc_legendre_theta(lmax, ma, *theta);
            let nl = lmax - ma + 1;
            for i in 0..nl {
                for j in i..nl {
                    let grad = t.d1[i] * t.d1[j] + (ma * ma) as f64 / s2 * t.val[i] * t.val[j];
                    let mass = r2 * t.val[i] * t.val[j];
                    let (l1, l2) = (ma + i, ma + j);
                    let signs: &[i32] = if ma == 0 { &[0] } else { &[1, -1] };
                    for sgn in signs {
                        let p = pos(l1, sgn * ma as i32);
                        let q = pos(l2, sgn * ma as i32);
                        let (p, q) = (p.min(q), p.max(q));
                        a[(p, q)] += w * grad;
                        m[(p, q)] += w * mass;
                    }
                }
            }
        }
    }
    symmetrize(&mut a);
    symmetrize(&mut m);
    (a, m)
}

/// Monomial pairs (alpha, beta), graded by total degree then lexicographic.
pub fn fock_pairs(n: usize, degree: u32) -> Vec<(Vec<u32>, Vec<u32>)> {
    let mut out = Vec::new();
    let mut current = vec![0u32; 2 * n];
    for total in 0..=degree {
        compositions(&mut current, 0, total, &mut |v| {
            out.push((v[..n].to_vec(), v[n..].to_vec()));
        });
    }
    out
}

fn compositions(buf: &mut Vec<u32>, slot: usize, remaining: u32, emit: &mut impl FnMut(&[u32])) {
    if slot + 1 == buf.len() {
        buf[slot] = remaining;
        emit(buf);
        return;
    }
    for v in 0..=remaining {
        buf[slot] = v;
        compositions(buf, slot + 1, remaining - v, emit);
    }
    buf[slot] = 0;
}

/// Gaussian moment: int z^gamma zbar^gamma e^{-|z|^2} dV = pi^n prod
/// gamma_i!, zero when the exponents of z and zbar differ.
fn fock_moment(n: usize, gz: &[u32], gzb: &[u32]) -> f64 {
    if gz != gzb {
        return 0.0;
    }
    let mut v = std::f64::consts::PI.powi(n as i32);
    for &g in gz {
        v *= factorial(g);
    }
    v
}

/// Closed-form assembly on C^n with the monomial Fock basis: the dbar
/// Dirichlet form and gram reduce to Gaussian moments, so no quadrature
/// error enters. Basis functions are normalized to unit gram diagonal.
fn fock_dense(n: usize, pairs: &[(Vec<u32>, Vec<u32>)]) -> (DMatrix<f64>, DMatrix<f64>) {
    let d = pairs.len();
    let nrm: Vec<f64> = pairs
        .iter()
        .map(|(al, be)| {
            let g: Vec<u32> = al.iter().zip(be).map(|(a, b)| a + b).collect();
            1.0 / fock_moment(n, &g, &g).sqrt()
        })
        .collect();
    let mut a = DMatrix::zeros(d, d);
    let mut m = DMatrix::zeros(d, d);
    for j in 0..d {
        let (aj, bj) = &pairs[j];
        for k in j..d {
            let (ak, bk) = &pairs[k];
            // <u_j, u_k>: int z^{a_j + b_k} zbar^{b_j + a_k}
            let gz: Vec<u32> = aj.iter().zip(bk).map(|(x, y)| x + y).collect();
            let gzb: Vec<u32> = bj.iter().zip(ak).map(|(x, y)| x + y).collect();
            m[(j, k)] = nrm[j] * nrm[k] * fock_moment(n, &gz, &gzb);
            // sum_i <dbar_i u_j, dbar_i u_k>
            if gz == gzb {
                let mut acc = 0.0;
                for i in 0..n {
                    if bj[i] == 0 || bk[i] == 0 || gz[i] == 0 {
                        continue;
                    }
                    let mut mom = std::f64::consts::PI.powi(n as i32);
                    for (t, &g) in gz.iter().enumerate() {
                        mom *= factorial(if t == i { g - 1 } else { g });
                    }
                    acc += (bj[i] * bk[i]) as f64 * mom;
                }
                a[(j, k)] = nrm[j] * nrm[k] * acc;
            }
        }
    }
    symmetrize(&mut a);
    symmetrize(&mut m);
    (a, m)
}

/// Per-Fourier-mode assembly on CP^1 (conformal metric e^{2 psi} g_round,
/// measure e^F dA). Blocks are real symmetric; note the stiffness of the
/// +m and -m blocks differ once F is nonconstant, while the spectrum still
/// carries the full multiplicity through the separate blocks.
fn fano_dense(
    geo: &crate::spaces::Cp1Geometry,
    lmax: usize,
    thetas: &[f64],
    wt: &[f64],
) -> Result<(DMatrix<f64>, DMatrix<f64>, Vec<(i32, usize, usize)>)> {
    use std::f64::consts::PI;
    let mut blocks = Vec::new();
    let mut offset = 0usize;
    for m in -(lmax as i32)..=(lmax as i32) {
        let len = lmax - m.unsigned_abs() as usize + 1;
        blocks.push((m, offset, len));
        offset += len;
    }
    let d = offset;
    let mut a = DMatrix::zeros(d, d);
    let mut mm = DMatrix::zeros(d, d);
    // latitude tables per |m| per node are the dominant cost; build once
    // per node.
    for (theta, w) in thetas.iter().zip(wt) {
        let s = theta.sin();
        let ef = geo.potential(*theta)?.exp();
        let e2psi = (2.0 * geo.psi(*theta)).exp();
        for &(m, off, len) in &blocks {
            let ma = m.unsigned_abs() as usize;
            let t = special::assoc_legendre_theta(lmax, ma, *theta);
            for i in 0..len {
                let wi = s * t.d1[i] - m as f64 * t.val[i];
                for j in i..len {
                    let wj = s * t.d1[j] - m as f64 * t.val[j];
                    a[(off + i, off + j)] += PI * w * wi * wj * ef / s;
                    mm[(off + i, off + j)] += 2.0 * PI * w * t.val[i] * t.val[j] * ef * e2psi * s;
                }
            }
        }
    }
    symmetrize(&mut a);
    symmetrize(&mut mm);
    Ok((a, mm, blocks))
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in 0..i {
            m[(i, j)] = m[(j, i)];
        }
    }
}

/// Rejects a gram matrix whose eigenvalue ratio signals near-dependence.
fn check_gram(m: &DMatrix<f64>) -> Result<()> {
    let eig = m.clone().symmetric_eigen().eigenvalues;
    let max = eig.iter().cloned().fold(f64::MIN, f64::max);
    let min = eig.iter().cloned().fold(f64::MAX, f64::min);
    if !(min > 1e-10 * max) {
        return Err(Error::GramIllConditioned(min / max));
    }
    Ok(())
}

/// Closed-form test functions the strong-form `apply` understands.
#[derive(Debug, Clone)]
pub enum TestFunction {
    RealPoly(Polynomial),
    ComplexPoly(CPoly),
    Harmonic(SphereSeries),
    Cp1Modes(Vec<Cp1Mode>),
}

/// Pointwise values of Delta_f u (real convention) or Delta_F u (complex
/// convention) at the rule nodes, from exact symbolic derivatives.
pub fn apply(space: &ModelSpace, u: &TestFunction, rule: &QuadratureRule) -> Result<Vec<Complex64>> {
    match (&space.kind, u) {
        (SpaceKind::GaussianEuclidean { n, lambda }, TestFunction::RealPoly(p)) => {
            if p.nvars != *n {
                return Err(Error::SymbolicDerivativeUnavailable(format!(
                    "polynomial in {} variables on an {n}-dimensional space",
                    p.nvars
                )));
            }
            // Delta_f u = Delta u - lambda x . grad u
            let mut out = Polynomial::zero(*n);
            for i in 0..*n {
                let di = p.deriv(i);
                out = out.add(&di.deriv(i));
                out = out.sub(&Polynomial::var(*n, i).mul(&di).scale(*lambda));
            }
            Ok(rule.nodes.iter().map(|x| Complex64::new(out.eval(x), 0.0)).collect())
        }
        (SpaceKind::ComplexGaussian { n }, TestFunction::ComplexPoly(p)) => {
            if p.nvars != *n {
                return Err(Error::SymbolicDerivativeUnavailable(format!(
                    "polynomial in {} complex variables on C^{n}",
                    p.nvars
                )));
            }
            // Delta_F u = sum_i d2u/dz_i dzbar_i - zbar_i du/dzbar_i
            let mut out = CPoly::zero(*n);
            for i in 0..*n {
                let dzb = p.dzbar(i);
                out = out.add(&dzb.dz(i));
                out = out.sub(&CPoly::zbar(*n, i).mul(&dzb));
            }
            Ok(rule
                .nodes
                .iter()
                .map(|x| {
                    let z: Vec<Complex64> =
                        (0..*n).map(|i| Complex64::new(x[2 * i], x[2 * i + 1])).collect();
                    out.eval(&z)
                })
                .collect())
        }
        (SpaceKind::RoundSphere { radius, complex_convention, .. }, TestFunction::Harmonic(s)) => {
            // exact: each (l, m) component scales by -l(l+1)/r^2, halved
            // under the dbar convention
            let half = if *complex_convention { 0.5 } else { 1.0 };
            let mut scaled = s.clone();
            for (pos, (l, _)) in sphere_index(s.lmax).iter().enumerate() {
                scaled.coeffs[pos] *= -half * (l * (l + 1)) as f64 / (radius * radius);
            }
            Ok(rule
                .nodes
                .iter()
                .map(|p| Complex64::new(scaled.eval(p[0], p[1]), 0.0))
                .collect())
        }
        (SpaceKind::FanoCp1 { .. }, TestFunction::Cp1Modes(modes)) => {
            let geo = space.cp1.as_ref().ok_or(Error::PotentialUnavailable)?;
            let mut out = vec![Complex64::new(0.0, 0.0); rule.len()];
            for (node, val) in rule.nodes.iter().zip(out.iter_mut()) {
                let (theta, phi) = (node[0], node[1]);
                let s = theta.sin();
                let rho = (2.0 * geo.psi(theta)).exp() * s * s;
                let fs = s * geo.potential_dtheta(theta)?;
                for mode in modes {
                    let jet = mode.jet(theta);
                    let us = s * jet.d1;
                    let uss = s * (theta.cos() * jet.d1 + s * jet.d2);
                    let mf = mode.m as f64;
                    // Delta_dbar u + grad F . grad' u, Fourier mode m
                    let profile = (uss - mf * mf * jet.u) / (2.0 * rho)
                        + fs * (us - mf * jet.u) / (2.0 * rho);
                    *val += profile * Complex64::new(0.0, mf * phi).exp();
                }
            }
            Ok(out)
        }
        _ => Err(Error::SymbolicDerivativeUnavailable(
            "no symbolic form for this space/function combination".into(),
        )),
    }
}

/// Delta_f u for a 1-D Gaussian space from point samples on a uniform
/// grid, using 4th-order central differences; values are returned at the
/// interior nodes (two dropped per side).
pub fn apply_sampled(lambda: f64, xs: &[f64], us: &[f64]) -> Result<Vec<f64>> {
    if xs.len() != us.len() || xs.len() < 7 {
        return Err(Error::InsufficientSmoothness(
            "need at least 7 uniformly spaced samples".into(),
        ));
    }
    let h = xs[1] - xs[0];
    for w in xs.windows(2) {
        if ((w[1] - w[0]) - h).abs() > 1e-9 * h.abs() {
            return Err(Error::InsufficientSmoothness("grid is not uniform".into()));
        }
    }
    if h > 0.25 {
        return Err(Error::InsufficientSmoothness(format!(
            "grid spacing {h:.3} too coarse for 4th-order differences"
        )));
    }
    let mut out = Vec::with_capacity(xs.len() - 4);
    for i in 2..xs.len() - 2 {
        let d1 = (-us[i + 2] + 8.0 * us[i + 1] - 8.0 * us[i - 1] + us[i - 2]) / (12.0 * h);
        let d2 = (-us[i + 2] + 16.0 * us[i + 1] - 30.0 * us[i] + 16.0 * us[i - 1] - us[i - 2])
            / (12.0 * h * h);
        out.push(d2 - lambda * xs[i] * d1);
    }
    Ok(out)
}

/// Ricci potential of a FanoCP1 instance at the rule's latitude nodes,
/// with the Gauss-Bonnet area check and a plug-back residual gate on
/// 1/2 Delta F = K - 1.
pub fn ricci_potential_cp1(space: &ModelSpace, rule: &QuadratureRule) -> Result<Vec<f64>> {
    use std::f64::consts::PI;
    let geo = match &space.kind {
        SpaceKind::FanoCp1 { .. } => space.cp1.as_ref().ok_or(Error::PotentialUnavailable)?,
        _ => return Err(Error::PotentialUnavailable),
    };
    if (geo.area - 4.0 * PI).abs() > 1e-6 {
        return Err(Error::GaussBonnetViolated { area: geo.area });
    }
    let thetas = &rule
        .axes
        .first()
        .ok_or_else(|| Error::Unsupported("rule carries no axis data".into()))?
        .0;
    let mut out = Vec::with_capacity(thetas.len());
    let mut max_resid = 0.0f64;
    for &theta in thetas {
        let f = geo.potential(theta)?;
        // 1/2 Delta_g F = 1/2 e^{-2 psi} Delta_0 F must equal K - 1
        let lhs = 0.5 * (-2.0 * geo.psi(theta)).exp() * geo.laplace0_potential(theta)?;
        let rhs = geo.curvature(theta) - 1.0;
        max_resid = max_resid.max((lhs - rhs).abs());
        out.push(f);
    }
    if max_resid > 1e-8 {
        return Err(Error::PoissonSolveFailed(format!(
            "plug-back residual {max_resid:.3e} exceeds 1e-8"
        )));
    }
    Ok(out)
}

/// Max symmetry defect |<Au, v> - <u, Av>| / (|u|_M |v|_M) over seeded
/// random coefficient pairs, plus the matrix-level defect |A - A^T|.
pub fn selfadjointness_report(op: &AssembledOperator, pairs: usize, seed: u64) -> IdentityReport {
    let n = op.cardinality();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a_norm = op.a_norm_estimate(seed ^ 0x5eed);
    let mut max_defect = 0.0f64;
    let mut sum_sq = 0.0f64;
    for _ in 0..pairs {
        let u = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let v = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let au = op.matvec_a(&u);
        let av = op.matvec_a(&v);
        let un = u.dot(&op.matvec_m(&u)).sqrt();
        let vn = v.dot(&op.matvec_m(&v)).sqrt();
        let defect = (au.dot(&v) - u.dot(&av)).abs() / (un * vn);
        max_defect = max_defect.max(defect);
        sum_sq += defect * defect;
    }
    let tol = 1e-12 * a_norm.max(1e-300);
    IdentityReport::new(
        "self-adjointness",
        max_defect,
        (sum_sq / pairs.max(1) as f64).sqrt(),
        tol,
        format!("{} random coefficient pairs, |A| ~ {a_norm:.3e}", pairs),
    )
}

/// Strong-form collocation assembly of -Delta_f on a coarse 1-D Gaussian
/// grid: a diagnostic showing the symmetry defect the weak form avoids.
pub fn collocation_defect_gaussian(lambda: f64, degree: usize, npts: usize) -> f64 {
    let (xs, _) = crate::quad::hermite_lebesgue(npts.max(degree + 1), lambda);
    let sl = lambda.sqrt();
    let d = degree + 1;
    let mut c = DMatrix::zeros(xs.len().min(d), d);
    for (i, x) in xs.iter().take(c.nrows()).enumerate() {
        let (_, d1, d2) = special::hermite_orthonormal(degree, sl * x);
        for j in 0..d {
            // -Delta_f h_j = -(lambda h_j'' - lambda x sqrt(lambda) h_j')
            c[(i, j)] = -(lambda * d2[j] - lambda * x * sl * d1[j]);
        }
    }
    let ct = c.transpose();
    let diff = &c - &ct;
    diff.norm() / c.norm()
}

// ---------------------------------------------------------------------
// eigenvector reconstruction
// ---------------------------------------------------------------------

/// Univariate polynomials h_j(sqrt(lambda) x), j = 0..=degree.
pub fn hermite_polynomials(degree: usize, lambda: f64) -> Vec<Polynomial> {
    let y = Polynomial::var(1, 0).scale(lambda.sqrt());
    let mut out = vec![Polynomial::constant(1, 1.0)];
    if degree == 0 {
        return out;
    }
    out.push(y.clone());
    for k in 1..degree {
        let kf = k as f64;
        let next = y.mul(&out[k]).sub(&out[k - 1].scale(kf.sqrt())).scale(1.0 / (kf + 1.0).sqrt());
        out.push(next);
    }
    out
}

fn embed_univariate(p: &Polynomial, nvars: usize, var: usize) -> Polynomial {
    let mut out = Polynomial::zero(nvars);
    for (exps, c) in &p.terms {
        let mut e = vec![0u32; nvars];
        e[var] = exps[0];
        out.add_term(e, *c);
    }
    out
}

/// Reconstructs a HermiteTensor eigenvector as an explicit polynomial,
/// dropping coefficients below `rel_tol` of the largest.
pub fn eigenvector_polynomial(
    op: &AssembledOperator,
    coeffs: &DVector<f64>,
    rel_tol: f64,
) -> Result<Polynomial> {
    let (n, lambda) = match &op.space.kind {
        SpaceKind::GaussianEuclidean { n, lambda } => (*n, *lambda),
        _ => return Err(Error::Unsupported("not a Hermite-basis operator".into())),
    };
    let degree = match &op.basis {
        DiscreteBasis::HermiteTensor { degree } => *degree,
        _ => return Err(Error::Unsupported("not a Hermite-basis operator".into())),
    };
    let h1 = hermite_polynomials(degree, lambda);
    let cmax = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs())).max(1e-300);
    let mut out = Polynomial::zero(n);
    let sizes = vec![degree + 1; n];
    for (flat, c) in coeffs.iter().enumerate() {
        if c.abs() < rel_tol * cmax {
            continue;
        }
        let multi = unflatten(flat, &sizes);
        let mut term = Polynomial::constant(n, *c);
        for (axis, &k) in multi.iter().enumerate() {
            term = term.mul(&embed_univariate(&h1[k], n, axis));
        }
        out = out.add(&term);
    }
    Ok(out)
}

fn unflatten(mut flat: usize, sizes: &[usize]) -> Vec<usize> {
    let mut multi = vec![0usize; sizes.len()];
    for i in (0..sizes.len()).rev() {
        multi[i] = flat % sizes[i];
        flat /= sizes[i];
    }
    multi
}

/// Reconstructs a SphericalHarmonics eigenvector.
pub fn eigenvector_sphere_series(op: &AssembledOperator, coeffs: &DVector<f64>) -> Result<SphereSeries> {
    match &op.index {
        BasisIndex::Sphere { lmax } => {
            Ok(SphereSeries { lmax: *lmax, coeffs: coeffs.as_slice().to_vec() })
        }
        _ => Err(Error::Unsupported("not a spherical-harmonics operator".into())),
    }
}

/// Reconstructs a MonomialFock eigenvector as a complex polynomial
/// (coefficients include the unit-gram normalization).
pub fn eigenvector_cpoly(op: &AssembledOperator, coeffs: &DVector<f64>) -> Result<CPoly> {
    let n = match &op.space.kind {
        SpaceKind::ComplexGaussian { n } => *n,
        _ => return Err(Error::Unsupported("not a Fock-basis operator".into())),
    };
    let pairs = match &op.index {
        BasisIndex::Fock { pairs } => pairs,
        _ => return Err(Error::Unsupported("not a Fock-basis operator".into())),
    };
    let mut out = CPoly::zero(n);
    for ((al, be), c) in pairs.iter().zip(coeffs.iter()) {
        if *c == 0.0 {
            continue;
        }
        let g: Vec<u32> = al.iter().zip(be).map(|(a, b)| a + b).collect();
        let nrm = 1.0 / fock_moment(n, &g, &g).sqrt();
        out = out.add(&CPoly::monomial(n, al, be, Complex64::new(c * nrm, 0.0)));
    }
    Ok(out)
}

/// Reconstructs a FourierLatitudeGrid eigenvector as latitude profiles per
/// Fourier mode, keeping modes holding more than `rel_tol` of the mass.
pub fn eigenvector_cp1_modes(
    op: &AssembledOperator,
    coeffs: &DVector<f64>,
    rel_tol: f64,
) -> Result<Vec<Cp1Mode>> {
    let (lmax, blocks) = match &op.index {
        BasisIndex::Fourier { lmax, blocks } => (*lmax, blocks),
        _ => return Err(Error::Unsupported("not a Fourier-mode operator".into())),
    };
    let total = coeffs.norm().max(1e-300);
    let mut out = Vec::new();
    for &(m, off, len) in blocks {
        let slice: Vec<f64> = (0..len).map(|i| coeffs[off + i]).collect();
        let mass = slice.iter().map(|c| c * c).sum::<f64>().sqrt();
        if mass > rel_tol * total {
            out.push(Cp1Mode { m, lmax, coeffs: slice });
        }
    }
    Ok(out)
}

/// Sphere-times-flat eigenfunction evaluator for the splitting
/// certificate (k = 1 flat factor).
#[derive(Debug, Clone)]
pub struct ProductFunction {
    pub radius: f64,
    pub lambda: f64,
    pub degree: usize,
    /// (hermite index j, sphere series of the coefficients at j).
    pub series: Vec<(usize, SphereSeries)>,
}

/// Reconstructs a ProductBasis eigenvector; only k = 1 is supported.
pub fn eigenvector_product(
    op: &AssembledOperator,
    coeffs: &DVector<f64>,
    rel_tol: f64,
) -> Result<ProductFunction> {
    let (lmax, degree, k) = match &op.index {
        BasisIndex::Product { lmax, degree, k } => (*lmax, *degree, *k),
        _ => return Err(Error::Unsupported("not a product-basis operator".into())),
    };
    if k != 1 {
        return Err(Error::Unsupported("splitting reconstruction needs k = 1".into()));
    }
    let radius = op.space.product_sphere_radius().unwrap();
    let ns = (lmax + 1) * (lmax + 1);
    let nh = degree + 1;
    let total = coeffs.norm().max(1e-300);
    let mut series = Vec::new();
    for j in 0..nh {
        // sphere index is the slow factor
        let slice: Vec<f64> = (0..ns).map(|s| coeffs[s * nh + j]).collect();
        let mass = slice.iter().map(|c| c * c).sum::<f64>().sqrt();
        if mass > rel_tol * total {
            series.push((j, SphereSeries { lmax, coeffs: slice }));
        }
    }
    Ok(ProductFunction { radius, lambda: 0.5, degree, series })
}

impl ProductFunction {
    fn hermite_at(&self, t: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let sl = self.lambda.sqrt();
        let (v, d1, d2) = special::hermite_orthonormal(self.degree, sl * t);
        let dv: Vec<f64> = d1.iter().map(|d| sl * d).collect();
        let ddv: Vec<f64> = d2.iter().map(|d| self.lambda * d).collect();
        (v, dv, ddv)
    }

    /// u(theta, phi, t).
    pub fn eval(&self, node: &[f64]) -> f64 {
        let (h, _, _) = self.hermite_at(node[2]);
        self.series.iter().map(|(j, s)| h[*j] * s.eval(node[0], node[1])).sum()
    }

    /// Squared Frobenius norm of the full covariant Hessian at a node
    /// (theta, phi, t).
    pub fn hessian_sq(&self, node: &[f64]) -> f64 {
        let (theta, phi, t) = (node[0], node[1], node[2]);
        let (h, dh, ddh) = self.hermite_at(t);
        let mut jet0 = crate::geometry::SphereJet::default();
        let mut jet1 = crate::geometry::SphereJet::default();
        let mut a2 = 0.0;
        for (j, s) in &self.series {
            let jet = s.jet(theta, phi);
            for aa in 0..4 {
                for bb in 0..4 - aa {
                    jet0.d[aa][bb] += h[*j] * jet.d[aa][bb];
                    jet1.d[aa][bb] += dh[*j] * jet.d[aa][bb];
                }
            }
            a2 += ddh[*j] * jet.d[0][0];
        }
        jet0.hessian_sq(theta, self.radius) + 2.0 * jet1.grad_sq(theta, self.radius) + a2 * a2
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{default_rule, make_space};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    /// Generalized eigenvalues the slow, obviously-correct way.
    fn gen_eigs(a: &DMatrix<f64>, m: &DMatrix<f64>) -> Vec<f64> {
        let chol = m.clone().cholesky().expect("gram should be PD");
        let l_inv = chol.l().try_inverse().unwrap();
        let b = &l_inv * a * l_inv.transpose();
        let mut ev: Vec<f64> = b.symmetric_eigen().eigenvalues.iter().cloned().collect();
        ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
        ev
    }

    #[test]
    fn gaussian_hermite_reproduces_ou_ladder() {
        let space = make_space("gaussian:n=1,lambda=0.5").unwrap();
        let rule = default_rule(&space, 40);
        let op = assemble(&space, &DiscreteBasis::HermiteTensor { degree: 20 }, &rule).unwrap();
        let (a, m) = op.dense().unwrap();
        let ev = gen_eigs(&a, &m);
        for (k, lam) in ev.iter().take(10).enumerate() {
            assert_abs_diff_eq!(lam, &(0.5 * k as f64), epsilon = 1e-10);
        }
    }

    #[test]
    fn sphere_complex_convention_halves_the_ladder() {
        let space = make_space("sphere:n=2,r=1,conv=complex").unwrap();
        let rule = default_rule(&space, 64);
        let op = assemble(&space, &DiscreteBasis::SphericalHarmonics { lmax: 6 }, &rule).unwrap();
        let (a, m) = op.dense().unwrap();
        let ev = gen_eigs(&a, &m);
        let expected = [0.0, 1.0, 1.0, 1.0, 3.0, 3.0, 3.0, 3.0, 3.0];
        for (lam, want) in ev.iter().zip(expected.iter()) {
            assert_abs_diff_eq!(lam, want, epsilon = 1e-9);
        }
    }

    #[test]
    fn fano_round_metric_matches_harmonic_oracle() {
        let space = make_space("fano-cp1:pert=0").unwrap();
        let rule = default_rule(&space, 200);
        let op = assemble(&space, &DiscreteBasis::FourierLatitudeGrid { lmax: 8 }, &rule).unwrap();
        let (a, m) = op.dense().unwrap();
        let ev = gen_eigs(&a, &m);
        let expected = [0.0, 1.0, 1.0, 1.0, 3.0, 3.0, 3.0, 3.0, 3.0];
        for (lam, want) in ev.iter().zip(expected.iter()) {
            assert_abs_diff_eq!(lam, want, epsilon = 1e-8);
        }
    }

    #[test]
    fn constant_vector_lies_in_every_kernel() {
        let cases: Vec<(&str, DiscreteBasis, usize)> = vec![
            ("gaussian:n=2,lambda=0.5", DiscreteBasis::HermiteTensor { degree: 8 }, 40),
            ("sphere:n=2,r=1", DiscreteBasis::SphericalHarmonics { lmax: 4 }, 64),
            ("product:n=3,k=1", DiscreteBasis::ProductBasis { lmax: 4, degree: 6 }, 40),
            ("complex-gaussian:n=2", DiscreteBasis::MonomialFock { degree: 3 }, 24),
            ("fano-cp1:pert=0.05", DiscreteBasis::FourierLatitudeGrid { lmax: 6 }, 200),
        ];
        for (desc, basis, res) in cases {
            let space = make_space(desc).unwrap();
            let rule = default_rule(&space, res);
            let op = assemble(&space, &basis, &rule).unwrap();
            let n = op.cardinality();
            // index of the constant basis function (the m = 0, l = 0
            // profile for Fourier blocks, entry 0 everywhere else)
            let const_idx = match &op.index {
                BasisIndex::Fourier { blocks, .. } => {
                    blocks.iter().find(|(m, _, _)| *m == 0).unwrap().1
                }
                _ => 0,
            };
            let mut e0 = DVector::zeros(n);
            e0[const_idx] = 1.0;
            let norm_a = op.a_norm_estimate(7).max(1e-300);
            assert!(
                op.matvec_a(&e0).norm() <= 1e-10 * norm_a,
                "constant not in kernel for {desc}"
            );
        }
    }

    #[test]
    fn apply_matches_the_closed_forms() {
        // Gaussian: Delta_f x1 = -x1/2
        let space = make_space("gaussian:n=2,lambda=0.5").unwrap();
        let rule = default_rule(&space, 40);
        let u = TestFunction::RealPoly(Polynomial::var(2, 0));
        let vals = apply(&space, &u, &rule).unwrap();
        for (node, v) in rule.nodes.iter().zip(&vals) {
            assert_abs_diff_eq!(v.re, -0.5 * node[0], epsilon = 1e-12);
            assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-15);
        }

        // C^1: Delta_F (z zbar) = 1 - z zbar
        let cspace = make_space("complex-gaussian:n=1").unwrap();
        let crule = default_rule(&cspace, 24);
        let zz = CPoly::z(1, 0).mul(&CPoly::zbar(1, 0));
        let vals = apply(&cspace, &TestFunction::ComplexPoly(zz), &crule).unwrap();
        for (node, v) in crule.nodes.iter().zip(&vals) {
            let r2 = node[0] * node[0] + node[1] * node[1];
            assert_abs_diff_eq!(v.re, 1.0 - r2, epsilon = 1e-12);
        }
    }

    #[test]
    fn apply_is_lowering_plus_diagonal_on_fock_monomials() {
        // Delta_F(z^a zbar^b) = -|b| z^a zbar^b + sum_i a_i b_i z^{a-e} zbar^{b-e}
        let n = 2;
        for (al, be) in fock_pairs(n, 4) {
            let u = CPoly::monomial(n, &al, &be, Complex64::new(1.0, 0.0));
            let mut expect = u.scale(Complex64::new(-(be.iter().sum::<u32>() as f64), 0.0));
            for i in 0..n {
                if al[i] > 0 && be[i] > 0 {
                    let mut a2 = al.clone();
                    let mut b2 = be.clone();
                    a2[i] -= 1;
                    b2[i] -= 1;
                    expect = expect.add(&CPoly::monomial(
                        n,
                        &a2,
                        &b2,
                        Complex64::new((al[i] * be[i]) as f64, 0.0),
                    ));
                }
            }
            let mut got = CPoly::zero(n);
            for i in 0..n {
                let dzb = u.dzbar(i);
                got = got.add(&dzb.dz(i));
                got = got.sub(&CPoly::zbar(n, i).mul(&dzb));
            }
            let diff = got.sub(&expect);
            let z = vec![Complex64::new(0.7, -0.3), Complex64::new(-0.2, 1.1)];
            assert!(diff.eval(&z).norm() < 1e-12, "mismatch at ({al:?}, {be:?})");
        }
    }

    #[test]
    fn fock_one_eigenvalue_multiplicity_counts_witnesses() {
        let space = make_space("complex-gaussian:n=2").unwrap();
        let rule = default_rule(&space, 24);
        let mut last = 0usize;
        for d in 2..=5 {
            let op = assemble(&space, &DiscreteBasis::MonomialFock { degree: d }, &rule).unwrap();
            let (a, m) = op.dense().unwrap();
            let ev = gen_eigs(&a, &m);
            let mult = ev.iter().filter(|l| (**l - 1.0).abs() < 1e-8).count();
            assert!(mult >= d, "degree {d}: multiplicity {mult} < {d}");
            assert!(mult >= last, "multiplicity decreased at degree {d}");
            last = mult;
        }
    }

    #[test]
    fn selfadjointness_defect_is_roundoff_weak_but_not_collocation() {
        let space = make_space("gaussian:n=1,lambda=0.5").unwrap();
        let rule = default_rule(&space, 40);
        let op = assemble(&space, &DiscreteBasis::HermiteTensor { degree: 15 }, &rule).unwrap();
        let rep = selfadjointness_report(&op, 100, 42);
        assert!(rep.verdict_pass(), "weak form defect {:.3e}", rep.max_residual);
        // the strong-form collocation diagnostic is visibly asymmetric
        assert!(collocation_defect_gaussian(0.5, 10, 12) > 1e-3);
    }

    #[test]
    fn ricci_potential_plugs_back_and_polices_the_area() {
        let space = make_space("fano-cp1:pert=0.05|0.02").unwrap();
        let rule = default_rule(&space, 200);
        let f = ricci_potential_cp1(&space, &rule).unwrap();
        assert_eq!(f.len(), rule.axes[0].0.len());
        assert!(f.iter().any(|v| v.abs() > 1e-3), "perturbed potential should be nonzero");

        let round = make_space("fano-cp1:pert=0").unwrap();
        let f0 = ricci_potential_cp1(&round, &default_rule(&round, 200)).unwrap();
        assert!(f0.iter().all(|v| v.abs() < 1e-10));

        let bad = crate::spaces::ModelSpace::fano_cp1_with_area_factor(vec![0.02], 1.001).unwrap();
        match ricci_potential_cp1(&bad, &default_rule(&bad, 200)) {
            Err(Error::GaussBonnetViolated { area }) => {
                assert!((area - 4.0 * PI * 1.001).abs() < 1e-6)
            }
            other => panic!("expected GaussBonnetViolated, got {other:?}"),
        }
    }

    #[test]
    fn apply_sampled_matches_symbolic_on_a_fine_grid() {
        let lambda = 0.5;
        let xs: Vec<f64> = (0..401).map(|i| -5.0 + 0.025 * i as f64).collect();
        let us: Vec<f64> = xs.iter().map(|x| x * x * x).collect();
        let got = apply_sampled(lambda, &xs, &us).unwrap();
        for (x, g) in xs[2..xs.len() - 2].iter().zip(&got) {
            // Delta_f x^3 = 6x - lambda x * 3x^2
            let want = 6.0 * x - lambda * 3.0 * x * x * x;
            assert_abs_diff_eq!(g, &want, epsilon = 1e-6 * (1.0 + want.abs()));
        }
        let coarse: Vec<f64> = (0..21).map(|i| -5.0 + 0.5 * i as f64).collect();
        let cu: Vec<f64> = coarse.iter().map(|x| x * x * x).collect();
        assert!(matches!(
            apply_sampled(lambda, &coarse, &cu),
            Err(Error::InsufficientSmoothness(_))
        ));
    }

    #[test]
    fn incompatible_basis_is_rejected() {
        let space = make_space("gaussian:n=1,lambda=0.5").unwrap();
        let rule = default_rule(&space, 40);
        match assemble(&space, &DiscreteBasis::MonomialFock { degree: 3 }, &rule) {
            Err(Error::IncompatibleBasis { .. }) => {}
            other => panic!("expected IncompatibleBasis, got {other:?}"),
        }
    }

    #[test]
    fn kronecker_matvec_agrees_with_materialized_product() {
        let space = make_space("gaussian:n=2,lambda=0.5").unwrap();
        let rule = default_rule(&space, 40);
        let op = assemble(&space, &DiscreteBasis::HermiteTensor { degree: 6 }, &rule).unwrap();
        let (a, m) = op.dense().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = DVector::from_fn(op.cardinality(), |_, _| rng.gen_range(-1.0..1.0));
        assert!((op.matvec_a(&x) - &a * &x).norm() < 1e-10 * a.norm());
        assert!((op.matvec_m(&x) - &m * &x).norm() < 1e-10 * m.norm());
    }
}
