//! Catalog of model metric measure spaces: weights, measures, quadrature
//! rules and analytic metadata.
//!
//! Real-convention spaces carry the measure e^{-f} dV_g, complex-convention
//! spaces carry e^{F} dV_g; the sign asymmetry is kept explicit.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad::{self, Chart, QuadratureRule};
use crate::special;

/// Weight-sign convention of the measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    /// Measure e^{-f} dV_g.
    Real,
    /// Measure e^{F} dV_g.
    Complex,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpaceKind {
    GaussianEuclidean { n: usize, lambda: f64 },
    RoundSphere { n: usize, radius: f64, complex_convention: bool },
    SphereGaussianProduct { n: usize, k: usize },
    ComplexGaussian { n: usize },
    FanoCp1 { perturbation: Vec<f64> },
}

impl SpaceKind {
    pub fn name(&self) -> &'static str {
        match self {
            SpaceKind::GaussianEuclidean { .. } => "gaussian",
            SpaceKind::RoundSphere { .. } => "sphere",
            SpaceKind::SphereGaussianProduct { .. } => "product",
            SpaceKind::ComplexGaussian { .. } => "complex-gaussian",
            SpaceKind::FanoCp1 { .. } => "fano-cp1",
        }
    }
}

/// S^1-invariant conformal geometry on CP^1 in the fixed Kaehler class.
///
/// The metric is e^{2 psi} g_round with psi = c + sum_j a_j P_j(cos theta);
/// the constant c re-imposes total area 4 pi.
#[derive(Debug, Clone, PartialEq)]
pub struct Cp1Geometry {
    pub perturbation: Vec<f64>,
    /// Constant conformal offset fixing the area.
    pub scale: f64,
    /// Legendre coefficients of the Ricci potential F (F(north pole) = 0),
    /// absent when the area constraint is violated.
    pub ricci_potential: Option<Vec<f64>>,
    pub area: f64,
    /// Legendre resolution used for the geometry solves.
    pub lmax_geo: usize,
}

const CP1_LMAX_GEO: usize = 96;
const CP1_GEO_QUAD: usize = 256;

impl Cp1Geometry {
    /// Area-normalized geometry; solves the Ricci potential.
    pub fn new(perturbation: Vec<f64>) -> Result<Self> {
        Self::with_area_factor(perturbation, 1.0)
    }

    /// Test hook: scales the metric so the area is 4 pi times `factor`.
    /// For factor != 1 the Ricci potential is left unsolved.
    pub fn with_area_factor(perturbation: Vec<f64>, factor: f64) -> Result<Self> {
        if perturbation.len() > 16 {
            return Err(Error::ParameterOutOfRange(
                "at most 16 zonal perturbation coefficients supported".into(),
            ));
        }
        if perturbation.iter().any(|a| a.abs() > 0.5) {
            return Err(Error::ParameterOutOfRange(
                "zonal perturbation coefficients must satisfy |a_j| <= 0.5".into(),
            ));
        }
        let mut geo = Cp1Geometry {
            perturbation,
            scale: 0.0,
            ricci_potential: None,
            area: 0.0,
            lmax_geo: CP1_LMAX_GEO,
        };
        let raw_area = geo.compute_area();
        geo.scale = 0.5 * (4.0 * PI * factor / raw_area).ln();
        geo.area = geo.compute_area();
        if factor == 1.0 {
            geo.ricci_potential = Some(geo.solve_ricci_potential()?);
        }
        Ok(geo)
    }

    /// psi(theta) = scale + sum_j a_j P_j(cos theta).
    pub fn psi(&self, theta: f64) -> f64 {
        let x = theta.cos();
        let p = special::legendre(self.perturbation.len(), x);
        self.scale
            + self
                .perturbation
                .iter()
                .enumerate()
                .map(|(j, a)| a * p[j + 1])
                .sum::<f64>()
    }

    /// d psi / d theta.
    pub fn dpsi_dtheta(&self, theta: f64) -> f64 {
        let x = theta.cos();
        let s = theta.sin();
        let (_, dp) = special::legendre_with_deriv(self.perturbation.len(), x);
        -s * self
            .perturbation
            .iter()
            .enumerate()
            .map(|(j, a)| a * dp[j + 1])
            .sum::<f64>()
    }

    /// Round-sphere Laplacian of psi (spectral, exact for the zonal series).
    fn laplace0_psi(&self, theta: f64) -> f64 {
        let x = theta.cos();
        let p = special::legendre(self.perturbation.len(), x);
        -self
            .perturbation
            .iter()
            .enumerate()
            .map(|(j, a)| {
                let l = (j + 1) as f64;
                a * l * (l + 1.0) * p[j + 1]
            })
            .sum::<f64>()
    }

    /// Gauss curvature K = e^{-2 psi} (1 - Delta_0 psi).
    pub fn curvature(&self, theta: f64) -> f64 {
        (-2.0 * self.psi(theta)).exp() * (1.0 - self.laplace0_psi(theta))
    }

    fn compute_area(&self) -> f64 {
        let (x, w) = quad::gauss_legendre(CP1_GEO_QUAD);
        // area = 2 pi int e^{2 psi} sin(theta) d theta = 2 pi int e^{2 psi} dx
        2.0 * PI
            * x.iter()
                .zip(&w)
                .map(|(xi, wi)| {
                    let theta = xi.clamp(-1.0, 1.0).acos();
                    wi * (2.0 * self.psi(theta)).exp()
                })
                .sum::<f64>()
    }

    /// Solves Delta_0 F = 2 (1 - Delta_0 psi - e^{2 psi}) in Legendre
    /// coefficient space and normalizes F(north pole) = 0.
    fn solve_ricci_potential(&self) -> Result<Vec<f64>> {
        let lmax = self.lmax_geo;
        let (x, w) = quad::gauss_legendre(CP1_GEO_QUAD);
        let mut h = vec![0.0; lmax + 1];
        for (xi, wi) in x.iter().zip(&w) {
            let theta = xi.clamp(-1.0, 1.0).acos();
            let hval = 2.0 * (1.0 - self.laplace0_psi(theta) - (2.0 * self.psi(theta)).exp());
            let p = special::legendre(lmax, *xi);
            for l in 0..=lmax {
                h[l] += wi * hval * p[l] * (2.0 * l as f64 + 1.0) / 2.0;
            }
        }
        let hmax = h.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        // Gauss-Bonnet compatibility: the mean of the source must vanish.
        if h[0].abs() > 1e-9 * hmax.max(1.0) {
            return Err(Error::GaussBonnetViolated { area: self.area });
        }
        // resolved source: the Legendre tail must have decayed
        let tail = h[lmax - 2..=lmax].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if tail > 1e-9 * hmax.max(1.0) {
            return Err(Error::PoissonSolveFailed(format!(
                "Legendre tail {:.3e} of the curvature source has not decayed",
                tail
            )));
        }
        let mut f = vec![0.0; lmax + 1];
        for l in 1..=lmax {
            let lf = l as f64;
            f[l] = -h[l] / (lf * (lf + 1.0));
        }
        // F(north pole) = 0, P_l(1) = 1
        let at_pole: f64 = f.iter().sum();
        f[0] = -at_pole;
        Ok(f)
    }

    /// Ricci potential F(theta) from the stored Legendre coefficients.
    pub fn potential(&self, theta: f64) -> Result<f64> {
        let coeffs = self.ricci_potential.as_ref().ok_or(Error::PotentialUnavailable)?;
        let p = special::legendre(coeffs.len() - 1, theta.cos());
        Ok(coeffs.iter().zip(&p).map(|(c, pl)| c * pl).sum())
    }

    /// dF/d theta.
    pub fn potential_dtheta(&self, theta: f64) -> Result<f64> {
        let coeffs = self.ricci_potential.as_ref().ok_or(Error::PotentialUnavailable)?;
        let x = theta.cos();
        let s = theta.sin();
        let (_, dp) = special::legendre_with_deriv(coeffs.len() - 1, x);
        Ok(-s * coeffs.iter().zip(&dp).map(|(c, d)| c * d).sum::<f64>())
    }

    /// Round-sphere Laplacian of F (spectral).
    pub fn laplace0_potential(&self, theta: f64) -> Result<f64> {
        let coeffs = self.ricci_potential.as_ref().ok_or(Error::PotentialUnavailable)?;
        let p = special::legendre(coeffs.len() - 1, theta.cos());
        Ok(-coeffs
            .iter()
            .enumerate()
            .zip(&p)
            .map(|((l, c), pl)| c * (l * (l + 1)) as f64 * pl)
            .sum::<f64>())
    }
}

/// A catalog entry bundling metric, weight, measure and analytic metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpace {
    pub kind: SpaceKind,
    pub real_dimension: usize,
    pub weight_sign_convention: Convention,
    /// Analytic lambda with Ric_f >= lambda g, when known for this entry.
    pub ric_f_lower_bound: Option<f64>,
    pub cp1: Option<Cp1Geometry>,
}

impl ModelSpace {
    pub fn gaussian(n: usize, lambda: f64) -> Result<Self> {
        if n == 0 || n > 8 {
            return Err(Error::ParameterOutOfRange(format!(
                "gaussian dimension n = {n} outside 1..=8"
            )));
        }
        if !(lambda > 0.0) {
            return Err(Error::ParameterOutOfRange(format!(
                "gaussian curvature constant lambda = {lambda} must be positive"
            )));
        }
        Ok(ModelSpace {
            kind: SpaceKind::GaussianEuclidean { n, lambda },
            real_dimension: n,
            weight_sign_convention: Convention::Real,
            ric_f_lower_bound: Some(lambda),
            cp1: None,
        })
    }

    pub fn round_sphere(n: usize, radius: f64, complex_convention: bool) -> Result<Self> {
        if n != 2 {
            return Err(Error::ParameterOutOfRange(format!(
                "only 2-spheres are in the catalog (got n = {n})"
            )));
        }
        if !(radius > 0.0) {
            return Err(Error::ParameterOutOfRange("sphere radius must be positive".into()));
        }
        Ok(ModelSpace {
            kind: SpaceKind::RoundSphere { n, radius, complex_convention },
            real_dimension: n,
            weight_sign_convention: if complex_convention {
                Convention::Complex
            } else {
                Convention::Real
            },
            ric_f_lower_bound: Some(1.0 / (radius * radius)),
            cp1: None,
        })
    }

    pub fn sphere_gaussian_product(n: usize, k: usize) -> Result<Self> {
        if k < 1 {
            return Err(Error::ParameterOutOfRange("flat factor needs k >= 1".into()));
        }
        if n < k + 2 {
            return Err(Error::ParameterOutOfRange(format!(
                "product requires n - k >= 2 (got n = {n}, k = {k})"
            )));
        }
        if n - k != 2 {
            return Err(Error::ParameterOutOfRange(format!(
                "catalog sphere factors are 2-dimensional (got n - k = {})",
                n - k
            )));
        }
        Ok(ModelSpace {
            kind: SpaceKind::SphereGaussianProduct { n, k },
            real_dimension: n,
            weight_sign_convention: Convention::Real,
            ric_f_lower_bound: Some(0.5),
            cp1: None,
        })
    }

    pub fn complex_gaussian(n: usize) -> Result<Self> {
        if n == 0 || n > 4 {
            return Err(Error::ParameterOutOfRange(format!(
                "complex gaussian dimension n = {n} outside 1..=4"
            )));
        }
        Ok(ModelSpace {
            kind: SpaceKind::ComplexGaussian { n },
            real_dimension: 2 * n,
            weight_sign_convention: Convention::Complex,
            ric_f_lower_bound: None,
            cp1: None,
        })
    }

    pub fn fano_cp1(perturbation: Vec<f64>) -> Result<Self> {
        let geo = Cp1Geometry::new(perturbation.clone())?;
        Ok(ModelSpace {
            kind: SpaceKind::FanoCp1 { perturbation },
            real_dimension: 2,
            weight_sign_convention: Convention::Complex,
            ric_f_lower_bound: None,
            cp1: Some(geo),
        })
    }

    /// Test hook for the Gauss-Bonnet error path: area scaled off 4 pi.
    pub fn fano_cp1_with_area_factor(perturbation: Vec<f64>, factor: f64) -> Result<Self> {
        let geo = Cp1Geometry::with_area_factor(perturbation.clone(), factor)?;
        Ok(ModelSpace {
            kind: SpaceKind::FanoCp1 { perturbation },
            real_dimension: 2,
            weight_sign_convention: Convention::Complex,
            ric_f_lower_bound: None,
            cp1: Some(geo),
        })
    }

    /// Diagnostic copy with a deliberately different declared curvature bound.
    pub fn with_declared_bound(mut self, bound: f64) -> Self {
        self.ric_f_lower_bound = Some(bound);
        self
    }

    /// Sphere radius sqrt(2 (n - k - 1)) of the product catalog entry.
    pub fn product_sphere_radius(&self) -> Option<f64> {
        match self.kind {
            SpaceKind::SphereGaussianProduct { n, k } => {
                Some((2.0 * (n - k - 1) as f64).sqrt())
            }
            _ => None,
        }
    }
}

/// Parses a space descriptor of the mini-language "kind:key=val,key=val".
pub fn make_space(desc: &str) -> Result<ModelSpace> {
    let (kind, rest) = match desc.split_once(':') {
        Some((k, r)) => (k.trim(), r.trim()),
        None => (desc.trim(), ""),
    };
    let mut params: Vec<(&str, &str)> = Vec::new();
    if !rest.is_empty() {
        for part in rest.split(',') {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::ParameterOutOfRange(format!("malformed parameter `{part}`")))?;
            params.push((k.trim(), v.trim()));
        }
    }
    let get = |key: &str| params.iter().find(|(k, _)| *k == key).map(|(_, v)| *v);
    let parse_f = |key: &str, v: &str| -> Result<f64> {
        v.parse::<f64>()
            .map_err(|_| Error::ParameterOutOfRange(format!("{key} = `{v}` is not a number")))
    };
    let parse_u = |key: &str, v: &str| -> Result<usize> {
        v.parse::<usize>()
            .map_err(|_| Error::ParameterOutOfRange(format!("{key} = `{v}` is not an integer")))
    };
    match kind {
        "gaussian" => {
            let n = parse_u("n", get("n").unwrap_or("1"))?;
            let lambda = parse_f("lambda", get("lambda").unwrap_or("0.5"))?;
            ModelSpace::gaussian(n, lambda)
        }
        "sphere" => {
            let n = parse_u("n", get("n").unwrap_or("2"))?;
            let r = parse_f("r", get("r").unwrap_or("1"))?;
            let conv = match get("conv") {
                None | Some("real") => false,
                Some("complex") => true,
                Some(other) => {
                    return Err(Error::ParameterOutOfRange(format!(
                        "conv = `{other}` (expected real|complex)"
                    )))
                }
            };
            ModelSpace::round_sphere(n, r, conv)
        }
        "product" => {
            let n = parse_u("n", get("n").ok_or_else(|| {
                Error::ParameterOutOfRange("product requires n".into())
            })?)?;
            let k = parse_u("k", get("k").ok_or_else(|| {
                Error::ParameterOutOfRange("product requires k".into())
            })?)?;
            ModelSpace::sphere_gaussian_product(n, k)
        }
        "complex-gaussian" => {
            let n = parse_u("n", get("n").unwrap_or("1"))?;
            ModelSpace::complex_gaussian(n)
        }
        "fano-cp1" => {
            let pert: Vec<f64> = match get("pert") {
                None => vec![],
                Some("0") => vec![],
                Some(list) => list
                    .split('|')
                    .map(|v| parse_f("pert", v))
                    .collect::<Result<Vec<f64>>>()?,
            };
            ModelSpace::fano_cp1(pert)
        }
        other => Err(Error::UnknownKind(other.to_string())),
    }
}

/// Weight function value: f(point) for real spaces, F(point) for complex.
pub fn weight_at(space: &ModelSpace, point: &[f64]) -> Result<f64> {
    match &space.kind {
        SpaceKind::GaussianEuclidean { n, lambda } => {
            if point.len() != *n {
                return Err(Error::PointOutsideChart(format!(
                    "expected {n} coordinates, got {}",
                    point.len()
                )));
            }
            Ok(lambda / 2.0 * point.iter().map(|x| x * x).sum::<f64>())
        }
        SpaceKind::RoundSphere { .. } => {
            check_sphere_chart(&point[..2.min(point.len())])?;
            Ok(0.0)
        }
        SpaceKind::SphereGaussianProduct { n, k } => {
            if point.len() != 2 + k {
                return Err(Error::PointOutsideChart(format!(
                    "expected (theta, phi, t_1..t_{k}), got {} coordinates (n = {n})",
                    point.len()
                )));
            }
            check_sphere_chart(&point[..2])?;
            Ok(0.25 * point[2..].iter().map(|t| t * t).sum::<f64>())
        }
        SpaceKind::ComplexGaussian { n } => {
            if point.len() != 2 * n {
                return Err(Error::PointOutsideChart(format!(
                    "expected {} real coordinates for C^{n}",
                    2 * n
                )));
            }
            Ok(-point.iter().map(|x| x * x).sum::<f64>())
        }
        SpaceKind::FanoCp1 { .. } => {
            check_sphere_chart(&point[..2.min(point.len())])?;
            space.cp1.as_ref().unwrap().potential(point[0])
        }
    }
}

fn check_sphere_chart(point: &[f64]) -> Result<()> {
    if point.len() < 2 {
        return Err(Error::PointOutsideChart("expected (theta, phi)".into()));
    }
    let theta = point[0];
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::PointOutsideChart(format!("theta = {theta} outside [0, pi]")));
    }
    Ok(())
}

/// Density of the weighted measure relative to the Riemannian volume.
pub fn weight_density(space: &ModelSpace, point: &[f64]) -> Result<f64> {
    let w = weight_at(space, point)?;
    Ok(match space.weight_sign_convention {
        Convention::Real => (-w).exp(),
        Convention::Complex => w.exp(),
    })
}

const TRUNCATION_TAIL_TOL: f64 = 1e-10;

/// Weighted volume int e^{-f} dV (real) or int e^{F} dV (complex).
pub fn weighted_volume(space: &ModelSpace, rule: &QuadratureRule) -> Result<f64> {
    rule.require_positive_weights()?;
    // tail estimate for the noncompact charts: density at the farthest node
    // relative to its maximum must be below tolerance
    match &space.kind {
        SpaceKind::GaussianEuclidean { lambda, .. } => {
            let r = rule.max_radius();
            let ratio = (-lambda / 2.0 * r * r).exp();
            if ratio > TRUNCATION_TAIL_TOL {
                return Err(Error::TruncationInsufficient(ratio));
            }
        }
        SpaceKind::ComplexGaussian { .. } => {
            let r = rule.max_radius();
            let ratio = (-r * r).exp();
            if ratio > TRUNCATION_TAIL_TOL {
                return Err(Error::TruncationInsufficient(ratio));
            }
        }
        SpaceKind::SphereGaussianProduct { .. } => {
            let r = rule
                .nodes
                .iter()
                .map(|p| p[2..].iter().map(|t| t * t).sum::<f64>().sqrt())
                .fold(0.0, f64::max);
            let ratio = (-0.25 * r * r).exp();
            if ratio > TRUNCATION_TAIL_TOL {
                return Err(Error::TruncationInsufficient(ratio));
            }
        }
        _ => {}
    }
    let mut total = 0.0;
    for (node, w) in rule.nodes.iter().zip(&rule.weights) {
        total += w * weight_density(space, node)?;
    }
    Ok(total)
}

/// Default quadrature rule with a resolution knob (nodes per axis /
/// latitude points). The truncation radius of Gaussian charts comes from
/// the Gauss-Hermite rule itself and reaches the 1e-12 density target at
/// the default resolution.
pub fn default_rule(space: &ModelSpace, resolution: usize) -> QuadratureRule {
    match &space.kind {
        SpaceKind::GaussianEuclidean { n, lambda } => {
            let q = resolution.max(40);
            let axis = quad::hermite_lebesgue(q, *lambda);
            let axes: Vec<_> = (0..*n).map(|_| axis.clone()).collect();
            QuadratureRule::tensor(&axes, Chart::Euclidean { dim: *n })
        }
        SpaceKind::RoundSphere { radius, .. } => sphere_rule(*radius, resolution.max(64)),
        SpaceKind::SphereGaussianProduct { n, k } => {
            let radius = (2.0 * (n - k - 1) as f64).sqrt();
            let sph = sphere_rule(radius, resolution.max(48));
            let axis = quad::hermite_lebesgue(resolution.max(40), 0.5);
            let mut axes: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
            for _ in 0..*k {
                axes.push(axis.clone());
            }
            let flat = QuadratureRule::tensor(&axes, Chart::Euclidean { dim: *k });
            let mut nodes = Vec::with_capacity(sph.len() * flat.len());
            let mut weights = Vec::with_capacity(sph.len() * flat.len());
            for (sp, sw) in sph.nodes.iter().zip(&sph.weights) {
                for (fp, fw) in flat.nodes.iter().zip(&flat.weights) {
                    let mut node = sp.clone();
                    node.extend_from_slice(fp);
                    nodes.push(node);
                    weights.push(sw * fw);
                }
            }
            let mut axes = sph.axes.clone();
            axes.extend(flat.axes.clone());
            QuadratureRule { nodes, weights, chart: Chart::Euclidean { dim: *n }, axes }
        }
        SpaceKind::ComplexGaussian { n } => {
            let q = resolution.max(24);
            // e^{-|z|^2} = prod e^{-x^2} e^{-y^2}: lambda = 2 per real axis
            let axis = quad::hermite_lebesgue(q, 2.0);
            let axes: Vec<_> = (0..2 * n).map(|_| axis.clone()).collect();
            QuadratureRule::tensor(&axes, Chart::ComplexEuclidean { dim_c: *n })
        }
        SpaceKind::FanoCp1 { .. } => {
            let geo = space.cp1.as_ref().unwrap();
            let ntheta = resolution.max(200);
            let nphi = 2 * ntheta;
            let (theta, wt) = quad::gauss_legendre_on(ntheta, 0.0, PI);
            let mut nodes = Vec::with_capacity(ntheta * nphi);
            let mut weights = Vec::with_capacity(ntheta * nphi);
            let phis: Vec<f64> = (0..nphi).map(|j| 2.0 * PI * j as f64 / nphi as f64).collect();
            let wphi = vec![2.0 * PI / nphi as f64; nphi];
            for (t, w) in theta.iter().zip(&wt) {
                let dens = (2.0 * geo.psi(*t)).exp() * t.sin();
                for (phi, wp) in phis.iter().zip(&wphi) {
                    nodes.push(vec![*t, *phi]);
                    weights.push(w * dens * wp);
                }
            }
            // axes[0] holds the raw latitude rule (no conformal density)
            QuadratureRule {
                nodes,
                weights,
                chart: Chart::LatitudeLongitude,
                axes: vec![(theta, wt), (phis, wphi)],
            }
        }
    }
}

fn sphere_rule(radius: f64, nx: usize) -> QuadratureRule {
    // Gauss-Legendre in cos(theta), uniform in phi: exact for products of
    // spherical harmonics up to the rule order.
    let (x, wx) = quad::gauss_legendre(nx);
    let nphi = 2 * nx;
    let mut nodes = Vec::with_capacity(nx * nphi);
    let mut weights = Vec::with_capacity(nx * nphi);
    let r2 = radius * radius;
    let thetas: Vec<f64> = x.iter().map(|xi| xi.clamp(-1.0, 1.0).acos()).collect();
    let phis: Vec<f64> = (0..nphi).map(|j| 2.0 * PI * j as f64 / nphi as f64).collect();
    let wphi = vec![2.0 * PI / nphi as f64; nphi];
    for (theta, wi) in thetas.iter().zip(&wx) {
        for (phi, wp) in phis.iter().zip(&wphi) {
            nodes.push(vec![*theta, *phi]);
            weights.push(wi * r2 * wp);
        }
    }
    // axes[0]: latitude nodes with Gauss-Legendre-in-cos(theta) weights
    // (no r^2 factor); axes[1]: uniform longitude rule.
    QuadratureRule {
        nodes,
        weights,
        chart: Chart::Sphere { radius },
        axes: vec![(thetas, wx), (phis, wphi)],
    }
}

/// Catalog listing for the CLI: stable, sorted output.
pub fn list_spaces() -> String {
    let mut out = String::new();
    out.push_str("complex-gaussian  n=1..4                    F = -|z|^2, gradient shrinking Kaehler-Ricci soliton; lambda_1(Delta_F) = 1\n");
    out.push_str("fano-cp1          pert=a1|a2|...            S^1-invariant metric on CP^1, area 4*pi; lambda_1(Delta_F) = 1, closed-form spectrum at pert=0\n");
    out.push_str("gaussian          n=1..8, lambda>0          f = lambda |x|^2 / 2, Ric_f >= lambda; lambda_1 = lambda, Ornstein-Uhlenbeck spectrum k*lambda\n");
    out.push_str("product           n=k+2, k>=1               S^2(sqrt(2)) x R^k with f = |t|^2/4, Ric_f >= 1/2; lambda_1 = 1/2\n");
    out.push_str("sphere            n=2, r>0, conv=real|complex  round sphere, Ric >= 1/r^2; spectrum l(l+1)/r^2 (real) or l(l+1)/(2 r^2) (complex)\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn descriptor_examples_from_catalog() {
        let g = make_space("gaussian:n=2,lambda=0.5").unwrap();
        assert_eq!(g.real_dimension, 2);
        assert_eq!(g.ric_f_lower_bound, Some(0.5));
        assert_eq!(g.weight_sign_convention, Convention::Real);

        let p = make_space("product:n=3,k=1").unwrap();
        assert_abs_diff_eq!(p.product_sphere_radius().unwrap(), 2.0f64.sqrt(), epsilon = 1e-15);
        assert_eq!(p.ric_f_lower_bound, Some(0.5));

        match make_space("product:n=3,k=2") {
            Err(Error::ParameterOutOfRange(_)) => {}
            other => panic!("expected ParameterOutOfRange, got {other:?}"),
        }
        match make_space("nonsense:n=1") {
            Err(Error::UnknownKind(_)) => {}
            other => panic!("expected UnknownKind, got {other:?}"),
        }
    }

    #[test]
    fn weight_values_match_closed_forms() {
        let g = make_space("gaussian:n=2,lambda=0.5").unwrap();
        assert_abs_diff_eq!(weight_at(&g, &[2.0, 0.0]).unwrap(), 1.0, epsilon = 1e-15);

        let c = make_space("complex-gaussian:n=2").unwrap();
        // z = (1, 1): F = -|z|^2 = -2
        assert_abs_diff_eq!(weight_at(&c, &[1.0, 0.0, 1.0, 0.0]).unwrap(), -2.0, epsilon = 1e-15);

        let f = make_space("fano-cp1:pert=0").unwrap();
        for theta in [0.3, 1.2, 2.9] {
            assert_abs_diff_eq!(weight_at(&f, &[theta, 0.0]).unwrap(), 0.0, epsilon = 1e-10);
        }

        match weight_at(&g, &[1.0]) {
            Err(Error::PointOutsideChart(_)) => {}
            other => panic!("expected PointOutsideChart, got {other:?}"),
        }
    }

    #[test]
    fn weighted_volumes_match_oracles() {
        use std::f64::consts::PI;
        let g = make_space("gaussian:n=1,lambda=0.5").unwrap();
        let rule = default_rule(&g, 60);
        assert_abs_diff_eq!(
            weighted_volume(&g, &rule).unwrap(),
            (4.0 * PI).sqrt(),
            epsilon = 1e-10
        );

        let s = make_space("sphere:n=2,r=1").unwrap();
        let rule = default_rule(&s, 32);
        assert_abs_diff_eq!(weighted_volume(&s, &rule).unwrap(), 4.0 * PI, epsilon = 1e-10);

        let c = make_space("complex-gaussian:n=1").unwrap();
        let rule = default_rule(&c, 30);
        assert_abs_diff_eq!(weighted_volume(&c, &rule).unwrap(), PI, epsilon = 1e-10);
    }

    #[test]
    fn truncation_tail_is_policed() {
        let g = make_space("gaussian:n=1,lambda=0.5").unwrap();
        let axis = quad::hermite_lebesgue(6, 0.5);
        let rule = QuadratureRule::tensor(&[axis], Chart::Euclidean { dim: 1 });
        match weighted_volume(&g, &rule) {
            Err(Error::TruncationInsufficient(_)) => {}
            other => panic!("expected TruncationInsufficient, got {other:?}"),
        }
    }

    #[test]
    fn fano_area_is_4pi_for_admissible_perturbations() {
        use std::f64::consts::PI;
        for pert in [vec![], vec![0.1], vec![0.05, -0.08], vec![0.02, 0.03, -0.04]] {
            let s = ModelSpace::fano_cp1(pert).unwrap();
            let geo = s.cp1.as_ref().unwrap();
            assert_abs_diff_eq!(geo.area, 4.0 * PI, epsilon = 1e-10);
            // quadrature route agrees
            let rule = default_rule(&s, 200);
            let area = rule.weights.iter().sum::<f64>();
            assert_abs_diff_eq!(area, 4.0 * PI, epsilon = 1e-9);
        }
    }

    #[test]
    fn round_cp1_curvature_and_potential_vanish() {
        let s = ModelSpace::fano_cp1(vec![]).unwrap();
        let geo = s.cp1.as_ref().unwrap();
        for theta in [0.2, 1.0, 2.5] {
            assert_abs_diff_eq!(geo.curvature(theta), 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(geo.potential(theta).unwrap(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn morgan_finiteness_witnessed_on_positive_bound_entries() {
        for desc in ["gaussian:n=1,lambda=0.5", "gaussian:n=2,lambda=1.0", "product:n=3,k=1"] {
            let s = make_space(desc).unwrap();
            assert!(s.ric_f_lower_bound.unwrap() > 0.0);
            let rule = default_rule(&s, 40);
            let v = weighted_volume(&s, &rule).unwrap();
            assert!(v.is_finite() && v > 0.0, "{desc}: weighted volume {v}");
        }
    }
}
