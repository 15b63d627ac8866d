//! The eigenfunction <-> holomorphic-vector-field correspondence:
//! grad' fields, dbar defects certifying holomorphy, and the Futaki
//! character evaluated both from 1-eigenfunctions and from the Ricci
//! potential.
//!
//! On C^n with the flat metric the field attached to u is simply
//! X^i = du/dzbar_i, and all norms are exact Fock-moment sums.  On a
//! zonal CP^1 instance every quantity reduces to 1-D theta integrals
//! per Fourier weight m; in the stereographic chart w = s + i phi,
//! ds = d theta / sin theta, the metric coefficient is
//! g_{w wbar} = rho / 2 with rho = e^{2 psi} sin^2 theta, so
//! X^w = (U_s - m U) / rho per mode and
//! nabla''nabla'' u = (1/4)[W_s - m W - (log rho)_s W] dwbar^2 / ...
//! with W = U_s - m U.

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::Cp1Mode;
use crate::poly::CPoly;
use crate::quad::QuadratureRule;
use crate::spaces::{Convention, ModelSpace, SpaceKind};

/// Membership gate for the lambda = 1 cluster, relative to |u|.
pub const ONE_EIGEN_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct VectorFieldSamples {
    /// components[i][k] = X^i at the k-th quadrature node.
    pub components: Vec<Vec<Complex64>>,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct HolomorphyReport {
    /// Weighted L^2 norm of nabla'' nabla'' u.
    pub dbar_defect: f64,
    /// Weighted L^2 norm of Delta_F u + u.
    pub eigen_residual: f64,
    pub tolerance: f64,
    pub verdict: &'static str,
}

impl HolomorphyReport {
    pub fn pass(&self) -> bool {
        self.verdict == "PASS"
    }
}

/// Symbolic or mode-expanded inputs accepted by this module.
#[derive(Debug, Clone)]
pub enum HoloFunction {
    /// Polynomial in (z, zbar) on a ComplexGaussian space.
    Cn(CPoly),
    /// Fourier modes on a FanoCp1 instance; a complex scalar multiplies
    /// each real-profile mode.
    Cp1(Vec<(Complex64, Cp1Mode)>),
}

fn require_complex(space: &ModelSpace) -> Result<()> {
    if space.weight_sign_convention != Convention::Complex {
        return Err(Error::Unsupported(
            "holomorphic-field analysis needs a complex-convention space".into(),
        ));
    }
    Ok(())
}

struct Cp1Env<'a> {
    geo: &'a crate::spaces::Cp1Geometry,
    theta: Vec<f64>,
    dtheta_w: Vec<f64>,
}

fn cp1_env<'a>(space: &'a ModelSpace, rule: &QuadratureRule) -> Result<Cp1Env<'a>> {
    if !matches!(space.kind, SpaceKind::FanoCp1 { .. }) {
        return Err(Error::Unsupported("expected a fano-cp1 space".into()));
    }
    let geo = space.cp1.as_ref().ok_or(Error::PotentialUnavailable)?;
    let (theta, dtheta_w) = rule
        .axes
        .first()
        .cloned()
        .ok_or_else(|| Error::Unsupported("rule carries no latitude axis".into()))?;
    Ok(Cp1Env { geo, theta, dtheta_w })
}

/// X = grad' u = g^{i jbar} (du/dzbar_j) d/dz_i sampled at the rule
/// nodes.
pub fn grad_prime(
    space: &ModelSpace,
    u: &HoloFunction,
    rule: &QuadratureRule,
) -> Result<VectorFieldSamples> {
    require_complex(space)?;
    match (&space.kind, u) {
        (SpaceKind::ComplexGaussian { n }, HoloFunction::Cn(p)) => {
            if p.nvars != *n {
                return Err(Error::SymbolicDerivativeUnavailable(format!(
                    "polynomial in {} complex variables on C^{n}",
                    p.nvars
                )));
            }
            let mut components = Vec::with_capacity(*n);
            for i in 0..*n {
                let d = p.dzbar(i);
                components.push(
                    rule.nodes
                        .iter()
                        .map(|x| {
                            let z: Vec<Complex64> = (0..*n)
                                .map(|j| Complex64::new(x[2 * j], x[2 * j + 1]))
                                .collect();
                            d.eval(&z)
                        })
                        .collect(),
                );
            }
            Ok(VectorFieldSamples { components })
        }
        (SpaceKind::FanoCp1 { .. }, HoloFunction::Cp1(modes)) => {
            let geo = space.cp1.as_ref().ok_or(Error::PotentialUnavailable)?;
            let mut vals = vec![Complex64::ZERO; rule.len()];
            for (node, out) in rule.nodes.iter().zip(vals.iter_mut()) {
                let (theta, phi) = (node[0], node[1]);
                let s = theta.sin();
                let rho = (2.0 * geo.psi(theta)).exp() * s * s;
                for (c, mode) in modes {
                    let jet = mode.jet(theta);
                    let w = s * jet.d1 - mode.m as f64 * jet.u;
                    let phase = Complex64::new(0.0, mode.m as f64 * phi).exp();
                    *out += c * phase * (w / rho);
                }
            }
            Ok(VectorFieldSamples { components: vec![vals] })
        }
        _ => Err(Error::IncompatibleBasis {
            basis: "holomorphic input".into(),
            space: space.kind.name().into(),
        }),
    }
}

/// L^2(d mu) norms of nabla'' nabla'' u and of Delta_F u + u.
pub fn holomorphy_defect(
    space: &ModelSpace,
    u: &HoloFunction,
    rule: &QuadratureRule,
) -> Result<HolomorphyReport> {
    require_complex(space)?;
    let (defect_sq, residual_sq) = match (&space.kind, u) {
        (SpaceKind::ComplexGaussian { n }, HoloFunction::Cn(p)) => {
            if p.nvars != *n {
                return Err(Error::SymbolicDerivativeUnavailable(format!(
                    "polynomial in {} complex variables on C^{n}",
                    p.nvars
                )));
            }
            // flat metric: nabla''nabla'' u has entries d2u/dzbar_i dzbar_j
            let mut defect_sq = 0.0;
            for i in 0..*n {
                for j in 0..*n {
                    let h = p.dzbar(i).dzbar(j);
                    defect_sq += h.mul(&h.conj()).fock_integral().re;
                }
            }
            let mut lap = CPoly::zero(*n);
            for i in 0..*n {
                let dzb = p.dzbar(i);
                lap = lap.add(&dzb.dz(i));
                lap = lap.sub(&CPoly::zbar(*n, i).mul(&dzb));
            }
            let r = lap.add(p);
            (defect_sq, r.mul(&r.conj()).fock_integral().re)
        }
        (SpaceKind::FanoCp1 { .. }, HoloFunction::Cp1(modes)) => {
            let env = cp1_env(space, rule)?;
            let geo = env.geo;
            let mut defect_sq = 0.0;
            let mut residual_sq = 0.0;
            for (c, mode) in modes {
                let m = mode.m as f64;
                let amp = c.norm_sqr();
                for (&theta, &wq) in env.theta.iter().zip(&env.dtheta_w) {
                    let s = theta.sin();
                    let e2psi = (2.0 * geo.psi(theta)).exp();
                    let rho = e2psi * s * s;
                    let ef = geo.potential(theta)?.exp();
                    let jet = mode.jet(theta);
                    // s-derivatives: d/ds = sin(theta) d/d theta
                    let us = s * jet.d1;
                    let uss = s * (theta.cos() * jet.d1 + s * jet.d2);
                    let w = us - m * jet.u;
                    let ws = uss - m * us;
                    let logrho_s = 2.0 * s * geo.dpsi_dtheta(theta) + 2.0 * theta.cos();
                    let bracket = ws - m * w - logrho_s * w;
                    // |nabla''nabla''u|^2 = bracket^2 / (4 rho^2) * g^{ww}g^{ww}
                    // collapsed against dV = rho ds dphi: one rho survives
                    defect_sq += amp * 2.0 * PI * wq / s * (bracket * bracket) / (4.0 * rho) * ef;
                    let fs = s * geo.potential_dtheta(theta)?;
                    let lap = (uss - m * m * jet.u) / (2.0 * rho) + fs * w / (2.0 * rho);
                    let r = lap + jet.u;
                    residual_sq += amp * 2.0 * PI * wq * s * e2psi * ef * r * r;
                }
            }
            (defect_sq, residual_sq)
        }
        _ => {
            return Err(Error::IncompatibleBasis {
                basis: "holomorphic input".into(),
                space: space.kind.name().into(),
            })
        }
    };
    let dbar_defect = defect_sq.max(0.0).sqrt();
    let eigen_residual = residual_sq.max(0.0).sqrt();
    let tolerance = ONE_EIGEN_TOL;
    let verdict =
        if dbar_defect <= tolerance && eigen_residual <= tolerance { "PASS" } else { "FAIL" };
    Ok(HolomorphyReport { dbar_defect, eigen_residual, tolerance, verdict })
}

fn norm_weighted(space: &ModelSpace, u: &HoloFunction, rule: &QuadratureRule) -> Result<f64> {
    match (&space.kind, u) {
        (SpaceKind::ComplexGaussian { .. }, HoloFunction::Cn(p)) => {
            Ok(p.mul(&p.conj()).fock_integral().re.max(0.0).sqrt())
        }
        (SpaceKind::FanoCp1 { .. }, HoloFunction::Cp1(modes)) => {
            let env = cp1_env(space, rule)?;
            let mut total = 0.0;
            for (c, mode) in modes {
                for (&theta, &wq) in env.theta.iter().zip(&env.dtheta_w) {
                    let s = theta.sin();
                    let e2psi = (2.0 * env.geo.psi(theta)).exp();
                    let ef = env.geo.potential(theta)?.exp();
                    let jet = mode.jet(theta);
                    total += c.norm_sqr() * 2.0 * PI * wq * s * e2psi * ef * jet.u * jet.u;
                }
            }
            Ok(total.max(0.0).sqrt())
        }
        _ => Err(Error::Unsupported("unsupported norm input".into())),
    }
}

/// f(X) = -int u omega^m on the 1-eigenfunction u attached to X.
pub fn futaki_from_eigenfunction(
    space: &ModelSpace,
    u: &HoloFunction,
    rule: &QuadratureRule,
) -> Result<Complex64> {
    require_complex(space)?;
    if matches!(space.kind, SpaceKind::ComplexGaussian { .. }) {
        return Err(Error::Unsupported(
            "the Futaki character needs a compact space; C^n has infinite volume".into(),
        ));
    }
    let report = holomorphy_defect(space, u, rule)?;
    let scale = norm_weighted(space, u, rule)?.max(1e-300);
    let relative = report.eigen_residual / scale;
    if relative > ONE_EIGEN_TOL {
        return Err(Error::NotOneEigenfunction(relative));
    }
    let env = cp1_env(space, rule)?;
    let modes = match u {
        HoloFunction::Cp1(modes) => modes,
        HoloFunction::Cn(_) => unreachable!("guarded above"),
    };
    // only m = 0 modes survive the phi integral
    let mut total = Complex64::ZERO;
    for (c, mode) in modes.iter().filter(|(_, m)| m.m == 0) {
        for (&theta, &wq) in env.theta.iter().zip(&env.dtheta_w) {
            let e2psi = (2.0 * env.geo.psi(theta)).exp();
            total -= c * 2.0 * PI * wq * theta.sin() * e2psi * mode.jet(theta).u;
        }
    }
    Ok(total)
}

/// f(X) = int (X F) omega^m with F the Ricci potential, for the field
/// X = grad' u.
pub fn futaki_from_potential(
    space: &ModelSpace,
    u: &HoloFunction,
    rule: &QuadratureRule,
) -> Result<Complex64> {
    require_complex(space)?;
    let env = cp1_env(space, rule)?;
    let modes = match u {
        HoloFunction::Cp1(modes) => modes,
        HoloFunction::Cn(_) => {
            return Err(Error::Unsupported("potential route is specific to fano-cp1".into()))
        }
    };
    // X F = X^w F_w; the phi integral kills every m != 0 mode, and for
    // m = 0 the conformal factors cancel:
    //   int XF dV = 2 pi int (U_s / rho)(F_s / 2) rho ds
    //            = pi int U' F' sin(theta) d theta
    let mut total = Complex64::ZERO;
    for (c, mode) in modes.iter().filter(|(_, m)| m.m == 0) {
        for (&theta, &wq) in env.theta.iter().zip(&env.dtheta_w) {
            let fp = env.geo.potential_dtheta(theta)?;
            total += c * PI * wq * mode.jet(theta).d1 * fp * theta.sin();
        }
    }
    Ok(total)
}

/// Gram matrix of grad' fields in the (unweighted) L^2 metric pairing,
/// used to certify that distinct 1-eigenfunctions map to independent
/// fields.
pub fn field_gram(
    space: &ModelSpace,
    us: &[HoloFunction],
    rule: &QuadratureRule,
) -> Result<DMatrix<Complex64>> {
    let fields: Vec<VectorFieldSamples> =
        us.iter().map(|u| grad_prime(space, u, rule)).collect::<Result<_>>()?;
    let metric_ww: Vec<f64> = match &space.kind {
        SpaceKind::FanoCp1 { .. } => {
            let geo = space.cp1.as_ref().ok_or(Error::PotentialUnavailable)?;
            rule.nodes
                .iter()
                .map(|p| (2.0 * geo.psi(p[0])).exp() * p[0].sin().powi(2) / 2.0)
                .collect()
        }
        SpaceKind::ComplexGaussian { .. } => vec![1.0; rule.len()],
        _ => return Err(Error::Unsupported("field pairing needs a complex space".into())),
    };
    let k = fields.len();
    let mut gram = DMatrix::zeros(k, k);
    for a in 0..k {
        for b in 0..k {
            let mut acc = Complex64::ZERO;
            for comp in 0..fields[a].components.len() {
                for (i, &w) in rule.weights.iter().enumerate() {
                    acc += w
                        * metric_ww[i]
                        * fields[a].components[comp][i]
                        * fields[b].components[comp][i].conj();
                }
            }
            gram[(a, b)] = acc;
        }
    }
    Ok(gram)
}
