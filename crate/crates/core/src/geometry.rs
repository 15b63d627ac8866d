//! Chart-level evaluators: spherical-harmonic series with latitude
//! derivatives up to third order, and latitude profiles of single
//! Fourier modes on CP^1.

use crate::special::{self, AssocLegendreTheta};

/// (l, m) ordering of the real spherical-harmonic basis, l ascending,
/// m = -l..=l within each l.
pub fn sphere_index(lmax: usize) -> Vec<(usize, i32)> {
    let mut idx = Vec::with_capacity((lmax + 1) * (lmax + 1));
    for l in 0..=lmax {
        for m in -(l as i32)..=(l as i32) {
            idx.push((l, m));
        }
    }
    idx
}

/// Real function on the 2-sphere expanded in orthonormal real harmonics
/// Y_{lm} = Pbar_l^{|m|}(cos theta) * Phi_m(phi), with Phi_0 = 1/sqrt(2 pi),
/// Phi_{m>0} = cos(m phi)/sqrt(pi), Phi_{m<0} = sin(|m| phi)/sqrt(pi).
#[derive(Debug, Clone)]
pub struct SphereSeries {
    pub lmax: usize,
    /// Coefficients in `sphere_index(lmax)` order.
    pub coeffs: Vec<f64>,
}

/// Partial derivatives d^a/d theta^a d^b/d phi^b for a + b <= 3.
#[derive(Debug, Clone, Default)]
pub struct SphereJet {
    /// d[a][b] = partial theta^a partial phi^b of u.
    pub d: [[f64; 4]; 4],
}

impl SphereSeries {
    pub fn single(lmax: usize, l: usize, m: i32) -> Self {
        let idx = sphere_index(lmax);
        let mut coeffs = vec![0.0; idx.len()];
        let pos = idx.iter().position(|&(ll, mm)| ll == l && mm == m).unwrap();
        coeffs[pos] = 1.0;
        SphereSeries { lmax, coeffs }
    }

    pub fn jet(&self, theta: f64, phi: f64) -> SphereJet {
        let mut tables: Vec<Option<AssocLegendreTheta>> = (0..=self.lmax).map(|_| None).collect();
        let mut jet = SphereJet::default();
        let idx = sphere_index(self.lmax);
        for (&(l, m), &c) in idx.iter().zip(&self.coeffs) {
            if c == 0.0 {
                continue;
            }
            let ma = m.unsigned_abs() as usize;
            if tables[ma].is_none() {
                tables[ma] = Some(special::assoc_legendre_theta(self.lmax, ma, theta));
            }
            let t = tables[ma].as_ref().unwrap();
            let i = l - ma;
            let pt = [t.val[i], t.d1[i], t.d2[i], t.d3[i]];
            let mf = ma as f64;
            // phi factor and phi-derivatives
            let norm = if m == 0 {
                1.0 / (2.0 * std::f64::consts::PI).sqrt()
            } else {
                1.0 / std::f64::consts::PI.sqrt()
            };
            let (c0, s0) = ((mf * phi).cos(), (mf * phi).sin());
            // base(b) = d^b/dphi^b of the trig factor
            let base = |b: usize| -> f64 {
                let pow = mf.powi(b as i32);
                let cycle = if m >= 0 {
                    // cos(m phi): cos, -sin, -cos, sin
                    match b % 4 {
                        0 => c0,
                        1 => -s0,
                        2 => -c0,
                        _ => s0,
                    }
                } else {
                    // sin(|m| phi): sin, cos, -sin, -cos
                    match b % 4 {
                        0 => s0,
                        1 => c0,
                        2 => -s0,
                        _ => -c0,
                    }
                };
                pow * cycle * norm
            };
            for a in 0..4 {
                for b in 0..4 - a {
                    jet.d[a][b] += c * pt[a] * base(b);
                }
            }
        }
        jet
    }

    pub fn eval(&self, theta: f64, phi: f64) -> f64 {
        self.jet(theta, phi).d[0][0]
    }
}

impl SphereJet {
    /// |grad u|^2 on a sphere of radius r.
    pub fn grad_sq(&self, theta: f64, r: f64) -> f64 {
        let s = theta.sin();
        (self.d[1][0] * self.d[1][0] + self.d[0][1] * self.d[0][1] / (s * s)) / (r * r)
    }

    /// Covariant Hessian components (theta-theta, theta-phi, phi-phi)
    /// in the latitude-longitude chart of a sphere of radius r
    /// (metric r^2 (d theta^2 + sin^2 theta d phi^2)).
    pub fn hessian(&self, theta: f64) -> (f64, f64, f64) {
        let s = theta.sin();
        let c = theta.cos();
        let htt = self.d[2][0];
        let htp = self.d[1][1] - (c / s) * self.d[0][1];
        let hpp = self.d[0][2] + s * c * self.d[1][0];
        (htt, htp, hpp)
    }

    /// |Hess u|^2 (squared Frobenius norm in the metric) on radius r.
    pub fn hessian_sq(&self, theta: f64, r: f64) -> f64 {
        let (htt, htp, hpp) = self.hessian(theta);
        let s2 = theta.sin().powi(2);
        let r4 = r.powi(4);
        (htt * htt + 2.0 * htp * htp / s2 + hpp * hpp / (s2 * s2)) / r4
    }

    /// Laplace-Beltrami of u at this point (sphere radius r).
    pub fn laplacian(&self, theta: f64, r: f64) -> f64 {
        let s = theta.sin();
        let c = theta.cos();
        (self.d[2][0] + (c / s) * self.d[1][0] + self.d[0][2] / (s * s)) / (r * r)
    }
}

/// Latitude profile of a single Fourier mode u = U(theta) e^{i m phi} on
/// CP^1, expanded in normalized associated Legendre functions
/// Pbar_l^{|m|}(cos theta), l = |m|..lmax.
#[derive(Debug, Clone)]
pub struct Cp1Mode {
    pub m: i32,
    pub lmax: usize,
    /// Coefficients over l = |m|..=lmax (may be complex-scaled outside;
    /// a single mode's profile can be taken real without loss).
    pub coeffs: Vec<f64>,
}

/// U, U_theta, U_theta_theta at a latitude node.
#[derive(Debug, Clone, Copy, Default)]
pub struct ProfileJet {
    pub u: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Cp1Mode {
    pub fn jet(&self, theta: f64) -> ProfileJet {
        let ma = self.m.unsigned_abs() as usize;
        let t = special::assoc_legendre_theta(self.lmax, ma, theta);
        let mut out = ProfileJet::default();
        for (i, c) in self.coeffs.iter().enumerate() {
            if *c == 0.0 {
                continue;
            }
            out.u += c * t.val[i];
            out.d1 += c * t.d1[i];
            out.d2 += c * t.d2[i];
        }
        out
    }
}
