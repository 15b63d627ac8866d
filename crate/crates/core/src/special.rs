//! Orthogonal polynomial evaluation: probabilists' Hermite, Legendre and
//! normalized associated Legendre functions with latitude derivatives.

/// Values of He_0..He_deg at `x` (probabilists' convention,
/// He_{k+1} = x He_k - k He_{k-1}).
pub fn hermite_he(deg: usize, x: f64) -> Vec<f64> {
    let mut v = Vec::with_capacity(deg + 1);
    v.push(1.0);
    if deg >= 1 {
        v.push(x);
    }
    for k in 1..deg {
        let next = x * v[k] - (k as f64) * v[k - 1];
        v.push(next);
    }
    v
}

/// Values of the orthonormal Hermite functions h_k = He_k / sqrt(k!)
/// together with first and second derivatives, h_k' = sqrt(k) h_{k-1}.
pub fn hermite_orthonormal(deg: usize, x: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut h = Vec::with_capacity(deg + 1);
    h.push(1.0);
    if deg >= 1 {
        h.push(x);
    }
    // normalized recurrence: h_{k+1} = (x h_k - sqrt(k) h_{k-1}) / sqrt(k+1)
    for k in 1..deg {
        let kf = k as f64;
        let next = (x * h[k] - kf.sqrt() * h[k - 1]) / (kf + 1.0).sqrt();
        h.push(next);
    }
    let mut d1 = vec![0.0; deg + 1];
    let mut d2 = vec![0.0; deg + 1];
    for k in 1..=deg {
        d1[k] = (k as f64).sqrt() * h[k - 1];
    }
    for k in 2..=deg {
        d2[k] = ((k * (k - 1)) as f64).sqrt() * h[k - 2];
    }
    (h, d1, d2)
}

/// Legendre polynomials P_0..P_lmax at `x`.
pub fn legendre(lmax: usize, x: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(lmax + 1);
    p.push(1.0);
    if lmax >= 1 {
        p.push(x);
    }
    for l in 1..lmax {
        let lf = l as f64;
        let next = ((2.0 * lf + 1.0) * x * p[l] - lf * p[l - 1]) / (lf + 1.0);
        p.push(next);
    }
    p
}

/// Legendre values and x-derivatives, via (1-x^2) P_l' = l (P_{l-1} - x P_l).
pub fn legendre_with_deriv(lmax: usize, x: f64) -> (Vec<f64>, Vec<f64>) {
    let p = legendre(lmax, x);
    let mut dp = vec![0.0; lmax + 1];
    let om = 1.0 - x * x;
    for l in 1..=lmax {
        let lf = l as f64;
        dp[l] = lf * (p[l - 1] - x * p[l]) / om;
    }
    (p, dp)
}

/// Normalized associated Legendre functions Pbar_l^m(cos theta) for
/// l = m..lmax, normalized so that int_{-1}^{1} Pbar^2 dx = 1.
/// Condon-Shortley phase omitted. Returns values indexed by l - m.
pub fn assoc_legendre_norm(lmax: usize, m: usize, x: f64) -> Vec<f64> {
    assert!(m <= lmax);
    let s2 = (1.0 - x * x).max(0.0);
    let s = s2.sqrt();
    // seed: Pbar_m^m = sqrt((2m+1)/2 * prod (2j-1)/(2j)) * s^m
    let mut amp = (2.0 * m as f64 + 1.0) / 2.0;
    for j in 1..=m {
        amp *= (2.0 * j as f64 - 1.0) / (2.0 * j as f64);
    }
    let mut out = Vec::with_capacity(lmax - m + 1);
    let pmm = amp.sqrt() * s.powi(m as i32);
    out.push(pmm);
    if lmax == m {
        return out;
    }
    // Pbar_{m+1}^m = sqrt(2m+3) x Pbar_m^m
    out.push((2.0 * m as f64 + 3.0).sqrt() * x * pmm);
    for l in (m + 2)..=lmax {
        let lf = l as f64;
        let mf = m as f64;
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let b = (((2.0 * lf + 1.0) * ((lf - 1.0) * (lf - 1.0) - mf * mf))
            / ((2.0 * lf - 3.0) * (lf * lf - mf * mf)))
            .sqrt();
        let next = a * x * out[l - 1 - m] - b * out[l - 2 - m];
        out.push(next);
    }
    out
}

/// Normalized associated Legendre values plus theta-derivatives up to
/// third order, evaluated at interior latitude `theta` (0 < theta < pi).
///
/// Second and third derivatives come from the associated Legendre ODE
/// y'' = -cot(theta) y' + (m^2/sin^2 - l(l+1)) y.
pub struct AssocLegendreTheta {
    pub val: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
    pub d3: Vec<f64>,
    pub m: usize,
    pub lmax: usize,
}

pub fn assoc_legendre_theta(lmax: usize, m: usize, theta: f64) -> AssocLegendreTheta {
    let x = theta.cos();
    let s = theta.sin();
    let val = assoc_legendre_norm(lmax, m, x);
    let n = val.len();
    let mut d1 = vec![0.0; n];
    // dPbar/dtheta = (l x Pbar_l - c_lm Pbar_{l-1}) / sin(theta)
    // with c_lm = sqrt((l^2 - m^2)(2l+1)/(2l-1)).
    for (i, l) in (m..=lmax).enumerate() {
        let lf = l as f64;
        let mf = m as f64;
        if l == m {
            // Pbar_m^m ~ sin^m: dPbar_m^m/dtheta = m cot(theta) Pbar_m^m
            d1[i] = mf * (x / s) * val[i];
        } else {
            let c = ((lf * lf - mf * mf) * (2.0 * lf + 1.0) / (2.0 * lf - 1.0)).sqrt();
            d1[i] = (lf * x * val[i] - c * val[i - 1]) / s;
        }
    }
    let cot = x / s;
    let csc2 = 1.0 / (s * s);
    let mf2 = (m * m) as f64;
    let mut d2 = vec![0.0; n];
    let mut d3 = vec![0.0; n];
    for (i, l) in (m..=lmax).enumerate() {
        let big_l = (l * (l + 1)) as f64;
        d2[i] = -cot * d1[i] + (mf2 * csc2 - big_l) * val[i];
        d3[i] = csc2 * d1[i] - cot * d2[i] + (mf2 * csc2 - big_l) * d1[i]
            - 2.0 * mf2 * x * csc2 / s * val[i];
    }
    AssocLegendreTheta { val, d1, d2, d3, m, lmax }
}
