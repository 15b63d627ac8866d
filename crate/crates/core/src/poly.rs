//! Small multivariate polynomial algebra used for symbolic test functions:
//! real polynomials on R^n and (z, zbar)-polynomials on C^n, with exact
//! Gaussian moment integration.

use std::collections::BTreeMap;

use num_complex::Complex64;

/// Real polynomial in n variables, sparse multi-index representation.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    pub nvars: usize,
    pub terms: BTreeMap<Vec<u32>, f64>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        let mut p = Self::zero(nvars);
        if c != 0.0 {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut p = Self::zero(nvars);
        let mut idx = vec![0u32; nvars];
        idx[i] = 1;
        p.terms.insert(idx, 1.0);
        p
    }

    pub fn monomial(nvars: usize, exps: &[u32], c: f64) -> Self {
        assert_eq!(exps.len(), nvars);
        let mut p = Self::zero(nvars);
        if c != 0.0 {
            p.terms.insert(exps.to_vec(), c);
        }
        p
    }

    pub fn add_term(&mut self, exps: Vec<u32>, c: f64) {
        let entry = self.terms.entry(exps).or_insert(0.0);
        *entry += c;
        if *entry == 0.0 {
            // keep the map canonical
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            *out.terms.entry(e.clone()).or_insert(0.0) += c;
        }
        out.prune()
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c *= s;
        }
        out.prune()
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut out = Self::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                *out.terms.entry(e).or_insert(0.0) += ca * cb;
            }
        }
        out.prune()
    }

    pub fn deriv(&self, i: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut en = e.clone();
                en[i] -= 1;
                *out.terms.entry(en).or_insert(0.0) += c * e[i] as f64;
            }
        }
        out.prune()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                c * e
                    .iter()
                    .zip(x)
                    .map(|(k, xi)| xi.powi(*k as i32))
                    .product::<f64>()
            })
            .sum()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    fn prune(mut self) -> Self {
        self.terms.retain(|_, c| *c != 0.0);
        self
    }

    /// Exact integral against the Gaussian density e^{-lambda |x|^2 / 2} dx.
    pub fn gaussian_integral(&self, lambda: f64) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c * e.iter().map(|k| gaussian_moment_1d(*k, lambda)).product::<f64>())
            .sum()
    }
}

/// int x^k e^{-lambda x^2 / 2} dx over R.
pub fn gaussian_moment_1d(k: u32, lambda: f64) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    let a = lambda / 2.0;
    let mut val = (std::f64::consts::PI / a).sqrt();
    // double factorial ladder: int x^{2m} = (2m-1)!! / (2a)^m * sqrt(pi/a)
    let m = (k / 2) as i64;
    for j in 1..=m {
        val *= (2 * j - 1) as f64 / (2.0 * a);
    }
    val
}

/// Complex polynomial in z_1..z_n and their conjugates.
#[derive(Debug, Clone, PartialEq)]
pub struct CPoly {
    pub nvars: usize,
    pub terms: BTreeMap<(Vec<u32>, Vec<u32>), Complex64>,
}

impl CPoly {
    pub fn zero(nvars: usize) -> Self {
        CPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Complex64) -> Self {
        let mut p = Self::zero(nvars);
        if c != Complex64::ZERO {
            p.terms.insert((vec![0; nvars], vec![0; nvars]), c);
        }
        p
    }

    /// z^alpha zbar^beta monomial.
    pub fn monomial(nvars: usize, alpha: &[u32], beta: &[u32], c: Complex64) -> Self {
        assert_eq!(alpha.len(), nvars);
        assert_eq!(beta.len(), nvars);
        let mut p = Self::zero(nvars);
        if c != Complex64::ZERO {
            p.terms.insert((alpha.to_vec(), beta.to_vec()), c);
        }
        p
    }

    pub fn z(nvars: usize, i: usize) -> Self {
        let mut a = vec![0u32; nvars];
        a[i] = 1;
        Self::monomial(nvars, &a, &vec![0; nvars], Complex64::ONE)
    }

    pub fn zbar(nvars: usize, i: usize) -> Self {
        let mut b = vec![0u32; nvars];
        b[i] = 1;
        Self::monomial(nvars, &vec![0; nvars], &b, Complex64::ONE)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            *out.terms.entry(e.clone()).or_insert(Complex64::ZERO) += c;
        }
        out.prune()
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-Complex64::ONE))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c *= s;
        }
        out.prune()
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut out = Self::zero(self.nvars);
        for ((aa, ab), ca) in &self.terms {
            for ((ba, bb), cb) in &other.terms {
                let ea: Vec<u32> = aa.iter().zip(ba).map(|(x, y)| x + y).collect();
                let eb: Vec<u32> = ab.iter().zip(bb).map(|(x, y)| x + y).collect();
                *out.terms.entry((ea, eb)).or_insert(Complex64::ZERO) += ca * cb;
            }
        }
        out.prune()
    }

    /// Complex conjugate: swaps alpha and beta, conjugates coefficients.
    pub fn conj(&self) -> Self {
        let mut out = Self::zero(self.nvars);
        for ((a, b), c) in &self.terms {
            out.terms.insert((b.clone(), a.clone()), c.conj());
        }
        out
    }

    /// d/dz_i (Wirtinger derivative).
    pub fn dz(&self, i: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for ((a, b), c) in &self.terms {
            if a[i] > 0 {
                let mut an = a.clone();
                an[i] -= 1;
                *out.terms.entry((an, b.clone())).or_insert(Complex64::ZERO) +=
                    c * a[i] as f64;
            }
        }
        out.prune()
    }

    /// d/dzbar_i.
    pub fn dzbar(&self, i: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for ((a, b), c) in &self.terms {
            if b[i] > 0 {
                let mut bn = b.clone();
                bn[i] -= 1;
                *out.terms.entry((a.clone(), bn)).or_insert(Complex64::ZERO) +=
                    c * b[i] as f64;
            }
        }
        out.prune()
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        self.terms
            .iter()
            .map(|((a, b), c)| {
                let mut v = *c;
                for (i, zi) in z.iter().enumerate() {
                    v *= zi.powu(a[i]) * zi.conj().powu(b[i]);
                }
                v
            })
            .sum()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|(a, b)| a.iter().sum::<u32>() + b.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    fn prune(mut self) -> Self {
        self.terms.retain(|_, c| *c != Complex64::ZERO);
        self
    }

    /// Exact integral against e^{-|z|^2} dV over C^n:
    /// int z^a zbar^b e^{-|z|^2} = pi^n * a! when a = b, else 0.
    pub fn fock_integral(&self) -> Complex64 {
        let mut total = Complex64::ZERO;
        for ((a, b), c) in &self.terms {
            if a == b {
                let mut v = std::f64::consts::PI.powi(self.nvars as i32);
                for ai in a {
                    v *= factorial(*ai);
                }
                total += c * v;
            }
        }
        total
    }
}

pub fn factorial(k: u32) -> f64 {
    (1..=k).map(|j| j as f64).product()
}
