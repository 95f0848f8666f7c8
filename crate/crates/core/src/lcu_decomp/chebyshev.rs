use super::{LcuDecomposition, LcuTerm, Phase, UnitaryDescriptor};
use crate::error::{Error, Result};

fn ln_binomial(n: usize, k: usize) -> f64 {
    libm::lgamma(n as f64 + 1.0) - libm::lgamma(k as f64 + 1.0) - libm::lgamma((n - k) as f64 + 1.0)
}

/// Coefficients of the degree-d Chebyshev truncation of x^t. Entry ℓ
/// multiplies T_{2ℓ} for even t and T_{2ℓ+1} for odd t; all are
/// non-negative. For d ≥ t the expansion is exact.
pub fn chebyshev_power_coeffs(t: usize, d: usize) -> Vec<f64> {
    let d = d.min(t);
    if t.is_multiple_of(2) {
        let half = t / 2;
        (0..=d / 2)
            .map(|l| {
                let lb = ln_binomial(t, half + l) - t as f64 * std::f64::consts::LN_2;
                if l == 0 { lb.exp() } else { (lb + std::f64::consts::LN_2).exp() }
            })
            .collect()
    } else {
        if d == 0 {
            return Vec::new();
        }
        let half = t.div_ceil(2);
        (0..=(d - 1) / 2)
            .map(|l| (ln_binomial(t, half + l) + (1.0 - t as f64) * std::f64::consts::LN_2).exp())
            .collect()
    }
}

/// Exponent of T attached to entry ℓ of [`chebyshev_power_coeffs`].
pub fn power_exponent(t: usize, l: usize) -> usize {
    if t.is_multiple_of(2) { 2 * l } else { 2 * l + 1 }
}

/// Smallest degree with 2e^{−d²/2t} ≤ eps, which bounds the sup error of the
/// truncated expansion of x^t on [−1, 1].
pub fn power_degree(t: usize, eps: f64) -> usize {
    if t == 0 {
        return 0;
    }
    (2.0 * t as f64 * (2.0 / eps).ln()).sqrt().ceil() as usize
}

/// q_{t/2}(1−2x²) ≈ e^{−tx²}.
pub fn gaussian_poly_eval(t: f64, eps: f64, x: f64) -> Result<f64> {
    Ok(gaussian_poly_coeffs(t, eps)?.eval(x))
}

/// Σ_e a_e T_e(x) by Clenshaw recurrence.
pub fn chebyshev_eval(a: &[f64], x: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &c in a.iter().skip(1).rev() {
        let b0 = 2.0 * x * b1 - b2 + c;
        b2 = b1;
        b1 = b0;
    }
    a.first().copied().unwrap_or(0.0) + x * b1 - b2
}

/// Dense coefficient vector (by T-exponent) of the truncated power.
fn power_dense(t: usize, d: usize) -> Vec<f64> {
    let c = chebyshev_power_coeffs(t, d);
    let mut out = vec![0.0; c.len().checked_sub(1).map(|l| power_exponent(t, l) + 1).unwrap_or(0)];
    for (l, v) in c.iter().enumerate() {
        out[power_exponent(t, l)] = *v;
    }
    out
}

fn walk_lcu(dense: &[f64]) -> Result<LcuDecomposition> {
    let terms: Vec<LcuTerm> = dense
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != 0.0)
        .map(|(e, c)| LcuTerm {
            coeff: c.abs(),
            unitary: UnitaryDescriptor::WalkPower { exponent: e, phase: if *c < 0.0 { Phase::MinusOne } else { Phase::One } },
        })
        .collect();
    LcuDecomposition::new(terms)
}

/// Σ_ℓ c_ℓ V^{e_ℓ}, whose top-left block is the truncated power of the
/// discriminant.
pub fn chebyshev_power_lcu(t: usize, d: usize) -> Result<LcuDecomposition> {
    walk_lcu(&power_dense(t, d))
}

/// Polynomial approximation of e^{t(x−1)} on [−1, 1] built from a Poisson
/// mixture of truncated powers.
#[derive(Clone, Debug)]
pub struct ExpPoly {
    pub t: f64,
    pub eps: f64,
    pub d: usize,
    pub d_prime: usize,
    /// e^{−t} t^j / j! for j = 0..=d.
    pub poisson: Vec<f64>,
    /// Coefficient of T_e for e = 0..=min(d, d').
    pub coeffs: Vec<f64>,
}

pub fn poisson_weights(t: f64, d: usize) -> Vec<f64> {
    (0..=d)
        .map(|j| {
            if t == 0.0 {
                if j == 0 { 1.0 } else { 0.0 }
            } else {
                (-t + j as f64 * t.ln() - libm::lgamma(j as f64 + 1.0)).exp()
            }
        })
        .collect()
}

fn exp_poly_with(t: f64, eps: f64, d: usize, d_prime: usize) -> ExpPoly {
    let poisson = poisson_weights(t, d);
    let mut coeffs = vec![0.0; d.min(d_prime) + 1];
    for (j, w) in poisson.iter().enumerate() {
        if *w == 0.0 {
            continue;
        }
        for (e, c) in power_dense(j, d_prime).iter().enumerate() {
            coeffs[e] += w * c;
        }
    }
    ExpPoly { t, eps, d, d_prime, poisson, coeffs }
}

/// d = ⌈max{te², ln(2/ε)}⌉ and d' = ⌈√(2d ln(4/ε))⌉.
pub fn exp_poly_coeffs(t: f64, eps: f64) -> Result<ExpPoly> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Precondition(format!("t = {t} must be finite and non-negative")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Precondition(format!("epsilon = {eps} must lie in (0, 1)")));
    }
    let e2 = std::f64::consts::E.powi(2);
    let d = (t * e2).max((2.0 / eps).ln()).ceil() as usize;
    let d_prime = (2.0 * d as f64 * (4.0 / eps).ln()).sqrt().ceil() as usize;
    Ok(exp_poly_with(t, eps, d, d_prime))
}

impl ExpPoly {
    pub fn eval(&self, x: f64) -> f64 {
        chebyshev_eval(&self.coeffs, x)
    }

    pub fn l1_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs()).sum()
    }

    pub fn lcu(&self) -> Result<LcuDecomposition> {
        walk_lcu(&self.coeffs)
    }

    pub fn sup_error(&self, points: usize) -> f64 {
        super::uniform_grid(-1.0, 1.0, points)
            .map(|x| (self.eval(x) - (self.t * (x - 1.0)).exp()).abs())
            .fold(0.0, f64::max)
    }
}

/// e^{−tx²} = e^{(t/2)((1−2x²)−1)} via [`ExpPoly`] at t/2.
#[derive(Clone, Debug)]
pub struct GaussianPoly {
    pub t: f64,
    pub inner: ExpPoly,
}

pub fn gaussian_poly_coeffs(t: f64, eps: f64) -> Result<GaussianPoly> {
    Ok(GaussianPoly { t, inner: exp_poly_coeffs(t / 2.0, eps)? })
}

impl GaussianPoly {
    pub fn eval(&self, x: f64) -> f64 {
        self.inner.eval(1.0 - 2.0 * x * x)
    }

    /// Coefficients on T_{2e}(x), using T_e(1−2x²) = (−1)^e T_{2e}(x).
    pub fn even_coeffs(&self) -> Vec<f64> {
        self.inner.coeffs.iter().enumerate().map(|(e, c)| if e % 2 == 0 { *c } else { -c }).collect()
    }

    pub fn l1_norm(&self) -> f64 {
        self.inner.l1_norm()
    }

    pub fn sup_error(&self, points: usize) -> f64 {
        super::uniform_grid(-1.0, 1.0, points)
            .map(|x| (self.eval(x) - (-self.t * x * x).exp()).abs())
            .fold(0.0, f64::max)
    }
}
