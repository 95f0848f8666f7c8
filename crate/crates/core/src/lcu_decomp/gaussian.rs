use std::f64::consts::PI;

use super::{uniform_grid, LcuDecomposition, LcuTerm, Phase, UnitaryDescriptor};
use crate::core_algebra::C64;
use crate::error::{Error, Result};

/// Discretized Hubbard–Stratonovich expansion of e^{−tH²}.
#[derive(Clone, Debug)]
pub struct GaussianLcu {
    pub lcu: LcuDecomposition,
    pub t: f64,
    pub gamma: f64,
    /// Terms run over j = −m..=m.
    pub m: usize,
    pub delta_t: f64,
}

/// e^{−tH²} ≈ Σ_{j=−M}^{M} c_j e^{−i j δ_t √(2t) H} for ‖H‖ ≤ 1, with
/// c_j = δ_t/√(2π)·e^{−j²δ_t²/2}, δ_t = (√(2t) + √(2 log(5/γ)))⁻¹ and
/// M = ⌈2(√t + √log(5/γ))·√log(4/γ)⌉, so the sum is cut at
/// M·δ_t ≥ √(2 log(4/γ)) standard deviations of the Gaussian weights.
///
/// With the smaller prefactor √2 in M the cut sits at √log(4/γ) and the
/// untruncated mass near x = 0 alone exceeds γ (about 2.8γ at t = 25,
/// γ = 1e−3); [`gaussian_lcu_truncated`] reproduces that choice.
pub fn gaussian_lcu(t: f64, gamma: f64) -> Result<GaussianLcu> {
    check(t, gamma)?;
    let m = (2.0 * (t.sqrt() + (5.0 / gamma).ln().sqrt()) * (4.0 / gamma).ln().sqrt()).ceil() as usize;
    gaussian_lcu_truncated(t, gamma, m)
}

fn check(t: f64, gamma: f64) -> Result<()> {
    if !(t > 1.0) || !t.is_finite() {
        return Err(Error::Precondition(format!("t = {t} must be finite and greater than 1")));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::Precondition(format!("gamma = {gamma} must lie in (0, 1)")));
    }
    Ok(())
}

/// Same coefficients with an explicit truncation index M.
pub fn gaussian_lcu_truncated(t: f64, gamma: f64, m: usize) -> Result<GaussianLcu> {
    check(t, gamma)?;
    let l5 = (5.0 / gamma).ln();
    let delta_t = 1.0 / ((2.0 * t).sqrt() + (2.0 * l5).sqrt());
    let scale = delta_t * (2.0 * t).sqrt();
    let terms = (-(m as i64)..=m as i64)
        .map(|j| {
            let jf = j as f64;
            LcuTerm {
                coeff: delta_t / (2.0 * PI).sqrt() * (-jf * jf * delta_t * delta_t / 2.0).exp(),
                unitary: UnitaryDescriptor::TimeEvolution { duration: jf * scale, phase: Phase::One },
            }
        })
        .collect();
    Ok(GaussianLcu { lcu: LcuDecomposition::new(terms)?.with_target_error(gamma), t, gamma, m, delta_t })
}

impl GaussianLcu {
    /// Largest evolution time M·δ_t·√(2t).
    pub fn tau_max(&self) -> f64 {
        self.m as f64 * self.delta_t * (2.0 * self.t).sqrt()
    }

    pub fn scalar(&self, x: f64) -> C64 {
        self.lcu.scalar_response(x).expect("time-evolution terms")
    }

    /// max |Σ c_j e^{−i d_j x} − e^{−tx²}| over a uniform grid on [−1, 1].
    pub fn scalar_sup_error(&self, points: usize) -> f64 {
        uniform_grid(-1.0, 1.0, points)
            .map(|x| (self.scalar(x) - C64::new((-self.t * x * x).exp(), 0.0)).norm())
            .fold(0.0, f64::max)
    }
}
