//! Acceptance-rate algebra: the completeness rate α, the three soundness
//! case bounds β₁–β₃, the disturbance budget δ, the per-case gaps Δᵢ, the
//! optimal compute-branch probability q*, and the closed-form gap there.

use crate::{Error, Result};

/// δ(ε) = 2√(2ε) + √(2/3 + ε).
pub fn delta_of(epsilon: f64) -> Result<f64> {
    if epsilon < 0.0 {
        return Err(Error::BadParameter(format!(
            "epsilon {epsilon} must be nonnegative"
        )));
    }
    Ok(2.0 * (2.0 * epsilon).sqrt() + (2.0 / 3.0 + epsilon).sqrt())
}

/// Protocol rate parameters. In amplified mode a = 1 − 2^{−r}, b = 2^{−r}.
#[derive(Clone, Copy, Debug)]
pub struct RateParams {
    pub epsilon: f64,
    pub q: f64,
    pub a: f64,
    pub b: f64,
    pub r: u32,
}

impl RateParams {
    pub fn new(epsilon: f64, q: f64, a: f64, b: f64, r: u32) -> Result<Self> {
        if !(0.0..1.0).contains(&epsilon) {
            return Err(Error::BadParameter(format!(
                "epsilon {epsilon} outside (0, 1)"
            )));
        }
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::BadParameter(format!("q {q} outside [0, 1]")));
        }
        if a <= b {
            return Err(Error::BadParameter(format!(
                "thresholds need a > b, got a = {a}, b = {b}"
            )));
        }
        Ok(RateParams { epsilon, q, a, b, r })
    }

    /// a = 1 − 2^{−r}, b = 2^{−r}.
    pub fn amplified(epsilon: f64, q: f64, r: u32) -> Result<Self> {
        let b = 2f64.powi(-(r as i32));
        RateParams::new(epsilon, q, 1.0 - b, b, r)
    }

    pub fn a_minus_b_minus_delta(&self) -> Result<f64> {
        Ok(self.a - self.b - delta_of(self.epsilon)?)
    }
}

/// All derived rates at one (ε, q, a, b) point. `q_star` is `None` when
/// its denominator 1 + ε/2 − b − δ is not positive.
#[derive(Clone, Copy, Debug)]
pub struct BoundSet {
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
    pub delta: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub delta3: f64,
    pub q_star: Option<f64>,
}

/// Evaluate every bound:
///   α  = qa + (1−q)
///   β₁ = q + (1−q)/2 + ((1−q)/2)(1−ε)
///   β₂ = q + (1−q)(1−ε)
///   β₃ = q(b+δ) + (1−q)
///   Δᵢ = α − βᵢ
///   q* = (ε/2) / (1 + ε/2 − b − δ)
pub fn bound_set(params: &RateParams) -> Result<BoundSet> {
    let RateParams { epsilon, q, a, b, .. } = *params;
    let delta = delta_of(epsilon)?;
    let alpha = q * a + (1.0 - q);
    let beta1 = q + (1.0 - q) / 2.0 + (1.0 - q) / 2.0 * (1.0 - epsilon);
    let beta2 = q + (1.0 - q) * (1.0 - epsilon);
    let beta3 = q * (b + delta) + (1.0 - q);
    let denom = 1.0 + epsilon / 2.0 - b - delta;
    let q_star = if denom > 0.0 {
        Some((epsilon / 2.0) / denom)
    } else {
        None
    };
    Ok(BoundSet {
        alpha,
        beta1,
        beta2,
        beta3,
        delta,
        delta1: alpha - beta1,
        delta2: alpha - beta2,
        delta3: alpha - beta3,
        q_star,
    })
}

/// The gap Δ₃ evaluated at q*, in closed form, with the inverse-polynomial
/// chain value it must dominate whenever that value is positive.
#[derive(Clone, Copy, Debug)]
pub struct GapAtQStar {
    pub q_star: f64,
    /// (ε/2)(a − b − δ) / (1 + ε/2 − b − δ)
    pub gap: f64,
    /// (ε/4)(1 − 2^{−r+1} − 2√(2ε) − √(2/3 + ε))
    pub chain_rhs: f64,
}

/// Closed-form gap at the optimal q. Fails with a flag when a − b − δ is
/// not positive ("no verifiable gap at these parameters").
pub fn gap_at_qstar(params: &RateParams) -> Result<GapAtQStar> {
    let delta = delta_of(params.epsilon)?;
    let margin = params.a - params.b - delta;
    if margin <= 0.0 {
        return Err(Error::BadParameter(format!(
            "no verifiable gap at these parameters: a − b − δ = {margin:.6}"
        )));
    }
    let denom = 1.0 + params.epsilon / 2.0 - params.b - delta;
    debug_assert!(denom > 0.0, "positive margin forces a positive denominator");
    let q_star = (params.epsilon / 2.0) / denom;
    let gap = (params.epsilon / 2.0) * margin / denom;
    let chain_rhs = params.epsilon / 4.0
        * (1.0
            - 2f64.powi(-(params.r as i32) + 1)
            - 2.0 * (2.0 * params.epsilon).sqrt()
            - (2.0 / 3.0 + params.epsilon).sqrt());
    Ok(GapAtQStar {
        q_star,
        gap,
        chain_rhs,
    })
}
