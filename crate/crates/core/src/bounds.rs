//! Closed-form bounds.
//!
//! With `m = n − τ`, for a gauge pair `(g, Φ)` and confidence `1 − δ`:
//!
//! ```text
//! excess probability:  sup_f Pr{ f(X) > max Φ + t }  ≤ 2·G_t + φ(τ) + e·ln(1/δ)/m
//! risk (martingale):   sup_f E f(X) − max Φ         ≤ 2·G + ‖F‖∞·φ(τ) + ‖g‖∞·e·ln(1/δ)/m
//! risk (azuma):        sup_f E f(X) − max Φ         ≤ G + ‖F‖∞·φ(τ) + ‖g‖∞·√(2 ln(1/δ)/m)
//! with exceptions:     … + e‖g‖∞·( H(α) + (Rest(m, α) + ln(1/δ))/m )
//! ```
//!
//! The Azuma constant is the standard bounded-difference martingale tail; the
//! factor-one estimator term is what the Hoeffding–Azuma route yields.

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::error::{ensure_open_unit, ensure_probability, Error, Result};
use crate::estimators::exception_count;

/// Where a mixing coefficient came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Declared,
    ChainDerived,
}

/// `φ(τ)` and `α(τ)` at one gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixingProfile {
    pub tau: usize,
    pub phi_tau: f64,
    pub alpha_tau: f64,
    pub provenance: Provenance,
}

impl MixingProfile {
    pub fn declared(tau: usize, phi_tau: f64, alpha_tau: f64) -> Result<Self> {
        let m = MixingProfile {
            tau,
            phi_tau,
            alpha_tau,
            provenance: Provenance::Declared,
        };
        m.validate()?;
        Ok(m)
    }

    /// Independent observations: `τ = 1` and both coefficients zero.
    pub fn iid() -> Self {
        MixingProfile {
            tau: 1,
            phi_tau: 0.0,
            alpha_tau: 0.0,
            provenance: Provenance::Declared,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.tau == 0 {
            return Err(Error::param("tau", "must be a positive integer"));
        }
        ensure_probability("phi_tau", self.phi_tau)?;
        ensure_probability("alpha_tau", self.alpha_tau)?;
        if self.alpha_tau > self.phi_tau {
            return Err(Error::param(
                "alpha_tau",
                format!("alpha(tau) = {} exceeds phi(tau) = {}", self.alpha_tau, self.phi_tau),
            ));
        }
        Ok(())
    }
}

/// `‖F‖∞` and `‖g‖∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassBounds {
    pub sup_f: f64,
    pub sup_g: f64,
}

impl ClassBounds {
    fn validate(&self) -> Result<()> {
        for (name, v) in [("sup_f", self.sup_f), ("sup_g", self.sup_g)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::param(
                    name,
                    format!("risk bounds need a finite nonnegative value, got {v}; use the probability bound for unbounded gauges"),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    ExcessLossProbability,
    RiskMartingale,
    RiskAzuma,
    Corollary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConcentrationVariant {
    #[default]
    Martingale,
    Azuma,
}

/// Inputs echoed into a report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub n: usize,
    pub tau: usize,
    pub delta: f64,
    pub t: Option<f64>,
    pub alpha: Option<f64>,
}

/// Every term of a bound, itemised.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub estimator_term: f64,
    pub mixing_term: f64,
    pub confidence_term: f64,
    pub entropy_term: Option<f64>,
    pub total: f64,
    /// The total exceeds the trivial bound (1 for probabilities, `‖F‖∞` for risks).
    pub vacuous: bool,
    pub inputs: BoundInputs,
}

impl BoundReport {
    fn assemble(
        kind: BoundKind,
        estimator_term: f64,
        mixing_term: f64,
        confidence_term: f64,
        entropy_term: Option<f64>,
        trivial: f64,
        inputs: BoundInputs,
    ) -> Self {
        let total = estimator_term + mixing_term + entropy_term.unwrap_or(0.0) + confidence_term;
        BoundReport {
            kind,
            estimator_term,
            mixing_term,
            confidence_term,
            entropy_term,
            total,
            vacuous: total > trivial,
            inputs,
        }
    }
}

/// `e·ln(1/δ)/n_eff`, the deviation term of the `V ≤ 2V̂ + …` martingale bound.
pub fn lemma1_threshold(n_eff: usize, delta: f64) -> Result<f64> {
    ensure_open_unit("delta", delta)?;
    if n_eff == 0 {
        return Err(Error::param("n_eff", "must be positive"));
    }
    Ok(E * (1.0 / delta).ln() / n_eff as f64)
}

fn effective_size(n: usize, tau: usize) -> Result<usize> {
    if tau == 0 {
        return Err(Error::param("tau", "must be a positive integer"));
    }
    if tau >= n {
        return Err(Error::param("tau", format!("tau = {tau} must be below n = {n}")));
    }
    Ok(n - tau)
}

/// Bound on `sup_f Pr{ f(X) > max_j Φ(f, X_j) + t }` from the thresholded estimator.
pub fn excess_loss_probability_bound(gt: f64, mix: &MixingProfile, n: usize, delta: f64) -> Result<BoundReport> {
    ensure_probability("gt", gt)?;
    mix.validate()?;
    let m = effective_size(n, mix.tau)?;
    Ok(BoundReport::assemble(
        BoundKind::ExcessLossProbability,
        2.0 * gt,
        mix.phi_tau,
        lemma1_threshold(m, delta)?,
        None,
        1.0,
        BoundInputs {
            n,
            tau: mix.tau,
            delta,
            t: None,
            alpha: None,
        },
    ))
}

/// Bound on `sup_f E f(X) − max_j Φ(f, X_j)` from the estimator `G`.
pub fn risk_bound(
    g_val: f64,
    class: &ClassBounds,
    mix: &MixingProfile,
    n: usize,
    delta: f64,
    variant: ConcentrationVariant,
) -> Result<BoundReport> {
    if !(g_val.is_finite() && g_val >= 0.0) {
        return Err(Error::param("g_val", format!("must be finite and nonnegative, got {g_val}")));
    }
    class.validate()?;
    mix.validate()?;
    let m = effective_size(n, mix.tau)?;
    ensure_open_unit("delta", delta)?;
    let (kind, estimator, confidence) = match variant {
        ConcentrationVariant::Martingale => (
            BoundKind::RiskMartingale,
            2.0 * g_val,
            class.sup_g * lemma1_threshold(m, delta)?,
        ),
        ConcentrationVariant::Azuma => (
            BoundKind::RiskAzuma,
            g_val,
            class.sup_g * (2.0 * (1.0 / delta).ln() / m as f64).sqrt(),
        ),
    };
    Ok(BoundReport::assemble(
        kind,
        estimator,
        class.sup_f * mix.phi_tau,
        confidence,
        None,
        class.sup_f,
        BoundInputs {
            n,
            tau: mix.tau,
            delta,
            t: None,
            alpha: None,
        },
    ))
}

/// `H(α)` and the capped Stirling remainder `Rest(N, α)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyPenalty {
    pub entropy: f64,
    pub rest: f64,
}

/// Bernoulli entropy in nats, with `H(0) = H(1) = 0`.
pub fn bernoulli_entropy(alpha: f64) -> f64 {
    let term = |p: f64| if p <= 0.0 { 0.0 } else { p * (1.0 / p).ln() };
    term(alpha) + term(1.0 - alpha)
}

/// Uncapped `−ln √(2πα(1−α)N) + 1/(12N)`.
pub fn stirling_rest(n: usize, alpha: f64) -> f64 {
    let nf = n as f64;
    -(2.0 * PI * alpha * (1.0 - alpha) * nf).sqrt().ln() + 1.0 / (12.0 * nf)
}

/// `ln C(N, αN) ≤ N·H(α) + Rest(N, α)`, with `Rest` replaced by its cap:
/// `0` when `2πN ≥ 1/(α(1−α))`, else `ln(πN/2)/2`. `Rest = 0` at `α = 0`.
pub fn entropy_penalty(alpha: f64, n: usize) -> Result<EntropyPenalty> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::param("alpha", format!("must lie in [0, 1), got {alpha}")));
    }
    if n == 0 {
        return Err(Error::param("N", "must be positive"));
    }
    let entropy = bernoulli_entropy(alpha);
    let rest = if alpha == 0.0 || 2.0 * PI * n as f64 >= 1.0 / (alpha * (1.0 - alpha)) {
        0.0
    } else {
        (PI * n as f64 / 2.0).ln() / 2.0
    };
    Ok(EntropyPenalty { entropy, rest })
}

/// Risk bound holding simultaneously for every exception set of size `α(n−τ)`.
pub fn corollary_bound(
    g_val: f64,
    class: &ClassBounds,
    mix: &MixingProfile,
    n: usize,
    delta: f64,
    alpha: f64,
) -> Result<BoundReport> {
    if !(g_val.is_finite() && g_val >= 0.0) {
        return Err(Error::param("g_val", format!("must be finite and nonnegative, got {g_val}")));
    }
    class.validate()?;
    mix.validate()?;
    ensure_open_unit("delta", delta)?;
    let m = effective_size(n, mix.tau)?;
    exception_count(alpha, m)?;
    let pen = entropy_penalty(alpha, m)?;
    let scale = E * class.sup_g;
    Ok(BoundReport::assemble(
        BoundKind::Corollary,
        2.0 * g_val,
        class.sup_f * mix.phi_tau,
        scale * ((pen.rest + (1.0 / delta).ln()) / m as f64),
        Some(scale * pen.entropy),
        class.sup_f,
        BoundInputs {
            n,
            tau: mix.tau,
            delta,
            t: None,
            alpha: Some(alpha),
        },
    ))
}

/// Worst-case tail `Pr{G > t} ≤ N(supp π, g, t/2)/(e(⌊nt/2τ⌋−1)) + ⌈nt/2τ⌉·α_τ`.
///
/// Returns `+∞` when `⌊nt/2τ⌋ ≤ 1`.
pub fn theorem3_worst_case(n_cover: usize, n: usize, tau: usize, t: f64, alpha_tau: f64) -> Result<f64> {
    if n_cover == 0 || n == 0 || tau == 0 {
        return Err(Error::param("n_cover/n/tau", "must be positive"));
    }
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::param("t", format!("must be positive, got {t}")));
    }
    ensure_probability("alpha_tau", alpha_tau)?;
    let blocks = n as f64 * t / (2.0 * tau as f64);
    let floor = blocks.floor();
    if floor <= 1.0 {
        return Ok(f64::INFINITY);
    }
    Ok(n_cover as f64 / (E * (floor - 1.0)) + blocks.ceil() * alpha_tau)
}
