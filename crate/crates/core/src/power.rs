//! Minimum-power superposition coding over the degraded Gaussian broadcast channel.
//!
//! With users sorted weakest first, messages at rates `ρ_1..ρ_K` are reliably
//! delivered iff `ρ_k ≤ C(h_k² P_k / (1 + h_k² Σ_{j>k} P_j))` for every `k`,
//! where `C(x) = ½ log₂(1 + x)`. Making every constraint tight from the
//! strongest level down gives the per-level powers and the minimum total.

use thiserror::Error;

use crate::model::ChannelConfig;

/// Slack (bits per channel use) allowed when checking rate feasibility.
pub const FEASIBILITY_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PowerError {
    #[error("rate vector has {rates} entries but the channel has {users} users")]
    LengthMismatch { rates: usize, users: usize },
    #[error("rate of user {user} is {value}; rates must be finite and non-negative")]
    InvalidRate { user: usize, value: f64 },
}

/// Per-level powers `P_k` and their sum.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerResult {
    pub per_level: Vec<f64>,
    pub total: f64,
}

/// Gaussian point-to-point capacity `½ log₂(1 + x)`.
pub fn capacity(snr: f64) -> f64 {
    0.5 * (1.0 + snr).log2()
}

/// Power that makes `rate ≤ C(g P / (1 + g I))` tight for interference `I`:
/// `P = (2^{2ρ} − 1)(1/g + I)`.
pub fn tight_power(rate: f64, gain_sq: f64, interference: f64) -> f64 {
    (2f64.powf(2.0 * rate) - 1.0) * (1.0 / gain_sq + interference)
}

/// Minimum total power for per-user rates `rates` (weakest user first).
///
/// Shorter rate vectors are zero-padded up to the number of users.
pub fn min_superposition_power(
    rates: &[f64],
    ch: &ChannelConfig,
) -> Result<PowerResult, PowerError> {
    let k = ch.n_users();
    if rates.len() > k {
        return Err(PowerError::LengthMismatch { rates: rates.len(), users: k });
    }
    for (i, &r) in rates.iter().enumerate() {
        if !r.is_finite() || r < 0.0 {
            return Err(PowerError::InvalidRate { user: i + 1, value: r });
        }
    }
    let mut per_level = vec![0.0; k];
    let mut above = 0.0;
    for i in (0..rates.len()).rev() {
        let p = tight_power(rates[i], ch.gains_sq()[i], above);
        per_level[i] = p;
        above += p;
    }
    Ok(PowerResult { per_level, total: above })
}

/// Closed-form total `Σ_k ((2^{2ρ_k} − 1)/h_k²) Π_{j<k} 2^{2ρ_j}`.
pub fn closed_form_total(rates: &[f64], ch: &ChannelConfig) -> f64 {
    let mut prefix = 1.0;
    let mut total = 0.0;
    for (r, g) in rates.iter().zip(ch.gains_sq()) {
        let e = 2f64.powf(2.0 * r);
        total += (e - 1.0) / g * prefix;
        prefix *= e;
    }
    total
}

/// Whether per-level powers support the rates on the degraded channel.
pub fn rate_feasible(rates: &[f64], per_level_power: &[f64], ch: &ChannelConfig) -> bool {
    let k = ch.n_users();
    if rates.len() > k || per_level_power.len() != k {
        return false;
    }
    let mut above = 0.0;
    for i in (0..k).rev() {
        let rate = rates.get(i).copied().unwrap_or(0.0);
        let g = ch.gains_sq()[i];
        let p = per_level_power[i];
        if p < 0.0 {
            return false;
        }
        if rate > capacity(g * p / (1.0 + g * above)) + FEASIBILITY_TOL {
            return false;
        }
        above += p;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ch(g: &[f64]) -> ChannelConfig {
        ChannelConfig::new(g.to_vec()).unwrap()
    }

    #[test]
    fn zero_rates_need_no_power() {
        let r = min_superposition_power(&[0.0; 4], &ch(&[1.0, 2.0, 3.0, 4.0])).unwrap();
        assert_eq!(r.total, 0.0);
        assert!(r.per_level.iter().all(|&p| p == 0.0));
    }

    #[test]
    fn two_user_hand_example() {
        let c = ch(&[1.0, 4.0]);
        let r = min_superposition_power(&[1.0, 1.0], &c).unwrap();
        assert!((r.per_level[1] - 0.75).abs() < 1e-15);
        assert!((r.per_level[0] - 5.25).abs() < 1e-15);
        assert!((r.total - 6.0).abs() < 1e-15);
        assert!((closed_form_total(&[1.0, 1.0], &c) - 6.0).abs() < 1e-15);
        assert!(rate_feasible(&[1.0, 1.0], &[5.25, 0.75], &c));
        assert!(!rate_feasible(&[1.0, 1.0], &[5.0, 0.75], &c));
    }

    #[test]
    fn only_weakest_level_carries_rate() {
        let r = min_superposition_power(&[1.0, 0.0, 0.0], &ch(&[0.5, 1.0, 2.0])).unwrap();
        assert!((r.total - 6.0).abs() < 1e-15);
    }

    #[test]
    fn single_user_reduces_to_inverse_capacity() {
        for &rho in &[0.0, 0.25, 0.5, 1.0, 3.0] {
            for &g in &[0.1, 1.0, 7.5] {
                let r = min_superposition_power(&[rho], &ch(&[g])).unwrap();
                assert_eq!(r.total, (2f64.powf(2.0 * rho) - 1.0) / g);
            }
        }
    }

    #[test]
    fn zero_rate_is_always_feasible() {
        assert!(rate_feasible(&[0.0], &[0.0], &ch(&[1.0])));
        assert!(rate_feasible(&[0.0], &[3.0], &ch(&[1.0])));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            min_superposition_power(&[1.0, 1.0, 1.0], &ch(&[1.0, 2.0])),
            Err(PowerError::LengthMismatch { .. })
        ));
        assert!(matches!(
            min_superposition_power(&[-1.0], &ch(&[1.0])),
            Err(PowerError::InvalidRate { .. })
        ));
    }
}
