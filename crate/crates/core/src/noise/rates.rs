use serde::{Deserialize, Serialize};

use super::KrausChannel;
use crate::simulator::TOL_ALGEBRAIC;
use crate::{Error, Result};

/// Depolarizing strength on `arity` qubits: `lambda = p · 4^arity`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepolarizingParams {
    pub arity: usize,
    pub p: f64,
    pub lambda: f64,
}

impl DepolarizingParams {
    pub fn from_lambda(arity: usize, lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::Domain(format!(
                "depolarizing weight {lambda} outside [0, 1]"
            )));
        }
        Ok(Self {
            arity,
            p: lambda / (1u64 << (2 * arity)) as f64,
            lambda,
        })
    }
}

fn dim(arity: usize) -> f64 {
    (1u64 << arity) as f64
}

/// Depolarizing parameters whose average error rate is `r`.
pub fn rate_to_depol(r: f64, arity: usize) -> Result<DepolarizingParams> {
    let d = dim(arity);
    let max = (d - 1.0) / d;
    if !(r >= 0.0) || r > max + TOL_ALGEBRAIC {
        return Err(Error::Domain(format!(
            "error rate {r} outside [0, {max}] for {arity} qubit(s)"
        )));
    }
    DepolarizingParams::from_lambda(arity, (r * d / (d - 1.0)).min(1.0))
}

/// Average error rate of a depolarizing channel.
pub fn depol_to_rate(params: &DepolarizingParams) -> f64 {
    let d = dim(params.arity);
    params.lambda * (d - 1.0) / d
}

/// Weight `lambda` such that depolarizing composed after `base` has average
/// error `target`. Uses `F_e(D_λ ∘ T) = (1−λ)·F_e(T) + λ/d²`. Returns
/// `(lambda, clamped)`, where `clamped` means `base` alone already exceeds
/// the target and `lambda` was set to 0.
pub fn depol_on_top(base_entanglement_fidelity: f64, arity: usize, target: f64) -> (f64, bool) {
    let d = dim(arity);
    let fe_target = ((d + 1.0) * (1.0 - target) - 1.0) / d;
    let fe_base = base_entanglement_fidelity;
    let floor = 1.0 / (d * d);
    if fe_base - floor <= 0.0 {
        return (0.0, true);
    }
    let lambda = (fe_base - fe_target) / (fe_base - floor);
    if lambda < -TOL_ALGEBRAIC {
        (0.0, true)
    } else {
        (lambda.clamp(0.0, 1.0), false)
    }
}

/// Average error of `base` followed by depolarizing weight `lambda`.
pub fn composite_error(base: &KrausChannel, lambda: f64) -> f64 {
    let d = dim(base.arity());
    let fe = (1.0 - lambda) * base.entanglement_fidelity() + lambda / (d * d);
    1.0 - (d * fe + 1.0) / (d + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{depolarizing, thermal_relaxation};

    #[test]
    fn examples() {
        let p = rate_to_depol(0.0, 1).unwrap();
        assert_eq!(p.p, 0.0);
        let p = rate_to_depol(0.002, 1).unwrap();
        assert!((p.lambda - 0.004).abs() < 1e-15 && (p.p - 0.001).abs() < 1e-15);
        let p = rate_to_depol(0.012, 2).unwrap();
        assert!((p.lambda - 0.016).abs() < 1e-15 && (p.p - 0.001).abs() < 1e-15);
        assert!(rate_to_depol(0.6, 1).is_err());
        assert!(rate_to_depol(-0.1, 2).is_err());
    }

    #[test]
    fn agrees_with_fidelity_oracle() {
        for (arity, r) in [(1, 0.002), (2, 0.012), (1, 0.3), (2, 0.5)] {
            let params = rate_to_depol(r, arity).unwrap();
            let ch = depolarizing(arity, params.p).unwrap();
            assert!((ch.average_error() - r).abs() < 1e-12, "{arity} {r}");
        }
    }

    #[test]
    fn round_trip() {
        for arity in 1..=3 {
            let d = dim(arity);
            for k in 0..=100 {
                let r = (d - 1.0) / d * k as f64 / 100.0;
                let back = depol_to_rate(&rate_to_depol(r, arity).unwrap());
                assert!((back - r).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn on_top_of_relaxation() {
        let base = thermal_relaxation(100.0, 80.0, 300.0).unwrap();
        let (lambda, clamped) = depol_on_top(base.entanglement_fidelity(), 1, 0.004);
        assert!(!clamped);
        let composite = base.then(&depolarizing(1, lambda / 4.0).unwrap());
        assert!((composite.average_error() - 0.004).abs() < 1e-12);
        assert!((composite_error(&base, lambda) - 0.004).abs() < 1e-12);

        let (lambda, clamped) = depol_on_top(base.entanglement_fidelity(), 1, 1e-5);
        assert!(clamped && lambda == 0.0);
    }
}
