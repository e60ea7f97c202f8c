//! Capacity upper bounds.

pub mod duality;
pub mod siso;
pub mod vmax;

pub use duality::{
    duality_objective, upper_bound_duality, upper_bound_duality_search, upper_bound_duality_with, DualitySearch,
    DualityWitness,
};
pub use siso::{
    siso_upper_bound, upper_bound_siso, upper_bound_siso_with, SisoProvider, TabulatedProvider, VarianceProvider,
};
pub use vmax::{vmax, DiscreteInputLaw, VmaxResult};

use crate::channel::{ChannelGains, Noise, PowerBudget};
use crate::error::Result;
use crate::lower::{BoundEvaluation, BoundKind, Diagnostics, Witnesses};

/// `1/2 ln(1 + gamma A^2 / sigma^2)` with the certified `gamma`.
pub fn upper_bound_vmax(ch: &ChannelGains, budget: &PowerBudget, noise: &Noise) -> Result<BoundEvaluation> {
    let r = vmax(ch, budget);
    Ok(vmax_evaluation(&r, budget.amplitude(), noise.sigma()))
}

/// Bound value for an already computed variance program (`gamma` does not depend on `A`).
pub fn vmax_evaluation(r: &VmaxResult, amplitude: f64, sigma: f64) -> BoundEvaluation {
    let snr = (amplitude / sigma).powi(2);
    BoundEvaluation {
        kind: BoundKind::UpperVmax,
        value: 0.5 * (r.certified_gamma() * snr).ln_1p(),
        witnesses: Witnesses {
            p: Some(r.law.masses.clone()),
            gamma: Some(r.gamma),
            certificate_gap: Some(r.certificate_gap),
            ..Witnesses::default()
        },
        diagnostics: Diagnostics::default(),
    }
}
