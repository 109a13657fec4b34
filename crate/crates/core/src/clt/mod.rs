//! Monte Carlo checks of convergence to the limiting Gaussian law.

pub mod batch;
pub mod counterexample;
pub mod decay;
pub mod room_corridor;
pub mod stats;

pub use batch::{
    empirical_char_functional, empirical_covariance, gaussianity_diagnostics, CharFunctionalEstimate,
    CovarianceEstimate, GaussianityDiagnostics, SampleBatch,
};
pub use counterexample::{counterexample_closed_form, counterexample_demo, CounterexampleReport, CounterexampleRow};
pub use decay::{decay_probe, log_spaced, DecayRecord};
pub use room_corridor::{room_corridor_decompose, RoomCorridorLayout, RoomCorridorReport, SlabRecord};
pub use stats::Estimate;

use serde::{Deserialize, Serialize};

use crate::engine::{evolve_covariance, limit_covariance, quadratic_form_eval};
use crate::error::{invalid, Result};
use crate::field::TestFunction;

/// Variance `Q_inf(Psi, Psi)` of the limiting law for the batch's measure.
pub fn limit_variance(batch: &SampleBatch, psi: &TestFunction) -> Result<f64> {
    let q = limit_covariance(batch.measure().spectral(), batch.dispersion())?;
    quadratic_form_eval(&q, psi)
}

/// `Psi` rescaled so that `Q_inf(Psi, Psi) = variance`, which keeps the
/// target `exp(-variance / 2)` away from 0 and 1.
pub fn normalized_test_pair(batch: &SampleBatch, psi: &TestFunction, variance: f64) -> Result<TestFunction> {
    let q = limit_variance(batch, psi)?;
    if !(q > 0.0) {
        return Err(invalid("psi", "test pair has zero limiting variance"));
    }
    Ok(psi.scaled((variance / q).sqrt()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltRow {
    pub estimate: CharFunctionalEstimate,
    /// `exp(-Q_t / 2)`: the law at time `t` for a Gaussian measure.
    pub gaussian_at_t: f64,
    /// `|mu_t - exp(-Q_inf / 2)|`.
    pub distance: f64,
    pub z_limit: f64,
    pub kurtosis: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltReport {
    pub limit_variance: f64,
    pub target: f64,
    pub rows: Vec<CltRow>,
    /// Distances to the target never rise by more than four combined standard
    /// errors from one time to the next.
    pub trend_monotone: bool,
}

impl CltReport {
    pub fn last(&self) -> &CltRow {
        self.rows.last().expect("report has at least one time")
    }
}

/// Characteristic functional and kurtosis of `<Y(t), Psi>` along `times`,
/// compared with the limiting Gaussian value `exp(-Q_inf(Psi, Psi) / 2)`.
pub fn clt_experiment(batch: &SampleBatch, psi: &TestFunction, times: &[f64]) -> Result<CltReport> {
    if times.is_empty() {
        return Err(invalid("times", "need at least one time"));
    }
    batch.require(1000)?;
    let q_inf = limit_variance(batch, psi)?;
    let target = (-0.5 * q_inf).exp();
    batch.pairings_at(psi, times)?;
    let mut rows = Vec::with_capacity(times.len());
    for &t in times {
        let estimate = empirical_char_functional(batch, psi, t)?;
        let diag = gaussianity_diagnostics(batch, psi, t)?;
        let q_t = quadratic_form_eval(
            &evolve_covariance(batch.measure().spectral(), batch.dispersion(), t)?,
            psi,
        )?;
        rows.push(CltRow {
            estimate,
            gaussian_at_t: (-0.5 * q_t).exp(),
            distance: (estimate.re.value - target).hypot(estimate.im.value),
            z_limit: estimate.z_score(target),
            kurtosis: diag.excess_kurtosis,
        });
    }
    let trend_monotone = rows.windows(2).all(|w| {
        let se = |r: &CltRow| r.estimate.re.stderr.hypot(r.estimate.im.stderr);
        w[1].distance <= w[0].distance + 4.0 * se(&w[0]).hypot(se(&w[1]))
    });
    Ok(CltReport {
        limit_variance: q_inf,
        target,
        rows,
        trend_monotone,
    })
}
