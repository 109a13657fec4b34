//! The non-mixing ensemble `u0 = +-1`, `v0 = 0`: every sample oscillates as
//! the constant mode `+-(cos mt, -m sin mt)`, so the law of `Y(t)` is periodic
//! and never settles.

use serde::{Deserialize, Serialize};

use crate::clt::batch::SampleBatch;
use crate::clt::stats::{char_function_estimate, Estimate};
use crate::error::{invalid, Result};
use crate::field::TestFunction;
use crate::lattice::Lattice;
use crate::random::MeasureSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleRow {
    pub t: f64,
    pub re: Estimate,
    pub im: Estimate,
    pub closed_form: f64,
    /// `Re mu_t` at `t + 2 pi / m`.
    pub shifted_re: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub mass: f64,
    pub period: f64,
    /// `A = sum Psi0 dx^n` and `B = sum Psi1 dx^n`.
    pub a: f64,
    pub b: f64,
    pub rows: Vec<CounterexampleRow>,
    pub max_closed_form_error: f64,
    pub max_periodicity_error: f64,
    /// Peak-to-peak range of `Re mu_t` over the first and last period of the
    /// traced interval.
    pub first_amplitude: f64,
    pub last_amplitude: f64,
}

/// `cos(A cos mt - m B sin mt)`.
pub fn counterexample_closed_form(a: f64, b: f64, mass: f64, t: f64) -> f64 {
    let mt = mass * t;
    (a * mt.cos() - mass * b * mt.sin()).cos()
}

/// Trace `mu_t(Psi) = E exp(i <Y(t), Psi>)` for the counterexample ensemble
/// through the adjoint route.
pub fn counterexample_demo(
    lattice: &Lattice,
    mass: f64,
    psi: &TestFunction,
    times: &[f64],
    count: usize,
    seed: u64,
) -> Result<CounterexampleReport> {
    if !(mass > 0.0) {
        return Err(invalid("mass", "the counterexample needs m > 0"));
    }
    if times.is_empty() {
        return Err(invalid("times", "need at least one time"));
    }
    let batch = SampleBatch::new(MeasureSpec::counterexample(lattice), mass, count, seed, times.to_vec())?;
    let period = 2.0 * std::f64::consts::PI / mass;
    let dv = lattice.cell_volume();
    let a = psi.psi0.iter().map(|z| z.re).sum::<f64>() * dv;
    let b = psi.psi1.iter().map(|z| z.re).sum::<f64>() * dv;

    let trace = |ts: &[f64]| -> Result<Vec<(Estimate, Estimate)>> {
        Ok(batch
            .pairings_unchecked(psi, ts)?
            .iter()
            .map(|p| char_function_estimate(p))
            .collect())
    };

    let shifted: Vec<f64> = times.iter().map(|t| t + period).collect();
    let base = trace(times)?;
    let later = trace(&shifted)?;
    let rows: Vec<CounterexampleRow> = times
        .iter()
        .zip(base.iter().zip(&later))
        .map(|(&t, ((re, im), (sre, _)))| CounterexampleRow {
            t,
            re: *re,
            im: *im,
            closed_form: counterexample_closed_form(a, b, mass, t),
            shifted_re: sre.value,
        })
        .collect();
    let max_closed_form_error = rows
        .iter()
        .map(|r| (r.re.value - r.closed_form).abs())
        .fold(0.0, f64::max);
    let max_periodicity_error = rows
        .iter()
        .map(|r| (r.re.value - r.shifted_re).abs())
        .fold(0.0, f64::max);

    let t0 = times.iter().cloned().fold(f64::INFINITY, f64::min);
    let t1 = times.iter().cloned().fold(f64::NEG_INFINITY, f64::max).max(t0 + period);
    let amplitude = |start: f64| -> Result<f64> {
        let grid: Vec<f64> = (0..64).map(|i| start + period * i as f64 / 63.0).collect();
        let vals: Vec<f64> = trace(&grid)?.iter().map(|(re, _)| re.value).collect();
        let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        Ok(hi - lo)
    };

    Ok(CounterexampleReport {
        mass,
        period,
        a,
        b,
        first_amplitude: amplitude(t0)?,
        last_amplitude: amplitude(t1 - period)?,
        rows,
        max_closed_form_error,
        max_periodicity_error,
    })
}
