//! Sup-norm decay of adjoint-evolved test pairs.

use serde::{Deserialize, Serialize};

use crate::clt::stats::least_squares_slope;
use crate::error::{invalid, Result};
use crate::field::TestFunction;
use crate::spectral::{adjoint_evolve_with, check_window, Dispersion};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayRecord {
    pub times: Vec<f64>,
    /// `sup_x |Phi0(x, t)|`, the velocity-like component.
    pub sup_phi0: Vec<f64>,
    /// `sup_x |Phi1(x, t)|`.
    pub sup_phi1: Vec<f64>,
    /// Larger of the two per time.
    pub sup: Vec<f64>,
    /// Least-squares slope of `ln sup` against `ln t`.
    pub slope: f64,
    /// Largest `|Phi|` at `|x| > t + r + 2 dx`, relative to the sup at that
    /// time, over all times.
    pub leak: f64,
}

pub fn decay_probe(psi: &TestFunction, mass: f64, times: &[f64]) -> Result<DecayRecord> {
    if times.len() < 2 || times.iter().any(|&t| !(t > 0.0)) {
        return Err(invalid("times", "need at least two positive times"));
    }
    let l = *psi.lattice();
    let t_max = times.iter().cloned().fold(0.0, f64::max);
    check_window(t_max, psi.support_radius(), l.box_length())?;
    let dispersion = Dispersion::new(&l, mass)?;
    let radius = l.radius_grid();
    let (mut sup_phi0, mut sup_phi1, mut sup) = (Vec::new(), Vec::new(), Vec::new());
    let mut leak: f64 = 0.0;
    for &t in times {
        let phi = adjoint_evolve_with(psi, &dispersion, t)?;
        let s0 = phi.psi0.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let s1 = phi.psi1.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let s = s0.max(s1);
        let cone = t + psi.support_radius() + 2.0 * l.spacing();
        let outside = radius
            .iter()
            .enumerate()
            .filter(|(_, &r)| r > cone)
            .map(|(i, _)| phi.psi0[i].norm().max(phi.psi1[i].norm()))
            .fold(0.0, f64::max);
        leak = leak.max(outside / s);
        sup_phi0.push(s0);
        sup_phi1.push(s1);
        sup.push(s);
    }
    let lt: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let ls: Vec<f64> = sup.iter().map(|s| s.ln()).collect();
    Ok(DecayRecord {
        times: times.to_vec(),
        slope: least_squares_slope(&lt, &ls),
        sup_phi0,
        sup_phi1,
        sup,
        leak,
    })
}

/// `points` times spaced evenly in `ln t` over `[t_min, t_max]`.
pub fn log_spaced(t_min: f64, t_max: f64, points: usize) -> Vec<f64> {
    let (a, b) = (t_min.ln(), t_max.ln());
    (0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1).max(1) as f64).exp())
        .collect()
}
