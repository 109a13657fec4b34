//! Local decay, the Cook wave operator and equilibration under the magnetic
//! flow.

use serde::{Deserialize, Serialize};

use crate::clt::stats::char_function_estimate;
use crate::clt::{CharFunctionalEstimate, SampleBatch};
use crate::engine::{limit_covariance, quadratic_form_eval};
use crate::error::{invalid, Result};
use crate::field::{pairing, TestFunction};
use crate::magnetic::potential::MagneticPotential;
use crate::magnetic::solver::{MagneticSolver, MagneticState};
use crate::random::{MeasureKind, MeasureSpec};
use crate::spectral::{adjoint_evolve_with, check_window, h_norm, local_h_norm};

/// Decay profile for two dimensions: `(t + 1)^-1 ln^-2(t + 2)`.
pub fn local_decay_rate(t: f64) -> f64 {
    1.0 / ((t + 1.0) * (t + 2.0).ln().powi(2))
}

/// Rate of approach to the scattered state: `ln^-1(t + 2)`.
pub fn scattering_rate(t: f64) -> f64 {
    1.0 / (t + 2.0).ln()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalDecayRecord {
    pub radius: f64,
    pub times: Vec<f64>,
    /// `||U'(t) Psi||_(R)` per time.
    pub local_norm: Vec<f64>,
    /// `local_norm / eps(t)`.
    pub ratio: Vec<f64>,
    /// Five-point trailing moving averages of `local_norm` never increase.
    pub smoothed_monotone: bool,
    /// `max / min` of `ratio` over the second half of the times.
    pub tail_ratio_spread: f64,
}

pub fn local_decay_probe(
    psi: &TestFunction,
    potential: &MagneticPotential,
    mass: f64,
    times: &[f64],
    radius: f64,
) -> Result<LocalDecayRecord> {
    if times.is_empty() || times.windows(2).any(|w| w[1] <= w[0]) || times[0] < 0.0 {
        return Err(invalid("times", "need an increasing list of nonnegative times"));
    }
    let solver = MagneticSolver::new(potential, mass)?;
    let l = potential.lattice();
    check_window(
        *times.last().unwrap(),
        psi.support_radius() + potential.support_radius(),
        l.box_length(),
    )?;
    let mut state = MagneticState::from_test_function(psi);
    let mut local_norm = Vec::with_capacity(times.len());
    for &t in times {
        solver.advance(&mut state, t)?;
        local_norm.push(local_h_norm(&state.to_test_function(), radius)?);
    }
    let ratio: Vec<f64> = times
        .iter()
        .zip(&local_norm)
        .map(|(&t, n)| n / local_decay_rate(t))
        .collect();
    let smoothed: Vec<f64> = local_norm.windows(5).map(|w| w.iter().sum::<f64>() / 5.0).collect();
    let smoothed_monotone = smoothed.windows(2).all(|w| w[1] <= w[0]);
    let tail = &ratio[ratio.len() / 2..];
    let hi = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = tail.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(LocalDecayRecord {
        radius,
        times: times.to_vec(),
        local_norm,
        ratio,
        smoothed_monotone,
        tail_ratio_spread: hi / lo,
    })
}

/// `H` norm of one integrand value of the Cook integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CookIncrement {
    pub t: f64,
    pub norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CookResidual {
    pub t: f64,
    /// `||U'(T) Psi - U0'(T) W Psi||_H`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CookReport {
    pub wave: TestFunction,
    pub tail: Vec<CookIncrement>,
    pub residuals: Vec<CookResidual>,
    /// Increment norms are not eventually decreasing (reported, not fatal).
    pub non_decaying: bool,
}

impl CookReport {
    /// Increment norm at the node closest to `t`.
    pub fn increment_at(&self, t: f64) -> f64 {
        self.tail
            .iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
            .map(|c| c.norm)
            .unwrap_or(f64::NAN)
    }
}

/// `W Psi = Psi + int_0^T U0'(-t) (A' - A0') U'(t) Psi dt` by the trapezoidal
/// rule on nodes `k * dt_quad`, together with the increment norms.
pub fn cook_wave_operator(
    psi: &TestFunction,
    potential: &MagneticPotential,
    mass: f64,
    t_max: f64,
    dt_quad: f64,
) -> Result<(TestFunction, Vec<CookIncrement>)> {
    let r = cook_experiment(psi, potential, mass, t_max, dt_quad, &[])?;
    Ok((r.wave, r.tail))
}

/// [`cook_wave_operator`] plus the residuals at `checkpoints`, which must be
/// quadrature nodes.
pub fn cook_experiment(
    psi: &TestFunction,
    potential: &MagneticPotential,
    mass: f64,
    t_max: f64,
    dt_quad: f64,
    checkpoints: &[f64],
) -> Result<CookReport> {
    if !(t_max > 0.0) || !(dt_quad > 0.0) {
        return Err(invalid("t_max", "horizon and quadrature step must be positive"));
    }
    let nodes = (t_max / dt_quad).round() as usize;
    if nodes == 0 || ((nodes as f64) * dt_quad - t_max).abs() > 1e-9 * t_max {
        return Err(invalid("dt_quad", "the horizon must be a multiple of the quadrature step"));
    }
    let node_of = |t: f64| -> Result<usize> {
        let k = (t / dt_quad).round();
        if t < 0.0 || t > t_max || (k * dt_quad - t).abs() > 1e-9 * t_max.max(1.0) {
            Err(invalid("checkpoints", format!("{t} is not a quadrature node in [0, {t_max}]")))
        } else {
            Ok(k as usize)
        }
    };
    let check_nodes = checkpoints.iter().map(|&t| node_of(t)).collect::<Result<Vec<_>>>()?;

    let solver = MagneticSolver::new(potential, mass)?;
    let l = *potential.lattice();
    l.ensure_same(psi.lattice())?;
    check_window(t_max, psi.support_radius() + potential.support_radius(), l.box_length())?;

    let mut wave = psi.clone();
    let mut tail = Vec::with_capacity(nodes + 1);
    let mut snapshots = Vec::new();
    let mut state = MagneticState::from_test_function(psi);
    for k in 0..=nodes {
        let t = k as f64 * dt_quad;
        solver.advance(&mut state, t)?;
        let phi = state.to_test_function();
        if check_nodes.contains(&k) {
            snapshots.push((t, phi.clone()));
        }
        if potential.is_zero() {
            tail.push(CookIncrement { t, norm: 0.0 });
            continue;
        }
        let kick = solver.perturbation(&phi)?;
        let increment = adjoint_evolve_with(&kick, solver.dispersion(), -t)?;
        let weight = if k == 0 || k == nodes { 0.5 * dt_quad } else { dt_quad };
        for (w, z) in wave.psi0.iter_mut().zip(&increment.psi0) {
            *w += z * weight;
        }
        for (w, z) in wave.psi1.iter_mut().zip(&increment.psi1) {
            *w += z * weight;
        }
        tail.push(CookIncrement {
            t,
            norm: h_norm(&increment),
        });
    }
    let wave = TestFunction::from_parts(
        l,
        wave.psi0,
        wave.psi1,
        psi.support_radius().max(potential.support_radius() + t_max),
    );

    let residuals = snapshots
        .into_iter()
        .map(|(t, phi)| {
            let free = adjoint_evolve_with(&wave, solver.dispersion(), t)?;
            let diff = TestFunction::from_parts(
                l,
                phi.psi0.iter().zip(&free.psi0).map(|(a, b)| a - b).collect(),
                phi.psi1.iter().zip(&free.psi1).map(|(a, b)| a - b).collect(),
                phi.support_radius(),
            );
            Ok(CookResidual {
                t,
                residual: h_norm(&diff),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    // eventually decreasing: the second half never exceeds the first half's peak
    let half = tail.len() / 2;
    let early = tail[..half].iter().map(|c| c.norm).fold(0.0, f64::max);
    let late = tail[half..].iter().map(|c| c.norm).fold(0.0, f64::max);
    Ok(CookReport {
        wave,
        tail,
        residuals,
        non_decaying: late > early,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatteredLimitSettings {
    pub t: f64,
    pub count: usize,
    pub seed: u64,
    pub quadrature_step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatteredLimitReport {
    pub estimate: CharFunctionalEstimate,
    /// `exp(-Q_inf(W Psi, W Psi) / 2)`.
    pub prediction: f64,
    /// `exp(-Q_inf(Psi, Psi) / 2)`, the value without scattering.
    pub free_prediction: f64,
    /// `exp(-Q_0(U'(t) Psi, U'(t) Psi) / 2)`, the exact value at `t` for a
    /// Gaussian measure.
    pub gaussian_at_t: Option<f64>,
    pub z_score: f64,
}

/// Monte Carlo `mu_t(Psi)` under the magnetic flow against the scattered
/// Gaussian prediction. Real samples are lifted to complex states and paired
/// with `U'(t) Psi`; `W` comes from the Cook integral up to `t`.
pub fn scattered_limit_experiment(
    measure: &MeasureSpec,
    potential: &MagneticPotential,
    mass: f64,
    psi: &TestFunction,
    settings: &ScatteredLimitSettings,
) -> Result<ScatteredLimitReport> {
    let batch = SampleBatch::new(measure.clone(), mass, settings.count, settings.seed, vec![settings.t])?;
    batch.require(1000)?;
    let l = *measure.lattice();
    l.ensure_same(potential.lattice())?;

    let solver = MagneticSolver::new(potential, mass)?;
    let phi = solver.adjoint_evolve(psi, settings.t)?;
    let pairings = batch.map_samples(|_, y| {
        let y = y.clone().into_complex();
        pairing(&l, &y.u, &y.v, &phi.psi0, &phi.psi1)
    });
    let (re, im) = char_function_estimate(&pairings);
    let estimate = CharFunctionalEstimate { t: settings.t, re, im };

    let (wave, _) = cook_wave_operator(psi, potential, mass, settings.t, settings.quadrature_step)?;
    let q_inf = limit_covariance(measure.spectral(), batch.dispersion())?;
    let prediction = (-0.5 * quadratic_form_eval(&q_inf, &wave)?).exp();
    let free_prediction = (-0.5 * quadratic_form_eval(&q_inf, psi)?).exp();
    let gaussian_at_t = match measure.kind() {
        MeasureKind::Gaussian => Some((-0.5 * quadratic_form_eval(measure.spectral(), &phi)?).exp()),
        _ => None,
    };
    Ok(ScatteredLimitReport {
        z_score: estimate.z_score(prediction),
        estimate,
        prediction,
        free_prediction,
        gaussian_at_t,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MagneticCounterexampleReport {
    pub times: Vec<f64>,
    pub re: Vec<f64>,
    pub period: f64,
    pub first_amplitude: f64,
    pub last_amplitude: f64,
}

/// `Re mu_t(Psi)` for the `+-1` ensemble under the magnetic flow, sampled on
/// a grid of `t_end / (period / 32)` steps. On the periodic box the constant
/// states never disperse, so no window is imposed.
pub fn magnetic_counterexample(
    potential: &MagneticPotential,
    mass: f64,
    psi: &TestFunction,
    t_end: f64,
    count: usize,
    seed: u64,
) -> Result<MagneticCounterexampleReport> {
    let l = *potential.lattice();
    let period = 2.0 * std::f64::consts::PI / mass;
    if !(t_end >= period) {
        return Err(invalid("t_end", "trace must cover at least one period"));
    }
    let batch = SampleBatch::new(MeasureSpec::counterexample(&l), mass, count, seed, vec![])?;
    let signs: Vec<f64> = batch.map_samples(|_, y| y.u[0].re);
    let solver = MagneticSolver::new(potential, mass)?;
    let mut state = MagneticState::from_test_function(psi);
    state.support_radius = None;
    let dt = period / 32.0;
    let steps = (t_end / dt).round() as usize;
    let (mut times, mut re) = (Vec::new(), Vec::new());
    for k in 0..=steps {
        let t = k as f64 * dt;
        solver.advance(&mut state, t)?;
        // <+-1, Phi> = +- sum Re Phi0 dx^n
        let s = state.field.v.iter().map(|z| z.re).sum::<f64>() * l.cell_volume();
        let p: Vec<f64> = signs.iter().map(|sg| sg * s).collect();
        times.push(t);
        re.push(char_function_estimate(&p).0.value);
    }
    let span = |range: &[f64]| {
        range.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - range.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    Ok(MagneticCounterexampleReport {
        first_amplitude: span(&re[..=32]),
        last_amplitude: span(&re[re.len() - 33..]),
        times,
        re,
        period,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Lattice;
    use crate::magnetic::potential::build_potential;
    use crate::random::DensityParams;

    #[test]
    fn zero_potential_leaves_psi_fixed() {
        let l = Lattice::new(2, 64, 64.0).unwrap();
        let pot = build_potential(&l, 5.0, 0.0).unwrap();
        let psi = TestFunction::gaussian(l, 1.5, 1.0, 0.5).unwrap();
        let (w, tail) = cook_wave_operator(&psi, &pot, 1.0, 4.0, 0.5).unwrap();
        assert_eq!(w.psi0, psi.psi0);
        assert_eq!(w.psi1, psi.psi1);
        assert!(tail.iter().all(|c| c.norm == 0.0));
    }

    #[test]
    fn free_local_norm_empties_the_ball() {
        let l = Lattice::new(2, 128, 128.0).unwrap();
        let pot = build_potential(&l, 6.0, 0.0).unwrap();
        let psi = TestFunction::gaussian(l, 1.5, 1.0, 1.0).unwrap();
        let rec = local_decay_probe(&psi, &pot, 1.0, &[5.0, 40.0], 6.0).unwrap();
        assert!(rec.local_norm[1] < 0.2 * rec.local_norm[0], "{:?}", rec.local_norm);
    }

    #[test]
    fn rejects_bad_quadrature_grids() {
        let l = Lattice::new(2, 64, 64.0).unwrap();
        let pot = build_potential(&l, 5.0, 0.5).unwrap();
        let psi = TestFunction::gaussian(l, 1.0, 1.0, 0.0).unwrap();
        assert!(cook_experiment(&psi, &pot, 1.0, 4.0, 0.3, &[]).is_err());
        assert!(cook_experiment(&psi, &pot, 1.0, 4.0, 0.5, &[1.25]).is_err());
        assert!(cook_experiment(&psi, &pot, 1.0, 30.0, 0.5, &[]).is_err());
    }

    #[test]
    fn free_scattered_limit_reduces_to_free_limit() {
        let l = Lattice::new(2, 64, 64.0).unwrap();
        let pot = build_potential(&l, 5.0, 0.0).unwrap();
        let spec = MeasureSpec::gaussian(&l, DensityParams { r0: 3.0, ..Default::default() }).unwrap();
        let psi = TestFunction::gaussian(l, 1.0, 0.5, 0.5).unwrap();
        let s = ScatteredLimitSettings {
            t: 8.0,
            count: 1000,
            seed: 1,
            quadrature_step: 0.5,
        };
        let rep = scattered_limit_experiment(&spec, &pot, 1.0, &psi, &s).unwrap();
        assert_eq!(rep.prediction, rep.free_prediction);
        let g = rep.gaussian_at_t.unwrap();
        assert!(rep.estimate.z_score(g) < 4.0, "{rep:?}");
    }

    #[test]
    fn constant_ensemble_keeps_oscillating_away_from_the_potential() {
        let l = Lattice::new(2, 128, 64.0).unwrap();
        let pot = build_potential(&l, 4.0, 0.4).unwrap();
        let psi = TestFunction::gaussian_at(l, [16.0, 0.0, 0.0], 1.0, 1.0, 1.0).unwrap();
        let rep = magnetic_counterexample(&pot, 1.0, &psi, 4.0 * 2.0 * std::f64::consts::PI, 200, 3).unwrap();
        assert!(rep.first_amplitude > 1.0, "{}", rep.first_amplitude);
        assert!(rep.last_amplitude >= 0.9 * rep.first_amplitude, "{rep:?}");
    }
}
