//! The ten experiments behind the runner. Each returns its data tables and
//! the pass/fail checks evaluated on them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cli::config::{ExperimentConfig, ExperimentName};
use crate::clt::{
    clt_experiment, counterexample_demo, decay_probe, normalized_test_pair, room_corridor_decompose,
    RoomCorridorLayout, SampleBatch,
};
use crate::engine::{
    covariance_convergence, evolve_covariance, expected_sobolev_norm, gibbs_covariance, gibbs_limit_experiment,
    GibbsSpec,
};
use crate::error::Result;
use crate::field::{FieldPair, TestFunction};
use crate::lattice::Lattice;
use crate::magnetic::{
    build_potential, cook_experiment, local_decay_probe, local_decay_rate, scattered_limit_experiment, MagneticPotential,
    MagneticSolver, MagneticState, ScatteredLimitSettings,
};
use crate::random::MeasureSpec;
use crate::spectral::{near_cone_decay, Dispersion};

/// A named numeric table written as one CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    fn new(name: &str, header: &[&'static str]) -> Self {
        Table {
            name: name.to_string(),
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// CSV text with every number in 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|x| format!("{x:.16e}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        }
    }

    /// `value <= limit`.
    fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Self::new(name, value <= limit, format!("{value:.6e} <= {limit:.6e}"))
    }

    /// `lo <= value <= hi`.
    fn within(name: &str, value: f64, lo: f64, hi: f64) -> Self {
        Self::new(name, (lo..=hi).contains(&value), format!("{value:.6} in [{lo}, {hi}]"))
    }
}

#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
    pub steps: BTreeMap<String, u64>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub fn execute(c: &ExperimentConfig) -> Result<Outcome> {
    use ExperimentName as E;
    let l = c.lattice()?;
    match c.experiment {
        E::CovarianceConvergence => covariance(c, l),
        E::Clt => clt(c, l),
        E::GibbsLimit => gibbs(c, l),
        E::RoomCorridor => room_corridor(c, l),
        E::Decay => decay(c, l),
        E::Counterexample => counterexample(c, l),
        E::MagneticDecay => magnetic_decay(c, l),
        E::Cook => cook(c, l),
        E::TheoremA => scattered_limit(c, l),
        E::SobolevNorm => sobolev(c, l),
    }
}

fn measure(c: &ExperimentConfig, l: &Lattice) -> Result<MeasureSpec> {
    MeasureSpec::from_params(l, &c.measure_params())
}

/// The configured pair, rescaled to `psi_variance` when that is positive.
fn test_pair(c: &ExperimentConfig, l: Lattice, measure: Option<&MeasureSpec>) -> Result<TestFunction> {
    let psi = c.test_function(l)?;
    match measure {
        Some(m) if c.psi_variance > 0.0 => {
            let batch = SampleBatch::new(m.clone(), c.mass, 2, c.seed, vec![])?;
            normalized_test_pair(&batch, &psi, c.psi_variance)
        }
        _ => Ok(psi),
    }
}

fn covariance(c: &ExperimentConfig, l: Lattice) -> Result<Outcome> {
    let m = measure(c, &l)?;
    let d = Dispersion::new(&l, c.mass)?;
    let lags: Vec<usize> = c.lags.iter().map(|&z| l.flat_index(&[z, 0, 0])).collect();
    let rep = covariance_convergence(m.spectral(), &d, &c.times, &lags)?;
    let mut t = Table::new("convergence", &["t", "sup_distance", "relative"]);
    for (ti, s) in rep.times.iter().zip(&rep.sup_distance) {
        t.push(vec![*ti, *s, s / rep.limit_at_origin]);
    }
    let last = rep.sup_distance.last().copied().unwrap_or(f64::NAN) / rep.limit_at_origin;
    Ok(Outcome {
        tables: vec![t],
        checks: vec![
            Check::new("distance decreases along times", rep.monotone, format!("{:?}", rep.sup_distance)),
            Check::at_most("relative distance at the largest time", last, 0.05),
        ],
        steps: BTreeMap::from([("times".into(), c.times.len() as u64)]),
    })
}

fn clt(c: &ExperimentConfig, l: Lattice) -> Result<Outcome> {
    let m = measure(c, &l)?;
    let psi = test_pair(c, l, Some(&m))?;
    let batch = SampleBatch::new(m, c.mass, c.samples, c.seed, c.times.clone())?;
    let rep = clt_experiment(&batch, &psi, &c.times)?;
    let mut t = Table::new(
        "clt",
        &[
            "t",
            "re",
            "re_se",
            "im",
            "im_se",
            "target",
            "gaussian_at_t",
            "distance",
            "z_limit",
            "excess_kurtosis",
            "excess_kurtosis_se",
        ],
    );
    for r in &rep.rows {
        let e = &r.estimate;
        t.push(vec![
            e.t,
            e.re.value,
            e.re.stderr,
            e.im.value,
            e.im.stderr,
            rep.target,
            r.gaussian_at_t,
            r.distance,
            r.z_limit,
            r.kurtosis.value,
            r.kurtosis.stderr,
        ]);
    }
    let last = rep.last();
    Ok(Outcome {
        tables: vec![t],
        checks: vec![
            Check::at_most("limit z-score at the largest time", last.z_limit, 4.0),
            Check::new("distance trend along times", rep.trend_monotone, ""),
            Check::at_most(
                "excess kurtosis z-score at the largest time",
                last.kurtosis.z_score(0.0),
                4.0,
            ),
        ],
        steps: BTreeMap::from([
            ("samples".into(), c.samples as u64),
            ("times".into(), c.times.len() as u64),
        ]),
    })
}

fn gibbs(c: &ExperimentConfig, l: Lattice) -> Result<Outcome> {
    let m = measure(c, &l)?;
    let rep = gibbs_limit_experiment(&m, &c.scales, c.mass, None)?;
    let mut t = Table::new("gibbs_limit", &["r", "distance_11", "distance_00", "g2", "temperature"]);
    for r in &rep.rows {
        t.push(vec![r.r, r.distance_11, r.distance_00, r.g2, rep.temperature]);
    }
    Ok(Outcome {
        tables: vec![t],
        checks: vec![
            Check::new("distances decrease along scales", rep.monotone, ""),
            Check::at_most("G2 relative error at the finest scale", rep.g2_relative_error, 0.05),
        ],
        steps: BTreeMap::from([("scales".into(), c.scales.len() as u64)]),
    })
}

fn room_corridor(c: &ExperimentConfig, l: Lattice) -> Result<Outcome> {
    let m = measure(c, &l)?;
    let psi = test_pair(c, l, Some(&m))?;
    let batch = SampleBatch::new(m, c.mass, c.samples, c.seed, c.times.clone())?;
    let layout = RoomCorridorLayout::new(c.room_width, c.corridor_width)?;
    let mut slabs = Table::new(
        "slabs",
        &[
            "t",
            "j",
            "room",
            "room_se",
            "corridor",
            "corridor_se",
            "room_exact",
            "corridor_exact",
            "room_outside_cone",
            "corridor_outside_cone",
        ],
    );
    let mut summary = Table::new(
        "summary",
        &["t", "max_room", "max_room_se", "max_room_exact", "max_residual", "max_outside", "active_slabs"],
    );
    let mut checks = Vec::new();
    let mut peaks = Vec::new();
    let (mut worst_residual, mut worst_outside) = (0.0f64, 0.0f64);
    for &t in &c.times {
        let rep = room_corridor_decompose(&batch, &psi, t, &layout)?;
        for s in &rep.slabs {
            slabs.push(vec![
                t,
                s.j as f64,
                s.room.value,
                s.room.stderr,
                s.corridor.value,
                s.corridor.stderr,
                s.room_exact,
                s.corridor_exact,
                f64::from(u8::from(s.room_outside_cone)),
                f64::from(u8::from(s.corridor_outside_cone)),
            ]);
        }
        let top = rep.max_room();
        let peak = rep.max_room_exact();
        summary.push(vec![
            t,
            top.room.value,
            top.room.stderr,
            peak,
            rep.max_residual,
            rep.max_outside_variance(),
            rep.active_slabs as f64,
        ]);
        worst_residual = worst_residual.max(rep.max_residual);
        worst_outside = worst_outside.max(rep.max_outside_variance() / peak);
        peaks.push((t, top.room.value));
    }
    checks.push(Check::at_most("reconstruction residual", worst_residual, 1e-10));
    checks.push(Check::at_most("outside-cone variance relative to the peak", worst_outside, 1e-16));
    for &(t, v) in &peaks {
        if let Some(&(_, w)) = peaks.iter().find(|(s, _)| (s - 2.0 * t).abs() < 1e-9 * t) {
            checks.push(Check::at_most(&format!("max room ratio from t = {t} to 2t"), w / v, 0.7));
        }
    }
    Ok(Outcome {
        tables: vec![slabs, summary],
        checks,
        steps: BTreeMap::from([
            ("samples".into(), c.samples as u64),
            ("times".into(), c.times.len() as u64),
        ]),
    })
}

/// Expected `-n/2` slope band for the sup-norm decay.
pub fn decay_band(dim: usize) -> (f64, f64) {
    match dim {
        1 => (-0.65, -0.35),
        2 => (-1.2, -0.8),
        _ => (-1.75, -1.25),
    }
}

fn decay(c: &ExperimentConfig, l: Lattice) -> Result<Outcome> {
    let psi = test_pair(c, l, None)?;
    let rec = decay_probe(&psi, c.mass, &c.times)?;
    let mut t = Table::new("decay", &["t", "sup_phi0", "sup_phi1", "sup"]);
    for i in 0..rec.times.len() {
        t.push(vec![rec.times[i], rec.sup_phi0[i], rec.sup_phi1[i], rec.sup[i]]);
    }
    let fit = near_cone_decay(c.envelope_distance, c.mass, c.envelope_t_min, c.envelope_t_max, c.envelope_points)?;
    let mut env = Table::new("near_cone_envelope", &["t", "envelope"]);
    for (ti, e) in fit.times.iter().zip(&fit.envelope) {
        env.push(vec![*ti, *e]);
    }
    let (lo, hi) = decay_band(c.dim);
    Ok(Outcome {
        tables: vec![t, env],
        checks: vec![
            Check::within("sup-norm log-log slope", rec.slope, lo, hi),
            Check::at_most("amplitude outside the inflated cone", rec.leak, 1e-8),
            Check::within("near-cone envelope slope", fit.slope, -0.83, -0.67),
        ],
        steps: BTreeMap::from([("times".into(), c.times.len() as u64)]),
    })
}

fn counterexample(c: &ExperimentConfig, l: Lattice) -> Result<Outcome> {
    let psi = test_pair(c, l, None)?;
    let rep = counterexample_demo(&l, c.mass, &psi, &c.times, c.samples, c.seed)?;
    let mut t = Table::new("trace", &["t", "re", "re_se", "im", "im_se", "closed_form", "re_one_period_later"]);
    for r in &rep.rows {
        t.push(vec![r.t, r.re.value, r.re.stderr, r.im.value, r.im.stderr, r.closed_form, r.shifted_re]);
    }
    Ok(Outcome {
        tables: vec![t],
        checks: vec![
            Check::at_most("closed-form error", rep.max_closed_form_error, 1e-10),
            Check::at_most("periodicity error", rep.max_periodicity_error, 1e-10),
            Check::new(
                "amplitude does not decay",
                rep.last_amplitude >= 0.9 * rep.first_amplitude && rep.first_amplitude > 0.0,
                format!("first {:.6}, last {:.6}", rep.first_amplitude, rep.last_amplitude),
            ),
        ],
        steps: BTreeMap::from([
            ("samples".into(), c.samples as u64),
            ("times".into(), c.times.len() as u64),
        ]),
    })
}

fn potential(c: &ExperimentConfig, l: &Lattice) -> Result<MagneticPotential> {
    build_potential(l, c.potential_radius, c.potential_amplitude)
}

fn solver_steps(solver: &MagneticSolver, t: f64) -> u64 {
    (t / solver.max_step()).ceil() as u64
}

/// Largest relative change of the gauge-covariant energy of the state built
/// from `psi` over `[0, horizon]`, sampled at unit times.
pub fn energy_drift(solver: &MagneticSolver, psi: &TestFunction, horizon: f64) -> Result<(f64, u64)> {
    let mut state = MagneticState::new(
        FieldPair::from_complex(*psi.lattice(), psi.psi0.clone(), psi.psi1.clone())?,
        None,
    );
    let e0 = solver.energy(&state.field)?;
    let mut drift: f64 = 0.0;
    let marks = horizon.ceil() as usize;
    for k in 1..=marks {
        solver.advance(&mut state, (k as f64).min(horizon))?;
        drift = drift.max((solver.energy(&state.field)? - e0).abs() / e0);
    }
    Ok((drift, state.steps))
}

fn magnetic_decay(c: &ExperimentConfig, l: Lattice) -> Result<Outcome> {
    let pot = potential(c, &l)?;
    let psi = test_pair(c, l, None)?;
    let rec = local_decay_probe(&psi, &pot, c.mass, &c.times, c.local_radius)?;
    let mut t = Table::new("local_decay", &["t", "local_norm", "rate", "ratio"]);
    for i in 0..rec.times.len() {
        t.push(vec![rec.times[i], rec.local_norm[i], local_decay_rate(rec.times[i]), rec.ratio[i]]);
    }
    let solver = MagneticSolver::new(&pot, c.mass)?;
    let (drift, energy_steps) = energy_drift(&solver, &psi, c.energy_horizon)?;
    Ok(Outcome {
        tables: vec![t],
        checks: vec![
            Check::new("smoothed local norm is nonincreasing", rec.smoothed_monotone, ""),
            Check::at_most("spread of norm over rate in the tail", rec.tail_ratio_spread, 10.0),
            Check::at_most("relative energy drift", drift, 1e-6),
        ],
        steps: BTreeMap::from([
            ("time_steps".into(), solver_steps(&solver, c.max_time())),
            ("energy_steps".into(), energy_steps),
        ]),
    })
}

fn cook(c: &ExperimentConfig, l: Lattice) -> Result<Outcome> {
    let pot = potential(c, &l)?;
    let psi = test_pair(c, l, None)?;
    let rep = cook_experiment(&psi, &pot, c.mass, c.horizon, c.quadrature_step, &c.times)?;
    let mut inc = Table::new("increments", &["t", "norm"]);
    for x in &rep.tail {
        inc.push(vec![x.t, x.norm]);
    }
    let mut res = Table::new("residuals", &["t", "residual"]);
    for r in &rep.residuals {
        res.push(vec![r.t, r.residual]);
    }
    let (early, late) = (c.increment_times[0], c.increment_times[1]);
    let ratio = rep.increment_at(early) / rep.increment_at(late);
    let decreasing = rep.residuals.windows(2).all(|w| w[1].residual < w[0].residual);
    let solver = MagneticSolver::new(&pot, c.mass)?;
    Ok(Outcome {
        tables: vec![inc, res],
        checks: vec![
            Check::new(
                "increment ratio between the early and late time",
                ratio >= 3.0,
                format!("{ratio:.6} >= 3"),
            ),
            Check::new(
                "residual decreases along checkpoints",
                decreasing,
                format!("{:?}", rep.residuals.iter().map(|r| r.residual).collect::<Vec<_>>()),
            ),
        ],
        steps: BTreeMap::from([
            ("quadrature_nodes".into(), rep.tail.len() as u64),
            ("time_steps".into(), solver_steps(&solver, c.horizon)),
        ]),
    })
}

fn scattered_limit(c: &ExperimentConfig, l: Lattice) -> Result<Outcome> {
    let m = measure(c, &l)?;
    let pot = potential(c, &l)?;
    let psi = test_pair(c, l, Some(&m))?;
    let t_end = c.max_time();
    let settings = ScatteredLimitSettings {
        t: t_end,
        count: c.samples,
        seed: c.seed,
        quadrature_step: c.quadrature_step,
    };
    let rep = scattered_limit_experiment(&m, &pot, c.mass, &psi, &settings)?;
    let mut t = Table::new(
        "scattered_limit",
        &["t", "re", "re_se", "im", "im_se", "prediction", "free_prediction", "gaussian_at_t", "z"],
    );
    let e = &rep.estimate;
    t.push(vec![
        e.t,
        e.re.value,
        e.re.stderr,
        e.im.value,
        e.im.stderr,
        rep.prediction,
        rep.free_prediction,
        rep.gaussian_at_t.unwrap_or(f64::NAN),
        rep.z_score,
    ]);
    let solver = MagneticSolver::new(&pot, c.mass)?;
    Ok(Outcome {
        tables: vec![t],
        checks: vec![Check::at_most("z-score against the scattered prediction", rep.z_score, 4.0)],
        steps: BTreeMap::from([
            ("samples".into(), c.samples as u64),
            ("time_steps".into(), solver_steps(&solver, t_end)),
        ]),
    })
}

fn sobolev(c: &ExperimentConfig, l: Lattice) -> Result<Outcome> {
    let g = GibbsSpec::new(c.temperature, c.mass)?;
    let mut t = Table::new("sobolev", &["points", "below_threshold", "at_zero"]);
    for &n in &c.refinements {
        let ln = Lattice::new(c.dim, n, c.box_length)?;
        let q = gibbs_covariance(&g, &ln);
        t.push(vec![
            n as f64,
            expected_sobolev_norm(&q, c.sobolev_s, c.sobolev_alpha),
            expected_sobolev_norm(&q, 0.0, c.sobolev_alpha),
        ]);
    }
    // successive increments of a convergent sequence contract; at s = 0 they grow
    let increments: Vec<f64> = t.rows.windows(2).map(|w| (w[1][1] - w[0][1]).abs()).collect();
    let contraction = increments
        .windows(2)
        .map(|w| w[1] / w[0])
        .fold(0.0, f64::max);
    let k = t.rows.len();
    let last_change = (t.rows[k - 1][1] - t.rows[k - 2][1]).abs() / t.rows[k - 2][1];
    let growth = t.rows[k - 1][2] / t.rows[k - 2][2];

    let q = gibbs_covariance(&g, &l);
    let d = Dispersion::new(&l, c.mass)?;
    let scale = q.entries().iter().flat_map(|b| b.iter().map(|z| z.norm())).fold(0.0, f64::max);
    let mut stationarity: f64 = 0.0;
    for &time in &c.times {
        let qt = evolve_covariance(&q, &d, time)?;
        for (a, b) in qt.entries().iter().zip(q.entries()) {
            for e in 0..4 {
                stationarity = stationarity.max((a[e] - b[e]).norm() / scale);
            }
        }
    }
    Ok(Outcome {
        tables: vec![t],
        checks: vec![
            Check::new(
                "increments contract under refinement below the threshold",
                contraction <= 0.75,
                format!("largest increment ratio {contraction:.6} <= 0.75, last relative change {last_change:.3e}"),
            ),
            Check::new("growth under refinement at s = 0", growth >= 1.5, format!("{growth:.6} >= 1.5")),
            Check::at_most("Gibbs covariance change under the flow", stationarity, 1e-12),
        ],
        steps: BTreeMap::from([("refinements".into(), c.refinements.len() as u64)]),
    })
}
