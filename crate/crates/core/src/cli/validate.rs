//! Pre-dispatch checks. Each diagnostic names one field and the constraint it
//! breaks; an empty list means the config is runnable.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cli::config::{ExperimentConfig, ExperimentName, PsiShape};
use crate::random::{MeasureKind, MeasureSpec};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub field: String,
    pub constraint: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.constraint)
    }
}

struct Collector(Vec<Diagnostic>);

impl Collector {
    fn require(&mut self, ok: bool, field: &str, constraint: impl Into<String>) -> bool {
        if !ok {
            self.0.push(Diagnostic {
                field: field.to_string(),
                constraint: constraint.into(),
            });
        }
        ok
    }
}

fn positive(x: f64) -> bool {
    x > 0.0 && x.is_finite()
}

pub fn validate(c: &ExperimentConfig) -> Vec<Diagnostic> {
    use ExperimentName as E;
    let mut d = Collector(Vec::new());
    let e = c.experiment;

    let mut lattice_ok = d.require((1..=3).contains(&c.dim), "dim", "must be 1, 2 or 3");
    lattice_ok &= d.require(c.points.is_multiple_of(2), "points", "must be even");
    lattice_ok &= d.require(c.points >= 8, "points", "must be at least 8");
    lattice_ok &= d.require(positive(c.box_length), "box_length", "must be positive and finite");
    d.require(positive(c.mass), "mass", "must be positive and finite");
    let half = 0.5 * c.box_length;

    // times
    let times_ok = d.require(
        c.times.iter().all(|t| t.is_finite() && *t >= 0.0),
        "times",
        "must be finite and nonnegative",
    );
    if times_ok {
        match e {
            E::GibbsLimit => {}
            E::Decay => {
                d.require(
                    c.times.len() >= 2 && c.times.iter().all(|&t| t > 0.0),
                    "times",
                    "decay needs at least two positive times",
                );
            }
            E::MagneticDecay | E::Cook | E::Clt | E::Counterexample | E::CovarianceConvergence => {
                d.require(
                    !c.times.is_empty() && c.times.windows(2).all(|w| w[1] > w[0]),
                    "times",
                    "must be a nonempty increasing list",
                );
            }
            E::RoomCorridor => {
                let doubled = c
                    .times
                    .iter()
                    .any(|&t| t > 0.0 && c.times.iter().any(|&s| (s - 2.0 * t).abs() < 1e-9 * t));
                d.require(doubled, "times", "room-corridor needs some t together with 2t");
            }
            E::TheoremA | E::SobolevNorm => {
                d.require(!c.times.is_empty(), "times", "must not be empty");
            }
        }
    }

    let min = e.min_samples();
    if min > 0 {
        d.require(c.samples >= min, "samples", format!("{e} needs at least {min} samples"));
    }

    // test pair and observation window
    let psi_ok = d.require(positive(c.psi_width), "psi_width", "must be positive")
        & d.require(
            c.psi_shape == PsiShape::Gaussian || c.psi_offset == 0.0,
            "psi_offset",
            "only Gaussian pairs can be shifted",
        )
        & d.require(c.psi_offset.is_finite(), "psi_offset", "must be finite");
    let magnetic_margin = if e.is_magnetic() { c.potential_radius } else { 0.0 };
    if psi_ok && e.needs_window() {
        let reach = c.evolution_horizon() + c.psi_support() + magnetic_margin;
        let term = if e.is_magnetic() { "t + r + R0" } else { "t + r" };
        d.require(
            reach < half,
            "times",
            format!("window {term} = {reach} must be below L/2 = {half}"),
        );
    } else if psi_ok && e == E::Counterexample {
        d.require(c.psi_support() < half, "psi_width", format!("test pair radius must be below L/2 = {half}"));
    }
    d.require(c.psi_variance >= 0.0 && c.psi_variance.is_finite(), "psi_variance", "must be finite and nonnegative");

    // initial measure
    if e.uses_measure() {
        let ok = d.require(c.d0 >= 0.0 && c.d1 >= 0.0, "d0/d1", "amplitudes must be nonnegative")
            & d.require(positive(c.r0), "r0", "must be positive")
            & d.require(
                c.measure != MeasureKind::Counterexample,
                "measure",
                format!("{e} needs a mixing measure"),
            )
            & d.require(
                c.measure != MeasureKind::Mapped || positive(c.map_width),
                "map_width",
                "must be positive",
            );
        if ok && lattice_ok {
            if let Err(err) = c.lattice().and_then(|l| MeasureSpec::from_params(&l, &c.measure_params())) {
                d.require(false, "measure", err.to_string());
            }
        }
    }

    match e {
        E::CovarianceConvergence => {
            d.require(
                !c.lags.is_empty() && c.lags.iter().all(|&z| z < c.points / 2),
                "lags",
                "must be a nonempty list of offsets below N/2",
            );
        }
        E::GibbsLimit => {
            d.require(
                !c.scales.is_empty()
                    && c.scales.iter().all(|&r| r > 0.0 && r <= 1.0)
                    && c.scales.windows(2).all(|w| w[1] < w[0]),
                "scales",
                "must be a nonempty decreasing list in (0, 1]",
            );
        }
        E::RoomCorridor => {
            d.require(c.room_width >= 1.0 && c.room_width.is_finite(), "room_width", "must be at least 1");
            d.require(positive(c.corridor_width), "corridor_width", "must be positive");
            d.require(
                c.room_width + c.corridor_width <= c.box_length,
                "corridor_width",
                "room plus corridor must fit in the box",
            );
        }
        E::Decay => {
            d.require(positive(c.envelope_distance), "envelope_distance", "must be positive");
            d.require(
                c.envelope_t_min > c.envelope_distance && c.envelope_t_max > c.envelope_t_min,
                "envelope_t_min",
                "need envelope_distance < envelope_t_min < envelope_t_max",
            );
            d.require(c.envelope_points >= 2, "envelope_points", "must be at least 2");
        }
        E::SobolevNorm => {
            let bound = -0.5 * c.dim as f64;
            d.require(c.sobolev_s < bound, "sobolev_s", format!("must be below -n/2 = {bound}"));
            d.require(c.sobolev_alpha < bound, "sobolev_alpha", format!("must be below -n/2 = {bound}"));
            d.require(positive(c.temperature), "temperature", "must be positive");
            d.require(
                c.refinements.len() >= 3
                    && c.refinements.iter().all(|&n| n.is_multiple_of(2) && n >= 8)
                    && c.refinements.windows(2).all(|w| w[1] > w[0]),
                "refinements",
                "need at least three increasing even point counts of at least 8",
            );
        }
        _ => {}
    }

    if e.is_magnetic() {
        d.require(c.dim == 2, "dim", "magnetic experiments are two-dimensional");
        d.require(
            positive(c.potential_radius) && c.potential_radius < 0.25 * c.box_length,
            "potential_radius",
            "must be positive and below L/4",
        );
        d.require(
            c.potential_amplitude >= 0.0 && c.potential_amplitude.is_finite(),
            "potential_amplitude",
            "must be finite and nonnegative",
        );
        match e {
            E::MagneticDecay => {
                d.require(positive(c.local_radius), "local_radius", "must be positive");
                d.require(positive(c.energy_horizon), "energy_horizon", "must be positive");
            }
            E::Cook => {
                let h = c.quadrature_step;
                if d.require(positive(h), "quadrature_step", "must be positive")
                    && d.require(positive(c.horizon), "horizon", "must be positive")
                {
                    let on_grid = |t: f64| ((t / h).round() * h - t).abs() < 1e-9 * h.max(t);
                    d.require(
                        on_grid(c.horizon) && c.times.iter().all(|&t| on_grid(t) && t <= c.horizon),
                        "times",
                        "checkpoints and horizon must be quadrature nodes with checkpoints up to the horizon",
                    );
                    d.require(
                        c.increment_times.len() == 2
                            && c.increment_times[0] < c.increment_times[1]
                            && c.increment_times[1] <= c.horizon,
                        "increment_times",
                        "need an early and a later time within the horizon",
                    );
                }
            }
            E::TheoremA => {
                d.require(positive(c.quadrature_step), "quadrature_step", "must be positive");
            }
            _ => {}
        }
    }
    d.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        for e in ExperimentName::ALL {
            let diags = validate(&ExperimentConfig::defaults_for(e));
            assert!(diags.is_empty(), "{e}: {diags:?}");
        }
    }

    #[test]
    fn odd_points_give_one_diagnostic() {
        let c = ExperimentConfig {
            points: 511,
            ..ExperimentConfig::defaults_for(ExperimentName::CovarianceConvergence)
        };
        let diags = validate(&c);
        assert_eq!(diags.len(), 1, "{diags:?}");
        assert_eq!(diags[0].field, "points");
    }

    #[test]
    fn one_sample_clt_gives_one_diagnostic() {
        let c = ExperimentConfig {
            samples: 1,
            ..ExperimentConfig::defaults_for(ExperimentName::Clt)
        };
        let diags = validate(&c);
        assert_eq!(diags.len(), 1, "{diags:?}");
        assert_eq!(diags[0].field, "samples");
    }

    #[test]
    fn window_violation_is_named() {
        let c = ExperimentConfig {
            times: vec![10.0, 195.0],
            ..ExperimentConfig::defaults_for(ExperimentName::Clt)
        };
        let diags = validate(&c);
        assert_eq!(diags.len(), 1, "{diags:?}");
        assert!(diags[0].constraint.contains("L/2"));
        let m = ExperimentConfig {
            times: vec![10.0, 20.0, 60.0],
            horizon: 60.0,
            ..ExperimentConfig::defaults_for(ExperimentName::Cook)
        };
        assert!(validate(&m).iter().any(|d| d.constraint.contains("R0")));
    }

    #[test]
    fn magnetic_runs_need_two_dimensions() {
        let c = ExperimentConfig {
            dim: 1,
            ..ExperimentConfig::defaults_for(ExperimentName::MagneticDecay)
        };
        assert!(validate(&c).iter().any(|d| d.field == "dim"));
    }
}
