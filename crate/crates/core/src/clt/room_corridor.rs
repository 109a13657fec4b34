//! Bernstein's room-corridor splitting of `<Y(t), Psi>` along the last axis.
//!
//! The last coordinate `s` is cut into half-open slabs of period
//! `h = d + rho`: slab `j` is the room `[jh, jh + d)` followed by the corridor
//! `[jh + d, (j+1)h)`. With `Phi = U0'(t) Psi`,
//! `r_t^j = <Y0, chi_r^j Phi>` and `c_t^j = <Y0, chi_c^j Phi>`, and the
//! pieces sum back to `<Y(t), Psi>` exactly because the slabs partition the
//! lattice.

use serde::{Deserialize, Serialize};

use crate::clt::batch::SampleBatch;
use crate::clt::stats::{mean_estimate, Estimate};
use crate::engine::quadratic_form_eval;
use crate::error::{invalid, Result};
use crate::field::TestFunction;
use crate::lattice::Lattice;
use crate::spectral::{adjoint_evolve_with, check_window, evolve_with};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoomCorridorLayout {
    pub room_width: f64,
    pub corridor_width: f64,
}

impl RoomCorridorLayout {
    pub fn new(room_width: f64, corridor_width: f64) -> Result<Self> {
        if !(room_width >= 1.0) || !room_width.is_finite() {
            return Err(invalid("room_width", format!("must be at least 1, got {room_width}")));
        }
        if !(corridor_width > 0.0) || !corridor_width.is_finite() {
            return Err(invalid("corridor_width", "must be positive"));
        }
        Ok(RoomCorridorLayout {
            room_width,
            corridor_width,
        })
    }

    /// Widths `d_t = t / ln t` and `rho_t = t^(1 - delta)`, for `t > e`.
    pub fn asymptotic(t: f64, delta: f64) -> Result<Self> {
        if !(t > std::f64::consts::E) {
            return Err(invalid("t", "asymptotic layout needs t > e"));
        }
        if !(0.0..1.0).contains(&delta) {
            return Err(invalid("delta", "must lie in [0, 1)"));
        }
        Self::new(t / t.ln(), t.powf(1.0 - delta))
    }

    pub fn period(&self) -> f64 {
        self.room_width + self.corridor_width
    }

    /// `N_t`: slabs needed on each side to cover `|s| <= extent`.
    pub fn slab_count(&self, extent: f64) -> i64 {
        (extent / self.period()).ceil() as i64
    }

    /// Slab index and whether `s` falls in the room of that slab.
    pub fn locate(&self, s: f64) -> (i64, bool) {
        let h = self.period();
        let j = (s / h).floor();
        (j as i64, s - j * h < self.room_width)
    }

    /// Nearest `|s|` over the room (`room = true`) or corridor of slab `j`.
    pub fn distance_to_origin(&self, j: i64, room: bool) -> f64 {
        let h = self.period();
        let (lo, hi) = if room {
            (j as f64 * h, j as f64 * h + self.room_width)
        } else {
            (j as f64 * h + self.room_width, (j + 1) as f64 * h)
        };
        if lo > 0.0 {
            lo
        } else if hi <= 0.0 {
            -hi
        } else {
            0.0
        }
    }

    fn check_box(&self, lattice: &Lattice) -> Result<()> {
        if self.period() > lattice.box_length() {
            Err(invalid(
                "layout",
                format!(
                    "period {} exceeds the box length {}",
                    self.period(),
                    lattice.box_length()
                ),
            ))
        } else {
            Ok(())
        }
    }
}

/// Second moments of the room and corridor pieces of one slab.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlabRecord {
    pub j: i64,
    pub room: Estimate,
    pub corridor: Estimate,
    /// `Q_0(chi_r^j Phi, chi_r^j Phi)` from the initial covariance.
    pub room_exact: f64,
    pub corridor_exact: f64,
    /// The room lies beyond the inflated cone `|s| > t + r`.
    pub room_outside_cone: bool,
    pub corridor_outside_cone: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoomCorridorReport {
    pub t: f64,
    pub layout: RoomCorridorLayout,
    pub slabs: Vec<SlabRecord>,
    /// Largest `|sum_j (r + c) - <Y(t), Psi>|` over samples, with the right
    /// side computed by evolving each sample forward.
    pub max_residual: f64,
    /// Slabs meeting the inflated cone.
    pub active_slabs: usize,
}

impl RoomCorridorReport {
    /// Slab with the largest estimated room variance.
    pub fn max_room(&self) -> &SlabRecord {
        self.slabs
            .iter()
            .max_by(|a, b| a.room.value.total_cmp(&b.room.value))
            .expect("a layout always has at least one slab")
    }

    pub fn max_room_exact(&self) -> f64 {
        self.slabs.iter().map(|s| s.room_exact).fold(0.0, f64::max)
    }

    /// Largest second moment over slabs flagged outside the cone.
    pub fn max_outside_variance(&self) -> f64 {
        self.slabs
            .iter()
            .flat_map(|s| {
                [
                    (s.room_outside_cone, s.room.value),
                    (s.corridor_outside_cone, s.corridor.value),
                ]
            })
            .filter(|(out, _)| *out)
            .map(|(_, v)| v)
            .fold(0.0, f64::max)
    }
}

pub fn room_corridor_decompose(
    batch: &SampleBatch,
    psi: &TestFunction,
    t: f64,
    layout: &RoomCorridorLayout,
) -> Result<RoomCorridorReport> {
    let l = *batch.measure().lattice();
    l.ensure_same(psi.lattice())?;
    check_window(t, psi.support_radius(), l.box_length())?;
    layout.check_box(&l)?;
    let phi = adjoint_evolve_with(psi, batch.dispersion(), t)?;
    let axis = l.dim() - 1;

    let n_t = layout.slab_count(l.half_length());
    let slots = (2 * n_t + 1) as usize;
    // slot of every lattice point: 2 * (j + n_t) for a room, +1 for a corridor
    let slot: Vec<usize> = (0..l.len())
        .map(|i| {
            let (j, room) = layout.locate(l.position(i)[axis]);
            2 * (j + n_t) as usize + usize::from(!room)
        })
        .collect();
    let dv = l.cell_volume();

    let rows = batch.map_samples(|_, y| -> Result<(Vec<f64>, f64)> {
        let mut acc = vec![0.0; 2 * slots];
        for (i, &s) in slot.iter().enumerate() {
            acc[s] += (y.u[i].re * phi.psi0[i].re + y.v[i].re * phi.psi1[i].re) * dv;
        }
        let direct = evolve_with(y, batch.dispersion(), t)?.pair(psi)?;
        let residual = (acc.iter().sum::<f64>() - direct).abs();
        Ok((acc, residual))
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let max_residual = rows.iter().map(|r| r.1).fold(0.0, f64::max);

    let cone = t.abs() + psi.support_radius();
    let q0 = batch.measure().spectral();
    let restricted = |target: usize| -> Result<f64> {
        let mask = |a: &[num_complex::Complex64]| -> Vec<num_complex::Complex64> {
            a.iter()
                .zip(&slot)
                .map(|(z, &s)| if s == target { *z } else { Default::default() })
                .collect()
        };
        let piece = TestFunction::from_parts(l, mask(&phi.psi0), mask(&phi.psi1), phi.support_radius());
        quadratic_form_eval(q0, &piece)
    };

    let mut slabs = Vec::new();
    let mut active_slabs = 0;
    for k in 0..slots {
        let (ir, ic) = (2 * k, 2 * k + 1);
        let present = |s: usize| slot.contains(&s);
        if !present(ir) && !present(ic) {
            continue;
        }
        let j = k as i64 - n_t;
        let second = |s: usize| {
            let xs: Vec<f64> = rows.iter().map(|r| r.0[s] * r.0[s]).collect();
            mean_estimate(&xs)
        };
        let room_out = layout.distance_to_origin(j, true) > cone;
        let corridor_out = layout.distance_to_origin(j, false) > cone;
        if !(room_out && corridor_out) {
            active_slabs += 1;
        }
        slabs.push(SlabRecord {
            j,
            room: second(ir),
            corridor: second(ic),
            room_exact: restricted(ir)?,
            corridor_exact: restricted(ic)?,
            room_outside_cone: room_out,
            corridor_outside_cone: corridor_out,
        });
    }

    Ok(RoomCorridorReport {
        t,
        layout: *layout,
        slabs,
        max_residual,
        active_slabs,
    })
}
