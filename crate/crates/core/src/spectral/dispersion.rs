use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::lattice::Lattice;

/// `omega(k) = sqrt(|k|^2 + m^2)` at every lattice wavenumber.
#[derive(Debug, Clone, PartialEq)]
pub struct Dispersion {
    lattice: Lattice,
    mass: f64,
    omega: Vec<f64>,
}

impl Dispersion {
    pub fn new(lattice: &Lattice, mass: f64) -> Result<Self> {
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(invalid("mass", format!("must be positive, got {mass}")));
        }
        let omega = (0..lattice.len())
            .map(|i| (lattice.k_squared(i) + mass * mass).sqrt())
            .collect();
        Ok(Dispersion {
            lattice: *lattice,
            mass,
            omega,
        })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn propagator(&self, t: f64) -> Propagator {
        Propagator::new(self, t)
    }
}

/// Per-mode evolution matrix
/// `[[cos wt, sin wt / w], [-w sin wt, cos wt]]` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagator {
    time: f64,
    entries: Vec<[f64; 4]>,
}

impl Propagator {
    pub fn new(dispersion: &Dispersion, t: f64) -> Self {
        let entries = dispersion
            .omega
            .iter()
            .map(|&w| mode_matrix(w, t))
            .collect();
        Propagator { time: t, entries }
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Row-major `[g00, g01, g10, g11]` per mode.
    pub fn entries(&self) -> &[[f64; 4]] {
        &self.entries
    }

    pub fn determinant(&self, mode: usize) -> f64 {
        let g = self.entries[mode];
        g[0] * g[3] - g[1] * g[2]
    }

    /// Mode-wise product `self * other`.
    pub fn compose(&self, other: &Propagator) -> Propagator {
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| mat_mul(a, b))
            .collect();
        Propagator {
            time: self.time + other.time,
            entries,
        }
    }

    /// Apply to spectral coefficients `(u_hat, v_hat)` in place.
    pub fn apply(&self, u_hat: &mut [Complex64], v_hat: &mut [Complex64]) {
        for ((g, u), v) in self.entries.iter().zip(u_hat.iter_mut()).zip(v_hat.iter_mut()) {
            let (a, b) = (*u, *v);
            *u = a * g[0] + b * g[1];
            *v = a * g[2] + b * g[3];
        }
    }
}

pub(crate) fn mode_matrix(w: f64, t: f64) -> [f64; 4] {
    let (s, c) = (w * t).sin_cos();
    [c, s / w, -w * s, c]
}

pub(crate) fn mat_mul(a: &[f64; 4], b: &[f64; 4]) -> [f64; 4] {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn lattice() -> Lattice {
        Lattice::new(2, 16, 7.0).unwrap()
    }

    #[test]
    fn zero_mode_equals_mass_and_pythagorean_triple() {
        let l = Lattice::new(1, 8, 2.0 * PI).unwrap();
        let d = Dispersion::new(&l, 1.0).unwrap();
        assert_eq!(d.omega()[0], 1.0);
        // k = 4 is the Nyquist mode for N = 8, L = 2 pi
        let d = Dispersion::new(&l, 3.0).unwrap();
        assert!((d.omega()[l.nyquist_index()] - 5.0).abs() < 1e-14);
    }

    #[test]
    fn even_in_k_and_bounded_below() {
        let l = lattice();
        let d = Dispersion::new(&l, 0.7).unwrap();
        for i in 0..l.len() {
            assert_eq!(d.omega()[i], d.omega()[l.negated_index(i)]);
            assert!(d.omega()[i] >= 0.7);
        }
    }

    #[test]
    fn rejects_nonpositive_mass() {
        assert!(Dispersion::new(&lattice(), 0.0).is_err());
        assert!(Dispersion::new(&lattice(), -1.0).is_err());
    }

    #[test]
    fn identity_at_zero_and_quarter_turn() {
        let l = lattice();
        let d = Dispersion::new(&l, 1.0).unwrap();
        for g in d.propagator(0.0).entries() {
            assert_eq!(*g, [1.0, 0.0, -0.0, 1.0]);
        }
        let g = d.propagator(PI / 2.0).entries()[0];
        let want = [0.0, 1.0, -1.0, 0.0];
        for (a, b) in g.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    proptest! {
        #[test]
        fn group_law_and_unit_determinant(t in -50.0f64..50.0, s in -50.0f64..50.0, m in 0.1f64..3.0) {
            let l = lattice();
            let d = Dispersion::new(&l, m).unwrap();
            let (gt, gs, gts) = (d.propagator(t), d.propagator(s), d.propagator(t + s));
            let prod = gt.compose(&gs);
            for mode in 0..l.len() {
                let w = d.omega()[mode];
                let scale = [1.0, 1.0 / w, w, 1.0];
                for e in 0..4 {
                    let diff = (prod.entries()[mode][e] - gts.entries()[mode][e]).abs();
                    prop_assert!(diff <= 1e-12 * scale[e].max(1.0),
                        "mode {} entry {} diff {:e}", mode, e, diff);
                }
                prop_assert!((gt.determinant(mode) - 1.0).abs() < 1e-12);
            }
        }
    }
}
