//! Compactly supported magnetic vector potentials in two dimensions.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::field::bump;
use crate::lattice::Lattice;

/// Support radius and amplitude of the rotational potential
/// `A = (-x2 a(|x|), x1 a(|x|))`, `a(r) = amplitude * exp(-1/(1 - (r/R0)^2))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PotentialParams {
    pub support_radius: f64,
    pub amplitude: f64,
}

impl Default for PotentialParams {
    fn default() -> Self {
        PotentialParams {
            support_radius: 6.0,
            amplitude: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MagneticPotential {
    lattice: Lattice,
    params: PotentialParams,
    pub a1: Vec<f64>,
    pub a2: Vec<f64>,
}

/// Radial profile `a(r)` and its derivative `a'(r)`.
fn profile(r: f64, p: &PotentialParams) -> (f64, f64) {
    let s = r / p.support_radius;
    if s >= 1.0 {
        return (0.0, 0.0);
    }
    let a = p.amplitude * bump(s);
    let d = a * (-2.0 * s / (1.0 - s * s).powi(2)) / p.support_radius;
    (a, d)
}

pub fn build_potential(lattice: &Lattice, support_radius: f64, amplitude: f64) -> Result<MagneticPotential> {
    MagneticPotential::new(
        lattice,
        PotentialParams {
            support_radius,
            amplitude,
        },
    )
}

impl MagneticPotential {
    pub fn new(lattice: &Lattice, params: PotentialParams) -> Result<Self> {
        if lattice.dim() != 2 {
            return Err(Error::Unsupported(format!(
                "magnetic dynamics are two-dimensional, got dim = {}",
                lattice.dim()
            )));
        }
        if !(params.support_radius > 0.0) || params.support_radius >= 0.25 * lattice.box_length() {
            return Err(Error::SupportTooLarge {
                support: params.support_radius,
                box_length: lattice.box_length(),
            });
        }
        if !(params.amplitude >= 0.0) || !params.amplitude.is_finite() {
            return Err(invalid("amplitude", "must be finite and nonnegative"));
        }
        let (mut a1, mut a2) = (Vec::with_capacity(lattice.len()), Vec::with_capacity(lattice.len()));
        for i in 0..lattice.len() {
            let x = lattice.position(i);
            let (a, _) = profile(lattice.radius(i), &params);
            a1.push(-x[1] * a);
            a2.push(x[0] * a);
        }
        Ok(MagneticPotential {
            lattice: *lattice,
            params,
            a1,
            a2,
        })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn params(&self) -> PotentialParams {
        self.params
    }

    pub fn support_radius(&self) -> f64 {
        self.params.support_radius
    }

    pub fn is_zero(&self) -> bool {
        self.params.amplitude == 0.0
    }

    /// `curl A = d1 A2 - d2 A1 = 2 a + |x| a'` at every lattice point.
    pub fn curl(&self) -> Vec<f64> {
        (0..self.lattice.len())
            .map(|i| {
                let r = self.lattice.radius(i);
                let (a, d) = profile(r, &self.params);
                2.0 * a + r * d
            })
            .collect()
    }

    /// `int |curl A| dx` by lattice quadrature.
    pub fn total_curl(&self) -> f64 {
        self.curl().iter().map(|c| c.abs()).sum::<f64>() * self.lattice.cell_volume()
    }

    /// Largest `|A|` at `|x| > R0`.
    pub fn max_outside(&self) -> f64 {
        (0..self.lattice.len())
            .filter(|&i| self.lattice.radius(i) > self.params.support_radius)
            .map(|i| self.a1[i].hypot(self.a2[i]))
            .fold(0.0, f64::max)
    }

    pub fn max_modulus(&self) -> f64 {
        self.a1
            .iter()
            .zip(&self.a2)
            .map(|(a, b)| a.hypot(*b))
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fft;
    use num_complex::Complex64;

    #[test]
    fn zero_amplitude_is_free() {
        let l = Lattice::new(2, 64, 32.0).unwrap();
        let p = build_potential(&l, 4.0, 0.0).unwrap();
        assert!(p.is_zero());
        assert!(p.a1.iter().chain(&p.a2).all(|&a| a == 0.0));
        assert_eq!(p.total_curl(), 0.0);
    }

    fn spectral_curl_error(points: usize) -> f64 {
        let l = Lattice::new(2, points, 32.0).unwrap();
        let p = build_potential(&l, 5.0, 0.8).unwrap();
        let d = |w: &[f64], axis: usize| {
            let mut h = fft::forward_real(&l, w);
            for (i, z) in h.iter_mut().enumerate() {
                *z *= Complex64::new(0.0, l.wavevector(i)[axis]);
            }
            fft::inverse_in_place(&l, &mut h);
            h
        };
        let (d1a2, d2a1) = (d(&p.a2, 0), d(&p.a1, 1));
        let curl = p.curl();
        (0..l.len())
            .map(|i| (d1a2[i].re - d2a1[i].re - curl[i]).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn support_and_curl() {
        let l = Lattice::new(2, 128, 32.0).unwrap();
        let p = build_potential(&l, 5.0, 0.8).unwrap();
        assert!(p.max_outside() < 1e-12);
        assert!(p.total_curl() > 0.0);
        // the spectral curl converges to the closed form under refinement
        let (coarse, fine) = (spectral_curl_error(128), spectral_curl_error(256));
        assert!(fine < 0.1 * coarse && fine < 1e-3, "{coarse} {fine}");
    }

    #[test]
    fn rejects_bad_inputs() {
        let l = Lattice::new(2, 64, 32.0).unwrap();
        assert!(matches!(build_potential(&l, 8.0, 1.0), Err(Error::SupportTooLarge { .. })));
        assert!(build_potential(&l, 4.0, -1.0).is_err());
        let l1 = Lattice::new(1, 64, 32.0).unwrap();
        assert!(matches!(build_potential(&l1, 4.0, 1.0), Err(Error::Unsupported(_))));
    }
}
