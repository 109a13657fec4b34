//! The compactly supported correlation family and its rescalings.
//!
//! Per axis the spectral profile is `f(z) = ((1 - cos(a z)) / z^2)^2` with
//! `a = r0 / sqrt(n)`. Its inverse transform is the self-convolution of the
//! tent `(a - |z|)_+ / 2`, namely `a^3/4 * B3(z/a)` with `B3` the centred cubic
//! B-spline, supported in `|z| <= 2a`. Densities are built by sampling that
//! real-space profile and transforming, which keeps the lattice covariance
//! exactly compactly supported and its spectrum nonnegative (it is the
//! periodic aliasing of `f`).

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::lattice::Lattice;
use crate::random::covariance::{CovarianceKind, SpectralCovariance};

/// Amplitudes `D0`, `D1` and correlation radius `r0` of the family
/// `q_hat^{ij}(k) = D_i delta^{ij} f(k_1) .. f(k_n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DensityParams {
    pub d0: f64,
    pub d1: f64,
    pub r0: f64,
}

impl Default for DensityParams {
    fn default() -> Self {
        DensityParams {
            d0: 1.0,
            d1: 1.0,
            r0: 2.0,
        }
    }
}

impl DensityParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.d0 >= 0.0) || !(self.d1 >= 0.0) {
            return Err(invalid("d0/d1", "amplitudes must be nonnegative"));
        }
        if !(self.r0 > 0.0) || !self.r0.is_finite() {
            return Err(invalid("r0", "correlation radius must be positive"));
        }
        Ok(())
    }

    /// Per-axis parameter `a = r0 / sqrt(n)`.
    pub fn axis_scale(&self, dim: usize) -> f64 {
        self.r0 / (dim as f64).sqrt()
    }
}

/// `f(z) = ((1 - cos(a z)) / z^2)^2`, with `f(0) = a^4 / 4`.
pub fn spectral_profile(z: f64, a: f64) -> f64 {
    let az = a * z;
    if az.abs() < 1e-4 {
        // (1 - cos x)/x^2 = 1/2 - x^2/24 + ..
        let g = a * a * (0.5 - az * az / 24.0);
        return g * g;
    }
    let g = 2.0 * (0.5 * az).sin().powi(2) / (z * z);
    g * g
}

/// Centred cubic B-spline, supported in `|u| <= 2`, unit integral.
pub fn cubic_bspline(u: f64) -> f64 {
    let u = u.abs();
    if u <= 1.0 {
        2.0 / 3.0 - u * u + 0.5 * u * u * u
    } else if u < 2.0 {
        (2.0 - u).powi(3) / 6.0
    } else {
        0.0
    }
}

/// Real-space profile `a^3/4 * B3(z/a)` whose transform is `f`.
pub fn correlation_profile(z: f64, a: f64) -> f64 {
    0.25 * a * a * a * cubic_bspline(z / a)
}

/// Build the diagonal density of the family, rescaled by `r` as
/// `q_r^{ij}(z) = r^(2-n-i-j) q^{ij}(z/r)` (`r = 1` gives the base family).
pub fn scaled_density(lattice: &Lattice, params: &DensityParams, r: f64) -> Result<SpectralCovariance> {
    params.validate()?;
    if !(r > 0.0) || r > 1.0 {
        return Err(invalid("r", format!("scale must lie in (0, 1], got {r}")));
    }
    let n = lattice.dim();
    let a = params.axis_scale(n) * r;
    let dx = lattice.spacing();
    if a < 2.0 * dx {
        return Err(Error::Unresolvable {
            scaled: a,
            spacing: dx,
        });
    }
    let support = 2.0 * a;
    if support >= lattice.half_length() || 2.0 * params.r0 * r >= lattice.half_length() {
        return Err(Error::SupportTooLarge {
            support: 2.0 * params.r0 * r,
            box_length: lattice.box_length(),
        });
    }
    let nf = n as f64;
    let shape: Vec<f64> = (0..lattice.len())
        .map(|i| {
            let x = lattice.position(i);
            (0..n).map(|d| correlation_profile(x[d], a)).product::<f64>()
        })
        .collect();
    // the profile at scale a already carries a^(3n) = (r a0)^(3n); rescale to
    // the prescribed r^(2-n-i-j) * (a0-profile)(z/r)
    let base_factor = r.powf(-3.0 * nf);
    let q00: Vec<f64> = shape.iter().map(|s| params.d0 * r.powf(2.0 - nf) * base_factor * s).collect();
    let q11: Vec<f64> = shape.iter().map(|s| params.d1 * r.powf(-nf) * base_factor * s).collect();
    let zero = vec![0.0; lattice.len()];
    let cov = SpectralCovariance::from_real_space(*lattice, [&q00, &zero, &zero, &q11], CovarianceKind::Initial)?;
    // the spectrum is real and even: drop transform roundoff
    let cov = cov.map_modes(CovarianceKind::Initial, |_, b| {
        let mut out = *b;
        for z in out.iter_mut() {
            z.im = 0.0;
        }
        out
    });
    cov.check_psd()?;
    Ok(cov)
}

/// Base density of the family.
pub fn build_spectral_density(lattice: &Lattice, params: &DensityParams) -> Result<SpectralCovariance> {
    scaled_density(lattice, params, 1.0)
}

/// Target temperature `T = 1/2 int q^11(z) dz` of the family; the rescaling
/// leaves it unchanged.
pub fn family_temperature(params: &DensityParams, dim: usize) -> f64 {
    let a = params.axis_scale(dim);
    // int a^3/4 B3(z/a) dz = a^4/4 = f(0)
    0.5 * params.d1 * (0.25 * a.powi(4)).powi(dim as i32)
}

/// `1/2 (q_hat^11(0) + m^2 q_hat^00(0))`, the lattice value of
/// `1/2 int (q^11 - Lap q^00 + m^2 q^00) dz`.
pub fn g2_functional(cov: &SpectralCovariance, mass: f64) -> f64 {
    let b = cov.entry(0);
    0.5 * (b[3].re + mass * mass * b[0].re)
}
