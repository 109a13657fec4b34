//! Initial measures: Gaussian fields from the compact-range family, their
//! pointwise images, and the constant-sign ensemble.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::lattice::Lattice;
use crate::random::covariance::{CovarianceKind, SpectralCovariance};
use crate::random::density::{family_temperature, scaled_density, DensityParams};
use crate::random::mixing::MixingProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum MeasureKind {
    #[default]
    Gaussian,
    Mapped,
    Counterexample,
}

/// Odd `C^1` maps with bounded derivative applied pointwise to a Gaussian
/// field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum PointwiseMap {
    #[default]
    Identity,
    /// `erf(x / width)`
    Erf { width: f64 },
    /// `tanh(x / width)`
    Tanh { width: f64 },
}

impl PointwiseMap {
    pub fn apply(&self, x: f64) -> f64 {
        match *self {
            PointwiseMap::Identity => x,
            PointwiseMap::Erf { width } => libm::erf(x / width),
            PointwiseMap::Tanh { width } => (x / width).tanh(),
        }
    }

    /// `sup |f'|`.
    pub fn derivative_bound(&self) -> f64 {
        match *self {
            PointwiseMap::Identity => 1.0,
            PointwiseMap::Erf { width } => 2.0 / (PI.sqrt() * width),
            PointwiseMap::Tanh { width } => 1.0 / width,
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, PointwiseMap::Identity)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            PointwiseMap::Identity => Ok(()),
            PointwiseMap::Erf { width } | PointwiseMap::Tanh { width } => {
                if width > 0.0 && width.is_finite() {
                    Ok(())
                } else {
                    Err(invalid("width", format!("map width must be positive, got {width}")))
                }
            }
        }
    }
}

/// Gauss-Hermite nodes and weights for the weight `exp(-x^2)`, by Newton
/// iteration on the orthonormal recurrence.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    const PIM4: f64 = 0.751_125_544_464_942_5; // pi^(-1/4)
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    let mut z = 0.0;
    for i in 0..n.div_ceil(2) {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-0.16667),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (PIM4, 0.0);
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-14 {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

const QUADRATURE_NODES: usize = 48;

/// `E f(X) g(Y)` for centred jointly Gaussian `(X, Y)` with the given
/// variances and covariance.
///
/// Closed forms cover identity and `erf` pairs; other pairs use tensor
/// Gauss-Hermite quadrature.
pub fn image_covariance(f: &PointwiseMap, g: &PointwiseMap, var_x: f64, var_y: f64, cov: f64) -> f64 {
    use PointwiseMap::*;
    if cov == 0.0 || var_x <= 0.0 || var_y <= 0.0 {
        // odd maps of independent centred variables
        return 0.0;
    }
    match (*f, *g) {
        (Identity, Identity) => cov,
        (Erf { width: a }, Erf { width: b }) => {
            let denom = ((1.0 + 2.0 * var_x / (a * a)) * (1.0 + 2.0 * var_y / (b * b))).sqrt();
            2.0 / PI * (2.0 * cov / (a * b) / denom).asin()
        }
        // Stein: E X h(Y) = cov E h'(Y)
        (Identity, Erf { width }) => erf_slope(width, var_y) * cov,
        (Erf { width }, Identity) => erf_slope(width, var_x) * cov,
        _ => hermite_image_covariance(f, g, var_x, var_y, cov, QUADRATURE_NODES),
    }
}

fn erf_slope(width: f64, var: f64) -> f64 {
    2.0 / (width * PI.sqrt()) / (1.0 + 2.0 * var / (width * width)).sqrt()
}

/// Quadrature route for [`image_covariance`], usable as an independent check.
pub fn hermite_image_covariance(
    f: &PointwiseMap,
    g: &PointwiseMap,
    var_x: f64,
    var_y: f64,
    cov: f64,
    nodes: usize,
) -> f64 {
    let (x, w) = gauss_hermite(nodes);
    let (sx, sy) = (var_x.sqrt(), var_y.sqrt());
    let rho = (cov / (sx * sy)).clamp(-1.0, 1.0);
    let rest = (1.0 - rho * rho).max(0.0).sqrt();
    let mut acc = 0.0;
    for (xi, wi) in x.iter().zip(&w) {
        let z1 = std::f64::consts::SQRT_2 * xi;
        let fx = f.apply(sx * z1);
        let mut inner = 0.0;
        for (xj, wj) in x.iter().zip(&w) {
            let z2 = std::f64::consts::SQRT_2 * xj;
            inner += wj * g.apply(sy * (rho * z1 + rest * z2));
        }
        acc += wi * fx * inner;
    }
    acc / PI
}

/// Parameters from which a measure is rebuilt; this is the serialized form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MeasureParams {
    pub kind: MeasureKind,
    #[serde(flatten)]
    pub density: DensityParams,
    /// Correlation rescaling `r` in `(0, 1]`.
    pub scale: f64,
    pub map0: PointwiseMap,
    pub map1: PointwiseMap,
}

impl Default for MeasureParams {
    fn default() -> Self {
        MeasureParams {
            kind: MeasureKind::Gaussian,
            density: DensityParams::default(),
            scale: 1.0,
            map0: PointwiseMap::Identity,
            map1: PointwiseMap::Identity,
        }
    }
}

/// An initial measure ready for sampling.
///
/// `base` is the Gaussian density that is sampled; `spectral` is the
/// covariance of the law itself (they differ only for mapped measures).
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSpec {
    params: MeasureParams,
    base: SpectralCovariance,
    spectral: SpectralCovariance,
    mixing: MixingProfile,
    temperature: f64,
}

impl MeasureSpec {
    pub fn from_params(lattice: &Lattice, params: &MeasureParams) -> Result<Self> {
        params.map0.validate()?;
        params.map1.validate()?;
        match params.kind {
            MeasureKind::Counterexample => Ok(Self::counterexample(lattice)),
            MeasureKind::Gaussian | MeasureKind::Mapped => {
                let base = scaled_density(lattice, &params.density, params.scale)?;
                let range = measured_range(&base);
                let mixing = MixingProfile::finite_range(
                    params.density.r0 * params.scale,
                    range,
                    1.0,
                )?;
                mixing.check_window(lattice)?;
                let spectral = if params.kind == MeasureKind::Mapped {
                    mapped_covariance(&base, &params.map0, &params.map1)?
                } else {
                    base.clone()
                };
                Ok(MeasureSpec {
                    params: *params,
                    base,
                    spectral,
                    mixing,
                    temperature: family_temperature(&params.density, lattice.dim()),
                })
            }
        }
    }

    pub fn gaussian(lattice: &Lattice, density: DensityParams) -> Result<Self> {
        Self::from_params(
            lattice,
            &MeasureParams {
                density,
                ..Default::default()
            },
        )
    }

    pub fn mapped(
        lattice: &Lattice,
        density: DensityParams,
        map0: PointwiseMap,
        map1: PointwiseMap,
    ) -> Result<Self> {
        Self::from_params(
            lattice,
            &MeasureParams {
                kind: MeasureKind::Mapped,
                density,
                map0,
                map1,
                ..Default::default()
            },
        )
    }

    /// `u0 = +-1` with equal probability, `v0 = 0`; covariance `q^00 = 1`.
    pub fn counterexample(lattice: &Lattice) -> Self {
        let mut d00 = vec![0.0; lattice.len()];
        d00[0] = lattice.volume();
        let zero = vec![0.0; lattice.len()];
        let spectral = SpectralCovariance::diagonal(*lattice, &d00, &zero, CovarianceKind::Initial)
            .expect("lengths match");
        MeasureSpec {
            params: MeasureParams {
                kind: MeasureKind::Counterexample,
                ..Default::default()
            },
            base: spectral.clone(),
            spectral,
            mixing: MixingProfile {
                support_radius: f64::INFINITY,
                effective_range: f64::INFINITY,
                bound: 1.0,
            },
            temperature: 0.0,
        }
    }

    /// The same family with correlations rescaled by `r`; the target
    /// temperature is carried over from the base family.
    pub fn scaled_family(&self, lattice: &Lattice, r: f64) -> Result<Self> {
        if self.params.kind == MeasureKind::Counterexample {
            return Err(invalid("kind", "the counterexample ensemble has no scaling family"));
        }
        let params = MeasureParams {
            scale: r,
            ..self.params
        };
        Self::from_params(lattice, &params)
    }

    pub fn params(&self) -> &MeasureParams {
        &self.params
    }

    pub fn kind(&self) -> MeasureKind {
        self.params.kind
    }

    pub fn lattice(&self) -> &Lattice {
        self.spectral.lattice()
    }

    pub fn base(&self) -> &SpectralCovariance {
        &self.base
    }

    pub fn spectral(&self) -> &SpectralCovariance {
        &self.spectral
    }

    pub fn mixing(&self) -> &MixingProfile {
        &self.mixing
    }

    pub fn maps(&self) -> Option<(PointwiseMap, PointwiseMap)> {
        (self.params.kind == MeasureKind::Mapped).then_some((self.params.map0, self.params.map1))
    }

    /// Target temperature `T = 1/2 int q^11 dz` of the unscaled family.
    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    /// Mean energy density of the law.
    pub fn mean_energy_density(&self, mass: f64) -> f64 {
        self.spectral.mean_energy_density(mass)
    }
}

/// Largest `|z|` where the sampled covariance is nonzero, plus one spacing.
fn measured_range(cov: &SpectralCovariance) -> f64 {
    let l = cov.lattice();
    let q0 = cov.real_space(0, 0);
    let q1 = cov.real_space(1, 1);
    let peak = q0[0].abs().max(q1[0].abs());
    if peak == 0.0 {
        return 0.0;
    }
    let r = (0..l.len())
        .filter(|&i| q0[i].abs().max(q1[i].abs()) > 1e-12 * peak)
        .map(|i| l.radius(i))
        .fold(0.0, f64::max);
    r + l.spacing()
}

/// Covariance of `(f0(u), f1(v))` when `(u, v)` has density `base`.
pub fn mapped_covariance(
    base: &SpectralCovariance,
    f0: &PointwiseMap,
    f1: &PointwiseMap,
) -> Result<SpectralCovariance> {
    let l = *base.lattice();
    let q: Vec<Vec<f64>> = (0..4).map(|c| base.real_space(c / 2, c % 2)).collect();
    let (v0, v1) = (q[0][0], q[3][0]);
    let maps = [(f0, f0, v0, v0), (f0, f1, v0, v1), (f1, f0, v1, v0), (f1, f1, v1, v1)];
    let mapped: Vec<Vec<f64>> = q
        .iter()
        .zip(maps)
        .map(|(qc, (f, g, vx, vy))| {
            qc.iter()
                .map(|&c| if c.abs() < 1e-300 { 0.0 } else { image_covariance(f, g, vx, vy, c) })
                .collect()
        })
        .collect();
    let cov = SpectralCovariance::from_real_space(
        l,
        [&mapped[0], &mapped[1], &mapped[2], &mapped[3]],
        CovarianceKind::Initial,
    )?;
    let cov = cov.map_modes(CovarianceKind::Initial, |_, b| {
        let mut out = *b;
        out[0].im = 0.0;
        out[3].im = 0.0;
        out
    });
    cov.check_psd()?;
    Ok(cov)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_rule_integrates_low_moments() {
        let (x, w) = gauss_hermite(20);
        let m0: f64 = w.iter().sum();
        let m2: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
        let m4: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(4)).sum();
        let sp = PI.sqrt();
        assert!((m0 - sp).abs() < 1e-13);
        assert!((m2 - 0.5 * sp).abs() < 1e-13);
        assert!((m4 - 0.75 * sp).abs() < 1e-13);
    }

    #[test]
    fn erf_closed_form_matches_quadrature() {
        let f = PointwiseMap::Erf { width: 0.8 };
        let g = PointwiseMap::Erf { width: 1.3 };
        for (vx, vy, c) in [(1.0, 1.0, 0.5), (0.3, 2.0, -0.6), (0.7, 0.7, 0.69)] {
            let exact = image_covariance(&f, &g, vx, vy, c);
            let quad = hermite_image_covariance(&f, &g, vx, vy, c, 64);
            assert!((exact - quad).abs() < 1e-9, "{exact} vs {quad}");
            let id = PointwiseMap::Identity;
            let exact = image_covariance(&id, &g, vx, vy, c);
            let quad = hermite_image_covariance(&id, &g, vx, vy, c, 64);
            assert!((exact - quad).abs() < 1e-9);
        }
    }

    #[test]
    fn identity_maps_keep_covariance() {
        let id = PointwiseMap::Identity;
        assert_eq!(image_covariance(&id, &id, 2.0, 3.0, 0.7), 0.7);
        assert_eq!(image_covariance(&PointwiseMap::Tanh { width: 1.0 }, &id, 2.0, 3.0, 0.0), 0.0);
    }

    #[test]
    fn measure_params_round_trip_through_toml() {
        let p = MeasureParams {
            kind: MeasureKind::Mapped,
            map0: PointwiseMap::Erf { width: 0.4 },
            ..Default::default()
        };
        let text = toml::to_string(&p).unwrap();
        let back: MeasureParams = toml::from_str(&text).unwrap();
        assert_eq!(p, back);
        let partial: MeasureParams = toml::from_str("r0 = 1.5\n").unwrap();
        assert_eq!(partial.density.r0, 1.5);
        assert_eq!(partial.kind, MeasureKind::Gaussian);
    }

    #[test]
    fn gaussian_measure_is_mixing_with_measured_range() {
        let l = Lattice::new(2, 64, 32.0).unwrap();
        let m = MeasureSpec::gaussian(&l, DensityParams::default()).unwrap();
        let range = m.mixing().effective_range;
        // Euclidean support of the product profile is 2 r0
        assert!(range <= 2.0 * 2.0 + l.spacing() + 1e-12 && range > 4.0 - 2.0 * l.spacing());
        assert!(m.mixing().mixing_condition_check(2).is_finite());
        assert!(m.mean_energy_density(1.0) > 0.0);
    }

    #[test]
    fn mapped_measure_has_smaller_variance() {
        let l = Lattice::new(1, 256, 64.0).unwrap();
        let p = DensityParams::default();
        let g = MeasureSpec::gaussian(&l, p).unwrap();
        let m = MeasureSpec::mapped(&l, p, PointwiseMap::Erf { width: 0.2 }, PointwiseMap::Identity).unwrap();
        let var = m.spectral().at_origin(0, 0);
        assert!(var < 1.0 && var > 0.0);
        assert!(var < g.spectral().at_origin(0, 0) * 100.0);
        assert!((m.spectral().at_origin(1, 1) - g.spectral().at_origin(1, 1)).abs() < 1e-12);
    }
}
