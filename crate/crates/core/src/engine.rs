//! Exact covariance dynamics.
//!
//! Per mode the covariance evolves by conjugation, `q_t = G_t q_0 G_t^T`.
//! Averaging over a period leaves the limit covariance
//! `q_inf^00 = (q^00 + q^11/w^2)/2`, `q_inf^11 = (q^11 + w^2 q^00)/2`,
//! `q_inf^01 = (q^01 - q^10)/2 = -q_inf^10`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fft;
use crate::field::TestFunction;
use crate::lattice::Lattice;
use crate::random::covariance::{Block, CovarianceKind, SpectralCovariance};
use crate::random::density::g2_functional;
use crate::random::measure::MeasureSpec;
use crate::spectral::dispersion::{mode_matrix, Dispersion};

fn conjugate(g: &[f64; 4], q: &Block) -> Block {
    // g q g^T with real g
    let gq = [
        q[0] * g[0] + q[2] * g[1],
        q[1] * g[0] + q[3] * g[1],
        q[0] * g[2] + q[2] * g[3],
        q[1] * g[2] + q[3] * g[3],
    ];
    [
        gq[0] * g[0] + gq[1] * g[1],
        gq[0] * g[2] + gq[1] * g[3],
        gq[2] * g[0] + gq[3] * g[1],
        gq[2] * g[2] + gq[3] * g[3],
    ]
}

/// `q_t(k) = G_t(k) q_0(k) G_t(k)^T`.
pub fn evolve_covariance(q0: &SpectralCovariance, dispersion: &Dispersion, t: f64) -> Result<SpectralCovariance> {
    q0.lattice().ensure_same(dispersion.lattice())?;
    let w = dispersion.omega();
    Ok(q0.map_modes(CovarianceKind::Evolved, |m, b| conjugate(&mode_matrix(w[m], t), b)))
}

/// Time-averaged limit of [`evolve_covariance`].
pub fn limit_covariance(q0: &SpectralCovariance, dispersion: &Dispersion) -> Result<SpectralCovariance> {
    q0.lattice().ensure_same(dispersion.lattice())?;
    let w = dispersion.omega();
    Ok(q0.map_modes(CovarianceKind::Limit, |m, b| {
        let w2 = w[m] * w[m];
        let off = 0.5 * (b[1] - b[2]);
        [0.5 * (b[0] + b[3] / w2), off, -off, 0.5 * (b[3] + b[0] * w2)]
    }))
}

/// Temperature and mass of a Gibbs covariance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GibbsSpec {
    pub temperature: f64,
    pub mass: f64,
}

impl GibbsSpec {
    pub fn new(temperature: f64, mass: f64) -> Result<Self> {
        if !(temperature > 0.0) || !(mass > 0.0) {
            return Err(invalid("temperature", "temperature and mass must be positive"));
        }
        Ok(GibbsSpec { temperature, mass })
    }
}

/// `diag(T / (|k|^2 + m^2), T)`.
pub fn gibbs_covariance(spec: &GibbsSpec, lattice: &Lattice) -> SpectralCovariance {
    let t = spec.temperature;
    let m2 = spec.mass * spec.mass;
    let d00: Vec<f64> = (0..lattice.len()).map(|i| t / (lattice.k_squared(i) + m2)).collect();
    let d11 = vec![t; lattice.len()];
    SpectralCovariance::diagonal(*lattice, &d00, &d11, CovarianceKind::Gibbs).expect("lengths match")
}

/// `Q(Psi, Psi) = L^-n sum_k Psi_hat(k)^* q_hat(k) Psi_hat(k)`, the variance
/// of `<Y, Psi>` for a real field with density `q_hat`.
///
/// A real field only sees `Re Psi` through the real pairing, so the
/// imaginary part of `Psi` is ignored.
pub fn quadratic_form_eval(q: &SpectralCovariance, psi: &TestFunction) -> Result<f64> {
    let l = q.lattice();
    l.ensure_same(psi.lattice())?;
    let re = |a: &[Complex64]| a.iter().map(|z| z.re).collect::<Vec<f64>>();
    let p0 = fft::forward_real(l, &re(&psi.psi0));
    let p1 = fft::forward_real(l, &re(&psi.psi1));
    let s: f64 = q
        .entries()
        .iter()
        .zip(p0.iter().zip(&p1))
        .map(|(b, (a0, a1))| {
            let qa0 = b[0] * a0 + b[1] * a1;
            let qa1 = b[2] * a0 + b[3] * a1;
            (a0.conj() * qa0 + a1.conj() * qa1).re
        })
        .sum();
    Ok(s / l.volume())
}

/// `C(alpha) = sum_x <x>^(2 alpha) dx^n`.
pub fn weight_constant(lattice: &Lattice, alpha: f64) -> f64 {
    (0..lattice.len())
        .map(|i| (1.0 + lattice.radius(i).powi(2)).powf(alpha))
        .sum::<f64>()
        * lattice.cell_volume()
}

/// Expected `||u||_{1+s,alpha}^2 + ||v||_{s,alpha}^2` under a translation
/// invariant law with density `q`:
/// `C(alpha) L^-n sum_k (<k>^(2s) q^11 + <k>^(2(1+s)) q^00)`.
pub fn expected_sobolev_norm(q: &SpectralCovariance, s: f64, alpha: f64) -> f64 {
    let l = q.lattice();
    let sum: f64 = q
        .entries()
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let bracket = 1.0 + l.k_squared(i);
            bracket.powf(s) * b[3].re + bracket.powf(1.0 + s) * b[0].re
        })
        .sum();
    weight_constant(l, alpha) * sum / l.volume()
}

/// Sup over the given lags of `|q_t^00(z) - q_inf^00(z)|` per time, from
/// exact covariance propagation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub times: Vec<f64>,
    pub sup_distance: Vec<f64>,
    pub limit_at_origin: f64,
    pub monotone: bool,
}

pub fn covariance_convergence(
    q0: &SpectralCovariance,
    dispersion: &Dispersion,
    times: &[f64],
    lags: &[usize],
) -> Result<ConvergenceReport> {
    let limit = limit_covariance(q0, dispersion)?.real_space(0, 0);
    let mut sup_distance = Vec::with_capacity(times.len());
    for &t in times {
        let qt = evolve_covariance(q0, dispersion, t)?.real_space(0, 0);
        let d = lags
            .iter()
            .map(|&z| (qt[z] - limit[z]).abs())
            .fold(0.0, f64::max);
        sup_distance.push(d);
    }
    let monotone = sup_distance.windows(2).all(|w| w[1] < w[0]);
    Ok(ConvergenceReport {
        times: times.to_vec(),
        sup_distance,
        limit_at_origin: limit[0],
        monotone,
    })
}

/// One scale of the Gibbs-limit study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GibbsLimitRow {
    pub r: f64,
    /// Relative band distance of `q_inf^11` to `T`.
    pub distance_11: f64,
    /// Relative band distance of `q_inf^00` to `T / w^2`.
    pub distance_00: f64,
    pub g2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GibbsLimitReport {
    pub temperature: f64,
    pub band_limit: f64,
    pub rows: Vec<GibbsLimitRow>,
    /// Distances decrease along the scale list, allowing 5% slack.
    pub monotone: bool,
    pub g2_relative_error: f64,
}

/// Limit covariances of the rescaled family compared with the Gibbs
/// covariance at the family temperature, on the band `|k| <= band_limit`
/// (half the Nyquist wavenumber when `None`).
pub fn gibbs_limit_experiment(
    base: &MeasureSpec,
    r_list: &[f64],
    mass: f64,
    band_limit: Option<f64>,
) -> Result<GibbsLimitReport> {
    if r_list.is_empty() || r_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(invalid("r_list", "scales must be a nonempty decreasing list"));
    }
    let l = *base.lattice();
    let dispersion = Dispersion::new(&l, mass)?;
    let t = base.temperature();
    let k_max = band_limit.unwrap_or(0.5 * std::f64::consts::PI / l.spacing());
    let band: Vec<usize> = (0..l.len()).filter(|&i| l.k_squared(i).sqrt() <= k_max).collect();
    let w = dispersion.omega();
    let mut rows = Vec::with_capacity(r_list.len());
    for &r in r_list {
        let spec = base.scaled_family(&l, r)?;
        let lim = limit_covariance(spec.spectral(), &dispersion)?;
        let (mut n11, mut n00, mut d11, mut d00) = (0.0, 0.0, 0.0, 0.0);
        for &i in &band {
            let b = lim.entry(i);
            let g00 = t / (w[i] * w[i]);
            d11 += (b[3].re - t).powi(2);
            n11 += t * t;
            d00 += (b[0].re - g00).powi(2);
            n00 += g00 * g00;
        }
        rows.push(GibbsLimitRow {
            r,
            distance_11: (d11 / n11).sqrt(),
            distance_00: (d00 / n00).sqrt(),
            g2: g2_functional(spec.spectral(), mass),
        });
    }
    let monotone = rows.windows(2).all(|w| {
        w[1].distance_11 <= 1.05 * w[0].distance_11 && w[1].distance_00 <= 1.05 * w[0].distance_00
    });
    let last = rows.last().expect("nonempty");
    let g2_relative_error = (last.g2 - t).abs() / t;
    Ok(GibbsLimitReport {
        temperature: t,
        band_limit: k_max,
        rows,
        monotone,
        g2_relative_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::density::DensityParams;
    use proptest::prelude::*;

    fn setup() -> (Lattice, Dispersion, SpectralCovariance) {
        let l = Lattice::new(1, 64, 32.0).unwrap();
        let d = Dispersion::new(&l, 1.0).unwrap();
        let q = crate::random::build_spectral_density(&l, &DensityParams { d0: 0.7, d1: 1.3, r0: 2.0 }).unwrap();
        (l, d, q)
    }

    fn max_diff(a: &SpectralCovariance, b: &SpectralCovariance) -> f64 {
        a.entries()
            .iter()
            .zip(b.entries())
            .flat_map(|(x, y)| (0..4).map(move |e| (x[e] - y[e]).norm()))
            .fold(0.0, f64::max)
    }

    #[test]
    fn identity_at_time_zero() {
        let (_, d, q) = setup();
        assert!(max_diff(&evolve_covariance(&q, &d, 0.0).unwrap(), &q) == 0.0);
    }

    #[test]
    fn velocity_only_density_matches_closed_form() {
        let (l, d, _) = setup();
        let g: Vec<f64> = (0..l.len()).map(|i| 1.0 / (1.0 + l.k_squared(i))).collect();
        let q = SpectralCovariance::diagonal(l, &vec![0.0; l.len()], &g, CovarianceKind::Initial).unwrap();
        let t = 3.7;
        let qt = evolve_covariance(&q, &d, t).unwrap();
        let lim = limit_covariance(&q, &d).unwrap();
        for i in 0..l.len() {
            let w = d.omega()[i];
            let want = g[i] * (1.0 - (2.0 * w * t).cos()) / (2.0 * w * w);
            assert!((qt.entry(i)[0].re - want).abs() < 1e-14);
            assert!((lim.entry(i)[0].re - g[i] / (2.0 * w * w)).abs() < 1e-15);
            assert!((lim.entry(i)[3].re - 0.5 * g[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn gibbs_is_stationary_and_a_fixed_point() {
        let (l, d, _) = setup();
        let g = gibbs_covariance(&GibbsSpec::new(0.8, 1.0).unwrap(), &l);
        assert!((g.entry(0)[0].re - 0.8).abs() < 1e-15);
        assert!(g.entries().iter().all(|b| b[1] == Complex64::default() && b[2] == Complex64::default()));
        for t in [0.3, 17.0, -250.0] {
            let gt = evolve_covariance(&g, &d, t).unwrap();
            let scale = g.scale();
            assert!(max_diff(&gt, &g) <= 1e-12 * scale);
        }
        assert!(max_diff(&limit_covariance(&g, &d).unwrap(), &g) <= 1e-15);
    }

    #[test]
    fn symmetric_cross_terms_vanish_in_the_limit() {
        let (l, d, q) = setup();
        let q = q.map_modes(CovarianceKind::Initial, |_, b| {
            let c = Complex64::new(0.3 * b[0].re.min(b[3].re), 0.0);
            [b[0], c, c, b[3]]
        });
        let lim = limit_covariance(&q, &d).unwrap();
        for i in 0..l.len() {
            assert_eq!(lim.entry(i)[1], Complex64::default());
        }
    }

    #[test]
    fn limit_is_idempotent_and_time_average() {
        let (l, d, q) = setup();
        let lim = limit_covariance(&q, &d).unwrap();
        let twice = limit_covariance(&lim, &d).unwrap();
        assert!(max_diff(&twice, &lim) <= 1e-12 * lim.scale());

        let horizon = 200.0;
        let steps = 40_000;
        let dt = horizon / steps as f64;
        let mut acc = vec![[Complex64::default(); 4]; l.len()];
        for s in 0..=steps {
            let weight = if s == 0 || s == steps { 0.5 } else { 1.0 } * dt / horizon;
            let qt = evolve_covariance(&q, &d, s as f64 * dt).unwrap();
            for (a, b) in acc.iter_mut().zip(qt.entries()) {
                for e in 0..4 {
                    a[e] += b[e] * weight;
                }
            }
        }
        for (i, a) in acc.iter().enumerate() {
            let b = lim.entry(i);
            for e in [0, 3] {
                let rel = (a[e] - b[e]).norm() / b[e].norm().max(1e-300);
                assert!(rel < 0.01 || b[e].norm() < 1e-14 * lim.scale(), "mode {i} entry {e}: {rel}");
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn conjugation_keeps_psd_and_mode_energy(t in -100.0f64..100.0) {
            let (l, d, q) = setup();
            let qt = evolve_covariance(&q, &d, t).unwrap();
            prop_assert!(qt.check_psd().is_ok());
            let energy = |c: &SpectralCovariance, i: usize| d.omega()[i].powi(2) * c.entry(i)[0].re + c.entry(i)[3].re;
            // modes whose density is pure transform roundoff carry no signal
            let floor = 1e-6 * (0..l.len()).map(|i| energy(&q, i)).fold(0.0, f64::max);
            for i in 0..l.len() {
                let (e0, et) = (energy(&q, i), energy(&qt, i));
                prop_assert!((e0 - et).abs() <= 1e-12 * e0.abs().max(floor), "mode {}: {} vs {}", i, e0, et);
            }
        }
    }

    #[test]
    fn quadratic_form_single_mode_matches_double_sum() {
        let l = Lattice::new(1, 8, 4.0).unwrap();
        let d = Dispersion::new(&l, 1.0).unwrap();
        let g = gibbs_covariance(&GibbsSpec::new(1.0, 1.0).unwrap(), &l);
        let q = evolve_covariance(&g, &d, 0.0).unwrap();
        let kidx = 2;
        let k = l.wavevector(kidx)[0];
        let psi0: Vec<Complex64> = (0..8).map(|i| Complex64::new((k * l.axis_coordinate(i)).cos(), 0.0)).collect();
        let zero = vec![Complex64::default(); 8];
        let psi = TestFunction::from_parts(l, psi0.clone(), zero, 1.9);
        let got = quadratic_form_eval(&q, &psi).unwrap();
        // double sum sum_x sum_y q00(x-y) psi(x) psi(y) dx^2
        let q00 = q.real_space(0, 0);
        let mut want = 0.0;
        for x in 0..8 {
            for y in 0..8 {
                want += q00[(x + 8 - y) % 8] * psi0[x].re * psi0[y].re * l.spacing() * l.spacing();
            }
        }
        assert!((got - want).abs() < 1e-13);
        // cos(kx) has two modes of weight L/2 each: Q = (L/2) q_hat00(k)
        assert!((got - 0.5 * l.box_length() * q.entry(kidx)[0].re).abs() < 1e-13);
        assert_eq!(quadratic_form_eval(&q, &TestFunction::zeros(l, 1.0).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn sobolev_expectation_finite_versus_divergent() {
        let g = GibbsSpec::new(1.0, 1.0).unwrap();
        let value = |n: usize, s: f64, a: f64| {
            let l = Lattice::new(1, n, 32.0).unwrap();
            expected_sobolev_norm(&gibbs_covariance(&g, &l), s, a)
        };
        let (a, b) = (value(256, -1.0, -1.0), value(512, -1.0, -1.0));
        assert!(((b - a) / a).abs() < 0.02);
        let (a, b) = (value(256, 0.0, -1.0), value(512, 0.0, -1.0));
        assert!((b / a - 2.0).abs() < 0.1);
        let l = Lattice::new(1, 16, 8.0).unwrap();
        assert_eq!(expected_sobolev_norm(&SpectralCovariance::zeros(l, CovarianceKind::Initial), 0.0, 0.0), 0.0);
    }

    #[test]
    fn gibbs_limit_distances_shrink() {
        let l = Lattice::new(1, 512, 64.0).unwrap();
        let base = MeasureSpec::gaussian(&l, DensityParams::default()).unwrap();
        let report = gibbs_limit_experiment(&base, &[1.0, 0.5, 0.25, 0.125], 1.0, None).unwrap();
        assert!(report.monotone, "{report:?}");
        assert!(report.g2_relative_error < 0.05);
    }
}
