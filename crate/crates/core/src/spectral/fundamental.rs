//! Retarded fundamental solution of the three-dimensional equation.
//!
//! `E(x, t) = delta(t - |x|) / (4 pi |x|) - (m / 4 pi) J1(m s) / s`,
//! `s = sqrt(t^2 - |x|^2)`, for `|x| < t`. Only the second, absolutely
//! continuous term is evaluated here.

use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::spectral::bessel::j1;

/// Regular part of the fundamental solution. Zero outside the cone.
pub fn fundamental_solution_3d(x_radius: f64, t: f64, mass: f64) -> f64 {
    let r = x_radius.abs();
    if !(t > 0.0) || r >= t {
        return 0.0;
    }
    let s = ((t - r) * (t + r)).sqrt();
    let ms = mass * s;
    // J1(ms)/s -> m/2 as s -> 0
    let ratio = if ms < 1e-8 { 0.5 * mass } else { j1(ms) / s };
    -mass / (4.0 * PI) * ratio
}

/// Largest `|E|` along the ray `|x| = t - r` over one oscillation period
/// starting at `t`.
///
/// Near the cone `m s ~ m sqrt(2 r t)`, so one period corresponds to an
/// increment `2 pi / (m sqrt(2 r))` in `sqrt(t)`.
pub fn near_cone_envelope(cone_distance: f64, t: f64, mass: f64) -> f64 {
    const SAMPLES: usize = 256;
    let r = cone_distance;
    let root = t.sqrt();
    let step = 2.0 * PI / (mass * (2.0 * r).sqrt()) / SAMPLES as f64;
    (0..=SAMPLES)
        .map(|j| {
            let tt = (root + j as f64 * step).powi(2);
            fundamental_solution_3d(tt - r, tt, mass).abs()
        })
        .fold(0.0, f64::max)
}

/// Envelope samples at log-spaced times and their log-log slope.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeFit {
    pub times: Vec<f64>,
    pub envelope: Vec<f64>,
    pub slope: f64,
}

/// Fit `log envelope` against `log t` over `points` log-spaced times in
/// `[t_min, t_max]`; the expected slope is `-3/4`.
pub fn near_cone_decay(
    cone_distance: f64,
    mass: f64,
    t_min: f64,
    t_max: f64,
    points: usize,
) -> Result<EnvelopeFit> {
    if !(cone_distance > 0.0) || !(mass > 0.0) {
        return Err(invalid("cone_distance", "distance and mass must be positive"));
    }
    if !(t_min > cone_distance) || !(t_max > t_min) || points < 2 {
        return Err(invalid("t_range", "need cone_distance < t_min < t_max and two points"));
    }
    let ratio = (t_max / t_min).ln();
    let times: Vec<f64> = (0..points)
        .map(|i| t_min * (ratio * i as f64 / (points - 1) as f64).exp())
        .collect();
    let envelope: Vec<f64> = times
        .iter()
        .map(|&t| near_cone_envelope(cone_distance, t, mass))
        .collect();
    let xs: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = envelope.iter().map(|e| e.ln()).collect();
    let slope = least_squares_slope(&xs, &ys);
    Ok(EnvelopeFit {
        times,
        envelope,
        slope,
    })
}

/// Ordinary least-squares slope of `ys` against `xs`.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `int_a^b f` by adaptive Simpson.
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        #[allow(clippy::too_many_arguments)]
        fn rec(
            f: &dyn Fn(f64) -> f64,
            a: f64,
            b: f64,
            fa: f64,
            fm: f64,
            fb: f64,
            whole: f64,
            tol: f64,
            depth: u32,
        ) -> f64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (f(lm), f(rm));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            let delta = left + right - whole;
            if depth == 0 || delta.abs() <= 15.0 * tol {
                left + right + delta / 15.0
            } else {
                rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                    + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
            }
        }
        let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        rec(f, a, b, fa, fm, fb, whole, tol, 40)
    }

    /// `(2 pi^2 r)^-1 int_0^inf k sin(kr) sin(wt)/w exp(-(k/K)^2) dk`, the
    /// radial inverse transform of `sin(wt)/w` with Gaussian damping.
    fn damped_inverse_transform(r: f64, t: f64, m: f64, cutoff: f64) -> f64 {
        let f = |k: f64| {
            let w = (k * k + m * m).sqrt();
            k * (k * r).sin() * (w * t).sin() / w * (-(k / cutoff).powi(2)).exp()
        };
        let upper = 7.0 * cutoff;
        let panel = 0.25;
        let panels = (upper / panel).ceil() as usize;
        let mut sum = 0.0;
        for p in 0..panels {
            let a = p as f64 * panel;
            sum += simpson(&f, a, a + panel, 1e-11);
        }
        sum / (2.0 * PI * PI * r)
    }

    #[test]
    fn matches_damped_fourier_quadrature() {
        for (r, t, m) in [(1.0, 3.0, 1.5), (0.7, 2.0, 1.0), (2.0, 4.5, 0.6)] {
            let (k1, k2) = (100.0, 200.0);
            let i1 = damped_inverse_transform(r, t, m, k1);
            let i2 = damped_inverse_transform(r, t, m, k2);
            let oracle = (4.0 * i2 - i1) / 3.0;
            let got = fundamental_solution_3d(r, t, m);
            assert!(
                ((got - oracle) / got).abs() < 1e-6,
                "r={r} t={t} m={m}: closed form {got} vs quadrature {oracle}"
            );
        }
    }

    #[test]
    fn vanishes_outside_cone_and_in_massless_limit() {
        assert_eq!(fundamental_solution_3d(3.0, 2.0, 1.0), 0.0);
        assert_eq!(fundamental_solution_3d(2.0, 2.0, 1.0), 0.0);
        for r in [0.0, 0.5, 1.9] {
            assert!(fundamental_solution_3d(r, 2.0, 1e-9).abs() < 1e-18);
        }
    }

    #[test]
    fn limit_on_the_cone_is_finite() {
        let m = 2.0;
        let near = fundamental_solution_3d(5.0 - 1e-12, 5.0, m);
        assert!((near + m * m / (8.0 * PI)).abs() < 1e-9);
    }

    #[test]
    fn near_cone_envelope_decays_like_three_quarters() {
        let fit = near_cone_decay(1.0, 1.0, 1e2, 1e4, 25).unwrap();
        assert!((fit.slope + 0.75).abs() < 0.08, "slope {}", fit.slope);
    }

    #[test]
    fn slope_of_exact_power_law() {
        let xs: Vec<f64> = (1..10).map(|i| (i as f64).ln()).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 1.25 * x).collect();
        assert!((least_squares_slope(&xs, &ys) + 1.25).abs() < 1e-14);
    }
}
