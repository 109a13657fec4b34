//! n-dimensional transforms on a [`Lattice`] with the fixed normalization
//! used throughout the crate:
//!
//! * forward: `f_hat(k) = dx^n * sum_x f(x) exp(-i k.x)`
//! * inverse: `f(x) = L^{-n} * sum_k f_hat(k) exp(i k.x)`
//!
//! Plans are cached process-wide; scratch buffers are allocated per call so
//! concurrent transforms never share state.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::lattice::Lattice;

type PlanPair = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

fn plans(n: usize) -> PlanPair {
    static CACHE: OnceLock<Mutex<HashMap<usize, PlanPair>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
        })
        .clone()
}

/// Unnormalized transform along every axis in place.
fn transform(lattice: &Lattice, data: &mut [Complex64], inverse: bool) {
    let n = lattice.points_per_axis();
    let dim = lattice.dim();
    debug_assert_eq!(data.len(), lattice.len());
    let (fwd, inv) = plans(n);
    let plan = if inverse { inv } else { fwd };
    let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];

    // last axis is contiguous: rustfft handles the batch of rows in one call
    plan.process_with_scratch(data, &mut scratch);

    if dim == 1 {
        return;
    }
    let total = data.len();
    let mut line = vec![Complex64::default(); n];
    for axis in 0..dim - 1 {
        let stride = n.pow((dim - 1 - axis) as u32);
        let block = stride * n;
        for start in (0..total).step_by(block) {
            for offset in 0..stride {
                let base = start + offset;
                for (j, slot) in line.iter_mut().enumerate() {
                    *slot = data[base + j * stride];
                }
                plan.process_with_scratch(&mut line, &mut scratch);
                for (j, value) in line.iter().enumerate() {
                    data[base + j * stride] = *value;
                }
            }
        }
    }
}

/// Forward transform in place, scaled by `dx^n`.
pub fn forward_in_place(lattice: &Lattice, data: &mut [Complex64]) {
    transform(lattice, data, false);
    let w = lattice.cell_volume();
    data.iter_mut().for_each(|z| *z *= w);
}

/// Inverse transform in place, scaled by `L^{-n}`.
pub fn inverse_in_place(lattice: &Lattice, data: &mut [Complex64]) {
    transform(lattice, data, true);
    let w = 1.0 / lattice.volume();
    data.iter_mut().for_each(|z| *z *= w);
}

pub fn forward(lattice: &Lattice, data: &[Complex64]) -> Vec<Complex64> {
    let mut out = data.to_vec();
    forward_in_place(lattice, &mut out);
    out
}

pub fn inverse(lattice: &Lattice, data: &[Complex64]) -> Vec<Complex64> {
    let mut out = data.to_vec();
    inverse_in_place(lattice, &mut out);
    out
}

/// Forward transform of a real array.
pub fn forward_real(lattice: &Lattice, data: &[f64]) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = data.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    forward_in_place(lattice, &mut out);
    out
}

/// Unnormalized transform, exposed for samplers that build spectra from white
/// noise and want the raw `sum_x` convention.
pub(crate) fn forward_unnormalized(lattice: &Lattice, data: &mut [Complex64]) {
    transform(lattice, data, false);
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn direct_forward(lattice: &Lattice, data: &[Complex64]) -> Vec<Complex64> {
        (0..lattice.len())
            .map(|kidx| {
                let k = lattice.wavevector(kidx);
                let mut acc = Complex64::default();
                for (xidx, &f) in data.iter().enumerate() {
                    let x = lattice.position(xidx);
                    let phase: f64 = (0..3).map(|a| k[a] * x[a]).sum();
                    acc += f * Complex64::from_polar(1.0, -phase);
                }
                acc * lattice.cell_volume()
            })
            .collect()
    }

    #[test]
    fn matches_direct_sum_in_two_dimensions() {
        let l = Lattice::new(2, 8, 3.0).unwrap();
        let data: Vec<Complex64> = (0..l.len())
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let fast = forward(&l, &data);
        let slow = direct_forward(&l, &data);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() < 1e-11);
        }
    }

    #[test]
    fn inverse_undoes_forward_in_three_dimensions() {
        let l = Lattice::new(3, 8, 2.0 * PI).unwrap();
        let data: Vec<Complex64> = (0..l.len())
            .map(|i| Complex64::new((i as f64).sqrt(), -(i as f64 * 0.3).sin()))
            .collect();
        let back = inverse(&l, &forward(&l, &data));
        for (a, b) in back.iter().zip(&data) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
