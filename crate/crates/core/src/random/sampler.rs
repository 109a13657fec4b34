//! Seeded draws from initial measures.
//!
//! Every draw is a pure function of `(seed, sample_index)`: the generator is
//! ChaCha8 seeded with `seed` and switched to stream `sample_index`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::fft;
use crate::field::FieldPair;
use crate::lattice::Lattice;
use crate::random::covariance::{Block, SpectralCovariance};
use crate::random::measure::{MeasureKind, MeasureSpec, PointwiseMap};

pub fn rng_for(seed: u64, sample_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(sample_index);
    rng
}

/// Gaussian sampler with the per-mode square roots precomputed.
///
/// A draw colours real white noise `xi` as
/// `Y_hat(k) = sqrt(L^n / N_total) * S(k) * xi_hat(k)` with `S = q_hat^(1/2)`
/// and `xi_hat` the raw transform, then inverts with the `L^-n` convention.
/// This makes `E Y(x) Y(y)^T = L^-n sum_k q_hat(k) exp(i k.(x-y))`.
#[derive(Debug, Clone)]
pub struct GaussianSampler {
    lattice: Lattice,
    roots: Vec<Block>,
    amplitude: f64,
}

impl GaussianSampler {
    pub fn new(cov: &SpectralCovariance) -> Result<Self> {
        let lattice = *cov.lattice();
        Ok(GaussianSampler {
            lattice,
            roots: cov.square_roots()?,
            amplitude: (lattice.volume() / lattice.len() as f64).sqrt(),
        })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn draw(&self, seed: u64, sample_index: u64) -> FieldPair {
        let l = &self.lattice;
        let n = l.len();
        let mut rng = rng_for(seed, sample_index);
        let mut xi0: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.sample(StandardNormal), 0.0))
            .collect();
        let mut xi1: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.sample(StandardNormal), 0.0))
            .collect();
        fft::forward_unnormalized(l, &mut xi0);
        fft::forward_unnormalized(l, &mut xi1);
        let a = self.amplitude;
        let (mut u, mut v) = (xi0, xi1);
        for ((s, a0), a1) in self.roots.iter().zip(u.iter_mut()).zip(v.iter_mut()) {
            let (x0, x1) = (*a0, *a1);
            *a0 = (s[0] * x0 + s[1] * x1) * a;
            *a1 = (s[2] * x0 + s[3] * x1) * a;
        }
        fft::inverse_in_place(l, &mut u);
        fft::inverse_in_place(l, &mut v);
        // conjugate symmetry of the roots makes the result real up to roundoff
        u.iter_mut().chain(v.iter_mut()).for_each(|z| z.im = 0.0);
        FieldPair::from_parts(*l, u, v, crate::field::ScalarKind::Real)
    }
}

/// Sampler for any measure kind.
#[derive(Debug, Clone)]
pub struct Sampler {
    kind: MeasureKind,
    lattice: Lattice,
    gaussian: Option<GaussianSampler>,
    maps: (PointwiseMap, PointwiseMap),
}

impl Sampler {
    pub fn new(spec: &MeasureSpec) -> Result<Self> {
        let gaussian = match spec.kind() {
            MeasureKind::Counterexample => None,
            _ => Some(GaussianSampler::new(spec.base())?),
        };
        Ok(Sampler {
            kind: spec.kind(),
            lattice: *spec.lattice(),
            gaussian,
            maps: spec.maps().unwrap_or_default(),
        })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn draw(&self, seed: u64, sample_index: u64) -> FieldPair {
        match (self.kind, &self.gaussian) {
            (MeasureKind::Counterexample, _) | (_, None) => {
                counterexample_ensemble(&self.lattice, seed, sample_index)
            }
            (MeasureKind::Gaussian, Some(g)) => g.draw(seed, sample_index),
            (MeasureKind::Mapped, Some(g)) => {
                apply_pointwise_map(&g.draw(seed, sample_index), &self.maps.0, &self.maps.1)
            }
        }
    }
}

/// One draw of a Gaussian (or the Gaussian base of a mapped) measure.
pub fn sample_gaussian(spec: &MeasureSpec, seed: u64, sample_index: u64) -> Result<FieldPair> {
    if spec.kind() == MeasureKind::Counterexample {
        return Err(invalid("kind", "the counterexample ensemble is not Gaussian"));
    }
    Ok(GaussianSampler::new(spec.base())?.draw(seed, sample_index))
}

/// `(f0(u(x)), f1(v(x)))` pointwise.
pub fn apply_pointwise_map(field: &FieldPair, f0: &PointwiseMap, f1: &PointwiseMap) -> FieldPair {
    let mut out = field.clone();
    if !f0.is_identity() {
        out.u.iter_mut().for_each(|z| *z = Complex64::new(f0.apply(z.re), 0.0));
    }
    if !f1.is_identity() {
        out.v.iter_mut().for_each(|z| *z = Complex64::new(f1.apply(z.re), 0.0));
    }
    out
}

/// `u0 = +-1` everywhere (fair coin), `v0 = 0`.
pub fn counterexample_ensemble(lattice: &Lattice, seed: u64, sample_index: u64) -> FieldPair {
    let sign = if rng_for(seed, sample_index).random::<bool>() { 1.0 } else { -1.0 };
    let n = lattice.len();
    FieldPair::from_parts(
        *lattice,
        vec![Complex64::new(sign, 0.0); n],
        vec![Complex64::default(); n],
        crate::field::ScalarKind::Real,
    )
}
