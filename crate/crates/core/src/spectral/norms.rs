//! Local energy seminorms, weighted Sobolev norms and the energy norm of test
//! pairs.

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::fft;
use crate::field::{FieldPair, TestFunction};
use crate::lattice::Lattice;

/// Spectral gradient `(d_1 w, .., d_n w)` using `i k_j` at every mode,
/// Nyquist included, so that `sum |grad w|^2 dx^n` equals the Parseval sum
/// of `|k|^2 |w_hat|^2`.
pub fn spectral_gradient(lattice: &Lattice, w: &[Complex64]) -> Vec<Vec<Complex64>> {
    let w_hat = fft::forward(lattice, w);
    (0..lattice.dim())
        .map(|axis| {
            let mut d: Vec<Complex64> = w_hat
                .iter()
                .enumerate()
                .map(|(i, z)| z * Complex64::new(0.0, lattice.wavevector(i)[axis]))
                .collect();
            fft::inverse_in_place(lattice, &mut d);
            d
        })
        .collect()
}

/// Pointwise `|grad w|^2`.
pub fn gradient_density(lattice: &Lattice, w: &[Complex64]) -> Vec<f64> {
    let mut out = vec![0.0; lattice.len()];
    for d in spectral_gradient(lattice, w) {
        for (o, z) in out.iter_mut().zip(&d) {
            *o += z.norm_sqr();
        }
    }
    out
}

/// `int_{|x|<R} (|v|^2 + |grad u|^2 + m^2 |u|^2) dx` by lattice quadrature.
pub fn local_energy(field: &FieldPair, mass: f64, radius: f64) -> Result<f64> {
    let l = field.lattice();
    check_radius(l, radius)?;
    let grad = gradient_density(l, &field.u);
    let m2 = mass * mass;
    let s: f64 = (0..l.len())
        .filter(|&i| l.radius(i) < radius)
        .map(|i| field.v[i].norm_sqr() + grad[i] + m2 * field.u[i].norm_sqr())
        .sum();
    Ok(s * l.cell_volume())
}

fn check_radius(l: &Lattice, radius: f64) -> Result<()> {
    if radius > 0.0 && radius <= l.half_length() {
        Ok(())
    } else {
        Err(invalid(
            "radius",
            format!("must lie in (0, L/2 = {}], got {radius}", l.half_length()),
        ))
    }
}

/// `|| <x>^alpha Lambda^s w ||_{L^2}` with `Lambda^s` the multiplier
/// `<k>^s = (1 + |k|^2)^(s/2)`.
pub fn weighted_sobolev_norm(lattice: &Lattice, w: &[Complex64], s: f64, alpha: f64) -> f64 {
    let mut w_hat = fft::forward(lattice, w);
    if s != 0.0 {
        for (i, z) in w_hat.iter_mut().enumerate() {
            *z *= (1.0 + lattice.k_squared(i)).powf(0.5 * s);
        }
    }
    fft::inverse_in_place(lattice, &mut w_hat);
    let sum: f64 = w_hat
        .iter()
        .enumerate()
        .map(|(i, z)| {
            let x2 = lattice.radius(i).powi(2);
            (1.0 + x2).powf(alpha) * z.norm_sqr()
        })
        .sum();
    (sum * lattice.cell_volume()).sqrt()
}

/// `|||Y|||_{s,alpha} = ||u||_{1+s,alpha} + ||v||_{s,alpha}`.
pub fn pair_sobolev_norm(field: &FieldPair, s: f64, alpha: f64) -> f64 {
    let l = field.lattice();
    weighted_sobolev_norm(l, &field.u, 1.0 + s, alpha) + weighted_sobolev_norm(l, &field.v, s, alpha)
}

/// Energy norm of a test pair, `(||Psi0||^2 + ||grad Psi1||^2 + ||Psi1||^2)^(1/2)`,
/// evaluated spectrally.
pub fn h_norm(psi: &TestFunction) -> f64 {
    let l = psi.lattice();
    let p0 = fft::forward(l, &psi.psi0);
    let p1 = fft::forward(l, &psi.psi1);
    let s: f64 = (0..l.len())
        .map(|i| p0[i].norm_sqr() + (1.0 + l.k_squared(i)) * p1[i].norm_sqr())
        .sum();
    (s / l.volume()).sqrt()
}

/// Local seminorm `||Psi||_(R)`: the energy norm restricted to `|x| < R`.
pub fn local_h_norm(psi: &TestFunction, radius: f64) -> Result<f64> {
    let l = psi.lattice();
    check_radius(l, radius)?;
    let grad = gradient_density(l, &psi.psi1);
    let s: f64 = (0..l.len())
        .filter(|&i| l.radius(i) < radius)
        .map(|i| psi.psi0[i].norm_sqr() + grad[i] + psi.psi1[i].norm_sqr())
        .sum();
    Ok((s * l.cell_volume()).sqrt())
}
