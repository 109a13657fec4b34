//! Exact constant-coefficient evolution and its adjoint group.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::field::{FieldPair, ScalarKind, TestFunction};
use crate::spectral::dispersion::Dispersion;

/// Relative size of the imaginary residue tolerated before a real field is
/// declared to have lost its symmetry.
pub const REAL_RESIDUE_TOLERANCE: f64 = 1e-10;

/// Fourier coefficients `(u_hat, v_hat)` of a state.
pub fn to_spectrum(field: &FieldPair) -> (Vec<Complex64>, Vec<Complex64>) {
    let l = field.lattice();
    (fft::forward(l, &field.u), fft::forward(l, &field.v))
}

/// `U0(t) Y`: transform, multiply each mode by `G_t(k)`, transform back.
pub fn evolve(field: &FieldPair, mass: f64, t: f64) -> Result<FieldPair> {
    let dispersion = Dispersion::new(field.lattice(), mass)?;
    evolve_with(field, &dispersion, t)
}

/// [`evolve`] reusing a precomputed dispersion relation.
pub fn evolve_with(field: &FieldPair, dispersion: &Dispersion, t: f64) -> Result<FieldPair> {
    let l = field.lattice();
    l.ensure_same(dispersion.lattice())?;
    let (mut uh, mut vh) = to_spectrum(field);
    dispersion.propagator(t).apply(&mut uh, &mut vh);
    fft::inverse_in_place(l, &mut uh);
    fft::inverse_in_place(l, &mut vh);
    if field.kind() == ScalarKind::Real {
        drop_imaginary(&mut uh, &mut vh)?;
    }
    Ok(FieldPair::from_parts(*l, uh, vh, field.kind()))
}

fn drop_imaginary(u: &mut [Complex64], v: &mut [Complex64]) -> Result<()> {
    let norm: f64 = u.iter().chain(v.iter()).map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let residue: f64 = u.iter().chain(v.iter()).map(|z| z.im * z.im).sum::<f64>().sqrt();
    if residue > REAL_RESIDUE_TOLERANCE * norm.max(f64::MIN_POSITIVE) {
        return Err(Error::Unsupported(format!(
            "real evolution produced imaginary residue {residue:e} (norm {norm:e})"
        )));
    }
    u.iter_mut().chain(v.iter_mut()).for_each(|z| z.im = 0.0);
    Ok(())
}

/// `U0'(t) Psi = (phi_dot(t), phi(t))` where `phi` solves the free equation
/// with `(phi, phi_dot)(0) = (Psi1, Psi0)`.
///
/// The returned pair carries the inflated support radius `r + |t|`.
pub fn adjoint_evolve(psi: &TestFunction, mass: f64, t: f64) -> Result<TestFunction> {
    let dispersion = Dispersion::new(psi.lattice(), mass)?;
    adjoint_evolve_with(psi, &dispersion, t)
}

pub fn adjoint_evolve_with(
    psi: &TestFunction,
    dispersion: &Dispersion,
    t: f64,
) -> Result<TestFunction> {
    let l = psi.lattice();
    l.ensure_same(dispersion.lattice())?;
    let mut uh = fft::forward(l, &psi.psi1);
    let mut vh = fft::forward(l, &psi.psi0);
    dispersion.propagator(t).apply(&mut uh, &mut vh);
    fft::inverse_in_place(l, &mut uh);
    fft::inverse_in_place(l, &mut vh);
    Ok(TestFunction::from_parts(
        *l,
        vh,
        uh,
        psi.support_radius() + t.abs(),
    ))
}

/// Spectral energy `L^-n sum_k (|v_hat|^2 + omega^2 |u_hat|^2)`, equal to
/// `int (|v|^2 + |grad u|^2 + m^2 |u|^2) dx` by Parseval.
pub fn energy(field: &FieldPair, dispersion: &Dispersion) -> Result<f64> {
    field.lattice().ensure_same(dispersion.lattice())?;
    let (uh, vh) = to_spectrum(field);
    Ok(spectral_energy(dispersion, &uh, &vh))
}

pub fn spectral_energy(dispersion: &Dispersion, u_hat: &[Complex64], v_hat: &[Complex64]) -> f64 {
    let s: f64 = dispersion
        .omega()
        .iter()
        .zip(u_hat.iter().zip(v_hat))
        .map(|(w, (u, v))| v.norm_sqr() + w * w * u.norm_sqr())
        .sum();
    s / dispersion.lattice().volume()
}

/// Error unless a cone of radius `t + r` stays inside the fundamental domain.
pub fn check_window(t: f64, radius: f64, box_length: f64) -> Result<()> {
    if t.abs() + radius < 0.5 * box_length {
        Ok(())
    } else {
        Err(Error::WindowViolation(format!(
            "t + r = {} must be below L/2 = {}",
            t.abs() + radius,
            0.5 * box_length
        )))
    }
}
