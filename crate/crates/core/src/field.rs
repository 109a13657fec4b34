//! Phase-space states `Y = (u, v)` and compactly supported test pairs.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::lattice::Lattice;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarKind {
    Real,
    Complex,
}

/// A state `(u, v)`: position and velocity components sampled on a lattice.
///
/// Values are always held as complex numbers; for [`ScalarKind::Real`] the
/// imaginary parts are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldPair {
    lattice: Lattice,
    pub u: Vec<Complex64>,
    pub v: Vec<Complex64>,
    kind: ScalarKind,
}

impl FieldPair {
    pub fn zeros(lattice: Lattice, kind: ScalarKind) -> Self {
        let n = lattice.len();
        FieldPair {
            lattice,
            u: vec![Complex64::default(); n],
            v: vec![Complex64::default(); n],
            kind,
        }
    }

    pub fn from_real(lattice: Lattice, u: &[f64], v: &[f64]) -> Result<Self> {
        check_len(&lattice, u.len())?;
        check_len(&lattice, v.len())?;
        let lift = |a: &[f64]| a.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let pair = FieldPair {
            lattice,
            u: lift(u),
            v: lift(v),
            kind: ScalarKind::Real,
        };
        pair.check_finite()?;
        Ok(pair)
    }

    pub fn from_complex(lattice: Lattice, u: Vec<Complex64>, v: Vec<Complex64>) -> Result<Self> {
        check_len(&lattice, u.len())?;
        check_len(&lattice, v.len())?;
        let pair = FieldPair {
            lattice,
            u,
            v,
            kind: ScalarKind::Complex,
        };
        pair.check_finite()?;
        Ok(pair)
    }

    /// Build from a closure of the centered position.
    pub fn from_fn_real(
        lattice: Lattice,
        u: impl Fn([f64; 3]) -> f64,
        v: impl Fn([f64; 3]) -> f64,
    ) -> Self {
        let us: Vec<f64> = (0..lattice.len()).map(|i| u(lattice.position(i))).collect();
        let vs: Vec<f64> = (0..lattice.len()).map(|i| v(lattice.position(i))).collect();
        Self::from_real(lattice, &us, &vs).expect("closure produced non-finite values")
    }

    pub(crate) fn from_parts(
        lattice: Lattice,
        u: Vec<Complex64>,
        v: Vec<Complex64>,
        kind: ScalarKind,
    ) -> Self {
        FieldPair { lattice, u, v, kind }
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn kind(&self) -> ScalarKind {
        self.kind
    }

    /// Same data tagged as complex (the real field lifted into `C = R^2`).
    pub fn into_complex(mut self) -> Self {
        self.kind = ScalarKind::Complex;
        self
    }

    pub fn u_real(&self) -> Vec<f64> {
        self.u.iter().map(|z| z.re).collect()
    }

    pub fn v_real(&self) -> Vec<f64> {
        self.v.iter().map(|z| z.re).collect()
    }

    fn check_finite(&self) -> Result<()> {
        let ok = self
            .u
            .iter()
            .chain(&self.v)
            .all(|z| z.re.is_finite() && z.im.is_finite());
        if ok {
            Ok(())
        } else {
            Err(invalid("field", "non-finite entry"))
        }
    }

    /// Sum of `|u|^2 + |v|^2` over the lattice (no quadrature weight).
    pub fn sum_squares(&self) -> f64 {
        self.u.iter().chain(&self.v).map(|z| z.norm_sqr()).sum()
    }

    /// Real pairing `<Y, Psi> = Re sum_x (u conj(Psi0) + v conj(Psi1)) dx^n`.
    pub fn pair(&self, psi: &TestFunction) -> Result<f64> {
        self.lattice.ensure_same(psi.lattice())?;
        Ok(pairing(&self.lattice, &self.u, &self.v, &psi.psi0, &psi.psi1))
    }
}

pub(crate) fn pairing(
    lattice: &Lattice,
    u: &[Complex64],
    v: &[Complex64],
    p0: &[Complex64],
    p1: &[Complex64],
) -> f64 {
    let s: f64 = u
        .iter()
        .zip(p0)
        .chain(v.iter().zip(p1))
        .map(|(a, b)| a.re * b.re + a.im * b.im)
        .sum();
    s * lattice.cell_volume()
}

fn check_len(lattice: &Lattice, len: usize) -> Result<()> {
    if len == lattice.len() {
        Ok(())
    } else {
        Err(invalid(
            "field",
            format!("length {len} does not match lattice size {}", lattice.len()),
        ))
    }
}

/// A test pair `Psi = (Psi0, Psi1)` supported in the ball of radius
/// `support_radius` around the origin.
///
/// `Psi0` pairs with the position component and `Psi1` with the velocity
/// component of a state. Under the adjoint flow the pair evolves as
/// `(phi_dot, phi)`, so the natural norm is `L^2 (+) H^1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    lattice: Lattice,
    pub psi0: Vec<Complex64>,
    pub psi1: Vec<Complex64>,
    support_radius: f64,
}

/// Cutoff, in units of the width, where `exp(-r^2/(2 sigma^2))` reaches 1e-16.
pub const GAUSSIAN_CUTOFF: f64 = 8.583_864_105;

impl TestFunction {
    /// Wrap arrays, zeroing any entry at `|x| >= support_radius`.
    pub fn new(
        lattice: Lattice,
        psi0: Vec<Complex64>,
        psi1: Vec<Complex64>,
        support_radius: f64,
    ) -> Result<Self> {
        check_len(&lattice, psi0.len())?;
        check_len(&lattice, psi1.len())?;
        if !(support_radius > 0.0) || support_radius >= lattice.half_length() {
            return Err(Error::SupportTooLarge {
                support: support_radius,
                box_length: lattice.box_length(),
            });
        }
        let mut t = TestFunction {
            lattice,
            psi0,
            psi1,
            support_radius,
        };
        for i in 0..lattice.len() {
            if lattice.radius(i) >= support_radius {
                t.psi0[i] = Complex64::default();
                t.psi1[i] = Complex64::default();
            }
        }
        Ok(t)
    }

    /// Pair built from real radial profiles.
    pub fn radial(
        lattice: Lattice,
        support_radius: f64,
        psi0: impl Fn(f64) -> f64,
        psi1: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let r = lattice.radius_grid();
        let lift = |f: &dyn Fn(f64) -> f64| -> Vec<Complex64> {
            r.iter().map(|&x| Complex64::new(f(x), 0.0)).collect()
        };
        Self::new(lattice, lift(&psi0), lift(&psi1), support_radius)
    }

    /// Gaussian bumps `a0 exp(-r^2/2s^2)`, `a1 exp(-r^2/2s^2)` truncated where
    /// they fall below 1e-16 of the peak.
    pub fn gaussian(lattice: Lattice, width: f64, a0: f64, a1: f64) -> Result<Self> {
        if !(width > 0.0) {
            return Err(invalid("width", "must be positive"));
        }
        let g = move |r: f64| (-0.5 * (r / width).powi(2)).exp();
        Self::radial(
            lattice,
            GAUSSIAN_CUTOFF * width,
            move |r| a0 * g(r),
            move |r| a1 * g(r),
        )
    }

    /// Gaussian pair centred at `center` (periodic distance); the support
    /// ball around the origin is widened by `|center|`.
    pub fn gaussian_at(lattice: Lattice, center: [f64; 3], width: f64, a0: f64, a1: f64) -> Result<Self> {
        if !(width > 0.0) {
            return Err(invalid("width", "must be positive"));
        }
        let offset = center.iter().map(|c| c * c).sum::<f64>().sqrt();
        let (mut psi0, mut psi1) = (Vec::with_capacity(lattice.len()), Vec::with_capacity(lattice.len()));
        for i in 0..lattice.len() {
            let x = lattice.position(i);
            let d2: f64 = (0..lattice.dim())
                .map(|a| {
                    let mut d = x[a] - center[a];
                    d -= lattice.box_length() * (d / lattice.box_length()).round();
                    d * d
                })
                .sum();
            let g = (-0.5 * d2 / (width * width)).exp();
            psi0.push(Complex64::new(a0 * g, 0.0));
            psi1.push(Complex64::new(a1 * g, 0.0));
        }
        Self::new(lattice, psi0, psi1, offset + GAUSSIAN_CUTOFF * width)
    }

    /// Smooth bumps `a exp(-1/(1-(r/R)^2))` supported in the ball of radius `R`.
    pub fn bump(lattice: Lattice, radius: f64, a0: f64, a1: f64) -> Result<Self> {
        Self::radial(lattice, radius, move |r| a0 * bump(r / radius), move |r| {
            a1 * bump(r / radius)
        })
    }

    pub fn zeros(lattice: Lattice, support_radius: f64) -> Result<Self> {
        let n = lattice.len();
        Self::new(
            lattice,
            vec![Complex64::default(); n],
            vec![Complex64::default(); n],
            support_radius,
        )
    }

    pub(crate) fn from_parts(
        lattice: Lattice,
        psi0: Vec<Complex64>,
        psi1: Vec<Complex64>,
        support_radius: f64,
    ) -> Self {
        TestFunction {
            lattice,
            psi0,
            psi1,
            support_radius,
        }
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.psi0.iter_mut().for_each(|z| *z *= factor);
        out.psi1.iter_mut().for_each(|z| *z *= factor);
        out
    }

    /// Pointwise real part of both components.
    pub fn real_part(&self) -> Self {
        let mut out = self.clone();
        out.psi0.iter_mut().for_each(|z| z.im = 0.0);
        out.psi1.iter_mut().for_each(|z| z.im = 0.0);
        out
    }

    /// Largest modulus over both components.
    pub fn sup_norm(&self) -> f64 {
        self.psi0
            .iter()
            .chain(&self.psi1)
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// `exp(-1/(1-s^2))` for `|s| < 1`, zero otherwise.
pub fn bump(s: f64) -> f64 {
    let s2 = s * s;
    if s2 < 1.0 {
        (-1.0 / (1.0 - s2)).exp()
    } else {
        0.0
    }
}
