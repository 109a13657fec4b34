//! Time stepping for `u_tt = sum_j (d_j - i A_j)^2 u - m^2 u`.
//!
//! The operator splits as `Lap - m^2` plus the first-order coupling
//! `L u = -i (A . grad u + div(A u)) - |A|^2 u`. The free part is integrated
//! exactly mode by mode and the coupling by classical RK4 in the interaction
//! picture (Lawson's integrating-factor RK4). Derivatives are spectral, and
//! the symmetric form of `L` makes the lattice operator exactly Hermitian, so
//! the gauge-covariant energy is a conserved quantity of the semi-discrete
//! system.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::fft;
use crate::field::{FieldPair, ScalarKind, TestFunction};
use crate::lattice::Lattice;
use crate::magnetic::potential::MagneticPotential;
use crate::spectral::{check_window, Dispersion, Propagator};

/// Largest admissible `dt / dx`; also the default step.
pub const STEP_FACTOR: f64 = 0.2;

/// A complex state under the magnetic flow.
#[derive(Debug, Clone, PartialEq)]
pub struct MagneticState {
    pub field: FieldPair,
    pub time: f64,
    /// Radius of a ball containing the support, if the state is compactly
    /// supported; grows by the elapsed time.
    pub support_radius: Option<f64>,
    pub step: f64,
    pub steps: u64,
}

impl MagneticState {
    pub fn new(field: FieldPair, support_radius: Option<f64>) -> Self {
        MagneticState {
            field: field.into_complex(),
            time: 0.0,
            support_radius,
            step: 0.0,
            steps: 0,
        }
    }

    /// `(u, v) = (Psi1, Psi0)`: the state whose forward flow realizes the
    /// adjoint group on `Psi`.
    pub fn from_test_function(psi: &TestFunction) -> Self {
        let l = *psi.lattice();
        let field = FieldPair::from_parts(l, psi.psi1.clone(), psi.psi0.clone(), ScalarKind::Complex);
        Self::new(field, Some(psi.support_radius()))
    }

    /// Inverse of [`MagneticState::from_test_function`].
    pub fn to_test_function(&self) -> TestFunction {
        let l = *self.field.lattice();
        let r = self.support_radius.unwrap_or(l.half_length());
        TestFunction::from_parts(l, self.field.v.clone(), self.field.u.clone(), r)
    }
}

#[derive(Debug, Clone)]
pub struct MagneticSolver {
    lattice: Lattice,
    mass: f64,
    dispersion: Dispersion,
    a: [Vec<f64>; 2],
    a_sq: Vec<f64>,
    k: [Vec<f64>; 2],
    free: bool,
    support_radius: f64,
    max_step: f64,
}

impl MagneticSolver {
    pub fn new(potential: &MagneticPotential, mass: f64) -> Result<Self> {
        let l = *potential.lattice();
        let dispersion = Dispersion::new(&l, mass)?;
        let a = [potential.a1.clone(), potential.a2.clone()];
        let a_sq = a[0].iter().zip(&a[1]).map(|(x, y)| x * x + y * y).collect();
        let k = [0, 1].map(|axis| (0..l.len()).map(|i| l.wavevector(i)[axis]).collect());
        Ok(MagneticSolver {
            lattice: l,
            mass,
            dispersion,
            a,
            a_sq,
            k,
            free: potential.is_zero(),
            support_radius: potential.support_radius(),
            max_step: STEP_FACTOR * l.spacing(),
        })
    }

    /// Use steps no longer than `dt`.
    pub fn with_step(mut self, dt: f64) -> Result<Self> {
        let bound = STEP_FACTOR * self.lattice.spacing();
        if !(dt > 0.0) {
            return Err(invalid("dt", "must be positive"));
        }
        if dt > bound * (1.0 + 1e-12) {
            return Err(Error::StabilityViolation { dt, bound });
        }
        self.max_step = dt;
        Ok(self)
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn max_step(&self) -> f64 {
        self.max_step
    }

    pub fn dispersion(&self) -> &Dispersion {
        &self.dispersion
    }

    /// Transform of `L u` given `u_hat`.
    fn coupling(&self, u_hat: &[Complex64]) -> Vec<Complex64> {
        let l = &self.lattice;
        let n = l.len();
        if self.free {
            return vec![Complex64::default(); n];
        }
        let mut u = u_hat.to_vec();
        fft::inverse_in_place(l, &mut u);
        let grads: Vec<Vec<Complex64>> = (0..2)
            .map(|axis| {
                let mut g: Vec<Complex64> = u_hat
                    .iter()
                    .zip(&self.k[axis])
                    .map(|(z, &k)| z * Complex64::new(0.0, k))
                    .collect();
                fft::inverse_in_place(l, &mut g);
                g
            })
            .collect();
        let minus_i = Complex64::new(0.0, -1.0);
        let mut local: Vec<Complex64> = (0..n)
            .map(|x| {
                let dot = self.a[0][x] * grads[0][x] + self.a[1][x] * grads[1][x];
                minus_i * dot - self.a_sq[x] * u[x]
            })
            .collect();
        fft::forward_in_place(l, &mut local);
        for axis in 0..2 {
            let mut au: Vec<Complex64> = u.iter().zip(&self.a[axis]).map(|(z, a)| z * a).collect();
            fft::forward_in_place(l, &mut au);
            // -i div(A u) has symbol -i (i k) = k
            for ((o, z), k) in local.iter_mut().zip(&au).zip(&self.k[axis]) {
                *o += z * k;
            }
        }
        local
    }

    /// One Lawson RK4 step of length `h` on `(u_hat, v_hat)`.
    #[allow(clippy::ptr_arg)] // the step swaps in freshly built vectors
    fn step(&self, uh: &mut Vec<Complex64>, vh: &mut Vec<Complex64>, half: &Propagator, full: &Propagator, h: f64) {
        let axpy = |a: &[Complex64], b: &[Complex64], c: f64| -> Vec<Complex64> {
            a.iter().zip(b).map(|(x, y)| x + y * c).collect()
        };
        let n1 = self.coupling(uh);

        let (mut au, mut av) = (uh.clone(), axpy(vh, &n1, 0.5 * h));
        half.apply(&mut au, &mut av);
        let n2 = self.coupling(&au);

        let (mut eu, mut ev) = (uh.clone(), vh.clone());
        half.apply(&mut eu, &mut ev);
        let bu = eu.clone();
        let n3 = self.coupling(&bu);

        // E_{h/2} (0, n3)
        let (mut pu, mut pv) = (vec![Complex64::default(); n3.len()], n3.clone());
        half.apply(&mut pu, &mut pv);
        let (mut fu, mut fv) = (eu, ev);
        half.apply(&mut fu, &mut fv);
        let cu = axpy(&fu, &pu, h);
        let n4 = self.coupling(&cu);

        // E_h (u, v + h/6 n1) + h/3 E_{h/2} (0, n2 + n3) + h/6 (0, n4)
        let mut nv = axpy(vh, &n1, h / 6.0);
        full.apply(uh, &mut nv);
        let (mut su, mut sv): (Vec<Complex64>, Vec<Complex64>) =
            (vec![Complex64::default(); n2.len()], n2.iter().zip(&n3).map(|(a, b)| a + b).collect());
        half.apply(&mut su, &mut sv);
        for i in 0..uh.len() {
            uh[i] += su[i] * (h / 3.0);
            nv[i] += sv[i] * (h / 3.0) + n4[i] * (h / 6.0);
        }
        *vh = nv;
    }

    /// Advance `state` to absolute time `t_target` in equal steps no longer
    /// than the solver's step.
    pub fn advance(&self, state: &mut MagneticState, t_target: f64) -> Result<()> {
        let l = &self.lattice;
        l.ensure_same(state.field.lattice())?;
        let span = t_target - state.time;
        if let Some(r) = state.support_radius {
            check_window(span, r + self.support_radius, l.box_length())?;
        }
        if span == 0.0 {
            return Ok(());
        }
        let count = (span.abs() / self.max_step).ceil().max(1.0) as u64;
        let h = span / count as f64;
        let (half, full) = (self.dispersion.propagator(0.5 * h), self.dispersion.propagator(h));
        let mut uh = fft::forward(l, &state.field.u);
        let mut vh = fft::forward(l, &state.field.v);
        for _ in 0..count {
            self.step(&mut uh, &mut vh, &half, &full, h);
        }
        fft::inverse_in_place(l, &mut uh);
        fft::inverse_in_place(l, &mut vh);
        state.field = FieldPair::from_parts(*l, uh, vh, ScalarKind::Complex);
        state.support_radius = state.support_radius.map(|r| r + span.abs());
        state.time = t_target;
        state.step = h;
        state.steps += count;
        Ok(())
    }

    /// `int (|v|^2 + sum_j |(d_j - i A_j) u|^2 + m^2 |u|^2) dx`.
    pub fn energy(&self, field: &FieldPair) -> Result<f64> {
        let l = &self.lattice;
        l.ensure_same(field.lattice())?;
        let uh = fft::forward(l, &field.u);
        let mut s: f64 = field
            .v
            .iter()
            .zip(&field.u)
            .map(|(v, u)| v.norm_sqr() + self.mass * self.mass * u.norm_sqr())
            .sum();
        for axis in 0..2 {
            let mut g: Vec<Complex64> = uh
                .iter()
                .zip(&self.k[axis])
                .map(|(z, &k)| z * Complex64::new(0.0, k))
                .collect();
            fft::inverse_in_place(l, &mut g);
            s += g
                .iter()
                .zip(&field.u)
                .zip(&self.a[axis])
                .map(|((g, u), a)| (g - Complex64::new(0.0, *a) * u).norm_sqr())
                .sum::<f64>();
        }
        Ok(s * l.cell_volume())
    }

    /// `U'(t) Psi`.
    pub fn adjoint_evolve(&self, psi: &TestFunction, t: f64) -> Result<TestFunction> {
        let mut state = MagneticState::from_test_function(psi);
        self.advance(&mut state, t)?;
        Ok(state.to_test_function())
    }

    /// `(L Psi1, 0)`: the perturbation of the adjoint generator applied to
    /// a test pair.
    pub fn perturbation(&self, psi: &TestFunction) -> Result<TestFunction> {
        let l = &self.lattice;
        l.ensure_same(psi.lattice())?;
        let mut p0 = self.coupling(&fft::forward(l, &psi.psi1));
        fft::inverse_in_place(l, &mut p0);
        Ok(TestFunction::from_parts(
            *l,
            p0,
            vec![Complex64::default(); l.len()],
            self.support_radius,
        ))
    }
}

/// Evolve `state` to `t_target` under the magnetic flow with the default step.
pub fn magnetic_evolve(
    state: &MagneticState,
    potential: &MagneticPotential,
    mass: f64,
    t_target: f64,
) -> Result<MagneticState> {
    let solver = MagneticSolver::new(potential, mass)?;
    let mut out = state.clone();
    solver.advance(&mut out, t_target)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::magnetic::potential::build_potential;
    use crate::random::{DensityParams, MeasureSpec, Sampler};
    use crate::spectral::{adjoint_evolve, evolve};

    fn gaussian_state(l: Lattice, width: f64) -> (FieldPair, f64) {
        let psi = TestFunction::gaussian(l, width, 0.6, 1.0).unwrap();
        let field = FieldPair::from_parts(l, psi.psi1.clone(), psi.psi0.clone(), ScalarKind::Complex);
        (field, psi.support_radius())
    }

    fn relative(a: &FieldPair, b: &FieldPair) -> f64 {
        let num: f64 = a.u.iter().zip(&b.u).chain(a.v.iter().zip(&b.v)).map(|(x, y)| (x - y).norm_sqr()).sum();
        (num / b.sum_squares()).sqrt()
    }

    #[test]
    fn free_case_matches_exact_propagator() {
        let l = Lattice::new(2, 64, 64.0).unwrap();
        let pot = build_potential(&l, 5.0, 0.0).unwrap();
        let (field, r) = gaussian_state(l, 1.5);
        let out = magnetic_evolve(&MagneticState::new(field.clone(), Some(r)), &pot, 1.0, 10.0).unwrap();
        let exact = evolve(&field, 1.0, 10.0).unwrap();
        assert!(relative(&out.field, &exact) < 1e-8);
    }

    #[test]
    fn gauge_energy_is_conserved() {
        let l = Lattice::new(2, 64, 32.0).unwrap();
        let pot = build_potential(&l, 4.0, 0.6).unwrap();
        let solver = MagneticSolver::new(&pot, 1.0).unwrap();
        let (field, _) = gaussian_state(l, 1.0);
        let mut s = MagneticState::new(field, None);
        let e0 = solver.energy(&s.field).unwrap();
        let mut drift: f64 = 0.0;
        for k in 1..=10 {
            solver.advance(&mut s, k as f64).unwrap();
            drift = drift.max((solver.energy(&s.field).unwrap() - e0).abs() / e0);
        }
        assert!(drift < 1e-6, "drift {drift}");
    }

    #[test]
    fn magnetic_duality() {
        let l = Lattice::new(2, 96, 48.0).unwrap();
        let pot = build_potential(&l, 4.0, 0.6).unwrap();
        let solver = MagneticSolver::new(&pot, 1.0).unwrap();
        let spec = MeasureSpec::gaussian(&l, DensityParams::default()).unwrap();
        let y = Sampler::new(&spec).unwrap().draw(1, 0);
        let psi = TestFunction::gaussian(l, 1.0, 1.0, -0.5).unwrap();
        let mut state = MagneticState::new(y.clone(), None);
        solver.advance(&mut state, 6.0).unwrap();
        let direct = state.field.pair(&psi).unwrap();
        let adjoint = y.pair(&solver.adjoint_evolve(&psi, 6.0).unwrap()).unwrap();
        assert!((direct - adjoint).abs() < 1e-8 * direct.abs().max(1.0), "{direct} vs {adjoint}");
    }

    #[test]
    fn finite_speed_with_potential() {
        let l = Lattice::new(2, 128, 64.0).unwrap();
        let pot = build_potential(&l, 5.0, 0.6).unwrap();
        let solver = MagneticSolver::new(&pot, 1.0).unwrap();
        let psi = TestFunction::gaussian(l, 1.0, 1.0, 1.0).unwrap();
        let t = 12.0;
        let phi = solver.adjoint_evolve(&psi, t).unwrap();
        let cone = psi.support_radius() + t + 2.0 * l.spacing();
        let (mut inside, mut outside) = (0.0, 0.0);
        for i in 0..l.len() {
            let m = phi.psi0[i].norm_sqr() + phi.psi1[i].norm_sqr();
            if l.radius(i) > cone {
                outside += m;
            } else {
                inside += m;
            }
        }
        assert!(outside < 1e-8 * inside, "{outside} vs {inside}");
    }

    #[test]
    fn free_adjoint_matches_spectral_adjoint() {
        let l = Lattice::new(2, 64, 64.0).unwrap();
        let pot = build_potential(&l, 5.0, 0.0).unwrap();
        let solver = MagneticSolver::new(&pot, 1.0).unwrap();
        let psi = TestFunction::gaussian(l, 1.5, 1.0, 0.3).unwrap();
        let a = solver.adjoint_evolve(&psi, 9.0).unwrap();
        let b = adjoint_evolve(&psi, 1.0, 9.0).unwrap();
        let err = a.psi0.iter().zip(&b.psi0).chain(a.psi1.iter().zip(&b.psi1)).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10 * b.sup_norm());
    }

    #[test]
    fn step_and_window_limits() {
        let l = Lattice::new(2, 64, 32.0).unwrap();
        let pot = build_potential(&l, 4.0, 0.3).unwrap();
        let solver = MagneticSolver::new(&pot, 1.0).unwrap();
        assert!(matches!(
            solver.clone().with_step(0.3 * l.spacing()),
            Err(Error::StabilityViolation { .. })
        ));
        assert!(solver.clone().with_step(0.1 * l.spacing()).is_ok());
        let psi = TestFunction::gaussian(l, 1.0, 1.0, 1.0).unwrap();
        assert!(matches!(solver.adjoint_evolve(&psi, 5.0), Err(Error::WindowViolation(_))));
    }
}
