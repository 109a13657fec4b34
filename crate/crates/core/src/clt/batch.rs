//! Seeded sample batches and the Monte Carlo estimators built on them.

use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clt::stats::{
    char_function_estimate, excess_kurtosis_estimate, mean_estimate, skewness_estimate,
    variance_estimate, Estimate,
};
use crate::error::{invalid, Error, Result};
use crate::field::{pairing, FieldPair, TestFunction};
use crate::random::{MeasureSpec, Sampler};
use crate::spectral::{adjoint_evolve_with, check_window, evolve_with, Dispersion};

/// Pairings keyed by `(t bits, test pair fingerprint)`.
type PairingCache = HashMap<(u64, u64), Arc<Vec<f64>>>;

/// `count` independent draws from `measure`, keyed by `(seed, index)`, to be
/// observed under the free flow with mass `mass`.
///
/// Samples are regenerated on demand rather than stored; pairings with test
/// pairs are cached per `(t, Psi)`.
#[derive(Debug)]
pub struct SampleBatch {
    measure: MeasureSpec,
    mass: f64,
    count: usize,
    seed: u64,
    times: Vec<f64>,
    sampler: Sampler,
    dispersion: Dispersion,
    cache: Mutex<PairingCache>,
}

impl SampleBatch {
    pub fn new(measure: MeasureSpec, mass: f64, count: usize, seed: u64, times: Vec<f64>) -> Result<Self> {
        if count < 2 {
            return Err(Error::InsufficientSamples {
                required: 2,
                got: count,
            });
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(invalid("times", "observation times must be finite"));
        }
        let sampler = Sampler::new(&measure)?;
        let dispersion = Dispersion::new(measure.lattice(), mass)?;
        Ok(SampleBatch {
            measure,
            mass,
            count,
            seed,
            times,
            sampler,
            dispersion,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn measure(&self) -> &MeasureSpec {
        &self.measure
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn dispersion(&self) -> &Dispersion {
        &self.dispersion
    }

    /// Initial state of sample `index`.
    pub fn draw(&self, index: usize) -> FieldPair {
        self.sampler.draw(self.seed, index as u64)
    }

    /// `f(index, Y0)` over every sample, in parallel, collected in index order.
    pub fn map_samples<T: Send>(&self, f: impl Fn(usize, &FieldPair) -> T + Sync) -> Vec<T> {
        (0..self.count)
            .into_par_iter()
            .map(|i| f(i, &self.draw(i)))
            .collect()
    }

    pub(crate) fn require(&self, required: usize) -> Result<()> {
        if self.count < required {
            Err(Error::InsufficientSamples {
                required,
                got: self.count,
            })
        } else {
            Ok(())
        }
    }

    /// `<Y(t), Psi>` per sample through the adjoint route
    /// `<Y0, U0'(t) Psi>`. Requires `|t| + r < L/2`.
    pub fn pairings(&self, psi: &TestFunction, t: f64) -> Result<Arc<Vec<f64>>> {
        Ok(self.pairings_at(psi, &[t])?.remove(0))
    }

    /// [`SampleBatch::pairings`] at several times, drawing each sample once.
    pub fn pairings_at(&self, psi: &TestFunction, times: &[f64]) -> Result<Vec<Arc<Vec<f64>>>> {
        let l = self.measure.lattice();
        for &t in times {
            check_window(t, psi.support_radius(), l.box_length())?;
        }
        self.pairings_unchecked(psi, times)
    }

    /// Adjoint-route pairings without the cone-window check. On the periodic
    /// lattice the identity `<U0(t) Y0, Psi> = <Y0, U0'(t) Psi>` holds for
    /// every `t`; the window only matters when the lattice stands in for
    /// infinite space.
    pub(crate) fn pairings_unchecked(&self, psi: &TestFunction, times: &[f64]) -> Result<Vec<Arc<Vec<f64>>>> {
        let l = self.measure.lattice();
        l.ensure_same(psi.lattice())?;
        let key = fingerprint(psi);
        let cached: Vec<Option<Arc<Vec<f64>>>> = {
            let cache = self.cache.lock().expect("pairing cache poisoned");
            times.iter().map(|t| cache.get(&(t.to_bits(), key)).cloned()).collect()
        };
        let missing: Vec<f64> = times
            .iter()
            .zip(&cached)
            .filter(|(_, c)| c.is_none())
            .map(|(t, _)| *t)
            .collect();
        let mut fresh: HashMap<u64, Arc<Vec<f64>>> = HashMap::new();
        if !missing.is_empty() {
            let phis = missing
                .iter()
                .map(|&t| adjoint_evolve_with(psi, &self.dispersion, t))
                .collect::<Result<Vec<_>>>()?;
            let rows = self.map_samples(|_, y| {
                phis.iter()
                    .map(|phi| pairing(l, &y.u, &y.v, &phi.psi0, &phi.psi1))
                    .collect::<Vec<f64>>()
            });
            let mut cache = self.cache.lock().expect("pairing cache poisoned");
            for (c, &t) in missing.iter().enumerate() {
                let column = Arc::new(rows.iter().map(|r| r[c]).collect::<Vec<f64>>());
                cache.insert((t.to_bits(), key), Arc::clone(&column));
                fresh.insert(t.to_bits(), column);
            }
        }
        Ok(times
            .iter()
            .zip(cached)
            .map(|(t, c)| c.unwrap_or_else(|| Arc::clone(&fresh[&t.to_bits()])))
            .collect())
    }

    /// `<Y(t), Psi>` per sample by evolving each state forward.
    pub fn direct_pairings(&self, psi: &TestFunction, t: f64) -> Result<Vec<f64>> {
        self.measure.lattice().ensure_same(psi.lattice())?;
        self.map_samples(|_, y| evolve_with(y, &self.dispersion, t)?.pair(psi))
            .into_iter()
            .collect()
    }
}

fn fingerprint(psi: &TestFunction) -> u64 {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    psi.support_radius().to_bits().hash(&mut h);
    for z in psi.psi0.iter().chain(&psi.psi1) {
        z.re.to_bits().hash(&mut h);
        z.im.to_bits().hash(&mut h);
    }
    h.finish()
}

/// Empirical `q_t^{ij}(z)` at one lag, for `ij` in `00, 01, 10, 11`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceEstimate {
    /// Flat lattice index of the displacement `z`.
    pub lag: usize,
    pub offset: [f64; 3],
    pub entries: [Estimate; 4],
}

/// Translation-averaged `mean_x Y^i(x + z, t) Y^j(x, t)` per sample, then
/// mean and standard error over samples.
pub fn empirical_covariance(batch: &SampleBatch, t: f64, lags: &[usize]) -> Result<Vec<CovarianceEstimate>> {
    batch.require(100)?;
    let l = *batch.measure().lattice();
    if let Some(&bad) = lags.iter().find(|&&z| z >= l.len()) {
        return Err(invalid("lags", format!("lag index {bad} outside the lattice")));
    }
    let n = l.points_per_axis();
    let shifts: Vec<Vec<usize>> = lags
        .iter()
        .map(|&z| {
            let m = l.multi_index(z);
            (0..l.len())
                .map(|x| {
                    let mut a = l.multi_index(x);
                    for d in 0..l.dim() {
                        a[d] = (a[d] + m[d]) % n;
                    }
                    l.flat_index(&a[..l.dim()])
                })
                .collect()
        })
        .collect();
    let per_sample = batch.map_samples(|_, y0| -> Result<Vec<[f64; 4]>> {
        let y = if t == 0.0 {
            y0.clone()
        } else {
            evolve_with(y0, batch.dispersion(), t)?
        };
        let comps = [&y.u, &y.v];
        Ok(shifts
            .iter()
            .map(|shift| {
                let mut acc = [0.0; 4];
                for (c, a) in acc.iter_mut().enumerate() {
                    let (yi, yj) = (comps[c / 2], comps[c % 2]);
                    *a = shift
                        .iter()
                        .enumerate()
                        .map(|(x, &xz)| yi[xz].re * yj[x].re)
                        .sum::<f64>()
                        / l.len() as f64;
                }
                acc
            })
            .collect())
    });
    let per_sample = per_sample.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(lags
        .iter()
        .enumerate()
        .map(|(k, &lag)| {
            let entries = std::array::from_fn(|c| {
                let xs: Vec<f64> = per_sample.iter().map(|s| s[k][c]).collect();
                mean_estimate(&xs)
            });
            CovarianceEstimate {
                lag,
                offset: l.position(lag),
                entries,
            }
        })
        .collect())
}

/// `E exp(i <Y(t), Psi>)` with jackknife error bars.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharFunctionalEstimate {
    pub t: f64,
    pub re: Estimate,
    pub im: Estimate,
}

impl CharFunctionalEstimate {
    pub fn modulus(&self) -> f64 {
        self.re.value.hypot(self.im.value)
    }

    /// Distance to a real target in units of the combined standard error
    /// `sqrt(se_re^2 + se_im^2)`.
    pub fn z_score(&self, target: f64) -> f64 {
        let d = (self.re.value - target).hypot(self.im.value);
        let se = self.re.stderr.hypot(self.im.stderr);
        if se > 0.0 {
            d / se
        } else if d == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

pub fn empirical_char_functional(batch: &SampleBatch, psi: &TestFunction, t: f64) -> Result<CharFunctionalEstimate> {
    batch.require(1000)?;
    let p = batch.pairings(psi, t)?;
    let (re, im) = char_function_estimate(&p);
    Ok(CharFunctionalEstimate { t, re, im })
}

/// Moments of the scalar `<Y(t), Psi>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianityDiagnostics {
    pub t: f64,
    pub mean: Estimate,
    pub variance: Estimate,
    pub skewness: Estimate,
    pub excess_kurtosis: Estimate,
}

pub fn gaussianity_diagnostics(batch: &SampleBatch, psi: &TestFunction, t: f64) -> Result<GaussianityDiagnostics> {
    batch.require(1000)?;
    let p = batch.pairings(psi, t)?;
    Ok(GaussianityDiagnostics {
        t,
        mean: mean_estimate(&p),
        variance: variance_estimate(&p),
        skewness: skewness_estimate(&p),
        excess_kurtosis: excess_kurtosis_estimate(&p),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{evolve_covariance, quadratic_form_eval};
    use crate::lattice::Lattice;
    use crate::random::{CovarianceKind, DensityParams, MeasureParams, PointwiseMap};

    fn lattice() -> Lattice {
        Lattice::new(1, 128, 64.0).unwrap()
    }

    fn psi(l: Lattice) -> TestFunction {
        TestFunction::bump(l, 3.0, 1.0, 0.7).unwrap()
    }

    #[test]
    fn rejects_tiny_batches() {
        let spec = MeasureSpec::gaussian(&lattice(), DensityParams::default()).unwrap();
        assert!(matches!(
            SampleBatch::new(spec.clone(), 1.0, 1, 0, vec![]),
            Err(Error::InsufficientSamples { .. })
        ));
        let b = SampleBatch::new(spec, 1.0, 50, 0, vec![]).unwrap();
        assert!(matches!(
            empirical_covariance(&b, 0.0, &[0]),
            Err(Error::InsufficientSamples { required: 100, .. })
        ));
        assert!(matches!(
            empirical_char_functional(&b, &psi(lattice()), 0.0),
            Err(Error::InsufficientSamples { required: 1000, .. })
        ));
    }

    #[test]
    fn zero_measure_gives_zero_covariance() {
        let l = lattice();
        let spec = MeasureSpec::gaussian(
            &l,
            DensityParams {
                d0: 0.0,
                d1: 0.0,
                r0: 2.0,
            },
        )
        .unwrap();
        let b = SampleBatch::new(spec, 1.0, 100, 3, vec![]).unwrap();
        for e in empirical_covariance(&b, 5.0, &[0, 1, 7]).unwrap() {
            assert!(e.entries.iter().all(|x| x.value == 0.0 && x.stderr == 0.0));
        }
    }

    #[test]
    fn adjoint_and_direct_routes_agree() {
        let l = lattice();
        let spec = MeasureSpec::gaussian(&l, DensityParams::default()).unwrap();
        let b = SampleBatch::new(spec, 1.0, 20, 4, vec![]).unwrap();
        let p = psi(l);
        for t in [0.0, 7.5, 20.0] {
            let a = b.pairings(&p, t).unwrap();
            let d = b.direct_pairings(&p, t).unwrap();
            for (x, y) in a.iter().zip(&d) {
                assert!((x - y).abs() < 1e-10, "t={t}: {x} vs {y}");
            }
        }
        assert!(matches!(b.pairings(&p, 30.0), Err(Error::WindowViolation(_))));
    }

    #[test]
    fn results_do_not_depend_on_worker_count() {
        let l = lattice();
        let spec = MeasureSpec::gaussian(&l, DensityParams::default()).unwrap();
        let p = psi(l);
        let run = |threads| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| {
                let b = SampleBatch::new(spec.clone(), 1.0, 64, 8, vec![]).unwrap();
                b.pairings(&p, 10.0).unwrap().as_ref().clone()
            })
        };
        assert_eq!(run(1), run(3));
    }

    #[test]
    fn covariance_matches_target_at_start_and_after_evolution() {
        let l = lattice();
        let spec = MeasureSpec::gaussian(&l, DensityParams::default()).unwrap();
        let b = SampleBatch::new(spec.clone(), 1.0, 400, 21, vec![]).unwrap();
        let lags = [0usize, 2, 4, 126];
        for t in [0.0, 40.0] {
            let q = evolve_covariance(spec.spectral(), b.dispersion(), t).unwrap();
            let target: Vec<Vec<f64>> = (0..4).map(|c| q.real_space(c / 2, c % 2)).collect();
            for e in empirical_covariance(&b, t, &lags).unwrap() {
                for c in 0..4 {
                    assert!(
                        e.entries[c].within(target[c][e.lag], 4.0),
                        "t={t} lag={} c={c}: {:?} vs {}",
                        e.lag,
                        e.entries[c],
                        target[c][e.lag]
                    );
                }
            }
        }
    }

    #[test]
    fn char_functional_basics() {
        let l = lattice();
        let spec = MeasureSpec::gaussian(&l, DensityParams::default()).unwrap();
        let b = SampleBatch::new(spec.clone(), 1.0, 2000, 5, vec![]).unwrap();
        let zero = TestFunction::zeros(l, 3.0).unwrap();
        let c = empirical_char_functional(&b, &zero, 4.0).unwrap();
        assert_eq!((c.re.value, c.im.value), (1.0, 0.0));

        let p = psi(l);
        let plus = empirical_char_functional(&b, &p, 6.0).unwrap();
        let minus = empirical_char_functional(&b, &p.scaled(-1.0), 6.0).unwrap();
        assert!(plus.modulus() <= 1.0);
        assert_eq!(plus.re.value, minus.re.value);
        assert_eq!(plus.im.value, -minus.im.value);

        let q0 = quadratic_form_eval(spec.spectral(), &p).unwrap();
        let c0 = empirical_char_functional(&b, &p, 0.0).unwrap();
        assert!(c0.z_score((-0.5 * q0).exp()) < 4.0, "{c0:?} vs {}", (-0.5 * q0).exp());
    }

    #[test]
    fn variance_identity_and_gaussian_moments() {
        let l = lattice();
        let spec = MeasureSpec::gaussian(&l, DensityParams::default()).unwrap();
        let b = SampleBatch::new(spec.clone(), 1.0, 4000, 13, vec![]).unwrap();
        let p = psi(l);
        for t in [0.0, 15.0] {
            let d = gaussianity_diagnostics(&b, &p, t).unwrap();
            let q = quadratic_form_eval(&evolve_covariance(spec.spectral(), b.dispersion(), t).unwrap(), &p).unwrap();
            assert!(d.variance.within(q, 4.0), "t={t}: {:?} vs {q}", d.variance);
            assert!(d.skewness.within(0.0, 4.0));
            assert!(d.excess_kurtosis.within(0.0, 4.0));
            assert!(d.mean.within(0.0, 4.0));
        }
    }

    #[test]
    fn saturating_map_is_visibly_non_gaussian_at_start() {
        let l = lattice();
        let params = MeasureParams {
            kind: crate::random::MeasureKind::Mapped,
            map0: PointwiseMap::Erf { width: 0.1 },
            map1: PointwiseMap::Erf { width: 0.1 },
            ..Default::default()
        };
        let spec = MeasureSpec::from_params(&l, &params).unwrap();
        assert_eq!(spec.spectral().kind(), CovarianceKind::Initial);
        let b = SampleBatch::new(spec, 1.0, 4000, 2, vec![]).unwrap();
        // a test pair concentrated on one cell sees a single saturated value
        let p = TestFunction::bump(l, 1.0, 1.0, 0.0).unwrap();
        let d = gaussianity_diagnostics(&b, &p, 0.0).unwrap();
        assert!(d.excess_kurtosis.value < -4.0 * d.excess_kurtosis.stderr, "{d:?}");
    }
}
