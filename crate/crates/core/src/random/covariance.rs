use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fft;
use crate::lattice::Lattice;

/// Eigenvalues down to `-PSD_TOLERANCE * scale` are clamped to zero; anything
/// more negative is reported as an error.
pub const PSD_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CovarianceKind {
    Initial,
    Evolved,
    Limit,
    Gibbs,
}

/// Row-major Hermitian 2x2 block `[q00, q01, q10, q11]`.
pub type Block = [Complex64; 4];

/// Per-mode spectral density `q_hat^{ij}(k)` of a translation-invariant
/// random state `(u, v)`.
///
/// With the crate's transform convention the real-space covariance is
/// `q(z) = L^-n sum_k q_hat(k) exp(i k.z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCovariance {
    lattice: Lattice,
    entries: Vec<Block>,
    kind: CovarianceKind,
}

impl SpectralCovariance {
    pub fn new(lattice: Lattice, entries: Vec<Block>, kind: CovarianceKind) -> Result<Self> {
        if entries.len() != lattice.len() {
            return Err(invalid(
                "entries",
                format!("{} blocks for {} modes", entries.len(), lattice.len()),
            ));
        }
        if entries
            .iter()
            .flatten()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(invalid("entries", "non-finite value"));
        }
        Ok(SpectralCovariance {
            lattice,
            entries,
            kind,
        })
    }

    pub fn zeros(lattice: Lattice, kind: CovarianceKind) -> Self {
        SpectralCovariance {
            lattice,
            entries: vec![[Complex64::default(); 4]; lattice.len()],
            kind,
        }
    }

    /// Diagonal density `diag(d00(k), d11(k))`.
    pub fn diagonal(lattice: Lattice, d00: &[f64], d11: &[f64], kind: CovarianceKind) -> Result<Self> {
        if d00.len() != lattice.len() || d11.len() != lattice.len() {
            return Err(invalid("entries", "diagonal length does not match lattice"));
        }
        let z = Complex64::default();
        let entries = d00
            .iter()
            .zip(d11)
            .map(|(&a, &b)| [Complex64::new(a, 0.0), z, z, Complex64::new(b, 0.0)])
            .collect();
        Self::new(lattice, entries, kind)
    }

    /// Density whose real-space covariance has the given samples.
    ///
    /// `q[2*i + j]` holds `q^{ij}(z)` at every lattice offset `z`.
    pub fn from_real_space(lattice: Lattice, q: [&[f64]; 4], kind: CovarianceKind) -> Result<Self> {
        let hats: Vec<Vec<Complex64>> = q.iter().map(|c| fft::forward_real(&lattice, c)).collect();
        let entries = (0..lattice.len())
            .map(|m| [hats[0][m], hats[1][m], hats[2][m], hats[3][m]])
            .collect();
        Self::new(lattice, entries, kind)
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn kind(&self) -> CovarianceKind {
        self.kind
    }

    pub fn with_kind(mut self, kind: CovarianceKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn entries(&self) -> &[Block] {
        &self.entries
    }

    pub fn entry(&self, mode: usize) -> &Block {
        &self.entries[mode]
    }

    /// Component `q_hat^{ij}` over all modes.
    pub fn component(&self, i: usize, j: usize) -> Vec<Complex64> {
        self.entries.iter().map(|b| b[2 * i + j]).collect()
    }

    /// Real-space covariance `q^{ij}(z)` at every lattice offset.
    pub fn real_space(&self, i: usize, j: usize) -> Vec<f64> {
        fft::inverse(&self.lattice, &self.component(i, j))
            .into_iter()
            .map(|z| z.re)
            .collect()
    }

    /// `q^{ij}(0) = L^-n sum_k q_hat^{ij}(k)`.
    pub fn at_origin(&self, i: usize, j: usize) -> f64 {
        let s: f64 = self.entries.iter().map(|b| b[2 * i + j].re).sum();
        s / self.lattice.volume()
    }

    /// Mean energy density `q^11(0) - Lap q^00(0) + m^2 q^00(0)`.
    pub fn mean_energy_density(&self, mass: f64) -> f64 {
        let l = &self.lattice;
        let s: f64 = self
            .entries
            .iter()
            .enumerate()
            .map(|(i, b)| b[3].re + (l.k_squared(i) + mass * mass) * b[0].re)
            .sum();
        s / l.volume()
    }

    /// `sum_k ||q_hat(k)||_F`, a finite proxy for the total mass.
    pub fn total_mass(&self) -> f64 {
        self.entries
            .iter()
            .map(|b| b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
            .sum()
    }

    /// Largest modulus over all entries; sets the scale of the PSD tolerance.
    pub fn scale(&self) -> f64 {
        self.entries
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Error unless every block is PSD up to the clamping tolerance.
    pub fn check_psd(&self) -> Result<()> {
        let tol = PSD_TOLERANCE * self.scale().max(1.0);
        for (mode, b) in self.entries.iter().enumerate() {
            let (_, low) = eigenvalues(b);
            if low < -tol {
                return Err(Error::NotPositiveSemidefinite {
                    mode,
                    min_eigenvalue: low,
                });
            }
        }
        Ok(())
    }

    /// Largest violation of `q_hat(-k) = conj(q_hat(k))` or of Hermiticity.
    pub fn symmetry_defect(&self) -> f64 {
        let l = &self.lattice;
        let mut worst: f64 = 0.0;
        for (m, b) in self.entries.iter().enumerate() {
            let nb = &self.entries[l.negated_index(m)];
            for e in 0..4 {
                worst = worst.max((nb[e] - b[e].conj()).norm());
            }
            worst = worst.max((b[1] - b[2].conj()).norm());
        }
        worst
    }

    /// PSD square root of every block, with small negative eigenvalues clamped.
    pub fn square_roots(&self) -> Result<Vec<Block>> {
        let tol = PSD_TOLERANCE * self.scale().max(1.0);
        self.entries
            .iter()
            .enumerate()
            .map(|(mode, b)| psd_sqrt(b, tol).map_err(|min_eigenvalue| {
                Error::NotPositiveSemidefinite {
                    mode,
                    min_eigenvalue,
                }
            }))
            .collect()
    }

    /// Entrywise combination of two densities on the same lattice.
    pub fn zip_map(&self, other: &Self, f: impl Fn(&Block, &Block) -> Block) -> Result<Self> {
        self.lattice.ensure_same(&other.lattice)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| f(a, b))
            .collect();
        Ok(SpectralCovariance {
            lattice: self.lattice,
            entries,
            kind: self.kind,
        })
    }

    /// Per-mode map with the mode index available.
    pub fn map_modes(&self, kind: CovarianceKind, f: impl Fn(usize, &Block) -> Block) -> Self {
        SpectralCovariance {
            lattice: self.lattice,
            entries: self.entries.iter().enumerate().map(|(m, b)| f(m, b)).collect(),
            kind,
        }
    }
}

/// Eigenvalues `(high, low)` of a Hermitian block.
pub fn eigenvalues(b: &Block) -> (f64, f64) {
    let a = b[0].re;
    let d = b[3].re;
    let off = 0.5 * (b[1] + b[2].conj());
    let mid = 0.5 * (a + d);
    let rad = (0.25 * (a - d) * (a - d) + off.norm_sqr()).sqrt();
    (mid + rad, mid - rad)
}

/// PSD square root by spectral decomposition. Returns the offending
/// eigenvalue when it is below `-tol`.
pub fn psd_sqrt(b: &Block, tol: f64) -> std::result::Result<Block, f64> {
    let (hi, lo) = eigenvalues(b);
    if lo < -tol {
        return Err(lo);
    }
    let z = Complex64::default();
    let one = Complex64::new(1.0, 0.0);
    let off = 0.5 * (b[1] + b[2].conj());
    let herm = [Complex64::new(b[0].re, 0.0), off, off.conj(), Complex64::new(b[3].re, 0.0)];
    let gap = hi - lo;
    if gap <= 1e-14 * hi.abs().max(f64::MIN_POSITIVE) {
        let s = Complex64::new(hi.max(0.0).sqrt(), 0.0);
        return Ok([s, z, z, s]);
    }
    // projector onto the top eigenvector: (M - lo I)/(hi - lo)
    let p_hi = [
        (herm[0] - lo) / gap,
        herm[1] / gap,
        herm[2] / gap,
        (herm[3] - lo) / gap,
    ];
    let p_lo = [one - p_hi[0], -p_hi[1], -p_hi[2], one - p_hi[3]];
    let (sh, sl) = (hi.max(0.0).sqrt(), lo.max(0.0).sqrt());
    Ok([
        p_hi[0] * sh + p_lo[0] * sl,
        p_hi[1] * sh + p_lo[1] * sl,
        p_hi[2] * sh + p_lo[2] * sl,
        p_hi[3] * sh + p_lo[3] * sl,
    ])
}

#[cfg(test)]
pub(crate) fn block_mul(a: &Block, b: &Block) -> Block {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}
