//! Periodic lattices standing in for `R^n`.
//!
//! Grid points are stored row-major with the last axis fastest. Index `i`
//! along an axis maps to the centered coordinate `i*dx` for `i < N/2` and
//! `(i - N)*dx` otherwise, so the origin sits at flat index 0 and no shift is
//! needed between real and Fourier layouts. Wavenumbers use the same
//! wrap-around ordering: `m = 0, 1, .., N/2-1, -N/2, .., -1`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Periodic `dim`-dimensional grid with `points_per_axis` points per axis and
/// side `box_length`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LatticeParams", into = "LatticeParams")]
pub struct Lattice {
    dim: usize,
    points: usize,
    length: f64,
}

#[derive(Serialize, Deserialize)]
struct LatticeParams {
    dim: usize,
    points_per_axis: usize,
    box_length: f64,
}

impl TryFrom<LatticeParams> for Lattice {
    type Error = Error;
    fn try_from(p: LatticeParams) -> Result<Self> {
        Lattice::new(p.dim, p.points_per_axis, p.box_length)
    }
}

impl From<Lattice> for LatticeParams {
    fn from(l: Lattice) -> Self {
        LatticeParams {
            dim: l.dim,
            points_per_axis: l.points,
            box_length: l.length,
        }
    }
}

impl Lattice {
    pub fn new(dim: usize, points_per_axis: usize, box_length: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidLattice(format!("dimension {dim} not in 1..=3")));
        }
        if !points_per_axis.is_multiple_of(2) {
            return Err(Error::InvalidLattice(format!(
                "points per axis must be even, got {points_per_axis}"
            )));
        }
        if points_per_axis < 8 {
            return Err(Error::InvalidLattice(format!(
                "points per axis must be at least 8, got {points_per_axis}"
            )));
        }
        if !(box_length > 0.0) || !box_length.is_finite() {
            return Err(Error::InvalidLattice(format!(
                "box length must be positive, got {box_length}"
            )));
        }
        Ok(Lattice {
            dim,
            points: points_per_axis,
            length: box_length,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points_per_axis(&self) -> usize {
        self.points
    }

    pub fn box_length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.points as f64
    }

    /// Total number of grid points, `N^n`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weight of one cell, `dx^n`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Volume of the torus, `L^n`.
    pub fn volume(&self) -> f64 {
        self.length.powi(self.dim as i32)
    }

    /// Largest radius for which balls centred at the origin do not wrap.
    pub fn half_length(&self) -> f64 {
        0.5 * self.length
    }

    /// Signed mode number of storage index `i` along one axis.
    pub fn mode_number(&self, i: usize) -> i64 {
        let n = self.points as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Wavenumber `2*pi*m/L` for storage index `i` along one axis.
    pub fn axis_wavenumber(&self, i: usize) -> f64 {
        2.0 * PI * self.mode_number(i) as f64 / self.length
    }

    /// All axis wavenumbers in storage order.
    pub fn axis_wavenumbers(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.axis_wavenumber(i)).collect()
    }

    /// Centered coordinate of storage index `i` along one axis.
    pub fn axis_coordinate(&self, i: usize) -> f64 {
        self.mode_number(i) as f64 * self.spacing()
    }

    /// Nyquist index along an axis (mode `-N/2`).
    pub fn nyquist_index(&self) -> usize {
        self.points / 2
    }

    /// Multi-index of a flat index, padded with zeros to three entries.
    pub fn multi_index(&self, mut flat: usize) -> [usize; 3] {
        let mut out = [0usize; 3];
        for axis in (0..self.dim).rev() {
            out[axis] = flat % self.points;
            flat /= self.points;
        }
        out
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        multi[..self.dim]
            .iter()
            .fold(0, |acc, &i| acc * self.points + (i % self.points))
    }

    /// Wave vector at a flat index (unused axes are zero).
    pub fn wavevector(&self, flat: usize) -> [f64; 3] {
        let mi = self.multi_index(flat);
        let mut k = [0.0; 3];
        for a in 0..self.dim {
            k[a] = self.axis_wavenumber(mi[a]);
        }
        k
    }

    pub fn k_squared(&self, flat: usize) -> f64 {
        self.wavevector(flat).iter().map(|k| k * k).sum()
    }

    /// Centered position at a flat index.
    pub fn position(&self, flat: usize) -> [f64; 3] {
        let mi = self.multi_index(flat);
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = self.axis_coordinate(mi[a]);
        }
        x
    }

    /// Euclidean distance of a grid point from the origin.
    pub fn radius(&self, flat: usize) -> f64 {
        self.position(flat).iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// `|k|^2` at every mode in storage order.
    pub fn k_squared_grid(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.k_squared(i)).collect()
    }

    /// Distance from the origin at every grid point.
    pub fn radius_grid(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.radius(i)).collect()
    }

    /// Flat index of the mode `-k`.
    pub fn negated_index(&self, flat: usize) -> usize {
        let mi = self.multi_index(flat);
        let mut neg = [0usize; 3];
        for a in 0..self.dim {
            neg[a] = (self.points - mi[a]) % self.points;
        }
        self.flat_index(&neg)
    }

    /// Mask of points inside the open ball `|x| < radius`.
    pub fn ball_mask(&self, radius: f64) -> Vec<bool> {
        (0..self.len()).map(|i| self.radius(i) < radius).collect()
    }

    pub(crate) fn ensure_same(&self, other: &Lattice) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::LatticeMismatch)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_wavenumbers() {
        let l = Lattice::new(1, 8, 2.0 * PI).unwrap();
        let mut k = l.axis_wavenumbers();
        k.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let expected: Vec<f64> = (-4..4).map(|m| m as f64).collect();
        for (a, b) in k.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn two_dimensional_counts() {
        let l = Lattice::new(2, 8, 2.0 * PI).unwrap();
        assert_eq!(l.len(), 64);
        assert!((l.spacing() - PI / 4.0).abs() < 1e-15);
        assert!((l.spacing() * 8.0 - l.box_length()).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Lattice::new(1, 7, 1.0).is_err());
        assert!(Lattice::new(1, 8, 0.0).is_err());
        assert!(Lattice::new(1, 8, -3.0).is_err());
        assert!(Lattice::new(4, 8, 1.0).is_err());
        assert!(Lattice::new(1, 6, 1.0).is_err());
    }

    #[test]
    fn negation_is_an_involution_except_nyquist() {
        let l = Lattice::new(2, 8, 3.0).unwrap();
        for i in 0..l.len() {
            let j = l.negated_index(i);
            assert_eq!(l.negated_index(j), i);
            let (ki, kj) = (l.wavevector(i), l.wavevector(j));
            let mi = l.multi_index(i);
            for a in 0..2 {
                if mi[a] == l.nyquist_index() {
                    assert_eq!(ki[a], kj[a]);
                } else {
                    assert!((ki[a] + kj[a]).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn serde_roundtrip_validates() {
        let l = Lattice::new(2, 16, 5.0).unwrap();
        let s = serde_json::to_string(&l).unwrap();
        assert_eq!(serde_json::from_str::<Lattice>(&s).unwrap(), l);
        let bad = r#"{"dim":1,"points_per_axis":9,"box_length":1.0}"#;
        assert!(serde_json::from_str::<Lattice>(bad).is_err());
    }
}
