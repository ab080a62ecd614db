//! Occupancy-number basis of the capped multimode Fock space.
//!
//! M modes with per-mode occupancy cap `n_max`; basis size (n_max+1)^M.
//! Mode 0 is the fastest-varying digit of the flat index. The discrete
//! annihilator for quadrature node i is sqrt(w_i) b_i, so the b_i here are
//! canonical: [b_i, b_j*] = delta_ij below the cap.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FockBasis {
    pub m: usize,
    pub n_max: usize,
    dim: usize,
    stride: Vec<usize>,
}

impl FockBasis {
    pub fn new(m: usize, n_max: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::Domain("need at least one field mode".into()));
        }
        let base = n_max + 1;
        let mut dim: usize = 1;
        let mut stride = Vec::with_capacity(m);
        for _ in 0..m {
            stride.push(dim);
            dim = dim
                .checked_mul(base)
                .ok_or_else(|| Error::DimensionOverflow(usize::MAX, 5_000_000))?;
        }
        Ok(Self { m, n_max, dim, stride })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn stride(&self, mode: usize) -> usize {
        self.stride[mode]
    }

    /// Occupancy of `mode` in the flat index `idx`.
    pub fn occupancy(&self, idx: usize, mode: usize) -> usize {
        (idx / self.stride[mode]) % (self.n_max + 1)
    }

    pub fn occupancies(&self, idx: usize) -> Vec<usize> {
        (0..self.m).map(|i| self.occupancy(idx, i)).collect()
    }

    pub fn index(&self, occ: &[usize]) -> Result<usize> {
        if occ.len() != self.m {
            return Err(Error::GridMismatch("occupancy tuple length != mode count".into()));
        }
        let mut idx = 0;
        for (i, &n) in occ.iter().enumerate() {
            if n > self.n_max {
                return Err(Error::Domain(format!("occupancy {n} exceeds cap {}", self.n_max)));
            }
            idx += n * self.stride[i];
        }
        Ok(idx)
    }

    /// dst += b_i src (truncated annihilator): <n-1| b |n> = sqrt(n).
    pub fn apply_annihilate(&self, mode: usize, src: &[Complex64], dst: &mut [Complex64]) {
        let s = self.stride[mode];
        for idx in 0..self.dim {
            let n = self.occupancy(idx, mode);
            if n < self.n_max {
                dst[idx] += ((n + 1) as f64).sqrt() * src[idx + s];
            }
        }
    }

    /// dst += b_i* src (truncated creator); amplitude at the cap is dropped.
    pub fn apply_create(&self, mode: usize, src: &[Complex64], dst: &mut [Complex64]) {
        let s = self.stride[mode];
        for idx in 0..self.dim {
            let n = self.occupancy(idx, mode);
            if n > 0 {
                dst[idx] += (n as f64).sqrt() * src[idx - s];
            }
        }
    }

    /// Diagonal of the total number operator N = sum_i b_i* b_i.
    pub fn number_diagonal(&self) -> Vec<f64> {
        (0..self.dim)
            .map(|idx| (0..self.m).map(|i| self.occupancy(idx, i)).sum::<usize>() as f64)
            .collect()
    }

    /// Diagonal of H_f = sum_i omega_i b_i* b_i.
    pub fn field_energy_diagonal(&self, omega: &[f64]) -> Result<Vec<f64>> {
        if omega.len() != self.m {
            return Err(Error::GridMismatch("omega length != mode count".into()));
        }
        Ok((0..self.dim)
            .map(|idx| {
                (0..self.m)
                    .map(|i| omega[i] * self.occupancy(idx, i) as f64)
                    .sum()
            })
            .collect())
    }

    /// Dense truncated annihilator, for small-dimension checks and the
    /// per-mode Weyl exponentials.
    pub fn dense_annihilate(&self, mode: usize) -> DMatrix<Complex64> {
        let mut b = DMatrix::zeros(self.dim, self.dim);
        for idx in 0..self.dim {
            let n = self.occupancy(idx, mode);
            if n < self.n_max {
                b[(idx, idx + self.stride[mode])] =
                    Complex64::new(((n + 1) as f64).sqrt(), 0.0);
            }
        }
        b
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_is_bijective_and_ordered() {
        let basis = FockBasis::new(3, 2).unwrap();
        assert_eq!(basis.dim(), 27);
        for idx in 0..basis.dim() {
            let occ = basis.occupancies(idx);
            assert_eq!(basis.index(&occ).unwrap(), idx);
        }
        assert_eq!(basis.occupancies(0), vec![0, 0, 0]);
        assert_eq!(basis.occupancies(1), vec![1, 0, 0]);
        assert_eq!(basis.occupancies(3), vec![0, 1, 0]);
    }

    #[test]
    fn ccr_exact_below_cap() {
        let basis = FockBasis::new(2, 3).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let bi = basis.dense_annihilate(i);
                let bj = basis.dense_annihilate(j);
                let comm = &bi * bj.adjoint() - bj.adjoint() * &bi;
                // [b_i, b_j*] = delta_ij on states with n_j < n_max
                for idx in 0..basis.dim() {
                    if basis.occupancy(idx, j) == basis.n_max {
                        continue;
                    }
                    for row in 0..basis.dim() {
                        let expect = if i == j && row == idx { 1.0 } else { 0.0 };
                        assert!(
                            (comm[(row, idx)] - Complex64::new(expect, 0.0)).norm() < 1e-14,
                            "CCR violated at ({i},{j})"
                        );
                    }
                }
                if i != j {
                    let commute = &bi * &bj - &bj * &bi;
                    assert!(commute.iter().all(|z| z.norm() < 1e-14));
                }
            }
        }
    }

    #[test]
    fn vacuum_is_annihilated() {
        let basis = FockBasis::new(2, 4).unwrap();
        let mut vac = vec![Complex64::new(0.0, 0.0); basis.dim()];
        vac[0] = Complex64::new(1.0, 0.0);
        for i in 0..2 {
            let mut out = vec![Complex64::new(0.0, 0.0); basis.dim()];
            basis.apply_annihilate(i, &vac, &mut out);
            assert!(out.iter().all(|z| z.norm() == 0.0));
        }
    }

    #[test]
    fn number_operator_is_diagonal_occupancy_sum() {
        let basis = FockBasis::new(2, 3).unwrap();
        let diag = basis.number_diagonal();
        for idx in 0..basis.dim() {
            let occ = basis.occupancies(idx);
            assert_eq!(diag[idx], (occ[0] + occ[1]) as f64);
        }
        // agreement with sum_i b* b applied through the matrix-free ladders
        let mut psi = vec![Complex64::new(0.0, 0.0); basis.dim()];
        for (i, z) in psi.iter_mut().enumerate() {
            *z = Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos());
        }
        let mut num = vec![Complex64::new(0.0, 0.0); basis.dim()];
        for i in 0..2 {
            let mut tmp = vec![Complex64::new(0.0, 0.0); basis.dim()];
            basis.apply_annihilate(i, &psi, &mut tmp);
            basis.apply_create(i, &tmp, &mut num);
        }
        for idx in 0..basis.dim() {
            // b* b is diagonal = n except it misses nothing below or at cap
            let expect = psi[idx] * diag[idx];
            assert!((num[idx] - expect).norm() < 1e-13);
        }
    }
}
