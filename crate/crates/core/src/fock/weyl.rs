//! Truncated Weyl displacement operators.
//!
//! W(f) = exp(a(f) - a*(f)) factorizes over modes; each factor is
//! exponentiated exactly in a padded single-mode space (occupancy cap raised
//! until the retained block stabilizes) and then cut back to the working cap.
//! The norm lost in the cut is the reported truncation leakage.

use crate::error::{Error, Result};
use crate::fock::basis::FockBasis;
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Per-mode displacement factors cut to the working cap. `mats[i]` maps the
/// length-(n_max+1) fiber of mode i; it is a strict contraction wherever the
/// displacement pushes weight past the cap.
#[derive(Debug, Clone)]
pub struct WeylOperator {
    mats: Vec<DMatrix<Complex64>>,
    base: usize,
}

/// exp(c b* - conj(c) b) on a single mode with occupancy cap `cap`,
/// computed by Hermitian eigendecomposition of i(c b* - conj(c) b).
fn single_mode_displacement(cap: usize, c: Complex64) -> DMatrix<Complex64> {
    let dim = cap + 1;
    let mut herm = DMatrix::zeros(dim, dim);
    for n in 0..cap {
        let s = ((n + 1) as f64).sqrt();
        // A = i (c b* - conj(c) b): A[n+1, n] = i c sqrt(n+1)
        herm[(n + 1, n)] = Complex64::i() * c * s;
        herm[(n, n + 1)] = -Complex64::i() * c.conj() * s;
    }
    let eig = herm.symmetric_eigen();
    let phases = DMatrix::from_diagonal(
        &eig.eigenvalues.map(|l| Complex64::from_polar(1.0, -l)),
    );
    &eig.eigenvectors * phases * eig.eigenvectors.adjoint()
}

/// Top-left (n_max+1) block of the single-mode displacement, padded until the
/// block is converged to machine precision.
fn truncated_factor(n_max: usize, c: Complex64) -> Result<DMatrix<Complex64>> {
    let base = n_max + 1;
    let mut pad = n_max + 8 + (2.0 * c.norm()).ceil() as usize;
    let mut prev = single_mode_displacement(pad, c).view((0, 0), (base, base)).into_owned();
    for _ in 0..8 {
        pad += 4;
        let next = single_mode_displacement(pad, c).view((0, 0), (base, base)).into_owned();
        let delta = (&next - &prev).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if delta < 1e-14 {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::Numerical(format!(
        "Weyl factor did not stabilize under padding for |c| = {}",
        c.norm()
    )))
}

impl WeylOperator {
    /// Displacement with per-mode amplitudes f_i (the shift of the canonical
    /// annihilator b_i; for a grid function g this is sqrt(w_i) g_i).
    pub fn new(basis: &FockBasis, f: &[Complex64]) -> Result<Self> {
        if f.len() != basis.m {
            return Err(Error::GridMismatch("displacement length != mode count".into()));
        }
        let mats = f
            .iter()
            .map(|&c| truncated_factor(basis.n_max, c))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { mats, base: basis.n_max + 1 })
    }

    pub fn adjoint(&self) -> Self {
        Self {
            mats: self.mats.iter().map(|m| m.adjoint()).collect(),
            base: self.base,
        }
    }

    /// Apply in place to a tensor state whose Fock index is fastest with the
    /// layout of `basis` (outer blocks of length basis.dim()). Returns the
    /// truncation leakage 1 - ||result|| / ||input||.
    pub fn apply(&self, basis: &FockBasis, psi: &mut [Complex64]) -> Result<f64> {
        let fdim = basis.dim();
        if psi.len() % fdim != 0 {
            return Err(Error::GridMismatch("state length not a multiple of Fock dim".into()));
        }
        let norm_in: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm_in == 0.0 {
            return Err(Error::Domain("cannot displace the zero vector".into()));
        }
        let mut fiber = vec![Complex64::new(0.0, 0.0); self.base];
        for (mode, mat) in self.mats.iter().enumerate() {
            let s = basis.stride(mode);
            for block in 0..psi.len() / fdim {
                let off = block * fdim;
                // enumerate fibers: indices with occupancy digit of `mode` = 0
                for idx in 0..fdim {
                    if basis.occupancy(idx, mode) != 0 {
                        continue;
                    }
                    for n in 0..self.base {
                        fiber[n] = psi[off + idx + n * s];
                    }
                    for r in 0..self.base {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for c in 0..self.base {
                            acc += mat[(r, c)] * fiber[c];
                        }
                        psi[off + idx + r * s] = acc;
                    }
                }
            }
        }
        let norm_out: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        Ok(1.0 - norm_out / norm_in)
    }
}

/// Displace `psi` by the per-mode amplitudes `f`; errors when the reported
/// leakage exceeds `leakage_bound` (advising a larger cap).
pub fn weyl_displace(
    basis: &FockBasis,
    f: &[Complex64],
    psi: &[Complex64],
    leakage_bound: f64,
) -> Result<(Vec<Complex64>, f64)> {
    let op = WeylOperator::new(basis, f)?;
    let mut out = psi.to_vec();
    let leakage = op.apply(basis, &mut out)?;
    if leakage > leakage_bound {
        return Err(Error::Leakage { leakage, bound: leakage_bound });
    }
    Ok((out, leakage))
}

/// Fock vacuum on `basis` (unit amplitude at zero occupancy).
pub fn vacuum(basis: &FockBasis) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); basis.dim()];
    v[0] = Complex64::new(1.0, 0.0);
    v
}
