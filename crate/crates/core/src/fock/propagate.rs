//! Krylov-subspace propagation of the Schrodinger equation.
//!
//! Each step computes Psi <- exp(-i (dt/hbar) H) Psi in a Lanczos subspace
//! (full reorthogonalization; the dimensions here are small enough that the
//! extra inner products are cheap). The a posteriori error estimate is the
//! usual beta_m |last entry of exp(-i tau T) e_1|; steps exceeding the
//! tolerance are bisected.

use crate::error::{Error, Result};
use crate::fock::hamiltonian::{Hamiltonian, TensorSpace};
use crate::fock::state::QuantumState;
use nalgebra::DMatrix;
use num_complex::Complex64;

#[derive(Debug, Clone, Copy)]
pub struct PropagatorOpts {
    pub krylov_dim: usize,
    pub tol: f64,
    /// recursion limit for step bisection
    pub max_splits: u32,
}

impl Default for PropagatorOpts {
    fn default() -> Self {
        Self { krylov_dim: 20, tol: 1e-10, max_splits: 12 }
    }
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// exp(-i tau T) e_1 for the real symmetric tridiagonal T given by
/// (alphas, betas).
fn tridiag_exp_e1(alphas: &[f64], betas: &[f64], tau: f64) -> Vec<Complex64> {
    let m = alphas.len();
    let mut t = DMatrix::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alphas[i];
        if i + 1 < m {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let eig = t.symmetric_eigen();
    let mut out = vec![Complex64::new(0.0, 0.0); m];
    for j in 0..m {
        let phase = Complex64::from_polar(1.0, -tau * eig.eigenvalues[j]);
        let w = eig.eigenvectors[(0, j)];
        for i in 0..m {
            out[i] += eig.eigenvectors[(i, j)] * phase * w;
        }
    }
    out
}

fn lanczos_step(
    ham: &Hamiltonian,
    space: &TensorSpace,
    psi: &mut Vec<Complex64>,
    dt: f64,
    opts: &PropagatorOpts,
    depth: u32,
) -> Result<()> {
    let tau = dt / ham.hbar;
    let nrm = norm(psi);
    if nrm == 0.0 || !nrm.is_finite() {
        return Err(Error::Numerical("propagation lost the state norm".into()));
    }
    let dim = psi.len();
    let m_max = opts.krylov_dim.min(dim);
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(m_max);
    basis.push(psi.iter().map(|z| z / nrm).collect());
    let mut alphas = Vec::new();
    let mut betas = Vec::new();
    let mut w = vec![Complex64::new(0.0, 0.0); dim];
    let mut happy = false;
    for j in 0..m_max {
        ham.apply(space, &basis[j], &mut w);
        let a = inner(&basis[j], &w).re;
        alphas.push(a);
        for (x, v) in w.iter_mut().zip(&basis[j]) {
            *x -= a * v;
        }
        if j > 0 {
            let b = betas[j - 1];
            for (x, v) in w.iter_mut().zip(&basis[j - 1]) {
                *x -= b * v;
            }
        }
        // full reorthogonalization
        for v in &basis {
            let c = inner(v, &w);
            for (x, y) in w.iter_mut().zip(v) {
                *x -= c * y;
            }
        }
        let b = norm(&w);
        if b < 1e-14 {
            happy = true;
            break;
        }
        if j + 1 < m_max {
            betas.push(b);
            basis.push(w.iter().map(|z| z / b).collect());
        } else {
            betas.push(b);
        }
    }
    let m = alphas.len();
    let coeff = tridiag_exp_e1(&alphas, &betas[..m.saturating_sub(1)], tau);
    let err = if happy {
        0.0
    } else {
        betas[m - 1] * coeff[m - 1].norm() * tau.abs()
    };
    if err > opts.tol {
        if depth >= opts.max_splits {
            return Err(Error::Numerical(format!(
                "Krylov step error {err} above tolerance after {depth} bisections"
            )));
        }
        lanczos_step(ham, space, psi, dt / 2.0, opts, depth + 1)?;
        lanczos_step(ham, space, psi, dt / 2.0, opts, depth + 1)?;
        return Ok(());
    }
    for x in psi.iter_mut() {
        *x = Complex64::new(0.0, 0.0);
    }
    for (i, c) in coeff.iter().enumerate() {
        let cv = c * nrm;
        for (x, v) in psi.iter_mut().zip(&basis[i]) {
            *x += cv * v;
        }
    }
    Ok(())
}

/// Advance `state` by total time `t` in steps of `dt`.
pub fn propagate(
    ham: &Hamiltonian,
    space: &TensorSpace,
    state: &mut QuantumState,
    t: f64,
    dt: f64,
    opts: &PropagatorOpts,
) -> Result<()> {
    if (ham.hbar - state.hbar).abs() > 1e-15 {
        return Err(Error::GridMismatch("state and Hamiltonian disagree on hbar".into()));
    }
    if dt <= 0.0 || t < 0.0 {
        return Err(Error::Domain("need dt > 0 and t >= 0".into()));
    }
    let steps = (t / dt).round().max(1.0) as usize;
    let dt_eff = t / steps as f64;
    for _ in 0..steps {
        lanczos_step(ham, space, &mut state.psi, dt_eff, opts, 0)?;
        if !state.is_finite() {
            return Err(Error::Numerical("propagation produced non-finite state".into()));
        }
    }
    Ok(())
}
