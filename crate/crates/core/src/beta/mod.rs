//! Fluctuation functionals comparing the quantum and classical runs.
//!
//! beta_a  = ||(x - q) Psi||^2
//! beta_b  = sum_j ||(-i hbar d_1 - hbar^{1/2} A^1(x_j) - ptilde_j) Psi||^2
//! beta~_b = sum_j ||(-i hbar d_1 - p_j) Psi||^2
//! beta_c  = sum_i w_i ||(hbar^{1/2} a_i - alpha_i) Psi||^2, cross-checked
//!           against hbar ||N^{1/2} W*(hbar^{-1/2} alpha) Psi||^2
//!
//! plus the one-photon reduced density matrix, its trace distance to the
//! coherent projector, Lipschitz observable errors, and finite mixtures.

use crate::classical::{self, ClassicalState, SolverConfig};
use crate::error::{Error, Result};
use crate::field_kernels::{Kernels, ModeField};
use crate::fock::hamiltonian::{Hamiltonian, TensorSpace};
use crate::fock::state::{position_variance_about, QuantumState};
use crate::fock::weyl::WeylOperator;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

/// One comparison row between paired runs at a common time.
#[derive(Debug, Clone, Serialize)]
pub struct BetaReport {
    pub t: f64,
    pub beta_a: f64,
    pub beta_b: f64,
    pub beta_b_tilde: f64,
    pub beta_c: f64,
    /// Weyl-route cross-check of beta_c (route (i))
    pub beta_c_weyl: f64,
    pub rdm_distance: f64,
    pub rdm_bound: f64,
    pub leakage: f64,
    pub energy_q: f64,
    pub energy_c: f64,
}

pub fn beta_a(space: &TensorSpace, psi: &[Complex64], q: &[f64]) -> f64 {
    position_variance_about(space, psi, q)
}

fn norm_sq(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// sum_j ||(K_j - hbar^{1/2} A^1(x_j) - ptilde_j) Psi||^2.
pub fn beta_b(
    ham: &Hamiltonian,
    space: &TensorSpace,
    state: &QuantumState,
    ptilde: &[f64],
) -> Result<f64> {
    if ptilde.len() != space.n_particles {
        return Err(Error::GridMismatch("kinetic momentum length mismatch".into()));
    }
    let s = if ham.opts.coupling_on { state.hbar.sqrt() } else { 0.0 };
    let mut total = 0.0;
    for j in 0..space.n_particles {
        let kpsi = ham.momentum(space, j, &state.psi);
        let apsi = ham.smeared_field(space, j, &state.psi);
        let resid: Vec<Complex64> = kpsi
            .iter()
            .zip(&apsi)
            .zip(&state.psi)
            .map(|((k, a), p)| k - s * a - ptilde[j] * p)
            .collect();
        total += norm_sq(&resid);
    }
    Ok(total)
}

/// sum_j ||(K_j - p_j) Psi||^2.
pub fn beta_b_tilde(
    ham: &Hamiltonian,
    space: &TensorSpace,
    state: &QuantumState,
    p: &[f64],
) -> Result<f64> {
    if p.len() != space.n_particles {
        return Err(Error::GridMismatch("momentum length mismatch".into()));
    }
    let mut total = 0.0;
    for j in 0..space.n_particles {
        let kpsi = ham.momentum(space, j, &state.psi);
        let resid: Vec<Complex64> = kpsi
            .iter()
            .zip(&state.psi)
            .map(|(k, psi)| k - p[j] * psi)
            .collect();
        total += norm_sq(&resid);
    }
    Ok(total)
}

/// Route (ii): sum_i || (hbar^{1/2} b_i - sqrt(w_i) alpha_i) Psi ||^2 — the
/// discrete image of the continuum integral under the sqrt(w) a_i convention.
pub fn beta_c_modes(
    kern: &Kernels,
    space: &TensorSpace,
    state: &QuantumState,
    alpha: &ModeField,
) -> Result<f64> {
    if alpha.len() != space.basis.m {
        return Err(Error::GridMismatch("alpha length != mode count".into()));
    }
    let f = space.basis.dim();
    let s = state.hbar.sqrt();
    let mut total = 0.0;
    let mut tmp = vec![Complex64::new(0.0, 0.0); f];
    for i in 0..space.basis.m {
        let target = kern.grid.weight[i].sqrt() * alpha.amplitudes[i];
        for gidx in 0..space.grid_dim() {
            let off = gidx * f;
            tmp.fill(Complex64::new(0.0, 0.0));
            space.basis.apply_annihilate(i, &state.psi[off..off + f], &mut tmp);
            for n in 0..f {
                total += (s * tmp[n] - target * state.psi[off + n]).norm_sqr();
            }
        }
    }
    Ok(total)
}

/// Route (i): hbar || N^{1/2} W*(hbar^{-1/2} alpha) Psi ||^2. The
/// displacement is applied in a padded Fock space (cap raised by the
/// larger of n_max and 8 plus a displacement-dependent margin) so the
/// shifting identity behind the two-route equivalence holds to rounding;
/// the tiny norm lost at the padded cap is returned as leakage.
pub fn beta_c_weyl(
    kern: &Kernels,
    space: &TensorSpace,
    state: &QuantumState,
    alpha: &ModeField,
) -> Result<(f64, f64)> {
    if alpha.len() != space.basis.m {
        return Err(Error::GridMismatch("alpha length != mode count".into()));
    }
    let f: Vec<Complex64> = (0..space.basis.m)
        .map(|i| kern.grid.weight[i].sqrt() * alpha.amplitudes[i] / state.hbar.sqrt())
        .collect();
    let max_shift = f.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let pad = space.basis.n_max.max(8) + (4.0 * max_shift).ceil() as usize;
    let padded = crate::fock::basis::FockBasis::new(space.basis.m, space.basis.n_max + pad)?;
    let blocks = space.grid_dim();
    let fdim = space.basis.dim();
    let pdim = padded.dim();
    let mut shifted = vec![Complex64::new(0.0, 0.0); blocks * pdim];
    for gidx in 0..blocks {
        for n in 0..fdim {
            let occ = space.basis.occupancies(n);
            shifted[gidx * pdim + padded.index(&occ)?] = state.psi[gidx * fdim + n];
        }
    }
    let op = WeylOperator::new(&padded, &f)?.adjoint();
    let leakage = op.apply(&padded, &mut shifted)?;
    let diag = padded.number_diagonal();
    let mut total = 0.0;
    for gidx in 0..blocks {
        let off = gidx * pdim;
        for n in 0..pdim {
            total += diag[n] * shifted[off + n].norm_sqr();
        }
    }
    Ok((state.hbar * total, leakage))
}

/// One-photon reduced density matrix gamma_{ij} = hbar <Psi, b_j* b_i Psi>.
/// Tr gamma = hbar <N>; the classical comparator is the projector onto
/// alpha-bar with alpha-bar_i = sqrt(w_i) alpha_i.
pub fn one_photon_rdm(space: &TensorSpace, state: &QuantumState) -> Result<DMatrix<Complex64>> {
    let m = space.basis.m;
    let f = space.basis.dim();
    let mut modes: Vec<Vec<Complex64>> = Vec::with_capacity(m);
    for i in 0..m {
        let mut bi = vec![Complex64::new(0.0, 0.0); state.psi.len()];
        for gidx in 0..space.grid_dim() {
            let off = gidx * f;
            space.basis.apply_annihilate(
                i,
                &state.psi[off..off + f],
                &mut bi[off..off + f],
            );
        }
        modes.push(bi);
    }
    let mut gamma = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let z: Complex64 = modes[j]
                .iter()
                .zip(&modes[i])
                .map(|(a, b)| a.conj() * b)
                .sum();
            gamma[(i, j)] = state.hbar * z;
        }
    }
    let herm_defect = (0..m)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .map(|(i, j)| (gamma[(i, j)] - gamma[(j, i)].conj()).norm())
        .fold(0.0, f64::max);
    if herm_defect > 1e-10 {
        return Err(Error::Numerical(format!(
            "one-photon RDM non-Hermitian by {herm_defect}"
        )));
    }
    // exact symmetrization for the eigensolver
    let gamma = (gamma.clone() + gamma.adjoint()) * Complex64::new(0.5, 0.0);
    Ok(gamma)
}

/// Weighted coherent vector alpha-bar and its projector.
pub fn coherent_projector(kern: &Kernels, alpha: &ModeField) -> DMatrix<Complex64> {
    let m = alpha.len();
    let bar: Vec<Complex64> = (0..m)
        .map(|i| kern.grid.weight[i].sqrt() * alpha.amplitudes[i])
        .collect();
    let mut p = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            p[(i, j)] = bar[i] * bar[j].conj();
        }
    }
    p
}

/// Trace norm of the Hermitian difference gamma - projector(alpha): sum of
/// absolute eigenvalues.
pub fn trace_distance(gamma: &DMatrix<Complex64>, projector: &DMatrix<Complex64>) -> f64 {
    let diff = gamma - projector;
    let eig = diff.symmetric_eigen();
    eig.eigenvalues.iter().map(|l| l.abs()).sum()
}

/// Smallest eigenvalue of the RDM (PSD check).
pub fn min_eigenvalue(gamma: &DMatrix<Complex64>) -> f64 {
    gamma
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// ||alpha||_w = sqrt(sum_i w_i |alpha_i|^2), the h^0 norm entering the RDM
/// bound 3 beta_c + 6 ||alpha|| sqrt(beta_c).
pub fn alpha_norm(kern: &Kernels, alpha: &ModeField) -> f64 {
    (0..alpha.len())
        .map(|i| kern.grid.weight[i] * alpha.amplitudes[i].norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Scalar function with a certified Lipschitz constant.
pub struct LipschitzFn<'a> {
    pub f: &'a dyn Fn(f64) -> f64,
    pub lipschitz: f64,
}

pub enum Observable {
    /// x of particle j
    Position(usize),
    /// -i hbar d_1 of particle j
    Momentum(usize),
    /// hbar^{1/2} Phi(g)
    FieldPhi(ModeField),
}

/// |<Psi, f(J) Psi> - f(classical value)| through the spectral measure of J.
pub fn observable_error(
    kern: &Kernels,
    space: &TensorSpace,
    state: &QuantumState,
    obs: &Observable,
    func: &LipschitzFn,
    classical_value: f64,
) -> Result<f64> {
    if !(func.lipschitz.is_finite() && func.lipschitz >= 0.0) {
        return Err(Error::Domain("observable needs a certified Lipschitz constant".into()));
    }
    let f = space.basis.dim();
    let expect = match obs {
        Observable::Position(j) => {
            let mut s = 0.0;
            for gidx in 0..space.grid_dim() {
                let x = space.grid.points[space.grid_coord(gidx, *j)];
                let off = gidx * f;
                let w: f64 = state.psi[off..off + f].iter().map(|z| z.norm_sqr()).sum();
                s += (func.f)(x) * w;
            }
            s
        }
        Observable::Momentum(j) => {
            // momentum is diagonal in the Fourier basis: eigenvalues
            // hbar k_n with k_n = 2 pi n / L, n in [-G/2, G/2)
            let g = space.grid.g;
            let l = space.grid.length();
            let mut s = 0.0;
            for n in 0..g {
                let freq = if n <= g / 2 { n as isize } else { n as isize - g as isize };
                let k = 2.0 * std::f64::consts::PI * freq as f64 / l;
                let weight = momentum_marginal(space, &state.psi, *j, n);
                s += (func.f)(state.hbar * k) * weight;
            }
            s
        }
        Observable::FieldPhi(g) => {
            if g.len() != space.basis.m {
                return Err(Error::GridMismatch("field test function length mismatch".into()));
            }
            // dense F x F realization of hbar^{1/2} Phi(g) on the Fock factor
            let mut phi = DMatrix::zeros(f, f);
            for i in 0..space.basis.m {
                let b = space.basis.dense_annihilate(i);
                let c = kern.grid.weight[i].sqrt() * g.amplitudes[i];
                phi += &b * c.conj() + b.adjoint() * c;
            }
            phi *= Complex64::new(state.hbar.sqrt(), 0.0);
            let eig = phi.symmetric_eigen();
            let mut s = 0.0;
            for m in 0..f {
                // weight of eigenvector m across all grid blocks
                let mut w = 0.0;
                for gidx in 0..space.grid_dim() {
                    let off = gidx * f;
                    let mut amp = Complex64::new(0.0, 0.0);
                    for n in 0..f {
                        amp += eig.eigenvectors[(n, m)].conj() * state.psi[off + n];
                    }
                    w += amp.norm_sqr();
                }
                s += (func.f)(eig.eigenvalues[m]) * w;
            }
            s
        }
    };
    Ok((expect - (func.f)(classical_value)).abs())
}

/// |psi-hat|^2 marginal of particle j at Fourier index n.
fn momentum_marginal(space: &TensorSpace, psi: &[Complex64], j: usize, n: usize) -> f64 {
    let g = space.grid.g;
    let f = space.basis.dim();
    let scale = 1.0 / (g as f64).sqrt();
    let mut total = 0.0;
    // sum over the other tensor indices of |sum_gj e^{-i k x} psi|^2
    let outer: usize = if space.n_particles == 2 { g } else { 1 };
    for o in 0..outer {
        for fidx in 0..f {
            let mut amp = Complex64::new(0.0, 0.0);
            for gj in 0..g {
                let gidx = match (space.n_particles, j) {
                    (1, _) => gj,
                    (2, 0) => gj * g + o,
                    _ => o * g + gj,
                };
                let phase = -2.0 * std::f64::consts::PI * (n * gj) as f64 / g as f64;
                amp += Complex64::from_polar(scale, phase) * psi[gidx * f + fidx];
            }
            total += amp.norm_sqr();
        }
    }
    total
}

/// Finite mixture of classical data with positive weights summing to one.
#[derive(Debug, Clone)]
pub struct EnsembleSpec {
    pub weights: Vec<f64>,
}

impl EnsembleSpec {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|&w| w <= 0.0) {
            return Err(Error::Domain("ensemble weights must be positive".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("ensemble weights sum to {total}, not 1")));
        }
        Ok(Self { weights })
    }
}

/// Averaged RDM, averaged coherent projector, and their trace distance.
pub fn ensemble_rdm(
    spec: &EnsembleSpec,
    gammas: &[DMatrix<Complex64>],
    projectors: &[DMatrix<Complex64>],
) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>, f64)> {
    if gammas.len() != spec.weights.len() || projectors.len() != spec.weights.len() {
        return Err(Error::GridMismatch("ensemble member count mismatch".into()));
    }
    let m = gammas[0].nrows();
    if gammas.iter().chain(projectors.iter()).any(|g| g.nrows() != m || g.ncols() != m) {
        return Err(Error::GridMismatch("ensemble members on different mode sets".into()));
    }
    let mut avg_gamma = DMatrix::zeros(m, m);
    let mut avg_proj = DMatrix::zeros(m, m);
    for ((w, g), p) in spec.weights.iter().zip(gammas).zip(projectors) {
        avg_gamma += g * Complex64::new(*w, 0.0);
        avg_proj += p * Complex64::new(*w, 0.0);
    }
    let dist = trace_distance(&avg_gamma, &avg_proj);
    Ok((avg_gamma, avg_proj, dist))
}

/// Evaluate the full comparison row for a paired sample.
pub fn evaluate(
    kern: &Kernels,
    space: &TensorSpace,
    ham: &Hamiltonian,
    state: &QuantumState,
    u: &ClassicalState,
    solver_cfg: &SolverConfig,
    leakage_so_far: f64,
) -> Result<BetaReport> {
    let q: Vec<f64> = u.q.iter().map(|q| q[classical::AXIS]).collect();
    let p: Vec<f64> = u.p.iter().map(|p| p[classical::AXIS]).collect();
    let ptilde: Vec<f64> = classical::kinetic_momentum(kern, u, solver_cfg)?
        .iter()
        .map(|p| p[classical::AXIS])
        .collect();
    let beta_a_v = beta_a(space, &state.psi, &q);
    let beta_b_v = beta_b(ham, space, state, &ptilde)?;
    let beta_bt_v = beta_b_tilde(ham, space, state, &p)?;
    let beta_c_v = beta_c_modes(kern, space, state, &u.alpha)?;
    let (beta_cw_v, weyl_leak) = beta_c_weyl(kern, space, state, &u.alpha)?;
    let gamma = one_photon_rdm(space, state)?;
    let proj = coherent_projector(kern, &u.alpha);
    let rdm_distance = trace_distance(&gamma, &proj);
    let an = alpha_norm(kern, &u.alpha);
    let rdm_bound = 3.0 * beta_c_v + 6.0 * an * beta_c_v.sqrt();
    Ok(BetaReport {
        t: u.t,
        beta_a: beta_a_v,
        beta_b: beta_b_v,
        beta_b_tilde: beta_bt_v,
        beta_c: beta_c_v,
        beta_c_weyl: beta_cw_v,
        rdm_distance,
        rdm_bound,
        leakage: leakage_so_far + weyl_leak.abs(),
        energy_q: ham.energy(space, &state.psi),
        energy_c: classical::energy(kern, u, solver_cfg)?,
    })
}
