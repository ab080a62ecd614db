//! Gaussian x coherent initial data and observable expectations.

use crate::error::{Error, Result};
use crate::field_kernels::{Kernels, ModeField};
use crate::fock::hamiltonian::{Hamiltonian, TensorSpace};
use crate::fock::weyl::{vacuum, weyl_displace};
use num_complex::Complex64;

/// Normalized tensor state with the hbar it was prepared for.
#[derive(Debug, Clone)]
pub struct QuantumState {
    pub psi: Vec<Complex64>,
    pub hbar: f64,
}

impl QuantumState {
    pub fn norm(&self) -> f64 {
        self.psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            for z in &mut self.psi {
                *z /= n;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.psi.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// Semiclassical Gaussian on the grid: psi(x) = (pi hbar)^{-1/4}
/// exp(-(x-q)^2 / (2 hbar)) exp(i p (x-q) / hbar); per-component position
/// variance hbar/2. Amplitudes carry sqrt(h) so plain l2 sums approximate
/// integrals.
fn gaussian_1d(space: &TensorSpace, q: f64, p: f64, hbar: f64) -> Result<Vec<Complex64>> {
    let grid = &space.grid;
    let sigma = (hbar / 2.0).sqrt();
    if q - 6.0 * sigma < grid.x_min || q + 6.0 * sigma > grid.x_max {
        return Err(Error::Domain(format!(
            "Gaussian at q = {q} with 6 sigma = {} does not fit the grid extent [{}, {}]",
            6.0 * sigma,
            grid.x_min,
            grid.x_max
        )));
    }
    let pref = (std::f64::consts::PI * hbar).powf(-0.25) * grid.h.sqrt();
    Ok(grid
        .points
        .iter()
        .map(|&x| {
            let d = x - q;
            pref * (-d * d / (2.0 * hbar)).exp() * Complex64::from_polar(1.0, p * d / hbar)
        })
        .collect())
}

/// Gaussian(q0, p0) tensor W(hbar^{-1/2} alpha0) Omega. Returns the state and
/// the Weyl truncation leakage.
pub fn initial_state(
    kern: &Kernels,
    space: &TensorSpace,
    q0: &[f64],
    p0: &[f64],
    alpha0: &ModeField,
    hbar: f64,
    leakage_bound: f64,
) -> Result<(QuantumState, f64)> {
    if q0.len() != space.n_particles || p0.len() != space.n_particles {
        return Err(Error::GridMismatch("particle data length mismatch".into()));
    }
    if alpha0.len() != space.basis.m {
        return Err(Error::GridMismatch("alpha0 length != mode count".into()));
    }
    // W(hbar^{-1/2} alpha) shifts a_i by hbar^{-1/2} alpha_i, i.e. the
    // canonical b_i by sqrt(w_i) hbar^{-1/2} alpha_i
    let f: Vec<Complex64> = (0..space.basis.m)
        .map(|i| kern.grid.weight[i].sqrt() * alpha0.amplitudes[i] / hbar.sqrt())
        .collect();
    let (fock, leakage) = weyl_displace(&space.basis, &f, &vacuum(&space.basis), leakage_bound)?;
    let mut particle = gaussian_1d(space, q0[0], p0[0], hbar)?;
    if space.n_particles == 2 {
        let second = gaussian_1d(space, q0[1], p0[1], hbar)?;
        let mut joint = Vec::with_capacity(particle.len() * second.len());
        for a in &particle {
            for b in &second {
                joint.push(a * b);
            }
        }
        particle = joint;
    }
    let mut psi = Vec::with_capacity(space.dim());
    for a in &particle {
        for b in &fock {
            psi.push(a * b);
        }
    }
    let mut state = QuantumState { psi, hbar };
    state.normalize();
    Ok((state, leakage))
}

/// Standard observable expectations on the tensor basis.
#[derive(Debug, Clone)]
pub struct Expectations {
    pub position: Vec<f64>,
    pub momentum: Vec<f64>,
    pub kinetic_momentum: Vec<f64>,
    pub number: f64,
    pub energy: f64,
}

fn real_inner(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x.conj() * y).re).sum()
}

pub fn position_expectation(space: &TensorSpace, psi: &[Complex64], j: usize) -> f64 {
    let f = space.basis.dim();
    let mut s = 0.0;
    for gidx in 0..space.grid_dim() {
        let x = space.grid.points[space.grid_coord(gidx, j)];
        let off = gidx * f;
        let w: f64 = psi[off..off + f].iter().map(|z| z.norm_sqr()).sum();
        s += x * w;
    }
    s
}

/// <b_i> on the canonical discrete modes.
pub fn mode_amplitude(space: &TensorSpace, psi: &[Complex64], mode: usize) -> Complex64 {
    let f = space.basis.dim();
    let basis = &space.basis;
    let mut tmp = vec![Complex64::new(0.0, 0.0); f];
    let mut acc = Complex64::new(0.0, 0.0);
    for gidx in 0..space.grid_dim() {
        let off = gidx * f;
        tmp.fill(Complex64::new(0.0, 0.0));
        basis.apply_annihilate(mode, &psi[off..off + f], &mut tmp);
        for n in 0..f {
            acc += psi[off + n].conj() * tmp[n];
        }
    }
    acc
}

pub fn number_expectation(space: &TensorSpace, psi: &[Complex64]) -> f64 {
    let f = space.basis.dim();
    let diag = space.basis.number_diagonal();
    let mut s = 0.0;
    for gidx in 0..space.grid_dim() {
        let off = gidx * f;
        for n in 0..f {
            s += diag[n] * psi[off + n].norm_sqr();
        }
    }
    s
}

/// <Phi(g)> with Phi(g) = a(g) + a*(g) = sum_i sqrt(w_i)(conj(g_i) b_i + h.c.).
pub fn field_phi_expectation(
    kern: &Kernels,
    space: &TensorSpace,
    psi: &[Complex64],
    g: &ModeField,
) -> Result<f64> {
    if g.len() != space.basis.m {
        return Err(Error::GridMismatch("field test function length mismatch".into()));
    }
    let mut s = Complex64::new(0.0, 0.0);
    for i in 0..space.basis.m {
        s += kern.grid.weight[i].sqrt() * g.amplitudes[i].conj() * mode_amplitude(space, psi, i);
    }
    Ok(2.0 * s.re)
}

pub fn expectations(
    ham: &Hamiltonian,
    space: &TensorSpace,
    state: &QuantumState,
) -> Expectations {
    let psi = &state.psi;
    let mut position = Vec::new();
    let mut momentum = Vec::new();
    let mut kinetic = Vec::new();
    for j in 0..space.n_particles {
        position.push(position_expectation(space, psi, j));
        let kpsi = ham.momentum(space, j, psi);
        let pj = real_inner(psi, &kpsi);
        momentum.push(pj);
        let apsi = ham.smeared_field(space, j, psi);
        kinetic.push(pj - state.hbar.sqrt() * real_inner(psi, &apsi));
    }
    Expectations {
        position,
        momentum,
        kinetic_momentum: kinetic,
        number: number_expectation(space, psi),
        energy: ham.energy(space, psi),
    }
}

/// Helper for moment tests and beta functionals: || (x - q) psi ||^2 summed
/// over particles.
pub fn position_variance_about(space: &TensorSpace, psi: &[Complex64], q: &[f64]) -> f64 {
    let f = space.basis.dim();
    let mut s = 0.0;
    for gidx in 0..space.grid_dim() {
        let off = gidx * f;
        let w: f64 = psi[off..off + f].iter().map(|z| z.norm_sqr()).sum();
        for j in 0..space.n_particles {
            let d = space.grid.points[space.grid_coord(gidx, j)] - q[j];
            s += d * d * w;
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_kernels::{Cutoff, CutoffFamily, ModeGrid};
    use crate::fock::basis::FockBasis;
    use crate::fock::grid::ParticleGrid;
    use crate::fock::hamiltonian::{assemble_hamiltonian, HamiltonianOpts};

    fn setup(hbar: f64) -> (Kernels, TensorSpace) {
        let cutoff = Cutoff::new(CutoffFamily::Sharp { lambda: 1.0 }, 0.5);
        let channels = vec![
            ([0.4, 0.2, 0.5], 0, 0.9),
            ([0.7, -0.3, 0.2], 1, 1.1),
        ];
        let kern = Kernels::new(ModeGrid::from_channels(channels), cutoff).unwrap();
        let grid = ParticleGrid::periodic(128, -6.0, 6.0).unwrap();
        let basis = FockBasis::new(2, 8).unwrap();
        let space = TensorSpace::new(grid, basis, 1).unwrap();
        let _ = hbar;
        (kern, space)
    }

    fn alpha0() -> ModeField {
        ModeField::new(vec![Complex64::new(0.10, 0.05), Complex64::new(-0.08, 0.12)])
    }

    #[test]
    fn gaussian_moments_match_oracles() {
        let hbar = 0.2;
        let (kern, space) = setup(hbar);
        let (state, _) =
            initial_state(&kern, &space, &[0.5], &[0.3], &alpha0(), hbar, 1e-6).unwrap();
        let ham = assemble_hamiltonian(&kern, &space, hbar, HamiltonianOpts::default()).unwrap();
        let ex = expectations(&ham, &space, &state);
        // Gaussian centering
        assert!((ex.position[0] - 0.5).abs() < 1e-8);
        assert!((ex.momentum[0] - 0.3).abs() < 1e-8);
        // position variance hbar/2 (per-axis, collinear)
        let var = position_variance_about(&space, &state.psi, &[0.5]);
        assert!((var - hbar / 2.0).abs() < 1e-8, "variance {var}");
        // momentum variance hbar/2: ||(-i hbar d - p0) psi||^2
        let kpsi = ham.momentum(&space, 0, &state.psi);
        let resid: f64 = kpsi
            .iter()
            .zip(&state.psi)
            .map(|(k, p)| (k - Complex64::new(0.3, 0.0) * p).norm_sqr())
            .sum();
        assert!((resid - hbar / 2.0).abs() < 1e-8, "momentum variance {resid}");
    }

    #[test]
    fn coherent_mode_amplitudes_match_alpha() {
        let hbar = 0.1;
        let (kern, space) = setup(hbar);
        let a0 = alpha0();
        let (state, leakage) =
            initial_state(&kern, &space, &[0.0], &[0.0], &a0, hbar, 1e-6).unwrap();
        for i in 0..2 {
            let b = mode_amplitude(&space, &state.psi, i);
            let expect = kern.grid.weight[i].sqrt() * a0.amplitudes[i] / hbar.sqrt();
            assert!(
                (b - expect).norm() < 100.0 * leakage + 1e-9,
                "mode {i}: {b} vs {expect}"
            );
        }
        // mean photons = ||f||^2 up to leakage
        let mean = number_expectation(&space, &state.psi);
        let expect: f64 = (0..2)
            .map(|i| kern.grid.weight[i] * a0.amplitudes[i].norm_sqr() / hbar)
            .sum();
        assert!((mean - expect).abs() < 1e-6 + 100.0 * leakage);
    }

    #[test]
    fn phi_expectation_matches_shifting_oracle() {
        let hbar = 0.2;
        let (kern, space) = setup(hbar);
        let a0 = alpha0();
        let (state, leakage) =
            initial_state(&kern, &space, &[0.0], &[0.0], &a0, hbar, 1e-6).unwrap();
        let g = ModeField::new(vec![Complex64::new(0.6, -0.2), Complex64::new(0.1, 0.9)]);
        // <W Omega| hbar^{1/2} Phi(g) |W Omega> = 2 Re <g, alpha>_w
        let phi = field_phi_expectation(&kern, &space, &state.psi, &g).unwrap();
        let oracle: f64 = 2.0
            * (0..2)
                .map(|i| {
                    kern.grid.weight[i] * (g.amplitudes[i].conj() * a0.amplitudes[i]).re
                })
                .sum::<f64>();
        assert!(
            (hbar.sqrt() * phi - oracle).abs() < 1e-6 + 100.0 * leakage,
            "{} vs {oracle}",
            hbar.sqrt() * phi
        );
    }

    #[test]
    fn gaussian_must_fit_the_grid() {
        let (kern, space) = setup(1.0);
        let res = initial_state(&kern, &space, &[5.9], &[0.0], &alpha0(), 1.0, 1e-6);
        assert!(res.is_err());
    }
}
