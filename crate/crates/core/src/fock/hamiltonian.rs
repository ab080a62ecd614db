//! Collinear Pauli-Fierz Hamiltonian on the particle-grid x Fock tensor.
//!
//! H = sum_j (-i hbar d_1,j - hbar^{1/2} A^1(x_j))^2 + sum_{j<k} V(x_j - x_k)
//!     + hbar H_f
//!
//! applied matrix-free: derivative matrices act along the particle axes, the
//! smeared field operator A^1(x) = sum_i sqrt(w_i) (conj(G^1_x,i) b_i
//! + G^1_x,i b_i*) acts on the Fock fiber with coefficients cached per grid
//! point. Wave-vectors of kept modes stay genuine 3-vectors; only the e_1
//! component of the field couples.

use crate::error::{Error, Result};
use crate::field_kernels::Kernels;
use crate::fock::basis::FockBasis;
use crate::fock::grid::{DerivativeScheme, ParticleGrid};
use nalgebra::DMatrix;
use num_complex::Complex64;

pub const DIMENSION_CAP: usize = 5_000_000;

/// Particle-grid x Fock tensor space with Fock index fastest and particle 1
/// slowest: idx = (g_1 G + g_2 ...) F + n.
#[derive(Debug, Clone)]
pub struct TensorSpace {
    pub grid: ParticleGrid,
    pub basis: FockBasis,
    pub n_particles: usize,
}

impl TensorSpace {
    pub fn new(grid: ParticleGrid, basis: FockBasis, n_particles: usize) -> Result<Self> {
        if !(1..=2).contains(&n_particles) {
            return Err(Error::Domain("particle number must be 1 or 2".into()));
        }
        let space = Self { grid, basis, n_particles };
        let dim = space.dim();
        if dim > DIMENSION_CAP {
            return Err(Error::DimensionOverflow(dim, DIMENSION_CAP));
        }
        Ok(space)
    }

    pub fn grid_dim(&self) -> usize {
        self.grid.g.pow(self.n_particles as u32)
    }

    pub fn dim(&self) -> usize {
        self.grid_dim() * self.basis.dim()
    }

    /// Grid coordinate of particle `j` in flat grid-block index `gidx`.
    pub fn grid_coord(&self, gidx: usize, j: usize) -> usize {
        if self.n_particles == 1 {
            gidx
        } else if j == 0 {
            gidx / self.grid.g
        } else {
            gidx % self.grid.g
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct HamiltonianOpts {
    pub coupling_on: bool,
    pub v_on: bool,
    pub scheme: DerivativeScheme,
}

impl Default for HamiltonianOpts {
    fn default() -> Self {
        Self { coupling_on: true, v_on: true, scheme: DerivativeScheme::Spectral }
    }
}

#[derive(Debug, Clone)]
pub struct Hamiltonian {
    pub hbar: f64,
    pub opts: HamiltonianOpts,
    d1: DMatrix<f64>,
    /// D2 = D1 D1 so the kinetic term is Hermitian PSD by construction
    d2: DMatrix<f64>,
    /// coupling[g][i] = sqrt(w_i) G^1_{x_g}(k_i, lambda_i)
    coupling: Vec<Vec<Complex64>>,
    hf_diag: Vec<f64>,
    /// pair potential V(x_{g1} - x_{g2}) per grid block, N = 2 only
    v_pair: Option<Vec<f64>>,
}

pub fn assemble_hamiltonian(
    kern: &Kernels,
    space: &TensorSpace,
    hbar: f64,
    opts: HamiltonianOpts,
) -> Result<Hamiltonian> {
    if hbar <= 0.0 {
        return Err(Error::Domain("hbar must be positive".into()));
    }
    if kern.channels() != space.basis.m {
        return Err(Error::GridMismatch(format!(
            "kernel has {} channels but basis has {} modes",
            kern.channels(),
            space.basis.m
        )));
    }
    let d1 = space.grid.d1(opts.scheme)?;
    let d2 = space.grid.d2(opts.scheme)?;
    let mut coupling = Vec::with_capacity(space.grid.g);
    for &x in &space.grid.points {
        let ff = kern.form_factor([x, 0.0, 0.0]);
        let row = (0..kern.channels())
            .map(|i| kern.grid.weight[i].sqrt() * ff[i][0])
            .collect();
        coupling.push(row);
    }
    let hf_diag = space.basis.field_energy_diagonal(&kern.omega)?;
    let v_pair = if space.n_particles == 2 && opts.v_on {
        let g = space.grid.g;
        let mut v = vec![0.0; g * g];
        for g1 in 0..g {
            for g2 in 0..g {
                let sep = space.grid.points[g1] - space.grid.points[g2];
                v[g1 * g + g2] = kern.coulomb([sep, 0.0, 0.0]).0;
            }
        }
        Some(v)
    } else {
        None
    };
    Ok(Hamiltonian { hbar, opts, d1, d2, coupling, hf_diag, v_pair })
}

impl Hamiltonian {
    /// dst += scale * (M along particle axis j) src, M a real grid matrix.
    fn apply_grid_matrix(
        &self,
        space: &TensorSpace,
        mat: &DMatrix<f64>,
        j: usize,
        scale: Complex64,
        src: &[Complex64],
        dst: &mut [Complex64],
    ) {
        let g = space.grid.g;
        let f = space.basis.dim();
        match (space.n_particles, j) {
            (1, _) => {
                for r in 0..g {
                    for c in 0..g {
                        let m = mat[(r, c)];
                        if m == 0.0 {
                            continue;
                        }
                        let sm = scale * m;
                        let (ro, co) = (r * f, c * f);
                        for n in 0..f {
                            dst[ro + n] += sm * src[co + n];
                        }
                    }
                }
            }
            (2, 0) => {
                for r in 0..g {
                    for c in 0..g {
                        let m = mat[(r, c)];
                        if m == 0.0 {
                            continue;
                        }
                        let sm = scale * m;
                        for g2 in 0..g {
                            let (ro, co) = ((r * g + g2) * f, (c * g + g2) * f);
                            for n in 0..f {
                                dst[ro + n] += sm * src[co + n];
                            }
                        }
                    }
                }
            }
            _ => {
                for g1 in 0..g {
                    for r in 0..g {
                        for c in 0..g {
                            let m = mat[(r, c)];
                            if m == 0.0 {
                                continue;
                            }
                            let sm = scale * m;
                            let (ro, co) = ((g1 * g + r) * f, (g1 * g + c) * f);
                            for n in 0..f {
                                dst[ro + n] += sm * src[co + n];
                            }
                        }
                    }
                }
            }
        }
    }

    /// dst += scale * A^1(x_j) src.
    fn apply_field(
        &self,
        space: &TensorSpace,
        j: usize,
        scale: Complex64,
        src: &[Complex64],
        dst: &mut [Complex64],
    ) {
        let f = space.basis.dim();
        let basis = &space.basis;
        for gidx in 0..space.grid_dim() {
            let gj = space.grid_coord(gidx, j);
            let row = &self.coupling[gj];
            let off = gidx * f;
            for (mode, &c) in row.iter().enumerate() {
                let s = basis.stride(mode);
                let cap = basis.n_max;
                let ann = scale * c.conj();
                let cre = scale * c;
                for idx in 0..f {
                    let n = basis.occupancy(idx, mode);
                    if n < cap {
                        dst[off + idx] += ann * ((n + 1) as f64).sqrt() * src[off + idx + s];
                    }
                    if n > 0 {
                        dst[off + idx] += cre * (n as f64).sqrt() * src[off + idx - s];
                    }
                }
            }
        }
    }

    /// K_j psi = -i hbar d_1 along particle j.
    pub fn momentum(&self, space: &TensorSpace, j: usize, psi: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); psi.len()];
        self.apply_grid_matrix(space, &self.d1, j, -Complex64::i() * self.hbar, psi, &mut out);
        out
    }

    /// A^1(x_j) psi (unit prefactor; callers scale by hbar^{1/2}).
    pub fn smeared_field(&self, space: &TensorSpace, j: usize, psi: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); psi.len()];
        self.apply_field(space, j, Complex64::new(1.0, 0.0), psi, &mut out);
        out
    }

    /// Cached sqrt(w_i) G^1_{x_g} coupling row at grid point g.
    pub fn coupling_row(&self, g: usize) -> &[Complex64] {
        &self.coupling[g]
    }

    pub fn apply(&self, space: &TensorSpace, psi: &[Complex64], out: &mut [Complex64]) {
        let f = space.basis.dim();
        let one = Complex64::new(1.0, 0.0);
        let hbar = self.hbar;
        out.fill(Complex64::new(0.0, 0.0));
        // hbar H_f (+ V for two particles): diagonal
        for gidx in 0..space.grid_dim() {
            let v = self.v_pair.as_ref().map_or(0.0, |v| v[gidx]);
            let off = gidx * f;
            for n in 0..f {
                out[off + n] += (hbar * self.hf_diag[n] + v) * psi[off + n];
            }
        }
        for j in 0..space.n_particles {
            // kinetic -hbar^2 D2
            self.apply_grid_matrix(space, &self.d2, j, Complex64::new(-hbar * hbar, 0.0), psi, out);
            if self.opts.coupling_on {
                // cross term -hbar^{1/2} (K A + A K) and hbar A^2
                let s = hbar.sqrt();
                let apsi = self.smeared_field(space, j, psi);
                self.apply_grid_matrix(space, &self.d1, j, Complex64::i() * hbar * s, &apsi, out);
                let kpsi = self.momentum(space, j, psi);
                self.apply_field(space, j, Complex64::new(-s, 0.0), &kpsi, out);
                let aapsi = self.smeared_field(space, j, &apsi);
                for (o, z) in out.iter_mut().zip(&aapsi) {
                    *o += hbar * z * one;
                }
            }
        }
    }

    /// Dense realization by matvec columns; test/diagnostic use only.
    pub fn to_dense(&self, space: &TensorSpace) -> DMatrix<Complex64> {
        let dim = space.dim();
        let mut h = DMatrix::zeros(dim, dim);
        let mut e = vec![Complex64::new(0.0, 0.0); dim];
        let mut col = vec![Complex64::new(0.0, 0.0); dim];
        for c in 0..dim {
            e[c] = Complex64::new(1.0, 0.0);
            self.apply(space, &e, &mut col);
            for r in 0..dim {
                h[(r, c)] = col[r];
            }
            e[c] = Complex64::new(0.0, 0.0);
        }
        h
    }

    pub fn energy(&self, space: &TensorSpace, psi: &[Complex64]) -> f64 {
        let mut hpsi = vec![Complex64::new(0.0, 0.0); psi.len()];
        self.apply(space, psi, &mut hpsi);
        psi.iter().zip(&hpsi).map(|(a, b)| (a.conj() * b).re).sum()
    }
}
