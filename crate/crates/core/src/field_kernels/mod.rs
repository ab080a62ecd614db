//! Pure, stateless evaluation of the classical field quantities on a
//! configurable wave-vector quadrature: polarization bases, form factors,
//! smeared vector potential and electric field, Faraday tensor, smeared
//! Coulomb potential, and the weighted field norms.

mod coulomb;
mod cutoff;
mod field;
mod grid;

pub use coulomb::CoulombKernel;
pub use cutoff::{AdmissibilityReport, Cutoff, CutoffFamily};
pub use field::ModeField;
pub use grid::{polarization_basis, ModeGrid};

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Bundles a wave-vector quadrature with a cutoff profile and precomputes
/// the per-channel coupling prefactor F[kappa](k)/sqrt(2|k|).
#[derive(Debug, Clone)]
pub struct Kernels {
    pub grid: ModeGrid,
    pub cutoff: Cutoff,
    /// F[kappa](|k_c|)/sqrt(2 |k_c|) per channel.
    pub g_pref: Vec<f64>,
    /// |k_c| per channel.
    pub omega: Vec<f64>,
    coulomb: CoulombKernel,
}

impl Kernels {
    pub fn new(grid: ModeGrid, cutoff: Cutoff) -> Result<Self> {
        let report = cutoff.check_admissibility()?;
        if !report.pass {
            return Err(Error::InadmissibleCutoff(format!(
                "integrals i1={:.6e} (converged: {}), i2={:.6e} (converged: {})",
                report.i1, report.i1_converged, report.i2, report.i2_converged
            )));
        }
        let coulomb = CoulombKernel::new(&cutoff);
        let omega: Vec<f64> = grid.k.iter().map(|k| norm3(*k)).collect();
        let g_pref = omega
            .iter()
            .map(|&w| cutoff.profile(w) / (2.0 * w).sqrt())
            .collect();
        Ok(Self {
            grid,
            cutoff,
            g_pref,
            omega,
            coulomb,
        })
    }

    pub fn channels(&self) -> usize {
        self.grid.len()
    }

    /// Form factor G_x per channel, as a complex 3-vector:
    /// G_x(k, lambda) = F[kappa](k)/sqrt(2|k|) * eps_lambda(k) * exp(-i k.x).
    pub fn form_factor(&self, x: [f64; 3]) -> Vec<[Complex64; 3]> {
        (0..self.channels())
            .map(|c| {
                let k = self.grid.k[c];
                let phase = Complex64::from_polar(1.0, -(dot3(k, x)));
                let s = self.g_pref[c] * phase;
                let e = self.grid.pol[c];
                [s * e[0], s * e[1], s * e[2]]
            })
            .collect()
    }

    /// Single cartesian component of the form factor.
    pub fn form_factor_component(&self, x: [f64; 3], axis: usize) -> Vec<Complex64> {
        (0..self.channels())
            .map(|c| {
                let k = self.grid.k[c];
                let phase = Complex64::from_polar(1.0, -(dot3(k, x)));
                self.g_pref[c] * phase * self.grid.pol[c][axis]
            })
            .collect()
    }

    fn check_field(&self, alpha: &ModeField) -> Result<()> {
        if alpha.len() != self.channels() {
            return Err(Error::GridMismatch(format!(
                "field has {} channels, grid has {}",
                alpha.len(),
                self.channels()
            )));
        }
        Ok(())
    }

    /// Regularized vector potential A_alpha(x) = kappa * A(x):
    /// 2 Re sum_c w_c F(k)/sqrt(2|k|) eps_c exp(i k.x) alpha_c.
    pub fn eval_a(&self, alpha: &ModeField, x: [f64; 3]) -> Result<[f64; 3]> {
        self.check_field(alpha)?;
        let mut out = [0.0; 3];
        for c in 0..self.channels() {
            let k = self.grid.k[c];
            let z = Complex64::from_polar(1.0, dot3(k, x)) * alpha.amplitudes[c];
            let re = 2.0 * self.grid.weight[c] * self.g_pref[c] * z.re;
            let e = self.grid.pol[c];
            out[0] += re * e[0];
            out[1] += re * e[1];
            out[2] += re * e[2];
        }
        Ok(out)
    }

    /// Regularized electric field E_alpha(x) = kappa * E(x):
    /// 2 Re sum_c i w_c sqrt(|k|/2) F(k) eps_c exp(i k.x) alpha_c.
    pub fn eval_e(&self, alpha: &ModeField, x: [f64; 3]) -> Result<[f64; 3]> {
        self.check_field(alpha)?;
        let mut out = [0.0; 3];
        for c in 0..self.channels() {
            let k = self.grid.k[c];
            let z = Complex64::from_polar(1.0, dot3(k, x)) * alpha.amplitudes[c];
            // i z has real part -Im z
            let re = -2.0 * self.grid.weight[c] * self.omega[c] * self.g_pref[c] * z.im;
            let e = self.grid.pol[c];
            out[0] += re * e[0];
            out[1] += re * e[1];
            out[2] += re * e[2];
        }
        Ok(out)
    }

    /// Jacobian J[l][m] = d_m A^l_alpha(x) by quadrature of the
    /// differentiated integrand (factor i k_m).
    pub fn eval_a_jacobian(&self, alpha: &ModeField, x: [f64; 3]) -> Result<[[f64; 3]; 3]> {
        self.check_field(alpha)?;
        let mut j = [[0.0; 3]; 3];
        for c in 0..self.channels() {
            let k = self.grid.k[c];
            let z = Complex64::from_polar(1.0, dot3(k, x)) * alpha.amplitudes[c];
            // derivative brings down i k_m: Re(i k_m z) = -k_m Im z
            let base = -2.0 * self.grid.weight[c] * self.g_pref[c] * z.im;
            let e = self.grid.pol[c];
            for l in 0..3 {
                for m in 0..3 {
                    j[l][m] += base * e[l] * k[m];
                }
            }
        }
        Ok(j)
    }

    /// Classical Faraday tensor F^{lm} = d_m A^l - d_l A^m. Antisymmetric by
    /// construction.
    pub fn eval_faraday(&self, alpha: &ModeField, x: [f64; 3]) -> Result<[[f64; 3]; 3]> {
        let j = self.eval_a_jacobian(alpha, x)?;
        let mut f = [[0.0; 3]; 3];
        for l in 0..3 {
            for m in 0..3 {
                f[l][m] = j[l][m] - j[m][l];
            }
        }
        Ok(f)
    }

    /// Smeared Coulomb potential and its gradient at separation r.
    pub fn coulomb(&self, r: [f64; 3]) -> (f64, [f64; 3]) {
        self.coulomb.eval(r)
    }

    pub fn coulomb_kernel(&self) -> &CoulombKernel {
        &self.coulomb
    }

    /// Weighted field norm: sqrt(sum_c w_c (1+|k|^2)^sigma |alpha_c|^2),
    /// or the |k|^{2 sigma} weight if `homogeneous`.
    pub fn norm_h_sigma(&self, alpha: &ModeField, sigma: f64, homogeneous: bool) -> f64 {
        let mut s = 0.0;
        for c in 0..alpha.len() {
            let k2 = self.omega[c] * self.omega[c];
            let w = if homogeneous {
                k2.powf(sigma)
            } else {
                (1.0 + k2).powf(sigma)
            };
            s += self.grid.weight[c] * w * alpha.amplitudes[c].norm_sqr();
        }
        s.sqrt()
    }

    /// ||G_x||_{h^sigma}^2 on the grid.
    pub fn form_factor_norm_sq(&self, x: [f64; 3], sigma: f64) -> f64 {
        let g = self.form_factor(x);
        let mut s = 0.0;
        for c in 0..self.channels() {
            let k2 = self.omega[c] * self.omega[c];
            let n2: f64 = g[c].iter().map(|z| z.norm_sqr()).sum();
            s += self.grid.weight[c] * (1.0 + k2).powf(sigma) * n2;
        }
        s
    }
}

pub(crate) fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn norm3(a: [f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}

pub(crate) fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn test_kernels() -> Kernels {
        let cutoff = Cutoff::new(CutoffFamily::Sharp { lambda: 1.0 }, 0.5);
        let grid = ModeGrid::product_rule(12, 6, 8, 1.0);
        Kernels::new(grid, cutoff).unwrap()
    }

    fn random_field(k: &Kernels, rng: &mut impl Rng) -> ModeField {
        ModeField::new(
            (0..k.channels())
                .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect(),
        )
    }

    #[test]
    fn zero_field_gives_zero_potentials() {
        let k = test_kernels();
        let alpha = ModeField::zeros(k.channels());
        let a = k.eval_a(&alpha, [0.3, -0.2, 1.0]).unwrap();
        let e = k.eval_e(&alpha, [0.3, -0.2, 1.0]).unwrap();
        assert_eq!(a, [0.0; 3]);
        assert_eq!(e, [0.0; 3]);
    }

    #[test]
    fn form_factor_modulus_independent_of_x() {
        let k = test_kernels();
        let g0 = k.form_factor([0.0; 3]);
        let g1 = k.form_factor([1.3, -0.4, 0.7]);
        for c in 0..k.channels() {
            let n0: f64 = g0[c].iter().map(|z| z.norm_sqr()).sum();
            let n1: f64 = g1[c].iter().map(|z| z.norm_sqr()).sum();
            assert!((n0 - n1).abs() < 1e-14);
        }
    }

    #[test]
    fn form_factor_real_at_origin() {
        let k = test_kernels();
        for v in k.form_factor([0.0; 3]) {
            for z in v {
                assert!(z.im.abs() < 1e-15);
            }
        }
    }

    #[test]
    fn quadrature_divergence_vanishes_per_channel() {
        // k . eps = 0 exactly, so the k-space divergence of A is zero per node
        let k = test_kernels();
        for c in 0..k.channels() {
            assert!(dot3(k.grid.k[c], k.grid.pol[c]).abs() < 1e-12);
        }
    }

    #[test]
    fn faraday_is_antisymmetric_and_matches_finite_differences() {
        let kern = test_kernels();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let alpha = random_field(&kern, &mut rng);
        let x = [0.4, -0.6, 0.2];
        let f = kern.eval_faraday(&alpha, x).unwrap();
        for l in 0..3 {
            for m in 0..3 {
                assert_eq!(f[l][m], -f[m][l]);
            }
        }
        // finite-difference oracle with h-refinement: error drops ~4x per halving
        let fd = |h: f64| -> f64 {
            let mut worst: f64 = 0.0;
            for l in 0..3 {
                for m in 0..3 {
                    let mut xp = x;
                    let mut xm = x;
                    xp[m] += h;
                    xm[m] -= h;
                    let dp = kern.eval_a(&alpha, xp).unwrap()[l];
                    let dm = kern.eval_a(&alpha, xm).unwrap()[l];
                    let dmda = (dp - dm) / (2.0 * h);
                    let mut yp = x;
                    let mut ym = x;
                    yp[l] += h;
                    ym[l] -= h;
                    let ep = kern.eval_a(&alpha, yp).unwrap()[m];
                    let em = kern.eval_a(&alpha, ym).unwrap()[m];
                    let dldm = (ep - em) / (2.0 * h);
                    worst = worst.max((f[l][m] - (dmda - dldm)).abs());
                }
            }
            worst
        };
        let e1 = fd(1e-2);
        let e2 = fd(5e-3);
        assert!(e1 / e2 > 3.0, "order-2 convergence expected: {e1} vs {e2}");
        assert!(e2 < 1e-5);
    }

    #[test]
    fn electric_field_is_minus_time_derivative_of_a_under_free_flow() {
        let kern = test_kernels();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let alpha0 = random_field(&kern, &mut rng);
        let x = [0.1, 0.2, -0.3];
        let rotate = |t: f64| -> ModeField {
            ModeField::new(
                (0..kern.channels())
                    .map(|c| alpha0.amplitudes[c] * Complex64::from_polar(1.0, -kern.omega[c] * t))
                    .collect(),
            )
        };
        let check = |dt: f64| -> f64 {
            let ap = kern.eval_a(&rotate(dt), x).unwrap();
            let am = kern.eval_a(&rotate(-dt), x).unwrap();
            let e = kern.eval_e(&alpha0, x).unwrap();
            (0..3)
                .map(|i| (e[i] + (ap[i] - am[i]) / (2.0 * dt)).abs())
                .fold(0.0, f64::max)
        };
        let e1 = check(1e-2);
        let e2 = check(5e-3);
        assert!(e1 / e2 > 3.0);
        assert!(e2 < 1e-5);
    }

    #[test]
    fn a_sup_bound_from_field_norms() {
        // ||A_alpha||_inf <= C ||1/|k| F||_L2 ||alpha||_{hdot 1/2} with C = sqrt(2)/pi... ;
        // we check the clean quadrature version with Cauchy-Schwarz constant 2.
        let kern = test_kernels();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let i1 = kern.cutoff.check_admissibility().unwrap().i1;
        for _ in 0..20 {
            let alpha = random_field(&kern, &mut rng);
            let nrm = kern.norm_h_sigma(&alpha, 0.5, true);
            let x = [
                rng.gen::<f64>() * 4.0 - 2.0,
                rng.gen::<f64>() * 4.0 - 2.0,
                rng.gen::<f64>() * 4.0 - 2.0,
            ];
            let a = kern.eval_a(&alpha, x).unwrap();
            let amax = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            // 2 Re sum w g eps e^{ikx} alpha <= 2 ||1/sqrt(2|k|) F||_{L2,w} ||alpha||_{hdot 0}
            // and sharper: sqrt(2) ||1/|k| F||^{1/2}-type; use the generous constant 2.
            assert!(amax <= 2.0 * i1.sqrt() * nrm + 1e-12);
        }
    }

    #[test]
    fn norm_h_sigma_examples() {
        let grid = ModeGrid::from_channels(vec![([0.0, 0.0, 1.0], 0, 1.0), ([0.0, 0.0, 1.0], 1, 1.0)]);
        let cutoff = Cutoff::new(CutoffFamily::Sharp { lambda: 2.0 }, 0.5);
        let kern = Kernels::new(grid, cutoff).unwrap();
        // one polarization populated: sqrt((1+1)^1 * 1) = sqrt(2)
        let alpha = ModeField::new(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
        assert!((kern.norm_h_sigma(&alpha, 1.0, false) - 2.0f64.sqrt()).abs() < 1e-14);
        // sigma = 0: homogeneous and inhomogeneous agree
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let beta = random_field(&kern, &mut rng);
        let a = kern.norm_h_sigma(&beta, 0.0, true);
        let b = kern.norm_h_sigma(&beta, 0.0, false);
        assert!((a - b).abs() < 1e-14);
        // monotone in sigma when all |k| >= 1
        let n1 = kern.norm_h_sigma(&beta, 0.25, false);
        let n2 = kern.norm_h_sigma(&beta, 0.75, false);
        assert!(n2 >= n1);
    }
}
