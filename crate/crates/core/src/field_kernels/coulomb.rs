use super::cutoff::Cutoff;
use super::norm3;
use crate::quadrature::gauss_legendre_on;

/// Smeared Coulomb potential V = kappa * kappa * 1/|x|, evaluated from the
/// radial Fourier representation F[V](k) = 4 pi |k|^{-2} |F[kappa](k)|^2:
///
///   V(rho)  = (2 pi)^{-3/2} (4 pi)^2 int_0^inf F(r)^2 j0(r rho) dr
///   V'(rho) = -(2 pi)^{-3/2} (4 pi)^2 int_0^inf F(r)^2 r j1(r rho) dr
///
/// with spherical Bessel kernels j0, j1. Radial, smooth at rho = 0.
#[derive(Debug, Clone)]
pub struct CoulombKernel {
    /// radial nodes r_i
    nodes: Vec<f64>,
    /// prefactor * w_i * F(r_i)^2
    coeff: Vec<f64>,
    hessian_bound: f64,
}

const PREF: f64 = 0.06349363593424097 * 157.91367041742973; // (2pi)^{-3/2} (4pi)^2

impl CoulombKernel {
    pub fn new(cutoff: &Cutoff) -> Self {
        Self::with_resolution(cutoff, 512)
    }

    /// `order` is the Gauss-Legendre order of the radial rule; tests use a
    /// 10x order as an independent oracle.
    pub fn with_resolution(cutoff: &Cutoff, order: usize) -> Self {
        let rmax = cutoff.radial_support().unwrap_or(64.0);
        let (nodes, weights) = gauss_legendre_on(order, 0.0, rmax);
        let coeff: Vec<f64> = nodes
            .iter()
            .zip(&weights)
            .map(|(&r, &w)| {
                let f = cutoff.profile(r);
                PREF * w * f * f
            })
            .collect();
        // |v . hess V(x) . v| <= (2pi)^{-3/2} 4 pi ||F[kappa]||_{L2}^2 for unit v,
        // i.e. the same radial sum with an extra r^2 under the integral
        let hessian_bound: f64 = nodes.iter().zip(&coeff).map(|(&r, &c)| c * r * r).sum();
        Self {
            nodes,
            coeff,
            hessian_bound,
        }
    }

    /// V and grad V at separation x.
    pub fn eval(&self, x: [f64; 3]) -> (f64, [f64; 3]) {
        let rho = norm3(x);
        let mut v = 0.0;
        let mut dv = 0.0; // V'(rho)
        for (&r, &c) in self.nodes.iter().zip(&self.coeff) {
            let z = r * rho;
            v += c * sph_j0(z);
            dv -= c * r * sph_j1(z);
        }
        let grad = if rho > 0.0 {
            [dv * x[0] / rho, dv * x[1] / rho, dv * x[2] / rho]
        } else {
            [0.0; 3]
        };
        (v, grad)
    }

    pub fn value(&self, x: [f64; 3]) -> f64 {
        self.eval(x).0
    }

    pub fn grad(&self, x: [f64; 3]) -> [f64; 3] {
        self.eval(x).1
    }

    /// Upper bound on the spectral norm of the Hessian of V; |grad V(x)| <= C |x|.
    pub fn hessian_bound(&self) -> f64 {
        self.hessian_bound
    }
}

/// j0(z) = sin(z)/z, with series fallback near zero.
pub fn sph_j0(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        let z2 = z * z;
        1.0 - z2 / 6.0 + z2 * z2 / 120.0
    } else {
        z.sin() / z
    }
}

/// j1(z) = sin(z)/z^2 - cos(z)/z, with series fallback near zero.
pub fn sph_j1(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        let z2 = z * z;
        z / 3.0 - z * z2 / 30.0
    } else {
        (z.sin() / z - z.cos()) / z
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_kernels::{Cutoff, CutoffFamily};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gradient_vanishes_at_origin() {
        let c = Cutoff::new(CutoffFamily::Sharp { lambda: 1.0 }, 0.5);
        let k = CoulombKernel::new(&c);
        let (_, g) = k.eval([0.0; 3]);
        assert_eq!(g, [0.0; 3]);
    }

    #[test]
    fn matches_high_resolution_oracle() {
        for cutoff in [
            Cutoff::new(CutoffFamily::Sharp { lambda: 1.0 }, 0.5),
            Cutoff::new(CutoffFamily::Gaussian { lambda: 1.0 }, 0.5),
        ] {
            let k = CoulombKernel::new(&cutoff);
            let oracle = CoulombKernel::with_resolution(&cutoff, 5120);
            for x in [[0.0; 3], [0.5, 0.0, 0.0], [1.0, -2.0, 0.5], [4.0, 4.0, 4.0]] {
                let (v, g) = k.eval(x);
                let (vo, go) = oracle.eval(x);
                assert!((v - vo).abs() < 1e-8, "{v} vs {vo}");
                for i in 0..3 {
                    assert!((g[i] - go[i]).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn even_potential_odd_gradient() {
        let cutoff = Cutoff::new(CutoffFamily::Gaussian { lambda: 1.0 }, 0.5);
        let k = CoulombKernel::new(&cutoff);
        let x = [0.7, -0.3, 1.1];
        let xm = [-0.7, 0.3, -1.1];
        let (v, g) = k.eval(x);
        let (vm, gm) = k.eval(xm);
        assert!((v - vm).abs() < 1e-12);
        for i in 0..3 {
            assert!((g[i] + gm[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn sup_v_bounded_by_weighted_cutoff_norm() {
        let cutoff = Cutoff::new(CutoffFamily::Sharp { lambda: 1.0 }, 0.5);
        let k = CoulombKernel::new(&cutoff);
        let i1 = cutoff.check_admissibility().unwrap().i1;
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let x = [
                rng.gen::<f64>() * 10.0 - 5.0,
                rng.gen::<f64>() * 10.0 - 5.0,
                rng.gen::<f64>() * 10.0 - 5.0,
            ];
            assert!(k.value(x).abs() <= i1 + 1e-12);
        }
    }

    #[test]
    fn gradient_growth_bounded_by_hessian() {
        let cutoff = Cutoff::new(CutoffFamily::Gaussian { lambda: 1.0 }, 0.5);
        let k = CoulombKernel::new(&cutoff);
        let c = k.hessian_bound();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..100 {
            let x = [
                rng.gen::<f64>() * 6.0 - 3.0,
                rng.gen::<f64>() * 6.0 - 3.0,
                rng.gen::<f64>() * 6.0 - 3.0,
            ];
            let g = k.grad(x);
            assert!(norm3(g) <= c * norm3(x) + 1e-12);
        }
    }
}
