use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre_on;

use super::{cross3, dot3, norm3};

/// Polarization pair for a wave-vector, implementing the Coulomb gauge:
/// {eps1, eps2, k/|k|} is a right-handed orthonormal triple.
///
/// Convention: eps1 = (z x k_hat)/|z x k_hat| (falling back to e_x when k is
/// parallel to the z axis), eps2 = k_hat x eps1. Deterministic in k.
pub fn polarization_basis(k: [f64; 3]) -> Result<([f64; 3], [f64; 3])> {
    let n = norm3(k);
    if n == 0.0 {
        return Err(Error::Domain("polarization basis of zero wave-vector".into()));
    }
    let khat = [k[0] / n, k[1] / n, k[2] / n];
    let zxk = cross3([0.0, 0.0, 1.0], khat);
    let m = norm3(zxk);
    let e1 = if m < 1e-8 {
        [1.0, 0.0, 0.0]
    } else {
        [zxk[0] / m, zxk[1] / m, zxk[2] / m]
    };
    let e2 = cross3(khat, e1);
    Ok((e1, e2))
}

/// Finite quadrature discretization of wave-vector space R^3 x {1,2}.
///
/// Channels are flattened (node, polarization) pairs: `k[c]` is the
/// wave-vector, `pol[c]` the polarization unit vector, `weight[c]` the
/// quadrature weight in k-space. Product grids carry two channels per node.
#[derive(Debug, Clone)]
pub struct ModeGrid {
    pub k: Vec<[f64; 3]>,
    pub pol: Vec<[f64; 3]>,
    pub weight: Vec<f64>,
}

impl ModeGrid {
    pub fn len(&self) -> usize {
        self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }

    /// Product rule: Gauss-Legendre radial nodes on (0, k_max], Gauss-Legendre
    /// in cos(theta), uniform in phi. The origin is excluded, so 1/|k|
    /// factors stay finite.
    pub fn product_rule(
        radial_order: usize,
        theta_order: usize,
        phi_order: usize,
        k_max: f64,
    ) -> Self {
        assert!(k_max > 0.0 && radial_order >= 1 && theta_order >= 1 && phi_order >= 1);
        let (r_nodes, r_weights) = gauss_legendre_on(radial_order, 0.0, k_max);
        let (c_nodes, c_weights) = gauss_legendre_on(theta_order, -1.0, 1.0);
        let dphi = 2.0 * std::f64::consts::PI / phi_order as f64;
        let mut k = Vec::new();
        let mut pol = Vec::new();
        let mut weight = Vec::new();
        for (ri, (&r, &wr)) in r_nodes.iter().zip(&r_weights).enumerate() {
            let _ = ri;
            for (&ct, &wc) in c_nodes.iter().zip(&c_weights) {
                let st = (1.0 - ct * ct).sqrt();
                for j in 0..phi_order {
                    let phi = dphi * j as f64;
                    let kv = [r * st * phi.cos(), r * st * phi.sin(), r * ct];
                    let (e1, e2) = polarization_basis(kv).expect("nonzero node");
                    let w = r * r * wr * wc * dphi;
                    k.push(kv);
                    pol.push(e1);
                    weight.push(w);
                    k.push(kv);
                    pol.push(e2);
                    weight.push(w);
                }
            }
        }
        let grid = Self { k, pol, weight };
        grid.validate().expect("product grid satisfies invariants");
        grid
    }

    /// Explicit channel list: (wave-vector, polarization index in {0,1},
    /// quadrature weight). Used for the kept-mode reduction of quantum runs.
    pub fn from_channels(channels: Vec<([f64; 3], usize, f64)>) -> Self {
        let mut k = Vec::new();
        let mut pol = Vec::new();
        let mut weight = Vec::new();
        for (kv, lambda, w) in channels {
            let (e1, e2) = polarization_basis(kv).expect("nonzero kept mode");
            k.push(kv);
            pol.push(if lambda == 0 { e1 } else { e2 });
            weight.push(w);
        }
        Self { k, pol, weight }
    }

    pub fn validate(&self) -> Result<()> {
        for c in 0..self.len() {
            let n = norm3(self.k[c]);
            if n == 0.0 {
                return Err(Error::Domain("grid contains the origin".into()));
            }
            if self.weight[c] <= 0.0 {
                return Err(Error::Domain("nonpositive quadrature weight".into()));
            }
            if dot3(self.k[c], self.pol[c]).abs() > 1e-12 * n {
                return Err(Error::Domain("polarization not transverse".into()));
            }
            if (norm3(self.pol[c]) - 1.0).abs() > 1e-12 {
                return Err(Error::Domain("polarization not unit".into()));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn convention_examples() {
        let (e1, e2) = polarization_basis([1.0, 0.0, 0.0]).unwrap();
        assert!(norm3([e1[0], e1[1] - 1.0, e1[2]]) < 1e-15);
        assert!(norm3([e2[0], e2[1], e2[2] - 1.0]) < 1e-15);
        let (e1, e2) = polarization_basis([0.0, 0.0, 1.0]).unwrap();
        assert_eq!(e1, [1.0, 0.0, 0.0]);
        assert_eq!(e2, [0.0, 1.0, 0.0]);
    }

    #[test]
    fn zero_wave_vector_is_a_domain_error() {
        assert!(polarization_basis([0.0; 3]).is_err());
    }

    #[test]
    fn completeness_relation_on_random_wave_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..1000 {
            let k = [
                rng.gen::<f64>() * 4.0 - 2.0,
                rng.gen::<f64>() * 4.0 - 2.0,
                rng.gen::<f64>() * 4.0 - 2.0,
            ];
            if norm3(k) < 1e-3 {
                continue;
            }
            let (e1, e2) = polarization_basis(k).unwrap();
            let n2 = dot3(k, k);
            for m in 0..3 {
                for l in 0..3 {
                    let lhs = e1[m] * e1[l] + e2[m] * e2[l];
                    let rhs = if m == l { 1.0 } else { 0.0 } - k[m] * k[l] / n2;
                    assert!((lhs - rhs).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn triple_is_right_handed_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let k = [
                rng.gen::<f64>() - 0.5,
                rng.gen::<f64>() - 0.5,
                rng.gen::<f64>() - 0.5,
            ];
            if norm3(k) < 1e-3 {
                continue;
            }
            let (e1, e2) = polarization_basis(k).unwrap();
            let khat = {
                let n = norm3(k);
                [k[0] / n, k[1] / n, k[2] / n]
            };
            assert!(dot3(e1, e2).abs() < 1e-12);
            assert!(dot3(e1, khat).abs() < 1e-12);
            assert!(dot3(e2, khat).abs() < 1e-12);
            let c = cross3(e1, e2);
            assert!(norm3([c[0] - khat[0], c[1] - khat[1], c[2] - khat[2]]) < 1e-12);
        }
    }

    #[test]
    fn product_rule_integrates_radial_functions() {
        // sum w f(|k|) should reproduce 4 pi int r^2 f(r) dr (per polarization)
        let grid = ModeGrid::product_rule(16, 8, 12, 2.0);
        let quad: f64 = (0..grid.len())
            .step_by(2) // one polarization only
            .map(|c| grid.weight[c] * (-norm3(grid.k[c])).exp())
            .sum();
        let exact = 4.0
            * std::f64::consts::PI
            * crate::quadrature::integrate(|r| r * r * (-r).exp(), 0.0, 2.0, 64);
        assert!((quad - exact).abs() < 1e-10, "{quad} vs {exact}");
    }
}
