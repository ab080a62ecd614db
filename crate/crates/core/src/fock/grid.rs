//! Collinear particle grid and spectral derivative matrices.

use crate::error::{Error, Result};
use nalgebra::DMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeScheme {
    Spectral,
    CentralDifference,
}

#[derive(Debug, Clone)]
pub struct ParticleGrid {
    pub g: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub h: f64,
    pub periodic: bool,
    pub points: Vec<f64>,
}

impl ParticleGrid {
    /// Periodic grid of G points on [x_min, x_max); spacing h = L/G.
    pub fn periodic(g: usize, x_min: f64, x_max: f64) -> Result<Self> {
        if g < 8 {
            return Err(Error::Domain(format!("grid needs G >= 8, got {g}")));
        }
        if !(x_max > x_min) {
            return Err(Error::Domain("grid extent must be nonempty".into()));
        }
        let h = (x_max - x_min) / g as f64;
        let points = (0..g).map(|i| x_min + i as f64 * h).collect();
        Ok(Self { g, x_min, x_max, h, periodic: true, points })
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    /// First-derivative matrix. Spectral scheme: the standard periodic
    /// differentiation matrix (exact on resolved Fourier modes, even G);
    /// central differences as the optional fallback. Both are antisymmetric,
    /// so -i hbar D1 is Hermitian.
    pub fn d1(&self, scheme: DerivativeScheme) -> Result<DMatrix<f64>> {
        let g = self.g;
        let mut d = DMatrix::zeros(g, g);
        match scheme {
            DerivativeScheme::Spectral => {
                if g % 2 != 0 {
                    return Err(Error::Domain("spectral derivative needs even G".into()));
                }
                let scale = std::f64::consts::PI / self.length();
                for j in 0..g {
                    for l in 0..g {
                        if j == l {
                            continue;
                        }
                        let diff = j as isize - l as isize;
                        let sign = if diff.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                        let arg = std::f64::consts::PI * diff as f64 / g as f64;
                        d[(j, l)] = scale * sign / arg.tan();
                    }
                }
            }
            DerivativeScheme::CentralDifference => {
                let c = 1.0 / (2.0 * self.h);
                for j in 0..g {
                    d[(j, (j + 1) % g)] = c;
                    d[(j, (j + g - 1) % g)] = -c;
                }
            }
        }
        Ok(d)
    }

    /// Second-derivative matrix, defined as D1*D1 so that the kinetic term
    /// (-i hbar D1)^2 = -hbar^2 D2 is Hermitian PSD by construction.
    pub fn d2(&self, scheme: DerivativeScheme) -> Result<DMatrix<f64>> {
        let d1 = self.d1(scheme)?;
        Ok(&d1 * &d1)
    }
}
