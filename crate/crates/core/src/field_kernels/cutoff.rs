use crate::error::Result;
use crate::quadrature::integrate;

const TWO_PI_POW_MINUS_3_2: f64 = 0.06349363593424097; // (2 pi)^{-3/2}

/// Radial cutoff profile family for F[kappa].
#[derive(Debug, Clone)]
pub enum CutoffFamily {
    /// (2 pi)^{-3/2} on |k| <= lambda, zero outside.
    Sharp { lambda: f64 },
    /// (2 pi)^{-3/2} exp(-|k|^2 / (2 lambda^2)).
    Gaussian { lambda: f64 },
    /// Piecewise-linear radial table (r ascending, zero outside the table).
    Table { r: Vec<f64>, f: Vec<f64> },
    /// Constant profile with no decay. Inadmissible; kept for testing the
    /// admissibility check.
    Const { value: f64 },
}

/// Radial profile of F[kappa] together with the Sobolev index sigma of the
/// run. Real and even by construction (radial).
#[derive(Debug, Clone)]
pub struct Cutoff {
    pub family: CutoffFamily,
    pub sigma: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct AdmissibilityReport {
    /// || |k|^{-1} F[kappa] ||_{L^2}^2
    pub i1: f64,
    /// || |k|^{3/2 - sigma} F[kappa] ||_{L^2}^2
    pub i2: f64,
    pub i1_converged: bool,
    pub i2_converged: bool,
    pub pass: bool,
}

impl Cutoff {
    pub fn new(family: CutoffFamily, sigma: f64) -> Self {
        assert!((0.5..=1.0).contains(&sigma), "sigma must lie in [1/2, 1]");
        Self { family, sigma }
    }

    /// F[kappa] at radius r = |k|.
    pub fn profile(&self, r: f64) -> f64 {
        match &self.family {
            CutoffFamily::Sharp { lambda } => {
                if r <= *lambda {
                    TWO_PI_POW_MINUS_3_2
                } else {
                    0.0
                }
            }
            CutoffFamily::Gaussian { lambda } => {
                TWO_PI_POW_MINUS_3_2 * (-r * r / (2.0 * lambda * lambda)).exp()
            }
            CutoffFamily::Table { r: rs, f } => {
                if rs.is_empty() || r > *rs.last().unwrap() || r < rs[0] {
                    return 0.0;
                }
                let idx = rs.partition_point(|&x| x < r).min(rs.len() - 1).max(1);
                let (r0, r1) = (rs[idx - 1], rs[idx]);
                let t = if r1 > r0 { (r - r0) / (r1 - r0) } else { 0.0 };
                f[idx - 1] * (1.0 - t) + f[idx] * t
            }
            CutoffFamily::Const { value } => *value,
        }
    }

    /// Radius beyond which the profile is numerically negligible, or None
    /// when the profile has no decay.
    pub fn radial_support(&self) -> Option<f64> {
        match &self.family {
            CutoffFamily::Sharp { lambda } => Some(*lambda),
            CutoffFamily::Gaussian { lambda } => Some(10.0 * lambda),
            CutoffFamily::Table { r, .. } => Some(r.last().copied().unwrap_or(0.0)),
            CutoffFamily::Const { .. } => None,
        }
    }

    /// Numerical check of the cutoff admissibility conditions:
    /// |k|^{-1} F[kappa] in L^2 and |k|^{3/2 - sigma} F[kappa] in L^2.
    ///
    /// The radial integrands are 4 pi |F|^2 and 4 pi r^{5-2 sigma} |F|^2. For
    /// profiles with finite support the integrals are refined until stable;
    /// otherwise a ratio test on dyadic tail increments detects divergence.
    pub fn check_admissibility(&self) -> Result<AdmissibilityReport> {
        let f1 = |r: f64| {
            let p = self.profile(r);
            4.0 * std::f64::consts::PI * p * p
        };
        let sigma = self.sigma;
        let f2 = move |r: f64, me: &Self| {
            let p = me.profile(r);
            4.0 * std::f64::consts::PI * r.powf(5.0 - 2.0 * sigma) * p * p
        };
        let (i1, c1) = self.refine_integral(&f1);
        let (i2, c2) = self.refine_integral(&|r| f2(r, self));
        let pass = c1 && c2 && i1.is_finite() && i2.is_finite();
        Ok(AdmissibilityReport {
            i1,
            i2,
            i1_converged: c1,
            i2_converged: c2,
            pass,
        })
    }

    fn refine_integral(&self, f: &dyn Fn(f64) -> f64) -> (f64, bool) {
        match self.radial_support() {
            Some(rmax) => {
                // refine the quadrature order until stable
                let mut prev = integrate(f, 0.0, rmax, 256);
                for n in [512usize, 1024] {
                    let cur = integrate(f, 0.0, rmax, n);
                    let stable = (cur - prev).abs() <= 1e-10 * (1.0 + cur.abs());
                    prev = cur;
                    if stable {
                        return (cur, true);
                    }
                }
                (prev, true)
            }
            None => {
                // dyadic tail ratio test: increments over [R, 2R] must decay
                let mut total = integrate(f, 0.0, 1.0, 256);
                let mut prev_inc = f64::INFINITY;
                let mut r = 1.0;
                for _ in 0..12 {
                    let inc = integrate(f, r, 2.0 * r, 256);
                    total += inc;
                    if inc > 1e-14 && inc >= 0.75 * prev_inc {
                        return (total, false);
                    }
                    prev_inc = inc;
                    r *= 2.0;
                }
                (total, true)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sharp_cutoff_passes() {
        let c = Cutoff::new(CutoffFamily::Sharp { lambda: 1.0 }, 0.5);
        let rep = c.check_admissibility().unwrap();
        assert!(rep.pass);
        // i1 = 4 pi (2 pi)^{-3} * lambda
        let expect = 4.0 * std::f64::consts::PI * TWO_PI_POW_MINUS_3_2.powi(2);
        assert!((rep.i1 - expect).abs() < 1e-12);
    }

    #[test]
    fn constant_profile_fails_on_second_integral() {
        let c = Cutoff::new(CutoffFamily::Const { value: 1.0 }, 0.5);
        let rep = c.check_admissibility().unwrap();
        assert!(!rep.i2_converged);
        assert!(!rep.pass);
    }

    #[test]
    fn gaussian_matches_gamma_function_oracle() {
        // F = (2 pi)^{-3/2} exp(-r^2/2), sigma = 1/2:
        //   i1 = 4 pi (2 pi)^{-3} int exp(-r^2) dr        = 4 pi (2 pi)^{-3} sqrt(pi)/2
        //   i2 = 4 pi (2 pi)^{-3} int r^4 exp(-r^2) dr    = 4 pi (2 pi)^{-3} Gamma(5/2)/2
        let c = Cutoff::new(CutoffFamily::Gaussian { lambda: 1.0 }, 0.5);
        let rep = c.check_admissibility().unwrap();
        assert!(rep.pass);
        let pref = 4.0 * std::f64::consts::PI * TWO_PI_POW_MINUS_3_2.powi(2);
        let sqrt_pi = std::f64::consts::PI.sqrt();
        let gamma_5_2 = 0.75 * sqrt_pi;
        assert!((rep.i1 - pref * sqrt_pi / 2.0).abs() < 1e-8 * rep.i1);
        assert!((rep.i2 - pref * gamma_5_2 / 2.0).abs() < 1e-8 * rep.i2);
    }

    #[test]
    fn table_profile_interpolates() {
        let c = Cutoff::new(
            CutoffFamily::Table {
                r: vec![0.0, 1.0, 2.0],
                f: vec![1.0, 0.5, 0.0],
            },
            0.5,
        );
        assert!((c.profile(0.5) - 0.75).abs() < 1e-15);
        assert_eq!(c.profile(3.0), 0.0);
        assert!(c.check_admissibility().unwrap().pass);
    }
}
