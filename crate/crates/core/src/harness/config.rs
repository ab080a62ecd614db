//! Flat key-value run configuration with [section] headers.
//!
//! The format is deliberately plain so scientific runs stay auditable:
//! `key = value` lines grouped under `[cutoff]`, `[modes]`, `[particles]`,
//! `[field]`, `[quantum]`, and `[run]`. Unknown keys are rejected and every
//! parse error carries its line number. See configs/ for documented examples.

use crate::classical::Scheme;
use crate::error::{Error, Result};
use crate::fock::DerivativeScheme;
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone)]
pub struct CutoffSpec {
    pub family: String,
    pub lambda: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone)]
pub enum GridSpec {
    /// product quadrature over the ball |k| <= k_max (classical runs)
    Product { radial: usize, costheta: usize, phi: usize, k_max: f64 },
    /// explicit kept modes (quantum runs): (k, polarization, weight)
    Explicit(Vec<([f64; 3], usize, f64)>),
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub cutoff: CutoffSpec,
    pub grid: GridSpec,
    pub n_particles: usize,
    /// collinear positions/momenta along e_1
    pub q0: Vec<f64>,
    pub p0: Vec<f64>,
    /// per-mode initial field (explicit grids)
    pub alpha0: Vec<Complex64>,
    /// uniform per-channel alpha for product grids
    pub alpha_uniform: Option<Complex64>,
    pub hbar_list: Vec<f64>,
    pub n_max: usize,
    pub g: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub krylov_dim: usize,
    pub prop_tol: f64,
    pub leakage_bound: f64,
    pub dt_quantum: f64,
    pub dt: f64,
    pub t_end: f64,
    pub sample_stride: usize,
    pub collinear: bool,
    pub coupling_on: bool,
    pub v_on: bool,
    pub scheme: Scheme,
    pub derivative: DerivativeScheme,
    pub checkpoints: Vec<f64>,
}

struct RawConfig {
    entries: BTreeMap<String, (usize, String)>,
}

impl RawConfig {
    fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let lineno = lineno + 1;
            if line.starts_with('[') {
                if !line.ends_with(']') || line.len() < 3 {
                    return Err(Error::Config { line: lineno, msg: format!("malformed section header '{line}'") });
                }
                section = line[1..line.len() - 1].trim().to_lowercase();
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config { line: lineno, msg: format!("expected 'key = value', got '{line}'") });
            };
            let key = format!("{section}.{}", key.trim().to_lowercase());
            if entries.contains_key(&key) {
                return Err(Error::Config { line: lineno, msg: format!("duplicate key '{key}'") });
            }
            entries.insert(key, (lineno, value.trim().to_string()));
        }
        Ok(Self { entries })
    }

    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.entries.remove(key)
    }

    fn require(&mut self, key: &str) -> Result<(usize, String)> {
        self.take(key)
            .ok_or_else(|| Error::Config { line: 0, msg: format!("missing required key '{key}'") })
    }
}

fn parse_f64(key: &str, line: usize, s: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| Error::Config { line, msg: format!("key '{key}': '{s}' is not a number") })
}

fn parse_usize(key: &str, line: usize, s: &str) -> Result<usize> {
    s.parse::<usize>()
        .map_err(|_| Error::Config { line, msg: format!("key '{key}': '{s}' is not a nonnegative integer") })
}

fn parse_bool(key: &str, line: usize, s: &str) -> Result<bool> {
    match s {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        _ => Err(Error::Config { line, msg: format!("key '{key}': '{s}' is not a boolean") }),
    }
}

fn parse_f64_list(key: &str, line: usize, s: &str) -> Result<Vec<f64>> {
    s.split_whitespace().map(|tok| parse_f64(key, line, tok)).collect()
}

fn f64_key(raw: &mut RawConfig, key: &str, default: f64) -> Result<f64> {
    match raw.take(key) {
        Some((l, s)) => parse_f64(key, l, &s),
        None => Ok(default),
    }
}

fn bool_key(raw: &mut RawConfig, key: &str, default: bool) -> Result<bool> {
    match raw.take(key) {
        Some((l, s)) => parse_bool(key, l, &s),
        None => Ok(default),
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_str(&text)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn from_str(text: &str) -> Result<Self> {
        let mut raw = RawConfig::parse(text)?;

        let (l, family) = raw.require("cutoff.family")?;
        let family = family.to_lowercase();
        if family != "sharp" && family != "gaussian" {
            return Err(Error::Config { line: l, msg: format!("unknown cutoff family '{family}'") });
        }
        let (l, s) = raw.require("cutoff.lambda")?;
        let lambda = parse_f64("cutoff.lambda", l, &s)?;
        let sigma = match raw.take("cutoff.sigma") {
            Some((l, s)) => parse_f64("cutoff.sigma", l, &s)?,
            None => 0.5,
        };
        if !(0.5..=1.0).contains(&sigma) {
            return Err(Error::Config { line: 0, msg: format!("cutoff.sigma = {sigma} outside [1/2, 1]") });
        }

        // modes: explicit list takes precedence over the product rule
        let mut explicit = Vec::new();
        let mut i = 1;
        while let Some((l, s)) = raw.take(&format!("modes.mode_{i}")) {
            let toks = parse_f64_list(&format!("modes.mode_{i}"), l, &s)?;
            if toks.len() != 5 {
                return Err(Error::Config { line: l, msg: "mode entries need 'kx ky kz pol weight'".into() });
            }
            let pol = toks[3] as usize;
            if pol > 1 || toks[3].fract() != 0.0 {
                return Err(Error::Config { line: l, msg: "polarization index must be 0 or 1".into() });
            }
            if toks[4] <= 0.0 {
                return Err(Error::Config { line: l, msg: "mode weight must be positive".into() });
            }
            explicit.push(([toks[0], toks[1], toks[2]], pol, toks[4]));
            i += 1;
        }
        let grid = if explicit.is_empty() {
            let (l, s) = raw.require("modes.radial_order")?;
            let radial = parse_usize("modes.radial_order", l, &s)?;
            let (l, s) = raw.require("modes.costheta_order")?;
            let costheta = parse_usize("modes.costheta_order", l, &s)?;
            let (l, s) = raw.require("modes.phi_order")?;
            let phi = parse_usize("modes.phi_order", l, &s)?;
            let (l, s) = raw.require("modes.k_max")?;
            let k_max = parse_f64("modes.k_max", l, &s)?;
            if radial == 0 || costheta == 0 || phi == 0 || k_max <= 0.0 {
                return Err(Error::Config { line: l, msg: "product grid orders and k_max must be positive".into() });
            }
            GridSpec::Product { radial, costheta, phi, k_max }
        } else {
            GridSpec::Explicit(explicit)
        };

        let (l, s) = raw.require("particles.n")?;
        let n_particles = parse_usize("particles.n", l, &s)?;
        if !(1..=2).contains(&n_particles) {
            return Err(Error::Config { line: l, msg: format!("particles.n must be 1 or 2, got {n_particles}") });
        }
        let mut q0 = Vec::new();
        let mut p0 = Vec::new();
        for j in 1..=n_particles {
            let (l, s) = raw.require(&format!("particles.q_{j}"))?;
            q0.push(parse_f64(&format!("particles.q_{j}"), l, &s)?);
            let (l, s) = raw.require(&format!("particles.p_{j}"))?;
            p0.push(parse_f64(&format!("particles.p_{j}"), l, &s)?);
        }

        let mut alpha0 = Vec::new();
        let mut i = 1;
        while let Some((l, s)) = raw.take(&format!("field.alpha_{i}")) {
            let toks = parse_f64_list(&format!("field.alpha_{i}"), l, &s)?;
            if toks.len() != 2 {
                return Err(Error::Config { line: l, msg: "alpha entries need 're im'".into() });
            }
            alpha0.push(Complex64::new(toks[0], toks[1]));
            i += 1;
        }
        let alpha_uniform = match raw.take("field.alpha_uniform") {
            Some((l, s)) => {
                let toks = parse_f64_list("field.alpha_uniform", l, &s)?;
                if toks.len() != 2 {
                    return Err(Error::Config { line: l, msg: "alpha_uniform needs 're im'".into() });
                }
                Some(Complex64::new(toks[0], toks[1]))
            }
            None => None,
        };
        if let GridSpec::Explicit(modes) = &grid {
            if !alpha0.is_empty() && alpha0.len() != modes.len() {
                return Err(Error::Config { line: 0, msg: format!("{} alpha entries for {} modes", alpha0.len(), modes.len()) });
            }
            if alpha0.is_empty() {
                let fill = alpha_uniform.unwrap_or(Complex64::new(0.0, 0.0));
                alpha0 = vec![fill; modes.len()];
            }
        }

        let hbar_list = match raw.take("quantum.hbar_list") {
            Some((l, s)) => parse_f64_list("quantum.hbar_list", l, &s)?,
            None => vec![0.4, 0.2, 0.1, 0.05],
        };
        if hbar_list.is_empty() || hbar_list.iter().any(|&h| h <= 0.0) {
            return Err(Error::Config { line: 0, msg: "quantum.hbar_list must be positive".into() });
        }
        let n_max = match raw.take("quantum.n_max") {
            Some((l, s)) => parse_usize("quantum.n_max", l, &s)?,
            None => 8,
        };
        let g = match raw.take("quantum.g") {
            Some((l, s)) => parse_usize("quantum.g", l, &s)?,
            None => 128,
        };
        let x_min = f64_key(&mut raw, "quantum.x_min", -6.0)?;
        let x_max = f64_key(&mut raw, "quantum.x_max", 6.0)?;
        let krylov_dim = match raw.take("quantum.krylov_dim") {
            Some((l, s)) => parse_usize("quantum.krylov_dim", l, &s)?,
            None => 20,
        };
        let prop_tol = f64_key(&mut raw, "quantum.tol", 1e-10)?;
        let leakage_bound = f64_key(&mut raw, "quantum.leakage_bound", 1e-6)?;
        let dt_quantum = f64_key(&mut raw, "quantum.dt", 1e-2)?;
        let derivative = match raw.take("quantum.derivative") {
            Some((l, s)) => match s.to_lowercase().as_str() {
                "spectral" => DerivativeScheme::Spectral,
                "central" => DerivativeScheme::CentralDifference,
                other => {
                    return Err(Error::Config { line: l, msg: format!("unknown derivative scheme '{other}'") })
                }
            },
            None => DerivativeScheme::Spectral,
        };

        let dt = f64_key(&mut raw, "run.dt", 1e-3)?;
        let t_end = f64_key(&mut raw, "run.t_end", 1.0)?;
        let sample_stride = match raw.take("run.sample_stride") {
            Some((l, s)) => parse_usize("run.sample_stride", l, &s)?,
            None => 10,
        };
        let collinear = bool_key(&mut raw, "run.collinear", true)?;
        let coupling_on = bool_key(&mut raw, "run.coupling_on", true)?;
        let v_on = bool_key(&mut raw, "run.v_on", true)?;
        let scheme = match raw.take("run.scheme") {
            Some((l, s)) => match s.to_lowercase().as_str() {
                "strang" => Scheme::Strang,
                "rk4" => Scheme::Rk4Monolithic,
                other => return Err(Error::Config { line: l, msg: format!("unknown scheme '{other}'") }),
            },
            None => Scheme::Strang,
        };
        let checkpoints = match raw.take("run.checkpoints") {
            Some((l, s)) => parse_f64_list("run.checkpoints", l, &s)?,
            None => vec![0.5, 1.0, 2.0],
        };

        if let Some((line, _)) = raw.entries.values().next() {
            let key = raw.entries.keys().next().unwrap().clone();
            return Err(Error::Config { line: *line, msg: format!("unknown key '{key}'") });
        }

        let cfg = Self {
            cutoff: CutoffSpec { family, lambda, sigma },
            grid,
            n_particles,
            q0,
            p0,
            alpha0,
            alpha_uniform,
            hbar_list,
            n_max,
            g,
            x_min,
            x_max,
            krylov_dim,
            prop_tol,
            leakage_bound,
            dt_quantum,
            dt,
            t_end,
            sample_stride,
            collinear,
            coupling_on,
            v_on,
            scheme,
            derivative,
            checkpoints,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Cross-field validation; run before any compute or allocation.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config { line: 0, msg });
        if self.dt <= 0.0 || self.dt_quantum <= 0.0 || self.t_end <= 0.0 {
            return fail("dt, quantum.dt, and t_end must be positive".into());
        }
        if self.x_max <= self.x_min {
            return fail("grid extent is empty".into());
        }
        if self.g < 8 {
            return fail(format!("quantum.g = {} below the minimum of 8", self.g));
        }
        if self.krylov_dim < 2 {
            return fail("quantum.krylov_dim must be at least 2".into());
        }
        // checkpoints beyond t_end are ignored at use, never extrapolated
        if self.checkpoints.iter().any(|&t| t <= 0.0 || !t.is_finite()) {
            return fail("checkpoints must be positive and finite".into());
        }
        if let GridSpec::Explicit(modes) = &self.grid {
            // tensor size guard before any allocation
            let fock: usize = (self.n_max + 1)
                .checked_pow(modes.len() as u32)
                .unwrap_or(usize::MAX);
            let dim = fock.saturating_mul(self.g.pow(self.n_particles as u32));
            if dim > crate::fock::DIMENSION_CAP {
                return fail(format!(
                    "tensor dimension {dim} exceeds the cap {}",
                    crate::fock::DIMENSION_CAP
                ));
            }
        }
        Ok(())
    }

    pub fn quantum_ready(&self) -> Result<()> {
        match &self.grid {
            GridSpec::Explicit(_) => Ok(()),
            GridSpec::Product { .. } => Err(Error::Config {
                line: 0,
                msg: "quantum runs need an explicit [modes] mode_i list".into(),
            }),
        }
    }
}
