//! Run orchestration: builds kernels and states from a `RunConfig` and drives
//! the paired classical/quantum evolution that the CLI commands report on.

use super::config::{GridSpec, RunConfig};
use crate::beta::{self, BetaReport, LipschitzFn, Observable};
use crate::classical::{self, ClassicalState, SolverConfig, Trajectory};
use crate::error::{Error, Result};
use crate::field_kernels::{Cutoff, CutoffFamily, Kernels, ModeField, ModeGrid};
use crate::fock::{
    assemble_hamiltonian, initial_state, propagate, FockBasis, HamiltonianOpts, ParticleGrid,
    PropagatorOpts, TensorSpace,
};
use num_complex::Complex64;

pub fn build_kernels(cfg: &RunConfig) -> Result<Kernels> {
    let family = match cfg.cutoff.family.as_str() {
        "sharp" => CutoffFamily::Sharp { lambda: cfg.cutoff.lambda },
        _ => CutoffFamily::Gaussian { lambda: cfg.cutoff.lambda },
    };
    let cutoff = Cutoff::new(family, cfg.cutoff.sigma);
    let grid = match &cfg.grid {
        GridSpec::Product { radial, costheta, phi, k_max } => {
            ModeGrid::product_rule(*radial, *costheta, *phi, *k_max)
        }
        GridSpec::Explicit(modes) => ModeGrid::from_channels(modes.clone()),
    };
    Kernels::new(grid, cutoff)
}

pub fn initial_alpha(cfg: &RunConfig, kern: &Kernels) -> ModeField {
    match &cfg.grid {
        GridSpec::Explicit(_) => ModeField::new(cfg.alpha0.clone()),
        GridSpec::Product { .. } => {
            let fill = cfg.alpha_uniform.unwrap_or(Complex64::new(0.0, 0.0));
            ModeField::new(vec![fill; kern.channels()])
        }
    }
}

pub fn classical_initial(cfg: &RunConfig, kern: &Kernels) -> ClassicalState {
    ClassicalState {
        q: cfg.q0.iter().map(|&x| [x, 0.0, 0.0]).collect(),
        p: cfg.p0.iter().map(|&x| [x, 0.0, 0.0]).collect(),
        alpha: initial_alpha(cfg, kern),
        t: 0.0,
    }
}

pub fn solver_config(cfg: &RunConfig) -> SolverConfig {
    SolverConfig {
        dt: cfg.dt,
        t_end: cfg.t_end,
        scheme: cfg.scheme,
        collinear: cfg.collinear,
        coupling_on: cfg.coupling_on,
        v_on: cfg.v_on,
        sigma: cfg.cutoff.sigma,
        sample_stride: cfg.sample_stride,
    }
}

pub fn run_classical(cfg: &RunConfig, kern: &Kernels) -> Result<Trajectory> {
    let u0 = classical_initial(cfg, kern);
    classical::integrate(kern, &u0, &solver_config(cfg))
}

#[derive(Debug, Clone)]
pub struct PairedSample {
    pub report: BetaReport,
    /// |<psi, tanh(x_1) psi> - tanh(q_1(t))|
    pub obs_err_tanh: f64,
}

#[derive(Debug, Clone)]
pub struct PairedRun {
    pub hbar: f64,
    pub initial_leakage: f64,
    pub samples: Vec<PairedSample>,
}

/// Evolve the quantum state and the classical comparison trajectory side by
/// side for a single hbar, sampling the deficiency measures along the way.
pub fn run_pair(cfg: &RunConfig, kern: &Kernels, hbar: f64) -> Result<PairedRun> {
    cfg.quantum_ready()?;
    let basis = FockBasis::new(kern.channels(), cfg.n_max)?;
    let grid = ParticleGrid::periodic(cfg.g, cfg.x_min, cfg.x_max)?;
    let space = TensorSpace::new(grid, basis, cfg.n_particles)?;
    let opts = HamiltonianOpts {
        coupling_on: cfg.coupling_on,
        v_on: cfg.v_on,
        scheme: cfg.derivative,
    };
    let ham = assemble_hamiltonian(kern, &space, hbar, opts)?;

    let alpha0 = initial_alpha(cfg, kern);
    let (mut qstate, initial_leakage) = initial_state(
        kern,
        &space,
        &cfg.q0,
        &cfg.p0,
        &alpha0,
        hbar,
        cfg.leakage_bound,
    )?;
    let mut u = classical_initial(cfg, kern);
    let scfg = solver_config(cfg);
    let popts = PropagatorOpts {
        krylov_dim: cfg.krylov_dim,
        tol: cfg.prop_tol,
        ..Default::default()
    };

    let steps = (cfg.t_end / cfg.dt_quantum).round().max(1.0) as usize;
    let n_sub = (cfg.dt_quantum / cfg.dt).round().max(1.0) as usize;
    let dt_c = cfg.dt_quantum / n_sub as f64;
    let stride = cfg.sample_stride.max(1);

    let tanh = LipschitzFn { f: &|x: f64| x.tanh(), lipschitz: 1.0 };
    let sample = |qstate: &crate::fock::QuantumState, u: &ClassicalState| -> Result<PairedSample> {
        let report = beta::evaluate(kern, &space, &ham, qstate, u, &scfg, initial_leakage)?;
        let obs_err_tanh = beta::observable_error(
            kern,
            &space,
            qstate,
            &Observable::Position(0),
            &tanh,
            u.q[0][classical::AXIS],
        )?;
        Ok(PairedSample { report, obs_err_tanh })
    };

    let mut samples = vec![sample(&qstate, &u)?];
    for step in 1..=steps {
        propagate(&ham, &space, &mut qstate, cfg.dt_quantum, cfg.dt_quantum, &popts)?;
        for _ in 0..n_sub {
            u = classical::step_strang(kern, &u, dt_c, &scfg)?;
        }
        if !u.is_finite() || !qstate.is_finite() {
            return Err(Error::Numerical(format!(
                "non-finite state at t = {:.6} (hbar = {hbar})",
                step as f64 * cfg.dt_quantum
            )));
        }
        if step % stride == 0 || step == steps {
            samples.push(sample(&qstate, &u)?);
        }
    }
    Ok(PairedRun { hbar, initial_leakage, samples })
}

/// Run the hbar sweep, one worker thread per member. Results come back in
/// the order of `cfg.hbar_list` regardless of completion order.
pub fn run_sweep(cfg: &RunConfig, kern: &Kernels) -> Result<Vec<PairedRun>> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = cfg
            .hbar_list
            .iter()
            .map(|&h| scope.spawn(move || run_pair(cfg, kern, h)))
            .collect();
        handles
            .into_iter()
            .map(|h| {
                h.join()
                    .map_err(|_| Error::Numerical("sweep worker panicked".into()))?
            })
            .collect()
    })
}

/// The sample closest to t_star, provided it lies within half a sampling
/// interval; never extrapolates past the end of the run.
pub fn sample_at<'a>(run: &'a PairedRun, t_star: f64, cfg: &RunConfig) -> Option<&'a PairedSample> {
    let spacing = cfg.dt_quantum * cfg.sample_stride.max(1) as f64;
    run.samples
        .iter()
        .min_by(|a, b| {
            let da = (a.report.t - t_star).abs();
            let db = (b.report.t - t_star).abs();
            da.partial_cmp(&db).unwrap()
        })
        .filter(|s| (s.report.t - t_star).abs() <= 0.5 * spacing + 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config() -> RunConfig {
        RunConfig::from_str(
            "
[cutoff]
family = sharp
lambda = 1.0

[modes]
mode_1 = 0.4 0.2 0.5 0 0.9
mode_2 = 0.7 -0.3 0.2 1 1.1

[particles]
n = 1
q_1 = 0.0
p_1 = 0.2

[field]
alpha_1 = 0.10 0.05
alpha_2 = -0.08 0.12

[quantum]
hbar_list = 0.4 0.2
n_max = 4
g = 32
dt = 0.02

[run]
dt = 0.002
t_end = 0.1
sample_stride = 5
checkpoints = 0.1
",
        )
        .unwrap()
    }

    #[test]
    fn paired_run_samples_stay_small_and_ordered() {
        let cfg = tiny_config();
        let kern = build_kernels(&cfg).unwrap();
        let run = run_pair(&cfg, &kern, 0.2).unwrap();
        assert!(run.samples.len() >= 2);
        assert!((run.samples[0].report.t).abs() < 1e-12);
        let last = run.samples.last().unwrap();
        assert!((last.report.t - 0.1).abs() < 1e-9);
        for s in &run.samples {
            // O(hbar) scale at desk parameters: generous ceilings catch blowups
            assert!(s.report.beta_a < 1.0, "beta_a = {}", s.report.beta_a);
            assert!(s.report.beta_c < 1.0, "beta_c = {}", s.report.beta_c);
            assert!(s.report.rdm_distance <= s.report.rdm_bound + 1e-10);
        }
    }

    #[test]
    fn sweep_preserves_hbar_order_and_matches_single_runs() {
        let cfg = tiny_config();
        let kern = build_kernels(&cfg).unwrap();
        let sweep = run_sweep(&cfg, &kern).unwrap();
        assert_eq!(sweep.len(), 2);
        assert_eq!(sweep[0].hbar, 0.4);
        assert_eq!(sweep[1].hbar, 0.2);
        let solo = run_pair(&cfg, &kern, 0.2).unwrap();
        let a = sweep[1].samples.last().unwrap().report.beta_c;
        let b = solo.samples.last().unwrap().report.beta_c;
        assert_eq!(a, b, "sweep must be deterministic");
    }

    #[test]
    fn checkpoint_lookup_refuses_distant_times() {
        let cfg = tiny_config();
        let kern = build_kernels(&cfg).unwrap();
        let run = run_pair(&cfg, &kern, 0.4).unwrap();
        assert!(sample_at(&run, 0.1, &cfg).is_some());
        assert!(sample_at(&run, 5.0, &cfg).is_none());
    }
}
