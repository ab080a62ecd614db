//! The five CLI commands. Each returns the process exit code for a completed
//! run: 0 when the run's verdict passes, 1 when it fails. Configuration and
//! numerical errors surface as `Err` and are mapped to exit codes 2 and 3 by
//! the binary.

use super::config::RunConfig;
use super::output::{fmt_f64, write_csv, write_json};
use super::run::{
    build_kernels, classical_initial, run_classical, run_sweep, sample_at, solver_config,
    PairedRun,
};
use crate::beta;
use crate::classical;
use crate::error::Result;
use crate::field_kernels::{polarization_basis, ModeField};
use crate::fock::{
    assemble_hamiltonian, initial_state, propagate, FockBasis, HamiltonianOpts, ParticleGrid,
    PropagatorOpts, TensorSpace,
};
use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use std::path::Path;

const BETA_COLUMNS: [&str; 10] = [
    "t",
    "beta_a",
    "beta_b",
    "beta_b_tilde",
    "beta_c",
    "rdm_distance",
    "rdm_bound",
    "leakage",
    "energy_q",
    "energy_c",
];

/// Evaluate the cutoff admissibility integrals and report pass/fail.
pub fn check_cutoff(cfg: &RunConfig, out: &Path, seed: u64) -> Result<i32> {
    let family = match cfg.cutoff.family.as_str() {
        "sharp" => crate::field_kernels::CutoffFamily::Sharp { lambda: cfg.cutoff.lambda },
        _ => crate::field_kernels::CutoffFamily::Gaussian { lambda: cfg.cutoff.lambda },
    };
    let cutoff = crate::field_kernels::Cutoff::new(family, cfg.cutoff.sigma);
    let report = cutoff.check_admissibility()?;
    println!(
        "cutoff {} (lambda = {}, sigma = {}): i1 = {} ({}), i2 = {} ({})",
        cfg.cutoff.family,
        cfg.cutoff.lambda,
        cfg.cutoff.sigma,
        fmt_f64(report.i1),
        if report.i1_converged { "converged" } else { "DIVERGENT" },
        fmt_f64(report.i2),
        if report.i2_converged { "converged" } else { "DIVERGENT" },
    );
    println!("verdict: {}", if report.pass { "ADMISSIBLE" } else { "INADMISSIBLE" });
    write_json(
        &out.join("admissibility.json"),
        &json!({
            "schema": super::output::SCHEMA_VERSION,
            "seed": seed,
            "family": cfg.cutoff.family,
            "lambda": cfg.cutoff.lambda,
            "sigma": cfg.cutoff.sigma,
            "report": serde_json::to_value(&report).unwrap(),
        }),
    )?;
    Ok(if report.pass { 0 } else { 1 })
}

/// Integrate the classical system alone and write the trajectory with its
/// conservation and growth diagnostics.
pub fn simulate_classical(cfg: &RunConfig, out: &Path, seed: u64) -> Result<i32> {
    let kern = build_kernels(cfg)?;
    let traj = run_classical(cfg, &kern)?;
    let scfg = solver_config(cfg);

    let mut columns: Vec<String> = vec!["t".into()];
    for j in 1..=cfg.n_particles {
        for l in 1..=3 {
            columns.push(format!("q{j}_{l}"));
        }
        for l in 1..=3 {
            columns.push(format!("p{j}_{l}"));
        }
        for l in 1..=3 {
            columns.push(format!("ptilde{j}_{l}"));
        }
    }
    columns.extend(["energy".into(), "norm_h_sigma".into(), "norm_hdot_half".into()]);
    let cols: Vec<&str> = columns.iter().map(String::as_str).collect();

    let mut rows = Vec::with_capacity(traj.states.len());
    for (u, d) in traj.states.iter().zip(&traj.diagnostics) {
        let ptilde = classical::kinetic_momentum(&kern, u, &scfg)?;
        let mut row = vec![u.t];
        for j in 0..cfg.n_particles {
            row.extend(u.q[j]);
            row.extend(u.p[j]);
            row.extend(ptilde[j]);
        }
        row.extend([d.energy, d.norm_h_sigma, d.norm_hdot_half]);
        rows.push(row);
    }
    write_csv(&out.join("trajectory.csv"), "trajectory", &cols, &rows)?;

    let e0 = traj.diagnostics[0].energy;
    let drift = traj
        .diagnostics
        .iter()
        .map(|d| (d.energy - e0).abs())
        .fold(0.0, f64::max)
        / e0.abs().max(1.0);
    let max_faraday = traj
        .diagnostics
        .iter()
        .map(|d| d.faraday_contraction.abs())
        .fold(0.0, f64::max);
    let m = &traj.monitors;
    let pass = !(m.sup_p_violated || m.hdot_half_violated || m.x_sigma_violated);
    write_json(
        &out.join("summary.json"),
        &json!({
            "schema": super::output::SCHEMA_VERSION,
            "seed": seed,
            "samples": traj.states.len(),
            "energy_drift_rel": drift,
            "max_faraday_contraction": max_faraday,
            "monitors": serde_json::to_value(m).unwrap(),
            "pass": pass,
        }),
    )?;
    println!(
        "classical run: {} samples, relative energy drift {}, monitors {}",
        traj.states.len(),
        fmt_f64(drift),
        if pass { "within envelopes" } else { "VIOLATED" }
    );
    Ok(if pass { 0 } else { 1 })
}

fn beta_rows(run: &PairedRun) -> Vec<Vec<f64>> {
    run.samples
        .iter()
        .map(|s| {
            let r = &s.report;
            vec![
                r.t,
                r.beta_a,
                r.beta_b,
                r.beta_b_tilde,
                r.beta_c,
                r.rdm_distance,
                r.rdm_bound,
                r.leakage,
                r.energy_q,
                r.energy_c,
            ]
        })
        .collect()
}

fn beta_csv_name(hbar: f64) -> String {
    format!("beta_hbar_{hbar}.csv")
}

/// Run the paired quantum/classical evolution for every hbar in the sweep
/// and check internal consistency of the deficiency measures.
pub fn simulate_quantum(cfg: &RunConfig, out: &Path, seed: u64) -> Result<i32> {
    cfg.quantum_ready()?;
    let kern = build_kernels(cfg)?;
    let sweep = run_sweep(cfg, &kern)?;

    let mut pass = true;
    let mut runs_json = Vec::new();
    for run in &sweep {
        write_csv(
            &out.join(beta_csv_name(run.hbar)),
            "beta",
            &BETA_COLUMNS,
            &beta_rows(run),
        )?;
        let mut route_gap: f64 = 0.0;
        let mut rdm_ok = true;
        for s in &run.samples {
            route_gap = route_gap.max((s.report.beta_c - s.report.beta_c_weyl).abs());
            if s.report.rdm_distance > s.report.rdm_bound + 1e-10 {
                rdm_ok = false;
            }
        }
        let max_leak = run
            .samples
            .iter()
            .map(|s| s.report.leakage)
            .fold(run.initial_leakage, f64::max);
        let routes_ok = route_gap <= 1e-10 + max_leak;
        pass &= rdm_ok && routes_ok;
        let last = &run.samples.last().unwrap().report;
        println!(
            "hbar = {:>6}: beta_a {} beta_b {} beta_c {} at t = {:.3}; rdm {} bound; routes agree to {}",
            run.hbar,
            fmt_f64(last.beta_a),
            fmt_f64(last.beta_b),
            fmt_f64(last.beta_c),
            last.t,
            if rdm_ok { "within" } else { "OUTSIDE" },
            fmt_f64(route_gap),
        );
        runs_json.push(json!({
            "hbar": run.hbar,
            "initial_leakage": run.initial_leakage,
            "beta_route_gap": route_gap,
            "rdm_within_bound": rdm_ok,
            "final": serde_json::to_value(last).unwrap(),
            "csv": beta_csv_name(run.hbar),
        }));
    }
    write_json(
        &out.join("summary.json"),
        &json!({
            "schema": super::output::SCHEMA_VERSION,
            "seed": seed,
            "runs": runs_json,
            "pass": pass,
        }),
    )?;
    println!("verdict: {}", if pass { "PASS" } else { "FAIL" });
    Ok(if pass { 0 } else { 1 })
}

/// Least-squares fit of log(beta_tot(t)/(beta_tot(0) + hbar)) = log C + c t^2
/// over the sampled times t > 0. Returns (C, c, rms residual).
fn fit_growth(run: &PairedRun) -> Option<(f64, f64, f64)> {
    let b0 = total_beta(&run.samples[0].report) + run.hbar;
    let pts: Vec<(f64, f64)> = run
        .samples
        .iter()
        .skip(1)
        .filter_map(|s| {
            let b = total_beta(&s.report);
            if b > 0.0 {
                Some((s.report.t * s.report.t, (b / b0).ln()))
            } else {
                None
            }
        })
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-30 {
        return None;
    }
    let c = (n * sxy - sx * sy) / denom;
    let log_c = (sy - c * sx) / n;
    let rms = (pts
        .iter()
        .map(|&(x, y)| {
            let r = y - (log_c + c * x);
            r * r
        })
        .sum::<f64>()
        / n)
        .sqrt();
    Some((log_c.exp(), c, rms))
}

fn total_beta(r: &beta::BetaReport) -> f64 {
    r.beta_a + r.beta_b + r.beta_c
}

/// Sweep hbar, check that beta(t*, hbar)/hbar is stable across halvings and
/// that Lipschitz-observable errors track sqrt(hbar).
pub fn rate_study(cfg: &RunConfig, out: &Path, seed: u64) -> Result<i32> {
    cfg.quantum_ready()?;
    let kern = build_kernels(cfg)?;
    let sweep = run_sweep(cfg, &kern)?;
    for run in &sweep {
        write_csv(
            &out.join(beta_csv_name(run.hbar)),
            "beta",
            &BETA_COLUMNS,
            &beta_rows(run),
        )?;
    }

    let checkpoints: Vec<f64> = cfg
        .checkpoints
        .iter()
        .copied()
        .filter(|&t| t <= cfg.t_end + 1e-12)
        .collect();

    let mut rows = Vec::new();
    let mut pass = true;
    let mut table_json = Vec::new();
    for &t_star in &checkpoints {
        let mut ratios = Vec::new();
        let mut obs = Vec::new();
        for run in &sweep {
            let Some(s) = sample_at(run, t_star, cfg) else {
                pass = false;
                continue;
            };
            let bt = total_beta(&s.report);
            ratios.push((run.hbar, bt / run.hbar));
            obs.push((run.hbar, s.obs_err_tanh));
            rows.push(vec![run.hbar, t_star, bt, bt / run.hbar, s.obs_err_tanh]);
        }
        let mut beta_stable = true;
        for pair in ratios.windows(2) {
            let (r0, r1) = (pair[0].1, pair[1].1);
            if !(r0.max(r1) <= 2.0 * r0.min(r1)) {
                beta_stable = false;
            }
        }
        let mut obs_tracks_sqrt = true;
        for pair in obs.windows(2) {
            let scale = (pair[1].0 / pair[0].0).sqrt();
            let actual = pair[1].1 / pair[0].1;
            if !(actual >= 0.5 * scale && actual <= 2.0 * scale) {
                obs_tracks_sqrt = false;
            }
        }
        pass &= beta_stable && obs_tracks_sqrt;
        println!(
            "t* = {t_star}: beta/hbar = [{}] ({}), obs-error sqrt(hbar) tracking {}",
            ratios
                .iter()
                .map(|(_, r)| format!("{r:.4}"))
                .collect::<Vec<_>>()
                .join(", "),
            if beta_stable { "stable" } else { "UNSTABLE" },
            if obs_tracks_sqrt { "ok" } else { "BROKEN" },
        );
        table_json.push(json!({
            "t_star": t_star,
            "beta_over_hbar": ratios.iter().map(|&(h, r)| json!({"hbar": h, "ratio": r})).collect::<Vec<_>>(),
            "obs_err_tanh": obs.iter().map(|&(h, e)| json!({"hbar": h, "err": e})).collect::<Vec<_>>(),
            "beta_stable": beta_stable,
            "obs_tracks_sqrt_hbar": obs_tracks_sqrt,
        }));
    }
    write_csv(
        &out.join("rates.csv"),
        "rates",
        &["hbar", "t_star", "beta_total", "beta_over_hbar", "obs_err_tanh"],
        &rows,
    )?;

    let fits: Vec<_> = sweep
        .iter()
        .map(|run| match fit_growth(run) {
            Some((c_big, c, rms)) => json!({
                "hbar": run.hbar, "C": c_big, "c": c, "rms_residual": rms,
            }),
            None => json!({ "hbar": run.hbar, "fit": "degenerate" }),
        })
        .collect();
    write_json(
        &out.join("summary.json"),
        &json!({
            "schema": super::output::SCHEMA_VERSION,
            "seed": seed,
            "checkpoints": table_json,
            "growth_fits": fits,
            "pass": pass,
        }),
    )?;
    println!("verdict: {}", if pass { "PASS" } else { "FAIL" });
    Ok(if pass { 0 } else { 1 })
}

struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn check(name: &'static str, pass: bool, detail: String) -> Check {
    Check { name, pass, detail }
}

/// Invariant suite over both layers: prints one line per check and fails the
/// run when any invariant breaks.
pub fn diagnostics(cfg: &RunConfig, out: &Path, seed: u64) -> Result<i32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks: Vec<Check> = Vec::new();

    let kern = build_kernels(cfg)?;
    let adm = kern.cutoff.check_admissibility()?;
    checks.push(check(
        "cutoff_admissible",
        adm.pass,
        format!("i1 = {:.3e}, i2 = {:.3e}", adm.i1, adm.i2),
    ));

    // polarization frame on random wave-vectors: orthonormal, transverse,
    // and complete (sum eps eps^T = I - khat khat^T)
    let mut frame_err: f64 = 0.0;
    for _ in 0..32 {
        let k = [
            rng.gen::<f64>() * 2.0 - 1.0,
            rng.gen::<f64>() * 2.0 - 1.0,
            rng.gen::<f64>() * 2.0 - 1.0,
        ];
        if k.iter().map(|x| x * x).sum::<f64>() < 1e-4 {
            continue;
        }
        let (e1, e2) = polarization_basis(k)?;
        let n = k.iter().map(|x| x * x).sum::<f64>().sqrt();
        let khat = [k[0] / n, k[1] / n, k[2] / n];
        let dot = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        frame_err = frame_err
            .max(dot(e1, e2).abs())
            .max((dot(e1, e1) - 1.0).abs())
            .max((dot(e2, e2) - 1.0).abs())
            .max(dot(e1, khat).abs())
            .max(dot(e2, khat).abs());
        for a in 0..3 {
            for b in 0..3 {
                let lhs = e1[a] * e1[b] + e2[a] * e2[b];
                let rhs = (if a == b { 1.0 } else { 0.0 }) - khat[a] * khat[b];
                frame_err = frame_err.max((lhs - rhs).abs());
            }
        }
    }
    checks.push(check(
        "polarization_frame",
        frame_err < 1e-12,
        format!("max deviation {frame_err:.3e}"),
    ));

    // truncated CCR: [b, b*] = I - (n_max + 1) |n_max><n_max| per mode
    {
        let basis = FockBasis::new(1, 4)?;
        let b = basis.dense_annihilate(0);
        let comm = &b * b.adjoint() - b.adjoint() * &b;
        let mut defect: f64 = 0.0;
        for i in 0..basis.dim() {
            for j in 0..basis.dim() {
                let expect = if i == j {
                    if i == basis.dim() - 1 {
                        Complex64::new(1.0 - (basis.n_max as f64 + 1.0), 0.0)
                    } else {
                        Complex64::new(1.0, 0.0)
                    }
                } else {
                    Complex64::new(0.0, 0.0)
                };
                defect = defect.max((comm[(i, j)] - expect).norm());
            }
        }
        checks.push(check(
            "truncated_ccr",
            defect < 1e-13,
            format!("max defect {defect:.3e}"),
        ));
    }

    // short classical run: energy conservation and the Faraday contraction
    {
        let mut scfg = solver_config(cfg);
        scfg.t_end = cfg.t_end.min(0.5);
        let u0 = classical_initial(cfg, &kern);
        let traj = classical::integrate(&kern, &u0, &scfg)?;
        let e0 = traj.diagnostics[0].energy;
        let drift = traj
            .diagnostics
            .iter()
            .map(|d| (d.energy - e0).abs())
            .fold(0.0, f64::max)
            / e0.abs().max(1.0);
        checks.push(check(
            "classical_energy",
            drift < 1e-6,
            format!("relative drift {drift:.3e} over t <= {}", scfg.t_end),
        ));
        let far = traj
            .diagnostics
            .iter()
            .map(|d| d.faraday_contraction.abs())
            .fold(0.0, f64::max);
        checks.push(check(
            "faraday_contraction",
            far < 1e-10,
            format!("max |ptilde F ptilde| = {far:.3e}"),
        ));
    }

    // quantum layer (needs an explicit mode list)
    if cfg.quantum_ready().is_ok() {
        let hbar = cfg.hbar_list[0];
        let basis = FockBasis::new(kern.channels(), cfg.n_max)?;
        let grid = ParticleGrid::periodic(cfg.g, cfg.x_min, cfg.x_max)?;
        let space = TensorSpace::new(grid, basis, cfg.n_particles)?;
        let ham = assemble_hamiltonian(
            &kern,
            &space,
            hbar,
            HamiltonianOpts { coupling_on: cfg.coupling_on, v_on: cfg.v_on, scheme: cfg.derivative },
        )?;
        let alpha0 = ModeField::new(cfg.alpha0.clone());
        let (mut state, leak) = initial_state(
            &kern,
            &space,
            &cfg.q0,
            &cfg.p0,
            &alpha0,
            hbar,
            cfg.leakage_bound,
        )?;
        checks.push(check(
            "initial_leakage",
            leak <= cfg.leakage_bound,
            format!("leakage {leak:.3e} vs bound {:.3e}", cfg.leakage_bound),
        ));

        let e_before = ham.energy(&space, &state.psi);
        let popts = PropagatorOpts {
            krylov_dim: cfg.krylov_dim,
            tol: cfg.prop_tol,
            ..Default::default()
        };
        propagate(&ham, &space, &mut state, 5.0 * cfg.dt_quantum, cfg.dt_quantum, &popts)?;
        let norm_drift = (state.norm() - 1.0).abs();
        let e_after = ham.energy(&space, &state.psi);
        let e_drift = (e_after - e_before).abs() / e_before.abs().max(1.0);
        checks.push(check(
            "unitarity",
            norm_drift < 1e-9,
            format!("|norm - 1| = {norm_drift:.3e} after 5 steps"),
        ));
        checks.push(check(
            "quantum_energy",
            e_drift < 1e-8,
            format!("relative drift {e_drift:.3e}"),
        ));

        let mut u = classical_initial(cfg, &kern);
        let scfg = solver_config(cfg);
        let n_sub = (5.0 * cfg.dt_quantum / cfg.dt).round().max(1.0) as usize;
        let dt_c = 5.0 * cfg.dt_quantum / n_sub as f64;
        for _ in 0..n_sub {
            u = classical::step_strang(&kern, &u, dt_c, &scfg)?;
        }
        let report = beta::evaluate(&kern, &space, &ham, &state, &u, &scfg, leak)?;
        let gap = (report.beta_c - report.beta_c_weyl).abs();
        checks.push(check(
            "beta_c_routes",
            gap <= 1e-10 + report.leakage,
            format!("|route gap| = {gap:.3e}, leakage allowance {:.3e}", report.leakage),
        ));
        let gamma = beta::one_photon_rdm(&space, &state)?;
        let min_eig = beta::min_eigenvalue(&gamma);
        checks.push(check(
            "rdm_psd",
            min_eig >= -1e-10,
            format!("min eigenvalue {min_eig:.3e}"),
        ));
        checks.push(check(
            "rdm_bound",
            report.rdm_distance <= report.rdm_bound + 1e-10,
            format!("distance {:.3e} vs bound {:.3e}", report.rdm_distance, report.rdm_bound),
        ));
    }

    let mut all = true;
    for c in &checks {
        all &= c.pass;
        println!("CHECK {:<24} {}  ({})", c.name, if c.pass { "PASS" } else { "FAIL" }, c.detail);
    }
    write_json(
        &out.join("diagnostics.json"),
        &json!({
            "schema": super::output::SCHEMA_VERSION,
            "seed": seed,
            "checks": checks
                .iter()
                .map(|c| json!({"name": c.name, "pass": c.pass, "detail": c.detail}))
                .collect::<Vec<_>>(),
            "pass": all,
        }),
    )?;
    println!("verdict: {}", if all { "PASS" } else { "FAIL" });
    Ok(if all { 0 } else { 1 })
}
