//! Orchestration of the five subcommands: each run resolves its
//! configuration, writes CSV/JSON/PGM artifacts into the output directory,
//! and finishes with a manifest of content hashes.

use std::io::Write;

use serde::Serialize;
use vibronic::analysis::{self, DistanceMetric};
use vibronic::dynamics::{self, EvolutionResult};
use vibronic::fock::{self, SpinBosonState};
use vibronic::geometry::{self, PlanarPath};
use vibronic::models::{self, Branch, SplitPart, TrotterScheme};
use vibronic::tomography::{self, SamplePart, ShotNoise};
use vibronic::{ModeSpace, Operator};

use crate::config::ExperimentConfig;
use crate::manifest::RunDir;
use crate::pgm;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum StudyKind {
    Adiabaticity,
    Fidelity,
    TrotterConvergence,
    CiVsNonci,
}

/// Potential-energy surfaces V+- on a grid (Fig. 1b).
pub fn run_surface(cfg: &ExperimentConfig) -> anyhow::Result<()> {
    let mut run = RunDir::create(&cfg.output.directory)?;
    let p = cfg.model_params();
    let res = cfg.surface.resolution;
    let ext = cfg.surface.extent;
    let xs: Vec<f64> = (0..res)
        .map(|i| -ext + 2.0 * ext * i as f64 / (res - 1) as f64)
        .collect();
    for (branch, name) in [(Branch::Upper, "surface_upper"), (Branch::Lower, "surface_lower")] {
        let mut values = ndarray::Array2::zeros((res, res));
        for i in 0..res {
            for j in 0..res {
                values[(i, j)] = models::semiclassical_surface(&p, xs[i], xs[j], branch);
            }
        }
        let csv = format!("{name}.csv");
        write_xy_csv(&run.path(&csv), &xs, &xs, &values)?;
        run.register(&csv)?;
        let img = format!("{name}.pgm");
        let (min, max) = pgm::write_pgm(&run.path(&img), &values)?;
        run.register(&img)?;
        run.register_pgm_scale(&img, min, max);
    }
    // ring geometry summary
    let r_star = p.omega / (2f64.sqrt() * p.nu);
    run.write_json(
        "surface_summary.json",
        &serde_json::json!({
            "ring_radius": r_star,
            "ring_depth": -p.omega * p.omega / (4.0 * p.nu),
            "gap_at_origin": p.delta,
        }),
    )?;
    run.finalize("surface", cfg.seed, cfg)
}

fn write_xy_csv(
    path: &std::path::Path,
    xs: &[f64],
    ys: &[f64],
    values: &ndarray::Array2<f64>,
) -> anyhow::Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "x_index,y_index,x,y,value")?;
    for (i, &x) in xs.iter().enumerate() {
        for (j, &y) in ys.iter().enumerate() {
            writeln!(f, "{},{},{},{},{}", i, j, x, y, values[(i, j)])?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct EvolveDiagnostics {
    max_norm_drift: f64,
    max_truncation_leak: f64,
    j_initial: f64,
    j_final: f64,
    j_drift: f64,
    final_x: f64,
    final_y: f64,
}

fn scheduled_evolution(cfg: &ExperimentConfig) -> anyhow::Result<EvolutionResult<SpinBosonState>> {
    let space = cfg.mode_space();
    let initial = SpinBosonState::plus_vacuum(space);
    let result = dynamics::trotter_evolve(&initial, &cfg.model_params(), &cfg.ramp_schedule())?;
    Ok(result)
}

/// Scheduled evolution, final distribution, half-plane ratio curve,
/// conserved-charge series (Fig. 3 pipeline).
pub fn run_evolve(cfg: &ExperimentConfig) -> anyhow::Result<()> {
    let mut run = RunDir::create(&cfg.output.directory)?;
    let p = cfg.model_params();
    let space = cfg.mode_space();
    let spec = cfg.grid_spec();

    let initial = SpinBosonState::plus_vacuum(space);
    let init_dist = tomography::position_distribution(&initial, &spec);
    init_dist.write_csv(&run.path("initial_distribution.csv"))?;
    run.register("initial_distribution.csv")?;

    let result = scheduled_evolution(cfg)?;
    let final_dist = tomography::position_distribution(&result.final_state, &spec);
    final_dist.write_csv(&run.path("final_distribution.csv"))?;
    run.register("final_distribution.csv")?;
    let (min, max) = pgm::write_pgm(&run.path("final_distribution.pgm"), &final_dist.values)?;
    run.register("final_distribution.pgm")?;
    run.register_pgm_scale("final_distribution.pgm", min, max);

    let curve = analysis::ratio_curve(&final_dist, 16)?;
    curve.write_csv(&run.path("ratio_curve.csv"))?;
    run.register("ratio_curve.csv")?;

    let j_series = dynamics::conserved_j_series(&result);
    {
        let mut f = std::io::BufWriter::new(std::fs::File::create(run.path("j_series.csv"))?);
        writeln!(f, "t,j_expectation")?;
        for (sample, j) in result.trajectory.iter().zip(j_series.iter()) {
            writeln!(f, "{},{}", sample.t, j)?;
        }
    }
    run.register("j_series.csv")?;

    let x_op = fock::position(space, fock::Mode::X);
    let y_op = fock::position(space, fock::Mode::Y);
    let j_initial = j_series.first().copied().unwrap_or(0.0);
    let j_final = j_series.last().copied().unwrap_or(0.0);
    let diag = EvolveDiagnostics {
        max_norm_drift: result.diagnostics.max_norm_drift(),
        max_truncation_leak: result.diagnostics.max_truncation_leak(),
        j_initial,
        j_final,
        j_drift: j_series
            .iter()
            .map(|j| (j - j_initial).abs())
            .fold(0.0, f64::max),
        final_x: result.final_state.expectation(&x_op)?.re,
        final_y: result.final_state.expectation(&y_op)?.re,
    };
    run.write_json("diagnostics.json", &diag)?;

    if cfg.noise.enabled {
        let rho0 = fock::DensityMatrix::from_pure(&initial);
        let open = dynamics::lindblad_evolve(&rho0, &p, &cfg.ramp_schedule(), &cfg.lindblad_spec())?;
        let reduced = fock::partial_trace_spin_density(&open.final_state);
        let open_dist = tomography::position_distribution_rho(&reduced, &spec);
        open_dist.write_csv(&run.path("lindblad_distribution.csv"))?;
        run.register("lindblad_distribution.csv")?;
        let open_curve = analysis::ratio_curve(&open_dist, 16)?;
        open_curve.write_csv(&run.path("lindblad_ratio_curve.csv"))?;
        run.register("lindblad_ratio_curve.csv")?;
    }

    run.finalize("evolve", cfg.seed, cfg)
}

#[derive(Serialize)]
struct TomoDiagnostics {
    reconstruction_l1_exact: f64,
    reconstruction_l1_shots: f64,
    negativity_exact: f64,
    negativity_shots: f64,
    symmetry_error_exact: f64,
}

/// In-line evolution plus the Fourier-push forward model: exact and
/// shot-noised sample maps, reconstructions, the rotated-axis cut, and the
/// ground truth (Fig. 2 pipeline).
pub fn run_tomo(cfg: &ExperimentConfig) -> anyhow::Result<()> {
    let mut run = RunDir::create(&cfg.output.directory)?;
    let spec = cfg.grid_spec();
    let grid = cfg.k_grid();

    let result = scheduled_evolution(cfg)?;
    let rho = fock::partial_trace_spin(&result.final_state);

    let truth = tomography::position_distribution(&result.final_state, &spec);
    truth.write_csv(&run.path("ground_truth.csv"))?;
    run.register("ground_truth.csv")?;

    let exact = tomography::scan(&rho, &grid, None);
    let noisy = tomography::scan(
        &rho,
        &grid,
        (cfg.tomography.shots > 0).then_some(ShotNoise {
            shots: cfg.tomography.shots,
            seed: cfg.seed,
        }),
    );
    for (samples, tag) in [(&exact, "exact"), (&noisy, "shots")] {
        for (part, pname) in [(SamplePart::Cos, "cos"), (SamplePart::Sin, "sin")] {
            let name = format!("fourier_{pname}_{tag}.csv");
            samples.write_csv(&run.path(&name), part)?;
            run.register(&name)?;
        }
        let meta = format!("fourier_{tag}.json");
        samples.write_metadata(&run.path(&meta), &format!("fourier_{tag}"))?;
        run.register(&meta)?;
        // cut along the rotated axis (Fig. 2b)
        let cut = format!("cutline_{tag}.csv");
        let mut f = std::io::BufWriter::new(std::fs::File::create(run.path(&cut))?);
        writeln!(f, "k,cos,sin")?;
        for (k, c, s) in samples.axis_cut() {
            writeln!(f, "{},{},{}", k, c, s)?;
        }
        drop(f);
        run.register(&cut)?;
    }

    let recon_exact = tomography::reconstruct(&exact, &spec)?;
    recon_exact.write_csv(&run.path("reconstruction_exact.csv"))?;
    run.register("reconstruction_exact.csv")?;
    let (min, max) = pgm::write_pgm(&run.path("reconstruction_exact.pgm"), &recon_exact.values)?;
    run.register("reconstruction_exact.pgm")?;
    run.register_pgm_scale("reconstruction_exact.pgm", min, max);

    let recon_noisy = tomography::reconstruct(&noisy, &spec)?;
    recon_noisy.write_csv(&run.path("reconstruction_shots.csv"))?;
    run.register("reconstruction_shots.csv")?;
    let (min, max) = pgm::write_pgm(&run.path("reconstruction_shots.pgm"), &recon_noisy.values)?;
    run.register("reconstruction_shots.pgm")?;
    run.register_pgm_scale("reconstruction_shots.pgm", min, max);

    let noisy_curve = analysis::ratio_curve(&recon_noisy, 16)?;
    noisy_curve.write_csv(&run.path("ratio_curve_shots.csv"))?;
    run.register("ratio_curve_shots.csv")?;

    let diag = TomoDiagnostics {
        reconstruction_l1_exact: analysis::distribution_distance(
            &recon_exact,
            &truth,
            DistanceMetric::L1,
        )?,
        reconstruction_l1_shots: analysis::distribution_distance(
            &recon_noisy,
            &truth,
            DistanceMetric::L1,
        )?,
        negativity_exact: recon_exact.negativity(),
        negativity_shots: recon_noisy.negativity(),
        symmetry_error_exact: exact.symmetry_error(),
    };
    run.write_json("diagnostics.json", &diag)?;
    run.finalize("tomo", cfg.seed, cfg)
}

#[derive(Serialize)]
struct BerryReport {
    exact_phase_upper: f64,
    exact_phase_lower: f64,
    numeric_phase_upper: f64,
    winding: Option<i64>,
}

/// Geometric-phase integrals along the configured path (circle of radius r
/// around (epsilon, 0), or the half loop when not closed).
pub fn run_berry(cfg: &ExperimentConfig) -> anyhow::Result<()> {
    let mut run = RunDir::create(&cfg.output.directory)?;
    let b = &cfg.berry;
    let path = if b.closed {
        PlanarPath::circle((b.epsilon, 0.0), b.radius, b.segments, b.counterclockwise)
    } else {
        let (a0, a1) = if b.counterclockwise {
            (0.0, std::f64::consts::PI)
        } else {
            (std::f64::consts::PI, 0.0)
        };
        PlanarPath::arc((b.epsilon, 0.0), b.radius, a0, a1, b.segments)
    };
    let report = BerryReport {
        exact_phase_upper: geometry::berry_phase_line_integral(&path, Branch::Upper)?,
        exact_phase_lower: geometry::berry_phase_line_integral(&path, Branch::Lower)?,
        numeric_phase_upper: geometry::connection_numeric(&path, Branch::Upper)?,
        winding: if b.closed { Some(geometry::winding_number(&path)?) } else { None },
    };
    run.write_json("berry.json", &report)?;
    {
        let mut f = std::io::BufWriter::new(std::fs::File::create(run.path("berry.csv"))?);
        writeln!(f, "quantity,value")?;
        writeln!(f, "exact_phase_upper,{}", report.exact_phase_upper)?;
        writeln!(f, "exact_phase_lower,{}", report.exact_phase_lower)?;
        writeln!(f, "numeric_phase_upper,{}", report.numeric_phase_upper)?;
        if let Some(w) = report.winding {
            writeln!(f, "winding,{}", w)?;
        }
    }
    run.register("berry.csv")?;
    run.finalize("berry", cfg.seed, cfg)
}

pub fn run_study(cfg: &ExperimentConfig, kind: StudyKind) -> anyhow::Result<()> {
    match kind {
        StudyKind::Adiabaticity => study_adiabaticity(cfg),
        StudyKind::Fidelity => study_fidelity(cfg),
        StudyKind::TrotterConvergence => study_trotter_convergence(cfg),
        StudyKind::CiVsNonci => study_ci_vs_nonci(cfg),
    }
}

fn study_adiabaticity(cfg: &ExperimentConfig) -> anyhow::Result<()> {
    let mut run = RunDir::create(&cfg.output.directory)?;
    let p = cfg.model_params();
    let schedule = cfg.ramp_schedule();
    let space = cfg.mode_space();
    let n = cfg.study.scan_points;
    use rayon::prelude::*;
    let metrics: Vec<(f64, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let t = schedule.total_time * (i + 1) as f64 / n as f64;
            let m = dynamics::adiabaticity_metric(space, &p, &schedule, t, cfg.study.n_excited)
                .expect("metric");
            (t, m)
        })
        .collect();
    {
        let mut f = std::io::BufWriter::new(std::fs::File::create(run.path("adiabaticity.csv"))?);
        writeln!(f, "t,metric")?;
        for (t, m) in &metrics {
            writeln!(f, "{},{}", t, m)?;
        }
    }
    run.register("adiabaticity.csv")?;
    let mut values: Vec<f64> = metrics.iter().map(|(_, m)| *m).collect();
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = values[values.len() / 2];
    run.write_json(
        "adiabaticity_summary.json",
        &serde_json::json!({
            "max": values.last().copied().unwrap_or(0.0),
            "median": median,
            "n_excited": cfg.study.n_excited,
        }),
    )?;
    run.finalize("study-adiabaticity", cfg.seed, cfg)
}

/// Sequential ("naive") ramp: the x coupling ramps to full strength over
/// the first half, then the y coupling over the second half; breaks the
/// conserved-charge symmetry of the simultaneous ramp.
fn naive_evolution(
    space: ModeSpace,
    p: &vibronic::ModelParams,
    total_time: f64,
    substeps: usize,
) -> anyhow::Result<EvolutionResult<SpinBosonState>> {
    let osc = models::build_split(space, p, 0.0, SplitPart::Oscillator);
    let x_push = models::build_split(space, p, 1.0, SplitPart::XPush);
    let y_push = models::build_split(space, p, 1.0, SplitPart::YPush);
    let half = total_time / 2.0;
    let initial = SpinBosonState::plus_vacuum(space);
    // scale endpoints match the duty-cycle-averaged simultaneous ramp (1/2)
    let result = dynamics::evolve_piecewise(
        &initial,
        move |t| {
            let sx = 0.5 * (t / half).min(1.0);
            let sy = 0.5 * ((t - half).max(0.0) / half).min(1.0);
            &(&osc + &x_push.scaled(num_complex::Complex64::new(sx, 0.0)))
                + &y_push.scaled(num_complex::Complex64::new(sy, 0.0))
        },
        total_time,
        substeps,
        0,
        |_| 0.0,
    )?;
    Ok(result)
}

fn study_fidelity(cfg: &ExperimentConfig) -> anyhow::Result<()> {
    let mut run = RunDir::create(&cfg.output.directory)?;
    let p = cfg.model_params();
    let space = cfg.mode_space();
    let initial = SpinBosonState::plus_vacuum(space);

    let mut sym_sched = cfg.ramp_schedule();
    sym_sched.scheme = TrotterScheme::ExactSimultaneous;
    sym_sched.trajectory_samples = 0;
    let symmetric = dynamics::trotter_evolve(&initial, &p, &sym_sched)?.final_state;

    let mut ref_sched = sym_sched;
    ref_sched.total_time = cfg.study.reference_time_us;
    ref_sched.exact_substeps = cfg.study.reference_substeps;
    let reference = dynamics::trotter_evolve(&initial, &p, &ref_sched)?.final_state;

    let naive = naive_evolution(space, &p, cfg.ramp_schedule().total_time, sym_sched.exact_substeps)?
        .final_state;
    let naive_ref =
        naive_evolution(space, &p, cfg.study.reference_time_us, cfg.study.reference_substeps)?
            .final_state;

    let rows = [
        ("symmetric_vs_reference", fock::fidelity(&symmetric, &reference)?),
        ("naive_vs_naive_reference", fock::fidelity(&naive, &naive_ref)?),
        ("symmetric_vs_naive", fock::fidelity(&symmetric, &naive)?),
    ];
    {
        let mut f = std::io::BufWriter::new(std::fs::File::create(run.path("fidelity.csv"))?);
        writeln!(f, "pair,fidelity")?;
        for (name, value) in rows {
            writeln!(f, "{},{}", name, value)?;
        }
    }
    run.register("fidelity.csv")?;
    run.finalize("study-fidelity", cfg.seed, cfg)
}

fn study_trotter_convergence(cfg: &ExperimentConfig) -> anyhow::Result<()> {
    let mut run = RunDir::create(&cfg.output.directory)?;
    let p = cfg.model_params();
    let space = cfg.mode_space();
    let initial = SpinBosonState::plus_vacuum(space);

    let mut exact_sched = cfg.ramp_schedule();
    exact_sched.scheme = TrotterScheme::ExactSimultaneous;
    exact_sched.exact_substeps = exact_sched.exact_substeps.max(512);
    exact_sched.trajectory_samples = 0;
    let exact = dynamics::trotter_evolve(&initial, &p, &exact_sched)?.final_state;

    let mut rows = Vec::new();
    for n in [8usize, 16, 32, 64] {
        let mut sched = cfg.ramp_schedule();
        sched.scheme = TrotterScheme::FirstOrderSplit;
        sched.rounds = n;
        sched.trajectory_samples = 0;
        let state = dynamics::trotter_evolve(&initial, &p, &sched)?.final_state;
        rows.push((n, phase_aligned_error(&state, &exact), fock::fidelity(&state, &exact)?));
    }
    {
        let mut f =
            std::io::BufWriter::new(std::fs::File::create(run.path("trotter_convergence.csv"))?);
        writeln!(f, "rounds,state_error,fidelity")?;
        for (n, err, fid) in rows {
            writeln!(f, "{},{},{}", n, err, fid)?;
        }
    }
    run.register("trotter_convergence.csv")?;
    run.finalize("study-trotter-convergence", cfg.seed, cfg)
}

/// || a - e^{i phi} b || minimized over the global phase.
pub fn phase_aligned_error(a: &SpinBosonState, b: &SpinBosonState) -> f64 {
    let overlap = b.inner(a);
    let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { overlap + 1.0 };
    a.amplitudes()
        .iter()
        .zip(b.amplitudes().iter())
        .map(|(x, y)| (x - phase * y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

fn study_ci_vs_nonci(cfg: &ExperimentConfig) -> anyhow::Result<()> {
    let mut run = RunDir::create(&cfg.output.directory)?;
    let p = cfg.model_params();
    let space = cfg.mode_space();
    let spec = cfg.grid_spec();
    let schedule = cfg.ramp_schedule();
    let initial = SpinBosonState::plus_vacuum(space);
    let tau = schedule.total_time;
    let substeps = schedule.exact_substeps;

    let osc = models::build_split(space, &p, 0.0, SplitPart::Oscillator);
    // both couplings are linear in the scale; precompute unit-scale parts
    let ci_push = {
        let full = models::build_jahn_teller(space, &p, 1.0);
        &full - &osc
    };
    let nonci_push = {
        let full = models::build_non_ci(space, &p, 1.0)?;
        &full - &osc
    };
    let scale = |t: f64| 0.5 * (t / tau).clamp(0.0, 1.0);

    let runs: Vec<(&str, Box<dyn Fn(f64) -> Operator + Sync>)> = vec![
        ("ci_full", {
            let (osc, ci) = (osc.clone(), ci_push.clone());
            Box::new(move |t| {
                &osc + &ci.scaled(num_complex::Complex64::new(scale(t), 0.0))
            })
        }),
        ("switch_midway", {
            let (osc, ci, nonci) = (osc.clone(), ci_push.clone(), nonci_push.clone());
            Box::new(move |t| {
                let push = if t < tau / 2.0 { &ci } else { &nonci };
                &osc + &push.scaled(num_complex::Complex64::new(scale(t), 0.0))
            })
        }),
        ("nonci_full", {
            let (osc, nonci) = (osc.clone(), nonci_push.clone());
            Box::new(move |t| {
                &osc + &nonci.scaled(num_complex::Complex64::new(scale(t), 0.0))
            })
        }),
    ];

    for (name, h_at) in runs {
        let result = dynamics::evolve_piecewise(&initial, h_at, tau, substeps, 0, scale)?;
        let dist = tomography::position_distribution(&result.final_state, &spec);
        let csv = format!("{name}_distribution.csv");
        dist.write_csv(&run.path(&csv))?;
        run.register(&csv)?;
        let img = format!("{name}_distribution.pgm");
        let (min, max) = pgm::write_pgm(&run.path(&img), &dist.values)?;
        run.register(&img)?;
        run.register_pgm_scale(&img, min, max);
        let curve = analysis::ratio_curve(&dist, 16)?;
        let ccsv = format!("{name}_ratio_curve.csv");
        curve.write_csv(&run.path(&ccsv))?;
        run.register(&ccsv)?;
    }
    run.finalize("study-ci-vs-nonci", cfg.seed, cfg)
}

/// Exit-code classification: 2 config, 3 numerical guard, 4 I/O.
pub fn exit_code_for(err: &anyhow::Error) -> i32 {
    if let Some(domain) = err.downcast_ref::<vibronic::Error>() {
        return match domain {
            vibronic::Error::TruncationLeak { .. }
            | vibronic::Error::PositivityViolation { .. }
            | vibronic::Error::TraceDrift(_) => 3,
            vibronic::Error::Io(_) => 4,
            _ => 2,
        };
    }
    if err.downcast_ref::<std::io::Error>().is_some() {
        return 4;
    }
    2
}
