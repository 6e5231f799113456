//! Acceptance suite: one test per criterion, each printing a PASS/FAIL
//! line with the measured numbers (run with `--nocapture` to see them all).
//!
//! The fixtures run at the experiment's operating point: nu = 2pi x 3 kHz,
//! pulse amplitude Omega = 2pi x 6 kHz, tau = 330 us, N = 16 rounds,
//! n_max = 14 per mode. Criterion 5's R(0) >= 5 clause is asserted as
//! specified and is expected to fail: a thin ring with perfect
//! geometric-phase contrast P(phi) ~ 1 - cos(phi) caps R(0) at
//! (pi + 2)/(pi - 2) ~ 4.50, and every protocol variant measures below
//! that (see the ratio printed by the test).

use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

use num_complex::Complex64 as C64;
use vibronic::analysis::{self, DistanceMetric};
use vibronic::dynamics::{self, CollapseOp, EvolutionResult, LindbladSpec};
use vibronic::fock::{self, DensityMatrix, SpinBosonState};
use vibronic::geometry::{self, PlanarPath};
use vibronic::models::{self, Branch, ModelParams, RampSchedule, SplitPart, TrotterScheme};
use vibronic::tomography::{self, GridSpec, KGrid, ShotNoise};
use vibronic::{ModeSpace, Operator};
use vibronic_cli::config::ExperimentConfig;

const NU: f64 = TAU * 3e-3; // rad/us
const OMEGA: f64 = TAU * 6e-3; // pulse amplitude, rad/us
const TAU_US: f64 = 330.0;

fn operating_point() -> ModelParams {
    ModelParams { nu: NU, omega: OMEGA, ..Default::default() }
}

fn operating_space() -> ModeSpace {
    ModeSpace::new(14, 14)
}

fn exact_schedule() -> RampSchedule {
    let mut s = RampSchedule::new(TAU_US, 16, TrotterScheme::ExactSimultaneous);
    s.exact_substeps = 256;
    s.trajectory_samples = 64;
    s
}

/// The ideal-run final state (exact simultaneous ramp), shared across
/// criteria.
fn crescent_run() -> &'static EvolutionResult<SpinBosonState> {
    static RUN: OnceLock<EvolutionResult<SpinBosonState>> = OnceLock::new();
    RUN.get_or_init(|| {
        let initial = SpinBosonState::plus_vacuum(operating_space());
        dynamics::trotter_evolve(&initial, &operating_point(), &exact_schedule())
            .expect("ideal run stays inside the truncation guard")
    })
}

fn report(criterion: u32, name: &str, pass: bool, details: &str) {
    println!(
        "criterion {criterion} ({name}): {} -- {details}",
        if pass { "PASS" } else { "FAIL" }
    );
}

fn spearman(ys: &[f64]) -> f64 {
    let n = ys.len();
    let rank = |v: &[f64]| -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap());
        let mut r = vec![0.0; v.len()];
        for (pos, &i) in idx.iter().enumerate() {
            r[i] = pos as f64;
        }
        r
    };
    let xr: Vec<f64> = (0..n).map(|i| i as f64).collect();
    let yr = rank(ys);
    let mean = (n as f64 - 1.0) / 2.0;
    let mut num = 0.0;
    let mut dx = 0.0;
    let mut dy = 0.0;
    for i in 0..n {
        num += (xr[i] - mean) * (yr[i] - mean);
        dx += (xr[i] - mean).powi(2);
        dy += (yr[i] - mean).powi(2);
    }
    num / (dx * dy).sqrt()
}

#[test]
fn criterion_1_geometric_phase_quantization() {
    let circle = PlanarPath::circle((0.0, 0.0), 1.0, 256, true);
    let exact = geometry::berry_phase_line_integral(&circle, Branch::Lower).unwrap();
    let exact_err = (exact.abs() - PI).abs();

    let fine = PlanarPath::circle((0.0, 0.0), 1.0, 10_000, true);
    let numeric = geometry::connection_numeric(&fine, Branch::Lower).unwrap();
    let numeric_err = (numeric.abs() - PI).abs();

    let half = PlanarPath::arc((0.0, 0.0), 1.0, PI, 0.0, 257);
    let half_phase = geometry::berry_phase_line_integral(&half, Branch::Lower).unwrap();
    let half_err = (half_phase.abs() - PI / 2.0).abs();

    let outside = PlanarPath::circle((3.0, 0.0), 1.0, 256, true);
    let zero = geometry::berry_phase_line_integral(&outside, Branch::Lower).unwrap();

    let pass =
        exact_err < 1e-9 && numeric_err < 1e-6 && half_err < 1e-9 && zero.abs() <= 1e-12;
    report(
        1,
        "geometric-phase quantization",
        pass,
        &format!(
            "|gamma|-pi = {exact_err:.2e} (exact), {numeric_err:.2e} (numeric 1e4 segs); \
             half-path err {half_err:.2e}; non-enclosing {zero:.2e}"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_2_adiabaticity_bound() {
    use rayon::prelude::*;
    let space = operating_space();
    let p = operating_point();
    let schedule = exact_schedule();
    let mut metrics: Vec<f64> = (0..64)
        .into_par_iter()
        .map(|i| {
            let t = TAU_US * (i + 1) as f64 / 64.0;
            dynamics::adiabaticity_metric(space, &p, &schedule, t, 8).unwrap()
        })
        .collect();
    metrics.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let max = *metrics.last().unwrap();
    let median = metrics[metrics.len() / 2];
    let pass = max <= 0.5 && median < 0.2;
    report(
        2,
        "adiabaticity bound",
        pass,
        &format!("max = {max:.4} (<= 0.5), median = {median:.4} (< 0.2), 64-point scan"),
    );
    assert!(pass);
}

#[test]
fn criterion_3_symmetry_conservation() {
    let run = crescent_run();
    let series = dynamics::conserved_j_series(run);
    let j0 = series[0];
    let drift = series.iter().map(|j| (j - j0).abs()).fold(0.0, f64::max);

    let space = operating_space();
    // |+> (x) vacuum superposes J = +1/2 and J = -1/2 equally; exact
    // evolution preserves each sector population
    let plus_basis = dynamics::conserved_sector_basis(space, 0.5, 0.05).unwrap();
    let minus_basis = dynamics::conserved_sector_basis(space, -0.5, 0.05).unwrap();
    let pop_plus = fock::subspace_fidelity(&run.final_state, &plus_basis).unwrap();
    let pop_minus = fock::subspace_fidelity(&run.final_state, &minus_basis).unwrap();
    let outside = 1.0 - pop_plus - pop_minus;

    let norm_drift = run.diagnostics.max_norm_drift();
    let pass = drift <= 1e-6
        && outside <= 1e-6
        && (pop_plus - 0.5).abs() <= 1e-6
        && (pop_minus - 0.5).abs() <= 1e-6
        && norm_drift <= 1e-8;
    report(
        3,
        "symmetry conservation",
        pass,
        &format!(
            "<J> drift = {drift:.2e}; sector populations {pop_plus:.9}/{pop_minus:.9}; \
             outside +-1/2 sectors = {outside:.2e}; norm drift = {norm_drift:.2e}"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_4_trotter_fidelity() {
    let space = operating_space();
    let p = operating_point();
    let initial = SpinBosonState::plus_vacuum(space);

    let mut trotter_sched = RampSchedule::new(TAU_US, 16, TrotterScheme::FirstOrderSplit);
    trotter_sched.trajectory_samples = 0;
    let trotter = dynamics::trotter_evolve(&initial, &p, &trotter_sched).unwrap().final_state;
    let f_trotter = fock::fidelity(&trotter, &crescent_run().final_state).unwrap();

    let mut ref_sched = RampSchedule::new(25_000.0, 16, TrotterScheme::ExactSimultaneous);
    ref_sched.exact_substeps = 4096;
    ref_sched.trajectory_samples = 0;
    let reference = dynamics::trotter_evolve(&initial, &p, &ref_sched).unwrap().final_state;
    let f_reference = fock::fidelity(&crescent_run().final_state, &reference).unwrap();

    let pass = f_trotter >= 0.96 && f_reference >= 0.90;
    report(
        4,
        "trotter fidelity",
        pass,
        &format!(
            "fid(N=16 trotter, exact) = {f_trotter:.4} (>= 0.96); \
             fid(330 us, 25 ms) = {f_reference:.4} (>= 0.90)"
        ),
    );
    assert!(pass);
}

fn reconstructed_crescent() -> &'static tomography::SpatialGrid {
    static GRID: OnceLock<tomography::SpatialGrid> = OnceLock::new();
    GRID.get_or_init(|| {
        let rho = fock::partial_trace_spin(&crescent_run().final_state);
        let samples = tomography::scan(&rho, &KGrid::default(), None);
        tomography::reconstruct(&samples, &GridSpec::default()).unwrap()
    })
}

#[test]
fn criterion_5_crescent_interference() {
    let recon = reconstructed_crescent();
    let curve = analysis::ratio_curve(recon, 16).unwrap();
    let r0 = curve.ratio[0];
    let r_end = *curve.ratio.last().unwrap();
    let rho_s = spearman(&curve.ratio);

    // non-CI control, Fig. 5c protocol: the crossing-free Hamiltonian the
    // whole way through the same ramp
    let space = operating_space();
    let p = operating_point();
    let osc = models::build_split(space, &p, 0.0, SplitPart::Oscillator);
    let nonci_push = &models::build_non_ci(space, &p, 1.0).unwrap() - &osc;
    let initial = SpinBosonState::plus_vacuum(space);
    let scale = |t: f64| 0.5 * (t / TAU_US).clamp(0.0, 1.0);
    let control = dynamics::evolve_piecewise(
        &initial,
        |t| &osc + &nonci_push.scaled(C64::new(scale(t), 0.0)),
        TAU_US,
        256,
        0,
        scale,
    )
    .unwrap();
    let control_dist =
        tomography::position_distribution(&control.final_state, &GridSpec::default());
    let control_curve = analysis::ratio_curve(&control_dist, 16).unwrap();
    let control_dev = control_curve
        .ratio
        .iter()
        .map(|r| (r - 1.0).abs())
        .fold(0.0, f64::max);

    let clause_r0 = r0 >= 5.0;
    let clause_end = (0.8..=1.25).contains(&r_end);
    let clause_mono = rho_s <= -0.9;
    let clause_control = control_dev <= 0.3;
    let pass = clause_r0 && clause_end && clause_mono && clause_control;
    report(
        5,
        "crescent interference",
        pass,
        &format!(
            "R(0) = {r0:.3} (>= 5 as specified; thin-ring contrast cap is \
             (pi+2)/(pi-2) = {:.3}), R(pi/2) = {r_end:.3} in [0.8, 1.25]: {clause_end}, \
             Spearman = {rho_s:.3} (<= -0.9): {clause_mono}, \
             non-CI max|R-1| = {control_dev:.3} (<= 0.3): {clause_control}",
            (PI + 2.0) / (PI - 2.0)
        ),
    );
    assert!(pass, "R(0) >= 5 is unattainable for this state; see the decisions ledger");
}

#[test]
fn criterion_6_tomography_roundtrip() {
    // crescent round trip at k_max = 2.8, 25 x 25
    let spec = GridSpec::default();
    let truth = tomography::position_distribution(&crescent_run().final_state, &spec);
    let l1_crescent =
        analysis::distribution_distance(reconstructed_crescent(), &truth, DistanceMetric::L1)
            .unwrap();

    // vacuum round trip halves (at least) when the cutoff doubles
    let space = operating_space();
    let vac = SpinBosonState::basis_state(space, 0, 0, 0);
    let rho = fock::partial_trace_spin(&vac);
    let vac_truth = tomography::position_distribution(&vac, &spec);
    let mut l1 = Vec::new();
    for k_max in [2.8, 5.6] {
        let grid = KGrid { k_max, points: 25, rotation: 0.0 };
        let recon = tomography::reconstruct(&tomography::scan(&rho, &grid, None), &spec).unwrap();
        l1.push(analysis::distribution_distance(&recon, &vac_truth, DistanceMetric::L1).unwrap());
    }

    let pass = l1_crescent <= 0.08 && l1[1] <= 0.5 * l1[0];
    report(
        6,
        "tomography round-trip",
        pass,
        &format!(
            "crescent L1 = {l1_crescent:.4} (<= 0.08); vacuum L1 {:.4} -> {:.6} under \
             k_max doubling",
            l1[0], l1[1]
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_7_early_time_ehrenfest_push() {
    let space = operating_space();
    let p = operating_point();
    let initial = SpinBosonState::plus_vacuum(space);
    let t_end = 0.05 * TAU / NU;
    let h = models::build_jahn_teller(space, &p, 1.0);
    let run = dynamics::evolve_piecewise(&initial, |_| h.clone(), t_end, 64, 0, |_| 1.0)
        .unwrap();
    let x_op = fock::position(space, fock::Mode::X);
    let x_mean = run.final_state.expectation(&x_op).unwrap().re;
    let predicted = -(NU * OMEGA / (2.0 * 2f64.sqrt())) * t_end * t_end;
    let rel = (x_mean - predicted).abs() / predicted.abs();
    let pass = rel <= 0.05;
    report(
        7,
        "early-time Ehrenfest push",
        pass,
        &format!("<x>({t_end:.2} us) = {x_mean:.5} vs -nu Omega t^2 / (2 sqrt 2) = {predicted:.5}, rel err {rel:.3}"),
    );
    assert!(pass);
}

fn centroid_angle(dist: &tomography::SpatialGrid) -> f64 {
    let xs = dist.spec.axis();
    let mut cx = 0.0;
    let mut cy = 0.0;
    for i in 0..dist.spec.resolution {
        for j in 0..dist.spec.resolution {
            cx += xs[i] * dist.values[(i, j)];
            cy += xs[j] * dist.values[(i, j)];
        }
    }
    cy.atan2(cx)
}

#[test]
fn criterion_8_avoided_crossing_rotation() {
    let spec = GridSpec::default();
    let baseline = tomography::position_distribution(&crescent_run().final_state, &spec);
    let a0 = centroid_angle(&baseline);

    let delta = TAU * 0.7e-3;
    let p = ModelParams { delta, ..operating_point() };
    let initial = SpinBosonState::plus_vacuum(operating_space());
    let rotated_run = dynamics::trotter_evolve(&initial, &p, &exact_schedule()).unwrap();
    let rotated = tomography::position_distribution(&rotated_run.final_state, &spec);
    let a1 = centroid_angle(&rotated);

    let diff = (a1 - a0).rem_euclid(TAU);
    let dtheta = if diff > PI { diff - TAU } else { diff };
    let predicted = delta * TAU_US;
    let rel = (dtheta.abs() - predicted).abs() / predicted;
    let pass = rel <= 0.20;
    report(
        8,
        "avoided-crossing rotation",
        pass,
        &format!(
            "centroid rotated by {dtheta:.4} rad vs Delta tau = {predicted:.4} rad \
             (first order), rel dev {rel:.3}"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_9_open_system_sanity() {
    // a smaller space keeps the density-matrix integration inside the
    // suite's time budget; the physics checks are truncation-independent
    let space = ModeSpace::new(10, 10);
    let p = operating_point();
    let mut schedule = RampSchedule::new(TAU_US, 16, TrotterScheme::ExactSimultaneous);
    schedule.exact_substeps = 256;
    schedule.trajectory_samples = 0;
    let initial = SpinBosonState::plus_vacuum(space);
    let unitary = dynamics::trotter_evolve(&initial, &p, &schedule).unwrap().final_state;

    let rho0 = DensityMatrix::from_pure(&initial);
    let zero_rate = LindbladSpec { steps: 2000, ..Default::default() };
    let closed = dynamics::lindblad_evolve(&rho0, &p, &schedule, &zero_rate).unwrap();
    let trace_drift = (closed.final_state.trace().re - 1.0).abs();
    let min_eig = closed.final_state.min_eigenvalue().unwrap();
    let f = fock::fidelity_state_density(&unitary, &closed.final_state).unwrap();

    // heating + dephasing at laboratory scales (about 1 quantum/s and the
    // inverse of the 8 ms motional dephasing time)
    let noisy_spec = LindbladSpec {
        terms: vec![
            (CollapseOp::RaiseX, 1e-6),
            (CollapseOp::RaiseY, 1e-6),
            (CollapseOp::NumberX, 1.25e-4),
            (CollapseOp::NumberY, 1.25e-4),
        ],
        steps: 2000,
        ..Default::default()
    };
    let noisy = dynamics::lindblad_evolve(&rho0, &p, &schedule, &noisy_spec).unwrap();
    let noisy_trace_drift = (noisy.final_state.trace().re - 1.0).abs();
    let noisy_min_eig = noisy.final_state.min_eigenvalue().unwrap();

    let pass = trace_drift <= 1e-7
        && noisy_trace_drift <= 1e-7
        && min_eig >= -1e-5
        && noisy_min_eig >= -1e-5
        && 1.0 - f <= 1e-6;
    report(
        9,
        "open-system sanity",
        pass,
        &format!(
            "trace drift {trace_drift:.2e} / {noisy_trace_drift:.2e} (<= 1e-7), \
             min eigenvalue {min_eig:.2e} / {noisy_min_eig:.2e} (>= -1e-5), \
             zero-rate fidelity 1 - {:.2e}",
            1.0 - f
        ),
    );
    assert!(pass);
}

// 8-point Gauss-Hermite rule for integrals against e^{-x^2}
const GH_NODES: [f64; 8] = [
    -2.930637420257244,
    -1.981656756695843,
    -1.157193712446780,
    -0.381186990207322,
    0.381186990207322,
    1.157193712446780,
    1.981656756695843,
    2.930637420257244,
];
const GH_WEIGHTS: [f64; 8] = [
    1.996040722113676e-4,
    1.707798300741348e-2,
    2.078023258148919e-1,
    6.611470125582413e-1,
    6.611470125582413e-1,
    2.078023258148919e-1,
    1.707798300741348e-2,
    1.996040722113676e-4,
];

#[test]
fn criterion_10_offresonant_envelope() {
    // push on mode x (resonant) with mode y detuned by Delta and thermal;
    // brute-force two-mode simulation against the closed-form envelope
    let delta = TAU * 5e-3; // 2pi x 5 kHz
    let eta2_omega = TAU * 2e-3; // 2pi x 2 kHz
    let eta1_omega = TAU * 0.3e-3;
    let n_bar: f64 = 0.25;
    let sigma2 = n_bar + 0.5; // thermal position variance
    let beat = TAU / delta;

    let space = ModeSpace::new(8, 26);
    let sx_x = fock::pauli(space, fock::Pauli::X)
        .matmul(&models::quadrature(space, fock::Mode::X));
    let ay = fock::ladder(space, fock::Mode::Y, fock::LadderKind::Lower);
    let ay_dag = fock::ladder(space, fock::Mode::Y, fock::LadderKind::Raise);
    let sx = fock::pauli(space, fock::Pauli::X);
    let sz = fock::pauli(space, fock::Pauli::Z);

    let substeps = 400;
    let samples = 10;
    // thermal mode-y state as a Gaussian mixture of coherent states
    // (P representation), 8 x 8 = 64 Gauss-Hermite samples
    let mut signal = vec![0.0f64; samples + 1];
    let mut weight_total = 0.0;
    for (iu, &xu) in GH_NODES.iter().enumerate() {
        for (iv, &xv) in GH_NODES.iter().enumerate() {
            let weight = GH_WEIGHTS[iu] * GH_WEIGHTS[iv] / std::f64::consts::PI;
            let alpha = C64::new(n_bar.sqrt() * xu, n_bar.sqrt() * xv);
            let cx = fock::coherent_coefficients(space.n_max_x, C64::new(0.0, 0.0));
            let cy = fock::coherent_coefficients(space.n_max_y, alpha);
            let initial = SpinBosonState::product(
                space,
                [C64::new(1.0, 0.0), C64::new(0.0, 0.0)], // sigma_z = +1 ancilla
                &cx,
                &cy,
            )
            .unwrap();
            let run = dynamics::evolve_piecewise(
                &initial,
                |t| {
                    let (c, s) = ((delta * t).cos(), (delta * t).sin());
                    // (eta2 W/2) sx (ay e^{-i d t} + h.c.) =
                    // (eta2 W/2) sx [(ay + ay^dag) cos + i(ay - ay^dag) sin]
                    let beat_quad = &(&(&ay + &ay_dag) * c)
                        + &(&(&ay - &ay_dag) * C64::new(0.0, s));
                    &(&sx_x * (eta1_omega / 2.0))
                        + &(&sx.matmul(&beat_quad) * (eta2_omega / 2.0))
                },
                beat,
                substeps,
                samples,
                |_| 0.0,
            )
            .unwrap();
            weight_total += weight;
            for (idx, sample) in run.trajectory.iter().enumerate() {
                signal[idx] += weight * sample.state.expectation(&sz).unwrap().re;
            }
        }
    }
    for v in &mut signal {
        *v /= weight_total;
    }

    let mut worst_rel = 0.0f64;
    let mut rows = Vec::new();
    for j in 1..=samples {
        let t = beat * j as f64 / samples as f64;
        // divide out the resonant-mode vacuum factor to isolate the envelope
        let k1 = 2f64.sqrt() * eta1_omega * t;
        let chi1 = (-k1 * k1 / 4.0).exp();
        let simulated = signal[j] / chi1;
        let formula = tomography::offresonant_envelope(sigma2.sqrt(), eta2_omega, delta, t)
            .unwrap();
        let rel = (simulated - formula).abs() / formula;
        worst_rel = worst_rel.max(rel);
        rows.push(format!("t={t:.0}: sim {simulated:.4} formula {formula:.4}"));
    }
    let pass = worst_rel <= 0.05;
    report(
        10,
        "off-resonant envelope",
        pass,
        &format!("max rel dev {worst_rel:.4} over 10 points across one beat; {}", rows.join("; ")),
    );
    assert!(pass);
}

#[test]
fn criterion_11_determinism() {
    let base = std::env::temp_dir().join(format!("vibronic-acceptance-{}", std::process::id()));
    let mut cfg = ExperimentConfig::default();
    cfg.seed = 20260809;
    cfg.truncation.n_max_x = 8;
    cfg.truncation.n_max_y = 8;
    cfg.schedule.exact_substeps = 200;
    cfg.schedule.trajectory_samples = 16;
    cfg.tomography.points = 9;
    cfg.tomography.k_max = 2.0;
    cfg.tomography.grid_resolution = 41;
    cfg.tomography.rotation_deg = 49.0;
    cfg.tomography.shots = 100;

    let mut artifacts: Vec<std::collections::BTreeMap<String, Vec<u8>>> = Vec::new();
    for run_idx in 0..2 {
        let dir = base.join(format!("run{run_idx}"));
        let mut c = cfg.clone();
        c.output.directory = dir.clone();
        vibronic_cli::runner::run_tomo(&c).unwrap();
        vibronic_cli::runner::run_evolve(&c).unwrap();
        let mut files = std::collections::BTreeMap::new();
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            let name = path.file_name().unwrap().to_string_lossy().to_string();
            if name.ends_with(".csv") {
                files.insert(name, std::fs::read(&path).unwrap());
            }
        }
        artifacts.push(files);
    }
    let names: Vec<&String> = artifacts[0].keys().collect();
    let mut identical = artifacts[0].len() == artifacts[1].len() && !artifacts[0].is_empty();
    for name in &names {
        identical &= artifacts[1].get(*name) == artifacts[0].get(*name);
    }
    report(
        11,
        "determinism",
        identical,
        &format!(
            "{} CSV artifacts bit-identical across two seeded runs",
            artifacts[0].len()
        ),
    );
    std::fs::remove_dir_all(&base).ok();
    assert!(identical);
}
