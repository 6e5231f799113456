//! Time evolution engines: exact piecewise-constant propagation, the
//! experiment's four-step Trotter protocol, Lindblad open-system
//! integration, and adiabaticity diagnostics.
//!
//! Scheduled amplitudes are pulse amplitudes (see [`RampSchedule`]); the
//! `ExactSimultaneous` reference evolves the duty-cycle-averaged
//! Hamiltonian so that the Trotterized protocol converges to it.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{self, DensityMatrix, Mode, ModeSpace, Operator, Pauli, SpinBosonState};
use crate::linalg::{self, CMat, CVec, CsrMatrix};
use crate::models::{self, ModelParams, RampSchedule, TrotterScheme};

/// Population threshold in the top two Fock levels of either mode before a
/// run aborts with `TruncationLeak`.
pub const TRUNCATION_LEAK_THRESHOLD: f64 = 1e-4;

/// Krylov residual tolerance for propagator actions.
const KRYLOV_TOL: f64 = 1e-12;
const KRYLOV_MAX_DIM: usize = 120;

/// One sampled point of a trajectory. `coupling_scale` is the effective
/// simultaneous coupling scale at the sample time (used by the Ehrenfest
/// diagnostic).
#[derive(Debug, Clone)]
pub struct TrajectorySample<S> {
    pub t: f64,
    pub coupling_scale: f64,
    pub state: S,
}

#[derive(Debug, Clone, Default)]
pub struct Diagnostics {
    /// |norm - 1| (pure runs) or |trace - 1| (density runs) per sample.
    pub norm_drift: Vec<f64>,
    /// Population in the top two Fock levels of either mode, per sample.
    pub truncation_leak: Vec<f64>,
}

impl Diagnostics {
    pub fn max_norm_drift(&self) -> f64 {
        self.norm_drift.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_truncation_leak(&self) -> f64 {
        self.truncation_leak.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct EvolutionResult<S> {
    pub final_state: S,
    pub trajectory: Vec<TrajectorySample<S>>,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepMethod {
    /// Scaling-and-squaring matrix exponential on the dense matrix.
    Dense,
    /// Lanczos action of the exponential, no dense conversion.
    Krylov,
    /// Dense up to dimension 4096, Krylov beyond.
    Auto,
}

/// Apply exp(-i H dt) to the state.
pub fn exact_step(state: &SpinBosonState, h: &Operator, dt: f64) -> Result<SpinBosonState> {
    exact_step_with(state, h, dt, StepMethod::Auto)
}

pub fn exact_step_with(
    state: &SpinBosonState,
    h: &Operator,
    dt: f64,
    method: StepMethod,
) -> Result<SpinBosonState> {
    if h.dim() != state.amplitudes().len() {
        return Err(Error::DimensionMismatch(h.dim(), state.amplitudes().len()));
    }
    debug_assert!(h.hermiticity_error() <= 1e-10, "exact_step needs Hermitian H");
    let use_dense = match method {
        StepMethod::Dense => true,
        StepMethod::Krylov => false,
        StepMethod::Auto => h.dim() <= 4096,
    };
    let amps = if use_dense {
        let gen = h.to_dense().mapv(|z| z * C64::new(0.0, -dt));
        linalg::expm(&gen).dot(state.amplitudes())
    } else {
        linalg::expm_action_hermitian(
            |v| h.apply(v),
            state.amplitudes(),
            dt,
            KRYLOV_TOL,
            KRYLOV_MAX_DIM,
        )?
    };
    Ok(raw_state(state.space, amps))
}

/// Wrap amplitudes without renormalizing; norm drift is a diagnostic.
fn raw_state(space: ModeSpace, amplitudes: CVec) -> SpinBosonState {
    let mut st = SpinBosonState::basis_state(space, 0, 0, 0);
    *st.amplitudes_mut() = amplitudes;
    st
}

struct SampleRecorder<'a> {
    stride: usize,
    scale_at: &'a dyn Fn(f64) -> f64,
    trajectory: Vec<TrajectorySample<SpinBosonState>>,
    diagnostics: Diagnostics,
}

impl<'a> SampleRecorder<'a> {
    fn new(total_steps: usize, samples: usize, scale_at: &'a dyn Fn(f64) -> f64) -> Self {
        let stride = if samples == 0 {
            usize::MAX
        } else {
            (total_steps / samples).max(1)
        };
        Self { stride, scale_at, trajectory: Vec::new(), diagnostics: Diagnostics::default() }
    }

    /// Check the truncation guard every step; record on the sample stride.
    fn record(&mut self, step: usize, total: usize, t: f64, state: &SpinBosonState) -> Result<()> {
        let leak = state.truncation_leak();
        if leak >= TRUNCATION_LEAK_THRESHOLD {
            return Err(Error::TruncationLeak { t, population: leak });
        }
        let is_sample =
            step == total || (self.stride != usize::MAX && step % self.stride == 0);
        if is_sample {
            self.diagnostics.norm_drift.push((state.norm() - 1.0).abs());
            self.diagnostics.truncation_leak.push(leak);
            self.trajectory.push(TrajectorySample {
                t,
                coupling_scale: (self.scale_at)(t),
                state: state.clone(),
            });
        }
        Ok(())
    }
}

/// Piecewise-constant evolution under a time-dependent Hamiltonian,
/// midpoint-sampled, propagated by Krylov exponential actions.
///
/// `scale_at` annotates trajectory samples with the effective simultaneous
/// coupling scale (pass the schedule's scale for ramps, a constant closure
/// otherwise).
pub fn evolve_piecewise<H, S>(
    initial: &SpinBosonState,
    h_at: H,
    total_time: f64,
    substeps: usize,
    samples: usize,
    scale_at: S,
) -> Result<EvolutionResult<SpinBosonState>>
where
    H: Fn(f64) -> Operator,
    S: Fn(f64) -> f64,
{
    assert!(substeps > 0 && total_time > 0.0);
    let dt = total_time / substeps as f64;
    let mut state = initial.clone();
    let mut rec = SampleRecorder::new(substeps, samples, &scale_at);
    rec.record(0, substeps, 0.0, &state)?;
    for k in 0..substeps {
        let t_mid = (k as f64 + 0.5) * dt;
        let h = h_at(t_mid);
        let amps = linalg::expm_action_hermitian(
            |v| h.apply(v),
            state.amplitudes(),
            dt,
            KRYLOV_TOL,
            KRYLOV_MAX_DIM,
        )?;
        state = raw_state(state.space, amps);
        rec.record(k + 1, substeps, (k + 1) as f64 * dt, &state)?;
    }
    Ok(EvolutionResult {
        final_state: state,
        trajectory: rec.trajectory,
        diagnostics: rec.diagnostics,
    })
}

/// Diagonal phase factors exp(-i dt (nu N + (delta/2) sigma_z)).
fn oscillator_phases(space: ModeSpace, p: &ModelParams, dt: f64) -> CVec {
    let mut out = CVec::zeros(space.dim());
    for i in 0..space.dim() {
        let (s, nx, ny) = space.unindex(i);
        let sz = if s == 0 { 1.0 } else { -1.0 };
        let phase = dt * (p.nu * (nx + ny) as f64 + 0.5 * p.delta * sz);
        out[i] = (-C64::i() * phase).exp();
    }
    out
}

/// Cached eigenbasis of a push generator sigma_axis (x) (a + a^dag): push
/// steps become two dense matvecs and a diagonal phase for any amplitude.
struct PushPropagator {
    basis: CMat,
    basis_dag: CMat,
    eigenvalues: Vec<f64>,
}

impl PushPropagator {
    fn new(space: ModeSpace, mode: Mode, axis: Pauli) -> Result<Self> {
        let gen = fock::pauli(space, axis).matmul(&models::quadrature(space, mode));
        let (vals, vecs) = linalg::eigh(&gen.to_dense())?;
        let basis_dag = vecs.t().mapv(|z| z.conj());
        Ok(Self { basis: vecs, basis_dag, eigenvalues: vals.to_vec() })
    }

    /// Apply exp(-i theta sigma (a + a^dag)).
    fn apply(&self, theta: f64, amps: &CVec) -> CVec {
        let mut coeffs = self.basis_dag.dot(amps);
        for (c, &lam) in coeffs.iter_mut().zip(self.eigenvalues.iter()) {
            *c *= (-C64::i() * theta * lam).exp();
        }
        self.basis.dot(&coeffs)
    }
}

/// Run the scheduled evolution from `initial` (the experiment prepares
/// |+> (x) vacuum).
///
/// `FirstOrderSplit` is the laboratory protocol: N rounds of
/// [oscillator phase d] [x-push d] [oscillator phase d] [y-push d] with
/// d = tau/2N and per-round pulse amplitude Omega_k = Omega r_k. `Strang`
/// symmetrizes the round to second order. `ExactSimultaneous` is the
/// piecewise-constant duty-cycle-averaged Hamiltonian of the same ramp.
pub fn trotter_evolve(
    initial: &SpinBosonState,
    p: &ModelParams,
    schedule: &RampSchedule,
) -> Result<EvolutionResult<SpinBosonState>> {
    p.validate()?;
    schedule.validate()?;
    let space = initial.space;
    match schedule.scheme {
        TrotterScheme::ExactSimultaneous => {
            let sched = *schedule;
            let params = *p;
            evolve_piecewise(
                initial,
                move |t| models::build_jahn_teller(space, &params, sched.simultaneous_scale(t)),
                schedule.total_time,
                schedule.exact_substeps,
                schedule.trajectory_samples,
                |t| schedule.simultaneous_scale(t),
            )
        }
        TrotterScheme::FirstOrderSplit | TrotterScheme::Strang => {
            trotter_rounds(initial, p, schedule)
        }
    }
}

fn trotter_rounds(
    initial: &SpinBosonState,
    p: &ModelParams,
    schedule: &RampSchedule,
) -> Result<EvolutionResult<SpinBosonState>> {
    let space = initial.space;
    let n = schedule.rounds;
    let round_time = schedule.total_time / n as f64;
    let delta_step = schedule.total_time / (2.0 * n as f64);

    let push_x = PushPropagator::new(space, Mode::X, Pauli::X)?;
    let push_y = PushPropagator::new(space, Mode::Y, Pauli::Y)?;
    // spin splitting advances with the oscillator phases (diagonal terms)
    let osc_full = oscillator_phases(space, p, delta_step);
    let osc_half = oscillator_phases(space, p, delta_step / 2.0);

    let scale_at = |t: f64| schedule.simultaneous_scale(t);
    let mut rec = SampleRecorder::new(n, schedule.trajectory_samples, &scale_at);
    let mut amps = initial.amplitudes().clone();
    rec.record(0, n, 0.0, &raw_state(space, amps.clone()))?;

    for k in 0..n {
        // push angle: pulse amplitude Omega_k over duration d with the
        // (Omega/2) coupling convention of the split Hamiltonians
        let omega_k = p.effective_omega() * schedule.round_fraction(k);
        let theta = delta_step * omega_k / 2.0;
        match schedule.scheme {
            TrotterScheme::FirstOrderSplit => {
                amps = mul_diag(&osc_full, &amps);
                amps = push_x.apply(theta, &amps);
                amps = mul_diag(&osc_full, &amps);
                amps = push_y.apply(theta, &amps);
            }
            TrotterScheme::Strang => {
                // palindromic round: half x-pushes around the y-push
                amps = mul_diag(&osc_half, &amps);
                amps = push_x.apply(theta / 2.0, &amps);
                amps = mul_diag(&osc_half, &amps);
                amps = push_y.apply(theta, &amps);
                amps = mul_diag(&osc_half, &amps);
                amps = push_x.apply(theta / 2.0, &amps);
                amps = mul_diag(&osc_half, &amps);
            }
            TrotterScheme::ExactSimultaneous => unreachable!(),
        }
        let state = raw_state(space, amps.clone());
        rec.record(k + 1, n, (k + 1) as f64 * round_time, &state)?;
        amps = state.amplitudes().clone();
    }

    Ok(EvolutionResult {
        final_state: raw_state(space, amps),
        trajectory: rec.trajectory,
        diagnostics: rec.diagnostics,
    })
}

fn mul_diag(diag: &CVec, v: &CVec) -> CVec {
    let mut out = v.clone();
    out.iter_mut().zip(diag.iter()).for_each(|(o, d)| *o *= d);
    out
}

/// Collapse channels of the Lindblad master equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CollapseOp {
    LowerX,
    RaiseX,
    NumberX,
    LowerY,
    RaiseY,
    NumberY,
}

impl CollapseOp {
    pub fn build(self, space: ModeSpace) -> Operator {
        use fock::LadderKind::{Lower, Raise};
        match self {
            CollapseOp::LowerX => fock::ladder(space, Mode::X, Lower),
            CollapseOp::RaiseX => fock::ladder(space, Mode::X, Raise),
            CollapseOp::NumberX => fock::number(space, Mode::X),
            CollapseOp::LowerY => fock::ladder(space, Mode::Y, Lower),
            CollapseOp::RaiseY => fock::ladder(space, Mode::Y, Raise),
            CollapseOp::NumberY => fock::number(space, Mode::Y),
        }
    }
}

/// Collapse operators with rates (per time unit) plus integrator knobs.
#[derive(Debug, Clone)]
pub struct LindbladSpec {
    pub terms: Vec<(CollapseOp, f64)>,
    /// Fixed RK4 step count over the full run.
    pub steps: usize,
    /// Positivity is checked by full diagonalization every this many steps.
    pub positivity_interval: usize,
}

impl Default for LindbladSpec {
    fn default() -> Self {
        Self { terms: Vec::new(), steps: 2000, positivity_interval: 50 }
    }
}

impl LindbladSpec {
    pub fn validate(&self) -> Result<()> {
        if self.terms.iter().any(|(_, g)| !g.is_finite() || *g < 0.0) {
            return Err(Error::GridMismatch("collapse rates must be finite and >= 0".into()));
        }
        if self.steps == 0 {
            return Err(Error::GridMismatch("lindblad integration needs steps > 0".into()));
        }
        Ok(())
    }
}

struct LindbladTerm {
    rate: f64,
    l: CsrMatrix,
    l_dag: CsrMatrix,
    l_dag_l: CsrMatrix,
}

/// Integrate rho' = -i[H_noisy(t), rho] + 1/2 sum_j gamma_j (2 L rho L^dag
/// - L^dag L rho - rho L^dag L) with fixed-step RK4 over the schedule's
/// ramp, re-symmetrizing each step.
pub fn lindblad_evolve(
    initial: &DensityMatrix,
    p: &ModelParams,
    schedule: &RampSchedule,
    noise: &LindbladSpec,
) -> Result<EvolutionResult<DensityMatrix>> {
    p.validate()?;
    schedule.validate()?;
    noise.validate()?;
    let space = initial.space;
    let terms: Vec<LindbladTerm> = noise
        .terms
        .iter()
        .filter(|(_, g)| *g > 0.0)
        .map(|(op, g)| {
            let l = op.build(space).csr().clone();
            let l_dag = l.dagger();
            let l_dag_l = l_dag.matmul(&l);
            LindbladTerm { rate: *g, l, l_dag, l_dag_l }
        })
        .collect();

    let h_of = |t: f64| -> CsrMatrix {
        models::build_noisy(space, p, schedule.simultaneous_scale(t), t)
            .csr()
            .clone()
    };

    let steps = noise.steps;
    let dt = schedule.total_time / steps as f64;
    let mut rho = initial.matrix.clone();

    let rhs = |h: &CsrMatrix, rho: &CMat| -> CMat {
        let h_rho = h.mul_dense(rho);
        let rho_h = h.mul_dense_left(rho);
        let mut out = (&h_rho - &rho_h).mapv(|z| z * C64::new(0.0, -1.0));
        for term in &terms {
            let l_rho = term.l.mul_dense(rho);
            let l_rho_ldag = term.l_dag.mul_dense_left(&l_rho);
            let anti = term.l_dag_l.mul_dense(rho);
            let anti2 = term.l_dag_l.mul_dense_left(rho);
            out = out
                + (l_rho_ldag - (anti + anti2).mapv(|z| z * 0.5)).mapv(|z| z * term.rate);
        }
        out
    };

    let stride = if schedule.trajectory_samples == 0 {
        usize::MAX
    } else {
        (steps / schedule.trajectory_samples).max(1)
    };
    let mut trajectory: Vec<TrajectorySample<DensityMatrix>> = Vec::new();
    let mut diagnostics = Diagnostics::default();

    for k in 0..steps {
        let t = k as f64 * dt;
        let h0 = h_of(t);
        let h_mid = h_of(t + dt / 2.0);
        let h_end = h_of(t + dt);

        let k1 = rhs(&h0, &rho);
        let k2 = rhs(&h_mid, &(&rho + &k1.mapv(|z| z * (dt / 2.0))));
        let k3 = rhs(&h_mid, &(&rho + &k2.mapv(|z| z * (dt / 2.0))));
        let k4 = rhs(&h_end, &(&rho + &k3.mapv(|z| z * dt)));
        rho = &rho
            + &(k1 + k2.mapv(|z| z * 2.0) + k3.mapv(|z| z * 2.0) + k4).mapv(|z| z * (dt / 6.0));
        rho = (&rho + &rho.t().mapv(|z| z.conj())).mapv(|z| z * 0.5);

        let t_next = (k + 1) as f64 * dt;
        let trace = rho.diag().sum().re;
        if (trace - 1.0).abs() > 1e-7 {
            return Err(Error::TraceDrift((trace - 1.0).abs()));
        }
        if (k + 1) % noise.positivity_interval == 0 {
            let (vals, _) = linalg::eigh(&rho)?;
            if vals[0] < -1e-5 {
                return Err(Error::PositivityViolation { t: t_next, min_eigenvalue: vals[0] });
            }
        }
        let current = DensityMatrix { space, matrix: rho.clone() };
        let leak = current.truncation_leak();
        if leak >= TRUNCATION_LEAK_THRESHOLD {
            return Err(Error::TruncationLeak { t: t_next, population: leak });
        }
        if (k + 1) % stride == 0 || k + 1 == steps {
            diagnostics.norm_drift.push((trace - 1.0).abs());
            diagnostics.truncation_leak.push(leak);
            trajectory.push(TrajectorySample {
                t: t_next,
                coupling_scale: schedule.simultaneous_scale(t_next),
                state: current,
            });
        }
    }

    Ok(EvolutionResult {
        final_state: DensityMatrix { space, matrix: rho },
        trajectory,
        diagnostics,
    })
}

/// The adiabatic-condition figure of merit of the ramp Hamiltonian at time
/// `t`: the largest |<n| dH/dt |m>| / gap^2 over the ground and first
/// `n_excited` eigensubspaces (grouped to 1e-9), skipping symmetry-forbidden
/// pairs (elements below 1e-12).
pub fn adiabaticity_metric(
    space: ModeSpace,
    p: &ModelParams,
    schedule: &RampSchedule,
    t: f64,
    n_excited: usize,
) -> Result<f64> {
    let h = models::build_jahn_teller(space, p, schedule.simultaneous_scale(t));
    let (vals, vecs) = linalg::eigh(&h.to_dense())?;
    // dH/dt of the linear duty-cycle-averaged ramp
    let scale_rate = 0.5 / schedule.total_time;
    let dh_gen = &fock::pauli(space, Pauli::X).matmul(&models::quadrature(space, Mode::X))
        + &fock::pauli(space, Pauli::Y).matmul(&models::quadrature(space, Mode::Y));
    let dh = dh_gen.scaled(C64::new(scale_rate * p.effective_omega() / 2.0, 0.0));

    let dh_v = dh.csr().mul_dense(&vecs);
    let m = linalg::matmul(&vecs.t().mapv(|z| z.conj()).to_owned(), &dh_v);

    let mut groups: Vec<(f64, Vec<usize>)> = Vec::new();
    for (i, &v) in vals.iter().enumerate() {
        match groups.last_mut() {
            Some((v0, members)) if (v - *v0).abs() < 1e-9 => members.push(i),
            _ => groups.push((v, vec![i])),
        }
    }
    let n_groups = groups.len().min(n_excited + 1);

    let mut metric = 0.0f64;
    for gi in 0..n_groups {
        for gj in 0..n_groups {
            if gi == gj {
                continue;
            }
            let gap = (groups[gi].0 - groups[gj].0).abs();
            let mut coupling = 0.0f64;
            for &i in &groups[gi].1 {
                for &j in &groups[gj].1 {
                    coupling = coupling.max(m[(i, j)].norm());
                }
            }
            if coupling < 1e-12 {
                continue;
            }
            if gap < 1e-9 {
                return Err(Error::DegenerateGap { gap, coupling });
            }
            metric = metric.max(coupling / (gap * gap));
        }
    }
    Ok(metric)
}

/// <L_z + sigma_z/2> at each trajectory sample.
pub fn conserved_j_series(result: &EvolutionResult<SpinBosonState>) -> Vec<f64> {
    if result.trajectory.is_empty() {
        return Vec::new();
    }
    let space = result.trajectory[0].state.space;
    let j = models::conserved_j(space);
    result
        .trajectory
        .iter()
        .map(|s| s.state.expectation(&j).expect("dimensions agree").re)
        .collect()
}

/// Second-difference residuals of the Ehrenfest equations of motion
/// <x''> = -nu^2 <x> - (Omega_inst nu / sqrt 2) <sigma_x> (and y with
/// sigma_y), where Omega_inst is the sampled effective coupling.
#[derive(Debug, Clone)]
pub struct EhrenfestResidual {
    pub times: Vec<f64>,
    pub x_residual: Vec<f64>,
    pub y_residual: Vec<f64>,
    /// max |residual| / (nu^2 max |<x>|), the reported figure of merit
    pub normalized_max: f64,
}

pub fn ehrenfest_residual(
    result: &EvolutionResult<SpinBosonState>,
    p: &ModelParams,
) -> Result<EhrenfestResidual> {
    let traj = &result.trajectory;
    if traj.len() < 3 {
        return Err(Error::InsufficientSampling(format!(
            "need at least 3 samples, got {}",
            traj.len()
        )));
    }
    let h = traj[1].t - traj[0].t;
    for w in traj.windows(2) {
        if ((w[1].t - w[0].t) - h).abs() > 1e-9 * h.max(1.0) {
            return Err(Error::InsufficientSampling("trajectory stride is not uniform".into()));
        }
    }
    let period = std::f64::consts::TAU / p.nu;
    if period / h < 40.0 {
        return Err(Error::InsufficientSampling(format!(
            "{:.1} samples per oscillator period; need >= 40",
            period / h
        )));
    }

    let space = traj[0].state.space;
    let x_op = fock::position(space, Mode::X);
    let y_op = fock::position(space, Mode::Y);
    let sx = fock::pauli(space, Pauli::X);
    let sy = fock::pauli(space, Pauli::Y);
    let expect = |s: &SpinBosonState, op: &Operator| s.expectation(op).expect("dims agree").re;

    let xs: Vec<f64> = traj.iter().map(|s| expect(&s.state, &x_op)).collect();
    let ys: Vec<f64> = traj.iter().map(|s| expect(&s.state, &y_op)).collect();
    let sxs: Vec<f64> = traj.iter().map(|s| expect(&s.state, &sx)).collect();
    let sys: Vec<f64> = traj.iter().map(|s| expect(&s.state, &sy)).collect();

    let mut times = Vec::new();
    let mut rx = Vec::new();
    let mut ry = Vec::new();
    for k in 1..traj.len() - 1 {
        let om_inst = p.effective_omega() * traj[k].coupling_scale;
        let acc_x = (xs[k + 1] - 2.0 * xs[k] + xs[k - 1]) / (h * h);
        let acc_y = (ys[k + 1] - 2.0 * ys[k] + ys[k - 1]) / (h * h);
        let rhs_x = -p.nu * p.nu * xs[k] - om_inst * p.nu / 2f64.sqrt() * sxs[k];
        let rhs_y = -p.nu * p.nu * ys[k] - om_inst * p.nu / 2f64.sqrt() * sys[k];
        times.push(traj[k].t);
        rx.push(acc_x - rhs_x);
        ry.push(acc_y - rhs_y);
    }
    let x_extent = xs.iter().map(|v| v.abs()).fold(0.0f64, f64::max);
    let y_extent = ys.iter().map(|v| v.abs()).fold(0.0f64, f64::max);
    let extent = x_extent.max(y_extent).max(1e-300);
    let worst = rx.iter().chain(ry.iter()).map(|v| v.abs()).fold(0.0, f64::max);
    Ok(EhrenfestResidual {
        times,
        x_residual: rx,
        y_residual: ry,
        normalized_max: worst / (p.nu * p.nu * extent),
    })
}

/// Orthonormal eigenbasis of the conserved charge restricted to eigenvalues
/// within `tol` of `value` (for sector-population checks).
pub fn conserved_sector_basis(space: ModeSpace, value: f64, tol: f64) -> Result<Vec<CVec>> {
    let j = models::conserved_j(space);
    let (vals, vecs) = linalg::eigh(&j.to_dense())?;
    Ok(vals
        .iter()
        .enumerate()
        .filter(|(_, v)| (**v - value).abs() < tol)
        .map(|(i, _)| vecs.column(i).to_owned())
        .collect())
}
