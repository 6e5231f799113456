//! Hamiltonian builders: the Jahn-Teller model, its Trotter split parts,
//! the noisy laboratory variant, the no-intersection control, and the
//! semiclassical surfaces and spin eigenstates.
//!
//! Frequencies are angular (rad per time unit) and times use the same unit;
//! the CLI feeds rad/us and us. Positions are dimensionless.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{self, LadderKind, Mode, ModeSpace, Operator, Pauli};

/// Physical parameters of the model Hamiltonians.
///
/// `delta` is the spin splitting of the avoided-crossing variant, `delta_z`
/// the laser detuning error and `delta_xy` the mode splitting of the noisy
/// Hamiltonian. `eta_omega_scale` folds the Lamb-Dicke factor into an
/// effective drive amplitude; `cross_coupling` switches the x/y
/// cross-coupling terms of the noisy Hamiltonian.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ModelParams {
    pub nu: f64,
    pub omega: f64,
    pub delta: f64,
    pub delta_z: f64,
    pub delta_xy: f64,
    pub eta_omega_scale: f64,
    pub cross_coupling: bool,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            nu: 1.0,
            omega: 0.0,
            delta: 0.0,
            delta_z: 0.0,
            delta_xy: 0.0,
            eta_omega_scale: 1.0,
            cross_coupling: false,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.nu, self.omega, self.delta, self.delta_z, self.delta_xy,
            self.eta_omega_scale]
        .iter()
        .all(|v| v.is_finite());
        if !finite || self.nu <= 0.0 || self.omega < 0.0 {
            return Err(Error::GridMismatch(format!(
                "invalid model parameters: nu = {}, omega = {}",
                self.nu, self.omega
            )));
        }
        Ok(())
    }

    /// Drive amplitude with the Lamb-Dicke factor folded in.
    pub fn effective_omega(&self) -> f64 {
        self.omega * self.eta_omega_scale
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RampShape {
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmplitudeRule {
    Midpoint,
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrotterScheme {
    FirstOrderSplit,
    Strang,
    ExactSimultaneous,
}

/// Time grid and amplitude schedule of the adiabatic ramp.
///
/// Amplitudes are *pulse* amplitudes: in the four-step protocol each mode's
/// push is on for half the wall time, so the simultaneous-coupling
/// equivalent of pulse amplitude `omega * r(t)` is half that value. The
/// `ExactSimultaneous` scheme evolves that duty-cycle-averaged Hamiltonian
/// piecewise-constantly; `exact_substeps` sets its resolution.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RampSchedule {
    pub total_time: f64,
    pub rounds: usize,
    pub ramp_shape: RampShape,
    pub amplitude_rule: AmplitudeRule,
    pub scheme: TrotterScheme,
    pub exact_substeps: usize,
    pub trajectory_samples: usize,
}

impl RampSchedule {
    pub fn new(total_time: f64, rounds: usize, scheme: TrotterScheme) -> Self {
        Self {
            total_time,
            rounds,
            ramp_shape: RampShape::Linear,
            amplitude_rule: AmplitudeRule::Midpoint,
            scheme,
            exact_substeps: 256,
            trajectory_samples: 64,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.total_time > 0.0) || self.rounds < 1 {
            return Err(Error::GridMismatch(format!(
                "invalid schedule: total_time = {}, rounds = {}",
                self.total_time, self.rounds
            )));
        }
        if self.scheme == TrotterScheme::ExactSimultaneous && self.exact_substeps < 200 {
            return Err(Error::GridMismatch(format!(
                "exact_simultaneous needs at least 200 substeps, got {}",
                self.exact_substeps
            )));
        }
        Ok(())
    }

    /// Ramp fraction r(t) in [0, 1].
    pub fn ramp_fraction(&self, t: f64) -> f64 {
        match self.ramp_shape {
            RampShape::Linear => (t / self.total_time).clamp(0.0, 1.0),
        }
    }

    /// Pulse-amplitude ramp fraction for round `k` of `rounds`.
    pub fn round_fraction(&self, k: usize) -> f64 {
        let round_time = self.total_time / self.rounds as f64;
        let t = match self.amplitude_rule {
            AmplitudeRule::Midpoint => (k as f64 + 0.5) * round_time,
            AmplitudeRule::Left => k as f64 * round_time,
            AmplitudeRule::Right => (k as f64 + 1.0) * round_time,
        };
        self.ramp_fraction(t)
    }

    /// Coupling scale of the duty-cycle-averaged simultaneous Hamiltonian.
    pub fn simultaneous_scale(&self, t: f64) -> f64 {
        0.5 * self.ramp_fraction(t)
    }
}

/// H = nu (n_x + n_y) + (s Omega / 2)(sigma_x X_x + sigma_y X_y)
///     + (Delta / 2) sigma_z, with X = a + a^dag.
pub fn build_jahn_teller(space: ModeSpace, p: &ModelParams, coupling_scale: f64) -> Operator {
    let nu = p.nu;
    let g = coupling_scale * p.effective_omega() / 2.0;
    let osc = &(&fock::number(space, Mode::X) + &fock::number(space, Mode::Y)) * nu;
    let xx = quadrature(space, Mode::X);
    let yy = quadrature(space, Mode::Y);
    let push = &(&fock::pauli(space, Pauli::X).matmul(&xx) * g)
        + &(&fock::pauli(space, Pauli::Y).matmul(&yy) * g);
    let mut h = &osc + &push;
    if p.delta != 0.0 {
        h = &h + &(&fock::pauli(space, Pauli::Z) * (p.delta / 2.0));
    }
    h
}

/// a + a^dag of one mode, embedded.
pub fn quadrature(space: ModeSpace, mode: Mode) -> Operator {
    &fock::ladder(space, mode, LadderKind::Lower)
        + &fock::ladder(space, mode, LadderKind::Raise)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitPart {
    /// H_x = nu n_x + (Omega_x/2) sigma_x (a_x + a_x^dag)
    X,
    /// H_y = nu n_y + (Omega_y/2) sigma_y (a_y + a_y^dag)
    Y,
    /// nu (n_x + n_y)
    Oscillator,
    /// (Omega_x/2) sigma_x (a_x + a_x^dag) alone (the pure push)
    XPush,
    /// (Omega_y/2) sigma_y (a_y + a_y^dag) alone
    YPush,
}

/// One part of the Methods split H_x + H_y = H_ideal (Delta = 0).
pub fn build_split(
    space: ModeSpace,
    p: &ModelParams,
    coupling_scale: f64,
    part: SplitPart,
) -> Operator {
    let g = coupling_scale * p.effective_omega() / 2.0;
    let push = |mode: Mode, axis: Pauli| {
        &fock::pauli(space, axis).matmul(&quadrature(space, mode)) * g
    };
    match part {
        SplitPart::X => &(&fock::number(space, Mode::X) * p.nu) + &push(Mode::X, Pauli::X),
        SplitPart::Y => &(&fock::number(space, Mode::Y) * p.nu) + &push(Mode::Y, Pauli::Y),
        SplitPart::Oscillator => {
            &(&fock::number(space, Mode::X) + &fock::number(space, Mode::Y)) * p.nu
        }
        SplitPart::XPush => push(Mode::X, Pauli::X),
        SplitPart::YPush => push(Mode::Y, Pauli::Y),
    }
}

/// The Supplement's noisy Hamiltonian at time `t`: detuning error
/// (Delta_z/2) sigma_z plus the ideal couplings plus, when
/// `p.cross_coupling`, the x/y cross terms beating at Delta_xy.
pub fn build_noisy(space: ModeSpace, p: &ModelParams, coupling_scale: f64, t: f64) -> Operator {
    let g = coupling_scale * p.effective_omega() / 2.0;
    let osc = &(&fock::number(space, Mode::X) + &fock::number(space, Mode::Y)) * p.nu;
    let sx = fock::pauli(space, Pauli::X);
    let sy = fock::pauli(space, Pauli::Y);
    let xx = quadrature(space, Mode::X);
    let yy = quadrature(space, Mode::Y);
    let mut h = &osc + &(&(&sx.matmul(&xx) + &sy.matmul(&yy)) * g);
    if p.delta_z != 0.0 {
        h = &h + &(&fock::pauli(space, Pauli::Z) * (p.delta_z / 2.0));
    }
    if p.cross_coupling {
        let (c, s) = ((p.delta_xy * t).cos(), (p.delta_xy * t).sin());
        // i(a - a^dag) is Hermitian; these are the quadratures the beating
        // cross terms rotate through
        let i_ay = &(&fock::ladder(space, Mode::Y, LadderKind::Lower)
            - &fock::ladder(space, Mode::Y, LadderKind::Raise))
            * C64::i();
        let i_ax = &(&fock::ladder(space, Mode::X, LadderKind::Lower)
            - &fock::ladder(space, Mode::X, LadderKind::Raise))
            * C64::i();
        let cross_x = &(&yy * c) + &(&i_ay * s);
        let cross_y = &(&xx * c) - &(&i_ax * s);
        h = &h + &(&(&sx.matmul(&cross_x) + &sy.matmul(&cross_y)) * g);
    }
    h
}

/// H = nu (n_x + n_y) - (s Omega / 2) sqrt(X_x^2 + X_y^2): same lower
/// adiabatic surface as the ideal model but no conical intersection and no
/// spin dependence.
pub fn build_non_ci(space: ModeSpace, p: &ModelParams, coupling_scale: f64) -> Result<Operator> {
    let g = coupling_scale * p.effective_omega() / 2.0;
    let osc = &(&fock::number(space, Mode::X) + &fock::number(space, Mode::Y)) * p.nu;
    let xx = quadrature(space, Mode::X);
    let yy = quadrature(space, Mode::Y);
    let r2 = &xx.matmul(&xx) + &yy.matmul(&yy);
    let r = fock::operator_sqrt(&r2)?;
    Ok(&osc - &(&r * g))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Upper,
    Lower,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Upper => 1.0,
            Branch::Lower => -1.0,
        }
    }
}

/// Adiabatic potential surface V+-(x, y). With `delta != 0` the crossing is
/// avoided: V = nu r^2/2 +- sqrt(2 Omega^2 r^2 + Delta^2)/2.
pub fn semiclassical_surface(p: &ModelParams, x: f64, y: f64, branch: Branch) -> f64 {
    let r2 = x * x + y * y;
    let gap = (2.0 * p.omega * p.omega * r2 + p.delta * p.delta).sqrt();
    p.nu / 2.0 * r2 + branch.sign() * gap / 2.0
}

/// Position-dependent spin eigenstate |+-(x, y)> =
/// (|0> +- (x + iy)/r |1>)/sqrt(2). Undefined at the origin.
pub fn spin_eigenstate(x: f64, y: f64, branch: Branch) -> Result<[C64; 2]> {
    let r = (x * x + y * y).sqrt();
    if r < 1e-12 {
        return Err(Error::AtSingularity(r));
    }
    let phase = C64::new(x / r, y / r);
    let w = C64::new(1.0 / 2f64.sqrt(), 0.0);
    Ok([w, phase * w * branch.sign()])
}

/// Orbital angular momentum L_z = i(a_x a_y^dag - a_x^dag a_y).
pub fn orbital_angular_momentum(space: ModeSpace) -> Operator {
    let ax = fock::ladder(space, Mode::X, LadderKind::Lower);
    let ay_d = fock::ladder(space, Mode::Y, LadderKind::Raise);
    let ax_d = fock::ladder(space, Mode::X, LadderKind::Raise);
    let ay = fock::ladder(space, Mode::Y, LadderKind::Lower);
    (&(&ax.matmul(&ay_d) - &ax_d.matmul(&ay))).scaled(C64::i())
}

/// The conserved charge J = L_z + sigma_z / 2 of the symmetric ramp.
pub fn conserved_j(space: ModeSpace) -> Operator {
    &orbital_angular_momentum(space) + &(&fock::pauli(space, Pauli::Z) * 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::SpinBosonState;
    use crate::linalg;

    const TWO_PI: f64 = std::f64::consts::TAU;

    fn operating_point() -> ModelParams {
        // the experiment operating point nu = 2pi x 3 kHz, Omega = 2pi x 6 kHz (rad/us)
        ModelParams {
            nu: TWO_PI * 3e-3,
            omega: TWO_PI * 6e-3,
            ..Default::default()
        }
    }

    #[test]
    fn all_builders_are_hermitian() {
        let sp = ModeSpace::new(6, 6);
        let p = ModelParams {
            delta: 0.1,
            delta_z: 0.05,
            delta_xy: TWO_PI * 5e-3,
            cross_coupling: true,
            ..operating_point()
        };
        for h in [
            build_jahn_teller(sp, &p, 1.0),
            build_split(sp, &p, 0.7, SplitPart::X),
            build_split(sp, &p, 0.7, SplitPart::Y),
            build_noisy(sp, &p, 1.0, 370.0),
            build_non_ci(sp, &p, 1.0).unwrap(),
        ] {
            assert!(h.hermiticity_error() <= 1e-12);
        }
    }

    #[test]
    fn zero_coupling_spectrum_is_oscillator_ladder() {
        let sp = ModeSpace::new(4, 4);
        let p = ModelParams { nu: 1.0, ..Default::default() };
        let h = build_jahn_teller(sp, &p, 0.0);
        let (vals, _) = linalg::eigh(&h.to_dense()).unwrap();
        // every level nu (n_x + n_y), doubly spin-degenerate
        for pair in vals.as_slice().unwrap().chunks(2) {
            assert!((pair[0] - pair[1]).abs() < 1e-12);
            assert!((pair[0] - pair[0].round()).abs() < 1e-12);
        }
    }

    #[test]
    fn split_parts_sum_to_ideal() {
        let sp = ModeSpace::new(5, 5);
        let p = operating_point();
        let h_ideal = build_jahn_teller(sp, &p, 1.0);
        let hx = build_split(sp, &p, 1.0, SplitPart::X);
        let hy = build_split(sp, &p, 1.0, SplitPart::Y);
        assert!((&(&hx + &hy) - &h_ideal).max_abs() < 1e-12);

        let pushes = &(&build_split(sp, &p, 1.0, SplitPart::XPush)
            + &build_split(sp, &p, 1.0, SplitPart::YPush))
            + &build_split(sp, &p, 1.0, SplitPart::Oscillator);
        assert!((&pushes - &h_ideal).max_abs() < 1e-12);
    }

    #[test]
    fn split_parts_do_not_commute() {
        let sp = ModeSpace::new(5, 5);
        let p = operating_point();
        let hx = build_split(sp, &p, 1.0, SplitPart::X);
        let hy = build_split(sp, &p, 1.0, SplitPart::Y);
        assert!(hx.commutator(&hy).max_abs() > 1e-6);
        // the oscillator part commutes with both number operators exactly
        let osc = build_split(sp, &p, 1.0, SplitPart::Oscillator);
        assert!(osc.commutator(&fock::number(sp, Mode::X)).max_abs() == 0.0);
        assert!(osc.commutator(&fock::number(sp, Mode::Y)).max_abs() == 0.0);
    }

    #[test]
    fn noisy_reduces_to_ideal_without_noise_terms() {
        let sp = ModeSpace::new(5, 5);
        let p = operating_point(); // delta_z = 0, cross off
        let h_noisy = build_noisy(sp, &p, 0.8, 12.3);
        let h_ideal = build_jahn_teller(sp, &p, 0.8);
        assert!((&h_noisy - &h_ideal).max_abs() < 1e-12);
    }

    #[test]
    fn noisy_is_periodic_in_the_mode_splitting() {
        let sp = ModeSpace::new(4, 4);
        let p = ModelParams {
            delta_z: 0.01,
            delta_xy: TWO_PI * 5e-3,
            cross_coupling: true,
            ..operating_point()
        };
        let t = 370.0;
        let period = TWO_PI / p.delta_xy;
        let a = build_noisy(sp, &p, 1.0, t);
        let b = build_noisy(sp, &p, 1.0, t + period);
        assert!((&a - &b).max_abs() < 1e-12);
        assert!(a.hermiticity_error() < 1e-12);
    }

    #[test]
    fn non_ci_is_spin_independent_and_variationally_lower() {
        let sp = ModeSpace::new(8, 8);
        let p = operating_point();
        let h = build_non_ci(sp, &p, 1.0).unwrap();
        for axis in [Pauli::X, Pauli::Y, Pauli::Z] {
            assert!(h.commutator(&fock::pauli(sp, axis)).max_abs() < 1e-10);
        }
        // at Omega = 0 it is the bare oscillator
        let bare = build_non_ci(sp, &p, 0.0).unwrap();
        let osc = build_split(sp, &p, 0.0, SplitPart::Oscillator);
        assert!((&bare - &osc).max_abs() < 1e-10);
        // its ground energy lies at or below the ideal model's (the ideal
        // ground state is supported on the lower surface, which both share)
        let (e_nonci, _) = linalg::eigh(&h.to_dense()).unwrap();
        let (e_ci, _) = linalg::eigh(&build_jahn_teller(sp, &p, 1.0).to_dense()).unwrap();
        assert!(e_nonci[0] <= e_ci[0] + 1e-9);
    }

    #[test]
    fn surface_examples() {
        let p0 = ModelParams { nu: 1.0, omega: 3.0, ..Default::default() };
        // degeneracy at the origin iff delta = 0
        assert_eq!(semiclassical_surface(&p0, 0.0, 0.0, Branch::Upper), 0.0);
        assert_eq!(semiclassical_surface(&p0, 0.0, 0.0, Branch::Lower), 0.0);

        // ring minimum r* = Omega / (sqrt(2) nu), depth -Omega^2/(4 nu),
        // cross-checked by a 1d golden-section scan
        let r_star = p0.omega / (2f64.sqrt() * p0.nu);
        assert!((r_star - 3.0 / 2f64.sqrt()).abs() < 1e-12);
        let v_min = semiclassical_surface(&p0, r_star, 0.0, Branch::Lower);
        assert!((v_min - (-p0.omega * p0.omega / (4.0 * p0.nu))).abs() < 1e-12);
        assert!((v_min + 2.25).abs() < 1e-12);
        let mut best = (0.0, f64::INFINITY);
        let mut r = 0.0;
        while r < 6.0 {
            let v = semiclassical_surface(&p0, r, 0.0, Branch::Lower);
            if v < best.1 {
                best = (r, v);
            }
            r += 1e-4;
        }
        assert!((best.0 - r_star).abs() < 1e-3);
        assert!((best.1 - v_min).abs() < 1e-7);

        // V+ - V- = sqrt(2) Omega r for delta = 0
        let (x, y) = (0.8, -1.3);
        let gap = semiclassical_surface(&p0, x, y, Branch::Upper)
            - semiclassical_surface(&p0, x, y, Branch::Lower);
        assert!((gap - 2f64.sqrt() * p0.omega * (x * x + y * y).sqrt()).abs() < 1e-12);

        // avoided crossing: minimum gap delta at the origin
        let pd = ModelParams { delta: 0.5, ..p0 };
        let gap0 = semiclassical_surface(&pd, 0.0, 0.0, Branch::Upper)
            - semiclassical_surface(&pd, 0.0, 0.0, Branch::Lower);
        assert!((gap0 - pd.delta).abs() < 1e-12);
    }

    #[test]
    fn spin_eigenstate_examples() {
        let plus = spin_eigenstate(1.0, 0.0, Branch::Upper).unwrap();
        let r = 1.0 / 2f64.sqrt();
        assert!((plus[0] - C64::new(r, 0.0)).norm() < 1e-15);
        assert!((plus[1] - C64::new(r, 0.0)).norm() < 1e-15);

        let minus = spin_eigenstate(0.0, 1.0, Branch::Lower).unwrap();
        assert!((minus[1] - C64::new(0.0, -r)).norm() < 1e-15);

        // orthogonality at a random point
        let (x, y) = (0.37, -1.21);
        let a = spin_eigenstate(x, y, Branch::Upper).unwrap();
        let b = spin_eigenstate(x, y, Branch::Lower).unwrap();
        let ovl = a[0].conj() * b[0] + a[1].conj() * b[1];
        assert!(ovl.norm() < 1e-14);

        assert!(matches!(
            spin_eigenstate(0.0, 0.0, Branch::Upper),
            Err(Error::AtSingularity(_))
        ));
    }

    #[test]
    fn spin_eigenstates_diagonalize_the_coupling() {
        // (sigma_x x + sigma_y y)|+-> = +-r |+->
        let (x, y) = (0.6f64, -0.9f64);
        let r = (x * x + y * y).sqrt();
        for branch in [Branch::Upper, Branch::Lower] {
            let s = spin_eigenstate(x, y, branch).unwrap();
            // 2x2 coupling matrix [[0, x - iy], [x + iy, 0]]
            let out = [
                C64::new(x, -y) * s[1],
                C64::new(x, y) * s[0],
            ];
            for i in 0..2 {
                assert!((out[i] - s[i] * branch.sign() * r).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn jahn_teller_commutes_with_conserved_charge_in_the_interior() {
        let sp = ModeSpace::new(8, 8);
        let p = operating_point();
        let h = build_jahn_teller(sp, &p, 1.0);
        let j = conserved_j(sp);
        let comm = h.commutator(&j).to_dense();
        // truncation breaks the algebra at the top level of each mode;
        // restrict to the window n < n_max - 1
        let mut worst = 0.0f64;
        for i in 0..sp.dim() {
            let (_, nxi, nyi) = sp.unindex(i);
            if nxi + 1 >= sp.n_max_x || nyi + 1 >= sp.n_max_y {
                continue;
            }
            for j2 in 0..sp.dim() {
                let (_, nxj, nyj) = sp.unindex(j2);
                if nxj + 1 >= sp.n_max_x || nyj + 1 >= sp.n_max_y {
                    continue;
                }
                worst = worst.max(comm[(i, j2)].norm());
            }
        }
        assert!(worst <= 1e-10, "interior commutator norm {worst}");
    }

    #[test]
    fn spectrum_is_even_in_the_coupling_sign() {
        // sigma_z conjugation flips Omega -> -Omega, so eigenvalues at +-s match
        let sp = ModeSpace::new(5, 5);
        let p = operating_point();
        for s in [0.3, 0.7, 1.0] {
            let (vp, _) = linalg::eigh(&build_jahn_teller(sp, &p, s).to_dense()).unwrap();
            let (vm, _) = linalg::eigh(&build_jahn_teller(sp, &p, -s).to_dense()).unwrap();
            let worst = vp
                .iter()
                .zip(vm.iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(worst < 1e-9, "spectrum asymmetry {worst} at s = {s}");
        }
    }

    #[test]
    fn ground_energy_converges_in_truncation() {
        // Fig. 1b parameters nu = 1, Omega = 3: dense diagonalization at
        // n_max = 20 against a Lanczos ground-state estimate at n_max = 30
        let p = ModelParams { nu: 1.0, omega: 3.0, ..Default::default() };
        let sp20 = ModeSpace::new(20, 20);
        let h20 = build_jahn_teller(sp20, &p, 1.0);
        let (vals, _) = linalg::eigh(&h20.to_dense()).unwrap();
        let e20 = vals[0];

        let sp30 = ModeSpace::new(30, 30);
        let h30 = build_jahn_teller(sp30, &p, 1.0);
        let e30 =
            linalg::lanczos_smallest_eigenvalue(|v| h30.apply(v), sp30.dim(), 120).unwrap();
        assert!(
            (e20 - e30).abs() < 1e-6,
            "ground energy drift between truncations: {e20} vs {e30}"
        );
    }

    #[test]
    fn vacuum_expectation_of_conserved_charge_is_half() {
        let sp = ModeSpace::new(4, 4);
        let st = SpinBosonState::basis_state(sp, 0, 0, 0);
        let j = conserved_j(sp);
        let v = st.expectation(&j).unwrap();
        assert!((v.re - 0.5).abs() < 1e-14 && v.im.abs() < 1e-14);
    }
}
