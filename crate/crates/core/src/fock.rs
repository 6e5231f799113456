//! Operator algebra for one spin-1/2 coupled to two truncated bosonic modes.
//!
//! Basis conventions, used everywhere in this crate:
//! * spin |0> is the sigma_z = +1 eigenstate; |+> = (|0> + |1>)/sqrt(2);
//! * the composite basis is ordered spin (x) mode-x (x) mode-y, with flat
//!   index `s * (n_max_x * n_max_y) + n_x * n_max_y + n_y`;
//! * positions and momenta are dimensionless (hbar = 1, m nu = 1):
//!   x = (a + a^dag)/sqrt(2), p = -i(a - a^dag)/sqrt(2).

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec, CsrMatrix};

/// Truncation dimensions and basis layout for spin (x) mode-x (x) mode-y.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModeSpace {
    pub n_max_x: usize,
    pub n_max_y: usize,
}

pub const SPIN_DIM: usize = 2;

impl ModeSpace {
    pub fn new(n_max_x: usize, n_max_y: usize) -> Self {
        assert!(n_max_x >= 2 && n_max_y >= 2, "need at least two Fock levels per mode");
        Self { n_max_x, n_max_y }
    }

    /// Total composite dimension 2 * n_max_x * n_max_y.
    pub fn dim(&self) -> usize {
        SPIN_DIM * self.n_max_x * self.n_max_y
    }

    /// Dimension of the motional factor n_max_x * n_max_y.
    pub fn motional_dim(&self) -> usize {
        self.n_max_x * self.n_max_y
    }

    pub fn index(&self, s: usize, nx: usize, ny: usize) -> usize {
        debug_assert!(s < SPIN_DIM && nx < self.n_max_x && ny < self.n_max_y);
        s * self.motional_dim() + nx * self.n_max_y + ny
    }

    pub fn unindex(&self, i: usize) -> (usize, usize, usize) {
        debug_assert!(i < self.dim());
        let m = self.motional_dim();
        (i / m, (i % m) / self.n_max_y, i % self.n_max_y)
    }

    pub fn motional_index(&self, nx: usize, ny: usize) -> usize {
        nx * self.n_max_y + ny
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LadderKind {
    Lower,
    Raise,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    X,
    Y,
    Z,
    /// sigma_+ = (sigma_x - i sigma_y)/2; maps |0> to |1> in this basis.
    Plus,
    /// sigma_- = (sigma_x + i sigma_y)/2.
    Minus,
}

/// Complex operator on the composite space, sparse storage with dense
/// conversion for matrix functions.
#[derive(Debug, Clone)]
pub struct Operator {
    csr: CsrMatrix,
}

impl Operator {
    pub fn from_triplets(dim: usize, triplets: Vec<(usize, usize, C64)>) -> Self {
        Self { csr: CsrMatrix::from_triplets(dim, triplets) }
    }

    pub fn from_dense(m: &CMat) -> Self {
        Self { csr: CsrMatrix::from_dense(m, 0.0) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { csr: CsrMatrix::identity(dim) }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { csr: CsrMatrix::zeros(dim) }
    }

    pub fn dim(&self) -> usize {
        self.csr.dim
    }

    pub fn nnz(&self) -> usize {
        self.csr.nnz()
    }

    pub fn csr(&self) -> &CsrMatrix {
        &self.csr
    }

    pub fn to_dense(&self) -> CMat {
        self.csr.to_dense()
    }

    pub fn apply(&self, v: &CVec) -> CVec {
        self.csr.apply(v)
    }

    pub fn matmul(&self, other: &Self) -> Self {
        Self { csr: self.csr.matmul(&other.csr) }
    }

    pub fn dagger(&self) -> Self {
        Self { csr: self.csr.dagger() }
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self { csr: self.csr.scale(factor) }
    }

    pub fn commutator(&self, other: &Self) -> Self {
        let ab = self.csr.matmul(&other.csr);
        let ba = other.csr.matmul(&self.csr);
        Self { csr: ab.add(&ba.scale(C64::new(-1.0, 0.0))) }
    }

    pub fn max_abs(&self) -> f64 {
        self.csr.max_abs()
    }

    pub fn hermiticity_error(&self) -> f64 {
        self.csr.hermiticity_error()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator { csr: self.csr.add(&rhs.csr) }
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator { csr: self.csr.add(&rhs.csr.scale(C64::new(-1.0, 0.0))) }
    }
}

impl Mul<f64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: f64) -> Operator {
        self.scaled(C64::new(rhs, 0.0))
    }
}

impl Mul<C64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: C64) -> Operator {
        self.scaled(rhs)
    }
}

/// Single-mode lowering operator on an n_max-dimensional Fock space.
pub fn mode_lower(n_max: usize) -> Vec<(usize, usize, C64)> {
    (1..n_max)
        .map(|n| (n - 1, n, C64::new((n as f64).sqrt(), 0.0)))
        .collect()
}

/// Ladder operator embedded in the full composite space.
pub fn ladder(space: ModeSpace, mode: Mode, kind: LadderKind) -> Operator {
    let mut triplets = Vec::new();
    let (n_this, _other) = match mode {
        Mode::X => (space.n_max_x, space.n_max_y),
        Mode::Y => (space.n_max_y, space.n_max_x),
    };
    for s in 0..SPIN_DIM {
        for nx in 0..space.n_max_x {
            for ny in 0..space.n_max_y {
                let n = match mode {
                    Mode::X => nx,
                    Mode::Y => ny,
                };
                if n + 1 < n_this {
                    let coeff = C64::new(((n + 1) as f64).sqrt(), 0.0);
                    let (lo, hi) = match mode {
                        Mode::X => (space.index(s, nx, ny), space.index(s, nx + 1, ny)),
                        Mode::Y => (space.index(s, nx, ny), space.index(s, nx, ny + 1)),
                    };
                    match kind {
                        LadderKind::Lower => triplets.push((lo, hi, coeff)),
                        LadderKind::Raise => triplets.push((hi, lo, coeff)),
                    }
                }
            }
        }
    }
    Operator::from_triplets(space.dim(), triplets)
}

/// Number operator n = a^dag a of one mode, embedded.
pub fn number(space: ModeSpace, mode: Mode) -> Operator {
    let mut triplets = Vec::new();
    for s in 0..SPIN_DIM {
        for nx in 0..space.n_max_x {
            for ny in 0..space.n_max_y {
                let n = match mode {
                    Mode::X => nx,
                    Mode::Y => ny,
                } as f64;
                if n > 0.0 {
                    let i = space.index(s, nx, ny);
                    triplets.push((i, i, C64::new(n, 0.0)));
                }
            }
        }
    }
    Operator::from_triplets(space.dim(), triplets)
}

/// Dimensionless position x = (a + a^dag)/sqrt(2), embedded.
pub fn position(space: ModeSpace, mode: Mode) -> Operator {
    let a = ladder(space, mode, LadderKind::Lower);
    let ad = ladder(space, mode, LadderKind::Raise);
    (&(&a + &ad)).scaled(C64::new(1.0 / 2f64.sqrt(), 0.0))
}

/// Dimensionless momentum p = -i(a - a^dag)/sqrt(2), embedded.
pub fn momentum(space: ModeSpace, mode: Mode) -> Operator {
    let a = ladder(space, mode, LadderKind::Lower);
    let ad = ladder(space, mode, LadderKind::Raise);
    (&(&a - &ad)).scaled(C64::new(0.0, -1.0 / 2f64.sqrt()))
}

/// Pauli operator on the spin factor, tensored with mode identities.
pub fn pauli(space: ModeSpace, axis: Pauli) -> Operator {
    let m = space.motional_dim();
    let one = C64::new(1.0, 0.0);
    let i = C64::i();
    let mut triplets = Vec::new();
    for k in 0..m {
        match axis {
            Pauli::X => {
                triplets.push((k, m + k, one));
                triplets.push((m + k, k, one));
            }
            Pauli::Y => {
                triplets.push((k, m + k, -i));
                triplets.push((m + k, k, i));
            }
            Pauli::Z => {
                triplets.push((k, k, one));
                triplets.push((m + k, m + k, -one));
            }
            // sigma_+- = (sigma_x -+ i sigma_y)/2
            Pauli::Plus => triplets.push((m + k, k, one)),
            Pauli::Minus => triplets.push((k, m + k, one)),
        }
    }
    Operator::from_triplets(space.dim(), triplets)
}

/// Hermitian square root by eigendecomposition.
///
/// Eigenvalues in [-1e-6, 0) are clamped to zero; anything below -1e-6 is a
/// `NegativeSpectrum` error. Inputs further than 1e-9 from Hermitian are
/// rejected.
pub fn operator_sqrt(a: &Operator) -> Result<Operator> {
    let herm = a.hermiticity_error();
    if herm > 1e-9 {
        return Err(Error::NotHermitian(herm));
    }
    let dense = a.to_dense();
    let (vals, vecs) = linalg::eigh(&dense)?;
    if let Some(&worst) = vals
        .iter()
        .filter(|v| **v < -1e-6)
        .min_by(|x, y| x.partial_cmp(y).unwrap())
    {
        return Err(Error::NegativeSpectrum(worst));
    }
    let n = dense.nrows();
    let mut scaled = CMat::zeros((n, n));
    for j in 0..n {
        let root = vals[j].max(0.0).sqrt();
        for i in 0..n {
            scaled[(i, j)] = vecs[(i, j)] * root;
        }
    }
    let root = linalg::matmul(&scaled, &vecs.t().mapv(|z| z.conj()).to_owned());
    Ok(Operator::from_dense(&root))
}

/// Normalized pure state of the composite space.
#[derive(Debug, Clone)]
pub struct SpinBosonState {
    pub space: ModeSpace,
    amplitudes: CVec,
}

impl SpinBosonState {
    pub fn new(space: ModeSpace, amplitudes: CVec) -> Result<Self> {
        if amplitudes.len() != space.dim() {
            return Err(Error::DimensionMismatch(amplitudes.len(), space.dim()));
        }
        let mut st = Self { space, amplitudes };
        st.normalize();
        Ok(st)
    }

    /// Basis state |s, n_x, n_y>.
    pub fn basis_state(space: ModeSpace, s: usize, nx: usize, ny: usize) -> Self {
        let mut amplitudes = CVec::zeros(space.dim());
        amplitudes[space.index(s, nx, ny)] = C64::new(1.0, 0.0);
        Self { space, amplitudes }
    }

    /// Product state from spin amplitudes and per-mode Fock coefficients.
    pub fn product(space: ModeSpace, spin: [C64; 2], cx: &[C64], cy: &[C64]) -> Result<Self> {
        if cx.len() != space.n_max_x || cy.len() != space.n_max_y {
            return Err(Error::DimensionMismatch(cx.len(), space.n_max_x));
        }
        let mut amplitudes = CVec::zeros(space.dim());
        for s in 0..SPIN_DIM {
            for (nx, &ax) in cx.iter().enumerate() {
                for (ny, &ay) in cy.iter().enumerate() {
                    amplitudes[space.index(s, nx, ny)] = spin[s] * ax * ay;
                }
            }
        }
        Self::new(space, amplitudes)
    }

    /// The experiment's initial state |+> (x) |0,0>.
    pub fn plus_vacuum(space: ModeSpace) -> Self {
        let r = C64::new(1.0 / 2f64.sqrt(), 0.0);
        let mut cx = vec![C64::new(0.0, 0.0); space.n_max_x];
        let mut cy = vec![C64::new(0.0, 0.0); space.n_max_y];
        cx[0] = C64::new(1.0, 0.0);
        cy[0] = C64::new(1.0, 0.0);
        Self::product(space, [r, r], &cx, &cy).expect("dimensions fixed by space")
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut CVec {
        &mut self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            self.amplitudes.mapv_inplace(|z| z / n);
        }
    }

    pub fn inner(&self, other: &Self) -> C64 {
        self.amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// <psi| A |psi>; imaginary part stays below 1e-9 for Hermitian A.
    pub fn expectation(&self, a: &Operator) -> Result<C64> {
        if a.dim() != self.amplitudes.len() {
            return Err(Error::DimensionMismatch(a.dim(), self.amplitudes.len()));
        }
        let av = a.apply(&self.amplitudes);
        Ok(self
            .amplitudes
            .iter()
            .zip(av.iter())
            .map(|(b, v)| b.conj() * v)
            .sum())
    }

    /// Population in the top two Fock levels of either mode (max over
    /// modes; the ground level never counts, so a 2-level dummy mode sitting
    /// in its vacuum does not register as leakage).
    pub fn truncation_leak(&self) -> f64 {
        let (mut leak_x, mut leak_y) = (0.0f64, 0.0f64);
        for (i, amp) in self.amplitudes.iter().enumerate() {
            let p = amp.norm_sqr();
            if p == 0.0 {
                continue;
            }
            let (_, nx, ny) = self.space.unindex(i);
            if nx + 2 >= self.space.n_max_x && nx > 0 {
                leak_x += p;
            }
            if ny + 2 >= self.space.n_max_y && ny > 0 {
                leak_y += p;
            }
        }
        leak_x.max(leak_y)
    }
}

/// Density matrix on the full composite space.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    pub space: ModeSpace,
    pub matrix: CMat,
}

impl DensityMatrix {
    pub fn new(space: ModeSpace, matrix: CMat) -> Result<Self> {
        if matrix.nrows() != space.dim() || matrix.ncols() != space.dim() {
            return Err(Error::DimensionMismatch(matrix.nrows(), space.dim()));
        }
        Ok(Self { space, matrix })
    }

    pub fn from_pure(state: &SpinBosonState) -> Self {
        let n = state.amplitudes.len();
        let mut m = CMat::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = state.amplitudes[i] * state.amplitudes[j].conj();
            }
        }
        Self { space: state.space, matrix: m }
    }

    pub fn trace(&self) -> C64 {
        self.matrix.diag().sum()
    }

    pub fn purity(&self) -> f64 {
        linalg::matmul(&self.matrix, &self.matrix).diag().sum().re
    }

    /// Tr(rho A).
    pub fn expectation(&self, a: &Operator) -> Result<C64> {
        if a.dim() != self.matrix.nrows() {
            return Err(Error::DimensionMismatch(a.dim(), self.matrix.nrows()));
        }
        // Tr(rho A) = sum_{r,c} A_rc rho_cr
        let mut acc = C64::new(0.0, 0.0);
        for (r, c, v) in a.csr().iter() {
            acc += v * self.matrix[(c, r)];
        }
        Ok(acc)
    }

    pub fn hermiticity_error(&self) -> f64 {
        linalg::hermiticity_error_dense(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        let (vals, _) = linalg::eigh(&self.matrix)?;
        Ok(vals[0])
    }

    /// Population in the top two Fock levels of either mode (ground level
    /// excluded, as for pure states).
    pub fn truncation_leak(&self) -> f64 {
        let (mut leak_x, mut leak_y) = (0.0f64, 0.0f64);
        for i in 0..self.matrix.nrows() {
            let p = self.matrix[(i, i)].re;
            let (_, nx, ny) = self.space.unindex(i);
            if nx + 2 >= self.space.n_max_x && nx > 0 {
                leak_x += p;
            }
            if ny + 2 >= self.space.n_max_y && ny > 0 {
                leak_y += p;
            }
        }
        leak_x.max(leak_y)
    }
}

/// Reduced density matrix of the two motional modes (spin traced out).
#[derive(Debug, Clone)]
pub struct MotionalDensity {
    pub space: ModeSpace,
    pub matrix: CMat,
}

impl MotionalDensity {
    pub fn trace(&self) -> C64 {
        self.matrix.diag().sum()
    }

    pub fn purity(&self) -> f64 {
        linalg::matmul(&self.matrix, &self.matrix).diag().sum().re
    }

    /// Re-embed as a product with a pure spin state (test helper and the
    /// inverse direction of the partial-trace identity).
    pub fn embed_with_spin(&self, spin: [C64; 2]) -> DensityMatrix {
        let m = self.space.motional_dim();
        let dim = self.space.dim();
        let mut full = CMat::zeros((dim, dim));
        for s1 in 0..SPIN_DIM {
            for s2 in 0..SPIN_DIM {
                let w = spin[s1] * spin[s2].conj();
                if w.norm_sqr() == 0.0 {
                    continue;
                }
                for i in 0..m {
                    for j in 0..m {
                        full[(s1 * m + i, s2 * m + j)] = w * self.matrix[(i, j)];
                    }
                }
            }
        }
        DensityMatrix { space: self.space, matrix: full }
    }
}

/// Trace out the spin, leaving the motional density matrix.
pub fn partial_trace_spin(state: &SpinBosonState) -> MotionalDensity {
    let m = state.space.motional_dim();
    let amps = state.amplitudes();
    let mut out = CMat::zeros((m, m));
    for s in 0..SPIN_DIM {
        for i in 0..m {
            let ai = amps[s * m + i];
            if ai.norm_sqr() == 0.0 {
                continue;
            }
            for j in 0..m {
                out[(i, j)] += ai * amps[s * m + j].conj();
            }
        }
    }
    MotionalDensity { space: state.space, matrix: out }
}

/// Trace out the spin of a full density matrix.
pub fn partial_trace_spin_density(rho: &DensityMatrix) -> MotionalDensity {
    let m = rho.space.motional_dim();
    let mut out = CMat::zeros((m, m));
    for s in 0..SPIN_DIM {
        for i in 0..m {
            for j in 0..m {
                out[(i, j)] += rho.matrix[(s * m + i, s * m + j)];
            }
        }
    }
    MotionalDensity { space: rho.space, matrix: out }
}

/// |<a|b>|^2 for pure states.
pub fn fidelity(a: &SpinBosonState, b: &SpinBosonState) -> Result<f64> {
    if a.space != b.space {
        return Err(Error::DimensionMismatch(a.space.dim(), b.space.dim()));
    }
    Ok(a.inner(b).norm_sqr())
}

/// <psi| rho |psi> for a pure state against a density matrix.
pub fn fidelity_state_density(psi: &SpinBosonState, rho: &DensityMatrix) -> Result<f64> {
    if psi.space != rho.space {
        return Err(Error::DimensionMismatch(psi.space.dim(), rho.space.dim()));
    }
    let v = rho.matrix.dot(psi.amplitudes());
    let f: C64 = psi
        .amplitudes()
        .iter()
        .zip(v.iter())
        .map(|(a, b)| a.conj() * b)
        .sum();
    Ok(f.re.clamp(0.0, 1.0 + 1e-9))
}

/// Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
pub fn fidelity_density(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.space != sigma.space {
        return Err(Error::DimensionMismatch(rho.space.dim(), sigma.space.dim()));
    }
    let sqrt_rho = operator_sqrt(&Operator::from_dense(&rho.matrix))?.to_dense();
    let inner = linalg::matmul(&linalg::matmul(&sqrt_rho, &sigma.matrix), &sqrt_rho);
    // symmetrize away integrator roundoff before the second root
    let inner_h = (&inner + &inner.t().mapv(|z| z.conj())).mapv(|z| z * 0.5);
    let (vals, _) = linalg::eigh(&inner_h)?;
    let root_sum: f64 = vals.iter().map(|v| v.max(0.0).sqrt()).sum();
    Ok(root_sum * root_sum)
}

/// Squared norm of the projection of a pure state onto the span of the given
/// orthonormal basis vectors (subspace fidelity).
pub fn subspace_fidelity(psi: &SpinBosonState, basis: &[CVec]) -> Result<f64> {
    let mut total = 0.0;
    for b in basis {
        if b.len() != psi.amplitudes().len() {
            return Err(Error::DimensionMismatch(b.len(), psi.amplitudes().len()));
        }
        let overlap: C64 = b
            .iter()
            .zip(psi.amplitudes().iter())
            .map(|(bi, ai)| bi.conj() * ai)
            .sum();
        total += overlap.norm_sqr();
    }
    Ok(total)
}

/// Truncated coherent-state Fock coefficients, renormalized on the
/// truncated space.
pub fn coherent_coefficients(n_max: usize, alpha: C64) -> Vec<C64> {
    let mut c = vec![C64::new(0.0, 0.0); n_max];
    c[0] = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    for n in 1..n_max {
        c[n] = c[n - 1] * alpha / C64::new((n as f64).sqrt(), 0.0);
    }
    let norm: f64 = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for v in &mut c {
        *v /= norm;
    }
    c
}
