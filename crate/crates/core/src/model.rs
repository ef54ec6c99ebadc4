//! Hamiltonians, collapse operators and the Lindblad superoperator for two
//! Kerr resonators coupled by a Coulomb (beam-splitter) interaction, with an
//! optional linearized optomechanical cavity on the first resonator.
//!
//! All rates are expressed in units of the mechanical damping `gamma`.
//! Mode ordering is fixed as `(b1, b2[, a])`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{destroy, number, HilbertSpace, OperatorMatrix};
use crate::sparse::CsrMatrix;

/// Index of the primary (driven, probed) resonator.
pub const B1: usize = 0;
/// Index of the secondary resonator.
pub const B2: usize = 1;
/// Index of the optical cavity in three-mode spaces.
pub const CAVITY: usize = 2;

/// Drive amplitude above which the weak-driving assumption is flagged.
pub const WEAK_DRIVE_LIMIT: f64 = 0.2;

/// Coulomb constant k_e in N m² C⁻².
pub const COULOMB_CONSTANT: f64 = 8.987_551_792_3e9;
/// Reduced Planck constant in J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant in J K⁻¹.
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Mechanical parameters in the frame rotating at the pump frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MechParams {
    /// Detuning Δ = ω_m − ω_p.
    pub delta: f64,
    /// Kerr nonlinearity U.
    pub u: f64,
    /// Coulomb coupling J.
    pub j: f64,
    /// Drive amplitude on b1.
    pub omega1: f64,
    /// Drive amplitude on b2.
    pub omega2: f64,
    /// Phase of the b2 drive relative to the b1 drive, radians.
    pub phi: f64,
    /// Mechanical damping rate; the unit of every other rate.
    pub gamma: f64,
    /// Thermal bath occupation shared by both resonators.
    pub nth: f64,
}

impl Default for MechParams {
    fn default() -> Self {
        MechParams {
            delta: 0.0,
            u: 0.0,
            j: 0.0,
            omega1: 0.0,
            omega2: 0.0,
            phi: 0.0,
            gamma: 1.0,
            nth: 0.0,
        }
    }
}

impl MechParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.delta,
            self.u,
            self.j,
            self.omega1,
            self.omega2,
            self.phi,
            self.gamma,
            self.nth,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("non-finite mechanical parameter".into()));
        }
        if self.gamma <= 0.0 {
            return Err(Error::InvalidParameter(format!("gamma must be positive, got {}", self.gamma)));
        }
        if self.nth < 0.0 {
            return Err(Error::InvalidParameter(format!("nth must be nonnegative, got {}", self.nth)));
        }
        if self.omega1 < 0.0 || self.omega2 < 0.0 {
            return Err(Error::InvalidParameter("drive amplitudes must be nonnegative".into()));
        }
        Ok(())
    }

    /// True when a drive exceeds [`WEAK_DRIVE_LIMIT`]·γ.
    pub fn outside_weak_drive(&self) -> bool {
        self.omega1.max(self.omega2) > WEAK_DRIVE_LIMIT * self.gamma
    }

    /// Ratio Ω₂/Ω₁ (zero when undriven).
    pub fn zeta(&self) -> f64 {
        if self.omega1 == 0.0 {
            0.0
        } else {
            self.omega2 / self.omega1
        }
    }
}

/// Linearized optomechanical parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmParams {
    /// Optomechanical coupling G.
    pub g: f64,
    /// Cavity linewidth κ.
    pub kappa: f64,
    /// Cavity detuning; `None` uses the mechanical detuning Δ.
    pub delta_a: Option<f64>,
}

impl OmParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0) || !self.kappa.is_finite() {
            return Err(Error::InvalidParameter(format!("kappa must be positive, got {}", self.kappa)));
        }
        if !self.g.is_finite() || self.delta_a.is_some_and(|d| !d.is_finite()) {
            return Err(Error::InvalidParameter("non-finite optomechanical parameter".into()));
        }
        Ok(())
    }

    pub fn cavity_detuning(&self, mech: &MechParams) -> f64 {
        self.delta_a.unwrap_or(mech.delta)
    }

    /// Whether κ ≥ 5·max(G, J, γ(n_th+1)), where the cavity follows b1 adiabatically.
    pub fn is_adiabatic(&self, mech: &MechParams) -> bool {
        let scale = self.g.abs().max(mech.j.abs()).max(mech.gamma * (mech.nth + 1.0));
        self.kappa >= 5.0 * scale
    }
}

/// Geometry and electrical parameters of the two charged resonators (SI units).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoulombGeometry {
    pub c1: f64,
    pub c2: f64,
    pub v1: f64,
    pub v2: f64,
    /// Equilibrium separation d.
    pub d: f64,
    pub m1: f64,
    pub m2: f64,
    /// Mechanical angular frequency ω_m.
    pub omega_m: f64,
}

/// Coulomb coupling `J = k_e C₁V₁C₂V₂ / d³ · √(1 / (m₁ m₂ ω_m²))` in rad/s.
pub fn coulomb_coupling(geom: &CoulombGeometry) -> Result<f64> {
    if !(geom.d > 0.0) {
        return Err(Error::InvalidParameter(format!("separation must be positive, got {}", geom.d)));
    }
    if !(geom.m1 > 0.0 && geom.m2 > 0.0) {
        return Err(Error::InvalidParameter("masses must be positive".into()));
    }
    if !(geom.omega_m > 0.0) {
        return Err(Error::InvalidParameter("mechanical frequency must be positive".into()));
    }
    let charges = COULOMB_CONSTANT * geom.c1 * geom.v1 * geom.c2 * geom.v2;
    Ok(charges / geom.d.powi(3) * (1.0 / (geom.m1 * geom.m2 * geom.omega_m * geom.omega_m)).sqrt())
}

/// Bose-Einstein occupation `1/(exp(ħω/k_B T) − 1)`; exactly zero at `T = 0`.
///
/// Returns NaN for `omega_m <= 0` or negative temperature.
pub fn thermal_occupation(omega_m: f64, temperature: f64) -> f64 {
    if !(omega_m > 0.0) || temperature < 0.0 {
        return f64::NAN;
    }
    if temperature == 0.0 {
        return 0.0;
    }
    let x = HBAR * omega_m / (BOLTZMANN * temperature);
    1.0 / x.exp_m1()
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn require_modes(space: &HilbertSpace, n: usize) -> Result<()> {
    if space.num_modes() != n {
        return Err(Error::WrongModeCount {
            expected: n,
            found: space.num_modes(),
        });
    }
    Ok(())
}

/// Kerr, detuning, coupling and drive terms shared by both models.
fn mechanical_terms(p: &MechParams, space: &HilbertSpace) -> Result<OperatorMatrix> {
    let b1 = destroy(space, B1)?;
    let b2 = destroy(space, B2)?;
    let b1d = b1.adjoint();
    let b2d = b2.adjoint();
    let n1 = number(space, B1)?;
    let n2 = number(space, B2)?;
    let kerr1 = &(&b1d * &b1d) * &(&b1 * &b1);
    let kerr2 = &(&b2d * &b2d) * &(&b2 * &b2);
    let hop = &(&b1d * &b2) + &(&b1 * &b2d);
    let drive1 = &b1d + &b1;
    let e = Complex64::from_polar(1.0, p.phi);
    let drive2 = &b2d.scale(e.conj()) + &b2.scale(e);

    let terms = [
        (&n1, c(p.delta)),
        (&n2, c(p.delta)),
        (&kerr1, c(p.u)),
        (&kerr2, c(p.u)),
        (&hop, c(p.j)),
        (&drive1, c(p.omega1)),
        (&drive2, c(p.omega2)),
    ];
    let mut h = OperatorMatrix::zeros(space.dim());
    for (op, k) in terms {
        h = &h + &op.scale(k);
    }
    Ok(h)
}

/// Two-resonator Hamiltonian in the pump frame:
/// `Δ(b₁†b₁ + b₂†b₂) + U(b₁†²b₁² + b₂†²b₂²) + J(b₁†b₂ + b₁b₂†) + Ω₁(b₁† + b₁) + Ω₂(b₂†e^{−iφ} + b₂e^{iφ})`.
pub fn build_mech_hamiltonian(p: &MechParams, space: &HilbertSpace) -> Result<OperatorMatrix> {
    require_modes(space, 2)?;
    p.validate()?;
    mechanical_terms(p, space)
}

/// Mechanical Hamiltonian plus `Δ_a a†a + G(a†b₁ + a b₁†)` on a `(b1, b2, a)` space.
pub fn build_total_hamiltonian(
    p: &MechParams,
    om: &OmParams,
    space: &HilbertSpace,
) -> Result<OperatorMatrix> {
    require_modes(space, 3)?;
    p.validate()?;
    om.validate()?;
    let a = destroy(space, CAVITY)?;
    let b1 = destroy(space, B1)?;
    let na = number(space, CAVITY)?;
    let exchange = &(&a.adjoint() * &b1) + &(&a * &b1.adjoint());
    let h = mechanical_terms(p, space)?;
    let h = &h + &na.scale_real(om.cavity_detuning(p));
    Ok(&h + &exchange.scale_real(om.g))
}

/// Thermal collapse channels for both resonators:
/// `(b_i, γ(n_th+1))` and `(b_i†, γ n_th)`.
pub fn mech_collapse_ops(p: &MechParams, space: &HilbertSpace) -> Result<Vec<(OperatorMatrix, f64)>> {
    let mut out = Vec::with_capacity(4);
    for mode in [B1, B2] {
        let b = destroy(space, mode)?;
        let bd = b.adjoint();
        out.push((b, p.gamma * (p.nth + 1.0)));
        out.push((bd, p.gamma * p.nth));
    }
    Ok(out)
}

/// Mechanical channels plus zero-temperature cavity loss `(a, κ)`.
pub fn total_collapse_ops(
    p: &MechParams,
    om: &OmParams,
    space: &HilbertSpace,
) -> Result<Vec<(OperatorMatrix, f64)>> {
    require_modes(space, 3)?;
    let mut out = mech_collapse_ops(p, space)?;
    out.push((destroy(space, CAVITY)?, om.kappa));
    Ok(out)
}

/// Linear map on column-stacked density matrices: `vec(ρ)[col·n + row] = ρ[row, col]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    hilbert_dim: usize,
    matrix: CsrMatrix,
}

impl Superoperator {
    pub(crate) fn from_csr(hilbert_dim: usize, matrix: CsrMatrix) -> Self {
        debug_assert_eq!(matrix.nrows(), hilbert_dim * hilbert_dim);
        Superoperator { hilbert_dim, matrix }
    }

    /// Side length of the superoperator matrix, `n²`.
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Dimension `n` of the underlying Hilbert space.
    pub fn hilbert_dim(&self) -> usize {
        self.hilbert_dim
    }

    pub fn nnz(&self) -> usize {
        self.matrix.nnz()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.matrix.get(row, col)
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        self.matrix.mul_vec(v)
    }

    pub(crate) fn apply_into(&self, v: &[Complex64], out: &mut [Complex64]) {
        self.matrix.mul_vec_into(v, out)
    }

    pub(crate) fn csr(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn to_dense(&self) -> faer::Mat<Complex64> {
        self.matrix.to_dense()
    }

    /// `‖vec(I)† L‖₂`; zero for a trace-preserving generator.
    pub fn trace_identity_residual(&self) -> f64 {
        let n = self.hilbert_dim;
        let mut row = vec![Complex64::new(0.0, 0.0); self.dim()];
        for i in 0..n {
            for (col, v) in self.matrix.row(i * n + i) {
                row[col] += v;
            }
        }
        row.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Column-stacked vectorization of an operator.
pub fn vectorize(rho: &OperatorMatrix) -> Vec<Complex64> {
    let n = rho.dim();
    let dense = rho.to_dense();
    let mut v = Vec::with_capacity(n * n);
    for col in 0..n {
        for row in 0..n {
            v.push(dense[(row, col)]);
        }
    }
    v
}

/// Inverse of [`vectorize`].
pub fn unvectorize(v: &[Complex64], n: usize) -> Result<OperatorMatrix> {
    if v.len() != n * n {
        return Err(Error::DimensionMismatch {
            expected: n * n,
            found: v.len(),
        });
    }
    Ok(OperatorMatrix::from_dense(faer::Mat::from_fn(n, n, |r, c| v[c * n + r])))
}

/// Vectorized `ρ̇ = i[ρ, H] + Σ_k r_k (C_k ρ C_k† − ½ C_k†C_k ρ − ½ ρ C_k†C_k)`.
pub fn build_liouvillian(
    h: &OperatorMatrix,
    collapse: &[(OperatorMatrix, f64)],
) -> Result<Superoperator> {
    let n = h.dim();
    let herm = h.hermiticity_error();
    if herm > 1e-10 * h.max_abs().max(1.0) {
        return Err(Error::NonHermitian(herm));
    }
    for (op, rate) in collapse {
        if !(*rate >= 0.0) {
            return Err(Error::NegativeRate(*rate));
        }
        if op.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: op.dim(),
            });
        }
    }

    let i = Complex64::new(0.0, 1.0);
    let mut t: Vec<(usize, usize, Complex64)> = Vec::new();
    // i ρH  → i (Hᵀ ⊗ I);  −i Hρ → −i (I ⊗ H)
    for (a, b, v) in h.nonzeros() {
        for r in 0..n {
            t.push((b * n + r, a * n + r, i * v));
            t.push((r * n + a, r * n + b, -i * v));
        }
    }
    for (op, rate) in collapse {
        if *rate == 0.0 {
            continue;
        }
        let cz = op.nonzeros();
        // C ρ C† → conj(C) ⊗ C
        for &(a, b, u) in &cz {
            for &(p, q, w) in &cz {
                t.push((a * n + p, b * n + q, *rate * u.conj() * w));
            }
        }
        let cdc = &op.adjoint() * op;
        for (a, b, v) in cdc.nonzeros() {
            for r in 0..n {
                // −½ C†C ρ → −½ I ⊗ C†C ; −½ ρ C†C → −½ (C†C)ᵀ ⊗ I
                t.push((r * n + a, r * n + b, -0.5 * *rate * v));
                t.push((b * n + r, a * n + r, -0.5 * *rate * v));
            }
        }
    }
    Ok(Superoperator::from_csr(n, CsrMatrix::from_triplets(n * n, n * n, t)))
}

/// A complete model: mechanics with an optional optical cavity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemSpec {
    pub mech: MechParams,
    pub optomech: Option<OmParams>,
}

impl SystemSpec {
    pub fn mech(mech: MechParams) -> Self {
        SystemSpec { mech, optomech: None }
    }

    pub fn with_cavity(mech: MechParams, om: OmParams) -> Self {
        SystemSpec {
            mech,
            optomech: Some(om),
        }
    }

    pub fn num_modes(&self) -> usize {
        if self.optomech.is_some() {
            3
        } else {
            2
        }
    }

    /// Default truncations: 6×6 mechanics, or 5×5 mechanics with a 3-level cavity.
    pub fn default_dims(&self) -> Vec<usize> {
        if self.optomech.is_some() {
            vec![5, 5, 3]
        } else {
            vec![6, 6]
        }
    }

    pub fn hamiltonian(&self, space: &HilbertSpace) -> Result<OperatorMatrix> {
        match &self.optomech {
            None => build_mech_hamiltonian(&self.mech, space),
            Some(om) => build_total_hamiltonian(&self.mech, om, space),
        }
    }

    pub fn collapse_ops(&self, space: &HilbertSpace) -> Result<Vec<(OperatorMatrix, f64)>> {
        match &self.optomech {
            None => mech_collapse_ops(&self.mech, space),
            Some(om) => total_collapse_ops(&self.mech, om, space),
        }
    }

    pub fn liouvillian(&self, space: &HilbertSpace) -> Result<Superoperator> {
        if self.mech.outside_weak_drive() {
            log::warn!(
                "drive max(Ω1, Ω2) = {} exceeds the weak-drive limit {}γ",
                self.mech.omega1.max(self.mech.omega2),
                WEAK_DRIVE_LIMIT
            );
        }
        if let Some(om) = &self.optomech {
            if !om.is_adiabatic(&self.mech) {
                log::debug!("cavity outside the adiabatic regime (κ = {})", om.kappa);
            }
        }
        build_liouvillian(&self.hamiltonian(space)?, &self.collapse_ops(space)?)
    }
}
