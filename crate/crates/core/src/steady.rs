//! Steady states of Lindblad generators and time propagation of vectorized
//! density matrices.
//!
//! The steady state is obtained by replacing the first row of `L` with the
//! trace functional and solving `A·vec(ρ) = e₀`. Small systems use a dense LU
//! factorization, larger ones a sparse LU.

use faer::linalg::solvers::Solve;
use faer::Mat;
use num_complex::Complex64;

use crate::correl::Observables;
use crate::error::{Error, Result};
use crate::fock::{HilbertSpace, OperatorMatrix};
use crate::model::{unvectorize, vectorize, Superoperator, SystemSpec};
use crate::sparse::CsrMatrix;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Relative change above which a truncation is considered unconverged.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-3;

/// Population of the highest Fock level above which a truncation is flagged.
pub const TOP_LEVEL_POPULATION_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyOptions {
    /// Bound on `‖L·vec(ρ)‖₂`.
    pub residual_tol: f64,
    /// Smallest eigenvalue allowed is `−psd_tol`.
    pub psd_tol: f64,
    /// Warn when the top Fock level of a mode is populated.
    pub truncation_check: bool,
    /// Hilbert-space dimension above which the sparse solver is used.
    pub dense_max_dim: usize,
}

impl Default for SteadyOptions {
    fn default() -> Self {
        SteadyOptions {
            residual_tol: 1e-10,
            psd_tol: 1e-9,
            truncation_check: true,
            dense_max_dim: 20,
        }
    }
}

impl SteadyOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.residual_tol > 0.0 && self.psd_tol > 0.0) {
            return Err(Error::InvalidParameter("tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// Solves `L·vec(ρ) = 0` with `Tr ρ = 1`.
pub fn steady_state(l: &Superoperator, opts: &SteadyOptions) -> Result<OperatorMatrix> {
    opts.validate()?;
    let n = l.hilbert_dim();
    let big = l.dim();

    // row 0 ← vec(I)ᵀ
    let mut t: Vec<(usize, usize, Complex64)> = l.csr().iter().filter(|&(r, _, _)| r != 0).collect();
    t.extend((0..n).map(|i| (0, i * n + i, ONE)));
    let a = CsrMatrix::from_triplets(big, big, t);
    let mut rhs = Mat::<Complex64>::zeros(big, 1);
    rhs[(0, 0)] = ONE;

    let x = if n <= opts.dense_max_dim {
        a.to_dense().partial_piv_lu().solve(&rhs)
    } else {
        let lu = a.to_faer().sp_lu().map_err(|_| Error::DegenerateSteadyState)?;
        lu.solve(&rhs)
    };
    let x: Vec<Complex64> = (0..big).map(|i| x[(i, 0)]).collect();
    if x.iter().any(|v| !v.re.is_finite() || !v.im.is_finite() || v.norm() > 1e8) {
        return Err(Error::DegenerateSteadyState);
    }

    let raw = unvectorize(&x, n)?;
    let skew = raw.hermiticity_error();
    if skew > 1e-8 {
        return Err(Error::InvalidDensityMatrix(format!("solution is not hermitian ({skew:e})")));
    }
    let herm = (&raw + &raw.adjoint()).scale_real(0.5);
    let tr = herm.trace().re;
    let rho = herm.scale_real(1.0 / tr);

    let residual = residual_norm(l, &rho);
    if residual > opts.residual_tol {
        return Err(Error::ResidualNotMet {
            residual,
            tolerance: opts.residual_tol,
        });
    }
    check_density_matrix(&rho, opts.psd_tol)?;
    Ok(rho)
}

/// `‖L·vec(ρ)‖₂` from a fresh product.
pub fn residual_norm(l: &Superoperator, rho: &OperatorMatrix) -> f64 {
    l.apply(&vectorize(rho))
        .iter()
        .map(|v| v.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Hermitian within 1e-12, unit trace within 1e-12, eigenvalues ≥ −psd_tol.
pub fn check_density_matrix(rho: &OperatorMatrix, psd_tol: f64) -> Result<()> {
    let herm = rho.hermiticity_error();
    if herm > 1e-12 {
        return Err(Error::InvalidDensityMatrix(format!("hermiticity error {herm:e}")));
    }
    let tr = rho.trace();
    if (tr - ONE).norm() > 1e-12 {
        return Err(Error::InvalidDensityMatrix(format!("trace {tr}")));
    }
    let min_eig = rho.hermitian_eigenvalues().first().copied().unwrap_or(0.0);
    if min_eig < -psd_tol {
        return Err(Error::InvalidDensityMatrix(format!("negative eigenvalue {min_eig:e}")));
    }
    Ok(())
}

/// Total population of the highest Fock level of each mode.
pub fn top_level_populations(rho: &OperatorMatrix, space: &HilbertSpace) -> Vec<f64> {
    (0..space.num_modes())
        .map(|mode| {
            let top = space.mode_dims()[mode] - 1;
            (0..space.dim())
                .filter(|&i| space.occupation_of(i, mode) == top)
                .map(|i| rho.get(i, i).re)
                .sum()
        })
        .collect()
}

/// A solved model at one truncation.
#[derive(Debug, Clone)]
pub struct SteadySolution {
    pub space: HilbertSpace,
    pub liouvillian: Superoperator,
    pub rho: OperatorMatrix,
    /// Largest top-level population over all modes.
    pub top_level_population: f64,
}

impl SteadySolution {
    pub fn truncation_ok(&self) -> bool {
        self.top_level_population <= TOP_LEVEL_POPULATION_LIMIT
    }
}

/// Builds the Liouvillian of `spec` on `dims` and solves for its steady state.
pub fn solve_system(spec: &SystemSpec, dims: &[usize], opts: &SteadyOptions) -> Result<SteadySolution> {
    let space = HilbertSpace::new(dims)?;
    let liouvillian = spec.liouvillian(&space)?;
    let rho = steady_state(&liouvillian, opts)?;
    let top_level_population = top_level_populations(&rho, &space)
        .into_iter()
        .fold(0.0, f64::max);
    if opts.truncation_check && top_level_population > TOP_LEVEL_POPULATION_LIMIT {
        log::warn!("top Fock level population {top_level_population:e} on dims {dims:?}");
    }
    Ok(SteadySolution {
        space,
        liouvillian,
        rho,
        top_level_population,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    /// Local error tolerance per step, relative to the state's max-norm.
    pub local_tol: f64,
    /// Hilbert dimension up to which `exp(Lτ)` is formed densely.
    pub dense_max_dim: usize,
    pub max_steps: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            local_tol: 1e-10,
            dense_max_dim: 12,
            max_steps: 5_000_000,
        }
    }
}

/// `exp(L·τ)` applied to `ρ₀`. `ρ₀` need not be normalized.
pub fn evolve(
    l: &Superoperator,
    rho0: &OperatorMatrix,
    tau: f64,
    opts: &EvolveOptions,
) -> Result<OperatorMatrix> {
    if rho0.dim() != l.hilbert_dim() {
        return Err(Error::DimensionMismatch {
            expected: l.hilbert_dim(),
            found: rho0.dim(),
        });
    }
    let v = evolve_vec(l, &vectorize(rho0), tau, opts)?;
    unvectorize(&v, l.hilbert_dim())
}

/// Vector form of [`evolve`].
pub fn evolve_vec(
    l: &Superoperator,
    v0: &[Complex64],
    tau: f64,
    opts: &EvolveOptions,
) -> Result<Vec<Complex64>> {
    if !(tau >= 0.0) {
        return Err(Error::NegativeTime(tau));
    }
    if v0.len() != l.dim() {
        return Err(Error::DimensionMismatch {
            expected: l.dim(),
            found: v0.len(),
        });
    }
    if tau == 0.0 || v0.iter().all(|v| *v == ZERO) {
        return Ok(v0.to_vec());
    }
    let out = if l.hilbert_dim() <= opts.dense_max_dim {
        let prop = expm(&scaled(&l.to_dense(), tau));
        let x = Mat::from_fn(v0.len(), 1, |i, _| v0[i]);
        let y = &prop * &x;
        (0..v0.len()).map(|i| y[(i, 0)]).collect()
    } else {
        integrate(l, v0, tau, opts)?
    };

    let n = l.hilbert_dim();
    let trace = |v: &[Complex64]| (0..n).map(|i| v[i * n + i]).sum::<Complex64>();
    let (t0, t1) = (trace(v0), trace(&out));
    let scale = t0.norm().max(max_norm(v0));
    if (t1 - t0).norm() > 1e-9 * scale {
        return Err(Error::IntegratorFailure(format!(
            "trace drifted from {t0} to {t1}"
        )));
    }
    Ok(out)
}

fn max_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

fn scaled(a: &Mat<Complex64>, k: f64) -> Mat<Complex64> {
    Mat::from_fn(a.nrows(), a.ncols(), |r, c| a[(r, c)] * k)
}

/// Classic RK4 with step doubling; the accepted value carries the Richardson correction.
fn integrate(l: &Superoperator, v0: &[Complex64], tau: f64, opts: &EvolveOptions) -> Result<Vec<Complex64>> {
    let dim = v0.len();
    let mut ws = Rk4Workspace::new(dim);
    let mut y = v0.to_vec();
    let mut full = vec![ZERO; dim];
    let mut half = vec![ZERO; dim];
    let mut mid = vec![ZERO; dim];

    let mut t = 0.0;
    let mut h = (0.5 / l.csr().norm_inf().max(1e-12)).min(tau);
    let mut steps = 0usize;
    while t < tau {
        if steps >= opts.max_steps {
            return Err(Error::IntegratorFailure(format!("exceeded {} steps", opts.max_steps)));
        }
        steps += 1;
        let last = h >= tau - t;
        let step = if last { tau - t } else { h };

        ws.step(l, &y, step, &mut full);
        ws.step(l, &y, 0.5 * step, &mut mid);
        ws.step(l, &mid, 0.5 * step, &mut half);

        let err = half
            .iter()
            .zip(&full)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
            / 15.0;
        let scale = max_norm(&half).max(f64::MIN_POSITIVE);
        let allowed = opts.local_tol * scale;
        if err <= allowed {
            for ((yi, hi), fi) in y.iter_mut().zip(&half).zip(&full) {
                *yi = hi + (hi - fi) / 15.0;
            }
            t = if last { tau } else { t + step };
        }
        let factor = if err == 0.0 {
            4.0
        } else {
            (0.9 * (allowed / err).powf(0.2)).clamp(0.2, 4.0)
        };
        h = step * factor;
        if h < 1e-14 * tau.max(1.0) {
            return Err(Error::IntegratorFailure(format!("step size underflow at t = {t}")));
        }
    }
    Ok(y)
}

struct Rk4Workspace {
    k: [Vec<Complex64>; 4],
    tmp: Vec<Complex64>,
}

impl Rk4Workspace {
    fn new(dim: usize) -> Self {
        Rk4Workspace {
            k: std::array::from_fn(|_| vec![ZERO; dim]),
            tmp: vec![ZERO; dim],
        }
    }

    fn step(&mut self, l: &Superoperator, y: &[Complex64], h: f64, out: &mut [Complex64]) {
        let [k1, k2, k3, k4] = &mut self.k;
        l.apply_into(y, k1);
        for i in 0..y.len() {
            self.tmp[i] = y[i] + k1[i] * (0.5 * h);
        }
        l.apply_into(&self.tmp, k2);
        for i in 0..y.len() {
            self.tmp[i] = y[i] + k2[i] * (0.5 * h);
        }
        l.apply_into(&self.tmp, k3);
        for i in 0..y.len() {
            self.tmp[i] = y[i] + k3[i] * h;
        }
        l.apply_into(&self.tmp, k4);
        for i in 0..y.len() {
            out[i] = y[i] + (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0);
        }
    }
}

/// Matrix exponential by scaling and squaring with a degree-13 Padé approximant.
pub fn expm(a: &Mat<Complex64>) -> Mat<Complex64> {
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    const THETA_13: f64 = 5.371920351148152;

    let n = a.nrows();
    let norm1 = (0..n)
        .map(|c| (0..n).map(|r| a[(r, c)].norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let s = if norm1 > THETA_13 {
        (norm1 / THETA_13).log2().ceil() as i32
    } else {
        0
    };
    let a = scaled(a, 0.5f64.powi(s));
    let ident = Mat::<Complex64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let lin = |terms: &[(&Mat<Complex64>, f64)]| {
        Mat::from_fn(n, n, |r, c| terms.iter().map(|(m, k)| m[(r, c)] * *k).sum::<Complex64>())
    };

    let u_inner = &a6 * &lin(&[(&a6, B[13]), (&a4, B[11]), (&a2, B[9])]);
    let u_sum = &u_inner + &lin(&[(&a6, B[7]), (&a4, B[5]), (&a2, B[3]), (&ident, B[1])]);
    let u = &a * &u_sum;
    let v_inner = &a6 * &lin(&[(&a6, B[12]), (&a4, B[10]), (&a2, B[8])]);
    let v = &v_inner + &lin(&[(&a6, B[6]), (&a4, B[4]), (&a2, B[2]), (&ident, B[0])]);

    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.partial_piv_lu().solve(&p);
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

/// Outcome of re-solving a model with every mode truncation raised by one.
#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub base_dims: Vec<usize>,
    pub refined_dims: Vec<usize>,
    pub base: Observables,
    pub refined: Observables,
    /// `(observable, relative change)` pairs.
    pub changes: Vec<(&'static str, f64)>,
    pub max_relative_change: f64,
    pub converged: bool,
}

fn relative_change(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn relative_change_result(a: &Result<f64>, b: &Result<f64>) -> f64 {
    match (a, b) {
        (Ok(x), Ok(y)) => relative_change(*x, *y),
        (Err(_), Err(_)) => 0.0,
        _ => f64::INFINITY,
    }
}

/// Compares observables at `base_dims` and `base_dims + 1`.
///
/// Failures to solve either truncation are reported as an unconverged result.
pub fn convergence_check(
    spec: &SystemSpec,
    base_dims: &[usize],
    opts: &SteadyOptions,
) -> Result<ConvergenceReport> {
    let refined_dims: Vec<usize> = base_dims.iter().map(|d| d + 1).collect();
    let base = Observables::solve(spec, base_dims, opts)?;
    let refined = Observables::solve(spec, &refined_dims, opts)?;

    let mut changes = vec![
        ("g2_b", relative_change_result(&base.g2_b, &refined.g2_b)),
        ("n_b1", relative_change(base.n_b1, refined.n_b1)),
        ("n_b2", relative_change(base.n_b2, refined.n_b2)),
    ];
    if let (Some(a), Some(b)) = (&base.g2_a, &refined.g2_a) {
        changes.push(("g2_a", relative_change_result(a, b)));
    }
    if let (Some(a), Some(b)) = (base.n_a, refined.n_a) {
        changes.push(("n_a", relative_change(a, b)));
    }
    let max_relative_change = changes.iter().map(|c| c.1).fold(0.0, f64::max);
    Ok(ConvergenceReport {
        base_dims: base_dims.to_vec(),
        refined_dims,
        base,
        refined,
        changes,
        max_relative_change,
        converged: max_relative_change <= CONVERGENCE_TOLERANCE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{destroy, fock_projector, number};
    use crate::model::{build_liouvillian, MechParams};

    fn single_mode(n: usize, h: OperatorMatrix, gamma: f64, nth: f64) -> (HilbertSpace, Superoperator) {
        let s = HilbertSpace::new(&[n]).unwrap();
        let b = destroy(&s, 0).unwrap();
        let l = build_liouvillian(&h, &[(b.adjoint(), gamma * nth), (b, gamma * (nth + 1.0))]).unwrap();
        (s, l)
    }

    #[test]
    fn undriven_mechanics_relax_to_vacuum() {
        for (u, j) in [(0.0, 0.0), (0.3, 1.2), (1.0, 0.4)] {
            let spec = SystemSpec::mech(MechParams {
                delta: 0.2,
                u,
                j,
                ..Default::default()
            });
            let sol = solve_system(&spec, &[4, 4], &SteadyOptions::default()).unwrap();
            let vac = fock_projector(&sol.space, &[0, 0]).unwrap();
            assert!(sol.rho.max_abs_diff(&vac) < 1e-12);
        }
    }

    #[test]
    fn coherent_occupation_of_driven_linear_mode() {
        // ⟨n⟩ = Ω² / (Δ² + γ²/4)
        let s = HilbertSpace::new(&[12]).unwrap();
        let b = destroy(&s, 0).unwrap();
        let h = (&b + &b.adjoint()).scale_real(0.1);
        let l = build_liouvillian(&h, &[(b, 1.0)]).unwrap();
        let rho = steady_state(&l, &SteadyOptions::default()).unwrap();
        let n = crate::fock::expectation(&rho, &number(&s, 0).unwrap()).unwrap().re;
        assert!((n - 0.04).abs() < 1e-9, "{n}");
    }

    #[test]
    fn thermal_steady_state_occupation() {
        let (s, l) = single_mode(40, OperatorMatrix::zeros(40), 1.0, 0.5);
        let rho = steady_state(&l, &SteadyOptions::default()).unwrap();
        let n = crate::fock::expectation(&rho, &number(&s, 0).unwrap()).unwrap().re;
        assert!((n - 0.5).abs() < 1e-9, "{n}");
    }

    #[test]
    fn dense_and_sparse_paths_agree() {
        let spec = SystemSpec::mech(MechParams {
            delta: 0.2,
            u: 0.3,
            j: 1.1,
            omega1: 0.1,
            omega2: 0.05,
            phi: 0.7,
            nth: 0.01,
            ..Default::default()
        });
        let space = HilbertSpace::new(&[5, 5]).unwrap();
        let l = spec.liouvillian(&space).unwrap();
        let dense = steady_state(&l, &SteadyOptions { dense_max_dim: 100, ..Default::default() }).unwrap();
        let sparse = steady_state(&l, &SteadyOptions { dense_max_dim: 0, ..Default::default() }).unwrap();
        assert!(dense.max_abs_diff(&sparse) < 1e-12);
    }

    #[test]
    fn non_unique_steady_state_is_an_error() {
        let s = HilbertSpace::new(&[3]).unwrap();
        let l = build_liouvillian(&number(&s, 0).unwrap(), &[]).unwrap();
        for dense_max_dim in [0, 100] {
            let err = steady_state(&l, &SteadyOptions { dense_max_dim, ..Default::default() }).unwrap_err();
            assert_eq!(err, Error::DegenerateSteadyState);
        }
    }

    #[test]
    fn residual_tolerance_is_enforced() {
        let (_, l) = single_mode(6, OperatorMatrix::zeros(6), 1.0, 0.2);
        let opts = SteadyOptions {
            residual_tol: 1e-300,
            ..Default::default()
        };
        match steady_state(&l, &opts) {
            Err(Error::ResidualNotMet { .. }) | Ok(_) => {}
            Err(e) => panic!("unexpected error {e}"),
        }
        assert!(SteadyOptions { psd_tol: 0.0, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn evolve_identity_at_zero_and_negative_time() {
        let (s, l) = single_mode(4, OperatorMatrix::zeros(4), 1.0, 0.0);
        let rho = fock_projector(&s, &[2]).unwrap();
        let out = evolve(&l, &rho, 0.0, &EvolveOptions::default()).unwrap();
        assert_eq!(out, rho);
        assert_eq!(
            evolve(&l, &rho, -1.0, &EvolveOptions::default()).unwrap_err(),
            Error::NegativeTime(-1.0)
        );
    }

    #[test]
    fn amplitude_damping_decay() {
        // ⟨n⟩(τ) = e^{−γτ} from |1⟩⟨1| at zero temperature
        let (s, l) = single_mode(16, OperatorMatrix::zeros(16), 1.0, 0.0);
        let rho = fock_projector(&s, &[1]).unwrap();
        let n_op = number(&s, 0).unwrap();
        for dense_max_dim in [0, 16] {
            let opts = EvolveOptions { dense_max_dim, ..Default::default() };
            for tau in [0.3, 1.0, 2.5] {
                let out = evolve(&l, &rho, tau, &opts).unwrap();
                let n = crate::fock::expectation(&out, &n_op).unwrap().re;
                assert!((n - (-tau).exp()).abs() < 1e-9, "dense_max_dim={dense_max_dim} tau={tau} n={n}");
            }
        }
    }

    #[test]
    fn steady_state_is_a_fixed_point() {
        let spec = SystemSpec::mech(MechParams {
            delta: 0.2,
            u: 0.3,
            j: 1.1,
            omega1: 0.1,
            ..Default::default()
        });
        for dims in [[3, 3], [4, 4]] {
            let sol = solve_system(&spec, &dims, &SteadyOptions::default()).unwrap();
            let out = evolve(&sol.liouvillian, &sol.rho, 3.0, &EvolveOptions::default()).unwrap();
            assert!(out.max_abs_diff(&sol.rho) < 1e-9);
        }
    }

    #[test]
    fn expm_matches_scalar_exponential_and_rotation() {
        let a = Mat::from_fn(2, 2, |r, c| match (r, c) {
            (0, 1) => Complex64::new(-7.0, 0.0),
            (1, 0) => Complex64::new(7.0, 0.0),
            _ => ZERO,
        });
        let e = expm(&a);
        assert!((e[(0, 0)].re - 7f64.cos()).abs() < 1e-13);
        assert!((e[(1, 0)].re - 7f64.sin()).abs() < 1e-13);
        let d = Mat::from_fn(3, 3, |r, c| if r == c { Complex64::new(-(r as f64) * 10.0, 1.0) } else { ZERO });
        let e = expm(&d);
        for k in 0..3 {
            let expected = Complex64::new(-(k as f64) * 10.0, 1.0).exp();
            assert!((e[(k, k)] - expected).norm() < 1e-13 * expected.norm().max(1e-300) + 1e-300);
        }
    }

    #[test]
    fn convergence_check_examples() {
        let opts = SteadyOptions::default();
        let vacuum = SystemSpec::mech(MechParams {
            delta: 0.2,
            j: 1.0,
            ..Default::default()
        });
        let r = convergence_check(&vacuum, &[3, 3], &opts).unwrap();
        assert_eq!(r.max_relative_change, 0.0);
        assert!(r.converged);

        let strong = SystemSpec::mech(MechParams {
            omega1: 1.0,
            delta: 0.24,
            u: 0.18,
            j: 1.5,
            ..Default::default()
        });
        let r = convergence_check(&strong, &[3, 3], &opts).unwrap();
        assert!(!r.converged, "max change {}", r.max_relative_change);
    }

    #[test]
    fn top_level_population_flags_strong_drive() {
        let spec = SystemSpec::mech(MechParams {
            omega1: 1.0,
            j: 1.0,
            ..Default::default()
        });
        let sol = solve_system(
            &spec,
            &[3, 3],
            &SteadyOptions {
                truncation_check: false,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(!sol.truncation_ok());
    }
}
