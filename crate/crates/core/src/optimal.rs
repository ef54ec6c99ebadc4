//! Closed-form blockade conditions and the truncated-amplitude model.

use std::f64::consts::{PI, SQRT_2};

use faer::linalg::solvers::Solve;
use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::MechParams;

/// Amplitudes below this make the amplitude-model `g²` undefined.
pub const AMPLITUDE_FLOOR: f64 = 1e-300;

/// Sign selector for the two roots of each optimal condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleDriveOptimum {
    pub delta_opt: f64,
    pub u_opt: f64,
    pub branch: Branch,
}

/// Optimal detuning and Kerr strength for a single drive on the first resonator.
pub fn single_drive_optimal(j: f64, gamma: f64, branch: Branch) -> Result<SingleDriveOptimum> {
    if !(gamma > 0.0) || !j.is_finite() {
        return Err(Error::InvalidParameter(format!("j = {j}, gamma = {gamma}")));
    }
    if !(j > gamma / SQRT_2) {
        return Err(Error::Domain(format!("J = {j} must exceed γ/√2 = {}", gamma / SQRT_2)));
    }
    let (j2, g2) = (j * j, gamma * gamma);
    let inner = (9.0 * j2 * j2 + 8.0 * g2 * j2).sqrt() - g2 - 3.0 * j2;
    let delta_opt = branch.sign() * 0.5 * inner.max(0.0).sqrt();
    let u_opt = delta_opt * (5.0 * g2 + 4.0 * delta_opt * delta_opt) / (2.0 * (2.0 * j2 - g2));
    Ok(SingleDriveOptimum {
        delta_opt,
        u_opt,
        branch,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoDriveOptimum {
    /// Drive ratio Ω₂/Ω₁.
    pub zeta: f64,
    /// Relative drive phase in (−π, π].
    pub phi: f64,
    pub branch: Branch,
}

impl TwoDriveOptimum {
    pub fn phi_over_pi(&self) -> f64 {
        self.phi / PI
    }

    /// `ζe^{−iφ}`.
    pub fn z(&self) -> Complex64 {
        Complex64::from_polar(self.zeta, -self.phi)
    }
}

/// Coefficients of `a₂z² + a₁z + a₀ = 0` in `z = ζe^{−iφ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticCoeffs {
    pub a2: Complex64,
    pub a1: Complex64,
    pub a0: Complex64,
    pub delta_prime: Complex64,
}

impl QuadraticCoeffs {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        (self.a2 * z + self.a1) * z + self.a0
    }

    /// `|a₂z² + a₁z + a₀|` over the largest term magnitude.
    pub fn relative_residual(&self, z: Complex64) -> f64 {
        let scale = (self.a2 * z * z).norm().max((self.a1 * z).norm()).max(self.a0.norm());
        if scale == 0.0 {
            0.0
        } else {
            self.eval(z).norm() / scale
        }
    }
}

pub fn quadratic_coeffs(u: f64, j: f64, delta: f64, gamma: f64) -> QuadraticCoeffs {
    let dp = Complex64::new(delta, -0.5 * gamma);
    let j2 = j * j;
    QuadraticCoeffs {
        a2: 2.0 * j2 * (dp + 0.5 * u),
        a1: -4.0 * j * dp * (dp + u),
        a0: 2.0 * dp * dp * dp + u * (j2 + 2.0 * dp * dp),
        delta_prime: dp,
    }
}

fn wrap_phase(phi: f64) -> f64 {
    let mut p = phi.rem_euclid(2.0 * PI);
    if p > PI {
        p -= 2.0 * PI;
    }
    if p <= -PI {
        p += 2.0 * PI;
    }
    p
}

/// Both roots `ζ±e^{−iφ±}` of the two-drive condition, `(plus, minus)`.
///
/// The square root is the principal branch; the sign is applied after it.
pub fn two_drive_optimal(
    u: f64,
    j: f64,
    delta: f64,
    gamma: f64,
) -> Result<(TwoDriveOptimum, TwoDriveOptimum)> {
    if ![u, j, delta, gamma].iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidParameter("non-finite input".into()));
    }
    let dp = Complex64::new(delta, -0.5 * gamma);
    let j2 = j * j;
    let denom = j2 * (u + 2.0 * dp);
    if denom.norm() == 0.0 {
        return Err(Error::Singular("J²(U + 2Δ') vanishes".into()));
    }
    let lead = 2.0 * j * dp * (u + dp);
    let root = (j2 * u * (2.0 * u * dp * dp + 2.0 * dp * dp * dp - j2 * u - 2.0 * j2 * dp)).sqrt();
    let make = |branch: Branch| {
        let z = (lead + branch.sign() * root) / denom;
        TwoDriveOptimum {
            zeta: z.norm(),
            phi: wrap_phase(-z.arg()),
            branch,
        }
    };
    Ok((make(Branch::Plus), make(Branch::Minus)))
}

/// Phase carried by `Ω₂²` in the middle element of the determinant matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum X22Phase {
    /// `Ω₂²e^{−iφ}`.
    AsPrinted,
    /// `Ω₂²e^{−2iφ}`, matching the third row.
    Doubled,
}

/// The 3×3 coefficient matrix whose determinant vanishes at the two-drive optimum.
pub fn determinant_matrix(p: &MechParams, variant: X22Phase) -> Result<[[Complex64; 3]; 3]> {
    p.validate()?;
    let dp = Complex64::new(p.delta, -0.5 * p.gamma);
    let j = p.j;
    let d = dp * dp - j * j;
    if d.norm() == 0.0 {
        return Err(Error::Singular("Δ'² = J²".into()));
    }
    let (o1, o2) = (p.omega1, p.omega2);
    let e1 = Complex64::from_polar(1.0, -p.phi);
    let e2 = e1 * e1;
    let x22_phase = match variant {
        X22Phase::AsPrinted => e1,
        X22Phase::Doubled => e2,
    };
    let z = Complex64::new(0.0, 0.0);
    let x12 = (j * o1 * o2 * e1 - o1 * o1 * dp) / d;
    let x22 = (j * (o1 * o1 + o2 * o2 * x22_phase) - 2.0 * o1 * o2 * e1 * dp) / d;
    let x32 = (j * o1 * o2 * e1 - o2 * o2 * e2 * dp) / d;
    let r2 = SQRT_2;
    Ok([
        [Complex64::from(j), x12, z],
        [2.0 * dp, x22, Complex64::from(r2 * j)],
        [Complex64::from(j), x32, r2 * (dp + p.u)],
    ])
}

fn det3(m: &[[Complex64; 3]; 3]) -> Complex64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Determinant of [`determinant_matrix`].
pub fn determinant_residual(p: &MechParams, variant: X22Phase) -> Result<Complex64> {
    Ok(det3(&determinant_matrix(p, variant)?))
}

/// `|det X| / max|x_mn|³`.
pub fn scaled_determinant_residual(p: &MechParams, variant: X22Phase) -> Result<f64> {
    let m = determinant_matrix(p, variant)?;
    let scale = m.iter().flatten().map(|x| x.norm()).fold(0.0, f64::max);
    Ok(det3(&m).norm() / scale.powi(3))
}

/// Amplitudes of the two-excitation ansatz with `C₀₀ = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeState {
    pub c00: Complex64,
    pub c10: Complex64,
    pub c01: Complex64,
    pub c20: Complex64,
    pub c11: Complex64,
    pub c02: Complex64,
}

/// Steady amplitudes from the non-Hermitian effective Hamiltonian, truncated
/// at two excitations. Thermal occupation is ignored.
pub fn amplitude_steady_state(p: &MechParams) -> Result<AmplitudeState> {
    p.validate()?;
    if p.outside_weak_drive() {
        log::warn!("amplitude model used outside the weak-drive regime");
    }
    let dp = Complex64::new(p.delta, -0.5 * p.gamma);
    let (j, u, o1, o2) = (p.j, p.u, p.omega1, p.omega2);
    let ep = Complex64::from_polar(1.0, p.phi);
    let em = ep.conj();
    let r2 = SQRT_2;
    let c = Complex64::from;
    let zero = c(0.0);
    // unknowns: C10, C01, C20, C11, C02
    let rows: [[Complex64; 5]; 5] = [
        [dp, c(j), c(r2 * o1), o2 * ep, zero],
        [c(j), dp, zero, c(o1), r2 * o2 * ep],
        [c(r2 * o1), zero, 2.0 * (dp + u), c(r2 * j), zero],
        [o2 * em, c(o1), c(r2 * j), 2.0 * dp, c(r2 * j)],
        [zero, r2 * o2 * em, zero, c(r2 * j), 2.0 * (dp + u)],
    ];
    let rhs_v = [c(-o1), -o2 * em, zero, zero, zero];
    let a = Mat::from_fn(5, 5, |r, k| rows[r][k]);
    let rhs = Mat::from_fn(5, 1, |r, _| rhs_v[r]);
    let x = a.partial_piv_lu().solve(&rhs);
    let v: Vec<Complex64> = (0..5).map(|i| x[(i, 0)]).collect();
    if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Singular("amplitude equations".into()));
    }
    Ok(AmplitudeState {
        c00: c(1.0),
        c10: v[0],
        c01: v[1],
        c20: v[2],
        c11: v[3],
        c02: v[4],
    })
}

/// Leading-order `(C₁₀, C₀₁)` in closed form.
pub fn amplitude_first_order(p: &MechParams) -> Result<(Complex64, Complex64)> {
    let dp = Complex64::new(p.delta, -0.5 * p.gamma);
    let d = dp * dp - p.j * p.j;
    if d.norm() == 0.0 {
        return Err(Error::Singular("Δ'² = J²".into()));
    }
    let w2 = Complex64::from_polar(p.omega2, -p.phi);
    let c10 = (p.j * w2 - p.omega1 * dp) / d;
    let c01 = (p.j * p.omega1 - w2 * dp) / d;
    Ok((c10, c01))
}

/// Weak-drive estimate `g² ≈ 2|C₂₀|²/|C₁₀|⁴`.
pub fn amplitude_g2(state: &AmplitudeState) -> Result<f64> {
    let n10 = state.c10.norm_sqr();
    if !(n10 > AMPLITUDE_FLOOR) {
        return Err(Error::UndefinedCorrelation {
            occupancy: n10,
            floor: AMPLITUDE_FLOOR,
        });
    }
    Ok(2.0 * state.c20.norm_sqr() / (n10 * n10))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_drive_values() {
        let o = single_drive_optimal(1.5, 1.0, Branch::Plus).unwrap();
        assert_eq!((o.delta_opt * 100.0).round() / 100.0, 0.24);
        assert_eq!((o.u_opt * 100.0).round() / 100.0, 0.18);
        let o = single_drive_optimal(0.8, 1.0, Branch::Plus).unwrap();
        assert_eq!((o.delta_opt * 100.0).round() / 100.0, 0.11);
        assert_eq!((o.u_opt * 100.0).round() / 100.0, 0.98);
    }

    #[test]
    fn single_drive_domain() {
        assert!(matches!(single_drive_optimal(0.5, 1.0, Branch::Plus), Err(Error::Domain(_))));
        assert!(matches!(
            single_drive_optimal(1.0 / SQRT_2, 1.0, Branch::Plus),
            Err(Error::Domain(_))
        ));
        assert!(single_drive_optimal(1.0, 0.0, Branch::Plus).is_err());
    }

    #[test]
    fn minus_branch_is_odd() {
        for j in [0.75, 0.95, 1.5, 4.0] {
            let p = single_drive_optimal(j, 1.0, Branch::Plus).unwrap();
            let m = single_drive_optimal(j, 1.0, Branch::Minus).unwrap();
            assert_eq!(m.delta_opt, -p.delta_opt);
            assert_eq!(m.u_opt, -p.u_opt);
        }
    }

    #[test]
    fn two_drive_examples() {
        let (plus, _) = two_drive_optimal(0.5, 0.5, 0.5, 1.0).unwrap();
        assert!((plus.zeta - 2.596).abs() < 1e-3);
        assert!((plus.phi_over_pi() - 0.2071).abs() < 1e-3);
        let (_, minus) = two_drive_optimal(0.5, 0.85, 0.15, 1.0).unwrap();
        assert!((minus.zeta - 1.5188).abs() < 1e-3);
        assert!((minus.phi_over_pi() - 0.3236).abs() < 1e-3);
        let (plus, _) = two_drive_optimal(0.5, 1.0, -0.5, 1.0).unwrap();
        assert!((plus.zeta - 0.7756).abs() < 1e-3);
        assert!((plus.phi_over_pi() - 0.9559).abs() < 1e-3);
    }

    #[test]
    fn roots_satisfy_quadratic() {
        for (u, j, d) in [(0.5, 0.5, 0.5), (0.9, 0.85, 0.15), (0.1, 1.0, -0.5), (2.0, 0.3, 1.7)] {
            let q = quadratic_coeffs(u, j, d, 1.0);
            let (a, b) = two_drive_optimal(u, j, d, 1.0).unwrap();
            for r in [a, b] {
                assert!(r.phi > -PI && r.phi <= PI);
                assert!(q.relative_residual(r.z()) < 1e-9, "{u} {j} {d} {:?}", r);
            }
        }
    }

    #[test]
    fn quadratic_special_cases() {
        let q = quadratic_coeffs(0.0, 0.7, 0.3, 1.0);
        let dp = q.delta_prime;
        assert!((q.a0 - 2.0 * dp * dp * dp).norm() < 1e-15);
        assert!((q.a2 - 2.0 * 0.49 * dp).norm() < 1e-15);
        let q = quadratic_coeffs(0.4, 0.0, 0.3, 1.0);
        assert_eq!(q.a2, Complex64::new(0.0, 0.0));
        assert_eq!(q.a1.norm(), 0.0);
        assert!(matches!(two_drive_optimal(0.4, 0.0, 0.3, 1.0), Err(Error::Singular(_))));
    }

    fn at_root(u: f64, j: f64, d: f64, r: TwoDriveOptimum) -> MechParams {
        MechParams {
            delta: d,
            u,
            j,
            omega1: 0.1,
            omega2: 0.1 * r.zeta,
            phi: r.phi,
            ..Default::default()
        }
    }

    #[test]
    fn doubled_phase_determinant_vanishes_at_roots() {
        for (u, j, d) in [(0.5, 0.5, 0.5), (0.5, 0.85, 0.15), (0.5, 1.0, -0.5), (1.3, 0.6, 0.9)] {
            let (a, b) = two_drive_optimal(u, j, d, 1.0).unwrap();
            for r in [a, b] {
                let res = scaled_determinant_residual(&at_root(u, j, d, r), X22Phase::Doubled).unwrap();
                assert!(res < 1e-12, "{res}");
            }
        }
    }

    #[test]
    fn determinant_is_large_away_from_roots() {
        let p = MechParams {
            delta: 0.5,
            u: 0.5,
            j: 0.5,
            omega1: 0.1,
            omega2: 0.05,
            phi: -1.0,
            ..Default::default()
        };
        for v in [X22Phase::AsPrinted, X22Phase::Doubled] {
            assert!(scaled_determinant_residual(&p, v).unwrap() > 1e-4);
        }
    }

    #[test]
    fn undriven_amplitudes_vanish() {
        let s = amplitude_steady_state(&MechParams {
            delta: 0.3,
            u: 0.2,
            j: 0.9,
            ..Default::default()
        })
        .unwrap();
        for c in [s.c10, s.c01, s.c20, s.c11, s.c02] {
            assert_eq!(c.norm(), 0.0);
        }
        assert!(amplitude_g2(&s).is_err());
    }

    #[test]
    fn decoupled_second_mode_stays_empty() {
        let s = amplitude_steady_state(&MechParams {
            delta: 0.3,
            u: 0.2,
            omega1: 0.01,
            ..Default::default()
        })
        .unwrap();
        assert_eq!(s.c01.norm(), 0.0);
        assert_eq!(s.c11.norm(), 0.0);
        assert_eq!(s.c02.norm(), 0.0);
    }

    #[test]
    fn linear_system_is_coherent() {
        let s = amplitude_steady_state(&MechParams {
            delta: 0.4,
            omega1: 1e-4,
            ..Default::default()
        })
        .unwrap();
        // g² = |1 − Ω²/Δ'²|² in the truncated ansatz
        assert!((amplitude_g2(&s).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn full_solve_matches_closed_form_at_weak_drive() {
        let p = MechParams {
            delta: 0.2,
            u: 0.7,
            j: 1.1,
            omega1: 1e-3,
            omega2: 5e-4,
            phi: 0.4,
            ..Default::default()
        };
        let s = amplitude_steady_state(&p).unwrap();
        let (c10, c01) = amplitude_first_order(&p).unwrap();
        assert!((s.c10 - c10).norm() / c10.norm() < 1e-4);
        assert!((s.c01 - c01).norm() / c01.norm() < 1e-4);
        assert!(s.c10.norm() > s.c20.norm() && s.c01.norm() > s.c02.norm());
    }

    #[test]
    fn phase_wrapping() {
        assert_eq!(wrap_phase(PI), PI);
        assert_eq!(wrap_phase(-PI), PI);
        assert!((wrap_phase(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
    }
}
