//! Built-in oracle suite: analytic limits and internal cross-checks that need
//! no reference data.

use std::fmt;

use crate::correl::{g2_zero, occupation};
use crate::error::Result;
use crate::fock::{destroy, fock_projector, HilbertSpace};
use crate::model::{MechParams, SystemSpec, B1};
use crate::optimal::{
    amplitude_g2, amplitude_steady_state, quadratic_coeffs, scaled_determinant_residual,
    single_drive_optimal, two_drive_optimal, Branch, X22Phase,
};
use crate::steady::{evolve, residual_norm, solve_system, EvolveOptions, SteadyOptions};

/// Bound for the scaled determinant at the two-drive roots.
pub const DETERMINANT_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Informational checks are reported but never fail the suite.
    pub informational: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed || c.informational)
    }

    fn push(&mut self, name: impl Into<String>, passed: bool, detail: String) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            informational: false,
            detail,
        });
    }

    fn note(&mut self, name: impl Into<String>, detail: String) {
        self.checks.push(Check {
            name: name.into(),
            passed: true,
            informational: true,
            detail,
        });
    }

    fn record(&mut self, name: &str, outcome: Result<(bool, String)>) {
        match outcome {
            Ok((ok, detail)) => self.push(name, ok, detail),
            Err(e) => self.push(name, false, format!("error: {e}")),
        }
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let tag = match (c.informational, c.passed) {
                (true, _) => "INFO",
                (false, true) => "PASS",
                (false, false) => "FAIL",
            };
            writeln!(f, "{tag} {}: {}", c.name, c.detail)?;
        }
        Ok(())
    }
}

fn linear_mode(delta: f64, omega1: f64, nth: f64) -> SystemSpec {
    SystemSpec::mech(MechParams {
        delta,
        omega1,
        nth,
        ..Default::default()
    })
}

/// Driven linear resonator: `g² = 1`, `⟨n⟩ = Ω²/(Δ² + γ²/4)`.
pub fn coherent_check(delta: f64, omega: f64) -> Result<(f64, f64, f64)> {
    let sol = solve_system(&linear_mode(delta, omega, 0.0), &[14, 2], &SteadyOptions::default())?;
    let b = destroy(&sol.space, B1)?;
    let expected = omega * omega / (delta * delta + 0.25);
    Ok((g2_zero(&sol.rho, &b)?, occupation(&sol.rho, &b)?, expected))
}

/// Undriven resonator in a thermal bath: `g² = 2`, `⟨n⟩ = n_th`.
pub fn thermal_check(nth: f64) -> Result<(f64, f64)> {
    // b2 is a spectator here; its two-level truncation is deliberate
    let opts = SteadyOptions {
        truncation_check: false,
        ..Default::default()
    };
    let sol = solve_system(&linear_mode(0.0, 0.0, nth), &[40, 2], &opts)?;
    let b = destroy(&sol.space, B1)?;
    Ok((g2_zero(&sol.rho, &b)?, occupation(&sol.rho, &b)?))
}

fn optimal_single(j: f64, omega1: f64) -> Result<MechParams> {
    let o = single_drive_optimal(j, 1.0, Branch::Plus)?;
    Ok(MechParams {
        delta: o.delta_opt,
        u: o.u_opt,
        j,
        omega1,
        ..Default::default()
    })
}

/// `(amplitude-model g², master-equation g²)` for a single drive.
pub fn amplitude_vs_master(p: &MechParams) -> Result<(f64, f64)> {
    let amp = amplitude_g2(&amplitude_steady_state(p)?)?;
    let sol = solve_system(&SystemSpec::mech(*p), &[6, 6], &SteadyOptions::default())?;
    let me = g2_zero(&sol.rho, &destroy(&sol.space, B1)?)?;
    Ok((amp, me))
}

/// Weak-drive points for the amplitude cross-check: detuned by 0.05γ from the
/// single-drive optima, plus one generic point.
pub fn amplitude_check_points(omega1: f64) -> Result<Vec<MechParams>> {
    let mut out = Vec::new();
    for j in [0.8, 0.95, 1.5] {
        let p = optimal_single(j, omega1)?;
        out.push(MechParams { delta: p.delta + 0.05, ..p });
    }
    out.push(MechParams {
        delta: 0.3,
        u: 0.2,
        j: 1.1,
        omega1,
        ..Default::default()
    });
    Ok(out)
}

/// Largest entry of `e^{L(t₁+t₂)}ρ − e^{Lt₂}e^{Lt₁}ρ` from the vacuum.
pub fn semigroup_defect(dims: &[usize], t1: f64, t2: f64) -> Result<f64> {
    let p = optimal_single(0.95, 0.1)?;
    let space = HilbertSpace::new(dims)?;
    let l = SystemSpec::mech(MechParams { nth: 0.01, ..p }).liouvillian(&space)?;
    let rho0 = fock_projector(&space, &vec![0; dims.len()])?;
    let opts = EvolveOptions::default();
    let direct = evolve(&l, &rho0, t1 + t2, &opts)?;
    let split = evolve(&l, &evolve(&l, &rho0, t1, &opts)?, t2, &opts)?;
    Ok(direct.max_abs_diff(&split))
}

/// Scaled determinant at both two-drive roots for `(U, J, Δ)`, for each x₂₂ phase.
pub fn determinant_at_roots(u: f64, j: f64, delta: f64, omega1: f64) -> Result<[(X22Phase, [f64; 2]); 2]> {
    let (plus, minus) = two_drive_optimal(u, j, delta, 1.0)?;
    let at = |variant| -> Result<[f64; 2]> {
        let mut out = [0.0; 2];
        for (k, r) in [plus, minus].iter().enumerate() {
            let p = MechParams {
                delta,
                u,
                j,
                omega1,
                omega2: omega1 * r.zeta,
                phi: r.phi,
                ..Default::default()
            };
            out[k] = scaled_determinant_residual(&p, variant)?;
        }
        Ok(out)
    };
    Ok([
        (X22Phase::AsPrinted, at(X22Phase::AsPrinted)?),
        (X22Phase::Doubled, at(X22Phase::Doubled)?),
    ])
}

/// Runs every oracle.
pub fn run_oracle_suite() -> VerificationReport {
    let mut rep = VerificationReport::default();

    rep.record(
        "coherent state",
        coherent_check(0.0, 0.1).map(|(g2, n, expected)| {
            (
                (g2 - 1.0).abs() < 1e-6 && (n - expected).abs() < 1e-6,
                format!("g2 = {g2:.9}, n = {n:.9} (expected {expected:.9})"),
            )
        }),
    );
    rep.record(
        "thermal state",
        thermal_check(0.5).map(|(g2, n)| {
            (
                (g2 - 2.0).abs() < 1e-6 && (n - 0.5).abs() < 1e-6,
                format!("g2 = {g2:.9}, n = {n:.9} (expected 2, 0.5)"),
            )
        }),
    );
    rep.record(
        "trace preservation",
        optimal_single(1.5, 0.1).and_then(|p| {
            let space = HilbertSpace::new(&[6, 6])?;
            let r = SystemSpec::mech(MechParams { nth: 0.01, ..p }).liouvillian(&space)?.trace_identity_residual();
            Ok((r < 1e-10, format!("|vec(I)† L| = {r:e}")))
        }),
    );
    rep.record(
        "steady-state residual",
        optimal_single(0.8, 0.1).and_then(|p| {
            let sol = solve_system(&SystemSpec::mech(p), &[6, 6], &SteadyOptions::default())?;
            let r = residual_norm(&sol.liouvillian, &sol.rho);
            Ok((r < 1e-10, format!("|L vec(rho)| = {r:e}")))
        }),
    );
    match amplitude_check_points(1e-3) {
        Ok(points) => {
            for p in points {
                rep.record(
                    &format!("amplitude model vs master equation (delta = {:.4}, u = {:.4}, J = {})", p.delta, p.u, p.j),
                    amplitude_vs_master(&p).map(|(amp, me)| {
                        let rel = (amp - me).abs() / me;
                        (rel < 0.2, format!("amplitude {amp:.6e}, master {me:.6e}, relative {rel:.2e}"))
                    }),
                );
            }
        }
        Err(e) => rep.push("amplitude model vs master equation", false, format!("error: {e}")),
    }
    // at the optimum both estimates are residues of an exact cancellation
    for j in [0.8, 0.95, 1.5] {
        if let Ok((amp, me)) = optimal_single(j, 1e-3).and_then(|p| amplitude_vs_master(&p)) {
            rep.note(
                format!("amplitude model at the single-drive optimum (J = {j})"),
                format!("amplitude {amp:.3e}, master {me:.3e}"),
            );
        }
    }
    for dims in [[3usize, 3], [4, 4]] {
        rep.record(
            &format!("semigroup property (dims {dims:?})"),
            semigroup_defect(&dims, 0.7, 1.9).map(|d| (d < 1e-8, format!("max deviation {d:e}"))),
        );
    }

    match determinant_at_roots(0.5, 0.5, 0.5, 0.1) {
        Ok([(_, printed), (_, doubled)]) => {
            let worst = |v: [f64; 2]| v[0].max(v[1]);
            rep.note(
                "determinant, x22 as printed",
                format!(
                    "max |det|/max|x|^3 = {:e} ({})",
                    worst(printed),
                    if worst(printed) < DETERMINANT_TOLERANCE { "vanishes" } else { "does not vanish" }
                ),
            );
            rep.push(
                "determinant, x22 with doubled phase",
                worst(doubled) < DETERMINANT_TOLERANCE,
                format!("max |det|/max|x|^3 = {:e}", worst(doubled)),
            );
        }
        Err(e) => rep.push("determinant", false, format!("error: {e}")),
    }

    for j in [0.8, 0.95, 1.5] {
        if let Ok(o) = single_drive_optimal(j, 1.0, Branch::Plus) {
            let a0 = quadratic_coeffs(o.u_opt, j, o.delta_opt, 1.0).a0;
            rep.note(
                format!("single-drive limit of the quadratic (J = {j})"),
                format!("|a0(delta_opt, u_opt)| = {:.4e}", a0.norm()),
            );
        }
    }
    rep
}
