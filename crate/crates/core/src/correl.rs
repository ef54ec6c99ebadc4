//! Occupations and second-order correlation functions.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{destroy, expectation, OperatorMatrix};
use crate::model::{vectorize, Superoperator, SystemSpec, B1, B2, CAVITY};
use crate::steady::{evolve_vec, solve_system, EvolveOptions, SteadyOptions, SteadySolution};

/// Occupancies below this make `g²` undefined.
pub const OCCUPANCY_FLOOR: f64 = 1e-12;

/// Largest imaginary part tolerated in a correlation before it is rejected.
pub const IMAG_TOLERANCE: f64 = 1e-10;

fn real_part(z: Complex64, scale: f64) -> Result<f64> {
    if z.im.abs() > IMAG_TOLERANCE * scale.max(1.0) {
        return Err(Error::ComplexCorrelation(z.im));
    }
    Ok(z.re)
}

/// `⟨a†a⟩`.
pub fn occupation(rho: &OperatorMatrix, a: &OperatorMatrix) -> Result<f64> {
    let n = expectation(rho, &(&a.adjoint() * a))?;
    real_part(n, n.re.abs())
}

/// `⟨a†a†aa⟩ / ⟨a†a⟩²`.
pub fn g2_zero(rho: &OperatorMatrix, a: &OperatorMatrix) -> Result<f64> {
    let n = occupation(rho, a)?;
    if n < OCCUPANCY_FLOOR {
        return Err(Error::UndefinedCorrelation {
            occupancy: n,
            floor: OCCUPANCY_FLOOR,
        });
    }
    let ad = a.adjoint();
    let num = expectation(rho, &(&(&ad * &ad) * &(a * a)))?;
    Ok(real_part(num, num.re.abs())? / (n * n))
}

/// Sampled `g²(τ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSeries {
    pub taus: Vec<f64>,
    pub values: Vec<f64>,
}

/// `g²(τ) = Tr[a†a e^{Lτ}(aρa†)] / ⟨a†a⟩²` by the quantum regression theorem.
///
/// `taus` must be nonnegative and nondecreasing; each point is propagated
/// from the previous one. At `τ = 0` the value equals [`g2_zero`].
pub fn g2_tau(
    l: &Superoperator,
    rho: &OperatorMatrix,
    a: &OperatorMatrix,
    taus: &[f64],
    opts: &EvolveOptions,
) -> Result<CorrelationSeries> {
    if let Some(&t) = taus.iter().find(|t| !(**t >= 0.0)) {
        return Err(Error::NegativeTime(t));
    }
    if taus.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter("tau grid must be nondecreasing".into()));
    }
    let n = occupation(rho, a)?;
    if n < OCCUPANCY_FLOOR {
        return Err(Error::UndefinedCorrelation {
            occupancy: n,
            floor: OCCUPANCY_FLOOR,
        });
    }
    let at_zero = g2_zero(rho, a)?;
    let num_op = vectorize(&(&a.adjoint() * a));
    let dim = rho.dim();
    // Tr(Aσ) = Σ_ij A_ij σ_ji, i.e. vec(Aᵀ) · vec(σ)
    let weights: Vec<Complex64> = (0..dim * dim)
        .map(|k| {
            let (col, row) = (k / dim, k % dim);
            num_op[row * dim + col]
        })
        .collect();

    let mut state = vectorize(&(&(a * rho) * &a.adjoint()));
    let mut t_prev = 0.0;
    let mut values = Vec::with_capacity(taus.len());
    for &t in taus {
        if t == 0.0 {
            values.push(at_zero);
            continue;
        }
        state = evolve_vec(l, &state, t - t_prev, opts)?;
        t_prev = t;
        let z: Complex64 = weights.iter().zip(&state).map(|(w, s)| w * s).sum();
        values.push(real_part(z, z.re.abs())? / (n * n));
    }
    Ok(CorrelationSeries {
        taus: taus.to_vec(),
        values,
    })
}

/// Steady-state observables of a solved model.
///
/// `g2_b` is the equal-time correlation of the first mechanical mode; the
/// cavity fields are present only when the model includes a cavity.
#[derive(Debug, Clone, PartialEq)]
pub struct Observables {
    pub g2_b: Result<f64>,
    pub n_b1: f64,
    pub n_b2: f64,
    pub g2_a: Option<Result<f64>>,
    pub n_a: Option<f64>,
    pub top_level_population: f64,
}

impl Observables {
    pub fn from_solution(sol: &SteadySolution) -> Result<Self> {
        let b1 = destroy(&sol.space, B1)?;
        let b2 = destroy(&sol.space, B2)?;
        let (g2_a, n_a) = if sol.space.num_modes() > CAVITY {
            let a = destroy(&sol.space, CAVITY)?;
            (Some(g2_zero(&sol.rho, &a)), Some(occupation(&sol.rho, &a)?))
        } else {
            (None, None)
        };
        Ok(Observables {
            g2_b: g2_zero(&sol.rho, &b1),
            n_b1: occupation(&sol.rho, &b1)?,
            n_b2: occupation(&sol.rho, &b2)?,
            g2_a,
            n_a,
            top_level_population: sol.top_level_population,
        })
    }

    pub fn solve(spec: &SystemSpec, dims: &[usize], opts: &SteadyOptions) -> Result<Self> {
        Self::from_solution(&solve_system(spec, dims, opts)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{fock_projector, HilbertSpace};
    use crate::model::{build_liouvillian, MechParams};
    use crate::steady::steady_state;

    #[test]
    fn fock_and_coherent_like_values() {
        let s = HilbertSpace::new(&[5]).unwrap();
        let b = destroy(&s, 0).unwrap();
        let one = fock_projector(&s, &[1]).unwrap();
        assert_eq!(g2_zero(&one, &b).unwrap(), 0.0);
        let two = fock_projector(&s, &[2]).unwrap();
        assert!((g2_zero(&two, &b).unwrap() - 0.5).abs() < 1e-14);
        let vac = fock_projector(&s, &[0]).unwrap();
        assert!(matches!(g2_zero(&vac, &b), Err(Error::UndefinedCorrelation { .. })));
    }

    #[test]
    fn thermal_state_is_bunched() {
        let s = HilbertSpace::new(&[40]).unwrap();
        let b = destroy(&s, 0).unwrap();
        let l = build_liouvillian(&OperatorMatrix::zeros(40), &[(b.adjoint(), 0.5), (b.clone(), 1.5)]).unwrap();
        let rho = steady_state(&l, &SteadyOptions::default()).unwrap();
        assert!((occupation(&rho, &b).unwrap() - 0.5).abs() < 1e-9);
        assert!((g2_zero(&rho, &b).unwrap() - 2.0).abs() < 1e-6);
    }

    #[test]
    fn g2_tau_starts_at_g2_zero_and_relaxes_to_one() {
        let spec = SystemSpec::mech(MechParams {
            delta: 0.16357,
            u: 0.51885,
            j: 0.95,
            omega1: 0.01,
            ..Default::default()
        });
        let sol = solve_system(&spec, &[4, 4], &SteadyOptions::default()).unwrap();
        let b = destroy(&sol.space, B1).unwrap();
        let taus = [0.0, 0.5, 30.0];
        let s = g2_tau(&sol.liouvillian, &sol.rho, &b, &taus, &EvolveOptions::default()).unwrap();
        assert_eq!(s.values[0], g2_zero(&sol.rho, &b).unwrap());
        assert!((s.values[2] - 1.0).abs() < 1e-3, "{:?}", s.values);
    }

    #[test]
    fn g2_tau_rejects_bad_grids() {
        let s = HilbertSpace::new(&[3]).unwrap();
        let b = destroy(&s, 0).unwrap();
        let l = build_liouvillian(&OperatorMatrix::zeros(3), &[(b.clone(), 1.0)]).unwrap();
        let rho = fock_projector(&s, &[1]).unwrap();
        let o = EvolveOptions::default();
        assert!(matches!(g2_tau(&l, &rho, &b, &[-1.0], &o), Err(Error::NegativeTime(_))));
        assert!(matches!(g2_tau(&l, &rho, &b, &[1.0, 0.5], &o), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn g2_tau_is_insensitive_to_integrator_tolerance() {
        let spec = SystemSpec::mech(MechParams {
            delta: 0.10904,
            u: 0.98282,
            j: 0.8,
            omega1: 0.01,
            nth: 0.001,
            ..Default::default()
        });
        let sol = solve_system(&spec, &[5, 5], &SteadyOptions::default()).unwrap();
        let b = destroy(&sol.space, B1).unwrap();
        let taus = [0.5, 1.0, 2.0, 4.0];
        let base = g2_tau(&sol.liouvillian, &sol.rho, &b, &taus, &EvolveOptions::default()).unwrap();
        let finer = EvolveOptions {
            local_tol: 0.5 * EvolveOptions::default().local_tol,
            ..Default::default()
        };
        let finer = g2_tau(&sol.liouvillian, &sol.rho, &b, &taus, &finer).unwrap();
        for (f, c) in base.values.iter().zip(&finer.values) {
            assert!((f - c).abs() < 1e-6, "{f} vs {c}");
        }
    }
}
