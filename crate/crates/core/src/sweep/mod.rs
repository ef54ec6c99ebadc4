//! Configuration-driven parameter sweeps.
//!
//! Grid points are solved independently on a rayon pool and assembled in
//! row-major order, so the output does not depend on the worker count.

pub mod config;
pub mod csv;

use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::correl::{g2_tau, Observables};
use crate::error::{Error, Result};
use crate::fock::destroy;
use crate::model::{SystemSpec, B1};
use crate::optimal::{single_drive_optimal, two_drive_optimal, Branch};
use crate::steady::{convergence_check, solve_system, EvolveOptions, SteadyOptions};

pub use config::{AxisSpec, ModelKind, Observable, OptimalMode, SweepConfig};

/// Environment variable overriding the worker count.
pub const WORKERS_ENV: &str = "PHONOBLOCK_WORKERS";

/// One output row. Input fields hold the values actually used, including
/// auto-filled optima; they are NaN when the optimum could not be formed.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub delta: f64,
    pub u: f64,
    pub j: f64,
    pub zeta: f64,
    pub phi: f64,
    pub nth: f64,
    pub g2_b: Option<f64>,
    pub n_b1: Option<f64>,
    pub n_b2: Option<f64>,
    pub g2_a: Option<f64>,
    pub n_a: Option<f64>,
    pub tau: Option<f64>,
    pub g2_tau: Option<f64>,
    pub converged: Option<bool>,
    pub error_code: Option<String>,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub records: Vec<SweepRecord>,
    /// Solve time of the grid point each record belongs to.
    pub wall_times: Vec<Duration>,
}

impl SweepResult {
    pub fn write_csv<W: std::io::Write>(&self, out: W, comment: Option<&str>) -> Result<()> {
        csv::write_csv(out, &self.records, comment)
    }
}

/// Worker count from the flag, else from [`WORKERS_ENV`], else rayon's default.
pub fn resolve_workers(flag: Option<usize>) -> Result<Option<usize>> {
    if let Some(n) = flag {
        return if n == 0 {
            Err(Error::Config("worker count must be positive".into()))
        } else {
            Ok(Some(n))
        };
    }
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Config(format!("{WORKERS_ENV}={v:?} is not a positive integer"))),
        },
        Err(_) => Ok(None),
    }
}

#[derive(Debug, Clone, Copy)]
struct Point {
    delta: f64,
    u: f64,
    j: f64,
    zeta: f64,
    phi: f64,
    nth: f64,
}

/// Non-τ grid points in row-major order.
fn grid(cfg: &SweepConfig) -> Vec<Point> {
    let base = cfg.base_spec().mech;
    let zeta0 = cfg.params.zeta.unwrap_or(0.0);
    let mut points = vec![Point {
        delta: base.delta,
        u: base.u,
        j: base.j,
        zeta: zeta0,
        phi: base.phi,
        nth: base.nth,
    }];
    for (name, spec) in cfg.axes.named() {
        if name == "tau" {
            continue;
        }
        let values = spec.values();
        points = points
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |&v| {
                    let mut q = p;
                    match name {
                        "delta" => q.delta = v,
                        "u" => q.u = v,
                        "j" => q.j = v,
                        "zeta" => q.zeta = v,
                        "phi" => q.phi = v,
                        _ => q.nth = v,
                    }
                    q
                })
            })
            .collect();
    }
    points
}

fn fill_optimum(cfg: &SweepConfig, p: &mut Point) -> Result<()> {
    let filled = cfg.auto_filled();
    let fills = |name| filled.contains(&name);
    match cfg.model.optimal {
        OptimalMode::Off => {}
        OptimalMode::SingleDrive => {
            let o = single_drive_optimal(p.j, 1.0, Branch::Plus)?;
            if fills("delta") {
                p.delta = o.delta_opt;
            }
            if fills("u") {
                p.u = o.u_opt;
            }
        }
        OptimalMode::TwoDrivePlus | OptimalMode::TwoDriveMinus => {
            let (plus, minus) = two_drive_optimal(p.u, p.j, p.delta, 1.0)?;
            let o = if cfg.model.optimal == OptimalMode::TwoDrivePlus { plus } else { minus };
            if fills("zeta") {
                p.zeta = o.zeta;
            }
            if fills("phi") {
                p.phi = o.phi;
            }
        }
    }
    Ok(())
}

fn spec_at(cfg: &SweepConfig, p: &Point) -> SystemSpec {
    let mut spec = cfg.base_spec();
    let m = &mut spec.mech;
    m.delta = p.delta;
    m.u = p.u;
    m.j = p.j;
    m.omega2 = m.omega1 * p.zeta;
    m.phi = p.phi;
    m.nth = p.nth;
    spec
}

fn blank(p: &Point) -> SweepRecord {
    SweepRecord {
        delta: p.delta,
        u: p.u,
        j: p.j,
        zeta: p.zeta,
        phi: p.phi,
        nth: p.nth,
        g2_b: None,
        n_b1: None,
        n_b2: None,
        g2_a: None,
        n_a: None,
        tau: None,
        g2_tau: None,
        converged: None,
        error_code: None,
    }
}

fn run_point(cfg: &SweepConfig, mut p: Point, taus: &[f64]) -> Vec<SweepRecord> {
    let rows = taus.len().max(1);
    let failed = |p: &Point, e: Error| -> Vec<SweepRecord> {
        let mut r = blank(p);
        r.error_code = Some(e.code().to_string());
        let mut out = vec![r; rows];
        for (r, t) in out.iter_mut().zip(taus) {
            r.tau = Some(*t);
        }
        out
    };

    let filled = cfg.auto_filled();
    if let Err(e) = fill_optimum(cfg, &mut p) {
        for name in filled {
            match name {
                "delta" => p.delta = f64::NAN,
                "u" => p.u = f64::NAN,
                "zeta" => p.zeta = f64::NAN,
                _ => p.phi = f64::NAN,
            }
        }
        return failed(&p, e);
    }

    let spec = spec_at(cfg, &p);
    let dims = cfg.dims();
    let opts = SteadyOptions::default();
    let sol = match solve_system(&spec, &dims, &opts) {
        Ok(s) => s,
        Err(e) => return failed(&p, e),
    };
    let obs = match Observables::from_solution(&sol) {
        Ok(o) => o,
        Err(e) => return failed(&p, e),
    };

    let mut errors: Vec<&'static str> = Vec::new();
    let mut rec = blank(&p);
    let want = |o| cfg.wants(o);
    if want(Observable::G2B) {
        match &obs.g2_b {
            Ok(g) => rec.g2_b = Some(*g),
            Err(e) => errors.push(e.code()),
        }
    }
    if want(Observable::NB1) {
        rec.n_b1 = Some(obs.n_b1);
    }
    if want(Observable::NB2) {
        rec.n_b2 = Some(obs.n_b2);
    }
    if want(Observable::G2A) {
        match &obs.g2_a {
            Some(Ok(g)) => rec.g2_a = Some(*g),
            Some(Err(e)) => errors.push(e.code()),
            None => {}
        }
    }
    if want(Observable::NA) {
        rec.n_a = obs.n_a;
    }
    rec.converged = Some(if cfg.output.convergence {
        match convergence_check(&spec, &dims, &opts) {
            Ok(report) => report.converged,
            Err(e) => {
                errors.push(e.code());
                false
            }
        }
    } else {
        sol.truncation_ok()
    });

    if taus.is_empty() {
        rec.error_code = errors.first().map(|s| s.to_string());
        return vec![rec];
    }
    let series = destroy(&sol.space, B1)
        .and_then(|b| g2_tau(&sol.liouvillian, &sol.rho, &b, taus, &EvolveOptions::default()));
    taus.iter()
        .enumerate()
        .map(|(k, &t)| {
            let mut r = rec.clone();
            r.tau = Some(t);
            let mut errs = errors.clone();
            match &series {
                Ok(s) => r.g2_tau = Some(s.values[k]),
                Err(e) => errs.push(e.code()),
            }
            r.error_code = errs.first().map(|s| s.to_string());
            r
        })
        .collect()
}

/// Runs every grid point. Point failures are recorded in the rows; only a
/// bad configuration or worker count fails the sweep.
pub fn run_sweep(cfg: &SweepConfig, workers: Option<usize>) -> Result<SweepResult> {
    cfg.validate()?;
    let points = grid(cfg);
    let taus = cfg.axes.tau.as_ref().map(AxisSpec::values).unwrap_or_default();
    let work = || -> Vec<(Vec<SweepRecord>, Duration)> {
        points
            .par_iter()
            .map(|p| {
                let start = Instant::now();
                let rows = run_point(cfg, *p, &taus);
                (rows, start.elapsed())
            })
            .collect()
    };
    let chunks = match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(work),
        None => work(),
    };
    let mut records = Vec::new();
    let mut wall_times = Vec::new();
    for (rows, t) in chunks {
        wall_times.extend(std::iter::repeat(t).take(rows.len()));
        records.extend(rows);
    }
    Ok(SweepResult { records, wall_times })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> SweepConfig {
        SweepConfig::from_toml(text).unwrap()
    }

    #[test]
    fn row_count_and_order() {
        let c = cfg(r#"
            [model]
            kind = "mech"
            dims = [3, 3]
            [params]
            omega1 = 0.1
            [axes]
            delta = { values = [0.1, 0.2] }
            j = { values = [0.5, 1.0, 1.5] }
        "#);
        let r = run_sweep(&c, Some(2)).unwrap();
        assert_eq!(r.records.len(), 6);
        let order: Vec<(f64, f64)> = r.records.iter().map(|x| (x.delta, x.j)).collect();
        assert_eq!(
            order,
            vec![(0.1, 0.5), (0.1, 1.0), (0.1, 1.5), (0.2, 0.5), (0.2, 1.0), (0.2, 1.5)]
        );
        assert!(r.records.iter().all(|x| x.g2_b.is_some() && x.error_code.is_none()));
    }

    #[test]
    fn vacuum_point_records_error() {
        let c = cfg(r#"
            [model]
            kind = "mech"
            dims = [3, 3]
            [axes]
            j = { values = [1.0] }
        "#);
        let r = run_sweep(&c, Some(1)).unwrap();
        assert_eq!(r.records.len(), 1);
        assert_eq!(r.records[0].g2_b, None);
        assert_eq!(r.records[0].n_b1, Some(0.0));
        assert_eq!(r.records[0].error_code.as_deref(), Some("undefined_correlation"));
    }

    #[test]
    fn domain_errors_are_per_point() {
        let c = cfg(r#"
            [model]
            kind = "mech"
            optimal = "single-drive"
            dims = [3, 3]
            [params]
            omega1 = 0.1
            [axes]
            j = { values = [0.5, 1.5] }
        "#);
        let r = run_sweep(&c, Some(2)).unwrap();
        assert_eq!(r.records[0].error_code.as_deref(), Some("domain"));
        assert!(r.records[0].delta.is_nan());
        assert!(r.records[1].error_code.is_none());
        assert!((r.records[1].delta - 0.2359).abs() < 1e-3);
    }

    #[test]
    fn worker_flag_takes_precedence() {
        assert_eq!(resolve_workers(Some(3)).unwrap(), Some(3));
        assert!(resolve_workers(Some(0)).is_err());
    }
}
