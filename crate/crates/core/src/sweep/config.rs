//! TOML sweep configuration.
//!
//! ```toml
//! [model]
//! kind = "mech"              # or "optomech"
//! optimal = "single-drive"   # off | single-drive | two-drive-plus | two-drive-minus
//! dims = [6, 6]              # optional, one entry per mode
//!
//! [params]                   # fixed values in units of γ
//! j = 1.5
//! omega1 = 0.1
//!
//! [axes]                     # swept values; row-major in the order delta, u, j, zeta, phi, nth, tau
//! delta = { start = 0.0, stop = 0.5, count = 51 }   # count defaults to 101
//! nth = { values = [0.0, 1e-4, 1e-3] }
//!
//! [output]
//! observables = ["g2_b", "n_b1"]
//! convergence = false        # re-solve at dims + 1 and flag changes above 1e-3
//! ```
//!
//! The drive on the second resonator is `Ω₂ = ζ·Ω₁`. Unknown keys are errors.

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::model::{MechParams, OmParams, SystemSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Mech,
    Optomech,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptimalMode {
    #[default]
    Off,
    SingleDrive,
    TwoDrivePlus,
    TwoDriveMinus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    G2B,
    G2A,
    NB1,
    NB2,
    NA,
    G2Tau,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub kind: ModelKind,
    #[serde(default)]
    pub optimal: OptimalMode,
    pub dims: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub delta: Option<f64>,
    pub u: Option<f64>,
    pub j: Option<f64>,
    pub omega1: Option<f64>,
    pub zeta: Option<f64>,
    pub phi: Option<f64>,
    pub nth: Option<f64>,
    pub g: Option<f64>,
    pub kappa: Option<f64>,
    pub delta_a: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum AxisSpec {
    Range {
        start: f64,
        stop: f64,
        #[serde(default = "default_count")]
        count: usize,
    },
    List { values: Vec<f64> },
}

/// Points per range axis when `count` is omitted.
pub const DEFAULT_AXIS_COUNT: usize = 101;

fn default_count() -> usize {
    DEFAULT_AXIS_COUNT
}

impl AxisSpec {
    /// Inclusive grid; a single-point range yields `start`.
    pub fn values(&self) -> Vec<f64> {
        match self {
            AxisSpec::Range { start, stop, count } => match *count {
                0 => Vec::new(),
                1 => vec![*start],
                n => (0..n)
                    .map(|k| {
                        if k == n - 1 {
                            *stop
                        } else {
                            start + (stop - start) * (k as f64 / (n - 1) as f64)
                        }
                    })
                    .collect(),
            },
            AxisSpec::List { values } => values.clone(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxesSection {
    pub delta: Option<AxisSpec>,
    pub u: Option<AxisSpec>,
    pub j: Option<AxisSpec>,
    pub zeta: Option<AxisSpec>,
    pub phi: Option<AxisSpec>,
    pub nth: Option<AxisSpec>,
    pub tau: Option<AxisSpec>,
}

impl AxesSection {
    /// `(name, spec)` in row-major order, outermost first.
    pub fn named(&self) -> Vec<(&'static str, &AxisSpec)> {
        [
            ("delta", &self.delta),
            ("u", &self.u),
            ("j", &self.j),
            ("zeta", &self.zeta),
            ("phi", &self.phi),
            ("nth", &self.nth),
            ("tau", &self.tau),
        ]
        .into_iter()
        .filter_map(|(n, s)| s.as_ref().map(|s| (n, s)))
        .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub observables: Vec<Observable>,
    #[serde(default)]
    pub convergence: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            observables: vec![Observable::G2B, Observable::NB1, Observable::NB2],
            convergence: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub model: ModelSection,
    #[serde(default)]
    pub params: ParamsSection,
    pub axes: AxesSection,
    #[serde(default)]
    pub output: OutputSection,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl SweepConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: SweepConfig = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn wants(&self, o: Observable) -> bool {
        self.output.observables.contains(&o)
    }

    pub fn dims(&self) -> Vec<usize> {
        self.model
            .dims
            .clone()
            .unwrap_or_else(|| self.base_spec().default_dims())
    }

    /// Names filled per grid point by the optimal mode.
    pub fn auto_filled(&self) -> Vec<&'static str> {
        let (a, b) = match self.model.optimal {
            OptimalMode::Off => return Vec::new(),
            OptimalMode::SingleDrive => ("delta", "u"),
            OptimalMode::TwoDrivePlus | OptimalMode::TwoDriveMinus => ("zeta", "phi"),
        };
        let on_axis: Vec<&str> = self.axes.named().iter().map(|(n, _)| *n).collect();
        [a, b].into_iter().filter(|n| !on_axis.contains(n)).collect()
    }

    /// Model with the fixed parameters; axis and auto-filled values are set per point.
    pub fn base_spec(&self) -> SystemSpec {
        let p = &self.params;
        let mech = MechParams {
            delta: p.delta.unwrap_or(0.0),
            u: p.u.unwrap_or(0.0),
            j: p.j.unwrap_or(0.0),
            omega1: p.omega1.unwrap_or(0.0),
            omega2: p.omega1.unwrap_or(0.0) * p.zeta.unwrap_or(0.0),
            phi: p.phi.unwrap_or(0.0),
            gamma: 1.0,
            nth: p.nth.unwrap_or(0.0),
        };
        match self.model.kind {
            ModelKind::Mech => SystemSpec::mech(mech),
            ModelKind::Optomech => SystemSpec::with_cavity(
                mech,
                OmParams {
                    g: p.g.unwrap_or(0.0),
                    kappa: p.kappa.unwrap_or(0.0),
                    delta_a: p.delta_a,
                },
            ),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let axes = self.axes.named();
        if axes.is_empty() {
            return Err(config_err("at least one axis is required"));
        }
        for (name, spec) in &axes {
            if let AxisSpec::Range { start, stop, count } = spec {
                if *count == 0 {
                    return Err(config_err(format!("axis {name}: count must be at least 1")));
                }
                if !start.is_finite() || !stop.is_finite() {
                    return Err(config_err(format!("axis {name}: non-finite bound")));
                }
            }
            let values = spec.values();
            if values.is_empty() {
                return Err(config_err(format!("axis {name}: no values")));
            }
            if values.iter().any(|v| !v.is_finite()) {
                return Err(config_err(format!("axis {name}: non-finite value")));
            }
            if matches!(*name, "nth" | "zeta" | "tau") && values.iter().any(|v| *v < 0.0) {
                return Err(config_err(format!("axis {name}: values must be nonnegative")));
            }
        }
        if let Some(tau) = &self.axes.tau {
            if tau.values().windows(2).any(|w| w[1] < w[0]) {
                return Err(config_err("axis tau must be nondecreasing"));
            }
        }
        let has_tau = self.axes.tau.is_some();
        if has_tau != self.wants(Observable::G2Tau) {
            return Err(config_err("a tau axis and the g2_tau observable go together"));
        }
        if self.output.observables.is_empty() {
            return Err(config_err("no observables requested"));
        }

        let p = &self.params;
        let named = [
            ("delta", p.delta),
            ("u", p.u),
            ("j", p.j),
            ("omega1", p.omega1),
            ("zeta", p.zeta),
            ("phi", p.phi),
            ("nth", p.nth),
            ("g", p.g),
            ("kappa", p.kappa),
            ("delta_a", p.delta_a),
        ];
        for (name, v) in named {
            if let Some(v) = v {
                if !v.is_finite() {
                    return Err(config_err(format!("params.{name} is not finite")));
                }
                if axes.iter().any(|(a, _)| *a == name) {
                    return Err(config_err(format!("{name} is both a fixed parameter and an axis")));
                }
            }
        }

        match self.model.kind {
            ModelKind::Mech => {
                if p.g.is_some() || p.kappa.is_some() || p.delta_a.is_some() {
                    return Err(config_err("g, kappa and delta_a need kind = \"optomech\""));
                }
                if self.wants(Observable::G2A) || self.wants(Observable::NA) {
                    return Err(config_err("cavity observables need kind = \"optomech\""));
                }
            }
            ModelKind::Optomech => {
                if p.g.is_none() || p.kappa.is_none() {
                    return Err(config_err("optomech model needs params.g and params.kappa"));
                }
            }
        }

        if self.model.optimal != OptimalMode::Off {
            let filled = self.auto_filled();
            if filled.is_empty() {
                return Err(config_err("optimal mode has nothing to fill: both targets are axes"));
            }
            for name in filled {
                let fixed = match name {
                    "delta" => p.delta,
                    "u" => p.u,
                    "zeta" => p.zeta,
                    _ => p.phi,
                };
                if fixed.is_some() {
                    return Err(config_err(format!("{name} is filled by the optimal mode; remove params.{name}")));
                }
            }
        }

        let spec = self.base_spec();
        let dims = self.dims();
        if dims.len() != spec.num_modes() {
            return Err(config_err(format!(
                "model has {} modes but dims has {} entries",
                spec.num_modes(),
                dims.len()
            )));
        }
        if dims.iter().any(|&d| d < 2) {
            return Err(config_err("every truncation must be at least 2"));
        }
        spec.mech.validate().map_err(|e| config_err(e.to_string()))?;
        if let Some(om) = &spec.optomech {
            om.validate().map_err(|e| config_err(e.to_string()))?;
        }
        Ok(())
    }
}
