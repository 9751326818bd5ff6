//! Scenario files: a versioned TOML tree describing one comparison run.
//!
//! ```toml
//! version = 1
//! name = "attractive-pair"
//! seed = 7
//! hbar = [0.125, 0.0625]
//! t_final = 1.0
//! dt = 0.005
//! checkpoints = [0.5, 1.0]
//! epsilon = 0.2
//!
//! [grid]
//! nx = 256
//! nv = 256
//! # x_extent = 4.0   (default: X = V, i.e. X = sqrt(nv*pi*hbar/4))
//!
//! [kernel]
//! kind = "mollified_coulomb"
//! epsilon = 0.2
//! kappa = -0.5
//!
//! [initial]
//! family = "gaussian_bumps"
//! bumps = [[1.0, -0.2, 0.0, 0.07, 0.07], [1.0, 0.2, 0.0, 0.07, 0.07]]
//! quantum = "toeplitz"
//! ```
//!
//! The velocity extent always follows from `ħ`: the grid is built with
//! spacing `πħ/(2X)` so that the quantization maps are alias-free.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sctl_core::certify::InputDigest;
use sctl_core::dynamics::{InteractionKernel, KernelKind};
use sctl_core::transforms::toeplitz_quantize;
use sctl_core::{MixedState, PhaseField, PhaseGrid};

use crate::error::{io_err, LabError, LabResult};

pub const SCENARIO_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub version: u32,
    pub name: String,
    #[serde(default = "default_dimension")]
    pub dimension: usize,
    #[serde(default)]
    pub seed: u64,
    pub hbar: Vec<f64>,
    pub t_final: f64,
    pub dt: f64,
    #[serde(default)]
    pub checkpoints: Vec<f64>,
    /// `ε` of the main stability bound.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    pub grid: GridSpec,
    pub kernel: KernelSpec,
    pub initial: InitialSpec,
}

fn default_dimension() -> usize {
    1
}

fn default_epsilon() -> f64 {
    0.2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub nx: usize,
    pub nv: usize,
    /// Half-width of the position box; by default the box is square in
    /// phase space.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_extent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    #[serde(flatten)]
    pub shape: KernelKind,
    pub kappa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// `(1 + α cos(πm x/X)) · M_T(v)`.
    Maxwellian { temperature: f64, #[serde(default)] amplitude: f64, #[serde(default = "one")] mode: u32 },
    /// `(1 + α cos(πm x/X)) · (M_T(v − u) + M_T(v + u))/2`.
    TwoStream { temperature: f64, drift: f64, #[serde(default)] amplitude: f64, #[serde(default = "one")] mode: u32 },
    /// Coherent state at `(x0, p0)` paired with its Wigner function.
    Coherent { x0: f64, p0: f64 },
    /// Rows `[weight, x, v, σ_x, σ_v]`.
    GaussianBumps { bumps: Vec<[f64; 5]> },
}

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuantumSpec {
    /// `op⁰` is the Toeplitz quantization of `f⁰`.
    #[default]
    Toeplitz,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialSpec {
    #[serde(flatten)]
    pub family: Family,
    #[serde(default)]
    pub quantum: QuantumSpec,
}

/// Initial pair at one `ħ`, with the symbol of `op⁰` when it is known.
#[derive(Debug, Clone)]
pub struct InitialPair {
    pub grid: PhaseGrid,
    pub f: PhaseField,
    pub op: MixedState,
    pub symbol: Option<PhaseField>,
}

fn gauss(z: f64, s: f64) -> f64 {
    (-z * z / (2.0 * s * s)).exp() / ((2.0 * PI).sqrt() * s)
}

impl Scenario {
    pub fn from_toml(source: &str) -> LabResult<Self> {
        let sc: Scenario = toml::from_str(source).map_err(|e| {
            let line = e.span().map(|s| source[..s.start.min(source.len())].lines().count().max(1));
            LabError::Config { field: "<document>".into(), line, message: e.message().to_string() }
        })?;
        sc.validate().map_err(|(field, message)| LabError::Config { line: locate(source, &field), field, message })?;
        Ok(sc)
    }

    pub fn load(path: &Path) -> LabResult<Self> {
        Self::from_toml(&std::fs::read_to_string(path).map_err(io_err(path))?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    /// Digest of the canonical serialization.
    pub fn digest(&self) -> String {
        format!("{:016x}", InputDigest::new().str(&self.to_toml()).finish())
    }

    /// Checks every field, returning the dotted field path on failure.
    pub fn validate(&self) -> Result<(), (String, String)> {
        let bad = |f: &str, m: String| Err((f.to_string(), m));
        if self.version != SCENARIO_VERSION {
            return bad("version", format!("unsupported scenario version {} (expected {SCENARIO_VERSION})", self.version));
        }
        if self.dimension != 1 {
            return bad("dimension", "paired dynamics run in one dimension".into());
        }
        if self.hbar.is_empty() {
            return bad("hbar", "need at least one value".into());
        }
        if let Some(h) = self.hbar.iter().find(|h| !(h.is_finite() && **h > 0.0)) {
            return bad("hbar", format!("value {h} is not positive"));
        }
        let mut sorted = self.hbar.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return bad("hbar", "values must be distinct".into());
        }
        if !(self.t_final.is_finite() && self.t_final >= 0.0) {
            return bad("t_final", format!("{} must be a nonnegative time", self.t_final));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad("dt", format!("{} must be positive", self.dt));
        }
        if let Some(c) = self.checkpoints.iter().find(|c| !(**c >= 0.0 && **c <= self.t_final)) {
            return bad("checkpoints", format!("time {c} outside [0, {}]", self.t_final));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad("epsilon", format!("{} must lie in (0, 1)", self.epsilon));
        }
        for (name, n) in [("grid.nx", self.grid.nx), ("grid.nv", self.grid.nv)] {
            if n < 4 || !n.is_power_of_two() {
                return bad(name, format!("{n} must be a power of two >= 4"));
            }
        }
        if self.grid.nv > self.grid.nx {
            return bad("grid.nv", "must not exceed grid.nx".into());
        }
        if let Some(x) = self.grid.x_extent {
            if !(x.is_finite() && x > 0.0) {
                return bad("grid.x_extent", format!("{x} must be positive"));
            }
        }
        if let Err(e) = InteractionKernel::new(self.kernel.shape.clone(), self.kernel.kappa) {
            return bad("kernel", e.to_string());
        }
        if matches!(self.kernel.shape, KernelKind::Coulomb3dRadial) {
            return bad("kernel.kind", "the radial Coulomb kernel has no one-dimensional phase space".into());
        }
        match &self.initial.family {
            Family::Maxwellian { temperature, amplitude, .. } | Family::TwoStream { temperature, amplitude, .. } => {
                if !(*temperature > 0.0) {
                    return bad("initial.temperature", "must be positive".into());
                }
                if !(amplitude.abs() < 1.0) {
                    return bad("initial.amplitude", "|amplitude| must be below 1".into());
                }
            }
            Family::Coherent { x0, p0 } => {
                if !(x0.is_finite() && p0.is_finite()) {
                    return bad("initial", "coherent centre must be finite".into());
                }
            }
            Family::GaussianBumps { bumps } => {
                if bumps.is_empty() {
                    return bad("initial.bumps", "need at least one bump".into());
                }
                if bumps.iter().any(|b| !(b[0] > 0.0 && b[3] > 0.0 && b[4] > 0.0) || b.iter().any(|v| !v.is_finite())) {
                    return bad("initial.bumps", "weights and widths must be positive".into());
                }
            }
        }
        Ok(())
    }

    pub fn kernel(&self) -> LabResult<InteractionKernel> {
        Ok(InteractionKernel::new(self.kernel.shape.clone(), self.kernel.kappa)?)
    }

    /// Position half-width at `hbar`.
    pub fn x_extent(&self, hbar: f64) -> f64 {
        self.grid.x_extent.unwrap_or_else(|| (self.grid.nv as f64 * PI * hbar / 4.0).sqrt())
    }

    pub fn phase_grid(&self, hbar: f64) -> LabResult<PhaseGrid> {
        Ok(PhaseGrid::semiclassical(self.grid.nx, self.x_extent(hbar), self.grid.nv, hbar)?)
    }

    /// Checkpoint times including `t = 0`, sorted and deduplicated.
    pub fn checkpoint_times(&self) -> Vec<f64> {
        let mut t = vec![0.0];
        t.extend(&self.checkpoints);
        t.sort_by(f64::total_cmp);
        t.dedup();
        t
    }

    pub fn initial_pair(&self, hbar: f64) -> LabResult<InitialPair> {
        let grid = self.phase_grid(hbar)?;
        let xe = grid.x().extent();
        let wave = |amp: f64, mode: u32| move |x: f64| 1.0 + amp * (PI * mode as f64 * x / xe).cos();
        let f = match &self.initial.family {
            Family::Maxwellian { temperature, amplitude, mode } => {
                let (s, w) = (temperature.sqrt(), wave(*amplitude, *mode));
                PhaseField::normalized_from_fn(grid, |x, v| w(x[0]) * gauss(v[0], s))?
            }
            Family::TwoStream { temperature, drift, amplitude, mode } => {
                let (s, w) = (temperature.sqrt(), wave(*amplitude, *mode));
                PhaseField::normalized_from_fn(grid, |x, v| w(x[0]) * 0.5 * (gauss(v[0] - drift, s) + gauss(v[0] + drift, s)))?
            }
            Family::Coherent { x0, p0 } => {
                let s = (hbar / 2.0).sqrt();
                let f = PhaseField::normalized_from_fn(grid, |x, v| gauss(x[0] - x0, s) * gauss(v[0] - p0, s))?;
                let op = MixedState::coherent(hbar, *grid.x(), *x0, *p0)?;
                return Ok(InitialPair { grid, f, op, symbol: None });
            }
            Family::GaussianBumps { bumps } => PhaseField::normalized_from_fn(grid, |x, v| {
                bumps.iter().map(|b| b[0] * gauss(x[0] - b[1], b[3]) * gauss(v[0] - b[2], b[4])).sum()
            })?,
        };
        let op = match self.initial.quantum {
            QuantumSpec::Toeplitz => toeplitz_quantize(&f, hbar)?,
        };
        Ok(InitialPair { grid, symbol: Some(f.clone()), f, op })
    }
}

/// Line of `field` (dotted path, last segment is the key) in the source.
fn locate(source: &str, field: &str) -> Option<usize> {
    let (table, key) = match field.rsplit_once('.') {
        Some((t, k)) => (Some(t), k),
        None => (None, field),
    };
    let mut current: Option<String> = None;
    let mut table_line = None;
    for (i, line) in source.lines().enumerate() {
        let l = line.trim();
        if let Some(name) = l.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            current = Some(name.trim().to_string());
            if Some(name.trim()) == table.or(Some(key)) {
                table_line = Some(i + 1);
            }
            continue;
        }
        let here = current.as_deref() == table;
        if here && l.split('=').next().map(str::trim) == Some(key) {
            return Some(i + 1);
        }
    }
    table_line
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
version = 1
name = "t"
hbar = [0.125]
t_final = 1.0
dt = 0.01
checkpoints = [1.0]

[grid]
nx = 64
nv = 64

[kernel]
kind = "mollified_coulomb"
epsilon = 0.2
kappa = 0.0

[initial]
family = "gaussian_bumps"
bumps = [[1.0, 0.0, 0.0, 0.3, 0.3]]
"#;

    #[test]
    fn round_trips_through_toml() {
        let sc = Scenario::from_toml(BASE).unwrap();
        assert_eq!(sc.initial.quantum, QuantumSpec::Toeplitz);
        assert_eq!(Scenario::from_toml(&sc.to_toml()).unwrap(), sc);
        assert_eq!(sc.checkpoint_times(), vec![0.0, 1.0]);
    }

    #[test]
    fn errors_point_at_the_field() {
        let bad = BASE.replace("checkpoints = [1.0]", "checkpoints = [2.0]");
        match Scenario::from_toml(&bad) {
            Err(LabError::Config { field, line, .. }) => {
                assert_eq!(field, "checkpoints");
                assert_eq!(line, Some(7));
            }
            other => panic!("{other:?}"),
        }
        let bad = BASE.replace("nv = 64", "nv = 48");
        match Scenario::from_toml(&bad) {
            Err(LabError::Config { field, line, .. }) => assert_eq!((field.as_str(), line), ("grid.nv", Some(11))),
            other => panic!("{other:?}"),
        }
        let bad = BASE.replace("dt = 0.01", "dt = \"fast\"");
        assert!(matches!(Scenario::from_toml(&bad), Err(LabError::Config { line: Some(6), .. })));
    }
}
