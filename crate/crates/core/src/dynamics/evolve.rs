use alloc::vec::Vec;

use super::{hartree_energy, hartree_step, vlasov_energy, vlasov_step, InteractionKernel};
use crate::error::{bail, Result};
use crate::state::{MixedState, PhaseField};

/// Parameters of a paired Vlasov/Hartree run.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolveOptions {
    pub t_final: f64,
    pub dt: f64,
    /// Times in `[0, t_final]` at which both states are stored; steps are
    /// shortened to land on them exactly.
    pub checkpoints: Vec<f64>,
    /// Abort when either density sup-norm exceeds this value.
    pub rho_cap: f64,
    pub cfl_safety: f64,
    pub max_kinetic_phase: f64,
    /// Relative width of the outer band that must carry less than
    /// `margin_tol` of the initial mass (positions are exempt for periodic
    /// kernels).
    pub margin_band: f64,
    pub margin_tol: f64,
}

impl EvolveOptions {
    pub fn new(t_final: f64, dt: f64) -> Self {
        Self {
            t_final,
            dt,
            checkpoints: Vec::new(),
            rho_cap: 1e6,
            cfl_safety: 1.0,
            max_kinetic_phase: core::f64::consts::PI,
            margin_band: 1.0 / 16.0,
            margin_tol: 1e-10,
        }
    }
}

/// Per-step record of both flows.
#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvolutionLog {
    pub kappa: f64,
    pub times: Vec<f64>,
    pub mass_f: Vec<f64>,
    pub mass_op: Vec<f64>,
    pub rho_inf_f: Vec<f64>,
    pub rho_inf_op: Vec<f64>,
    /// Sup-norms refined by parabolic peak interpolation.
    pub rho_inf_f_refined: Vec<f64>,
    pub rho_inf_op_refined: Vec<f64>,
    pub energy_f: Vec<f64>,
    pub energy_op: Vec<f64>,
    pub c_inf: Vec<f64>,
    /// Smallest value of the Vlasov field.
    pub min_f: Vec<f64>,
    /// Number of re-orthonormalization events in the Hartree flow.
    pub reorthonormalizations: usize,
}

impl EvolutionLog {
    /// `max(1, κ)·max(1, a, b)`.
    pub fn c_inf_value(kappa: f64, a: f64, b: f64) -> f64 {
        kappa.max(1.0) * 1f64.max(a).max(b)
    }

    fn push(&mut self, t: f64, f: &PhaseField, op: &MixedState, kernel: &InteractionKernel) -> Result<()> {
        let (rf, ro) = (f.spatial_density(), op.spatial_density());
        let (a, b) = (rf.sup_norm(), ro.sup_norm());
        self.times.push(t);
        self.mass_f.push(f.mass());
        self.mass_op.push(ro.mass());
        self.rho_inf_f.push(a);
        self.rho_inf_op.push(b);
        self.rho_inf_f_refined.push(rf.sup_norm_refined());
        self.rho_inf_op_refined.push(ro.sup_norm_refined());
        self.energy_f.push(vlasov_energy(f, kernel)?.0);
        self.energy_op.push(hartree_energy(op, kernel)?.0);
        self.c_inf.push(Self::c_inf_value(self.kappa, a, b));
        self.min_f.push(f.min_value());
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Stored states at one requested time.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub t: f64,
    pub f: PhaseField,
    pub op: MixedState,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RunStatus {
    Completed,
    /// A density exceeded the cap at time `t`; the log stops there.
    BlowUp { t: f64, rho_inf: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairRun {
    pub f: PhaseField,
    pub op: MixedState,
    pub log: EvolutionLog,
    pub checkpoints: Vec<Checkpoint>,
    pub status: RunStatus,
}

/// Advances `f⁰` by Vlasov and `op⁰` by Hartree with identical steps.
pub fn evolve_pair(f0: &PhaseField, op0: &MixedState, kernel: &InteractionKernel, opts: &EvolveOptions) -> Result<PairRun> {
    if f0.grid().dim() != 1 || f0.grid().x() != op0.axis() {
        bail!(Mismatch, "classical and quantum states must share the one-dimensional position grid");
    }
    if !(opts.t_final >= 0.0 && opts.t_final.is_finite() && opts.dt > 0.0) {
        bail!(InvalidInput, "need t_final >= 0 and dt > 0");
    }
    if let Some(c) = opts.checkpoints.iter().find(|c| !(**c >= 0.0 && **c <= opts.t_final)) {
        bail!(InvalidInput, "checkpoint {c} outside [0, {}]", opts.t_final);
    }
    check_margins(f0, op0, kernel, opts)?;
    let mut cps: Vec<f64> = opts.checkpoints.clone();
    cps.sort_by(f64::total_cmp);
    cps.dedup();

    let mut log = EvolutionLog { kappa: kernel.kappa, ..Default::default() };
    let (mut f, mut op) = (f0.clone(), op0.clone());
    let mut t = 0.0;
    log.push(t, &f, &op, kernel)?;
    let mut checkpoints = Vec::new();
    let mut next_cp = 0;
    let eps = 1e-12 * opts.dt.max(opts.t_final);
    let mut k = 0u64;
    loop {
        while next_cp < cps.len() && cps[next_cp] <= t + eps {
            checkpoints.push(Checkpoint { t: cps[next_cp], f: f.clone(), op: op.clone() });
            next_cp += 1;
        }
        let peak = log.rho_inf_f.last().copied().unwrap_or(0.0).max(log.rho_inf_op.last().copied().unwrap_or(0.0));
        if peak > opts.rho_cap {
            let status = RunStatus::BlowUp { t, rho_inf: peak };
            return Ok(PairRun { f, op, log, checkpoints, status });
        }
        if t >= opts.t_final - eps {
            break;
        }
        let mut target = ((k + 1) as f64 * opts.dt).min(opts.t_final);
        if next_cp < cps.len() && cps[next_cp] < target - eps {
            target = cps[next_cp];
        } else {
            k += 1;
        }
        if target - t <= eps {
            continue;
        }
        let h = target - t;
        f = vlasov_step(&f, kernel, h, opts.cfl_safety)?.0;
        let (o, rep) = hartree_step(&op, kernel, h, opts.max_kinetic_phase)?;
        op = o;
        if rep.reorthonormalized {
            log.reorthonormalizations += 1;
        }
        t = target;
        log.push(t, &f, &op, kernel)?;
    }
    Ok(PairRun { f, op, log, checkpoints, status: RunStatus::Completed })
}

fn check_margins(f: &PhaseField, op: &MixedState, kernel: &InteractionKernel, opts: &EvolveOptions) -> Result<()> {
    let g = f.grid();
    let vl = g.v().extent() * (1.0 - opts.margin_band);
    let nv = g.nv();
    let outer_v: f64 = f
        .values()
        .chunks(nv)
        .map(|row| row.iter().enumerate().filter(|(k, _)| g.v().point(*k).abs() >= vl).map(|(_, v)| v.abs()).sum::<f64>())
        .sum::<f64>()
        * g.cell_volume();
    if outer_v > opts.margin_tol {
        bail!(InvalidInput, "classical state carries {outer_v:.3e} mass in the outer velocity band");
    }
    if !kernel.is_periodic() {
        let mf = f.margin_mass(opts.margin_band);
        let mq = op.margin_mass(opts.margin_band);
        if mf > opts.margin_tol || mq > opts.margin_tol {
            bail!(InvalidInput, "states carry {mf:.3e} / {mq:.3e} mass in the outer band of the box");
        }
    }
    Ok(())
}
