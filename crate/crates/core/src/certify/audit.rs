use super::certificate::{Certificate, InputDigest};
use super::constants::constants_with;
use super::gronwall::{comparison_flow, CInfTrajectory};
use crate::dynamics::EvolutionLog;
use crate::error::{bail, Result};

/// Audits measured growth of `Q = (W_ħ/R)²` between checkpoints against the
/// comparison flow `dQ/dt = 2Q√ℓ(Q)` with the run's largest
/// `C∞ = max(1,|κ|)·max(1, ‖ρ_f‖∞, ‖ρ‖∞)`.
///
/// `checkpoints` holds `(t, W_ħ upper estimate)` pairs. The differential
/// inequality is a theorem, so a failed audit means the measurement is under
/// resolved (grid, time step or transport bracket), not that the inequality
/// is false.
pub fn diff_ineq_audit(log: &EvolutionLog, checkpoints: &[(f64, f64)], tolerance: f64) -> Result<Certificate> {
    if checkpoints.len() < 2 {
        bail!(InvalidInput, "audit needs at least two checkpoints, got {}", checkpoints.len());
    }
    if checkpoints.windows(2).any(|w| !(w[1].0 > w[0].0)) || checkpoints.iter().any(|c| !(c.1 > 0.0)) {
        bail!(InvalidInput, "checkpoint times must increase and estimates be positive");
    }
    if log.times.is_empty() {
        bail!(InvalidInput, "empty evolution log");
    }
    let kappa = log.kappa.abs().max(1.0);
    let rho = log.rho_inf_f.iter().chain(&log.rho_inf_op).fold(1.0f64, |m, v| m.max(*v));
    let c_bar = kappa * rho;
    let k = constants_with(kappa, c_bar);
    let r = k.radius(c_bar)?;
    let traj = CInfTrajectory::constant(c_bar)?;
    let mut worst = 0.0f64;
    let mut digest = InputDigest::new().str("diff_ineq_audit").f64(log.kappa).f64(c_bar);
    for w in checkpoints.windows(2) {
        let (t0, w0) = w[0];
        let (t1, w1) = w[1];
        digest = digest.f64(t0).f64(w0).f64(t1).f64(w1);
        let q0 = (w0 / r) * (w0 / r);
        let q1 = (w1 / r) * (w1 / r);
        let steps = libm::ceil((t1 - t0) / 1e-3).max(16.0) as usize;
        let allowed = *comparison_flow(q0, &traj, t1 - t0, steps)?.last().unwrap_or(&q0);
        worst = worst.max(q1 / allowed);
    }
    let mut cert = Certificate::check("diff_ineq_audit", digest, 1.0, worst, tolerance)
        .metric("c_inf", c_bar)
        .metric("radius", r)
        .metric("intervals", (checkpoints.len() - 1) as f64);
    if !cert.passed() {
        cert = cert.note("measured growth exceeds the comparison flow: refine the grid, time step or transport tolerance");
    }
    Ok(cert)
}
