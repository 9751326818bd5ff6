//! Scenario runs: paired evolution per `ħ`, checkpoint distance estimates,
//! certificates, and the run directory.
//!
//! ```text
//! <out>/manifest.json        scenario, digest, files
//! <out>/certificates.json    every certificate, sorted by (ħ, t, name)
//! <out>/plot.csv             ħ, log ħ, t, lower, upper, log upper, bound
//! <out>/summary.json         statuses and the fitted ħ-slope at the final time
//! <out>/hbar-<ħ>/log.csv     evolution log
//! <out>/hbar-<ħ>/t<i>_f.bin, t<i>_op.bin   checkpoint states
//! <out>/hbar-<ħ>/result.json per-ħ record, reused by `--resume`
//! ```

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sctl_core::certify::{diff_ineq_audit, main_theorem_bound, worst_status, CInfTrajectory, Certificate, InputDigest, Interpolation, Status};
use sctl_core::dynamics::{evolve_pair, EvolveOptions, RunStatus};
use sctl_core::transport::{marginal_w2_check, wh_exact_sdp, wh_lower, wh_upper_toeplitz, SdpOptions, WhEstimate};
use sctl_core::{Error as CoreError, MixedState, PhaseField};

use crate::error::LabResult;
use crate::formats::{encode_field, encode_state, log_csv, write_bytes, write_json, write_text, Cell, Csv};
use crate::scenario::Scenario;
use crate::ToleranceProfile;

/// Largest number of bins per measure in the transport estimates.
pub const BIN_CAP: usize = 1024;

/// Distance estimates for one pair of states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairDistance {
    pub estimate: WhEstimate,
    /// Negative Vlasov mass removed before transport.
    pub clipped: f64,
    pub certificates: Vec<Certificate>,
}

/// Lower/upper (and exact, within the solver caps) `W_ħ` for `(f, op)`,
/// with the marginal and sandwich certificates.
pub fn measure_pair(f: &PhaseField, op: &MixedState, symbol: Option<&PhaseField>, profile: ToleranceProfile) -> LabResult<PairDistance> {
    let (f, clipped) = f.positive_part()?;
    let w2 = profile.w2_options();
    let lower = wh_lower(&f, op, BIN_CAP, &w2)?;
    let upper = wh_upper_toeplitz(&f, op, symbol, BIN_CAP, &w2)?;
    let sdp = SdpOptions { gap_tol: profile.sdp_gap(), ..SdpOptions::default() };
    let exact = if f.grid().nx() <= sdp.max_sites {
        match wh_exact_sdp(&f, op, &sdp) {
            Ok(e) => Some(e),
            Err(CoreError::Resource(_)) => None,
            Err(e) => return Err(e.into()),
        }
    } else {
        None
    };
    let estimate = WhEstimate::new(op.hbar(), 1, &lower, &upper, exact.as_ref());
    let tol = profile.sandwich();
    let digest = InputDigest::new().str("sandwich").f64(estimate.lower).f64(estimate.upper).f64(estimate.exact.unwrap_or(-1.0));
    let status = if estimate.check(tol).is_ok() { Status::Pass } else { Status::Fail };
    let mut sandwich = Certificate::with_status("sandwich", digest, estimate.upper, estimate.exact.unwrap_or(estimate.lower), tol, status)
        .metric("lower", estimate.lower)
        .metric("upper", estimate.upper)
        .metric("floor", op.hbar().sqrt());
    if let Some(g) = estimate.gap {
        sandwich = sandwich.metric("gap", g);
    }
    if clipped > profile.clip_limit() {
        sandwich = Certificate { status: sandwich.status.max(Status::Inconclusive), ..sandwich }.note(format!("clipped {clipped:e} negative mass from the Vlasov field"));
    }
    let marginal = marginal_w2_check(&f, op, &estimate)?;
    Ok(PairDistance { estimate, clipped, certificates: vec![marginal, sandwich] })
}

/// Estimates at one checkpoint time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointRecord {
    pub t: f64,
    pub estimate: WhEstimate,
    pub clipped: f64,
    /// Upper estimate without the initial symbol, so that every checkpoint
    /// is measured by the same route; the growth audit uses this one.
    pub route_upper: f64,
    /// Main stability bound at `t`, from the `t = 0` upper estimate.
    pub bound: Option<f64>,
}

/// Everything computed at one `ħ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HbarResult {
    pub hbar: f64,
    pub scenario_digest: String,
    pub completed: bool,
    /// Time and density at which the run was stopped, if it blew up.
    pub blow_up: Option<(f64, f64)>,
    pub checkpoints: Vec<CheckpointRecord>,
    /// `(t, C∞)` at every step.
    pub c_inf: Vec<(f64, f64)>,
    pub certificates: Vec<Certificate>,
    pub status: Status,
}

/// Label of the per-`ħ` directory.
pub fn hbar_dir(hbar: f64) -> String {
    format!("hbar-{hbar:?}")
}

/// Runs the pair at one `ħ` and writes its directory when `dir` is given.
pub fn run_hbar(sc: &Scenario, hbar: f64, profile: ToleranceProfile, dir: Option<&Path>) -> LabResult<HbarResult> {
    let init = sc.initial_pair(hbar)?;
    let kernel = sc.kernel()?;
    let times = sc.checkpoint_times();
    let mut opts = EvolveOptions::new(sc.t_final, sc.dt);
    opts.checkpoints = times.clone();
    let run = evolve_pair(&init.f, &init.op, &kernel, &opts)?;
    let mut certificates = Vec::new();
    let mut records: Vec<CheckpointRecord> = Vec::new();
    let traj = CInfTrajectory::new(run.log.times.clone(), run.log.c_inf.clone(), Interpolation::PiecewiseLinear)?;
    for (i, cp) in run.checkpoints.iter().enumerate() {
        let symbol = if cp.t == 0.0 { init.symbol.as_ref() } else { None };
        let pd = measure_pair(&cp.f, &cp.op, symbol, profile)?;
        let tag = |c: Certificate| c.metric("t", cp.t).metric("hbar", hbar);
        certificates.extend(pd.certificates.into_iter().map(tag));
        let bound = match records.first() {
            Some(r0) if cp.t > 0.0 => {
                let b = main_theorem_bound(r0.estimate.upper, sc.epsilon, &traj, cp.t)?;
                let digest = InputDigest::new().str("main_theorem").f64(hbar).f64(cp.t).f64(r0.estimate.upper).f64(pd.estimate.upper).f64(sc.epsilon);
                let cert = Certificate::check("main_theorem", digest, b, pd.estimate.upper, profile.bound() * b)
                    .metric("t", cp.t)
                    .metric("hbar", hbar)
                    .metric("w_init", r0.estimate.upper)
                    .metric("c_inf", traj.value_at(cp.t));
                certificates.push(cert);
                Some(b)
            }
            _ => None,
        };
        if let Some(d) = dir {
            write_bytes(&d.join(format!("t{i}_f.bin")), &encode_field(&cp.f))?;
            write_bytes(&d.join(format!("t{i}_op.bin")), &encode_state(&cp.op))?;
        }
        let route_upper = match symbol {
            Some(_) => wh_upper_toeplitz(&cp.f.positive_part()?.0, &cp.op, None, BIN_CAP, &profile.w2_options())?.value,
            None => pd.estimate.upper,
        };
        records.push(CheckpointRecord { t: cp.t, estimate: pd.estimate, clipped: pd.clipped, route_upper, bound });
    }
    if records.len() >= 2 {
        let pairs: Vec<(f64, f64)> = records.iter().map(|r| (r.t, r.route_upper)).collect();
        certificates.push(diff_ineq_audit(&run.log, &pairs, profile.audit())?.metric("hbar", hbar));
    }
    let blow_up = match run.status {
        RunStatus::Completed => None,
        RunStatus::BlowUp { t, rho_inf } => Some((t, rho_inf)),
    };
    let status = if blow_up.is_some() { Status::Inconclusive.max(worst_status(&certificates)) } else { worst_status(&certificates) };
    let result = HbarResult {
        hbar,
        scenario_digest: sc.digest(),
        completed: blow_up.is_none(),
        blow_up,
        checkpoints: records,
        c_inf: run.log.times.iter().copied().zip(run.log.c_inf.iter().copied()).collect(),
        certificates,
        status,
    };
    if let Some(d) = dir {
        write_text(&d.join("log.csv"), log_csv(&run.log).as_str())?;
        write_json(&d.join("result.json"), &result)?;
    }
    Ok(result)
}

/// Least-squares slope of `log upper(T)` against `log ħ`.
pub fn fitted_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let (xs, ys): (Vec<f64>, Vec<f64>) = points.iter().map(|(h, w)| (h.ln(), w.ln())).unzip();
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub name: String,
    pub scenario_digest: String,
    pub hbar: Vec<f64>,
    pub statuses: Vec<Status>,
    /// `(ħ, upper W_ħ(T))` for the runs that reached `T`.
    pub final_upper: Vec<(f64, f64)>,
    pub slope: Option<f64>,
    pub certificates: usize,
    pub passed: usize,
    pub inconclusive: usize,
    pub failed: usize,
    pub status: Status,
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out: PathBuf,
    pub profile: ToleranceProfile,
    /// Reuse `result.json` of `ħ` values finished by an earlier run.
    pub resume: bool,
}

fn load_finished(path: &Path, digest: &str) -> Option<HbarResult> {
    let text = std::fs::read_to_string(path).ok()?;
    let r: HbarResult = serde_json::from_str(&text).ok()?;
    (r.scenario_digest == digest).then_some(r)
}

/// Runs every `ħ` of the scenario and writes the run directory.
pub fn run_scenario(sc: &Scenario, opts: &RunOptions) -> LabResult<RunSummary> {
    let digest = sc.digest();
    let mut hbars = sc.hbar.clone();
    hbars.sort_by(|a, b| b.total_cmp(a));
    let results: Vec<HbarResult> = hbars
        .par_iter()
        .map(|&h| {
            let dir = opts.out.join(hbar_dir(h));
            if opts.resume {
                if let Some(r) = load_finished(&dir.join("result.json"), &digest) {
                    return Ok(r);
                }
            }
            run_hbar(sc, h, opts.profile, Some(&dir))
        })
        .collect::<LabResult<_>>()?;

    let mut certificates: Vec<&Certificate> = results.iter().flat_map(|r| &r.certificates).collect();
    certificates.sort_by(|a, b| {
        let key = |c: &Certificate| (c.get("hbar").unwrap_or(0.0), c.get("t").unwrap_or(f64::INFINITY));
        let (ka, kb) = (key(a), key(b));
        kb.0.total_cmp(&ka.0).then(ka.1.total_cmp(&kb.1)).then(a.name.cmp(&b.name))
    });
    write_json(&opts.out.join("certificates.json"), &certificates)?;

    let mut plot = Csv::new(&["hbar", "log_hbar", "t", "lower", "upper", "log_upper", "bound"]);
    for r in &results {
        for cp in &r.checkpoints {
            let bound = cp.bound.map_or(Cell::S(String::new()), Cell::F);
            plot.row(&[Cell::F(r.hbar), Cell::F(r.hbar.ln()), Cell::F(cp.t), Cell::F(cp.estimate.lower), Cell::F(cp.estimate.upper), Cell::F(cp.estimate.upper.ln()), bound]);
        }
    }
    write_text(&opts.out.join("plot.csv"), plot.as_str())?;

    let final_upper: Vec<(f64, f64)> = results
        .iter()
        .filter(|r| r.completed)
        .filter_map(|r| r.checkpoints.last().filter(|c| c.t == sc.t_final).map(|c| (r.hbar, c.estimate.upper)))
        .collect();
    let count = |s: Status| certificates.iter().filter(|c| c.status == s).count();
    let statuses: Vec<Status> = results.iter().map(|r| r.status).collect();
    let summary = RunSummary {
        name: sc.name.clone(),
        scenario_digest: digest.clone(),
        hbar: hbars.clone(),
        status: statuses.iter().copied().max().unwrap_or(Status::Pass),
        statuses,
        slope: fitted_slope(&final_upper),
        final_upper,
        certificates: certificates.len(),
        passed: count(Status::Pass),
        inconclusive: count(Status::Inconclusive),
        failed: count(Status::Fail),
    };
    write_json(&opts.out.join("summary.json"), &summary)?;
    let files: Vec<String> = ["certificates.json", "plot.csv", "summary.json"]
        .iter()
        .map(|s| s.to_string())
        .chain(hbars.iter().map(|h| format!("{}/", hbar_dir(*h))))
        .collect();
    let manifest = serde_json::json!({
        "format": 1,
        "name": sc.name,
        "scenario_digest": digest,
        "scenario": sc,
        "tolerance_profile": opts.profile,
        "files": files,
    });
    write_json(&opts.out.join("manifest.json"), &manifest)?;
    Ok(summary)
}
