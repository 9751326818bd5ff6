//! Seeded Monte Carlo certificate campaigns.
//!
//! Sample `i` draws from a ChaCha8 stream `i` of the campaign seed, so the
//! outcome does not depend on the thread count or on the sample order.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sctl_core::certify::{
    classical_bound, comparison_flow, coulomb_elementary, gronwall_bound, gronwall_bound_corrected, loglip2_integral_certificate,
    loglip_field_certificate, Blob, CInfTrajectory, Certificate, Density3d, InputDigest, Interpolation, Profile, Status,
};
use sctl_core::transport::{w2, DiscreteMeasure, W2Options};

use crate::error::{LabError, LabResult};
use crate::formats::{write_json, write_text, Cell, Csv};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Campaign {
    CoulombElementary,
    Loglip,
    Loglip2,
    Gronwall,
    Classical,
}

impl Campaign {
    pub const ALL: [Campaign; 5] = [Self::CoulombElementary, Self::Loglip, Self::Loglip2, Self::Gronwall, Self::Classical];

    pub fn name(self) -> &'static str {
        match self {
            Self::CoulombElementary => "coulomb_elementary",
            Self::Loglip => "loglip",
            Self::Loglip2 => "loglip2",
            Self::Gronwall => "gronwall",
            Self::Classical => "classical",
        }
    }
}

impl fmt::Display for Campaign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Campaign {
    type Err = LabError;

    fn from_str(s: &str) -> LabResult<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| {
            let known: Vec<&str> = Self::ALL.iter().map(|c| c.name()).collect();
            LabError::Usage(format!("unknown campaign `{s}` (known: {})", known.join(", ")))
        })
    }
}

/// Horizon of the Grönwall comparison.
pub const GRONWALL_HORIZON: f64 = 2.0;
/// Initial values per Grönwall trajectory.
pub const GRONWALL_INITIAL_VALUES: usize = 20;
/// Relative slack allowed between the Grönwall bound and the flow.
pub const GRONWALL_SLACK: f64 = 1e-3;
pub const CLASSICAL_TOL: f64 = 1e-6;
/// Above this many samples only non-passing samples are written.
pub const FULL_SAMPLE_LIMIT: usize = 100_000;

fn sample_rng(seed: u64, i: usize) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(i as u64);
    r
}

fn log_uniform(r: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    (r.random_range(lo.ln()..hi.ln())).exp()
}

fn direction(r: &mut impl Rng) -> [f64; 3] {
    loop {
        let p: [f64; 3] = [r.random_range(-1.0..1.0), r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)];
        let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        if n > 1e-3 && n <= 1.0 {
            return p.map(|c| c / n);
        }
    }
}

/// Pair of nonzero points with norms spread over six decades; one in eight
/// pairs is aligned, where the inequality is an equality.
pub fn coulomb_pair(r: &mut impl Rng) -> ([f64; 3], [f64; 3]) {
    let (dx, nx) = (direction(r), log_uniform(r, 1e-3, 1e3));
    let x = dx.map(|c| c * nx);
    let y = if r.random_range(0..8) == 0 { dx.map(|c| c * log_uniform(r, 1e-3, 1e3)) } else { direction(r).map(|c| c * log_uniform(r, 1e-3, 1e3)) };
    (x, y)
}

/// One to three unit-total-mass blobs, balls or Gaussians, within `[-1, 1]³`.
pub fn random_density(r: &mut impl Rng) -> LabResult<Density3d> {
    let n = r.random_range(1..4);
    let masses: Vec<f64> = (0..n).map(|_| r.random_range(0.2..1.0)).collect();
    let total: f64 = masses.iter().sum();
    let blobs = masses
        .iter()
        .map(|m| {
            let center = [r.random_range(-1.0..1.0), r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)];
            let w = r.random_range(0.2..1.0);
            let profile = if r.random_bool(0.5) { Profile::Ball { radius: w } } else { Profile::Gaussian { sigma: w } };
            Blob { center, mass: m / total, profile }
        })
        .collect();
    Ok(Density3d::new(blobs)?)
}

/// Piecewise constant or linear `C∞` with one to five knots in `[1, 10]`.
pub fn random_trajectory(r: &mut impl Rng) -> LabResult<CInfTrajectory> {
    let n = r.random_range(1..6);
    let mut times = vec![0.0];
    for _ in 1..n {
        let last = *times.last().expect("nonempty");
        times.push(last + r.random_range(0.1..0.6));
    }
    let values = (0..n).map(|_| r.random_range(1.0..10.0)).collect();
    let interp = if r.random_bool(0.5) { Interpolation::PiecewiseConstant } else { Interpolation::PiecewiseLinear };
    Ok(CInfTrajectory::new(times, values, interp)?)
}

fn point_cloud(r: &mut impl Rng, n: usize) -> LabResult<DiscreteMeasure> {
    let pts: Vec<f64> = (0..3 * n).map(|_| r.random_range(-1.5..1.5)).collect();
    Ok(DiscreteMeasure::new(3, pts, vec![1.0 / n as f64; n])?)
}

/// Grönwall bound against the comparison flow for one `C∞` trajectory and
/// [`GRONWALL_INITIAL_VALUES`] initial values uniform on `(0, 2]`.
pub fn gronwall_sample(r: &mut impl Rng) -> LabResult<Certificate> {
    let traj = random_trajectory(r)?;
    let steps = 2000;
    let dt = GRONWALL_HORIZON / steps as f64;
    let (mut worst, mut worst_q0, mut worst_t, mut worst_corrected) = (f64::INFINITY, 0.0, 0.0, f64::INFINITY);
    let mut digest = InputDigest::new().str("gronwall").f64s(traj.times()).f64s(traj.values());
    for _ in 0..GRONWALL_INITIAL_VALUES {
        let q0 = 2.0 - r.random_range(0.0..2.0);
        digest = digest.f64(q0);
        let flow = comparison_flow(q0, &traj, GRONWALL_HORIZON, steps)?;
        for (i, q) in flow.iter().enumerate().step_by(10) {
            let t = i as f64 * dt;
            let slack = (gronwall_bound(q0, &traj, t)? - q) / q;
            if slack < worst {
                (worst, worst_q0, worst_t) = (slack, q0, t);
            }
            worst_corrected = worst_corrected.min((gronwall_bound_corrected(q0, &traj, t)? - q) / q);
        }
    }
    let mut cert = Certificate::check("gronwall", digest, 0.0, -worst, GRONWALL_SLACK)
        .metric("worst_relative_slack", worst)
        .metric("worst_q0", worst_q0)
        .metric("worst_t", worst_t)
        .metric("corrected_relative_slack", worst_corrected);
    if !cert.passed() {
        cert = cert.note("the comparison flow outgrows the bound once Q passes the switch point x0");
    }
    Ok(cert)
}

/// Closed-form classical solution against RK4 of `Y' = 2C Y √(−ln Y)` on
/// 90% of the interval where it is increasing.
pub fn classical_sample(r: &mut impl Rng) -> LabResult<Certificate> {
    let eta = log_uniform(r, 1e-12, 0.5);
    let c = r.random_range(0.1..5.0);
    let t_star = (-eta.ln()).sqrt() / c;
    let steps = 4000;
    let dt = 0.9 * t_star / steps as f64;
    let rhs = |y: f64| 2.0 * c * y * (-y.ln()).max(0.0).sqrt();
    let (mut y, mut worst) = (eta, 0.0f64);
    for i in 1..=steps {
        let k1 = rhs(y);
        let k2 = rhs(y + 0.5 * dt * k1);
        let k3 = rhs(y + 0.5 * dt * k2);
        let k4 = rhs(y + dt * k3);
        y += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        let closed = classical_bound(eta, c, i as f64 * dt)?;
        worst = worst.max((y - closed.y).abs() / closed.y);
    }
    let digest = InputDigest::new().str("classical").f64(eta).f64(c);
    Ok(Certificate::check("classical", digest, 0.0, worst, CLASSICAL_TOL).metric("eta", eta).metric("c", c).metric("horizon", 0.9 * t_star))
}

/// One certificate of the given campaign.
pub fn run_sample(campaign: Campaign, seed: u64, i: usize) -> LabResult<Certificate> {
    let mut r = sample_rng(seed, i);
    let cert = match campaign {
        Campaign::CoulombElementary => {
            let (x, y) = coulomb_pair(&mut r);
            coulomb_elementary(x, y)?
        }
        Campaign::Loglip => {
            let rho = random_density(&mut r)?;
            let x = [r.random_range(-2.0..2.0), r.random_range(-2.0..2.0), r.random_range(-2.0..2.0)];
            let (d, s) = (direction(&mut r), log_uniform(&mut r, 1e-4, 10.0));
            loglip_field_certificate(&rho, x, [x[0] + s * d[0], x[1] + s * d[1], x[2] + s * d[2]])?
        }
        Campaign::Loglip2 => {
            let rho = random_density(&mut r)?;
            let (a, b) = (point_cloud(&mut r, 6)?, point_cloud(&mut r, 6)?);
            let sol = w2(&a, &b, &W2Options::default())?;
            loglip2_integral_certificate(&rho, &sol.plan)?
        }
        Campaign::Gronwall => gronwall_sample(&mut r)?,
        Campaign::Classical => classical_sample(&mut r)?,
    };
    Ok(cert.seeded(seed))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleRecord {
    pub index: usize,
    pub certificate: Certificate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub campaign: Campaign,
    pub seed: u64,
    pub n_samples: usize,
    pub passed: usize,
    pub inconclusive: usize,
    pub failed: usize,
    /// Smallest `bound + tolerance − measured` and its sample.
    pub worst_margin: f64,
    pub worst_index: usize,
    /// `all` or `non-pass`.
    pub samples_written: String,
    pub status: Status,
}

/// Runs the campaign; returns the summary and the recorded samples (all of
/// them up to [`FULL_SAMPLE_LIMIT`], otherwise the non-passing ones).
pub fn run_campaign(campaign: Campaign, n_samples: usize, seed: u64) -> LabResult<(CampaignSummary, Vec<SampleRecord>)> {
    if n_samples == 0 {
        return Err(LabError::Usage("campaign needs at least one sample".into()));
    }
    let keep_all = n_samples <= FULL_SAMPLE_LIMIT;
    let mut summary = CampaignSummary {
        campaign,
        seed,
        n_samples,
        passed: 0,
        inconclusive: 0,
        failed: 0,
        worst_margin: f64::INFINITY,
        worst_index: 0,
        samples_written: if keep_all { "all" } else { "non-pass" }.into(),
        status: Status::Pass,
    };
    let mut kept = Vec::new();
    const CHUNK: usize = 1 << 14;
    for start in (0..n_samples).step_by(CHUNK) {
        let end = (start + CHUNK).min(n_samples);
        let certs: Vec<Certificate> = (start..end).into_par_iter().map(|i| run_sample(campaign, seed, i)).collect::<LabResult<_>>()?;
        for (k, c) in certs.into_iter().enumerate() {
            let index = start + k;
            match c.status {
                Status::Pass => summary.passed += 1,
                Status::Inconclusive => summary.inconclusive += 1,
                Status::Fail => summary.failed += 1,
            }
            if c.margin < summary.worst_margin {
                (summary.worst_margin, summary.worst_index) = (c.margin, index);
            }
            summary.status = summary.status.max(c.status);
            if keep_all || c.status != Status::Pass {
                kept.push(SampleRecord { index, certificate: c });
            }
        }
    }
    Ok((summary, kept))
}

/// Writes `samples.jsonl`, `summary.json` and `summary.csv` into `out`.
pub fn write_campaign(out: &Path, summary: &CampaignSummary, samples: &[SampleRecord]) -> LabResult<()> {
    let mut lines = String::new();
    for s in samples {
        lines.push_str(&serde_json::to_string(s)?);
        lines.push('\n');
    }
    write_text(&out.join("samples.jsonl"), &lines)?;
    write_json(&out.join("summary.json"), summary)?;
    let mut csv = Csv::new(&["key", "value"]);
    let rows: [(&str, Cell); 9] = [
        ("campaign", Cell::S(summary.campaign.name().into())),
        ("seed", Cell::U(summary.seed)),
        ("n_samples", Cell::U(summary.n_samples as u64)),
        ("passed", Cell::U(summary.passed as u64)),
        ("inconclusive", Cell::U(summary.inconclusive as u64)),
        ("failed", Cell::U(summary.failed as u64)),
        ("worst_margin", Cell::F(summary.worst_margin)),
        ("worst_index", Cell::U(summary.worst_index as u64)),
        ("status", Cell::S(format!("{:?}", summary.status).to_lowercase())),
    ];
    for (k, v) in rows {
        csv.row(&[Cell::S(k.into()), v]);
    }
    write_text(&out.join("summary.csv"), csv.as_str())
}
