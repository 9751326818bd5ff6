use alloc::vec::Vec;
use core::f64::consts::PI;

use super::certificate::{Certificate, InputDigest, Status};
use super::constants::BoundConstants;
use crate::dd::Dd;
use crate::error::{bail, Result};
use crate::quad::integrate;
use crate::transport::TransportPlan;

fn norm_dd(v: &[Dd; 3]) -> Dd {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Checks `|x/|x|³ − y/|y|³| ≤ |y − x|/(|x||y|) · (1/|x| + 1/|y|)` in
/// double-double arithmetic. The metric `ratio` is LHS/RHS.
pub fn coulomb_elementary(x: [f64; 3], y: [f64; 3]) -> Result<Certificate> {
    let xd = x.map(Dd::from);
    let yd = y.map(Dd::from);
    let (nx, ny) = (norm_dd(&xd), norm_dd(&yd));
    if nx.hi == 0.0 || ny.hi == 0.0 {
        bail!(InvalidInput, "points must be nonzero");
    }
    let (nx3, ny3) = (nx * nx * nx, ny * ny * ny);
    let diff: [Dd; 3] = core::array::from_fn(|i| xd[i] / nx3 - yd[i] / ny3);
    let lhs = norm_dd(&diff);
    let sep: [Dd; 3] = core::array::from_fn(|i| yd[i] - xd[i]);
    let one = Dd::from(1.0);
    let rhs = norm_dd(&sep) / (nx * ny) * (one / nx + one / ny);
    let gap = (rhs - lhs).to_f64();
    let tol = 1e-26 * rhs.to_f64();
    let status = if gap >= -tol { Status::Pass } else { Status::Fail };
    let digest = InputDigest::new().str("coulomb_elementary").f64s(&x).f64s(&y);
    let ratio = if rhs.hi > 0.0 { (lhs / rhs).to_f64() } else { 0.0 };
    let mut cert = Certificate::with_status("coulomb_elementary", digest, rhs.to_f64(), lhs.to_f64(), tol, status).metric("ratio", ratio);
    cert.margin = gap;
    Ok(cert)
}

/// Radial profile of one density component.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(tag = "kind", rename_all = "snake_case"))]
pub enum Profile {
    Ball { radius: f64 },
    Gaussian { sigma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Blob {
    pub center: [f64; 3],
    pub mass: f64,
    pub profile: Profile,
}

impl Blob {
    fn sup(&self) -> f64 {
        match self.profile {
            Profile::Ball { radius } => 3.0 * self.mass / (4.0 * PI * radius * radius * radius),
            Profile::Gaussian { sigma } => self.mass / libm::pow(2.0 * PI * sigma * sigma, 1.5),
        }
    }

    fn radial_density(&self, s: f64) -> f64 {
        match self.profile {
            Profile::Ball { radius } => {
                if s <= radius {
                    self.sup()
                } else {
                    0.0
                }
            }
            Profile::Gaussian { sigma } => self.sup() * libm::exp(-0.5 * s * s / (sigma * sigma)),
        }
    }

    /// Mass inside radius `r` about the center, closed form.
    fn enclosed_exact(&self, r: f64) -> f64 {
        match self.profile {
            Profile::Ball { radius } => {
                let q = (r / radius).min(1.0);
                self.mass * q * q * q
            }
            Profile::Gaussian { sigma } => {
                let s = r / sigma;
                let frac = if s < 1e-3 {
                    let s3 = s * s * s;
                    libm::sqrt(2.0 / PI) * (s3 / 3.0 - s3 * s * s / 10.0 + s3 * s * s * s * s / 56.0)
                } else {
                    libm::erf(s / core::f64::consts::SQRT_2) - libm::sqrt(2.0 / PI) * s * libm::exp(-0.5 * s * s)
                };
                self.mass * frac
            }
        }
    }

    /// Mass inside radius `r` by adaptive quadrature of the shells.
    fn enclosed_quadrature(&self, r: f64, tol: f64) -> (f64, f64) {
        let upper = match self.profile {
            Profile::Ball { radius } => r.min(radius),
            Profile::Gaussian { .. } => r,
        };
        if upper <= 0.0 {
            return (0.0, 0.0);
        }
        let q = integrate(|s| 4.0 * PI * s * s * self.radial_density(s), 0.0, upper, tol, 1e-15, 20_000);
        (q.value, q.error)
    }
}

/// Superposition of radially symmetric components in three dimensions.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Density3d {
    pub blobs: Vec<Blob>,
}

/// How to evaluate `E = ∇(1/(4π|·|)) * ρ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldRoute {
    ClosedForm,
    /// Shell quadrature with the given absolute tolerance on enclosed mass.
    Quadrature { tol: f64 },
}

impl Density3d {
    pub fn new(blobs: Vec<Blob>) -> Result<Self> {
        if blobs.is_empty() {
            bail!(InvalidInput, "density needs at least one component");
        }
        for b in &blobs {
            let width = match b.profile {
                Profile::Ball { radius } => radius,
                Profile::Gaussian { sigma } => sigma,
            };
            if !(b.mass > 0.0) || !(width > 0.0) {
                bail!(InvalidInput, "component mass and width must be positive");
            }
        }
        Ok(Self { blobs })
    }

    pub fn mass(&self) -> f64 {
        self.blobs.iter().map(|b| b.mass).sum()
    }

    /// Upper bound on `‖ρ‖∞` (sum of component maxima).
    pub fn sup_bound(&self) -> f64 {
        self.blobs.iter().map(Blob::sup).sum()
    }

    /// Field at `p` and an absolute error bound on it.
    pub fn field(&self, p: [f64; 3], route: FieldRoute) -> ([f64; 3], f64) {
        let mut e = [0.0; 3];
        let mut err = 0.0;
        for b in &self.blobs {
            let d = [p[0] - b.center[0], p[1] - b.center[1], p[2] - b.center[2]];
            let r = libm::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
            if r == 0.0 {
                continue;
            }
            let (m, dm) = match route {
                FieldRoute::ClosedForm => (b.enclosed_exact(r), 0.0),
                FieldRoute::Quadrature { tol } => b.enclosed_quadrature(r, tol),
            };
            let s = 1.0 / (4.0 * PI * r * r * r);
            for k in 0..3 {
                e[k] += m * s * d[k];
            }
            err += dm / (4.0 * PI * r * r);
        }
        (e, err)
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    libm::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>())
}

/// `R` for a density with `‖ρ‖₁ = mass` and `C∞ = c_inf` (κ = 1).
fn radius_for(k: &BoundConstants, mass: f64, c_inf: f64) -> f64 {
    libm::cbrt(3.0 * mass / (8.0 * PI * k.theta1 * k.theta1 * k.theta1 * c_inf))
}

fn decide(lhs: f64, err: f64, rhs: f64) -> Status {
    if lhs + err <= rhs {
        Status::Pass
    } else if lhs - err > rhs {
        Status::Fail
    } else {
        Status::Inconclusive
    }
}

const BASE_TOL: f64 = 1e-10;

/// `|E(x) − E(y)| ≤ 2C∞|x − y|(c + ln₊(R²/|x − y|²))` with `C∞ = ‖ρ‖∞`
/// (upper bound) and `E` evaluated by shell quadrature. When the quadrature
/// error exceeds 1% of the margin the tolerance is tightened once; if that
/// is still not enough the certificate is inconclusive.
pub fn loglip_field_certificate(rho: &Density3d, x: [f64; 3], y: [f64; 3]) -> Result<Certificate> {
    let k = BoundConstants::universal();
    let c_inf = rho.sup_bound();
    let r = radius_for(&k, rho.mass(), c_inf);
    let delta = dist(&x, &y);
    let rhs = if delta == 0.0 { 0.0 } else { 2.0 * c_inf * delta * (k.c + (libm::log(r * r / (delta * delta))).max(0.0)) };
    let mut digest = InputDigest::new().str("loglip_field").f64s(&x).f64s(&y);
    for b in &rho.blobs {
        digest = digest.f64s(&b.center).f64(b.mass);
        digest = match b.profile {
            Profile::Ball { radius } => digest.str("ball").f64(radius),
            Profile::Gaussian { sigma } => digest.str("gaussian").f64(sigma),
        };
    }
    if delta == 0.0 {
        return Ok(Certificate::with_status("loglip_field", digest, 0.0, 0.0, 0.0, Status::Pass).metric("delta", 0.0).metric("radius", r).metric("c_inf", c_inf));
    }
    let scale = rho.mass();
    let mut tol = BASE_TOL * scale;
    let mut refinements = 0;
    let (lhs, err) = loop {
        let (ex, ax) = rho.field(x, FieldRoute::Quadrature { tol });
        let (ey, ay) = rho.field(y, FieldRoute::Quadrature { tol });
        let lhs = dist(&ex, &ey);
        let err = ax + ay;
        if err <= 0.01 * (rhs - lhs).abs() || refinements == 1 {
            break (lhs, err);
        }
        refinements += 1;
        tol *= 1e-3;
    };
    let (cx, _) = rho.field(x, FieldRoute::ClosedForm);
    let (cy, _) = rho.field(y, FieldRoute::ClosedForm);
    let closed = dist(&cx, &cy);
    let mut status = decide(lhs, err, rhs);
    if status == Status::Pass && err > 0.01 * (rhs - lhs) {
        status = Status::Inconclusive;
    }
    Ok(Certificate::with_status("loglip_field", digest, rhs, lhs, err, status)
        .metric("delta", delta)
        .metric("radius", r)
        .metric("c_inf", c_inf)
        .metric("quadrature_error", err)
        .metric("closed_form_lhs", closed)
        .metric("refinements", refinements as f64))
}

/// `Σ γ_ij |E(x_i) − E(y_j)|² ≤ (2C∞)² R² Φ(Q_X/R²)` with
/// `Q_X = Σ γ_ij |x_i − y_j|²`, over a three-dimensional plan.
pub fn loglip2_integral_certificate(rho: &Density3d, plan: &TransportPlan) -> Result<Certificate> {
    if plan.source.dim() != 3 || plan.target.dim() != 3 {
        bail!(InvalidInput, "plan must couple points of R^3");
    }
    let k = BoundConstants::universal();
    let c_inf = rho.sup_bound();
    let r = radius_for(&k, rho.mass(), c_inf);
    let tol = BASE_TOL * rho.mass();
    let eval = |m: &crate::transport::DiscreteMeasure| -> Vec<([f64; 3], f64)> {
        (0..m.len())
            .map(|i| {
                let p = m.point(i);
                rho.field([p[0], p[1], p[2]], FieldRoute::Quadrature { tol })
            })
            .collect()
    };
    let (fs, ft) = (eval(&plan.source), eval(&plan.target));
    let (mut lhs, mut err, mut qx) = (0.0, 0.0, 0.0);
    let mut digest = InputDigest::new().str("loglip2_integral");
    for &(i, j, m) in &plan.entries {
        let dx = dist(plan.source.point(i), plan.target.point(j));
        let de = dist(&fs[i].0, &ft[j].0);
        let e = fs[i].1 + ft[j].1;
        lhs += m * de * de;
        err += m * (2.0 * de * e + e * e);
        qx += m * dx * dx;
        digest = digest.f64s(plan.source.point(i)).f64s(plan.target.point(j)).f64(m);
    }
    let bound = if qx > 0.0 { 4.0 * c_inf * c_inf * r * r * k.phi(qx / (r * r))? } else { 0.0 };
    let status = if qx == 0.0 && lhs == 0.0 { Status::Pass } else { decide(lhs, err, bound) };
    Ok(Certificate::with_status("loglip2_integral", digest, bound, lhs, err, status)
        .metric("q_x", qx)
        .metric("radius", r)
        .metric("c_inf", c_inf)
        .metric("quadrature_error", err))
}
