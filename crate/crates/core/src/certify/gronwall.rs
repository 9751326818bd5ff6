use alloc::vec::Vec;

use super::constants::BoundConstants;
use crate::error::{bail, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(rename_all = "snake_case"))]
pub enum Interpolation {
    /// `C∞(s) = values[i]` on `[times[i], times[i+1])`.
    PiecewiseConstant,
    PiecewiseLinear,
}

/// Sampled `C∞(t)` on `[0, ∞)`, extended by its last value.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CInfTrajectory {
    times: Vec<f64>,
    values: Vec<f64>,
    interpolation: Interpolation,
}

impl CInfTrajectory {
    pub fn new(times: Vec<f64>, values: Vec<f64>, interpolation: Interpolation) -> Result<Self> {
        if times.is_empty() || times.len() != values.len() {
            bail!(InvalidInput, "need equally many (>= 1) times and values");
        }
        if times[0] != 0.0 {
            bail!(InvalidInput, "trajectory must start at t = 0");
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            bail!(InvalidInput, "times must increase strictly");
        }
        if let Some(v) = values.iter().find(|v| !(**v >= 1.0) || !v.is_finite()) {
            bail!(InvalidInput, "C_inf values must be finite and >= 1, got {v}");
        }
        Ok(Self { times, values, interpolation })
    }

    pub fn constant(value: f64) -> Result<Self> {
        Self::new(alloc::vec![0.0], alloc::vec![value], Interpolation::PiecewiseConstant)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    pub fn initial(&self) -> f64 {
        self.values[0]
    }

    pub fn value_at(&self, t: f64) -> f64 {
        let i = self.times.partition_point(|s| *s <= t).max(1) - 1;
        match self.interpolation {
            Interpolation::PiecewiseConstant => self.values[i],
            Interpolation::PiecewiseLinear => {
                if i + 1 >= self.times.len() {
                    self.values[i]
                } else {
                    let (t0, t1) = (self.times[i], self.times[i + 1]);
                    let w = (t - t0) / (t1 - t0);
                    self.values[i] + w * (self.values[i + 1] - self.values[i])
                }
            }
        }
    }

    /// Largest value on `[0, t]`.
    pub fn sup_until(&self, t: f64) -> f64 {
        let mut m = self.values[0];
        for (s, v) in self.times.iter().zip(&self.values) {
            if *s > t {
                break;
            }
            m = m.max(*v);
        }
        m.max(self.value_at(t))
    }

    /// Exact integral of `√(scale·C∞)` over `[a, b]` within one piece.
    fn piece_integral(&self, i: usize, scale: f64, a: f64, b: f64) -> f64 {
        let linear = self.interpolation == Interpolation::PiecewiseLinear && i + 1 < self.times.len();
        if !linear {
            return libm::sqrt(scale * self.values[i]) * (b - a);
        }
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let slope = (self.values[i + 1] - self.values[i]) / (t1 - t0);
        let ca = self.values[i] + slope * (a - t0);
        let cb = self.values[i] + slope * (b - t0);
        if slope.abs() * (b - a) <= 1e-12 * ca {
            return libm::sqrt(scale) * 0.5 * (libm::sqrt(ca) + libm::sqrt(cb)) * (b - a);
        }
        libm::sqrt(scale) * 2.0 / (3.0 * slope) * (cb * libm::sqrt(cb) - ca * libm::sqrt(ca))
    }

    fn piece_end(&self, i: usize) -> f64 {
        self.times.get(i + 1).copied().unwrap_or(f64::INFINITY)
    }

    /// `∫₀^t √(scale·C∞(s)) ds`.
    pub fn integral_sqrt(&self, scale: f64, t: f64) -> f64 {
        let mut total = 0.0;
        for i in 0..self.times.len() {
            let a = self.times[i];
            if a >= t {
                break;
            }
            total += self.piece_integral(i, scale, a, self.piece_end(i).min(t));
        }
        total
    }

    /// Smallest `t` with `integral_sqrt(scale, t) = target` (exists since
    /// `C∞ ≥ 1`).
    pub fn inverse_integral_sqrt(&self, scale: f64, target: f64) -> f64 {
        if target <= 0.0 {
            return 0.0;
        }
        let mut acc = 0.0;
        for i in 0..self.times.len() {
            let (a, b) = (self.times[i], self.piece_end(i));
            let piece = if b.is_finite() { self.piece_integral(i, scale, a, b) } else { f64::INFINITY };
            if acc + piece >= target {
                let (mut lo, mut hi) = (a, if b.is_finite() { b } else { a + (target - acc) / libm::sqrt(scale * self.values[i]) });
                if !b.is_finite() {
                    return hi;
                }
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if acc + self.piece_integral(i, scale, a, mid) < target {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo <= 1e-16 * hi.abs().max(1.0) {
                        break;
                    }
                }
                return 0.5 * (lo + hi);
            }
            acc += piece;
        }
        f64::INFINITY
    }

    /// `Λ_lem(t) = ∫₀^t √(2C∞)`.
    pub fn lambda_lemma(&self, t: f64) -> f64 {
        self.integral_sqrt(2.0, t)
    }

    /// `Λ_thm(t) = ∫₀^t √C∞`.
    pub fn lambda_theorem(&self, t: f64) -> f64 {
        self.integral_sqrt(1.0, t)
    }
}

/// Intermediate quantities of the Grönwall bound.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GronwallParts {
    /// `√((c₂ − ln Q0)₊)`.
    pub a: f64,
    pub tau: f64,
    pub lambda_t: f64,
    pub lambda_tau: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub bound: f64,
    /// The two-branch form (before and after `τ`).
    pub piecewise: f64,
}

pub fn gronwall_parts(k: &BoundConstants, q0: f64, traj: &CInfTrajectory, t: f64) -> Result<GronwallParts> {
    if !(q0 > 0.0) || !(t >= 0.0) {
        bail!(InvalidInput, "need Q0 > 0 and t >= 0 (Q0 {q0}, t {t})");
    }
    let a = libm::sqrt((k.c2 - libm::log(q0)).max(0.0));
    let target = (a - libm::sqrt(k.c2 + k.y0)).max(0.0);
    let tau = traj.inverse_integral_sqrt(2.0, target);
    let lambda_t = traj.lambda_lemma(t);
    let lambda_tau = if tau.is_finite() { traj.lambda_lemma(tau) } else { f64::INFINITY };
    let lambda1 = traj.lambda_lemma(t.min(tau));
    let lambda2 = libm::sqrt(k.c2) * (lambda_t - lambda_tau).max(0.0) - 0.5 * lambda1 * lambda1;
    let bound = q0 * libm::exp(2.0 * lambda1 * a + 2.0 * lambda2);
    let piecewise = if t < tau {
        let d = a - lambda_t;
        libm::exp(-d * d + k.c2)
    } else {
        k.x0.max(q0) * libm::exp(2.0 * libm::sqrt(k.c2) * (lambda_t - lambda_tau))
    };
    Ok(GronwallParts { a, tau, lambda_t, lambda_tau, lambda1, lambda2, bound, piecewise })
}

/// `Q0 · exp(2Λ₁√((c₂ − ln Q0)₊) + 2Λ₂)` with `Λ = ∫√(2C∞)`.
pub fn gronwall_bound(q0: f64, traj: &CInfTrajectory, t: f64) -> Result<f64> {
    Ok(gronwall_parts(&BoundConstants::universal(), q0, traj, t)?.bound)
}

/// [`gronwall_bound`] times `e^{δ*}` from
/// [`BoundConstants::linear_branch_excess`]: accounts for `Ψ` exceeding `c`
/// while `Q > x₀`.
pub fn gronwall_bound_corrected(q0: f64, traj: &CInfTrajectory, t: f64) -> Result<f64> {
    let k = BoundConstants::universal();
    Ok(gronwall_parts(&k, q0, traj, t)?.bound * libm::exp(k.linear_branch_excess()))
}

/// RK4 solution of `dQ/dt = 2Q√ℓ(Q)` (the comparison flow with `λ = ℓ(Q)`)
/// sampled at `n_steps + 1` equispaced times on `[0, t]`.
pub fn comparison_flow(q0: f64, traj: &CInfTrajectory, t: f64, n_steps: usize) -> Result<Vec<f64>> {
    if !(q0 > 0.0) || n_steps == 0 {
        bail!(InvalidInput, "need Q0 > 0 and at least one step");
    }
    let k = BoundConstants::universal();
    let dt = t / n_steps as f64;
    let rhs = |s: f64, q: f64| -> Result<f64> { Ok(2.0 * q * libm::sqrt(k.ell(q, traj.value_at(s))?)) };
    let mut out = Vec::with_capacity(n_steps + 1);
    let mut q = q0;
    out.push(q);
    for i in 0..n_steps {
        let s = i as f64 * dt;
        let k1 = rhs(s, q)?;
        let k2 = rhs(s + 0.5 * dt, q + 0.5 * dt * k1)?;
        let k3 = rhs(s + 0.5 * dt, q + 0.5 * dt * k2)?;
        let k4 = rhs(s + dt, q + dt * k3)?;
        q += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        out.push(q);
    }
    Ok(out)
}

/// Main-theorem bound and its pieces.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TheoremBound {
    /// Bound with the prefactor `(C∞⁰)^{1/3}`.
    pub value: f64,
    /// Same bound with `(C∞⁰)^{2/3}`.
    pub value_two_thirds: f64,
    /// `Λ(t) = ∫₀^t √C∞`.
    pub lambda: f64,
    /// `2Λ + (1 − ε)Λ²/ε`.
    pub lambda_eps: f64,
}

pub fn main_theorem_parts(w_init: f64, eps: f64, traj: &CInfTrajectory, t: f64) -> Result<TheoremBound> {
    if !(eps > 0.0 && eps < 1.0) {
        bail!(InvalidInput, "eps must lie in (0, 1), got {eps}");
    }
    if !(w_init > 0.0) || !(t >= 0.0) {
        bail!(InvalidInput, "need W_init > 0 and t >= 0 (W_init {w_init}, t {t})");
    }
    let lambda = traj.lambda_theorem(t);
    let lambda_eps = 2.0 * lambda + (1.0 - eps) * lambda * lambda / eps;
    let core = libm::pow(traj.value_at(t), 1.0 / 6.0)
        * (5.0 / eps * libm::pow(w_init, 1.0 - eps)).max(3.0 * w_init)
        * libm::exp(lambda_eps);
    let c0 = traj.initial();
    Ok(TheoremBound {
        value: core * libm::cbrt(c0),
        value_two_thirds: core * libm::pow(c0, 2.0 / 3.0),
        lambda,
        lambda_eps,
    })
}

/// `C∞(t)^{1/6}(C∞⁰)^{1/3} max((5/ε)W^{1−ε}, 3W) e^{Λ_ε(t)}`.
pub fn main_theorem_bound(w_init: f64, eps: f64, traj: &CInfTrajectory, t: f64) -> Result<f64> {
    Ok(main_theorem_parts(w_init, eps, traj, t)?.value)
}

/// `C_{T,ε}` with `W(t) ≤ C_{T,ε} √ħ^{1−ε}` whenever `W_init ≤ C√ħ ≤ 1`.
pub fn hbar_rate_constant(c_init: f64, eps: f64, traj: &CInfTrajectory, t: f64) -> Result<f64> {
    if !(c_init > 0.0) {
        bail!(InvalidInput, "need C > 0");
    }
    let p = main_theorem_parts(1.0, eps, traj, t)?;
    let scale = (5.0 / eps * libm::pow(c_init, 1.0 - eps)).max(3.0 * c_init) / 5.0 * eps;
    Ok(p.value * scale)
}

/// Classical comparison solution `Y(t) = exp(−(√|ln η| − Ct)²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClassicalBound {
    pub y: f64,
    /// `√|ln η| ≥ Ct`, where `Y` is increasing and the closed form applies.
    pub valid: bool,
    /// `⟨ln Y⟩ Y` with `⟨y⟩ = √(1 + y²)`.
    pub weighted: f64,
    /// `η e^{2√|ln η| C t} e^{−C²t²}`, the expanded form of `y`.
    pub expanded: f64,
}

pub fn classical_bound(eta: f64, c: f64, t: f64) -> Result<ClassicalBound> {
    if !(eta > 0.0 && eta < 1.0) {
        bail!(InvalidInput, "eta must lie in (0, 1), got {eta}");
    }
    let s = libm::sqrt(-libm::log(eta));
    let d = s - c * t;
    let y = libm::exp(-d * d);
    let ly = libm::log(y);
    Ok(ClassicalBound {
        y,
        valid: d >= 0.0,
        weighted: libm::sqrt(1.0 + ly * ly) * y,
        expanded: eta * libm::exp(2.0 * s * c * t) * libm::exp(-c * c * t * t),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_trajectory_integral_matches_midpoint_sum() {
        let tr = CInfTrajectory::new(alloc::vec![0.0, 1.0, 2.5], alloc::vec![1.0, 4.0, 2.0], Interpolation::PiecewiseLinear).unwrap();
        let n = 200_000;
        let h = 3.0 / n as f64;
        let s: f64 = (0..n).map(|i| libm::sqrt(2.0 * tr.value_at((i as f64 + 0.5) * h)) * h).sum();
        assert!((tr.lambda_lemma(3.0) - s).abs() < 1e-9);
        let t = tr.inverse_integral_sqrt(2.0, 2.0);
        assert!((tr.lambda_lemma(t) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn unit_initial_value_takes_the_linear_branch() {
        let k = BoundConstants::universal();
        let tr = CInfTrajectory::constant(1.0).unwrap();
        let p = gronwall_parts(&k, 1.0, &tr, 0.7).unwrap();
        assert_eq!(p.tau, 0.0);
        let expect = libm::exp(2.0 * libm::sqrt(k.c2) * libm::sqrt(2.0) * 0.7);
        assert!((p.bound / expect - 1.0).abs() < 1e-14);
    }

    #[test]
    fn both_forms_agree_before_tau() {
        let k = BoundConstants::universal();
        let tr = CInfTrajectory::constant(2.0).unwrap();
        let p = gronwall_parts(&k, 1e-6, &tr, 0.1).unwrap();
        assert!(0.1 < p.tau);
        assert!((p.bound / p.piecewise - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trajectories_below_one_are_rejected() {
        assert!(CInfTrajectory::new(alloc::vec![0.0, 1.0], alloc::vec![1.0, 0.5], Interpolation::PiecewiseConstant).is_err());
    }
}
