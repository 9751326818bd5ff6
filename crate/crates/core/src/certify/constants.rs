use crate::error::{bail, Result};
use crate::quad::integrate;

/// Constants of the log-Lipschitz estimate and of the Grönwall argument.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundConstants {
    /// `(3 − √5)/2`, root of `θ = (1 − θ)²`.
    pub theta1: f64,
    /// Root of `θ² = (1 − θ)³` in `(0, 1)`.
    pub theta2: f64,
    /// `2/3 + (√5 − θ₂)/2`.
    pub c: f64,
    /// `c + 1/2`.
    pub c2: f64,
    /// `1 + √(1 + c²) − c = −ln x₀`.
    pub y0: f64,
    /// `exp(c − 1 − √(1 + c²))`, where `Φ` switches to its linear branch.
    pub x0: f64,
    pub kappa: f64,
    /// `C∞` at the initial time.
    pub c_inf_init: f64,
    /// `(3|κ| / (8π θ₁³ C∞⁰))^{1/3}`; `None` for `κ = 0`.
    pub r: Option<f64>,
}

/// Root of `θ² = (1 − θ)³`: bisection to a small bracket, then Newton.
fn theta2_root() -> f64 {
    let g = |t: f64| t * t - (1.0 - t) * (1.0 - t) * (1.0 - t);
    let dg = |t: f64| 2.0 * t + 3.0 * (1.0 - t) * (1.0 - t);
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..30 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut t = 0.5 * (lo + hi);
    for _ in 0..8 {
        let step = g(t) / dg(t);
        t -= step;
        if step.abs() <= 1e-17 {
            break;
        }
    }
    t
}

pub fn constants(kappa: f64) -> BoundConstants {
    constants_with(kappa, kappa.abs().max(1.0))
}

/// Constants with an explicit initial `C∞`.
pub fn constants_with(kappa: f64, c_inf_init: f64) -> BoundConstants {
    let sqrt5 = libm::sqrt(5.0);
    let theta1 = (3.0 - sqrt5) / 2.0;
    let theta2 = theta2_root();
    let c = 2.0 / 3.0 + (sqrt5 - theta2) / 2.0;
    let s = libm::sqrt(1.0 + c * c);
    let mut k = BoundConstants {
        theta1,
        theta2,
        c,
        c2: c + 0.5,
        y0: 1.0 + s - c,
        x0: libm::exp(c - 1.0 - s),
        kappa,
        c_inf_init,
        r: None,
    };
    k.r = k.radius(c_inf_init).ok();
    k
}

impl BoundConstants {
    /// κ-independent constants (`κ = 1`, `C∞ = 1`).
    pub fn universal() -> Self {
        constants_with(1.0, 1.0)
    }

    /// `R = (3|κ|‖ρ‖₁ / (8π θ₁³ C∞))^{1/3}` with `‖ρ‖₁ = 1`.
    pub fn radius(&self, c_inf: f64) -> Result<f64> {
        if self.kappa == 0.0 || !(c_inf > 0.0) {
            bail!(InvalidInput, "radius needs kappa != 0 and C_inf > 0 (kappa {}, C_inf {c_inf})", self.kappa);
        }
        let t3 = self.theta1 * self.theta1 * self.theta1;
        Ok(libm::cbrt(3.0 * self.kappa.abs() / (8.0 * core::f64::consts::PI * t3 * c_inf)))
    }

    /// `Φ(x₀) = x₀ (c + y₀)²`.
    pub fn phi_x0(&self) -> f64 {
        self.x0 * (self.c + self.y0) * (self.c + self.y0)
    }

    /// `Φ(x) = x(c − ln x)²` for `x ≤ x₀`, `Φ(x₀) + c²(x − x₀)` beyond.
    pub fn phi(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            bail!(InvalidInput, "Phi needs x > 0, got {x}");
        }
        Ok(if x <= self.x0 {
            let a = self.c - libm::log(x);
            x * a * a
        } else {
            self.phi_x0() + self.c * self.c * (x - self.x0)
        })
    }

    /// `√(Φ(x)/x)`, evaluated without cancellation on the logarithmic branch.
    pub fn sqrt_phi_ratio(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            bail!(InvalidInput, "Phi ratio needs x > 0, got {x}");
        }
        Ok(if x <= self.x0 { self.c - libm::log(x) } else { libm::sqrt(self.phi(x)? / x) })
    }

    /// `Ψ(y) = √(Φ(e^{−y}) e^{y})`; equals `c + y` for `y ≥ y₀`.
    pub fn psi(&self, y: f64) -> f64 {
        if y >= self.y0 {
            self.c + y
        } else {
            let q = libm::exp(-y);
            libm::sqrt((self.phi_x0() + self.c * self.c * (q - self.x0)) / q)
        }
    }

    /// `ℓ(q) = C∞(1 + 2√(Φ(q)/q))`.
    pub fn ell(&self, q: f64, c_inf: f64) -> Result<f64> {
        Ok(c_inf * (1.0 + 2.0 * self.sqrt_phi_ratio(q)?))
    }

    /// Excess `δ* = ∫_{ln x₀}^∞ (1 − √c₂ / √(1/2 + Ψ(−u))) du` of the
    /// comparison flow `d ln Q/dΛ = √(2(1/2 + Ψ))` over the rate `2√c₂` once
    /// `Q ≥ x₀`. It is positive because `Ψ(y) ≥ c` for `y < y₀`.
    pub fn linear_branch_excess(&self) -> f64 {
        let f = |u: f64| 1.0 - libm::sqrt(self.c2) / libm::sqrt(0.5 + self.psi(-u));
        let a = libm::log(self.x0);
        let mut total = 0.0;
        for (lo, hi) in [(a, 0.0), (0.0, 5.0), (5.0, 20.0), (20.0, 45.0)] {
            total += integrate(f, lo, hi, 1e-16, 1e-14, 4096).value;
        }
        total
    }
}

/// Free-standing forms with the κ-independent constants.
pub fn phi(x: f64) -> Result<f64> {
    BoundConstants::universal().phi(x)
}

pub fn psi(y: f64) -> f64 {
    BoundConstants::universal().psi(y)
}

pub fn ell(q: f64, c_inf: f64) -> Result<f64> {
    BoundConstants::universal().ell(q, c_inf)
}
