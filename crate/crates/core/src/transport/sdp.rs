//! Exact `W_ħ` on small instances: the coupling problem as a semidefinite
//! program solved by Douglas–Rachford splitting, with a certified dual bound
//! and a feasibility-repaired primal bound.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{bail, Result};
use crate::grid::Axis;
use crate::linalg::{eigh, frobenius, hermitian_part, lambda_min, project_psd, trace_product, trace_re, CMatrix};
use crate::planck;
use crate::state::{MixedState, PhaseField};

/// Solver controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdpOptions {
    /// Largest spatial grid accepted.
    pub max_sites: usize,
    /// Largest number of phase cells with mass.
    pub max_cells: usize,
    pub max_iters: usize,
    /// Target for primal minus dual on the squared cost.
    pub gap_tol: f64,
    pub check_every: usize,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self { max_sites: 16, max_cells: 32, max_iters: 200_000, gap_tol: 1e-7, check_every: 50 }
    }
}

/// `min Σ_k Tr(C_k Γ_k)` over `Γ_k ⪰ 0`, `Tr Γ_k = m_k`, `Σ Γ_k = ρ̂`, where
/// `Γ_k = h γ_k` and `ρ̂ = h·op` has unit trace (orthonormal grid basis).
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingProblem {
    pub hbar: f64,
    pub axis: Axis,
    /// Phase cells `(x_k, ξ_k)`.
    pub cells: Vec<(f64, f64)>,
    pub masses: Vec<f64>,
    pub rho_hat: CMatrix,
    pub costs: Vec<CMatrix>,
}

impl CouplingProblem {
    /// Cost `c_k = (x_k − x̂)² + (ξ_k − p̂)²` with minimal-image positions and
    /// the spectral momentum `p̂ = −iħ∂`.
    pub fn new(hbar: f64, axis: Axis, cells: Vec<(f64, f64)>, masses: Vec<f64>, rho_hat: CMatrix) -> Result<Self> {
        let n = axis.len();
        if rho_hat.nrows() != n || rho_hat.ncols() != n || cells.len() != masses.len() || cells.is_empty() {
            bail!(InvalidInput, "coupling problem dimensions do not match");
        }
        let s: f64 = masses.iter().sum();
        if (s - 1.0).abs() > 1e-9 || masses.iter().any(|m| *m < 0.0) {
            bail!(InvalidInput, "cell masses must be a probability vector (sum {s})");
        }
        if (trace_re(&rho_hat) - 1.0).abs() > 1e-9 {
            bail!(InvalidInput, "scaled operator must have unit trace");
        }
        let f = dft(n);
        let costs = cells
            .iter()
            .map(|&(xk, pk)| {
                let xpart = DMatrix::from_diagonal(&DVector::from_iterator(
                    n,
                    axis.points().map(|x| {
                        let d = axis.wrap(x - xk);
                        Complex64::new(d * d, 0.0)
                    }),
                ));
                let pdiag = DMatrix::from_diagonal(&DVector::from_iterator(
                    n,
                    (0..n).map(|j| {
                        let d = pk - hbar * axis.wavenumber(j);
                        Complex64::new(d * d, 0.0)
                    }),
                ));
                hermitian_part(&(xpart + f.adjoint() * pdiag * &f))
            })
            .collect();
        Ok(Self { hbar, axis, cells, masses, rho_hat, costs })
    }

    /// Cells of `f` with positive mass and the operator `h·op`.
    pub fn from_states(f: &PhaseField, op: &MixedState, opts: &SdpOptions) -> Result<Self> {
        let g = f.grid();
        if g.dim() != 1 || g.x() != op.axis() {
            bail!(Mismatch, "phase field and state must share the one-dimensional position grid");
        }
        if op.axis().len() > opts.max_sites {
            bail!(Resource, "{} sites exceed the SDP cap {}", op.axis().len(), opts.max_sites);
        }
        if f.min_value() < 0.0 {
            bail!(InvalidInput, "classical marginal must be nonnegative");
        }
        let cv = g.cell_volume();
        let mut cells = Vec::new();
        let mut masses = Vec::new();
        for i in 0..g.nx() {
            for k in 0..g.nv() {
                let m = f.at(i, k) * cv;
                if m > 0.0 {
                    cells.push((g.x().point(i), g.v().point(k)));
                    masses.push(m);
                }
            }
        }
        if cells.len() > opts.max_cells {
            bail!(Resource, "{} phase cells exceed the SDP cap {}", cells.len(), opts.max_cells);
        }
        let s: f64 = masses.iter().sum();
        masses.iter_mut().for_each(|m| *m /= s);
        let rho = op.kernel().matrix() * Complex64::new(op.planck(), 0.0);
        Self::new(op.hbar(), *op.axis(), cells, masses, rho)
    }

    /// Solves the program (see [`wh_exact_sdp`]).
    pub fn solve(&self, opts: &SdpOptions) -> Result<SdpOutcome> {
        solve(self, opts)
    }

    /// Objective of a full coupling `(Γ_k)`.
    pub fn objective(&self, gammas: &[CMatrix]) -> f64 {
        self.costs.iter().zip(gammas).map(|(c, g)| trace_product(c, g)).sum()
    }

    /// Value of the product coupling `Γ_k = m_k ρ̂`.
    pub fn product_value(&self) -> f64 {
        self.costs.iter().zip(&self.masses).map(|(c, m)| m * trace_product(c, &self.rho_hat)).sum()
    }
}

fn dft(n: usize) -> CMatrix {
    let s = 1.0 / libm::sqrt(n as f64);
    DMatrix::from_fn(n, n, |k, j| {
        let a = -2.0 * core::f64::consts::PI * (k * j) as f64 / n as f64;
        Complex64::from_polar(s, a)
    })
}

/// Operator-valued coupling: one PSD matrix per phase cell (matrix form
/// `γ_k` in the orthonormal grid basis, so `h Tr γ_k = m_k`).
#[derive(Debug, Clone, PartialEq)]
pub struct SemiclassicalCoupling {
    pub hbar: f64,
    pub cells: Vec<(f64, f64)>,
    pub masses: Vec<f64>,
    pub gammas: Vec<CMatrix>,
}

impl SemiclassicalCoupling {
    /// Largest violations of (trace, marginal in scaled HS norm, PSD).
    pub fn invariant_errors(&self, op: &MixedState) -> (f64, f64, f64) {
        let h = planck(self.hbar);
        let tr = self.masses.iter().zip(&self.gammas).map(|(m, g)| (h * trace_re(g) - m).abs()).fold(0.0, f64::max);
        let sum = self.gammas.iter().fold(CMatrix::zeros(op.axis().len(), op.axis().len()), |a, g| a + g);
        let marg = libm::sqrt(h) * frobenius(&(sum - op.kernel().matrix()));
        let psd = self.gammas.iter().map(lambda_min).fold(0.0, f64::min);
        (tr, marg, psd)
    }
}

/// Solver result. `primal` is the cost of an exactly feasible coupling and
/// `dual` a certified lower bound, both on `W_ħ²`.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpOutcome {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
    pub converged: bool,
    pub iterations: usize,
    pub coupling: SemiclassicalCoupling,
    /// Smallest eigenvalue of the affine iterate before repair.
    pub psd_violation: f64,
    /// Value of the product coupling (a trivial upper bound).
    pub product_value: f64,
}

impl SdpOutcome {
    pub fn value(&self) -> f64 {
        libm::sqrt(self.primal.max(0.0))
    }

    /// `[√dual, √primal]`.
    pub fn bracket(&self) -> (f64, f64) {
        (libm::sqrt(self.dual.max(0.0)), self.value())
    }
}

/// Minimizes the coupling cost between `f` and `op`.
pub fn wh_exact_sdp(f: &PhaseField, op: &MixedState, opts: &SdpOptions) -> Result<SdpOutcome> {
    solve(&CouplingProblem::from_states(f, op, opts)?, opts)
}

struct Reduced {
    u: CMatrix,
    s: Vec<f64>,
    smat: CMatrix,
    costs: Vec<CMatrix>,
    masses: Vec<f64>,
}

fn reduce(p: &CouplingProblem) -> Reduced {
    let (vals, vecs) = eigh(&hermitian_part(&p.rho_hat));
    let top = vals.last().copied().unwrap_or(0.0);
    let keep: Vec<usize> = (0..vals.len()).filter(|&k| vals[k] > 1e-11 * top).collect();
    let n = p.rho_hat.nrows();
    let r = keep.len();
    let mut u = CMatrix::zeros(n, r);
    for (c, &k) in keep.iter().enumerate() {
        u.set_column(c, &vecs.column(k));
    }
    let tot: f64 = keep.iter().map(|&k| vals[k]).sum();
    let s: Vec<f64> = keep.iter().map(|&k| vals[k] / tot).collect();
    let smat = DMatrix::from_diagonal(&DVector::from_iterator(r, s.iter().map(|v| Complex64::new(*v, 0.0))));
    let costs = p.costs.iter().map(|c| hermitian_part(&(u.adjoint() * c * &u))).collect();
    Reduced { u, s, smat, costs, masses: p.masses.clone() }
}

fn project_affine(h: &[CMatrix], red: &Reduced) -> Vec<CMatrix> {
    let k = h.len() as f64;
    let r = red.s.len();
    let sum = h.iter().fold(CMatrix::zeros(r, r), |a, x| a + x);
    let t = (sum - &red.smat) * Complex64::new(1.0 / k, 0.0);
    let trt = trace_re(&t);
    h.iter()
        .zip(&red.masses)
        .map(|(hk, m)| {
            let mu = (trace_re(hk) - trt - m) / r as f64;
            let mut g = hk - &t;
            for i in 0..r {
                g[(i, i)] -= Complex64::new(mu, 0.0);
            }
            hermitian_part(&g)
        })
        .collect()
}

fn dual_value(red: &Reduced, y: &CMatrix) -> f64 {
    let ts: f64 = (0..red.s.len()).map(|i| red.s[i] * y[(i, i)].re).sum();
    ts + red.costs.iter().zip(&red.masses).map(|(c, m)| m * lambda_min(&(c - y))).sum::<f64>()
}

fn psd_power(m: &CMatrix, power: f64) -> CMatrix {
    let (vals, vecs) = eigh(&hermitian_part(m));
    let top = vals.last().copied().unwrap_or(0.0).max(0.0);
    let d = DVector::from_iterator(
        vals.len(),
        vals.iter().map(|v| Complex64::new(if *v > 1e-15 * top { libm::pow(*v, power) } else { 0.0 }, 0.0)),
    );
    hermitian_part(&(&vecs * DMatrix::from_diagonal(&d) * vecs.adjoint()))
}

/// Turns a PSD family into an exactly feasible coupling: alternate trace
/// rescaling and the congruence `Γ_k ↦ A Γ_k A†` with
/// `A = S^{1/2} (Σ Γ)^{-1/2}`, then close the remaining trace defect by
/// mixing with the product coupling.
fn repair(blocks: &[CMatrix], red: &Reduced) -> Vec<CMatrix> {
    let r = red.s.len();
    let sqrt_s = DMatrix::from_diagonal(&DVector::from_iterator(r, red.s.iter().map(|v| Complex64::new(libm::sqrt(*v), 0.0))));
    let mut g: Vec<CMatrix> = blocks
        .iter()
        .zip(&red.masses)
        .map(|(b, m)| b + &red.smat * Complex64::new(1e-12 * m, 0.0))
        .collect();
    for _ in 0..60 {
        for (gk, m) in g.iter_mut().zip(&red.masses) {
            let t = trace_re(gk);
            *gk *= Complex64::new(m / t, 0.0);
        }
        let sum = g.iter().fold(CMatrix::zeros(r, r), |a, x| a + x);
        let a = &sqrt_s * psd_power(&sum, -0.5);
        for gk in g.iter_mut() {
            *gk = hermitian_part(&(&a * &*gk * a.adjoint()));
        }
        let err = g.iter().zip(&red.masses).map(|(gk, m)| (trace_re(gk) - m).abs()).fold(0.0, f64::max);
        if err < 1e-14 {
            break;
        }
    }
    let traces: Vec<f64> = g.iter().map(trace_re).collect();
    let t = traces.iter().zip(&red.masses).map(|(tr, m)| if *tr > 0.0 { 1.0 - m / tr } else { 0.0 }).fold(0.0, f64::max);
    g.iter()
        .zip(traces.iter().zip(&red.masses))
        .map(|(gk, (tr, m))| gk * Complex64::new(1.0 - t, 0.0) + &red.smat * Complex64::new((m - (1.0 - t) * tr).max(0.0), 0.0))
        .collect()
}

fn distance(a: &[CMatrix], b: &[CMatrix]) -> f64 {
    libm::sqrt(a.iter().zip(b).map(|(x, y)| { let n = frobenius(&(x - y)); n * n }).sum::<f64>())
}

const RELAXATION: f64 = 1.6;

pub(crate) fn solve(p: &CouplingProblem, opts: &SdpOptions) -> Result<SdpOutcome> {
    let red = reduce(p);
    let r = red.s.len();
    let kk = red.costs.len();
    let product: Vec<CMatrix> = red.masses.iter().map(|m| &red.smat * Complex64::new(*m, 0.0)).collect();
    let product_value: f64 = red.costs.iter().zip(&product).map(|(c, g)| trace_product(c, g)).sum();
    let cscale = red.costs.iter().map(frobenius).sum::<f64>() / kk as f64;
    let xscale = product.iter().map(frobenius).sum::<f64>() / kk as f64;
    let mut sigma = if cscale > 0.0 { xscale / cscale } else { 1.0 };
    let mut z = product.clone();
    let mut yp_prev = product.clone();
    let mut best: Option<(f64, Vec<CMatrix>)> = None;
    let mut best_dual = f64::NEG_INFINITY;
    let mut worst_eig = 0.0f64;
    let mut iterations = 0;
    let mut converged = false;
    for it in 1..=opts.max_iters {
        iterations = it;
        let sc = Complex64::new(sigma, 0.0);
        let shifted: Vec<CMatrix> = z.iter().zip(&red.costs).map(|(zk, ck)| zk - ck * sc).collect();
        let x = project_affine(&shifted, &red);
        let yp: Vec<CMatrix> = x.iter().zip(&z).map(|(xk, zk)| project_psd(&(xk * Complex64::new(2.0, 0.0) - zk)).0).collect();
        if it % opts.check_every == 0 || it == opts.max_iters {
            let rep = repair(&yp, &red);
            let pv: f64 = red.costs.iter().zip(&rep).map(|(c, g)| trace_product(c, g)).sum();
            if best.as_ref().is_none_or(|b| pv < b.0) {
                best = Some((pv, rep));
                worst_eig = x.iter().map(lambda_min).fold(0.0, f64::min);
            }
            let mut y = CMatrix::zeros(r, r);
            for ((ck, zk), xk) in red.costs.iter().zip(&z).zip(&x) {
                y += ck - (zk - xk) * Complex64::new(1.0 / sigma, 0.0);
            }
            let y = hermitian_part(&(y * Complex64::new(1.0 / kk as f64, 0.0)));
            best_dual = best_dual.max(dual_value(&red, &y));
            let b = best.as_ref().expect("set above");
            if b.0 - best_dual <= opts.gap_tol {
                converged = true;
            }
            let rp = distance(&x, &yp) / xscale;
            let rd = distance(&yp, &yp_prev) / (sigma * cscale);
            let factor = if rp > 10.0 * rd { 0.5 } else if rd > 10.0 * rp { 2.0 } else { 1.0 };
            if factor != 1.0 && it % (opts.check_every * 2) == 0 {
                let f = Complex64::new(factor, 0.0);
                for (zk, xk) in z.iter_mut().zip(&x) {
                    *zk = xk + (&*zk - xk) * f;
                }
                sigma *= factor;
                yp_prev = yp;
                if converged {
                    break;
                }
                continue;
            }
        }
        let relax = Complex64::new(RELAXATION, 0.0);
        for ((zk, ypk), xk) in z.iter_mut().zip(&yp).zip(&x) {
            *zk += (ypk - xk) * relax;
        }
        yp_prev = yp;
        if converged {
            break;
        }
    }
    let (primal, rep) = best.expect("at least one check");
    let (primal, rep) = if product_value < primal { (product_value, product) } else { (primal, rep) };
    let h = planck(p.hbar);
    let gammas = rep.iter().map(|g| &red.u * g * red.u.adjoint() * Complex64::new(1.0 / h, 0.0)).collect();
    let coupling = SemiclassicalCoupling { hbar: p.hbar, cells: p.cells.clone(), masses: p.masses.clone(), gammas };
    Ok(SdpOutcome {
        primal,
        dual: best_dual.min(primal),
        gap: (primal - best_dual).max(0.0),
        converged,
        iterations,
        coupling,
        psd_violation: worst_eig,
        product_value,
    })
}
