//! Log-domain entropic transport with an ε-continuation schedule and a
//! certified bracket on the unregularized optimum.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{bail, Result};

/// Bracket `[lower, upper]` on `min Σ c_ij π_ij` from an entropic solve.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropicSolution {
    /// Dual value of the c-transformed potentials (a valid lower bound).
    pub lower: f64,
    /// Cost of the rounded, exactly feasible plan (a valid upper bound).
    pub upper: f64,
    /// Debiased Sinkhorn divergence at the final ε.
    pub divergence: f64,
    /// Rounded plan as `(i, j, mass)` entries above `1e-15`.
    pub plan: Vec<(usize, usize, f64)>,
    pub epsilon: f64,
}

fn logsumexp(it: impl Iterator<Item = f64> + Clone) -> f64 {
    let mx = it.clone().fold(f64::NEG_INFINITY, f64::max);
    if mx == f64::NEG_INFINITY {
        return mx;
    }
    mx + libm::log(it.map(|x| libm::exp(x - mx)).sum::<f64>())
}

struct Potentials {
    f: Vec<f64>,
    g: Vec<f64>,
}

fn sinkhorn(a: &[f64], b: &[f64], cost: &[f64], eps_sched: &[f64], iters: usize, tol: f64) -> Potentials {
    let (n, m) = (a.len(), b.len());
    let la: Vec<f64> = a.iter().map(|x| if *x > 0.0 { libm::log(*x) } else { f64::NEG_INFINITY }).collect();
    let lb: Vec<f64> = b.iter().map(|x| if *x > 0.0 { libm::log(*x) } else { f64::NEG_INFINITY }).collect();
    let mut f = vec![0.0; n];
    let mut g = vec![0.0; m];
    for (stage, &eps) in eps_sched.iter().enumerate() {
        // Warm-start stages only need a rough fit.
        let stage_tol = if stage + 1 == eps_sched.len() { tol } else { tol.max(1e-5) };
        for it in 0..iters {
            for i in 0..n {
                let row = &cost[i * m..(i + 1) * m];
                f[i] = -eps * logsumexp((0..m).map(|j| (g[j] - row[j]) / eps + lb[j]));
            }
            for j in 0..m {
                g[j] = -eps * logsumexp((0..n).map(|i| (f[i] - cost[i * m + j]) / eps + la[i]));
            }
            if it % 10 != 9 {
                continue;
            }
            let mut err = 0.0;
            // Row marginal error after the column update.
            for i in 0..n {
                let row = &cost[i * m..(i + 1) * m];
                let s: f64 = (0..m).map(|j| libm::exp((f[i] + g[j] - row[j]) / eps + lb[j])).sum();
                err += libm::fabs(a[i] * s - a[i]);
            }
            if err < stage_tol {
                break;
            }
        }
    }
    Potentials { f, g }
}

fn entropic_value(a: &[f64], b: &[f64], p: &Potentials) -> f64 {
    a.iter().zip(&p.f).map(|(x, y)| x * y).sum::<f64>() + b.iter().zip(&p.g).map(|(x, y)| x * y).sum::<f64>()
}

/// Entropic solve with ε decreasing geometrically from `1e-1` to `1e-3`
/// times the median cost. `cost_aa` and `cost_bb` are the self-cost matrices
/// used for the debiasing terms.
pub fn solve(a: &[f64], b: &[f64], cost: &[f64], cost_aa: &[f64], cost_bb: &[f64], max_iters: usize) -> Result<EntropicSolution> {
    let (n, m) = (a.len(), b.len());
    if cost.len() != n * m || cost_aa.len() != n * n || cost_bb.len() != m * m || n == 0 || m == 0 {
        bail!(InvalidInput, "entropic problem needs an n x m cost");
    }
    let mut sorted: Vec<f64> = cost.to_vec();
    sorted.sort_by(f64::total_cmp);
    let med = sorted[sorted.len() / 2].max(f64::MIN_POSITIVE);
    let sched: Vec<f64> = (0..=8).map(|k| med * libm::pow(10.0, -1.0 - 2.0 * k as f64 / 8.0)).collect();
    let eps = *sched.last().expect("schedule");
    let p = sinkhorn(a, b, cost, &sched, max_iters, 1e-10);

    // Plan, then rounding onto the exact marginals.
    let mut plan = vec![0.0; n * m];
    for i in 0..n {
        for j in 0..m {
            if a[i] > 0.0 && b[j] > 0.0 {
                plan[i * m + j] = libm::exp((p.f[i] + p.g[j] - cost[i * m + j]) / eps) * a[i] * b[j];
            }
        }
    }
    round_to_marginals(&mut plan, a, b);
    let upper: f64 = plan.iter().zip(cost).map(|(x, c)| x * c).sum();
    // c-transform of g gives a dual-feasible pair.
    let fc: Vec<f64> = (0..n).map(|i| (0..m).map(|j| cost[i * m + j] - p.g[j]).fold(f64::INFINITY, f64::min)).collect();
    let lower = a.iter().zip(&fc).map(|(x, y)| x * y).sum::<f64>() + b.iter().zip(&p.g).map(|(x, y)| x * y).sum::<f64>();

    let ot_ab = entropic_value(a, b, &p);
    let ot_aa = entropic_value(a, a, &sinkhorn(a, a, cost_aa, &sched, max_iters, 1e-10));
    let ot_bb = entropic_value(b, b, &sinkhorn(b, b, cost_bb, &sched, max_iters, 1e-10));
    let divergence = ot_ab - 0.5 * ot_aa - 0.5 * ot_bb;
    let entries = (0..n * m).filter(|t| plan[*t] > 1e-15).map(|t| (t / m, t % m, plan[t])).collect();
    Ok(EntropicSolution { lower: lower.min(upper), upper, divergence, plan: entries, epsilon: eps })
}

/// Rounds a nonnegative matrix onto prescribed marginals (Altschuler et al.).
fn round_to_marginals(plan: &mut [f64], a: &[f64], b: &[f64]) {
    let (n, m) = (a.len(), b.len());
    for i in 0..n {
        let s: f64 = plan[i * m..(i + 1) * m].iter().sum();
        if s > a[i] {
            let r = a[i] / s;
            plan[i * m..(i + 1) * m].iter_mut().for_each(|x| *x *= r);
        }
    }
    for j in 0..m {
        let s: f64 = (0..n).map(|i| plan[i * m + j]).sum();
        if s > b[j] {
            let r = b[j] / s;
            (0..n).for_each(|i| plan[i * m + j] *= r);
        }
    }
    let ea: Vec<f64> = (0..n).map(|i| a[i] - plan[i * m..(i + 1) * m].iter().sum::<f64>()).collect();
    let eb: Vec<f64> = (0..m).map(|j| b[j] - (0..n).map(|i| plan[i * m + j]).sum::<f64>()).collect();
    let tot: f64 = ea.iter().sum();
    if tot > 0.0 {
        for i in 0..n {
            for j in 0..m {
                plan[i * m + j] += ea[i].max(0.0) * eb[j].max(0.0) / tot;
            }
        }
    }
}
