mod common;

use common::*;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use sctl_core::certify::Status;
use sctl_core::linalg::{eigh, CMatrix};
use sctl_core::transforms::toeplitz_quantize;
use sctl_core::transport::*;
use sctl_core::{Axis, Complex64, MixedState, PhaseField, PhaseGrid};

fn exact() -> W2Options {
    W2Options::default()
}

fn measure(dim: usize, pts: &[f64], m: &[f64]) -> DiscreteMeasure {
    DiscreteMeasure::new(dim, pts.to_vec(), m.to_vec()).unwrap()
}

#[test]
fn identical_measures_have_zero_distance_and_diagonal_plan() {
    let mu = measure(2, &[0.0, 0.0, 1.0, 0.5, -0.3, 2.0], &[0.2, 0.5, 0.3]);
    let r = w2(&mu, &mu, &exact()).unwrap();
    assert!(r.value.abs() < 1e-12);
    for &(i, j, m) in &r.plan.entries {
        assert!(i == j || m < 1e-15);
    }
    assert!(r.plan.marginal_error() < 1e-9);
}

#[test]
fn two_diracs_are_their_separation_apart() {
    let a = DiscreteMeasure::dirac(&[0.5, -1.0]).unwrap();
    let b = DiscreteMeasure::dirac(&[-1.0, 1.0]).unwrap();
    let r = w2(&a, &b, &exact()).unwrap();
    assert!((r.value - 2.5).abs() < 1e-12);
    assert_eq!(r.plan.entries.len(), 1);
    assert!((r.plan.entries[0].2 - 1.0).abs() < 1e-15);
}

#[test]
fn grid_translate_moves_by_the_shift() {
    let pts: Vec<f64> = (0..6).flat_map(|i| [i as f64 * 0.25, (i % 3) as f64 * 0.5]).collect();
    let mu = measure(2, &pts, &[0.1, 0.2, 0.15, 0.25, 0.2, 0.1]);
    let nu = mu.translated(&[0.25, 0.5]);
    let r = w2(&mu, &nu, &exact()).unwrap();
    assert!((r.value - (0.25f64.powi(2) + 0.25).sqrt()).abs() < 1e-12);
    assert!(r.plan.marginal_error() < 1e-9);
    assert!((r.plan.recomputed_cost() - r.plan.cost).abs() < 1e-12);
}

#[test]
fn mass_mismatch_is_rejected() {
    assert!(DiscreteMeasure::new(1, vec![0.0, 1.0], vec![0.5, 0.6]).is_err());
    let a = DiscreteMeasure::dirac(&[0.0]).unwrap();
    let b = DiscreteMeasure::dirac(&[0.0, 1.0]).unwrap();
    assert!(w2(&a, &b, &exact()).is_err());
}

#[test]
fn entropic_bracket_contains_exact_value() {
    let mut r = rng(21);
    let n = 60;
    let pa: Vec<f64> = (0..2 * n).map(|_| r.random_range(-1.0..1.0)).collect();
    let pb: Vec<f64> = (0..2 * n).map(|_| r.random_range(-0.5..1.5)).collect();
    let ma: Vec<f64> = (0..n).map(|_| r.random_range(0.1..1.0)).collect();
    let mb: Vec<f64> = (0..n).map(|_| r.random_range(0.1..1.0)).collect();
    let (sa, sb) = (ma.iter().sum::<f64>(), mb.iter().sum::<f64>());
    let mu = measure(2, &pa, &ma.iter().map(|m| m / sa).collect::<Vec<_>>());
    let nu = measure(2, &pb, &mb.iter().map(|m| m / sb).collect::<Vec<_>>());
    let e = w2(&mu, &nu, &exact()).unwrap();
    let opts = W2Options { exact_cap: 10, tolerance: 5e-2, max_iters: 2000, ..W2Options::default() };
    let s = w2(&mu, &nu, &opts).unwrap();
    assert_eq!(s.method, W2Method::Entropic);
    assert!(s.lower <= e.value + 1e-9 && e.value <= s.upper + 1e-9, "{} not in [{}, {}]", e.value, s.lower, s.upper);
    assert!(s.upper - s.lower < 1e-2 * e.value);
}

#[test]
fn binning_bracket_contains_full_resolution_distance() {
    let g = PhaseGrid::new_1d(16, 2.0, 16, 2.0).unwrap();
    let f = gaussian_mixture(g, &[(1.0, -0.5, 0.3)], 0.4);
    let h = gaussian_mixture(g, &[(1.0, 0.6, -0.2), (0.5, 0.0, 0.8)], 0.35);
    let full = w2_fields(&f, &h, 256, &exact()).unwrap();
    assert!(full.upper - full.lower < 1e-7);
    let coarse = w2_fields(&f, &h, 16, &exact()).unwrap();
    assert!(coarse.lower <= full.binned + 1e-12 && full.binned <= coarse.upper + 1e-12);
    let b = bin_field(&f, 16).unwrap();
    assert!(b.measure.len() <= 16);
    assert!(b.factor > 1);
}

#[test]
fn lower_bound_floor_on_husimi_input() {
    let hbar: f64 = 0.1;
    let g = PhaseGrid::semiclassical(64, 2.5, 64, hbar).unwrap();
    let op = MixedState::coherent(hbar, *g.x(), 0.2, -0.3).unwrap();
    let (hus, _) = husimi_on_grid(&op, &g).unwrap();
    let lo = wh_lower(&hus, &op, 1024, &exact()).unwrap();
    assert!((lo.value - hbar.sqrt()).abs() < 1e-12);
    assert!(!lo.smoothed_input);
}

#[test]
fn lower_bound_arithmetic_in_three_dimensions() {
    let hbar: f64 = 0.04;
    let shift = 2.0 * hbar.sqrt();
    let mu = measure(6, &[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.5, 0.0, 0.0, 0.0], &[0.5, 0.5]);
    let nu = mu.translated(&[shift, 0.0, 0.0, 0.0, 0.0, 0.0]);
    let w = w2(&mu, &nu, &exact()).unwrap().value;
    assert!((w - shift).abs() < 1e-12);
    assert!((lower_from_w2(w, 3, hbar) - (3.0 * hbar).sqrt()).abs() < 1e-12);
    assert!((lower_from_w2(3.0 * hbar.sqrt(), 3, hbar) - (6.0 * hbar).sqrt()).abs() < 1e-12);
}

#[test]
fn separated_pair_lower_bound_is_the_separation() {
    let hbar: f64 = 0.01;
    let g = PhaseGrid::new_1d(128, 2.5, 16, 0.8).unwrap();
    let op = MixedState::coherent(hbar, *g.x(), -1.5, 0.0).unwrap();
    let f = dirac_cell(g, 1.5, 0.0);
    let lo = wh_lower(&f, &op, 1024, &exact()).unwrap();
    assert!((lo.value - 3.0).abs() < 0.05 * 3.0, "lower {}", lo.value);
    let wide = PhaseGrid::new_1d(64, 4.0, 64, 4.0).unwrap();
    let op = MixedState::coherent(hbar, *wide.x(), -2.0, 0.0).unwrap();
    assert!(matches!(wh_lower(&dirac_cell(wide, 2.0, 0.0), &op, 1024, &exact()), Err(sctl_core::Error::Aliasing(_))));
}

#[test]
fn signed_classical_input_is_smoothed_for_the_lower_bound() {
    let hbar: f64 = 0.1;
    let g = PhaseGrid::semiclassical(64, 2.5, 64, hbar).unwrap();
    let op = MixedState::coherent(hbar, *g.x(), 0.0, 0.0).unwrap();
    let mut vals = gaussian_mixture(g, &[(1.0, 0.0, 0.0)], 0.4).values().to_vec();
    vals[0] = -1e-9;
    let f = PhaseField::new(g, vals).unwrap();
    let lo = wh_lower(&f, &op, 1024, &exact()).unwrap();
    assert!(lo.smoothed_input);
    assert!(wh_upper_toeplitz(&f, &op, None, 1024, &exact()).is_err());
}

#[test]
fn upper_bound_of_own_toeplitz_state_is_the_floor() {
    let hbar: f64 = 0.1;
    let g = PhaseGrid::semiclassical(64, 2.5, 32, hbar).unwrap();
    let f = gaussian_mixture(g, &[(1.0, 0.3, 0.0)], 0.4);
    let op = toeplitz_quantize(&f, hbar).unwrap();
    let up = wh_upper_toeplitz(&f, &op, Some(&f), 2048, &exact()).unwrap();
    assert_eq!(up.method, UpperMethod::Symbol);
    assert!((up.value - hbar.sqrt()).abs() < 1e-9);
    let other = gaussian_mixture(g, &[(1.0, -0.3, 0.2)], 0.4);
    assert!(wh_upper_toeplitz(&f, &op, Some(&other), 2048, &exact()).is_err());
}

#[test]
fn toeplitz_upper_bound_sandwich_on_distinct_symbols() {
    let hbar: f64 = 0.1;
    let g = PhaseGrid::new_1d(16, 2.0, 16, 1.2).unwrap();
    let f = gaussian_mixture(g, &[(1.0, -0.4, 0.3)], 0.45);
    let sym = gaussian_mixture(g, &[(1.0, 0.5, -0.2)], 0.4);
    let op = toeplitz_quantize(&sym, hbar).unwrap();
    let up = wh_upper_toeplitz(&f, &op, Some(&sym), 1024, &exact()).unwrap();
    // Independent W₂ between the cell measures.
    let pts = |p: &PhaseField| -> (Vec<f64>, Vec<f64>) {
        let mut z = Vec::new();
        let mut m = Vec::new();
        for i in 0..16 {
            for k in 0..16 {
                z.extend([g.x().point(i), g.v().point(k)]);
                m.push(p.at(i, k) * g.cell_volume());
            }
        }
        (z, m)
    };
    let (za, ma) = pts(&f);
    let (zb, mb) = pts(&sym);
    let w = w2(&measure(2, &za, &ma), &measure(2, &zb, &mb), &exact()).unwrap().value;
    assert!((up.value - (w + hbar.sqrt())).abs() < 1e-9);
    let lo = wh_lower(&f, &op, 1024, &exact()).unwrap();
    assert!(lo.value <= up.value);
}

#[test]
fn coherent_versus_dirac_cell_upper_bound() {
    let hbar: f64 = 0.1;
    let g = PhaseGrid::new_1d(32, 2.0, 32, 2.0).unwrap();
    let (z0, z1) = ((g.x().point(10), g.v().point(20)), (g.x().point(22), g.v().point(12)));
    let sym = dirac_cell(g, z0.0, z0.1);
    let op = toeplitz_quantize(&sym, hbar).unwrap();
    let coh = MixedState::coherent(hbar, *g.x(), z0.0, z0.1).unwrap();
    assert!(op.kernel().scaled_hs_distance(&coh.kernel()).unwrap() < 1e-10);
    let f = dirac_cell(g, z1.0, z1.1);
    let up = wh_upper_toeplitz(&f, &op, Some(&sym), 1024, &exact()).unwrap();
    let d = ((z0.0 - z1.0).powi(2) + (z0.1 - z1.1).powi(2)).sqrt();
    assert!((up.value - (d + hbar.sqrt())).abs() < 1e-9);
}

#[test]
fn general_states_fall_back_to_a_certified_route() {
    let hbar: f64 = 0.1;
    let g = PhaseGrid::semiclassical(64, 2.5, 64, hbar).unwrap();
    let mut r = rng(5);
    let op = random_state(&mut r, hbar, *g.x(), 2, 0.8, 0.5);
    let f = gaussian_mixture(g, &[(1.0, 0.0, 0.0)], 0.5);
    let up = wh_upper_toeplitz(&f, &op, None, 1024, &exact()).unwrap();
    let lo = wh_lower(&f, &op, 1024, &exact()).unwrap();
    assert!(up.value >= lo.value);
    if up.method == UpperMethod::HusimiGradient {
        assert!(up.gradient_term.unwrap() > 0.0 && up.penalty > 0.0);
    }
    let sym = gaussian_mixture(g, &[(1.0, 0.2, 0.1)], 0.5);
    let op = toeplitz_quantize(&sym, hbar).unwrap();
    let up = wh_upper_toeplitz(&f, &op, None, 1024, &exact()).unwrap();
    assert_ne!(up.method, UpperMethod::Symbol);
    assert!(up.value >= wh_lower(&f, &op, 1024, &exact()).unwrap().value);
}

const DESK_HBAR: f64 = 0.1;

fn desk_grid() -> PhaseGrid {
    let x = (std::f64::consts::PI * DESK_HBAR * 16.0 / 2.0).sqrt();
    PhaseGrid::new_1d(16, x, 16, x).unwrap()
}

/// Toeplitz state of a random Gaussian bump against `k` random cells.
fn desk_instance(r: &mut ChaCha8Rng, k: usize) -> (PhaseField, MixedState, PhaseField) {
    let g = desk_grid();
    let s = r.random_range(0.25..0.4);
    let c = (r.random_range(-0.3..0.3), r.random_range(-0.3..0.3));
    let sym = gaussian_mixture(g, &[(1.0, c.0, c.1)], s);
    let op = toeplitz_quantize(&sym, DESK_HBAR).unwrap();
    let mut vals = vec![0.0; g.cells()];
    let mut placed = 0;
    while placed < k {
        let (i, j) = (r.random_range(5..12), r.random_range(5..12));
        let idx = i * g.nv() + j;
        if vals[idx] == 0.0 {
            vals[idx] = r.random_range(0.2..1.0);
            placed += 1;
        }
    }
    let tot: f64 = vals.iter().sum::<f64>() * g.cell_volume();
    let f = PhaseField::probability(g, vals.iter().map(|v| v / tot).collect()).unwrap();
    (f, op, sym)
}

#[test]
fn dirac_against_coherent_state_costs_hbar() {
    let g = desk_grid();
    let (x0, p0) = (g.x().point(8), g.v().point(8));
    let f = dirac_cell(g, x0, p0);
    let op = MixedState::coherent(DESK_HBAR, *g.x(), x0, p0).unwrap();
    let out = wh_exact_sdp(&f, &op, &SdpOptions::default()).unwrap();
    assert!(out.converged);
    assert!((out.value().powi(2) - DESK_HBAR).abs() < 1e-6, "value² {}", out.value().powi(2));
    let m = marginal_w2_check(&f, &op, &estimate(&f, &op, None, Some(&out))).unwrap();
    assert_eq!(m.status, Status::Pass);
    assert!((m.measured.powi(2) - DESK_HBAR / 2.0).abs() < 1e-3);
}

fn estimate(f: &PhaseField, op: &MixedState, sym: Option<&PhaseField>, out: Option<&SdpOutcome>) -> WhEstimate {
    let lo = wh_lower(f, op, 1024, &exact()).unwrap();
    let hi = match sym {
        Some(s) => wh_upper_toeplitz(f, op, Some(s), 1024, &exact()).unwrap(),
        None => {
            // Coherent states are the Toeplitz states of a single cell.
            let g = f.grid();
            let (i, k) = (0..g.cells()).map(|c| (c / g.nv(), c % g.nv())).max_by(|a, b| f.at(a.0, a.1).total_cmp(&f.at(b.0, b.1))).unwrap();
            let s = dirac_cell(*g, g.x().point(i), g.v().point(k));
            wh_upper_toeplitz(f, op, Some(&s), 1024, &exact()).unwrap()
        }
    };
    WhEstimate::new(op.hbar(), 1, &lo, &hi, out)
}

#[test]
fn desk_instances_are_sandwiched() {
    let mut r = rng(31);
    for k in [4, 9, 16] {
        let (f, op, sym) = desk_instance(&mut r, k);
        let out = wh_exact_sdp(&f, &op, &SdpOptions { gap_tol: 1e-6, ..SdpOptions::default() }).unwrap();
        assert!(out.converged && out.gap <= 1e-5);
        assert!(out.primal >= DESK_HBAR - 1e-8);
        let (tr, marg, psd) = out.coupling.invariant_errors(&op);
        assert!(tr < 1e-8 && marg < 1e-8 && psd > -1e-10, "{tr} {marg} {psd}");
        assert!(out.primal <= out.product_value + 1e-12);
        let est = estimate(&f, &op, Some(&sym), Some(&out));
        est.check(1e-5).unwrap();
        let m = marginal_w2_check(&f, &op, &est).unwrap();
        assert_eq!(m.status, Status::Pass);
        assert!(m.get("exact_margin").unwrap() >= -1e-9);
    }
}

#[test]
fn iteration_cap_returns_a_bracket() {
    let mut r = rng(32);
    let (f, op, _) = desk_instance(&mut r, 12);
    let out = wh_exact_sdp(&f, &op, &SdpOptions { max_iters: 20, check_every: 10, ..SdpOptions::default() }).unwrap();
    assert!(!out.converged);
    let (lo, hi) = out.bracket();
    assert!(lo <= hi);
    let full = wh_exact_sdp(&f, &op, &SdpOptions::default()).unwrap();
    assert!(lo <= full.value() + 1e-9 && full.value() <= hi + 1e-9);
}

#[test]
fn sdp_refuses_oversized_instances() {
    let hbar: f64 = 0.1;
    let g = PhaseGrid::semiclassical(64, 2.5, 64, hbar).unwrap();
    let f = dirac_cell(g, 0.0, 0.0);
    let op = MixedState::coherent(hbar, *g.x(), 0.0, 0.0).unwrap();
    assert!(matches!(wh_exact_sdp(&f, &op, &SdpOptions::default()), Err(sctl_core::Error::Resource(_))));
}

fn dft(n: usize) -> CMatrix {
    DMatrix::from_fn(n, n, |j, a| Complex64::from_polar(1.0 / (n as f64).sqrt(), -2.0 * std::f64::consts::PI * (j * a) as f64 / n as f64))
}

/// Minimizes a linear functional over `{G : 0 ⪯ G ⪯ diag(s), Tr G = m}` for
/// 2×2 `G` by zooming mesh scans over `(a, Re b, Im b)`.
fn mesh_scan(s: [f64; 2], m: f64, objective: impl Fn(&[[Complex64; 2]; 2]) -> f64) -> f64 {
    let feasible = |a: f64, b: Complex64| {
        let d = m - a;
        let psd = |p: f64, q: f64, bb: f64| p >= 0.0 && q >= 0.0 && p * q >= bb;
        psd(a, d, b.norm_sqr()) && psd(s[0] - a, s[1] - d, b.norm_sqr())
    };
    let mut centre = (m / 2.0, 0.0, 0.0);
    let mut half = (m.max(s[0]).max(s[1]), s[0].max(s[1]), s[0].max(s[1]));
    let mut best = f64::INFINITY;
    let n = 40;
    for _ in 0..24 {
        let mut arg = centre;
        for i in 0..=n {
            let a = centre.0 + half.0 * (2.0 * i as f64 / n as f64 - 1.0);
            for j in 0..=n {
                let br = centre.1 + half.1 * (2.0 * j as f64 / n as f64 - 1.0);
                for k in 0..=n {
                    let bi = centre.2 + half.2 * (2.0 * k as f64 / n as f64 - 1.0);
                    let b = Complex64::new(br, bi);
                    if !feasible(a, b) {
                        continue;
                    }
                    let g = [[Complex64::new(a, 0.0), b], [b.conj(), Complex64::new(m - a, 0.0)]];
                    let v = objective(&g);
                    if v < best {
                        best = v;
                        arg = (a, br, bi);
                    }
                }
            }
        }
        centre = arg;
        half = (half.0 * 0.5, half.1 * 0.5, half.2 * 0.5);
    }
    best
}

#[test]
fn two_cell_rank_two_instance_matches_mesh_scan() {
    let hbar = 0.3;
    let ax = Axis::new(4, 1.2).unwrap();
    let n = 4;
    let mut r = rng(41);
    let v1: Vec<Complex64> = (0..n).map(|_| Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))).collect();
    let v2: Vec<Complex64> = (0..n).map(|_| Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))).collect();
    let op = MixedState::normalized(hbar, ax, vec![0.65, 0.35], vec![v1, v2]).unwrap();
    let rho_hat = op.kernel().matrix() * Complex64::new(op.planck(), 0.0);
    let cells = vec![(ax.point(1), 0.4), (ax.point(3), -0.7)];
    let masses = vec![0.3, 0.7];
    let prob = CouplingProblem::new(hbar, ax, cells.clone(), masses.clone(), rho_hat.clone()).unwrap();
    // Independent cost matrices.
    let f = dft(n);
    let costs: Vec<CMatrix> = cells
        .iter()
        .map(|&(xk, pk)| {
            let x = CMatrix::from_fn(n, n, |a, b| if a == b { Complex64::new(ax.wrap(ax.point(a) - xk).powi(2), 0.0) } else { Complex64::new(0.0, 0.0) });
            let p = CMatrix::from_fn(n, n, |a, b| if a == b { Complex64::new((pk - hbar * ax.wavenumber(a)).powi(2), 0.0) } else { Complex64::new(0.0, 0.0) });
            x + f.adjoint() * p * &f
        })
        .collect();
    for (a, b) in costs.iter().zip(&prob.costs) {
        assert!((a - b).norm() < 1e-12);
    }
    // Γ_1 lives in the range of ρ̂: Γ_1 = U G U†, 0 ⪯ G ⪯ diag(s).
    let (lam, u) = eigh(&rho_hat);
    let idx: Vec<usize> = (0..n).filter(|&i| lam[i] > 1e-12).collect();
    assert_eq!(idx.len(), 2);
    let ur = CMatrix::from_fn(n, 2, |a, j| u[(a, idx[j])]);
    let s = [lam[idx[0]], lam[idx[1]]];
    let c1 = ur.adjoint() * &costs[0] * &ur;
    let c2 = ur.adjoint() * &costs[1] * &ur;
    let base: f64 = (0..2).map(|i| c2[(i, i)].re * s[i]).sum();
    let obj = |g: &[[Complex64; 2]; 2]| {
        let mut v = base;
        for i in 0..2 {
            for j in 0..2 {
                v += ((c1[(j, i)] - c2[(j, i)]) * g[i][j]).re;
            }
        }
        v
    };
    let scan = mesh_scan(s, masses[0], obj);
    let out = prob.solve(&SdpOptions::default()).unwrap();
    assert!(out.converged);
    assert!((out.primal - scan).abs() < 1e-4, "sdp {} vs scan {scan}", out.primal);
    assert!(out.dual <= scan + 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn toeplitz_upper_bound_obeys_the_triangle_inequality(seed in any::<u64>()) {
        let hbar = 0.1;
        let g = PhaseGrid::new_1d(8, 1.6, 8, 1.6).unwrap();
        let mut r = rng(seed);
        let f = random_mixture(&mut r, g, 2, 0.8, 0.8, 0.4);
        let mid = random_mixture(&mut r, g, 2, 0.8, 0.8, 0.4);
        let sym = random_mixture(&mut r, g, 2, 0.8, 0.8, 0.4);
        let op = toeplitz_quantize(&sym, hbar).unwrap();
        let direct = wh_upper_toeplitz(&f, &op, Some(&sym), 64, &exact()).unwrap().value;
        let via = w2_fields(&f, &mid, 64, &exact()).unwrap().upper + wh_upper_toeplitz(&mid, &op, Some(&sym), 64, &exact()).unwrap().value;
        prop_assert!(direct <= via + 1e-9);
    }

    #[test]
    fn plans_satisfy_marginal_and_cost_invariants(seed in any::<u64>(), n in 1usize..12, m in 1usize..12) {
        let mut r = rng(seed);
        let mk = |r: &mut ChaCha8Rng, k: usize| {
            let w: Vec<f64> = (0..k).map(|_| r.random_range(0.05..1.0)).collect();
            let s: f64 = w.iter().sum();
            let p: Vec<f64> = (0..3 * k).map(|_| r.random_range(-2.0..2.0)).collect();
            measure(3, &p, &w.iter().map(|x| x / s).collect::<Vec<_>>())
        };
        let (a, b) = (mk(&mut r, n), mk(&mut r, m));
        let res = w2(&a, &b, &exact()).unwrap();
        prop_assert!(res.plan.marginal_error() < 1e-9);
        prop_assert!((res.plan.recomputed_cost() - res.plan.cost).abs() < 1e-12);
        prop_assert!(res.gap < 1e-10);
        prop_assert!(res.plan.entries.iter().all(|e| e.2 >= 0.0));
    }
}
