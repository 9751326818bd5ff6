//! Transportation simplex on the bipartite network, with a spanning-tree
//! basis, block pricing and a dual (potential) optimality certificate.
//!
//! Degeneracy is avoided by perturbing supplies (`a_i + δ`, last demand
//! `b_m + nδ`); once the basis is optimal the flows are recomputed from the
//! unperturbed masses on the same tree.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{bail, Result};

/// Optimal basic solution of a transportation problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactSolution {
    /// Basic cells `(i, j, flow)`.
    pub flows: Vec<(usize, usize, f64)>,
    pub primal: f64,
    pub dual: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// Most negative reduced cost `c_ij - u_i - v_j` over all cells.
    pub min_reduced_cost: f64,
    pub pivots: usize,
}

struct Tree {
    n: usize,
    adj: Vec<Vec<(usize, usize)>>, // (neighbour node, arc id)
    arcs: Vec<(usize, usize, f64)>, // (source i, sink j, flow)
}

impl Tree {
    fn node_sink(&self, j: usize) -> usize {
        self.n + j
    }

    fn add(&mut self, i: usize, j: usize, flow: f64) -> usize {
        let id = self.arcs.len();
        self.arcs.push((i, j, flow));
        let s = self.node_sink(j);
        self.adj[i].push((s, id));
        self.adj[s].push((i, id));
        id
    }

    fn replace(&mut self, id: usize, i: usize, j: usize, flow: f64) {
        let (oi, oj, _) = self.arcs[id];
        let os = self.node_sink(oj);
        self.adj[oi].retain(|e| e.1 != id);
        self.adj[os].retain(|e| e.1 != id);
        self.arcs[id] = (i, j, flow);
        let s = self.node_sink(j);
        self.adj[i].push((s, id));
        self.adj[s].push((i, id));
    }

    /// BFS from node 0: parent node, parent arc, depth and potentials.
    fn orient(&self, cost: &[f64], m: usize, parent: &mut [usize], parc: &mut [usize], depth: &mut [usize], pot: &mut [f64]) {
        let total = self.adj.len();
        for p in parent.iter_mut() {
            *p = usize::MAX;
        }
        let mut q = VecDeque::with_capacity(total);
        parent[0] = 0;
        depth[0] = 0;
        pot[0] = 0.0;
        q.push_back(0);
        while let Some(a) = q.pop_front() {
            for &(b, id) in &self.adj[a] {
                if parent[b] != usize::MAX {
                    continue;
                }
                parent[b] = a;
                parc[b] = id;
                depth[b] = depth[a] + 1;
                let (i, j, _) = self.arcs[id];
                let c = cost[i * m + j];
                // u_i + v_j = c_ij; sinks store v_j at index n + j.
                pot[b] = c - pot[a];
                q.push_back(b);
            }
        }
    }
}

/// Solves `min Σ c_ij x_ij` subject to row sums `a` and column sums `b`
/// (`Σa = Σb`). `cost` is row-major `n × m`.
pub fn solve(a: &[f64], b: &[f64], cost: &[f64]) -> Result<ExactSolution> {
    let (n, m) = (a.len(), b.len());
    if n == 0 || m == 0 || cost.len() != n * m {
        bail!(InvalidInput, "transport problem needs nonempty masses and an n x m cost");
    }
    let (sa, sb): (f64, f64) = (a.iter().sum(), b.iter().sum());
    if (sa - sb).abs() > 1e-9 * sa.max(sb) {
        bail!(InvalidInput, "mass mismatch {sa} vs {sb}");
    }
    let scale = cost.iter().fold(0.0f64, |s, c| s.max(c.abs())).max(f64::MIN_POSITIVE);
    let min_mass = a.iter().chain(b).copied().filter(|x| *x > 0.0).fold(f64::INFINITY, f64::min);
    let delta = (1e-9 * min_mass).min(1e-12) / (n + 1) as f64;
    let mut ap: Vec<f64> = a.iter().map(|x| x + delta).collect();
    let mut bp = b.to_vec();
    bp[m - 1] += n as f64 * delta;
    // Rescale so both sides sum to the same value exactly enough.
    let fix = ap.iter().sum::<f64>() - bp.iter().sum::<f64>();
    bp[m - 1] += fix;

    // North-west corner start on the given order.
    let mut tree = Tree { n, adj: vec![Vec::new(); n + m], arcs: Vec::with_capacity(n + m - 1) };
    let (mut i, mut j) = (0, 0);
    let (mut ra, mut rb) = (ap[0], bp[0]);
    loop {
        let f = ra.min(rb);
        tree.add(i, j, f);
        if i == n - 1 && j == m - 1 {
            break;
        }
        if (ra <= rb && i < n - 1) || j == m - 1 {
            rb -= f;
            i += 1;
            ra = ap[i];
        } else {
            ra -= f;
            j += 1;
            rb = bp[j];
        }
    }
    if tree.arcs.len() != n + m - 1 {
        bail!(Invariant, "initial basis has {} arcs, expected {}", tree.arcs.len(), n + m - 1);
    }

    let total = n + m;
    let mut parent = vec![0; total];
    let mut parc = vec![0; total];
    let mut depth = vec![0; total];
    let mut pot = vec![0.0; total];
    let tol = 1e-13 * scale;
    let block = libm::ceil(libm::sqrt((n * m) as f64)) as usize + 1;
    let mut cursor = 0usize;
    let mut pivots = 0usize;
    let max_pivots = 50 * (n * m).max(1000);
    loop {
        tree.orient(cost, m, &mut parent, &mut parc, &mut depth, &mut pot);
        // Block pricing: first block containing a negative reduced cost.
        let mut best = (0.0, usize::MAX);
        let mut scanned = 0;
        while scanned < n * m {
            let end = (scanned + block).min(n * m);
            for _ in scanned..end {
                let idx = cursor;
                cursor = (cursor + 1) % (n * m);
                let (ci, cj) = (idx / m, idx % m);
                let r = cost[idx] - pot[ci] - pot[n + cj];
                if r < best.0 {
                    best = (r, idx);
                }
            }
            scanned = end;
            if best.0 < -tol {
                break;
            }
        }
        if best.0 >= -tol {
            break;
        }
        pivots += 1;
        if pivots > max_pivots {
            bail!(NoConvergence, "transportation simplex exceeded {max_pivots} pivots");
        }
        let (ei, ej) = (best.1 / m, best.1 % m);
        // Cycle: entering arc (+), then the tree path from sink ej to source ei
        // with alternating signs starting with (-).
        let (mut x, mut y) = (n + ej, ei);
        let mut from_x = Vec::new();
        let mut from_y = Vec::new();
        while depth[x] > depth[y] {
            from_x.push(parc[x]);
            x = parent[x];
        }
        while depth[y] > depth[x] {
            from_y.push(parc[y]);
            y = parent[y];
        }
        while x != y {
            from_x.push(parc[x]);
            from_y.push(parc[y]);
            x = parent[x];
            y = parent[y];
        }
        from_y.reverse();
        let path: Vec<usize> = from_x.into_iter().chain(from_y).collect();
        let mut theta = f64::INFINITY;
        let mut leave = usize::MAX;
        for (k, &id) in path.iter().enumerate() {
            if k % 2 == 0 && tree.arcs[id].2 < theta {
                theta = tree.arcs[id].2;
                leave = id;
            }
        }
        for (k, &id) in path.iter().enumerate() {
            if k % 2 == 0 {
                tree.arcs[id].2 -= theta;
            } else {
                tree.arcs[id].2 += theta;
            }
        }
        tree.replace(leave, ei, ej, theta);
    }

    // Flows from the unperturbed masses on the optimal tree (leaf peeling).
    let flows = tree_flows(&tree, a, b)?;
    tree.orient(cost, m, &mut parent, &mut parc, &mut depth, &mut pot);
    let u: Vec<f64> = pot[..n].to_vec();
    let v: Vec<f64> = pot[n..].to_vec();
    let mut min_rc = f64::INFINITY;
    for i in 0..n {
        for j in 0..m {
            min_rc = min_rc.min(cost[i * m + j] - u[i] - v[j]);
        }
    }
    let primal = flows.iter().map(|(i, j, f)| f * cost[i * m + j]).sum();
    // Weak duality with the reduced-cost deficit charged to the dual.
    let dual = a.iter().zip(&u).map(|(x, y)| x * y).sum::<f64>() + b.iter().zip(&v).map(|(x, y)| x * y).sum::<f64>() + min_rc.min(0.0) * sa;
    ap.clear();
    Ok(ExactSolution { flows, primal, dual, u, v, min_reduced_cost: min_rc, pivots })
}

fn tree_flows(tree: &Tree, a: &[f64], b: &[f64]) -> Result<Vec<(usize, usize, f64)>> {
    let n = a.len();
    let total = tree.adj.len();
    let mut rem: Vec<f64> = a.iter().chain(b).copied().collect();
    let mut deg: Vec<usize> = tree.adj.iter().map(|e| e.len()).collect();
    let mut used = vec![false; tree.arcs.len()];
    let mut flow = vec![0.0; tree.arcs.len()];
    let mut stack: Vec<usize> = (0..total).filter(|&k| deg[k] == 1).collect();
    while let Some(node) = stack.pop() {
        if deg[node] != 1 {
            continue;
        }
        let &(other, id) = tree.adj[node].iter().find(|e| !used[e.1]).expect("leaf has one free arc");
        used[id] = true;
        let f = rem[node];
        flow[id] = f;
        rem[other] -= f;
        deg[node] = 0;
        deg[other] -= 1;
        if deg[other] == 1 {
            stack.push(other);
        }
    }
    let scale = a.iter().fold(0.0f64, |s, x| s.max(*x));
    let mut out = Vec::with_capacity(flow.len());
    for (id, &(i, j, _)) in tree.arcs.iter().enumerate() {
        let f = flow[id];
        if f < -1e-12 * scale.max(1.0) {
            bail!(Invariant, "optimal basis infeasible for unperturbed masses (flow {f})");
        }
        let _ = n;
        out.push((i, j, f.max(0.0)));
    }
    Ok(out)
}
