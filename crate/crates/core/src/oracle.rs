//! Finite-difference reference solver for wires.
//!
//! The wire is cut at every delta and each piece gets a uniform mesh, so every
//! delta sits exactly on a node. The Hamiltonian `−½ψ″ + Vψ` becomes the
//! linear-element stiffness matrix with a lumped mass `w_j = (h_left + h_right)/2`;
//! a delta adds `g/L` to the stiffness of its node. Scaling by `w^{-1/2}` gives a
//! symmetric tridiagonal matrix whose lowest eigenvalues come from Sturm-sequence
//! bisection and whose eigenvectors come from inverse iteration. Moments are
//! weighted grid sums.

use crate::error::{Error, Result};
use crate::graph::{DeltaPosition, GraphSpec};
use crate::moments::TransitionTable;
use crate::report::{report_from_table, ResponseReport};

#[derive(Debug, Clone, PartialEq)]
pub struct GridProblem {
    pub n: usize,
    /// Lab x coordinate of every node.
    pub x: Vec<f64>,
    /// Lumped mass of every node.
    pub w: Vec<f64>,
    /// Point strength `g/L` at every node.
    pub v: Vec<f64>,
    /// Node index of every delta, in spec order.
    pub delta_nodes: Vec<usize>,
    diag: Vec<f64>,
    off: Vec<f64>,
}

// splits `n + 1` intervals over the pieces in proportion to their lengths, at least one each
fn interval_counts(pieces: &[f64], intervals: usize) -> Vec<usize> {
    let total: f64 = pieces.iter().sum();
    let exact: Vec<f64> = pieces.iter().map(|l| l / total * intervals as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| (e.floor() as usize).max(1)).collect();
    let mut order: Vec<usize> = (0..pieces.len()).collect();
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())));
    let mut k = 0;
    while counts.iter().sum::<usize>() < intervals {
        counts[order[k % order.len()]] += 1;
        k += 1;
    }
    while counts.iter().sum::<usize>() > intervals {
        let (i, _) = counts.iter().enumerate().max_by_key(|(_, c)| **c).expect("nonempty");
        counts[i] -= 1;
    }
    counts
}

impl GridProblem {
    pub fn new(spec: &GraphSpec, n: usize) -> Result<GridProblem> {
        if !spec.topology().is_wire() {
            return Err(Error::UnsupportedTopology { op: "finite-difference oracle", topology: spec.topology() });
        }
        if spec.edges().iter().any(|e| e.angle != 0.0) {
            return Err(Error::InvalidArgument("the finite-difference oracle needs a straight wire along +x".into()));
        }
        let total = spec.total_length();
        let positions: Vec<f64> = spec
            .deltas()
            .iter()
            .filter_map(|d| match d.position {
                DeltaPosition::Arc(p) => Some(p),
                DeltaPosition::Center => None,
            })
            .collect();
        let mut cuts: Vec<f64> = positions.clone();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        if n < cuts.len() + 1 || n < 3 {
            return Err(Error::InvalidArgument(format!("grid needs at least {} nodes, got {n}", (cuts.len() + 1).max(3))));
        }
        let mut bounds = vec![0.0];
        bounds.extend(&cuts);
        bounds.push(total);
        let pieces: Vec<f64> = bounds.windows(2).map(|b| b[1] - b[0]).collect();
        let counts = interval_counts(&pieces, n + 1);

        let mut nodes = vec![0.0];
        for (k, &m) in counts.iter().enumerate() {
            let h = pieces[k] / m as f64;
            nodes.extend((1..m).map(|i| bounds[k] + i as f64 * h));
            nodes.push(bounds[k + 1]);
        }
        let gaps: Vec<f64> = nodes.windows(2).map(|p| p[1] - p[0]).collect();
        let x = nodes[1..=n].to_vec();
        let w: Vec<f64> = (0..n).map(|j| 0.5 * (gaps[j] + gaps[j + 1])).collect();

        let node_of = |p: f64| x.iter().position(|xj| *xj == p).expect("every delta is a node");
        let delta_nodes: Vec<usize> = positions.iter().map(|&p| node_of(p)).collect();
        let mut v = vec![0.0; n];
        for (d, &j) in spec.deltas().iter().zip(&delta_nodes) {
            v[j] += d.g / total;
        }
        let diag = (0..n).map(|j| (0.5 / gaps[j] + 0.5 / gaps[j + 1] + v[j]) / w[j]).collect();
        let off = (0..n - 1).map(|j| -0.5 / gaps[j + 1] / (w[j] * w[j + 1]).sqrt()).collect();
        Ok(GridProblem { n, x, w, v, delta_nodes, diag, off })
    }

    /// Number of eigenvalues below `lambda`.
    pub fn count_below(&self, lambda: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for (j, dj) in self.diag.iter().enumerate() {
            q = dj - lambda - if j == 0 { 0.0 } else { self.off[j - 1].powi(2) / q };
            if q == 0.0 {
                q = -f64::EPSILON * (dj.abs() + lambda.abs()).max(1.0);
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// `i`-th smallest eigenvalue (0-based) by bisection to machine precision.
    pub fn eigenvalue(&self, i: usize) -> f64 {
        let radius = |j: usize| (if j > 0 { self.off[j - 1].abs() } else { 0.0 }) + self.off.get(j).map_or(0.0, |e| e.abs());
        let mut lo = (0..self.n).map(|j| self.diag[j] - radius(j)).fold(f64::INFINITY, f64::min);
        let mut hi = (0..self.n).map(|j| self.diag[j] + radius(j)).fold(f64::NEG_INFINITY, f64::max);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > i {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Eigenvector of `lambda` as nodal values, normalized so that `Σ w ψ² = 1`, first lobe positive.
    pub fn eigenvector(&self, lambda: f64) -> Vec<f64> {
        // a tiny shift keeps T − λ invertible
        let shift = lambda + 1e-10 * lambda.abs().max(1.0);
        let mut phi = vec![1.0; self.n];
        for _ in 0..4 {
            phi = thomas(&self.diag, &self.off, shift, &phi);
            let norm = phi.iter().map(|v| v * v).sum::<f64>().sqrt();
            phi.iter_mut().for_each(|v| *v /= norm);
        }
        let psi: Vec<f64> = phi.iter().zip(&self.w).map(|(p, w)| p / w.sqrt()).collect();
        let peak = psi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let sign = psi.iter().find(|v| v.abs() >= 1e-3 * peak).map_or(1.0, |v| v.signum());
        psi.iter().map(|v| v * sign).collect()
    }
}

// solves (T − λ)y = b for the symmetric tridiagonal T = (d, e)
fn thomas(d: &[f64], e: &[f64], lambda: f64, b: &[f64]) -> Vec<f64> {
    let n = d.len();
    let mut c = vec![0.0; n];
    let mut y = vec![0.0; n];
    let tiny = 1e-300;
    let mut den = d[0] - lambda;
    if den.abs() < tiny {
        den = tiny;
    }
    c[0] = e.first().copied().unwrap_or(0.0) / den;
    y[0] = b[0] / den;
    for i in 1..n {
        den = d[i] - lambda - e[i - 1] * c[i - 1];
        if den.abs() < tiny {
            den = tiny;
        }
        c[i] = e.get(i).copied().unwrap_or(0.0) / den;
        y[i] = (b[i] - e[i - 1] * y[i - 1]) / den;
    }
    for i in (0..n - 1).rev() {
        y[i] -= c[i] * y[i + 1];
    }
    y
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdSolution {
    pub grid: GridProblem,
    pub energies: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

/// Lowest `n_states` eigenpairs of the discretized wire.
pub fn fd_solve(spec: &GraphSpec, n: usize, n_states: usize) -> Result<FdSolution> {
    let grid = GridProblem::new(spec, n)?;
    if n_states == 0 || n_states > n {
        return Err(Error::InvalidArgument(format!("cannot extract {n_states} states from {n} nodes")));
    }
    let energies: Vec<f64> = (0..n_states).map(|i| grid.eigenvalue(i)).collect();
    let states = energies.iter().map(|&l| grid.eigenvector(l)).collect();
    Ok(FdSolution { grid, energies, states })
}

impl FdSolution {
    /// Transition table from grid sums (the wire is taken along the lab x axis).
    pub fn table(&self) -> Result<TransitionTable> {
        let m = self.energies.len();
        if m < 2 {
            return Err(Error::InsufficientBasis { needed: 2, got: m });
        }
        let mass = &self.grid.w;
        let dot = |a: &[f64], b: &[f64], w: &dyn Fn(usize) -> f64| a.iter().zip(b).enumerate().map(|(j, (p, q))| mass[j] * p * q * w(j)).sum::<f64>();
        let mut x = vec![vec![0.0; m]; m];
        let mut overlap = vec![vec![0.0; m]; m];
        for a in 0..m {
            for b in a..m {
                let xv = dot(&self.states[a], &self.states[b], &|j| self.grid.x[j]);
                let ov = dot(&self.states[a], &self.states[b], &|_| 1.0);
                x[a][b] = xv;
                x[b][a] = xv;
                overlap[a][b] = ov;
                overlap[b][a] = ov;
            }
        }
        let e10 = self.energies[1] - self.energies[0];
        let x01_max = 1.0 / (2.0 * e10).sqrt();
        let xi_x = x.iter().map(|r| r.iter().map(|v| v / x01_max).collect()).collect();
        Ok(TransitionTable {
            energies: self.energies.clone(),
            e: self.energies.iter().map(|en| (en - self.energies[0]) / e10).collect(),
            y: vec![vec![0.0; m]; m],
            xi_y: vec![vec![0.0; m]; m],
            x,
            overlap,
            x01_max,
            xi_x,
            nodes: self.grid.n,
        })
    }

    /// Largest `|ψ′(a⁺) − ψ′(a⁻) − 2cψ(a)|` over the delta nodes, relative to `max|ψ′|`.
    pub fn jump_residual(&self, state: usize, spec: &GraphSpec) -> f64 {
        let psi = &self.states[state];
        let g = &self.grid;
        let n = psi.len();
        let at = |j: isize| if j < 0 || j as usize >= n { 0.0 } else { psi[j as usize] };
        let pos = |j: isize| if j < 0 { 0.0 } else if j as usize >= n { spec.total_length() } else { g.x[j as usize] };
        let slope = |j: isize| (at(j) - at(j - 1)) / (pos(j) - pos(j - 1));
        let slope_max = (0..=n as isize).map(|j| slope(j).abs()).fold(0.0, f64::max);
        g.delta_nodes
            .iter()
            .map(|&j| {
                let j = j as isize;
                let jump = slope(j + 1) - slope(j);
                (jump - 2.0 * g.v[j as usize] * at(j)).abs() / slope_max
            })
            .fold(0.0, f64::max)
    }
}

/// Full response computed from grid data alone.
pub fn fd_response(spec: &GraphSpec, n: usize, n_states: usize) -> Result<ResponseReport> {
    let sol = fd_solve(spec, n, n_states)?;
    let bound = sol.energies.iter().filter(|e| **e < 0.0).count();
    report_from_table(spec, bound, &sol.table()?)
}
