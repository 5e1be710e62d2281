//! Transition moments between eigenstates and Thomas–Reiche–Kuhn sum rules.
//!
//! All states are sampled on one composite Gauss–Legendre node set laid over
//! every chunk of the layout, so each moment matrix is a single weighted Gram
//! product. The node set doubles until successive tables agree.

use std::io::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layout::chunk_point;
use crate::quadrature::{panels_for, GaussLegendre};
use crate::wavefunctions::EigenState;

/// Moments with magnitude below this are stored as exact zeros.
pub const SNAP: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Component {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadOptions {
    /// Gauss–Legendre points per panel (at least 16).
    pub order: usize,
    /// Minimum nodes per wavelength of the fastest state.
    pub nodes_per_wave: f64,
    /// Largest absolute change accepted between successive refinements.
    pub tol: f64,
    pub max_refinements: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions { order: 16, nodes_per_wave: 10.0, tol: 1e-10, max_refinements: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionTable {
    pub energies: Vec<f64>,
    /// `(E_n − E_0)/E_10`.
    pub e: Vec<f64>,
    /// `x_nm` and `y_nm` in graph units.
    pub x: Vec<Vec<f64>>,
    pub y: Vec<Vec<f64>>,
    /// `⟨ψ_n|ψ_m⟩`.
    pub overlap: Vec<Vec<f64>>,
    /// `1/√(2E_10)`.
    pub x01_max: f64,
    pub xi_x: Vec<Vec<f64>>,
    pub xi_y: Vec<Vec<f64>>,
    /// Quadrature nodes used for the accepted table.
    pub nodes: usize,
}

struct Nodes {
    w: Vec<f64>,
    x: Vec<f64>,
    y: Vec<f64>,
    // per node: (piece, s)
    at: Vec<(usize, f64)>,
}

fn node_set(states: &[EigenState], opts: &QuadOptions, refine: usize) -> Nodes {
    let layout = states[0].layout();
    let k_max = states.iter().map(|s| s.k).fold(1.0, f64::max);
    let gl = GaussLegendre::new(opts.order.max(16));
    let mut n = Nodes { w: vec![], x: vec![], y: vec![], at: vec![] };
    for (p, piece) in layout.pieces.iter().enumerate() {
        for c in &piece.chunks {
            let panels = panels_for(c.s1 - c.s0, k_max, gl.order(), opts.nodes_per_wave) << refine;
            let (ss, ws) = gl.composite(c.s0, c.s1, panels);
            for (s, w) in ss.into_iter().zip(ws) {
                let [x, y] = chunk_point(c, s);
                n.w.push(w);
                n.x.push(x);
                n.y.push(y);
                n.at.push((p, s));
            }
        }
    }
    n
}

struct Raw {
    x: DMatrix<f64>,
    y: DMatrix<f64>,
    overlap: DMatrix<f64>,
    nodes: usize,
}

fn raw_moments(states: &[EigenState], opts: &QuadOptions, refine: usize) -> Raw {
    let nodes = node_set(states, opts, refine);
    let psi = DMatrix::from_fn(nodes.w.len(), states.len(), |i, n| {
        let (p, s) = nodes.at[i];
        states[n].value(p, s)
    });
    let gram = |f: &dyn Fn(usize) -> f64| {
        let weighted = DMatrix::from_fn(psi.nrows(), psi.ncols(), |i, n| f(i) * psi[(i, n)]);
        psi.transpose() * weighted
    };
    Raw {
        x: gram(&|i| nodes.w[i] * nodes.x[i]),
        y: gram(&|i| nodes.w[i] * nodes.y[i]),
        overlap: gram(&|i| nodes.w[i]),
        nodes: nodes.w.len(),
    }
}

fn max_diff(a: &Raw, b: &Raw) -> f64 {
    [(&a.x, &b.x), (&a.y, &b.y), (&a.overlap, &b.overlap)]
        .iter()
        .map(|(p, q)| (*p - *q).abs().max())
        .fold(0.0, f64::max)
}

fn converged(states: &[EigenState], opts: &QuadOptions) -> Result<Raw> {
    let mut prev = raw_moments(states, opts, 0);
    let mut diff = f64::INFINITY;
    for r in 1..=opts.max_refinements {
        let next = raw_moments(states, opts, r);
        diff = max_diff(&prev, &next);
        if diff <= opts.tol {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::Quadrature(format!(
        "moments still changed by {diff:e} after {} refinements",
        opts.max_refinements
    )))
}

fn to_rows(m: &DMatrix<f64>, scale: f64) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| {
                    // symmetrize; real states give a symmetric matrix up to rounding
                    let v = 0.5 * (m[(i, j)] + m[(j, i)]) * scale;
                    if v.abs() < SNAP {
                        0.0
                    } else {
                        v
                    }
                })
                .collect()
        })
        .collect()
}

/// `Σ_edges ∫ ψ_a ψ_b c(s) ds` for the lab coordinate `c` of `component`.
pub fn transition_moment(a: &EigenState, b: &EigenState, component: Component, opts: &QuadOptions) -> Result<f64> {
    let raw = converged(&[a.clone(), b.clone()], opts)?;
    Ok(match component {
        Component::X => raw.x[(0, 1)],
        Component::Y => raw.y[(0, 1)],
    })
}

/// Full moment table of `states`, which must share one layout and be ordered by energy.
pub fn build_table(states: &[EigenState], opts: &QuadOptions) -> Result<TransitionTable> {
    if states.len() < 2 {
        return Err(Error::InsufficientBasis { needed: 2, got: states.len() });
    }
    let raw = converged(states, opts)?;
    let energies: Vec<f64> = states.iter().map(|s| s.energy).collect();
    let e10 = energies[1] - energies[0];
    if !(e10 > 0.0) {
        return Err(Error::Degenerate { x: states[0].level.x, detail: "E_10 is not positive".into() });
    }
    let x01_max = 1.0 / (2.0 * e10).sqrt();
    let off_axis = !states[0].layout().is_planar_x();
    let zero = DMatrix::zeros(states.len(), states.len());
    let y = if off_axis { &raw.y } else { &zero };
    let mut e: Vec<f64> = energies.iter().map(|en| (en - energies[0]) / e10).collect();
    e[0] = 0.0;
    e[1] = 1.0;
    Ok(TransitionTable {
        x: to_rows(&raw.x, 1.0),
        y: to_rows(y, 1.0),
        overlap: to_rows(&raw.overlap, 1.0),
        xi_x: to_rows(&raw.x, 1.0 / x01_max),
        xi_y: to_rows(y, 1.0 / x01_max),
        e,
        energies,
        x01_max,
        nodes: raw.nodes,
    })
}

impl TransitionTable {
    pub fn len(&self) -> usize {
        self.e.len()
    }

    pub fn is_empty(&self) -> bool {
        self.e.is_empty()
    }

    /// Largest `|⟨ψ_n|ψ_m⟩ − δ_nm|`.
    pub fn orthonormality_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, row) in self.overlap.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                worst = worst.max((v - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
        worst
    }

    /// Copy restricted to the listed states (in the given order; ground first).
    pub fn restricted(&self, keep: &[usize]) -> TransitionTable {
        let pick = |m: &Vec<Vec<f64>>| keep.iter().map(|&i| keep.iter().map(|&j| m[i][j]).collect()).collect();
        TransitionTable {
            energies: keep.iter().map(|&i| self.energies[i]).collect(),
            e: keep.iter().map(|&i| self.e[i]).collect(),
            x: pick(&self.x),
            y: pick(&self.y),
            overlap: pick(&self.overlap),
            x01_max: self.x01_max,
            xi_x: pick(&self.xi_x),
            xi_y: pick(&self.xi_y),
            nodes: self.nodes,
        }
    }

    /// The same table in a frame whose x axis points along angle `theta`.
    pub fn in_frame(&self, theta: f64) -> TransitionTable {
        let (s, c) = theta.sin_cos();
        let mix = |a: &Vec<Vec<f64>>, b: &Vec<Vec<f64>>, p: f64, q: f64| -> Vec<Vec<f64>> {
            a.iter().zip(b).map(|(ra, rb)| ra.iter().zip(rb).map(|(u, v)| p * u + q * v).collect()).collect()
        };
        TransitionTable {
            x: mix(&self.x, &self.y, c, s),
            y: mix(&self.x, &self.y, -s, c),
            xi_x: mix(&self.xi_x, &self.xi_y, c, s),
            xi_y: mix(&self.xi_x, &self.xi_y, -s, c),
            ..self.clone()
        }
    }

    /// Writes `row,col,x_nm,y_nm,xi_x,xi_y` for every pair.
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "row,col,x_nm,y_nm,xi_x,xi_y")?;
        for i in 0..self.len() {
            for j in 0..self.len() {
                writeln!(
                    out,
                    "{i},{j},{:.16e},{:.16e},{:.16e},{:.16e}",
                    self.x[i][j], self.y[i][j], self.xi_x[i][j], self.xi_y[i][j]
                )?;
            }
        }
        Ok(())
    }
}

/// `|1 − Σ_{n<M} (e_n − e_p)|ξ_pn|²|`, the diagonal sum rule of row `p` truncated to `M` states.
///
/// `|ξ|²` includes both in-plane components, which makes the rule exact for bent
/// and curved graphs as well as straight wires.
pub fn sum_rule_residual(table: &TransitionTable, p: usize, m: usize) -> f64 {
    let m = m.min(table.len());
    let s: f64 = (0..m)
        .map(|n| (table.e[n] - table.e[p]) * (table.xi_x[p][n].powi(2) + table.xi_y[p][n].powi(2)))
        .sum();
    (1.0 - s).abs()
}

/// Residuals of row `p` for every truncation `M = 1..=len`.
pub fn sum_rule_curve(table: &TransitionTable, p: usize) -> Vec<f64> {
    (1..=table.len()).map(|m| sum_rule_residual(table, p, m)).collect()
}

/// Off-diagonal rule `Σ_n (e_n − (e_p + e_q)/2) ξ_pn·ξ_nq` compared with `δ_pq`.
pub fn sum_rule_deviation(table: &TransitionTable, p: usize, q: usize, m: usize) -> f64 {
    let m = m.min(table.len());
    let mid = 0.5 * (table.e[p] + table.e[q]);
    let s: f64 = (0..m)
        .map(|n| (table.e[n] - mid) * (table.xi_x[p][n] * table.xi_x[n][q] + table.xi_y[p][n] * table.xi_y[n][q]))
        .sum();
    (s - if p == q { 1.0 } else { 0.0 }).abs()
}
