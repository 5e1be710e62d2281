//! Normalized eigenstates assembled piece by piece on a graph layout.
//!
//! Positive-energy pieces are stored as `α sin ks + β cos ks`. Bound-state
//! pieces are stored through their end values, `φ(s) = A·R(l − s) + B·R(s)`
//! with `R(s) = sinh κs / sinh κl`, which stays finite for any `κl`.
//!
//! Amplitudes normally come from the vertex-value relations
//! `Σ_ends k(ψ_far − ψ_v cos kl)/sin kl = 2cψ_v`, one per delta vertex. When a
//! piece has `|sin kl| < 1e-6` that form is singular and the full homogeneous
//! boundary system in the `(α, β)` unknowns is solved instead.

use std::io::Write;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::eigensolve::{Family, Level, Spectrum};
use crate::error::{Error, Result};
use crate::graph::GraphSpec;
use crate::layout::{Layout, VertexKind};
use crate::quadrature::{panels_for, GaussLegendre};
use crate::secular::Branch;

/// `|sin kl|` below which the vertex-value form is abandoned.
pub const CANONICAL_SIN_FLOOR: f64 = 1e-6;
/// Largest acceptable relative residual of the matching system.
pub const RESIDUAL_TOL: f64 = 1e-7;
/// A second singular value this small (relative) signals a degenerate level.
pub const NULLITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EdgeWave {
    /// `α sin ks + β cos ks`.
    Trig { alpha: f64, beta: f64 },
    /// `start·R(l − s) + end·R(s)`, `R(s) = sinh κs / sinh κl`.
    Hyperbolic { start: f64, end: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Assembly {
    VertexValues,
    BoundarySystem,
    LoopOnly,
}

#[derive(Debug, Clone)]
pub struct EigenState {
    pub level: Level,
    pub energy: f64,
    /// `k` (or `κ`) in inverse graph units.
    pub k: f64,
    /// Factor applied to the raw amplitudes to reach unit norm.
    pub normalization: f64,
    pub assembly: Assembly,
    layout: Arc<Layout>,
    waves: Vec<EdgeWave>,
}

// sinh κs / sinh κl and its derivative, via exponentials that never overflow
fn ratio(kappa: f64, s: f64, l: f64) -> (f64, f64) {
    let den = -(-2.0 * kappa * l).exp_m1();
    let lead = (kappa * (s - l)).exp();
    let decay = (-2.0 * kappa * s).exp();
    (lead * -(-2.0 * kappa * s).exp_m1() / den, kappa * lead * (1.0 + decay) / den)
}

impl EigenState {
    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn waves(&self) -> &[EdgeWave] {
        &self.waves
    }

    /// `ψ` and `dψ/ds` at arc parameter `s` of `piece`.
    pub fn value_and_slope(&self, piece: usize, s: f64) -> (f64, f64) {
        let k = self.k;
        match self.waves[piece] {
            EdgeWave::Trig { alpha, beta } => {
                let (sn, cs) = (k * s).sin_cos();
                (alpha * sn + beta * cs, k * (alpha * cs - beta * sn))
            }
            EdgeWave::Hyperbolic { start, end } => {
                let l = self.layout.pieces[piece].length;
                let (r0, d0) = ratio(k, l - s, l);
                let (r1, d1) = ratio(k, s, l);
                (start * r0 + end * r1, -start * d0 + end * d1)
            }
        }
    }

    pub fn value(&self, piece: usize, s: f64) -> f64 {
        self.value_and_slope(piece, s).0
    }

    /// `ψ` at arc position `s` of graph edge `edge`.
    pub fn evaluate(&self, edge: usize, s: f64) -> Result<f64> {
        let n_edges = self.layout.edges.len();
        if edge >= n_edges {
            return Err(Error::Domain(format!("edge {edge} out of range ({n_edges} edges)")));
        }
        self.layout
            .locate(edge, s)
            .map(|(p, t)| self.value(p, t))
            .ok_or_else(|| Error::Domain(format!("s = {s} lies outside edge {edge}")))
    }

    // value and outward derivative at one end of a piece
    fn end(&self, piece: usize, at_start: bool) -> (f64, f64) {
        if at_start {
            self.value_and_slope(piece, 0.0)
        } else {
            let (v, d) = self.value_and_slope(piece, self.layout.pieces[piece].length);
            (v, -d)
        }
    }

    /// Largest value mismatch between piece ends meeting at a vertex, and largest wall value.
    pub fn continuity_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (v, vert) in self.layout.vertices.iter().enumerate() {
            let ends: Vec<f64> = self.layout.incident(v).iter().map(|&(p, st)| self.end(p, st).0).collect();
            match vert.kind {
                VertexKind::Wall => worst = worst.max(ends.iter().fold(0.0, |m, x| m.max(x.abs()))),
                VertexKind::Junction { .. } => {
                    for e in &ends[1..] {
                        worst = worst.max((e - ends[0]).abs());
                    }
                }
            }
        }
        worst
    }

    /// Per delta vertex: `(Σ outward ψ′, 2cψ(v))`; the two agree for a true eigenstate.
    pub fn flux_balance(&self) -> Vec<(f64, f64)> {
        self.layout
            .vertices
            .iter()
            .enumerate()
            .filter_map(|(v, vert)| match vert.kind {
                VertexKind::Junction { coupling } => {
                    let ends: Vec<(f64, f64)> = self.layout.incident(v).iter().map(|&(p, st)| self.end(p, st)).collect();
                    Some((ends.iter().map(|e| e.1).sum(), 2.0 * coupling * ends[0].0))
                }
                VertexKind::Wall => None,
            })
            .collect()
    }

    /// Largest flux mismatch relative to `k·max|ψ|` over the state's vertex values.
    pub fn flux_residual(&self) -> f64 {
        let scale = self.k * self.sup_estimate();
        self.flux_balance().iter().map(|(a, b)| (a - b).abs() / scale).fold(0.0, f64::max)
    }

    fn sup_estimate(&self) -> f64 {
        let mut m: f64 = 0.0;
        for (p, piece) in self.layout.pieces.iter().enumerate() {
            let n = 64 + (piece.length * self.k) as usize * 8;
            for i in 0..=n {
                m = m.max(self.value(p, piece.length * i as f64 / n as f64).abs());
            }
        }
        m
    }

    /// `∫|ψ|²` over the whole graph by composite Gauss–Legendre quadrature.
    pub fn norm_squared(&self) -> f64 {
        norm_squared(&self.layout, &self.waves, self.k)
    }
}

fn wave_value(w: &EdgeWave, k: f64, s: f64, l: f64) -> f64 {
    match *w {
        EdgeWave::Trig { alpha, beta } => alpha * (k * s).sin() + beta * (k * s).cos(),
        EdgeWave::Hyperbolic { start, end } => start * ratio(k, l - s, l).0 + end * ratio(k, s, l).0,
    }
}

// ∫₀ˡ (α sin ks + β cos ks)² ds
fn trig_norm(alpha: f64, beta: f64, k: f64, l: f64) -> f64 {
    let (s2, sq) = ((2.0 * k * l).sin() / (4.0 * k), (k * l).sin().powi(2) / k);
    alpha * alpha * (0.5 * l - s2) + beta * beta * (0.5 * l + s2) + alpha * beta * sq
}

fn norm_squared(layout: &Layout, waves: &[EdgeWave], k: f64) -> f64 {
    let gl = GaussLegendre::new(24);
    let integral = |refine: usize| -> f64 {
        layout
            .pieces
            .iter()
            .zip(waves)
            .map(|(p, w)| match *w {
                // closed form, except where it cancels badly
                EdgeWave::Trig { alpha, beta } if k * p.length > 0.1 => trig_norm(alpha, beta, k, p.length),
                _ => {
                    let panels = panels_for(p.length, k.max(1.0), 24, 20.0) << refine;
                    gl.integrate(|s| wave_value(w, k, s, p.length).powi(2), 0.0, p.length, panels)
                }
            })
            .sum()
    };
    let mut prev = integral(0);
    for r in 1..4 {
        let next = integral(r);
        if (next - prev).abs() <= 1e-14 * next.abs() {
            return next;
        }
        prev = next;
    }
    prev
}

/// Assembles every level of `spectrum` on one shared layout, in parallel.
pub fn assemble_states(spec: &GraphSpec, spectrum: &Spectrum) -> Result<Vec<EigenState>> {
    let layout = Arc::new(Layout::new(spec));
    spectrum
        .levels
        .par_iter()
        .map(|level| assemble_on(&layout, *level, level.energy(spectrum.total_length)))
        .collect()
}

/// Assembles one level of `spec`.
pub fn assemble_state(spec: &GraphSpec, level: Level) -> Result<EigenState> {
    let layout = Arc::new(Layout::new(spec));
    let energy = level.energy(layout.total_length);
    assemble_on(&layout, level, energy)
}

pub fn assemble_on(layout: &Arc<Layout>, level: Level, energy: f64) -> Result<EigenState> {
    let k = level.x / layout.total_length;
    let (waves, assembly) = if level.family == Family::LoopOnly {
        let waves = layout
            .pieces
            .iter()
            .map(|p| EdgeWave::Trig { alpha: if p.u == p.v { 1.0 } else { 0.0 }, beta: 0.0 })
            .collect();
        (waves, Assembly::LoopOnly)
    } else if level.branch == Branch::Negative {
        (vertex_value_waves(layout, level, k)?, Assembly::VertexValues)
    } else if layout.pieces.iter().all(|p| (k * p.length).sin().abs() >= CANONICAL_SIN_FLOOR) {
        (vertex_value_waves(layout, level, k)?, Assembly::VertexValues)
    } else {
        (boundary_system_waves(layout, level, k)?, Assembly::BoundarySystem)
    };

    let n2 = norm_squared(layout, &waves, k);
    if !(n2 > 0.0 && n2.is_finite()) {
        return Err(Error::InconsistentState { x: level.x, residual: f64::NAN });
    }
    let mut state = EigenState { level, energy, k, normalization: 1.0 / n2.sqrt(), assembly, layout: layout.clone(), waves };
    let sign = lobe_sign(&state);
    let c = sign * state.normalization;
    state.normalization = c;
    for w in &mut state.waves {
        *w = match *w {
            EdgeWave::Trig { alpha, beta } => EdgeWave::Trig { alpha: c * alpha, beta: c * beta },
            EdgeWave::Hyperbolic { start, end } => EdgeWave::Hyperbolic { start: c * start, end: c * end },
        };
    }
    Ok(state)
}

// sign of the first sample (in layout order) that reaches 1e-3 of the peak
fn lobe_sign(state: &EigenState) -> f64 {
    let mut samples = Vec::new();
    for (p, piece) in state.layout.pieces.iter().enumerate() {
        let n = 64 + (piece.length * state.k) as usize * 4;
        samples.extend((0..=n).map(|i| state.value(p, piece.length * i as f64 / n as f64)));
    }
    let peak = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    samples.iter().find(|v| v.abs() >= 1e-3 * peak).map_or(1.0, |v| v.signum())
}

// rows arrive scaled to unit magnitude, so singular values are absolute residuals
fn null_vector(m: DMatrix<f64>, x: f64) -> Result<DVector<f64>> {
    let n = m.ncols();
    let svd = m.svd(false, true);
    let s = &svd.singular_values;
    let residual = s[n - 1];
    if residual > RESIDUAL_TOL {
        return Err(Error::InconsistentState { x, residual });
    }
    if n > 1 && s[n - 2] < NULLITY_TOL {
        return Err(Error::Degenerate {
            x,
            detail: format!("matching system has a {}-dimensional null space", s.iter().filter(|v| **v < NULLITY_TOL).count()),
        });
    }
    let vt = svd.v_t.expect("right singular vectors requested");
    Ok(vt.row(n - 1).transpose())
}

fn vertex_value_waves(layout: &Layout, level: Level, k: f64) -> Result<Vec<EdgeWave>> {
    let hyper = level.branch == Branch::Negative;
    let junctions: Vec<usize> = (0..layout.vertices.len())
        .filter(|&v| matches!(layout.vertices[v].kind, VertexKind::Junction { .. }))
        .collect();
    let slot = |v: usize| junctions.iter().position(|&j| j == v);
    let n = junctions.len();
    let mut m = DMatrix::<f64>::zeros(n, n);
    let mut mag = vec![0.0; n];
    let add = |m: &mut DMatrix<f64>, mag: &mut Vec<f64>, r: usize, c: usize, val: f64| {
        m[(r, c)] += val;
        mag[r] += val.abs();
    };
    for p in &layout.pieces {
        let kl = k * p.length;
        if p.u == p.v {
            // a loop feeds both of its ends back into the same vertex
            let Some(r) = slot(p.u) else { continue };
            let t = if hyper { -2.0 * k * (0.5 * kl).tanh() } else { 2.0 * k * (0.5 * kl).tan() };
            add(&mut m, &mut mag, r, r, t);
            mag[r] += 2.0 * k;
            continue;
        }
        let (cot, csc) = if hyper {
            (1.0 / kl.tanh(), 1.0 / kl.sinh())
        } else {
            (kl.cos() / kl.sin(), 1.0 / kl.sin())
        };
        for (a, b) in [(p.u, p.v), (p.v, p.u)] {
            if let Some(r) = slot(a) {
                add(&mut m, &mut mag, r, r, -k * cot);
                // |cot| and |csc| cannot both be small, so this keeps the row scale honest
                mag[r] += k * csc.abs().min(1.0);
                if let Some(c) = slot(b) {
                    add(&mut m, &mut mag, r, c, k * csc);
                }
            }
        }
    }
    for (r, &v) in junctions.iter().enumerate() {
        if let VertexKind::Junction { coupling } = layout.vertices[v].kind {
            add(&mut m, &mut mag, r, r, -2.0 * coupling);
        }
    }
    for (r, scale) in mag.iter().enumerate() {
        if *scale > 0.0 {
            m.row_mut(r).unscale_mut(*scale);
        }
    }
    let psi = null_vector(m, level.x)?;
    let at = |v: usize| slot(v).map_or(0.0, |i| psi[i]);

    Ok(layout
        .pieces
        .iter()
        .map(|p| {
            let (a, b) = (at(p.u), at(p.v));
            let kl = k * p.length;
            if hyper {
                EdgeWave::Hyperbolic { start: a, end: b }
            } else if p.u == p.v {
                // symmetric about the loop midpoint: ψ cos k(s − l/2) / cos(kl/2)
                let h = 0.5 * kl;
                EdgeWave::Trig { alpha: a * h.tan(), beta: a }
            } else {
                EdgeWave::Trig { alpha: (b - a * kl.cos()) / kl.sin(), beta: a }
            }
        })
        .collect())
}

fn boundary_system_waves(layout: &Layout, level: Level, k: f64) -> Result<Vec<EdgeWave>> {
    let np = layout.pieces.len();
    // value and outward slope / k at a piece end, as rows over (α_p, β_p)
    let value_row = |p: usize, at_start: bool| -> [f64; 2] {
        if at_start {
            [0.0, 1.0]
        } else {
            let kl = k * layout.pieces[p].length;
            [kl.sin(), kl.cos()]
        }
    };
    let slope_row = |p: usize, at_start: bool| -> [f64; 2] {
        if at_start {
            [1.0, 0.0]
        } else {
            let kl = k * layout.pieces[p].length;
            [-kl.cos(), kl.sin()]
        }
    };
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(2 * np);
    for (v, vert) in layout.vertices.iter().enumerate() {
        let ends = layout.incident(v);
        let put = |row: &mut Vec<f64>, p: usize, coef: [f64; 2], w: f64| {
            row[2 * p] += w * coef[0];
            row[2 * p + 1] += w * coef[1];
        };
        match vert.kind {
            VertexKind::Wall => {
                for &(p, st) in &ends {
                    let mut row = vec![0.0; 2 * np];
                    put(&mut row, p, value_row(p, st), 1.0);
                    rows.push(row);
                }
            }
            VertexKind::Junction { coupling } => {
                let (p0, s0) = ends[0];
                for &(p, st) in &ends[1..] {
                    let mut row = vec![0.0; 2 * np];
                    put(&mut row, p0, value_row(p0, s0), 1.0);
                    put(&mut row, p, value_row(p, st), -1.0);
                    rows.push(row);
                }
                let mut row = vec![0.0; 2 * np];
                for &(p, st) in &ends {
                    put(&mut row, p, slope_row(p, st), 1.0);
                }
                put(&mut row, p0, value_row(p0, s0), -2.0 * coupling / k);
                rows.push(row);
            }
        }
    }
    for row in &mut rows {
        let scale: f64 = row.iter().map(|v| v.abs()).sum();
        row.iter_mut().for_each(|v| *v /= scale);
    }
    let m = DMatrix::from_fn(rows.len(), 2 * np, |r, c| rows[r][c]);
    let coef = null_vector(m, level.x)?;
    Ok((0..np).map(|p| EdgeWave::Trig { alpha: coef[2 * p], beta: coef[2 * p + 1] }).collect())
}

/// Writes `state,edge,s,x,y,psi` samples (`per_edge` points per edge) as CSV.
pub fn write_states_csv(states: &[EigenState], per_edge: usize, mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "state,edge,s,x,y,psi")?;
    for (n, st) in states.iter().enumerate() {
        let layout = st.layout();
        for (e, segs) in layout.edges.iter().enumerate() {
            let len = segs.last().map_or(0.0, |g| g.edge_s1);
            for i in 0..=per_edge {
                let s = len * i as f64 / per_edge as f64;
                let (p, t) = layout.locate(e, s).expect("sample inside edge");
                let [x, y] = layout.point(p, t);
                writeln!(out, "{n},{e},{s:.16e},{x:.16e},{y:.16e},{:.16e}", st.value(p, t))?;
            }
        }
    }
    Ok(())
}
