//! Ordered spectra of dressed graphs: bound states from the hyperbolic branch,
//! then positive-energy states from the trigonometric branch.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{GraphSpec, Topology};
use crate::roots::{bisect, root_scan, Bracket};
use crate::secular::{Branch, SecularFn};

pub const DEFAULT_STATES: usize = 25;
pub const MIN_STATES: usize = 8;

/// Two roots closer than this (in `kL`) are treated as a degenerate pair.
pub const DEGENERACY_GAP: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    /// Root of the topology's secular function.
    Secular,
    /// Lollipop state living on the loop alone, `k = 2πn/ℓ`.
    LoopOnly,
}

/// One eigenvalue: `x = kL` (or `κL` for a bound state) on the unit-length graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub x: f64,
    pub branch: Branch,
    pub family: Family,
}

impl Level {
    pub fn is_bound(&self) -> bool {
        self.branch == Branch::Negative
    }

    /// Energy on a graph of total length `length` (ħ = m = 1).
    pub fn energy(&self, length: f64) -> f64 {
        let e = 0.5 * self.x * self.x / (length * length);
        match self.branch {
            Branch::Positive => e,
            Branch::Negative => -e,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub topology: Topology,
    pub total_length: f64,
    pub levels: Vec<Level>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.energy(self.total_length)).collect()
    }

    /// Wavenumbers `k` (or `κ` for bound states) in inverse graph units.
    pub fn wavenumbers(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.x / self.total_length).collect()
    }

    pub fn bound_count(&self) -> usize {
        self.levels.iter().filter(|l| l.is_bound()).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Initial scan density, in grid points per `π/8` of `kL`.
    pub density: usize,
    /// The density doubles until the root count is stable, up to this cap.
    pub max_density: usize,
    pub rel_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { density: 16, max_density: 2048, rel_tol: 1e-15 }
    }
}

/// Lowest `n_states` levels of `spec` with default options.
pub fn solve_spectrum(spec: &GraphSpec, n_states: usize) -> Result<Spectrum> {
    solve_spectrum_with(spec, n_states, &SolveOptions::default())
}

pub fn solve_spectrum_with(spec: &GraphSpec, n_states: usize, opts: &SolveOptions) -> Result<Spectrum> {
    if n_states < MIN_STATES {
        return Err(Error::InsufficientBasis { needed: MIN_STATES, got: n_states });
    }
    let unit = spec.normalize_scale();
    let mut trace = Vec::new();

    let neg = SecularFn::for_spec(&unit, Branch::Negative);
    let x_max_neg = spec.strengths().iter().map(|g| g.abs()).sum::<f64>() + 10.0;
    let bound = stable_roots(&neg, x_max_neg, opts, &mut trace)?;
    let max_bound = spec.strengths().iter().filter(|&&g| g < 0.0).count();
    if bound.len() > max_bound {
        return Err(Error::SolverFailure {
            message: format!("found {} bound states but only {max_bound} attractive deltas", bound.len()),
            trace,
        });
    }

    let pos = SecularFn::for_spec(&unit, Branch::Positive);
    let wanted = n_states.saturating_sub(bound.len());
    let loop_x = loop_family_step(&unit);
    let mut x_hi = (wanted as f64 + 4.0) * PI;
    let positive = loop {
        let mut xs = stable_roots(&pos, x_hi, opts, &mut trace)?;
        if let Some(step) = loop_x {
            xs.extend((1..).map(|n| n as f64 * step).take_while(|&x| x <= x_hi).map(|x| (x, Family::LoopOnly)));
            xs.sort_by(|a, b| a.0.total_cmp(&b.0));
        }
        if xs.len() >= wanted {
            break xs;
        }
        trace.push(format!("positive branch: {} of {wanted} roots below kL = {x_hi:.3}, extending", xs.len()));
        if x_hi > 1e3 * (wanted as f64 + 4.0) {
            return Err(Error::SolverFailure {
                message: format!("only {} of {wanted} positive roots found", xs.len()),
                trace,
            });
        }
        x_hi *= 1.5;
    };

    let mut levels: Vec<Level> = bound
        .iter()
        .rev()
        .map(|&(x, family)| Level { x, branch: Branch::Negative, family })
        .collect();
    levels.extend(positive.into_iter().take(wanted).map(|(x, family)| Level { x, branch: Branch::Positive, family }));

    for w in levels.windows(2) {
        if w[0].branch == w[1].branch && (w[1].x - w[0].x).abs() < DEGENERACY_GAP {
            return Err(Error::Degenerate {
                x: w[0].x,
                detail: format!("levels at {} and {} coincide", w[0].x, w[1].x),
            });
        }
    }
    Ok(Spectrum { topology: spec.topology(), total_length: spec.total_length(), levels })
}

fn loop_family_step(unit: &GraphSpec) -> Option<f64> {
    (unit.topology() == Topology::LollipopDelta).then(|| 2.0 * PI / unit.edges()[1].length)
}

// roots of `f` on (0, x_hi], scanned at doubling densities until the count settles
fn stable_roots(f: &SecularFn, x_hi: f64, opts: &SolveOptions, trace: &mut Vec<String>) -> Result<Vec<(f64, Family)>> {
    let eval = |x: f64| f.eval(x);
    let mut density = opts.density;
    let mut prev = root_scan(eval, 0.0, x_hi, density);
    loop {
        let next_density = density * 2;
        let next = root_scan(eval, 0.0, x_hi, next_density);
        trace.push(format!(
            "{:?} branch, kL ≤ {x_hi:.3}: {} brackets at density {density}, {} at {next_density}",
            f.branch(),
            prev.len(),
            next.len()
        ));
        if next.len() == prev.len() {
            prev = next;
            break;
        }
        if next_density >= opts.max_density {
            return Err(Error::SolverFailure {
                message: "root count did not stabilize under grid refinement".into(),
                trace: std::mem::take(trace),
            });
        }
        density = next_density;
        prev = next;
    }
    let mut roots = Vec::with_capacity(prev.len());
    for b in prev {
        match b {
            Bracket::SignChange { lo, hi } => roots.push((bisect(eval, lo, hi, opts.rel_tol), Family::Secular)),
            Bracket::Exact(x) => roots.push((x, Family::Secular)),
            Bracket::EvenMultiplicity { x, value } => {
                return Err(Error::Degenerate {
                    x,
                    detail: format!("secular function touches zero without crossing ({value:e})"),
                })
            }
        }
    }
    Ok(roots)
}

/// Spectra of `template` with the strength of delta `index` swept over `grid`.
pub fn track_vs_g(template: &GraphSpec, index: usize, grid: &[f64], n_states: usize) -> Result<Vec<Spectrum>> {
    if index >= template.deltas().len() {
        return Err(Error::InvalidArgument(format!("no delta with index {index}")));
    }
    let increasing = grid.windows(2).all(|w| w[0] < w[1]);
    let decreasing = grid.windows(2).all(|w| w[0] > w[1]);
    if !(increasing || decreasing) {
        return Err(Error::InvalidArgument("g grid must be strictly monotone".into()));
    }
    grid.iter()
        .map(|&g| {
            let mut gs = template.strengths();
            gs[index] = g;
            solve_spectrum(&template.with_strengths(&gs)?, n_states)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::secular::critical_strength_wire;
    use approx::assert_relative_eq;

    #[test]
    fn bare_wire_is_particle_in_a_box() {
        for &om in &[-0.44, 0.0, 0.3] {
            let s = solve_spectrum(&GraphSpec::delta_atom(0.0, om).unwrap(), 25).unwrap();
            assert_eq!(s.len(), 25);
            assert_eq!(s.bound_count(), 0);
            for (n, l) in s.levels.iter().enumerate() {
                let want = (n + 1) as f64 * PI;
                assert!((l.x - want).abs() / want < 1e-10, "{} vs {want}", l.x);
                assert_relative_eq!(l.energy(1.0), want * want / 2.0, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn energies_carry_the_length_scale() {
        let spec = GraphSpec::bent_wire(&[(-3.0, 1.0)], 2.0, &[0.0, 0.0]).unwrap();
        let s = solve_spectrum(&spec, 10).unwrap();
        let u = solve_spectrum(&spec.normalize_scale(), 10).unwrap();
        for (a, b) in s.energies().iter().zip(u.energies()) {
            assert_relative_eq!(*a * 4.0, b, max_relative = 1e-12);
        }
    }

    #[test]
    fn single_bound_state_below_threshold() {
        let s = solve_spectrum(&GraphSpec::delta_atom(-5.0, -0.44).unwrap(), 25).unwrap();
        assert_eq!(s.bound_count(), 1);
        assert!(s.energies()[0] < 0.0);
        let e = s.energies();
        assert!(e.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn deep_well_binds_near_abs_g() {
        let s = solve_spectrum(&GraphSpec::delta_atom(-50.0, 0.0).unwrap(), 25).unwrap();
        assert_eq!(s.bound_count(), 1);
        assert!((s.levels[0].x - 50.0).abs() / 50.0 < 0.05, "{}", s.levels[0].x);
    }

    #[test]
    fn rejects_small_bases() {
        let e = solve_spectrum(&GraphSpec::delta_atom(1.0, 0.0).unwrap(), 7).unwrap_err();
        assert!(matches!(e, Error::InsufficientBasis { .. }));
    }

    #[test]
    fn wire_roots_respect_separators() {
        // positive roots of a single-delta wire interlace with the bare roots nπ
        for &g in &[-8.0, -1.0, 2.0, 9.0] {
            let s = solve_spectrum(&GraphSpec::delta_atom(g, 0.17).unwrap(), 25).unwrap();
            let pos: Vec<f64> = s.levels.iter().filter(|l| !l.is_bound()).map(|l| l.x).collect();
            // the interval below π holds the lowest state, bound or not, unless a barrier lifts it
            let offset = usize::from(g > 0.0 || s.bound_count() > 0);
            for (i, x) in pos.iter().enumerate() {
                assert_eq!((x / PI).floor() as usize, i + offset, "g={g} i={i} x={x}");
            }
        }
    }

    #[test]
    fn bound_state_appears_below_threshold() {
        let om = -0.44;
        let gc = critical_strength_wire(om).unwrap();
        let grid: Vec<f64> = (0..=300).map(|i| -4.0 + 0.01 * i as f64).collect();
        let spectra = track_vs_g(&GraphSpec::delta_atom(0.0, om).unwrap(), 0, &grid, 10).unwrap();
        for (g, s) in grid.iter().zip(&spectra) {
            if (g - gc).abs() > 1e-9 {
                assert_eq!(s.bound_count(), usize::from(*g < gc), "g={g}");
            }
        }
        // levels move continuously along the sweep
        let fine: Vec<f64> = (0..50).map(|i| 1.0 + 1e-4 * i as f64).collect();
        let spectra = track_vs_g(&GraphSpec::delta_atom(0.0, om).unwrap(), 0, &fine, 10).unwrap();
        for w in spectra.windows(2) {
            for (a, b) in w[0].levels.iter().zip(&w[1].levels) {
                assert!((a.x - b.x).abs() < 1e-2);
            }
        }
    }

    #[test]
    fn track_rejects_unsorted_grid() {
        let t = GraphSpec::delta_atom(0.0, 0.0).unwrap();
        assert!(track_vs_g(&t, 0, &[0.0, 1.0, 0.5], 10).is_err());
        assert!(track_vs_g(&t, 1, &[0.0, 1.0], 10).is_err());
    }

    #[test]
    fn bound_counts_bounded_by_attractive_deltas() {
        let s = solve_spectrum(&GraphSpec::straight_wire(&[(-9.0, 0.3), (-9.0, 0.7)]).unwrap(), 12).unwrap();
        assert_eq!(s.bound_count(), 2);
        let s = solve_spectrum(&GraphSpec::straight_wire(&[(-11.0, 0.2), (-11.0, 0.5), (-11.0, 0.8)]).unwrap(), 12).unwrap();
        assert_eq!(s.bound_count(), 3);
        let s = solve_spectrum(&GraphSpec::straight_wire(&[(-11.0, 0.2), (4.0, 0.5), (-11.0, 0.8)]).unwrap(), 12).unwrap();
        assert!(s.bound_count() <= 2);
    }

    #[test]
    fn lollipop_includes_loop_family() {
        let spec = GraphSpec::lollipop(0.37, 0.63, 0.0, 0.0, -2.0).unwrap();
        let s = solve_spectrum(&spec, 20).unwrap();
        let loops: Vec<&Level> = s.levels.iter().filter(|l| l.family == Family::LoopOnly).collect();
        assert!(!loops.is_empty());
        for (n, l) in loops.iter().enumerate() {
            assert_relative_eq!(l.x, (n + 1) as f64 * 2.0 * PI / 0.63, max_relative = 1e-14);
        }
        let e = s.energies();
        assert!(e.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn symmetric_star_is_degenerate() {
        let spec = GraphSpec::star([1.0, 1.0, 1.0], [0.0, 2.0, 4.0], 0.0).unwrap();
        assert!(matches!(solve_spectrum(&spec, 10), Err(Error::Degenerate { .. })));
    }
}
