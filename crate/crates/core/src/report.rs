//! One-call analysis of a graph: spectrum, states, moments and response.

use serde::{Deserialize, Serialize};

use crate::eigensolve::{solve_spectrum_with, SolveOptions, Spectrum, DEFAULT_STATES};
use crate::error::Result;
use crate::graph::GraphSpec;
use crate::moments::{build_table, sum_rule_curve, QuadOptions, TransitionTable};
use crate::response::{
    beta_intrinsic, beta_norm, gamma_intrinsic, gamma_norm, spherical_beta, spherical_gamma, theta_star_beta,
    theta_star_gamma, tla_params, BetaTensor, GammaTensor, Spherical, TlaDiagnostics,
};
use crate::wavefunctions::{assemble_states, EigenState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    pub n_states: usize,
    pub quad: QuadOptions,
    pub solve: SolveOptions,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions { n_states: DEFAULT_STATES, quad: QuadOptions::default(), solve: SolveOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaReport {
    pub components: BetaTensor,
    pub norm: f64,
    /// Frame angle maximizing `β_xxx(θ)`.
    pub theta_star: f64,
    /// `β_xxx(θ*)`.
    pub max: f64,
    pub spherical: Spherical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaReport {
    pub components: GammaTensor,
    pub norm: f64,
    pub theta_max: f64,
    pub max: f64,
    pub theta_min: f64,
    pub min: f64,
    pub spherical: Spherical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseReport {
    pub spec: GraphSpec,
    pub energies: Vec<f64>,
    pub bound_count: usize,
    pub beta: BetaReport,
    pub gamma: GammaReport,
    /// Evaluated in the `θ*` frame of `β`.
    pub tla: TlaDiagnostics,
    /// Ground-row sum-rule residual for `M = 1..=n_states`.
    pub sum_rule_residuals: Vec<f64>,
    pub orthonormality_error: f64,
    pub quadrature_nodes: usize,
}

impl ResponseReport {
    /// Lab-frame `β_xxx` for graphs on the x axis, else the `θ*` maximum.
    pub fn beta_xxx(&self) -> f64 {
        if self.spec.is_collinear() {
            self.beta.components.xxx
        } else {
            self.beta.max
        }
    }

    /// Lab-frame `γ_xxxx` for graphs on the x axis, else the largest `γ_xxxx(θ)`.
    pub fn gamma_xxxx(&self) -> f64 {
        if self.spec.is_collinear() {
            self.gamma.components.xxxx
        } else {
            self.gamma.max
        }
    }
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub spectrum: Spectrum,
    pub states: Vec<EigenState>,
    pub table: TransitionTable,
    pub report: ResponseReport,
}

/// Everything derived from a transition table.
pub fn report_from_table(spec: &GraphSpec, bound_count: usize, table: &TransitionTable) -> Result<ResponseReport> {
    let b = beta_intrinsic(table)?;
    let g = gamma_intrinsic(table)?;
    let (theta_star, bmax) = theta_star_beta(&b);
    let ((theta_max, gmax), (theta_min, gmin)) = theta_star_gamma(&g);
    let frame = if spec.is_collinear() { 0.0 } else { theta_star };
    Ok(ResponseReport {
        spec: spec.clone(),
        energies: table.energies.clone(),
        bound_count,
        beta: BetaReport { components: b, norm: beta_norm(&b), theta_star, max: bmax, spherical: spherical_beta(&b) },
        gamma: GammaReport {
            components: g,
            norm: gamma_norm(&g),
            theta_max,
            max: gmax,
            theta_min,
            min: gmin,
            spherical: spherical_gamma(&g),
        },
        tla: tla_params(&table.in_frame(frame))?,
        sum_rule_residuals: sum_rule_curve(table, 0),
        orthonormality_error: table.orthonormality_error(),
        quadrature_nodes: table.nodes,
    })
}

pub fn analyze(spec: &GraphSpec, opts: &AnalysisOptions) -> Result<Analysis> {
    let spectrum = solve_spectrum_with(spec, opts.n_states, &opts.solve)?;
    let states = assemble_states(spec, &spectrum)?;
    let table = build_table(&states, &opts.quad)?;
    let report = report_from_table(spec, spectrum.bound_count(), &table)?;
    Ok(Analysis { spectrum, states, table, report })
}
