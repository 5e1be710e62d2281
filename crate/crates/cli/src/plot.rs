//! Figure data emission. Every figure writes one or more CSV files into the output directory.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use qgraph_core::eigensolve::{track_vs_g, MIN_STATES};
use qgraph_core::ensemble::{run_mc, run_scan, scatter_export, McConfig, RunRecord, ScanAxis, ScanConfig};
use qgraph_core::moments::sum_rule_curve;
use qgraph_core::report::{analyze, AnalysisOptions};
use qgraph_core::wavefunctions::write_states_csv;
use qgraph_core::GraphSpec;

use crate::{create, CliResult, Failure};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    SpectrumVsG,
    BetaVsPosition,
    GammaVsPosition,
    TlaScatterBeta,
    TlaScatterGamma,
    XVsBeta,
    EVsBeta,
    SumruleVsM,
    TensorNorms,
    StatesAtOptimum,
}

impl Figure {
    pub const ALL: [Figure; 10] = [
        Figure::SpectrumVsG,
        Figure::BetaVsPosition,
        Figure::GammaVsPosition,
        Figure::TlaScatterBeta,
        Figure::TlaScatterGamma,
        Figure::XVsBeta,
        Figure::EVsBeta,
        Figure::SumruleVsM,
        Figure::TensorNorms,
        Figure::StatesAtOptimum,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Figure::SpectrumVsG => "spectrum-vs-g",
            Figure::BetaVsPosition => "beta-vs-position",
            Figure::GammaVsPosition => "gamma-vs-position",
            Figure::TlaScatterBeta => "tla-scatter-beta",
            Figure::TlaScatterGamma => "tla-scatter-gamma",
            Figure::XVsBeta => "X-vs-beta",
            Figure::EVsBeta => "E-vs-beta",
            Figure::SumruleVsM => "sumrule-vs-M",
            Figure::TensorNorms => "tensor-norms",
            Figure::StatesAtOptimum => "states-at-optimum",
        }
    }

    /// Record columns of the scatter figures.
    fn scatter_fields(self) -> Option<&'static [&'static str]> {
        Some(match self {
            Figure::TlaScatterBeta => &["index", "beta", "beta3", "beta4"],
            Figure::TlaScatterGamma => &["index", "gamma", "gamma3", "gamma4"],
            Figure::XVsBeta => &["index", "beta", "X", "fG"],
            Figure::EVsBeta => &["index", "beta", "E", "fG"],
            Figure::TensorNorms => &["index", "beta", "beta_norm", "gamma", "gamma_norm", "gamma_min"],
            _ => return None,
        })
    }
}

impl FromStr for Figure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Figure::ALL.into_iter().find(|f| f.id() == s).ok_or_else(|| {
            let ids: Vec<&str> = Figure::ALL.iter().map(|f| f.id()).collect();
            format!("unknown figure `{s}`; expected one of {}", ids.join(", "))
        })
    }
}

/// Where the scatter figures take their records from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Scan(ScanConfig),
    Mc(McConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlotConfig {
    /// Graph for `sumrule-vs-M` and `states-at-optimum`.
    pub spec: Option<GraphSpec>,
    /// Delta asymmetry of the `spectrum-vs-g` atom.
    pub omega: f64,
    pub g_min: f64,
    pub g_max: f64,
    pub g_step: f64,
    pub levels: usize,
    /// Strength profiles of `beta-vs-position` and `gamma-vs-position`.
    pub g_values: Vec<f64>,
    /// Interior asymmetry values per profile.
    pub positions: usize,
    pub source: Option<Source>,
    /// Eigenstates sampled by `states-at-optimum`.
    pub states: usize,
    pub samples_per_edge: usize,
}

impl Default for PlotConfig {
    fn default() -> Self {
        PlotConfig {
            spec: None,
            omega: -0.44,
            g_min: -12.0,
            g_max: 12.5,
            g_step: 0.05,
            levels: 6,
            g_values: vec![-7.0, -5.0, -3.0, -1.0, 1.0, 3.5, 5.0, 7.0],
            positions: 199,
            source: None,
            states: 7,
            samples_per_edge: 200,
        }
    }
}

/// The largest-`β` atom of the standard grid.
pub fn optimal_atom() -> GraphSpec {
    GraphSpec::delta_atom(-3.73, -1.0 + 54.0 / 101.0).expect("valid atom")
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn emit(figure: Figure, cfg: &PlotConfig, opts: &AnalysisOptions, seed: Option<u64>, out: &Path) -> CliResult<Vec<PathBuf>> {
    let path = out.join(format!("{}.csv", figure.id()));
    if let Some(fields) = figure.scatter_fields() {
        let records = source_records(cfg, opts, seed)?;
        let mut w = create(&path)?;
        scatter_export(&records, fields, &mut w)?;
        w.flush()?;
        return Ok(vec![path]);
    }
    match figure {
        Figure::SpectrumVsG => spectrum_vs_g(cfg, &path)?,
        Figure::BetaVsPosition => profiles(cfg, opts, &["g0", "omega", "beta", "beta3", "beta4"], &path)?,
        Figure::GammaVsPosition => profiles(cfg, opts, &["g0", "omega", "gamma", "gamma3", "gamma4"], &path)?,
        Figure::SumruleVsM => {
            let spec = cfg.spec.clone().unwrap_or_else(optimal_atom);
            let a = analyze(&spec, opts)?;
            let mut w = create(&path)?;
            writeln!(w, "M,residual")?;
            for (m, r) in sum_rule_curve(&a.table, 0).iter().enumerate() {
                writeln!(w, "{},{}", m + 1, num(*r))?;
            }
            w.flush()?;
        }
        Figure::StatesAtOptimum => return states_at_optimum(cfg, opts, out),
        _ => unreachable!("scatter figures return early"),
    }
    Ok(vec![path])
}

fn source_records(cfg: &PlotConfig, opts: &AnalysisOptions, seed: Option<u64>) -> CliResult<Vec<RunRecord>> {
    match cfg.source.clone() {
        Some(Source::Mc(mut mc)) => {
            if let Some(s) = seed {
                mc.seed = s;
            }
            Ok(run_mc(&mc)?.records)
        }
        Some(Source::Scan(scan)) => Ok(run_scan(&scan)?),
        None => {
            let scan = ScanConfig { n_states: opts.n_states, quad_order: opts.quad.order, ..ScanConfig::atom_grid() };
            Ok(run_scan(&scan)?)
        }
    }
}

fn spectrum_vs_g(cfg: &PlotConfig, path: &Path) -> CliResult<()> {
    if !(cfg.g_step > 0.0 && cfg.g_min < cfg.g_max) || cfg.levels == 0 {
        return Err(Failure::Invalid("spectrum-vs-g needs g_min < g_max, g_step > 0 and levels ≥ 1".into()));
    }
    let count = ((cfg.g_max - cfg.g_min) / cfg.g_step).round() as usize + 1;
    let grid: Vec<f64> = (0..count).map(|i| cfg.g_min + i as f64 * cfg.g_step).collect();
    let template = GraphSpec::delta_atom(grid[0], cfg.omega)?;
    let spectra = track_vs_g(&template, 0, &grid, cfg.levels.max(MIN_STATES))?;
    let mut w = create(path)?;
    let header: Vec<String> = (0..cfg.levels).map(|n| format!("E{n}")).collect();
    writeln!(w, "g,bound_count,{}", header.join(","))?;
    for (g, s) in grid.iter().zip(&spectra) {
        let es: Vec<String> = s.energies().into_iter().take(cfg.levels).map(num).collect();
        writeln!(w, "{},{},{}", num(*g), s.bound_count(), es.join(","))?;
    }
    w.flush()?;
    Ok(())
}

fn profiles(cfg: &PlotConfig, opts: &AnalysisOptions, fields: &[&str], path: &Path) -> CliResult<()> {
    if cfg.g_values.is_empty() || cfg.positions == 0 {
        return Err(Failure::Invalid("position profiles need g_values and positions ≥ 1".into()));
    }
    let n = cfg.positions;
    let scan = ScanConfig {
        base: GraphSpec::delta_atom(cfg.g_values[0], 0.0)?,
        axes: vec![
            ScanAxis::Strength { delta: 0, values: cfg.g_values.clone() },
            ScanAxis::Omega { values: (0..n).map(|i| -1.0 + 2.0 * (i + 1) as f64 / (n + 1) as f64).collect() },
        ],
        n_states: opts.n_states,
        quad_order: opts.quad.order,
    };
    let records = run_scan(&scan)?;
    let mut w = create(path)?;
    scatter_export(&records, fields, &mut w)?;
    w.flush()?;
    Ok(())
}

fn states_at_optimum(cfg: &PlotConfig, opts: &AnalysisOptions, out: &Path) -> CliResult<Vec<PathBuf>> {
    let spec = cfg.spec.clone().unwrap_or_else(optimal_atom);
    let a = analyze(&spec, &AnalysisOptions { n_states: opts.n_states.max(cfg.states), ..*opts })?;
    let keep = cfg.states.min(a.states.len());
    let states_path = out.join("states-at-optimum.csv");
    let mut w = create(&states_path)?;
    write_states_csv(&a.states[..keep], cfg.samples_per_edge.max(1), &mut w)?;
    w.flush()?;
    let levels_path = out.join("states-at-optimum-levels.csv");
    let mut w = create(&levels_path)?;
    writeln!(w, "state,energy,e,beta_rank,gamma_rank")?;
    let rank = |list: &[usize], n: usize| list.iter().position(|&m| m == n).map(|p| (p + 1).to_string()).unwrap_or_default();
    for n in 0..keep {
        writeln!(
            w,
            "{n},{},{},{},{}",
            num(a.table.energies[n]),
            num(a.table.e[n]),
            rank(&a.report.tla.beta_ranking, n),
            rank(&a.report.tla.gamma_ranking, n)
        )?;
    }
    w.flush()?;
    Ok(vec![states_path, levels_path])
}
