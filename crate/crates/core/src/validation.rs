//! Self-checking property suites that produce a comparison table.
//!
//! Every suite evaluates a deterministic set of graphs and emits one
//! [`Check`] per compared quantity. A suite passes when every row does.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::{McConfig, McFamily};
use crate::error::{Error, Result};
use crate::graph::GraphSpec;
use crate::moments::QuadOptions;
use crate::oracle::fd_response;
use crate::report::{analyze, Analysis, AnalysisOptions};
use crate::response::{beta_norm, gamma_norm};

/// Largest relative eigenvalue gap between the grid and exact spectra.
pub const ORACLE_ENERGY_TOL: f64 = 5e-3;
/// Absolute `β_xxx` and `γ_xxxx` gap between the grid and exact pipelines.
pub const ORACLE_RESPONSE_TOL: f64 = 0.02;
/// Number of levels whose energies the oracle suite compares.
pub const ORACLE_LEVELS: usize = 8;
/// Ground-row sum-rule residual allowed with the full basis.
pub const SUM_RULE_TOL: f64 = 1e-2;
pub const NORM_INVARIANCE_TOL: f64 = 1e-10;
pub const EQUIVARIANCE_TOL: f64 = 1e-6;
pub const SCALE_TOL: f64 = 1e-10;
pub const ORTHONORMALITY_TOL: f64 = 1e-8;
pub const CONTINUITY_TOL: f64 = 1e-9;
pub const FLUX_TOL: f64 = 1e-8;
pub const NORMALIZATION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    OracleWires,
    SumRules,
    RotationInvariance,
    ScaleInvariance,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::OracleWires, Suite::SumRules, Suite::RotationInvariance, Suite::ScaleInvariance];

    pub fn name(self) -> &'static str {
        match self {
            Suite::OracleWires => "oracle-wires",
            Suite::SumRules => "sum-rules",
            Suite::RotationInvariance => "rotation-invariance",
            Suite::ScaleInvariance => "scale-invariance",
        }
    }

    /// Number of graphs evaluated by default.
    pub fn default_cases(self) -> usize {
        match self {
            Suite::OracleWires => 20,
            Suite::SumRules => 70,
            Suite::RotationInvariance => 50,
            Suite::ScaleInvariance => 30,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidateOptions {
    pub seed: u64,
    pub n_states: usize,
    pub quad_order: usize,
    /// Interior nodes of the finite-difference grid.
    pub fd_grid: usize,
    /// Overrides the suite's default number of graphs.
    pub cases: Option<usize>,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        ValidateOptions { seed: 2024, n_states: 25, quad_order: 16, fd_grid: 4000, cases: None }
    }
}

impl ValidateOptions {
    fn analysis(&self) -> AnalysisOptions {
        AnalysisOptions {
            n_states: self.n_states,
            quad: QuadOptions { order: self.quad_order, ..QuadOptions::default() },
            ..AnalysisOptions::default()
        }
    }
}

/// One compared quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    /// Label of the graph the row belongs to.
    pub case: String,
    pub quantity: String,
    /// Value from the exact graph pipeline.
    pub graph: f64,
    /// Value it is compared with (grid solution, transformed graph, or exact target).
    pub reference: f64,
    /// Discrepancy measured against `tol` (relative for `*_rel` quantities).
    pub diff: f64,
    pub tol: f64,
}

impl Check {
    pub fn absolute(case: &str, quantity: impl Into<String>, graph: f64, reference: f64, tol: f64) -> Check {
        Check { case: case.into(), quantity: quantity.into(), graph, reference, diff: (graph - reference).abs(), tol }
    }

    pub fn relative(case: &str, quantity: impl Into<String>, graph: f64, reference: f64, tol: f64) -> Check {
        let diff = (graph - reference).abs() / graph.abs();
        Check { case: case.into(), quantity: quantity.into(), graph, reference, diff, tol }
    }

    /// A row for a graph whose pipeline failed outright.
    pub fn failure(case: &str, err: &Error) -> Check {
        Check {
            case: case.into(),
            quantity: format!("error:{}", err.kind()),
            graph: f64::NAN,
            reference: f64::NAN,
            diff: f64::INFINITY,
            tol: 0.0,
        }
    }

    pub fn pass(&self) -> bool {
        self.diff <= self.tol
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub suite: Suite,
    pub rows: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(Check::pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.rows.iter().filter(|c| !c.pass())
    }

    /// Worst `diff / tol` over the rows.
    pub fn worst_ratio(&self) -> f64 {
        self.rows.iter().map(|c| c.diff / c.tol).fold(0.0, f64::max)
    }

    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "case,quantity,graph,reference,diff,tol,pass")?;
        for c in &self.rows {
            writeln!(
                out,
                "{},{},{:.16e},{:.16e},{:.16e},{:.16e},{}",
                c.case,
                c.quantity,
                c.graph,
                c.reference,
                c.diff,
                c.tol,
                c.pass()
            )?;
        }
        Ok(())
    }
}

pub fn run_suite(suite: Suite, opts: &ValidateOptions) -> Result<ValidationReport> {
    if opts.n_states < ORACLE_LEVELS {
        return Err(Error::Config(format!("validation needs at least {ORACLE_LEVELS} states")));
    }
    let cases = opts.cases.unwrap_or(suite.default_cases());
    if cases == 0 {
        return Err(Error::Config("validation needs at least one case".into()));
    }
    let rows = match suite {
        Suite::OracleWires => oracle_wires(opts, cases),
        Suite::SumRules => sum_rules(opts, cases),
        Suite::RotationInvariance => rotation_invariance(opts, cases),
        Suite::ScaleInvariance => scale_invariance(opts, cases),
    };
    Ok(ValidationReport { suite, rows })
}

fn label(i: usize, spec: &GraphSpec) -> String {
    format!("{i}:{}", spec.topology())
}

/// Random one-delta wires with `g ∈ [−10, 10)` and `ω ∈ [−0.95, 0.95)`.
pub fn oracle_wire(seed: u64, index: usize) -> Result<GraphSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let g = rng.gen_range(-10.0..10.0);
    let omega = rng.gen_range(-0.95..0.95);
    GraphSpec::delta_atom(g, omega)
}

fn oracle_wires(opts: &ValidateOptions, cases: usize) -> Vec<Check> {
    let per_case = |i: usize| -> Vec<Check> {
        let spec = match oracle_wire(opts.seed, i) {
            Ok(s) => s,
            Err(e) => return vec![Check::failure(&i.to_string(), &e)],
        };
        let case = label(i, &spec);
        let exact = match analyze(&spec, &opts.analysis()) {
            Ok(a) => a.report,
            Err(e) => return vec![Check::failure(&case, &e)],
        };
        let grid = match fd_response(&spec, opts.fd_grid, opts.n_states) {
            Ok(r) => r,
            Err(e) => return vec![Check::failure(&case, &e)],
        };
        let mut rows: Vec<Check> = (0..ORACLE_LEVELS)
            .map(|n| Check::relative(&case, format!("E{n}_rel"), exact.energies[n], grid.energies[n], ORACLE_ENERGY_TOL))
            .collect();
        let tol = |v: f64| ORACLE_RESPONSE_TOL * v.abs().max(1.0);
        let (b, g) = (exact.beta.components.xxx, exact.gamma.components.xxxx);
        rows.push(Check::absolute(&case, "beta_xxx", b, grid.beta.components.xxx, tol(b)));
        rows.push(Check::absolute(&case, "gamma_xxxx", g, grid.gamma.components.xxxx, tol(g)));
        rows
    };
    (0..cases).into_par_iter().flat_map_iter(per_case).collect()
}

/// Grid points of the one-delta sum-rule subsample: every fourth `g` in
/// `[−12, 0]` against every tenth `ω` of the standard atom grid.
pub fn sum_rule_points() -> Vec<(f64, f64)> {
    let gs = (0..=24).step_by(4).map(|j| -12.0 + 0.5 * j as f64);
    gs.flat_map(|g| (0..100).step_by(10).map(move |i| (g, -1.0 + 2.0 * (i + 1) as f64 / 101.0))).collect()
}

fn sum_rules(opts: &ValidateOptions, cases: usize) -> Vec<Check> {
    let points = sum_rule_points();
    let per_case = |i: usize| -> Vec<Check> {
        let (g, omega) = points[i % points.len()];
        let case = format!("{i}:g={g}:omega={omega:.6}");
        match GraphSpec::delta_atom(g, omega).and_then(|s| analyze(&s, &opts.analysis())) {
            Ok(a) => {
                let r = &a.report.sum_rule_residuals;
                vec![Check::absolute(&case, format!("sum_rule_M{}", r.len()), r[r.len() - 1], 0.0, SUM_RULE_TOL)]
            }
            Err(e) => vec![Check::failure(&case, &e)],
        }
    };
    (0..cases).into_par_iter().flat_map_iter(per_case).collect()
}

/// Orthonormality, continuity, flux and normalization of every state.
pub fn state_checks(case: &str, a: &Analysis) -> Vec<Check> {
    let worst = |f: &dyn Fn(&crate::wavefunctions::EigenState) -> f64| a.states.iter().map(f).fold(0.0, f64::max);
    vec![
        Check::absolute(case, "orthonormality", a.table.orthonormality_error(), 0.0, ORTHONORMALITY_TOL),
        Check::absolute(case, "continuity", worst(&|s| s.continuity_residual()), 0.0, CONTINUITY_TOL),
        Check::absolute(case, "flux", worst(&|s| s.flux_residual()), 0.0, FLUX_TOL),
        Check::absolute(case, "normalization", worst(&|s| (s.norm_squared() - 1.0).abs()), 0.0, NORMALIZATION_TOL),
    ]
}

fn family(i: usize) -> McFamily {
    match i % 6 {
        0..=2 => McFamily::Wire { deltas: i % 6 + 1, bent: false },
        3 => McFamily::Wire { deltas: i / 6 % 3 + 1, bent: true },
        4 => McFamily::Star,
        _ => McFamily::Lollipop,
    }
}

fn random_graph(seed: u64, fam: McFamily, index: usize) -> Result<GraphSpec> {
    let mut cfg = McConfig::new(fam, index + 1, seed);
    cfg.strength = [-10.0, 10.0];
    cfg.position = [0.05, 0.95];
    cfg.length = [0.1, 1.0];
    cfg.sample(index)
}

fn rotation_invariance(opts: &ValidateOptions, cases: usize) -> Vec<Check> {
    let per_case = |i: usize| -> Vec<Check> {
        let fam = McFamily::Wire { deltas: i % 3 + 1, bent: true };
        let spec = match random_graph(opts.seed, fam, i) {
            Ok(s) => s,
            Err(e) => return vec![Check::failure(&i.to_string(), &e)],
        };
        let case = label(i, &spec);
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5eed);
        rng.set_stream(i as u64);
        let phi = rng.gen_range(-PI..PI);
        let (a, b) = match (analyze(&spec, &opts.analysis()), analyze(&spec.rotated(phi), &opts.analysis())) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => return vec![Check::failure(&case, &e)],
        };
        let (ba, ga) = (a.report.beta.components, a.report.gamma.components);
        let (bb, gb) = (b.report.beta.components, b.report.gamma.components);
        let (br, gr) = (ba.rotated(phi), ga.rotated(phi));
        let mut rows = vec![
            Check::absolute(&case, "beta_norm_rotated_tensor", beta_norm(&ba), beta_norm(&br), NORM_INVARIANCE_TOL),
            Check::absolute(&case, "gamma_norm_rotated_tensor", gamma_norm(&ga), gamma_norm(&gr), NORM_INVARIANCE_TOL),
            Check::absolute(&case, "beta_norm_rotated_graph", a.report.beta.norm, b.report.beta.norm, EQUIVARIANCE_TOL),
            Check::absolute(&case, "gamma_norm_rotated_graph", a.report.gamma.norm, b.report.gamma.norm, EQUIVARIANCE_TOL),
        ];
        for (name, x, y) in [("beta_xxx", br.xxx, bb.xxx), ("beta_xxy", br.xxy, bb.xxy), ("beta_xyy", br.xyy, bb.xyy), ("beta_yyy", br.yyy, bb.yyy)] {
            rows.push(Check::absolute(&case, name, x, y, EQUIVARIANCE_TOL));
        }
        for (name, x, y) in [
            ("gamma_xxxx", gr.xxxx, gb.xxxx),
            ("gamma_xxxy", gr.xxxy, gb.xxxy),
            ("gamma_xxyy", gr.xxyy, gb.xxyy),
            ("gamma_xyyy", gr.xyyy, gb.xyyy),
            ("gamma_yyyy", gr.yyyy, gb.yyyy),
        ] {
            rows.push(Check::absolute(&case, name, x, y, EQUIVARIANCE_TOL));
        }
        rows.extend(state_checks(&case, &a));
        rows
    };
    (0..cases).into_par_iter().flat_map_iter(per_case).collect()
}

fn scale_invariance(opts: &ValidateOptions, cases: usize) -> Vec<Check> {
    let per_case = |i: usize| -> Vec<Check> {
        let spec = match random_graph(opts.seed, family(i), i) {
            Ok(s) => s,
            Err(e) => return vec![Check::failure(&i.to_string(), &e)],
        };
        let case = label(i, &spec);
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5ca1e);
        rng.set_stream(i as u64);
        let factor = rng.gen_range(0.2..5.0);
        let (a, b) = match (analyze(&spec, &opts.analysis()), analyze(&spec.scaled(factor), &opts.analysis())) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => return vec![Check::failure(&case, &e)],
        };
        let (ra, rb) = (&a.report, &b.report);
        let (ba, bb) = (ra.beta.components, rb.beta.components);
        let (ga, gb) = (ra.gamma.components, rb.gamma.components);
        let mut pairs = vec![
            ("beta_xxx", ba.xxx, bb.xxx),
            ("beta_xxy", ba.xxy, bb.xxy),
            ("beta_xyy", ba.xyy, bb.xyy),
            ("beta_yyy", ba.yyy, bb.yyy),
            ("gamma_xxxx", ga.xxxx, gb.xxxx),
            ("gamma_xxxy", ga.xxxy, gb.xxxy),
            ("gamma_xxyy", ga.xxyy, gb.xxyy),
            ("gamma_xyyy", ga.xyyy, gb.xyyy),
            ("gamma_yyyy", ga.yyyy, gb.yyyy),
            ("beta_norm", ra.beta.norm, rb.beta.norm),
            ("gamma_norm", ra.gamma.norm, rb.gamma.norm),
            ("beta_max", ra.beta.max, rb.beta.max),
            ("gamma_max", ra.gamma.max, rb.gamma.max),
            ("gamma_min", ra.gamma.min, rb.gamma.min),
            ("X", ra.tla.x, rb.tla.x),
            ("E", ra.tla.e, rb.tla.e),
            ("fG", ra.tla.fg, rb.tla.fg),
        ];
        let mut rows: Vec<Check> = pairs.drain(..).map(|(n, x, y)| Check::absolute(&case, n, x, y, SCALE_TOL)).collect();
        for (n, (x, y)) in a.table.e.iter().zip(&b.table.e).enumerate().skip(2) {
            rows.push(Check::absolute(&case, format!("e{n}"), *x, *y, SCALE_TOL * x.max(1.0)));
        }
        rows.extend(state_checks(&case, &b));
        rows
    };
    (0..cases).into_par_iter().flat_map_iter(per_case).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!(matches!("nope".parse::<Suite>(), Err(Error::Config(_))));
    }

    #[test]
    fn sum_rule_subsample_stays_attractive() {
        let pts = sum_rule_points();
        assert_eq!(pts.len(), 70);
        assert!(pts.iter().all(|(g, w)| (-12.0..=0.0).contains(g) && w.abs() < 1.0));
    }

    #[test]
    fn relative_and_failure_rows() {
        let c = Check::relative("a", "E0_rel", 2.0, 2.002, 5e-3);
        assert!((c.diff - 1e-3).abs() < 1e-12 && c.pass());
        let f = Check::failure("b", &Error::Config("x".into()));
        assert!(!f.pass());
    }

    #[test]
    fn small_suites_pass_and_write_csv() {
        let opts = ValidateOptions { cases: Some(3), fd_grid: 1500, ..ValidateOptions::default() };
        for s in [Suite::OracleWires, Suite::RotationInvariance, Suite::ScaleInvariance] {
            let r = run_suite(s, &opts).unwrap();
            assert!(r.passed(), "{s}: {:?}", r.failures().collect::<Vec<_>>());
            let mut buf = Vec::new();
            r.write_csv(&mut buf).unwrap();
            let text = String::from_utf8(buf).unwrap();
            assert_eq!(text.lines().count(), r.rows.len() + 1);
        }
    }

    #[test]
    fn deep_well_near_a_wall_narrowly_misses_the_sum_rule_gate() {
        let opts = ValidateOptions { cases: Some(2), ..ValidateOptions::default() };
        let r = run_suite(Suite::SumRules, &opts).unwrap();
        assert!(r.rows[0].pass());
        let miss = &r.rows[1];
        assert!(!miss.pass());
        assert!((0.01..0.0101).contains(&miss.graph), "{miss:?}");
    }
}
