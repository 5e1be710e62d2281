//! Grid scans and seeded Monte Carlo ensembles of dressed graphs.
//!
//! Every sample is evaluated independently and written into the slot of its
//! index, so parallel runs reproduce serial ones bit for bit. Monte Carlo
//! sample `i` draws from its own ChaCha8 stream (`seed`, stream `i`).

use std::f64::consts::PI;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigensolve::DEFAULT_STATES;
use crate::error::{Error, Result};
use crate::graph::{DeltaPosition, GraphSpec, Topology};
use crate::moments::QuadOptions;
use crate::report::{analyze, AnalysisOptions, ResponseReport};

fn default_states() -> usize {
    DEFAULT_STATES
}

fn default_order() -> usize {
    QuadOptions::default().order
}

/// One scanned parameter and its values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "param", rename_all = "snake_case")]
pub enum ScanAxis {
    /// Asymmetry `ω = 2a/L − 1` of a single-delta wire.
    Omega { values: Vec<f64> },
    Strength { delta: usize, values: Vec<f64> },
    /// Arc-length position of a wire delta.
    Position { delta: usize, values: Vec<f64> },
    EdgeLength { edge: usize, values: Vec<f64> },
    Angle { edge: usize, values: Vec<f64> },
}

impl ScanAxis {
    fn values(&self) -> &[f64] {
        match self {
            ScanAxis::Omega { values }
            | ScanAxis::Strength { values, .. }
            | ScanAxis::Position { values, .. }
            | ScanAxis::EdgeLength { values, .. }
            | ScanAxis::Angle { values, .. } => values,
        }
    }

    fn apply(&self, spec: &GraphSpec, v: f64) -> Result<GraphSpec> {
        let mut edges = spec.edges().to_vec();
        let mut deltas = spec.deltas().to_vec();
        let check = |i: usize, n: usize, what: &str| {
            if i < n {
                Ok(())
            } else {
                Err(Error::Config(format!("{what} index {i} out of range ({n} available)")))
            }
        };
        match *self {
            ScanAxis::Omega { .. } => {
                if spec.topology() != Topology::Wire1Delta || edges.len() != 1 {
                    return Err(Error::Config("omega scans need a straight single-delta wire".into()));
                }
                deltas[0].position = DeltaPosition::Arc(0.5 * (v + 1.0) * spec.total_length());
            }
            ScanAxis::Strength { delta, .. } => {
                check(delta, deltas.len(), "delta")?;
                deltas[delta].g = v;
            }
            ScanAxis::Position { delta, .. } => {
                check(delta, deltas.len(), "delta")?;
                if !spec.topology().is_wire() || edges.len() != 1 {
                    return Err(Error::Config("position scans need a straight wire".into()));
                }
                deltas[delta].position = DeltaPosition::Arc(v);
            }
            ScanAxis::EdgeLength { edge, .. } => {
                check(edge, edges.len(), "edge")?;
                if spec.topology().is_wire() {
                    return Err(Error::Config("edge-length scans apply to star and lollipop graphs".into()));
                }
                edges[edge].length = v;
            }
            ScanAxis::Angle { edge, .. } => {
                check(edge, edges.len(), "edge")?;
                edges[edge].angle = v;
            }
        }
        GraphSpec::new(spec.topology(), edges, deltas).map_err(|e| Error::Config(format!("scan point is invalid: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub base: GraphSpec,
    /// Row-major: the first axis varies slowest.
    pub axes: Vec<ScanAxis>,
    #[serde(default = "default_states")]
    pub n_states: usize,
    #[serde(default = "default_order")]
    pub quad_order: usize,
}

impl ScanConfig {
    /// The one-delta atom grid: `g = −12, −11.5, …, 12.5` by `ω_i = −1 + 2(i + 1)/101`, `i < 100`.
    pub fn atom_grid() -> ScanConfig {
        ScanConfig {
            base: GraphSpec::delta_atom(-1.0, 0.0).expect("valid atom"),
            axes: vec![
                ScanAxis::Strength { delta: 0, values: (0..50).map(|j| -12.0 + 0.5 * j as f64).collect() },
                ScanAxis::Omega { values: (0..100).map(|i| -1.0 + 2.0 * (i as f64 + 1.0) / 101.0).collect() },
            ],
            n_states: DEFAULT_STATES,
            quad_order: default_order(),
        }
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.values().len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Every grid point's spec in row-major order; any invalid point is a config error.
    pub fn specs(&self) -> Result<Vec<GraphSpec>> {
        if self.axes.is_empty() || self.axes.iter().any(|a| a.values().is_empty()) {
            return Err(Error::Config("scan grids must be nonempty".into()));
        }
        if let Some(v) = self.axes.iter().flat_map(|a| a.values()).find(|v| !v.is_finite()) {
            return Err(Error::Config(format!("non-finite grid value {v}")));
        }
        let mut specs = vec![self.base.clone()];
        for axis in &self.axes {
            let mut next = Vec::with_capacity(specs.len() * axis.values().len());
            for s in &specs {
                for &v in axis.values() {
                    next.push(axis.apply(s, v)?);
                }
            }
            specs = next;
        }
        Ok(specs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum McFamily {
    /// Wire with `deltas` deltas; `bent` draws every segment direction after the first.
    Wire { deltas: usize, bent: bool },
    Star,
    Lollipop,
}

fn default_strength() -> [f64; 2] {
    [-12.0, 0.0]
}

fn default_unit() -> [f64; 2] {
    [0.0, 1.0]
}

fn default_length() -> [f64; 2] {
    [0.01, 1.0]
}

fn default_angle() -> [f64; 2] {
    [-PI, PI]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub family: McFamily,
    pub samples: usize,
    pub seed: u64,
    #[serde(default = "default_states")]
    pub n_states: usize,
    #[serde(default = "default_order")]
    pub quad_order: usize,
    /// Uniform range `[lo, hi)` of every delta strength.
    #[serde(default = "default_strength")]
    pub strength: [f64; 2],
    /// Uniform range of wire delta positions as a fraction of the (unit) length.
    #[serde(default = "default_unit")]
    pub position: [f64; 2],
    /// Uniform range of star and lollipop edge lengths.
    #[serde(default = "default_length")]
    pub length: [f64; 2],
    #[serde(default = "default_angle")]
    pub angle: [f64; 2],
    /// Probability that a sample is left bare (`g = 0`).
    #[serde(default)]
    pub bare_fraction: f64,
}

impl McConfig {
    pub fn new(family: McFamily, samples: usize, seed: u64) -> McConfig {
        McConfig {
            family,
            samples,
            seed,
            n_states: DEFAULT_STATES,
            quad_order: default_order(),
            strength: default_strength(),
            position: default_unit(),
            length: default_length(),
            angle: default_angle(),
            bare_fraction: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::Config("sample count must be at least 1".into()));
        }
        for (name, r) in [("strength", self.strength), ("position", self.position), ("length", self.length), ("angle", self.angle)] {
            if !(r[0].is_finite() && r[1].is_finite() && r[0] < r[1]) {
                return Err(Error::Config(format!("{name} range [{}, {}) is not ordered", r[0], r[1])));
            }
        }
        if !(0.0..=1.0).contains(&self.position[0]) || self.position[1] > 1.0 {
            return Err(Error::Config("position range must lie within [0, 1]".into()));
        }
        if self.length[0] <= 0.0 {
            return Err(Error::Config("length range must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.bare_fraction) {
            return Err(Error::Config("bare_fraction must lie in [0, 1]".into()));
        }
        if let McFamily::Wire { deltas, .. } = self.family {
            if !(1..=3).contains(&deltas) {
                return Err(Error::Config(format!("wires carry 1 to 3 deltas, got {deltas}")));
            }
        }
        Ok(())
    }

    /// The graph drawn for sample `index`.
    pub fn sample(&self, index: usize) -> Result<GraphSpec> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        let mut uniform = |r: [f64; 2]| rng.gen_range(r[0]..r[1]);
        let bare = self.bare_fraction > 0.0 && uniform([0.0, 1.0]) < self.bare_fraction;
        let strength = |u: &mut dyn FnMut([f64; 2]) -> f64| if bare { 0.0 } else { u(self.strength) };
        match self.family {
            McFamily::Wire { deltas, bent } => {
                let mut pos: Vec<f64> = (0..deltas).map(|_| uniform(self.position)).collect();
                pos.sort_by(f64::total_cmp);
                let g: Vec<f64> = (0..deltas).map(|_| strength(&mut uniform)).collect();
                let pairs: Vec<(f64, f64)> = g.into_iter().zip(pos).collect();
                if bent {
                    let mut angles = vec![0.0];
                    angles.extend((0..deltas).map(|_| uniform(self.angle)));
                    GraphSpec::bent_wire(&pairs, 1.0, &angles)
                } else {
                    GraphSpec::straight_wire(&pairs)
                }
            }
            McFamily::Star => {
                let lengths = [uniform(self.length), uniform(self.length), uniform(self.length)];
                let angles = [uniform(self.angle), uniform(self.angle), uniform(self.angle)];
                let g = strength(&mut uniform);
                GraphSpec::star(lengths, angles, g)
            }
            McFamily::Lollipop => {
                let (prong, ring) = (uniform(self.length), uniform(self.length));
                let (pa, la) = (uniform(self.angle), uniform(self.angle));
                let g = strength(&mut uniform);
                GraphSpec::lollipop(prong, ring, pa, la, g)
            }
        }
    }
}

/// Per-graph figures of merit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// Lab `β_xxx` (signed on the x axis, the `θ*` maximum otherwise).
    pub beta: f64,
    pub beta_norm: f64,
    pub theta_star: f64,
    /// Lab `γ_xxxx` (on the x axis), else its largest value over frame angles.
    pub gamma: f64,
    /// Smallest `γ_xxxx` over frame angles (equal to `gamma` on the x axis).
    pub gamma_min: f64,
    pub gamma_norm: f64,
    pub x: f64,
    pub e: f64,
    pub fg: f64,
    pub beta3: f64,
    pub beta4: f64,
    pub gamma3: f64,
    pub gamma4: f64,
    /// Ground-row sum-rule residual with all states, and truncated to 3 and 5.
    pub sum_rule: f64,
    pub sum_rule_m3: f64,
    pub sum_rule_m5: f64,
    pub bound_count: usize,
}

impl Metrics {
    pub fn from_report(r: &ResponseReport) -> Metrics {
        let collinear = r.spec.is_collinear();
        let at = |m: usize| r.sum_rule_residuals[m.min(r.sum_rule_residuals.len()) - 1];
        Metrics {
            beta: r.beta_xxx(),
            beta_norm: r.beta.norm,
            theta_star: r.beta.theta_star,
            gamma: r.gamma_xxxx(),
            gamma_min: if collinear { r.gamma.components.xxxx } else { r.gamma.min },
            gamma_norm: r.gamma.norm,
            x: r.tla.x,
            e: r.tla.e,
            fg: r.tla.fg,
            beta3: r.tla.beta3,
            beta4: r.tla.beta4,
            gamma3: r.tla.gamma3,
            gamma4: r.tla.gamma4,
            sum_rule: at(r.sum_rule_residuals.len()),
            sum_rule_m3: at(3),
            sum_rule_m5: at(5),
            bound_count: r.bound_count,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub index: usize,
    pub spec: GraphSpec,
    pub metrics: Option<Metrics>,
    /// Error kind and message when the sample could not be evaluated.
    pub failure: Option<String>,
}

impl RunRecord {
    pub fn ok(&self) -> bool {
        self.metrics.is_some()
    }
}

fn evaluate(index: usize, spec: Result<GraphSpec>, opts: &AnalysisOptions) -> RunRecord {
    let fail = |spec: GraphSpec, e: Error| RunRecord { index, spec, metrics: None, failure: Some(format!("{}: {e}", e.kind())) };
    match spec {
        Ok(spec) => match analyze(&spec, opts) {
            Ok(a) => RunRecord { index, metrics: Some(Metrics::from_report(&a.report)), spec, failure: None },
            Err(e) => fail(spec, e),
        },
        // an unplaceable draw still occupies its slot; keep a harmless stand-in spec
        Err(e) => fail(GraphSpec::delta_atom(0.0, 0.0).expect("valid atom"), e),
    }
}

fn options(n_states: usize, quad_order: usize) -> AnalysisOptions {
    AnalysisOptions { n_states, quad: QuadOptions { order: quad_order, ..QuadOptions::default() }, ..AnalysisOptions::default() }
}

/// One record per grid point, in row-major order; failed points are kept.
pub fn run_scan(cfg: &ScanConfig) -> Result<Vec<RunRecord>> {
    let specs = cfg.specs()?;
    let opts = options(cfg.n_states, cfg.quad_order);
    Ok(specs.into_par_iter().enumerate().map(|(i, s)| evaluate(i, Ok(s), &opts)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McOutcome {
    pub records: Vec<RunRecord>,
    /// Largest `|β|`.
    pub best_beta: Option<RunRecord>,
    /// Largest `γ`.
    pub best_gamma: Option<RunRecord>,
    /// Smallest `γ` over frame angles.
    pub least_gamma: Option<RunRecord>,
}

/// Successful record maximizing `key`; ties keep the lowest index.
pub fn extremal(records: &[RunRecord], key: impl Fn(&Metrics) -> f64) -> Option<RunRecord> {
    let mut best: Option<(&RunRecord, f64)> = None;
    for r in records {
        if let Some(m) = &r.metrics {
            let k = key(m);
            if k.is_finite() && best.is_none_or(|(_, b)| k > b) {
                best = Some((r, k));
            }
        }
    }
    best.map(|(r, _)| r.clone())
}

pub fn run_mc(cfg: &McConfig) -> Result<McOutcome> {
    cfg.validate()?;
    let opts = options(cfg.n_states, cfg.quad_order);
    let records: Vec<RunRecord> = (0..cfg.samples).into_par_iter().map(|i| evaluate(i, cfg.sample(i), &opts)).collect();
    Ok(McOutcome {
        best_beta: extremal(&records, |m| m.beta.abs()),
        best_gamma: extremal(&records, |m| m.gamma),
        least_gamma: extremal(&records, |m| -m.gamma_min),
        records,
    })
}

/// Column names accepted by [`scatter_export`].
pub const FIELDS: &[&str] = &[
    "index", "topology", "ok", "failure", "g0", "g1", "g2", "p0", "p1", "p2", "omega", "length0", "length1", "length2",
    "angle0", "angle1", "angle2", "beta", "beta_norm", "theta_star", "gamma", "gamma_min", "gamma_norm", "X", "E",
    "fG", "beta3", "beta4", "gamma3", "gamma4", "sum_rule", "sum_rule_m3", "sum_rule_m5", "bound_count",
];

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

impl RunRecord {
    /// One CSV cell; `None` for an unknown field name.
    pub fn field(&self, name: &str) -> Option<String> {
        let nth = |v: Vec<f64>, i: usize| v.get(i).map(|x| num(*x)).unwrap_or_default();
        let metric = |f: fn(&Metrics) -> f64| self.metrics.as_ref().map(|m| num(f(m))).unwrap_or_default();
        let cell = match name {
            "index" => self.index.to_string(),
            "topology" => self.spec.topology().to_string(),
            "ok" => self.ok().to_string(),
            "failure" => self.failure.clone().unwrap_or_default().replace([',', '\n'], ";"),
            "omega" => {
                if self.spec.topology() == Topology::Wire1Delta {
                    self.spec.asymmetry(0).map(num).unwrap_or_default()
                } else {
                    String::new()
                }
            }
            "bound_count" => self.metrics.as_ref().map(|m| m.bound_count.to_string()).unwrap_or_default(),
            "beta" => metric(|m| m.beta),
            "beta_norm" => metric(|m| m.beta_norm),
            "theta_star" => metric(|m| m.theta_star),
            "gamma" => metric(|m| m.gamma),
            "gamma_min" => metric(|m| m.gamma_min),
            "gamma_norm" => metric(|m| m.gamma_norm),
            "X" => metric(|m| m.x),
            "E" => metric(|m| m.e),
            "fG" => metric(|m| m.fg),
            "beta3" => metric(|m| m.beta3),
            "beta4" => metric(|m| m.beta4),
            "gamma3" => metric(|m| m.gamma3),
            "gamma4" => metric(|m| m.gamma4),
            "sum_rule" => metric(|m| m.sum_rule),
            "sum_rule_m3" => metric(|m| m.sum_rule_m3),
            "sum_rule_m5" => metric(|m| m.sum_rule_m5),
            _ => {
                let (head, i) = name.split_at(name.len().checked_sub(1)?);
                let i: usize = i.parse().ok()?;
                match head {
                    "g" => nth(self.spec.strengths(), i),
                    "p" => nth(self.spec.delta_positions(), i),
                    "length" => nth(self.spec.edges().iter().map(|e| e.length).collect(), i),
                    "angle" => nth(self.spec.edges().iter().map(|e| e.angle).collect(), i),
                    _ => return None,
                }
            }
        };
        Some(cell)
    }
}

/// Writes the named columns of every record, header first.
pub fn scatter_export(records: &[RunRecord], fields: &[&str], mut out: impl Write) -> Result<()> {
    if fields.is_empty() {
        return Err(Error::Config("no fields requested".into()));
    }
    if records.is_empty() {
        return Err(Error::Config("no records to export".into()));
    }
    if let Some(bad) = fields.iter().find(|f| !FIELDS.contains(f)) {
        return Err(Error::Config(format!("unknown field `{bad}`; known fields: {}", FIELDS.join(", "))));
    }
    let io = |e: std::io::Error| Error::Config(format!("write failed: {e}"));
    writeln!(out, "{}", fields.join(",")).map_err(io)?;
    for r in records {
        let row: Vec<String> = fields.iter().map(|f| r.field(f).unwrap_or_default()).collect();
        writeln!(out, "{}", row.join(",")).map_err(io)?;
    }
    Ok(())
}

/// Provenance written next to ensemble outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub kind: String,
    pub version: String,
    pub seed: Option<u64>,
    pub records: usize,
    pub failures: usize,
    pub sampling: String,
    pub config: serde_json::Value,
    pub elapsed_seconds: f64,
    pub unix_time: u64,
}

impl RunMetadata {
    pub fn new(kind: &str, seed: Option<u64>, records: &[RunRecord], config: serde_json::Value, elapsed_seconds: f64) -> Self {
        RunMetadata {
            kind: kind.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed,
            records: records.len(),
            failures: records.iter().filter(|r| !r.ok()).count(),
            sampling: if seed.is_some() { "uniform over the configured ranges".into() } else { "deterministic grid".into() },
            config,
            elapsed_seconds,
            unix_time: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }
}
