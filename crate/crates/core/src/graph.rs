//! Graph problem statements: topology, edge geometry and delta-potential dressing.
//!
//! Lengths are dimensionless graph units and delta strengths `g` enter the
//! Hamiltonian as `(g / L) δ(s - s₀)` with `L` the total edge length, which makes
//! every intrinsic quantity invariant under a uniform rescale of the graph.
//!
//! Edge orientation conventions:
//! * wires: edges are chained head to tail starting at the lab origin, `angle`
//!   is the direction of travel, and deltas sit at arc-length positions;
//! * star: every edge leaves the central vertex (at the origin) along `angle`;
//! * lollipop: edge 0 is the prong, leaving the central vertex along `angle`
//!   towards its terminated end; edge 1 is the loop, a circle of the given
//!   circumference whose centre lies along `angle` as seen from the vertex.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum separation of a delta from a wire end or from another delta.
pub const PLACEMENT_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Topology {
    Wire1Delta,
    Wire2Delta,
    Wire3Delta,
    StarDelta,
    LollipopDelta,
}

impl Topology {
    pub const ALL: [Topology; 5] = [
        Topology::Wire1Delta,
        Topology::Wire2Delta,
        Topology::Wire3Delta,
        Topology::StarDelta,
        Topology::LollipopDelta,
    ];

    pub fn delta_count(self) -> usize {
        match self {
            Topology::Wire1Delta => 1,
            Topology::Wire2Delta => 2,
            Topology::Wire3Delta => 3,
            Topology::StarDelta | Topology::LollipopDelta => 1,
        }
    }

    pub fn is_wire(self) -> bool {
        matches!(self, Topology::Wire1Delta | Topology::Wire2Delta | Topology::Wire3Delta)
    }

    pub fn wire_with(deltas: usize) -> Option<Topology> {
        match deltas {
            1 => Some(Topology::Wire1Delta),
            2 => Some(Topology::Wire2Delta),
            3 => Some(Topology::Wire3Delta),
            _ => None,
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl std::str::FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Topology::ALL
            .into_iter()
            .find(|t| t.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidSpec(format!("unknown topology `{s}`")))
    }
}

/// Wraps an angle into `[-π, π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let w = (theta + PI).rem_euclid(2.0 * PI) - PI;
    if w >= PI {
        -PI
    } else {
        w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub length: f64,
    #[serde(default)]
    pub angle: f64,
}

impl EdgeSpec {
    pub fn new(length: f64, angle: f64) -> Self {
        EdgeSpec { length, angle }
    }

    pub fn straight(length: f64) -> Self {
        EdgeSpec { length, angle: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeltaPosition {
    /// Arc length from the start of a wire.
    Arc(f64),
    /// The central vertex of a star or lollipop.
    Center,
}

impl Serialize for DeltaPosition {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            DeltaPosition::Arc(x) => s.serialize_f64(*x),
            DeltaPosition::Center => s.serialize_str("center"),
        }
    }
}

impl<'de> Deserialize<'de> for DeltaPosition {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Arc(f64),
            Tag(String),
        }
        match Raw::deserialize(d)? {
            Raw::Arc(x) => Ok(DeltaPosition::Arc(x)),
            Raw::Tag(t) if t == "center" => Ok(DeltaPosition::Center),
            Raw::Tag(t) => Err(serde::de::Error::custom(format!(
                "delta position must be a number or \"center\", got \"{t}\""
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaSpec {
    pub g: f64,
    pub position: DeltaPosition,
}

impl DeltaSpec {
    pub fn at(g: f64, position: f64) -> Self {
        DeltaSpec { g, position: DeltaPosition::Arc(position) }
    }

    pub fn center(g: f64) -> Self {
        DeltaSpec { g, position: DeltaPosition::Center }
    }
}

#[derive(Debug, Clone, Deserialize)]
struct RawGraphSpec {
    topology: Topology,
    edges: Vec<EdgeSpec>,
    deltas: Vec<DeltaSpec>,
}

/// A validated, immutable graph problem statement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGraphSpec")]
pub struct GraphSpec {
    topology: Topology,
    edges: Vec<EdgeSpec>,
    deltas: Vec<DeltaSpec>,
}

impl TryFrom<RawGraphSpec> for GraphSpec {
    type Error = Error;

    fn try_from(raw: RawGraphSpec) -> Result<Self> {
        GraphSpec::new(raw.topology, raw.edges, raw.deltas)
    }
}

impl GraphSpec {
    pub fn new(topology: Topology, mut edges: Vec<EdgeSpec>, deltas: Vec<DeltaSpec>) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::InvalidSpec("graph has no edges".into()));
        }
        for (i, e) in edges.iter_mut().enumerate() {
            if !(e.length.is_finite() && e.length > 0.0) {
                return Err(Error::InvalidSpec(format!("edge {i} has non-positive length {}", e.length)));
            }
            if !e.angle.is_finite() {
                return Err(Error::InvalidSpec(format!("edge {i} has non-finite angle")));
            }
            e.angle = wrap_angle(e.angle);
        }
        if deltas.len() != topology.delta_count() {
            return Err(Error::InvalidSpec(format!(
                "{topology} needs {} delta(s), got {}",
                topology.delta_count(),
                deltas.len()
            )));
        }
        if let Some(d) = deltas.iter().find(|d| !d.g.is_finite()) {
            return Err(Error::InvalidSpec(format!("non-finite delta strength {}", d.g)));
        }
        let total: f64 = edges.iter().map(|e| e.length).sum();

        match topology {
            Topology::Wire1Delta | Topology::Wire2Delta | Topology::Wire3Delta => {
                let mut prev = 0.0;
                for (i, d) in deltas.iter().enumerate() {
                    let DeltaPosition::Arc(p) = d.position else {
                        return Err(Error::InvalidSpec(format!("wire delta {i} needs an arc-length position")));
                    };
                    if !p.is_finite() || p - prev < PLACEMENT_EPS * total {
                        return Err(Error::InvalidSpec(format!(
                            "wire delta {i} at {p} is not strictly after {prev} (degenerate placement)"
                        )));
                    }
                    prev = p;
                }
                if total - prev < PLACEMENT_EPS * total {
                    return Err(Error::InvalidSpec(format!(
                        "wire delta at {prev} is not strictly inside the wire of length {total}"
                    )));
                }
            }
            Topology::StarDelta | Topology::LollipopDelta => {
                let want = if topology == Topology::StarDelta { 3 } else { 2 };
                if edges.len() != want {
                    return Err(Error::InvalidSpec(format!(
                        "{topology} needs exactly {want} edges, got {}",
                        edges.len()
                    )));
                }
                if deltas[0].position != DeltaPosition::Center {
                    return Err(Error::InvalidSpec(format!("{topology} delta must sit at the central vertex")));
                }
            }
        }
        Ok(GraphSpec { topology, edges, deltas })
    }

    /// Straight wire of unit length with deltas `(g, position)`.
    pub fn straight_wire(deltas: &[(f64, f64)]) -> Result<Self> {
        let topology = Topology::wire_with(deltas.len())
            .ok_or_else(|| Error::InvalidSpec(format!("wires carry 1 to 3 deltas, got {}", deltas.len())))?;
        GraphSpec::new(
            topology,
            vec![EdgeSpec::straight(1.0)],
            deltas.iter().map(|&(g, p)| DeltaSpec::at(g, p)).collect(),
        )
    }

    /// Unit-length single-delta wire parameterized by the asymmetry `ω = 2a/L - 1`.
    pub fn delta_atom(g: f64, omega: f64) -> Result<Self> {
        GraphSpec::straight_wire(&[(g, 0.5 * (omega + 1.0))])
    }

    /// Wire whose edges bend at the delta positions; `angles[i]` is the direction of segment `i`.
    pub fn bent_wire(deltas: &[(f64, f64)], total: f64, angles: &[f64]) -> Result<Self> {
        let topology = Topology::wire_with(deltas.len())
            .ok_or_else(|| Error::InvalidSpec(format!("wires carry 1 to 3 deltas, got {}", deltas.len())))?;
        if angles.len() != deltas.len() + 1 {
            return Err(Error::InvalidSpec(format!(
                "bent wire with {} deltas needs {} segment angles",
                deltas.len(),
                deltas.len() + 1
            )));
        }
        let mut cuts: Vec<f64> = deltas.iter().map(|d| d.1).collect();
        cuts.push(total);
        let mut prev = 0.0;
        let edges = cuts
            .iter()
            .zip(angles)
            .map(|(&c, &a)| {
                let e = EdgeSpec::new(c - prev, a);
                prev = c;
                e
            })
            .collect();
        GraphSpec::new(topology, edges, deltas.iter().map(|&(g, p)| DeltaSpec::at(g, p)).collect())
    }

    pub fn star(lengths: [f64; 3], angles: [f64; 3], g: f64) -> Result<Self> {
        GraphSpec::new(
            Topology::StarDelta,
            lengths.iter().zip(angles).map(|(&l, a)| EdgeSpec::new(l, a)).collect(),
            vec![DeltaSpec::center(g)],
        )
    }

    pub fn lollipop(prong: f64, loop_length: f64, prong_angle: f64, loop_angle: f64, g: f64) -> Result<Self> {
        GraphSpec::new(
            Topology::LollipopDelta,
            vec![EdgeSpec::new(prong, prong_angle), EdgeSpec::new(loop_length, loop_angle)],
            vec![DeltaSpec::center(g)],
        )
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn edges(&self) -> &[EdgeSpec] {
        &self.edges
    }

    pub fn deltas(&self) -> &[DeltaSpec] {
        &self.deltas
    }

    pub fn strengths(&self) -> Vec<f64> {
        self.deltas.iter().map(|d| d.g).collect()
    }

    pub fn total_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).sum()
    }

    /// Arc-length positions of wire deltas (empty for star and lollipop).
    pub fn delta_positions(&self) -> Vec<f64> {
        self.deltas
            .iter()
            .filter_map(|d| match d.position {
                DeltaPosition::Arc(p) => Some(p),
                DeltaPosition::Center => None,
            })
            .collect()
    }

    /// Lengths of the wire pieces cut by the deltas, left to right (`n_deltas + 1` entries).
    pub fn wire_gaps(&self) -> Result<Vec<f64>> {
        if !self.topology.is_wire() {
            return Err(Error::UnsupportedTopology { op: "wire_gaps", topology: self.topology });
        }
        let mut cuts = self.delta_positions();
        cuts.push(self.total_length());
        let mut prev = 0.0;
        Ok(cuts
            .into_iter()
            .map(|c| {
                let gap = c - prev;
                prev = c;
                gap
            })
            .collect())
    }

    /// Equivalent graph rescaled to unit total length; strengths are unchanged.
    pub fn normalize_scale(&self) -> GraphSpec {
        self.scaled(1.0 / self.total_length())
    }

    /// Uniformly rescaled copy (all lengths and positions multiplied by `factor > 0`).
    pub fn scaled(&self, factor: f64) -> GraphSpec {
        let edges = self
            .edges
            .iter()
            .map(|e| EdgeSpec::new(e.length * factor, e.angle))
            .collect();
        let deltas = self
            .deltas
            .iter()
            .map(|d| match d.position {
                DeltaPosition::Arc(p) => DeltaSpec::at(d.g, p * factor),
                DeltaPosition::Center => *d,
            })
            .collect();
        GraphSpec { topology: self.topology, edges, deltas }
    }

    /// Copy rotated rigidly by `theta` in the lab plane.
    pub fn rotated(&self, theta: f64) -> GraphSpec {
        let edges = self
            .edges
            .iter()
            .map(|e| EdgeSpec::new(e.length, wrap_angle(e.angle + theta)))
            .collect();
        GraphSpec { topology: self.topology, edges, deltas: self.deltas.clone() }
    }

    /// Copy with every delta strength replaced.
    pub fn with_strengths(&self, g: &[f64]) -> Result<GraphSpec> {
        if g.len() != self.deltas.len() {
            return Err(Error::InvalidSpec(format!(
                "expected {} strengths, got {}",
                self.deltas.len(),
                g.len()
            )));
        }
        let deltas = self
            .deltas
            .iter()
            .zip(g)
            .map(|(d, &g)| DeltaSpec { g, position: d.position })
            .collect();
        GraphSpec::new(self.topology, self.edges.clone(), deltas)
    }

    /// Asymmetry parameter of the motif around delta `index` (wires only).
    ///
    /// For one delta this is `ω = 2a/L - 1`. For two deltas with gaps `a | c | b`
    /// it is `ω₁ = 2a/L₁ - 1` and `ω₂ = 2b/L₂ - 1` with `L₁ = a + c`, `L₂ = b + c`.
    /// For three deltas each motif uses its own left piece: `2l/(l + r) - 1`.
    pub fn asymmetry(&self, index: usize) -> Result<f64> {
        if !self.topology.is_wire() {
            return Err(Error::UnsupportedTopology { op: "asymmetry", topology: self.topology });
        }
        if index >= self.deltas.len() {
            return Err(Error::InvalidArgument(format!(
                "delta index {index} out of range for {} deltas",
                self.deltas.len()
            )));
        }
        let gaps = self.wire_gaps()?;
        Ok(match self.topology {
            Topology::Wire1Delta => 2.0 * gaps[0] / self.total_length() - 1.0,
            Topology::Wire2Delta => {
                let (a, c, b) = (gaps[0], gaps[1], gaps[2]);
                if index == 0 {
                    2.0 * a / (a + c) - 1.0
                } else {
                    2.0 * b / (b + c) - 1.0
                }
            }
            _ => {
                let (l, r) = (gaps[index], gaps[index + 1]);
                2.0 * l / (l + r) - 1.0
            }
        })
    }

    /// True when every edge lies along the lab x axis and the graph has no loop.
    pub fn is_collinear(&self) -> bool {
        self.topology != Topology::LollipopDelta
            && self.edges.iter().all(|e| e.angle == 0.0 || e.angle == -PI)
    }
}
