//! Metric layout of a graph: vertices, delta-free pieces between them, and the
//! planar embedding of every piece used for transition moments.

use std::f64::consts::PI;

use crate::graph::{DeltaPosition, GraphSpec, Topology};

pub type Point = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VertexKind {
    /// Hard wall: the wavefunction vanishes.
    Wall,
    /// Matching vertex with delta coupling `c = g/L` (zero for a plain joint).
    Junction { coupling: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vertex {
    pub kind: VertexKind,
    pub position: Point,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Geometry {
    /// `origin + t·dir` with `t` the arc length into the chunk.
    Line { origin: Point, dir: Point },
    /// Counter-clockwise arc starting at polar angle `phase` about `center`.
    Arc { center: Point, radius: f64, phase: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chunk {
    pub s0: f64,
    pub s1: f64,
    pub geometry: Geometry,
}

/// A potential-free stretch from vertex `u` (at `s = 0`) to vertex `v` (at `s = length`).
#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub u: usize,
    pub v: usize,
    pub length: f64,
    pub chunks: Vec<Chunk>,
}

/// The part of a graph edge covered by one piece.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeSegment {
    pub piece: usize,
    pub edge_s0: f64,
    pub edge_s1: f64,
    pub piece_s0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub vertices: Vec<Vertex>,
    pub pieces: Vec<Piece>,
    pub edges: Vec<Vec<EdgeSegment>>,
    pub total_length: f64,
}

fn unit(angle: f64) -> Point {
    [angle.cos(), angle.sin()]
}

fn along(p: Point, d: Point, t: f64) -> Point {
    [p[0] + t * d[0], p[1] + t * d[1]]
}

impl Layout {
    pub fn new(spec: &GraphSpec) -> Layout {
        match spec.topology() {
            Topology::StarDelta => Layout::star(spec),
            Topology::LollipopDelta => Layout::lollipop(spec),
            _ => Layout::wire(spec),
        }
    }

    fn wire(spec: &GraphSpec) -> Layout {
        let total = spec.total_length();
        let edges = spec.edges();
        // arc-length breakpoints of the edges, and of the pieces
        let mut joints = vec![0.0];
        for e in edges {
            joints.push(joints.last().unwrap() + e.length);
        }
        *joints.last_mut().unwrap() = total;
        let mut starts = vec![[0.0, 0.0]];
        for e in edges {
            let p = *starts.last().unwrap();
            starts.push(along(p, unit(e.angle), e.length));
        }
        let point_at = |arc: f64| {
            let i = (0..edges.len()).rfind(|&i| joints[i] <= arc).unwrap_or(0);
            along(starts[i], unit(edges[i].angle), arc - joints[i])
        };

        let mut cuts = vec![0.0];
        cuts.extend(spec.delta_positions());
        cuts.push(total);
        let mut vertices = vec![Vertex { kind: VertexKind::Wall, position: [0.0, 0.0] }];
        for d in spec.deltas() {
            if let DeltaPosition::Arc(p) = d.position {
                vertices.push(Vertex { kind: VertexKind::Junction { coupling: d.g / total }, position: point_at(p) });
            }
        }
        vertices.push(Vertex { kind: VertexKind::Wall, position: point_at(total) });

        let pieces = cuts
            .windows(2)
            .enumerate()
            .map(|(j, w)| {
                let (a, b) = (w[0], w[1]);
                let chunks = (0..edges.len())
                    .filter_map(|i| {
                        let lo = joints[i].max(a);
                        let hi = joints[i + 1].min(b);
                        (hi > lo).then(|| Chunk {
                            s0: lo - a,
                            s1: hi - a,
                            geometry: Geometry::Line { origin: along(starts[i], unit(edges[i].angle), lo - joints[i]), dir: unit(edges[i].angle) },
                        })
                    })
                    .collect();
                Piece { u: j, v: j + 1, length: b - a, chunks }
            })
            .collect();

        let edge_map = (0..edges.len())
            .map(|i| {
                cuts.windows(2)
                    .enumerate()
                    .filter_map(|(j, w)| {
                        let lo = joints[i].max(w[0]);
                        let hi = joints[i + 1].min(w[1]);
                        (hi > lo).then(|| EdgeSegment {
                            piece: j,
                            edge_s0: lo - joints[i],
                            edge_s1: hi - joints[i],
                            piece_s0: lo - w[0],
                        })
                    })
                    .collect()
            })
            .collect();
        Layout { vertices, pieces, edges: edge_map, total_length: total }
    }

    fn star(spec: &GraphSpec) -> Layout {
        let total = spec.total_length();
        let mut vertices = vec![Vertex {
            kind: VertexKind::Junction { coupling: spec.deltas()[0].g / total },
            position: [0.0, 0.0],
        }];
        let mut pieces = Vec::new();
        let mut edge_map = Vec::new();
        for (i, e) in spec.edges().iter().enumerate() {
            let dir = unit(e.angle);
            vertices.push(Vertex { kind: VertexKind::Wall, position: along([0.0, 0.0], dir, e.length) });
            pieces.push(Piece {
                u: 0,
                v: i + 1,
                length: e.length,
                chunks: vec![Chunk { s0: 0.0, s1: e.length, geometry: Geometry::Line { origin: [0.0, 0.0], dir } }],
            });
            edge_map.push(vec![EdgeSegment { piece: i, edge_s0: 0.0, edge_s1: e.length, piece_s0: 0.0 }]);
        }
        Layout { vertices, pieces, edges: edge_map, total_length: total }
    }

    fn lollipop(spec: &GraphSpec) -> Layout {
        let total = spec.total_length();
        let (prong, ring) = (spec.edges()[0], spec.edges()[1]);
        let dir = unit(prong.angle);
        let radius = ring.length / (2.0 * PI);
        let center = along([0.0, 0.0], unit(ring.angle), radius);
        let vertices = vec![
            Vertex { kind: VertexKind::Junction { coupling: spec.deltas()[0].g / total }, position: [0.0, 0.0] },
            Vertex { kind: VertexKind::Wall, position: along([0.0, 0.0], dir, prong.length) },
        ];
        let pieces = vec![
            Piece {
                u: 0,
                v: 1,
                length: prong.length,
                chunks: vec![Chunk { s0: 0.0, s1: prong.length, geometry: Geometry::Line { origin: [0.0, 0.0], dir } }],
            },
            Piece {
                u: 0,
                v: 0,
                length: ring.length,
                chunks: vec![Chunk { s0: 0.0, s1: ring.length, geometry: Geometry::Arc { center, radius, phase: ring.angle + PI } }],
            },
        ];
        let edges = vec![
            vec![EdgeSegment { piece: 0, edge_s0: 0.0, edge_s1: prong.length, piece_s0: 0.0 }],
            vec![EdgeSegment { piece: 1, edge_s0: 0.0, edge_s1: ring.length, piece_s0: 0.0 }],
        ];
        Layout { vertices, pieces, edges, total_length: total }
    }

    /// Lab-frame position of arc parameter `s` on `piece`.
    pub fn point(&self, piece: usize, s: f64) -> Point {
        let p = &self.pieces[piece];
        let c = p.chunks.iter().find(|c| s <= c.s1).unwrap_or_else(|| p.chunks.last().unwrap());
        chunk_point(c, s)
    }

    /// Maps an edge coordinate to `(piece, s)`; `None` when `s` lies outside the edge.
    pub fn locate(&self, edge: usize, s: f64) -> Option<(usize, f64)> {
        let segs = self.edges.get(edge)?;
        let len = segs.last()?.edge_s1;
        let slack = 1e-12 * self.total_length;
        if !(-slack..=len + slack).contains(&s) {
            return None;
        }
        let s = s.clamp(0.0, len);
        let seg = segs.iter().find(|g| s <= g.edge_s1).unwrap_or(segs.last()?);
        Some((seg.piece, seg.piece_s0 + (s - seg.edge_s0)))
    }

    /// Piece ends meeting at vertex `v`, as `(piece, at_start)`.
    pub fn incident(&self, v: usize) -> Vec<(usize, bool)> {
        let mut out = Vec::new();
        for (i, p) in self.pieces.iter().enumerate() {
            if p.u == v {
                out.push((i, true));
            }
            if p.v == v {
                out.push((i, false));
            }
        }
        out
    }

    /// True when every chunk lies on the lab x axis.
    pub fn is_planar_x(&self) -> bool {
        self.pieces.iter().flat_map(|p| &p.chunks).all(|c| match c.geometry {
            Geometry::Line { origin, dir } => origin[1] == 0.0 && dir[1].abs() < 1e-15,
            Geometry::Arc { .. } => false,
        })
    }
}

pub fn chunk_point(c: &Chunk, s: f64) -> Point {
    let t = s - c.s0;
    match c.geometry {
        Geometry::Line { origin, dir } => along(origin, dir, t),
        Geometry::Arc { center, radius, phase } => {
            let a = phase + t / radius;
            [center[0] + radius * a.cos(), center[1] + radius * a.sin()]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn straight_wire_layout() {
        let spec = GraphSpec::straight_wire(&[(-2.0, 0.3), (1.0, 0.7)]).unwrap();
        let l = Layout::new(&spec);
        assert_eq!(l.pieces.len(), 3);
        assert_eq!(l.vertices.len(), 4);
        assert_eq!(l.vertices[1].kind, VertexKind::Junction { coupling: -2.0 });
        assert_abs_diff_eq!(l.point(1, 0.1)[0], 0.4, epsilon = 1e-15);
        assert_eq!(l.locate(0, 0.8), Some((2, 0.8 - 0.7)));
        assert!(l.locate(0, 1.2).is_none());
        assert!(l.is_planar_x());
    }

    #[test]
    fn bent_wire_bends_at_the_delta() {
        let spec = GraphSpec::bent_wire(&[(-2.0, 0.4)], 1.0, &[0.0, PI / 2.0]).unwrap();
        let l = Layout::new(&spec);
        let end = l.point(1, 0.6);
        assert_abs_diff_eq!(end[0], 0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(end[1], 0.6, epsilon = 1e-15);
        assert_eq!(l.locate(1, 0.25), Some((1, 0.25)));
        assert!(!l.is_planar_x());
    }

    #[test]
    fn lollipop_loop_closes_at_vertex() {
        let spec = GraphSpec::lollipop(0.4, 0.6, 0.3, -2.0, -1.0).unwrap();
        let l = Layout::new(&spec);
        for s in [0.0, 0.6] {
            let p = l.point(1, s);
            assert_abs_diff_eq!(p[0], 0.0, epsilon = 1e-14);
            assert_abs_diff_eq!(p[1], 0.0, epsilon = 1e-14);
        }
        let far = l.point(1, 0.3);
        let r = 0.6 / PI;
        assert_abs_diff_eq!(far[0], r * (-2.0f64).cos(), epsilon = 1e-14);
        assert_eq!(l.incident(0), vec![(0, true), (1, true), (1, false)]);
    }
}
