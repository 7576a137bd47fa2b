//! Triangulated piecewise-Euclidean disks given intrinsically.
//!
//! A [`PlanarComplex`] stores combinatorics (triangles, counterclockwise in
//! the abstract planar drawing) plus one length per edge. All geometry is
//! derived from the lengths: per-face charts by the law of cosines, gluing
//! isometries along shared edges, angle sums θ(v), and the boundary cycle.
//! No global coordinates exist — a complex with an inner vertex of angle sum
//! above 2π cannot be drawn flat. `flat_coordinates` is an optional
//! certificate for the flat subclass (isometrically embedded simple
//! polygons) and is what the exact visibility oracle consumes.

pub mod io;

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::geom::{v2, wrap_angle, Iso2, Vec2};

/// Numeric tolerances. `eps_len` is interpreted relative to the length scale
/// of the instance where a scale is needed; `eps_angle` is absolute radians.
#[derive(Clone, Copy, Debug)]
pub struct Tol {
    pub eps_len: f64,
    pub eps_angle: f64,
}

impl Default for Tol {
    fn default() -> Self {
        Tol { eps_len: 1e-9, eps_angle: 1e-9 }
    }
}

/// Angle-sum slack for accepting a complex as nonpositively curved:
/// θ(v) ≥ 2π − CURVATURE_SLACK at every inner vertex.
pub const CURVATURE_SLACK: f64 = 1e-7;

/// Canonical isometric placement of one triangle: corner 0 at the origin,
/// corner 1 on the positive x-axis, corner 2 in the upper half-plane.
#[derive(Clone, Debug)]
pub struct FaceChart {
    pub corners: [Vec2; 3],
}

impl FaceChart {
    fn from_lengths(l01: f64, l12: f64, l20: f64) -> FaceChart {
        let x2 = (l01 * l01 + l20 * l20 - l12 * l12) / (2.0 * l01);
        let y2 = (l20 * l20 - x2 * x2).max(0.0).sqrt();
        FaceChart {
            corners: [Vec2::ZERO, v2(l01, 0.0), v2(x2, y2)],
        }
    }

    pub fn barycentric(&self, p: Vec2) -> [f64; 3] {
        let [a, b, c] = self.corners;
        let den = (b - a).cross(c - a);
        let b0 = (b - p).cross(c - p) / den;
        let b1 = (c - p).cross(a - p) / den;
        [b0, b1, 1.0 - b0 - b1]
    }

    pub fn from_barycentric(&self, b: [f64; 3]) -> Vec2 {
        let [p0, p1, p2] = self.corners;
        v2(
            b[0] * p0.x + b[1] * p1.x + b[2] * p2.x,
            b[0] * p0.y + b[1] * p1.y + b[2] * p2.y,
        )
    }
}

/// Intrinsic location of a point: a vertex, a point inside an edge
/// (parameter measured from the lower-id endpoint), or a point inside a
/// face in barycentric coordinates.
#[derive(Clone, Debug, PartialEq)]
pub enum PointOnComplex {
    Vertex(usize),
    EdgePoint { edge: (usize, usize), t: f64 },
    FacePoint { face: usize, bary: [f64; 3] },
}

impl PointOnComplex {
    pub fn vertex(v: usize) -> Self {
        PointOnComplex::Vertex(v)
    }

    /// Edge point with the parameter measured from the lower-id endpoint;
    /// accepts the endpoints in either order.
    pub fn edge_point(u: usize, v: usize, t: f64) -> Self {
        if u <= v {
            PointOnComplex::EdgePoint { edge: (u, v), t }
        } else {
            PointOnComplex::EdgePoint { edge: (v, u), t: 1.0 - t }
        }
    }

    pub fn face_point(face: usize, bary: [f64; 3]) -> Self {
        PointOnComplex::FacePoint { face, bary }
    }

    /// Total order used for deterministic tie-breaking.
    pub fn sort_key(&self) -> (u8, usize, usize, u64) {
        match self {
            PointOnComplex::Vertex(v) => (0, *v, 0, 0),
            PointOnComplex::EdgePoint { edge, t } => (1, edge.0, edge.1, t.to_bits()),
            PointOnComplex::FacePoint { face, bary } => (2, *face, 0, bary[0].to_bits()),
        }
    }
}

/// Machine-readable validation violation codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationCode {
    TriangleIneq,
    NotDisk,
    Orientation,
    Curvature,
    CoordMismatch,
}

impl ViolationCode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ViolationCode::TriangleIneq => "TRIANGLE_INEQ",
            ViolationCode::NotDisk => "NOT_DISK",
            ViolationCode::Orientation => "ORIENTATION",
            ViolationCode::Curvature => "CURVATURE",
            ViolationCode::CoordMismatch => "COORD_MISMATCH",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Violation {
    pub code: ViolationCode,
    pub detail: String,
}

/// Result of [`PlanarComplex::validate`]. Violations are data, not errors;
/// the report lists every violation found, not just the first. Boundary
/// angle sums are included for diagnostics (no constraint applies to them).
#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub pass: bool,
    pub violations: Vec<Violation>,
    pub boundary_angle_sums: Vec<(usize, f64)>,
}

/// One face of the cyclic fan of faces around a vertex.
#[derive(Clone, Debug)]
pub struct FanItem {
    pub face: usize,
    /// Corner index of the vertex within `face`.
    pub corner: usize,
    /// Fan coordinate of the first ray (v -> corner+1) of this face.
    pub offset: f64,
}

/// Ordered faces around one vertex. For an inner vertex the fan is cyclic
/// with total angle θ(v); for a boundary vertex it is the open interval
/// between the two incident boundary edges.
#[derive(Clone, Debug)]
pub struct VertexFan {
    pub items: Vec<FanItem>,
    pub total: f64,
    pub closed: bool,
}

#[derive(Clone, Debug)]
pub struct PlanarComplex {
    n_vertices: usize,
    faces: Vec<[usize; 3]>,
    edge_lengths: BTreeMap<(usize, usize), f64>,
    flat_coordinates: Option<Vec<Vec2>>,
    pub tol: Tol,

    // derived
    charts: Vec<FaceChart>,
    /// twin[f*3+k] = half-edge id of the opposite direction, if interior.
    twins: Vec<Option<usize>>,
    fans: Vec<VertexFan>,
    angle_sums: Vec<f64>,
    boundary_vertex: Vec<bool>,
    /// Boundary vertices in cycle order, interior on the left (counterclockwise).
    boundary_cycle: Vec<usize>,
    /// Length scale: the largest edge length (used to scale eps_len).
    scale: f64,
    /// Structural defects found while deriving (folded into validate()).
    derive_violations: Vec<Violation>,
}

fn ekey(u: usize, v: usize) -> (usize, usize) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

impl PlanarComplex {
    /// Build a complex from triangles and edge lengths. `flat` optionally
    /// carries planar vertex coordinates; lengths missing from
    /// `edge_lengths` are derived from `flat` when present.
    ///
    /// Errors cover malformed input only (indices out of range, conflicting
    /// duplicate lengths, missing lengths, nonpositive lengths). Geometric
    /// invariant failures are reported by [`PlanarComplex::validate`].
    pub fn new(
        n_vertices: usize,
        faces: Vec<[usize; 3]>,
        mut edge_lengths: BTreeMap<(usize, usize), f64>,
        flat: Option<Vec<Vec2>>,
        tol: Tol,
    ) -> Result<PlanarComplex> {
        for (fi, f) in faces.iter().enumerate() {
            for &v in f {
                if v >= n_vertices {
                    return Err(Error::IndexOutOfRange(format!(
                        "face {fi} references vertex {v} but n_vertices = {n_vertices}"
                    )));
                }
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(Error::Parse(format!("face {fi} repeats a vertex")));
            }
        }
        if let Some(coords) = &flat {
            if coords.len() != n_vertices {
                return Err(Error::Parse(format!(
                    "flat_coordinates has {} entries, expected {n_vertices}",
                    coords.len()
                )));
            }
            for f in &faces {
                for k in 0..3 {
                    let (u, v) = (f[k], f[(k + 1) % 3]);
                    let d = coords[u].dist(coords[v]);
                    edge_lengths.entry(ekey(u, v)).or_insert(d);
                }
            }
        }
        for f in &faces {
            for k in 0..3 {
                let (u, v) = ekey(f[k], f[(k + 1) % 3]);
                match edge_lengths.get(&(u, v)) {
                    None => return Err(Error::MissingEdgeLength(u, v)),
                    Some(l) if !(l.is_finite() && *l > 0.0) => {
                        return Err(Error::Parse(format!("edge ({u},{v}) has length {l}")))
                    }
                    _ => {}
                }
            }
        }

        let scale = edge_lengths.values().cloned().fold(0.0_f64, f64::max).max(1e-300);

        let mut derive_violations = Vec::new();

        // charts (law of cosines); degenerate faces get a flat chart and a violation
        let mut charts = Vec::with_capacity(faces.len());
        for (fi, f) in faces.iter().enumerate() {
            let l01 = edge_lengths[&ekey(f[0], f[1])];
            let l12 = edge_lengths[&ekey(f[1], f[2])];
            let l20 = edge_lengths[&ekey(f[2], f[0])];
            let ok = l01 + l12 > l20 && l12 + l20 > l01 && l20 + l01 > l12;
            if !ok {
                derive_violations.push(Violation {
                    code: ViolationCode::TriangleIneq,
                    detail: format!("face {fi} lengths ({l01}, {l12}, {l20})"),
                });
            }
            charts.push(FaceChart::from_lengths(l01, l12, l20));
        }

        // twins from directed edges
        let mut dir_map: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (fi, f) in faces.iter().enumerate() {
            for k in 0..3 {
                let he = fi * 3 + k;
                let d = (f[k], f[(k + 1) % 3]);
                if dir_map.insert(d, he).is_some() {
                    derive_violations.push(Violation {
                        code: ViolationCode::Orientation,
                        detail: format!("directed edge {}->{} appears twice", d.0, d.1),
                    });
                }
            }
        }
        let mut twins = vec![None; faces.len() * 3];
        for (fi, f) in faces.iter().enumerate() {
            for k in 0..3 {
                let he = fi * 3 + k;
                let rev = (f[(k + 1) % 3], f[k]);
                twins[he] = dir_map.get(&rev).copied();
            }
        }
        // an edge incident to more than two faces also breaks the disk
        let mut edge_face_count: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for f in &faces {
            for k in 0..3 {
                *edge_face_count.entry(ekey(f[k], f[(k + 1) % 3])).or_insert(0) += 1;
            }
        }
        for (e, c) in &edge_face_count {
            if *c > 2 {
                derive_violations.push(Violation {
                    code: ViolationCode::NotDisk,
                    detail: format!("edge ({},{}) lies in {c} faces", e.0, e.1),
                });
            }
        }

        let mut cx = PlanarComplex {
            n_vertices,
            faces,
            edge_lengths,
            flat_coordinates: flat,
            tol,
            charts,
            twins,
            fans: Vec::new(),
            angle_sums: vec![0.0; n_vertices],
            boundary_vertex: vec![false; n_vertices],
            boundary_cycle: Vec::new(),
            scale,
            derive_violations,
        };
        cx.build_fans();
        cx.build_boundary();
        Ok(cx)
    }

    /// Build from planar vertex coordinates (a flat instance). Lengths are
    /// derived and `flat_coordinates` kept as a certificate.
    pub fn from_flat(coords: Vec<(f64, f64)>, faces: Vec<[usize; 3]>, tol: Tol) -> Result<Self> {
        let n = coords.len();
        let flat = coords.into_iter().map(|(x, y)| v2(x, y)).collect();
        PlanarComplex::new(n, faces, BTreeMap::new(), Some(flat), tol)
    }

    fn corner_of(&self, face: usize, v: usize) -> Option<usize> {
        self.faces[face].iter().position(|&w| w == v)
    }

    fn build_fans(&mut self) {
        // counterclockwise neighbor of (face,corner) around the corner vertex:
        // across the half-edge (corner+2 -> corner)
        let ccw_next = |f: usize, k: usize| -> Option<(usize, usize)> {
            let he = f * 3 + (k + 2) % 3;
            self.twins[he].map(|t| {
                let g = t / 3;
                let v = self.faces[f][k];
                (g, self.corner_of(g, v).unwrap())
            })
        };
        let cw_prev = |f: usize, k: usize| -> Option<(usize, usize)> {
            let he = f * 3 + k;
            self.twins[he].map(|t| {
                let g = t / 3;
                let v = self.faces[f][k];
                (g, self.corner_of(g, v).unwrap())
            })
        };

        let mut first_incidence: Vec<Option<(usize, usize)>> = vec![None; self.n_vertices];
        for (fi, f) in self.faces.iter().enumerate() {
            for k in 0..3 {
                if first_incidence[f[k]].is_none() {
                    first_incidence[f[k]] = Some((fi, k));
                }
            }
        }

        let mut fans: Vec<VertexFan> = Vec::with_capacity(self.n_vertices);
        let mut sums = vec![0.0; self.n_vertices];
        for vtx in 0..self.n_vertices {
            let Some(start) = first_incidence[vtx] else {
                fans.push(VertexFan { items: Vec::new(), total: 0.0, closed: false });
                continue;
            };
            // rewind clockwise to the boundary (or detect a closed fan)
            let mut begin = start;
            let mut closed = false;
            let mut guard = 0;
            while let Some(prev) = cw_prev(begin.0, begin.1) {
                if prev == start {
                    closed = true;
                    begin = start;
                    break;
                }
                begin = prev;
                guard += 1;
                if guard > self.faces.len() * 3 {
                    break; // broken incidences; validation will flag the complex
                }
            }
            let mut items = Vec::new();
            let mut offset = 0.0;
            let mut cur = Some(begin);
            let mut guard = 0;
            while let Some((f, k)) = cur {
                items.push(FanItem { face: f, corner: k, offset });
                offset += self.corner_angle(f, k);
                let next = ccw_next(f, k);
                if closed && next == Some(begin) {
                    break;
                }
                cur = next;
                guard += 1;
                if guard > self.faces.len() * 3 {
                    break;
                }
            }
            sums[vtx] = offset;
            fans.push(VertexFan { items, total: offset, closed });
        }
        self.fans = fans;
        self.angle_sums = sums;
    }

    fn build_boundary(&mut self) {
        // boundary half-edges (no twin), chained tail -> head
        let mut next_of: BTreeMap<usize, usize> = BTreeMap::new();
        let mut n_boundary_he = 0;
        for (fi, f) in self.faces.iter().enumerate() {
            for k in 0..3 {
                if self.twins[fi * 3 + k].is_none() {
                    let (u, v) = (f[k], f[(k + 1) % 3]);
                    self.boundary_vertex[u] = true;
                    self.boundary_vertex[v] = true;
                    next_of.insert(u, v);
                    n_boundary_he += 1;
                }
            }
        }
        if next_of.is_empty() {
            return;
        }
        let start = *next_of.keys().min().unwrap();
        let mut cycle = vec![start];
        let mut cur = start;
        while let Some(&nxt) = next_of.get(&cur) {
            if nxt == start {
                break;
            }
            cycle.push(nxt);
            cur = nxt;
            if cycle.len() > n_boundary_he {
                break;
            }
        }
        if cycle.len() != n_boundary_he {
            self.derive_violations.push(Violation {
                code: ViolationCode::NotDisk,
                detail: format!(
                    "boundary edges form more than one cycle ({} of {} edges in the cycle through vertex {start})",
                    cycle.len(),
                    n_boundary_he
                ),
            });
        }
        self.boundary_cycle = cycle;
    }

    // ------------------------------------------------------------------
    // simple accessors

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }
    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }
    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }
    pub fn face(&self, f: usize) -> [usize; 3] {
        self.faces[f]
    }
    pub fn edge_lengths(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.edge_lengths
    }
    pub fn edge_len(&self, u: usize, v: usize) -> f64 {
        self.edge_lengths[&ekey(u, v)]
    }
    pub fn flat_coordinates(&self) -> Option<&[Vec2]> {
        self.flat_coordinates.as_deref()
    }
    pub fn chart(&self, f: usize) -> &FaceChart {
        &self.charts[f]
    }
    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary_vertex[v]
    }
    pub fn is_boundary_edge(&self, u: usize, v: usize) -> bool {
        self.half_edge(u, v).map_or(false, |he| self.twins[he].is_none())
            || self.half_edge(v, u).map_or(false, |he| self.twins[he].is_none())
    }
    pub fn fan(&self, v: usize) -> &VertexFan {
        &self.fans[v]
    }
    /// Absolute eps for length comparisons on this instance.
    pub fn eps(&self) -> f64 {
        self.tol.eps_len * self.scale.max(1.0)
    }
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Sum of corner angles around `v` (θ(v) in radians).
    pub fn vertex_angle_sum(&self, v: usize) -> f64 {
        self.angle_sums[v]
    }

    /// Corner angle of `face` at its `corner`-th vertex, by the law of
    /// cosines on the three edge lengths; lies strictly between 0 and π for
    /// any face satisfying the triangle inequality.
    pub fn corner_angle(&self, face: usize, corner: usize) -> f64 {
        let ch = &self.charts[face];
        let a = ch.corners[corner];
        let b = ch.corners[(corner + 1) % 3];
        let c = ch.corners[(corner + 2) % 3];
        let u = b - a;
        let w = c - a;
        wrap_angle(u.cross(w).atan2(u.dot(w)))
    }

    /// Boundary vertices in cycle order (interior on the left).
    pub fn boundary(&self) -> &[usize] {
        &self.boundary_cycle
    }

    fn half_edge(&self, u: usize, v: usize) -> Option<usize> {
        for (fi, f) in self.faces.iter().enumerate() {
            for k in 0..3 {
                if f[k] == u && f[(k + 1) % 3] == v {
                    return Some(fi * 3 + k);
                }
            }
        }
        None
    }

    /// Faces incident to the unordered edge (u,v), lowest face id first.
    pub fn edge_faces(&self, u: usize, v: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(2);
        if let Some(he) = self.half_edge(u, v) {
            out.push(he / 3);
        }
        if let Some(he) = self.half_edge(v, u) {
            out.push(he / 3);
        }
        out.sort_unstable();
        out
    }

    /// The face across edge (u,v) from `face`, if any.
    pub fn face_across(&self, face: usize, u: usize, v: usize) -> Option<usize> {
        self.edge_faces(u, v).into_iter().find(|&g| g != face)
    }

    // ------------------------------------------------------------------
    // gluing and transfer

    /// The rigid motion taking `from`-chart coordinates to `to`-chart
    /// coordinates across the shared edge of the two faces.
    pub fn glue_iso(&self, from: usize, to: usize) -> Result<Iso2> {
        let ff = self.faces[from];
        let tf = self.faces[to];
        let mut shared: Option<(usize, usize)> = None;
        'outer: for k in 0..3 {
            let e = ekey(ff[k], ff[(k + 1) % 3]);
            for j in 0..3 {
                if ekey(tf[j], tf[(j + 1) % 3]) == e {
                    shared = Some(e);
                    break 'outer;
                }
            }
        }
        let Some((u, v)) = shared else {
            return Err(Error::NotAdjacent(from, to));
        };
        let a1 = self.vertex_chart_pos(from, u);
        let b1 = self.vertex_chart_pos(from, v);
        let a2 = self.vertex_chart_pos(to, u);
        let b2 = self.vertex_chart_pos(to, v);
        Ok(Iso2::matching(a1, b1, a2, b2))
    }

    /// Transfer a chart point between adjacent face charts (planar
    /// unfolding across the shared edge).
    pub fn transfer(&self, p: Vec2, from: usize, to: usize) -> Result<Vec2> {
        Ok(self.glue_iso(from, to)?.apply(p))
    }

    /// Chart position of vertex `v` in face `face` (must be a corner).
    pub fn vertex_chart_pos(&self, face: usize, v: usize) -> Vec2 {
        let k = self.corner_of(face, v).expect("vertex not a corner of face");
        self.charts[face].corners[k]
    }

    // ------------------------------------------------------------------
    // points

    /// Faces containing the point (for a vertex: its fan, in fan order).
    pub fn point_faces(&self, p: &PointOnComplex) -> Vec<usize> {
        match p {
            PointOnComplex::Vertex(v) => self.fans[*v].items.iter().map(|it| it.face).collect(),
            PointOnComplex::EdgePoint { edge, .. } => self.edge_faces(edge.0, edge.1),
            PointOnComplex::FacePoint { face, .. } => vec![*face],
        }
    }

    /// Chart coordinates of a point in a given face (the point must lie in
    /// that face).
    pub fn chart_pos(&self, face: usize, p: &PointOnComplex) -> Result<Vec2> {
        match p {
            PointOnComplex::Vertex(v) => {
                if self.corner_of(face, *v).is_none() {
                    return Err(Error::PointOutside(format!("vertex {v} not in face {face}")));
                }
                Ok(self.vertex_chart_pos(face, *v))
            }
            PointOnComplex::EdgePoint { edge, t } => {
                let (u, v) = *edge;
                if self.corner_of(face, u).is_none() || self.corner_of(face, v).is_none() {
                    return Err(Error::PointOutside(format!(
                        "edge ({u},{v}) not in face {face}"
                    )));
                }
                let a = self.vertex_chart_pos(face, u);
                let b = self.vertex_chart_pos(face, v);
                Ok(a.lerp(b, *t))
            }
            PointOnComplex::FacePoint { face: f, bary } => {
                if *f != face {
                    return Err(Error::PointOutside(format!(
                        "face point of {f} queried in face {face}"
                    )));
                }
                Ok(self.charts[face].from_barycentric(*bary))
            }
        }
    }

    /// Lowest-id face shared by two points, if any.
    pub fn common_face(&self, p: &PointOnComplex, q: &PointOnComplex) -> Option<usize> {
        let fp = self.point_faces(p);
        let fq = self.point_faces(q);
        let mut best: Option<usize> = None;
        for f in fp {
            if fq.contains(&f) {
                best = Some(best.map_or(f, |b| b.min(f)));
            }
        }
        best
    }

    /// Snap a chart point of `face` to canonical form: a point within eps of
    /// a corner becomes that vertex; within eps of an edge (but not a
    /// corner) an edge point; otherwise a face point.
    pub fn canonical_point(&self, face: usize, p: Vec2) -> PointOnComplex {
        let eps = self.eps();
        let ch = &self.charts[face];
        let f = self.faces[face];
        for k in 0..3 {
            if ch.corners[k].dist(p) <= eps {
                return PointOnComplex::Vertex(f[k]);
            }
        }
        for k in 0..3 {
            let a = ch.corners[k];
            let b = ch.corners[(k + 1) % 3];
            let t = crate::geom::seg_closest_t(a, b, p);
            if a.lerp(b, t).dist(p) <= eps {
                return PointOnComplex::edge_point(f[k], f[(k + 1) % 3], t);
            }
        }
        let b = ch.barycentric(p);
        PointOnComplex::FacePoint { face, bary: b }
    }

    /// Whether a chart point lies inside (or within eps of) the face triangle.
    pub fn face_contains(&self, face: usize, p: Vec2) -> bool {
        crate::geom::convex_contains(&self.charts[face].corners, p, self.eps())
    }

    // ------------------------------------------------------------------
    // fan coordinates

    /// Fan coordinate in [0, θ(v)) of a direction `d` given in the chart of
    /// `face` (which must be incident to `v`). The coordinate is the
    /// counterclockwise angle from the fan's first ray.
    pub fn fan_coord(&self, v: usize, face: usize, d: Vec2) -> f64 {
        let fan = &self.fans[v];
        let it = fan
            .items
            .iter()
            .find(|it| it.face == face)
            .expect("face not in vertex fan");
        let f = self.faces[face];
        let first = self.vertex_chart_pos(face, f[(it.corner + 1) % 3])
            - self.vertex_chart_pos(face, v);
        let mut local = wrap_angle(first.cross(d).atan2(first.dot(d)));
        // directions measured within a face lie inside its corner angle;
        // values wrapping past 2π-eps are clock noise at the first ray
        if local > std::f64::consts::TAU - 1e-9 {
            local = 0.0;
        }
        let raw = it.offset + local;
        if fan.closed {
            let t = fan.total;
            if raw >= t {
                raw - t
            } else {
                raw
            }
        } else {
            raw
        }
    }

    /// Inverse of [`fan_coord`]: the face containing fan angle `phi` and the
    /// chart direction within that face.
    pub fn fan_dir(&self, v: usize, phi: f64) -> (usize, Vec2) {
        let fan = &self.fans[v];
        let phi = if fan.closed {
            let t = fan.total;
            let mut p = phi % t;
            if p < 0.0 {
                p += t;
            }
            p
        } else {
            phi.clamp(0.0, fan.total)
        };
        let mut idx = fan.items.len() - 1;
        for (i, it) in fan.items.iter().enumerate() {
            let end = it.offset + self.corner_angle(it.face, it.corner);
            if phi <= end + 1e-12 {
                idx = i;
                break;
            }
        }
        let it = &fan.items[idx];
        let f = self.faces[it.face];
        let vpos = self.vertex_chart_pos(it.face, v);
        let first = (self.vertex_chart_pos(it.face, f[(it.corner + 1) % 3]) - vpos).normalized();
        let a = phi - it.offset;
        let d = v2(
            first.x * a.cos() - first.y * a.sin(),
            first.x * a.sin() + first.y * a.cos(),
        );
        (it.face, d)
    }

    /// Fan coordinate of the edge from `v` to an adjacent vertex `w`.
    pub fn fan_coord_of_edge(&self, v: usize, w: usize) -> Option<f64> {
        let fan = &self.fans[v];
        for it in &fan.items {
            let f = self.faces[it.face];
            if f[(it.corner + 1) % 3] == w {
                return Some(it.offset);
            }
            if f[(it.corner + 2) % 3] == w {
                return Some(it.offset + self.corner_angle(it.face, it.corner));
            }
        }
        None
    }

    // ------------------------------------------------------------------
    // validation

    /// Check every structural and metric invariant, reporting all
    /// violations. `pass` is true iff none were found.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = self.derive_violations.clone();

        // combinatorial disk: V - E + F = 1 on the 1-skeleton, connected
        let n_edges = self.edge_lengths_in_use();
        let euler = self.n_vertices as i64 - n_edges as i64 + self.faces.len() as i64;
        if euler != 1 {
            violations.push(Violation {
                code: ViolationCode::NotDisk,
                detail: format!("V - E + F = {euler}, expected 1"),
            });
        }
        if !self.skeleton_connected() {
            violations.push(Violation {
                code: ViolationCode::NotDisk,
                detail: "1-skeleton is not connected".into(),
            });
        }
        if self.boundary_cycle.is_empty() && !self.faces.is_empty() {
            violations.push(Violation {
                code: ViolationCode::NotDisk,
                detail: "no boundary edges (closed surface, not a disk)".into(),
            });
        }

        // curvature at inner vertices
        let two_pi = std::f64::consts::TAU;
        for v in 0..self.n_vertices {
            if !self.boundary_vertex[v] && !self.fans[v].items.is_empty() {
                let th = self.angle_sums[v];
                if th < two_pi - CURVATURE_SLACK {
                    violations.push(Violation {
                        code: ViolationCode::Curvature,
                        detail: format!("inner vertex {v} has angle sum {th:.12} < 2π"),
                    });
                }
            }
        }

        // isolated vertices break the disk
        for v in 0..self.n_vertices {
            if self.fans[v].items.is_empty() {
                violations.push(Violation {
                    code: ViolationCode::NotDisk,
                    detail: format!("vertex {v} lies in no face"),
                });
            }
        }

        // flat certificate consistency
        if let Some(coords) = &self.flat_coordinates {
            let eps = self.eps();
            for (&(u, v), &l) in &self.edge_lengths {
                let d = coords[u].dist(coords[v]);
                if (d - l).abs() > eps {
                    violations.push(Violation {
                        code: ViolationCode::CoordMismatch,
                        detail: format!(
                            "edge ({u},{v}) length {l} but coordinates give {d}"
                        ),
                    });
                }
            }
            for (fi, f) in self.faces.iter().enumerate() {
                let area = (coords[f[1]] - coords[f[0]]).cross(coords[f[2]] - coords[f[0]]);
                if area <= eps * eps {
                    violations.push(Violation {
                        code: ViolationCode::CoordMismatch,
                        detail: format!("face {fi} is not counterclockwise in flat coordinates"),
                    });
                }
            }
            for v in 0..self.n_vertices {
                if !self.boundary_vertex[v] && !self.fans[v].items.is_empty() {
                    let th = self.angle_sums[v];
                    if (th - two_pi).abs() > CURVATURE_SLACK {
                        violations.push(Violation {
                            code: ViolationCode::CoordMismatch,
                            detail: format!(
                                "flat instance has inner vertex {v} with angle sum {th:.12} ≠ 2π"
                            ),
                        });
                    }
                }
            }
        }

        let boundary_angle_sums = self
            .boundary_cycle
            .iter()
            .map(|&v| (v, self.angle_sums[v]))
            .collect();

        ValidationReport { pass: violations.is_empty(), violations, boundary_angle_sums }
    }

    fn edge_lengths_in_use(&self) -> usize {
        let mut used: std::collections::BTreeSet<(usize, usize)> = Default::default();
        for f in &self.faces {
            for k in 0..3 {
                used.insert(ekey(f[k], f[(k + 1) % 3]));
            }
        }
        used.len()
    }

    fn skeleton_connected(&self) -> bool {
        if self.n_vertices == 0 {
            return true;
        }
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); self.n_vertices];
        for f in &self.faces {
            for k in 0..3 {
                let (u, v) = (f[k], f[(k + 1) % 3]);
                adj[u].push(v);
                adj[v].push(u);
            }
        }
        let mut seen = vec![false; self.n_vertices];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &w in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == self.n_vertices
    }

    // ------------------------------------------------------------------
    // source insertion (used by the shortest-path-map build)

    /// Insert `p` as a new vertex, splitting the containing face into three
    /// triangles (or both incident faces into two each for an edge point).
    /// Returns the new complex, the vertex id of `p`, and a map from old
    /// face ids to the list of faces now tiling them. Untouched faces keep
    /// their ids.
    pub fn insert_vertex_at(
        &self,
        p: &PointOnComplex,
    ) -> Result<(PlanarComplex, usize, Vec<Vec<usize>>)> {
        let new_v = self.n_vertices;
        let mut faces = self.faces.clone();
        let mut lengths = self.edge_lengths.clone();
        let mut remap: Vec<Vec<usize>> = (0..faces.len()).map(|f| vec![f]).collect();
        let mut flat = self.flat_coordinates.clone();

        match p {
            PointOnComplex::Vertex(_) => {
                return Err(Error::BadArgument("point is already a vertex".into()))
            }
            PointOnComplex::FacePoint { face, bary } => {
                let f = self.faces[*face];
                let pos = self.charts[*face].from_barycentric(*bary);
                for k in 0..3 {
                    let d = self.charts[*face].corners[k].dist(pos);
                    lengths.insert(ekey(f[k], new_v), d);
                }
                faces[*face] = [f[0], f[1], new_v];
                remap[*face] = vec![*face, faces.len(), faces.len() + 1];
                faces.push([f[1], f[2], new_v]);
                faces.push([f[2], f[0], new_v]);
                if let Some(coords) = &mut flat {
                    let [a, b, c] = f;
                    let q = v2(
                        bary[0] * coords[a].x + bary[1] * coords[b].x + bary[2] * coords[c].x,
                        bary[0] * coords[a].y + bary[1] * coords[b].y + bary[2] * coords[c].y,
                    );
                    coords.push(q);
                }
            }
            PointOnComplex::EdgePoint { edge, t } => {
                let (u, v) = *edge;
                let lu = self.edge_len(u, v) * t;
                let lv = self.edge_len(u, v) * (1.0 - t);
                lengths.remove(&ekey(u, v));
                lengths.insert(ekey(u, new_v), lu);
                lengths.insert(ekey(v, new_v), lv);
                for face in self.edge_faces(u, v) {
                    let f = self.faces[face];
                    let k = (0..3)
                        .find(|&k| ekey(f[k], f[(k + 1) % 3]) == ekey(u, v))
                        .unwrap();
                    let (a, b, c) = (f[k], f[(k + 1) % 3], f[(k + 2) % 3]);
                    // distance from the new point to the opposite corner
                    let pos_edge = self
                        .vertex_chart_pos(face, u)
                        .lerp(self.vertex_chart_pos(face, v), *t);
                    let d = pos_edge.dist(self.vertex_chart_pos(face, c));
                    lengths.insert(ekey(c, new_v), d);
                    faces[face] = [a, new_v, c];
                    remap[face] = vec![face, faces.len()];
                    faces.push([new_v, b, c]);
                }
                if let Some(coords) = &mut flat {
                    let q = coords[u].lerp(coords[v], *t);
                    coords.push(q);
                }
            }
        }
        let cx = PlanarComplex::new(self.n_vertices + 1, faces, lengths, flat, self.tol)?;
        Ok((cx, new_v, remap))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances;

    #[test]
    fn right_triangle_basics() {
        // single right triangle, lengths (4,3,5): 1 face, boundary cycle of
        // 3 vertices, right angle at the corner between the legs
        let k = instances::right_triangle();
        assert_eq!(k.n_faces(), 1);
        assert_eq!(k.boundary().len(), 3);
        // corner 0 sits between the legs of length 4 and 3
        let ang = k.corner_angle(0, 0);
        assert!((ang - std::f64::consts::FRAC_PI_2).abs() < 1e-12, "angle {ang}");
        assert!(k.validate().pass);
    }

    #[test]
    fn unit_square_derived_diagonal() {
        let k = instances::unit_square();
        assert!((k.edge_len(0, 2) - 2f64.sqrt()).abs() < 1e-12);
        assert!(k.validate().pass);
        assert_eq!(k.boundary(), &[0, 1, 2, 3]);
        // face (0,1,2) at vertex 2 -> π/4
        assert!((k.corner_angle(0, 2) - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
        assert!((k.vertex_angle_sum(0) - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        assert!((k.vertex_angle_sum(2) - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn cone_fan_center_angle() {
        let k = instances::cone_fan(7);
        let c = 7; // center vertex id
        assert!((k.vertex_angle_sum(c) - 7.0 * std::f64::consts::FRAC_PI_3).abs() < 1e-12);
        assert!(k.validate().pass);
        // boundary excludes the center
        assert_eq!(k.boundary().len(), 7);
        assert!(!k.boundary().contains(&c));
    }

    #[test]
    fn five_fan_fails_curvature() {
        let k = instances::cone_fan_unchecked(5);
        let rep = k.validate();
        assert!(!rep.pass);
        assert!(rep.violations.iter().any(|v| v.code == ViolationCode::Curvature));
    }

    #[test]
    fn degenerate_lengths_fail_triangle_inequality() {
        let mut lengths = BTreeMap::new();
        lengths.insert((0, 1), 1.0);
        lengths.insert((1, 2), 1.0);
        lengths.insert((0, 2), 3.0);
        let k = PlanarComplex::new(3, vec![[0, 1, 2]], lengths, None, Tol::default()).unwrap();
        let rep = k.validate();
        assert!(!rep.pass);
        assert!(rep.violations.iter().any(|v| v.code == ViolationCode::TriangleIneq));
    }

    #[test]
    fn transfer_midpoint_fixed_and_round_trip() {
        let k = instances::unit_square();
        // midpoint of the shared diagonal maps to itself across the gluing
        let m = PointOnComplex::edge_point(0, 2, 0.5);
        let p0 = k.chart_pos(0, &m).unwrap();
        let p1 = k.chart_pos(1, &m).unwrap();
        assert!(k.transfer(p0, 0, 1).unwrap().dist(p1) < 1e-12);
        // round trip is the identity
        let q = v2(0.3, 0.2);
        let back = k.transfer(k.transfer(q, 0, 1).unwrap(), 1, 0).unwrap();
        assert!(back.dist(q) < 1e-12);
    }

    #[test]
    fn transfer_rejects_non_adjacent() {
        let k = instances::cone_fan(7);
        // faces 0 and 3 of the fan share only the center vertex, no edge
        assert!(matches!(k.transfer(v2(0.1, 0.1), 0, 3), Err(Error::NotAdjacent(..))));
    }

    #[test]
    fn corner_angles_sum_to_pi() {
        let k = instances::l_shape();
        for f in 0..k.n_faces() {
            let s: f64 = (0..3).map(|c| k.corner_angle(f, c)).sum();
            assert!((s - std::f64::consts::PI).abs() < 1e-9);
        }
    }

    #[test]
    fn fan_coord_round_trip() {
        let k = instances::cone_fan(7);
        let c = 7;
        for phi in [0.0, 0.5, 1.8, 4.0, 7.0] {
            let (face, dir) = k.fan_dir(c, phi);
            let back = k.fan_coord(c, face, dir);
            let diff = (back - phi).abs();
            assert!(diff < 1e-9 || (diff - k.vertex_angle_sum(c)).abs() < 1e-9);
        }
        // edge fan coordinates are evenly spaced π/3 apart (in one of the
        // two cyclic directions, depending on fan orientation)
        let theta = k.vertex_angle_sum(c);
        for i in 0..7 {
            let a = k.fan_coord_of_edge(c, i).unwrap();
            let b = k.fan_coord_of_edge(c, (i + 1) % 7).unwrap();
            let d = (b - a).rem_euclid(theta);
            let step = std::f64::consts::FRAC_PI_3;
            assert!(
                (d - step).abs() < 1e-9 || (d - (theta - step)).abs() < 1e-9,
                "edge {i}: spacing {d}"
            );
        }
    }

    #[test]
    fn insert_face_point_splits_into_three() {
        let k = instances::right_triangle();
        let p = PointOnComplex::face_point(0, [0.25, 0.25, 0.5]);
        let (k2, nv, remap) = k.insert_vertex_at(&p).unwrap();
        assert_eq!(nv, 3);
        assert_eq!(k2.n_faces(), 3);
        assert_eq!(remap[0].len(), 3);
        assert!(k2.validate().pass);
    }

    #[test]
    fn insert_edge_point_splits_both_faces() {
        let k = instances::unit_square();
        let p = PointOnComplex::edge_point(0, 2, 0.5);
        let (k2, nv, _) = k.insert_vertex_at(&p).unwrap();
        assert_eq!(nv, 4);
        assert_eq!(k2.n_faces(), 4);
        assert!(k2.validate().pass);
        assert!((k2.vertex_angle_sum(nv) - std::f64::consts::TAU).abs() < 1e-9);
    }
}
