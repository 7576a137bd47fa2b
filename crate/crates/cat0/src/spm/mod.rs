//! Shortest path maps by a circular-wavefront sweep.
//!
//! `build_spm(K, x)` partitions the complex into cones C(z; p, q): convex
//! regions with a vertex apex z such that every shortest path from the
//! source x to a point of the cone routes through z and is straight from
//! there on. The sweep processes events in order of distance from x:
//!
//! - an *edge event* moves a cone's wavefront across an edge into the next
//!   face, claiming the part of the face inside the cone's wedge;
//! - a *vertex event* finalizes a vertex distance. The finalized vertex
//!   either splits the cone it fell inside (its geodesic becomes a shared
//!   side), continues the side straight through a flat vertex, or — at a
//!   vertex with angle sum above 2π — spawns new cones with that vertex as
//!   apex in the sector left between the two continuations that make angle
//!   exactly π with the incoming geodesic.
//!
//! Every cone carries its own unfolding frame with the apex at the origin;
//! both its sides are straight rays there, so event keys are plain chart
//! arithmetic and a cone's region unfolds to a triangle.

mod verify;

pub use verify::{verify_spm, SpmCheck, SpmReport, VerifyOptions};

use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use crate::complex::{PlanarComplex, PointOnComplex};
use crate::error::{Error, Result};
use crate::geodesy::GeodesicPath;
use crate::geom::{v2, wrap_angle, Iso2, Vec2};

// ---------------------------------------------------------------------
// public types

/// A wedge at the origin: the region swept counterclockwise from
/// `dir_right` to `dir_left` (angle strictly below π).
#[derive(Clone, Copy, Debug)]
pub struct Wedge {
    pub dir_right: Vec2,
    pub dir_left: Vec2,
}

impl Wedge {
    pub fn angle(&self) -> f64 {
        wrap_angle(self.dir_right.cross(self.dir_left).atan2(self.dir_right.dot(self.dir_left)))
    }

    pub fn contains(&self, p: Vec2, eps: f64) -> bool {
        let s = eps * p.norm().max(1.0);
        self.dir_right.cross(p) >= -s && self.dir_left.cross(p) <= s
    }

    /// Clip a counterclockwise polygon to the wedge.
    pub fn clip(&self, poly: &[Vec2], eps: f64) -> Vec<Vec2> {
        let a = crate::geom::clip_halfplane(poly, Vec2::ZERO, self.dir_right, eps);
        let mut out = crate::geom::clip_halfplane(&a, Vec2::ZERO, -self.dir_left, eps);
        crate::geom::dedup_ring(&mut out, eps);
        out
    }

    /// Parameter interval of segment a→b inside the wedge, if any.
    /// Segments running along a wedge ray (within eps) count as inside.
    pub fn clip_segment(&self, a: Vec2, b: Vec2, eps: f64) -> Option<(f64, f64)> {
        let mut t0 = 0.0_f64;
        let mut t1 = 1.0_f64;
        for (dir, sign) in [(self.dir_right, 1.0), (self.dir_left, -1.0)] {
            let fa = sign * dir.cross(a);
            let fb = sign * dir.cross(b);
            if fa < -eps && fb < -eps {
                return None;
            }
            if fa < -eps {
                t0 = t0.max((-fa / (fb - fa)).clamp(0.0, 1.0));
            } else if fb < -eps {
                t1 = t1.min((-fa / (fb - fa)).clamp(0.0, 1.0));
            }
        }
        if t0 + 1e-12 < t1 {
            Some((t0, t1))
        } else {
            None
        }
    }
}

/// One face crossed by a cone: the rigid motion from the face chart into
/// the cone frame and the claimed polygon (frame coordinates, CCW).
#[derive(Clone, Debug)]
pub struct FaceCrossing {
    pub face: usize,
    pub iso: Iso2,
    pub poly: Vec<Vec2>,
}

/// Piece of the complex boundary reached by a cone (frame coordinates).
#[derive(Clone, Debug)]
pub struct BoundaryGap {
    pub face: usize,
    pub edge: (usize, usize),
    pub a: Vec2,
    pub b: Vec2,
}

/// A finished cone of the shortest path map.
#[derive(Clone, Debug)]
pub struct Cone {
    pub apex: usize,
    pub apex_dist: f64,
    pub wedge: Wedge,
    pub crossings: Vec<FaceCrossing>,
    pub gaps: Vec<BoundaryGap>,
    /// Side chains from the apex to the boundary (right = clockwise side).
    pub side_right: SideChain,
    pub side_left: SideChain,
}

impl Cone {
    pub fn apex_angle(&self) -> f64 {
        self.wedge.angle()
    }

    pub fn crossing_for(&self, face: usize) -> Option<&FaceCrossing> {
        self.crossings.iter().find(|c| c.face == face)
    }
}

/// A cone side as a path in the complex, with the vertices it passes and
/// the frame image of its far endpoint.
#[derive(Clone, Debug)]
pub struct SideChain {
    pub path: GeodesicPath,
    pub vertices: Vec<usize>,
    pub end_image: Vec2,
}

/// Per-vertex record of the geodesic tree.
#[derive(Clone, Debug)]
pub struct VertexRecord {
    pub dist: f64,
    /// Tree parent: the apex of the cone that discovered the vertex.
    pub parent: usize,
    /// Leg of the geodesic tree from the parent to this vertex.
    pub leg: GeodesicPath,
    /// Face through which the geodesic arrives.
    pub arrive_face: usize,
    /// Angles between the incoming geodesic and the two edges of
    /// `arrive_face` at the vertex.
    pub arrive_angles: (f64, f64),
}

/// Entry of the per-face crossing list L(F), ordered along the sweep.
#[derive(Clone, Debug)]
pub struct FaceEntry {
    pub cone: usize,
    /// Claimed polygon in the face chart, CCW.
    pub poly: Vec<Vec2>,
}

/// The shortest path map SPM(x).
#[derive(Debug)]
pub struct ShortestPathMap {
    /// Working complex: the input complex, with the source inserted as a
    /// vertex when it was given inside a face or an edge.
    pub work: PlanarComplex,
    pub source_vertex: usize,
    pub source_input: PointOnComplex,
    /// For split sources: original face -> (work face, its corners in the
    /// original face chart).
    face_remap: Option<Vec<Vec<(usize, [Vec2; 3])>>>,
    /// Inverse of `face_remap`: work face -> (original face, work corners
    /// in the original chart).
    work_face_orig: Option<Vec<(usize, [Vec2; 3])>>,
    /// The unsplit input complex (kept only when a split happened).
    original: Option<PlanarComplex>,
    pub cones: Vec<Cone>,
    /// L(F): crossings per work face, in cone order.
    pub face_entries: Vec<Vec<FaceEntry>>,
    vertex_records: Vec<Option<VertexRecord>>,
}

// ---------------------------------------------------------------------
// events

#[derive(Clone, Debug)]
pub enum SweepEventKind {
    Vertex { vertex: usize, image: Vec2 },
    Edge {
        from_face: usize,
        edge: (usize, usize),
        chord: (Vec2, Vec2),
        /// placement of `from_face` in the cone frame for the development
        /// layer that generated this chord
        iso: Iso2,
        /// claim the chord was emitted from (0 for the public entry point)
        src_claim: u64,
    },
}

/// An event of the sweep: its location, the distance key d(x, event), and
/// the partial cone it belongs to.
#[derive(Clone, Debug)]
pub struct SweepEvent {
    pub key: f64,
    pub cone: usize,
    pub location: PointOnComplex,
    pub kind: SweepEventKind,
}

/// Priority order: key, then vertex events before edge events, then a
/// canonical location order, then cone id.
fn event_rank(ev: &SweepEvent) -> (u64, u8, usize, usize, u64, usize) {
    match &ev.kind {
        SweepEventKind::Vertex { vertex, .. } => (ev.key.to_bits(), 0, *vertex, 0, 0, ev.cone),
        SweepEventKind::Edge { from_face, edge, chord, .. } => (
            ev.key.to_bits(),
            1,
            edge.0,
            edge.1,
            (chord.0.x + chord.1.x).to_bits() ^ *from_face as u64,
            ev.cone,
        ),
    }
}

// ---------------------------------------------------------------------
// the sweep

/// How a cone claims a face: across an edge chord (valid only in the
/// chord's angular sector) or by transmission at a vertex (full wedge).
#[derive(Clone, Copy, Debug)]
enum Entry {
    Transmit,
    Chord { edge: (usize, usize), a: Vec2, b: Vec2, src_claim: u64 },
}

/// Region a cone can never claim: behind a boundary piece it has reached,
/// or past the straight continuation of its side through a processed
/// vertex (the territory there belongs to the sibling cones spawned at
/// that vertex).
#[derive(Clone, Copy, Debug)]
enum Shadow {
    /// Behind the chord (a,b): its angular sector, beyond its line.
    Chord(Vec2, Vec2),
    /// Beyond `w`, on the wrong side of the ray from `w` in direction
    /// `dir` (`keep_ccw` tells which side remains valid).
    Seal { w: Vec2, dir: Vec2, keep_ccw: bool },
}

#[derive(Clone, Debug)]
struct ConeSlot {
    apex: usize,
    apex_dist: f64,
    wedge: Wedge,
    crossings: Vec<FaceCrossing>,
    /// claim id per crossing (parallel to `crossings`)
    crossing_ids: Vec<u64>,
    entered: BTreeSet<usize>,
    /// Angular sectors (CCW pairs of directions) already claimed per face,
    /// together with the placement they were claimed under; re-entry
    /// through another chord only adds the unclaimed remainder. A wrapped
    /// development may claim the same face again under a different
    /// placement — that is a distinct layer, not a duplicate.
    claimed: BTreeMap<usize, Vec<(Vec2, Vec2, Iso2)>>,
    gaps: Vec<BoundaryGap>,
    /// Regions this cone can never claim (boundary gaps, side seals).
    shadows: Vec<Shadow>,
    dead: bool,
    /// After a split: (clockwise child, counterclockwise child).
    children: Option<(usize, usize)>,
}

impl ConeSlot {
    fn crossing_for(&self, face: usize) -> Option<&FaceCrossing> {
        self.crossings.iter().find(|c| c.face == face)
    }

    /// Remove the parts of a frame polygon lying strictly inside any
    /// recorded shadow. May return several disjoint pieces.
    fn apply_shadows(&self, poly: Vec<Vec2>, eps: f64) -> Vec<Vec<Vec2>> {
        let mut pieces = vec![poly];
        for shadow in &self.shadows {
            let mut next = Vec::new();
            for piece in pieces {
                let in_shadow =
                    probe_points(&piece).iter().any(|p| point_in_shadow(shadow, *p, eps));
                if !in_shadow {
                    next.push(piece);
                    continue;
                }
                let keep = |poly: Vec<Vec2>| {
                    let mut p = poly;
                    crate::geom::dedup_ring(&mut p, eps);
                    p
                };
                match shadow {
                    Shadow::Chord(sa, sb) => {
                        // decomposition: clockwise of ray a; then
                        // counterclockwise of ray b; then in front of the
                        // chord (within the sector)
                        let p1 = keep(crate::geom::clip_halfplane(&piece, Vec2::ZERO, -*sa, eps));
                        let rest = crate::geom::clip_halfplane(&piece, Vec2::ZERO, *sa, eps);
                        let p2 = keep(crate::geom::clip_halfplane(&rest, Vec2::ZERO, *sb, eps));
                        let sector = crate::geom::clip_halfplane(&rest, Vec2::ZERO, -*sb, eps);
                        let chord = *sb - *sa;
                        let origin_sign = chord.cross(-*sa);
                        let dir = if origin_sign >= 0.0 { chord } else { -chord };
                        let p3 = keep(crate::geom::clip_halfplane(&sector, *sa, dir, eps));
                        for p in [p1, p2, p3] {
                            if p.len() >= 3 {
                                next.push(p);
                            }
                        }
                    }
                    Shadow::Seal { w, dir, keep_ccw } => {
                        // decomposition: before w; beyond w on the kept side
                        let p1 = keep(crate::geom::clip_halfplane(&piece, *w, dir.perp(), eps));
                        let beyond = crate::geom::clip_halfplane(&piece, *w, -dir.perp(), eps);
                        let side = if *keep_ccw { *dir } else { -*dir };
                        let p2 = keep(crate::geom::clip_halfplane(&beyond, *w, side, eps));
                        for p in [p1, p2] {
                            if p.len() >= 3 {
                                next.push(p);
                            }
                        }
                    }
                }
            }
            pieces = next;
        }
        pieces
    }
}

/// Disjoint decomposition of `piece ∖ claim` for convex polygons: one
/// sub-piece per claim edge (outside that edge, inside all previous).
fn convex_subtract(piece: &[Vec2], claim: &[Vec2], eps: f64) -> Vec<Vec<Vec2>> {
    // overlap probe: skip the expensive path when the claim cannot touch
    let inside_claim = |p: Vec2| crate::geom::convex_contains(claim, p, -eps * 10.0);
    if !probe_points(piece).iter().any(|&p| inside_claim(p)) {
        return vec![piece.to_vec()];
    }
    let mut out = Vec::new();
    let mut core = piece.to_vec();
    let n = claim.len();
    for i in 0..n {
        let a = claim[i];
        let b = claim[(i + 1) % n];
        let d = b - a;
        // outside this edge
        let mut outside = crate::geom::clip_halfplane(&core, a, -d, eps);
        crate::geom::dedup_ring(&mut outside, eps);
        if outside.len() >= 3 && crate::geom::polygon_area(&outside) > eps * eps {
            out.push(outside);
        }
        core = crate::geom::clip_halfplane(&core, a, d, eps);
        if core.len() < 3 {
            break;
        }
    }
    out
}

/// Probe points of a polygon for strict-interior tests: corners, edge
/// midpoints, and the centroid (corners alone miss a region that exactly
/// fills the tested sector).
fn probe_points(poly: &[Vec2]) -> Vec<Vec2> {
    let mut out = poly.to_vec();
    let n = poly.len();
    let mut cx = 0.0;
    let mut cy = 0.0;
    for i in 0..n {
        out.push(poly[i].lerp(poly[(i + 1) % n], 0.5));
        cx += poly[i].x;
        cy += poly[i].y;
    }
    out.push(v2(cx / n as f64, cy / n as f64));
    out
}

/// Shared edge of two adjacent faces.
fn shared_edge(k: &PlanarComplex, f1: usize, f2: usize) -> Option<(usize, usize)> {
    let a = k.face(f1);
    let b = k.face(f2);
    for i in 0..3 {
        let e = (a[i].min(a[(i + 1) % 3]), a[i].max(a[(i + 1) % 3]));
        for j in 0..3 {
            if (b[j].min(b[(j + 1) % 3]), b[j].max(b[(j + 1) % 3])) == e {
                return Some(e);
            }
        }
    }
    None
}

/// Strictly inside a shadow region.
fn point_in_shadow(shadow: &Shadow, p: Vec2, eps: f64) -> bool {
    match shadow {
        Shadow::Chord(a, b) => {
            let s = eps * p.norm().max(1.0) * 10.0;
            if !(a.cross(p) > s && b.cross(p) < -s) {
                return false;
            }
            let chord = *b - *a;
            let side_p = chord.cross(p - *a);
            let side_origin = chord.cross(-*a);
            side_p * side_origin < 0.0 && side_p.abs() > eps * chord.norm()
        }
        Shadow::Seal { w, dir, keep_ccw } => {
            let rel = p - *w;
            if rel.dot(*dir) <= eps {
                return false;
            }
            let side = dir.cross(rel);
            if *keep_ccw {
                side < -eps * rel.norm().max(1.0)
            } else {
                side > eps * rel.norm().max(1.0)
            }
        }
    }
}

struct Sweep<'a> {
    k: &'a PlanarComplex,
    source: usize,
    cones: Vec<ConeSlot>,
    dist: Vec<Option<f64>>,
    records: Vec<Option<VertexRecord>>,
    heap: BinaryHeap<std::cmp::Reverse<((u64, u8, usize, usize, u64, usize), usize)>>,
    events: Vec<SweepEvent>,
    /// cones that have claimed part of each face
    face_cones: Vec<Vec<usize>>,
    /// regions of each face already claimed by any cone, in chart
    /// coordinates, keyed so excised claims can release their territory
    face_claims: Vec<Vec<(u64, Vec<Vec2>)>>,
    /// per-claim lineage: the claim whose piece the entry chord came from,
    /// and the chord in the claim's own chart (None for transmissions)
    claim_meta: BTreeMap<u64, ClaimMeta>,
    next_claim_id: u64,
    eps: f64,
}

#[derive(Clone, Debug)]
struct ClaimMeta {
    cone: usize,
    face: usize,
    parent: Option<u64>,
    chord_chart: Option<(Vec2, Vec2)>,
}

/// A cone's local frame data for one face, enough to find the new events
/// inside that face.
#[derive(Clone, Copy, Debug)]
pub struct ConeFrame {
    pub apex_dist: f64,
    pub wedge: Wedge,
    /// chart of the face -> cone frame
    pub iso: Iso2,
}

/// Find the sweep events generated inside `face ∩ cone`: the point of each
/// crossed edge nearest to the source (an edge event, unless it
/// degenerates to a vertex of the complex) and one vertex event per face
/// corner inside the wedge. Keys are d(x, apex) plus frame distance.
pub fn find_new_events(
    k: &PlanarComplex,
    frame: &ConeFrame,
    face: usize,
    entry_edge: Option<(usize, usize)>,
) -> Vec<SweepEvent> {
    let mut out = Vec::new();
    let ch = k.chart(face);
    let f = k.face(face);
    let eps = k.eps();
    let corners: [Vec2; 3] = [
        frame.iso.apply(ch.corners[0]),
        frame.iso.apply(ch.corners[1]),
        frame.iso.apply(ch.corners[2]),
    ];
    for c in 0..3 {
        if frame.wedge.contains(corners[c], k.tol.eps_angle.max(1e-9)) {
            out.push(SweepEvent {
                key: frame.apex_dist + corners[c].norm(),
                cone: usize::MAX,
                location: PointOnComplex::Vertex(f[c]),
                kind: SweepEventKind::Vertex { vertex: f[c], image: corners[c] },
            });
        }
    }
    for e in 0..3 {
        let (u, v) = (f[e], f[(e + 1) % 3]);
        if entry_edge.map_or(false, |(a, b)| (a, b) == (u, v) || (a, b) == (v, u)) {
            continue;
        }
        let a = corners[e];
        let b = corners[(e + 1) % 3];
        let Some((t0, t1)) = frame.wedge.clip_segment(a, b, eps) else {
            continue;
        };
        let pa = a.lerp(b, t0);
        let pb = a.lerp(b, t1);
        if pa.dist(pb) <= eps {
            continue;
        }
        let tc = crate::geom::seg_closest_t(pa, pb, Vec2::ZERO);
        let foot = pa.lerp(pb, tc);
        if foot.norm() <= eps {
            continue; // chord through the apex itself
        }
        // a foot within eps of a complex vertex is a vertex event, not an
        // edge event
        if foot.dist(corners[e]) <= eps || foot.dist(corners[(e + 1) % 3]) <= eps {
            continue;
        }
        let t_edge = t0 + (t1 - t0) * tc;
        out.push(SweepEvent {
            key: frame.apex_dist + foot.norm(),
            cone: usize::MAX,
            location: PointOnComplex::edge_point(u, v, t_edge),
            kind: SweepEventKind::Edge {
                from_face: face,
                edge: (u, v),
                chord: (pa, pb),
                iso: frame.iso,
                src_claim: 0,
            },
        });
    }
    out
}

impl<'a> Sweep<'a> {
    fn new(k: &'a PlanarComplex, source: usize) -> Sweep<'a> {
        Sweep {
            k,
            source,
            cones: Vec::new(),
            dist: vec![None; k.n_vertices()],
            records: vec![None; k.n_vertices()],
            heap: BinaryHeap::new(),
            events: Vec::new(),
            face_cones: vec![Vec::new(); k.n_faces()],
            face_claims: vec![Vec::new(); k.n_faces()],
            claim_meta: BTreeMap::new(),
            next_claim_id: 1,
            eps: k.eps(),
        }
    }

    fn push_event(&mut self, ev: SweepEvent) {
        let rank = event_rank(&ev);
        self.events.push(ev);
        self.heap.push(std::cmp::Reverse((rank, self.events.len() - 1)));
    }

    fn new_cone(&mut self, apex: usize, apex_dist: f64, wedge: Wedge) -> usize {
        self.cones.push(ConeSlot {
            apex,
            apex_dist,
            wedge,
            crossings: Vec::new(),
            crossing_ids: Vec::new(),
            entered: BTreeSet::new(),
            claimed: BTreeMap::new(),
            gaps: Vec::new(),
            shadows: Vec::new(),
            dead: false,
            children: None,
        });
        self.cones.len() - 1
    }

    /// Claim part of a face for a cone and generate the events of the new
    /// pieces. A chord entry is valid only inside the chord's angular
    /// sector as seen from the apex (the region whose straight segments
    /// from the apex pass through the chord); a vertex transmission claims
    /// the whole wedge. Re-entries add only previously unclaimed sectors,
    /// and boundary shadows are always excluded.
    fn enter_face(
        &mut self,
        cone: usize,
        face: usize,
        iso: Iso2,
        entry: Entry,
    ) {
        if self.cones[cone].dead {
            return;
        }
        let entry_edge = match entry {
            Entry::Chord { edge, .. } => Some(edge),
            Entry::Transmit => None,
        };
        let parent_claim = match entry {
            Entry::Chord { src_claim, .. } if src_claim != 0 => Some(src_claim),
            _ => None,
        };
        let dbg = std::env::var_os("CAT0_DEBUG_FACE").map_or(false, |w| {
            w.to_string_lossy().split(',').any(|t| t == face.to_string())
        });
        let ch = self.k.chart(face);
        let tri: Vec<Vec2> = ch.corners.iter().map(|&p| iso.apply(p)).collect();
        let wedge = self.cones[cone].wedge;
        let mut poly = wedge.clip(&tri, self.eps);
        self.cones[cone].entered.insert(face);
        if poly.len() < 3 {
            if dbg {
                eprintln!(
                    "enter f{face} cone {cone} (apex {}): wedge-empty (tri {:?} wedge {:?} entry {:?})",
                    self.cones[cone].apex, tri, wedge, entry
                );
            }
            return;
        }
        // restrict a chord entry to the chord's sector
        if let Entry::Chord { a, b, .. } = entry {
            let (sa, sb) = if a.cross(b) >= 0.0 { (a, b) } else { (b, a) };
            poly = crate::geom::clip_halfplane(&poly, Vec2::ZERO, sa, self.eps);
            poly = crate::geom::clip_halfplane(&poly, Vec2::ZERO, -sb, self.eps);
            crate::geom::dedup_ring(&mut poly, self.eps);
            if poly.len() < 3 {
                if dbg {
                    eprintln!("enter f{face} cone {cone} (apex {}): sector-empty", self.cones[cone].apex);
                }
                return;
            }
        }
        let pieces = vec![poly];
        // boundary shadows
        let mut shadowed_pieces = Vec::new();
        for piece in pieces {
            shadowed_pieces.extend(self.cones[cone].apply_shadows(piece, self.eps));
        }
        // first claim wins: subtract territory other cones already hold
        // (in chart coordinates, where claims are comparable); a wrapped
        // development is a real path, so its key can never precede the
        // true owner's claim
        let inv = iso.inverse();
        let area_floor = self.eps * self.k.scale();
        let mut final_pieces: Vec<Vec<Vec2>> = Vec::new();
        for piece in shadowed_pieces {
            let chart: Vec<Vec2> = piece.iter().map(|&p| inv.apply(p)).collect();
            let mut remnants = vec![chart];
            for (_, held) in &self.face_claims[face] {
                let mut next = Vec::new();
                for r in remnants {
                    next.extend(convex_subtract(&r, held, self.eps));
                }
                remnants = next;
                if remnants.is_empty() {
                    break;
                }
            }
            for r in remnants {
                // hair-thin remainders are numerical shavings; claiming
                // them would let repair rounds thrash forever
                if r.len() >= 3 && crate::geom::polygon_area(&r) > area_floor {
                    final_pieces.push(r.iter().map(|&p| iso.apply(p)).collect());
                }
            }
        }
        if dbg {
            eprintln!(
                "enter f{face} cone {cone} (apex {} d {:.4}): {} final pieces (shadows {}, claims held {})",
                self.cones[cone].apex,
                self.cones[cone].apex_dist,
                final_pieces.len(),
                self.cones[cone].shadows.len(),
                self.face_claims[face].len()
            );
        }
        if final_pieces.is_empty() {
            return;
        }
        let inv = iso.inverse();
        let chord_chart = match entry {
            Entry::Chord { a, b, .. } => Some((inv.apply(a), inv.apply(b))),
            Entry::Transmit => None,
        };
        let mut ids = Vec::with_capacity(final_pieces.len());
        for piece in &final_pieces {
            let id = self.next_claim_id;
            self.next_claim_id += 1;
            self.face_claims[face].push((id, piece.iter().map(|&p| inv.apply(p)).collect()));
            self.cones[cone].crossings.push(FaceCrossing { face, iso, poly: piece.clone() });
            self.cones[cone].crossing_ids.push(id);
            self.claim_meta.insert(
                id,
                ClaimMeta { cone, face, parent: parent_claim, chord_chart },
            );
            ids.push(id);
        }
        if !self.face_cones[face].contains(&cone) {
            self.face_cones[face].push(cone);
        }
        for (piece, id) in final_pieces.into_iter().zip(ids) {
            self.emit_piece_events(cone, face, iso, entry_edge, &tri, &piece, id);
        }
    }

    /// Vertex offers, edge events, and boundary gaps for one claimed
    /// piece. Chords are the piece's own boundary segments lying on face
    /// edges, so shadows and sector limits are already accounted for.
    #[allow(clippy::too_many_arguments)]
    fn emit_piece_events(
        &mut self,
        cone: usize,
        face: usize,
        iso: Iso2,
        entry_edge: Option<(usize, usize)>,
        tri: &[Vec2],
        piece: &[Vec2],
        claim_id: u64,
    ) {
        let f = self.k.face(face);
        let apex_dist = self.cones[cone].apex_dist;
        let eps = self.eps;
        // clip noise can trim a piece slightly short of a corner it
        // geometrically reaches
        let near_tol = eps.max(1e-7 * self.k.scale());

        // corner offers: any face corner inside the wedge and out of
        // shadow qualifies — settlement re-validates the offer by pulling
        // the straight segment back through the claimed pieces, so a
        // too-generous offer is rejected there rather than suppressed here
        let _ = near_tol;
        for c in 0..3 {
            let img = tri[c];
            if self.dist[f[c]].is_some() {
                continue;
            }
            if !self.cones[cone].wedge.contains(img, 1e-9) || self.shadowed(cone, img) {
                continue;
            }
            self.push_event(SweepEvent {
                key: apex_dist + img.norm(),
                cone,
                location: PointOnComplex::Vertex(f[c]),
                kind: SweepEventKind::Vertex { vertex: f[c], image: img },
            });
        }

        // chords: piece boundary segments lying on a face edge
        let n = piece.len();
        for e in 0..3 {
            let (u, v) = (f[e], f[(e + 1) % 3]);
            if entry_edge.map_or(false, |(a, b)| (a, b) == (u, v) || (a, b) == (v, u)) {
                continue;
            }
            let ea = tri[e];
            let eb = tri[(e + 1) % 3];
            let elen = ea.dist(eb).max(eps);
            let on_line = |p: Vec2| ((eb - ea).cross(p - ea)).abs() <= eps * elen * 100.0;
            for i in 0..n {
                let pa = piece[i];
                let pb = piece[(i + 1) % n];
                if pa.dist(pb) <= eps * 10.0 || !on_line(pa) || !on_line(pb) {
                    continue;
                }
                if self.k.face_across(face, u, v).is_none() {
                    // boundary: terminal gap plus a shadow behind it; the
                    // shadow also excises claims made earlier around it
                    self.cones[cone].gaps.push(BoundaryGap { face, edge: (u, v), a: pa, b: pb });
                    let (sa, sb) = if pa.cross(pb) >= 0.0 { (pa, pb) } else { (pb, pa) };
                    self.cones[cone].shadows.push(Shadow::Chord(sa, sb));
                    self.reapply_shadows(cone);
                    continue;
                }
                let tc = crate::geom::seg_closest_t(pa, pb, Vec2::ZERO);
                let foot = pa.lerp(pb, tc);
                if foot.norm() <= eps {
                    continue;
                }
                let t_edge = crate::geom::seg_closest_t(ea, eb, foot);
                self.push_event(SweepEvent {
                    key: apex_dist + foot.norm(),
                    cone,
                    location: PointOnComplex::edge_point(u, v, t_edge),
                    kind: SweepEventKind::Edge {
                        from_face: face,
                        edge: (u, v),
                        chord: (pa, pb),
                        iso,
                        src_claim: claim_id,
                    },
                });
            }
        }
    }

    /// Remove one claim entirely (occupancy, owner crossing, and meta) and
    /// cascade to descendants whose entry chords it supported.
    fn remove_claim(&mut self, id: u64) {
        let Some(meta) = self.claim_meta.remove(&id) else { return };
        self.face_claims[meta.face].retain(|(cid, _)| *cid != id);
        if let Some(k) = self.cones[meta.cone].crossing_ids.iter().position(|c| *c == id) {
            self.cones[meta.cone].crossings.remove(k);
            self.cones[meta.cone].crossing_ids.remove(k);
        }
        self.prune_claim_children(id, meta.face, &[]);
    }

    /// Remove the children of a claim whose entry chord no longer lies on
    /// any surviving remnant of it (chords sampled at quarter points).
    fn prune_claim_children(&mut self, parent_id: u64, parent_face: usize, survivors: &[Vec<Vec2>]) {
        let children: Vec<u64> = self
            .claim_meta
            .iter()
            .filter(|(_, m)| m.parent == Some(parent_id))
            .map(|(id, _)| *id)
            .collect();
        for child in children {
            let keep = {
                let m = &self.claim_meta[&child];
                match (m.chord_chart, self.k.glue_iso(m.face, parent_face)) {
                    (Some((a, b)), Ok(glue)) if !survivors.is_empty() => {
                        let mut alive = false;
                        for t in [0.25, 0.5, 0.75] {
                            let p = glue.apply(a.lerp(b, t));
                            if survivors.iter().any(|poly| {
                                crate::geom::convex_contains(poly, p, self.eps * 1e3)
                            }) {
                                alive = true;
                                break;
                            }
                        }
                        alive
                    }
                    _ => false,
                }
            };
            if !keep {
                self.remove_claim(child);
            }
        }
    }

    /// Remove a chart-space region from every existing claim of a face
    /// (the region has been ruled to belong to newly spawned cones). The
    /// owners' crossings are rebuilt accordingly.
    fn excise_chart_region(&mut self, face: usize, region: &[Vec2]) {
        if region.len() < 3 {
            return;
        }
        let ids: Vec<u64> = self.face_claims[face]
            .iter()
            .filter(|(_, poly)| {
                probe_points(poly)
                    .iter()
                    .any(|&p| crate::geom::convex_contains(region, p, -self.eps * 10.0))
            })
            .map(|(id, _)| *id)
            .collect();
        if ids.is_empty() {
            return;
        }
        for id in ids {
            // find the owner crossing
            let mut owner: Option<(usize, usize)> = None;
            'search: for (ci, slot) in self.cones.iter().enumerate() {
                for (k, cid) in slot.crossing_ids.iter().enumerate() {
                    if *cid == id {
                        owner = Some((ci, k));
                        break 'search;
                    }
                }
            }
            self.face_claims[face].retain(|(cid, _)| *cid != id);
            let Some((ci, k)) = owner else { continue };
            let cross = self.cones[ci].crossings[k].clone();
            let inv = cross.iso.inverse();
            let chart: Vec<Vec2> = cross.poly.iter().map(|&p| inv.apply(p)).collect();
            let remnants = convex_subtract(&chart, region, self.eps);
            // replace the crossing with the remnants
            self.cones[ci].crossings.remove(k);
            self.cones[ci].crossing_ids.remove(k);
            for r in remnants {
                if r.len() >= 3 && crate::geom::polygon_area(&r) > self.eps * self.k.scale() {
                    let nid = self.next_claim_id;
                    self.next_claim_id += 1;
                    self.face_claims[face].push((nid, r.clone()));
                    self.cones[ci].crossings.push(FaceCrossing {
                        face,
                        iso: cross.iso,
                        poly: r.iter().map(|&p| cross.iso.apply(p)).collect(),
                    });
                    self.cones[ci].crossing_ids.push(nid);
                }
            }
        }
    }

    /// Re-clip every claim of a cone against its current shadow set
    /// (called when a new shadow is recorded). Excised parts release their
    /// occupancy so the rightful cones can claim the territory.
    fn reapply_shadows(&mut self, cone: usize) {
        let crossings = self.cones[cone].crossings.clone();
        let old_ids = self.cones[cone].crossing_ids.clone();
        for (cross, id) in crossings.into_iter().zip(old_ids) {
            let pieces = self.cones[cone].apply_shadows(cross.poly.clone(), self.eps);
            if pieces.len() == 1 && pieces[0].len() == cross.poly.len() {
                continue; // untouched
            }
            let Some(meta) = self.claim_meta.get(&id).cloned() else { continue };
            let Some(k) = self.cones[cone].crossing_ids.iter().position(|c| *c == id) else {
                continue;
            };
            self.claim_meta.remove(&id);
            self.face_claims[cross.face].retain(|(cid, _)| *cid != id);
            self.cones[cone].crossings.remove(k);
            self.cones[cone].crossing_ids.remove(k);
            let inv = cross.iso.inverse();
            let mut remnants_chart = Vec::new();
            for piece in pieces {
                if piece.len() < 3 {
                    continue;
                }
                let nid = self.next_claim_id;
                self.next_claim_id += 1;
                let chart: Vec<Vec2> = piece.iter().map(|&p| inv.apply(p)).collect();
                self.face_claims[cross.face].push((nid, chart.clone()));
                remnants_chart.push(chart);
                self.cones[cone].crossings.push(FaceCrossing {
                    face: cross.face,
                    iso: cross.iso,
                    poly: piece,
                });
                self.cones[cone].crossing_ids.push(nid);
                self.claim_meta.insert(
                    nid,
                    ClaimMeta {
                        cone,
                        face: cross.face,
                        parent: meta.parent,
                        chord_chart: meta.chord_chart,
                    },
                );
            }
            self.prune_claim_children(id, cross.face, &remnants_chart);
        }
    }

    fn shadowed(&self, cone: usize, p: Vec2) -> bool {
        self.cones[cone].shadows.iter().any(|sh| point_in_shadow(sh, p, self.eps))
    }

    /// Walk an edge event across into the next face, placing it with the
    /// iso of the development layer the chord came from.
    fn process_edge_event(&mut self, ev_idx: usize) {
        let ev = self.events[ev_idx].clone();
        let SweepEventKind::Edge { from_face, edge, chord, iso, src_claim } = ev.kind else {
            unreachable!()
        };
        // a chord whose source claim was evicted is void
        if src_claim != 0 && !self.claim_meta.contains_key(&src_claim) {
            return;
        }
        let cone = self.resolve_cone(ev.cone, chord.0.lerp(chord.1, 0.5));
        let Some(next) = self.k.face_across(from_face, edge.0, edge.1) else {
            return;
        };
        let glue = match self.k.glue_iso(next, from_face) {
            Ok(g) => g,
            Err(_) => return,
        };
        let iso_next = iso.compose(&glue);
        self.enter_face(
            cone,
            next,
            iso_next,
            Entry::Chord { edge, a: chord.0, b: chord.1, src_claim },
        );
    }

    /// Descend through split cones to the live one containing `p`.
    fn resolve_cone(&self, mut cone: usize, p: Vec2) -> usize {
        while let Some((cw, ccw)) = self.cones[cone].children {
            let ray = self.cones[ccw].wedge.dir_right;
            cone = if ray.cross(p) >= 0.0 { ccw } else { cw };
        }
        cone
    }

    /// All live descendants of a (possibly split) cone, the one whose
    /// wedge direction matches `p` first.
    fn live_descendants(&self, root: usize, p: Vec2) -> Vec<usize> {
        let preferred = self.resolve_cone(root, p);
        let mut out = vec![preferred];
        let mut stack = vec![root];
        while let Some(c) = stack.pop() {
            match self.cones[c].children {
                Some((a, b)) => {
                    stack.push(a);
                    stack.push(b);
                }
                None => {
                    if c != preferred {
                        out.push(c);
                    }
                }
            }
        }
        out
    }

    /// Live cones that plausibly reach vertex `v`: they claim one of its
    /// fan faces and their straight apex distance to v matches `key`.
    /// Returns the vertex image in each cone's frame.
    fn vertex_candidates(&self, v: usize, key: f64) -> Vec<(usize, Vec2)> {
        let fan = self.k.fan(v);
        let tol = 1e-6 * self.k.scale().max(1.0);
        let mut out: Vec<(usize, Vec2)> = Vec::new();
        let mut seen = BTreeSet::new();
        for it in &fan.items {
            for &ci in &self.face_cones[it.face] {
                if self.cones[ci].dead || !seen.insert(ci) {
                    continue;
                }
                let mut best: Option<(f64, Vec2)> = None;
                for jt in &fan.items {
                    for cross in self.cones[ci].crossings.iter().filter(|c| c.face == jt.face) {
                        let w = cross.iso.apply(self.k.vertex_chart_pos(jt.face, v));
                        let err = (self.cones[ci].apex_dist + w.norm() - key).abs();
                        if best.map_or(true, |(be, _)| err < be) {
                            best = Some((err, w));
                        }
                    }
                }
                if let Some((err, w)) = best {
                    if err <= tol && !self.shadowed(ci, w) {
                        out.push((ci, w));
                    }
                }
            }
        }
        out
    }

    /// Split a cone along the ray through `m` (unit, in the cone frame).
    /// Returns (clockwise child, counterclockwise child).
    fn split_cone(&mut self, cone: usize, m: Vec2) -> (usize, usize) {
        let slot = self.cones[cone].clone();
        let cw = self.new_cone(
            slot.apex,
            slot.apex_dist,
            Wedge { dir_right: slot.wedge.dir_right, dir_left: m },
        );
        let ccw = self.new_cone(
            slot.apex,
            slot.apex_dist,
            Wedge { dir_right: m, dir_left: slot.wedge.dir_left },
        );
        self.cones[cw].shadows = slot.shadows.clone();
        self.cones[ccw].shadows = slot.shadows.clone();
        self.cones[cw].claimed = slot.claimed.clone();
        self.cones[ccw].claimed = slot.claimed.clone();
        self.cones[cw].entered = slot.entered.clone();
        self.cones[ccw].entered = slot.entered.clone();
        for cross in &slot.crossings {
            for (child, keep_ccw) in [(cw, false), (ccw, true)] {
                let mut half = if keep_ccw {
                    crate::geom::clip_halfplane(&cross.poly, Vec2::ZERO, m, self.eps)
                } else {
                    crate::geom::clip_halfplane(&cross.poly, Vec2::ZERO, -m, self.eps)
                };
                crate::geom::dedup_ring(&mut half, self.eps);
                if half.len() >= 3 {
                    // the parent's occupancy record stands; the halves get
                    // fresh ids so later excisions release correctly
                    let id = self.next_claim_id;
                    self.next_claim_id += 1;
                    let inv = cross.iso.inverse();
                    self.face_claims[cross.face]
                        .push((id, half.iter().map(|&p| inv.apply(p)).collect()));
                    self.cones[child].crossings.push(FaceCrossing {
                        face: cross.face,
                        iso: cross.iso,
                        poly: half,
                    });
                    self.cones[child].crossing_ids.push(id);
                    self.claim_meta.insert(
                        id,
                        ClaimMeta { cone: child, face: cross.face, parent: None, chord_chart: None },
                    );
                    if !self.face_cones[cross.face].contains(&child) {
                        self.face_cones[cross.face].push(child);
                    }
                }
            }
        }
        // release the parent's occupancy (the children re-registered)
        for id in &slot.crossing_ids {
            for fc in self.face_claims.iter_mut() {
                fc.retain(|(cid, _)| cid != id);
            }
        }
        for gap in &slot.gaps {
            for (child, keep_ccw) in [(cw, false), (ccw, true)] {
                let (fa, fb) = (m.cross(gap.a), m.cross(gap.b));
                let (keep_a, keep_b) = if keep_ccw {
                    (fa >= -self.eps, fb >= -self.eps)
                } else {
                    (fa <= self.eps, fb <= self.eps)
                };
                if keep_a && keep_b {
                    self.cones[child].gaps.push(gap.clone());
                } else if keep_a || keep_b {
                    let t = (fa / (fa - fb)).clamp(0.0, 1.0);
                    let mid = gap.a.lerp(gap.b, t);
                    let g = if keep_a {
                        BoundaryGap { a: gap.a, b: mid, ..gap.clone() }
                    } else {
                        BoundaryGap { a: mid, b: gap.b, ..gap.clone() }
                    };
                    if g.a.dist(g.b) > self.eps {
                        self.cones[child].gaps.push(g);
                    }
                }
            }
        }
        self.cones[cone].dead = true;
        self.cones[cone].children = Some((cw, ccw));
        // fresh frontier events for the children
        for child in [cw, ccw] {
            let crossings = self.cones[child].crossings.clone();
            let ids = self.cones[child].crossing_ids.clone();
            for (cross, id) in crossings.iter().zip(ids) {
                let tri: Vec<Vec2> = self
                    .k
                    .chart(cross.face)
                    .corners
                    .iter()
                    .map(|&p| cross.iso.apply(p))
                    .collect();
                self.emit_piece_events(child, cross.face, cross.iso, None, &tri, &cross.poly, id);
            }
        }
        (cw, ccw)
    }

    fn drain(&mut self, guard: &mut usize, guard_max: usize) -> Result<()> {
        while let Some(std::cmp::Reverse((_, idx))) = self.heap.pop() {
            *guard += 1;
            if *guard > guard_max {
                return Err(Error::Numerical("sweep exceeded its event budget".into()));
            }
            let ev = self.events[idx].clone();
            match ev.kind {
                SweepEventKind::Edge { .. } => {
                    if self.cones[ev.cone].dead && self.cones[ev.cone].children.is_some() {
                        // replacements were queued when the cone split
                        continue;
                    }
                    self.process_edge_event(idx);
                }
                SweepEventKind::Vertex { vertex, image } => {
                    if self.dist[vertex].is_none() {
                        self.process_vertex_event(vertex, ev.key, ev.cone, image)?;
                    }
                }
            }
        }
        Ok(())
    }

    /// Settle the best legal relay offer among unreached vertices, if any.
    /// A relay bends at a settled vertex u and runs straight to v through
    /// an unfolded face strip, found by windowed development search over
    /// u's legal bend sector. When the sweep starves a vertex, its true
    /// tree leg is exactly such a development, so iterating this pass in
    /// key order completes the map.
    fn relay_pass(&mut self) -> Result<bool> {
        let pi = std::f64::consts::PI;
        type Cand = (f64, usize, usize, Vec<usize>, Vec2, Vec<Iso2>);
        let mut best: Option<Cand> = None;
        let unreached: Vec<usize> =
            (0..self.k.n_vertices()).filter(|&v| self.dist[v].is_none()).collect();
        if unreached.is_empty() {
            return Ok(false);
        }
        for u in 0..self.k.n_vertices() {
            let Some(du) = self.dist[u] else { continue };
            let Some(rec) = self.records[u].as_ref() else {
                if u != self.source {
                    continue;
                }
                // the source bends freely: its legal sector is the full fan
                for &v in &unreached {
                    if let Some((len, faces, img, isos)) =
                        self.window_search(u, v, None)
                    {
                        let key = len;
                        if best.as_ref().map_or(true, |(bk, bv, ..)| (key, v) < (*bk, *bv)) {
                            best = Some((key, v, u, faces, img, isos));
                        }
                    }
                }
                continue;
            };
            // legal bend sector(s) at u: at least π from the arrival on
            // both sides
            let back_face = rec.arrive_face;
            let m = rec.leg.breakpoints.len();
            let p_prev = self.k.chart_pos(back_face, &rec.leg.breakpoints[m - 2])?;
            let p_here = self.k.chart_pos(back_face, &rec.leg.breakpoints[m - 1])?;
            let beta = self.k.fan_coord(u, back_face, (p_prev - p_here).normalized());
            let fan_u = self.k.fan(u);
            let theta = fan_u.total;
            let sector = if fan_u.closed {
                if theta - 2.0 * pi > 1e-9 {
                    Some((beta + pi, beta + theta - pi))
                } else {
                    None
                }
            } else {
                // boundary vertex: up to two one-sided sectors; search them
                // as one span from β+π wrapping is not meaningful here, so
                // handle each side separately below
                None
            };
            let mut sectors: Vec<(f64, f64)> = Vec::new();
            if let Some(sec) = sector {
                sectors.push(sec);
            } else if !fan_u.closed {
                if beta + pi < theta - 1e-9 {
                    sectors.push((beta + pi, theta));
                }
                if beta - pi > 1e-9 {
                    sectors.push((0.0, beta - pi));
                }
            }
            for sec in sectors {
                for &v in &unreached {
                    if let Some((len, faces, img, isos)) =
                        self.window_search(u, v, Some(sec))
                    {
                        let key = du + len;
                        if best.as_ref().map_or(true, |(bk, bv, ..)| (key, v) < (*bk, *bv)) {
                            best = Some((key, v, u, faces, img, isos));
                        }
                    }
                }
            }
        }
        if std::env::var_os("CAT0_DEBUG_RELAY").is_some() {
            eprintln!(
                "relay: unreached {:?}, best {:?}",
                unreached,
                best.as_ref().map(|(k, v, u, f, ..)| (*k, *v, *u, f.len()))
            );
        }
        let Some((key, v, u, faces, img, isos)) = best else {
            return Ok(false);
        };
        // pull the straight segment back through the strip
        let mut bps = vec![PointOnComplex::Vertex(u)];
        let mut seg_faces = Vec::new();
        let mut cur = Vec2::ZERO;
        for w in 0..faces.len() - 1 {
            let sh = shared_edge(self.k, faces[w], faces[w + 1])
                .ok_or_else(|| Error::Numerical("relay strip broke".into()))?;
            let a = isos[w].apply(self.k.vertex_chart_pos(faces[w], sh.0));
            let b = isos[w].apply(self.k.vertex_chart_pos(faces[w], sh.1));
            let Some((_, t)) = crate::geom::line_intersect(cur, img, a, b) else {
                return Err(Error::Numerical("relay strip crossing lost".into()));
            };
            bps.push(PointOnComplex::edge_point(sh.0, sh.1, t.clamp(0.0, 1.0)));
            seg_faces.push(faces[w]);
            let _ = cur;
            cur = Vec2::ZERO; // the segment stays 0 -> img in the common frame
        }
        bps.push(PointOnComplex::Vertex(v));
        seg_faces.push(*faces.last().unwrap());
        let leg = GeodesicPath::new(self.k, bps, seg_faces)?;
        self.settle_vertex(v, key, leg, None)?;
        Ok(true)
    }

    /// Windowed development search: the shortest straight development from
    /// `u` (frame origin) to `v` whose initial direction lies in the given
    /// fan sector, marching breadth-first over face strips with angular
    /// windows that only narrow. Returns the length, the face chain, the
    /// image of v, and the per-face placements.
    #[allow(clippy::type_complexity)]
    fn window_search(
        &self,
        u: usize,
        v: usize,
        sector: Option<(f64, f64)>,
    ) -> Option<(f64, Vec<usize>, Vec2, Vec<Iso2>)> {
        let fan = self.k.fan(u);
        let theta = fan.total;
        // states: (face, iso, window_right, window_left, chain index)
        struct St {
            face: usize,
            iso: Iso2,
            wr: Vec2,
            wl: Vec2,
            parent: usize,
        }
        let mut states: Vec<St> = Vec::new();
        for it in &fan.items {
            let lo = it.offset;
            let w = self.k.corner_angle(it.face, it.corner);
            // overlap with the sector (cyclic when the fan is closed)
            let (mut a0, mut a1) = (0.0_f64, w);
            if let Some((slo, shi)) = sector {
                let (mut rlo, mut rhi) = (slo - lo, shi - lo);
                if fan.closed {
                    // shift into a window near [0, w]
                    while rhi < 0.0 {
                        rlo += theta;
                        rhi += theta;
                    }
                    while rlo > w {
                        rlo -= theta;
                        rhi -= theta;
                    }
                }
                a0 = a0.max(rlo);
                a1 = a1.min(rhi);
                if a1 - a0 <= 1e-9 {
                    continue;
                }
            }
            let pv = self.k.vertex_chart_pos(it.face, u);
            let f = self.k.face(it.face);
            let first_ray =
                (self.k.vertex_chart_pos(it.face, f[(it.corner + 1) % 3]) - pv).normalized();
            // place the face with its first fan ray at angle 0
            let rho = -first_ray.angle();
            let rot = Iso2::new(rho, Vec2::ZERO);
            let iso = Iso2 { c: rot.c, s: rot.s, t: -rot.apply(pv) };
            states.push(St {
                face: it.face,
                iso,
                wr: v2(a0.cos(), a0.sin()),
                wl: v2(a1.cos(), a1.sin()),
                parent: usize::MAX,
            });
        }
        let cap = 64 * self.k.n_faces().max(8);
        let mut best: Option<(f64, usize, Vec2)> = None;
        let mut i = 0;
        while i < states.len() {
            if states.len() > cap {
                return None;
            }
            let (face, iso, wr, wl) = (states[i].face, states[i].iso, states[i].wr, states[i].wl);
            let wedge = Wedge { dir_right: wr, dir_left: wl };
            let fverts = self.k.face(face);
            // is v a corner of this face inside the window?
            for (ci, &c) in fverts.iter().enumerate() {
                if c == v {
                    let img = iso.apply(self.k.chart(face).corners[ci]);
                    if wedge.contains(img, 1e-9) && img.norm() > self.eps {
                        if best.as_ref().map_or(true, |(bl, _, _)| img.norm() < *bl) {
                            best = Some((img.norm(), i, img));
                        }
                    }
                }
            }
            // expand across edges
            let ch = self.k.chart(face);
            for e in 0..3 {
                let (a, b) = (fverts[e], fverts[(e + 1) % 3]);
                let Some(next) = self.k.face_across(face, a, b) else { continue };
                let pa = iso.apply(ch.corners[e]);
                let pb = iso.apply(ch.corners[(e + 1) % 3]);
                let Some((t0, t1)) = wedge.clip_segment(pa, pb, self.eps) else { continue };
                let qa = pa.lerp(pb, t0);
                let qb = pa.lerp(pb, t1);
                if qa.dist(qb) <= self.eps * 10.0 {
                    continue;
                }
                // prune hopeless states: the chord is already farther than
                // the best hit
                let tc = crate::geom::seg_closest_t(qa, qb, Vec2::ZERO);
                if let Some((bl, _, _)) = &best {
                    if qa.lerp(qb, tc).norm() >= *bl {
                        continue;
                    }
                }
                let Ok(glue) = self.k.glue_iso(next, face) else { continue };
                let (swr, swl) = if qa.cross(qb) >= 0.0 { (qa, qb) } else { (qb, qa) };
                states.push(St {
                    face: next,
                    iso: iso.compose(&glue),
                    wr: swr.normalized(),
                    wl: swl.normalized(),
                    parent: i,
                });
            }
            i += 1;
        }
        let (len, end, img) = best?;
        let mut chain_faces = Vec::new();
        let mut chain_isos = Vec::new();
        let mut cur = end;
        while cur != usize::MAX {
            chain_faces.push(states[cur].face);
            chain_isos.push(states[cur].iso);
            cur = states[cur].parent;
        }
        chain_faces.reverse();
        chain_isos.reverse();
        Some((len, chain_faces, img, chain_isos))
    }

    fn run(&mut self) -> Result<()> {
        self.dist[self.source] = Some(0.0);
        let fan = self.k.fan(self.source).clone();
        for it in &fan.items {
            let f = self.k.face(it.face);
            let pv = self.k.vertex_chart_pos(it.face, self.source);
            let first_ray =
                (self.k.vertex_chart_pos(it.face, f[(it.corner + 1) % 3]) - pv).normalized();
            // frame: source at origin, first fan ray of the face at angle 0
            let rho = -first_ray.angle();
            let rot = Iso2::new(rho, Vec2::ZERO);
            let iso = Iso2 { c: rot.c, s: rot.s, t: -rot.apply(pv) };
            let ang = self.k.corner_angle(it.face, it.corner);
            let wedge = Wedge { dir_right: v2(1.0, 0.0), dir_left: v2(ang.cos(), ang.sin()) };
            let cone = self.new_cone(self.source, 0.0, wedge);
            self.enter_face(cone, it.face, iso, Entry::Transmit);
        }

        let mut guard = 0usize;
        let nf = self.k.n_faces() + 2;
        let guard_max = 400 * nf * nf + 100_000;
        self.drain(&mut guard, guard_max)?;

        // Repair rounds, run only against concrete defects: vertices the
        // queue never settled (relayed through a legal bend at a settled
        // neighbor) and faces no cone claimed at all (entered from any
        // adjacent claim). Leftover eps-slivers inside otherwise claimed
        // faces are tolerated; widening repairs beyond real defects lets
        // development layers thrash.
        for _round in 0..(2 * self.k.n_vertices() + 8) {
            let unreached = (0..self.k.n_vertices()).any(|v| self.dist[v].is_none());
            let empty_faces: Vec<usize> =
                (0..self.k.n_faces()).filter(|&f| self.face_cones[f].is_empty()).collect();
            if !unreached && empty_faces.is_empty() {
                break;
            }
            let before = self.next_claim_id;
            let mut relayed = false;
            if unreached {
                relayed = self.relay_pass()?;
            }
            for &f in &empty_faces {
                let fverts = self.k.face(f);
                for e in 0..3 {
                    let (u, v) = (fverts[e], fverts[(e + 1) % 3]);
                    let Some(nb) = self.k.face_across(f, u, v) else { continue };
                    let Ok(glue) = self.k.glue_iso(f, nb) else { continue };
                    let n_cones = self.cones.len();
                    for cone in 0..n_cones {
                        if self.cones[cone].dead {
                            continue;
                        }
                        let isos: Vec<Iso2> = self.cones[cone]
                            .crossings
                            .iter()
                            .filter(|c| c.face == nb)
                            .map(|c| c.iso)
                            .collect();
                        for iso in isos {
                            self.enter_face(cone, f, iso.compose(&glue), Entry::Transmit);
                        }
                    }
                }
            }
            self.drain(&mut guard, guard_max)?;
            if std::env::var_os("CAT0_DEBUG_REPAIR").is_some() {
                eprintln!(
                    "repair round {_round}: claims {} -> {}, relayed {relayed}",
                    before, self.next_claim_id
                );
            }
            if self.next_claim_id == before && !relayed {
                break;
            }
        }

        if std::env::var_os("CAT0_DEBUG_CONES").is_some() {
            for (ci, slot) in self.cones.iter().enumerate() {
                if !slot.dead && slot.apex_dist > 0.0 {
                    eprintln!(
                        "live cone {ci}: apex {} d {:.3} wedge {:.4} rad, faces {:?}, shadows {}",
                        slot.apex,
                        slot.apex_dist,
                        slot.wedge.angle(),
                        slot.crossings.iter().map(|c| c.face).collect::<Vec<_>>(),
                        slot.shadows.len()
                    );
                }
            }
        }
        for vtx in 0..self.k.n_vertices() {
            if self.dist[vtx].is_none() {
                if std::env::var_os("CAT0_DEBUG_UNREACHED").is_some() {
                    let empty: Vec<usize> =
                        (0..self.k.n_faces()).filter(|&f| self.face_cones[f].is_empty()).collect();
                    eprintln!("faces never claimed: {empty:?}");
                    for &f in &empty {
                        eprintln!("  face {f} = {:?}", self.k.face(f));
                    }
                    for it in &self.k.fan(vtx).items {
                        let pv = self.k.vertex_chart_pos(it.face, vtx);
                        eprintln!("unreached v{vtx}: fan face {}", it.face);
                        for (ci, slot) in self.cones.iter().enumerate() {
                            if slot.dead {
                                continue;
                            }
                            for cross in slot.crossings.iter().filter(|c| c.face == it.face) {
                                let w = cross.iso.apply(pv);
                                let mind = cross
                                    .poly
                                    .iter()
                                    .enumerate()
                                    .map(|(i, _)| {
                                        let a = cross.poly[i];
                                        let b = cross.poly[(i + 1) % cross.poly.len()];
                                        let t = crate::geom::seg_closest_t(a, b, w);
                                        a.lerp(b, t).dist(w)
                                    })
                                    .fold(f64::INFINITY, f64::min);
                                let in_wedge = slot.wedge.contains(w, 1e-9);
                                let shd = slot
                                    .shadows
                                    .iter()
                                    .position(|sh| point_in_shadow(sh, w, self.eps));
                                let occupied = self.face_claims[it.face]
                                    .iter()
                                    .find(|(_, poly)| {
                                        crate::geom::convex_contains(poly, pv, self.eps * 100.0)
                                    })
                                    .map(|(id, _)| *id);
                                eprintln!(
                                    "  cone {ci} (apex {} d {:.3}) piece dist-to-v {:.3e}, |w| {:.4}, in_wedge {in_wedge}, shadow {shd:?}, chart-occupied {occupied:?}",
                                    slot.apex, slot.apex_dist, mind, slot.apex_dist + w.norm()
                                );
                            }
                        }
                    }
                }
                return Err(Error::Numerical(format!(
                    "sweep terminated with vertex {vtx} unreached"
                )));
            }
        }
        Ok(())
    }

    fn process_vertex_event(
        &mut self,
        v: usize,
        key: f64,
        via_cone: usize,
        image: Vec2,
    ) -> Result<()> {
        // the geodesic-tree leg from the cone apex to v; splits can strand
        // a sliver of the offer's region in a sibling, so fall back across
        // the live descendants when the preferred one cannot realize it
        let candidates = self.live_descendants(via_cone, image);
        let mut resolved: Option<(usize, GeodesicPath)> = None;
        let mut first_err: Option<Error> = None;
        for &ci in &candidates {
            match pull_back_segment(
                self.k,
                &self.cones[ci].crossings,
                PointOnComplex::Vertex(self.cones[ci].apex),
                image,
                PointOnComplex::Vertex(v),
            ) {
                Ok(leg) => {
                    resolved = Some((ci, leg));
                    break;
                }
                Err(e) => {
                    if first_err.is_none() {
                        first_err = Some(e);
                    }
                }
            }
        }
        let Some((cone, leg)) = resolved else {
            if std::env::var_os("CAT0_DEBUG_VERTEX").is_some() {
                eprintln!(
                    "  REJECT offer v{v} key {key:.6} via {via_cone}: {}",
                    first_err.map(|e| e.to_string()).unwrap_or_default()
                );
            }
            // the straight route from this cone's apex is not realizable
            // inside its claimed region (it would cross a boundary notch):
            // drop the offer; the true geodesic arrives through another
            // cone's offer with a larger key
            return Ok(());
        };
        self.settle_vertex(v, key, leg, Some(cone))
    }

    /// Finalize a vertex: record its tree leg, then run the vertex rule
    /// (seal and extend the flanking cones, split a cone the vertex fell
    /// inside, and spawn apex cones over the back sectors).
    fn settle_vertex(
        &mut self,
        v: usize,
        key: f64,
        leg: GeodesicPath,
        leg_cone: Option<usize>,
    ) -> Result<()> {
        self.dist[v] = Some(key);
        let cone = leg_cone.unwrap_or(usize::MAX);
        let arrive_face = *leg
            .seg_faces
            .last()
            .ok_or_else(|| Error::Numerical(format!("empty tree leg for vertex {v}")))?;
        let n = leg.breakpoints.len();
        let p_prev = self.k.chart_pos(arrive_face, &leg.breakpoints[n - 2])?;
        let p_here = self.k.chart_pos(arrive_face, &leg.breakpoints[n - 1])?;
        let back_dir = (p_prev - p_here).normalized();
        let beta = self.k.fan_coord(v, arrive_face, back_dir);

        if std::env::var_os("CAT0_DEBUG_VERTEX").is_some() {
            eprintln!(
                "  v{v} leg bps {:?} faces {:?} arrive_face {arrive_face} via cone {cone} (crossings {:?})",
                leg.breakpoints,
                leg.seg_faces,
                self.cones[cone].crossings.iter().map(|c| c.face).collect::<Vec<_>>()
            );
        }
        let fan_item = self
            .k
            .fan(v)
            .items
            .iter()
            .find(|it| it.face == arrive_face)
            .expect("arrival face must be in the fan")
            .clone();
        let corner = self.k.corner_angle(arrive_face, fan_item.corner);
        let local = beta - fan_item.offset;
        let parent = match &leg.breakpoints[0] {
            PointOnComplex::Vertex(u) => *u,
            _ => self.cones[cone].apex,
        };
        self.records[v] = Some(VertexRecord {
            dist: key,
            parent,
            leg,
            arrive_face,
            arrive_angles: (local, corner - local),
        });

        // classify the arrival against the cones reaching v: strictly
        // inside a cone's wedge splits it; on a wedge ray the cone flanks
        // the arrival geodesic
        let candidates = self.vertex_candidates(v, key);
        let fan = self.k.fan(v);
        let theta = fan.total;
        let closed = fan.closed;
        let ang_eps = 1e-6;

        let mut cl: Option<(usize, Vec2)> = None; // flank on the CCW side
        let mut cr: Option<(usize, Vec2)> = None;
        let mut inside: Vec<(usize, Vec2)> = Vec::new();
        for (ci, w_img) in &candidates {
            let dir = w_img.normalized();
            let wedge = self.cones[*ci].wedge;
            let s_r = wedge.dir_right.cross(dir);
            let s_l = wedge.dir_left.cross(dir);
            if s_r.abs() <= ang_eps && wedge.dir_right.dot(dir) > 0.0 {
                // v on the cone's right ray: the cone lies CCW of the ray
                if cl.is_none() {
                    cl = Some((*ci, *w_img));
                }
            } else if s_l.abs() <= ang_eps && wedge.dir_left.dot(dir) > 0.0 {
                if cr.is_none() {
                    cr = Some((*ci, *w_img));
                }
            } else if s_r > 0.0 && s_l < 0.0 {
                inside.push((*ci, *w_img));
            }
        }
        if std::env::var_os("CAT0_DEBUG_VERTEX").is_some() {
            eprintln!(
                "pop v{v} key {key:.6} beta {beta:.4} theta {theta:.4} cl {cl:?} cr {cr:?} inside {inside:?}"
            );
        }
        // prefer splitting the cone that realized the leg
        inside.sort_by_key(|(ci, _)| if *ci == cone { 0 } else { 1 });
        let mut first_split = true;
        for (ci, w_img) in inside {
            if self.cones[ci].dead {
                continue;
            }
            let m = w_img.normalized();
            let (cw_child, ccw_child) = self.split_cone(ci, m);
            if first_split {
                if cl.is_none() {
                    cl = Some((ccw_child, w_img));
                }
                if cr.is_none() {
                    cr = Some((cw_child, w_img));
                }
                first_split = false;
            }
        }

        let pi = std::f64::consts::PI;
        // seal each flank along the straight continuation of its side
        // through v: beyond v, the other side of that ray belongs to the
        // sibling cones spawned here
        if let Some((c, w)) = cl {
            if !self.cones[c].dead {
                self.cones[c].shadows.push(Shadow::Seal {
                    w,
                    dir: w.normalized(),
                    keep_ccw: true,
                });
                self.reapply_shadows(c);
            }
        }
        if let Some((c, w)) = cr {
            if !self.cones[c].dead {
                self.cones[c].shadows.push(Shadow::Seal {
                    w,
                    dir: w.normalized(),
                    keep_ccw: false,
                });
                self.reapply_shadows(c);
            }
        }
        if let Some((c, w)) = cl {
            self.extend_flank(c, v, w, beta, true);
        }
        if let Some((c, w)) = cr {
            self.extend_flank(c, v, w, beta, false);
        }
        if closed {
            let back_width = theta - 2.0 * pi;
            if back_width > 1e-7 {
                self.spawn_back_cones(v, key, beta + pi, beta + theta - pi);
            }
        } else {
            if beta + pi < theta - 1e-9 {
                self.spawn_back_cones(v, key, beta + pi, theta);
            }
            if beta - pi > 1e-9 {
                self.spawn_back_cones(v, key, 0.0, beta - pi);
            }
        }
        Ok(())
    }

    /// Enter the fan faces within π on one side of the arrival direction
    /// for a flank cone (whose side continues straight through v in its
    /// own frame).
    fn extend_flank(&mut self, cone: usize, v: usize, w_img: Vec2, beta: f64, ccw: bool) {
        if self.cones[cone].dead {
            return;
        }
        let fan = self.k.fan(v).clone();
        let theta = fan.total;
        let pi = std::f64::consts::PI;
        let back_frame_angle = (-w_img).angle();
        for it in &fan.items {
            let lo = it.offset;
            let hi = it.offset + self.k.corner_angle(it.face, it.corner);
            let face_w = hi - lo;
            let overlaps;
            let alpha; // frame angle of the face's first fan ray
            if ccw {
                let mut d = if fan.closed { (lo - beta).rem_euclid(theta) } else { lo - beta };
                if fan.closed && d > theta - face_w - 1e-9 {
                    d -= theta; // the face straddles the flank's start
                }
                overlaps = d + face_w > 1e-9 && d < pi - 1e-9;
                alpha = back_frame_angle + d;
            } else {
                let mut d = if fan.closed { (beta - hi).rem_euclid(theta) } else { beta - hi };
                if fan.closed && d > theta - face_w - 1e-9 {
                    d -= theta;
                }
                overlaps = d + face_w > 1e-9 && d < pi - 1e-9;
                alpha = back_frame_angle - d - face_w;
            }
            if std::env::var_os("CAT0_DEBUG_FLANK").is_some() {
                eprintln!(
                    "  flank v{v} cone {cone} ccw={ccw} face {} alpha {alpha:.4} overlaps {overlaps}",
                    it.face
                );
            }
            if !overlaps {
                continue;
            }
            let pv = self.k.vertex_chart_pos(it.face, v);
            let f = self.k.face(it.face);
            let first_ray =
                (self.k.vertex_chart_pos(it.face, f[(it.corner + 1) % 3]) - pv).normalized();
            let rho = alpha - first_ray.angle();
            let rot = Iso2::new(rho, Vec2::ZERO);
            let iso = Iso2 { c: rot.c, s: rot.s, t: w_img - rot.apply(pv) };
            self.enter_face(cone, it.face, iso, Entry::Transmit);
        }
    }

    /// Create apex-`v` cones covering the fan sector [lo, hi], split at
    /// every adjacent vertex whose edge direction lies strictly inside.
    fn spawn_back_cones(&mut self, v: usize, vdist: f64, lo: f64, hi: f64) {
        let fan = self.k.fan(v).clone();
        let theta = fan.total;
        let width = hi - lo;
        if width <= 1e-9 {
            return;
        }
        let mut splits: Vec<f64> = Vec::new();
        for it in &fan.items {
            let f = self.k.face(it.face);
            for w in [f[(it.corner + 1) % 3], f[(it.corner + 2) % 3]] {
                if let Some(phi) = self.k.fan_coord_of_edge(v, w) {
                    let rel = if fan.closed { (phi - lo).rem_euclid(theta) } else { phi - lo };
                    if rel > 1e-9 && rel < width - 1e-9 {
                        splits.push(rel);
                    }
                }
            }
        }
        splits.sort_by(f64::total_cmp);
        splits.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        let mut bounds = vec![0.0];
        bounds.extend(splits);
        bounds.push(width);

        // the whole back sector belongs to the cones spawned here: evict
        // any earlier claims inside it (wrapped developments of other
        // cones that crept past this vertex before it settled)
        for it in &fan.items {
            let flo = it.offset;
            let fhi = it.offset + self.k.corner_angle(it.face, it.corner);
            let face_w = fhi - flo;
            let mut rel = if fan.closed { (flo - lo).rem_euclid(theta) } else { flo - lo };
            if fan.closed && rel > theta - face_w - 1e-9 {
                rel -= theta;
            }
            if !(rel + face_w > 1e-9 && rel < width - 1e-9) {
                continue;
            }
            // chart-space sector of [lo, hi] within this face, anchored at v
            let pv = self.k.vertex_chart_pos(it.face, v);
            let (a0, a1) = (rel.max(0.0) - rel, (width.min(rel + face_w) - rel).min(face_w));
            let f = self.k.face(it.face);
            let first_ray =
                (self.k.vertex_chart_pos(it.face, f[(it.corner + 1) % 3]) - pv).normalized();
            let rot = |ang: f64| {
                v2(
                    first_ray.x * ang.cos() - first_ray.y * ang.sin(),
                    first_ray.x * ang.sin() + first_ray.y * ang.cos(),
                )
            };
            let (d0, d1) = (rot(a0), rot(a1));
            let tri = self.k.chart(it.face).corners.to_vec();
            let mut sector = crate::geom::clip_halfplane(&tri, pv, d0, self.eps);
            sector = crate::geom::clip_halfplane(&sector, pv, -d1, self.eps);
            crate::geom::dedup_ring(&mut sector, self.eps);
            self.excise_chart_region(it.face, &sector);
        }

        for bi in 0..bounds.len() - 1 {
            let (s0, s1) = (bounds[bi], bounds[bi + 1]);
            if s1 - s0 <= 1e-9 {
                continue;
            }
            let wedge = Wedge {
                dir_right: v2(1.0, 0.0),
                dir_left: v2((s1 - s0).cos(), (s1 - s0).sin()),
            };
            let cone = self.new_cone(v, vdist, wedge);
            if std::env::var_os("CAT0_DEBUG_SPAWN").is_some() {
                eprintln!(
                    "  spawn back cone {cone} at v{v}: sector [{:.4}, {:.4}] of fan (lo {lo:.4} hi {hi:.4})",
                    lo + s0,
                    lo + s1
                );
            }
            for it in &fan.items {
                let flo = it.offset;
                let fhi = it.offset + self.k.corner_angle(it.face, it.corner);
                // face interval relative to the sector start lo + s0
                let face_w = fhi - flo;
                let mut rel = if fan.closed {
                    (flo - (lo + s0)).rem_euclid(theta)
                } else {
                    flo - (lo + s0)
                };
                if fan.closed && rel > theta - face_w - 1e-9 {
                    rel -= theta; // the face straddles the sector start
                }
                if !(rel + face_w > 1e-9 && rel < (s1 - s0) - 1e-9) {
                    continue;
                }
                let pv = self.k.vertex_chart_pos(it.face, v);
                let f = self.k.face(it.face);
                let first_ray =
                    (self.k.vertex_chart_pos(it.face, f[(it.corner + 1) % 3]) - pv).normalized();
                let rho = rel - first_ray.angle();
                let rot = Iso2::new(rho, Vec2::ZERO);
                let iso = Iso2 { c: rot.c, s: rot.s, t: -rot.apply(pv) };
                self.enter_face(cone, it.face, iso, Entry::Transmit);
            }
        }
    }
}

/// Straight-segment pull-back through a set of face crossings: the
/// breakpoints are the crossings of segment 0→`target` with the face
/// triangles, mapped back to the complex.
pub(crate) fn pull_back_segment(
    k: &PlanarComplex,
    crossings: &[FaceCrossing],
    start: PointOnComplex,
    target: Vec2,
    end: PointOnComplex,
) -> Result<GeodesicPath> {
    pull_back_walk(k, crossings, start, target, end, false).map(|(p, _)| p)
}

/// Pull-back that may stop at the first coverage gap (`truncate`),
/// returning the path and the covered fraction of the segment.
pub(crate) fn pull_back_walk(
    k: &PlanarComplex,
    crossings: &[FaceCrossing],
    start: PointOnComplex,
    target: Vec2,
    end: PointOnComplex,
    truncate: bool,
) -> Result<(GeodesicPath, f64)> {
    let eps = k.eps();
    let start2 = start.clone();
    let len = target.norm();
    if len <= eps {
        let f = k
            .common_face(&start, &end)
            .ok_or_else(|| Error::Numerical("degenerate leg without a face".into()))?;
        return Ok((GeodesicPath::new(k, vec![start, end], vec![f])?, 1.0));
    }
    // Clip the segment against each crossing's claimed polygon. The
    // polygons of one cone are pairwise disjoint (unlike the unfolded face
    // triangles, which can overlap when a long strip wraps around), so the
    // resulting intervals chain without ambiguity.
    let mut intervals: Vec<(f64, f64, usize)> = Vec::new();
    for (ci, cross) in crossings.iter().enumerate() {
        let poly = &cross.poly;
        let n = poly.len();
        let mut t0 = 0.0_f64;
        let mut t1 = 1.0_f64;
        let mut ok = true;
        for i in 0..n {
            let a = poly[i];
            let b = poly[(i + 1) % n];
            let fa = (b - a).cross(-a);
            let fb = (b - a).cross(target - a);
            let e = eps * (b - a).norm().max(eps) * 10.0;
            // keep { t : f(t) >= -e } with f linear from fa to fb, so a
            // segment running along the edge stays inside while one only
            // touching the polygon degenerates to a point interval
            if fa < -e && fb < -e {
                ok = false;
                break;
            }
            if fa < -e {
                t0 = t0.max((-fa / (fb - fa)).clamp(0.0, 1.0));
            } else if fb < -e {
                t1 = t1.min((-fa / (fb - fa)).clamp(0.0, 1.0));
            }
        }
        if ok && t0 < t1 + 1e-12 {
            intervals.push((t0, t1, ci));
        }
    }
    if std::env::var_os("CAT0_DEBUG_PULLBACK").is_some() {
        eprintln!("pull_back to {target:?}:");
        for (t0, t1, ci) in &intervals {
            eprintln!("  face {} t [{t0:.4}, {t1:.4}] poly {:?}", crossings[*ci].face, crossings[*ci].poly);
        }
    }
    intervals.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
    let mut bps: Vec<PointOnComplex> = vec![start];
    let mut faces: Vec<usize> = Vec::new();
    let mut covered = 0.0_f64;
    let teps = (eps / len).max(1e-12);
    // Walk the intervals following K-adjacency: the next interval must
    // belong to the face actually across the crossed edge (or around the
    // crossed vertex). Claims developed through an unrelated chain can
    // overlap the segment in the frame; adjacency screening keeps the
    // walk on the real surface.
    let mut expect: Option<Vec<usize>> = None; // allowed faces for the next step
    let mut guard = 0;
    while covered < 1.0 - teps {
        guard += 1;
        if guard > crossings.len() + intervals.len() + 8 {
            return Err(Error::Numerical("segment pull-back failed to advance".into()));
        }
        // candidate intervals continuing from `covered`
        let mut pick: Option<(f64, f64, usize)> = None;
        for &(t0, t1, ci) in &intervals {
            if t1 <= covered + teps || t0 > covered + teps {
                continue;
            }
            let face_ok = expect.as_ref().map_or(true, |fs| fs.contains(&crossings[ci].face));
            if !face_ok {
                continue;
            }
            if pick.map_or(true, |(_, bt1, _)| t1 > bt1) {
                pick = Some((t0, t1, ci));
            }
        }
        if pick.is_none() && expect.is_some() {
            // adjacency miss (clipping noise): fall back to any interval
            for &(t0, t1, ci) in &intervals {
                if t1 <= covered + teps || t0 > covered + teps {
                    continue;
                }
                if pick.map_or(true, |(_, bt1, _)| t1 > bt1) {
                    pick = Some((t0, t1, ci));
                }
            }
        }
        let Some((_, t1, ci)) = pick else {
            if truncate {
                break;
            }
            return Err(Error::Numerical(format!(
                "segment pull-back gap at t = {covered:.6}"
            )));
        };
        let cross = &crossings[ci];
        let pt = target.scale(t1.min(1.0));
        let local = cross.iso.inverse().apply(pt);
        let bp = if t1 >= 1.0 - teps {
            end.clone()
        } else {
            k.canonical_point(cross.face, local)
        };
        // faces allowed for the next interval
        expect = match &bp {
            PointOnComplex::EdgePoint { edge, .. } => {
                Some(match k.face_across(cross.face, edge.0, edge.1) {
                    Some(f) => vec![f],
                    None => vec![],
                })
            }
            PointOnComplex::Vertex(v) => Some(k.fan(*v).items.iter().map(|it| it.face).collect()),
            PointOnComplex::FacePoint { .. } => None,
        };
        bps.push(bp);
        faces.push(cross.face);
        covered = t1;
    }
    if covered < 1.0 - teps && !truncate {
        return Err(Error::Numerical(format!(
            "segment pull-back covered only {covered:.6} of the leg"
        )));
    }
    if truncate {
        // wrap artifacts can leave a tail that no longer chains through
        // real faces; drop trailing points until the chain binds
        while bps.len() >= 2 && rebind_segment_faces(k, &mut bps, &mut faces).is_err() {
            bps.pop();
            faces.pop();
        }
        if bps.len() < 2 {
            return Ok((GeodesicPath::single_point(start2), 0.0));
        }
    }
    rebind_segment_faces(k, &mut bps, &mut faces)?;
    Ok((GeodesicPath::new(k, bps, faces)?, covered.min(1.0)))
}

/// Make sure each segment's face actually contains both its endpoints
/// (interval bookkeeping can attribute a shared-edge breakpoint to the
/// neighbor face).
fn rebind_segment_faces(
    k: &PlanarComplex,
    bps: &mut [PointOnComplex],
    faces: &mut [usize],
) -> Result<()> {
    for i in 0..faces.len() {
        let a = &bps[i];
        let b = &bps[i + 1];
        if k.chart_pos(faces[i], a).is_ok() && k.chart_pos(faces[i], b).is_ok() {
            continue;
        }
        match k.common_face(a, b) {
            Some(f) => faces[i] = f,
            None => {
                return Err(Error::Numerical(format!(
                    "path segment endpoints share no face: {a:?} -> {b:?} (breakpoints {bps:?}, faces {faces:?})"
                )))
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------
// build + finalize

/// Build the shortest path map of source `x`. A face- or edge-interior
/// source is first inserted as a new vertex (splitting the incident
/// faces); queries accept points of the original complex either way.
pub fn build_spm(k: &PlanarComplex, x: &PointOnComplex) -> Result<ShortestPathMap> {
    let rep = k.validate();
    if !rep.pass {
        return Err(Error::InvalidComplex(format!(
            "{} violation(s), first: {}",
            rep.violations.len(),
            rep.violations[0].detail
        )));
    }
    crate::complex::io::check_point(k, x)?;

    let (work, source_vertex, face_remap) = match x {
        PointOnComplex::Vertex(v) => (k.clone(), *v, None),
        other => {
            let canon = canonicalize_input(k, other);
            match canon {
                PointOnComplex::Vertex(v) => (k.clone(), v, None),
                p => {
                    let (work, nv, remap) = k.insert_vertex_at(&p)?;
                    let remap_geo = remap
                        .iter()
                        .enumerate()
                        .map(|(orig, subs)| {
                            subs.iter()
                                .map(|&wf| (wf, sub_face_corners(k, orig, &work, wf, &p)))
                                .collect()
                        })
                        .collect();
                    (work, nv, Some(remap_geo))
                }
            }
        }
    };

    let original = face_remap.as_ref().map(|_| k.clone());
    let mut sweep = Sweep::new(&work, source_vertex);
    sweep.run()?;
    let Sweep { cones, records, .. } = sweep;
    finalize(cones, records, work, source_vertex, x.clone(), face_remap, original)
}

fn canonicalize_input(k: &PlanarComplex, p: &PointOnComplex) -> PointOnComplex {
    let f = k.point_faces(p)[0];
    let pos = k.chart_pos(f, p).expect("point in its own face");
    k.canonical_point(f, pos)
}

/// Corners of a work sub-face expressed in the original face chart.
fn sub_face_corners(
    k: &PlanarComplex,
    orig_face: usize,
    work: &PlanarComplex,
    work_face: usize,
    inserted: &PointOnComplex,
) -> [Vec2; 3] {
    let wf = work.face(work_face);
    let mut out = [Vec2::ZERO; 3];
    for (i, &wv) in wf.iter().enumerate() {
        out[i] = if wv < k.n_vertices() {
            k.vertex_chart_pos(orig_face, wv)
        } else {
            k.chart_pos(orig_face, inserted).expect("inserted point in original face")
        };
    }
    out
}

fn finalize(
    cones: Vec<ConeSlot>,
    records: Vec<Option<VertexRecord>>,
    work: PlanarComplex,
    source_vertex: usize,
    source_input: PointOnComplex,
    face_remap: Option<Vec<Vec<(usize, [Vec2; 3])>>>,
    original: Option<PlanarComplex>,
) -> Result<ShortestPathMap> {
    let k = &work;
    let eps = k.eps();

    let boundary = k.boundary().to_vec();
    let bpos: BTreeMap<(usize, usize), usize> = boundary
        .iter()
        .enumerate()
        .map(|(i, &u)| {
            let v = boundary[(i + 1) % boundary.len()];
            ((u, v), i)
        })
        .collect();

    let mut finals: Vec<((usize, u64), usize)> = Vec::new();
    for (ci, slot) in cones.iter().enumerate() {
        if slot.dead || slot.crossings.is_empty() {
            continue;
        }
        let mut best: Option<(usize, f64)> = None;
        for gap in &slot.gaps {
            let f = k.face(gap.face);
            let Some(he) = (0..3).find(|&e| {
                (f[e], f[(e + 1) % 3]) == gap.edge || (f[(e + 1) % 3], f[e]) == gap.edge
            }) else {
                continue;
            };
            let (u, v) = (f[he], f[(he + 1) % 3]);
            let Some(&pos) = bpos.get(&(u, v)) else { continue };
            let inv = match slot.crossing_for(gap.face) {
                Some(c) => c.iso.inverse(),
                None => continue,
            };
            let a_chart = k.vertex_chart_pos(gap.face, u);
            let b_chart = k.vertex_chart_pos(gap.face, v);
            let ga = inv.apply(gap.a);
            let gb = inv.apply(gap.b);
            let t = crate::geom::seg_closest_t(a_chart, b_chart, ga)
                .min(crate::geom::seg_closest_t(a_chart, b_chart, gb));
            if best.map_or(true, |(bp, bt)| (pos, t) < (bp, bt)) {
                best = Some((pos, t));
            }
        }
        let key = match best {
            Some((pos, t)) => (pos, t.max(0.0).to_bits()),
            None => (usize::MAX, 0),
        };
        finals.push((key, ci));
    }
    finals.sort_unstable();

    let mut out_cones = Vec::with_capacity(finals.len());
    let mut face_entries: Vec<Vec<FaceEntry>> = vec![Vec::new(); k.n_faces()];
    for (order_idx, &(_, ci)) in finals.iter().enumerate() {
        let slot = &cones[ci];
        let side_right = side_chain(k, slot, false, eps)?;
        let side_left = side_chain(k, slot, true, eps)?;
        for cross in &slot.crossings {
            let inv = cross.iso.inverse();
            face_entries[cross.face].push(FaceEntry {
                cone: order_idx,
                poly: cross.poly.iter().map(|&p| inv.apply(p)).collect(),
            });
        }
        out_cones.push(Cone {
            apex: slot.apex,
            apex_dist: slot.apex_dist,
            wedge: slot.wedge,
            crossings: slot.crossings.clone(),
            gaps: slot.gaps.clone(),
            side_right,
            side_left,
        });
    }
    for entries in face_entries.iter_mut() {
        entries.sort_by_key(|e| e.cone);
    }

    let work_face_orig = face_remap.as_ref().map(|remap| {
        let mut inv = vec![(usize::MAX, [Vec2::ZERO; 3]); k.n_faces()];
        for (orig, subs) in remap.iter().enumerate() {
            for (wf, corners) in subs {
                inv[*wf] = (orig, *corners);
            }
        }
        inv
    });
    Ok(ShortestPathMap {
        work,
        source_vertex,
        source_input,
        face_remap,
        work_face_orig,
        original,
        cones: out_cones,
        face_entries,
        vertex_records: records,
    })
}

/// Reconstruct one side chain of a cone: the far endpoint is the outermost
/// claimed point on the side ray, and the chain is the straight pull-back
/// of the ray segment through the cone's crossings.
fn side_chain(k: &PlanarComplex, slot: &ConeSlot, left: bool, eps: f64) -> Result<SideChain> {
    let ray = if left { slot.wedge.dir_left } else { slot.wedge.dir_right };
    let mut end: Option<(f64, usize, Vec2)> = None;
    for (ci, cross) in slot.crossings.iter().enumerate() {
        for q in &cross.poly {
            let r = q.norm();
            if r <= eps {
                continue;
            }
            if ray.cross(*q).abs() <= eps * r.max(1.0) * 100.0 && ray.dot(*q) > 0.0 {
                if end.map_or(true, |(br, _, _)| r > br) {
                    end = Some((r, ci, *q));
                }
            }
        }
    }
    let Some((_, ci, q)) = end else {
        // a cone fully degenerate on this side: the apex alone
        return Ok(SideChain {
            path: GeodesicPath::single_point(PointOnComplex::Vertex(slot.apex)),
            vertices: Vec::new(),
            end_image: Vec2::ZERO,
        });
    };
    let cross = &slot.crossings[ci];
    let end_point = k.canonical_point(cross.face, cross.iso.inverse().apply(q));
    let (path, covered) = pull_back_walk(
        k,
        &slot.crossings,
        PointOnComplex::Vertex(slot.apex),
        q,
        end_point,
        true,
    )?;
    let q = q.scale(covered);
    let mut vertices: Vec<usize> = path
        .breakpoints
        .iter()
        .skip(1)
        .filter_map(|bp| match bp {
            PointOnComplex::Vertex(v) => Some(*v),
            _ => None,
        })
        .collect();
    vertices.dedup();
    Ok(SideChain { path, vertices, end_image: q })
}

// ---------------------------------------------------------------------
// accessors

impl ShortestPathMap {
    pub fn n_cones(&self) -> usize {
        self.cones.len()
    }

    /// Whether the working complex is the input complex itself (no source
    /// insertion happened).
    pub fn work_is_original(&self) -> bool {
        self.face_remap.is_none()
    }

    /// Original face id of a work face (identity without a split).
    pub fn original_face_of(&self, work_face: usize) -> usize {
        match &self.work_face_orig {
            None => work_face,
            Some(inv) => inv[work_face].0,
        }
    }

    /// Translate a work-complex point back to the original complex.
    pub fn from_work_point(&self, p: &PointOnComplex) -> Result<PointOnComplex> {
        let Some(inv) = &self.work_face_orig else {
            return Ok(p.clone());
        };
        if let PointOnComplex::Vertex(v) = p {
            if *v == self.source_vertex {
                return Ok(self.source_input.clone());
            }
            return Ok(p.clone());
        }
        // express through a containing work face and its corner images in
        // the original chart
        let wf = self.work.point_faces(p)[0];
        let (orig, corners) = &inv[wf];
        let local = self.work.chart(wf).barycentric(self.work.chart_pos(wf, p)?);
        let pos = v2(
            local[0] * corners[0].x + local[1] * corners[1].x + local[2] * corners[2].x,
            local[0] * corners[0].y + local[1] * corners[1].y + local[2] * corners[2].y,
        );
        let orig_k = self.original.as_ref().expect("original kept for split sources");
        Ok(orig_k.canonical_point(*orig, pos))
    }

    pub fn vertex_distance(&self, v: usize) -> f64 {
        if v == self.source_vertex {
            0.0
        } else {
            self.vertex_records[v].as_ref().expect("vertex swept").dist
        }
    }

    pub fn vertex_record(&self, v: usize) -> Option<&VertexRecord> {
        self.vertex_records[v].as_ref()
    }

    /// Tree path from the source to a work vertex, concatenating parent
    /// legs.
    pub fn tree_path(&self, v: usize) -> Result<GeodesicPath> {
        if v == self.source_vertex {
            return Ok(GeodesicPath::single_point(PointOnComplex::Vertex(v)));
        }
        let mut legs: Vec<&GeodesicPath> = Vec::new();
        let mut cur = v;
        let mut guard = 0;
        while cur != self.source_vertex {
            let rec = self.vertex_records[cur]
                .as_ref()
                .ok_or_else(|| Error::Numerical(format!("no record for vertex {cur}")))?;
            legs.push(&rec.leg);
            cur = rec.parent;
            guard += 1;
            if guard > self.work.n_vertices() + 2 {
                return Err(Error::Numerical("parent chain cycle".into()));
            }
        }
        let mut path = GeodesicPath::single_point(PointOnComplex::Vertex(self.source_vertex));
        for leg in legs.into_iter().rev() {
            path = path.join(&self.work, leg)?;
        }
        Ok(path)
    }

    /// Translate a point of the original complex into work-complex
    /// coordinates (the identity unless the source split a face or edge).
    pub fn to_work_point(&self, p: &PointOnComplex) -> Result<PointOnComplex> {
        let Some(remap) = &self.face_remap else {
            return Ok(p.clone());
        };
        match p {
            PointOnComplex::Vertex(_) => Ok(p.clone()),
            PointOnComplex::EdgePoint { edge, t } => {
                if self.work.edge_faces(edge.0, edge.1).is_empty() {
                    // the edge was split by an edge-interior source
                    let s = self.source_vertex;
                    let lu = self.work.edge_len(edge.0, s);
                    let total = lu + self.work.edge_len(s, edge.1);
                    let d = t * total;
                    if (d - lu).abs() <= self.work.eps() {
                        return Ok(PointOnComplex::Vertex(s));
                    }
                    if d < lu {
                        return Ok(PointOnComplex::edge_point(edge.0, s, d / lu));
                    }
                    return Ok(PointOnComplex::edge_point(s, edge.1, (d - lu) / (total - lu)));
                }
                Ok(p.clone())
            }
            PointOnComplex::FacePoint { face, bary } => {
                let subs = &remap[*face];
                if subs.len() == 1 {
                    return Ok(p.clone());
                }
                let orig = sub_orig_chart(subs);
                let pos = v2(
                    bary[0] * orig[0].x + bary[1] * orig[1].x + bary[2] * orig[2].x,
                    bary[0] * orig[0].y + bary[1] * orig[1].y + bary[2] * orig[2].y,
                );
                for (wf, corners) in subs {
                    if crate::geom::convex_contains(corners, pos, self.work.eps()) {
                        let den = (corners[1] - corners[0]).cross(corners[2] - corners[0]);
                        let b0 = (corners[1] - pos).cross(corners[2] - pos) / den;
                        let b1 = (corners[2] - pos).cross(corners[0] - pos) / den;
                        let local = [b0, b1, 1.0 - b0 - b1];
                        let cp = self.work.chart(*wf).from_barycentric(local);
                        return Ok(self.work.canonical_point(*wf, cp));
                    }
                }
                Err(Error::PointOutside("face point not in any sub-face".into()))
            }
        }
    }

    /// JSON dump of the map.
    pub fn to_json(&self) -> serde_json::Value {
        let cones: Vec<serde_json::Value> = self
            .cones
            .iter()
            .map(|c| {
                serde_json::json!({
                    "apex": crate::complex::io::point_to_json(&PointOnComplex::Vertex(c.apex)),
                    "apex_distance": c.apex_dist,
                    "apex_angle": c.apex_angle(),
                    "sideP": c.side_right.path.to_json(),
                    "sideQ": c.side_left.path.to_json(),
                    "faces": c.crossings.iter().map(|x| x.face).collect::<Vec<_>>(),
                })
            })
            .collect();
        serde_json::json!({
            "source": crate::complex::io::point_to_json(&self.source_input),
            "cones": cones,
            "vertex_distances": (0..self.work.n_vertices())
                .map(|v| self.vertex_distance(v))
                .collect::<Vec<_>>(),
        })
    }
}

/// Corners of the original face triangle, recovered as the convex hull of
/// the sub-face corner positions.
fn sub_orig_chart(subs: &[(usize, [Vec2; 3])]) -> [Vec2; 3] {
    let mut pts: Vec<Vec2> = Vec::new();
    for (_, cs) in subs {
        for c in cs {
            if !pts.iter().any(|p| p.dist(*c) < 1e-12) {
                pts.push(*c);
            }
        }
    }
    let hull = crate::geom::convex_hull_2d(&pts);
    [hull[0], hull[1], hull[2]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::PointOnComplex as P;
    use crate::instances;

    #[test]
    fn square_spm_from_corner() {
        // 2 cones; tree edges to v1, v2, v3; d(x,v2) = √2
        let k = instances::unit_square();
        let spm = build_spm(&k, &P::Vertex(0)).unwrap();
        assert_eq!(spm.n_cones(), 2, "cones: {}", spm.n_cones());
        assert!((spm.vertex_distance(1) - 1.0).abs() < 1e-9);
        assert!((spm.vertex_distance(2) - 2f64.sqrt()).abs() < 1e-9);
        assert!((spm.vertex_distance(3) - 1.0).abs() < 1e-9);
        for v in 1..4 {
            assert_eq!(spm.vertex_record(v).unwrap().parent, 0);
        }
    }

    #[test]
    fn right_triangle_single_cone() {
        let k = instances::right_triangle();
        let spm = build_spm(&k, &P::Vertex(0)).unwrap();
        assert_eq!(spm.n_cones(), 1);
        let c = &spm.cones[0];
        assert_eq!(c.apex, 0);
        assert!((c.apex_angle() - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
    }

    #[test]
    fn cone_fan_spm_structure() {
        // source r0: flank cones both sides of γ(r0,c) plus the apex-c cone
        // C(c; r3, r4) with apex angle π/3; d(r0,r3) = d(r0,r4) = 2
        let k = instances::cone_fan(7);
        let spm = build_spm(&k, &P::Vertex(0)).unwrap();
        assert!((spm.vertex_distance(7) - 1.0).abs() < 1e-9);
        assert!(
            (spm.vertex_distance(3) - 2.0).abs() < 1e-9,
            "d(r0,r3) = {}",
            spm.vertex_distance(3)
        );
        assert!((spm.vertex_distance(4) - 2.0).abs() < 1e-9);
        assert!((spm.vertex_distance(2) - 3f64.sqrt()).abs() < 1e-9);
        assert!((spm.vertex_distance(5) - 3f64.sqrt()).abs() < 1e-9);
        let apex_c: Vec<&Cone> = spm.cones.iter().filter(|c| c.apex == 7).collect();
        assert_eq!(apex_c.len(), 1, "expected exactly one cone with apex c");
        assert!((apex_c[0].apex_angle() - std::f64::consts::FRAC_PI_3).abs() < 1e-6);
        assert_eq!(spm.n_cones(), 5, "cones: {}", spm.n_cones());
        assert_eq!(spm.vertex_record(3).unwrap().parent, 7);
        assert_eq!(spm.vertex_record(2).unwrap().parent, 0);
    }

    #[test]
    fn face_interior_source_splits() {
        let k = instances::right_triangle();
        let x = P::face_point(0, [0.3, 0.3, 0.4]);
        let spm = build_spm(&k, &x).unwrap();
        assert_eq!(spm.work.n_vertices(), 4);
        assert_eq!(spm.work.n_faces(), 3);
        let pos = k.chart(0).from_barycentric([0.3, 0.3, 0.4]);
        for v in 0..3 {
            let expect = pos.dist(k.chart(0).corners[v]);
            assert!((spm.vertex_distance(v) - expect).abs() < 1e-9);
        }
    }

    #[test]
    fn l_shape_spm_wraps_reflex_corner() {
        let k = instances::l_shape();
        let spm = build_spm(&k, &P::Vertex(2)).unwrap();
        // d((2,1),(0,2)) = 1 + √2 around the reflex corner (1,1)
        assert!((spm.vertex_distance(5) - (1.0 + 2f64.sqrt())).abs() < 1e-9);
        assert_eq!(spm.vertex_record(5).unwrap().parent, 3);
        // d((2,1),(0,0)) = √5 straight through the interior
        assert!((spm.vertex_distance(0) - 5f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn find_new_events_right_triangle_foot() {
        // wedge at the right-angle corner of the (4,3,5) triangle: the
        // hypotenuse carries an edge event at distance 12/5 from the corner
        let k = instances::right_triangle();
        let frame = ConeFrame {
            apex_dist: 0.0,
            wedge: Wedge { dir_right: v2(1.0, 0.0), dir_left: v2(0.0, 1.0) },
            iso: Iso2::IDENTITY,
        };
        let evs = find_new_events(&k, &frame, 0, None);
        let edge_evs: Vec<&SweepEvent> =
            evs.iter().filter(|e| matches!(e.kind, SweepEventKind::Edge { .. })).collect();
        assert_eq!(edge_evs.len(), 1);
        assert!((edge_evs[0].key - 2.4).abs() < 1e-9, "key {}", edge_evs[0].key);
        match &edge_evs[0].location {
            P::EdgePoint { edge, .. } => assert_eq!(*edge, (1, 2)),
            other => panic!("unexpected location {other:?}"),
        }
    }

    #[test]
    fn find_new_events_square_no_foot_at_vertex() {
        // cone C(x; v1, v2) in face (0,1,2): the perpendicular foot on edge
        // v1v2 is v1 itself, so no edge event; v2 is discovered at √2
        let k = instances::unit_square();
        let ang = std::f64::consts::FRAC_PI_4;
        let frame = ConeFrame {
            apex_dist: 0.0,
            wedge: Wedge { dir_right: v2(1.0, 0.0), dir_left: v2(ang.cos(), ang.sin()) },
            iso: Iso2::IDENTITY,
        };
        let evs = find_new_events(&k, &frame, 0, None);
        assert!(
            !evs.iter().any(|e| matches!(e.kind, SweepEventKind::Edge { .. })),
            "unexpected edge event"
        );
        let ev2 = evs
            .iter()
            .find(|e| matches!(e.kind, SweepEventKind::Vertex { vertex: 2, .. }))
            .expect("vertex event for v2");
        assert!((ev2.key - 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn spm_json_shape() {
        let k = instances::unit_square();
        let spm = build_spm(&k, &P::Vertex(0)).unwrap();
        let j = spm.to_json();
        assert_eq!(j["cones"].as_array().unwrap().len(), 2);
        assert_eq!(j["vertex_distances"].as_array().unwrap().len(), 4);
    }
}
