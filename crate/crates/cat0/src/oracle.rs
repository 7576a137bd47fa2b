//! Independent ground truth and instance generation.
//!
//! Nothing in this module touches the shortest-path-map machinery, so its
//! answers can stand as oracles against it:
//!
//! - [`EpsilonNet`]: Dijkstra over edge-sampled points joined by in-face
//!   chords. Every graph path is a feasible path on the complex, so the
//!   value upper-bounds the intrinsic distance; nets are nested under
//!   halving ε (subdivision counts are powers of two), so refinement is
//!   monotone nonincreasing.
//! - [`visibility_distance`]: exact shortest paths in flat instances via
//!   the visibility graph of the boundary polygon.
//! - [`generate_instance`]: deterministic test-instance families.

use std::collections::BTreeMap;

use crate::complex::{PlanarComplex, PointOnComplex, Tol};
use crate::error::{Error, Result};
use crate::geom::{ear_clip, v2, Vec2};

// ---------------------------------------------------------------------
// deterministic PRNG

/// SplitMix64: tiny, seedable, identical on every platform. Used for all
/// generated corpora so runs are byte-for-byte reproducible.
#[derive(Clone, Debug)]
pub struct Rng {
    state: u64,
}

impl Rng {
    pub fn new(seed: u64) -> Rng {
        Rng { state: seed.wrapping_add(0x9e3779b97f4a7c15) }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in [0,1).
    pub fn f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.f64()
    }

    pub fn usize(&mut self, n: usize) -> usize {
        (self.next_u64() % n.max(1) as u64) as usize
    }
}

/// Random point on the complex: a random face with random barycentric
/// coordinates, snapped to canonical form.
pub fn random_point(k: &PlanarComplex, rng: &mut Rng) -> PointOnComplex {
    let f = rng.usize(k.n_faces());
    let mut a = rng.f64();
    let mut b = rng.f64();
    if a + b > 1.0 {
        a = 1.0 - a;
        b = 1.0 - b;
    }
    let bary = [a, b, 1.0 - a - b];
    let p = k.chart(f).from_barycentric(bary);
    k.canonical_point(f, p)
}

// ---------------------------------------------------------------------
// ε-net oracle

/// Steiner-point graph approximation of the intrinsic metric. Samples are
/// all vertices plus points spaced at most ε along every edge; two samples
/// on the boundary of a common face are joined by their in-face chord.
/// Face interiors carry no samples: inside a convex face the straight
/// boundary-to-boundary chord is optimal already.
pub struct EpsilonNet<'a> {
    k: &'a PlanarComplex,
    pub eps: f64,
    nodes: Vec<PointOnComplex>,
    /// node ids of interior samples per edge
    edge_nodes: BTreeMap<(usize, usize), Vec<u32>>,
    adj: Vec<Vec<(u32, f64)>>,
}

impl<'a> EpsilonNet<'a> {
    pub fn build(k: &'a PlanarComplex, eps: f64) -> Result<EpsilonNet<'a>> {
        if !(eps > 0.0) {
            return Err(Error::BadArgument(format!("epsilon must be positive, got {eps}")));
        }
        let mut nodes: Vec<PointOnComplex> =
            (0..k.n_vertices()).map(PointOnComplex::Vertex).collect();
        let mut edge_nodes: BTreeMap<(usize, usize), Vec<u32>> = BTreeMap::new();
        for (&(u, v), &len) in k.edge_lengths() {
            // power-of-two subdivision count: halving ε doubles the count,
            // so coarser sample sets are subsets of finer ones
            let m = (len / eps).log2().ceil().max(0.0).exp2() as usize;
            let mut ids = Vec::with_capacity(m.saturating_sub(1));
            for i in 1..m {
                ids.push(nodes.len() as u32);
                nodes.push(PointOnComplex::edge_point(u, v, i as f64 / m as f64));
            }
            edge_nodes.insert((u, v), ids);
        }
        let mut net = EpsilonNet { k, eps, nodes, edge_nodes, adj: Vec::new() };
        net.adj = vec![Vec::new(); net.nodes.len()];
        for f in 0..k.n_faces() {
            let ids = net.face_boundary_nodes(f);
            let pos: Vec<Vec2> =
                ids.iter().map(|&i| k.chart_pos(f, &net.nodes[i as usize]).unwrap()).collect();
            for i in 0..ids.len() {
                for j in i + 1..ids.len() {
                    let w = pos[i].dist(pos[j]);
                    if w > 0.0 {
                        net.adj[ids[i] as usize].push((ids[j], w));
                        net.adj[ids[j] as usize].push((ids[i], w));
                    }
                }
            }
        }
        Ok(net)
    }

    /// Number of samples in the net.
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    fn face_boundary_nodes(&self, f: usize) -> Vec<u32> {
        let face = self.k.face(f);
        let mut ids: Vec<u32> = face.iter().map(|&v| v as u32).collect();
        for e in 0..3 {
            let (u, v) = (face[e], face[(e + 1) % 3]);
            let key = if u < v { (u, v) } else { (v, u) };
            ids.extend(self.edge_nodes[&key].iter().copied());
        }
        ids
    }

    fn terminal_arcs(&self, p: &PointOnComplex) -> Result<Vec<(u32, f64)>> {
        if let PointOnComplex::Vertex(v) = p {
            return Ok(vec![(*v as u32, 0.0)]);
        }
        let mut arcs = Vec::new();
        for f in self.k.point_faces(p) {
            let pp = self.k.chart_pos(f, p)?;
            for id in self.face_boundary_nodes(f) {
                let q = self.k.chart_pos(f, &self.nodes[id as usize])?;
                arcs.push((id, pp.dist(q)));
            }
        }
        if arcs.is_empty() {
            return Err(Error::PointOutside("terminal lies in no face".into()));
        }
        Ok(arcs)
    }

    /// Shortest-path lengths from `source` to each of `targets`.
    pub fn distances(
        &self,
        source: &PointOnComplex,
        targets: &[PointOnComplex],
    ) -> Result<Vec<f64>> {
        let src = self.terminal_arcs(source)?;
        let mut dist = vec![f64::INFINITY; self.nodes.len()];
        let mut heap = std::collections::BinaryHeap::new();
        for &(id, w) in &src {
            if w < dist[id as usize] {
                dist[id as usize] = w;
                heap.push(std::cmp::Reverse((ordered(w), id)));
            }
        }
        while let Some(std::cmp::Reverse((dw, u))) = heap.pop() {
            let du = f64::from_bits(dw);
            if du > dist[u as usize] {
                continue;
            }
            for &(w, len) in &self.adj[u as usize] {
                let nd = du + len;
                if nd < dist[w as usize] {
                    dist[w as usize] = nd;
                    heap.push(std::cmp::Reverse((ordered(nd), w)));
                }
            }
        }
        let mut out = Vec::with_capacity(targets.len());
        for t in targets {
            // direct chord when source and target share a face
            let mut best = match self.k.common_face(source, t) {
                Some(f) => {
                    let a = self.k.chart_pos(f, source)?;
                    let b = self.k.chart_pos(f, t)?;
                    a.dist(b)
                }
                None => f64::INFINITY,
            };
            for (id, w) in self.terminal_arcs(t)? {
                best = best.min(dist[id as usize] + w);
            }
            out.push(best);
        }
        Ok(out)
    }
}

fn ordered(x: f64) -> u64 {
    // nonnegative finite floats order correctly by their bit patterns
    x.to_bits()
}

/// One-shot ε-net distance (builds the net, then runs one Dijkstra).
pub fn oracle_distance(
    k: &PlanarComplex,
    a: &PointOnComplex,
    b: &PointOnComplex,
    eps: f64,
) -> Result<f64> {
    let net = EpsilonNet::build(k, eps)?;
    Ok(net.distances(a, &[b.clone()])?[0])
}

// ---------------------------------------------------------------------
// visibility oracle (flat instances)

/// Planar coordinates of a point of a flat instance.
pub fn flat_pos(k: &PlanarComplex, p: &PointOnComplex) -> Result<Vec2> {
    let coords = k
        .flat_coordinates()
        .ok_or_else(|| Error::BadArgument("instance has no flat coordinates".into()))?;
    Ok(match p {
        PointOnComplex::Vertex(v) => coords[*v],
        PointOnComplex::EdgePoint { edge, t } => coords[edge.0].lerp(coords[edge.1], *t),
        PointOnComplex::FacePoint { face, bary } => {
            let f = k.face(*face);
            v2(
                bary[0] * coords[f[0]].x + bary[1] * coords[f[1]].x + bary[2] * coords[f[2]].x,
                bary[0] * coords[f[0]].y + bary[1] * coords[f[1]].y + bary[2] * coords[f[2]].y,
            )
        }
    })
}

fn point_in_polygon(poly: &[Vec2], p: Vec2, eps: f64) -> bool {
    // on-boundary counts as inside
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        let t = crate::geom::seg_closest_t(a, b, p);
        if a.lerp(b, t).dist(p) <= eps {
            return true;
        }
    }
    let mut inside = false;
    let mut j = poly.len() - 1;
    for i in 0..poly.len() {
        if (poly[i].y > p.y) != (poly[j].y > p.y) {
            let xint =
                poly[j].x + (poly[i].x - poly[j].x) * (p.y - poly[j].y) / (poly[i].y - poly[j].y);
            if p.x < xint {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

fn visible(poly: &[Vec2], p: Vec2, q: Vec2, eps: f64) -> bool {
    if p.dist(q) <= eps {
        return true;
    }
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        // proper crossing of open segment interiors
        let d1 = (b - a).cross(p - a);
        let d2 = (b - a).cross(q - a);
        let d3 = (q - p).cross(a - p);
        let d4 = (q - p).cross(b - p);
        let e1 = eps * (b - a).norm();
        let e2 = eps * (q - p).norm();
        if ((d1 > e1 && d2 < -e1) || (d1 < -e1 && d2 > e1))
            && ((d3 > e2 && d4 < -e2) || (d3 < -e2 && d4 > e2))
        {
            return false;
        }
    }
    // the segment may graze vertices yet leave the region; probe interior
    // points against the polygon
    for s in 1..8 {
        let t = s as f64 / 8.0;
        if !point_in_polygon(poly, p.lerp(q, t), eps) {
            return false;
        }
    }
    true
}

/// Exact shortest-path length between two points of a flat instance,
/// computed on the visibility graph of the boundary polygon plus the two
/// terminals. Never touches charts or sweeps.
pub fn visibility_distance(
    k: &PlanarComplex,
    a: &PointOnComplex,
    b: &PointOnComplex,
) -> Result<f64> {
    let coords = k
        .flat_coordinates()
        .ok_or_else(|| Error::BadArgument("visibility oracle needs a flat instance".into()))?;
    let poly: Vec<Vec2> = k.boundary().iter().map(|&v| coords[v]).collect();
    let pa = flat_pos(k, a)?;
    let pb = flat_pos(k, b)?;
    let eps = k.eps();

    let mut nodes = vec![pa, pb];
    nodes.extend(poly.iter().copied());
    let n = nodes.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut heap = std::collections::BinaryHeap::new();
    dist[0] = 0.0;
    heap.push(std::cmp::Reverse((ordered(0.0), 0u32)));
    while let Some(std::cmp::Reverse((dw, u))) = heap.pop() {
        let du = f64::from_bits(dw);
        if du > dist[u as usize] {
            continue;
        }
        if u == 1 {
            break;
        }
        for w in 0..n as u32 {
            if w == u {
                continue;
            }
            if visible(&poly, nodes[u as usize], nodes[w as usize], eps) {
                let nd = du + nodes[u as usize].dist(nodes[w as usize]);
                if nd < dist[w as usize] {
                    dist[w as usize] = nd;
                    heap.push(std::cmp::Reverse((ordered(nd), w)));
                }
            }
        }
    }
    Ok(dist[1])
}

// ---------------------------------------------------------------------
// generators

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InstanceKind {
    FlatConvex,
    FlatPolygon,
    ConeFan,
    Spindle,
    Curved,
}

impl std::str::FromStr for InstanceKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<InstanceKind> {
        Ok(match s {
            "flat-convex" => InstanceKind::FlatConvex,
            "flat-polygon" => InstanceKind::FlatPolygon,
            "cone-fan" => InstanceKind::ConeFan,
            "spindle" => InstanceKind::Spindle,
            "curved" => InstanceKind::Curved,
            other => return Err(Error::BadArgument(format!("unknown instance kind {other:?}"))),
        })
    }
}

/// Deterministic in (kind, n, seed); the output always passes validation.
pub fn generate_instance(kind: InstanceKind, n: usize, seed: u64) -> Result<PlanarComplex> {
    match kind {
        InstanceKind::FlatConvex => flat_convex(n, seed),
        InstanceKind::FlatPolygon => flat_polygon(n, seed),
        InstanceKind::ConeFan => {
            if n < 7 {
                return Err(Error::BadArgument("cone-fan needs n >= 7".into()));
            }
            Ok(crate::instances::cone_fan(n))
        }
        InstanceKind::Spindle => spindle(n),
        InstanceKind::Curved => curved(n, seed),
    }
}

fn polygon_angles(n: usize, rng: &mut Rng) -> Vec<f64> {
    let step = std::f64::consts::TAU / n as f64;
    (0..n).map(|i| i as f64 * step + rng.range(0.05, 0.95) * step).collect()
}

/// Points on an ellipse at jittered angles: always in convex position.
fn flat_convex(n: usize, seed: u64) -> Result<PlanarComplex> {
    if n < 3 {
        return Err(Error::BadArgument("flat-convex needs n >= 3".into()));
    }
    let mut rng = Rng::new(seed ^ 0xf1a7);
    let coords: Vec<(f64, f64)> = polygon_angles(n, &mut rng)
        .into_iter()
        .map(|a| (a.cos(), 0.8 * a.sin()))
        .collect();
    let faces = (1..n - 1).map(|i| [0, i, i + 1]).collect();
    PlanarComplex::from_flat(coords, faces, Tol::default())
}

/// Star-shaped simple polygon (random radii), ear-clip triangulated.
fn flat_polygon(n: usize, seed: u64) -> Result<PlanarComplex> {
    if n < 4 {
        return Err(Error::BadArgument("flat-polygon needs n >= 4".into()));
    }
    let mut rng = Rng::new(seed ^ 0x90_1d);
    let pts: Vec<Vec2> = polygon_angles(n, &mut rng)
        .into_iter()
        .map(|a| {
            let r = rng.range(0.35, 1.0);
            v2(r * a.cos(), r * a.sin())
        })
        .collect();
    let ring: Vec<usize> = (0..n).collect();
    let faces = ear_clip(&pts, &ring)
        .ok_or_else(|| Error::Numerical("ear clipping failed on star polygon".into()))?;
    PlanarComplex::from_flat(pts.iter().map(|p| (p.x, p.y)).collect(), faces, Tol::default())
}

/// Long 1×(n/2) grid strip: half the vertices on one source geodesic (the
/// bottom line), half on the boundary above. A single source cone from the
/// strip end crosses a linear number of edges, which is what drives the
/// quadratic size profile used in the complexity checks.
fn spindle(n: usize) -> Result<PlanarComplex> {
    if n < 8 {
        return Err(Error::BadArgument("spindle needs n >= 8".into()));
    }
    let m = n / 2;
    let mut coords = Vec::with_capacity(2 * m);
    for i in 0..m {
        coords.push((i as f64, 0.0));
    }
    for i in 0..m {
        coords.push((i as f64, 1.0));
    }
    let mut faces = Vec::with_capacity(2 * (m - 1));
    for i in 0..m - 1 {
        let (b0, b1, t0, t1) = (i, i + 1, m + i, m + i + 1);
        faces.push([b0, b1, t0]);
        faces.push([b1, t1, t0]);
    }
    PlanarComplex::from_flat(coords, faces, Tol::default())
}

/// Flat polygon base with interior Steiner vertices, then edge lengths
/// stretched and repaired until every inner vertex has angle sum at least
/// 2π with at least one strictly above (a genuinely curved instance).
fn curved(n: usize, seed: u64) -> Result<PlanarComplex> {
    if n < 8 {
        return Err(Error::BadArgument("curved needs n >= 8".into()));
    }
    for attempt in 0..16u64 {
        if let Some(k) = try_curved(n, seed.wrapping_add(attempt.wrapping_mul(0x5bd1e995))) {
            return Ok(k);
        }
    }
    Err(Error::Numerical(format!("curved({n}, {seed}) failed to converge")))
}

/// Convex polygon with a zigzag triangulation (bounded vertex degree,
/// unlike the fan used by `flat_convex`).
fn flat_convex_zigzag(n: usize, seed: u64) -> Result<PlanarComplex> {
    if n < 4 {
        return Err(Error::BadArgument("zigzag base needs n >= 4".into()));
    }
    let mut rng = Rng::new(seed ^ 0x217);
    let coords: Vec<(f64, f64)> = polygon_angles(n, &mut rng)
        .into_iter()
        .map(|a| (a.cos(), 0.8 * a.sin()))
        .collect();
    let mut faces = Vec::with_capacity(n - 2);
    let (mut lo, mut hi) = (0usize, n - 1);
    let mut turn = true;
    while hi - lo > 1 {
        if turn {
            faces.push([lo, lo + 1, hi]);
            lo += 1;
        } else {
            faces.push([lo, hi - 1, hi]);
            hi -= 1;
        }
        turn = !turn;
    }
    PlanarComplex::from_flat(coords, faces, Tol::default())
}

fn try_curved(n: usize, seed: u64) -> Option<PlanarComplex> {
    let mut rng = Rng::new(seed ^ 0xcafe);
    let n_interior = (n / 8).max(1);
    let base = flat_convex_zigzag(n - n_interior, rng.next_u64()).ok()?;

    // insert interior vertices at centroids, only into faces whose corners
    // are all boundary vertices so the inserted stars stay edge-disjoint
    let mut k = base;
    let base_n = k.n_vertices();
    let mut inserted = Vec::new();
    for _ in 0..n_interior {
        let mut best: Option<(usize, f64)> = None;
        for f in 0..k.n_faces() {
            if k.face(f).iter().any(|&v| v >= base_n) {
                continue;
            }
            let area = crate::geom::polygon_area(&k.chart(f).corners);
            if best.map_or(true, |(_, ba)| area > ba) {
                best = Some((f, area));
            }
        }
        let (f, _) = best?;
        let p = PointOnComplex::face_point(f, [1.0 / 3.0; 3]);
        let (k2, nv, _) = k.insert_vertex_at(&p).ok()?;
        inserted.push(nv);
        k = k2;
    }

    // shrink each inserted star uniformly until the angle sum hits
    // 2π + target; θ(v) grows monotonically from 2π toward (deg v)·π as
    // the star scale drops toward the triangle-inequality floor
    let faces = k.faces().to_vec();
    let nv = k.n_vertices();
    let mut lengths = k.edge_lengths().clone();
    for &v in &inserted {
        let target = std::f64::consts::TAU + rng.range(0.3, 0.9);
        let star: Vec<(usize, usize)> = lengths
            .keys()
            .filter(|&&(a, b)| a == v || b == v)
            .copied()
            .collect();
        // floor: every incident face must keep its triangle inequality
        let mut s_min = 0.0_f64;
        for f in &faces {
            if let Some(c) = f.iter().position(|&w| w == v) {
                let (a, b) = (f[(c + 1) % 3], f[(c + 2) % 3]);
                let opp = lengths[&edge_key(a, b)];
                let sum = lengths[&edge_key(v, a)] + lengths[&edge_key(v, b)];
                s_min = s_min.max(opp / sum);
            }
        }
        let (mut lo, mut hi) = (s_min + 1e-6, 1.0);
        for _ in 0..80 {
            let s = 0.5 * (lo + hi);
            let mut trial = lengths.clone();
            for key in &star {
                trial.insert(*key, lengths[key] * s);
            }
            let cand = PlanarComplex::new(nv, faces.clone(), trial, None, Tol::default()).ok()?;
            if cand.vertex_angle_sum(v) < target {
                hi = s;
            } else {
                lo = s;
            }
        }
        let s = 0.5 * (lo + hi);
        for key in &star {
            let l = lengths[key] * s;
            lengths.insert(*key, l);
        }
    }

    let k = PlanarComplex::new(nv, faces, lengths, None, Tol::default()).ok()?;
    if !k.validate().pass {
        return None;
    }
    let two_pi = std::f64::consts::TAU;
    let has_curved =
        (0..nv).any(|v| !k.is_boundary_vertex(v) && k.vertex_angle_sum(v) > two_pi + 1e-6);
    if has_curved {
        Some(k)
    } else {
        None
    }
}

fn edge_key(u: usize, v: usize) -> (usize, usize) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::PointOnComplex as P;
    use crate::instances;

    #[test]
    fn net_square_diagonal_band() {
        // a = (0,0), b = (1,1), ε = 0.05: value in [√2, √2 + 0.05]
        let k = instances::unit_square();
        let d = oracle_distance(&k, &P::Vertex(0), &P::Vertex(2), 0.05).unwrap();
        let exact = 2f64.sqrt();
        assert!(d >= exact - 1e-9, "oracle {d} below exact {exact}");
        assert!(d <= exact + 0.05, "oracle {d} too loose");
    }

    #[test]
    fn net_vertices_direct_edge() {
        let k = instances::right_triangle();
        let d = oracle_distance(&k, &P::Vertex(0), &P::Vertex(1), 0.3).unwrap();
        assert!((d - 4.0).abs() < 1e-12);
    }

    #[test]
    fn net_dyadic_refinement_monotone_toward_sqrt3() {
        // cone fan r0 -> r2: values decrease toward √3
        let k = instances::cone_fan(7);
        let exact = 3f64.sqrt();
        let mut prev = f64::INFINITY;
        for i in 0..4 {
            let eps = 0.2 / 2f64.powi(i);
            let d = oracle_distance(&k, &P::Vertex(0), &P::Vertex(2), eps).unwrap();
            assert!(d <= prev + 1e-9, "not monotone at eps {eps}: {d} vs {prev}");
            assert!(d >= exact - 1e-9);
            prev = d;
        }
        assert!(prev - exact < 0.02, "eps 0.025 still {} above exact", prev - exact);
    }

    #[test]
    fn net_rejects_bad_epsilon() {
        let k = instances::unit_square();
        assert!(oracle_distance(&k, &P::Vertex(0), &P::Vertex(1), 0.0).is_err());
    }

    #[test]
    fn visibility_l_shape_golden() {
        // (2,1) -> (0,2) bends at the reflex corner: 1 + √2
        let k = instances::l_shape();
        let d = visibility_distance(&k, &P::Vertex(2), &P::Vertex(5)).unwrap();
        assert!((d - (1.0 + 2f64.sqrt())).abs() < 1e-12, "got {d}");
    }

    #[test]
    fn visibility_convex_is_euclidean() {
        let k = instances::unit_square();
        let a = P::face_point(0, [0.5, 0.3, 0.2]);
        let b = P::face_point(1, [0.4, 0.1, 0.5]);
        let d = visibility_distance(&k, &a, &b).unwrap();
        let pa = flat_pos(&k, &a).unwrap();
        let pb = flat_pos(&k, &b).unwrap();
        assert!((d - pa.dist(pb)).abs() < 1e-12);
        // a = b -> 0
        let z = visibility_distance(&k, &a, &a).unwrap();
        assert!(z.abs() < 1e-12);
    }

    #[test]
    fn visibility_requires_flat() {
        let k = instances::cone_fan(7);
        assert!(visibility_distance(&k, &P::Vertex(0), &P::Vertex(2)).is_err());
    }

    #[test]
    fn generators_validate() {
        for (kind, n) in [
            (InstanceKind::FlatConvex, 20),
            (InstanceKind::FlatPolygon, 24),
            (InstanceKind::ConeFan, 9),
            (InstanceKind::Spindle, 40),
            (InstanceKind::Curved, 32),
        ] {
            let k = generate_instance(kind, n, 7).unwrap();
            let rep = k.validate();
            assert!(rep.pass, "{kind:?}({n}) violations: {:?}", rep.violations);
        }
    }

    #[test]
    fn cone_fan_generator_matches_fixed_instance() {
        let a = generate_instance(InstanceKind::ConeFan, 7, 0).unwrap();
        let b = instances::cone_fan(7);
        assert_eq!(a.faces(), b.faces());
    }

    #[test]
    fn flat_convex_all_inner_flat() {
        let k = generate_instance(InstanceKind::FlatConvex, 30, 3).unwrap();
        for v in 0..k.n_vertices() {
            assert!(k.is_boundary_vertex(v)); // fan triangulation has no interior vertices
        }
    }

    #[test]
    fn curved_has_negative_curvature_vertex() {
        let k = generate_instance(InstanceKind::Curved, 24, 11).unwrap();
        let two_pi = std::f64::consts::TAU;
        let curved = (0..k.n_vertices())
            .any(|v| !k.is_boundary_vertex(v) && k.vertex_angle_sum(v) > two_pi + 1e-6);
        assert!(curved);
        assert!(k.flat_coordinates().is_none());
    }

    #[test]
    fn generators_deterministic() {
        let a = generate_instance(InstanceKind::Curved, 24, 5).unwrap();
        let b = generate_instance(InstanceKind::Curved, 24, 5).unwrap();
        assert_eq!(
            crate::complex::io::serialize_complex(&a),
            crate::complex::io::serialize_complex(&b)
        );
    }

    #[test]
    fn flat_coherence_net_vs_visibility() {
        // |oracle(0.01·diam) − visibility| ≤ 0.05 · visibility on flat instances
        let k = generate_instance(InstanceKind::FlatPolygon, 16, 2).unwrap();
        let mut rng = Rng::new(99);
        let diam = 2.0; // generated polygons live in the unit disk
        let net = EpsilonNet::build(&k, 0.01 * diam).unwrap();
        for _ in 0..10 {
            let a = random_point(&k, &mut rng);
            let b = random_point(&k, &mut rng);
            let dv = visibility_distance(&k, &a, &b).unwrap();
            let dn = net.distances(&a, &[b.clone()]).unwrap()[0];
            assert!(dn >= dv - 1e-9, "net {dn} below exact {dv}");
            if dv > 1e-6 {
                assert!(dn - dv <= 0.05 * dv, "net {dn} vs exact {dv}");
            }
        }
    }
}
