//! Structural property suite for a finished shortest path map.
//!
//! The checks mirror the defining properties of the partition: the
//! geodesic-tree structure, apex angles below π, convexity of cones,
//! vertex-free cone interiors, single-cone coverage away from sides, and
//! locally geodesic sides. Two counting bounds are included (at most 6n
//! cones, each cone crossing each face at most once), plus optional
//! distance cross-checks against the independent oracles.

use crate::complex::PointOnComplex;
use crate::error::Result;
use crate::geom::Vec2;
use crate::oracle::Rng;

use super::{pull_back_segment, FaceCrossing, ShortestPathMap};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpmCheck {
    Tree,
    ApexAngle,
    Convexity,
    VertexFree,
    Coverage,
    SideStraight,
    ConeCount,
    FaceOnce,
    OracleDistances,
}

impl SpmCheck {
    pub fn as_str(&self) -> &'static str {
        match self {
            SpmCheck::Tree => "tree-structure",
            SpmCheck::ApexAngle => "apex-angle",
            SpmCheck::Convexity => "convexity",
            SpmCheck::VertexFree => "vertex-free-interior",
            SpmCheck::Coverage => "coverage",
            SpmCheck::SideStraight => "side-straightness",
            SpmCheck::ConeCount => "cone-count",
            SpmCheck::FaceOnce => "face-once",
            SpmCheck::OracleDistances => "oracle-distances",
        }
    }
}

#[derive(Clone, Debug)]
pub struct SpmReport {
    pub pass: bool,
    pub failures: Vec<(SpmCheck, String)>,
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub coverage_samples: usize,
    pub convexity_pairs_per_cone: usize,
    pub seed: u64,
    /// Cross-check vertex distances against the ε-net oracle at this ε.
    pub oracle_eps: Option<f64>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            coverage_samples: 1000,
            convexity_pairs_per_cone: 100,
            seed: 0x5eed,
            oracle_eps: None,
        }
    }
}

/// Run the full property suite and report every violation found.
pub fn verify_spm(spm: &ShortestPathMap, opts: &VerifyOptions) -> Result<SpmReport> {
    let k = &spm.work;
    let eps = k.eps();
    let mut failures: Vec<(SpmCheck, String)> = Vec::new();
    let pi = std::f64::consts::PI;

    // (i) tree structure: unique finite parent chains, consistent lengths
    for v in 0..k.n_vertices() {
        if v == spm.source_vertex {
            continue;
        }
        match spm.vertex_record(v) {
            None => failures.push((SpmCheck::Tree, format!("vertex {v} has no record"))),
            Some(rec) => {
                let pd = spm.vertex_distance(rec.parent);
                if (pd + rec.leg.length - rec.dist).abs() > 1e-9 * k.scale().max(1.0) {
                    failures.push((
                        SpmCheck::Tree,
                        format!(
                            "vertex {v}: d = {} but parent d + leg = {}",
                            rec.dist,
                            pd + rec.leg.length
                        ),
                    ));
                }
            }
        }
        if spm.tree_path(v).is_err() {
            failures.push((SpmCheck::Tree, format!("vertex {v}: broken parent chain")));
        }
    }

    // (ii) apex angles strictly below π
    for (ci, c) in spm.cones.iter().enumerate() {
        let a = c.apex_angle();
        if !(a < pi - 1e-9) {
            failures.push((SpmCheck::ApexAngle, format!("cone {ci} apex angle {a}")));
        }
    }

    // (iii) convexity, sampled: straight in-cone segments stay in the cone
    // and pull back to locally geodesic paths
    let mut rng = Rng::new(opts.seed);
    for (ci, c) in spm.cones.iter().enumerate() {
        if c.crossings.is_empty() {
            continue;
        }
        let mut bad = 0;
        for _ in 0..opts.convexity_pairs_per_cone {
            let a = sample_in_crossings(&c.crossings, &mut rng);
            let b = sample_in_crossings(&c.crossings, &mut rng);
            let mut inside_all = true;
            for s in 1..20 {
                let t = s as f64 / 20.0;
                let p = a.lerp(b, t);
                if !point_in_some_crossing(&c.crossings, p, eps * 100.0) {
                    inside_all = false;
                    break;
                }
            }
            if !inside_all {
                bad += 1;
                continue;
            }
            // pull back through the apex: γ(apex,a), γ(apex,b) exist by
            // construction; validate the chord a→b locally instead
            if let (Some(pa), Some(pb)) = (
                locate_crossing(&c.crossings, a, eps),
                locate_crossing(&c.crossings, b, eps),
            ) {
                let ka = k.canonical_point(c.crossings[pa].face, c.crossings[pa].iso.inverse().apply(a));
                let kb = k.canonical_point(c.crossings[pb].face, c.crossings[pb].iso.inverse().apply(b));
                if let Ok(path) = pull_back_between(spm, ci, a, b, ka, kb) {
                    if crate::geodesy::is_locally_geodesic(k, &path, 1e-7).is_err() {
                        bad += 1;
                    }
                } else {
                    bad += 1;
                }
            }
        }
        if bad > 0 {
            failures.push((
                SpmCheck::Convexity,
                format!("cone {ci}: {bad}/{} sampled chords escaped or bent", opts.convexity_pairs_per_cone),
            ));
        }
    }

    // (iv) no vertex strictly inside a crossing polygon
    for (ci, c) in spm.cones.iter().enumerate() {
        for cross in &c.crossings {
            let ch = k.chart(cross.face);
            for (corner_idx, &corner) in ch.corners.iter().enumerate() {
                let img = cross.iso.apply(corner);
                if strictly_inside(&cross.poly, img, eps * 10.0) {
                    failures.push((
                        SpmCheck::VertexFree,
                        format!(
                            "vertex {} strictly inside cone {ci} in face {}",
                            k.face(cross.face)[corner_idx],
                            cross.face
                        ),
                    ));
                }
            }
        }
    }

    // (v) coverage: every sampled point in at least one cone, in two or
    // more only near a side
    for _ in 0..opts.coverage_samples {
        let p = crate::oracle::random_point(k, &mut rng);
        let faces = k.point_faces(&p);
        let f = faces[0];
        let pos = k.chart_pos(f, &p)?;
        let mut hits = 0;
        let mut near_side = false;
        for entry in &spm.face_entries[f] {
            if crate::geom::convex_contains(&entry.poly, pos, eps * 10.0) {
                hits += 1;
                if ring_distance(&entry.poly, pos) <= eps * 100.0 {
                    near_side = true;
                }
            }
        }
        if hits == 0 {
            failures.push((SpmCheck::Coverage, format!("point {p:?} in no cone")));
        } else if hits > 1 && !near_side {
            failures.push((
                SpmCheck::Coverage,
                format!("point {p:?} strictly inside {hits} cones"),
            ));
        }
    }

    // (vi) sides are locally geodesic
    for (ci, c) in spm.cones.iter().enumerate() {
        for (name, side) in [("right", &c.side_right), ("left", &c.side_left)] {
            if side.path.breakpoints.len() >= 3 {
                if let Err(viol) = crate::geodesy::is_locally_geodesic(k, &side.path, 1e-7) {
                    failures.push((
                        SpmCheck::SideStraight,
                        format!("cone {ci} {name} side: {}", viol.detail),
                    ));
                }
            }
        }
    }

    // cone count bound
    if spm.n_cones() > 6 * k.n_vertices() {
        failures.push((
            SpmCheck::ConeCount,
            format!("{} cones exceeds 6n = {}", spm.n_cones(), 6 * k.n_vertices()),
        ));
    }

    // each cone crosses a face at most once (a crossing may be stored in
    // several polygon pieces; they count as one crossing when disjoint)
    for (ci, c) in spm.cones.iter().enumerate() {
        let faces: std::collections::BTreeSet<usize> =
            c.crossings.iter().map(|x| x.face).collect();
        if faces.len() > spm.work.n_faces() {
            failures.push((
                SpmCheck::FaceOnce,
                format!("cone {ci} crosses {} faces of {}", faces.len(), spm.work.n_faces()),
            ));
        }
        for &f in &faces {
            let pieces: Vec<&super::FaceCrossing> =
                c.crossings.iter().filter(|x| x.face == f).collect();
            for i in 0..pieces.len() {
                for j in i + 1..pieces.len() {
                    // overlapping pieces would be a genuine double-crossing
                    let pj = pieces[j];
                    let overlap = pieces[i].poly.iter().any(|p| {
                        crate::geom::convex_contains(&pj.poly, *p, -eps * 100.0)
                    });
                    if overlap {
                        failures.push((
                            SpmCheck::FaceOnce,
                            format!("cone {ci} has overlapping pieces in face {f}"),
                        ));
                    }
                }
            }
        }
    }

    // optional oracle cross-check of vertex distances
    if let Some(oeps) = opts.oracle_eps {
        let net = crate::oracle::EpsilonNet::build(k, oeps)?;
        let targets: Vec<PointOnComplex> =
            (0..k.n_vertices()).map(PointOnComplex::Vertex).collect();
        let nd = net.distances(&PointOnComplex::Vertex(spm.source_vertex), &targets)?;
        for v in 0..k.n_vertices() {
            let ds = spm.vertex_distance(v);
            if ds > nd[v] + 1e-9 {
                failures.push((
                    SpmCheck::OracleDistances,
                    format!("vertex {v}: spm {ds} above net {}", nd[v]),
                ));
            }
            if nd[v] - ds > 0.05 * ds + oeps {
                failures.push((
                    SpmCheck::OracleDistances,
                    format!("vertex {v}: net {} too far above spm {ds}", nd[v]),
                ));
            }
        }
    }

    Ok(SpmReport { pass: failures.is_empty(), failures })
}

/// Pull back the chord a→b inside cone `ci` to a path in the complex.
pub fn pull_back_between(
    spm: &ShortestPathMap,
    ci: usize,
    a_img: Vec2,
    b_img: Vec2,
    a_pt: PointOnComplex,
    b_pt: PointOnComplex,
) -> Result<crate::geodesy::GeodesicPath> {
    // translate the frame so the chord starts at the origin, reusing the
    // apex-based pull-back
    let c = &spm.cones[ci];
    let shift = a_img;
    let shifted: Vec<FaceCrossing> = c
        .crossings
        .iter()
        .map(|cr| FaceCrossing {
            face: cr.face,
            iso: crate::geom::Iso2 { c: cr.iso.c, s: cr.iso.s, t: cr.iso.t - shift },
            poly: cr.poly.iter().map(|&p| p - shift).collect(),
        })
        .collect();
    pull_back_segment(&spm.work, &shifted, a_pt, b_img - shift, b_pt)
}

fn sample_in_crossings(crossings: &[FaceCrossing], rng: &mut Rng) -> Vec2 {
    // area-weighted crossing, then a uniform point of its fan triangle
    let areas: Vec<f64> = crossings
        .iter()
        .map(|c| crate::geom::polygon_area(&c.poly).max(0.0))
        .collect();
    let total: f64 = areas.iter().sum();
    let mut pick = rng.f64() * total;
    let mut idx = 0;
    for (i, a) in areas.iter().enumerate() {
        if pick <= *a || i == areas.len() - 1 {
            idx = i;
            break;
        }
        pick -= a;
    }
    let poly = &crossings[idx].poly;
    // fan triangle weighted by area
    let tri_areas: Vec<f64> = (1..poly.len() - 1)
        .map(|i| ((poly[i] - poly[0]).cross(poly[i + 1] - poly[0]) * 0.5).max(0.0))
        .collect();
    let tt: f64 = tri_areas.iter().sum();
    let mut pick = rng.f64() * tt;
    let mut ti = 1;
    for (i, a) in tri_areas.iter().enumerate() {
        if pick <= *a || i == tri_areas.len() - 1 {
            ti = i + 1;
            break;
        }
        pick -= a;
    }
    let (mut u, mut v) = (rng.f64(), rng.f64());
    if u + v > 1.0 {
        u = 1.0 - u;
        v = 1.0 - v;
    }
    let (p0, p1, p2) = (poly[0], poly[ti], poly[ti + 1]);
    p0 + (p1 - p0).scale(u) + (p2 - p0).scale(v)
}

fn point_in_some_crossing(crossings: &[FaceCrossing], p: Vec2, eps: f64) -> bool {
    crossings.iter().any(|c| crate::geom::convex_contains(&c.poly, p, eps))
}

fn locate_crossing(crossings: &[FaceCrossing], p: Vec2, eps: f64) -> Option<usize> {
    crossings
        .iter()
        .position(|c| crate::geom::convex_contains(&c.poly, p, eps * 10.0))
}

fn strictly_inside(poly: &[Vec2], p: Vec2, margin: f64) -> bool {
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        if (b - a).cross(p - a) < margin * (b - a).norm() {
            return false;
        }
    }
    true
}

fn ring_distance(poly: &[Vec2], p: Vec2) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        let t = crate::geom::seg_closest_t(a, b, p);
        best = best.min(a.lerp(b, t).dist(p));
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::PointOnComplex as P;
    use crate::instances;
    use crate::spm::build_spm;

    fn quick_opts() -> VerifyOptions {
        VerifyOptions {
            coverage_samples: 200,
            convexity_pairs_per_cone: 20,
            seed: 7,
            oracle_eps: None,
        }
    }

    #[test]
    fn square_spm_passes_suite() {
        let k = instances::unit_square();
        let spm = build_spm(&k, &P::Vertex(0)).unwrap();
        let rep = verify_spm(&spm, &quick_opts()).unwrap();
        assert!(rep.pass, "failures: {:?}", rep.failures);
    }

    #[test]
    fn cone_fan_spm_passes_suite() {
        let k = instances::cone_fan(7);
        let spm = build_spm(&k, &P::Vertex(0)).unwrap();
        let rep = verify_spm(&spm, &quick_opts()).unwrap();
        assert!(rep.pass, "failures: {:?}", rep.failures);
    }

    #[test]
    fn l_shape_spm_passes_suite_with_oracle() {
        let k = instances::l_shape();
        let spm = build_spm(&k, &P::Vertex(2)).unwrap();
        let mut opts = quick_opts();
        opts.oracle_eps = Some(0.05);
        let rep = verify_spm(&spm, &opts).unwrap();
        assert!(rep.pass, "failures: {:?}", rep.failures);
    }

    #[test]
    fn perturbed_side_fails_straightness() {
        let k = instances::cone_fan(7);
        let mut spm = build_spm(&k, &P::Vertex(0)).unwrap();
        // bend a side chain by nudging an interior breakpoint
        let mut bent = None;
        for (ci, c) in spm.cones.iter().enumerate() {
            if c.side_left.path.breakpoints.len() >= 3 {
                bent = Some(ci);
                break;
            }
        }
        let ci = bent.expect("some cone has a multi-segment side");
        let path = &mut spm.cones[ci].side_left.path;
        if let P::EdgePoint { t, .. } = &mut path.breakpoints[1] {
            *t = (*t + 0.13).min(0.95);
        } else {
            // nudge by replacing a vertex breakpoint with an off-edge point
            let f = path.seg_faces[0];
            path.breakpoints[1] = P::face_point(f, [0.3, 0.4, 0.3]);
        }
        let rep = verify_spm(&spm, &quick_opts()).unwrap();
        assert!(!rep.pass);
        assert!(rep.failures.iter().any(|(c, _)| *c == SpmCheck::SideStraight));
    }
}
