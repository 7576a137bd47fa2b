//! Single-source shortest-path queries over a prebuilt shortest path map.
//!
//! A query locates its target in a cone (binary search over the face's
//! ordered crossing list), unfolds the cone — every cone already carries
//! its isometries, and its image is the triangle between the apex and the
//! two side endpoints — and pulls the straight apex→target segment back to
//! the complex. Cost is linear in the number of faces the cone crosses.

use crate::complex::{PlanarComplex, PointOnComplex};
use crate::error::{Error, Result};
use crate::geodesy::{GeodesicPath, Unfolding};
use crate::geom::Vec2;
use crate::spm::{pull_back_segment, ShortestPathMap};

/// Isometric embedding of one cone in the plane: the apex at the origin
/// and the cone's region as the triangle Δ(z, p, q).
#[derive(Clone, Debug)]
pub struct ConeUnfolding {
    pub cone: usize,
    pub unfolding: Unfolding,
    /// Image of the apex.
    pub z: Vec2,
    /// Images of the two side endpoints on the boundary.
    pub p: Vec2,
    pub q: Vec2,
}

/// Locate the cone whose crossing polygon contains `y`; for a point on a
/// shared side, the lowest-indexed cone is returned.
pub fn locate_cone(spm: &ShortestPathMap, y: &PointOnComplex) -> Result<usize> {
    let yw = spm.to_work_point(y)?;
    crate::complex::io::check_point(&spm.work, &yw)?;
    let eps = spm.work.eps();
    let mut best: Option<usize> = None;
    for face in spm.work.point_faces(&yw) {
        let pos = spm.work.chart_pos(face, &yw)?;
        if let Some(ci) = locate_in_face(spm, face, pos, eps) {
            best = Some(best.map_or(ci, |b| b.min(ci)));
        }
    }
    best.ok_or_else(|| Error::PointOutside(format!("{yw:?} not covered by any cone")))
}

/// Containment search within one face: binary search over the ordered
/// crossing list against the shared-side chords, then verification with a
/// linear fallback (returning the lowest containing index).
fn locate_in_face(spm: &ShortestPathMap, face: usize, pos: Vec2, eps: f64) -> Option<usize> {
    let entries = &spm.face_entries[face];
    if entries.is_empty() {
        return None;
    }
    let contains = |i: usize| crate::geom::convex_contains(&entries[i].poly, pos, eps * 100.0);
    let (mut lo, mut hi) = (0usize, entries.len() - 1);
    for _ in 0..64 {
        if lo >= hi {
            break;
        }
        let mid = (lo + hi) / 2;
        if contains(mid) {
            lo = mid;
            hi = mid;
            break;
        }
        match side_of_next_chord(spm, face, mid, pos) {
            Some(true) => lo = mid + 1,
            Some(false) => {
                if hi == mid {
                    break;
                }
                hi = mid;
            }
            None => break,
        }
    }
    let mut found = if contains(lo) { Some(lo) } else { None };
    if found.is_none() {
        found = (0..entries.len()).find(|&i| contains(i));
    }
    let mut i = found?;
    while i > 0 && contains(i - 1) {
        i -= 1;
    }
    Some(entries[i].cone)
}

/// True when `pos` lies past the shared boundary between entry `i` and
/// entry `i+1` of the face (toward higher cone indices).
fn side_of_next_chord(spm: &ShortestPathMap, face: usize, i: usize, pos: Vec2) -> Option<bool> {
    let entries = &spm.face_entries[face];
    if i + 1 >= entries.len() {
        return Some(false);
    }
    let a_poly = &entries[i].poly;
    let b_poly = &entries[i + 1].poly;
    let eps = spm.work.eps() * 10.0;
    for ia in 0..a_poly.len() {
        let a0 = a_poly[ia];
        let a1 = a_poly[(ia + 1) % a_poly.len()];
        if a0.dist(a1) <= eps {
            continue;
        }
        for ib in 0..b_poly.len() {
            let b0 = b_poly[ib];
            let b1 = b_poly[(ib + 1) % b_poly.len()];
            let fwd = a0.dist(b1) <= eps && a1.dist(b0) <= eps;
            let bwd = a0.dist(b0) <= eps && a1.dist(b1) <= eps;
            if fwd || bwd {
                // entry i's polygon is CCW: its interior lies left of
                // (a0 -> a1), so strictly right means past the chord
                return Some((a1 - a0).cross(pos - a0) < 0.0);
            }
        }
    }
    None
}

/// Unfold a cone: its crossed faces in one plane with the apex at the
/// origin. Linear in the number of crossed faces.
pub fn unfold_cone(spm: &ShortestPathMap, cone: usize) -> ConeUnfolding {
    let c = &spm.cones[cone];
    let unfolding = Unfolding {
        faces: c.crossings.iter().map(|x| x.face).collect(),
        isos: c.crossings.iter().map(|x| x.iso).collect(),
    };
    ConeUnfolding {
        cone,
        unfolding,
        z: Vec2::ZERO,
        p: c.side_right.end_image,
        q: c.side_left.end_image,
    }
}

impl ConeUnfolding {
    /// Apex angle and base angles of the image triangle Δ(z, p, q).
    pub fn triangle_angles(&self) -> (f64, f64, f64) {
        let ang = |at: Vec2, u: Vec2, v: Vec2| {
            let a = (u - at).normalized();
            let b = (v - at).normalized();
            a.cross(b).abs().atan2(a.dot(b))
        };
        (
            ang(self.z, self.p, self.q),
            ang(self.p, self.z, self.q),
            ang(self.q, self.z, self.p),
        )
    }
}

/// Shortest path and distance from the map's source to `y`, reported in
/// the coordinates of the original complex `k`.
pub fn shortest_path(
    k: &PlanarComplex,
    spm: &ShortestPathMap,
    y: &PointOnComplex,
) -> Result<(GeodesicPath, f64)> {
    let yw = spm.to_work_point(y)?;
    crate::complex::io::check_point(&spm.work, &yw)?;

    // a vertex target takes its stored tree path directly
    if let PointOnComplex::Vertex(v) = &yw {
        let path = spm.tree_path(*v)?;
        let d = spm.vertex_distance(*v);
        return Ok((map_back(k, spm, path)?, d));
    }

    let ci = locate_cone(spm, y)?;
    let c = &spm.cones[ci];
    let cross = spm
        .work
        .point_faces(&yw)
        .into_iter()
        .find_map(|f| c.crossing_for(f))
        .ok_or_else(|| {
            Error::Numerical(format!("located cone {ci} does not cross the target face"))
        })?;
    let y_img = cross.iso.apply(spm.work.chart_pos(cross.face, &yw)?);
    let dist = c.apex_dist + y_img.norm();

    let tail = pull_back_segment(
        &spm.work,
        &c.crossings,
        PointOnComplex::Vertex(c.apex),
        y_img,
        yw.clone(),
    )?;
    let head = spm.tree_path(c.apex)?;
    let path = head.join(&spm.work, &tail)?;
    Ok((map_back(k, spm, path)?, dist))
}

/// Distance only.
pub fn distance(k: &PlanarComplex, spm: &ShortestPathMap, y: &PointOnComplex) -> Result<f64> {
    shortest_path(k, spm, y).map(|(_, d)| d)
}

/// Translate a work-complex path back to original-complex coordinates
/// (the identity unless the source split a face or an edge).
fn map_back(k: &PlanarComplex, spm: &ShortestPathMap, path: GeodesicPath) -> Result<GeodesicPath> {
    if spm.work_is_original() {
        return Ok(path);
    }
    let mut bps = Vec::with_capacity(path.breakpoints.len());
    for bp in &path.breakpoints {
        bps.push(spm.from_work_point(bp)?);
    }
    let faces: Vec<usize> = path.seg_faces.iter().map(|&f| spm.original_face_of(f)).collect();
    GeodesicPath::new(k, bps, faces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::PointOnComplex as P;
    use crate::instances;
    use crate::spm::build_spm;

    #[test]
    fn square_diagonal_query() {
        let k = instances::unit_square();
        let spm = build_spm(&k, &P::Vertex(0)).unwrap();
        let (path, d) = shortest_path(&k, &spm, &P::Vertex(2)).unwrap();
        assert!((d - 2f64.sqrt()).abs() < 1e-9);
        assert_eq!(path.breakpoints.len(), 2); // single diagonal chord
    }

    #[test]
    fn square_interior_target() {
        let k = instances::unit_square();
        let spm = build_spm(&k, &P::Vertex(0)).unwrap();
        let bary = k.chart(0).barycentric(crate::geom::v2(0.75, 0.25));
        let y = P::face_point(0, bary);
        let ci = locate_cone(&spm, &y).unwrap();
        let (path, d) = shortest_path(&k, &spm, &y).unwrap();
        assert!((d - (0.75f64.powi(2) + 0.25f64.powi(2)).sqrt()).abs() < 1e-9);
        assert!(crate::geodesy::is_locally_geodesic(&k, &path, 1e-9).is_ok());
        assert!(ci < spm.n_cones());
    }

    #[test]
    fn shared_side_tie_breaks_low() {
        let k = instances::unit_square();
        let spm = build_spm(&k, &P::Vertex(0)).unwrap();
        let y = P::edge_point(0, 2, 0.5); // on the diagonal, shared side
        let ci = locate_cone(&spm, &y).unwrap();
        assert_eq!(ci, 0, "tie must resolve to the lower-indexed cone");
    }

    #[test]
    fn cone_fan_queries() {
        let k = instances::cone_fan(7);
        let spm = build_spm(&k, &P::Vertex(0)).unwrap();
        // r0 -> r2: distance √3, no vertex breakpoints
        let (path, d) = shortest_path(&k, &spm, &P::Vertex(2)).unwrap();
        assert!((d - 3f64.sqrt()).abs() < 1e-9);
        assert!(
            !path.breakpoints[1..path.breakpoints.len() - 1]
                .iter()
                .any(|b| matches!(b, P::Vertex(_))),
            "no vertex breakpoints expected: {:?}",
            path.breakpoints
        );
        // r0 -> rim midpoint of r3r4: 1 + √3/2 via the center
        let y = P::edge_point(3, 4, 0.5);
        let (path, d) = shortest_path(&k, &spm, &y).unwrap();
        assert!((d - (1.0 + 3f64.sqrt() / 2.0)).abs() < 1e-9, "d = {d}");
        assert!(path.breakpoints.contains(&P::Vertex(7)), "must pass the center");
        let ci = locate_cone(&spm, &y).unwrap();
        assert_eq!(spm.cones[ci].apex, 7);
    }

    #[test]
    fn l_shape_query_golden() {
        let k = instances::l_shape();
        let spm = build_spm(&k, &P::Vertex(2)).unwrap();
        let (path, d) = shortest_path(&k, &spm, &P::Vertex(5)).unwrap();
        assert!((d - (1.0 + 2f64.sqrt())).abs() < 1e-9);
        assert!(path.breakpoints.contains(&P::Vertex(3)), "bends at the reflex corner");
    }

    #[test]
    fn face_interior_source_query() {
        let k = instances::unit_square();
        let x = P::face_point(0, [0.2, 0.5, 0.3]);
        let spm = build_spm(&k, &x).unwrap();
        let y = P::Vertex(3);
        let (path, d) = shortest_path(&k, &spm, &y).unwrap();
        let px = crate::oracle::flat_pos(&k, &x).unwrap();
        let py = crate::oracle::flat_pos(&k, &y).unwrap();
        assert!((d - px.dist(py)).abs() < 1e-9);
        // breakpoints come back in original-complex coordinates
        for bp in &path.breakpoints {
            match bp {
                P::Vertex(v) => assert!(*v < k.n_vertices()),
                P::FacePoint { face, .. } => assert!(*face < k.n_faces()),
                P::EdgePoint { edge, .. } => {
                    assert!(edge.0 < k.n_vertices() && edge.1 < k.n_vertices())
                }
            }
        }
    }

    #[test]
    fn unfolded_cone_triangle() {
        let k = instances::unit_square();
        let spm = build_spm(&k, &P::Vertex(0)).unwrap();
        let unf = unfold_cone(&spm, 0);
        let (apex, b1, b2) = unf.triangle_angles();
        assert!(apex < std::f64::consts::PI - 1e-9);
        let lim = std::f64::consts::FRAC_PI_2 + 1e-6;
        assert!(b1 <= lim && b2 <= lim, "base angles {b1}, {b2}");
        assert!(
            (unf.z.dist(unf.p) - 1.0).abs() < 1e-9 || (unf.z.dist(unf.q) - 1.0).abs() < 1e-9
        );
    }
}
