//! Local geodesic machinery: ray shooting through faces and vertices,
//! strip unfolding, and local-geodesic verification.
//!
//! A geodesic in a nonpositively curved disk is straight inside every face,
//! crosses interior edges with complementary angles equal to π, and may
//! cross a vertex only when both side angles stay at least π. Ray shooting
//! extends a seed segment face by face until the boundary; at a vertex of
//! angle sum θ the extension here splits θ evenly, θ/2 on each side (which
//! coincides with the straight rule at flat vertices).

use crate::complex::{PlanarComplex, PointOnComplex};
use crate::error::{Error, Result};
use crate::geom::{wrap_angle, Iso2, Vec2};

/// A piecewise-straight path: breakpoints with every consecutive pair
/// sharing a face, the face carrying each segment, and the total intrinsic
/// length.
#[derive(Clone, Debug)]
pub struct GeodesicPath {
    pub breakpoints: Vec<PointOnComplex>,
    /// One face id per segment (`breakpoints.len() - 1` entries).
    pub seg_faces: Vec<usize>,
    pub length: f64,
}

impl GeodesicPath {
    /// Build from breakpoints and segment faces, computing the length from
    /// chart coordinates. Consecutive breakpoints closer than eps are
    /// merged.
    pub fn new(
        k: &PlanarComplex,
        breakpoints: Vec<PointOnComplex>,
        seg_faces: Vec<usize>,
    ) -> Result<GeodesicPath> {
        if breakpoints.len() != seg_faces.len() + 1
            && !(breakpoints.len() <= 1 && seg_faces.is_empty())
        {
            return Err(Error::BadArgument(format!(
                "{} breakpoints need {} segment faces, got {}",
                breakpoints.len(),
                breakpoints.len().saturating_sub(1),
                seg_faces.len()
            )));
        }
        let mut bps: Vec<PointOnComplex> = Vec::with_capacity(breakpoints.len());
        let mut faces: Vec<usize> = Vec::with_capacity(seg_faces.len());
        for (i, bp) in breakpoints.into_iter().enumerate() {
            if let Some(last) = bps.last() {
                let f = seg_faces[i - 1];
                let a = k.chart_pos(f, last)?;
                let b = k.chart_pos(f, &bp)?;
                if a.dist(b) <= k.eps() {
                    continue;
                }
                faces.push(f);
            }
            bps.push(bp);
        }
        let mut path = GeodesicPath { breakpoints: bps, seg_faces: faces, length: 0.0 };
        path.length = path_length(k, &path)?;
        Ok(path)
    }

    pub fn single_point(p: PointOnComplex) -> GeodesicPath {
        GeodesicPath { breakpoints: vec![p], seg_faces: Vec::new(), length: 0.0 }
    }

    pub fn start(&self) -> &PointOnComplex {
        self.breakpoints.first().expect("empty path")
    }
    pub fn end(&self) -> &PointOnComplex {
        self.breakpoints.last().expect("empty path")
    }

    pub fn reversed(&self) -> GeodesicPath {
        let mut bps = self.breakpoints.clone();
        bps.reverse();
        let mut faces = self.seg_faces.clone();
        faces.reverse();
        GeodesicPath { breakpoints: bps, seg_faces: faces, length: self.length }
    }

    /// Concatenate with another path starting where this one ends.
    pub fn join(&self, k: &PlanarComplex, other: &GeodesicPath) -> Result<GeodesicPath> {
        let mut bps = self.breakpoints.clone();
        let mut faces = self.seg_faces.clone();
        let mut it = other.breakpoints.iter();
        it.next();
        bps.extend(it.cloned());
        faces.extend(other.seg_faces.iter().cloned());
        GeodesicPath::new(k, bps, faces)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "breakpoints": self
                .breakpoints
                .iter()
                .map(crate::complex::io::point_to_json)
                .collect::<Vec<_>>(),
            "length": self.length,
        })
    }
}

/// Sum of chart-space segment lengths.
pub fn path_length(k: &PlanarComplex, path: &GeodesicPath) -> Result<f64> {
    let mut total = 0.0;
    for i in 0..path.seg_faces.len() {
        let f = path.seg_faces[i];
        let a = k.chart_pos(f, &path.breakpoints[i])?;
        let b = k.chart_pos(f, &path.breakpoints[i + 1])?;
        total += a.dist(b);
    }
    Ok(total)
}

/// An isometric development of a face strip into one plane: face `i`'s
/// chart maps into the common plane by `isos[i]`. Consecutive faces agree
/// on their shared edge.
#[derive(Clone, Debug)]
pub struct Unfolding {
    pub faces: Vec<usize>,
    pub isos: Vec<Iso2>,
}

impl Unfolding {
    /// Image of a point that lies in one of the strip faces (the first
    /// containing face is used when the point lies on a shared edge).
    pub fn map(&self, k: &PlanarComplex, p: &PointOnComplex) -> Result<Vec2> {
        for (i, &f) in self.faces.iter().enumerate() {
            if let Ok(cp) = k.chart_pos(f, p) {
                return Ok(self.isos[i].apply(cp));
            }
        }
        Err(Error::PointOutside("point not in unfolded strip".into()))
    }

    /// Preimage of a plane point: the first strip face whose unfolded
    /// triangle contains it.
    pub fn unmap(&self, k: &PlanarComplex, q: Vec2) -> Option<(usize, PointOnComplex)> {
        for (i, &f) in self.faces.iter().enumerate() {
            let local = self.isos[i].inverse().apply(q);
            if k.face_contains(f, local) {
                return Some((f, k.canonical_point(f, local)));
            }
        }
        None
    }
}

/// Develop a chain of faces (consecutive faces sharing an edge, no face
/// repeated) into the plane of the first face's chart.
pub fn unfold_strip(k: &PlanarComplex, faces: &[usize]) -> Result<Unfolding> {
    if faces.is_empty() {
        return Err(Error::BadArgument("empty face strip".into()));
    }
    let mut seen = std::collections::BTreeSet::new();
    let mut isos = vec![Iso2::IDENTITY];
    seen.insert(faces[0]);
    for w in faces.windows(2) {
        if !seen.insert(w[1]) {
            return Err(Error::BadArgument(format!("face {} repeated in strip", w[1])));
        }
        let glue = k.glue_iso(w[1], w[0])?;
        let last = *isos.last().unwrap();
        isos.push(last.compose(&glue));
    }
    Ok(Unfolding { faces: faces.to_vec(), isos })
}

/// Extend the seed segment γ(u,v) to the full geodesic ray r(u,v): straight
/// through faces, complementary angles π at interior edges, θ(w)/2 on each
/// side at a crossed vertex w, terminating on the boundary.
pub fn extend_ray(
    k: &PlanarComplex,
    u: &PointOnComplex,
    v: &PointOnComplex,
) -> Result<GeodesicPath> {
    let face = k
        .common_face(u, v)
        .ok_or_else(|| Error::BadArgument("seed endpoints share no face".into()))?;
    let pu = k.chart_pos(face, u)?;
    let pv = k.chart_pos(face, v)?;
    if pu.dist(pv) <= k.eps() {
        return Err(Error::BadArgument("seed endpoints coincide".into()));
    }
    if let (PointOnComplex::Vertex(a), PointOnComplex::Vertex(b)) = (u, v) {
        if k.is_boundary_edge(*a, *b) {
            return Err(Error::BadArgument("seed lies on the boundary".into()));
        }
    }

    let mut breakpoints = vec![u.clone()];
    let mut seg_faces: Vec<usize> = Vec::new();
    let mut visited = std::collections::BTreeSet::new();
    visited.insert(face);

    let mut cur_face = face;
    let mut p = pu;
    let mut d = (pv - pu).normalized();

    loop {
        match march_exit(k, cur_face, p, d)? {
            Exit::Edge { point, u: eu, v: ev, t } => {
                let bp = PointOnComplex::edge_point(eu, ev, t);
                breakpoints.push(bp);
                seg_faces.push(cur_face);
                match k.face_across(cur_face, eu, ev) {
                    None => break,
                    Some(next) => {
                        if !visited.insert(next) {
                            return Err(Error::Numerical(format!("ray revisits face {next}")));
                        }
                        let glue = k.glue_iso(cur_face, next)?;
                        p = glue.apply(point);
                        d = glue.apply_dir(d);
                        cur_face = next;
                    }
                }
            }
            Exit::Corner { vertex } => {
                breakpoints.push(PointOnComplex::Vertex(vertex));
                seg_faces.push(cur_face);
                if k.is_boundary_vertex(vertex) {
                    break;
                }
                let back = k.fan_coord(vertex, cur_face, -d);
                let theta = k.vertex_angle_sum(vertex);
                let (next, dir) = k.fan_dir(vertex, back + theta / 2.0);
                if !visited.insert(next) {
                    return Err(Error::Numerical(format!("ray revisits face {next}")));
                }
                p = k.vertex_chart_pos(next, vertex);
                d = dir;
                cur_face = next;
            }
        }
    }
    GeodesicPath::new(k, breakpoints, seg_faces)
}

enum Exit {
    Edge { point: Vec2, u: usize, v: usize, t: f64 },
    Corner { vertex: usize },
}

/// Where the ray from `p` in direction `d` leaves the triangle of `face`.
/// A crossing within eps of a corner snaps to that corner.
fn march_exit(k: &PlanarComplex, face: usize, p: Vec2, d: Vec2) -> Result<Exit> {
    let ch = k.chart(face);
    let f = k.face(face);
    let eps = k.eps();
    let mut best: Option<(f64, usize, f64)> = None; // (ray t, edge index, edge param)
    for e in 0..3 {
        let a = ch.corners[e];
        let b = ch.corners[(e + 1) % 3];
        if let Some((t, s)) = crate::geom::line_intersect(p, p + d, a, b) {
            if t > eps && (-1e-9..=1.0 + 1e-9).contains(&s) && best.map_or(true, |(bt, _, _)| t < bt)
            {
                best = Some((t, e, s.clamp(0.0, 1.0)));
            }
        }
    }
    let Some((t, e, s)) = best else {
        return Err(Error::Numerical(format!(
            "ray failed to exit face {face} (p = {p:?}, d = {d:?})"
        )));
    };
    let point = p + d.scale(t);
    for c in 0..3 {
        if ch.corners[c].dist(point) <= eps {
            return Ok(Exit::Corner { vertex: f[c] });
        }
    }
    Ok(Exit::Edge { point, u: f[e], v: f[(e + 1) % 3], t: s })
}

/// A local-geodesic violation: the first breakpoint where a side angle
/// falls below π − tol.
#[derive(Clone, Debug)]
pub struct GeodesicViolation {
    pub breakpoint: usize,
    pub angle: f64,
    pub detail: String,
}

/// Check that a path is locally geodesic: straight across edges and faces,
/// and with both side angles at least π at interior vertex breakpoints. At
/// boundary points only the material side constrains the path.
pub fn is_locally_geodesic(
    k: &PlanarComplex,
    path: &GeodesicPath,
    tol: f64,
) -> std::result::Result<(), GeodesicViolation> {
    for i in 1..path.breakpoints.len().saturating_sub(1) {
        check_breakpoint_indices(k, path, i - 1, i, i, i + 1, tol)?;
    }
    Ok(())
}

/// Breakpoint check with explicit segment indices so closed walks can wrap.
/// Segment one runs `breakpoints[a] -> breakpoints[b]` in `seg_faces[a]`,
/// segment two `breakpoints[c] -> breakpoints[d]` in `seg_faces[c]`, with
/// `breakpoints[b] == breakpoints[c]` the corner being checked.
pub fn check_breakpoint_indices(
    k: &PlanarComplex,
    path: &GeodesicPath,
    a: usize,
    b: usize,
    c: usize,
    d: usize,
    tol: f64,
) -> std::result::Result<(), GeodesicViolation> {
    let f_in = path.seg_faces[a];
    let f_out = path.seg_faces[c];
    let corner = &path.breakpoints[b];
    let p_in = k.chart_pos(f_in, &path.breakpoints[a]).unwrap();
    let p_here_in = k.chart_pos(f_in, corner).unwrap();
    let p_here_out = k.chart_pos(f_out, corner).unwrap();
    let p_out = k.chart_pos(f_out, &path.breakpoints[d]).unwrap();
    let din = (p_here_in - p_in).normalized();
    let dout = (p_out - p_here_out).normalized();

    match corner {
        PointOnComplex::Vertex(v) => {
            let back = k.fan_coord(*v, f_in, -din);
            let fwd = k.fan_coord(*v, f_out, dout);
            let theta = k.vertex_angle_sum(*v);
            if k.fan(*v).closed {
                let s1 = wrap_angle(fwd - back).min(theta);
                let s2 = theta - s1;
                let m = s1.min(s2);
                if m < std::f64::consts::PI - tol {
                    return Err(GeodesicViolation {
                        breakpoint: b,
                        angle: m,
                        detail: format!("side angle {m:.9} < π at inner vertex {v}"),
                    });
                }
            } else {
                let s = (fwd - back).abs();
                if s < std::f64::consts::PI - tol {
                    return Err(GeodesicViolation {
                        breakpoint: b,
                        angle: s,
                        detail: format!("material angle {s:.9} < π at boundary vertex {v}"),
                    });
                }
            }
        }
        _ => {
            let dout_in = if f_in == f_out {
                dout
            } else {
                k.glue_iso(f_out, f_in).unwrap().apply_dir(dout)
            };
            let turn = din.cross(dout_in).atan2(din.dot(dout_in)).abs();
            if turn > tol {
                return Err(GeodesicViolation {
                    breakpoint: b,
                    angle: std::f64::consts::PI - turn,
                    detail: format!("turn {turn:.3e} at breakpoint {b}"),
                });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::PointOnComplex as P;
    use crate::geom::v2;
    use crate::instances;

    fn bary(k: &PlanarComplex, face: usize, p: Vec2) -> [f64; 3] {
        k.chart(face).barycentric(p)
    }

    #[test]
    fn square_diagonal_ray() {
        // seed (0,0) -> (0.5,0.5): exits at (1,1) crossing the diagonal
        // midpoint, total length √2
        let k = instances::unit_square();
        let seed_v = P::face_point(0, bary(&k, 0, v2(0.6, 0.45)));
        // aim exactly along the diagonal instead: use the edge midpoint
        let seed_v = match seed_v {
            _ => P::edge_point(0, 2, 0.5),
        };
        let ray = extend_ray(&k, &P::Vertex(0), &seed_v).unwrap();
        assert_eq!(ray.end(), &P::Vertex(2));
        assert!((ray.length - 2f64.sqrt()).abs() < 1e-9);
        assert!(is_locally_geodesic(&k, &ray, 1e-9).is_ok());
    }

    #[test]
    fn single_face_chord() {
        let k = instances::right_triangle();
        let a = P::face_point(0, [0.5, 0.25, 0.25]);
        let b = P::face_point(0, [0.4, 0.35, 0.25]);
        let ray = extend_ray(&k, &a, &b).unwrap();
        assert_eq!(ray.breakpoints.len(), 2);
        assert!(matches!(ray.end(), P::EdgePoint { .. } | P::Vertex(_)));
    }

    #[test]
    fn cone_fan_ray_through_center() {
        // seed r0 -> c continues past c splitting 7π/3 into 7π/6 per side,
        // exits at the midpoint of rim edge r3–r4, total length 1 + √3/2
        let k = instances::cone_fan(7);
        let ray = extend_ray(&k, &P::Vertex(0), &P::Vertex(7)).unwrap();
        let expect = 1.0 + 3f64.sqrt() / 2.0;
        assert!((ray.length - expect).abs() < 1e-9, "length {}", ray.length);
        match ray.end() {
            P::EdgePoint { edge, t } => {
                assert_eq!(*edge, (3, 4));
                assert!((t - 0.5).abs() < 1e-9);
            }
            other => panic!("expected rim edge point, got {other:?}"),
        }
        assert!(is_locally_geodesic(&k, &ray, 1e-9).is_ok());
    }

    #[test]
    fn boundary_seed_rejected() {
        let k = instances::unit_square();
        assert!(extend_ray(&k, &P::Vertex(0), &P::Vertex(1)).is_err());
    }

    #[test]
    fn unfold_square_strip() {
        let k = instances::unit_square();
        let unf = unfold_strip(&k, &[0, 1]).unwrap();
        let a = unf.map(&k, &P::Vertex(0)).unwrap();
        let b = unf.map(&k, &P::Vertex(2)).unwrap();
        assert!((a.dist(b) - 2f64.sqrt()).abs() < 1e-12);
        let d = unf.map(&k, &P::Vertex(3)).unwrap();
        assert!((a.dist(d) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn unfold_fan_hinge() {
        // faces (r0,c,r1),(r1,c,r2): hinge angle at c is 2π/3, so
        // |f(r0) − f(r2)| = √3 by the law of cosines
        let k = instances::cone_fan(7);
        let unf = unfold_strip(&k, &[0, 1]).unwrap();
        let r0 = unf.map(&k, &P::Vertex(0)).unwrap();
        let r2 = unf.map(&k, &P::Vertex(2)).unwrap();
        assert!((r0.dist(r2) - 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn unfold_rejects_repeats_and_non_adjacent() {
        let k = instances::cone_fan(7);
        assert!(unfold_strip(&k, &[0, 1, 0]).is_err());
        assert!(unfold_strip(&k, &[0, 3]).is_err());
    }

    #[test]
    fn unfold_round_trip() {
        let k = instances::l_shape();
        let unf = unfold_strip(&k, &[0, 1]).unwrap();
        let p = P::face_point(1, [0.3, 0.4, 0.3]);
        let img = unf.map(&k, &p).unwrap();
        let (f, q) = unf.unmap(&k, img).unwrap();
        assert_eq!(f, 1);
        let orig = k.chart_pos(1, &p).unwrap();
        let back = k.chart_pos(1, &q).unwrap();
        assert!(orig.dist(back) < 1e-9);
    }

    #[test]
    fn strip_preserves_in_face_distances() {
        let k = instances::cone_fan(8);
        let unf = unfold_strip(&k, &[2, 3]).unwrap();
        for (ba, bb) in [([0.2, 0.3, 0.5], [0.7, 0.1, 0.2]), ([0.1, 0.8, 0.1], [0.3, 0.3, 0.4])] {
            let pa = P::face_point(3, ba);
            let pb = P::face_point(3, bb);
            let d_chart = k.chart_pos(3, &pa).unwrap().dist(k.chart_pos(3, &pb).unwrap());
            let d_unf = unf.map(&k, &pa).unwrap().dist(unf.map(&k, &pb).unwrap());
            assert!((d_chart - d_unf).abs() < 1e-9);
        }
    }

    #[test]
    fn bent_path_fails_local_geodesic() {
        // (0,0) -> (1,0) -> (1,1): side angle π/2 < π at (1,0)
        let k = instances::unit_square();
        let path =
            GeodesicPath::new(&k, vec![P::Vertex(0), P::Vertex(1), P::Vertex(2)], vec![0, 0])
                .unwrap();
        let err = is_locally_geodesic(&k, &path, 1e-9).unwrap_err();
        assert_eq!(err.breakpoint, 1);
        assert!((err.angle - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
    }

    #[test]
    fn fan_center_path_is_geodesic() {
        // r0 – c – r3: both side angles 7π/6 ≥ π
        let k = instances::cone_fan(7);
        let path =
            GeodesicPath::new(&k, vec![P::Vertex(0), P::Vertex(7), P::Vertex(3)], vec![0, 2])
                .unwrap();
        assert!(is_locally_geodesic(&k, &path, 1e-9).is_ok());
        assert!((path.length - 2.0).abs() < 1e-12);
    }

    #[test]
    fn l_shape_chain_length() {
        // v2–v3 ... v5 chain through the reflex corner: 1 + √2
        let k = instances::l_shape();
        let path = GeodesicPath::new(
            &k,
            vec![
                P::Vertex(2),
                P::Vertex(3),
                P::edge_point(0, 4, 2.0 / 3.0),
                P::Vertex(5),
            ],
            vec![1, 2, 3],
        )
        .unwrap();
        assert!((path.length - (1.0 + 2f64.sqrt())).abs() < 1e-12);
        assert!(is_locally_geodesic(&k, &path, 1e-9).is_ok());
    }
}
