//! Small 2D vector/rigid-motion toolkit used by the chart and unfolding code.
//!
//! Everything here is plain `f64` plane geometry. Intrinsic quantities
//! (lengths, angles) are produced by the law of cosines on edge lengths and
//! then manipulated in per-face charts, so this module never sees the
//! complex itself.

use serde::{Deserialize, Serialize};

/// A point or vector in a 2D chart.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

pub const fn v2(x: f64, y: f64) -> Vec2 {
    Vec2 { x, y }
}

impl Vec2 {
    pub const ZERO: Vec2 = v2(0.0, 0.0);

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }
    pub fn dist(self, o: Vec2) -> f64 {
        (self - o).norm()
    }
    pub fn normalized(self) -> Vec2 {
        let n = self.norm();
        v2(self.x / n, self.y / n)
    }
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }
    pub fn perp(self) -> Vec2 {
        v2(-self.y, self.x)
    }
    pub fn scale(self, s: f64) -> Vec2 {
        v2(self.x * s, self.y * s)
    }
    pub fn lerp(self, o: Vec2, t: f64) -> Vec2 {
        v2(self.x + (o.x - self.x) * t, self.y + (o.y - self.y) * t)
    }
}

impl std::ops::Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        v2(self.x + o.x, self.y + o.y)
    }
}
impl std::ops::Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        v2(self.x - o.x, self.y - o.y)
    }
}
impl std::ops::Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        v2(-self.x, -self.y)
    }
}

/// Orientation-preserving rigid motion `p ↦ R·p + t` with `R` a rotation.
///
/// Used to glue face charts along shared edges and to compose unfoldings.
/// The rotation is stored as (cos, sin) and renormalized on composition so
/// long chains of gluings do not accumulate scale drift.
#[derive(Clone, Copy, Debug)]
pub struct Iso2 {
    pub c: f64,
    pub s: f64,
    pub t: Vec2,
}

impl Iso2 {
    pub const IDENTITY: Iso2 = Iso2 { c: 1.0, s: 0.0, t: Vec2::ZERO };

    /// Rigid motion with rotation angle `a` and translation `t`.
    pub fn new(a: f64, t: Vec2) -> Iso2 {
        Iso2 { c: a.cos(), s: a.sin(), t }
    }

    /// The unique orientation-preserving motion taking segment (a1,b1) onto
    /// (a2,b2). The segments must have (nearly) equal length.
    pub fn matching(a1: Vec2, b1: Vec2, a2: Vec2, b2: Vec2) -> Iso2 {
        let u = (b1 - a1).normalized();
        let v = (b2 - a2).normalized();
        // rotation taking u to v
        let c = u.dot(v);
        let s = u.cross(v);
        let n = c.hypot(s);
        let (c, s) = (c / n, s / n);
        let ra = v2(c * a1.x - s * a1.y, s * a1.x + c * a1.y);
        Iso2 { c, s, t: a2 - ra }
    }

    pub fn apply(&self, p: Vec2) -> Vec2 {
        v2(
            self.c * p.x - self.s * p.y + self.t.x,
            self.s * p.x + self.c * p.y + self.t.y,
        )
    }

    /// Rotate a direction vector (no translation).
    pub fn apply_dir(&self, d: Vec2) -> Vec2 {
        v2(self.c * d.x - self.s * d.y, self.s * d.x + self.c * d.y)
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Iso2) -> Iso2 {
        let c = self.c * other.c - self.s * other.s;
        let s = self.s * other.c + self.c * other.s;
        let n = c.hypot(s);
        Iso2 {
            c: c / n,
            s: s / n,
            t: self.apply(other.t),
        }
    }

    pub fn inverse(&self) -> Iso2 {
        let c = self.c;
        let s = -self.s;
        let it = v2(-(c * self.t.x - s * self.t.y), -(s * self.t.x + c * self.t.y));
        Iso2 { c, s, t: it }
    }
}

/// Parameter of the closest point to `p` on segment (a,b), clamped to [0,1].
pub fn seg_closest_t(a: Vec2, b: Vec2, p: Vec2) -> f64 {
    let ab = b - a;
    let d2 = ab.dot(ab);
    if d2 == 0.0 {
        return 0.0;
    }
    ((p - a).dot(ab) / d2).clamp(0.0, 1.0)
}

/// Intersection parameter pair of lines a+t(b-a) and c+u(d-c), if not parallel.
pub fn line_intersect(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> Option<(f64, f64)> {
    let r = b - a;
    let s = d - c;
    let den = r.cross(s);
    if den.abs() < 1e-300 {
        return None;
    }
    let t = (c - a).cross(s) / den;
    let u = (c - a).cross(r) / den;
    Some((t, u))
}

/// Signed area of a polygon (positive when counterclockwise).
pub fn polygon_area(pts: &[Vec2]) -> f64 {
    let mut a = 0.0;
    for i in 0..pts.len() {
        let p = pts[i];
        let q = pts[(i + 1) % pts.len()];
        a += p.cross(q);
    }
    a * 0.5
}

/// Point-in-convex-polygon test with tolerance; polygon must be CCW.
pub fn convex_contains(pts: &[Vec2], p: Vec2, eps: f64) -> bool {
    for i in 0..pts.len() {
        let a = pts[i];
        let b = pts[(i + 1) % pts.len()];
        if (b - a).cross(p - a) < -eps * (b - a).norm().max(1.0) {
            return false;
        }
    }
    true
}

/// Clip a CCW convex polygon by the half-plane `cross(dir, p - origin) >= 0`,
/// i.e. keep everything to the left of the oriented line through `origin`.
pub fn clip_halfplane(pts: &[Vec2], origin: Vec2, dir: Vec2, eps: f64) -> Vec<Vec2> {
    let side = |p: Vec2| dir.cross(p - origin);
    let mut out = Vec::with_capacity(pts.len() + 2);
    let n = pts.len();
    for i in 0..n {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        let sa = side(a);
        let sb = side(b);
        if sa >= -eps {
            out.push(a);
        }
        if (sa > eps && sb < -eps) || (sa < -eps && sb > eps) {
            let t = sa / (sa - sb);
            out.push(a.lerp(b, t));
        }
    }
    out
}

/// Remove consecutive duplicates (within `eps`) from a polygon ring.
pub fn dedup_ring(pts: &mut Vec<Vec2>, eps: f64) {
    let mut i = 0;
    while pts.len() > 1 && i < pts.len() {
        let j = (i + 1) % pts.len();
        if pts[i].dist(pts[j]) <= eps {
            pts.remove(j.max(i).min(pts.len() - 1));
        } else {
            i += 1;
        }
    }
}

/// Planar convex hull, CCW, by Andrew's monotone chain. Collinear points are
/// dropped. Returns the input order-independent hull; fewer than 3 distinct
/// points yield the distinct points themselves (sorted).
pub fn convex_hull_2d(points: &[Vec2]) -> Vec<Vec2> {
    let mut pts: Vec<Vec2> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup_by(|a, b| a.x == b.x && a.y == b.y);
    let n = pts.len();
    if n < 3 {
        return pts;
    }
    let mut hull: Vec<Vec2> = Vec::with_capacity(2 * n);
    for &p in pts.iter() {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            if (b - a).cross(p - a) <= 1e-300 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev() {
        while hull.len() >= lower_len {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            if (b - a).cross(p - a) <= 1e-300 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// Triangulate a simple polygon by ear clipping. `ring` indexes into
/// `points` and must be counterclockwise. Returns `None` when no ear can
/// be found (ring not simple or collapsed).
pub fn ear_clip(points: &[Vec2], ring: &[usize]) -> Option<Vec<[usize; 3]>> {
    let mut ring: Vec<usize> = ring.to_vec();
    let mut out = Vec::with_capacity(ring.len().saturating_sub(2));
    while ring.len() > 3 {
        let n = ring.len();
        let mut clipped = false;
        for i in 0..n {
            let a = points[ring[(i + n - 1) % n]];
            let b = points[ring[i]];
            let c = points[ring[(i + 1) % n]];
            if (b - a).cross(c - b) <= 1e-14 {
                continue; // reflex or collinear corner
            }
            // no other ring vertex may lie inside the candidate ear
            let mut ok = true;
            for &r in &ring {
                if r == ring[(i + n - 1) % n] || r == ring[i] || r == ring[(i + 1) % n] {
                    continue;
                }
                let p = points[r];
                let inside = (b - a).cross(p - a) > -1e-14
                    && (c - b).cross(p - b) > -1e-14
                    && (a - c).cross(p - c) > -1e-14;
                if inside {
                    ok = false;
                    break;
                }
            }
            if ok {
                out.push([ring[(i + n - 1) % n], ring[i], ring[(i + 1) % n]]);
                ring.remove(i);
                clipped = true;
                break;
            }
        }
        if !clipped {
            return None;
        }
    }
    if ring.len() == 3 {
        out.push([ring[0], ring[1], ring[2]]);
    }
    Some(out)
}

/// Normalize an angle into [0, 2π).
pub fn wrap_angle(a: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let mut a = a % two_pi;
    if a < 0.0 {
        a += two_pi;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matching_isometry_maps_segment() {
        let a1 = v2(0.0, 0.0);
        let b1 = v2(1.0, 0.0);
        let a2 = v2(3.0, 4.0);
        let b2 = v2(3.0, 5.0);
        let iso = Iso2::matching(a1, b1, a2, b2);
        assert!(iso.apply(a1).dist(a2) < 1e-12);
        assert!(iso.apply(b1).dist(b2) < 1e-12);
        // orientation preserved: left of a1->b1 maps to left of a2->b2
        let left = iso.apply(v2(0.5, 0.5));
        assert!((b2 - a2).cross(left - a2) > 0.0);
    }

    #[test]
    fn compose_and_inverse_round_trip() {
        let f = Iso2::new(0.7, v2(1.0, -2.0));
        let g = Iso2::new(-1.3, v2(0.3, 0.9));
        let p = v2(0.2, 0.4);
        let fg = f.compose(&g);
        assert!(fg.apply(p).dist(f.apply(g.apply(p))) < 1e-12);
        assert!(f.inverse().apply(f.apply(p)).dist(p) < 1e-12);
    }

    #[test]
    fn hull_of_square_with_interior_point() {
        let pts = [v2(0.0, 0.0), v2(1.0, 0.0), v2(1.0, 1.0), v2(0.0, 1.0), v2(0.5, 0.5)];
        let h = convex_hull_2d(&pts);
        assert_eq!(h.len(), 4);
        assert!(polygon_area(&h) > 0.0);
    }

    #[test]
    fn clip_keeps_left_side() {
        let tri = vec![v2(0.0, 0.0), v2(2.0, 0.0), v2(0.0, 2.0)];
        let out = clip_halfplane(&tri, v2(1.0, -1.0), v2(0.0, 1.0), 1e-12);
        // keep x <= 1 side? cross((0,1), p-(1,-1)) = -(p.x-1) >= 0 -> p.x <= 1
        assert!(out.iter().all(|p| p.x <= 1.0 + 1e-9));
        assert!((polygon_area(&out) - 1.5).abs() < 1e-9);
    }
}
