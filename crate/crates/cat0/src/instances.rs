//! Small fixed complexes used throughout the tests and the guide.

use std::collections::BTreeMap;

use crate::complex::{PlanarComplex, Tol};

/// Instance A: one right triangle with legs 4 and 3 and hypotenuse 5.
/// Vertex 0 is the right-angle corner.
pub fn right_triangle() -> PlanarComplex {
    PlanarComplex::from_flat(
        vec![(0.0, 0.0), (4.0, 0.0), (0.0, 3.0)],
        vec![[0, 1, 2]],
        Tol::default(),
    )
    .expect("right triangle")
}

/// Instance B: the unit square split along the diagonal 0–2.
/// Vertices (0,0), (1,0), (1,1), (0,1); faces (0,1,2) and (0,2,3).
pub fn unit_square() -> PlanarComplex {
    PlanarComplex::from_flat(
        vec![(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)],
        vec![[0, 1, 2], [0, 2, 3]],
        Tol::default(),
    )
    .expect("unit square")
}

/// Instance C generalized: `k` equilateral unit triangles (rᵢ, c, rᵢ₊₁)
/// around an inner center vertex c (id = k). The center's angle sum is
/// k·π/3, so the complex is nonpositively curved iff k ≥ 6.
pub fn cone_fan_unchecked(k: usize) -> PlanarComplex {
    let center = k;
    let mut faces = Vec::with_capacity(k);
    let mut lengths = BTreeMap::new();
    for i in 0..k {
        let j = (i + 1) % k;
        faces.push([i, center, j]);
        lengths.insert((i.min(j), i.max(j)), 1.0);
        lengths.insert((i, center), 1.0);
    }
    PlanarComplex::new(k + 1, faces, lengths, None, Tol::default()).expect("cone fan")
}

/// Instance C: `cone_fan(7)` is the 7-fan with θ(c) = 7π/3 > 2π.
/// Panics if `k < 6` would make the fan positively curved.
pub fn cone_fan(k: usize) -> PlanarComplex {
    assert!(k >= 6, "cone fan needs k >= 6 to be nonpositively curved");
    cone_fan_unchecked(k)
}

/// Instance D: L-shaped flat polygon with vertices
/// (0,0),(2,0),(2,1),(1,1),(1,2),(0,2) and four faces. The reflex corner
/// (1,1) has angle sum 3π/2.
pub fn l_shape() -> PlanarComplex {
    PlanarComplex::from_flat(
        vec![(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0), (1.0, 2.0), (0.0, 2.0)],
        vec![[0, 1, 3], [1, 2, 3], [0, 3, 4], [0, 4, 5]],
        Tol::default(),
    )
    .expect("l shape")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_fixed_instances_validate() {
        assert!(right_triangle().validate().pass);
        assert!(unit_square().validate().pass);
        assert!(cone_fan(7).validate().pass);
        assert!(l_shape().validate().pass);
    }

    #[test]
    fn l_shape_reflex_corner() {
        let k = l_shape();
        assert!((k.vertex_angle_sum(3) - 1.5 * std::f64::consts::PI).abs() < 1e-12);
        assert_eq!(k.boundary(), &[0, 1, 2, 3, 4, 5]);
    }
}
