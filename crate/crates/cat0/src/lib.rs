//! Geodesic kernel for finite piecewise-Euclidean triangulated disks of
//! nonpositive curvature (CAT(0) planar complexes).
//!
//! The complex is given intrinsically — triangles plus edge lengths — and
//! all geometry happens in per-face charts glued by isometries. On top of
//! that sit:
//!
//! - [`complex`]: representation, parsing, validation, charts.
//! - [`geodesy`]: ray shooting, strip unfolding, local-geodesic checks.
//! - [`spm`]: shortest path maps by a circular-wavefront sweep.
//! - [`query`]: single-source shortest paths in linear time per query.
//! - [`hull`]: geodesic convex hulls of finite point sets.
//! - [`oracle`]: independent ground truth (ε-nets, visibility graphs) and
//!   instance generators.
//! - [`render`]: SVG figures (combinatorial and isometric views).
//!
//! The mdBook under `book/` walks through the concepts; its code snippets
//! are compiled as doctests of this crate.

pub mod complex;
pub mod error;
pub mod geodesy;
pub mod geom;
pub mod instances;
pub mod oracle;
pub mod query;
pub mod spm;

pub use complex::{PlanarComplex, PointOnComplex, Tol, ValidationReport};
pub use error::{Error, Result};
pub use geodesy::GeodesicPath;


#[cfg(doctest)]
mod book {
    //! Compile and run the code blocks of the guide as doctests.
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            pub struct $name;
        };
    }
    chapter!(Introduction, "../../../book/src/introduction.md");
    chapter!(Complexes, "../../../book/src/complexes.md");
    chapter!(Geodesics, "../../../book/src/geodesics.md");
    chapter!(ShortestPathMaps, "../../../book/src/shortest-path-maps.md");
    chapter!(Queries, "../../../book/src/queries.md");
    chapter!(ConvexHulls, "../../../book/src/convex-hulls.md");
    chapter!(Oracles, "../../../book/src/oracles.md");
}
