//! JSON file formats: the complex file, point values, and path values.
//!
//! Complex file (UTF-8 JSON):
//! `{"format":"cat0-complex/1","n_vertices":N,"faces":[[a,b,c],...],
//!   "edge_lengths":[[u,v,len],...],"flat_coordinates":[[x,y],...]}`
//! Faces may be convex polygons with more than three vertices; they are
//! fan-triangulated from their first listed vertex. `edge_lengths` may be
//! omitted when `flat_coordinates` is present.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{PlanarComplex, PointOnComplex, Tol};
use crate::error::{Error, Result};
use crate::geom::v2;

pub const FORMAT: &str = "cat0-complex/1";

#[derive(Serialize, Deserialize)]
struct ComplexFile {
    format: String,
    n_vertices: usize,
    faces: Vec<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    edge_lengths: Option<Vec<(usize, usize, f64)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    flat_coordinates: Option<Vec<(f64, f64)>>,
}

/// Parse a complex file. Polygonal faces are fan-triangulated from their
/// first listed vertex (they must be convex for this to be valid; the
/// validation report will flag the results otherwise).
pub fn parse_complex(text: &str) -> Result<PlanarComplex> {
    parse_complex_with(text, Tol::default())
}

pub fn parse_complex_with(text: &str, tol: Tol) -> Result<PlanarComplex> {
    let file: ComplexFile = serde_json::from_str(text)
        .map_err(|e| Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column())))?;
    if file.format != FORMAT {
        return Err(Error::Parse(format!(
            "unknown format {:?}, expected {FORMAT:?}",
            file.format
        )));
    }
    let mut faces = Vec::new();
    for (fi, poly) in file.faces.iter().enumerate() {
        if poly.len() < 3 {
            return Err(Error::Parse(format!("face {fi} has fewer than 3 vertices")));
        }
        for i in 1..poly.len() - 1 {
            faces.push([poly[0], poly[i], poly[i + 1]]);
        }
    }
    let mut lengths = BTreeMap::new();
    if let Some(el) = &file.edge_lengths {
        for &(u, v, l) in el {
            let key = if u < v { (u, v) } else { (v, u) };
            if let Some(prev) = lengths.insert(key, l) {
                if (prev - l).abs() > 0.0 {
                    return Err(Error::ConflictingEdgeLength(key.0, key.1));
                }
            }
        }
    } else if file.flat_coordinates.is_none() {
        return Err(Error::Parse(
            "edge_lengths may be omitted only when flat_coordinates is present".into(),
        ));
    }
    let flat = file
        .flat_coordinates
        .map(|cs| cs.into_iter().map(|(x, y)| v2(x, y)).collect());
    PlanarComplex::new(file.n_vertices, faces, lengths, flat, tol)
}

/// Serialize to the canonical file form: triangles only, edge lengths
/// sorted by vertex pair. `parse ∘ serialize` is the identity.
pub fn serialize_complex(k: &PlanarComplex) -> String {
    let file = ComplexFile {
        format: FORMAT.to_string(),
        n_vertices: k.n_vertices(),
        faces: k.faces().iter().map(|f| f.to_vec()).collect(),
        edge_lengths: Some(
            k.edge_lengths()
                .iter()
                .map(|(&(u, v), &l)| (u, v, l))
                .collect(),
        ),
        flat_coordinates: k
            .flat_coordinates()
            .map(|cs| cs.iter().map(|p| (p.x, p.y)).collect()),
    };
    let mut out = serde_json::to_string_pretty(&file).expect("complex serialization");
    out.push('\n');
    out
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PointJson {
    V { vertex: usize },
    E { edge: (usize, usize), t: f64 },
    F { face: usize, bary: [f64; 3] },
}

pub fn point_to_json(p: &PointOnComplex) -> serde_json::Value {
    let pj = match p {
        PointOnComplex::Vertex(v) => PointJson::V { vertex: *v },
        PointOnComplex::EdgePoint { edge, t } => PointJson::E { edge: *edge, t: *t },
        PointOnComplex::FacePoint { face, bary } => PointJson::F { face: *face, bary: *bary },
    };
    serde_json::to_value(pj).expect("point serialization")
}

pub fn point_from_json(v: &serde_json::Value) -> Result<PointOnComplex> {
    let pj: PointJson = serde_json::from_value(v.clone())
        .map_err(|e| Error::Parse(format!("bad point value: {e}")))?;
    Ok(match pj {
        PointJson::V { vertex } => PointOnComplex::Vertex(vertex),
        PointJson::E { edge, t } => PointOnComplex::edge_point(edge.0, edge.1, t),
        PointJson::F { face, bary } => PointOnComplex::FacePoint { face, bary },
    })
}

pub fn point_from_str(s: &str) -> Result<PointOnComplex> {
    let v: serde_json::Value =
        serde_json::from_str(s).map_err(|e| Error::Parse(format!("bad point JSON: {e}")))?;
    point_from_json(&v)
}

/// Bounds-check a point against a complex.
pub fn check_point(k: &PlanarComplex, p: &PointOnComplex) -> Result<()> {
    match p {
        PointOnComplex::Vertex(v) => {
            if *v >= k.n_vertices() {
                return Err(Error::IndexOutOfRange(format!("vertex {v}")));
            }
        }
        PointOnComplex::EdgePoint { edge, t } => {
            if edge.0 >= k.n_vertices() || edge.1 >= k.n_vertices() {
                return Err(Error::IndexOutOfRange(format!("edge {edge:?}")));
            }
            if k.edge_faces(edge.0, edge.1).is_empty() {
                return Err(Error::PointOutside(format!("no edge {edge:?}")));
            }
            if !(0.0..=1.0).contains(t) {
                return Err(Error::PointOutside(format!("edge parameter {t}")));
            }
        }
        PointOnComplex::FacePoint { face, bary } => {
            if *face >= k.n_faces() {
                return Err(Error::IndexOutOfRange(format!("face {face}")));
            }
            if bary.iter().any(|b| *b < -1e-12) || (bary.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return Err(Error::PointOutside(format!("barycentric {bary:?}")));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances;

    #[test]
    fn parse_serialize_round_trip() {
        let k = instances::unit_square();
        let text = serialize_complex(&k);
        let k2 = parse_complex(&text).unwrap();
        assert_eq!(serialize_complex(&k2), text);
        assert_eq!(k2.n_vertices(), k.n_vertices());
        assert!((k2.edge_len(0, 2) - k.edge_len(0, 2)).abs() < 1e-15);
    }

    #[test]
    fn polygon_faces_are_fan_triangulated() {
        let text = r#"{"format":"cat0-complex/1","n_vertices":4,
            "faces":[[0,1,2,3]],
            "flat_coordinates":[[0,0],[1,0],[1,1],[0,1]]}"#;
        let k = parse_complex(text).unwrap();
        assert_eq!(k.n_faces(), 2);
        assert!(k.validate().pass);
    }

    #[test]
    fn conflicting_lengths_rejected() {
        let text = r#"{"format":"cat0-complex/1","n_vertices":3,
            "faces":[[0,1,2]],
            "edge_lengths":[[0,1,1.0],[1,2,1.0],[0,2,1.0],[1,0,2.0]]}"#;
        assert!(matches!(
            parse_complex(text),
            Err(Error::ConflictingEdgeLength(0, 1))
        ));
    }

    #[test]
    fn point_json_forms() {
        let p = point_from_str(r#"{"vertex":3}"#).unwrap();
        assert_eq!(p, PointOnComplex::Vertex(3));
        let p = point_from_str(r#"{"edge":[5,2],"t":0.25}"#).unwrap();
        assert_eq!(p, PointOnComplex::edge_point(5, 2, 0.25));
        let p = point_from_str(r#"{"face":1,"bary":[0.2,0.3,0.5]}"#).unwrap();
        assert!(matches!(p, PointOnComplex::FacePoint { face: 1, .. }));
        assert!(point_from_str(r#"{"nope":1}"#).is_err());
    }
}
