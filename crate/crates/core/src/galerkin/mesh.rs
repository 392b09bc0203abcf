use std::collections::HashMap;
use std::io::Write;

use crate::error::{Error, Result};
use crate::interp::AxisBox;

/// Flat triangle given by its three vertices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Triangle {
    pub v: [[f64; 3]; 3],
}

impl Triangle {
    pub fn new(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> Self {
        Self { v: [a, b, c] }
    }

    pub fn area(&self) -> f64 {
        0.5 * norm3(cross(sub(self.v[1], self.v[0]), sub(self.v[2], self.v[0])))
    }

    pub fn centroid(&self) -> [f64; 3] {
        let mut c = [0.0; 3];
        for p in &self.v {
            for i in 0..3 {
                c[i] += p[i] / 3.0;
            }
        }
        c
    }

    /// Longest edge.
    pub fn diam(&self) -> f64 {
        (0..3)
            .map(|i| norm3(sub(self.v[i], self.v[(i + 1) % 3])))
            .fold(0.0, f64::max)
    }

    pub fn bbox(&self) -> AxisBox {
        let pts: Vec<&[f64]> = self.v.iter().map(|p| p.as_slice()).collect();
        AxisBox::bounding(&pts).expect("three finite points")
    }

    /// `P0 + s (P1 - P0) + t (P2 - P1)` for `0 <= t <= s <= 1`.
    pub fn map(&self, s: f64, t: f64) -> [f64; 3] {
        let [p0, p1, p2] = self.v;
        std::array::from_fn(|i| p0[i] + s * (p1[i] - p0[i]) + t * (p2[i] - p1[i]))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            v: self.v.map(|p| p.map(|x| x * factor)),
        }
    }
}

pub(crate) fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn norm3(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

/// Indexed triangle surface mesh.
#[derive(Clone, Debug)]
pub struct TriangleMesh {
    vertices: Vec<[f64; 3]>,
    faces: Vec<[usize; 3]>,
}

impl TriangleMesh {
    pub fn new(vertices: Vec<[f64; 3]>, faces: Vec<[usize; 3]>) -> Result<Self> {
        for f in &faces {
            if f.iter().any(|&i| i >= vertices.len()) {
                return Err(Error::InvalidParameter(format!("face {f:?} out of range")));
            }
        }
        Ok(Self { vertices, faces })
    }

    pub fn vertices(&self) -> &[[f64; 3]] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn triangle(&self, i: usize) -> Triangle {
        let f = self.faces[i];
        Triangle::new(
            self.vertices[f[0]],
            self.vertices[f[1]],
            self.vertices[f[2]],
        )
    }

    pub fn triangles(&self) -> impl Iterator<Item = Triangle> + '_ {
        (0..self.len()).map(|i| self.triangle(i))
    }

    pub fn total_area(&self) -> f64 {
        self.triangles().map(|t| t.area()).sum()
    }

    /// Every edge shared by exactly two faces with opposite orientation.
    pub fn is_closed_oriented(&self) -> bool {
        let mut edges: HashMap<(usize, usize), i32> = HashMap::new();
        for f in &self.faces {
            for k in 0..3 {
                *edges.entry((f[k], f[(k + 1) % 3])).or_default() += 1;
            }
        }
        edges
            .iter()
            .all(|(&(a, b), &n)| n == 1 && edges.get(&(b, a)) == Some(&1))
    }

    /// Wavefront OBJ with 1-based indices.
    pub fn write_obj<W: Write>(&self, mut w: W) -> Result<()> {
        for v in &self.vertices {
            writeln!(w, "v {:.17e} {:.17e} {:.17e}", v[0], v[1], v[2])?;
        }
        for f in &self.faces {
            writeln!(w, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
        }
        Ok(())
    }
}

/// Unit-sphere mesh from the octahedron after `level` uniform refinements,
/// each splitting every triangle into four and projecting new vertices onto
/// the sphere. Has `8 · 4^level` triangles.
pub fn sphere_mesh(level: usize) -> Result<TriangleMesh> {
    if level > 8 {
        return Err(Error::InvalidParameter(format!(
            "refinement level {level} too large"
        )));
    }
    let mut vertices: Vec<[f64; 3]> = vec![
        [1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, -1.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0],
    ];
    let mut faces = Vec::with_capacity(8);
    for sz in [4usize, 5] {
        for sy in [2usize, 3] {
            for sx in [0usize, 1] {
                let (a, b, c) = (sx, sy, sz);
                let n = cross(sub(vertices[b], vertices[a]), sub(vertices[c], vertices[a]));
                let outward = [vertices[a][0], vertices[b][1], vertices[c][2]];
                if dot(n, outward) > 0.0 {
                    faces.push([a, b, c]);
                } else {
                    faces.push([a, c, b]);
                }
            }
        }
    }
    for _ in 0..level {
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut refined = Vec::with_capacity(faces.len() * 4);
        let mut mid = |a: usize, b: usize, vertices: &mut Vec<[f64; 3]>| -> usize {
            let key = (a.min(b), a.max(b));
            *midpoints.entry(key).or_insert_with(|| {
                let p: [f64; 3] = std::array::from_fn(|i| 0.5 * (vertices[a][i] + vertices[b][i]));
                let r = norm3(p);
                vertices.push(p.map(|x| x / r));
                vertices.len() - 1
            })
        };
        for [a, b, c] in faces {
            let ab = mid(a, b, &mut vertices);
            let bc = mid(b, c, &mut vertices);
            let ca = mid(c, a, &mut vertices);
            refined.push([a, ab, ca]);
            refined.push([ab, b, bc]);
            refined.push([ca, bc, c]);
            refined.push([ab, bc, ca]);
        }
        faces = refined;
    }
    TriangleMesh::new(vertices, faces)
}
