//! Tetrahedral meshes of the unit object and a truncated exterior ball.

mod generate;
mod io;
mod quality;
mod shape;

use std::collections::HashMap;

pub use generate::{generate_mesh, generate_mesh_with, BoundaryLayer, MeshOptions, DEFAULT_RESOLUTION, DEFAULT_TRUNCATION_RADIUS};
pub use io::{read_mesh, write_mesh};
pub use quality::{mesh_quality, tet_dihedral_angles, MeshQuality};
pub use shape::UnitShape;

use crate::error::{Error, Result};
use crate::tensor::{self, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    Interior,
    Exterior,
}

/// Local vertex pairs of the six tetrahedron edges. Cells store their
/// vertices in ascending global order, so every local edge runs from the
/// lower to the higher global index and agrees with the global orientation.
pub const LOCAL_EDGES: [[usize; 2]; 6] = [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]];

/// A triangular face with a unit normal and the cells on either side.
#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    pub verts: [usize; 3],
    pub normal: Vec3,
    pub area: f64,
    /// Cell the normal points away from.
    pub inner: usize,
    /// Cell the normal points into; `None` on the truncation boundary.
    pub outer: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub shape: UnitShape,
    pub truncation_radius: f64,
    pub vertices: Vec<Vec3>,
    /// Vertex quadruples in ascending order.
    pub cells: Vec<[usize; 4]>,
    pub regions: Vec<Region>,
    pub edges: Vec<[usize; 2]>,
    pub cell_edges: Vec<[usize; 6]>,
    /// Faces on Γ, normals pointing from B into its complement.
    pub interface_faces: Vec<Face>,
    /// Faces on the truncation sphere, normals pointing outwards.
    pub outer_faces: Vec<Face>,
}

impl Mesh {
    /// Builds edge numbering and face topology from raw cells.
    pub fn from_parts(
        shape: UnitShape,
        truncation_radius: f64,
        vertices: Vec<Vec3>,
        cells: Vec<[usize; 4]>,
        regions: Vec<Region>,
    ) -> Result<Mesh> {
        if cells.len() != regions.len() {
            return Err(Error::MeshFormat(format!(
                "{} cells but {} region tags",
                cells.len(),
                regions.len()
            )));
        }
        let nv = vertices.len();
        let mut sorted = Vec::with_capacity(cells.len());
        for c in &cells {
            let mut c = *c;
            c.sort_unstable();
            if c[3] >= nv {
                return Err(Error::MeshFormat(format!("cell references vertex {} of {nv}", c[3])));
            }
            if c[0] == c[1] || c[1] == c[2] || c[2] == c[3] {
                return Err(Error::MeshFormat(format!("degenerate cell {c:?}")));
            }
            sorted.push(c);
        }

        let mut edge_index: HashMap<[usize; 2], usize> = HashMap::with_capacity(sorted.len() * 2);
        let mut edges = Vec::new();
        let mut cell_edges = Vec::with_capacity(sorted.len());
        for c in &sorted {
            let mut ce = [0usize; 6];
            for (l, [a, b]) in LOCAL_EDGES.iter().enumerate() {
                let key = [c[*a], c[*b]];
                ce[l] = *edge_index.entry(key).or_insert_with(|| {
                    edges.push(key);
                    edges.len() - 1
                });
            }
            cell_edges.push(ce);
        }

        // face -> (first cell, opposite vertex, second cell)
        let mut faces: HashMap<[usize; 3], (usize, usize, Option<usize>)> = HashMap::with_capacity(sorted.len() * 2);
        for (ci, c) in sorted.iter().enumerate() {
            for skip in 0..4 {
                let mut f = [0usize; 3];
                let mut m = 0;
                for (j, v) in c.iter().enumerate() {
                    if j != skip {
                        f[m] = *v;
                        m += 1;
                    }
                }
                match faces.get_mut(&f) {
                    None => {
                        faces.insert(f, (ci, c[skip], None));
                    }
                    Some(entry) => {
                        if entry.2.is_some() {
                            return Err(Error::MeshFormat(format!("face {f:?} shared by more than two cells")));
                        }
                        entry.2 = Some(ci);
                    }
                }
            }
        }

        let mut interface_faces = Vec::new();
        let mut outer_faces = Vec::new();
        let mut keys: Vec<_> = faces.into_iter().collect();
        keys.sort_unstable_by_key(|(f, _)| *f);
        for (f, (c0, opp0, c1)) in keys {
            match c1 {
                None => {
                    let (normal, area) = oriented_normal(&vertices, &f, opp0);
                    outer_faces.push(Face { verts: f, normal, area, inner: c0, outer: None });
                }
                Some(c1) if regions[c0] != regions[c1] => {
                    let (inner, outer) = if regions[c0] == Region::Interior { (c0, c1) } else { (c1, c0) };
                    let opp = sorted[inner].iter().copied().find(|v| !f.contains(v)).unwrap();
                    let (normal, area) = oriented_normal(&vertices, &f, opp);
                    interface_faces.push(Face { verts: f, normal, area, inner, outer: Some(outer) });
                }
                Some(_) => {}
            }
        }

        Ok(Mesh {
            shape,
            truncation_radius,
            vertices,
            cells: sorted,
            regions,
            edges,
            cell_edges,
            interface_faces,
            outer_faces,
        })
    }

    pub fn num_interior_cells(&self) -> usize {
        self.regions.iter().filter(|r| **r == Region::Interior).count()
    }

    pub fn cell_vertices(&self, c: usize) -> [Vec3; 4] {
        let v = &self.cells[c];
        [self.vertices[v[0]], self.vertices[v[1]], self.vertices[v[2]], self.vertices[v[3]]]
    }

    pub fn cell_volume(&self, c: usize) -> f64 {
        let p = self.cell_vertices(c);
        tet_volume(&p)
    }

    pub fn cell_centroid(&self, c: usize) -> Vec3 {
        let p = self.cell_vertices(c);
        let mut m = [0.0; 3];
        for q in &p {
            for j in 0..3 {
                m[j] += 0.25 * q[j];
            }
        }
        m
    }

    pub fn interior_volume(&self) -> f64 {
        (0..self.cells.len())
            .filter(|&c| self.regions[c] == Region::Interior)
            .map(|c| self.cell_volume(c))
            .sum()
    }

    pub fn interface_area(&self) -> f64 {
        self.interface_faces.iter().map(|f| f.area).sum()
    }

    /// `|∮_Γ n dS|` divided by the interface area; zero for a closed surface.
    pub fn divergence_defect(&self) -> f64 {
        let mut s = [0.0; 3];
        for f in &self.interface_faces {
            for j in 0..3 {
                s[j] += f.normal[j] * f.area;
            }
        }
        tensor::norm(&s) / self.interface_area()
    }

    /// Edges lying on the truncation sphere.
    pub fn boundary_edges(&self) -> Vec<bool> {
        let mut lookup: HashMap<[usize; 2], usize> = HashMap::with_capacity(self.edges.len());
        for (i, e) in self.edges.iter().enumerate() {
            lookup.insert(*e, i);
        }
        let mut on = vec![false; self.edges.len()];
        for f in &self.outer_faces {
            for [a, b] in [[0, 1], [0, 2], [1, 2]] {
                on[lookup[&[f.verts[a], f.verts[b]]]] = true;
            }
        }
        on
    }

    /// Vertices lying on the truncation sphere.
    pub fn boundary_vertices(&self) -> Vec<bool> {
        let mut on = vec![false; self.vertices.len()];
        for f in &self.outer_faces {
            for v in f.verts {
                on[v] = true;
            }
        }
        on
    }
}

pub(crate) fn tet_volume(p: &[Vec3; 4]) -> f64 {
    let a = tensor::sub(&p[1], &p[0]);
    let b = tensor::sub(&p[2], &p[0]);
    let c = tensor::sub(&p[3], &p[0]);
    tensor::dot(&a, &tensor::cross(&b, &c)).abs() / 6.0
}

fn oriented_normal(vertices: &[Vec3], f: &[usize; 3], opposite: usize) -> (Vec3, f64) {
    let a = vertices[f[0]];
    let n = tensor::cross(&tensor::sub(&vertices[f[1]], &a), &tensor::sub(&vertices[f[2]], &a));
    let len = tensor::norm(&n);
    let mut n = tensor::scale(&n, 1.0 / len);
    if tensor::dot(&n, &tensor::sub(&vertices[opposite], &a)) > 0.0 {
        n = tensor::scale(&n, -1.0);
    }
    (n, 0.5 * len)
}
