use super::{Mesh, Region, LOCAL_EDGES};
use crate::error::{Error, Result};
use crate::tensor::{self, Vec3};

#[derive(Debug, Clone, PartialEq)]
pub struct MeshQuality {
    pub min_dihedral_deg: f64,
    pub max_dihedral_deg: f64,
    /// Longest edge over `2√6 ×` inradius; 1 for a regular tetrahedron.
    pub max_aspect_ratio: f64,
    pub num_vertices: usize,
    pub num_edges: usize,
    pub num_cells: usize,
    pub num_interior_cells: usize,
    pub num_exterior_cells: usize,
    pub num_interface_faces: usize,
    pub num_outer_faces: usize,
}

pub fn mesh_quality(mesh: &Mesh) -> Result<MeshQuality> {
    if mesh.cells.is_empty() {
        return Err(Error::MeshQuality("mesh has no cells".into()));
    }
    let mut min_d = f64::INFINITY;
    let mut max_d: f64 = 0.0;
    let mut max_ar: f64 = 0.0;
    for c in 0..mesh.cells.len() {
        let p = mesh.cell_vertices(c);
        for a in tet_dihedral_angles(&p) {
            min_d = min_d.min(a);
            max_d = max_d.max(a);
        }
        max_ar = max_ar.max(aspect_ratio(&p));
    }
    let interior = mesh.regions.iter().filter(|r| **r == Region::Interior).count();
    Ok(MeshQuality {
        min_dihedral_deg: min_d,
        max_dihedral_deg: max_d,
        max_aspect_ratio: max_ar,
        num_vertices: mesh.vertices.len(),
        num_edges: mesh.edges.len(),
        num_cells: mesh.cells.len(),
        num_interior_cells: interior,
        num_exterior_cells: mesh.cells.len() - interior,
        num_interface_faces: mesh.interface_faces.len(),
        num_outer_faces: mesh.outer_faces.len(),
    })
}

/// The six dihedral angles of a tetrahedron in degrees, in [`LOCAL_EDGES`] order.
pub fn tet_dihedral_angles(p: &[Vec3; 4]) -> [f64; 6] {
    // Outward normal of the face opposite each vertex.
    let normal = |skip: usize| {
        let f: Vec<usize> = (0..4).filter(|&j| j != skip).collect();
        let n = tensor::cross(&tensor::sub(&p[f[1]], &p[f[0]]), &tensor::sub(&p[f[2]], &p[f[0]]));
        let n = tensor::scale(&n, 1.0 / tensor::norm(&n));
        if tensor::dot(&n, &tensor::sub(&p[skip], &p[f[0]])) > 0.0 {
            tensor::scale(&n, -1.0)
        } else {
            n
        }
    };
    let normals = [normal(0), normal(1), normal(2), normal(3)];
    let mut out = [0.0; 6];
    for (l, [a, b]) in LOCAL_EDGES.iter().enumerate() {
        // the edge (a, b) is shared by the faces opposite the other two vertices
        let others: Vec<usize> = (0..4).filter(|j| j != a && j != b).collect();
        let cos = -tensor::dot(&normals[others[0]], &normals[others[1]]);
        out[l] = cos.clamp(-1.0, 1.0).acos().to_degrees();
    }
    out
}

fn aspect_ratio(p: &[Vec3; 4]) -> f64 {
    let vol = super::tet_volume(p);
    let mut area = 0.0;
    for skip in 0..4 {
        let f: Vec<usize> = (0..4).filter(|&j| j != skip).collect();
        let n = tensor::cross(&tensor::sub(&p[f[1]], &p[f[0]]), &tensor::sub(&p[f[2]], &p[f[0]]));
        area += 0.5 * tensor::norm(&n);
    }
    let inradius = 3.0 * vol / area;
    let longest = LOCAL_EDGES
        .iter()
        .map(|[a, b]| tensor::norm(&tensor::sub(&p[*a], &p[*b])))
        .fold(0.0, f64::max);
    longest / (2.0 * 6f64.sqrt() * inradius)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regular_tetrahedron() {
        let p = [[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]];
        let expect = (1.0f64 / 3.0).acos().to_degrees();
        for a in tet_dihedral_angles(&p) {
            assert!((a - expect).abs() < 1e-12);
        }
        assert!((aspect_ratio(&p) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn corner_tetrahedron_has_right_angles() {
        let p = [[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let a = tet_dihedral_angles(&p);
        // edges along the axes meet at right angles
        assert!((a[0] - 90.0).abs() < 1e-12);
        assert!((a[1] - 90.0).abs() < 1e-12);
        assert!((a[2] - 90.0).abs() < 1e-12);
    }
}
