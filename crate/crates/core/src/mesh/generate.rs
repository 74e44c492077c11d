use std::collections::HashMap;
use std::f64::consts::PI;

use super::{quality, Mesh, Region, UnitShape};
use crate::error::{Error, Result};
use crate::tensor::{self, Vec3};

/// Truncation radius of the default mesh, in units of the object size. The
/// strong `θ_T = 0` condition there perturbs a dipole moment by roughly
/// `−2/R³` relative (image dipole), i.e. 0.2 % at this radius.
pub const DEFAULT_TRUNCATION_RADIUS: f64 = 10.0;
/// Target edge length on Γ of the default mesh.
pub const DEFAULT_RESOLUTION: f64 = 0.2;
/// Skin depths above this fraction of the object size need no layers.
const SKIN_LAYER_THRESHOLD: f64 = 0.5;

/// Radial fraction of the shape occupied by the central cone layer.
const CORE_FRACTION: f64 = 0.25;
const MIN_INTERIOR_CELLS: usize = 100;
const MIN_DIHEDRAL_DEG: f64 = 10.0;
const MAX_DIHEDRAL_DEG: f64 = 170.0;

/// Thin layers stacked just inside Γ to resolve a skin depth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryLayer {
    /// Thickness of the layer touching Γ, as a fraction of the local radius.
    pub first: f64,
    /// Thickness ratio between consecutive layers, > 1.
    pub growth: f64,
}

impl BoundaryLayer {
    /// Layers sized for a field decaying like `exp(−d/δ)` below Γ.
    pub fn for_skin_depth(delta: f64) -> Self {
        BoundaryLayer { first: delta / 4.0, growth: 1.3 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeshOptions {
    pub truncation_radius: f64,
    /// Target edge length on Γ.
    pub resolution: f64,
    pub boundary_layer: Option<BoundaryLayer>,
    /// Rescale the faceted Γ so the interior volume equals the exact volume.
    pub match_volume: bool,
}

impl MeshOptions {
    pub fn new(truncation_radius: f64, resolution: f64) -> Self {
        MeshOptions { truncation_radius, resolution, boundary_layer: None, match_volume: true }
    }

    /// The default desk-scale mesh (about 10⁵ edges for the sphere): default
    /// radius and resolution, plus boundary layers when `skin_depth` (in units
    /// of the object size) is small enough to need them.
    pub fn desk_scale(skin_depth: Option<f64>) -> Self {
        let opts = MeshOptions::new(DEFAULT_TRUNCATION_RADIUS, DEFAULT_RESOLUTION);
        match skin_depth {
            Some(d) if d > 0.0 && d < SKIN_LAYER_THRESHOLD => opts.with_boundary_layer(BoundaryLayer::for_skin_depth(d)),
            _ => opts,
        }
    }

    pub fn with_boundary_layer(mut self, layer: BoundaryLayer) -> Self {
        self.boundary_layer = Some(layer);
        self
    }
}

pub fn generate_mesh(shape: UnitShape, truncation_radius: f64, resolution: f64) -> Result<Mesh> {
    generate_mesh_with(shape, &MeshOptions::new(truncation_radius, resolution))
}

/// Layered mesh: a cubed-sphere triangulation of directions is swept radially
/// through shells that follow Γ inside and blend into the truncation sphere
/// outside; each prism between shells is cut into three tetrahedra.
pub fn generate_mesh_with(shape: UnitShape, opts: &MeshOptions) -> Result<Mesh> {
    shape.validate()?;
    let r_trunc = opts.truncation_radius;
    if !(r_trunc >= 3.0) || !r_trunc.is_finite() {
        return Err(Error::domain(format!("truncation radius must be at least 3, got {r_trunc}")));
    }
    if !(opts.resolution > 0.0) || !opts.resolution.is_finite() {
        return Err(Error::domain(format!("resolution must be positive, got {}", opts.resolution)));
    }
    if let Some(bl) = opts.boundary_layer {
        if !(bl.first > 0.0 && bl.growth > 1.0) {
            return Err(Error::domain("boundary layer needs first > 0 and growth > 1"));
        }
    }

    let n = ((PI / 2.0) / opts.resolution).ceil().max(1.0) as usize;
    let (dirs, tris) = cubed_sphere(n);
    let h = (PI / 2.0) / n as f64;

    let mut extent: Vec<f64> = dirs.iter().map(|d| shape.radial_extent(d)).collect();
    if opts.match_volume && !shape.is_polyhedral() {
        let poly: f64 = tris
            .iter()
            .map(|t| {
                let p = t.map(|i| tensor::scale(&dirs[i], extent[i]));
                tensor::dot(&p[0], &tensor::cross(&p[1], &p[2])).abs() / 6.0
            })
            .sum();
        let c = (shape.volume() / poly).cbrt();
        extent.iter_mut().for_each(|e| *e *= c);
    }

    let (radii, n_inner) = layer_radii(h, r_trunc, opts.boundary_layer);
    let ns = dirs.len();
    let mut vertices = Vec::with_capacity(1 + ns * radii.len());
    vertices.push([0.0; 3]);
    for &s in &radii {
        for (d, e) in dirs.iter().zip(&extent) {
            let rho = if s <= 1.0 {
                s * e
            } else {
                let lam = (s - 1.0) / (r_trunc - 1.0);
                s * (e + lam * (1.0 - e))
            };
            vertices.push(tensor::scale(d, rho));
        }
    }
    let layer = |j: usize, i: usize| 1 + j * ns + i;

    let mut cells = Vec::with_capacity(tris.len() * (1 + 3 * radii.len()));
    let mut regions = Vec::with_capacity(cells.capacity());
    for t in &tris {
        cells.push([0, layer(0, t[0]), layer(0, t[1]), layer(0, t[2])]);
        regions.push(Region::Interior);
    }
    for j in 0..radii.len() - 1 {
        let region = if j < n_inner { Region::Interior } else { Region::Exterior };
        for t in &tris {
            let bottom = t.map(|i| layer(j, i));
            let top = t.map(|i| layer(j + 1, i));
            for tet in split_prism(bottom, top) {
                cells.push(tet);
                regions.push(region);
            }
        }
    }

    let mesh = Mesh::from_parts(shape, r_trunc, vertices, cells, regions)?;
    let interior = mesh.num_interior_cells();
    if interior < MIN_INTERIOR_CELLS {
        return Err(Error::MeshQuality(format!(
            "resolution {} yields only {interior} interior cells (need {MIN_INTERIOR_CELLS})",
            opts.resolution
        )));
    }
    let q = quality::mesh_quality(&mesh)?;
    if opts.boundary_layer.is_none() && q.min_dihedral_deg <= MIN_DIHEDRAL_DEG {
        return Err(Error::MeshQuality(format!("min dihedral angle {:.2}° too small", q.min_dihedral_deg)));
    }
    if q.max_dihedral_deg >= MAX_DIHEDRAL_DEG {
        return Err(Error::MeshQuality(format!("max dihedral angle {:.2}° too large", q.max_dihedral_deg)));
    }
    Ok(mesh)
}

/// Equiangular cubed-sphere triangulation with `n × n` quads per cube face.
fn cubed_sphere(n: usize) -> (Vec<Vec3>, Vec<[usize; 3]>) {
    let ni = n as i64;
    let mut index: HashMap<[i64; 3], usize> = HashMap::new();
    let mut dirs = Vec::new();
    let mut tris = Vec::new();
    let mut id = |c: [i64; 3], dirs: &mut Vec<Vec3>| -> usize {
        *index.entry(c).or_insert_with(|| {
            let t = c.map(|x| (PI / 4.0 * x as f64 / ni as f64).tan());
            let len = tensor::norm(&t);
            dirs.push(tensor::scale(&t, 1.0 / len));
            dirs.len() - 1
        })
    };
    for axis in 0..3 {
        for sign in [-1i64, 1] {
            let (b, c) = ((axis + 1) % 3, (axis + 2) % 3);
            let point = |p: i64, q: i64| {
                let mut v = [0i64; 3];
                v[axis] = sign * ni;
                v[b] = p;
                v[c] = q;
                v
            };
            // integer coordinates run over -n, -n+2, ..., n
            for p in (0..ni).map(|p| 2 * p - ni) {
                for q in (0..ni).map(|q| 2 * q - ni) {
                    let v00 = id(point(p, q), &mut dirs);
                    let v10 = id(point(p + 2, q), &mut dirs);
                    let v11 = id(point(p + 2, q + 2), &mut dirs);
                    let v01 = id(point(p, q + 2), &mut dirs);
                    // Alternate diagonals so the pattern is symmetric under
                    // reflections through the face centre.
                    if (p + 1 < 0) == (q + 1 < 0) {
                        tris.push([v00, v10, v11]);
                        tris.push([v00, v11, v01]);
                    } else {
                        tris.push([v00, v10, v01]);
                        tris.push([v10, v11, v01]);
                    }
                }
            }
        }
    }
    (dirs, tris)
}

/// Normalised radii of the vertex shells (Γ at 1, truncation sphere at
/// `r_trunc`) and the number of prism layers inside Γ.
fn layer_radii(h: f64, r_trunc: f64, bl: Option<BoundaryLayer>) -> (Vec<f64>, usize) {
    let mut inner = vec![1.0];
    let mut s = 1.0;
    let mut t = bl.map(|b| b.first);
    loop {
        let bulk = s * (1.0 - (-h).exp());
        let step = match t {
            Some(tb) if tb < bulk => {
                t = Some(tb * bl.unwrap().growth);
                tb
            }
            _ => bulk,
        };
        let next = s - step;
        if next < CORE_FRACTION * (1.0 + 0.5 * h) {
            break;
        }
        inner.push(next);
        s = next;
    }
    inner.push(CORE_FRACTION);
    inner.reverse();
    let n_inner = inner.len() - 1;

    let mut radii = inner;
    let mut s = 1.0;
    loop {
        let next = s * h.exp();
        if next > r_trunc / (1.0 + 0.5 * h) {
            break;
        }
        radii.push(next);
        s = next;
    }
    radii.push(r_trunc);
    (radii, n_inner)
}

/// Splits the prism `bottom × top` into three tetrahedra, choosing each
/// quadrilateral diagonal from its smallest global vertex index so that
/// neighbouring prisms agree on shared faces.
fn split_prism(bottom: [usize; 3], top: [usize; 3]) -> [[usize; 4]; 3] {
    let all = [bottom[0], bottom[1], bottom[2], top[0], top[1], top[2]];
    let m = (0..6).min_by_key(|&i| all[i]).unwrap();
    let (lo, hi) = if m < 3 { (bottom, top) } else { (top, bottom) };
    let r = m % 3;
    let (a0, b0, c0) = (lo[r], lo[(r + 1) % 3], lo[(r + 2) % 3]);
    let (a1, b1, c1) = (hi[r], hi[(r + 1) % 3], hi[(r + 2) % 3]);
    let first = [a0, a1, b1, c1];
    let quad_min = b0.min(c0).min(b1).min(c1);
    if quad_min == b0 || quad_min == c1 {
        [first, [a0, b0, c1, b1], [a0, b0, c0, c1]]
    } else {
        [first, [a0, b0, c0, b1], [a0, c0, c1, b1]]
    }
}
