//! Plain-text mesh format.
//!
//! ```text
//! mesh v1
//! shape <sphere | ellipsoid a b c | cube side>
//! truncation_radius <R>
//! vertices <N>
//! <x> <y> <z>                      (N lines, 17 significant digits)
//! cells <M>
//! <v0> <v1> <v2> <v3> <tag>        (M lines, tag 0 = interior, 1 = exterior)
//! interface_faces <K>
//! <v0> <v1> <v2> <inner> <outer>   (K lines)
//! outer_faces <J>
//! <v0> <v1> <v2> <inner>           (J lines)
//! ```
//!
//! Face lists are redundant with the cells; they are checked on import.

use std::io::{BufRead, Write};

use super::shape::fmt17;
use super::{Face, Mesh, Region, UnitShape};
use crate::error::{Error, Result};

pub fn write_mesh<W: Write>(mesh: &Mesh, mut w: W) -> Result<()> {
    writeln!(w, "mesh v1")?;
    writeln!(w, "shape {}", mesh.shape.describe())?;
    writeln!(w, "truncation_radius {}", fmt17(mesh.truncation_radius))?;
    writeln!(w, "vertices {}", mesh.vertices.len())?;
    for v in &mesh.vertices {
        writeln!(w, "{} {} {}", fmt17(v[0]), fmt17(v[1]), fmt17(v[2]))?;
    }
    writeln!(w, "cells {}", mesh.cells.len())?;
    for (c, r) in mesh.cells.iter().zip(&mesh.regions) {
        let tag = if *r == Region::Interior { 0 } else { 1 };
        writeln!(w, "{} {} {} {} {tag}", c[0], c[1], c[2], c[3])?;
    }
    writeln!(w, "interface_faces {}", mesh.interface_faces.len())?;
    for f in &mesh.interface_faces {
        writeln!(w, "{} {} {} {} {}", f.verts[0], f.verts[1], f.verts[2], f.inner, f.outer.unwrap_or(usize::MAX))?;
    }
    writeln!(w, "outer_faces {}", mesh.outer_faces.len())?;
    for f in &mesh.outer_faces {
        writeln!(w, "{} {} {} {}", f.verts[0], f.verts[1], f.verts[2], f.inner)?;
    }
    Ok(())
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    fn next(&mut self) -> Result<String> {
        loop {
            self.line += 1;
            match self.inner.next() {
                None => return Err(self.err("unexpected end of file")),
                Some(l) => {
                    let l = l?;
                    let t = l.trim();
                    if !t.is_empty() {
                        return Ok(t.to_string());
                    }
                }
            }
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse { line: self.line, msg: msg.into() }
    }

    fn keyed(&mut self, key: &str) -> Result<String> {
        let l = self.next()?;
        match l.strip_prefix(key) {
            Some(rest) if rest.starts_with(' ') => Ok(rest.trim().to_string()),
            _ => Err(self.err(format!("expected '{key} ...', found '{l}'"))),
        }
    }

    fn count(&mut self, key: &str) -> Result<usize> {
        let v = self.keyed(key)?;
        v.parse().map_err(|_| self.err(format!("bad count '{v}'")))
    }

    fn numbers<T: std::str::FromStr>(&mut self, n: usize) -> Result<Vec<T>> {
        let l = self.next()?;
        let v: Vec<T> = l
            .split_whitespace()
            .map(|t| t.parse::<T>().map_err(|_| self.err(format!("bad number '{t}'"))))
            .collect::<Result<_>>()?;
        if v.len() != n {
            return Err(self.err(format!("expected {n} fields, found {}", v.len())));
        }
        Ok(v)
    }
}

pub fn read_mesh<R: BufRead>(r: R) -> Result<Mesh> {
    let mut lines = Lines { inner: r.lines(), line: 0 };
    let header = lines.next()?;
    if header != "mesh v1" {
        return Err(lines.err(format!("expected header 'mesh v1', found '{header}'")));
    }
    let shape_text = lines.keyed("shape")?;
    let shape = UnitShape::parse(&shape_text).map_err(|e| lines.err(e.to_string()))?;
    let radius_text = lines.keyed("truncation_radius")?;
    let truncation_radius: f64 = radius_text.parse().map_err(|_| lines.err("bad truncation radius"))?;

    let nv = lines.count("vertices")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let v = lines.numbers::<f64>(3)?;
        vertices.push([v[0], v[1], v[2]]);
    }
    let nc = lines.count("cells")?;
    let mut cells = Vec::with_capacity(nc);
    let mut regions = Vec::with_capacity(nc);
    for _ in 0..nc {
        let v = lines.numbers::<usize>(5)?;
        cells.push([v[0], v[1], v[2], v[3]]);
        regions.push(match v[4] {
            0 => Region::Interior,
            1 => Region::Exterior,
            t => return Err(lines.err(format!("unknown region tag {t}"))),
        });
    }
    let nif = lines.count("interface_faces")?;
    let mut iface = Vec::with_capacity(nif);
    for _ in 0..nif {
        let v = lines.numbers::<usize>(5)?;
        iface.push(([v[0], v[1], v[2]], v[3], Some(v[4])));
    }
    let nof = lines.count("outer_faces")?;
    let mut outer = Vec::with_capacity(nof);
    for _ in 0..nof {
        let v = lines.numbers::<usize>(4)?;
        outer.push(([v[0], v[1], v[2]], v[3], None));
    }

    let mesh = Mesh::from_parts(shape, truncation_radius, vertices, cells, regions)?;
    let same = |derived: &[Face], listed: &[([usize; 3], usize, Option<usize>)]| {
        derived.len() == listed.len()
            && derived.iter().zip(listed).all(|(f, (v, i, o))| f.verts == *v && f.inner == *i && f.outer == *o)
    };
    if !same(&mesh.interface_faces, &iface) {
        return Err(Error::MeshFormat("interface face list does not match the cells".into()));
    }
    if !same(&mesh.outer_faces, &outer) {
        return Err(Error::MeshFormat("outer face list does not match the cells".into()));
    }
    Ok(mesh)
}
