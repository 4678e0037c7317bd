//! Plain-text mesh format.
//!
//! ```text
//! nodes <V> triangles <T>
//! x1 x2 marker              (V lines)
//! i j k region              (T lines, 0-based indices)
//! pairs <P>
//! left right                (P lines)
//! ```

use super::{CellGeometry, Mesh, NodeMarker, Region};
use crate::error::{Error, Result};

pub fn export_mesh(mesh: &Mesh) -> String {
    let mut out = String::new();
    out.push_str(&format!("nodes {} triangles {}\n", mesh.nodes.len(), mesh.triangles.len()));
    for (p, m) in mesh.nodes.iter().zip(&mesh.markers) {
        out.push_str(&format!("{:?} {:?} {}\n", p[0], p[1], m.as_str()));
    }
    for (t, r) in mesh.triangles.iter().zip(&mesh.regions) {
        out.push_str(&format!("{} {} {} {}\n", t[0], t[1], t[2], r.as_str()));
    }
    out.push_str(&format!("pairs {}\n", mesh.periodic_pairs.len()));
    for &(l, r) in &mesh.periodic_pairs {
        out.push_str(&format!("{l} {r}\n"));
    }
    out
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

pub fn import_mesh(text: &str) -> Result<Mesh> {
    let mut lines = text.lines().enumerate();
    let (ln, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 4 || parts[0] != "nodes" || parts[2] != "triangles" {
        return Err(parse_err(ln + 1, "expected header `nodes <V> triangles <T>`"));
    }
    let nv: usize = parts[1].parse().map_err(|_| parse_err(ln + 1, "bad node count"))?;
    let nt: usize = parts[3].parse().map_err(|_| parse_err(ln + 1, "bad triangle count"))?;

    let mut nodes = Vec::with_capacity(nv);
    let mut markers = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, line) = lines.next().ok_or_else(|| parse_err(0, "unexpected end of node list"))?;
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 3 {
            return Err(parse_err(ln + 1, "expected `x1 x2 marker`"));
        }
        let x: f64 = f[0].parse().map_err(|_| parse_err(ln + 1, "bad x1"))?;
        let y: f64 = f[1].parse().map_err(|_| parse_err(ln + 1, "bad x2"))?;
        let m = NodeMarker::parse(f[2]).ok_or_else(|| parse_err(ln + 1, format!("unknown marker `{}`", f[2])))?;
        nodes.push([x, y]);
        markers.push(m);
    }
    let mut triangles = Vec::with_capacity(nt);
    let mut regions = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (ln, line) = lines.next().ok_or_else(|| parse_err(0, "unexpected end of triangle list"))?;
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 4 {
            return Err(parse_err(ln + 1, "expected `i j k region`"));
        }
        let mut idx = [0usize; 3];
        for (k, s) in f[..3].iter().enumerate() {
            idx[k] = s.parse().map_err(|_| parse_err(ln + 1, "bad vertex index"))?;
            if idx[k] >= nv {
                return Err(parse_err(ln + 1, format!("vertex index {} out of range ({nv} nodes)", idx[k])));
            }
        }
        let r = Region::parse(f[3]).ok_or_else(|| parse_err(ln + 1, format!("unknown region `{}`", f[3])))?;
        triangles.push(idx);
        regions.push(r);
    }
    let (ln, pline) = lines.next().ok_or_else(|| parse_err(0, "missing `pairs` section"))?;
    let f: Vec<&str> = pline.split_whitespace().collect();
    if f.len() != 2 || f[0] != "pairs" {
        return Err(parse_err(ln + 1, "expected `pairs <P>`"));
    }
    let np: usize = f[1].parse().map_err(|_| parse_err(ln + 1, "bad pair count"))?;
    let mut periodic_pairs = Vec::with_capacity(np);
    for _ in 0..np {
        let (ln, line) = lines.next().ok_or_else(|| parse_err(0, "unexpected end of pair list"))?;
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 2 {
            return Err(parse_err(ln + 1, "expected `left right`"));
        }
        let l: usize = f[0].parse().map_err(|_| parse_err(ln + 1, "bad left index"))?;
        let r: usize = f[1].parse().map_err(|_| parse_err(ln + 1, "bad right index"))?;
        if l >= nv || r >= nv {
            return Err(parse_err(ln + 1, format!("pair ({l},{r}) out of range ({nv} nodes)")));
        }
        periodic_pairs.push((l, r));
    }

    let geom = infer_geometry(&nodes, &triangles, &regions);
    let mesh = Mesh { geom, nodes, markers, triangles, regions, periodic_pairs };
    mesh.audit_structural()?;
    Ok(mesh)
}

/// The format carries no geometry block; the cell is reconstructed from the
/// extents and the region split (interfaces collapse to the extents when a
/// layer is absent).
fn infer_geometry(nodes: &[[f64; 2]], triangles: &[[usize; 3]], regions: &[Region]) -> CellGeometry {
    let top = nodes.iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max);
    let bottom = nodes.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min);
    let lambda = nodes.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
    let mut h1 = top;
    let mut h2 = bottom;
    for (t, r) in triangles.iter().zip(regions) {
        for &v in t {
            let y = nodes[v][1];
            match r {
                Region::Pml1 => h1 = h1.min(y),
                Region::Pml2 => h2 = h2.max(y),
                Region::Omega => {}
            }
        }
    }
    let dh1 = (top - h1).max(f64::MIN_POSITIVE);
    let dh2 = (h2 - bottom).max(f64::MIN_POSITIVE);
    CellGeometry { lambda, h1, h2, dh1, dh2 }
}
