//! Triangulations of the periodic computational cell.
//!
//! The cell is `[0, Lambda] x [h2 - dh2, h1 + dh1]` minus a cavity hole.
//! Left and right boundary discretizations are exact mirror copies so
//! quasi-periodic node pairing is exact; the interface lines `x2 = h1` and
//! `x2 = h2` are mesh-conforming so the stretching stays smooth within each
//! element.

pub mod delaunay;
mod distmesh;
mod io;

pub use distmesh::{generate_mesh, GeneratorOptions};
pub use io::{export_mesh, import_mesh};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeMarker {
    Interior,
    /// Cavity wall (clamped boundary).
    Cavity,
    /// Periodic seam at x1 = 0.
    Left,
    /// Periodic seam at x1 = Lambda.
    Right,
    /// Outer boundary of the upper layer.
    PmlTop,
    /// Outer boundary of the lower layer.
    PmlBottom,
    /// Witness node on the upper interface line x2 = h1.
    IfaceTop,
    /// Witness node on the lower interface line x2 = h2.
    IfaceBottom,
}

impl NodeMarker {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeMarker::Interior => "interior",
            NodeMarker::Cavity => "cavity",
            NodeMarker::Left => "left",
            NodeMarker::Right => "right",
            NodeMarker::PmlTop => "pml_top",
            NodeMarker::PmlBottom => "pml_bottom",
            NodeMarker::IfaceTop => "iface_top",
            NodeMarker::IfaceBottom => "iface_bottom",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "interior" => NodeMarker::Interior,
            "cavity" => NodeMarker::Cavity,
            "left" => NodeMarker::Left,
            "right" => NodeMarker::Right,
            "pml_top" => NodeMarker::PmlTop,
            "pml_bottom" => NodeMarker::PmlBottom,
            "iface_top" => NodeMarker::IfaceTop,
            "iface_bottom" => NodeMarker::IfaceBottom,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    /// Physical strip between the interfaces.
    Omega,
    /// Upper absorbing layer.
    Pml1,
    /// Lower absorbing layer.
    Pml2,
}

impl Region {
    pub fn as_str(self) -> &'static str {
        match self {
            Region::Omega => "omega",
            Region::Pml1 => "pml1",
            Region::Pml2 => "pml2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "omega" => Region::Omega,
            "pml1" => Region::Pml1,
            "pml2" => Region::Pml2,
            _ => return None,
        })
    }
}

/// Cavity boundary description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CavityShape {
    Circle { radius: f64, center: [f64; 2] },
    /// The kite contour `c + 0.2 (cos t + 0.07 cos 2t - 0.1, 0.3 sin t)`.
    Kite { center: [f64; 2] },
    Polygon { vertices: Vec<[f64; 2]> },
}

impl CavityShape {
    /// Inscribed polygon with chord length at most `chord`.
    pub fn polygon(&self, chord: f64) -> Result<Vec<[f64; 2]>> {
        match self {
            CavityShape::Circle { radius, center } => {
                if *radius <= 0.0 {
                    return Err(Error::Geometry("circle radius must be positive".into()));
                }
                let n = ((2.0 * std::f64::consts::PI * radius / chord).ceil() as usize).max(12);
                Ok((0..n)
                    .map(|i| {
                        let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                        [center[0] + radius * t.cos(), center[1] + radius * t.sin()]
                    })
                    .collect())
            }
            CavityShape::Kite { center } => {
                let param = |t: f64| {
                    [
                        center[0] + 0.2 * (t.cos() + 0.07 * (2.0 * t).cos() - 0.1),
                        center[1] + 0.2 * 0.3 * t.sin(),
                    ]
                };
                // count from the chord rule on a fine perimeter probe
                let probe = 4096;
                let mut per = 0.0;
                let mut prev = param(0.0);
                for i in 1..=probe {
                    let p = param(2.0 * std::f64::consts::PI * i as f64 / probe as f64);
                    per += ((p[0] - prev[0]).powi(2) + (p[1] - prev[1]).powi(2)).sqrt();
                    prev = p;
                }
                let n = ((per / chord).ceil() as usize).max(16);
                Ok((0..n)
                    .map(|i| param(2.0 * std::f64::consts::PI * i as f64 / n as f64))
                    .collect())
            }
            CavityShape::Polygon { vertices } => {
                if vertices.len() < 3 {
                    return Err(Error::Geometry(format!(
                        "cavity polygon needs at least 3 vertices, got {}",
                        vertices.len()
                    )));
                }
                // split long edges so boundary anchors stay dense
                let mut out = Vec::new();
                for i in 0..vertices.len() {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % vertices.len()];
                    let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
                    let k = (len / chord).ceil().max(1.0) as usize;
                    for j in 0..k {
                        let t = j as f64 / k as f64;
                        out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
                    }
                }
                Ok(out)
            }
        }
    }
}

/// Cell geometry of the computational domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellGeometry {
    pub lambda: f64,
    pub h1: f64,
    pub h2: f64,
    pub dh1: f64,
    pub dh2: f64,
}

impl CellGeometry {
    pub fn top(&self) -> f64 {
        self.h1 + self.dh1
    }
    pub fn bottom(&self) -> f64 {
        self.h2 - self.dh2
    }
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub geom: CellGeometry,
    pub nodes: Vec<[f64; 2]>,
    pub markers: Vec<NodeMarker>,
    /// CCW vertex triples.
    pub triangles: Vec<[usize; 3]>,
    pub regions: Vec<Region>,
    /// (left node, right node) with x2 agreement.
    pub periodic_pairs: Vec<(usize, usize)>,
}

/// Interior edge with its two adjacent triangles; the jump normal points
/// from `tri_lo` (lower index) into `tri_hi`.
#[derive(Debug, Clone, Copy)]
pub struct InteriorEdge {
    pub a: usize,
    pub b: usize,
    pub tri_lo: usize,
    pub tri_hi: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct BoundaryEdge {
    pub a: usize,
    pub b: usize,
    pub tri: usize,
}

#[derive(Debug, Clone)]
pub struct EdgeSets {
    pub interior: Vec<InteriorEdge>,
    pub boundary: Vec<BoundaryEdge>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MeshQuality {
    pub min_angle_deg: f64,
    pub max_aspect: f64,
    pub h_min: f64,
    pub h_max: f64,
}

pub fn triangle_area(p: [f64; 2], q: [f64; 2], r: [f64; 2]) -> f64 {
    0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]))
}

impl Mesh {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn tri_corners(&self, t: usize) -> [[f64; 2]; 3] {
        let [a, b, c] = self.triangles[t];
        [self.nodes[a], self.nodes[b], self.nodes[c]]
    }

    pub fn tri_area(&self, t: usize) -> f64 {
        let [p, q, r] = self.tri_corners(t);
        triangle_area(p, q, r)
    }

    /// Classifies every mesh edge as interior (two adjacent triangles) or
    /// boundary (one). Three or more adjacencies is a topology error.
    pub fn classify_edges(&self) -> Result<EdgeSets> {
        let mut map: std::collections::BTreeMap<(usize, usize), Vec<usize>> =
            std::collections::BTreeMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            for (a, b) in [(tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])] {
                map.entry((a.min(b), a.max(b))).or_default().push(t);
            }
        }
        let mut interior = Vec::new();
        let mut boundary = Vec::new();
        for ((a, b), ts) in map {
            match ts.len() {
                1 => boundary.push(BoundaryEdge { a, b, tri: ts[0] }),
                2 => {
                    let (lo, hi) = (ts[0].min(ts[1]), ts[0].max(ts[1]));
                    interior.push(InteriorEdge { a, b, tri_lo: lo, tri_hi: hi });
                }
                n => return Err(Error::NonManifoldEdge { a, b, count: n }),
            }
        }
        Ok(EdgeSets { interior, boundary })
    }

    pub fn quality(&self) -> MeshQuality {
        let mut min_angle = f64::INFINITY;
        let mut max_aspect = 0.0f64;
        let mut h_min = f64::INFINITY;
        let mut h_max = 0.0f64;
        for t in 0..self.triangles.len() {
            let [p, q, r] = self.tri_corners(t);
            let e = [
                ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt(),
                ((r[0] - q[0]).powi(2) + (r[1] - q[1]).powi(2)).sqrt(),
                ((p[0] - r[0]).powi(2) + (p[1] - r[1]).powi(2)).sqrt(),
            ];
            let lmax = e[0].max(e[1]).max(e[2]);
            let lmin = e[0].min(e[1]).min(e[2]);
            h_min = h_min.min(lmin);
            h_max = h_max.max(lmax);
            max_aspect = max_aspect.max(lmax / lmin);
            for i in 0..3 {
                // angle between edges e[i] and e[(i+2)%3], opposite e[(i+1)%3]
                let (a, b, c) = (e[i], e[(i + 1) % 3], e[(i + 2) % 3]);
                let cosv = ((a * a + c * c - b * b) / (2.0 * a * c)).clamp(-1.0, 1.0);
                min_angle = min_angle.min(cosv.acos().to_degrees());
            }
        }
        MeshQuality { min_angle_deg: min_angle, max_aspect, h_min, h_max }
    }

    /// `V - E + F`; zero for the cell with a single cavity hole.
    pub fn euler_characteristic(&self) -> Result<i64> {
        let edges = self.classify_edges()?;
        Ok(self.node_count() as i64 - (edges.interior.len() + edges.boundary.len()) as i64
            + self.triangles.len() as i64)
    }

    /// Structural invariants every mesh must satisfy, generated or imported.
    pub fn audit_structural(&self) -> Result<()> {
        let mut problems = Vec::new();
        for (i, tri) in self.triangles.iter().enumerate() {
            for &v in tri {
                if v >= self.nodes.len() {
                    return Err(Error::MeshInvariant(format!(
                        "triangle {i} references node {v} of {}",
                        self.nodes.len()
                    )));
                }
            }
        }
        for t in 0..self.triangles.len() {
            let area = self.tri_area(t);
            if area <= 0.0 {
                problems.push(format!("triangle {t} has non-positive area {area:.3e}"));
            }
        }
        self.classify_edges()?;
        // periodic pairing is a bijection between the seam columns
        let left = self.nodes.iter().filter(|p| p[0] == 0.0).count();
        let right = self.nodes.iter().filter(|p| p[0] == self.geom.lambda).count();
        if self.periodic_pairs.len() != left || self.periodic_pairs.len() != right {
            problems.push(format!(
                "pairing is not a bijection: {} pairs, {left} left nodes, {right} right nodes",
                self.periodic_pairs.len(),
            ));
        }
        let mut seen_l = std::collections::BTreeSet::new();
        let mut seen_r = std::collections::BTreeSet::new();
        for &(l, r) in &self.periodic_pairs {
            if l >= self.nodes.len() || r >= self.nodes.len() {
                problems.push(format!("pair ({l},{r}) out of range"));
                continue;
            }
            if self.nodes[l][0] != 0.0 || self.nodes[r][0] != self.geom.lambda {
                problems.push(format!("pair ({l},{r}) not on the seam columns"));
            }
            if (self.nodes[l][1] - self.nodes[r][1]).abs() > 1e-12 {
                problems.push(format!(
                    "pair ({l},{r}) x2 mismatch: {} vs {}",
                    self.nodes[l][1], self.nodes[r][1]
                ));
            }
            if !seen_l.insert(l) || !seen_r.insert(r) {
                problems.push(format!("node repeated in pairing: ({l},{r})"));
            }
        }
        // regions must respect the interface lines
        for (t, tri) in self.triangles.iter().enumerate() {
            let ys = tri.map(|v| self.nodes[v][1]);
            for line in [self.geom.h1, self.geom.h2] {
                let above = ys.iter().any(|&y| y > line + 1e-12);
                let below = ys.iter().any(|&y| y < line - 1e-12);
                if above && below {
                    problems.push(format!("triangle {t} straddles the line x2 = {line}"));
                }
            }
            let cy = (ys[0] + ys[1] + ys[2]) / 3.0;
            let want = if cy > self.geom.h1 {
                Region::Pml1
            } else if cy < self.geom.h2 {
                Region::Pml2
            } else {
                Region::Omega
            };
            if self.regions[t] != want {
                problems.push(format!("triangle {t} marked {:?}, expected {want:?}", self.regions[t]));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            problems.truncate(20);
            Err(Error::MeshInvariant(problems.join("; ")))
        }
    }
}
