//! Force-equilibrium mesh generator on a signed distance field.
//!
//! Anchor nodes are pre-placed on the seam columns (mirrored, so periodic
//! pairing is exact), on the outer boundaries, on the interface lines, and on
//! the cavity polygon. Free points start on a jittered hex lattice plus a
//! graded collar around the cavity and relax under edge repulsion over
//! repeated Delaunay retriangulations; a local size field matched to the
//! cavity anchor spacing keeps the wall layer well shaped even when the
//! contour sampling is uneven. A final quality loop removes free vertices of
//! any remaining sliver triangles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::delaunay::triangulate;
use super::{CavityShape, CellGeometry, Mesh, NodeMarker, Region};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct GeneratorOptions {
    /// Hard floor on the smallest triangle angle.
    pub min_angle_deg: f64,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for GeneratorOptions {
    fn default() -> Self {
        Self { min_angle_deg: 20.0, max_iters: 160, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PointKind {
    LeftCol(usize),
    RightCol(usize),
    Row,
    IfaceTopRow,
    IfaceBottomRow,
    Cavity,
    Free,
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn closest_on_segment(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> [f64; 2] {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let den = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if den == 0.0 {
        0.0
    } else {
        (((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1]) / den).clamp(0.0, 1.0)
    };
    [a[0] + t * ab[0], a[1] + t * ab[1]]
}

fn point_in_polygon(poly: &[[f64; 2]], p: [f64; 2]) -> bool {
    let mut inside = false;
    let n = poly.len();
    let mut j = n - 1;
    for i in 0..n {
        let (pi, pj) = (poly[i], poly[j]);
        if (pi[1] > p[1]) != (pj[1] > p[1]) {
            let x = pi[0] + (p[1] - pi[1]) / (pj[1] - pi[1]) * (pj[0] - pi[0]);
            if p[0] < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

pub(super) fn polygon_closest(poly: &[[f64; 2]], p: [f64; 2]) -> [f64; 2] {
    let mut best = poly[0];
    let mut best_d = f64::INFINITY;
    for i in 0..poly.len() {
        let c = closest_on_segment(poly[i], poly[(i + 1) % poly.len()], p);
        let d = dist(c, p);
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    best
}

/// Negative inside the polygon.
pub(super) fn polygon_signed_distance(poly: &[[f64; 2]], p: [f64; 2]) -> f64 {
    let d = dist(polygon_closest(poly, p), p);
    if point_in_polygon(poly, p) {
        -d
    } else {
        d
    }
}

/// Uniform segment subdivision including both endpoints.
fn segment_points(a: f64, b: f64, spacing: f64) -> Vec<f64> {
    let n = (((b - a) / spacing).round() as usize).max(1);
    (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
}

struct Generator<'a> {
    geom: &'a CellGeometry,
    poly: Vec<[f64; 2]>,
    /// local anchor spacing per polygon vertex
    poly_sizes: Vec<f64>,
    /// expanded bounding box of the cavity for the fast size-field path
    poly_bbox: [f64; 4],
    h: f64,
    points: Vec<[f64; 2]>,
    kinds: Vec<PointKind>,
    n_fixed: usize,
}

impl<'a> Generator<'a> {
    /// Target edge length: uniform away from the cavity, graded down to the
    /// local anchor spacing near it.
    fn size_at(&self, p: [f64; 2]) -> f64 {
        let [x0, y0, x1, y1] = self.poly_bbox;
        if p[0] < x0 || p[0] > x1 || p[1] < y0 || p[1] > y1 {
            return self.h;
        }
        let mut s = self.h;
        for (v, sv) in self.poly.iter().zip(&self.poly_sizes) {
            s = s.min(sv + 0.6 * dist(p, *v));
        }
        s.clamp(0.2 * self.h, self.h)
    }

    fn domain_ok(&self, c: [f64; 2]) -> bool {
        let g = self.geom;
        let eps = 1e-3 * self.h;
        c[0] > -eps
            && c[0] < g.lambda + eps
            && c[1] > g.bottom() - eps
            && c[1] < g.top() + eps
            && polygon_signed_distance(&self.poly, c) > 0.0
    }

    fn triangulate_domain(&self) -> Vec<[usize; 3]> {
        let tris = triangulate(&self.points);
        tris.into_iter()
            .filter(|t| {
                let [a, b, c] = *t;
                let cx = (self.points[a][0] + self.points[b][0] + self.points[c][0]) / 3.0;
                let cy = (self.points[a][1] + self.points[b][1] + self.points[c][1]) / 3.0;
                self.domain_ok([cx, cy])
                    && super::triangle_area(self.points[a], self.points[b], self.points[c])
                        > 1e-14 * self.h * self.h
            })
            .collect()
    }

    /// One force-relaxation step; returns the largest free-point displacement.
    fn relax(&mut self, tris: &[[usize; 3]]) -> f64 {
        let mut bars = std::collections::BTreeSet::new();
        for t in tris {
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                bars.insert((a.min(b), a.max(b)));
            }
        }
        let mut sum_l2 = 0.0;
        let mut sum_s2 = 0.0;
        let mut sizes = Vec::with_capacity(bars.len());
        for &(a, b) in &bars {
            let (pa, pb) = (self.points[a], self.points[b]);
            let mid = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
            let s = self.size_at(mid);
            sizes.push(s);
            sum_l2 += dist(pa, pb).powi(2);
            sum_s2 += s * s;
        }
        let scale = 1.2 * (sum_l2 / sum_s2).sqrt();
        let mut force = vec![[0.0f64; 2]; self.points.len()];
        for (&(a, b), &s) in bars.iter().zip(&sizes) {
            let (pa, pb) = (self.points[a], self.points[b]);
            let l = dist(pa, pb).max(1e-300);
            let f = (scale * s - l).max(0.0) / l;
            let fx = f * (pb[0] - pa[0]);
            let fy = f * (pb[1] - pa[1]);
            force[a][0] -= fx;
            force[a][1] -= fy;
            force[b][0] += fx;
            force[b][1] += fy;
        }
        let g = self.geom;
        let margin = 0.35 * self.h;
        let band = 0.42 * self.h;
        let mut max_move = 0.0f64;
        for i in self.n_fixed..self.points.len() {
            let dx = 0.2 * force[i][0];
            let dy = 0.2 * force[i][1];
            max_move = max_move.max((dx * dx + dy * dy).sqrt());
            let mut p = [self.points[i][0] + dx, self.points[i][1] + dy];
            p[0] = p[0].clamp(margin, g.lambda - margin);
            p[1] = p[1].clamp(g.bottom() + margin, g.top() - margin);
            // keep a clear band around the interface lines (anchors own them)
            for line in [g.h1, g.h2] {
                let d = p[1] - line;
                if d.abs() < band {
                    p[1] = line + band * if d >= 0.0 { 1.0 } else { -1.0 };
                }
            }
            // stay clear of the cavity wall, proportionally to the local size
            let wall = 0.55 * self.size_at(p);
            let sd = polygon_signed_distance(&self.poly, p);
            if sd < wall {
                let c = polygon_closest(&self.poly, p);
                let out = if sd < 0.0 { [c[0] - p[0], c[1] - p[1]] } else { [p[0] - c[0], p[1] - c[1]] };
                let n = (out[0] * out[0] + out[1] * out[1]).sqrt().max(1e-300);
                p = [c[0] + wall * out[0] / n, c[1] + wall * out[1] / n];
            }
            self.points[i] = p;
        }
        max_move
    }
}

/// Outward vertex normals of a simple polygon.
fn vertex_normals(poly: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let n = poly.len();
    let mut area2 = 0.0;
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        area2 += a[0] * b[1] - b[0] * a[1];
    }
    let sgn = if area2 >= 0.0 { 1.0 } else { -1.0 };
    (0..n)
        .map(|i| {
            let prev = poly[(i + n - 1) % n];
            let next = poly[(i + 1) % n];
            let e1 = [poly[i][0] - prev[0], poly[i][1] - prev[1]];
            let e2 = [next[0] - poly[i][0], next[1] - poly[i][1]];
            // outward normal of a CCW edge is (dy, -dx)
            let mut nx = sgn * (e1[1] + e2[1]);
            let mut ny = -sgn * (e1[0] + e2[0]);
            let len = (nx * nx + ny * ny).sqrt().max(1e-300);
            nx /= len;
            ny /= len;
            [nx, ny]
        })
        .collect()
}

/// Generates a quasi-uniform triangulation of the cell minus the cavity with
/// mirrored seam columns, conforming interface lines, and full markers.
pub fn generate_mesh(
    geom: &CellGeometry,
    cavity: &CavityShape,
    h: f64,
    opts: &GeneratorOptions,
) -> Result<Mesh> {
    if h <= 0.0 {
        return Err(Error::Config(format!("mesh size must be positive, got {h}")));
    }
    if !(geom.h2 < geom.h1) || geom.dh1 <= 0.0 || geom.dh2 <= 0.0 || geom.lambda <= 0.0 {
        return Err(Error::Geometry("degenerate cell geometry".into()));
    }
    let poly = cavity.polygon(0.5 * h)?;
    for p in &poly {
        if p[0] < h || p[0] > geom.lambda - h || p[1] < geom.h2 + h || p[1] > geom.h1 - h {
            return Err(Error::Geometry(format!(
                "cavity point ({}, {}) touches the strip boundary",
                p[0], p[1]
            )));
        }
    }

    let h_eff = 0.93 * h;
    let np = poly.len();
    let poly_sizes: Vec<f64> = (0..np)
        .map(|i| {
            let prev = poly[(i + np - 1) % np];
            let next = poly[(i + 1) % np];
            0.5 * (dist(poly[i], prev) + dist(poly[i], next))
        })
        .collect();
    let reach = 2.0 * h_eff;
    let poly_bbox = poly.iter().fold(
        [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY],
        |b, p| [b[0].min(p[0] - reach), b[1].min(p[1] - reach), b[2].max(p[0] + reach), b[3].max(p[1] + reach)],
    );

    let mut points: Vec<[f64; 2]> = Vec::new();
    let mut kinds: Vec<PointKind> = Vec::new();

    // seam columns, generated once and mirrored
    let mut ys = segment_points(geom.bottom(), geom.h2, h_eff);
    ys.extend(segment_points(geom.h2, geom.h1, h_eff).into_iter().skip(1));
    ys.extend(segment_points(geom.h1, geom.top(), h_eff).into_iter().skip(1));
    for (j, &y) in ys.iter().enumerate() {
        points.push([0.0, y]);
        kinds.push(PointKind::LeftCol(j));
    }
    for (j, &y) in ys.iter().enumerate() {
        points.push([geom.lambda, y]);
        kinds.push(PointKind::RightCol(j));
    }
    // horizontal anchor rows (interior x only; corners belong to the columns)
    let xs = segment_points(0.0, geom.lambda, h_eff);
    let inner = &xs[1..xs.len() - 1];
    for (y, kind) in [
        (geom.bottom(), PointKind::Row),
        (geom.top(), PointKind::Row),
        (geom.h1, PointKind::IfaceTopRow),
        (geom.h2, PointKind::IfaceBottomRow),
    ] {
        for &x in inner {
            points.push([x, y]);
            kinds.push(kind);
        }
    }
    // cavity polygon anchors
    for &p in &poly {
        points.push(p);
        kinds.push(PointKind::Cavity);
    }
    let n_fixed = points.len();

    let gen_probe = Generator {
        geom,
        poly: poly.clone(),
        poly_sizes: poly_sizes.clone(),
        poly_bbox,
        h: h_eff,
        points: Vec::new(),
        kinds: Vec::new(),
        n_fixed: 0,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x9e3779b97f4a7c15);
    let mut free: Vec<[f64; 2]> = Vec::new();

    // guard points next to every anchor-line intersection; without them the
    // Delaunay diagonal across the corner becomes the longest mesh edge
    let g_off = 0.62 * h_eff;
    for x in [g_off, geom.lambda - g_off] {
        for line in [geom.h1, geom.h2] {
            free.push([x, line + g_off]);
            free.push([x, line - g_off]);
        }
        free.push([x, geom.bottom() + g_off]);
        free.push([x, geom.top() - g_off]);
    }

    // graded collar rings around the cavity
    let normals = vertex_normals(&poly);
    for i in 0..np {
        let s = poly_sizes[i];
        let mut r = 1.05 * s;
        while r < 0.95 * h_eff {
            let jx = 0.05 * s * (rng.gen::<f64>() - 0.5);
            let jy = 0.05 * s * (rng.gen::<f64>() - 0.5);
            let p = [poly[i][0] + normals[i][0] * r + jx, poly[i][1] + normals[i][1] * r + jy];
            let local = gen_probe.size_at(p);
            let clear = polygon_signed_distance(&poly, p) > 0.5 * local
                && free.iter().all(|q| dist(*q, p) > 0.62 * local);
            if clear {
                free.push(p);
            }
            r += 1.05 * gen_probe.size_at(p);
        }
    }

    // jittered hex lattice of free points, kept clear of the pre-placed
    // guards and collar
    let prefree = free.clone();
    let dy = h_eff * 3f64.sqrt() / 2.0;
    let mut row = 0usize;
    let mut y = geom.bottom() + dy;
    while y < geom.top() - 0.4 * h_eff {
        let off = if row % 2 == 0 { 0.5 * h_eff } else { h_eff };
        let mut x = off;
        while x < geom.lambda - 0.4 * h_eff {
            let jx = 0.04 * h_eff * (rng.gen::<f64>() - 0.5);
            let jy = 0.04 * h_eff * (rng.gen::<f64>() - 0.5);
            let p = [x + jx, y + jy];
            let clear = p[0] > 0.45 * h_eff
                && p[0] < geom.lambda - 0.45 * h_eff
                && p[1] > geom.bottom() + 0.45 * h_eff
                && p[1] < geom.top() - 0.45 * h_eff
                && (p[1] - geom.h1).abs() > 0.45 * h_eff
                && (p[1] - geom.h2).abs() > 0.45 * h_eff
                && polygon_signed_distance(&poly, p) > 0.65 * h_eff
                && prefree.iter().all(|q| dist(*q, p) > 0.6 * h_eff);
            if clear {
                free.push(p);
            }
            x += h_eff;
        }
        row += 1;
        y += dy;
    }
    for p in free {
        points.push(p);
        kinds.push(PointKind::Free);
    }

    let mut gen = Generator { geom, poly, poly_sizes, poly_bbox, h: h_eff, points, kinds, n_fixed };

    let mut tris = gen.triangulate_domain();
    let mut moved_since_tri = 0.0;
    for _ in 0..opts.max_iters {
        let step = gen.relax(&tris);
        moved_since_tri += step;
        if moved_since_tri > 0.12 * h_eff {
            tris = gen.triangulate_domain();
            moved_since_tri = 0.0;
        }
        if step < 2.5e-3 * h_eff {
            break;
        }
    }
    tris = gen.triangulate_domain();

    // split any edge that stayed noticeably longer than the local target
    for _ in 0..6 {
        let mut long_mids = Vec::new();
        let mut seen = std::collections::BTreeSet::new();
        for t in &tris {
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                if !seen.insert((a.min(b), a.max(b))) {
                    continue;
                }
                let (pa, pb) = (gen.points[a], gen.points[b]);
                let mid = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
                if dist(pa, pb) > 1.3 * gen.size_at(mid) {
                    long_mids.push(mid);
                }
            }
        }
        if long_mids.is_empty() {
            break;
        }
        for mid in long_mids {
            gen.points.push(mid);
            gen.kinds.push(PointKind::Free);
        }
        tris = gen.triangulate_domain();
        for _ in 0..8 {
            gen.relax(&tris);
        }
        tris = gen.triangulate_domain();
    }

    // quality loop: remove free vertices of sliver triangles and re-relax
    for _round in 0..30 {
        let (angle, worst) = worst_angle(&gen.points, &tris);
        if angle >= opts.min_angle_deg {
            break;
        }
        let t = tris[worst];
        let Some(&victim) = t.iter().find(|&&v| gen.kinds[v] == PointKind::Free) else {
            return Err(Error::MeshConvergence(format!(
                "sliver of anchors with min angle {angle:.2} deg"
            )));
        };
        gen.points.swap_remove(victim);
        gen.kinds.swap_remove(victim);
        tris = gen.triangulate_domain();
        for _ in 0..6 {
            gen.relax(&tris);
        }
        tris = gen.triangulate_domain();
    }
    let (angle, _) = worst_angle(&gen.points, &tris);
    if angle < opts.min_angle_deg {
        return Err(Error::MeshConvergence(format!(
            "min angle {angle:.2} deg below the floor {}",
            opts.min_angle_deg
        )));
    }

    build_mesh(geom, gen, tris)
}

fn worst_angle(points: &[[f64; 2]], tris: &[[usize; 3]]) -> (f64, usize) {
    let mut min_angle = f64::INFINITY;
    let mut worst = 0;
    for (i, t) in tris.iter().enumerate() {
        let (p, q, r) = (points[t[0]], points[t[1]], points[t[2]]);
        let e = [dist(p, q), dist(q, r), dist(r, p)];
        for k in 0..3 {
            let (a, b, c) = (e[k], e[(k + 1) % 3], e[(k + 2) % 3]);
            let cosv = ((a * a + c * c - b * b) / (2.0 * a * c)).clamp(-1.0, 1.0);
            let ang = cosv.acos().to_degrees();
            if ang < min_angle {
                min_angle = ang;
                worst = i;
            }
        }
    }
    (min_angle, worst)
}

fn build_mesh(geom: &CellGeometry, gen: Generator, tris: Vec<[usize; 3]>) -> Result<Mesh> {
    // compact: keep only points used by some triangle
    let mut used = vec![false; gen.points.len()];
    for t in &tris {
        for &v in t {
            used[v] = true;
        }
    }
    for i in 0..gen.n_fixed {
        if !used[i] {
            return Err(Error::MeshConvergence(format!(
                "anchor {i} at {:?} not part of any triangle",
                gen.points[i]
            )));
        }
    }
    let mut remap = vec![usize::MAX; gen.points.len()];
    let mut nodes = Vec::new();
    let mut markers = Vec::new();
    let mut left_of: std::collections::BTreeMap<usize, usize> = std::collections::BTreeMap::new();
    let mut right_of: std::collections::BTreeMap<usize, usize> = std::collections::BTreeMap::new();
    for i in 0..gen.points.len() {
        if !used[i] {
            continue;
        }
        remap[i] = nodes.len();
        nodes.push(gen.points[i]);
        let p = gen.points[i];
        let on_top = p[1] == geom.top();
        let on_bottom = p[1] == geom.bottom();
        let marker = match gen.kinds[i] {
            PointKind::Cavity => NodeMarker::Cavity,
            PointKind::LeftCol(j) => {
                left_of.insert(j, remap[i]);
                if on_top {
                    NodeMarker::PmlTop
                } else if on_bottom {
                    NodeMarker::PmlBottom
                } else {
                    NodeMarker::Left
                }
            }
            PointKind::RightCol(j) => {
                right_of.insert(j, remap[i]);
                if on_top {
                    NodeMarker::PmlTop
                } else if on_bottom {
                    NodeMarker::PmlBottom
                } else {
                    NodeMarker::Right
                }
            }
            PointKind::Row => {
                if on_top {
                    NodeMarker::PmlTop
                } else {
                    NodeMarker::PmlBottom
                }
            }
            PointKind::IfaceTopRow => NodeMarker::IfaceTop,
            PointKind::IfaceBottomRow => NodeMarker::IfaceBottom,
            PointKind::Free => NodeMarker::Interior,
        };
        markers.push(marker);
    }
    let mut periodic_pairs = Vec::new();
    for (j, &l) in &left_of {
        let Some(&r) = right_of.get(j) else {
            return Err(Error::MeshConvergence(format!("seam node {j} lost its mirror partner")));
        };
        periodic_pairs.push((l, r));
    }
    let triangles: Vec<[usize; 3]> = tris.iter().map(|t| t.map(|v| remap[v])).collect();
    let regions = triangles
        .iter()
        .map(|t| {
            let cy = (nodes[t[0]][1] + nodes[t[1]][1] + nodes[t[2]][1]) / 3.0;
            if cy > geom.h1 {
                Region::Pml1
            } else if cy < geom.h2 {
                Region::Pml2
            } else {
                Region::Omega
            }
        })
        .collect();
    let mesh = Mesh { geom: *geom, nodes, markers, triangles, regions, periodic_pairs };
    mesh.audit_structural()?;
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell() -> CellGeometry {
        CellGeometry { lambda: 1.0, h1: 0.5, h2: -0.5, dh1: 2.5, dh2: 2.5 }
    }

    fn circle() -> CavityShape {
        CavityShape::Circle { radius: 0.3, center: [0.5, 0.0] }
    }

    #[test]
    fn generates_reference_cell_at_coarse_size() {
        let mesh = generate_mesh(&cell(), &circle(), 0.1, &GeneratorOptions::default()).unwrap();
        mesh.audit_structural().unwrap();
        let q = mesh.quality();
        assert!(q.min_angle_deg >= 20.0, "min angle {}", q.min_angle_deg);
        assert_eq!(mesh.euler_characteristic().unwrap(), 0);
        assert!(!mesh.periodic_pairs.is_empty());
        let poly = circle().polygon(0.05).unwrap();
        for (i, m) in mesh.markers.iter().enumerate() {
            if *m == NodeMarker::Cavity {
                let d = polygon_signed_distance(&poly, mesh.nodes[i]).abs();
                assert!(d < 1e-9, "cavity node {i} off the polygon by {d:.2e}");
            }
        }
    }

    #[test]
    fn node_count_and_quality_at_spec_size() {
        let mesh = generate_mesh(&cell(), &circle(), 0.05, &GeneratorOptions::default()).unwrap();
        let n = mesh.node_count();
        assert!((3000..=5000).contains(&n), "node count {n}");
        let q = mesh.quality();
        assert!(q.min_angle_deg >= 20.0, "min angle {}", q.min_angle_deg);
        assert_eq!(mesh.euler_characteristic().unwrap(), 0);
    }

    #[test]
    fn refinement_shrinks_longest_edge() {
        let coarse = generate_mesh(&cell(), &circle(), 0.16, &GeneratorOptions::default()).unwrap();
        let fine = generate_mesh(&cell(), &circle(), 0.08, &GeneratorOptions::default()).unwrap();
        assert!(fine.quality().h_max <= coarse.quality().h_max / 2.0 + 1e-12);
    }

    #[test]
    fn cavity_touching_strip_is_rejected() {
        let bad = CavityShape::Circle { radius: 0.49, center: [0.5, 0.0] };
        match generate_mesh(&cell(), &bad, 0.1, &GeneratorOptions::default()) {
            Err(Error::Geometry(_)) => {}
            other => panic!("expected geometry error, got {other:?}"),
        }
    }

    #[test]
    fn kite_cavity_meshes() {
        let kite = CavityShape::Kite { center: [0.5, 0.0] };
        let mesh = generate_mesh(&cell(), &kite, 0.05, &GeneratorOptions::default()).unwrap();
        mesh.audit_structural().unwrap();
        assert!(mesh.quality().min_angle_deg >= 20.0, "min angle {}", mesh.quality().min_angle_deg);
    }
}
