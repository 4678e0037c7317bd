//! Incremental Delaunay triangulation (Bowyer-Watson) with a walking point
//! locator. Input points are triangulated in grid-bucket order so the walk
//! stays short; degenerate insertions retry with a deterministic nudge.

#[inline]
fn orient2d(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

#[inline]
fn incircle(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> f64 {
    let adx = a[0] - d[0];
    let ady = a[1] - d[1];
    let bdx = b[0] - d[0];
    let bdy = b[1] - d[1];
    let cdx = c[0] - d[0];
    let cdy = c[1] - d[1];
    let ad = adx * adx + ady * ady;
    let bd = bdx * bdx + bdy * bdy;
    let cd = cdx * cdx + cdy * cdy;
    adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx)
}

struct Triangulation {
    points: Vec<[f64; 2]>,
    tris: Vec<[usize; 3]>,
    /// adj[t][i] = triangle across the edge opposite vertex i, usize::MAX if none
    adj: Vec<[usize; 3]>,
    alive: Vec<bool>,
    free: Vec<usize>,
    last: usize,
}

const NONE: usize = usize::MAX;

impl Triangulation {
    fn new_with_super(points: Vec<[f64; 2]>) -> Self {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in &points {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let cx = 0.5 * (lo[0] + hi[0]);
        let cy = 0.5 * (lo[1] + hi[1]);
        let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1.0) * 64.0;
        let mut pts = points;
        pts.push([cx - span, cy - span / 2.0]);
        pts.push([cx + span, cy - span / 2.0]);
        pts.push([cx, cy + span]);
        let n = pts.len();
        let tris = vec![[n - 3, n - 2, n - 1]];
        Self { points: pts, tris, adj: vec![[NONE; 3]], alive: vec![true], free: vec![], last: 0 }
    }

    fn alloc(&mut self, v: [usize; 3]) -> usize {
        if let Some(t) = self.free.pop() {
            self.tris[t] = v;
            self.adj[t] = [NONE; 3];
            self.alive[t] = true;
            t
        } else {
            self.tris.push(v);
            self.adj.push([NONE; 3]);
            self.alive.push(true);
            self.tris.len() - 1
        }
    }

    /// Walks from `start` toward the triangle containing p.
    fn locate(&self, p: [f64; 2], start: usize) -> Option<usize> {
        let mut t = if self.alive.get(start).copied().unwrap_or(false) {
            start
        } else {
            self.alive.iter().position(|&a| a)?
        };
        let cap = 40 + 4 * (self.tris.len() as f64).sqrt() as usize + self.tris.len() / 8;
        for _ in 0..cap {
            let [a, b, c] = self.tris[t];
            let (pa, pb, pc) = (self.points[a], self.points[b], self.points[c]);
            // step through the first edge that strictly separates p
            let mut moved = false;
            let orients = [orient2d(pb, pc, p), orient2d(pc, pa, p), orient2d(pa, pb, p)];
            for (i, &o) in orients.iter().enumerate() {
                if o < 0.0 {
                    let next = self.adj[t][i];
                    if next == NONE {
                        return Some(t);
                    }
                    t = next;
                    moved = true;
                    break;
                }
            }
            if !moved {
                return Some(t);
            }
        }
        // fallback: exhaustive scan
        (0..self.tris.len()).find(|&t| {
            if !self.alive[t] {
                return false;
            }
            let [a, b, c] = self.tris[t];
            let (pa, pb, pc) = (self.points[a], self.points[b], self.points[c]);
            orient2d(pa, pb, p) >= 0.0 && orient2d(pb, pc, p) >= 0.0 && orient2d(pc, pa, p) >= 0.0
        })
    }

    fn insert(&mut self, idx: usize) -> bool {
        let p = self.points[idx];
        let Some(seed) = self.locate(p, self.last) else { return false };
        // grow the cavity of triangles whose circumcircle contains p
        let mut cavity = vec![seed];
        let mut seen = std::collections::BTreeSet::new();
        seen.insert(seed);
        let mut stack = vec![seed];
        while let Some(t) = stack.pop() {
            for i in 0..3 {
                let nb = self.adj[t][i];
                if nb == NONE || seen.contains(&nb) {
                    continue;
                }
                let [a, b, c] = self.tris[nb];
                if incircle(self.points[a], self.points[b], self.points[c], p) > 0.0 {
                    seen.insert(nb);
                    cavity.push(nb);
                    stack.push(nb);
                }
            }
        }
        // boundary edges of the cavity, walked with outward neighbors
        let mut boundary: Vec<(usize, usize, usize)> = Vec::new(); // (u, v, outer)
        for &t in &cavity {
            let [a, b, c] = self.tris[t];
            for (i, (u, v)) in [(b, c), (c, a), (a, b)].into_iter().enumerate() {
                let nb = self.adj[t][i];
                if nb == NONE || !seen.contains(&nb) {
                    boundary.push((u, v, nb));
                }
            }
        }
        // all new triangles must be positively oriented
        for &(u, v, _) in &boundary {
            if orient2d(self.points[u], self.points[v], p) <= 0.0 {
                return false;
            }
        }
        for &t in &cavity {
            self.alive[t] = false;
            self.free.push(t);
        }
        // fan the cavity from p and stitch adjacency
        let mut new_tris = Vec::with_capacity(boundary.len());
        for &(u, v, outer) in &boundary {
            let t = self.alloc([idx, u, v]);
            self.adj[t][0] = outer; // edge (u, v)
            if outer != NONE {
                let [oa, ob, oc] = self.tris[outer];
                for (j, (x, y)) in [(ob, oc), (oc, oa), (oa, ob)].into_iter().enumerate() {
                    if (x == v && y == u) || (x == u && y == v) {
                        self.adj[outer][j] = t;
                    }
                }
            }
            new_tris.push((t, u, v));
        }
        // link the fan: edge (p, u) of one triangle meets edge (v, p) of another
        let mut by_first: std::collections::BTreeMap<usize, usize> = std::collections::BTreeMap::new();
        for &(t, u, _v) in &new_tris {
            by_first.insert(u, t);
        }
        for &(t, _u, v) in &new_tris {
            if let Some(&t2) = by_first.get(&v) {
                // in t = [p, u, v], the edge (p, u) is opposite vertex v (index 2)
                // and neighbor t2 = [p, v, w] holds edge (v, p) opposite its u (index 1)
                self.adj[t][1] = t2; // edge (v, p) opposite vertex u at slot 1
                self.adj[t2][2] = t;
            }
        }
        self.last = new_tris[0].0;
        true
    }
}

/// Delaunay triangulation of a point set. Returns triangles as CCW index
/// triples into the input slice. Points closer than 1e-12 are treated as
/// duplicates and trigger a panic; callers dedupe beforehand.
pub fn triangulate(points: &[[f64; 2]]) -> Vec<[usize; 3]> {
    let n = points.len();
    assert!(n >= 3, "need at least 3 points");
    let mut tri = Triangulation::new_with_super(points.to_vec());
    // insert in grid-snake order for walk locality
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in points {
        lo[0] = lo[0].min(p[0]);
        lo[1] = lo[1].min(p[1]);
        hi[0] = hi[0].max(p[0]);
        hi[1] = hi[1].max(p[1]);
    }
    let cells = (n as f64).sqrt().ceil().max(1.0);
    let key = |p: [f64; 2]| {
        let gy = (((p[1] - lo[1]) / (hi[1] - lo[1]).max(1e-300)) * cells) as i64;
        let fx = (p[0] - lo[0]) / (hi[0] - lo[0]).max(1e-300);
        let gx = ((if gy % 2 == 0 { fx } else { 1.0 - fx }) * cells) as i64;
        (gy, gx)
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        key(points[i])
            .cmp(&key(points[j]))
            .then(points[i][1].partial_cmp(&points[j][1]).unwrap())
            .then(points[i][0].partial_cmp(&points[j][0]).unwrap())
            .then(i.cmp(&j))
    });
    for &i in &order {
        if !tri.insert(i) {
            // deterministic nudge for degenerate configurations
            let mut ok = false;
            let orig = tri.points[i];
            for k in 1..=3 {
                let e = 1e-11 * k as f64 * (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1.0);
                tri.points[i] = [orig[0] + e, orig[1] + 0.5 * e];
                if tri.insert(i) {
                    ok = true;
                    break;
                }
            }
            assert!(ok, "failed to insert point {i} at {orig:?}");
            tri.points[i] = orig;
        }
    }
    let mut out = Vec::new();
    for t in 0..tri.tris.len() {
        if !tri.alive[t] {
            continue;
        }
        let [a, b, c] = tri.tris[t];
        if a >= n || b >= n || c >= n {
            continue;
        }
        out.push([a, b, c]);
    }
    out.sort();
    out
}
