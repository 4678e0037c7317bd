//! Quasi-periodic P1 assembly of the stretched second-order forms.
//!
//! All matrices are assembled over the real nodal basis and then folded onto
//! the constrained degrees of freedom: every right-seam node is a slave of
//! its left partner with multiplicative phase `e^{i alpha Lambda}`, and
//! Dirichlet nodes are eliminated with their couplings collected into a
//! separate block so lift values can be moved to the right-hand side.
//!
//! Two fold conventions exist for the test side. `Conjugate` weighs slave
//! rows with the conjugate phase, which is the combination under which the
//! seam flux terms of the integrated-by-parts equations cancel; it is the
//! convention used by the solvers. `Plain` folds both sides with the same
//! phase, which keeps every assembled matrix complex symmetric entrywise.

use num_complex::Complex64;

use crate::error::Result;
use crate::mesh::{Mesh, NodeMarker, Region};
use crate::pml::{source_f, PmlProfile, SourceVariant};
use crate::spectral::IncidentWave;

/// Compressed-row complex matrix with sorted, deduplicated columns per row.
#[derive(Debug, Clone)]
pub struct SparseComplexMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<u32>,
    pub vals: Vec<Complex64>,
}

impl SparseComplexMatrix {
    pub fn from_coo(n_rows: usize, n_cols: usize, mut entries: Vec<(u32, u32, Complex64)>) -> Self {
        entries.sort_by_key(|e| (e.0, e.1));
        let mut row_ptr = vec![0usize; n_rows + 1];
        let mut cols: Vec<u32> = Vec::with_capacity(entries.len());
        let mut vals: Vec<Complex64> = Vec::with_capacity(entries.len());
        let mut cur_row = 0usize;
        for (r, c, v) in entries {
            let r = r as usize;
            while cur_row < r {
                cur_row += 1;
                row_ptr[cur_row] = cols.len();
            }
            if cols.len() > row_ptr[cur_row] && *cols.last().unwrap() == c {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
            }
        }
        while cur_row < n_rows {
            cur_row += 1;
            row_ptr[cur_row] = cols.len();
        }
        Self { n_rows, n_cols, row_ptr, cols, vals }
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.n_rows];
        for r in 0..self.n_rows {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k] as usize];
            }
            y[r] = acc;
        }
        y
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        match self.cols[lo..hi].binary_search(&(c as u32)) {
            Ok(k) => self.vals[lo + k],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    /// Largest entrywise deviation `|A - A^T|` relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.vals.iter().map(|v| v.norm()).fold(1e-300, f64::max);
        let mut worst = 0.0f64;
        for r in 0..self.n_rows {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.cols[k] as usize;
                worst = worst.max((self.vals[k] - self.get(c, r)).norm());
            }
        }
        worst / scale
    }
}

/// Which nodal values a field keeps as unknowns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subspace {
    /// All nodes (slaves folded).
    Full,
    /// Zero on the whole constrained boundary: cavity wall and both outer
    /// layer boundaries.
    ZeroOnOuter,
    /// Supported only on those boundary nodes.
    OuterOnly,
    /// Zero on the cavity wall only.
    ZeroOnCavity,
    /// Supported only on the cavity wall.
    CavityOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FoldConvention {
    /// Conjugate phase on the test side (seam-consistent Galerkin rows).
    Conjugate,
    /// Same phase on both sides (entrywise complex-symmetric matrices).
    Plain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Free(usize),
    Slave(usize),
    Fixed,
}

/// Constrained quasi-periodic numbering of one nodal field.
#[derive(Debug, Clone)]
pub struct DofMap {
    pub subspace: Subspace,
    pub fold: FoldConvention,
    /// Seam phase `e^{i alpha Lambda}`.
    pub phase: Complex64,
    pub n_dofs: usize,
    status: Vec<Status>,
}

fn on_gamma(marker: NodeMarker) -> bool {
    matches!(marker, NodeMarker::Cavity | NodeMarker::PmlTop | NodeMarker::PmlBottom)
}

pub fn build_dof_map(mesh: &Mesh, wave: &IncidentWave, subspace: Subspace, fold: FoldConvention) -> DofMap {
    let phase = (Complex64::i() * wave.alpha * mesh.geom.lambda).exp();
    let mut status = vec![Status::Fixed; mesh.node_count()];
    let keep = |m: NodeMarker| -> bool {
        match subspace {
            Subspace::Full => true,
            Subspace::ZeroOnOuter => !on_gamma(m),
            Subspace::OuterOnly => on_gamma(m),
            Subspace::ZeroOnCavity => m != NodeMarker::Cavity,
            Subspace::CavityOnly => m == NodeMarker::Cavity,
        }
    };
    let mut slave_of = vec![usize::MAX; mesh.node_count()];
    for &(l, r) in &mesh.periodic_pairs {
        slave_of[r] = l;
    }
    let mut n_dofs = 0;
    for i in 0..mesh.node_count() {
        if !keep(mesh.markers[i]) || slave_of[i] != usize::MAX {
            continue;
        }
        status[i] = Status::Free(n_dofs);
        n_dofs += 1;
    }
    for i in 0..mesh.node_count() {
        if slave_of[i] != usize::MAX && keep(mesh.markers[i]) {
            status[i] = match status[slave_of[i]] {
                Status::Free(_) => Status::Slave(slave_of[i]),
                _ => Status::Fixed,
            };
        }
    }
    DofMap { subspace, fold, phase, n_dofs, status }
}

impl DofMap {
    pub fn node_count(&self) -> usize {
        self.status.len()
    }

    pub fn is_fixed(&self, node: usize) -> bool {
        self.status[node] == Status::Fixed
    }

    pub fn free_dof(&self, node: usize) -> Option<usize> {
        match self.status[node] {
            Status::Free(i) => Some(i),
            _ => None,
        }
    }

    /// (dof, weight) of a node's trial-side representation.
    pub fn trial_weight(&self, node: usize) -> Option<(usize, Complex64)> {
        match self.status[node] {
            Status::Free(i) => Some((i, Complex64::new(1.0, 0.0))),
            Status::Slave(m) => match self.status[m] {
                Status::Free(i) => Some((i, self.phase)),
                _ => None,
            },
            Status::Fixed => None,
        }
    }

    /// (dof, weight) of a node's test-side row weight.
    pub fn test_weight(&self, node: usize) -> Option<(usize, Complex64)> {
        let (i, w) = self.trial_weight(node)?;
        let w = match self.fold {
            FoldConvention::Conjugate => w.conj(),
            FoldConvention::Plain => w,
        };
        Some((i, w))
    }

    /// Expands reduced unknowns (plus Dirichlet lift values) to nodal values.
    pub fn expand(&self, reduced: &[Complex64], lift: Option<&[Complex64]>) -> Vec<Complex64> {
        let mut full = vec![Complex64::new(0.0, 0.0); self.status.len()];
        for (n, s) in self.status.iter().enumerate() {
            full[n] = match s {
                Status::Free(i) => reduced[*i],
                Status::Fixed => lift.map_or(Complex64::new(0.0, 0.0), |l| l[n]),
                Status::Slave(_) => Complex64::new(0.0, 0.0),
            };
        }
        for (n, s) in self.status.iter().enumerate() {
            if let Status::Slave(m) = s {
                full[n] = self.phase * full[*m];
            }
        }
        full
    }

    /// Folds a full-node load vector onto the reduced test rows.
    pub fn fold_load(&self, full: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.n_dofs];
        for n in 0..full.len() {
            if let Some((i, w)) = self.test_weight(n) {
                out[i] += w * full[n];
            }
        }
        out
    }
}

// --- quadrature -------------------------------------------------------------

/// Symmetric triangle rules in barycentric coordinates; weights sum to one.
pub const TRI_DEG5: &[([f64; 3], f64)] = &[
    ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 0.225),
    ([0.059715871789770, 0.470142064105115, 0.470142064105115], 0.132394152788506),
    ([0.470142064105115, 0.059715871789770, 0.470142064105115], 0.132394152788506),
    ([0.470142064105115, 0.470142064105115, 0.059715871789770], 0.132394152788506),
    ([0.797426985353087, 0.101286507323456, 0.101286507323456], 0.125939180544827),
    ([0.101286507323456, 0.797426985353087, 0.101286507323456], 0.125939180544827),
    ([0.101286507323456, 0.101286507323456, 0.797426985353087], 0.125939180544827),
];

pub const TRI_DEG7: &[([f64; 3], f64)] = &[
    ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], -0.149570044467670),
    ([0.479308067841923, 0.260345966079038, 0.260345966079038], 0.175615257433204),
    ([0.260345966079038, 0.479308067841923, 0.260345966079038], 0.175615257433204),
    ([0.260345966079038, 0.260345966079038, 0.479308067841923], 0.175615257433204),
    ([0.869739794195568, 0.065130102902216, 0.065130102902216], 0.053347235608839),
    ([0.065130102902216, 0.869739794195568, 0.065130102902216], 0.053347235608839),
    ([0.065130102902216, 0.065130102902216, 0.869739794195568], 0.053347235608839),
    ([0.638444188569809, 0.312865496004875, 0.048690315425316], 0.077113760890257),
    ([0.638444188569809, 0.048690315425316, 0.312865496004875], 0.077113760890257),
    ([0.312865496004875, 0.638444188569809, 0.048690315425316], 0.077113760890257),
    ([0.312865496004875, 0.048690315425316, 0.638444188569809], 0.077113760890257),
    ([0.048690315425316, 0.638444188569809, 0.312865496004875], 0.077113760890257),
    ([0.048690315425316, 0.312865496004875, 0.638444188569809], 0.077113760890257),
];

/// 4-point Gauss rule on [0, 1].
pub const LINE_GL4: &[(f64, f64)] = &[
    (0.069431844202974, 0.173927422568727),
    (0.330009478207572, 0.326072577431273),
    (0.669990521792428, 0.326072577431273),
    (0.930568155797026, 0.173927422568727),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadRule {
    Deg5,
    Deg7,
    /// Degree-7 rule on each of `4^level` uniform sub-triangles; an
    /// independent oracle for quadrature-sufficiency checks.
    Refined(u8),
}

fn quad_points(rule: QuadRule, corners: [[f64; 2]; 3], out: &mut Vec<([f64; 3], [f64; 2], f64)>) {
    fn emit(bcorners: [[f64; 3]; 3], corners: [[f64; 2]; 3], table: &[([f64; 3], f64)], scale: f64, out: &mut Vec<([f64; 3], [f64; 2], f64)>) {
        for &(b, w) in table {
            let mut bary = [0.0; 3];
            for k in 0..3 {
                bary[k] = b[0] * bcorners[0][k] + b[1] * bcorners[1][k] + b[2] * bcorners[2][k];
            }
            let x = bary[0] * corners[0][0] + bary[1] * corners[1][0] + bary[2] * corners[2][0];
            let y = bary[0] * corners[0][1] + bary[1] * corners[1][1] + bary[2] * corners[2][1];
            out.push((bary, [x, y], w * scale));
        }
    }
    let id = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    match rule {
        QuadRule::Deg5 => emit(id, corners, TRI_DEG5, 1.0, out),
        QuadRule::Deg7 => emit(id, corners, TRI_DEG7, 1.0, out),
        QuadRule::Refined(levels) => {
            fn rec(level: u8, bc: [[f64; 3]; 3], corners: [[f64; 2]; 3], scale: f64, out: &mut Vec<([f64; 3], [f64; 2], f64)>) {
                if level == 0 {
                    emit(bc, corners, TRI_DEG7, scale, out);
                    return;
                }
                let mid = |a: [f64; 3], b: [f64; 3]| {
                    [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0, (a[2] + b[2]) / 2.0]
                };
                let [a, b, c] = bc;
                let (ab, bcm, ca) = (mid(a, b), mid(b, c), mid(c, a));
                for sub in [[a, ab, ca], [ab, b, bcm], [ca, bcm, c], [ab, bcm, ca]] {
                    rec(level - 1, sub, corners, scale * 0.25, out);
                }
            }
            rec(levels, id, corners, 1.0, out);
        }
    }
}

// --- volume and penalty forms -------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub enum VolumeForm {
    /// `1/sigma d2.d2 + sigma d1.d1 - kappa^2 sigma mass`.
    Bp { kappa: f64 },
    /// `1/sigma d2.d2 + sigma d1.d1 + kappa^2 sigma mass`.
    Bq { kappa: f64 },
    /// `sigma`-weighted mass only.
    MassSigma,
}

/// Reduced matrix together with the couplings into Dirichlet-fixed nodes
/// (reduced rows x full nodes); the product with a nodal lift vector is the
/// right-hand-side correction of the lifted problem.
#[derive(Debug, Clone)]
pub struct Assembled {
    pub matrix: SparseComplexMatrix,
    pub fixed: SparseComplexMatrix,
}

impl Assembled {
    pub fn lift_rhs(&self, lift: &[Complex64]) -> Vec<Complex64> {
        self.fixed.matvec(lift)
    }
}

fn local_volume(
    corners: [[f64; 2]; 3],
    profile: &PmlProfile,
    form: VolumeForm,
    rule: QuadRule,
) -> [[Complex64; 3]; 3] {
    let area = crate::mesh::triangle_area(corners[0], corners[1], corners[2]);
    let mut grad = [[0.0f64; 2]; 3];
    for i in 0..3 {
        let j = (i + 1) % 3;
        let k = (i + 2) % 3;
        grad[i][0] = (corners[j][1] - corners[k][1]) / (2.0 * area);
        grad[i][1] = (corners[k][0] - corners[j][0]) / (2.0 * area);
    }
    let mut pts = Vec::with_capacity(16);
    quad_points(rule, corners, &mut pts);
    let mut int_sigma = Complex64::new(0.0, 0.0);
    let mut int_inv = Complex64::new(0.0, 0.0);
    let mut mass = [[Complex64::new(0.0, 0.0); 3]; 3];
    for (bary, xy, w) in pts {
        let s = profile.sigma(xy[1]);
        int_sigma += w * s;
        int_inv += w / s;
        for i in 0..3 {
            for j in 0..3 {
                mass[i][j] += w * s * bary[i] * bary[j];
            }
        }
    }
    int_sigma *= area;
    int_inv *= area;
    let c_mass = match form {
        VolumeForm::Bp { kappa } => Complex64::new(-kappa * kappa, 0.0),
        VolumeForm::Bq { kappa } => Complex64::new(kappa * kappa, 0.0),
        VolumeForm::MassSigma => Complex64::new(1.0, 0.0),
    };
    let with_grad = !matches!(form, VolumeForm::MassSigma);
    let mut out = [[Complex64::new(0.0, 0.0); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut v = c_mass * mass[i][j] * area;
            if with_grad {
                v += int_inv * grad[i][1] * grad[j][1] + int_sigma * grad[i][0] * grad[j][0];
            }
            out[i][j] = v;
        }
    }
    out
}

struct Scatter {
    main: Vec<(u32, u32, Complex64)>,
    fixed: Vec<(u32, u32, Complex64)>,
}

impl Scatter {
    fn new() -> Self {
        Self { main: Vec::new(), fixed: Vec::new() }
    }

    fn add(&mut self, row_map: &DofMap, col_map: &DofMap, rn: usize, cn: usize, v: Complex64) {
        let Some((ri, rw)) = row_map.test_weight(rn) else { return };
        match col_map.trial_weight(cn) {
            Some((ci, cw)) => self.main.push((ri as u32, ci as u32, rw * v * cw)),
            None => {
                // attribute slave couplings to the master's lift value
                let (node, w) = match col_map.status[cn] {
                    Status::Slave(m) => (m, col_map.phase),
                    _ => (cn, Complex64::new(1.0, 0.0)),
                };
                self.fixed.push((ri as u32, node as u32, rw * v * w));
            }
        }
    }

    fn finish(self, row_map: &DofMap, col_map: &DofMap) -> Assembled {
        Assembled {
            matrix: SparseComplexMatrix::from_coo(row_map.n_dofs, col_map.n_dofs, self.main),
            fixed: SparseComplexMatrix::from_coo(row_map.n_dofs, col_map.node_count(), self.fixed),
        }
    }
}

/// Assembles a sigma-weighted volume form over the whole computational cell.
pub fn assemble_volume(
    mesh: &Mesh,
    profile: &PmlProfile,
    form: VolumeForm,
    row_map: &DofMap,
    col_map: &DofMap,
    rule: QuadRule,
) -> Assembled {
    let mut sc = Scatter::new();
    for t in 0..mesh.triangles.len() {
        let local = local_volume(mesh.tri_corners(t), profile, form, rule);
        let tri = mesh.triangles[t];
        for i in 0..3 {
            for j in 0..3 {
                sc.add(row_map, col_map, tri[i], tri[j], local[i][j]);
            }
        }
    }
    sc.finish(row_map, col_map)
}

pub fn assemble_bp(mesh: &Mesh, dofs: &DofMap, profile: &PmlProfile, kappa: f64) -> Assembled {
    assemble_volume(mesh, profile, VolumeForm::Bp { kappa }, dofs, dofs, QuadRule::Deg5)
}

pub fn assemble_bq(mesh: &Mesh, dofs: &DofMap, profile: &PmlProfile, kappa: f64) -> Assembled {
    assemble_volume(mesh, profile, VolumeForm::Bq { kappa }, dofs, dofs, QuadRule::Deg5)
}

pub fn assemble_mass_sigma(mesh: &Mesh, row_map: &DofMap, col_map: &DofMap, profile: &PmlProfile) -> Assembled {
    assemble_volume(mesh, profile, VolumeForm::MassSigma, row_map, col_map, QuadRule::Deg5)
}

/// Normal-derivative jump of every involved nodal hat across an interior
/// edge: (nodes, jumps, edge length). The jump normal points from the
/// lower-indexed triangle into the higher-indexed one.
fn edge_jumps(mesh: &Mesh, e: &crate::mesh::InteriorEdge) -> ([usize; 4], [f64; 4], f64) {
    let (pa, pb) = (mesh.nodes[e.a], mesh.nodes[e.b]);
    let len = ((pb[0] - pa[0]).powi(2) + (pb[1] - pa[1]).powi(2)).sqrt();
    let mut nu = [(pb[1] - pa[1]) / len, (pa[0] - pb[0]) / len];
    let centroid = |t: usize| {
        let c = mesh.tri_corners(t);
        [(c[0][0] + c[1][0] + c[2][0]) / 3.0, (c[0][1] + c[1][1] + c[2][1]) / 3.0]
    };
    let (clo, chi) = (centroid(e.tri_lo), centroid(e.tri_hi));
    if nu[0] * (chi[0] - clo[0]) + nu[1] * (chi[1] - clo[1]) < 0.0 {
        nu = [-nu[0], -nu[1]];
    }
    let grad_in = |t: usize, node: usize| -> [f64; 2] {
        let tri = mesh.triangles[t];
        let corners = mesh.tri_corners(t);
        let area = crate::mesh::triangle_area(corners[0], corners[1], corners[2]);
        for i in 0..3 {
            if tri[i] == node {
                let j = (i + 1) % 3;
                let k = (i + 2) % 3;
                return [
                    (corners[j][1] - corners[k][1]) / (2.0 * area),
                    (corners[k][0] - corners[j][0]) / (2.0 * area),
                ];
            }
        }
        [0.0, 0.0]
    };
    let mut nodes = [usize::MAX; 4];
    let mut count = 0;
    for &t in &[e.tri_lo, e.tri_hi] {
        for &v in &mesh.triangles[t] {
            if !nodes[..count].contains(&v) {
                nodes[count] = v;
                count += 1;
            }
        }
    }
    debug_assert_eq!(count, 4);
    let mut jumps = [0.0f64; 4];
    for (k, &v) in nodes.iter().enumerate() {
        let glo = grad_in(e.tri_lo, v);
        let ghi = grad_in(e.tri_hi, v);
        jumps[k] = nu[0] * (glo[0] - ghi[0]) + nu[1] * (glo[1] - ghi[1]);
    }
    (nodes, jumps, len)
}

/// Interior-penalty form `eta h_e integral over e of [d_nu u][d_nu v]`;
/// with P1 fields the jumps are constant along each edge, so every edge
/// contributes `eta h_e^2 jump_u jump_v`. Boundary edges contribute nothing.
pub fn assemble_penalty(mesh: &Mesh, row_map: &DofMap, col_map: &DofMap, eta: Complex64) -> Result<Assembled> {
    let edges = mesh.classify_edges()?;
    let mut sc = Scatter::new();
    for e in &edges.interior {
        let (nodes, jumps, len) = edge_jumps(mesh, e);
        for i in 0..4 {
            for j in 0..4 {
                let v = eta * len * len * jumps[i] * jumps[j];
                if v.norm_sqr() > 0.0 {
                    sc.add(row_map, col_map, nodes[i], nodes[j], v);
                }
            }
        }
    }
    Ok(sc.finish(row_map, col_map))
}

// --- load vectors --------------------------------------------------------------

/// Volume source load over the upper layer. For the fourth-order split the
/// entry is `-1/(2 kappa^2) integral of sigma f phi` with `f` the stretched
/// bilaplacian residual of the incident wave; for the decoupled split the
/// source evaluator already carries the sigma weight of the printed
/// divergence form, so the entry is `integral of f phi`.
pub fn assemble_load_f1(
    mesh: &Mesh,
    row_map: &DofMap,
    wave: &IncidentWave,
    profile: &PmlProfile,
    variant: SourceVariant,
    rule: QuadRule,
) -> Vec<Complex64> {
    let mut full = vec![Complex64::new(0.0, 0.0); mesh.node_count()];
    for t in 0..mesh.triangles.len() {
        if mesh.regions[t] != Region::Pml1 {
            continue;
        }
        let corners = mesh.tri_corners(t);
        let area = crate::mesh::triangle_area(corners[0], corners[1], corners[2]);
        let mut pts = Vec::with_capacity(16);
        quad_points(rule, corners, &mut pts);
        let tri = mesh.triangles[t];
        for (bary, xy, w) in pts {
            let f = source_f(xy[0], xy[1], wave, profile, variant);
            let weight = match variant {
                SourceVariant::Biharmonic => -profile.sigma(xy[1]) * f / (2.0 * wave.kappa * wave.kappa),
                SourceVariant::HelmholtzDecoupled => f,
            };
            for i in 0..3 {
                full[tri[i]] += w * area * weight * bary[i];
            }
        }
    }
    row_map.fold_load(&full)
}

/// Boundary flux load on the outer upper boundary:
/// `integral of (1/sigma) psi d2(incident)` along the top line, with
/// `d2(incident) = -i beta incident` and sigma constant there.
pub fn assemble_load_f2(
    mesh: &Mesh,
    row_map: &DofMap,
    wave: &IncidentWave,
    profile: &PmlProfile,
) -> Result<Vec<Complex64>> {
    assemble_load_f2_rule(mesh, row_map, wave, profile, LINE_GL4)
}

pub fn assemble_load_f2_rule(
    mesh: &Mesh,
    row_map: &DofMap,
    wave: &IncidentWave,
    profile: &PmlProfile,
    rule: &[(f64, f64)],
) -> Result<Vec<Complex64>> {
    let top = mesh.geom.top();
    let inv_sigma = Complex64::new(1.0, 0.0) / profile.outer_sigma();
    let d2 = -Complex64::i() * wave.beta;
    let mut full = vec![Complex64::new(0.0, 0.0); mesh.node_count()];
    let edges = mesh.classify_edges()?;
    for e in &edges.boundary {
        let (pa, pb) = (mesh.nodes[e.a], mesh.nodes[e.b]);
        if (pa[1] - top).abs() > 1e-12 || (pb[1] - top).abs() > 1e-12 {
            continue;
        }
        let len = (pb[0] - pa[0]).abs();
        for &(t, w) in rule {
            let x1 = pa[0] + t * (pb[0] - pa[0]);
            let common = w * len * inv_sigma * d2 * wave.eval(x1, top);
            full[e.a] += common * (1.0 - t);
            full[e.b] += common * t;
        }
    }
    Ok(row_map.fold_load(&full))
}

/// Nodal interpolation of a function on a marked node set, zero elsewhere;
/// the standard minimal Dirichlet lift.
pub fn nodal_lift<F: Fn(f64, f64) -> Complex64>(mesh: &Mesh, marker: NodeMarker, f: F) -> Vec<Complex64> {
    let mut lift = vec![Complex64::new(0.0, 0.0); mesh.node_count()];
    for (n, m) in mesh.markers.iter().enumerate() {
        if *m == marker {
            lift[n] = f(mesh.nodes[n][0], mesh.nodes[n][1]);
        }
    }
    lift
}
