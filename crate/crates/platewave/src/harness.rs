//! Scenario configuration, end-to-end runs, and the parameter studies.
//!
//! A scenario is a pure function of its configuration: meshes are seeded,
//! assembly reductions are ordered, and study aggregation is keyed by the
//! swept parameter, so repeated runs produce byte-identical outputs.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::assemble::FoldConvention;
use crate::error::{Error, Result};
use crate::mesh::{generate_mesh, CavityShape, CellGeometry, GeneratorOptions, Mesh, MeshQuality};
use crate::pml::{MaterialParams, PmlProfile};
use crate::solve::{
    l2_norm, max_abs, solve_decoupled, solve_qp, solve_uq, trace_l2, Decomposition, FieldSampler,
    RegionSelect, ScatterSolution, SolveOptions,
};
use crate::spectral::{make_mode_basis, theta, IncidentWave};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub lambda: f64,
    pub h1: f64,
    pub h2: f64,
    pub dh1: f64,
    pub dh2: f64,
    pub cavity: CavityShape,
    pub kappa: f64,
    pub theta: f64,
    pub mu: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub m: u32,
    pub h: f64,
    /// Penalty constant as (re, im).
    pub eta: [f64; 2],
    pub n_modes: i32,
    pub mesh_min_angle: f64,
    pub seed: u64,
    pub methods: Vec<Decomposition>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        // the reference configuration of the numerical experiments
        Self {
            lambda: 1.0,
            h1: 0.5,
            h2: -0.5,
            dh1: 2.5,
            dh2: 2.5,
            cavity: CavityShape::Circle { radius: 0.3, center: [0.5, 0.0] },
            kappa: std::f64::consts::PI,
            theta: std::f64::consts::FRAC_PI_3,
            mu: 0.5,
            sigma1: 14.0,
            sigma2: 5.0,
            m: 4,
            h: 0.05,
            eta: [0.001, 0.001],
            n_modes: 20,
            mesh_min_angle: 20.0,
            seed: 0,
            methods: vec![Decomposition::DecoupledQP],
        }
    }
}

impl ScenarioConfig {
    pub fn geometry(&self) -> CellGeometry {
        CellGeometry { lambda: self.lambda, h1: self.h1, h2: self.h2, dh1: self.dh1, dh2: self.dh2 }
    }

    pub fn wave(&self) -> Result<IncidentWave> {
        IncidentWave::new(self.kappa, self.theta)
    }

    pub fn material(&self) -> Result<MaterialParams> {
        MaterialParams::new(self.kappa, self.mu)
    }

    pub fn profile(&self) -> Result<PmlProfile> {
        PmlProfile::new(self.sigma1, self.sigma2, self.m, self.h1, self.h2, self.dh1, self.dh2)
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            eta: Complex64::new(self.eta[0], self.eta[1]),
            fold: FoldConvention::Conjugate,
            flip_q_penalty: false,
        }
    }

    pub fn generator_options(&self) -> GeneratorOptions {
        GeneratorOptions { min_angle_deg: self.mesh_min_angle, max_iters: 160, seed: self.seed }
    }

    /// Structural validation; the layer-parameter restriction is gated here
    /// and can be waived explicitly for sweep studies.
    pub fn validate(&self, allow_invalid_pml: bool) -> Result<()> {
        if self.h <= 0.0 {
            return Err(Error::Config(format!("mesh size must be positive, got {}", self.h)));
        }
        let material = self.material()?;
        let profile = self.profile()?;
        let _ = self.wave()?;
        let report = profile.validate(&material);
        if !report.ok && !allow_invalid_pml {
            return Err(Error::Config(format!(
                "layer parameters violate the admissibility restriction: 1 + sigma1 = {:.6} \
                 must exceed sqrt((3+mu)/(1-mu)) * sigma2 = {:.6} (override to proceed)",
                report.lhs, report.rhs
            )));
        }
        Ok(())
    }

    pub fn build_mesh(&self) -> Result<Mesh> {
        generate_mesh(&self.geometry(), &self.cavity, self.h, &self.generator_options())
    }

    pub fn solve_method(&self, mesh: &Mesh, method: Decomposition) -> Result<ScatterSolution> {
        let wave = self.wave()?;
        let profile = self.profile()?;
        let opts = self.solve_options();
        match method {
            Decomposition::QP => solve_qp(mesh, &wave, &profile, &opts),
            Decomposition::UQ => solve_uq(mesh, &wave, &profile, &opts),
            Decomposition::DecoupledQP => solve_decoupled(mesh, &wave, &profile, &opts),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MethodSummary {
    pub method: Decomposition,
    pub residual: f64,
    pub events: Vec<String>,
    pub u_l2_omega: f64,
    pub du_l2_omega: f64,
    pub u_l2_pml1: f64,
    pub u_l2_pml2: f64,
    pub u_trace_h1: f64,
    pub u_trace_h2: f64,
    pub u_max_omega: f64,
    pub u_max_outer_band_lower: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioSummary {
    pub schema_version: u32,
    pub config: ScenarioConfig,
    pub node_count: usize,
    pub triangle_count: usize,
    pub mesh_quality: MeshQuality,
    pub pml_valid: bool,
    pub pml_restriction_lhs: f64,
    pub pml_restriction_rhs: f64,
    pub theta_constant: f64,
    pub garding_c1: f64,
    pub garding_c2: f64,
    pub methods: Vec<MethodSummary>,
}

pub struct ScenarioOutput {
    pub summary: ScenarioSummary,
    pub mesh: Mesh,
    pub solutions: Vec<ScatterSolution>,
}

/// Runs every configured method on one mesh and collects the summary.
pub fn run_scenario(config: &ScenarioConfig, allow_invalid_pml: bool) -> Result<ScenarioOutput> {
    config.validate(allow_invalid_pml)?;
    let mesh = config.build_mesh()?;
    let material = config.material()?;
    let profile = config.profile()?;
    let wave = config.wave()?;
    let basis = make_mode_basis(&wave, config.lambda, config.n_modes)?;
    let validation = profile.validate(&material);
    let garding = profile.garding_constants(&material);
    let mut methods = Vec::new();
    let mut solutions = Vec::new();
    for &method in &config.methods {
        let sol = config.solve_method(&mesh, method)?;
        methods.push(MethodSummary {
            method,
            residual: sol.residual,
            events: sol.events.clone(),
            u_l2_omega: l2_norm(&mesh, &sol.u, RegionSelect::Omega),
            du_l2_omega: l2_norm(&mesh, &sol.du, RegionSelect::Omega),
            u_l2_pml1: l2_norm(&mesh, &sol.u, RegionSelect::Pml1),
            u_l2_pml2: l2_norm(&mesh, &sol.u, RegionSelect::Pml2),
            u_trace_h1: trace_l2(&mesh, &sol.u, config.h1)?,
            u_trace_h2: trace_l2(&mesh, &sol.u, config.h2)?,
            u_max_omega: max_abs(&mesh, &sol.u, RegionSelect::Omega),
            u_max_outer_band_lower: max_abs(
                &mesh,
                &sol.u,
                RegionSelect::OuterBand { region: crate::mesh::Region::Pml2, fraction: 0.2 },
            ),
        });
        solutions.push(sol);
    }
    let summary = ScenarioSummary {
        schema_version: SCHEMA_VERSION,
        config: config.clone(),
        node_count: mesh.node_count(),
        triangle_count: mesh.triangles.len(),
        mesh_quality: mesh.quality(),
        pml_valid: validation.ok,
        pml_restriction_lhs: validation.lhs,
        pml_restriction_rhs: validation.rhs,
        theta_constant: theta(&basis, &profile),
        garding_c1: garding.c1,
        garding_c2: garding.c2,
        methods,
    };
    Ok(ScenarioOutput { summary, mesh, solutions })
}

// --- convergence study ------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub schema_version: u32,
    pub method: Decomposition,
    pub reference_method: Decomposition,
    pub h_ref: f64,
    pub h_values: Vec<f64>,
    pub errors_u: Vec<f64>,
    pub errors_du: Vec<f64>,
    pub slope_u: f64,
    pub slope_du: f64,
}

fn fit_slope(h: &[f64], e: &[f64]) -> f64 {
    let n = h.len() as f64;
    let lx: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    let sx: f64 = lx.iter().sum();
    let sy: f64 = ly.iter().sum();
    let sxx: f64 = lx.iter().map(|v| v * v).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| a * b).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Relative L2-in-Omega difference between a solution field sampled on a
/// reference mesh and the reference field itself.
fn relative_field_error(
    coarse_mesh: &Mesh,
    coarse_field: &[Complex64],
    ref_mesh: &Mesh,
    ref_field: &[Complex64],
) -> f64 {
    let sampler = FieldSampler::new(coarse_mesh);
    let diff: Vec<Complex64> = ref_mesh
        .nodes
        .iter()
        .zip(ref_field)
        .map(|(p, r)| sampler.eval(coarse_field, *p) - r)
        .collect();
    l2_norm(ref_mesh, &diff, RegionSelect::Omega) / l2_norm(ref_mesh, ref_field, RegionSelect::Omega)
}

/// Mesh-refinement study against a fine reference solve, compared by
/// interpolation at the reference nodes.
pub fn convergence_study(
    config: &ScenarioConfig,
    h_values: &[f64],
    h_ref: f64,
    method: Decomposition,
    reference_method: Decomposition,
    threads: usize,
) -> Result<ConvergenceReport> {
    if h_values.iter().any(|&h| h_ref >= h) {
        return Err(Error::Config(format!(
            "reference size {h_ref} must be finer than every study size"
        )));
    }
    let ref_cfg = ScenarioConfig { h: h_ref, ..config.clone() };
    let ref_mesh = ref_cfg.build_mesh()?;
    let ref_sol = ref_cfg.solve_method(&ref_mesh, reference_method)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let results: Vec<Result<(f64, f64, f64)>> = pool.install(|| {
        use rayon::prelude::*;
        h_values
            .par_iter()
            .map(|&h| {
                let cfg = ScenarioConfig { h, ..config.clone() };
                let mesh = cfg.build_mesh()?;
                let sol = cfg.solve_method(&mesh, method)?;
                let eu = relative_field_error(&mesh, &sol.u, &ref_mesh, &ref_sol.u);
                let edu = relative_field_error(&mesh, &sol.du, &ref_mesh, &ref_sol.du);
                Ok((h, eu, edu))
            })
            .collect()
    });
    let mut rows = Vec::new();
    for r in results {
        rows.push(r?);
    }
    rows.sort_by(|a, b| b.0.total_cmp(&a.0));
    let h_sorted: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let errors_u: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let errors_du: Vec<f64> = rows.iter().map(|r| r.2).collect();
    Ok(ConvergenceReport {
        schema_version: SCHEMA_VERSION,
        method,
        reference_method,
        h_ref,
        slope_u: fit_slope(&h_sorted, &errors_u),
        slope_du: fit_slope(&h_sorted, &errors_du),
        h_values: h_sorted,
        errors_u,
        errors_du,
    })
}

// --- layer parameter study ------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PmlSweep {
    Thickness,
    Sigma2,
}

#[derive(Debug, Clone, Serialize)]
pub struct PmlStudyRow {
    pub value: f64,
    pub theta_constant: f64,
    /// Relative L2(Omega) difference against the strongest-layer solution.
    pub proxy_error: f64,
    /// Largest nodal |u| over the outer fifth of the lower layer.
    pub outer_band_level: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PmlStudyReport {
    pub schema_version: u32,
    pub sweep: PmlSweep,
    pub method: Decomposition,
    pub rows: Vec<PmlStudyRow>,
    /// log(proxy) vs log(theta) slope over the decaying rows.
    pub slope: f64,
}

/// Sweeps a layer parameter at fixed mesh size; the strongest configuration
/// serves as the converged-layer surrogate.
pub fn pml_study(
    config: &ScenarioConfig,
    sweep: PmlSweep,
    values: &[f64],
    method: Decomposition,
    threads: usize,
) -> Result<PmlStudyReport> {
    if values.len() < 2 {
        return Err(Error::Config("sweep needs at least two values".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let strongest = *sorted.last().unwrap();
    let cfg_of = |v: f64| -> ScenarioConfig {
        match sweep {
            PmlSweep::Thickness => ScenarioConfig { dh1: v, dh2: v, ..config.clone() },
            PmlSweep::Sigma2 => ScenarioConfig { sigma2: v, ..config.clone() },
        }
    };
    let ref_cfg = cfg_of(strongest);
    let ref_mesh = ref_cfg.build_mesh()?;
    let ref_sol = ref_cfg.solve_method(&ref_mesh, method)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let results: Vec<Result<PmlStudyRow>> = pool.install(|| {
        use rayon::prelude::*;
        sorted
            .par_iter()
            .map(|&v| {
                let cfg = cfg_of(v);
                let wave = cfg.wave()?;
                let basis = make_mode_basis(&wave, cfg.lambda, cfg.n_modes)?;
                let th = theta(&basis, &cfg.profile()?);
                let (proxy, outer) = if v == strongest {
                    let outer = max_abs(
                        &ref_mesh,
                        &ref_sol.u,
                        RegionSelect::OuterBand { region: crate::mesh::Region::Pml2, fraction: 0.2 },
                    );
                    (0.0, outer)
                } else {
                    let mesh = cfg.build_mesh()?;
                    let sol = cfg.solve_method(&mesh, method)?;
                    let sampler = FieldSampler::new(&mesh);
                    let diff: Vec<Complex64> = ref_mesh
                        .nodes
                        .iter()
                        .zip(&ref_sol.u)
                        .map(|(p, r)| sampler.eval(&sol.u, *p) - r)
                        .collect();
                    let proxy = l2_norm(&ref_mesh, &diff, RegionSelect::Omega)
                        / l2_norm(&ref_mesh, &ref_sol.u, RegionSelect::Omega);
                    let outer = max_abs(
                        &mesh,
                        &sol.u,
                        RegionSelect::OuterBand { region: crate::mesh::Region::Pml2, fraction: 0.2 },
                    );
                    (proxy, outer)
                };
                Ok(PmlStudyRow { value: v, theta_constant: th, proxy_error: proxy, outer_band_level: outer })
            })
            .collect()
    });
    let mut rows = Vec::new();
    for r in results {
        rows.push(r?);
    }
    rows.sort_by(|a, b| a.value.total_cmp(&b.value));
    let decaying: Vec<&PmlStudyRow> = rows.iter().filter(|r| r.proxy_error > 0.0).collect();
    let slope = if decaying.len() >= 2 {
        let th: Vec<f64> = decaying.iter().map(|r| r.theta_constant).collect();
        let pe: Vec<f64> = decaying.iter().map(|r| r.proxy_error).collect();
        fit_slope(&th, &pe)
    } else {
        f64::NAN
    };
    Ok(PmlStudyReport { schema_version: SCHEMA_VERSION, sweep, method, rows, slope })
}

// --- method comparison ------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct CompareReport {
    pub schema_version: u32,
    pub h: f64,
    pub methods: Vec<Decomposition>,
    /// Pairwise relative L2(Omega) differences of u, row-major.
    pub diff_u: Vec<Vec<f64>>,
    /// Same for the bending moment.
    pub diff_du: Vec<Vec<f64>>,
}

/// Runs all three splits on one mesh and tabulates pairwise differences.
pub fn compare_decompositions(config: &ScenarioConfig) -> Result<CompareReport> {
    let methods = [Decomposition::QP, Decomposition::UQ, Decomposition::DecoupledQP];
    let mesh = config.build_mesh()?;
    let sols: Vec<ScatterSolution> =
        methods.iter().map(|&m| config.solve_method(&mesh, m)).collect::<Result<_>>()?;
    let rel = |a: &[Complex64], b: &[Complex64]| -> f64 {
        let diff: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        let scale = 0.5 * (l2_norm(&mesh, a, RegionSelect::Omega) + l2_norm(&mesh, b, RegionSelect::Omega));
        l2_norm(&mesh, &diff, RegionSelect::Omega) / scale
    };
    let mut diff_u = vec![vec![0.0; 3]; 3];
    let mut diff_du = vec![vec![0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            diff_u[i][j] = rel(&sols[i].u, &sols[j].u);
            diff_du[i][j] = rel(&sols[i].du, &sols[j].du);
        }
    }
    Ok(CompareReport {
        schema_version: SCHEMA_VERSION,
        h: config.h,
        methods: methods.to_vec(),
        diff_u,
        diff_du,
    })
}

// --- file output ------------------------------------------------------------

pub fn fields_csv(mesh: &Mesh, sol: &ScatterSolution) -> String {
    let mut out = String::from("x1,x2,re_u,im_u,re_du,im_du\n");
    for (p, (u, du)) in mesh.nodes.iter().zip(sol.u.iter().zip(&sol.du)) {
        out.push_str(&format!(
            "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}\n",
            p[0], p[1], u.re, u.im, du.re, du.im
        ));
    }
    out
}

pub fn modes_csv(basis: &crate::spectral::ModeBasis) -> String {
    let mut out = String::from("n,alpha_n,re_beta_n,im_beta_n,gamma_n\n");
    for m in basis.modes() {
        out.push_str(&format!(
            "{},{:.12e},{:.12e},{:.12e},{:.12e}\n",
            m.n, m.alpha_n, m.beta_n.re, m.beta_n.im, m.gamma_n
        ));
    }
    out
}

/// Legacy-format mesh-plus-fields dump for visualization tools.
pub fn fields_vtk(mesh: &Mesh, sol: &ScatterSolution) -> String {
    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\n");
    out.push_str("plate wave scattering fields\n");
    out.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");
    out.push_str(&format!("POINTS {} double\n", mesh.node_count()));
    for p in &mesh.nodes {
        out.push_str(&format!("{:.9e} {:.9e} 0.0\n", p[0], p[1]));
    }
    out.push_str(&format!("CELLS {} {}\n", mesh.triangles.len(), 4 * mesh.triangles.len()));
    for t in &mesh.triangles {
        out.push_str(&format!("3 {} {} {}\n", t[0], t[1], t[2]));
    }
    out.push_str(&format!("CELL_TYPES {}\n", mesh.triangles.len()));
    for _ in &mesh.triangles {
        out.push_str("5\n");
    }
    out.push_str(&format!("POINT_DATA {}\n", mesh.node_count()));
    for (name, values) in [
        ("abs_u", sol.u.iter().map(|v| v.norm()).collect::<Vec<_>>()),
        ("abs_du", sol.du.iter().map(|v| v.norm()).collect::<Vec<_>>()),
        ("re_u", sol.u.iter().map(|v| v.re).collect::<Vec<_>>()),
        ("re_du", sol.du.iter().map(|v| v.re).collect::<Vec<_>>()),
    ] {
        out.push_str(&format!("SCALARS {name} double 1\nLOOKUP_TABLE default\n"));
        for v in values {
            out.push_str(&format!("{v:.9e}\n"));
        }
    }
    out
}
