//! Explicit trace liftings on a periodic strip `[0, Lambda] x [0, h]`.
//!
//! Two families are built mode by mode: a Hermite-window construction that
//! lifts Dirichlet data from one horizontal wall with zero normal derivative
//! on both walls, and a per-mode fourth-order ODE solution that lifts Neumann
//! data with zero values on both walls. Both come with evaluators for the
//! function and its first and second derivatives plus norm diagnostics, so
//! the advertised stability bounds can be measured rather than assumed.

use num_complex::Complex64;

use crate::spectral::TraceCoefficients;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LiftCase {
    /// Dirichlet data on the top wall `x2 = h`.
    DirichletTop,
    /// Dirichlet data on the bottom wall `x2 = 0`.
    DirichletBottom,
    /// Neumann data on the top wall.
    NeumannTop,
}

#[derive(Debug, Clone, Copy)]
struct ExpTerm {
    /// Affine factor `a + b x2`.
    a: f64,
    b: f64,
    /// Sign of `alpha_n x2` in the exponent.
    sign: f64,
    /// Constant part of the exponent, already shift-normalized so that the
    /// whole exponent stays nonpositive on `[0, h]`.
    c: f64,
}

#[derive(Debug, Clone)]
enum ModeKind {
    /// Window polynomial times `g_n` profile (Dirichlet cases).
    Hermite,
    /// Four-term exponential solution of the mode ODE; `lam_hat` is the
    /// denominator scaled by the same shift as the term exponents.
    Exp { terms: [ExpTerm; 4], lam_hat: f64 },
    /// `alpha_n = 0` branch of the Neumann lift: a plain cubic.
    Cubic,
}

#[derive(Debug, Clone)]
struct LiftMode {
    n: i32,
    alpha_n: f64,
    phi: Complex64,
    kind: ModeKind,
}

#[derive(Debug, Clone)]
pub struct LiftEvaluator {
    pub case: LiftCase,
    pub h: f64,
    pub lattice: f64,
    modes: Vec<LiftMode>,
}

/// Denominator of the Neumann-lift coefficients,
/// `2 e^{2ah} - e^{4ah} + 4 a^2 h^2 e^{2ah} - 1` with `a = alpha_n`.
/// Nonzero for every nonzero argument; numerically negative on both
/// branches (the Taylor expansion at 0 starts with `-4 t^4 / 3`).
pub fn lambda_n(alpha_n: f64, h: f64) -> f64 {
    let t = alpha_n * h;
    2.0 * (2.0 * t).exp() - (4.0 * t).exp() + 4.0 * t * t * (2.0 * t).exp() - 1.0
}

/// `lambda_n e^{-max(4 alpha_n h, 0)}`: same sign, safe for large arguments.
fn lambda_hat(alpha_n: f64, h: f64) -> f64 {
    let t = alpha_n * h;
    if t > 0.0 {
        2.0 * (-2.0 * t).exp() - 1.0 + 4.0 * t * t * (-2.0 * t).exp() - (-4.0 * t).exp()
    } else {
        lambda_n(alpha_n, h)
    }
}

/// Where the sine correction of the top-Dirichlet profile switches on.
fn kink_top(n: i32, h: f64) -> f64 {
    if n == 0 {
        0.0
    } else {
        (h - 2.0 * std::f64::consts::PI / n.abs() as f64).max(0.0)
    }
}

/// Where the sine correction of the bottom-Dirichlet profile switches off.
fn kink_bottom(n: i32, h: f64) -> f64 {
    if n == 0 {
        h
    } else {
        h.min(2.0 * std::f64::consts::PI / n.abs() as f64)
    }
}

impl LiftEvaluator {
    /// Hermite window and two derivatives: value one and slope zero at the
    /// data wall, value and slope zero at the opposite wall.
    fn window(&self, x2: f64) -> (f64, f64, f64) {
        let h = self.h;
        match self.case {
            LiftCase::DirichletTop => {
                let l = (3.0 * h - 2.0 * x2) * x2 * x2 / h.powi(3);
                let l1 = 6.0 * x2 / (h * h) - 6.0 * x2 * x2 / h.powi(3);
                let l2 = 6.0 / (h * h) - 12.0 * x2 / h.powi(3);
                (l, l1, l2)
            }
            LiftCase::DirichletBottom => {
                let l = (h + 2.0 * x2) * (x2 - h) * (x2 - h) / h.powi(3);
                let l1 = 6.0 * x2 * (x2 - h) / h.powi(3);
                let l2 = (12.0 * x2 - 6.0 * h) / h.powi(3);
                (l, l1, l2)
            }
            LiftCase::NeumannTop => unreachable!("no window in the Neumann case"),
        }
    }

    /// Mode profile `u_n` and its first two x2-derivatives.
    fn mode_profile(&self, mode: &LiftMode, x2: f64) -> (Complex64, Complex64, Complex64) {
        match &mode.kind {
            ModeKind::Hermite => {
                let nn = mode.n.abs() as f64;
                let (g, g1, g2) = match self.case {
                    LiftCase::DirichletTop => {
                        let d = self.h - x2;
                        let e = (-nn * d).exp();
                        let active = mode.n != 0 && x2 > kink_top(mode.n, self.h);
                        let (s, c) = if active { ((nn * d).sin(), (nn * d).cos()) } else { (0.0, 0.0) };
                        (e + s, nn * e - nn * c, nn * nn * (e - s))
                    }
                    LiftCase::DirichletBottom => {
                        let e = (-nn * x2).exp();
                        let active = mode.n != 0 && x2 < kink_bottom(mode.n, self.h);
                        let (s, c) = if active { ((nn * x2).sin(), (nn * x2).cos()) } else { (0.0, 0.0) };
                        (e + s, -nn * e + nn * c, nn * nn * (e - s))
                    }
                    LiftCase::NeumannTop => unreachable!(),
                };
                let (l, l1, l2) = self.window(x2);
                let u = l * g;
                let u1 = l1 * g + l * g1;
                let u2 = l2 * g + 2.0 * l1 * g1 + l * g2;
                (mode.phi * u, mode.phi * u1, mode.phi * u2)
            }
            ModeKind::Exp { terms, lam_hat } => {
                let a = mode.alpha_n;
                let mut u = 0.0;
                let mut u1 = 0.0;
                let mut u2 = 0.0;
                for t in terms {
                    let w = t.a + t.b * x2;
                    let e = (t.sign * a * x2 + t.c).exp();
                    u += w * e;
                    u1 += (t.b + t.sign * a * w) * e;
                    u2 += (2.0 * t.sign * a * t.b + a * a * w) * e;
                }
                let scale = mode.phi / *lam_hat;
                (scale * u, scale * u1, scale * u2)
            }
            ModeKind::Cubic => {
                let h = self.h;
                let u = x2.powi(3) / (h * h) - x2 * x2 / h;
                let u1 = 3.0 * x2 * x2 / (h * h) - 2.0 * x2 / h;
                let u2 = 6.0 * x2 / (h * h) - 2.0 / h;
                (mode.phi * u, mode.phi * u1, mode.phi * u2)
            }
        }
    }

    pub fn value(&self, x1: f64, x2: f64) -> Complex64 {
        self.modes
            .iter()
            .map(|m| self.mode_profile(m, x2).0 * (Complex64::i() * m.alpha_n * x1).exp())
            .sum()
    }

    /// Gradient `(du/dx1, du/dx2)`.
    pub fn grad(&self, x1: f64, x2: f64) -> (Complex64, Complex64) {
        let mut g1 = Complex64::new(0.0, 0.0);
        let mut g2 = Complex64::new(0.0, 0.0);
        for m in &self.modes {
            let ph = (Complex64::i() * m.alpha_n * x1).exp();
            let (u, u1, _) = self.mode_profile(m, x2);
            g1 += Complex64::i() * m.alpha_n * u * ph;
            g2 += u1 * ph;
        }
        (g1, g2)
    }

    /// Second derivatives `(u_{x1 x1}, u_{x1 x2}, u_{x2 x2})`.
    pub fn second_derivatives(&self, x1: f64, x2: f64) -> (Complex64, Complex64, Complex64) {
        let mut d11 = Complex64::new(0.0, 0.0);
        let mut d12 = Complex64::new(0.0, 0.0);
        let mut d22 = Complex64::new(0.0, 0.0);
        for m in &self.modes {
            let ph = (Complex64::i() * m.alpha_n * x1).exp();
            let (u, u1, u2) = self.mode_profile(m, x2);
            d11 -= m.alpha_n * m.alpha_n * u * ph;
            d12 += Complex64::i() * m.alpha_n * u1 * ph;
            d22 += u2 * ph;
        }
        (d11, d12, d22)
    }

    /// Per-mode profile `(u_n, u_n', u_n'')` for diagnostics.
    pub fn mode_values(&self, n: i32, x2: f64) -> (Complex64, Complex64, Complex64) {
        let m = self.modes.iter().find(|m| m.n == n).expect("mode not in evaluator");
        self.mode_profile(m, x2)
    }

    pub fn mode_indices(&self) -> impl Iterator<Item = i32> + '_ {
        self.modes.iter().map(|m| m.n)
    }

    fn kinks(&self, n: i32) -> Option<f64> {
        let k = match self.case {
            LiftCase::DirichletTop => kink_top(n, self.h),
            LiftCase::DirichletBottom => kink_bottom(n, self.h),
            LiftCase::NeumannTop => return None,
        };
        (k > 0.0 && k < self.h).then_some(k)
    }

    /// Full `H^2` norm over the strip from the mode representation, with
    /// 64-point Gauss panels split at each profile kink.
    pub fn h2_norm(&self) -> f64 {
        let (nodes, weights) = gauss_legendre(64);
        let mut acc = 0.0;
        for m in &self.modes {
            let mut panels = vec![0.0];
            panels.extend(self.kinks(m.n));
            panels.push(self.h);
            let a2 = m.alpha_n * m.alpha_n;
            for w in panels.windows(2) {
                let half = 0.5 * (w[1] - w[0]);
                let mid = 0.5 * (w[1] + w[0]);
                for (x, wq) in nodes.iter().zip(weights.iter()) {
                    let (u, u1, u2) = self.mode_profile(m, mid + half * x);
                    let val = (1.0 + a2 + a2 * a2) * u.norm_sqr()
                        + (1.0 + 2.0 * a2) * u1.norm_sqr()
                        + u2.norm_sqr();
                    acc += half * wq * val;
                }
            }
        }
        (self.lattice * acc).sqrt()
    }

    /// Weighted trace norm of the stored data coefficients.
    pub fn data_norm(&self, s: f64) -> f64 {
        let acc: f64 = self
            .modes
            .iter()
            .map(|m| (1.0 + m.alpha_n * m.alpha_n).powf(s) * m.phi.norm_sqr())
            .sum();
        (self.lattice * acc).sqrt()
    }

    /// `||u||_{H^2(strip)} / ||phi||_{H^s(wall)}`.
    pub fn stability_ratio(&self, s: f64) -> f64 {
        self.h2_norm() / self.data_norm(s)
    }
}

/// Dirichlet-data lift: Hermite window times decaying mode profiles.
pub fn lift_dirichlet(phi: &TraceCoefficients, lattice: f64, alpha: f64, h: f64, top: bool) -> LiftEvaluator {
    let case = if top { LiftCase::DirichletTop } else { LiftCase::DirichletBottom };
    let modes = (-phi.n_max..=phi.n_max)
        .map(|n| LiftMode {
            n,
            alpha_n: alpha + 2.0 * std::f64::consts::PI * n as f64 / lattice,
            phi: phi.at(n),
            kind: ModeKind::Hermite,
        })
        .collect();
    LiftEvaluator { case, h, lattice, modes }
}

/// Neumann-data lift: per-mode solution of the fourth-order interface ODE
/// with the closed-form coefficient vector. Panics only if a denominator
/// underflows to zero, which the sign analysis rules out.
pub fn lift_neumann(phi: &TraceCoefficients, lattice: f64, alpha: f64, h: f64) -> LiftEvaluator {
    let modes = (-phi.n_max..=phi.n_max)
        .map(|n| {
            let alpha_n = alpha + 2.0 * std::f64::consts::PI * n as f64 / lattice;
            let kind = if alpha_n == 0.0 {
                ModeKind::Cubic
            } else {
                let lam_hat = lambda_hat(alpha_n, h);
                assert!(
                    lam_hat.abs() >= 1e-300,
                    "mode denominator vanished at alpha_n = {alpha_n}, h = {h}"
                );
                let a = alpha_n;
                let shift = (4.0 * a * h).max(0.0);
                let terms = [
                    ExpTerm { a: h, b: -1.0, sign: 1.0, c: 3.0 * a * h - shift },
                    ExpTerm { a: -h, b: 1.0 + 2.0 * a * h, sign: 1.0, c: a * h - shift },
                    ExpTerm { a: -h, b: 1.0 - 2.0 * a * h, sign: -1.0, c: 3.0 * a * h - shift },
                    ExpTerm { a: h, b: -1.0, sign: -1.0, c: a * h - shift },
                ];
                ModeKind::Exp { terms, lam_hat }
            };
            LiftMode { n, alpha_n, phi: phi.at(n), kind }
        })
        .collect();
    LiftEvaluator { case: LiftCase::NeumannTop, h, lattice, modes }
}

/// Closed-form coefficient vector of the Neumann mode solution in the raw
/// exponential basis. Overflows for large `alpha_n h`; intended for moderate
/// arguments such as the coefficient-system residual check.
pub fn neumann_coefficients(alpha_n: f64, h: f64, phi_n: Complex64) -> [Complex64; 4] {
    let lam = lambda_n(alpha_n, h);
    let e = (alpha_n * h).exp();
    let e2 = (2.0 * alpha_n * h).exp();
    [
        phi_n * h * e * (e2 - 1.0) / lam,
        phi_n * e * (2.0 * alpha_n * h - e2 + 1.0) / lam,
        -phi_n * h * e * (e2 - 1.0) / lam,
        -phi_n * e * (2.0 * alpha_n * h * e2 - e2 + 1.0) / lam,
    ]
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::TraceCoefficients;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const ALPHA: f64 = 2.7206990463513265; // kappa = pi, theta = pi/3

    fn delta(n_max: i32, n: i32) -> TraceCoefficients {
        TraceCoefficients::delta(1, n_max, n, Complex64::new(1.0, 0.0))
    }

    fn random_trace(n_max: i32, seed: u64) -> TraceCoefficients {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = TraceCoefficients::zero(1, n_max);
        for n in -n_max..=n_max {
            *t.at_mut(n) = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
        t
    }

    fn trace_value(t: &TraceCoefficients, lattice: f64, alpha: f64, x1: f64) -> Complex64 {
        (-t.n_max..=t.n_max)
            .map(|n| {
                let an = alpha + 2.0 * std::f64::consts::PI * n as f64 / lattice;
                t.at(n) * (Complex64::i() * an * x1).exp()
            })
            .sum()
    }

    #[test]
    fn window_midpoint_value() {
        let lift = lift_dirichlet(&delta(0, 0), 1.0, 0.0, 1.0, true);
        let (l, _, _) = lift.window(0.5);
        assert!((l - 0.5).abs() < 1e-15);
    }

    #[test]
    fn kink_location_example() {
        // h = 1, n = 3: h - 2 pi / 3 < 0, so the correction is active on all of (0, 1]
        assert_eq!(kink_top(3, 1.0), 0.0);
        assert!((kink_top(10, 1.0) - (1.0 - 0.2 * std::f64::consts::PI)).abs() < 1e-15);
    }

    #[test]
    fn dirichlet_top_boundary_identities() {
        let phi = random_trace(8, 3);
        let lift = lift_dirichlet(&phi, 1.0, ALPHA, 1.0, true);
        for k in 0..100 {
            let x1 = k as f64 / 100.0;
            let want = trace_value(&phi, 1.0, ALPHA, x1);
            assert!((lift.value(x1, 1.0) - want).norm() < 1e-12 * want.norm().max(1.0));
            assert!(lift.value(x1, 0.0).norm() < 1e-12);
            let (_, d2) = lift.grad(x1, 1.0);
            assert!(d2.norm() < 1e-11 * want.norm().max(1.0));
            let (_, d2) = lift.grad(x1, 0.0);
            assert!(d2.norm() < 1e-12);
        }
    }

    #[test]
    fn dirichlet_bottom_boundary_identities() {
        let phi = random_trace(6, 5);
        let lift = lift_dirichlet(&phi, 1.0, ALPHA, 1.0, false);
        for k in 0..100 {
            let x1 = k as f64 / 100.0;
            let want = trace_value(&phi, 1.0, ALPHA, x1);
            assert!((lift.value(x1, 0.0) - want).norm() < 1e-12 * want.norm().max(1.0));
            assert!(lift.value(x1, 1.0).norm() < 1e-12);
            let (_, d2) = lift.grad(x1, 0.0);
            assert!(d2.norm() < 1e-11 * want.norm().max(1.0));
            let (_, d2) = lift.grad(x1, 1.0);
            assert!(d2.norm() < 1e-12);
        }
    }

    #[test]
    fn neumann_boundary_identities() {
        let phi = random_trace(8, 7);
        let lift = lift_neumann(&phi, 1.0, ALPHA, 1.0);
        for k in 0..100 {
            let x1 = k as f64 / 100.0;
            let want = trace_value(&phi, 1.0, ALPHA, x1);
            assert!(lift.value(x1, 0.0).norm() < 1e-12 * want.norm().max(1.0));
            assert!(lift.value(x1, 1.0).norm() < 1e-12 * want.norm().max(1.0));
            let (_, d2) = lift.grad(x1, 1.0);
            assert!((d2 - want).norm() < 1e-11 * want.norm().max(1.0));
            let (_, d2) = lift.grad(x1, 0.0);
            assert!(d2.norm() < 1e-12 * want.norm().max(1.0));
        }
    }

    #[test]
    fn neumann_zero_data_gives_zero() {
        let lift = lift_neumann(&TraceCoefficients::zero(1, 5), 1.0, ALPHA, 1.0);
        for (x1, x2) in [(0.1, 0.3), (0.8, 0.9), (0.5, 0.01)] {
            assert_eq!(lift.value(x1, x2), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn lambda_values() {
        let e2 = std::f64::consts::E * std::f64::consts::E;
        let want = 6.0 * e2 - e2 * e2 - 1.0;
        assert!((lambda_n(1.0, 1.0) - want).abs() < 1e-10);
        assert!((lambda_n(-1.0, 1.0) + 0.206303939469058).abs() < 1e-12);
    }

    #[test]
    fn lambda_nonzero_and_sign_fixed() {
        // Observed sign: negative on both branches (the per-branch sign
        // labels quoted alongside the formula disagree with the formula).
        for &h in &[0.5, 1.0, 2.5] {
            for n in 1..=50 {
                for s in [-1.0, 1.0] {
                    let an = s * 2.0 * std::f64::consts::PI * n as f64;
                    let lh = lambda_hat(an, h);
                    assert!(lh < 0.0, "lambda sign at alpha_n = {an}, h = {h}: {lh}");
                    assert!(lh.abs() > 1e-300);
                }
            }
        }
    }

    #[test]
    fn cubic_branch_values() {
        let phi = delta(0, 0); // alpha = 0 selects the cubic branch
        let lift = lift_neumann(&phi, 1.0, 0.0, 1.0);
        let (u, u1, _) = lift.mode_values(0, 0.5);
        assert!((u - Complex64::new(-0.125, 0.0)).norm() < 1e-15);
        assert!((u1 - Complex64::new(-0.25, 0.0)).norm() < 1e-15);
        let (uh, u1h, _) = lift.mode_values(0, 1.0);
        assert!(uh.norm() < 1e-15);
        assert!((u1h - Complex64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn coefficient_system_residual() {
        // substitute the closed forms back into the 4x4 interface system
        for n in [-5, -2, -1, 1, 2, 4] {
            for &h in &[0.5, 1.0] {
                let an = ALPHA + 2.0 * std::f64::consts::PI * n as f64;
                let c = neumann_coefficients(an, h, Complex64::new(1.0, 0.0));
                let e = (an * h).exp();
                let em = (-an * h).exp();
                let rows: [[f64; 4]; 4] = [
                    [1.0, 0.0, 1.0, 0.0],
                    [an, 1.0, -an, 1.0],
                    [e, h * e, em, h * em],
                    [an * e, (1.0 + an * h) * e, -an * em, (1.0 - an * h) * em],
                ];
                let rhs = [0.0, 0.0, 0.0, 1.0];
                for (i, row) in rows.iter().enumerate() {
                    let got: Complex64 = row.iter().zip(c.iter()).map(|(r, c)| *c * *r).sum();
                    let scale: f64 = row
                        .iter()
                        .zip(c.iter())
                        .map(|(r, c)| (c * *r).norm())
                        .fold(1.0f64, f64::max);
                    assert!(
                        (got - Complex64::new(rhs[i], 0.0)).norm() <= 1e-10 * scale,
                        "row {i}, n = {n}, h = {h}: residual {}",
                        (got - Complex64::new(rhs[i], 0.0)).norm() / scale
                    );
                }
            }
        }
    }

    #[test]
    fn mode_ode_residual_by_finite_differences() {
        // finite-difference fourth derivative of the closed form against the
        // lower-order terms of the mode ODE
        let phi = random_trace(6, 11);
        let lift = lift_neumann(&phi, 1.0, ALPHA, 1.0);
        let coeffs = [
            7.0 / 240.0,
            -2.0 / 5.0,
            169.0 / 60.0,
            -122.0 / 15.0,
            91.0 / 8.0,
            -122.0 / 15.0,
            169.0 / 60.0,
            -2.0 / 5.0,
            7.0 / 240.0,
        ];
        for n in -6..=6 {
            let an = ALPHA + 2.0 * std::f64::consts::PI * n as f64;
            let step = 0.054 / an.abs().max(1.0);
            for &x2 in &[0.3, 0.5, 0.7] {
                let mut d4 = Complex64::new(0.0, 0.0);
                for (k, c) in coeffs.iter().enumerate() {
                    let off = (k as f64 - 4.0) * step;
                    d4 += *c * lift.mode_values(n, x2 + off).0;
                }
                d4 /= step.powi(4);
                let (u, _, u2) = lift.mode_values(n, x2);
                let residual = d4 - 2.0 * an * an * u2 + an.powi(4) * u;
                let scale = d4.norm().max(an.powi(4) * u.norm()).max(1e-3);
                assert!(
                    residual.norm() <= 1e-8 * scale,
                    "n = {n}, x2 = {x2}: rel residual {}",
                    residual.norm() / scale
                );
            }
        }
    }

    #[test]
    fn stability_ratio_homogeneous_and_regression() {
        let phi = delta(4, 0);
        let lift = lift_neumann(&phi, 1.0, ALPHA, 1.0);
        let r = lift.stability_ratio(0.5);
        // frozen from an independent quadrature of the same closed form
        assert!((r - 1.4560906283765889).abs() < 1e-6, "ratio {r}");

        let mut scaled = TraceCoefficients::zero(1, 4);
        *scaled.at_mut(0) = Complex64::new(-3.7, 1.9);
        let lift2 = lift_neumann(&scaled, 1.0, ALPHA, 1.0);
        assert!((lift2.stability_ratio(0.5) - r).abs() < 1e-12);
    }

    #[test]
    fn stability_ratio_stable_under_truncation_growth() {
        let mut max30 = 0.0f64;
        let mut max60 = 0.0f64;
        for seed in 0..100 {
            let t30 = random_trace(30, seed);
            let r30 = lift_neumann(&t30, 1.0, ALPHA, 1.0).stability_ratio(0.5);
            max30 = max30.max(r30);
            // same draw on the first 30 modes, zeros beyond
            let mut t60 = TraceCoefficients::zero(1, 60);
            for n in -30..=30 {
                *t60.at_mut(n) = t30.at(n);
            }
            let r60 = lift_neumann(&t60, 1.0, ALPHA, 1.0).stability_ratio(0.5);
            max60 = max60.max(r60);
        }
        assert!(max30.is_finite() && max30 > 0.0);
        assert!((max60 - max30).abs() <= 0.1 * max30, "max30 {max30}, max60 {max60}");
    }

    #[test]
    fn dirichlet_stability_ratio_bounded_over_draws() {
        let mut ratios = Vec::new();
        for seed in 0..100 {
            let lift = lift_dirichlet(&random_trace(30, seed), 1.0, ALPHA, 1.0, true);
            ratios.push(lift.stability_ratio(1.5));
        }
        let max = ratios.iter().cloned().fold(0.0f64, f64::max);
        let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(max.is_finite() && min > 0.0);
        assert!(max / min < 1e3);
    }

    #[test]
    fn gauss_rule_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        let integral: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((integral - 2.0 / 15.0).abs() < 1e-13);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-13);
    }
}
