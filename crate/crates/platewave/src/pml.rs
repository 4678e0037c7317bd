//! Complex coordinate stretching for the absorbing layers.
//!
//! The vertical coordinate is stretched by `x2 -> integral of sigma(t)`,
//! where `sigma` equals one in the physical strip `[h2, h1]` and ramps up
//! polynomially inside the two layers. Everything downstream (assembly
//! weights, volume sources, spectral reference fields) evaluates `sigma`
//! and its derivatives through this module.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::IncidentWave;

/// Polynomial stretching profile `sigma(t) = 1 + (sigma1 + i sigma2) r^m`
/// with `r` the normalized depth into the layer.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct PmlProfile {
    pub sigma1: f64,
    pub sigma2: f64,
    pub m: u32,
    /// Top interface height (bottom of the upper layer).
    pub h1: f64,
    /// Bottom interface height (top of the lower layer).
    pub h2: f64,
    /// Upper layer thickness.
    pub dh1: f64,
    /// Lower layer thickness.
    pub dh2: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct MaterialParams {
    /// Wavenumber, positive.
    pub kappa: f64,
    /// Poisson ratio, in (0, 1).
    pub mu: f64,
}

impl MaterialParams {
    pub fn new(kappa: f64, mu: f64) -> Result<Self> {
        if kappa <= 0.0 {
            return Err(Error::Config(format!("kappa must be positive, got {kappa}")));
        }
        if !(0.0 < mu && mu < 1.0) {
            return Err(Error::Config(format!("mu must lie in (0,1), got {mu}")));
        }
        Ok(Self { kappa, mu })
    }
}

/// Outcome of the layer-parameter restriction check. Kept as a report so
/// parameter sweeps can probe the admissibility boundary without aborting.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PmlValidation {
    /// Left side of the restriction, `1 + sigma1`.
    pub lhs: f64,
    /// Right side, `sqrt((3+mu)/(1-mu)) * sigma2`.
    pub rhs: f64,
    /// Whether the exponent requirement `m > 3` holds.
    pub m_ok: bool,
    pub ok: bool,
}

/// Coercivity/compactness constants of the stretched bilinear form,
/// reported as diagnostics.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GardingConstants {
    pub c1: f64,
    pub c2: f64,
    /// The printed formulas are derived under `mu = 1/2` and
    /// `sigma2 = (1 + sigma1)/3`; false when evaluated outside that regime.
    pub assumptions_hold: bool,
}

/// Which stretched operator the volume source applies to the incident wave.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SourceVariant {
    /// Fourth-order operator of the one-field formulation.
    Biharmonic,
    /// Second-order divergence-form operator of the decoupled formulation
    /// (carries the `2 kappa^2` factor and the sigma weight).
    HelmholtzDecoupled,
}

impl PmlProfile {
    pub fn new(sigma1: f64, sigma2: f64, m: u32, h1: f64, h2: f64, dh1: f64, dh2: f64) -> Result<Self> {
        if !(h2 < h1) {
            return Err(Error::Config(format!("h2 = {h2} must be below h1 = {h1}")));
        }
        if dh1 <= 0.0 || dh2 <= 0.0 {
            return Err(Error::Config("layer thicknesses must be positive".into()));
        }
        if m <= 3 {
            return Err(Error::Config(format!("stretching exponent m = {m} must exceed 3")));
        }
        if sigma1 < 0.0 || sigma2 < 0.0 {
            return Err(Error::Config("sigma1, sigma2 must be nonnegative".into()));
        }
        Ok(Self { sigma1, sigma2, m, h1, h2, dh1, dh2 })
    }

    #[inline]
    fn strength(&self) -> Complex64 {
        Complex64::new(self.sigma1, self.sigma2)
    }

    /// Value of sigma at the outer edge of either layer, `1 + sigma1 + i sigma2`.
    #[inline]
    pub fn outer_sigma(&self) -> Complex64 {
        Complex64::new(1.0 + self.sigma1, self.sigma2)
    }

    /// `1 + (sigma1 + i sigma2)/(m+1)`; the stretched thickness of a layer is
    /// this factor times the geometric thickness.
    #[inline]
    pub fn stretch_factor(&self) -> Complex64 {
        Complex64::new(1.0, 0.0) + self.strength() / (self.m as f64 + 1.0)
    }

    pub fn sigma(&self, t: f64) -> Complex64 {
        if t > self.h1 {
            let r = (t - self.h1) / self.dh1;
            Complex64::new(1.0, 0.0) + self.strength() * r.powi(self.m as i32)
        } else if t < self.h2 {
            let r = (self.h2 - t) / self.dh2;
            Complex64::new(1.0, 0.0) + self.strength() * r.powi(self.m as i32)
        } else {
            Complex64::new(1.0, 0.0)
        }
    }

    /// First three derivatives of sigma. All vanish at the interfaces since
    /// m > 3.
    pub fn sigma_derivatives(&self, t: f64) -> (Complex64, Complex64, Complex64) {
        let m = self.m as f64;
        let s = self.strength();
        if t > self.h1 {
            let r = (t - self.h1) / self.dh1;
            let d1 = s * m * r.powi(self.m as i32 - 1) / self.dh1;
            let d2 = s * m * (m - 1.0) * r.powi(self.m as i32 - 2) / (self.dh1 * self.dh1);
            let d3 = s * m * (m - 1.0) * (m - 2.0) * r.powi(self.m as i32 - 3) / self.dh1.powi(3);
            (d1, d2, d3)
        } else if t < self.h2 {
            let r = (self.h2 - t) / self.dh2;
            let d1 = -s * m * r.powi(self.m as i32 - 1) / self.dh2;
            let d2 = s * m * (m - 1.0) * r.powi(self.m as i32 - 2) / (self.dh2 * self.dh2);
            let d3 = -s * m * (m - 1.0) * (m - 2.0) * r.powi(self.m as i32 - 3) / self.dh2.powi(3);
            (d1, d2, d3)
        } else {
            (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
        }
    }

    /// Stretched coordinate, the exact antiderivative of sigma normalized so
    /// that the origin maps to itself.
    pub fn stretched_coordinate(&self, x2: f64) -> Complex64 {
        self.antiderivative(x2) - self.antiderivative(0.0)
    }

    fn antiderivative(&self, x: f64) -> Complex64 {
        let m1 = self.m as f64 + 1.0;
        let s = self.strength();
        let mut v = Complex64::new(x, 0.0);
        if x > self.h1 {
            let r = (x - self.h1) / self.dh1;
            v += s * self.dh1 / m1 * r.powi(self.m as i32 + 1);
        }
        if x < self.h2 {
            let r = (self.h2 - x) / self.dh2;
            v -= s * self.dh2 / m1 * r.powi(self.m as i32 + 1);
        }
        v
    }

    /// Admissibility of (sigma1, sigma2) for the given Poisson ratio:
    /// `1 + sigma1 > sqrt((3+mu)/(1-mu)) * sigma2` along with `m > 3`.
    pub fn validate(&self, material: &MaterialParams) -> PmlValidation {
        let lhs = 1.0 + self.sigma1;
        let rhs = ((3.0 + material.mu) / (1.0 - material.mu)).sqrt() * self.sigma2;
        let m_ok = self.m > 3;
        PmlValidation { lhs, rhs, m_ok, ok: lhs > rhs && m_ok }
    }

    pub fn garding_constants(&self, material: &MaterialParams) -> GardingConstants {
        let s1 = self.sigma1;
        let s2 = self.sigma2;
        let m = self.m as f64;
        let c1 = (7.0f64 / 24.0)
            .min(7.0 / 51.0 * 0.9f64.powi(3) * (1.0 / (1.0 + s1)).powi(3))
            .min(9.0 / 20.0 / ((1.0 + s1) * (1.0 + s1)));
        let c2 = ((31.0 / 7.0 + 51.0 * (1.0 + s1).powi(3) / 7.0 * (10.0f64 / 9.0).powi(3))
            * m
            * m
            * (s1 * s1 + s2 * s2))
            .max(material.kappa * material.kappa * (1.0 + s1));
        let assumptions_hold = (material.mu - 0.5).abs() < 1e-12
            && (s2 - (1.0 + s1) / 3.0).abs() < 1e-12 * (1.0 + s1).max(1.0);
        GardingConstants { c1, c2, assumptions_hold }
    }
}

/// Volume source obtained by applying the stretched operator to the incident
/// plane wave. Supported only in the upper layer; identically zero at and
/// below the top interface.
pub fn source_f(
    x1: f64,
    x2: f64,
    wave: &IncidentWave,
    profile: &PmlProfile,
    variant: SourceVariant,
) -> Complex64 {
    if x2 <= profile.h1 {
        return Complex64::new(0.0, 0.0);
    }
    let a = wave.alpha;
    let b = wave.beta;
    let k2 = wave.kappa * wave.kappa;
    let ui = (Complex64::i() * (a * x1 - b * x2)).exp();
    let sg = profile.sigma(x2);
    let (d1, d2, d3) = profile.sigma_derivatives(x2);
    match variant {
        SourceVariant::HelmholtzDecoupled => {
            // 2 k^2 [ d/dx1(sigma d/dx1 u) + d/dx2(sigma^-1 d/dx2 u) + k^2 sigma u ]
            let bracket = sg * (k2 - a * a) - b * b / sg + Complex64::i() * b * d1 / (sg * sg);
            2.0 * k2 * bracket * ui
        }
        SourceVariant::Biharmonic => {
            // (d11 + D2^2)^2 u - k^4 u on the plane wave, with
            // D2 = (1/sigma) d/dx2 acting on amplitudes a(x2) e^{-i b x2} as
            // a -> (a' - i b a)/sigma.
            let ib = Complex64::i() * b;
            let s2 = sg * sg;
            let s3 = s2 * sg;
            let s4 = s3 * sg;
            let s5 = s4 * sg;
            // A = D2^2(1) and its x2-derivatives.
            let big_a = ib * d1 / s3 - b * b / s2;
            let big_a1 = ib * d2 / s3 - 3.0 * ib * d1 * d1 / s4 + 2.0 * b * b * d1 / s3;
            let big_a2 = ib * d3 / s3 - 9.0 * ib * d1 * d2 / s4 + 12.0 * ib * d1 * d1 * d1 / s5
                + 2.0 * b * b * d2 / s3
                - 6.0 * b * b * d1 * d1 / s4;
            // B = D2^2(A).
            let big_b = (big_a2 - 2.0 * ib * big_a1 - b * b * big_a) / s2 - d1 * (big_a1 - ib * big_a) / s3;
            let a2 = a * a;
            (a2 * a2 - 2.0 * a2 * big_a + big_b - k2 * k2) * ui
        }
    }
}
