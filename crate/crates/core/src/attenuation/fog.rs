//! Fog attenuation by integrating Mie extinction over a modified gamma
//! droplet-size distribution.
//!
//! Radii are in µm and the distribution `N(r) = a·r^α·exp(−b·r)` is a number
//! density per unit radius in cm⁻³·µm⁻¹, so `∫ Q·πr²·N(r) dr` comes out in
//! µm²·cm⁻³. One µm²·cm⁻³ is 10⁻⁸ cm⁻¹, i.e. 10⁻³ km⁻¹ after the 10⁵
//! scaling of the km⁻¹ formula, which is 10⁻⁶ m⁻¹.

use core::cell::Cell;
use core::f64::consts::PI;

use super::{AttenuationCoefficient, ConditionKind, WeatherCondition, WATER_REFRACTIVE_INDEX};
use crate::quadrature::{integrate, ErrorEstimate, QuadratureOptions};
use crate::{Error, Result};

use super::mie::mie_extinction_efficiency;

/// Converts `∫ Q·πr²·N(r) dr` in µm²·cm⁻³ to m⁻¹.
pub const FOG_UNIT_FACTOR: f64 = 1e-6;

/// Upper radius bound: where `r²·N(r)` has fallen to this fraction of its peak.
const TAIL_FRACTION: f64 = 1e-12;

/// Uniform panels per unit of size parameter before adaptive refinement; the
/// Mie interference structure has a period of roughly π/(n′−1) ≈ 9.4 in x.
const PANELS_PER_SIZE_PARAMETER: f64 = 0.5;

pub(crate) const DEFAULT_FOG_QUADRATURE: QuadratureOptions = QuadratureOptions {
    rel_tol: 1e-6,
    abs_tol: 0.0,
    initial_panels: 0,
    max_intervals: 200_000,
    error_estimate: ErrorEstimate::Raw,
};

/// Droplet-size distribution parameters for one fog type.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FogProfile {
    pub alpha: f64,
    /// Scale of the distribution (cm⁻³·µm⁻(α+1)).
    pub a: f64,
    /// Decay rate (µm⁻¹).
    pub b: f64,
    /// Total droplet concentration (cm⁻³).
    pub n_total: f64,
    /// Liquid water content (g/m³). Descriptive only.
    pub liquid_water_g_per_m3: f64,
    /// Modal radius (µm). Descriptive only.
    pub mode_radius_um: f64,
    pub refractive_index_real: f64,
}

impl FogProfile {
    pub const HEAVY_ADVECTION: FogProfile = FogProfile {
        alpha: 3.0,
        a: 0.027,
        b: 0.3,
        n_total: 20.0,
        liquid_water_g_per_m3: 0.37,
        mode_radius_um: 10.0,
        refractive_index_real: WATER_REFRACTIVE_INDEX,
    };

    pub const MODERATE_RADIATION: FogProfile = FogProfile {
        alpha: 6.0,
        a: 607.5,
        b: 3.0,
        n_total: 200.0,
        liquid_water_g_per_m3: 0.02,
        mode_radius_um: 2.0,
        refractive_index_real: WATER_REFRACTIVE_INDEX,
    };

    pub const fn with_refractive_index(mut self, n: f64) -> Self {
        self.refractive_index_real = n;
        self
    }

    /// `N(r)` in cm⁻³·µm⁻¹ for radius `r` in µm.
    pub fn density(&self, radius_um: f64) -> f64 {
        if radius_um <= 0.0 {
            return if self.alpha == 0.0 && radius_um == 0.0 {
                self.a
            } else {
                0.0
            };
        }
        self.a * libm::pow(radius_um, self.alpha) * libm::exp(-self.b * radius_um)
    }

    /// `∫₀^∞ r^k·N(r) dr = a·Γ(α+k+1) / b^(α+k+1)`.
    pub fn moment(&self, k: f64) -> f64 {
        let order = self.alpha + k + 1.0;
        self.a * libm::tgamma(order) / libm::pow(self.b, order)
    }

    /// Total concentration implied by the distribution parameters (cm⁻³).
    pub fn total_concentration(&self) -> f64 {
        self.moment(0.0)
    }

    /// Relative mismatch between [`FogProfile::total_concentration`] and the
    /// tabulated `n_total`.
    pub fn consistency_error(&self) -> f64 {
        (self.total_concentration() - self.n_total).abs() / self.n_total
    }

    /// Radius (µm) beyond which `r²·N(r)` stays below 10⁻¹² of its peak.
    pub fn integration_cutoff(&self) -> f64 {
        let k = self.alpha + 2.0;
        let peak = k / self.b;
        let log_g = |r: f64| k * libm::log(r) - self.b * r;
        let target = log_g(peak) + libm::log(TAIL_FRACTION);
        let mut lo = peak;
        let mut hi = 2.0 * peak;
        while log_g(hi) > target {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if log_g(mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.alpha >= 0.0
            && self.a > 0.0
            && self.b > 0.0
            && self.refractive_index_real > 1.0
            && [self.alpha, self.a, self.b, self.refractive_index_real]
                .iter()
                .all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument {
                name: "fog_profile",
                reason: "alpha ≥ 0, a > 0, b > 0 and n′ > 1 are required",
            })
        }
    }
}

/// Fog attenuation at `wavelength_nm` from Mie theory, in m⁻¹.
pub fn sigma_fog(profile: &FogProfile, wavelength_nm: f64) -> Result<AttenuationCoefficient> {
    sigma_fog_with_options(profile, wavelength_nm, &DEFAULT_FOG_QUADRATURE)
}

pub(crate) fn sigma_fog_with_options(
    profile: &FogProfile,
    wavelength_nm: f64,
    options: &QuadratureOptions,
) -> Result<AttenuationCoefficient> {
    let n = profile.refractive_index_real;
    let failure: Cell<Option<Error>> = Cell::new(None);
    let sigma = fog_extinction_with(profile, wavelength_nm, options, |x| {
        match mie_extinction_efficiency(x, n) {
            Ok(q) => q,
            Err(e) => {
                failure.set(Some(e));
                0.0
            }
        }
    });
    if let Some(e) = failure.take() {
        return Err(e);
    }
    let kind = if *profile == FogProfile::MODERATE_RADIATION.with_refractive_index(n) {
        ConditionKind::FogModerateRadiation
    } else {
        ConditionKind::FogHeavyAdvection
    };
    Ok(AttenuationCoefficient {
        sigma: sigma?,
        condition: WeatherCondition::new(kind).with_wavelength(wavelength_nm),
    })
}

/// `FOG_UNIT_FACTOR · ∫ Q(2πr/λ)·πr²·N(r) dr` over `[0, cutoff]` for an
/// arbitrary extinction efficiency `Q(x)`.
pub fn fog_extinction_with<Q: FnMut(f64) -> f64>(
    profile: &FogProfile,
    wavelength_nm: f64,
    options: &QuadratureOptions,
    mut efficiency: Q,
) -> Result<f64> {
    profile.validate()?;
    if !(wavelength_nm > 0.0 && wavelength_nm.is_finite()) {
        return Err(Error::InvalidArgument {
            name: "wavelength",
            reason: "must be positive",
        });
    }
    let wavelength_um = wavelength_nm * 1e-3;
    let cutoff = profile.integration_cutoff();
    let mut options = *options;
    if options.initial_panels == 0 {
        let max_size_parameter = 2.0 * PI * cutoff / wavelength_um;
        options.initial_panels =
            (libm::ceil(max_size_parameter * PANELS_PER_SIZE_PARAMETER) as usize).max(16);
    }
    let integral = integrate(
        |r| {
            if r <= 0.0 {
                return 0.0;
            }
            let x = 2.0 * PI * r / wavelength_um;
            efficiency(x) * PI * r * r * profile.density(r)
        },
        0.0,
        cutoff,
        &options,
    )?;
    Ok(integral.value * FOG_UNIT_FACTOR)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;

    #[test]
    fn density_at_zero_radius() {
        assert_eq!(FogProfile::HEAVY_ADVECTION.density(0.0), 0.0);
        assert_eq!(FogProfile::MODERATE_RADIATION.density(0.0), 0.0);
    }

    #[test]
    fn tabulated_concentrations_match_closed_form() {
        for p in [FogProfile::HEAVY_ADVECTION, FogProfile::MODERATE_RADIATION] {
            assert!(p.consistency_error() < 1e-3, "{p:?}");
        }
    }

    #[test]
    fn tabulated_concentrations_match_quadrature() {
        for p in [FogProfile::HEAVY_ADVECTION, FogProfile::MODERATE_RADIATION] {
            let r = integrate(
                |r| p.density(r),
                0.0,
                p.integration_cutoff(),
                &QuadratureOptions::default(),
            )
            .unwrap();
            assert!((r.value - p.n_total).abs() / p.n_total < 1e-3, "{p:?}: {}", r.value);
        }
    }

    #[test]
    fn cutoff_is_where_the_tail_vanishes() {
        let p = FogProfile::HEAVY_ADVECTION;
        let r = p.integration_cutoff();
        let g = |r: f64| r * r * p.density(r);
        let peak = g(5.0 / 0.3);
        assert!((g(r) / peak / TAIL_FRACTION - 1.0).abs() < 1e-6);
        assert!(r > 100.0 && r < 200.0, "{r}");
    }

    #[test]
    fn geometric_optics_bound_for_heavy_advection() {
        let p = FogProfile::HEAVY_ADVECTION;
        let sigma = fog_extinction_with(&p, 550.0, &DEFAULT_FOG_QUADRATURE, |_| 2.0).unwrap();
        let closed = 2.0 * PI * p.moment(2.0) * FOG_UNIT_FACTOR;
        assert!((sigma - closed).abs() / closed < 1e-6);
        assert!((sigma - 0.0279).abs() / 0.0279 < 0.01, "{sigma}");
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = FogProfile::HEAVY_ADVECTION;
        assert!(sigma_fog(&p, 0.0).is_err());
        assert!(sigma_fog(&p.with_refractive_index(0.9), 550.0).is_err());
    }
}
