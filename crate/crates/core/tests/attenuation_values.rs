//! Expected values here were computed outside this crate: Mie efficiencies
//! with an independent Python implementation of the Bohren–Huffman series,
//! closed forms with mpmath at 50 digits.

use approx::assert_relative_eq;
use weathervis_core::attenuation::{
    fog_extinction_with, mie_extinction_efficiency, sigma_fog, sigma_rain, sigma_snow,
    FogProfile, SnowKind, FOG_UNIT_FACTOR,
};
use weathervis_core::quadrature::{integrate, QuadratureOptions};
use weathervis_core::{resolve_condition, AttenuationConfig, WeatherCondition};

#[test]
fn mie_matches_frozen_reference_values() {
    // 40-digit Bessel-function series (mpmath), rounded
    let cases = [
        (0.5, 0.006_889_752_470_544_942),
        (1.0, 0.095_652_351_995_612_46),
        (5.0, 3.619_013_809_251_130_9),
        (10.0, 2.157_659_608_061_970_8),
        (50.0, 1.975_809_930_254_680_6),
        (200.0, 2.022_176_807_519_188_8),
        (1000.0, 2.022_811_433_220_158_2),
    ];
    for (x, expected) in cases {
        let q = mie_extinction_efficiency(x, 1.333).unwrap();
        assert_relative_eq!(q, expected, max_relative = 1e-9);
    }
}

#[test]
fn fog_heavy_advection_at_550() {
    let sigma = sigma_fog(&FogProfile::HEAVY_ADVECTION, 550.0).unwrap().sigma;
    assert_relative_eq!(sigma, 0.028_74, max_relative = 0.03);
    // vectorized Mie series under 20-point Gauss-Legendre on 6000 and 12000 panels;
    // the bound covers the adaptive quadrature tolerance
    assert_relative_eq!(sigma, 0.028_746_8, max_relative = 2e-5);
}

#[test]
fn fog_moderate_radiation_at_550() {
    let sigma = sigma_fog(&FogProfile::MODERATE_RADIATION, 550.0).unwrap().sigma;
    assert_relative_eq!(sigma, 0.008_64, max_relative = 0.03);
    assert_relative_eq!(sigma, 0.008_633_5, max_relative = 2e-5);
}

#[test]
fn fog_with_constant_efficiency_matches_closed_form() {
    for p in [FogProfile::HEAVY_ADVECTION, FogProfile::MODERATE_RADIATION] {
        let numeric =
            fog_extinction_with(&p, 550.0, &QuadratureOptions::default(), |_| 2.0).unwrap();
        // 2π·a·Γ(α+3)/b^(α+3)
        let closed = 2.0 * std::f64::consts::PI * p.moment(2.0) * FOG_UNIT_FACTOR;
        assert_relative_eq!(numeric, closed, max_relative = 1e-8);
    }
    // HA: 2π·0.027·120/0.3^6 µm²·cm⁻³ = 0.027925268… m⁻¹
    let ha = 2.0 * std::f64::consts::PI * FogProfile::HEAVY_ADVECTION.moment(2.0) * FOG_UNIT_FACTOR;
    assert_relative_eq!(ha, 0.027_925_268_031_909_27, max_relative = 1e-12);
}

#[test]
fn droplet_concentrations() {
    for p in [FogProfile::HEAVY_ADVECTION, FogProfile::MODERATE_RADIATION] {
        assert_relative_eq!(p.total_concentration(), p.n_total, max_relative = 1e-3);
        let numeric = integrate(
            |r| p.density(r),
            0.0,
            p.integration_cutoff(),
            &QuadratureOptions::default(),
        )
        .unwrap()
        .value;
        assert_relative_eq!(numeric, p.n_total, max_relative = 1e-3);
    }
}

#[test]
fn coefficient_ordering_at_reference_settings() {
    let sigma = |c: WeatherCondition| resolve_condition(&c).unwrap().sigma;
    let clear = sigma(WeatherCondition::clear());
    let rain = sigma(WeatherCondition::rain(8.0));
    let fog = sigma(WeatherCondition::fog_heavy_advection());
    let snow = sigma(WeatherCondition::snow(SnowKind::Dry, 4.0));
    assert!(clear < rain && rain < fog && fog < snow, "{clear} {rain} {fog} {snow}");
}

#[test]
fn fog_depends_on_refractive_index() {
    let config = AttenuationConfig {
        water_refractive_index: 1.5,
        ..Default::default()
    };
    let default = resolve_condition(&WeatherCondition::fog_moderate_radiation()).unwrap();
    let glassy =
        weathervis_core::resolve_condition_with(&WeatherCondition::fog_moderate_radiation(), &config)
            .unwrap();
    assert!(glassy.sigma != default.sigma);
    assert_eq!(glassy.condition, WeatherCondition::fog_moderate_radiation());
}

#[test]
fn precipitation_is_wavelength_aware_only_for_snow() {
    let a = sigma_snow(2.0, SnowKind::Wet, 450.0).unwrap().sigma;
    let b = sigma_snow(2.0, SnowKind::Wet, 650.0).unwrap().sigma;
    assert!(a < b);
    assert_eq!(sigma_rain(2.0).unwrap().condition.wavelength_nm, 550.0);
}
