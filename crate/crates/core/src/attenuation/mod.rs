//! Atmospheric attenuation coefficients and contrast.
//!
//! Every public σ is in m⁻¹. The precipitation power laws are evaluated on a
//! km⁻¹ basis and divided by 1000.

mod fog;
mod mie;

pub use self::fog::{fog_extinction_with, sigma_fog, FogProfile, FOG_UNIT_FACTOR};
pub use self::mie::mie_extinction_efficiency;

use crate::quadrature::QuadratureOptions;
use crate::{Error, Result};

/// −ln(0.02): the optical depth at which contrast falls to 2 %.
pub const KOSCHMIEDER_CONSTANT: f64 = 3.912_023_005_428_146;

/// Contrast ratio threshold behind [`KOSCHMIEDER_CONSTANT`].
pub const KOSCHMIEDER_CONTRAST: f64 = 0.02;

/// Clear-air attenuation used unless configured otherwise (m⁻¹).
pub const DEFAULT_CLEAR_SIGMA: f64 = 0.00015;

/// Default wavelength, the middle of the photopic band (nm).
pub const DEFAULT_WAVELENGTH_NM: f64 = 550.0;

/// Real refractive index of liquid water in the visible band.
pub const WATER_REFRACTIVE_INDEX: f64 = 1.333;

/// Visible band accepted for wavelength-dependent conditions (nm).
pub const VISIBLE_BAND_NM: (f64, f64) = (380.0, 780.0);

const RAIN_K_PER_KM: f64 = 1.17;
const RAIN_EXPONENT: f64 = 0.65;

/// Fraction of contrast surviving `distance` meters of a medium with
/// attenuation `sigma`: `exp(−σ·x)`.
pub fn contrast_ratio(sigma: f64, distance: f64) -> Result<f64> {
    non_negative("sigma", sigma)?;
    non_negative("distance", distance)?;
    Ok(libm::exp(-sigma * distance))
}

/// Distance at which contrast falls to 2 % (Koschmieder).
pub fn koschmieder_distance(sigma: f64) -> Result<f64> {
    non_negative("sigma", sigma)?;
    if sigma == 0.0 {
        return Err(Error::InvalidArgument {
            name: "sigma",
            reason: "zero attenuation means unbounded visibility",
        });
    }
    Ok(KOSCHMIEDER_CONSTANT / sigma)
}

/// Rain attenuation from the rain rate in mm/h.
pub fn sigma_rain(rate_mm_per_h: f64) -> Result<AttenuationCoefficient> {
    non_negative("rate", rate_mm_per_h)?;
    let per_km = RAIN_K_PER_KM * libm::pow(rate_mm_per_h, RAIN_EXPONENT);
    Ok(AttenuationCoefficient {
        sigma: per_km / 1000.0,
        condition: WeatherCondition::rain(rate_mm_per_h),
    })
}

/// Snow attenuation from the snowfall rate (mm/h, liquid equivalent).
pub fn sigma_snow(
    rate_mm_per_h: f64,
    kind: SnowKind,
    wavelength_nm: f64,
) -> Result<AttenuationCoefficient> {
    non_negative("rate", rate_mm_per_h)?;
    if !(wavelength_nm > 0.0 && wavelength_nm.is_finite()) {
        return Err(Error::InvalidArgument {
            name: "wavelength",
            reason: "must be positive",
        });
    }
    let c = kind.coefficients(wavelength_nm);
    let per_km = c.a_per_km * libm::pow(rate_mm_per_h, c.b);
    Ok(AttenuationCoefficient {
        sigma: per_km / 1000.0,
        condition: WeatherCondition::snow(kind, rate_mm_per_h).with_wavelength(wavelength_nm),
    })
}

/// Resolves a condition with the default [`AttenuationConfig`].
pub fn resolve_condition(condition: &WeatherCondition) -> Result<AttenuationCoefficient> {
    resolve_condition_with(condition, &AttenuationConfig::default())
}

pub fn resolve_condition_with(
    condition: &WeatherCondition,
    config: &AttenuationConfig,
) -> Result<AttenuationCoefficient> {
    condition.validate()?;
    let mut coefficient = match condition.kind {
        ConditionKind::Clear => AttenuationCoefficient {
            sigma: config.clear_sigma,
            condition: *condition,
        },
        ConditionKind::Rain => sigma_rain(condition.rate_mm_per_h)?,
        ConditionKind::SnowWet => {
            sigma_snow(condition.rate_mm_per_h, SnowKind::Wet, condition.wavelength_nm)?
        }
        ConditionKind::SnowDry => {
            sigma_snow(condition.rate_mm_per_h, SnowKind::Dry, condition.wavelength_nm)?
        }
        ConditionKind::FogHeavyAdvection | ConditionKind::FogModerateRadiation => {
            let profile = if condition.kind == ConditionKind::FogHeavyAdvection {
                FogProfile::HEAVY_ADVECTION
            } else {
                FogProfile::MODERATE_RADIATION
            }
            .with_refractive_index(config.water_refractive_index);
            fog::sigma_fog_with_options(&profile, condition.wavelength_nm, &config.quadrature)?
        }
        ConditionKind::CustomSigma => AttenuationCoefficient {
            sigma: condition.custom_sigma,
            condition: *condition,
        },
    };
    non_negative("sigma", coefficient.sigma)?;
    coefficient.condition = *condition;
    Ok(coefficient)
}

fn non_negative(name: &'static str, value: f64) -> Result<()> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument {
            name,
            reason: "must be finite and non-negative",
        })
    }
}

/// Settings shared by all condition resolutions.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AttenuationConfig {
    /// σ used for [`ConditionKind::Clear`] (m⁻¹).
    pub clear_sigma: f64,
    /// Real refractive index of the fog droplets.
    pub water_refractive_index: f64,
    pub quadrature: QuadratureOptions,
}

impl Default for AttenuationConfig {
    fn default() -> Self {
        AttenuationConfig {
            clear_sigma: DEFAULT_CLEAR_SIGMA,
            water_refractive_index: WATER_REFRACTIVE_INDEX,
            quadrature: fog::DEFAULT_FOG_QUADRATURE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum ConditionKind {
    Clear,
    Rain,
    SnowWet,
    SnowDry,
    #[cfg_attr(feature = "serde", serde(rename = "fog-ha"))]
    FogHeavyAdvection,
    #[cfg_attr(feature = "serde", serde(rename = "fog-mr"))]
    FogModerateRadiation,
    #[cfg_attr(feature = "serde", serde(rename = "custom"))]
    CustomSigma,
}

impl ConditionKind {
    pub const ALL: [ConditionKind; 7] = [
        ConditionKind::Clear,
        ConditionKind::Rain,
        ConditionKind::SnowWet,
        ConditionKind::SnowDry,
        ConditionKind::FogHeavyAdvection,
        ConditionKind::FogModerateRadiation,
        ConditionKind::CustomSigma,
    ];

    /// Short name used in configs, file names and on the command line.
    pub fn name(self) -> &'static str {
        match self {
            ConditionKind::Clear => "clear",
            ConditionKind::Rain => "rain",
            ConditionKind::SnowWet => "snow-wet",
            ConditionKind::SnowDry => "snow-dry",
            ConditionKind::FogHeavyAdvection => "fog-ha",
            ConditionKind::FogModerateRadiation => "fog-mr",
            ConditionKind::CustomSigma => "custom",
        }
    }

    pub fn from_name(name: &str) -> Option<ConditionKind> {
        ConditionKind::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn uses_rate(self) -> bool {
        matches!(
            self,
            ConditionKind::Rain | ConditionKind::SnowWet | ConditionKind::SnowDry
        )
    }

    pub fn uses_wavelength(self) -> bool {
        matches!(
            self,
            ConditionKind::SnowWet
                | ConditionKind::SnowDry
                | ConditionKind::FogHeavyAdvection
                | ConditionKind::FogModerateRadiation
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SnowKind {
    Wet,
    Dry,
}

/// Power-law coefficients `σ = a·S^b` (km⁻¹ basis).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnowCoefficients {
    pub a_per_km: f64,
    pub b: f64,
}

impl SnowKind {
    pub fn coefficients(self, wavelength_nm: f64) -> SnowCoefficients {
        match self {
            SnowKind::Wet => SnowCoefficients {
                a_per_km: 0.000_102_3 * wavelength_nm + 3.785_546_6,
                b: 0.72,
            },
            SnowKind::Dry => SnowCoefficients {
                a_per_km: 0.000_054_2 * wavelength_nm + 5.495_877_6,
                b: 1.38,
            },
        }
    }
}

/// A weather condition descriptor. Fields that do not apply to `kind` are
/// ignored.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WeatherCondition {
    pub kind: ConditionKind,
    /// Precipitation rate in mm/h (rain and snow).
    #[cfg_attr(feature = "serde", serde(default))]
    pub rate_mm_per_h: f64,
    #[cfg_attr(feature = "serde", serde(default = "default_wavelength"))]
    pub wavelength_nm: f64,
    /// Pass-through σ in m⁻¹ (custom only).
    #[cfg_attr(feature = "serde", serde(default))]
    pub custom_sigma: f64,
}

#[cfg(feature = "serde")]
fn default_wavelength() -> f64 {
    DEFAULT_WAVELENGTH_NM
}

impl WeatherCondition {
    pub const fn new(kind: ConditionKind) -> Self {
        WeatherCondition {
            kind,
            rate_mm_per_h: 0.0,
            wavelength_nm: DEFAULT_WAVELENGTH_NM,
            custom_sigma: 0.0,
        }
    }

    pub const fn clear() -> Self {
        Self::new(ConditionKind::Clear)
    }

    pub const fn rain(rate_mm_per_h: f64) -> Self {
        Self::new(ConditionKind::Rain).with_rate(rate_mm_per_h)
    }

    pub const fn snow(kind: SnowKind, rate_mm_per_h: f64) -> Self {
        let kind = match kind {
            SnowKind::Wet => ConditionKind::SnowWet,
            SnowKind::Dry => ConditionKind::SnowDry,
        };
        Self::new(kind).with_rate(rate_mm_per_h)
    }

    pub const fn fog_heavy_advection() -> Self {
        Self::new(ConditionKind::FogHeavyAdvection)
    }

    pub const fn fog_moderate_radiation() -> Self {
        Self::new(ConditionKind::FogModerateRadiation)
    }

    pub const fn custom(sigma: f64) -> Self {
        let mut c = Self::new(ConditionKind::CustomSigma);
        c.custom_sigma = sigma;
        c
    }

    pub const fn with_rate(mut self, rate_mm_per_h: f64) -> Self {
        self.rate_mm_per_h = rate_mm_per_h;
        self
    }

    pub const fn with_wavelength(mut self, wavelength_nm: f64) -> Self {
        self.wavelength_nm = wavelength_nm;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind.uses_rate() {
            non_negative("rate", self.rate_mm_per_h)?;
        }
        if self.kind.uses_wavelength() {
            let (lo, hi) = VISIBLE_BAND_NM;
            if !(self.wavelength_nm >= lo && self.wavelength_nm <= hi) {
                return Err(Error::InvalidArgument {
                    name: "wavelength",
                    reason: "must lie in the visible band [380, 780] nm",
                });
            }
        }
        if self.kind == ConditionKind::CustomSigma {
            non_negative("custom_sigma", self.custom_sigma)?;
        }
        Ok(())
    }
}

/// A resolved σ together with the condition it came from.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AttenuationCoefficient {
    /// m⁻¹
    pub sigma: f64,
    pub condition: WeatherCondition,
}

impl AttenuationCoefficient {
    /// Coefficient not tied to a weather model.
    pub fn from_sigma(sigma: f64) -> Result<Self> {
        non_negative("sigma", sigma)?;
        Ok(AttenuationCoefficient {
            sigma,
            condition: WeatherCondition::custom(sigma),
        })
    }

    pub fn contrast_at(&self, distance: f64) -> Result<f64> {
        contrast_ratio(self.sigma, distance)
    }

    /// `None` when σ is zero.
    pub fn visibility_distance(&self) -> Option<f64> {
        koschmieder_distance(self.sigma).ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn contrast_at_zero_distance_is_one() {
        for sigma in [0.0, 0.00015, 0.03, 7.0] {
            assert_eq!(contrast_ratio(sigma, 0.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn contrast_examples() {
        assert_abs_diff_eq!(contrast_ratio(0.0015, 2608.015).unwrap(), 0.02, epsilon = 1e-4);
        // exp(-1.87) evaluated with mpmath at 50 digits
        assert_abs_diff_eq!(
            contrast_ratio(0.0374, 50.0).unwrap(),
            0.154_123_661_815_131_43,
            epsilon = 1e-15
        );
    }

    #[test]
    fn contrast_rejects_negative() {
        assert!(contrast_ratio(-0.1, 1.0).is_err());
        assert!(contrast_ratio(0.1, -1.0).is_err());
        assert!(contrast_ratio(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn koschmieder_examples() {
        assert_abs_diff_eq!(koschmieder_distance(0.03).unwrap(), 130.4, epsilon = 0.01);
        assert_abs_diff_eq!(koschmieder_distance(0.0015).unwrap(), 2608.015, epsilon = 1e-3);
        assert_abs_diff_eq!(koschmieder_distance(3.912).unwrap(), 1.0, epsilon = 1e-5);
        assert!(koschmieder_distance(0.0).is_err());
        assert!(koschmieder_distance(-1.0).is_err());
    }

    #[test]
    fn koschmieder_round_trip() {
        for sigma in [1e-6, 0.00015, 0.0015, 0.03, 0.2, 5.0] {
            let v = koschmieder_distance(sigma).unwrap();
            assert_abs_diff_eq!(contrast_ratio(sigma, v).unwrap(), 0.02, epsilon = 1e-12);
        }
    }

    #[test]
    fn rain_examples() {
        assert_abs_diff_eq!(sigma_rain(8.0).unwrap().sigma, 0.00452, epsilon = 1e-4);
        assert_eq!(sigma_rain(0.0).unwrap().sigma, 0.0);
        // 1.17 * 50^0.65 / 1000, evaluated with mpmath
        assert_abs_diff_eq!(sigma_rain(50.0).unwrap().sigma, 0.014_877_034_308_824_33, epsilon = 1e-15);
        assert!(sigma_rain(-1.0).is_err());
    }

    #[test]
    fn snow_examples() {
        let dry = |s: f64| sigma_snow(s, SnowKind::Dry, 550.0).unwrap().sigma;
        assert_abs_diff_eq!(dry(1.0), 0.005_525_687_6, epsilon = 1e-12);
        assert_abs_diff_eq!(dry(4.0), 0.0374, epsilon = 1e-4);
        assert_eq!(sigma_snow(0.0, SnowKind::Wet, 550.0).unwrap().sigma, 0.0);
        assert!(sigma_snow(-2.0, SnowKind::Wet, 550.0).is_err());
    }

    #[test]
    fn dry_snow_attenuates_more_than_wet_above_one_mm() {
        for s in [1.5, 2.0, 4.0, 10.0] {
            let wet = sigma_snow(s, SnowKind::Wet, 550.0).unwrap().sigma;
            let dry = sigma_snow(s, SnowKind::Dry, 550.0).unwrap().sigma;
            assert!(dry > wet);
        }
    }

    #[test]
    fn resolve_examples() {
        let clear = resolve_condition(&WeatherCondition::clear()).unwrap();
        assert_eq!(clear.sigma, 0.00015);
        let rain = resolve_condition(&WeatherCondition::rain(8.0)).unwrap();
        assert_abs_diff_eq!(rain.sigma, 0.00452, epsilon = 1e-4);
        assert_eq!(rain.condition, WeatherCondition::rain(8.0));
        let custom = resolve_condition(&WeatherCondition::custom(0.06)).unwrap();
        assert_eq!(custom.sigma, 0.06);
        let config = AttenuationConfig {
            clear_sigma: 0.0002,
            ..Default::default()
        };
        assert_eq!(
            resolve_condition_with(&WeatherCondition::clear(), &config)
                .unwrap()
                .sigma,
            0.0002
        );
    }

    #[test]
    fn condition_validation() {
        assert!(WeatherCondition::rain(-1.0).validate().is_err());
        assert!(WeatherCondition::custom(-0.1).validate().is_err());
        assert!(WeatherCondition::snow(SnowKind::Dry, 1.0)
            .with_wavelength(1550.0)
            .validate()
            .is_err());
        // rain ignores the wavelength
        assert!(WeatherCondition::rain(1.0)
            .with_wavelength(1550.0)
            .validate()
            .is_ok());
    }

    #[test]
    fn kind_names_round_trip() {
        for kind in ConditionKind::ALL {
            assert_eq!(ConditionKind::from_name(kind.name()), Some(kind));
        }
        assert_eq!(ConditionKind::from_name("drizzle"), None);
    }
}
