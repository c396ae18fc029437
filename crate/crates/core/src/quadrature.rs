//! Globally adaptive Gauss–Kronrod (7/15) integration.
//!
//! The interval with the largest error estimate is bisected until the summed
//! error estimate meets `max(abs_tol, rel_tol * |integral|)`. Error estimates
//! use the QUADPACK rescaling, which is pessimistic for smooth integrands.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::{Error, Result};

/// Kronrod abscissae on [0, 1]; odd indices are the 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// 7-point Gauss weights for XGK[1], XGK[3], XGK[5] and the center.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// How a panel's error is estimated from the Kronrod/Gauss difference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum ErrorEstimate {
    /// QUADPACK's `asc·min(1, (200·|K−G|/asc)^1.5)`.
    #[default]
    Quadpack,
    /// `|K15 − G7|` itself. Still an overestimate of the K15 error, but it
    /// does not inflate panels whose integrand merely oscillates.
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QuadratureOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Uniform panels the interval is split into before adapting.
    pub initial_panels: usize,
    pub max_intervals: usize,
    pub error_estimate: ErrorEstimate,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions {
            rel_tol: 1e-6,
            abs_tol: 0.0,
            initial_panels: 1,
            max_intervals: 50_000,
            error_estimate: ErrorEstimate::Quadpack,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error_estimate: f64,
    pub intervals: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then(other.a.total_cmp(&self.a))
    }
}

/// Single 15-point Kronrod panel: (integral, error estimate).
pub fn gauss_kronrod_15<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    estimate: ErrorEstimate,
) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);
    let mut kronrod = f_center * WGK[7];
    let mut gauss = f_center * WG[3];
    let mut abs_sum = kronrod.abs();
    let mut values = [(0.0f64, 0.0f64); 7];
    for (j, value) in values.iter_mut().enumerate() {
        let dx = half * XGK[j];
        let lo = f(center - dx);
        let hi = f(center + dx);
        *value = (lo, hi);
        kronrod += WGK[j] * (lo + hi);
        abs_sum += WGK[j] * (lo.abs() + hi.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (lo + hi);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[7] * (f_center - mean).abs();
    for (j, &(lo, hi)) in values.iter().enumerate() {
        asc += WGK[j] * ((lo - mean).abs() + (hi - mean).abs());
    }
    let result = kronrod * half;
    let abs_sum = abs_sum * half.abs();
    let asc = asc * half.abs();
    let raw = ((kronrod - gauss) * half).abs();
    let mut error = match estimate {
        ErrorEstimate::Raw => raw,
        ErrorEstimate::Quadpack if asc != 0.0 && raw != 0.0 => {
            asc * libm::pow(200.0 * raw / asc, 1.5).min(1.0)
        }
        ErrorEstimate::Quadpack => raw,
    };
    if abs_sum > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * abs_sum);
    }
    (result, error)
}

/// Integrates `f` over `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    options: &QuadratureOptions,
) -> Result<Integral> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidArgument {
            name: "bounds",
            reason: "integration bounds must be finite",
        });
    }
    if !(options.rel_tol >= 0.0 && options.abs_tol >= 0.0)
        || (options.rel_tol == 0.0 && options.abs_tol == 0.0)
    {
        return Err(Error::InvalidArgument {
            name: "tolerance",
            reason: "at least one tolerance must be positive",
        });
    }
    let panels = options.initial_panels.max(1);
    let mut heap = BinaryHeap::with_capacity(panels.max(64));
    let mut value = 0.0;
    let mut error = 0.0;
    let width = (b - a) / panels as f64;
    for i in 0..panels {
        let lo = a + width * i as f64;
        let hi = if i + 1 == panels { b } else { a + width * (i + 1) as f64 };
        let (v, e) = gauss_kronrod_15(&mut f, lo, hi, options.error_estimate);
        value += v;
        error += e;
        heap.push(Segment {
            a: lo,
            b: hi,
            value: v,
            error: e,
        });
    }
    let mut evaluations = 15 * panels;

    loop {
        let tolerance = options.abs_tol.max(options.rel_tol * value.abs());
        if error <= tolerance {
            break;
        }
        if heap.len() >= options.max_intervals.max(panels) {
            return Err(Error::QuadratureNonConvergence {
                estimate: value,
                error,
                intervals: heap.len(),
            });
        }
        let worst = heap.pop().expect("at least one segment");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // interval cannot be split further in f64
            return Err(Error::QuadratureNonConvergence {
                estimate: value,
                error,
                intervals: heap.len() + 1,
            });
        }
        let (v1, e1) = gauss_kronrod_15(&mut f, worst.a, mid, options.error_estimate);
        let (v2, e2) = gauss_kronrod_15(&mut f, mid, worst.b, options.error_estimate);
        evaluations += 30;
        value += v1 + v2 - worst.value;
        error += e1 + e2 - worst.error;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }

    // Re-sum from the segments in position order so the result does not
    // carry the running-sum drift.
    let mut segments: Vec<Segment> = heap.into_vec();
    segments.sort_unstable_by(|x, y| x.a.total_cmp(&y.a));
    let value = segments.iter().map(|s| s.value).sum();
    let error = segments.iter().map(|s| s.error).sum();
    Ok(Integral {
        value,
        error_estimate: error,
        intervals: segments.len(),
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two() {
        let k: f64 = 2.0 * WGK[..7].iter().sum::<f64>() + WGK[7];
        let g: f64 = 2.0 * WG[..3].iter().sum::<f64>() + WG[3];
        assert!((k - 2.0).abs() < 1e-14);
        assert!((g - 2.0).abs() < 1e-14);
    }

    #[test]
    fn kronrod_is_exact_for_degree_22() {
        // ∫_{-1}^{1} x^n dx = 2/(n+1) for even n
        for n in (0..=22).step_by(2) {
            let (v, _) = gauss_kronrod_15(&mut |x: f64| libm::pow(x, n as f64), -1.0, 1.0, ErrorEstimate::Quadpack);
            let exact = 2.0 / (n as f64 + 1.0);
            assert!((v - exact).abs() < 1e-14, "degree {n}: {v} vs {exact}");
        }
    }

    #[test]
    fn gauss_part_is_exact_for_degree_13() {
        // With a degree-12 integrand both rules agree, so the raw difference
        // (and hence the error estimate) collapses to roundoff.
        let (_, e) = gauss_kronrod_15(&mut |x: f64| libm::pow(x, 12.0), -1.0, 1.0, ErrorEstimate::Raw);
        assert!(e < 1e-13, "{e}");
    }

    #[test]
    fn adapts_to_a_peak() {
        // ∫_0^1 1/((x-0.3)^2 + 1e-4) dx
        let f = |x: f64| 1.0 / ((x - 0.3) * (x - 0.3) + 1e-4);
        let exact = 100.0 * (libm::atan(70.0) + libm::atan(30.0));
        let r = integrate(f, 0.0, 1.0, &QuadratureOptions::default()).unwrap();
        assert!(((r.value - exact) / exact).abs() < 1e-8);
        assert!(r.intervals > 1);
    }

    #[test]
    fn oscillatory_integrand() {
        let r = integrate(
            |x: f64| libm::sin(x) * libm::sin(x),
            0.0,
            100.0,
            &QuadratureOptions {
                initial_panels: 16,
                ..Default::default()
            },
        )
        .unwrap();
        let exact = 50.0 - libm::sin(200.0) / 4.0;
        assert!(((r.value - exact) / exact).abs() < 1e-6);
    }

    #[test]
    fn reports_non_convergence() {
        let err = integrate(
            |x: f64| 1.0 / libm::sqrt(x),
            0.0,
            1.0,
            &QuadratureOptions {
                max_intervals: 8,
                rel_tol: 1e-12,
                ..Default::default()
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::QuadratureNonConvergence { intervals: 8, .. }));
    }
}
