//! Mie extinction efficiency for a homogeneous, non-absorbing sphere.
//!
//! Partial-wave series with Wiscombe's truncation `ceil(x + 4·x^(1/3) + 2)`,
//! logarithmic derivative `D_n(mx)` by downward recurrence and Riccati–Bessel
//! functions of the size parameter by upward recurrence.
//!
//! With a purely real index the series simplifies: writing the coefficient
//! `a_n = p / (p − i·q)` with real `p`, `q` gives `Re a_n = p² / (p² + q²)`,
//! so the whole sum runs in real arithmetic (and `Q_ext = Q_sca`).

use alloc::vec;

use crate::{Error, Result};

/// Relative size of the last retained term above which the series is
/// reported as non-convergent.
const CONVERGENCE_TOLERANCE: f64 = 1e-4;

/// Extinction efficiency `Q_ext(x, n′)` for size parameter `x = 2πr/λ` and
/// real refractive index `n′ > 1`.
pub fn mie_extinction_efficiency(size_parameter: f64, refractive_index_real: f64) -> Result<f64> {
    let x = size_parameter;
    let m = refractive_index_real;
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::InvalidArgument {
            name: "size_parameter",
            reason: "must be positive and finite",
        });
    }
    if !(m > 1.0 && m.is_finite()) {
        return Err(Error::InvalidArgument {
            name: "refractive_index_real",
            reason: "must exceed 1",
        });
    }

    let terms = libm::ceil(x + 4.0 * libm::cbrt(x) + 2.0) as usize;
    let mx = m * x;
    // The start value's error decays like exp(−c·Δ^(3/2)/√(mx)) over the
    // first Δ steps, so the headroom has to grow with (mx)^(1/3).
    let start = terms.max(libm::ceil(mx) as usize) + 16 + libm::ceil(8.0 * libm::cbrt(mx)) as usize;
    let inv_mx = 1.0 / mx;
    let inv_x = 1.0 / x;
    let mut log_derivative = vec![0.0f64; start + 1];
    for n in (1..=start).rev() {
        let k = n as f64 * inv_mx;
        log_derivative[n - 1] = k - 1.0 / (log_derivative[n] + k);
    }

    let (sin_x, cos_x) = (libm::sin(x), libm::cos(x));
    // ψ_{n-1}, ψ_{n-2} and χ_{n-1}, χ_{n-2}
    let (mut psi_prev, mut psi_prev2) = (sin_x, cos_x);
    let (mut chi_prev, mut chi_prev2) = (cos_x, -sin_x);
    let mut sum = 0.0;
    let mut last = 0.0;
    for (n, &d) in log_derivative.iter().enumerate().take(terms + 1).skip(1) {
        let nf = n as f64;
        let psi = (2.0 * nf - 1.0) * inv_x * psi_prev - psi_prev2;
        let chi = (2.0 * nf - 1.0) * inv_x * chi_prev - chi_prev2;

        let ga = d / m + nf * inv_x;
        let gb = d * m + nf * inv_x;
        let re_a = real_part(ga * psi - psi_prev, ga * chi - chi_prev);
        let re_b = real_part(gb * psi - psi_prev, gb * chi - chi_prev);
        last = (2.0 * nf + 1.0) * (re_a + re_b);
        sum += last;

        psi_prev2 = psi_prev;
        psi_prev = psi;
        chi_prev2 = chi_prev;
        chi_prev = chi;
    }

    let q = 2.0 * sum / (x * x);
    if !q.is_finite() || last.abs() > CONVERGENCE_TOLERANCE * sum.abs() {
        return Err(Error::MieNonConvergence {
            size_parameter: x,
            last_term: last,
        });
    }
    Ok(q)
}

#[inline]
fn real_part(p: f64, q: f64) -> f64 {
    let p2 = p * p;
    let denominator = p2 + q * q;
    if denominator == 0.0 {
        0.0
    } else {
        p2 / denominator
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rayleigh(x: f64, m: f64) -> f64 {
        let m2 = m * m;
        let k = (m2 - 1.0) / (m2 + 2.0);
        8.0 / 3.0 * x * x * x * x * k * k
    }

    #[test]
    fn rayleigh_limit() {
        for x in [1e-3, 5e-3, 1e-2] {
            let q = mie_extinction_efficiency(x, 1.333).unwrap();
            let r = rayleigh(x, 1.333);
            assert!(((q - r) / r).abs() < 0.01, "x = {x}: {q} vs {r}");
        }
    }

    #[test]
    fn large_spheres_approach_two() {
        let q = mie_extinction_efficiency(1000.0, 1.333).unwrap();
        assert!((1.9..=2.2).contains(&q), "{q}");
        for x in [200.0, 400.0, 3000.0] {
            let q = mie_extinction_efficiency(x, 1.333).unwrap();
            assert!((q - 2.0).abs() < 0.1, "x = {x}: {q}");
        }
    }

    #[test]
    fn rejects_invalid_arguments() {
        assert!(mie_extinction_efficiency(0.0, 1.333).is_err());
        assert!(mie_extinction_efficiency(-1.0, 1.333).is_err());
        assert!(mie_extinction_efficiency(1.0, 1.0).is_err());
        assert!(mie_extinction_efficiency(f64::NAN, 1.333).is_err());
    }

    #[test]
    fn first_maximum_near_x_six() {
        // Q_ext for water peaks near 4 around x ≈ 6 (the first interference maximum)
        let peak = (40..100)
            .map(|i| i as f64 / 10.0)
            .map(|x| (x, mie_extinction_efficiency(x, 1.333).unwrap()))
            .fold((0.0, 0.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        assert!((5.5..7.0).contains(&peak.0), "{peak:?}");
        assert!((3.8..4.5).contains(&peak.1), "{peak:?}");
    }
}
