//! Construction of a Delta_2 minorant for an arbitrary modular function.
//!
//! Starting from the convex envelope `m_*` of the radial infimum over x, the
//! derivative is capped at `alpha * m/s` (with `alpha > 1`): wherever the
//! envelope's slope exceeds that cap, the minorant grows like `s^alpha`
//! instead. The result is convex, superlinear, lies below `m_*` and satisfies
//! the doubling condition with constant at most `2^alpha` in the capped
//! regime.

use crate::error::{OrliczError, Result};
use crate::nfunction::{radial_inf_envelope, NFunction};
use crate::scalar::ScalarNFunction;

const PTS_PER_DECADE: usize = 512;

/// Builds the capped-slope minorant of `inf_x M(x, .)` on the sampling range
/// of `m`. Requires `alpha > 1`.
pub fn build_minorant(
    m: &NFunction,
    x_samples: &[[f64; 2]],
    alpha: f64,
) -> Result<ScalarNFunction> {
    if !(alpha > 1.0) {
        return Err(OrliczError::BadParameters(format!(
            "minorant exponent alpha = {alpha} must exceed 1"
        )));
    }
    let s_max = m.sample.xi_max;
    let s_min = s_max * 1e-6;
    let decades = (s_max / s_min).log10();
    let n = ((decades * PTS_PER_DECADE as f64).ceil() as usize).max(16);
    let grid: Vec<f64> = (0..=n)
        .map(|i| s_min * 10f64.powf(decades * i as f64 / n as f64))
        .collect();
    let env = radial_inf_envelope(m, x_samples, &grid);
    if !(env.eval(s_max) > 0.0) || !env.eval(s_max).is_finite() {
        return Err(OrliczError::NonIntegrable(s_max));
    }

    // Forward Euler from the first positive knot. The envelope is piecewise
    // linear, so its slope on each cell is exact.
    let mut values = Vec::with_capacity(grid.len() + 1);
    let mut cur = env.eval(grid[0]);
    values.push(cur);
    for i in 0..n {
        let (s0, s1) = (grid[i], grid[i + 1]);
        let mid = 0.5 * (s0 + s1);
        let slope_env = (env.eval(s1) - env.eval(s0)) / (s1 - s0);
        if !slope_env.is_finite() {
            return Err(OrliczError::NonIntegrable(mid));
        }
        let cap_trigger = alpha * env.eval(mid) / mid;
        let slope = if slope_env <= cap_trigger {
            // Uncapped: follow the envelope, but never cross above it.
            slope_env.min((env.eval(s1) - cur) / (s1 - s0))
        } else {
            alpha * cur / mid
        };
        cur += slope.max(0.0) * (s1 - s0);
        cur = cur.min(env.eval(s1));
        values.push(cur);
    }

    let mut knots = Vec::with_capacity(grid.len() + 1);
    knots.push(0.0);
    knots.extend_from_slice(&grid);
    let mut vals = Vec::with_capacity(values.len() + 1);
    vals.push(0.0);
    vals.extend_from_slice(&values);
    // Re-convexify: Euler drift can leave microscopic concavity at branch
    // switches.
    let hull = crate::scalar::lower_convex_envelope(&knots, &vals);
    ScalarNFunction::from_table(knots, hull)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Domain;
    use crate::nfunction::{x_lattice, SampleSpec};

    fn samples() -> Vec<[f64; 2]> {
        x_lattice(&Domain::line(1.0), 9)
    }

    #[test]
    fn minorant_stays_below_every_slice() {
        let m = NFunction::power_unscaled(3.0);
        let low = build_minorant(&m, &samples(), 2.0).unwrap();
        for &s in &[0.01, 0.1, 1.0, 10.0, 500.0] {
            let v = low.eval(s);
            for &x in &samples() {
                assert!(v <= m.eval(x, [s, 0.0]) + 1e-9 * (1.0 + v), "s = {s}");
            }
        }
    }

    #[test]
    fn minorant_of_cubic_has_quadratic_tail() {
        let m = NFunction::power_unscaled(3.0);
        let low = build_minorant(&m, &samples(), 2.0).unwrap();
        // Capped regime: doubling ratio approaches 2^alpha = 4, not 2^3.
        for &s in &[1.0, 10.0, 100.0] {
            let r = low.eval(2.0 * s) / low.eval(s);
            assert!(r < 4.2, "ratio at s = {s} is {r}");
            assert!(r > 3.5, "ratio at s = {s} is {r}");
        }
    }

    #[test]
    fn minorant_of_exponential_satisfies_doubling() {
        let m = NFunction::exponential()
            .with_sample(SampleSpec { xi_max: 50.0, pts_per_decade: 64 });
        let low = build_minorant(&m, &samples(), 3.0).unwrap();
        for &s in &[0.5, 2.0, 8.0, 20.0] {
            let r = low.eval(2.0 * s) / low.eval(s);
            assert!(r <= 2f64.powi(3) + 0.2, "ratio at s = {s} is {r}");
        }
        assert!(low.eval(40.0) < m.eval([0.0; 2], [40.0, 0.0]));
    }

    #[test]
    fn quadratic_below_cap_is_reproduced() {
        let m = NFunction::power_unscaled(2.0);
        let low = build_minorant(&m, &samples(), 3.0).unwrap();
        for &s in &[0.1, 1.0, 30.0, 800.0] {
            let v = low.eval(s);
            assert!(
                (v - s * s).abs() <= 2e-2 * s * s,
                "s = {s}: minorant {v} vs {}",
                s * s
            );
        }
    }

    #[test]
    fn minorant_is_convex_and_superlinear() {
        let m = NFunction::power_unscaled(4.0);
        let low = build_minorant(&m, &samples(), 1.5).unwrap();
        assert!(low.is_convex(1e-9));
        assert!(low.eval(1000.0) / 1000.0 > 10.0 * low.eval(1.0) / 1.0);
    }

    #[test]
    fn alpha_must_exceed_one() {
        let m = NFunction::power_unscaled(2.0);
        assert!(matches!(
            build_minorant(&m, &samples(), 1.0),
            Err(OrliczError::BadParameters(_))
        ));
    }
}
