//! Scalar (radial) modular functions tabulated on a log-spaced grid, plus the
//! one-dimensional convex machinery: Legendre transform of a sampled function
//! and the lower convex envelope of a sampled graph.

use crate::error::{OrliczError, Result};

/// A nonnegative scalar function tabulated on `(0, s_max]` with a log-spaced
/// grid, `value(0) = 0`, interpolated piecewise linearly. Symmetric in `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarNFunction {
    /// Strictly increasing knots, `knots[0] = 0`.
    knots: Vec<f64>,
    values: Vec<f64>,
}

impl ScalarNFunction {
    /// Tabulates `f` on a log grid from `s_min` to `s_max` with
    /// `pts_per_decade` samples per decade. `f(0)` is pinned to 0.
    pub fn from_fn(f: impl Fn(f64) -> f64, s_min: f64, s_max: f64, pts_per_decade: usize) -> Self {
        assert!(s_min > 0.0 && s_max > s_min);
        let decades = (s_max / s_min).log10();
        let n = ((decades * pts_per_decade as f64).ceil() as usize).max(2);
        let mut knots = Vec::with_capacity(n + 2);
        let mut values = Vec::with_capacity(n + 2);
        knots.push(0.0);
        values.push(0.0);
        for i in 0..=n {
            let s = s_min * 10f64.powf(decades * i as f64 / n as f64);
            knots.push(s);
            values.push(f(s).max(0.0));
        }
        ScalarNFunction { knots, values }
    }

    pub fn from_table(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if knots.len() != values.len() || knots.len() < 2 {
            return Err(OrliczError::Config(
                "scalar table needs matching knots/values with at least 2 entries".into(),
            ));
        }
        let mut knots = knots;
        let mut values = values;
        if knots[0] > 0.0 {
            knots.insert(0, 0.0);
            values.insert(0, 0.0);
        }
        for w in knots.windows(2) {
            if w[1] <= w[0] {
                return Err(OrliczError::Config("scalar table knots must increase".into()));
            }
        }
        Ok(ScalarNFunction { knots, values })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn s_max(&self) -> f64 {
        *self.knots.last().unwrap()
    }

    /// Piecewise-linear evaluation; beyond `s_max` the last slope is extended.
    pub fn eval(&self, s: f64) -> f64 {
        let s = s.abs();
        if s == 0.0 {
            return 0.0;
        }
        let n = self.knots.len();
        if s >= self.knots[n - 1] {
            let slope = self.last_slope();
            return self.values[n - 1] + slope * (s - self.knots[n - 1]);
        }
        let i = match self
            .knots
            .binary_search_by(|k| k.partial_cmp(&s).unwrap())
        {
            Ok(i) => return self.values[i],
            Err(i) => i,
        };
        let (s0, s1) = (self.knots[i - 1], self.knots[i]);
        let (v0, v1) = (self.values[i - 1], self.values[i]);
        v0 + (v1 - v0) * (s - s0) / (s1 - s0)
    }

    /// Slope of the segment containing `s` (right-sided at knots).
    pub fn deriv(&self, s: f64) -> f64 {
        let s = s.abs();
        let n = self.knots.len();
        if s >= self.knots[n - 1] {
            return self.last_slope();
        }
        let i = self
            .knots
            .partition_point(|&k| k <= s)
            .clamp(1, n - 1);
        (self.values[i] - self.values[i - 1]) / (self.knots[i] - self.knots[i - 1])
    }

    fn last_slope(&self) -> f64 {
        let n = self.knots.len();
        (self.values[n - 1] - self.values[n - 2]) / (self.knots[n - 1] - self.knots[n - 2])
    }

    pub fn scaled(&self, c: f64) -> Self {
        ScalarNFunction {
            knots: self.knots.clone(),
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    pub fn is_nondecreasing(&self, tol: f64) -> bool {
        self.values.windows(2).all(|w| w[1] >= w[0] - tol)
    }

    /// Convexity as nondecreasing chord slopes.
    pub fn is_convex(&self, tol: f64) -> bool {
        let mut prev = f64::NEG_INFINITY;
        for i in 1..self.knots.len() {
            let slope = (self.values[i] - self.values[i - 1]) / (self.knots[i] - self.knots[i - 1]);
            if slope < prev - tol {
                return false;
            }
            prev = prev.max(slope);
        }
        true
    }

    /// Conjugate of the piecewise-linear interpolant, exact at the knots.
    /// Errors with `GridTooCoarse` when `eta` exceeds the final slope, i.e.
    /// the sup escapes the tabulated range.
    pub fn conjugate_at(&self, eta: f64) -> Result<f64> {
        let eta = eta.abs();
        if eta > self.last_slope() {
            return Err(OrliczError::GridTooCoarse {
                eta,
                xi_max: self.s_max(),
            });
        }
        let mut best = 0.0f64;
        for (s, v) in self.knots.iter().zip(&self.values) {
            best = best.max(s * eta - v);
        }
        Ok(best)
    }

    /// Tabulates the conjugate on its own log grid over `(0, eta_max]`.
    pub fn conjugate(&self, eta_max: f64, pts_per_decade: usize) -> Result<ScalarNFunction> {
        if eta_max > self.last_slope() {
            return Err(OrliczError::GridTooCoarse {
                eta: eta_max,
                xi_max: self.s_max(),
            });
        }
        Ok(ScalarNFunction::from_fn(
            |eta| self.conjugate_at(eta).unwrap_or(f64::INFINITY),
            eta_max * 1e-6,
            eta_max,
            pts_per_decade,
        ))
    }
}

/// Legendre transform of an evaluable scalar function: grid sup followed by a
/// golden-section polish on the bracketing segment. Returns `(value, argmax,
/// hit_boundary)`; the boundary flag signals an underestimated conjugate.
pub fn legendre_sup(
    f: &dyn Fn(f64) -> f64,
    eta: f64,
    s_max: f64,
    pts_per_decade: usize,
) -> (f64, f64, bool) {
    let eta = eta.abs();
    let g = |s: f64| s * eta - f(s);
    let s_min = s_max * 1e-9;
    let decades = (s_max / s_min).log10();
    let n = ((decades * pts_per_decade as f64).ceil() as usize).max(16);
    let mut best = g(0.0);
    let mut best_i = 0usize; // index into 0..=n+1 where 0 encodes s=0
    let s_at = |i: usize| -> f64 {
        if i == 0 {
            0.0
        } else {
            s_min * 10f64.powf(decades * (i - 1) as f64 / n as f64)
        }
    };
    for i in 1..=n + 1 {
        let v = g(s_at(i));
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let hit_boundary = best_i == n + 1;
    // Polish inside [s_{i-1}, s_{i+1}] with golden-section search.
    let lo = s_at(best_i.saturating_sub(1));
    let hi = s_at((best_i + 1).min(n + 1));
    let (s_star, v_star) = golden_max(&g, lo, hi, 120);
    (v_star.max(best), s_star, hit_boundary)
}

fn golden_max(g: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut gc = g(c);
    let mut gd = g(d);
    for _ in 0..iters {
        if gc > gd {
            b = d;
            d = c;
            gd = gc;
            c = b - INV_PHI * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + INV_PHI * (b - a);
            gd = g(d);
        }
        if b - a < 1e-15 * (1.0 + b.abs()) {
            break;
        }
    }
    let m = 0.5 * (a + b);
    (m, g(m))
}

/// Lower convex envelope of a sampled graph `(xs, ys)`, returned as values on
/// the same abscissae. `xs` must be strictly increasing. The result is the
/// piecewise-linear lower hull, so convex inputs are fixed points exactly.
pub fn lower_convex_envelope(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    if n <= 2 {
        return ys.to_vec();
    }
    // Monotone-chain lower hull over the graph points.
    let mut hull: Vec<usize> = Vec::with_capacity(n);
    for i in 0..n {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            let cross = (xs[b] - xs[a]) * (ys[i] - ys[a]) - (ys[b] - ys[a]) * (xs[i] - xs[a]);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    // Interpolate the hull back onto the sample abscissae.
    let mut out = vec![0.0; n];
    let mut seg = 0usize;
    for i in 0..n {
        while seg + 1 < hull.len() - 1 && xs[hull[seg + 1]] <= xs[i] {
            seg += 1;
        }
        let (a, b) = (hull[seg], hull[seg + 1]);
        if i == a {
            out[i] = ys[a];
        } else if i == b {
            out[i] = ys[b];
        } else {
            let t = (xs[i] - xs[a]) / (xs[b] - xs[a]);
            out[i] = ys[a] + t * (ys[b] - ys[a]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_interpolates_and_vanishes_at_zero() {
        let m = ScalarNFunction::from_fn(|s| s * s, 1e-4, 10.0, 64);
        assert_eq!(m.eval(0.0), 0.0);
        let v = m.eval(2.0);
        assert!((v - 4.0).abs() < 5e-3, "v = {v}");
        assert_eq!(m.eval(-2.0), m.eval(2.0));
    }

    #[test]
    fn tabulated_conjugate_matches_power_pair() {
        // m(s) = s^2/2 is self-conjugate.
        let m = ScalarNFunction::from_fn(|s| 0.5 * s * s, 1e-5, 100.0, 256);
        for eta in [0.5, 1.0, 3.0, 7.0] {
            let c = m.conjugate_at(eta).unwrap();
            assert!((c - 0.5 * eta * eta).abs() < 2e-3 * (1.0 + eta * eta));
        }
    }

    #[test]
    fn conjugate_flags_out_of_range_eta() {
        let m = ScalarNFunction::from_fn(|s| 0.5 * s * s, 1e-4, 10.0, 64);
        // final slope ~ 10, so eta = 50 escapes
        assert!(matches!(
            m.conjugate_at(50.0),
            Err(OrliczError::GridTooCoarse { .. })
        ));
    }

    #[test]
    fn legendre_sup_is_accurate_for_cubic() {
        // f(s) = s^3/3, f*(eta) = (2/3) eta^{3/2}
        let f = |s: f64| s.powi(3) / 3.0;
        for eta in [0.1, 1.0, 5.0, 10.0] {
            let (v, _, boundary) = legendre_sup(&f, eta, 1e3, 64);
            let exact = 2.0 / 3.0 * eta.powf(1.5);
            assert!(!boundary);
            assert!(
                (v - exact).abs() <= 1e-9 * (1.0 + exact),
                "eta={eta} v={v} exact={exact}"
            );
        }
    }

    #[test]
    fn envelope_of_convex_is_identity() {
        let xs: Vec<f64> = (0..100).map(|i| i as f64 * 0.1).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let env = lower_convex_envelope(&xs, &ys);
        for (a, b) in env.iter().zip(&ys) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn envelope_bridges_nonconvex_gap() {
        // f(s) = min(s^2, (s-2)^2 + 1): hull is linear over the gap.
        let xs: Vec<f64> = (0..=400).map(|i| i as f64 * 0.01).collect();
        let ys: Vec<f64> = xs
            .iter()
            .map(|&s| (s * s).min((s - 2.0) * (s - 2.0) + 1.0))
            .collect();
        let env = lower_convex_envelope(&xs, &ys);
        for (e, y) in env.iter().zip(&ys) {
            assert!(*e <= y + 1e-12);
        }
        // Midpoint convexity of the envelope on the sample grid.
        for i in 1..env.len() - 1 {
            assert!(env[i] <= 0.5 * (env[i - 1] + env[i + 1]) + 1e-12);
        }
        // Somewhere strictly below f (the bridge).
        assert!(env.iter().zip(&ys).any(|(e, y)| *e < y - 1e-3));
    }
}
