//! The N-function catalog: x-dependent anisotropic modular functions with
//! numerical conjugation, convex envelopes and the structural checks the
//! well-posedness theory asks of them.

mod condition_m;
mod envelope;
mod minorant;

pub use condition_m::{check_condition_m, ConditionMParams, Cube, CubeCovering};
pub use envelope::{convex_envelope_1d, convex_envelope_2d, Sampled2d};
pub use minorant::build_minorant;

use crate::error::{OrliczError, Result};
use crate::report::{DiagnosticsReport, Table, Verdict};
use crate::scalar::{legendre_sup, lower_convex_envelope, ScalarNFunction};
use serde::{Deserialize, Serialize};

pub fn norm2(v: [f64; 2]) -> f64 {
    (v[0] * v[0] + v[1] * v[1]).sqrt()
}

pub fn dot2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// A scalar coefficient or exponent as a function of the spatial point.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpatialProfile {
    Constant { value: f64 },
    /// `base + amp * sin(freq * x1)`: smooth, hence log-Hoelder.
    Sine { base: f64, amp: f64, freq: f64 },
    /// `base + amp * exp(1 - 1/(1 - t^2))` with `t = (x1 - center)/width`:
    /// a compactly supported smooth bump.
    Bump { base: f64, amp: f64, center: f64, width: f64 },
    /// `base + amp / log(e + 1/|x1 - center|)`: log-Hoelder continuous but
    /// not Lipschitz at the center.
    LogSingular { base: f64, amp: f64, center: f64 },
    /// Discontinuous step at `x1 = at`: violates log-Hoelder continuity.
    Jump { left: f64, right: f64, at: f64 },
}

impl SpatialProfile {
    pub fn constant(v: f64) -> Self {
        SpatialProfile::Constant { value: v }
    }

    pub fn eval(&self, x: [f64; 2]) -> f64 {
        match *self {
            SpatialProfile::Constant { value } => value,
            SpatialProfile::Sine { base, amp, freq } => base + amp * (freq * x[0]).sin(),
            SpatialProfile::Bump { base, amp, center, width } => {
                let t = (x[0] - center) / width;
                if t.abs() >= 1.0 {
                    base
                } else {
                    base + amp * (1.0 - 1.0 / (1.0 - t * t)).exp()
                }
            }
            SpatialProfile::LogSingular { base, amp, center } => {
                let d = (x[0] - center).abs().max(1e-300);
                base + amp / (std::f64::consts::E + 1.0 / d).ln()
            }
            SpatialProfile::Jump { left, right, at } => {
                if x[0] < at {
                    left
                } else {
                    right
                }
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, SpatialProfile::Constant { .. })
    }
}

/// Radial/tensor sampling grid over `|xi| <= xi_max`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct SampleSpec {
    pub xi_max: f64,
    pub pts_per_decade: usize,
}

impl Default for SampleSpec {
    fn default() -> Self {
        // xi_max = 1e3 by default; conjugation warns when maximizers hit it.
        SampleSpec { xi_max: 1e3, pts_per_decade: 64 }
    }
}

impl SampleSpec {
    /// Log-spaced radial grid (0 excluded) up to `xi_max`.
    pub fn radial_grid(&self) -> Vec<f64> {
        let s_min = self.xi_max * 1e-6;
        let decades = (self.xi_max / s_min).log10();
        let n = ((decades * self.pts_per_decade as f64).ceil() as usize).max(8);
        (0..=n)
            .map(|i| s_min * 10f64.powf(decades * i as f64 / n as f64))
            .collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "catalog", rename_all = "snake_case")]
pub enum Catalog {
    /// `scale * |xi|^p`; the canonical pair with the p-Laplacian uses
    /// `scale = 1/p`.
    PowerP { p: f64, scale: f64 },
    /// `|xi|^{p(x)} / p(x)` when `scale_by_p`, else `|xi|^{p(x)}`.
    VariablePowerPx { p: SpatialProfile, scale_by_p: bool },
    /// `sum_i alpha_i(x) |xi_i|^{p_i(x)} / p_i(x)` on R^2.
    AnisotropicPowers {
        p: [SpatialProfile; 2],
        alpha: [SpatialProfile; 2],
    },
    /// `|xi|^p / p + a(x) |xi|^q / q`.
    DoublePhase { p: f64, q: f64, a: SpatialProfile },
    /// `exp(|xi|) - |xi| - 1`: outside Delta_2.
    Exponential,
    /// Radial table loaded from a two-column CSV.
    #[serde(skip)]
    Tabulated(ScalarNFunction),
}

/// An x-dependent modular function `M(x, xi)` with its sampling grid.
#[derive(Debug, Clone)]
pub struct NFunction {
    pub dim: usize,
    pub catalog: Catalog,
    pub sample: SampleSpec,
}

impl NFunction {
    pub fn new(dim: usize, catalog: Catalog) -> Self {
        assert!(dim == 1 || dim == 2, "only d in {{1,2}} supported");
        NFunction { dim, catalog, sample: SampleSpec::default() }
    }

    pub fn with_sample(mut self, sample: SampleSpec) -> Self {
        self.sample = sample;
        self
    }

    pub fn power(p: f64) -> Self {
        NFunction::new(1, Catalog::PowerP { p, scale: 1.0 / p })
    }

    pub fn power_unscaled(p: f64) -> Self {
        NFunction::new(1, Catalog::PowerP { p, scale: 1.0 })
    }

    pub fn exponential() -> Self {
        NFunction::new(1, Catalog::Exponential)
    }

    /// Loads a tabulated radial N-function from two-column CSV text
    /// (`s,value` with a one-line header).
    pub fn from_radial_csv(dim: usize, text: &str) -> Result<Self> {
        let mut knots = Vec::new();
        let mut values = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            if ln == 0 || line.trim().is_empty() {
                continue; // header
            }
            let mut it = line.split(',');
            let s: f64 = it
                .next()
                .and_then(|t| t.trim().parse().ok())
                .ok_or_else(|| OrliczError::Config(format!("bad csv line {}", ln + 1)))?;
            let v: f64 = it
                .next()
                .and_then(|t| t.trim().parse().ok())
                .ok_or_else(|| OrliczError::Config(format!("bad csv line {}", ln + 1)))?;
            knots.push(s);
            values.push(v);
        }
        let table = ScalarNFunction::from_table(knots, values)?;
        Ok(NFunction::new(dim, Catalog::Tabulated(table)))
    }

    /// `M(x, xi)`.
    pub fn eval(&self, x: [f64; 2], xi: [f64; 2]) -> f64 {
        let s = norm2(xi);
        match &self.catalog {
            Catalog::PowerP { p, scale } => scale * s.powf(*p),
            Catalog::VariablePowerPx { p, scale_by_p } => {
                let px = p.eval(x);
                let v = s.powf(px);
                if *scale_by_p {
                    v / px
                } else {
                    v
                }
            }
            Catalog::AnisotropicPowers { p, alpha } => {
                let mut acc = 0.0;
                for i in 0..2 {
                    let pi = p[i].eval(x);
                    acc += alpha[i].eval(x) * xi[i].abs().powf(pi) / pi;
                }
                acc
            }
            Catalog::DoublePhase { p, q, a } => {
                s.powf(*p) / p + a.eval(x) * s.powf(*q) / q
            }
            Catalog::Exponential => s.exp() - s - 1.0,
            Catalog::Tabulated(t) => t.eval(s),
        }
    }

    /// True when `M(x, .)` depends on `xi` only through `|xi|`.
    pub fn is_radial(&self) -> bool {
        !matches!(self.catalog, Catalog::AnisotropicPowers { .. })
    }

    pub fn is_x_dependent(&self) -> bool {
        match &self.catalog {
            Catalog::PowerP { .. } | Catalog::Exponential | Catalog::Tabulated(_) => false,
            Catalog::VariablePowerPx { p, .. } => !p.is_constant(),
            Catalog::AnisotropicPowers { p, alpha } => {
                p.iter().any(|f| !f.is_constant()) || alpha.iter().any(|f| !f.is_constant())
            }
            Catalog::DoublePhase { a, .. } => !a.is_constant(),
        }
    }

    /// Radial profile `s -> M(x, s e_1)`; only meaningful for radial members.
    pub fn radial(&self, x: [f64; 2]) -> impl Fn(f64) -> f64 + '_ {
        move |s| self.eval(x, [s, 0.0])
    }

    /// Per-component profile `s -> M(x, s e_axis)` for separable members.
    pub fn axis_profile(&self, x: [f64; 2], axis: usize) -> impl Fn(f64) -> f64 + '_ {
        move |s| {
            let mut xi = [0.0; 2];
            xi[axis] = s;
            self.eval(x, xi)
        }
    }

    /// Supremum over the sampled x-lattice and directions of `M(x, xi)` at
    /// radius `s` (the radial envelope from above).
    pub fn sup_profile(&self, x_samples: &[[f64; 2]], s: f64) -> f64 {
        let dirs = self.directions();
        let mut best = 0.0f64;
        for &x in x_samples {
            for &d in &dirs {
                best = best.max(self.eval(x, [s * d.0, s * d.1]));
            }
        }
        best
    }

    /// Infimum analogue of [`Self::sup_profile`].
    pub fn inf_profile(&self, x_samples: &[[f64; 2]], s: f64) -> f64 {
        let dirs = self.directions();
        let mut best = f64::INFINITY;
        for &x in x_samples {
            for &d in &dirs {
                best = best.min(self.eval(x, [s * d.0, s * d.1]));
            }
        }
        best
    }

    fn directions(&self) -> Vec<(f64, f64)> {
        if self.dim == 1 {
            vec![(1.0, 0.0)]
        } else if self.is_radial() {
            vec![(1.0, 0.0)]
        } else {
            (0..16)
                .map(|k| {
                    let a = std::f64::consts::PI * k as f64 / 16.0;
                    (a.cos(), a.sin())
                })
                .collect()
        }
    }

    /// Point evaluation of the conjugate `M*(x, eta)` by direct sup with a
    /// golden-section polish. Exact up to the polish tolerance for radial and
    /// separable members.
    pub fn conjugate_value(&self, x: [f64; 2], eta: [f64; 2]) -> Result<f64> {
        match &self.catalog {
            Catalog::AnisotropicPowers { .. } => {
                let mut acc = 0.0;
                for axis in 0..2 {
                    let f = self.axis_profile(x, axis);
                    let (v, _, boundary) = legendre_sup(
                        &f,
                        eta[axis],
                        self.sample.xi_max,
                        self.sample.pts_per_decade,
                    );
                    if boundary {
                        return Err(OrliczError::GridTooCoarse {
                            eta: eta[axis].abs(),
                            xi_max: self.sample.xi_max,
                        });
                    }
                    acc += v;
                }
                Ok(acc)
            }
            _ => {
                let f = self.radial(x);
                let e = norm2(eta);
                let (v, _, boundary) =
                    legendre_sup(&f, e, self.sample.xi_max, self.sample.pts_per_decade);
                if boundary {
                    return Err(OrliczError::GridTooCoarse { eta: e, xi_max: self.sample.xi_max });
                }
                Ok(v)
            }
        }
    }

    /// Tabulates the radial conjugate at `x` on `(0, eta_max]`.
    /// Reports the validated `|eta|` range implicitly: construction fails with
    /// `GridTooCoarse` when the sup escapes the xi grid anywhere on the range.
    pub fn conjugate(&self, x: [f64; 2], eta_max: f64) -> Result<ScalarNFunction> {
        let boundary_hit = std::cell::Cell::new(None);
        let f = self.radial(x);
        let table = ScalarNFunction::from_fn(
            |eta| {
                let (v, _, b) = legendre_sup(&f, eta, self.sample.xi_max, self.sample.pts_per_decade);
                if b {
                    boundary_hit.set(Some(eta));
                }
                v
            },
            eta_max * 1e-6,
            eta_max,
            self.sample.pts_per_decade.max(128),
        );
        if let Some(eta) = boundary_hit.get() {
            return Err(OrliczError::GridTooCoarse { eta, xi_max: self.sample.xi_max });
        }
        Ok(table)
    }
}

/// Verifies the N-function axioms on the sample grid: vanishing at zero,
/// symmetry, positivity away from zero, midpoint convexity and the
/// sub/superlinearity trends. The trends are finite-grid heuristics; the
/// report records the grid range and thresholds used.
pub fn check_nfunction(m: &NFunction, x_samples: &[[f64; 2]]) -> DiagnosticsReport {
    let mut rep = DiagnosticsReport::new("check_nfunction");
    let grid = m.sample.radial_grid();
    let dirs: Vec<(f64, f64)> = if m.dim == 1 {
        vec![(1.0, 0.0)]
    } else {
        (0..8)
            .map(|k| {
                let a = std::f64::consts::PI * k as f64 / 8.0;
                (a.cos(), a.sin())
            })
            .collect()
    };

    let mut worst_zero = 0.0f64;
    let mut worst_sym = 0.0f64;
    let mut min_pos = f64::INFINITY;
    let mut worst_conv = f64::NEG_INFINITY;
    for &x in x_samples {
        worst_zero = worst_zero.max(m.eval(x, [0.0, 0.0]).abs());
        for &d in &dirs {
            let vals: Vec<f64> = grid.iter().map(|&s| m.eval(x, [s * d.0, s * d.1])).collect();
            for (i, (&s, &v)) in grid.iter().zip(&vals).enumerate() {
                let neg = m.eval(x, [-s * d.0, -s * d.1]);
                worst_sym = worst_sym.max((v - neg).abs() / (1.0 + v.abs()));
                min_pos = min_pos.min(v);
                if i >= 2 {
                    // Midpoint convexity on consecutive log-grid triples; the
                    // midpoint is evaluated directly, not interpolated.
                    let mid = 0.5 * (grid[i - 2] + s);
                    let vm = m.eval(x, [mid * d.0, mid * d.1]);
                    let slack = vm
                        - 0.5 * (vals[i - 2] + v)
                        - 1e-12 * (1.0 + vals[i - 2].abs() + v.abs());
                    worst_conv = worst_conv.max(slack);
                }
            }
        }
    }

    // Superlinearity trends of M(x, s)/s on the sample grid.
    let ratio = |s: f64| -> f64 {
        x_samples
            .iter()
            .flat_map(|&x| dirs.iter().map(move |&d| m.eval(x, [s * d.0, s * d.1])))
            .fold(0.0f64, f64::max)
            / s
    };
    let n = grid.len();
    let r_lo = ratio(grid[0]);
    let r_mid = ratio(grid[n / 2]);
    let r_hi = ratio(grid[n - 1]);
    let sublinear_ok = r_lo <= 0.1 * r_mid.max(1e-300) || r_lo < 1e-9;
    let superlinear_ok = r_hi >= 10.0 * r_mid;

    rep.metric("worst_zero", worst_zero);
    rep.metric("worst_symmetry", worst_sym);
    rep.metric("min_positive_value", min_pos);
    rep.metric("worst_convexity_slack", worst_conv);
    rep.metric("ratio_at_smallest", r_lo);
    rep.metric("ratio_at_mid", r_mid);
    rep.metric("ratio_at_largest", r_hi);
    rep.metric("axiom_vanish_at_zero", if worst_zero <= 1e-12 { 1.0 } else { 0.0 });
    rep.metric("axiom_symmetry", if worst_sym <= 1e-12 { 1.0 } else { 0.0 });
    rep.metric("axiom_convexity", if worst_conv <= 0.0 { 1.0 } else { 0.0 });
    rep.metric(
        "axiom_superlinearity",
        if sublinear_ok && superlinear_ok { 1.0 } else { 0.0 },
    );
    rep.tolerance("convexity_abs", 1e-12);
    rep.note(format!(
        "trend thresholds: ratio(s_min) <= 0.1 ratio(s_mid), ratio(s_max) >= 10 ratio(s_mid); grid [{:.3e}, {:.3e}]",
        grid[0],
        grid[n - 1]
    ));
    let pass = worst_zero <= 1e-12
        && worst_sym <= 1e-12
        && min_pos > 0.0
        && worst_conv <= 0.0
        && sublinear_ok
        && superlinear_ok;
    rep.verdict = if pass { Verdict::Pass } else { Verdict::Fail };
    rep
}

/// Delta_2 trend test: reports `sup M(x, 2 xi) / (1 + M(x, xi))` over the
/// grid's top two octaves and passes when it stays below `threshold`.
pub fn check_delta2(m: &NFunction, x_samples: &[[f64; 2]], threshold: f64) -> DiagnosticsReport {
    let mut rep = DiagnosticsReport::new("check_delta2");
    let grid = m.sample.radial_grid();
    let top = grid[grid.len() - 1];
    let mut table = Table::new("octave_ratios", &["s", "ratio"]);
    let mut sup_top = 0.0f64;
    let mut sup_all = 0.0f64;
    // Dyadic sweep from the smallest sample up to xi_max/2.
    let mut s = grid[0];
    while s <= top / 2.0 {
        let mut r = 0.0f64;
        for &x in x_samples {
            let num = m.eval(x, [2.0 * s, 0.0]);
            let den = 1.0 + m.eval(x, [s, 0.0]);
            r = r.max(num / den);
        }
        table.push(vec![s, r]);
        sup_all = sup_all.max(r);
        if s >= top / 8.0 {
            sup_top = sup_top.max(r);
        }
        s *= 2.0;
    }
    rep.metric("sup_ratio_top_octaves", sup_top);
    rep.metric("sup_ratio_all", sup_all);
    rep.tolerance("threshold", threshold);
    rep.note(format!(
        "trend-based: ratio checked on dyadic s up to {:.3e}; pass requires top-two-octave sup <= threshold",
        top / 2.0
    ));
    rep.tables.push(table);
    rep.verdict = if sup_top.is_finite() && sup_top <= threshold {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    rep
}

/// Log-Hoelder regularity sweep: estimates the smallest `a1` (with `b1 = e`)
/// such that `M(x,xi)/M(y,xi) <= max{|xi|, b1}^{a1 / log(1/|x-y|)}` over all
/// sampled triples, and fails when the estimate diverges as the pair
/// separation shrinks.
pub fn check_log_holder(
    m: &NFunction,
    pairs: &[([f64; 2], [f64; 2])],
    xi_min: f64,
) -> Result<DiagnosticsReport> {
    let mut rep = DiagnosticsReport::new("check_log_holder");
    let b1 = std::f64::consts::E;
    let grid: Vec<f64> = m
        .sample
        .radial_grid()
        .into_iter()
        .filter(|&s| s >= xi_min)
        .collect();
    let mut table = Table::new("pair_estimates", &["separation", "a1"]);
    let mut coarsest: Option<(f64, f64)> = None; // (separation, a1)
    let mut finest: Option<(f64, f64)> = None;
    let mut global_a1 = 0.0f64;
    for &(x, y) in pairs {
        let sep = ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt();
        if sep <= 0.0 || sep >= 0.5 {
            continue;
        }
        let l = -(sep.ln()); // log(1/|x-y|) > log 2
        let mut a1 = 0.0f64;
        for &s in &grid {
            let xi = [s, 0.0];
            let mx = m.eval(x, xi);
            let my = m.eval(y, xi);
            if my <= 0.0 {
                return Err(OrliczError::DegeneratePair(y[0], y[1]));
            }
            // The bound is symmetric in (x, y); test the ratio both ways.
            let r = (mx / my).max(my / mx);
            if r > 1.0 {
                a1 = a1.max(l * r.ln() / s.max(b1).ln());
            }
        }
        table.push(vec![sep, a1]);
        global_a1 = global_a1.max(a1);
        match coarsest {
            None => coarsest = Some((sep, a1)),
            Some((s0, _)) if sep > s0 => coarsest = Some((sep, a1)),
            _ => {}
        }
        match finest {
            None => finest = Some((sep, a1)),
            Some((s0, _)) if sep < s0 => finest = Some((sep, a1)),
            _ => {}
        }
    }
    let (sep_c, a_c) = coarsest.unwrap_or((0.0, 0.0));
    let (sep_f, a_f) = finest.unwrap_or((0.0, 0.0));
    rep.metric("a1_estimate", global_a1);
    rep.metric("b1", b1);
    rep.metric("a1_at_coarsest", a_c);
    rep.metric("a1_at_finest", a_f);
    rep.metric("coarsest_separation", sep_c);
    rep.metric("finest_separation", sep_f);
    rep.tables.push(table);
    rep.note("fail when a1 at the finest separation exceeds 3x the coarsest-scale estimate");
    // Divergence test: a jump makes a1 grow with log(1/sep); smooth exponents
    // keep it flat.
    let diverges = a_c > 1e-9 && a_f > 3.0 * a_c;
    rep.verdict = if global_a1.is_finite() && !diverges {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(rep)
}

/// Tail test for "m grows essentially more rapidly than M": the ratio
/// `sup_x M / m` over the top decade of the shared grid must decrease toward a
/// value below `threshold`.
pub fn grows_essentially_more_rapidly(
    m_bar: impl Fn(f64) -> f64,
    m: &NFunction,
    x_samples: &[[f64; 2]],
    threshold: f64,
) -> DiagnosticsReport {
    let mut rep = DiagnosticsReport::new("grows_essentially_more_rapidly");
    let grid = m.sample.radial_grid();
    let top = grid[grid.len() - 1];
    let lo = top / 10.0;
    let mut table = Table::new("tail_ratio", &["s", "ratio"]);
    let mut ratios = Vec::new();
    for &s in grid.iter().filter(|&&s| s >= lo) {
        let num = m.sup_profile(x_samples, s);
        let den = m_bar(s);
        let r = if den > 0.0 { num / den } else { f64::INFINITY };
        table.push(vec![s, r]);
        ratios.push(r);
    }
    let last = *ratios.last().unwrap_or(&f64::INFINITY);
    let first = *ratios.first().unwrap_or(&f64::INFINITY);
    let decreasing = last <= first;
    rep.metric("ratio_at_decade_start", first);
    rep.metric("ratio_at_top", last);
    rep.tolerance("threshold", threshold);
    rep.tables.push(table);
    rep.verdict = if decreasing && last < threshold {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    rep
}

/// Uniform x-lattice over a box domain, boundary-inclusive.
pub fn x_lattice(domain: &crate::grid::Domain, per_axis: usize) -> Vec<[f64; 2]> {
    let n = per_axis.max(2);
    if domain.dim == 1 {
        (0..n)
            .map(|i| [domain.len[0] * i as f64 / (n - 1) as f64, 0.0])
            .collect()
    } else {
        let mut out = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                out.push([
                    domain.len[0] * i as f64 / (n - 1) as f64,
                    domain.len[1] * j as f64 / (n - 1) as f64,
                ]);
            }
        }
        out
    }
}

/// Convex envelope of the radial inf-over-x slice of `M`, as a scalar table.
/// Shared by the minorant construction and the covering checker.
pub(crate) fn radial_inf_envelope(
    m: &NFunction,
    x_samples: &[[f64; 2]],
    grid: &[f64],
) -> ScalarNFunction {
    let mut xs = Vec::with_capacity(grid.len() + 1);
    let mut ys = Vec::with_capacity(grid.len() + 1);
    xs.push(0.0);
    ys.push(0.0);
    for &s in grid {
        xs.push(s);
        ys.push(m.inf_profile(x_samples, s));
    }
    let env = lower_convex_envelope(&xs, &ys);
    ScalarNFunction::from_table(xs, env).expect("envelope table is well formed")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_line_samples() -> Vec<[f64; 2]> {
        x_lattice(&crate::grid::Domain::line(1.0), 9)
    }

    #[test]
    fn power_catalog_passes_axioms() {
        let m = NFunction::power(3.0);
        let rep = check_nfunction(&m, &unit_line_samples());
        assert_eq!(rep.verdict, Verdict::Pass, "{:?}", rep.metrics);
    }

    #[test]
    fn linear_growth_fails_superlinearity() {
        let table = ScalarNFunction::from_fn(|s| s, 1e-3, 1e3, 32);
        let m = NFunction::new(1, Catalog::Tabulated(table));
        let rep = check_nfunction(&m, &unit_line_samples());
        assert_eq!(rep.verdict, Verdict::Fail);
        assert_eq!(rep.get_metric("axiom_superlinearity"), Some(0.0));
    }

    #[test]
    fn concave_tail_fails_convexity() {
        // s^2 - 0.1 s^4 goes concave (and negative) at larger s.
        let table = ScalarNFunction::from_fn(|s| s * s - 0.1 * s.powi(4), 1e-3, 3.0, 64);
        let m = NFunction::new(1, Catalog::Tabulated(table));
        let rep = check_nfunction(&m, &unit_line_samples());
        assert_eq!(rep.get_metric("axiom_convexity"), Some(0.0));
    }

    #[test]
    fn delta2_power_ratio_is_two_to_p() {
        let m = NFunction::power_unscaled(3.0);
        let rep = check_delta2(&m, &unit_line_samples(), 1024.0);
        assert_eq!(rep.verdict, Verdict::Pass);
        let sup = rep.get_metric("sup_ratio_top_octaves").unwrap();
        assert!((sup - 8.0).abs() < 0.1, "sup = {sup}");
    }

    #[test]
    fn delta2_exponential_fails() {
        let m = NFunction::exponential().with_sample(SampleSpec { xi_max: 100.0, pts_per_decade: 32 });
        let rep = check_delta2(&m, &unit_line_samples(), 1024.0);
        assert_eq!(rep.verdict, Verdict::Fail);
    }

    #[test]
    fn delta2_double_phase_bounded_by_two_to_q() {
        let m = NFunction::new(
            1,
            Catalog::DoublePhase { p: 2.0, q: 3.0, a: SpatialProfile::constant(0.5) },
        );
        let rep = check_delta2(&m, &unit_line_samples(), 1024.0);
        assert_eq!(rep.verdict, Verdict::Pass);
        assert!(rep.get_metric("sup_ratio_all").unwrap() <= 2f64.powi(3) + 1e-9);
    }

    #[test]
    fn conjugate_of_quadratic_is_self() {
        let m = NFunction::new(1, Catalog::PowerP { p: 2.0, scale: 0.5 });
        for eta in [0.25, 1.0, 2.5, 5.0] {
            let v = m.conjugate_value([0.0; 2], [eta, 0.0]).unwrap();
            assert!(
                (v - 0.5 * eta * eta).abs() <= 1e-6 * (1.0 + 0.5 * eta * eta),
                "eta={eta} v={v}"
            );
        }
    }

    #[test]
    fn conjugate_of_exponential_matches_closed_form() {
        let m = NFunction::exponential();
        for eta in [0.1f64, 1.0, 4.0, 10.0] {
            let v = m.conjugate_value([0.0; 2], [eta, 0.0]).unwrap();
            let exact = (1.0 + eta) * (1.0 + eta).ln() - eta;
            assert!(
                (v - exact).abs() <= 1e-5 * (1.0 + exact),
                "eta={eta} v={v} exact={exact}"
            );
        }
    }

    #[test]
    fn conjugate_order_reverses() {
        // M1 <= M2 pointwise implies M2* <= M1*.
        let m1 = NFunction::new(1, Catalog::PowerP { p: 2.0, scale: 0.5 });
        let m2 = NFunction::new(1, Catalog::PowerP { p: 2.0, scale: 1.0 });
        for eta in [0.5, 1.0, 3.0] {
            let c1 = m1.conjugate_value([0.0; 2], [eta, 0.0]).unwrap();
            let c2 = m2.conjugate_value([0.0; 2], [eta, 0.0]).unwrap();
            assert!(c2 <= c1 + 1e-12);
        }
    }

    #[test]
    fn log_holder_constant_in_x_passes() {
        let m = NFunction::power(2.0);
        let pairs: Vec<_> = (1..8)
            .map(|k| {
                let d = 0.4 / 2f64.powi(k);
                ([0.3, 0.0], [0.3 + d, 0.0])
            })
            .collect();
        let rep = check_log_holder(&m, &pairs, 1e-2).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass);
        assert!(rep.get_metric("a1_estimate").unwrap() < 1e-9);
    }

    #[test]
    fn log_holder_smooth_variable_exponent_passes() {
        let m = NFunction::new(
            1,
            Catalog::VariablePowerPx {
                p: SpatialProfile::LogSingular { base: 2.0, amp: 0.5, center: 0.5 },
                scale_by_p: false,
            },
        );
        let pairs: Vec<_> = (1..24)
            .map(|k| {
                let d = 0.4 / 1.8f64.powi(k);
                ([0.5, 0.0], [0.5 + d, 0.0])
            })
            .collect();
        let rep = check_log_holder(&m, &pairs, 1.0).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass, "{:?}", rep.metrics);
        assert!(rep.get_metric("a1_estimate").unwrap() > 0.0);
    }

    #[test]
    fn log_holder_jump_exponent_fails() {
        let m = NFunction::new(
            1,
            Catalog::VariablePowerPx {
                p: SpatialProfile::Jump { left: 2.0, right: 4.0, at: 0.5 },
                scale_by_p: false,
            },
        );
        let pairs: Vec<_> = (1..40)
            .map(|k| {
                let d = 0.2 / 1.8f64.powi(k);
                ([0.5 - d / 2.0, 0.0], [0.5 + d / 2.0, 0.0])
            })
            .collect();
        let rep = check_log_holder(&m, &pairs, 1.0).unwrap();
        assert_eq!(rep.verdict, Verdict::Fail);
    }

    #[test]
    fn growth_gap_detection() {
        let m2 = NFunction::new(1, Catalog::PowerP { p: 2.0, scale: 1.0 })
            .with_sample(SampleSpec { xi_max: 1e3, pts_per_decade: 32 });
        let xs = unit_line_samples();
        let fast = grows_essentially_more_rapidly(|s| s.powi(4), &m2, &xs, 1e-2);
        assert_eq!(fast.verdict, Verdict::Pass);
        let equal = grows_essentially_more_rapidly(|s| s * s, &m2, &xs, 1e-2);
        assert_eq!(equal.verdict, Verdict::Fail);
    }
}
